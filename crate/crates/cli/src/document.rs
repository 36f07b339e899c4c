//! Machine-readable result documents.
//!
//! Serialization goes through plain structs with fixed field order and
//! `BTreeMap`s only, so identical configurations produce byte-identical
//! JSON.

use serde::Serialize;

use poisson_averaging::orbit::ContinuationTable;
use poisson_averaging::poisson::ValidationReport;
use poisson_averaging::scenario::CrossCheckReport;
use poisson_averaging::zeros::{LocalScanReport, ZeroReport};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct Document {
    pub config: ResolvedConfig,
    pub chart_checks: Option<ChartChecks>,
    pub averaging: Option<AveragingOut>,
    pub zeros: Option<ZerosOut>,
    pub orbits: Option<Vec<OrbitOut>>,
    pub sweep: Option<Vec<SweepRow>>,
}

/// The configuration after defaults were filled in, plus the fixed engine
/// tolerances, so a document is reproducible from its own header.
#[derive(Debug, Serialize)]
pub struct ResolvedConfig {
    #[serde(flatten)]
    pub run: RunConfig,
    pub tolerances: ToleranceSet,
}

#[derive(Debug, Serialize)]
pub struct ToleranceSet {
    pub integrator_method: &'static str,
    pub newton_tol: f64,
    pub dedup_radius: f64,
    pub simplicity_factor: f64,
    pub zero_field_gate: f64,
    pub shoot_tol: f64,
    pub r_min: f64,
    pub slow_angle_margin: f64,
    pub chart_newton_tol: f64,
    pub second_order_gate: f64,
    pub closed_form_tol: f64,
    pub validation_samples: usize,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        let zf = poisson_averaging::ZeroFinderOptions::default();
        let sc = poisson_averaging::ShootConfig::default();
        ToleranceSet {
            integrator_method: "dormand-prince-5(4)",
            newton_tol: zf.newton_tol,
            dedup_radius: zf.dedup_radius,
            simplicity_factor: zf.simplicity_factor,
            zero_field_gate: zf.zero_field_gate,
            shoot_tol: sc.tol,
            r_min: poisson_averaging::standard_form::DEFAULT_R_MIN,
            slow_angle_margin: poisson_averaging::standard_form::DEFAULT_SLOW_ANGLE_MARGIN,
            chart_newton_tol: 1e-12,
            second_order_gate: 1e-9,
            closed_form_tol: 1e-8,
            validation_samples: 50,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ChartChecks {
    pub validation: ValidationOut,
    pub roundtrip_samples: usize,
    pub roundtrip_max: f64,
    pub chart_linearization_defect: f64,
    pub oscillator_energy_drift: f64,
}

#[derive(Debug, Serialize)]
pub struct ValidationOut {
    pub samples: usize,
    pub valid: bool,
    pub max_antisymmetry: f64,
    pub max_jacobi: f64,
    pub max_casimir: f64,
    pub max_hamiltonian_drift: f64,
    pub failures: Vec<String>,
}

impl ValidationOut {
    pub fn from_report(report: &ValidationReport) -> Self {
        ValidationOut {
            samples: report.samples,
            valid: report.valid(),
            max_antisymmetry: report.max_antisymmetry,
            max_jacobi: report.max_jacobi,
            max_casimir: report.max_casimir,
            max_hamiltonian_drift: report.max_hamiltonian_drift,
            failures: report
                .failures
                .iter()
                .map(|f| format!("{} at {:?} ({:e})", f.check, f.point, f.magnitude))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct AveragingOut {
    pub order: u8,
    pub probes: Vec<ProbeOut>,
    pub second_order_gate: Option<GateOut>,
    pub local_scan: Option<LocalScanOut>,
    pub closed_forms: Option<ClosedFormsOut>,
    pub cross_check: Option<CrossCheckOut>,
}

#[derive(Debug, Serialize)]
pub struct ProbeOut {
    pub r: f64,
    pub z: Vec<f64>,
    pub gbar0: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho_bar: Option<Vec<f64>>,
}

#[derive(Debug, Serialize)]
pub struct GateOut {
    pub max_abs: f64,
    pub probes: usize,
    pub tol: f64,
    pub passed: bool,
}

#[derive(Debug, Serialize)]
pub struct LocalScanOut {
    pub leading_powers: Vec<u32>,
    pub r_levels: Vec<f64>,
    pub origin_estimate: Vec<f64>,
    pub origin_converged: bool,
    pub identically_zero: bool,
    pub zero_count: usize,
    pub zeros: Vec<Vec<f64>>,
}

impl LocalScanOut {
    pub fn from_report(powers: &[u32], report: &LocalScanReport) -> Self {
        LocalScanOut {
            leading_powers: powers.to_vec(),
            r_levels: report.r_levels.to_vec(),
            origin_estimate: report.origin.clone(),
            origin_converged: report.origin_converged,
            identically_zero: report.identically_zero,
            zero_count: report.zero_count,
            zeros: report.zeros.clone(),
        }
    }
}

/// Scenario-declared reference quantities, echoed for the record.
#[derive(Debug, Serialize)]
pub struct ClosedFormsOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_root: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub harmonic_expected_zero_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_hopf_predicted_rw: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duffing_deltas: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duffing_ghat_reference: Option<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct CrossCheckOut {
    pub pass: bool,
    pub max_discrepancy: f64,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl CrossCheckOut {
    pub fn from_report(report: &CrossCheckReport) -> Self {
        CrossCheckOut {
            pass: report.pass,
            max_discrepancy: report.max_discrepancy,
            checks: report.items.len(),
            failures: report
                .failures()
                .map(|i| format!("{} at {:?}: {:e}", i.formula, i.point, i.discrepancy))
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ZerosOut {
    pub identically_zero: bool,
    pub count: usize,
    pub zeros: Vec<ZeroOut>,
    pub starts: usize,
    pub converged: usize,
    pub rejected_small_r: usize,
    pub rejected_out_of_box: usize,
    pub failed_evaluations: usize,
}

#[derive(Debug, Serialize)]
pub struct ZeroOut {
    pub r: f64,
    pub z: Vec<f64>,
    pub residual: f64,
    pub residual_doubled: f64,
    pub jacobian: Vec<f64>,
    pub simple: bool,
    pub stability: String,
    pub order: u8,
    /// For the zero-Hopf scenario: the shifted Casimir coordinate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_w: Option<f64>,
}

impl ZerosOut {
    pub fn from_report(report: &ZeroReport, reduced_w: impl Fn(&[f64]) -> Option<f64>) -> Self {
        ZerosOut {
            identically_zero: report.identically_zero,
            count: report.zeros.len(),
            zeros: report
                .zeros
                .iter()
                .map(|z| ZeroOut {
                    r: z.point[0],
                    z: z.point[1..].to_vec(),
                    residual: z.residual,
                    residual_doubled: z.residual_doubled,
                    jacobian: z.jacobian.clone(),
                    simple: z.simple,
                    stability: z.stability.as_str().to_string(),
                    order: z.order,
                    reduced_w: reduced_w(&z.point),
                })
                .collect(),
            starts: report.starts,
            converged: report.converged,
            rejected_small_r: report.rejected_small_r,
            rejected_out_of_box: report.rejected_out_of_box,
            failed_evaluations: report.failed_evaluations,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OrbitOut {
    pub zero: ZeroRef,
    pub rows: Vec<ContinuationRowOut>,
    pub slope: Option<f64>,
    pub truncated: bool,
}

#[derive(Debug, Serialize)]
pub struct ZeroRef {
    pub r: f64,
    pub z: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ContinuationRowOut {
    pub epsilon: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub fixed_point: Option<Vec<f64>>,
    pub distance: Option<f64>,
    pub residual: f64,
}

impl OrbitOut {
    pub fn from_table(zero: &[f64], table: &ContinuationTable) -> Self {
        OrbitOut {
            zero: ZeroRef { r: zero[0], z: zero[1..].to_vec() },
            rows: table
                .rows
                .iter()
                .map(|row| ContinuationRowOut {
                    epsilon: row.epsilon,
                    converged: row.fixed_point.is_some(),
                    degenerate: row.degenerate,
                    fixed_point: row.fixed_point.clone(),
                    distance: row.distance,
                    residual: row.residual,
                })
                .collect(),
            slope: table.slope,
            truncated: table.truncated,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub swept_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub zero_count: usize,
    pub zeros: Vec<SweepZero>,
}

#[derive(Debug, Serialize)]
pub struct SweepZero {
    pub r: f64,
    pub z: Vec<f64>,
    pub stability: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shoot_distance: Option<f64>,
}

/// CSV rendering of a sweep: `swept_value,zero_count`, then per-zero
/// `r{i},z{i}_{j},stability{i},shoot_distance{i}` columns padded across rows.
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let max_zeros = rows.iter().map(|r| r.zeros.len()).max().unwrap_or(0);
    let z_dims = rows
        .iter()
        .flat_map(|r| r.zeros.iter().map(|z| z.z.len()))
        .max()
        .unwrap_or(1);
    let mut out = String::from("swept_value,zero_count");
    for i in 1..=max_zeros {
        out.push_str(&format!(",r{i}"));
        for j in 1..=z_dims {
            out.push_str(&format!(",z{i}_{j}"));
        }
        out.push_str(&format!(",stability{i},shoot_distance{i}"));
    }
    out.push('\n');
    for row in rows {
        out.push_str(&format!("{},{}", row.swept_value, row.zero_count));
        for i in 0..max_zeros {
            match row.zeros.get(i) {
                Some(zero) => {
                    out.push_str(&format!(",{}", zero.r));
                    for j in 0..z_dims {
                        match zero.z.get(j) {
                            Some(v) => out.push_str(&format!(",{v}")),
                            None => out.push(','),
                        }
                    }
                    out.push_str(&format!(",{}", zero.stability));
                    match zero.shoot_distance {
                        Some(d) => out.push_str(&format!(",{d}")),
                        None => out.push(','),
                    }
                }
                None => {
                    for _ in 0..(1 + z_dims + 2) {
                        out.push(',');
                    }
                }
            }
        }
        out.push('\n');
    }
    out
}
