//! Pipeline drivers: analyze, sweep, and the scenario catalogue.

use std::f64::consts::PI;

use serde_json::json;

use poisson_averaging::average::AveragingOrder;
use poisson_averaging::orbit::{continuation_in_epsilon, integrate};
use poisson_averaging::sample::{SampleRng, VALIDATION_SEED};
use poisson_averaging::scenario::{cross_check, ClosedForms, Scenario, ScenarioName};
use poisson_averaging::zeros::{find_zeros, local_small_amplitude_scan, ZeroFinderOptions};
use poisson_averaging::{validate_poisson, Jet1};

use crate::config::{
    build_scenario, default_search_box, scenario_name, LocalScanBlock, RunConfig,
};
use crate::document::*;
use crate::CliError;

const SECOND_ORDER_GATE_TOL: f64 = 1e-9;
const ROUNDTRIP_SAMPLES: usize = 100;

fn numerical(e: poisson_averaging::Error) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Full analysis: validation, chart self-checks, averaged probes, the zero
/// report, and (when requested) orbit certification by continuation.
pub fn run_analyze(config: &RunConfig) -> Result<Document, CliError> {
    let name = scenario_name(&config.scenario)?;
    let scenario = build_scenario(&config.scenario)?;
    let quad = config.quadrature.to_config();
    quad.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let validation = validate_poisson(scenario.spec(), 50).map_err(numerical)?;
    if !validation.valid() {
        return Err(CliError::Config(format!(
            "spec validation failed: {}",
            ValidationOut::from_report(&validation).failures.join("; ")
        )));
    }

    let chart_checks = chart_self_checks(&scenario, &validation)?;

    let order = match config.order {
        1 => AveragingOrder::First,
        2 => AveragingOrder::Second,
        other => {
            return Err(CliError::Config(format!("order: must be 1 or 2, got {other}")))
        }
    };

    let box_block = config
        .search_box
        .clone()
        .unwrap_or_else(|| default_search_box(name));
    let search_box = box_block.to_search_box();
    search_box
        .validate(scenario.standard_form().dim())
        .map_err(|e| CliError::Config(e.to_string()))?;

    let map = scenario.averaged(quad, order).map_err(numerical)?;

    // Second-order conclusions require the first-order function to vanish.
    let gate = if order == AveragingOrder::Second {
        let g = map
            .identically_zero_gate(search_box.r, &search_box.z, 5, SECOND_ORDER_GATE_TOL)
            .map_err(numerical)?;
        if !g.passed {
            return Err(CliError::Numerical(format!(
                "second-order averaging requested but the first-order function reaches {:e} \
                 on the probe grid (gate {:e})",
                g.max_abs, g.tol
            )));
        }
        Some(GateOut { max_abs: g.max_abs, probes: g.probes, tol: g.tol, passed: g.passed })
    } else {
        None
    };

    // Probe samples of the bifurcation functions across the search box.
    let mut probes = Vec::new();
    let r_probes = probe_axis(search_box.r);
    let z_probes = probe_axis(search_box.z[0]);
    for &r in &r_probes {
        for &z0 in &z_probes {
            let mut point = vec![r, z0];
            point.extend(search_box.z[1..].iter().map(|&(lo, hi)| 0.5 * (lo + hi)));
            let gbar0 = map.gbar0(&point).map_err(numerical)?;
            let rho_bar = if order == AveragingOrder::Second {
                Some(map.rho_bar(&point).map_err(numerical)?)
            } else {
                None
            };
            probes.push(ProbeOut { r: point[0], z: point[1..].to_vec(), gbar0, rho_bar });
        }
    }

    let report = find_zeros(&map, &search_box, &ZeroFinderOptions::default())
        .map_err(numerical)?;
    let forms = scenario.zero_hopf_forms();
    let zeros_out = ZerosOut::from_report(&report, |point| {
        forms.map(|f| f.to_rw(point[0], point[1]).1)
    });

    // Scenario extras: local scan, closed-form references, cross-check.
    let local_scan = match &scenario.closed {
        Some(ClosedForms::Duffing(forms)) => {
            let block = config.local_scan.clone().unwrap_or_default();
            let scan = local_small_amplitude_scan(
                &map,
                &forms.leading_powers,
                block.r_max,
                &[(block.z[0], block.z[1])],
                5,
            )
            .map_err(numerical)?;
            Some(LocalScanOut::from_report(&forms.leading_powers, &scan))
        }
        _ => None,
    };
    let closed_forms = closed_forms_out(&scenario);
    let cross = if scenario.closed.is_some() {
        let r_grid = probe_axis(search_box.r);
        let z_grid = probe_axis(search_box.z[0]);
        let report = cross_check(&scenario, quad, &r_grid, &z_grid).map_err(numerical)?;
        Some(CrossCheckOut::from_report(&report))
    } else {
        None
    };

    // Orbit certification: continuation in epsilon from every located zero.
    let orbits = if config.verify {
        let mut eps = config.epsilon.values();
        if eps.is_empty() {
            return Err(CliError::Config("epsilon: list must not be empty".into()));
        }
        eps.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let shoot = config.integrator.to_shoot_config();
        let mut out = Vec::new();
        for zero in &report.zeros {
            if !zero.simple {
                continue;
            }
            let table = continuation_in_epsilon(
                scenario.standard_form(),
                &zero.point,
                &eps,
                &shoot,
            )
            .map_err(numerical)?;
            out.push(OrbitOut::from_table(&zero.point, &table));
        }
        Some(out)
    } else {
        Some(Vec::new())
    };

    Ok(Document {
        config: ResolvedConfig { run: resolved(config, name), tolerances: ToleranceSet::default() },
        chart_checks: Some(chart_checks),
        averaging: Some(AveragingOut {
            order: config.order,
            probes,
            second_order_gate: gate,
            local_scan,
            closed_forms,
            cross_check: cross,
        }),
        zeros: Some(zeros_out),
        orbits,
        sweep: None,
    })
}

/// One analysis row per swept value; failures land in the row, the sweep
/// continues.
pub fn run_sweep(config: &RunConfig) -> Result<Document, CliError> {
    let name = scenario_name(&config.scenario)?;
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| CliError::Config("sweep: block required for the sweep command".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::Config("sweep.values: grid must not be empty".into()));
    }

    let shoot = config.integrator.to_shoot_config();
    let quad = config.quadrature.to_config();
    quad.validate().map_err(|e| CliError::Config(e.to_string()))?;

    let mut rows = Vec::new();
    for &value in &sweep.values {
        let row = (|| -> Result<SweepRow, CliError> {
            let patched = crate::config::apply_sweep_value(config, &sweep.parameter, value)?;
            let scenario = build_scenario(&patched.scenario)?;
            let order = match patched.order {
                1 => AveragingOrder::First,
                2 => AveragingOrder::Second,
                other => {
                    return Err(CliError::Config(format!("order: must be 1 or 2, got {other}")))
                }
            };
            let box_block = patched
                .search_box
                .clone()
                .unwrap_or_else(|| default_search_box(name));
            let search_box = box_block.to_search_box();
            search_box
                .validate(scenario.standard_form().dim())
                .map_err(|e| CliError::Config(e.to_string()))?;
            let map = scenario.averaged(quad, order).map_err(numerical)?;
            let report = find_zeros(&map, &search_box, &ZeroFinderOptions::default())
                .map_err(numerical)?;
            let eps = patched.epsilon.values();
            let mut zeros = Vec::new();
            for zero in report.zeros.iter().filter(|z| z.simple) {
                let shoot_distance = if patched.verify && !eps.is_empty() {
                    match poisson_averaging::poincare_shoot(
                        scenario.standard_form(),
                        eps[0],
                        &zero.point,
                        &zero.point,
                        &shoot,
                    ) {
                        Ok(outcome) => outcome.certificate().map(|c| c.distance),
                        Err(_) => None,
                    }
                } else {
                    None
                };
                zeros.push(SweepZero {
                    r: zero.point[0],
                    z: zero.point[1..].to_vec(),
                    stability: zero.stability.as_str().to_string(),
                    shoot_distance,
                });
            }
            Ok(SweepRow { swept_value: value, error: None, zero_count: zeros.len(), zeros })
        })();
        rows.push(row.unwrap_or_else(|e| SweepRow {
            swept_value: value,
            error: Some(e.to_string()),
            zero_count: 0,
            zeros: Vec::new(),
        }));
    }

    Ok(Document {
        config: ResolvedConfig { run: resolved(config, name), tolerances: ToleranceSet::default() },
        chart_checks: None,
        averaging: None,
        zeros: None,
        orbits: None,
        sweep: Some(rows),
    })
}

fn resolved(config: &RunConfig, name: ScenarioName) -> RunConfig {
    let mut out = config.clone();
    if out.search_box.is_none() {
        out.search_box = Some(default_search_box(name));
    }
    if name == ScenarioName::Duffing && out.local_scan.is_none() {
        out.local_scan = Some(LocalScanBlock::default());
    }
    out
}

fn probe_axis((lo, hi): (f64, f64)) -> Vec<f64> {
    vec![lo, 0.5 * (lo + hi), hi]
}

fn chart_self_checks(
    scenario: &Scenario,
    validation: &poisson_averaging::ValidationReport,
) -> Result<ChartChecks, CliError> {
    let chart = scenario.chart();
    let spec = scenario.spec();
    let mut rng = SampleRng::new(VALIDATION_SEED);
    let mut roundtrip_max = 0.0f64;
    for _ in 0..ROUNDTRIP_SAMPLES {
        let x = rng.point_in_box(spec.domain_hint());
        let y = chart.forward_values(&x).map_err(numerical)?;
        let back = chart.invert(&y, None).map_err(numerical)?;
        let err = x
            .iter()
            .zip(back.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        roundtrip_max = roundtrip_max.max(err);
    }

    let dphi = chart.jacobian_values(&vec![0.0; spec.dim()]).map_err(numerical)?;
    let n = spec.dim();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((dphi[i * n + j] - expected).abs());
        }
    }

    // Unperturbed reduced flow: an exact oscillator on each leaf; integrate
    // one full period and measure the energy drift.
    let y0 = vec![
        Jet1::constant(0.6),
        Jet1::constant(-0.2),
        Jet1::constant(0.3),
    ];
    let h0 = 0.5 * (0.36 + 0.04);
    let traj = integrate(
        |_t, y: &[Jet1]| Ok(vec![y[1].clone(), -y[0].clone(), Jet1::constant(0.0)]),
        0.0,
        2.0 * PI,
        y0,
        &poisson_averaging::IntegratorConfig::default(),
    )
    .map_err(numerical)?;
    let mut drift = 0.0f64;
    for state in &traj.states {
        let h = 0.5 * (state[0].value * state[0].value + state[1].value * state[1].value);
        drift = drift.max((h - h0).abs());
    }

    Ok(ChartChecks {
        validation: ValidationOut::from_report(validation),
        roundtrip_samples: ROUNDTRIP_SAMPLES,
        roundtrip_max,
        chart_linearization_defect: defect,
        oscillator_energy_drift: drift,
    })
}

fn closed_forms_out(scenario: &Scenario) -> Option<ClosedFormsOut> {
    match &scenario.closed {
        Some(ClosedForms::Harmonic(f)) => Some(ClosedFormsOut {
            harmonic_root: f.root().map(|(r, z)| [r, z]),
            harmonic_expected_zero_count: Some(f.expected_zero_count()),
            zero_hopf_predicted_rw: None,
            duffing_deltas: None,
            duffing_ghat_reference: None,
        }),
        Some(ClosedForms::ZeroHopf(f)) => Some(ClosedFormsOut {
            harmonic_root: None,
            harmonic_expected_zero_count: None,
            zero_hopf_predicted_rw: f
                .predicted_zeros()
                .map(|zs| zs.into_iter().map(|(r, w)| [r, w]).collect()),
            duffing_deltas: None,
            duffing_ghat_reference: None,
        }),
        Some(ClosedForms::Duffing(f)) => Some(ClosedFormsOut {
            harmonic_root: None,
            harmonic_expected_zero_count: None,
            zero_hopf_predicted_rw: None,
            duffing_deltas: Some([f.delta1, f.delta2]),
            duffing_ghat_reference: Some(f.ghat_reference()),
        }),
        None => None,
    }
}

/// The scenario catalogue as a JSON document.
pub fn scenario_catalogue() -> serde_json::Value {
    json!([
        {
            "name": "harmonic_potential",
            "summary": "planar oscillator with a potential shaped by h(x1, x3); constant rank-2 structure matrix, Casimir x3",
            "parameters": {
                "h": "polynomial in (x1, x3), keys \"i k\"; zero constant term required",
                "f": "homogeneous quadratic forcing: a, b, c polynomials in (x1, x2, x3), keys \"i j k\""
            },
            "closed_forms": "averaged function, zero count and root when h = x3 and c has no x1^2 term",
            "example": {
                "scenario": {
                    "name": "harmonic_potential",
                    "h": {"0 1": 1.0},
                    "f": {"a": {"1 0 1": 1.0}, "c": {"0 2 0": 1.0, "0 0 2": -2.0}}
                }
            }
        },
        {
            "name": "zero_hopf",
            "summary": "zero-Hopf normal form with Casimir x3 + P(x1^2 + x2^2); globally invertible chart, unit rescaling",
            "parameters": {
                "p": "univariate polynomial, keys \"k\", P(0) = 0",
                "f": "forcing without constant/linear terms: a, b, c polynomials, keys \"i j k\""
            },
            "closed_forms": "averaged pair from trigonometric moments; reduced quadratic and zero predictions for cubic forcing",
            "example": {
                "scenario": {
                    "name": "zero_hopf",
                    "p": {"1": 1.0},
                    "f": {
                        "a": {"1 2 0": 8.0, "1 0 1": 2.0},
                        "c": {"0 2 0": 2.0, "0 2 1": 6.0, "0 0 3": -1.0}
                    }
                }
            }
        },
        {
            "name": "duffing",
            "summary": "Duffing oscillator embedded with the stiffness as x3; square-root chart with domain x1^2 x3 + 2 > 0",
            "parameters": {
                "f": "forcing without constant/linear terms: a, b, c polynomials, keys \"i j k\""
            },
            "closed_forms": "cubic-order quantities from the forcing coefficients; declared leading powers (3, 2) for the small-amplitude scan",
            "example": {
                "scenario": {
                    "name": "duffing",
                    "f": {"a": {"0 0 3": 1.0}}
                }
            }
        }
    ])
}

/// Plain-text catalogue for terminals.
pub fn scenario_listing_text() -> String {
    let mut out = String::from("built-in scenarios:\n");
    for item in scenario_catalogue().as_array().unwrap() {
        out.push_str(&format!(
            "  {:<20} {}\n",
            item["name"].as_str().unwrap(),
            item["summary"].as_str().unwrap()
        ));
    }
    out.push_str("\nrun `analyze --config <file>` with a scenario block; `--format json` prints parameter schemas\n");
    out
}
