//! Run configuration: JSON schema, defaults, and scenario assembly.
//!
//! Polynomials travel as objects mapping space-separated exponent strings to
//! coefficients, e.g. `{"1 0 1": 2.0}` for `2 x1 x3` in three variables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use poisson_averaging::scenario::{
    make_duffing, make_harmonic_potential, make_zero_hopf, ForcingCoefficients, Scenario,
    ScenarioName,
};
use poisson_averaging::zeros::SearchBox;
use poisson_averaging::{IntegratorConfig, QuadratureConfig, ShootConfig, SparsePoly};

use crate::CliError;

pub type PolyTable = BTreeMap<String, f64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    #[serde(default = "default_epsilon")]
    pub epsilon: EpsilonList,
    #[serde(default = "default_order")]
    pub order: u8,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_box: Option<SearchBoxBlock>,
    #[serde(default)]
    pub integrator: IntegratorBlock,
    #[serde(default = "default_true")]
    pub verify: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_scan: Option<LocalScanBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    /// Potential slope for `harmonic_potential`: keys are `"i k"` exponents
    /// of `x1^i x3^k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<PolyTable>,
    /// Casimir profile for `zero_hopf`: univariate keys `"k"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<PolyTable>,
    #[serde(default)]
    pub f: ForcingTable,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTable {
    #[serde(default)]
    pub a: PolyTable,
    #[serde(default)]
    pub b: PolyTable,
    #[serde(default)]
    pub c: PolyTable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsilonList {
    One(f64),
    Many(Vec<f64>),
}

impl EpsilonList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            EpsilonList::One(e) => vec![*e],
            EpsilonList::Many(v) => v.clone(),
        }
    }
}

fn default_epsilon() -> EpsilonList {
    EpsilonList::Many(vec![1e-2, 1e-3, 1e-4])
}

fn default_order() -> u8 {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    pub nodes: usize,
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        let q = QuadratureConfig::default();
        QuadratureBlock { nodes: q.nodes, tol: q.tol, max_doublings: q.max_doublings }
    }
}

impl QuadratureBlock {
    pub fn to_config(&self) -> QuadratureConfig {
        QuadratureConfig { nodes: self.nodes, tol: self.tol, max_doublings: self.max_doublings }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchBoxBlock {
    pub r: [f64; 2],
    pub z: Vec<[f64; 2]>,
    pub grid: Vec<usize>,
}

impl SearchBoxBlock {
    pub fn to_search_box(&self) -> SearchBox {
        SearchBox {
            r: (self.r[0], self.r[1]),
            z: self.z.iter().map(|b| (b[0], b[1])).collect(),
            grid: self.grid.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorBlock {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorBlock {
    fn default() -> Self {
        let c = IntegratorConfig::default();
        IntegratorBlock { rtol: c.rtol, atol: c.atol, max_steps: c.max_steps }
    }
}

impl IntegratorBlock {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
            h_max: None,
        }
    }

    pub fn to_shoot_config(&self) -> ShootConfig {
        ShootConfig { integrator: self.to_config(), ..Default::default() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    /// `"epsilon"`, `"f.a.<exponents>"`, `"f.b.<exponents>"`,
    /// `"f.c.<exponents>"`, `"h.<exponents>"` or `"p.<exponents>"`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalScanBlock {
    pub r_max: f64,
    pub z: [f64; 2],
}

impl Default for LocalScanBlock {
    fn default() -> Self {
        LocalScanBlock { r_max: 0.3, z: [-0.3, 0.3] }
    }
}

pub fn parse_poly(table: &PolyTable, arity: usize, path: &str) -> Result<SparsePoly, CliError> {
    let mut poly = SparsePoly::new(arity);
    for (key, &coeff) in table {
        let exps: Vec<u32> = key
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| {
                    CliError::Config(format!(
                        "{path}: exponent key {key:?} contains non-integer {tok:?}"
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        if exps.len() != arity {
            return Err(CliError::Config(format!(
                "{path}: exponent key {key:?} has {} exponents but the polynomial takes {arity}",
                exps.len()
            )));
        }
        poly.add_term(&exps, coeff)
            .map_err(|e| CliError::Config(format!("{path}: {e}")))?;
    }
    Ok(poly)
}

pub fn scenario_name(config: &ScenarioConfig) -> Result<ScenarioName, CliError> {
    ScenarioName::parse(&config.name).ok_or_else(|| {
        CliError::Config(format!(
            "scenario.name: unknown scenario {:?}; run `list-scenarios` for the catalogue",
            config.name
        ))
    })
}

pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario, CliError> {
    let name = scenario_name(config)?;
    let forcing = ForcingCoefficients::new(
        parse_poly(&config.f.a, 3, "scenario.f.a")?,
        parse_poly(&config.f.b, 3, "scenario.f.b")?,
        parse_poly(&config.f.c, 3, "scenario.f.c")?,
    )
    .map_err(|e| CliError::Config(format!("scenario.f: {e}")))?;
    let scenario = match name {
        ScenarioName::HarmonicPotential => {
            let table = config.h.as_ref().ok_or_else(|| {
                CliError::Config("scenario.h: required for harmonic_potential".into())
            })?;
            let h = parse_poly(table, 2, "scenario.h")?;
            make_harmonic_potential(h, forcing)
        }
        ScenarioName::ZeroHopf => {
            let table = config.p.as_ref().ok_or_else(|| {
                CliError::Config("scenario.p: required for zero_hopf".into())
            })?;
            let p = parse_poly(table, 1, "scenario.p")?;
            make_zero_hopf(p, forcing)
        }
        ScenarioName::Duffing => make_duffing(forcing),
    };
    scenario.map_err(|e| CliError::Config(format!("scenario: {e}")))
}

/// Scenario-appropriate default search region.
pub fn default_search_box(name: ScenarioName) -> SearchBoxBlock {
    match name {
        ScenarioName::HarmonicPotential => SearchBoxBlock {
            r: [0.05, 3.0],
            z: vec![[-0.9, 3.0]],
            grid: vec![12, 12],
        },
        ScenarioName::ZeroHopf => SearchBoxBlock {
            r: [0.05, 2.5],
            z: vec![[-1.5, 1.5]],
            grid: vec![8, 8],
        },
        ScenarioName::Duffing => SearchBoxBlock {
            r: [0.02, 0.3],
            z: vec![[-0.3, 0.3]],
            grid: vec![6, 6],
        },
    }
}

/// Applies one sweep assignment to a copy of the configuration.
pub fn apply_sweep_value(
    config: &RunConfig,
    parameter: &str,
    value: f64,
) -> Result<RunConfig, CliError> {
    let mut patched = config.clone();
    patched.sweep = None;
    if parameter == "epsilon" {
        patched.epsilon = EpsilonList::One(value);
        return Ok(patched);
    }
    let mut parts = parameter.splitn(2, '.');
    let head = parts.next().unwrap_or_default();
    let rest = parts.next().unwrap_or_default();
    match head {
        "f" => {
            let mut sub = rest.splitn(2, '.');
            let vector = sub.next().unwrap_or_default();
            let key = sub.next().unwrap_or_default();
            if key.is_empty() {
                return Err(CliError::Config(format!(
                    "sweep.parameter: {parameter:?} is missing the exponent key"
                )));
            }
            let table = match vector {
                "a" => &mut patched.scenario.f.a,
                "b" => &mut patched.scenario.f.b,
                "c" => &mut patched.scenario.f.c,
                other => {
                    return Err(CliError::Config(format!(
                        "sweep.parameter: unknown forcing component {other:?}"
                    )))
                }
            };
            table.insert(key.to_string(), value);
        }
        "h" => {
            if rest.is_empty() {
                return Err(CliError::Config(
                    "sweep.parameter: h.<exponents> is missing the exponent key".into(),
                ));
            }
            patched
                .scenario
                .h
                .get_or_insert_with(PolyTable::new)
                .insert(rest.to_string(), value);
        }
        "p" => {
            if rest.is_empty() {
                return Err(CliError::Config(
                    "sweep.parameter: p.<exponents> is missing the exponent key".into(),
                ));
            }
            patched
                .scenario
                .p
                .get_or_insert_with(PolyTable::new)
                .insert(rest.to_string(), value);
        }
        other => {
            return Err(CliError::Config(format!(
                "sweep.parameter: unknown parameter root {other:?}"
            )))
        }
    }
    Ok(patched)
}
