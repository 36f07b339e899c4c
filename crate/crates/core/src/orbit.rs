//! Independent certification of predicted orbits: adaptive Runge-Kutta
//! integration of the standard form, Newton shooting on the 2 pi return map
//! (variational derivatives from jet-seeded initial conditions), epsilon
//! continuation, and the map back to original coordinates.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::jet::Jet1;
use crate::linalg;
use crate::standard_form::StandardForm;

#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Optional step-size cap; bounds the node spacing of the recorded
    /// trajectory (time reconstruction integrates over these nodes).
    pub h_max: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { rtol: 1e-10, atol: 1e-12, max_steps: 100_000, h_max: None }
    }
}

/// Accepted integration nodes; jets carry whatever seeds the initial state
/// had (variational equations ride along for free).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub states: Vec<Vec<Jet1>>,
}

impl Trajectory {
    pub fn end_state(&self) -> &[Jet1] {
        self.states.last().expect("trajectory has at least the initial state")
    }

    pub fn end_values(&self) -> Vec<f64> {
        self.end_state().iter().map(|j| j.value).collect()
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy(state: &[Jet1], k: &[Vec<Jet1>], weights: &[f64], h: f64) -> Vec<Jet1> {
    let mut out = state.to_vec();
    for (ki, &w) in k.iter().zip(weights.iter()) {
        if w == 0.0 {
            continue;
        }
        for (o, kij) in out.iter_mut().zip(ki.iter()) {
            *o = o.clone() + kij.clone() * (h * w);
        }
    }
    out
}

/// Embedded Dormand-Prince 5(4) with PI step control. The error norm runs
/// over values and seed partials alike, so variational accuracy tracks the
/// requested tolerance.
pub fn integrate<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: Vec<Jet1>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory>
where
    F: Fn(f64, &[Jet1]) -> Result<Vec<Jet1>>,
{
    let span = t1 - t0;
    if !(span > 0.0) {
        return Err(Error::InvalidConfig(alloc::string::String::from(
            "integration span must be positive",
        )));
    }
    let mut t = t0;
    let mut y = y0;
    let h_cap = cfg.h_max.unwrap_or(f64::INFINITY);
    let mut h = (span / 100.0).min(h_cap);
    let h_floor = span * 1e-14;
    let mut k1 = f(t, &y)?;
    let mut traj = Trajectory { t: vec![t], states: vec![y.clone()] };
    let mut facold: f64 = 1e-4;
    let mut last_rhs_error: Option<Error> = None;

    for _ in 0..cfg.max_steps {
        if t >= t1 {
            return Ok(traj);
        }
        if h < h_floor {
            return Err(last_rhs_error.unwrap_or(Error::StepUnderflow { at: t }));
        }
        if t + h > t1 {
            h = t1 - t;
        }

        let mut ks: Vec<Vec<Jet1>> = Vec::with_capacity(7);
        ks.push(k1.clone());
        let mut stage_failed = None;
        for stage in 0..6 {
            let yi = axpy(&y, &ks, &A[stage][..=stage], h);
            match f(t + C[stage] * h, &yi) {
                Ok(ki) => ks.push(ki),
                Err(e) => {
                    stage_failed = Some(e);
                    break;
                }
            }
        }
        if let Some(e) = stage_failed {
            last_rhs_error = Some(e);
            h *= 0.5;
            continue;
        }

        let y_new = axpy(&y, &ks, &B5, h);

        // embedded error estimate over every jet lane
        let mut err_sq = 0.0;
        let mut lanes = 0usize;
        let seeds = y.iter().map(Jet1::seed_count).max().unwrap_or(0);
        for i in 0..y.len() {
            for lane in 0..=seeds {
                let select = |jet: &Jet1| -> f64 {
                    if lane == 0 {
                        jet.value
                    } else {
                        jet.partial_value(lane - 1)
                    }
                };
                let mut e = 0.0;
                for (ki, &w) in ks.iter().zip(E.iter()) {
                    if w != 0.0 {
                        e += w * select(&ki[i]);
                    }
                }
                e *= h;
                let sc = cfg.atol + cfg.rtol * select(&y[i]).abs().max(select(&y_new[i]).abs());
                err_sq += (e / sc) * (e / sc);
                lanes += 1;
            }
        }
        let err = (err_sq / lanes as f64).sqrt();

        let expo = 0.2;
        let fac11 = err.powf(expo);
        let fac = (fac11 / facold.powf(0.04) / 0.9).max(0.1).min(5.0);
        if err <= 1.0 {
            facold = err.max(1e-4);
            t += h;
            y = y_new;
            k1 = ks.pop().expect("seven stages"); // FSAL
            traj.t.push(t);
            traj.states.push(y.clone());
            h = (h / fac.max(0.2)).min(h_cap);
        } else {
            h /= fac.max(1.0);
        }
    }
    if t >= t1 {
        Ok(traj)
    } else {
        Err(Error::StepLimit { at: t })
    }
}

/// Integrates `d(r,z)/d(theta) = eps G` over `theta_span` from plain values.
pub fn integrate_standard_form(
    sf: &StandardForm,
    start: &[f64],
    eps: f64,
    theta_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let y0: Vec<Jet1> = start.iter().map(|&v| Jet1::constant(v)).collect();
    integrate(
        |theta, state| sf.rhs_jets(theta, state, eps),
        theta_span.0,
        theta_span.1,
        y0,
        cfg,
    )
}

#[derive(Debug, Clone)]
pub struct OrbitCertificate {
    pub epsilon: f64,
    /// Fixed point of the 2 pi return map in `(r, z)`.
    pub fixed_point: Vec<f64>,
    pub residual: f64,
    pub predicted_zero: Vec<f64>,
    /// Euclidean distance between the fixed point and the predicted zero.
    pub distance: f64,
    /// Row-major monodromy matrix of the period map.
    pub monodromy: Vec<f64>,
    /// Orbit samples mapped back to original coordinates, tagged with
    /// reconstructed original time.
    pub orbit_x: Vec<(f64, Vec<f64>)>,
    /// Period in original time (reported as metadata).
    pub period_t: f64,
}

#[derive(Debug, Clone)]
pub enum ShootOutcome {
    Converged(OrbitCertificate),
    /// The return map is the identity to integration accuracy: a continuum
    /// of periodic orbits, no isolated one to certify.
    DegenerateFamily { residual: f64, monodromy_defect: f64 },
    Diverged { residual: f64 },
    /// Newton collapsed onto the polar axis.
    TrivialOrbit { r: f64 },
}

impl ShootOutcome {
    pub fn certificate(&self) -> Option<&OrbitCertificate> {
        match self {
            ShootOutcome::Converged(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootConfig {
    pub tol: f64,
    pub max_iterations: usize,
    /// `|DP - I|` below this at a residual-zero guess means a degenerate
    /// family rather than an isolated orbit.
    pub degenerate_defect: f64,
    pub integrator: IntegratorConfig,
    /// Sample count for the back-mapped orbit.
    pub orbit_samples: usize,
}

impl Default for ShootConfig {
    fn default() -> Self {
        ShootConfig {
            tol: 1e-9,
            max_iterations: 25,
            degenerate_defect: 1e-7,
            integrator: IntegratorConfig::default(),
            orbit_samples: 64,
        }
    }
}

fn return_map(
    sf: &StandardForm,
    eps: f64,
    v: &[f64],
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = sf.dim();
    let y0: Vec<Jet1> = v
        .iter()
        .enumerate()
        .map(|(i, &val)| Jet1::variable(val, i, dim))
        .collect();
    let traj = integrate(
        |theta, state| sf.rhs_jets(theta, state, eps),
        0.0,
        2.0 * PI,
        y0,
        cfg,
    )?;
    let end = traj.end_state();
    let values: Vec<f64> = end.iter().map(|j| j.value).collect();
    let mut monodromy = Vec::with_capacity(dim * dim);
    for jet in end {
        monodromy.extend(jet.partials_f64(dim));
    }
    Ok((values, monodromy))
}

/// Newton on `P(v) - v` where `P` is the 2 pi return map of the standard
/// form; the Jacobian comes from variational integration, not differences.
pub fn poincare_shoot(
    sf: &StandardForm,
    eps: f64,
    guess: &[f64],
    predicted: &[f64],
    cfg: &ShootConfig,
) -> Result<ShootOutcome> {
    let dim = sf.dim();
    if guess.len() != dim {
        return Err(Error::Arity { expected: dim, got: guess.len() });
    }
    if guess[0] <= sf.r_min {
        return Ok(ShootOutcome::TrivialOrbit { r: guess[0] });
    }
    let mut v = guess.to_vec();
    let mut last_residual = f64::INFINITY;
    for iter in 0..cfg.max_iterations {
        let (p, dp) = match return_map(sf, eps, &v, &cfg.integrator) {
            Ok(out) => out,
            Err(_) => return Ok(ShootOutcome::Diverged { residual: last_residual }),
        };
        let residual_vec: Vec<f64> = p.iter().zip(v.iter()).map(|(a, b)| a - b).collect();
        let residual = linalg::max_abs(&residual_vec);
        last_residual = residual;

        let mut defect = dp.clone();
        for i in 0..dim {
            defect[i * dim + i] -= 1.0;
        }
        let defect_norm = linalg::inf_norm(&defect, dim, dim);

        if residual <= cfg.tol {
            if iter == 0 && defect_norm <= cfg.degenerate_defect {
                return Ok(ShootOutcome::DegenerateFamily {
                    residual,
                    monodromy_defect: defect_norm,
                });
            }
            let certificate =
                build_certificate(sf, eps, v, residual, predicted, dp, cfg)?;
            return Ok(ShootOutcome::Converged(certificate));
        }

        let neg: Vec<f64> = residual_vec.iter().map(|x| -x).collect();
        let step = match linalg::solve(defect, dim, &neg, "shooting step") {
            Ok(s) => s,
            Err(_) => return Ok(ShootOutcome::Diverged { residual }),
        };
        let mut lambda = 1.0;
        let mut updated = false;
        for _ in 0..20 {
            let trial: Vec<f64> = v
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + lambda * s)
                .collect();
            if trial[0] > sf.r_min {
                v = trial;
                updated = true;
                break;
            }
            lambda *= 0.5;
        }
        if !updated {
            return Ok(ShootOutcome::TrivialOrbit { r: v[0] });
        }
    }
    Ok(ShootOutcome::Diverged { residual: last_residual })
}

fn build_certificate(
    sf: &StandardForm,
    eps: f64,
    fixed_point: Vec<f64>,
    residual: f64,
    predicted: &[f64],
    monodromy: Vec<f64>,
    cfg: &ShootConfig,
) -> Result<OrbitCertificate> {
    let distance = fixed_point
        .iter()
        .zip(predicted.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    // dense nodes: keeps the trapezoid time reconstruction accurate
    let dense = IntegratorConfig {
        h_max: Some(2.0 * PI / cfg.orbit_samples as f64),
        ..cfg.integrator
    };
    let traj = integrate_standard_form(sf, &fixed_point, eps, (0.0, 2.0 * PI), &dense)?;
    let back = map_orbit_back(sf, &traj, eps)?;
    Ok(OrbitCertificate {
        epsilon: eps,
        fixed_point,
        residual,
        predicted_zero: predicted.to_vec(),
        distance,
        monodromy,
        orbit_x: back.samples,
        period_t: back.period,
    })
}

#[derive(Debug, Clone)]
pub struct XOrbit {
    /// `(t, x)` samples; `t` is reconstructed original time (monotone in the
    /// flow direction, which runs opposite to theta).
    pub samples: Vec<(f64, Vec<f64>)>,
    pub period: f64,
}

/// Maps a `(theta, r, z)` trajectory back through the cylindrical change and
/// the chart inverse, reconstructing original time by quadrature of
/// `dt/d(theta) = 1 / (theta_dot * I eta)`.
pub fn map_orbit_back(sf: &StandardForm, traj: &Trajectory, eps: f64) -> Result<XOrbit> {
    let chart = sf.chart();
    let mut samples = Vec::with_capacity(traj.t.len());
    let mut t_accum = 0.0;
    let mut prev: Option<(f64, f64)> = None; // (theta, dt/dtheta)
    for (k, theta) in traj.t.iter().copied().enumerate() {
        let state: Vec<f64> = traj.states[k].iter().map(|j| j.value).collect();
        let r = state[0];
        let y = {
            let mut y = Vec::with_capacity(state.len() + 1);
            y.push(r * Float::cos(theta));
            y.push(r * Float::sin(theta));
            y.extend_from_slice(&state[1..]);
            y
        };
        let x = chart.invert(&y, None)?;
        if !chart.in_domain(&x) {
            return Err(Error::DomainViolation {
                context: "orbit sample left the chart domain",
                point: x,
            });
        }
        let speed = sf.angular_speed(theta, &state, eps)?;
        let dt_dtheta = 1.0 / (speed.theta_dot * speed.time_density);
        if let Some((theta_prev, slope_prev)) = prev {
            t_accum += 0.5 * (slope_prev + dt_dtheta) * (theta - theta_prev);
        }
        prev = Some((theta, dt_dtheta));
        samples.push((t_accum, x));
    }
    Ok(XOrbit { period: t_accum.abs(), samples })
}

#[derive(Debug, Clone)]
pub struct ContinuationRow {
    pub epsilon: f64,
    pub fixed_point: Option<Vec<f64>>,
    pub distance: Option<f64>,
    pub residual: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct ContinuationTable {
    pub rows: Vec<ContinuationRow>,
    /// Least-squares slope of `log distance` against `log epsilon`; `None`
    /// when fewer than two usable rows exist (failures or exact hits).
    pub slope: Option<f64>,
    pub truncated: bool,
}

/// Shoots at each epsilon (expected in decreasing order), warm-starting from
/// the previous fixed point, and fits the convergence rate towards the
/// averaged zero.
pub fn continuation_in_epsilon(
    sf: &StandardForm,
    zero: &[f64],
    eps_list: &[f64],
    cfg: &ShootConfig,
) -> Result<ContinuationTable> {
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut guess = zero.to_vec();
    let mut truncated = false;
    for &eps in eps_list {
        match poincare_shoot(sf, eps, &guess, zero, cfg)? {
            ShootOutcome::Converged(cert) => {
                guess = cert.fixed_point.clone();
                rows.push(ContinuationRow {
                    epsilon: eps,
                    distance: Some(cert.distance),
                    fixed_point: Some(cert.fixed_point),
                    residual: cert.residual,
                    degenerate: false,
                });
            }
            ShootOutcome::DegenerateFamily { residual, .. } => {
                rows.push(ContinuationRow {
                    epsilon: eps,
                    fixed_point: None,
                    distance: None,
                    residual,
                    degenerate: true,
                });
            }
            ShootOutcome::Diverged { residual } => {
                rows.push(ContinuationRow {
                    epsilon: eps,
                    fixed_point: None,
                    distance: None,
                    residual,
                    degenerate: false,
                });
                truncated = true;
                break;
            }
            ShootOutcome::TrivialOrbit { .. } => {
                rows.push(ContinuationRow {
                    epsilon: eps,
                    fixed_point: None,
                    distance: None,
                    residual: f64::NAN,
                    degenerate: false,
                });
                truncated = true;
                break;
            }
        }
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|row| {
            row.distance.and_then(|d| {
                if d > 0.0 {
                    Some((Float::ln(row.epsilon), Float::ln(d)))
                } else {
                    None
                }
            })
        })
        .collect();
    let slope = fit_slope(&points);
    Ok(ContinuationTable { rows, slope, truncated })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        None
    } else {
        Some((n * sxy - sx * sy) / denom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn integrates_harmonic_oscillator() {
        // y'' = -y as a first-order system; one full period returns home.
        let f = |_t: f64, y: &[Jet1]| -> Result<Vec<Jet1>> {
            Ok(vec![y[1].clone(), -y[0].clone()])
        };
        let y0 = vec![Jet1::constant(1.0), Jet1::constant(0.0)];
        let cfg = IntegratorConfig::default();
        let traj = integrate(f, 0.0, 2.0 * PI, y0, &cfg).unwrap();
        let end = traj.end_values();
        assert_relative_eq!(end[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(end[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn variational_jets_track_linear_flow() {
        // x' = a x with a = -0.5: monodromy over [0, 1] is exp(-0.5).
        let f = |_t: f64, y: &[Jet1]| -> Result<Vec<Jet1>> { Ok(vec![y[0].clone() * -0.5]) };
        let y0 = vec![Jet1::variable(2.0, 0, 1)];
        let traj = integrate(f, 0.0, 1.0, y0, &IntegratorConfig::default()).unwrap();
        let end = traj.end_state();
        assert_relative_eq!(end[0].value, 2.0 * (-0.5f64).exp(), epsilon = 1e-9);
        assert_relative_eq!(end[0].partial_value(0), (-0.5f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn halving_rtol_converges_endpoint() {
        let f = |t: f64, y: &[Jet1]| -> Result<Vec<Jet1>> {
            Ok(vec![y[1].clone(), -y[0].clone() * (1.0 + 0.3 * t.sin())])
        };
        let run = |rtol: f64| {
            let cfg = IntegratorConfig { rtol, atol: rtol * 1e-2, ..Default::default() };
            let y0 = vec![Jet1::constant(0.7), Jet1::constant(-0.1)];
            integrate(f, 0.0, 10.0, y0, &cfg).unwrap().end_values()
        };
        let coarse = run(1e-8);
        let fine = run(5e-9);
        let norm = fine.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in coarse.iter().zip(fine.iter()) {
            assert!((a - b).abs() <= 10.0 * 1e-8 * (1.0 + norm));
        }
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let pts: Vec<(f64, f64)> = [1e-2f64, 1e-3, 1e-4]
            .iter()
            .map(|&e| (e.ln(), (3.0 * e).ln()))
            .collect();
        assert_relative_eq!(fit_slope(&pts).unwrap(), 1.0, epsilon = 1e-12);
    }
}
