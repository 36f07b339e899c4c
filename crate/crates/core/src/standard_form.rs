//! The perturbed system in corotating polar coordinates, with the angle as
//! independent variable: `dr/d(theta) = eps G_1`, `dz/d(theta) = eps G_z`.
//!
//! The right-hand side is `2 pi`-periodic in theta and vanishes at eps = 0,
//! which is exactly the shape averaging needs. Jets ride through the whole
//! construction, so the same evaluation yields the epsilon split
//! `(g0, g1)` and the `(r, z)` Jacobian of `g0` without finite differences.

use alloc::vec::Vec;
use num_traits::Float;

use crate::chart::DarbouxChart;
use crate::error::{Error, Result};
use crate::jet::{Jet1, Scalar};
use crate::poisson::PerturbedSpec;

pub const DEFAULT_R_MIN: f64 = 1e-6;
pub const DEFAULT_SLOW_ANGLE_MARGIN: f64 = 0.1;

pub struct StandardForm {
    chart: DarbouxChart,
    perturbed: PerturbedSpec,
    /// Polar guard: the cylindrical system is undefined as `r -> 0`.
    pub r_min: f64,
    /// Guard on `d(theta)/d(tau) = -1 + (eps/r) G2*`; averaging assumes the
    /// angle never stalls, so a magnitude below this margin is an error.
    pub slow_angle_margin: f64,
}

/// Epsilon split of the angular right-hand side at one `(theta, r, z)`:
/// `G = g0 + eps g1 + O(eps^2)` plus the `(r, z)` Jacobian of `g0`.
#[derive(Debug, Clone)]
pub struct GSplit {
    pub g0: Vec<f64>,
    pub g1: Vec<f64>,
    /// Row-major `(n-1) x (n-1)` matrix `d g0 / d(r, z)`.
    pub d_g0: Vec<f64>,
}

/// Value-level diagnostics used for time reconstruction.
#[derive(Debug, Clone, Copy)]
pub struct AngularSpeed {
    pub theta_dot: f64,
    /// The time-rescaling density `I(x) eta(y)` at this point.
    pub time_density: f64,
}

impl StandardForm {
    pub fn new(chart: DarbouxChart, perturbed: PerturbedSpec) -> Result<Self> {
        if !core::ptr::eq(
            alloc::sync::Arc::as_ptr(chart.spec()),
            alloc::sync::Arc::as_ptr(perturbed.base()),
        ) {
            return Err(Error::Construction(
                alloc::string::String::from("chart and perturbation must share one spec"),
            ));
        }
        Ok(StandardForm {
            chart,
            perturbed,
            r_min: DEFAULT_R_MIN,
            slow_angle_margin: DEFAULT_SLOW_ANGLE_MARGIN,
        })
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn perturbed(&self) -> &PerturbedSpec {
        &self.perturbed
    }

    /// Dimension of the `(r, z)` state: `n - 1`.
    pub fn dim(&self) -> usize {
        self.chart.spec().dim() - 1
    }

    /// The unscaled angular field `G(theta, r, z; eps)`; multiply by eps to
    /// get the actual derivative. Jets on `rz`/`eps` propagate throughout.
    pub fn g_jets(&self, theta: f64, rz: &[Jet1], eps: &Jet1) -> Result<Vec<Jet1>> {
        let n = self.chart.spec().dim();
        if rz.len() != n - 1 {
            return Err(Error::Arity { expected: n - 1, got: rz.len() });
        }
        let r = &rz[0];
        if !(r.value > self.r_min) {
            return Err(Error::PolarSingularity { r: r.value });
        }
        let (c, s) = (Float::cos(theta), Float::sin(theta));
        let mut y = Vec::with_capacity(n);
        y.push(r.clone() * c);
        y.push(r.clone() * s);
        y.extend(rz[1..].iter().cloned());

        let fstar = self.chart.transform_forcing_jets(&self.perturbed, &y, eps)?;

        let g1_star = fstar[0].clone() * c + fstar[1].clone() * s;
        let g2_star = fstar[1].clone() * c - fstar[0].clone() * s;

        let theta_dot =
            eps.clone() * Scalar::recip(r) * g2_star - 1.0;
        if theta_dot.value.abs() < self.slow_angle_margin {
            return Err(Error::SlowAngle { theta, theta_dot: theta_dot.value });
        }
        let inv = Scalar::recip(&theta_dot);

        let mut out = Vec::with_capacity(n - 1);
        out.push(g1_star * inv.clone());
        for fj in &fstar[2..] {
            out.push(fj.clone() * inv.clone());
        }
        Ok(out)
    }

    /// `d(r, z)/d(theta) = eps G`, plain values.
    pub fn rhs(&self, theta: f64, rz: &[f64], eps: f64) -> Result<Vec<f64>> {
        let jets: Vec<Jet1> = rz.iter().map(|&v| Jet1::constant(v)).collect();
        let g = self.g_jets(theta, &jets, &Jet1::constant(eps))?;
        Ok(g.into_iter().map(|j| eps * j.value).collect())
    }

    /// `eps G` with arbitrary seeds riding on the state (variational use).
    pub fn rhs_jets(&self, theta: f64, rz: &[Jet1], eps: f64) -> Result<Vec<Jet1>> {
        let g = self.g_jets(theta, rz, &Jet1::constant(eps))?;
        Ok(g.into_iter().map(|j| j * eps).collect())
    }

    /// One seeded evaluation at eps = 0 yielding `g0`, `g1` and
    /// `d g0 / d(r, z)` simultaneously.
    pub fn g_split(&self, theta: f64, rz: &[f64]) -> Result<GSplit> {
        let dim = self.dim();
        let seeds = dim + 1; // (r, z) seeds plus the trailing eps seed
        let jets: Vec<Jet1> = rz
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, seeds))
            .collect();
        let eps = Jet1::variable(0.0, dim, seeds);
        let g = self.g_jets(theta, &jets, &eps)?;
        let mut g0 = Vec::with_capacity(dim);
        let mut g1 = Vec::with_capacity(dim);
        let mut d_g0 = Vec::with_capacity(dim * dim);
        for comp in &g {
            g0.push(comp.value);
            g1.push(comp.partial_value(dim));
            for j in 0..dim {
                d_g0.push(comp.partial_value(j));
            }
        }
        Ok(GSplit { g0, g1, d_g0 })
    }

    /// `g0` alone (cheapest path: no seeds).
    pub fn g0_values(&self, theta: f64, rz: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<Jet1> = rz.iter().map(|&v| Jet1::constant(v)).collect();
        let g = self.g_jets(theta, &jets, &Jet1::constant(0.0))?;
        Ok(g.into_iter().map(|j| j.value).collect())
    }

    /// Angular speed and time density for reconstructing original time.
    pub fn angular_speed(&self, theta: f64, rz: &[f64], eps: f64) -> Result<AngularSpeed> {
        let n = self.chart.spec().dim();
        if !(rz[0] > self.r_min) {
            return Err(Error::PolarSingularity { r: rz[0] });
        }
        let (c, s) = (Float::cos(theta), Float::sin(theta));
        let mut y = Vec::with_capacity(n);
        y.push(Jet1::constant(rz[0] * c));
        y.push(Jet1::constant(rz[0] * s));
        y.extend(rz[1..].iter().map(|&v| Jet1::constant(v)));
        let tr = self.chart.transport(&y)?;
        let eps_jet = Jet1::constant(eps);
        let f = self.perturbed.forcing_at(&tr.x, eps_jet)?;
        let scale = 1.0 / (tr.first_integral.value * tr.eta.value);
        let row = |i: usize| -> f64 {
            (0..n)
                .map(|a| tr.dphi[i * n + a].value * f[a].value)
                .sum::<f64>()
                * scale
        };
        let g2_star = row(1) * c - row(0) * s;
        Ok(AngularSpeed {
            theta_dot: -1.0 + eps / rz[0] * g2_star,
            time_density: tr.first_integral.value * tr.eta.value,
        })
    }
}
