//! Constructive reduction to the canonical rank-2 coordinates.
//!
//! The chart maps `x` to `y = (x1 h1(x), x2 h2(x), D_3(x), ..., D_n(x))`.
//! In the new coordinates the unperturbed flow is a harmonic oscillator on
//! each symplectic leaf after the time rescaling `d tau = I(x) eta(y) dt`,
//! where `eta(y) = grad(y1)^T J0(x) grad(y2)` at `x` = inverse image of `y`.
//!
//! Note the rescaling uses the rank-2 factor `J0`, not the full `J = I J0`:
//! only this reading makes `DPhi (J grad H + eps F) = I eta (J_D grad H* +
//! eps F*)` an identity, which is the contract the transport below satisfies.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{BoxedVectorField, JetScalar};
use crate::jet::{dot, Jet, Jet1, Jet2, Scalar};
use crate::linalg;
use crate::poisson::{PerturbedSpec, PoissonSpec};

const ETA_FLOOR: f64 = 1e-15;

pub type DomainPredicate = Box<dyn Fn(&[f64]) -> bool + Send + Sync>;

pub struct DarbouxChart {
    spec: Arc<PoissonSpec>,
    inverse_override: Option<BoxedVectorField>,
    u_predicate: Option<DomainPredicate>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

/// Everything the transport of a vector field through the chart needs at one
/// point: the inverse image, the chart Jacobian, and the rescaling factors,
/// all carrying the caller's outer seeds.
pub struct Transport {
    pub x: Vec<Jet1>,
    /// `DPhi(x)` as jets in the outer seeds, row-major `n x n`.
    pub dphi: Vec<Jet1>,
    pub eta: Jet1,
    pub first_integral: Jet1,
}

impl DarbouxChart {
    /// The constructive chart of a validated spec.
    pub fn new(spec: Arc<PoissonSpec>) -> Self {
        DarbouxChart {
            spec,
            inverse_override: None,
            u_predicate: None,
            newton_tol: 1e-12,
            newton_max_iter: 50,
        }
    }

    /// Installs a closed-form inverse (used for values; derivatives always
    /// come from the implicit-function solve).
    pub fn with_inverse(mut self, inverse: BoxedVectorField) -> Self {
        self.inverse_override = Some(inverse);
        self
    }

    pub fn with_u_predicate(mut self, predicate: DomainPredicate) -> Self {
        self.u_predicate = Some(predicate);
        self
    }

    pub fn spec(&self) -> &Arc<PoissonSpec> {
        &self.spec
    }

    pub fn has_closed_inverse(&self) -> bool {
        self.inverse_override.is_some()
    }

    /// Membership test for the chart domain U; without a scenario predicate
    /// every finite point is admitted and Newton failure is the judge.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match &self.u_predicate {
            Some(p) => p(x),
            None => true,
        }
    }

    /// Forward chart at any jet depth.
    pub fn forward<S: JetScalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let n = self.spec.dim();
        if x.len() != n {
            return Err(Error::Arity { expected: n, got: x.len() });
        }
        let h1 = S::scalar_field(self.spec.h1(), x)?;
        let h2 = S::scalar_field(self.spec.h2(), x)?;
        let mut y = Vec::with_capacity(n);
        y.push(x[0].clone() * h1);
        y.push(x[1].clone() * h2);
        for j in 3..=n {
            y.push(self.spec.casimir_at(j, x)?);
        }
        Ok(y)
    }

    pub fn forward_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<Jet1> = x.iter().map(|&v| Jet1::constant(v)).collect();
        Ok(self.forward(&jets)?.into_iter().map(|j| j.value).collect())
    }

    /// `DPhi(x)` as plain floats (row-major).
    pub fn jacobian_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.spec.dim();
        let jets: Vec<Jet1> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, n))
            .collect();
        let y = self.forward(&jets)?;
        let mut m = Vec::with_capacity(n * n);
        for row in &y {
            m.extend(row.partials_f64(n));
        }
        Ok(m)
    }

    /// Inverts the chart at `y`. Uses the scenario closed form when present,
    /// otherwise damped Newton started from `y` itself (the chart is the
    /// identity plus higher-order terms near the origin).
    pub fn invert(&self, y: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.spec.dim();
        if y.len() != n {
            return Err(Error::Arity { expected: n, got: y.len() });
        }
        if let Some(inverse) = &self.inverse_override {
            let jets: Vec<Jet1> = y.iter().map(|&v| Jet1::constant(v)).collect();
            let x: Vec<f64> = inverse.eval1(&jets)?.into_iter().map(|j| j.value).collect();
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::DomainViolation {
                    context: "closed-form inverse left the chart domain",
                    point: y.to_vec(),
                });
            }
            return Ok(x);
        }
        self.invert_newton(y, guess)
    }

    fn residual_norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let fx = self.forward_values(x)?;
        Ok(fx
            .iter()
            .zip(y.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Damped Newton inversion (step halving, residual-decrease acceptance).
    pub fn invert_newton(&self, y: &[f64], guess: Option<&[f64]>) -> Result<Vec<f64>> {
        let n = self.spec.dim();
        let mut x: Vec<f64> = guess.unwrap_or(y).to_vec();
        if !self.in_domain(&x) {
            return Err(Error::DomainViolation {
                context: "inversion start outside chart domain",
                point: x,
            });
        }
        let mut res = self.residual_norm(&x, y)?;
        for _ in 0..self.newton_max_iter {
            if res <= self.newton_tol {
                return Ok(x);
            }
            let jets: Vec<Jet1> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| Jet1::variable(v, i, n))
                .collect();
            let fwd = self.forward(&jets)?;
            let mut jac = Vec::with_capacity(n * n);
            let mut rhs = Vec::with_capacity(n);
            for (row, target) in fwd.iter().zip(y.iter()) {
                jac.extend(row.partials_f64(n));
                rhs.push(target - row.value);
            }
            let step = linalg::solve(jac, n, &rhs, "chart inversion")?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..25 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(xi, si)| xi + lambda * si)
                    .collect();
                if self.in_domain(&trial) {
                    if let Ok(trial_res) = self.residual_norm(&trial, y) {
                        if trial_res.is_finite() && (trial_res < res || trial_res <= self.newton_tol)
                        {
                            x = trial;
                            res = trial_res;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(Error::InversionFailure { residual: res, target: y.to_vec() });
            }
        }
        if res <= self.newton_tol {
            Ok(x)
        } else {
            Err(Error::InversionFailure { residual: res, target: y.to_vec() })
        }
    }

    /// Inverse image with the caller's seeds propagated through the inverse
    /// function theorem: values from `invert`, partials from the dense solve
    /// `DPhi(x) dx = dy` (never from differentiating Newton iterates).
    pub fn inverse_jet(&self, y: &[Jet1]) -> Result<Vec<Jet1>> {
        let n = self.spec.dim();
        let seeds = y.iter().map(|j| j.seed_count()).max().unwrap_or(0);
        let y_values: Vec<f64> = y.iter().map(|j| j.value).collect();
        let x_values = self.invert(&y_values, None)?;
        if seeds == 0 {
            return Ok(x_values.into_iter().map(Jet1::constant).collect());
        }
        let dphi = self.jacobian_values(&x_values)?;
        let rhs: Vec<Vec<f64>> = (0..seeds)
            .map(|k| y.iter().map(|j| j.partial_value(k)).collect())
            .collect();
        let cols = linalg::solve_columns(dphi, n, &rhs, "inverse chart derivative")?;
        Ok((0..n)
            .map(|i| Jet1::new(x_values[i], (0..seeds).map(|k| cols[k][i]).collect()))
            .collect())
    }

    /// Chart Jacobian with outer seeds: entry `(i, l)` is `dPhi_i/dx_l`
    /// as a jet in whatever seeds `x` carries, computed by one nested-jet
    /// pass through the forward chart.
    pub fn jacobian_jets(&self, x: &[Jet1]) -> Result<Vec<Jet1>> {
        let n = self.spec.dim();
        let nested: Vec<Jet2> = x
            .iter()
            .enumerate()
            .map(|(i, xi)| {
                let mut partials = alloc::vec![Jet1::zero(); n];
                partials[i] = Jet1::one();
                Jet::new(xi.clone(), partials)
            })
            .collect();
        let out = self.forward(&nested)?;
        let mut dphi = Vec::with_capacity(n * n);
        for row in out {
            for l in 0..n {
                dphi.push(row.partial(l));
            }
        }
        Ok(dphi)
    }

    /// The rescaling factor `eta(y)`; vanishing `eta` means the chart has
    /// degenerated at this point.
    pub fn eta(&self, y: &[f64]) -> Result<f64> {
        let jets: Vec<Jet1> = y.iter().map(|&v| Jet1::constant(v)).collect();
        Ok(self.transport(&jets)?.eta.value)
    }

    /// Full transport data at `y` (jets in the caller's outer seeds).
    pub fn transport(&self, y: &[Jet1]) -> Result<Transport> {
        let n = self.spec.dim();
        let x = self.inverse_jet(y)?;
        let dphi = self.jacobian_jets(&x)?;
        let j0 = self.spec.j0_at(&x)?;
        let row1 = &dphi[0..n];
        let row2 = &dphi[n..2 * n];
        let mut eta = Jet1::zero();
        for a in 0..n {
            for b in 0..n {
                let entry = &j0[a * n + b];
                if entry.value == 0.0 && entry.partials.is_empty() {
                    continue;
                }
                eta = eta + row1[a].clone() * entry.clone() * row2[b].clone();
            }
        }
        if !eta.value.is_finite() || eta.value.abs() < ETA_FLOOR {
            return Err(Error::RankDegeneracy {
                point: y.iter().map(|j| j.value).collect(),
            });
        }
        let first_integral = self.spec.first_integral_at(&x)?;
        if first_integral.value == 0.0 || !first_integral.value.is_finite() {
            return Err(Error::DomainViolation {
                context: "first integral vanishes along transport",
                point: y.iter().map(|j| j.value).collect(),
            });
        }
        Ok(Transport { x, dphi, eta, first_integral })
    }

    /// The perturbation transported to canonical coordinates:
    /// `F*(y; eps) = DPhi(x) F(x; eps) / (I(x) eta(y))`.
    pub fn transform_forcing_jets(
        &self,
        perturbed: &PerturbedSpec,
        y: &[Jet1],
        eps: &Jet1,
    ) -> Result<Vec<Jet1>> {
        let n = self.spec.dim();
        let tr = self.transport(y)?;
        let f = perturbed.forcing_at(&tr.x, eps.clone())?;
        let scale = Scalar::recip(&(tr.first_integral * tr.eta));
        Ok((0..n)
            .map(|i| dot(&tr.dphi[i * n..(i + 1) * n], &f) * scale.clone())
            .collect())
    }

    /// Value-level transported perturbation.
    pub fn transformed_perturbation(
        &self,
        perturbed: &PerturbedSpec,
        y: &[f64],
        eps: f64,
    ) -> Result<Vec<f64>> {
        let jets: Vec<Jet1> = y.iter().map(|&v| Jet1::constant(v)).collect();
        let out = self.transform_forcing_jets(perturbed, &jets, &Jet1::constant(eps))?;
        Ok(out.into_iter().map(|j| j.value).collect())
    }
}
