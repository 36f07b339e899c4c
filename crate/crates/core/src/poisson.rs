//! The unperturbed Poisson system and its perturbation.
//!
//! The structure matrix is `J(x) = I(x) J0(x)` with `J0` of constant rank 2,
//! the Hamiltonian is `H = (x1^2 h1^2 + x2^2 h2^2) / 2` with `h_i(0) = 1`,
//! and the Casimirs are `D_j = x_j + phi_j` with `phi_j` vanishing to first
//! order at the origin. Constructors check what is checkable at a point;
//! `validate_poisson` samples the rest (rank, Jacobi, Casimirs).

use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::field::{
    BoxedMatrixField, BoxedScalarField, BoxedVectorField, JetScalar, ScalarField,
};
use crate::jet::Jet1;
use crate::linalg;
use crate::sample::{SampleRng, VALIDATION_SEED};

const ORIGIN_TOL: f64 = 1e-10;
const ANTISYMMETRY_TOL: f64 = 1e-10;
const RANK_PIVOT_FACTOR: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-8;
const CASIMIR_TOL: f64 = 1e-8;
const H_INVARIANCE_TOL: f64 = 1e-10;

pub struct PoissonSpec {
    n: usize,
    j0: BoxedMatrixField,
    first_integral: BoxedScalarField,
    h1: BoxedScalarField,
    h2: BoxedScalarField,
    phi: Vec<BoxedScalarField>,
    domain_hint: Vec<(f64, f64)>,
}

impl PoissonSpec {
    /// Builds and point-checks a spec. `phi` supplies the Casimir offsets
    /// for coordinates 3..n (so it has `n - 2` entries); `domain_hint`
    /// defaults to the unit box `[-1, 1]^n` when empty.
    pub fn new(
        n: usize,
        j0: BoxedMatrixField,
        first_integral: BoxedScalarField,
        h1: BoxedScalarField,
        h2: BoxedScalarField,
        phi: Vec<BoxedScalarField>,
        domain_hint: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::Construction("dimension must be at least 3".to_string()));
        }
        if j0.size() != n {
            return Err(Error::Construction("structure matrix size != n".to_string()));
        }
        if phi.len() != n - 2 {
            return Err(Error::Construction(
                "need exactly n - 2 Casimir offsets".to_string(),
            ));
        }
        for f in [&first_integral, &h1, &h2].into_iter().chain(phi.iter()) {
            if f.arity() != n {
                return Err(Error::Construction("field arity != n".to_string()));
            }
        }
        let domain_hint = if domain_hint.is_empty() {
            vec![(-1.0, 1.0); n]
        } else if domain_hint.len() == n {
            domain_hint
        } else {
            return Err(Error::Construction("domain hint dimension != n".to_string()));
        };

        let spec = PoissonSpec { n, j0, first_integral, h1, h2, phi, domain_hint };

        // h_i(0) = 1, phi_j(0) = 0 and grad phi_j(0) = 0, via jets.
        let origin: Vec<Jet1> = (0..n).map(|i| Jet1::variable(0.0, i, n)).collect();
        for (name, h) in [("h1", &spec.h1), ("h2", &spec.h2)] {
            let v = h.eval1(&origin)?;
            if (v.value - 1.0).abs() > ORIGIN_TOL {
                return Err(Error::Construction(alloc::format!(
                    "{name}(0) = {} but must equal 1",
                    v.value
                )));
            }
        }
        for (j, phi_j) in spec.phi.iter().enumerate() {
            let v = phi_j.eval1(&origin)?;
            if v.value.abs() > ORIGIN_TOL {
                return Err(Error::Construction(alloc::format!(
                    "phi_{}(0) = {} but must vanish",
                    j + 3,
                    v.value
                )));
            }
            let grad = v.partials_f64(n);
            if linalg::max_abs(&grad) > ORIGIN_TOL {
                return Err(Error::Construction(alloc::format!(
                    "grad phi_{}(0) must vanish",
                    j + 3
                )));
            }
        }

        // The first integral must not vanish on the sampled domain.
        let mut rng = SampleRng::new(VALIDATION_SEED);
        for _ in 0..50 {
            let x = rng.point_in_box(&spec.domain_hint);
            let v = spec.first_integral_value(&x)?;
            if v == 0.0 || !v.is_finite() {
                return Err(Error::Construction(alloc::format!(
                    "first integral vanishes at sampled point {x:?}"
                )));
            }
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn domain_hint(&self) -> &[(f64, f64)] {
        &self.domain_hint
    }

    pub fn h1(&self) -> &dyn ScalarField {
        self.h1.as_ref()
    }

    pub fn h2(&self) -> &dyn ScalarField {
        self.h2.as_ref()
    }

    /// `H(x) = (x1^2 h1(x)^2 + x2^2 h2(x)^2) / 2` at any jet depth.
    pub fn hamiltonian_at<S: JetScalar>(&self, x: &[S]) -> Result<S> {
        if x.len() != self.n {
            return Err(Error::Arity { expected: self.n, got: x.len() });
        }
        let h1 = S::scalar_field(self.h1.as_ref(), x)?;
        let h2 = S::scalar_field(self.h2.as_ref(), x)?;
        let t1 = x[0].clone() * h1.clone() * x[0].clone() * h1;
        let t2 = x[1].clone() * h2.clone() * x[1].clone() * h2;
        Ok((t1 + t2) * S::from_f64(0.5))
    }

    /// Casimir `D_j = x_j + phi_j(x)` for `j` in `3..=n` (1-based).
    pub fn casimir_at<S: JetScalar>(&self, j: usize, x: &[S]) -> Result<S> {
        debug_assert!((3..=self.n).contains(&j));
        let phi = S::scalar_field(self.phi[j - 3].as_ref(), x)?;
        Ok(x[j - 1].clone() + phi)
    }

    pub fn first_integral_at<S: JetScalar>(&self, x: &[S]) -> Result<S> {
        S::scalar_field(self.first_integral.as_ref(), x)
    }

    pub fn first_integral_value(&self, x: &[f64]) -> Result<f64> {
        let jets: Vec<Jet1> = x.iter().map(|&v| Jet1::constant(v)).collect();
        Ok(self.first_integral_at(&jets)?.value)
    }

    /// Rank-2 part `J0(x)` at any jet depth (row-major).
    pub fn j0_at<S: JetScalar>(&self, x: &[S]) -> Result<Vec<S>> {
        S::matrix_field(self.j0.as_ref(), x)
    }

    /// Full structure matrix `J(x) = I(x) J0(x)` at any jet depth.
    pub fn structure_matrix_at<S: JetScalar>(&self, x: &[S]) -> Result<Vec<S>> {
        let scale = self.first_integral_at(x)?;
        let j0 = self.j0_at(x)?;
        Ok(j0.into_iter().map(|e| e * scale.clone()).collect())
    }

    /// `J(x)` as plain floats; errors if the first integral vanishes.
    pub fn structure_matrix(&self, x: &[f64]) -> Result<Vec<f64>> {
        let i = self.first_integral_value(x)?;
        if i == 0.0 || !i.is_finite() {
            return Err(Error::DomainViolation {
                context: "first integral vanishes",
                point: x.to_vec(),
            });
        }
        let jets: Vec<Jet1> = x.iter().map(|&v| Jet1::constant(v)).collect();
        Ok(self.j0_at(&jets)?.into_iter().map(|e| e.value * i).collect())
    }

    /// Gradient of the Hamiltonian as plain floats.
    pub fn hamiltonian_gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let jets: Vec<Jet1> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, self.n))
            .collect();
        Ok(self.hamiltonian_at(&jets)?.partials_f64(self.n))
    }
}

/// The Hamiltonian of a spec packaged as a standalone scalar field.
pub struct HamiltonianField(pub Arc<PoissonSpec>);

impl ScalarField for HamiltonianField {
    fn arity(&self) -> usize {
        self.0.dim()
    }
    fn eval1(&self, point: &[Jet1]) -> Result<Jet1> {
        self.0.hamiltonian_at(point)
    }
    fn eval2(&self, point: &[crate::jet::Jet2]) -> Result<crate::jet::Jet2> {
        self.0.hamiltonian_at(point)
    }
}

pub fn hamiltonian(spec: &Arc<PoissonSpec>) -> HamiltonianField {
    HamiltonianField(Arc::clone(spec))
}

/// An analytic perturbation `eps * F(x; eps)` of a Poisson system.
pub struct PerturbedSpec {
    base: Arc<PoissonSpec>,
    forcing: BoxedVectorField,
    /// Default working value of the perturbation size; every operation that
    /// needs an epsilon also accepts one explicitly.
    pub epsilon: f64,
}

impl PerturbedSpec {
    /// Checks that `F` has arity n+1 (last slot is eps), output dimension n,
    /// and vanishes together with its x-gradient at the origin for a range
    /// of sampled eps.
    pub fn new(base: Arc<PoissonSpec>, forcing: BoxedVectorField, epsilon: f64) -> Result<Self> {
        let n = base.dim();
        if forcing.arity() != n + 1 {
            return Err(Error::Construction(
                "perturbation arity must be n + 1 (trailing epsilon slot)".to_string(),
            ));
        }
        if forcing.dim() != n {
            return Err(Error::Construction("perturbation output dimension != n".to_string()));
        }
        for eps in [0.0, 1e-3, 1e-2, 0.1, -0.1] {
            let mut point: Vec<Jet1> =
                (0..n).map(|i| Jet1::variable(0.0, i, n)).collect();
            point.push(Jet1::constant(eps));
            let out = forcing.eval1(&point)?;
            for (i, comp) in out.iter().enumerate() {
                if comp.value.abs() > ORIGIN_TOL {
                    return Err(Error::Construction(alloc::format!(
                        "F_{}(0; {eps}) = {} but must vanish",
                        i + 1,
                        comp.value
                    )));
                }
                if linalg::max_abs(&comp.partials_f64(n)) > ORIGIN_TOL {
                    return Err(Error::Construction(alloc::format!(
                        "grad_x F_{}(0; {eps}) must vanish",
                        i + 1
                    )));
                }
            }
        }
        Ok(PerturbedSpec { base, forcing, epsilon })
    }

    /// Skips origin validation; for test stubs that intentionally violate it.
    pub fn new_unchecked(
        base: Arc<PoissonSpec>,
        forcing: BoxedVectorField,
        epsilon: f64,
    ) -> Self {
        PerturbedSpec { base, forcing, epsilon }
    }

    pub fn base(&self) -> &Arc<PoissonSpec> {
        &self.base
    }

    /// `F(x; eps)` at any jet depth; `eps` rides as the trailing coordinate.
    pub fn forcing_at<S: JetScalar>(&self, x: &[S], eps: S) -> Result<Vec<S>> {
        let mut point = x.to_vec();
        point.push(eps);
        S::vector_field(self.forcing.as_ref(), &point)
    }

    /// Right-hand side of the perturbed system in original coordinates.
    pub fn rhs(&self, x: &[f64], eps: f64) -> Result<Vec<f64>> {
        let j = self.base.structure_matrix(x)?;
        let grad = self.base.hamiltonian_gradient(x)?;
        let n = self.base.dim();
        let drift = linalg::mat_vec(&j, n, n, &grad);
        let jets: Vec<Jet1> = x.iter().map(|&v| Jet1::constant(v)).collect();
        let f = self.forcing_at(&jets, Jet1::constant(eps))?;
        Ok(drift
            .into_iter()
            .zip(f.into_iter())
            .map(|(d, fi)| d + eps * fi.value)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationFailure {
    pub check: &'static str,
    pub point: Vec<f64>,
    pub magnitude: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub samples: usize,
    pub max_antisymmetry: f64,
    pub max_jacobi: f64,
    pub max_casimir: f64,
    pub max_hamiltonian_drift: f64,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Samples `sample_count` points of the domain hint and checks, at each:
/// antisymmetry of `J`, numerical rank 2, the Jacobi identity (derivatives
/// from jets), the Casimir property `J grad D_j = 0`, and invariance of the
/// Hamiltonian.
pub fn validate_poisson(spec: &PoissonSpec, sample_count: usize) -> Result<ValidationReport> {
    if sample_count == 0 {
        return Err(Error::InvalidConfig("sample_count must be at least 1".to_string()));
    }
    let n = spec.dim();
    let mut rng = SampleRng::new(VALIDATION_SEED);
    let mut report = ValidationReport {
        samples: sample_count,
        max_antisymmetry: 0.0,
        max_jacobi: 0.0,
        max_casimir: 0.0,
        max_hamiltonian_drift: 0.0,
        failures: Vec::new(),
    };

    for _ in 0..sample_count {
        let x = rng.point_in_box(spec.domain_hint());
        let jets: Vec<Jet1> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, n))
            .collect();

        let i_val = spec.first_integral_at(&jets)?;
        if i_val.value == 0.0 || !i_val.value.is_finite() {
            report.failures.push(ValidationFailure {
                check: "first-integral-nonzero",
                point: x.clone(),
                magnitude: i_val.value,
            });
            continue;
        }

        let j_full = spec.structure_matrix_at(&jets)?;
        let values: Vec<f64> = j_full.iter().map(|e| e.value).collect();
        let norm = linalg::inf_norm(&values, n, n);

        let mut anti = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                anti = anti.max((values[i * n + j] + values[j * n + i]).abs());
            }
        }
        report.max_antisymmetry = report.max_antisymmetry.max(anti);
        if anti > ANTISYMMETRY_TOL * (1.0 + norm) {
            report.failures.push(ValidationFailure {
                check: "antisymmetry",
                point: x.clone(),
                magnitude: anti,
            });
        }

        let r = linalg::rank(values.clone(), n, n, RANK_PIVOT_FACTOR * norm);
        if r != 2 {
            report.failures.push(ValidationFailure {
                check: "rank",
                point: x.clone(),
                magnitude: r as f64,
            });
        }

        // Jacobi identity over index triples, entry derivatives from jets.
        let entry = |i: usize, j: usize| &j_full[i * n + j];
        let mut jacobi = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        sum += entry(i, l).value * entry(j, k).partial_value(l)
                            + entry(j, l).value * entry(k, i).partial_value(l)
                            + entry(k, l).value * entry(i, j).partial_value(l);
                    }
                    jacobi = jacobi.max(sum.abs());
                }
            }
        }
        report.max_jacobi = report.max_jacobi.max(jacobi);
        if jacobi > JACOBI_TOL {
            report.failures.push(ValidationFailure {
                check: "jacobi",
                point: x.clone(),
                magnitude: jacobi,
            });
        }

        // Casimir property: J grad D_j = 0.
        for j in 3..=n {
            let d = spec.casimir_at(j, &jets)?;
            let grad = d.partials_f64(n);
            let v = linalg::mat_vec(&values, n, n, &grad);
            let worst = linalg::max_abs(&v);
            report.max_casimir = report.max_casimir.max(worst);
            if worst > CASIMIR_TOL {
                report.failures.push(ValidationFailure {
                    check: "casimir",
                    point: x.clone(),
                    magnitude: worst,
                });
            }
        }

        // H is a first integral of the unperturbed flow.
        let h = spec.hamiltonian_at(&jets)?;
        let grad_h = h.partials_f64(n);
        let flow = linalg::mat_vec(&values, n, n, &grad_h);
        let drift: f64 = grad_h.iter().zip(flow.iter()).map(|(a, b)| a * b).sum();
        let scale = 1.0 + linalg::max_abs(&grad_h) * linalg::max_abs(&flow);
        report.max_hamiltonian_drift = report.max_hamiltonian_drift.max(drift.abs());
        if drift.abs() > H_INVARIANCE_TOL * scale {
            report.failures.push(ValidationFailure {
                check: "hamiltonian-invariance",
                point: x,
                magnitude: drift.abs(),
            });
        }
    }
    Ok(report)
}
