//! Sparse multivariate polynomials with exact coefficient arithmetic.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::FieldExpr;
use crate::jet::{Jet1, Scalar};

/// Polynomial stored as a map from exponent tuples to coefficients.
///
/// Zero coefficients are never stored; exponents are nonnegative integers.
/// The `BTreeMap` keeps term iteration in a fixed order, so evaluation is
/// bit-for-bit reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePoly {
    arity: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl SparsePoly {
    /// The zero polynomial in `arity` variables.
    pub fn new(arity: usize) -> Self {
        SparsePoly { arity, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(arity: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let mut poly = SparsePoly::new(arity);
        for (exps, coeff) in terms {
            poly.add_term(&exps, coeff)?;
        }
        Ok(poly)
    }

    /// Adds `coeff` to the monomial with the given exponents.
    pub fn add_term(&mut self, exps: &[u32], coeff: f64) -> Result<()> {
        if exps.len() != self.arity {
            return Err(Error::Construction(
                "exponent tuple length does not match polynomial arity".to_string(),
            ));
        }
        if !coeff.is_finite() {
            return Err(Error::NonFinite { context: "polynomial coefficient" });
        }
        let entry = self.terms.entry(exps.to_vec()).or_insert(0.0);
        *entry += coeff;
        if *entry == 0.0 {
            self.terms.remove(exps);
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), *c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> f64 {
        self.terms.get(exps).copied().unwrap_or(0.0)
    }

    /// Evaluation in any scalar; callers guarantee `point.len() == arity`.
    pub fn eval_in<S: Scalar>(&self, point: &[S]) -> S {
        debug_assert_eq!(point.len(), self.arity);
        let mut acc = S::zero();
        for (exps, coeff) in &self.terms {
            let mut term = S::from_f64(*coeff);
            for (x, &e) in point.iter().zip(exps.iter()) {
                if e > 0 {
                    term = term * x.powi(e as i32);
                }
            }
            acc = acc + term;
        }
        acc
    }

    /// The exact mixed partial derivative at the origin: the coefficient of
    /// the monomial times the product of exponent factorials. Absent
    /// monomials (and mismatched index lengths) give 0.
    pub fn partial_at_zero(&self, index: &[u32]) -> f64 {
        if index.len() != self.arity {
            return 0.0;
        }
        let coeff = self.coefficient(index);
        coeff * index.iter().map(|&n| factorial(n)).product::<f64>()
    }

    /// The partial derivative with respect to variable `axis`, as a polynomial.
    pub fn partial_derivative(&self, axis: usize) -> SparsePoly {
        assert!(axis < self.arity);
        let mut out = SparsePoly::new(self.arity);
        for (exps, coeff) in &self.terms {
            let e = exps[axis];
            if e == 0 {
                continue;
            }
            let mut lowered = exps.clone();
            lowered[axis] = e - 1;
            out.add_term(&lowered, coeff * f64::from(e)).expect("same arity");
        }
        out
    }

    pub fn min_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn max_total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }
}

impl FieldExpr for SparsePoly {
    fn arity(&self) -> usize {
        self.arity
    }
    fn expr<S: Scalar>(&self, point: &[S]) -> S {
        self.eval_in(point)
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Polynomial evaluation on jet inputs with the arity checked up front.
pub fn poly_eval(poly: &SparsePoly, point: &[Jet1]) -> Result<Jet1> {
    if point.len() != poly.arity {
        return Err(Error::Arity { expected: poly.arity, got: point.len() });
    }
    Ok(poly.eval_in(point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::SampleRng;
    use approx::assert_relative_eq;

    fn poly(arity: usize, terms: &[(&[u32], f64)]) -> SparsePoly {
        SparsePoly::from_terms(arity, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
    }

    #[test]
    fn direct_product_evaluation() {
        let p = poly(3, &[(&[2, 0, 1], 1.0)]);
        let at = [Jet1::constant(1.0), Jet1::constant(0.0), Jet1::constant(2.0)];
        assert_eq!(poly_eval(&p, &at).unwrap().value, 2.0);
    }

    #[test]
    fn empty_polynomial_is_zero() {
        let p = SparsePoly::new(2);
        let at = [Jet1::constant(3.0), Jet1::constant(-1.0)];
        assert_eq!(poly_eval(&p, &at).unwrap().value, 0.0);
    }

    #[test]
    fn cubic_partial_matches_finite_differences() {
        let p = poly(2, &[(&[0, 3], 2.0)]); // 2 x2^3
        let at = [Jet1::constant(0.0), Jet1::variable(1.5, 1, 2)];
        let out = poly_eval(&p, &at).unwrap();
        assert_relative_eq!(out.value, 6.75);
        assert_relative_eq!(out.partials[1], 13.5);
        let h = 1e-6;
        let f = |t: f64| 2.0 * t * t * t;
        let fd = (f(1.5 + h) - f(1.5 - h)) / (2.0 * h);
        assert_relative_eq!(out.partials[1], fd, epsilon = 1e-6);
    }

    #[test]
    fn arity_mismatch_is_rejected() {
        let p = poly(3, &[(&[1, 0, 0], 1.0)]);
        let at = [Jet1::constant(1.0), Jet1::constant(1.0)];
        assert!(matches!(poly_eval(&p, &at), Err(Error::Arity { expected: 3, got: 2 })));
    }

    #[test]
    fn partial_at_zero_examples() {
        let p = poly(3, &[(&[0, 0, 3], 1.0)]);
        assert_eq!(p.partial_at_zero(&[0, 0, 3]), 6.0);

        let q = poly(3, &[(&[1, 1, 0], 1.0)]);
        assert_eq!(q.partial_at_zero(&[2, 0, 0]), 0.0);

        let r = poly(3, &[(&[2, 1, 0], 4.0)]);
        assert_eq!(r.partial_at_zero(&[2, 1, 0]), 8.0);
    }

    #[test]
    fn partial_at_zero_matches_repeated_differentiation_up_to_degree_four() {
        // For every monomial of total degree <= 4, differentiate repeatedly
        // (test-side exponent bookkeeping) and evaluate at the origin.
        let mut monomials = alloc::vec::Vec::new();
        for i in 0..=4u32 {
            for j in 0..=(4 - i) {
                for k in 0..=(4 - i - j) {
                    monomials.push([i, j, k]);
                }
            }
        }
        for mono in &monomials {
            let p = poly(3, &[(&mono[..], 1.75)]);
            for idx in &monomials {
                // Repeated differentiation of x^m by index n: zero unless
                // n == m (for an origin evaluation), else product of
                // falling factorials m!/(m-n)! with the rest at x = 0.
                let expected = if idx == mono {
                    1.75 * mono.iter().map(|&n| super::factorial(n)).product::<f64>()
                } else {
                    let dominates = idx.iter().zip(mono.iter()).all(|(n, m)| n <= m);
                    if dominates && idx != mono {
                        0.0 // surviving positive powers vanish at the origin
                    } else {
                        0.0 // differentiated to death
                    }
                };
                assert_eq!(p.partial_at_zero(idx), expected, "mono {mono:?} idx {idx:?}");
            }
        }
    }

    #[test]
    fn symbolic_derivative_agrees_with_jets() {
        let p = poly(
            2,
            &[(&[3, 0], 1.0), (&[1, 2], -2.0), (&[0, 1], 0.5)],
        );
        let dp = p.partial_derivative(0);
        let at = [Jet1::variable(0.7, 0, 2), Jet1::variable(-0.4, 1, 2)];
        let jet = poly_eval(&p, &at).unwrap();
        let direct = dp.eval_in(&[0.7, -0.4]);
        assert_relative_eq!(jet.partials[0], direct, epsilon = 1e-14);
    }

    #[test]
    fn random_polynomials_match_central_differences() {
        let mut rng = SampleRng::new(0x5EED);
        for _ in 0..100 {
            let arity = 3;
            let mut p = SparsePoly::new(arity);
            for _ in 0..6 {
                let exps: alloc::vec::Vec<u32> =
                    (0..arity).map(|_| (rng.next_f64() * 4.0) as u32).collect();
                p.add_term(&exps, rng.in_range(-2.0, 2.0)).unwrap();
            }
            let x: alloc::vec::Vec<f64> = (0..arity).map(|_| rng.in_range(-1.0, 1.0)).collect();
            let jets: alloc::vec::Vec<Jet1> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| Jet1::variable(v, i, arity))
                .collect();
            let out = poly_eval(&p, &jets).unwrap();
            let h = 1e-6;
            for axis in 0..arity {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[axis] += h;
                xm[axis] -= h;
                let fd = (p.eval_in(&xp) - p.eval_in(&xm)) / (2.0 * h);
                let scale = 1.0 + fd.abs();
                assert!(
                    (out.partial_value(axis) - fd).abs() / scale < 1e-6,
                    "axis {axis}: jet {} vs fd {fd}",
                    out.partial_value(axis)
                );
            }
        }
    }
}
