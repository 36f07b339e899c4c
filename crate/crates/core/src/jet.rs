//! Forward-mode multi-seed dual numbers.
//!
//! `Jet1` carries a value together with its directional derivatives along a
//! set of seed directions; arithmetic propagates the product and chain rules
//! exactly, so first derivatives come out to round-off rather than to a
//! finite-difference step. The scalar slot is generic: nesting `Jet<Jet1>`
//! yields the mixed second derivatives the chart transport needs without a
//! separate code path.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

/// Arithmetic closed under the operations the pipeline composes.
pub trait Scalar:
    Clone
    + core::fmt::Debug
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
    + core::ops::Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn zero() -> Self;
    fn one() -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn recip(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    /// The underlying primal value, stripped of every derivative layer.
    fn primal(&self) -> f64;

    fn add_f64(&self, v: f64) -> Self {
        self.clone() + Self::from_f64(v)
    }
    fn mul_f64(&self, v: f64) -> Self {
        self.clone() * Self::from_f64(v)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn sin(&self) -> Self {
        Float::sin(*self)
    }
    fn cos(&self) -> Self {
        Float::cos(*self)
    }
    fn sqrt(&self) -> Self {
        Float::sqrt(*self)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
    fn powi(&self, n: i32) -> Self {
        Float::powi(*self, n)
    }
    fn primal(&self) -> f64 {
        *self
    }
}

/// A value plus its partial derivatives along `partials.len()` seeds.
///
/// An empty partial vector denotes a constant and broadcasts against any
/// seed count; nonempty operands of one evaluation must agree in length.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S> {
    pub value: S,
    pub partials: Vec<S>,
}

/// First-order jet over plain `f64`.
pub type Jet1 = Jet<f64>;
/// Jet of jets: value and partials are themselves `Jet1`, giving the mixed
/// second derivatives needed to push outer seeds through chart Jacobians.
pub type Jet2 = Jet<Jet1>;

impl<S: Scalar> Jet<S> {
    pub fn new(value: S, partials: Vec<S>) -> Self {
        Jet { value, partials }
    }

    /// A constant: zero derivative along every seed.
    pub fn constant(value: S) -> Self {
        Jet { value, partials: Vec::new() }
    }

    /// The `index`-th of `count` independent variables.
    pub fn variable(value: S, index: usize, count: usize) -> Self {
        debug_assert!(index < count);
        let mut partials = vec![S::zero(); count];
        partials[index] = S::one();
        Jet { value, partials }
    }

    pub fn seed_count(&self) -> usize {
        self.partials.len()
    }

    /// Partial along seed `i`, treating constants as identically zero.
    pub fn partial(&self, i: usize) -> S {
        if self.partials.is_empty() {
            S::zero()
        } else {
            self.partials[i].clone()
        }
    }

    fn unary(self, value: S, factor: S) -> Self {
        let partials = self
            .partials
            .into_iter()
            .map(|p| p * factor.clone())
            .collect();
        Jet { value, partials }
    }
}

impl Jet1 {
    /// Partial along seed `i` as plain `f64`.
    pub fn partial_value(&self, i: usize) -> f64 {
        self.partial(i)
    }

    /// All `count` partials as plain floats, expanding constants to zeros.
    pub fn partials_f64(&self, count: usize) -> Vec<f64> {
        (0..count).map(|i| self.partial(i)).collect()
    }
}

fn zip_partials<S: Scalar>(a: Vec<S>, b: &[S], f: impl Fn(S, S) -> S) -> Vec<S> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Vec::new(),
        (true, false) => b.iter().map(|q| f(S::zero(), q.clone())).collect(),
        (false, true) => a.into_iter().map(|p| f(p, S::zero())).collect(),
        (false, false) => {
            assert_eq!(a.len(), b.len(), "jet seed count mismatch");
            a.into_iter().zip(b.iter()).map(|(p, q)| f(p, q.clone())).collect()
        }
    }
}

impl<S: Scalar> core::ops::Add for Jet<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Jet {
            value: self.value + rhs.value,
            partials: zip_partials(self.partials, &rhs.partials, |p, q| p + q),
        }
    }
}

impl<S: Scalar> core::ops::Sub for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Jet {
            value: self.value - rhs.value,
            partials: zip_partials(self.partials, &rhs.partials, |p, q| p - q),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)] // product rule
impl<S: Scalar> core::ops::Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let va = self.value.clone();
        let vb = rhs.value.clone();
        Jet {
            value: self.value * rhs.value,
            partials: zip_partials(self.partials, &rhs.partials, |p, q| {
                p * vb.clone() + va.clone() * q
            }),
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<S: Scalar> core::ops::Div for Jet<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * Scalar::recip(&rhs)
    }
}

impl<S: Scalar> core::ops::Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            value: -self.value,
            partials: self.partials.into_iter().map(|p| -p).collect(),
        }
    }
}

impl<S: Scalar> core::ops::Add<f64> for Jet<S> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        Jet { value: self.value + S::from_f64(rhs), partials: self.partials }
    }
}

impl<S: Scalar> core::ops::Sub<f64> for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        Jet { value: self.value - S::from_f64(rhs), partials: self.partials }
    }
}

impl<S: Scalar> core::ops::Mul<f64> for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let c = S::from_f64(rhs);
        Jet {
            value: self.value * c.clone(),
            partials: self.partials.into_iter().map(|p| p * c.clone()).collect(),
        }
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(S::from_f64(v))
    }
    fn zero() -> Self {
        Jet::constant(S::zero())
    }
    fn one() -> Self {
        Jet::constant(S::one())
    }

    fn sin(&self) -> Self {
        let value = self.value.sin();
        let factor = self.value.cos();
        self.clone().unary(value, factor)
    }

    fn cos(&self) -> Self {
        let value = self.value.cos();
        let factor = -self.value.sin();
        self.clone().unary(value, factor)
    }

    fn sqrt(&self) -> Self {
        let root = self.value.sqrt();
        let factor = Scalar::recip(&(root.clone() + root.clone()));
        self.clone().unary(root, factor)
    }

    fn recip(&self) -> Self {
        let inv = Scalar::recip(&self.value);
        let factor = -(inv.clone() * inv.clone());
        self.clone().unary(inv, factor)
    }

    fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Scalar::one();
        }
        if n == 1 {
            return self.clone();
        }
        let value = self.value.powi(n);
        let factor = self.value.powi(n - 1) * S::from_f64(f64::from(n));
        self.clone().unary(value, factor)
    }

    fn primal(&self) -> f64 {
        self.value.primal()
    }
}

/// Dot product of equal-length slices in any scalar.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = S::zero();
    for (p, q) in a.iter().zip(b.iter()) {
        acc = acc + p.clone() * q.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn square_has_doubled_partial() {
        let x = Jet1::variable(2.0, 0, 1);
        let y = x.clone() * x;
        assert_eq!(y.value, 4.0);
        assert_eq!(y.partials, vec![4.0]);
    }

    #[test]
    fn constants_have_zero_partials() {
        let c = Jet1::constant(7.5);
        let x = Jet1::variable(1.0, 0, 2);
        let y = c * x;
        assert_eq!(y.value, 7.5);
        assert_eq!(y.partials_f64(2), vec![7.5, 0.0]);
    }

    #[test]
    fn product_partials_are_cross_values() {
        let x1 = Jet1::variable(3.0, 0, 2);
        let x2 = Jet1::variable(5.0, 1, 2);
        let y = x1 * x2;
        assert_eq!(y.value, 15.0);
        assert_eq!(y.partials, vec![5.0, 3.0]);
    }

    #[test]
    fn value_arithmetic_matches_f64_bitwise() {
        let a = Jet1::variable(0.1, 0, 1);
        let b = Jet1::variable(0.7, 0, 1);
        let sum = a.clone() + b.clone();
        assert_eq!(sum.value, 0.1f64 + 0.7f64);
        let prod = a * b;
        assert_eq!(prod.value, 0.1f64 * 0.7f64);
    }

    #[test]
    fn division_quotient_rule() {
        let x = Jet1::variable(6.0, 0, 2);
        let y = Jet1::variable(2.0, 1, 2);
        let q = x / y;
        assert_relative_eq!(q.value, 3.0);
        assert_relative_eq!(q.partials[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(q.partials[1], -1.5, epsilon = 1e-14);
    }

    #[test]
    fn trig_and_sqrt_chain() {
        let x = Jet1::variable(0.3, 0, 1);
        let y = (x.clone().sin() * x.clone().cos() + 1.0).sqrt();
        let f = |t: f64| (1.0 + t.sin() * t.cos()).sqrt();
        let h = 1e-6;
        let fd = (f(0.3 + h) - f(0.3 - h)) / (2.0 * h);
        assert_relative_eq!(y.value, f(0.3), epsilon = 1e-14);
        assert_relative_eq!(y.partials[0], fd, epsilon = 1e-8);
    }

    #[test]
    fn nested_jets_give_second_derivatives() {
        // f(x) = x^3 at x = 2: value 8, f' = 12, f'' = 12.
        let inner = Jet1::variable(2.0, 0, 1);
        let x: Jet2 = Jet::new(inner, vec![Jet1::one()]);
        let y = Scalar::powi(&x, 3);
        assert_relative_eq!(y.value.value, 8.0);
        assert_relative_eq!(y.value.partials[0], 12.0);
        assert_relative_eq!(y.partials[0].value, 12.0);
        assert_relative_eq!(y.partials[0].partials[0], 12.0, epsilon = 1e-12);
    }

    #[test]
    fn powi_zero_exponent_is_constant_one() {
        let x = Jet1::variable(0.0, 0, 1);
        let y = Scalar::powi(&x, 0);
        assert_eq!(y.value, 1.0);
        assert!(y.partials.is_empty());
    }
}
