//! Bifurcation functions by periodic quadrature.
//!
//! Uniform trapezoid sums on `[0, 2 pi)` are spectrally accurate for the
//! analytic periodic integrands produced by the standard form; the node
//! count doubles until two consecutive results agree to tolerance. The
//! inner antiderivative needed at second order is assembled from discrete
//! Fourier coefficients, which is exact for trigonometric polynomials up to
//! the node bandwidth.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::standard_form::StandardForm;

#[derive(Debug, Clone, Copy)]
pub struct QuadratureConfig {
    /// Base node count; a power of two not below 8.
    pub nodes: usize,
    /// Node doubling stops once two successive averages differ by less.
    pub tol: f64,
    pub max_doublings: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { nodes: 256, tol: 1e-10, max_doublings: 6 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 || !self.nodes.is_power_of_two() {
            return Err(Error::InvalidConfig(
                "quadrature nodes must be a power of two >= 8".to_string(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig("quadrature tol must be positive".to_string()));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        QuadratureConfig { nodes: self.nodes * 2, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AveragingOrder {
    First,
    Second,
}

/// Quadrature-backed evaluators for the averaged bifurcation functions.
pub struct AveragedMap<'a> {
    sf: &'a StandardForm,
    pub config: QuadratureConfig,
    pub order: AveragingOrder,
}

impl<'a> AveragedMap<'a> {
    pub fn new(sf: &'a StandardForm, config: QuadratureConfig, order: AveragingOrder) -> Result<Self> {
        config.validate()?;
        Ok(AveragedMap { sf, config, order })
    }

    pub fn first_order(sf: &'a StandardForm, config: QuadratureConfig) -> Result<Self> {
        Self::new(sf, config, AveragingOrder::First)
    }

    pub fn standard_form(&self) -> &StandardForm {
        self.sf
    }

    pub fn dim(&self) -> usize {
        self.sf.dim()
    }

    pub fn with_doubled_nodes(&self) -> Self {
        AveragedMap { sf: self.sf, config: self.config.doubled(), order: self.order }
    }

    fn converge<T: Clone>(
        &self,
        mut eval: impl FnMut(usize) -> Result<T>,
        delta: impl Fn(&T, &T) -> f64,
    ) -> Result<T> {
        let mut nodes = self.config.nodes;
        let mut prev = eval(nodes)?;
        let mut last_delta = f64::INFINITY;
        for _ in 0..self.config.max_doublings {
            nodes *= 2;
            let next = eval(nodes)?;
            last_delta = delta(&prev, &next);
            if last_delta < self.config.tol {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::QuadratureDivergence { last_delta })
    }

    /// First bifurcation function: the theta-average of `g0` at `(r, z)`.
    pub fn gbar0(&self, point: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        self.converge(
            |n| {
                let mut acc = vec![0.0; dim];
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let g0 = self.sf.g0_values(theta, point)?;
                    for (a, v) in acc.iter_mut().zip(g0.iter()) {
                        *a += v;
                    }
                }
                for a in acc.iter_mut() {
                    *a /= n as f64;
                }
                Ok(acc)
            },
            max_abs_diff,
        )
    }

    /// Jacobian of `gbar0` with respect to `(r, z)`: differentiation under
    /// the integral with the derivatives supplied by seeded jets.
    pub fn gbar0_jacobian(&self, point: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        self.converge(
            |n| {
                let mut acc = vec![0.0; dim * dim];
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let split = self.sf.g_split(theta, point)?;
                    for (a, v) in acc.iter_mut().zip(split.d_g0.iter()) {
                        *a += v;
                    }
                }
                for a in acc.iter_mut() {
                    *a /= n as f64;
                }
                Ok(acc)
            },
            max_abs_diff,
        )
    }

    /// Evaluator of `theta -> integral of g0 over [0, theta]` built from the
    /// discrete Fourier coefficients of the converged node set.
    pub fn inner_antiderivative(&self, point: &[f64]) -> Result<FourierAntiderivative> {
        let dim = self.dim();
        self.converge(
            |n| {
                let mut samples = vec![vec![0.0; n]; dim];
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let g0 = self.sf.g0_values(theta, point)?;
                    for (c, v) in samples.iter_mut().zip(g0.iter()) {
                        c[k] = *v;
                    }
                }
                Ok(FourierAntiderivative::from_samples(&samples))
            },
            |a, b| max_abs_diff(&a.mean, &b.mean),
        )
    }

    /// Second bifurcation function: the theta-average of
    /// `D_(r,z) g0 * (integral of g0) + g1`.
    pub fn rho_bar(&self, point: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        self.converge(
            |n| {
                let mut samples = vec![vec![0.0; n]; dim];
                let mut splits = Vec::with_capacity(n);
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let split = self.sf.g_split(theta, point)?;
                    for (c, v) in samples.iter_mut().zip(split.g0.iter()) {
                        c[k] = *v;
                    }
                    splits.push(split);
                }
                let anti = FourierAntiderivative::from_samples(&samples);
                let mut acc = vec![0.0; dim];
                for (k, split) in splits.iter().enumerate() {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let inner = anti.eval(theta);
                    for i in 0..dim {
                        let mut rho_i = split.g1[i];
                        for j in 0..dim {
                            rho_i += split.d_g0[i * dim + j] * inner[j];
                        }
                        acc[i] += rho_i;
                    }
                }
                for a in acc.iter_mut() {
                    *a /= n as f64;
                }
                Ok(acc)
            },
            max_abs_diff,
        )
    }

    /// The bifurcation function of the configured order.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        match self.order {
            AveragingOrder::First => self.gbar0(point),
            AveragingOrder::Second => self.rho_bar(point),
        }
    }

    /// One quadrature level at the base node count, no convergence doubling.
    /// Magnitude screening only (gates); spectral accuracy still applies.
    pub fn eval_one_level(&self, point: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        let n = self.config.nodes;
        let mut acc = vec![0.0; dim];
        match self.order {
            AveragingOrder::First => {
                for k in 0..n {
                    let theta = 2.0 * PI * k as f64 / n as f64;
                    let g0 = self.sf.g0_values(theta, point)?;
                    for (a, v) in acc.iter_mut().zip(g0.iter()) {
                        *a += v;
                    }
                }
            }
            AveragingOrder::Second => {
                return self.rho_bar(point);
            }
        }
        for a in acc.iter_mut() {
            *a /= n as f64;
        }
        Ok(acc)
    }

    /// Jacobian of the configured bifurcation function. First order uses
    /// seeded jets under the integral; second order falls back to central
    /// differences (the integrand's `(r, z)` derivative would need second
    /// derivatives of `g0`, which first-order jets do not carry).
    pub fn jacobian(&self, point: &[f64]) -> Result<Vec<f64>> {
        match self.order {
            AveragingOrder::First => self.gbar0_jacobian(point),
            AveragingOrder::Second => {
                let dim = self.dim();
                let mut jac = vec![0.0; dim * dim];
                for j in 0..dim {
                    let scale = 1.0 + point[j].abs();
                    let mut h = 1e-6 * scale;
                    if j == 0 {
                        // keep the stencil clear of the polar guard
                        let room = 0.25 * (point[0] - self.sf.r_min).max(0.0);
                        if room > 0.0 {
                            h = h.min(room);
                        }
                    }
                    let mut plus = point.to_vec();
                    let mut minus = point.to_vec();
                    plus[j] += h;
                    minus[j] -= h;
                    let fp = self.rho_bar(&plus)?;
                    let fm = self.rho_bar(&minus)?;
                    for i in 0..dim {
                        jac[i * dim + j] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                Ok(jac)
            }
        }
    }

    /// Max of `|gbar0|` over a probe grid; second-order conclusions are only
    /// trusted when this is below `tol` (the first-order function must
    /// vanish identically for the second-order theory to apply).
    pub fn identically_zero_gate(
        &self,
        r_range: (f64, f64),
        z_ranges: &[(f64, f64)],
        per_axis: usize,
        tol: f64,
    ) -> Result<GateReport> {
        let dim = self.dim();
        debug_assert_eq!(z_ranges.len(), dim - 1);
        let axes: Vec<Vec<f64>> = core::iter::once(r_range)
            .chain(z_ranges.iter().copied())
            .map(|(lo, hi)| linspace(lo, hi, per_axis))
            .collect();
        let mut idx = vec![0usize; dim];
        let mut max_abs = 0.0f64;
        let mut probes = 0usize;
        loop {
            let point: Vec<f64> = idx.iter().zip(axes.iter()).map(|(&i, ax)| ax[i]).collect();
            let g = self.gbar0(&point)?;
            max_abs = max_abs.max(crate::linalg::max_abs(&g));
            probes += 1;
            // odometer increment
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == dim {
                    return Ok(GateReport { max_abs, probes, tol, passed: max_abs < tol });
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GateReport {
    pub max_abs: f64,
    pub probes: usize,
    pub tol: f64,
    pub passed: bool,
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    debug_assert!(count >= 2);
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

#[allow(clippy::ptr_arg)] // used as a generic delta callback on Vec-valued results
fn max_abs_diff(a: &Vec<f64>, b: &Vec<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Componentwise antiderivative of a periodic vector signal, represented by
/// its Fourier series: the constant mode contributes the linear part
/// `mean * theta`, every other mode integrates termwise.
#[derive(Debug, Clone)]
pub struct FourierAntiderivative {
    pub mean: Vec<f64>,
    /// Per component: `(a_j, b_j)` for modes `j = 1 .. n/2 - 1`.
    coeffs: Vec<Vec<(f64, f64)>>,
    /// Per component: the cosine Nyquist coefficient.
    nyquist: Vec<f64>,
    nodes: usize,
}

impl FourierAntiderivative {
    /// Builds from uniform samples over `[0, 2 pi)`; `samples[c][k]` is
    /// component `c` at node `k`. Node counts must be powers of two.
    pub fn from_samples(samples: &[Vec<f64>]) -> Self {
        let dim = samples.len();
        let n = samples.first().map_or(0, Vec::len);
        debug_assert!(n.is_power_of_two() && n >= 2);
        let mut coeffs = Vec::with_capacity(dim);
        let mut mean = Vec::with_capacity(dim);
        let mut nyquist = Vec::with_capacity(dim);
        for comp in samples {
            let mut buf: Vec<Complex64> =
                comp.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft_in_place(&mut buf);
            mean.push(buf[0].re / n as f64);
            let mut modes = Vec::with_capacity(n / 2 - 1);
            for j in 1..n / 2 {
                let a = 2.0 * buf[j].re / n as f64;
                let b = -2.0 * buf[j].im / n as f64;
                modes.push((a, b));
            }
            coeffs.push(modes);
            nyquist.push(buf[n / 2].re / n as f64);
        }
        FourierAntiderivative { mean, coeffs, nyquist, nodes: n }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// `integral over [0, theta]` of the interpolated signal.
    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.dim());
        let half = self.nodes as f64 / 2.0;
        for c in 0..self.dim() {
            let mut acc = self.mean[c] * theta;
            for (j, &(a, b)) in self.coeffs[c].iter().enumerate() {
                let jf = (j + 1) as f64;
                acc += (a * Float::sin(jf * theta) - b * (Float::cos(jf * theta) - 1.0)) / jf;
            }
            acc += self.nyquist[c] * Float::sin(half * theta) / half;
            out.push(acc);
        }
        out
    }
}

/// Iterative radix-2 Cooley-Tukey transform (length must be a power of two).
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n <= 1 {
        return;
    }
    // bit-reversal permutation
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let angle = -2.0 * PI / len as f64;
        let w_len = Complex64::new(Float::cos(angle), Float::sin(angle));
        let mut start = 0;
        while start < n {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= w_len;
            }
            start += len;
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fft_of_cosine_hits_single_bin() {
        let n = 64;
        let mut buf: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new((2.0 * PI * 3.0 * k as f64 / n as f64).cos(), 0.0))
            .collect();
        fft_in_place(&mut buf);
        assert_relative_eq!(buf[3].re, n as f64 / 2.0, epsilon = 1e-9);
        assert_relative_eq!(buf[61].re, n as f64 / 2.0, epsilon = 1e-9);
        assert!(buf[5].re.abs() + buf[5].im.abs() < 1e-9);
    }

    #[test]
    fn antiderivative_of_cosine_is_sine() {
        let n = 64;
        let samples: Vec<Vec<f64>> = alloc::vec![(0..n)
            .map(|k| (2.0 * PI * k as f64 / n as f64).cos())
            .collect()];
        let anti = FourierAntiderivative::from_samples(&samples);
        for k in 0..n {
            let theta = 2.0 * PI * k as f64 / n as f64;
            assert_relative_eq!(anti.eval(theta)[0], theta.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn antiderivative_of_constant_is_linear() {
        let n = 16;
        let samples: Vec<Vec<f64>> = alloc::vec![alloc::vec![1.0; n]];
        let anti = FourierAntiderivative::from_samples(&samples);
        for theta in [0.0, 0.5, 2.0, 5.5] {
            assert_relative_eq!(anti.eval(theta)[0], theta, epsilon = 1e-12);
        }
    }

    #[test]
    fn antiderivative_matches_symbolic_for_random_trig_polynomial() {
        use crate::sample::SampleRng;
        let mut rng = SampleRng::new(0x5EED);
        let degree = 10;
        let n = 64;
        let a: Vec<f64> = (0..=degree).map(|_| rng.in_range(-1.0, 1.0)).collect();
        let b: Vec<f64> = (0..=degree).map(|_| rng.in_range(-1.0, 1.0)).collect();
        let f = |t: f64| -> f64 {
            a[0] + (1..=degree)
                .map(|j| a[j] * (j as f64 * t).cos() + b[j] * (j as f64 * t).sin())
                .sum::<f64>()
        };
        let sym = |t: f64| -> f64 {
            a[0] * t
                + (1..=degree)
                    .map(|j| {
                        let jf = j as f64;
                        (a[j] * (jf * t).sin() - b[j] * ((jf * t).cos() - 1.0)) / jf
                    })
                    .sum::<f64>()
        };
        let samples: Vec<Vec<f64>> = alloc::vec![(0..n)
            .map(|k| f(2.0 * PI * k as f64 / n as f64))
            .collect()];
        let anti = FourierAntiderivative::from_samples(&samples);
        for k in 0..4 * n {
            let theta = 2.0 * PI * k as f64 / (4 * n) as f64;
            assert_relative_eq!(anti.eval(theta)[0], sym(theta), epsilon = 1e-12);
        }
    }
}
