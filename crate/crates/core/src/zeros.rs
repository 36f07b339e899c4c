//! Multistart Newton search for simple zeros of the bifurcation functions,
//! with stability classification from the averaged Jacobian.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
#[cfg(not(feature = "std"))]
#[allow(unused_imports)]
use num_traits::Float;

use crate::average::{linspace, AveragedMap, AveragingOrder};
use crate::error::{Error, Result};
use crate::linalg;

/// Rectangular search region in `(r, z)`; the caller asserts it lies inside
/// the admissible cylinder `U*`.
#[derive(Debug, Clone)]
pub struct SearchBox {
    pub r: (f64, f64),
    pub z: Vec<(f64, f64)>,
    /// Grid node counts per axis, `[r, z...]`.
    pub grid: Vec<usize>,
}

impl SearchBox {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.z.len() != dim - 1 || self.grid.len() != dim {
            return Err(Error::InvalidConfig("search box dimension mismatch".to_string()));
        }
        if !(self.r.0 > 0.0) || !(self.r.1 > self.r.0) {
            return Err(Error::InvalidConfig(
                "r range must satisfy 0 < lower < upper".to_string(),
            ));
        }
        for &(lo, hi) in &self.z {
            if !(hi > lo) {
                return Err(Error::InvalidConfig("empty z range".to_string()));
            }
        }
        if self.grid.iter().any(|&g| g < 2) {
            return Err(Error::InvalidConfig("grid counts must be at least 2".to_string()));
        }
        Ok(())
    }

    fn axes(&self) -> Vec<Vec<f64>> {
        core::iter::once((self.r, self.grid[0]))
            .chain(self.z.iter().copied().zip(self.grid[1..].iter().copied()))
            .map(|((lo, hi), count)| linspace(lo, hi, count))
            .collect()
    }

    fn contains(&self, p: &[f64]) -> bool {
        if !(p[0] >= self.r.0 && p[0] <= self.r.1) {
            return false;
        }
        p[1..]
            .iter()
            .zip(self.z.iter())
            .all(|(&v, &(lo, hi))| v >= lo && v <= hi)
    }
}

#[derive(Debug, Clone)]
pub struct ZeroFinderOptions {
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub dedup_radius: f64,
    /// A zero is simple when `|det J| > factor * |J|^dim`.
    pub simplicity_factor: f64,
    /// Field treated as identically zero when every grid sample is below.
    pub zero_field_gate: f64,
}

impl Default for ZeroFinderOptions {
    fn default() -> Self {
        ZeroFinderOptions {
            newton_tol: 1e-10,
            max_iterations: 50,
            dedup_radius: 1e-6,
            simplicity_factor: 1e-8,
            zero_field_gate: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
    Indeterminate,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroRecord {
    /// `[r, z...]`.
    pub point: Vec<f64>,
    pub residual: f64,
    /// Residual re-evaluated with doubled quadrature nodes.
    pub residual_doubled: f64,
    /// Row-major Jacobian of the bifurcation function at the zero.
    pub jacobian: Vec<f64>,
    pub simple: bool,
    pub stability: Stability,
    pub order: u8,
}

#[derive(Debug, Clone)]
pub struct ZeroReport {
    pub zeros: Vec<ZeroRecord>,
    /// Set when the field is below the gate on the whole start grid; the
    /// caller should move to the next averaging order.
    pub identically_zero: bool,
    pub starts: usize,
    pub converged: usize,
    pub rejected_small_r: usize,
    pub rejected_out_of_box: usize,
    pub failed_evaluations: usize,
    pub dedup_radius: f64,
    pub newton_tol: f64,
}

impl ZeroReport {
    pub fn simple_zeros(&self) -> impl Iterator<Item = &ZeroRecord> {
        self.zeros.iter().filter(|z| z.simple)
    }
}

/// Anything Newton can hunt zeros of.
pub trait VectorMap {
    fn dim(&self) -> usize;
    fn eval(&self, point: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, point: &[f64]) -> Result<Vec<f64>> {
        central_difference_jacobian(self, point)
    }
}

pub fn central_difference_jacobian<M: VectorMap + ?Sized>(
    map: &M,
    point: &[f64],
) -> Result<Vec<f64>> {
    let dim = map.dim();
    let mut jac = vec![0.0; dim * dim];
    for j in 0..dim {
        let h = 1e-6 * (1.0 + point[j].abs());
        let mut plus = point.to_vec();
        let mut minus = point.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = map.eval(&plus)?;
        let fm = map.eval(&minus)?;
        for i in 0..dim {
            jac[i * dim + j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

impl<'a> VectorMap for AveragedMap<'a> {
    fn dim(&self) -> usize {
        AveragedMap::dim(self)
    }
    fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        AveragedMap::eval(self, point)
    }
    fn jacobian(&self, point: &[f64]) -> Result<Vec<f64>> {
        AveragedMap::jacobian(self, point)
    }
}

/// One damped Newton run; `None` when it fails to converge inside the
/// expanded box.
fn newton_run(
    map: &dyn VectorMap,
    start: &[f64],
    roam: &SearchBox,
    opts: &ZeroFinderOptions,
) -> Option<Vec<f64>> {
    // trust bound: a raw Newton step never jumps further than half a box
    // span per axis, which keeps iterates out of blow-up regions while
    // leaving local quadratic convergence untouched
    let spans: Vec<f64> = core::iter::once(roam.r.1 - roam.r.0)
        .chain(roam.z.iter().map(|&(lo, hi)| hi - lo))
        .collect();
    let mut p = start.to_vec();
    let mut res = linalg::max_abs(&map.eval(&p).ok()?);
    for _ in 0..opts.max_iterations {
        if res <= opts.newton_tol {
            return Some(p);
        }
        let jac = map.jacobian(&p).ok()?;
        let f = map.eval(&p).ok()?;
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let mut step = linalg::solve(jac, map.dim(), &neg_f, "newton step").ok()?;
        let overshoot = step
            .iter()
            .zip(spans.iter())
            .map(|(s, span)| s.abs() / (0.5 * span))
            .fold(0.0f64, f64::max);
        if overshoot > 1.0 {
            for s in step.iter_mut() {
                *s /= overshoot;
            }
        }
        let mut lambda = 1.0;
        let mut moved = false;
        for _ in 0..20 {
            let trial: Vec<f64> = p
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + lambda * s)
                .collect();
            if roam.contains_loose(&trial) {
                if let Ok(ft) = map.eval(&trial) {
                    let new_res = linalg::max_abs(&ft);
                    if new_res.is_finite() && (new_res < res || new_res <= opts.newton_tol) {
                        p = trial;
                        res = new_res;
                        moved = true;
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        if !moved {
            return None;
        }
    }
    if res <= opts.newton_tol {
        Some(p)
    } else {
        None
    }
}

impl SearchBox {
    /// Expanded membership used while Newton iterates roam; the reported
    /// zeros are still filtered by the strict box.
    fn contains_loose(&self, p: &[f64]) -> bool {
        let r_span = self.r.1 - self.r.0;
        let r_lo = (self.r.0 * 0.25).max(1e-5);
        if !(p[0] >= r_lo && p[0] <= self.r.1 + 0.5 * r_span) {
            return false;
        }
        p[1..].iter().zip(self.z.iter()).all(|(&v, &(lo, hi))| {
            let span = hi - lo;
            v >= lo - 0.5 * span && v <= hi + 0.5 * span
        })
    }
}

/// Multistart Newton over the box grid, then deduplication, simplicity
/// testing and stability classification.
pub fn find_zeros(
    map: &AveragedMap<'_>,
    bbox: &SearchBox,
    opts: &ZeroFinderOptions,
) -> Result<ZeroReport> {
    let dim = map.dim();
    bbox.validate(dim)?;
    let axes = bbox.axes();
    let mut starts = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        starts.push(
            idx.iter()
                .zip(axes.iter())
                .map(|(&i, ax)| ax[i])
                .collect::<Vec<f64>>(),
        );
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dim {
                return finish_find_zeros(map, bbox, opts, starts);
            }
        }
    }
}

fn finish_find_zeros(
    map: &AveragedMap<'_>,
    bbox: &SearchBox,
    opts: &ZeroFinderOptions,
    starts: Vec<Vec<f64>>,
) -> Result<ZeroReport> {
    let dim = map.dim();
    let mut report = ZeroReport {
        zeros: Vec::new(),
        identically_zero: false,
        starts: starts.len(),
        converged: 0,
        rejected_small_r: 0,
        rejected_out_of_box: 0,
        failed_evaluations: 0,
        dedup_radius: opts.dedup_radius,
        newton_tol: opts.newton_tol,
    };

    // Applicability gate: a field that vanishes on the whole grid has no
    // simple zeros to offer; callers must move to the next order.
    let mut grid_max = 0.0f64;
    let mut evaluated = 0usize;
    for s in &starts {
        match map.eval_one_level(s) {
            Ok(v) => {
                grid_max = grid_max.max(linalg::max_abs(&v));
                evaluated += 1;
            }
            Err(_) => report.failed_evaluations += 1,
        }
    }
    if evaluated > 0 && grid_max < opts.zero_field_gate {
        report.identically_zero = true;
        return Ok(report);
    }

    let mut found: Vec<Vec<f64>> = Vec::new();
    for s in &starts {
        if let Some(p) = newton_run(map, s, bbox, opts) {
            report.converged += 1;
            if p[0] <= bbox.r.0 {
                report.rejected_small_r += 1;
                continue;
            }
            if !bbox.contains(&p) {
                report.rejected_out_of_box += 1;
                continue;
            }
            found.push(p);
        }
    }

    // Deterministic dedup: sort lexicographically, keep the first of each
    // cluster.
    found.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(core::cmp::Ordering::Equal))
            .find(|o| *o != core::cmp::Ordering::Equal)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for p in found {
        let dup = kept.iter().any(|q| {
            p.iter()
                .zip(q.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                <= opts.dedup_radius
        });
        if !dup {
            kept.push(p);
        }
    }

    let doubled = map.with_doubled_nodes();
    let order = match map.order {
        AveragingOrder::First => 1,
        AveragingOrder::Second => 2,
    };
    for point in kept {
        let residual = linalg::max_abs(&map.eval(&point)?);
        let residual_doubled = linalg::max_abs(&doubled.eval(&point)?);
        let jacobian = map.jacobian(&point)?;
        let det = linalg::determinant(jacobian.clone(), dim);
        let norm = linalg::inf_norm(&jacobian, dim, dim);
        let simple = det.abs() > opts.simplicity_factor * norm.powi(dim as i32);
        let stability = if order == 1 && simple {
            classify_stability(&jacobian, dim)
        } else {
            // second-order existence theory carries no stability statement
            Stability::Indeterminate
        };
        report.zeros.push(ZeroRecord {
            point,
            residual,
            residual_doubled,
            jacobian,
            simple,
            stability,
            order,
        });
    }
    Ok(report)
}

const ROUTH_BOUNDARY_TOL: f64 = 1e-9;

/// Sign pattern of the eigenvalue real parts via the characteristic
/// polynomial and a Routh table; no eigensolver needed. The matrix is
/// normalized by its norm first, so the verdict is invariant under positive
/// scaling.
pub fn classify_stability(jacobian: &[f64], dim: usize) -> Stability {
    debug_assert_eq!(jacobian.len(), dim * dim);
    let scale = linalg::inf_norm(jacobian, dim, dim);
    if scale == 0.0 || !scale.is_finite() {
        return Stability::Indeterminate;
    }
    let normalized: Vec<f64> = jacobian.iter().map(|v| v / scale).collect();
    let coeffs = linalg::char_poly(&normalized, dim);
    routh_verdict(&coeffs)
}

/// Routh-Hurwitz on `[1, c1, ..., cm]` (monic, highest degree first).
fn routh_verdict(coeffs: &[f64]) -> Stability {
    let m = coeffs.len() - 1;
    if m == 0 {
        return Stability::Indeterminate;
    }
    // rows[0] = c0, c2, c4...; rows[1] = c1, c3, ...
    let width = m / 2 + 1;
    let mut prev: Vec<f64> = (0..width).map(|i| coeffs.get(2 * i).copied().unwrap_or(0.0)).collect();
    let mut curr: Vec<f64> =
        (0..width).map(|i| coeffs.get(2 * i + 1).copied().unwrap_or(0.0)).collect();
    let mut first_column = vec![prev[0]];
    let mut sign_changes = 0usize;
    for _ in 0..m {
        let lead = curr[0];
        if lead.abs() <= ROUTH_BOUNDARY_TOL {
            return Stability::Indeterminate;
        }
        first_column.push(lead);
        let k = first_column.len();
        let prev_lead = first_column[k - 2];
        if prev_lead * lead < 0.0 {
            sign_changes += 1;
        }
        if k == m + 1 {
            break;
        }
        let mut next = vec![0.0; width];
        for i in 0..width - 1 {
            let a = prev.get(i + 1).copied().unwrap_or(0.0);
            let b = curr.get(i + 1).copied().unwrap_or(0.0);
            next[i] = a - (prev[0] / lead) * b;
        }
        prev = curr;
        curr = next;
    }
    if sign_changes == 0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Small-amplitude analysis near `r = 0`: divides the declared leading
/// powers of `r` out of the averaged function, extrapolates the reduced
/// function to `r = 0` by Richardson steps on the even series, and counts
/// its zeros in the box.
#[derive(Debug, Clone)]
pub struct LocalScanReport {
    /// Extrapolated reduced function at `(0, 0)`.
    pub origin: Vec<f64>,
    pub origin_converged: bool,
    /// Per z-grid row: `(z, extrapolated value, converged)`.
    pub z_profile: Vec<(Vec<f64>, Vec<f64>, bool)>,
    /// The reduced function never rose above noise on the probe levels;
    /// the zero hunt is skipped (everything is a zero, none is isolated).
    pub identically_zero: bool,
    pub zero_count: usize,
    pub zeros: Vec<Vec<f64>>,
    pub r_levels: [f64; 3],
}

/// Reduced values below this on every probe mean there is nothing to hunt.
const SCAN_ZERO_GATE: f64 = 1e-10;

struct ReducedMap<'m, 'a> {
    map: &'m AveragedMap<'a>,
    powers: Vec<i32>,
}

impl VectorMap for ReducedMap<'_, '_> {
    fn dim(&self) -> usize {
        self.map.dim()
    }
    fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        let g = self.map.eval(point)?;
        Ok(g.into_iter()
            .zip(self.powers.iter())
            .map(|(v, &p)| v / point[0].powi(p))
            .collect())
    }
}

pub fn local_small_amplitude_scan(
    map: &AveragedMap<'_>,
    leading_powers: &[u32],
    r_max: f64,
    z_box: &[(f64, f64)],
    z_grid: usize,
) -> Result<LocalScanReport> {
    let dim = map.dim();
    if leading_powers.len() != dim || z_box.len() != dim - 1 {
        return Err(Error::InvalidConfig("local scan dimension mismatch".to_string()));
    }
    if !(r_max > 0.0) {
        return Err(Error::InvalidConfig("r_max must be positive".to_string()));
    }
    let reduced = ReducedMap {
        map,
        powers: leading_powers.iter().map(|&p| p as i32).collect(),
    };
    let r_levels = [r_max, r_max / 2.0, r_max / 4.0];

    let extrapolate = |z: &[f64]| -> Result<(Vec<f64>, bool)> {
        let mut levels = Vec::with_capacity(3);
        for &r in &r_levels {
            let mut point = Vec::with_capacity(dim);
            point.push(r);
            point.extend_from_slice(z);
            levels.push(reduced.eval(&point)?);
        }
        // Even series in r: two Richardson stages on steps r, r/2, r/4.
        let stage = |fine: &[f64], coarse: &[f64], weight: f64| -> Vec<f64> {
            fine.iter()
                .zip(coarse.iter())
                .map(|(f, c)| (weight * f - c) / (weight - 1.0))
                .collect()
        };
        let a1 = stage(&levels[1], &levels[0], 4.0);
        let a2 = stage(&levels[2], &levels[1], 4.0);
        let out = stage(&a2, &a1, 16.0);
        let spread = out
            .iter()
            .zip(a2.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let converged = spread <= f64::max(1e-4, 1e-4 * linalg::max_abs(&out));
        Ok((out, converged))
    };

    let origin_z = vec![0.0; dim - 1];
    let (origin, origin_converged) = extrapolate(&origin_z)?;

    let mut probe_max = linalg::max_abs(&origin);
    let mut z_profile = Vec::new();
    let z_values: Vec<Vec<f64>> = {
        // grid over the first z axis, midpoints elsewhere (n = 3 in all
        // built-in scenarios, so this is simply a 1-d sweep)
        let first = linspace(z_box[0].0, z_box[0].1, z_grid);
        first
            .into_iter()
            .map(|z0| {
                let mut z = vec![z0];
                z.extend(z_box[1..].iter().map(|&(lo, hi)| 0.5 * (lo + hi)));
                z
            })
            .collect()
    };
    for z in z_values {
        let (val, conv) = extrapolate(&z)?;
        probe_max = probe_max.max(linalg::max_abs(&val));
        z_profile.push((z, val, conv));
    }

    if probe_max < SCAN_ZERO_GATE {
        return Ok(LocalScanReport {
            origin,
            origin_converged,
            z_profile,
            identically_zero: true,
            zero_count: 0,
            zeros: Vec::new(),
            r_levels,
        });
    }

    // Zero hunt for the reduced function on the truncated box.
    let bbox = SearchBox {
        r: ((r_max / 64.0).max(10.0 * map.standard_form().r_min), r_max),
        z: z_box.to_vec(),
        grid: vec![5; dim],
    };
    let opts = ZeroFinderOptions { max_iterations: 15, ..Default::default() };
    let axes = bbox.axes();
    let mut zeros: Vec<Vec<f64>> = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let start: Vec<f64> = idx.iter().zip(axes.iter()).map(|(&i, ax)| ax[i]).collect();
        if let Some(p) = newton_run(&reduced, &start, &bbox, &opts) {
            if bbox.contains(&p) {
                let dup = zeros.iter().any(|q| {
                    p.iter()
                        .zip(q.iter())
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                        <= 1e-5
                });
                if !dup {
                    zeros.push(p);
                }
            }
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dim {
                break 'outer;
            }
        }
    }
    zeros.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap_or(core::cmp::Ordering::Equal));

    Ok(LocalScanReport {
        origin,
        origin_converged,
        z_profile,
        identically_zero: false,
        zero_count: zeros.len(),
        zeros,
        r_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_diagonal() {
        let j = [-1.0, 0.0, 0.0, -2.0];
        assert_eq!(classify_stability(&j, 2), Stability::Stable);
    }

    #[test]
    fn unstable_diagonal() {
        let j = [-1.0, 0.0, 0.0, 3.0];
        assert_eq!(classify_stability(&j, 2), Stability::Unstable);
    }

    #[test]
    fn rotation_is_boundary() {
        let j = [0.0, 1.0, -1.0, 0.0];
        assert_eq!(classify_stability(&j, 2), Stability::Indeterminate);
    }

    #[test]
    fn scaling_does_not_change_verdict() {
        let j = [-0.3, 1.2, -0.7, -0.1];
        let scaled: Vec<f64> = j.iter().map(|v| v * 7.25e4).collect();
        assert_eq!(classify_stability(&j, 2), classify_stability(&scaled, 2));
    }

    #[test]
    fn three_by_three_stable() {
        // upper triangular with eigenvalues -1, -2, -0.5
        let j = [-1.0, 4.0, 1.0, 0.0, -2.0, 3.0, 0.0, 0.0, -0.5];
        assert_eq!(classify_stability(&j, 3), Stability::Stable);
    }

    #[test]
    fn zero_matrix_is_indeterminate() {
        let j = [0.0; 4];
        assert_eq!(classify_stability(&j, 2), Stability::Indeterminate);
    }
}
