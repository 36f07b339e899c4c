//! Locating and classifying simple zeros of the averaged functions.

mod common;

use common::*;
use poisson_averaging::sample::SampleRng;
use poisson_averaging::zeros::{
    classify_stability, find_zeros, local_small_amplitude_scan, SearchBox, Stability,
    ZeroFinderOptions,
};
use poisson_averaging::{AveragingOrder, QuadratureConfig};

fn quad() -> QuadratureConfig {
    // the oracle integrands are low-degree trigonometric polynomials, so a
    // small node count is already exact; doubling still verifies it
    QuadratureConfig { nodes: 64, ..Default::default() }
}

fn default_box() -> SearchBox {
    SearchBox { r: (0.05, 3.0), z: vec![(-0.9, 3.0)], grid: vec![8, 8] }
}

#[test]
fn harmonic_oracle_has_exactly_one_stable_zero() {
    let s = harmonic_oracle();
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let report = find_zeros(&map, &default_box(), &ZeroFinderOptions::default()).unwrap();
    assert_eq!(report.zeros.len(), 1, "{report:?}");
    let zero = &report.zeros[0];
    assert!((zero.point[0] - 0.5).abs() <= 1e-8);
    assert!((zero.point[1] + 0.5).abs() <= 1e-8);
    assert!(zero.simple);
    assert_eq!(zero.stability, Stability::Stable);
    assert!(zero.residual <= 1e-10);
    assert!(zero.residual_doubled <= 1e-9);
}

#[test]
fn zero_forcing_triggers_identically_zero_gate() {
    let s = duffing_unforced();
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let bbox = SearchBox { r: (0.05, 0.8), z: vec![(-0.5, 0.5)], grid: vec![5, 5] };
    let report = find_zeros(&map, &bbox, &ZeroFinderOptions::default()).unwrap();
    assert!(report.identically_zero);
    assert!(report.zeros.is_empty());
}

#[test]
fn homogeneous_quadratic_forcing_yields_no_zeros() {
    let s = zero_hopf_quadratic();
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let bbox = SearchBox { r: (0.05, 2.0), z: vec![(-1.5, 1.5)], grid: vec![6, 6] };
    let report = find_zeros(&map, &bbox, &ZeroFinderOptions::default()).unwrap();
    assert_eq!(report.simple_zeros().count(), 0, "{:?}", report.zeros);
}

#[test]
fn zero_hopf_oracle_finds_both_golden_zeros() {
    let s = zero_hopf_oracle();
    let forms = s.zero_hopf_forms().unwrap();
    let predicted = forms.predicted_zeros().unwrap();
    assert_eq!(predicted.len(), 2);

    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let bbox = SearchBox { r: (0.1, 2.5), z: vec![(-1.0, 1.0)], grid: vec![8, 8] };
    let report = find_zeros(&map, &bbox, &ZeroFinderOptions::default()).unwrap();
    assert_eq!(report.zeros.len(), 2, "{:?}", report.zeros);
    for (zero, &(r_pred, w_pred)) in report.zeros.iter().zip(predicted.iter()) {
        let (r, w) = forms.to_rw(zero.point[0], zero.point[1]);
        assert!((r - r_pred).abs() <= 1e-6, "r {r} vs {r_pred}");
        assert!((w - w_pred).abs() <= 1e-6, "w {w} vs {w_pred}");
        assert!(zero.simple);
    }
    // golden-ratio radii
    assert!((report.zeros[0].point[0] - 0.618033988749895).abs() <= 1e-6);
    assert!((report.zeros[1].point[0] - 1.618033988749895).abs() <= 1e-6);
}

#[test]
fn discriminant_flip_removes_all_zeros() {
    let s = zero_hopf_no_zeros();
    assert!(s.zero_hopf_forms().unwrap().predicted_zeros().unwrap().is_empty());
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let bbox = SearchBox { r: (0.1, 2.5), z: vec![(-1.0, 1.0)], grid: vec![6, 6] };
    let report = find_zeros(&map, &bbox, &ZeroFinderOptions::default()).unwrap();
    assert_eq!(report.simple_zeros().count(), 0);
}

#[test]
fn degenerate_harmonic_second_order_has_no_admissible_zero() {
    let s = harmonic_degenerate();
    let cfg = QuadratureConfig { nodes: 32, ..Default::default() };
    let map = s.averaged(cfg, AveragingOrder::Second).unwrap();
    let bbox = SearchBox { r: (0.05, 3.0), z: vec![(-0.9, 3.0)], grid: vec![5, 5] };
    let opts = ZeroFinderOptions { max_iterations: 25, ..Default::default() };
    let report = find_zeros(&map, &bbox, &opts).unwrap();
    assert_eq!(report.simple_zeros().count(), 0, "{:?}", report.zeros);
}

// Closed-form eigenvalue real parts for sizes 1..3 (test-side oracle).
fn eigen_real_parts(m: &[f64], n: usize) -> Vec<f64> {
    match n {
        1 => vec![m[0]],
        2 => {
            let tr = m[0] + m[3];
            let det = m[0] * m[3] - m[1] * m[2];
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                vec![(tr + s) / 2.0, (tr - s) / 2.0]
            } else {
                vec![tr / 2.0, tr / 2.0]
            }
        }
        3 => {
            // real parts of the roots of the cubic characteristic polynomial
            let c = poisson_averaging::linalg::char_poly(m, 3);
            cubic_real_parts(c[1], c[2], c[3])
        }
        _ => unreachable!(),
    }
}

// Roots of x^3 + p x^2 + q x + s by trigonometric/Cardano formulas.
fn cubic_real_parts(p: f64, q: f64, s: f64) -> Vec<f64> {
    let a1 = q - p * p / 3.0;
    let a0 = s - p * q / 3.0 + 2.0 * p * p * p / 27.0;
    let shift = -p / 3.0;
    let disc = -(4.0 * a1 * a1 * a1 + 27.0 * a0 * a0);
    if disc > 0.0 {
        // three distinct real roots
        let m = 2.0 * (-a1 / 3.0).sqrt();
        let arg = (3.0 * a0 / (a1 * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| shift + m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    } else {
        // one real root, one complex pair
        let half = -a0 / 2.0;
        let rad = (a0 * a0 / 4.0 + a1 * a1 * a1 / 27.0).sqrt();
        let u = (half + rad).cbrt();
        let v = (half - rad).cbrt();
        let real_root = shift + u + v;
        let pair_re = shift - (u + v) / 2.0;
        vec![real_root, pair_re, pair_re]
    }
}

#[test]
fn stability_matches_direct_eigenvalues_on_random_matrices() {
    let mut rng = SampleRng::new(0xC1A551F);
    let mut checked = 0;
    for _ in 0..1000 {
        let n = 2 + (rng.next_u64() % 2) as usize; // 2 or 3
        let m: Vec<f64> = (0..n * n).map(|_| rng.in_range(-1.0, 1.0)).collect();
        let verdict = classify_stability(&m, n);
        let re = eigen_real_parts(&m, n);
        let max_re = re.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min_abs_re = re.iter().map(|r| r.abs()).fold(f64::INFINITY, f64::min);
        match verdict {
            Stability::Stable => assert!(max_re < 0.0, "stable verdict but max Re {max_re}"),
            Stability::Unstable => assert!(max_re > 0.0, "unstable verdict but max Re {max_re}"),
            Stability::Indeterminate => {
                // only tolerated near the boundary
                assert!(min_abs_re <= 1e-6, "indeterminate far from axis: {re:?}")
            }
        }
        checked += 1;
    }
    assert_eq!(checked, 1000);
}

#[test]
fn duffing_translated_center_scan_is_flat() {
    // Both reduced components extrapolate to zero and no zeros are reported:
    // this forcing leaves every nearby orbit periodic.
    let s = duffing_x3_cubed();
    let forms = s.duffing_forms().unwrap();
    assert_eq!(forms.delta1, -6.0);
    assert_eq!(forms.delta2, 0.0);

    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let scan =
        local_small_amplitude_scan(&map, &forms.leading_powers, 0.3, &[(-0.3, 0.3)], 5).unwrap();
    assert!(scan.origin[0].abs() <= 1e-8, "ghat1(0,0) = {}", scan.origin[0]);
    assert!(scan.origin[1].abs() <= 1e-8, "ghat2(0,0) = {}", scan.origin[1]);
    assert_eq!(scan.zero_count, 0);
}

#[test]
fn duffing_mixed_scan_hits_reference_values() {
    // F = (x1^3, 0, x1^2): the cubic quantities are (-6, -2) and the reduced
    // function extrapolates to (-3/8, -1/2) at the origin; no small zeros.
    let s = duffing_mixed();
    let forms = s.duffing_forms().unwrap();
    assert_eq!(forms.delta1, -6.0);
    assert_eq!(forms.delta2, -2.0);
    let reference = forms.ghat_reference();
    assert_eq!(reference, [-0.375, -0.5]);

    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let scan =
        local_small_amplitude_scan(&map, &forms.leading_powers, 0.3, &[(-0.3, 0.3)], 5).unwrap();
    assert!(scan.origin_converged);
    assert!(
        (scan.origin[0] + 0.375).abs() <= 1e-4,
        "ghat1(0,0) = {}",
        scan.origin[0]
    );
    assert!(
        (scan.origin[1] + 0.5).abs() <= 1e-4,
        "ghat2(0,0) = {}",
        scan.origin[1]
    );
    assert_eq!(scan.zero_count, 0);
}

#[test]
fn unforced_duffing_scan_reports_nothing() {
    let s = duffing_unforced();
    let forms = s.duffing_forms().unwrap();
    assert_eq!((forms.delta1, forms.delta2), (0.0, 0.0));
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let scan =
        local_small_amplitude_scan(&map, &forms.leading_powers, 0.3, &[(-0.3, 0.3)], 3).unwrap();
    assert!(scan.origin.iter().all(|v| v.abs() <= 1e-10));
    assert_eq!(scan.zero_count, 0);
}

#[test]
fn scaled_field_keeps_labels_and_simplicity() {
    // Scaling the averaged function by a positive constant must not flip
    // stability verdicts or the simplicity test.
    let s = harmonic_oracle();
    let map = s.averaged(quad(), AveragingOrder::First).unwrap();
    let jac = map.gbar0_jacobian(&[0.5, -0.5]).unwrap();
    let simplicity = |j: &[f64]| {
        let det = poisson_averaging::linalg::determinant(j.to_vec(), 2);
        let norm = poisson_averaging::linalg::inf_norm(j, 2, 2);
        det.abs() > 1e-8 * norm * norm
    };
    for factor in [1e-4, 1.0, 137.0, 5.3e6] {
        let scaled: Vec<f64> = jac.iter().map(|v| v * factor).collect();
        assert_eq!(classify_stability(&jac, 2), classify_stability(&scaled, 2));
        assert_eq!(simplicity(&jac), simplicity(&scaled));
    }
}
