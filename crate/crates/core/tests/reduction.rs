//! Chart construction, inversion, transport, and the standard form.

mod common;

use std::sync::Arc;

use approx::assert_relative_eq;
use common::*;
use poisson_averaging::chart::DarbouxChart;
use poisson_averaging::field::{darboux_matrix, ConstField, VectorExpr};
use poisson_averaging::jet::{Jet1, Scalar};
use poisson_averaging::poisson::{PerturbedSpec, PoissonSpec};
use poisson_averaging::sample::SampleRng;
use poisson_averaging::standard_form::StandardForm;
use poisson_averaging::{linalg, IntegratorConfig};

/// Trivial chart: unit h fields, no Casimir offsets, unit first integral.
fn identity_spec() -> Arc<PoissonSpec> {
    Arc::new(
        PoissonSpec::new(
            3,
            Box::new(darboux_matrix(3)),
            Box::new(ConstField { arity: 3, value: 1.0 }),
            Box::new(ConstField { arity: 3, value: 1.0 }),
            Box::new(ConstField { arity: 3, value: 1.0 }),
            vec![Box::new(ConstField { arity: 3, value: 0.0 })],
            vec![],
        )
        .unwrap(),
    )
}

#[test]
fn harmonic_forward_example() {
    let s = harmonic_oracle();
    let y = s.chart().forward_values(&[1.0, 2.0, 1.0]).unwrap();
    assert_relative_eq!(y[0], 1.0);
    assert_relative_eq!(y[1], 4.0);
    assert_relative_eq!(y[2], 1.0);
}

#[test]
fn zero_hopf_forward_example_and_unit_eta() {
    let s = zero_hopf_oracle();
    let y = s.chart().forward_values(&[1.0, 1.0, 0.0]).unwrap();
    assert_relative_eq!(y[0], 1.0);
    assert_relative_eq!(y[1], 1.0);
    assert_relative_eq!(y[2], 2.0);
    for point in [[0.3, -0.2, 0.5], [1.0, 0.0, -0.4]] {
        assert_relative_eq!(s.chart().eta(&point).unwrap(), 1.0, epsilon = 1e-14);
    }
}

#[test]
fn duffing_forward_example() {
    let s = duffing_unforced();
    let y = s.chart().forward_values(&[1.0, 0.0, 2.0]).unwrap();
    assert_relative_eq!(y[0], 2.0f64.sqrt(), epsilon = 1e-15);
    assert_relative_eq!(y[1], 0.0);
    assert_relative_eq!(y[2], 2.0);
}

#[test]
fn duffing_eta_matches_display() {
    // eta(y) = sqrt(2 + 4 y1^2 y3) / sqrt(1 + sqrt(1 + 2 y1^2 y3))
    let s = duffing_unforced();
    for y in [[0.4, 0.1, 0.3], [0.8, -0.2, 0.6], [0.5, 0.0, -0.3]] {
        let expected =
            (2.0 + 4.0 * y[0] * y[0] * y[2]).sqrt() / (1.0 + (1.0 + 2.0 * y[0] * y[0] * y[2]).sqrt()).sqrt();
        assert_relative_eq!(s.chart().eta(&y).unwrap(), expected, epsilon = 1e-12);
    }
}

#[test]
fn closed_form_inversions() {
    let duffing = duffing_unforced();
    let x = duffing.chart().invert(&[2.0f64.sqrt(), 0.0, 2.0], None).unwrap();
    assert_relative_eq!(x[0], 1.0, epsilon = 1e-12);
    assert_relative_eq!(x[1], 0.0);
    assert_relative_eq!(x[2], 2.0);

    let harmonic = harmonic_oracle();
    let x = harmonic.chart().invert(&[1.0, 4.0, 1.0], None).unwrap();
    assert_relative_eq!(x[0], 1.0);
    assert_relative_eq!(x[1], 2.0, epsilon = 1e-12);
    assert_relative_eq!(x[2], 1.0);
}

#[test]
fn origin_maps_to_origin() {
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_unforced()] {
        let x = s.chart().invert(&[0.0, 0.0, 0.0], None).unwrap();
        assert!(linalg::max_abs(&x) <= 1e-12);
    }
}

#[test]
fn newton_agrees_with_closed_form_inverse() {
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_unforced()] {
        let bare = DarbouxChart::new(Arc::clone(s.spec()));
        let mut rng = SampleRng::new(7);
        for _ in 0..25 {
            let x = rng.point_in_box(&[(-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)]);
            let y = s.chart().forward_values(&x).unwrap();
            let closed = s.chart().invert(&y, None).unwrap();
            let newton = bare.invert_newton(&y, None).unwrap();
            for (a, b) in closed.iter().zip(newton.iter()) {
                assert!((a - b).abs() <= 1e-10, "closed {a} vs newton {b}");
            }
        }
    }
}

#[test]
fn round_trip_within_tolerance() {
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_unforced()] {
        let mut rng = SampleRng::new(0x5EED);
        for _ in 0..100 {
            let x = rng.point_in_box(s.spec().domain_hint());
            let y = s.chart().forward_values(&x).unwrap();
            let back = s.chart().invert(&y, None).unwrap();
            let err = x
                .iter()
                .zip(back.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-10, "round trip error {err} at {x:?}");
        }
    }
}

#[test]
fn chart_linearization_at_origin_is_identity() {
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_unforced()] {
        let dphi = s.chart().jacobian_values(&[0.0; 3]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dphi[i * 3 + j] - expected).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn identity_chart_inverse_jets_are_identity() {
    let spec = identity_spec();
    let chart = DarbouxChart::new(spec);
    let y: Vec<Jet1> = (0..3).map(|i| Jet1::variable(0.3 * i as f64, i, 3)).collect();
    let x = chart.inverse_jet(&y).unwrap();
    for (i, jet) in x.iter().enumerate() {
        for j in 0..3 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert_relative_eq!(jet.partial_value(j), expected, epsilon = 1e-12);
        }
    }
}

#[test]
fn inverse_jets_match_finite_differences() {
    // zero-Hopf at y = (1, 0, 1): x3 = y3 - (y1^2 + y2^2), so dx3/dy1 = -2.
    let s = zero_hopf_oracle();
    let y: Vec<Jet1> = [1.0, 0.0, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet1::variable(v, i, 3))
        .collect();
    let x = s.chart().inverse_jet(&y).unwrap();
    assert_relative_eq!(x[2].partial_value(0), -2.0, epsilon = 1e-10);

    for s in [zero_hopf_oracle(), duffing_unforced()] {
        let y0 = [2.0f64.sqrt(), 0.0, 2.0];
        let jets: Vec<Jet1> = y0
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, 3))
            .collect();
        let x = s.chart().inverse_jet(&jets).unwrap();
        let h = 1e-6;
        for k in 0..3 {
            let mut plus = y0;
            let mut minus = y0;
            plus[k] += h;
            minus[k] -= h;
            let xp = s.chart().invert(&plus, None).unwrap();
            let xm = s.chart().invert(&minus, None).unwrap();
            for i in 0..3 {
                let fd = (xp[i] - xm[i]) / (2.0 * h);
                assert!(
                    (x[i].partial_value(k) - fd).abs() <= 1e-6,
                    "d x{i} / d y{k}: jet {} vs fd {fd}",
                    x[i].partial_value(k)
                );
            }
        }
    }
}

#[test]
fn zero_forcing_transports_to_zero() {
    let s = duffing_unforced();
    let out = s
        .standard_form()
        .chart()
        .transformed_perturbation(s.standard_form().perturbed(), &[0.3, 0.1, 0.2], 0.01)
        .unwrap();
    assert!(linalg::max_abs(&out) == 0.0);
}

struct RawForcing;
impl VectorExpr for RawForcing {
    fn arity(&self) -> usize {
        4
    }
    fn dim(&self) -> usize {
        3
    }
    fn expr<S: Scalar>(&self, p: &[S]) -> Vec<S> {
        // (x2 x3, x1^2, x3^2): no constant/linear part
        vec![
            p[1].clone() * p[2].clone(),
            p[0].clone() * p[0].clone(),
            p[2].clone() * p[2].clone(),
        ]
    }
}

#[test]
fn identity_chart_transport_is_identity() {
    let spec = identity_spec();
    let chart = DarbouxChart::new(Arc::clone(&spec));
    let perturbed = PerturbedSpec::new(Arc::clone(&spec), Box::new(RawForcing), 0.01).unwrap();
    let y = [0.4, -0.3, 0.2];
    let got = chart.transformed_perturbation(&perturbed, &y, 0.05).unwrap();
    let expected = [y[1] * y[2], y[0] * y[0], y[2] * y[2]];
    for (g, e) in got.iter().zip(expected.iter()) {
        assert_relative_eq!(g, e, epsilon = 1e-12);
    }
}

#[test]
fn transport_matches_one_step_evolution() {
    // Advance x by one Euler step of the full field, map through the chart,
    // and compare with one Euler step of the transported field; the images
    // must agree to second order in the step.
    let s = duffing_x3_cubed();
    let chart = s.chart();
    let perturbed = s.standard_form().perturbed();
    let eps = 0.01;
    let h = 1e-4;
    let y0 = [0.1, 0.0, 0.5];
    let x0 = chart.invert(&y0, None).unwrap();

    let x1: Vec<f64> = x0
        .iter()
        .zip(perturbed.rhs(&x0, eps).unwrap().iter())
        .map(|(x, f)| x + h * f)
        .collect();
    let y1_via_x = chart.forward_values(&x1).unwrap();

    let i_eta = chart.eta(&y0).unwrap() * s.spec().first_integral_value(&x0).unwrap();
    let fstar = chart.transformed_perturbation(perturbed, &y0, eps).unwrap();
    let drift = [y0[1], -y0[0], 0.0];
    let y1_direct: Vec<f64> = (0..3)
        .map(|i| y0[i] + h * i_eta * (drift[i] + eps * fstar[i]))
        .collect();

    for (a, b) in y1_via_x.iter().zip(y1_direct.iter()) {
        assert!((a - b).abs() <= 20.0 * h * h, "{a} vs {b}");
    }
}

#[test]
fn transport_defining_identity_holds_on_samples() {
    let eps = 0.01;
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_mixed()] {
        let chart = s.chart();
        let perturbed = s.standard_form().perturbed();
        let mut rng = SampleRng::new(0xA11CE);
        for _ in 0..20 {
            let x = rng.point_in_box(&[(-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)]);
            let y = chart.forward_values(&x).unwrap();
            let lhs = {
                let dphi = chart.jacobian_values(&x).unwrap();
                let xdot = perturbed.rhs(&x, eps).unwrap();
                linalg::mat_vec(&dphi, 3, 3, &xdot)
            };
            let rhs = {
                let i_eta =
                    chart.eta(&y).unwrap() * s.spec().first_integral_value(&x).unwrap();
                let fstar = chart.transformed_perturbation(perturbed, &y, eps).unwrap();
                let drift = [y[1], -y[0], 0.0];
                (0..3)
                    .map(|i| i_eta * (drift[i] + eps * fstar[i]))
                    .collect::<Vec<f64>>()
            };
            for (a, b) in lhs.iter().zip(rhs.iter()) {
                assert!((a - b).abs() <= 1e-8, "identity residual {}", (a - b).abs());
            }
        }
    }
}

#[test]
fn standard_form_vanishes_at_zero_epsilon() {
    let s = harmonic_oracle();
    let sf = s.standard_form();
    let rhs = sf.rhs(1.3, &[0.8, 0.2], 0.0).unwrap();
    assert!(linalg::max_abs(&rhs) == 0.0);
}

#[test]
fn constant_forcing_gives_cosine_radial_component() {
    let spec = identity_spec();
    let chart = DarbouxChart::new(Arc::clone(&spec));
    struct ConstantForcing;
    impl VectorExpr for ConstantForcing {
        fn arity(&self) -> usize {
            4
        }
        fn dim(&self) -> usize {
            3
        }
        fn expr<S: Scalar>(&self, _p: &[S]) -> Vec<S> {
            vec![S::from_f64(0.7), S::zero(), S::zero()]
        }
    }
    let perturbed = PerturbedSpec::new_unchecked(Arc::clone(&spec), Box::new(ConstantForcing), 0.0);
    let sf = StandardForm::new(chart, perturbed).unwrap();
    let mut mean = 0.0;
    let n = 64;
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let split = sf.g_split(theta, &[1.1, 0.4]).unwrap();
        assert_relative_eq!(split.g0[0], -0.7 * theta.cos(), epsilon = 1e-12);
        mean += split.g0[0];
    }
    assert!(mean.abs() / n as f64 <= 1e-14);
}

#[test]
fn rhs_is_two_pi_periodic() {
    let s = zero_hopf_oracle();
    let sf = s.standard_form();
    let mut rng = SampleRng::new(3);
    for _ in 0..10 {
        let theta = rng.in_range(0.0, 2.0 * std::f64::consts::PI);
        let point = [rng.in_range(0.3, 1.5), rng.in_range(-0.5, 0.5)];
        let eps = 1e-3;
        let a = sf.rhs(theta, &point, eps).unwrap();
        let b = sf.rhs(theta + 2.0 * std::f64::consts::PI, &point, eps).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn unperturbed_reduced_flow_preserves_oscillator_energy() {
    // dy/dtau = (y2, -y1, 0): integrate one full period and watch H* and z.
    let f = |_t: f64, y: &[Jet1]| -> poisson_averaging::Result<Vec<Jet1>> {
        Ok(vec![y[1].clone(), -y[0].clone(), Jet1::constant(0.0)])
    };
    let y0 = vec![
        Jet1::constant(0.6),
        Jet1::constant(-0.2),
        Jet1::constant(0.35),
    ];
    let h0 = 0.5 * (0.6f64.powi(2) + 0.2f64.powi(2));
    let traj = poisson_averaging::orbit::integrate(
        f,
        0.0,
        2.0 * std::f64::consts::PI,
        y0,
        &IntegratorConfig::default(),
    )
    .unwrap();
    for state in &traj.states {
        let h = 0.5 * (state[0].value * state[0].value + state[1].value * state[1].value);
        assert!((h - h0).abs() <= 1e-9);
        assert_relative_eq!(state[2].value, 0.35);
    }
}

#[test]
fn polar_guard_fires() {
    let s = harmonic_oracle();
    let sf = s.standard_form();
    assert!(matches!(
        sf.rhs(0.0, &[1e-9, 0.0], 1e-3),
        Err(poisson_averaging::Error::PolarSingularity { .. })
    ));
}

#[test]
fn inversion_outside_chart_image_is_a_domain_error() {
    // w = 1 + y3 = 0 sends the closed-form inverse to infinity
    let s = harmonic_oracle();
    let err = s.chart().invert(&[0.5, 0.5, -1.0], None).unwrap_err();
    assert!(matches!(err, poisson_averaging::Error::DomainViolation { .. }), "{err:?}");
}
