//! System validation: Hamiltonian shape, structure matrices, sampled checks.

mod common;

use std::sync::Arc;

use approx::assert_relative_eq;
use common::*;
use poisson_averaging::field::{ConstField, ConstMatrixField};
use poisson_averaging::jet::Jet1;
use poisson_averaging::poisson::{validate_poisson, PoissonSpec};

fn jets(x: &[f64]) -> Vec<Jet1> {
    x.iter().map(|&v| Jet1::constant(v)).collect()
}

#[test]
fn plain_oscillator_hamiltonian() {
    let s = zero_hopf_oracle(); // h1 = h2 = 1
    let h = s.spec().hamiltonian_at(&jets(&[3.0, 4.0, 0.7])).unwrap();
    assert_relative_eq!(h.value, 12.5);
    let h0 = s.spec().hamiltonian_at(&jets(&[0.0, 0.0, 0.0])).unwrap();
    assert_relative_eq!(h0.value, 0.0);
}

#[test]
fn duffing_hamiltonian_value() {
    let s = duffing_unforced();
    // h1^2 = 1 + x3 x1^2 / 2 = 2 at (1, 0, 2): H = (1 * 2 + 0) / 2 = 1
    let h = s.spec().hamiltonian_at(&jets(&[1.0, 0.0, 2.0])).unwrap();
    assert_relative_eq!(h.value, 1.0, epsilon = 1e-14);
}

#[test]
fn constant_structure_matrix() {
    let s = harmonic_oracle();
    let j = s.spec().structure_matrix(&[0.3, -0.4, 0.2]).unwrap();
    assert_eq!(j[1], 1.0);
    assert_eq!(j[3], -1.0);
    assert!(j.iter().enumerate().all(|(k, &v)| k == 1 || k == 3 || v == 0.0));
}

#[test]
fn zero_hopf_structure_entries() {
    // Casimir x3 + (x1^2 + x2^2): entry (1,3) = -d(phi)/d(x2) = -2 x2.
    let s = zero_hopf_oracle();
    for x in [[0.5, 0.3, 0.1], [-0.2, 0.8, -0.4]] {
        let j = s.spec().structure_matrix(&x).unwrap();
        assert_relative_eq!(j[2], -2.0 * x[1], epsilon = 1e-14);
        assert_relative_eq!(j[5], 2.0 * x[0], epsilon = 1e-14);
        // antisymmetry
        for i in 0..3 {
            for k in 0..3 {
                assert!((j[i * 3 + k] + j[k * 3 + i]).abs() <= 1e-14);
            }
        }
    }
}

#[test]
fn all_scenarios_validate() {
    for s in [harmonic_oracle(), zero_hopf_oracle(), duffing_mixed()] {
        let report = validate_poisson(s.spec(), 50).unwrap();
        assert!(
            report.valid(),
            "{}: failures {:?}",
            s.name.as_str(),
            report.failures
        );
        assert!(report.max_jacobi <= 1e-8);
        assert!(report.max_casimir <= 1e-8);
    }
}

#[test]
fn full_rank_structure_matrix_fails_rank_check() {
    // A 4x4 symplectic-looking constant matrix has rank 4, not 2.
    let mut entries = vec![0.0; 16];
    entries[1] = 1.0;
    entries[4] = -1.0;
    entries[11] = 1.0;
    entries[14] = -1.0;
    let spec = PoissonSpec::new(
        4,
        Box::new(ConstMatrixField { size: 4, entries }),
        Box::new(ConstField { arity: 4, value: 1.0 }),
        Box::new(ConstField { arity: 4, value: 1.0 }),
        Box::new(ConstField { arity: 4, value: 1.0 }),
        vec![
            Box::new(ConstField { arity: 4, value: 0.0 }),
            Box::new(ConstField { arity: 4, value: 0.0 }),
        ],
        vec![],
    )
    .unwrap();
    let report = validate_poisson(&spec, 10).unwrap();
    assert!(!report.valid());
    let rank_failure = report
        .failures
        .iter()
        .find(|f| f.check == "rank")
        .expect("rank check must fail");
    assert_eq!(rank_failure.magnitude, 4.0);
}

#[test]
fn casimir_gradient_annihilated_by_structure_matrix() {
    let s = zero_hopf_oracle();
    let spec = s.spec();
    let mut rng = poisson_averaging::sample::SampleRng::new(0x5EED);
    for _ in 0..50 {
        let x = rng.point_in_box(spec.domain_hint());
        let seeded: Vec<Jet1> = x
            .iter()
            .enumerate()
            .map(|(i, &v)| Jet1::variable(v, i, 3))
            .collect();
        let d = spec.casimir_at(3, &seeded).unwrap();
        let grad = d.partials_f64(3);
        let j = spec.structure_matrix(&x).unwrap();
        let v = poisson_averaging::linalg::mat_vec(&j, 3, 3, &grad);
        assert!(poisson_averaging::linalg::max_abs(&v) <= 1e-8);
    }
}

#[test]
fn perturbation_constructor_rejects_linear_terms() {
    use poisson_averaging::scenario::{make_duffing, ForcingCoefficients};
    use poisson_averaging::SparsePoly;
    let linear = SparsePoly::from_terms(3, [(vec![1, 0, 0], 1.0)]).unwrap();
    let f = ForcingCoefficients::new(linear, SparsePoly::new(3), SparsePoly::new(3)).unwrap();
    assert!(make_duffing(f).is_err());
}

#[test]
fn harmonic_constructor_rejects_constant_offset_in_h() {
    use poisson_averaging::scenario::{make_harmonic_potential, ForcingCoefficients};
    use poisson_averaging::SparsePoly;
    let bad_h = SparsePoly::from_terms(2, [(vec![0, 0], 0.5)]).unwrap();
    assert!(make_harmonic_potential(bad_h, ForcingCoefficients::zero()).is_err());
}

#[test]
fn spec_arc_is_shared_between_chart_and_perturbation() {
    let s = harmonic_oracle();
    assert!(Arc::ptr_eq(s.chart().spec(), s.standard_form().perturbed().base()));
}

#[test]
fn hamiltonian_field_wrapper_matches_direct_evaluation() {
    use poisson_averaging::hamiltonian;
    use poisson_averaging::ScalarField;
    let s = duffing_unforced();
    let field = hamiltonian(s.spec());
    let point: Vec<Jet1> = [0.4, -0.3, 0.6]
        .iter()
        .enumerate()
        .map(|(i, &v)| Jet1::variable(v, i, 3))
        .collect();
    let via_field = field.eval1(&point).unwrap();
    let direct = s.spec().hamiltonian_at(&point).unwrap();
    assert_eq!(via_field.value, direct.value);
    assert_eq!(via_field.partials, direct.partials);
    let grad = s.spec().hamiltonian_gradient(&[0.4, -0.3, 0.6]).unwrap();
    assert_eq!(via_field.partials_f64(3), grad);
}
