//! Shared fixtures: the oracle configurations used across the test suite.

#![allow(dead_code)]

use poisson_averaging::scenario::{
    harmonic_oracle_h, make_duffing, make_harmonic_potential, make_zero_hopf,
    ForcingCoefficients, Scenario,
};
use poisson_averaging::SparsePoly;

pub fn poly3(terms: &[([u32; 3], f64)]) -> SparsePoly {
    SparsePoly::from_terms(3, terms.iter().map(|(e, c)| (e.to_vec(), *c))).unwrap()
}

pub fn poly1(terms: &[(u32, f64)]) -> SparsePoly {
    SparsePoly::from_terms(1, terms.iter().map(|(e, c)| (vec![*e], *c))).unwrap()
}

pub fn forcing(
    a: &[([u32; 3], f64)],
    b: &[([u32; 3], f64)],
    c: &[([u32; 3], f64)],
) -> ForcingCoefficients {
    ForcingCoefficients::new(poly3(a), poly3(b), poly3(c)).unwrap()
}

/// Oscillator-with-potential in the closed-form configuration:
/// one stable zero at (0.5, -0.5).
pub fn harmonic_oracle() -> Scenario {
    make_harmonic_potential(
        harmonic_oracle_h(),
        forcing(
            &[([1, 0, 1], 1.0)],
            &[],
            &[([0, 2, 0], 1.0), ([0, 0, 2], -2.0)],
        ),
    )
    .unwrap()
}

/// Fully degenerate configuration: the first-order function vanishes and the
/// second-order one has a closed form with no admissible zero.
pub fn harmonic_degenerate() -> Scenario {
    make_harmonic_potential(
        harmonic_oracle_h(),
        forcing(&[([1, 0, 1], -1.0)], &[([0, 1, 1], 1.0)], &[([1, 1, 0], 1.0)]),
    )
    .unwrap()
}

/// Cubic zero-Hopf oracle: exactly two simple zeros, at golden-ratio radii.
pub fn zero_hopf_oracle() -> Scenario {
    make_zero_hopf(
        poly1(&[(1, 1.0)]),
        forcing(
            &[([1, 2, 0], 8.0), ([1, 0, 1], 2.0)],
            &[],
            &[([0, 2, 0], 2.0), ([0, 2, 1], 6.0), ([0, 0, 3], -1.0)],
        ),
    )
    .unwrap()
}

/// Same oracle with the reduced quadratic pushed to negative discriminant:
/// no zeros at all.
pub fn zero_hopf_no_zeros() -> Scenario {
    make_zero_hopf(
        poly1(&[(1, 1.0)]),
        forcing(
            &[([1, 2, 0], 8.0), ([1, 0, 1], 2.0)],
            &[],
            &[([0, 2, 0], 2.0), ([0, 2, 1], 2.0), ([0, 0, 3], -1.0)],
        ),
    )
    .unwrap()
}

/// All three parity conditions hold: the first-order function vanishes
/// identically.
pub fn zero_hopf_parity() -> Scenario {
    make_zero_hopf(poly1(&[(1, 1.0)]), forcing(&[([0, 1, 1], 1.0)], &[], &[])).unwrap()
}

/// Homogeneous quadratic perturbation of the zero-Hopf form.
pub fn zero_hopf_quadratic() -> Scenario {
    make_zero_hopf(poly1(&[(1, 1.0)]), forcing(&[([2, 0, 0], 1.0)], &[], &[])).unwrap()
}

/// Duffing with a pure stiffness-cubed forcing of the first component. This
/// perturbation is a translated center: every nearby orbit stays periodic,
/// so both averaged functions vanish identically.
pub fn duffing_x3_cubed() -> Scenario {
    make_duffing(forcing(&[([0, 0, 3], 1.0)], &[], &[])).unwrap()
}

/// Duffing positive control: nonzero cubic quantities (-6 and -2), reduced
/// averaged values (-3/8, -1/2) at the origin.
pub fn duffing_mixed() -> Scenario {
    make_duffing(forcing(&[([3, 0, 0], 1.0)], &[], &[([2, 0, 0], 1.0)])).unwrap()
}

pub fn duffing_unforced() -> Scenario {
    make_duffing(ForcingCoefficients::zero()).unwrap()
}
