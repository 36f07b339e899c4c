//! Periodic-orbit analysis of analytically perturbed rank-2 Poisson systems.
//!
//! The pipeline: a constructive chart brings the unperturbed system to the
//! canonical rank-2 form (a harmonic oscillator on each symplectic leaf, up
//! to a time rescaling); the perturbed system then reduces, in corotating
//! polar coordinates, to a periodic system whose right-hand side is of the
//! order of the perturbation. Averaging that system over the angle yields
//! bifurcation functions whose simple zeros predict periodic orbits, which
//! are located by multistart Newton, classified by a Routh table, and
//! certified independently by Poincare shooting on the full equations.
//!
//! The crate is `no_std`-compatible (with `alloc`); IO, file formats and the
//! command-line front end live in the companion `poisson-averaging-cli`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod average;
pub mod chart;
pub mod error;
pub mod field;
pub mod jet;
pub mod linalg;
pub mod orbit;
pub mod poisson;
pub mod poly;
pub mod sample;
pub mod scenario;
pub mod standard_form;
pub mod zeros;

pub use average::{AveragedMap, AveragingOrder, FourierAntiderivative, QuadratureConfig};
pub use chart::DarbouxChart;
pub use error::{Error, Result};
pub use field::{jet_eval, FieldExpr, MatrixField, ScalarField, VectorField};
pub use jet::{Jet, Jet1, Jet2, Scalar};
pub use orbit::{
    continuation_in_epsilon, integrate_standard_form, map_orbit_back, poincare_shoot,
    ContinuationTable, IntegratorConfig, OrbitCertificate, ShootConfig, ShootOutcome,
};
pub use poisson::{
    hamiltonian, validate_poisson, PerturbedSpec, PoissonSpec, ValidationReport,
};
pub use poly::{poly_eval, SparsePoly};
pub use scenario::{
    cross_check, harmonic_oracle_h, make_duffing, make_harmonic_potential, make_zero_hopf,
    CrossCheckReport, ForcingCoefficients, Scenario, ScenarioName,
};
pub use standard_form::StandardForm;
pub use zeros::{
    classify_stability, find_zeros, local_small_amplitude_scan, LocalScanReport, SearchBox,
    Stability, ZeroFinderOptions, ZeroReport,
};
