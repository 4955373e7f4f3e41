//! Nodal intersections of arithmetic random waves on the standard 2-torus
//! against smooth reference curves.
//!
//! The crate computes every closed-form quantity of the model -- lattice
//! point sets and their angular statistics, the restricted covariance
//! kernel, Kac-Rice zero densities, the variance leading constant -- and
//! verifies them against reproducible Monte Carlo simulation of the wave
//! ensemble.
//!
//! Module map:
//! - [`lattice`]: exact arithmetic on |mu|^2 = m (enumeration, r2,
//!   Fourier coefficients, Mordell/Pall pair counts, energy sums).
//! - [`curve`]: arc-length curves on the torus with analytic derivatives
//!   and the tangent-energy functionals.
//! - [`covariance`]: the restricted kernel jet (r, r1, r2, r12) and the
//!   conditioned factors.
//! - [`kacrice`]: closed-form predictions (expected count, two-point
//!   function, variance integral, leading constant, scaling probe).
//! - [`montecarlo`]: wave sampling, zero counting, experiment aggregation.

pub mod accum;
pub mod covariance;
pub mod curve;
pub mod error;
pub mod kacrice;
pub mod lattice;
pub mod montecarlo;
pub mod quad;
pub mod vec2;

pub use covariance::{
    alpha, conditioned_factors, covariance_jet, diagonal_moments, ConditionedFactors,
    CovarianceJet, DiagonalMoments,
};
pub use curve::{make_circle_arc, CircleArcSpec, CurveKind, TorusCurve};
pub use error::{Error, Result};
pub use kacrice::{
    b_constant, c_tau_gamma, detsigma_scaling_probe, expected_count, g_func, k2_expansion,
    second_moments, two_point_k2, variance_prediction, zero_density_k1, PredictionReport,
    ProbeReport, SecondMoments,
};
pub use lattice::{
    divisor_diagnostic, enumerate_lattice_points, mordell_solvability, r2_count, AngularMeasure,
    LatticePointSet, LatticeRecord, MeasureKind, MordellResult,
};
pub use montecarlo::{
    count_zeros, eval_field, run_experiment, sample_wave, SimulationReport, WaveSample, ZeroCount,
};
pub use vec2::Vec2;
