use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The lattice point set for this energy level is empty (or too small
    /// for the requested operation).
    #[error("empty spectrum: no usable lattice points at m = {m}")]
    EmptySpectrum { m: u64 },

    /// A scalar argument fell outside its documented domain.
    #[error("invalid range for {what}: {value} not in {expected}")]
    InvalidRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A direction vector was not unit length.
    #[error("invalid direction: |v| = {norm} (must be 1 within 1e-9)")]
    InvalidDirection { norm: f64 },

    /// Circle radius must stay inside the fundamental domain.
    #[error("curve too large: radius {radius} not in (0, 1/2)")]
    CurveTooLarge { radius: f64 },

    /// A custom curve failed its arc-length/orthogonality validation.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// Covariance jet with |r| >= 1; the conditioned Gaussian is degenerate.
    #[error("degenerate jet: |r| = {r_abs} >= 1")]
    DegenerateJet { r_abs: f64 },

    /// Jet outside the domain where the two-point expansion is valid.
    #[error("expansion out of domain: |r| = {r_abs} >= {limit}")]
    ExpansionOutOfDomain { r_abs: f64, limit: f64 },

    /// Correlation coefficient outside [-1, 1] beyond tolerance.
    #[error("invalid correlation: rho = {rho}")]
    InvalidCorrelation { rho: f64 },

    /// Angular measure violates normalization or dihedral invariance.
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// Variance predictions require a curve with nowhere-zero curvature.
    #[error("zero curvature: min |kappa| = {min_kappa} (variance predictions need kappa > 0)")]
    ZeroCurvature { min_kappa: f64 },

    /// Determinant scaling probe at a point where the angular factor degenerates.
    #[error("probe degenerate: |A(t1)| = {a_abs} too close to 1")]
    ProbeDegenerate { a_abs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
