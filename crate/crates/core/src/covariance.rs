//! The restricted covariance kernel r(t1, t2) = r_F(gamma(t1) - gamma(t2))
//! of an arithmetic random wave along a curve, with its first and mixed
//! derivatives, the conditioned factors (m_factor, rho, det Sigma), and the
//! exact diagonal directional moments.
//!
//! Derivatives are analytic term-by-term sums over the lattice half set
//! (finite differences appear only as test oracles). Each summand is
//! evaluated from one sin_cos of the half phase pi<mu, Delta>, which also
//! yields 1 -+ r as sums of nonnegative terms: the near-diagonal
//! cancellations in everything downstream then stay relative-accurate.

use crate::accum::Neumaier;
use crate::curve::TorusCurve;
use crate::error::{Error, Result};
use crate::lattice::LatticePointSet;
use std::f64::consts::PI;

/// Conditional derivative variance alpha = 2 pi^2 m, the (f', f') entry of
/// the diagonal covariance matrix.
pub fn alpha(m: u64) -> f64 {
    2.0 * PI * PI * m as f64
}

/// Values of the restricted covariance kernel at a parameter pair:
/// r, r1 = dr/dt1, r2 = dr/dt2, r12 = d2r/dt1 dt2.
///
/// `one_minus_r` / `one_plus_r` carry 1 -+ r to full relative accuracy,
/// which `r` itself cannot near the diagonal; consumers that subtract
/// near-equal quantities read those instead of recomputing 1 - r^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceJet {
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r12: f64,
    pub one_minus_r: f64,
    pub one_plus_r: f64,
}

impl CovarianceJet {
    /// Assemble a jet from raw components, deriving the complements from r.
    /// Loses relative accuracy of 1 - r near |r| = 1; fine away from the
    /// diagonal and for tests.
    pub fn from_values(r: f64, r1: f64, r2: f64, r12: f64) -> Self {
        CovarianceJet {
            r,
            r1,
            r2,
            r12,
            one_minus_r: 1.0 - r,
            one_plus_r: 1.0 + r,
        }
    }

    /// 1 - r^2 as a product of the accurately tracked complements.
    pub fn one_minus_r_sq(&self) -> f64 {
        self.one_minus_r * self.one_plus_r
    }
}

/// Evaluate the covariance jet at (t1, t2) on the curve.
pub fn covariance_jet(
    set: &LatticePointSet,
    curve: &TorusCurve,
    t1: f64,
    t2: f64,
) -> Result<CovarianceJet> {
    if set.is_empty() {
        return Err(Error::EmptySpectrum { m: set.m() });
    }
    let l = curve.length();
    for (what, t) in [("t1", t1), ("t2", t2)] {
        if !((-1e-9 * l..=l * (1.0 + 1e-9)).contains(&t)) {
            return Err(Error::InvalidRange {
                what,
                value: t,
                expected: "[0, L]",
            });
        }
    }
    let delta = curve.position(t1) - curve.position(t2);
    let v1 = curve.velocity(t1);
    let v2 = curve.velocity(t2);
    let n = set.n() as f64;

    let mut omr = Neumaier::new();
    let mut opr = Neumaier::new();
    let mut sr1 = Neumaier::new();
    let mut sr2 = Neumaier::new();
    let mut sr12 = Neumaier::new();
    for &(x, y) in set.half_set() {
        let (xf, yf) = (x as f64, y as f64);
        let half_phase = PI * (xf * delta.x + yf * delta.y);
        let (s, c) = half_phase.sin_cos();
        let mv1 = xf * v1.x + yf * v1.y;
        let mv2 = xf * v2.x + yf * v2.y;
        let sc = s * c;
        omr.add(s * s);
        opr.add(c * c);
        sr1.add(sc * mv1);
        sr2.add(sc * mv2);
        sr12.add((c * c - s * s) * mv1 * mv2);
    }
    let one_minus_r = 4.0 * omr.value() / n;
    let one_plus_r = 4.0 * opr.value() / n;
    Ok(CovarianceJet {
        r: 0.5 * (one_plus_r - one_minus_r),
        r1: -8.0 * PI * sr1.value() / n,
        r2: 8.0 * PI * sr2.value() / n,
        r12: 8.0 * PI * PI * sr12.value() / n,
        one_minus_r,
        one_plus_r,
    })
}

/// Scale and correlation of the curve derivatives of the wave conditioned
/// on vanishing at both points, plus det Sigma of the full 4x4 covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedFactors {
    /// The conditioned scale sqrt(alpha(1-r^2)-r1^2) * sqrt(alpha(1-r^2)-r2^2).
    pub m_factor: f64,
    /// Correlation of the conditioned derivatives, in [-1, 1].
    pub rho: f64,
    /// det Sigma = m_factor^2 (1 - rho^2) / (1 - r^2), nonnegative.
    pub det_sigma: f64,
}

/// m_factor^2 (1 - rho^2) evaluated without passing through rho:
/// (alpha(1-r^2) - r1^2)(alpha(1-r^2) - r2^2) - (r12(1-r^2) + r r1 r2)^2.
///
/// This difference collapses ten orders of magnitude near the diagonal;
/// forming it directly from the jet keeps the scaling probe honest.
pub fn conditioned_det_numerator(jet: &CovarianceJet, alpha: f64) -> Result<f64> {
    let (f1, f2, bracket) = conditioned_pieces(jet, alpha)?;
    Ok(f1 * f2 - bracket * bracket)
}

fn conditioned_pieces(jet: &CovarianceJet, alpha: f64) -> Result<(f64, f64, f64)> {
    if jet.one_minus_r <= 0.0 || jet.one_plus_r <= 0.0 {
        return Err(Error::DegenerateJet { r_abs: jet.r.abs() });
    }
    let om2 = jet.one_minus_r_sq();
    let scale = alpha * om2;
    // nonnegative for any valid Gaussian jet; shave rounding noise only
    debug_assert!(
        scale - jet.r1 * jet.r1 > -1e-6 * scale.max(1.0)
            && scale - jet.r2 * jet.r2 > -1e-6 * scale.max(1.0),
        "conditioned radicand significantly negative: not a valid jet"
    );
    let f1 = (scale - jet.r1 * jet.r1).max(0.0);
    let f2 = (scale - jet.r2 * jet.r2).max(0.0);
    let bracket = jet.r12 * om2 + jet.r * jet.r1 * jet.r2;
    Ok((f1, f2, bracket))
}

pub fn conditioned_factors(jet: &CovarianceJet, alpha: f64) -> Result<ConditionedFactors> {
    let (f1, f2, bracket) = conditioned_pieces(jet, alpha)?;
    let m_factor = (f1 * f2).sqrt();
    let rho = if m_factor > 0.0 {
        (bracket / m_factor).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let det_sigma = ((f1 * f2 - bracket * bracket) / jet.one_minus_r_sq()).max(0.0);
    Ok(ConditionedFactors {
        m_factor,
        rho,
        det_sigma,
    })
}

/// Exact diagonal moments of the lattice directions against the tangent:
/// s_k(t) = (1/N) sum_mu <mu, velocity(t)>^k for k = 2, 4, 6, together with
/// alpha and A(t) = tau_hat(4) cos(4 phi(t)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalMoments {
    pub alpha: f64,
    /// Equals m/2 exactly, for any unit tangent.
    pub s2: f64,
    /// Equals m^2 (3/8 + tau_hat(4) cos(4 phi) / 8).
    pub s4: f64,
    /// Equals m^3 (5/16 + 3 tau_hat(4) cos(4 phi) / 16).
    pub s6: f64,
    pub a_of_t: f64,
}

pub fn diagonal_moments(
    set: &LatticePointSet,
    curve: &TorusCurve,
    t: f64,
) -> Result<DiagonalMoments> {
    if set.is_empty() {
        return Err(Error::EmptySpectrum { m: set.m() });
    }
    let v = curve.velocity(t);
    let n = set.n() as f64;
    let mut s2 = Neumaier::new();
    let mut s4 = Neumaier::new();
    let mut s6 = Neumaier::new();
    for &(x, y) in set.half_set() {
        let mv = x as f64 * v.x + y as f64 * v.y;
        let q = mv * mv;
        s2.add(q);
        s4.add(q * q);
        s6.add(q * q * q);
    }
    let tau4 = set.tau_fourier(4)?;
    Ok(DiagonalMoments {
        alpha: alpha(set.m()),
        s2: 2.0 * s2.value() / n,
        s4: 2.0 * s4.value() / n,
        s6: 2.0 * s6.value() / n,
        a_of_t: tau4 * (4.0 * curve.tangent_angle(t)).cos(),
    })
}
