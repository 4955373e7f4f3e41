//! Symmetric atomic probability measures on the unit circle: the angular
//! distribution of a lattice set, its weak limits (uniform, Cilleruelo,
//! tilted Cilleruelo), and user-supplied atoms.

use crate::accum::Neumaier;
use crate::error::{Error, Result};
use crate::lattice::LatticePointSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

type AngleMap = fn(f64) -> f64;

const ANGLE_TOL: f64 = 1e-12;
const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    FromLattice,
    Uniform,
    Cilleruelo,
    TiltedCilleruelo,
    CustomAtomic,
}

/// Atomic angular measure, invariant under rotation by pi/2 and under the
/// reflection (x, y) -> (x, -y).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMeasure {
    atoms: Vec<(f64, f64)>, // (angle in [0, 2pi), weight)
    kind: MeasureKind,
}

impl AngularMeasure {
    /// Angular projection of a lattice set: weight 1/N at each theta_mu.
    pub fn from_lattice(set: &LatticePointSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySpectrum { m: set.m() });
        }
        let w = 1.0 / set.n() as f64;
        let atoms = set.angles().iter().map(|&a| (wrap(a), w)).collect();
        Ok(AngularMeasure {
            atoms,
            kind: MeasureKind::FromLattice,
        })
    }

    /// Eight equally spaced atoms starting at angle 0.
    ///
    /// Exactly reproduces the arc-length measure on every trigonometric
    /// polynomial of degree <= 7; the functionals evaluated against
    /// measures here have degree 4.
    pub fn uniform() -> Self {
        let atoms = (0..8).map(|k| (k as f64 * FRAC_PI_4, 0.125)).collect();
        AngularMeasure {
            atoms,
            kind: MeasureKind::Uniform,
        }
    }

    /// Atoms at the four axis directions; tau_hat(4) = +1.
    pub fn cilleruelo() -> Self {
        let atoms = (0..4).map(|k| (k as f64 * FRAC_PI_2, 0.25)).collect();
        AngularMeasure {
            atoms,
            kind: MeasureKind::Cilleruelo,
        }
    }

    /// Atoms at the four diagonal directions; tau_hat(4) = -1.
    pub fn tilted_cilleruelo() -> Self {
        let atoms = (0..4)
            .map(|k| (FRAC_PI_4 + k as f64 * FRAC_PI_2, 0.25))
            .collect();
        AngularMeasure {
            atoms,
            kind: MeasureKind::TiltedCilleruelo,
        }
    }

    /// User-supplied atoms; rejects anything that is not a dihedrally
    /// invariant probability measure.
    pub fn custom(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let m = AngularMeasure {
            atoms: atoms.into_iter().map(|(a, w)| (wrap(a), w)).collect(),
            kind: MeasureKind::CustomAtomic,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    /// Rotate every atom by pi/2 (a relabeling for invariant measures).
    pub fn rotated_quarter(&self) -> Self {
        AngularMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|&(a, w)| (wrap(a + FRAC_PI_2), w))
                .collect(),
            kind: self.kind,
        }
    }

    /// tau_hat(k) = sum_i w_i cos(k angle_i).
    pub fn tau_fourier(&self, k: i32) -> f64 {
        let mut acc = Neumaier::new();
        for &(a, w) in &self.atoms {
            acc.add(w * (f64::from(k) * a).cos());
        }
        acc.value()
    }

    /// Check nonnegativity, normalization, and dihedral invariance.
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some(&(a, w)) = self.atoms.iter().find(|&&(_, w)| w < 0.0) {
            return Err(Error::InvalidMeasure(format!(
                "negative weight {w} at angle {a}"
            )));
        }
        let total: f64 = self.atoms.iter().map(|&(_, w)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidMeasure(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let merged = self.merged();
        let symmetries: [(&str, AngleMap); 2] = [
            ("rotation by pi/2", |a| a + FRAC_PI_2),
            ("reflection (x,y)->(x,-y)", |a| -a),
        ];
        for (label, map) in symmetries {
            for &(a, w) in &merged {
                let target = wrap(map(a));
                let found = merged
                    .iter()
                    .find(|&&(b, _)| angle_close(b, target))
                    .map(|&(_, wb)| wb);
                match found {
                    Some(wb) if (wb - w).abs() <= WEIGHT_TOL => {}
                    _ => {
                        return Err(Error::InvalidMeasure(format!(
                            "not invariant under {label}: atom at {a} (weight {w}) has no image"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    /// Atoms with angles merged within tolerance, weights combined.
    fn merged(&self) -> Vec<(f64, f64)> {
        let mut sorted = self.atoms.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (a, w) in sorted {
            match out.last_mut() {
                Some(last) if angle_close(last.0, a) => last.1 += w,
                _ => out.push((a, w)),
            }
        }
        // merge across the 0 / 2pi seam
        if out.len() > 1 {
            let first = out[0];
            let last = *out.last().unwrap();
            if angle_close(first.0, last.0) {
                out[0].1 += last.1;
                out.pop();
            }
        }
        out
    }
}

fn wrap(a: f64) -> f64 {
    let mut r = a % TAU;
    if r < 0.0 {
        r += TAU;
    }
    r
}

fn angle_close(a: f64, b: f64) -> bool {
    let d = (a - b).abs() % TAU;
    d <= ANGLE_TOL || (TAU - d) <= ANGLE_TOL
}
