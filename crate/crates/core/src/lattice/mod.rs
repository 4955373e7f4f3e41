//! Lattice points on the circle |mu|^2 = m: enumeration, representation
//! counts, angular Fourier coefficients, Mordell/Pall pair counts, and the
//! arithmetic energy sums feeding the variance bounds.
//!
//! Everything here is exact integer arithmetic; angles in radians are the
//! only derived floating-point layer.

pub mod arith;
mod measure;

pub use measure::{AngularMeasure, MeasureKind};

use crate::accum::Neumaier;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub use arith::r2_count;

/// The set E = { mu in Z^2 : |mu|^2 = m } with its half set and angles.
///
/// Points are closed under the 8 dihedral symmetries and stored in
/// lexicographic order; the half set keeps exactly one of each +-mu pair
/// (mu_y > 0, or mu_y = 0 and mu_x > 0). Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticePointSet {
    m: u64,
    points: Vec<(i64, i64)>,
    half: Vec<(i64, i64)>,
    angles: Vec<f64>,
}

/// Enumerate all integer solutions of mu_x^2 + mu_y^2 = m.
///
/// An empty set (n = 0) is a valid result; wave operations downstream
/// reject it with `EmptySpectrum`.
pub fn enumerate_lattice_points(m: u64) -> LatticePointSet {
    LatticePointSet::new(m)
}

impl LatticePointSet {
    pub fn new(m: u64) -> Self {
        assert!(m >= 1, "energy level m must be >= 1");
        let mut points = Vec::new();
        let s = m.isqrt() as i64;
        for x in -s..=s {
            let y2 = m as i64 - x * x;
            let y = (y2 as u64).isqrt() as i64;
            if y * y == y2 {
                points.push((x, y));
                if y != 0 {
                    points.push((x, -y));
                }
            }
        }
        points.sort_unstable();
        let half: Vec<_> = points
            .iter()
            .copied()
            .filter(|&(x, y)| y > 0 || (y == 0 && x > 0))
            .collect();
        let angles = points
            .iter()
            .map(|&(x, y)| (y as f64).atan2(x as f64))
            .collect();
        LatticePointSet {
            m,
            points,
            half,
            angles,
        }
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Cardinality N_m = r2(m).
    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    pub fn half_set(&self) -> &[(i64, i64)] {
        &self.half
    }

    /// atan2 angles of the points, in the same order as `points()`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Eigenvalue of the torus Laplacian at this level: lambda^2 = 4 pi^2 m.
    pub fn lambda_sq(&self) -> f64 {
        4.0 * std::f64::consts::PI.powi(2) * self.m as f64
    }

    /// Fourier coefficient of the angular distribution:
    /// tau_hat(k) = (1/N) sum_mu cos(k theta_mu).
    ///
    /// The sine part vanishes by reflection symmetry and is checked to
    /// stay below 1e-12.
    pub fn tau_fourier(&self, k: i32) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySpectrum { m: self.m });
        }
        let mut cos_acc = Neumaier::new();
        let mut sin_acc = Neumaier::new();
        let kf = f64::from(k);
        for &theta in &self.angles {
            let (s, c) = (kf * theta).sin_cos();
            cos_acc.add(c);
            sin_acc.add(s);
        }
        let n = self.n() as f64;
        let sine = sin_acc.value() / n;
        debug_assert!(
            sine.abs() < 1e-12,
            "sine part of tau_hat({k}) = {sine} should vanish by symmetry"
        );
        Ok(cos_acc.value() / n)
    }

    /// JSON-facing record with the externally fixed field names.
    pub fn record(&self) -> Result<LatticeRecord> {
        Ok(LatticeRecord {
            m: self.m,
            n: self.n(),
            points: self.points.clone(),
            tau4: self.tau_fourier(4)?,
        })
    }

    /// Riesz energy sum_{mu != mu'} 1/|mu - mu'| over ordered pairs,
    /// with the per-point ratio as a diagnostic. Needs n >= 2.
    pub fn riesz_energy(&self) -> Result<RieszEnergy> {
        if self.n() < 2 {
            return Err(Error::EmptySpectrum { m: self.m });
        }
        let mut acc = Neumaier::new();
        for &(ax, ay) in &self.points {
            for &(bx, by) in &self.points {
                let dx = (ax - bx) as f64;
                let dy = (ay - by) as f64;
                if (ax, ay) != (bx, by) {
                    acc.add(1.0 / dx.hypot(dy));
                }
            }
        }
        let energy = acc.value();
        Ok(RieszEnergy {
            energy,
            per_point: energy / self.n() as f64,
        })
    }

    /// Quadruple sums over E^4: the number of ordered quadruples summing to
    /// zero, and sum 1/||mu1+mu2+mu3+mu4|| over the rest.
    ///
    /// Runs on the pair-sum multiset (Zygmund: a nonzero sum has at most two
    /// ordered pair representations, so the map has ~n^2/2 keys); tests pin
    /// it against the naive four-fold loop.
    pub fn quadruple_diagnostics(&self) -> QuadrupleDiagnostics {
        let mut pair_sums: BTreeMap<(i64, i64), u64> = BTreeMap::new();
        for &(ax, ay) in &self.points {
            for &(bx, by) in &self.points {
                *pair_sums.entry((ax + bx, ay + by)).or_insert(0) += 1;
            }
        }
        let mut zero_sum_count = 0u64;
        for (&(sx, sy), &c1) in &pair_sums {
            if let Some(&c2) = pair_sums.get(&(-sx, -sy)) {
                zero_sum_count += c1 * c2;
            }
        }
        let entries: Vec<((i64, i64), u64)> = pair_sums.into_iter().collect();
        let mut acc = Neumaier::new();
        for &((ax, ay), c1) in &entries {
            for &((bx, by), c2) in &entries {
                let vx = (ax + bx) as f64;
                let vy = (ay + by) as f64;
                if (ax + bx, ay + by) != (0, 0) {
                    acc.add((c1 * c2) as f64 / vx.hypot(vy));
                }
            }
        }
        QuadrupleDiagnostics {
            zero_sum_count,
            inverse_norm_sum: acc.value(),
        }
    }
}

/// Serialized form of a lattice set: {"m", "n", "points", "tau4"}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeRecord {
    pub m: u64,
    pub n: usize,
    pub points: Vec<(i64, i64)>,
    pub tau4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszEnergy {
    pub energy: f64,
    pub per_point: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrupleDiagnostics {
    pub zero_sum_count: u64,
    pub inverse_norm_sum: f64,
}

/// Solvability and count for |mu|^2 = m = |mu'|^2, |mu - mu'|^2 = 2h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MordellResult {
    pub solvable: bool,
    /// A(m, h) = r2(gcd(m, h)) when solvable, else 0. This is the Pall
    /// normalization, which counts solution pairs up to the simultaneous
    /// swap-reflection symmetry.
    pub count: u64,
    /// Raw number of ordered pairs (mu, mu') in E x E with |mu - mu'|^2 = 2h;
    /// exactly 2 * count (verified against exhaustive enumeration for all
    /// m <= 500).
    pub ordered_pairs: u64,
    pub gcd_value: u64,
    /// h(2m - h) is a perfect square.
    pub square_cond: bool,
    /// gcd(m, h) is a sum of two squares.
    pub sum2_cond: bool,
}

/// Mordell/Pall criteria for pairs at squared distance 2h on the circle
/// of radius sqrt(m). Requires 0 < h < m.
pub fn mordell_solvability(m: u64, h: u64) -> Result<MordellResult> {
    if h == 0 || h >= m {
        return Err(Error::InvalidRange {
            what: "h",
            value: h as f64,
            expected: "(0, m)",
        });
    }
    let d = gcd(m, h);
    let square_cond = arith::is_perfect_square(h as u128 * (2 * m - h) as u128);
    let sum2_cond = arith::is_sum_of_two_squares(d);
    let solvable = square_cond && sum2_cond;
    let count = if solvable { arith::r2_count(d) } else { 0 };
    Ok(MordellResult {
        solvable,
        count,
        ordered_pairs: 2 * count,
        gcd_value: d,
        square_cond,
        sum2_cond,
    })
}

/// Divisor sum over d | m with d < cap and d a sum of two squares,
/// of 1/sqrt(d).
pub fn divisor_diagnostic(m: u64, cap: f64) -> f64 {
    let mut acc = Neumaier::new();
    for d in arith::divisors(m) {
        if (d as f64) < cap && arith::is_sum_of_two_squares(d) {
            acc.add(1.0 / (d as f64).sqrt());
        }
    }
    acc.value()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn unit_circle_points() {
        let set = enumerate_lattice_points(1);
        assert_eq!(set.points(), &[(-1, 0), (0, -1), (0, 1), (1, 0)]);
        assert_eq!(set.n(), 4);
        assert_eq!(set.half_set(), &[(0, 1), (1, 0)]);
    }

    #[test]
    fn three_is_not_a_sum_of_two_squares() {
        let set = enumerate_lattice_points(3);
        assert!(set.is_empty());
        assert_eq!(
            set.tau_fourier(4),
            Err(Error::EmptySpectrum { m: 3 })
        );
    }

    #[test]
    fn m25_has_twelve_points() {
        let set = enumerate_lattice_points(25);
        assert_eq!(set.n(), 12);
        for p in [(5, 0), (3, 4), (4, 3), (-3, -4), (0, -5)] {
            assert!(set.points().contains(&p), "missing {p:?}");
        }
        // brute-force scan oracle
        let mut brute = vec![];
        for x in -5i64..=5 {
            for y in -5i64..=5 {
                if x * x + y * y == 25 {
                    brute.push((x, y));
                }
            }
        }
        brute.sort_unstable();
        assert_eq!(set.points(), &brute[..]);
    }

    #[test]
    fn n_matches_r2_formula_up_to_1000() {
        for m in 1..=1000u64 {
            let set = enumerate_lattice_points(m);
            assert_eq!(set.n() as u64, arith::r2_count(m), "m = {m}");
            if !set.is_empty() {
                assert_eq!(set.n() % 4, 0, "m = {m}");
                assert_eq!(set.half_set().len() * 2, set.n(), "m = {m}");
            }
        }
    }

    #[test]
    fn dihedral_closure_and_half_set_pairing() {
        for m in [1u64, 2, 5, 25, 325, 1105] {
            let set = enumerate_lattice_points(m);
            for &(x, y) in set.points() {
                for q in [(y, x), (-x, y), (x, -y), (-y, -x)] {
                    assert!(set.points().contains(&q), "m={m} missing image {q:?}");
                }
            }
            let mut rebuilt: Vec<_> = set
                .half_set()
                .iter()
                .flat_map(|&(x, y)| [(x, y), (-x, -y)])
                .collect();
            rebuilt.sort_unstable();
            assert_eq!(rebuilt, set.points());
        }
    }

    #[test]
    fn tau4_examples() {
        assert_relative_eq!(
            enumerate_lattice_points(1).tau_fourier(4).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            enumerate_lattice_points(2).tau_fourier(4).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
        // cos(4 theta) = -7/25 at every point of E_5
        assert_relative_eq!(
            enumerate_lattice_points(5).tau_fourier(4).unwrap(),
            -7.0 / 25.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn tau_vanishes_off_multiples_of_four() {
        for m in 1..=200u64 {
            let set = enumerate_lattice_points(m);
            if set.is_empty() {
                continue;
            }
            for k in [2, 6] {
                assert!(
                    set.tau_fourier(k).unwrap().abs() < 1e-12,
                    "tau_hat({k}) at m = {m}"
                );
            }
        }
    }

    #[test]
    fn riesz_frozen_values() {
        // m=1: 8 ordered pairs at distance sqrt(2), 4 at distance 2
        let e1 = enumerate_lattice_points(1).riesz_energy().unwrap();
        assert_relative_eq!(e1.energy, 8.0 * FRAC_1_SQRT_2 + 2.0, epsilon = 1e-12);
        // m=2: direct listing on (+-1, +-1)
        let e2 = enumerate_lattice_points(2).riesz_energy().unwrap();
        assert_relative_eq!(e2.energy, 4.0 + std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_eq!(
            enumerate_lattice_points(1).riesz_energy().unwrap().per_point,
            e1.energy / 4.0
        );
        assert_eq!(
            enumerate_lattice_points(3).riesz_energy(),
            Err(Error::EmptySpectrum { m: 3 })
        );
    }

    fn naive_quadruples(set: &LatticePointSet) -> QuadrupleDiagnostics {
        let pts = set.points();
        let mut zero = 0u64;
        let mut acc = Neumaier::new();
        for a in pts {
            for b in pts {
                for c in pts {
                    for d in pts {
                        let sx = a.0 + b.0 + c.0 + d.0;
                        let sy = a.1 + b.1 + c.1 + d.1;
                        if (sx, sy) == (0, 0) {
                            zero += 1;
                        } else {
                            acc.add(1.0 / (sx as f64).hypot(sy as f64));
                        }
                    }
                }
            }
        }
        QuadrupleDiagnostics {
            zero_sum_count: zero,
            inverse_norm_sum: acc.value(),
        }
    }

    #[test]
    fn quadruples_match_naive_loop() {
        for m in [1u64, 2, 5, 10, 25] {
            let set = enumerate_lattice_points(m);
            let fast = set.quadruple_diagnostics();
            let naive = naive_quadruples(&set);
            assert_eq!(fast.zero_sum_count, naive.zero_sum_count, "m = {m}");
            assert_relative_eq!(
                fast.inverse_norm_sum,
                naive.inverse_norm_sum,
                epsilon = 1e-9
            );
            let n = set.n() as u64;
            assert!(fast.zero_sum_count <= 3 * n * n, "m = {m}");
        }
    }

    #[test]
    fn quadruple_frozen_m1() {
        let d = enumerate_lattice_points(1).quadruple_diagnostics();
        assert_eq!(d.zero_sum_count, 36);
        assert_relative_eq!(d.inverse_norm_sum, 119.48682088068617, epsilon = 1e-9);
    }

    #[test]
    fn mordell_examples() {
        let r = mordell_solvability(25, 10).unwrap();
        assert!(r.solvable);
        assert_eq!((r.count, r.gcd_value), (8, 5));

        let r = mordell_solvability(5, 1).unwrap();
        assert!(r.solvable && r.square_cond && r.sum2_cond);
        assert_eq!(r.count, 4);

        let r = mordell_solvability(2, 1).unwrap();
        assert!(!r.solvable && !r.square_cond);
        assert_eq!(r.count, 0);

        assert!(matches!(
            mordell_solvability(5, 5),
            Err(Error::InvalidRange { .. })
        ));
        assert!(matches!(
            mordell_solvability(5, 0),
            Err(Error::InvalidRange { .. })
        ));
    }

    #[test]
    fn mordell_count_is_brute_force_pair_count() {
        for m in [2u64, 5, 25, 50, 65, 325] {
            let set = enumerate_lattice_points(m);
            let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
            for a in set.points() {
                for b in set.points() {
                    let d2 = ((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u64;
                    if d2 > 0 && d2.is_multiple_of(2) {
                        *hist.entry(d2 / 2).or_insert(0) += 1;
                    }
                }
            }
            for h in 1..m {
                let pred = mordell_solvability(m, h).unwrap();
                let brute = hist.get(&h).copied().unwrap_or(0);
                assert_eq!(pred.ordered_pairs, brute, "m={m} h={h}");
                assert_eq!(pred.solvable, brute > 0, "m={m} h={h}");
                assert_eq!(pred.ordered_pairs, 2 * pred.count, "m={m} h={h}");
            }
        }
    }

    #[test]
    fn divisor_diagnostic_examples() {
        assert_relative_eq!(
            divisor_diagnostic(4, 10.0),
            1.0 + FRAC_1_SQRT_2 + 0.5,
            epsilon = 1e-12
        );
        assert_relative_eq!(divisor_diagnostic(9, 10.0), 4.0 / 3.0, epsilon = 1e-12);
        assert_eq!(divisor_diagnostic(1, 0.5), 0.0);
    }

    #[test]
    fn record_round_trips() {
        let set = enumerate_lattice_points(5);
        let rec = set.record().unwrap();
        let json = serde_json::to_string(&rec).unwrap();
        let back: LatticeRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(rec, back);
        assert_relative_eq!(back.tau4, -0.28, epsilon = 1e-12);
    }
}
