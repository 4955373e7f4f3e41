//! The `verify` subcommand: exact identities, brute-force cross-checks,
//! expansion residuals, and dual-route agreement, with one line per check.

use nodal_core::accum::Neumaier;
use nodal_core::*;

struct Suite {
    failures: u32,
}

impl Suite {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if pass {
            println!("ok      {name}");
        } else {
            println!("FAIL    {name}: {detail}");
            self.failures += 1;
        }
    }
}

struct XorShift(u64);

impl XorShift {
    fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn arc(radius: f64, arc_angle: f64) -> TorusCurve {
    TorusCurve::circle_arc(CircleArcSpec {
        center: Vec2::new(0.5, 0.5),
        radius,
        arc_angle,
        phase: 0.0,
    })
    .unwrap()
}

/// Run every check; returns the number of failures.
pub fn run_suite(m_max: u64, seed: u64) -> u32 {
    let mut suite = Suite { failures: 0 };
    let mut rng = XorShift(seed.max(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));

    // lattice structure and r2 formula
    let mut structural = true;
    let mut detail = String::new();
    for m in 1..=m_max {
        let set = enumerate_lattice_points(m);
        if set.n() as u64 != r2_count(m) {
            structural = false;
            detail = format!("n != r2 at m={m}");
            break;
        }
        if set.is_empty() {
            continue;
        }
        if !set.n().is_multiple_of(4) || set.half_set().len() * 2 != set.n() {
            structural = false;
            detail = format!("half-set pairing broken at m={m}");
            break;
        }
        for &(x, y) in set.points() {
            if x * x + y * y != m as i64
                || !set.points().contains(&(-x, -y))
                || !set.points().contains(&(y, x))
            {
                structural = false;
                detail = format!("symmetry closure broken at m={m}");
                break;
            }
        }
    }
    suite.check("lattice enumeration and r2 formula", structural, detail);

    // angular Fourier coefficients
    let mut tau_ok = true;
    let mut detail = String::new();
    for m in 1..=m_max {
        let set = enumerate_lattice_points(m);
        if set.is_empty() {
            continue;
        }
        let t2 = set.tau_fourier(2).unwrap();
        let t6 = set.tau_fourier(6).unwrap();
        let t4 = set.tau_fourier(4).unwrap();
        if t2.abs() > 1e-12 || t6.abs() > 1e-12 || t4.abs() > 1.0 + 1e-12 {
            tau_ok = false;
            detail = format!("tau structure broken at m={m}: t2={t2:e} t6={t6:e} t4={t4}");
            break;
        }
    }
    suite.check("tau_hat(2) = tau_hat(6) = 0, |tau_hat(4)| <= 1", tau_ok, detail);

    // exact moment identities on random arcs
    let mut moments_ok = true;
    let mut detail = String::new();
    'outer: for m in 1..=m_max {
        let set = enumerate_lattice_points(m);
        if set.is_empty() {
            continue;
        }
        let tau4 = set.tau_fourier(4).unwrap();
        let mf = m as f64;
        for _ in 0..5 {
            let curve = arc(0.05 + 0.4 * rng.next_f64(), 0.2 + 6.0 * rng.next_f64());
            let t = curve.length() * rng.next_f64();
            let mom = diagonal_moments(&set, &curve, t).unwrap();
            let a4 = tau4 * (4.0 * curve.tangent_angle(t)).cos();
            let rel = |got: f64, want: f64| ((got - want) / want).abs();
            let worst = rel(mom.s2, mf / 2.0)
                .max(rel(mom.s4, mf * mf * (3.0 / 8.0 + a4 / 8.0)))
                .max(rel(mom.s6, mf.powi(3) * (5.0 / 16.0 + 3.0 * a4 / 16.0)));
            if worst > 1e-9 {
                moments_ok = false;
                detail = format!("moment identity off by {worst:e} at m={m}");
                break 'outer;
            }
        }
    }
    suite.check("directional moment identities (s2, s4, s6)", moments_ok, detail);

    // Mordell/Pall against brute force
    let mordell_cap = m_max.min(500);
    let mut mordell_ok = true;
    let mut detail = String::new();
    'mordell: for m in 2..=mordell_cap {
        let set = enumerate_lattice_points(m);
        let mut hist = std::collections::HashMap::new();
        for a in set.points() {
            for b in set.points() {
                let d2 = ((a.0 - b.0).pow(2) + (a.1 - b.1).pow(2)) as u64;
                if d2 > 0 {
                    *hist.entry(d2 / 2).or_insert(0u64) += 1;
                }
            }
        }
        for h in 1..m {
            let pred = mordell_solvability(m, h).unwrap();
            let brute = hist.get(&h).copied().unwrap_or(0);
            if pred.ordered_pairs != brute || pred.solvable != (brute > 0) {
                mordell_ok = false;
                detail = format!(
                    "m={m} h={h}: predicted {} ordered pairs, brute force {brute}",
                    pred.ordered_pairs
                );
                break 'mordell;
            }
        }
    }
    suite.check("Mordell/Pall pair counts (brute force)", mordell_ok, detail);

    // Riesz energy and quadruple sums against naive loops
    let mut energy_ok = true;
    let mut detail = String::new();
    for m in [1u64, 2, 5, 10, 25, 50].iter().filter(|&&m| m <= m_max) {
        let set = enumerate_lattice_points(*m);
        if set.n() < 2 {
            continue;
        }
        let fast = set.riesz_energy().unwrap();
        let mut naive = Neumaier::new();
        for a in set.points() {
            for b in set.points() {
                if a != b {
                    naive.add(1.0 / ((a.0 - b.0) as f64).hypot((a.1 - b.1) as f64));
                }
            }
        }
        let quad_fast = set.quadruple_diagnostics();
        let mut zero = 0u64;
        let mut inv = Neumaier::new();
        for a in set.points() {
            for b in set.points() {
                for c in set.points() {
                    for d in set.points() {
                        let sx = a.0 + b.0 + c.0 + d.0;
                        let sy = a.1 + b.1 + c.1 + d.1;
                        if (sx, sy) == (0, 0) {
                            zero += 1;
                        } else {
                            inv.add(1.0 / (sx as f64).hypot(sy as f64));
                        }
                    }
                }
            }
        }
        let n = set.n() as u64;
        if (fast.energy - naive.value()).abs() > 1e-9
            || quad_fast.zero_sum_count != zero
            || (quad_fast.inverse_norm_sum - inv.value()).abs() > 1e-9
            || zero > 3 * n * n
        {
            energy_ok = false;
            detail = format!("energy-sum mismatch at m={m}");
            break;
        }
    }
    suite.check("Riesz / quadruple sums (naive loops)", energy_ok, detail);

    // covariance jet vs finite differences
    let set = enumerate_lattice_points(325);
    let curve = arc(0.2, 1.0);
    let h = 1e-6 * curve.length();
    let (t1, t2) = (0.0731, 0.1542);
    let jet = covariance_jet(&set, &curve, t1, t2).unwrap();
    let r = |a: f64, b: f64| covariance_jet(&set, &curve, a, b).unwrap().r;
    let r1_fd = (r(t1 + h, t2) - r(t1 - h, t2)) / (2.0 * h);
    let fd_ok = ((jet.r1 - r1_fd) / alpha(325).sqrt()).abs() < 1e-5;
    suite.check(
        "covariance jet derivative vs finite differences",
        fd_ok,
        format!("r1 analytic {} vs fd {r1_fd}", jet.r1),
    );

    // K2 expansion residuals
    let a = alpha(325);
    let mut worst: f64 = 0.0;
    let mut kept = 0;
    while kept < 10_000 {
        let p1 = curve.length() * rng.next_f64();
        let p2 = curve.length() * rng.next_f64();
        let jet = covariance_jet(&set, &curve, p1, p2).unwrap();
        if jet.r.abs() >= 0.5 {
            continue;
        }
        kept += 1;
        let k2 = two_point_k2(&jet, a).unwrap();
        let exp = k2_expansion(&jet, a).unwrap();
        if exp.quartic > 0.0 {
            worst = worst.max((k2 - 650.0 - exp.main).abs() / (a * exp.quartic));
        }
    }
    suite.check(
        "K2 quadratic expansion residual (< 10 x quartic budget)",
        worst.is_finite() && worst < 10.0,
        format!("max normalized residual {worst}"),
    );

    // b_constant dual route (the energy/quadrature assert runs inside) and
    // leading-constant bounds
    let mut b_ok = true;
    let mut detail = String::new();
    for (m, radius, angle) in [(25u64, 0.2, 1.0), (65, 0.3, 2.5), (325, 0.45, 5.0)] {
        let set = enumerate_lattice_points(m);
        let curve = arc(radius, angle);
        let b = b_constant(&set, &curve).unwrap();
        let l2 = curve.length().powi(2);
        if !(l2 / 4.0 - 1e-9..=l2 / 2.0 + 1e-9).contains(&b) {
            b_ok = false;
            detail = format!("B out of [L^2/4, L^2/2] at m={m}: {b}");
        }
    }
    suite.check("B_C(E) dual-route agreement and bounds", b_ok, detail);

    // angular measures: canonical tau4 values, invariance enforcement
    let measures_ok = (AngularMeasure::cilleruelo().tau_fourier(4) - 1.0).abs() < 1e-12
        && (AngularMeasure::tilted_cilleruelo().tau_fourier(4) + 1.0).abs() < 1e-12
        && AngularMeasure::uniform().tau_fourier(4).abs() < 1e-12
        && AngularMeasure::custom(vec![(0.3, 1.0)]).is_err();
    suite.check(
        "angular measures (tau4 values, invariance rejection)",
        measures_ok,
        String::new(),
    );

    // scaling probe at a moderate level: exponent near 10, P > 0
    let sqrt_m = 325.0f64.sqrt();
    let zs: Vec<f64> = (0..8)
        .map(|k| 1e-3 / sqrt_m * 10.0f64.powf(k as f64 / 7.0))
        .collect();
    let probe = detsigma_scaling_probe(&set, &curve, 0.074, &zs).unwrap();
    suite.check(
        "det Sigma scaling probe (z^10 law)",
        probe.all_positive && (probe.exponent_fit - 10.0).abs() < 0.5,
        format!("slope {}", probe.exponent_fit),
    );

    suite.failures
}
