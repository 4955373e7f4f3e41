//! Monte Carlo verification: sample arithmetic random waves, restrict them
//! to a curve, count zeros by sign-change scanning plus bisection, and
//! aggregate count statistics against the closed-form predictions.
//!
//! Determinism contract: coefficients come from counter-based streams keyed
//! by (master_seed, trial, point index); per-trial counts are aggregated in
//! exact integer arithmetic, so a report is bit-identical for any thread
//! count and any trial scheduling.

mod rng;

pub use rng::{normal_inv_cdf, CoefficientStream, STREAM_ALGORITHM};

use crate::curve::TorusCurve;
use crate::error::{Error, Result};
use crate::kacrice;
use crate::lattice::LatticePointSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// A sampled wave: one (b, c) coefficient pair per half-set point.
#[derive(Debug, Clone)]
pub struct WaveSample {
    set: Arc<LatticePointSet>,
    pub master_seed: u64,
    pub trial_index: u64,
    coefficients: Vec<(f64, f64)>,
    /// Constant added to the restricted field; zero in production, used by
    /// tests to force sign-definite fields.
    offset: f64,
}

/// Draw a wave deterministically from (master_seed, trial_index).
pub fn sample_wave(
    set: Arc<LatticePointSet>,
    master_seed: u64,
    trial_index: u64,
) -> Result<WaveSample> {
    if set.n() < 2 {
        return Err(Error::EmptySpectrum { m: set.m() });
    }
    let stream = CoefficientStream::new(master_seed, trial_index);
    let coefficients = (0..set.half_set().len() as u64)
        .map(|k| stream.coefficient_pair(k))
        .collect();
    Ok(WaveSample {
        set,
        master_seed,
        trial_index,
        coefficients,
        offset: 0.0,
    })
}

impl WaveSample {
    /// Build a sample from explicit coefficients (deterministic test entry).
    pub fn from_coefficients(
        set: Arc<LatticePointSet>,
        coefficients: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if set.n() < 2 {
            return Err(Error::EmptySpectrum { m: set.m() });
        }
        assert_eq!(
            coefficients.len(),
            set.half_set().len(),
            "one coefficient pair per half-set point"
        );
        Ok(WaveSample {
            set,
            master_seed: 0,
            trial_index: 0,
            coefficients,
            offset: 0.0,
        })
    }

    /// Test hook: shift the restricted field by a constant.
    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn coefficients(&self) -> &[(f64, f64)] {
        &self.coefficients
    }

    pub fn set(&self) -> &LatticePointSet {
        &self.set
    }

    fn scale(&self) -> f64 {
        2.0 / (self.set.n() as f64).sqrt()
    }
}

/// Field value and parameter derivative of the restricted wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub f: f64,
    pub fprime: f64,
}

/// f(t) = F(gamma(t)) and f'(t), by term-wise analytic differentiation.
pub fn eval_field(sample: &WaveSample, curve: &TorusCurve, t: f64) -> Result<FieldValue> {
    let l = curve.length();
    if !((-1e-9 * l..=l * (1.0 + 1e-9)).contains(&t)) {
        return Err(Error::InvalidRange {
            what: "t",
            value: t,
            expected: "[0, L]",
        });
    }
    let p = curve.position(t);
    let v = curve.velocity(t);
    let mut f = 0.0;
    let mut fp = 0.0;
    for (&(x, y), &(b, c)) in sample.set.half_set().iter().zip(&sample.coefficients) {
        let (xf, yf) = (x as f64, y as f64);
        let (s, co) = (2.0 * PI * (xf * p.x + yf * p.y)).sin_cos();
        f += b * co - c * s;
        fp += -(b * s + c * co) * 2.0 * PI * (xf * v.x + yf * v.y);
    }
    let scale = sample.scale();
    Ok(FieldValue {
        f: scale * f + sample.offset,
        fprime: scale * fp,
    })
}

/// Zero count of one trial with refined locations.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCount {
    pub count: usize,
    /// Strictly increasing refined zero positions in [0, L].
    pub locations: Vec<f64>,
    /// Smallest gap between consecutive zeros (infinite when count < 2).
    pub min_gap: f64,
    /// Bisection interval tolerance that was used: 1e-12 L.
    pub refinement_tol: f64,
    /// Number of near-tangency subdivision retries triggered.
    pub warn_flags: u32,
}

/// Count zeros of the restricted field by scanning a grid of step
/// 1 / (oversample sqrt(m) 2 pi) and bisecting every sign change down to
/// 1e-12 L. Grid points that locally minimize |f| without a sign change
/// below the near-tangency threshold trigger one subdivision retry and a
/// warning flag.
pub fn count_zeros(sample: &WaveSample, curve: &TorusCurve, oversample: f64) -> ZeroCount {
    assert!(oversample >= 4.0, "oversample must be >= 4");
    let table = FieldTable::new(sample.set(), curve, oversample);
    count_zeros_with_table(sample, curve, &table)
}

/// Precomputed grid trigonometry shared by every trial of an experiment:
/// cos/sin of 2 pi <mu, gamma(t_k)> per (grid node, half-set point).
struct FieldTable {
    ts: Vec<f64>,
    cos: Vec<f64>,
    sin: Vec<f64>,
    nh: usize,
}

impl FieldTable {
    fn new(set: &LatticePointSet, curve: &TorusCurve, oversample: f64) -> Self {
        let l = curve.length();
        let step = 1.0 / (oversample * (set.m() as f64).sqrt() * 2.0 * PI);
        let grid = (l / step).ceil() as usize + 1;
        let ts: Vec<f64> = (0..grid)
            .map(|k| l * k as f64 / (grid - 1) as f64)
            .collect();
        let nh = set.half_set().len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = ts
            .par_iter()
            .map(|&t| {
                let p = curve.position(t);
                let mut cos = Vec::with_capacity(nh);
                let mut sin = Vec::with_capacity(nh);
                for &(x, y) in set.half_set() {
                    let (s, c) = (2.0 * PI * (x as f64 * p.x + y as f64 * p.y)).sin_cos();
                    cos.push(c);
                    sin.push(s);
                }
                (cos, sin)
            })
            .collect();
        let mut cos = Vec::with_capacity(grid * nh);
        let mut sin = Vec::with_capacity(grid * nh);
        for (c, s) in rows {
            cos.extend(c);
            sin.extend(s);
        }
        FieldTable { ts, cos, sin, nh }
    }

    fn eval(&self, sample: &WaveSample, k: usize) -> f64 {
        let base = k * self.nh;
        let mut f = 0.0;
        for (i, &(b, c)) in sample.coefficients.iter().enumerate() {
            f += b * self.cos[base + i] - c * self.sin[base + i];
        }
        sample.scale() * f + sample.offset
    }
}

fn count_zeros_with_table(
    sample: &WaveSample,
    curve: &TorusCurve,
    table: &FieldTable,
) -> ZeroCount {
    let l = curve.length();
    let tol = 1e-12 * l;
    let values: Vec<f64> = (0..table.ts.len())
        .map(|k| table.eval(sample, k))
        .collect();
    let f = |t: f64| eval_field(sample, curve, t).expect("t inside [0, L]").f;

    let mut locations = Vec::new();
    let mut warn_flags = 0u32;
    for k in 0..table.ts.len() - 1 {
        let (a, b) = (table.ts[k], table.ts[k + 1]);
        let (fa, fb) = (values[k], values[k + 1]);
        if sign_change(fa, fb) {
            locations.push(bisect(&f, a, b, fa, fb, tol));
        }
    }
    // near-tangency pass: a strict local minimum of |f| with no adjacent
    // sign change and magnitude under the field-scale threshold earns one
    // subdivision retry
    for k in 1..table.ts.len() - 1 {
        let (fl, fm, fr) = (values[k - 1], values[k], values[k + 1]);
        if sign_change(fl, fm) || sign_change(fm, fr) {
            continue;
        }
        if fm.abs() >= fl.abs() || fm.abs() >= fr.abs() {
            continue;
        }
        let local_rms = ((fl * fl + fm * fm + fr * fr) / 3.0).sqrt();
        if fm.abs() < 1e-9 * local_rms.sqrt() {
            warn_flags += 1;
            let mut prev_t = table.ts[k - 1];
            let mut prev_f = fl;
            for j in 1..=16 {
                let t = table.ts[k - 1]
                    + (table.ts[k + 1] - table.ts[k - 1]) * j as f64 / 16.0;
                let ft = if j == 16 { fr } else { f(t) };
                if sign_change(prev_f, ft) {
                    locations.push(bisect(&f, prev_t, t, prev_f, ft, tol));
                }
                prev_t = t;
                prev_f = ft;
            }
        }
    }
    locations.sort_by(f64::total_cmp);
    let min_gap = locations
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    ZeroCount {
        count: locations.len(),
        locations,
        min_gap,
        refinement_tol: tol,
        warn_flags,
    }
}

fn sign_change(a: f64, b: f64) -> bool {
    (a <= 0.0 && b > 0.0) || (a > 0.0 && b <= 0.0)
}

fn bisect(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, tol: f64) -> f64 {
    debug_assert!(sign_change(fa, fb));
    let (mut a, mut b, mut fa) = (a, b, fa);
    let _ = fb;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval at floating-point resolution
        }
        let fm = f(mid);
        if sign_change(fa, fm) {
            b = mid;
        } else {
            a = mid;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Aggregated statistics of the zero count over many trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub m: u64,
    pub n: usize,
    pub trials: u64,
    pub master_seed: u64,
    pub oversample: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub stderr_mean: f64,
    /// Standard error of the sample variance via the fourth central moment.
    pub stderr_variance: f64,
    pub predicted_mean: f64,
    pub predicted_variance_leading: Option<f64>,
    pub predicted_variance_integral: Option<f64>,
    pub z_score_mean: f64,
    /// Total near-tangency subdivision retries across trials.
    pub warn_total: u64,
    /// Trials whose count exceeded 10 sqrt(2m) L.
    pub outlier_trials: u64,
    pub rng_algorithm: String,
    #[serde(skip)]
    pub trial_counts: Vec<u32>,
    #[serde(skip)]
    pub trial_warns: Vec<u32>,
}

impl SimulationReport {
    /// Per-trial CSV dump: `trial,count,warn_flags`.
    pub fn write_trial_csv(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "trial,count,warn_flags")?;
        for (i, (&c, &wf)) in self.trial_counts.iter().zip(&self.trial_warns).enumerate() {
            writeln!(w, "{i},{c},{wf}")?;
        }
        Ok(())
    }
}

/// Run `trials` independent trials and aggregate exactly.
///
/// `parallelism` = 0 uses the ambient rayon pool; any other value runs on a
/// dedicated pool of that many threads. The report is bit-identical either
/// way: counts are merged as integers in trial order.
pub fn run_experiment(
    set: &LatticePointSet,
    curve: &TorusCurve,
    trials: u64,
    master_seed: u64,
    oversample: f64,
    parallelism: usize,
) -> Result<SimulationReport> {
    let shared = Arc::new(set.clone());
    run_experiment_with(set, curve, trials, oversample, parallelism, master_seed, {
        let shared = shared.clone();
        move |trial| sample_wave(shared.clone(), master_seed, trial).expect("nonempty set")
    })
}

/// Experiment driver with an explicit sampler; `run_experiment` wires in the
/// seeded coefficient stream, tests substitute forced samples.
pub fn run_experiment_with(
    set: &LatticePointSet,
    curve: &TorusCurve,
    trials: u64,
    oversample: f64,
    parallelism: usize,
    master_seed: u64,
    sampler: impl Fn(u64) -> WaveSample + Sync,
) -> Result<SimulationReport> {
    if set.n() < 2 {
        return Err(Error::EmptySpectrum { m: set.m() });
    }
    if trials < 2 {
        return Err(Error::InvalidRange {
            what: "trials",
            value: trials as f64,
            expected: "[2, inf)",
        });
    }
    if oversample < 4.0 || oversample.is_nan() {
        return Err(Error::InvalidRange {
            what: "oversample",
            value: oversample,
            expected: "[4, inf)",
        });
    }

    let run = || -> Vec<(u32, u32)> {
        let table = FieldTable::new(set, curve, oversample);
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let sample = sampler(trial);
                let zc = count_zeros_with_table(&sample, curve, &table);
                (zc.count as u32, zc.warn_flags)
            })
            .collect()
    };
    let results: Vec<(u32, u32)> = if parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .expect("thread pool")
            .install(run)
    } else {
        run()
    };

    // exact integer power sums: identical merge for any parallelism
    let t = trials as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0u128, 0u128, 0u128, 0u128);
    let mut warn_total = 0u64;
    let outlier_bar = 10.0 * kacrice::expected_count(set.m(), curve);
    let mut outlier_trials = 0u64;
    for &(c, w) in &results {
        let c = c as u128;
        s1 += c;
        s2 += c * c;
        s3 += c * c * c;
        s4 += c * c * c * c;
        warn_total += w as u64;
        if c as f64 > outlier_bar {
            outlier_trials += 1;
        }
    }
    let mean = s1 as f64 / t;
    let variance = ((s2 as f64) - t * mean * mean) / (t - 1.0);
    let variance = variance.max(0.0);
    // fourth central moment from raw power sums
    let mu4 = ((s4 as f64) - 4.0 * mean * (s3 as f64) + 6.0 * mean * mean * (s2 as f64)
        - 4.0 * mean.powi(3) * (s1 as f64)
        + t * mean.powi(4))
        / t;
    let stderr_mean = (variance / t).sqrt();
    let stderr_variance =
        ((mu4 - variance * variance * (t - 3.0) / (t - 1.0)).max(0.0) / t).sqrt();

    let predicted_mean = kacrice::expected_count(set.m(), curve);
    let prediction = kacrice::variance_prediction(set, curve, 0).ok();
    let z_score_mean = if stderr_mean > 0.0 {
        (mean - predicted_mean) / stderr_mean
    } else {
        0.0
    };
    Ok(SimulationReport {
        m: set.m(),
        n: set.n(),
        trials,
        master_seed,
        oversample,
        empirical_mean: mean,
        empirical_variance: variance,
        stderr_mean,
        stderr_variance,
        predicted_mean,
        predicted_variance_leading: prediction.as_ref().map(|p| p.variance_leading),
        predicted_variance_integral: prediction.as_ref().map(|p| p.variance_integral),
        z_score_mean,
        warn_total,
        outlier_trials,
        rng_algorithm: STREAM_ALGORITHM.to_string(),
        trial_counts: results.iter().map(|&(c, _)| c).collect(),
        trial_warns: results.iter().map(|&(_, w)| w).collect(),
    })
}
