//! Replayable coefficient streams for wave sampling.
//!
//! ChaCha12 is used as a counter-based stream cipher: the key encodes
//! (master_seed, trial_index), the ChaCha stream id encodes the half-set
//! point index, and the block counter walks the draws. Normal variates come
//! from the inverse normal CDF applied to the stream's uniforms, so the
//! whole pipeline is a pure integer-plus-polynomial function of the seed
//! triple: identical on any platform and for any thread schedule.

// The rational-approximation constants keep their published digits, a few
// of which exceed f64 resolution.
#![allow(clippy::excessive_precision)]

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Name of the stream construction, embedded in simulation reports.
pub const STREAM_ALGORITHM: &str = "chacha12(key=seed,trial; stream=point)/as241";

/// Coefficient source for one (master_seed, trial) pair.
#[derive(Debug, Clone)]
pub struct CoefficientStream {
    key: [u8; 32],
}

impl CoefficientStream {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&trial_index.to_le_bytes());
        key[16..].copy_from_slice(b"arw-wave-coeffs!");
        CoefficientStream { key }
    }

    /// The (b, c) coefficient pair for the half-set point with this index,
    /// each centered normal with variance 1/2.
    pub fn coefficient_pair(&self, point_index: u64) -> (f64, f64) {
        let mut rng = ChaCha12Rng::from_seed(self.key);
        rng.set_stream(point_index);
        let b = normal_inv_cdf(uniform_open(rng.next_u64())) * std::f64::consts::FRAC_1_SQRT_2;
        let c = normal_inv_cdf(uniform_open(rng.next_u64())) * std::f64::consts::FRAC_1_SQRT_2;
        (b, c)
    }
}

/// Map a u64 to the open interval (0, 1) on the 2^-52 grid, never hitting
/// either endpoint (53 bits would round the top value to 1.0).
fn uniform_open(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations), relative error below 1e-15 across (0, 1).
pub fn normal_inv_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0, "p = {p} outside (0, 1)");
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&CENTRAL_NUM, r) / poly(&CENTRAL_DEN, r);
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let r = (-r.ln()).sqrt();
    let v = if r <= 5.0 {
        let r = r - 1.6;
        poly(&TAIL_NUM, r) / poly(&TAIL_DEN, r)
    } else {
        let r = r - 5.0;
        poly(&FAR_TAIL_NUM, r) / poly(&FAR_TAIL_DEN, r)
    };
    if q < 0.0 {
        -v
    } else {
        v
    }
}

fn poly(coeffs: &[f64; 8], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

const CENTRAL_NUM: [f64; 8] = [
    3.387_132_872_796_366_608e0,
    1.331_416_678_917_843_774_5e2,
    1.971_590_950_306_551_442_7e3,
    1.373_169_376_550_946_112_5e4,
    4.592_195_393_154_987_145_7e4,
    6.726_577_092_700_870_085_3e4,
    3.343_057_558_358_812_810_5e4,
    2.509_080_928_730_122_672_7e3,
];
const CENTRAL_DEN: [f64; 8] = [
    1.0,
    4.231_333_070_160_091_125_2e1,
    6.871_870_074_920_579_083e2,
    5.394_196_021_424_751_107_7e3,
    2.121_379_430_158_659_586_7e4,
    3.930_789_580_009_271_061e4,
    2.872_908_573_572_194_267_4e4,
    5.226_495_278_852_854_561e3,
];
const TAIL_NUM: [f64; 8] = [
    1.423_437_110_749_683_577_34e0,
    4.630_337_846_156_545_295_9e0,
    5.769_497_221_460_691_405_5e0,
    3.647_848_324_763_204_605_04e0,
    1.270_458_252_452_368_382_58e0,
    2.417_807_251_774_506_117_7e-1,
    2.272_384_498_926_918_458_33e-2,
    7.745_450_142_783_414_076_4e-4,
];
const TAIL_DEN: [f64; 8] = [
    1.0,
    2.053_191_626_637_758_821_87e0,
    1.676_384_830_183_803_849_4e0,
    6.897_673_349_851_000_045_5e-1,
    1.481_039_764_274_800_745_9e-1,
    1.519_866_656_361_645_719_66e-2,
    5.475_938_084_995_344_946e-4,
    1.050_750_071_644_416_843_24e-9,
];
const FAR_TAIL_NUM: [f64; 8] = [
    6.657_904_643_501_103_777_2e0,
    5.463_784_911_164_114_369_9e0,
    1.784_826_539_917_291_335_8e0,
    2.965_605_718_285_048_912_3e-1,
    2.653_218_952_657_612_309_3e-2,
    1.242_660_947_388_078_438_6e-3,
    2.711_555_568_743_487_578_15e-5,
    2.010_334_399_292_288_132_65e-7,
];
const FAR_TAIL_DEN: [f64; 8] = [
    1.0,
    5.998_322_065_558_879_376_9e-1,
    1.369_298_809_227_358_053_1e-1,
    1.487_536_129_085_061_485_25e-2,
    7.868_691_311_456_132_591e-4,
    1.846_318_317_510_054_681_8e-5,
    1.421_511_758_316_445_888_7e-7,
    2.044_263_103_389_939_785_64e-15,
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn inverse_cdf_reference_values() {
        // frozen against an independent high-precision implementation
        assert_eq!(normal_inv_cdf(0.5), 0.0);
        assert_relative_eq!(normal_inv_cdf(0.6), 0.2533471031357998, max_relative = 1e-14);
        assert_relative_eq!(
            normal_inv_cdf(0.025),
            -1.9599639845400538,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            normal_inv_cdf(0.001),
            -3.090232306167813,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            normal_inv_cdf(1e-10),
            -6.361340902404056,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            normal_inv_cdf(1.0 - 1e-10),
            6.361340889697422,
            max_relative = 1e-13
        );
    }

    #[test]
    fn inverse_cdf_is_odd() {
        for p in [0.01, 0.2, 0.43, 0.49] {
            assert_relative_eq!(
                normal_inv_cdf(p),
                -normal_inv_cdf(1.0 - p),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let s = CoefficientStream::new(42, 7);
        let again = CoefficientStream::new(42, 7);
        for k in 0..16 {
            assert_eq!(s.coefficient_pair(k), again.coefficient_pair(k));
        }
        let other_trial = CoefficientStream::new(42, 8);
        let other_seed = CoefficientStream::new(43, 7);
        assert_ne!(s.coefficient_pair(0), other_trial.coefficient_pair(0));
        assert_ne!(s.coefficient_pair(0), other_seed.coefficient_pair(0));
        assert_ne!(s.coefficient_pair(0), s.coefficient_pair(1));
    }

    #[test]
    fn coefficients_have_variance_half() {
        // aggregate over >= 10^4 draws: sample variance within 3 stderr of 1/2
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut count = 0usize;
        for trial in 0..200u64 {
            let s = CoefficientStream::new(1234, trial);
            for k in 0..32 {
                let (b, c) = s.coefficient_pair(k);
                for v in [b, c] {
                    sum += v;
                    sum_sq += v * v;
                    count += 1;
                }
            }
        }
        let n = count as f64;
        let mean = sum / n;
        let var = (sum_sq - n * mean * mean) / (n - 1.0);
        // Var(s^2) ~ 2 sigma^4 / n for Gaussians
        let stderr = (2.0 * 0.25 / n).sqrt();
        assert!((var - 0.5).abs() < 3.0 * stderr, "var = {var}");
        assert!(mean.abs() < 3.0 * (0.5f64 / n).sqrt(), "mean = {mean}");
    }

    #[test]
    fn uniform_open_stays_inside() {
        assert!(uniform_open(0) > 0.0);
        assert!(uniform_open(u64::MAX) < 1.0);
    }
}
