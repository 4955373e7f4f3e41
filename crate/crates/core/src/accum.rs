//! Compensated accumulation. The covariance jets and quadrature loops
//! subtract near-equal quantities downstream, so per-sum rounding is kept
//! at the few-ulp level independent of term count.

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Pairwise sum of a slice; error O(log n) ulps, independent of traversal
/// chunking as long as the slice order is fixed.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = Neumaier::new();
        for &v in values {
            acc.add(v);
        }
        return acc.value();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}
