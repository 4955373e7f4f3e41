//! Gauss-Legendre quadrature. Nodes/weights are computed by Newton
//! iteration on the Legendre recurrence; double precision converges in a
//! handful of steps even for orders in the thousands.

/// A Gauss-Legendre rule mapped onto the interval `[a, b]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule of the given order on `[a, b]`. Exact for polynomials of degree
    /// `2*order - 1`.
    pub fn new(order: usize, a: f64, b: f64) -> Self {
        assert!(order >= 1, "quadrature order must be >= 1");
        assert!(b > a, "empty interval");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        // symmetric rule: solve on [0,1] side and mirror
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let (mut p, mut dp) = legendre_pair(n, x);
            for _ in 0..100 {
                let dx = p / dp;
                x -= dx;
                let (pp, dpp) = legendre_pair(n, x);
                p = pp;
                dp = dpp;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = mid - half * x;
            nodes[n - 1 - i] = mid + half * x;
            weights[i] = half * w;
            weights[n - 1 - i] = half * w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect();
        crate::accum::pairwise_sum(&terms)
    }
}

/// `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Quadrature order resolving an oscillation of spatial frequency
/// `sqrt_m` cycles per unit length over a curve of length `length`,
/// at `nodes_per_wavelength` nodes per wavelength `1/sqrt_m`.
pub fn oscillatory_order(length: f64, sqrt_m: f64, nodes_per_wavelength: f64) -> usize {
    let raw = (nodes_per_wavelength * length * sqrt_m).ceil() as usize;
    raw.max(24)
}
