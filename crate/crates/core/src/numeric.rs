//! Small shared numerical helpers: fixed Gauss-Legendre rules, stable
//! log-sum-exp accumulation, bisection and least-squares line fits.

/// 8-point Gauss-Legendre nodes on [-1, 1].
pub const GL8_X: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329_0,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];

/// 8-point Gauss-Legendre weights.
pub const GL8_W: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362_0,
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// 4-point Gauss-Legendre nodes on [-1, 1].
pub const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];

/// 4-point Gauss-Legendre weights.
pub const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_86,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_86,
];

/// Streaming log-sum-exp accumulator. Terms are supplied as logarithms;
/// the running total stays in the log domain so sums with terms far above
/// the floating range still produce a finite logarithm.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn add_log(&mut self, lt: f64) {
        if lt == f64::NEG_INFINITY {
            return;
        }
        if lt > self.max {
            self.sum = self.sum * (self.max - lt).exp() + 1.0;
            self.max = lt;
        } else {
            self.sum += (lt - self.max).exp();
        }
    }

    /// Logarithm of the accumulated sum.
    pub fn log_value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }

    /// The sum itself; +inf when it exceeds the floating range.
    pub fn value(&self) -> f64 {
        self.log_value().exp()
    }
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

/// Find the root of a monotone increasing function on [lo, hi] by bisection.
/// Assumes f(lo) <= 0 <= f(hi); returns the midpoint once the bracket is
/// narrower than `tol`.
pub fn bisect_increasing(mut lo: f64, mut hi: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ordinary least-squares fit y = slope * x + intercept.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LineFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Volume of the unit Euclidean ball in dimension `n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    use statrs::function::gamma::gamma;
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0 + 1.0)
}

/// Deterministic per-index sub-seed derived from a base seed
/// (splitmix64 finalizer).
pub fn sub_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
