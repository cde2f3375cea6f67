//! Norms, the truncated exponential series Phi and the singular
//! Trudinger-Moser integrals, all reduced to 1-D radial quadrature.
//!
//! The radial quadrature runs per log-grid segment and accumulates in the
//! log domain, so supercritical sweeps whose integrands leave the floating
//! range still return exact finite logarithms.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::numeric::{LogSum, GL4_W, GL4_X, GL8_W, GL8_X};
use crate::profile::RadialProfile;

/// Parameter bundle shared by the inequality evaluators.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct TmParams {
    pub dim: usize,
    pub q: f64,
    pub p: f64,
    pub beta: f64,
    pub lambda: f64,
    pub d: f64,
    pub k: f64,
    pub a: f64,
    pub b: f64,
}

impl TmParams {
    pub fn new(dim: usize, q: f64, beta: f64) -> Result<TmParams> {
        let params = TmParams {
            dim,
            q,
            p: q,
            beta,
            lambda: 0.0,
            d: 1.0,
            k: 2.0,
            a: dim as f64,
            b: dim as f64,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim as f64;
        if self.dim < 2 {
            return Err(Error::InvalidParameter("dimension must be >= 2".into()));
        }
        if !(self.q >= 1.0) {
            return Err(Error::InvalidParameter(format!("q must be >= 1, got {}", self.q)));
        }
        if !(0.0 <= self.beta && self.beta < n) {
            return Err(Error::InvalidParameter(format!(
                "beta must be in [0, N); got beta = {}, N = {n}",
                self.beta
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(Error::InvalidParameter("lambda must be nonnegative".into()));
        }
        if !(self.d > 0.0 && self.k > 1.0 && self.a > 0.0 && self.b > 0.0) {
            return Err(Error::InvalidParameter(
                "need d > 0, k > 1, a > 0, b > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_d(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_ab(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }

    /// The subcritical inequality requires p > q(1 - beta/N), with p >= q
    /// allowed when beta = 0. Returns Ok(true) when the hypothesis holds
    /// strictly, Ok(false) for the boundary case p = q(1 - beta/N) with
    /// beta > 0 (accepted but outside the stated hypothesis).
    pub fn subcritical_hypothesis(&self) -> Result<bool> {
        let n = self.dim as f64;
        if self.beta == 0.0 {
            if self.p >= self.q {
                Ok(true)
            } else {
                Err(Error::InvalidParameter(format!(
                    "need p >= q when beta = 0; got p = {}, q = {}",
                    self.p, self.q
                )))
            }
        } else {
            let threshold = self.q * (1.0 - self.beta / n);
            if self.p > threshold {
                Ok(true)
            } else if (self.p - threshold).abs() <= 1e-12 * threshold {
                Ok(false)
            } else {
                Err(Error::InvalidParameter(format!(
                    "need p > q(1 - beta/N) = {threshold}; got p = {}",
                    self.p
                )))
            }
        }
    }
}

/// Starting index of the truncated exponential series: the smallest j in N
/// with j > q(N-1)/N * (1 - beta/N) when beta > 0, and j >= q(N-1)/N when
/// beta = 0.
pub fn phi_start_index(dim: usize, q: f64, beta: f64) -> usize {
    let n = dim as f64;
    let j0 = if beta > 0.0 {
        let thr = q * (n - 1.0) / n * (1.0 - beta / n);
        (thr.floor() as i64 + 1).max(1)
    } else {
        let thr = q * (n - 1.0) / n;
        (thr.ceil() as i64).max(1)
    };
    j0 as usize
}

fn ln_factorial(j: usize) -> f64 {
    ln_gamma(j as f64 + 1.0)
}

/// Phi(t) = e^t minus the series terms below the start index.
pub fn phi_series(t: f64, dim: usize, q: f64, beta: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter("Phi argument must be nonnegative".into()));
    }
    Ok(ln_phi_series(t, dim, q, beta)?.exp())
}

/// ln Phi(t), stable for arguments far above the floating range of e^t.
pub fn ln_phi_series(t: f64, dim: usize, q: f64, beta: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter("Phi argument must be nonnegative".into()));
    }
    if t == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let j0 = phi_start_index(dim, q, beta);
    if t < 30.0 {
        // Direct summation from j0 with a relative stopping rule.
        let lt = t.ln();
        let mut term = (j0 as f64 * lt - ln_factorial(j0)).exp();
        let mut sum = term;
        let mut j = j0;
        loop {
            j += 1;
            term *= t / j as f64;
            sum += term;
            if term < 1e-16 * sum || j > j0 + 500 {
                break;
            }
        }
        Ok(sum.ln())
    } else {
        // Phi(t) = e^t (1 - e^-t * sum_{j<j0} t^j/j!); the correction is
        // accumulated in the log domain.
        let lt = t.ln();
        let mut ls = LogSum::new();
        for j in 0..j0 {
            ls.add_log(j as f64 * lt - ln_factorial(j));
        }
        let correction = (ls.log_value() - t).exp();
        Ok(t + (-correction).ln_1p())
    }
}

/// Which integrand the singular radial integral carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrandVariant {
    /// exp(lambda (1-beta/N) u^(N/(N-1))) * u^p
    ExpP,
    /// Phi(lambda (1-beta/N) u^(N/(N-1)))
    Phi,
    /// Phi(...) / (1 + d u^((p/(N-1))(1-beta/N)))
    PhiExactGrowth,
    /// Phi(...) / (1 + d u^((p/(N-1))(1-1/k)(1-beta/N)))
    PhiExactGrowthK,
}

/// Which inequality a ratio refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    /// exp-numerator bound under the gradient constraint, norm divisor
    /// power q(1-beta/N).
    Subcritical,
    /// exact-growth denominator at the critical constant, same divisor.
    ExactGrowth,
    /// exact growth under the mixed constraint with exponent kN, no divisor.
    ExactGrowthConstrained,
    /// exact growth under the mixed constraint with exponent N, divisor
    /// power q(1-1/k)(1-beta/N).
    ExactGrowthScaled,
}

impl Inequality {
    pub fn variant(&self) -> IntegrandVariant {
        match self {
            Inequality::Subcritical => IntegrandVariant::ExpP,
            Inequality::ExactGrowth => IntegrandVariant::PhiExactGrowth,
            Inequality::ExactGrowthConstrained | Inequality::ExactGrowthScaled => {
                IntegrandVariant::PhiExactGrowthK
            }
        }
    }

    /// Exponent of ||u||_q dividing the integral.
    pub fn divisor_power(&self, params: &TmParams) -> f64 {
        let n = params.dim as f64;
        match self {
            Inequality::Subcritical | Inequality::ExactGrowth => {
                params.q * (1.0 - params.beta / n)
            }
            Inequality::ExactGrowthConstrained => 0.0,
            Inequality::ExactGrowthScaled => {
                params.q * (1.0 - 1.0 / params.k) * (1.0 - params.beta / n)
            }
        }
    }

    pub fn constraint(&self) -> ConstraintKind {
        match self {
            Inequality::Subcritical | Inequality::ExactGrowth => ConstraintKind::GradientOnly,
            Inequality::ExactGrowthConstrained => ConstraintKind::SumKn,
            Inequality::ExactGrowthScaled => ConstraintKind::SumAb,
        }
    }
}

/// Value of a functional together with bookkeeping. `log_value` is always
/// finite information; `value` overflows to +inf when the logarithm
/// exceeds the floating range, with `saturated` set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub log_value: f64,
    pub error_estimate: f64,
    pub truncation_terms: usize,
    pub saturated: bool,
}

/// Anisotropic Dirichlet norm (integral of F^N(grad u))^(1/N), exact on
/// the log-linear interpolant.
pub fn dirichlet_norm(u: &RadialProfile, g: &Gauge) -> Result<f64> {
    Ok(dirichlet_integral_from(u, g, 0.0)?.powf(1.0 / g.dim() as f64))
}

/// Integral of F^N(grad u) over {F0(x) >= r_lo}.
pub fn dirichlet_integral_from(u: &RadialProfile, g: &Gauge, r_lo: f64) -> Result<f64> {
    let n = g.dim() as f64;
    let kappa = g.constants()?.kappa;
    let s_lo = if r_lo > 0.0 { r_lo.ln() } else { f64::NEG_INFINITY };
    let mut acc = 0.0;
    for seg in u.segments() {
        let s0 = seg.s0.max(s_lo);
        if s0 >= seg.s1 {
            continue;
        }
        let m = seg.slope().abs();
        acc += m.powf(n) * (seg.s1 - s0);
    }
    Ok(n * kappa * acc)
}

/// ||u||_q = (N kappa int u^q r^(N-1) dr)^(1/q).
pub fn lq_norm(u: &RadialProfile, g: &Gauge, q: f64) -> Result<f64> {
    Ok(lq_integral_from(u, g, q, 0.0)?.powf(1.0 / q))
}

/// int_{r_lo}^inf u^q r^(N-1) dr, without the N kappa factor.
pub fn radial_lq_integral(u: &RadialProfile, q: f64, r_lo: f64) -> f64 {
    let n = u.gauge().dim() as f64;
    let mut acc = 0.0;
    // Plateau piece [0, r_0] (or [r_lo, r_0]).
    let r0 = u.plateau_radius();
    if r_lo < r0 && u.peak() > 0.0 {
        let lo = r_lo.max(0.0);
        acc += u.peak().powf(q) * (r0.powf(n) - lo.powf(n)) / n;
    }
    let s_lo = if r_lo > 0.0 { r_lo.ln() } else { f64::NEG_INFINITY };
    for seg in u.segments() {
        let s0 = seg.s0.max(s_lo);
        if s0 >= seg.s1 {
            continue;
        }
        let half = 0.5 * (seg.s1 - s0);
        let mid = 0.5 * (seg.s1 + s0);
        let slope = seg.slope();
        for (&x, &w) in GL8_X.iter().zip(&GL8_W) {
            let s = mid + half * x;
            let v = seg.v0 + slope * (s - seg.s0);
            if v > 0.0 {
                acc += w * half * v.powf(q) * (n * s).exp();
            }
        }
    }
    acc
}

fn lq_integral_from(u: &RadialProfile, g: &Gauge, q: f64, r_lo: f64) -> Result<f64> {
    let n = g.dim() as f64;
    let kappa = g.constants()?.kappa;
    Ok(n * kappa * radial_lq_integral(u, q, r_lo))
}

/// Logarithm of the pointwise integrand at value v (excluding the radial
/// weight). Returns -inf for v = 0.
fn log_integrand(v: f64, params: &TmParams, variant: IntegrandVariant) -> Result<f64> {
    if v <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let n = params.dim as f64;
    let sing = 1.0 - params.beta / n;
    let t = params.lambda * sing * v.powf(n / (n - 1.0));
    Ok(match variant {
        IntegrandVariant::ExpP => t + params.p * v.ln(),
        IntegrandVariant::Phi => ln_phi_series(t, params.dim, params.q, params.beta)?,
        IntegrandVariant::PhiExactGrowth => {
            let denom_exp = params.p / (n - 1.0) * sing;
            ln_phi_series(t, params.dim, params.q, params.beta)?
                - (params.d * v.powf(denom_exp)).ln_1p()
        }
        IntegrandVariant::PhiExactGrowthK => {
            let denom_exp = params.p / (n - 1.0) * (1.0 - 1.0 / params.k) * sing;
            ln_phi_series(t, params.dim, params.q, params.beta)?
                - (params.d * v.powf(denom_exp)).ln_1p()
        }
    })
}

/// Singular radial Trudinger-Moser integral
/// N kappa int integrand(u(r)) r^(N-1-beta) dr, computed per log segment
/// with Gauss nodes and accumulated via log-sum-exp.
pub fn tm_integral(
    u: &RadialProfile,
    params: &TmParams,
    g: &Gauge,
    variant: IntegrandVariant,
) -> Result<FunctionalValue> {
    params.validate()?;
    if g.dim() != params.dim {
        return Err(Error::DimensionMismatch {
            expected: params.dim,
            got: g.dim(),
        });
    }
    let n = params.dim as f64;
    let kappa = g.constants()?.kappa;
    let weight_pow = n - params.beta; // r^(N-1-beta) dr = e^((N-beta)s) ds

    let accumulate = |xs: &[f64], ws: &[f64]| -> Result<f64> {
        let mut ls = LogSum::new();
        // Plateau: closed form of the singular weight against the constant.
        if u.peak() > 0.0 {
            let r0 = u.plateau_radius();
            ls.add_log(
                log_integrand(u.peak(), params, variant)?
                    + weight_pow * r0.ln()
                    - weight_pow.ln(),
            );
        }
        for seg in u.segments() {
            let half = 0.5 * (seg.s1 - seg.s0);
            let mid = 0.5 * (seg.s1 + seg.s0);
            let slope = seg.slope();
            for (&x, &w) in xs.iter().zip(ws) {
                let s = mid + half * x;
                let v = seg.v0 + slope * (s - seg.s0);
                if v > 0.0 {
                    ls.add_log(
                        log_integrand(v, params, variant)? + weight_pow * s + (w * half).ln(),
                    );
                }
            }
        }
        Ok(ls.log_value() + (n * kappa).ln())
    };

    let log8 = accumulate(&GL8_X, &GL8_W)?;
    let log4 = accumulate(&GL4_X, &GL4_W)?;
    let error_estimate = if log8.is_finite() {
        ((log8 - log4).abs().min(700.0).exp() - 1.0).abs()
    } else {
        0.0
    };
    Ok(FunctionalValue {
        value: log8.exp(),
        log_value: log8,
        error_estimate,
        truncation_terms: phi_start_index(params.dim, params.q, params.beta),
        saturated: log8 > f64::MAX.ln(),
    })
}

/// Constraint families appearing in the suprema.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// ||F(grad u)||_N <= 1
    GradientOnly,
    /// ||F(grad u)||_N^a + ||u||_q^b <= 1
    SumAb,
    /// ||F(grad u)||_N^a + ||u||_q^(kN) <= 1
    SumKn,
}

/// Evaluate the constraint; slack = 1 - lhs (nonnegative iff satisfied).
pub fn constraint_check(
    u: &RadialProfile,
    params: &TmParams,
    g: &Gauge,
    kind: ConstraintKind,
) -> Result<(bool, f64)> {
    let grad = dirichlet_norm(u, g)?;
    let lhs = match kind {
        ConstraintKind::GradientOnly => grad,
        ConstraintKind::SumAb => {
            grad.powf(params.a) + lq_norm(u, g, params.q)?.powf(params.b)
        }
        ConstraintKind::SumKn => {
            grad.powf(params.a)
                + lq_norm(u, g, params.q)?.powf(params.k * params.dim as f64)
        }
    };
    let slack = 1.0 - lhs;
    Ok((slack >= -1e-8, slack))
}

/// The inequality's ratio: integral divided by its prescribed norm power.
/// The constraint is verified first.
pub fn ratio(
    u: &RadialProfile,
    params: &TmParams,
    g: &Gauge,
    inequality: Inequality,
) -> Result<FunctionalValue> {
    let (ok, slack) = constraint_check(u, params, g, inequality.constraint())?;
    if !ok {
        return Err(Error::ConstraintViolated(format!(
            "constraint slack {slack:.3e} is negative"
        )));
    }
    let integral = tm_integral(u, params, g, inequality.variant())?;
    let power = inequality.divisor_power(params);
    if power == 0.0 {
        return Ok(integral);
    }
    let norm = lq_norm(u, g, params.q)?;
    if norm == 0.0 {
        return Err(Error::DegenerateInput(
            "zero norm in ratio divisor".into(),
        ));
    }
    let log_value = integral.log_value - power * norm.ln();
    Ok(FunctionalValue {
        value: log_value.exp(),
        log_value,
        error_estimate: integral.error_estimate,
        truncation_terms: integral.truncation_terms,
        saturated: log_value > f64::MAX.ln(),
    })
}

/// Report of the two gamma-scaling identities connecting a Wulff-radial
/// profile under (F, F0-weight) to its Euclidean counterpart.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaScalingReport {
    pub dirichlet_aniso: f64,
    pub dirichlet_euclid_scaled: f64,
    pub dirichlet_rel_diff: f64,
    pub singular_aniso_log: f64,
    pub singular_euclid_scaled_log: f64,
    pub singular_rel_diff: f64,
}

/// Check that the anisotropic Dirichlet integral equals gamma^N times the
/// Euclidean one of the rescaled profile, and the singular exponential
/// integral equals gamma^beta times the Euclidean one.
pub fn gamma_scaling_check(
    u: &RadialProfile,
    params: &TmParams,
    g: &Gauge,
) -> Result<GammaScalingReport> {
    let n = g.dim() as f64;
    let gamma = g.constants()?.gamma;
    let euclid = Gauge::euclidean(g.dim());
    // The Euclidean rearrangement profile lives at radius t = gamma * r.
    let u_euclid = u.dilate(1.0 / gamma)?.with_gauge(euclid.clone());

    let lhs_d = dirichlet_norm(u, g)?.powf(n);
    let rhs_d = gamma.powf(n) * dirichlet_norm(&u_euclid, &euclid)?.powf(n);
    let dirichlet_rel_diff = (lhs_d - rhs_d).abs() / lhs_d.abs().max(1e-300);

    let lhs_s = tm_integral(u, params, g, IntegrandVariant::ExpP)?.log_value;
    let rhs_s = gamma.powf(params.beta).ln()
        + tm_integral(&u_euclid, params, &euclid, IntegrandVariant::ExpP)?.log_value;
    let singular_rel_diff = ((lhs_s - rhs_s).exp() - 1.0).abs();

    Ok(GammaScalingReport {
        dirichlet_aniso: lhs_d,
        dirichlet_euclid_scaled: rhs_d,
        dirichlet_rel_diff,
        singular_aniso_log: lhs_s,
        singular_euclid_scaled_log: rhs_s,
        singular_rel_diff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::Gauge;
    use crate::profile::{moser_profile, RadialProfile};

    fn euclid2() -> Gauge {
        Gauge::euclidean(2)
    }

    #[test]
    fn phi_start_indices() {
        assert_eq!(phi_start_index(2, 2.0, 0.0), 1);
        assert_eq!(phi_start_index(2, 4.0, 0.0), 2);
        // beta > 0 uses the strict inequality: threshold 1 gives start 2.
        assert_eq!(phi_start_index(2, 4.0, 1e-12), 2);
        assert_eq!(phi_start_index(2, 2.0, 1.0), 1);
    }

    #[test]
    fn phi_values_small_arguments() {
        let e = std::f64::consts::E;
        assert!((phi_series(1.0, 2, 2.0, 0.0).unwrap() - (e - 1.0)).abs() < 1e-12);
        assert!((phi_series(1.0, 2, 4.0, 0.0).unwrap() - (e - 2.0)).abs() < 1e-12);
        assert_eq!(phi_series(0.0, 2, 2.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn phi_closed_form_random_arguments() {
        // Phi(t) = e^t - (subtracted polynomial), checked across regimes.
        for &t in &[0.1, 0.7, 2.0, 13.0, 45.0, 200.0] {
            let direct = phi_series(t, 2, 4.0, 0.0).unwrap();
            let closed = (t as f64).exp() - 1.0 - t;
            assert!(
                (direct - closed).abs() <= 1e-10 * closed.abs(),
                "t = {t}: {direct} vs {closed}"
            );
            assert!(direct <= (t as f64).exp());
        }
    }

    #[test]
    fn ln_phi_far_beyond_overflow() {
        let lp = ln_phi_series(2000.0, 2, 2.0, 0.0).unwrap();
        assert!((lp - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn moser_dirichlet_norm_is_one() {
        for n in [4.0, 16.0, 64.0] {
            for beta in [0.0, 1.0] {
                let g = euclid2();
                let u = moser_profile(n, beta, &g).unwrap();
                let d = dirichlet_norm(&u, &g).unwrap();
                assert!((d - 1.0).abs() < 1e-10, "n = {n}, beta = {beta}: {d}");
            }
        }
    }

    #[test]
    fn constant_profile_has_zero_dirichlet_norm() {
        let g = euclid2();
        let u = RadialProfile::from_nodes(vec![1.0], vec![3.0], g.clone()).unwrap();
        assert_eq!(dirichlet_norm(&u, &g).unwrap(), 0.0);
    }

    #[test]
    fn indicator_l1_norm_is_wulff_volume() {
        let g = euclid2();
        let r = 1.7;
        let u = RadialProfile::from_nodes(vec![r], vec![1.0], g.clone()).unwrap();
        let v = lq_norm(&u, &g, 1.0).unwrap();
        let expected = g.constants().unwrap().kappa * r * r;
        assert!((v - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn zero_profile_norms_and_integrals_vanish() {
        let g = euclid2();
        let u = RadialProfile::zero(g.clone());
        assert_eq!(lq_norm(&u, &g, 2.0).unwrap(), 0.0);
        let params = TmParams::new(2, 2.0, 0.0)
            .unwrap()
            .with_lambda(1.0)
            .with_p(2.0);
        let fv = tm_integral(&u, &params, &g, IntegrandVariant::Phi).unwrap();
        assert_eq!(fv.value, 0.0);
    }

    #[test]
    fn moser_lq_norm_scaling_law() {
        // ||u_n||_q = O(n^(-1/N)): log-log slope near -1/2 for N = 2.
        let g = euclid2();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for n in [4.0, 8.0, 16.0, 32.0, 64.0] {
            let u = moser_profile(n, 0.0, &g).unwrap();
            xs.push(n.ln());
            ys.push(lq_norm(&u, &g, 2.0).unwrap().ln());
        }
        let fit = crate::numeric::fit_line(&xs, &ys);
        assert!((fit.slope + 0.5).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn dilation_scaling_laws() {
        let g = euclid2();
        let u = moser_profile(6.0, 0.0, &g).unwrap();
        let lam = 2.7;
        let v = u.dilate(lam).unwrap();
        let q = 3.0;
        let lu = lq_norm(&u, &g, q).unwrap();
        let lv = lq_norm(&v, &g, q).unwrap();
        assert!((lv - lam.powf(-2.0 / q) * lu).abs() < 1e-9 * lu);
        let du = dirichlet_norm(&u, &g).unwrap();
        let dv = dirichlet_norm(&v, &g).unwrap();
        assert!((du - dv).abs() < 1e-12);
    }

    #[test]
    fn moser_critical_lower_bound() {
        // At the critical constant the plateau contribution alone matches
        // the closed-form lower bound.
        let g = euclid2();
        let n = 8.0;
        let p = 2.0;
        let u = moser_profile(n, 0.0, &g).unwrap();
        let c = *g.constants().unwrap();
        let params = TmParams::new(2, 2.0, 0.0)
            .unwrap()
            .with_lambda(c.lambda)
            .with_p(p);
        let fv = tm_integral(&u, &params, &g, IntegrandVariant::ExpP).unwrap();
        let bound = (1.0 / (2.0 * c.kappa)).powf(p / 2.0 - 1.0) * (n / 2.0).powf(p / 2.0) / 2.0;
        assert!(
            fv.value >= bound * (1.0 - 1e-9),
            "integral {} below plateau bound {}",
            fv.value,
            bound
        );
    }

    #[test]
    fn tm_integral_monotone_in_profile() {
        let g = euclid2();
        let small = moser_profile(4.0, 0.0, &g).unwrap();
        let big = small.scale_values(1.5).unwrap();
        let params = TmParams::new(2, 2.0, 0.0)
            .unwrap()
            .with_lambda(2.0)
            .with_p(2.0);
        let a = tm_integral(&small, &params, &g, IntegrandVariant::Phi).unwrap();
        let b = tm_integral(&big, &params, &g, IntegrandVariant::Phi).unwrap();
        assert!(b.value > a.value);
    }

    #[test]
    fn constraint_checks() {
        let g = euclid2();
        let u = moser_profile(8.0, 0.0, &g).unwrap();
        let params = TmParams::new(2, 2.0, 0.0).unwrap();
        let (ok, slack) = constraint_check(&u, &params, &g, ConstraintKind::GradientOnly).unwrap();
        assert!(ok);
        assert!(slack.abs() < 1e-9);

        let z = RadialProfile::zero(g.clone());
        let (ok, slack) = constraint_check(&z, &params, &g, ConstraintKind::SumAb).unwrap();
        assert!(ok);
        assert!((slack - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_profile_sits_on_mixed_constraint() {
        let g = euclid2();
        let a = 2.0;
        let u = moser_profile(16.0, 0.0, &g).unwrap();
        let m = lq_norm(&u, &g, 2.0).unwrap();
        let c = crate::profile::solve_cn(m, a, 2).unwrap();
        let v = u.scale_values(c).unwrap();
        let params = TmParams::new(2, 2.0, 0.0).unwrap().with_ab(a, 2.0);
        let (_, slack) = constraint_check(&v, &params, &g, ConstraintKind::SumAb).unwrap();
        assert!(slack.abs() < 1e-8, "slack {slack}");
    }

    #[test]
    fn ratio_rejects_zero_profile() {
        let g = euclid2();
        let z = RadialProfile::zero(g.clone());
        let params = TmParams::new(2, 2.0, 0.0).unwrap().with_lambda(1.0).with_p(2.0);
        assert!(matches!(
            ratio(&z, &params, &g, Inequality::Subcritical),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn gamma_scaling_identities_max_norm() {
        let g = Gauge::max_norm(2);
        let u = moser_profile(6.0, 1.0, &g).unwrap();
        let c = g.constants().unwrap();
        let params = TmParams::new(2, 2.0, 1.0)
            .unwrap()
            .with_lambda(0.5 * c.lambda)
            .with_p(2.0);
        let rep = gamma_scaling_check(&u, &params, &g).unwrap();
        assert!(rep.dirichlet_rel_diff < 1e-6, "{}", rep.dirichlet_rel_diff);
        assert!(rep.singular_rel_diff < 1e-6, "{}", rep.singular_rel_diff);
    }
}
