//! The weighted-norm sequence minimization mu(h) and the discrete tail
//! bound connecting a profile's far-field decay to its L^q mass.
//!
//! mu(h) = inf { (sum a_k^q e^k)^(1/q) : a_k >= 0, sum a_k = h,
//! sum a_k^N <= 1 }. The problem is convex; the solver resolves the KKT
//! system by nested bisection on the two multipliers and then polishes
//! with random-restart projected descent.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::numeric::sub_seed;
use crate::profile::RadialProfile;

/// Nonnegative truncated sequence with the exponents it is scored under.
#[derive(Debug, Clone)]
pub struct SeqVector {
    pub entries: Vec<f64>,
    pub q: f64,
    pub n: f64,
}

impl SeqVector {
    pub fn new(entries: Vec<f64>, q: f64, n: f64) -> Result<SeqVector> {
        if entries.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if entries.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidParameter(
                "sequence entries must be finite and nonnegative".into(),
            ));
        }
        if !(q >= 1.0 && n > 1.0) {
            return Err(Error::InvalidParameter("need q >= 1 and N > 1".into()));
        }
        Ok(SeqVector { entries, q, n })
    }
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SeqNorms {
    pub l1: f64,
    pub ln: f64,
    pub weighted: f64,
}

/// The three norms of the minimization: l1, lN and the exponentially
/// weighted lq norm.
pub fn seq_norms(a: &SeqVector) -> SeqNorms {
    let l1 = a.entries.iter().sum();
    let ln = a
        .entries
        .iter()
        .map(|x| x.powf(a.n))
        .sum::<f64>()
        .powf(1.0 / a.n);
    let weighted = a
        .entries
        .iter()
        .enumerate()
        .map(|(k, x)| x.powf(a.q) * (k as f64).exp())
        .sum::<f64>()
        .powf(1.0 / a.q);
    SeqNorms { l1, ln, weighted }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveConstraint {
    L1Only,
    Both,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MuResult {
    pub mu_upper: f64,
    pub kkt_residual: f64,
    pub active_constraint: ActiveConstraint,
    #[serde(skip)]
    pub minimizer: Vec<f64>,
}

/// Default truncation length; the minimizer's mass sits below
/// k of order h^(N/(N-1)).
pub fn default_truncation(h: f64, n: f64) -> usize {
    64usize.max((4.0 * h.powf(n / (n - 1.0))).ceil() as usize)
}

/// Entry solving q a^(q-1) e^k + rho N a^(N-1) = mu for a >= 0.
fn stationary_entry(mu: f64, rho: f64, ek: f64, q: f64, n: f64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if q == 2.0 && n == 2.0 {
        return mu / (2.0 * (ek + rho));
    }
    if q == 1.0 {
        // Linear objective term: e^k + rho N a^(N-1) = mu.
        if ek >= mu {
            return 0.0;
        }
        if rho == 0.0 {
            return f64::INFINITY;
        }
        return ((mu - ek) / (rho * n)).powf(1.0 / (n - 1.0));
    }
    let f = |a: f64| q * a.powf(q - 1.0) * ek + rho * n * a.powf(n - 1.0) - mu;
    let mut hi = (mu / (q * ek)).powf(1.0 / (q - 1.0));
    if rho > 0.0 {
        hi = hi.min((mu / (rho * n)).powf(1.0 / (n - 1.0)));
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn kkt_point(mu: f64, rho: f64, k: usize, q: f64, n: f64) -> Vec<f64> {
    (0..=k)
        .map(|i| stationary_entry(mu, rho, (i as f64).exp(), q, n))
        .collect()
}

/// mu multiplier making the entry sum equal h at fixed rho.
fn solve_mu_for_sum(h: f64, rho: f64, k: usize, q: f64, n: f64) -> (f64, Vec<f64>) {
    let sum_at = |mu: f64| -> f64 {
        let a = kkt_point(mu, rho, k, q, n);
        a.iter().sum()
    };
    let mut hi = 1.0;
    while sum_at(hi) < h {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if sum_at(mid) > h {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    (mu, kkt_point(mu, rho, k, q, n))
}

fn objective_q(a: &[f64], q: f64) -> f64 {
    a.iter()
        .enumerate()
        .map(|(k, x)| {
            if *x > 0.0 {
                x.powf(q) * (k as f64).exp()
            } else {
                0.0
            }
        })
        .sum()
}

fn ln_norm(a: &[f64], n: f64) -> f64 {
    a.iter()
        .map(|x| if *x > 0.0 { x.powf(n) } else { 0.0 })
        .sum::<f64>()
        .powf(1.0 / n)
}

/// Scale to the simplex {sum = h, a >= 0}.
fn project_mass(a: &mut [f64], h: f64) {
    for x in a.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s: f64 = a.iter().sum();
    if s > 0.0 {
        let c = h / s;
        for x in a.iter_mut() {
            *x *= c;
        }
    } else {
        a[0] = h;
    }
}

/// Projected-descent polish from a random start; penalty enforces the
/// lN cap.
fn descent_start(
    h: f64,
    q: f64,
    n: f64,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let decay = if q > 1.0 { 1.0 / (q - 1.0) } else { 1.5 };
    let mut a: Vec<f64> = (0..=k)
        .map(|i| (-(i as f64) * decay).exp() * rng.gen_range(0.5..1.5))
        .collect();
    project_mass(&mut a, h);
    let mut penalty = 10.0;
    let mut step = 0.1 * h / (k as f64 + 1.0);
    for iter in 0..400 {
        if iter % 80 == 79 {
            penalty *= 10.0;
        }
        let ln_pow: f64 = a.iter().map(|x| x.powf(n)).sum();
        let viol = (ln_pow - 1.0).max(0.0);
        let mut best = a.clone();
        let mut best_val = objective_q(&a, q) + penalty * viol * viol;
        // Coordinate-pair mass transfers keep the simplex constraint exact.
        for _ in 0..(k + 1) {
            let i = rng.gen_range(0..=k);
            let j = rng.gen_range(0..=k);
            if i == j {
                continue;
            }
            let delta = step.min(a[i]);
            if delta <= 0.0 {
                continue;
            }
            let mut cand = a.clone();
            cand[i] -= delta;
            cand[j] += delta;
            let lp: f64 = cand.iter().map(|x| x.powf(n)).sum();
            let v = (lp - 1.0).max(0.0);
            let val = objective_q(&cand, q) + penalty * v * v;
            if val < best_val {
                best_val = val;
                best = cand;
            }
        }
        if best_val >= objective_q(&a, q) + penalty * viol * viol {
            step *= 0.7;
            if step < 1e-12 * h {
                break;
            }
        } else {
            a = best;
        }
    }
    // Final hard projection into the feasible set.
    project_mass(&mut a, h);
    let ln = ln_norm(&a, n);
    if ln > 1.0 {
        // Push mass upward in k to restore the cap while keeping the sum.
        for _ in 0..200 {
            if ln_norm(&a, n) <= 1.0 {
                break;
            }
            let imax = (0..a.len())
                .max_by(|&i, &j| a[i].partial_cmp(&a[j]).unwrap())
                .unwrap();
            let shift = 0.02 * a[imax];
            a[imax] -= shift;
            let last = a.len() - 1;
            a[last] += shift;
        }
    }
    a
}

/// Estimate mu(h) for exponents (q, N) with truncation length K and a
/// number of random polish starts. The returned value is the objective of
/// a feasible point, so always an upper bound on the infimum.
pub fn mu_estimate(
    h: f64,
    q: f64,
    n: f64,
    k: usize,
    starts: usize,
    seed: u64,
) -> Result<MuResult> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("h must be positive".into()));
    }
    if !(q >= 1.0 && n > 1.0) {
        return Err(Error::InvalidParameter("need q >= 1 and N > 1".into()));
    }
    let cap = ((k + 1) as f64).powf((n - 1.0) / n);
    if h > cap {
        return Err(Error::Infeasible(format!(
            "h = {h} exceeds the truncation's mass capacity {cap:.6}"
        )));
    }

    // Multiplier solve: first try the lN cap inactive.
    let (mu0, a0) = solve_mu_for_sum(h, 0.0, k, q, n);
    let (mut mu_mult, mut rho, mut a) = if q > 1.0 && ln_norm(&a0, n) <= 1.0 {
        (mu0, 0.0, a0)
    } else {
        // Bisect rho so the lN norm comes back to 1.
        let norm_at = |rho: f64| {
            let (_, a) = solve_mu_for_sum(h, rho, k, q, n);
            ln_norm(&a, n)
        };
        let mut rho_hi = 1.0;
        while norm_at(rho_hi) > 1.0 {
            rho_hi *= 2.0;
            if rho_hi > 1e300 {
                break;
            }
        }
        let mut rho_lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (rho_lo + rho_hi);
            if norm_at(mid) > 1.0 {
                rho_lo = mid;
            } else {
                rho_hi = mid;
            }
        }
        let rho = rho_hi;
        let (mu, a) = solve_mu_for_sum(h, rho, k, q, n);
        (mu, rho, a)
    };

    // Enforce feasibility of the reported point exactly.
    project_mass(&mut a, h);
    if ln_norm(&a, n) > 1.0 + 1e-12 {
        // Numerical overshoot of the cap: tighten rho slightly.
        for _ in 0..60 {
            rho *= 1.0 + 1e-10;
            let (mu2, mut a2) = solve_mu_for_sum(h, rho, k, q, n);
            project_mass(&mut a2, h);
            if ln_norm(&a2, n) <= 1.0 + 1e-12 {
                mu_mult = mu2;
                a = a2;
                break;
            }
        }
    }
    let mut best = a;
    let mut best_obj = objective_q(&best, q);

    for s in 0..starts {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, s as u64));
        let cand = descent_start(h, q, n, k, &mut rng);
        if ln_norm(&cand, n) <= 1.0 + 1e-10 {
            let obj = objective_q(&cand, q);
            if obj < best_obj {
                best_obj = obj;
                best = cand;
            }
        }
    }

    // First-order residual of the reported point against the multipliers.
    let mut residual = 0.0f64;
    for (i, &x) in best.iter().enumerate() {
        if x > 1e-14 * h {
            let r = q * x.powf(q - 1.0) * (i as f64).exp() + rho * n * x.powf(n - 1.0) - mu_mult;
            residual = residual.max((r / mu_mult.max(1e-300)).abs());
        }
    }
    let active = if rho > 0.0 {
        ActiveConstraint::Both
    } else {
        ActiveConstraint::L1Only
    };
    Ok(MuResult {
        mu_upper: best_obj.powf(1.0 / q),
        kkt_residual: residual,
        active_constraint: active,
        minimizer: best,
    })
}

/// mu_estimate with the default truncation and start count.
pub fn mu_estimate_default(h: f64, q: f64, n: f64, seed: u64) -> Result<MuResult> {
    mu_estimate(h, q, n, default_truncation(h, n), 4, seed)
}

/// Leading-order growth law exp(h^(N/(N-1))/q) / h^(1/(N-1)), valid for
/// h > 1.
pub fn mu_asymptotic(h: f64, q: f64, n: f64) -> Result<f64> {
    if !(h > 1.0) {
        return Err(Error::InvalidParameter(
            "asymptotic formula requires h > 1".into(),
        ));
    }
    Ok((h.powf(n / (n - 1.0)) / q).exp() / h.powf(1.0 / (n - 1.0)))
}

/// Report of the discrete tail bound: a pointwise exponential of u(R)
/// against the L^q mass of the tail, both in the log domain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TailReport {
    pub h0: f64,
    pub a_ln_norm: f64,
    pub a_l1: f64,
    pub lhs_log: f64,
    pub rhs_log: f64,
    pub log_constant: f64,
    pub constant: f64,
}

/// Verify the hypotheses and evaluate both sides of the tail bound:
/// exp(lambda_N K^(1/(1-N)) u(R)^(N/(N-1))) / u(R)^(q/(N-1)) * R^N
/// against int_R^inf u^q r^(N-1) dr / K^(q/(N-1)).
///
/// The discretization h_k = N (kappa/K)^(1/N) u(R e^(k/N)),
/// a_k = h_k - h_(k+1) is built along the way; its l1 norm telescopes to
/// h_0 and its lN norm is checked against 1.
pub fn exp_tail_check(
    u: &RadialProfile,
    r_base: f64,
    k_energy: f64,
    g: &Gauge,
    q: f64,
) -> Result<TailReport> {
    let n = g.dim() as f64;
    if !(r_base > 0.0 && k_energy > 0.0 && q >= 1.0) {
        return Err(Error::InvalidParameter(
            "need R > 0, K > 0, q >= 1".into(),
        ));
    }
    let c = g.constants()?;
    let u_r = u.eval(r_base);
    let threshold = (1.0 / n) * (k_energy / c.kappa).powf(1.0 / n);
    if !(u_r > threshold) {
        return Err(Error::HypothesesViolated(format!(
            "u(R) = {u_r:.6e} not above the threshold {threshold:.6e}"
        )));
    }
    let tail_energy = crate::functionals::dirichlet_integral_from(u, g, r_base)?;
    if tail_energy > k_energy * (1.0 + 1e-9) {
        return Err(Error::HypothesesViolated(format!(
            "tail energy {tail_energy:.6e} exceeds the budget {k_energy:.6e}"
        )));
    }

    let scale = n * (c.kappa / k_energy).powf(1.0 / n);
    let mut hs = Vec::new();
    let mut k = 0usize;
    loop {
        let r = r_base * ((k as f64) / n).exp();
        let v = scale * u.eval(r);
        hs.push(v);
        if v == 0.0 || r > u.support_radius() {
            break;
        }
        k += 1;
        if k > 100_000 {
            return Err(Error::NonConvergence { residual: v });
        }
    }
    let a: Vec<f64> = hs.windows(2).map(|w| w[0] - w[1]).collect();
    let a_l1: f64 = a.iter().sum();
    let a_ln_norm = ln_norm(&a, n);

    let lhs_log = c.lambda * k_energy.powf(1.0 / (1.0 - n)) * u_r.powf(n / (n - 1.0))
        - q / (n - 1.0) * u_r.ln()
        + n * r_base.ln();
    let tail_mass = crate::functionals::radial_lq_integral(u, q, r_base);
    if tail_mass <= 0.0 {
        return Err(Error::DegenerateInput("profile has no mass beyond R".into()));
    }
    let rhs_log = tail_mass.ln() - q / (n - 1.0) * k_energy.ln();
    let log_constant = lhs_log - rhs_log;
    Ok(TailReport {
        h0: hs[0],
        a_ln_norm,
        a_l1,
        lhs_log,
        rhs_log,
        log_constant,
        constant: log_constant.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::moser_profile;

    #[test]
    fn seq_norms_examples() {
        let a = SeqVector::new(vec![1.0, 0.0, 0.0], 2.0, 2.0).unwrap();
        let s = seq_norms(&a);
        assert!((s.l1 - 1.0).abs() < 1e-15);
        assert!((s.ln - 1.0).abs() < 1e-15);
        assert!((s.weighted - 1.0).abs() < 1e-15);

        let b = SeqVector::new(vec![1.0, 1.0], 2.0, 2.0).unwrap();
        let s = seq_norms(&b);
        assert!((s.l1 - 2.0).abs() < 1e-15);
        assert!((s.ln - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.weighted - (1.0 + std::f64::consts::E).sqrt()).abs() < 1e-12);

        let z = SeqVector::new(vec![0.0, 0.0], 2.0, 2.0).unwrap();
        let s = seq_norms(&z);
        assert_eq!((s.l1, s.ln, s.weighted), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mu_lagrange_closed_form() {
        // h = 1, q = 2, N = 2: cap inactive, minimizer
        // a_k = (1 - 1/e) e^-k, value sqrt(1 - 1/e).
        let res = mu_estimate(1.0, 2.0, 2.0, 64, 4, 42).unwrap();
        let exact = (1.0 - (-1.0f64).exp()).sqrt();
        assert!(res.mu_upper <= exact + 1e-4, "{} vs {exact}", res.mu_upper);
        assert!(res.mu_upper >= 0.99 * exact);
        assert_eq!(res.active_constraint, ActiveConstraint::L1Only);
        assert!(res.kkt_residual < 1e-6, "residual {}", res.kkt_residual);
        // lN norm of the closed form is about 0.68, well inside the cap.
        let ln2: f64 = res.minimizer.iter().map(|x| x * x).sum();
        assert!((ln2 - 0.4621).abs() < 0.01, "{ln2}");
    }

    #[test]
    fn mu_single_spike_for_linear_weight() {
        // q = 1, h <= 1: concentrating everything at k = 0 is optimal.
        let res = mu_estimate(0.7, 1.0, 2.0, 64, 4, 1).unwrap();
        assert!((res.mu_upper - 0.7).abs() < 1e-6, "{}", res.mu_upper);
    }

    #[test]
    fn mu_asymptotic_values() {
        let v = mu_asymptotic(2.0, 2.0, 2.0).unwrap();
        assert!((v - 2f64.exp() * 0.5).abs() < 1e-12);
        let v3 = mu_asymptotic(3.0, 2.0, 2.0).unwrap();
        assert!((v3 - 30.0).abs() < 0.1, "{v3}");
        assert!(mu_asymptotic(1.0, 2.0, 2.0).is_err());
        let mut prev = 0.0;
        for h in [1.5, 2.0, 3.0, 4.0] {
            let v = mu_asymptotic(h, 2.0, 2.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn mu_within_factor_of_asymptotic() {
        let res = mu_estimate_default(3.0, 2.0, 2.0, 5).unwrap();
        let asym = mu_asymptotic(3.0, 2.0, 2.0).unwrap();
        let ratio = res.mu_upper / asym;
        assert!(ratio > 0.05 && ratio < 20.0, "ratio {ratio}");
        assert_eq!(res.active_constraint, ActiveConstraint::Both);
    }

    #[test]
    fn mu_monotone_in_h() {
        let mut prev = 0.0;
        for h in [0.5, 1.0, 2.0, 3.0] {
            let res = mu_estimate_default(h, 2.0, 2.0, 9).unwrap();
            assert!(res.mu_upper > prev, "h = {h}: {} <= {prev}", res.mu_upper);
            prev = res.mu_upper;
        }
    }

    #[test]
    fn mu_infeasible_h() {
        assert!(matches!(
            mu_estimate(100.0, 2.0, 2.0, 16, 1, 0),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn tail_check_on_moser_profile() {
        let g = Gauge::euclidean(2);
        let u = moser_profile(16.0, 0.0, &g).unwrap();
        // R inside the log region, total energy 1 bounds any tail.
        let r = 0.01;
        let rep = exp_tail_check(&u, r, 1.0, &g, 2.0).unwrap();
        assert!(rep.a_ln_norm <= 1.0 + 1e-9, "lN {}", rep.a_ln_norm);
        // l1 of the differences telescopes to h_0.
        assert!((rep.a_l1 - rep.h0).abs() < 1e-12 * rep.h0);
        assert!(rep.log_constant.is_finite());
    }

    #[test]
    fn tail_check_rejects_small_boundary_value() {
        let g = Gauge::euclidean(2);
        let u = moser_profile(4.0, 0.0, &g).unwrap();
        // Near the support edge u is tiny: hypothesis fails.
        assert!(matches!(
            exp_tail_check(&u, 0.9, 1.0, &g, 2.0),
            Err(Error::HypothesesViolated(_))
        ));
    }
}
