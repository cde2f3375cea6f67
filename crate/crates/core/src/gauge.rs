//! Finsler gauges F, their polars F0, Wulff-ball volumes and the derived
//! sharp constants.
//!
//! A gauge here is an even, convex, positively 1-homogeneous function on
//! R^N that is positive away from the origin. Three families are supported:
//! p-norms (including the max-norm limit), ellipsoidal norms given by a
//! symmetric positive-definite matrix, and generic planar gauges described
//! by dense boundary samples of the unit sphere {F = 1}.

use std::sync::Arc;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::numeric::unit_ball_volume;

/// Concrete form of a gauge.
#[derive(Debug, Clone)]
pub enum GaugeForm {
    /// F(xi) = ||xi||_p. `p` may be `f64::INFINITY` (max-norm, whose Wulff
    /// ball is the l1 ball) or 1.0; smooth-gauge operations require
    /// p in (1, inf).
    PNorm { p: f64 },
    /// F(xi) = sqrt(xi^T A xi) for symmetric positive-definite A.
    Ellipsoid {
        a: Arc<Vec<Vec<f64>>>,
        a_inv: Arc<Vec<Vec<f64>>>,
        det_a: f64,
    },
    /// Planar gauge given by boundary radii of {F = 1} at uniformly spaced
    /// angles: radius[j] is the distance from the origin to the boundary in
    /// direction 2*pi*j/M.
    Generic { radius: Arc<Vec<f64>> },
}

/// Derived constants of a gauge: the Wulff volume kappa_N, the Euclidean
/// ball volume omega_N, the critical exponents lambda_N and alpha_N and the
/// shape factor gamma = (kappa_N / omega_N)^(1/N).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaugeConstants {
    pub kappa: f64,
    pub omega: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub gamma: f64,
    /// Relative error estimate of the kappa computation.
    pub kappa_error: f64,
}

/// An immutable gauge. All evaluations are pure; derived constants are
/// computed once and cached.
#[derive(Debug)]
pub struct Gauge {
    dim: usize,
    form: GaugeForm,
    constants: OnceLock<GaugeConstants>,
}

impl Clone for Gauge {
    fn clone(&self) -> Self {
        let g = Gauge {
            dim: self.dim,
            form: self.form.clone(),
            constants: OnceLock::new(),
        };
        if let Some(c) = self.constants.get() {
            let _ = g.constants.set(*c);
        }
        g
    }
}

/// Serializable description of a gauge, the external config format:
/// `{"form": "pnorm", "p": 4.0, "n": 2}` or
/// `{"form": "ellipsoid", "a": [[4.0, 0.0], [0.0, 1.0]]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "form", rename_all = "lowercase")]
pub enum GaugeSpec {
    PNorm { p: f64, n: usize },
    Ellipsoid { a: Vec<Vec<f64>> },
}

impl GaugeSpec {
    pub fn build(&self) -> Result<Gauge> {
        match self {
            GaugeSpec::PNorm { p, n } => Gauge::p_norm(*n, *p),
            GaugeSpec::Ellipsoid { a } => Gauge::ellipsoid(a.clone()),
        }
    }
}

fn invert_spd(a: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, f64)> {
    let n = a.len();
    for row in a {
        if row.len() != n {
            return Err(Error::InvalidParameter("matrix must be square".into()));
        }
    }
    // Gauss-Jordan with partial pivoting; fine for the small N used here.
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].abs() < 1e-14 {
            return Err(Error::InvalidParameter("matrix is singular".into()));
        }
        if piv != col {
            m.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let d = m[col][col];
        det *= d;
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = m[i][col];
                for j in 0..n {
                    m[i][j] -= f * m[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    Ok((inv, det))
}

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(&aij, &xj)| aij * xj).sum())
        .collect()
}

fn quad_form(a: &[Vec<f64>], x: &[f64]) -> f64 {
    mat_vec(a, x).iter().zip(x).map(|(&ax, &xi)| ax * xi).sum()
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl Gauge {
    pub fn p_norm(dim: usize, p: f64) -> Result<Gauge> {
        if dim < 2 {
            return Err(Error::InvalidParameter("dimension must be >= 2".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter(format!("p-norm exponent must be >= 1, got {p}")));
        }
        Ok(Gauge {
            dim,
            form: GaugeForm::PNorm { p },
            constants: OnceLock::new(),
        })
    }

    pub fn euclidean(dim: usize) -> Gauge {
        Gauge::p_norm(dim, 2.0).unwrap()
    }

    /// Max-norm gauge; its Wulff ball is the l1 ball.
    pub fn max_norm(dim: usize) -> Gauge {
        Gauge::p_norm(dim, f64::INFINITY).unwrap()
    }

    pub fn ellipsoid(a: Vec<Vec<f64>>) -> Result<Gauge> {
        let dim = a.len();
        if dim < 2 {
            return Err(Error::InvalidParameter("dimension must be >= 2".into()));
        }
        for i in 0..dim {
            for j in 0..dim {
                if (a[i][j] - a[j][i]).abs() > 1e-12 * (1.0 + a[i][j].abs()) {
                    return Err(Error::InvalidParameter("matrix must be symmetric".into()));
                }
            }
        }
        let (a_inv, det_a) = invert_spd(&a)?;
        if det_a <= 0.0 {
            return Err(Error::InvalidParameter("matrix must be positive definite".into()));
        }
        Ok(Gauge {
            dim,
            form: GaugeForm::Ellipsoid {
                a: Arc::new(a),
                a_inv: Arc::new(a_inv),
                det_a,
            },
            constants: OnceLock::new(),
        })
    }

    /// Planar gauge from an evaluator of F on the unit circle. Stores the
    /// boundary radius 1/F(cos t, sin t) at `samples` uniformly spaced
    /// angles; evaluations interpolate these samples quadratically.
    pub fn generic_2d(samples: usize, f_on_circle: impl Fn(f64, f64) -> f64) -> Result<Gauge> {
        if samples < 16 {
            return Err(Error::InvalidParameter("need at least 16 boundary samples".into()));
        }
        let mut radius = Vec::with_capacity(samples);
        for j in 0..samples {
            let t = 2.0 * std::f64::consts::PI * j as f64 / samples as f64;
            let f = f_on_circle(t.cos(), t.sin());
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::InvalidParameter(
                    "gauge must be positive and finite on the unit circle".into(),
                ));
            }
            radius.push(1.0 / f);
        }
        Ok(Gauge {
            dim: 2,
            form: GaugeForm::Generic { radius: Arc::new(radius) },
            constants: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &GaugeForm {
        &self.form
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.form, GaugeForm::PNorm { p } if p == 2.0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Boundary radius of {F = 1} at angle t (generic planar form only),
    /// by quadratic interpolation of the stored samples.
    fn generic_radius(&self, t: f64) -> f64 {
        let GaugeForm::Generic { radius } = &self.form else {
            unreachable!()
        };
        let m = radius.len();
        let tau = 2.0 * std::f64::consts::PI;
        let x = (t.rem_euclid(tau)) / tau * m as f64;
        let j = x.floor() as usize % m;
        let frac = x - x.floor();
        // Three-point parabola through samples j-1, j, j+1 evaluated at
        // j + frac; periodic indexing.
        let rm = radius[(j + m - 1) % m];
        let r0 = radius[j];
        let rp = radius[(j + 1) % m];
        let a = 0.5 * (rp + rm) - r0;
        let b = 0.5 * (rp - rm);
        r0 + b * frac + a * frac * frac
    }

    /// Evaluate F(xi). Exactly zero iff xi = 0.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        self.check_dim(xi)?;
        if xi.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(match &self.form {
            GaugeForm::PNorm { p } => p_norm_value(xi, *p),
            GaugeForm::Ellipsoid { a, .. } => quad_form(a, xi).sqrt(),
            GaugeForm::Generic { .. } => {
                let t = xi[1].atan2(xi[0]);
                norm2(xi) / self.generic_radius(t)
            }
        })
    }

    /// Evaluate the polar F0(x) = sup_{xi != 0} <x, xi> / F(xi).
    pub fn polar(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        if x.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(match &self.form {
            GaugeForm::PNorm { p } => p_norm_value(x, dual_exponent(*p)),
            GaugeForm::Ellipsoid { a_inv, .. } => quad_form(a_inv, x).sqrt(),
            GaugeForm::Generic { radius } => {
                // Maximize <x, b(t)> over the sampled boundary, then refine
                // locally by golden-section on the interpolated curve.
                let m = radius.len();
                let tau = 2.0 * std::f64::consts::PI;
                let g = |t: f64| {
                    let r = self.generic_radius(t);
                    r * (x[0] * t.cos() + x[1] * t.sin())
                };
                let mut best_j = 0;
                let mut best = f64::NEG_INFINITY;
                for j in 0..m {
                    let t = tau * j as f64 / m as f64;
                    let v = g(t);
                    if v > best {
                        best = v;
                        best_j = j;
                    }
                }
                let step = tau / m as f64;
                let (mut lo, mut hi) = (
                    tau * best_j as f64 / m as f64 - step,
                    tau * best_j as f64 / m as f64 + step,
                );
                // Golden-section maximization.
                let phi = 0.5 * (5.0f64.sqrt() - 1.0);
                let mut c = hi - phi * (hi - lo);
                let mut d = lo + phi * (hi - lo);
                let (mut fc, mut fd) = (g(c), g(d));
                for _ in 0..80 {
                    if fc < fd {
                        lo = c;
                        c = d;
                        fc = fd;
                        d = lo + phi * (hi - lo);
                        fd = g(d);
                    } else {
                        hi = d;
                        d = c;
                        fd = fc;
                        c = hi - phi * (hi - lo);
                        fc = g(c);
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                best.max(fc).max(fd)
            }
        })
    }

    /// Gradient of F at xi != 0: closed form for the p-norm and ellipsoidal
    /// families, central finite differences otherwise.
    pub fn grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(xi)?;
        if xi.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateInput(
                "gauge is not differentiable at the origin".into(),
            ));
        }
        match &self.form {
            GaugeForm::PNorm { p } => Ok(p_norm_grad(xi, *p)),
            GaugeForm::Ellipsoid { a, .. } => {
                let f = quad_form(a, xi).sqrt();
                Ok(mat_vec(a, xi).into_iter().map(|v| v / f).collect())
            }
            GaugeForm::Generic { .. } => self.grad_fd(xi, false),
        }
    }

    /// Gradient of the polar F0 at x != 0.
    pub fn grad_polar(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateInput(
                "polar gauge is not differentiable at the origin".into(),
            ));
        }
        match &self.form {
            GaugeForm::PNorm { p } => Ok(p_norm_grad(x, dual_exponent(*p))),
            GaugeForm::Ellipsoid { a_inv, .. } => {
                let f = quad_form(a_inv, x).sqrt();
                Ok(mat_vec(a_inv, x).into_iter().map(|v| v / f).collect())
            }
            GaugeForm::Generic { .. } => self.grad_fd(x, true),
        }
    }

    fn grad_fd(&self, x: &[f64], polar: bool) -> Result<Vec<f64>> {
        let h = 1e-6 * norm2(x).max(1.0);
        let mut g = vec![0.0; self.dim];
        let mut xp = x.to_vec();
        for i in 0..self.dim {
            xp[i] = x[i] + h;
            let fp = if polar { self.polar(&xp)? } else { self.eval(&xp)? };
            xp[i] = x[i] - h;
            let fm = if polar { self.polar(&xp)? } else { self.eval(&xp)? };
            xp[i] = x[i];
            g[i] = (fp - fm) / (2.0 * h);
        }
        Ok(g)
    }

    /// Closed-form Wulff volume when the family admits one.
    pub fn wulff_volume_closed_form(&self) -> Option<f64> {
        match &self.form {
            GaugeForm::PNorm { p } => {
                // The Wulff ball of the p-norm gauge is the dual-exponent ball.
                let pd = dual_exponent(*p);
                let n = self.dim as f64;
                if pd.is_infinite() {
                    Some(2f64.powi(self.dim as i32))
                } else {
                    Some(2f64.powf(n) * gamma(1.0 + 1.0 / pd).powf(n) / gamma(1.0 + n / pd))
                }
            }
            GaugeForm::Ellipsoid { det_a, .. } => Some(unit_ball_volume(self.dim) * det_a.sqrt()),
            GaugeForm::Generic { .. } => None,
        }
    }

    /// Wulff volume kappa_N = |{x : F0(x) <= 1}| by adaptive quadrature in
    /// polar coordinates; returns (value, relative error estimate).
    pub fn wulff_volume_quadrature(&self, rel_tol: f64) -> Result<(f64, f64)> {
        match self.dim {
            2 => {
                let f = |t: f64| {
                    let rho = 1.0 / self.polar(&[t.cos(), t.sin()]).unwrap();
                    0.5 * rho * rho
                };
                adaptive_periodic(&f, 2.0 * std::f64::consts::PI, 64, rel_tol)
            }
            3 => {
                let f = |t: f64, ph: f64| {
                    let w = [ph.sin() * t.cos(), ph.sin() * t.sin(), ph.cos()];
                    let rho = 1.0 / self.polar(&w).unwrap();
                    rho.powi(3) / 3.0 * ph.sin()
                };
                adaptive_sphere(&f, 32, rel_tol)
            }
            n => Err(Error::InvalidParameter(format!(
                "Wulff volume quadrature implemented for N in {{2, 3}}, got {n}"
            ))),
        }
    }

    /// Wulff volume; closed form where available, quadrature otherwise.
    pub fn wulff_volume(&self) -> Result<f64> {
        if let Some(v) = self.wulff_volume_closed_form() {
            return Ok(v);
        }
        Ok(self.wulff_volume_quadrature(1e-5)?.0)
    }

    /// All derived constants, cached after the first call.
    pub fn constants(&self) -> Result<&GaugeConstants> {
        if let Some(c) = self.constants.get() {
            return Ok(c);
        }
        let n = self.dim as f64;
        let (kappa, kappa_error) = match self.wulff_volume_closed_form() {
            Some(v) => (v, 0.0),
            None => self.wulff_volume_quadrature(1e-5)?,
        };
        let omega = unit_ball_volume(self.dim);
        let c = GaugeConstants {
            kappa,
            omega,
            lambda: n.powf(n / (n - 1.0)) * kappa.powf(1.0 / (n - 1.0)),
            alpha: n.powf(n / (n - 1.0)) * omega.powf(1.0 / (n - 1.0)),
            gamma: (kappa / omega).powf(1.0 / n),
            kappa_error,
        };
        let _ = self.constants.set(c);
        Ok(self.constants.get().unwrap())
    }

    /// Surface integral of 1 / |grad F0| over the Wulff sphere {F0 = r},
    /// computed by quadrature on an angular parametrization. The coarea
    /// identity predicts N * kappa_N * r^(N-1).
    pub fn wulff_sphere_coarea_integral(&self, r: f64, rel_tol: f64) -> Result<(f64, f64)> {
        if r <= 0.0 {
            return Err(Error::InvalidParameter("radius must be positive".into()));
        }
        match self.dim {
            2 => {
                let point = |t: f64| -> [f64; 2] {
                    let w = [t.cos(), t.sin()];
                    let rho = r / self.polar(&w).unwrap();
                    [rho * w[0], rho * w[1]]
                };
                let f = |t: f64| {
                    let h = 1e-5;
                    let xp = point(t + h);
                    let xm = point(t - h);
                    let speed = ((xp[0] - xm[0]).powi(2) + (xp[1] - xm[1]).powi(2)).sqrt() / (2.0 * h);
                    let x = point(t);
                    speed / norm2(&self.grad_polar(&x).unwrap())
                };
                adaptive_periodic(&f, 2.0 * std::f64::consts::PI, 128, rel_tol)
            }
            3 => {
                let point = |t: f64, ph: f64| -> [f64; 3] {
                    let w = [ph.sin() * t.cos(), ph.sin() * t.sin(), ph.cos()];
                    let rho = r / self.polar(&w).unwrap();
                    [rho * w[0], rho * w[1], rho * w[2]]
                };
                let f = |t: f64, ph: f64| {
                    let h = 1e-5;
                    let dt: Vec<f64> = {
                        let p = point(t + h, ph);
                        let m = point(t - h, ph);
                        (0..3).map(|i| (p[i] - m[i]) / (2.0 * h)).collect()
                    };
                    let dp: Vec<f64> = {
                        let p = point(t, ph + h);
                        let m = point(t, ph - h);
                        (0..3).map(|i| (p[i] - m[i]) / (2.0 * h)).collect()
                    };
                    let cross = [
                        dt[1] * dp[2] - dt[2] * dp[1],
                        dt[2] * dp[0] - dt[0] * dp[2],
                        dt[0] * dp[1] - dt[1] * dp[0],
                    ];
                    let x = point(t, ph);
                    norm2(&cross) / norm2(&self.grad_polar(&x).unwrap())
                };
                adaptive_sphere(&f, 48, rel_tol)
            }
            n => Err(Error::InvalidParameter(format!(
                "coarea integral implemented for N in {{2, 3}}, got {n}"
            ))),
        }
    }
}

fn dual_exponent(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

fn p_norm_value(x: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    }
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    // Scale out the max to avoid overflow for large p.
    let m = x.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    m * x
        .iter()
        .map(|&v| (v.abs() / m).powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

fn p_norm_grad(x: &[f64], p: f64) -> Vec<f64> {
    if p.is_infinite() || p == 1.0 {
        // Subgradient choice at kinks: for the max-norm concentrate on the
        // largest component, for the 1-norm take signs.
        if p == 1.0 {
            return x.iter().map(|&v| v.signum()).collect();
        }
        let mut g = vec![0.0; x.len()];
        let (imax, _) = x
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        g[imax] = x[imax].signum();
        return g;
    }
    let f = p_norm_value(x, p);
    x.iter()
        .map(|&v| v.signum() * (v.abs() / f).powf(p - 1.0))
        .collect()
}

/// Composite midpoint rule over one period, doubled until the relative
/// change drops below `rel_tol`. Returns (value, relative error estimate).
fn adaptive_periodic(
    f: &dyn Fn(f64) -> f64,
    period: f64,
    start: usize,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let mut m = start;
    let mut prev = f64::NAN;
    for _ in 0..14 {
        let h = period / m as f64;
        let mut acc = 0.0;
        for j in 0..m {
            acc += f((j as f64 + 0.5) * h);
        }
        let val = acc * h;
        if prev.is_finite() {
            let rel = (val - prev).abs() / val.abs().max(f64::MIN_POSITIVE);
            if rel <= rel_tol {
                return Ok((val, rel));
            }
        }
        prev = val;
        m *= 2;
    }
    Err(Error::QuadratureBudget { achieved: f64::NAN })
}

/// Midpoint product rule over the sphere parameter square
/// (theta, phi) in [0, 2 pi] x [0, pi], doubled until stable.
fn adaptive_sphere(
    f: &dyn Fn(f64, f64) -> f64,
    start: usize,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let mut m = start;
    let mut prev = f64::NAN;
    for _ in 0..8 {
        let ht = 2.0 * std::f64::consts::PI / (2 * m) as f64;
        let hp = std::f64::consts::PI / m as f64;
        let mut acc = 0.0;
        for i in 0..(2 * m) {
            let t = (i as f64 + 0.5) * ht;
            for j in 0..m {
                let ph = (j as f64 + 0.5) * hp;
                acc += f(t, ph);
            }
        }
        let val = acc * ht * hp;
        if prev.is_finite() {
            let rel = (val - prev).abs() / val.abs().max(f64::MIN_POSITIVE);
            if rel <= rel_tol {
                return Ok((val, rel));
            }
        }
        prev = val;
        m *= 2;
    }
    Err(Error::QuadratureBudget { achieved: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn euclidean_eval() {
        let g = Gauge::euclidean(2);
        assert_eq!(g.eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(g.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn l4_eval() {
        let g = Gauge::p_norm(2, 4.0).unwrap();
        let v = g.eval(&[1.0, 1.0]).unwrap();
        assert!((v - 2f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = Gauge::euclidean(2);
        assert!(matches!(
            g.eval(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn l1_polar_is_max_norm() {
        let g = Gauge::p_norm(2, 1.0).unwrap();
        assert!((g.polar(&[1.0, -2.0]).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn euclidean_polar_is_self_dual() {
        let g = Gauge::euclidean(2);
        assert!((g.polar(&[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn ellipsoid_polar_closed_form() {
        let g = Gauge::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((g.polar(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn euclidean_grad_is_unit_direction() {
        let g = Gauge::euclidean(2);
        let gr = g.grad(&[3.0, 4.0]).unwrap();
        assert!((gr[0] - 0.6).abs() < 1e-14);
        assert!((gr[1] - 0.8).abs() < 1e-14);
    }

    #[test]
    fn l4_grad_closed_form() {
        let g = Gauge::p_norm(2, 4.0).unwrap();
        let gr = g.grad(&[1.0, 1.0]).unwrap();
        let expected = 2f64.powf(-0.75);
        assert!((gr[0] - expected).abs() < 1e-12);
        assert!((gr[1] - expected).abs() < 1e-12);
    }

    #[test]
    fn euler_identity_on_samples() {
        for g in [
            Gauge::p_norm(2, 4.0).unwrap(),
            Gauge::ellipsoid(vec![vec![4.0, 0.5], vec![0.5, 1.0]]).unwrap(),
        ] {
            for xi in [[1.0, 2.0], [-0.3, 0.7], [5.0, -0.1]] {
                let f = g.eval(&xi).unwrap();
                let gr = g.grad(&xi).unwrap();
                let dot: f64 = xi.iter().zip(&gr).map(|(a, b)| a * b).sum();
                assert!((dot - f).abs() <= 1e-6 * f, "euler residual too large");
            }
        }
    }

    #[test]
    fn polar_of_gradient_is_one() {
        for g in [
            Gauge::p_norm(2, 4.0).unwrap(),
            Gauge::p_norm(3, 3.0).unwrap(),
            Gauge::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ] {
            let xi: Vec<f64> = (0..g.dim()).map(|i| 0.5 + i as f64).collect();
            let gr = g.grad(&xi).unwrap();
            assert!((g.polar(&gr).unwrap() - 1.0).abs() < 1e-5);
            let gp = g.grad_polar(&xi).unwrap();
            assert!((g.eval(&gp).unwrap() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn disk_area() {
        let g = Gauge::euclidean(2);
        let (v, _) = g.wulff_volume_quadrature(1e-6).unwrap();
        assert!((v - PI).abs() < 1e-3);
    }

    #[test]
    fn max_norm_wulff_ball_is_l1_ball() {
        let g = Gauge::max_norm(2);
        let (v, _) = g.wulff_volume_quadrature(1e-6).unwrap();
        assert!((v - 2.0).abs() < 1e-3);
        assert!((g.wulff_volume_closed_form().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ellipse_area() {
        let g = Gauge::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (v, _) = g.wulff_volume_quadrature(1e-6).unwrap();
        assert!((v - 2.0 * PI).abs() < 1e-2);
        assert!((g.wulff_volume_closed_form().unwrap() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn constants_euclidean_2d() {
        let g = Gauge::euclidean(2);
        let c = g.constants().unwrap();
        assert!((c.lambda - 4.0 * PI).abs() < 1e-9);
        assert!((c.alpha - 4.0 * PI).abs() < 1e-9);
        assert!((c.gamma - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constants_max_norm_2d() {
        let g = Gauge::max_norm(2);
        let c = g.constants().unwrap();
        assert!((c.lambda - 8.0).abs() < 1e-9);
        assert!((c.gamma - (2.0 / PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn constants_euclidean_any_n_lambda_equals_alpha() {
        for n in [2, 3] {
            let g = Gauge::euclidean(n);
            let c = g.constants().unwrap();
            assert!((c.lambda - c.alpha).abs() < 1e-10 * c.lambda);
            assert!((c.kappa - c.omega).abs() < 1e-10 * c.kappa);
        }
    }

    #[test]
    fn generic_gauge_tracks_l4() {
        let l4 = Gauge::p_norm(2, 4.0).unwrap();
        let gen = Gauge::generic_2d(4096, |x, y| {
            (x.abs().powi(4) + y.abs().powi(4)).powf(0.25)
        })
        .unwrap();
        for xi in [[1.0, 2.0], [-0.5, 0.3], [2.0, -2.0]] {
            let a = l4.eval(&xi).unwrap();
            let b = gen.eval(&xi).unwrap();
            assert!((a - b).abs() < 1e-6 * a.abs());
            let pa = l4.polar(&xi).unwrap();
            let pb = gen.polar(&xi).unwrap();
            assert!((pa - pb).abs() < 1e-6 * pa.abs(), "{pa} vs {pb}");
        }
    }

    #[test]
    fn coarea_integral_matches_constant_2d() {
        for g in [
            Gauge::euclidean(2),
            Gauge::p_norm(2, 4.0).unwrap(),
            Gauge::ellipsoid(vec![vec![4.0, 0.0], vec![0.0, 1.0]]).unwrap(),
        ] {
            let c = *g.constants().unwrap();
            for r in [0.5, 1.0, 2.0] {
                let (v, _) = g.wulff_sphere_coarea_integral(r, 1e-6).unwrap();
                let pred = 2.0 * c.kappa * r;
                assert!(
                    (v - pred).abs() < 1e-3 * pred,
                    "coarea mismatch: {v} vs {pred}"
                );
            }
        }
    }

    #[test]
    fn gauge_spec_roundtrip() {
        let spec = GaugeSpec::PNorm { p: 4.0, n: 2 };
        let s = serde_json::to_string(&spec).unwrap();
        let back: GaugeSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
        back.build().unwrap();
    }
}
