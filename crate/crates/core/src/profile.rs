//! Wulff-radial functions as 1-D profiles on a log-spaced radial grid.
//!
//! A profile stores nonincreasing nodal values u(r_i); between nodes the
//! value is interpolated linearly in ln r, and u is constant at its first
//! nodal value on the inner plateau [0, r_0]. The extremal sequences used
//! by the sharpness sweeps are exactly piecewise linear in ln r, so this
//! representation carries them without interpolation error.

use crate::error::{Error, Result};
use crate::gauge::Gauge;

#[derive(Debug, Clone)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    support_radius: f64,
    gauge: Gauge,
}

/// One log-linear segment of a profile: values v0 -> v1 over
/// s = ln r in [s0, s1].
#[derive(Debug, Clone, Copy)]
pub struct LogSegment {
    pub s0: f64,
    pub s1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl LogSegment {
    pub fn slope(&self) -> f64 {
        (self.v1 - self.v0) / (self.s1 - self.s0)
    }
}

impl RadialProfile {
    /// Build a profile from sorted positive radii and nonincreasing values.
    pub fn from_nodes(radii: Vec<f64>, values: Vec<f64>, gauge: Gauge) -> Result<RadialProfile> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(Error::InvalidParameter(
                "profile needs equally many radii and values".into(),
            ));
        }
        for w in radii.windows(2) {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::InvalidParameter(
                    "radii must be positive and strictly increasing".into(),
                ));
            }
        }
        for w in values.windows(2) {
            if w[1] > w[0] + 1e-15 * w[0].abs() {
                return Err(Error::InvalidParameter("values must be nonincreasing".into()));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter("values must be finite and nonnegative".into()));
        }
        let support_radius = *radii.last().unwrap();
        Ok(RadialProfile {
            radii,
            values,
            support_radius,
            gauge,
        })
    }

    pub fn zero(gauge: Gauge) -> RadialProfile {
        RadialProfile {
            radii: vec![1.0],
            values: vec![0.0],
            support_radius: 1.0,
            gauge,
        }
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Value at the origin (the plateau value).
    pub fn peak(&self) -> f64 {
        self.values[0]
    }

    /// Inner plateau radius r_0.
    pub fn plateau_radius(&self) -> f64 {
        self.radii[0]
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r >= self.support_radius {
            return if r == self.support_radius {
                *self.values.last().unwrap()
            } else {
                0.0
            };
        }
        if r <= self.radii[0] {
            return self.values[0];
        }
        let idx = match self
            .radii
            .binary_search_by(|probe| probe.partial_cmp(&r).unwrap())
        {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (r0, r1) = (self.radii[idx - 1], self.radii[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        let t = (r.ln() - r0.ln()) / (r1.ln() - r0.ln());
        v0 + t * (v1 - v0)
    }

    /// Interpolant derivative u'(r) from segment slopes (zero on the
    /// plateau and beyond the support).
    pub fn derivative(&self, r: f64) -> f64 {
        if r <= self.radii[0] || r >= self.support_radius {
            return 0.0;
        }
        let idx = match self
            .radii
            .binary_search_by(|probe| probe.partial_cmp(&r).unwrap())
        {
            Ok(i) => i.max(1),
            Err(i) => i,
        };
        let seg = LogSegment {
            s0: self.radii[idx - 1].ln(),
            s1: self.radii[idx].ln(),
            v0: self.values[idx - 1],
            v1: self.values[idx],
        };
        seg.slope() / r
    }

    pub fn segments(&self) -> impl Iterator<Item = LogSegment> + '_ {
        (1..self.radii.len()).map(move |i| LogSegment {
            s0: self.radii[i - 1].ln(),
            s1: self.radii[i].ln(),
            v0: self.values[i - 1],
            v1: self.values[i],
        })
    }

    /// Spatial dilation x -> lambda x: r-axis shrinks by lambda.
    pub fn dilate(&self, lambda: f64) -> Result<RadialProfile> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        Ok(RadialProfile {
            radii: self.radii.iter().map(|r| r / lambda).collect(),
            values: self.values.clone(),
            support_radius: self.support_radius / lambda,
            gauge: self.gauge.clone(),
        })
    }

    /// Pointwise multiplication of values by c >= 0.
    pub fn scale_values(&self, c: f64) -> Result<RadialProfile> {
        if !(c >= 0.0) {
            return Err(Error::InvalidParameter("value scale must be nonnegative".into()));
        }
        Ok(RadialProfile {
            radii: self.radii.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            support_radius: self.support_radius,
            gauge: self.gauge.clone(),
        })
    }

    /// Resample onto `nodes` log-spaced radii between the plateau edge
    /// and the support radius. Values come from the interpolant, so fine
    /// per-node noise is averaged out while monotonicity is kept.
    pub fn resample(&self, nodes: usize) -> Result<RadialProfile> {
        if nodes < 2 {
            return Err(Error::InvalidParameter("need at least two nodes".into()));
        }
        let (s0, s1) = (self.radii[0].ln(), self.support_radius.ln());
        if !(s1 > s0) {
            return Ok(self.clone());
        }
        let mut radii = Vec::with_capacity(nodes);
        let mut values = Vec::with_capacity(nodes);
        let mut prev = f64::INFINITY;
        for i in 0..nodes {
            let r = (s0 + (s1 - s0) * i as f64 / (nodes - 1) as f64).exp();
            let v = self.eval(r).min(prev);
            prev = v;
            radii.push(r);
            values.push(v);
        }
        RadialProfile::from_nodes(radii, values, self.gauge.clone())
    }

    /// Re-tag the profile with another gauge without touching the data.
    pub fn with_gauge(&self, gauge: Gauge) -> RadialProfile {
        RadialProfile {
            radii: self.radii.clone(),
            values: self.values.clone(),
            support_radius: self.support_radius,
            gauge,
        }
    }
}

/// Default node count of constructed profiles.
pub const DEFAULT_NODES: usize = 2048;

/// The log-cutoff concentrating profile: constant peak
/// (1/(N kappa))^(1/N) (n/(N-beta))^((N-1)/N) inside radius
/// e^(-n/(N-beta)), then proportional to ln(1/r) up to radius 1, then 0.
/// Its anisotropic Dirichlet integral is exactly 1.
pub fn moser_profile(n: f64, beta: f64, gauge: &Gauge) -> Result<RadialProfile> {
    let nn = gauge.dim() as f64;
    if !(n > 0.0) {
        return Err(Error::InvalidParameter("index n must be positive".into()));
    }
    if !(0.0 <= beta && beta < nn) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0, N); got beta = {beta}, N = {nn}"
        )));
    }
    if n / (nn - beta) > 690.0 {
        return Err(Error::InvalidParameter(format!(
            "index n = {n} concentrates below the floating-point radius range"
        )));
    }
    let kappa = gauge.constants()?.kappa;
    let r_edge = (-n / (nn - beta)).exp();
    let peak = (1.0 / (nn * kappa)).powf(1.0 / nn) * (n / (nn - beta)).powf((nn - 1.0) / nn);
    let slope_coeff = ((nn - beta) / (n * nn * kappa)).powf(1.0 / nn);

    let value_at = |r: f64| -> f64 {
        if r <= r_edge {
            peak
        } else if r < 1.0 {
            slope_coeff * (1.0 / r).ln()
        } else {
            0.0
        }
    };

    // Log grid spanning from just inside the plateau edge out to the
    // support boundary, with the edge itself as an exact node.
    let r_min = r_edge * 1e-2;
    let m = DEFAULT_NODES;
    let mut radii = Vec::with_capacity(m + 2);
    let (s_min, s_max) = (r_min.ln(), 0.0f64);
    for i in 0..m {
        radii.push((s_min + (s_max - s_min) * i as f64 / (m - 1) as f64).exp());
    }
    radii.push(r_edge);
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-300 + 1e-15 * b.abs());
    let values: Vec<f64> = radii.iter().map(|&r| value_at(r)).collect();
    RadialProfile::from_nodes(radii, values, gauge.clone())
}

/// Root c in (0, 1] of c^a + c^N m^N = 1 where m = ||u||_q; the scaling
/// factor that puts c * u exactly on the mixed constraint boundary.
pub fn solve_cn(lq_norm: f64, a: f64, dim: usize) -> Result<f64> {
    if !(a > 0.0) || !(lq_norm >= 0.0) {
        return Err(Error::InvalidParameter("need a > 0 and a nonnegative norm".into()));
    }
    let nn = dim as f64;
    let mn = lq_norm.powf(nn);
    let f = |c: f64| c.powf(a) + c.powf(nn) * mn - 1.0;
    if mn == 0.0 {
        return Ok(1.0);
    }
    // f is strictly increasing on (0, 1] with f(0+) = -1 and f(1) >= 0.
    Ok(crate::numeric::bisect_increasing(0.0, 1.0, 1e-14, f))
}
