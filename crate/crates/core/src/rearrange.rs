//! Decreasing rearrangement and symmetrization of grid-sampled functions,
//! plus the two rearrangement inequality checkers.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gauge::Gauge;
use crate::profile::RadialProfile;

/// Nonnegative function sampled on a cube grid in R^N with cell side h.
/// Values are stored row-major over `side` cells per axis and must vanish
/// on the outermost cell layer, so the support is compact inside the box.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    dim: usize,
    side: usize,
    h: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(dim: usize, side: usize, h: f64, values: Vec<f64>) -> Result<SampledFunction> {
        if dim < 1 || dim > 3 {
            return Err(Error::InvalidParameter("grid dimension must be 1, 2 or 3".into()));
        }
        if side < 3 {
            return Err(Error::EmptyGrid);
        }
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("cell side must be positive".into()));
        }
        if values.len() != side.pow(dim as u32) {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                side.pow(dim as u32),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidParameter(
                "values must be finite and nonnegative".into(),
            ));
        }
        let f = SampledFunction {
            dim,
            side,
            h,
            values,
        };
        for (idx, &v) in f.values.iter().enumerate() {
            if v != 0.0 && f.on_boundary(idx) {
                return Err(Error::InvalidParameter(
                    "values must vanish on the boundary cell layer".into(),
                ));
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn cell_side(&self) -> f64 {
        self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    fn on_boundary(&self, idx: usize) -> bool {
        let mut rem = idx;
        for _ in 0..self.dim {
            let c = rem % self.side;
            if c == 0 || c == self.side - 1 {
                return true;
            }
            rem /= self.side;
        }
        false
    }

    fn index(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for &c in coords.iter().rev() {
            idx = idx * self.side + c;
        }
        idx
    }

    /// Measure of the superlevel set {u >= s}.
    pub fn measure_at_or_above(&self, s: f64) -> f64 {
        let count = self.values.iter().filter(|&&v| v >= s).count();
        count as f64 * self.cell_volume()
    }

    /// Grid sum of |u|^q times cell volume.
    pub fn lq_integral(&self, q: f64) -> f64 {
        self.cell_volume()
            * self
                .values
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|v| v.powf(q))
                .sum::<f64>()
    }

    /// Forward-difference gradient of the cell at `coords` (one entry per
    /// axis, zero past the last index).
    fn forward_gradient(&self, coords: &mut [usize], out: &mut [f64]) {
        let here = self.values[self.index(coords)];
        for ax in 0..self.dim {
            if coords[ax] + 1 < self.side {
                coords[ax] += 1;
                let next = self.values[self.index(coords)];
                coords[ax] -= 1;
                out[ax] = (next - here) / self.h;
            } else {
                out[ax] = 0.0;
            }
        }
    }

    /// Grid sum of F^N(forward gradient) times cell volume.
    pub fn dirichlet_integral(&self, g: &Gauge) -> Result<f64> {
        if g.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: g.dim(),
            });
        }
        let n = self.dim as f64;
        let mut coords = vec![0usize; self.dim];
        let mut grad = vec![0.0; self.dim];
        let mut acc = 0.0;
        for idx in 0..self.values.len() {
            let mut rem = idx;
            for c in coords.iter_mut() {
                *c = rem % self.side;
                rem /= self.side;
            }
            self.forward_gradient(&mut coords, &mut grad);
            if grad.iter().any(|&gk| gk != 0.0) {
                acc += g.eval(&grad)?.powf(n);
            }
        }
        Ok(acc * self.cell_volume())
    }

    /// Sample a Wulff-radial profile on a centered grid.
    pub fn from_profile(
        u: &RadialProfile,
        side: usize,
        h: f64,
    ) -> Result<SampledFunction> {
        let g = u.gauge().clone();
        let dim = g.dim();
        let center = 0.5 * (side as f64) * h;
        let total = side.pow(dim as u32);
        let mut values = vec![0.0; total];
        let mut coords = vec![0usize; dim];
        let mut x = vec![0.0; dim];
        for (idx, slot) in values.iter_mut().enumerate() {
            let mut rem = idx;
            let mut boundary = false;
            for (ax, c) in coords.iter_mut().enumerate() {
                *c = rem % side;
                rem /= side;
                if *c == 0 || *c == side - 1 {
                    boundary = true;
                }
                x[ax] = (*c as f64 + 0.5) * h - center;
            }
            if boundary {
                continue;
            }
            let r = g.polar(&x)?;
            *slot = u.eval(r);
        }
        SampledFunction::new(dim, side, h, values)
    }
}

/// Right-continuous step function u#(t): sorted cell values descending
/// with cumulative measure breakpoints. `breakpoints[i]` is the measure at
/// which the i-th step ends; the step carries `values[i]` on
/// [breakpoints[i-1], breakpoints[i]).
#[derive(Debug, Clone)]
pub struct DecreasingRearrangement {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    cell_measure: f64,
}

impl DecreasingRearrangement {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(&t).unwrap())
        {
            // t equals a breakpoint: that step ends there, the next one
            // starts (right continuity).
            Ok(i) => self.values.get(i + 1).copied().unwrap_or(0.0),
            Err(i) => self.values.get(i).copied().unwrap_or(0.0),
        }
    }

    /// Measure of {u# >= s}.
    pub fn measure_at_or_above(&self, s: f64) -> f64 {
        let mut last = 0.0;
        for (b, v) in self.breakpoints.iter().zip(&self.values) {
            if *v >= s {
                last = *b;
            } else {
                break;
            }
        }
        last
    }
}

/// Sort cell values descending and assign cumulative cell measures,
/// merging runs of equal values into single steps.
pub fn decreasing_rearrangement(u: &SampledFunction) -> DecreasingRearrangement {
    let cell = u.cell_volume();
    let mut sorted: Vec<f64> = u.values().iter().copied().filter(|&v| v > 0.0).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    let mut count = 0usize;
    for (i, &v) in sorted.iter().enumerate() {
        count += 1;
        let run_ends = i + 1 == sorted.len() || sorted[i + 1] != v;
        if run_ends {
            breakpoints.push(count as f64 * cell);
            values.push(v);
        }
    }
    DecreasingRearrangement {
        breakpoints,
        values,
        cell_measure: cell,
    }
}

/// The Wulff-radial profile r -> u#(kappa r^N): node radii invert the
/// cumulative measures through the Wulff volume.
pub fn convex_symmetrization(u: &SampledFunction, g: &Gauge) -> Result<RadialProfile> {
    if g.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            got: g.dim(),
        });
    }
    let kappa = g.constants()?.kappa;
    let n = u.dim() as f64;
    let rearr = decreasing_rearrangement(u);
    if rearr.values.is_empty() {
        return Ok(RadialProfile::zero(g.clone()));
    }
    let radii: Vec<f64> = rearr
        .breakpoints
        .iter()
        .map(|t| (t / kappa).powf(1.0 / n))
        .collect();
    RadialProfile::from_nodes(radii, rearr.values, g.clone())
}

/// Symmetrization onto Euclidean balls (the convex symmetrization of the
/// Euclidean gauge).
pub fn schwarz_symmetrization(u: &SampledFunction) -> Result<RadialProfile> {
    convex_symmetrization(u, &Gauge::euclidean(u.dim()))
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct RearrangementComparison {
    pub lhs: f64,
    pub rhs: f64,
}

/// Gradient-energy comparison: lhs is the grid Dirichlet integral of u,
/// rhs the radial one of its symmetrization. The symmetrized side is
/// never larger up to discretization slack.
pub fn check_polya_szego(u: &SampledFunction, g: &Gauge) -> Result<RearrangementComparison> {
    let lhs = u.dirichlet_integral(g)?;
    let star = convex_symmetrization(u, g)?;
    // The raw symmetrization carries one node per distinct cell value;
    // its jittery per-node slopes inflate the N-energy of the
    // interpolant. Resampling at the grid's own resolution averages the
    // jitter out.
    let coarse = if star.radii().len() > u.side() {
        star.resample(u.side())?
    } else {
        star
    };
    let rhs = crate::functionals::dirichlet_integral_from(&coarse, g, 0.0)?;
    Ok(RearrangementComparison { lhs, rhs })
}

/// Product comparison: lhs is the grid sum of f * g, rhs the integral of
/// the symmetrized product, computed exactly as the inner product of the
/// two sorted value lists. lhs <= rhs always.
pub fn check_hardy_littlewood(
    f: &SampledFunction,
    g: &SampledFunction,
    _gauge: &Gauge,
) -> Result<RearrangementComparison> {
    if f.dim() != g.dim() || f.side() != g.side() || f.cell_side() != g.cell_side() {
        return Err(Error::GridMismatch("functions live on different grids".into()));
    }
    let cell = f.cell_volume();
    let lhs = cell
        * f.values()
            .iter()
            .zip(g.values())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    let mut fs: Vec<f64> = f.values().to_vec();
    let mut gs: Vec<f64> = g.values().to_vec();
    fs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    gs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let rhs = cell * fs.iter().zip(&gs).map(|(a, b)| a * b).sum::<f64>();
    Ok(RearrangementComparison { lhs, rhs })
}

/// Random sum of smooth bumps, tapered to vanish near the box boundary.
/// The box is the unit cube scaled by side * h.
pub fn random_bump_function(
    dim: usize,
    side: usize,
    h: f64,
    rng: &mut impl Rng,
) -> Result<SampledFunction> {
    let bumps = rng.gen_range(2..=5);
    let extent = side as f64 * h;
    let mut centers = Vec::new();
    let mut widths = Vec::new();
    let mut heights = Vec::new();
    for _ in 0..bumps {
        let c: Vec<f64> = (0..dim)
            .map(|_| rng.gen_range(0.25..0.75) * extent)
            .collect();
        centers.push(c);
        widths.push(rng.gen_range(0.05..0.18) * extent);
        heights.push(rng.gen_range(0.3..1.5));
    }
    let total = side.pow(dim as u32);
    let mut values = vec![0.0; total];
    let mut coords = vec![0usize; dim];
    for (idx, slot) in values.iter_mut().enumerate() {
        let mut rem = idx;
        let mut boundary = false;
        let mut taper = 1.0;
        let mut x = vec![0.0; dim];
        for (ax, c) in coords.iter_mut().enumerate() {
            *c = rem % side;
            rem /= side;
            if *c == 0 || *c == side - 1 {
                boundary = true;
            }
            x[ax] = (*c as f64 + 0.5) * h;
            // Smooth taper reaching zero two cells from each face.
            let margin = 2.0 * h;
            let d = (x[ax] - margin).min(extent - margin - x[ax]) / (0.15 * extent);
            taper *= d.clamp(0.0, 1.0);
        }
        if boundary || taper == 0.0 {
            continue;
        }
        let mut v = 0.0;
        for b in 0..bumps {
            let d2: f64 = x
                .iter()
                .zip(&centers[b])
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum();
            v += heights[b] * (-d2 / (2.0 * widths[b] * widths[b])).exp();
        }
        *slot = v * taper;
    }
    SampledFunction::new(dim, side, h, values)
}
