//! Box-count curves over dyadic scales and dimension estimation from log-log
//! slopes.
//!
//! Counts come from a fixed dyadic mesh anchored at the bounding ball's
//! corner; they differ from cover-minimal counts by a dimension-dependent
//! constant factor which cancels in slopes. The upper/lower two-point slope
//! proxies are reported as finite-scale observables, never as the true
//! limsup/liminf.

use crate::attractor::{rasterize, RasterGrid};
use crate::error::{Error, Result};
use crate::geom::{Ball, Pt};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub j: u32,
    pub delta: f64,
    pub count: u64,
}

/// Box counts at dyadic scales delta_j = 2^{-j}, j increasing.
#[derive(Clone, Debug)]
pub struct CountCurve {
    samples: Vec<CurveSample>,
}

impl CountCurve {
    /// Validates the curve invariants: positive counts, non-decreasing as
    /// delta shrinks, and at most a 2^n-fold jump per halving.
    pub fn new(samples: Vec<CurveSample>, n: usize) -> Result<CountCurve> {
        if samples.is_empty() {
            return Err(Error::Domain("empty count curve".into()));
        }
        for w in samples.windows(2) {
            if w[1].j != w[0].j + 1 {
                return Err(Error::Domain("count curve scales must be consecutive dyadic".into()));
            }
            if w[0].count == 0 {
                return Err(Error::Domain("count curve counts must be positive".into()));
            }
            if w[1].count < w[0].count {
                return Err(Error::Domain(format!(
                    "count curve must be non-decreasing: j {} count {} -> j {} count {}",
                    w[0].j, w[0].count, w[1].j, w[1].count
                )));
            }
            let cap = w[0].count.saturating_mul(1u64 << n);
            if w[1].count > cap {
                return Err(Error::Domain(format!(
                    "count curve jumps by more than 2^n: j {} count {} -> j {} count {}",
                    w[0].j, w[0].count, w[1].j, w[1].count
                )));
            }
        }
        if samples.last().unwrap().count == 0 {
            return Err(Error::Domain("count curve counts must be positive".into()));
        }
        Ok(CountCurve { samples })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn j_range(&self) -> (u32, u32) {
        (self.samples[0].j, self.samples.last().unwrap().j)
    }
}

/// Counts occupied cells at each dyadic scale in j_range using the supplied
/// grid generator.
pub fn count_curve<F>(mut generator: F, j_range: (u32, u32), n: usize) -> Result<CountCurve>
where
    F: FnMut(f64) -> Result<RasterGrid>,
{
    let (j_min, j_max) = j_range;
    if j_min < 1 || j_max < j_min {
        return Err(Error::Domain(format!("bad j range ({j_min}, {j_max})")));
    }
    let mut samples = Vec::with_capacity((j_max - j_min + 1) as usize);
    for j in j_min..=j_max {
        let delta = 2f64.powi(-(j as i32));
        let grid = generator(delta)?;
        samples.push(CurveSample { j, delta, count: grid.count() });
    }
    CountCurve::new(samples, n)
}

/// Counts one fixed point set across all scales. Because the mesh is nested
/// and the point set does not change with delta, the curve invariants hold by
/// construction.
pub fn curve_from_points(points: &[Pt], ball: &Ball, j_range: (u32, u32)) -> Result<CountCurve> {
    count_curve(|delta| rasterize(points, delta, ball), j_range, ball.n)
}

/// Finite-scale dimension proxies from a count curve.
#[derive(Clone, Copy, Debug)]
pub struct DimEstimate {
    pub ols_slope: f64,
    /// max two-point slope over the tail window
    pub upper_proxy: f64,
    /// min two-point slope over the tail window
    pub lower_proxy: f64,
    pub window: (u32, u32),
}

/// OLS slope of log2 count against j over the tail window (default: upper
/// half of the j-range), with two-point slopes as upper/lower proxies.
pub fn estimate_dims(curve: &CountCurve, window: Option<(u32, u32)>) -> Result<DimEstimate> {
    let samples = curve.samples();
    if samples.len() < 4 {
        return Err(Error::TooFewSamples { need: 4, got: samples.len() });
    }
    let (j_min, j_max) = curve.j_range();
    let (w_lo, w_hi) = window.unwrap_or((j_min + (j_max - j_min) / 2, j_max));
    if w_lo < j_min || w_hi > j_max || w_hi < w_lo + 1 {
        return Err(Error::Domain(format!(
            "window ({w_lo}, {w_hi}) must contain at least two scales inside ({j_min}, {j_max})"
        )));
    }
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.j >= w_lo && s.j <= w_hi)
        .map(|s| (s.j as f64, (s.count as f64).log2()))
        .collect();

    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let ols_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for w in pts.windows(2) {
        let slope = w[1].1 - w[0].1; // unit j spacing
        upper = upper.max(slope);
        lower = lower.min(slope);
    }
    Ok(DimEstimate { ols_slope, upper_proxy: upper, lower_proxy: lower, window: (w_lo, w_hi) })
}
