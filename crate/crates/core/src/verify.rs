//! Numerical verifiers for the dimension sandwich, the kappa-condition, the
//! projection-measure condition and the rectangular condensation open set
//! condition.
//!
//! These are falsification checks at finite scale, not proofs: each verifier
//! reports the estimates, the tolerance it used and a pass/fail flag derived
//! from them.

use std::collections::BTreeSet;

use crate::affinity::affinity_estimate;
use crate::attractor::{
    cell_of, default_anchor, ellipsoid_sample, homogeneous_points, inhomogeneous_points, Cell,
};
use crate::boxdim::{curve_from_points, estimate_dims, DimEstimate};
use crate::error::{Error, Result};
use crate::geom::{point_segment_distance, pt_add, pt_sub, CondensationSet, Pt, Rect};
use crate::ifs::{Ifs, System};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOpts {
    pub j_range: (u32, u32),
    pub window: Option<(u32, u32)>,
    pub tol: f64,
    pub k_max: u32,
    pub budget: u64,
    pub workers: usize,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts {
            j_range: (4, 10),
            window: None,
            tol: 0.1,
            k_max: 8,
            budget: 1 << 24,
            workers: 1,
        }
    }
}

/// Finite-scale check of max(dim F_empty, dim C) <= dim F_C <= max(s, dim C).
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub dim_f0: DimEstimate,
    pub dim_c: DimEstimate,
    pub dim_fc: DimEstimate,
    pub s_upper: f64,
    pub lower_bound_ok: bool,
    pub upper_bound_ok: bool,
    pub slack: f64,
}

impl BoundReport {
    /// Flags are a pure function of the stored estimates.
    pub fn recompute_flags(&self) -> (bool, bool) {
        let lower = self.dim_f0.ols_slope.max(self.dim_c.ols_slope)
            <= self.dim_fc.ols_slope + self.slack;
        let upper = self.dim_fc.ols_slope <= self.s_upper.max(self.dim_c.ols_slope) + self.slack;
        (lower, upper)
    }
}

pub fn verify_sandwich(sys: &System, opts: &VerifyOpts) -> Result<BoundReport> {
    let norm = sys.normalized()?;
    let delta_min = 2f64.powi(-(opts.j_range.1 as i32));
    let anchor = default_anchor(&norm)?;

    let pts_c = norm.condensation.discretize(delta_min)?;
    let pts_f0 = homogeneous_points(&norm, delta_min, anchor, opts.budget, opts.workers)?;
    let pts_fc = inhomogeneous_points(&norm, delta_min, anchor, opts.budget, opts.workers)?;

    let dim_c = estimate_dims(&curve_from_points(&pts_c, &norm.ball, opts.j_range)?, opts.window)?;
    let dim_f0 = estimate_dims(&curve_from_points(&pts_f0, &norm.ball, opts.j_range)?, opts.window)?;
    let dim_fc = estimate_dims(&curve_from_points(&pts_fc, &norm.ball, opts.j_range)?, opts.window)?;

    let s_upper = affinity_estimate(&norm.ifs, opts.k_max, opts.budget)?.upper;

    let mut report = BoundReport {
        dim_f0,
        dim_c,
        dim_fc,
        s_upper,
        lower_bound_ok: false,
        upper_bound_ok: false,
        slack: opts.tol,
    };
    let (lower, upper) = report.recompute_flags();
    report.lower_bound_ok = lower;
    report.upper_bound_ok = upper;
    Ok(report)
}

/// Per-delta minima of N_delta(S_i(C)) / N_delta(S_i(X)) over stopping words.
#[derive(Clone, Debug)]
pub struct KappaReport {
    pub per_delta: Vec<(f64, f64)>,
    pub kappa_floor: f64,
}

pub fn kappa_condition(sys: &System, delta_list: &[f64], budget: u64) -> Result<KappaReport> {
    let norm = sys.normalized()?;
    let n = norm.dim();
    let origin = norm.ball.corner();
    let mut per_delta = Vec::with_capacity(delta_list.len());
    for &delta in delta_list {
        let stopping = norm.ifs.stopping_set(n, delta, budget)?;
        let mut min_ratio = f64::INFINITY;
        for w in &stopping.words {
            let map = norm.ifs.compose_word(w)?;
            let sp = map.spectrum()?;

            let mut c_cells: BTreeSet<Cell> = BTreeSet::new();
            for p in norm.condensation.discretize(delta / sp.alpha(1))? {
                c_cells.insert(cell_of(map.apply_pt(p), origin, delta, n));
            }
            let mut x_cells: BTreeSet<Cell> = BTreeSet::new();
            for p in ellipsoid_sample(&norm.ball, &map, delta)? {
                x_cells.insert(cell_of(p, origin, delta, n));
            }
            let ratio = c_cells.len() as f64 / x_cells.len().max(1) as f64;
            min_ratio = min_ratio.min(ratio);
        }
        per_delta.push((delta, min_ratio));
    }
    let kappa_floor = per_delta.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
    Ok(KappaReport { per_delta, kappa_floor })
}

/// Minimum over directions of the length of the projection of C onto a line,
/// measured as a union of delta-wide intervals around projected sample points.
#[derive(Clone, Debug)]
pub struct ProjectionReport {
    pub per_angle: Vec<(f64, f64)>,
    pub min_measure: f64,
}

pub const DELTA_PROJ: f64 = 1e-4;

pub fn projection_measure_min(c: &CondensationSet, angles: usize) -> Result<ProjectionReport> {
    if c.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "projection sweep requires dimension 2, got {}",
            c.dim()
        )));
    }
    if angles < 4 {
        return Err(Error::Domain(format!("need at least 4 angles, got {angles}")));
    }
    let pts = c.discretize(DELTA_PROJ)?;
    let mut per_angle = Vec::with_capacity(angles);
    for k in 0..angles {
        let theta = std::f64::consts::PI * k as f64 / angles as f64;
        let (cos, sin) = (theta.cos(), theta.sin());
        let mut vals: Vec<f64> = pts.iter().map(|p| p[0] * cos + p[1] * sin).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // exact length of the union of width-DELTA_PROJ intervals
        let mut total = 0.0;
        let mut lo = vals[0] - DELTA_PROJ / 2.0;
        let mut hi = vals[0] + DELTA_PROJ / 2.0;
        for &v in &vals[1..] {
            let (a, b) = (v - DELTA_PROJ / 2.0, v + DELTA_PROJ / 2.0);
            if a > hi {
                total += hi - lo;
                lo = a;
            }
            hi = b;
        }
        total += hi - lo;
        per_angle.push((theta, total));
    }
    let min_measure = per_angle.iter().map(|&(_, l)| l).fold(f64::INFINITY, f64::min);
    Ok(ProjectionReport { per_angle, min_measure })
}

/// Which clause of the condensation open set condition failed.
#[derive(Clone, Debug, PartialEq)]
pub enum CoscViolation {
    /// S_i(U) is not contained in U.
    MapEscapes { map: usize },
    /// S_a(U) and S_b(U) overlap.
    ImagesOverlap { a: usize, b: usize },
    /// A condensation point lies outside U.
    CondensationOutside { point: [f64; 2] },
    /// A condensation point lies in the closure of S_i(U).
    CondensationMeetsImage { map: usize, point: [f64; 2] },
}

#[derive(Clone, Debug)]
pub struct CoscReport {
    pub ok: bool,
    pub violation: Option<CoscViolation>,
    /// Half the separation distance between C and the image/complement union,
    /// estimated by dense sampling; present only when the check passes.
    pub eta: Option<f64>,
}

const COSC_TOL: f64 = 1e-9;
const COSC_SAMPLE_DELTA: f64 = 1e-3;

struct Parallelogram {
    p0: Pt,
    e1: Pt,
    e2: Pt,
    inv: Matrix,
}

impl Parallelogram {
    fn image_of_rect(map: &crate::matrix::AffineMap, rect: &Rect) -> Result<Parallelogram> {
        let w = rect.hi[0] - rect.lo[0];
        let h = rect.hi[1] - rect.lo[1];
        let p0 = map.apply_pt([rect.lo[0], rect.lo[1], 0.0]);
        let lin = map.linear();
        let e1 = [lin.get(0, 0) * w, lin.get(1, 0) * w, 0.0];
        let e2 = [lin.get(0, 1) * h, lin.get(1, 1) * h, 0.0];
        let edge = Matrix::from_rows(&[vec![e1[0], e2[0]], vec![e1[1], e2[1]]])?;
        Ok(Parallelogram { p0, e1, e2, inv: edge.inverse()? })
    }

    fn corners(&self) -> [Pt; 4] {
        [
            self.p0,
            pt_add(self.p0, self.e1),
            pt_add(pt_add(self.p0, self.e1), self.e2),
            pt_add(self.p0, self.e2),
        ]
    }

    fn contains(&self, p: Pt, tol: f64) -> bool {
        let d = pt_sub(p, self.p0);
        let u = self.inv.apply(&[d[0], d[1]]);
        u[0] >= -tol && u[0] <= 1.0 + tol && u[1] >= -tol && u[1] <= 1.0 + tol
    }

    fn boundary_distance(&self, p: Pt) -> f64 {
        let c = self.corners();
        (0..4)
            .map(|i| point_segment_distance(p, c[i], c[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Separating-axis test for two parallelograms; touching along a boundary
/// counts as disjoint since the images of an open set are open.
fn parallelograms_overlap(a: &Parallelogram, b: &Parallelogram, tol: f64) -> bool {
    let axes = [a.e1, a.e2, b.e1, b.e2].map(|e| [-e[1], e[0]]);
    for axis in axes {
        let proj = |pg: &Parallelogram| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for c in pg.corners() {
                let v = c[0] * axis[0] + c[1] * axis[1];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        };
        let (alo, ahi) = proj(a);
        let (blo, bhi) = proj(b);
        if ahi.min(bhi) - alo.max(blo) <= tol {
            return false; // separating axis found
        }
    }
    true
}

/// Checks the COSC for an axis-aligned open rectangle U: images inside U,
/// pairwise disjoint images, and C separated from every image closure.
pub fn cosc_check_rect(ifs: &Ifs, c: &CondensationSet, u: &Rect) -> Result<CoscReport> {
    if ifs.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "COSC check requires dimension 2, got {}",
            ifs.dim()
        )));
    }
    let images: Vec<Parallelogram> = ifs
        .maps()
        .iter()
        .map(|m| Parallelogram::image_of_rect(m, u))
        .collect::<Result<_>>()?;

    for (i, pg) in images.iter().enumerate() {
        for corner in pg.corners() {
            if !u.contains(corner, COSC_TOL) {
                return Ok(CoscReport {
                    ok: false,
                    violation: Some(CoscViolation::MapEscapes { map: i }),
                    eta: None,
                });
            }
        }
    }
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            if parallelograms_overlap(&images[i], &images[j], COSC_TOL) {
                return Ok(CoscReport {
                    ok: false,
                    violation: Some(CoscViolation::ImagesOverlap { a: i, b: j }),
                    eta: None,
                });
            }
        }
    }
    let sample = c.discretize(COSC_SAMPLE_DELTA)?;
    let mut eta = f64::INFINITY;
    for p in sample {
        if !u.contains(p, -COSC_TOL) {
            return Ok(CoscReport {
                ok: false,
                violation: Some(CoscViolation::CondensationOutside { point: [p[0], p[1]] }),
                eta: None,
            });
        }
        for (i, pg) in images.iter().enumerate() {
            if pg.contains(p, COSC_TOL) {
                return Ok(CoscReport {
                    ok: false,
                    violation: Some(CoscViolation::CondensationMeetsImage {
                        map: i,
                        point: [p[0], p[1]],
                    }),
                    eta: None,
                });
            }
        }
        let mut d = u.boundary_distance(p);
        for pg in &images {
            d = d.min(pg.boundary_distance(p));
        }
        eta = eta.min(d);
    }
    Ok(CoscReport { ok: true, violation: None, eta: Some(eta / 2.0) })
}
