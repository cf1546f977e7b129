//! Delta-accurate point generation for the homogeneous attractor, the orbital
//! set and the inhomogeneous attractor, plus grid rasterization.
//!
//! Generation walks the n-delta-stopping tree. Internal words emit images of
//! the discretized condensation set; stopped words contribute their whole
//! ellipsoid image of X, sampled on a grid aligned with the right singular
//! frame so that image spacing is delta along every principal axis. Points are
//! deduplicated at cell granularity while generating, which bounds memory by
//! the occupied-cell count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geom::{pt_dist, Ball, Pt};
use crate::ifs::System;
use crate::matrix::right_singular_frame;

pub type Cell = [i64; 3];

/// Occupancy of a fixed delta-mesh anchored at the bounding ball's corner.
/// Each occupied cell keeps the first generated point that hit it.
#[derive(Clone, Debug)]
pub struct RasterGrid {
    pub delta: f64,
    pub origin: Pt,
    pub n: usize,
    pub occupancy: BTreeMap<Cell, Pt>,
}

impl RasterGrid {
    pub fn count(&self) -> u64 {
        self.occupancy.len() as u64
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.occupancy.keys()
    }

    pub fn points(&self) -> impl Iterator<Item = &Pt> {
        self.occupancy.values()
    }
}

#[inline]
pub fn cell_of(p: Pt, origin: Pt, delta: f64, n: usize) -> Cell {
    let mut c = [0i64; 3];
    for d in 0..n {
        c[d] = ((p[d] - origin[d]) / delta).floor() as i64;
    }
    c
}

/// Assigns each point to the cell floor((p - origin)/delta) over the ball's
/// corner-anchored mesh. A point outside the 1%-inflated ball signals a broken
/// bounding invariant upstream and is an error.
pub fn rasterize(points: &[Pt], delta: f64, ball: &Ball) -> Result<RasterGrid> {
    if delta <= 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!("raster delta must be positive, got {delta}")));
    }
    let origin = ball.corner();
    let mut occupancy = BTreeMap::new();
    for &p in points {
        if pt_dist(p, ball.center) > ball.radius * 1.01 + delta {
            return Err(Error::PointOutsideBall { x: p[0], y: p[1], z: p[2] });
        }
        occupancy.entry(cell_of(p, origin, delta, ball.n)).or_insert(p);
    }
    Ok(RasterGrid { delta, origin, n: ball.n, occupancy })
}

enum Mode {
    Homogeneous { anchor: Pt },
    Orbital,
}

struct GenCtx<'a> {
    sys: &'a System,
    mode: Mode,
    delta: f64,
    origin: Pt,
    budget: u64,
    visited: AtomicU64,
}

impl GenCtx<'_> {
    fn tick(&self) -> Result<()> {
        if self.visited.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        Ok(())
    }

    fn emit(&self, p: Pt, out: &mut BTreeMap<Cell, Pt>) {
        out.entry(cell_of(p, self.origin, self.delta, self.sys.dim())).or_insert(p);
    }

    fn subtree(&self, first: usize) -> Result<BTreeMap<Cell, Pt>> {
        let mut out = BTreeMap::new();
        self.visit(self.sys.ifs.map(first).clone(), &mut out)?;
        Ok(out)
    }

    fn visit(&self, map: crate::matrix::AffineMap, out: &mut BTreeMap<Cell, Pt>) -> Result<()> {
        self.tick()?;
        let n = self.sys.dim();
        let sp = map.spectrum()?;
        if sp.alpha(n) < self.delta {
            match &self.mode {
                Mode::Homogeneous { anchor } => self.emit(map.apply_pt(*anchor), out),
                Mode::Orbital => self.emit_ellipsoid(&map, out)?,
            }
            return Ok(());
        }
        if let Mode::Orbital = self.mode {
            let spacing = self.delta / sp.alpha(1);
            for p in self.sys.condensation.discretize(spacing)? {
                self.emit(map.apply_pt(p), out);
            }
        }
        for l in 0..self.sys.ifs.len() {
            let child = map.compose(self.sys.ifs.map(l))?;
            self.visit(child, out)?;
        }
        Ok(())
    }

    fn emit_ellipsoid(&self, map: &crate::matrix::AffineMap, out: &mut BTreeMap<Cell, Pt>) -> Result<()> {
        for p in ellipsoid_sample(&self.sys.ball, map, self.delta)? {
            self.emit(p, out);
        }
        Ok(())
    }
}

/// Image of X under a (stopped) word, sampled on a grid aligned with the
/// right singular frame so that image spacing along the j-th principal axis
/// is exactly delta.
pub fn ellipsoid_sample(ball: &Ball, map: &crate::matrix::AffineMap, delta: f64) -> Result<Vec<Pt>> {
    let n = map.dim();
    let (sp, frame) = right_singular_frame(map.linear())?;
    let mut k = [0i64; 3];
    let mut h = [1.0f64; 3];
    for j in 0..n {
        let alpha = sp.alpha(j + 1);
        h[j] = delta / alpha;
        k[j] = (ball.radius / h[j]).floor() as i64;
    }
    let axis = |j: usize| -> Pt {
        let mut v = [0.0; 3];
        for d in 0..n {
            v[d] = frame.get(d, j);
        }
        v
    };
    let (v0, v1) = (axis(0), axis(1));
    let v2 = if n >= 3 { axis(2) } else { [0.0; 3] };
    let mut out = Vec::new();
    for t0 in -k[0]..=k[0] {
        for t1 in -k[1]..=k[1] {
            let zr = if n >= 3 { -k[2]..=k[2] } else { 0..=0 };
            for t2 in zr {
                let mut x = ball.center;
                for d in 0..n {
                    x[d] += t0 as f64 * h[0] * v0[d]
                        + t1 as f64 * h[1] * v1[d]
                        + t2 as f64 * h[2] * v2[d];
                }
                if pt_dist(x, ball.center) <= ball.radius {
                    out.push(map.apply_pt(x));
                }
            }
        }
    }
    Ok(out)
}

/// Runs one job per first letter, fanned out over `workers` threads, and
/// merges the per-subtree occupancy maps in subtree index order so the result
/// is identical under any schedule.
fn generate(sys: &System, mode: Mode, delta: f64, budget: u64, workers: usize) -> Result<BTreeMap<Cell, Pt>> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    let workers = workers.max(1);
    let ctx = GenCtx {
        sys,
        mode,
        delta,
        origin: sys.ball.corner(),
        budget,
        visited: AtomicU64::new(0),
    };

    let mut merged: BTreeMap<Cell, Pt> = BTreeMap::new();
    if let Mode::Orbital = ctx.mode {
        for p in sys.condensation.discretize(delta)? {
            ctx.emit(p, &mut merged);
        }
    }

    let n_sub = sys.ifs.len();
    let results: Mutex<Vec<Option<Result<BTreeMap<Cell, Pt>>>>> =
        Mutex::new((0..n_sub).map(|_| None).collect());
    std::thread::scope(|scope| {
        for w in 0..workers.min(n_sub) {
            let ctx = &ctx;
            let results = &results;
            scope.spawn(move || {
                let mut i = w;
                while i < n_sub {
                    let r = ctx.subtree(i);
                    results.lock().unwrap()[i] = Some(r);
                    i += workers;
                }
            });
        }
    });
    for slot in results.into_inner().unwrap() {
        let sub = slot.expect("subtree result missing")?;
        for (cell, p) in sub {
            merged.entry(cell).or_insert(p);
        }
    }
    Ok(merged)
}

fn to_points(map: BTreeMap<Cell, Pt>) -> Vec<Pt> {
    map.into_values().collect()
}

/// Points {S_i(anchor) : i in I_n(delta)}, a delta-dense sample of the
/// homogeneous attractor under the unit-diameter normalization.
pub fn homogeneous_points(sys: &System, delta: f64, anchor: Pt, budget: u64, workers: usize) -> Result<Vec<Pt>> {
    if !sys.ball.contains(anchor, 1e-9) {
        return Err(Error::Domain("anchor must lie inside the bounding ball".into()));
    }
    Ok(to_points(generate(sys, Mode::Homogeneous { anchor }, delta, budget, workers)?))
}

/// Delta-resolution sample of the orbital set: C plus its images along the
/// stopping tree, with stopped words replaced by their ellipsoid image of X.
pub fn orbital_points(sys: &System, delta: f64, budget: u64, workers: usize) -> Result<Vec<Pt>> {
    Ok(to_points(generate(sys, Mode::Orbital, delta, budget, workers)?))
}

/// F_C = F_empty union O, deduplicated at grid resolution.
pub fn inhomogeneous_points(sys: &System, delta: f64, anchor: Pt, budget: u64, workers: usize) -> Result<Vec<Pt>> {
    if !sys.ball.contains(anchor, 1e-9) {
        return Err(Error::Domain("anchor must lie inside the bounding ball".into()));
    }
    let mut merged = generate(sys, Mode::Homogeneous { anchor }, delta, budget, workers)?;
    let orbital = generate(sys, Mode::Orbital, delta, budget, workers)?;
    for (cell, p) in orbital {
        merged.entry(cell).or_insert(p);
    }
    Ok(to_points(merged))
}

/// Default anchor: the fixed point of the first map, which lies on F_empty.
pub fn default_anchor(sys: &System) -> Result<Pt> {
    let fp = sys.ifs.map(0).fixed_point()?;
    Ok(crate::geom::pt_from_slice(&fp))
}
