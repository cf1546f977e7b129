//! Artifact writers: binary PGM rasters, CSV point/curve dumps, and plain
//! `key = value` reports.

use std::io::Write;

use crate::attractor::{cell_of, RasterGrid};
use crate::boxdim::CountCurve;
use crate::error::Result;
use crate::geom::{Ball, Pt};

/// Renders grid occupancy as a binary (P5) PGM over the ball's bounding
/// square: `side = ceil(2r / delta)` pixels per axis, 255 = occupied on a
/// 0 background, row 0 at the top (y axis flipped).
pub fn write_pgm<W: Write>(out: &mut W, grid: &RasterGrid, ball: &Ball) -> Result<()> {
    let side = (2.0 * ball.radius / grid.delta).ceil() as usize;
    let side = side.max(1);
    let mut pixels = vec![0u8; side * side];
    for cell in grid.cells() {
        let x = cell[0];
        let y = cell[1];
        if x < 0 || y < 0 || x as usize >= side || y as usize >= side {
            continue;
        }
        let row = side - 1 - y as usize;
        pixels[row * side + x as usize] = 255;
    }
    write!(out, "P5\n{side} {side}\n255\n")?;
    out.write_all(&pixels)?;
    Ok(())
}

/// Convenience wrapper: rasterizes points at `delta` and renders the PGM.
pub fn render_points_pgm<W: Write>(
    out: &mut W,
    points: &[Pt],
    delta: f64,
    ball: &Ball,
) -> Result<()> {
    let grid = crate::attractor::rasterize(points, delta, ball)?;
    write_pgm(out, &grid, ball)
}

/// Writes points as CSV with a header and 17-significant-digit coordinates,
/// enough to round-trip f64 exactly.
pub fn write_points_csv<W: Write>(out: &mut W, points: &[Pt], n: usize) -> Result<()> {
    writeln!(out, "{}", if n == 3 { "x,y,z" } else { "x,y" })?;
    for p in points {
        let coords: Vec<String> = p[..n].iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", coords.join(","))?;
    }
    Ok(())
}

pub fn write_curve_csv<W: Write>(out: &mut W, curve: &CountCurve) -> Result<()> {
    writeln!(out, "j,delta,count")?;
    for s in curve.samples() {
        writeln!(out, "{},{:.16e},{}", s.j, s.delta, s.count)?;
    }
    Ok(())
}

/// One `key = value` line per entry, in the given order.
pub fn write_report<W: Write>(out: &mut W, entries: &[(&str, String)]) -> Result<()> {
    for (key, value) in entries {
        writeln!(out, "{key} = {value}")?;
    }
    Ok(())
}

/// Helper used by the CLI: the cell a point occupies at the render scale.
pub fn render_cell(p: Pt, ball: &Ball, delta: f64) -> [i64; 3] {
    cell_of(p, ball.corner(), delta, ball.n)
}
