//! Line-oriented `key = value` run configuration with `[section]` headers.
//!
//! Matrices are written as bracketed row lists `[[a,b],[c,d]]`, vectors as
//! `(a, b)`, and numbers as decimals or exact `p/q` rationals. Unknown keys
//! are rejected. The format round-trips: parsing the serialization of a
//! parsed config yields the same config.

use crate::error::{Error, Result};
use crate::geom::{Ball, CondensationSet, Primitive, Pt, Rect};
use crate::ifs::{Ifs, System};
use crate::matrix::{singular_values, AffineMap, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub linear: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dimension: usize,
    pub maps: Vec<MapSpec>,
    pub condensation: Vec<Primitive>,
    pub ball: Option<(Pt, f64)>,
    pub rect: Option<Rect>,
    pub j_min: u32,
    pub j_max: u32,
    pub k_max: u32,
    pub budget: u64,
    pub tol: f64,
    pub seed: u64,
    pub angles: usize,
    pub workers: usize,
    pub window: Option<(u32, u32)>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dimension: 2,
            maps: Vec::new(),
            condensation: Vec::new(),
            ball: None,
            rect: None,
            j_min: 4,
            j_max: 10,
            k_max: 8,
            budget: 1 << 24,
            tol: 0.1,
            seed: 0,
            angles: 720,
            workers: 1,
            window: None,
        }
    }
}

/// Scalar literal: decimal float or exact `p/q` rational.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad rational numerator in '{s}'")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Domain(format!("bad rational denominator in '{s}'")))?;
        if q == 0 {
            return Err(Error::Domain(format!("zero denominator in '{s}'")));
        }
        return Ok(p as f64 / q as f64);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Domain(format!("bad number '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Domain(format!("non-finite number '{s}'")));
    }
    Ok(v)
}

/// Tuple literal `(a, b[, c])`.
pub fn parse_tuple(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Domain(format!("expected '(a, b, ...)', got '{s}'")))?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.is_empty() || inner.trim().is_empty() {
        return Err(Error::Domain(format!("empty tuple '{s}'")));
    }
    parts.iter().map(|p| parse_scalar(p)).collect()
}

/// Matrix literal `[[a,b],[c,d]]`.
pub fn parse_matrix_literal(s: &str) -> Result<Vec<Vec<f64>>> {
    let s = s.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Domain(format!("expected '[[...],[...]]', got '{s}'")))?;
    let mut rows = Vec::new();
    let mut depth = 0usize;
    let mut start = None;
    for (i, ch) in inner.char_indices() {
        match ch {
            '[' => {
                if depth == 0 {
                    start = Some(i + 1);
                }
                depth += 1;
            }
            ']' => {
                if depth == 0 {
                    return Err(Error::Domain(format!("unbalanced brackets in '{s}'")));
                }
                depth -= 1;
                if depth == 0 {
                    let row_src = &inner[start.take().unwrap()..i];
                    let row: Vec<f64> = row_src
                        .split(',')
                        .map(parse_scalar)
                        .collect::<Result<_>>()?;
                    rows.push(row);
                }
            }
            ',' | ' ' | '\t' if depth == 0 => {}
            _ if depth == 0 => {
                return Err(Error::Domain(format!("unexpected '{ch}' in matrix '{s}'")));
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::Domain(format!("unbalanced brackets in '{s}'")));
    }
    if rows.is_empty() {
        return Err(Error::Domain(format!("empty matrix '{s}'")));
    }
    Ok(rows)
}

/// Splits a value like `(0,0) (1,0) 1/5` into parenthesized tuples plus
/// trailing bare tokens.
fn split_tuples(s: &str) -> Result<(Vec<Vec<f64>>, Vec<String>)> {
    let mut tuples = Vec::new();
    let mut rest = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        if ch.is_whitespace() {
            continue;
        }
        if ch == '(' {
            let mut end = None;
            for (j, c2) in chars.by_ref() {
                if c2 == ')' {
                    end = Some(j);
                    break;
                }
            }
            let end = end.ok_or_else(|| Error::Domain(format!("unterminated tuple in '{s}'")))?;
            tuples.push(parse_tuple(&s[i..=end])?);
        } else {
            let start = i;
            let mut end = s.len();
            for (j, c2) in chars.by_ref() {
                if c2.is_whitespace() {
                    end = j;
                    break;
                }
            }
            rest.push(s[start..end].to_string());
        }
    }
    Ok((tuples, rest))
}

fn pt(v: &[f64], path: &str, dim: usize) -> Result<Pt> {
    if v.len() != dim {
        return Err(Error::Semantic {
            path: path.into(),
            msg: format!("expected {dim} coordinates, got {}", v.len()),
        });
    }
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    Ok(p)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut dimension_seen = false;
        let mut section = String::new();
        let mut deferred: Vec<(usize, String, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(h) => &raw[..h],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                section = name.trim().to_string();
                match section.as_str() {
                    "system" | "condensation" | "ball" | "run" => {}
                    other => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("unknown section [{other}]"),
                        })
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if section.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "key outside of any [section]".into(),
                });
            }
            // dimension may appear after maps textually, so geometry parsing
            // is deferred until the dimension is known
            if section == "system" && key == "dimension" {
                cfg.dimension = value.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad dimension '{value}'"),
                })?;
                dimension_seen = true;
                continue;
            }
            deferred.push((line_no, section.clone(), key, value));
        }

        if !dimension_seen {
            cfg.dimension = 2;
        }
        if !(2..=3).contains(&cfg.dimension) {
            return Err(Error::Semantic {
                path: "system.dimension".into(),
                msg: format!("dimension must be 2 or 3, got {}", cfg.dimension),
            });
        }

        for (line_no, section, key, value) in deferred {
            cfg.apply(&section, &key, &value)
                .map_err(|e| match e {
                    Error::Domain(msg) => Error::Parse { line: line_no, msg },
                    other => other,
                })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let n = self.dimension;
        let path = format!("{section}.{key}");
        match (section, key) {
            ("system", "map") => {
                let (lin_src, tr_src) = value.split_once('|').ok_or_else(|| {
                    Error::Domain(format!("expected '[[...]] | (tx, ty)', got '{value}'"))
                })?;
                let linear = parse_matrix_literal(lin_src)?;
                let translation = parse_tuple(tr_src)?;
                self.maps.push(MapSpec { linear, translation });
            }
            ("condensation", "circle") => {
                let (tuples, rest) = split_tuples(value)?;
                if tuples.len() != 1 || rest.len() != 1 {
                    return Err(Error::Domain(format!(
                        "expected 'circle = (cx, cy) radius', got '{value}'"
                    )));
                }
                let center = pt(&tuples[0], &path, n)?;
                let radius = parse_scalar(&rest[0])?;
                self.condensation.push(Primitive::Circle { center, radius });
            }
            ("condensation", "segment") => {
                let (tuples, rest) = split_tuples(value)?;
                if tuples.len() != 2 || !rest.is_empty() {
                    return Err(Error::Domain(format!(
                        "expected 'segment = (..) (..)', got '{value}'"
                    )));
                }
                self.condensation.push(Primitive::Segment {
                    a: pt(&tuples[0], &path, n)?,
                    b: pt(&tuples[1], &path, n)?,
                });
            }
            ("condensation", "polygon") => {
                let (tuples, rest) = split_tuples(value)?;
                if tuples.len() < 3 || !rest.is_empty() {
                    return Err(Error::Domain(format!(
                        "expected at least three vertices, got '{value}'"
                    )));
                }
                let vertices: Vec<Pt> = tuples
                    .iter()
                    .map(|t| pt(t, &path, n))
                    .collect::<Result<_>>()?;
                self.condensation.push(Primitive::PolygonBoundary { vertices });
            }
            ("condensation", "points") => {
                let (tuples, rest) = split_tuples(value)?;
                if tuples.is_empty() || !rest.is_empty() {
                    return Err(Error::Domain(format!(
                        "expected 'points = (..) (..) ...', got '{value}'"
                    )));
                }
                let points: Vec<Pt> = tuples
                    .iter()
                    .map(|t| pt(t, &path, n))
                    .collect::<Result<_>>()?;
                self.condensation.push(Primitive::PointCloud { points });
            }
            ("ball", "center") => {
                let center = pt(&parse_tuple(value)?, &path, n)?;
                let radius = self.ball.map(|(_, r)| r).unwrap_or(0.0);
                self.ball = Some((center, radius));
            }
            ("ball", "radius") => {
                let radius = parse_scalar(value)?;
                let center = self.ball.map(|(c, _)| c).unwrap_or([0.0; 3]);
                self.ball = Some((center, radius));
            }
            ("run", "jmin") => self.j_min = parse_u32(value)?,
            ("run", "jmax") => self.j_max = parse_u32(value)?,
            ("run", "kmax") => self.k_max = parse_u32(value)?,
            ("run", "budget") => {
                self.budget = value
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad budget '{value}'")))?
            }
            ("run", "tol") => self.tol = parse_scalar(value)?,
            ("run", "seed") => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad seed '{value}'")))?
            }
            ("run", "angles") => {
                self.angles = value
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad angles '{value}'")))?
            }
            ("run", "workers") => {
                self.workers = value
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad workers '{value}'")))?
            }
            ("run", "window") => {
                let (lo, hi) = value
                    .split_once(':')
                    .ok_or_else(|| Error::Domain(format!("expected 'jlo:jhi', got '{value}'")))?;
                self.window = Some((parse_u32(lo)?, parse_u32(hi)?));
            }
            ("run", "rect") => {
                let (tuples, rest) = split_tuples(value)?;
                if tuples.len() != 2 || !rest.is_empty() {
                    return Err(Error::Domain(format!(
                        "expected 'rect = (lox, loy) (hix, hiy)', got '{value}'"
                    )));
                }
                let lo = pt(&tuples[0], &path, 2)?;
                let hi = pt(&tuples[1], &path, 2)?;
                self.rect = Some(Rect::new([lo[0], lo[1]], [hi[0], hi[1]])?);
            }
            _ => {
                return Err(Error::Semantic { path, msg: "unknown key".into() });
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::Semantic {
                path: "system.map".into(),
                msg: "empty map list".into(),
            });
        }
        for (i, m) in self.maps.iter().enumerate() {
            let path = format!("system.map[{i}]");
            if m.linear.len() != self.dimension
                || m.linear.iter().any(|r| r.len() != self.dimension)
            {
                return Err(Error::Semantic {
                    path,
                    msg: format!("linear part must be {0}x{0}", self.dimension),
                });
            }
            if m.translation.len() != self.dimension {
                return Err(Error::Semantic {
                    path,
                    msg: format!("translation must have {} coordinates", self.dimension),
                });
            }
            let mat = Matrix::from_rows(&m.linear).map_err(|e| Error::Semantic {
                path: path.clone(),
                msg: e.to_string(),
            })?;
            let sp = singular_values(&mat).map_err(|e| Error::Semantic {
                path: path.clone(),
                msg: e.to_string(),
            })?;
            if sp.largest() >= 1.0 {
                return Err(Error::Semantic {
                    path,
                    msg: format!("not contracting: largest singular value {}", sp.largest()),
                });
            }
        }
        if self.condensation.is_empty() {
            return Err(Error::Semantic {
                path: "condensation".into(),
                msg: "condensation set must be non-empty".into(),
            });
        }
        if let Some((_, r)) = self.ball {
            if r <= 0.0 {
                return Err(Error::Semantic {
                    path: "ball.radius".into(),
                    msg: format!("radius must be positive, got {r}"),
                });
            }
        }
        if self.j_min < 1 || self.j_max < self.j_min {
            return Err(Error::Semantic {
                path: "run.jmin".into(),
                msg: format!("need 1 <= jmin <= jmax, got ({}, {})", self.j_min, self.j_max),
            });
        }
        if self.workers < 1 {
            return Err(Error::Semantic {
                path: "run.workers".into(),
                msg: "workers must be at least 1".into(),
            });
        }
        if self.angles < 4 {
            return Err(Error::Semantic {
                path: "run.angles".into(),
                msg: format!("need at least 4 angles, got {}", self.angles),
            });
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let n = self.dimension;
        let tuple = |v: &[f64]| {
            let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
            format!("({})", parts.join(", "))
        };
        writeln!(out, "[system]").unwrap();
        writeln!(out, "dimension = {n}").unwrap();
        for m in &self.maps {
            let rows: Vec<String> = m
                .linear
                .iter()
                .map(|r| {
                    let xs: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
                    format!("[{}]", xs.join(","))
                })
                .collect();
            writeln!(out, "map = [{}] | {}", rows.join(","), tuple(&m.translation)).unwrap();
        }
        writeln!(out, "\n[condensation]").unwrap();
        for p in &self.condensation {
            match p {
                Primitive::Circle { center, radius } => {
                    writeln!(out, "circle = {} {radius}", tuple(&center[..n])).unwrap()
                }
                Primitive::Segment { a, b } => {
                    writeln!(out, "segment = {} {}", tuple(&a[..n]), tuple(&b[..n])).unwrap()
                }
                Primitive::PolygonBoundary { vertices } => {
                    let vs: Vec<String> = vertices.iter().map(|v| tuple(&v[..n])).collect();
                    writeln!(out, "polygon = {}", vs.join(" ")).unwrap()
                }
                Primitive::PointCloud { points } => {
                    let vs: Vec<String> = points.iter().map(|v| tuple(&v[..n])).collect();
                    writeln!(out, "points = {}", vs.join(" ")).unwrap()
                }
            }
        }
        if let Some((center, radius)) = self.ball {
            writeln!(out, "\n[ball]").unwrap();
            writeln!(out, "center = {}", tuple(&center[..n])).unwrap();
            writeln!(out, "radius = {radius}").unwrap();
        }
        writeln!(out, "\n[run]").unwrap();
        writeln!(out, "jmin = {}", self.j_min).unwrap();
        writeln!(out, "jmax = {}", self.j_max).unwrap();
        writeln!(out, "kmax = {}", self.k_max).unwrap();
        writeln!(out, "budget = {}", self.budget).unwrap();
        writeln!(out, "tol = {}", self.tol).unwrap();
        writeln!(out, "seed = {}", self.seed).unwrap();
        writeln!(out, "angles = {}", self.angles).unwrap();
        writeln!(out, "workers = {}", self.workers).unwrap();
        if let Some((lo, hi)) = self.window {
            writeln!(out, "window = {lo}:{hi}").unwrap();
        }
        if let Some(r) = &self.rect {
            writeln!(
                out,
                "rect = ({}, {}) ({}, {})",
                r.lo[0], r.lo[1], r.hi[0], r.hi[1]
            )
            .unwrap();
        }
        out
    }

    /// Assembles the validated IFS / condensation / ball triple.
    pub fn build_system(&self) -> Result<System> {
        let maps: Vec<AffineMap> = self
            .maps
            .iter()
            .map(|m| AffineMap::new(Matrix::from_rows(&m.linear)?, m.translation.clone()))
            .collect::<Result<_>>()?;
        let ifs = Ifs::new(maps)?;
        let condensation = CondensationSet::new(self.condensation.clone(), self.dimension)?;
        let ball = match self.ball {
            Some((center, radius)) => Some(Ball::new(center, radius, self.dimension)?),
            None => None,
        };
        System::new(ifs, condensation, ball)
    }
}

fn parse_u32(s: &str) -> Result<u32> {
    s.trim()
        .parse()
        .map_err(|_| Error::Domain(format!("bad integer '{s}'")))
}
