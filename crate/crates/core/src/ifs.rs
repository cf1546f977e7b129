//! Iterated function systems, their word algebra and m-delta-stopping
//! enumeration.
//!
//! A stopping I_m(delta) collects the minimal words whose m-th singular value
//! first drops below delta. Enumeration is depth-first with pruning at emitted
//! words; termination follows from contraction since alpha_m(S_i j) <=
//! alpha_m(S_i) * alpha_1(S_j).

use crate::error::{Error, Result};
use crate::geom::{pt_dist, pt_from_slice, Ball, CondensationSet};
use crate::matrix::{AffineMap, SingularSpectrum};

/// Finite index string over {1..N}; stored 0-based. The empty word stands for
/// the identity composition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<u16>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[usize], n_maps: usize) -> Result<Word> {
        let mut v = Vec::with_capacity(letters.len());
        for &l in letters {
            if l >= n_maps {
                return Err(Error::Domain(format!("letter {l} out of range for {n_maps} maps")));
            }
            v.push(l as u16);
        }
        Ok(Word(v))
    }

    pub fn letters(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: u16) {
        self.0.push(letter);
    }

    pub fn pop(&mut self) {
        self.0.pop();
    }

    /// The word with its last letter removed.
    pub fn parent(&self) -> Word {
        let mut w = self.clone();
        w.pop();
        w
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

/// Ordered finite list of contracting affine maps of equal dimension.
#[derive(Clone, Debug)]
pub struct Ifs {
    maps: Vec<AffineMap>,
    spectra: Vec<SingularSpectrum>,
    n: usize,
}

impl Ifs {
    pub fn new(maps: Vec<AffineMap>) -> Result<Ifs> {
        if maps.is_empty() {
            return Err(Error::Domain("IFS needs at least one map".into()));
        }
        let n = maps[0].dim();
        let mut spectra = Vec::with_capacity(maps.len());
        for (index, m) in maps.iter().enumerate() {
            if m.dim() != n {
                return Err(Error::DimensionMismatch { left: n, right: m.dim() });
            }
            let sp = m.spectrum()?;
            if sp.largest() >= 1.0 {
                return Err(Error::NotContracting { index, norm: sp.largest() });
            }
            spectra.push(sp);
        }
        Ok(Ifs { maps, spectra, n })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn map(&self, i: usize) -> &AffineMap {
        &self.maps[i]
    }

    pub fn maps(&self) -> &[AffineMap] {
        &self.maps
    }

    pub fn spectrum(&self, i: usize) -> &SingularSpectrum {
        &self.spectra[i]
    }

    /// Smallest alpha_n over the maps; basis for the stopping sandwich
    /// constant b.
    pub fn min_alpha_n(&self) -> f64 {
        self.spectra.iter().map(|s| s.smallest()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_alpha_1(&self) -> f64 {
        self.spectra.iter().map(|s| s.largest()).fold(0.0, f64::max)
    }

    /// Left-to-right composition S_{i_1} o ... o S_{i_k}.
    pub fn compose_word(&self, w: &Word) -> Result<AffineMap> {
        if w.is_empty() {
            return Err(Error::Domain("cannot compose the empty word".into()));
        }
        let mut acc = self.maps[w.letters()[0] as usize].clone();
        for &l in &w.letters()[1..] {
            acc = acc.compose(&self.maps[l as usize])?;
        }
        Ok(acc)
    }

    /// Walks the stopping tree below the single-letter word `first`, calling
    /// the visitor on every node in lexicographic depth-first order. A node is
    /// stopped when alpha_m of its composition drops below delta; descent is
    /// pruned there. `visited` counts nodes against `budget`.
    pub fn walk_stopping_from<F>(
        &self,
        first: usize,
        m_index: usize,
        delta: f64,
        budget: u64,
        visited: &mut u64,
        visitor: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&Word, &AffineMap, &SingularSpectrum, bool) -> Result<()>,
    {
        check_stopping_args(self.n, m_index, delta)?;
        let mut word = Word::empty();
        word.push(first as u16);
        let map = self.maps[first].clone();
        self.walk_rec(&mut word, map, m_index, delta, budget, visited, visitor)
    }

    fn walk_rec<F>(
        &self,
        word: &mut Word,
        map: AffineMap,
        m_index: usize,
        delta: f64,
        budget: u64,
        visited: &mut u64,
        visitor: &mut F,
    ) -> Result<()>
    where
        F: FnMut(&Word, &AffineMap, &SingularSpectrum, bool) -> Result<()>,
    {
        *visited += 1;
        if *visited > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let sp = map.spectrum()?;
        let stopped = sp.alpha(m_index) < delta;
        visitor(word, &map, &sp, stopped)?;
        if stopped {
            return Ok(());
        }
        for l in 0..self.maps.len() {
            let child = map.compose(&self.maps[l])?;
            word.push(l as u16);
            self.walk_rec(word, child, m_index, delta, budget, visited, visitor)?;
            word.pop();
        }
        Ok(())
    }

    /// Exact enumeration of the m-delta-stopping I_m(delta).
    pub fn stopping_set(&self, m_index: usize, delta: f64, budget: u64) -> Result<StoppingSet> {
        check_stopping_args(self.n, m_index, delta)?;
        let mut words = Vec::new();
        let mut visited = 0u64;
        for first in 0..self.maps.len() {
            self.walk_stopping_from(first, m_index, delta, budget, &mut visited, &mut |w, _, _, stopped| {
                if stopped {
                    words.push(w.clone());
                }
                Ok(())
            })?;
        }
        Ok(StoppingSet { words, m_index, delta })
    }
}

fn check_stopping_args(n: usize, m_index: usize, delta: f64) -> Result<()> {
    if m_index < 1 || m_index > n {
        return Err(Error::AxisOutOfRange { m: m_index, n });
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// The words of an m-delta-stopping, in lexicographic order.
#[derive(Clone, Debug)]
pub struct StoppingSet {
    pub words: Vec<Word>,
    pub m_index: usize,
    pub delta: f64,
}

impl StoppingSet {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// A complete system: IFS, condensation set and an invariant bounding ball.
#[derive(Clone, Debug)]
pub struct System {
    pub ifs: Ifs,
    pub condensation: CondensationSet,
    pub ball: Ball,
}

impl System {
    /// Assembles a system, deriving the ball when absent and checking the
    /// invariants S_i(X) in X and C in X either way.
    pub fn new(ifs: Ifs, condensation: CondensationSet, ball: Option<Ball>) -> Result<System> {
        if ifs.dim() != condensation.dim() {
            return Err(Error::DimensionMismatch { left: ifs.dim(), right: condensation.dim() });
        }
        let ball = match ball {
            Some(b) => b,
            None => bounding_ball(&ifs, &condensation)?,
        };
        let sys = System { ifs, condensation, ball };
        sys.check_ball()?;
        Ok(sys)
    }

    fn check_ball(&self) -> Result<()> {
        let tol = 1e-9 * self.ball.radius.max(1.0);
        for (i, m) in self.ifs.maps().iter().enumerate() {
            let image_center = m.apply_pt(self.ball.center);
            let drift = pt_dist(image_center, self.ball.center);
            let a1 = self.ifs.spectrum(i).largest();
            if drift + a1 * self.ball.radius > self.ball.radius + tol {
                return Err(Error::Domain(format!(
                    "bounding ball is not invariant under map {i}: |S_i(c) - c| + a1 r = {} > r = {}",
                    drift + a1 * self.ball.radius,
                    self.ball.radius
                )));
            }
        }
        let rc = self.condensation.enclosing_radius_from(self.ball.center);
        if rc > self.ball.radius + tol {
            return Err(Error::Domain(format!(
                "condensation set escapes the bounding ball ({} > {})",
                rc, self.ball.radius
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ifs.dim()
    }

    /// Rescales coordinates once so the ball has unit diameter and sits at the
    /// origin; all deltas downstream are relative to this normalization.
    pub fn normalized(&self) -> Result<System> {
        let n = self.dim();
        let c = self.ball.center;
        let k = 0.5 / self.ball.radius;
        let mut maps = Vec::with_capacity(self.ifs.len());
        for m in self.ifs.maps() {
            // conjugation by x -> (x - c) k leaves the linear part unchanged
            let image = m.apply_pt(c);
            let t: Vec<f64> = (0..n).map(|d| (image[d] - c[d]) * k).collect();
            maps.push(AffineMap::new(m.linear().clone(), t)?);
        }
        let ifs = Ifs::new(maps)?;
        let condensation = self.condensation.rescaled(c, k);
        let ball = Ball::new([0.0; 3], 0.5, n)?;
        Ok(System { ifs, condensation, ball })
    }
}

/// Ball centered at a fixed-point estimate, grown to absorb every map and the
/// condensation set, then inflated by 1%.
pub fn bounding_ball(ifs: &Ifs, c: &CondensationSet) -> Result<Ball> {
    let n = ifs.dim();
    let mut center = [0.0; 3];
    for m in ifs.maps() {
        let fp = m.fixed_point()?;
        let p = pt_from_slice(&fp);
        for d in 0..n {
            center[d] += p[d] / ifs.len() as f64;
        }
    }
    let mut radius = 0.0f64;
    for (i, m) in ifs.maps().iter().enumerate() {
        let drift = pt_dist(m.apply_pt(center), center);
        radius = radius.max(drift / (1.0 - ifs.spectrum(i).largest()));
    }
    radius = radius.max(c.enclosing_radius_from(center));
    if radius == 0.0 {
        radius = 0.5; // degenerate system fixing a single point equal to C
    }
    Ball::new(center, radius * 1.01, n)
}
