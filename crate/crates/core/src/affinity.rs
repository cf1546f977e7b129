//! Pressure sums over words of fixed length, their roots s_k and the affinity
//! dimension estimate.
//!
//! The sum over I^k of phi^s(S_i) is continuous and strictly decreasing in s
//! with value N^k at s = 0, so each root s_k is found by plain bisection on
//! [0, 2n]. Subadditivity of the sums makes min_k s_k a certified upper bound
//! on the limit; an Aitken-extrapolated value is reported alongside, clearly
//! labeled as an estimate.

use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::matrix::{phi_of_spectrum, singular_values, Matrix, SingularSpectrum};

const ROOT_VALUE_TOL: f64 = 1e-10;
const ROOT_BRACKET_TOL: f64 = 1e-12;
/// Above this many leaves the spectra are recomputed per evaluation instead of
/// cached.
const SPECTRA_CACHE_LIMIT: u64 = 1 << 20;

/// Diagnostics for one solved root s_k.
#[derive(Clone, Debug)]
pub struct PressureProfile {
    pub k: u32,
    pub root: f64,
    /// (s, sum) pairs visited during bisection.
    pub evaluations: Vec<(f64, f64)>,
}

/// The sequence of roots and its certified upper bound.
#[derive(Clone, Debug)]
pub struct AffinityEstimate {
    /// min over computed s_k; a true upper bound on the affinity dimension.
    pub upper: f64,
    pub sequence: Vec<(u32, f64)>,
    pub k_max: u32,
    /// Aitken delta-squared extrapolation of the tail, not a certified value.
    pub extrapolated: Option<f64>,
    /// |s_kmax - s_{kmax-1}| when available.
    pub convergence: Option<f64>,
}

fn leaf_count(n_maps: usize, k: u32) -> Option<u64> {
    let mut total: u64 = 1;
    for _ in 0..k {
        total = total.checked_mul(n_maps as u64)?;
    }
    Some(total)
}

fn check_budget(ifs: &Ifs, k: u32, budget: u64) -> Result<u64> {
    match leaf_count(ifs.len(), k) {
        Some(c) if c <= budget => Ok(c),
        _ => Err(Error::BudgetExceeded { budget }),
    }
}

/// Streams the depth-first forest of length-k compositions, handing each leaf
/// spectrum to `f`. Partial products are reused along the path, so each leaf
/// costs one matrix multiply plus one spectrum.
fn for_each_leaf_spectrum<F: FnMut(&SingularSpectrum)>(ifs: &Ifs, k: u32, f: &mut F) -> Result<()> {
    fn rec<F: FnMut(&SingularSpectrum)>(
        ifs: &Ifs,
        depth: u32,
        acc: &Matrix,
        f: &mut F,
    ) -> Result<()> {
        if depth == 0 {
            f(&singular_values(acc)?);
            return Ok(());
        }
        for m in ifs.maps() {
            let next = acc.mul(m.linear())?;
            rec(ifs, depth - 1, &next, f)?;
        }
        Ok(())
    }
    for m in ifs.maps() {
        rec(ifs, k - 1, m.linear(), f)?;
    }
    Ok(())
}

/// Exact sum of phi^s over all N^k compositions.
pub fn pressure_sum(ifs: &Ifs, k: u32, s: f64, budget: u64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain("word length k must be at least 1".into()));
    }
    if s < 0.0 {
        return Err(Error::Domain(format!("pressure exponent must be >= 0, got {s}")));
    }
    check_budget(ifs, k, budget)?;
    let mut total = 0.0;
    let mut err = Ok(());
    for_each_leaf_spectrum(ifs, k, &mut |sp| match phi_of_spectrum(sp, s) {
        Ok(v) => total += v,
        Err(e) => err = Err(e),
    })?;
    err?;
    Ok(total)
}

/// Solves sum over I^k of phi^{s_k} = 1 by bisection on [0, 2n].
pub fn solve_sk(ifs: &Ifs, k: u32, budget: u64) -> Result<PressureProfile> {
    if k < 1 {
        return Err(Error::Domain("word length k must be at least 1".into()));
    }
    let leaves = check_budget(ifs, k, budget)?;

    let cached: Option<Vec<SingularSpectrum>> = if leaves <= SPECTRA_CACHE_LIMIT {
        let mut v = Vec::with_capacity(leaves as usize);
        for_each_leaf_spectrum(ifs, k, &mut |sp| v.push(sp.clone()))?;
        Some(v)
    } else {
        None
    };

    let mut evaluations = Vec::new();
    let mut eval = |s: f64| -> Result<f64> {
        let sum = match &cached {
            Some(v) => {
                let mut total = 0.0;
                for sp in v {
                    total += phi_of_spectrum(sp, s)?;
                }
                total
            }
            None => pressure_sum(ifs, k, s, budget)?,
        };
        evaluations.push((s, sum));
        Ok(sum)
    };

    let n = ifs.dim() as f64;
    let mut lo = 0.0;
    let mut hi = 2.0 * n;
    let f_lo = eval(lo)? - 1.0;
    if f_lo.abs() < ROOT_VALUE_TOL {
        return Ok(PressureProfile { k, root: lo, evaluations });
    }
    let f_hi = eval(hi)? - 1.0;
    if f_hi > 0.0 {
        // would need a root beyond 2n; the bracket is fixed by design
        return Err(Error::Domain(format!(
            "degenerate pressure: sum at s = {hi} is {} > 1, no root in [0, 2n]",
            f_hi + 1.0
        )));
    }
    let mut root = 0.5 * (lo + hi);
    while hi - lo > ROOT_BRACKET_TOL {
        root = 0.5 * (lo + hi);
        let f_mid = eval(root)? - 1.0;
        if f_mid.abs() < ROOT_VALUE_TOL {
            break;
        }
        if f_mid > 0.0 {
            lo = root;
        } else {
            hi = root;
        }
    }
    Ok(PressureProfile { k, root, evaluations })
}

/// Computes s_k for k = 1..k_max and reports min_k s_k as the upper bound plus
/// an Aitken-extrapolated estimate.
pub fn affinity_estimate(ifs: &Ifs, k_max: u32, budget: u64) -> Result<AffinityEstimate> {
    if k_max < 1 {
        return Err(Error::Domain("k_max must be at least 1".into()));
    }
    let mut sequence = Vec::new();
    for k in 1..=k_max {
        match solve_sk(ifs, k, budget) {
            Ok(p) => sequence.push((k, p.root)),
            Err(Error::BudgetExceeded { .. }) if !sequence.is_empty() => break,
            Err(e) => return Err(e),
        }
    }
    let upper = sequence.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
    let convergence = if sequence.len() >= 2 {
        let a = sequence[sequence.len() - 2].1;
        let b = sequence[sequence.len() - 1].1;
        Some((b - a).abs())
    } else {
        None
    };
    let extrapolated = aitken(&sequence);
    let k_reached = sequence.last().map(|&(k, _)| k).unwrap_or(0);
    Ok(AffinityEstimate { upper, sequence, k_max: k_reached, extrapolated, convergence })
}

fn aitken(sequence: &[(u32, f64)]) -> Option<f64> {
    if sequence.len() < 3 {
        return sequence.last().map(|&(_, s)| s);
    }
    let m = sequence.len();
    let (a, b, c) = (sequence[m - 3].1, sequence[m - 2].1, sequence[m - 1].1);
    let denom = c - 2.0 * b + a;
    if denom.abs() < 1e-14 {
        return Some(c);
    }
    Some(c - (c - b) * (c - b) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::AffineMap;

    fn similarity(r: f64, tx: f64, ty: f64) -> AffineMap {
        AffineMap::new(
            Matrix::from_rows(&[vec![r, 0.0], vec![0.0, r]]).unwrap(),
            vec![tx, ty],
        )
        .unwrap()
    }

    fn three_similarities() -> Ifs {
        Ifs::new(vec![
            similarity(0.5, 0.0, 0.0),
            similarity(0.5, 0.5, 0.0),
            similarity(0.5, 0.0, 0.5),
        ])
        .unwrap()
    }

    fn paper_ifs() -> Ifs {
        let s1 = AffineMap::new(
            Matrix::from_rows(&[vec![0.5, 0.0], vec![0.5, 0.5]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        let s2 = AffineMap::new(
            Matrix::from_rows(&[vec![0.5, 0.5], vec![0.0, 0.5]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        Ifs::new(vec![s1, s2]).unwrap()
    }

    #[test]
    fn pressure_closed_forms() {
        let ifs = three_similarities();
        // N similarities of ratio r: sum = N^k r^{ks}
        for k in [1u32, 2, 3] {
            for s in [0.5, 1.0, 1.7] {
                let expect = 3f64.powi(k as i32) * 0.5f64.powf(k as f64 * s);
                let got = pressure_sum(&ifs, k, s, 1 << 24).unwrap();
                assert!((got - expect).abs() < 1e-10 * expect.max(1.0));
            }
        }
        // s = 0 gives N^k by the phi^0 = 1 convention
        assert!((pressure_sum(&ifs, 3, 0.0, 1 << 24).unwrap() - 27.0).abs() < 1e-12);
    }

    #[test]
    fn paper_pressure_at_s_two() {
        // each map has |det| = 1/4, so phi^2 = 1/4 and the k = 1 sum is 1/2
        let got = pressure_sum(&paper_ifs(), 1, 2.0, 1 << 24).unwrap();
        assert!((got - 0.5).abs() < 1e-12);
    }

    #[test]
    fn budget_exceeded() {
        let ifs = three_similarities();
        assert!(matches!(
            pressure_sum(&ifs, 10, 1.0, 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn similarity_roots_are_log3_over_log2() {
        let ifs = three_similarities();
        let expect = 3f64.ln() / 2f64.ln();
        for k in 1..=6 {
            let p = solve_sk(&ifs, k, 1 << 24).unwrap();
            assert!((p.root - expect).abs() < 1e-9, "k = {k}: {}", p.root);
        }
    }

    #[test]
    fn paper_s1_matches_closed_form() {
        // 2 a1 a2^{s-1} = 1 with a1 = (1+sqrt5)/4, a2 = (sqrt5-1)/4
        let s5 = 5f64.sqrt();
        let a1 = (1.0 + s5) / 4.0;
        let a2 = (s5 - 1.0) / 4.0;
        let expect = 1.0 + (2.0 * a1).ln() / (1.0 / a2).ln();
        let p = solve_sk(&paper_ifs(), 1, 1 << 24).unwrap();
        assert!((p.root - expect).abs() < 1e-9, "{} vs {}", p.root, expect);
    }

    #[test]
    fn root_satisfies_pressure_equation() {
        let ifs = paper_ifs();
        for k in 1..=6 {
            let p = solve_sk(&ifs, k, 1 << 24).unwrap();
            let sum = pressure_sum(&ifs, k, p.root, 1 << 24).unwrap();
            assert!((sum - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn single_map_root_is_zero() {
        // for N = 1 the sum is phi^s(A^k) which already equals 1 at s = 0
        let single = Ifs::new(vec![AffineMap::new(
            Matrix::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.25]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap()])
        .unwrap();
        for k in 1..=4 {
            let p = solve_sk(&single, k, 1 << 24).unwrap();
            assert!(p.root.abs() < 1e-9);
        }
    }

    #[test]
    fn affinity_estimate_similarity_constant() {
        let e = affinity_estimate(&three_similarities(), 5, 1 << 24).unwrap();
        let expect = 3f64.ln() / 2f64.ln();
        assert!((e.upper - expect).abs() < 1e-9);
        for &(_, s) in &e.sequence {
            assert!((s - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn monotone_pressure_in_s() {
        let ifs = paper_ifs();
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let s = i as f64 * 0.2;
            let v = pressure_sum(&ifs, 3, s, 1 << 24).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
