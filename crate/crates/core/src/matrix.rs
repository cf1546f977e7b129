//! Dense n-by-n matrices, affine maps and the singular value function.
//!
//! Everything here is sized for small n (2 or 3 in practice, general n
//! allowed). Singular values come from the eigenvalues of `A * A^T`, computed
//! with a closed-form quadratic for n = 2 and cyclic Jacobi rotations
//! otherwise.

use crate::error::{Error, Result};
use crate::geom::Pt;

/// Row-major n-by-n invertible matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    a: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from rows, rejecting non-square input and singular
    /// matrices.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Domain(format!("matrix dimension must be >= 2, got {n}")));
        }
        let mut a = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { left: n, right: row.len() });
            }
            a.extend_from_slice(row);
        }
        let m = Matrix { n, a };
        let det = m.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularMatrix);
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Matrix {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Matrix { n, a }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { left: self.n, right: other.n });
        }
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        Ok(Matrix { n, a: out })
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = self.get(i, j);
            }
        }
        Matrix { n, a: out }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut a = self.a.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[pivot * n + col].abs() {
                    pivot = r;
                }
            }
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let mut a = self.a.clone();
        let mut inv = Matrix::identity(n).a;
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[pivot * n + col].abs() {
                    pivot = r;
                }
            }
            if a[pivot * n + col] == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    inv.swap(col * n + j, pivot * n + j);
                }
            }
            let p = a[col * n + col];
            for j in 0..n {
                a[col * n + j] /= p;
                inv[col * n + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] -= f * a[col * n + j];
                    inv[r * n + j] -= f * inv[col * n + j];
                }
            }
        }
        Ok(Matrix { n, a: inv })
    }
}

/// Eigen-decomposition of a symmetric matrix via cyclic Jacobi rotations.
///
/// Returns eigenvalues sorted descending and the matching eigenvectors as
/// matrix columns.
pub fn sym_eigen(s: &Matrix) -> (Vec<f64>, Matrix) {
    let n = s.n;
    let mut a = s.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - sn * akq);
                    a.set(k, q, sn * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - sn * aqk);
                    a.set(q, k, sn * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - sn * vkq);
                    v.set(k, q, sn * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::identity(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors.set(row, col, v.get(row, src));
        }
    }
    (values, vectors)
}

/// Singular values sorted non-increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(values: Vec<f64>) -> Result<SingularSpectrum> {
        if values.is_empty() {
            return Err(Error::Domain("empty singular spectrum".into()));
        }
        for w in values.windows(2) {
            if w[1] > w[0] {
                return Err(Error::Domain("singular values not sorted".into()));
            }
        }
        if *values.last().unwrap() <= 0.0 {
            return Err(Error::Domain("singular values must be positive".into()));
        }
        Ok(SingularSpectrum { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// 1-based alpha_j, matching the usual convention.
    #[inline]
    pub fn alpha(&self, j: usize) -> f64 {
        self.values[j - 1]
    }

    pub fn largest(&self) -> f64 {
        self.values[0]
    }

    pub fn smallest(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Product of all singular values, i.e. |det|.
    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

/// Singular values of `m`: positive square roots of the eigenvalues of
/// `m * m^T`, sorted descending.
pub fn singular_values(m: &Matrix) -> Result<SingularSpectrum> {
    let det = m.det();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::SingularMatrix);
    }
    let mut values = if m.n == 2 {
        // closed form for the eigenvalues of the 2x2 Gram matrix
        let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let t = a * a + b * b + c * c + d * d;
        let det2 = det * det;
        let disc = (t * t - 4.0 * det2).max(0.0).sqrt();
        let l1 = 0.5 * (t + disc);
        let l2 = 0.5 * (t - disc);
        vec![l1.max(0.0).sqrt(), l2.max(0.0).sqrt()]
    } else {
        let gram = m.mul(&m.transpose())?;
        let (eig, _) = sym_eigen(&gram);
        eig.iter().map(|&l| l.max(0.0).sqrt()).collect()
    };
    // the smallest value is destroyed by cancellation when the matrix is
    // ill-conditioned; |det| = product of singular values recovers it stably
    let leading: f64 = values[..m.n - 1].iter().product();
    if leading > 0.0 {
        values[m.n - 1] = (det.abs() / leading).min(values[m.n - 2]);
    }
    SingularSpectrum::new(values)
}

/// Right singular directions of `m`: unit vectors v_j with |m v_j| = alpha_j,
/// from the eigen-decomposition of `m^T * m`. Returned as matrix columns
/// ordered to match the descending singular values.
pub fn right_singular_frame(m: &Matrix) -> Result<(SingularSpectrum, Matrix)> {
    let gram = m.transpose().mul(m)?;
    let (eig, vectors) = sym_eigen(&gram);
    let mut values: Vec<f64> = eig.iter().map(|&l| l.max(0.0).sqrt()).collect();
    // same cancellation guard as in singular_values
    let n = values.len();
    let leading: f64 = values[..n - 1].iter().product();
    if leading > 0.0 {
        values[n - 1] = (m.det().abs() / leading).min(values[n - 2]);
    }
    Ok((SingularSpectrum::new(values)?, vectors))
}

/// The singular value function phi^s evaluated on a precomputed spectrum.
pub fn phi_of_spectrum(sp: &SingularSpectrum, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::Domain(format!("phi^s requires s >= 0, got {s}")));
    }
    let n = sp.dim();
    if s == 0.0 {
        return Ok(1.0); // empty product
    }
    if s > n as f64 {
        return Ok(sp.product().powf(s / n as f64));
    }
    let m = s.ceil() as usize; // m - 1 < s <= m
    let mut out = 1.0;
    for j in 1..m {
        out *= sp.alpha(j);
    }
    out *= sp.alpha(m).powf(s - m as f64 + 1.0);
    Ok(out)
}

/// phi^s(m) = alpha_1 ... alpha_{m-1} alpha_m^{s-m+1} for m-1 < s <= m, and
/// |det|^{s/n} beyond s = n.
pub fn phi_s(m: &Matrix, s: f64) -> Result<f64> {
    let sp = singular_values(m)?;
    phi_of_spectrum(&sp, s)
}

/// Upper bound 2^n (alpha_1/alpha_m) ... (alpha_{m-1}/alpha_m) on the number
/// of boxes of side alpha_m needed to cover an ellipsoid with the given axes.
pub fn cover_bound(sp: &SingularSpectrum, m_index: usize) -> Result<f64> {
    let n = sp.dim();
    if m_index < 1 || m_index > n {
        return Err(Error::AxisOutOfRange { m: m_index, n });
    }
    let am = sp.alpha(m_index);
    let mut out = (1u64 << n) as f64;
    for j in 1..m_index {
        out *= sp.alpha(j) / am;
    }
    Ok(out)
}

/// Affine map x -> Ax + b. Contraction is not enforced here; the IFS
/// constructor checks it.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    linear: Matrix,
    translation: Vec<f64>,
}

impl AffineMap {
    pub fn new(linear: Matrix, translation: Vec<f64>) -> Result<AffineMap> {
        if linear.dim() != translation.len() {
            return Err(Error::DimensionMismatch { left: linear.dim(), right: translation.len() });
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn identity(n: usize) -> AffineMap {
        AffineMap { linear: Matrix::identity(n), translation: vec![0.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn linear(&self) -> &Matrix {
        &self.linear
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.linear.apply(x);
        for (o, t) in out.iter_mut().zip(&self.translation) {
            *o += t;
        }
        out
    }

    /// Fast path for the geometry pipeline (n <= 3); unused coordinates stay 0.
    #[inline]
    pub fn apply_pt(&self, p: Pt) -> Pt {
        let n = self.dim();
        let mut out = [0.0; 3];
        for i in 0..n {
            let mut acc = self.translation[i];
            for j in 0..n {
                acc += self.linear.get(i, j) * p[j];
            }
            out[i] = acc;
        }
        out
    }

    /// self o other, i.e. x -> self(other(x)).
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        let linear = self.linear.mul(&other.linear)?;
        let mut translation = self.linear.apply(&other.translation);
        for (t, s) in translation.iter_mut().zip(&self.translation) {
            *t += s;
        }
        Ok(AffineMap { linear, translation })
    }

    pub fn spectrum(&self) -> Result<SingularSpectrum> {
        singular_values(&self.linear)
    }

    /// Unique fixed point (I - A)^{-1} b of a contracting map.
    pub fn fixed_point(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                row.push(id - self.linear.get(i, j));
            }
            rows.push(row);
        }
        let m = Matrix::from_rows(&rows)?;
        Ok(m.inverse()?.apply(&self.translation))
    }
}
