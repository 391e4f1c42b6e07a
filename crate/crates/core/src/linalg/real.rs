use crate::error::{Error, Result};

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, x: f64) {
        self.data[r * self.cols + c] = x;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// `self · x`
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// `selfᵀ · y`
    pub fn tmatvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            if yr == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(r)) {
                *o += a * yr;
            }
        }
        out
    }

    /// `selfᵀ · self`
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g.data[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i];
            }
        }
        g
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add_identity(&self, shift: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m.data[i * self.cols + i] += shift;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn svd(&self) -> Svd {
        Svd::new(self)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Thin singular value decomposition `A = U Σ Vᵀ` by one-sided (Hestenes)
/// Jacobi rotations. Small singular values come out with absolute accuracy
/// near `ε·σ_max`, which is what the kernel computations need; forming
/// `AᵀA` would square the condition number instead.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, length `cols`.
    pub singular_values: Vec<f64>,
    /// `rows x cols`; column k is the k-th left singular vector (zero when
    /// the singular value is exactly zero).
    pub u: RealMatrix,
    /// `cols x cols` orthogonal; column k is the k-th right singular vector.
    pub v: RealMatrix,
}

const SVD_MAX_SWEEPS: usize = 80;

impl Svd {
    pub fn new(a: &RealMatrix) -> Self {
        let (m, n) = (a.rows, a.cols);
        // work column-major: cols[j] is column j of the iterate
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
        let mut vcols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                e
            })
            .collect();
        for _ in 0..SVD_MAX_SWEEPS {
            let mut rotated = false;
            for i in 0..n {
                for j in (i + 1)..n {
                    let alpha = dot(&cols[i], &cols[i]);
                    let beta = dot(&cols[j], &cols[j]);
                    let gamma = dot(&cols[i], &cols[j]);
                    if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let t = if zeta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (lo, hi) = cols.split_at_mut(j);
                    rotate_pair(&mut lo[i], &mut hi[0], c, s);
                    let (lo, hi) = vcols.split_at_mut(j);
                    rotate_pair(&mut lo[i], &mut hi[0], c, s);
                }
            }
            if !rotated {
                break;
            }
        }
        let sigma: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| sigma[y].partial_cmp(&sigma[x]).unwrap_or(std::cmp::Ordering::Equal));
        let mut u = RealMatrix::zeros(m, n);
        let mut v = RealMatrix::zeros(n, n);
        let mut singular_values = Vec::with_capacity(n);
        for (k, &idx) in order.iter().enumerate() {
            let s = sigma[idx];
            singular_values.push(s);
            if s > 0.0 {
                for r in 0..m {
                    u.set(r, k, cols[idx][r] / s);
                }
            }
            for r in 0..n {
                v.set(r, k, vcols[idx][r]);
            }
        }
        Self { singular_values, u, v }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values at or above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cut = rel_tol * self.sigma_max();
        self.singular_values.iter().filter(|&&s| s >= cut && s > 0.0).count()
    }

    /// Orthonormal basis (right singular vectors) of the numerical null space.
    pub fn null_space(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let r = self.rank(rel_tol);
        (r..self.singular_values.len()).map(|k| self.v.column(k)).collect()
    }
}

#[inline]
fn rotate_pair(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Cholesky factor `L` of a symmetric positive definite matrix (`A = L Lᵀ`).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub fn new(a: &RealMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::DimensionMismatch {
                expected: a.rows,
                found: a.cols,
            });
        }
        let n = a.rows;
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = a.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if diag <= 0.0 || !diag.is_finite() {
                return Err(Error::Precondition(format!(
                    "matrix is not positive definite (pivot {j} = {diag:.3e})"
                )));
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut impl Rng) -> RealMatrix {
        let data = (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect();
        RealMatrix::from_row_major(rows, cols, data).unwrap()
    }

    #[test]
    fn svd_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (m, n) in [(5, 3), (3, 5), (8, 8), (1, 4)] {
            let a = random(m, n, &mut rng);
            let svd = a.svd();
            for r in 0..m {
                for c in 0..n {
                    let x: f64 = (0..n)
                        .map(|k| svd.u.get(r, k) * svd.singular_values[k] * svd.v.get(c, k))
                        .sum();
                    assert!((x - a.get(r, c)).abs() < 1e-12);
                }
            }
            let vtv = svd.v.transpose().gram();
            assert!(vtv.sub(&RealMatrix::identity(n)).unwrap().frobenius_norm() < 1e-12);
            assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn svd_null_space_of_rank_deficient() {
        // rank-2 matrix in R^{4x5}
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let left = random(4, 2, &mut rng);
        let right = random(2, 5, &mut rng);
        let mut a = RealMatrix::zeros(4, 5);
        for r in 0..4 {
            for c in 0..5 {
                a.set(r, c, (0..2).map(|k| left.get(r, k) * right.get(k, c)).sum());
            }
        }
        let svd = a.svd();
        assert_eq!(svd.rank(1e-10), 2);
        let ns = svd.null_space(1e-10);
        assert_eq!(ns.len(), 3);
        for v in &ns {
            assert!(norm2(&a.matvec(v)) < 1e-14);
        }
    }

    #[test]
    fn cholesky_solves_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = random(6, 6, &mut rng);
        let a = b.gram().add_identity(1.0);
        let chol = Cholesky::new(&a).unwrap();
        let x: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let rhs = a.matvec(&x);
        let sol = chol.solve(&rhs);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).abs() < 1e-12);
        }
        assert!(Cholesky::new(&RealMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn gram_and_transpose_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random(4, 3, &mut rng);
        let y = [1.0, -2.0, 0.5, 3.0];
        let direct = a.transpose().matvec(&y);
        for (p, q) in a.tmatvec(&y).iter().zip(&direct) {
            assert!((p - q).abs() < 1e-14);
        }
        let g = a.gram();
        assert!((g.get(0, 1) - g.get(1, 0)).abs() == 0.0);
    }
}
