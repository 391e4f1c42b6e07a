//! Dense complex Hermitian and real matrix algebra.
//!
//! Everything here is small and dense: dimensions stay well below a few
//! hundred, so plain row-major `Vec` storage and cyclic Jacobi methods are
//! accurate and fast enough.

mod eigen;
mod real;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use eigen::{hermitian_eig, hermitian_eig_from, EigenDecomposition, JACOBI_MAX_SWEEPS};
pub use real::{Cholesky, RealMatrix, Svd};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Relative asymmetry tolerated (and symmetrized away) on construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Which norm to use on `H(d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// `tr|X|`, the sum of absolute eigenvalues.
    Trace,
    /// Frobenius norm.
    HilbertSchmidt,
}

/// A dense, row-major complex matrix. Used for bases and eigenvector
/// matrices, whose columns are the vectors of interest.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, &z) in col.iter().enumerate() {
                m.data[i * cols + j] = z;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, z: C64) {
        self.data[r * self.cols + c] = z;
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖M†M − I‖_HS`, zero for a unitary matrix.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.adjoint().matmul(self);
        let n = gram.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { ONE } else { ZERO };
                acc += (gram.get(i, j) - target).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A complex Hermitian `d x d` matrix.
///
/// Construction symmetrizes `(A + A†)/2` when the relative asymmetry is at
/// most [`HERMITIAN_TOL`] and rejects the input otherwise, so every value of
/// this type is exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parse("non-finite matrix entry".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut asym: f64 = 0.0;
        for r in 0..dim {
            for c in r..dim {
                let a = entries[r * dim + c];
                let b = entries[c * dim + r].conj();
                asym = asym.max((a - b).norm());
            }
        }
        let rel = if scale > 0.0 { asym / scale } else { 0.0 };
        if rel > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry: rel });
        }
        Ok(Self::symmetrized(dim, entries))
    }

    /// Symmetrizes without checking; for internally produced matrices whose
    /// asymmetry is rounding only.
    pub(crate) fn symmetrized(dim: usize, mut data: Vec<C64>) -> Self {
        for r in 0..dim {
            data[r * dim + r].im = 0.0;
            for c in (r + 1)..dim {
                let avg = (data[r * dim + c] + data[c * dim + r].conj()) * 0.5;
                data[r * dim + c] = avg;
                data[c * dim + r] = avg.conj();
            }
        }
        Self { dim, data }
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend(row.iter().map(|&x| C64::new(x, 0.0)));
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = C64::new(v, 0.0);
        }
        m
    }

    /// The rank-one matrix `|v⟩⟨v|` (not normalized).
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = v[r] * v[c].conj();
            }
        }
        Self::symmetrized(dim, data)
    }

    /// `Σ_k w_k |v_k⟩⟨v_k|` over the columns of `vectors`.
    pub fn from_spectral(weights: &[f64], vectors: &ComplexMatrix) -> Self {
        let dim = vectors.rows();
        let mut data = vec![ZERO; dim * dim];
        for (k, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for r in 0..dim {
                let vr = vectors.get(r, k) * w;
                for c in 0..dim {
                    data[r * dim + c] += vr * vectors.get(c, k).conj();
                }
            }
        }
        Self::symmetrized(dim, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// `tr(self · other)`, which is real for Hermitian arguments.
    pub fn hs_inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        // tr(AB) = Σ A_kl B_lk = Σ A_kl conj(B_kl)
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let d = self.dim;
        let mut acc = ZERO;
        for r in 0..d {
            let mut row = ZERO;
            for c in 0..d {
                row += self.data[r * d + c] * v[c];
            }
            acc += v[r].conj() * row;
        }
        acc.re
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b * s).collect(),
        }
    }

    pub fn to_complex_matrix(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        hermitian_eig(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(self)?.eigenvalues)
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        matrix_norm(self, kind)
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "HermitianMatrix {}x{} [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        self.add_scaled(-1.0, rhs)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scale(rhs)
    }
}

/// Nearest positive semidefinite matrix in Hilbert–Schmidt distance:
/// `V Λ₊ V†` with negative eigenvalues clipped to zero.
pub fn psd_project(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(h)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Number of eigenvalues strictly greater than `tol · ‖H‖_HS`.
pub fn count_positive_eigs(h: &HermitianMatrix, tol: f64) -> Result<usize> {
    if tol < 0.0 {
        return Err(Error::Precondition(format!("tol must be >= 0, got {tol}")));
    }
    let threshold = tol * h.hs_norm();
    let eig = hermitian_eig(h)?;
    Ok(eig.eigenvalues.iter().filter(|&&l| l > threshold).count())
}

pub fn matrix_norm(h: &HermitianMatrix, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::HilbertSchmidt => Ok(h.hs_norm()),
        NormKind::Trace => Ok(hermitian_eig(h)?.eigenvalues.iter().map(|l| l.abs()).sum()),
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
