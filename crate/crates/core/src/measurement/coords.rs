//! Real coordinates on `H(d)` with respect to a Hilbert–Schmidt orthonormal
//! generalized Gell-Mann basis.
//!
//! Ordering: `I/√d`, then the `d−1` traceless diagonal elements
//! `(Σ_{k<l} |k⟩⟨k| − l|l⟩⟨l|)/√(l(l+1))`, then for each pair `j < k` in
//! row-major order the symmetric `(|j⟩⟨k| + |k⟩⟨j|)/√2` followed by the
//! antisymmetric `(−i|j⟩⟨k| + i|k⟩⟨j|)/√2`.
//!
//! Because the basis is orthonormal, `⟨X, Y⟩_HS` equals the Euclidean inner
//! product of the coordinate vectors and `tr X = √d · x_0`.

use std::f64::consts::SQRT_2;

use crate::linalg::{HermitianMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GellMannBasis {
    dim: usize,
}

impl GellMannBasis {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coordinates, `d²`.
    pub fn len(&self) -> usize {
        self.dim * self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    fn pair_offset(&self, j: usize, k: usize) -> usize {
        // index of the pair (j, k), j < k, in row-major order
        let d = self.dim;
        let before = j * (2 * d - j - 1) / 2;
        d + 2 * (before + (k - j - 1))
    }

    pub fn to_coords(&self, x: &HermitianMatrix) -> Vec<f64> {
        let d = self.dim;
        assert_eq!(x.dim(), d, "coordinate dimension mismatch");
        let mut out = vec![0.0; d * d];
        let diag: Vec<f64> = (0..d).map(|k| x.get(k, k).re).collect();
        out[0] = diag.iter().sum::<f64>() / (d as f64).sqrt();
        let mut prefix = 0.0;
        for l in 1..d {
            prefix += diag[l - 1];
            let lf = l as f64;
            out[l] = (prefix - lf * diag[l]) / (lf * (lf + 1.0)).sqrt();
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let z = x.get(j, k);
                let o = self.pair_offset(j, k);
                out[o] = SQRT_2 * z.re;
                out[o + 1] = -SQRT_2 * z.im;
            }
        }
        out
    }

    pub fn from_coords(&self, coords: &[f64]) -> HermitianMatrix {
        let d = self.dim;
        assert_eq!(coords.len(), d * d, "coordinate length mismatch");
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        // diagonal: identity part plus suffix sums of the diagonal elements
        let base = coords[0] / (d as f64).sqrt();
        let mut suffix = 0.0;
        for k in (0..d).rev() {
            let mut v = base + suffix;
            if k >= 1 {
                let kf = k as f64;
                let norm = (kf * (kf + 1.0)).sqrt();
                v -= kf * coords[k] / norm;
                suffix += coords[k] / norm;
            }
            data[k * d + k] = C64::new(v, 0.0);
        }
        for j in 0..d {
            for k in (j + 1)..d {
                let o = self.pair_offset(j, k);
                let z = C64::new(coords[o], -coords[o + 1]) / SQRT_2;
                data[j * d + k] = z;
                data[k * d + j] = z.conj();
            }
        }
        HermitianMatrix::symmetrized(d, data)
    }

    /// The `idx`-th basis element as a matrix.
    pub fn element(&self, idx: usize) -> HermitianMatrix {
        let mut e = vec![0.0; self.len()];
        e[idx] = 1.0;
        self.from_coords(&e)
    }

    /// Coordinates of the identity matrix: `(√d, 0, …, 0)`.
    pub fn identity_coords(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.len()];
        e[0] = (self.dim as f64).sqrt();
        e
    }
}
