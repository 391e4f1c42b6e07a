use super::{ComplexMatrix, HermitianMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Off-diagonal Frobenius mass, relative to `‖H‖_HS`, at which the sweeps stop.
const JACOBI_TOL: f64 = 1e-14;

/// Spectral decomposition `H = V Λ V†` with eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary matrix whose column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
    pub sweeps: usize,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_spectral(&self.eigenvalues, &self.eigenvectors)
    }

    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        HermitianMatrix::from_spectral(&mapped, &self.eigenvectors)
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// Eigendecomposition by cyclic complex Jacobi rotations.
pub fn hermitian_eig(h: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    let mut a = h.entries().to_vec();
    let mut v = ComplexMatrix::identity(n).data;
    let sweeps = jacobi_sweeps(n, &mut a, &mut v, h.hs_norm())?;
    Ok(finish(n, &a, v, sweeps))
}

/// Same as [`hermitian_eig`] but starts from an approximate eigenbasis
/// `guess` (a unitary matrix), which makes repeated decompositions of
/// slowly varying matrices much cheaper.
pub fn hermitian_eig_from(h: &HermitianMatrix, guess: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    let rotated = guess.adjoint().matmul(&h.to_complex_matrix()).matmul(guess);
    let mut a = HermitianMatrix::symmetrized(n, rotated.data).data;
    let mut v = guess.data.clone();
    let sweeps = jacobi_sweeps(n, &mut a, &mut v, h.hs_norm())?;
    Ok(finish(n, &a, v, sweeps))
}

fn off_diagonal_mass(n: usize, a: &[C64]) -> f64 {
    let mut acc = 0.0;
    for r in 0..n {
        for c in (r + 1)..n {
            acc += a[r * n + c].norm_sqr();
        }
    }
    (2.0 * acc).sqrt()
}

fn jacobi_sweeps(n: usize, a: &mut [C64], v: &mut [C64], norm: f64) -> Result<usize> {
    let target = JACOBI_TOL * norm;
    for sweep in 0..=JACOBI_MAX_SWEEPS {
        let off = off_diagonal_mass(n, a);
        if off <= target {
            return Ok(sweep);
        }
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps: sweep,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(n, a, v, p, q);
            }
        }
    }
    unreachable!()
}

/// Annihilates `a[p][q]` with the unitary `U = diag-phase · real rotation`:
/// column p of U is `c e_p − s e^{−iφ} e_q`, column q is `s e_p + c e^{−iφ} e_q`,
/// where `a[p][q] = |a[p][q]| e^{iφ}`.
#[inline]
fn rotate(n: usize, a: &mut [C64], v: &mut [C64], p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    // far below the rounding level of the diagonal
    if mag < 1e-19 * (app.abs() + aqq.abs()) {
        a[p * n + q] = ZERO;
        a[q * n + p] = ZERO;
        return;
    }
    let phase = apq / mag; // e^{iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let em = phase.conj(); // e^{−iφ}

    // A ← A U (columns p, q)
    for r in 0..n {
        let arp = a[r * n + p];
        let arq = a[r * n + q];
        a[r * n + p] = arp * c - arq * em * s;
        a[r * n + q] = arp * s + arq * em * c;
    }
    // A ← U† A (rows p, q)
    let ep = phase; // e^{+iφ}
    for col in 0..n {
        let apc = a[p * n + col];
        let aqc = a[q * n + col];
        a[p * n + col] = apc * c - aqc * ep * s;
        a[q * n + col] = apc * s + aqc * ep * c;
    }
    a[p * n + q] = ZERO;
    a[q * n + p] = ZERO;
    a[p * n + p] = C64::new(app - t * mag, 0.0);
    a[q * n + q] = C64::new(aqq + t * mag, 0.0);

    // V ← V U
    for r in 0..n {
        let vrp = v[r * n + p];
        let vrq = v[r * n + q];
        v[r * n + p] = vrp * c - vrq * em * s;
        v[r * n + q] = vrp * s + vrq * em * c;
    }
}

fn finish(n: usize, a: &[C64], v: Vec<C64>, sweeps: usize) -> EigenDecomposition {
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep their original index order
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, k, v[r * n + i]);
        }
    }
    EigenDecomposition {
        eigenvalues,
        eigenvectors: vecs,
        sweeps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(d: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let mut data = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        HermitianMatrix::symmetrized(d, data)
    }

    #[test]
    fn diagonal_input() {
        let e = hermitian_eig(&HermitianMatrix::diagonal(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 1.0]);
        assert_eq!(e.eigenvectors, ComplexMatrix::identity(2));
    }

    #[test]
    fn pauli_x() {
        let x = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2, 3, 8, 17] {
            let h = random_hermitian(d, &mut rng);
            let e = hermitian_eig(&h).unwrap();
            let resid = (&e.reconstruct() - &h).hs_norm();
            assert!(resid <= 1e-10 * h.hs_norm(), "d={d} resid={resid}");
            assert!(e.eigenvectors.unitarity_residual() <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn warm_start_matches_cold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(6, &mut rng);
        let cold = hermitian_eig(&h).unwrap();
        let perturbed = h.add_scaled(1e-3, &random_hermitian(6, &mut rng));
        let warm = hermitian_eig_from(&perturbed, &cold.eigenvectors).unwrap();
        let fresh = hermitian_eig(&perturbed).unwrap();
        for (a, b) in warm.eigenvalues.iter().zip(&fresh.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((&warm.reconstruct() - &perturbed).hs_norm() < 1e-12);
        assert!(warm.sweeps <= fresh.sweeps);
    }

    #[test]
    fn zero_matrix() {
        let e = hermitian_eig(&HermitianMatrix::zeros(4)).unwrap();
        assert_eq!(e.sweeps, 0);
        assert!(e.eigenvalues.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn degenerate_ties_keep_index_order() {
        let e = hermitian_eig(&HermitianMatrix::diagonal(&[1.0, 2.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![2.0, 1.0, 1.0]);
        assert_eq!(e.vector(1)[0], ONE);
        assert_eq!(e.vector(2)[2], ONE);
    }
}
