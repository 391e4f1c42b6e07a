use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, OutcomeTable};
use crate::linalg::{vec_norm, HermitianMatrix, C64};

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Uniformly distributed unit vector in `ℂ^d` (normalized complex Gaussian).
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        let n = vec_norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `|ψ⟩⟨ψ|` for a Haar-random `ψ`.
pub fn sample_haar_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure_unchecked(&haar_vector(d, rng))
}

/// A state from the Hilbert–Schmidt ensemble: `G G† / tr(G G†)` with `G` a
/// complex Ginibre matrix.
pub fn sample_hs_mixed<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g: Vec<C64> = (0..d * d).map(|_| complex_gaussian(rng)).collect();
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        for c in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..d {
                acc += g[r * d + k] * g[c * d + k].conj();
            }
            data[r * d + c] = acc;
        }
    }
    let h = HermitianMatrix::symmetrized(d, data);
    let tr = h.trace();
    DensityMatrix::from_hermitian_unchecked(h.scale(1.0 / tr))
}

/// A Hermitian matrix with independent standard Gaussian real coordinates
/// (GUE up to scaling).
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianMatrix {
    let mut data = vec![C64::new(0.0, 0.0); d * d];
    for r in 0..d {
        data[r * d + r] = C64::new(rng.sample(StandardNormal), 0.0);
        for c in (r + 1)..d {
            let z = complex_gaussian(rng) * std::f64::consts::FRAC_1_SQRT_2;
            data[r * d + c] = z;
            data[c * d + r] = z.conj();
        }
    }
    HermitianMatrix::symmetrized(d, data)
}

/// A uniformly random `l x m` table on the sphere of Hilbert–Schmidt radius
/// `epsilon`. `epsilon = 0` gives the zero table.
pub fn sample_noise<R: Rng + ?Sized>(l: usize, m: usize, epsilon: f64, rng: &mut R) -> OutcomeTable {
    assert!(epsilon >= 0.0, "epsilon must be non-negative");
    if epsilon == 0.0 || l * m == 0 {
        return OutcomeTable::zeros(l, m);
    }
    loop {
        let g: Vec<f64> = (0..l * m).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            let data = g.into_iter().map(|x| x * epsilon / n).collect();
            return OutcomeTable::from_flat(l, m, data).expect("shape is consistent");
        }
    }
}
