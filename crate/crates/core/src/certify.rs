//! Numerical evidence for the determination property.
//!
//! A scheme determines pure states among all states iff every nonzero
//! element of `ker M_Q` has at least two positive eigenvalues, and the
//! margin of that property is `c = min_{X ∈ K} ‖M_Q(X)‖` over
//! `K = {X : λ₂(X) ≤ 0, ‖X‖₂ = 1}`. `K` is sampled as normalized differences
//! `(σ − ρ)/‖σ − ρ‖₂` of a Haar-random pure state and a Hilbert–Schmidt
//! random mixed state, which cover `K` exactly.
//!
//! Sampling can only overestimate `c`, so a positive `c_estimate` is
//! evidence, not proof. A witness (an element of `K` in the kernel) on the
//! other hand is checked exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix, NormKind, C64};
use crate::measurement::{haar_vector, MeasurementScheme};
use crate::recovery::TableNorm;

/// Singular values below `KERNEL_TOL · σ_max` span the numerical kernel.
pub const KERNEL_TOL: f64 = 1e-10;

/// Eigenvalues above this (for unit-norm matrices) count as positive.
pub const POSITIVE_TOL: f64 = 1e-8;

/// `c_estimate` at or below this value means the margin is numerically zero.
pub const ZERO_MARGIN_TOL: f64 = 1e-10;

/// Random kernel combinations drawn when the kernel is nontrivial.
pub const KERNEL_SAMPLES: usize = 1000;

/// Local search parameters: starting points and passes over all coordinates.
const REFINE_STARTS: usize = 10;
const REFINE_STEPS: usize = 100;

const CHUNK: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub dim: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    /// No sampled or refined kernel element has fewer than two positive
    /// eigenvalues. Vacuously true for a trivial kernel.
    pub kernel_positivity_ok: bool,
    /// Smallest `‖M(X)‖₂` found over `K`.
    pub c_estimate: f64,
    /// The element of `K` attaining `c_estimate`: unit HS norm, at most one
    /// positive eigenvalue.
    pub worst_witness: HermitianMatrix,
    pub worst_witness_eigenvalues: Vec<f64>,
    /// A kernel element with exactly one positive eigenvalue, if found.
    pub kernel_witness: Option<HermitianMatrix>,
    pub samples_used: usize,
    pub seed: u64,
}

impl Certificate {
    /// True unless a witness against the determination property was found.
    pub fn passed(&self) -> bool {
        self.kernel_positivity_ok && self.c_estimate > ZERO_MARGIN_TOL
    }
}

/// HS-orthonormal basis of the numerical kernel of `M_Q`.
pub fn kernel_basis(scheme: &MeasurementScheme, tol: f64) -> Vec<HermitianMatrix> {
    scheme
        .svd()
        .null_space(tol)
        .iter()
        .map(|v| scheme.coords().from_coords(v))
        .collect()
}

/// `(σ, ρ)` generators of an element of `K`: `ψ` for `σ = |ψ⟩⟨ψ|` and a
/// Ginibre matrix `G` for `ρ = GG†/tr GG†`.
#[derive(Debug, Clone)]
struct KPoint {
    psi: Vec<C64>,
    g: Vec<C64>,
}

impl KPoint {
    fn sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let psi = haar_vector(d, rng);
        let g = (0..d * d)
            .map(|_| {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                C64::new(re, im)
            })
            .collect();
        Self { psi, g }
    }

    /// Real parameters, for coordinate descent.
    fn params(&self) -> Vec<f64> {
        self.psi.iter().chain(&self.g).flat_map(|z| [z.re, z.im]).collect()
    }

    fn from_params(d: usize, p: &[f64]) -> Self {
        let z: Vec<C64> = p.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        Self {
            psi: z[..d].to_vec(),
            g: z[d..].to_vec(),
        }
    }

    /// The normalized difference, or `None` if it is (numerically) zero.
    fn matrix(&self) -> Option<HermitianMatrix> {
        let d = self.psi.len();
        let pn: f64 = self.psi.iter().map(|z| z.norm_sqr()).sum();
        let gn: f64 = self.g.iter().map(|z| z.norm_sqr()).sum();
        if !(pn > 0.0 && gn > 0.0) {
            return None;
        }
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                let mut rho = C64::new(0.0, 0.0);
                for k in 0..d {
                    rho += self.g[r * d + k] * self.g[c * d + k].conj();
                }
                data[r * d + c] = self.psi[r] * self.psi[c].conj() / pn - rho / gn;
            }
        }
        let x = HermitianMatrix::new(d, data).ok()?;
        let n = x.hs_norm();
        (n > 1e-12).then(|| x.scale(1.0 / n))
    }
}

fn data_norm(scheme: &MeasurementScheme, x: &HermitianMatrix) -> f64 {
    let v = scheme.apply_coords(&scheme.coords().to_coords(x));
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Sequential `±h` coordinate search; `h` halves after a pass without
/// improvement.
fn coordinate_descent(mut p: Vec<f64>, mut f: impl FnMut(&[f64]) -> f64, steps: usize, h0: f64) -> (Vec<f64>, f64) {
    let mut best = f(&p);
    let mut h = h0;
    for _ in 0..steps {
        let mut improved = false;
        for i in 0..p.len() {
            for dir in [1.0, -1.0] {
                let old = p[i];
                p[i] = old + dir * h;
                let v = f(&p);
                if v < best {
                    best = v;
                    improved = true;
                    break;
                }
                p[i] = old;
            }
        }
        if !improved {
            h *= 0.5;
            if h < 1e-12 {
                break;
            }
        }
    }
    (p, best)
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Samples `K`, refines the smallest values by local search, and checks the
/// kernel for elements with a single positive eigenvalue.
///
/// Work is split into fixed-size chunks, each with its own random stream
/// derived from `seed`, and merged in chunk order, so the certificate does
/// not depend on the number of worker threads.
pub fn check_determination(scheme: &MeasurementScheme, n_samples: usize, seed: u64) -> Result<Certificate> {
    if n_samples < 1 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let d = scheme.dim();
    let n_chunks = n_samples.div_ceil(CHUNK);

    let mut ranked: Vec<(f64, usize, KPoint)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut local = Vec::with_capacity(count);
            for i in 0..count {
                // σ = ρ has probability zero; redraw if it happens numerically
                let (point, x) = loop {
                    let p = KPoint::sample(d, &mut rng);
                    if let Some(x) = p.matrix() {
                        break (p, x);
                    }
                };
                local.push((data_norm(scheme, &x), c * CHUNK + i, point));
            }
            local.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            local.truncate(REFINE_STARTS);
            local
        })
        .flatten()
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    ranked.truncate(REFINE_STARTS);

    let refined: Vec<(f64, KPoint)> = ranked
        .par_iter()
        .map(|(value, _, start)| {
            let objective = |p: &[f64]| match KPoint::from_params(d, p).matrix() {
                Some(x) => data_norm(scheme, &x),
                None => f64::INFINITY,
            };
            let (p, v) = coordinate_descent(start.params(), objective, REFINE_STEPS, 0.05);
            if v < *value {
                (v, KPoint::from_params(d, &p))
            } else {
                (*value, start.clone())
            }
        })
        .collect();
    let (mut c_estimate, best) = refined
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one sample");
    let mut worst = best.matrix().expect("refined point is nonzero");

    let basis = kernel_basis(scheme, KERNEL_TOL);
    let kernel_witness = if basis.is_empty() {
        None
    } else {
        search_kernel(scheme, &basis, seed, n_chunks)?
    };
    if let Some(w) = &kernel_witness {
        let v = data_norm(scheme, w);
        if v < c_estimate {
            c_estimate = v;
            worst = w.clone();
        }
    }
    let worst_witness_eigenvalues = hermitian_eig(&worst)?.eigenvalues;
    Ok(Certificate {
        dim: d,
        rank: scheme.svd().rank(KERNEL_TOL),
        kernel_dim: basis.len(),
        kernel_positivity_ok: kernel_witness.is_none(),
        c_estimate,
        worst_witness: worst,
        worst_witness_eigenvalues,
        kernel_witness,
        samples_used: n_samples,
        seed,
    })
}

fn combine(basis: &[HermitianMatrix], coeffs: &[f64]) -> Option<HermitianMatrix> {
    let n = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return None;
    }
    let mut x = HermitianMatrix::zeros(basis[0].dim());
    for (k, c) in basis.iter().zip(coeffs) {
        x = x.add_scaled(c / n, k);
    }
    Some(x)
}

/// `min(λ₂(X), λ₂(−X))`: negative iff `X` or `−X` has a single positive
/// eigenvalue.
fn second_eigenvalue(x: &HermitianMatrix) -> Result<f64> {
    let ev = hermitian_eig(x)?.eigenvalues;
    let n = ev.len();
    if n < 2 {
        return Ok(0.0);
    }
    Ok(ev[1].min(-ev[n - 2]))
}

fn oriented(x: HermitianMatrix) -> Result<HermitianMatrix> {
    let ev = hermitian_eig(&x)?.eigenvalues;
    let n = ev.len();
    Ok(if ev[1] <= -ev[n - 2] { x } else { -&x })
}

/// Random unit combinations of the kernel basis followed by local
/// minimization of `λ₂`. Returns a verified witness, if any.
fn search_kernel(
    scheme: &MeasurementScheme,
    basis: &[HermitianMatrix],
    seed: u64,
    stream_offset: usize,
) -> Result<Option<HermitianMatrix>> {
    let k = basis.len();
    let mut rng = chunk_rng(seed, stream_offset);
    let mut samples = Vec::with_capacity(KERNEL_SAMPLES);
    for i in 0..KERNEL_SAMPLES {
        let c: Vec<f64> = (0..k).map(|_| rng.sample(rand_distr::StandardNormal)).collect();
        let x = combine(basis, &c).expect("Gaussian coefficients are nonzero");
        samples.push((second_eigenvalue(&x)?, i, c));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    samples.truncate(REFINE_STARTS);

    let refined: Vec<(f64, Vec<f64>)> = samples
        .into_par_iter()
        .map(|(v, _, c)| {
            if v < -POSITIVE_TOL {
                return (v, c);
            }
            let objective = |p: &[f64]| match combine(basis, p) {
                Some(x) => second_eigenvalue(&x).unwrap_or(f64::INFINITY),
                None => f64::INFINITY,
            };
            let n = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit: Vec<f64> = c.iter().map(|x| x / n).collect();
            let (p, v) = coordinate_descent(unit, objective, REFINE_STEPS, 0.1);
            (v, p)
        })
        .collect();
    for (v, c) in refined {
        if v < -POSITIVE_TOL {
            let x = oriented(combine(basis, &c).expect("nonzero"))?;
            if is_kernel_witness(scheme, &x)? {
                return Ok(Some(x));
            }
        }
    }
    Ok(None)
}

/// Exact check of a kernel witness: unit norm, numerically in the kernel,
/// exactly one positive eigenvalue and `λ₂ < −POSITIVE_TOL`.
pub fn is_kernel_witness(scheme: &MeasurementScheme, x: &HermitianMatrix) -> Result<bool> {
    let n = x.hs_norm();
    if !(n > 0.0) {
        return Ok(false);
    }
    let x = x.scale(1.0 / n);
    let ev = hermitian_eig(&x)?.eigenvalues;
    let positive = ev.iter().filter(|&&l| l > POSITIVE_TOL).count();
    let in_kernel = data_norm(scheme, &x) <= KERNEL_TOL * scheme.operator_norm().max(1.0) * 10.0;
    Ok(in_kernel && positive == 1 && ev.get(1).is_some_and(|&l| l < -POSITIVE_TOL))
}

/// Norms used on `H(d)` and on outcome tables for operator norms of `M_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceNorms {
    pub state: NormKind,
    pub table: TableNorm,
}

impl Default for DistanceNorms {
    fn default() -> Self {
        Self {
            state: NormKind::HilbertSchmidt,
            table: TableNorm::HilbertSchmidt,
        }
    }
}

fn check_shapes(a: &MeasurementScheme, b: &MeasurementScheme) -> Result<()> {
    let sa = (a.dim(), a.num_povms(), a.outcomes());
    let sb = (b.dim(), b.num_povms(), b.outcomes());
    if sa != sb {
        return Err(Error::Precondition(format!(
            "schemes have shapes (d, l, m) = {sa:?} and {sb:?}"
        )));
    }
    Ok(())
}

/// `‖M_a − M_b‖` as an operator norm. Exact (largest singular value of the
/// difference of the coordinate matrices) for Hilbert–Schmidt norms on both
/// sides, otherwise the sampled lower bound of [`sampled_distance`].
pub fn scheme_distance(
    a: &MeasurementScheme,
    b: &MeasurementScheme,
    norms: DistanceNorms,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_shapes(a, b)?;
    if norms == DistanceNorms::default() {
        return Ok(a.matrix().sub(b.matrix())?.svd().sigma_max());
    }
    sampled_distance(a, b, norms, n_samples, seed)
}

/// `max ‖(M_a − M_b)(X)‖ / ‖X‖` over random Hermitian `X`: a lower bound on
/// the operator norm.
pub fn sampled_distance(
    a: &MeasurementScheme,
    b: &MeasurementScheme,
    norms: DistanceNorms,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_shapes(a, b)?;
    if n_samples < 1 {
        return Err(Error::Precondition("n_samples must be at least 1".into()));
    }
    let diff = a.matrix().sub(b.matrix())?;
    let d = a.dim();
    let cols = a.outcomes();
    let n_chunks = n_samples.div_ceil(CHUNK);
    let best = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<f64> {
            let mut rng = chunk_rng(seed, c);
            let mut best = 0.0f64;
            for _ in 0..CHUNK.min(n_samples - c * CHUNK) {
                let x = crate::measurement::random_hermitian(d, &mut rng);
                let n = x.norm(norms.state)?;
                if !(n > 0.0) {
                    continue;
                }
                let y = diff.matvec(&a.coords().to_coords(&x));
                best = best.max(crate::recovery::table_norm(&y, cols, norms.table) / n);
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(best.into_iter().fold(0.0, f64::max))
}
