//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tomo5::measurement::{sample_haar_pure, sample_noise};
use tomo5::{
    build_scheme, chebyshev_u_family, default_alpha, forward_map, DensityMatrix, MeasurementScheme, OutcomeTable,
};

/// All five Chebyshev-U bases at `α = π/d`.
pub fn five_basis(d: usize) -> MeasurementScheme {
    let s = build_scheme(&chebyshev_u_family(), d, default_alpha(d)).expect("valid dimension");
    MeasurementScheme::from_five_basis(&s, &[0, 1, 2, 3, 4]).expect("five bases")
}

/// A Haar-random pure state and its outcome table with noise of norm `eps`.
pub fn noisy_instance(scheme: &MeasurementScheme, eps: f64, seed: u64) -> (DensityMatrix, OutcomeTable) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = sample_haar_pure(scheme.dim(), &mut rng);
    let f = sample_noise(scheme.num_povms(), scheme.outcomes(), eps, &mut rng);
    let b = forward_map(scheme, &sigma)
        .expect("matching dimension")
        .add(&f)
        .expect("matching shape");
    (sigma, b)
}
