//! Monte-Carlo recovery experiments: Haar-random pure states, noise of fixed
//! Hilbert–Schmidt size, and statistics of the relative error
//! `‖Y* − σ‖₂ / ε`.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bases::{build_scheme, default_alpha};
use crate::error::{Error, Result};
use crate::measurement::{forward_map, sample_haar_pure, sample_noise, MeasurementScheme};
use crate::polynomials::{chebyshev_u_family, PolynomialFamily};
use crate::recovery::{solve_least_squares, solve_trace_min, Program, SolverOptions};

pub const HISTOGRAM_BINS: usize = 100;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TOMO_THREADS";

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub trials: usize,
    pub epsilon: f64,
    /// `None` means `π/dim`.
    pub alpha: Option<f64>,
    pub family: PolynomialFamily,
    pub program: Program,
    pub seed: u64,
    /// Skip the noise term (`b = M(σ)`); `epsilon` still sets the constraint
    /// radius and the error scale.
    pub noiseless: bool,
    pub options: SolverOptions,
}

impl ExperimentConfig {
    pub fn new(dim: usize, trials: usize, epsilon: f64, program: Program, seed: u64) -> Self {
        Self {
            dim,
            trials,
            epsilon,
            alpha: None,
            family: chebyshev_u_family(),
            program,
            seed,
            noiseless: false,
            options: SolverOptions::experiment(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Precondition("trials must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Precondition(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        self.options.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrialStatus {
    Converged,
    NotConverged,
    /// The solver returned an error (e.g. reported infeasibility).
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub index: usize,
    pub seed: u64,
    /// `‖Y* − σ‖₂ / ε`; NaN for failed trials.
    pub rel_error: f64,
    pub iterations: usize,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges from 0 to the largest error.
    pub edges: Vec<f64>,
    /// Densities integrating to one over the bins.
    pub densities: Vec<f64>,
}

impl Histogram {
    /// `bins` equal-width bins over `[0, max]`; the last bin is closed.
    pub fn new(values: &[f64], bins: usize) -> Self {
        assert!(bins >= 1, "histogram needs at least one bin");
        let max = values.iter().copied().fold(0.0, f64::max);
        let hi = if max > 0.0 { max } else { 1.0 };
        let width = hi / bins as f64;
        let mut counts = vec![0usize; bins];
        for &v in values {
            let k = ((v / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let n = values.len().max(1) as f64;
        Self {
            edges: (0..=bins)
                .map(|k| if k == bins { hi } else { k as f64 * width })
                .collect(),
            densities: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_left,bin_right,density\n");
        for (k, d) in self.densities.iter().enumerate() {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", self.edges[k], self.edges[k + 1], d);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentStats {
    pub trials: usize,
    /// Trials that converged and enter the statistics.
    pub included: usize,
    pub excluded: usize,
    pub mean: f64,
    pub q96: f64,
    pub q99: f64,
    pub q9975: f64,
    pub max: f64,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentOutcome {
    pub stats: ExperimentStats,
    pub records: Vec<TrialRecord>,
}

/// Nearest-rank quantile: the `⌈p·n⌉`-th smallest value (1-based).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    assert!((0.0..=1.0).contains(&p), "quantile level must be in [0, 1]");
    let n = sorted.len();
    // the small shift keeps exact products such as 0.96 · 25 from rounding up
    let rank = ((p * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

impl ExperimentStats {
    pub fn from_records(records: &[TrialRecord]) -> Result<Self> {
        let mut values: Vec<f64> = records
            .iter()
            .filter(|r| r.status == TrialStatus::Converged)
            .map(|r| r.rel_error)
            .collect();
        if values.is_empty() {
            return Err(Error::Precondition("no trial converged".into()));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len();
        Ok(Self {
            trials: records.len(),
            included: n,
            excluded: records.len() - n,
            mean: values.iter().sum::<f64>() / n as f64,
            q96: nearest_rank(&values, 0.96),
            q99: nearest_rank(&values, 0.99),
            q9975: nearest_rank(&values, 0.9975),
            max: values[n - 1],
            histogram: Histogram::new(&values, HISTOGRAM_BINS),
        })
    }

    pub fn to_csv(&self, config: &ExperimentConfig) -> String {
        let alpha = config.alpha.unwrap_or_else(|| default_alpha(config.dim));
        let rows: [(&str, String); 16] = [
            ("dim", config.dim.to_string()),
            ("family", config.family.name().to_string()),
            ("alpha", format!("{alpha:.16e}")),
            ("program", config.program.name().to_string()),
            ("epsilon", format!("{:.16e}", config.epsilon)),
            ("noiseless", config.noiseless.to_string()),
            ("seed", config.seed.to_string()),
            ("trials", self.trials.to_string()),
            ("included", self.included.to_string()),
            ("excluded", self.excluded.to_string()),
            ("mean", format!("{:.16e}", self.mean)),
            ("q96", format!("{:.16e}", self.q96)),
            ("q99", format!("{:.16e}", self.q99)),
            ("q9975", format!("{:.16e}", self.q9975)),
            ("max", format!("{:.16e}", self.max)),
            ("bins", self.histogram.densities.len().to_string()),
        ];
        let mut out = String::from("statistic,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{k},{v}");
        }
        out
    }
}

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("trial,seed,rel_error,iterations,status\n");
    for r in records {
        let status = match r.status {
            TrialStatus::Converged => "converged",
            TrialStatus::NotConverged => "not-converged",
            TrialStatus::Failed => "failed",
        };
        let _ = writeln!(
            out,
            "{},{},{:.16e},{},{status}",
            r.index, r.seed, r.rel_error, r.iterations
        );
    }
    out
}

fn run_trial(config: &ExperimentConfig, scheme: &MeasurementScheme, index: usize) -> Result<TrialRecord> {
    let seed = config.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = sample_haar_pure(config.dim, &mut rng);
    let mut b = forward_map(scheme, &sigma)?;
    if !config.noiseless {
        b = b.add(&sample_noise(
            scheme.num_povms(),
            scheme.outcomes(),
            config.epsilon,
            &mut rng,
        ))?;
    }
    let solved = match config.program {
        Program::TraceMin => solve_trace_min(scheme, &b, config.epsilon, &config.options),
        Program::Lsq => solve_least_squares(scheme, &b, &config.options),
    };
    Ok(match solved {
        Ok(r) => TrialRecord {
            index,
            seed,
            rel_error: (&r.estimate - sigma.as_hermitian()).hs_norm() / config.epsilon,
            iterations: r.iterations,
            status: if r.converged {
                TrialStatus::Converged
            } else {
                TrialStatus::NotConverged
            },
        },
        Err(e) if e.is_precondition() => return Err(e),
        Err(_) => TrialRecord {
            index,
            seed,
            rel_error: f64::NAN,
            iterations: 0,
            status: TrialStatus::Failed,
        },
    })
}

/// Runs all trials on the current rayon pool. Trial `i` draws from its own
/// generator seeded with `seed + i`, and records are kept in trial order, so
/// the outcome does not depend on scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let alpha = config.alpha.unwrap_or_else(|| default_alpha(config.dim));
    let five = build_scheme(&config.family, config.dim, alpha)?;
    let scheme = MeasurementScheme::from_five_basis(&five, &[0, 1, 2, 3, 4])?;
    // factor once before the workers start
    let _ = scheme.svd();
    let records = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, &scheme, i))
        .collect::<Result<Vec<_>>>()?;
    let stats = ExperimentStats::from_records(&records)?;
    Ok(ExperimentOutcome { stats, records })
}

/// Thread pool honouring `TOMO_THREADS` (all cores when unset).
pub fn thread_pool_from_env() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Precondition(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::Precondition(format!("{THREADS_ENV} must be at least 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start thread pool: {e}")))
}
