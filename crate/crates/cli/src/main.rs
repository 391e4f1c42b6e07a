//! `tomo5`: generate five-basis schemes, simulate outcome tables, recover
//! states, certify schemes and run recovery experiments.
//!
//! Exit codes: 0 success, 1 other failure (I/O, numerics), 2 invalid input,
//! 3 solver did not converge, 4 certification found a witness.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tomo5::bases::validate_scheme;
use tomo5::experiment::{records_to_csv, thread_pool_from_env, ExperimentConfig};
use tomo5::io;
use tomo5::measurement::sample_noise;
use tomo5::{
    build_scheme, check_determination, default_alpha, forward_map, run_experiment, solve_least_squares,
    solve_trace_min, Error, FiveBasisScheme, MeasurementScheme, PolynomialFamily, Program, SolverOptions,
};

const EXIT_PRECONDITION: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;
const EXIT_WITNESS: u8 = 4;

#[derive(Parser)]
#[command(name = "tomo5", version, about = "Pure-state tomography with five orthonormal bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the five bases for a polynomial family and write them as JSON.
    Bases {
        #[arg(long)]
        dim: usize,
        /// chebyshev-u, hermite, or custom:<file> with recurrence coefficients.
        #[arg(long, default_value = "chebyshev-u")]
        family: String,
        /// Phase parameter in radians, or `auto` for π/dim.
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate the outcome table of a state, with noise of HS norm `eps`.
    Simulate {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a state from an outcome table.
    Recover {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        probs: PathBuf,
        #[arg(long, value_parser = parse_program)]
        program: Program,
        /// Constraint radius; required for trace-min.
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the determination property of a scheme.
    Certify {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use only these bases (comma-separated indices 0..=4).
        #[arg(long, value_delimiter = ',')]
        bases: Option<Vec<usize>>,
        /// Depolarize every effect with this weight first.
        #[arg(long)]
        depolarize: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte-Carlo recovery experiment on Haar-random pure states.
    Experiment {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, value_parser = parse_program, default_value = "trace-min")]
        program: Program,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "chebyshev-u")]
        family: String,
        #[arg(long, default_value = "auto")]
        alpha: String,
        /// Use noiseless data; `eps` only sets the constraint and error scale.
        #[arg(long)]
        noiseless: bool,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        hist: PathBuf,
        /// Optional per-trial CSV.
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
}

fn parse_program(s: &str) -> Result<Program, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> anyhow::Result<PolynomialFamily> {
    Ok(match s.strip_prefix("custom:") {
        Some(path) => PolynomialFamily::from_json_file(path).with_context(|| format!("loading family from {path}"))?,
        None => PolynomialFamily::by_name(s)?,
    })
}

fn parse_alpha(s: &str, dim: usize) -> anyhow::Result<f64> {
    if s == "auto" {
        return Ok(default_alpha(dim));
    }
    s.parse()
        .map_err(|_| Error::Parse(format!("alpha must be a number of radians or 'auto', got '{s}'")).into())
}

fn load_measurement(path: &Path) -> anyhow::Result<(FiveBasisScheme, MeasurementScheme)> {
    let five = io::load_scheme(path).with_context(|| format!("loading scheme {}", path.display()))?;
    let m = MeasurementScheme::from_five_basis(&five, &[0, 1, 2, 3, 4])?;
    Ok((five, m))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Bases {
            dim,
            family,
            alpha,
            out,
        } => {
            let family = parse_family(&family)?;
            let scheme = build_scheme(&family, dim, parse_alpha(&alpha, dim)?)?;
            let report = validate_scheme(&scheme, 1e-8)?;
            if !report.passed() {
                bail!(
                    "generated bases fail validation (unitarity {:?}, norm identity error {:.3e})",
                    report.unitarity,
                    report.max_norm_rel_error()
                );
            }
            io::save_scheme(&scheme, &out)?;
            eprintln!(
                "d={dim} family={} alpha={:.6}: max ‖B†B−I‖ {:.2e}",
                family.name(),
                scheme.alpha,
                report.unitarity.iter().fold(0.0f64, |a, &b| a.max(b))
            );
        }
        Command::Simulate {
            scheme,
            state,
            eps,
            seed,
            out,
        } => {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::Precondition(format!("eps must be non-negative, got {eps}")).into());
            }
            let (_, m) = load_measurement(&scheme)?;
            let sigma = io::load_state(&state).with_context(|| format!("loading state {}", state.display()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = sample_noise(m.num_povms(), m.outcomes(), eps, &mut rng);
            let b = forward_map(&m, &sigma)?.add(&f)?;
            write(&out, &io::table_to_csv(&b, m.labels()))?;
        }
        Command::Recover {
            scheme,
            probs,
            program,
            eps,
            max_iters,
            rel_tol,
            out,
        } => {
            let (_, m) = load_measurement(&scheme)?;
            let text = std::fs::read_to_string(&probs).with_context(|| format!("reading {}", probs.display()))?;
            let (b, _) = io::table_from_csv(&text)?;
            let mut opts = SolverOptions::default();
            if let Some(n) = max_iters {
                opts.max_iters = n;
            }
            if let Some(t) = rel_tol {
                opts.rel_tol = t;
            }
            let result = match program {
                Program::Lsq => solve_least_squares(&m, &b, &opts)?,
                Program::TraceMin => {
                    let eps = eps.ok_or_else(|| Error::Precondition("trace-min needs --eps".into()))?;
                    solve_trace_min(&m, &b, eps, &opts)?
                }
            };
            io::write_json(&result, &out)?;
            eprintln!(
                "{}: residual {:.3e}, {} iterations, converged {}",
                program.name(),
                result.residual,
                result.iterations,
                result.converged
            );
            if !result.converged {
                return Ok(EXIT_NOT_CONVERGED);
            }
        }
        Command::Certify {
            scheme,
            samples,
            seed,
            bases,
            depolarize,
            out,
        } => {
            let five = io::load_scheme(&scheme).with_context(|| format!("loading scheme {}", scheme.display()))?;
            let which = bases.unwrap_or_else(|| vec![0, 1, 2, 3, 4]);
            if which.iter().any(|&l| l > 4) {
                return Err(Error::Precondition("basis indices must be in 0..=4".into()).into());
            }
            let mut m = MeasurementScheme::from_five_basis(&five, &which)?;
            if let Some(eta) = depolarize {
                m = m.depolarized(eta)?;
            }
            let cert = check_determination(&m, samples, seed)?;
            io::write_json(&cert, &out)?;
            eprintln!(
                "rank {}, kernel {}, c ≈ {:.4e}, kernel positivity {}",
                cert.rank, cert.kernel_dim, cert.c_estimate, cert.kernel_positivity_ok
            );
            if !cert.passed() {
                return Ok(EXIT_WITNESS);
            }
        }
        Command::Experiment {
            dim,
            trials,
            eps,
            program,
            seed,
            family,
            alpha,
            noiseless,
            out,
            hist,
            trials_out,
        } => {
            let mut config = ExperimentConfig::new(dim, trials, eps, program, seed);
            config.family = parse_family(&family)?;
            config.alpha = Some(parse_alpha(&alpha, dim)?);
            config.noiseless = noiseless;
            if noiseless {
                config.options = SolverOptions::default();
            }
            let outcome = run_experiment(&config)?;
            write(&out, &outcome.stats.to_csv(&config))?;
            write(&hist, &outcome.stats.histogram.to_csv())?;
            if let Some(path) = trials_out {
                write(&path, &records_to_csv(&outcome.records))?;
            }
            let s = &outcome.stats;
            eprintln!(
                "{} trials ({} excluded): mean {:.3}, q96 {:.3}, q99 {:.3}, q99.75 {:.3}, max {:.3}",
                s.trials, s.excluded, s.mean, s.q96, s.q99, s.q9975, s.max
            );
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = thread_pool_from_env()
        .map_err(anyhow::Error::from)
        .and_then(|pool| pool.install(|| run(cli)));
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let precondition = e
                .chain()
                .any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_precondition));
            ExitCode::from(if precondition { EXIT_PRECONDITION } else { 1 })
        }
    }
}
