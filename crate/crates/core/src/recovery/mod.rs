//! Convex recovery of a pure state from (possibly perturbed) outcome tables.
//!
//! Two programs are provided: PSD least squares ([`solve_least_squares`],
//! accelerated projected gradient) and trace minimization over an error ball
//! ([`solve_trace_min`], ADMM). Both work on Gell-Mann coordinates, so the
//! only matrix-valued step is the projection onto the PSD cone.

mod lsq;
mod trace_min;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, hermitian_eig_from, ComplexMatrix, HermitianMatrix, C64};
use crate::measurement::GellMannBasis;

pub use lsq::solve_least_squares;
pub use trace_min::solve_trace_min;
pub(crate) use trace_min::table_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Program {
    TraceMin,
    Lsq,
}

impl Program {
    pub fn name(self) -> &'static str {
        match self {
            Program::TraceMin => "trace-min",
            Program::Lsq => "lsq",
        }
    }
}

impl std::str::FromStr for Program {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace-min" => Ok(Program::TraceMin),
            "lsq" => Ok(Program::Lsq),
            other => Err(Error::Parse(format!(
                "unknown program '{other}' (expected trace-min or lsq)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    /// Step `1/L` with `L = σ_max(A)²`.
    FixedLipschitz,
}

/// Norm on outcome tables, e.g. for the trace-minimization constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableNorm {
    HilbertSchmidt,
    /// `sup_i Σ_j |f_ij|`.
    SupRowL1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub step_rule: StepRule,
    /// Initial ADMM penalty.
    pub penalty: f64,
    /// Norm of the trace-minimization constraint.
    pub constraint_norm: TableNorm,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            rel_tol: 1e-9,
            step_rule: StepRule::FixedLipschitz,
            penalty: 1.0,
            constraint_norm: TableNorm::HilbertSchmidt,
        }
    }
}

impl SolverOptions {
    /// Defaults for noisy experiment runs, where `rel_tol = 1e-7` is far below
    /// the noise floor.
    pub fn experiment() -> Self {
        Self {
            rel_tol: 1e-7,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Precondition("max_iters must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Precondition(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::Precondition(format!(
                "penalty must be positive, got {}",
                self.penalty
            )));
        }
        Ok(())
    }
}

/// Top eigenvector of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PureEstimate {
    /// Unit vector; the first nonzero component is real and positive.
    pub vector: Vec<C64>,
    /// `λ₂/λ₁`; zero for an exactly rank-one estimate.
    pub purity_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub solver: Program,
    /// PSD minimizer.
    pub estimate: HermitianMatrix,
    /// `None` when the estimate is the zero matrix.
    pub pure: Option<PureEstimate>,
    /// `‖M(Y*) − b‖₂`.
    pub residual: f64,
    /// Final objective: `tr Y*` for trace minimization, `‖M(Y*) − b‖₂` for
    /// least squares.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Error scale of the trace-minimization constraint.
    pub epsilon: Option<f64>,
    pub options: SolverOptions,
}

impl RecoveryResult {
    fn new(
        solver: Program,
        estimate: HermitianMatrix,
        residual: f64,
        iterations: usize,
        converged: bool,
        epsilon: Option<f64>,
        options: SolverOptions,
    ) -> Result<Self> {
        let pure = match extract_pure(&estimate) {
            Ok((vector, purity_gap)) => Some(PureEstimate { vector, purity_gap }),
            Err(Error::ZeroMatrix) => None,
            Err(e) => return Err(e),
        };
        let objective = match solver {
            Program::TraceMin => estimate.trace(),
            Program::Lsq => residual,
        };
        Ok(Self {
            solver,
            estimate,
            pure,
            residual,
            objective,
            iterations,
            converged,
            epsilon,
            options,
        })
    }

    pub fn pure_vector(&self) -> Option<&[C64]> {
        self.pure.as_ref().map(|p| p.vector.as_slice())
    }
}

/// Unit top eigenvector of a PSD matrix (first nonzero component made
/// real-positive) together with `λ₂/λ₁`.
pub fn extract_pure(y: &HermitianMatrix) -> Result<(Vec<C64>, f64)> {
    let eig = hermitian_eig(y)?;
    let top = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let gap = eig.eigenvalues.get(1).map_or(0.0, |&l| l.max(0.0) / top);
    let mut v = eig.vector(0);
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(z) = v.iter().copied().find(|z| z.norm() > 1e-12 * scale) {
        let phase = z.conj() / z.norm();
        for c in v.iter_mut() {
            *c *= phase;
        }
    }
    Ok((v, gap))
}

/// `|⟨ψ|φ⟩|²` for unit vectors.
pub fn fidelity(psi: &[C64], phi: &[C64]) -> f64 {
    crate::linalg::inner(psi, phi).norm_sqr()
}

/// PSD projection on Gell-Mann coordinates that reuses the previous
/// eigenbasis as a starting point.
pub(crate) struct PsdProjector {
    coords: GellMannBasis,
    basis: Option<ComplexMatrix>,
}

impl PsdProjector {
    pub(crate) fn new(coords: GellMannBasis) -> Self {
        Self { coords, basis: None }
    }

    pub(crate) fn project(&mut self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.coords.from_coords(x);
        let eig = match &self.basis {
            Some(g) => hermitian_eig_from(&h, g)?,
            None => hermitian_eig(&h)?,
        };
        let clipped = eig.reconstruct_with(|l| l.max(0.0));
        self.basis = Some(eig.eigenvectors);
        Ok(self.coords.to_coords(&clipped))
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
