//! Pure-state tomography from five orthonormal bases.
//!
//! The pipeline: build a five-basis scheme from an orthogonal polynomial
//! family ([`bases`]), simulate outcome tables ([`measurement`]), recover a
//! state with a convex program ([`recovery`]), and check whether a scheme
//! determines pure states stably ([`certify`]). [`experiment`] runs the
//! Monte-Carlo error studies.

// `!(x > 0.0)` is used on purpose so that NaN fails the check, and indexed
// loops read better than iterator chains in the dense kernels.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bases;
pub mod certify;
pub mod error;
pub mod experiment;
pub mod io;
pub mod linalg;
pub mod measurement;
pub mod polynomials;
pub mod recovery;

pub use bases::{build_scheme, default_alpha, FiveBasisScheme, OrthonormalBasis};
pub use certify::{check_determination, scheme_distance, Certificate, DistanceNorms};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentConfig, ExperimentStats};
pub use linalg::{ComplexMatrix, HermitianMatrix, C64};
pub use measurement::{forward_map, DensityMatrix, MeasurementScheme, OutcomeTable, Povm};
pub use polynomials::{chebyshev_u_family, hermite_family, PolynomialFamily};
pub use recovery::{solve_least_squares, solve_trace_min, Program, RecoveryResult, SolverOptions, TableNorm};
