//! POVMs, measurement schemes, and the linear map `M_Q(X)_{i,j} = tr(X P_i(j))`.

mod coords;
mod sampling;

use std::ops::Deref;
use std::sync::OnceLock;

use crate::bases::{FiveBasisScheme, OrthonormalBasis};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, vec_norm, Cholesky, HermitianMatrix, RealMatrix, Svd, C64};

pub use coords::GellMannBasis;
pub use sampling::{haar_vector, random_hermitian, sample_haar_pure, sample_hs_mixed, sample_noise};

/// Tolerance for effect positivity and completeness.
pub const POVM_TOL: f64 = 1e-10;

/// A finite-outcome POVM: PSD effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        let d = match effects.first() {
            Some(e) => e.dim(),
            None => return Err(Error::InvalidPovm("a POVM needs at least one effect".into())),
        };
        let mut total = HermitianMatrix::zeros(d);
        for (j, e) in effects.iter().enumerate() {
            if e.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: e.dim(),
                });
            }
            let min = hermitian_eig(e)?.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!("effect {j} has eigenvalue {min:.3e}")));
            }
            total = &total + e;
        }
        let defect = (&total - &HermitianMatrix::identity(d)).hs_norm();
        if defect > POVM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self { effects })
    }

    /// Rank-one projectors `|v_j⟩⟨v_j|` onto the basis vectors.
    pub fn from_basis(basis: &OrthonormalBasis) -> Self {
        Self {
            effects: basis.vectors().iter().map(|v| HermitianMatrix::outer(v)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    /// Mixes every effect with white noise: `(1−η) P + η tr(P) I/d`.
    pub fn depolarized(&self, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Precondition(format!("eta must lie in [0, 1], got {eta}")));
        }
        let d = self.dim();
        let id = HermitianMatrix::identity(d);
        let effects = self
            .effects
            .iter()
            .map(|p| p.scale(1.0 - eta).add_scaled(eta * p.trace() / d as f64, &id))
            .collect();
        Ok(Self { effects })
    }
}

/// Rank-one projective POVM of a basis.
pub fn povm_from_basis(basis: &OrthonormalBasis) -> Povm {
    Povm::from_basis(basis)
}

/// A list of POVMs on the same space with the same number of outcomes,
/// together with the real `(l·m) x d²` matrix of the induced linear map in
/// Gell-Mann coordinates.
#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    dim: usize,
    outcomes: usize,
    povms: Vec<Povm>,
    labels: Vec<String>,
    coords: GellMannBasis,
    matrix: RealMatrix,
    svd: OnceLock<Svd>,
    normal: OnceLock<Cholesky>,
}

impl MeasurementScheme {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let labels = (0..povms.len()).map(|i| format!("P{i}")).collect();
        Self::with_labels(povms, labels)
    }

    pub fn with_labels(povms: Vec<Povm>, labels: Vec<String>) -> Result<Self> {
        let first = povms
            .first()
            .ok_or_else(|| Error::Precondition("a measurement scheme needs at least one POVM".into()))?;
        let (dim, outcomes) = (first.dim(), first.outcomes());
        for p in &povms {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
            if p.outcomes() != outcomes {
                return Err(Error::DimensionMismatch {
                    expected: outcomes,
                    found: p.outcomes(),
                });
            }
        }
        if labels.len() != povms.len() {
            return Err(Error::DimensionMismatch {
                expected: povms.len(),
                found: labels.len(),
            });
        }
        let coords = GellMannBasis::new(dim);
        let rows = povms.len() * outcomes;
        let mut data = Vec::with_capacity(rows * dim * dim);
        for p in &povms {
            for e in p.effects() {
                data.extend(coords.to_coords(e));
            }
        }
        let matrix = RealMatrix::from_row_major(rows, dim * dim, data)?;
        Ok(Self {
            dim,
            outcomes,
            povms,
            labels,
            coords,
            matrix,
            svd: OnceLock::new(),
            normal: OnceLock::new(),
        })
    }

    pub fn from_bases(bases: &[&OrthonormalBasis], labels: Vec<String>) -> Result<Self> {
        Self::with_labels(bases.iter().map(|b| Povm::from_basis(b)).collect(), labels)
    }

    /// The measurement scheme of the selected bases of a five-basis
    /// construction, e.g. `&[0, 1, 2, 3, 4]` or `&[1, 2, 3, 4]`.
    pub fn from_five_basis(scheme: &FiveBasisScheme, which: &[usize]) -> Result<Self> {
        if let Some(&bad) = which.iter().find(|&&l| l >= 5) {
            return Err(Error::Precondition(format!("basis index {bad} out of range 0..5")));
        }
        let bases: Vec<&OrthonormalBasis> = which.iter().map(|&l| scheme.basis(l)).collect();
        let labels = which.iter().map(|l| format!("B{l}")).collect();
        Self::from_bases(&bases, labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `m`, outcomes per POVM.
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    /// `l`, number of POVMs.
    pub fn num_povms(&self) -> usize {
        self.povms.len()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> &GellMannBasis {
        &self.coords
    }

    /// The matrix of `M_Q` acting on Gell-Mann coordinates.
    pub fn matrix(&self) -> &RealMatrix {
        &self.matrix
    }

    /// SVD of [`Self::matrix`], computed on first use.
    pub fn svd(&self) -> &Svd {
        self.svd.get_or_init(|| self.matrix.svd())
    }

    /// `σ_max` of the coordinate matrix: the operator norm of `M_Q` for
    /// Hilbert–Schmidt norms on both sides.
    pub fn operator_norm(&self) -> f64 {
        self.svd().sigma_max()
    }

    /// Cholesky factor of `AᵀA + I`, computed on first use.
    pub(crate) fn normal_factor(&self) -> &Cholesky {
        self.normal
            .get_or_init(|| Cholesky::new(&self.matrix.gram().add_identity(1.0)).expect("AᵀA + I is positive definite"))
    }

    /// Every effect depolarized with strength `eta`.
    pub fn depolarized(&self, eta: f64) -> Result<Self> {
        let povms = self.povms.iter().map(|p| p.depolarized(eta)).collect::<Result<_>>()?;
        Self::with_labels(povms, self.labels.clone())
    }

    /// `M_Q` applied to coordinates, flattened row-major.
    pub fn apply_coords(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }

    pub(crate) fn check_table(&self, t: &OutcomeTable) -> Result<()> {
        if t.rows() != self.num_povms() || t.cols() != self.outcomes {
            return Err(Error::DimensionMismatch {
                expected: self.num_povms() * self.outcomes,
                found: t.rows() * t.cols(),
            });
        }
        Ok(())
    }
}

/// `M_Q(X)` evaluated directly from the effects.
pub fn forward_map(scheme: &MeasurementScheme, x: &HermitianMatrix) -> Result<OutcomeTable> {
    scheme.check_dim(x.dim())?;
    let data = scheme
        .povms
        .iter()
        .flat_map(|p| p.effects().iter().map(|e| x.hs_inner(e)))
        .collect();
    OutcomeTable::from_flat(scheme.num_povms(), scheme.outcomes, data)
}

pub fn measurement_matrix(scheme: &MeasurementScheme) -> &RealMatrix {
    scheme.matrix()
}

/// An `l x m` real table, one POVM per row.
///
/// Exact probabilities have rows summing to one; tables with additive noise
/// need not be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl OutcomeTable {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r);
        }
        Ok(Self { rows: n, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `sup_i Σ_j |M_ij|`.
    pub fn sup_row_l1(&self) -> f64 {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&Self {
            rows: other.rows,
            cols: other.cols,
            data: other.data.iter().map(|x| -x).collect(),
        })
    }
}

/// A unit-trace PSD Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianMatrix);

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        let tr = h.trace();
        if (tr - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("state has trace {tr}, expected 1")));
        }
        let min = hermitian_eig(&h)?.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::Precondition(format!("state has negative eigenvalue {min:.3e}")));
        }
        Ok(Self(h))
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = vec_norm(psi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Precondition("state vector must be nonzero and finite".into()));
        }
        let unit: Vec<C64> = psi.iter().map(|z| z / n).collect();
        Ok(Self::from_pure_unchecked(&unit))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(HermitianMatrix::identity(d).scale(1.0 / d as f64))
    }

    pub(crate) fn from_pure_unchecked(unit: &[C64]) -> Self {
        Self(HermitianMatrix::outer(unit))
    }

    pub(crate) fn from_hermitian_unchecked(h: HermitianMatrix) -> Self {
        Self(h)
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.0
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.0
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianMatrix;
    fn deref(&self) -> &HermitianMatrix {
        &self.0
    }
}
