//! The five orthonormal bases `B⁰ … B⁴`.
//!
//! With `x_j` the zeros of `p_d` and `y_j` the zeros of `p_{d−1}`:
//!
//! * `B⁰` is the canonical basis;
//! * `B¹` has columns `(p_0(x_j), …, p_{d−1}(x_j))`, normalized;
//! * `B²` is `B¹` with component `k` multiplied by `e^{ikα}`;
//! * `B³` has columns `(p_0(y_j), …, p_{d−2}(y_j), 0)` plus `e_{d−1}`;
//! * `B⁴` is `B³` with the same phases, keeping `e_{d−1}` as is.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::polynomials::PolynomialFamily;

/// Unitarity tolerance every constructed basis must meet.
pub const UNITARITY_TOL: f64 = 1e-10;

/// `d` orthonormal vectors in `ℂ^d`, stored as the columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    matrix: ComplexMatrix,
}

impl OrthonormalBasis {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.rows(),
                found: matrix.cols(),
            });
        }
        let resid = matrix.unitarity_residual();
        if !(resid <= UNITARITY_TOL) {
            return Err(Error::Precondition(format!(
                "basis is not orthonormal: ‖B†B − I‖ = {resid:.3e}"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn canonical(d: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn vector(&self, j: usize) -> Vec<C64> {
        self.matrix.column(j)
    }

    pub fn vectors(&self) -> Vec<Vec<C64>> {
        self.matrix.columns()
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.matrix.unitarity_residual()
    }
}

/// The bases together with the data they were built from.
#[derive(Debug, Clone)]
pub struct FiveBasisScheme {
    pub dim: usize,
    pub alpha: f64,
    pub family: PolynomialFamily,
    pub bases: [OrthonormalBasis; 5],
    /// Zeros of `p_d`, increasing; column `j` of `B¹`/`B²` belongs to `roots_x[j]`.
    pub roots_x: Vec<f64>,
    /// Zeros of `p_{d−1}`, increasing; column `j < d−1` of `B³`/`B⁴` belongs to `roots_y[j]`.
    pub roots_y: Vec<f64>,
}

/// The `α` used by default: `π/d`.
pub fn default_alpha(d: usize) -> f64 {
    PI / d as f64
}

/// Checks `e^{ijα} ∉ ℝ` for `j = 1, …, d−1`.
pub fn check_alpha(alpha: f64, d: usize) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::Precondition(format!("alpha must be finite, got {alpha}")));
    }
    for j in 1..d {
        let turns = j as f64 * alpha / PI;
        if (turns - turns.round()).abs() <= 1e-12 * turns.abs().max(1.0) {
            return Err(Error::InvalidAlpha { alpha, j });
        }
    }
    Ok(())
}

/// `diag(1, e^{iα}, …, e^{i(d−1)α}) · v` on the first `len` components.
fn apply_phases(v: &[C64], alpha: f64, len: usize) -> Vec<C64> {
    v.iter()
        .enumerate()
        .map(|(k, &z)| {
            if k < len {
                z * C64::from_polar(1.0, k as f64 * alpha)
            } else {
                z
            }
        })
        .collect()
}

fn real_vector(values: &[f64], len: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); len];
    for (slot, &x) in v.iter_mut().zip(values) {
        *slot = C64::new(x, 0.0);
    }
    v
}

pub fn build_scheme(family: &PolynomialFamily, d: usize, alpha: f64) -> Result<FiveBasisScheme> {
    if d < 2 {
        return Err(Error::Precondition(format!("dimension must be at least 2, got {d}")));
    }
    check_alpha(alpha, d)?;
    let roots_x = family.roots(d)?;
    let roots_y = family.roots(d - 1)?;

    let mut b1 = Vec::with_capacity(d);
    let mut b2 = Vec::with_capacity(d);
    for &x in &roots_x {
        let v = real_vector(&family.evaluate_normalized(x, d - 1)?, d);
        b2.push(apply_phases(&v, alpha, d));
        b1.push(v);
    }

    let mut b3 = Vec::with_capacity(d);
    let mut b4 = Vec::with_capacity(d);
    for &y in &roots_y {
        let v = real_vector(&family.evaluate_normalized(y, d - 2)?, d);
        b4.push(apply_phases(&v, alpha, d - 1));
        b3.push(v);
    }
    let mut last = vec![C64::new(0.0, 0.0); d];
    last[d - 1] = C64::new(1.0, 0.0);
    b3.push(last.clone());
    b4.push(last);

    let wrap = |cols: Vec<Vec<C64>>, label: usize| -> Result<OrthonormalBasis> {
        OrthonormalBasis::new(ComplexMatrix::from_columns(&cols)?).map_err(|e| match e {
            Error::Precondition(msg) => Error::InvalidFamily(format!(
                "family '{}' does not yield an orthonormal B{label} at d = {d} ({msg}); \
                 the recurrence must describe orthonormal polynomials up to a constant factor",
                family.name()
            )),
            other => other,
        })
    };

    Ok(FiveBasisScheme {
        dim: d,
        alpha,
        family: family.clone(),
        bases: [
            OrthonormalBasis::canonical(d),
            wrap(b1, 1)?,
            wrap(b2, 2)?,
            wrap(b3, 3)?,
            wrap(b4, 4)?,
        ],
        roots_x,
        roots_y,
    })
}

impl FiveBasisScheme {
    /// Reassembles a scheme from stored parts (e.g. a scheme file), checking
    /// shapes, `α`, and unitarity but not recomputing the vectors.
    pub fn from_parts(
        dim: usize,
        alpha: f64,
        family: PolynomialFamily,
        bases: Vec<ComplexMatrix>,
        roots_x: Vec<f64>,
        roots_y: Vec<f64>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Precondition(format!("dimension must be at least 2, got {dim}")));
        }
        check_alpha(alpha, dim)?;
        if bases.len() != 5 {
            return Err(Error::Parse(format!("expected 5 bases, found {}", bases.len())));
        }
        if roots_x.len() != dim || roots_y.len() != dim - 1 {
            return Err(Error::Parse("root arrays have the wrong length".into()));
        }
        let mut out = Vec::with_capacity(5);
        for m in bases {
            if m.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.rows(),
                });
            }
            out.push(OrthonormalBasis::new(m)?);
        }
        let bases: [OrthonormalBasis; 5] = out.try_into().expect("length checked");
        Ok(Self {
            dim,
            alpha,
            family,
            bases,
            roots_x,
            roots_y,
        })
    }

    pub fn basis(&self, l: usize) -> &OrthonormalBasis {
        &self.bases[l]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormCheck {
    pub basis: usize,
    pub index: usize,
    /// `Σ_k p_k(z)²` summed directly.
    pub direct: f64,
    /// `(k_{n−1}/k_n) p'_n(z) p_{n−1}(z)`.
    pub christoffel_darboux: f64,
    pub rel_error: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub tol: f64,
    /// `‖B†B − I‖_HS` for `B⁰ … B⁴`.
    pub unitarity: [f64; 5],
    pub unitarity_ok: [bool; 5],
    pub norm_checks: Vec<NormCheck>,
    /// B² and B⁴ carry the moduli of B¹ and B³.
    pub phase_relation_ok: bool,
    /// Pairs of bases that define the same measurement (equal up to column
    /// order and phases), e.g. `(0, 3)` at `d = 2`.
    pub coincident: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.unitarity_ok.iter().all(|&b| b) && self.norm_checks.iter().all(|c| c.ok) && self.phase_relation_ok
    }

    pub fn max_norm_rel_error(&self) -> f64 {
        self.norm_checks.iter().map(|c| c.rel_error).fold(0.0, f64::max)
    }
}

/// Checks unitarity and cross-checks each vector's squared norm against the
/// Christoffel–Darboux closed form, to relative tolerance `tol`.
pub fn validate_scheme(scheme: &FiveBasisScheme, tol: f64) -> Result<ValidationReport> {
    let d = scheme.dim;
    let fam = &scheme.family;
    let mut unitarity = [0.0; 5];
    let mut unitarity_ok = [false; 5];
    for (l, b) in scheme.bases.iter().enumerate() {
        unitarity[l] = b.unitarity_residual();
        unitarity_ok[l] = unitarity[l] <= UNITARITY_TOL;
    }

    let mut norm_checks = Vec::with_capacity(2 * d);
    let mut cd = |basis: usize, index: usize, z: f64, n: usize| -> Result<()> {
        // n is the degree whose zero z is
        let (vals, ders) = fam.evaluate_with_derivative(z, n)?;
        let direct: f64 = vals[..n].iter().map(|p| p * p).sum();
        let ratio = fam.leading_coefficient(n - 1) / fam.leading_coefficient(n);
        let closed = ratio * ders[n] * vals[n - 1];
        let rel_error = (direct - closed).abs() / direct.abs();
        norm_checks.push(NormCheck {
            basis,
            index,
            direct,
            christoffel_darboux: closed,
            rel_error,
            ok: rel_error <= tol,
        });
        Ok(())
    };
    for (j, &x) in scheme.roots_x.iter().enumerate() {
        cd(1, j, x, d)?;
    }
    for (j, &y) in scheme.roots_y.iter().enumerate() {
        cd(3, j, y, d - 1)?;
    }

    let moduli_match = |a: &OrthonormalBasis, b: &OrthonormalBasis| {
        a.matrix()
            .as_slice()
            .iter()
            .zip(b.matrix().as_slice())
            .all(|(x, y)| (x.norm() - y.norm()).abs() <= 1e-14)
    };
    let phase_relation_ok =
        moduli_match(&scheme.bases[1], &scheme.bases[2]) && moduli_match(&scheme.bases[3], &scheme.bases[4]);

    let mut coincident = Vec::new();
    for a in 0..5 {
        for b in (a + 1)..5 {
            if same_measurement(&scheme.bases[a], &scheme.bases[b]) {
                coincident.push((a, b));
            }
        }
    }

    Ok(ValidationReport {
        dim: d,
        tol,
        unitarity,
        unitarity_ok,
        norm_checks,
        phase_relation_ok,
        coincident,
    })
}

/// True when `|A†B|` is a permutation matrix, i.e. both bases give the same
/// rank-one projectors.
fn same_measurement(a: &OrthonormalBasis, b: &OrthonormalBasis) -> bool {
    let overlap = a.matrix().adjoint().matmul(b.matrix());
    let n = overlap.rows();
    (0..n).all(|r| {
        let mut ones = 0;
        for c in 0..n {
            let m = overlap.get(r, c).norm();
            if (m - 1.0).abs() <= 1e-10 {
                ones += 1;
            } else if m > 1e-10 {
                return false;
            }
        }
        ones == 1
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomials::{chebyshev_u_family, hermite_family};

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn rejects_degenerate_alpha() {
        let f = chebyshev_u_family();
        assert!(matches!(
            build_scheme(&f, 4, PI / 2.0),
            Err(Error::InvalidAlpha { j: 2, .. })
        ));
        assert!(matches!(
            build_scheme(&f, 3, 0.0),
            Err(Error::InvalidAlpha { j: 1, .. })
        ));
        assert!(build_scheme(&f, 1, 0.3).is_err());
        for d in 2..40 {
            check_alpha(default_alpha(d), d).unwrap();
        }
    }

    #[test]
    fn chebyshev_d2_first_basis() {
        let s = build_scheme(&chebyshev_u_family(), 2, PI / 2.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b1 = s.basis(1).matrix();
        // roots ascending: x_0 = −1/2 gives (1, −1)/√2, x_1 = 1/2 gives (1, 1)/√2
        assert!(close(b1.get(0, 0), C64::new(h, 0.0)) && close(b1.get(1, 0), C64::new(-h, 0.0)));
        assert!(close(b1.get(0, 1), C64::new(h, 0.0)) && close(b1.get(1, 1), C64::new(h, 0.0)));
    }

    #[test]
    fn b0_is_canonical_and_b3_b4_end_in_last_unit_vector() {
        for d in [2, 3, 7] {
            let s = build_scheme(&hermite_family(), d, default_alpha(d)).unwrap();
            assert_eq!(s.basis(0).matrix(), &ComplexMatrix::identity(d));
            for l in [3, 4] {
                let last = s.basis(l).vector(d - 1);
                for (k, z) in last.iter().enumerate() {
                    let expect = if k == d - 1 { 1.0 } else { 0.0 };
                    assert_eq!(*z, C64::new(expect, 0.0));
                }
            }
        }
    }

    #[test]
    fn phase_relation_is_exact() {
        let d = 6;
        let alpha = default_alpha(d);
        let s = build_scheme(&chebyshev_u_family(), d, alpha).unwrap();
        for j in 0..d {
            let v1 = s.basis(1).vector(j);
            let v2 = s.basis(2).vector(j);
            assert_eq!(apply_phases(&v1, alpha, d), v2);
        }
        for j in 0..d - 1 {
            let v3 = s.basis(3).vector(j);
            let v4 = s.basis(4).vector(j);
            assert_eq!(apply_phases(&v3, alpha, d - 1), v4);
        }
    }

    #[test]
    fn d2_b3_coincides_with_canonical() {
        let s = build_scheme(&chebyshev_u_family(), 2, PI / 2.0).unwrap();
        assert_eq!(s.basis(3).matrix(), &ComplexMatrix::identity(2));
        let report = validate_scheme(&s, 1e-8).unwrap();
        assert!(report.passed());
        assert!(report.coincident.contains(&(0, 3)));
    }

    #[test]
    fn validation_d10() {
        let s = build_scheme(&chebyshev_u_family(), 10, PI / 10.0).unwrap();
        let r = validate_scheme(&s, 1e-8).unwrap();
        assert!(r.unitarity.iter().all(|&u| u <= 1e-10));
        assert!(r.passed());
        assert!(r.coincident.is_empty());
    }

    #[test]
    fn christoffel_darboux_value_d2() {
        // x_0 = −1/2: direct 1 + (2x)² = 2; closed form (2/4)·U₂'(x)·U₁(x) = ½·8x·2x = 2
        let s = build_scheme(&chebyshev_u_family(), 2, PI / 2.0).unwrap();
        let r = validate_scheme(&s, 1e-12).unwrap();
        let c = &r.norm_checks[0];
        assert_eq!((c.basis, c.index), (1, 0));
        assert!((c.direct - 2.0).abs() < 1e-15);
        assert!((c.christoffel_darboux - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_orthonormal_family_is_rejected() {
        // monic Hermite: right zeros but the vectors are not orthogonal
        let spec = crate::polynomials::FamilySpec {
            name: "monic-hermite".into(),
            a: vec![1.0; 6],
            b: vec![0.0; 6],
            c: (0..6).map(|n| n as f64).collect(),
            k0: 1.0,
        };
        let fam = PolynomialFamily::from_spec(spec).unwrap();
        assert!(matches!(
            build_scheme(&fam, 5, default_alpha(5)),
            Err(Error::InvalidFamily(_))
        ));
    }
}
