//! Orthogonal polynomial families given by a three-term recurrence
//!
//! ```text
//! p_{n+1}(x) = (A_n x + B_n) p_n(x) − C_n p_{n−1}(x),   p_{−1} = 0,  p_0 = k_0
//! ```
//!
//! The basis construction only needs `p_0 … p_d`, their zeros, and the
//! leading coefficients `k_n`, which satisfy `k_{n+1} = A_n k_n`.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, HermitianMatrix, C64};

#[derive(Debug, Clone, PartialEq)]
enum Recurrence {
    /// `U_{n+1} = 2x U_n − U_{n−1}`
    ChebyshevU,
    /// Orthonormal probabilists' Hermite: `h_{n+1} = (x h_n − √n h_{n−1}) / √(n+1)`.
    Hermite,
    Table {
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<f64>,
    },
}

/// A family `(p_n)` of real orthogonal polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFamily {
    name: String,
    recurrence: Recurrence,
    k0: f64,
}

/// On-disk description of a family: `{name, A, B, C, k0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
    pub k0: f64,
}

pub fn chebyshev_u_family() -> PolynomialFamily {
    PolynomialFamily {
        name: "chebyshev-u".into(),
        recurrence: Recurrence::ChebyshevU,
        k0: 1.0,
    }
}

/// Probabilists' Hermite polynomials in orthonormal normalization
/// (`He_n / √(n!)`), so that the constructed vectors are orthogonal.
pub fn hermite_family() -> PolynomialFamily {
    PolynomialFamily {
        name: "hermite".into(),
        recurrence: Recurrence::Hermite,
        k0: 1.0,
    }
}

impl PolynomialFamily {
    /// A family from explicit recurrence coefficients. Entry `n` of each
    /// table is the coefficient used to build `p_{n+1}`; `C[0]` is unused.
    pub fn from_spec(spec: FamilySpec) -> Result<Self> {
        // a built-in name with matching (or absent) tables is the built-in
        if let Ok(builtin) = Self::by_name(&spec.name) {
            let reference = builtin.to_spec(spec.a.len());
            let same = |x: &[f64], y: &[f64]| {
                x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= 1e-15 * q.abs().max(1.0))
            };
            let c_tail = |v: &[f64]| v.iter().skip(1).copied().collect::<Vec<_>>();
            if spec.k0 == builtin.k0
                && same(&spec.a, &reference.a)
                && same(&spec.b, &reference.b)
                && same(&c_tail(&spec.c), &c_tail(&reference.c))
            {
                return Ok(builtin);
            }
        }
        let FamilySpec { name, a, b, c, k0 } = spec;
        if a.len() != b.len() || a.len() != c.len() {
            return Err(Error::InvalidFamily(format!(
                "coefficient tables differ in length (A {}, B {}, C {})",
                a.len(),
                b.len(),
                c.len()
            )));
        }
        if !(k0.is_finite() && k0 != 0.0) {
            return Err(Error::InvalidFamily(format!("k0 must be finite and nonzero, got {k0}")));
        }
        for (n, &an) in a.iter().enumerate() {
            if !(an > 0.0 && an.is_finite()) {
                return Err(Error::InvalidFamily(format!("A[{n}] = {an} must be positive")));
            }
            if !b[n].is_finite() {
                return Err(Error::InvalidFamily(format!("B[{n}] is not finite")));
            }
            if n >= 1 && !(c[n] > 0.0 && c[n].is_finite()) {
                return Err(Error::InvalidFamily(format!(
                    "C[{n}] = {} must be positive for an orthogonal family",
                    c[n]
                )));
            }
        }
        Ok(Self {
            name,
            recurrence: Recurrence::Table { a, b, c },
            k0,
        })
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_spec(serde_json::from_str(&text)?)
    }

    /// Coefficient tables covering degrees `0..=max_degree`.
    pub fn to_spec(&self, max_degree: usize) -> FamilySpec {
        let n = match self.max_degree() {
            Some(m) => m.min(max_degree),
            None => max_degree,
        };
        let mut spec = FamilySpec {
            name: self.name.clone(),
            a: Vec::with_capacity(n),
            b: Vec::with_capacity(n),
            c: Vec::with_capacity(n),
            k0: self.k0,
        };
        for k in 0..n {
            let (a, b, c) = self.coefficients(k);
            spec.a.push(a);
            spec.b.push(b);
            spec.c.push(c);
        }
        spec
    }

    /// Built-in family by CLI name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "chebyshev-u" => Ok(chebyshev_u_family()),
            "hermite" => Ok(hermite_family()),
            other => Err(Error::InvalidFamily(format!("unknown family '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn closed_form_roots(&self) -> bool {
        matches!(self.recurrence, Recurrence::ChebyshevU)
    }

    /// Highest degree the recurrence can produce, `None` if unbounded.
    pub fn max_degree(&self) -> Option<usize> {
        match &self.recurrence {
            Recurrence::Table { a, .. } => Some(a.len()),
            _ => None,
        }
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        match self.max_degree() {
            Some(m) if n > m => Err(Error::InvalidFamily(format!(
                "family '{}' only defines degrees up to {m}, need {n}",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    /// `(A_n, B_n, C_n)`. Panics past the end of a coefficient table;
    /// callers go through [`Self::check_degree`] first.
    pub fn coefficients(&self, n: usize) -> (f64, f64, f64) {
        match &self.recurrence {
            Recurrence::ChebyshevU => (2.0, 0.0, if n == 0 { 0.0 } else { 1.0 }),
            Recurrence::Hermite => {
                let s = ((n + 1) as f64).sqrt();
                (1.0 / s, 0.0, (n as f64).sqrt() / s)
            }
            Recurrence::Table { a, b, c } => (a[n], b[n], if n == 0 { 0.0 } else { c[n] }),
        }
    }

    /// Leading coefficient `k_n`.
    pub fn leading_coefficient(&self, n: usize) -> f64 {
        (0..n).fold(self.k0, |k, j| k * self.coefficients(j).0)
    }

    /// `(p_0(x), …, p_{n_max}(x))`.
    pub fn evaluate_sequence(&self, x: f64, n_max: usize) -> Result<Vec<f64>> {
        self.check_degree(n_max)?;
        let mut out = Vec::with_capacity(n_max + 1);
        let (mut prev, mut cur) = (0.0, self.k0);
        out.push(cur);
        for n in 0..n_max {
            let (a, b, c) = self.coefficients(n);
            let next = (a * x + b) * cur - c * prev;
            prev = cur;
            cur = next;
            out.push(cur);
        }
        Ok(out)
    }

    /// Values and first derivatives, the latter from the differentiated
    /// recurrence `p'_{n+1} = A_n p_n + (A_n x + B_n) p'_n − C_n p'_{n−1}`.
    pub fn evaluate_with_derivative(&self, x: f64, n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_degree(n_max)?;
        let mut vals = Vec::with_capacity(n_max + 1);
        let mut ders = Vec::with_capacity(n_max + 1);
        let (mut p_prev, mut p) = (0.0, self.k0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        vals.push(p);
        ders.push(d);
        for n in 0..n_max {
            let (a, b, c) = self.coefficients(n);
            let p_next = (a * x + b) * p - c * p_prev;
            let d_next = a * p + (a * x + b) * d - c * d_prev;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            vals.push(p);
            ders.push(d);
        }
        Ok((vals, ders))
    }

    /// `(p_0(x), …, p_{n_max}(x))` scaled to unit Euclidean norm, computed
    /// with running rescaling so large-degree values cannot overflow.
    pub fn evaluate_normalized(&self, x: f64, n_max: usize) -> Result<Vec<f64>> {
        self.check_degree(n_max)?;
        const BIG: f64 = 1e150;
        let mut out = Vec::with_capacity(n_max + 1);
        let (mut prev, mut cur) = (0.0, self.k0);
        out.push(cur);
        for n in 0..n_max {
            let (a, b, c) = self.coefficients(n);
            let next = (a * x + b) * cur - c * prev;
            prev = cur;
            cur = next;
            out.push(cur);
            if cur.abs() > BIG {
                for v in out.iter_mut() {
                    *v /= BIG;
                }
                prev /= BIG;
                cur /= BIG;
            }
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(out.into_iter().map(|v| v / norm).collect())
    }

    /// The n zeros of `p_n`, strictly increasing.
    ///
    /// Chebyshev-U uses `cos((j+1)π/(n+1))`; other families take the
    /// eigenvalues of the symmetric Jacobi matrix of the recurrence
    /// (Golub–Welsch) followed by a guarded Newton polish.
    pub fn roots(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::Precondition("roots need degree n >= 1".into()));
        }
        self.check_degree(n)?;
        if self.closed_form_roots() {
            let mut r: Vec<f64> = (0..n)
                .map(|j| (((j + 1) as f64) * PI / ((n + 1) as f64)).cos())
                .collect();
            r.reverse();
            // the middle root of odd degree is exactly zero
            if n % 2 == 1 {
                r[n / 2] = 0.0;
            }
            return Ok(r);
        }
        let jac = self.jacobi_matrix(n)?;
        let mut roots = hermitian_eig(&jac)?.eigenvalues;
        roots.reverse();
        self.polish_roots(&mut roots, n)?;
        Ok(roots)
    }

    /// Symmetric tridiagonal matrix whose eigenvalues are the zeros of `p_n`:
    /// diagonal `−B_k/A_k`, off-diagonal `√(C_k / (A_{k−1} A_k))`.
    pub fn jacobi_matrix(&self, n: usize) -> Result<HermitianMatrix> {
        self.check_degree(n)?;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            let (a, b, c) = self.coefficients(k);
            data[k * n + k] = C64::new(-b / a, 0.0);
            if k >= 1 {
                let a_prev = self.coefficients(k - 1).0;
                let beta = (c / (a_prev * a)).sqrt();
                data[k * n + k - 1] = C64::new(beta, 0.0);
                data[(k - 1) * n + k] = C64::new(beta, 0.0);
            }
        }
        HermitianMatrix::new(n, data)
    }

    fn polish_roots(&self, roots: &mut [f64], n: usize) -> Result<()> {
        for i in 0..roots.len() {
            let gap = neighbour_gap(roots, i);
            for _ in 0..3 {
                let (v, d) = self.evaluate_with_derivative(roots[i], n)?;
                if d[n] == 0.0 {
                    break;
                }
                let step = v[n] / d[n];
                if !step.is_finite() || step.abs() > 0.25 * gap {
                    break;
                }
                roots[i] -= step;
                if step.abs() <= 1e-17 * roots[i].abs().max(1.0) {
                    break;
                }
            }
        }
        Ok(())
    }

    /// `|p_n(r)| / (|p'_n(r)| · gap)`: the Newton correction at `r` relative
    /// to the distance to the nearest other root. Near zero for an accurate root.
    pub fn root_residual(&self, roots: &[f64], i: usize) -> Result<f64> {
        let n = roots.len();
        let (v, d) = self.evaluate_with_derivative(roots[i], n)?;
        let gap = neighbour_gap(roots, i);
        Ok(v[n].abs() / (d[n].abs() * gap))
    }
}

fn neighbour_gap(roots: &[f64], i: usize) -> f64 {
    let mut gap = f64::INFINITY;
    if i > 0 {
        gap = gap.min(roots[i] - roots[i - 1]);
    }
    if i + 1 < roots.len() {
        gap = gap.min(roots[i + 1] - roots[i]);
    }
    if gap.is_finite() {
        gap
    } else {
        1.0
    }
}
