//! File formats.
//!
//! Complex matrices are JSON arrays of rows, each row an array of `[re, im]`
//! pairs. Floats are written in shortest round-trip form, so every file read
//! back reproduces the stored values bit for bit. Outcome tables are CSV with
//! 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::bases::FiveBasisScheme;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, C64};
use crate::measurement::{DensityMatrix, OutcomeTable};
use crate::polynomials::{FamilySpec, PolynomialFamily};

fn rows_of(data: &[C64], cols: usize) -> Vec<&[C64]> {
    if cols == 0 {
        return Vec::new();
    }
    data.chunks(cols).collect()
}

fn flatten_rows(rows: Vec<Vec<C64>>) -> std::result::Result<(usize, usize, Vec<C64>), String> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(n * cols);
    for (i, r) in rows.into_iter().enumerate() {
        if r.len() != cols {
            return Err(format!("row {i} has {} entries, expected {cols}", r.len()));
        }
        data.extend(r);
    }
    Ok((n, cols, data))
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows_of(self.as_slice(), self.cols()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        let (n, cols, data) = flatten_rows(rows).map_err(de::Error::custom)?;
        ComplexMatrix::from_row_major(n, cols, data).map_err(de::Error::custom)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rows_of(self.entries(), self.dim()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<C64>>::deserialize(d)?;
        let (n, cols, data) = flatten_rows(rows).map_err(de::Error::custom)?;
        if n != cols {
            return Err(de::Error::custom(format!("matrix is {n}x{cols}, expected square")));
        }
        HermitianMatrix::new(n, data).map_err(de::Error::custom)
    }
}

/// On-disk form of a [`FiveBasisScheme`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchemeFile {
    pub dim: usize,
    pub alpha: f64,
    pub family: FamilySpec,
    pub bases: Vec<ComplexMatrix>,
    pub roots_x: Vec<f64>,
    pub roots_y: Vec<f64>,
}

impl SchemeFile {
    pub fn from_scheme(s: &FiveBasisScheme) -> Self {
        Self {
            dim: s.dim,
            alpha: s.alpha,
            family: s.family.to_spec(s.dim),
            bases: s.bases.iter().map(|b| b.matrix().clone()).collect(),
            roots_x: s.roots_x.clone(),
            roots_y: s.roots_y.clone(),
        }
    }

    pub fn into_scheme(self) -> Result<FiveBasisScheme> {
        let family = PolynomialFamily::from_spec(self.family)?;
        FiveBasisScheme::from_parts(self.dim, self.alpha, family, self.bases, self.roots_x, self.roots_y)
    }
}

pub fn scheme_to_json(s: &FiveBasisScheme) -> Result<String> {
    Ok(serde_json::to_string_pretty(&SchemeFile::from_scheme(s))?)
}

pub fn scheme_from_json(text: &str) -> Result<FiveBasisScheme> {
    serde_json::from_str::<SchemeFile>(text)?.into_scheme()
}

pub fn save_scheme(s: &FiveBasisScheme, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, scheme_to_json(s)? + "\n")?)
}

pub fn load_scheme(path: impl AsRef<Path>) -> Result<FiveBasisScheme> {
    scheme_from_json(&fs::read_to_string(path)?)
}

/// A state file holds either a state vector (normalized on load) or a
/// density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateFile {
    Vector { vector: Vec<C64> },
    Density { density: HermitianMatrix },
}

impl StateFile {
    pub fn into_state(self) -> Result<DensityMatrix> {
        match self {
            StateFile::Vector { vector } => DensityMatrix::pure(&vector),
            StateFile::Density { density } => DensityMatrix::new(density),
        }
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str::<StateFile>(&text)
        .map_err(|e| Error::Parse(format!("state file: {e}")))?
        .into_state()
}

/// CSV with header `basis,0,1,…,m−1` and one row per POVM, led by its label.
pub fn table_to_csv(t: &OutcomeTable, labels: &[String]) -> String {
    let mut out = String::from("basis");
    for j in 0..t.cols() {
        let _ = write!(out, ",{j}");
    }
    out.push('\n');
    for r in 0..t.rows() {
        match labels.get(r) {
            Some(l) => out.push_str(l),
            None => {
                let _ = write!(out, "{r}");
            }
        }
        for x in t.row(r) {
            let _ = write!(out, ",{x:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parses [`table_to_csv`] output; returns the table and the row labels.
pub fn table_from_csv(text: &str) -> Result<(OutcomeTable, Vec<String>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let cols = header.split(',').count().saturating_sub(1);
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut fields = line.split(',');
        labels.push(fields.next().unwrap_or_default().trim().to_string());
        let row = fields
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: '{f}': {e}", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != cols {
            return Err(Error::Parse(format!(
                "row {} has {} values, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("CSV has no data rows".into()));
    }
    Ok((OutcomeTable::from_rows(rows)?, labels))
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, serde_json::to_string_pretty(value)? + "\n")?)
}
