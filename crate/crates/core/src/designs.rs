//! The six benchmark graph structures and Gaussian data drawn from them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::standard_normal;
use crate::error::{Error, Result};
use crate::matrix::{pd_check, spd_inverse, SymMatrix};
use crate::metrics::Adjacency;

/// Magnitude below which entries of a numerically inverted precision are
/// treated as structural zeros.
const STRUCTURAL_ZERO: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignKind {
    Ar1,
    Ar2,
    Block,
    Star,
    Circle,
    Full,
}

impl DesignKind {
    pub const ALL: [DesignKind; 6] = [
        DesignKind::Ar1,
        DesignKind::Ar2,
        DesignKind::Block,
        DesignKind::Star,
        DesignKind::Circle,
        DesignKind::Full,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DesignKind::Ar1 => "ar1",
            DesignKind::Ar2 => "ar2",
            DesignKind::Block => "block",
            DesignKind::Star => "star",
            DesignKind::Circle => "circle",
            DesignKind::Full => "full",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        DesignKind::ALL
            .into_iter()
            .find(|d| d.name() == lower)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown design {s:?} (expected one of ar1, ar2, block, star, circle, full)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDesign {
    pub kind: DesignKind,
    pub p: usize,
}

#[derive(Clone, Debug)]
pub struct TrueModel {
    pub design: GraphDesign,
    pub omega_true: SymMatrix,
    pub sigma_true: SymMatrix,
    pub adjacency_true: Adjacency,
}

fn unsupported(kind: DesignKind, p: usize, reason: &'static str) -> Error {
    Error::UnsupportedDesign {
        design: kind.name(),
        p,
        reason,
    }
}

/// Builds the true precision and covariance for a design.
///
/// AR(1) and Block are specified through `Σ` and inverted; the others are
/// specified through `Ω`. Block uses the two halves `{1..p/2}` and
/// `{p/2+1..p}`; Star uses node 1 as the hub.
pub fn build_design(design: GraphDesign) -> Result<TrueModel> {
    let GraphDesign { kind, p } = design;
    match kind {
        DesignKind::Ar2 | DesignKind::Circle if p < 3 => return Err(unsupported(kind, p, "requires p >= 3")),
        DesignKind::Block if p < 2 || p % 2 != 0 => return Err(unsupported(kind, p, "requires even p >= 2")),
        _ if p < 2 => return Err(unsupported(kind, p, "requires p >= 2")),
        _ => {}
    }
    let lag = |i: usize, j: usize| i.abs_diff(j);
    let (omega, sigma) = match kind {
        DesignKind::Ar1 => {
            let sigma = SymMatrix::from_fn(p, |i, j| 0.7f64.powi(lag(i, j) as i32));
            (clean_inverse(&sigma)?, sigma)
        }
        DesignKind::Block => {
            let half = p / 2;
            let sigma = SymMatrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if (i < half) == (j < half) {
                    0.5
                } else {
                    0.0
                }
            });
            (clean_inverse(&sigma)?, sigma)
        }
        DesignKind::Ar2 => {
            let omega = SymMatrix::from_fn(p, |i, j| match lag(i, j) {
                0 => 1.0,
                1 => 0.5,
                2 => 0.25,
                _ => 0.0,
            });
            let sigma = spd_inverse(&omega)?;
            (omega, sigma)
        }
        DesignKind::Star => {
            let omega = SymMatrix::from_fn(p, |i, j| {
                if i == j {
                    1.0
                } else if i == 0 || j == 0 {
                    0.1
                } else {
                    0.0
                }
            });
            let sigma = spd_inverse(&omega)?;
            (omega, sigma)
        }
        DesignKind::Circle => {
            let omega = SymMatrix::from_fn(p, |i, j| {
                if i == j {
                    2.0
                } else if lag(i, j) == 1 {
                    1.0
                } else if (i, j) == (0, p - 1) {
                    0.9
                } else {
                    0.0
                }
            });
            let sigma = spd_inverse(&omega)?;
            (omega, sigma)
        }
        DesignKind::Full => {
            let omega = SymMatrix::from_fn(p, |i, j| if i == j { 2.0 } else { 1.0 });
            let sigma = spd_inverse(&omega)?;
            (omega, sigma)
        }
    };
    if pd_check(&omega).is_none() {
        return Err(unsupported(kind, p, "true precision is not positive definite"));
    }
    let adjacency_true = Adjacency::from_fn(p, |i, j| omega.get(i, j) != 0.0);
    Ok(TrueModel {
        design,
        omega_true: omega,
        sigma_true: sigma,
        adjacency_true,
    })
}

/// Inverse with round-off dust below [`STRUCTURAL_ZERO`] set to exact zeros.
fn clean_inverse(sigma: &SymMatrix) -> Result<SymMatrix> {
    let inv = spd_inverse(sigma)?;
    Ok(SymMatrix::from_fn(inv.dim(), |i, j| {
        let v = inv.get(i, j);
        if i != j && v.abs() < STRUCTURAL_ZERO {
            0.0
        } else {
            v
        }
    }))
}

/// Row-major `n × p` matrix of observations.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        Ok(DataMatrix { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// `n` independent rows from N(0, Σ_true).
pub fn simulate_data<R: Rng + ?Sized>(model: &TrueModel, n: usize, rng: &mut R) -> Result<DataMatrix> {
    let p = model.sigma_true.dim();
    let chol = pd_check(&model.sigma_true).ok_or(Error::NotPositiveDefinite)?;
    let mut values = Vec::with_capacity(n * p);
    for _ in 0..n {
        let z: Vec<f64> = (0..p).map(|_| standard_normal(rng)).collect();
        values.extend(chol.mul_lower(&z));
    }
    DataMatrix::new(n, p, values)
}

/// `S = YᵀY`.
pub fn scatter_matrix(y: &DataMatrix) -> SymMatrix {
    let p = y.cols();
    let mut s = SymMatrix::zeros(p);
    let mut acc = vec![0.0; p * p];
    for i in 0..y.rows() {
        let row = y.row(i);
        for a in 0..p {
            let ya = row[a];
            for b in a..p {
                acc[a * p + b] += ya * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            s.set(a, b, acc[a * p + b]);
        }
    }
    s
}
