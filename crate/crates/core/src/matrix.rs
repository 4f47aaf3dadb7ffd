//! Dense symmetric matrices and the handful of factorizations the samplers need.
//!
//! Storage is a full row-major `p × p` buffer. Every constructor and mutator
//! keeps `m[i][j] == m[j][i]` bit-for-bit, so no caller ever has to
//! re-symmetrize after the fact.

use std::fmt;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Smallest Cholesky pivot accepted as positive.
pub const PD_EPS: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SymMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        Ok(())
    }
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_diag(&vec![1.0; dim])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * m.dim + i] = d;
        }
        m
    }

    /// Builds a matrix from `f(i, j)` evaluated on the upper triangle only.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Builds a matrix from rows, rejecting anything that is not exactly symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidParameter("matrix must have at least one row".into()));
        }
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymMatrix {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Takes an arbitrary square row-major buffer and returns `(A + Aᵀ) / 2`.
    pub fn symmetrized(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self::from_fn(dim, |i, j| {
            if i == j {
                data[i * dim + i]
            } else {
                0.5 * (data[i * dim + j] + data[j * dim + i])
            }
        }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Writes `v` at `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| ((i + 1)..self.dim).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Square product `self · other` as a row-major buffer (not symmetric in general).
    pub fn mul_dense(&self, other: &SymMatrix) -> Vec<f64> {
        let p = self.dim;
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for k in 0..p {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = other.row(k);
                let dst = &mut out[i * p..(i + 1) * p];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Principal submatrix on `idx`, in the order given.
    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let mut m = SymMatrix::zeros(idx.len().max(1));
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a) {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    /// Writes the full matrix as CSV with 17 significant digits per entry.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::with_capacity(self.dim * self.dim * 24);
        for i in 0..self.dim {
            let line: Vec<String> = self.row(i).iter().map(|v| format_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.display().to_string(),
            message,
        };
        let mut rows = Vec::new();
        for (r, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row = line
                .split(',')
                .enumerate()
                .map(|(c, cell)| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        parse_err(format!("row {}, column {}: not a number: {cell:?}", r + 1, c + 1))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        SymMatrix::from_rows(&rows)
    }
}

/// Decimal rendering with 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.dim + j]
    }

    /// Solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut y = b.to_vec();
        for i in 0..p {
            let row = &self.lower[i * p..i * p + i];
            let s = y[i] - dot(row, &y[..i]);
            y[i] = s / self.lower[i * p + i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    pub fn solve_upper(&self, y: &[f64]) -> Vec<f64> {
        let p = self.dim;
        let mut x = y.to_vec();
        for i in (0..p).rev() {
            let xi = x[i] / self.lower[i * p + i];
            x[i] = xi;
            for k in 0..i {
                x[k] -= self.lower[i * p + k] * xi;
            }
        }
        x
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `L x`.
    pub fn mul_lower(&self, x: &[f64]) -> Vec<f64> {
        let p = self.dim;
        (0..p)
            .map(|i| dot(&self.lower[i * p..i * p + i + 1], &x[..=i]))
            .collect()
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim).map(|i| self.lower(i, i).ln()).sum::<f64>()
    }

    pub fn reconstruct(&self) -> SymMatrix {
        let p = self.dim;
        SymMatrix::from_fn(p, |i, j| {
            let k = i.min(j) + 1;
            dot(&self.lower[i * p..i * p + k], &self.lower[j * p..j * p + k])
        })
    }

    /// `A⁻¹ = L⁻ᵀ L⁻¹`, filled on one triangle and mirrored.
    pub fn inverse(&self) -> SymMatrix {
        let p = self.dim;
        // Columns of L⁻¹, stored row-major as linv[i][j] for i >= j.
        let mut linv = vec![0.0; p * p];
        for j in 0..p {
            linv[j * p + j] = 1.0 / self.lower(j, j);
            for i in (j + 1)..p {
                let mut s = 0.0;
                for k in j..i {
                    s += self.lower(i, k) * linv[k * p + j];
                }
                linv[i * p + j] = -s / self.lower(i, i);
            }
        }
        SymMatrix::from_fn(p, |i, j| {
            let mut s = 0.0;
            for k in j.max(i)..p {
                s += linv[k * p + i] * linv[k * p + j];
            }
            s
        })
    }
}

/// Cholesky factorization that doubles as the positive-definiteness test.
///
/// Returns `None` as soon as a pivot is not strictly greater than [`PD_EPS`]
/// (or is NaN).
pub fn pd_check(m: &SymMatrix) -> Option<CholeskyFactor> {
    cholesky_with_floor(m, PD_EPS)
}

/// Cholesky factorization accepting only pivots strictly above `floor`.
pub fn cholesky_with_floor(m: &SymMatrix, floor: f64) -> Option<CholeskyFactor> {
    let p = m.dim;
    let mut lower = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..=i {
            let s = dot(&lower[i * p..i * p + j], &lower[j * p..j * p + j]);
            if i == j {
                let pivot = m.get(i, i) - s;
                if !(pivot > floor) {
                    return None;
                }
                lower[i * p + i] = pivot.sqrt();
            } else {
                lower[i * p + j] = (m.get(i, j) - s) / lower[j * p + j];
            }
        }
    }
    Some(CholeskyFactor { dim: p, lower })
}

pub fn is_pd(m: &SymMatrix) -> bool {
    pd_check(m).is_some()
}

pub fn spd_inverse(m: &SymMatrix) -> Result<SymMatrix> {
    pd_check(m).map(|c| c.inverse()).ok_or(Error::NotPositiveDefinite)
}

/// Index order that swaps `i` with the last index. It is its own inverse.
pub fn swap_to_last_order(dim: usize, i: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dim).collect();
    order.swap(i, dim - 1);
    order
}

/// Symmetric permutation exchanging row/column `i` (0-based) with the last one.
pub fn permute_to_last(m: &SymMatrix, i: usize) -> Result<SymMatrix> {
    if i >= m.dim {
        return Err(Error::IndexOutOfRange { index: i, dim: m.dim });
    }
    Ok(m.submatrix(&swap_to_last_order(m.dim, i)))
}

/// `xᵀ M x`.
pub fn quad_form(x: &[f64], m: &SymMatrix) -> Result<f64> {
    if x.len() != m.dim {
        return Err(Error::DimensionMismatch {
            expected: m.dim,
            got: x.len(),
        });
    }
    Ok(quad_form_unchecked(x, m))
}

pub(crate) fn quad_form_unchecked(x: &[f64], m: &SymMatrix) -> f64 {
    (0..m.dim).map(|i| x[i] * dot(m.row(i), x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    /// Real roots of the 3×3 characteristic polynomial, via the trigonometric
    /// closed form for symmetric matrices.
    fn eigenvalues_3x3(a: &SymMatrix) -> [f64; 3] {
        let p1 = a.get(0, 1).powi(2) + a.get(0, 2).powi(2) + a.get(1, 2).powi(2);
        let q = (a.get(0, 0) + a.get(1, 1) + a.get(2, 2)) / 3.0;
        let p2 = (0..3).map(|i| (a.get(i, i) - q).powi(2)).sum::<f64>() + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let b = SymMatrix::from_fn(3, |i, j| (a.get(i, j) - if i == j { q } else { 0.0 }) / p);
        let det_b = b.get(0, 0) * (b.get(1, 1) * b.get(2, 2) - b.get(1, 2) * b.get(2, 1))
            - b.get(0, 1) * (b.get(1, 0) * b.get(2, 2) - b.get(1, 2) * b.get(2, 0))
            + b.get(0, 2) * (b.get(1, 0) * b.get(2, 1) - b.get(1, 1) * b.get(2, 0));
        let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn pd_check_identity() {
        let c = pd_check(&SymMatrix::identity(2)).unwrap();
        assert_eq!(c.reconstruct(), SymMatrix::identity(2));
        assert_eq!(c.lower(0, 0), 1.0);
        assert_eq!(c.lower(1, 0), 0.0);
    }

    #[test]
    fn pd_check_rejects_indefinite() {
        assert!(pd_check(&m(&[&[1.0, 2.0], &[2.0, 1.0]])).is_none());
    }

    #[test]
    fn circle_three_is_pd() {
        let c = m(&[&[2.0, 1.0, 0.9], &[1.0, 2.0, 1.0], &[0.9, 1.0, 2.0]]);
        let eig = eigenvalues_3x3(&c);
        assert!(eig.iter().all(|&e| e > 0.0), "{eig:?}");
        assert!((eig.iter().sum::<f64>() - 6.0).abs() < 1e-12);
        assert!(pd_check(&c).is_some());
    }

    #[test]
    fn pd_check_rejects_tiny_pivot() {
        assert!(pd_check(&SymMatrix::from_diag(&[1.0, 1e-13])).is_none());
        assert!(pd_check(&SymMatrix::from_diag(&[1.0, f64::NAN])).is_none());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(spd_inverse(&SymMatrix::identity(3)).unwrap(), SymMatrix::identity(3));
        let d = spd_inverse(&SymMatrix::from_diag(&[2.0, 4.0])).unwrap();
        assert!(d.max_abs_diff(&SymMatrix::from_diag(&[0.5, 0.25])) < 1e-15);
        // adjugate / determinant
        let a = m(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let det = 2.0 * 2.0 - 1.0 * 1.0;
        let expected = m(&[&[2.0 / det, -1.0 / det], &[-1.0 / det, 2.0 / det]]);
        assert!(spd_inverse(&a).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn inverse_rejects_non_pd() {
        let err = spd_inverse(&m(&[&[1.0, 2.0], &[2.0, 1.0]])).unwrap_err();
        assert_eq!(err.to_string(), "matrix not positive definite");
    }

    #[test]
    fn permute_examples() {
        let s = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 5.0], &[3.0, 5.0, 6.0]]);
        assert_eq!(permute_to_last(&s, 2).unwrap(), s);
        let (a, b, c, d, e, f) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let expected = m(&[&[f, e, c], &[e, d, b], &[c, b, a]]);
        assert_eq!(permute_to_last(&s, 0).unwrap(), expected);
        assert!(matches!(
            permute_to_last(&s, 3),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn quad_form_examples() {
        let inv = m(&[&[2.0 / 3.0, -1.0 / 3.0], &[-1.0 / 3.0, 2.0 / 3.0]]);
        assert_eq!(quad_form(&[0.0, 0.0], &inv).unwrap(), 0.0);
        assert_eq!(quad_form(&[1.0, 1.0], &SymMatrix::identity(2)).unwrap(), 2.0);
        assert!((quad_form(&[1.0, 0.0], &inv).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            quad_form(&[1.0], &inv),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let rows = vec![vec![1.0, 0.5], vec![0.4, 1.0]];
        assert!(matches!(
            SymMatrix::from_rows(&rows),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
        let s = SymMatrix::symmetrized(2, &[1.0, 0.5, 0.4, 1.0]).unwrap();
        assert_eq!(s.get(0, 1), 0.45);
        assert!(s.is_symmetric());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let a = SymMatrix::from_fn(4, |i, j| 1.0 / (1.0 + i as f64 + j as f64) + 0.1f64.powi(j as i32 + 7));
        a.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert_eq!(SymMatrix::read_csv(&path).unwrap(), a);
    }

    fn lower_with_positive_diag(p: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-2.0f64..2.0, p * p).prop_map(move |mut v| {
            for i in 0..p {
                v[i * p + i] = 0.2 + v[i * p + i].abs();
                for j in (i + 1)..p {
                    v[i * p + j] = 0.0;
                }
            }
            v
        })
    }

    fn from_lower(l: &[f64], p: usize) -> SymMatrix {
        SymMatrix::from_fn(p, |i, j| (0..p).map(|k| l[i * p + k] * l[j * p + k]).sum())
    }

    fn symmetric(p: usize) -> impl Strategy<Value = SymMatrix> {
        proptest::collection::vec(-3.0f64..3.0, p * p)
            .prop_map(move |v| SymMatrix::symmetrized(p, &v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn gram_of_lower_is_pd(l in lower_with_positive_diag(5)) {
            let a = from_lower(&l, 5);
            let c = pd_check(&a).expect("L Lᵀ must be PD");
            let fro = a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
            let err = c.reconstruct().as_slice().iter().zip(a.as_slice())
                .map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            prop_assert!(err <= 1e-10 * 5.0 * fro);
            prop_assert!((0..5).all(|i| c.lower(i, i) > 0.0));
        }

        #[test]
        fn permutation_preserves_definiteness(a in symmetric(4), i in 0usize..4) {
            let b = permute_to_last(&a, i).unwrap();
            prop_assert_eq!(pd_check(&a).is_some(), pd_check(&b).is_some());
            prop_assert!(b.is_symmetric());
            prop_assert_eq!(permute_to_last(&b, i).unwrap(), a);
        }

        #[test]
        fn inverse_is_involutive(l in lower_with_positive_diag(5)) {
            let a = from_lower(&l, 5);
            let inv = spd_inverse(&a).unwrap();
            prop_assert!(inv.is_symmetric());
            let prod = a.mul_dense(&inv);
            for i in 0..5 {
                for j in 0..5 {
                    let target = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((prod[i * 5 + j] - target).abs() < 1e-8 * 5.0 * a.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs())));
                }
            }
            let back = spd_inverse(&inv).unwrap();
            prop_assert!(back.max_abs_diff(&a) < 1e-6);
        }

        #[test]
        fn quad_form_nonnegative_for_pd(l in lower_with_positive_diag(4), x in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let a = from_lower(&l, 4);
            let q = quad_form(&x, &a).unwrap();
            prop_assert!(q >= 0.0);
            if x.iter().any(|v| *v != 0.0) { prop_assert!(q > 0.0); }
        }
    }
}
