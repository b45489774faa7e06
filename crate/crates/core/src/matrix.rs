//! Dense square complex matrices and the shared JSON matrix format.
//!
//! The on-disk format is `{ "dim": n, "entries": [[re, im], ...] }` with the
//! `n * n` entries listed in row-major order.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KippError, Result};

pub type C64 = Complex64;

/// The imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// A dense `dim x dim` complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Wraps a nalgebra matrix, checking shape and finiteness.
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows != cols || rows == 0 {
            return Err(KippError::NotSquare { rows, cols });
        }
        if inner.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(KippError::NonFinite);
        }
        Ok(Self(inner))
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(KippError::BadDims(format!(
                "{} entries for dim {}",
                entries.len(),
                dim
            )));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds a matrix from rows of complex numbers.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(KippError::NotSquare {
                rows: dim,
                cols: rows.first().map_or(0, Vec::len),
            });
        }
        Self::from_row_slice(dim, &flat)
    }

    /// Builds a matrix from rows of real numbers.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, v) in values.iter().enumerate() {
            m[(k, k)] = *v;
        }
        Self(m)
    }

    /// Block-diagonal direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &ComplexMatrix) -> Self {
        let (n, m) = (self.dim(), other.dim());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.0);
        out.view_mut((n, n), (m, m)).copy_from(&other.0);
        Self(out)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    /// `self + c I`.
    pub fn shift(&self, c: C64) -> Self {
        let mut m = self.0.clone();
        for k in 0..self.dim() {
            m[(k, k)] += c;
        }
        Self(m)
    }

    /// `U* self U`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self(u.0.adjoint() * &self.0 * &u.0)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to another matrix of the same size.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn diagonal_entries(&self) -> Vec<C64> {
        (0..self.dim()).map(|k| self.0[(k, k)]).collect()
    }

    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.0[(i, j)].norm() <= tol))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.0 - self.0.adjoint()).norm() <= tol
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MatrixFile::from(self)).expect("matrix serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MatrixFile = serde_json::from_str(text)?;
        file.try_into()
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

/// Serialized form of [`ComplexMatrix`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixFile {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m.get(i, j);
                entries.push([z.re, z.im]);
            }
        }
        MatrixFile { dim: n, entries }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = KippError;

    fn try_from(file: MatrixFile) -> Result<Self> {
        if file.dim == 0 {
            return Err(KippError::Input("dim must be positive".into()));
        }
        if file.entries.len() != file.dim * file.dim {
            return Err(KippError::Input(format!(
                "expected {} entries for dim {}, found {}",
                file.dim * file.dim,
                file.dim,
                file.entries.len()
            )));
        }
        let entries: Vec<C64> = file.entries.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        ComplexMatrix::from_row_slice(file.dim, &entries)
            .map_err(|e| KippError::Input(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_preserves_bits() {
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(0.1, -0.3), C64::new(1.0 / 3.0, 0.0)],
            vec![C64::new(0.0, 2.0e-17), C64::new(-7.25, 1e300)],
        ])
        .unwrap();
        let back = ComplexMatrix::from_json(&m.to_json()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn reader_rejects_wrong_entry_count() {
        let err = ComplexMatrix::from_json(r#"{"dim":2,"entries":[[0,0],[1,0],[0,0]]}"#);
        assert!(matches!(err, Err(KippError::Input(_))));
        let err = ComplexMatrix::from_json(r#"{"dim":0,"entries":[]}"#);
        assert!(matches!(err, Err(KippError::Input(_))));
        let err = ComplexMatrix::from_json(r#"{"dim":1,"entries":[[0]]}"#);
        assert!(matches!(err, Err(KippError::Input(_))));
    }

    #[test]
    fn rejects_non_finite() {
        let m = DMatrix::from_element(1, 1, C64::new(f64::NAN, 0.0));
        assert!(matches!(ComplexMatrix::new(m), Err(KippError::NonFinite)));
    }

    #[test]
    fn direct_sum_places_blocks() {
        let a = ComplexMatrix::diagonal(&[C64::new(1.0, 0.0)]);
        let b = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let s = a.direct_sum(&b);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.get(0, 0), C64::new(1.0, 0.0));
        assert_eq!(s.get(1, 2), C64::new(1.0, 0.0));
        assert_eq!(s.get(0, 1), C64::new(0.0, 0.0));
    }
}
