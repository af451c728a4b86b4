//! Dense complex linear algebra at desk scale.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::qarith::{HybridDims, DEFAULT_DIM_CAP};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries; rejects non-finite values.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return invalid(format!("{rows}x{cols} matrix needs {} entries, got {}", rows * cols, data.len()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("matrix entries must be finite");
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return invalid("ragged rows");
        }
        Self::from_vec(r, c, rows.concat())
    }

    /// `|a><b|`.
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        let mut m = Self::zeros(a.len(), b.len());
        for (i, &x) in a.iter().enumerate() {
            for (k, &y) in b.iter().enumerate() {
                m.data[i * b.len() + k] = x * y.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                m.data[c * self.rows + r] = self.data[r * self.cols + c].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        let oc = other.cols;
        for r in 0..self.rows {
            let row_out = &mut out.data[r * oc..(r + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row_b = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in row_out.iter_mut().zip(row_b) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return invalid(format!("vector of length {} does not fit {} columns", v.len(), self.cols));
        }
        Ok((0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut e: usize) -> Result<Self> {
        if !self.is_square() {
            return invalid("power of a non-square matrix");
        }
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Largest absolute entrywise difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `<v| self |v>`.
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let w = self.apply(v)?;
        Ok(v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum())
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// One matrix row per line, entries formatted `re+imj`.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for r in 0..self.rows {
            let line: Vec<String> = (0..self.cols).map(|c| format_complex(self.get(r, c))).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

/// Formats `z` as `re+imj` (or `re-imj`).
pub fn format_complex(z: C64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}j", z.re, -z.im)
    } else {
        format!("{}+{}j", z.re, z.im)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in add");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch in sub");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("shape mismatch in mul")
    }
}

/// Kronecker product, subject to the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows);
    let cols = a.cols.checked_mul(b.cols);
    let (rows, cols) = match (rows, cols) {
        (Some(r), Some(c)) if r <= DEFAULT_DIM_CAP && c <= DEFAULT_DIM_CAP => (r, c),
        _ => return Err(Error::Capacity(format!("kron of {}x{} and {}x{}", a.rows, a.cols, b.rows, b.cols))),
    };
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows {
        for ac in 0..a.cols {
            let x = a.get(ar, ac);
            if x == ZERO {
                continue;
            }
            for br in 0..b.rows {
                for bc in 0..b.cols {
                    out.data[(ar * b.rows + br) * cols + ac * b.cols + bc] = x * b.get(br, bc);
                }
            }
        }
    }
    Ok(out)
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// `max |A - A^dagger|`.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.rows;
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((a.get(r, c) - a.get(c, r).conj()).norm());
        }
    }
    worst
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Column `i` is the unit eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

/// Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_spectrum(a: &ComplexMatrix) -> Result<Spectrum> {
    let defect = hermiticity_defect(a);
    if defect > 1e-9 {
        return Err(Error::Domain(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let n = a.rows;
    // Symmetrize so the solver sees an exactly Hermitian input.
    let mut m = a.to_nalgebra();
    for r in 0..n {
        for c in r..n {
            let v = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = v;
            m[(c, r)] = v.conj();
        }
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &k| eig.eigenvalues[k].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, col, eig.eigenvectors[(r, i)]);
        }
    }
    Ok(Spectrum { values, vectors })
}

pub fn is_unitary(a: &ComplexMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let prod = a.adjoint().matmul(a).expect("square");
    prod.max_abs_diff(&ComplexMatrix::identity(a.rows)) <= tol
}

pub fn is_projector(a: &ComplexMatrix, tol: f64) -> bool {
    if !a.is_square() || hermiticity_defect(a) > tol {
        return false;
    }
    let sq = a.matmul(a).expect("square");
    sq.max_abs_diff(a) <= tol
}

/// A normalized pure state on a hybrid system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub dims: HybridDims,
    pub amplitudes: Vec<C64>,
}

impl StateVector {
    /// Rejects vectors whose squared norm differs from 1 by more than 1e-12.
    pub fn new(dims: HybridDims, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return invalid(format!("{} amplitudes for total dimension {}", amplitudes.len(), dims.total()));
        }
        let n2 = norm_sqr(&amplitudes);
        if (n2 - 1.0).abs() > 1e-12 {
            return invalid(format!("state is not normalized (|psi|^2 = {n2})"));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn basis(dims: HybridDims, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dims.total()];
        amplitudes[index] = ONE;
        Self { dims, amplitudes }
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identity() {
        let k = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).unwrap();
        assert_eq!(k, ComplexMatrix::identity(6));
    }

    #[test]
    fn kron_z_identity_diagonal() {
        let z = ComplexMatrix::from_diagonal(&[c(1.0), c(-1.0)]);
        let k = kron(&z, &ComplexMatrix::identity(3)).unwrap();
        let diag: Vec<f64> = (0..6).map(|i| k.get(i, i).re).collect();
        assert_eq!(diag, vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
    }

    #[test]
    fn spectrum_of_z() {
        let z = ComplexMatrix::from_diagonal(&[c(1.0), c(-1.0)]);
        let s = hermitian_spectrum(&z).unwrap();
        assert!((s.values[0] - 1.0).abs() < 1e-12 && (s.values[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap();
        assert!(matches!(hermitian_spectrum(&m), Err(Error::Domain(_))));
    }

    #[test]
    fn projector_predicates() {
        let p = ComplexMatrix::from_diagonal(&[ONE, ZERO]);
        assert!(is_projector(&p, 1e-12));
        let x = ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap();
        let half = (&ComplexMatrix::identity(2) + &x).scale(c(0.5));
        let shifted = &half + &ComplexMatrix::identity(2).scale(c(0.1));
        assert!(!is_projector(&shifted, 1e-9));
    }

    #[test]
    fn csv_format() {
        let m = ComplexMatrix::from_rows(&[vec![C64::new(1.0, -0.5), C64::new(0.0, 2.0)]]).unwrap();
        assert_eq!(m.to_csv(), "1-0.5j,0+2j\n");
    }
}
