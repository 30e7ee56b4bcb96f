// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small quantum operators.
//!
//! Every operator in the crate (Hamiltonians, propagators, density and Choi
//! matrices) is a [`ComplexMatrix`]. Dimensions stay at or below 256, so
//! everything is dense.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used by the Hermiticity/unitarity predicates (max entry deviation).
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::identity(dim, dim))
    }

    /// Builds a matrix from row-major entries. Panics unless `rows` is square.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        assert!(
            dim >= 1 && rows.iter().all(|r| r.len() == dim),
            "rows must form a square matrix"
        );
        Self(DMatrix::from_fn(dim, dim, |r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self(DMatrix::from_fn(dim, dim, f))
    }

    /// Wraps an existing nalgebra matrix. Panics if it is not square.
    pub fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        assert!(
            m.is_square() && m.nrows() >= 1,
            "matrix must be square and non-empty"
        );
        Self(m)
    }

    /// Projector |v><v| for a column vector `v`.
    pub fn outer(v: &[Complex64], w: &[Complex64]) -> Self {
        assert_eq!(v.len(), w.len());
        Self::from_fn(v.len(), |r, c| v[r] * w[c].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn unitarity_deviation(&self) -> f64 {
        (self * &self.dagger()).max_abs_diff(&Self::identity(self.dim()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    /// PSD check on a Hermitian matrix: smallest eigenvalue ≥ −tol.
    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        match self.eigh() {
            Ok((values, _)) => values.iter().all(|&v| v >= -tol),
            Err(_) => false,
        }
    }

    /// `(A + A†)/2`
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    /// `M · v` for a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let dim = self.dim();
        assert_eq!(v.len(), dim);
        (0..dim)
            .map(|r| (0..dim).map(|c| self.0[(r, c)] * v[c]).sum())
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        self.0.column(c).iter().copied().collect()
    }

    /// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
    /// a unitary whose columns are the matching eigenvectors.
    ///
    /// The input is symmetrized before decomposition to absorb rounding.
    pub fn eigh(&self) -> Result<(Vec<f64>, ComplexMatrix)> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(self.eigh_unchecked())
    }

    pub(crate) fn eigh_unchecked(&self) -> (Vec<f64>, ComplexMatrix) {
        let eig = SymmetricEigen::new(self.hermitian_part().0);
        let dim = self.dim();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        (values, ComplexMatrix(vectors))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut Complex64 {
        &mut self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
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

/// The 2×2 Pauli matrix for `axis` (the bare σ, not σ/2).
pub fn pauli(axis: Axis) -> ComplexMatrix {
    let (a, b, c, d) = match axis {
        Axis::X => (ZERO, ONE, ONE, ZERO),
        Axis::Y => (ZERO, -I, I, ZERO),
        Axis::Z => (ONE, ZERO, ZERO, -ONE),
    };
    ComplexMatrix::from_rows(&[vec![a, b], vec![c, d]])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// `I^{⊗(site−1)} ⊗ op ⊗ I^{⊗(N−site)}`, with 1-based `site`.
pub fn embed_single_site(op: &ComplexMatrix, site: usize, n_sites: usize) -> Result<ComplexMatrix> {
    if site == 0 || site > n_sites {
        return Err(Error::SiteOutOfRange { site, n_sites });
    }
    assert_eq!(op.dim(), 2, "single-site operators are 2x2");
    let left = ComplexMatrix::identity(1 << (site - 1));
    let right = ComplexMatrix::identity(1 << (n_sites - site));
    Ok(kron(&kron(&left, op), &right))
}

/// Divided difference of `λ ↦ exp(−i·t·λ)` between two eigenvalues.
///
/// Written as `−i·t·exp(−i·t·(a+b)/2)·sinc(t·(a−b)/2)` so it stays accurate
/// when `a` and `b` are (nearly) degenerate.
pub fn expi_divided_difference(a: f64, b: f64, t: f64) -> Complex64 {
    let half = 0.5 * t * (a - b);
    let sinc = if half.abs() < 1e-4 {
        1.0 - half * half / 6.0
    } else {
        half.sin() / half
    };
    Complex64::new(0.0, -t) * Complex64::from_polar(1.0, -0.5 * t * (a + b)) * sinc
}

/// `V · diag(f(λ)) · V†`
pub fn reconstruct(vectors: &ComplexMatrix, diag: &[Complex64]) -> ComplexMatrix {
    let dim = vectors.dim();
    let scaled = DMatrix::from_fn(dim, dim, |r, c| vectors.0[(r, c)] * diag[c]);
    ComplexMatrix(scaled * vectors.0.adjoint())
}

/// `exp(−i·t·h)` for Hermitian `h`.
pub fn expm_hermitian_times_minus_i(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let (values, vectors) = h.eigh()?;
    let phases: Vec<Complex64> = values
        .iter()
        .map(|&l| Complex64::from_polar(1.0, -t * l))
        .collect();
    Ok(reconstruct(&vectors, &phases))
}

/// Traces out the final two-dimensional tensor factor.
pub fn partial_trace_last_qubit(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let dim = m.dim();
    if !dim.is_multiple_of(2) {
        return Err(Error::OddDimension(dim));
    }
    let half = dim / 2;
    Ok(ComplexMatrix::from_fn(half, |r, c| {
        m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)]
    }))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (values, _) = m.eigh()?;
    Ok(values.iter().map(|v| v.abs()).sum())
}
