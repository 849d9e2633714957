//! Hermitian operators and the fixed orthonormal Hermitian basis ("gm-v1").
//!
//! The basis of `H_n` is ordered as `E_00, ..., E_{n-1,n-1}` followed, for each
//! pair `i < j` in row-major order, by `X_ij = (E_ij + E_ji)/√2` and then
//! `Y_ij = i(E_ij − E_ji)/√2`. It is orthonormal under `⟨A, B⟩ = tr(AB)`, so
//! coordinates are `c_k = tr(B_k X)` and inner products are dot products.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::ops::{Add, Mul, Sub};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CVector};
use crate::tensor::{self, CMatrix, TensorShape};

/// Largest entrywise anti-Hermitian part accepted (and removed) at construction.
pub const HERMITICITY_REJECT_TOL: f64 = 1e-8;
/// Trace and purity tolerance for the density/pure predicates.
pub const TRACE_TOL: f64 = 1e-10;
/// Lowest eigenvalue still counted as nonnegative.
pub const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Symmetrizes `mat` as `(M + M*)/2`, rejecting inputs whose anti-Hermitian
    /// part exceeds [`HERMITICITY_REJECT_TOL`] in any entry.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), found: mat.ncols() });
        }
        let deviation = hermiticity_defect(&mat);
        if !(deviation <= HERMITICITY_REJECT_TOL) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(mat))
    }

    pub(crate) fn symmetrized(mat: CMatrix) -> Self {
        let adj = mat.adjoint();
        Self { mat: (mat + adj).scale(0.5) }
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: CMatrix::identity(n, n) }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self { mat: CMatrix::identity(n, n).scale(1.0 / n as f64) }
    }

    pub fn zeros(n: usize) -> Self {
        Self { mat: CMatrix::zeros(n, n) }
    }

    /// `E_ii` on an `n`-dimensional space.
    pub fn basis_projector(n: usize, i: usize) -> Self {
        let mut mat = CMatrix::zeros(n, n);
        mat[(i, i)] = Complex64::new(1.0, 0.0);
        Self { mat }
    }

    /// `v v*` (not normalized).
    pub fn outer(v: &CVector) -> Self {
        Self::symmetrized(v * v.adjoint())
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let d = CVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0)));
        Self { mat: CMatrix::from_diagonal(&d) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `tr(X²) = ‖X‖_F²`.
    pub fn purity(&self) -> f64 {
        self.mat.norm_squared()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }

    /// `tr(X Y)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.transpose().iter())
            .map(|(a, b)| (a * b).re)
            .sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.mat)
    }

    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        linalg::eigh(&self.mat)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_density(&self) -> bool {
        (self.trace() - 1.0).abs() <= TRACE_TOL && self.min_eigenvalue() >= -PSD_TOL
    }

    pub fn is_pure(&self) -> bool {
        self.is_density() && (self.purity() - 1.0).abs() <= TRACE_TOL
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { mat: self.mat.scale(factor) }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self { mat: tensor::kron(&self.mat, &other.mat) }
    }

    pub fn kron_all<'a, I: IntoIterator<Item = &'a HermitianOperator>>(factors: I) -> Self {
        Self { mat: tensor::kron_all(factors.into_iter().map(|f| &f.mat)) }
    }

    pub fn partial_trace(&self, shape: &TensorShape, keep: &[usize]) -> Result<Self> {
        tensor::partial_trace(&self.mat, shape, keep).map(Self::symmetrized)
    }

    pub fn partial_transpose(&self, shape: &TensorShape, slots: &[usize]) -> Result<Self> {
        tensor::partial_transpose(&self.mat, shape, slots).map(|mat| Self { mat })
    }

    /// See [`tensor::permute_factors`]; returns the operator with its new shape.
    pub fn permute_factors(&self, shape: &TensorShape, perm: &[usize]) -> Result<(Self, TensorShape)> {
        tensor::permute_factors(&self.mat, shape, perm).map(|(mat, s)| (Self { mat }, s))
    }

    /// `U X U*`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Self {
        Self::symmetrized(u * &self.mat * u.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self { mat: self.mat.transpose() }
    }

    /// Coordinates in the gm-v1 basis.
    pub fn to_coords(&self) -> DVector<f64> {
        let n = self.dim();
        let mut c = DVector::zeros(n * n);
        for i in 0..n {
            c[i] = self.mat[(i, i)].re;
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = self.mat[(i, j)];
                c[k] = SQRT_2 * z.re;
                c[k + 1] = SQRT_2 * z.im;
                k += 2;
            }
        }
        c
    }

    /// Inverse of [`HermitianOperator::to_coords`].
    pub fn from_coords(n: usize, coords: &[f64]) -> Result<Self> {
        if coords.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: coords.len() });
        }
        let mut mat = CMatrix::zeros(n, n);
        for i in 0..n {
            mat[(i, i)] = Complex64::new(coords[i], 0.0);
        }
        let mut k = n;
        for i in 0..n {
            for j in (i + 1)..n {
                let z = Complex64::new(coords[k], coords[k + 1]) * FRAC_1_SQRT_2;
                mat[(i, j)] = z;
                mat[(j, i)] = z.conj();
                k += 2;
            }
        }
        Ok(Self { mat })
    }
}

/// Largest entry of `|M − M*| / 2`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm() / 2.0);
        }
    }
    worst
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat + &rhs.mat }
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator { mat: &self.mat - &rhs.mat }
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        self.scale(rhs)
    }
}

/// The gm-v1 orthonormal basis of `H_n`, materialized.
#[derive(Debug, Clone)]
pub struct HermitianBasis {
    n: usize,
    elements: Vec<HermitianOperator>,
}

impl HermitianBasis {
    pub fn gm_v1(n: usize) -> Self {
        let elements = (0..n * n)
            .map(|k| {
                let mut c = vec![0.0; n * n];
                c[k] = 1.0;
                HermitianOperator::from_coords(n, &c).expect("length matches")
            })
            .collect();
        Self { n, elements }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn to_coords(&self, x: &HermitianOperator) -> Result<DVector<f64>> {
        if x.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: x.dim() });
        }
        Ok(x.to_coords())
    }

    pub fn from_coords(&self, coords: &[f64]) -> Result<HermitianOperator> {
        HermitianOperator::from_coords(self.n, coords)
    }

    /// Coordinates of the identity: ones on the diagonal block, zeros elsewhere.
    pub fn identity_coords(n: usize) -> DVector<f64> {
        DVector::from_fn(n * n, |k, _| if k < n { 1.0 } else { 0.0 })
    }
}
