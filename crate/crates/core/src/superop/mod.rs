//! Superoperators: real-linear maps on `H_N`, stored as real `N² × N²`
//! matrices in gm-v1 coordinates. Column `k` holds the coordinates of the
//! image of basis element `k`.

mod canonical;
mod lemma3;

pub use canonical::{phase_aligned_distance, CanonicalAutomorphism, UNITARY_TOL};
pub use lemma3::{
    depolarizing_direction, determinant_profile, find_safe_t, find_safe_t_with, is_trace_annihilating,
    lemma3_map, project_trace_annihilating, DeterminantProfile, SafeStep, SAFE_T_SAFETY_FACTOR,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hermitian::{HermitianBasis, HermitianOperator};
use crate::linalg;
use crate::tensor::{CMatrix, TensorShape};

/// Largest condition number accepted by [`Superoperator::inverse`].
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    shape: TensorShape,
    matrix: DMatrix<f64>,
}

impl Superoperator {
    pub fn new(shape: TensorShape, matrix: DMatrix<f64>) -> Result<Self> {
        let d = shape.total_dim().pow(2);
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Configuration("superoperator has non-finite entries".into()));
        }
        Ok(Self { shape, matrix })
    }

    pub fn identity(shape: &TensorShape) -> Self {
        let d = shape.total_dim().pow(2);
        Self { shape: shape.clone(), matrix: DMatrix::identity(d, d) }
    }

    pub fn zeros(shape: &TensorShape) -> Self {
        let d = shape.total_dim().pow(2);
        Self { shape: shape.clone(), matrix: DMatrix::zeros(d, d) }
    }

    /// Materializes a linear map given by its action on operators, one basis
    /// element at a time.
    pub fn from_map<F>(shape: &TensorShape, mut map: F) -> Result<Self>
    where
        F: FnMut(&HermitianOperator) -> Result<HermitianOperator>,
    {
        let n = shape.total_dim();
        let basis = HermitianBasis::gm_v1(n);
        let mut matrix = DMatrix::zeros(n * n, n * n);
        for (k, b) in basis.elements().iter().enumerate() {
            let image = map(b)?;
            if image.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: image.dim() });
            }
            matrix.set_column(k, &image.to_coords());
        }
        Ok(Self { shape: shape.clone(), matrix })
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        let n = self.shape.total_dim();
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
        }
        let c = &self.matrix * x.to_coords();
        HermitianOperator::from_coords(n, c.as_slice())
    }

    /// Complex-linear extension to all of `M_N` through `T = H₁ + i H₂`.
    pub fn apply_complex(&self, t: &CMatrix) -> Result<CMatrix> {
        let adj = t.adjoint();
        let h1 = HermitianOperator::symmetrized((t + &adj).scale(0.5));
        let h2 = HermitianOperator::symmetrized((t - &adj) * Complex64::new(0.0, -0.5));
        let a = self.apply(&h1)?.into_matrix();
        let b = self.apply(&h2)?.into_matrix();
        Ok(a + b * Complex64::new(0.0, 1.0))
    }

    /// Dual map under `⟨X, Y⟩ = tr(XY)`; the transpose in orthonormal coordinates.
    pub fn adjoint(&self) -> Self {
        Self { shape: self.shape.clone(), matrix: self.matrix.transpose() }
    }

    /// `self ∘ other`: `other` is applied first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::InvalidShape(format!("cannot compose {} with {}", self.shape, other.shape)));
        }
        Ok(Self { shape: self.shape.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn condition_number(&self) -> f64 {
        linalg::condition_number(&self.matrix)
    }

    pub fn inverse(&self) -> Result<Self> {
        let condition = self.condition_number();
        if !(condition < MAX_CONDITION) {
            return Err(Error::Noninvertible { condition });
        }
        let inv = self.matrix.clone().try_inverse().ok_or(Error::Noninvertible { condition })?;
        Ok(Self { shape: self.shape.clone(), matrix: inv })
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { shape: self.shape.clone(), matrix: self.matrix.scale(factor) }
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.clone().determinant()
    }

    /// Largest `|tr(S(B)) − tr(B)|` over the basis elements `B`.
    pub fn trace_defect(&self) -> f64 {
        let n = self.shape.total_dim();
        let t = HermitianBasis::identity_coords(n);
        let row: DVector<f64> = self.matrix.tr_mul(&t);
        (&row - &t).amax()
    }

    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        self.trace_defect() <= tol
    }

    /// Frobenius distance between the coordinate matrices.
    pub fn distance(&self, other: &Self) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}
