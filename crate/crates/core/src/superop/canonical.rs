use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use super::Superoperator;
use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::linalg::{self, unitarity_defect};
use crate::tensor::{check_permutation, invert_permutation, kron_all, CMatrix, TensorShape};

/// Unitarity slack accepted for the per-slot unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// `⊗ A_i ↦ ⊗ ψ_i(A_{π(i)})` with `ψ_i(X) = U_i X U_i*` or `U_i Xᵀ U_i*`.
///
/// `perm[i]` is the input slot feeding output slot `i`; slot dimensions must
/// agree along the permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalAutomorphism {
    shape: TensorShape,
    perm: Vec<usize>,
    unitaries: Vec<CMatrix>,
    tflags: Vec<bool>,
}

impl CanonicalAutomorphism {
    pub fn new(shape: TensorShape, perm: Vec<usize>, unitaries: Vec<CMatrix>, tflags: Vec<bool>) -> Result<Self> {
        let k = shape.num_factors();
        check_permutation(&perm, k)?;
        for (i, &p) in perm.iter().enumerate() {
            if shape.dim(p) != shape.dim(i) {
                return Err(Error::InvalidPermutation(format!(
                    "slot {i} (dim {}) cannot receive slot {p} (dim {})",
                    shape.dim(i),
                    shape.dim(p)
                )));
            }
        }
        if unitaries.len() != k || tflags.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: unitaries.len().min(tflags.len()) });
        }
        for (slot, u) in unitaries.iter().enumerate() {
            if u.nrows() != shape.dim(slot) || u.ncols() != shape.dim(slot) {
                return Err(Error::DimensionMismatch { expected: shape.dim(slot), found: u.nrows() });
            }
            let deviation = unitarity_defect(u);
            if !(deviation <= UNITARY_TOL) {
                return Err(Error::NonUnitary { slot, deviation });
            }
        }
        Ok(Self { shape, perm, unitaries, tflags })
    }

    pub fn identity(shape: &TensorShape) -> Self {
        let k = shape.num_factors();
        Self {
            shape: shape.clone(),
            perm: (0..k).collect(),
            unitaries: shape.dims().iter().map(|&n| CMatrix::identity(n, n)).collect(),
            tflags: vec![false; k],
        }
    }

    /// Pure factor permutation with identity unitaries and no transposes.
    pub fn permutation(shape: &TensorShape, perm: Vec<usize>) -> Result<Self> {
        let k = shape.num_factors();
        let unitaries = shape.dims().iter().map(|&n| CMatrix::identity(n, n)).collect();
        Self::new(shape.clone(), perm, unitaries, vec![false; k])
    }

    /// Partial transpose on the flagged slots.
    pub fn transposes(shape: &TensorShape, tflags: Vec<bool>) -> Result<Self> {
        let k = shape.num_factors();
        let unitaries = shape.dims().iter().map(|&n| CMatrix::identity(n, n)).collect();
        Self::new(shape.clone(), (0..k).collect(), unitaries, tflags)
    }

    /// Local unitary conjugation `X ↦ (⊗U_i) X (⊗U_i)*`.
    pub fn local_unitary(shape: &TensorShape, unitaries: Vec<CMatrix>) -> Result<Self> {
        let k = shape.num_factors();
        Self::new(shape.clone(), (0..k).collect(), unitaries, vec![false; k])
    }

    /// Uniform permutation within each class of equal dimensions, Haar
    /// unitaries and fair-coin transpose flags.
    pub fn random<R: Rng + ?Sized>(shape: &TensorShape, rng: &mut R) -> Self {
        let k = shape.num_factors();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut dims: Vec<usize> = shape.dims().to_vec();
        dims.sort_unstable();
        dims.dedup();
        for d in dims {
            let class: Vec<usize> = (0..k).filter(|&s| shape.dim(s) == d).collect();
            let mut shuffled = class.clone();
            shuffled.shuffle(rng);
            for (&slot, &src) in class.iter().zip(&shuffled) {
                perm[slot] = src;
            }
        }
        let unitaries = shape.dims().iter().map(|&n| linalg::haar_unitary(n, rng)).collect();
        let tflags = (0..k).map(|_| rng.random_bool(0.5)).collect();
        Self { shape: shape.clone(), perm, unitaries, tflags }
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn unitaries(&self) -> &[CMatrix] {
        &self.unitaries
    }

    pub fn tflags(&self) -> &[bool] {
        &self.tflags
    }

    /// Action on an arbitrary operator: move factors, transpose flagged
    /// output slots, conjugate by `⊗U_i`.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        let moved_to = invert_permutation(&self.perm);
        let (y, out_shape) = x.permute_factors(&self.shape, &moved_to)?;
        debug_assert_eq!(out_shape, self.shape);
        let flagged: Vec<usize> = (0..self.tflags.len()).filter(|&s| self.tflags[s]).collect();
        let y = y.partial_transpose(&self.shape, &flagged)?;
        Ok(y.conjugate_by(&kron_all(&self.unitaries)))
    }

    /// Coordinate matrix of the automorphism, built column by column.
    pub fn superop(&self) -> Result<Superoperator> {
        Superoperator::from_map(&self.shape, |b| self.apply(b))
    }

    /// `self ∘ other`: `other` acts first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::InvalidShape(format!("cannot compose {} with {}", self.shape, other.shape)));
        }
        let k = self.shape.num_factors();
        let mut perm = Vec::with_capacity(k);
        let mut unitaries = Vec::with_capacity(k);
        let mut tflags = Vec::with_capacity(k);
        for i in 0..k {
            let j = self.perm[i];
            perm.push(other.perm[j]);
            let inner = if self.tflags[i] { other.unitaries[j].map(|z| z.conj()) } else { other.unitaries[j].clone() };
            unitaries.push(&self.unitaries[i] * inner);
            tflags.push(self.tflags[i] ^ other.tflags[j]);
        }
        Ok(Self { shape: self.shape.clone(), perm, unitaries, tflags })
    }

    pub fn inverse(&self) -> Self {
        let k = self.shape.num_factors();
        let perm = invert_permutation(&self.perm);
        let mut unitaries = vec![CMatrix::zeros(0, 0); k];
        let mut tflags = vec![false; k];
        for i in 0..k {
            let j = self.perm[i];
            unitaries[j] = if self.tflags[i] { self.unitaries[i].transpose() } else { self.unitaries[i].adjoint() };
            tflags[j] = self.tflags[i];
        }
        Self { shape: self.shape.clone(), perm, unitaries, tflags }
    }

    /// Largest per-slot `‖U_i − e^{iθ} V_i‖_F` after aligning global phases;
    /// `None` when the permutations or flags differ.
    pub fn unitary_distance_up_to_phase(&self, other: &Self) -> Option<f64> {
        if self.shape != other.shape || self.perm != other.perm || self.tflags != other.tflags {
            return None;
        }
        Some(
            self.unitaries
                .iter()
                .zip(&other.unitaries)
                .map(|(u, v)| phase_aligned_distance(u, v))
                .fold(0.0, f64::max),
        )
    }
}

/// `min_θ ‖u − e^{iθ} v‖_F`.
pub fn phase_aligned_distance(u: &CMatrix, v: &CMatrix) -> f64 {
    let overlap: Complex64 = v.iter().zip(u.iter()).map(|(a, b)| a.conj() * b).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { Complex64::new(1.0, 0.0) };
    (u - v * phase).norm()
}
