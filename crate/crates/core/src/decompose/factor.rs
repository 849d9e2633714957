//! Single-slot factor maps `A ↦ tr^r(Ψ(Q_1 ⊗ .. ⊗ A ⊗ .. ⊗ Q_k))` and the F-test.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hermitian::{HermitianBasis, HermitianOperator};
use crate::superop::Superoperator;
use crate::tensor::TensorShape;

/// Entries above this are form (i) (congruence); the midpoint of 0 and √2.
pub const F_THRESHOLD: f64 = SQRT_2 / 2.0;
/// Entries strictly between this and [`F_THRESHOLD`] are too close to call.
pub const F_AMBIGUOUS_LOW: f64 = 0.2;

/// A real-linear map `H_{n_in} → H_{n_out}` in gm-v1 coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorMap {
    in_dim: usize,
    out_dim: usize,
    matrix: DMatrix<f64>,
}

impl FactorMap {
    pub fn new(in_dim: usize, out_dim: usize, matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != out_dim * out_dim || matrix.ncols() != in_dim * in_dim {
            return Err(Error::DimensionMismatch { expected: out_dim * out_dim, found: matrix.nrows() });
        }
        Ok(Self { in_dim, out_dim, matrix })
    }

    pub fn from_map<F>(in_dim: usize, out_dim: usize, mut map: F) -> Result<Self>
    where
        F: FnMut(&HermitianOperator) -> Result<HermitianOperator>,
    {
        let basis = HermitianBasis::gm_v1(in_dim);
        let mut matrix = DMatrix::zeros(out_dim * out_dim, in_dim * in_dim);
        for (k, b) in basis.elements().iter().enumerate() {
            let image = map(b)?;
            if image.dim() != out_dim {
                return Err(Error::DimensionMismatch { expected: out_dim, found: image.dim() });
            }
            matrix.set_column(k, &image.to_coords());
        }
        Ok(Self { in_dim, out_dim, matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self { in_dim: n, out_dim: n, matrix: DMatrix::identity(n * n, n * n) }
    }

    /// `A ↦ Aᵀ`: in gm-v1 coordinates only the `Y_ij` elements change sign.
    pub fn transpose(n: usize) -> Self {
        let mut m = Self::identity(n);
        for k in (n..n * n).skip(1).step_by(2) {
            m.matrix[(k, k)] = -1.0;
        }
        m
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: a.dim() });
        }
        let c = &self.matrix * a.to_coords();
        HermitianOperator::from_coords(self.out_dim, c.as_slice())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if other.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: other.out_dim });
        }
        Ok(Self { in_dim: other.in_dim, out_dim: self.out_dim, matrix: &self.matrix * &other.matrix })
    }
}

fn check_probes(shape: &TensorShape, probes: &[HermitianOperator], skip: Option<usize>) -> Result<()> {
    if probes.len() != shape.num_factors() {
        return Err(Error::DimensionMismatch { expected: shape.num_factors(), found: probes.len() });
    }
    for (slot, q) in probes.iter().enumerate() {
        if Some(slot) == skip {
            continue;
        }
        if q.dim() != shape.dim(slot) {
            return Err(Error::DimensionMismatch { expected: shape.dim(slot), found: q.dim() });
        }
        if !q.is_pure() {
            return Err(Error::Configuration(format!("probe for slot {slot} is not a pure state")));
        }
    }
    Ok(())
}

fn insert_at(probes: &[HermitianOperator], slot: usize, a: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::kron_all(probes.iter().enumerate().map(|(i, q)| if i == slot { a } else { q }))
}

/// Materializes `φ_r(·) = tr^r(S(Q_1 ⊗ .. ⊗ · ⊗ .. ⊗ Q_k))` with the argument in
/// slot `in_slot`. The probe at `in_slot` is ignored.
pub fn factor_map(
    s: &Superoperator,
    out_slot: usize,
    in_slot: usize,
    probes: &[HermitianOperator],
) -> Result<FactorMap> {
    let shape = s.shape();
    if out_slot >= shape.num_factors() || in_slot >= shape.num_factors() {
        return Err(Error::InvalidSlots(format!("slots ({out_slot}, {in_slot}) out of range for {shape}")));
    }
    check_probes(shape, probes, Some(in_slot))?;
    FactorMap::from_map(shape.dim(in_slot), shape.dim(out_slot), |a| {
        s.apply(&insert_at(probes, in_slot, a))?.partial_trace(shape, &[out_slot])
    })
}

/// `M[p][r] = ‖φ_r(E₁₁ − E₂₂ in slot p)‖_F`.
pub fn f_test(s: &Superoperator, probes: &[HermitianOperator]) -> Result<DMatrix<f64>> {
    let shape = s.shape();
    check_probes(shape, probes, None)?;
    let k = shape.num_factors();
    let mut m = DMatrix::zeros(k, k);
    for p in 0..k {
        let n = shape.dim(p);
        let mut diag = vec![0.0; n];
        diag[0] = 1.0;
        diag[1] = -1.0;
        let a = HermitianOperator::from_real_diagonal(&diag);
        let image = s.apply(&insert_at(probes, p, &a))?;
        for r in 0..k {
            m[(p, r)] = image.partial_trace(shape, &[r])?.frobenius_norm();
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub enum PermutationFailure {
    /// Entries in the band between the two theoretical values.
    Ambiguous { entries: Vec<(usize, usize, f64)> },
    /// Input slots whose every factor map is constant.
    ConstantRows { rows: Vec<usize> },
    /// Input slots feeding several outputs, or outputs fed by several inputs.
    NotPermutation { rows: Vec<usize> },
    /// Output slot `out_slot` would receive input slot `in_slot` of another dimension.
    DimensionMismatch { in_slot: usize, out_slot: usize },
}

impl PermutationFailure {
    pub fn is_ambiguous(&self) -> bool {
        matches!(self, PermutationFailure::Ambiguous { .. })
    }
}

impl fmt::Display for PermutationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermutationFailure::Ambiguous { entries } => write!(f, "ambiguous F-test entries {entries:?}"),
            PermutationFailure::ConstantRows { rows } => write!(f, "input slots {rows:?} only feed constant maps"),
            PermutationFailure::NotPermutation { rows } => {
                write!(f, "F-test pattern is not a permutation (rows {rows:?})")
            }
            PermutationFailure::DimensionMismatch { in_slot, out_slot } => {
                write!(f, "input slot {in_slot} would feed output slot {out_slot} of different dimension")
            }
        }
    }
}

/// Reads `π` (with `π[r]` the input slot feeding output `r`) off an F-matrix.
pub fn permutation_from_f(m: &DMatrix<f64>, shape: &TensorShape) -> std::result::Result<Vec<usize>, PermutationFailure> {
    let k = shape.num_factors();
    assert_eq!(m.shape(), (k, k), "F-matrix must be k×k");

    let ambiguous: Vec<(usize, usize, f64)> = (0..k)
        .flat_map(|p| (0..k).map(move |r| (p, r)))
        .filter(|&(p, r)| m[(p, r)] > F_AMBIGUOUS_LOW && m[(p, r)] <= F_THRESHOLD)
        .map(|(p, r)| (p, r, m[(p, r)]))
        .collect();
    if !ambiguous.is_empty() {
        return Err(PermutationFailure::Ambiguous { entries: ambiguous });
    }

    let hits: Vec<Vec<usize>> = (0..k).map(|p| (0..k).filter(|&r| m[(p, r)] > F_THRESHOLD).collect()).collect();
    let constant: Vec<usize> = (0..k).filter(|&p| hits[p].is_empty()).collect();
    if !constant.is_empty() {
        return Err(PermutationFailure::ConstantRows { rows: constant });
    }
    let multiple: Vec<usize> = (0..k).filter(|&p| hits[p].len() > 1).collect();
    if !multiple.is_empty() {
        return Err(PermutationFailure::NotPermutation { rows: multiple });
    }

    let mut perm = vec![usize::MAX; k];
    let mut clashes = Vec::new();
    for (p, row) in hits.iter().enumerate() {
        let r = row[0];
        if perm[r] != usize::MAX {
            clashes.push(p);
        }
        perm[r] = p;
    }
    if !clashes.is_empty() {
        return Err(PermutationFailure::NotPermutation { rows: clashes });
    }
    for (r, &p) in perm.iter().enumerate() {
        if shape.dim(p) != shape.dim(r) {
            return Err(PermutationFailure::DimensionMismatch { in_slot: p, out_slot: r });
        }
    }
    Ok(perm)
}
