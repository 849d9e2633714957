//! Choi matrices and recovery of `X ↦ U X U*` / `X ↦ U Xᵀ U*` from a factor map.

use std::fmt;

use num_complex::Complex64;

use super::factor::FactorMap;
use crate::hermitian::{HermitianBasis, HermitianOperator};
use crate::linalg;
use crate::tensor::CMatrix;

/// Smallest Choi eigenvalue still treated as nonnegative.
pub const CHOI_PSD_TOL: f64 = 1e-8;
/// Minimal ratio of the two leading Choi eigenvalues for rank one.
pub const CHOI_RANK_ONE_RATIO: f64 = 1e6;
/// Largest per-basis-element mismatch accepted after extraction.
pub const RECOVERY_TOL: f64 = 1e-8;

/// `Σ_ij E_ij ⊗ ψ(E_ij)`, with `ψ` extended complex-linearly from `H_n`
/// through `M = H₁ + i H₂`.
pub fn choi_matrix(psi: &FactorMap) -> CMatrix {
    let (n, m) = (psi.in_dim(), psi.out_dim());
    let mut choi = CMatrix::zeros(n * m, n * m);
    let half = Complex64::new(0.5, 0.0);
    for i in 0..n {
        for j in 0..n {
            // E_ij = H₁ + i H₂ with H₁ = (E_ij + E_ji)/2, H₂ = (E_ij − E_ji)/(2i)
            let mut h1 = CMatrix::zeros(n, n);
            let mut h2 = CMatrix::zeros(n, n);
            h1[(i, j)] += half;
            h1[(j, i)] += half;
            h2[(i, j)] += Complex64::new(0.0, -0.5);
            h2[(j, i)] += Complex64::new(0.0, 0.5);
            let a = psi.apply(&HermitianOperator::symmetrized(h1)).expect("dimension matches");
            let b = psi.apply(&HermitianOperator::symmetrized(h2)).expect("dimension matches");
            let block = a.into_matrix() + b.into_matrix() * Complex64::new(0.0, 1.0);
            choi.view_mut((i * m, j * m), (m, m)).copy_from(&block);
        }
    }
    choi
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiSpectrum {
    pub min_eigenvalue: f64,
    pub leading: f64,
    pub second: f64,
}

impl ChoiSpectrum {
    fn is_psd_rank_one(&self) -> bool {
        self.min_eigenvalue >= -CHOI_PSD_TOL && self.leading > 0.0 && self.leading >= CHOI_RANK_ONE_RATIO * self.second.abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecoveryFailure {
    NotSquare { in_dim: usize, out_dim: usize },
    /// Neither `ψ` nor `ψ ∘ transpose` has a rank-one PSD Choi matrix.
    NotConjugation { direct: ChoiSpectrum, transposed: ChoiSpectrum },
    /// Extraction succeeded but the recovered form misses `ψ` on some basis element.
    Mismatch { error: f64 },
}

impl fmt::Display for RecoveryFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecoveryFailure::NotSquare { in_dim, out_dim } => {
                write!(f, "factor map {in_dim} -> {out_dim} is not square")
            }
            RecoveryFailure::NotConjugation { direct, transposed } => write!(
                f,
                "Choi matrix is not rank-one PSD (direct: min {:.3e}, top {:.3e}/{:.3e}; transposed: min {:.3e}, top {:.3e}/{:.3e})",
                direct.min_eigenvalue,
                direct.leading,
                direct.second,
                transposed.min_eigenvalue,
                transposed.leading,
                transposed.second
            ),
            RecoveryFailure::Mismatch { error } => write!(f, "recovered form misses the map by {error:.3e}"),
        }
    }
}

fn spectrum_and_top(choi: &CMatrix) -> (ChoiSpectrum, f64, CMatrix) {
    let (values, vectors) = linalg::eigh(choi);
    let d = values.len();
    let spectrum = ChoiSpectrum {
        min_eigenvalue: values[0],
        leading: values[d - 1],
        second: if d > 1 { values[d - 2] } else { 0.0 },
    };
    let top = vectors.column(d - 1).into_owned();
    (spectrum, values[d - 1], CMatrix::from_column_slice(d, 1, top.as_slice()))
}

/// Scales so that the largest-magnitude entry is positive real.
pub fn normalize_phase(u: &CMatrix) -> CMatrix {
    let pivot = u
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    if pivot.norm() == 0.0 {
        return u.clone();
    }
    u * (pivot.conj() / pivot.norm())
}

/// Reads `U` off a rank-one Choi matrix `v v*` with `v[i·n + a] = U[a, i]`.
fn unitary_from_top(lambda: f64, top: &CMatrix, n: usize) -> CMatrix {
    let v = top.scale(lambda.max(0.0).sqrt());
    let raw = CMatrix::from_fn(n, n, |a, i| v[(i * n + a, 0)]);
    normalize_phase(&linalg::polar_unitary(&raw))
}

fn max_mismatch(psi: &FactorMap, u: &CMatrix, transpose: bool) -> f64 {
    HermitianBasis::gm_v1(psi.in_dim())
        .elements()
        .iter()
        .map(|b| {
            let arg = if transpose { b.transpose() } else { b.clone() };
            let expected = arg.conjugate_by(u);
            let actual = psi.apply(b).expect("dimension matches");
            (actual.matrix() - expected.matrix()).norm()
        })
        .fold(0.0, f64::max)
}

/// Recovers `(U, transposed)` with `ψ(X) = U X U*` or `ψ(X) = U Xᵀ U*`.
pub fn recover_factor(psi: &FactorMap) -> Result<(CMatrix, bool), RecoveryFailure> {
    let n = psi.in_dim();
    if psi.out_dim() != n {
        return Err(RecoveryFailure::NotSquare { in_dim: n, out_dim: psi.out_dim() });
    }
    let (direct, lambda, top) = spectrum_and_top(&choi_matrix(psi));
    let (tflag, lambda, top) = if direct.is_psd_rank_one() {
        (false, lambda, top)
    } else {
        let composed = psi.compose(&FactorMap::transpose(n)).expect("square map");
        let (transposed, lambda_t, top_t) = spectrum_and_top(&choi_matrix(&composed));
        if !transposed.is_psd_rank_one() {
            return Err(RecoveryFailure::NotConjugation { direct, transposed });
        }
        (true, lambda_t, top_t)
    };
    let u = unitary_from_top(lambda, &top, n);
    let error = max_mismatch(psi, &u, tflag);
    if !(error < RECOVERY_TOL) {
        return Err(RecoveryFailure::Mismatch { error });
    }
    Ok((u, tflag))
}
