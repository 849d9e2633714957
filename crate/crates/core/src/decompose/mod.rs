//! Recovers `(π, U_i, transpose flags)` from a superoperator that maps product
//! pure states onto product pure states, or refuses with evidence.
//!
//! Pipeline: trace preservation and invertibility; sampled product-purity
//! check; F-test at the `E₁₁` probes (cross-checked at `E₂₂`); permutation;
//! per-slot factor maps; Choi-based factor recovery; residual against the
//! reassembled canonical map.

mod choi;
mod factor;

pub use choi::{choi_matrix, normalize_phase, recover_factor, ChoiSpectrum, RecoveryFailure};
pub use factor::{
    f_test, factor_map, permutation_from_f, FactorMap, PermutationFailure, F_AMBIGUOUS_LOW, F_THRESHOLD,
};

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::rng;
use crate::states::{is_pure_product, ProductPureState, PurityFailure};
use crate::superop::{CanonicalAutomorphism, Superoperator, MAX_CONDITION};
use crate::tensor::{CMatrix, TensorShape};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecomposeConfig {
    /// Product pure states pushed through the map before the F-test.
    pub samples: usize,
    pub seed: u64,
    /// Residual below which the verdict is canonical.
    pub accept_tol: f64,
    /// Residual at or above which the verdict is not-preserver; in between is ambiguous.
    pub reject_tol: f64,
    pub purity_tol: f64,
    pub trace_tol: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self { samples: 64, seed: 0, accept_tol: 1e-8, reject_tol: 1e-4, purity_tol: 1e-8, trace_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Canonical,
    NotPreserver,
    NumericallyAmbiguous,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Canonical => "canonical",
            Verdict::NotPreserver => "not-preserver",
            Verdict::NumericallyAmbiguous => "numerically-ambiguous",
        })
    }
}

/// Evidence attached to a refusal.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    NotTracePreserving { defect: f64 },
    Noninvertible { condition: f64 },
    /// A sampled product pure state whose image is not a product pure state.
    SampleFailure { index: usize, state: ProductPureState, failure: PurityFailure },
    Permutation(PermutationFailure),
    /// The alternative probes read a different permutation.
    ProbeDisagreement { primary: Vec<usize>, alternative: Option<Vec<usize>> },
    Factor { slot: usize, failure: RecoveryFailure },
    Residual { residual: f64 },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::NotTracePreserving { defect } => write!(f, "not trace preserving (defect {defect:.3e})"),
            Witness::Noninvertible { condition } => write!(f, "not invertible (condition {condition:.3e})"),
            Witness::SampleFailure { index, failure, .. } => write!(f, "sample {index}: image has {failure}"),
            Witness::Permutation(p) => write!(f, "{p}"),
            Witness::ProbeDisagreement { primary, alternative } => {
                write!(f, "probe sets disagree: E11 gives {primary:?}, E22 gives {alternative:?}")
            }
            Witness::Factor { slot, failure } => write!(f, "output slot {slot}: {failure}"),
            Witness::Residual { residual } => write!(f, "residual {residual:.3e} against reassembled map"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub verdict: Verdict,
    pub auto: Option<CanonicalAutomorphism>,
    /// `k × k`, row = input slot, column = output slot.
    pub f_matrix: Option<DMatrix<f64>>,
    pub residual: Option<f64>,
    pub witnesses: Vec<Witness>,
}

impl DecompositionReport {
    fn refuse(verdict: Verdict, witness: Witness) -> Self {
        Self { verdict, auto: None, f_matrix: None, residual: None, witnesses: vec![witness] }
    }
}

fn probes(shape: &TensorShape, index: usize) -> Vec<HermitianOperator> {
    shape.dims().iter().map(|&n| HermitianOperator::basis_projector(n, index)).collect()
}

const MAX_SAMPLE_WITNESSES: usize = 4;

/// Sampled check that product pure states map to product pure states.
/// Returns the failing samples (at most a handful).
pub fn sample_preservation(s: &Superoperator, samples: usize, seed: u64, tol: f64) -> Result<(usize, Vec<Witness>)> {
    let shape = s.shape();
    let mut r = rng::seeded(seed);
    let mut passed = 0;
    let mut witnesses = Vec::new();
    for index in 0..samples {
        let state = ProductPureState::random(shape, &mut r);
        let image = s.apply(&state.projector())?;
        match is_pure_product(&image, shape, tol)?.failure {
            None => passed += 1,
            Some(failure) => {
                if witnesses.len() < MAX_SAMPLE_WITNESSES {
                    witnesses.push(Witness::SampleFailure { index, state, failure });
                }
            }
        }
    }
    Ok((passed, witnesses))
}

pub fn decompose(s: &Superoperator, config: &DecomposeConfig) -> Result<DecompositionReport> {
    let shape = s.shape().clone();
    let k = shape.num_factors();

    let defect = s.trace_defect();
    if !(defect <= config.trace_tol) {
        return Ok(DecompositionReport::refuse(Verdict::NotPreserver, Witness::NotTracePreserving { defect }));
    }
    let condition = s.condition_number();
    if !(condition < MAX_CONDITION) {
        return Ok(DecompositionReport::refuse(Verdict::NotPreserver, Witness::Noninvertible { condition }));
    }

    let (passed, failures) = sample_preservation(s, config.samples, config.seed, config.purity_tol)?;
    if passed < config.samples {
        return Ok(DecompositionReport {
            verdict: Verdict::NotPreserver,
            auto: None,
            f_matrix: None,
            residual: None,
            witnesses: failures,
        });
    }

    let primary = probes(&shape, 0);
    let f_matrix = f_test(s, &primary)?;
    let mut report =
        DecompositionReport { verdict: Verdict::NotPreserver, auto: None, f_matrix: Some(f_matrix.clone()), residual: None, witnesses: vec![] };

    let perm = match permutation_from_f(&f_matrix, &shape) {
        Ok(perm) => perm,
        Err(failure) => {
            if failure.is_ambiguous() {
                report.verdict = Verdict::NumericallyAmbiguous;
            }
            report.witnesses.push(Witness::Permutation(failure));
            return Ok(report);
        }
    };

    let alternative = permutation_from_f(&f_test(s, &probes(&shape, 1))?, &shape).ok();
    if alternative.as_ref() != Some(&perm) {
        report.verdict = Verdict::NumericallyAmbiguous;
        report.witnesses.push(Witness::ProbeDisagreement { primary: perm, alternative });
        return Ok(report);
    }

    let mut unitaries: Vec<CMatrix> = Vec::with_capacity(k);
    let mut tflags = Vec::with_capacity(k);
    for (r, &p) in perm.iter().enumerate() {
        let psi = factor_map(s, r, p, &primary)?;
        match recover_factor(&psi) {
            Ok((u, t)) => {
                unitaries.push(u);
                tflags.push(t);
            }
            Err(failure) => report.witnesses.push(Witness::Factor { slot: r, failure }),
        }
    }
    if !report.witnesses.is_empty() {
        return Ok(report);
    }

    let auto = match CanonicalAutomorphism::new(shape.clone(), perm, unitaries, tflags) {
        Ok(auto) => auto,
        Err(Error::NonUnitary { slot, deviation }) => {
            report.witnesses.push(Witness::Factor { slot, failure: RecoveryFailure::Mismatch { error: deviation } });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let residual = s.distance(&auto.superop()?);
    report.residual = Some(residual);
    report.verdict = if residual < config.accept_tol {
        Verdict::Canonical
    } else if residual < config.reject_tol {
        Verdict::NumericallyAmbiguous
    } else {
        Verdict::NotPreserver
    };
    if report.verdict != Verdict::Canonical {
        report.witnesses.push(Witness::Residual { residual });
    }
    report.auto = Some(auto);
    Ok(report)
}
