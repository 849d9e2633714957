//! The trace-preserving family `L₀ + t L₁` around the completely depolarizing
//! map `L₀(A) = tr(A) I/N`. For small `|t|` these maps send separable states
//! to separable states without preserving product pure states.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::Superoperator;
use crate::error::{Error, Result};
use crate::hermitian::HermitianBasis;
use crate::rng;
use crate::states::{inscribed_ball_radius, ProductPureState};
use crate::tensor::TensorShape;

/// Fraction of the sampled ball-limited step returned by [`find_safe_t`].
pub const SAFE_T_SAFETY_FACTOR: f64 = 0.5;
const SAFE_T_SAMPLES: usize = 1000;
const SAFE_T_SEED: u64 = 0x7a0_5afe;
const DEGENERATE_DET: f64 = 1e-300;

/// Coordinates of `I_N` divided by `√N`: the unit vector dual to `tr(·)/√N`.
fn trace_direction(n: usize) -> DVector<f64> {
    HermitianBasis::identity_coords(n).unscale((n as f64).sqrt())
}

/// Projects a coordinate matrix onto `{L : tr(L(A)) = 0 ∀A}` by removing
/// its component along the identity row: `(I − e eᵀ) M`.
pub fn project_trace_annihilating(shape: &TensorShape, matrix: &DMatrix<f64>) -> Result<Superoperator> {
    let e = trace_direction(shape.total_dim());
    let row = e.tr_mul(matrix);
    Superoperator::new(shape.clone(), matrix - &e * row)
}

/// Random trace-annihilating direction `L₁` (Gaussian entries, projected).
pub fn depolarizing_direction(shape: &TensorShape, seed: u64) -> Superoperator {
    let d = shape.total_dim().pow(2);
    let mut r = rng::seeded(seed);
    let raw = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(&mut r));
    project_trace_annihilating(shape, &raw).expect("square matrix of matching size")
}

/// Largest `|tr(L(B))|` over basis elements below `tol`.
pub fn is_trace_annihilating(l1: &Superoperator, tol: f64) -> bool {
    let t = HermitianBasis::identity_coords(l1.shape().total_dim());
    l1.matrix().tr_mul(&t).amax() <= tol
}

/// The completely depolarizing map `A ↦ tr(A) I_N / N`.
pub fn completely_depolarizing(shape: &TensorShape) -> Superoperator {
    let e = trace_direction(shape.total_dim());
    Superoperator::new(shape.clone(), &e * e.transpose()).expect("square matrix of matching size")
}

/// `L₀ + t L₁`.
pub fn lemma3_map(l1: &Superoperator, t: f64) -> Superoperator {
    let l0 = completely_depolarizing(l1.shape());
    Superoperator::new(l1.shape().clone(), l0.matrix() + l1.matrix().scale(t)).expect("shapes agree")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum SafeStep {
    Bounded(f64),
    /// `L₁ = 0`: every `t` is safe.
    Unbounded,
}

impl SafeStep {
    pub fn value(self) -> f64 {
        match self {
            SafeStep::Bounded(t) => t,
            SafeStep::Unbounded => f64::INFINITY,
        }
    }
}

/// Step size `τ` such that `(L₀ + tL₁)(P)` stays inside the inscribed
/// separable ball for every sampled product pure state `P` and `|t| ≤ τ`:
/// `τ = ½ · r / max_P ‖L₁(P)‖_F`.
pub fn find_safe_t(l1: &Superoperator) -> Result<SafeStep> {
    find_safe_t_with(l1, SAFE_T_SAMPLES, SAFE_T_SEED)
}

pub fn find_safe_t_with(l1: &Superoperator, samples: usize, seed: u64) -> Result<SafeStep> {
    let shape = l1.shape();
    let radius = inscribed_ball_radius(shape)?;
    let mut r = rng::seeded(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = ProductPureState::random(shape, &mut r).projector();
        worst = worst.max(l1.apply(&p)?.frobenius_norm());
    }
    if worst == 0.0 {
        return Ok(SafeStep::Unbounded);
    }
    Ok(SafeStep::Bounded(SAFE_T_SAFETY_FACTOR * radius / worst))
}

/// Fit of `log|det(L₀ + tL₁)|` against `log|t|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantProfile {
    pub t_samples: Vec<f64>,
    pub determinants: Vec<f64>,
    /// `f(L₁)` is zero: every determinant vanished.
    pub degenerate: bool,
    pub exponent: f64,
    /// Mean of `det / t^(N²−1)` across samples.
    pub leading_coefficient: f64,
    /// Largest relative deviation of `det / t^(N²−1)` from the mean.
    pub coefficient_spread: f64,
}

pub fn determinant_profile(l1: &Superoperator, t_samples: &[f64]) -> Result<DeterminantProfile> {
    let mut distinct: Vec<f64> = t_samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 || distinct.iter().any(|&t| t == 0.0 || !t.is_finite()) {
        return Err(Error::Configuration("need at least three distinct nonzero finite t samples".into()));
    }
    let power = (l1.shape().total_dim().pow(2) - 1) as i32;
    let determinants: Vec<f64> = t_samples.iter().map(|&t| lemma3_map(l1, t).determinant()).collect();
    if determinants.iter().all(|d| d.abs() < DEGENERATE_DET) {
        return Ok(DeterminantProfile {
            t_samples: t_samples.to_vec(),
            determinants,
            degenerate: true,
            exponent: f64::NAN,
            leading_coefficient: 0.0,
            coefficient_spread: f64::NAN,
        });
    }

    let xs: Vec<f64> = t_samples.iter().map(|t| t.abs().ln()).collect();
    let ys: Vec<f64> = determinants.iter().map(|d| d.abs().ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let exponent = sxy / sxx;

    let coefficients: Vec<f64> = t_samples.iter().zip(&determinants).map(|(&t, &d)| d / t.powi(power)).collect();
    let leading_coefficient = coefficients.iter().sum::<f64>() / m;
    let coefficient_spread = coefficients
        .iter()
        .map(|c| ((c - leading_coefficient) / leading_coefficient).abs())
        .fold(0.0, f64::max);

    Ok(DeterminantProfile {
        t_samples: t_samples.to_vec(),
        determinants,
        degenerate: false,
        exponent,
        leading_coefficient,
        coefficient_spread,
    })
}
