//! Product numerical range `W⊗(T) = { tr(T X) : X ∈ ⊗P_{n_i} }`.
//!
//! The convex hull is described by its support function
//! `h(θ) = max_X Re(e^{−iθ} tr(TX)) = max_X tr(H_θ X)` with
//! `H_θ = (e^{−iθ}T + e^{iθ}T*)/2`, evaluated by alternating top-eigenvector
//! ascent over the product factors with random restarts.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::linalg::{self, CVector};
use crate::rng;
use crate::states::ProductPureState;
use crate::superop::CanonicalAutomorphism;
use crate::tensor::{CMatrix, TensorShape};

/// Stream index reserved for the inner-point sampler.
const INNER_STREAM: u64 = u64::MAX;
/// Relative slack for the monotone-ascent assertion.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AscentOptions {
    pub starts: usize,
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Product states sampled for the inner point cloud.
    pub inner_samples: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { starts: 16, iters: 200, tol: 1e-12, seed: 0, inner_samples: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct RayleighMax {
    /// Certified lower bound on `max tr(H X)` over product pure states.
    pub value: f64,
    pub state: ProductPureState,
    /// Objective after each sweep of the winning start.
    pub history: Vec<f64>,
    /// No update of any start decreased the objective.
    pub monotone: bool,
}

#[derive(Debug, Clone)]
pub struct PnrResult {
    pub thetas: Vec<f64>,
    pub support: Vec<f64>,
    pub inner_points: Vec<Complex64>,
    pub argmax_states: Vec<ProductPureState>,
}

/// `(e^{−iθ}T + e^{iθ}T*)/2`.
pub fn herm_part(t: &CMatrix, theta: f64) -> HermitianOperator {
    let phase = Complex64::from_polar(1.0, -theta);
    let m = t * phase;
    HermitianOperator::symmetrized(m)
}

fn expectation(m: &CMatrix, psi: &CVector) -> Complex64 {
    psi.dotc(&(m * psi))
}

/// Columns `⊗_{i≠j} x_i ⊗ e_a ⊗ ...` for `a = 0..n_j`.
fn slot_frame(factors: &[CVector], slot: usize) -> CMatrix {
    let n = factors[slot].len();
    let total: usize = factors.iter().map(|f| f.len()).product();
    let mut frame = CMatrix::zeros(total, n);
    for a in 0..n {
        let mut col = CVector::from_element(1, Complex64::new(1.0, 0.0));
        for (i, f) in factors.iter().enumerate() {
            let piece = if i == slot {
                let mut e = CVector::zeros(n);
                e[a] = Complex64::new(1.0, 0.0);
                e
            } else {
                f.clone()
            };
            col = col.kronecker(&piece);
        }
        frame.set_column(a, &col);
    }
    frame
}

fn product_vector(factors: &[CVector]) -> CVector {
    factors
        .iter()
        .fold(CVector::from_element(1, Complex64::new(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

struct Ascent {
    value: f64,
    factors: Vec<CVector>,
    history: Vec<f64>,
    monotone: bool,
}

fn ascend(h: &CMatrix, mut factors: Vec<CVector>, opts: &AscentOptions) -> Ascent {
    let mut value = expectation(h, &product_vector(&factors)).re;
    let mut history = vec![value];
    let mut monotone = true;
    for _ in 0..opts.iters {
        let before = value;
        for slot in 0..factors.len() {
            let frame = slot_frame(&factors, slot);
            let effective = frame.adjoint() * h * &frame;
            let (values, vectors) = linalg::eigh(&effective);
            let top = values.len() - 1;
            let candidate = values[top];
            if candidate < value - MONOTONE_SLACK * (1.0 + value.abs()) {
                monotone = false;
            }
            let x = vectors.column(top).into_owned();
            factors[slot] = x.unscale(x.norm());
            value = candidate;
        }
        value = expectation(h, &product_vector(&factors)).re;
        history.push(value);
        if (value - before).abs() < opts.tol {
            break;
        }
    }
    debug_assert!(monotone, "alternating ascent decreased the objective");
    Ascent { value, factors, history, monotone }
}

/// Maximizes `tr(H ⊗x_i x_i*)` over unit `x_i`.
pub fn max_product_rayleigh(h: &HermitianOperator, shape: &TensorShape, opts: &AscentOptions) -> Result<RayleighMax> {
    max_product_rayleigh_from(h, shape, opts, &[])
}

/// As [`max_product_rayleigh`], with additional caller-supplied starting states.
pub fn max_product_rayleigh_from(
    h: &HermitianOperator,
    shape: &TensorShape,
    opts: &AscentOptions,
    extra_starts: &[ProductPureState],
) -> Result<RayleighMax> {
    if h.dim() != shape.total_dim() {
        return Err(Error::DimensionMismatch { expected: shape.total_dim(), found: h.dim() });
    }
    if opts.starts == 0 && extra_starts.is_empty() {
        return Err(Error::Configuration("at least one start is required".into()));
    }
    let mut starts: Vec<Vec<CVector>> = (0..opts.starts)
        .map(|k| ProductPureState::random(shape, &mut rng::substream(opts.seed, k as u64)).factors().to_vec())
        .collect();
    starts.extend(extra_starts.iter().map(|s| s.factors().to_vec()));

    let runs: Vec<Ascent> = starts.into_par_iter().map(|f| ascend(h.matrix(), f, opts)).collect();
    let monotone = runs.iter().all(|r| r.monotone);
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
        .expect("at least one start");
    Ok(RayleighMax {
        value: best.value,
        state: ProductPureState::new(shape.clone(), best.factors)?,
        history: best.history,
        monotone,
    })
}

/// Support function of `conv W⊗(T)` on `theta_count` uniform angles in `[0, 2π)`.
pub fn support_function(t: &CMatrix, shape: &TensorShape, theta_count: usize, opts: &AscentOptions) -> Result<PnrResult> {
    if theta_count < 4 {
        return Err(Error::Configuration(format!("need at least 4 angles, got {theta_count}")));
    }
    let n = shape.total_dim();
    if t.nrows() != n || t.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: t.nrows() });
    }
    let mut sampler = rng::substream(opts.seed, INNER_STREAM);
    let samples: Vec<ProductPureState> =
        (0..opts.inner_samples).map(|_| ProductPureState::random(shape, &mut sampler)).collect();
    let inner_points: Vec<Complex64> = samples.iter().map(|s| expectation(t, &s.vector())).collect();

    let thetas: Vec<f64> = (0..theta_count).map(|j| 2.0 * PI * j as f64 / theta_count as f64).collect();
    let per_angle: Vec<(f64, ProductPureState)> = thetas
        .par_iter()
        .map(|&theta| {
            let h = herm_part(t, theta);
            let phase = Complex64::from_polar(1.0, -theta);
            // the best inner sample seeds one extra start so h dominates the cloud
            let seed_state = inner_points
                .iter()
                .zip(&samples)
                .max_by(|(a, _), (b, _)| (phase * **a).re.total_cmp(&(phase * **b).re))
                .map(|(_, s)| s.clone());
            let extra: Vec<ProductPureState> = seed_state.into_iter().collect();
            max_product_rayleigh_from(&h, shape, opts, &extra).map(|m| (m.value, m.state))
        })
        .collect::<Result<_>>()?;
    let (support, argmax_states) = per_angle.into_iter().unzip();
    Ok(PnrResult { thetas, support, inner_points, argmax_states })
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub original: PnrResult,
    pub image: PnrResult,
    /// `max_θ |h_T(θ) − h_{Ψ*(T)}(θ)|`.
    pub deviation: f64,
}

/// Compares the support functions of `T` and of its image under the dual of
/// the automorphism (extended complex-linearly).
pub fn invariance_check(
    t: &CMatrix,
    auto: &CanonicalAutomorphism,
    theta_count: usize,
    opts: &AscentOptions,
) -> Result<InvarianceReport> {
    let dual = auto.superop()?.adjoint();
    let image_t = dual.apply_complex(t)?;
    let original = support_function(t, auto.shape(), theta_count, opts)?;
    let image = support_function(&image_t, auto.shape(), theta_count, opts)?;
    let deviation = original
        .support
        .iter()
        .zip(&image.support)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(InvarianceReport { original, image, deviation })
}
