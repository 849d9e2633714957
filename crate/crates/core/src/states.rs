//! Pure, product and separable states; PPT tests; the inscribed separable ball.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::hermitian::{HermitianOperator, PSD_TOL};
use crate::linalg::{complex_gaussian, CVector};
use crate::rng;
use crate::tensor::{self, CMatrix, TensorShape};

/// Default purity slack for [`is_pure_product`].
pub const DEFAULT_PURITY_TOL: f64 = 1e-9;
/// Partial transposes with a smallest eigenvalue at or above `-PPT_TOL` count as positive.
pub const PPT_TOL: f64 = 1e-10;
/// Unit-norm tolerance for factors of a [`ProductPureState`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

const BALL_SELF_CHECK_DIRECTIONS: usize = 1000;
const BALL_SELF_CHECK_SEED: u64 = 0x5eb1_ba11;

/// Unit vector drawn from the unitarily invariant distribution on `C^n`.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let norm = v.norm();
        if norm > 1e-300 {
            return v.unscale(norm);
        }
    }
}

pub fn random_pure_seeded(n: usize, seed: u64) -> CVector {
    random_pure(n, &mut rng::seeded(seed))
}

/// `⊗ x_i x_i*` with one unit vector per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductPureState {
    shape: TensorShape,
    factors: Vec<CVector>,
}

impl ProductPureState {
    pub fn new(shape: TensorShape, factors: Vec<CVector>) -> Result<Self> {
        if factors.len() != shape.num_factors() {
            return Err(Error::DimensionMismatch { expected: shape.num_factors(), found: factors.len() });
        }
        for (slot, f) in factors.iter().enumerate() {
            if f.len() != shape.dim(slot) {
                return Err(Error::DimensionMismatch { expected: shape.dim(slot), found: f.len() });
            }
            if (f.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::Configuration(format!(
                    "factor {slot} has norm {} instead of 1",
                    f.norm()
                )));
            }
        }
        Ok(Self { shape, factors })
    }

    /// Standard basis product `e_{i_0} ⊗ ... ⊗ e_{i_{k-1}}`.
    pub fn basis(shape: TensorShape, digits: &[usize]) -> Result<Self> {
        let factors = digits
            .iter()
            .zip(shape.dims())
            .map(|(&d, &n)| {
                let mut v = CVector::zeros(n);
                v[d] = Complex64::new(1.0, 0.0);
                v
            })
            .collect();
        Self::new(shape, factors)
    }

    pub fn random<R: Rng + ?Sized>(shape: &TensorShape, rng: &mut R) -> Self {
        let factors = shape.dims().iter().map(|&n| random_pure(n, rng)).collect();
        Self { shape: shape.clone(), factors }
    }

    pub fn random_seeded(shape: &TensorShape, seed: u64) -> Self {
        Self::random(shape, &mut rng::seeded(seed))
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn factors(&self) -> &[CVector] {
        &self.factors
    }

    /// The composite vector `⊗ x_i`.
    pub fn vector(&self) -> CVector {
        let mats: Vec<CMatrix> = self
            .factors
            .iter()
            .map(|f| CMatrix::from_column_slice(f.len(), 1, f.as_slice()))
            .collect();
        let v = tensor::kron_all(&mats);
        CVector::from_column_slice(v.as_slice())
    }

    pub fn projector(&self) -> HermitianOperator {
        HermitianOperator::outer(&self.vector())
    }
}

/// A convex combination of product pure states; its own separability certificate.
#[derive(Debug, Clone)]
pub struct SeparableEnsemble {
    shape: TensorShape,
    weights: Vec<f64>,
    points: Vec<ProductPureState>,
}

impl SeparableEnsemble {
    pub fn new(shape: TensorShape, weights: Vec<f64>, points: Vec<ProductPureState>) -> Result<Self> {
        if weights.len() != points.len() || weights.is_empty() {
            return Err(Error::Configuration(format!(
                "{} weights for {} points",
                weights.len(),
                points.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::Configuration("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Configuration(format!("weights sum to {total}, not 1")));
        }
        if let Some(p) = points.iter().find(|p| p.shape() != &shape) {
            return Err(Error::InvalidShape(format!("point on {} in ensemble on {shape}", p.shape())));
        }
        Ok(Self { shape, weights, points })
    }

    pub fn random<R: Rng + ?Sized>(shape: &TensorShape, count: usize, rng: &mut R) -> Self {
        let raw: Vec<f64> = (0..count.max(1)).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = raw.iter().sum();
        let weights = raw.iter().map(|w| w / total).collect();
        let points = (0..count.max(1)).map(|_| ProductPureState::random(shape, rng)).collect();
        Self { shape: shape.clone(), weights, points }
    }

    pub fn shape(&self) -> &TensorShape {
        &self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn points(&self) -> &[ProductPureState] {
        &self.points
    }

    pub fn mixture(&self) -> HermitianOperator {
        let n = self.shape.total_dim();
        self.weights
            .iter()
            .zip(&self.points)
            .fold(HermitianOperator::zeros(n), |acc, (&w, p)| &acc + &p.projector().scale(w))
    }
}

/// Why an operator failed [`is_pure_product`].
#[derive(Debug, Clone, PartialEq)]
pub enum PurityFailure {
    NotDensity { trace: f64, min_eigenvalue: f64 },
    GlobalPurity(f64),
    SlotPurity { slot: usize, purity: f64 },
}

impl fmt::Display for PurityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PurityFailure::NotDensity { trace, min_eigenvalue } => {
                write!(f, "not a density operator (trace {trace:.6}, min eigenvalue {min_eigenvalue:.3e})")
            }
            PurityFailure::GlobalPurity(p) => write!(f, "global purity {p:.6}"),
            PurityFailure::SlotPurity { slot, purity } => write!(f, "slot {slot} purity {purity:.6}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityDiagnosis {
    pub global_purity: f64,
    pub slot_purities: Vec<f64>,
    pub failure: Option<PurityFailure>,
}

impl PurityDiagnosis {
    pub fn is_pure_product(&self) -> bool {
        self.failure.is_none()
    }
}

/// Recognizes `⊗ P_{n_i}`: a pure density operator whose every single-slot
/// marginal is pure.
pub fn is_pure_product(x: &HermitianOperator, shape: &TensorShape, tol: f64) -> Result<PurityDiagnosis> {
    if x.dim() != shape.total_dim() {
        return Err(Error::DimensionMismatch { expected: shape.total_dim(), found: x.dim() });
    }
    let global_purity = x.purity();
    let slot_purities = (0..shape.num_factors())
        .map(|r| x.partial_trace(shape, &[r]).map(|m| m.purity()))
        .collect::<Result<Vec<_>>>()?;
    let failure = if !x.is_density() {
        Some(PurityFailure::NotDensity { trace: x.trace(), min_eigenvalue: x.min_eigenvalue() })
    } else if global_purity < 1.0 - tol {
        Some(PurityFailure::GlobalPurity(global_purity))
    } else {
        slot_purities
            .iter()
            .enumerate()
            .find(|(_, &p)| p < 1.0 - tol)
            .map(|(slot, &purity)| PurityFailure::SlotPurity { slot, purity })
    };
    Ok(PurityDiagnosis { global_purity, slot_purities, failure })
}

fn require_density(x: &HermitianOperator, shape: &TensorShape) -> Result<()> {
    if x.dim() != shape.total_dim() {
        return Err(Error::DimensionMismatch { expected: shape.total_dim(), found: x.dim() });
    }
    if !x.is_density() {
        return Err(Error::NotDensity(format!(
            "trace {:.12}, min eigenvalue {:.3e}",
            x.trace(),
            x.min_eigenvalue()
        )));
    }
    Ok(())
}

/// Smallest eigenvalue of the partial transpose on each single slot.
pub fn ppt_check(x: &HermitianOperator, shape: &TensorShape) -> Result<Vec<f64>> {
    require_density(x, shape)?;
    (0..shape.num_factors())
        .map(|s| x.partial_transpose(shape, &[s]).map(|pt| pt.min_eigenvalue()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparabilityVerdict {
    Separable,
    Entangled,
    Inconclusive,
}

impl fmt::Display for SeparabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeparabilityVerdict::Separable => "separable",
            SeparabilityVerdict::Entangled => "entangled",
            SeparabilityVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PptDecision {
    pub verdict: SeparabilityVerdict,
    pub min_eigenvalues: Vec<f64>,
}

impl PptDecision {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Whether PPT is equivalent to separability on this shape (2⊗2, 2⊗3, 3⊗2).
pub fn ppt_is_exact(shape: &TensorShape) -> bool {
    matches!(shape.dims(), [2, 2] | [2, 3] | [3, 2])
}

/// Exact separability decision for the shapes where PPT is sufficient.
pub fn ppt_separable_exact(x: &HermitianOperator, shape: &TensorShape) -> Result<PptDecision> {
    if !ppt_is_exact(shape) {
        return Err(Error::UnsupportedShape(format!(
            "PPT decides separability only on 2x2, 2x3 and 3x2, not {shape}"
        )));
    }
    ppt_verdict(x, shape)
}

/// PPT verdict on any shape: entangled when a partial transpose is not
/// positive, separable only where PPT is exact, inconclusive otherwise.
pub fn ppt_verdict(x: &HermitianOperator, shape: &TensorShape) -> Result<PptDecision> {
    let min_eigenvalues = ppt_check(x, shape)?;
    let positive = min_eigenvalues.iter().all(|&v| v >= -PPT_TOL);
    let verdict = match (positive, ppt_is_exact(shape)) {
        (false, _) => SeparabilityVerdict::Entangled,
        (true, true) => SeparabilityVerdict::Separable,
        (true, false) => SeparabilityVerdict::Inconclusive,
    };
    Ok(PptDecision { verdict, min_eigenvalues })
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2` on two qubits.
pub fn bell_projector() -> HermitianOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let zero = Complex64::new(0.0, 0.0);
    let v = CVector::from_vec(vec![Complex64::new(s, 0.0), zero, zero, Complex64::new(s, 0.0)]);
    HermitianOperator::outer(&v)
}

/// Traceless Hermitian direction of unit Frobenius norm.
pub fn random_traceless_direction<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let g = CMatrix::from_fn(n, n, |_, _| complex_gaussian(rng));
    let h = HermitianOperator::symmetrized(g);
    let centered = &h - &HermitianOperator::identity(n).scale(h.trace() / n as f64);
    let norm = centered.frobenius_norm();
    centered.scale(1.0 / norm)
}

fn ball_cache() -> &'static Mutex<HashMap<Vec<usize>, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<usize>, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Radius of a Frobenius ball around `I_N/N` made of separable states:
/// `1/√(N(N−1))`, halved for every factor beyond the second.
///
/// Each radius is validated once per shape by a Monte-Carlo PPT self-check
/// before it is returned.
pub fn inscribed_ball_radius(shape: &TensorShape) -> Result<f64> {
    if let Some(&r) = ball_cache().lock().expect("ball cache poisoned").get(shape.dims()) {
        return Ok(r);
    }
    let n = shape.total_dim() as f64;
    let extra = shape.num_factors().saturating_sub(2) as i32;
    let r = 1.0 / (n * (n - 1.0)).sqrt() / 2f64.powi(extra);
    ball_self_check(shape, r)?;
    ball_cache().lock().expect("ball cache poisoned").insert(shape.dims().to_vec(), r);
    Ok(r)
}

fn ball_self_check(shape: &TensorShape, r: f64) -> Result<()> {
    let n = shape.total_dim();
    let center = HermitianOperator::maximally_mixed(n);
    let mut rng = rng::seeded(BALL_SELF_CHECK_SEED);
    for trial in 0..BALL_SELF_CHECK_DIRECTIONS {
        let d = random_traceless_direction(n, &mut rng);
        let x = &center + &d.scale(r);
        if x.min_eigenvalue() < -PSD_TOL {
            return Err(Error::Configuration(format!(
                "ball radius {r:.6e} on {shape} leaves the state space (direction {trial})"
            )));
        }
        let mins = ppt_check(&x, shape)?;
        if let Some((slot, v)) = mins.iter().enumerate().find(|(_, &v)| v < -PPT_TOL) {
            return Err(Error::Configuration(format!(
                "ball radius {r:.6e} on {shape} fails PPT on slot {slot} (eigenvalue {v:.3e})"
            )));
        }
    }
    Ok(())
}

/// `‖X − I/N‖_F ≤ r(shape)`: a sufficient condition for separability.
pub fn in_inscribed_ball(x: &HermitianOperator, shape: &TensorShape) -> Result<bool> {
    if x.dim() != shape.total_dim() {
        return Err(Error::DimensionMismatch { expected: shape.total_dim(), found: x.dim() });
    }
    let r = inscribed_ball_radius(shape)?;
    let centered = x - &HermitianOperator::maximally_mixed(shape.total_dim());
    Ok((x.trace() - 1.0).abs() <= crate::hermitian::TRACE_TOL && centered.frobenius_norm() <= r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(d: &[usize]) -> TensorShape {
        TensorShape::new(d.to_vec()).unwrap()
    }

    #[test]
    fn random_pure_is_unit_and_deterministic() {
        let v = random_pure_seeded(1, 5);
        assert!((v[0].norm() - 1.0).abs() < 1e-15);
        assert_eq!(random_pure_seeded(4, 17), random_pure_seeded(4, 17));
        assert_ne!(random_pure_seeded(4, 17), random_pure_seeded(4, 18));
    }

    #[test]
    fn random_pure_mean_projector_is_maximally_mixed() {
        let mut rng = rng::seeded(2024);
        let mut acc = CMatrix::zeros(4, 4);
        let draws = 10_000;
        for _ in 0..draws {
            let v = random_pure(4, &mut rng);
            acc += &v * v.adjoint();
        }
        let mean = acc.unscale(draws as f64);
        assert!((mean - CMatrix::identity(4, 4).scale(0.25)).norm() < 0.02);
    }

    #[test]
    fn random_product_mean_is_maximally_mixed() {
        let s = shape(&[2, 2]);
        let mut rng = rng::seeded(77);
        let mut acc = CMatrix::zeros(4, 4);
        for _ in 0..10_000 {
            acc += ProductPureState::random(&s, &mut rng).projector().matrix();
        }
        let mean = acc.unscale(10_000.0);
        assert!((mean - CMatrix::identity(4, 4).scale(0.25)).norm() < 0.02);
    }

    #[test]
    fn random_product_structure() {
        let single = ProductPureState::random_seeded(&shape(&[2]), 3).projector();
        let eig = single.eigenvalues();
        assert!(eig[0].abs() < 1e-12 && (eig[1] - 1.0).abs() < 1e-12);
        let s = shape(&[2, 2]);
        let p = ProductPureState::random_seeded(&s, 4).projector();
        for r in 0..2 {
            assert!((p.partial_trace(&s, &[r]).unwrap().purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_product_recognition() {
        let s = shape(&[2, 2]);
        let e = ProductPureState::basis(s.clone(), &[0, 0]).unwrap().projector();
        assert!(is_pure_product(&e, &s, DEFAULT_PURITY_TOL).unwrap().is_pure_product());

        // partial-trace oracle: tr_2 |Φ+⟩⟨Φ+| = I/2, purity 1/2
        let bell = is_pure_product(&bell_projector(), &s, DEFAULT_PURITY_TOL).unwrap();
        match bell.failure {
            Some(PurityFailure::SlotPurity { slot: 0, purity }) => assert!((purity - 0.5).abs() < 1e-12),
            other => panic!("unexpected diagnosis {other:?}"),
        }

        let mixed = is_pure_product(&HermitianOperator::maximally_mixed(4), &s, DEFAULT_PURITY_TOL).unwrap();
        match mixed.failure {
            Some(PurityFailure::GlobalPurity(p)) => assert!((p - 0.25).abs() < 1e-12),
            other => panic!("unexpected diagnosis {other:?}"),
        }
        assert!(is_pure_product(&HermitianOperator::maximally_mixed(3), &s, 1e-9).is_err());
    }

    #[test]
    fn product_states_are_ppt() {
        for (k, dims) in [[2, 2], [2, 3], [3, 3]].iter().enumerate() {
            let s = shape(dims);
            let p = ProductPureState::random_seeded(&s, k as u64).projector();
            assert!(ppt_check(&p, &s).unwrap().iter().all(|&v| v >= -PPT_TOL));
        }
    }

    #[test]
    fn bell_is_entangled() {
        let s = shape(&[2, 2]);
        let d = ppt_separable_exact(&bell_projector(), &s).unwrap();
        assert_eq!(d.verdict, SeparabilityVerdict::Entangled);
        assert!((d.min_eigenvalue() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let s = shape(&[2, 2]);
        let pt = bell_projector().partial_transpose(&s, &[1]).unwrap();
        let eig = pt.eigenvalues();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_is_separable() {
        let s = shape(&[2, 3]);
        let d = ppt_separable_exact(&HermitianOperator::maximally_mixed(6), &s).unwrap();
        assert_eq!(d.verdict, SeparabilityVerdict::Separable);
    }

    #[test]
    fn exact_ppt_refuses_large_shapes() {
        let s = shape(&[3, 3]);
        let x = HermitianOperator::maximally_mixed(9);
        assert!(matches!(ppt_separable_exact(&x, &s), Err(Error::UnsupportedShape(_))));
        assert_eq!(ppt_verdict(&x, &s).unwrap().verdict, SeparabilityVerdict::Inconclusive);
        assert!(matches!(
            ppt_check(&HermitianOperator::identity(9), &s),
            Err(Error::NotDensity(_))
        ));
    }

    #[test]
    fn ball_radius_two_qubits() {
        let s = shape(&[2, 2]);
        let r = inscribed_ball_radius(&s).unwrap();
        assert!((r - 1.0 / 12f64.sqrt()).abs() < 1e-15);
        assert!(in_inscribed_ball(&HermitianOperator::maximally_mixed(4), &s).unwrap());

        let e00 = ProductPureState::basis(s.clone(), &[0, 0]).unwrap().projector();
        let e11 = ProductPureState::basis(s.clone(), &[1, 1]).unwrap().projector();
        let d = (&e00 - &e11).scale(std::f64::consts::FRAC_1_SQRT_2);
        let x = &HermitianOperator::maximally_mixed(4) + &d.scale(r);
        assert!(ppt_check(&x, &s).unwrap().iter().all(|&v| v >= -PPT_TOL));
        assert!(in_inscribed_ball(&x, &s).unwrap());
    }

    #[test]
    fn ball_radius_shrinks_with_factors() {
        let r = inscribed_ball_radius(&shape(&[2, 2, 2])).unwrap();
        assert!((r - 1.0 / 56f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ensemble_mixtures_are_ppt() {
        let s = shape(&[2, 3]);
        let mut rng = rng::seeded(8);
        for _ in 0..50 {
            let e = SeparableEnsemble::random(&s, 4, &mut rng);
            let d = ppt_separable_exact(&e.mixture(), &s).unwrap();
            assert_eq!(d.verdict, SeparabilityVerdict::Separable);
        }
    }

    #[test]
    fn ensemble_validates_weights() {
        let s = shape(&[2, 2]);
        let p = ProductPureState::random_seeded(&s, 1);
        assert!(SeparableEnsemble::new(s.clone(), vec![0.5], vec![p.clone()]).is_err());
        assert!(SeparableEnsemble::new(s.clone(), vec![1.0], vec![p]).is_ok());
    }

    #[test]
    fn purity_invariant_under_factor_permutation() {
        let s = shape(&[2, 3, 2]);
        let perm = [2, 0, 1];
        let p = ProductPureState::random_seeded(&s, 12).projector();
        let (q, qs) = p.permute_factors(&s, &perm).unwrap();
        assert!(is_pure_product(&q, &qs, DEFAULT_PURITY_TOL).unwrap().is_pure_product());
        let bell = HermitianOperator::kron(&bell_projector(), &HermitianOperator::basis_projector(3, 0));
        let s2 = shape(&[2, 2, 3]);
        let (q, qs) = bell.permute_factors(&s2, &perm).unwrap();
        assert!(!is_pure_product(&q, &qs, DEFAULT_PURITY_TOL).unwrap().is_pure_product());
    }
}
