use nalgebra::DMatrix;
use proptest::prelude::*;
use sepauto::linalg::complex_gaussian;
use sepauto::rng::{self, SeededRng};
use sepauto::states::{is_pure_product, ProductPureState};
use sepauto::superop::CanonicalAutomorphism;
use sepauto::tensor::{embed, kron, partial_trace, partial_transpose};
use sepauto::{CMatrix, HermitianOperator, TensorShape};

const SHAPES: &[&[usize]] = &[&[2], &[3], &[2, 2], &[2, 3], &[3, 2], &[2, 2, 2], &[2, 3, 2]];

fn shape_strategy() -> impl Strategy<Value = TensorShape> {
    prop::sample::select(SHAPES).prop_map(|d| TensorShape::new(d.to_vec()).unwrap())
}

fn ginibre(n: usize, r: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| complex_gaussian(r))
}

fn hermitian(n: usize, r: &mut SeededRng) -> HermitianOperator {
    let g = ginibre(n, r);
    HermitianOperator::new((&g + g.adjoint()).scale(0.5)).unwrap()
}

fn hs(a: &CMatrix, b: &CMatrix) -> num_complex::Complex64 {
    (a.adjoint() * b).trace()
}

fn subsets(k: usize) -> Vec<Vec<usize>> {
    (1..(1usize << k)).map(|mask| (0..k).filter(|i| mask >> i & 1 == 1).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_trace_is_adjoint_of_embedding(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let n = shape.total_dim();
        let x = ginibre(n, &mut r);
        for keep in subsets(shape.num_factors()) {
            let m: usize = keep.iter().map(|&s| shape.dim(s)).product();
            let y = ginibre(m, &mut r);
            let lhs = hs(&partial_trace(&x, &shape, &keep).unwrap(), &y);
            let rhs = hs(&x, &embed(&y, &shape, &keep).unwrap());
            prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn partial_trace_preserves_trace(shape in shape_strategy(), seed in any::<u64>()) {
        let x = ginibre(shape.total_dim(), &mut rng::seeded(seed));
        for keep in subsets(shape.num_factors()) {
            let t = partial_trace(&x, &shape, &keep).unwrap().trace();
            prop_assert!((t - x.trace()).norm() < 1e-10);
        }
    }

    #[test]
    fn partial_transpose_is_an_isometric_involution(shape in shape_strategy(), seed in any::<u64>()) {
        let x = ginibre(shape.total_dim(), &mut rng::seeded(seed));
        for slots in subsets(shape.num_factors()) {
            let once = partial_transpose(&x, &shape, &slots).unwrap();
            let twice = partial_transpose(&once, &shape, &slots).unwrap();
            prop_assert_eq!(&twice, &x);
            prop_assert!((once.norm() - x.norm()).abs() < 1e-12 * x.norm());
        }
    }

    #[test]
    fn full_partial_transpose_is_transpose(shape in shape_strategy(), seed in any::<u64>()) {
        let x = ginibre(shape.total_dim(), &mut rng::seeded(seed));
        let all: Vec<usize> = (0..shape.num_factors()).collect();
        prop_assert_eq!(partial_transpose(&x, &shape, &all).unwrap(), x.transpose());
    }

    #[test]
    fn kron_is_associative(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, c in 1usize..4) {
        let mut r = rng::seeded(seed);
        let (x, y, z) = (ginibre(a, &mut r), ginibre(b, &mut r), ginibre(c, &mut r));
        let left = kron(&kron(&x, &y), &z);
        let right = kron(&x, &kron(&y, &z));
        prop_assert!((left - right).norm() < 1e-12);
    }

    #[test]
    fn coordinates_round_trip_and_preserve_inner_products(n in 1usize..6, seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let (x, y) = (hermitian(n, &mut r), hermitian(n, &mut r));
        let (cx, cy) = (x.to_coords(), y.to_coords());
        let back = HermitianOperator::from_coords(n, cx.as_slice()).unwrap();
        prop_assert!((back.matrix() - x.matrix()).norm() < 1e-12 * (1.0 + x.frobenius_norm()));
        prop_assert!((cx.dot(&cy) - x.inner(&y)).abs() < 1e-10 * (1.0 + x.frobenius_norm() * y.frobenius_norm()));
    }

    #[test]
    fn superop_is_a_homomorphism(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let a = CanonicalAutomorphism::random(&shape, &mut r);
        let b = CanonicalAutomorphism::random(&shape, &mut r);
        let lhs = a.compose(&b).unwrap().superop().unwrap();
        let rhs = a.superop().unwrap().compose(&b.superop().unwrap()).unwrap();
        prop_assert!(lhs.distance(&rhs) < 1e-9);
    }

    #[test]
    fn superop_is_orthogonal_and_adjoint_is_inverse(shape in shape_strategy(), seed in any::<u64>()) {
        let a = CanonicalAutomorphism::random(&shape, &mut rng::seeded(seed));
        let s = a.superop().unwrap();
        let d = s.matrix().nrows();
        prop_assert!((s.matrix().transpose() * s.matrix() - DMatrix::<f64>::identity(d, d)).norm() < 1e-9);
        prop_assert!(s.adjoint().distance(&a.inverse().superop().unwrap()) < 1e-9);
        prop_assert!(s.is_trace_preserving(1e-10));
    }

    #[test]
    fn apply_matches_superop_action(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let a = CanonicalAutomorphism::random(&shape, &mut r);
        let x = hermitian(shape.total_dim(), &mut r);
        let direct = a.apply(&x).unwrap();
        let via = a.superop().unwrap().apply(&x).unwrap();
        prop_assert!((direct.matrix() - via.matrix()).norm() < 1e-10 * (1.0 + x.frobenius_norm()));
    }

    #[test]
    fn product_pure_states_stay_product_pure(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let a = CanonicalAutomorphism::random(&shape, &mut r);
        let state = ProductPureState::random(&shape, &mut r);
        let image = a.apply(&state.projector()).unwrap();
        prop_assert!(is_pure_product(&image, &shape, 1e-9).unwrap().is_pure_product());
    }

    #[test]
    fn untransposed_automorphisms_preserve_spectrum(shape in shape_strategy(), seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let a = CanonicalAutomorphism::random(&shape, &mut r);
        let a = CanonicalAutomorphism::new(shape.clone(), a.perm().to_vec(), a.unitaries().to_vec(), vec![false; shape.num_factors()]).unwrap();
        let x = hermitian(shape.total_dim(), &mut r);
        let (ex, ey) = (x.eigenvalues(), a.apply(&x).unwrap().eigenvalues());
        for (p, q) in ex.iter().zip(&ey) {
            prop_assert!((p - q).abs() < 1e-10 * (1.0 + p.abs()));
        }
    }
}
