use nalgebra::{DMatrix, DVector};
use poincare_core::galerkin::InvariantBasis;
use poincare_core::quatgroup::{binary_icosahedral, GroupTable};
use poincare_core::splitting::{
    abs_cos, eigenline_differential, lowest, lowest_eigvec_aligned, EigenBasis, SplitError, SplittingAlgebra,
    BASE_POINT, DIM_E, LAMBDA_1,
};
use poincare_core::spherepoly::{Su2Quadrature, VOL_M};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use std::sync::OnceLock;

fn group() -> &'static GroupTable {
    static G: OnceLock<GroupTable> = OnceLock::new();
    G.get_or_init(binary_icosahedral)
}

fn alg() -> &'static SplittingAlgebra {
    static A: OnceLock<SplittingAlgebra> = OnceLock::new();
    A.get_or_init(|| SplittingAlgebra::new().unwrap())
}

fn inv() -> &'static InvariantBasis {
    static B: OnceLock<InvariantBasis> = OnceLock::new();
    B.get_or_init(|| InvariantBasis::build(24, group(), &alg().basis).unwrap())
}

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit(r: &mut rand_chacha::ChaCha8Rng) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(DIM_E, |_, _| StandardNormal.sample(r));
    &v / v.norm()
}

fn random_symmetric(r: &mut rand_chacha::ChaCha8Rng) -> DMatrix<f64> {
    let m: DMatrix<f64> = DMatrix::from_fn(DIM_E, DIM_E, |_, _| StandardNormal.sample(r));
    (&m + m.transpose()) * 0.5
}

/// `B(q)` from a full (unreduced) product rule, independent of the algebra's quadrature.
fn b_full(q: impl Fn(&[f64; 4]) -> f64) -> DMatrix<f64> {
    let quad = Su2Quadrature::new(48);
    let eb = EigenBasis::new();
    let mut b = DMatrix::zeros(DIM_E, DIM_E);
    for (x, w) in quad.nodes.iter().zip(&quad.weights) {
        let phi = eb.eval(x);
        let s = -w * VOL_M * q(x);
        for i in 0..DIM_E {
            for j in 0..DIM_E {
                b[(i, j)] += s * phi[i] * phi[j];
            }
        }
    }
    b
}

#[test]
fn eigenbasis_is_orthonormal() {
    // B(1) = −Gram, so this is orthonormality of φ_i in L²(M)
    let g = b_full(|_| 1.0);
    assert!((g + DMatrix::identity(DIM_E, DIM_E)).abs().max() < 1e-12);
    let b1 = alg().splitting_matrix(|_| 1.0);
    assert!((b1 + DMatrix::identity(DIM_E, DIM_E)).abs().max() < 1e-12);
}

#[test]
fn product_space_has_dimension_sixty() {
    // the invariant functions of degree ≤ 24 are spanned by degrees 0, 12, 20, 24
    // with multiplicities 1, 13, 21, 25
    assert_eq!(alg().product.dim, 60);
    assert_eq!(alg().quad.len(), 3250);
    let sv = alg().injectivity_singular_values();
    assert_eq!(sv.len(), 60);
    assert!(sv.last().unwrap() / sv[0] > 1e-6);
}

#[test]
fn splitting_matrix_of_a_square_matches_an_independent_rule() {
    let eb = EigenBasis::new();
    let q = |x: &[f64; 4]| eb.eval(x)[0].powi(2);
    let b = alg().splitting_matrix(q);
    let oracle = b_full(q);
    assert!((b - oracle).abs().max() < 1e-10);
}

#[test]
fn seed_operator_is_minus_the_kernel_projector() {
    // fᵀA₀f = −f(o)² = −(f·K)² for every f, so A₀ = −K Kᵀ
    let (a0, _) = alg().seed_operator();
    let k = alg().reproducing_kernel();
    assert!((&a0 + &k * k.transpose()).abs().max() < 1e-9);
}

#[test]
fn rayleigh_identity_and_reproducing_property() {
    let (a0, _) = alg().seed_operator();
    let k = alg().reproducing_kernel();
    let eb = &alg().basis;
    let mut r = rng(5);
    for _ in 0..50 {
        let f = random_unit(&mut r);
        let fo = eb.function(f.as_slice()).eval(&BASE_POINT);
        assert!((f.dot(&(&a0 * &f)) + fo * fo).abs() < 1e-9);
        assert!((f.dot(&k) - fo).abs() < 1e-10);
    }
}

#[test]
fn seed_operator_lowest_line_is_the_kernel_not_the_seed() {
    // K_o has components 1/‖Re A₁‖ and −11/‖A₆‖, giving cos² = 11/25 with F₀
    let (a0, _) = alg().seed_operator();
    let (l, v, gap) = lowest(&a0);
    let k = alg().reproducing_kernel();
    assert!(abs_cos(&v, &k) > 1.0 - 1e-12);
    assert!((l + k.norm_squared()).abs() < 1e-9);
    assert!(gap > 0.0);
    let c = abs_cos(&v, &EigenBasis::seed_coords());
    assert!((c * c - 11.0 / 25.0).abs() < 1e-10, "cos² = {}", c * c);
}

#[test]
fn fiber_average_operator_has_the_seed_as_lowest_line() {
    // fiber rotation acts on E with weights 12 − 2j; F₀ is the only weight-zero vector
    let (ac, _) = alg().fiber_average_operator();
    let f0 = EigenBasis::seed_coords();
    let r = &ac * &f0;
    let rq = f0.dot(&r);
    assert!((&r - &f0 * rq).norm() < 1e-10);
    let (l, v, gap) = lowest(&ac);
    assert!((l - rq).abs() < 1e-10);
    assert!(abs_cos(&v, &f0) > 1.0 - 1e-12);
    assert!(gap > 1.0);
}

#[test]
fn eigenline_differential_vanishes_on_trivial_directions() {
    let (ac, _) = alg().fiber_average_operator();
    let d = eigenline_differential(&ac, &ac).unwrap();
    assert!(d.norm() < 1e-12);
    let d = eigenline_differential(&ac, &DMatrix::identity(DIM_E, DIM_E)).unwrap();
    assert!(d.norm() < 1e-12);
}

#[test]
fn eigenline_differential_matches_finite_differences() {
    let (ac, _) = alg().fiber_average_operator();
    let mut r = rng(9);
    let h = random_symmetric(&mut r);
    // the differential is taken at the representative returned by `lowest`
    let (_, v0, _) = lowest(&ac);
    let d = eigenline_differential(&ac, &h).unwrap();
    let err = |t: f64| {
        let vt = lowest_eigvec_aligned(&(&ac + &h * t), &v0);
        (&vt - &v0 - &d * t).norm()
    };
    // the remainder is second order: halving t divides it by about four
    let (e1, e2) = (err(1e-3), err(5e-4));
    assert!(e1 < 1e-4);
    assert!((e1 / e2 - 4.0).abs() < 0.2, "ratio {}", e1 / e2);
}

#[test]
fn eigenline_differential_rejects_a_degenerate_bottom() {
    let a = -DMatrix::<f64>::identity(DIM_E, DIM_E);
    assert!(matches!(eigenline_differential(&a, &a), Err(SplitError::NotSimple(_))));
    assert!(matches!(alg().submersion_rank(&a), Err(SplitError::NotSimple(_))));
}

#[test]
fn submersion_has_full_rank_and_is_adjoint_to_multiplication() {
    for (a, _) in [alg().seed_operator(), alg().fiber_average_operator()] {
        let (rank, sv) = alg().submersion_rank(&a).unwrap();
        assert_eq!(rank, 12);
        let (_, v, _) = lowest(&a);
        let mult = alg().multiplication_singular_values(&v);
        assert_eq!(mult.len(), 12);
        for (s, m) in sv.iter().zip(&mult) {
            assert!((s - m).abs() < 1e-9 * sv[0], "{s} vs {m}");
        }
    }
    assert!(alg().kernel_multiplication_margin() > 0.0);
}

#[test]
fn minus_identity_comes_from_a_constant_factor() {
    // B(1) = −I and q = 2λρ for constant ρ, so ρ = 1/(2λ) = 1/336
    let a = -DMatrix::<f64>::identity(DIM_E, DIM_E);
    let f = alg().realize_conformal_factor(&a, inv()).unwrap();
    assert!((f.coeffs[0] - VOL_M.sqrt() / (2.0 * LAMBDA_1)).abs() < 1e-12);
    assert!(f.coeffs[1..].iter().all(|c| c.abs() < 1e-10));
    assert!(f.round_trip_error < 1e-10);
}

#[test]
fn realizable_operators_round_trip() {
    let mut r = rng(13);
    for _ in 0..3 {
        let c: Vec<f64> = (0..alg().product.dim).map(|_| StandardNormal.sample(&mut r)).collect();
        let a = alg().b_of_coords(&c);
        let f = alg().realize_conformal_factor(&a, inv()).unwrap();
        assert!(f.round_trip_error < 1e-9 * a.norm(), "{}", f.round_trip_error);
    }
}

#[test]
fn generic_symmetric_matrix_is_not_realizable() {
    // 𝓑 has dimension 60 inside the 91-dimensional symmetric matrices
    let a = random_symmetric(&mut rng(17));
    assert!(matches!(alg().realize_conformal_factor(&a, inv()), Err(SplitError::NotRealizable(_))));
}

#[test]
fn line_realization_of_the_seed_from_the_fiber_average_takes_no_step() {
    let (ac, _) = alg().fiber_average_operator();
    let lr = alg().line_realization(&EigenBasis::seed_coords(), &ac, 0.2).unwrap();
    assert_eq!(lr.steps, 0);
    assert!(lr.alignment_error < 1e-12);
    assert!(lr.delta_coords.iter().all(|c| *c == 0.0));
}

#[test]
fn line_realization_of_psi() {
    let (ac, _) = alg().fiber_average_operator();
    let t = EigenBasis::psi_coords(1e-2, 1e-2, 1e-2);
    let lr = alg().line_realization(&t, &ac, 0.2).unwrap();
    assert_eq!(lr.steps, 1);
    assert!(lr.alignment_error < 1e-10);
    assert!(lr.gap > 0.0);
    // the realized operator is in 𝓑: it inverts to a factor with a small round trip
    let f = alg().realize_conformal_factor(&lr.operator, inv()).unwrap();
    assert!(f.round_trip_error < 1e-9 * lr.operator.norm());
}

#[test]
fn line_realization_refuses_far_targets() {
    let (ac, _) = alg().fiber_average_operator();
    let mut t = DVector::zeros(DIM_E);
    t[0] = 1.0;
    assert!(matches!(alg().line_realization(&t, &ac, 0.2), Err(SplitError::OutOfChart(_, _))));
}

fn arb_coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, DIM_E)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn splitting_map_is_linear_and_symmetric(c1 in arb_coeffs(), c2 in arb_coeffs(), s in -3.0f64..3.0) {
        let eb = &alg().basis;
        let (f1, f2) = (eb.function(&c1), eb.function(&c2));
        let b1 = alg().splitting_matrix(|x| f1.eval(x).powi(2));
        let b2 = alg().splitting_matrix(|x| f2.eval(x).powi(2));
        let b12 = alg().splitting_matrix(|x| f1.eval(x).powi(2) + s * f2.eval(x).powi(2));
        prop_assert!((&b12 - &b1 - &b2 * s).abs().max() < 1e-10 * (1.0 + b12.abs().max()));
        prop_assert!((&b12 - b12.transpose()).abs().max() == 0.0);
    }

    #[test]
    fn eigenbasis_round_trips_through_weights(c in arb_coeffs(), x in prop::array::uniform4(-1.0f64..1.0)) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(r > 0.1);
        let x = x.map(|v| v / r);
        let phi = alg().basis.eval(&x);
        let direct: f64 = phi.iter().zip(&c).map(|(p, q)| p * q).sum();
        prop_assert!((alg().basis.function(&c).eval(&x) - direct).abs() < 1e-11);
    }
}
