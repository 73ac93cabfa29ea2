use num_traits::Zero;
use poincare_core::binform::coefficients_a;
use poincare_core::exactnum::{rat, Rational, Real, RealScalar, Ring};
use poincare_core::quatgroup::{hopf, QuatF};
use poincare_core::spherepoly::{
    frame_rotation, harmonic_correction, harmonic_projection, hopf_lift, icosahedral_sextic, monomial_sphere_mean,
    rotate, seed_polynomial_exact, seed_to_a6_ratio, sphere_area, sphere_laplacian_eigencheck, Poly, Su2Quadrature,
    VOL_M,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

fn random_sphere_points<const D: usize>(n: usize, seed: u64) -> Vec<[f64; D]> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let x: [f64; D] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.map(|v| v / r)
        })
        .collect()
}

#[test]
fn monomial_means_on_spheres() {
    // mean x² = 1/dim; mean x⁴ = 3/(dim(dim+2)); mean x²y² = 1/(dim(dim+2))
    assert_eq!(monomial_sphere_mean(3, &[2, 0, 0, 0]), rat(1, 3));
    assert_eq!(monomial_sphere_mean(4, &[2, 0, 0, 0]), rat(1, 4));
    assert_eq!(monomial_sphere_mean(4, &[4, 0, 0, 0]), rat(1, 8));
    assert_eq!(monomial_sphere_mean(4, &[2, 2, 0, 0]), rat(1, 24));
    assert_eq!(monomial_sphere_mean(3, &[2, 2, 0, 0]), rat(1, 15));
    assert_eq!(monomial_sphere_mean(3, &[1, 1, 0, 0]), Rational::zero());
}

#[test]
fn sphere_areas_and_volume() {
    assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-15);
    assert!((VOL_M * 120.0 - sphere_area(4)).abs() < 1e-14);
}

#[test]
fn laplacian_of_radial_powers() {
    for dim in [3usize, 4] {
        for k in 1..6u32 {
            let n = 2 * k as i64;
            let lhs = Poly::<Rational>::norm_sq(dim).pow(k).euclidean_laplacian();
            let rhs = Poly::<Rational>::norm_sq(dim).pow(k - 1).scale(&rat(n * (n + dim as i64 - 2), 1));
            assert_eq!(lhs, rhs, "dim {dim}, |x|^{n}");
        }
    }
}

#[test]
fn corrected_sextic_is_harmonic_with_zero_mean() {
    let corr = harmonic_correction(&icosahedral_sextic()).unwrap();
    assert!(corr.corrected.euclidean_laplacian().is_zero());
    assert!(corr.corrected.sphere_mean().is_zero());
    // so the correction constant is minus the mean of P; check by sampling
    let p = icosahedral_sextic().to_f64_poly();
    let pts = random_sphere_points::<3>(400_000, 1);
    let mc = pts.iter().map(|x| p.eval_f64(x)).sum::<f64>() / pts.len() as f64;
    let c = corr.c.to_f64();
    assert!((mc + c).abs() < 5e-3 * c.abs().max(1e-3), "{mc} vs {}", -c);
}

#[test]
fn sextic_has_the_tetrahedral_symmetries_of_its_frame() {
    let p = icosahedral_sextic();
    let cyc = [[Real::zero(), Real::from_int(1), Real::zero()], [Real::zero(), Real::zero(), Real::from_int(1)], [
        Real::from_int(1),
        Real::zero(),
        Real::zero(),
    ]];
    assert_eq!(rotate(&p, &cyc), p);
    let flip = [[Real::from_int(-1), Real::zero(), Real::zero()], [Real::zero(), Real::from_int(1), Real::zero()], [
        Real::zero(),
        Real::zero(),
        Real::from_int(1),
    ]];
    assert_eq!(rotate(&p, &flip), p);
}

#[test]
fn frame_rotation_is_orthogonal() {
    let r = frame_rotation();
    for i in 0..3 {
        for j in 0..3 {
            let d = (0..3).fold(Real::zero(), |acc, k| acc + r[k][i].clone() * r[k][j].clone());
            assert_eq!(d, if i == j { Real::from_int(1) } else { Real::zero() });
        }
    }
}

#[test]
fn seed_is_a_degree_twelve_eigenfunction_and_a_negative_multiple_of_a6() {
    let f = seed_polynomial_exact();
    assert!(f.is_homogeneous());
    assert_eq!(f.degree(), 12);
    assert!(sphere_laplacian_eigencheck(&f, 12).unwrap());
    let r = seed_to_a6_ratio().expect("seed is proportional to Re A6");
    assert!(r.to_f64() < 0.0);
    // pointwise check against the coefficient function
    let ff = f.to_f64_poly();
    for x in random_sphere_points::<4>(20, 2) {
        let a6 = coefficients_a(&QuatF::from_array(x))[6].re;
        assert!((ff.eval_f64(&x) - r.to_f64() * a6).abs() < 1e-10);
    }
}

#[test]
fn hopf_lift_agrees_with_composition() {
    let p = harmonic_correction(&icosahedral_sextic()).unwrap().corrected;
    let lift = hopf_lift(&p).to_f64_poly();
    let pf = p.to_f64_poly();
    for x in random_sphere_points::<4>(50, 3) {
        let h = hopf(&QuatF::from_array(x));
        assert!((lift.eval_f64(&x) - pf.eval_f64(&h)).abs() < 1e-12);
    }
}

#[test]
fn quadrature_weights_are_a_probability_measure() {
    for rule in [Su2Quadrature::new(12), Su2Quadrature::reduced(48)] {
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        for x in &rule.nodes {
            assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }
}

#[test]
fn quadrature_passes_moment_tests() {
    assert!(Su2Quadrature::new(24).self_test(1e-13, 64).is_ok());
    assert!(Su2Quadrature::reduced(48).self_test(1e-13, 64).is_ok());
    assert_eq!(Su2Quadrature::reduced(48).len(), 3250);
}

#[test]
fn reduced_quadrature_reproduces_invariant_mean_squares() {
    // mean |A_j|² = 25 C(12, j)/1092 by Schur orthogonality
    let q = Su2Quadrature::reduced(24);
    let binom = [1.0, 12.0, 66.0, 220.0, 495.0, 792.0, 924.0, 792.0, 495.0, 220.0, 66.0, 12.0, 1.0];
    for (j, b) in binom.iter().enumerate() {
        let got = q.mean(|x| coefficients_a(&QuatF::from_array(*x))[j].norm_sqr());
        assert!((got - 25.0 * b / 1092.0).abs() < 1e-13, "j = {j}");
    }
}

#[test]
fn under_resolved_rule_fails_self_test() {
    let mut q = Su2Quadrature::new(8);
    q.degree = 20;
    assert!(q.self_test(1e-10, 16).is_err());
}

fn arb_poly(dim: usize, degree: u16) -> impl Strategy<Value = Poly<Rational>> {
    proptest::collection::vec((prop::array::uniform4(0u16..=degree), -9i64..=9), 1..8).prop_map(move |terms| {
        terms.into_iter().fold(Poly::zero(dim), |acc, (mut e, c)| {
            for slot in e.iter_mut().skip(dim) {
                *slot = 0;
            }
            // make homogeneous: push the surplus degree into the first slot
            let tot: u16 = e.iter().sum();
            if tot > degree {
                e = [degree, 0, 0, 0];
            } else {
                e[0] += degree - tot;
            }
            acc.add(&Poly::monomial(dim, e, rat(c, 1)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn harmonic_projection_is_harmonic_and_agrees_in_mean(p in arb_poly(4, 6)) {
        let h = harmonic_projection(&p).unwrap();
        prop_assert!(h.euclidean_laplacian().is_zero());
        prop_assert_eq!(h.sphere_mean(), Rational::zero());
    }

    #[test]
    fn laplacian_is_linear(p in arb_poly(3, 6), q in arb_poly(3, 6), c in -5i64..5) {
        let lhs = p.add(&q.scale(&rat(c, 1))).euclidean_laplacian();
        let rhs = p.euclidean_laplacian().add(&q.euclidean_laplacian().scale(&rat(c, 1)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn homogenize_preserves_sphere_values(p in arb_poly(4, 4), q in arb_poly(4, 2), x in prop::array::uniform4(-1.0f64..1.0)) {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(r > 0.1);
        let x = x.map(|v| v / r);
        let f = p.add(&q);
        let h = f.homogenize(4).unwrap();
        prop_assert!(h.is_homogeneous());
        prop_assert!((h.eval_f64(&x) - f.eval_f64(&x)).abs() < 1e-9);
    }

    #[test]
    fn exact_mean_matches_quadrature(p in arb_poly(4, 8)) {
        let q = Su2Quadrature::new(8);
        let pf = p.to_f64_poly();
        let exact = RealScalar::to_f64(&p.sphere_mean());
        prop_assert!((q.mean(|x| pf.eval_f64(x)) - exact).abs() < 1e-9 * (1.0 + exact.abs()));
    }
}
