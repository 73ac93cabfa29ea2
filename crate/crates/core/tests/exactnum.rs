use num_complex::Complex64;
use num_traits::{One, Zero};
use poincare_core::exactnum::{rat, Conj, ExactError, Mq, Nf, Real, RealScalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn mq_from(c: &[(usize, i64, i64)]) -> Mq {
    c.iter().fold(Mq::zero(), |acc, &(k, n, d)| acc + Mq::surd(k, n, d))
}

fn nf_from(re: (Mq, Mq), im: (Mq, Mq)) -> Nf {
    let r = Real::from_mq(re.0) + Real::from_mq(re.1) * Real::sigma();
    let i = Real::from_mq(im.0) + Real::from_mq(im.1) * Real::sigma();
    Nf::new(r, i)
}

/// A sparse random element with small rational coordinates.
fn random_nf(rng: &mut impl Rng, terms: usize) -> Nf {
    let mut parts: Vec<Vec<(usize, i64, i64)>> = vec![vec![]; 4];
    for _ in 0..terms {
        let p = rng.random_range(0..4);
        parts[p].push((rng.random_range(0..8), rng.random_range(-9..=9), rng.random_range(1..=7)));
    }
    nf_from((mq_from(&parts[0]), mq_from(&parts[1])), (mq_from(&parts[2]), mq_from(&parts[3])))
}

#[test]
fn golden_ratio_satisfies_its_minimal_polynomial() {
    let t = Nf::tau();
    assert_eq!(t.clone() * t.clone(), t + Nf::one());
}

#[test]
fn i_squared_is_minus_one() {
    assert_eq!(Nf::i() * Nf::i(), -Nf::one());
}

#[test]
fn root_two_times_root_three_is_root_six() {
    let p = Mq::sqrt2() * Mq::sqrt3();
    assert_eq!(p, Mq::surd(3, 1, 1));
    // exactly one nonzero coordinate, equal to 1, in the √6 slot
    let nf = Nf::from_real(Real::from_mq(p));
    let nz: Vec<usize> = nf.coords().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, _)| k).collect();
    assert_eq!(nz, vec![3]);
    assert_eq!(nf.coords()[3], rat(1, 1));
}

#[test]
fn sigma_squares_to_ten_plus_two_root_five() {
    let s = Real::sigma();
    assert_eq!(s.clone() * s, Real::frac(10, 1) + Real::sqrt5() * Real::frac(2, 1));
}

#[test]
fn inverse_of_tau_is_tau_minus_one() {
    assert_eq!(Nf::tau().inv().unwrap(), Nf::tau() - Nf::one());
}

#[test]
fn inverse_of_two_is_half() {
    assert_eq!(Nf::frac(2, 1).inv().unwrap(), Nf::frac(1, 2));
}

#[test]
fn inverse_of_one_plus_i() {
    let z = Nf::one() + Nf::i();
    let expected = (Nf::one() - Nf::i()) * Nf::frac(1, 2);
    assert_eq!(z.inv().unwrap(), expected);
}

#[test]
fn inverse_of_zero_is_an_error() {
    assert_eq!(Nf::zero().inv().unwrap_err(), ExactError::DivisionByZero);
    assert_eq!(Mq::zero().inv().unwrap_err(), ExactError::DivisionByZero);
}

#[test]
fn mixed_surd_inverse() {
    let a = Mq::frac(3, 1) + Mq::sqrt2() + Mq::surd(6, 2, 7) - Mq::surd(7, 1, 3);
    assert_eq!(&a * &a.inv().unwrap(), Mq::one());
}

#[test]
fn tau_to_float_matches_extended_precision() {
    // (1 + √5)/2 = 1.61803398874989484820458683436563811772…, nearest double below
    assert_eq!(Nf::tau().to_c64(), Complex64::new(1.618033988749895, 0.0));
}

#[test]
fn gaussian_rational_to_float() {
    let z = Nf::new(Real::frac(-11, 64), Real::frac(-1, 32));
    assert_eq!(z.to_c64(), Complex64::new(-0.171875, -0.03125));
    assert_eq!(Nf::zero().to_c64(), Complex64::new(0.0, 0.0));
}

#[test]
fn sigma_to_float() {
    // √(10 + 2√5) = 3.80422606518061…, four times sin 72°
    let s = Real::sigma().to_f64();
    assert!((s - 4.0 * (72f64).to_radians().sin()).abs() < 1e-15);
}

#[test]
fn ten_thousand_random_triples_are_distributive_and_associative() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let a = random_nf(&mut rng, 3);
        let b = random_nf(&mut rng, 3);
        let c = random_nf(&mut rng, 3);
        assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        assert_eq!((a.clone() * b.clone()) * c.clone(), a * (b * c));
    }
}

fn arb_nf() -> impl Strategy<Value = Nf> {
    proptest::collection::vec((0usize..4, 0usize..8, -20i64..=20, 1i64..=9), 1..6).prop_map(|terms| {
        let mut parts: Vec<Vec<(usize, i64, i64)>> = vec![vec![]; 4];
        for (p, k, n, d) in terms {
            parts[p].push((k, n, d));
        }
        nf_from((mq_from(&parts[0]), mq_from(&parts[1])), (mq_from(&parts[2]), mq_from(&parts[3])))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplication_commutes(a in arb_nf(), b in arb_nf()) {
        prop_assert_eq!(a.clone() * b.clone(), b * a);
    }

    #[test]
    fn float_embedding_is_multiplicative(a in arb_nf(), b in arb_nf()) {
        let exact = (a.clone() * b.clone()).to_c64();
        let float = a.to_c64() * b.to_c64();
        prop_assert!((exact - float).norm() <= 1e-10 * (1.0 + exact.norm().max(float.norm())));
    }

    #[test]
    fn conjugation_is_a_ring_automorphism(a in arb_nf(), b in arb_nf()) {
        prop_assert_eq!((a.clone() * b.clone()).conj(), a.conj() * b.conj());
        prop_assert_eq!((a.clone() + b.clone()).conj(), a.conj() + b.conj());
        let n = a.clone() * a.conj();
        prop_assert!(n.im.is_zero());
    }

    #[test]
    fn nonzero_elements_invert(a in arb_nf()) {
        prop_assume!(!a.is_zero());
        prop_assert_eq!(a.clone() * a.inv().unwrap(), Nf::one());
    }

    #[test]
    fn rational_embedding_round_trips(n in -1000i64..1000, d in 1i64..1000) {
        let r = rat(n, d);
        prop_assert_eq!(<Real as RealScalar>::from_rational(&r), Real::frac(n, d));
        prop_assert!((RealScalar::to_f64(&r) - n as f64 / d as f64).abs() < 1e-15);
    }
}
