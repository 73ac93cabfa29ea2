//! Exact arithmetic in the number field used by every closed-form identity.
//!
//! The field is built as a short tower so that every element has a unique
//! coordinate vector over ℚ:
//!
//! * [`Mq`]: the multiquadratic field ℚ(√2, √3, √5), eight rational coordinates
//!   over the basis `1, √2, √3, √6, √5, √10, √15, √30`;
//! * [`Real`]: the quadratic extension `Mq(σ)` with `σ = √(10 + 2√5)`, the surd
//!   needed for `sin 72° = σ/4` and hence for the binary icosahedral group in
//!   the orientation that fixes Klein's form;
//! * [`Nf`]: the complexification `Real(i)`.
//!
//! All coordinates are arbitrary-precision rationals, so no overflow path
//! exists. Floating embeddings go through 50-digit rational approximations of
//! the surds and are rounded once at the end.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational number, always kept in lowest terms.
pub type Rational = BigRational;

/// Errors raised by exact arithmetic.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    /// Attempted to invert the zero element.
    #[error("division by zero in exact arithmetic")]
    DivisionByZero,
}

/// Build a rational from a numerator and a nonzero denominator.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Minimal commutative-ring interface shared by the exact and floating scalar
/// types, so that polynomial and binary-form routines are written once.
pub trait Ring:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Image of an integer.
    fn from_int(n: i64) -> Self;
}

/// Scalars carrying a complex conjugation (the identity on real rings).
pub trait Conj {
    /// Complex conjugate.
    fn conj(&self) -> Self;
}

macro_rules! ring_prim {
    ($t:ty) => {
        impl Ring for $t {
            fn from_int(n: i64) -> Self {
                n as $t
            }
        }
        impl Conj for $t {
            fn conj(&self) -> Self {
                *self
            }
        }
    };
}
ring_prim!(f64);
ring_prim!(i128);

impl Ring for Rational {
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

impl<T: Ring + num_traits::Num> Ring for Complex<T> {
    fn from_int(n: i64) -> Self {
        Complex::new(T::from_int(n), T::zero())
    }
}

impl<T: Clone + num_traits::Num + Neg<Output = T>> Conj for Complex<T> {
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

// ---------------------------------------------------------------------------
// Extended-precision constants for the floating embedding.

const SQRT2: &str = "1.4142135623730950488016887242096980785696718753769";
const SQRT3: &str = "1.7320508075688772935274463415058723669428052538104";
const SQRT5: &str = "2.2360679774997896964091736687312762354406183596115";
const SIGMA: &str = "3.804226065180614288465757333517528573622794536503";

fn decimal(s: &str) -> Rational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    BigRational::new(digits, BigInt::from(10).pow(frac.len() as u32))
}

struct Surds {
    basis: [Rational; 8],
    sigma: Rational,
}

fn surds() -> &'static Surds {
    static CELL: OnceLock<Surds> = OnceLock::new();
    CELL.get_or_init(|| {
        let (s2, s3, s5) = (decimal(SQRT2), decimal(SQRT3), decimal(SQRT5));
        let one = Rational::one();
        let basis = std::array::from_fn(|k| {
            let mut v = one.clone();
            if k & 1 != 0 {
                v *= &s2;
            }
            if k & 2 != 0 {
                v *= &s3;
            }
            if k & 4 != 0 {
                v *= &s5;
            }
            v
        });
        Surds { basis, sigma: decimal(SIGMA) }
    })
}

fn rat_to_f64(r: &Rational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

// ---------------------------------------------------------------------------
// ℚ(√2, √3, √5)

/// Names of the multiquadratic basis elements in coordinate order.
pub const MQ_BASIS: [&str; 8] = ["1", "√2", "√3", "√6", "√5", "√10", "√15", "√30"];

/// Element of ℚ(√2, √3, √5). Coordinate `k` multiplies
/// `√(2^{k₀} 3^{k₁} 5^{k₂})` where `k = k₀ + 2k₁ + 4k₂`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mq(pub [Rational; 8]);

const PRIMES: [i64; 3] = [2, 3, 5];

fn basis_factor(i: usize, j: usize) -> i64 {
    let common = i & j;
    (0..3).filter(|b| common & (1 << b) != 0).map(|b| PRIMES[b]).product()
}

impl Mq {
    /// The rational number `r` as a field element.
    pub fn from_rational(r: Rational) -> Self {
        let mut c: [Rational; 8] = std::array::from_fn(|_| Rational::zero());
        c[0] = r;
        Mq(c)
    }
    /// `n/d` as a field element.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_rational(rat(n, d))
    }
    /// The basis surd `√(2^{k₀} 3^{k₁} 5^{k₂})` scaled by `n/d`.
    pub fn surd(k: usize, n: i64, d: i64) -> Self {
        let mut c: [Rational; 8] = std::array::from_fn(|_| Rational::zero());
        c[k] = rat(n, d);
        Mq(c)
    }
    /// √2.
    pub fn sqrt2() -> Self {
        Self::surd(1, 1, 1)
    }
    /// √3.
    pub fn sqrt3() -> Self {
        Self::surd(2, 1, 1)
    }
    /// √5.
    pub fn sqrt5() -> Self {
        Self::surd(4, 1, 1)
    }
    /// The golden ratio τ = (1 + √5)/2.
    pub fn tau() -> Self {
        Self::frac(1, 2) + Self::surd(4, 1, 2)
    }

    /// Image under the automorphism `√p ↦ −√p` for `p ∈ {2, 3, 5}`.
    pub fn galois(&self, p: i64) -> Self {
        let bit = match p {
            2 => 1,
            3 => 2,
            5 => 4,
            _ => panic!("galois: p must be 2, 3 or 5"),
        };
        Mq(std::array::from_fn(|k| if k & bit != 0 { -self.0[k].clone() } else { self.0[k].clone() }))
    }

    /// Rational part if the element lies in ℚ.
    pub fn as_rational(&self) -> Option<&Rational> {
        self.0[1..].iter().all(Zero::is_zero).then_some(&self.0[0])
    }

    /// Multiplicative inverse, computed as a product of Galois conjugates over the norm.
    pub fn inv(&self) -> Result<Self, ExactError> {
        if Zero::is_zero(self) {
            return Err(ExactError::DivisionByZero);
        }
        let c5 = self.galois(5);
        let n1 = self.clone() * c5.clone(); // in ℚ(√2, √3)
        let c3 = n1.galois(3);
        let n2 = n1 * c3.clone(); // in ℚ(√2)
        let c2 = n2.galois(2);
        let n3 = n2 * c2.clone(); // in ℚ
        let norm = n3.as_rational().expect("norm lies in Q").clone();
        let num = c5 * c3 * c2;
        Ok(num.scale(&norm.recip()))
    }

    /// Multiply every coordinate by a rational.
    pub fn scale(&self, r: &Rational) -> Self {
        Mq(std::array::from_fn(|k| &self.0[k] * r))
    }

    /// Value as a double, via 50-digit rational surds and a single rounding.
    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.to_rational_approx())
    }

    pub(crate) fn to_rational_approx(&self) -> Rational {
        let s = surds();
        self.0
            .iter()
            .zip(&s.basis)
            .filter(|(c, _)| !Zero::is_zero(*c))
            .fold(Rational::zero(), |acc, (c, b)| acc + c * b)
    }

    /// Sign of the real number this element represents.
    pub fn signum(&self) -> i32 {
        let v = self.to_rational_approx();
        if Zero::is_zero(&v) {
            // The 50-digit approximation of a nonzero element cannot vanish
            // for the coefficient sizes occurring here; treat as exact zero.
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

impl Zero for Mq {
    fn zero() -> Self {
        Mq(std::array::from_fn(|_| Rational::zero()))
    }
    fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}
impl One for Mq {
    fn one() -> Self {
        Self::frac(1, 1)
    }
}
impl Ring for Mq {
    fn from_int(n: i64) -> Self {
        Self::frac(n, 1)
    }
}

impl Conj for Mq {
    fn conj(&self) -> Self {
        self.clone()
    }
}

impl Add for Mq {
    type Output = Mq;
    fn add(self, o: Mq) -> Mq {
        &self + &o
    }
}
impl<'a> Add<&'a Mq> for &'a Mq {
    type Output = Mq;
    fn add(self, o: &Mq) -> Mq {
        Mq(std::array::from_fn(|k| &self.0[k] + &o.0[k]))
    }
}
impl Sub for Mq {
    type Output = Mq;
    fn sub(self, o: Mq) -> Mq {
        &self - &o
    }
}
impl<'a> Sub<&'a Mq> for &'a Mq {
    type Output = Mq;
    fn sub(self, o: &Mq) -> Mq {
        Mq(std::array::from_fn(|k| &self.0[k] - &o.0[k]))
    }
}
impl Neg for Mq {
    type Output = Mq;
    fn neg(self) -> Mq {
        Mq(self.0.map(|c| -c))
    }
}
impl Mul for Mq {
    type Output = Mq;
    fn mul(self, o: Mq) -> Mq {
        &self * &o
    }
}
impl<'a> Mul<&'a Mq> for &'a Mq {
    type Output = Mq;
    fn mul(self, o: &Mq) -> Mq {
        let mut out: [Rational; 8] = std::array::from_fn(|_| Rational::zero());
        for (i, a) in self.0.iter().enumerate() {
            if Zero::is_zero(a) {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                if Zero::is_zero(b) {
                    continue;
                }
                let f = basis_factor(i, j);
                let p = a * b;
                if f == 1 {
                    out[i ^ j] += p;
                } else {
                    out[i ^ j] += p * BigInt::from(f);
                }
            }
        }
        Mq(out)
    }
}

fn fmt_terms(coords: &[Rational], names: &[&str], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (c, name) in coords.iter().zip(names) {
        if Zero::is_zero(c) {
            continue;
        }
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        if *name == "1" {
            write!(f, "{c}")?;
        } else if c.is_one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "({c})·{name}")?;
        }
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl fmt::Display for Mq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_terms(&self.0, &MQ_BASIS, f)
    }
}
impl fmt::Debug for Mq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mq[{self}]")
    }
}

// ---------------------------------------------------------------------------
// ℚ(√2, √3, √5, σ)

/// Element `a + b·σ` of the real field ℚ(√2, √3, √5)(σ), with `σ² = 10 + 2√5`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Real {
    /// Coefficient of 1.
    pub a: Mq,
    /// Coefficient of σ.
    pub b: Mq,
}

fn sigma_sq() -> Mq {
    Mq::frac(10, 1) + Mq::surd(4, 2, 1)
}

impl Real {
    /// Embed an element of the multiquadratic subfield.
    pub fn from_mq(a: Mq) -> Self {
        Real { a, b: Mq::zero() }
    }
    /// `n/d`.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_mq(Mq::frac(n, d))
    }
    /// σ = √(10 + 2√5) = 4 sin 72°.
    pub fn sigma() -> Self {
        Real { a: Mq::zero(), b: Mq::one() }
    }
    /// √2.
    pub fn sqrt2() -> Self {
        Self::from_mq(Mq::sqrt2())
    }
    /// √3.
    pub fn sqrt3() -> Self {
        Self::from_mq(Mq::sqrt3())
    }
    /// √5.
    pub fn sqrt5() -> Self {
        Self::from_mq(Mq::sqrt5())
    }
    /// τ = (1 + √5)/2.
    pub fn tau() -> Self {
        Self::from_mq(Mq::tau())
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<Self, ExactError> {
        if Zero::is_zero(self) {
            return Err(ExactError::DivisionByZero);
        }
        let norm = &self.a * &self.a - &(&self.b * &self.b) * &sigma_sq();
        let ninv = norm.inv()?;
        Ok(Real { a: &self.a * &ninv, b: -(&self.b * &ninv) })
    }

    /// Value as a double, rounded once from a 50-digit rational approximation.
    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.to_rational_approx())
    }

    pub(crate) fn to_rational_approx(&self) -> Rational {
        self.a.to_rational_approx() + self.b.to_rational_approx() * &surds().sigma
    }

    /// Sign of the represented real number.
    pub fn signum(&self) -> i32 {
        let v = self.to_rational_approx();
        if Zero::is_zero(&v) {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Sixteen rational coordinates over `{1, …, √30} ⊗ {1, σ}`.
    pub fn coords(&self) -> Vec<Rational> {
        self.a.0.iter().chain(self.b.0.iter()).cloned().collect()
    }
}

impl Zero for Real {
    fn zero() -> Self {
        Self::from_mq(Mq::zero())
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
}
impl One for Real {
    fn one() -> Self {
        Self::frac(1, 1)
    }
}
impl Ring for Real {
    fn from_int(n: i64) -> Self {
        Self::frac(n, 1)
    }
}
impl Conj for Real {
    fn conj(&self) -> Self {
        self.clone()
    }
}
impl Add for Real {
    type Output = Real;
    fn add(self, o: Real) -> Real {
        &self + &o
    }
}
impl<'a> Add<&'a Real> for &'a Real {
    type Output = Real;
    fn add(self, o: &Real) -> Real {
        Real { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}
impl Sub for Real {
    type Output = Real;
    fn sub(self, o: Real) -> Real {
        &self - &o
    }
}
impl<'a> Sub<&'a Real> for &'a Real {
    type Output = Real;
    fn sub(self, o: &Real) -> Real {
        Real { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}
impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { a: -self.a, b: -self.b }
    }
}
impl Mul for Real {
    type Output = Real;
    fn mul(self, o: Real) -> Real {
        &self * &o
    }
}
impl<'a> Mul<&'a Real> for &'a Real {
    type Output = Real;
    fn mul(self, o: &Real) -> Real {
        let bb = &self.b * &o.b;
        let a = if Zero::is_zero(&bb) { &self.a * &o.a } else { &(&self.a * &o.a) + &(&bb * &sigma_sq()) };
        let b = &(&self.a * &o.b) + &(&self.b * &o.a);
        Real { a, b }
    }
}
impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.b) {
            write!(f, "{}", self.a)
        } else if Zero::is_zero(&self.a) {
            write!(f, "({})·σ", self.b)
        } else {
            write!(f, "{} + ({})·σ", self.a, self.b)
        }
    }
}
impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real[{self}]")
    }
}

// ---------------------------------------------------------------------------
// Complexification

/// Exact complex number `re + i·im` with real and imaginary parts in [`Real`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Nf {
    /// Real part.
    pub re: Real,
    /// Imaginary part.
    pub im: Real,
}

/// The name used for exact complex scalars in reports.
pub type NumberFieldElement = Nf;

impl Nf {
    /// Build from real and imaginary parts.
    pub fn new(re: Real, im: Real) -> Self {
        Nf { re, im }
    }
    /// Embed a real element.
    pub fn from_real(re: Real) -> Self {
        Nf { re, im: Real::zero() }
    }
    /// `n/d`.
    pub fn frac(n: i64, d: i64) -> Self {
        Self::from_real(Real::frac(n, d))
    }
    /// The imaginary unit.
    pub fn i() -> Self {
        Nf { re: Real::zero(), im: Real::one() }
    }
    /// τ = (1 + √5)/2.
    pub fn tau() -> Self {
        Self::from_real(Real::tau())
    }

    /// Multiplicative inverse: the conjugate over the squared modulus.
    pub fn inv(&self) -> Result<Self, ExactError> {
        let n = &(&self.re * &self.re) + &(&self.im * &self.im);
        let ninv = n.inv()?;
        Ok(Nf { re: &self.re * &ninv, im: -(&self.im * &ninv) })
    }

    /// Squared modulus `re² + im²`.
    pub fn norm_sqr(&self) -> Real {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    /// Complex double, each part rounded once from a 50-digit approximation.
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    /// Thirty-two rational coordinates: real part then imaginary part.
    pub fn coords(&self) -> Vec<Rational> {
        let mut v = self.re.coords();
        v.extend(self.im.coords());
        v
    }

    /// Multiply by an integer.
    pub fn scale_int(&self, n: i64) -> Self {
        self.clone() * Nf::frac(n, 1)
    }
}

impl Zero for Nf {
    fn zero() -> Self {
        Self::from_real(Real::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}
impl One for Nf {
    fn one() -> Self {
        Self::frac(1, 1)
    }
}
impl Ring for Nf {
    fn from_int(n: i64) -> Self {
        Self::frac(n, 1)
    }
}
impl Conj for Nf {
    fn conj(&self) -> Self {
        Nf { re: self.re.clone(), im: -self.im.clone() }
    }
}
impl Add for Nf {
    type Output = Nf;
    fn add(self, o: Nf) -> Nf {
        &self + &o
    }
}
impl<'a> Add<&'a Nf> for &'a Nf {
    type Output = Nf;
    fn add(self, o: &Nf) -> Nf {
        Nf { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}
impl Sub for Nf {
    type Output = Nf;
    fn sub(self, o: Nf) -> Nf {
        &self - &o
    }
}
impl<'a> Sub<&'a Nf> for &'a Nf {
    type Output = Nf;
    fn sub(self, o: &Nf) -> Nf {
        Nf { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}
impl Neg for Nf {
    type Output = Nf;
    fn neg(self) -> Nf {
        Nf { re: -self.re, im: -self.im }
    }
}
impl Mul for Nf {
    type Output = Nf;
    fn mul(self, o: Nf) -> Nf {
        &self * &o
    }
}
impl<'a> Mul<&'a Nf> for &'a Nf {
    type Output = Nf;
    fn mul(self, o: &Nf) -> Nf {
        let re = &(&self.re * &o.re) - &(&self.im * &o.im);
        let im = &(&self.re * &o.im) + &(&self.im * &o.re);
        Nf { re, im }
    }
}
impl fmt::Display for Nf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.im) {
            write!(f, "{}", self.re)
        } else if Zero::is_zero(&self.re) {
            write!(f, "i·({})", self.im)
        } else {
            write!(f, "{} + i·({})", self.re, self.im)
        }
    }
}
impl fmt::Debug for Nf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Nf[{self}]")
    }
}

/// Integer power by repeated squaring in any [`Ring`].
pub fn pow<R: Ring>(x: &R, mut e: u32) -> R {
    let mut base = x.clone();
    let mut acc = R::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base.clone();
        }
        e >>= 1;
        if e > 0 {
            base = base.clone() * base;
        }
    }
    acc
}
/// A real scalar ring that contains ℚ and embeds in the floats. Used by
/// polynomial code that must multiply by exact rational moments.
pub trait RealScalar: Ring {
    /// Image of a rational number.
    fn from_rational(r: &Rational) -> Self;
    /// Floating-point value.
    fn to_f64(&self) -> f64;
}

impl RealScalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl RealScalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl RealScalar for Mq {
    fn from_rational(r: &Rational) -> Self {
        Mq::from_rational(r.clone())
    }
    fn to_f64(&self) -> f64 {
        Mq::to_f64(self)
    }
}

impl RealScalar for Real {
    fn from_rational(r: &Rational) -> Self {
        Real::from_mq(Mq::from_rational(r.clone()))
    }
    fn to_f64(&self) -> f64 {
        Real::to_f64(self)
    }
}
