//! Binary forms `Symⁿ(ℂ²)` with the SU(2) substitution action, Klein's
//! invariant `I₁₂`, the coefficient functions `A_j`, and evaluation of
//! matrix-coefficient functions with exact first and second derivatives.
//!
//! A form of degree `n` is stored by its coefficients `c_j` of
//! `e_j = x^{n−j} y^j`. The action of `z = (α, β)` substitutes
//! `(x, y) ↦ (αx − β̄y, βx + ᾱy)`. The coefficient functions of a fixed form
//! `η`, `z ↦ [z·η]_j`, are right invariant under every element fixing `η`
//! and have pure left weight `n − 2j` along the Hopf fibers.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::exactnum::{Conj, Nf, Rational, Real, Ring};
use crate::jet::{Jet, SphereFunction};
use crate::quatgroup::{ExactRay, QuatF};

/// Homogeneous polynomial of degree `coeffs.len() − 1` in two variables.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryForm<R> {
    /// Coefficient of `x^{n−j} y^j` at index `j`.
    pub coeffs: Vec<R>,
}

impl<R: Ring> BinaryForm<R> {
    /// Degree `n`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }
    /// The monomial `e_j` of degree `n`.
    pub fn monomial(n: usize, j: usize) -> Self {
        let mut coeffs = vec![R::zero(); n + 1];
        coeffs[j] = R::one();
        BinaryForm { coeffs }
    }
    /// Product of forms.
    pub fn mul_form(&self, o: &Self) -> Self {
        BinaryForm { coeffs: convolve(&self.coeffs, &o.coeffs) }
    }
    /// `∂/∂x`.
    pub fn dx(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return BinaryForm { coeffs: vec![R::zero()] };
        }
        BinaryForm { coeffs: (0..n).map(|k| self.coeffs[k].clone() * R::from_int((n - k) as i64)).collect() }
    }
    /// `∂/∂y`.
    pub fn dy(&self) -> Self {
        let n = self.degree();
        if n == 0 {
            return BinaryForm { coeffs: vec![R::zero()] };
        }
        BinaryForm { coeffs: (0..n).map(|k| self.coeffs[k + 1].clone() * R::from_int((k + 1) as i64)).collect() }
    }
    /// Map the coefficients into another ring.
    pub fn map<S, F: Fn(&R) -> S>(&self, f: F) -> BinaryForm<S> {
        BinaryForm { coeffs: self.coeffs.iter().map(f).collect() }
    }
}

fn convolve<R: Ring>(p: &[R], q: &[R]) -> Vec<R> {
    let mut out = vec![R::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].clone() + a.clone() * b.clone();
        }
    }
    out
}

/// Powers `ℓ⁰, ℓ¹, …, ℓⁿ` of a linear form `ℓ = l₀x + l₁y`.
fn linear_powers<R: Ring>(l: &[R; 2], n: usize) -> Vec<Vec<R>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(vec![R::one()]);
    for k in 1..=n {
        let prev: &Vec<R> = &out[k - 1];
        out.push(convolve(prev, l));
    }
    out
}

/// `f(u, v)` for linear forms `u`, `v` given their precomputed powers.
fn substitute_with<R: Ring>(up: &[Vec<R>], vp: &[Vec<R>], f: &[R]) -> Vec<R> {
    let n = f.len() - 1;
    let mut out = vec![R::zero(); n + 1];
    for (k, c) in f.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let prod = convolve(&up[n - k], &vp[k]);
        for (o, p) in out.iter_mut().zip(prod) {
            *o = o.clone() + c.clone() * p;
        }
    }
    out
}

/// Substitute `(x, y) ↦ (u₀x + u₁y, v₀x + v₁y)` into `f`.
pub fn substitute<R: Ring>(u: [R; 2], v: [R; 2], f: &BinaryForm<R>) -> BinaryForm<R> {
    let n = f.degree();
    let up = linear_powers(&u, n);
    let vp = linear_powers(&v, n);
    BinaryForm { coeffs: substitute_with(&up, &vp, &f.coeffs) }
}

/// The action of `z = (α, β)`: `f(αx − β̄y, βx + ᾱy)`.
pub fn act<R: Ring + Conj>(alpha: &R, beta: &R, f: &BinaryForm<R>) -> BinaryForm<R> {
    substitute([alpha.clone(), -beta.conj()], [beta.clone(), alpha.conj()], f)
}

/// Klein's icosahedral invariant `I₁₂ = x¹¹y + 11x⁶y⁶ − xy¹¹`.
pub fn klein_form<R: Ring>() -> BinaryForm<R> {
    let mut coeffs = vec![R::zero(); 13];
    coeffs[1] = R::one();
    coeffs[6] = R::from_int(11);
    coeffs[11] = R::from_int(-1);
    BinaryForm { coeffs }
}

/// `A_j(z)`, the `e_j`-coefficient of `z·I₁₂`, at a floating point of `S³`.
pub fn coefficient_a(j: usize, z: &QuatF) -> Complex64 {
    coefficients_a(z)[j]
}

/// All thirteen `A_j(z)` at a floating point.
pub fn coefficients_a(z: &QuatF) -> Vec<Complex64> {
    act(&z.alpha(), &z.beta(), &klein_form()).coeffs
}

/// All thirteen `A_j` exactly at the normalized point of an exact ray:
/// `A_j(v/|v|) = A_j(v)/(|v|²)⁶`.
pub fn coefficients_a_exact(z: &ExactRay) -> Vec<Nf> {
    let raw = act(&z.alpha, &z.beta, &klein_form::<Nf>()).coeffs;
    let n2 = z.norm_sqr();
    let scale = Nf::from_real(crate::exactnum::pow(&n2, 6).inv().expect("nonzero ray"));
    raw.into_iter().map(|c| &c * &scale).collect()
}

/// `A_j` exactly at an exact ray.
pub fn coefficient_a_exact(j: usize, z: &ExactRay) -> Nf {
    coefficients_a_exact(z)[j].clone()
}

/// Frequency of the restriction of a weight-`(12 − 2j)` function to an
/// order-`m` exceptional circle of `M`: `ℓ/(2m)` if `2m | ℓ`, `None` when
/// the restriction vanishes identically.
pub fn restriction_frequency(j: usize, m: usize) -> Option<i64> {
    let l = 12 - 2 * j as i64;
    let p = 2 * m as i64;
    (l % p == 0).then_some(l / p)
}

// ---------------------------------------------------------------------------
// Polynomials in (α, ᾱ, β, β̄)

/// Polynomial in the four complex monomials `α, ᾱ, β, β̄` (exponent order),
/// used for exact integration over `S³` and for expansion into real
/// coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CPoly<T> {
    /// Exponents `[α, ᾱ, β, β̄]` to coefficient.
    pub terms: BTreeMap<[u16; 4], T>,
}

impl<T: Ring> CPoly<T> {
    /// A single monomial.
    pub fn monomial(e: [u16; 4], c: T) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        CPoly { terms }
    }
    /// The coordinate functions `α, β` as polynomials.
    pub fn alpha() -> Self {
        Self::monomial([1, 0, 0, 0], T::one())
    }
    /// `β`.
    pub fn beta() -> Self {
        Self::monomial([0, 0, 1, 0], T::one())
    }
    /// Map coefficients.
    pub fn map<S: Ring, F: Fn(&T) -> S>(&self, f: F) -> CPoly<S> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let v = f(c);
            if !v.is_zero() {
                terms.insert(*e, v);
            }
        }
        CPoly { terms }
    }
}

impl<T: Ring + Conj> CPoly<T> {
    /// Complex conjugate: swaps `α ↔ ᾱ`, `β ↔ β̄` and conjugates coefficients.
    pub fn conj_poly(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            terms.insert([e[1], e[0], e[3], e[2]], c.conj());
        }
        CPoly { terms }
    }
}

impl<T: Ring + Conj> Conj for CPoly<T> {
    fn conj(&self) -> Self {
        self.conj_poly()
    }
}

impl<T: Ring> Zero for CPoly<T> {
    fn zero() -> Self {
        CPoly { terms: BTreeMap::new() }
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}
impl<T: Ring> One for CPoly<T> {
    fn one() -> Self {
        Self::monomial([0; 4], T::one())
    }
}
impl<T: Ring> Ring for CPoly<T> {
    fn from_int(n: i64) -> Self {
        Self::monomial([0; 4], T::from_int(n))
    }
}

impl<T: Ring> Add for CPoly<T> {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (e, c) in o.terms {
            let v = match self.terms.remove(&e) {
                Some(a) => a + c,
                None => c,
            };
            if !v.is_zero() {
                self.terms.insert(e, v);
            }
        }
        self
    }
}
impl<T: Ring> Neg for CPoly<T> {
    type Output = Self;
    fn neg(self) -> Self {
        CPoly { terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect() }
    }
}
impl<T: Ring> Sub for CPoly<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}
impl<T: Ring> Mul for CPoly<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut terms: BTreeMap<[u16; 4], T> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3]];
                let p = c1.clone() * c2.clone();
                match terms.get_mut(&e) {
                    Some(v) => *v = v.clone() + p,
                    None => {
                        terms.insert(e, p);
                    }
                }
            }
        }
        terms.retain(|_, v| !v.is_zero());
        CPoly { terms }
    }
}

fn factorial(n: u32) -> BigRational {
    (1..=n).fold(BigRational::one(), |acc, k| acc * BigRational::from_integer(k.into()))
}

/// Exact mean over `S³` of `α^p ᾱ^q β^r β̄^s`: zero unless `p = q` and
/// `r = s`, in which case it is `p! r! / (p + r + 1)!`.
pub fn monomial_mean_s3(e: [u16; 4]) -> Rational {
    if e[0] != e[1] || e[2] != e[3] {
        return Rational::zero();
    }
    let (p, r) = (e[0] as u32, e[2] as u32);
    factorial(p) * factorial(r) / factorial(p + r + 1)
}

impl CPoly<num_complex::Complex<i128>> {
    /// Exact mean over `S³` as a Gaussian rational `(re, im)`.
    pub fn mean_s3(&self) -> (Rational, Rational) {
        let mut re = Rational::zero();
        let mut im = Rational::zero();
        for (e, c) in &self.terms {
            let m = monomial_mean_s3(*e);
            if m.is_zero() {
                continue;
            }
            re += &m * BigRational::from_integer(c.re.into());
            im += &m * BigRational::from_integer(c.im.into());
        }
        (re, im)
    }
}

/// Integer Gaussian coefficients, the natural ring for expansions of forms
/// with integer coefficients.
pub type GaussInt = num_complex::Complex<i128>;

/// The thirteen `A_j` as exact polynomials in `(α, ᾱ, β, β̄)`.
pub fn coefficient_cpolys() -> Vec<CPoly<GaussInt>> {
    let f: BinaryForm<CPoly<GaussInt>> = klein_form();
    act(&CPoly::alpha(), &CPoly::beta(), &f).coeffs
}

/// Exact means `mean_{S³} |A_j|²` for `j = 0, …, 12`.
pub fn coefficient_mean_squares() -> Vec<Rational> {
    coefficient_cpolys().iter().map(|p| (p.clone() * p.conj_poly()).mean_s3().0).collect()
}

/// Coefficient polynomials of an arbitrary form with complex coefficients.
pub fn coefficient_cpolys_f64(eta: &BinaryForm<Complex64>) -> Vec<CPoly<Complex64>> {
    let f: BinaryForm<CPoly<Complex64>> = eta.map(|c| CPoly::monomial([0; 4], *c));
    act(&CPoly::alpha(), &CPoly::beta(), &f).coeffs
}

/// Exact value of a Gaussian-integer polynomial at an exact point.
pub fn eval_cpoly_exact(p: &CPoly<GaussInt>, alpha: &Nf, beta: &Nf) -> Nf {
    let vars = [alpha.clone(), alpha.conj(), beta.clone(), beta.conj()];
    let mut acc = Nf::zero();
    for (e, c) in &p.terms {
        let mut t = Nf::new(Real::frac(c.re as i64, 1), Real::frac(c.im as i64, 1));
        for (v, &k) in vars.iter().zip(e.iter()) {
            if k > 0 {
                t = &t * &crate::exactnum::pow(v, k as u32);
            }
        }
        acc = &acc + &t;
    }
    acc
}

// ---------------------------------------------------------------------------
// Matrix-coefficient functions with derivatives

/// The derivative chain of one Wirtinger variable: `(∂u, ∂v)` where `u, v`
/// are the substituted linear forms; each entry is `±x`, `±y` or zero, coded
/// as `(sign, number of y factors)`.
type Chain = [Option<(f64, usize)>; 2];

/// Wirtinger variables in the order `α, ᾱ, β, β̄`.
const CHAINS: [Chain; 4] = [
    [Some((1.0, 0)), None],  // ∂/∂α: u = αx − β̄y → x
    [None, Some((1.0, 1))],  // ∂/∂ᾱ: v = βx + ᾱy → y
    [None, Some((1.0, 0))],  // ∂/∂β: v → x
    [Some((-1.0, 1)), None], // ∂/∂β̄: u → −y
];

/// Real coordinate derivatives in terms of Wirtinger derivatives:
/// `∂_a = ∂_α + ∂_ᾱ`, `∂_b = i(∂_α − ∂_ᾱ)`, and likewise for `c, d`.
fn wirtinger_to_real() -> [[Complex64; 4]; 4] {
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let z = Complex64::new(0.0, 0.0);
    [[o, o, z, z], [i, -i, z, z], [z, z, o, o], [z, z, i, -i]]
}

/// The coefficients of `z·η` together with the substitutions of the first
/// and second partial derivatives of `η`, all at one point.
pub struct FormJet {
    /// `z·η`, degree `n`.
    pub g: Vec<Complex64>,
    /// `η_x(u, v)` and `η_y(u, v)`, degree `n − 1`.
    pub g1: [Vec<Complex64>; 2],
    /// `η_xx(u, v)`, `η_xy(u, v)`, `η_yy(u, v)`, degree `n − 2`.
    pub g2: [Vec<Complex64>; 3],
}

/// Precomputed derivative forms of a fixed binary form.
#[derive(Clone, Debug)]
pub struct FormDerivatives {
    /// The form `η`.
    pub eta: BinaryForm<Complex64>,
    /// `η_x`, `η_y`.
    pub d1: [BinaryForm<Complex64>; 2],
    /// `η_xx`, `η_xy`, `η_yy`.
    pub d2: [BinaryForm<Complex64>; 3],
}

impl FormDerivatives {
    /// Differentiate `η` once and twice.
    pub fn new(eta: BinaryForm<Complex64>) -> Self {
        let ex = eta.dx();
        let ey = eta.dy();
        let d2 = [ex.dx(), ex.dy(), ey.dy()];
        FormDerivatives { d1: [ex, ey], d2, eta }
    }

    /// Degree of `η`.
    pub fn degree(&self) -> usize {
        self.eta.degree()
    }

    /// Evaluate the substituted forms at `z` up to the requested order.
    pub fn at(&self, alpha: Complex64, beta: Complex64, order: usize) -> FormJet {
        let n = self.degree();
        let u = [alpha, -beta.conj()];
        let v = [beta, alpha.conj()];
        let up = linear_powers(&u, n);
        let vp = linear_powers(&v, n);
        let g = substitute_with(&up, &vp, &self.eta.coeffs);
        let sub = |f: &BinaryForm<Complex64>| {
            if n == 0 {
                vec![Complex64::new(0.0, 0.0)]
            } else {
                substitute_with(&up, &vp, &f.coeffs)
            }
        };
        let g1 = if order >= 1 { [sub(&self.d1[0]), sub(&self.d1[1])] } else { [vec![], vec![]] };
        let g2 = if order >= 2 && n >= 2 {
            [sub(&self.d2[0]), sub(&self.d2[1]), sub(&self.d2[2])]
        } else if order >= 2 {
            [vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 0.0)]]
        } else {
            [vec![], vec![], vec![]]
        };
        FormJet { g, g1, g2 }
    }
}

fn shifted_pair(w: &[Complex64], g: &[Complex64], shift: usize) -> Complex64 {
    g.iter().enumerate().filter_map(|(j, c)| w.get(j + shift).map(|wj| wj * c)).sum()
}

impl FormJet {
    /// Real gradients `∂_r [z·η]_j` for all `j`, as four coefficient vectors.
    pub fn coefficient_gradients(&self) -> [Vec<Complex64>; 4] {
        let n1 = self.g.len();
        let mut wirt: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n1]);
        for (k, chain) in CHAINS.iter().enumerate() {
            for (which, c) in chain.iter().enumerate() {
                if let Some((s, ny)) = c {
                    for (j, val) in self.g1[which].iter().enumerate() {
                        if j + ny < n1 {
                            wirt[k][j + ny] += val * *s;
                        }
                    }
                }
            }
        }
        let m = wirt_to_real_mat();
        std::array::from_fn(|r| (0..n1).map(|j| (0..4).map(|k| m[r][k] * wirt[k][j]).sum()).collect())
    }

    /// Jet of `Re Σ_j w_j [z·η]_j`.
    pub fn functional_jet(&self, w: &[Complex64]) -> Jet<4> {
        let value = w.iter().zip(&self.g).map(|(a, b)| a * b).sum::<Complex64>().re;
        let mut d1 = [Complex64::new(0.0, 0.0); 4];
        for (k, chain) in CHAINS.iter().enumerate() {
            for (which, c) in chain.iter().enumerate() {
                if let Some((s, ny)) = c {
                    d1[k] += shifted_pair(w, &self.g1[which], *ny) * *s;
                }
            }
        }
        let mut d2 = [[Complex64::new(0.0, 0.0); 4]; 4];
        if !self.g2[0].is_empty() {
            for k in 0..4 {
                for l in k..4 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (a, ca) in CHAINS[k].iter().enumerate() {
                        let Some((sa, ya)) = ca else { continue };
                        for (b, cb) in CHAINS[l].iter().enumerate() {
                            let Some((sb, yb)) = cb else { continue };
                            // which second derivative: (u,u) → xx, mixed → xy, (v,v) → yy
                            let idx = a + b;
                            acc += shifted_pair(w, &self.g2[idx], ya + yb) * (sa * sb);
                        }
                    }
                    d2[k][l] = acc;
                    d2[l][k] = acc;
                }
            }
        }
        let m = wirt_to_real_mat();
        let mut jet = Jet::zero();
        jet.value = value;
        for r in 0..4 {
            jet.grad[r] = (0..4).map(|k| m[r][k] * d1[k]).sum::<Complex64>().re;
            for s in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    for l in 0..4 {
                        acc += m[r][k] * m[s][l] * d2[k][l];
                    }
                }
                jet.hess[r][s] = acc.re;
            }
        }
        jet
    }
}

fn wirt_to_real_mat() -> [[Complex64; 4]; 4] {
    wirtinger_to_real()
}

/// A real function on `S³` of the form `c + Σ_blocks Re Σ_j w_j [z·η]_j`:
/// any real combination of coefficient functions of fixed forms.
#[derive(Clone, Debug)]
pub struct MatrixCoefficientFunction {
    /// Additive constant.
    pub constant: f64,
    /// `(form with derivatives, complex weights on its coefficients)`.
    pub blocks: Vec<(FormDerivatives, Vec<Complex64>)>,
}

impl MatrixCoefficientFunction {
    /// `Re Σ_j w_j A_j` for Klein's form.
    pub fn klein(w: Vec<Complex64>) -> Self {
        MatrixCoefficientFunction {
            constant: 0.0,
            blocks: vec![(FormDerivatives::new(klein_form()), w)],
        }
    }
    /// `Re(c·A_j)`.
    pub fn klein_single(j: usize, c: Complex64) -> Self {
        let mut w = vec![Complex64::new(0.0, 0.0); 13];
        w[j] = c;
        Self::klein(w)
    }
    /// Value at a point of `ℝ⁴`.
    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        let (a, b) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        self.constant
            + self
                .blocks
                .iter()
                .map(|(f, w)| {
                    let fj = f.at(a, b, 0);
                    w.iter().zip(&fj.g).map(|(p, q)| p * q).sum::<Complex64>().re
                })
                .sum::<f64>()
    }
    /// `self + s·other`, merging blocks of identical forms.
    pub fn add_scaled(&mut self, s: f64, other: &MatrixCoefficientFunction) {
        self.constant += s * other.constant;
        for (f, w) in &other.blocks {
            if let Some((_, w0)) = self.blocks.iter_mut().find(|(g, _)| g.eta == f.eta) {
                for (a, b) in w0.iter_mut().zip(w) {
                    *a += b * s;
                }
            } else {
                self.blocks.push((f.clone(), w.iter().map(|b| b * s).collect()));
            }
        }
    }
    /// Multiply by a scalar.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.constant *= s;
        for (_, w) in out.blocks.iter_mut() {
            for a in w.iter_mut() {
                *a *= s;
            }
        }
        out
    }
}

impl SphereFunction<4> for MatrixCoefficientFunction {
    fn jet(&self, x: &[f64; 4]) -> Jet<4> {
        let (a, b) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let mut jet = Jet::zero();
        jet.value = self.constant;
        for (f, w) in &self.blocks {
            let fj = f.at(a, b, 2);
            jet.add_scaled(1.0, &fj.functional_jet(w));
        }
        jet
    }
    fn value(&self, x: &[f64; 4]) -> f64 {
        self.eval(x)
    }
}

/// Rationals appear as a convenience for exact expected values in reports.
pub fn gauss_rational(re: (i64, i64), im: (i64, i64)) -> Nf {
    Nf::new(Real::frac(re.0, re.1), Real::frac(im.0, im.1))
}

/// One exact identity between a coefficient function value and its closed form.
#[derive(Clone, Debug)]
pub struct ExactIdentity {
    /// Human-readable label such as `A_0(z_2)`.
    pub label: String,
    /// Index `j` of the coefficient.
    pub j: usize,
    /// Value computed in exact arithmetic.
    pub computed: Nf,
    /// Closed form.
    pub expected: Nf,
}

impl ExactIdentity {
    /// Exact equality of the two sides.
    pub fn holds(&self) -> bool {
        self.computed == self.expected
    }
}

/// The four closed-form coefficient values at `z₂ = (i, 1)/√2` and
/// `z₃ = (r, s e^{−iπ/4})`.
pub fn exact_identities() -> Vec<ExactIdentity> {
    let z2 = ExactRay { alpha: Nf::i(), beta: Nf::one() };
    let z3 = crate::quatgroup::z3_sextic_frame();
    let s3 = Real::sqrt3();
    let c55 = Real::frac(55, 216);
    let cases = [
        ("A_0(z_2)", 0, &z2, gauss_rational((-11, 64), (-1, 32))),
        ("A_4(z_2)", 4, &z2, gauss_rational((-165, 64), (-165, 32))),
        (
            "A_3(z_3)",
            3,
            &z3,
            Nf::new(-(&s3 * &c55) - c55.clone(), &(&s3 * &c55) - &c55),
        ),
        ("A_0(z_3)", 0, &z3, Nf::new(&s3 * &Real::frac(11, 216), Real::frac(-1, 27))),
    ];
    cases
        .into_iter()
        .map(|(label, j, z, expected)| ExactIdentity {
            label: label.to_string(),
            j,
            computed: coefficient_a_exact(j, z),
            expected,
        })
        .collect()
}
