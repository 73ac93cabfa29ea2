//! Polynomials on `ℝ³` and `ℝ⁴` restricted to the unit sphere: exact
//! Euclidean Laplacian, exact sphere integration by monomial moments, the
//! icosahedral sextic `P` with its harmonic correction, the Hopf lift that
//! produces the seed `F₀`, and a product quadrature rule on `S³ = SU(2)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::binform::{CPoly, GaussInt};
use crate::exactnum::{Rational, Real, RealScalar, Ring};

/// Volume of `M = S³/I*` for the round unit metric: `2π²/120`.
pub const VOL_M: f64 = PI * PI / 60.0;

/// Failures of the polynomial layer.
#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    /// The Laplacian of the input is not a multiple of the expected power of `|x|²`.
    #[error("laplacian is not proportional to |x|^{0}")]
    NotProportional(usize),
    /// The input cannot be brought to a single homogeneous degree on the sphere.
    #[error("polynomial is not homogeneous modulo |x|^2 - 1 (degrees {0:?})")]
    NotHomogeneous(Vec<usize>),
    /// A quadrature rule failed its moment self-test.
    #[error("quadrature self-test failed: error {0:e} on exponent {1:?}")]
    QuadratureSelfTest(f64, [u16; 4]),
}

/// Sparse polynomial in `dim ∈ {3, 4}` real variables. Exponent slots beyond
/// `dim` are always zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    /// Number of variables.
    pub dim: usize,
    /// Exponent vector to coefficient; zero coefficients are never stored.
    pub terms: BTreeMap<[u16; 4], T>,
}

/// Alias matching the usual name for these objects.
pub type SpherePolynomial<T> = Poly<T>;

fn exp_add(a: &[u16; 4], b: &[u16; 4]) -> [u16; 4] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

impl<T: Ring> Poly<T> {
    /// The zero polynomial.
    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: BTreeMap::new() }
    }
    /// A constant.
    pub fn constant(dim: usize, c: T) -> Self {
        Self::monomial(dim, [0; 4], c)
    }
    /// `c·x^e`.
    pub fn monomial(dim: usize, e: [u16; 4], c: T) -> Self {
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(e, c);
        }
        p
    }
    /// The coordinate `x_i`.
    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = [0; 4];
        e[i] = 1;
        Self::monomial(dim, e, T::one())
    }
    /// `|x|² = Σ x_i²`.
    pub fn norm_sq(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            p = p.add(&Self::var(dim, i).mul(&Self::var(dim, i)));
        }
        p
    }
    /// True if there are no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn add_term(&mut self, e: [u16; 4], c: T) {
        if c.is_zero() {
            return;
        }
        let v = match self.terms.remove(&e) {
            Some(a) => a + c,
            None => c,
        };
        if !v.is_zero() {
            self.terms.insert(e, v);
        }
    }
    /// Sum.
    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
    /// Difference.
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&-T::one()))
    }
    /// Scalar multiple.
    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(*e, c.clone() * s.clone());
        }
        out
    }
    /// Product.
    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero(self.dim.max(o.dim));
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                out.add_term(exp_add(e1, e2), c1.clone() * c2.clone());
            }
        }
        out
    }
    /// Integer power.
    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.dim, T::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max().unwrap_or(0)
    }
    /// Set of degrees of the homogeneous components.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
    /// True if every term has the same degree.
    pub fn is_homogeneous(&self) -> bool {
        self.degrees().len() <= 1
    }
    /// `∂/∂x_i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = *e;
            f[i] -= 1;
            out.add_term(f, c.clone() * T::from_int(e[i] as i64));
        }
        out
    }
    /// Euclidean Laplacian `Σ ∂²/∂x_i²`.
    pub fn euclidean_laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            out = out.add(&self.partial(i).partial(i));
        }
        out
    }
    /// Substitute polynomials for the variables: `f(g₀, …, g_{dim−1})`, the
    /// result living in the ambient space of the `g`'s.
    pub fn compose(&self, g: &[Poly<T>]) -> Self {
        assert_eq!(g.len(), self.dim, "compose: one polynomial per variable");
        let dim_out = g[0].dim;
        let maxe: Vec<u16> = (0..self.dim).map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0)).collect();
        let powers: Vec<Vec<Poly<T>>> = (0..self.dim)
            .map(|i| {
                let mut v = vec![Poly::constant(dim_out, T::one())];
                for k in 1..=maxe[i] as usize {
                    let next = v[k - 1].mul(&g[i]);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out = Poly::zero(dim_out);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(dim_out, c.clone());
            for i in 0..self.dim {
                if e[i] > 0 {
                    t = t.mul(&powers[i][e[i] as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }
    /// Value at a point with coordinates in the coefficient ring.
    pub fn eval(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for i in 0..self.dim {
                if e[i] > 0 {
                    t = t * crate::exactnum::pow(&x[i], e[i] as u32);
                }
            }
            acc = acc + t;
        }
        acc
    }
    /// Map coefficients into another ring.
    pub fn map<S: Ring, F: Fn(&T) -> S>(&self, f: F) -> Poly<S> {
        let mut out = Poly::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(*e, f(c));
        }
        out
    }
    /// Normal form modulo `|x|² − 1`: every occurrence of `x_last²` is
    /// replaced by `1 − Σ_{i<last} x_i²` until the last exponent is at most 1.
    /// Two polynomials agree on the sphere iff their normal forms are equal.
    pub fn canonical(&self) -> Self {
        let last = self.dim - 1;
        let mut work = self.clone();
        loop {
            let mut done = Self::zero(self.dim);
            let mut pending = Self::zero(self.dim);
            for (e, c) in &work.terms {
                if e[last] < 2 {
                    done.add_term(*e, c.clone());
                } else {
                    let mut f = *e;
                    f[last] -= 2;
                    pending.add_term(f, c.clone());
                    for i in 0..last {
                        let mut g = f;
                        g[i] += 2;
                        pending.add_term(g, -c.clone());
                    }
                }
            }
            if pending.is_zero() {
                return done;
            }
            work = done.add(&pending);
        }
    }
    /// Multiply every component of degree `d < target` by `|x|^{target−d}`,
    /// which leaves sphere values unchanged. Fails on parity mismatch or
    /// degrees above the target.
    pub fn homogenize(&self, target: usize) -> Result<Self, PolyError> {
        let degs = self.degrees();
        if degs.iter().any(|&d| d > target || (target - d) % 2 != 0) {
            return Err(PolyError::NotHomogeneous(degs));
        }
        let r2 = Self::norm_sq(self.dim);
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let d: usize = e.iter().map(|&k| k as usize).sum();
            let t = Self::monomial(self.dim, *e, c.clone()).mul(&r2.pow(((target - d) / 2) as u32));
            out = out.add(&t);
        }
        Ok(out)
    }
}

impl<T: RealScalar> Poly<T> {
    /// Value at a floating point.
    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64();
                for i in 0..self.dim {
                    if e[i] > 0 {
                        t *= x[i].powi(e[i] as i32);
                    }
                }
                t
            })
            .sum()
    }
    /// Exact mean over the unit sphere `S^{dim−1}`.
    pub fn sphere_mean(&self) -> T {
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let m = monomial_sphere_mean(self.dim, e);
            if !m.is_zero() {
                acc = acc + c.clone() * T::from_rational(&m);
            }
        }
        acc
    }
    /// Integral over the unit sphere `S^{dim−1}`.
    pub fn sphere_integral(&self) -> f64 {
        self.sphere_mean().to_f64() * sphere_area(self.dim)
    }
    /// Integral over `M = S³/I*` of a right-invariant quartic-variable polynomial.
    pub fn integral_m(&self) -> f64 {
        assert_eq!(self.dim, 4);
        self.sphere_mean().to_f64() * VOL_M
    }
    /// Floating copy.
    pub fn to_f64_poly(&self) -> Poly<f64> {
        self.map(|c| c.to_f64())
    }
}

impl Poly<f64> {
    /// Drop coefficients below `tol` in magnitude.
    pub fn prune(&self, tol: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|_, c| c.abs() > tol);
        out
    }
}

/// Area of the unit sphere `S^{dim−1}`: `4π` for `dim = 3`, `2π²` for `dim = 4`.
pub fn sphere_area(dim: usize) -> f64 {
    match dim {
        3 => 4.0 * PI,
        4 => 2.0 * PI * PI,
        2 => 2.0 * PI,
        _ => panic!("sphere_area: unsupported dimension {dim}"),
    }
}

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `Γ(k + 1/2)/√π = (2k)!/(4^k k!)`.
fn half_gamma(k: u64) -> Rational {
    let mut r = Rational::one();
    for j in 0..k {
        r *= big(2 * j + 1) / big(2);
    }
    r
}

/// `Γ(s/2)/Γ(1/2)^{parity}` for the normalizing denominator, as a rational:
/// returns `Γ(K + dim/2)` divided by `√π` when `dim` is odd.
fn gamma_half_int(twice: u64) -> Rational {
    // Γ(twice/2), with the √π factor removed for odd `twice`.
    if twice % 2 == 0 {
        let n = twice / 2;
        (1..n).fold(Rational::one(), |acc, k| acc * big(k))
    } else {
        half_gamma((twice - 1) / 2)
    }
}

/// Exact mean of `x^e` over `S^{dim−1}`:
/// `Γ(dim/2) Π Γ((e_i+1)/2) / (Γ(1/2)^dim Γ((|e|+dim)/2))`, zero if any
/// exponent is odd.
pub fn monomial_sphere_mean(dim: usize, e: &[u16; 4]) -> Rational {
    if e.iter().any(|&k| k % 2 == 1) {
        return Rational::zero();
    }
    let ks: Vec<u64> = e[..dim].iter().map(|&k| k as u64 / 2).collect();
    let ktot: u64 = ks.iter().sum();
    let mut num = gamma_half_int(dim as u64);
    for &k in &ks {
        num *= half_gamma(k);
    }
    num / gamma_half_int(2 * ktot + dim as u64)
}

// ---------------------------------------------------------------------------
// The sextic, its correction and the Hopf lift

/// `P(x,y,z) = (τ²x² − y²)(τ²y² − z²)(τ²z² − x²)` exactly.
pub fn icosahedral_sextic() -> Poly<Real> {
    let t2 = Real::tau() * Real::tau();
    let sq = |i: usize| Poly::<Real>::var(3, i).mul(&Poly::var(3, i));
    let f = |i: usize, j: usize| sq(i).scale(&t2).sub(&sq(j));
    f(0, 1).mul(&f(1, 2)).mul(&f(2, 0))
}

/// Result of the harmonic correction `P̃ = P + c|x|^n`.
#[derive(Clone, Debug)]
pub struct HarmonicCorrection<T> {
    /// The harmonic polynomial `P̃`.
    pub corrected: Poly<T>,
    /// `κ` in `ΔP = κ|x|^{n−2}`.
    pub kappa: T,
    /// `c = −κ/(n(n+dim−2))`.
    pub c: T,
}

/// Make a homogeneous polynomial with `ΔP = κ|x|^{n−2}` harmonic by adding
/// `c|x|^n`, using `Δ|x|^n = n(n + dim − 2)|x|^{n−2}`.
pub fn harmonic_correction<T: RealScalar>(p: &Poly<T>) -> Result<HarmonicCorrection<T>, PolyError> {
    let n = p.degree();
    let dim = p.dim;
    let lap = p.euclidean_laplacian();
    if lap.is_zero() {
        return Ok(HarmonicCorrection { corrected: p.clone(), kappa: T::zero(), c: T::zero() });
    }
    if n < 2 || n % 2 == 1 {
        return Err(PolyError::NotProportional(n.saturating_sub(2)));
    }
    let r = Poly::<T>::norm_sq(dim).pow(((n - 2) / 2) as u32);
    // κ is the coefficient of x_0^{n−2} in |x|^{n−2}, which is 1.
    let mut lead = [0u16; 4];
    lead[0] = (n - 2) as u16;
    let kappa = lap.terms.get(&lead).cloned().unwrap_or_else(T::zero);
    if lap != r.scale(&kappa) {
        return Err(PolyError::NotProportional(n - 2));
    }
    let denom = Rational::from_integer(BigInt::from((n * (n + dim - 2)) as i64));
    let c = -(kappa.clone() * T::from_rational(&denom.recip()));
    let corrected = p.add(&Poly::norm_sq(dim).pow((n / 2) as u32).scale(&c));
    Ok(HarmonicCorrection { corrected, kappa, c })
}

/// The Hopf map in real quaternion coordinates `(a, b, c, d)`:
/// `(2(ac + bd), 2(bc − ad), a² + b² − c² − d²)`.
pub fn hopf_polys<T: Ring>() -> [Poly<T>; 3] {
    let v = |i| Poly::<T>::var(4, i);
    let two = T::from_int(2);
    let x = v(0).mul(&v(2)).add(&v(1).mul(&v(3))).scale(&two);
    let y = v(1).mul(&v(2)).sub(&v(0).mul(&v(3))).scale(&two);
    let z = v(0).mul(&v(0)).add(&v(1).mul(&v(1))).sub(&v(2).mul(&v(2))).sub(&v(3).mul(&v(3)));
    [x, y, z]
}

/// Compose a polynomial on `ℝ³` with the Hopf map.
pub fn hopf_lift<T: Ring>(f: &Poly<T>) -> Poly<T> {
    assert_eq!(f.dim, 3, "hopf_lift expects a polynomial on R^3");
    f.compose(&hopf_polys())
}

/// Compose a polynomial on `ℝ³` with a linear map: `x ↦ f(Rx)`.
pub fn rotate<T: Ring>(f: &Poly<T>, r: &[[T; 3]; 3]) -> Poly<T> {
    let g: Vec<Poly<T>> = (0..3)
        .map(|i| {
            (0..3).fold(Poly::zero(3), |acc, j| acc.add(&Poly::var(3, j).scale(&r[i][j])))
        })
        .collect();
    f.compose(&g)
}

/// The rotation taking Klein's icosahedral frame to the frame of `P`: its
/// columns are `e × v`, `e`, `v` with `v = (τ, 1, 0)/√(1+τ²)` a vertex of
/// `P`'s icosahedron and `e = (0, 0, 1)`. Note `√(1+τ²) = σ/2`.
pub fn frame_rotation() -> [[Real; 3]; 3] {
    let two_over_sigma = Real::frac(2, 1) * Real::sigma().inv().expect("σ ≠ 0");
    let v = [Real::tau() * two_over_sigma.clone(), two_over_sigma, Real::zero()];
    // e × v = (−v₁, v₀, 0)
    let w = [-v[1].clone(), v[0].clone(), Real::zero()];
    let e = [Real::zero(), Real::zero(), Real::one()];
    std::array::from_fn(|i| [w[i].clone(), e[i].clone(), v[i].clone()])
}

/// The unnormalized seed: the Hopf lift of `P̃∘R`, a degree-12 harmonic
/// polynomial on `ℝ⁴` with exact coefficients.
pub fn seed_polynomial_exact() -> Poly<Real> {
    let corr = harmonic_correction(&icosahedral_sextic()).expect("P has an invariant Laplacian");
    hopf_lift(&rotate(&corr.corrected, &frame_rotation()))
}

/// Sign and size of the seed relative to `A₆`: the exact scalar `r` with
/// `seed_polynomial_exact() = r·A₆`, or `None` if they are not proportional.
pub fn seed_to_a6_ratio() -> Option<Real> {
    let f0 = seed_polynomial_exact();
    let (re6, _) = cpoly_to_real(&crate::binform::coefficient_cpolys()[6]);
    let re6 = re6.map(Real::from_rational);
    let (e, c) = re6.terms.iter().next()?;
    let ratio = f0.terms.get(e)?.clone() * c.inv().ok()?;
    (f0 == re6.scale(&ratio)).then_some(ratio)
}

/// Certify `−Δ_{S³}f = n(n+2)f` for a polynomial restricted to the sphere:
/// after homogenizing to degree `n`, this holds iff `f` is harmonic on `ℝ⁴`.
/// Works for any ambient dimension with eigenvalue `n(n+dim−2)`.
pub fn sphere_laplacian_eigencheck<T: RealScalar>(f: &Poly<T>, n: usize) -> Result<bool, PolyError> {
    let h = f.homogenize(n)?;
    Ok(h.euclidean_laplacian().is_zero())
}

/// Harmonic projection of a homogeneous polynomial of degree `n`:
/// `Σ_k (−1)^k |x|^{2k} Δ^k f / (4^k k! Π_{m=1}^{k} (n + dim/2 − 1 − m))`.
pub fn harmonic_projection<T: RealScalar>(f: &Poly<T>) -> Result<Poly<T>, PolyError> {
    if !f.is_homogeneous() {
        return Err(PolyError::NotHomogeneous(f.degrees()));
    }
    let n = f.degree() as i64;
    let dim = f.dim as i64;
    let r2 = Poly::<T>::norm_sq(f.dim);
    let mut out = f.clone();
    let mut lap = f.clone();
    let mut coef = Rational::one();
    let mut rpow = Poly::constant(f.dim, T::one());
    for k in 1..=(n / 2) {
        lap = lap.euclidean_laplacian();
        if lap.is_zero() {
            break;
        }
        rpow = rpow.mul(&r2);
        // a = n + dim/2 − 1 − k, kept in halves.
        let a = Rational::new(BigInt::from(2 * n + dim - 2 - 2 * k), BigInt::from(2));
        coef = -coef / (a * big(4 * k as u64));
        out = out.add(&rpow.mul(&lap).scale(&T::from_rational(&coef)));
    }
    Ok(out)
}

/// Expand a polynomial in `α, ᾱ, β, β̄` into real coordinates
/// `α = a + ib`, `β = c + id`, returning real and imaginary parts.
pub fn cpoly_to_real(p: &CPoly<GaussInt>) -> (Poly<Rational>, Poly<Rational>) {
    type C = Complex<Rational>;
    let c = |re: i64, im: i64| C::new(Rational::from_integer(re.into()), Rational::from_integer(im.into()));
    let var = |i: usize, s: C| Poly::<C>::monomial(4, { let mut e = [0; 4]; e[i] = 1; e }, s);
    let alpha = var(0, c(1, 0)).add(&var(1, c(0, 1)));
    let alpha_bar = var(0, c(1, 0)).add(&var(1, c(0, -1)));
    let beta = var(2, c(1, 0)).add(&var(3, c(0, 1)));
    let beta_bar = var(2, c(1, 0)).add(&var(3, c(0, -1)));
    let gens = [alpha, alpha_bar, beta, beta_bar];
    let maxe: Vec<u16> = (0..4).map(|i| p.terms.keys().map(|e| e[i]).max().unwrap_or(0)).collect();
    let pows: Vec<Vec<Poly<C>>> = (0..4)
        .map(|i| {
            let mut v = vec![Poly::constant(4, C::one())];
            for k in 1..=maxe[i] as usize {
                let next = v[k - 1].mul(&gens[i]);
                v.push(next);
            }
            v
        })
        .collect();
    let mut out = Poly::<C>::zero(4);
    for (e, coef) in &p.terms {
        let mut t = Poly::constant(4, c(coef.re as i64, coef.im as i64));
        for i in 0..4 {
            if e[i] > 0 {
                t = t.mul(&pows[i][e[i] as usize]);
            }
        }
        out = out.add(&t);
    }
    (out.map(|z| z.re.clone()), out.map(|z| z.im.clone()))
}

// ---------------------------------------------------------------------------
// Quadrature on S³

/// Product rule on `S³` in Hopf coordinates `α = √u e^{iξ₁}`,
/// `β = √(1−u) e^{iξ₂}`, where the normalized measure is
/// `du dξ₁ dξ₂ / (4π²)` on `[0,1]×[0,2π)²`. Uniform grids in both angles,
/// Gauss–Legendre in `u`. Weights sum to one, so the rule computes means.
#[derive(Clone, Debug)]
pub struct Su2Quadrature {
    /// Nodes as points of `ℝ⁴`.
    pub nodes: Vec<[f64; 4]>,
    /// Weights (means, not integrals).
    pub weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub degree: usize,
    /// True if only a tenth of the angle grid was kept (see [`Su2Quadrature::reduced`]).
    pub reduced: bool,
}

impl Su2Quadrature {
    fn sizes(degree: usize) -> (usize, usize) {
        // Uniform grid with K points is exact for |frequency| < K; the radial
        // factor u^p (1−u)^r has p + r ≤ degree/2, needing 2n − 1 ≥ degree/2.
        let k = (degree + 1).div_ceil(10) * 10;
        let n = (degree + 2).div_ceil(4).max(1);
        (k, n)
    }

    fn build(degree: usize, reduce: bool) -> Self {
        let (k, n) = Self::sizes(degree);
        let gl = GaussLegendre::new(std::num::NonZeroUsize::new(n).expect("n ≥ 1"));
        let radial: Vec<(f64, f64)> =
            gl.as_node_weight_pairs().into_iter().map(|(x, w)| ((x + 1.0) / 2.0, w / 2.0)).collect();
        let first_range = if reduce { k / 10 } else { k };
        let fold = if reduce { 10.0 } else { 1.0 };
        let dw = 1.0 / (k * k) as f64;
        let mut nodes = Vec::with_capacity(first_range * k * n);
        let mut weights = Vec::with_capacity(first_range * k * n);
        for i1 in 0..first_range {
            let (s1, c1) = (2.0 * PI * i1 as f64 / k as f64).sin_cos();
            for i2 in 0..k {
                let (s2, c2) = (2.0 * PI * i2 as f64 / k as f64).sin_cos();
                for &(u, w) in &radial {
                    let (ra, rb) = (u.sqrt(), (1.0 - u).sqrt());
                    nodes.push([ra * c1, ra * s1, rb * c2, rb * s2]);
                    weights.push(w * dw * fold);
                }
            }
        }
        Su2Quadrature { nodes, weights, degree, reduced: reduce }
    }

    /// Full rule exact for polynomials of degree ≤ `degree`.
    pub fn new(degree: usize) -> Self {
        Self::build(degree, false)
    }

    /// Rule for integrands invariant under `(α, β) ↦ (ζα, ζ̄β)` with `ζ` a
    /// tenth root of unity. Every right-I*-invariant function has this
    /// symmetry (the subgroup generated by a diagonal order-10 element), so
    /// one tenth of the first angle grid suffices.
    pub fn reduced(degree: usize) -> Self {
        Self::build(degree, true)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True if the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mean of a function over `S³`.
    pub fn mean<F: Fn(&[f64; 4]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Compare the rule against exact monomial moments on a deterministic
    /// sample of monomials of degree `self.degree` and `self.degree − 1`
    /// (the hardest cases). For a reduced rule each monomial is first
    /// averaged over the reduction symmetry. Returns the worst absolute error.
    pub fn self_test(&self, tol: f64, samples: usize) -> Result<f64, PolyError> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        let twists: Vec<(f64, f64)> = if self.reduced {
            (0..10).map(|k| (2.0 * PI * k as f64 / 10.0).sin_cos()).collect()
        } else {
            vec![(0.0, 1.0)]
        };
        for s in 0..samples {
            let total = self.degree - (s % 2);
            let mut e = [0u16; 4];
            for _ in 0..total {
                e[rng.random_range(0..4)] += 1;
            }
            if s % 4 == 0 {
                // force an all-even exponent so nonzero moments are exercised
                for k in e.iter_mut() {
                    *k -= *k % 2;
                }
            }
            let exact = RealScalar::to_f64(&monomial_sphere_mean(4, &e));
            let mono = |x: &[f64; 4]| -> f64 {
                (0..4).map(|i| x[i].powi(e[i] as i32)).product()
            };
            let got = self.mean(|x| {
                twists
                    .iter()
                    .map(|&(sn, cs)| {
                        // (α, β) ↦ (ζα, ζ̄β)
                        let y = [
                            cs * x[0] - sn * x[1],
                            sn * x[0] + cs * x[1],
                            cs * x[2] + sn * x[3],
                            -sn * x[2] + cs * x[3],
                        ];
                        mono(&y)
                    })
                    .sum::<f64>()
                    / twists.len() as f64
            });
            let err = (got - exact).abs();
            if err > tol {
                return Err(PolyError::QuadratureSelfTest(err, e));
            }
            worst = worst.max(err);
        }
        Ok(worst)
    }
}

/// Exact mean over `S³` of a polynomial in `α, ᾱ, β, β̄` with Gaussian integer
/// coefficients, real part.
pub fn cpoly_mean(p: &CPoly<GaussInt>) -> Rational {
    p.mean_s3().0
}
