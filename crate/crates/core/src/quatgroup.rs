//! The binary icosahedral group as exact unit quaternions, the Hopf map,
//! stabilizers of Hopf fibers, and coset identification on `M = S³/I*`.
//!
//! Conventions. A quaternion `q = a + b𝑖 + c𝑗 + d𝑘` is identified with the
//! pair `(α, β) = (a + bi, c + di)` and with the SU(2) matrix
//! `U(q) = [[α, −β̄], [β, ᾱ]]`. The group acts on `S³` on the right: the
//! quaternion product `z·h` corresponds to applying `U(h)` to the column
//! `(α, β)ᵀ`. Hopf fibers are the left orbits `e^{it}z = (e^{it}α, e^{it}β)`.

use std::collections::HashMap;
use std::ops::Mul;

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{Nf, Real, Ring};

/// Errors from group generation.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    /// The closure did not terminate within the product budget.
    #[error("group closure exceeded {0} products; generators do not generate a finite group of the expected size")]
    NonClosure(usize),
    /// A generator is not a unit quaternion.
    #[error("generator {0} is not a unit quaternion")]
    NotUnit(usize),
}

/// Quaternion `a + b𝑖 + c𝑗 + d𝑘` over a scalar ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Quat<T> {
    /// Real part.
    pub a: T,
    /// 𝑖 component.
    pub b: T,
    /// 𝑗 component.
    pub c: T,
    /// 𝑘 component.
    pub d: T,
}

/// Exact unit quaternion with coordinates in the real number field.
pub type UnitQuaternion = Quat<Real>;
/// Floating unit quaternion.
pub type QuatF = Quat<f64>;

impl<T: Ring> Quat<T> {
    /// Build from coordinates.
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Quat { a, b, c, d }
    }
    /// The identity.
    pub fn one() -> Self {
        Quat::new(T::one(), T::zero(), T::zero(), T::zero())
    }
    /// Quaternion conjugate, the inverse of a unit quaternion.
    pub fn conj(&self) -> Self {
        Quat::new(self.a.clone(), -self.b.clone(), -self.c.clone(), -self.d.clone())
    }
    /// Negation.
    pub fn neg(&self) -> Self {
        Quat::new(-self.a.clone(), -self.b.clone(), -self.c.clone(), -self.d.clone())
    }
    /// `a² + b² + c² + d²`.
    pub fn norm_sqr(&self) -> T {
        self.a.clone() * self.a.clone()
            + self.b.clone() * self.b.clone()
            + self.c.clone() * self.c.clone()
            + self.d.clone() * self.d.clone()
    }
    /// Hamilton product.
    pub fn mul_q(&self, o: &Self) -> Self {
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&o.a, &o.b, &o.c, &o.d);
        let m = |x: &T, y: &T| x.clone() * y.clone();
        Quat::new(
            m(a1, a2) - m(b1, b2) - m(c1, c2) - m(d1, d2),
            m(a1, b2) + m(b1, a2) + m(c1, d2) - m(d1, c2),
            m(a1, c2) - m(b1, d2) + m(c1, a2) + m(d1, b2),
            m(a1, d2) + m(b1, c2) - m(c1, b2) + m(d1, a2),
        )
    }
}

impl<T: Ring> Mul for &Quat<T> {
    type Output = Quat<T>;
    fn mul(self, o: &Quat<T>) -> Quat<T> {
        self.mul_q(o)
    }
}

impl UnitQuaternion {
    /// Floating copy.
    pub fn to_f64(&self) -> QuatF {
        Quat::new(self.a.to_f64(), self.b.to_f64(), self.c.to_f64(), self.d.to_f64())
    }
    /// `α = a + bi` as an exact complex number.
    pub fn alpha(&self) -> Nf {
        Nf::new(self.a.clone(), self.b.clone())
    }
    /// `β = c + di` as an exact complex number.
    pub fn beta(&self) -> Nf {
        Nf::new(self.c.clone(), self.d.clone())
    }
    /// Exact ray `(α, β)`.
    pub fn ray(&self) -> ExactRay {
        ExactRay { alpha: self.alpha(), beta: self.beta() }
    }
}

impl QuatF {
    /// Coordinates as an array.
    pub fn to_array(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }
    /// From coordinates.
    pub fn from_array(x: [f64; 4]) -> Self {
        Quat::new(x[0], x[1], x[2], x[3])
    }
    /// From the complex pair `(α, β)`.
    pub fn from_pair(alpha: Complex64, beta: Complex64) -> Self {
        Quat::new(alpha.re, alpha.im, beta.re, beta.im)
    }
    /// `α = a + bi`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }
    /// `β = c + di`.
    pub fn beta(&self) -> Complex64 {
        Complex64::new(self.c, self.d)
    }
    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
    /// Scale to unit length.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Quat::new(self.a / n, self.b / n, self.c / n, self.d / n)
    }
    /// Euclidean distance in ℝ⁴.
    pub fn dist(&self, o: &Self) -> f64 {
        ((self.a - o.a).powi(2) + (self.b - o.b).powi(2) + (self.c - o.c).powi(2) + (self.d - o.d).powi(2)).sqrt()
    }
    /// Left multiplication by `e^{it}`, moving along the Hopf fiber.
    pub fn fiber_shift(&self, t: f64) -> Self {
        let e = Complex64::from_polar(1.0, t);
        QuatF::from_pair(e * self.alpha(), e * self.beta())
    }
}

/// An exact, not necessarily normalized, point `(α, β) ∈ ℂ²∖{0}`.
///
/// Points such as `(r, s e^{−iπ/4})` with irrational `r, s` are stored as a
/// ray whose squared norm is in the field; degree-`n` homogeneous quantities
/// are evaluated on the ray and divided by `(|α|² + |β|²)^{n/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactRay {
    /// First coordinate.
    pub alpha: Nf,
    /// Second coordinate.
    pub beta: Nf,
}

impl ExactRay {
    /// `|α|² + |β|²`.
    pub fn norm_sqr(&self) -> Real {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
    /// Normalized floating point on `S³`.
    pub fn to_unit(&self) -> QuatF {
        let n = self.norm_sqr().to_f64().sqrt();
        QuatF::from_pair(self.alpha.to_c64() / n, self.beta.to_c64() / n)
    }
    /// Apply `U(h)`: the ray of `z·h`.
    pub fn right_mul(&self, h: &UnitQuaternion) -> ExactRay {
        let (g, d) = (h.alpha(), h.beta());
        use crate::exactnum::Conj;
        ExactRay {
            alpha: &(&g * &self.alpha) - &(&d.conj() * &self.beta),
            beta: &(&d * &self.alpha) + &(&g.conj() * &self.beta),
        }
    }
    /// Exact test that `other` spans the same complex line.
    pub fn same_complex_line(&self, other: &ExactRay) -> bool {
        Zero::is_zero(&(&(&self.alpha * &other.beta) - &(&self.beta * &other.alpha)))
    }
    /// Unnormalized Hopf image `(2 Re αβ̄, 2 Im αβ̄, |α|² − |β|²)`; divide by
    /// `norm_sqr` for the point of `S²`.
    pub fn hopf_unnormalized(&self) -> [Real; 3] {
        use crate::exactnum::Conj;
        let w = &self.alpha * &self.beta.conj();
        let two = Real::frac(2, 1);
        [&two * &w.re, &two * &w.im, self.alpha.norm_sqr() - self.beta.norm_sqr()]
    }
}

/// Hopf map `(2 Re αβ̄, 2 Im αβ̄, |α|² − |β|²)` on a floating unit quaternion.
pub fn hopf(z: &QuatF) -> [f64; 3] {
    let w = z.alpha() * z.beta().conj();
    [2.0 * w.re, 2.0 * w.im, z.alpha().norm_sqr() - z.beta().norm_sqr()]
}

/// Exact Hopf image of an exact unit quaternion.
pub fn hopf_exact(z: &UnitQuaternion) -> [Real; 3] {
    z.ray().hopf_unnormalized()
}

/// The 120-element group with product and inverse tables.
#[derive(Clone, Debug)]
pub struct GroupTable {
    /// Exact elements; index 0 is the identity.
    pub elements: Vec<UnitQuaternion>,
    /// Floating copies of `elements`.
    pub floats: Vec<QuatF>,
    /// `product[i][j]` is the index of `elements[i]·elements[j]`.
    pub product: Vec<Vec<usize>>,
    /// `inverse[i]` is the index of the inverse of `elements[i]`.
    pub inverse: Vec<usize>,
}

/// Klein's generators of the binary icosahedral group in quaternion form.
///
/// `S` has SU(2) matrix `diag(ε³, ε²)` and `T` the matrix
/// `(1/√5)[[−(ε−ε⁴), ε²−ε³], [ε²−ε³, ε−ε⁴]]` with `ε = e^{2πi/5}`; these fix
/// the binary form `x¹¹y + 11x⁶y⁶ − xy¹¹`. Using `ε − ε⁴ = iσ/2` and
/// `ε² − ε³ = 2√5 i/σ` all coordinates lie in ℚ(√5, σ).
pub fn klein_generators() -> Vec<UnitQuaternion> {
    let sigma_inv = Real::sigma().inv().expect("sigma is nonzero");
    let sqrt5 = Real::sqrt5();
    let s = Quat::new(
        -Real::tau() * Real::frac(1, 2),
        -(sqrt5.clone() * sigma_inv.clone()),
        Real::zero(),
        Real::zero(),
    );
    // −σ/(2√5) = −σ√5/10
    let t = Quat::new(
        Real::zero(),
        -(Real::sigma() * sqrt5 * Real::frac(1, 10)),
        Real::zero(),
        Real::frac(2, 1) * sigma_inv,
    );
    vec![s, t]
}

/// Safety bound on the number of products tried during closure.
pub const CLOSURE_BUDGET: usize = 10_000;

/// Generate the group closed under multiplication from exact unit generators.
pub fn generate_group(generators: &[UnitQuaternion]) -> Result<GroupTable, GroupError> {
    for (k, g) in generators.iter().enumerate() {
        if g.norm_sqr() != Real::one() {
            return Err(GroupError::NotUnit(k));
        }
    }
    let mut elements = vec![UnitQuaternion::one()];
    let mut index: HashMap<UnitQuaternion, usize> = HashMap::new();
    index.insert(elements[0].clone(), 0);
    let mut frontier = vec![0usize];
    let mut products = 0usize;
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &i in &frontier {
            for g in generators {
                products += 1;
                if products > CLOSURE_BUDGET {
                    return Err(GroupError::NonClosure(CLOSURE_BUDGET));
                }
                let p = elements[i].mul_q(g);
                if !index.contains_key(&p) {
                    index.insert(p.clone(), elements.len());
                    next.push(elements.len());
                    elements.push(p);
                }
            }
        }
        frontier = next;
    }
    let floats: Vec<QuatF> = elements.iter().map(|e| e.to_f64()).collect();
    let n = elements.len();
    // Product table: locate each floating product among the elements, then
    // confirm exactly. Distinct elements are at distance ≥ 0.6 in ℝ⁴, so the
    // nearest floating match is the only candidate.
    let mut product = vec![vec![0usize; n]; n];
    for i in 0..n {
        for j in 0..n {
            let p = floats[i].mul_q(&floats[j]);
            let k = nearest(&floats, &p);
            product[i][j] = k;
        }
    }
    let inverse: Vec<usize> = (0..n).map(|i| (0..n).find(|&j| product[i][j] == 0).expect("inverse exists")).collect();
    let table = GroupTable { elements, floats, product, inverse };
    Ok(table)
}

fn nearest(pts: &[QuatF], p: &QuatF) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (k, q) in pts.iter().enumerate() {
        let d = q.dist(p);
        if d < best.0 {
            best = (d, k);
        }
    }
    best.1
}

/// Report on the group structure.
#[derive(Clone, Debug, Serialize)]
pub struct GroupReport {
    /// Number of elements.
    pub order: usize,
    /// `(element order, count)` pairs in increasing order.
    pub element_orders: Vec<(usize, usize)>,
    /// Orbit sizes of the Hopf images of the vertex, face and edge lifts.
    pub orbit_sizes: [usize; 3],
    /// Stabilizer orders of the lines ℂz₅, ℂz₃, ℂz₂.
    pub stabilizer_orders: [usize; 3],
    /// Whether the product table passed the exact closure check.
    pub table_verified: bool,
}

impl GroupTable {
    /// Number of elements.
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    /// True for the trivial table.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Exact verification of the product table, the identity and inverses.
    ///
    /// Every entry `product[i][j]` is recomputed in exact arithmetic, so this
    /// is a complete closure check of the table.
    pub fn verify_exact(&self) -> bool {
        let n = self.len();
        if self.elements[0] != UnitQuaternion::one() {
            return false;
        }
        for i in 0..n {
            if self.product[i][self.inverse[i]] != 0 || self.product[self.inverse[i]][i] != 0 {
                return false;
            }
            for j in 0..n {
                if self.elements[i].mul_q(&self.elements[j]) != self.elements[self.product[i][j]] {
                    return false;
                }
            }
        }
        true
    }

    /// Order of element `i`.
    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut cur = i;
        while cur != 0 {
            cur = self.product[cur][i];
            k += 1;
        }
        k
    }

    /// Histogram of element orders.
    pub fn order_histogram(&self) -> Vec<(usize, usize)> {
        let mut h: std::collections::BTreeMap<usize, usize> = Default::default();
        for i in 0..self.len() {
            *h.entry(self.element_order(i)).or_default() += 1;
        }
        h.into_iter().collect()
    }

    /// The orbit `{z·h : h ∈ I*}` of a floating point.
    pub fn orbit(&self, z: &QuatF) -> Vec<QuatF> {
        self.floats.iter().map(|h| z.mul_q(h)).collect()
    }

    /// Smallest distance `|z − z·h| = |1 − h|` over `h ≠ 1`.
    pub fn min_coset_separation(&self) -> f64 {
        let one = QuatF::one();
        self.floats[1..].iter().map(|h| h.dist(&one)).fold(f64::INFINITY, f64::min)
    }

    /// The representative of the orbit of `z` nearest to the identity: the
    /// element `z·h` with the largest real part. This is the Dirichlet domain
    /// of the action centred at 1.
    pub fn dirichlet_representative(&self, z: &QuatF) -> QuatF {
        let mut best = (f64::NEG_INFINITY, z.clone());
        for h in &self.floats {
            let p = z.mul_q(h);
            if p.a > best.0 {
                best = (p.a, p);
            }
        }
        best.1
    }

    /// Index of the first element of the given order.
    pub fn first_of_order(&self, order: usize) -> Option<usize> {
        (0..self.len()).find(|&i| self.element_order(i) == order)
    }

    /// Group report with the exceptional-fiber data.
    pub fn report(&self) -> GroupReport {
        let pts = ExceptionalPoints::new(self);
        GroupReport {
            order: self.len(),
            element_orders: self.order_histogram(),
            orbit_sizes: [
                hopf_orbit_size(&pts.z5.to_unit(), self, 1e-9),
                hopf_orbit_size(&pts.z3.to_unit(), self, 1e-9),
                hopf_orbit_size(&pts.z2.to_unit(), self, 1e-9),
            ],
            stabilizer_orders: [
                fiber_stabilizer_order_exact(&pts.z5, self),
                fiber_stabilizer_order_exact(&pts.z3, self),
                fiber_stabilizer_order_exact(&pts.z2, self),
            ],
            table_verified: self.verify_exact(),
        }
    }
}

/// The binary icosahedral group from Klein's generators.
pub fn binary_icosahedral() -> GroupTable {
    generate_group(&klein_generators()).expect("Klein generators close up")
}

/// Order of the subgroup of the group preserving the complex line `ℂ·z`,
/// decided exactly.
pub fn fiber_stabilizer_order_exact(z: &ExactRay, g: &GroupTable) -> usize {
    g.elements.iter().filter(|h| z.right_mul(h).same_complex_line(z)).count()
}

/// Floating version of [`fiber_stabilizer_order_exact`]: counts `h` with
/// `|det[(z·h), z]| < tol`.
pub fn fiber_stabilizer_order(z: &QuatF, g: &GroupTable, tol: f64) -> usize {
    g.floats
        .iter()
        .filter(|h| {
            let p = z.mul_q(h);
            (p.alpha() * z.beta() - p.beta() * z.alpha()).norm() < tol
        })
        .count()
}

/// Whether `z2 = z1·h` within `tol` for some `h` in the group.
pub fn same_coset(z1: &QuatF, z2: &QuatF, g: &GroupTable, tol: f64) -> bool {
    g.floats.iter().any(|h| z1.mul_q(h).dist(z2) < tol)
}

/// Distance in `S³/I*` between two points: `min_h |z1·h − z2|`.
pub fn coset_distance(z1: &QuatF, z2: &QuatF, g: &GroupTable) -> f64 {
    g.floats.iter().map(|h| z1.mul_q(h).dist(z2)).fold(f64::INFINITY, f64::min)
}

/// The distinct Hopf images `hopf(z·h)`, deduplicated at `tol`.
pub fn hopf_orbit(z: &QuatF, g: &GroupTable, tol: f64) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for h in &g.floats {
        let p = hopf(&z.mul_q(h));
        if !out.iter().any(|q| dist3(q, &p) < tol) {
            out.push(p);
        }
    }
    out
}

/// Size of the A₅-orbit of `hopf(z)`.
pub fn hopf_orbit_size(z: &QuatF, g: &GroupTable, tol: f64) -> usize {
    hopf_orbit(z, g, tol).len()
}

pub(crate) fn dist3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Lifts of the three exceptional fibers used throughout.
#[derive(Clone, Debug)]
pub struct ExceptionalPoints {
    /// Order-5 lift `z₅ = (1, 0)`, over an icosahedral vertex.
    pub z5: ExactRay,
    /// Order-3 lift over a face centre: an eigenvector of the first order-6
    /// element of the table.
    pub z3: ExactRay,
    /// Order-2 lift `z₂ = (i, 1)/√2`, over an edge midpoint.
    pub z2: ExactRay,
}

impl ExceptionalPoints {
    /// Build the three lifts for the given group table.
    pub fn new(g: &GroupTable) -> Self {
        let z5 = ExactRay { alpha: Nf::one(), beta: Nf::zero() };
        let z2 = ExactRay { alpha: Nf::i(), beta: Nf::one() };
        ExceptionalPoints { z5, z3: face_centre_lift(g), z2 }
    }
}

/// An exact lift of a face-centre fiber: the `e^{iπ/3}`-eigenvector
/// `(b, λ − a)` of `U(h) = [[a, b], [c, d]]` for the first order-6 element `h`.
pub fn face_centre_lift(g: &GroupTable) -> ExactRay {
    use crate::exactnum::Conj;
    let h = &g.elements[g.first_of_order(6).expect("an element of order 6 exists")];
    let (gamma, delta) = (h.alpha(), h.beta());
    // U(h) = [[γ, −δ̄], [δ, γ̄]]
    let a = gamma.clone();
    let b = -delta.conj();
    let lambda = Nf::new(Real::frac(1, 2), Real::sqrt3() * Real::frac(1, 2));
    if Zero::is_zero(&b) {
        // U(h) diagonal: a coordinate axis is the eigenvector.
        if a == lambda {
            ExactRay { alpha: Nf::one(), beta: Nf::zero() }
        } else {
            ExactRay { alpha: Nf::zero(), beta: Nf::one() }
        }
    } else {
        ExactRay { alpha: b, beta: &lambda - &a }
    }
}

/// The order-3 point `z₃ = (r, s e^{−iπ/4})` with `r² = (1 + 1/√3)/2`,
/// `s² = (1 − 1/√3)/2`, stored as the exact ray `(1, (√3 − 1)(1 − i)/2)`.
///
/// Its Hopf image is `(1, 1, 1)/√3`, a face centre of the icosahedron in the
/// frame of the sextic `P`; in the frame of the group generated by
/// [`klein_generators`] the same point lies on a generic fiber.
pub fn z3_sextic_frame() -> ExactRay {
    let c = (Real::sqrt3() - Real::one()) * Real::frac(1, 2);
    ExactRay { alpha: Nf::one(), beta: Nf::new(c.clone(), -c) }
}
