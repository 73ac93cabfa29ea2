//! Constrained critical points and their Hessian classification on `S²` and
//! on `M = S³/I*`: the critical set of the sextic, exact Hessians at the
//! exceptional points, Morse censuses of right-invariant functions by
//! multistart Newton, and tubular reduction along exceptional circles.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::binform::{coefficient_mean_squares, MatrixCoefficientFunction};
use crate::exactnum::{Real, RealScalar};
use crate::jet::{Jet, SphereFunction};
use crate::quatgroup::{hopf, hopf_orbit, ExceptionalPoints, GroupTable, QuatF};
use crate::spherepoly::{Poly, VOL_M};

/// Failures of the critical-point layer.
#[derive(Debug, Error, PartialEq)]
pub enum CritError {
    /// The point is not a constrained critical point.
    #[error("point is not critical: gradient is not proportional to the point")]
    NotCritical,
    /// The function is not invariant under the right action.
    #[error("function is not right invariant: defect {0:e}")]
    NotInvariant(f64),
    /// The normal Hessian became singular along a circle.
    #[error("normal Hessian not invertible at theta = {0}")]
    NormalHessianSingular(f64),
    /// Newton failed to find the normal critical point at some angle.
    #[error("normal Newton iteration failed at theta = {0}")]
    NormalNewtonFailed(f64),
}

// ---------------------------------------------------------------------------
// Polynomial evaluator

/// A polynomial on `ℝ^D` with precomputed gradient and Hessian polynomials.
#[derive(Clone, Debug)]
pub struct PolyFunction<const D: usize> {
    f: Poly<f64>,
    grad: Vec<Poly<f64>>,
    hess: Vec<Vec<Poly<f64>>>,
}

impl<const D: usize> PolyFunction<D> {
    /// Differentiate once and twice.
    pub fn new(f: Poly<f64>) -> Self {
        assert_eq!(f.dim, D, "dimension mismatch");
        let grad: Vec<Poly<f64>> = (0..D).map(|i| f.partial(i)).collect();
        let hess = (0..D).map(|i| (0..D).map(|j| grad[i].partial(j)).collect()).collect();
        PolyFunction { f, grad, hess }
    }
}

impl<const D: usize> SphereFunction<D> for PolyFunction<D> {
    fn jet(&self, x: &[f64; D]) -> Jet<D> {
        let mut j = Jet::zero();
        j.value = self.f.eval_f64(x);
        for a in 0..D {
            j.grad[a] = self.grad[a].eval_f64(x);
            for b in a..D {
                let v = self.hess[a][b].eval_f64(x);
                j.hess[a][b] = v;
                j.hess[b][a] = v;
            }
        }
        j
    }
    fn value(&self, x: &[f64; D]) -> f64 {
        self.f.eval_f64(x)
    }
}

// ---------------------------------------------------------------------------
// Riemannian Newton on spheres

fn dot<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize<const D: usize>(x: &mut [f64; D]) {
    let n = dot(x, x).sqrt();
    for v in x.iter_mut() {
        *v /= n;
    }
}

/// Orthonormal tangent frame at a point of `S^{D−1}`. On `S³` the frame is
/// `(i·x, j·x, k·x)` so that the first vector is the Hopf fiber direction;
/// otherwise it is obtained by Gram–Schmidt.
pub fn tangent_frame<const D: usize>(x: &[f64; D]) -> Vec<[f64; D]> {
    if D == 4 {
        let (a, b, c, d) = (x[0], x[1], x[2], x[3]);
        let mk = |v: [f64; 4]| -> [f64; D] { std::array::from_fn(|i| v[i]) };
        return vec![mk([-b, a, -d, c]), mk([-c, d, a, -b]), mk([-d, -c, b, a])];
    }
    let mut out: Vec<[f64; D]> = Vec::with_capacity(D - 1);
    let mut order: Vec<usize> = (0..D).collect();
    order.sort_by(|&i, &j| x[i].abs().partial_cmp(&x[j].abs()).unwrap());
    for &k in &order {
        if out.len() == D - 1 {
            break;
        }
        let mut v = [0.0; D];
        v[k] = 1.0;
        let p = dot(&v, x);
        for i in 0..D {
            v[i] -= p * x[i];
        }
        for u in &out {
            let p = dot(&v, u);
            for i in 0..D {
                v[i] -= p * u[i];
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            for vi in v.iter_mut() {
                *vi /= n;
            }
            out.push(v);
        }
    }
    out
}

/// Riemannian gradient and Hessian in a tangent frame, together with the
/// normal derivative `x·∇f` (twice the Lagrange multiplier).
pub struct SphereDerivatives {
    /// Function value.
    pub value: f64,
    /// Gradient coordinates in the frame.
    pub grad: Vec<f64>,
    /// Hessian `Tᵀ(∇²f − (x·∇f)I)T`.
    pub hess: DMatrix<f64>,
    /// `x·∇f`.
    pub normal: f64,
}

/// Project a Euclidean jet to the sphere in the given frame.
pub fn sphere_derivatives<const D: usize>(jet: &Jet<D>, x: &[f64; D], frame: &[[f64; D]]) -> SphereDerivatives {
    let normal = dot(&jet.grad, x);
    let m = frame.len();
    let grad: Vec<f64> = frame.iter().map(|t| dot(t, &jet.grad)).collect();
    let mut hess = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let mut s = 0.0;
            for i in 0..D {
                for j in 0..D {
                    s += frame[a][i] * jet.hess[i][j] * frame[b][j];
                }
            }
            if a == b {
                s -= normal;
            }
            hess[(a, b)] = s;
            hess[(b, a)] = s;
        }
    }
    SphereDerivatives { value: jet.value, grad, hess, normal }
}

/// Tolerances for Newton and classification.
#[derive(Clone, Debug, Serialize)]
pub struct NewtonOptions {
    /// Accept when the Riemannian gradient is at most `grad_tol·max(1, |f|)`.
    pub grad_tol: f64,
    /// Maximum iterations.
    pub max_iter: usize,
    /// Step length cap (radians).
    pub step_cap: f64,
    /// Relative eigenvalue floor for the pseudo-inverse and for Bott directions.
    pub degeneracy_floor: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { grad_tol: 1e-10, max_iter: 120, step_cap: 0.5, degeneracy_floor: 1e-7 }
    }
}

/// Outcome of one Newton solve.
#[derive(Clone, Debug)]
pub struct NewtonResult<const D: usize> {
    /// Final point.
    pub x: [f64; D],
    /// Final Riemannian gradient norm.
    pub grad_norm: f64,
    /// Function value at `x`.
    pub value: f64,
    /// Whether the tolerance was met.
    pub converged: bool,
}

fn grad_norm_at<const D: usize>(f: &dyn SphereFunction<D>, x: &[f64; D]) -> (f64, f64) {
    let jet = f.jet(x);
    let frame = tangent_frame(x);
    let g: f64 = frame.iter().map(|t| dot(t, &jet.grad).powi(2)).sum::<f64>().sqrt();
    (g, jet.value)
}

/// Newton's method for a critical point of `f|_{S^{D−1}}`, with a
/// pseudo-inverse for degenerate directions, a step cap and a backtracking
/// search on the gradient norm.
pub fn sphere_newton<const D: usize>(f: &dyn SphereFunction<D>, x0: &[f64; D], opts: &NewtonOptions) -> NewtonResult<D> {
    let mut x = *x0;
    normalize(&mut x);
    let mut last = (f64::INFINITY, 0.0);
    for _ in 0..opts.max_iter {
        let jet = f.jet(&x);
        let frame = tangent_frame(&x);
        let sd = sphere_derivatives(&jet, &x, &frame);
        let gn = sd.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        last = (gn, jet.value);
        if gn <= opts.grad_tol * jet.value.abs().max(1.0) {
            return NewtonResult { x, grad_norm: gn, value: jet.value, converged: true };
        }
        let eig = SymmetricEigen::new(sd.hess.clone());
        let emax = eig.eigenvalues.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let m = frame.len();
        let mut step = vec![0.0; m];
        for k in 0..m {
            let e = eig.eigenvalues[k];
            if e.abs() <= opts.degeneracy_floor * emax {
                continue;
            }
            let v = eig.eigenvectors.column(k);
            let proj: f64 = (0..m).map(|a| v[a] * sd.grad[a]).sum();
            for a in 0..m {
                step[a] -= v[a] * proj / e;
            }
        }
        let sn = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        if sn > opts.step_cap {
            for s in step.iter_mut() {
                *s *= opts.step_cap / sn;
            }
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..10 {
            let mut y = x;
            for a in 0..m {
                for i in 0..D {
                    y[i] += t * step[a] * frame[a][i];
                }
            }
            normalize(&mut y);
            let (g2, _) = grad_norm_at(f, &y);
            if g2 < gn {
                accepted = Some(y);
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some(y) => x = y,
            None => {
                // No descent in the gradient norm: take the full step anyway
                // and let the iteration budget decide.
                for a in 0..m {
                    for i in 0..D {
                        x[i] += step[a] * frame[a][i];
                    }
                }
                normalize(&mut x);
            }
        }
    }
    let (gn, v) = grad_norm_at(f, &x);
    let conv = gn <= opts.grad_tol * v.abs().max(1.0);
    NewtonResult { x, grad_norm: gn.min(last.0), value: v, converged: conv }
}

// ---------------------------------------------------------------------------
// Records and censuses

/// Which exceptional orbit a critical point lies over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum OrbitLabel {
    /// Over an icosahedral vertex (order 5).
    Vertex,
    /// Over a face centre (order 3).
    Face,
    /// Over an edge midpoint (order 2).
    Edge,
    /// Elsewhere.
    Other,
}

impl OrbitLabel {
    /// Circle name `C5`, `C3`, `C2` or `other`.
    pub fn circle_name(self) -> &'static str {
        match self {
            OrbitLabel::Vertex => "C5",
            OrbitLabel::Face => "C3",
            OrbitLabel::Edge => "C2",
            OrbitLabel::Other => "other",
        }
    }
    /// Order `m` of the exceptional point (1 for generic points).
    pub fn order(self) -> usize {
        match self {
            OrbitLabel::Vertex => 5,
            OrbitLabel::Face => 3,
            OrbitLabel::Edge => 2,
            OrbitLabel::Other => 1,
        }
    }
}

/// One critical point.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalPointRecord {
    /// Location on the sphere.
    pub location: Vec<f64>,
    /// Function value.
    pub value: f64,
    /// Lagrange multiplier `λ` with `∇f = 2λx`.
    pub lagrange: f64,
    /// Eigenvalues of the Riemannian Hessian, ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Number of negative eigenvalues among the nondegenerate ones.
    pub morse_index: usize,
    /// Riemannian gradient norm after polishing.
    pub grad_norm: f64,
    /// True if some eigenvalue is below the degeneracy floor.
    pub degenerate: bool,
    /// True if the degenerate direction is the Hopf fiber (S³ only).
    pub fiber_kernel: bool,
    /// Nearest exceptional orbit.
    pub label: OrbitLabel,
}

/// Census of the critical points of one function.
#[derive(Clone, Debug, Serialize)]
pub struct MorseCensus {
    /// Function label.
    pub function: String,
    /// Critical points, one per class.
    pub records: Vec<CriticalPointRecord>,
    /// Number of Morse points of each index `0..=dim`.
    pub counts_by_index: Vec<usize>,
    /// Number of Morse points over each exceptional circle `[C5, C3, C2, other]`.
    pub counts_by_circle: [usize; 4],
    /// Number of nondegenerate critical points.
    pub total: usize,
    /// Critical circles found (degenerate points grouped by fiber orbit).
    pub bott_circles: Vec<OrbitLabel>,
    /// `Σ (−1)^index` over Morse points.
    pub euler_sum: i64,
    /// For `M`: number of points on `S³`, always `120·total` when the action is free.
    pub s3_count: usize,
    /// Starts that failed to converge.
    pub failed_starts: usize,
}

fn classify(sd: &SphereDerivatives, floor: f64) -> (Vec<f64>, usize, bool, Option<Vec<f64>>) {
    let eig = SymmetricEigen::new(sd.hess.clone());
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..eig.eigenvalues.len())
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let emax = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let mut index = 0;
    let mut kernel = None;
    for (e, v) in &pairs {
        if e.abs() <= floor * emax {
            kernel = Some(v.clone());
        } else if *e < 0.0 {
            index += 1;
        }
    }
    let degenerate = kernel.is_some();
    (pairs.into_iter().map(|p| p.0).collect(), index, degenerate, kernel)
}

fn finish_census(function: &str, records: Vec<CriticalPointRecord>, dim: usize, failed: usize, s3_factor: usize) -> MorseCensus {
    let mut counts_by_index = vec![0; dim + 1];
    let mut counts_by_circle = [0; 4];
    let mut bott: Vec<OrbitLabel> = Vec::new();
    let mut total = 0;
    let mut euler = 0i64;
    for r in &records {
        if r.degenerate {
            continue;
        }
        total += 1;
        counts_by_index[r.morse_index] += 1;
        euler += if r.morse_index % 2 == 0 { 1 } else { -1 };
        let k = match r.label {
            OrbitLabel::Vertex => 0,
            OrbitLabel::Face => 1,
            OrbitLabel::Edge => 2,
            OrbitLabel::Other => 3,
        };
        counts_by_circle[k] += 1;
    }
    for r in records.iter().filter(|r| r.degenerate && r.fiber_kernel) {
        if !bott.contains(&r.label) || r.label == OrbitLabel::Other {
            bott.push(r.label);
        }
    }
    bott.sort();
    MorseCensus {
        function: function.to_string(),
        counts_by_index,
        counts_by_circle,
        total,
        bott_circles: bott,
        euler_sum: euler,
        s3_count: total * s3_factor,
        failed_starts: failed,
        records,
    }
}

// ---------------------------------------------------------------------------
// S² census and exact Hessians

/// Quasi-uniform points on `S²` (Fibonacci lattice).
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Options for the `S²` census.
#[derive(Clone, Debug)]
pub struct S2Options {
    /// Number of Fibonacci starts.
    pub starts: usize,
    /// Merge distance.
    pub dedup_tol: f64,
    /// Newton settings.
    pub newton: NewtonOptions,
    /// Orbits used for labels, in the order vertex, face, edge.
    pub orbits: Option<[Vec<[f64; 3]>; 3]>,
}

impl Default for S2Options {
    fn default() -> Self {
        S2Options { starts: 4000, dedup_tol: 1e-6, newton: NewtonOptions::default(), orbits: None }
    }
}

fn label_from_orbits(p: &[f64; 3], orbits: &[Vec<[f64; 3]>; 3], radius: f64) -> OrbitLabel {
    let labels = [OrbitLabel::Vertex, OrbitLabel::Face, OrbitLabel::Edge];
    let mut best = (radius, OrbitLabel::Other);
    for (orb, lab) in orbits.iter().zip(labels) {
        for q in orb {
            let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
            if d < best.0 {
                best = (d, lab);
            }
        }
    }
    best.1
}

/// All constrained critical points of `f|_{S²}` by multistart Newton.
pub fn s2_critical_census(label: &str, f: &dyn SphereFunction<3>, opts: &S2Options) -> MorseCensus {
    let starts = fibonacci_sphere(opts.starts);
    let results: Vec<NewtonResult<3>> = starts.par_iter().map(|x| sphere_newton(f, x, &opts.newton)).collect();
    let failed = results.iter().filter(|r| !r.converged).count();
    let mut pts: Vec<[f64; 3]> = Vec::new();
    for r in results.iter().filter(|r| r.converged) {
        if !pts.iter().any(|p| dist(p, &r.x) < opts.dedup_tol.max(1e-6)) {
            pts.push(r.x);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let records = pts
        .iter()
        .map(|x| {
            let jet = f.jet(x);
            let frame = tangent_frame(x);
            let sd = sphere_derivatives(&jet, x, &frame);
            let (eigs, index, degenerate, _) = classify(&sd, opts.newton.degeneracy_floor);
            let gn = sd.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            CriticalPointRecord {
                location: x.to_vec(),
                value: jet.value,
                lagrange: sd.normal / 2.0,
                hessian_eigenvalues: eigs,
                morse_index: index,
                grad_norm: gn,
                degenerate,
                fiber_kernel: false,
                label: opts.orbits.as_ref().map_or(OrbitLabel::Other, |o| label_from_orbits(x, o, 1e-6)),
            }
        })
        .collect();
    finish_census(label, records, 2, failed, 1)
}

fn dist<const D: usize>(a: &[f64; D], b: &[f64; D]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Distinct values of a census, clustered at a relative tolerance, with
/// multiplicities: for an invariant function each value is one orbit.
pub fn value_orbits(c: &MorseCensus, tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    for r in &c.records {
        match out.iter_mut().find(|(v, _)| (v - r.value).abs() <= tol * v.abs().max(1.0)) {
            Some(e) => e.1 += 1,
            None => out.push((r.value, 1)),
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// The constrained Hessian `(Hess P(p) − 2λI)` as a bilinear form on the
/// (not necessarily orthonormal) tangent vectors `u, v`, in exact arithmetic:
/// returns `[[uHu, uHv], [vHu, vHv]]` and `λ`.
pub fn exact_hessian_at(f: &Poly<Real>, p: &[Real; 3], u: &[Real; 3], v: &[Real; 3]) -> Result<([[Real; 2]; 2], Real), CritError> {
    let grad: Vec<Real> = (0..3).map(|i| f.partial(i).eval(p)).collect();
    let pp = dot_r(p, p);
    let two_lambda = dot_r(&grad, p) * pp.inv().map_err(|_| CritError::NotCritical)?;
    for i in 0..3 {
        if grad[i] != two_lambda.clone() * p[i].clone() {
            return Err(CritError::NotCritical);
        }
    }
    let hess: Vec<Vec<Real>> = (0..3).map(|i| (0..3).map(|j| f.partial(i).partial(j).eval(p)).collect()).collect();
    let form = |a: &[Real; 3], b: &[Real; 3]| {
        let mut s = Real::zero();
        for i in 0..3 {
            for j in 0..3 {
                s = s + a[i].clone() * hess[i][j].clone() * b[j].clone();
            }
            s = s - two_lambda.clone() * a[i].clone() * b[i].clone();
        }
        s
    };
    let m = [[form(u, u), form(u, v)], [form(v, u), form(v, v)]];
    Ok((m, two_lambda * Real::frac(1, 2)))
}

fn dot_r(a: &[Real], b: &[Real]) -> Real {
    a.iter().zip(b).fold(Real::zero(), |s, (x, y)| s + x.clone() * y.clone())
}

/// The three exceptional points of the sextic with the tangent bases used
/// for its exact Hessians: `(p, u, v)` for the vertex, face and edge points.
pub fn sextic_exceptional_points() -> [([Real; 3], [Real; 3], [Real; 3]); 3] {
    let tau = Real::tau();
    let two_over_sigma = Real::frac(2, 1) * Real::sigma().inv().expect("σ ≠ 0");
    let p5 = [tau.clone() * two_over_sigma.clone(), two_over_sigma, Real::zero()];
    let u5 = [Real::one(), -tau.clone(), Real::zero()];
    let v5 = [Real::zero(), Real::zero(), Real::one()];
    let r3 = Real::sqrt3().inv().expect("√3 ≠ 0");
    let p3 = [r3.clone(), r3.clone(), r3];
    let u3 = [Real::one(), -Real::one(), Real::zero()];
    let v3 = [Real::one(), Real::one(), Real::frac(-2, 1)];
    let tinv = tau.inv().expect("τ ≠ 0");
    let p2 = [tinv.clone() * Real::frac(1, 2), Real::frac(1, 2), tau.clone() * Real::frac(1, 2)];
    let u2 = [Real::one(), -tinv.clone(), Real::zero()];
    let v2 = [Real::one(), Real::zero(), -(tinv.clone() * tinv)];
    [(p5, u5, v5), (p3, u3, v3), (p2, u2, v2)]
}

// ---------------------------------------------------------------------------
// Functions on M built from the coefficient functions

/// Which part of a coefficient function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    /// Real part.
    Re,
    /// Imaginary part.
    Im,
}

/// The seed and its perturbation directions, each at unit `L²(M)` norm.
#[derive(Clone, Debug)]
pub struct SeedFunctions {
    /// `L²(M)` norms of `Re A_j` (equal to those of `Im A_j` for `j ≠ 6`).
    pub norms: Vec<f64>,
    /// Sign `s` with `F₀ = s·Â₆`.
    pub seed_sign: f64,
}

impl SeedFunctions {
    /// Compute the normalizations exactly.
    pub fn new() -> Self {
        let ms = coefficient_mean_squares();
        let norms = (0..13)
            .map(|j| {
                let m = RealScalar::to_f64(&ms[j]);
                let real_part = if j == 6 { m } else { m / 2.0 };
                (real_part * VOL_M).sqrt()
            })
            .collect();
        let seed_sign = crate::spherepoly::seed_to_a6_ratio().map_or(1.0, |r| r.signum() as f64);
        SeedFunctions { norms, seed_sign }
    }
    /// `Re A_j` or `Im A_j` at unit `L²(M)` norm.
    pub fn direction(&self, j: usize, part: Part) -> MatrixCoefficientFunction {
        let c = match part {
            Part::Re => Complex64::new(1.0 / self.norms[j], 0.0),
            Part::Im => Complex64::new(0.0, -1.0 / self.norms[j]),
        };
        MatrixCoefficientFunction::klein_single(j, c)
    }
    /// The seed `F₀` at unit `L²(M)` norm.
    pub fn seed(&self) -> MatrixCoefficientFunction {
        self.direction(6, Part::Re).scaled(self.seed_sign)
    }
    /// `F_{a,b} = F₀ + a·Re Â₀ + b·Re Â₁`.
    pub fn fab(&self, a: f64, b: f64) -> MatrixCoefficientFunction {
        let mut f = self.seed();
        f.add_scaled(a, &self.direction(0, Part::Re));
        f.add_scaled(b, &self.direction(1, Part::Re));
        f
    }
    /// `Ψ = F₀ + ε₂ Re F̂₄ + ε₃ Re F̂₃ + ε₅ Re F̂₁`.
    pub fn psi(&self, e2: f64, e3: f64, e5: f64) -> MatrixCoefficientFunction {
        let mut f = self.seed();
        f.add_scaled(e2, &self.direction(4, Part::Re));
        f.add_scaled(e3, &self.direction(3, Part::Re));
        f.add_scaled(e5, &self.direction(1, Part::Re));
        f
    }
}

impl Default for SeedFunctions {
    fn default() -> Self {
        Self::new()
    }
}

// ---------------------------------------------------------------------------
// Census on M

/// Options for the census on `M`.
#[derive(Clone, Debug, Serialize)]
pub struct CensusOptions {
    /// Number of multistart points (each represents one point of `M`).
    pub starts: usize,
    /// Offset into the low-discrepancy sequence, acting as a seed.
    pub seed: u64,
    /// Merge distance on `M`.
    pub dedup_tol: f64,
    /// Newton settings.
    pub newton: NewtonOptions,
    /// Distance on `S²` within which a point is labelled by an exceptional orbit.
    pub label_radius: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions { starts: 1 << 14, seed: 0, dedup_tol: 1e-6, newton: NewtonOptions::default(), label_radius: 0.25 }
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton points mapped to `S³` through Hopf coordinates, which makes them
/// uniform for the round measure.
pub fn halton_s3(n: usize, offset: u64) -> Vec<[f64; 4]> {
    (0..n as u64)
        .map(|k| {
            let i = k + 1 + offset;
            let u = radical_inverse(i, 2);
            let t1 = 2.0 * std::f64::consts::PI * radical_inverse(i, 3);
            let t2 = 2.0 * std::f64::consts::PI * radical_inverse(i, 5);
            let (ra, rb) = (u.sqrt(), (1.0 - u).sqrt());
            [ra * t1.cos(), ra * t1.sin(), rb * t2.cos(), rb * t2.sin()]
        })
        .collect()
}

/// Hopf images of the exceptional orbits (vertex, face, edge) in the frame of
/// the group table.
pub fn exceptional_hopf_orbits(g: &GroupTable) -> [Vec<[f64; 3]>; 3] {
    let pts = ExceptionalPoints::new(g);
    [
        hopf_orbit(&pts.z5.to_unit(), g, 1e-9),
        hopf_orbit(&pts.z3.to_unit(), g, 1e-9),
        hopf_orbit(&pts.z2.to_unit(), g, 1e-9),
    ]
}

/// Largest `|f(z·h) − f(z)|` over the group at a few fixed points.
pub fn invariance_defect(f: &dyn SphereFunction<4>, g: &GroupTable) -> f64 {
    halton_s3(5, 977)
        .iter()
        .map(|x| {
            let z = QuatF::from_array(*x);
            let v = f.value(x);
            g.floats.iter().map(|h| (f.value(&z.mul_q(h).to_array()) - v).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Number of distinct points in the orbit `x·I*`.
pub fn orbit_point_count(x: &[f64; 4], g: &GroupTable, tol: f64) -> usize {
    let z = QuatF::from_array(*x);
    let mut pts: Vec<QuatF> = Vec::new();
    for h in &g.floats {
        let p = z.mul_q(h);
        if !pts.iter().any(|q| q.dist(&p) < tol) {
            pts.push(p);
        }
    }
    pts.len()
}

/// Critical points of a right-invariant function on `M` by multistart Newton
/// on `S³`, merged modulo the group. Every nondegenerate class is checked to
/// have a free 120-point orbit.
pub fn m_critical_census(label: &str, f: &dyn SphereFunction<4>, g: &GroupTable, opts: &CensusOptions) -> Result<MorseCensus, CritError> {
    let defect = invariance_defect(f, g);
    let scale = halton_s3(16, 31).iter().map(|x| f.value(x).abs()).fold(1e-300, f64::max);
    if defect > 1e-8 * scale.max(1.0) {
        return Err(CritError::NotInvariant(defect));
    }
    let orbits = exceptional_hopf_orbits(g);
    let starts = halton_s3(opts.starts, opts.seed);
    let results: Vec<NewtonResult<4>> = starts.par_iter().map(|x| sphere_newton(f, x, &opts.newton)).collect();
    let failed = results.iter().filter(|r| !r.converged).count();
    let make_record = |x: [f64; 4]| {
        let jet = f.jet(&x);
        let frame = tangent_frame(&x);
        let sd = sphere_derivatives(&jet, &x, &frame);
        let (eigs, index, degenerate, kernel) = classify(&sd, opts.newton.degeneracy_floor);
        let fiber_kernel = kernel.is_some_and(|k| k[0].abs() > 0.99);
        let gn = sd.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        CriticalPointRecord {
            location: x.to_vec(),
            value: jet.value,
            lagrange: sd.normal / 2.0,
            hessian_eigenvalues: eigs,
            morse_index: index,
            grad_norm: gn,
            degenerate,
            fiber_kernel,
            label: label_from_orbits(&hopf(&QuatF::from_array(x)), &orbits, opts.label_radius),
        }
    };
    // Morse points are merged modulo the group; points on critical circles
    // are merged by the group orbit of their Hopf image.
    let mut reps: Vec<QuatF> = Vec::new();
    let mut circles: Vec<(CriticalPointRecord, Vec<[f64; 3]>)> = Vec::new();
    for r in results.iter().filter(|r| r.converged) {
        let z = g.dirichlet_representative(&QuatF::from_array(r.x));
        if reps.iter().any(|p| p.dist(&z) < opts.dedup_tol) {
            continue;
        }
        let p = hopf(&z);
        if circles.iter().any(|(_, orb)| orb.iter().any(|q| dist(q, &p) < 1e-5)) {
            continue;
        }
        if reps.iter().any(|p| crate::quatgroup::coset_distance(p, &z, g) < opts.dedup_tol) {
            continue;
        }
        let rec = make_record(z.to_array());
        if rec.degenerate && rec.fiber_kernel {
            circles.push((rec, hopf_orbit(&z, g, 1e-9)));
        } else {
            reps.push(z);
        }
    }
    let mut records: Vec<CriticalPointRecord> = reps
        .iter()
        .map(|z| {
            let polished = sphere_newton(f, &z.to_array(), &NewtonOptions { max_iter: 10, ..opts.newton.clone() });
            make_record(polished.x)
        })
        .collect();
    records.extend(circles.into_iter().map(|(r, _)| r));
    records.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    for r in records.iter().filter(|r| !r.degenerate) {
        let x: [f64; 4] = r.location.clone().try_into().expect("four coordinates");
        let n = orbit_point_count(&x, g, 1e-6);
        if n != g.len() {
            // A nondegenerate critical point with a non-free orbit would
            // contradict the freeness of the action; report it as failed.
            return Err(CritError::NotInvariant(n as f64));
        }
    }
    Ok(finish_census(label, records, 3, failed, g.len()))
}

// ---------------------------------------------------------------------------
// Tubular reduction along a Hopf circle

/// Reduced data along one circle.
#[derive(Clone, Debug, Serialize)]
pub struct TubeReduction {
    /// Sample angles on the full fiber `[0, 2π)`.
    pub thetas: Vec<f64>,
    /// `g(θ) = F(θ, ξ(θ))`.
    pub g: Vec<f64>,
    /// `g′(θ) = ∂_θF(θ, ξ(θ))`.
    pub g_prime: Vec<f64>,
    /// Schur complement `G″ = F_θθ − F_θu (F_uu)⁻¹ F_uθ`.
    pub schur_second: Vec<f64>,
    /// Normal displacement `|ξ(θ)|`.
    pub normal_offset: Vec<f64>,
    /// Zeros of `g′` located by bisection.
    pub critical_thetas: Vec<f64>,
    /// `G″` at the zeros.
    pub critical_second: Vec<f64>,
    /// Number of circle-critical points on the full fiber.
    pub count_fiber: usize,
    /// Order of the subgroup fixing the fiber.
    pub stabilizer: usize,
    /// Number on the circle in `M`: `count_fiber / stabilizer`.
    pub count_m: usize,
}

fn qmul_left(q: &[f64; 4], x: &[f64; 4]) -> [f64; 4] {
    let a = QuatF::from_array(*q).mul_q(&QuatF::from_array(*x));
    a.to_array()
}

/// Chart `Φ(θ, u) = e^{iθ}(z + u₁ jz + u₂ kz)/√(1 + |u|²)` around the fiber
/// through `z` and its first and second derivatives in `(θ, u₁, u₂)`.
struct Chart {
    z: [f64; 4],
    jz: [f64; 4],
    kz: [f64; 4],
}

impl Chart {
    fn new(z: &[f64; 4]) -> Self {
        let jz = qmul_left(&[0.0, 0.0, 1.0, 0.0], z);
        let kz = qmul_left(&[0.0, 0.0, 0.0, 1.0], z);
        Chart { z: *z, jz, kz }
    }
    /// Returns `(Φ, [Φ_θ, Φ_u1, Φ_u2], second derivatives [a][b])`.
    fn eval(&self, theta: f64, u: [f64; 2]) -> ([f64; 4], [[f64; 4]; 3], [[[f64; 4]; 3]; 3]) {
        let s2 = 1.0 + u[0] * u[0] + u[1] * u[1];
        let s = s2.sqrt();
        let s3 = s2 * s;
        let s5 = s3 * s2;
        let v = [self.jz, self.kz];
        let w: [f64; 4] = std::array::from_fn(|i| self.z[i] + u[0] * v[0][i] + u[1] * v[1][i]);
        let y: [f64; 4] = std::array::from_fn(|i| w[i] / s);
        let dy: [[f64; 4]; 2] = std::array::from_fn(|a| std::array::from_fn(|i| v[a][i] / s - u[a] * w[i] / s3));
        let ddy: [[[f64; 4]; 2]; 2] = std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                std::array::from_fn(|i| {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    -u[b] * v[a][i] / s3 - u[a] * v[b][i] / s3 - delta * w[i] / s3 + 3.0 * u[a] * u[b] * w[i] / s5
                })
            })
        });
        let e = [theta.cos(), theta.sin(), 0.0, 0.0];
        let ie = [-theta.sin(), theta.cos(), 0.0, 0.0];
        let phi = qmul_left(&e, &y);
        let phi_t = qmul_left(&ie, &y);
        let mut d1 = [[0.0; 4]; 3];
        d1[0] = phi_t;
        d1[1] = qmul_left(&e, &dy[0]);
        d1[2] = qmul_left(&e, &dy[1]);
        let mut d2 = [[[0.0; 4]; 3]; 3];
        d2[0][0] = phi.map(|c| -c);
        for a in 0..2 {
            let m = qmul_left(&ie, &dy[a]);
            d2[0][a + 1] = m;
            d2[a + 1][0] = m;
            for b in 0..2 {
                d2[a + 1][b + 1] = qmul_left(&e, &ddy[a][b]);
            }
        }
        (phi, d1, d2)
    }
}

/// `F(θ, u) = f(Φ(θ, u))` with gradient and Hessian in `(θ, u₁, u₂)`.
fn chart_jet(f: &dyn SphereFunction<4>, chart: &Chart, theta: f64, u: [f64; 2]) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let (phi, d1, d2) = chart.eval(theta, u);
    let jet = f.jet(&phi);
    let g: [f64; 3] = std::array::from_fn(|a| dot(&jet.grad, &d1[a]));
    let mut h = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            let mut s = dot(&jet.grad, &d2[a][b]);
            for i in 0..4 {
                for j in 0..4 {
                    s += d1[a][i] * jet.hess[i][j] * d1[b][j];
                }
            }
            h[a][b] = s;
        }
    }
    (jet.value, g, h)
}

/// Reduce `f` to the circle through `z`: solve `∂_u F = 0` by Newton at each
/// sample angle (continuing from the previous angle), then locate the
/// critical points of `g(θ) = F(θ, ξ(θ))` on the full fiber.
pub fn tube_reduce(f: &dyn SphereFunction<4>, z: &[f64; 4], stabilizer: usize, samples: usize) -> Result<TubeReduction, CritError> {
    let chart = Chart::new(z);
    let mut thetas = Vec::with_capacity(samples);
    let mut gs = Vec::with_capacity(samples);
    let mut gps = Vec::with_capacity(samples);
    let mut schur = Vec::with_capacity(samples);
    let mut offs = Vec::with_capacity(samples);
    let mut u = [0.0, 0.0];
    let solve_normal = |theta: f64, mut u: [f64; 2]| -> Result<([f64; 2], f64, f64, f64), CritError> {
        for _ in 0..60 {
            let (v, g, h) = chart_jet(f, &chart, theta, u);
            let det = h[1][1] * h[2][2] - h[1][2] * h[2][1];
            let scale = h[1][1].abs().max(h[2][2].abs()).max(1e-300);
            if det.abs() < 1e-12 * scale * scale {
                return Err(CritError::NormalHessianSingular(theta));
            }
            let du = [-(h[2][2] * g[1] - h[1][2] * g[2]) / det, -(-h[2][1] * g[1] + h[1][1] * g[2]) / det];
            u = [u[0] + du[0], u[1] + du[1]];
            if du[0].abs() + du[1].abs() < 1e-15 {
                let (v2, g2, h2) = chart_jet(f, &chart, theta, u);
                let det2 = h2[1][1] * h2[2][2] - h2[1][2] * h2[2][1];
                // F_θu (F_uu)⁻¹ F_uθ
                let inv = [[h2[2][2] / det2, -h2[1][2] / det2], [-h2[2][1] / det2, h2[1][1] / det2]];
                let c = [h2[0][1], h2[0][2]];
                let corr = c[0] * (inv[0][0] * c[0] + inv[0][1] * c[1]) + c[1] * (inv[1][0] * c[0] + inv[1][1] * c[1]);
                let _ = v;
                return Ok((u, v2, g2[0], h2[0][0] - corr));
            }
        }
        Err(CritError::NormalNewtonFailed(theta))
    };
    for k in 0..samples {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let (u1, v, gp, s) = solve_normal(theta, u)?;
        u = u1;
        thetas.push(theta);
        gs.push(v);
        gps.push(gp);
        schur.push(s);
        offs.push((u[0] * u[0] + u[1] * u[1]).sqrt());
    }
    // zeros of g′ by sign change and bisection
    let mut crit = Vec::new();
    let mut crit2 = Vec::new();
    let gp_at = |theta: f64, u0: [f64; 2]| solve_normal(theta, u0);
    for k in 0..samples {
        let k2 = (k + 1) % samples;
        let (a, b) = (gps[k], gps[k2]);
        if a == 0.0 || a.signum() != b.signum() {
            let mut lo = thetas[k];
            let mut hi = if k2 == 0 { 2.0 * std::f64::consts::PI } else { thetas[k2] };
            let mut flo = a;
            let mut last = (0.0, 0.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let (_, _, fm, sm) = gp_at(mid, [0.0, 0.0])?;
                last = (mid, sm);
                if fm == 0.0 {
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            crit.push(last.0);
            crit2.push(last.1);
        }
    }
    let count_fiber = crit.len();
    Ok(TubeReduction {
        thetas,
        g: gs,
        g_prime: gps,
        schur_second: schur,
        normal_offset: offs,
        critical_thetas: crit,
        critical_second: crit2,
        count_fiber,
        stabilizer,
        count_m: count_fiber / stabilizer.max(1),
    })
}

/// Unit lifts of the three exceptional circles with their stabilizer orders,
/// in the order `C5, C3, C2`.
pub fn exceptional_circles(g: &GroupTable) -> [([f64; 4], usize); 3] {
    let pts = ExceptionalPoints::new(g);
    [(pts.z5.to_unit().to_array(), 10), (pts.z3.to_unit().to_array(), 6), (pts.z2.to_unit().to_array(), 4)]
}

/// Per-circle counts from tubular reduction, `[C5, C3, C2]`.
pub fn tube_census(f: &dyn SphereFunction<4>, g: &GroupTable, samples: usize) -> Result<[TubeReduction; 3], CritError> {
    let circles = exceptional_circles(g);
    let a = tube_reduce(f, &circles[0].0, circles[0].1, samples)?;
    let b = tube_reduce(f, &circles[1].0, circles[1].1, samples)?;
    let c = tube_reduce(f, &circles[2].0, circles[2].1, samples)?;
    Ok([a, b, c])
}

impl MorseCensus {
    /// True if every record is nondegenerate.
    pub fn is_morse(&self) -> bool {
        self.records.iter().all(|r| !r.degenerate)
    }
    /// Number of Bott circles detected.
    pub fn circle_count(&self) -> usize {
        self.bott_circles.len()
    }
}
