//! Truncated Peter–Weyl Galerkin solver for the conformally perturbed
//! Laplacian on `M`: the invariant basis by degree, assembly of the stiffness
//! and mass forms of `g_ε = e^{2ερ}g₀`, the generalized eigenproblem, and the
//! heat-flow demonstration.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::binform::{act, klein_form, BinaryForm, FormDerivatives, MatrixCoefficientFunction};
use crate::critscan::{halton_s3, m_critical_census, tangent_frame, CensusOptions, CritError, MorseCensus};
use crate::quatgroup::GroupTable;
use crate::splitting::{sorted_eigen, EigenBasis, LineRealization, SplitError, SplittingAlgebra, DIM_E, LAMBDA_1};
use crate::spherepoly::{PolyError, Su2Quadrature, VOL_M};

/// Failures of the Galerkin layer.
#[derive(Debug, Error)]
pub enum GalerkinError {
    /// The mass matrix is not positive definite.
    #[error("mass matrix is not positive definite at eps = {0}")]
    IndefiniteMass(f64),
    /// The assembly quadrature failed its self-test.
    #[error("quadrature self-test failed: {0}")]
    Quadrature(#[from] PolyError),
    /// The basis construction produced a block of the wrong size.
    #[error("block of degree {n} has dimension {got}, expected {expected}")]
    BlockDimension {
        /// Degree.
        n: usize,
        /// Dimension obtained.
        got: usize,
        /// Dimension predicted by the character count.
        expected: usize,
    },
    /// A census failed.
    #[error(transparent)]
    Census(#[from] CritError),
    /// The splitting layer failed.
    #[error(transparent)]
    Split(#[from] SplitError),
}

// ---------------------------------------------------------------------------
// Invariant basis

/// `dim (Sym^n)^{I*}` by averaging the character `χ_n(h) = U_n(Re h)` over the group.
pub fn invariant_dimension(n: usize, g: &GroupTable) -> usize {
    let total: f64 = g
        .floats
        .iter()
        .map(|h| {
            // Chebyshev recursion χ_{k+1} = 2a·χ_k − χ_{k−1}
            let two_a = 2.0 * h.a;
            let (mut prev, mut cur) = (1.0, two_a);
            if n == 0 {
                return 1.0;
            }
            for _ in 1..n {
                let next = two_a * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        })
        .sum();
    (total / g.len() as f64).round() as usize
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Invariant inner product on `Sym^n`: `⟨f, g⟩ = Σ f_k ḡ_k / C(n, k)`.
fn form_inner(f: &BinaryForm<Complex64>, g: &BinaryForm<Complex64>) -> Complex64 {
    let n = f.degree();
    f.coeffs.iter().zip(&g.coeffs).enumerate().map(|(k, (a, b))| a * b.conj() / binom(n, k)).sum()
}

/// A basis of the `I*`-invariant forms of degree `n`, by Reynolds averaging
/// of monomials followed by Gram–Schmidt in the invariant inner product.
/// Each form is scaled so that its largest coefficient has modulus one.
pub fn reynolds_forms(n: usize, g: &GroupTable) -> Vec<BinaryForm<Complex64>> {
    let want = invariant_dimension(n, g);
    let mut out: Vec<BinaryForm<Complex64>> = Vec::new();
    for k in 0..=n {
        if out.len() == want {
            break;
        }
        let e = BinaryForm::<Complex64>::monomial(n, k);
        let mut avg = BinaryForm { coeffs: vec![Complex64::new(0.0, 0.0); n + 1] };
        for h in &g.floats {
            let t = act(&h.alpha(), &h.beta(), &e);
            for (a, b) in avg.coeffs.iter_mut().zip(&t.coeffs) {
                *a += b / g.len() as f64;
            }
        }
        for f in &out {
            let p = form_inner(&avg, f) / form_inner(f, f);
            for (a, b) in avg.coeffs.iter_mut().zip(&f.coeffs) {
                *a -= p * b;
            }
        }
        let top = avg.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if top < 1e-8 {
            continue;
        }
        // fix the phase and scale by the largest coefficient, then drop round-off
        let lead = *avg.coeffs.iter().find(|c| c.norm() > 1e-8 * top.max(1.0) && c.norm() >= 0.5 * top).unwrap();
        let s = lead.norm() / lead;
        for c in avg.coeffs.iter_mut() {
            *c *= s / top;
            if c.re.abs() < 1e-12 {
                c.re = 0.0;
            }
            if c.im.abs() < 1e-12 {
                c.im = 0.0;
            }
        }
        out.push(avg);
    }
    out
}

/// One invariant form `η` of degree `n` with real functions
/// `ψ_k = Re Σ_j W_kj [z·η]_j` orthonormal in `L²(M)`.
#[derive(Clone, Debug)]
pub struct InvariantBlock {
    /// Degree.
    pub n: usize,
    /// The form and its derivatives.
    pub form: FormDerivatives,
    /// One weight vector per basis function.
    pub weights: Vec<Vec<Complex64>>,
}

/// Orthonormal basis of the right-`I*`-invariant functions of degree at most
/// `N`, block by block. The degree-12 block is the basis of the first eigenspace.
#[derive(Clone, Debug)]
pub struct InvariantBasis {
    /// Degree cutoff.
    pub n_max: usize,
    /// Value of the normalized constant function.
    pub constant: f64,
    /// Blocks of positive degree in increasing order.
    pub blocks: Vec<InvariantBlock>,
}

/// Summary of one block for reports.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSummary {
    /// Degree `n`.
    pub degree: usize,
    /// Number of basis functions.
    pub dimension: usize,
    /// Laplace eigenvalue `n(n+2)`.
    pub eigenvalue: usize,
}

fn orthonormal_functions(form: &FormDerivatives) -> Vec<Vec<Complex64>> {
    let n = form.degree();
    let quad = Su2Quadrature::reduced(2 * n);
    let rows: Vec<Vec<f64>> = quad
        .nodes
        .par_iter()
        .map(|x| {
            let g = form.at(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]), 0).g;
            g.iter().flat_map(|c| [c.re, c.im]).collect()
        })
        .collect();
    let m = 2 * (n + 1);
    let mut gram = DMatrix::zeros(m, m);
    for (r, w) in rows.iter().zip(&quad.weights) {
        for i in 0..m {
            for j in i..m {
                gram[(i, j)] += w * VOL_M * r[i] * r[j];
            }
        }
    }
    for i in 0..m {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    let (vals, vecs) = sorted_eigen(&gram);
    let top = vals[m - 1];
    let keep: Vec<usize> = (0..m).rev().filter(|&k| vals[k] > 1e-10 * top).collect();
    let mut w = DMatrix::from_fn(m, keep.len(), |i, c| vecs[(i, keep[c])] / vals[keep[c]].sqrt());
    // Directions with small Gram eigenvalues lose accuracy in the first pass;
    // one symmetric re-orthonormalization against the near-identity Gram of
    // the computed functions brings them back to rounding level.
    let h = w.transpose() * &gram * &w;
    let (hv, hu) = sorted_eigen(&h);
    let inv_sqrt = DMatrix::from_diagonal(&DVector::from_iterator(hv.len(), hv.iter().map(|x| 1.0 / x.sqrt())));
    w = &w * (&hu * inv_sqrt * hu.transpose());
    (0..keep.len())
        .map(|c| (0..=n).map(|j| Complex64::new(w[(2 * j, c)], -w[(2 * j + 1, c)])).collect())
        .collect()
}

impl InvariantBasis {
    /// Build the basis for all degrees up to `n_max`.
    pub fn build(n_max: usize, g: &GroupTable, eigen: &EigenBasis) -> Result<Self, GalerkinError> {
        let mut blocks = Vec::new();
        for n in 1..=n_max {
            let d = invariant_dimension(n, g);
            if d == 0 {
                continue;
            }
            if n == 12 && d == 1 {
                let weights = (0..DIM_E)
                    .map(|i| {
                        let mut c = vec![0.0; DIM_E];
                        c[i] = 1.0;
                        eigen.weights(&c)
                    })
                    .collect();
                blocks.push(InvariantBlock { n, form: FormDerivatives::new(klein_form()), weights });
                continue;
            }
            for eta in reynolds_forms(n, g) {
                let form = FormDerivatives::new(eta);
                let weights = orthonormal_functions(&form);
                if weights.len() != n + 1 {
                    return Err(GalerkinError::BlockDimension { n, got: weights.len(), expected: n + 1 });
                }
                blocks.push(InvariantBlock { n, form, weights });
            }
        }
        Ok(InvariantBasis { n_max, constant: 1.0 / VOL_M.sqrt(), blocks })
    }

    /// Total number of basis functions.
    pub fn dim(&self) -> usize {
        1 + self.blocks.iter().map(|b| b.weights.len()).sum::<usize>()
    }

    /// Degree of each basis function, in basis order.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0];
        for b in &self.blocks {
            d.extend(std::iter::repeat_n(b.n, b.weights.len()));
        }
        d
    }

    /// Per-degree summary, merging blocks of equal degree.
    pub fn summary(&self) -> Vec<BlockSummary> {
        let mut out = vec![BlockSummary { degree: 0, dimension: 1, eigenvalue: 0 }];
        for b in &self.blocks {
            match out.last_mut() {
                Some(s) if s.degree == b.n => s.dimension += b.weights.len(),
                _ => out.push(BlockSummary { degree: b.n, dimension: b.weights.len(), eigenvalue: b.n * (b.n + 2) }),
            }
        }
        out
    }

    /// Index of the first basis function of degree 12.
    pub fn eigen_offset(&self) -> usize {
        self.degrees().iter().position(|&d| d == 12).expect("degree-12 block present")
    }

    /// Values of all basis functions at a point.
    pub fn eval(&self, x: &[f64; 4]) -> Vec<f64> {
        let (a, b) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let mut out = Vec::with_capacity(self.dim());
        out.push(self.constant);
        for blk in &self.blocks {
            let g = blk.form.at(a, b, 0).g;
            for w in &blk.weights {
                out.push(w.iter().zip(&g).map(|(p, q)| p * q).sum::<Complex64>().re);
            }
        }
        out
    }

    /// Values and tangential gradients in the frame `(i·x, j·x, k·x)`.
    pub fn eval_with_gradient(&self, x: &[f64; 4]) -> (Vec<f64>, [Vec<f64>; 3]) {
        let (a, b) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let frame = tangent_frame(x);
        let dim = self.dim();
        let mut vals = Vec::with_capacity(dim);
        let mut grads: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(dim));
        vals.push(self.constant);
        for gr in grads.iter_mut() {
            gr.push(0.0);
        }
        for blk in &self.blocks {
            let fj = blk.form.at(a, b, 1);
            let cg = fj.coefficient_gradients();
            // tangential derivatives of each coefficient
            let tg: Vec<[Complex64; 3]> = (0..fj.g.len())
                .map(|j| std::array::from_fn(|t| (0..4).map(|r| cg[r][j] * frame[t][r]).sum()))
                .collect();
            for w in &blk.weights {
                vals.push(w.iter().zip(&fj.g).map(|(p, q)| p * q).sum::<Complex64>().re);
                for t in 0..3 {
                    grads[t].push(w.iter().zip(&tg).map(|(p, q)| p * q[t]).sum::<Complex64>().re);
                }
            }
        }
        (vals, grads)
    }

    /// Matrix of basis values at the given points (points × basis).
    pub fn values_matrix(&self, pts: &[[f64; 4]]) -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = pts.par_iter().map(|x| self.eval(x)).collect();
        DMatrix::from_fn(pts.len(), self.dim(), |i, j| rows[i][j])
    }

    /// The function `Σ c_k ψ_k`.
    pub fn function(&self, c: &[f64]) -> MatrixCoefficientFunction {
        let mut blocks = Vec::new();
        let mut k = 1;
        for blk in &self.blocks {
            let mut w = vec![Complex64::new(0.0, 0.0); blk.n + 1];
            for wk in &blk.weights {
                for (a, b) in w.iter_mut().zip(wk) {
                    *a += b * c[k];
                }
                k += 1;
            }
            blocks.push((blk.form.clone(), w));
        }
        MatrixCoefficientFunction { constant: c[0] * self.constant, blocks }
    }

    /// Embed coordinates over the first eigenspace into the full basis.
    pub fn embed_eigen(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        let o = self.eigen_offset();
        out[o..o + DIM_E].copy_from_slice(v);
        out
    }
}

// ---------------------------------------------------------------------------
// Assembly

/// Basis values, tangential gradients and the conformal factor at every
/// node of an assembly quadrature.
pub struct AssemblyData {
    /// Values (nodes × basis).
    pub values: DMatrix<f64>,
    /// Tangential gradients stacked by frame direction ((3·nodes) × basis).
    pub grads: DMatrix<f64>,
    /// `ρ` at the nodes.
    pub rho: Vec<f64>,
    /// Quadrature weights times the volume of `M`.
    pub weights: Vec<f64>,
    /// Degree of exactness of the rule.
    pub degree: usize,
}

/// Stiffness and mass matrices of `g_ε`.
#[derive(Clone, Debug)]
pub struct PerturbedForms {
    /// `ε`.
    pub eps: f64,
    /// `a_ε(u, v) = ∫ e^{ερ}⟨∇u, ∇v⟩`.
    pub a: DMatrix<f64>,
    /// `m_ε(u, v) = ∫ e^{3ερ} u v`.
    pub m: DMatrix<f64>,
}

/// Default margin added to `2N` for the assembly quadrature.
pub const RHO_MARGIN: usize = 72;

impl AssemblyData {
    /// Evaluate everything at the nodes of a reduced rule of degree
    /// `2N + margin`, after checking the rule on exact monomial moments.
    pub fn new(basis: &InvariantBasis, rho: &[f64], margin: usize) -> Result<Self, GalerkinError> {
        let degree = 2 * basis.n_max + margin;
        let quad = Su2Quadrature::reduced(degree);
        quad.self_test(1e-12, 24)?;
        let rho_fn = basis.function(rho);
        let rows: Vec<(Vec<f64>, [Vec<f64>; 3], f64)> = quad
            .nodes
            .par_iter()
            .map(|x| {
                let (v, g) = basis.eval_with_gradient(x);
                (v, g, rho_fn.eval(x))
            })
            .collect();
        let (nn, dim) = (quad.len(), basis.dim());
        let values = DMatrix::from_fn(nn, dim, |i, j| rows[i].0[j]);
        let grads = DMatrix::from_fn(3 * nn, dim, |i, j| rows[i % nn].1[i / nn][j]);
        Ok(AssemblyData {
            values,
            grads,
            rho: rows.iter().map(|r| r.2).collect(),
            weights: quad.weights.iter().map(|w| w * VOL_M).collect(),
            degree,
        })
    }

    fn weighted_gram(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
        let nn = w.len();
        let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * w[i % nn]);
        let g = m.transpose() * scaled;
        (&g + g.transpose()) * 0.5
    }

    /// Assemble `a_ε`, `m_ε`.
    pub fn forms(&self, eps: f64) -> PerturbedForms {
        let wa: Vec<f64> = self.weights.iter().zip(&self.rho).map(|(w, r)| w * (eps * r).exp()).collect();
        let wm: Vec<f64> = self.weights.iter().zip(&self.rho).map(|(w, r)| w * (3.0 * eps * r).exp()).collect();
        PerturbedForms { eps, a: Self::weighted_gram(&self.grads, &wa), m: Self::weighted_gram(&self.values, &wm) }
    }

    /// First-order forms `a₀′ = ∫ρ⟨∇u,∇v⟩` and `m₀′ = 3∫ρuv`.
    pub fn first_order_forms(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let w: Vec<f64> = self.weights.iter().zip(&self.rho).map(|(w, r)| w * r).collect();
        (Self::weighted_gram(&self.grads, &w), Self::weighted_gram(&self.values, &w) * 3.0)
    }

    /// Largest `|ρ|` over the nodes.
    pub fn rho_sup(&self) -> f64 {
        self.rho.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Conformal factor selecting a target line

/// A conformal factor whose first-order splitting operator has a prescribed
/// simple lowest eigenline, scaled so that `max |ρ| = 1` on the assembly nodes.
pub struct TargetFactor {
    /// Target line in coordinates of the first eigenspace (unit vector).
    pub target: DVector<f64>,
    /// The line realization in `𝓑` before scaling.
    pub realization: LineRealization,
    /// Coefficients of `ρ` over the invariant basis, after scaling.
    pub rho: Vec<f64>,
    /// Scale applied to the realized factor.
    pub scale: f64,
    /// `B^(ρ)` for the scaled `ρ`.
    pub operator: DMatrix<f64>,
    /// `‖B^(ρ) − A‖` for the unscaled realization.
    pub round_trip_error: f64,
    /// Quadrature data for assembly with this `ρ`.
    pub data: AssemblyData,
}

impl TargetFactor {
    /// Realize `target` as the lowest eigenline of an operator in `𝓑`, starting
    /// from `seed`, invert it to a conformal factor, and prepare assembly data.
    pub fn new(
        alg: &SplittingAlgebra,
        basis: &InvariantBasis,
        target: &DVector<f64>,
        seed: &DMatrix<f64>,
        radius: f64,
    ) -> Result<Self, GalerkinError> {
        let target = target / target.norm();
        let realization = alg.line_realization(&target, seed, radius)?;
        let factor = alg.realize_conformal_factor(&realization.operator, basis)?;
        let raw = AssemblyData::new(basis, &factor.coeffs, RHO_MARGIN)?;
        let scale = 1.0 / raw.rho_sup();
        let rho: Vec<f64> = factor.coeffs.iter().map(|c| c * scale).collect();
        let data = AssemblyData { rho: raw.rho.iter().map(|r| r * scale).collect(), ..raw };
        Ok(TargetFactor {
            operator: &realization.operator * scale,
            target,
            realization,
            rho,
            scale,
            round_trip_error: factor.round_trip_error,
            data,
        })
    }

    /// Coordinates of the target over the full invariant basis.
    pub fn target_full(&self, basis: &InvariantBasis) -> Vec<f64> {
        basis.embed_eigen(self.target.as_slice())
    }
}

// ---------------------------------------------------------------------------
// Spectral solve

/// Spectral data of `g_ε`.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// `ε`.
    pub eps: f64,
    /// All eigenvalues in increasing order.
    pub eigenvalues: Vec<f64>,
    /// First positive eigenvalue.
    pub lambda1: f64,
    /// `λ₂ − λ₁`.
    pub gap: f64,
    /// The 13 eigenvalues of the 168-cluster.
    pub cluster: Vec<f64>,
    /// `(λ_k − 168)/ε` for the cluster (empty at `ε = 0`).
    pub slopes: Vec<f64>,
    /// Coordinates of the first eigenvector, normalized in `m_ε`.
    pub first_vector: Vec<f64>,
    /// Largest relative residual `‖a v − λ m v‖/(‖a v‖ + |λ|‖m v‖)`.
    pub residual: f64,
    /// Smallest eigenvalue of `m_ε`.
    pub mass_floor: f64,
    /// Eigenvectors (columns), normalized in `m_ε`.
    #[serde(skip)]
    pub vectors: DMatrix<f64>,
}

/// Solve `a v = λ m v` through the Cholesky factor of `m`.
pub fn solve_branch(forms: &PerturbedForms) -> Result<SpectralReport, GalerkinError> {
    let chol = Cholesky::new(forms.m.clone()).ok_or(GalerkinError::IndefiniteMass(forms.eps))?;
    let l = chol.l();
    let linv = l.clone().try_inverse().ok_or(GalerkinError::IndefiniteMass(forms.eps))?;
    let c = &linv * &forms.a * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let (vals, y) = sorted_eigen(&c);
    let vectors = linv.transpose() * y;
    let mut residual = 0.0f64;
    for k in 0..vals.len() {
        let v = vectors.column(k);
        let av = &forms.a * v;
        let mv = &forms.m * v;
        let r = (&av - &mv * vals[k]).norm() / (av.norm() + vals[k].abs() * mv.norm()).max(1e-300);
        residual = residual.max(r);
    }
    let (mvals, _) = sorted_eigen(&forms.m);
    let cluster: Vec<f64> = vals[1..=DIM_E].to_vec();
    let slopes = if forms.eps == 0.0 { vec![] } else { cluster.iter().map(|l| (l - LAMBDA_1) / forms.eps).collect() };
    Ok(SpectralReport {
        eps: forms.eps,
        lambda1: vals[1],
        gap: vals[2] - vals[1],
        cluster,
        slopes,
        first_vector: vectors.column(1).iter().copied().collect(),
        residual,
        mass_floor: mvals[0],
        eigenvalues: vals,
        vectors,
    })
}

/// `|⟨φ, target⟩|/‖φ‖` in the round `L²(M)` inner product (the basis is
/// orthonormal at `ε = 0`).
pub fn alignment(phi: &[f64], target: &[f64]) -> f64 {
    let a = DVector::from_column_slice(phi);
    let b = DVector::from_column_slice(target);
    a.dot(&b).abs() / (a.norm() * b.norm())
}

/// Sorted slopes against sorted reference eigenvalues: worst absolute error.
pub fn slope_error(slopes: &[f64], reference: &[f64]) -> f64 {
    let mut s = slopes.to_vec();
    let mut r = reference.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.iter().zip(&r).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------
// Heat flow

/// Points at which distances are sampled, with basis values and gradients.
pub struct SamplePoints {
    /// Basis values (points × basis).
    pub values: DMatrix<f64>,
    /// Tangential gradients ((3·points) × basis).
    pub grads: DMatrix<f64>,
}

impl SamplePoints {
    /// A fixed low-discrepancy set of `count` points.
    pub fn new(basis: &InvariantBasis, count: usize) -> Self {
        let pts = halton_s3(count, 7919);
        let rows: Vec<(Vec<f64>, [Vec<f64>; 3])> = pts.par_iter().map(|x| basis.eval_with_gradient(x)).collect();
        let dim = basis.dim();
        SamplePoints {
            values: DMatrix::from_fn(count, dim, |i, j| rows[i].0[j]),
            grads: DMatrix::from_fn(3 * count, dim, |i, j| rows[i % count].1[i / count][j]),
        }
    }

    /// Sup of values and sup of tangential gradient norms of `Σ c_k ψ_k`.
    pub fn c0_c1(&self, c: &DVector<f64>) -> (f64, f64) {
        let v = &self.values * c;
        let g = &self.grads * c;
        let n = self.values.nrows();
        let c0 = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let c1 = (0..n).map(|i| (g[i].powi(2) + g[n + i].powi(2) + g[2 * n + i].powi(2)).sqrt()).fold(0.0, f64::max);
        (c0, c0.max(c1))
    }
}

/// Initial data for the heat demonstration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HeatInit {
    /// Gaussian random coefficients.
    Random,
    /// The first eigenfunction itself.
    Phi1,
    /// Random with the first-mode component removed.
    Perp,
}

/// One sample of the heat trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct HeatSample {
    /// Time.
    pub t: f64,
    /// Sampled sup distance between `e^{λ₁t}(u(t) − f₀)` and `f₁φ₁`.
    pub c0: f64,
    /// Same, including tangential gradients.
    pub c1: f64,
    /// `L²(g_ε)` distance.
    pub l2: f64,
    /// Relative error of `‖u(t)‖² = Σ e^{−2λ_k t}|f_k|²`.
    pub energy_identity_error: f64,
}

/// Heat-flow report.
#[derive(Clone, Debug, Serialize)]
pub struct HeatReport {
    /// `ε`.
    pub eps: f64,
    /// First-mode coefficient `f₁`.
    pub first_mode: f64,
    /// True when `f₁` vanishes to round-off (the exceptional set).
    pub exceptional: bool,
    /// Trajectory.
    pub samples: Vec<HeatSample>,
    /// Fitted exponential decay rate of the `C⁰` distance.
    pub fitted_rate: f64,
    /// `λ₂ − λ₁`.
    pub predicted_rate: f64,
    /// `|fitted/predicted − 1|`.
    pub rate_error: f64,
    /// Census of the rescaled solution at the final time.
    pub final_census: Option<CensusSummary>,
}

/// Compact census result.
#[derive(Clone, Debug, Serialize)]
pub struct CensusSummary {
    /// Total critical points on `M`.
    pub total: usize,
    /// Counts by Morse index.
    pub counts_by_index: Vec<usize>,
    /// Counts near the vertex, face and edge circles, and elsewhere.
    pub counts_by_circle: [usize; 4],
    /// `Σ(−1)^index`.
    pub euler_sum: i64,
    /// Whether every critical point is nondegenerate.
    pub morse: bool,
}

impl From<&MorseCensus> for CensusSummary {
    fn from(c: &MorseCensus) -> Self {
        CensusSummary {
            total: c.total,
            counts_by_index: c.counts_by_index.clone(),
            counts_by_circle: c.counts_by_circle,
            euler_sum: c.euler_sum,
            morse: c.is_morse(),
        }
    }
}

/// Initial coefficients for the demonstration, deterministic in `seed`.
pub fn heat_initial_data(init: HeatInit, spec: &SpectralReport, forms: &PerturbedForms, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let dim = forms.m.nrows();
    let v1 = spec.vectors.column(1).into_owned();
    match init {
        HeatInit::Phi1 => v1.iter().copied().collect(),
        HeatInit::Random | HeatInit::Perp => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut f = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            if init == HeatInit::Perp {
                let c = v1.dot(&(&forms.m * &f));
                f -= &v1 * c;
            }
            f.iter().copied().collect()
        }
    }
}

/// Least-squares slope of `−log d` against `t`.
fn fit_rate(ts: &[f64], ds: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ts.iter().zip(ds).filter(|(_, d)| **d > 0.0).map(|(t, d)| (*t, d.ln())).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let md = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - md)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -num / den
}

/// Evolve `u(t) = Σ e^{−λ_k t} f_k v_k` and compare the rescaled solution
/// with the first-mode line. The decay rate is fitted over the second half
/// of the time list. A census of the rescaled solution at the final time is
/// taken when `census` is given; the rescaling by `e^{λ₁t}` and the removal
/// of the constant mode do not change critical points.
pub fn heat_demo(
    basis: &InvariantBasis,
    forms: &PerturbedForms,
    spec: &SpectralReport,
    f: &[f64],
    times: &[f64],
    samples: &SamplePoints,
    census: Option<(&GroupTable, &CensusOptions)>,
) -> Result<HeatReport, GalerkinError> {
    let fvec = DVector::from_column_slice(f);
    let mf = &forms.m * &fvec;
    let coeffs: Vec<f64> = (0..spec.eigenvalues.len()).map(|k| spec.vectors.column(k).dot(&mf)).collect();
    let lam = &spec.eigenvalues;
    let f1 = coeffs[1];
    let exceptional = f1.abs() < 1e-12 * fvec.norm().max(1e-300);
    let mut out = Vec::with_capacity(times.len());
    let total_energy: f64 = coeffs.iter().map(|c| c * c).sum();
    let mut last_tail = DVector::zeros(fvec.len());
    for &t in times {
        // tail Σ_{k≥2} e^{−(λ_k−λ₁)t} f_k v_k, computed directly
        let mut tail = DVector::zeros(fvec.len());
        let mut tail_energy = 0.0;
        for k in 2..lam.len() {
            let s = (-(lam[k] - lam[1]) * t).exp() * coeffs[k];
            tail += spec.vectors.column(k) * s;
            tail_energy += s * s;
        }
        let (c0, c1) = samples.c0_c1(&tail);
        // ‖u(t)‖² in m_ε against the spectral sum
        let mut u = DVector::zeros(fvec.len());
        let mut spectral = 0.0;
        for k in 0..lam.len() {
            let s = (-lam[k].max(0.0) * t).exp() * coeffs[k];
            u += spec.vectors.column(k) * s;
            spectral += s * s;
        }
        let direct = u.dot(&(&forms.m * &u));
        out.push(HeatSample {
            t,
            c0,
            c1,
            l2: tail_energy.sqrt(),
            energy_identity_error: (direct - spectral).abs() / total_energy.max(1e-300),
        });
        last_tail = tail;
    }
    let half = times.len() / 2;
    let fitted = fit_rate(
        &out[half..].iter().map(|s| s.t).collect::<Vec<_>>(),
        &out[half..].iter().map(|s| s.c0).collect::<Vec<_>>(),
    );
    let predicted = lam[2] - lam[1];
    let final_census = match census {
        Some((g, opts)) => {
            let rescaled = spec.vectors.column(1) * f1 + last_tail;
            let func = basis.function(rescaled.as_slice());
            Some(CensusSummary::from(&m_critical_census("heat", &func, g, opts)?))
        }
        None => None,
    };
    Ok(HeatReport {
        eps: forms.eps,
        first_mode: f1,
        exceptional,
        samples: out,
        fitted_rate: fitted,
        predicted_rate: predicted,
        rate_error: (fitted / predicted - 1.0).abs(),
        final_census,
    })
}
