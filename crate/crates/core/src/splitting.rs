//! The first-order splitting algebra on the 13-dimensional first eigenspace
//! `E`: the operator map `q ↦ B(q)`, the product space `𝓟`, the realizable
//! space `𝓑 = B(𝓟)`, the seed operators, the reproducing kernel at the base
//! point, the eigenline differential, the submersion rank, and the inversion
//! from operators back to conformal factors.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::binform::{coefficients_a, MatrixCoefficientFunction};
use crate::critscan::SeedFunctions;
use crate::galerkin::InvariantBasis;
use crate::quatgroup::QuatF;
use crate::spherepoly::{Su2Quadrature, VOL_M};

/// Dimension of the first eigenspace.
pub const DIM_E: usize = 13;
/// First eigenvalue of the round metric on `M`.
pub const LAMBDA_1: f64 = 168.0;

/// Failures of the splitting layer.
#[derive(Debug, Error, PartialEq)]
pub enum SplitError {
    /// The lowest eigenvalue is not simple.
    #[error("lowest eigenvalue is not simple (gap {0:e}); operator is outside the simple locus")]
    NotSimple(f64),
    /// The target line is too far from the seed line.
    #[error("target is {0:.4} rad from the seed line, outside the chart radius {1}")]
    OutOfChart(f64, f64),
    /// The operator does not lie in the realizable space.
    #[error("operator is not realizable: residual {0:e}")]
    NotRealizable(f64),
    /// The Gram system of the product space is too ill-conditioned.
    #[error("product-space Gram matrix has condition number {0:e}")]
    IllConditioned(f64),
    /// The target is an eigenvector but not the lowest one.
    #[error("target line is an eigenline but not the lowest (alignment {0})")]
    NotLowest(f64),
}

// ---------------------------------------------------------------------------
// Orthonormal basis of E

/// Orthonormal basis of `E` in `L²(M)`: `φ_{2j} = Re Â_j`,
/// `φ_{2j+1} = Im Â_j` for `j = 0, …, 5`, and `φ₁₂ = F₀`, where hats denote
/// unit `L²(M)` norm. These are mutually orthogonal by the weight law.
#[derive(Clone, Debug)]
pub struct EigenBasis {
    /// Normalizations and the seed sign.
    pub seeds: SeedFunctions,
}

impl EigenBasis {
    /// Build the basis.
    pub fn new() -> Self {
        EigenBasis { seeds: SeedFunctions::new() }
    }

    /// Values of the 13 basis functions at a point of `S³`.
    pub fn eval(&self, x: &[f64; 4]) -> [f64; DIM_E] {
        let a = coefficients_a(&QuatF::from_array(*x));
        self.from_coefficients(&a)
    }

    /// Basis values from the 13 coefficients `A_j` at a point.
    pub fn from_coefficients(&self, a: &[Complex64]) -> [f64; DIM_E] {
        let n = &self.seeds.norms;
        let mut out = [0.0; DIM_E];
        for j in 0..6 {
            out[2 * j] = a[j].re / n[j];
            out[2 * j + 1] = a[j].im / n[j];
        }
        out[12] = self.seeds.seed_sign * a[6].re / n[6];
        out
    }

    /// Weights `w_j` with `Σ_i c_i φ_i = Re Σ_j w_j A_j`.
    pub fn weights(&self, c: &[f64]) -> Vec<Complex64> {
        let n = &self.seeds.norms;
        let mut w = vec![Complex64::new(0.0, 0.0); 13];
        for j in 0..6 {
            w[j] += Complex64::new(c[2 * j], -c[2 * j + 1]) / n[j];
        }
        w[6] += Complex64::new(self.seeds.seed_sign * c[12] / n[6], 0.0);
        w
    }

    /// The function `Σ c_i φ_i`.
    pub fn function(&self, c: &[f64]) -> MatrixCoefficientFunction {
        MatrixCoefficientFunction::klein(self.weights(c))
    }

    /// Coordinates of `F₀`.
    pub fn seed_coords() -> DVector<f64> {
        let mut v = DVector::zeros(DIM_E);
        v[12] = 1.0;
        v
    }

    /// Coordinates of `Ψ = F₀ + ε₂ Re F̂₄ + ε₃ Re F̂₃ + ε₅ Re F̂₁`.
    pub fn psi_coords(e2: f64, e3: f64, e5: f64) -> DVector<f64> {
        let mut v = Self::seed_coords();
        v[8] += e2;
        v[6] += e3;
        v[2] += e5;
        v
    }

    /// Names of the basis functions.
    pub fn labels() -> Vec<String> {
        let mut v = Vec::new();
        for j in 0..6 {
            v.push(format!("Re A{j}"));
            v.push(format!("Im A{j}"));
        }
        v.push("F0".into());
        v
    }
}

impl Default for EigenBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// The identity coset `o`.
pub const BASE_POINT: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

fn pair_index() -> Vec<(usize, usize)> {
    let mut v = Vec::with_capacity(91);
    for i in 0..DIM_E {
        for j in i..DIM_E {
            v.push((i, j));
        }
    }
    v
}

/// Symmetric products `φ_iφ_j`, `i ≤ j`, at one point.
fn products(phi: &[f64; DIM_E]) -> Vec<f64> {
    pair_index().iter().map(|&(i, j)| phi[i] * phi[j]).collect()
}

/// Orthonormal basis of `𝓟 = span{φ_iφ_j}` in `L²(M)`.
#[derive(Clone, Debug, Serialize)]
pub struct ProductSpaceBasis {
    /// Dimension of `𝓟`.
    pub dim: usize,
    /// Columns: coefficients of each basis element over the 91 products.
    #[serde(skip)]
    pub coeffs: DMatrix<f64>,
    /// Eigenvalues of the 91×91 Gram matrix, descending.
    pub gram_spectrum: Vec<f64>,
    /// Largest eigenvalue discarded as numerically zero.
    pub discarded_max: f64,
}

/// Outcome of inverting `A ↦ ρ_A`.
#[derive(Clone, Debug)]
pub struct ConformalFactor {
    /// Coefficients of `ρ` over the invariant basis.
    pub coeffs: Vec<f64>,
    /// Coefficients of `q_ρ = 2λρ + ½Δρ` over the invariant basis.
    pub q_coeffs: Vec<f64>,
    /// Coordinates of `q_A` over the product-space basis.
    pub p_coords: Vec<f64>,
    /// Residual of the least-squares solve `B(q) = A`.
    pub residual: f64,
    /// `‖B^(ρ) − A‖` recomputed from `ρ` by quadrature.
    pub round_trip_error: f64,
}

/// The splitting algebra with all quadrature data precomputed.
pub struct SplittingAlgebra {
    /// Basis of `E`.
    pub basis: EigenBasis,
    /// Quadrature rule exact for degree 48.
    pub quad: Su2Quadrature,
    /// `φ_i` at the nodes (nodes × 13).
    pub phi: DMatrix<f64>,
    /// The product space.
    pub product: ProductSpaceBasis,
    /// Values of the product-space basis at the nodes (nodes × dim 𝓟).
    pub p_values: DMatrix<f64>,
    /// `B(p_m)` for the product-space basis: a basis of `𝓑`.
    pub b_basis: Vec<DMatrix<f64>>,
}

/// Eigen-decomposition sorted ascending.
pub fn sorted_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let e = SymmetricEigen::new(a.clone());
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].partial_cmp(&e.eigenvalues[j]).unwrap());
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(a.nrows(), a.ncols());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &e.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// `|⟨u, v⟩|/(|u||v|)`.
pub fn abs_cos(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(v).abs() / (u.norm() * v.norm())
}

/// Lowest eigenpair and the gap above it.
pub fn lowest(a: &DMatrix<f64>) -> (f64, DVector<f64>, f64) {
    let (vals, vecs) = sorted_eigen(a);
    (vals[0], vecs.column(0).into_owned(), vals[1] - vals[0])
}

impl SplittingAlgebra {
    /// Build the product space and the basis of `𝓑`.
    pub fn new() -> Result<Self, SplitError> {
        let basis = EigenBasis::new();
        let quad = Su2Quadrature::reduced(48);
        let nn = quad.len();
        let mut phi = DMatrix::zeros(nn, DIM_E);
        for (k, x) in quad.nodes.iter().enumerate() {
            let v = basis.eval(x);
            for i in 0..DIM_E {
                phi[(k, i)] = v[i];
            }
        }
        let pairs = pair_index();
        let mut prods = DMatrix::zeros(nn, pairs.len());
        for k in 0..nn {
            for (c, &(i, j)) in pairs.iter().enumerate() {
                prods[(k, c)] = phi[(k, i)] * phi[(k, j)];
            }
        }
        let w = DVector::from_iterator(nn, quad.weights.iter().map(|w| w * VOL_M));
        let wp = DMatrix::from_fn(nn, pairs.len(), |k, c| prods[(k, c)] * w[k]);
        let gram = prods.transpose() * wp;
        let (vals, vecs) = sorted_eigen(&gram);
        let top = vals.last().copied().unwrap_or(1.0);
        let keep: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > 1e-10 * top).collect();
        let discarded_max = (0..vals.len()).filter(|i| !keep.contains(i)).map(|i| vals[i].abs()).fold(0.0, f64::max);
        let smallest_kept = keep.iter().map(|&i| vals[i]).fold(f64::INFINITY, f64::min);
        if top / smallest_kept > 1e12 {
            return Err(SplitError::IllConditioned(top / smallest_kept));
        }
        let dim = keep.len();
        let mut coeffs = DMatrix::zeros(pairs.len(), dim);
        for (m, &i) in keep.iter().enumerate() {
            coeffs.set_column(m, &(vecs.column(i) / vals[i].sqrt()));
        }
        let p_values = &prods * &coeffs;
        let mut alg = SplittingAlgebra {
            basis,
            quad,
            phi,
            product: ProductSpaceBasis {
                dim,
                coeffs,
                gram_spectrum: keep.iter().map(|&i| vals[i]).collect(),
                discarded_max,
            },
            p_values,
            b_basis: Vec::new(),
        };
        alg.b_basis = (0..dim).map(|m| alg.splitting_matrix_values(alg.p_values.column(m).as_slice())).collect();
        Ok(alg)
    }

    /// `B(q)_ij = −∫_M q φ_iφ_j` from the values of `q` at the quadrature nodes.
    pub fn splitting_matrix_values(&self, q: &[f64]) -> DMatrix<f64> {
        let nn = self.quad.len();
        let wq = DMatrix::from_fn(nn, DIM_E, |k, i| self.phi[(k, i)] * q[k] * self.quad.weights[k] * VOL_M);
        let b = -(self.phi.transpose() * wq);
        (&b + b.transpose()) * 0.5
    }

    /// `B(q)` for a right-invariant function of degree at most 24.
    pub fn splitting_matrix<F: Fn(&[f64; 4]) -> f64>(&self, q: F) -> DMatrix<f64> {
        let vals: Vec<f64> = self.quad.nodes.iter().map(q).collect();
        self.splitting_matrix_values(&vals)
    }

    /// Values of the product-space basis at a point.
    pub fn p_at(&self, x: &[f64; 4]) -> DVector<f64> {
        let pr = DVector::from_vec(products(&self.basis.eval(x)));
        self.product.coeffs.transpose() * pr
    }

    /// Operator `Σ c_m B(p_m)` of a product-space element.
    pub fn b_of_coords(&self, c: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(DIM_E, DIM_E);
        for (m, cm) in c.iter().enumerate() {
            out += &self.b_basis[m] * *cm;
        }
        out
    }

    /// Riesz representer `q_o` of evaluation at `o` within `𝓟` (coordinates)
    /// and the seed operator `A₀ = B(q_o)`.
    pub fn seed_operator(&self) -> (DMatrix<f64>, Vec<f64>) {
        let c: Vec<f64> = self.p_at(&BASE_POINT).iter().copied().collect();
        (self.b_of_coords(&c), c)
    }

    /// Representer of the average over the fiber through `o`,
    /// `f ↦ (1/2π)∫ f(e^{it}o) dt`, and its operator `A_C`.
    pub fn fiber_average_operator(&self) -> (DMatrix<f64>, Vec<f64>) {
        let samples = 64;
        let mut c = DVector::zeros(self.product.dim);
        for k in 0..samples {
            let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            c += self.p_at(&[t.cos(), t.sin(), 0.0, 0.0]);
        }
        c /= samples as f64;
        let c: Vec<f64> = c.iter().copied().collect();
        (self.b_of_coords(&c), c)
    }

    /// Coordinates of `K_o = Σ φ_i(o) φ_i`.
    pub fn reproducing_kernel(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.basis.eval(&BASE_POINT))
    }

    /// Matrix of `H ↦ P_{v⊥}(Hv)` over the basis of `𝓑` (13 × dim 𝓟).
    pub fn submersion_matrix(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let v = v / v.norm();
        let mut m = DMatrix::zeros(DIM_E, self.product.dim);
        for (k, b) in self.b_basis.iter().enumerate() {
            let hv = b * &v;
            let p = &hv - &v * v.dot(&hv);
            m.set_column(k, &p);
        }
        m
    }

    /// Rank of `H ↦ P_{v⊥}(Hv)` on `𝓑` at the lowest eigenvector of `a`,
    /// with singular values.
    pub fn submersion_rank(&self, a: &DMatrix<f64>) -> Result<(usize, Vec<f64>), SplitError> {
        let (_, v, gap) = lowest(a);
        check_gap(a, gap)?;
        let sv = singular_values(&self.submersion_matrix(&v));
        let top = sv.first().copied().unwrap_or(0.0);
        Ok((sv.iter().filter(|&&s| s > 1e-8 * top).count(), sv))
    }

    /// Singular values of the multiplication map `w ↦ v·w` from `v⊥ ⊂ E`
    /// into `L²(M)`; up to sign it is the adjoint of `H ↦ P_{v⊥}(Hv)`.
    pub fn multiplication_singular_values(&self, v: &DVector<f64>) -> Vec<f64> {
        let v = v / v.norm();
        let w = orth_complement(&v);
        let nn = self.quad.len();
        let vals = &self.phi * &v;
        let ws = &self.phi * &w;
        let prod = DMatrix::from_fn(nn, w.ncols(), |k, c| vals[k] * ws[(k, c)]);
        let weighted = DMatrix::from_fn(nn, w.ncols(), |k, c| prod[(k, c)] * self.quad.weights[k] * VOL_M);
        let gram = prod.transpose() * weighted;
        let (ev, _) = sorted_eigen(&gram);
        let mut s: Vec<f64> = ev.iter().map(|e| e.max(0.0).sqrt()).collect();
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        s
    }

    /// Smallest `‖K_o·w‖_{L²}` over unit `w ⊥ K_o`.
    pub fn kernel_multiplication_margin(&self) -> f64 {
        let k = self.reproducing_kernel();
        let k = &k / k.norm();
        let s = self.multiplication_singular_values(&k);
        s.last().copied().unwrap_or(0.0) * self.reproducing_kernel().norm()
    }

    /// Minimum-norm `Δ ∈ 𝓑` such that `target` is an eigenvector of
    /// `seed + Δ`, followed by checks that it is the simple lowest one.
    pub fn line_realization(&self, target: &DVector<f64>, seed: &DMatrix<f64>, radius: f64) -> Result<LineRealization, SplitError> {
        let t = target / target.norm();
        let (_, v0, _) = lowest(seed);
        let chart_angle = abs_cos(&t, &v0).min(1.0).acos();
        if chart_angle > radius {
            return Err(SplitError::OutOfChart(chart_angle, radius));
        }
        let st = seed * &t;
        let rhs = -(&st - &t * t.dot(&st));
        let m = self.submersion_matrix(&t);
        let (coords, steps) = if rhs.norm() <= 1e-12 * seed.norm() {
            (DVector::zeros(self.product.dim), 0)
        } else {
            let svd = SVD::new(m.clone(), true, true);
            let top = svd.singular_values.max();
            (svd.solve(&rhs, 1e-10 * top).expect("SVD solve"), 1)
        };
        let a = seed + self.b_of_coords(coords.as_slice());
        let a = (&a + a.transpose()) * 0.5;
        let (l1, v, gap) = lowest(&a);
        check_gap(&a, gap)?;
        let cos = abs_cos(&v, &t);
        if cos < 0.5 {
            return Err(SplitError::NotLowest(cos));
        }
        let sin = (&v - &t * t.dot(&v)).norm() / v.norm();
        Ok(LineRealization {
            operator: a,
            delta_coords: coords.iter().copied().collect(),
            lowest_eigenvalue: l1,
            gap,
            alignment_error: sin,
            chart_angle,
            steps,
        })
    }

    /// `B^(ρ) = B(2λρ + ½Δρ)` for `ρ` given by coefficients over the invariant basis.
    pub fn operator_of_factor(&self, inv: &InvariantBasis, rho: &[f64]) -> DMatrix<f64> {
        let q: Vec<f64> =
            rho.iter().zip(inv.degrees()).map(|(r, n)| r * (2.0 * LAMBDA_1 + (n * (n + 2)) as f64 / 2.0)).collect();
        let psi = inv.values_matrix(&self.quad.nodes);
        let qn = psi * DVector::from_vec(q);
        self.splitting_matrix_values(qn.as_slice())
    }

    /// Singular values of `B` restricted to `𝓟`, as a map into the 91
    /// independent entries of a symmetric matrix (Frobenius metric).
    pub fn injectivity_singular_values(&self) -> Vec<f64> {
        let pairs = pair_index();
        let sys = DMatrix::from_fn(pairs.len(), self.product.dim, |r, m| {
            let (i, j) = pairs[r];
            self.b_basis[m][(i, j)] * if i == j { 1.0 } else { std::f64::consts::SQRT_2 }
        });
        singular_values(&sys)
    }

    /// Solve `B(q) = A` over `𝓟` and invert `q = 2λρ + ½Δρ` block by block.
    pub fn realize_conformal_factor(&self, a: &DMatrix<f64>, inv: &InvariantBasis) -> Result<ConformalFactor, SplitError> {
        let pairs = pair_index();
        let mut sys = DMatrix::zeros(pairs.len(), self.product.dim);
        for (m, b) in self.b_basis.iter().enumerate() {
            for (r, &(i, j)) in pairs.iter().enumerate() {
                sys[(r, m)] = b[(i, j)] * if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
            }
        }
        let rhs = DVector::from_iterator(
            pairs.len(),
            pairs.iter().map(|&(i, j)| a[(i, j)] * if i == j { 1.0 } else { std::f64::consts::SQRT_2 }),
        );
        let svd = SVD::new(sys.clone(), true, true);
        let top = svd.singular_values.max();
        let c = svd.solve(&rhs, 1e-12 * top).expect("SVD solve");
        let residual = (&sys * &c - &rhs).norm();
        if residual > 1e-9 * rhs.norm().max(1.0) {
            return Err(SplitError::NotRealizable(residual));
        }
        // q at the nodes, then its coordinates on the invariant blocks
        let qv = &self.p_values * &c;
        let psi = inv.values_matrix(&self.quad.nodes);
        let wq = DVector::from_iterator(self.quad.len(), (0..self.quad.len()).map(|k| qv[k] * self.quad.weights[k] * VOL_M));
        let q_coeffs: Vec<f64> = (psi.transpose() * wq).iter().copied().collect();
        let shifts = inv.degrees();
        let coeffs: Vec<f64> =
            q_coeffs.iter().zip(&shifts).map(|(q, &n)| q / (2.0 * LAMBDA_1 + (n * (n + 2)) as f64 / 2.0)).collect();
        let round_trip_error = (self.operator_of_factor(inv, &coeffs) - a).norm();
        Ok(ConformalFactor { coeffs, q_coeffs, p_coords: c.iter().copied().collect(), residual, round_trip_error })
    }
}

fn check_gap(a: &DMatrix<f64>, gap: f64) -> Result<(), SplitError> {
    let scale = a.norm().max(1e-300);
    if gap <= 1e-8 * scale {
        Err(SplitError::NotSimple(gap))
    } else {
        Ok(())
    }
}

/// Singular values, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = SVD::new(m.clone(), false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Orthonormal basis of `v⊥` (columns).
pub fn orth_complement(v: &DVector<f64>) -> DMatrix<f64> {
    let n = v.len();
    let v = v / v.norm();
    let p = DMatrix::identity(n, n) - &v * v.transpose();
    let (vals, vecs) = sorted_eigen(&p);
    let cols: Vec<usize> = (0..n).filter(|&i| vals[i] > 0.5).collect();
    DMatrix::from_fn(n, cols.len(), |i, k| vecs[(i, cols[k])])
}

/// `dℓ_A(H) = −(A − λ₁I)⁺ P_{v⊥}(Hv)`, the derivative of the lowest
/// eigenline, as a vector in `v⊥`. It is the derivative of the unit
/// eigenvector `v` returned by [`lowest`]; the other representative `−v`
/// has derivative `−dℓ_A(H)`.
pub fn eigenline_differential(a: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<DVector<f64>, SplitError> {
    let (vals, vecs) = sorted_eigen(a);
    let gap = vals[1] - vals[0];
    check_gap(a, gap)?;
    let v = vecs.column(0).into_owned();
    let hv = h * &v;
    let p = &hv - &v * v.dot(&hv);
    let mut out = DVector::zeros(a.nrows());
    for k in 1..vals.len() {
        let u = vecs.column(k);
        out -= u * (u.dot(&p) / (vals[k] - vals[0]));
    }
    Ok(out)
}

/// Lowest unit eigenvector with sign fixed to have positive overlap with `reference`.
pub fn lowest_eigvec_aligned(a: &DMatrix<f64>, reference: &DVector<f64>) -> DVector<f64> {
    let (_, v, _) = lowest(a);
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v
    }
}

/// Result of realizing a line as a lowest eigenline.
#[derive(Clone, Debug)]
pub struct LineRealization {
    /// The operator, an element of `𝓑`.
    pub operator: DMatrix<f64>,
    /// Coordinates of the correction over the basis of `𝓑`.
    pub delta_coords: Vec<f64>,
    /// Its lowest eigenvalue.
    pub lowest_eigenvalue: f64,
    /// Gap above the lowest eigenvalue.
    pub gap: f64,
    /// Sine of the angle between the lowest eigenvector and the target.
    pub alignment_error: f64,
    /// Angle between the target and the seed's lowest line.
    pub chart_angle: f64,
    /// Number of correction steps taken (0 if the seed already realizes the line).
    pub steps: usize,
}
