use nalgebra::{DMatrix, DVector};
use poincare_core::critscan::CensusOptions;
use poincare_core::galerkin::{
    alignment, heat_demo, heat_initial_data, invariant_dimension, reynolds_forms, slope_error, solve_branch,
    AssemblyData, HeatInit, InvariantBasis, SamplePoints, TargetFactor, RHO_MARGIN,
};
use poincare_core::binform::act;
use poincare_core::quatgroup::{binary_icosahedral, GroupTable};
use poincare_core::splitting::{sorted_eigen, EigenBasis, SplittingAlgebra, DIM_E, LAMBDA_1};
use poincare_core::spherepoly::{Su2Quadrature, VOL_M};
use std::sync::OnceLock;

fn group() -> &'static GroupTable {
    static G: OnceLock<GroupTable> = OnceLock::new();
    G.get_or_init(binary_icosahedral)
}

fn alg() -> &'static SplittingAlgebra {
    static A: OnceLock<SplittingAlgebra> = OnceLock::new();
    A.get_or_init(|| SplittingAlgebra::new().unwrap())
}

fn basis() -> &'static InvariantBasis {
    static B: OnceLock<InvariantBasis> = OnceLock::new();
    B.get_or_init(|| InvariantBasis::build(24, group(), &alg().basis).unwrap())
}

fn target() -> &'static TargetFactor {
    static T: OnceLock<TargetFactor> = OnceLock::new();
    T.get_or_init(|| {
        let (ac, _) = alg().fiber_average_operator();
        TargetFactor::new(alg(), basis(), &EigenBasis::psi_coords(1e-2, 1e-2, 1e-2), &ac, 0.2).unwrap()
    })
}

/// Coefficients of `(1 + t³⁰)/((1 − t¹²)(1 − t²⁰))` up to `t^max`.
fn molien(max: usize) -> Vec<usize> {
    let mut c = vec![0usize; max + 1];
    for a in (0..=max).step_by(12) {
        for b in (0..=max - a).step_by(20) {
            c[a + b] += 1;
            if a + b + 30 <= max {
                c[a + b + 30] += 1;
            }
        }
    }
    c
}

#[test]
fn invariant_dimensions_follow_the_molien_series() {
    let m = molien(62);
    for (n, want) in m.iter().enumerate() {
        assert_eq!(invariant_dimension(n, group()), *want, "degree {n}");
    }
}

#[test]
fn reynolds_forms_are_invariant() {
    for n in [12usize, 20, 24, 30] {
        let forms = reynolds_forms(n, group());
        assert_eq!(forms.len(), invariant_dimension(n, group()));
        for f in &forms {
            for h in group().floats.iter().step_by(7) {
                let g = act(&h.alpha(), &h.beta(), f);
                for (a, b) in g.coeffs.iter().zip(&f.coeffs) {
                    assert!((a - b).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn basis_blocks_have_the_expected_sizes() {
    let s = basis().summary();
    let got: Vec<(usize, usize, usize)> = s.iter().map(|b| (b.degree, b.dimension, b.eigenvalue)).collect();
    assert_eq!(got, vec![(0, 1, 0), (12, 13, 168), (20, 21, 440), (24, 25, 624)]);
    assert_eq!(basis().dim(), 60);
    assert_eq!(basis().eigen_offset(), 1);
}

#[test]
fn basis_is_orthonormal_under_an_independent_rule() {
    let q = Su2Quadrature::new(48);
    let v = basis().values_matrix(&q.nodes);
    let w = DMatrix::from_fn(q.len(), basis().dim(), |i, j| v[(i, j)] * q.weights[i] * VOL_M);
    let gram = v.transpose() * w;
    let err = (gram - DMatrix::identity(basis().dim(), basis().dim())).abs().max();
    assert!(err < 1e-13, "{err:e}");
}

#[test]
fn eigen_block_reproduces_the_first_eigenspace() {
    let x = [0.3, -0.5, 0.1, 0.8];
    let r = x.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    let x = x.map(|v| v / r);
    let vals = basis().eval(&x);
    let phi = alg().basis.eval(&x);
    for i in 0..DIM_E {
        assert!((vals[1 + i] - phi[i]).abs() < 1e-12);
    }
}

#[test]
fn gradients_match_finite_differences_along_the_frame() {
    let x = [0.3, -0.5, 0.1, 0.8];
    let r = x.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
    let x: [f64; 4] = x.map(|v| v / r);
    let (_, grads) = basis().eval_with_gradient(&x);
    let frame = poincare_core::critscan::tangent_frame(&x);
    let h: f64 = 1e-6;
    for (t, e) in frame.iter().enumerate() {
        // move along the great circle cos(h)x + sin(h)e
        let p: [f64; 4] = std::array::from_fn(|i| h.cos() * x[i] + h.sin() * e[i]);
        let m: [f64; 4] = std::array::from_fn(|i| h.cos() * x[i] - h.sin() * e[i]);
        let (vp, vm) = (basis().eval(&p), basis().eval(&m));
        for k in 0..basis().dim() {
            let fd = (vp[k] - vm[k]) / (2.0 * h);
            assert!((fd - grads[t][k]).abs() < 1e-5 * (1.0 + grads[t][k].abs()), "dir {t}, fn {k}");
        }
    }
}

#[test]
fn round_metric_forms_are_diagonal() {
    let data = AssemblyData::new(basis(), &vec![0.0; basis().dim()], RHO_MARGIN).unwrap();
    let f = data.forms(0.0);
    let n = basis().dim();
    let want_a = DMatrix::from_diagonal(&DVector::from_iterator(n, basis().degrees().iter().map(|&d| (d * (d + 2)) as f64)));
    assert!((&f.m - DMatrix::identity(n, n)).abs().max() < 1e-13);
    assert!((&f.a - want_a).abs().max() < 1e-8);
    let spec = solve_branch(&f).unwrap();
    assert!((spec.lambda1 - LAMBDA_1).abs() < 1e-9);
    assert!(spec.cluster.iter().all(|l| (l - LAMBDA_1).abs() < 1e-9));
    assert!((spec.gap).abs() < 1e-9);
    assert!((spec.eigenvalues[DIM_E + 1] - 440.0).abs() < 1e-8);
}

#[test]
fn constant_factor_rescales_the_spectrum() {
    // g = e^{2c ε} g₀ in dimension three: a picks up e^{cε}, m picks up e^{3cε}
    let c = 0.7;
    let mut rho = vec![0.0; basis().dim()];
    rho[0] = c / basis().constant;
    let data = AssemblyData::new(basis(), &rho, RHO_MARGIN).unwrap();
    let eps = 0.05;
    let spec = solve_branch(&data.forms(eps)).unwrap();
    let s = (-2.0 * c * eps).exp();
    assert!((spec.lambda1 - LAMBDA_1 * s).abs() < 1e-9);
    assert!((spec.eigenvalues[DIM_E + 1] - 440.0 * s).abs() < 1e-8);
}

#[test]
fn first_order_forms_are_the_derivative_of_the_forms() {
    let t = target();
    let (a1, m1) = t.data.first_order_forms();
    let f0 = t.data.forms(0.0);
    let h = 1e-6;
    let (fp, fm) = (t.data.forms(h), t.data.forms(-h));
    let da = (&fp.a - &fm.a) / (2.0 * h);
    let dm = (&fp.m - &fm.m) / (2.0 * h);
    assert!((da - &a1).abs().max() < 1e-5 * (1.0 + f0.a.abs().max()));
    assert!((dm - &m1).abs().max() < 1e-6);
}

#[test]
fn first_order_block_equals_the_splitting_operator() {
    // on E, d/dε (a − 168 m) is the splitting operator of ρ
    let t = target();
    let (a1, m1) = t.data.first_order_forms();
    let o = basis().eigen_offset();
    let block = (&a1 - &m1 * LAMBDA_1).view((o, o), (DIM_E, DIM_E)).into_owned();
    let op = alg().operator_of_factor(basis(), &t.rho);
    assert!((&block - &op).abs().max() < 1e-9 * op.abs().max(), "{:e}", (&block - &op).abs().max());
    assert!((&op - &t.operator).abs().max() < 1e-9 * op.abs().max());
}

#[test]
fn target_factor_is_normalized_and_realizes_the_line() {
    let t = target();
    assert!((t.data.rho_sup() - 1.0).abs() < 1e-14);
    let (_, v, gap) = poincare_core::splitting::lowest(&t.operator);
    assert!(gap > 0.0);
    assert!(poincare_core::splitting::abs_cos(&v, &t.target) > 1.0 - 1e-12);
    assert!(t.round_trip_error < 1e-9);
}

#[test]
fn branch_selection_converges_linearly() {
    let t = target();
    let (bev, _) = sorted_eigen(&t.operator);
    let goal = t.target_full(basis());
    let mut errs = Vec::new();
    let mut aligns = Vec::new();
    for eps in [1e-2, 3e-3, 1e-3] {
        let spec = solve_branch(&t.data.forms(eps)).unwrap();
        assert!(spec.residual < 1e-10);
        assert!(spec.gap > 0.0);
        errs.push(slope_error(&spec.slopes, &bev));
        aligns.push(alignment(&spec.first_vector, &goal));
    }
    // slopes are exact to first order, so errors shrink like ε
    for k in 1..3 {
        let ratio = errs[k - 1] / errs[k];
        assert!((2.5..4.5).contains(&ratio), "ratio {ratio}");
        assert!(aligns[k] > aligns[k - 1]);
    }
    assert!(aligns[2] > 1.0 - 1e-6);
}

#[test]
fn heat_flow_along_the_first_mode_and_orthogonal_to_it() {
    let t = target();
    let forms = t.data.forms(1e-3);
    let spec = solve_branch(&forms).unwrap();
    let samples = SamplePoints::new(basis(), 2000);
    let times: Vec<f64> = (0..=16).map(|s| s as f64 / spec.gap).collect();

    let f = heat_initial_data(HeatInit::Phi1, &spec, &forms, 0);
    let r = heat_demo(basis(), &forms, &spec, &f, &times, &samples, None).unwrap();
    assert!(!r.exceptional);
    assert!(r.samples.iter().all(|s| s.c0 < 1e-10 && s.energy_identity_error < 1e-10));

    let f = heat_initial_data(HeatInit::Perp, &spec, &forms, 0);
    let r = heat_demo(basis(), &forms, &spec, &f, &times, &samples, None).unwrap();
    assert!(r.exceptional);

    let f = heat_initial_data(HeatInit::Random, &spec, &forms, 3);
    let opts = CensusOptions { starts: 2048, ..Default::default() };
    let r = heat_demo(basis(), &forms, &spec, &f, &times, &samples, Some((group(), &opts))).unwrap();
    assert!(!r.exceptional);
    assert!(r.rate_error < 1e-3, "{}", r.rate_error);
    assert!(r.samples.iter().all(|s| s.energy_identity_error < 1e-10));
    let c = r.final_census.unwrap();
    assert_eq!(c.total, 6);
    assert_eq!(c.counts_by_circle, [2, 2, 2, 0]);
}

#[test]
fn truncation_is_stable_between_degree_24_and_30() {
    let t = target();
    let big = InvariantBasis::build(30, group(), &alg().basis).unwrap();
    assert_eq!(big.summary().last().map(|b| (b.degree, b.dimension)), Some((30, 31)));
    // the same ρ, padded with zeros on the new block
    let mut rho = t.rho.clone();
    rho.resize(big.dim(), 0.0);
    let data = AssemblyData::new(&big, &rho, RHO_MARGIN).unwrap();
    let eps = 1e-3;
    let small = solve_branch(&t.data.forms(eps)).unwrap();
    let large = solve_branch(&data.forms(eps)).unwrap();
    let diff = small.cluster.iter().zip(&large.cluster).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff:e}");
}
