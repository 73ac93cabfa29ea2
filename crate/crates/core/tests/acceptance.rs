//! End-to-end acceptance run: eight numbered criteria, one PASS/FAIL line
//! each, with the measured numbers behind every check.
//!
//! Every criterion recomputes its reference values independently of the code
//! path under test where that is possible: exact constants written out by
//! hand, point evaluation for the reproducing kernel, a separate quadrature
//! for splitting operators, explicit finite differences for the eigenline,
//! and a direct spectral evolution for the heat flow.
//!
//! One check is a known deviation: the lowest eigenvector of the seed
//! operator `A₀` is *not* the invariant seed line. Since `A₀ = −K Kᵀ` for
//! the evaluation representer `K`, its lowest line is `K` itself, and
//! `cos²(K, F₀) = 11/25` exactly. The run reports that criterion as FAIL and
//! exits successfully only if it is the single failing check; any other
//! failure, or that check unexpectedly passing, makes the run fail.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use poincare_core::binform::coefficient_a_exact;
use poincare_core::critscan::{
    exact_hessian_at, m_critical_census, s2_critical_census, sextic_exceptional_points, value_orbits, CensusOptions,
    PolyFunction, S2Options, SeedFunctions,
};
use poincare_core::exactnum::{Nf, Real};
use poincare_core::galerkin::{
    alignment, heat_demo, heat_initial_data, slope_error, solve_branch, AssemblyData, HeatInit, InvariantBasis,
    SamplePoints, TargetFactor, RHO_MARGIN,
};
use poincare_core::quatgroup::{
    binary_icosahedral, fiber_stabilizer_order_exact, hopf_orbit_size, z3_sextic_frame, ExactRay, ExceptionalPoints,
    GroupTable,
};
use poincare_core::spherepoly::{icosahedral_sextic, Su2Quadrature, VOL_M};
use poincare_core::splitting::{
    abs_cos, lowest, sorted_eigen, EigenBasis, SplittingAlgebra, BASE_POINT, DIM_E, LAMBDA_1,
};

/// The check that is expected to fail, as `(criterion, check name)`.
const KNOWN_DEVIATION: (usize, &str) = (5, "A0 lowest line is F0");

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> Check {
    Check { name: name.to_string(), pass, detail: detail.into() }
}

struct Outcome {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
    elapsed: Duration,
}

fn run(id: usize, title: &'static str, budget: Duration, f: impl FnOnce() -> Vec<Check>) -> Outcome {
    let t = Instant::now();
    let mut checks = f();
    let elapsed = t.elapsed();
    checks.push(check(
        "runtime",
        elapsed <= budget,
        format!("{:.1} s of {} s", elapsed.as_secs_f64(), budget.as_secs()),
    ));
    Outcome { id, title, checks, elapsed }
}

fn group() -> GroupTable {
    binary_icosahedral()
}

fn census_options() -> CensusOptions {
    CensusOptions { starts: 4096, ..Default::default() }
}

// ---------------------------------------------------------------------------
// Shared helpers

/// `B^(ρ)` computed from scratch on an independent degree-48 rule:
/// `−∫ q φ_i φ_j` with `q = Σ (2λ + n(n+2)/2) ρ_k ψ_k`.
fn splitting_operator_by_quadrature(inv: &InvariantBasis, eigen: &EigenBasis, rho: &[f64], quad: &Su2Quadrature) -> DMatrix<f64> {
    let degrees = inv.degrees();
    let mut out = DMatrix::zeros(DIM_E, DIM_E);
    for (x, w) in quad.nodes.iter().zip(&quad.weights) {
        let psi = inv.eval(x);
        let q: f64 =
            (0..rho.len()).map(|k| (2.0 * LAMBDA_1 + (degrees[k] * (degrees[k] + 2)) as f64 / 2.0) * rho[k] * psi[k]).sum();
        let phi = eigen.eval(x);
        for i in 0..DIM_E {
            for j in 0..DIM_E {
                out[(i, j)] -= w * VOL_M * q * phi[i] * phi[j];
            }
        }
    }
    out
}

/// Lowest eigenvector of `a`, with its sign fixed against `reference`.
fn lowest_line(a: &DMatrix<f64>, reference: &DVector<f64>) -> DVector<f64> {
    let (_, v, _) = lowest(a);
    if v.dot(reference) < 0.0 {
        -v
    } else {
        v
    }
}

// ---------------------------------------------------------------------------
// The criteria

fn criterion_1() -> Vec<Check> {
    let z2 = ExactRay { alpha: Nf::i(), beta: Nf::frac(1, 1) };
    let z3 = z3_sextic_frame();
    let s3 = Real::sqrt3();
    let r = |n, d| Real::frac(n, d);
    let cases = [
        ("A0(z2) = -11/64 - i/32", 0, &z2, Nf::new(r(-11, 64), r(-1, 32))),
        ("A4(z2) = -165/64 - 165i/32", 4, &z2, Nf::new(r(-165, 64), r(-165, 32))),
        (
            "A3(z3) = -55(sqrt3 + 1)/216 + 55(sqrt3 - 1)i/216",
            3,
            &z3,
            Nf::new(-(&s3 * &r(55, 216)) - r(55, 216), &s3 * &r(55, 216) - r(55, 216)),
        ),
        ("A0(z3) = 11 sqrt3/216 - i/27", 0, &z3, Nf::new(&s3 * &r(11, 216), r(-1, 27))),
    ];
    cases
        .into_iter()
        .map(|(name, j, z, want)| {
            let got = coefficient_a_exact(j, z);
            let diff = &got - &want;
            check(name, got == want, format!("difference {:?}", diff.to_c64()))
        })
        .collect()
}

fn criterion_2() -> Vec<Check> {
    let g = group();
    let pts = ExceptionalPoints::new(&g);
    let stab = [
        fiber_stabilizer_order_exact(&pts.z5, &g),
        fiber_stabilizer_order_exact(&pts.z3, &g),
        fiber_stabilizer_order_exact(&pts.z2, &g),
    ];
    let orbits = [
        hopf_orbit_size(&pts.z5.to_unit(), &g, 1e-9),
        hopf_orbit_size(&pts.z3.to_unit(), &g, 1e-9),
        hopf_orbit_size(&pts.z2.to_unit(), &g, 1e-9),
    ];
    vec![
        check("order 120", g.len() == 120, g.len().to_string()),
        check("closed under exact multiplication", g.verify_exact(), ""),
        // a fiber over a point with rotation stabilizer of order m is fixed by 2m elements
        check("stabilizers 10/6/4", stab == [10, 6, 4], format!("{stab:?}")),
        // 60 / 5, 60 / 3, 60 / 2
        check("Hopf orbits 12/20/30", orbits == [12, 20, 30], format!("{orbits:?}")),
    ]
}

fn criterion_3() -> Vec<Check> {
    let p = icosahedral_sextic();
    let c = s2_critical_census("P", &PolyFunction::<3>::new(p.to_f64_poly()), &S2Options::default());
    let mut sizes: Vec<usize> = value_orbits(&c, 1e-9).iter().map(|o| o.1).collect();
    sizes.sort();
    let gmax = c.records.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
    let mut checks = vec![
        check("62 critical points", c.total == 62, c.total.to_string()),
        check("orbits 12/20/30", sizes == [12, 20, 30], format!("{sizes:?}")),
        check("gradient norms", gmax < 1e-10, format!("{gmax:e}")),
    ];

    let s5 = Real::sqrt5();
    let r = |n, d| Real::frac(n, d);
    let zero = Real::frac(0, 1);
    let expected = [
        [[r(24, 1) + &s5 * &r(56, 5), zero.clone()], [zero.clone(), r(32, 5) + &s5 * &r(16, 5)]],
        [[-(r(64, 9) + &s5 * &r(32, 9)), zero.clone()], [zero.clone(), -(r(64, 3) + &s5 * &r(32, 3))]],
        [[-(&s5 * &r(3, 1)) - r(5, 1), r(-2, 1)], [r(-2, 1), r(1, 1) + s5.clone()]],
    ];
    for ((pt, u, v), (want, name)) in sextic_exceptional_points().iter().zip(expected.iter().zip(["p5", "p3", "p2"])) {
        match exact_hessian_at(&p, pt, u, v) {
            Ok((h, _)) => check_hessian(&mut checks, name, &h, want),
            Err(e) => checks.push(check(&format!("{name} Hessian"), false, e.to_string())),
        }
    }
    if let Ok((h, _)) = exact_hessian_at(&p, &sextic_exceptional_points()[2].0, &sextic_exceptional_points()[2].1, &sextic_exceptional_points()[2].2) {
        let det = &h[0][0] * &h[1][1] - &h[0][1] * &h[1][0];
        let want = r(-24, 1) - &s5 * &r(8, 1);
        checks.push(check("p2 determinant -24 - 8 sqrt5", det == want, format!("{:.12}", det.to_f64())));
    }
    checks
}

fn check_hessian(checks: &mut Vec<Check>, name: &str, h: &[[Real; 2]; 2], want: &[[Real; 2]; 2]) {
    let ok = (0..2).all(|i| (0..2).all(|j| h[i][j] == want[i][j]));
    let shown: Vec<String> = h.iter().flatten().map(|x| format!("{:.10}", x.to_f64())).collect();
    checks.push(check(&format!("{name} Hessian exact"), ok, shown.join(", ")));
}

fn criterion_4() -> Vec<Check> {
    let g = group();
    let s = SeedFunctions::new();
    let opts = census_options();
    let mut checks = Vec::new();
    match m_critical_census("F0", &s.seed(), &g, &opts) {
        Ok(c) => {
            checks.push(check("F0: 3 Bott circles", c.bott_circles.len() == 3, format!("{:?}", c.bott_circles)));
            checks.push(check("F0: no isolated points", c.total == 0, c.total.to_string()));
            checks.push(check("F0: Euler sum 0", c.euler_sum == 0, c.euler_sum.to_string()));
        }
        Err(e) => checks.push(check("F0 census", false, e.to_string())),
    }
    for e in [1e-2, 3e-3] {
        for (label, f, want_total, want_split) in [
            ("Fab", s.fab(e, e), 12, [2, 4, 6, 0]),
            ("Psi", s.psi(e, e, e), 6, [2, 2, 2, 0]),
        ] {
            match m_critical_census(label, &f, &g, &opts) {
                Ok(c) => {
                    checks.push(check(
                        &format!("{label}({e}): {want_total} points split {want_split:?}"),
                        c.total == want_total && c.counts_by_circle == want_split,
                        format!("{} {:?}", c.total, c.counts_by_circle),
                    ));
                    checks.push(check(&format!("{label}({e}): Euler sum 0"), c.euler_sum == 0, c.euler_sum.to_string()));
                }
                Err(err) => checks.push(check(&format!("{label}({e}) census"), false, err.to_string())),
            }
        }
    }
    checks
}

fn criterion_5(alg: &SplittingAlgebra) -> Vec<Check> {
    let mut checks = Vec::new();
    let b1 = alg.splitting_matrix(|_| 1.0);
    let e = (&b1 + DMatrix::identity(DIM_E, DIM_E)).abs().max();
    checks.push(check("B(1) = -I", e < 1e-12, format!("{e:e}")));

    // Rayleigh identity against direct point evaluation at the base coset
    let (a0, _) = alg.seed_operator();
    let phi_o = DVector::from_column_slice(&alg.basis.eval(&BASE_POINT));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let f = DVector::from_fn(DIM_E, |_, _| StandardNormal.sample(&mut rng));
        let lhs = f.dot(&(&a0 * &f));
        let rhs = -f.dot(&phi_o).powi(2);
        worst = worst.max((lhs - rhs).abs());
    }
    checks.push(check("Rayleigh identity over 50 random f", worst < 1e-9, format!("{worst:e}")));

    let (_, v, gap) = lowest(&a0);
    checks.push(check("A0 gap positive", gap > 0.0, format!("{gap:e}")));
    let c = abs_cos(&v, &EigenBasis::seed_coords());
    checks.push(check(
        KNOWN_DEVIATION.1,
        c > 1.0 - 1e-9,
        format!("|cos| = {c:.12}; the exact value is sqrt(11/25) = {:.12}", (11.0f64 / 25.0).sqrt()),
    ));

    match alg.submersion_rank(&a0) {
        Ok((r, _)) => checks.push(check("submersion rank 12 at A0", r == DIM_E - 1, r.to_string())),
        Err(e) => checks.push(check("submersion rank 12 at A0", false, e.to_string())),
    }

    // The eigenline differential must predict ℓ(A0 + tH) to second order.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let h = {
        let m: DMatrix<f64> = DMatrix::from_fn(DIM_E, DIM_E, |_, _| StandardNormal.sample(&mut rng));
        (&m + m.transpose()) * 0.5
    };
    match poincare_core::splitting::eigenline_differential(&a0, &h) {
        Ok(dl) => {
            let v0 = lowest(&a0).1;
            let err = |t: f64| {
                let vt = lowest_line(&(&a0 + &h * t), &v0);
                (vt - &v0 - &dl * t).norm()
            };
            let (e1, e2) = (err(1e-3), err(5e-4));
            let ratio = e1 / e2;
            checks.push(check(
                "eigenline differential second order",
                (3.5..=4.5).contains(&ratio),
                format!("ratio {ratio:.4} ({e1:e} / {e2:e})"),
            ));
        }
        Err(e) => checks.push(check("eigenline differential second order", false, e.to_string())),
    }
    checks
}

fn criterion_6(alg: &SplittingAlgebra, inv: &InvariantBasis, quad: &Su2Quadrature) -> Vec<Check> {
    let mut checks = Vec::new();
    let (a0, _) = alg.seed_operator();
    let (ac, _) = alg.fiber_average_operator();
    let psi_op = alg.line_realization(&EigenBasis::psi_coords(1e-2, 1e-2, 1e-2), &ac, 0.2).map(|lr| lr.operator);
    for (name, op) in [("A0", Ok(a0)), ("Psi target", psi_op)] {
        let op = match op {
            Ok(o) => o,
            Err(e) => {
                checks.push(check(&format!("{name}: realized"), false, e.to_string()));
                continue;
            }
        };
        match alg.realize_conformal_factor(&op, inv) {
            Ok(cf) => {
                let direct = (splitting_operator_by_quadrature(inv, &alg.basis, &cf.coeffs, quad) - &op).norm();
                checks.push(check(&format!("{name}: round trip"), direct < 1e-8, format!("{direct:e}")));
            }
            Err(e) => checks.push(check(&format!("{name}: realized"), false, e.to_string())),
        }
    }
    checks
}

fn criterion_7(alg: &SplittingAlgebra, inv: &InvariantBasis, tf: &TargetFactor, quad: &Su2Quadrature) -> Vec<Check> {
    let mut checks = Vec::new();
    // ε = 0: the spherical spectrum n(n+2) with the invariant multiplicities
    match AssemblyData::new(inv, &vec![0.0; inv.dim()], RHO_MARGIN).and_then(|d| solve_branch(&d.forms(0.0))) {
        Ok(spec) => {
            let mut want = vec![0.0];
            want.extend([168.0; 13]);
            want.extend([440.0; 21]);
            want.extend([624.0; 25]);
            let err = spec.eigenvalues.iter().zip(&want).map(|(a, b)| (a - b).abs() / b.max(1.0)).fold(0.0, f64::max);
            checks.push(check(
                "blocks {0, 168x13, 440x21, 624x25}",
                spec.eigenvalues.len() == 60 && err < 1e-8,
                format!("{err:e}"),
            ));
        }
        Err(e) => checks.push(check("spectrum at eps = 0", false, e.to_string())),
    }

    // reference slopes from an independently assembled B^(ρ)
    let b = splitting_operator_by_quadrature(inv, &alg.basis, &tf.rho, quad);
    let (bev, _) = sorted_eigen(&b);
    let target = inv.embed_eigen(tf.target.as_slice());
    let g = group();
    let mut errs = Vec::new();
    for eps in [1e-2, 3e-3, 1e-3] {
        let spec = match solve_branch(&tf.data.forms(eps)) {
            Ok(s) => s,
            Err(e) => {
                checks.push(check(&format!("eps {eps}: solve"), false, e.to_string()));
                return checks;
            }
        };
        checks.push(check(&format!("eps {eps}: lambda1 simple"), spec.gap > 0.0, format!("gap {:e}", spec.gap)));
        errs.push(slope_error(&spec.slopes, bev.as_slice()));
        let al = alignment(&spec.first_vector, &target);
        if eps == 1e-3 {
            checks.push(check("alignment at eps 1e-3", al > 0.99, format!("{al:.10}")));
        }
        match m_critical_census("phi_eps", &inv.function(&spec.first_vector), &g, &census_options()) {
            Ok(c) => checks.push(check(&format!("eps {eps}: census 6"), c.total == 6, c.total.to_string())),
            Err(e) => checks.push(check(&format!("eps {eps}: census 6"), false, e.to_string())),
        }
    }
    for k in 1..errs.len() {
        let ratio = errs[k - 1] / errs[k];
        checks.push(check(
            &format!("slope error ratio step {k}"),
            ratio >= 2.5,
            format!("{ratio:.3} ({:e} -> {:e})", errs[k - 1], errs[k]),
        ));
    }
    checks
}

fn criterion_8(inv: &InvariantBasis, tf: &TargetFactor) -> Vec<Check> {
    let mut checks = Vec::new();
    let forms = tf.data.forms(1e-3);
    let spec = match solve_branch(&forms) {
        Ok(s) => s,
        Err(e) => return vec![check("solve", false, e.to_string())],
    };
    let rate = spec.eigenvalues[2] - spec.eigenvalues[1];
    let times: Vec<f64> = (0..=16).map(|k| k as f64 / spec.gap).collect();
    let samples = SamplePoints::new(inv, 256);
    let g = group();
    let opts = census_options();
    let mut worst_rate = 0.0f64;
    let mut censuses = Vec::new();
    for run in 0..10u64 {
        let f = heat_initial_data(HeatInit::Random, &spec, &forms, run);
        // Direct evolution: expand f in the M-orthonormal eigenvectors, drop the
        // constant mode, and measure the distance to the first-mode line.
        let fv = DVector::from_column_slice(&f);
        let coeffs = spec.vectors.transpose() * (&forms.m * &fv);
        let dist = |t: f64| {
            let c1 = coeffs[1] * (-spec.eigenvalues[1] * t).exp();
            let rest: f64 =
                (2..coeffs.len()).map(|k| (coeffs[k] * (-spec.eigenvalues[k] * t).exp()).powi(2)).sum::<f64>().sqrt();
            rest / c1.abs()
        };
        let (t0, t1) = (times[8], times[16]);
        let fitted = (dist(t0).ln() - dist(t1).ln()) / (t1 - t0);
        worst_rate = worst_rate.max((fitted - rate).abs() / rate);
        match heat_demo(inv, &forms, &spec, &f, &times, &samples, Some((&g, &opts))) {
            Ok(r) => {
                worst_rate = worst_rate.max(r.rate_error);
                censuses.push(r.final_census.map(|c| c.total).unwrap_or(0));
            }
            Err(e) => checks.push(check(&format!("run {run}"), false, e.to_string())),
        }
    }
    checks.push(check("decay rate lambda2 - lambda1 within 10%", worst_rate < 0.1, format!("worst {worst_rate:.3e}")));
    checks.push(check("final census 6 in all 10 runs", censuses.iter().all(|&c| c == 6), format!("{censuses:?}")));

    let f = heat_initial_data(HeatInit::Perp, &spec, &forms, 0);
    match heat_demo(inv, &forms, &spec, &f, &times, &samples, None) {
        Ok(r) => checks.push(check("zero first mode flagged exceptional", r.exceptional, format!("{:e}", r.first_mode))),
        Err(e) => checks.push(check("zero first mode flagged exceptional", false, e.to_string())),
    }
    checks
}

fn main() -> ExitCode {
    // Honour `cargo test -- --list` and name filters the way the default harness would.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    if let Some(filter) = args.iter().find(|a| !a.starts_with('-')) {
        if !"acceptance".contains(filter.as_str()) {
            return ExitCode::SUCCESS;
        }
    }

    let mut out = vec![
        run(1, "exact identities", Duration::from_secs(5), criterion_1),
        run(2, "group", Duration::from_secs(5), criterion_2),
        run(3, "sextic census", Duration::from_secs(60), criterion_3),
        run(4, "Morse counts on M", Duration::from_secs(600), criterion_4),
    ];
    let alg = SplittingAlgebra::new().expect("splitting algebra");
    out.push(run(5, "splitting algebra", Duration::from_secs(120), || criterion_5(&alg)));
    let g = group();
    let inv = InvariantBasis::build(24, &g, &alg.basis).expect("invariant basis");
    let quad = Su2Quadrature::new(48);
    out.push(run(6, "realizability", Duration::from_secs(120), || criterion_6(&alg, &inv, &quad)));
    let (ac, _) = alg.fiber_average_operator();
    let tf = TargetFactor::new(&alg, &inv, &EigenBasis::psi_coords(1e-2, 1e-2, 1e-2), &ac, 0.2).expect("target factor");
    out.push(run(7, "Galerkin branch selection", Duration::from_secs(900), || criterion_7(&alg, &inv, &tf, &quad)));
    out.push(run(8, "heat flow", Duration::from_secs(600), || criterion_8(&inv, &tf)));

    let mut unexpected = Vec::new();
    for o in &out {
        let failed: Vec<&Check> = o.checks.iter().filter(|c| !c.pass).collect();
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {} [{}]: {} in {:.1} s", o.id, o.title, verdict, o.elapsed.as_secs_f64());
        for c in &o.checks {
            let known = (o.id, c.name.as_str()) == KNOWN_DEVIATION;
            let tag = match (c.pass, known) {
                (true, false) => "ok",
                (false, true) => "known deviation",
                (false, false) => "FAILED",
                (true, true) => "UNEXPECTED PASS",
            };
            println!("    {tag:>16}  {}: {}", c.name, c.detail);
            if c.pass == known {
                unexpected.push(format!("criterion {}: {}", o.id, c.name));
            }
        }
    }
    let passed = out.iter().filter(|o| o.checks.iter().all(|c| c.pass)).count();
    println!("\n{passed}/8 criteria pass");
    if unexpected.is_empty() {
        println!("all results as expected; the only failing check is the documented deviation in criterion {}", KNOWN_DEVIATION.0);
        ExitCode::SUCCESS
    } else {
        println!("unexpected results: {}", unexpected.join("; "));
        ExitCode::FAILURE
    }
}
