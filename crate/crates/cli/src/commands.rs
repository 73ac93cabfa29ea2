//! One function per subcommand. Each returns a JSON report together with a
//! list of named checks; the binary exits nonzero if any check fails.

use anyhow::{bail, Context as _, Result};
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::{json, Value};

use poincare_core::binform::exact_identities;
use poincare_core::critscan::{
    exact_hessian_at, m_critical_census, s2_critical_census, sextic_exceptional_points, tube_census, value_orbits,
    CensusOptions, MorseCensus, PolyFunction, S2Options, SeedFunctions,
};
use poincare_core::galerkin::{
    alignment, heat_demo, heat_initial_data, slope_error, solve_branch, AssemblyData, CensusSummary, HeatInit,
    InvariantBasis, SamplePoints, SpectralReport, TargetFactor, RHO_MARGIN,
};
use poincare_core::quatgroup::{binary_icosahedral, GroupTable};
use poincare_core::spherepoly::icosahedral_sextic;
use poincare_core::splitting::{
    abs_cos, eigenline_differential, lowest, sorted_eigen, EigenBasis, SplittingAlgebra, BASE_POINT, DIM_E,
};

/// A named pass/fail check with a short detail string.
#[derive(Clone, Debug)]
pub struct Check {
    /// Name.
    pub name: String,
    /// Outcome.
    pub pass: bool,
    /// Measured quantity.
    pub detail: String,
}

impl Check {
    /// Build a check.
    pub fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.to_string(), pass, detail }
    }
}

/// A report and its checks.
pub struct Outcome {
    /// JSON payload.
    pub report: Value,
    /// Checks performed.
    pub checks: Vec<Check>,
}

impl Outcome {
    /// True if every check passed.
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// The report with the checks appended under `"checks"`.
    pub fn into_json(self) -> Value {
        let checks: Vec<Value> =
            self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect();
        let mut r = self.report;
        if let Value::Object(m) = &mut r {
            m.insert("checks".into(), Value::Array(checks));
        }
        r
    }
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>())
}

/// Objects shared by several commands, built on first use.
#[derive(Default)]
pub struct Context {
    group: Option<GroupTable>,
    algebra: Option<SplittingAlgebra>,
    bases: Vec<InvariantBasis>,
}

impl Context {
    /// The binary icosahedral group.
    pub fn group(&mut self) -> &GroupTable {
        self.group.get_or_insert_with(binary_icosahedral)
    }

    /// The splitting algebra.
    pub fn algebra(&mut self) -> Result<&SplittingAlgebra> {
        if self.algebra.is_none() {
            self.algebra = Some(SplittingAlgebra::new()?);
        }
        Ok(self.algebra.as_ref().unwrap())
    }

    /// The invariant basis up to degree `n_max`.
    pub fn basis(&mut self, n_max: usize) -> Result<InvariantBasis> {
        if let Some(b) = self.bases.iter().find(|b| b.n_max == n_max) {
            return Ok(b.clone());
        }
        let g = self.group().clone();
        let b = InvariantBasis::build(n_max, &g, &EigenBasis::new())?;
        self.bases.push(b.clone());
        Ok(b)
    }
}

// ---------------------------------------------------------------------------

/// `verify appendix`.
pub fn verify_appendix() -> Outcome {
    let ids = exact_identities();
    let checks = ids.iter().map(|e| Check::new(&e.label, e.holds(), format!("{}", e.computed))).collect();
    let items: Vec<Value> = ids
        .iter()
        .map(|e| {
            let c = e.computed.to_c64();
            json!({
                "label": e.label,
                "j": e.j,
                "computed": e.computed.to_string(),
                "expected": e.expected.to_string(),
                "coordinates": e.computed.coords().iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                "float": [c.re, c.im],
                "holds": e.holds(),
            })
        })
        .collect();
    let passed = ids.iter().filter(|e| e.holds()).count();
    Outcome { report: json!({"identities": items, "passed": passed, "total": ids.len()}), checks }
}

/// `group info`.
pub fn group_info(ctx: &mut Context) -> Outcome {
    let g = ctx.group();
    let r = g.report();
    let sep = g.min_coset_separation();
    let checks = vec![
        Check::new("order 120", r.order == 120, r.order.to_string()),
        Check::new("orbit sizes 12/20/30", r.orbit_sizes == [12, 20, 30], format!("{:?}", r.orbit_sizes)),
        Check::new("stabilizers 10/6/4", r.stabilizer_orders == [10, 6, 4], format!("{:?}", r.stabilizer_orders)),
        Check::new("table verified", r.table_verified, r.table_verified.to_string()),
    ];
    Outcome { report: json!({"group": r, "min_coset_separation": sep}), checks }
}

/// Function choices for `crit scan`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ScanFunction {
    /// The icosahedral sextic on `S²`.
    Sextic,
    /// The invariant seed on `M`.
    F0,
    /// `F₀ + a Re Â₀ + b Re Â₁`.
    Fab,
    /// `F₀ + ε₂ Re F̂₄ + ε₃ Re F̂₃ + ε₅ Re F̂₁`.
    Psi,
}

fn census_json(c: &MorseCensus) -> Value {
    serde_json::to_value(c).expect("census serializes")
}

/// Records as CSV text.
pub fn census_csv(c: &MorseCensus) -> String {
    let mut s = String::from("label,value,lagrange,morse_index,grad_norm,degenerate,x0,x1,x2,x3\n");
    for r in &c.records {
        let mut loc: Vec<String> = r.location.iter().map(|x| format!("{x:.15e}")).collect();
        loc.resize(4, String::new());
        s.push_str(&format!(
            "{:?},{:.15e},{:.15e},{},{:.3e},{},{}\n",
            r.label,
            r.value,
            r.lagrange,
            r.morse_index,
            r.grad_norm,
            r.degenerate,
            loc.join(",")
        ));
    }
    s
}

/// `crit scan`.
pub fn crit_scan(ctx: &mut Context, f: ScanFunction, params: &[f64], opts: &CensusOptions) -> Result<(Outcome, MorseCensus)> {
    let seeds = SeedFunctions::new();
    let need = match f {
        ScanFunction::Sextic | ScanFunction::F0 => 0,
        ScanFunction::Fab => 2,
        ScanFunction::Psi => 3,
    };
    if params.len() != need {
        bail!("function {f:?} takes {need} parameters, got {}", params.len());
    }
    if f == ScanFunction::Sextic {
        let p = icosahedral_sextic();
        let c = s2_critical_census("P", &PolyFunction::<3>::new(p.to_f64_poly()), &S2Options::default());
        let hess: Vec<Value> = sextic_exceptional_points()
            .iter()
            .map(|(pt, u, v)| {
                let (h, l) = exact_hessian_at(&p, pt, u, v).expect("exceptional points are critical");
                json!({
                    "hessian": [[h[0][0].to_string(), h[0][1].to_string()], [h[1][0].to_string(), h[1][1].to_string()]],
                    "multiplier": l.to_string(),
                    "determinant": (&h[0][0] * &h[1][1] - &h[0][1] * &h[1][0]).to_string(),
                })
            })
            .collect();
        let orbits = value_orbits(&c, 1e-9);
        let maxg = c.records.iter().map(|r| r.grad_norm).fold(0.0, f64::max);
        let mut sizes: Vec<usize> = orbits.iter().map(|o| o.1).collect();
        sizes.sort();
        let checks = vec![
            Check::new("62 critical points", c.total == 62, c.total.to_string()),
            Check::new("orbits 12/20/30", sizes == [12, 20, 30], format!("{sizes:?}")),
            Check::new("gradient norms below 1e-10", maxg < 1e-10, format!("{maxg:e}")),
        ];
        let report = json!({"census": census_json(&c), "value_orbits": orbits, "exact_hessians": hess});
        return Ok((Outcome { report, checks }, c));
    }
    let func = match f {
        ScanFunction::F0 => seeds.seed(),
        ScanFunction::Fab => seeds.fab(params[0], params[1]),
        _ => seeds.psi(params[0], params[1], params[2]),
    };
    let g = ctx.group().clone();
    let c = m_critical_census(&format!("{f:?}"), &func, &g, opts)?;
    let tubes = if f == ScanFunction::F0 { None } else { Some(tube_census(&func, &g, 720)?) };
    let mut checks = vec![Check::new("Euler sum zero", c.euler_sum == 0 || f == ScanFunction::F0, c.euler_sum.to_string())];
    match f {
        ScanFunction::F0 => {
            checks.push(Check::new("three Bott circles", c.bott_circles.len() == 3, format!("{:?}", c.bott_circles)))
        }
        ScanFunction::Fab => checks.push(Check::new(
            "12 points split 2/4/6",
            c.total == 12 && c.counts_by_circle == [2, 4, 6, 0],
            format!("{} {:?}", c.total, c.counts_by_circle),
        )),
        _ => checks.push(Check::new(
            "6 points split 2/2/2",
            c.total == 6 && c.counts_by_circle == [2, 2, 2, 0],
            format!("{} {:?}", c.total, c.counts_by_circle),
        )),
    }
    if let Some(t) = &tubes {
        let counts: Vec<usize> = t.iter().map(|r| r.count_m).collect();
        let agree = counts == c.counts_by_circle[..3];
        checks.push(Check::new("tube reduction agrees", agree, format!("{counts:?}")));
    }
    let report = json!({"census": census_json(&c), "tube_reductions": tubes});
    Ok((Outcome { report, checks }, c))
}

fn random_unit(rng: &mut rand_chacha::ChaCha8Rng) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(DIM_E, |_, _| StandardNormal.sample(rng));
    &v / v.norm()
}

/// `split seed-operator`.
pub fn split_seed_operator(ctx: &mut Context, seed: u64) -> Result<Outcome> {
    let alg = ctx.algebra()?;
    let eb = &alg.basis;
    let b1 = alg.splitting_matrix(|_| 1.0);
    let b1_err = (&b1 + DMatrix::identity(DIM_E, DIM_E)).abs().max();
    let (a0, q_o) = alg.seed_operator();
    let (l0, v0, gap0) = lowest(&a0);
    let f0 = EigenBasis::seed_coords();
    let cos0 = abs_cos(&v0, &f0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut rayleigh: f64 = 0.0;
    for _ in 0..50 {
        let f = random_unit(&mut rng);
        let fo: f64 = eb.eval(&BASE_POINT).iter().zip(f.iter()).map(|(a, b)| a * b).sum();
        rayleigh = rayleigh.max((f.dot(&(&a0 * &f)) + fo * fo).abs());
    }
    let k = alg.reproducing_kernel();
    let mut repro: f64 = 0.0;
    for _ in 0..20 {
        let f = random_unit(&mut rng);
        let fo: f64 = eb.function(f.as_slice()).eval(&BASE_POINT);
        repro = repro.max((f.dot(&k) - fo).abs());
    }
    let k_at_o: f64 = eb.function(k.as_slice()).eval(&BASE_POINT);
    let (ac, _) = alg.fiber_average_operator();
    let (lc, vc, gapc) = lowest(&ac);
    let cos_c = abs_cos(&vc, &f0);
    let checks = vec![
        Check::new("B(1) = -I", b1_err < 1e-12, format!("{b1_err:e}")),
        Check::new("Rayleigh identity", rayleigh < 1e-9, format!("{rayleigh:e}")),
        Check::new("A0 gap positive", gap0 > 0.0, format!("{gap0}")),
        Check::new("A0 lowest line is F0", cos0 > 1.0 - 1e-9, format!("|cos| = {cos0:.12}")),
        Check::new("reproducing property", repro < 1e-10, format!("{repro:e}")),
        Check::new("K0(o) = |K0|^2 > 0", (k_at_o - k.norm_squared()).abs() < 1e-9 && k_at_o > 0.0, format!("{k_at_o}")),
        Check::new("K0 parallel to F0", abs_cos(&k, &f0) > 1.0 - 1e-9, format!("|cos| = {:.12}", abs_cos(&k, &f0))),
        Check::new("fiber-average lowest line is F0", cos_c > 1.0 - 1e-9, format!("|cos| = {cos_c:.12}")),
    ];
    let (s0, _) = sorted_eigen(&a0);
    let (sc, _) = sorted_eigen(&ac);
    let report = json!({
        "product_space": alg.product,
        "seed_operator": {"matrix": matrix_json(&a0), "spectrum": s0, "lowest": l0, "gap": gap0, "cos_lowest_f0": cos0, "q_o": q_o},
        "reproducing_kernel": {"coords": k.as_slice(), "value_at_o": k_at_o, "cos_f0": abs_cos(&k, &f0)},
        "fiber_average_operator": {"spectrum": sc, "lowest": lc, "gap": gapc, "cos_lowest_f0": cos_c},
        "rayleigh_max_error": rayleigh,
        "reproducing_max_error": repro,
        "b_of_one_error": b1_err,
    });
    Ok(Outcome { report, checks })
}

/// Finite-difference test of the eigenline differential: errors at `t` and
/// `t/2` and their ratio (4 for a second-order remainder).
pub fn differential_fd(a: &DMatrix<f64>, h: &DMatrix<f64>, t: f64) -> Result<(f64, f64, f64)> {
    let (_, v, _) = lowest(a);
    let d = eigenline_differential(a, h)?;
    let err = |s: f64| -> f64 {
        let (_, w, _) = lowest(&(a + h * s));
        let w = if w.dot(&v) < 0.0 { -w } else { w };
        (&w - &v - &d * s).norm()
    };
    let (e1, e2) = (err(t), err(t / 2.0));
    Ok((e1, e2, e1 / e2))
}

/// `split submersion-rank`.
pub fn split_submersion_rank(ctx: &mut Context, seed: u64) -> Result<Outcome> {
    let alg = ctx.algebra()?;
    let (a0, _) = alg.seed_operator();
    let (ac, _) = alg.fiber_average_operator();
    let (r0, sv0) = alg.submersion_rank(&a0)?;
    let (rc, svc) = alg.submersion_rank(&ac)?;
    let (_, v0, _) = lowest(&a0);
    let mult = alg.multiplication_singular_values(&v0);
    let adjoint_err = sv0.iter().zip(&mult).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // restricted to span{B(1)}
    let b1 = alg.splitting_matrix(|_| 1.0);
    let p = {
        let hv = &b1 * &v0;
        &hv - &v0 * v0.dot(&hv)
    };
    let rank_b1 = usize::from(p.norm() > 1e-8 * b1.norm());
    let inj = alg.injectivity_singular_values();
    let inj_rank = inj.iter().filter(|&&s| s > 1e-8 * inj[0]).count();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let h = {
        let m: DMatrix<f64> = DMatrix::from_fn(DIM_E, DIM_E, |_, _| StandardNormal.sample(&mut rng));
        (&m + m.transpose()) * 0.5
    };
    let (e1, e2, ratio) = differential_fd(&a0, &h, 1e-3)?;
    let checks = vec![
        Check::new("rank 12 at A0", r0 == DIM_E - 1, r0.to_string()),
        Check::new("rank 12 at the fiber-average seed", rc == DIM_E - 1, rc.to_string()),
        Check::new("rank 0 on span B(1)", rank_b1 == 0, rank_b1.to_string()),
        Check::new("adjoint singular values", adjoint_err < 1e-8, format!("{adjoint_err:e}")),
        Check::new("B injective on P", inj_rank == alg.product.dim, format!("{inj_rank}/{}", alg.product.dim)),
        Check::new("differential second order", (3.5..=4.5).contains(&ratio), format!("{ratio:.4}")),
    ];
    let report = json!({
        "rank_at_a0": r0,
        "singular_values_a0": sv0,
        "rank_at_fiber_average": rc,
        "singular_values_fiber_average": svc,
        "multiplication_singular_values": mult,
        "adjoint_max_difference": adjoint_err,
        "b_injectivity_singular_values": inj,
        "kernel_multiplication_margin": alg.kernel_multiplication_margin(),
        "differential_fd": {"t": 1e-3, "error_t": e1, "error_half_t": e2, "ratio": ratio},
    });
    Ok(Outcome { report, checks })
}

/// Target lines for `split realize`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum RealizeTarget {
    /// The minimal-Morse line `Ψ` with all three parameters equal to `--eps`.
    Psi,
    /// The seed line `F₀`.
    F0,
    /// Realize the point-evaluation seed operator itself.
    A0,
}

/// Seed operators for line realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SeedChoice {
    /// Average of point evaluation over the fiber through the base point.
    Fiber,
    /// Point evaluation at the base point.
    Point,
}

fn seed_matrix(alg: &SplittingAlgebra, s: SeedChoice) -> DMatrix<f64> {
    match s {
        SeedChoice::Fiber => alg.fiber_average_operator().0,
        SeedChoice::Point => alg.seed_operator().0,
    }
}

/// `split realize`.
pub fn split_realize(ctx: &mut Context, target: RealizeTarget, eps: f64, seed: SeedChoice, radius: f64) -> Result<Outcome> {
    let inv = ctx.basis(24)?;
    let alg = ctx.algebra()?;
    let (op, line) = match target {
        RealizeTarget::A0 => (alg.seed_operator().0, None),
        RealizeTarget::F0 | RealizeTarget::Psi => {
            let t = if target == RealizeTarget::F0 {
                EigenBasis::seed_coords()
            } else {
                EigenBasis::psi_coords(eps, eps, eps)
            };
            let lr = alg.line_realization(&t, &seed_matrix(alg, seed), radius)?;
            (lr.operator.clone(), Some(lr))
        }
    };
    let cf = alg.realize_conformal_factor(&op, &inv)?;
    let mut checks = vec![
        Check::new("operator in B", cf.residual < 1e-9, format!("{:e}", cf.residual)),
        Check::new("round trip", cf.round_trip_error < 1e-8, format!("{:e}", cf.round_trip_error)),
    ];
    let line_json = line.as_ref().map(|lr| {
        json!({"gap": lr.gap, "lowest_eigenvalue": lr.lowest_eigenvalue, "alignment_error": lr.alignment_error,
               "chart_angle": lr.chart_angle, "steps": lr.steps, "delta_coords": lr.delta_coords})
    });
    if let Some(lr) = &line {
        checks.push(Check::new("aligned to target", lr.alignment_error < 1e-8, format!("{:e}", lr.alignment_error)));
        checks.push(Check::new("simple lowest eigenvalue", lr.gap > 0.0, format!("{}", lr.gap)));
    }
    let (spec, _) = sorted_eigen(&op);
    let report = json!({
        "target": format!("{target:?}"),
        "eps": eps,
        "line_realization": line_json,
        "operator_spectrum": spec,
        "factor": {"rho": cf.coeffs, "q": cf.q_coeffs, "residual": cf.residual, "round_trip_error": cf.round_trip_error},
    });
    Ok(Outcome { report, checks })
}

/// Where the conformal factor comes from.
#[derive(Clone, Debug)]
pub enum RhoSource {
    /// Realized from the `Ψ` line with parameter `eps`.
    Realized(f64),
    /// Coefficients over the invariant basis read from a JSON array.
    File(std::path::PathBuf),
}

/// Assembly data, target coordinates and `B^(ρ)` for a factor source.
pub struct FactorSetup {
    /// Quadrature data.
    pub data: AssemblyData,
    /// Target line over the full basis (the lowest eigenline of `B^(ρ)`).
    pub target: Vec<f64>,
    /// `B^(ρ)`.
    pub operator: DMatrix<f64>,
    /// `ρ` coefficients.
    pub rho: Vec<f64>,
}

/// Build the factor for the Galerkin and heat commands.
pub fn factor_setup(ctx: &mut Context, inv: &InvariantBasis, src: &RhoSource) -> Result<FactorSetup> {
    let base = ctx.basis(24)?;
    let alg = ctx.algebra()?;
    match src {
        RhoSource::Realized(p) => {
            let seed = alg.fiber_average_operator().0;
            let tf = TargetFactor::new(alg, &base, &EigenBasis::psi_coords(*p, *p, *p), &seed, 0.2)?;
            let mut rho = tf.rho.clone();
            rho.resize(inv.dim(), 0.0);
            let data = if inv.n_max == base.n_max { tf.data } else { AssemblyData::new(inv, &rho, RHO_MARGIN)? };
            Ok(FactorSetup { data, target: inv.embed_eigen(tf.target.as_slice()), operator: tf.operator, rho })
        }
        RhoSource::File(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut rho: Vec<f64> = serde_json::from_str(&text).context("expected a JSON array of numbers")?;
            if rho.len() > inv.dim() {
                bail!("factor has {} coefficients, the basis only {}", rho.len(), inv.dim());
            }
            rho.resize(inv.dim().max(base.dim()), 0.0);
            // components above degree 24 are orthogonal to every product of eigenfunctions
            let op = alg.operator_of_factor(&base, &rho[..base.dim()]);
            rho.truncate(inv.dim());
            let (_, v, _) = lowest(&op);
            let data = AssemblyData::new(inv, &rho, RHO_MARGIN)?;
            Ok(FactorSetup { data, target: inv.embed_eigen(v.as_slice()), operator: op, rho })
        }
    }
}

fn spectral_json(r: &SpectralReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

/// Results of a Galerkin sweep.
pub struct SweepResult {
    /// Reports per ε.
    pub reports: Vec<SpectralReport>,
    /// Slope errors per ε.
    pub slope_errors: Vec<f64>,
    /// Alignments per ε.
    pub alignments: Vec<f64>,
    /// φ_ε censuses per ε, when requested.
    pub censuses: Vec<Option<CensusSummary>>,
}

/// `galerkin`.
pub fn galerkin(
    ctx: &mut Context,
    n_max: usize,
    src: &RhoSource,
    eps_list: &[f64],
    census: Option<&CensusOptions>,
    stability_degree: Option<usize>,
) -> Result<(Outcome, SweepResult)> {
    let inv = ctx.basis(n_max)?;
    let setup = factor_setup(ctx, &inv, src)?;
    let (bev, _) = sorted_eigen(&setup.operator);
    let r0 = solve_branch(&setup.data.forms(0.0))?;
    let degrees = inv.degrees();
    let mut sorted_deg = degrees.clone();
    sorted_deg.sort();
    let block_err = r0
        .eigenvalues
        .iter()
        .zip(&sorted_deg)
        .map(|(l, &n)| {
            let e = (n * (n + 2)) as f64;
            (l - e).abs() / e.max(1.0)
        })
        .fold(0.0, f64::max);
    let mut checks = vec![Check::new("blocks at eps = 0", block_err < 1e-8, format!("{block_err:e}"))];
    let g = ctx.group().clone();
    let mut sweep = SweepResult { reports: vec![], slope_errors: vec![], alignments: vec![], censuses: vec![] };
    for &eps in eps_list {
        let r = solve_branch(&setup.data.forms(eps))?;
        sweep.slope_errors.push(slope_error(&r.slopes, bev.as_slice()));
        sweep.alignments.push(alignment(&r.first_vector, &setup.target));
        let c = match census {
            Some(opts) => {
                let f = inv.function(&r.first_vector);
                Some(CensusSummary::from(&m_critical_census("phi_eps", &f, &g, opts)?))
            }
            None => None,
        };
        sweep.censuses.push(c);
        sweep.reports.push(r);
    }
    for (k, r) in sweep.reports.iter().enumerate() {
        checks.push(Check::new(&format!("simple lambda1 at eps = {}", r.eps), r.gap > 0.0, format!("{:e}", r.gap)));
        checks.push(Check::new(&format!("residual at eps = {}", r.eps), r.residual < 1e-9, format!("{:e}", r.residual)));
        if k > 0 {
            let ratio = sweep.slope_errors[k - 1] / sweep.slope_errors[k];
            checks.push(Check::new(&format!("slope error ratio at eps = {}", r.eps), ratio >= 2.5, format!("{ratio:.3}")));
        }
        if let Some(c) = &sweep.censuses[k] {
            checks.push(Check::new(&format!("census 6 at eps = {}", r.eps), c.total == 6, c.total.to_string()));
        }
    }
    if let Some(last) = sweep.alignments.last() {
        checks.push(Check::new("alignment at smallest eps", *last > 0.99, format!("{last:.10}")));
    }
    let mut stability = Value::Null;
    if let (Some(n2), Some(&eps)) = (stability_degree, eps_list.last()) {
        let big = ctx.basis(n2)?;
        let mut rho = setup.rho.clone();
        rho.resize(big.dim(), 0.0);
        let r2 = solve_branch(&AssemblyData::new(&big, &rho, RHO_MARGIN)?.forms(eps))?;
        let r1 = sweep.reports.last().unwrap();
        let change = r1.cluster.iter().zip(&r2.cluster).map(|(a, b)| ((a - b) / a).abs()).fold(0.0, f64::max);
        checks.push(Check::new("truncation stability", change < 1e-6, format!("{change:e}")));
        stability = json!({"degree": n2, "eps": eps, "max_relative_change": change, "cluster": r2.cluster});
    }
    let report = json!({
        "basis": inv.summary(),
        "rho": setup.rho,
        "operator_spectrum": bev,
        "eps0_eigenvalues": r0.eigenvalues,
        "block_error": block_err,
        "sweeps": sweep.reports.iter().zip(&sweep.slope_errors).zip(&sweep.alignments).zip(&sweep.censuses)
            .map(|(((r, s), a), c)| json!({"spectral": spectral_json(r), "slope_error": s, "alignment": a, "census": c}))
            .collect::<Vec<_>>(),
        "truncation_stability": stability,
    });
    Ok((Outcome { report, checks }, sweep))
}

/// `heat`.
#[allow(clippy::too_many_arguments)]
pub fn heat(
    ctx: &mut Context,
    n_max: usize,
    src: &RhoSource,
    eps: f64,
    t_list: Option<&[f64]>,
    init: HeatInit,
    seed: u64,
    runs: usize,
    census: Option<&CensusOptions>,
) -> Result<Outcome> {
    let inv = ctx.basis(n_max)?;
    let setup = factor_setup(ctx, &inv, src)?;
    let forms = setup.data.forms(eps);
    let spec = solve_branch(&forms)?;
    let times: Vec<f64> = match t_list {
        Some(t) => t.to_vec(),
        None => (0..=16).map(|k| k as f64 / spec.gap).collect(),
    };
    let samples = SamplePoints::new(&inv, 256);
    let g = ctx.group().clone();
    let mut runs_json = Vec::new();
    let mut checks = Vec::new();
    for r in 0..runs {
        let f = heat_initial_data(init, &spec, &forms, seed + r as u64);
        let h = heat_demo(&inv, &forms, &spec, &f, &times, &samples, census.map(|o| (&g, o)))?;
        let idmax = h.samples.iter().map(|s| s.energy_identity_error).fold(0.0, f64::max);
        checks.push(Check::new(&format!("run {r}: energy identity"), idmax < 1e-10, format!("{idmax:e}")));
        match init {
            HeatInit::Random => {
                checks.push(Check::new(&format!("run {r}: decay rate"), h.rate_error < 0.1, format!("{:.3e}", h.rate_error)));
                if let Some(c) = &h.final_census {
                    checks.push(Check::new(&format!("run {r}: final census 6"), c.total == 6, c.total.to_string()));
                }
            }
            HeatInit::Phi1 => {
                let d = h.samples.iter().map(|s| s.c1).fold(0.0, f64::max);
                checks.push(Check::new(&format!("run {r}: stays on the line"), d < 1e-10, format!("{d:e}")));
            }
            HeatInit::Perp => {
                checks.push(Check::new(&format!("run {r}: flagged exceptional"), h.exceptional, h.first_mode.to_string()))
            }
        }
        runs_json.push(serde_json::to_value(&h)?);
    }
    let report = json!({
        "eps": eps,
        "init": format!("{init:?}"),
        "lambda1": spec.lambda1,
        "lambda2": spec.eigenvalues[2],
        "times": times,
        "runs": runs_json,
    });
    Ok(Outcome { report, checks })
}
