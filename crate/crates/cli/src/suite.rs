//! The full verification suite behind `poincare all`: eight numbered
//! criteria, each a group of checks with a wall-clock budget.

use std::time::{Duration, Instant};

use anyhow::Result;
use serde_json::{json, Value};

use poincare_core::critscan::CensusOptions;
use poincare_core::galerkin::HeatInit;

use crate::commands::{
    crit_scan, galerkin, group_info, heat, split_realize, split_seed_operator, split_submersion_rank, verify_appendix,
    Check, Context, RealizeTarget, RhoSource, ScanFunction, SeedChoice,
};

/// Outcome of one criterion.
pub struct Criterion {
    /// Number, 1 to 8.
    pub id: usize,
    /// Short title.
    pub title: &'static str,
    /// Checks, including the time budget.
    pub checks: Vec<Check>,
    /// Wall-clock time.
    pub elapsed: Duration,
}

impl Criterion {
    /// True if every check passed.
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// One line for the terminal.
    pub fn line(&self) -> String {
        let failed: Vec<String> =
            self.checks.iter().filter(|c| !c.pass).map(|c| format!("{} ({})", c.name, c.detail)).collect();
        format!(
            "criterion {} [{}]: {} in {:.1} s{}",
            self.id,
            self.title,
            if self.pass() { "PASS" } else { "FAIL" },
            self.elapsed.as_secs_f64(),
            if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }
        )
    }

    /// JSON form. Timings are left out so that reports are reproducible.
    pub fn json(&self) -> Value {
        json!({
            "id": self.id,
            "title": self.title,
            "pass": self.pass(),
            "checks": self.checks.iter().map(|c| json!({"name": c.name, "pass": c.pass, "detail": c.detail})).collect::<Vec<_>>(),
        })
    }
}

fn timed<F: FnOnce() -> Result<Vec<Check>>>(id: usize, title: &'static str, budget: Duration, f: F) -> Criterion {
    let t = Instant::now();
    let mut checks = match f() {
        Ok(c) => c,
        Err(e) => vec![Check::new("completed", false, e.to_string())],
    };
    let elapsed = t.elapsed();
    checks.push(Check::new(
        "within time budget",
        elapsed <= budget,
        format!("{:.1} s of {} s", elapsed.as_secs_f64(), budget.as_secs()),
    ));
    Criterion { id, title, checks, elapsed }
}

fn prefixed(prefix: &str, checks: Vec<Check>) -> Vec<Check> {
    checks.into_iter().map(|c| Check { name: format!("{prefix}: {}", c.name), ..c }).collect()
}

/// Run all eight criteria. `starts` sets the multistart count of every census.
pub fn run_all(starts: usize, mut progress: impl FnMut(&Criterion)) -> Vec<Criterion> {
    let mut ctx = Context::default();
    let opts = CensusOptions { starts, ..Default::default() };
    let mut out = Vec::new();
    let mut push = |c: Criterion, out: &mut Vec<Criterion>| {
        progress(&c);
        out.push(c);
    };

    push(timed(1, "exact identities", Duration::from_secs(5), || Ok(verify_appendix().checks)), &mut out);
    push(timed(2, "group", Duration::from_secs(5), || Ok(group_info(&mut ctx).checks)), &mut out);
    push(
        timed(3, "sextic census", Duration::from_secs(60), || {
            Ok(crit_scan(&mut ctx, ScanFunction::Sextic, &[], &opts)?.0.checks)
        }),
        &mut out,
    );
    push(
        timed(4, "Morse counts on M", Duration::from_secs(600), || {
            let mut checks = prefixed("F0", crit_scan(&mut ctx, ScanFunction::F0, &[], &opts)?.0.checks);
            for s in [1e-2, 3e-3] {
                checks.extend(prefixed(&format!("Fab({s})"), crit_scan(&mut ctx, ScanFunction::Fab, &[s, s], &opts)?.0.checks));
                checks.extend(prefixed(&format!("Psi({s})"), crit_scan(&mut ctx, ScanFunction::Psi, &[s, s, s], &opts)?.0.checks));
            }
            Ok(checks)
        }),
        &mut out,
    );
    push(
        timed(5, "splitting algebra", Duration::from_secs(120), || {
            let mut checks: Vec<Check> = split_seed_operator(&mut ctx, 0)?
                .checks
                .into_iter()
                .filter(|c| ["B(1) = -I", "Rayleigh identity", "A0 gap positive", "A0 lowest line is F0"].contains(&c.name.as_str()))
                .collect();
            checks.extend(
                split_submersion_rank(&mut ctx, 0)?
                    .checks
                    .into_iter()
                    .filter(|c| ["rank 12 at A0", "differential second order"].contains(&c.name.as_str())),
            );
            Ok(checks)
        }),
        &mut out,
    );
    push(
        timed(6, "realizability", Duration::from_secs(120), || {
            let mut checks = prefixed("A0", split_realize(&mut ctx, RealizeTarget::A0, 0.0, SeedChoice::Fiber, 0.2)?.checks);
            checks.extend(prefixed("Psi", split_realize(&mut ctx, RealizeTarget::Psi, 1e-2, SeedChoice::Fiber, 0.2)?.checks));
            Ok(checks)
        }),
        &mut out,
    );
    push(
        timed(7, "Galerkin branch selection", Duration::from_secs(900), || {
            let (o, _) = galerkin(&mut ctx, 24, &RhoSource::Realized(1e-2), &[1e-2, 3e-3, 1e-3], Some(&opts), None)?;
            Ok(o.checks)
        }),
        &mut out,
    );
    push(
        timed(8, "heat flow", Duration::from_secs(600), || {
            let src = RhoSource::Realized(1e-2);
            let mut checks = heat(&mut ctx, 24, &src, 1e-3, None, HeatInit::Random, 0, 10, Some(&opts))?.checks;
            checks.extend(prefixed("perp", heat(&mut ctx, 24, &src, 1e-3, None, HeatInit::Perp, 0, 1, None)?.checks));
            Ok(checks)
        }),
        &mut out,
    );
    out
}
