use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use poincare_cli::commands::{self, Context, Outcome, RealizeTarget, RhoSource, ScanFunction, SeedChoice};
use poincare_cli::suite;
use poincare_core::critscan::CensusOptions;
use poincare_core::galerkin::HeatInit;

/// Spectral and Morse-theoretic experiments on the Poincaré dodecahedral space.
#[derive(Parser, Debug)]
#[command(name = "poincare", version)]
struct Cli {
    /// Write the JSON report here. Without it, and with POINCARE_OUT_DIR set,
    /// the report goes to `$POINCARE_OUT_DIR/<command>.json`.
    #[arg(long, global = true, alias = "json")]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact identities.
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// The binary icosahedral group.
    Group {
        #[command(subcommand)]
        what: GroupCmd,
    },
    /// Critical-point censuses.
    Crit {
        #[command(subcommand)]
        what: CritCmd,
    },
    /// The first-order splitting algebra.
    Split {
        #[command(subcommand)]
        what: SplitCmd,
    },
    /// Galerkin sweep over ε for the conformal family.
    Galerkin {
        /// Degree cutoff N.
        #[arg(long, default_value_t = 24)]
        degree_max: usize,
        /// Source of the conformal factor.
        #[arg(long, value_enum, default_value_t = RhoKind::Realized)]
        rho: RhoKind,
        /// JSON array of coefficients over the invariant basis (with `--rho file`).
        #[arg(long)]
        rho_file: Option<PathBuf>,
        /// Parameter of the target line Ψ for a realized factor.
        #[arg(long, default_value_t = 1e-2)]
        target_eps: f64,
        /// ε values, largest first.
        #[arg(long, value_delimiter = ',', default_value = "1e-2,3e-3,1e-3")]
        eps_list: Vec<f64>,
        /// Take the critical census of each first eigenfunction.
        #[arg(long)]
        census: bool,
        /// Multistart count for censuses.
        #[arg(long, default_value_t = 4096)]
        starts: usize,
        /// Repeat the smallest ε at this larger cutoff and compare the cluster.
        #[arg(long)]
        stability_degree: Option<usize>,
    },
    /// Heat flow in the Galerkin basis.
    Heat {
        /// ε.
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// Times; default 0, 1, …, 16 in units of 1/(λ₂ − λ₁).
        #[arg(long, value_delimiter = ',')]
        t_list: Option<Vec<f64>>,
        /// Initial data.
        #[arg(long, value_enum, default_value_t = InitKind::Random)]
        init: InitKind,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of runs with consecutive seeds.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Degree cutoff N.
        #[arg(long, default_value_t = 24)]
        degree_max: usize,
        /// Parameter of the target line Ψ.
        #[arg(long, default_value_t = 1e-2)]
        target_eps: f64,
        /// Skip the final-time census.
        #[arg(long)]
        no_census: bool,
        /// Multistart count for censuses.
        #[arg(long, default_value_t = 4096)]
        starts: usize,
    },
    /// Every acceptance check; exits nonzero on any failure.
    All {
        /// Multistart count for censuses.
        #[arg(long, default_value_t = 4096)]
        starts: usize,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    /// The four closed-form coefficient values.
    Appendix,
}

#[derive(Subcommand, Debug)]
enum GroupCmd {
    /// Order, element orders, exceptional orbits and stabilizers.
    Info,
}

#[derive(Subcommand, Debug)]
enum CritCmd {
    /// Multistart census of critical points.
    Scan {
        /// Function to scan.
        #[arg(long, value_enum)]
        function: ScanFunction,
        /// Comma-separated parameters (two for fab, three for psi).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Vec<f64>,
        /// Number of multistart points.
        #[arg(long, default_value_t = 1 << 14)]
        starts: usize,
        /// Offset into the start sequence.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the critical points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum SplitCmd {
    /// The seed operators, the reproducing kernel and the Rayleigh identity.
    SeedOperator {
        /// Seed for the random test functions.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rank of the eigenline map and related checks.
    SubmersionRank {
        /// Seed for the random direction of the finite-difference test.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Realize a line or operator by a conformal factor.
    Realize {
        /// Target.
        #[arg(long, value_enum, default_value_t = RealizeTarget::Psi)]
        target: RealizeTarget,
        /// Parameter of Ψ.
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
        /// Seed operator for the line realization.
        #[arg(long, value_enum, default_value_t = SeedChoice::Fiber)]
        seed_operator: SeedChoice,
        /// Chart radius in radians.
        #[arg(long, default_value_t = 0.2)]
        radius: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RhoKind {
    Realized,
    File,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitKind {
    Random,
    Phi1,
    Perp,
}

fn rho_source(kind: RhoKind, file: Option<PathBuf>, eps: f64) -> Result<RhoSource> {
    Ok(match kind {
        RhoKind::Realized => RhoSource::Realized(eps),
        RhoKind::File => RhoSource::File(file.context("--rho file needs --rho-file")?),
    })
}

fn command_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Verify { .. } => "verify-appendix",
        Cmd::Group { .. } => "group-info",
        Cmd::Crit { .. } => "crit-scan",
        Cmd::Split { what: SplitCmd::SeedOperator { .. } } => "split-seed-operator",
        Cmd::Split { what: SplitCmd::SubmersionRank { .. } } => "split-submersion-rank",
        Cmd::Split { what: SplitCmd::Realize { .. } } => "split-realize",
        Cmd::Galerkin { .. } => "galerkin",
        Cmd::Heat { .. } => "heat",
        Cmd::All { .. } => "all",
    }
}

fn run(cmd: Cmd) -> Result<(Value, bool)> {
    let mut ctx = Context::default();
    let finish = |o: Outcome| {
        let ok = o.ok();
        for c in o.checks.iter().filter(|c| !c.pass) {
            eprintln!("check failed: {} ({})", c.name, c.detail);
        }
        (o.into_json(), ok)
    };
    Ok(match cmd {
        Cmd::Verify { what: VerifyCmd::Appendix } => finish(commands::verify_appendix()),
        Cmd::Group { what: GroupCmd::Info } => finish(commands::group_info(&mut ctx)),
        Cmd::Crit { what: CritCmd::Scan { function, params, starts, seed, csv } } => {
            let opts = CensusOptions { starts, seed, ..Default::default() };
            let (o, census) = commands::crit_scan(&mut ctx, function, &params, &opts)?;
            if let Some(p) = csv {
                std::fs::write(&p, commands::census_csv(&census)).with_context(|| format!("writing {}", p.display()))?;
            }
            finish(o)
        }
        Cmd::Split { what } => match what {
            SplitCmd::SeedOperator { seed } => finish(commands::split_seed_operator(&mut ctx, seed)?),
            SplitCmd::SubmersionRank { seed } => finish(commands::split_submersion_rank(&mut ctx, seed)?),
            SplitCmd::Realize { target, eps, seed_operator, radius } => {
                finish(commands::split_realize(&mut ctx, target, eps, seed_operator, radius)?)
            }
        },
        Cmd::Galerkin { degree_max, rho, rho_file, target_eps, eps_list, census, starts, stability_degree } => {
            let src = rho_source(rho, rho_file, target_eps)?;
            let opts = CensusOptions { starts, ..Default::default() };
            let census = census.then_some(&opts);
            finish(commands::galerkin(&mut ctx, degree_max, &src, &eps_list, census, stability_degree)?.0)
        }
        Cmd::Heat { eps, t_list, init, seed, runs, degree_max, target_eps, no_census, starts } => {
            let init = match init {
                InitKind::Random => HeatInit::Random,
                InitKind::Phi1 => HeatInit::Phi1,
                InitKind::Perp => HeatInit::Perp,
            };
            let opts = CensusOptions { starts, ..Default::default() };
            let census = (!no_census && init != HeatInit::Perp).then_some(&opts);
            let src = RhoSource::Realized(target_eps);
            finish(commands::heat(&mut ctx, degree_max, &src, eps, t_list.as_deref(), init, seed, runs, census)?)
        }
        Cmd::All { starts } => {
            let crit = suite::run_all(starts, |c| eprintln!("{}", c.line()));
            let ok = crit.iter().all(|c| c.pass());
            (json!({"criteria": crit.iter().map(|c| c.json()).collect::<Vec<_>>(), "all_pass": ok}), ok)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let name = command_name(&cli.cmd);
    let out = cli.out.or_else(|| std::env::var_os("POINCARE_OUT_DIR").map(|d| PathBuf::from(d).join(format!("{name}.json"))));
    match run(cli.cmd) {
        Ok((report, ok)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            // a closed pipe (e.g. `| head`) is not an error; the report file is still written
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: writing stdout: {e}");
                    return ExitCode::from(2);
                }
            }
            if let Some(p) = out {
                if let Err(e) = std::fs::write(&p, format!("{text}\n")) {
                    eprintln!("error: writing {}: {e}", p.display());
                    return ExitCode::from(2);
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
