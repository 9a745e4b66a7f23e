//! `improv`: command-line front end for improv-core.
//!
//! Exit codes: 0 success, 1 I/O error or failed verification, 2 invalid
//! input or violated precondition, 3 enumeration budget or search cap hit.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use improv_core::curves::{decompose, fit_good_constants, PolyCurve};
use improv_core::diophantine::{
    check_a_with_cap, check_b_with_cap, dirichlet_scan_with_budget, lattice_memberships_with_budget, ApproxTarget,
    DEFAULT_SEARCH_CAP,
};
use improv_core::experiments::{
    dirichlet_scan_run_with_budget, equidistribution_run, parse_n_list, shadowing_check, with_workers, ExperimentConfig,
    Sampler, SHADOW_GRID,
};
use improv_core::groups::GroupElement;
use improv_core::lattices::DEFAULT_BUDGET;
use improv_core::linalg::QMatrix;
use improv_core::rational::{self, Rational};
use improv_core::reps::{basic_lemma_sweep, build_rep, RepSpec};
use improv_core::Error;

const BUDGET_ENV: &str = "IMPROV_BUDGET";

#[derive(Parser)]
#[command(name = "improv", version, about = "Exact checks for Dirichlet improvability along curves")]
struct Cli {
    /// Worker threads; reports do not depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Candidate budget per lattice enumeration [default: $IMPROV_BUDGET or 1000000].
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// The Dirichlet systems and their lattice criterion.
    #[command(subcommand)]
    Dirichlet(DirichletCmd),
    /// Experiments along expanding translates of a curve.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Weight-space checks of the Basic Lemma.
    #[command(subcommand)]
    Basiclemma(BasicLemmaCmd),
    /// Curve diagnostics.
    #[command(subcommand)]
    Curve(CurveCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Both,
    Brute,
    Lattice,
}

#[derive(Subcommand)]
enum DirichletCmd {
    /// Decide both systems at one N; prints JSON.
    Check {
        /// Comma-separated rationals, e.g. "2/7,3/5".
        #[arg(long)]
        xi: String,
        #[arg(long = "N")]
        n: u64,
        /// In (0, 1]; the lattice criterion needs mu < 1.
        #[arg(long)]
        mu: String,
        #[arg(long, value_enum, default_value_t = Mode::Both)]
        mode: Mode,
        /// Largest brute-force search space.
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        search_cap: u64,
    },
    /// List the N at which both systems are insoluble; prints JSON.
    Scan {
        /// A single target; alternative to --curve.
        #[arg(long, conflicts_with = "curve", required_unless_present = "curve")]
        xi: Option<String>,
        /// Curve JSON file; scans phi at --grid cell midpoints.
        #[arg(long)]
        curve: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// N list: "2,3,5", "2..200" or "16,32,...,2048".
        #[arg(long = "N")]
        n: String,
        #[arg(long)]
        mu: String,
    },
}

#[derive(Args)]
struct CurveArg {
    /// Curve JSON: {"k", "interval": ["a","b"], "coeffs": [[...], ...]}.
    #[arg(long)]
    curve: PathBuf,
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// Per-N K_mu fractions and box counts; prints CSV.
    Stats {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, default_value = "1/2")]
        mu: String,
        /// N list: "2,3,5", "2..200" or "16,32,...,2048".
        #[arg(long = "N")]
        n: String,
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Sup-norm radius of the counting box.
        #[arg(long = "box", default_value = "3/2")]
        box_radius: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// grid, low-discrepancy or seeded-uniform.
        #[arg(long, default_value = "low-discrepancy")]
        sampler: String,
    },
    /// Distance between the translated curve and its unipotent shadow; prints JSON.
    Shadow {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long)]
        s0: String,
        #[arg(long = "N")]
        n: u64,
        /// In (1/2, 1); the window is N^(-n * exponent).
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = SHADOW_GRID)]
        grid: usize,
    },
}

#[derive(Subcommand)]
enum BasicLemmaCmd {
    /// Random affine bases; prints JSON. Exits 1 if any check fails.
    Verify {
        #[arg(long)]
        n: usize,
        /// e.g. adjoint, wedge2, sym2, std-dual, tensor(std,dual(std)).
        #[arg(long)]
        rep: String,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CurveCmd {
    /// Nondegeneracy and fitted (C, alpha) constants per coordinate; prints CSV.
    Check {
        #[command(flatten)]
        curve: CurveArg,
        /// Relative levels r / sup.
        #[arg(long, default_value = "1/2,1/4,1/8,1/16,1/32,1/64,1/128,1/256")]
        levels: String,
    },
    /// psi = psi_minus psi_zero u(phi); prints JSON.
    Decompose {
        /// Rows separated by ';', entries by ',', e.g. "2,1;3,2".
        #[arg(long)]
        matrix: String,
    },
}

enum Failure {
    Core(Error),
    Io(String),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn config_err(msg: String) -> Failure {
    Failure::Core(Error::Config(msg))
}

fn q(s: &str) -> CliResult<Rational> {
    Ok(rational::parse(s)?)
}

fn qs(v: &[Rational]) -> Vec<String> {
    v.iter().map(rational::format).collect()
}

fn matrix_json(m: &QMatrix) -> Value {
    json!(m.to_rows().iter().map(|r| qs(r)).collect::<Vec<_>>())
}

fn read_curve(path: &PathBuf) -> CliResult<PolyCurve> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn budget(cli: &Cli) -> CliResult<u64> {
    if let Some(b) = cli.budget {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| config_err(format!("{BUDGET_ENV}={v:?} is not a positive integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

fn word(soluble: bool) -> &'static str {
    if soluble {
        "soluble"
    } else {
        "insoluble"
    }
}

fn dirichlet(cli: &Cli, cmd: &DirichletCmd) -> CliResult<String> {
    let budget = budget(cli)?;
    match cmd {
        DirichletCmd::Check { xi, n, mu, mode, search_cap } => {
            let target = ApproxTarget::parse(xi)?;
            let mu_q = q(mu)?;
            let brute = matches!(mode, Mode::Both | Mode::Brute);
            let (a, b) = if brute {
                (Some(check_a_with_cap(&target, *n, &mu_q, *search_cap)?), Some(check_b_with_cap(&target, *n, &mu_q, *search_cap)?))
            } else {
                (None, None)
            };
            let lattice_wanted = matches!(mode, Mode::Lattice) || (matches!(mode, Mode::Both) && mu_q < Rational::from_integer(1.into()));
            let lattice = if lattice_wanted { Some(lattice_memberships_with_budget(&target, *n, &mu_q, budget)?) } else { None };
            let consistent = match (&a, &b, lattice) {
                (Some(a), Some(b), Some((f, s))) => json!(!a.soluble == f && !b.soluble == s),
                _ => Value::Null,
            };
            let mode_name = match mode {
                Mode::Both => "both",
                Mode::Brute => "brute",
                Mode::Lattice => "lattice",
            };
            Ok(pretty(&json!({
                "xi": qs(target.xi()),
                "N": n,
                "mu": rational::format(&mu_q),
                "mode": mode_name,
                "verdict_A": a.as_ref().map(|v| word(v.soluble)),
                "verdict_B": b.as_ref().map(|v| word(v.soluble)),
                "lattice": lattice.map(|(f, s)| json!({
                    "first_in_K": f,
                    "second_in_K": s,
                    "both_insoluble": f && s,
                })),
                "witnesses": {
                    "A": a.as_ref().and_then(|v| v.witness.as_ref()).map(to_value),
                    "B": b.as_ref().and_then(|v| v.witness.as_ref()).map(to_value),
                },
                "consistent": consistent,
            })))
        }
        DirichletCmd::Scan { xi, curve, grid, n, mu } => {
            let ns = parse_n_list(n)?;
            let mu_q = q(mu)?;
            if let Some(xi) = xi {
                let target = ApproxTarget::parse(xi)?;
                let hits = with_workers(cli.workers, || dirichlet_scan_with_budget(&target, &ns, &mu_q, budget))??;
                return Ok(pretty(&json!({
                    "xi": qs(target.xi()),
                    "mu": rational::format(&mu_q),
                    "N_set": ns,
                    "insoluble": hits,
                })));
            }
            let curve = read_curve(curve.as_ref().expect("clap requires --xi or --curve"))?;
            if *grid == 0 {
                return Err(config_err("--grid must be positive".into()));
            }
            let (a, b) = curve.interval();
            let points: Vec<Rational> = (0..*grid)
                .map(|i| a + (b - a) * Rational::new((2 * i as i64 + 1).into(), (2 * *grid as i64).into()))
                .collect();
            let report = with_workers(cli.workers, || dirichlet_scan_run_with_budget(&curve, &mu_q, &ns, &points, budget))??;
            Ok(pretty(&json!({ "curve": to_value(&curve), "report": to_value(&report) })))
        }
    }
}

fn orbit(cli: &Cli, cmd: &OrbitCmd) -> CliResult<String> {
    match cmd {
        OrbitCmd::Stats { curve, mu, n, samples, box_radius, seed, sampler } => {
            let config = ExperimentConfig::new(
                read_curve(&curve.curve)?,
                parse_n_list(n)?,
                q(mu)?,
                *samples,
                *seed,
                q(box_radius)?,
                sampler.parse::<Sampler>()?,
            )?
            .with_budget(budget(cli)?);
            let report = with_workers(cli.workers, || equidistribution_run(&config))??;
            let aborted: usize = report.rows.iter().map(|r| r.samples_aborted).sum();
            if aborted == report.records.len() {
                emit(cli, &report.to_csv())?;
                return Err(Failure::Core(Error::BudgetExceeded { budget: config.budget }));
            }
            if aborted > 0 {
                eprintln!("warning: {aborted} of {} samples aborted on the enumeration budget", report.records.len());
            }
            Ok(report.to_csv())
        }
        OrbitCmd::Shadow { curve, s0, n, exponent, grid } => {
            let curve = read_curve(&curve.curve)?;
            let report = shadowing_check(&curve, &q(s0)?, *n, &q(exponent)?, *grid)?;
            Ok(pretty(&json!({ "curve": to_value(&curve), "grid": grid, "report": to_value(&report) })))
        }
    }
}

fn basiclemma(cli: &Cli, cmd: &BasicLemmaCmd) -> CliResult<String> {
    let BasicLemmaCmd::Verify { n, rep, trials, seed } = cmd;
    let spec: RepSpec = rep.parse()?;
    let rep = build_rep(&spec, *n)?;
    let summary = with_workers(cli.workers, || basic_lemma_sweep(&rep, *trials, *seed))??;
    let text = pretty(&to_value(&summary));
    if summary.failures.is_empty() {
        Ok(text)
    } else {
        emit(cli, &text)?;
        Err(Failure::Verification(format!("{} of {} trials failed", summary.failures.len(), trials)))
    }
}

fn curve_cmd(cmd: &CurveCmd) -> CliResult<String> {
    match cmd {
        CurveCmd::Check { curve, levels } => {
            let curve = read_curve(&curve.curve)?;
            let levels = rational::parse_list(levels)?;
            let (a, b) = curve.interval();
            let mut out = format!("# curve: {}\n", serde_json::to_string(&curve).expect("json"));
            out.push_str(&format!("# nondegenerate: {}\n", curve.is_nondegenerate()));
            out.push_str("component,degree,alpha,C\n");
            for i in 0..curve.k() {
                let f = curve.component(i);
                let d = f.degree().unwrap_or(0);
                if d == 0 {
                    out.push_str(&format!("# component {} is constant: no growth constants\n", i + 1));
                    continue;
                }
                for j in 1..=d {
                    let alpha = Rational::new(1.into(), (j as i64).into());
                    let c = fit_good_constants(&f, (a, b), &alpha, &levels)?;
                    out.push_str(&format!("{},{d},{},{}\n", i + 1, rational::format(&alpha), rational::format_f64(c)));
                }
            }
            Ok(out)
        }
        CurveCmd::Decompose { matrix } => {
            let rows = matrix
                .split(';')
                .map(|r| rational::parse_list(r).map_err(Failure::from))
                .collect::<CliResult<Vec<Vec<Rational>>>>()?;
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(config_err(format!("matrix must be square, got {n} rows of lengths {:?}", rows.iter().map(Vec::len).collect::<Vec<_>>())));
            }
            let psi = GroupElement::new(QMatrix::from_rows(rows))?;
            let d = decompose(&psi)?;
            let reconstructs = d.reconstruct() == psi;
            Ok(pretty(&json!({
                "psi": matrix_json(psi.matrix()),
                "psi_minus": matrix_json(d.psi_minus.matrix()),
                "psi_zero": matrix_json(d.psi_zero.matrix()),
                "phi": qs(&d.phi),
                "reconstructs": reconstructs,
            })))
        }
    }
}

fn emit(cli: &Cli, text: &str) -> CliResult<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    if cli.workers == 0 {
        return Err(config_err("--workers must be at least 1".into()));
    }
    let text = match &cli.cmd {
        Cmd::Dirichlet(c) => dirichlet(cli, c)?,
        Cmd::Orbit(c) => orbit(cli, c)?,
        Cmd::Basiclemma(c) => basiclemma(cli, c)?,
        Cmd::Curve(c) => curve_cmd(c)?,
    };
    emit(cli, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_budget() => 3,
                Error::Internal(_) => 1,
                _ => 2,
            })
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
    }
}
