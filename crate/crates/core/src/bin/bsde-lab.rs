//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 assumption violation, 3 numerical failure, 1 anything
//! else (bad input, I/O).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bsde_lab::apriori::{
    b1_envelope, b2_envelope, b3_envelope, check_b1_threshold, lipschitz_envelope, lipschitz_z_bound,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use bsde_lab::condexp::EstimatorSpec;
use bsde_lab::harness::{
    convergence_study, feynman_kac_grid, load_problem, reports_to_json, truncation_study, FkConfig,
    FkStrategy, StudyConfig, StudyOutcome, TruncationStudyConfig,
};
use bsde_lab::model::{truncate_problem, ProblemSpec, Regime, TruncationVariant};
use bsde_lab::oracle::{cole_hopf, fine_grid_reference, ReferenceSolution, COLE_HOPF_INNER_STEPS};
use bsde_lab::par::with_threads;
use bsde_lab::scheme::{replicate_y0, solve_backward};
use bsde_lab::simulate::euler_paths;
use bsde_lab::{Error, Result};

/// Stdout writes that surface a closed pipe as an error instead of a panic.
macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}
macro_rules! out_raw {
    ($($arg:tt)*) => {
        write!(std::io::stdout().lock(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(name = "bsde-lab", version, about = "Truncated explicit schemes for quadratic BSDEs")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Default directory for output files.
    #[arg(long, global = true, env = "BSDE_LAB_OUT")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// A priori thresholds, Z-bounds and envelopes.
    Check {
        /// Problem JSON file or `catalog:NAME`.
        problem: String,
        #[arg(long)]
        json: bool,
    },
    /// Run the backward scheme once.
    Solve(SolveArgs),
    /// Reference value for a problem.
    Oracle(OracleArgs),
    /// Convergence or truncation study from a JSON config.
    Study {
        config: PathBuf,
        /// Treat the config as a truncation study.
        #[arg(long)]
        truncation: bool,
    },
    /// Feynman-Kac evaluation on a grid.
    Pde(PdeArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem JSON file or `catalog:NAME`.
    problem: String,
    #[arg(short, long, default_value_t = 32)]
    n: usize,
    #[arg(short = 'P', long = "particles", default_value_t = 10_000)]
    particles: usize,
    /// Truncation radius; omit for the untruncated scheme.
    #[arg(short = 'M', long = "radius")]
    m: Option<f64>,
    /// `global:Q` or `partition:B`.
    #[arg(short, long, default_value = "global:3")]
    estimator: EstimatorSpec,
    #[arg(short, long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "deterministic-sigma")]
    variant: TruncationVariant,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Per-step statistics CSV, relative to the output directory.
    #[arg(long)]
    steps_csv: Option<PathBuf>,
    /// Extra independent runs (seeds seed+1, ...) for an unconditional
    /// standard error of Y0.
    #[arg(long, default_value_t = 0)]
    replicas: u64,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    run: RunArgs,
    /// `auto`, `closed-form`, `cole-hopf` or `fine-grid`.
    #[arg(long, default_value = "auto")]
    kind: String,
    /// Monte Carlo samples for Cole-Hopf.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
}

#[derive(Args)]
struct PdeArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated times.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', default_values_t = [0.0, 0.5])]
    t_grid: Vec<f64>,
    /// Points separated by `;`, coordinates by `,`.
    #[arg(long, allow_hyphen_values = true, default_value = "-1;0;1")]
    x_grid: String,
    #[arg(long, default_value = "per-point")]
    strategy: String,
}

fn resolve(out: &Option<PathBuf>, p: &Path) -> PathBuf {
    match out {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p.to_path_buf(),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn truncated(spec: &ProblemSpec, run: &RunArgs) -> Result<ProblemSpec> {
    match run.m {
        Some(m) => truncate_problem(spec, m, run.variant),
        None => Ok(spec.clone()),
    }
}

fn check(problem: &str, as_json: bool) -> Result<()> {
    let spec = load_problem(problem)?;
    let p = spec.params();
    let t = spec.t0();
    let mut out = json!({
        "problem": problem,
        "regime": spec.regime().name(),
        "envelope_C": p.envelope_c,
        "lipschitz_z_bound": lipschitz_z_bound(p),
        "lipschitz_envelope": lipschitz_envelope(p),
    });
    match spec.regime() {
        Regime::B1Critical => {
            out["threshold"] = serde_json::to_value(check_b1_threshold(p)?)?;
            out["envelope"] = serde_json::to_value(b1_envelope(p, t, DEFAULT_TOL, DEFAULT_MAX_ITER)?)?;
        }
        Regime::B2Subcritical => out["envelope"] = serde_json::to_value(b2_envelope(p)?)?,
        Regime::B3Bounded => out["envelope"] = serde_json::to_value(b3_envelope(p, spec.regime())?)?,
    }
    if as_json {
        out!("{}", serde_json::to_string_pretty(&out)?);
        return Ok(());
    }
    out!("problem            {problem}");
    out!("regime             {}", spec.regime().name());
    out!("envelope_C         {}", p.envelope_c);
    out!("lipschitz |Z| <=   {:.6e}", lipschitz_z_bound(p));
    if let Some(th) = out.get("threshold") {
        out!("threshold          {:.12}", th["threshold"].as_f64().unwrap_or(f64::NAN));
        out!("alpha + T beta     {:.12}", th["lhs"].as_f64().unwrap_or(f64::NAN));
        out!("margin             {:.12}", th["margin"].as_f64().unwrap_or(f64::NAN));
    }
    let e = &out["envelope"];
    out!("envelope           {}", e["kind"].as_str().unwrap_or("?"));
    out!("  |Z| <= a + b |x|^e   a = {}  b = {}  e = {}", e["a"], e["b"], e["exponent"]);
    out!("  fixed point      iterations = {}  converged = {}", e["iterations"], e["converged"]);
    if let Some(r) = e.get("rate_regime") {
        out!("  rate regime      {}", r.as_str().unwrap_or("?"));
    }
    Ok(())
}

fn solve(args: &SolveArgs, out: &Option<PathBuf>) -> Result<()> {
    let start = Instant::now();
    let spec = load_problem(&args.run.problem)?;
    let tspec = truncated(&spec, &args.run)?;
    let ens = euler_paths(&spec, args.run.n, args.run.particles, args.run.seed)?;
    let sol = solve_backward(&tspec, ens, &args.run.estimator)?;
    if let Some(p) = &args.steps_csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "t", "y_mean", "y_std", "z0_mean"]).map_err(csv_err)?;
        for k in 0..=sol.n() {
            let s = sol.step_stats(k);
            w.write_record([
                s.k.to_string(),
                s.t.to_string(),
                s.y_mean.to_string(),
                s.y_std.to_string(),
                s.z_mean.first().copied().unwrap_or(f64::NAN).to_string(),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        write_file(&resolve(out, p), &String::from_utf8_lossy(&bytes))?;
    }
    let replicated = if args.replicas > 0 {
        let seeds: Vec<u64> = (0..=args.replicas).map(|i| args.run.seed + i).collect();
        Some(replicate_y0(&tspec, args.run.n, args.run.particles, &args.run.estimator, &seeds)?)
    } else {
        None
    };
    let mut summary = json!({
        "Y0_mean": sol.y0(),
        "Y0_stderr": sol.y0_stderr(),
        "Z0_mean": sol.z0(),
        "runtime": start.elapsed().as_secs_f64(),
        "n": sol.n(),
        "P": sol.particles(),
        "M": args.run.m,
        "estimator": sol.estimator().label(),
        "variant": sol.variant().name(),
        "seed": args.run.seed,
        "rank_deficient_steps": sol.rank_deficient_steps(),
    });
    if let Some(r) = replicated {
        summary["Y0_run_std"] = Value::from(r.run_std);
        summary["replicas"] = serde_json::to_value(&r)?;
    }
    summary["runtime"] = Value::from(start.elapsed().as_secs_f64());
    out!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn oracle(args: &OracleArgs) -> Result<()> {
    let start = Instant::now();
    let spec = load_problem(&args.run.problem)?;
    let kind = if args.kind == "auto" {
        if ReferenceSolution::closed_form(&spec).is_some() {
            "closed-form"
        } else if spec.is_pure_quadratic() {
            "cole-hopf"
        } else {
            "fine-grid"
        }
    } else {
        args.kind.as_str()
    };
    let value = match kind {
        "closed-form" => {
            let r = ReferenceSolution::closed_form(&spec)
                .ok_or_else(|| Error::Problem(format!("`{}` has no closed form", args.run.problem)))?;
            let z0 = r.eval(spec.t0(), spec.x0()).map(|v| v.1);
            json!({ "kind": r.kind, "Y0": r.y0, "Y0_stderr": r.y0_stderr, "Z0": z0, "provenance": r.provenance })
        }
        "cole-hopf" => {
            let e = cole_hopf(&spec, spec.t0(), spec.x0(), args.samples, args.run.seed, COLE_HOPF_INNER_STEPS)?;
            json!({
                "kind": "cole-hopf-mc",
                "Y0": e.y,
                "Y0_stderr": e.stderr,
                "provenance": {
                    "samples": e.samples,
                    "seed": e.seed,
                    "inner_steps": e.inner_steps,
                    "g_mean": e.g_mean,
                    "g_stderr": e.g_stderr,
                    "note": "log of the Monte Carlo mean of exp(g(X_T))",
                },
            })
        }
        "fine-grid" => {
            let r = fine_grid_reference(
                &truncated(&spec, &args.run)?,
                args.run.n,
                args.run.particles,
                &args.run.estimator,
                args.run.seed,
            )?;
            let z0 = r.solution().map(|s| s.z0());
            json!({ "kind": r.kind, "Y0": r.y0, "Y0_stderr": r.y0_stderr, "Z0": z0, "provenance": r.provenance })
        }
        other => return Err(Error::Problem(format!("unknown reference kind `{other}`"))),
    };
    let mut value = value;
    value["problem"] = Value::from(args.run.problem.clone());
    value["runtime"] = Value::from(start.elapsed().as_secs_f64());
    out!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn study(config: &Path, truncation: bool, out: &Option<PathBuf>) -> Result<()> {
    let text = std::fs::read_to_string(config)?;
    let fill = |o: &mut bsde_lab::harness::StudyOutputs| {
        if o.csv.is_none() && o.json.is_none() && o.plot.is_none() {
            if let Some(dir) = out {
                o.csv = Some(dir.join("study.csv"));
                o.json = Some(dir.join("study.json"));
                o.plot = Some(dir.join("study.dat"));
            }
        } else {
            for p in [&mut o.csv, &mut o.json, &mut o.plot].into_iter().flatten() {
                *p = resolve(out, p);
            }
        }
    };
    // relative problem paths are relative to the config file
    let base = config.parent().unwrap_or(Path::new(""));
    let locate = |problem: &mut String| {
        if !problem.starts_with("catalog:") && Path::new(problem.as_str()).is_relative() {
            *problem = base.join(problem.as_str()).to_string_lossy().into_owned();
        }
    };
    let start = Instant::now();
    let outcome: StudyOutcome = if truncation {
        let mut cfg: TruncationStudyConfig = serde_json::from_str(&text)?;
        locate(&mut cfg.problem);
        fill(&mut cfg.outputs);
        truncation_study(&cfg)?
    } else {
        let mut cfg: StudyConfig = serde_json::from_str(&text)?;
        locate(&mut cfg.problem);
        fill(&mut cfg.outputs);
        convergence_study(&cfg)?
    };
    out_raw!("{}", reports_to_json(&outcome.reports, &outcome.provenance)?);
    if let Some(f) = outcome.fit {
        eprintln!(
            "slope {:.4}  intercept {:.4}  r2 {:.4}  ({} runs, {:.1} s)",
            f.slope,
            f.intercept,
            f.r2,
            outcome.reports.len(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|pt| {
            pt.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Problem(format!("bad grid coordinate `{c}`")))
                })
                .collect()
        })
        .collect()
}

fn pde(args: &PdeArgs, out: &Option<PathBuf>) -> Result<()> {
    let spec = load_problem(&args.run.problem)?;
    let strategy = match args.strategy.as_str() {
        "per-point" => FkStrategy::PerPoint,
        "single-run" => FkStrategy::SingleRun,
        other => return Err(Error::Problem(format!("unknown strategy `{other}`"))),
    };
    let cfg = FkConfig {
        t_grid: args.t_grid.clone(),
        x_grid: parse_points(&args.x_grid)?,
        n: args.run.n,
        particles: args.run.particles,
        m: args.run.m,
        estimator: args.run.estimator.clone(),
        seed: args.run.seed,
        strategy,
        variant: args.run.variant,
    };
    let field = feynman_kac_grid(&spec, &cfg)?;
    let text = serde_json::to_string_pretty(&field)?;
    if let Some(dir) = out {
        write_file(&dir.join("pde.json"), &text)?;
    }
    out!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    with_threads(cli.threads, || match &cli.cmd {
        Cmd::Check { problem, json } => check(problem, *json),
        Cmd::Solve(a) => solve(a, &cli.out),
        Cmd::Oracle(a) => oracle(a),
        Cmd::Study { config, truncation } => study(config, *truncation, &cli.out),
        Cmd::Pde(a) => pde(a, &cli.out),
    })?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(if e.is_assumption_violation() {
                2
            } else if e.is_numerical() {
                3
            } else {
                1
            })
        }
    }
}
