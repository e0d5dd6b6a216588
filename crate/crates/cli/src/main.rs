//! `levichk <check|schur|solve|sweep|verify> <problem.json> [--out DIR] [--seed S] [--json]`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use levichk_core::levi::{check_corollary, check_main_theorem, check_oleinik, LeviData, OleinikError};
use levichk_core::oracle::{verify_all, OracleReport};
use levichk_core::problem::load_problem;
use levichk_core::spectral::{frequency_sweep, solve, SolveOptions, SweepResult, TorusGrid};
use levichk_core::{LeviReport, LeviVerdict, OleinikReport, ProblemSpec, RunResult64, SymbolMatrix};
use serde::Serialize;
use sha2::{Digest, Sha256};

const EXIT_FAIL: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "levichk", version, about = "Levi-condition checker for weakly hyperbolic equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Problem file (JSON).
    problem: PathBuf,
    /// Output directory for reports and CSV files.
    #[arg(long, env = "LEVICHK_OUT", default_value = "out")]
    out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Print the report bundle as JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide the Levi conditions; exit 0 PASS, 1 FAIL, 2 INCONCLUSIVE.
    Check(Common),
    /// Print T, T^-1, J, D and E.
    Schur(Common),
    /// Integrate on the torus and write the norm history as CSV.
    Solve(Common),
    /// Run the frequency sweep and write the growth table as CSV.
    Sweep(Common),
    /// Run the brute-force cross-checks; exit 1 if any fails.
    Verify(Common),
}

#[derive(Serialize)]
struct ReportBundle {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    problem: String,
    input_hash: String,
    seed: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    levi: Vec<LeviReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oleinik: Option<OleinikOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    schur: Option<SchurDump>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    oracle: Vec<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepResult>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    csv: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "kebab-case")]
enum OleinikOutcome {
    Report(OleinikReport),
    NotApplicable(String),
}

#[derive(Serialize)]
struct SchurDump {
    t: Vec<Vec<String>>,
    tinv: Vec<Vec<String>>,
    j: Vec<Vec<String>>,
    d: Vec<Vec<String>>,
    e: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct RunSummary {
    modes: usize,
    steps: usize,
    dt: f64,
    final_time: f64,
    growth: f64,
    blowup: Option<f64>,
}

struct Context {
    spec: ProblemSpec,
    common: Common,
    stem: String,
    bundle: ReportBundle,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("levichk: {msg}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}

fn run(command: Command) -> Result<u8, String> {
    let (name, common) = match command {
        Command::Check(c) => ("check", c),
        Command::Schur(c) => ("schur", c),
        Command::Solve(c) => ("solve", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Verify(c) => ("verify", c),
    };
    let spec = load_problem(&common.problem).map_err(|e| format!("{}: {e}", common.problem.display()))?;
    let stem = common
        .problem
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    let bundle = ReportBundle {
        tool: "levichk",
        version: env!("CARGO_PKG_VERSION"),
        command: name,
        problem: common.problem.display().to_string(),
        input_hash: hex::encode(Sha256::digest(spec.canonical_json().as_bytes())),
        seed: common.seed,
        levi: vec![],
        oleinik: None,
        schur: None,
        oracle: vec![],
        run: None,
        sweep: None,
        csv: vec![],
    };
    fs::create_dir_all(&common.out).map_err(|e| format!("{}: {e}", common.out.display()))?;
    let mut ctx = Context {
        spec,
        common,
        stem,
        bundle,
    };
    let (code, summary) = match name {
        "check" => cmd_check(&mut ctx),
        "schur" => cmd_schur(&mut ctx)?,
        "solve" => cmd_solve(&mut ctx)?,
        "sweep" => cmd_sweep(&mut ctx)?,
        _ => cmd_verify(&mut ctx)?,
    };
    let json = serde_json::to_string_pretty(&ctx.bundle).map_err(|e| e.to_string())?;
    let report = ctx.common.out.join(format!("{}.{name}.json", ctx.stem));
    write_file(&report, &(json.clone() + "\n"))?;
    if ctx.common.json {
        println!("{json}");
    } else {
        print!("{summary}");
        println!("report: {}", report.display());
    }
    Ok(code)
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// 17 significant digits.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn levi_summary(out: &mut String, title: &str, r: &LeviReport) {
    let _ = writeln!(out, "{title}: {}", r.overall);
    for c in &r.conditions {
        let _ = writeln!(out, "  {:<13} {}", c.result.verdict.to_string(), c.id);
        if let Some(w) = &c.result.witness {
            let _ = writeln!(
                out,
                "                witness: term xi^{:?} <xi>^{} of order {}, |c| = {:.3e} at t = {}",
                w.alpha, -w.p, w.order, w.magnitude, w.t
            );
        }
        if let Some(n) = &c.result.note {
            let _ = writeln!(out, "                note: {n}");
        }
    }
    if let Some(n) = &r.note {
        let _ = writeln!(out, "  note: {n}");
    }
}

fn cmd_check(ctx: &mut Context) -> (u8, String) {
    let main = check_main_theorem(&ctx.spec);
    let corollary = check_corollary(&ctx.spec);
    let mut out = String::new();
    levi_summary(&mut out, "main theorem", &main);
    levi_summary(&mut out, "corollary", &corollary);
    ctx.bundle.oleinik = Some(match check_oleinik(&ctx.spec) {
        Ok(r) => {
            let _ = match (&r.constants, &r.worst_violation) {
                (Some(c), _) => writeln!(out, "oleinik: feasible with C = {}, A = {}", c.c, c.a),
                (None, Some(w)) => writeln!(
                    out,
                    "oleinik: infeasible on the grid; worst at t = {:.3e}: {:.3e} > {:.3e}",
                    w.t, w.lhs, w.rhs
                ),
                (None, None) => writeln!(out, "oleinik: infeasible"),
            };
            OleinikOutcome::Report(r)
        }
        Err(e @ OleinikError::NotApplicable(_)) => {
            let _ = writeln!(out, "oleinik: not applicable");
            OleinikOutcome::NotApplicable(e.to_string())
        }
        Err(e) => {
            let _ = writeln!(out, "oleinik: {e}");
            OleinikOutcome::NotApplicable(e.to_string())
        }
    });
    let code = match main.overall {
        LeviVerdict::Pass => 0,
        LeviVerdict::Fail => EXIT_FAIL,
        _ => EXIT_INCONCLUSIVE,
    };
    ctx.bundle.levi = vec![main, corollary];
    (code, out)
}

fn dump(m: &SymbolMatrix) -> Vec<Vec<String>> {
    m.rows().map(|r| r.iter().map(|s| s.to_string()).collect()).collect()
}

fn cmd_schur(ctx: &mut Context) -> Result<(u8, String), String> {
    let data = LeviData::new(&ctx.spec).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for (name, m) in [
        ("T", &data.schur.t),
        ("T^-1", &data.schur.tinv),
        ("J", &data.schur.j),
        ("D", &data.d),
        ("E", &data.e),
    ] {
        let _ = writeln!(out, "{name}:\n{m}");
    }
    ctx.bundle.schur = Some(SchurDump {
        t: dump(&data.schur.t),
        tinv: dump(&data.schur.tinv),
        j: dump(&data.schur.j),
        d: dump(&data.d),
        e: dump(&data.e),
    });
    Ok((0, out))
}

fn run_csv(res: &RunResult64) -> String {
    let m = res.component_norms.first().map_or(0, Vec::len);
    let mut csv = String::from("t");
    for k in 1..=m {
        let _ = write!(csv, ",norm_c{k}");
    }
    csv.push_str(",aniso\n");
    for ((t, norms), a) in res.times.iter().zip(&res.component_norms).zip(&res.aniso) {
        csv.push_str(&num(*t));
        for v in norms {
            csv.push(',');
            csv.push_str(&num(*v));
        }
        let _ = writeln!(csv, ",{}", num(*a));
    }
    csv
}

fn cmd_solve(ctx: &mut Context) -> Result<(u8, String), String> {
    let grid = TorusGrid::<f64>::new(ctx.spec.dim, ctx.spec.solver.modes).map_err(|e| e.to_string())?;
    let res = solve(&ctx.spec, &grid, &SolveOptions::from_spec(&ctx.spec)).map_err(|e| e.to_string())?;
    let path = ctx.common.out.join(format!("{}.solve.csv", ctx.stem));
    write_file(&path, &run_csv(&res))?;
    ctx.bundle.csv.push(path.display().to_string());
    let summary = RunSummary {
        modes: grid.modes(),
        steps: res.steps,
        dt: res.dt,
        final_time: res.final_time,
        growth: res.growth(),
        blowup: res.blowup,
    };
    let mut out = format!(
        "solved to t = {} in {} steps (dt = {:.3e}, N = {}); sup aniso(t)/aniso(0) = {:.6}\n",
        summary.final_time, summary.steps, summary.dt, summary.modes, summary.growth
    );
    let code = match res.blowup {
        Some(t) => {
            let _ = writeln!(out, "non-finite values at t = {t}; partial history written");
            EXIT_RUNTIME
        }
        None => 0,
    };
    let _ = writeln!(out, "csv: {}", path.display());
    ctx.bundle.run = Some(summary);
    Ok((code, out))
}

fn cmd_sweep(ctx: &mut Context) -> Result<(u8, String), String> {
    let sweep = &ctx.spec.sweep;
    let res = frequency_sweep::<f64>(&ctx.spec, &sweep.n_list, sweep.mode_fraction, &SolveOptions::from_spec(&ctx.spec))
        .map_err(|e| e.to_string())?;
    let mut csv = String::from("N,rho,fitted_q\n");
    let mut out = String::from("     N          rho\n");
    for row in &res.rows {
        let _ = writeln!(csv, "{},{},{}", row.n, num(row.rho), num(res.fitted_q));
        let _ = writeln!(out, "{:>6} {:>12.6}", row.n, row.rho);
    }
    let _ = writeln!(out, "fitted q = {:.4}", res.fitted_q);
    let path = ctx.common.out.join(format!("{}.sweep.csv", ctx.stem));
    write_file(&path, &csv)?;
    let _ = writeln!(out, "csv: {}", path.display());
    ctx.bundle.csv.push(path.display().to_string());
    ctx.bundle.sweep = Some(res);
    Ok((0, out))
}

fn cmd_verify(ctx: &mut Context) -> Result<(u8, String), String> {
    let reports = verify_all(&ctx.spec, ctx.common.seed).map_err(|e| e.to_string())?;
    let mut out = String::new();
    for r in &reports {
        let status = match (r.skipped, r.pass) {
            (true, _) => "SKIP",
            (_, true) => "PASS",
            _ => "FAIL",
        };
        let _ = writeln!(
            out,
            "{status}  {:<22} max deviation {:.3e} (tolerance {:.0e}, {} samples)",
            r.name, r.max_deviation, r.tolerance, r.samples
        );
        if let Some(n) = &r.note {
            let _ = writeln!(out, "      {n}");
        }
    }
    let code = if reports.iter().all(|r| r.pass) { 0 } else { EXIT_FAIL };
    ctx.bundle.oracle = reports;
    Ok((code, out))
}
