//! Scenario-driven command line front end.
//!
//! Exit codes: 0 when every assertion passes, 2 when an assertion fails,
//! 1 for configuration and input errors.

pub mod config;
pub mod convergence;
pub mod run;
pub mod svg;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::conformal::balance;
use crate::immersion::{gallery_names, AmbientSpace};
use crate::meshfem::read_off;
use config::{load_config, Backend, ConfigError};
use convergence::convergence_study;
use run::{identity_rows, run_config, vertex_measure, write_convergence, RunOptions};

pub use config::{parse_config, Config, Expectation, Method, Output, Scenario};
pub use convergence::{loglog_slope, ConvergenceRow, ConvergenceStudy, ReferenceKind};
pub use run::{assess, run_scenario, AssertionOutcome, ScenarioOutcome};

pub const SEED_ENV: &str = "REILLY_LAB_SEED";
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Error,
    AssertionFailed,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Error => 1,
            Status::AssertionFailed => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "reilly-lab", version, about = "Reilly-type eigenvalue bounds on submanifolds of space forms")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Run independent scenarios concurrently.
    #[arg(long, global = true)]
    pub parallel: bool,
    /// Relative tolerance overriding every assertion tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AmbientKind {
    Euclidean,
    Sphere,
    Hyperbolic,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run every scenario of a JSON config.
    Run { config: PathBuf },
    /// Run the seeded identity suites and print the largest residual of each.
    VerifyIdentities {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Finite element convergence of the scenarios of a config.
    Convergence {
        config: PathBuf,
        /// Inclusive level range `a..b`.
        #[arg(long, value_parser = parse_levels)]
        levels: Option<LevelRange>,
        /// Restrict to one scenario.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Balance the lumped vertex measure of an OFF mesh.
    Balance {
        mesh: PathBuf,
        #[arg(long, value_enum)]
        ambient: AmbientKind,
    },
    /// Show the gallery geometries.
    Gallery {
        #[arg(long)]
        list: bool,
    },
}

/// Inclusive range of mesh levels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRange(pub Vec<usize>);

/// Parses `a..b` or `a..=b` (both inclusive) or a single level.
pub fn parse_levels(s: &str) -> std::result::Result<LevelRange, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("`{t}` is not a level"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let a = parse(s)?;
            (a, a)
        }
    };
    if a > b {
        return Err(format!("empty level range {a}..{b}"));
    }
    Ok(LevelRange((a..=b).collect()))
}

/// `--seed`, then `REILLY_LAB_SEED`, then the config seed, then the default.
pub fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> std::result::Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{SEED_ENV}=`{v}` is not an unsigned integer")),
        Err(std::env::VarError::NotPresent) => Ok(config.unwrap_or(DEFAULT_SEED)),
        Err(e) => Err(format!("{SEED_ENV}: {e}")),
    }
}

fn config_or_exit(path: &Path) -> std::result::Result<Config, Status> {
    load_config(path).map_err(|e: ConfigError| {
        eprintln!("config error: {e}");
        Status::Error
    })
}

fn cmd_run(cli: &Cli, path: &Path) -> Status {
    let cfg = match config_or_exit(path) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let seed = match resolve_seed(None, cfg.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return Status::Error;
        }
    };
    let opts = RunOptions { out: cli.out.clone(), parallel: cli.parallel, tol: cli.tol, seed };
    let mut status = Status::Pass;
    for res in run_config(&cfg, &opts) {
        match res {
            Ok(o) => {
                let r = &o.report;
                println!(
                    "{} {}: lambda2={:.9} rhs={:.9} gap={:.3e} tol={:.1e} backend={}",
                    if o.passed() { "PASS" } else { "FAIL" },
                    o.scenario,
                    r.lambda2,
                    r.rhs,
                    r.gap,
                    o.assertion.tolerance,
                    r.backend
                );
                for f in &o.failures {
                    println!("    {f}");
                }
                if !o.passed() && status == Status::Pass {
                    status = Status::AssertionFailed;
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                status = Status::Error;
            }
        }
    }
    status
}

fn print_identity_table(rows: &[crate::tensorlab::IdentityRow]) {
    println!("{:<36} {:<10} {:>9} {:>14} {:>10}  status", "identity", "kind", "instances", "max_residual", "tolerance");
    for r in rows {
        println!(
            "{:<36} {:<10} {:>9} {:>14.6e} {:>10.1e}  {}",
            r.identity,
            r.kind,
            r.instances,
            r.max_residual,
            r.tolerance,
            if r.passed() { "pass" } else { "FAIL" }
        );
    }
    println!("{} identities", rows.len());
}

fn cmd_identities(cli: &Cli, seed: Option<u64>, count: usize) -> Status {
    let seed = match resolve_seed(seed, None) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return Status::Error;
        }
    };
    let rows = match identity_rows(seed, count) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Status::Error;
        }
    };
    println!("seed {seed}, {count} instances");
    print_identity_table(&rows);
    let dir = cli.out.join("identities");
    let written = fs::create_dir_all(&dir).map_err(crate::LabError::from).and_then(|_| {
        let mut wr = csv::Writer::from_writer(BufWriter::new(File::create(dir.join("identities.csv"))?));
        for r in &rows {
            wr.serialize(r).map_err(crate::meshfem::csv_err)?;
        }
        wr.flush()?;
        Ok(())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return Status::Error;
    }
    if rows.iter().all(|r| r.passed()) {
        Status::Pass
    } else {
        Status::AssertionFailed
    }
}

fn cmd_convergence(cli: &Cli, path: &Path, levels: &[usize], only: Option<&str>) -> Status {
    let cfg = match config_or_exit(path) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let selected: Vec<&Scenario> = cfg.scenarios.iter().filter(|s| only.is_none_or(|n| n == s.name)).collect();
    if selected.is_empty() {
        eprintln!("config error: no scenario named `{}`", only.unwrap_or_default());
        return Status::Error;
    }
    let one = |s: &Scenario| -> crate::Result<ConvergenceStudy> {
        let imm = s.immersion()?;
        if s.backend_for(&imm) != Backend::Fem {
            return Err(crate::LabError::Unsupported(format!(
                "scenario `{}` is not finite element backed; convergence needs the fem backend",
                s.name
            )));
        }
        let lv = if levels.is_empty() { s.fem_levels() } else { levels.to_vec() };
        let study = convergence_study(&imm, &s.operator_for(&imm), &lv)?;
        let dir = cli.out.join(&s.name);
        fs::create_dir_all(&dir)?;
        write_convergence(&dir, &study)?;
        Ok(study)
    };
    let results: Vec<crate::Result<ConvergenceStudy>> = if cli.parallel {
        use rayon::prelude::*;
        selected.par_iter().map(|s| one(s)).collect()
    } else {
        selected.iter().map(|s| one(s)).collect()
    };
    let mut status = Status::Pass;
    for (s, res) in selected.iter().zip(results) {
        match res {
            Ok(st) => {
                println!("{}:", s.name);
                println!("  level vertices lambda2 rhs gap");
                for r in &st.rows {
                    println!("  {} {} {:.9} {:.9} {:.3e}", r.level, r.vertices, r.lambda2, r.rhs, r.gap);
                }
                match (st.slope, st.reference) {
                    (Some(k), Some(rf)) => println!("  reference {rf:.9} ({:?}), fitted slope {k:.3}", st.reference_kind.expect("set with reference")),
                    _ => println!("  single level, no fit"),
                }
            }
            Err(e) => {
                eprintln!("error: scenario `{}`: {e}", s.name);
                status = Status::Error;
            }
        }
    }
    status
}

/// Space form whose linear model has `coords` coordinates.
pub fn ambient_for(kind: AmbientKind, coords: usize) -> crate::Result<AmbientSpace> {
    match kind {
        AmbientKind::Euclidean => AmbientSpace::new(0, coords),
        AmbientKind::Sphere => AmbientSpace::new(1, coords.saturating_sub(1)),
        AmbientKind::Hyperbolic => AmbientSpace::new(-1, coords.saturating_sub(1)),
    }
}

fn off_coords(text: &str) -> crate::Result<usize> {
    let mut toks = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    match toks.next() {
        Some("OFF") => Ok(3),
        Some("nOFF") => toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| crate::LabError::Parse("nOFF: missing dimension".into())),
        other => Err(crate::LabError::Parse(format!("unknown OFF header {other:?}"))),
    }
}

fn cmd_balance(cli: &Cli, mesh_path: &Path, kind: AmbientKind) -> Status {
    let go = || -> crate::Result<run::BalanceSummary> {
        let text = fs::read_to_string(mesh_path)?;
        let ambient = ambient_for(kind, off_coords(&text)?)?;
        let name = mesh_path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh").to_string();
        let mesh = read_off(BufReader::new(text.as_bytes()), ambient, &name)?;
        let measure = vertex_measure(&mesh)?;
        let res = balance(&measure)?;
        let dir = cli.out.join(&name);
        fs::create_dir_all(&dir)?;
        res.write_csv(BufWriter::new(File::create(dir.join("balance.csv"))?))?;
        let sum = run::BalanceSummary::from_result(measure.mass(), &res);
        println!(
            "{name}: {} vertices in {}, mass {:.6}, |g| = {:.6e}, residual {:.3e} after {} iterations, {}",
            mesh.vertex_count(),
            ambient.label(),
            sum.mass,
            sum.gnorm,
            sum.residual,
            sum.iterations,
            if sum.converged { "converged" } else { "NOT converged" }
        );
        Ok(sum)
    };
    match go() {
        Ok(s) if s.converged => Status::Pass,
        Ok(_) => Status::AssertionFailed,
        Err(e) => {
            eprintln!("error: {e}");
            Status::Error
        }
    }
}

fn cmd_gallery() -> Status {
    for (name, synopsis) in gallery_names() {
        println!("{name:<28} {synopsis}");
    }
    Status::Pass
}

pub fn dispatch(cli: &Cli) -> Status {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            eprintln!("--tol must be positive and finite, got {t}");
            return Status::Error;
        }
    }
    match &cli.command {
        Command::Run { config } => cmd_run(cli, config),
        Command::VerifyIdentities { seed, count } => cmd_identities(cli, *seed, *count),
        Command::Convergence { config, levels, scenario } => {
            cmd_convergence(cli, config, levels.as_ref().map_or(&[][..], |l| &l.0[..]), scenario.as_deref())
        }
        Command::Balance { mesh, ambient } => cmd_balance(cli, mesh, *ambient),
        Command::Gallery { .. } => cmd_gallery(),
    }
}

/// Parses arguments and runs; usage errors map to exit code 1.
pub fn main_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => ExitCode::from(dispatch(&cli).code()),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(Status::Error.code()),
            }
        }
    }
}
