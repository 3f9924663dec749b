use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{Backend, Config, Expectation, Method, Output, Scenario};
use super::convergence::{convergence_study, write_convergence_csv, ConvergenceStudy};
use super::svg::convergence_svg;
use crate::conformal::{balance, conformal_suite, BalanceResult, PointMeasure};
use crate::error::{LabError, Result};
use crate::meshfem::{csv_err, triangulate, weighted_mass, SurfaceMesh};
use crate::reilly::{check_inequality_with, factor_spectra, mean_curvature_report, CheckOptions, FactorCheck, ReillyReport};
use crate::tensorlab::{algebraic_suite, IdentityRow};

/// Largest relative error accepted for a finite element factor spectrum.
pub const FACTOR_TOLERANCE: f64 = 0.02;
pub const DEFAULT_FACTOR_LEVEL: usize = 4;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub parallel: bool,
    /// Overrides every scenario tolerance.
    pub tol: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssertionOutcome {
    pub expect: Expectation,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BalanceSummary {
    pub mass: f64,
    pub residual: f64,
    pub gnorm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BalanceSummary {
    pub fn from_result(mass: f64, r: &BalanceResult) -> Self {
        BalanceSummary {
            mass,
            residual: r.residual,
            gnorm: r.g.norm(),
            iterations: r.iterations,
            converged: r.converged,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub seed: u64,
    pub report: ReillyReport,
    pub assertion: AssertionOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceStudy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identities: Option<Vec<IdentityRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<FactorCheck>>,
    /// Every failed check; empty when the scenario passes.
    pub failures: Vec<String>,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn assess(report: &ReillyReport, expect: Expectation, tolerance: f64) -> AssertionOutcome {
    let scale = report.rhs.abs().max(f64::MIN_POSITIVE);
    let slack = tolerance * scale;
    let disc = report.discretization.as_ref().map_or(0.0, |d| d.estimate);
    let gap = report.gap;
    let (passed, detail) = match expect {
        Expectation::None => (true, "no assertion".to_string()),
        _ if !report.preconditions.satisfied => {
            (false, "operator preconditions fail, the bound does not apply".to_string())
        }
        Expectation::Holds => (gap >= -slack, format!("gap {gap:.6e} >= -{slack:.3e}")),
        Expectation::Equality => (gap.abs() <= slack, format!("|gap| {:.6e} <= {slack:.3e}", gap.abs())),
        Expectation::Strict => {
            let bound = slack.max(3.0 * disc);
            (gap > bound, format!("gap {gap:.6e} > {bound:.3e}"))
        }
        Expectation::Lambda2AboveRhs => (-gap > slack, format!("lambda2 - rhs {:.6e} > {slack:.3e}", -gap)),
    };
    AssertionOutcome { expect, tolerance, passed, detail }
}

/// Lumped-mass vertex measure of a mesh.
pub fn vertex_measure(mesh: &SurfaceMesh) -> Result<PointMeasure> {
    let ones = vec![1.0; mesh.vertex_count()];
    let w = weighted_mass(mesh, &ones)?.mul_vec(&ones);
    PointMeasure::new(mesh.ambient, mesh.vertices.clone(), w)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(f, value).map_err(|e| LabError::Parse(e.to_string()))
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Seeded identity suites: algebraic, then conformal.
pub fn identity_rows(seed: u64, count: usize) -> Result<Vec<IdentityRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = algebraic_suite(&mut rng, count)?;
    rows.extend(conformal_suite(&mut rng, count)?);
    Ok(rows)
}

pub fn write_convergence(dir: &Path, study: &ConvergenceStudy) -> Result<()> {
    write_convergence_csv(study, BufWriter::new(File::create(dir.join("convergence.csv"))?))?;
    let svg = dir.join("plot.svg");
    match convergence_svg(study) {
        Some(s) => fs::write(svg, s)?,
        None if svg.exists() => fs::remove_file(svg)?,
        None => {}
    }
    Ok(())
}

/// Runs one scenario and writes its artifacts under `out/<name>/`.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<ScenarioOutcome> {
    let imm = s.immersion()?;
    let resolution = s.resolution(&imm);
    let report = match s.method {
        Method::MeanCurvature => mean_curvature_report(&imm, resolution)?,
        Method::Reilly | Method::Schrodinger => {
            let mut co = CheckOptions::new(resolution);
            co.balance = s.wants(Output::Balance);
            check_inequality_with(&imm, &s.operator_for(&imm), &co)?
        }
    };
    let tolerance = opts.tol.or(s.tolerance).unwrap_or(report.tol_num);
    let assertion = assess(&report, s.expect, tolerance);
    let mut failures = Vec::new();
    if !assertion.passed {
        failures.push(format!("{}: {}", s.expect.label(), assertion.detail));
    }

    let dir = opts.out.join(&s.name);
    fs::create_dir_all(&dir)?;
    write_rows(&dir.join("report.csv"), &[report.row()])?;

    let backend = s.backend_for(&imm);
    let convergence = if s.wants(Output::Convergence) {
        let study = convergence_study(&imm, &s.operator_for(&imm), &s.fem_levels())?;
        write_convergence(&dir, &study)?;
        Some(study)
    } else {
        None
    };
    let balance_summary = if s.wants(Output::Balance) && backend == Backend::Fem {
        let mesh = triangulate(&imm, *s.fem_levels().last().expect("levels"))?;
        let measure = vertex_measure(&mesh)?;
        let res = balance(&measure)?;
        res.write_csv(BufWriter::new(File::create(dir.join("balance.csv"))?))?;
        let sum = BalanceSummary::from_result(measure.mass(), &res);
        if !sum.converged {
            failures.push(format!("balancing stopped with residual {:.3e}", sum.residual));
        }
        Some(sum)
    } else {
        None
    };
    let identities = if s.wants(Output::Identities) {
        let rows = identity_rows(opts.seed, s.identity_count.unwrap_or(super::config::DEFAULT_IDENTITY_COUNT))?;
        write_rows(&dir.join("identities.csv"), &rows)?;
        for r in rows.iter().filter(|r| !r.passed()) {
            failures.push(format!("identity {}: {:.3e} > {:.1e}", r.identity, r.max_residual, r.tolerance));
        }
        Some(rows)
    } else {
        None
    };
    let factors = if s.wants(Output::Factors) {
        let level = s.levels.last().copied().unwrap_or(DEFAULT_FACTOR_LEVEL);
        let checks = factor_spectra(&imm, level)?;
        write_rows(&dir.join("factors.csv"), &checks)?;
        for c in checks.iter().filter(|c| !(c.relative_error() <= FACTOR_TOLERANCE)) {
            failures.push(format!("factor S^{}({}) relative error {:.3e}", c.dim, c.radius, c.relative_error()));
        }
        Some(checks)
    } else {
        None
    };
    let outcome = ScenarioOutcome {
        scenario: s.name.clone(),
        seed: opts.seed,
        report,
        assertion,
        convergence,
        balance: balance_summary,
        identities,
        factors,
        failures,
    };
    write_json(&dir.join("report.json"), &outcome)?;
    Ok(outcome)
}

/// Runs every scenario, in declaration order or concurrently; results come
/// back in declaration order either way.
pub fn run_config(cfg: &Config, opts: &RunOptions) -> Vec<std::result::Result<ScenarioOutcome, String>> {
    let one = |s: &Scenario| run_scenario(s, opts).map_err(|e| format!("scenario `{}`: {e}", s.name));
    if opts.parallel {
        cfg.scenarios.par_iter().map(one).collect()
    } else {
        cfg.scenarios.iter().map(one).collect()
    }
}
