use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::immersion::{gallery, GallerySpec, ParametricImmersion};
use crate::reilly::{OperatorSpec, Resolution};

pub const DEFAULT_FEM_LEVEL: usize = 5;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_IDENTITY_COUNT: usize = 100;

/// Which bound a scenario evaluates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The general bound for the configured operator, with the potential
    /// term when one is given.
    #[default]
    Reilly,
    /// Same as `reilly` but a potential is required.
    Schrodinger,
    /// The bound for `T = nH·I − h^{n+1}` written through `H`, `H₂` and `τ`.
    MeanCurvature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Fem,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Report,
    Convergence,
    Balance,
    Identities,
    Factors,
}

/// Assertion checked against the report.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    None,
    /// `λ₂ ≤ RHS` up to the tolerance.
    #[default]
    Holds,
    /// `|λ₂ − RHS| ≤ tol·|RHS|`.
    Equality,
    /// `RHS − λ₂` exceeds both `tol·|RHS|` and three discretization estimates.
    Strict,
    /// `λ₂ − RHS > tol·|RHS|`.
    Lambda2AboveRhs,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub geometry: GallerySpec,
    /// Defaults to `T = I` with the ambient curvature of the geometry.
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub method: Method,
    /// Defaults to finite elements for surfaces and closed form otherwise.
    #[serde(default)]
    pub backend: Option<Backend>,
    /// Mesh refinement levels, strictly increasing; the report uses the last.
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub expect: Expectation,
    /// Relative tolerance of the assertion; defaults to the backend tolerance.
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Random instances per identity when `identities` is requested.
    #[serde(default)]
    pub identity_count: Option<usize>,
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Report]
}

impl Scenario {
    pub fn immersion(&self) -> crate::Result<ParametricImmersion> {
        gallery(&self.geometry)
    }

    pub fn operator_for(&self, imm: &ParametricImmersion) -> OperatorSpec {
        self.operator.clone().unwrap_or_else(|| OperatorSpec::identity(imm.ambient.c))
    }

    pub fn backend_for(&self, imm: &ParametricImmersion) -> Backend {
        self.backend.unwrap_or(if imm.n() == 2 { Backend::Fem } else { Backend::ClosedForm })
    }

    pub fn fem_levels(&self) -> Vec<usize> {
        if self.levels.is_empty() {
            vec![DEFAULT_FEM_LEVEL]
        } else {
            self.levels.clone()
        }
    }

    /// Resolution of the main report.
    pub fn resolution(&self, imm: &ParametricImmersion) -> Resolution {
        match self.backend_for(imm) {
            Backend::Fem => Resolution::Fem { level: *self.fem_levels().last().expect("non-empty levels") },
            Backend::ClosedForm => Resolution::ClosedForm { samples: self.samples.unwrap_or(DEFAULT_SAMPLES) },
        }
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    /// Semantic checks that do not run any computation.
    fn validate(&self) -> std::result::Result<(), String> {
        if self.name.is_empty() || !self.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
            return Err(format!("name `{}` must be non-empty and use only [A-Za-z0-9_.-]", self.name));
        }
        if self.name.starts_with('.') {
            return Err(format!("name `{}` must not start with a dot", self.name));
        }
        let imm = self.immersion().map_err(|e| format!("geometry: {e}"))?;
        let spec = self.operator_for(&imm);
        spec.validate(imm.n(), imm.codim()).map_err(|e| format!("operator: {e}"))?;
        if spec.c != imm.ambient.c {
            return Err(format!(
                "operator.c: {} does not match the ambient curvature {} of {}",
                spec.c, imm.ambient.c, imm.name
            ));
        }
        if self.levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(format!("levels: {:?} must be strictly increasing", self.levels));
        }
        if self.samples == Some(0) {
            return Err("samples: must be positive".into());
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("tolerance: {t} must be positive and finite"));
            }
        }
        let backend = self.backend_for(&imm);
        if backend == Backend::Fem && imm.n() != 2 {
            return Err(format!("backend: finite elements need a surface, {} has dimension {}", imm.name, imm.n()));
        }
        if backend == Backend::ClosedForm && !self.levels.is_empty() {
            return Err("levels: only meaningful for the fem backend".into());
        }
        if backend == Backend::Fem && self.samples.is_some() {
            return Err("samples: only meaningful for the closed_form backend".into());
        }
        match self.method {
            Method::Schrodinger if spec.potential.is_none() => {
                return Err("operator.potential: the schrodinger method needs a potential".into());
            }
            Method::MeanCurvature => {
                if self.operator.is_some() {
                    return Err("operator: the mean_curvature method fixes its own operator".into());
                }
                if backend != Backend::ClosedForm {
                    return Err("backend: the mean_curvature method uses closed-form spectra".into());
                }
                if imm.n() < 4 {
                    return Err(format!("geometry: the mean_curvature method needs dimension >= 4, got {}", imm.n()));
                }
            }
            _ => {}
        }
        let fem_only = [Output::Convergence, Output::Balance];
        for o in fem_only {
            if self.wants(o) && backend != Backend::Fem {
                return Err(format!("outputs: `{}` needs the fem backend", output_name(o)));
            }
        }
        if self.wants(Output::Factors) && !matches!(imm.intrinsic, crate::immersion::IntrinsicModel::Product(_)) {
            return Err("outputs: `factors` needs a product geometry".into());
        }
        Ok(())
    }
}

impl Expectation {
    pub fn label(self) -> &'static str {
        match self {
            Expectation::None => "none",
            Expectation::Holds => "holds",
            Expectation::Equality => "equality",
            Expectation::Strict => "strict",
            Expectation::Lambda2AboveRhs => "lambda2_above_rhs",
        }
    }
}

pub fn output_name(o: Output) -> &'static str {
    match o {
        Output::Report => "report",
        Output::Convergence => "convergence",
        Output::Balance => "balance",
        Output::Identities => "identities",
        Output::Factors => "factors",
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: Option<u64>,
    pub scenarios: Vec<Scenario>,
}

/// Configuration problem with the file position and field path it refers to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub file: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file)?;
        if let Some(l) = self.line {
            write!(f, ":{l}")?;
            if let Some(c) = self.column {
                write!(f, ":{c}")?;
            }
        }
        write!(f, ": ")?;
        if let Some(p) = &self.field {
            write!(f, "field `{p}`: ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Line of the first `"name": "<name>"` entry.
fn line_of_name(text: &str, name: &str) -> Option<usize> {
    let quoted = serde_json::to_string(name).ok()?;
    text.lines().position(|l| l.contains("\"name\"") && l.contains(&quoted)).map(|i| i + 1)
}

/// Parses a configuration: either `{"seed": .., "scenarios": [..]}` or a bare
/// list of scenarios.
pub fn parse_config(text: &str, file: &str) -> std::result::Result<Config, ConfigError> {
    let bare = text.trim_start().starts_with('[');
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: std::result::Result<Config, _> = if bare {
        serde_path_to_error::deserialize(&mut de).map(|scenarios| Config { seed: None, scenarios })
    } else {
        serde_path_to_error::deserialize(&mut de)
    };
    let cfg = parsed.map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = if bare && path != "." { format!("scenarios{path}") } else { path };
        ConfigError {
            file: file.into(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            field: (path != "." && !path.is_empty()).then_some(path),
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| ConfigError {
        file: file.into(),
        line: Some(e.line()),
        column: Some(e.column()),
        field: None,
        message: strip_position(&e.to_string()),
    })?;
    if cfg.scenarios.is_empty() {
        return Err(ConfigError {
            file: file.into(),
            line: None,
            column: None,
            field: Some("scenarios".into()),
            message: "no scenarios".into(),
        });
    }
    let mut seen = HashSet::new();
    for (i, s) in cfg.scenarios.iter().enumerate() {
        let field = format!("scenarios[{i}]");
        let err = |message: String, field: String| ConfigError {
            file: file.into(),
            line: line_of_name(text, &s.name),
            column: None,
            field: Some(field),
            message,
        };
        if !seen.insert(s.name.clone()) {
            return Err(err(format!("duplicate scenario name `{}`", s.name), format!("{field}.name")));
        }
        s.validate().map_err(|m| match m.split_once(": ") {
            Some((sub, rest)) if !sub.contains(' ') => err(rest.to_string(), format!("{field}.{sub}")),
            _ => err(m, field.clone()),
        })?;
    }
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn load_config(path: &Path) -> std::result::Result<Config, ConfigError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: file.clone(),
        line: None,
        column: None,
        field: None,
        message: format!("cannot read: {e}"),
    })?;
    parse_config(&text, &file)
}
