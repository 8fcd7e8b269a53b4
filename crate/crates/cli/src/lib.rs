//! `stokeslab`: JSON-configured batch runs of every verification, with
//! JSON/CSV reports and deterministic seeds. The report schema is
//! documented in `crates/cli/SCHEMA.md`.

pub mod commands;
pub mod config;
pub mod report;

pub use config::{Precision, RunConfig};
pub use report::{emit_plot_data, Report};

use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input or a violated precondition: exit 2.
    #[error("{code}: {message}")]
    Validation { code: String, message: String },
    /// A computation that could not finish: exit 1.
    #[error("{code}: {message}")]
    Numerical { code: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical { .. } => 1,
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Validation { code, .. } | CliError::Numerical { code, .. } => code,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, code, message) = match self {
            CliError::Validation { code, message } => ("validation", code, message),
            CliError::Numerical { code, message } => ("numerical", code, message),
        };
        report::to_json_string(&json!({
            "schema_version": report::SCHEMA_VERSION,
            "error": {"kind": kind, "code": code, "message": message, "exit_code": self.exit_code()},
        }))
    }
}

/// Variant name of an error enum, from its Debug form.
fn variant<E: std::fmt::Debug>(e: &E) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric() && c != '_').next().unwrap_or("Error").to_string()
}

impl From<stokes_classical::StokesError> for CliError {
    fn from(e: stokes_classical::StokesError) -> Self {
        use stokes_classical::StokesError::*;
        let (code, message) = (variant(&e), e.to_string());
        match e {
            NonRegularA { .. } | NonAdmissibleRay { .. } | OutsideHalfPlane | InvalidCut(_) | CutHandling { .. } | ResonantB { .. } | Shape { .. } => {
                CliError::Validation { code, message }
            }
            Singular | Ode(_) | Seed(_) => CliError::Numerical { code, message },
        }
    }
}

impl From<poisson_geom::PoissonError> for CliError {
    fn from(e: poisson_geom::PoissonError) -> Self {
        use poisson_geom::PoissonError::*;
        match e {
            Stokes(s) => s.into(),
            NoConsistentScale { .. } => CliError::Numerical { code: variant(&e), message: e.to_string() },
            _ => CliError::Validation { code: variant(&e), message: e.to_string() },
        }
    }
}

impl From<hbar_quantum::HbarError> for CliError {
    fn from(e: hbar_quantum::HbarError) -> Self {
        use hbar_quantum::HbarError::*;
        match e {
            Stokes(s) => s.into(),
            QuadratureNotConverged { .. } | RouteMismatch { .. } => CliError::Numerical { code: variant(&e), message: e.to_string() },
            _ => CliError::Validation { code: variant(&e), message: e.to_string() },
        }
    }
}

impl From<isomonodromy::IsoError> for CliError {
    fn from(e: isomonodromy::IsoError) -> Self {
        use isomonodromy::IsoError::*;
        match e {
            Stokes(s) => s.into(),
            Csv(_) | Io(_) => CliError::Numerical { code: "Io".into(), message: e.to_string() },
            _ => CliError::Validation { code: variant(&e), message: e.to_string() },
        }
    }
}

/// Resolve, validate and run one command.
pub fn run(command: &str, cfg: RunConfig) -> Result<Report, CliError> {
    let cfg = cfg.resolve(command)?;
    commands::dispatch(&cfg)
}

/// Command-line overrides applied on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<String>,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub tol_scale: Option<f64>,
    pub precision: Option<Precision>,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation { code: "Io".into(), message: format!("{}: {e}", path.display()) }
}

pub fn load_config(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| CliError::Validation { code: "InvalidConfig".into(), message: format!("{}: {e}", p.display()) })?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(t) = o.tol_scale {
        cfg.tol_scale = Some(t);
    }
    if let Some(p) = o.precision {
        cfg.precision = p;
    }
    if let Some(d) = &o.out {
        cfg.out = Some(d.display().to_string());
    }
    Ok(cfg)
}

/// Full run: load, dispatch, write report.json, plot.csv and attachments
/// into the output directory (or print the report when there is none).
/// Returns the process exit code.
pub fn execute(o: &Overrides) -> i32 {
    match execute_inner(o) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute_inner(o: &Overrides) -> Result<i32, CliError> {
    let cfg = load_config(o)?;
    let command = o.command.clone().or_else(|| cfg.command.clone()).ok_or_else(|| CliError::Validation {
        code: "InvalidConfig".into(),
        message: format!("no command given; expected one of {}", config::COMMANDS.join(", ")),
    })?;
    let out = cfg.out.clone();
    let rep = run(&command, cfg)?;
    let json = rep.to_json();
    match out {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            let w = |name: &str, bytes: &[u8]| report::write_atomic(&dir.join(name), bytes).map_err(|e| io_err(&dir.join(name), e));
            w("report.json", json.as_bytes())?;
            w("plot.csv", emit_plot_data(&rep.to_value()).as_bytes())?;
            for (name, bytes) in &rep.attachments {
                w(name, bytes)?;
            }
            let failed: Vec<&String> = rep.residuals.iter().filter(|(_, c)| !c.pass).map(|(k, _)| k).collect();
            if failed.is_empty() {
                println!("{command}: pass ({} residuals) -> {}", rep.residuals.len(), dir.display());
            } else {
                println!("{command}: FAIL {failed:?} -> {}", dir.display());
            }
        }
        None => print!("{json}"),
    }
    Ok(if rep.pass() { 0 } else { 1 })
}
