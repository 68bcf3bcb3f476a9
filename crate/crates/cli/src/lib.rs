//! Batch front end for `tauqm`: one subcommand per science module, a TOML run configuration,
//! and deterministic CSV/JSON outputs.
//!
//! The binary is a thin wrapper around [`execute`], which the acceptance suite also calls
//! in-process.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_config, resolved_text, validate, Issue, IssueKind, RunConfig};

/// Name of the echoed configuration inside the output directory.
pub const RESOLVED_CONFIG: &str = "resolved_config.toml";
pub const ERROR_FILE: &str = "error.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Sector-resolved spectrum of the coupled operator (baseline Schrödinger at tau_c = 0).
    Solve,
    /// Second-order energy correction for the configured levels.
    Perturb,
    /// Cayley propagation of an initial state.
    Evolve,
    /// Closed-form harmonic spectrum.
    PuSpectrum,
    /// Commutator factor f(u) on a log-spaced range.
    UncertaintyCurve,
    /// dx- and n_max-refinement study of the sector levels.
    Converge,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Perturb => "perturb",
            Command::Evolve => "evolve",
            Command::PuSpectrum => "pu-spectrum",
            Command::UncertaintyCurve => "uncertainty-curve",
            Command::Converge => "converge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Io,
    Config,
    Numerical,
    Regime,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Regime => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub exit_code: i32,
    pub message: String,
    pub issues: Vec<Issue>,
}

impl CliError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self { kind, exit_code: kind.exit_code(), message: message.into(), issues: Vec::new() }
    }

    pub fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::new(ErrorKind::Io, format!("{}: {err}", path.display()))
    }

    /// Regime issues alone give the regime code; anything else is a configuration error.
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        let kind = if issues.iter().all(|i| i.kind == IssueKind::Regime) { ErrorKind::Regime } else { ErrorKind::Config };
        let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        Self { issues, ..Self::new(kind, format!("invalid configuration:\n  {}", lines.join("\n  "))) }
    }
}

impl From<tauqm::Error> for CliError {
    fn from(e: tauqm::Error) -> Self {
        let kind = if e.is_regime() {
            ErrorKind::Regime
        } else if e.is_numerical() {
            ErrorKind::Numerical
        } else {
            ErrorKind::Config
        };
        Self::new(kind, e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", serde_json::to_value(self.kind).unwrap().as_str().unwrap(), self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub config: PathBuf,
    /// Overrides `output.dir` without changing the resolved configuration.
    pub out: Option<PathBuf>,
    pub overrides: Vec<String>,
}

/// What a run left behind.
#[derive(Debug, Clone)]
pub struct Report {
    pub out_dir: PathBuf,
    /// Files written, relative to `out_dir`, in writing order.
    pub files: Vec<String>,
}

/// Parses, validates and runs. On failure `error.json` is written to the output directory when
/// one is known.
pub fn execute(inv: &Invocation) -> Result<Report, CliError> {
    let mut out_dir = inv.out.clone();
    let result = prepare_and_run(inv, &mut out_dir);
    if let Err(err) = &result {
        if let Some(dir) = &out_dir {
            if fs::create_dir_all(dir).is_ok() {
                // The original error is what matters; a failure to record it is only logged.
                if let Err(e) = output::write_json(&dir.join(ERROR_FILE), err) {
                    log::error!("{e}");
                }
            }
        }
    }
    result
}

fn prepare_and_run(inv: &Invocation, out_dir: &mut Option<PathBuf>) -> Result<Report, CliError> {
    let text = fs::read_to_string(&inv.config).map_err(|e| CliError::io(&inv.config, e))?;
    let cfg = parse_config(&text, &inv.overrides).map_err(CliError::from_issues)?;
    let dir = out_dir.get_or_insert_with(|| PathBuf::from(&cfg.output.dir)).clone();
    let issues = validate(&cfg, inv.command);
    if !issues.is_empty() {
        return Err(CliError::from_issues(issues));
    }
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let stale = dir.join(ERROR_FILE);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    fs::write(dir.join(RESOLVED_CONFIG), resolved_text(&cfg)).map_err(|e| CliError::io(&dir, e))?;
    let mut files = vec![RESOLVED_CONFIG.to_string()];
    files.extend(commands::run_command(&cfg, inv.command, &dir)?);
    Ok(Report { out_dir: dir, files })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(tauqm::Error::IllDefinedRegime { product: 1.2 }).exit_code, 4);
        assert_eq!(CliError::from(tauqm::Error::LinearSolve { routine: "dgttrf", info: 3 }).exit_code, 3);
        assert_eq!(CliError::from(tauqm::Error::BaselineOnly { tau_c: 0.0 }).exit_code, 2);
        let regime = Issue { path: "pu.omegas[0]".into(), message: "x".into(), kind: IssueKind::Regime };
        let config = Issue { path: "physics.mass".into(), message: "y".into(), kind: IssueKind::Config };
        assert_eq!(CliError::from_issues(vec![regime.clone()]).exit_code, 4);
        assert_eq!(CliError::from_issues(vec![regime, config]).exit_code, 2);
    }

    #[test]
    fn command_names_match_clap() {
        use clap::ValueEnum;
        for c in Command::value_variants() {
            assert_eq!(c.to_possible_value().unwrap().get_name(), c.name());
        }
    }
}
