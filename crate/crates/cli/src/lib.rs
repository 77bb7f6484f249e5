//! Scenario runner behind the `weakly-coupled` binary.
//!
//! A scenario is a JSON file naming a system, a kind of computation and its
//! parameters. Results are written atomically to an output directory together
//! with a `run-manifest.json` that hashes the configuration and every output.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod inputs;
pub mod output;
pub mod scenario;
pub mod selftest;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Kind, LoadedConfig};
pub use error::{CliError, CliResult, EXIT_FAILED, EXIT_INVALID};

/// Output directory used when neither the command line nor the file names one.
pub const DEFAULT_OUT_DIR: &str = "out";

/// What a finished run reports back to the caller.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: Option<PathBuf>,
    pub written: Vec<PathBuf>,
    pub lines: Vec<String>,
}

fn out_dir_for(config: &LoadedConfig, flag: Option<&Path>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| config.scenario.out_dir.as_ref().map(|d| config.resolve(&d.to_string_lossy())))
}

fn check_kind(config: &LoadedConfig, kind: Kind) -> CliResult<()> {
    match config.scenario.kind {
        Some(k) if k != kind => Err(CliError::schema(format!(
            "field `kind`: file declares `{}` but the `{}` command was run",
            k.name(),
            kind.name()
        ))),
        _ => Ok(()),
    }
}

/// Runs one scenario kind from `config_path` with `--set` overrides applied.
pub fn run_scenario(kind: Kind, config_path: &Path, sets: &[String], out_dir: Option<&Path>) -> CliResult<RunSummary> {
    let start = Instant::now();
    let config = LoadedConfig::read(config_path, sets)?;
    check_kind(&config, kind)?;
    let run = scenario::run(kind, &config)?;
    let dir = out_dir_for(&config, out_dir).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    let info = output::ManifestInfo {
        kind: kind.name(),
        config_path: config.path.as_deref(),
        config_text: &config.text,
        resolved_config: &config.value,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    let written = output::commit(&dir, &run.outputs, &info)?;
    Ok(RunSummary {
        out_dir: Some(dir),
        written,
        lines: run.summary,
    })
}

/// Runs the golden self-test. Writes `self-test.json` only when an output
/// directory is given; any failing item turns into [`CliError::SelfTest`].
pub fn run_self_test(config_path: Option<&Path>, sets: &[String], out_dir: Option<&Path>) -> CliResult<RunSummary> {
    let start = Instant::now();
    let config = match config_path {
        Some(p) => LoadedConfig::read(p, sets)?,
        None => LoadedConfig::empty(sets)?,
    };
    check_kind(&config, Kind::SelfTest)?;
    let report = selftest::run(Some(&config))?;
    let mut lines: Vec<String> = report.warnings.iter().map(|w| format!("warning: {w}")).collect();
    for item in &report.items {
        let tag = match item.outcome {
            selftest::Outcome::Pass => "PASS",
            selftest::Outcome::Fail => "FAIL",
            selftest::Outcome::Skip => "SKIP",
        };
        lines.push(format!("{tag} {}: {}", item.name, item.detail));
    }
    let dir = out_dir_for(&config, out_dir);
    let mut written = Vec::new();
    if let Some(dir) = &dir {
        let mut outputs = output::Outputs::new();
        outputs.json("self-test.json", &report);
        let info = output::ManifestInfo {
            kind: Kind::SelfTest.name(),
            config_path: config.path.as_deref(),
            config_text: &config.text,
            resolved_config: &config.value,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        };
        written = output::commit(dir, &outputs, &info)?;
    }
    let failed = report.failed();
    if !failed.is_empty() {
        for l in &lines {
            eprintln!("{l}");
        }
        return Err(CliError::SelfTest(failed));
    }
    Ok(RunSummary {
        out_dir: dir,
        written,
        lines,
    })
}
