//! Library half of the `quermass` command: config parsing, the three
//! commands and their output files.

use std::fs;
use std::path::{Path, PathBuf};

use quermass_core::{build_grid, flows, geometry, verify, Hypersurface};

pub mod config;
pub mod output;

pub use config::{Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("invalid config {}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] quermass_core::Error),
    /// A flow stopped early; partial output has been written.
    #[error("run aborted: {0}")]
    Aborted(quermass_core::Error),
    #[error("{0} verification check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    /// 1 for bad input, 2 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 2,
            CliError::Aborted(_) | CliError::ChecksFailed(_) => 2,
            _ => 1,
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub resolution: Option<(usize, usize)>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.emit_svg |= self.svg;
        if let Some(r) = self.resolution {
            cfg.grid = r;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
    }
}

pub fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected LAT,LON, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

pub fn load_config(path: &Path, expect: Mode, ov: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if cfg.mode != expect {
        return Err(CliError::Config {
            path: path.to_path_buf(),
            msg: format!("mode is {:?} but the {:?} command was used", cfg.mode, expect).to_lowercase(),
        });
    }
    ov.apply(&mut cfg);
    Ok(cfg)
}

fn build_shape(cfg: &RunConfig) -> Result<Hypersurface, CliError> {
    let grid = build_grid(cfg.n, cfg.grid.0, cfg.grid.1)?;
    let shape = cfg.shape.as_ref().ok_or_else(|| CliError::Invalid("no shape given".into()))?;
    let m = shape.build(&grid, cfg.seed)?;
    let norms = m.sup_norms();
    eprintln!("shape: C0 = {:.4e}, C1 = {:.4e}, C2 = {:.4e}", norms.c0, norms.c1, norms.c2);
    Ok(m)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

/// Integrates the configured flow and writes `diagnostics.csv` (and
/// `diagnostics.svg`). Returns the CSV path.
pub fn flow_run(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let flow = cfg.flow.as_ref().ok_or_else(|| CliError::Invalid("no flow section".into()))?;
    let m = build_shape(cfg)?;
    let out = flows::run(flow, &m)?;
    ensure_dir(&cfg.output_dir)?;
    let csv = cfg.output_dir.join("diagnostics.csv");
    output::emit_csv(&out.rows, &csv)?;
    if cfg.emit_svg {
        output::emit_svg(&out.rows, &["C0", "C1", "C2", "A"], true, &cfg.output_dir.join("diagnostics.svg"))?;
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    let last = &out.rows[out.rows.len() - 1];
    eprintln!("{} rows, t = {:.6}, {} steps -> {}", out.rows.len(), last.t, last.steps, csv.display());
    match out.abort {
        Some(e) => Err(CliError::Aborted(e)),
        None => Ok(csv),
    }
}

/// Writes `report.json` and returns its contents.
pub fn analyze(cfg: &RunConfig) -> Result<String, CliError> {
    let m = build_shape(cfg)?;
    let report = geometry::shape_report(&m)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("report.json");
    fs::write(&path, &text).map_err(|source| CliError::Io { path, source })?;
    Ok(text)
}

/// Runs a suite and returns its table.
pub fn verify_table(suite: Option<&str>) -> Result<(String, usize), CliError> {
    let results = verify::run_suite(suite).map_err(CliError::Invalid)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut table = String::new();
    for r in &results {
        table.push_str(&r.to_string());
        table.push('\n');
    }
    table.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
    Ok((table, failed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution_parsing() {
        assert_eq!(parse_resolution("32,64").unwrap(), (32, 64));
        assert_eq!(parse_resolution(" 8 , 16").unwrap(), (8, 16));
        assert!(parse_resolution("32x64").is_err());
        assert!(parse_resolution("a,1").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Invalid("x".into()).exit_code(), 1);
        assert_eq!(CliError::Core(quermass_core::Error::Domain("x".into())).exit_code(), 1);
        let e = quermass_core::Error::StepUnderflow { t: 1.0, dt: 0.0 };
        assert_eq!(CliError::Core(e.clone()).exit_code(), 2);
        assert_eq!(CliError::Aborted(e).exit_code(), 2);
    }
}
