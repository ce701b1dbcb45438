//! Experiment driver: parse a config, run one study, write its CSV and VTK
//! files.

pub mod config;
pub mod output;
pub mod studies;

pub use config::{ConfigError, Experiment, ExperimentConfig, Geometry};
pub use output::{config_hash, Cell, Table, VERSION};
pub use studies::{run_study, RunError, StudyOutput};

use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ReadConfig { .. } => 1,
            CliError::Run(_) | CliError::Io(_) => 2,
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig { path: path.into(), source })?;
    Ok(ExperimentConfig::parse(&text)?)
}

/// Write every table of a finished study under `dir`; returns the paths.
pub fn write_output(out: &StudyOutput, cfg: &ExperimentConfig, dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for t in out.tables.iter().chain([&out.timing]) {
        t.save(dir, cfg)?;
        paths.push(dir.join(format!("{}.csv", t.name)));
    }
    for (name, bytes) in &out.vtk {
        let p = dir.join(format!("{name}.vtk"));
        std::fs::write(&p, bytes)?;
        paths.push(p);
    }
    Ok(paths)
}

/// Parse, run and write. `out_dir` overrides the `output` key.
pub fn run(config_path: &Path, out_dir: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let mut cfg = load_config(config_path)?;
    if let Some(d) = out_dir {
        cfg.output = d.to_path_buf();
    }
    let out = run_study(&cfg)?;
    Ok(write_output(&out, &cfg, &cfg.output)?)
}
