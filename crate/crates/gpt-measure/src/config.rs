use std::path::PathBuf;

use clap::ValueEnum;

pub const SEED_ENV: &str = "GPTM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    /// Double-precision evaluation, for timing comparisons. Only commands
    /// that emit no certificate accept it.
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: Mode,
    pub seed: u64,
    pub product_limit: usize,
    /// `None` leaves the choice to the command.
    pub format: Option<Format>,
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    /// `GPTM_SEED`, when set, replaces the configured seed.
    pub fn apply_env_seed(&mut self, value: Option<&str>) -> Result<(), String> {
        if let Some(v) = value {
            self.seed = v.trim().parse().map_err(|_| format!("{SEED_ENV}={v:?} is not an unsigned integer"))?;
        }
        Ok(())
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}
