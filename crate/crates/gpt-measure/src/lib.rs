//! File-based front end for `gptm_core`: JSON model loading, command
//! dispatch and built-in demos. [`run`] is the whole CLI as a function of
//! its arguments and the seed environment variable.

pub mod cli;
pub mod commands;
pub mod config;
pub mod demos;
pub mod error;
pub mod model;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::Cli;
use crate::commands::{execute, Body};
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn render(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn run<I, T>(args: I, env_seed: Option<&str>) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output { code: EXIT_OK, stdout: text, stderr: String::new() },
                _ => Output { code: EXIT_USAGE, stdout: String::new(), stderr: text },
            };
        }
    };
    let mut cfg = RunConfig {
        mode: cli.global.mode,
        seed: cli.global.seed,
        product_limit: cli.global.product_limit,
        format: cli.global.format,
        inputs: cli.command.inputs(),
    };
    let result = cfg
        .apply_env_seed(env_seed)
        .map_err(CliError::Usage)
        .and_then(|()| execute(&cli.command, &cfg));
    match result {
        Ok(r) => Output {
            code: r.code,
            stdout: match r.body {
                Body::Json(v) => render(&v),
                Body::Csv(s) => s,
            },
            stderr: String::new(),
        },
        Err(e) => Output { code: e.exit_code(), stdout: render(&e.payload()), stderr: format!("gpt-measure: {e}\n") },
    }
}
