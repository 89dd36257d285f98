use std::io::Write;
use std::process::ExitCode;

use gptm::config::SEED_ENV;

fn main() -> ExitCode {
    let seed = std::env::var(SEED_ENV).ok();
    let out = gptm::run(std::env::args_os(), seed.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
