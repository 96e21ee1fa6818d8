use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use hamsim_cli::{run, JobConfig};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let job = JobConfig::parse();
    let outcome = run(&job);
    let written = match &job.out {
        Some(path) => {
            std::fs::write(path, &outcome.report).map_err(|e| format!("{}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(outcome.report.as_bytes())
            .map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("hamsim: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if let (2, Some(reason)) = (outcome.exit_code(), &outcome.reason) {
        eprintln!("hamsim: {reason}");
    }
    ExitCode::from(outcome.exit_code() as u8)
}
