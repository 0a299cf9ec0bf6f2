//! Command-line front end, scenario files and output formats for the
//! `congested-crowd-core` solvers.
//!
//! [`run_cli`] is the whole program; `main` only forwards the arguments and
//! the exit status.

pub mod args;
mod commands;
pub mod output;
pub mod scenario_file;

use std::io::Write;
use std::path::PathBuf;

use congested_crowd_core::Scenario;

use crate::args::{parse_args, USAGE};
use crate::output::num;
use crate::scenario_file::parse_with_overrides;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "CONGESTED_CROWD_THREADS";

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Runtime(String),
}

/// Runs one command. `args` excludes the program name.
pub fn run_cli(args: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_inner(args, out) {
        Ok(None) => EXIT_OK,
        Ok(Some((verdict, slack))) => {
            let word = if verdict { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "VERDICT: {word} max_slack={}", num(slack));
            if verdict {
                EXIT_OK
            } else {
                EXIT_VERDICT_FAILED
            }
        }
        Err(CliError::Usage(m)) => {
            let _ = writeln!(err, "error: {m}\n\n{USAGE}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn run_inner(args: &[String], out: &mut dyn Write) -> Result<commands::Outcome, CliError> {
    let cmd = parse_args(args).map_err(|e| CliError::Usage(e.0))?;
    let mut scenarios = Vec::with_capacity(cmd.scenarios.len());
    for path in &cmd.scenarios {
        scenarios.push((path.clone(), load(path, &cmd.overrides, cmd.seed)?));
    }
    let pool = thread_pool()?;
    // The report lines are short; they are collected inside the pool and
    // written once the command returns.
    let mut report = Vec::new();
    let outcome = pool.install(|| commands::execute(&cmd, &scenarios, &mut report));
    out.write_all(&report)
        .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))?;
    outcome
}

fn load(path: &PathBuf, overrides: &[(String, String)], seed: Option<u64>) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut s = parse_with_overrides(&text, overrides).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_VAR) {
        match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => b = b.num_threads(n),
            _ => return Err(CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got `{raw}`"))),
        }
    }
    b.build().map_err(|e| CliError::Runtime(format!("cannot start worker threads: {e}")))
}
