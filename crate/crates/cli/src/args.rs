//! Command-line grammar:
//!
//! ```text
//! congested-crowd <verb> <scenario>... [-o DIR] [--seed=N] [--option=value ...] [--section.key=value ...]
//! ```
//!
//! Dotted options override scenario keys; the others are verb options.

use std::fmt;
use std::path::PathBuf;

use crate::scenario_file::MAX_SEED;

pub const USAGE: &str = "\
usage: congested-crowd <verb> <scenario>... [-o DIR] [--seed=N] [options] [--section.key=value ...]

verbs:
  simulate       SCENARIO            run the scheme, write frames and metrics
  project        SCENARIO            Wasserstein projection of the initial density
  cone-project   SCENARIO            admissible-cone projection of the initial drift
  contract-w2    SCENARIO SCENARIO   W2 contraction between two runs
  contract-l1    SCENARIO SCENARIO   L1 contraction between two runs
  verify-lemmas  SCENARIO            positivity and geodesic-derivative studies
  convergence    SCENARIO            self-convergence under halving of h and tau

options:
  -o DIR, --output=DIR   output directory (default: out)
  --seed=N               overrides solver.seed
  --pgm                  also write frames as PGM images (simulate)
  --lambda=X             contraction rate (contract-w2; default: from the drift)
  --samples=N            sample pairs for estimating lambda (contract-w2; default 20000)
  --slack=X              relative slack (contract-w2 0.10, contract-l1 0.05)
  --instances=N          random instances per study (verify-lemmas; default 100
                         for positivity, 30 for the derivative)
  --levels=N             resolution levels (verify-lemmas 4, convergence 3)
  --ratio=X              required gap ratio (convergence; default 1.5)
  --section.key=value    set a scenario key, e.g. --solver.tau=0.0005

exit status: 0 success, 1 verdict failed, 2 usage or scenario error, 3 runtime error";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    Simulate,
    Project,
    ConeProject,
    ContractW2,
    ContractL1,
    VerifyLemmas,
    Convergence,
}

impl Verb {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simulate" => Verb::Simulate,
            "project" => Verb::Project,
            "cone-project" => Verb::ConeProject,
            "contract-w2" => Verb::ContractW2,
            "contract-l1" => Verb::ContractL1,
            "verify-lemmas" => Verb::VerifyLemmas,
            "convergence" => Verb::Convergence,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Verb::Simulate => "simulate",
            Verb::Project => "project",
            Verb::ConeProject => "cone-project",
            Verb::ContractW2 => "contract-w2",
            Verb::ContractL1 => "contract-l1",
            Verb::VerifyLemmas => "verify-lemmas",
            Verb::Convergence => "convergence",
        }
    }

    fn scenario_count(self) -> usize {
        match self {
            Verb::ContractW2 | Verb::ContractL1 => 2,
            _ => 1,
        }
    }

    fn accepts(self, option: &str) -> bool {
        matches!(
            (self, option),
            (Verb::Simulate, "pgm")
                | (Verb::ContractW2, "lambda" | "samples" | "slack")
                | (Verb::ContractL1, "slack")
                | (Verb::VerifyLemmas, "instances" | "levels")
                | (Verb::Convergence, "levels" | "ratio")
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub verb: Verb,
    pub scenarios: Vec<PathBuf>,
    pub output: PathBuf,
    pub seed: Option<u64>,
    /// `(section.key, raw value)` in command-line order.
    pub overrides: Vec<(String, String)>,
    pub pgm: bool,
    pub lambda: Option<f64>,
    pub samples: Option<usize>,
    pub slack: Option<f64>,
    pub instances: Option<usize>,
    pub levels: Option<usize>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn number<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T, UsageError> {
    raw.parse().map_err(|_| usage(format!("--{name}: cannot parse `{raw}`")))
}

fn positive(name: &str, raw: &str) -> Result<f64, UsageError> {
    let x: f64 = number(name, raw)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(usage(format!("--{name} must be positive")))
    }
}

fn seed(raw: &str) -> Result<u64, UsageError> {
    match number("seed", raw)? {
        n if n <= MAX_SEED => Ok(n),
        _ => Err(usage(format!("--seed must be at most {MAX_SEED}"))),
    }
}

fn count(name: &str, raw: &str) -> Result<usize, UsageError> {
    match number(name, raw)? {
        0 => Err(usage(format!("--{name} must be at least 1"))),
        n => Ok(n),
    }
}

pub fn parse_args(args: &[String]) -> Result<Command, UsageError> {
    let mut it = args.iter();
    let verb_name = it.next().ok_or_else(|| usage("missing verb"))?;
    let verb = Verb::parse(verb_name).ok_or_else(|| usage(format!("unknown verb `{verb_name}`")))?;
    let mut cmd = Command {
        verb,
        scenarios: Vec::new(),
        output: PathBuf::from("out"),
        seed: None,
        overrides: Vec::new(),
        pgm: false,
        lambda: None,
        samples: None,
        slack: None,
        instances: None,
        levels: None,
        ratio: None,
    };
    while let Some(arg) = it.next() {
        if arg == "-o" {
            let dir = it.next().ok_or_else(|| usage("-o needs a directory"))?;
            cmd.output = PathBuf::from(dir);
            continue;
        }
        let Some(opt) = arg.strip_prefix("--") else {
            if arg.starts_with('-') && arg.len() > 1 {
                return Err(usage(format!("unknown option `{arg}`")));
            }
            cmd.scenarios.push(PathBuf::from(arg));
            continue;
        };
        let (name, value) = match opt.split_once('=') {
            Some((n, v)) => (n, Some(v)),
            None => (opt, None),
        };
        if name.contains('.') {
            let value = value.ok_or_else(|| usage(format!("--{name} needs a value")))?;
            cmd.overrides.push((name.to_string(), value.to_string()));
            continue;
        }
        match (name, value) {
            ("output", Some(v)) => cmd.output = PathBuf::from(v),
            ("seed", Some(v)) => cmd.seed = Some(seed(v)?),
            ("pgm", None) if verb.accepts(name) => cmd.pgm = true,
            ("pgm", Some(v)) if verb.accepts(name) => cmd.pgm = number("pgm", v)?,
            ("lambda", Some(v)) if verb.accepts(name) => cmd.lambda = Some(number("lambda", v)?),
            ("samples", Some(v)) if verb.accepts(name) => cmd.samples = Some(count(name, v)?),
            ("slack", Some(v)) if verb.accepts(name) => cmd.slack = Some(positive(name, v)?),
            ("instances", Some(v)) if verb.accepts(name) => cmd.instances = Some(count(name, v)?),
            ("levels", Some(v)) if verb.accepts(name) => cmd.levels = Some(count(name, v)?),
            ("ratio", Some(v)) if verb.accepts(name) => cmd.ratio = Some(positive(name, v)?),
            ("output" | "seed" | "lambda" | "samples" | "slack" | "instances" | "levels" | "ratio", None) => {
                return Err(usage(format!("--{name} needs a value")));
            }
            _ => return Err(usage(format!("option --{name} does not apply to {}", verb.name()))),
        }
    }
    let want = verb.scenario_count();
    if cmd.scenarios.len() != want {
        return Err(usage(format!(
            "{} takes {want} scenario file{}, got {}",
            verb.name(),
            if want == 1 { "" } else { "s" },
            cmd.scenarios.len()
        )));
    }
    Ok(cmd)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn full_command_line() {
        let c = parse_args(&args("contract-w2 a.toml b.toml -o res --seed=4 --lambda=-1 --solver.tau=0.002")).unwrap();
        assert_eq!(c.verb, Verb::ContractW2);
        assert_eq!(c.scenarios, vec![PathBuf::from("a.toml"), PathBuf::from("b.toml")]);
        assert_eq!(c.output, PathBuf::from("res"));
        assert_eq!(c.seed, Some(4));
        assert_eq!(c.lambda, Some(-1.0));
        assert_eq!(c.overrides, vec![("solver.tau".to_string(), "0.002".to_string())]);
    }

    #[test]
    fn defaults() {
        let c = parse_args(&args("simulate s.toml")).unwrap();
        assert_eq!(c.output, PathBuf::from("out"));
        assert!(!c.pgm && c.seed.is_none() && c.overrides.is_empty());
        assert!(parse_args(&args("simulate s.toml --pgm")).unwrap().pgm);
    }

    #[test]
    fn usage_errors() {
        for bad in [
            "",
            "fly s.toml",
            "simulate",
            "simulate a.toml b.toml",
            "contract-l1 a.toml",
            "simulate s.toml --lambda=1",
            "simulate s.toml --seed=x",
            "simulate s.toml --seed=9223372036854775808",
            "simulate s.toml -o",
            "simulate s.toml -x",
            "convergence s.toml --ratio=0",
            "verify-lemmas s.toml --instances=0",
            "simulate s.toml --solver.tau",
        ] {
            assert!(parse_args(&args(bad)).is_err(), "{bad}");
        }
    }
}
