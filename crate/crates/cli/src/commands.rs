use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use congested_crowd_core::analysis::{
    convergence_report, derivative_study, l1_contraction_report, lambda_for, positivity_study, refinement_levels,
    w2_contraction_report, ContractionReport, LambdaSource, CONVERGENCE_RATIO, L1_SLACK, W2_SLACK,
};
use congested_crowd_core::dynamics::{run, Trajectory};
use congested_crowd_core::pressure::{admissible_project, energy_check};
use congested_crowd_core::transport::{lp_transport, wasserstein_project_with_report};
use congested_crowd_core::{make_density, Error, Scenario};
use rayon::prelude::*;

use crate::args::{Command, Verb};
use crate::output::{field_csv, num, pgm, plan_csv, write_atomic, Table};
use crate::scenario_file::serialize_scenario;
use crate::CliError;

const LAMBDA_SAMPLES: usize = 20_000;
const POSITIVITY_INSTANCES: usize = 100;
const DERIVATIVE_INSTANCES: usize = 30;
const STUDY_LEVELS: usize = 4;
const CONVERGENCE_LEVELS: usize = 3;

/// `Some(verdict)` for the checking verbs.
pub type Outcome = Option<(bool, f64)>;

struct Writer<'a> {
    dir: &'a Path,
}

impl Writer<'_> {
    fn put(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes.as_ref()).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
    }
}

fn runtime(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), CliError> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))
}

pub fn execute(cmd: &Command, scenarios: &[(PathBuf, Scenario)], out: &mut dyn Write) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(&cmd.output)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", cmd.output.display())))?;
    let w = Writer { dir: &cmd.output };
    w.put("manifest.txt", manifest(cmd, scenarios)?)?;
    let s = &scenarios[0].1;
    match cmd.verb {
        Verb::Simulate => simulate(cmd, s, &w, out),
        Verb::Project => project(s, &w, out),
        Verb::ConeProject => cone_project(s, &w, out),
        Verb::ContractW2 | Verb::ContractL1 => contract(cmd, s, &scenarios[1].1, &w, out),
        Verb::VerifyLemmas => verify_lemmas(cmd, s, &w, out),
        Verb::Convergence => convergence(cmd, s, &w, out),
    }
}

fn manifest(cmd: &Command, scenarios: &[(PathBuf, Scenario)]) -> Result<String, CliError> {
    let mut s = format!("# congested-crowd {}\n", cmd.verb.name());
    let mut opts = Vec::new();
    if cmd.pgm {
        opts.push("pgm".to_string());
    }
    for (name, v) in [("lambda", cmd.lambda), ("slack", cmd.slack), ("ratio", cmd.ratio)] {
        if let Some(v) = v {
            opts.push(format!("{name}={}", num(v)));
        }
    }
    for (name, v) in [("samples", cmd.samples), ("instances", cmd.instances), ("levels", cmd.levels)] {
        if let Some(v) = v {
            opts.push(format!("{name}={v}"));
        }
    }
    if !opts.is_empty() {
        let _ = writeln!(s, "# options: {}", opts.join(" "));
    }
    for (path, scenario) in scenarios {
        let _ = writeln!(s, "# scenario: {}", path.display());
        s.push_str(&serialize_scenario(scenario).map_err(|e| CliError::Usage(e.to_string()))?);
    }
    Ok(s)
}

fn simulate(cmd: &Command, s: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let tr = run(s).map_err(runtime)?;
    for (k, f) in tr.frames.iter().enumerate() {
        w.put(&format!("frame_{k:06}.csv"), field_csv(&s.grid, f.time, f.density.values()))?;
        if cmd.pgm {
            w.put(&format!("frame_{k:06}.pgm"), pgm(&s.grid, f.density.values()))?;
        }
        if let Some(p) = &f.pressure {
            w.put(&format!("pressure_{k:06}.csv"), field_csv(&s.grid, f.time, p.values()))?;
        }
    }
    w.put("metrics.csv", metrics(&tr))?;
    // The scheme never forms a pressure; frames carry one reconstructed from
    // the drift by the cone projection.
    let mut frames = Table::new(&["frame", "step", "time", "mass", "max_density", "pressure", "pressure_converged"]);
    for (k, f) in tr.frames.iter().enumerate() {
        frames.row(&[
            k.to_string(),
            f.step.to_string(),
            num(f.time),
            num(f.density.mass()),
            num(f.density.max()),
            if f.pressure.is_some() { "reconstructed" } else { "none" }.to_string(),
            (f.pressure.is_some() && f.pressure_converged).to_string(),
        ]);
    }
    w.put("frames.csv", frames.into_string())?;
    say(
        out,
        format!(
            "simulate: {} steps, {} frames, max density {}, max mass drift {}, max cfl {}",
            tr.steps.len(),
            tr.frames.len(),
            num(tr.max_density()),
            num(tr.max_mass_drift()),
            num(tr.max_cfl())
        ),
    )?;
    if s.pressure {
        let converged = tr.frames.iter().filter(|f| f.pressure_converged).count();
        say(out, format!("pressure reconstructed at {} frames, {converged} converged", tr.frames.len()))?;
    }
    if let Some(slack) = tr.step_bound_slack() {
        say(out, format!("transport step bound: max slack {}", num(slack)))?;
    }
    Ok(None)
}

fn metrics(tr: &Trajectory) -> String {
    let mut t = Table::new(&[
        "step",
        "time",
        "mass",
        "mass_drift",
        "max_density",
        "cfl",
        "substeps",
        "transport_w2_sq",
        "transport_bound",
        "projection_cost",
    ]);
    for d in &tr.steps {
        t.row(&[
            d.step.to_string(),
            num(d.time),
            num(d.mass),
            num(d.mass_drift),
            num(d.max_density),
            num(d.cfl),
            d.substeps.to_string(),
            d.transport_w2_sq.map(num).unwrap_or_default(),
            num(d.transport_bound),
            num(d.projection_cost),
        ]);
    }
    t.into_string()
}

fn project(s: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let rho = make_density(&s.grid, &s.initial, s.seed).map_err(runtime)?;
    let r = wasserstein_project_with_report(&rho).map_err(runtime)?;
    w.put("input.csv", field_csv(&s.grid, 0.0, rho.values()))?;
    w.put("projection.csv", field_csv(&s.grid, 0.0, r.density.values()))?;
    say(
        out,
        format!(
            "project: W2^2 {}, max density {} -> {}, window {} cells, {} rounds",
            num(r.cost),
            num(rho.max()),
            num(r.density.max()),
            r.window,
            r.rounds
        ),
    )?;
    match lp_transport(&rho, &r.density, &s.tolerances) {
        Ok(t) => {
            w.put("plan.csv", plan_csv(&t.plan))?;
            w.put("phi.csv", field_csv(&s.grid, 0.0, &t.potentials.phi))?;
            w.put("psi.csv", field_csv(&s.grid, 0.0, &t.potentials.psi))?;
        }
        Err(Error::TooLarge { pairs, cap }) => {
            say(out, format!("plan not written: {pairs} support pairs exceed the cap of {cap}"))?;
        }
        Err(e) => return Err(runtime(e)),
    }
    Ok(None)
}

fn cone_project(s: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let rho = make_density(&s.grid, &s.initial, s.seed)
        .and_then(|r| wasserstein_project_with_report(&r))
        .map_err(runtime)?
        .density;
    let u = s.velocity.sample(&s.grid, 0.0).map_err(runtime)?;
    let r = admissible_project(&rho, &u, &s.tolerances).map_err(runtime)?;
    let e = energy_check(&r, &u, &s.tolerances);
    w.put("density.csv", field_csv(&s.grid, 0.0, rho.values()))?;
    w.put("pressure.csv", field_csv(&s.grid, 0.0, r.pressure.values()))?;
    let cells = r.velocity.cells();
    for (axis, name) in ["velocity_x.csv", "velocity_y.csv"].iter().enumerate().take(s.grid.dim()) {
        let v: Vec<f64> = cells.iter().map(|c| c[axis]).collect();
        w.put(name, field_csv(&s.grid, 0.0, &v))?;
    }
    let summary = format!(
        "{{\"converged\": {}, \"iterations\": {}, \"norm_u2\": {}, \"norm_grad_p2\": {}, \"norm_v2\": {}, \
         \"split_residual\": {}, \"orthogonality\": {}, \"cone_residual\": {}, \"complementarity\": {}, \"max_pressure\": {}}}",
        r.converged,
        r.iterations,
        num(e.norm_u2),
        num(e.norm_grad_p2),
        num(e.norm_v2),
        num(e.split_residual),
        num(r.orthogonality),
        num(r.cone_residual),
        num(r.complementarity),
        num(r.pressure.linf())
    );
    w.put("cone.json", format!("{summary}\n"))?;
    say(out, summary)?;
    Ok(None)
}

fn aligned(a: &Scenario, b: &Scenario) -> Result<(), CliError> {
    let same = a.grid == b.grid
        && a.tau == b.tau
        && a.horizon == b.horizon
        && a.frame_every == b.frame_every
        && a.order == b.order
        && a.velocity == b.velocity;
    if same {
        Ok(())
    } else {
        Err(CliError::Usage(
            "the two scenarios must share grid, velocity and solver.tau/horizon/nu/frame_every".into(),
        ))
    }
}

fn contract(cmd: &Command, a: &Scenario, b: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    aligned(a, b)?;
    let mut a = a.clone();
    let mut b = b.clone();
    a.pressure = false;
    b.pressure = false;
    let (ta, tb) = rayon::join(|| run(&a), || run(&b));
    let (ta, tb) = (ta.map_err(runtime)?, tb.map_err(runtime)?);
    let report = if cmd.verb == Verb::ContractW2 {
        let (lambda, source) = match cmd.lambda {
            Some(l) => (l, "given"),
            None => {
                let samples = cmd.samples.unwrap_or(LAMBDA_SAMPLES);
                let (l, src) = lambda_for(&a.velocity, &a.grid, samples, a.seed).map_err(runtime)?;
                (l, if src == LambdaSource::Analytic { "analytic" } else { "estimated" })
            }
        };
        say(out, format!("lambda {} ({source})", num(lambda)))?;
        w2_contraction_report(&ta, &tb, lambda, cmd.slack.unwrap_or(W2_SLACK), &a.tolerances).map_err(runtime)?
    } else {
        l1_contraction_report(&ta, &tb, cmd.slack.unwrap_or(L1_SLACK)).map_err(runtime)?
    };
    w.put("report.csv", contraction_table(&report))?;
    for (name, tr) in [("first", &ta), ("second", &tb)] {
        say(
            out,
            format!(
                "{name} run: max density {}, max mass drift {}",
                num(tr.max_density()),
                num(tr.max_mass_drift())
            ),
        )?;
    }
    say(
        out,
        format!(
            "distance {} -> {} over {} frames",
            num(report.distances[0]),
            num(*report.distances.last().expect("at least one frame")),
            report.times.len()
        ),
    )?;
    Ok(Some((report.verdict, report.max_slack)))
}

fn contraction_table(r: &ContractionReport) -> String {
    let mut t = Table::new(&["time", "distance", "bound", "slack"]);
    for k in 0..r.times.len() {
        t.row(&[num(r.times[k]), num(r.distances[k]), num(r.bounds[k]), num(r.slack[k])]);
    }
    t.into_string()
}

fn verify_lemmas(cmd: &Command, s: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let levels = cmd.levels.unwrap_or(STUDY_LEVELS);
    if levels < 3 {
        return Err(CliError::Usage("verify-lemmas needs --levels of at least 3".into()));
    }
    let tol = &s.tolerances;
    let (pos, der) = rayon::join(
        || positivity_study(&s.grid, levels, cmd.instances.unwrap_or(POSITIVITY_INSTANCES), s.seed, tol),
        || derivative_study(&s.grid, cmd.instances.unwrap_or(DERIVATIVE_INSTANCES), s.seed, tol),
    );
    let (pos, der) = (pos.map_err(runtime)?, der.map_err(runtime)?);

    let mut t = Table::new(&["level", "nx", "ny", "h", "instances", "negative", "band_constant", "band_width"]);
    for (k, l) in pos.levels.iter().enumerate() {
        let h = l.grid.spacing(0);
        t.row(&[
            k.to_string(),
            l.grid.nx().to_string(),
            l.grid.ny().to_string(),
            num(h),
            l.instances.to_string(),
            l.negative.to_string(),
            num(l.band_constant),
            num(l.band_constant * h),
        ]);
    }
    w.put("positivity.csv", t.into_string())?;
    let mut t = Table::new(&["instance", "lhs", "rhs", "gap", "band"]);
    for (k, r) in der.reports.iter().enumerate() {
        t.row(&[k.to_string(), num(r.lhs), num(r.rhs), num(r.gap), num(der.band)]);
    }
    w.put("derivative.csv", t.into_string())?;

    say(
        out,
        format!(
            "positivity: C = {} calibrated on the two coarsest levels; finer levels {} ({})",
            num(pos.calibrated),
            pos.levels[2..].iter().map(|l| num(l.band_constant)).collect::<Vec<_>>().join(", "),
            if pos.verdict { "within" } else { "outside" }
        ),
    )?;
    say(
        out,
        format!(
            "geodesic derivative: max gap {} against band {} over {} instances",
            num(der.max_gap),
            num(der.band),
            der.reports.len()
        ),
    )?;
    Ok(Some((pos.verdict && der.verdict, pos.max_slack.max(der.max_slack))))
}

fn convergence(cmd: &Command, s: &Scenario, w: &Writer, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let mut base = s.clone();
    // Only terminal densities are compared.
    base.pressure = false;
    base.step_distance = false;
    let levels = refinement_levels(&base, cmd.levels.unwrap_or(CONVERGENCE_LEVELS)).map_err(|e| CliError::Usage(e.to_string()))?;
    let finals = levels
        .par_iter()
        .map(|l| run(l).map(|tr| tr.final_density().clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let taus: Vec<f64> = levels.iter().map(|l| l.tau).collect();
    let r = convergence_report(&finals, &taus, cmd.ratio.unwrap_or(CONVERGENCE_RATIO)).map_err(runtime)?;
    let mut t = Table::new(&["level", "cells", "tau", "gap", "ratio"]);
    for k in 0..r.cells.len() {
        t.row(&[
            k.to_string(),
            r.cells[k].to_string(),
            num(taus[k]),
            r.gaps.get(k).copied().map(num).unwrap_or_default(),
            r.ratios.get(k).copied().map(num).unwrap_or_default(),
        ]);
    }
    w.put("convergence.csv", t.into_string())?;
    say(
        out,
        format!(
            "gaps {} ratios {} (required {})",
            r.gaps.iter().map(|g| num(*g)).collect::<Vec<_>>().join(", "),
            r.ratios.iter().map(|g| num(*g)).collect::<Vec<_>>().join(", "),
            num(r.required_ratio)
        ),
    )?;
    Ok(Some((r.verdict, r.max_slack)))
}
