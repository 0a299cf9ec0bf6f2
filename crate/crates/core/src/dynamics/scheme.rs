use alloc::vec::Vec;

use super::{advect, diffuse, AdvectStats};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::field::{DensityField, PressureField, VelocityField};
use crate::grid::Grid;
use crate::preset::{make_density, VelocityPreset};
use crate::pressure::admissible_project;
use crate::scenario::{Order, Scenario};
use crate::transport::{w2_cell_average_1d, wasserstein_project_with_report};

/// One recorded state.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Number of steps taken to reach this frame.
    pub step: usize,
    pub time: f64,
    pub density: DensityField,
    /// Reconstructed by projecting the drift at this time onto the admissible
    /// cone of `density`. The scheme itself never forms a pressure.
    pub pressure: Option<PressureField>,
    pub pressure_converged: bool,
}

/// Per-step bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// 1-based step number.
    pub step: usize,
    /// Time at the end of the step.
    pub time: f64,
    pub mass: f64,
    /// `|mass − mass(ρ₀)|`.
    pub mass_drift: f64,
    pub max_density: f64,
    pub cfl: f64,
    pub substeps: usize,
    /// `W₂²` between the density before and after the transport sub-step
    /// (piecewise-constant densities, 1D only).
    pub transport_w2_sq: Option<f64>,
    /// `τ² sup|u|²`, the bound for `transport_w2_sq`.
    pub transport_bound: f64,
    /// `W₂²` moved by the projection.
    pub projection_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub order: Order,
    pub tau: f64,
    pub frames: Vec<Frame>,
    pub steps: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.time).collect()
    }

    pub fn final_density(&self) -> &DensityField {
        &self.frames.last().expect("trajectories have an initial frame").density
    }

    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.frames[0].density.mass();
        self.frames
            .iter()
            .map(|f| (f.density.mass() - m0).abs())
            .chain(self.steps.iter().map(|s| s.mass_drift))
            .fold(0.0, f64::max)
    }

    pub fn max_density(&self) -> f64 {
        self.frames
            .iter()
            .map(|f| f.density.max())
            .chain(self.steps.iter().map(|s| s.max_density))
            .fold(0.0, f64::max)
    }

    pub fn max_cfl(&self) -> f64 {
        self.steps.iter().map(|s| s.cfl).fold(0.0, f64::max)
    }

    /// `max (W₂² / bound) − 1` over steps where the distance was measured.
    pub fn step_bound_slack(&self) -> Option<f64> {
        self.steps
            .iter()
            .filter_map(|s| {
                let d = s.transport_w2_sq?;
                Some(if s.transport_bound > 0.0 {
                    d / s.transport_bound - 1.0
                } else if d == 0.0 {
                    -1.0
                } else {
                    f64::INFINITY
                })
            })
            .reduce(f64::max)
    }
}

/// Result of one composite step before the pressure is reconstructed.
struct StepParts {
    transported: DensityField,
    stats: AdvectStats,
    density: DensityField,
    projection_cost: f64,
}

fn composite_step(rho: &DensityField, u: &VelocityField, tau: f64, order: Order, tol: &Tolerances) -> Result<StepParts> {
    let (transported, stats) = advect(rho, u, tau, tol.cfl)?;
    let before_projection = match order {
        Order::First => transported.clone(),
        Order::Second => diffuse(&transported, tau)?,
    };
    let projected = wasserstein_project_with_report(&before_projection)?;
    Ok(StepParts {
        transported,
        stats,
        density: projected.density,
        projection_cost: projected.cost,
    })
}

fn split_step(
    rho: &DensityField,
    u: &VelocityPreset,
    t: f64,
    tau: f64,
    order: Order,
    tol: &Tolerances,
) -> Result<(DensityField, PressureField)> {
    if !rho.is_feasible(tol.constraint) {
        return Err(Error::invalid("split step needs a feasible density"));
    }
    let field = u.sample(rho.grid(), t)?;
    let parts = composite_step(rho, &field, tau, order, tol)?;
    let cone = admissible_project(&parts.density, &field, tol)?;
    Ok((parts.density, cone.pressure))
}

/// `ρ' = 𝒫(advect(ρ, u(t), τ))`, with the pressure reconstructed on `ρ'`.
pub fn split_step_first_order(
    rho: &DensityField,
    u: &VelocityPreset,
    t: f64,
    tau: f64,
    tol: &Tolerances,
) -> Result<(DensityField, PressureField)> {
    split_step(rho, u, t, tau, Order::First, tol)
}

/// `ρ' = 𝒫(diffuse(advect(ρ, u(t), τ), τ))`, with the pressure reconstructed
/// on `ρ'`.
pub fn split_step_second_order(
    rho: &DensityField,
    u: &VelocityPreset,
    t: f64,
    tau: f64,
    tol: &Tolerances,
) -> Result<(DensityField, PressureField)> {
    split_step(rho, u, t, tau, Order::Second, tol)
}

/// Runs the scheme from `ρ₀ = 𝒫(initial preset)` to the horizon.
///
/// The drift is sampled at the start of each step. Errors carry the number
/// of the failing step.
pub fn run(scenario: &Scenario) -> Result<Trajectory> {
    scenario.validate()?;
    let tol = &scenario.tolerances;
    let grid = scenario.grid;
    let initial = make_density(&grid, &scenario.initial, scenario.seed)?;
    let rho0 = wasserstein_project_with_report(&initial).map_err(|e| e.at_step(0))?.density;
    let mass0 = rho0.mass();

    let frame = |step: usize, time: f64, density: DensityField| -> Result<Frame> {
        let (pressure, pressure_converged) = if scenario.pressure {
            let u = scenario.velocity.sample(&grid, time)?;
            let cone = admissible_project(&density, &u, tol)?;
            (Some(cone.pressure), cone.converged)
        } else {
            (None, false)
        };
        Ok(Frame {
            step,
            time,
            density,
            pressure,
            pressure_converged,
        })
    };

    let mut frames = alloc::vec![frame(0, 0.0, rho0.clone()).map_err(|e| e.at_step(0))?];
    let mut steps = Vec::new();
    let mut rho = rho0;
    let total = scenario.steps();
    for n in 0..total {
        let t = scenario.step_start(n);
        let tau = scenario.step_length(n);
        let step_result = (|| -> Result<(StepParts, VelocityField)> {
            let u = scenario.velocity.sample(&grid, t)?;
            Ok((composite_step(&rho, &u, tau, scenario.order, tol)?, u))
        })();
        let (parts, u) = step_result.map_err(|e| e.at_step(n + 1))?;
        let sup_u = u.linf().max(u.face_linf());
        let transport_w2_sq = if scenario.step_distance && grid.dim() == 1 {
            let d = w2_cell_average_1d(&rho, &parts.transported).map_err(|e| e.at_step(n + 1))?;
            Some(d * d)
        } else {
            None
        };
        let mass = parts.density.mass();
        steps.push(StepDiagnostics {
            step: n + 1,
            time: t + tau,
            mass,
            mass_drift: (mass - mass0).abs(),
            max_density: parts.density.max(),
            cfl: parts.stats.cfl,
            substeps: parts.stats.substeps,
            transport_w2_sq,
            transport_bound: tau * tau * sup_u * sup_u,
            projection_cost: parts.projection_cost,
        });
        rho = parts.density;
        if (n + 1) % scenario.frame_every == 0 || n + 1 == total {
            let time = if n + 1 == total { scenario.horizon } else { t + tau };
            frames.push(frame(n + 1, time, rho.clone()).map_err(|e| e.at_step(n + 1))?);
        }
    }
    Ok(Trajectory {
        grid,
        order: scenario.order,
        tau: scenario.tau,
        frames,
        steps,
    })
}
