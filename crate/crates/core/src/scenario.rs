use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::math;
use crate::preset::{DensityPreset, VelocityPreset};

/// `First` is pure transport plus projection; `Second` adds a unit diffusion
/// step before projecting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    First,
    Second,
}

impl Order {
    pub fn from_nu(nu: u8) -> Result<Self> {
        match nu {
            0 => Ok(Order::First),
            1 => Ok(Order::Second),
            _ => Err(Error::invalid(alloc::format!("order {nu} not in {{0, 1}}"))),
        }
    }

    pub fn nu(self) -> u8 {
        match self {
            Order::First => 0,
            Order::Second => 1,
        }
    }
}

/// Everything `run` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub grid: Grid,
    pub initial: DensityPreset,
    pub velocity: VelocityPreset,
    pub order: Order,
    /// Final time `T`.
    pub horizon: f64,
    /// Step `τ`.
    pub tau: f64,
    /// Record a frame every this many steps (the last step is always recorded).
    pub frame_every: usize,
    /// Reconstruct a pressure for each recorded frame.
    pub pressure: bool,
    /// Measure `W₂²` of every transport sub-step (1D only).
    pub step_distance: bool,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Scenario {
    /// Scenario with default solver options.
    pub fn new(grid: Grid, initial: DensityPreset, velocity: VelocityPreset, order: Order, horizon: f64, tau: f64) -> Self {
        Self {
            grid,
            initial,
            velocity,
            order,
            horizon,
            tau,
            frame_every: 1,
            pressure: true,
            step_distance: false,
            tolerances: Tolerances::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("tau must be positive"));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.tau * (1.0 - 1e-12)) {
            return Err(Error::invalid("horizon must be at least tau"));
        }
        if self.frame_every == 0 {
            return Err(Error::invalid("frame_every must be at least 1"));
        }
        self.velocity.validate()
    }

    /// Number of steps; the last one is shortened to land on the horizon.
    pub fn steps(&self) -> usize {
        (math::ceil(self.horizon / self.tau - 1e-9) as usize).max(1)
    }

    /// Length of step `n` (0-based).
    pub fn step_length(&self, n: usize) -> f64 {
        let steps = self.steps();
        if n + 1 < steps {
            self.tau
        } else {
            self.horizon - (steps - 1) as f64 * self.tau
        }
    }

    /// Start time of step `n`.
    pub fn step_start(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_count() {
        let g = Grid::line(2.0, 16).unwrap();
        let mut s = Scenario::new(g, DensityPreset::Uniform, VelocityPreset::Zero, Order::First, 1.0, 1e-3);
        assert_eq!(s.steps(), 1000);
        assert!((s.step_length(999) - 1e-3).abs() < 1e-12);
        s.horizon = 0.0105;
        s.tau = 0.001;
        assert_eq!(s.steps(), 11);
        assert!((s.step_length(10) - 0.0005).abs() < 1e-12);
        s.horizon = 0.0;
        assert!(s.validate().is_err());
        assert!(Order::from_nu(2).is_err());
    }
}
