//! Transport and diffusion steps, the splitting schemes and the weak-form
//! residual.

mod advect;
mod diffuse;
mod scheme;
mod weak;

pub use advect::{advect, AdvectStats};
pub use diffuse::diffuse;
pub use scheme::{run, split_step_first_order, split_step_second_order, Frame, StepDiagnostics, Trajectory};
pub use weak::{weak_residual, TestFunction, WeakResidualEntry, WeakResidualReport};
