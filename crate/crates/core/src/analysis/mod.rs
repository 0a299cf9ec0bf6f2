//! Checks of the contraction and projection properties on solver output.

mod contraction;
mod convergence;
mod lambda;
mod checks;
mod study;

pub use contraction::{
    l1_contraction_report, w2_contraction_report, ContractionMode, ContractionReport, L1_SLACK, W2_SLACK,
};
pub use convergence::{convergence_report, refinement_levels, restrict, ConvergenceReport, CONVERGENCE_RATIO};
pub use lambda::{estimate_lambda, exhaustive_lambda, lambda_for, LambdaSource};
pub use checks::{
    random_density, random_feasible_density, random_smooth_density, random_smooth_pressure, verify_geodesic_derivative, verify_positivity,
    GeodesicDerivativeReport, PositivityReport, DERIVATIVE_STEPS,
};
pub use study::{derivative_study, positivity_study, BandLevel, DerivativeStudy, PositivityStudy};
