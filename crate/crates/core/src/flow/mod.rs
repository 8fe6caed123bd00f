//! The metric gradient flow on quiver-built lozenge algebras: integration,
//! monotonicity, King stability and asymptotic solutions.

mod asymptotic;
pub mod blocks;
mod integrator;
mod king;
mod model;
mod monotone;
mod projector;

pub use asymptotic::{
    asymptotic_fit, compressed_log_mean, construct_asymptotic_solution, degree_parts, flow_residual,
    greens_correction, phase_zero_part, power_law_fit, rescale_time, AsymptoticFit, AsymptoticOptions,
    AsymptoticSolution, GreensCorrection, PowerFit, Rescaled, ResidualCurve, StepFit, FD_REL,
    INTEGRABLE_EXPONENT, RESIDUAL_FLOOR,
};
pub use blocks::Blocks;
pub use integrator::{
    integrate_gauge, integrate_metric_flow, integrate_until, log_times, metric_sqrt, FlowOptions, MetricTrajectory,
};
pub use king::{
    flow_verdict, king_test, lattice_verdict, FlowVerdict, LatticeVerdict, Stability, StabilityVerdict,
    KING_GROWTH, KING_RESIDUAL, KING_T0, KING_T_MAX,
};
pub use model::{AlgebraModel, FlowModel, QuiverModel, HERMITIAN_TOL};
pub use monotone::{check_monotonicity, relative_spectrum, MonotonicityReport, MONOTONE_SLACK};
pub use projector::{projector_lattice, word_lattice, ProjectorLattice, MAX_WORD};
