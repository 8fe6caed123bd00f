//! The curve flow `∂_t f = ρ(x, f) ∂_xx f` on a punctured cylinder and its
//! reduction to the ODE for `y_i = |f(x_i)|/π`.
//!
//! Indexing: punctures `p_0 < … < p_{n−1}`; segment `k` ends at `p_k` and has
//! length `m[k]`; puncture `k` is arrow `k` of the cycle graph, between segments
//! `k` and `k+1`. The reduced system is integrated in `v_k = log(t y_k)`,
//! `s = log t` (see `docs/v-coordinates.md`).

mod ansatz;
mod compare;
mod cylinder;
mod grid;
mod ode;
mod pde;
mod walls;

pub use ansatz::{
    ansatz_functions, ddphi, dphi, dynamic_check, fit_ansatz, fit_puncture, fit_segment, phi, AnsatzCoeffs,
    AnsatzFit, DynamicCheck, FitWindows, SegmentFunctions, FIT_THRESHOLD,
};
pub use compare::{compare_pde_ode, CompareOptions, ComparisonReport, DRIFT_TOL, HANDOFF_Y};
pub use cylinder::{build_cylinder, dist_per, fig1_cylinder, CylinderConfig, FIG1_L, FIG1_PUNCTURES};
pub use grid::{build_grid, Grid, GridOptions};
pub use ode::{
    coefficient_matrix, fixed_point, integrate_ode, integrate_v, interior_fixed_point, v_rhs, OdeTrajectory,
    ODE_ATOL, ODE_RTOL, V_BLOWUP,
};
pub use pde::{
    extract_y, fig1_curve, integrate_pde, l2_norm, solve_cyclic, stencil, CurveState, InitialCurve, PdeOptions,
    PdeTrajectory, SignFlip, YSeries,
};
pub use walls::{predict, wall_asymptotics, DriftReport, Prediction, WallOptions, KAPPA_TOL};
