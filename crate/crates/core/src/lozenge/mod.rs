//! Finite-dimensional lozenge algebras built from quiver representations.

mod algebra;
mod elem;
mod gauge;
mod quiver;

pub use algebra::{
    op_norm, Adjoints, AxiomCheck, AxiomReport, Hodge, Laplacians, LozengeAlgebra, KERNEL_TOL,
};
pub use elem::{component_degree, from_coords, mul, supercomm, to_coords, CMat, CVec, Elem, Layout, C, COMPONENTS, I};
pub use gauge::{curvature, exp_hermitian, gauge_act, herm_fn, hermitian_curvature, inverse_a0};
pub use quiver::{Arrow, QuiverData, Vertex};
