//! Finite modular lattices: K-classes, polarizations, Harder–Narasimhan and
//! weight filtrations, and the ideal lattices of directed graphs.

mod cycle;
mod filtration;
mod graph;
mod kclass;
mod order;
mod polarized;
pub mod qp;
mod weight;

pub use cycle::{
    d1, d2, wall1_point, wall2_point, walls_5cycle, Chamber, OrientedCycleGraph, WallReport,
    FIG1_EPS, WALL_TOL,
};
pub use filtration::{IteratedLabel, RFiltration, LABEL_TOL};
pub use graph::{build_ideal_lattice, closed_subsets, DirectedGraph, IdealLattice};
pub use kclass::{KClass, KClasses};
pub use order::{FiniteLattice, MAX_ELEMENTS};
pub use polarized::{phase, HnFiltration, PolarizedLattice, Polarization, PHASE_TOL};
pub use weight::{
    associated_lattice, certify_weight_filtration, is_phase_zero_semistable,
    iterated_weight_filtration, phase_zero_sublattice, weight_filtration, AssociatedLattice,
    IteratedFiltration, MAX_CHAINS, MAX_DEPTH,
};
