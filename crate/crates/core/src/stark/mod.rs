//! Analytic propagator for the Stark problem in parabolic coordinates.

mod branch;
mod context;
mod cubic;
mod model;

pub use branch::{is_stationary, Branch, BranchSummary, EllipticBranch, SValue, StationaryBranch, IMAG_RESIDUE_TOL};
pub use context::{propagate, ContextSummary, PropagationContext, Sample};
pub use cubic::{reachable_root, Coordinate, CubicPoly};
pub use model::{
    cartesian_to_parabolic, hamiltonian, motion_constants, parabolic_to_cartesian, CartesianState,
    MotionConstants, ParabolicState, StarkModel,
};
