//! A small dense semidefinite programming solver.
//!
//! Problems are posed in the standard primal form
//! `maximize tr(C X) s.t. tr(A_k X) = b_k, X ⪰ 0` and solved with an
//! infeasible-start primal-dual interior-point method. The reported value is
//! the dual objective, which bounds the maximum from above once the dual
//! residual vanishes.

mod error;
mod problem;
mod solver;
mod theta;

pub use error::SdpError;
pub use problem::{Constraint, SdpProblem, SymMatrix};
pub use solver::{dual_slack, evaluate, solve, SdpOptions, SdpSolution, SdpStatus};
pub use theta::{theta_program, theta_sdp, theta_sdp_min, theta_sdp_unweighted, ThetaForm, ThetaProgram};

pub use nalgebra::{DMatrix, DVector};
