//! Meshless finite-difference discretizations of differential operators on
//! scattered 2D node sets, with two weight-generation back ends:
//!
//! - classic RBF-FD: differentiate a local polyharmonic-spline interpolant,
//! - a hybrid scheme: place a classical finite-difference stencil at each
//!   node ("virtual" stencil) and supply its off-node values by local RBF
//!   interpolation.
//!
//! The crate also ships a Dirichlet Poisson solver (BiCGSTAB with an ILUT
//! preconditioner) and a benchmark harness that compares accuracy and
//! two-phase runtime of the methods over the virtual-stencil spacing.

pub mod bench;
pub mod error;
pub mod hybrid;
pub mod nodes;
pub mod rbf;
pub mod rbf_fd;
pub mod solver;
pub mod sparse;

pub use error::{Error, Result};
pub use hybrid::{HybridWeights, StencilKind, Variant, VirtualStencil};
pub use nodes::{NodeSet, Point2, Stencil};
pub use rbf::{LocalSystem, RbfConfig};
pub use rbf_fd::{Operator, OperatorWeights};
pub use solver::{IlutParams, SolveReport, SolverParams};
pub use sparse::{CsrMatrix, SparseSystem};
