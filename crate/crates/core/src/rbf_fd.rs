//! RBF-FD weight generation.
//!
//! Differentiating the local RBF interpolant of [`crate::rbf`] turns a
//! linear operator `L` into a finite-difference-like weight row `w` over the
//! stencil nodes: `(L u)(at) ~ sum_i w_i u(x_i)`. The weights solve the same
//! saddle-point system with right-hand side `[(L phi_i)(at); (L p_j)(at)]`,
//! so one stored LU factorization serves any number of operators and
//! evaluation points on a stencil.

use rayon::prelude::*;

use crate::error::Result;
use crate::nodes::{NodeSet, Point2};
use crate::rbf::{
    build_local_system, monomial_basis, monomial_laplacian, phs_eval, phs_laplacian, LocalSystem,
    RbfConfig,
};

use nalgebra::DVector;

/// Linear operator to discretize.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operator {
    /// Point evaluation; turns the weight row into interpolation weights.
    Identity,
    /// The 2D Laplacian.
    Laplacian,
}

impl Operator {
    /// Action on the radial profile `phi(r) = r^k`.
    pub fn radial(self, phs_order: u32, r: f64) -> f64 {
        match self {
            Operator::Identity => phs_eval(phs_order, r),
            Operator::Laplacian => phs_laplacian(phs_order, r),
        }
    }

    /// Action on the monomial basis of the given degree.
    pub fn monomials(self, degree: u32, p: Point2) -> Vec<f64> {
        match self {
            Operator::Identity => monomial_basis(degree, p),
            Operator::Laplacian => monomial_laplacian(degree, p),
        }
    }

    /// Correction that undoes the stencil normalization: weights computed in
    /// coordinates divided by `scale` pick up `scale^-2` for the Laplacian
    /// (chain rule) and nothing for point evaluation.
    fn unscale(self, scale: f64) -> f64 {
        match self {
            Operator::Identity => 1.0,
            Operator::Laplacian => 1.0 / (scale * scale),
        }
    }
}

/// A sparse weight row discretizing an operator at one node.
#[derive(Clone, Debug)]
pub struct OperatorWeights {
    /// Node the operator is approximated at.
    pub center: usize,
    /// Stencil node indices, aligned with `weights`.
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
}

/// Computes the weight row for `op` at `at` from a factorized local system.
///
/// `at` is usually the stencil center but may be any finite point; the
/// hybrid scheme evaluates identity weights at off-node positions.
pub fn rbf_fd_weights(sys: &LocalSystem, op: Operator, at: Point2) -> Result<OperatorWeights> {
    assert!(at.is_finite(), "evaluation point must be finite");
    let n = sys.stencil_size();
    let cfg = sys.config();
    let local_at = sys.to_local(at);

    let mut rhs = DVector::zeros(sys.matrix().nrows());
    for (i, &pt) in sys.local_points().iter().enumerate() {
        rhs[i] = op.radial(cfg.phs_order(), local_at.dist(pt));
    }
    for (j, v) in op.monomials(cfg.degree(), local_at).into_iter().enumerate() {
        rhs[n + j] = v;
    }

    let sol = sys.solve(rhs)?;
    let correction = op.unscale(sys.scale());
    // Lagrange-multiplier entries beyond n are discarded.
    let weights = sol.as_slice()[..n].iter().map(|w| w * correction).collect();
    Ok(OperatorWeights {
        center: sys.center_node(),
        neighbors: sys.neighbors().to_vec(),
        weights,
    })
}

/// Builds one Laplacian (or identity) weight row per interior node, each on
/// its own k-nearest stencil, evaluated at the node itself.
///
/// Per-node work is independent and runs in parallel; results are returned
/// in interior-node order and do not depend on scheduling.
pub fn assemble_all_weights(
    nodes: &NodeSet,
    cfg: &RbfConfig,
    op: Operator,
) -> Result<Vec<OperatorWeights>> {
    nodes
        .interior_indices()
        .into_par_iter()
        .map(|center| {
            let stencil = nodes.knn_stencil(center, cfg.stencil_size())?;
            let sys = build_local_system(nodes, &stencil, cfg)?;
            rbf_fd_weights(&sys, op, nodes.point(center))
        })
        .collect()
}
