//! Hybrid operator discretization: classical finite-difference stencils on
//! scattered nodes.
//!
//! A "virtual" FD stencil (offsets `D_i`, weights `a_i`) is placed at each
//! node. Its off-node values are supplied by identity-operator RBF-FD rows,
//! so the combined row over the real nodes is
//!
//! ```text
//! w_j = sum_i a_i * w_ij,     u(x + D_i) ~ sum_j w_ij u(x_j).
//! ```
//!
//! In the shared variant all interpolations use the stencil of the center
//! node, so one LU factorization serves every offset; the zero offset needs
//! no interpolation at all and contributes its FD weight at the center
//! directly. The alternative variant instead searches a fresh stencil around
//! each displaced position, which buys nothing in accuracy (the benchmark
//! reproduces this) and forfeits the factorization reuse.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nodes::{NodeSet, Point2, Stencil};
use crate::rbf::{build_local_system, RbfConfig};
use crate::rbf_fd::{rbf_fd_weights, Operator};

/// Classical Laplacian stencils supported as virtual stencils.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StencilKind {
    /// Second-order five-point cross; exact on cubics.
    FivePoint,
    /// Fourth-order nine-point cross; exact on quintics.
    NinePoint,
}

/// Unit offsets shared by both stencils; the five-point stencil uses the
/// first five. The zero offset always comes first.
const UNIT_OFFSETS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (1.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, -1.0),
    (2.0, 0.0),
    (-2.0, 0.0),
    (0.0, 2.0),
    (0.0, -2.0),
];

/// Stencil weights scaled by `delta^2`, as exact integer fractions so the
/// zero-sum identity holds without rounding.
const FIVE_POINT_SCALED: ([i64; 5], i64) = ([-4, 1, 1, 1, 1], 1);
const NINE_POINT_SCALED: ([i64; 9], i64) = ([-60, 16, 16, 16, 16, -1, -1, -1, -1], 12);

/// A finite-difference stencil of displacement vectors and weights with
/// spacing `delta = sigma * h`.
#[derive(Clone, Debug)]
pub struct VirtualStencil {
    kind: StencilKind,
    offsets: Vec<Point2>,
    fd_weights: Vec<f64>,
    scaled_numer: Vec<i64>,
    scaled_denom: i64,
    delta: f64,
    sigma: f64,
}

impl VirtualStencil {
    pub fn kind(&self) -> StencilKind {
        self.kind
    }

    pub fn point_count(&self) -> usize {
        self.offsets.len()
    }

    /// Displacement vectors, zero offset first.
    pub fn offsets(&self) -> &[Point2] {
        &self.offsets
    }

    /// Weights `a_i` (the scaled table entries divided by `delta^2`).
    pub fn fd_weights(&self) -> &[f64] {
        &self.fd_weights
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// The scaled weight `delta^2 * a_i`.
    pub fn scaled_weight(&self, i: usize) -> f64 {
        self.scaled_numer[i] as f64 / self.scaled_denom as f64
    }

    /// Scaled weights as exact integer numerators over a common denominator.
    pub fn scaled_fraction(&self) -> (&[i64], i64) {
        (&self.scaled_numer, self.scaled_denom)
    }
}

/// Builds the virtual stencil for spacing `delta = sigma * h`.
pub fn make_virtual_stencil(kind: StencilKind, sigma: f64, h: f64) -> Result<VirtualStencil> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spacing must be positive, got {h}"
        )));
    }
    let delta = sigma * h;
    let (numer, denom): (&[i64], i64) = match kind {
        StencilKind::FivePoint => (&FIVE_POINT_SCALED.0, FIVE_POINT_SCALED.1),
        StencilKind::NinePoint => (&NINE_POINT_SCALED.0, NINE_POINT_SCALED.1),
    };
    let offsets: Vec<Point2> = UNIT_OFFSETS[..numer.len()]
        .iter()
        .map(|&(ux, uy)| Point2::new(ux * delta, uy * delta))
        .collect();
    let fd_weights: Vec<f64> = numer
        .iter()
        .map(|&q| (q as f64 / denom as f64) / (delta * delta))
        .collect();
    Ok(VirtualStencil {
        kind,
        offsets,
        fd_weights,
        scaled_numer: numer.to_vec(),
        scaled_denom: denom,
        delta,
        sigma,
    })
}

/// Which interpolation stencil feeds the virtual nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// One stencil (the center node's), one LU, `k - 1` extra solves.
    Shared,
    /// A fresh stencil and factorization per virtual node.
    PerVirtualNode,
}

/// Combined hybrid weight row at one node.
#[derive(Clone, Debug)]
pub struct HybridWeights {
    pub center: usize,
    /// Referenced node indices. Stencil order for [`Variant::Shared`];
    /// ascending index order for [`Variant::PerVirtualNode`] (union of the
    /// per-offset stencils).
    pub neighbors: Vec<usize>,
    pub weights: Vec<f64>,
    pub variant: Variant,
}

/// Hybrid row using the center node's stencil for every virtual node.
pub fn hybrid_weights_shared(
    nodes: &NodeSet,
    cfg: &RbfConfig,
    vs: &VirtualStencil,
    center: usize,
) -> Result<HybridWeights> {
    if nodes.is_boundary(center) {
        return Err(Error::InvalidParameter(format!(
            "hybrid weights are defined at interior nodes, node {center} is on the boundary"
        )));
    }
    let stencil = nodes.knn_stencil(center, cfg.stencil_size())?;
    let sys = build_local_system(nodes, &stencil, cfg)?;
    let x = nodes.point(center);

    let mut combined = vec![0.0; stencil.len()];
    for (i, (&offset, &a)) in vs.offsets().iter().zip(vs.fd_weights()).enumerate() {
        if i == 0 {
            // Zero offset: the value at x is a nodal value, no interpolation.
            combined[0] += a;
            continue;
        }
        let row = rbf_fd_weights(&sys, Operator::Identity, x + offset)?;
        for (c, w) in combined.iter_mut().zip(&row.weights) {
            *c += a * w;
        }
    }
    Ok(HybridWeights {
        center,
        neighbors: stencil.neighbors,
        weights: combined,
        variant: Variant::Shared,
    })
}

/// Hybrid row searching the `n` nearest nodes of each virtual position.
///
/// Per-offset rows are merged over the union of all referenced node indices,
/// summing coefficients where stencils overlap.
pub fn hybrid_weights_alternative(
    nodes: &NodeSet,
    cfg: &RbfConfig,
    vs: &VirtualStencil,
    center: usize,
) -> Result<HybridWeights> {
    if nodes.is_boundary(center) {
        return Err(Error::InvalidParameter(format!(
            "hybrid weights are defined at interior nodes, node {center} is on the boundary"
        )));
    }
    let x = nodes.point(center);
    let mut accum: BTreeMap<usize, f64> = BTreeMap::new();
    for (i, (&offset, &a)) in vs.offsets().iter().zip(vs.fd_weights()).enumerate() {
        if i == 0 {
            *accum.entry(center).or_insert(0.0) += a;
            continue;
        }
        let position = x + offset;
        let neighbors = nodes.nearest(position, cfg.stencil_size())?;
        let stencil = Stencil {
            center: neighbors[0],
            neighbors,
        };
        let sys = build_local_system(nodes, &stencil, cfg).map_err(|e| match e {
            Error::IllConditioned { .. } => Error::IllConditioned {
                node: center,
                offset: Some(i),
            },
            other => other,
        })?;
        let row = rbf_fd_weights(&sys, Operator::Identity, position).map_err(|e| match e {
            Error::IllConditioned { .. } => Error::IllConditioned {
                node: center,
                offset: Some(i),
            },
            other => other,
        })?;
        for (&idx, &w) in row.neighbors.iter().zip(&row.weights) {
            *accum.entry(idx).or_insert(0.0) += a * w;
        }
    }
    let (neighbors, weights): (Vec<usize>, Vec<f64>) = accum.into_iter().unzip();
    Ok(HybridWeights {
        center,
        neighbors,
        weights,
        variant: Variant::PerVirtualNode,
    })
}

/// One hybrid row per interior node; parallel per node like
/// [`crate::rbf_fd::assemble_all_weights`].
pub fn assemble_all_hybrid(
    nodes: &NodeSet,
    cfg: &RbfConfig,
    vs: &VirtualStencil,
    variant: Variant,
) -> Result<Vec<HybridWeights>> {
    nodes
        .interior_indices()
        .into_par_iter()
        .map(|center| match variant {
            Variant::Shared => hybrid_weights_shared(nodes, cfg, vs, center),
            Variant::PerVirtualNode => hybrid_weights_alternative(nodes, cfg, vs, center),
        })
        .collect()
}
