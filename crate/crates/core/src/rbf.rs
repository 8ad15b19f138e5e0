//! Polyharmonic-spline RBF basics and the local augmented interpolation
//! system.
//!
//! The local interpolant over a stencil combines the radial basis
//! `phi(r) = r^k` (odd `k`) with all monomials up to a chosen degree `m`:
//!
//! ```text
//! f(x) ~ sum_i alpha_i phi(|x - x_i|) + sum_j beta_j p_j(x),
//! ```
//!
//! subject to the orthogonality side conditions `P^T alpha = 0`. Matching the
//! data at the `n` stencil nodes yields the symmetric saddle-point system
//!
//! ```text
//! [ A   P ] [alpha]   [f]
//! [ P^T 0 ] [beta ] = [0],    A_ij = phi(|x_i - x_j|),  P_ij = p_j(x_i),
//! ```
//!
//! of size `M = n + s` where `s` counts the monomials. Before assembly the
//! stencil is translated to its center and divided by its radius; PHS systems
//! are dramatically better conditioned in these local coordinates and the
//! change is exactly invertible.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::nodes::{NodeSet, Point2, Stencil};

/// Relative floor on the LU diagonal below which a local system is reported
/// as singular to working precision (duplicate or collapsed stencil nodes).
const RCOND_FLOOR: f64 = 1e-13;

/// Evaluates the polyharmonic spline `phi(r) = r^k`.
///
/// `order` must be odd and `r` non-negative.
pub fn phs_eval(order: u32, r: f64) -> f64 {
    assert!(order % 2 == 1, "PHS order must be odd, got {order}");
    assert!(r >= 0.0, "PHS radius must be non-negative, got {r}");
    r.powi(order as i32)
}

/// Evaluates the 2D Laplacian of `phi(r) = r^k` as a radial profile:
/// `phi'' + phi'/r = k^2 r^(k-2)`.
///
/// Requires `order >= 3`; lower orders are singular at the origin.
pub fn phs_laplacian(order: u32, r: f64) -> f64 {
    assert!(order % 2 == 1, "PHS order must be odd, got {order}");
    assert!(
        order >= 3,
        "PHS Laplacian requires order >= 3, got {order}"
    );
    assert!(r >= 0.0, "PHS radius must be non-negative, got {r}");
    (order * order) as f64 * r.powi(order as i32 - 2)
}

/// Number of bivariate monomials of total degree at most `degree`.
pub fn monomial_count(degree: u32) -> usize {
    ((degree + 1) * (degree + 2) / 2) as usize
}

/// Values of all monomials `x^a y^b` with `a + b <= degree` at `p`, in
/// graded lexicographic order: `1, x, y, x^2, xy, y^2, ...`.
pub fn monomial_basis(degree: u32, p: Point2) -> Vec<f64> {
    let mut out = Vec::with_capacity(monomial_count(degree));
    for d in 0..=degree {
        for a in (0..=d).rev() {
            let b = d - a;
            out.push(p.x.powi(a as i32) * p.y.powi(b as i32));
        }
    }
    out
}

/// Laplacians of the monomial basis at `p`, in the same order as
/// [`monomial_basis`]: `a(a-1) x^(a-2) y^b + b(b-1) x^a y^(b-2)`.
pub fn monomial_laplacian(degree: u32, p: Point2) -> Vec<f64> {
    let mut out = Vec::with_capacity(monomial_count(degree));
    for d in 0..=degree {
        for a in (0..=d).rev() {
            let b = d - a;
            let mut v = 0.0;
            if a >= 2 {
                v += (a * (a - 1)) as f64 * p.x.powi(a as i32 - 2) * p.y.powi(b as i32);
            }
            if b >= 2 {
                v += (b * (b - 1)) as f64 * p.x.powi(a as i32) * p.y.powi(b as i32 - 2);
            }
            out.push(v);
        }
    }
    out
}

/// Configuration of the local RBF approximation: PHS order, augmentation
/// degree, and stencil size.
///
/// [`RbfConfig::new`] applies the customary sizing rule `n = 2s` (stencil
/// twice the monomial count); [`RbfConfig::with_stencil_size`] overrides it
/// for experiments on non-standard supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RbfConfig {
    phs_order: u32,
    degree: u32,
    stencil_size: usize,
}

impl RbfConfig {
    pub fn new(phs_order: u32, degree: u32) -> Result<Self> {
        if phs_order.is_multiple_of(2) || phs_order == 0 {
            return Err(Error::InvalidParameter(format!(
                "PHS order must be odd and positive, got {phs_order}"
            )));
        }
        Ok(Self {
            phs_order,
            degree,
            stencil_size: 2 * monomial_count(degree),
        })
    }

    pub fn with_stencil_size(mut self, n: usize) -> Result<Self> {
        if n < self.monomial_count() {
            return Err(Error::InvalidParameter(format!(
                "stencil size {n} is below the monomial count {}",
                self.monomial_count()
            )));
        }
        self.stencil_size = n;
        Ok(self)
    }

    pub fn phs_order(&self) -> u32 {
        self.phs_order
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Number of augmenting monomials `s`.
    pub fn monomial_count(&self) -> usize {
        monomial_count(self.degree)
    }

    /// Stencil size `n`.
    pub fn stencil_size(&self) -> usize {
        self.stencil_size
    }

    /// Size `M = n + s` of the saddle-point system.
    pub fn system_size(&self) -> usize {
        self.stencil_size + self.monomial_count()
    }
}

/// Assembled and factorized local saddle-point system for one stencil.
///
/// The stored LU factorization (partial pivoting) is reused for every
/// right-hand side posed on this stencil; each extra solve costs two
/// triangular substitutions.
#[derive(Debug)]
pub struct LocalSystem {
    matrix: DMatrix<f64>,
    lu: nalgebra::LU<f64, Dyn, Dyn>,
    local_points: Vec<Point2>,
    shift: Point2,
    scale: f64,
    center_node: usize,
    neighbor_indices: Vec<usize>,
    cfg: RbfConfig,
}

impl LocalSystem {
    /// The assembled `M x M` saddle-point matrix, in local coordinates.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// The stored LU factorization of [`Self::matrix`].
    pub fn lu(&self) -> &nalgebra::LU<f64, Dyn, Dyn> {
        &self.lu
    }

    /// Translation applied to stencil coordinates (the center point).
    pub fn shift(&self) -> Point2 {
        self.shift
    }

    /// Normalization applied after translation (the stencil radius).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center_node(&self) -> usize {
        self.center_node
    }

    /// Stencil node indices, center first.
    pub fn neighbors(&self) -> &[usize] {
        &self.neighbor_indices
    }

    pub fn config(&self) -> &RbfConfig {
        &self.cfg
    }

    pub fn stencil_size(&self) -> usize {
        self.neighbor_indices.len()
    }

    /// Maps a point into the shifted and scaled stencil frame.
    #[inline]
    pub fn to_local(&self, p: Point2) -> Point2 {
        Point2::new((p.x - self.shift.x) / self.scale, (p.y - self.shift.y) / self.scale)
    }

    pub(crate) fn local_points(&self) -> &[Point2] {
        &self.local_points
    }

    pub(crate) fn solve(&self, rhs: DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(&rhs).ok_or(Error::IllConditioned {
            node: self.center_node,
            offset: None,
        })
    }
}

/// Builds and factorizes the local system for `stencil`.
///
/// The stencil length must equal `cfg.stencil_size()`. Duplicate stencil
/// nodes make the matrix singular and are reported as a conditioning error
/// carrying the stencil center index.
pub fn build_local_system(nodes: &NodeSet, stencil: &Stencil, cfg: &RbfConfig) -> Result<LocalSystem> {
    let n = stencil.neighbors.len();
    if n != cfg.stencil_size() {
        return Err(Error::InvalidParameter(format!(
            "stencil has {n} nodes but the configuration expects {}",
            cfg.stencil_size()
        )));
    }
    let s = cfg.monomial_count();
    let m_size = n + s;
    let center = nodes.point(stencil.center);

    let scale = stencil
        .neighbors
        .iter()
        .map(|&i| nodes.point(i).dist(center))
        .fold(0.0, f64::max);
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::IllConditioned {
            node: stencil.center,
            offset: None,
        });
    }

    let local_points: Vec<Point2> = stencil
        .neighbors
        .iter()
        .map(|&i| {
            let p = nodes.point(i);
            Point2::new((p.x - center.x) / scale, (p.y - center.y) / scale)
        })
        .collect();

    let mut matrix = DMatrix::zeros(m_size, m_size);
    for i in 0..n {
        for j in i..n {
            let v = phs_eval(cfg.phs_order(), local_points[i].dist(local_points[j]));
            matrix[(i, j)] = v;
            matrix[(j, i)] = v;
        }
        let basis = monomial_basis(cfg.degree(), local_points[i]);
        for (j, &b) in basis.iter().enumerate() {
            matrix[(i, n + j)] = b;
            matrix[(n + j, i)] = b;
        }
    }

    let lu = nalgebra::LU::new(matrix.clone());
    let diag = lu.u().map_diagonal(|d| d.abs());
    let dmax = diag.max();
    let dmin = diag.min();
    if !(dmin.is_finite() && dmax.is_finite()) || dmin <= dmax * RCOND_FLOOR {
        return Err(Error::IllConditioned {
            node: stencil.center,
            offset: None,
        });
    }

    Ok(LocalSystem {
        matrix,
        lu,
        local_points,
        shift: center,
        scale,
        center_node: stencil.center,
        neighbor_indices: stencil.neighbors.clone(),
        cfg: *cfg,
    })
}

/// Coefficients of a solved local interpolant.
#[derive(Clone, Debug)]
pub struct InterpolantCoeffs {
    /// RBF coefficients, one per stencil node.
    pub alpha: Vec<f64>,
    /// Monomial coefficients.
    pub beta: Vec<f64>,
}

/// Solves the local system for the given nodal `values`.
pub fn interpolate(sys: &LocalSystem, values: &[f64]) -> Result<InterpolantCoeffs> {
    let n = sys.stencil_size();
    assert_eq!(values.len(), n, "one value per stencil node required");
    let m_size = sys.matrix.nrows();
    let mut rhs = DVector::zeros(m_size);
    for (i, &v) in values.iter().enumerate() {
        rhs[i] = v;
    }
    let sol = sys.solve(rhs)?;
    Ok(InterpolantCoeffs {
        alpha: sol.as_slice()[..n].to_vec(),
        beta: sol.as_slice()[n..].to_vec(),
    })
}

/// Evaluates the interpolant at an arbitrary point (which may lie outside
/// the stencil hull).
pub fn eval_interpolant(sys: &LocalSystem, coeffs: &InterpolantCoeffs, at: Point2) -> f64 {
    let local = sys.to_local(at);
    let mut acc = 0.0;
    for (alpha, &pt) in coeffs.alpha.iter().zip(sys.local_points()) {
        acc += alpha * phs_eval(sys.cfg.phs_order(), local.dist(pt));
    }
    let basis = monomial_basis(sys.cfg.degree(), local);
    for (beta, b) in coeffs.beta.iter().zip(basis) {
        acc += beta * b;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Central five-point finite-difference Laplacian, the independent
    /// oracle for analytic Laplacian formulas.
    fn fd_laplacian(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, step: f64) -> f64 {
        (f(x + step, y) + f(x - step, y) + f(x, y + step) + f(x, y - step) - 4.0 * f(x, y))
            / (step * step)
    }

    fn random_stencil_nodes(count: usize, seed: u64) -> NodeSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts = vec![Point2::new(0.5, 0.5)];
        while pts.len() < count {
            let cand = Point2::new(rng.gen::<f64>(), rng.gen::<f64>());
            if pts.iter().all(|p| p.dist(cand) > 0.05) {
                pts.push(cand);
            }
        }
        NodeSet::from_points(pts, vec![false; count], 0.1).unwrap()
    }

    fn full_stencil(nodes: &NodeSet) -> Stencil {
        nodes.knn_stencil(0, nodes.len()).unwrap()
    }

    #[test]
    fn phs_values() {
        assert_eq!(phs_eval(3, 0.0), 0.0);
        assert_eq!(phs_eval(3, 2.0), 8.0);
        assert_eq!(phs_eval(3, 0.5), 0.125);
        assert_eq!(phs_eval(5, 2.0), 32.0);
    }

    #[test]
    #[should_panic(expected = "non-negative")]
    fn phs_rejects_negative_radius() {
        phs_eval(3, -1.0);
    }

    #[test]
    #[should_panic(expected = "odd")]
    fn phs_rejects_even_order() {
        phs_eval(2, 1.0);
    }

    #[test]
    fn phs_laplacian_matches_finite_differences() {
        // Laplacian of r^k as a function of (x, y), probed off-axis.
        for (order, x, y) in [(3u32, 0.8f64, 0.6f64), (3, 0.3, -0.4), (5, 1.2, 1.6), (7, 0.5, 0.9)] {
            let f = |px: f64, py: f64| (px * px + py * py).sqrt().powi(order as i32);
            let r = (x * x + y * y).sqrt();
            let got = phs_laplacian(order, r);
            let want = fd_laplacian(f, x, y, 1e-4);
            assert!(
                (got - want).abs() <= 1e-6 * want.abs().max(1.0),
                "order {order}: {got} vs fd {want}"
            );
        }
        assert_eq!(phs_laplacian(3, 1.0), 9.0);
        assert_eq!(phs_laplacian(3, 0.0), 0.0);
        assert_eq!(phs_laplacian(5, 2.0), 200.0);
    }

    #[test]
    #[should_panic(expected = "order >= 3")]
    fn phs_laplacian_rejects_order_one() {
        phs_laplacian(1, 1.0);
    }

    #[test]
    fn monomial_basis_ordering_and_values() {
        assert_eq!(monomial_basis(0, Point2::new(3.0, 4.0)), vec![1.0]);
        assert_eq!(
            monomial_basis(2, Point2::new(2.0, 3.0)),
            vec![1.0, 2.0, 3.0, 4.0, 6.0, 9.0]
        );
        assert_eq!(monomial_basis(1, Point2::new(0.0, 0.0)), vec![1.0, 0.0, 0.0]);
        assert_eq!(monomial_count(4), 15);
        assert_eq!(monomial_basis(4, Point2::new(1.5, -0.5)).len(), 15);
    }

    #[test]
    fn monomial_laplacian_values() {
        assert_eq!(
            monomial_laplacian(2, Point2::new(2.0, 3.0)),
            vec![0.0, 0.0, 0.0, 2.0, 0.0, 2.0]
        );
        assert_eq!(
            monomial_laplacian(1, Point2::new(7.0, -2.0)),
            vec![0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn monomial_laplacian_matches_finite_differences() {
        let degree = 4;
        let p = Point2::new(0.3, 0.7);
        let got = monomial_laplacian(degree, p);
        let mut idx = 0;
        for d in 0..=degree {
            for a in (0..=d).rev() {
                let b = d - a;
                let f = |x: f64, y: f64| x.powi(a as i32) * y.powi(b as i32);
                let want = fd_laplacian(f, p.x, p.y, 1e-4);
                assert!(
                    (got[idx] - want).abs() <= 1e-6 * want.abs().max(1.0),
                    "monomial x^{a} y^{b}: {} vs fd {want}",
                    got[idx]
                );
                idx += 1;
            }
        }
    }

    #[test]
    fn config_sizing() {
        let cfg = RbfConfig::new(3, 2).unwrap();
        assert_eq!(cfg.monomial_count(), 6);
        assert_eq!(cfg.stencil_size(), 12);
        assert_eq!(cfg.system_size(), 18);
        assert!(RbfConfig::new(4, 2).is_err());
        assert!(RbfConfig::new(0, 2).is_err());
        assert!(RbfConfig::new(3, 2).unwrap().with_stencil_size(5).is_err());
        let wide = RbfConfig::new(3, 2).unwrap().with_stencil_size(9).unwrap();
        assert_eq!(wide.system_size(), 15);
    }

    #[test]
    fn two_node_system_assembles_directly() {
        let nodes = NodeSet::from_points(
            vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            vec![false, false],
            1.0,
        )
        .unwrap();
        let cfg = RbfConfig::new(3, 0).unwrap(); // s = 1, n = 2, M = 3
        let sys = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap();
        assert_eq!(sys.matrix().nrows(), 3);
        assert_eq!(sys.scale(), 1.0);
        let m = sys.matrix();
        // A = [[0, phi(1)], [phi(1), 0]] in scaled coordinates, P = [1, 1].
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(1, 1)], 0.0);
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(1, 0)], 1.0);
        assert_eq!(m[(0, 2)], 1.0);
        assert_eq!(m[(1, 2)], 1.0);
        assert_eq!(m[(2, 0)], 1.0);
        assert_eq!(m[(2, 1)], 1.0);
        assert_eq!(m[(2, 2)], 0.0);
    }

    #[test]
    fn matrix_is_exactly_symmetric() {
        let nodes = random_stencil_nodes(12, 31);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let sys = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap();
        let m = sys.matrix();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                assert_eq!(m[(i, j)], m[(j, i)]);
            }
        }
        // phi(0) = 0 and the saddle block is zero, so the diagonal vanishes.
        for i in 0..m.nrows() {
            assert_eq!(m[(i, i)], 0.0);
        }
    }

    #[test]
    fn lu_reproduces_matrix() {
        for seed in [1, 2, 3] {
            let nodes = random_stencil_nodes(12, seed);
            let cfg = RbfConfig::new(3, 2).unwrap();
            let sys = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap();
            let lu = sys.lu();
            let product = lu.l() * lu.u();
            let mut permuted = sys.matrix().clone();
            lu.p().permute_rows(&mut permuted);
            let norm = |m: &DMatrix<f64>| {
                (0..m.nrows())
                    .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            let residual = norm(&(product - &permuted));
            assert!(
                residual <= 1e-10 * norm(sys.matrix()),
                "LU residual {residual}"
            );
        }
    }

    #[test]
    fn duplicate_nodes_report_conditioning_error() {
        let p = Point2::new(0.4, 0.4);
        let mut pts = random_stencil_nodes(11, 77).points().to_vec();
        pts.push(pts[3]); // exact duplicate
        let _ = p;
        let nodes = NodeSet::from_points(pts, vec![false; 12], 0.1).unwrap();
        let cfg = RbfConfig::new(3, 2).unwrap();
        let err = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap_err();
        match err {
            Error::IllConditioned { node, .. } => assert_eq!(node, 0),
            other => panic!("expected conditioning error, got {other}"),
        }
    }

    #[test]
    fn interpolation_reproduces_data_at_nodes() {
        let nodes = random_stencil_nodes(12, 5);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let stencil = full_stencil(&nodes);
        let sys = build_local_system(&nodes, &stencil, &cfg).unwrap();
        let values: Vec<f64> = stencil
            .neighbors
            .iter()
            .map(|&i| {
                let p = nodes.point(i);
                p.x * p.x + p.y
            })
            .collect();
        let coeffs = interpolate(&sys, &values).unwrap();
        for (k, &i) in stencil.neighbors.iter().enumerate() {
            let got = eval_interpolant(&sys, &coeffs, nodes.point(i));
            assert!(
                (got - values[k]).abs() <= 1e-9 * values[k].abs().max(1.0),
                "node {i}: {got} vs {}",
                values[k]
            );
        }
    }

    #[test]
    fn interpolating_zeros_gives_zero_coefficients() {
        let nodes = random_stencil_nodes(12, 6);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let sys = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap();
        let coeffs = interpolate(&sys, &[0.0; 12]).unwrap();
        assert!(coeffs.alpha.iter().all(|&a| a == 0.0));
        assert!(coeffs.beta.iter().all(|&b| b == 0.0));
        assert_eq!(eval_interpolant(&sys, &coeffs, Point2::new(0.3, 0.9)), 0.0);
    }

    #[test]
    fn orthogonality_side_conditions_hold() {
        let nodes = random_stencil_nodes(12, 9);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let stencil = full_stencil(&nodes);
        let sys = build_local_system(&nodes, &stencil, &cfg).unwrap();
        let values: Vec<f64> = stencil
            .neighbors
            .iter()
            .map(|&i| (3.1 * nodes.point(i).x).sin())
            .collect();
        let coeffs = interpolate(&sys, &values).unwrap();
        let alpha_max = coeffs.alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let mut p_max = 0.0f64;
        // P^T alpha accumulated monomial by monomial.
        let mut residual = vec![0.0; cfg.monomial_count()];
        for (i, &pt) in sys.local_points().iter().enumerate() {
            for (j, b) in monomial_basis(cfg.degree(), pt).into_iter().enumerate() {
                residual[j] += coeffs.alpha[i] * b;
                p_max = p_max.max(b.abs());
            }
        }
        for r in residual {
            assert!(r.abs() <= 1e-9 * alpha_max * p_max.max(1.0));
        }
    }

    #[test]
    fn reproduces_monomials_up_to_degree() {
        let nodes = random_stencil_nodes(12, 40);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let stencil = full_stencil(&nodes);
        let sys = build_local_system(&nodes, &stencil, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (a, b) in [(0u32, 0u32), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] {
            let f = |p: Point2| p.x.powi(a as i32) * p.y.powi(b as i32);
            let values: Vec<f64> = stencil.neighbors.iter().map(|&i| f(nodes.point(i))).collect();
            let coeffs = interpolate(&sys, &values).unwrap();
            for _ in 0..100 {
                let at = Point2::new(rng.gen::<f64>(), rng.gen::<f64>());
                let got = eval_interpolant(&sys, &coeffs, at);
                let want = f(at);
                assert!(
                    (got - want).abs() <= 1e-8 * want.abs().max(1.0),
                    "x^{a} y^{b} at ({}, {}): {got} vs {want}",
                    at.x,
                    at.y
                );
            }
        }
    }

    #[test]
    fn constant_data_reproduced_anywhere() {
        let nodes = random_stencil_nodes(12, 13);
        let cfg = RbfConfig::new(3, 2).unwrap();
        let sys = build_local_system(&nodes, &full_stencil(&nodes), &cfg).unwrap();
        let coeffs = interpolate(&sys, &[2.5; 12]).unwrap();
        for at in [Point2::new(0.1, 0.2), Point2::new(0.9, 0.9), Point2::new(-0.3, 1.4)] {
            let got = eval_interpolant(&sys, &coeffs, at);
            assert!((got - 2.5).abs() <= 1e-9 * 2.5);
        }
    }

    #[test]
    fn interpolation_tracks_smooth_function_at_fine_scale() {
        use std::f64::consts::PI;
        let nodes = NodeSet::generate(0.01, 3).unwrap();
        let cfg = RbfConfig::new(3, 2).unwrap();
        let center = nodes
            .interior_indices()
            .into_iter()
            .min_by(|&a, &b| {
                let mid = Point2::new(0.47, 0.53);
                nodes.point(a).dist2(mid).total_cmp(&nodes.point(b).dist2(mid))
            })
            .unwrap();
        let stencil = nodes.knn_stencil(center, cfg.stencil_size()).unwrap();
        let sys = build_local_system(&nodes, &stencil, &cfg).unwrap();
        let f = |p: Point2| (PI * p.x).sin() * (PI * p.y).sin();
        let values: Vec<f64> = stencil.neighbors.iter().map(|&i| f(nodes.point(i))).collect();
        let coeffs = interpolate(&sys, &values).unwrap();
        let at = nodes.point(center);
        assert!((eval_interpolant(&sys, &coeffs, at) - f(at)).abs() < 1e-3);
    }

    #[test]
    fn construction_is_shift_invariant() {
        let nodes = random_stencil_nodes(12, 55);
        let offset = Point2::new(12.5, -7.25);
        let shifted_pts: Vec<Point2> = nodes.points().iter().map(|&p| p + offset).collect();
        let shifted = NodeSet::from_points(shifted_pts, vec![false; 12], 0.1).unwrap();

        let cfg = RbfConfig::new(3, 2).unwrap();
        let st = full_stencil(&nodes);
        let st_shifted = full_stencil(&shifted);
        assert_eq!(st.neighbors, st_shifted.neighbors);

        let sys = build_local_system(&nodes, &st, &cfg).unwrap();
        let sys_shifted = build_local_system(&shifted, &st_shifted, &cfg).unwrap();

        let values: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).cos()).collect();
        let coeffs = interpolate(&sys, &values).unwrap();
        let coeffs_shifted = interpolate(&sys_shifted, &values).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..25 {
            let at = Point2::new(rng.gen::<f64>(), rng.gen::<f64>());
            let a = eval_interpolant(&sys, &coeffs, at);
            let b = eval_interpolant(&sys_shifted, &coeffs_shifted, at + offset);
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}
