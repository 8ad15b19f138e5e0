//! Scattered node sets on the unit square and nearest-neighbor stencil queries.
//!
//! The boundary of `(0,1)^2` is discretized uniformly and the interior is
//! filled by an advancing-front algorithm: a FIFO queue of active nodes, each
//! of which proposes candidates on the circle of radius `h` around itself at
//! randomized angles. A candidate is accepted iff it lies strictly inside the
//! square and keeps a distance of at least `0.9 * h` to every existing node.
//! Generation is deterministic given `(h, seed)`.
//!
//! Neighbor queries run on a uniform cell grid and return exactly the result
//! of a brute-force sort by `(distance, node index)`.

use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::TAU;
use std::io::{self, Write};
use std::ops::{Add, Sub};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rejection radius of the advancing-front fill, as a fraction of `h`.
const FILL_REJECTION_FACTOR: f64 = 0.9;

/// Candidate directions proposed per front expansion.
const FILL_CANDIDATES: usize = 12;

/// A point in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Squared Euclidean distance. All distance comparisons in this crate go
    /// through this single expression so that tie-breaking is reproducible.
    #[inline]
    pub fn dist2(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Ordered index list of the `n` nodes nearest to a center node.
///
/// The center itself comes first; the remaining entries are sorted by
/// ascending distance with ties broken by ascending node index.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub center: usize,
    pub neighbors: Vec<usize>,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

/// Candidate entry for the k-nearest heap; ordered by `(d2, idx)`.
#[derive(Clone, Copy, PartialEq)]
struct Cand {
    d2: f64,
    idx: u32,
}

impl Eq for Cand {}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.d2.total_cmp(&other.d2).then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform cell grid for exact nearest-neighbor queries.
#[derive(Clone, Debug)]
struct GridIndex {
    x0: f64,
    y0: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl GridIndex {
    fn with_bounds(x0: f64, x1: f64, y0: f64, y1: f64, cell: f64) -> Self {
        debug_assert!(cell > 0.0);
        let nx = (((x1 - x0) / cell).ceil() as usize).max(1);
        let ny = (((y1 - y0) / cell).ceil() as usize).max(1);
        Self {
            x0,
            y0,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        }
    }

    #[inline]
    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let i = (((p.x - self.x0) / self.cell).floor() as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j = (((p.y - self.y0) / self.cell).floor() as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        (i, j)
    }

    fn insert(&mut self, idx: usize, p: Point2) {
        let (i, j) = self.cell_of(p);
        self.cells[j * self.nx + i].push(idx as u32);
    }

    /// True iff any stored point lies strictly closer than `r` to `p`.
    fn any_within(&self, pts: &[Point2], p: Point2, r: f64) -> bool {
        let (ci, cj) = self.cell_of(p);
        let reach = ((r / self.cell).ceil() as isize).max(1);
        let r2 = r * r;
        for dj in -reach..=reach {
            let j = cj as isize + dj;
            if j < 0 || j >= self.ny as isize {
                continue;
            }
            for di in -reach..=reach {
                let i = ci as isize + di;
                if i < 0 || i >= self.nx as isize {
                    continue;
                }
                for &k in &self.cells[j as usize * self.nx + i as usize] {
                    if pts[k as usize].dist2(p) < r2 {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Smallest possible distance from `q` to any cell at ring `ring` or
    /// beyond. Slightly shrunk so that floating-point cell binning can never
    /// make the bound optimistic.
    fn ring_lower_bound(&self, q: Point2, ci: usize, cj: usize, ring: usize) -> f64 {
        if ring == 0 {
            return 0.0;
        }
        let span = (ring - 1) as f64;
        let rxmin = self.x0 + (ci as f64 - span) * self.cell;
        let rxmax = self.x0 + (ci as f64 + span + 1.0) * self.cell;
        let rymin = self.y0 + (cj as f64 - span) * self.cell;
        let rymax = self.y0 + (cj as f64 + span + 1.0) * self.cell;
        if q.x < rxmin || q.x > rxmax || q.y < rymin || q.y > rymax {
            return 0.0;
        }
        let lb = (q.x - rxmin)
            .min(rxmax - q.x)
            .min(q.y - rymin)
            .min(rymax - q.y);
        (lb * (1.0 - 1e-12)).max(0.0)
    }

    /// Exact k-nearest query: returns indices sorted by `(distance, index)`.
    fn k_nearest(&self, pts: &[Point2], q: Point2, k: usize) -> Vec<usize> {
        debug_assert!(k >= 1 && k <= pts.len());
        let (ci, cj) = self.cell_of(q);
        let mut heap: BinaryHeap<Cand> = BinaryHeap::with_capacity(k + 1);
        let max_ring = self.nx.max(self.ny);

        for ring in 0..=max_ring {
            if heap.len() == k {
                let lb = self.ring_lower_bound(q, ci, cj, ring);
                if lb * lb > heap.peek().unwrap().d2 {
                    break;
                }
            }
            self.visit_ring(ci, cj, ring, |cell| {
                for &idx in cell {
                    let cand = Cand {
                        d2: pts[idx as usize].dist2(q),
                        idx,
                    };
                    if heap.len() < k {
                        heap.push(cand);
                    } else if cand < *heap.peek().unwrap() {
                        *heap.peek_mut().unwrap() = cand;
                    }
                }
            });
        }

        heap.into_sorted_vec()
            .into_iter()
            .map(|c| c.idx as usize)
            .collect()
    }

    /// Applies `f` to every populated cell at Chebyshev cell distance `ring`.
    fn visit_ring<F: FnMut(&[u32])>(&self, ci: usize, cj: usize, ring: usize, mut f: F) {
        let (ci, cj, ring) = (ci as isize, cj as isize, ring as isize);
        let mut visit = |i: isize, j: isize| {
            if i >= 0 && i < self.nx as isize && j >= 0 && j < self.ny as isize {
                f(&self.cells[j as usize * self.nx + i as usize]);
            }
        };
        if ring == 0 {
            visit(ci, cj);
            return;
        }
        for i in (ci - ring)..=(ci + ring) {
            visit(i, cj - ring);
            visit(i, cj + ring);
        }
        for j in (cj - ring + 1)..=(cj + ring - 1) {
            visit(ci - ring, j);
            visit(ci + ring, j);
        }
    }
}

/// Immutable scattered discretization of the unit square.
#[derive(Clone, Debug)]
pub struct NodeSet {
    points: Vec<Point2>,
    boundary: Vec<bool>,
    h: f64,
    seed: u64,
    grid: GridIndex,
}

impl NodeSet {
    /// Generates boundary and interior nodes for target fill distance `h`.
    ///
    /// The boundary step is adjusted to `1/ceil(1/h)` so that the four
    /// corners are hit exactly; the interior is filled by the advancing
    /// front described in the module docs.
    pub fn generate(h: f64, seed: u64) -> Result<NodeSet> {
        if !h.is_finite() || h <= 0.0 || h > 0.5 {
            return Err(Error::InvalidParameter(format!(
                "fill distance must satisfy 0 < h <= 0.5, got {h}"
            )));
        }
        let divisions = (1.0 / h).ceil() as usize;
        let mut points = Vec::new();
        let mut boundary = Vec::new();
        let coord = |i: usize| i as f64 / divisions as f64;

        for i in 0..=divisions {
            points.push(Point2::new(coord(i), 0.0));
        }
        for i in 0..=divisions {
            points.push(Point2::new(coord(i), 1.0));
        }
        for j in 1..divisions {
            points.push(Point2::new(0.0, coord(j)));
        }
        for j in 1..divisions {
            points.push(Point2::new(1.0, coord(j)));
        }
        boundary.resize(points.len(), true);

        let r_min = FILL_REJECTION_FACTOR * h;
        let mut grid = GridIndex::with_bounds(0.0, 1.0, 0.0, 1.0, r_min);
        for (i, &p) in points.iter().enumerate() {
            grid.insert(i, p);
        }

        let mut queue: VecDeque<usize> = (0..points.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while let Some(active) = queue.pop_front() {
            let origin = points[active];
            let base: f64 = rng.gen::<f64>() * TAU;
            for c in 0..FILL_CANDIDATES {
                let angle = base + c as f64 * TAU / FILL_CANDIDATES as f64;
                let cand = Point2::new(origin.x + h * angle.cos(), origin.y + h * angle.sin());
                if !(cand.x > 0.0 && cand.x < 1.0 && cand.y > 0.0 && cand.y < 1.0) {
                    continue;
                }
                if grid.any_within(&points, cand, r_min) {
                    continue;
                }
                let idx = points.len();
                points.push(cand);
                boundary.push(false);
                grid.insert(idx, cand);
                queue.push_back(idx);
            }
        }

        Ok(NodeSet {
            points,
            boundary,
            h,
            seed,
            grid,
        })
    }

    /// Uniform `(divisions+1)^2` tensor grid with spacing `1/divisions`,
    /// in row-major order. Useful for convergence studies and for checking
    /// that scattered-node methods degenerate to classical stencils.
    pub fn uniform_grid(divisions: usize) -> NodeSet {
        assert!(divisions >= 1, "grid needs at least one cell per side");
        let h = 1.0 / divisions as f64;
        let mut points = Vec::with_capacity((divisions + 1) * (divisions + 1));
        let mut boundary = Vec::with_capacity(points.capacity());
        for j in 0..=divisions {
            for i in 0..=divisions {
                points.push(Point2::new(
                    i as f64 / divisions as f64,
                    j as f64 / divisions as f64,
                ));
                boundary.push(i == 0 || i == divisions || j == 0 || j == divisions);
            }
        }
        let mut grid = GridIndex::with_bounds(0.0, 1.0, 0.0, 1.0, h);
        for (i, &p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        NodeSet {
            points,
            boundary,
            h,
            seed: 0,
            grid,
        }
    }

    /// Wraps an arbitrary list of points (not restricted to the unit square).
    /// `spacing` is only used to size the query grid.
    pub fn from_points(points: Vec<Point2>, boundary: Vec<bool>, spacing: f64) -> Result<NodeSet> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("empty node set".into()));
        }
        if points.len() != boundary.len() {
            return Err(Error::InvalidParameter(
                "points and boundary mask differ in length".into(),
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite node coordinate ({}, {})",
                p.x, p.y
            )));
        }
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in &points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        let mut grid = GridIndex::with_bounds(x0, x1, y0, y1, spacing);
        for (i, &p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        Ok(NodeSet {
            points,
            boundary,
            h: spacing,
            seed: 0,
            grid,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> Point2 {
        self.points[i]
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    #[inline]
    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary[i]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn interior_count(&self) -> usize {
        self.len() - self.boundary_count()
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.boundary[i]).collect()
    }

    /// Stencil of the `n` nodes nearest to node `center`, center first.
    pub fn knn_stencil(&self, center: usize, n: usize) -> Result<Stencil> {
        let neighbors = self.nearest(self.points[center], n)?;
        debug_assert_eq!(neighbors[0], center);
        Ok(Stencil { center, neighbors })
    }

    /// Indices of the `n` nodes nearest to an arbitrary position, sorted by
    /// ascending distance with ties broken by ascending index. The position
    /// may lie outside the unit square.
    pub fn nearest(&self, pos: Point2, n: usize) -> Result<Vec<usize>> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidParameter(format!(
                "requested {n} neighbors from a set of {} nodes",
                self.len()
            )));
        }
        if !pos.is_finite() {
            return Err(Error::InvalidParameter(
                "query position must be finite".into(),
            ));
        }
        Ok(self.grid.k_nearest(&self.points, pos, n))
    }

    /// Writes the node set as CSV (`x,y,boundary`), one row per node in
    /// index order.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "x,y,boundary")?;
        for (p, &b) in self.points.iter().zip(&self.boundary) {
            writeln!(w, "{},{},{}", p.x, p.y, u8::from(b))?;
        }
        Ok(())
    }
}
