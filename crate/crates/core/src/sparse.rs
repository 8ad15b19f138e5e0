//! Compressed-row sparse matrices and global system assembly.
//!
//! Interior rows of the global system carry one operator weight row each;
//! Dirichlet boundary rows are unit rows with zero right-hand side. Column
//! indices are sorted within each row and exact zeros are never stored.

use std::io::{self, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hybrid::HybridWeights;
use crate::nodes::{NodeSet, Point2};
use crate::rbf_fd::OperatorWeights;

/// Square sparse matrix in compressed-row storage.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets. Duplicate positions are
    /// summed; entries that are exactly zero after summing are dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        let mut it = sorted.into_iter().peekable();
        for row in 0..nrows {
            while let Some(&(r, c, _)) = it.peek() {
                if r != row {
                    break;
                }
                assert!(c < ncols, "column {c} out of bounds");
                let mut v = 0.0;
                while let Some(&(r2, c2, v2)) = it.peek() {
                    if r2 == row && c2 == c {
                        v += v2;
                        it.next();
                    } else {
                        break;
                    }
                }
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr[row + 1] = col_idx.len();
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            *yi = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Writes the matrix in Matrix Market coordinate format (1-based,
    /// row-major entry order, shortest round-trip number formatting).
    pub fn write_matrix_market<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:e}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Anything usable as an assembled operator row.
pub trait OperatorRow {
    fn center(&self) -> usize;
    fn columns(&self) -> &[usize];
    fn coefficients(&self) -> &[f64];
}

impl OperatorRow for OperatorWeights {
    fn center(&self) -> usize {
        self.center
    }
    fn columns(&self) -> &[usize] {
        &self.neighbors
    }
    fn coefficients(&self) -> &[f64] {
        &self.weights
    }
}

impl OperatorRow for HybridWeights {
    fn center(&self) -> usize {
        self.center
    }
    fn columns(&self) -> &[usize] {
        &self.neighbors
    }
    fn coefficients(&self) -> &[f64] {
        &self.weights
    }
}

/// Global linear system `A u = b`.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl SparseSystem {
    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    /// Relative residual `|b - A x|_2 / |b|_2` (absolute when `b = 0`).
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.len()];
        self.matrix.matvec(x, &mut ax);
        let mut num = 0.0;
        let mut den = 0.0;
        for (axi, bi) in ax.iter().zip(&self.rhs) {
            num += (bi - axi) * (bi - axi);
            den += bi * bi;
        }
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            num.sqrt()
        }
    }
}

/// Assembles the Dirichlet problem: one operator row per interior node,
/// unit rows at boundary nodes, right-hand side `source(x_i)` at interior
/// nodes and zero at the boundary.
pub fn assemble_system<R: OperatorRow>(
    nodes: &NodeSet,
    rows: &[R],
    source: impl Fn(Point2) -> f64,
) -> Result<SparseSystem> {
    let n = nodes.len();
    let mut row_of: Vec<Option<&R>> = vec![None; n];
    for row in rows {
        let c = row.center();
        if c >= n {
            return Err(Error::Assembly(format!("row center {c} out of bounds")));
        }
        if nodes.is_boundary(c) {
            return Err(Error::Assembly(format!(
                "operator row supplied for boundary node {c}"
            )));
        }
        if row_of[c].is_some() {
            return Err(Error::Assembly(format!("duplicate row for node {c}")));
        }
        row_of[c] = Some(row);
    }

    let mut row_ptr = vec![0usize; n + 1];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut rhs = vec![0.0; n];
    let mut entries: Vec<(usize, f64)> = Vec::new();

    for i in 0..n {
        if nodes.is_boundary(i) {
            col_idx.push(i);
            values.push(1.0);
        } else {
            let row = row_of[i].ok_or_else(|| {
                Error::Assembly(format!("missing operator row for interior node {i}"))
            })?;
            entries.clear();
            for (&c, &v) in row.columns().iter().zip(row.coefficients()) {
                if c >= n {
                    return Err(Error::Assembly(format!(
                        "row {i} references invalid column {c}"
                    )));
                }
                entries.push((c, v));
            }
            entries.sort_by_key(|&(c, _)| c);
            for pair in entries.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(Error::Assembly(format!(
                        "row {i} references column {} twice",
                        pair[0].0
                    )));
                }
            }
            for &(c, v) in &entries {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            rhs[i] = source(nodes.point(i));
        }
        row_ptr[i + 1] = col_idx.len();
    }

    Ok(SparseSystem {
        matrix: CsrMatrix {
            nrows: n,
            ncols: n,
            row_ptr,
            col_idx,
            values,
        },
        rhs,
    })
}
