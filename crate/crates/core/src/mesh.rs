//! Uniform grids on intervals and rectangles, nodal fields, and the
//! per-cell difference/average operators every other module builds on.
//!
//! All quadrature is cell based: an integral of a nodal expression is
//! `h * sum(cell values)`, where the cell value is either a forward
//! difference (gradients) or the arithmetic mean of the cell's nodes.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};

/// Uniform partition of `(0, L)` into `n_cells` cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    length: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(length: f64, n_cells: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return contract(format!("grid length must be positive and finite, got {length}"));
        }
        if n_cells < 4 {
            return contract(format!("grid needs at least 4 cells, got {n_cells}"));
        }
        Ok(Self { length, n_cells })
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_cells + 1
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.length / self.n_cells as f64
    }

    /// Node coordinate; the last node is pinned to `L` exactly.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.length
        } else {
            i as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes()).map(|i| self.node(i)).collect()
    }

    #[inline]
    pub fn midpoint(&self, cell: usize) -> f64 {
        0.5 * (self.node(cell) + self.node(cell + 1))
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.midpoint(i)).collect()
    }

    /// Index of the node sitting at `L/2`, if the cell count is even.
    pub fn center_node(&self) -> Option<usize> {
        self.n_cells.is_multiple_of(2).then_some(self.n_cells / 2)
    }

    /// Left half `(0, L/2)` of an even grid, with the same spacing.
    pub fn left_half(&self) -> Result<Grid1D> {
        match self.center_node() {
            Some(m) => Grid1D::new(0.5 * self.length, m),
            None => contract("left_half needs an even number of cells"),
        }
    }

    /// Sum of per-cell values times the cell width.
    pub fn integrate(&self, cell_values: &[f64]) -> f64 {
        debug_assert_eq!(cell_values.len(), self.n_cells);
        self.h() * cell_values.iter().sum::<f64>()
    }
}

/// Tensor-product grid on `(0, Lx) x (0, Ly)`; nodes are stored row-major
/// with `x` running fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    lx: f64,
    ly: f64,
    nx: usize,
    ny: usize,
}

impl Grid2D {
    pub fn new(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        // per-axis invariants are the 1D ones
        Grid1D::new(lx, nx)?;
        Grid1D::new(ly, ny)?;
        Ok(Self { lx, ly, nx, ny })
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    #[inline]
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    #[inline]
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn x_axis(&self) -> Grid1D {
        Grid1D { length: self.lx, n_cells: self.nx }
    }

    pub fn y_axis(&self) -> Grid1D {
        Grid1D { length: self.ly, n_cells: self.ny }
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x_axis().node(i), self.y_axis().node(j)]
    }

    #[inline]
    pub fn cell_center(&self, i: usize, j: usize) -> [f64; 2] {
        [self.x_axis().midpoint(i), self.y_axis().midpoint(j)]
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    pub fn integrate(&self, cell_values: &[f64]) -> f64 {
        debug_assert_eq!(cell_values.len(), self.n_cells());
        self.cell_area() * cell_values.iter().sum::<f64>()
    }
}

fn check_values(values: &[f64], expected: usize) -> Result<()> {
    if values.len() != expected {
        return contract(format!(
            "field has {} values but the grid has {expected} nodes",
            values.len()
        ));
    }
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return contract(format!("field value at node {i} is not finite"));
    }
    Ok(())
}

/// One real value per node of a [`Grid1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl NodalField1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.n_nodes())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(f).collect())
    }

    pub fn constant(grid: Grid1D, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n_nodes()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn ensure_grid(&self, grid: &Grid1D) -> Result<()> {
        if &self.grid != grid {
            return contract("field lives on a different grid");
        }
        Ok(())
    }

    /// Forward difference `(f[i+1] - f[i]) / h` per cell.
    pub fn cell_gradient(&self) -> Vec<f64> {
        cell_gradient_1d(&self.values, self.grid.h())
    }

    /// Mean of the two node values per cell.
    pub fn cell_average(&self) -> Vec<f64> {
        cell_average_1d(&self.values)
    }
}

pub(crate) fn cell_gradient_1d(values: &[f64], h: f64) -> Vec<f64> {
    values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
}

pub(crate) fn cell_average_1d(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Cell mean of `f` applied to the two node values.
pub(crate) fn cell_average_of_1d(values: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    values.windows(2).map(|w| 0.5 * (f(w[0]) + f(w[1]))).collect()
}

/// One real value per node of a [`Grid2D`].
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField2D {
    grid: Grid2D,
    values: Vec<f64>,
}

/// Per-cell directional differences of a 2D field: the two x-edges
/// (bottom, top) and the two y-edges (left, right), already divided by the
/// spacing.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeDiffs {
    pub dx_bottom: f64,
    pub dx_top: f64,
    pub dy_left: f64,
    pub dy_right: f64,
}

impl EdgeDiffs {
    /// Cell gradient: average of the edge differences along each axis.
    #[inline]
    pub fn gradient(&self) -> [f64; 2] {
        [0.5 * (self.dx_bottom + self.dx_top), 0.5 * (self.dy_left + self.dy_right)]
    }

    /// `|grad f|^2` as the mean of squared edge differences per axis.
    #[inline]
    pub fn grad_sq(&self) -> f64 {
        0.5 * (self.dx_bottom * self.dx_bottom + self.dx_top * self.dx_top)
            + 0.5 * (self.dy_left * self.dy_left + self.dy_right * self.dy_right)
    }

    /// `grad f (x) grad f` with diagonal entries consistent with `grad_sq`.
    #[inline]
    pub fn outer(&self) -> [[f64; 2]; 2] {
        let g = self.gradient();
        let xx = 0.5 * (self.dx_bottom * self.dx_bottom + self.dx_top * self.dx_top);
        let yy = 0.5 * (self.dy_left * self.dy_left + self.dy_right * self.dy_right);
        [[xx, g[0] * g[1]], [g[0] * g[1], yy]]
    }
}

impl NodalField2D {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        check_values(&values, grid.n_nodes())?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..=grid.ny() {
            for i in 0..=grid.nx() {
                let [x, y] = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        Self::new(grid, values)
    }

    pub fn constant(grid: Grid2D, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n_nodes()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn ensure_grid(&self, grid: &Grid2D) -> Result<()> {
        if &self.grid != grid {
            return contract("field lives on a different grid");
        }
        Ok(())
    }

    /// Per-cell gradient vector (average of edge differences per axis).
    pub fn cell_gradient(&self) -> Vec<[f64; 2]> {
        edge_diffs_2d(&self.grid, &self.values).iter().map(EdgeDiffs::gradient).collect()
    }

    /// Mean of the four corner values per cell.
    pub fn cell_average(&self) -> Vec<f64> {
        cell_average_of_2d(&self.grid, &self.values, |x| x)
    }
}

pub(crate) fn edge_diffs_2d(grid: &Grid2D, values: &[f64]) -> Vec<EdgeDiffs> {
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut out = Vec::with_capacity(grid.n_cells());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let f00 = values[grid.index(i, j)];
            let f10 = values[grid.index(i + 1, j)];
            let f01 = values[grid.index(i, j + 1)];
            let f11 = values[grid.index(i + 1, j + 1)];
            out.push(EdgeDiffs {
                dx_bottom: (f10 - f00) / hx,
                dx_top: (f11 - f01) / hx,
                dy_left: (f01 - f00) / hy,
                dy_right: (f11 - f10) / hy,
            });
        }
    }
    out
}

pub(crate) fn cell_average_of_2d(grid: &Grid2D, values: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.n_cells());
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let s = f(values[grid.index(i, j)])
                + f(values[grid.index(i + 1, j)])
                + f(values[grid.index(i, j + 1)])
                + f(values[grid.index(i + 1, j + 1)]);
            out.push(0.25 * s);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid1D::new(0.0, 8).is_err());
        assert!(Grid1D::new(f64::NAN, 8).is_err());
        assert!(Grid1D::new(1.0, 3).is_err());
        assert!(Grid2D::new(1.0, -1.0, 8, 8).is_err());
    }

    #[test]
    fn nodes_span_the_interval() {
        let g = Grid1D::new(2.0, 7).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(*x.last().unwrap(), 2.0);
        assert!(x.windows(2).all(|w| w[1] > w[0]));
        assert_relative_eq!(g.h() * g.n_cells() as f64, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gradient_of_affine_and_constant() {
        let g = Grid1D::new(2.0, 8).unwrap();
        let f = NodalField1D::from_fn(g, |x| x).unwrap();
        for d in f.cell_gradient() {
            assert_relative_eq!(d, 1.0, epsilon = 1e-14);
        }
        let c = NodalField1D::constant(g, 3.0).unwrap();
        assert!(c.cell_gradient().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn gradient_of_square_first_cell() {
        let g = Grid1D::new(1.0, 4).unwrap();
        let f = NodalField1D::from_fn(g, |x| x * x).unwrap();
        assert_relative_eq!(f.cell_gradient()[0], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn averages_and_midpoint_rule() {
        let g = Grid1D::new(1.0, 4).unwrap();
        let c = NodalField1D::constant(g, 2.5).unwrap();
        assert!(c.cell_average().iter().all(|&a| a == 2.5));
        let f = NodalField1D::from_fn(g, |x| x).unwrap();
        let avg = f.cell_average();
        for (i, a) in avg.iter().enumerate() {
            assert_relative_eq!(*a, 0.5 * (g.node(i) + g.node(i + 1)), epsilon = 1e-15);
        }
        assert_eq!(g.integrate(&avg), 0.5);
    }

    #[test]
    fn field_validation() {
        let g = Grid1D::new(1.0, 4).unwrap();
        assert!(NodalField1D::new(g, vec![0.0; 4]).is_err());
        assert!(NodalField1D::new(g, vec![0.0, 1.0, f64::INFINITY, 0.0, 0.0]).is_err());
        let other = Grid1D::new(1.0, 8).unwrap();
        let f = NodalField1D::constant(g, 1.0).unwrap();
        assert!(f.ensure_grid(&other).is_err());
    }

    #[test]
    fn gradient_2d_affine_exact() {
        let g = Grid2D::new(1.0, 2.0, 8, 6).unwrap();
        let f = NodalField2D::from_fn(g, |x, y| 3.0 * x - 0.5 * y + 1.0).unwrap();
        for d in f.cell_gradient() {
            assert_relative_eq!(d[0], 3.0, epsilon = 1e-13);
            assert_relative_eq!(d[1], -0.5, epsilon = 1e-13);
        }
        let diffs = edge_diffs_2d(&g, f.values());
        for d in diffs {
            assert_relative_eq!(d.grad_sq(), 9.25, epsilon = 1e-12);
            let m = d.outer();
            assert_relative_eq!(m[0][0] + m[1][1], d.grad_sq(), epsilon = 1e-14);
        }
    }

    #[test]
    fn center_node_requires_even() {
        assert_eq!(Grid1D::new(2.0, 8).unwrap().center_node(), Some(4));
        assert_eq!(Grid1D::new(2.0, 9).unwrap().center_node(), None);
        let half = Grid1D::new(2.0, 8).unwrap().left_half().unwrap();
        assert_eq!(half.n_cells(), 4);
        assert_eq!(half.h(), 0.25);
    }
}
