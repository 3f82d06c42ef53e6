//! Solvers for the two linear Euler-Lagrange equations of the alternating
//! scheme: the u-equation for fixed v and the v-equation for fixed u.
//!
//! Both are exact minimizers of the discrete energy in one variable. In 1D
//! the u-equation has coefficient `k_i = eta + avg_i(v^2)` per cell and is
//! solved in closed form through its constant flux; the v-equation is a
//! symmetric tridiagonal M-matrix system. In 2D both are 5-point M-matrix
//! systems solved by Jacobi-preconditioned conjugate gradients started from
//! the current iterate.

use serde::{Deserialize, Serialize};

use crate::energy::{Parameters, PhaseField1D, PhaseField2D};
use crate::error::{contract, Error, Result};
use crate::mesh::{cell_average_of_1d, cell_average_of_2d, cell_gradient_1d, edge_diffs_2d, Grid2D, NodalField1D, NodalField2D};

/// Stopping rule for the iterative 2D solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinearSolveConfig {
    /// Relative residual `|r| / |b - A x_0|`, or absolute when the initial residual is tiny.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LinearSolveConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 20_000 }
    }
}

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
///
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return contract("tridiagonal bands and right-hand side must have equal length");
    }
    if n == 0 {
        return Ok(vec![]);
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < f64::MIN_POSITIVE {
        return Err(Error::Solver("zero pivot in tridiagonal solve".into()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv.abs() < f64::MIN_POSITIVE {
            return Err(Error::Solver("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { sup[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// The 1D u-minimizer for fixed v with `u(0) = g0`, `u(end) = g1`.
///
/// Returns nodal values and the flux `c = k_i du_i`, equal on every cell.
pub fn u_given_v_1d(h: f64, v: &[f64], eta: f64, g: (f64, f64)) -> Result<(Vec<f64>, f64)> {
    let k: Vec<f64> = cell_average_of_1d(v, |x| x * x).into_iter().map(|s| eta + s).collect();
    if k.iter().any(|&ki| !(ki > 0.0)) {
        return contract("u-solve needs eta + v^2 > 0 on every cell (eta = 0 with v = 0 somewhere)");
    }
    let resist: Vec<f64> = k.iter().map(|&ki| h / ki).collect();
    let total: f64 = resist.iter().sum();
    let flux = (g.1 - g.0) / total;
    let mut u = Vec::with_capacity(v.len());
    let mut acc = 0.0;
    u.push(g.0);
    for r in &resist[..resist.len() - 1] {
        acc += r;
        u.push(g.0 + flux * acc);
    }
    u.push(g.1);
    Ok((u, flux))
}

/// Condition imposed on v at the right end of a 1D interval; the left end is always `v = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VEnd {
    Dirichlet(f64),
    /// Zero-flux end: the minimizer is free at the last node.
    Natural,
}

/// The 1D v-minimizer for fixed u.
///
/// The system is solved for the defect `1 - v`, whose right-hand side is the
/// node-averaged `h |u'|^2`; constant u therefore returns `v = 1` exactly.
pub fn v_given_u_1d(h: f64, u: &[f64], params: Parameters, end: VEnd) -> Result<Vec<f64>> {
    let n = u.len() - 1;
    if n < 2 {
        return contract("v-solve needs at least two cells");
    }
    let eps = params.eps;
    let gsq: Vec<f64> = cell_gradient_1d(u, h).into_iter().map(|d| d * d).collect();
    let off = -eps / h;
    let react = h / (4.0 * eps);
    // unknowns: nodes 1..n-1, plus node n when the end is natural
    let m = match end {
        VEnd::Dirichlet(_) => n - 1,
        VEnd::Natural => n,
    };
    let mut sub = vec![off; m];
    let mut sup = vec![off; m];
    let mut diag = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for row in 0..m {
        let j = row + 1;
        if j < n {
            let gbar = 0.5 * h * (gsq[j - 1] + gsq[j]);
            diag[row] = 2.0 * eps / h + gbar + react;
            rhs[row] = gbar;
        } else {
            let gbar = 0.5 * h * gsq[n - 1];
            diag[row] = eps / h + gbar + 0.5 * react;
            rhs[row] = gbar;
        }
    }
    if let VEnd::Dirichlet(alpha) = end {
        rhs[m - 1] += (1.0 - alpha) * eps / h;
    }
    sub[0] = 0.0;
    sup[m - 1] = 0.0;
    let defect = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    let mut v = Vec::with_capacity(n + 1);
    v.push(1.0);
    v.extend(defect.iter().map(|w| 1.0 - w));
    if let VEnd::Dirichlet(alpha) = end {
        v.push(alpha);
    }
    Ok(v)
}

/// Weak-form residuals of the 1D system tested against interior hat functions.
///
/// Entry `j - 1` of each vector is half the partial derivative of the
/// discrete energy in the `j`-th nodal value, for every unknown node `j`.
/// With a natural right end the last v-row belongs to the end node.
pub(crate) fn weak_residuals_1d(h: f64, u: &[f64], v: &[f64], params: Parameters, end: VEnd) -> (Vec<f64>, Vec<f64>) {
    let n = u.len() - 1;
    let eps = params.eps;
    let du = cell_gradient_1d(u, h);
    let dv = cell_gradient_1d(v, h);
    let k: Vec<f64> = cell_average_of_1d(v, |x| x * x).into_iter().map(|s| params.eta + s).collect();
    let ru: Vec<f64> = (1..n).map(|j| k[j - 1] * du[j - 1] - k[j] * du[j]).collect();
    let last = match end {
        VEnd::Dirichlet(_) => n - 1,
        VEnd::Natural => n,
    };
    let rv: Vec<f64> = (1..=last)
        .map(|j| {
            let mut r = eps * dv[j - 1] + 0.5 * h * v[j] * du[j - 1] * du[j - 1] + 0.5 * h * (v[j] - 1.0) / (4.0 * eps);
            if j < n {
                r += -eps * dv[j] + 0.5 * h * v[j] * du[j] * du[j] + 0.5 * h * (v[j] - 1.0) / (4.0 * eps);
            }
            r
        })
        .collect();
    (ru, rv)
}

/// Mesh-weighted norm `sqrt(sum r_j^2 / h)` of a residual vector, the
/// discrete analogue of the strong-form L2 norm.
pub(crate) fn residual_norm(r: &[f64], measure: f64) -> f64 {
    (r.iter().map(|x| x * x).sum::<f64>() / measure).sqrt()
}

/// Replace u by the exact minimizer for the current v.
pub fn solve_u_1d(state: &PhaseField1D) -> Result<PhaseField1D> {
    let (u, _) = u_given_v_1d(state.grid().h(), state.v().values(), state.eta(), state.boundary())?;
    state.with_u(NodalField1D::new(*state.grid(), u)?)
}

/// Replace v by the exact minimizer for the current u.
pub fn solve_v_1d(state: &PhaseField1D) -> Result<PhaseField1D> {
    let v = v_given_u_1d(state.grid().h(), state.u().values(), state.params(), VEnd::Dirichlet(1.0))?;
    state.with_v(NodalField1D::new(*state.grid(), v)?)
}

/// Symmetric 5-point operator on the nodes of a rectangle, acting on
/// interior nodes with the boundary held fixed.
///
/// `(A x)_p = diag_p x_p - sum_{q ~ p} w_pq x_q`.
#[derive(Clone, Debug)]
pub(crate) struct Stencil2D {
    grid: Grid2D,
    /// Weight of the edge from node (i, j) to (i + 1, j), indexed by that node.
    wx: Vec<f64>,
    /// Weight of the edge from node (i, j) to (i, j + 1).
    wy: Vec<f64>,
    diag: Vec<f64>,
}

impl Stencil2D {
    /// Stencil of `sum_c a * coef_c * |grad x|^2_c + sum_p react_p x_p^2 / 2`.
    ///
    /// With `|grad x|^2_c` the mean of the squared edge differences, the
    /// weight of each edge is `hy / (2 hx)` (or `hx / (2 hy)`) times the sum
    /// of the coefficients of its adjacent cells.
    fn new(grid: Grid2D, cell_coef: &[f64], react: Option<&[f64]>) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let (hx, hy) = (grid.hx(), grid.hy());
        let mut wx = vec![0.0; grid.n_nodes()];
        let mut wy = vec![0.0; grid.n_nodes()];
        for j in 0..=ny {
            for i in 0..nx {
                let mut s = 0.0;
                if j > 0 {
                    s += cell_coef[grid.cell_index(i, j - 1)];
                }
                if j < ny {
                    s += cell_coef[grid.cell_index(i, j)];
                }
                wx[grid.index(i, j)] = hy / (2.0 * hx) * s;
            }
        }
        for j in 0..ny {
            for i in 0..=nx {
                let mut s = 0.0;
                if i > 0 {
                    s += cell_coef[grid.cell_index(i - 1, j)];
                }
                if i < nx {
                    s += cell_coef[grid.cell_index(i, j)];
                }
                wy[grid.index(i, j)] = hx / (2.0 * hy) * s;
            }
        }
        let mut diag = vec![0.0; grid.n_nodes()];
        for j in 0..=ny {
            for i in 0..=nx {
                let p = grid.index(i, j);
                let mut d = 0.0;
                if i < nx {
                    d += wx[p];
                }
                if i > 0 {
                    d += wx[grid.index(i - 1, j)];
                }
                if j < ny {
                    d += wy[p];
                }
                if j > 0 {
                    d += wy[grid.index(i, j - 1)];
                }
                if let Some(r) = react {
                    d += r[p];
                }
                diag[p] = d;
            }
        }
        Self { grid, wx, wy, diag }
    }

    /// `y = A x` on interior rows; boundary rows of `y` are zero.
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let stride = nx + 1;
        for j in 0..=ny {
            for i in 0..=nx {
                let p = g.index(i, j);
                if g.is_boundary(i, j) {
                    y[p] = 0.0;
                    continue;
                }
                y[p] = self.diag[p] * x[p]
                    - self.wx[p] * x[p + 1]
                    - self.wx[p - 1] * x[p - 1]
                    - self.wy[p] * x[p + stride]
                    - self.wy[p - stride] * x[p - stride];
            }
        }
    }

    /// Solve `A x = b` on interior nodes starting from `x`, which also holds
    /// the fixed boundary values. Returns the iteration count.
    fn solve_pcg(&self, b: &[f64], x: &mut [f64], cfg: LinearSolveConfig, what: &'static str) -> Result<usize> {
        let g = &self.grid;
        let n = g.n_nodes();
        let interior: Vec<bool> = (0..n)
            .map(|p| {
                let (i, j) = (p % (g.nx() + 1), p / (g.nx() + 1));
                !g.is_boundary(i, j)
            })
            .collect();
        let mut ax = vec![0.0; n];
        self.apply(x, &mut ax);
        let mut r: Vec<f64> = (0..n).map(|p| if interior[p] { b[p] - ax[p] } else { 0.0 }).collect();
        let bnorm = (0..n).filter(|&p| interior[p]).map(|p| b[p] * b[p]).sum::<f64>().sqrt();
        let r0 = dot(&r, &r).sqrt();
        // absolute floor relative to the right-hand side keeps warm starts from chasing round-off
        let target = cfg.tol * r0.max(bnorm * 1e-4).max(f64::MIN_POSITIVE);
        if r0 <= target || r0 == 0.0 {
            return Ok(0);
        }
        let minv: Vec<f64> = (0..n).map(|p| if interior[p] { 1.0 / self.diag[p] } else { 0.0 }).collect();
        let mut z: Vec<f64> = r.iter().zip(&minv).map(|(a, m)| a * m).collect();
        let mut dir = z.clone();
        let mut rz = dot(&r, &z);
        let mut ad = vec![0.0; n];
        for it in 1..=cfg.max_iter {
            self.apply(&dir, &mut ad);
            let dad = dot(&dir, &ad);
            if !(dad > 0.0) {
                return Err(Error::Solver(format!("{what}: operator lost positivity")));
            }
            let alpha = rz / dad;
            for p in 0..n {
                x[p] += alpha * dir[p];
                r[p] -= alpha * ad[p];
            }
            let rn = dot(&r, &r).sqrt();
            if rn <= target {
                return Ok(it);
            }
            for p in 0..n {
                z[p] = r[p] * minv[p];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for p in 0..n {
                dir[p] = z[p] + beta * dir[p];
            }
        }
        Err(Error::NonConvergence { what, iterations: cfg.max_iter, residual: dot(&r, &r).sqrt() / r0 })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lumped nodal mass `area * (#adjacent cells) / 4`.
pub(crate) fn lumped_mass_2d(grid: &Grid2D) -> Vec<f64> {
    let mut m = vec![0.0; grid.n_nodes()];
    let q = grid.cell_area() / 4.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                m[grid.index(a, b)] += q;
            }
        }
    }
    m
}

fn u_operator_2d(grid: &Grid2D, v: &[f64], eta: f64) -> Result<Stencil2D> {
    let coef: Vec<f64> = cell_average_of_2d(grid, v, |x| x * x).into_iter().map(|s| eta + s).collect();
    if coef.iter().any(|&c| !(c > 0.0)) {
        return contract("u-solve needs eta + v^2 > 0 on every cell");
    }
    Ok(Stencil2D::new(*grid, &coef, None))
}

/// Operator and right-hand side of the v-equation for fixed u.
fn v_operator_2d(grid: &Grid2D, u: &[f64], eps: f64) -> (Stencil2D, Vec<f64>) {
    let gsq: Vec<f64> = edge_diffs_2d(grid, u).iter().map(|d| d.grad_sq()).collect();
    let mass = lumped_mass_2d(grid);
    let q = grid.cell_area() / 4.0;
    let mut react: Vec<f64> = mass.iter().map(|m| m / (4.0 * eps)).collect();
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let gc = gsq[grid.cell_index(i, j)];
            for (a, b) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                react[grid.index(a, b)] += q * gc;
            }
        }
    }
    let coef = vec![eps; grid.n_cells()];
    let b = mass.iter().map(|m| m / (4.0 * eps)).collect();
    (Stencil2D::new(*grid, &coef, Some(&react)), b)
}

/// u-minimizer for fixed v on a rectangle, warm-started from the state's u.
pub fn solve_u_2d(state: &PhaseField2D, cfg: LinearSolveConfig) -> Result<PhaseField2D> {
    let grid = *state.grid();
    let op = u_operator_2d(&grid, state.v().values(), state.eta())?;
    let mut u = state.u().values().to_vec();
    let b = vec![0.0; grid.n_nodes()];
    op.solve_pcg(&b, &mut u, cfg, "2D u-solve")?;
    state.with_u(NodalField2D::new(grid, u)?)
}

/// v-minimizer for fixed u on a rectangle, warm-started from the state's v.
pub fn solve_v_2d(state: &PhaseField2D, cfg: LinearSolveConfig) -> Result<PhaseField2D> {
    let grid = *state.grid();
    let (op, b) = v_operator_2d(&grid, state.u().values(), state.eps());
    let mut v = state.v().values().to_vec();
    op.solve_pcg(&b, &mut v, cfg, "2D v-solve")?;
    state.with_v(NodalField2D::new(grid, v)?)
}

/// Weak-form residuals of the 2D system as full nodal vectors, zero on the boundary.
pub(crate) fn weak_residuals_2d(grid: &Grid2D, u: &[f64], v: &[f64], params: Parameters) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut ru = vec![0.0; grid.n_nodes()];
    u_operator_2d(grid, v, params.eta)?.apply(u, &mut ru);
    let (op, b) = v_operator_2d(grid, u, params.eps);
    let mut rv = vec![0.0; grid.n_nodes()];
    op.apply(v, &mut rv);
    for j in 0..=grid.ny() {
        for i in 0..=grid.nx() {
            if !grid.is_boundary(i, j) {
                let p = grid.index(i, j);
                rv[p] -= b[p];
            }
        }
    }
    Ok((ru, rv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{at_energy, at_energy_2d, energy_of_arrays_1d};
    use crate::mesh::Grid1D;
    use approx::assert_relative_eq;

    #[test]
    fn thomas_matches_dense() {
        let sub = [0.0, -1.0, -1.0, -1.0];
        let diag = [4.0, 4.0, 4.0, 4.0];
        let sup = [-1.0, -1.0, -1.0, 0.0];
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x_true[i];
                if i > 0 {
                    s += sub[i] * x_true[i - 1];
                }
                if i < 3 {
                    s += sup[i] * x_true[i + 1];
                }
                s
            })
            .collect();
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (a, b) in x.iter().zip(x_true) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn u_solve_has_constant_flux() {
        let grid = Grid1D::new(2.0, 50).unwrap();
        let v: Vec<f64> = grid.nodes().iter().map(|&x| 0.3 + 0.7 * ((x - 1.0) / 1.0).powi(2)).collect();
        let (u, flux) = u_given_v_1d(grid.h(), &v, 1e-2, (0.0, 1.0)).unwrap();
        let k: Vec<f64> = cell_average_of_1d(&v, |x| x * x).iter().map(|s| 1e-2 + s).collect();
        for (i, d) in cell_gradient_1d(&u, grid.h()).iter().enumerate() {
            assert_relative_eq!(k[i] * d, flux, max_relative = 1e-12);
        }
        assert_eq!(u[50], 1.0);
    }

    fn perturbed_energy_not_lower(h: f64, u: &[f64], v: &[f64], params: Parameters, which_v: bool) {
        let e0 = energy_of_arrays_1d(h, u, v, params).total;
        for j in 1..u.len() - 1 {
            for s in [1e-4, -1e-4] {
                let (mut u2, mut v2) = (u.to_vec(), v.to_vec());
                if which_v {
                    v2[j] += s;
                } else {
                    u2[j] += s;
                }
                assert!(energy_of_arrays_1d(h, &u2, &v2, params).total >= e0 - 1e-15);
            }
        }
    }

    #[test]
    fn solves_are_exact_minimizers() {
        let params = Parameters::new(0.1, 0.01).unwrap();
        let grid = Grid1D::new(1.0, 20).unwrap();
        let h = grid.h();
        let v0: Vec<f64> = grid.nodes().iter().map(|&x| 1.0 - 0.8 * (std::f64::consts::PI * x).sin()).collect();
        let (u, _) = u_given_v_1d(h, &v0, params.eta, (0.0, 2.0)).unwrap();
        perturbed_energy_not_lower(h, &u, &v0, params, false);
        let v = v_given_u_1d(h, &u, params, VEnd::Dirichlet(1.0)).unwrap();
        perturbed_energy_not_lower(h, &u, &v, params, true);
        assert!(v.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn natural_end_is_stationary() {
        let params = Parameters::new(0.05, 0.0025).unwrap();
        let grid = Grid1D::new(1.0, 40).unwrap();
        let h = grid.h();
        let u: Vec<f64> = grid.nodes().iter().map(|&x| x * x).collect();
        let v = v_given_u_1d(h, &u, params, VEnd::Natural).unwrap();
        let e0 = energy_of_arrays_1d(h, &u, &v, params).total;
        let n = v.len() - 1;
        for s in [1e-5, -1e-5] {
            let mut v2 = v.clone();
            v2[n] += s;
            assert!(energy_of_arrays_1d(h, &u, &v2, params).total > e0);
        }
    }

    #[test]
    fn state_wrappers_decrease_energy() {
        let grid = Grid1D::new(2.0, 64).unwrap();
        let v = NodalField1D::from_fn(grid, |x| 1.0 - 0.9 * (-(x - 1.0).powi(2) / 0.01).exp()).unwrap();
        let s0 = PhaseField1D::with_linear_u(v, Parameters::with_eps2(0.1).unwrap(), (0.0, 1.0)).unwrap();
        let s1 = solve_u_1d(&s0).unwrap();
        let s2 = solve_v_1d(&s1).unwrap();
        let (e0, e1, e2) = (at_energy(&s0).total, at_energy(&s1).total, at_energy(&s2).total);
        assert!(e1 <= e0 && e2 <= e1);
    }

    #[test]
    fn pcg_u_solve_reproduces_affine() {
        let grid = Grid2D::new(1.0, 1.0, 12, 10).unwrap();
        let g = NodalField2D::from_fn(grid, |x, y| 2.0 * x - y).unwrap();
        let params = Parameters::with_eps2(0.1).unwrap();
        // start from a perturbed interior
        let mut u0 = g.values().to_vec();
        for (p, val) in u0.iter_mut().enumerate() {
            let (i, j) = (p % 13, p / 13);
            if !grid.is_boundary(i, j) {
                *val += 0.3 * ((i * j) as f64).sin();
            }
        }
        let s = PhaseField2D::new(NodalField2D::new(grid, u0).unwrap(), NodalField2D::constant(grid, 1.0).unwrap(), params, g.clone())
            .unwrap();
        let s = solve_u_2d(&s, LinearSolveConfig::default()).unwrap();
        for (a, b) in s.u().values().iter().zip(g.values()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn pcg_v_solve_is_minimizer_in_unit_interval() {
        let grid = Grid2D::new(1.0, 1.0, 10, 10).unwrap();
        let g = NodalField2D::from_fn(grid, |x, y| 3.0 * (x * y)).unwrap();
        let params = Parameters::with_eps2(0.1).unwrap();
        let s = PhaseField2D::from_extension(g, params).unwrap();
        let s1 = solve_v_2d(&s, LinearSolveConfig::default()).unwrap();
        assert!(s1.v().values().iter().all(|&x| (0.0..=1.0 + 1e-14).contains(&x)));
        let e1 = at_energy_2d(&s1).total;
        assert!(e1 < at_energy_2d(&s).total);
        let p = grid.index(4, 6);
        for d in [1e-4, -1e-4] {
            let mut v = s1.v().values().to_vec();
            v[p] += d;
            let s2 = s1.with_v(NodalField2D::new(grid, v).unwrap()).unwrap();
            assert!(at_energy_2d(&s2).total >= e1 - 1e-14);
        }
    }
}
