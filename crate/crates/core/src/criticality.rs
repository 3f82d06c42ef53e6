//! A-posteriori checks that a state is a discrete critical point, the 1D
//! conservation laws, branch classification and the inner-variation
//! (Noether) balance.

use serde::{Deserialize, Serialize};

use crate::elliptic::{residual_norm, weak_residuals_1d, weak_residuals_2d, VEnd};
use crate::energy::{Cells1D, Cells2D, PhaseField1D, PhaseField2D};
use crate::error::{contract, Result};
use crate::mesh::{Grid2D, NodalField1D};
use crate::variations::{VectorField1D, VectorField2D};

/// Default constant in the branch thresholds `sqrt(Cstar eps)`.
pub const DEFAULT_CSTAR: f64 = 1.0;
/// Differences smaller than this do not count as a change of monotonicity.
pub const UNIMODAL_TOL: f64 = 1e-9;
/// Nodes within this distance of the minimum belong to the argmin tie set.
pub const ARGMIN_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Affine,
    Jump,
    Indeterminate,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Affine => "affine",
            Branch::Jump => "jump",
            Branch::Indeterminate => "indeterminate",
        }
    }
}

/// One-dimensional criticality diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub u_residual_norm: f64,
    pub v_residual_norm: f64,
    pub flux_values: Vec<f64>,
    pub flux_mean: f64,
    pub flux_dev: f64,
    pub discrepancy_values: Vec<f64>,
    pub discrepancy_mean: f64,
    pub discrepancy_dev: f64,
    pub v_min: f64,
    pub v_argmin: f64,
    pub argmin_on_boundary: bool,
    pub is_unimodal: bool,
    pub symmetry_dev: f64,
    /// `v(L/2)`; absent when no node sits at the midpoint.
    pub v_mid: Option<f64>,
    pub branch: Branch,
    pub cstar: f64,
    /// `(eta + 1) (d_nu u)^2 + eps (d_nu v)^2` at the left and right ends.
    pub boundary_flux: [f64; 2],
}

/// Mesh-weighted norms of the u and v weak residuals over interior hat functions.
pub fn residuals(state: &PhaseField1D) -> (f64, f64) {
    let h = state.grid().h();
    let (ru, rv) = weak_residuals_1d(h, state.u().values(), state.v().values(), state.params(), VEnd::Dirichlet(1.0));
    (residual_norm(&ru, h), residual_norm(&rv, h))
}

fn mean_and_dev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let dev = values.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max);
    (mean, dev)
}

/// Per-cell fluxes `(eta + v^2) u'` with the cell quadrature of the energy.
pub fn flux_values(state: &PhaseField1D) -> Vec<f64> {
    let c = Cells1D::new(state.grid().h(), state.u().values(), state.v().values(), state.params());
    c.coef.iter().zip(&c.du).map(|(k, d)| k * d).collect()
}

/// `(c, flux_dev)`: mean flux and maximal deviation from it.
pub fn flux_constant(state: &PhaseField1D) -> (f64, f64) {
    mean_and_dev(&flux_values(state))
}

/// Per-cell `(1 - v)^2 / (4 eps) - eps v'^2 - (eta + v^2) u'^2`.
pub fn discrepancy_values(state: &PhaseField1D) -> Vec<f64> {
    let c = Cells1D::new(state.grid().h(), state.u().values(), state.v().values(), state.params());
    let eps = state.eps();
    (0..c.len()).map(|i| c.potential[i] - eps * c.dv[i] * c.dv[i] - c.coef[i] * c.du[i] * c.du[i]).collect()
}

/// `(d, discrepancy_dev, per-cell values)`.
pub fn discrepancy(state: &PhaseField1D) -> (f64, f64, Vec<f64>) {
    let vals = discrepancy_values(state);
    let (d, dev) = mean_and_dev(&vals);
    (d, dev, vals)
}

/// Branch from the midpoint value: jump below `sqrt(Cstar eps)`, affine above
/// `1 - sqrt(Cstar eps)`. When both thresholds hold (large `Cstar eps`) the
/// state is indeterminate.
pub fn classify_v_mid(v_mid: f64, eps: f64, cstar: f64) -> Branch {
    let t = (cstar * eps).sqrt();
    let jump = v_mid <= t;
    let affine = v_mid >= 1.0 - t;
    match (jump, affine) {
        (true, false) => Branch::Jump,
        (false, true) => Branch::Affine,
        _ => Branch::Indeterminate,
    }
}

/// Classify a state by its value at the node `L/2`.
pub fn classify_branch(state: &PhaseField1D, cstar: f64) -> Result<Branch> {
    if !(cstar > 0.0) {
        return contract(format!("Cstar must be positive, got {cstar}"));
    }
    let Some(mid) = state.grid().center_node() else {
        return contract("classification needs a grid node at L/2 (even cell count)");
    };
    Ok(classify_v_mid(state.v().values()[mid], state.eps(), cstar))
}

/// Shape of v: mirror symmetry, unimodality, location of the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    /// `max |v(x_i) - v(L - x_i)|` over interior nodes.
    pub symmetry_dev: f64,
    pub is_unimodal: bool,
    pub v_min: f64,
    pub v_argmin: f64,
    pub argmin_on_boundary: bool,
}

/// Shape diagnostics of the v field of a state.
pub fn symmetry_monotonicity_check(state: &PhaseField1D) -> ShapeReport {
    shape_of(state.v())
}

/// Shape diagnostics of any nodal field. The argmin of a flat minimum is the
/// centre of its tie set (nodes within [`ARGMIN_TIE_TOL`] of the minimum).
pub fn shape_of(field: &NodalField1D) -> ShapeReport {
    let v = field.values();
    let n = v.len() - 1;
    let symmetry_dev = (1..n).map(|i| (v[i] - v[n - i]).abs()).fold(0.0, f64::max);
    let mut rising = false;
    let mut is_unimodal = true;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d > UNIMODAL_TOL {
            rising = true;
        } else if d < -UNIMODAL_TOL && rising {
            is_unimodal = false;
        }
    }
    let v_min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = (0..=n).filter(|&i| v[i] <= v_min + ARGMIN_TIE_TOL).collect();
    let first = ties[0];
    let last = *ties.last().expect("non-empty");
    let k = (first + last) / 2;
    ShapeReport {
        symmetry_dev,
        is_unimodal,
        v_min,
        v_argmin: field.grid().node(k),
        argmin_on_boundary: k == 0 || k == n,
    }
}

/// Second-order one-sided derivative at the first of three equispaced values,
/// in the direction from `f0` toward `f2`.
#[inline]
fn one_sided(f0: f64, f1: f64, f2: f64, h: f64) -> f64 {
    (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
}

/// Outward normal derivatives `(d_nu u, d_nu v)` at both ends.
fn end_normal_derivatives(state: &PhaseField1D) -> [(f64, f64); 2] {
    let h = state.grid().h();
    let (u, v) = (state.u().values(), state.v().values());
    let n = u.len() - 1;
    if n < 2 {
        let du = (u[1] - u[0]) / h;
        let dv = (v[1] - v[0]) / h;
        return [(-du, -dv), (du, dv)];
    }
    [
        (-one_sided(u[0], u[1], u[2], h), -one_sided(v[0], v[1], v[2], h)),
        (-one_sided(u[n], u[n - 1], u[n - 2], h), -one_sided(v[n], v[n - 1], v[n - 2], h)),
    ]
}

/// `(eta + 1) (d_nu u)^2 + eps (d_nu v)^2` at the left and right ends.
pub fn boundary_flux_1d(state: &PhaseField1D) -> [f64; 2] {
    let k = state.eta() + 1.0;
    end_normal_derivatives(state).map(|(du, dv)| k * du * du + state.eps() * dv * dv)
}

/// Absolute mismatch of the 1D inner-variation balance: the volume term
/// `-int d X'` against the boundary term, which vanishes for tangential `X`.
pub fn noether_residual(state: &PhaseField1D, field: &VectorField1D) -> Result<f64> {
    let grid = state.grid();
    field.ensure_tangential(grid.length())?;
    let d = discrepancy_values(state);
    let lhs: f64 = -grid.h() * d.iter().zip(grid.midpoints()).map(|(di, m)| di * field.jet(m)[1]).sum::<f64>();
    let flux = boundary_flux_1d(state);
    let rhs = -flux[0] * field.value(0.0) + flux[1] * field.value(grid.length());
    Ok((lhs - rhs).abs())
}

/// Residual norms of a 2D state.
pub fn residuals_2d(state: &PhaseField2D) -> Result<(f64, f64)> {
    let grid = state.grid();
    let (ru, rv) = weak_residuals_2d(grid, state.u().values(), state.v().values(), state.params())?;
    let a = grid.cell_area();
    Ok((residual_norm(&ru, a), residual_norm(&rv, a)))
}

/// Two-dimensional criticality diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalityReport2D {
    pub u_residual_norm: f64,
    pub v_residual_norm: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub u_abs_max: f64,
}

pub fn report_2d(state: &PhaseField2D) -> Result<CriticalityReport2D> {
    let (ur, vr) = residuals_2d(state)?;
    let v = state.v().values();
    Ok(CriticalityReport2D {
        u_residual_norm: ur,
        v_residual_norm: vr,
        v_min: v.iter().copied().fold(f64::INFINITY, f64::min),
        v_max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        u_abs_max: state.u().values().iter().fold(0.0, |m, x| m.max(x.abs())),
    })
}

/// Side of the rectangle, used for the boundary integrals.
#[derive(Clone, Copy, Debug)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Boundary integrand samples of one side: `(position along the side, value)`.
fn side_integral(grid: &Grid2D, state: &PhaseField2D, field: &VectorField2D, side: Side) -> f64 {
    let (u, v, g) = (state.u().values(), state.v().values(), state.g().values());
    let k = state.eta() + 1.0;
    let eps = state.eps();
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (grid.hx(), grid.hy());
    // number of nodes along the side, spacing along it, spacing across it
    let (m, ht, hn) = match side {
        Side::Left | Side::Right => (ny, hy, hx),
        Side::Bottom | Side::Top => (nx, hx, hy),
    };
    // node index of the s-th node along the side, r-th layer inward
    let at = |s: usize, r: usize| -> usize {
        match side {
            Side::Left => grid.index(r, s),
            Side::Right => grid.index(nx - r, s),
            Side::Bottom => grid.index(s, r),
            Side::Top => grid.index(s, ny - r),
        }
    };
    let (normal, tangent) = match side {
        Side::Left => ([-1.0, 0.0], [0.0, 1.0]),
        Side::Right => ([1.0, 0.0], [0.0, 1.0]),
        Side::Bottom => ([0.0, -1.0], [1.0, 0.0]),
        Side::Top => ([0.0, 1.0], [1.0, 0.0]),
    };
    let mut total = 0.0;
    for s in 0..=m {
        let p = at(s, 0);
        let dnu = |f: &[f64]| -one_sided(f[p], f[at(s, 1)], f[at(s, 2)], hn);
        let (du, dv) = (dnu(u), dnu(v));
        let dtg = if s == 0 {
            one_sided(g[at(0, 0)], g[at(1, 0)], g[at(2, 0)], ht)
        } else if s == m {
            -one_sided(g[at(m, 0)], g[at(m - 1, 0)], g[at(m - 2, 0)], ht)
        } else {
            (g[at(s + 1, 0)] - g[at(s - 1, 0)]) / (2.0 * ht)
        };
        let pos = grid.node(p % (nx + 1), p / (nx + 1));
        let (xv, _) = field.eval(pos[0], pos[1]);
        let xn = xv[0] * normal[0] + xv[1] * normal[1];
        let xt = xv[0] * tangent[0] + xv[1] * tangent[1];
        let f = (k * du * du + eps * dv * dv - k * dtg * dtg) * xn + 2.0 * k * du * xt * dtg;
        let w = if s == 0 || s == m { 0.5 } else { 1.0 };
        total += w * ht * f;
    }
    total
}

/// Volume side of the 2D inner-variation balance.
fn noether_volume_2d(state: &PhaseField2D, field: &VectorField2D) -> f64 {
    let grid = state.grid();
    let c = Cells2D::new(grid, state.u().values(), state.v().values(), state.params());
    let eps = state.eps();
    let mut total = 0.0;
    for j in 0..grid.ny() {
        for i in 0..grid.nx() {
            let q = grid.cell_index(i, j);
            let [x, y] = grid.cell_center(i, j);
            let (_, dx) = field.eval(x, y);
            let tr = dx[0][0] + dx[1][1];
            let contract_outer =
                |m: &[[f64; 2]; 2]| m[0][0] * dx[0][0] + m[0][1] * dx[0][1] + m[1][0] * dx[1][0] + m[1][1] * dx[1][1];
            let bulk = c.coef[q] * (2.0 * contract_outer(&c.u_outer[q]) - c.u_sq[q] * tr);
            let surf = 2.0 * eps * contract_outer(&c.v_outer[q]) - (eps * c.v_sq[q] + c.potential[q]) * tr;
            total += bulk + surf;
        }
    }
    grid.cell_area() * total
}

/// Absolute mismatch between the volume and boundary sides of the 2D
/// inner-variation balance for a field tangential on the boundary. Normal
/// derivatives use second-order one-sided differences and the boundary
/// integrals the trapezoid rule.
pub fn noether_residual_2d(state: &PhaseField2D, field: &VectorField2D) -> Result<f64> {
    let grid = state.grid();
    if grid.nx() < 2 || grid.ny() < 2 {
        return contract("the 2D balance needs at least two cells per direction");
    }
    field.ensure_tangential(grid)?;
    let lhs = noether_volume_2d(state, field);
    let rhs: f64 =
        [Side::Left, Side::Right, Side::Bottom, Side::Top].iter().map(|&s| side_integral(grid, state, field, s)).sum();
    Ok((lhs - rhs).abs())
}

/// Full 1D report with the given `Cstar`.
pub fn report(state: &PhaseField1D, cstar: f64) -> Result<CriticalityReport> {
    let (u_residual_norm, v_residual_norm) = residuals(state);
    let flux_values = flux_values(state);
    let (flux_mean, flux_dev) = mean_and_dev(&flux_values);
    let (discrepancy_mean, discrepancy_dev, discrepancy_values) = discrepancy(state);
    let shape = symmetry_monotonicity_check(state);
    let v_mid = state.grid().center_node().map(|m| state.v().values()[m]);
    let branch = match v_mid {
        Some(vm) => {
            if !(cstar > 0.0) {
                return contract(format!("Cstar must be positive, got {cstar}"));
            }
            classify_v_mid(vm, state.eps(), cstar)
        }
        None => Branch::Indeterminate,
    };
    Ok(CriticalityReport {
        u_residual_norm,
        v_residual_norm,
        flux_values,
        flux_mean,
        flux_dev,
        discrepancy_values,
        discrepancy_mean,
        discrepancy_dev,
        v_min: shape.v_min,
        v_argmin: shape.v_argmin,
        argmin_on_boundary: shape.argmin_on_boundary,
        is_unimodal: shape.is_unimodal,
        symmetry_dev: shape.symmetry_dev,
        v_mid,
        branch,
        cstar,
        boundary_flux: boundary_flux_1d(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::Parameters;
    use crate::mesh::{Grid1D, NodalField2D};
    use approx::assert_relative_eq;

    fn linear_state(n: usize, a: f64, eta: f64) -> PhaseField1D {
        let grid = Grid1D::new(2.0, n).unwrap();
        let p = Parameters::new(0.1, eta).unwrap();
        PhaseField1D::with_linear_u(NodalField1D::constant(grid, 1.0).unwrap(), p, (0.0, a)).unwrap()
    }

    #[test]
    fn affine_u_with_unit_v() {
        let s = linear_state(40, 1.0, 0.01);
        let (ru, rv) = residuals(&s);
        assert!(ru < 1e-13);
        assert!(rv > 1e-3);
        let (c, dev) = flux_constant(&s);
        assert_relative_eq!(c, 1.01 * 0.5, epsilon = 1e-13);
        assert!(dev < 1e-13);
        let (d, ddev, _) = discrepancy(&s);
        assert_relative_eq!(d, -1.01 * 0.25, epsilon = 1e-13);
        assert!(ddev < 1e-13);
    }

    #[test]
    fn trivial_critical_point() {
        let s = linear_state(40, 0.0, 0.01);
        assert_eq!(residuals(&s), (0.0, 0.0));
        assert_eq!(flux_constant(&s), (0.0, 0.0));
        let f = VectorField1D::OddBump { center: 1.0, radius: 0.4, amplitude: 1.0 };
        assert_eq!(noether_residual(&s, &f).unwrap(), 0.0);
        assert_eq!(noether_residual(&linear_state(40, 1.0, 0.01), &VectorField1D::Zero).unwrap(), 0.0);
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify_v_mid(0.01, 0.01, 1.0), Branch::Jump);
        assert_eq!(classify_v_mid(0.995, 0.01, 1.0), Branch::Affine);
        assert_eq!(classify_v_mid(0.5, 0.01, 1.0), Branch::Indeterminate);
    }

    #[test]
    fn asymmetric_profile_shape() {
        let grid = Grid1D::new(2.0, 20).unwrap();
        let h = grid.h();
        let r = shape_of(&NodalField1D::from_fn(grid, |x| x).unwrap());
        assert_relative_eq!(r.symmetry_dev, 2.0 - 2.0 * h, epsilon = 1e-13);
        assert!(r.is_unimodal);
        assert_eq!(r.v_argmin, 0.0);
        assert!(r.argmin_on_boundary);
        let one = linear_state(20, 1.0, 0.01);
        let r = symmetry_monotonicity_check(&one);
        assert_eq!(r.symmetry_dev, 0.0);
        assert!(r.is_unimodal);
        assert_eq!(r.v_argmin, 1.0);
    }

    #[test]
    fn noether_2d_zero_field_and_trivial_state() {
        let grid = Grid2D::new(1.0, 1.0, 8, 8).unwrap();
        let p = Parameters::new(0.1, 0.01).unwrap();
        let g = NodalField2D::constant(grid, 0.0).unwrap();
        let s = PhaseField2D::from_extension(g, p).unwrap();
        let f = VectorField2D::RotationalBump { cx: 0.5, cy: 0.5, radius: 0.3, amplitude: 1.0 };
        assert_eq!(noether_residual_2d(&s, &f).unwrap(), 0.0);
        let gx = NodalField2D::from_fn(grid, |x, _| x).unwrap();
        let s = PhaseField2D::from_extension(gx, p).unwrap();
        assert_eq!(noether_residual_2d(&s, &VectorField2D::Zero).unwrap(), 0.0);
        let bad = VectorField2D::RotationalBump { cx: 0.0, cy: 0.5, radius: 0.3, amplitude: 1.0 };
        assert!(noether_residual_2d(&s, &bad).is_err());
    }
}
