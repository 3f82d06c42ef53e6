//! Outer and inner variations of the discrete energy.
//!
//! Outer variations are exact derivatives of the discrete energy along
//! additive perturbations. Inner variations come in two flavours: a
//! closed-form evaluation of the continuum integrals with the cell
//! quadrature of the energy module, and a flow-based evaluation that
//! deforms the nodal fields along the flow of `X` and differentiates the
//! discrete energy numerically. 1D only; the 2D vector-field catalogue
//! serves the conservation-law check.

use serde::{Deserialize, Serialize};

use crate::energy::{energy_of_arrays_1d, Cells1D, PhaseField1D, PiecewiseAffine1D};
use crate::error::{contract, Error, Result};
use crate::mesh::{cell_gradient_1d, Grid1D, NodalField1D};

/// Tolerance for a vector field to count as vanishing on the boundary.
pub const TANGENCY_TOL: f64 = 1e-14;

/// Closed-form 1D vector fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VectorField1D {
    Zero,
    /// `A (x - c) (1 - s^2)^4` with `s = (x - c) / r`, zero for `|s| >= 1`; `X'(c) = A`.
    OddBump { center: f64, radius: f64, amplitude: f64 },
    /// `A (1 - s^2)^4`.
    SymmetricBump { center: f64, radius: f64, amplitude: f64 },
    /// `A sin(k pi x / L)`.
    Sine { amplitude: f64, k: f64, length: f64 },
    /// `offset + slope x`; not tangential unless both vanish.
    Affine { offset: f64, slope: f64 },
    Constant { value: f64 },
}

impl VectorField1D {
    /// `[X, X', X'']` at `x`.
    pub fn jet(&self, x: f64) -> [f64; 3] {
        match *self {
            VectorField1D::Zero => [0.0; 3],
            VectorField1D::OddBump { center, radius, amplitude: a } => {
                let s = (x - center) / radius;
                if s.abs() >= 1.0 {
                    return [0.0; 3];
                }
                let q = 1.0 - s * s;
                let q2 = q * q;
                [
                    a * radius * s * q2 * q2,
                    a * q2 * q * (1.0 - 9.0 * s * s),
                    24.0 * a / radius * s * q2 * (3.0 * s * s - 1.0),
                ]
            }
            VectorField1D::SymmetricBump { center, radius, amplitude: a } => {
                let s = (x - center) / radius;
                if s.abs() >= 1.0 {
                    return [0.0; 3];
                }
                let q = 1.0 - s * s;
                let q2 = q * q;
                [
                    a * q2 * q2,
                    -8.0 * a / radius * s * q2 * q,
                    -8.0 * a / (radius * radius) * q2 * (1.0 - 7.0 * s * s),
                ]
            }
            VectorField1D::Sine { amplitude: a, k, length } => {
                let w = k * std::f64::consts::PI / length;
                let (sn, cs) = (w * x).sin_cos();
                [a * sn, a * w * cs, -a * w * w * sn]
            }
            VectorField1D::Affine { offset, slope } => [offset + slope * x, slope, 0.0],
            VectorField1D::Constant { value } => [value, 0.0, 0.0],
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    /// `Y = X' X` and its derivative `Y' = X'' X + X'^2`.
    pub fn y_jet(&self, x: f64) -> [f64; 2] {
        let [v, d, dd] = self.jet(x);
        [d * v, dd * v + d * d]
    }

    /// Error unless `X(0) = X(L) = 0`.
    pub fn ensure_tangential(&self, length: f64) -> Result<()> {
        let (l, r) = (self.value(0.0), self.value(length));
        if l.abs() > TANGENCY_TOL || r.abs() > TANGENCY_TOL {
            return contract(format!("vector field is not tangential: X(0) = {l:e}, X(L) = {r:e}"));
        }
        Ok(())
    }
}

/// Closed-form extensions `G` of the boundary data `(g0, g1)` on `[0, L]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Extension1D {
    Affine { g0: f64, g1: f64, length: f64 },
    /// Affine interpolant plus `beta x (L - x)`.
    AffinePlusQuadratic { g0: f64, g1: f64, length: f64, beta: f64 },
    /// Constant `g0` except on `[L - width, L]`, where a `C^3` smoothstep climbs to `g1`.
    EdgeStep { g0: f64, g1: f64, length: f64, width: f64 },
}

/// `35 s^4 - 84 s^5 + 70 s^6 - 20 s^7` and its first three derivatives.
fn smoothstep7(s: f64) -> [f64; 4] {
    if s <= 0.0 {
        return [0.0; 4];
    }
    if s >= 1.0 {
        return [1.0, 0.0, 0.0, 0.0];
    }
    let t = 1.0 - s;
    let s2 = s * s;
    [
        s2 * s2 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s2 * s),
        140.0 * s2 * s * t * t * t,
        420.0 * s2 * t * t * (1.0 - 2.0 * s),
        840.0 * s * t * (1.0 - 5.0 * s + 5.0 * s2),
    ]
}

impl Extension1D {
    /// The affine extension of data `(g0, g1)`.
    pub fn affine(g: (f64, f64), length: f64) -> Self {
        Extension1D::Affine { g0: g.0, g1: g.1, length }
    }

    /// `[G, G', G'', G''']` at `x`.
    pub fn jet(&self, x: f64) -> [f64; 4] {
        match *self {
            Extension1D::Affine { g0, g1, length } => {
                let s = (g1 - g0) / length;
                [g0 + s * x, s, 0.0, 0.0]
            }
            Extension1D::AffinePlusQuadratic { g0, g1, length, beta } => {
                let s = (g1 - g0) / length;
                [g0 + s * x + beta * x * (length - x), s + beta * (length - 2.0 * x), -2.0 * beta, 0.0]
            }
            Extension1D::EdgeStep { g0, g1, length, width } => {
                let s = (x - (length - width)) / width;
                let [f, f1, f2, f3] = smoothstep7(s);
                let d = g1 - g0;
                [g0 + d * f, d * f1 / width, d * f2 / (width * width), d * f3 / (width * width * width)]
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    /// Error unless the traces match `g` to 1e-12.
    pub fn ensure_matches(&self, g: (f64, f64), length: f64) -> Result<()> {
        let (l, r) = (self.value(0.0), self.value(length));
        if (l - g.0).abs() > 1e-12 || (r - g.1).abs() > 1e-12 {
            return contract(format!("extension traces ({l}, {r}) do not match g = ({}, {})", g.0, g.1));
        }
        Ok(())
    }
}

/// Perturbation directions `(phi, psi)`, both zero on the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction1D {
    phi: NodalField1D,
    psi: NodalField1D,
}

impl Direction1D {
    /// Boundary values within [`TANGENCY_TOL`] of zero are snapped to zero.
    pub fn new(phi: NodalField1D, psi: NodalField1D) -> Result<Self> {
        psi.ensure_grid(phi.grid())?;
        let grid = *phi.grid();
        let n = grid.n_cells();
        let snap = |f: NodalField1D| -> Result<NodalField1D> {
            let mut vals = f.into_values();
            for j in [0, n] {
                if vals[j].abs() > TANGENCY_TOL {
                    return contract("directions must vanish on boundary nodes");
                }
                vals[j] = 0.0;
            }
            NodalField1D::new(grid, vals)
        };
        Ok(Self { phi: snap(phi)?, psi: snap(psi)? })
    }

    pub fn zero(grid: Grid1D) -> Self {
        let z = NodalField1D::constant(grid, 0.0).expect("finite");
        Self { phi: z.clone(), psi: z }
    }

    pub fn phi(&self) -> &NodalField1D {
        &self.phi
    }
    pub fn psi(&self) -> &NodalField1D {
        &self.psi
    }

    /// `sqrt(h sum (phi^2 + psi^2))`.
    pub fn l2_norm(&self) -> f64 {
        let h = self.phi.grid().h();
        let s: f64 = self.phi.values().iter().chain(self.psi.values()).map(|x| x * x).sum();
        (h * s).sqrt()
    }
}

fn cell_avg_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.windows(2).zip(b.windows(2)).map(|(x, y)| 0.5 * (x[0] * y[0] + x[1] * y[1])).collect()
}

/// Exact first derivative of the discrete energy along `(u + t phi, v + t psi)`.
pub fn outer_first(state: &PhaseField1D, dir: &Direction1D) -> Result<f64> {
    dir.phi.ensure_grid(state.grid())?;
    let h = state.grid().h();
    let (u, v) = (state.u().values(), state.v().values());
    let (phi, psi) = (dir.phi.values(), dir.psi.values());
    let c = Cells1D::new(h, u, v, state.params());
    let dphi = cell_gradient_1d(phi, h);
    let dpsi = cell_gradient_1d(psi, h);
    let vpsi = cell_avg_product(v, psi);
    let vm1: Vec<f64> = v.iter().map(|x| x - 1.0).collect();
    let vm1psi = cell_avg_product(&vm1, psi);
    let eps = state.eps();
    let s: f64 = (0..c.len())
        .map(|i| {
            c.coef[i] * c.du[i] * dphi[i]
                + eps * c.dv[i] * dpsi[i]
                + vpsi[i] * c.du[i] * c.du[i]
                + vm1psi[i] / (4.0 * eps)
        })
        .sum();
    Ok(2.0 * h * s)
}

/// Exact second derivative of the discrete energy along `(u + t phi, v + t psi)`.
pub fn outer_second(state: &PhaseField1D, dir: &Direction1D) -> Result<f64> {
    dir.phi.ensure_grid(state.grid())?;
    let h = state.grid().h();
    let (u, v) = (state.u().values(), state.v().values());
    let (phi, psi) = (dir.phi.values(), dir.psi.values());
    let c = Cells1D::new(h, u, v, state.params());
    let dphi = cell_gradient_1d(phi, h);
    let dpsi = cell_gradient_1d(psi, h);
    let vpsi = cell_avg_product(v, psi);
    let psi2 = cell_avg_product(psi, psi);
    let eps = state.eps();
    let s: f64 = (0..c.len())
        .map(|i| {
            c.coef[i] * dphi[i] * dphi[i]
                + 4.0 * vpsi[i] * c.du[i] * dphi[i]
                + eps * dpsi[i] * dpsi[i]
                + psi2[i] * c.du[i] * c.du[i]
                + psi2[i] / (4.0 * eps)
        })
        .sum();
    Ok(2.0 * h * s)
}

/// Fourth-order Runge-Kutta map `x -> Phi_t(x)` of `dx/dt = X(x)` with fixed substeps.
pub fn flow_integrate(field: &VectorField1D, t: f64, points: &[f64], substeps: usize) -> Vec<f64> {
    let n = substeps.max(1);
    let dt = t / n as f64;
    points
        .iter()
        .map(|&x0| {
            let mut x = x0;
            for _ in 0..n {
                let k1 = field.value(x);
                let k2 = field.value(x + 0.5 * dt * k1);
                let k3 = field.value(x + 0.5 * dt * k2);
                let k4 = field.value(x + dt * k3);
                x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            x
        })
        .collect()
}

/// Piecewise Lagrange interpolation of nodal data on a uniform grid: cubic
/// through the four surrounding nodes, quadratic in the two boundary cells.
#[derive(Clone, Debug)]
struct Interpolant<'a> {
    h: f64,
    values: &'a [f64],
}

impl<'a> Interpolant<'a> {
    fn new(grid: &Grid1D, values: &'a [f64]) -> Self {
        Self { h: grid.h(), values }
    }

    fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Stencil start node and size for cell `i`.
    fn stencil(&self, cell: usize) -> (usize, usize) {
        let n = self.n();
        if n < 3 {
            (0, n + 1)
        } else if cell == 0 {
            (0, 3)
        } else if cell == n - 1 {
            (n - 2, 3)
        } else {
            (cell - 1, 4)
        }
    }

    fn cell_of(&self, x: f64) -> usize {
        let c = (x / self.h).floor();
        (c.max(0.0) as usize).min(self.n() - 1)
    }

    /// Value and derivative at `x` using the stencil of `cell`.
    fn eval_in(&self, cell: usize, x: f64) -> (f64, f64) {
        let (start, m) = self.stencil(cell);
        // local coordinate in units of h relative to the stencil start
        let s = x / self.h - start as f64;
        let mut val = 0.0;
        let mut der = 0.0;
        for k in 0..m {
            let mut lk = 1.0;
            let mut dk = 0.0;
            for j in 0..m {
                if j == k {
                    continue;
                }
                let denom = k as f64 - j as f64;
                // product rule for the derivative of the Lagrange basis
                dk = dk * (s - j as f64) / denom + lk / denom;
                lk *= (s - j as f64) / denom;
            }
            val += self.values[start + k] * lk;
            der += self.values[start + k] * dk;
        }
        (val, der / self.h)
    }

    fn eval(&self, x: f64) -> f64 {
        self.eval_in(self.cell_of(x), x).0
    }

    /// Mean of the one-sided derivatives at node `j`.
    fn node_derivative(&self, j: usize) -> f64 {
        let n = self.n();
        let x = j as f64 * self.h;
        if j == 0 {
            return self.eval_in(0, x).1;
        }
        if j == n {
            return self.eval_in(n - 1, x).1;
        }
        0.5 * (self.eval_in(j - 1, x).1 + self.eval_in(j, x).1)
    }
}

/// Step sizes of the flow-based inner variation, as fractions of the domain length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlowConfig {
    pub substeps: usize,
    pub first_step: f64,
    pub second_step: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { substeps: 8, first_step: 1e-3, second_step: 3e-3 }
    }
}

/// `(u_t, v_t)` at the nodes for one value of `t`.
fn deformed_fields(
    state: &PhaseField1D,
    field: &VectorField1D,
    ext: &Extension1D,
    t: f64,
    substeps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = state.grid();
    let l = grid.length();
    let nodes = grid.nodes();
    let back = flow_integrate(field, -t, &nodes, substeps);
    let iu = Interpolant::new(grid, state.u().values());
    let iv = Interpolant::new(grid, state.v().values());
    let mut u = Vec::with_capacity(nodes.len());
    let mut v = Vec::with_capacity(nodes.len());
    for (&x, &y) in nodes.iter().zip(&back) {
        if !(-1e-12..=l + 1e-12).contains(&y) {
            return Err(Error::Solver(format!("flow left the domain: node {x} mapped to {y}")));
        }
        let y = y.clamp(0.0, l);
        u.push(iu.eval(y) - ext.value(y) + ext.value(x));
        v.push(iv.eval(y));
    }
    Ok((u, v))
}

/// Numerical `d/dt` (order 1) or `d^2/dt^2` (order 2) at `t = 0` of the
/// discrete energy along the inner deformation generated by `X` and `G`.
pub fn inner_via_flow(
    state: &PhaseField1D,
    field: &VectorField1D,
    ext: &Extension1D,
    order: u8,
    cfg: FlowConfig,
) -> Result<f64> {
    let l = state.grid().length();
    field.ensure_tangential(l)?;
    ext.ensure_matches(state.boundary(), l)?;
    let h = state.grid().h();
    let params = state.params();
    let energy = |t: f64| -> Result<f64> {
        let (u, v) = deformed_fields(state, field, ext, t, cfg.substeps)?;
        Ok(energy_of_arrays_1d(h, &u, &v, params).total)
    };
    match order {
        1 => {
            let k = cfg.first_step * l;
            let (e2p, e1p, e1m, e2m) = (energy(2.0 * k)?, energy(k)?, energy(-k)?, energy(-2.0 * k)?);
            Ok((-e2p + 8.0 * e1p - 8.0 * e1m + e2m) / (12.0 * k))
        }
        2 => {
            let k = cfg.second_step * l;
            let e0 = energy(0.0)?;
            let (e2p, e1p, e1m, e2m) = (energy(2.0 * k)?, energy(k)?, energy(-k)?, energy(-2.0 * k)?);
            Ok((-e2p + 16.0 * e1p - 30.0 * e0 + 16.0 * e1m - e2m) / (12.0 * k * k))
        }
        _ => contract(format!("inner variation order must be 1 or 2, got {order}")),
    }
}

/// The direction `(X (u - G)', X v')` whose outer variation, with a minus
/// sign, equals the first inner variation. Derivatives of u and v are those
/// of the interpolant used by [`inner_via_flow`], so the identity also holds
/// between the discrete quantities.
pub fn inner_outer_direction(state: &PhaseField1D, field: &VectorField1D, ext: &Extension1D) -> Result<Direction1D> {
    let grid = *state.grid();
    let iu = Interpolant::new(&grid, state.u().values());
    let iv = Interpolant::new(&grid, state.v().values());
    let n = grid.n_cells();
    let mut phi = vec![0.0; n + 1];
    let mut psi = vec![0.0; n + 1];
    for j in 1..n {
        let x = grid.node(j);
        let xv = field.value(x);
        phi[j] = xv * (iu.node_derivative(j) - ext.jet(x)[1]);
        psi[j] = xv * iv.node_derivative(j);
    }
    Direction1D::new(NodalField1D::new(grid, phi)?, NodalField1D::new(grid, psi)?)
}

/// Per-cell data shared by the closed-form inner variations.
struct InnerCells {
    h: f64,
    coef: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
    potential: Vec<f64>,
    eps: f64,
    mids: Vec<f64>,
}

impl InnerCells {
    fn new(state: &PhaseField1D) -> Self {
        let grid = state.grid();
        let h = grid.h();
        let c = Cells1D::new(h, state.u().values(), state.v().values(), state.params());
        Self { h, coef: c.coef, p: c.du, q: c.dv, potential: c.potential, eps: state.eps(), mids: grid.midpoints() }
    }
}

/// Closed-form first inner variation
/// `-int A u'^2 X' + int (pot - eps v'^2) X' + 2 int A u' (X G')'`
/// with `A = eta + v^2`, evaluated cellwise.
pub fn inner_first_closed(state: &PhaseField1D, field: &VectorField1D, ext: &Extension1D) -> Result<f64> {
    let l = state.grid().length();
    field.ensure_tangential(l)?;
    ext.ensure_matches(state.boundary(), l)?;
    let c = InnerCells::new(state);
    let s: f64 = (0..c.p.len())
        .map(|i| {
            let [xv, dx, _] = field.jet(c.mids[i]);
            let [_, g1, g2, _] = ext.jet(c.mids[i]);
            let dh = dx * g1 + xv * g2;
            let (a, p, q) = (c.coef[i], c.p[i], c.q[i]);
            -a * p * p * dx + (c.potential[i] - c.eps * q * q) * dx + 2.0 * a * p * dh
        })
        .sum();
    Ok(c.h * s)
}

/// Closed-form second inner variation in 1D.
///
/// With `A = eta + v^2`, `p = u'`, `q = v'`, `Y = X' X` and `H = X G'`:
/// `int A (-p^2 Y' + 2 p^2 X'^2 - 4 p H' X' + 2 p (X' H' + X H'') + 2 H'^2)
///  + int (pot - eps q^2) Y' + 2 int eps q^2 X'^2`.
///
/// The `(div X)^2 - tr((DX)^2)` combination of the general formula is
/// identically zero on a line and contributes nothing.
pub fn inner_second_closed(state: &PhaseField1D, field: &VectorField1D, ext: &Extension1D) -> Result<f64> {
    let l = state.grid().length();
    field.ensure_tangential(l)?;
    ext.ensure_matches(state.boundary(), l)?;
    let c = InnerCells::new(state);
    let s: f64 = (0..c.p.len())
        .map(|i| {
            let m = c.mids[i];
            let [xv, dx, ddx] = field.jet(m);
            let [_, g1, g2, g3] = ext.jet(m);
            let dy = ddx * xv + dx * dx;
            let dh = dx * g1 + xv * g2;
            let ddh = ddx * g1 + 2.0 * dx * g2 + xv * g3;
            let (a, p, q) = (c.coef[i], c.p[i], c.q[i]);
            let bulk = -p * p * dy + 2.0 * p * p * dx * dx - 4.0 * p * dh * dx + 2.0 * p * (dx * dh + xv * ddh)
                + 2.0 * dh * dh;
            a * bulk + (c.potential[i] - c.eps * q * q) * dy + 2.0 * c.eps * q * q * dx * dx
        })
        .sum();
    Ok(c.h * s)
}

/// Gauss-Legendre rule with 8 nodes on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// Composite Gauss-Legendre integral of `f` over every piece of `limit`.
fn integrate_pieces(limit: &PiecewiseAffine1D, f: impl Fn(f64, f64) -> f64) -> f64 {
    const SUB: usize = 256;
    let mut total = 0.0;
    for (a, b, slope) in limit.pieces() {
        let w = (b - a) / SUB as f64;
        for k in 0..SUB {
            let mid = a + (k as f64 + 0.5) * w;
            for &(s, wt) in &GL8 {
                total += 0.5 * w * wt * f(mid + 0.5 * w * s, slope);
            }
        }
    }
    total
}

/// First inner variation of the Mumford-Shah energy at a 1D piecewise-affine
/// limit: `-int u'^2 X' + 2 int u' (X G')'`. A point jump set adds nothing.
pub fn ms_inner_first_1d(limit: &PiecewiseAffine1D, field: &VectorField1D, ext: &Extension1D) -> Result<f64> {
    field.ensure_tangential(limit.length())?;
    ext.ensure_matches(limit.boundary(), limit.length())?;
    Ok(integrate_pieces(limit, |x, p| {
        let [xv, dx, _] = field.jet(x);
        let [_, g1, g2, _] = ext.jet(x);
        -p * p * dx + 2.0 * p * (dx * g1 + xv * g2)
    }))
}

/// Second inner variation of the Mumford-Shah energy at a 1D limit.
pub fn ms_second_inner_1d(limit: &PiecewiseAffine1D, field: &VectorField1D, ext: &Extension1D) -> Result<f64> {
    field.ensure_tangential(limit.length())?;
    ext.ensure_matches(limit.boundary(), limit.length())?;
    Ok(integrate_pieces(limit, |x, p| {
        let [xv, dx, ddx] = field.jet(x);
        let [_, g1, g2, g3] = ext.jet(x);
        let dy = ddx * xv + dx * dx;
        let dh = dx * g1 + xv * g2;
        let ddh = ddx * g1 + 2.0 * dx * g2 + xv * g3;
        -p * p * dy + 2.0 * p * p * dx * dx - 4.0 * p * dh * dx + 2.0 * p * (dx * dh + xv * ddh) + 2.0 * dh * dh
    }))
}

/// Predicted limit of the second inner variation along a family converging
/// to `limit`: the Mumford-Shah second inner variation plus `X'(x)^2` summed
/// over the extended jump set.
pub fn ms_second_inner_limit_1d(limit: &PiecewiseAffine1D, field: &VectorField1D, ext: &Extension1D) -> Result<f64> {
    let base = ms_second_inner_1d(limit, field, ext)?;
    let jump: f64 = limit.extended_jump_set().iter().map(|&x| field.jet(x)[1].powi(2)).sum();
    Ok(base + jump)
}

/// Closed-form tangential vector fields on `[0, Lx] x [0, Ly]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum VectorField2D {
    Zero,
    /// `A (1 - r^2 / R^2)^4 (-(y - cy), x - cx)`, compactly supported.
    RotationalBump { cx: f64, cy: f64, radius: f64, amplitude: f64 },
    /// `A (sin(k pi x / Lx), 0)`: slides along the horizontal edges.
    SineShear { amplitude: f64, k: u32, lx: f64 },
    /// `A (sin(kx pi x / Lx) cos(ky pi y / Ly), cos(kx pi x / Lx) sin(ky pi y / Ly))`.
    SineMode { amplitude: f64, kx: u32, ky: u32, lx: f64, ly: f64 },
}

impl VectorField2D {
    /// `(X, DX)` with `DX[i][j] = d_j X_i`.
    pub fn eval(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        use std::f64::consts::PI;
        match *self {
            VectorField2D::Zero => ([0.0; 2], [[0.0; 2]; 2]),
            VectorField2D::RotationalBump { cx, cy, radius, amplitude: a } => {
                let (dx, dy) = (x - cx, y - cy);
                let s = (dx * dx + dy * dy) / (radius * radius);
                if s >= 1.0 {
                    return ([0.0; 2], [[0.0; 2]; 2]);
                }
                let q = 1.0 - s;
                let f = a * q.powi(4);
                // d f / dx = a * 4 q^3 * (-2 dx / R^2)
                let fp = -8.0 * a * q.powi(3) / (radius * radius);
                let (fx, fy) = (fp * dx, fp * dy);
                ([-f * dy, f * dx], [[-fx * dy, -fy * dy - f], [fx * dx + f, fy * dx]])
            }
            VectorField2D::SineShear { amplitude: a, k, lx } => {
                let w = k as f64 * PI / lx;
                ([a * (w * x).sin(), 0.0], [[a * w * (w * x).cos(), 0.0], [0.0, 0.0]])
            }
            VectorField2D::SineMode { amplitude: a, kx, ky, lx, ly } => {
                let (wx, wy) = (kx as f64 * PI / lx, ky as f64 * PI / ly);
                let (sx, cx) = (wx * x).sin_cos();
                let (sy, cy) = (wy * y).sin_cos();
                (
                    [a * sx * cy, a * cx * sy],
                    [[a * wx * cx * cy, -a * wy * sx * sy], [-a * wx * sx * sy, a * wy * cx * cy]],
                )
            }
        }
    }

    /// Error unless `X . nu` vanishes on the boundary nodes of `grid`.
    pub fn ensure_tangential(&self, grid: &crate::mesh::Grid2D) -> Result<()> {
        for j in 0..=grid.ny() {
            for i in 0..=grid.nx() {
                if !grid.is_boundary(i, j) {
                    continue;
                }
                let [x, y] = grid.node(i, j);
                let (xv, _) = self.eval(x, y);
                let on_vertical = i == 0 || i == grid.nx();
                let on_horizontal = j == 0 || j == grid.ny();
                if (on_vertical && xv[0].abs() > TANGENCY_TOL) || (on_horizontal && xv[1].abs() > TANGENCY_TOL) {
                    return contract(format!("vector field is not tangential at boundary node ({i}, {j})"));
                }
            }
        }
        Ok(())
    }
}
