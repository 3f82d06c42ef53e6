//! Alternating minimization toward critical points, and the symmetric
//! construction of jump-type critical points through a constrained
//! half-interval problem.

use serde::{Deserialize, Serialize};

use crate::elliptic::{
    residual_norm, solve_u_2d, solve_v_2d, u_given_v_1d, v_given_u_1d, weak_residuals_1d, weak_residuals_2d,
    LinearSolveConfig, VEnd,
};
use crate::energy::{energy_of_arrays_1d, phi, EnergyBreakdown, Parameters, PhaseField1D, PhaseField2D, at_energy_2d};
use crate::error::{config, contract, Error, Result};
use crate::mesh::{Grid1D, NodalField1D, NodalField2D};

/// Initial v handed to the first u-solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InitialProfile {
    UniformOne,
    /// Keep the v of the state handed to the solver.
    FromState,
    /// `1 - depth * cos^2(pi (x - center) / (2 width))` on `|x - center| < width`, one elsewhere.
    Notch { center: f64, width: f64, depth: f64 },
    Explicit { values: Vec<f64> },
}

impl InitialProfile {
    pub fn validate(&self) -> Result<()> {
        if let InitialProfile::Notch { width, depth, .. } = *self {
            if !(width > 0.0) {
                return config("notch width must be positive");
            }
            // depth 1 is accepted so that a notch can touch zero exactly
            if !(0.0..=1.0).contains(&depth) {
                return config(format!("notch depth must lie in [0, 1], got {depth}"));
            }
        }
        Ok(())
    }

    fn notch_value(x: f64, center: f64, width: f64, depth: f64) -> f64 {
        let s = (x - center) / width;
        if s.abs() >= 1.0 {
            1.0
        } else {
            let c = (0.5 * std::f64::consts::PI * s).cos();
            1.0 - depth * c * c
        }
    }

    /// Nodal values on a 1D grid (boundary values forced to one).
    pub fn sample(&self, grid: &Grid1D) -> Result<NodalField1D> {
        self.validate()?;
        let mut vals = match self {
            InitialProfile::UniformOne => vec![1.0; grid.n_nodes()],
            InitialProfile::FromState => return contract("the FromState profile has no grid-only sampling"),
            InitialProfile::Notch { center, width, depth } => {
                grid.nodes().iter().map(|&x| Self::notch_value(x, *center, *width, *depth)).collect()
            }
            InitialProfile::Explicit { values } => {
                if values.len() != grid.n_nodes() {
                    return contract(format!(
                        "explicit profile has {} values for {} nodes",
                        values.len(),
                        grid.n_nodes()
                    ));
                }
                values.clone()
            }
        };
        let n = grid.n_cells();
        vals[0] = 1.0;
        vals[n] = 1.0;
        NodalField1D::new(*grid, vals)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AltMinConfig {
    pub max_iter: usize,
    /// Relative energy decrease per outer iteration regarded as a stall.
    pub energy_tol: f64,
    /// Bound on both weak-form residual norms.
    pub residual_tol: f64,
    /// Consecutive stalled iterations tolerated while the residual is still above tolerance.
    pub stall_patience: usize,
    pub initial: InitialProfile,
    pub linear: LinearSolveConfig,
}

impl Default for AltMinConfig {
    fn default() -> Self {
        Self {
            max_iter: 200_000,
            energy_tol: 1e-11,
            residual_tol: 1e-8,
            stall_patience: 200,
            initial: InitialProfile::UniformOne,
            linear: LinearSolveConfig::default(),
        }
    }
}

impl AltMinConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return config("max_iter must be at least 1");
        }
        if !(self.energy_tol > 0.0) || !(self.residual_tol > 0.0) {
            return config("stopping tolerances must be positive");
        }
        if !(self.linear.tol > 0.0 && self.linear.tol < 1.0) || self.linear.max_iter == 0 {
            return config("linear solver tolerance must lie in (0, 1) with at least one iteration");
        }
        self.initial.validate()
    }
}

/// Why the outer loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Energy stalled and both residuals are below tolerance.
    Critical,
    /// Energy stalled for `stall_patience` iterations with residual above tolerance.
    EnergyStall,
    /// Residuals met but energy still moving at `max_iter`.
    ResidualOnly,
    MaxIter,
}

impl Termination {
    pub fn is_critical(self) -> bool {
        self == Termination::Critical
    }

    /// `"critical"` or `"stalled"`.
    pub fn status(self) -> &'static str {
        if self.is_critical() {
            "critical"
        } else {
            "stalled"
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AltMinTrace {
    /// Energy after each completed outer iteration (the state after its u-step).
    pub iterations: Vec<EnergyBreakdown>,
    /// Total energy after every half-step, starting with the initial u-solve.
    pub half_step_totals: Vec<f64>,
    pub iteration_count: usize,
    pub termination: Termination,
    pub u_residual: f64,
    pub v_residual: f64,
}

impl AltMinTrace {
    /// Largest increase of total energy between consecutive half-steps (zero if monotone).
    pub fn max_increase(&self) -> f64 {
        self.half_step_totals.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    pub fn is_monotone(&self, tol: f64) -> bool {
        self.max_increase() <= tol
    }
}

const ENERGY_FLOOR: f64 = 1e-15;

/// Outer-loop bookkeeping shared by the 1D, half-interval and 2D drivers.
struct Stopper<'a> {
    cfg: &'a AltMinConfig,
    stalls: usize,
}

impl Stopper<'_> {
    /// `Some(reason)` when the loop should stop after iteration `it`.
    fn check(&mut self, it: usize, e_prev: f64, e_new: f64, residual: f64) -> Option<Termination> {
        // the absolute floor covers energies that are zero up to round-off
        let stalled = (e_prev - e_new).abs() <= self.cfg.energy_tol * e_new.abs() + ENERGY_FLOOR;
        let resolved = residual <= self.cfg.residual_tol;
        if stalled && resolved {
            return Some(Termination::Critical);
        }
        self.stalls = if stalled { self.stalls + 1 } else { 0 };
        if self.stalls >= self.cfg.stall_patience {
            return Some(Termination::EnergyStall);
        }
        if it >= self.cfg.max_iter {
            return Some(if resolved { Termination::ResidualOnly } else { Termination::MaxIter });
        }
        None
    }
}

/// Alternate exact u- and v-minimizations from the configured initial v.
///
/// The returned state always ends with a u-solve, so its flux is exactly constant.
/// The u of `initial` is ignored; the loop starts by solving for u with the
/// v selected by `cfg.initial`.
pub fn alternate_minimize(initial: &PhaseField1D, cfg: &AltMinConfig) -> Result<(PhaseField1D, AltMinTrace)> {
    cfg.validate()?;
    let grid = *initial.grid();
    let params = initial.params();
    let g = initial.boundary();
    let h = grid.h();
    let v0 = match &cfg.initial {
        InitialProfile::FromState => initial.v().clone(),
        profile => profile.sample(&grid)?,
    };
    let mut v = v0.into_values();
    let (mut u, _) = u_given_v_1d(h, &v, params.eta, g)?;
    let energy = |u: &[f64], v: &[f64]| energy_of_arrays_1d(h, u, v, params);
    let mut e = energy(&u, &v);
    let mut half_steps = vec![e.total];
    let mut iterations = Vec::new();
    let mut stopper = Stopper { cfg, stalls: 0 };
    let mut it = 0;
    let (termination, ru, rv) = loop {
        it += 1;
        v = v_given_u_1d(h, &u, params, VEnd::Dirichlet(1.0))?;
        half_steps.push(energy(&u, &v).total);
        u = u_given_v_1d(h, &v, params.eta, g)?.0;
        let e_new = energy(&u, &v);
        half_steps.push(e_new.total);
        iterations.push(e_new);
        let (ru, rv) = weak_residuals_1d(h, &u, &v, params, VEnd::Dirichlet(1.0));
        let (ru, rv) = (residual_norm(&ru, h), residual_norm(&rv, h));
        if let Some(t) = stopper.check(it, e.total, e_new.total, ru.max(rv)) {
            break (t, ru, rv);
        }
        e = e_new;
    };
    let state = PhaseField1D::new(NodalField1D::new(grid, u)?, NodalField1D::new(grid, v)?, params, g)?;
    let trace = AltMinTrace {
        iterations,
        half_step_totals: half_steps,
        iteration_count: it,
        termination,
        u_residual: ru,
        v_residual: rv,
    };
    Ok((state, trace))
}

/// Alternating minimization on a rectangle, always started from the state's v.
pub fn alternate_minimize_2d(initial: &PhaseField2D, cfg: &AltMinConfig) -> Result<(PhaseField2D, AltMinTrace)> {
    cfg.validate()?;
    let grid = *initial.grid();
    let area = grid.cell_area();
    let mut state = solve_u_2d(initial, cfg.linear)?;
    let mut e = at_energy_2d(&state);
    let mut half_steps = vec![e.total];
    let mut iterations = Vec::new();
    let mut stopper = Stopper { cfg, stalls: 0 };
    let mut it = 0;
    let (termination, ru, rv) = loop {
        it += 1;
        state = solve_v_2d(&state, cfg.linear)?;
        half_steps.push(at_energy_2d(&state).total);
        state = solve_u_2d(&state, cfg.linear)?;
        let e_new = at_energy_2d(&state);
        half_steps.push(e_new.total);
        iterations.push(e_new);
        let (ru, rv) = weak_residuals_2d(&grid, state.u().values(), state.v().values(), state.params())?;
        let (ru, rv) = (residual_norm(&ru, area), residual_norm(&rv, area));
        if let Some(t) = stopper.check(it, e.total, e_new.total, ru.max(rv)) {
            break (t, ru, rv);
        }
        e = e_new;
    };
    let trace = AltMinTrace {
        iterations,
        half_step_totals: half_steps,
        iteration_count: it,
        termination,
        u_residual: ru,
        v_residual: rv,
    };
    Ok((state, trace))
}

/// `(g, 1)` on a rectangle with `g` sampled from a closed-form boundary datum.
pub fn extension_state_2d(g: NodalField2D, params: Parameters) -> Result<PhaseField2D> {
    PhaseField2D::from_extension(g, params)
}

/// A pair on `[0, L/2]` with `u(0) = 0`, `u(L/2) = a/2`, `v(0) = 1` and v free at `L/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfDomainState {
    grid: Grid1D,
    u: NodalField1D,
    v: NodalField1D,
    params: Parameters,
    a: f64,
}

impl HalfDomainState {
    pub fn new(u: NodalField1D, v: NodalField1D, params: Parameters, a: f64) -> Result<Self> {
        let grid = *u.grid();
        v.ensure_grid(&grid)?;
        let n = grid.n_cells();
        if u.values()[0] != 0.0 || (u.values()[n] - 0.5 * a).abs() > 1e-12 {
            return contract("half-domain u must run from 0 to a/2");
        }
        if v.values()[0] != 1.0 {
            return contract("half-domain v must equal 1 at the origin");
        }
        Ok(Self { grid, u, v, params, a })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn u(&self) -> &NodalField1D {
        &self.u
    }
    pub fn v(&self) -> &NodalField1D {
        &self.v
    }
    pub fn params(&self) -> Parameters {
        self.params
    }
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Energy on the half interval.
    pub fn energy(&self) -> EnergyBreakdown {
        energy_of_arrays_1d(self.grid.h(), self.u.values(), self.v.values(), self.params)
    }

    /// Weak-form v residual at the free end node, including the factor `1/h`
    /// of the mesh-weighted norm.
    pub fn end_flux_residual(&self) -> f64 {
        let h = self.grid.h();
        let (_, rv) = weak_residuals_1d(h, self.u.values(), self.v.values(), self.params, VEnd::Natural);
        rv.last().copied().unwrap_or(0.0).abs() / h.sqrt()
    }

    /// Residual norms `(u, v)` of the half problem with natural end for v.
    pub fn residuals(&self) -> (f64, f64) {
        let h = self.grid.h();
        let (ru, rv) = weak_residuals_1d(h, self.u.values(), self.v.values(), self.params, VEnd::Natural);
        (residual_norm(&ru, h), residual_norm(&rv, h))
    }
}

/// Result of the constrained half-interval construction.
#[derive(Clone, Debug)]
pub struct JumpConstruction {
    pub half: HalfDomainState,
    /// Flux constant `(eta + v^2) u'` of the half state.
    pub c: f64,
    pub trace: AltMinTrace,
    /// Whether the clamp `v(L/2) = alpha` was used in any iteration.
    pub clamp_ever_active: bool,
}

/// `a^2 / L - 2 Phi(alpha)`, which must be positive for the construction.
pub fn alpha_margin(a: f64, length: f64, alpha: f64) -> f64 {
    a * a / length - 2.0 * phi(alpha)
}

/// Minimize the energy on `[0, L/2]` over pairs with `u(0) = 0`,
/// `u(L/2) = a/2`, `v(0) = 1` and `v(L/2) <= alpha`, by alternating
/// exact minimizations.
///
/// Each v-step solves the unconstrained natural-end problem first and
/// re-solves with `v(L/2) = alpha` only if the bound is violated; for this
/// convex one-constraint problem that is the exact constrained minimizer.
/// The returned state must leave the constraint inactive.
pub fn constrained_jump_construct(
    n_half: usize,
    a: f64,
    length: f64,
    params: Parameters,
    alpha: f64,
    cfg: &AltMinConfig,
) -> Result<JumpConstruction> {
    cfg.validate()?;
    if !(a > 0.0 && length > 0.0) {
        return config("jump construction needs a > 0 and L > 0");
    }
    if !(0.0..1.0).contains(&alpha) {
        return config(format!("alpha must lie in [0, 1), got {alpha}"));
    }
    let margin = alpha_margin(a, length, alpha);
    if !(margin > 0.0) {
        return config(format!("alpha = {alpha} violates a^2/L - 2 Phi(alpha) > 0 (margin {margin:.6})"));
    }
    let grid = Grid1D::new(0.5 * length, n_half)?;
    let h = grid.h();
    let g = (0.0, 0.5 * a);
    let half_l = 0.5 * length;
    let mut v: Vec<f64> = match &cfg.initial {
        InitialProfile::Explicit { values } => {
            if values.len() != grid.n_nodes() {
                return contract("explicit half-domain profile has the wrong length");
            }
            values.clone()
        }
        // an optimal-profile notch reaching zero at the free end
        _ => grid.nodes().iter().map(|&x| 1.0 - (-(half_l - x) / (2.0 * params.eps)).exp()).collect(),
    };
    v[0] = 1.0;
    let mut u = u_given_v_1d(h, &v, params.eta, g)?.0;
    let energy = |u: &[f64], v: &[f64]| energy_of_arrays_1d(h, u, v, params);
    let mut e = energy(&u, &v);
    let mut half_steps = vec![e.total];
    let mut iterations = Vec::new();
    let mut stopper = Stopper { cfg, stalls: 0 };
    let mut ever_active = false;
    let mut active;
    let mut it = 0;
    let (termination, ru, rv) = loop {
        it += 1;
        v = v_given_u_1d(h, &u, params, VEnd::Natural)?;
        active = *v.last().unwrap() > alpha;
        if active {
            v = v_given_u_1d(h, &u, params, VEnd::Dirichlet(alpha))?;
            ever_active = true;
        }
        half_steps.push(energy(&u, &v).total);
        u = u_given_v_1d(h, &v, params.eta, g)?.0;
        let e_new = energy(&u, &v);
        half_steps.push(e_new.total);
        iterations.push(e_new);
        let (ru, rv) = weak_residuals_1d(h, &u, &v, params, if active { VEnd::Dirichlet(alpha) } else { VEnd::Natural });
        let (ru, rv) = (residual_norm(&ru, h), residual_norm(&rv, h));
        if let Some(t) = stopper.check(it, e.total, e_new.total, ru.max(rv)) {
            break (t, ru, rv);
        }
        e = e_new;
    };
    if active || *v.last().unwrap() >= alpha {
        return Err(Error::Solver(format!(
            "alpha-condition violated numerically: v(L/2) constrained at alpha = {alpha} (eps = {})",
            params.eps
        )));
    }
    let (_, c) = u_given_v_1d(h, &v, params.eta, g)?;
    let half = HalfDomainState::new(NodalField1D::new(grid, u)?, NodalField1D::new(grid, v)?, params, a)?;
    let trace = AltMinTrace {
        iterations,
        half_step_totals: half_steps,
        iteration_count: it,
        termination,
        u_residual: ru,
        v_residual: rv,
    };
    Ok(JumpConstruction { half, c, trace, clamp_ever_active: ever_active })
}

/// Tolerance on the free-end v residual accepted by [`reflect_and_extend`].
pub const REFLECTION_FLUX_TOL: f64 = 1e-8;

/// Extend a half-interval state to `(0, L)`: v by even reflection about
/// `L/2`, u by integrating the constant flux `c = a (int_0^L dx / (eta + v^2))^-1`.
pub fn reflect_and_extend(half: &HalfDomainState) -> Result<PhaseField1D> {
    let r = half.end_flux_residual();
    if !(r <= REFLECTION_FLUX_TOL) {
        return Err(Error::Solver(format!(
            "reflection refused: v-flux residual at L/2 is {r:.3e} (tolerance {REFLECTION_FLUX_TOL:.0e})"
        )));
    }
    let m = half.grid.n_cells();
    let grid = Grid1D::new(2.0 * half.grid.length(), 2 * m)?;
    let hv = half.v.values();
    let mut v = Vec::with_capacity(2 * m + 1);
    v.extend_from_slice(hv);
    v.extend(hv[..m].iter().rev());
    let a = half.a;
    let (mut u, _) = u_given_v_1d(grid.h(), &v, half.params.eta, (0.0, a))?;
    // reflect the left half so that u(L - x) = a - u(x) holds bitwise
    for i in 0..m {
        u[2 * m - i] = a - u[i];
    }
    u[m] = 0.5 * a;
    PhaseField1D::new(NodalField1D::new(grid, u)?, NodalField1D::new(grid, v)?, half.params, (0.0, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::at_energy;
    use approx::assert_relative_eq;

    fn start(a: f64, l: f64, n: usize, eps: f64) -> PhaseField1D {
        let grid = Grid1D::new(l, n).unwrap();
        PhaseField1D::with_linear_u(NodalField1D::constant(grid, 1.0).unwrap(), Parameters::with_eps2(eps).unwrap(), (0.0, a))
            .unwrap()
    }

    #[test]
    fn affine_seed_converges_and_is_monotone() {
        let s = start(1.0, 2.0, 320, 0.05);
        let (out, trace) = alternate_minimize(&s, &AltMinConfig::default()).unwrap();
        assert!(trace.termination.is_critical(), "{:?}", trace.termination);
        assert!(trace.is_monotone(1e-12));
        let mid = out.v().values()[160];
        assert!(mid > 0.8, "v(L/2) = {mid}");
    }

    #[test]
    fn trivial_data_terminates_at_once() {
        let s = start(0.0, 2.0, 64, 0.1);
        let (out, trace) = alternate_minimize(&s, &AltMinConfig::default()).unwrap();
        assert_eq!(trace.iteration_count, 1);
        assert!(trace.termination.is_critical());
        assert_eq!(at_energy(&out).total, 0.0);
    }

    #[test]
    fn alpha_condition_is_checked_first() {
        let p = Parameters::with_eps2(0.05).unwrap();
        assert_relative_eq!(alpha_margin(1.0, 2.0, 0.2), 0.14, epsilon = 1e-15);
        assert_relative_eq!(alpha_margin(1.0, 2.0, 0.4), -0.14, epsilon = 1e-15);
        let err = constrained_jump_construct(100, 1.0, 2.0, p, 0.4, &AltMinConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn uniform_half_state_extends_to_affine() {
        let grid = Grid1D::new(1.0, 10).unwrap();
        let p = Parameters::with_eps2(0.1).unwrap();
        let a = 1.0;
        let u = NodalField1D::from_fn(grid, |x| 0.5 * a * x).unwrap();
        let v = NodalField1D::constant(grid, 1.0).unwrap();
        let half = HalfDomainState::new(u, v, p, a).unwrap();
        // the constant v is not stationary at the free end unless the gradient vanishes
        assert!(reflect_and_extend(&half).is_err());
        let half0 = HalfDomainState::new(
            NodalField1D::from_fn(grid, |_| 0.0).unwrap(),
            NodalField1D::constant(grid, 1.0).unwrap(),
            p,
            0.0,
        )
        .unwrap();
        let full = reflect_and_extend(&half0).unwrap();
        assert!(full.v().values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn notch_profile_touches_zero() {
        let grid = Grid1D::new(2.0, 100).unwrap();
        let prof = InitialProfile::Notch { center: 1.0, width: 0.2, depth: 1.0 };
        let v = prof.sample(&grid).unwrap();
        assert_eq!(v.values()[50], 0.0);
        assert_eq!(v.values()[0], 1.0);
        assert!(InitialProfile::Notch { center: 1.0, width: 0.2, depth: 1.5 }.validate().is_err());
    }
}
