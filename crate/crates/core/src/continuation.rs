//! Sweeps in `eps` along the affine and jump branches, extrapolation to
//! `eps -> 0` and the limit checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::altmin::{
    alternate_minimize, constrained_jump_construct, reflect_and_extend, AltMinConfig, InitialProfile,
};
use crate::criticality::{self, classify_v_mid, Branch, DEFAULT_CSTAR};
use crate::energy::{at_energy, ms_energy_1d, ms_min_value, EnergyBreakdown, Parameters, PhaseField1D, PiecewiseAffine1D};
use crate::error::{config, contract, Error, Result};
use crate::measures::{dirac_concentration, far_field_report, mass_in_window, surface_densities, FarField};
use crate::mesh::{Grid1D, NodalField1D};
use crate::variations::{
    inner_first_closed, inner_second_closed, inner_via_flow, ms_second_inner_limit_1d, Extension1D, FlowConfig,
    VectorField1D,
};

/// Coarsest admissible ratio `h / eps`.
pub const MAX_H_OVER_EPS: f64 = 0.125;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKind {
    Affine,
    Jump,
}

/// Rule fixing `eta` from `eps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaRule {
    /// `eta = eps^2`.
    Eps2,
    Fixed(f64),
}

impl EtaRule {
    pub fn eta(self, eps: f64) -> f64 {
        match self {
            EtaRule::Eps2 => eps * eps,
            EtaRule::Fixed(e) => e,
        }
    }
}

/// How many cells each solve uses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRule {
    /// The same cell count at every `eps`.
    Cells(usize),
    /// `ceil(k L / eps)` cells, rounded up to an even count.
    CellsPerEps(f64),
}

/// Vector field and extension for the inner variations evaluated per record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationRequest {
    pub field: VectorField1D,
    pub extension: Extension1D,
    /// Also evaluate the flow-based values (several extra energy evaluations).
    #[serde(default)]
    pub flow: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub branch: BranchKind,
    pub eps_list: Vec<f64>,
    pub a: f64,
    pub length: f64,
    #[serde(default = "default_eta_rule")]
    pub eta_rule: EtaRule,
    pub grid: GridRule,
    /// Upper bound for `v(L/2)` in the jump construction.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_cstar")]
    pub cstar: f64,
    /// Half width of the window about `L/2` excluded from the far field.
    #[serde(default = "default_far_field")]
    pub far_field_half_width: f64,
    /// The window `[L/2 - K eps, L/2 + K eps]` for the concentrated mass.
    #[serde(default = "default_window_k")]
    pub window_k: f64,
    #[serde(default)]
    pub altmin: AltMinConfig,
    #[serde(default)]
    pub variations: Option<VariationRequest>,
    #[serde(default)]
    pub flow: FlowConfig,
}

fn default_eta_rule() -> EtaRule {
    EtaRule::Eps2
}
fn default_alpha() -> f64 {
    0.2
}
fn default_cstar() -> f64 {
    DEFAULT_CSTAR
}
fn default_far_field() -> f64 {
    0.25
}
fn default_window_k() -> f64 {
    10.0
}

impl SweepConfig {
    /// Configuration with the documented defaults for everything but the physics.
    pub fn new(branch: BranchKind, eps_list: Vec<f64>, a: f64, length: f64, grid: GridRule) -> Self {
        Self {
            branch,
            eps_list,
            a,
            length,
            eta_rule: default_eta_rule(),
            grid,
            alpha: default_alpha(),
            cstar: default_cstar(),
            far_field_half_width: default_far_field(),
            window_k: default_window_k(),
            altmin: AltMinConfig::default(),
            variations: None,
            flow: FlowConfig::default(),
        }
    }

    /// Even cell count used at `eps`.
    pub fn cells_at(&self, eps: f64) -> usize {
        let n = match self.grid {
            GridRule::Cells(n) => n,
            GridRule::CellsPerEps(k) => (k * self.length / eps).ceil() as usize,
        };
        n + n % 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_list.is_empty() {
            return config("eps_list is empty");
        }
        if self.eps_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return config("every eps must be positive and finite");
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return config("eps_list must be strictly decreasing");
        }
        if !(self.length > 0.0 && self.length.is_finite()) || !self.a.is_finite() {
            return config("a must be finite and L positive");
        }
        if !(self.cstar > 0.0) {
            return config("cstar must be positive");
        }
        if let GridRule::CellsPerEps(k) = self.grid {
            if !(k > 0.0 && k.is_finite()) {
                return config("cells_per_eps must be positive");
            }
        }
        for &eps in &self.eps_list {
            let eta = self.eta_rule.eta(eps);
            if !(0.0..=eps).contains(&eta) || eta <= 0.0 {
                return config(format!("eta = {eta} must lie in (0, eps] at eps = {eps}"));
            }
            let n = self.cells_at(eps);
            let ratio = self.length / n as f64 / eps;
            if ratio > MAX_H_OVER_EPS * (1.0 + 1e-12) {
                return config(format!(
                    "grid under-resolved at eps = {eps}: h/eps = {ratio:.4} exceeds 1/8 ({n} cells on L = {})",
                    self.length
                ));
            }
        }
        if self.far_field_half_width < 0.0 || 2.0 * self.far_field_half_width > self.length {
            return config("far_field_half_width must lie in [0, L/2]");
        }
        if self.branch == BranchKind::Jump && !(self.a > 0.0) {
            return config("the jump branch needs a > 0");
        }
        self.altmin.validate()
    }

    /// SHA-256 of the canonical JSON form, in hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Inner variations recorded per state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationValues {
    pub inner_first: f64,
    pub inner_second: f64,
    pub inner_first_flow: Option<f64>,
    pub inner_second_flow: Option<f64>,
    /// Predicted `eps -> 0` limit of the second inner variation for the
    /// classified limit of this branch.
    pub predicted_second_limit: f64,
}

/// Diagnostics of one successful solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordDiagnostics {
    pub energy: EnergyBreakdown,
    pub c: f64,
    pub flux_dev: f64,
    pub d: f64,
    pub discrepancy_dev: f64,
    pub v_mid: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub u_abs_max: f64,
    pub v_argmin: f64,
    pub is_unimodal: bool,
    pub symmetry_dev: f64,
    pub u_residual: f64,
    pub v_residual: f64,
    pub branch: Branch,
    /// Classification with `Cstar / 2` and `2 Cstar`.
    pub branch_half_cstar: Branch,
    pub branch_double_cstar: Branch,
    pub termination: String,
    pub iterations: usize,
    /// Largest energy increase between consecutive half-steps.
    pub max_energy_increase: f64,
    /// `eps v'^2` mass in `[L/2 - K eps, L/2 + K eps]`.
    pub window_mass: f64,
    pub far_field: FarField,
    pub concentration_fraction: f64,
    pub variations: Option<VariationValues>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum RecordStatus {
    Ok,
    Failed { message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub eta: f64,
    pub n_cells: usize,
    pub config_hash: String,
    #[serde(flatten)]
    pub status: RecordStatus,
    pub diagnostics: Option<RecordDiagnostics>,
    #[serde(skip)]
    pub state: Option<PhaseField1D>,
}

/// Least-squares fit `value = limit + slope eps^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub limit: f64,
    pub slope: f64,
    pub exponent: f64,
    /// Root of the summed squared residuals.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub c0: Fit,
    pub d0: Fit,
    pub at_limit: Fit,
    pub alpha_mass: Fit,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub branch: BranchKind,
    pub a: f64,
    pub length: f64,
    pub config_hash: String,
    pub records: Vec<SweepRecord>,
    /// Present when at least three records succeeded.
    pub limits: Option<Limits>,
}

impl SweepResult {
    /// Successful records with their diagnostics.
    pub fn ok_records(&self) -> impl Iterator<Item = (&SweepRecord, &RecordDiagnostics)> {
        self.records.iter().filter_map(|r| r.diagnostics.as_ref().map(|d| (r, d)))
    }

    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.status == RecordStatus::Ok)
    }
}

/// Fit `value = limit + slope eps^p` for `p` in `{1/2, 1}`, keeping the
/// exponent with the smaller residual (ties go to `p = 1`).
pub fn extrapolate(pairs: &[(f64, f64)]) -> Result<Fit> {
    if pairs.len() < 3 {
        return contract(format!("extrapolation needs at least 3 pairs, got {}", pairs.len()));
    }
    if pairs.iter().any(|(e, v)| !(e.is_finite() && *e > 0.0 && v.is_finite())) {
        return contract("extrapolation pairs must have positive eps and finite values");
    }
    let mut best: Option<Fit> = None;
    for p in [1.0, 0.5] {
        let fit = linear_fit(pairs, p)?;
        if best.is_none_or(|b| fit.residual < b.residual) {
            best = Some(fit);
        }
    }
    Ok(best.expect("two candidates"))
}

fn linear_fit(pairs: &[(f64, f64)], p: f64) -> Result<Fit> {
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(e, _)| e.powf(p)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = pairs.iter().map(|(_, v)| v).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return contract("extrapolation needs distinct eps values");
    }
    let sxy: f64 = xs.iter().zip(pairs).map(|(x, (_, y))| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let limit = my - slope * mx;
    let residual = xs.iter().zip(pairs).map(|(x, (_, y))| (limit + slope * x - y).powi(2)).sum::<f64>().sqrt();
    Ok(Fit { limit, slope, exponent: p, residual })
}

/// The classified limit: the affine function for `Affine`, the centred jump otherwise.
pub fn branch_limit(branch: BranchKind, a: f64, length: f64) -> Result<PiecewiseAffine1D> {
    match branch {
        BranchKind::Affine => PiecewiseAffine1D::affine(a, length),
        BranchKind::Jump => PiecewiseAffine1D::centered_jump(a, length),
    }
}

fn solve_one(cfg: &SweepConfig, eps: f64) -> Result<(PhaseField1D, crate::altmin::AltMinTrace)> {
    let params = Parameters::new(eps, cfg.eta_rule.eta(eps))?;
    let n = cfg.cells_at(eps);
    match cfg.branch {
        BranchKind::Affine => {
            let grid = Grid1D::new(cfg.length, n)?;
            let v = match &cfg.altmin.initial {
                InitialProfile::FromState => NodalField1D::constant(grid, 1.0)?,
                p => p.sample(&grid)?,
            };
            let start = PhaseField1D::with_linear_u(v, params, (0.0, cfg.a))?;
            alternate_minimize(&start, &cfg.altmin)
        }
        BranchKind::Jump => {
            let mut alt = cfg.altmin.clone();
            if !matches!(alt.initial, InitialProfile::Explicit { .. }) {
                alt.initial = InitialProfile::UniformOne;
            }
            let jc = constrained_jump_construct(n / 2, cfg.a, cfg.length, params, cfg.alpha, &alt)?;
            Ok((reflect_and_extend(&jc.half)?, jc.trace))
        }
    }
}

fn diagnose(
    cfg: &SweepConfig,
    state: &PhaseField1D,
    trace: &crate::altmin::AltMinTrace,
) -> Result<RecordDiagnostics> {
    let rep = criticality::report(state, cfg.cstar)?;
    let eps = state.eps();
    let v_mid = rep.v_mid.ok_or_else(|| Error::Contract("no node at L/2".into()))?;
    let v = state.v().values();
    let grid = state.grid();
    let dens = surface_densities(state);
    let half = 0.5 * cfg.length;
    let window_mass = mass_in_window(grid, &dens.gradient, half, (cfg.window_k * eps).min(half))?;
    let variations = match &cfg.variations {
        None => None,
        Some(req) => {
            let limit = branch_limit(cfg.branch, cfg.a, cfg.length)?;
            let (f1, f2) = if req.flow {
                (
                    Some(inner_via_flow(state, &req.field, &req.extension, 1, cfg.flow)?),
                    Some(inner_via_flow(state, &req.field, &req.extension, 2, cfg.flow)?),
                )
            } else {
                (None, None)
            };
            Some(VariationValues {
                inner_first: inner_first_closed(state, &req.field, &req.extension)?,
                inner_second: inner_second_closed(state, &req.field, &req.extension)?,
                inner_first_flow: f1,
                inner_second_flow: f2,
                predicted_second_limit: ms_second_inner_limit_1d(&limit, &req.field, &req.extension)?,
            })
        }
    };
    Ok(RecordDiagnostics {
        energy: at_energy(state),
        c: rep.flux_mean,
        flux_dev: rep.flux_dev,
        d: rep.discrepancy_mean,
        discrepancy_dev: rep.discrepancy_dev,
        v_mid,
        v_min: rep.v_min,
        v_max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        u_abs_max: state.u().values().iter().fold(0.0, |m, x| m.max(x.abs())),
        v_argmin: rep.v_argmin,
        is_unimodal: rep.is_unimodal,
        symmetry_dev: rep.symmetry_dev,
        u_residual: rep.u_residual_norm,
        v_residual: rep.v_residual_norm,
        branch: rep.branch,
        branch_half_cstar: classify_v_mid(v_mid, eps, 0.5 * cfg.cstar),
        branch_double_cstar: classify_v_mid(v_mid, eps, 2.0 * cfg.cstar),
        termination: trace.termination.status().to_string(),
        iterations: trace.iteration_count,
        max_energy_increase: trace.max_increase(),
        window_mass,
        far_field: far_field_report(state, cfg.far_field_half_width)?,
        concentration_fraction: dirac_concentration(state).fraction,
        variations,
    })
}

/// Run one solve per `eps`, in parallel, and attach diagnostics.
///
/// Solver failures (including a violated `alpha` condition) become failed
/// records; configuration errors abort the sweep.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let hash = cfg.hash();
    let records: Vec<Result<SweepRecord>> = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let base = |status, diagnostics, state| SweepRecord {
                eps,
                eta: cfg.eta_rule.eta(eps),
                n_cells: cfg.cells_at(eps),
                config_hash: hash.clone(),
                status,
                diagnostics,
                state,
            };
            match solve_one(cfg, eps) {
                Ok((state, trace)) => {
                    let d = diagnose(cfg, &state, &trace)?;
                    Ok(base(RecordStatus::Ok, Some(d), Some(state)))
                }
                Err(e @ (Error::Config(_) | Error::Contract(_) | Error::Io(_) | Error::Parse(_))) => Err(e),
                Err(e) => Ok(base(RecordStatus::Failed { message: e.to_string() }, None, None)),
            }
        })
        .collect();
    let records = records.into_iter().collect::<Result<Vec<_>>>()?;
    let mut result =
        SweepResult { branch: cfg.branch, a: cfg.a, length: cfg.length, config_hash: hash, records, limits: None };
    result.limits = compute_limits(&result)?;
    Ok(result)
}

fn compute_limits(result: &SweepResult) -> Result<Option<Limits>> {
    let ok: Vec<(f64, &RecordDiagnostics)> = result.ok_records().map(|(r, d)| (r.eps, d)).collect();
    if ok.len() < 3 {
        return Ok(None);
    }
    let fit = |f: &dyn Fn(&RecordDiagnostics) -> f64| extrapolate(&ok.iter().map(|(e, d)| (*e, f(d))).collect::<Vec<_>>());
    Ok(Some(Limits {
        c0: fit(&|d| d.c)?,
        d0: fit(&|d| d.d)?,
        at_limit: fit(&|d| d.energy.total)?,
        alpha_mass: fit(&|d| d.window_mass)?,
    }))
}

/// Tolerances of [`limit_checks`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitTolerances {
    /// Absolute distance of `c0` to `{0, a/L}`.
    pub c0: f64,
    /// Bound on `|d0 + c0^2|`.
    pub d0: f64,
    /// Bound on the equipartition residual at the smallest `eps`.
    pub equipartition: f64,
    /// Absolute distance of the concentrated mass to `{0, 1/2}`.
    pub alpha_mass: f64,
    /// Relative distance of the energy limit to the limit's MS energy.
    pub at_limit_rel: f64,
}

impl Default for LimitTolerances {
    fn default() -> Self {
        Self { c0: 0.02, d0: 0.02, equipartition: 0.05, alpha_mass: 0.025, at_limit_rel: 0.03 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: f64, target: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, target, tolerance, pass: (value - target).abs() <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Compare the extrapolated limits with their admissible values:
/// (a) `c0` in `{0, a/L}`, (b) `d0 + c0^2 = 0`, (c) equipartition residuals
/// decreasing in `eps` and small at the end, (d) concentrated mass in
/// `{0, 1/2}`, (e) energy limit equal to the MS energy of the classified limit.
pub fn limit_checks(result: &SweepResult, tol: &LimitTolerances) -> Result<LimitReport> {
    let Some(lim) = result.limits else {
        return contract("limit checks need extrapolated limits (at least three successful records)");
    };
    let (a, l) = (result.a, result.length);
    let slope = a / l;
    let nearest = |x: f64, set: [f64; 2]| if (x - set[0]).abs() <= (x - set[1]).abs() { set[0] } else { set[1] };
    let c0 = lim.c0.limit;
    let c_target = nearest(c0, [0.0, slope]);
    let mut checks = vec![
        Check::new("c0_in_set", c0, c_target, tol.c0),
        Check::new("d0_plus_c0_sq", lim.d0.limit + c0 * c0, 0.0, tol.d0),
    ];
    let eq: Vec<f64> = result.ok_records().map(|(_, d)| d.energy.equipartition_residual).collect();
    let decreasing = eq.windows(2).all(|w| w[1] < w[0]);
    let last = eq.last().copied().unwrap_or(f64::NAN);
    checks.push(Check {
        name: "equipartition".into(),
        value: last,
        target: 0.0,
        tolerance: tol.equipartition,
        pass: !eq.is_empty() && decreasing && last <= tol.equipartition,
    });
    let am = lim.alpha_mass.limit;
    checks.push(Check::new("alpha_mass_in_set", am, nearest(am, [0.0, 0.5]), tol.alpha_mass));
    let classified = if c_target == 0.0 && slope != 0.0 { BranchKind::Jump } else { BranchKind::Affine };
    let ms = ms_energy_1d(&branch_limit(classified, a, l)?);
    checks.push(Check::new("at_limit_vs_ms", lim.at_limit.limit, ms, tol.at_limit_rel * ms.abs()));
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(LimitReport { checks, all_pass })
}

/// Comparison of the jump and affine energy limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub jump_limit: f64,
    pub affine_limit: f64,
    pub ms_min: f64,
    pub gap: f64,
    pub combined_tolerance: f64,
    /// The jump limit exceeds the affine limit by more than the tolerances
    /// and exceeds the minimal value: a non-minimizing critical family.
    pub confirmed: bool,
}

pub fn non_minimizing_witness(jump: &SweepResult, affine: &SweepResult, tol: &LimitTolerances) -> Result<Witness> {
    let (Some(j), Some(af)) = (jump.limits, affine.limits) else {
        return contract("the witness needs extrapolated limits on both branches");
    };
    let (jl, al) = (j.at_limit.limit, af.at_limit.limit);
    let ms_min = ms_min_value(jump.a, jump.length)?;
    let combined = tol.at_limit_rel * (jl.abs() + al.abs());
    let gap = jl - al;
    Ok(Witness {
        jump_limit: jl,
        affine_limit: al,
        ms_min,
        gap,
        combined_tolerance: combined,
        confirmed: jump.all_ok() && affine.all_ok() && gap > combined && jl > ms_min * (1.0 + tol.at_limit_rel),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn extrapolation_of_synthetic_sequences() {
        let eps = [0.08, 0.04, 0.02, 0.01];
        let constant: Vec<_> = eps.iter().map(|&e| (e, 0.7)).collect();
        let f = extrapolate(&constant).unwrap();
        assert_relative_eq!(f.limit, 0.7, epsilon = 1e-14);
        assert!(f.residual < 1e-14);
        let sq: Vec<_> = eps.iter().map(|&e: &f64| (e, 1.0 + e.sqrt())).collect();
        let f = extrapolate(&sq).unwrap();
        assert!((f.limit - 1.0).abs() < 1e-10);
        assert_eq!(f.exponent, 0.5);
        assert!(extrapolate(&sq[..2]).is_err());
    }

    #[test]
    fn under_resolved_grid_is_rejected_with_ratio() {
        let cfg = SweepConfig::new(BranchKind::Affine, vec![0.05], 1.0, 2.0, GridRule::Cells(100));
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("h/eps = 0.4000"), "{err}");
        let ok = SweepConfig::new(BranchKind::Affine, vec![0.05], 1.0, 2.0, GridRule::Cells(320));
        ok.validate().unwrap();
        let bad_order = SweepConfig::new(BranchKind::Affine, vec![0.02, 0.04], 1.0, 2.0, GridRule::CellsPerEps(16.0));
        assert!(bad_order.validate().is_err());
    }

    #[test]
    fn single_eps_sweep_has_no_limits() {
        let cfg = SweepConfig::new(BranchKind::Affine, vec![0.05], 1.0, 2.0, GridRule::CellsPerEps(16.0));
        let r = sweep(&cfg).unwrap();
        assert_eq!(r.records.len(), 1);
        assert!(r.limits.is_none());
        assert_eq!(r.records[0].config_hash, cfg.hash());
        assert_eq!(r.records[0].diagnostics.as_ref().unwrap().branch, Branch::Affine);
    }

    #[test]
    fn check_a_fails_for_off_set_flux() {
        let fit = |x| Fit { limit: x, slope: 0.0, exponent: 1.0, residual: 0.0 };
        let r = SweepResult {
            branch: BranchKind::Affine,
            a: 1.0,
            length: 2.0,
            config_hash: String::new(),
            records: Vec::new(),
            limits: Some(Limits { c0: fit(0.3), d0: fit(-0.09), at_limit: fit(0.5), alpha_mass: fit(0.0) }),
        };
        let rep = limit_checks(&r, &LimitTolerances::default()).unwrap();
        assert_eq!(rep.checks[0].name, "c0_in_set");
        assert!(!rep.checks[0].pass);
        assert!(!rep.all_pass);
    }
}
