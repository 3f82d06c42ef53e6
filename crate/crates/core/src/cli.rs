//! Command-line front end: `solve`, `sweep`, `variations` and `check`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration or input error,
//! 3 solver error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::altmin::{alternate_minimize, constrained_jump_construct, reflect_and_extend, AltMinConfig, InitialProfile};
use crate::continuation::{
    limit_checks, sweep, BranchKind, EtaRule, LimitReport, LimitTolerances, RecordDiagnostics, SweepConfig,
    SweepRecord,
};
use crate::criticality::{self, CriticalityReport, DEFAULT_CSTAR};
use crate::energy::{at_energy, EnergyBreakdown, Parameters, PhaseField1D, PiecewiseAffine1D};
use crate::error::{Error, Result};
use crate::io;
use crate::measures::{dirac_concentration, far_field_report, Concentration, FarField};
use crate::mesh::{Grid1D, NodalField1D};
use crate::variations::{
    inner_first_closed, inner_outer_direction, inner_second_closed, inner_via_flow, ms_second_inner_limit_1d,
    outer_first, Extension1D, FlowConfig, VectorField1D,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_) | Error::NonConvergence { .. } => EXIT_SOLVER,
        Error::Contract(_) | Error::Config(_) | Error::Parse(_) | Error::Io(_) => EXIT_CONFIG,
    }
}

#[derive(Parser, Debug)]
#[command(name = "atfield", version, about = "Critical points of the Ambrosio-Tortorelli energy in 1D")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BranchArg {
    Affine,
    Jump,
}

impl From<BranchArg> for BranchKind {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Affine => BranchKind::Affine,
            BranchArg::Jump => BranchKind::Jump,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute one critical state.
    Solve(SolveArgs),
    /// Run an eps sweep described by a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "sweep-out")]
        out_dir: PathBuf,
    },
    /// Inner and outer variations on a saved or freshly solved state.
    Variations {
        /// Config with a `[variations]` section (and `[solve]` when no state is given).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value = "variations.json")]
        out: PathBuf,
    },
    /// Criticality and measure diagnostics of a saved state.
    Check {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CSTAR)]
        cstar: f64,
        /// Residual bound for the state to count as critical.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value = "check.json")]
        out: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct SolveArgs {
    /// Config file whose `[solve]` section supplies defaults for the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    length: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed eta; without it eta = eps^2.
    #[arg(long)]
    eta: Option<f64>,
    /// Number of cells (even).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_enum)]
    branch: Option<BranchArg>,
    /// Upper bound for v(L/2) on the jump branch.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value = "state.csv")]
    out: PathBuf,
    /// Optional JSON summary.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// The `[solve]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSection {
    pub a: f64,
    pub length: f64,
    pub eps: f64,
    #[serde(default = "eps2")]
    pub eta_rule: EtaRule,
    pub n: usize,
    #[serde(default = "affine")]
    pub branch: BranchKind,
    #[serde(default = "alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub altmin: AltMinConfig,
}

fn eps2() -> EtaRule {
    EtaRule::Eps2
}
fn affine() -> BranchKind {
    BranchKind::Affine
}
fn alpha() -> f64 {
    0.2
}

/// The `[variations]` section.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationsSection {
    /// Saved state; when absent the `[solve]` section is solved first.
    #[serde(default)]
    pub state: Option<PathBuf>,
    #[serde(default)]
    pub field: Option<VectorField1D>,
    /// Extension of the boundary data; the affine one when absent.
    #[serde(default)]
    pub extension: Option<Extension1D>,
    #[serde(default)]
    pub flow: FlowConfig,
}

/// A whole config file. Each subcommand reads its own section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub solve: Option<SolveSection>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub limits: Option<LimitTolerances>,
    #[serde(default)]
    pub variations: Option<VariationsSection>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Solve one state as described by a `[solve]` section.
pub fn solve_section(s: &SolveSection) -> Result<PhaseField1D> {
    if !s.n.is_multiple_of(2) {
        return Err(Error::Config(format!("n must be even so that L/2 is a node, got {}", s.n)));
    }
    let params = Parameters::new(s.eps, s.eta_rule.eta(s.eps))?;
    match s.branch {
        BranchKind::Affine => {
            let grid = Grid1D::new(s.length, s.n)?;
            let v = match &s.altmin.initial {
                InitialProfile::FromState => NodalField1D::constant(grid, 1.0)?,
                p => p.sample(&grid)?,
            };
            let start = PhaseField1D::with_linear_u(v, params, (0.0, s.a))?;
            Ok(alternate_minimize(&start, &s.altmin)?.0)
        }
        BranchKind::Jump => {
            let jc = constrained_jump_construct(s.n / 2, s.a, s.length, params, s.alpha, &s.altmin)?;
            reflect_and_extend(&jc.half)
        }
    }
}

/// JSON written by `solve --report`.
#[derive(Clone, Debug, Serialize)]
pub struct SolveSummary {
    pub solve: SolveSection,
    pub energy: EnergyBreakdown,
    pub criticality: CriticalityReport,
}

/// JSON written by `check`.
#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub energy: EnergyBreakdown,
    pub criticality: CriticalityReport,
    pub concentration: Concentration,
    pub far_field: FarField,
    pub tolerance: f64,
    pub critical: bool,
}

/// JSON written by `variations`.
#[derive(Clone, Debug, Serialize)]
pub struct VariationsReport {
    pub field: VectorField1D,
    pub extension: Extension1D,
    pub inner_first_closed: f64,
    pub inner_first_flow: f64,
    pub first_gap: f64,
    pub inner_second_closed: f64,
    pub inner_second_flow: f64,
    pub second_gap: f64,
    /// Outer first variation along `(X (u - G)', X v')`.
    pub outer_first_along_flow_direction: f64,
    /// `inner_first_flow + outer_first_along_flow_direction`, zero up to differencing error.
    pub flow_direction_identity_gap: f64,
    /// Predicted limits along the affine and jump branches (data `(0, a)` only).
    pub ms_second_limit_affine: Option<f64>,
    pub ms_second_limit_jump: Option<f64>,
}

/// JSON written by `sweep`.
#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary<'a> {
    pub config_hash: &'a str,
    pub branch: BranchKind,
    pub all_records_ok: bool,
    pub records: &'a [SweepRecord],
    pub limits: Option<crate::continuation::Limits>,
    pub at_limit: Option<f64>,
    pub limit_checks: Option<LimitReport>,
}

/// Evaluate the variations report.
pub fn variations_report(
    state: &PhaseField1D,
    field: &VectorField1D,
    ext: &Extension1D,
    flow: FlowConfig,
) -> Result<VariationsReport> {
    let f1c = inner_first_closed(state, field, ext)?;
    let f2c = inner_second_closed(state, field, ext)?;
    let f1f = inner_via_flow(state, field, ext, 1, flow)?;
    let f2f = inner_via_flow(state, field, ext, 2, flow)?;
    let dir = inner_outer_direction(state, field, ext)?;
    let o = outer_first(state, &dir)?;
    let l = state.grid().length();
    let (g0, g1) = state.boundary();
    // the limits are the centred jump and the affine function of the data (0, a)
    let (ms_aff, ms_jump) = if g0 == 0.0 && g1 != 0.0 {
        (
            Some(ms_second_inner_limit_1d(&PiecewiseAffine1D::affine(g1, l)?, field, ext)?),
            Some(ms_second_inner_limit_1d(&PiecewiseAffine1D::centered_jump(g1, l)?, field, ext)?),
        )
    } else {
        (None, None)
    };
    Ok(VariationsReport {
        field: field.clone(),
        extension: ext.clone(),
        inner_first_closed: f1c,
        inner_first_flow: f1f,
        first_gap: (f1c - f1f).abs(),
        inner_second_closed: f2c,
        inner_second_flow: f2f,
        second_gap: (f2c - f2f).abs(),
        outer_first_along_flow_direction: o,
        flow_direction_identity_gap: (f1f + o).abs(),
        ms_second_limit_affine: ms_aff,
        ms_second_limit_jump: ms_jump,
    })
}

/// Build the check report of a state.
pub fn check_report(state: &PhaseField1D, cstar: f64, tol: f64) -> Result<CheckReport> {
    let criticality = criticality::report(state, cstar)?;
    let critical = criticality.u_residual_norm <= tol && criticality.v_residual_norm <= tol;
    let hw = 0.25f64.min(0.5 * state.grid().length());
    Ok(CheckReport {
        energy: at_energy(state),
        concentration: dirac_concentration(state),
        far_field: far_field_report(state, hw)?,
        criticality,
        tolerance: tol,
        critical,
    })
}

fn solve_section_from_args(a: &SolveArgs) -> Result<SolveSection> {
    let base = match &a.config {
        Some(p) => ConfigFile::load(p)?.solve,
        None => None,
    };
    let need = |name: &str| Error::Config(format!("solve needs --{name} (or a [solve] section)"));
    let pick = |flag: Option<f64>, from: Option<f64>, name: &str| flag.or(from).ok_or_else(|| need(name));
    let b = base.as_ref();
    let eps = pick(a.eps, b.map(|s| s.eps), "eps")?;
    Ok(SolveSection {
        a: pick(a.a, b.map(|s| s.a), "a")?,
        length: pick(a.length, b.map(|s| s.length), "length")?,
        eps,
        eta_rule: match a.eta {
            Some(e) => EtaRule::Fixed(e),
            None => b.map(|s| s.eta_rule).unwrap_or(EtaRule::Eps2),
        },
        n: a.n.or(b.map(|s| s.n)).ok_or_else(|| need("n"))?,
        branch: a.branch.map(Into::into).or(b.map(|s| s.branch)).unwrap_or(BranchKind::Affine),
        alpha: a.alpha.or(b.map(|s| s.alpha)).unwrap_or(0.2),
        altmin: b.map(|s| s.altmin.clone()).unwrap_or_default(),
    })
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}").replace('.', "p")
}

fn run_sweep(config: &Path, out_dir: &Path) -> Result<i32> {
    let file = ConfigFile::load(config)?;
    let cfg = file.sweep.ok_or_else(|| Error::Config("config has no [sweep] section".into()))?;
    let tol = file.limits.unwrap_or_default();
    let result = sweep(&cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    let mut profiles = Vec::new();
    for rec in &result.records {
        if let (Some(state), Some(d)) = (&rec.state, &rec.diagnostics) {
            let tag = eps_tag(rec.eps);
            io::write_state_csv(&out_dir.join(format!("state_eps_{tag}.csv")), state)?;
            let prof = format!("profile_eps_{tag}.dat");
            std::fs::write(out_dir.join(&prof), io::profile_dat(state))?;
            profiles.push((rec.eps, prof));
            rows.push(sweep_row(rec.eps, rec.eta, d));
        }
    }
    let header = ["eps", "eta", "energy", "c", "d", "v_mid", "equipartition", "window_mass", "far_field"];
    std::fs::write(out_dir.join("sweep.dat"), io::dat_table(&header, &rows))?;
    std::fs::write(out_dir.join("sweep.gp"), io::gnuplot_script("sweep.dat", &profiles))?;
    let checks = match result.limits {
        Some(_) => Some(limit_checks(&result, &tol)?),
        None => None,
    };
    let summary = SweepSummary {
        config_hash: &result.config_hash,
        branch: result.branch,
        all_records_ok: result.all_ok(),
        records: &result.records,
        limits: result.limits,
        at_limit: result.limits.map(|l| l.at_limit.limit),
        limit_checks: checks.clone(),
    };
    io::write_json(&out_dir.join("summary.json"), &summary)?;
    for rec in &result.records {
        if let crate::continuation::RecordStatus::Failed { message } = &rec.status {
            eprintln!("eps = {}: {message}", rec.eps);
        }
    }
    if !result.all_ok() {
        return Ok(EXIT_SOLVER);
    }
    Ok(match checks {
        Some(c) if !c.all_pass => EXIT_CHECK_FAILED,
        _ => EXIT_OK,
    })
}

fn sweep_row(eps: f64, eta: f64, d: &RecordDiagnostics) -> Vec<f64> {
    vec![
        eps,
        eta,
        d.energy.total,
        d.c,
        d.d,
        d.v_mid,
        d.energy.equipartition_residual,
        d.window_mass,
        d.far_field.surface,
    ]
}

fn run_variations(config: Option<&Path>, state: Option<&Path>, out: &Path) -> Result<i32> {
    let file = match config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let sec = file.variations.clone().unwrap_or(VariationsSection {
        state: None,
        field: None,
        extension: None,
        flow: FlowConfig::default(),
    });
    let st = match state.map(Path::to_path_buf).or(sec.state.clone()) {
        Some(p) => io::read_state_csv(&p)?,
        None => {
            let s = file.solve.as_ref().ok_or_else(|| Error::Config("variations needs --state or a [solve] section".into()))?;
            solve_section(s)?
        }
    };
    let l = st.grid().length();
    let field = sec.field.unwrap_or(VectorField1D::OddBump { center: 0.5 * l, radius: 0.25 * l, amplitude: 0.7 });
    let ext = sec.extension.unwrap_or_else(|| Extension1D::affine(st.boundary(), l));
    let rep = variations_report(&st, &field, &ext, sec.flow)?;
    io::write_json(out, &rep)?;
    Ok(EXIT_OK)
}

fn run_check(state: &Path, cstar: f64, tol: f64, out: &Path) -> Result<i32> {
    let st = io::read_state_csv(state)?;
    let rep = check_report(&st, cstar, tol)?;
    io::write_json(out, &rep)?;
    Ok(if rep.critical { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(args) => {
            let sec = solve_section_from_args(&args)?;
            let state = solve_section(&sec)?;
            io::write_state_csv(&args.out, &state)?;
            if let Some(p) = &args.report {
                let summary = SolveSummary {
                    energy: at_energy(&state),
                    criticality: criticality::report(&state, DEFAULT_CSTAR)?,
                    solve: sec,
                };
                io::write_json(p, &summary)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep { config, out_dir } => run_sweep(&config, &out_dir),
        Command::Variations { config, state, out } => run_variations(config.as_deref(), state.as_deref(), &out),
        Command::Check { state, cstar, tol, out } => run_check(&state, cstar, tol, &out),
    }
}

/// Parse `argv`, execute, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
