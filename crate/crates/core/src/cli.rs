//! Run configuration, parameter sweeps and CSV output for the `darkstate`
//! binary.
//!
//! A run is described by a [`RunConfig`], resolved from an optional TOML file
//! plus command-line [`Overrides`]. Rates in `params` are given in units of
//! the peak coupling `g`, except in `sweep-adiabaticity-g`, where the four
//! loss rates are given in units of `1/T` (`g_f` stays in units of `g` in
//! every mode).
//!
//! Sweep output is a CSV with header [`CSV_HEADER`] and one row per grid
//! point, ordered by the swept value. Numbers are written with 17
//! significant digits and the file contains nothing run-dependent besides
//! the results, so identical configurations give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{self, DEFAULT_NORM_DT};
use crate::error::{Error, Result};
use crate::fidelity::{self, InputKind, InputSpec};
use crate::matops::C64;
use crate::network::{self, linear_ramp_schedule, CouplingSchedule, NetworkParams, MODE_COUNT};

pub const CSV_HEADER: &str = "swept_value,F_coherent,F_squeezed,F_qubit,sum_rule_residual,adiabaticity";

/// Rows whose sum-rule residual exceeds this are flagged as unconverged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-4;

pub const MIN_STEPS: usize = 100;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    Single,
    SweepCavityLoss,
    SweepFiberMechLoss,
    SweepAdiabaticityG,
    #[serde(rename = "sweep-adiabaticity-T", alias = "sweep-adiabaticity-t")]
    SweepAdiabaticityT,
    DarkStateReport,
}

impl RunMode {
    pub const ALL: [RunMode; 6] = [
        RunMode::Single,
        RunMode::SweepCavityLoss,
        RunMode::SweepFiberMechLoss,
        RunMode::SweepAdiabaticityG,
        RunMode::SweepAdiabaticityT,
        RunMode::DarkStateReport,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Single => "single",
            RunMode::SweepCavityLoss => "sweep-cavity-loss",
            RunMode::SweepFiberMechLoss => "sweep-fiber-mech-loss",
            RunMode::SweepAdiabaticityG => "sweep-adiabaticity-g",
            RunMode::SweepAdiabaticityT => "sweep-adiabaticity-T",
            RunMode::DarkStateReport => "dark-state-report",
        }
    }

    fn is_sweep(self) -> bool {
        !matches!(self, RunMode::Single | RunMode::DarkStateReport)
    }
}

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RunMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown mode '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|k| {
                let u = k as f64 / (n - 1) as f64;
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + u * (self.stop - self.start),
                    Spacing::Log => (self.start.ln() + u * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

/// Fully resolved run description.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub params: NetworkParams,
    /// Peak coupling.
    pub g: f64,
    /// Transfer duration.
    pub duration: f64,
    pub inputs: Vec<InputSpec>,
    /// Minimum steps per transfer; raised per point if `max |M| dt` would
    /// exceed the default target.
    pub steps: usize,
    pub grid: Grid,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for each mode.
    pub fn defaults(mode: RunMode) -> Self {
        let fig2 = NetworkParams { kappa_o: 0.0, kappa_m: 0.002, kappa_mw: 0.0, kappa_f: 0.002, g_f: 1.0, n_th: 10.0 };
        let fig3 = NetworkParams { kappa_o: 0.002, kappa_m: 0.0, kappa_mw: 0.002, kappa_f: 0.0, g_f: 1.0, n_th: 10.0 };
        let fig4 = NetworkParams { kappa_o: 0.05, kappa_m: 0.05, kappa_mw: 0.05, kappa_f: 0.05, g_f: 1.0, n_th: 10.0 };
        let loss_grid = Grid { start: 2e-4, stop: 2e-1, points: 16, spacing: Spacing::Log };
        let adiabatic_grid = Grid { start: 0.5, stop: 50.0, points: 16, spacing: Spacing::Log };
        let (params, g, duration, grid) = match mode {
            RunMode::Single => (NetworkParams::lossless(1.0), 1.0, 50.0, Grid { points: 1, ..loss_grid }),
            RunMode::SweepCavityLoss => (fig2, 1.0, 50.0, loss_grid),
            RunMode::SweepFiberMechLoss => (fig3, 1.0, 50.0, loss_grid),
            RunMode::SweepAdiabaticityG => (fig4, 1.0, 1.0, adiabatic_grid),
            RunMode::SweepAdiabaticityT => (fig4, 1.0, 50.0, adiabatic_grid),
            RunMode::DarkStateReport => (
                NetworkParams { kappa_o: 0.002, kappa_mw: 0.002, ..fig2 },
                1.0,
                50.0,
                Grid { start: 0.0, stop: 50.0, points: 101, spacing: Spacing::Linear },
            ),
        };
        Self {
            mode,
            params,
            g,
            duration,
            inputs: default_inputs(),
            steps: engine::MIN_DEFAULT_STEPS,
            grid,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg = |m: String| Err(Error::Config(m));
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.g.is_finite() && self.g > 0.0 && self.duration.is_finite() && self.duration > 0.0) {
            return cfg(format!("g and T must be positive, got g = {}, T = {}", self.g, self.duration));
        }
        if self.steps < MIN_STEPS {
            return cfg(format!("steps must be >= {MIN_STEPS}, got {}", self.steps));
        }
        for kind in [InputKind::Coherent, InputKind::Squeezed, InputKind::Qubit] {
            let n = self.inputs.iter().filter(|i| i.kind() == kind).count();
            if n != 1 {
                return cfg(format!("need exactly one {kind:?} input, got {n}"));
            }
        }
        if self.mode.is_sweep() || self.mode == RunMode::DarkStateReport {
            let g = &self.grid;
            if g.points < 2 {
                return cfg(format!("grid needs at least 2 points, got {}", g.points));
            }
            if !(g.start.is_finite() && g.stop.is_finite() && g.start < g.stop) {
                return cfg(format!("grid needs start < stop, got [{}, {}]", g.start, g.stop));
            }
            if g.spacing == Spacing::Log && g.start <= 0.0 {
                return cfg("log grid needs a positive start".into());
            }
            if self.mode != RunMode::DarkStateReport && g.start <= 0.0 {
                return cfg("swept values must be positive".into());
            }
        }
        Ok(())
    }

    fn input(&self, kind: InputKind) -> &InputSpec {
        self.inputs.iter().find(|i| i.kind() == kind).expect("validated")
    }

    /// Physical schedule and rates for one sweep value.
    pub fn point(&self, x: f64) -> Result<(CouplingSchedule, NetworkParams)> {
        let p = self.params;
        let (g, duration, params) = match self.mode {
            RunMode::Single | RunMode::DarkStateReport => (self.g, self.duration, p.scaled(self.g)),
            RunMode::SweepCavityLoss => {
                (self.g, self.duration, NetworkParams { kappa_o: x, kappa_mw: x, ..p }.scaled(self.g))
            }
            RunMode::SweepFiberMechLoss => {
                (self.g, self.duration, NetworkParams { kappa_f: x, kappa_m: x, ..p }.scaled(self.g))
            }
            RunMode::SweepAdiabaticityG => {
                let g = 2.0 * x / self.duration;
                let mut q = p.scaled(1.0 / self.duration);
                q.g_f = p.g_f * g;
                (g, self.duration, q)
            }
            RunMode::SweepAdiabaticityT => (self.g, 2.0 * x / self.g, p.scaled(self.g)),
        };
        Ok((linear_ramp_schedule(g, duration)?, params))
    }
}

fn default_inputs() -> Vec<InputSpec> {
    vec![
        InputSpec::Coherent { alpha: C64::new(1.0, 0.0) },
        InputSpec::SqueezedCoherent { alpha: C64::new(1.0, 0.0), r: 0.4 },
        InputSpec::Qubit,
    ]
}

/// Contents of a TOML configuration file; every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<RunMode>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub inputs: Option<Vec<String>>,
    pub params: Option<ParamsFile>,
    pub schedule: Option<ScheduleFile>,
    pub grid: Option<GridFile>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub kappa_o: Option<f64>,
    pub kappa_m: Option<f64>,
    pub kappa_mw: Option<f64>,
    pub kappa_f: Option<f64>,
    pub g_f: Option<f64>,
    pub n_th: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub g: Option<f64>,
    #[serde(rename = "T")]
    pub duration: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
    pub spacing: Option<Spacing>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("bad config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub mode: Option<RunMode>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    /// `(start, stop, points)`.
    pub grid: Option<(f64, f64, usize)>,
    pub spacing: Option<Spacing>,
    pub inputs: Vec<InputSpec>,
}

/// Merges defaults, file and flags (flags win) into a validated config.
pub fn resolve(file: Option<&ConfigFile>, flags: &Overrides) -> Result<RunConfig> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    let mode = flags.mode.or(file.mode).unwrap_or(RunMode::Single);
    let mut cfg = RunConfig::defaults(mode);

    if let Some(p) = &file.params {
        let q = &mut cfg.params;
        q.kappa_o = p.kappa_o.unwrap_or(q.kappa_o);
        q.kappa_m = p.kappa_m.unwrap_or(q.kappa_m);
        q.kappa_mw = p.kappa_mw.unwrap_or(q.kappa_mw);
        q.kappa_f = p.kappa_f.unwrap_or(q.kappa_f);
        q.g_f = p.g_f.unwrap_or(q.g_f);
        q.n_th = p.n_th.unwrap_or(q.n_th);
    }
    if let Some(s) = &file.schedule {
        cfg.g = s.g.unwrap_or(cfg.g);
        cfg.duration = s.duration.unwrap_or(cfg.duration);
        if mode == RunMode::DarkStateReport && s.duration.is_some() {
            cfg.grid.stop = cfg.duration;
        }
    }
    if let Some(g) = &file.grid {
        cfg.grid.start = g.start.unwrap_or(cfg.grid.start);
        cfg.grid.stop = g.stop.unwrap_or(cfg.grid.stop);
        cfg.grid.points = g.points.unwrap_or(cfg.grid.points);
        cfg.grid.spacing = g.spacing.unwrap_or(cfg.grid.spacing);
    }
    if let Some(list) = &file.inputs {
        cfg.inputs = list.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    cfg.steps = flags.steps.or(file.steps).unwrap_or(cfg.steps);
    cfg.out = flags.out.clone().or_else(|| file.out.clone());
    if let Some((start, stop, points)) = flags.grid {
        cfg.grid = Grid { start, stop, points, ..cfg.grid };
    }
    if let Some(s) = flags.spacing {
        cfg.grid.spacing = s;
    }
    for spec in &flags.inputs {
        cfg.inputs.retain(|i| i.kind() != spec.kind());
        cfg.inputs.push(*spec);
    }
    cfg.inputs.sort_by_key(|i| i.kind());
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub f_coherent: f64,
    pub f_squeezed: f64,
    pub f_qubit: f64,
    /// Worst `|S - 1|` over the seven output rows.
    pub sum_rule_residual: f64,
    pub adiabaticity: f64,
}

impl SweepRow {
    pub fn fidelity(&self, kind: InputKind) -> f64 {
        match kind {
            InputKind::Coherent => self.f_coherent,
            InputKind::Squeezed => self.f_squeezed,
            InputKind::Qubit => self.f_qubit,
        }
    }

    pub fn converged(&self) -> bool {
        self.sum_rule_residual <= CONVERGENCE_TOLERANCE
    }
}

/// Steps for one transfer: at least `min_steps`, more if `max |M| dt` would
/// exceed the default target.
pub fn steps_for(sched: &CouplingSchedule, params: &NetworkParams, min_steps: usize) -> Result<usize> {
    let norm = network::max_generator_norm(sched, params, 200)?;
    Ok(((norm * sched.duration() / DEFAULT_NORM_DT).ceil() as usize).max(min_steps))
}

/// One transfer at sweep value `x`.
pub fn evaluate_point(cfg: &RunConfig, x: f64) -> Result<SweepRow> {
    let (sched, params) = cfg.point(x)?;
    let steps = steps_for(&sched, &params, cfg.steps)?;
    let prop = engine::propagate(&sched, &params, steps)?;
    let ch = engine::channel_from_propagator(&prop, &params)?;
    let residual = engine::sum_rule_residuals(&prop, &params)?.into_iter().fold(0.0, f64::max);
    let f = |kind| fidelity::fidelity_through(cfg.input(kind), &ch);
    Ok(SweepRow {
        swept_value: x,
        f_coherent: f(InputKind::Coherent)?,
        f_squeezed: f(InputKind::Squeezed)?,
        f_qubit: f(InputKind::Qubit)?,
        sum_rule_residual: residual,
        adiabaticity: network::adiabaticity_metric(&sched),
    })
}

/// Evaluates every grid point in parallel; rows come back in grid order.
pub fn sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let xs = match cfg.mode {
        RunMode::Single => vec![network::adiabaticity_metric(&linear_ramp_schedule(cfg.g, cfg.duration)?)],
        RunMode::DarkStateReport => {
            return Err(Error::Config("dark-state-report has no fidelity sweep".into()))
        }
        _ => cfg.grid.values(),
    };
    if cfg.mode == RunMode::Single {
        return Ok(vec![SweepRow { swept_value: xs[0], ..evaluate_point(cfg, 0.0)? }]);
    }
    xs.par_iter().map(|&x| evaluate_point(cfg, x)).collect()
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::new();
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let cols = [r.swept_value, r.f_coherent, r.f_squeezed, r.f_qubit, r.sum_rule_residual, r.adiabaticity];
        s.push_str(&cols.map(num).join(","));
        s.push('\n');
    }
    s
}

/// Grid point with the highest fidelity for `kind`, and whether it lies
/// strictly inside the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub kind: InputKind,
    pub index: usize,
    pub swept_value: f64,
    pub fidelity: f64,
    pub interior: bool,
}

pub fn find_optimum(rows: &[SweepRow], kind: InputKind) -> Option<Optimum> {
    let (index, row) = rows
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.fidelity(kind).total_cmp(&b.1.fidelity(kind)))?;
    Some(Optimum {
        kind,
        index,
        swept_value: row.swept_value,
        fidelity: row.fidelity(kind),
        interior: index > 0 && index + 1 < rows.len(),
    })
}

pub const DARK_STATE_HEADER: &str = "t,psi_1,psi_2,psi_3,psi_4,psi_5,psi_6,psi_7,lambda_d_im,lambda_tracked_re,lambda_tracked_im,adiabaticity";

#[derive(Clone, Debug, PartialEq)]
pub struct DarkStateRow {
    pub t: f64,
    pub psi: [f64; MODE_COUNT],
    /// First-order dark eigenvalue (purely imaginary).
    pub lambda_pert: C64,
    /// Eigenvalue of the full lossy generator tracked from the dark state.
    pub lambda_tracked: C64,
}

/// Dark state and its eigenvalue on `points` evenly spaced times in
/// `[0, T]`.
pub fn dark_state_report(cfg: &RunConfig) -> Result<Vec<DarkStateRow>> {
    let sched = linear_ramp_schedule(cfg.g, cfg.duration)?;
    let params = cfg.params.scaled(cfg.g);
    let grid = Grid {
        start: cfg.grid.start.max(0.0),
        stop: cfg.grid.stop.min(cfg.duration),
        points: cfg.grid.points,
        spacing: Spacing::Linear,
    };
    grid.values()
        .into_iter()
        .map(|t| {
            let psi = network::dark_state(t, &sched)?.map(|z| z.re);
            Ok(DarkStateRow {
                t,
                psi: with_positive_lead(psi),
                lambda_pert: network::dark_eigenvalue_perturbative(t, &sched, &params)?,
                lambda_tracked: network::dark_eigenvalue_tracked(t, &sched, &params)?,
            })
        })
        .collect()
}

/// Fixes the eigenvector's global sign so its largest component (the first,
/// on ties) is positive.
fn with_positive_lead(psi: [f64; MODE_COUNT]) -> [f64; MODE_COUNT] {
    let lead = psi.iter().fold(0.0f64, |best, &v| if v.abs() > best.abs() { v } else { best });
    if lead < 0.0 {
        psi.map(|v| -v)
    } else {
        psi
    }
}

pub fn dark_state_csv(rows: &[DarkStateRow], adiabaticity: f64) -> String {
    let mut s = String::new();
    s.push_str(DARK_STATE_HEADER);
    s.push('\n');
    for r in rows {
        let mut cols = vec![num(r.t)];
        cols.extend(r.psi.iter().map(|&v| num(v)));
        cols.push(num(r.lambda_pert.im));
        cols.push(num(r.lambda_tracked.re));
        cols.push(num(r.lambda_tracked.im));
        cols.push(num(adiabaticity));
        s.push_str(&cols.join(","));
        s.push('\n');
    }
    s
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub csv: String,
    pub rows: Vec<SweepRow>,
    pub flagged: Vec<usize>,
    pub optima: Vec<Optimum>,
    /// Human-readable summary lines.
    pub summary: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.flagged.is_empty() {
            EXIT_OK
        } else {
            EXIT_CONVERGENCE
        }
    }
}

/// Executes a configuration. Writes the CSV (and a `.meta.toml` sidecar)
/// when `cfg.out` is set.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut summary = vec![];
    let mut optima = vec![];
    let (csv, rows) = if cfg.mode == RunMode::DarkStateReport {
        let rows = dark_state_report(cfg)?;
        let metric = network::adiabaticity_metric(&linear_ramp_schedule(cfg.g, cfg.duration)?);
        summary.push(format!(
            "dark-state report: {} points over [0, {}], gT/2 = {metric}{}",
            rows.len(),
            cfg.duration,
            if network::is_adiabatic(metric) { "" } else { " (non-adiabatic)" }
        ));
        (dark_state_csv(&rows, metric), vec![])
    } else {
        let rows = sweep(cfg)?;
        for r in &rows {
            summary.push(format!(
                "{} = {:.6e}: F_coherent = {:.6}, F_squeezed = {:.6}, F_qubit = {:.6}, residual = {:.2e}",
                swept_name(cfg.mode),
                r.swept_value,
                r.f_coherent,
                r.f_squeezed,
                r.f_qubit,
                r.sum_rule_residual
            ));
        }
        if cfg.mode == RunMode::SweepAdiabaticityT {
            for kind in [InputKind::Coherent, InputKind::Squeezed, InputKind::Qubit] {
                if let Some(o) = find_optimum(&rows, kind) {
                    summary.push(format!(
                        "optimal T for {kind:?}: T = {:.6} (gT/2 = {:.6}), F = {:.6}{}",
                        2.0 * o.swept_value / cfg.g,
                        o.swept_value,
                        o.fidelity,
                        if o.interior { "" } else { " (at grid edge)" }
                    ));
                    optima.push(o);
                }
            }
        }
        (sweep_csv(&rows), rows)
    };
    let flagged: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| !r.converged()).map(|(i, _)| i).collect();
    for &i in &flagged {
        summary.push(format!(
            "warning: row {i} not converged (sum-rule residual {:.3e} > {CONVERGENCE_TOLERANCE:e})",
            rows[i].sum_rule_residual
        ));
    }
    if let Some(path) = &cfg.out {
        fs::write(path, &csv).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        let meta = sidecar(cfg, &rows, &flagged, &optima);
        let meta_path = sidecar_path(path);
        fs::write(&meta_path, meta).map_err(|e| Error::Config(format!("cannot write {}: {e}", meta_path.display())))?;
    }
    Ok(RunOutcome { csv, rows, flagged, optima, summary })
}

fn swept_name(mode: RunMode) -> &'static str {
    match mode {
        RunMode::Single | RunMode::SweepAdiabaticityG | RunMode::SweepAdiabaticityT => "gT/2",
        RunMode::SweepCavityLoss => "kappa_cav/g",
        RunMode::SweepFiberMechLoss => "kappa_f/g",
        RunMode::DarkStateReport => "t",
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".meta.toml");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    program: &'static str,
    version: &'static str,
    mode: &'static str,
    swept: &'static str,
    g: f64,
    duration: f64,
    min_steps: usize,
    params: &'a NetworkParams,
    grid: &'a Grid,
    inputs: Vec<String>,
    rows: usize,
    flagged_rows: &'a [usize],
    optimal_gt_half: Vec<(String, f64)>,
}

fn sidecar(cfg: &RunConfig, rows: &[SweepRow], flagged: &[usize], optima: &[Optimum]) -> String {
    let s = Sidecar {
        program: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        mode: cfg.mode.name(),
        swept: swept_name(cfg.mode),
        g: cfg.g,
        duration: cfg.duration,
        min_steps: cfg.steps,
        params: &cfg.params,
        grid: &cfg.grid,
        inputs: cfg.inputs.iter().map(|i| i.to_string()).collect(),
        rows: rows.len(),
        flagged_rows: flagged,
        optimal_gt_half: optima.iter().map(|o| (format!("{:?}", o.kind), o.swept_value)).collect(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "# run metadata; the CSV next to this file holds the results");
    out.push_str(&toml::to_string(&s).unwrap_or_default());
    out
}
