//! A single simulation with reports, monitors and output files.

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{RunConfig, ScenarioConfig, SnapshotPolicy};
use crate::diagnostics::{energy_identity_residual, gronwall_fit, EnergyReport, Evaluator, GronwallFit};
use crate::error::{Error, Result};
use crate::fields::snapshot::write_snapshot;
use crate::fields::{Grid2D, ScalarField, VectorField};
use crate::geometry::{AnalyticInterface, GeometryParams};
use crate::potential::{well_prepared_init, DensityPair, DoubleWell, Profile, CLAMP};
use crate::sharp::{static_bubble, transported_bubble, SharpState};
use crate::solver::{SimState, Solver, StepLog};

/// Divergence above this after projection is a violation.
pub const DIVERGENCE_TOL: f64 = 1e-8;
/// Allowed excursion of the density outside its initial range.
pub const DENSITY_TOL: f64 = 1e-12;
/// Relative energies below this are a violation.
pub const ENERGY_TOL: f64 = -1e-10;

/// Everything derived from a config that a run needs besides the state.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub grid: Grid2D,
    pub params: GeometryParams,
    pub interface: AnalyticInterface,
    pub well: DoubleWell,
    pub densities: DensityPair,
    pub evaluator: Evaluator,
    pub scenario: ScenarioConfig,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid.build()?;
        let geo = cfg.geometry_or_default();
        let params = geo.params(&grid);
        let mut interface = geo.interface(&grid)?;
        if let ScenarioConfig::TransportedBubble { v_uniform } = cfg.scenario {
            interface = interface.with_velocity(v_uniform);
        }
        let well = cfg.potential.well()?;
        let densities = cfg.potential.densities()?;
        let evaluator = Evaluator::new(params, well.clone(), densities, cfg.solver.epsilon)?;
        Ok(Self { grid, params, interface, well, densities, evaluator, scenario: cfg.scenario })
    }

    pub fn initial_state(&self, eps: f64) -> Result<SimState> {
        let (c, rho) = match self.scenario {
            ScenarioConfig::Quiescent => (
                ScalarField::constant(self.grid, -1.0),
                ScalarField::constant(self.grid, self.densities.rho_minus),
            ),
            _ => {
                let profile = Profile::new(&self.well, self.densities);
                well_prepared_init(&self.interface, &self.params, &self.grid, eps, &profile, self.densities)?
            }
        };
        let mut state = SimState::at_rest(c, rho, eps, &self.well)?;
        if let ScenarioConfig::TransportedBubble { v_uniform } = self.scenario {
            state.v = VectorField::from_fn(self.grid, |_| v_uniform);
        }
        Ok(state)
    }

    pub fn sharp_at(&self, t: f64) -> Result<SharpState> {
        let sigma = self.evaluator.sigma();
        match self.scenario {
            ScenarioConfig::StaticBubble => {
                let mut s = static_bubble(&self.interface, &self.params, &self.grid, self.densities, sigma)?;
                s.t = t;
                Ok(s)
            }
            ScenarioConfig::TransportedBubble { .. } => {
                transported_bubble(&self.interface, &self.params, &self.grid, self.densities, sigma, t)
            }
            ScenarioConfig::Quiescent => Ok(SharpState {
                t,
                interface: self.interface,
                chi: ScalarField::zeros(self.grid),
                rho: ScalarField::constant(self.grid, self.densities.rho_minus),
                v: VectorField::zeros(self.grid),
                p: ScalarField::zeros(self.grid),
                pressure_jump: 0.0,
            }),
        }
    }
}

/// Extremes of the per-step monitors over a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub max_c_abs: f64,
    pub max_div_l2: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_courant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub epsilon: f64,
    pub theta: f64,
    pub mobility: f64,
    pub nx: usize,
    pub ny: usize,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub surface_tension: f64,
    pub t_end: f64,
    pub steps: u64,
    pub wall_time_s: f64,
    pub monitors: MonitorSummary,
    #[serde(rename = "E_total_final")]
    pub e_total_final: f64,
    pub sup_l1_psi: f64,
    pub gronwall: Option<GronwallFit>,
    pub final_report: EnergyReport,
    pub violations: Vec<String>,
    pub clean: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub reports: Vec<EnergyReport>,
    pub final_state: SimState,
    pub dir: Option<PathBuf>,
}

struct Monitors {
    summary: MonitorSummary,
    initial_rho: (f64, f64),
    violations: Vec<String>,
}

impl Monitors {
    fn new(state: &SimState) -> Self {
        let mass = crate::fields::integral(&state.rho);
        let (lo, hi) = (state.rho.min(), state.rho.max());
        Self {
            summary: MonitorSummary {
                max_c_abs: state.c.max_abs(),
                max_div_l2: 0.0,
                rho_min: lo,
                rho_max: hi,
                mass_initial: mass,
                mass_final: mass,
                dt_min: f64::INFINITY,
                dt_max: 0.0,
                max_courant: 0.0,
            },
            initial_rho: (lo, hi),
            violations: Vec::new(),
        }
    }

    fn flag(&mut self, kind: &str, msg: String) {
        // one entry per kind keeps summaries readable
        if !self.violations.iter().any(|v| v.starts_with(kind)) {
            log::warn!("{msg}");
            self.violations.push(msg);
        }
    }

    fn record(&mut self, log: &StepLog) {
        let s = &mut self.summary;
        s.max_c_abs = s.max_c_abs.max(log.c_max_abs);
        s.max_div_l2 = s.max_div_l2.max(log.div_l2);
        s.rho_min = s.rho_min.min(log.rho_min);
        s.rho_max = s.rho_max.max(log.rho_max);
        s.mass_final = log.mass;
        s.dt_min = s.dt_min.min(log.dt);
        s.dt_max = s.dt_max.max(log.dt);
        s.max_courant = s.max_courant.max(log.courant);
        let (lo, hi) = self.initial_rho;
        let scale = hi.abs().max(1.0);
        if log.c_max_abs > CLAMP {
            self.flag("order parameter", format!("order parameter bound: |c| = {} > {CLAMP} at t = {}", log.c_max_abs, log.t));
        }
        if log.div_l2 > DIVERGENCE_TOL {
            self.flag("divergence", format!("divergence: {} > {DIVERGENCE_TOL} at t = {}", log.div_l2, log.t));
        }
        if log.rho_min < lo - DENSITY_TOL * scale || log.rho_max > hi + DENSITY_TOL * scale {
            self.flag(
                "density",
                format!("density range: [{}, {}] left [{lo}, {hi}] at t = {}", log.rho_min, log.rho_max, log.t),
            );
        }
    }

    fn check_report(&mut self, r: &EnergyReport) {
        if r.e < ENERGY_TOL {
            self.flag("relative energy", format!("relative energy: E = {} < {ENERGY_TOL} at t = {}", r.e, r.t));
        }
    }
}

/// Output files of one run.
struct Writers {
    dir: PathBuf,
    steps: Option<csv::Writer<File>>,
    reports: csv::Writer<File>,
    snapshots: SnapshotPolicy,
}

impl Writers {
    fn new(dir: &Path, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let echo = dir.join("config.json");
        let text = serde_json::to_string_pretty(cfg).map_err(|e| Error::json(&echo, e))?;
        std::fs::write(&echo, text).map_err(|e| Error::io(&echo, e))?;
        let open = |name: &str| -> Result<csv::Writer<File>> {
            let path = dir.join(name);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            Ok(csv::Writer::from_writer(file))
        };
        let steps = if cfg.output.step_log { Some(open("steps.csv")?) } else { None };
        Ok(Self { dir: dir.to_path_buf(), steps, reports: open("reports.csv")?, snapshots: cfg.output.snapshots })
    }

    fn step(&mut self, log: &StepLog) -> Result<()> {
        if let Some(w) = &mut self.steps {
            w.serialize(log)?;
        }
        Ok(())
    }

    fn report(&mut self, r: &EnergyReport) -> Result<()> {
        self.reports.serialize(r)?;
        self.reports.flush().map_err(|e| Error::io(self.dir.join("reports.csv"), e))
    }

    fn snapshot(&self, index: usize, state: &SimState, last: bool) -> Result<()> {
        let wanted = match self.snapshots {
            SnapshotPolicy::None => false,
            SnapshotPolicy::Final => last || index == 0,
            SnapshotPolicy::Reports => true,
        };
        if !wanted {
            return Ok(());
        }
        let dir = self.dir.join("snapshots");
        let (vx, vy) = (state.v.component_x(), state.v.component_y());
        for (name, field) in [("c", &state.c), ("rho", &state.rho), ("p", &state.p), ("mu", &state.mu), ("vx", &vx), ("vy", &vy)] {
            write_snapshot(&dir, &format!("r{index:04}_{name}"), name, state.t, field)?;
        }
        Ok(())
    }

    fn finish(mut self, summary: &RunSummary) -> Result<()> {
        if let Some(w) = &mut self.steps {
            w.flush().map_err(|e| Error::io(self.dir.join("steps.csv"), e))?;
        }
        let path = self.dir.join("summary.json");
        let text = serde_json::to_string_pretty(summary).map_err(|e| Error::json(&path, e))?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

/// Report times `t_k = k t_end / count`.
pub fn report_times(t_end: f64, count: usize) -> Vec<f64> {
    (0..=count).map(|k| t_end * k as f64 / count as f64).collect()
}

/// Run `cfg`, writing outputs when `cfg.output.dir` is set.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let started = Instant::now();
    let prep = Prepared::new(cfg)?;
    let params = cfg.solver;
    let eps = params.epsilon;
    let mut solver = Solver::new(prep.grid, params, prep.well.clone(), prep.densities.min())?;
    let mut state = prep.initial_state(eps)?;
    let mut writers = match &cfg.output.dir {
        Some(dir) => Some(Writers::new(dir, cfg)?),
        None => None,
    };
    let times = report_times(params.t_end, cfg.output.report_count);
    let mut monitors = Monitors::new(&state);
    let mut reports = Vec::with_capacity(times.len());
    log::info!(
        "{} eps={eps} theta={} grid {}x{}: {} reports to t={}",
        prep.scenario.id(),
        params.theta,
        prep.grid.nx,
        prep.grid.ny,
        cfg.output.report_count,
        params.t_end
    );

    for (k, &t_report) in times.iter().enumerate() {
        let last = k + 1 == times.len();
        // probe step at the rule step size for the energy identity
        let dt_probe = solver.stable_dt(&state);
        let probe = solver.advance(&state, dt_probe)?;
        let residual = energy_identity_residual(&state, &probe.0, dt_probe, eps, params.mobility(), &prep.well)?;
        let sharp = prep.sharp_at(t_report)?;
        let report = prep.evaluator.report(&state, &sharp, Some(residual))?;
        monitors.check_report(&report);
        if let Some(w) = &mut writers {
            w.report(&report)?;
            w.snapshot(k, &state, last)?;
        }
        log::debug!("t={:.4} E={:.4e} E_vol={:.4e} residual={:.3e}", report.t, report.e, report.e_vol, residual);
        reports.push(report);
        if last {
            break;
        }

        let target = times[k + 1];
        let mut reuse = Some(probe);
        loop {
            let gap = target - state.t;
            let dt_rule = solver.stable_dt(&state);
            let lands = dt_rule >= gap * (1.0 - 1e-9);
            let dt = if lands { gap } else { dt_rule };
            let (mut next, log) = match reuse.take() {
                Some((next, log)) if !lands => (next, log),
                _ => solver.advance(&state, dt)?,
            };
            if lands {
                next.t = target;
            }
            monitors.record(&log);
            if let Some(w) = &mut writers {
                w.step(&log)?;
            }
            solver.commit(&mut state, next, &log);
            if lands {
                break;
            }
        }
    }

    let times_s: Vec<f64> = reports.iter().map(|r| r.t).collect();
    let totals: Vec<f64> = reports.iter().map(|r| r.e_total).collect();
    let gronwall = if reports.len() >= 10 { Some(gronwall_fit(&times_s, &totals, eps)?) } else { None };
    let final_report = *reports.last().expect("at least one report");
    let summary = RunSummary {
        scenario: prep.scenario.id().to_string(),
        epsilon: eps,
        theta: params.theta,
        mobility: params.mobility(),
        nx: prep.grid.nx,
        ny: prep.grid.ny,
        rho_plus: prep.densities.rho_plus,
        rho_minus: prep.densities.rho_minus,
        surface_tension: prep.evaluator.sigma(),
        t_end: params.t_end,
        steps: solver.steps_taken(),
        wall_time_s: started.elapsed().as_secs_f64(),
        monitors: monitors.summary,
        e_total_final: final_report.e_total,
        sup_l1_psi: reports.iter().map(|r| r.l1_psi).fold(0.0, f64::max),
        gronwall,
        final_report,
        clean: monitors.violations.is_empty(),
        violations: monitors.violations,
    };
    if let Some(w) = writers {
        w.finish(&summary)?;
    }
    log::info!(
        "done: {} steps in {:.1}s, E_total(T)={:.4e}, clean={}",
        summary.steps,
        summary.wall_time_s,
        summary.e_total_final,
        summary.clean
    );
    Ok(RunOutcome { summary, reports, final_state: state, dir: cfg.output.dir.clone() })
}

/// Read back the report table of a run directory.
pub fn read_reports(dir: &Path) -> Result<Vec<EnergyReport>> {
    let path = dir.join("reports.csv");
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn read_summary(dir: &Path) -> Result<RunSummary> {
    let path = dir.join("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
}
