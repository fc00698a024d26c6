//! Configuration, single runs, sweeps and rate fits.

pub mod config;
pub mod fit;
pub mod run;
pub mod sweep;

use std::fmt::Write;
use std::path::Path;

pub use config::{GeometryConfig, GridConfig, OutputConfig, PotentialConfig, RunConfig, ScenarioConfig, SnapshotPolicy, SweepSpec};
pub use fit::{fit_rate, RateFit};
pub use run::{read_reports, read_summary, report_times, run, Prepared, RunOutcome, RunSummary};
pub use sweep::{read_rates, sweep, worker_count, MemberStatus, SweepOutcome};

use crate::error::Result;

/// Human-readable digest of a run directory.
pub fn describe_run(dir: &Path) -> Result<String> {
    let summary = read_summary(dir)?;
    let reports = read_reports(dir)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} eps={} theta={} grid {}x{} rho=({}, {}) sigma={:.6}",
        summary.scenario,
        summary.epsilon,
        summary.theta,
        summary.nx,
        summary.ny,
        summary.rho_plus,
        summary.rho_minus,
        summary.surface_tension
    );
    let _ = writeln!(out, "{} steps, {:.1} s wall time", summary.steps, summary.wall_time_s);
    let _ = writeln!(out, "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}", "t", "E", "E_vol", "l1_psi", "residual", "max|c|");
    for r in &reports {
        let res = r.identity_residual.map(|v| format!("{v:12.4e}")).unwrap_or_else(|| format!("{:>12}", "-"));
        let _ = writeln!(
            out,
            "{:8.4} {:12.4e} {:12.4e} {:12.4e} {res} {:12.6}",
            r.t, r.e, r.e_vol, r.l1_psi, r.max_c_abs
        );
    }
    let m = &summary.monitors;
    let _ = writeln!(
        out,
        "max|c| {:.6}  max div {:.3e}  rho in [{}, {}]  mass drift {:.3e}",
        m.max_c_abs,
        m.max_div_l2,
        m.rho_min,
        m.rho_max,
        (m.mass_final - m.mass_initial) / m.mass_initial
    );
    match summary.gronwall {
        Some(g) => {
            let _ = writeln!(out, "Gronwall C = {:.4} (admissible: {}, horizon {})", g.c, g.admissible, g.horizon);
        }
        None => {
            let _ = writeln!(out, "Gronwall fit skipped: fewer than 10 reports");
        }
    }
    if summary.clean {
        let _ = writeln!(out, "invariants: clean");
    } else {
        for v in &summary.violations {
            let _ = writeln!(out, "violation: {v}");
        }
    }
    Ok(out)
}
