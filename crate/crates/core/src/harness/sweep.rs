//! Families of runs over `eps` and `theta`, with rate fits.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{SweepMember, SweepSpec};
use super::fit::{fit_rate, RateFit};
use super::run::{run, RunSummary};
use crate::diagnostics::gronwall_stable;
use crate::error::{Error, Result};

/// Relative spread allowed between Gronwall constants of one sweep.
pub const GRONWALL_SPREAD: f64 = 0.5;
/// Gronwall constants below this are treated as equal to it.
pub const GRONWALL_FLOOR: f64 = 1.0;
/// Environment variable capping the worker count.
pub const THREADS_VAR: &str = "NSAC_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberStatus {
    Ok,
    /// Finished with invariant violations; left out of the fits.
    Excluded,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberResult {
    pub theta: f64,
    pub epsilon: f64,
    pub n: usize,
    pub status: MemberStatus,
    pub run_dir: String,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallGroup {
    pub constants: Vec<f64>,
    pub all_admissible: bool,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaGroup {
    pub theta: f64,
    /// Fit of `E + E_vol` at the final time.
    pub e_total: Option<RateFit>,
    /// Fit of the supremum over reports of `|| psi - sigma chi ||_1`.
    pub l1_psi_sup: Option<RateFit>,
    pub fit_errors: Vec<String>,
    pub gronwall: GronwallGroup,
    pub members: Vec<MemberResult>,
}

/// Contents of `rates.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub scenario: String,
    pub groups: Vec<ThetaGroup>,
    pub failed: usize,
    pub excluded: usize,
}

impl SweepOutcome {
    pub fn group(&self, theta: f64) -> Option<&ThetaGroup> {
        self.groups.iter().find(|g| g.theta == theta)
    }
}

/// Worker count: `NSAC_THREADS` if set and positive, else all cores.
pub fn worker_count() -> usize {
    let cores = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) if n > 0 => n,
        _ => cores,
    }
}

fn run_member(m: &SweepMember) -> MemberResult {
    let dir = m.config.output.dir.as_ref().map(|d| d.display().to_string()).unwrap_or_default();
    let (status, error, summary) = match run(&m.config) {
        Ok(out) => {
            let status = if out.summary.clean { MemberStatus::Ok } else { MemberStatus::Excluded };
            (status, None, Some(out.summary))
        }
        Err(e) => {
            log::error!("member eps={} theta={} failed: {e}", m.epsilon, m.theta);
            (MemberStatus::Failed, Some(e.to_string()), None)
        }
    };
    MemberResult { theta: m.theta, epsilon: m.epsilon, n: m.n, status, run_dir: dir, error, summary }
}

fn group(theta: f64, members: Vec<MemberResult>) -> ThetaGroup {
    let clean: Vec<&RunSummary> =
        members.iter().filter(|m| m.status == MemberStatus::Ok).filter_map(|m| m.summary.as_ref()).collect();
    let mut fit_errors = Vec::new();
    let mut fit = |name: &str, pairs: Vec<(f64, f64)>| match fit_rate(name, &pairs) {
        Ok(f) => Some(f),
        Err(e) => {
            fit_errors.push(e.to_string());
            None
        }
    };
    let e_total = fit("E_total", clean.iter().map(|s| (s.epsilon, s.e_total_final)).collect());
    let l1_psi_sup = fit("l1_psi_sup", clean.iter().map(|s| (s.epsilon, s.sup_l1_psi)).collect());
    let fits: Vec<_> = clean.iter().filter_map(|s| s.gronwall).collect();
    let constants: Vec<f64> = fits.iter().map(|g| g.c).collect();
    let all_admissible = !fits.is_empty() && fits.len() == clean.len() && fits.iter().all(|g| g.admissible);
    let stable = all_admissible && gronwall_stable(&constants, GRONWALL_SPREAD, GRONWALL_FLOOR);
    ThetaGroup {
        theta,
        e_total,
        l1_psi_sup,
        fit_errors,
        gronwall: GronwallGroup { constants, all_admissible, stable },
        members,
    }
}

/// Run every member of `spec` on a pool of `workers` threads and write
/// `rates.json` into the output directory.
pub fn sweep(spec: &SweepSpec, workers: usize) -> Result<SweepOutcome> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.output_dir).map_err(|e| Error::io(&spec.output_dir, e))?;
    let mut members = spec.members();
    // largest grids first so that the pool stays busy
    let mut order: Vec<usize> = (0..members.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(members[i].config.grid.nx * members[i].config.grid.ny));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    log::info!("sweep: {} members on {} workers", members.len(), workers.max(1));
    let results: Vec<(usize, MemberResult)> =
        pool.install(|| order.par_iter().map(|&i| (i, run_member(&members[i]))).collect());
    let mut by_index: Vec<Option<MemberResult>> = vec![None; members.len()];
    for (i, r) in results {
        by_index[i] = Some(r);
    }
    let mut groups = Vec::new();
    for &theta in &spec.thetas {
        let rows: Vec<MemberResult> = members
            .iter()
            .zip(&by_index)
            .filter(|(m, _)| m.theta == theta)
            .filter_map(|(_, r)| r.clone())
            .collect();
        groups.push(group(theta, rows));
    }
    members.clear();
    let all = groups.iter().flat_map(|g| &g.members);
    let failed = all.clone().filter(|m| m.status == MemberStatus::Failed).count();
    let excluded = all.filter(|m| m.status == MemberStatus::Excluded).count();
    let outcome = SweepOutcome { scenario: spec.base.scenario.id().to_string(), groups, failed, excluded };
    write_rates(&spec.output_dir, &outcome)?;
    Ok(outcome)
}

pub fn write_rates(dir: &Path, outcome: &SweepOutcome) -> Result<()> {
    let path = dir.join("rates.json");
    let text = serde_json::to_string_pretty(outcome).map_err(|e| Error::json(&path, e))?;
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn read_rates(dir: &Path) -> Result<SweepOutcome> {
    let path = dir.join("rates.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(&path, e))
}
