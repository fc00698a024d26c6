//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero on failure only when `NSAC_ACCEPTANCE_STRICT` is set, so that the
//! workspace test run reports results without hiding the other suites.
//!
//! Artifacts land in `target/tmp/acceptance` for the figure scripts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nsac_core::fields::{BoundaryMode, Grid2D, ScalarField};
use nsac_core::geometry::verify::run_suite;
use nsac_core::harness::{self, RunConfig, RunOutcome, RunSummary, SnapshotPolicy, SweepOutcome, SweepSpec};
use nsac_core::potential::{DensityPair, DoubleWell, PsiMap};
use nsac_core::solver::chemical_potential;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const SLOPE_E: f64 = 0.33;
const FIT_RESIDUAL: f64 = 0.15;
const SLOPE_L1: f64 = 0.16;
const SLOPE_THETA: f64 = 0.2;
const SWEEP_BUDGET_S: f64 = 3600.0;
const HALVING: (f64, f64) = (1.6, 2.4);
const IDENTITY_MAX: f64 = 1e-3;
const COERCIVITY_SPREAD: f64 = 0.3;
const C_MAX: f64 = 1.05;
const DIV_MAX: f64 = 1e-8;
const SCALAR_TOL: f64 = 1e-10;
const MU_ORDER: f64 = 1.8;

struct Tally {
    results: Vec<(String, bool)>,
}

impl Tally {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.push((name.to_owned(), pass));
    }

    fn error(&mut self, name: &str, e: impl std::fmt::Display) {
        self.check(name, false, format!("error: {e}"));
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn out_root() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance")
}

fn sweep_spec(file: &str, out: &str) -> SweepSpec {
    let mut spec = SweepSpec::load(&workspace().join("configs").join(file)).expect("sweep config loads");
    spec.output_dir = out_root().join(out);
    spec
}

fn run_config(file: &str) -> RunConfig {
    RunConfig::load(&workspace().join("configs").join(file)).expect("run config loads")
}

fn summaries(outcome: &SweepOutcome) -> Vec<&RunSummary> {
    outcome.groups.iter().flat_map(|g| &g.members).filter_map(|m| m.summary.as_ref()).collect()
}

fn exact_scalars(t: &mut Tally) {
    let well = DoubleWell::Quartic;
    let sigma = well.surface_tension().unwrap_or(f64::NAN);
    t.check("surface tension constant", (sigma - 2.0 / 3.0).abs() <= SCALAR_TOL, format!("{sigma:.15} vs 2/3"));

    let psi0 = PsiMap::new(well.clone(), DensityPair::new(1.0, 1.0).unwrap()).map(|p| p.value(0.0)).unwrap_or(f64::NAN);
    t.check("psi(0) at unit density", (psi0 - 1.0 / 3.0).abs() <= SCALAR_TOL, format!("{psi0:.15} vs 1/3"));

    // two tanh fronts on a periodic strip; the seam where they meet is excluded
    let eps = 0.04;
    let err = |n: usize| {
        let g = Grid2D::square(n, 1.0, BoundaryMode::Periodic).unwrap();
        let c = ScalarField::from_fn(g, |x| {
            ((x[1] - 0.25) / (2.0 * eps)).tanh() * ((0.75 - x[1]) / (2.0 * eps)).tanh()
        });
        let mu = chemical_potential(&c, &ScalarField::constant(g, 1.0), eps, &well).unwrap();
        g.cells().filter(|(_, _, x)| (x[1] - 0.5).abs() < 0.4).map(|(i, j, _)| mu.get(i, j).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(128), err(256));
    let order = (e1 / e2).log2();
    t.check("planar profile chemical potential order", order >= MU_ORDER, format!("{e1:.3e} -> {e2:.3e}, order {order:.3}"));
}

fn geometry(t: &mut Tally) {
    let cfg = run_config("bubble_eps004.json");
    let grid = cfg.grid.build().unwrap();
    let geo = cfg.geometry_or_default();
    let checks = match geo.interface(&grid) {
        Ok(iface) => run_suite(&iface, &geo.params(&grid), &grid),
        Err(e) => return t.error("geometry suite", e),
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    t.check(
        "geometry suite",
        failed.is_empty(),
        format!("{} of {} properties hold on {}^2{}", checks.len() - failed.len(), checks.len(), grid.nx, if failed.is_empty() { String::new() } else { format!("; failing: {}", failed.join(", ")) }),
    );
}

fn single(cfg: &RunConfig, dir: &str, scale: f64) -> nsac_core::Result<RunOutcome> {
    let mut cfg = cfg.clone();
    cfg.solver.dt_scale = scale;
    cfg.output.dir = Some(out_root().join(dir));
    harness::run(&cfg)
}

fn identity(t: &mut Tally, runs: &mut Vec<RunSummary>) {
    let cfg = run_config("bubble_eps004.json");
    let started = Instant::now();
    let (full, half) = match (single(&cfg, "identity/dt", 1.0), single(&cfg, "identity/dt_half", 0.5)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return t.error("energy identity", e),
    };
    println!("     eps=0.04 128^2 bubble at default dt: {:.1} s", full.summary.wall_time_s);
    // the step leaving the sampled initial profile is reported separately
    let worst = |o: &RunOutcome| {
        o.reports.iter().filter(|r| r.t > 0.0).filter_map(|r| r.identity_residual).fold(0.0, f64::max)
    };
    let first = |o: &RunOutcome| o.reports.first().and_then(|r| r.identity_residual).unwrap_or(f64::NAN);
    let (a, b) = (worst(&full), worst(&half));
    let ratio = a / b;
    t.check(
        "energy identity halving",
        ratio >= HALVING.0 && ratio <= HALVING.1,
        format!("max residual {a:.3e} -> {b:.3e}, ratio {ratio:.3} (initial step {:.3e} -> {:.3e})", first(&full), first(&half)),
    );
    t.check("energy identity magnitude", a <= IDENTITY_MAX, format!("max residual {a:.3e} at default dt, {:.1} s", started.elapsed().as_secs_f64()));
    runs.push(full.summary);
    runs.push(half.summary);
}

fn conservation_run(t: &mut Tally, runs: &mut Vec<RunSummary>) {
    let mut cfg = run_config("bubble_eps004.json");
    cfg.grid.bc = BoundaryMode::Periodic;
    cfg.scenario = harness::ScenarioConfig::TransportedBubble { v_uniform: [1.0, 0.5] };
    cfg.potential = harness::PotentialConfig::Quartic { rho_plus: 2.0, rho_minus: 1.0 };
    cfg.output.snapshots = SnapshotPolicy::None;
    match single(&cfg, "transport", 1.0) {
        Ok(o) => {
            let m = o.summary.monitors;
            let density_ok = !o.summary.violations.iter().any(|v| v.starts_with("density"));
            let drift = (m.mass_final - m.mass_initial).abs() / m.mass_initial;
            t.check(
                "periodic transport density bounds",
                density_ok && drift <= 1e-12,
                format!("rho in [{:.15}, {:.15}], relative mass drift {drift:.2e}", m.rho_min, m.rho_max),
            );
            runs.push(o.summary);
        }
        Err(e) => t.error("periodic transport density bounds", e),
    }
}

fn rate_suite(t: &mut Tally, label: &str, outcome: &SweepOutcome) {
    let Some(g) = outcome.group(0.0) else { return t.error(&format!("{label} rates"), "no theta = 0 group") };
    match &g.e_total {
        Some(f) => t.check(
            &format!("{label} E + E_vol rate"),
            f.slope >= SLOPE_E && f.residual < FIT_RESIDUAL,
            format!(
                "slope {:.4}, residual {:.4} (ln units; {:.4} in log10), values {}",
                f.slope,
                f.residual,
                f.residual / std::f64::consts::LN_10,
                values(&f.pairs)
            ),
        ),
        None => t.error(&format!("{label} E + E_vol rate"), g.fit_errors.join("; ")),
    }
    match &g.l1_psi_sup {
        Some(f) => t.check(
            &format!("{label} L1 interface rate"),
            f.slope >= SLOPE_L1,
            format!("slope {:.4}, residual {:.4}, values {}", f.slope, f.residual, values(&f.pairs)),
        ),
        None => t.error(&format!("{label} L1 interface rate"), g.fit_errors.join("; ")),
    }
    let c: Vec<String> = g.gronwall.constants.iter().map(|c| format!("{c:.3}")).collect();
    t.check(
        &format!("{label} Gronwall constants"),
        g.gronwall.all_admissible && g.gronwall.stable,
        format!("C = [{}], admissible {}, within 50%: {}", c.join(", "), g.gronwall.all_admissible, g.gronwall.stable),
    );
}

fn values(pairs: &[(f64, f64)]) -> String {
    let v: Vec<String> = pairs.iter().map(|(e, v)| format!("{e}:{v:.3e}")).collect();
    v.join(" ")
}

/// Reruns every member but the finest on a doubled grid and compares the
/// coercivity ratios report by report.
fn coercivity(t: &mut Tally, label: &str, spec: &SweepSpec, runs: &mut Vec<RunSummary>) {
    let name = format!("{label} coercivity under refinement");
    let members = spec.members();
    let finest = spec.grid_sizes.iter().copied().max().unwrap_or(0);
    let (mut compared, mut infinite) = (0usize, 0usize);
    // (relative change, eps, t, ratio index)
    let mut worst = (0.0f64, 0.0, 0.0, 0);
    // same, leaving out the sampled initial state and ratios at round-off scale
    let mut settled = 0.0f64;
    for m in members.iter().filter(|m| m.n < finest) {
        let Some(coarse_dir) = &m.config.output.dir else { continue };
        let coarse = match harness::read_reports(coarse_dir) {
            Ok(r) => r,
            Err(e) => return t.error(&name, e),
        };
        let mut cfg = m.config.clone();
        cfg.grid.nx *= 2;
        cfg.grid.ny *= 2;
        cfg.output.snapshots = SnapshotPolicy::None;
        cfg.output.dir = Some(spec.output_dir.join("refined").join(format!("eps_{}", m.epsilon)));
        let fine = match harness::run(&cfg) {
            Ok(o) => o,
            Err(e) => return t.error(&name, e),
        };
        for (a, b) in coarse.iter().zip(&fine.reports) {
            for (k, (x, y)) in a.coercivity().iter().zip(b.coercivity()).enumerate() {
                if !x.is_finite() || !y.is_finite() {
                    infinite += 1;
                } else if !a.coercivity_degenerate && !b.coercivity_degenerate {
                    let rel = (y / x - 1.0).abs();
                    if rel > worst.0 {
                        worst = (rel, m.epsilon, a.t, k + 1);
                    }
                    if a.t > 0.0 && x.min(y) >= 1e-3 {
                        settled = settled.max(rel);
                    }
                    compared += 1;
                }
            }
        }
        runs.push(fine.summary);
    }
    t.check(
        &name,
        infinite == 0 && compared > 0 && worst.0 <= COERCIVITY_SPREAD,
        format!(
            "{compared} ratio pairs, worst relative change {:.3} (eps {}, t {}, ratio {}), non-finite {infinite}; \
             {settled:.3} for t > 0 and ratios above 1e-3; finest grid not refined",
            worst.0, worst.1, worst.2, worst.3
        ),
    );
}

fn theta_window(t: &mut Tally, outcome: &SweepOutcome) {
    for g in &outcome.groups {
        let name = format!("theta = {} E + E_vol rate", g.theta);
        match &g.e_total {
            Some(f) => t.check(&name, f.slope >= SLOPE_THETA, format!("slope {:.4}, values {}", f.slope, values(&f.pairs))),
            None => t.error(&name, g.fit_errors.join("; ")),
        }
    }
}

fn bounds(t: &mut Tally, runs: &[RunSummary]) {
    let c = runs.iter().map(|s| s.monitors.max_c_abs).fold(0.0, f64::max);
    let d = runs.iter().map(|s| s.monitors.max_div_l2).fold(0.0, f64::max);
    t.check("order parameter bound", c <= C_MAX, format!("max |c| = {c:.6} over {} runs", runs.len()));
    t.check("post-projection divergence", d <= DIV_MAX, format!("max ||div v|| = {d:.3e} over {} runs", runs.len()));
}

fn main() {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).is_test(true).try_init();
    let started = Instant::now();
    let mut t = Tally { results: Vec::new() };
    let mut runs: Vec<RunSummary> = Vec::new();
    let workers = harness::worker_count();

    exact_scalars(&mut t);
    geometry(&mut t);
    identity(&mut t, &mut runs);
    conservation_run(&mut t, &mut runs);

    let mut sweep_seconds = 0.0;
    let mut sweeps_done = 0;
    for (label, file, out) in [("rho (1, 1)", "sweep_rho11.json", "rho11"), ("rho (2, 1)", "sweep_rho21.json", "rho21")] {
        let spec = sweep_spec(file, out);
        let clock = Instant::now();
        match harness::sweep(&spec, workers) {
            Ok(outcome) => {
                sweep_seconds += clock.elapsed().as_secs_f64();
                sweeps_done += 1;
                rate_suite(&mut t, label, &outcome);
                runs.extend(summaries(&outcome).into_iter().cloned());
                let excluded = outcome.excluded + outcome.failed;
                t.check(&format!("{label} sweep members clean"), excluded == 0, format!("{excluded} excluded or failed"));
                coercivity(&mut t, label, &spec, &mut runs);
            }
            Err(e) => t.error(&format!("{label} sweep"), e),
        }
    }
    t.check(
        "rate sweep runtime",
        sweeps_done == 2 && sweep_seconds <= SWEEP_BUDGET_S,
        format!("{sweep_seconds:.0} s for both suites on {workers} worker(s)"),
    );

    match harness::sweep(&sweep_spec("sweep_theta.json", "theta"), workers) {
        Ok(outcome) => {
            theta_window(&mut t, &outcome);
            runs.extend(summaries(&outcome).into_iter().cloned());
        }
        Err(e) => t.error("theta sweep", e),
    }
    bounds(&mut t, &runs);

    let failed: Vec<&str> = t.results.iter().filter(|(_, p)| !p).map(|(n, _)| n.as_str()).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s",
        t.results.len() - failed.len(),
        t.results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failing: {}", failed.join("; "));
        if std::env::var_os("NSAC_ACCEPTANCE_STRICT").is_some() {
            std::process::exit(1);
        }
    }
}
