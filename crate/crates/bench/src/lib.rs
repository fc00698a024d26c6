//! Shared setup for the benchmarks.

use nsac_core::harness::{Prepared, RunConfig};
use nsac_core::solver::{SimState, Solver};

/// Static bubble with densities `(2, 1)` on an `n x n` walled grid, ready
/// to step.
pub fn bubble(n: usize, eps: f64) -> (Solver, SimState) {
    let cfg = RunConfig::from_json(&format!(
        r#"{{
        "grid": {{"nx": {n}, "ny": {n}, "bc": "dirichlet_wall"}},
        "geometry": {{"center": [0.5, 0.5], "radius": 0.25, "delta": 0.075}},
        "potential": {{"type": "quartic", "rho_plus": 2.0, "rho_minus": 1.0}},
        "scenario": {{"type": "static_bubble"}},
        "solver": {{"epsilon": {eps}, "t_end": 0.1}},
        "output": {{"snapshots": "none", "step_log": false}}
    }}"#
    ))
    .expect("bench config is valid");
    let prep = Prepared::new(&cfg).expect("bench config prepares");
    let solver = Solver::new(prep.grid, cfg.solver, prep.well.clone(), prep.densities.min()).expect("solver");
    let state = prep.initial_state(eps).expect("initial state");
    (solver, state)
}
