//! Time integration of the variable-density Navier-Stokes/Allen-Cahn system
//!
//! ```text
//! rho (v_t + v.grad v) - lap v + grad p = -eps div(grad c (x) grad c - |grad c|^2/2 I)
//! rho_t + div(rho v) = 0,   div v = 0
//! rho (c_t + v.grad c) = -m mu,   rho mu = -eps lap c + rho f'(c) / eps
//! ```
//!
//! with `m = m0 eps^theta`, no-slip walls and `c = -1` on walls. One step is
//! density transport, chemical potential, Allen-Cahn update, momentum with
//! projection, in that order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::spectral::Spectral;
use crate::fields::{
    capillary_force, convect, div, gradient_energy, grad, l2, laplacian, advect_upwind, FieldBc, Grid2D,
    Padded, ScalarField, GHOSTS, VectorBc, VectorField,
};
use crate::potential::DoubleWell;

pub const C_BC: FieldBc = FieldBc::Dirichlet(-1.0);
pub const RHO_BC: FieldBc = FieldBc::Neumann;
pub const P_BC: FieldBc = FieldBc::Neumann;
pub const V_BC: VectorBc = VectorBc::NO_SLIP;

/// Admissible mobility exponents `(THETA_MIN, THETA_MAX]`.
pub const THETA_MIN: f64 = -0.25;
pub const THETA_MAX: f64 = 1.0;

fn default_m0() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub epsilon: f64,
    #[serde(default = "default_m0")]
    pub m0: f64,
    #[serde(default)]
    pub theta: f64,
    /// Fixed time step; when absent the stability rule is used.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Multiplies the rule-based time step.
    #[serde(default = "default_scale")]
    pub dt_scale: f64,
    /// Include the `0.4 h^2` cap in the rule. Switching it off keeps the
    /// step count of fine-grid sweeps affordable; the diffusion is implicit
    /// so stability does not depend on it.
    #[serde(default = "default_true")]
    pub diffusive_bound: bool,
    pub t_end: f64,
    #[serde(default)]
    pub allow_exploratory: bool,
}

impl SolverParams {
    pub fn new(epsilon: f64, t_end: f64) -> Self {
        Self { epsilon, m0: 1.0, theta: 0.0, dt: None, dt_scale: 1.0, diffusive_bound: true, t_end, allow_exploratory: false }
    }

    pub fn mobility(&self) -> f64 {
        self.m0 * self.epsilon.powf(self.theta)
    }

    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        let e = self.epsilon;
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {e}")));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return Err(Error::Config(format!("m0 must be positive, got {}", self.m0)));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("theta must be finite".into()));
        }
        if !(self.theta > THETA_MIN && self.theta <= THETA_MAX) && !self.allow_exploratory {
            return Err(Error::Config(format!(
                "theta = {} lies outside the admissible window ({THETA_MIN}, {THETA_MAX}]; \
                 pass --allow-exploratory to run it anyway",
                self.theta
            )));
        }
        if e < 4.0 * grid.h() {
            return Err(Error::Config(format!(
                "epsilon = {e} under-resolved: need epsilon >= 4h = {}",
                4.0 * grid.h()
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
        }
        if !(self.dt_scale > 0.0 && self.dt_scale.is_finite()) {
            return Err(Error::Config(format!("dt_scale must be positive, got {}", self.dt_scale)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub rho: ScalarField,
    pub v: VectorField,
    pub p: ScalarField,
    pub c: ScalarField,
    pub mu: ScalarField,
}

impl SimState {
    /// State at rest with the given order parameter and density; pressure
    /// zero, chemical potential filled in.
    pub fn at_rest(c: ScalarField, rho: ScalarField, eps: f64, well: &DoubleWell) -> Result<Self> {
        c.grid().same_as(rho.grid())?;
        let grid = *c.grid();
        let mu = chemical_potential(&c, &rho, eps, well)?;
        Ok(Self { t: 0.0, rho, v: VectorField::zeros(grid), p: ScalarField::zeros(grid), c, mu })
    }

    pub fn grid(&self) -> &Grid2D {
        self.c.grid()
    }

    pub fn check(&self) -> Result<()> {
        let finite = self.rho.all_finite() && self.v.all_finite() && self.p.all_finite() && self.c.all_finite();
        if !finite {
            return Err(Error::StateCorruption(format!("non-finite values at t = {}", self.t)));
        }
        if self.rho.min() <= 0.0 {
            return Err(Error::StateCorruption(format!("nonpositive density {} at t = {}", self.rho.min(), self.t)));
        }
        Ok(())
    }
}

/// Per-step monitors, one CSV row each.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub courant: f64,
    pub mass: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub c_max_abs: f64,
    pub div_l2: f64,
    pub kinetic: f64,
    pub ginzburg_landau: f64,
    pub max_speed: f64,
}

/// `mu = (-eps lap c + rho f'(c) / eps) / rho`.
pub fn chemical_potential(c: &ScalarField, rho: &ScalarField, eps: f64, well: &DoubleWell) -> Result<ScalarField> {
    c.grid().same_as(rho.grid())?;
    let rho_min = rho.min();
    if rho_min.is_nan() || rho_min <= 0.0 {
        return Err(Error::StateCorruption(format!("nonpositive density {rho_min} in chemical potential")));
    }
    let mut mu = laplacian(c, C_BC);
    for k in 0..mu.data.len() {
        let r = rho.data[k];
        mu.data[k] = (-eps * mu.data[k] + r * well.f_prime(c.data[k]) / eps) / r;
    }
    Ok(mu)
}

/// `int eps/2 |grad c|^2 + rho f(c) / eps`, with the edge-based gradient
/// whose variation is exactly the compact Laplacian.
pub fn ginzburg_landau(c: &ScalarField, rho: &ScalarField, eps: f64, well: &DoubleWell) -> f64 {
    let bulk: f64 = c.data.iter().zip(&rho.data).map(|(&c, &r)| r * well.f(c)).sum();
    eps * gradient_energy(c, C_BC) + bulk * c.grid().cell_area() / eps
}

pub fn kinetic_energy(rho: &ScalarField, v: &VectorField) -> f64 {
    let s: f64 = (0..rho.data.len()).map(|k| rho.data[k] * (v.x[k] * v.x[k] + v.y[k] * v.y[k])).sum();
    0.5 * s * rho.grid().cell_area()
}

pub fn courant_number(v: &VectorField, dt: f64) -> f64 {
    v.max_magnitude() * dt / v.grid().h()
}

/// First-order upwind, conservative update of `rho_t + div(rho v) = 0` with
/// face velocities averaged from the cell centres.
pub fn transport_density(rho: &ScalarField, v: &VectorField, dt: f64) -> Result<ScalarField> {
    let grid = *rho.grid();
    grid.same_as(v.grid())?;
    let courant = courant_number(v, dt);
    if courant > 1.0 {
        return Err(Error::Cfl { courant });
    }
    let pr = Padded::new(&rho.data, &grid, RHO_BC);
    let pu = Padded::new(&v.x, &grid, V_BC.x);
    let pv = Padded::new(&v.y, &grid, V_BC.y);
    let upwind = |u: f64, left: f64, right: f64| if u > 0.0 { u * left } else { u * right };
    let k = dt / grid.h();
    let nx = grid.nx;
    let mut out = rho.clone();
    for (j, o) in out.data.chunks_exact_mut(nx).enumerate() {
        let j = j as isize;
        let (r, rn, rs) = (pr.row(j), pr.row(j + 1), pr.row(j - 1));
        let (u, vc, vn, vs) = (pu.row(j), pv.row(j), pv.row(j + 1), pv.row(j - 1));
        for (i, v) in o.iter_mut().enumerate() {
            let m = i + GHOSTS;
            let ue = 0.5 * (u[m] + u[m + 1]);
            let uw = 0.5 * (u[m - 1] + u[m]);
            let fn_ = 0.5 * (vc[m] + vn[m]);
            let fs = 0.5 * (vs[m] + vc[m]);
            let c = r[m];
            let flux = upwind(ue, c, r[m + 1]) - upwind(uw, r[m - 1], c) + upwind(fn_, c, rn[m]) - upwind(fs, rs[m], c);
            *v -= k * flux;
        }
    }
    Ok(out)
}

/// Time integrator holding the transform plans for one grid.
pub struct Solver {
    grid: Grid2D,
    params: SolverParams,
    well: DoubleWell,
    spectral: Spectral,
    /// Reference density of the constant-coefficient projection.
    rho_ref: f64,
    step: u64,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver").field("grid", &self.grid).field("params", &self.params).finish_non_exhaustive()
    }
}

impl Solver {
    /// `rho_ref` should be the smallest density the run can reach.
    pub fn new(grid: Grid2D, params: SolverParams, well: DoubleWell, rho_ref: f64) -> Result<Self> {
        params.validate(&grid)?;
        if rho_ref.is_nan() || rho_ref <= 0.0 {
            return Err(Error::Config(format!("reference density must be positive, got {rho_ref}")));
        }
        Ok(Self { grid, params, well, spectral: Spectral::new(grid), rho_ref, step: 0 })
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn well(&self) -> &DoubleWell {
        &self.well
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// `min(0.4 h / max|v|, 0.2 eps^2 rho_min / m, 0.4 h^2)`, scaled by
    /// `dt_scale`, or the fixed step if one is configured.
    pub fn stable_dt(&self, state: &SimState) -> f64 {
        if let Some(dt) = self.params.dt {
            return dt;
        }
        let eps = self.params.epsilon;
        let mut dt = 0.2 * eps * eps * state.rho.min() / self.params.mobility();
        let speed = state.v.max_magnitude();
        if speed > 0.0 {
            dt = dt.min(0.4 * self.grid.h() / speed);
        }
        if self.params.diffusive_bound {
            let h = self.grid.h();
            dt = dt.min(0.4 * h * h);
        }
        dt * self.params.dt_scale
    }

    /// Semi-implicit Allen-Cahn update. The increment solves
    /// `(I - dt a0 lap) dc = -dt (m mu / rho + v.grad c)` with
    /// `a0 = m eps / rho_min^2`, which treats the stiffest diffusion
    /// implicitly and keeps `c = -1` on walls.
    pub fn allen_cahn_step(
        &self,
        c: &ScalarField,
        rho: &ScalarField,
        mu: &ScalarField,
        v: &VectorField,
        dt: f64,
    ) -> Result<ScalarField> {
        let m = self.params.mobility();
        let rho_min = rho.min();
        let a0 = m * self.params.epsilon / (rho_min * rho_min);
        let adv = advect_upwind(c, v, C_BC)?;
        let mut inc: Vec<f64> = (0..c.data.len()).map(|k| -dt * (m * mu.data[k] / rho.data[k] + adv.data[k])).collect();
        self.spectral.solve_screened(&mut inc, dt * a0);
        let data = c.data.iter().zip(&inc).map(|(a, b)| a + b).collect();
        ScalarField::from_vec(self.grid, data)
    }

    /// Momentum predictor with implicit constant-coefficient viscosity
    /// followed by a projection with the reference density. Returns the new
    /// velocity and pressure.
    pub fn momentum_step(
        &self,
        v: &VectorField,
        p: &ScalarField,
        rho: &ScalarField,
        c: &ScalarField,
        dt: f64,
    ) -> Result<(VectorField, ScalarField)> {
        let eps = self.params.epsilon;
        let a0 = 1.0 / rho.min();
        let conv = convect(v, V_BC);
        let force = capillary_force(c, eps, C_BC);
        let gp = grad(p, P_BC);
        let (lx, ly) = (laplacian(&v.component_x(), V_BC.x), laplacian(&v.component_y(), V_BC.y));
        let n = v.x.len();
        let mut ix = vec![0.0; n];
        let mut iy = vec![0.0; n];
        for k in 0..n {
            let inv = 1.0 / rho.data[k];
            ix[k] = dt * (-conv.x[k] + inv * (force.x[k] - gp.x[k] + lx.data[k]));
            iy[k] = dt * (-conv.y[k] + inv * (force.y[k] - gp.y[k] + ly.data[k]));
        }
        self.spectral.solve_screened(&mut ix, dt * a0);
        self.spectral.solve_screened(&mut iy, dt * a0);
        let mut star = VectorField::zeros(self.grid);
        for k in 0..n {
            star.x[k] = v.x[k] + ix[k];
            star.y[k] = v.y[k] + iy[k];
        }
        // div(grad phi) = rho_ref / dt div u*, with the wide operator so that
        // the corrected field is discretely solenoidal
        let mut phi = div(&star, V_BC);
        let scale = self.rho_ref / dt;
        phi.data.iter_mut().for_each(|x| *x *= scale);
        phi.remove_mean();
        self.spectral.solve_wide_poisson(&mut phi.data);
        phi.remove_mean();
        let gphi = grad(&phi, P_BC);
        let k = dt / self.rho_ref;
        for i in 0..n {
            star.x[i] -= k * gphi.x[i];
            star.y[i] -= k * gphi.y[i];
        }
        let p_new = p.zip_map(&phi, |a, b| a + b)?;
        Ok((star, p_new))
    }

    /// The state one step of size `dt` after `state`, with its monitors.
    /// Does not count as a step taken.
    pub fn advance(&self, state: &SimState, dt: f64) -> Result<(SimState, StepLog)> {
        let eps = self.params.epsilon;
        let courant = courant_number(&state.v, dt);
        let rho = transport_density(&state.rho, &state.v, dt)?;
        let mu = chemical_potential(&state.c, &rho, eps, &self.well)?;
        let c = self.allen_cahn_step(&state.c, &rho, &mu, &state.v, dt)?;
        let (v, p) = self.momentum_step(&state.v, &state.p, &rho, &c, dt)?;
        let mu_new = chemical_potential(&c, &rho, eps, &self.well)?;
        let next = SimState { t: state.t + dt, rho, v, p, c, mu: mu_new };
        next.check()?;
        let log = StepLog {
            step: self.step + 1,
            t: next.t,
            dt,
            courant,
            mass: crate::fields::integral(&next.rho),
            rho_min: next.rho.min(),
            rho_max: next.rho.max(),
            c_max_abs: next.c.max_abs(),
            div_l2: l2(&div(&next.v, V_BC)),
            kinetic: kinetic_energy(&next.rho, &next.v),
            ginzburg_landau: ginzburg_landau(&next.c, &next.rho, eps, &self.well),
            max_speed: next.v.max_magnitude(),
        };
        Ok((next, log))
    }

    /// Accept a state produced by `advance`.
    pub fn commit(&mut self, state: &mut SimState, next: SimState, log: &StepLog) {
        debug_assert_eq!(log.step, self.step + 1);
        *state = next;
        self.step += 1;
        log::trace!("step {} t={:.6e} dt={:.3e} div={:.2e}", log.step, log.t, log.dt, log.div_l2);
    }

    /// Advance `state` by `dt` in place.
    pub fn step(&mut self, state: &mut SimState, dt: f64) -> Result<StepLog> {
        let (next, log) = self.advance(state, dt)?;
        self.commit(state, next, &log);
        Ok(log)
    }
}
