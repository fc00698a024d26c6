//! Functionals comparing a diffuse state with a sharp reference.
//!
//! With `psi(c) = int_{-1}^c sqrt(2 rho_hat f)`, `w = v_eps - v`, the
//! interface extension `xi` and the truncated distance `theta`:
//!
//! ```text
//! E     = int 1/2 (rho_eps - rho)^2 + 1/2 rho_eps |w|^2
//!       + int eps/2 |grad c|^2 + rho_eps f(c)/eps - xi . grad psi
//! E_vol = int |sigma chi - psi| |theta|
//! ```
//!
//! where `sigma = psi(1)` is the surface tension. The gradient of `c` is the
//! central one throughout, so `grad psi = psi'(c) grad c` holds exactly and
//! `E` equals its rearranged form whenever `rho_eps = rho_hat(c)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{grad, h1_seminorm, ScalarField, VectorField};
use crate::geometry::{AnalyticInterface, GeometryParams, Jacobian};
use crate::potential::{DensityPair, DoubleWell, PsiMap};
use crate::sharp::SharpState;
use crate::solver::{ginzburg_landau, SimState, C_BC, V_BC};

/// Below `GRADIENT_FLOOR / h` the diffuse normal is set to zero.
pub const GRADIENT_FLOOR: f64 = 1e-8;
/// Energies below this make the coercivity ratios meaningless.
pub const ENERGY_FLOOR: f64 = 1e-14;
/// Gronwall constants above this count as a failed fit.
pub const GRONWALL_CAP: f64 = 1e6;

/// Diffuse normal and velocity error.
#[derive(Clone, Debug)]
pub struct NormalFieldEps {
    pub n: VectorField,
    pub w: VectorField,
}

impl NormalFieldEps {
    pub fn new(sim: &SimState, sharp: &SharpState) -> Result<Self> {
        let grid = *sim.grid();
        grid.same_as(sharp.v.grid())?;
        let g = grad(&sim.c, C_BC);
        let floor = GRADIENT_FLOOR / grid.h();
        let mut n = VectorField::zeros(grid);
        for k in 0..g.x.len() {
            let m = (g.x[k] * g.x[k] + g.y[k] * g.y[k]).sqrt();
            if m > floor {
                n.x[k] = g.x[k] / m;
                n.y[k] = g.y[k] / m;
            }
        }
        Ok(Self { n, w: sim.v.sub(&sharp.v)? })
    }
}

/// `E` by definition and by the rearranged sum of nonnegative parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RelativeEnergy {
    pub e: f64,
    /// `1/2 int (rho_eps - rho)^2 + rho_eps |w|^2 + 1/2 equip + interface_err`.
    pub e_rearranged: f64,
    /// `int |grad c| (sqrt(2 rho_eps f) - psi'(c))`; zero when the density
    /// is slaved to the order parameter.
    pub rearranged_gap: f64,
    pub density: f64,
    pub kinetic: f64,
    /// `|| sqrt(eps) |grad c| - sqrt(2 rho_eps f / eps) ||^2`.
    pub equip: f64,
    /// `int (1 - xi . n_eps) |grad psi|`.
    pub interface_err: f64,
}

/// Left-hand sides of the five coercivity bounds and their ratios to `E`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    pub lhs: [f64; 5],
    pub ratios: [f64; 5],
    /// `E` was below `ENERGY_FLOOR`; ratios are reported as zero.
    pub degenerate: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    /// `int |grad w|^2`.
    pub gradw: f64,
    /// `int mu^2`.
    pub mu: f64,
    /// `int 1/2 (div xi sqrt(2 f / rho_eps) + mu)^2`.
    pub xi: f64,
    /// `int eps (mu / 2 + theta |grad c| / rho_eps)^2`.
    pub theta: f64,
}

/// Geometric fields of the reference interface at one time.
#[derive(Clone, Debug)]
pub struct GeometryFields {
    pub distance: ScalarField,
    pub xi: VectorField,
    pub div_xi: ScalarField,
    pub theta: ScalarField,
}

impl GeometryFields {
    pub fn new(iface: &AnalyticInterface, params: &GeometryParams, sharp: &SharpState) -> Self {
        let grid = *sharp.chi.grid();
        let iface = iface.on_grid(&grid);
        let t = sharp.t;
        Self {
            distance: iface.distance_field(&grid, t),
            xi: iface.xi_field(params, &grid, t),
            div_xi: iface.div_xi_field(params, &grid, t),
            theta: iface.theta_field(params, &grid, t),
        }
    }
}

/// One row of the per-run report table.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "E_rearranged")]
    pub e_rearranged: f64,
    pub rearranged_gap: f64,
    #[serde(rename = "E_vol")]
    pub e_vol: f64,
    #[serde(rename = "E_total")]
    pub e_total: f64,
    pub equip: f64,
    pub interface_err: f64,
    pub coercivity_1: f64,
    pub coercivity_2: f64,
    pub coercivity_3: f64,
    pub coercivity_4: f64,
    pub coercivity_5: f64,
    pub coercivity_degenerate: bool,
    pub diss_gradw: f64,
    pub diss_mu: f64,
    pub diss_xi: f64,
    pub diss_theta: f64,
    pub l1_psi: f64,
    pub identity_residual: Option<f64>,
    pub lemma22_c_eta_0_1: f64,
    pub lemma22_c_eta_1: f64,
    pub lemma23_c: f64,
    pub tubular_lhs: f64,
    pub tubular_c: f64,
    pub max_c_abs: f64,
    pub mass: f64,
}

impl EnergyReport {
    pub fn coercivity(&self) -> [f64; 5] {
        [self.coercivity_1, self.coercivity_2, self.coercivity_3, self.coercivity_4, self.coercivity_5]
    }
}

/// Per-cell quantities shared by several functionals.
struct Pointwise {
    grad_c: VectorField,
    /// `|grad psi| = psi'(c) |grad c|`.
    grad_psi: Vec<f64>,
    psi: Vec<f64>,
}

/// Evaluates all functionals for one diffuse width and potential.
#[derive(Clone, Debug)]
pub struct Evaluator {
    params: GeometryParams,
    psi: PsiMap,
    eps: f64,
}

impl Evaluator {
    pub fn new(params: GeometryParams, well: DoubleWell, densities: DensityPair, eps: f64) -> Result<Self> {
        if eps.is_nan() || eps <= 0.0 {
            return Err(Error::Config(format!("epsilon must be positive, got {eps}")));
        }
        Ok(Self { params, psi: PsiMap::new(well, densities)?, eps })
    }

    pub fn psi_map(&self) -> &PsiMap {
        &self.psi
    }

    pub fn sigma(&self) -> f64 {
        self.psi.sigma()
    }

    fn pointwise(&self, sim: &SimState) -> Pointwise {
        let grad_c = grad(&sim.c, C_BC);
        let mut grad_psi = vec![0.0; sim.c.data.len()];
        let mut psi = vec![0.0; sim.c.data.len()];
        for (k, &c) in sim.c.data.iter().enumerate() {
            let g = (grad_c.x[k] * grad_c.x[k] + grad_c.y[k] * grad_c.y[k]).sqrt();
            grad_psi[k] = self.psi.slope(c) * g;
            psi[k] = self.psi.value(c);
        }
        Pointwise { grad_c, grad_psi, psi }
    }

    pub fn relative_energy(&self, sim: &SimState, sharp: &SharpState, xi: &VectorField) -> Result<RelativeEnergy> {
        sim.grid().same_as(sharp.rho.grid())?;
        sim.grid().same_as(xi.grid())?;
        let pw = self.pointwise(sim);
        let nw = NormalFieldEps::new(sim, sharp)?;
        Ok(self.relative_energy_with(sim, sharp, xi, &pw, &nw))
    }

    fn relative_energy_with(
        &self,
        sim: &SimState,
        sharp: &SharpState,
        xi: &VectorField,
        pw: &Pointwise,
        nw: &NormalFieldEps,
    ) -> RelativeEnergy {
        let well = self.psi.well();
        let eps = self.eps;
        let mut r = RelativeEnergy::default();
        let mut gl = 0.0;
        let mut cross = 0.0;
        for k in 0..sim.c.data.len() {
            let re = sim.rho.data[k];
            let dr = re - sharp.rho.data[k];
            r.density += 0.5 * dr * dr;
            r.kinetic += 0.5 * re * (nw.w.x[k] * nw.w.x[k] + nw.w.y[k] * nw.w.y[k]);
            let (gx, gy) = (pw.grad_c.x[k], pw.grad_c.y[k]);
            let g2 = gx * gx + gy * gy;
            let f = well.f(sim.c.data[k]);
            gl += 0.5 * eps * g2 + re * f / eps;
            let slope = self.psi.slope(sim.c.data[k]);
            cross += slope * (xi.x[k] * gx + xi.y[k] * gy);
            let root = (2.0 * re * f).max(0.0).sqrt();
            let a = eps.sqrt() * g2.sqrt() - root / eps.sqrt();
            r.equip += a * a;
            let xn = xi.x[k] * nw.n.x[k] + xi.y[k] * nw.n.y[k];
            r.interface_err += (1.0 - xn) * pw.grad_psi[k];
            r.rearranged_gap += g2.sqrt() * root - pw.grad_psi[k];
        }
        let area = sim.grid().cell_area();
        r.density *= area;
        r.kinetic *= area;
        r.equip *= area;
        r.interface_err *= area;
        r.rearranged_gap *= area;
        r.e = r.density + r.kinetic + (gl - cross) * area;
        r.e_rearranged = r.density + r.kinetic + 0.5 * r.equip + r.interface_err;
        r
    }

    /// `int |sigma chi - psi(c)| |theta|`.
    pub fn bulk_error(&self, sim: &SimState, sharp: &SharpState, theta: &ScalarField) -> Result<f64> {
        sim.grid().same_as(sharp.chi.grid())?;
        sim.grid().same_as(theta.grid())?;
        let sigma = self.sigma();
        let s: f64 = (0..sim.c.data.len())
            .map(|k| (sigma * sharp.chi.data[k] - self.psi.value(sim.c.data[k])).abs() * theta.data[k].abs())
            .sum();
        Ok(s * sim.grid().cell_area())
    }

    /// `|| psi(c) - sigma chi ||_1`.
    pub fn l1_interface_error(&self, sim: &SimState, sharp: &SharpState) -> Result<f64> {
        sim.grid().same_as(sharp.chi.grid())?;
        let sigma = self.sigma();
        let s: f64 = (0..sim.c.data.len())
            .map(|k| (self.psi.value(sim.c.data[k]) - sigma * sharp.chi.data[k]).abs())
            .sum();
        Ok(s * sim.grid().cell_area())
    }

    pub fn coercivity_suite(&self, sim: &SimState, sharp: &SharpState, geo: &GeometryFields) -> Result<Coercivity> {
        let pw = self.pointwise(sim);
        let nw = NormalFieldEps::new(sim, sharp)?;
        let e = self.relative_energy_with(sim, sharp, &geo.xi, &pw, &nw);
        Ok(self.coercivity_with(sim, geo, &pw, &nw, &e))
    }

    fn coercivity_with(
        &self,
        sim: &SimState,
        geo: &GeometryFields,
        pw: &Pointwise,
        nw: &NormalFieldEps,
        e: &RelativeEnergy,
    ) -> Coercivity {
        let well = self.psi.well();
        let eps = self.eps;
        let mut lhs = [0.0; 5];
        lhs[0] = 2.0 * (e.density + e.kinetic) + e.equip;
        let area = sim.grid().cell_area();
        let (mut l2, mut l3, mut l4, mut l5) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..sim.c.data.len() {
            let d = geo.distance.data[k];
            let near = (d * d).min(1.0);
            let (gx, gy) = (pw.grad_c.x[k], pw.grad_c.y[k]);
            let g2 = gx * gx + gy * gy;
            let gpsi = pw.grad_psi[k];
            let (nx, ny) = (nw.n.x[k], nw.n.y[k]);
            let (xx, xy) = (geo.xi.x[k], geo.xi.y[k]);
            let tilt = (1.0 - (nx * xx + ny * xy)).max(0.0);
            let gap2 = (nx - xx).powi(2) + (ny - xy).powi(2);
            l2 += near * (0.5 * eps * g2 + sim.rho.data[k] * well.f(sim.c.data[k]) / eps);
            l3 += tilt * gpsi + gap2 * gpsi + near * gpsi;
            l4 += gap2 * eps * g2 + near * eps * g2;
            l5 += (d.abs().min(1.0) + tilt.sqrt()) * (eps * g2 - gpsi).abs();
        }
        lhs[1] = l2 * area;
        lhs[2] = l3 * area;
        lhs[3] = l4 * area;
        lhs[4] = l5 * area;
        if e.e.abs() < ENERGY_FLOOR {
            return Coercivity { lhs, ratios: [0.0; 5], degenerate: true };
        }
        Coercivity { lhs, ratios: lhs.map(|l| l / e.e), degenerate: false }
    }

    pub fn dissipation_terms(&self, sim: &SimState, sharp: &SharpState, geo: &GeometryFields) -> Result<Dissipation> {
        let pw = self.pointwise(sim);
        let nw = NormalFieldEps::new(sim, sharp)?;
        Ok(self.dissipation_with(sim, geo, &pw, &nw))
    }

    fn dissipation_with(&self, sim: &SimState, geo: &GeometryFields, pw: &Pointwise, nw: &NormalFieldEps) -> Dissipation {
        let well = self.psi.well();
        let eps = self.eps;
        let area = sim.grid().cell_area();
        let mut out = Dissipation { gradw: h1_seminorm(&nw.w, V_BC).powi(2), ..Default::default() };
        for k in 0..sim.c.data.len() {
            let mu = sim.mu.data[k];
            let re = sim.rho.data[k];
            let f = well.f(sim.c.data[k]);
            out.mu += mu * mu;
            let a = geo.div_xi.data[k] * (2.0 * f / re).max(0.0).sqrt() + mu;
            out.xi += 0.5 * a * a;
            let (gx, gy) = (pw.grad_c.x[k], pw.grad_c.y[k]);
            let b = 0.5 * mu + geo.theta.data[k] * (gx * gx + gy * gy).sqrt() / re;
            out.theta += eps * b * b;
        }
        out.mu *= area;
        out.xi *= area;
        out.theta *= area;
        out
    }

    /// Smallest `C` with `int |sigma chi - psi| |w| <= (C/eta)(E + E_vol) + eta int |grad w|^2`.
    pub fn lemma_mixed_constant(l1_weighted: f64, gradw: f64, e_total: f64, eta: f64) -> f64 {
        if e_total <= ENERGY_FLOOR {
            return 0.0;
        }
        (eta * (l1_weighted - eta * gradw)).max(0.0) / e_total
    }

    /// `int (1/2)(div xi)^2 (2 f / rho_eps)` by tubular quadrature of the
    /// bilinearly interpolated fields.
    pub fn tubular_term(&self, sim: &SimState, iface: &AnalyticInterface, t: f64) -> Result<f64> {
        let grid = *sim.grid();
        let iface = iface.on_grid(&grid);
        let centre = iface.center_at(t);
        let rad = iface.radius();
        let well = self.psi.well();
        let params = self.params;
        iface.tubular_integral(&params, params.delta, Jacobian::Exact, |r, a| {
            let x = [centre[0] + (rad - r) * a.cos(), centre[1] + (rad - r) * a.sin()];
            let c = sample(&sim.c, x);
            let re = sample(&sim.rho, x);
            let dx = iface.div_xi(&params, x, t);
            0.5 * dx * dx * 2.0 * well.f(c) / re
        })
    }

    /// All functionals at one report time.
    pub fn report(
        &self,
        sim: &SimState,
        sharp: &SharpState,
        identity_residual: Option<f64>,
    ) -> Result<EnergyReport> {
        let grid = *sim.grid();
        grid.same_as(sharp.chi.grid())?;
        let geo = GeometryFields::new(&sharp.interface, &self.params, sharp);
        let pw = self.pointwise(sim);
        let nw = NormalFieldEps::new(sim, sharp)?;
        let e = self.relative_energy_with(sim, sharp, &geo.xi, &pw, &nw);
        let e_vol = self.bulk_error(sim, sharp, &geo.theta)?;
        let coer = self.coercivity_with(sim, &geo, &pw, &nw, &e);
        let diss = self.dissipation_with(sim, &geo, &pw, &nw);
        let e_total = e.e + e_vol;
        let area = grid.cell_area();
        let sigma = self.sigma();
        let mut weighted = 0.0;
        let mut l1 = 0.0;
        for k in 0..sim.c.data.len() {
            let gap = (sigma * sharp.chi.data[k] - pw.psi[k]).abs();
            l1 += gap;
            weighted += gap * (nw.w.x[k] * nw.w.x[k] + nw.w.y[k] * nw.w.y[k]).sqrt();
        }
        let (l1, weighted) = (l1 * area, weighted * area);
        let tubular = self.tubular_term(sim, &sharp.interface, sharp.t)?;
        let stretch = self.stretching_term(sim, sharp, &pw, &nw);
        let lemma23 = if e.e.abs() < ENERGY_FLOOR { 0.0 } else { stretch.abs() / e.e };
        let report = EnergyReport {
            t: sim.t,
            e: e.e,
            e_rearranged: e.e_rearranged,
            rearranged_gap: e.rearranged_gap,
            e_vol,
            e_total,
            equip: e.equip,
            interface_err: e.interface_err,
            coercivity_1: coer.ratios[0],
            coercivity_2: coer.ratios[1],
            coercivity_3: coer.ratios[2],
            coercivity_4: coer.ratios[3],
            coercivity_5: coer.ratios[4],
            coercivity_degenerate: coer.degenerate,
            diss_gradw: diss.gradw,
            diss_mu: diss.mu,
            diss_xi: diss.xi,
            diss_theta: diss.theta,
            l1_psi: l1,
            identity_residual,
            lemma22_c_eta_0_1: Self::lemma_mixed_constant(weighted, diss.gradw, e_total, 0.1),
            lemma22_c_eta_1: Self::lemma_mixed_constant(weighted, diss.gradw, e_total, 1.0),
            lemma23_c: lemma23,
            tubular_lhs: tubular,
            tubular_c: tubular / (self.eps.cbrt() + e.e.max(0.0)),
            max_c_abs: sim.c.max_abs(),
            mass: crate::fields::integral(&sim.rho),
        };
        if report.e < -1e-10 {
            log::warn!("negative relative energy {} at t = {}", report.e, report.t);
        }
        Ok(report)
    }

    /// `int grad v : (I - n (x) n)(eps |grad c|^2 - |grad psi|)` for the
    /// reference velocity `v`.
    fn stretching_term(&self, sim: &SimState, sharp: &SharpState, pw: &Pointwise, nw: &NormalFieldEps) -> f64 {
        let gu = grad(&sharp.v.component_x(), V_BC.x);
        let gv = grad(&sharp.v.component_y(), V_BC.y);
        let mut s = 0.0;
        for k in 0..sim.c.data.len() {
            let (nx, ny) = (nw.n.x[k], nw.n.y[k]);
            // grad v : (I - n n), with (grad v)_{ij} = d_j v_i
            let contr = (gu.x[k] + gv.y[k])
                - (gu.x[k] * nx * nx + gu.y[k] * nx * ny + gv.x[k] * ny * nx + gv.y[k] * ny * ny);
            let (gx, gy) = (pw.grad_c.x[k], pw.grad_c.y[k]);
            s += contr * (self.eps * (gx * gx + gy * gy) - pw.grad_psi[k]);
        }
        s * sim.grid().cell_area()
    }
}

/// `(GL(b) - GL(a))/dt + m int mu_a^2 - int eps grad v_a : (I - n n)|grad c_a|^2`.
pub fn energy_identity_residual(a: &SimState, b: &SimState, dt: f64, eps: f64, mobility: f64, well: &DoubleWell) -> Result<f64> {
    a.grid().same_as(b.grid())?;
    let gl_a = ginzburg_landau(&a.c, &a.rho, eps, well);
    let gl_b = ginzburg_landau(&b.c, &b.rho, eps, well);
    let area = a.grid().cell_area();
    let mu2: f64 = a.mu.data.iter().map(|m| m * m).sum::<f64>() * area;
    let gc = grad(&a.c, C_BC);
    let gu = grad(&a.v.component_x(), V_BC.x);
    let gv = grad(&a.v.component_y(), V_BC.y);
    let mut stretch = 0.0;
    for k in 0..gc.x.len() {
        let (cx, cy) = (gc.x[k], gc.y[k]);
        // grad v : (I |grad c|^2 - grad c (x) grad c)
        let g2 = cx * cx + cy * cy;
        stretch += (gu.x[k] + gv.y[k]) * g2 - (gu.x[k] * cx * cx + gu.y[k] * cx * cy + gv.x[k] * cy * cx + gv.y[k] * cy * cy);
    }
    stretch *= eps * area;
    Ok(((gl_b - gl_a) / dt + mobility * mu2 - stretch).abs())
}

/// Result of fitting `y(t) <= e^{Ct}(y(0) + C t eps^{1/3})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallFit {
    pub c: f64,
    pub admissible: bool,
    /// Largest sample time up to which a constant below the cap fits.
    pub horizon: f64,
}

fn gronwall_holds(times: &[f64], y: &[f64], y0: f64, eps13: f64, c: f64) -> bool {
    times.iter().zip(y).all(|(&t, &v)| {
        let bound = (c * t).exp() * (y0 + c * t * eps13);
        v <= bound * (1.0 + 1e-12) + 1e-300
    })
}

fn smallest_constant(times: &[f64], y: &[f64], eps13: f64) -> Option<f64> {
    let y0 = y[0];
    if gronwall_holds(times, y, y0, eps13, 0.0) {
        return Some(0.0);
    }
    let mut hi = 1e-6;
    while !gronwall_holds(times, y, y0, eps13, hi) {
        hi *= 2.0;
        if hi > GRONWALL_CAP {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gronwall_holds(times, y, y0, eps13, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Some(hi)
}

/// Smallest admissible Gronwall constant for a sampled series starting at
/// `times[0] = 0`.
pub fn gronwall_fit(times: &[f64], y: &[f64], eps: f64) -> Result<GronwallFit> {
    if times.len() != y.len() || times.len() < 10 {
        return Err(Error::Fit(format!("Gronwall fit needs at least 10 paired samples, got {}", times.len().min(y.len()))));
    }
    if times.iter().chain(y).any(|v| !v.is_finite()) {
        return Ok(GronwallFit { c: f64::NAN, admissible: false, horizon: 0.0 });
    }
    let eps13 = eps.cbrt();
    match smallest_constant(times, y, eps13) {
        Some(c) => Ok(GronwallFit { c, admissible: true, horizon: *times.last().unwrap() }),
        None => {
            let mut horizon = times[0];
            for n in 2..=times.len() {
                if smallest_constant(&times[..n], &y[..n], eps13).is_none() {
                    break;
                }
                horizon = times[n - 1];
            }
            Ok(GronwallFit { c: f64::INFINITY, admissible: false, horizon })
        }
    }
}

/// Whether fitted constants agree within `rel` of their median. Values
/// below `floor` are raised to it, so that constants that are all
/// negligible count as stable.
pub fn gronwall_stable(cs: &[f64], rel: f64, floor: f64) -> bool {
    if cs.is_empty() || cs.iter().any(|c| !c.is_finite()) {
        return false;
    }
    let mut v: Vec<f64> = cs.iter().map(|c| c.max(floor)).collect();
    v.sort_by(f64::total_cmp);
    let median = if v.len() % 2 == 1 { v[v.len() / 2] } else { 0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2]) };
    v.iter().all(|c| (c - median).abs() <= rel * median)
}

/// Bilinear interpolation of a cell-centred field, clamped at walls and
/// wrapped on periodic grids.
pub fn sample(f: &ScalarField, x: [f64; 2]) -> f64 {
    let g = f.grid();
    let h = g.h();
    let (fx, fy) = (x[0] / h - 0.5, x[1] / h - 0.5);
    let (i0, j0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - i0, fy - j0);
    let index = |i: f64, n: usize| -> usize {
        let i = i as isize;
        if g.is_periodic() {
            i.rem_euclid(n as isize) as usize
        } else {
            i.clamp(0, n as isize - 1) as usize
        }
    };
    let (ia, ib) = (index(i0, g.nx), index(i0 + 1.0, g.nx));
    let (ja, jb) = (index(j0, g.ny), index(j0 + 1.0, g.ny));
    let v = |i, j| f.data[g.idx(i, j)];
    (1.0 - ty) * ((1.0 - tx) * v(ia, ja) + tx * v(ib, ja)) + ty * ((1.0 - tx) * v(ia, jb) + tx * v(ib, jb))
}
