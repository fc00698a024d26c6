//! Property suite for the interface geometry and its auxiliary fields.
//!
//! Every check samples the analytic fields on two nested grids (the given
//! resolution and its refinement) so that discretisation-dependent
//! constants can be compared across refinement.

use serde::Serialize;

use super::{phi, phi_prime, theta_profile, zeta_profile, AnalyticInterface, GeometryParams};
use crate::fields::{div, grad, FieldBc, Grid2D, VectorBc};

#[derive(Clone, Debug, Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

impl PropertyCheck {
    fn new(name: &str, passed: bool, value: f64, detail: String) -> Self {
        Self { name: name.to_owned(), passed, value, detail }
    }
}

/// Velocity used for the transport checks when the interface is static.
pub const DEFAULT_TRANSLATION: [f64; 2] = [1.0, 0.5];

const NEUMANN2: VectorBc = VectorBc { x: FieldBc::Neumann, y: FieldBc::Neumann };

pub fn run_suite(iface: &AnalyticInterface, params: &GeometryParams, grid: &Grid2D) -> Vec<PropertyCheck> {
    let fine = Grid2D::new(2 * grid.nx, 2 * grid.ny, grid.lx, grid.ly, grid.bc).expect("refined grid is valid");
    let iface = iface.on_grid(grid);
    let moving = if iface.velocity == [0.0, 0.0] { iface.with_velocity(DEFAULT_TRANSLATION) } else { iface };
    let levels = [*grid, fine];

    let mut out = vec![phi_sandwich(), phi_shape()];
    out.push(xi_norm(&iface, params, &levels));
    out.push(xi_bound(&iface, params, &levels[1]));
    out.push(xi_on_interface(&iface, params));
    out.push(order_check("div_xi_discrete_order", &levels, 1.8, |g| div_xi_error(&iface, params, g)));
    out.push(stable_constant("div_xi_plus_curvature_over_distance", &levels, 0.3, |g| {
        div_xi_curvature_constant(&iface, params, g)
    }));
    out.push(order_check("grad_distance_unit_in_tube", &levels, 1.8, |g| grad_distance_defect(&iface, params, g)));
    out.push(order_check("xi_dot_grad_curvature_vanishes", &levels, 1.8, |g| {
        curvature_transport_defect(&iface, params, g)
    }));
    out.push(theta_checks(&iface, params, &levels[1]));
    out.push(zeta_support(&iface, params, &levels[1]));
    let transport = |g: &Grid2D| transport_constants(&moving, params, g);
    let (coarse, finer) = (transport(&levels[0]), transport(&levels[1]));
    let names = ["xi_transport_residual", "xi_transport_normal_component", "theta_transport_residual"];
    for (k, name) in names.iter().enumerate() {
        out.push(non_growing(name, coarse[k], finer[k], 0.3));
    }
    out
}

fn phi_sandwich() -> PropertyCheck {
    let n = 10_001;
    let worst = (0..n)
        .map(|k| -0.5 + k as f64 / (n - 1) as f64)
        .map(|x| {
            let p = phi(x);
            (1.0 - 4.0 * x * x - p).max(p - (1.0 - 0.5 * x * x))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    PropertyCheck::new("phi_sandwich", worst <= 1e-15, worst, "max violation of 1-4x^2 <= phi <= 1-x^2/2".into())
}

fn phi_shape() -> PropertyCheck {
    let n = 4001;
    let mut ok = true;
    let mut prev = phi(0.0);
    for k in 1..n {
        let x = k as f64 / (n - 1) as f64;
        let p = phi(x);
        ok &= p <= prev && p == phi(-x) && (x >= 1.0 || p > 0.0) && phi_prime(x) <= 0.0;
        prev = p;
    }
    ok &= phi(1.0) == 0.0 && phi(1.5) == 0.0 && phi(-2.0) == 0.0;
    PropertyCheck::new("phi_even_monotone_supported", ok, 0.0, "even, nonincreasing on [0,1], zero for |x|>=1".into())
}

fn xi_norm(iface: &AnalyticInterface, params: &GeometryParams, levels: &[Grid2D]) -> PropertyCheck {
    let mut worst: f64 = 0.0;
    for g in levels {
        for (_, _, x) in g.cells() {
            let xi = iface.xi(params, x, 0.0);
            let d = iface.signed_distance(x, 0.0);
            worst = worst.max((xi[0].hypot(xi[1]) - phi(d / params.delta)).abs());
        }
    }
    PropertyCheck::new("xi_norm_equals_phi", worst <= 1e-13, worst, "max ||xi| - phi(d/delta)|".into())
}

fn xi_bound(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> PropertyCheck {
    let c = g
        .cells()
        .filter_map(|(_, _, x)| {
            let d = iface.signed_distance(x, 0.0);
            (d != 0.0).then(|| {
                let xi = iface.xi(params, x, 0.0);
                (1.0 - xi[0].hypot(xi[1])) / (d * d).min(1.0)
            })
        })
        .fold(f64::INFINITY, f64::min);
    PropertyCheck::new("xi_coercive_bound", c > 0.0, c, "c in |xi| <= 1 - c min(d^2, 1)".into())
}

fn xi_on_interface(iface: &AnalyticInterface, params: &GeometryParams) -> PropertyCheck {
    let c = iface.center_at(0.0);
    let r = iface.radius();
    let mut worst: f64 = 0.0;
    for k in 0..720 {
        let a = 2.0 * std::f64::consts::PI * k as f64 / 720.0;
        let x = [c[0] + r * a.cos(), c[1] + r * a.sin()];
        let xi = iface.xi(params, x, 0.0);
        let nc = iface.normal_and_curvature(params, x, 0.0).expect("point lies on the interface");
        worst = worst.max((xi[0] - nc.normal[0]).hypot(xi[1] - nc.normal[1]));
        worst = worst.max((iface.div_xi(params, x, 0.0) + nc.curvature).abs());
    }
    PropertyCheck::new("xi_is_normal_on_interface", worst <= 1e-10, worst, "max |xi - n| and |div xi + H| on Gamma".into())
}

/// Discrete central divergence of sampled `xi` against the closed form,
/// on the smooth part `|d| <= delta/2` of the tube.
fn div_xi_error(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> f64 {
    let dv = div(&iface.xi_field(params, g, 0.0), NEUMANN2);
    g.cells()
        .filter(|(_, _, x)| iface.signed_distance(*x, 0.0).abs() <= 0.5 * params.delta)
        .map(|(i, j, x)| (dv.get(i, j) - iface.div_xi(params, x, 0.0)).abs())
        .fold(0.0, f64::max)
}

fn div_xi_curvature_constant(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> f64 {
    let dv = div(&iface.xi_field(params, g, 0.0), NEUMANN2);
    let h = g.h();
    g.cells()
        .filter_map(|(i, j, x)| {
            let d = iface.signed_distance(x, 0.0);
            // the O(h^2) stencil error is not resolved by |d| below one cell
            (d.abs() >= h && d.abs() <= 0.5 * params.delta).then(|| {
                let xi = iface.xi(params, x, 0.0);
                let h = iface.extended_curvature(params, x, 0.0);
                (dv.get(i, j) + h[0] * xi[0] + h[1] * xi[1]).abs() / d.abs()
            })
        })
        .fold(0.0, f64::max)
}

fn grad_distance_defect(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> f64 {
    let gd = grad(&iface.distance_field(g, 0.0), FieldBc::Neumann);
    // a fixed region that keeps the stencil away from the centre kink
    let r_min = (iface.radius() - 3.0 * params.delta).max(0.25 * iface.radius());
    g.cells()
        .filter(|(_, _, x)| {
            let d = iface.signed_distance(*x, 0.0);
            d.abs() <= 3.0 * params.delta && iface.radius() - d >= r_min
        })
        .map(|(i, j, _)| {
            let v = gd.get(i, j);
            (v[0].hypot(v[1]) - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn curvature_transport_defect(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> f64 {
    let hf = iface.curvature_field(params, g, 0.0);
    let (gx, gy) = (grad(&hf.component_x(), FieldBc::Neumann), grad(&hf.component_y(), FieldBc::Neumann));
    let h = g.h();
    g.cells()
        .filter(|(_, _, x)| iface.signed_distance(*x, 0.0).abs() <= params.delta - 2.0 * h)
        .map(|(i, j, x)| {
            let xi = iface.xi(params, x, 0.0);
            let (a, b) = (gx.get(i, j), gy.get(i, j));
            (xi[0] * a[0] + xi[1] * a[1]).hypot(xi[0] * b[0] + xi[1] * b[1])
        })
        .fold(0.0, f64::max)
}

fn theta_checks(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> PropertyCheck {
    let delta = params.delta;
    let mut ok = theta_profile(0.0, delta) == 0.0
        && theta_profile(delta, delta) == -delta
        && theta_profile(-delta, delta) == delta
        && (theta_profile(0.25 * delta, delta) + 0.25 * delta).abs() < 1e-15;
    let n = 20_001;
    let mut lip: f64 = 0.0;
    let span = 2.0 * delta;
    for k in 0..n - 1 {
        let r0 = -span + 2.0 * span * k as f64 / (n - 1) as f64;
        let r1 = -span + 2.0 * span * (k + 1) as f64 / (n - 1) as f64;
        lip = lip.max((theta_profile(r1, delta) - theta_profile(r0, delta)).abs() / (r1 - r0));
        ok &= theta_profile(r0, delta) == -theta_profile(-r0, delta);
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (_, _, x) in g.cells() {
        let d = iface.signed_distance(x, 0.0);
        if d == 0.0 {
            continue;
        }
        let th = iface.theta(params, x, 0.0);
        ok &= th * d < 0.0;
        let ratio = th.abs() / d.abs().min(1.0);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    ok &= lip <= 4.0 / 3.0 + 1e-9 && lo > 0.0 && hi.is_finite();
    PropertyCheck::new(
        "theta_odd_lipschitz_coercive",
        ok,
        lip,
        format!("Lipschitz {lip:.4}; c = {lo:.4e}, C = {hi:.4} in c min(|d|,1) <= |theta| <= C min(|d|,1)"),
    )
}

fn zeta_support(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> PropertyCheck {
    let delta = params.delta;
    let ok = g.cells().all(|(_, _, x)| {
        let d = iface.signed_distance(x, 0.0).abs();
        let z = zeta_profile(d, delta);
        (d > delta || z == 1.0) && (d < 2.0 * delta || z == 0.0) && (0.0..=1.0).contains(&z)
    });
    PropertyCheck::new("zeta_cutoff_support", ok, 0.0, "zeta = 1 on Gamma(delta), 0 outside Gamma(2 delta)".into())
}

/// Measured constants of the three transport bounds, over cells at least
/// one mesh width from the interface, for a rigidly moving circle with
/// the sharp velocity equal to the translation velocity:
/// `|d_t xi + (v.grad) xi| <= C min(|d|,1)`,
/// `|xi . (d_t + v.grad) xi| <= C min(d^2,1)`,
/// `|d_t theta + v.grad theta| <= C min(|d|,1)`.
fn transport_constants(iface: &AnalyticInterface, params: &GeometryParams, g: &Grid2D) -> [f64; 3] {
    let v = iface.velocity;
    let tau = 0.25 * g.h() / v[0].hypot(v[1]).max(1e-300);
    let xi_at = |t: f64| iface.xi_field(params, g, t);
    let (xp, xm) = (xi_at(tau), xi_at(-tau));
    let xi0 = xi_at(0.0);
    let (gx, gy) = (grad(&xi0.component_x(), FieldBc::Neumann), grad(&xi0.component_y(), FieldBc::Neumann));
    let th0 = iface.theta_field(params, g, 0.0);
    let (tp, tm) = (iface.theta_field(params, g, tau), iface.theta_field(params, g, -tau));
    let gt = grad(&th0, FieldBc::Neumann);
    let mut c = [0.0f64; 3];
    for (i, j, x) in g.cells() {
        let d = iface.signed_distance(x, 0.0);
        if d.abs() < g.h() {
            continue;
        }
        let k = g.idx(i, j);
        let (a, b) = (gx.get(i, j), gy.get(i, j));
        let rx = (xp.x[k] - xm.x[k]) / (2.0 * tau) + v[0] * a[0] + v[1] * a[1];
        let ry = (xp.y[k] - xm.y[k]) / (2.0 * tau) + v[0] * b[0] + v[1] * b[1];
        let lin = d.abs().min(1.0);
        c[0] = c[0].max(rx.hypot(ry) / lin);
        c[1] = c[1].max((xi0.x[k] * rx + xi0.y[k] * ry).abs() / (lin * lin));
        let gtk = gt.get(i, j);
        let rt = (tp.data[k] - tm.data[k]) / (2.0 * tau) + v[0] * gtk[0] + v[1] * gtk[1];
        c[2] = c[2].max(rt.abs() / lin);
    }
    c
}

fn order_check(name: &str, levels: &[Grid2D], min_order: f64, err: impl Fn(&Grid2D) -> f64) -> PropertyCheck {
    let (e1, e2) = (err(&levels[0]), err(&levels[1]));
    let order = if e2 == 0.0 { f64::INFINITY } else { (e1 / e2).log2() };
    // errors already at rounding level need no rate
    let passed = order >= min_order || e1 < 1e-11;
    PropertyCheck::new(name, passed, order, format!("errors {e1:.3e} -> {e2:.3e}, observed order {order:.2}"))
}

fn stable_constant(name: &str, levels: &[Grid2D], tol: f64, constant: impl Fn(&Grid2D) -> f64) -> PropertyCheck {
    let (c1, c2) = (constant(&levels[0]), constant(&levels[1]));
    let change = (c2 - c1).abs() / c1.abs().max(1e-300);
    PropertyCheck::new(
        name,
        c1.is_finite() && c2.is_finite() && change <= tol,
        c2,
        format!("C = {c1:.4e} -> {c2:.4e} under refinement (relative change {change:.3})"),
    )
}

/// A bound whose measured constant must not grow by more than `tol` under
/// refinement (it may shrink towards the continuum value).
fn non_growing(name: &str, c1: f64, c2: f64, tol: f64) -> PropertyCheck {
    let passed = c1.is_finite() && c2.is_finite() && c2 <= (1.0 + tol) * c1 + 1e-12;
    PropertyCheck::new(name, passed, c2, format!("C = {c1:.4e} -> {c2:.4e} under refinement"))
}
