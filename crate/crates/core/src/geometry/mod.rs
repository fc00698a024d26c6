//! Signed-distance calculus for analytic interfaces.
//!
//! Orientation: the bubble interior is the `+` phase (`chi = 1`, `c = +1`),
//! the exterior the `-` phase. The signed distance is positive inside the
//! bubble, so `grad d` points inward and a circle of radius `R` has mean
//! curvature `H = +1/R`.

pub mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField, VectorField};

pub type Point = [f64; 2];

/// Cutoff profile `phi(x) = (1 - x^2)^2` on `|x| < 1`, zero outside.
pub fn phi(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - x * x;
        s * s
    }
}

pub fn phi_prime(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        -4.0 * x * (1.0 - x * x)
    }
}

/// Odd truncation of the signed distance: `-r` on `|r| <= delta/2`,
/// `-sign(r) delta` beyond `delta`, and a monotone cubic Hermite blend
/// in between (value and slope matched at both ends).
pub fn theta_profile(r: f64, delta: f64) -> f64 {
    let a = r.abs();
    let half = 0.5 * delta;
    let mag = if a <= half {
        a
    } else if a >= delta {
        delta
    } else {
        let t = (a - half) / half;
        half * (-t * t * t + t * t + t + 1.0)
    };
    -mag.copysign(r)
}

pub fn theta_profile_prime(r: f64, delta: f64) -> f64 {
    let a = r.abs();
    let half = 0.5 * delta;
    if a <= half {
        -1.0
    } else if a >= delta {
        0.0
    } else {
        let t = (a - half) / half;
        -(1.0 - t) * (3.0 * t + 1.0)
    }
}

/// Quintic smoothstep in `|d|`: 1 up to `delta`, 0 from `2 delta` on.
pub fn zeta_profile(d: f64, delta: f64) -> f64 {
    let a = d.abs();
    if a <= delta {
        1.0
    } else if a >= 2.0 * delta {
        0.0
    } else {
        let s = (2.0 * delta - a) / delta;
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub delta: f64,
}

impl GeometryParams {
    /// One tenth of the shorter domain side.
    pub fn default_for(grid: &Grid2D) -> Self {
        Self { delta: 0.1 * grid.lx.min(grid.ly) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

/// Geometric data of the interface at the projection of a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalCurvature {
    /// `grad d`, pointing into the bubble.
    pub normal: Point,
    pub curvature: f64,
    /// Normal velocity `-d_t d`.
    pub velocity: f64,
}

/// How the tubular quadrature weights the normal coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Jacobian {
    /// Exact area element `(R - r)/R` of the circle, clipped at zero.
    Exact,
    /// `J = 1`.
    Flat,
}

/// A circle moving rigidly with constant velocity, optionally on a periodic
/// domain (distances then use the minimal image).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticInterface {
    pub circle: Circle,
    pub velocity: Point,
    pub period: Option<[f64; 2]>,
}

impl AnalyticInterface {
    pub fn circle(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Config(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Self { circle: Circle { center, radius }, velocity: [0.0, 0.0], period: None })
    }

    pub fn with_velocity(mut self, velocity: Point) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn on_grid(mut self, grid: &Grid2D) -> Self {
        self.period = grid.period();
        self
    }

    pub fn radius(&self) -> f64 {
        self.circle.radius
    }

    pub fn center_at(&self, t: f64) -> Point {
        let c = self.circle.center;
        let mut p = [c[0] + t * self.velocity[0], c[1] + t * self.velocity[1]];
        if let Some(l) = self.period {
            p = [p[0].rem_euclid(l[0]), p[1].rem_euclid(l[1])];
        }
        p
    }

    /// `x - center(t)`, wrapped to the minimal image on periodic domains.
    fn offset(&self, x: Point, t: f64) -> Point {
        let c = self.center_at(t);
        let mut dx = [x[0] - c[0], x[1] - c[1]];
        if let Some(l) = self.period {
            for k in 0..2 {
                dx[k] -= l[k] * (dx[k] / l[k]).round();
            }
        }
        dx
    }

    pub fn signed_distance(&self, x: Point, t: f64) -> f64 {
        let dx = self.offset(x, t);
        self.circle.radius - dx[0].hypot(dx[1])
    }

    /// `grad d = -(x - c)/|x - c|`; zero at the centre.
    pub fn grad_distance(&self, x: Point, t: f64) -> Point {
        let dx = self.offset(x, t);
        let r = dx[0].hypot(dx[1]);
        if r == 0.0 {
            [0.0, 0.0]
        } else {
            [-dx[0] / r, -dx[1] / r]
        }
    }

    /// Closest point on the interface. The centre projects onto angle 0.
    pub fn projection(&self, x: Point, t: f64) -> Point {
        let c = self.center_at(t);
        let dx = self.offset(x, t);
        let r = dx[0].hypot(dx[1]);
        let rad = self.circle.radius;
        if r == 0.0 {
            [c[0] + rad, c[1]]
        } else {
            [c[0] + rad * dx[0] / r, c[1] + rad * dx[1] / r]
        }
    }

    fn check_tube(&self, x: Point, t: f64, half_width: f64) -> Result<f64> {
        let d = self.signed_distance(x, t);
        if d.abs() > half_width {
            return Err(Error::OutOfTube { distance: d, half_width });
        }
        Ok(d)
    }

    pub fn normal_and_curvature(&self, params: &GeometryParams, x: Point, t: f64) -> Result<NormalCurvature> {
        self.check_tube(x, t, 3.0 * params.delta)?;
        let n = self.grad_distance(x, t);
        Ok(NormalCurvature {
            normal: n,
            curvature: 1.0 / self.circle.radius,
            velocity: n[0] * self.velocity[0] + n[1] * self.velocity[1],
        })
    }

    /// `xi = phi(d/delta) grad d`.
    pub fn xi(&self, params: &GeometryParams, x: Point, t: f64) -> Point {
        let w = phi(self.signed_distance(x, t) / params.delta);
        if w == 0.0 {
            return [0.0, 0.0];
        }
        let n = self.grad_distance(x, t);
        [w * n[0], w * n[1]]
    }

    /// Closed-form `div xi = phi'(d/delta)/delta + phi(d/delta) lap d`, with
    /// `lap d = -1/|x - c|` for the circle.
    pub fn div_xi(&self, params: &GeometryParams, x: Point, t: f64) -> f64 {
        let d = self.signed_distance(x, t);
        let s = d / params.delta;
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let r = self.circle.radius - d;
        phi_prime(s) / params.delta - phi(s) / r
    }

    pub fn theta(&self, params: &GeometryParams, x: Point, t: f64) -> f64 {
        theta_profile(self.signed_distance(x, t), params.delta)
    }

    pub fn zeta(&self, params: &GeometryParams, x: Point, t: f64) -> f64 {
        zeta_profile(self.signed_distance(x, t), params.delta)
    }

    /// Curvature vector `H n` of the projected point, damped by `zeta`.
    pub fn extended_curvature(&self, params: &GeometryParams, x: Point, t: f64) -> Point {
        let z = self.zeta(params, x, t);
        if z == 0.0 {
            return [0.0, 0.0];
        }
        let n = self.grad_distance(x, t);
        let k = z / self.circle.radius;
        [k * n[0], k * n[1]]
    }

    /// Constant extension of `v` along normals: `v(P(x))`, defined in the
    /// tube of half-width `2 delta`.
    pub fn extended_velocity(
        &self,
        params: &GeometryParams,
        v: impl Fn(Point) -> Point,
        x: Point,
        t: f64,
    ) -> Result<Point> {
        self.check_tube(x, t, 2.0 * params.delta)?;
        Ok(v(self.projection(x, t)))
    }

    /// Checks the radius against the tube size and keeps the whole tube of
    /// half-width `3 delta` away from walls for `t` in `[0, t_end]`.
    pub fn validate(&self, params: &GeometryParams, grid: &Grid2D, t_end: f64) -> Result<()> {
        let delta = params.delta;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        let rad = self.circle.radius;
        if rad <= 3.0 * delta {
            return Err(Error::Config(format!(
                "radius {rad} must exceed 3 delta = {} so that the normal field is defined on the tube",
                3.0 * delta
            )));
        }
        if grid.is_periodic() {
            if 2.0 * (rad + 3.0 * delta) >= grid.lx.min(grid.ly) {
                return Err(Error::Config("the tube around the bubble overlaps its periodic image".into()));
            }
            return Ok(());
        }
        // linear motion: the wall distance is extremal at the end points
        for t in [0.0, t_end] {
            let c = self.center_at(t);
            let gap = [c[0], grid.lx - c[0], c[1], grid.ly - c[1]].into_iter().fold(f64::INFINITY, f64::min) - rad;
            if gap <= 3.0 * delta {
                return Err(Error::MarginViolation { distance: gap, required: 3.0 * delta });
            }
        }
        Ok(())
    }

    /// `int_Gamma int_{-w}^{w} g(r, s) J dr dsigma`, with `r` the signed
    /// distance and `s` the arc-length angle in `[0, 2 pi)`.
    pub fn tubular_integral(
        &self,
        params: &GeometryParams,
        half_width: f64,
        jacobian: Jacobian,
        g: impl Fn(f64, f64) -> f64,
    ) -> Result<f64> {
        if half_width > 2.0 * params.delta * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "tubular half-width {half_width} exceeds 2 delta = {}",
                2.0 * params.delta
            )));
        }
        let rad = self.circle.radius;
        let (nodes, weights) = gauss_legendre(16);
        let panels = 32;
        let n_angle = 256;
        let dr = 2.0 * half_width / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = -half_width + (p as f64 + 0.5) * dr;
            for (xq, wq) in nodes.iter().zip(&weights) {
                let r = mid + 0.5 * dr * xq;
                let j = match jacobian {
                    Jacobian::Exact => ((rad - r) / rad).max(0.0),
                    Jacobian::Flat => 1.0,
                };
                let mut ring = 0.0;
                for k in 0..n_angle {
                    ring += g(r, 2.0 * std::f64::consts::PI * k as f64 / n_angle as f64);
                }
                ring *= 2.0 * std::f64::consts::PI * rad / n_angle as f64;
                total += 0.5 * dr * wq * j * ring;
            }
        }
        Ok(total)
    }

    pub fn distance_field(&self, grid: &Grid2D, t: f64) -> ScalarField {
        ScalarField::from_fn(*grid, |x| self.signed_distance(x, t))
    }

    pub fn xi_field(&self, params: &GeometryParams, grid: &Grid2D, t: f64) -> VectorField {
        VectorField::from_fn(*grid, |x| self.xi(params, x, t))
    }

    pub fn div_xi_field(&self, params: &GeometryParams, grid: &Grid2D, t: f64) -> ScalarField {
        ScalarField::from_fn(*grid, |x| self.div_xi(params, x, t))
    }

    pub fn theta_field(&self, params: &GeometryParams, grid: &Grid2D, t: f64) -> ScalarField {
        ScalarField::from_fn(*grid, |x| self.theta(params, x, t))
    }

    pub fn curvature_field(&self, params: &GeometryParams, grid: &Grid2D, t: f64) -> VectorField {
        VectorField::from_fn(*grid, |x| self.extended_curvature(params, x, t))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    use super::*;

    fn unit_circle(r: f64) -> AnalyticInterface {
        AnalyticInterface::circle([0.0, 0.0], r).unwrap()
    }

    /// Distance oracle by dense sampling of the curve.
    fn sampled_distance(iface: &AnalyticInterface, x: Point) -> f64 {
        let c = iface.circle.center;
        let r = iface.circle.radius;
        let n = 200_000;
        let dist = (0..n)
            .map(|k| {
                let a = 2.0 * PI * k as f64 / n as f64;
                (x[0] - c[0] - r * a.cos()).hypot(x[1] - c[1] - r * a.sin())
            })
            .fold(f64::INFINITY, f64::min);
        let inside = (x[0] - c[0]).hypot(x[1] - c[1]) < r;
        if inside {
            dist
        } else {
            -dist
        }
    }

    #[test]
    fn signed_distance_matches_sampling_oracle() {
        let iface = unit_circle(0.3);
        assert_eq!(iface.signed_distance([0.3, 0.0], 0.0), 0.0);
        for x in [[0.5, 0.0], [0.1, 0.0], [0.2, -0.4]] {
            let d = iface.signed_distance(x, 0.0);
            assert_abs_diff_eq!(d, sampled_distance(&iface, x), epsilon = 1e-9);
        }
        assert_abs_diff_eq!(iface.signed_distance([0.5, 0.0], 0.0), -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(iface.signed_distance([0.1, 0.0], 0.0), 0.2, epsilon = 1e-15);
    }

    #[test]
    fn curvature_matches_finite_difference_laplacian_of_distance() {
        let iface = unit_circle(0.25);
        let params = GeometryParams { delta: 0.05 };
        let x = [0.25 * 0.6, 0.25 * 0.8];
        let nc = iface.normal_and_curvature(&params, x, 0.0).unwrap();
        assert_abs_diff_eq!(nc.curvature, 4.0, epsilon = 1e-14);
        let h = 1e-4;
        let d = |p: Point| iface.signed_distance(p, 0.0);
        let lap = (d([x[0] + h, x[1]]) + d([x[0] - h, x[1]]) + d([x[0], x[1] + h]) + d([x[0], x[1] - h])
            - 4.0 * d(x))
            / (h * h);
        assert_abs_diff_eq!(-lap, nc.curvature, epsilon = 1e-4);
        assert_eq!(nc.velocity, 0.0);
    }

    #[test]
    fn normal_velocity_matches_time_difference_of_distance() {
        let iface = unit_circle(0.25).with_velocity([1.0, 0.0]);
        let params = GeometryParams { delta: 0.05 };
        for x in [[0.25, 0.0], [0.0, 0.25], [-0.2, 0.15]] {
            let nc = iface.normal_and_curvature(&params, x, 0.0).unwrap();
            let dt = 1e-6;
            let fd = -(iface.signed_distance(x, dt) - iface.signed_distance(x, -dt)) / (2.0 * dt);
            assert_abs_diff_eq!(nc.velocity, fd, epsilon = 1e-8);
        }
        // the inward normal at angle 0 opposes the motion
        let nc = iface.normal_and_curvature(&params, [0.25, 0.0], 0.0).unwrap();
        assert_abs_diff_eq!(nc.velocity, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn normal_query_outside_tube_fails() {
        let iface = unit_circle(0.25);
        let params = GeometryParams { delta: 0.02 };
        let err = iface.normal_and_curvature(&params, [0.5, 0.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::OutOfTube { .. }));
    }

    #[test]
    fn xi_examples() {
        let iface = unit_circle(0.25);
        let params = GeometryParams { delta: 0.08 };
        let on = [0.0, 0.25];
        let xi = iface.xi(&params, on, 0.0);
        let n = iface.grad_distance(on, 0.0);
        assert_abs_diff_eq!(xi[0], n[0], epsilon = 1e-15);
        assert_abs_diff_eq!(xi[1], n[1], epsilon = 1e-15);
        assert_eq!(iface.xi(&params, [0.25 + 0.08, 0.0], 0.0), [0.0, 0.0]);
        let half = iface.xi(&params, [0.25 - 0.04, 0.0], 0.0);
        assert_abs_diff_eq!(half[0].hypot(half[1]), 0.5625, epsilon = 1e-14);
        assert_abs_diff_eq!(iface.div_xi(&params, on, 0.0), -4.0, epsilon = 1e-14);
    }

    #[test]
    fn div_xi_closed_form_matches_finite_differences() {
        let iface = unit_circle(0.3);
        let params = GeometryParams { delta: 0.1 };
        let h = 1e-5;
        for x in [[0.27, 0.05], [0.1, -0.33], [-0.21, 0.2]] {
            let xp = iface.xi(&params, [x[0] + h, x[1]], 0.0);
            let xm = iface.xi(&params, [x[0] - h, x[1]], 0.0);
            let yp = iface.xi(&params, [x[0], x[1] + h], 0.0);
            let ym = iface.xi(&params, [x[0], x[1] - h], 0.0);
            let fd = (xp[0] - xm[0] + yp[1] - ym[1]) / (2.0 * h);
            assert_abs_diff_eq!(iface.div_xi(&params, x, 0.0), fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn theta_examples() {
        let delta = 0.1;
        assert_eq!(theta_profile(0.0, delta), 0.0);
        assert_eq!(theta_profile(delta, delta), -delta);
        assert_eq!(theta_profile(3.0 * delta, delta), -delta);
        assert_eq!(theta_profile(-3.0 * delta, delta), delta);
        assert_abs_diff_eq!(theta_profile(0.25 * delta, delta), -0.25 * delta, epsilon = 1e-16);
        // C1 at both blend joints
        for r in [0.5 * delta, delta] {
            let e = 1e-7;
            let left = (theta_profile(r, delta) - theta_profile(r - e, delta)) / e;
            let right = (theta_profile(r + e, delta) - theta_profile(r, delta)) / e;
            assert_abs_diff_eq!(left, right, epsilon = 1e-5);
        }
    }

    #[test]
    fn extended_curvature_examples() {
        let iface = unit_circle(0.25);
        let params = GeometryParams { delta: 0.05 };
        let h = iface.extended_curvature(&params, [0.25, 0.0], 0.0);
        assert_abs_diff_eq!(h[0].hypot(h[1]), 4.0, epsilon = 1e-14);
        assert_eq!(iface.extended_curvature(&params, [0.25 + 0.11, 0.0], 0.0), [0.0, 0.0]);
        assert_eq!(iface.extended_curvature(&params, [0.25 - 0.12, 0.0], 0.0), [0.0, 0.0]);
    }

    #[test]
    fn extended_velocity_of_shear_is_constant_along_normal() {
        let iface = unit_circle(0.25);
        let params = GeometryParams { delta: 0.05 };
        let shear = |p: Point| [p[1], 0.0];
        for s in [-0.09, -0.03, 0.0, 0.05, 0.099] {
            let v = iface.extended_velocity(&params, shear, [0.0, 0.25 + s], 0.0).unwrap();
            assert_abs_diff_eq!(v[0], 0.25, epsilon = 1e-15);
            assert_eq!(v[1], 0.0);
        }
        assert!(iface.extended_velocity(&params, shear, [0.0, 0.4], 0.0).is_err());
        let uniform = iface.extended_velocity(&params, |_| [0.3, -0.7], [0.1, 0.2], 0.0).unwrap();
        assert_eq!(uniform, [0.3, -0.7]);
    }

    #[test]
    fn tubular_integral_oracles() {
        let iface = unit_circle(0.3);
        let params = GeometryParams { delta: 0.05 };
        let w = 0.1;
        let area = iface.tubular_integral(&params, w, Jacobian::Exact, |_, _| 1.0).unwrap();
        assert_abs_diff_eq!(area, 4.0 * PI * 0.3 * w, epsilon = 1e-12);
        let odd = iface.tubular_integral(&params, w, Jacobian::Flat, |r, s| r * (1.0 + s.cos())).unwrap();
        assert_abs_diff_eq!(odd, 0.0, epsilon = 1e-14);
        let sq = iface.tubular_integral(&params, w, Jacobian::Flat, |r, _| r * r).unwrap();
        assert_abs_diff_eq!(sq, 2.0 * PI * 0.3 * (2.0 * w.powi(3) / 3.0), epsilon = 1e-14);
        assert!(iface.tubular_integral(&params, 0.2, Jacobian::Flat, |_, _| 1.0).is_err());
    }

    #[test]
    fn periodic_distance_uses_minimal_image() {
        let g = Grid2D::square(32, 1.0, crate::fields::BoundaryMode::Periodic).unwrap();
        let iface = AnalyticInterface::circle([0.9, 0.5], 0.2).unwrap().on_grid(&g);
        assert_abs_diff_eq!(iface.signed_distance([0.05, 0.5], 0.0), 0.05, epsilon = 1e-14);
        let moved = iface.with_velocity([1.0, 0.0]);
        assert_abs_diff_eq!(moved.center_at(0.3)[0], 0.2, epsilon = 1e-14);
    }

    #[test]
    fn validation_enforces_wall_margin() {
        let g = Grid2D::square(64, 1.0, crate::fields::BoundaryMode::DirichletWall).unwrap();
        let iface = AnalyticInterface::circle([0.5, 0.5], 0.25).unwrap();
        assert!(iface.validate(&GeometryParams { delta: 0.075 }, &g, 0.1).is_ok());
        // the default tube is too wide for this radius
        assert!(matches!(iface.validate(&GeometryParams::default_for(&g), &g, 0.1), Err(Error::Config(_))));
        let drifting = iface.with_velocity([-1.0, 0.0]);
        let err = drifting.validate(&GeometryParams { delta: 0.075 }, &g, 0.1).unwrap_err();
        assert!(matches!(err, Error::MarginViolation { .. }));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_abs_diff_eq!(s, 2.0 / 15.0, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn phi_satisfies_sandwich_and_shape(x in -1.0f64..1.0) {
            let p = phi(x);
            prop_assert_eq!(p, phi(-x));
            prop_assert!(p > 0.0);
            if x.abs() <= 0.5 {
                prop_assert!(1.0 - 4.0 * x * x <= p + 1e-15);
                prop_assert!(p <= 1.0 - 0.5 * x * x + 1e-15);
            }
            prop_assert!(phi_prime(x.abs()) <= 0.0);
        }

        #[test]
        fn theta_is_odd_bounded_and_lipschitz(r in -0.5f64..0.5, s in -0.5f64..0.5) {
            let delta = 0.1;
            prop_assert_eq!(theta_profile(r, delta), -theta_profile(-r, delta));
            prop_assert!(theta_profile(r, delta).abs() <= delta);
            let lip = (theta_profile(r, delta) - theta_profile(s, delta)).abs();
            prop_assert!(lip <= 4.0 / 3.0 * (r - s).abs() + 1e-15);
            if r.abs() > 1e-12 {
                prop_assert!(theta_profile(r, delta) * r < 0.0);
            }
        }

        #[test]
        fn xi_norm_equals_phi_of_scaled_distance(x in -0.6f64..0.6, y in -0.6f64..0.6) {
            let iface = AnalyticInterface::circle([0.0, 0.0], 0.3).unwrap();
            let params = GeometryParams { delta: 0.08 };
            let xi = iface.xi(&params, [x, y], 0.0);
            let d = iface.signed_distance([x, y], 0.0);
            prop_assert!((xi[0].hypot(xi[1]) - phi(d / params.delta)).abs() < 1e-14);
        }
    }
}
