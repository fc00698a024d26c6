//! Analytic strong solutions of the sharp-interface two-phase model.

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField, VectorField};
use crate::geometry::{AnalyticInterface, GeometryParams};
use crate::potential::DensityPair;

#[derive(Clone, Debug)]
pub struct SharpState {
    pub t: f64,
    pub interface: AnalyticInterface,
    pub chi: ScalarField,
    pub rho: ScalarField,
    pub v: VectorField,
    pub p: ScalarField,
    /// `p_inside - p_outside`.
    pub pressure_jump: f64,
}

/// Young-Laplace jump `p_in - p_out = sigma / R`: the bubble interior
/// carries the higher pressure.
pub fn laplace_jump(surface_tension: f64, radius: f64) -> f64 {
    surface_tension / radius
}

/// Bubble indicator. Cells cut by the interface get their area fraction,
/// estimated on a 16x16 sub-grid.
pub fn chi_field(iface: &AnalyticInterface, grid: &Grid2D, t: f64) -> ScalarField {
    let iface = iface.on_grid(grid);
    let h = grid.h();
    let reach = 0.5 * std::f64::consts::SQRT_2 * h * (1.0 + 1e-12);
    const SUB: usize = 16;
    ScalarField::from_fn(*grid, |x| {
        let d = iface.signed_distance(x, t);
        if d > reach {
            1.0
        } else if d < -reach {
            0.0
        } else {
            let mut inside = 0usize;
            for a in 0..SUB {
                for b in 0..SUB {
                    let p = [
                        x[0] + ((a as f64 + 0.5) / SUB as f64 - 0.5) * h,
                        x[1] + ((b as f64 + 0.5) / SUB as f64 - 0.5) * h,
                    ];
                    if iface.signed_distance(p, t) > 0.0 {
                        inside += 1;
                    }
                }
            }
            inside as f64 / (SUB * SUB) as f64
        }
    })
}

fn assemble(
    iface: &AnalyticInterface,
    grid: &Grid2D,
    densities: DensityPair,
    surface_tension: f64,
    t: f64,
    velocity: [f64; 2],
) -> SharpState {
    let chi = chi_field(iface, grid, t);
    let rho = chi.map(|x| densities.rho_minus + (densities.rho_plus - densities.rho_minus) * x);
    let jump = laplace_jump(surface_tension, iface.radius());
    let mut p = chi.map(|x| jump * x);
    p.remove_mean();
    let v = VectorField::from_fn(*grid, |_| velocity);
    SharpState { t, interface: iface.on_grid(grid), chi, rho, v, p, pressure_jump: jump }
}

/// Bubble at rest: `v = 0`, piecewise constant density and pressure.
pub fn static_bubble(
    iface: &AnalyticInterface,
    params: &GeometryParams,
    grid: &Grid2D,
    densities: DensityPair,
    surface_tension: f64,
) -> Result<SharpState> {
    densities.validate()?;
    let iface = iface.with_velocity([0.0, 0.0]);
    iface.validate(params, grid, 0.0)?;
    Ok(assemble(&iface, grid, densities, surface_tension, 0.0, [0.0, 0.0]))
}

/// Bubble carried by the uniform flow `iface.velocity` on a periodic domain.
pub fn transported_bubble(
    iface: &AnalyticInterface,
    params: &GeometryParams,
    grid: &Grid2D,
    densities: DensityPair,
    surface_tension: f64,
    t: f64,
) -> Result<SharpState> {
    if !grid.is_periodic() {
        return Err(Error::UnsupportedScenario(
            "the transported bubble needs a periodic domain; walls would stop the uniform flow".into(),
        ));
    }
    densities.validate()?;
    iface.validate(params, grid, t)?;
    Ok(assemble(iface, grid, densities, surface_tension, t, iface.velocity))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::fields::{div, integral, BoundaryMode, VectorBc};

    fn walled(n: usize) -> Grid2D {
        Grid2D::square(n, 1.0, BoundaryMode::DirichletWall).unwrap()
    }

    fn periodic(n: usize) -> Grid2D {
        Grid2D::square(n, 1.0, BoundaryMode::Periodic).unwrap()
    }

    #[test]
    fn laplace_jump_examples() {
        assert_abs_diff_eq!(laplace_jump(2.0 / 3.0, 0.25), 8.0 / 3.0, epsilon = 1e-15);
        assert!(laplace_jump(2.0 / 3.0, 1e3) <= 1e-3);
    }

    #[test]
    fn static_bubble_fields() {
        let g = walled(64);
        let iface = AnalyticInterface::circle([0.5, 0.5], 0.25).unwrap();
        let pair = DensityPair::new(2.0, 1.0).unwrap();
        let s = static_bubble(&iface, &GeometryParams { delta: 0.075 }, &g, pair, 2.0 / 3.0).unwrap();
        assert_eq!(s.v.max_magnitude(), 0.0);
        assert_abs_diff_eq!(s.pressure_jump, 8.0 / 3.0, epsilon = 1e-15);
        let centre = g.idx(32, 32);
        let corner = g.idx(0, 0);
        assert_abs_diff_eq!(s.p.data[centre] - s.p.data[corner], 8.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p.mean(), 0.0, epsilon = 1e-14);
        assert_eq!(s.rho.data[centre], 2.0);
        assert_eq!(s.rho.data[corner], 1.0);
        assert_eq!(div(&s.v, VectorBc::NO_SLIP).max_abs(), 0.0);
    }

    #[test]
    fn static_bubble_checks_margin() {
        let g = walled(64);
        let iface = AnalyticInterface::circle([0.3, 0.5], 0.25).unwrap();
        assert!(static_bubble(&iface, &GeometryParams { delta: 0.075 }, &g, DensityPair::UNIT, 1.0).is_err());
    }

    #[test]
    fn chi_area_matches_disc() {
        for n in [64, 128] {
            let g = walled(n);
            let iface = AnalyticInterface::circle([0.47, 0.52], 0.3).unwrap();
            let chi = chi_field(&iface, &g, 0.0);
            let area = integral(&chi);
            let h = g.h();
            assert!((area - PI * 0.09).abs() <= 2.0 * h * 2.0 * PI * 0.3);
            // sub-cell fractions make the error far smaller than the band bound
            assert!((area - PI * 0.09).abs() <= 1e-3 * h);
            assert_eq!(chi.get(n / 2, n / 2), 1.0);
            assert_eq!(chi.get(0, 0), 0.0);
        }
    }

    #[test]
    fn transported_bubble_requires_periodic_domain() {
        let iface = AnalyticInterface::circle([0.5, 0.5], 0.25).unwrap().with_velocity([1.0, 0.0]);
        let err = transported_bubble(&iface, &GeometryParams { delta: 0.05 }, &walled(32), DensityPair::UNIT, 1.0, 0.1)
            .unwrap_err();
        assert!(matches!(err, Error::UnsupportedScenario(_)));
    }

    #[test]
    fn transported_bubble_with_zero_velocity_is_static() {
        let g = periodic(64);
        let params = GeometryParams { delta: 0.05 };
        let iface = AnalyticInterface::circle([0.5, 0.5], 0.2).unwrap();
        let moving = transported_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0, 0.7).unwrap();
        let resting = static_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0).unwrap();
        assert_eq!(moving.chi, resting.chi);
        assert_eq!(moving.p, resting.p);
    }

    #[test]
    fn transported_bubble_is_periodic_in_time() {
        let g = periodic(64);
        let params = GeometryParams { delta: 0.05 };
        let iface = AnalyticInterface::circle([0.3, 0.6], 0.2).unwrap().with_velocity([1.0, 0.0]);
        let start = transported_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0, 0.0).unwrap();
        let lap = transported_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0, 1.0).unwrap();
        assert_eq!(start.chi, lap.chi);
        assert_eq!(lap.v.get(3, 5), [1.0, 0.0]);
    }

    #[test]
    fn transported_bubble_commutes_with_time_shift() {
        let g = periodic(64);
        let params = GeometryParams { delta: 0.05 };
        let iface = AnalyticInterface::circle([0.3, 0.6], 0.2).unwrap().with_velocity([0.5, -0.25]);
        let direct = transported_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0, 0.75).unwrap();
        let mut shifted = iface;
        shifted.circle.center = iface.on_grid(&g).center_at(0.5);
        let composed = transported_bubble(&shifted, &params, &g, DensityPair::UNIT, 1.0, 0.25).unwrap();
        for (a, b) in direct.chi.data.iter().zip(&composed.chi.data) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn centroid_tracks_transported_centre() {
        let g = periodic(128);
        let params = GeometryParams { delta: 0.05 };
        let iface = AnalyticInterface::circle([0.3, 0.6], 0.2).unwrap().with_velocity([1.0, 0.5]);
        for t in [0.0, 0.37, 0.81] {
            let s = transported_bubble(&iface, &params, &g, DensityPair::UNIT, 1.0, t).unwrap();
            let c = s.interface.center_at(t);
            let (mut m, mut mx, mut my) = (0.0, 0.0, 0.0);
            for (i, j, x) in g.cells() {
                let w = s.chi.get(i, j);
                let dx = [x[0] - c[0] - (x[0] - c[0]).round(), x[1] - c[1] - (x[1] - c[1]).round()];
                m += w;
                mx += w * dx[0];
                my += w * dx[1];
            }
            assert!((mx / m).hypot(my / m) <= g.h());
        }
    }
}
