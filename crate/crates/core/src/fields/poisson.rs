//! Pressure-type Poisson problems for the compact Laplacian.
//!
//! Periodic grids are inverted exactly in Fourier space. Walled grids carry
//! homogeneous Neumann conditions and are solved by conjugate gradients on
//! the mean-free subspace.

use super::spectral::Spectral;
use super::{laplacian, BoundaryMode, FieldBc, ScalarField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct PoissonOptions {
    /// Relative residual target `||L p - rhs|| / ||rhs||`.
    pub tol: f64,
    /// Iteration cap for the wall-mode iteration; `None` picks `20 (nx + ny)`.
    pub max_iter: Option<usize>,
}

impl Default for PoissonOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: None }
    }
}

#[derive(Clone, Debug)]
pub struct PoissonSolution {
    pub p: ScalarField,
    pub iterations: usize,
    pub residual: f64,
}

pub fn poisson_solve(rhs: &ScalarField) -> Result<ScalarField> {
    poisson_solve_with(rhs, PoissonOptions::default()).map(|s| s.p)
}

pub fn poisson_solve_with(rhs: &ScalarField, opts: PoissonOptions) -> Result<PoissonSolution> {
    let grid = *rhs.grid();
    let mut b = rhs.clone();
    let mean = b.mean();
    if mean.abs() > 1e-12 * (1.0 + b.max_abs()) {
        log::debug!("poisson_solve: removing incompatible rhs mean {mean:.3e}");
    }
    b.remove_mean();
    let bnorm = norm(&b.data);
    if bnorm == 0.0 {
        return Ok(PoissonSolution { p: ScalarField::zeros(grid), iterations: 0, residual: 0.0 });
    }

    let (p, iterations) = match grid.bc {
        BoundaryMode::Periodic => {
            let mut data = b.data.clone();
            Spectral::new(grid).solve_compact_poisson(&mut data);
            (ScalarField::from_vec(grid, data)?, 1)
        }
        BoundaryMode::DirichletWall => {
            let max_iter = opts.max_iter.unwrap_or(20 * (grid.nx + grid.ny));
            conjugate_gradient(&b, opts.tol, max_iter)?
        }
    };

    let lap = laplacian(&p, FieldBc::Neumann);
    let res: Vec<f64> = lap.data.iter().zip(&b.data).map(|(l, r)| l - r).collect();
    let residual = norm(&res) / bnorm;
    log::trace!("poisson_solve: {iterations} iterations, relative residual {residual:.3e}");
    if residual > opts.tol {
        return Err(Error::SolverFailure { iterations, residual });
    }
    Ok(PoissonSolution { p, iterations, residual })
}

/// CG on `-L p = -b` (symmetric positive semi-definite, `b` mean-free).
fn conjugate_gradient(b: &ScalarField, tol: f64, max_iter: usize) -> Result<(ScalarField, usize)> {
    let grid = *b.grid();
    let apply = |x: &ScalarField| {
        let mut y = laplacian(x, FieldBc::Neumann);
        y.data.iter_mut().for_each(|v| *v = -*v);
        y
    };
    let target: Vec<f64> = b.data.iter().map(|v| -v).collect();
    let bnorm = norm(&target);
    let mut x = ScalarField::zeros(grid);
    let mut r = target.clone();
    let mut d = ScalarField::from_vec(grid, r.clone())?;
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        let ad = apply(&d);
        let alpha = rr / dot(&d.data, &ad.data);
        for (k, rk) in r.iter_mut().enumerate() {
            x.data[k] += alpha * d.data[k];
            *rk -= alpha * ad.data[k];
        }
        let rr_new = dot(&r, &r);
        // a little headroom below tol so the true residual check passes
        if rr_new.sqrt() <= 0.1 * tol * bnorm {
            x.remove_mean();
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        for (dk, rk) in d.data.iter_mut().zip(&r) {
            *dk = rk + beta * *dk;
        }
        rr = rr_new;
    }
    Err(Error::SolverFailure { iterations: max_iter, residual: rr.sqrt() / bnorm })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fields::Grid2D;

    #[test]
    fn zero_rhs_gives_zero_pressure() {
        for mode in [BoundaryMode::Periodic, BoundaryMode::DirichletWall] {
            let g = Grid2D::square(16, 1.0, mode).unwrap();
            let p = poisson_solve(&ScalarField::zeros(g)).unwrap();
            assert_eq!(p.max_abs(), 0.0);
        }
    }

    #[test]
    fn single_fourier_mode_is_divided_by_its_discrete_symbol() {
        let n = 32;
        let g = Grid2D::square(n, 1.0, BoundaryMode::Periodic).unwrap();
        let h = g.h();
        let (kx, ky) = (3.0, 5.0);
        let rhs = ScalarField::from_fn(g, |x| (2.0 * PI * (kx * x[0] + ky * x[1])).cos());
        let symbol = (2.0 * (2.0 * PI * kx * h).cos() - 2.0 + 2.0 * (2.0 * PI * ky * h).cos() - 2.0) / (h * h);
        let p = poisson_solve(&rhs).unwrap();
        for (a, b) in p.data.iter().zip(&rhs.data) {
            assert!((a - b / symbol).abs() < 1e-13);
        }
    }

    fn manufactured_error(n: usize) -> f64 {
        let g = Grid2D::square(n, 1.0, BoundaryMode::DirichletWall).unwrap();
        // Neumann-compatible exact solution
        let exact = |x: [f64; 2]| (PI * x[0]).cos() * (2.0 * PI * x[1]).cos();
        let rhs = ScalarField::from_fn(g, |x| -5.0 * PI * PI * exact(x));
        let p = poisson_solve(&rhs).unwrap();
        let mut e = ScalarField::from_fn(g, exact);
        e.remove_mean();
        p.data.iter().zip(&e.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn wall_mode_recovers_manufactured_solution_at_second_order() {
        let (e1, e2) = (manufactured_error(32), manufactured_error(64));
        assert!(e1 < 5e-3, "{e1}");
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn iteration_cap_reports_failure_with_residual() {
        let g = Grid2D::square(32, 1.0, BoundaryMode::DirichletWall).unwrap();
        let rhs = ScalarField::from_fn(g, |x| (7.3 * x[0] * x[1]).sin() + (x[0] - 0.3).abs());
        let err = poisson_solve_with(&rhs, PoissonOptions { tol: 1e-10, max_iter: Some(3) }).unwrap_err();
        match err {
            Error::SolverFailure { iterations, residual } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-10);
            }
            other => panic!("unexpected {other}"),
        }
    }
}
