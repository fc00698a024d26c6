use super::{BoundaryMode, FieldBc, Grid2D, ScalarField, VectorBc, VectorField};
use crate::error::Result;

pub(crate) const GHOSTS: usize = 2;

/// Copy of a field surrounded by two layers of ghost cells.
pub(crate) struct Padded {
    stride: usize,
    data: Vec<f64>,
}

impl Padded {
    pub(crate) fn new(values: &[f64], grid: &Grid2D, bc: FieldBc) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let stride = nx + 2 * GHOSTS;
        let mut data = vec![0.0; stride * (ny + 2 * GHOSTS)];
        for j in 0..ny {
            let row = (j + GHOSTS) * stride + GHOSTS;
            data[row..row + nx].copy_from_slice(&values[j * nx..(j + 1) * nx]);
        }
        let mut p = Self { stride, data };
        let periodic = grid.bc == BoundaryMode::Periodic;
        // x-ghosts on interior rows
        for j in 0..ny as isize {
            for k in 0..GHOSTS as isize {
                let (lo, hi) = if periodic {
                    (p.at(nx as isize - 1 - k, j), p.at(k, j))
                } else {
                    (reflect(bc, p.at(k, j)), reflect(bc, p.at(nx as isize - 1 - k, j)))
                };
                p.set(-1 - k, j, lo);
                p.set(nx as isize + k, j, hi);
            }
        }
        // y-ghosts over the full padded width
        for i in -(GHOSTS as isize)..(nx + GHOSTS) as isize {
            for k in 0..GHOSTS as isize {
                let (lo, hi) = if periodic {
                    (p.at(i, ny as isize - 1 - k), p.at(i, k))
                } else {
                    (reflect(bc, p.at(i, k)), reflect(bc, p.at(i, ny as isize - 1 - k)))
                };
                p.set(i, -1 - k, lo);
                p.set(i, ny as isize + k, hi);
            }
        }
        p
    }

    #[inline(always)]
    pub(crate) fn at(&self, i: isize, j: isize) -> f64 {
        self.data[(j + GHOSTS as isize) as usize * self.stride + (i + GHOSTS as isize) as usize]
    }

    /// Padded row `j`; cell `i` sits at index `i + GHOSTS`.
    #[inline(always)]
    pub(crate) fn row(&self, j: isize) -> &[f64] {
        let start = (j + GHOSTS as isize) as usize * self.stride;
        &self.data[start..start + self.stride]
    }

    #[inline(always)]
    fn set(&mut self, i: isize, j: isize, v: f64) {
        self.data[(j + GHOSTS as isize) as usize * self.stride + (i + GHOSTS as isize) as usize] = v;
    }
}

#[inline]
fn reflect(bc: FieldBc, inner: f64) -> f64 {
    match bc {
        FieldBc::Dirichlet(b) => 2.0 * b - inner,
        FieldBc::Neumann => inner,
    }
}

/// Calls `f(j, out_row)` for every grid row.
fn for_each_row(grid: &Grid2D, out: &mut [f64], mut f: impl FnMut(isize, &mut [f64])) {
    for (j, row) in out.chunks_exact_mut(grid.nx).enumerate() {
        f(j as isize, row);
    }
}

const G: usize = GHOSTS;

/// Central-difference gradient.
pub fn grad(f: &ScalarField, bc: FieldBc) -> VectorField {
    let grid = *f.grid();
    let p = Padded::new(&f.data, &grid, bc);
    let inv = 0.5 / grid.h();
    let mut out = VectorField::zeros(grid);
    for_each_row(&grid, &mut out.x, |j, o| {
        let c = p.row(j);
        for (i, v) in o.iter_mut().enumerate() {
            *v = (c[i + G + 1] - c[i + G - 1]) * inv;
        }
    });
    for_each_row(&grid, &mut out.y, |j, o| {
        let (n, s) = (p.row(j + 1), p.row(j - 1));
        for (i, v) in o.iter_mut().enumerate() {
            *v = (n[i + G] - s[i + G]) * inv;
        }
    });
    out
}

/// Central-difference divergence.
pub fn div(u: &VectorField, bc: VectorBc) -> ScalarField {
    let grid = *u.grid();
    let px = Padded::new(&u.x, &grid, bc.x);
    let py = Padded::new(&u.y, &grid, bc.y);
    let inv = 0.5 / grid.h();
    let mut out = ScalarField::zeros(grid);
    for_each_row(&grid, &mut out.data, |j, o| {
        let (c, n, s) = (px.row(j), py.row(j + 1), py.row(j - 1));
        for (i, v) in o.iter_mut().enumerate() {
            *v = (c[i + G + 1] - c[i + G - 1] + n[i + G] - s[i + G]) * inv;
        }
    });
    out
}

/// Compact five-point Laplacian.
pub fn laplacian(f: &ScalarField, bc: FieldBc) -> ScalarField {
    let grid = *f.grid();
    let p = Padded::new(&f.data, &grid, bc);
    let inv = 1.0 / grid.cell_area();
    let mut out = ScalarField::zeros(grid);
    for_each_row(&grid, &mut out.data, |j, o| {
        let (c, n, s) = (p.row(j), p.row(j + 1), p.row(j - 1));
        for (i, v) in o.iter_mut().enumerate() {
            let k = i + G;
            *v = (c[k + 1] + c[k - 1] + n[k] + s[k] - 4.0 * c[k]) * inv;
        }
    });
    out
}

/// Wide (2h) Laplacian, the composition `div(grad f)` of the central operators.
pub fn laplacian_wide(f: &ScalarField, bc: FieldBc) -> ScalarField {
    let grid = *f.grid();
    let p = Padded::new(&f.data, &grid, bc);
    let inv = 0.25 / grid.cell_area();
    let mut out = ScalarField::zeros(grid);
    for_each_row(&grid, &mut out.data, |j, o| {
        let (c, n, s) = (p.row(j), p.row(j + 2), p.row(j - 2));
        for (i, v) in o.iter_mut().enumerate() {
            let k = i + G;
            *v = (c[k + 2] + c[k - 2] + n[k] + s[k] - 4.0 * c[k]) * inv;
        }
    });
    out
}

/// First-order upwind approximation of `u . grad f`.
pub fn advect_upwind(f: &ScalarField, u: &VectorField, bc: FieldBc) -> Result<ScalarField> {
    let grid = *f.grid();
    grid.same_as(u.grid())?;
    let p = Padded::new(&f.data, &grid, bc);
    let inv = 1.0 / grid.h();
    let mut out = ScalarField::zeros(grid);
    let nx = grid.nx;
    for_each_row(&grid, &mut out.data, |j, o| {
        let (r, n, s) = (p.row(j), p.row(j + 1), p.row(j - 1));
        let base = j as usize * nx;
        let (ux, uy) = (&u.x[base..base + nx], &u.y[base..base + nx]);
        for (i, v) in o.iter_mut().enumerate() {
            let k = i + G;
            let c = r[k];
            let dx = if ux[i] > 0.0 { c - r[k - 1] } else { r[k + 1] - c };
            let dy = if uy[i] > 0.0 { c - s[k] } else { n[k] - c };
            *v = (ux[i] * dx + uy[i] * dy) * inv;
        }
    });
    Ok(out)
}

/// Central-difference convective term `(u . grad) u`.
pub fn convect(u: &VectorField, bc: VectorBc) -> VectorField {
    let grid = *u.grid();
    let px = Padded::new(&u.x, &grid, bc.x);
    let py = Padded::new(&u.y, &grid, bc.y);
    let inv = 0.5 / grid.h();
    let nx = grid.nx;
    let mut out = VectorField::zeros(grid);
    for (pc, o) in [(&px, &mut out.x), (&py, &mut out.y)] {
        for_each_row(&grid, o, |j, o| {
            let (r, n, s) = (pc.row(j), pc.row(j + 1), pc.row(j - 1));
            let base = j as usize * nx;
            let (a, b) = (&u.x[base..base + nx], &u.y[base..base + nx]);
            for (i, v) in o.iter_mut().enumerate() {
                let k = i + G;
                *v = (a[i] * (r[k + 1] - r[k - 1]) + b[i] * (n[k] - s[k])) * inv;
            }
        });
    }
    out
}

/// Momentum forcing `-eps div(grad c (x) grad c - |grad c|^2 I / 2)`, evaluated
/// through the identity form `-eps (lap c) grad c`.
pub fn capillary_force(c: &ScalarField, eps: f64, bc: FieldBc) -> VectorField {
    let lap = laplacian(c, bc);
    let mut g = grad(c, bc);
    for k in 0..lap.data.len() {
        let s = -eps * lap.data[k];
        g.x[k] *= s;
        g.y[k] *= s;
    }
    g
}

/// Sum over cell edges of squared forward differences, `sum |D+ f|^2 h^2`.
///
/// Wall edges (cell to ghost) carry weight 1/2 so that the derivative of
/// half this sum with respect to `f` is exactly `-h^2 laplacian(f)`.
pub fn edge_gradient_sq(f: &ScalarField, bc: FieldBc) -> f64 {
    let grid = *f.grid();
    let p = Padded::new(&f.data, &grid, bc);
    let periodic = grid.is_periodic();
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let lo = if periodic { 0 } else { -1 };
    let weight = |e: isize, n: isize| if !periodic && (e < 0 || e == n - 1) { 0.5 } else { 1.0 };
    let mut sum = 0.0;
    // edge e joins cells e and e + 1
    for j in 0..ny {
        for i in lo..nx {
            let d = p.at(i + 1, j) - p.at(i, j);
            sum += weight(i, nx) * d * d;
        }
    }
    for j in lo..ny {
        for i in 0..nx {
            let d = p.at(i, j + 1) - p.at(i, j);
            sum += weight(j, ny) * d * d;
        }
    }
    sum
}

/// Discrete Dirichlet energy `1/2 sum |D+ f|^2 h^2`.
pub fn gradient_energy(f: &ScalarField, bc: FieldBc) -> f64 {
    0.5 * edge_gradient_sq(f, bc)
}

/// `(int |grad u|^2)^{1/2}` from forward differences, summed over components.
pub fn h1_seminorm(u: &VectorField, bc: VectorBc) -> f64 {
    (edge_gradient_sq(&u.component_x(), bc.x) + edge_gradient_sq(&u.component_y(), bc.y)).sqrt()
}

pub fn integral(f: &ScalarField) -> f64 {
    f.data.iter().sum::<f64>() * f.grid().cell_area()
}

pub fn l1(f: &ScalarField) -> f64 {
    f.data.iter().map(|v| v.abs()).sum::<f64>() * f.grid().cell_area()
}

pub fn l2(f: &ScalarField) -> f64 {
    (f.data.iter().map(|v| v * v).sum::<f64>() * f.grid().cell_area()).sqrt()
}

pub fn l2_vector(u: &VectorField) -> f64 {
    (u.x.iter().chain(&u.y).map(|v| v * v).sum::<f64>() * u.grid().cell_area()).sqrt()
}

pub fn inner(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    f.grid().same_as(g.grid())?;
    Ok(f.data.iter().zip(&g.data).map(|(a, b)| a * b).sum::<f64>() * f.grid().cell_area())
}

pub fn inner_vector(u: &VectorField, w: &VectorField) -> Result<f64> {
    u.grid().same_as(w.grid())?;
    let s: f64 = u.x.iter().zip(&w.x).map(|(a, b)| a * b).sum::<f64>()
        + u.y.iter().zip(&w.y).map(|(a, b)| a * b).sum::<f64>();
    Ok(s * u.grid().cell_area())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::fields::BoundaryMode::{DirichletWall, Periodic};

    fn periodic(n: usize) -> Grid2D {
        Grid2D::square(n, 1.0, Periodic).unwrap()
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        for bc in [Periodic, DirichletWall] {
            let g = Grid2D::square(32, 1.0, bc).unwrap();
            let f = ScalarField::constant(g, 3.5);
            let gr = grad(&f, FieldBc::Dirichlet(3.5));
            assert!(gr.max_magnitude() < 1e-12);
            assert!(grad(&f, FieldBc::Neumann).max_magnitude() < 1e-12);
        }
    }

    fn sine_laplacian_error(n: usize) -> f64 {
        let g = periodic(n);
        let k = 2.0 * PI;
        let f = ScalarField::from_fn(g, |x| (k * x[0]).sin());
        let lap = laplacian(&f, FieldBc::Neumann);
        lap.data.iter().zip(&f.data).map(|(l, v)| (l + k * k * v).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_of_periodic_eigenfunction_is_second_order() {
        let (e1, e2) = (sine_laplacian_error(32), sine_laplacian_error(64));
        assert!(e1 < 0.1 * (2.0 * PI).powi(2), "{e1}");
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn rotational_field_is_discretely_solenoidal() {
        let g = periodic(64);
        let psi = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos());
        let gp = grad(&psi, FieldBc::Neumann);
        // u = (d psi/dy, -d psi/dx) built from the same central stencils
        let u = VectorField::from_components(gp.component_y(), gp.component_x().map(|v| -v)).unwrap();
        assert!(div(&u, VectorBc::NO_SLIP).max_abs() < 1e-10);
    }

    #[test]
    fn div_grad_equals_wide_laplacian_on_periodic_grid() {
        let g = periodic(32);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos() * (x[1] * 6.0).sin().exp());
        let a = div(&grad(&f, FieldBc::Neumann), VectorBc::NO_SLIP);
        let b = laplacian_wide(&f, FieldBc::Neumann);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn div_grad_equals_wide_laplacian_for_neumann_walls() {
        let g = Grid2D::square(24, 1.0, DirichletWall).unwrap();
        let f = ScalarField::from_fn(g, |x| x[0] * x[0] * (1.0 + x[1]).ln() + x[1]);
        let gr = grad(&f, FieldBc::Neumann);
        let a = div(&gr, VectorBc::NO_SLIP);
        let b = laplacian_wide(&f, FieldBc::Neumann);
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn summation_by_parts_holds_on_periodic_grid() {
        let g = periodic(32);
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).cos().powi(3));
        let u = VectorField::from_fn(g, |x| [(2.0 * PI * (x[0] + x[1])).cos(), (6.0 * PI * x[0]).sin()]);
        let lhs = inner_vector(&grad(&f, FieldBc::Neumann), &u).unwrap();
        let rhs = inner(&f, &div(&u, VectorBc::NO_SLIP)).unwrap();
        assert!((lhs + rhs).abs() < 1e-12, "{lhs} {rhs}");
    }

    #[test]
    fn gradient_energy_derivative_is_minus_laplacian() {
        for mode in [Periodic, DirichletWall] {
            let g = Grid2D::square(16, 1.0, mode).unwrap();
            let bc = FieldBc::Dirichlet(-1.0);
            let f = ScalarField::from_fn(g, |x| (3.0 * x[0]).sin() * x[1] - 0.7);
            let lap = laplacian(&f, bc);
            let k = g.idx(0, 5);
            let step = 1e-6;
            let mut fp = f.clone();
            fp.data[k] += step;
            let mut fm = f.clone();
            fm.data[k] -= step;
            let fd = (gradient_energy(&fp, bc) - gradient_energy(&fm, bc)) / (2.0 * step);
            let expected = -lap.data[k] * g.cell_area();
            assert!((fd - expected).abs() < 1e-6 * (1.0 + expected.abs()), "{mode:?} {fd} {expected}");
        }
    }

    #[test]
    fn capillary_force_of_constant_field_vanishes() {
        let g = Grid2D::square(32, 1.0, DirichletWall).unwrap();
        let c = ScalarField::constant(g, -1.0);
        assert_eq!(capillary_force(&c, 0.05, FieldBc::Dirichlet(-1.0)).max_magnitude(), 0.0);
    }

    #[test]
    fn capillary_force_of_radial_field_is_radial() {
        let g = Grid2D::square(128, 1.0, Periodic).unwrap();
        let eps = 0.04;
        let c = ScalarField::from_fn(g, |x| {
            let r = (x[0] - 0.5).hypot(x[1] - 0.5);
            ((0.25 - r) / (2.0 * eps)).tanh()
        });
        let f = capillary_force(&c, eps, FieldBc::Neumann);
        let (mut ang, mut rad) = (0.0f64, 0.0f64);
        for (i, j, x) in g.cells() {
            let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
            let r = dx.hypot(dy);
            if r < 1e-9 {
                continue;
            }
            let v = f.get(i, j);
            rad = rad.max(((v[0] * dx + v[1] * dy) / r).abs());
            ang = ang.max(((v[1] * dx - v[0] * dy) / r).abs());
        }
        // angular part is a grid-orientation artefact of relative size O(h^2 / eps^2)
        assert!(ang < 0.05 * rad, "angular {ang} radial {rad}");
    }

    #[test]
    fn norms_of_unit_and_half_indicator() {
        let g = Grid2D::square(40, 1.0, DirichletWall).unwrap();
        let one = ScalarField::constant(g, 1.0);
        assert!((l1(&one) - 1.0).abs() < 1e-12);
        assert!((l2(&one) - 1.0).abs() < 1e-12);
        let half = ScalarField::from_fn(g, |x| if x[0] < 0.5 { 1.0 } else { 0.0 });
        assert!((l1(&half) - 0.5).abs() <= g.h());
    }

    #[test]
    fn h1_seminorm_matches_manufactured_value() {
        // u = (sin 2 pi x, 0) periodic: int |grad u|^2 = (2 pi)^2 / 2
        let exact = 2.0 * PI * PI;
        let err = |n| {
            let g = periodic(n);
            let u = VectorField::from_fn(g, |x| [(2.0 * PI * x[0]).sin(), 0.0]);
            (h1_seminorm(&u, VectorBc::NO_SLIP).powi(2) - exact).abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 < 1e-2 * exact);
        assert!(e1 / e2 > 3.5);
    }
}
