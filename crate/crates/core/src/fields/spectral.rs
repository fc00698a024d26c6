//! Fast diagonal solvers for the constant-coefficient operators.
//!
//! On periodic grids every stencil is diagonal in the Fourier basis. On walled
//! grids the odd (Dirichlet) and even (Neumann) ghost reflections make the
//! compact Laplacian diagonal in the DST-II / DCT-II bases, and the wide
//! `div(grad .)` operator diagonal in DCT-II.

use std::f64::consts::PI;
use std::sync::Arc;

use rustdct::{DctPlanner, TransformType2And3};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{BoundaryMode, Grid2D};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Basis {
    /// DST-II, homogeneous Dirichlet by odd reflection.
    Sine,
    /// DCT-II, homogeneous Neumann by even reflection.
    Cosine,
}

enum Plans {
    Periodic {
        fwd_x: Arc<dyn Fft<f64>>,
        inv_x: Arc<dyn Fft<f64>>,
        fwd_y: Arc<dyn Fft<f64>>,
        inv_y: Arc<dyn Fft<f64>>,
    },
    Wall {
        x: Arc<dyn TransformType2And3<f64>>,
        y: Arc<dyn TransformType2And3<f64>>,
    },
}

pub struct Spectral {
    grid: Grid2D,
    plans: Plans,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl Spectral {
    pub fn new(grid: Grid2D) -> Self {
        let plans = match grid.bc {
            BoundaryMode::Periodic => {
                let mut p = FftPlanner::new();
                Plans::Periodic {
                    fwd_x: p.plan_fft_forward(grid.nx),
                    inv_x: p.plan_fft_inverse(grid.nx),
                    fwd_y: p.plan_fft_forward(grid.ny),
                    inv_y: p.plan_fft_inverse(grid.ny),
                }
            }
            BoundaryMode::DirichletWall => {
                let mut p = DctPlanner::new();
                // one type-2/3 plan serves DCT2, DCT3, DST2 and DST3
                Plans::Wall { x: p.plan_dct2(grid.nx), y: p.plan_dct2(grid.ny) }
            }
        };
        Self { grid, plans }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Solve `(I - alpha L) u = rhs` in place, `L` the compact Laplacian with
    /// homogeneous Dirichlet walls (or periodic).
    pub fn solve_screened(&self, rhs: &mut [f64], alpha: f64) {
        let h2 = self.grid.cell_area();
        let compact = |w: f64| (2.0 * w.cos() - 2.0) / h2;
        self.apply(rhs, Basis::Sine, compact, |a, b| 1.0 / (1.0 - alpha * (a + b)));
    }

    /// Solve the compact-Laplacian Poisson problem `L p = rhs` (periodic only
    /// is diagonal; wall grids use homogeneous Neumann). The mean of `p` is zero.
    pub fn solve_compact_poisson(&self, rhs: &mut [f64]) {
        let h2 = self.grid.cell_area();
        let compact = |w: f64| (2.0 * w.cos() - 2.0) / h2;
        self.apply(rhs, Basis::Cosine, compact, |a, b| invert(a + b, h2));
    }

    /// Solve `div(grad p) = rhs` for the wide central operator with
    /// homogeneous Neumann walls (or periodic). Null modes are set to zero.
    pub fn solve_wide_poisson(&self, rhs: &mut [f64]) {
        let h2 = self.grid.cell_area();
        self.apply(rhs, Basis::Cosine, |w| -w.sin().powi(2) / h2, |a, b| invert(a + b, h2));
    }

    /// Forward transform, multiplication by `combine(axis(wx), axis(wy))`,
    /// inverse. `wx`, `wy` are the per-cell phase advances of the mode.
    ///
    /// Columns are handled as rows of the transposed array, so the symbol is
    /// applied in transposed layout.
    fn apply(
        &self,
        data: &mut [f64],
        basis: Basis,
        axis: impl Fn(f64) -> f64,
        combine: impl Fn(f64, f64) -> f64,
    ) {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        match &self.plans {
            Plans::Periodic { fwd_x, inv_x, fwd_y, inv_y } => {
                let sx: Vec<f64> = (0..nx).map(|k| axis(2.0 * PI * k as f64 / nx as f64)).collect();
                let sy: Vec<f64> = (0..ny).map(|k| axis(2.0 * PI * k as f64 / ny as f64)).collect();
                let mut buf: Vec<Complex<f64>> = data.iter().map(|&v| Complex::new(v, 0.0)).collect();
                let mut tr = vec![Complex::new(0.0, 0.0); nx * ny];
                fft_rows(&mut buf, nx, fwd_x.as_ref());
                transpose(&buf, &mut tr, nx, ny);
                fft_rows(&mut tr, ny, fwd_y.as_ref());
                for (kx, row) in tr.chunks_exact_mut(ny).enumerate() {
                    for (v, &b) in row.iter_mut().zip(&sy) {
                        *v *= combine(sx[kx], b);
                    }
                }
                fft_rows(&mut tr, ny, inv_y.as_ref());
                transpose(&tr, &mut buf, ny, nx);
                fft_rows(&mut buf, nx, inv_x.as_ref());
                let scale = 1.0 / (nx * ny) as f64;
                for (d, b) in data.iter_mut().zip(&buf) {
                    *d = b.re * scale;
                }
            }
            Plans::Wall { x, y } => {
                let phase = |k: usize, n: usize| match basis {
                    Basis::Sine => PI * (k + 1) as f64 / n as f64,
                    Basis::Cosine => PI * k as f64 / n as f64,
                };
                let sx: Vec<f64> = (0..nx).map(|k| axis(phase(k, nx))).collect();
                let sy: Vec<f64> = (0..ny).map(|k| axis(phase(k, ny))).collect();
                let mut tr = vec![0.0; nx * ny];
                real_rows(data, nx, x.as_ref(), basis, true);
                transpose(data, &mut tr, nx, ny);
                real_rows(&mut tr, ny, y.as_ref(), basis, true);
                let scale = 4.0 / (nx * ny) as f64;
                for (kx, row) in tr.chunks_exact_mut(ny).enumerate() {
                    for (v, &b) in row.iter_mut().zip(&sy) {
                        *v *= scale * combine(sx[kx], b);
                    }
                }
                real_rows(&mut tr, ny, y.as_ref(), basis, false);
                transpose(&tr, data, ny, nx);
                real_rows(data, nx, x.as_ref(), basis, false);
            }
        }
    }
}

fn invert(s: f64, h2: f64) -> f64 {
    if s.abs() < 1e-12 / h2 {
        0.0
    } else {
        1.0 / s
    }
}

/// `dst[i * rows + j] = src[j * cols + i]` for a `rows x cols` row-major `src`.
fn transpose<T: Copy>(src: &[T], dst: &mut [T], cols: usize, rows: usize) {
    const B: usize = 32;
    for jb in (0..rows).step_by(B) {
        for ib in (0..cols).step_by(B) {
            for j in jb..(jb + B).min(rows) {
                for i in ib..(ib + B).min(cols) {
                    dst[i * rows + j] = src[j * cols + i];
                }
            }
        }
    }
}

fn fft_rows(buf: &mut [Complex<f64>], n: usize, plan: &dyn Fft<f64>) {
    let mut scratch = vec![Complex::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(&mut buf[..], &mut scratch);
    debug_assert_eq!(buf.len() % n, 0);
}

fn real_transform(line: &mut [f64], scratch: &mut [f64], plan: &dyn TransformType2And3<f64>, basis: Basis, forward: bool) {
    match (basis, forward) {
        (Basis::Cosine, true) => plan.process_dct2_with_scratch(line, scratch),
        (Basis::Cosine, false) => plan.process_dct3_with_scratch(line, scratch),
        (Basis::Sine, true) => plan.process_dst2_with_scratch(line, scratch),
        (Basis::Sine, false) => plan.process_dst3_with_scratch(line, scratch),
    }
}

fn real_rows(data: &mut [f64], n: usize, plan: &dyn TransformType2And3<f64>, basis: Basis, forward: bool) {
    let mut scratch = vec![0.0; plan.get_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        real_transform(row, &mut scratch, plan, basis, forward);
    }
}
