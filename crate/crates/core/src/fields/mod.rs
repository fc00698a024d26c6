//! Uniform-grid field storage and second-order discrete calculus.
//!
//! Values live at cell centres `x_i = (i + 1/2) h`, stored row-major with
//! index `j * nx + i`. Wall boundaries are imposed through ghost cells:
//! a Dirichlet value `b` reflects oddly about the wall (`g = 2b - f`), a
//! Neumann condition reflects evenly (`g = f`). Both reflections keep every
//! wall operator diagonal in a sine/cosine basis, which is what
//! [`spectral`] relies on.

mod ops;
pub mod poisson;
pub mod snapshot;
pub mod spectral;

pub use ops::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    DirichletWall,
    Periodic,
}

/// Boundary condition carried by an individual field on a walled grid.
/// Ignored on periodic grids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FieldBc {
    Dirichlet(f64),
    Neumann,
}

/// Per-component boundary conditions of a vector field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorBc {
    pub x: FieldBc,
    pub y: FieldBc,
}

impl VectorBc {
    pub const NO_SLIP: VectorBc = VectorBc {
        x: FieldBc::Dirichlet(0.0),
        y: FieldBc::Dirichlet(0.0),
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub bc: BoundaryMode,
}

impl Grid2D {
    pub const MIN_CELLS: usize = 16;

    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64, bc: BoundaryMode) -> Result<Self> {
        if nx < Self::MIN_CELLS || ny < Self::MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "need at least {} cells per direction, got {nx}x{ny}",
                Self::MIN_CELLS
            )));
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidGrid(format!("domain lengths must be positive, got {lx}x{ly}")));
        }
        let (hx, hy) = (lx / nx as f64, ly / ny as f64);
        if (hx - hy).abs() > 1e-12 * hx {
            return Err(Error::InvalidGrid(format!("cells must be square, got hx={hx} hy={hy}")));
        }
        Ok(Self { nx, ny, lx, ly, bc })
    }

    /// Square unit-length-per-side grid helper used throughout the tests.
    pub fn square(n: usize, length: f64, bc: BoundaryMode) -> Result<Self> {
        Self::new(n, n, length, length, bc)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.h();
        [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]
    }

    pub fn is_periodic(&self) -> bool {
        self.bc == BoundaryMode::Periodic
    }

    /// Domain period for minimal-image geometry, if the grid is periodic.
    pub fn period(&self) -> Option<[f64; 2]> {
        self.is_periodic().then_some([self.lx, self.ly])
    }

    pub fn same_as(&self, other: &Grid2D) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Iterate `(i, j, centre)` over all cells in storage order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, [f64; 2])> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, self.center(i, j))))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid2D, value: f64) -> Self {
        Self { grid, data: vec![value; grid.len()] }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut([f64; 2]) -> f64) -> Self {
        let data = grid.cells().map(|(_, _, x)| f(x)).collect();
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid2D, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.grid.idx(i, j)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, data })
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.data.iter_mut().for_each(|v| *v -= m);
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid2D,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid2D) -> Self {
        Self { grid, x: vec![0.0; grid.len()], y: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut([f64; 2]) -> [f64; 2]) -> Self {
        let (mut x, mut y) = (Vec::with_capacity(grid.len()), Vec::with_capacity(grid.len()));
        for (_, _, p) in grid.cells() {
            let v = f(p);
            x.push(v[0]);
            y.push(v[1]);
        }
        Self { grid, x, y }
    }

    pub fn from_components(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.grid.same_as(&y.grid)?;
        Ok(Self { grid: x.grid, x: x.data, y: y.data })
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.grid.idx(i, j);
        [self.x[k], self.y[k]]
    }

    pub fn component_x(&self) -> ScalarField {
        ScalarField { grid: self.grid, data: self.x.clone() }
    }

    pub fn component_y(&self) -> ScalarField {
        ScalarField { grid: self.grid, data: self.y.clone() }
    }

    /// Pointwise Euclidean magnitude.
    pub fn magnitude(&self) -> ScalarField {
        let data = self.x.iter().zip(&self.y).map(|(a, b)| a.hypot(*b)).collect();
        ScalarField { grid: self.grid, data }
    }

    pub fn max_magnitude(&self) -> f64 {
        self.x.iter().zip(&self.y).fold(0.0, |m: f64, (a, b)| m.max(a * a + b * b)).sqrt()
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        self.grid.same_as(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            x: self.x.iter().zip(&other.x).map(|(a, b)| a - b).collect(),
            y: self.y.iter().zip(&other.y).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn all_finite(&self) -> bool {
        self.x.iter().chain(&self.y).all(|v| v.is_finite())
    }
}
