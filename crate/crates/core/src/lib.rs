//! Diffuse-interface Navier-Stokes/Allen-Cahn simulation on a uniform 2D
//! grid, analytic sharp-interface references, and the diagnostics that
//! compare the two.

pub mod diagnostics;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod harness;
pub mod potential;
pub mod sharp;
pub mod solver;

pub use diagnostics::{EnergyReport, Evaluator, GronwallFit};
pub use error::{Error, Result};
pub use fields::{BoundaryMode, FieldBc, Grid2D, ScalarField, VectorBc, VectorField};
pub use geometry::{AnalyticInterface, GeometryParams};
pub use harness::{RateFit, RunConfig, RunSummary, SweepOutcome, SweepSpec};
pub use potential::{DensityPair, DoubleWell, PsiMap};
pub use sharp::SharpState;
pub use solver::{SimState, Solver, SolverParams, StepLog};
