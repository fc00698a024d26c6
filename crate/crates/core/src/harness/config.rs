//! Run and sweep configuration files (JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{BoundaryMode, Grid2D};
use crate::geometry::{AnalyticInterface, GeometryParams, Point};
use crate::potential::{DensityPair, DoubleWell};
use crate::solver::SolverParams;

fn one() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    #[serde(default = "one")]
    pub lx: f64,
    #[serde(default = "one")]
    pub ly: f64,
    pub bc: BoundaryMode,
}

impl GridConfig {
    pub fn square(n: usize, bc: BoundaryMode) -> Self {
        Self { nx: n, ny: n, lx: 1.0, ly: 1.0, bc }
    }

    pub fn build(&self) -> Result<Grid2D> {
        Grid2D::new(self.nx, self.ny, self.lx, self.ly, self.bc)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Circle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default)]
    pub shape: Shape,
    pub center: Point,
    pub radius: f64,
    #[serde(default)]
    pub translation_velocity: Option<Point>,
    /// Tube parameter; defaults to a tenth of the shorter side.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl GeometryConfig {
    pub fn params(&self, grid: &Grid2D) -> GeometryParams {
        match self.delta {
            Some(delta) => GeometryParams { delta },
            None => GeometryParams::default_for(grid),
        }
    }

    pub fn interface(&self, grid: &Grid2D) -> Result<AnalyticInterface> {
        let v = self.translation_velocity.unwrap_or([0.0, 0.0]);
        Ok(AnalyticInterface::circle(self.center, self.radius)?.with_velocity(v).on_grid(grid))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Quartic {
        #[serde(default = "one")]
        rho_plus: f64,
        #[serde(default = "one")]
        rho_minus: f64,
    },
    Tabulated {
        values: Vec<f64>,
        #[serde(default = "one")]
        rho_plus: f64,
        #[serde(default = "one")]
        rho_minus: f64,
    },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Quartic { rho_plus: 1.0, rho_minus: 1.0 }
    }
}

impl PotentialConfig {
    pub fn well(&self) -> Result<DoubleWell> {
        match self {
            PotentialConfig::Quartic { .. } => Ok(DoubleWell::Quartic),
            PotentialConfig::Tabulated { values, .. } => DoubleWell::tabulated(values.clone()),
        }
    }

    pub fn densities(&self) -> Result<DensityPair> {
        let (p, m) = match self {
            PotentialConfig::Quartic { rho_plus, rho_minus } => (*rho_plus, *rho_minus),
            PotentialConfig::Tabulated { rho_plus, rho_minus, .. } => (*rho_plus, *rho_minus),
        };
        DensityPair::new(p, m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Bubble at rest in a closed box.
    StaticBubble,
    /// Bubble carried by a uniform flow on a periodic domain.
    TransportedBubble { v_uniform: Point },
    /// Pure outer phase at rest.
    Quiescent,
}

impl ScenarioConfig {
    pub fn id(&self) -> &'static str {
        match self {
            ScenarioConfig::StaticBubble => "static_bubble",
            ScenarioConfig::TransportedBubble { .. } => "transported_bubble",
            ScenarioConfig::Quiescent => "quiescent",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    None,
    #[default]
    Final,
    Reports,
}

fn default_reports() -> usize {
    20
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Run directory; relative paths resolve against the config file.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Number of report intervals on `[0, t_end]`.
    #[serde(default = "default_reports")]
    pub report_count: usize,
    #[serde(default)]
    pub snapshots: SnapshotPolicy,
    /// Write the per-step monitor CSV.
    #[serde(default = "default_true")]
    pub step_log: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None, report_count: default_reports(), snapshots: SnapshotPolicy::default(), step_log: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub geometry: Option<GeometryConfig>,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub scenario: ScenarioConfig,
    pub solver: SolverParams,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        if let (Some(dir), Some(base)) = (&cfg.output.dir, path.parent()) {
            if dir.is_relative() {
                cfg.output.dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    /// Circle used for the reference state. The quiescent scenario falls
    /// back to a centred circle that only serves the interface fields.
    pub fn geometry_or_default(&self) -> GeometryConfig {
        self.geometry.unwrap_or_else(|| {
            let side = self.grid.lx.min(self.grid.ly);
            GeometryConfig {
                shape: Shape::Circle,
                center: [0.5 * self.grid.lx, 0.5 * self.grid.ly],
                radius: 0.25 * side,
                translation_velocity: None,
                delta: Some(0.075 * side),
            }
        })
    }

    /// Check everything that can be checked without running.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.solver.validate(&grid)?;
        self.potential.well()?;
        self.potential.densities()?;
        if self.output.report_count == 0 {
            return Err(Error::Config("report_count must be at least 1".into()));
        }
        match self.scenario {
            ScenarioConfig::Quiescent => Ok(()),
            ScenarioConfig::StaticBubble => {
                let geo = self.geometry.ok_or_else(|| Error::Config("static_bubble needs a geometry block".into()))?;
                if let Some(v) = geo.translation_velocity {
                    if v != [0.0, 0.0] {
                        return Err(Error::Config("static_bubble cannot have a translation velocity".into()));
                    }
                }
                geo.interface(&grid)?.validate(&geo.params(&grid), &grid, self.solver.t_end)
            }
            ScenarioConfig::TransportedBubble { v_uniform } => {
                let geo =
                    self.geometry.ok_or_else(|| Error::Config("transported_bubble needs a geometry block".into()))?;
                if let Some(v) = geo.translation_velocity {
                    if v != v_uniform {
                        return Err(Error::Config(format!(
                            "translation_velocity {v:?} disagrees with v_uniform {v_uniform:?}"
                        )));
                    }
                }
                if !grid.is_periodic() {
                    return Err(Error::UnsupportedScenario(
                        "transported_bubble needs a periodic domain".into(),
                    ));
                }
                let iface = geo.interface(&grid)?.with_velocity(v_uniform);
                iface.validate(&geo.params(&grid), &grid, self.solver.t_end)
            }
        }
    }
}

fn default_thetas() -> Vec<f64> {
    vec![0.0]
}

/// A family of runs sharing one scenario, varying `eps` (with its paired
/// grid) and the mobility exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Template for every member; grid size, `epsilon` and `theta` are
    /// overwritten.
    pub base: RunConfig,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Cells per direction, paired with `epsilons`.
    pub grid_sizes: Vec<usize>,
    #[serde(default = "default_thetas")]
    pub thetas: Vec<f64>,
    #[serde(default)]
    pub report_count: Option<usize>,
    pub output_dir: PathBuf,
}

/// One run of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepMember {
    pub theta: f64,
    pub epsilon: f64,
    pub n: usize,
    pub config: RunConfig,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: Self =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid sweep spec: {e}")))?;
        if spec.output_dir.is_relative() {
            if let Some(base) = path.parent() {
                spec.output_dir = base.join(&spec.output_dir);
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() || self.thetas.is_empty() {
            return Err(Error::Config("sweep needs nonempty epsilon and theta lists".into()));
        }
        if self.epsilons.len() != self.grid_sizes.len() {
            return Err(Error::Config(format!(
                "{} epsilons but {} grid sizes",
                self.epsilons.len(),
                self.grid_sizes.len()
            )));
        }
        if self.epsilons.len() < 3 {
            return Err(Error::Config(format!(
                "a rate fit needs at least 3 epsilons, got {}",
                self.epsilons.len()
            )));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("epsilons must be strictly decreasing".into()));
        }
        for m in self.members() {
            m.config.validate().map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("member eps = {}, theta = {}: {msg}", m.epsilon, m.theta)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn members(&self) -> Vec<SweepMember> {
        let mut out = Vec::new();
        for &theta in &self.thetas {
            for (&epsilon, &n) in self.epsilons.iter().zip(&self.grid_sizes) {
                let mut config = self.base.clone();
                let aspect = config.grid.ly / config.grid.lx;
                config.grid.nx = n;
                config.grid.ny = ((n as f64) * aspect).round() as usize;
                config.solver.epsilon = epsilon;
                config.solver.theta = theta;
                if let Some(r) = self.report_count {
                    config.output.report_count = r;
                }
                config.output.dir = Some(self.member_dir(theta, epsilon));
                out.push(SweepMember { theta, epsilon, n, config });
            }
        }
        out
    }

    pub fn member_dir(&self, theta: f64, epsilon: f64) -> PathBuf {
        self.output_dir.join(format!("theta_{theta}")).join(format!("eps_{epsilon}"))
    }
}
