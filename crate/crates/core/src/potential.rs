//! Double-well potential, surface tension, the density-weighted map
//! `psi(c) = int_{-1}^{c} sqrt(2 rho(r) f(r)) dr`, and optimal profiles.

use std::sync::Once;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{Grid2D, ScalarField};
use crate::geometry::{AnalyticInterface, GeometryParams};

/// Order-parameter values beyond `±CLAMP` are clamped before evaluating `psi`.
pub const CLAMP: f64 = 1.05;

#[derive(Clone, Debug, PartialEq)]
pub enum DoubleWell {
    /// `f(c) = (1 - c^2)^2 / 8`.
    Quartic,
    /// Values of `f` on a uniform grid over `[-1, 1]`, interpolated by
    /// Catmull-Rom cubics and continued quadratically beyond the wells.
    Tabulated(Vec<f64>),
}

impl DoubleWell {
    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 5 {
            return Err(Error::Config("a tabulated potential needs at least 5 values".into()));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if values[0].abs() > 1e-12 * scale || values[n - 1].abs() > 1e-12 * scale {
            return Err(Error::Config("tabulated potential must vanish at c = -1 and c = 1".into()));
        }
        if (0..n).any(|k| (values[k] - values[n - 1 - k]).abs() > 1e-10 * scale) {
            return Err(Error::Config("tabulated potential must be even".into()));
        }
        if values[1..n - 1].iter().any(|&v| v <= 0.0) {
            return Err(Error::Config("tabulated potential must be positive on (-1, 1)".into()));
        }
        Ok(DoubleWell::Tabulated(values))
    }

    pub fn f(&self, c: f64) -> f64 {
        match self {
            DoubleWell::Quartic => {
                let s = 1.0 - c * c;
                0.125 * s * s
            }
            DoubleWell::Tabulated(v) => {
                if c.abs() > 1.0 {
                    let e = c.abs() - 1.0;
                    0.5 * self.well_curvature() * e * e
                } else {
                    table_eval(v, c).0
                }
            }
        }
    }

    pub fn f_prime(&self, c: f64) -> f64 {
        match self {
            DoubleWell::Quartic => -0.5 * c * (1.0 - c * c),
            DoubleWell::Tabulated(v) => {
                if c.abs() > 1.0 {
                    self.well_curvature() * (c.abs() - 1.0).copysign(c)
                } else {
                    table_eval(v, c).1
                }
            }
        }
    }

    /// `f''(1)`.
    pub fn well_curvature(&self) -> f64 {
        match self {
            DoubleWell::Quartic => 1.0,
            DoubleWell::Tabulated(v) => {
                let n = v.len();
                let h = 2.0 / (n - 1) as f64;
                // one-sided second difference at the right well
                (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (h * h)
            }
        }
    }

    /// `c0 = int_{-1}^{1} sqrt(2 f)`.
    pub fn surface_tension(&self) -> Result<f64> {
        adaptive_simpson(&|r| (2.0 * self.f(r)).max(0.0).sqrt(), -1.0, 1.0, 1e-10)
    }
}

/// Catmull-Rom value and slope of uniformly tabulated data on `[-1, 1]`.
fn table_eval(v: &[f64], c: f64) -> (f64, f64) {
    let n = v.len();
    let h = 2.0 / (n - 1) as f64;
    let x = ((c + 1.0) / h).clamp(0.0, (n - 1) as f64);
    let k = (x.floor() as usize).min(n - 2);
    let t = x - k as f64;
    let at = |i: isize| -> f64 {
        // even reflection about the wells keeps the end slopes at zero
        let i = if i < 0 { -i } else if i >= n as isize { 2 * (n as isize - 1) - i } else { i };
        v[i as usize]
    };
    let k = k as isize;
    let (p0, p1) = (at(k), at(k + 1));
    let m0 = 0.5 * (at(k + 1) - at(k - 1));
    let m1 = 0.5 * (at(k + 2) - at(k));
    hermite(p0, p1, m0, m1, t, h)
}

/// Cubic Hermite value and derivative on a cell of width `h` given the
/// end values and end slopes expressed per unit of `t`.
fn hermite(p0: f64, p1: f64, m0: f64, m1: f64, t: f64, h: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let val = (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * m1;
    let der = (6.0 * t2 - 6.0 * t) * p0 + (3.0 * t2 - 4.0 * t + 1.0) * m0 + (-6.0 * t2 + 6.0 * t) * p1 + (3.0 * t2 - 2.0 * t) * m1;
    (val, der / h)
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if err.abs() <= 15.0 * tol {
            return Ok(left + right + err / 15.0);
        }
        if depth == 0 {
            return Err(Error::Quadrature { estimate: err.abs() / 15.0 });
        }
        Ok(rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)? + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    /// Density of the bubble phase `c = +1`.
    pub rho_plus: f64,
    /// Density of the ambient phase `c = -1`.
    pub rho_minus: f64,
}

impl DensityPair {
    pub const UNIT: DensityPair = DensityPair { rho_plus: 1.0, rho_minus: 1.0 };

    pub fn new(rho_plus: f64, rho_minus: f64) -> Result<Self> {
        let p = Self { rho_plus, rho_minus };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_plus > 0.0 && self.rho_minus > 0.0 && self.rho_plus.is_finite() && self.rho_minus.is_finite()) {
            return Err(Error::Config(format!(
                "densities must be positive, got rho_plus={} rho_minus={}",
                self.rho_plus, self.rho_minus
            )));
        }
        Ok(())
    }

    /// Phase-interpolated density `rho_- + (rho_+ - rho_-)(1 + c)/2`, with
    /// `c` clamped to `[-1, 1]`.
    pub fn interpolate(&self, c: f64) -> f64 {
        let c = c.clamp(-1.0, 1.0);
        self.rho_minus + (self.rho_plus - self.rho_minus) * 0.5 * (1.0 + c)
    }

    pub fn min(&self) -> f64 {
        self.rho_plus.min(self.rho_minus)
    }

    pub fn max(&self) -> f64 {
        self.rho_plus.max(self.rho_minus)
    }
}

/// Lookup table for `psi(c) = int_{-1}^{c} sqrt(2 rho(r) f(r)) dr` on
/// `[-CLAMP, CLAMP]` with cubic Hermite interpolation (the slope is known
/// exactly). Immutable after construction.
#[derive(Clone, Debug)]
pub struct PsiMap {
    well: DoubleWell,
    densities: DensityPair,
    values: Vec<f64>,
}

const PSI_STEP: f64 = 1.0 / 1024.0;
const PSI_PAD: usize = 52;

static CLAMP_WARNING: Once = Once::new();

impl PsiMap {
    pub fn new(well: DoubleWell, densities: DensityPair) -> Result<Self> {
        densities.validate()?;
        let n_inner = (2.0 / PSI_STEP) as usize;
        let n = n_inner + 2 * PSI_PAD + 1;
        let node = |k: usize| -1.0 + (k as f64 - PSI_PAD as f64) * PSI_STEP;
        let mut map = Self { well, densities, values: vec![0.0; n] };
        let integrand = |r: f64| map.slope_unclamped(r);
        let mut values = vec![0.0; n];
        // integrate outwards from c = -1 so that psi(-1) = 0 exactly
        for k in (0..PSI_PAD).rev() {
            values[k] = values[k + 1] - adaptive_simpson(&integrand, node(k), node(k + 1), 1e-14)?;
        }
        for k in PSI_PAD + 1..n {
            values[k] = values[k - 1] + adaptive_simpson(&integrand, node(k - 1), node(k), 1e-14)?;
        }
        map.values = values;
        Ok(map)
    }

    pub fn well(&self) -> &DoubleWell {
        &self.well
    }

    pub fn densities(&self) -> DensityPair {
        self.densities
    }

    fn slope_unclamped(&self, r: f64) -> f64 {
        (2.0 * self.densities.interpolate(r) * self.well.f(r)).max(0.0).sqrt()
    }

    fn clamp(c: f64) -> f64 {
        if c.abs() > CLAMP {
            CLAMP_WARNING.call_once(|| {
                log::warn!("order parameter {c:.4} outside [-{CLAMP}, {CLAMP}]; clamping for psi");
            });
            c.clamp(-CLAMP, CLAMP)
        } else {
            c
        }
    }

    /// `psi'(c) = sqrt(2 rho(c) f(c))`.
    pub fn slope(&self, c: f64) -> f64 {
        self.slope_unclamped(Self::clamp(c))
    }

    pub fn value(&self, c: f64) -> f64 {
        let c = Self::clamp(c);
        let x = (c + 1.0) / PSI_STEP + PSI_PAD as f64;
        let k = (x.floor() as usize).min(self.values.len() - 2);
        let t = x - k as f64;
        let c0 = -1.0 + (k as f64 - PSI_PAD as f64) * PSI_STEP;
        let m0 = self.slope_unclamped(c0) * PSI_STEP;
        let m1 = self.slope_unclamped(c0 + PSI_STEP) * PSI_STEP;
        hermite(self.values[k], self.values[k + 1], m0, m1, t, PSI_STEP).0
    }

    /// `psi(1)`, the energy per unit length of the optimal profile. Equals
    /// `c0` when both densities are 1.
    pub fn sigma(&self) -> f64 {
        self.values[PSI_PAD + (2.0 / PSI_STEP) as usize]
    }

    pub fn apply(&self, c: &ScalarField) -> ScalarField {
        c.map(|v| self.value(v))
    }
}

/// One-dimensional optimal transition profile `c(s)` solving
/// `eps c'(s) = sqrt(2 rho(c) f(c))`, `c(0) = 0`.
#[derive(Clone, Debug)]
pub enum Profile {
    /// `tanh(sqrt(rho) s / (2 eps))` for the quartic well at constant density.
    Tanh { rho: f64 },
    /// RK4 solution tabulated in `z = s/eps`.
    Numeric { values: Vec<f64>, slopes: Vec<f64> },
}

const PROFILE_HALF_SPAN: f64 = 40.0;
const PROFILE_STEP: f64 = 0.005;

impl Profile {
    pub fn new(well: &DoubleWell, densities: DensityPair) -> Self {
        if *well == DoubleWell::Quartic && densities.rho_plus == densities.rho_minus {
            Profile::Tanh { rho: densities.rho_plus }
        } else {
            Self::integrate(well, densities)
        }
    }

    /// Always integrates the ODE, even when a closed form exists.
    pub fn integrate(well: &DoubleWell, densities: DensityPair) -> Self {
        let rhs = |c: f64| (2.0 * densities.interpolate(c) * well.f(c)).max(0.0).sqrt();
        let half = (PROFILE_HALF_SPAN / PROFILE_STEP).round() as usize;
        let n = 2 * half + 1;
        let mut values = vec![0.0; n];
        for dir in [1.0f64, -1.0] {
            let mut c = 0.0;
            let h = dir * PROFILE_STEP;
            for k in 1..=half {
                let k1 = rhs(c);
                let k2 = rhs(c + 0.5 * h * k1);
                let k3 = rhs(c + 0.5 * h * k2);
                let k4 = rhs(c + h * k3);
                c = (c + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).clamp(-1.0, 1.0);
                let idx = if dir > 0.0 { half + k } else { half - k };
                values[idx] = c;
            }
        }
        let slopes = values.iter().map(|&c| rhs(c)).collect();
        Profile::Numeric { values, slopes }
    }

    /// Profile value at signed distance `s` for interface width `eps`.
    pub fn eval(&self, s: f64, eps: f64) -> f64 {
        match self {
            Profile::Tanh { rho } => (rho.sqrt() * s / (2.0 * eps)).tanh(),
            Profile::Numeric { values, slopes } => {
                let z = s / eps;
                if z >= PROFILE_HALF_SPAN {
                    return values[values.len() - 1];
                }
                if z <= -PROFILE_HALF_SPAN {
                    return values[0];
                }
                let x = (z + PROFILE_HALF_SPAN) / PROFILE_STEP;
                let k = (x.floor() as usize).min(values.len() - 2);
                let t = x - k as f64;
                let (m0, m1) = (slopes[k] * PROFILE_STEP, slopes[k + 1] * PROFILE_STEP);
                hermite(values[k], values[k + 1], m0, m1, t, PROFILE_STEP).0
            }
        }
    }
}

/// Well-prepared initial order parameter `c = profile(d)` and the slaved
/// density `rho = rho_hat(c)`.
pub fn well_prepared_init(
    iface: &AnalyticInterface,
    params: &GeometryParams,
    grid: &Grid2D,
    eps: f64,
    profile: &Profile,
    densities: DensityPair,
) -> Result<(ScalarField, ScalarField)> {
    iface.validate(params, grid, 0.0)?;
    let iface = iface.on_grid(grid);
    let c = ScalarField::from_fn(*grid, |x| profile.eval(iface.signed_distance(x, 0.0), eps));
    let rho = c.map(|v| densities.interpolate(v));
    Ok((c, rho))
}
