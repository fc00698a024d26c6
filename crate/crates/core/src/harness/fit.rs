//! Log-log least-squares rate fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub functional: String,
    /// `(eps, value)` pairs.
    pub pairs: Vec<(f64, f64)>,
    /// Exponent `alpha` in `value ~ A eps^alpha`.
    pub slope: f64,
    /// `ln A`.
    pub intercept: f64,
    /// Root-mean-square of the residuals in natural-log units.
    pub residual: f64,
}

pub fn fit_rate(functional: &str, pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::Fit(format!("{functional}: a rate fit needs at least 3 points, got {}", pairs.len())));
    }
    if let Some((e, v)) = pairs.iter().find(|(e, v)| !(*e > 0.0 && *v > 0.0 && e.is_finite() && v.is_finite())) {
        return Err(Error::Fit(format!("{functional}: nonpositive or non-finite pair ({e}, {v})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit(format!("{functional}: all eps values coincide")));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(RateFit { functional: functional.to_string(), pairs: pairs.to_vec(), slope, intercept, residual: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    const EPS: [f64; 4] = [0.08, 0.04, 0.02, 0.01];

    #[test]
    fn exact_power_laws() {
        let cube: Vec<_> = EPS.iter().map(|&e| (e, e.cbrt())).collect();
        let fit = fit_rate("E", &cube).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0 / 3.0, epsilon = 1e-12);
        assert!(fit.residual < 1e-12);
        let lin: Vec<_> = EPS.iter().map(|&e| (e, 5.0 * e)).collect();
        let fit = fit_rate("E", &lin).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 5f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn noisy_half_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<_> = (0..12)
            .map(|k| {
                let e = 0.1 * 0.8f64.powi(k);
                (e, 2.0 * e.sqrt() * (1.0 + rng.gen_range(-0.05..0.05)))
            })
            .collect();
        let fit = fit_rate("l1", &pairs).unwrap();
        assert!(fit.slope >= 0.45 && fit.slope <= 0.55, "{}", fit.slope);
    }

    #[test]
    fn refuses_degenerate_input() {
        assert!(matches!(fit_rate("E", &[(0.1, 1.0), (0.05, 0.5)]), Err(Error::Fit(_))));
        assert!(fit_rate("E", &[(0.1, 1.0), (0.05, 0.0), (0.02, 0.1)]).is_err());
        assert!(fit_rate("E", &[(0.1, 1.0), (0.1, 0.5), (0.1, 0.1)]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_any_power(alpha in -2.0f64..3.0, a in 0.01f64..100.0) {
            let pairs: Vec<_> = EPS.iter().map(|&e| (e, a * e.powf(alpha))).collect();
            let fit = fit_rate("x", &pairs).unwrap();
            prop_assert!((fit.slope - alpha).abs() < 1e-9);
        }
    }
}
