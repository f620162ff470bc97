use serde::Serialize;

use super::threshold::quantiles;
use crate::error::{Error, Result};
use crate::observables::Observable;
use crate::parallel::try_map_indexed;
use crate::rng::stream;
use crate::systems::{generate_series_with, realization_series, System};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvlOptions {
    pub calibration_len: usize,
    pub burn_in: usize,
}

impl Default for EvlOptions {
    fn default() -> Self {
        EvlOptions { calibration_len: 1_000_000, burn_in: 1_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvlPoint {
    pub tau: f64,
    /// `u_n(tau)`, `+inf` for `tau = 0`.
    pub threshold: f64,
    /// Fraction of realizations with `M_n <= u_n(tau)`.
    pub probability: f64,
    /// Binomial standard error of `probability`.
    pub stderr: f64,
}

/// Stream index reserved for the calibration orbit.
const CALIBRATION_STREAM: u64 = u64::MAX;

/// Empirical `P(M_n <= u_n(tau))` over independent realizations started from the
/// invariant measure, with `u_n(tau)` the `1 - tau/n` quantile of one long orbit.
pub fn empirical_evl_curve(
    system: &System,
    obs: &Observable,
    n: usize,
    tau_grid: &[f64],
    n_realizations: usize,
    seed: u64,
    opts: &EvlOptions,
) -> Result<Vec<EvlPoint>> {
    if n < 1_000 {
        return Err(Error::Domain(format!("EVL curve needs n >= 1000, got {n}")));
    }
    if n_realizations < 100 {
        return Err(Error::Domain(format!("EVL curve needs at least 100 realizations, got {n_realizations}")));
    }
    if let Some(t) = tau_grid.iter().find(|t| !(**t >= 0.0 && **t <= n as f64)) {
        return Err(Error::Domain(format!("tau {t} outside [0, n]")));
    }
    let mut rng = stream(seed, CALIBRATION_STREAM);
    let calibration = realization_series(system, obs, opts.calibration_len, opts.burn_in, &mut rng)?;
    let levels: Vec<f64> = tau_grid.iter().map(|t| 1.0 - t / n as f64).collect();
    let thresholds: Vec<f64> = quantiles(&calibration, &levels)?
        .into_iter()
        .zip(tau_grid)
        .map(|(u, t)| if *t == 0.0 { f64::INFINITY } else { u })
        .collect();
    drop(calibration);

    let maxima = try_map_indexed(n_realizations, |r| -> Result<f64> {
        let mut rng = stream(seed, r as u64);
        let x0 = system.sample_invariant(&mut rng);
        let s = generate_series_with(system, x0, n, obs, &mut rng)?;
        Ok(s.into_iter().fold(f64::NEG_INFINITY, f64::max))
    })?;
    let nr = n_realizations as f64;
    Ok(tau_grid
        .iter()
        .zip(&thresholds)
        .map(|(&tau, &u)| {
            let below = maxima.iter().filter(|m| **m <= u).count() as f64;
            let p = below / nr;
            EvlPoint { tau, threshold: u, probability: p, stderr: (p * (1.0 - p) / nr).sqrt() }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::SystemSpec;

    #[test]
    fn iid_surrogate_matches_exponential() {
        let sys = SystemSpec::Iid { dim: 2 }.build().unwrap();
        let obs = Observable::NegLogPerp;
        let opts = EvlOptions { calibration_len: 4_000_000, burn_in: 0 };
        let curve = empirical_evl_curve(&sys, &obs, 1_000, &[0.0, 1.0], 2_000, 3, &opts).unwrap();
        assert_eq!(curve[0].probability, 1.0);
        assert_eq!(curve[0].threshold, f64::INFINITY);
        let want = (-1.0f64).exp();
        let se = (want * (1.0 - want) / 2_000.0).sqrt();
        assert!((curve[1].probability - want).abs() < 3.0 * se, "{:?}", curve[1]);
    }

    #[test]
    fn preconditions() {
        let sys = System::cat_map();
        let obs = Observable::NegLogPerp;
        let o = EvlOptions::default();
        assert!(empirical_evl_curve(&sys, &obs, 999, &[1.0], 100, 0, &o).is_err());
        assert!(empirical_evl_curve(&sys, &obs, 1000, &[1.0], 99, 0, &o).is_err());
        assert!(empirical_evl_curve(&sys, &obs, 1000, &[-1.0], 100, 0, &o).is_err());
    }
}
