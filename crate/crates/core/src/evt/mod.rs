//! Thresholds, declustering, extremal-index estimators and GEV fits.
//!
//! The `q` in the Süveges likelihood is the exceedance probability of the
//! threshold, `1 - quantile_level`, unless [`QConvention::QuantileLevel`] is
//! requested.

mod estimators;
pub mod evl;
pub mod gev;
mod threshold;

pub use estimators::{
    blocks_ei, clusters_from_positions, exceedance_positions, extract_clusters, runs_ei, suveges_ei,
    suveges_kgap, ClusterStatistics, EIEstimate, EiMethod, Estimator, QConvention,
};
pub use evl::{empirical_evl_curve, EvlOptions, EvlPoint};
pub use gev::{fit_gev, GevFit};
pub use threshold::{quantile, quantiles, threshold_at, MIN_SERIES_LEN};

use crate::error::{Error, Result};

/// Maxima of consecutive non-overlapping blocks; a trailing partial block is dropped.
pub fn block_maxima(series: &[f64], block_len: usize) -> Result<Vec<f64>> {
    if block_len < 2 {
        return Err(Error::Domain(format!("block length must be at least 2, got {block_len}")));
    }
    if series.len() < 2 * block_len {
        return Err(Error::Data(format!(
            "series of length {} holds fewer than two blocks of {block_len}",
            series.len()
        )));
    }
    Ok(series
        .chunks_exact(block_len)
        .map(|b| b.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn block_maxima_examples() {
        assert_eq!(block_maxima(&[1.0, 3.0, 2.0, 5.0], 2).unwrap(), vec![3.0, 5.0]);
        assert_eq!(block_maxima(&[4.0; 9], 3).unwrap(), vec![4.0; 3]);
        assert_eq!(block_maxima(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], 3).unwrap().len(), 2);
        assert!(block_maxima(&[1.0; 5], 3).is_err());
        assert!(block_maxima(&[1.0; 50], 1).is_err());
    }

    proptest! {
        #[test]
        fn block_maxima_compose(xs in prop::collection::vec(-1e3f64..1e3, 0..600), a in 2usize..6, b in 2usize..6) {
            let len = xs.len() / (a * b) * (a * b);
            prop_assume!(len >= 2 * a * b);
            let s = &xs[..len];
            let twice = block_maxima(&block_maxima(s, a).unwrap(), b).unwrap();
            prop_assert_eq!(twice, block_maxima(s, a * b).unwrap());
        }
    }

    /// GEV is max-stable, so block maxima of GEV draws are GEV with the same shape.
    #[test]
    fn gev_recovers_parameters_from_block_maxima() {
        let mut rng = stream(77, 0);
        for (mu, sigma, xi) in [(0.5, 1.0, -0.2), (0.0, 1.0, 0.0), (-1.0, 0.5, 0.5)] {
            let g = GevFit { location: mu, scale: sigma, shape: xi };
            let draws: Vec<f64> = (0..40_000).map(|_| g.sample(&mut rng)).collect();
            let fit = fit_gev(&block_maxima(&draws, 4).unwrap()[..10_000]).unwrap();
            // parameters of the maximum of 4 draws
            let (mu4, s4) = if xi == 0.0 {
                (mu + sigma * 4f64.ln(), sigma)
            } else {
                let f = 4f64.powf(xi);
                (mu + sigma * (f - 1.0) / xi, sigma * f)
            };
            assert!((fit.shape - xi).abs() <= 0.05, "{fit:?}");
            assert!((fit.scale - s4).abs() <= 0.1 * s4, "{fit:?} want scale {s4}");
            assert!((fit.location - mu4).abs() <= 0.05, "{fit:?} want loc {mu4}");
        }
    }
}
