use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Minimum series length accepted by [`threshold_at`].
pub const MIN_SERIES_LEN: usize = 100;

fn sorted_copy(series: &[f64]) -> Result<Vec<f64>> {
    if series.iter().any(|v| v.is_nan()) {
        return Err(Error::Data("series contains NaN".into()));
    }
    let mut v = series.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    Ok(v)
}

/// Linear interpolation between order statistics at `h = (n - 1) p`.
/// Infinite order statistics are returned as is instead of interpolated.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    let (a, b) = (sorted[lo], sorted[hi]);
    if frac == 0.0 || a == b {
        a
    } else if a.is_finite() && b.is_finite() {
        a + frac * (b - a)
    } else {
        b
    }
}

/// Empirical quantile of the series at `quantile_level`.
pub fn threshold_at(series: &[f64], quantile_level: f64) -> Result<f64> {
    if !(quantile_level > 0.5 && quantile_level < 1.0) {
        return Err(Error::Domain(format!(
            "quantile level must lie in (0.5, 1), got {quantile_level}"
        )));
    }
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::Data(format!(
            "series has {} values, need at least {MIN_SERIES_LEN}",
            series.len()
        )));
    }
    Ok(quantile_sorted(&sorted_copy(series)?, quantile_level))
}

/// Quantile without the level restriction, for calibration curves.
pub fn quantile(series: &[f64], p: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Data("empty series".into()));
    }
    Ok(quantile_sorted(&sorted_copy(series)?, p))
}

/// Several quantiles from a single sort.
pub fn quantiles(series: &[f64], ps: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Data("empty series".into()));
    }
    let s = sorted_copy(series)?;
    Ok(ps.iter().map(|&p| quantile_sorted(&s, p)).collect())
}
