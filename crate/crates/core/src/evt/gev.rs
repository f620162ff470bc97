//! Generalized extreme value fits by L-moments.
//!
//! With `k = -shape`, the GEV L-moments are
//! `l1 = mu + sigma (1 - G(1+k)) / k`, `l2 = sigma (1 - 2^-k) G(1+k) / k` and
//! `t3 = 2 (1 - 3^-k) / (1 - 2^-k) - 3`. The shape is found from `t3` by
//! Newton iteration started at Hosking's rational approximation.

use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

pub const MIN_MAXIMA: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GevFit {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

/// Sample L-moments `(l1, l2, t3)` from unbiased probability-weighted moments.
pub fn sample_l_moments(data: &[f64]) -> Result<(f64, f64, f64)> {
    let n = data.len();
    if n < 3 {
        return Err(Error::Data("L-moments need at least 3 values".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("maxima must be finite".into()));
    }
    let mut x = data.to_vec();
    x.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let j = i as f64;
        b0 += v;
        b1 += v * j / (nf - 1.0);
        b2 += v * j * (j - 1.0) / ((nf - 1.0) * (nf - 2.0));
    }
    b0 /= nf;
    b1 /= nf;
    b2 /= nf;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    Ok((b0, l2, if l2 != 0.0 { l3 / l2 } else { f64::NAN }))
}

/// `(1 - 3^-k) / (1 - 2^-k)`, continuous at `k = 0`.
fn ratio(k: f64) -> f64 {
    if k.abs() < 1e-9 {
        return 3f64.ln() / 2f64.ln();
    }
    (-k * 3f64.ln()).exp_m1() / (-k * 2f64.ln()).exp_m1()
}

fn tau3_of_k(k: f64) -> f64 {
    2.0 * ratio(k) - 3.0
}

/// Shape `k = -xi` solving `tau3(k) = t3`.
fn solve_k(t3: f64) -> Result<f64> {
    if t3.is_nan() || t3 >= 1.0 {
        return Err(Error::Fit(format!("L-skewness {t3} outside the GEV range")));
    }
    let c = 2.0 / (3.0 + t3) - 2f64.ln() / 3f64.ln();
    let mut k = 7.8590 * c + 2.9554 * c * c;
    for _ in 0..50 {
        let f = tau3_of_k(k) - t3;
        let h = 1e-6 * (1.0 + k.abs());
        let df = (tau3_of_k(k + h) - tau3_of_k(k - h)) / (2.0 * h);
        if df == 0.0 || !df.is_finite() {
            break;
        }
        let step = f / df;
        k -= step;
        if step.abs() < 1e-13 {
            break;
        }
    }
    if !k.is_finite() || k <= -1.0 {
        return Err(Error::Fit(format!("shape estimate xi = {} has no finite mean", -k)));
    }
    Ok(k)
}

/// Parameters from `(l1, l2, t3)`.
pub fn gev_from_l_moments(l1: f64, l2: f64, t3: f64) -> Result<GevFit> {
    if !(l2 > 0.0) {
        return Err(Error::Fit("degenerate maxima (zero L-scale)".into()));
    }
    let k = solve_k(t3)?;
    let (scale, location) = if k.abs() < 1e-9 {
        let s = l2 / 2f64.ln();
        (s, l1 - 0.577_215_664_901_532_9 * s)
    } else {
        let g = gamma(1.0 + k);
        let s = l2 * k / ((-(-k * 2f64.ln()).exp_m1()) * g);
        (s, l1 - s * (1.0 - g) / k)
    };
    Ok(GevFit { location, scale, shape: -k })
}

pub fn fit_gev(maxima: &[f64]) -> Result<GevFit> {
    if maxima.len() < MIN_MAXIMA {
        return Err(Error::Data(format!(
            "GEV fit needs at least {MIN_MAXIMA} maxima, got {}",
            maxima.len()
        )));
    }
    let (l1, l2, t3) = sample_l_moments(maxima)?;
    gev_from_l_moments(l1, l2, t3)
}

/// Population L-moments `(l1, l2, t3)` of a GEV.
pub fn gev_l_moments(fit: &GevFit) -> (f64, f64, f64) {
    let k = -fit.shape;
    if k.abs() < 1e-9 {
        let l2 = fit.scale * 2f64.ln();
        return (fit.location + 0.577_215_664_901_532_9 * fit.scale, l2, tau3_of_k(0.0));
    }
    let g = gamma(1.0 + k);
    let l1 = fit.location + fit.scale * (1.0 - g) / k;
    let l2 = fit.scale * (-(-k * 2f64.ln()).exp_m1()) * g / k;
    (l1, l2, tau3_of_k(k))
}

impl GevFit {
    pub fn cdf(&self, x: f64) -> f64 {
        let y = (x - self.location) / self.scale;
        if self.shape.abs() < 1e-12 {
            return (-(-y).exp()).exp();
        }
        let t = 1.0 + self.shape * y;
        if t <= 0.0 {
            return if self.shape > 0.0 { 0.0 } else { 1.0 };
        }
        (-t.powf(-1.0 / self.shape)).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let w = -p.ln();
        if self.shape.abs() < 1e-12 {
            self.location - self.scale * w.ln()
        } else {
            self.location + self.scale * (w.powf(-self.shape) - 1.0) / self.shape
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u.max(f64::MIN_POSITIVE))
    }
}
