use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::wrap_unit;

/// All-to-all coupled lattice of `m` expanding circle maps `T(x) = slope x mod 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoupledMapSystem {
    m: usize,
    gamma: f64,
    slope: f64,
    noise_eps: f64,
}

impl CoupledMapSystem {
    pub fn new(m: usize, gamma: f64, slope: f64, noise_eps: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("coupled lattice needs m >= 2, got {m}")));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::Config(format!("coupling gamma must lie in (0, 1), got {gamma}")));
        }
        if !(slope > 1.0 && slope.is_finite()) {
            return Err(Error::Config(format!("base slope must exceed 1, got {slope}")));
        }
        if !(0.0..=0.1).contains(&noise_eps) {
            return Err(Error::Config(format!("noise must lie in [0, 0.1], got {noise_eps}")));
        }
        Ok(Self { m, gamma, slope, noise_eps })
    }

    /// Like `new` but allows `gamma = 0`, the uncoupled product map.
    pub fn uncoupled(m: usize, slope: f64) -> Result<Self> {
        let mut s = Self::new(m, 0.5, slope, 0.0)?;
        s.gamma = 0.0;
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn noise_eps(&self) -> f64 {
        self.noise_eps
    }

    pub fn with_noise(&self, noise_eps: f64) -> Result<Self> {
        let mut s = self.clone();
        if !(0.0..=0.1).contains(&noise_eps) {
            return Err(Error::Config(format!("noise must lie in [0, 0.1], got {noise_eps}")));
        }
        s.noise_eps = noise_eps;
        Ok(s)
    }

    /// Transverse expansion rate away from the diagonal.
    pub fn transverse_rate(&self) -> f64 {
        (1.0 - self.gamma) * self.slope
    }

    /// In-place step. No RNG draws happen when the noise is zero.
    pub fn step_in_place<R: Rng + ?Sized>(&self, x: &mut [f64], rng: &mut R) {
        debug_assert_eq!(x.len(), self.m);
        let mut sum = 0.0;
        for v in x.iter_mut() {
            *v = wrap_unit(self.slope * *v);
            sum += *v;
        }
        let mean_term = self.gamma / self.m as f64 * sum;
        let own = 1.0 - self.gamma;
        let eps = self.noise_eps;
        for v in x.iter_mut() {
            let eta = if eps > 0.0 { rng.random_range(-eps..=eps) } else { 0.0 };
            *v = wrap_unit(own * *v + mean_term + eta);
        }
    }
}

/// One step of the coupled lattice, returning the new state.
pub fn coupled_step<R: Rng + ?Sized>(f: &CoupledMapSystem, x: &[f64], rng: &mut R) -> Vec<f64> {
    let mut y = x.to_vec();
    f.step_in_place(&mut y, rng);
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    #[test]
    fn spec_examples() {
        let mut rng = stream(1, 0);
        let f = CoupledMapSystem::new(2, 0.5, 3.0, 0.0).unwrap();
        let y = coupled_step(&f, &[0.1, 0.2], &mut rng);
        assert!((y[0] - 0.375).abs() < 1e-15 && (y[1] - 0.525).abs() < 1e-15, "{y:?}");

        let f = CoupledMapSystem::new(4, 0.37, 3.0, 0.0).unwrap();
        let y = coupled_step(&f, &[0.3; 4], &mut rng);
        assert!(y.iter().all(|&v| v == y[0]));
        assert!((y[0] - 0.9).abs() < 1e-12);

        let f = CoupledMapSystem::uncoupled(3, 3.0).unwrap();
        let y = coupled_step(&f, &[0.1, 0.2, 0.3], &mut rng);
        for (a, b) in y.iter().zip([0.3, 0.6, 0.9]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        assert!(CoupledMapSystem::new(1, 0.1, 3.0, 0.0).is_err());
        assert!(CoupledMapSystem::new(2, 0.0, 3.0, 0.0).is_err());
        assert!(CoupledMapSystem::new(2, 1.0, 3.0, 0.0).is_err());
        assert!(CoupledMapSystem::new(2, 0.1, 1.0, 0.0).is_err());
        assert!(CoupledMapSystem::new(2, 0.1, 3.0, 0.2).is_err());
    }

    #[test]
    fn noise_is_bounded_and_seeded() {
        let f = CoupledMapSystem::new(3, 0.2, 3.0, 0.01).unwrap();
        let det = CoupledMapSystem::new(3, 0.2, 3.0, 0.0).unwrap();
        let x = [0.11, 0.52, 0.73];
        let y0 = coupled_step(&det, &x, &mut stream(0, 0));
        let a = coupled_step(&f, &x, &mut stream(9, 3));
        let b = coupled_step(&f, &x, &mut stream(9, 3));
        assert_eq!(a, b);
        for (u, v) in a.iter().zip(&y0) {
            assert!(crate::geometry::circle_distance(*u, *v) <= 0.01 + 1e-15);
        }
    }

    proptest! {
        #[test]
        fn expansion_away_from_diagonal(
            c in 0.0f64..1.0,
            gamma in 0.01f64..0.6,
            dir in prop::collection::vec(-1.0f64..1.0, 4),
        ) {
            let f = CoupledMapSystem::new(4, gamma, 3.0, 0.0).unwrap();
            let mean = dir.iter().sum::<f64>() / 4.0;
            let perp: Vec<f64> = dir.iter().map(|d| d - mean).collect();
            let norm = perp.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            prop_assume!(norm > 1e-3);
            let x: Vec<f64> = perp.iter().map(|p| wrap_unit(c + 1e-5 * p / norm)).collect();
            let y = coupled_step(&f, &x, &mut stream(0, 0));
            let dev = |z: &[f64]| {
                let z0 = z[0];
                let lift: Vec<f64> = z.iter().map(|v| z0 + crate::geometry::wrap_centered(v - z0)).collect();
                let m = lift.iter().sum::<f64>() / lift.len() as f64;
                lift.iter().fold(0.0f64, |a, v| a.max((v - m).abs()))
            };
            let ratio = dev(&y) / dev(&x);
            let rate = f.transverse_rate();
            prop_assert!((ratio - rate).abs() <= 0.01, "ratio {} rate {}", ratio, rate);
        }
    }
}
