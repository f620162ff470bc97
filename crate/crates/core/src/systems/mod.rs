//! The three system classes plus an i.i.d. surrogate, and trajectory generation.

pub mod billiard;
pub mod coupled;
pub mod periodic;
pub mod toral;
pub mod trajectory_io;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use billiard::{billiard_step, BilliardState, BilliardTable, Scatterer};
pub use coupled::{coupled_step, CoupledMapSystem};
pub use periodic::{find_periodic_points, segment_periodic_intersection, PeriodicHit};
pub use toral::{eigen_data, toral_step, EigenData, ToralAutomorphism};

use crate::error::{Error, Result};
use crate::geometry::{wrap_unit, TorusPoint};
use crate::observables::Observable;
use crate::rng::{stream, StreamRng};

fn cat_matrix() -> [[i64; 2]; 2] {
    [[2, 1], [1, 1]]
}

fn default_slope() -> f64 {
    3.0
}

fn default_coupled_noise() -> f64 {
    0.01
}

fn default_max_flight() -> f64 {
    billiard::DEFAULT_MAX_FLIGHT
}

/// Serializable description of a system, as it appears in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Toral {
        #[serde(default = "cat_matrix")]
        matrix: [[i64; 2]; 2],
        #[serde(default)]
        noise: f64,
    },
    Coupled {
        m: usize,
        gamma: f64,
        #[serde(default = "default_slope")]
        slope: f64,
        #[serde(default = "default_coupled_noise")]
        noise: f64,
    },
    Billiard {
        #[serde(default = "billiard::default_scatterers")]
        scatterers: Vec<Scatterer>,
        #[serde(default = "default_max_flight")]
        max_flight: f64,
    },
    /// Every step draws a fresh uniform point of `T^dim`.
    Iid { dim: usize },
}

impl SystemSpec {
    pub fn build(&self) -> Result<System> {
        match self {
            SystemSpec::Toral { matrix, noise } => {
                check_noise(*noise)?;
                Ok(System::Toral { map: ToralAutomorphism::new(*matrix)?, noise: *noise })
            }
            SystemSpec::Coupled { m, gamma, slope, noise } => {
                Ok(System::Coupled(CoupledMapSystem::new(*m, *gamma, *slope, *noise)?))
            }
            SystemSpec::Billiard { scatterers, max_flight } => {
                Ok(System::Billiard(BilliardTable::new(scatterers.clone(), *max_flight)?))
            }
            SystemSpec::Iid { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("iid surrogate needs dim >= 1".into()));
                }
                Ok(System::Iid { dim: *dim })
            }
        }
    }
}

fn check_noise(eps: f64) -> Result<()> {
    if !(0.0..=0.1).contains(&eps) {
        return Err(Error::Config(format!("noise must lie in [0, 0.1], got {eps}")));
    }
    Ok(())
}

/// A point of the phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateVector {
    Torus(TorusPoint),
    Billiard(BilliardState),
}

impl StateVector {
    pub fn as_torus(&self) -> Option<&[f64]> {
        match self {
            StateVector::Torus(p) => Some(p.coords()),
            StateVector::Billiard(_) => None,
        }
    }

    /// Flat numeric row used by trajectory files.
    pub fn to_row(&self) -> Vec<f64> {
        match self {
            StateVector::Torus(p) => p.coords().to_vec(),
            StateVector::Billiard(b) => vec![b.scatterer_index as f64, b.r, b.theta],
        }
    }
}

/// A validated, immutable system ready for iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum System {
    Toral { map: ToralAutomorphism, noise: f64 },
    Coupled(CoupledMapSystem),
    Billiard(BilliardTable),
    Iid { dim: usize },
}

impl System {
    pub fn cat_map() -> Self {
        System::Toral { map: ToralAutomorphism::cat_map(), noise: 0.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            System::Toral { .. } => "toral",
            System::Coupled(_) => "coupled",
            System::Billiard(_) => "billiard",
            System::Iid { .. } => "iid",
        }
    }

    /// Width of a trajectory row.
    pub fn state_dim(&self) -> usize {
        match self {
            System::Toral { .. } => 2,
            System::Coupled(c) => c.m(),
            System::Billiard(_) => 3,
            System::Iid { dim } => *dim,
        }
    }

    pub fn noise(&self) -> f64 {
        match self {
            System::Toral { noise, .. } => *noise,
            System::Coupled(c) => c.noise_eps(),
            _ => 0.0,
        }
    }

    /// The same system with the additive noise switched off.
    pub fn without_noise(&self) -> System {
        match self {
            System::Toral { map, .. } => System::Toral { map: map.clone(), noise: 0.0 },
            System::Coupled(c) => System::Coupled(c.with_noise(0.0).expect("zero noise is valid")),
            other => other.clone(),
        }
    }

    pub fn check_state(&self, x: &StateVector) -> Result<()> {
        match (self, x) {
            (System::Billiard(t), StateVector::Billiard(b)) => t.validate_state(b),
            (System::Billiard(_), _) => Err(Error::Domain("billiard needs a (r, theta) state".into())),
            (_, StateVector::Torus(p)) if p.dim() == self.state_dim() => Ok(()),
            _ => Err(Error::Domain(format!(
                "{} system needs a point of T^{}",
                self.name(),
                self.state_dim()
            ))),
        }
    }

    /// Draw from the invariant measure: Haar measure on tori, `cos theta dr dtheta` on billiards.
    pub fn sample_invariant<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector {
        match self {
            System::Billiard(t) => StateVector::Billiard(t.sample_invariant(rng)),
            _ => StateVector::Torus(uniform_point(self.state_dim(), rng)),
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, x: &mut StateVector, rng: &mut R) -> Result<()> {
        match (self, x) {
            (System::Toral { map, noise }, StateVector::Torus(p)) => {
                let c = p.coords_mut();
                let mut y = map.step_xy([c[0], c[1]]);
                if *noise > 0.0 {
                    for v in &mut y {
                        *v = wrap_unit(*v + rng.random_range(-*noise..=*noise));
                    }
                }
                c.copy_from_slice(&y);
                Ok(())
            }
            (System::Coupled(f), StateVector::Torus(p)) => {
                f.step_in_place(p.coords_mut(), rng);
                Ok(())
            }
            (System::Billiard(t), StateVector::Billiard(b)) => {
                *b = t.step(b)?.0;
                Ok(())
            }
            (System::Iid { .. }, StateVector::Torus(p)) => {
                for v in p.coords_mut() {
                    *v = rng.random::<f64>();
                }
                Ok(())
            }
            (s, x) => s.check_state(x),
        }
    }
}

fn uniform_point<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> TorusPoint {
    TorusPoint::from_wrapped((0..dim).map(|_| rng.random::<f64>()).collect())
}

/// `(phi(x0), phi(T x0), ..., phi(T^{n-1} x0))` driven by an explicit RNG.
pub fn generate_series_with(
    system: &System,
    x0: StateVector,
    n: usize,
    obs: &Observable,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Domain("series length must be at least 1".into()));
    }
    system.check_state(&x0)?;
    obs.check_state(&x0)?;
    let mut x = x0;
    let mut out = Vec::with_capacity(n);
    out.push(obs.eval(&x));
    for _ in 1..n {
        system.step(&mut x, rng)?;
        out.push(obs.eval(&x));
    }
    Ok(out)
}

/// Observable series from `x0`; the noise stream is stream 0 of `seed`.
pub fn generate_series(
    system: &System,
    x0: StateVector,
    n: usize,
    obs: &Observable,
    seed: u64,
) -> Result<Vec<f64>> {
    generate_series_with(system, x0, n, obs, &mut stream(seed, 0))
}

/// One realization: a random initial condition from the invariant measure, a burn-in,
/// then `n` observations. Initial condition and noise share the RNG stream.
pub fn realization_series(
    system: &System,
    obs: &Observable,
    n: usize,
    burn_in: usize,
    rng: &mut StreamRng,
) -> Result<Vec<f64>> {
    let mut x = system.sample_invariant(rng);
    for _ in 0..burn_in {
        system.step(&mut x, rng)?;
    }
    generate_series_with(system, x, n, obs, rng)
}

/// Raw orbit, one row per state.
pub fn orbit(
    system: &System,
    x0: StateVector,
    n: usize,
    rng: &mut StreamRng,
) -> Result<trajectory_io::Trajectory> {
    system.check_state(&x0)?;
    let mut x = x0;
    let mut data = Vec::with_capacity(n * system.state_dim());
    for i in 0..n {
        if i > 0 {
            system.step(&mut x, rng)?;
        }
        data.extend(x.to_row());
    }
    trajectory_io::Trajectory::new(system.state_dim(), data)
}
