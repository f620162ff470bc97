//! Sinai billiard on the unit torus with circular scatterers, as a collision map.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Scatterer {
    pub fn perimeter(&self) -> f64 {
        TAU * self.radius
    }
}

/// Point on the collision space: arclength `r` on a scatterer and outgoing angle
/// `theta` measured from the outward normal, positive towards the tangent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardState {
    pub scatterer_index: usize,
    pub r: f64,
    pub theta: f64,
}

pub const DEFAULT_MAX_FLIGHT: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BilliardTable {
    scatterers: Vec<Scatterer>,
    max_flight: f64,
    total_perimeter: f64,
}

/// Two scatterers per cell. The larger disk closes the diagonal corridors.
pub fn default_scatterers() -> Vec<Scatterer> {
    vec![
        Scatterer { center: [0.25, 0.25], radius: 0.4 },
        Scatterer { center: [0.75, 0.75], radius: 0.2 },
    ]
}

fn dist_torus_free(a: [f64; 2], b: [f64; 2], k: [i64; 2]) -> f64 {
    (a[0] - b[0] - k[0] as f64).hypot(a[1] - b[1] - k[1] as f64)
}

impl BilliardTable {
    pub fn new(scatterers: Vec<Scatterer>, max_flight: f64) -> Result<Self> {
        if scatterers.is_empty() {
            return Err(Error::Config("billiard table needs at least one scatterer".into()));
        }
        if !(max_flight > 0.0 && max_flight.is_finite()) {
            return Err(Error::Config(format!("max_flight must be positive, got {max_flight}")));
        }
        for (i, s) in scatterers.iter().enumerate() {
            if !(s.radius > 0.0 && s.radius < 0.5) {
                return Err(Error::Config(format!(
                    "scatterer {i}: radius must lie in (0, 0.5), got {}",
                    s.radius
                )));
            }
            if !s.center.iter().all(|c| (0.0..1.0).contains(c)) {
                return Err(Error::Config(format!("scatterer {i}: center must lie in [0,1)^2")));
            }
        }
        for i in 0..scatterers.len() {
            for j in i..scatterers.len() {
                let (a, b) = (scatterers[i], scatterers[j]);
                for kx in -1..=1 {
                    for ky in -1..=1 {
                        if i == j && kx == 0 && ky == 0 {
                            continue;
                        }
                        if dist_torus_free(a.center, b.center, [kx, ky]) <= a.radius + b.radius {
                            return Err(Error::Config(format!(
                                "scatterers {i} and {j} overlap (translate ({kx},{ky}))"
                            )));
                        }
                    }
                }
            }
        }
        let total_perimeter = scatterers.iter().map(Scatterer::perimeter).sum();
        Ok(Self { scatterers, max_flight, total_perimeter })
    }

    pub fn default_table() -> Self {
        Self::new(default_scatterers(), DEFAULT_MAX_FLIGHT).expect("default table is valid")
    }

    pub fn scatterers(&self) -> &[Scatterer] {
        &self.scatterers
    }

    pub fn max_flight(&self) -> f64 {
        self.max_flight
    }

    pub fn validate_state(&self, s: &BilliardState) -> Result<()> {
        let sc = self
            .scatterers
            .get(s.scatterer_index)
            .ok_or_else(|| Error::Domain(format!("no scatterer {}", s.scatterer_index)))?;
        if !(s.r >= 0.0 && s.r < sc.perimeter()) {
            return Err(Error::Domain(format!("arclength {} outside [0, {})", s.r, sc.perimeter())));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&s.theta) {
            return Err(Error::Domain(format!("angle {} outside [-pi/2, pi/2]", s.theta)));
        }
        Ok(())
    }

    /// Position on the base copy of the scatterer and the outgoing unit velocity.
    pub fn phase_to_ray(&self, s: &BilliardState) -> ([f64; 2], [f64; 2]) {
        let sc = &self.scatterers[s.scatterer_index];
        let alpha = s.r / sc.radius;
        let (sa, ca) = alpha.sin_cos();
        let n = [ca, sa];
        let t = [-sa, ca];
        let (st, ct) = s.theta.sin_cos();
        let pos = [sc.center[0] + sc.radius * ca, sc.center[1] + sc.radius * sa];
        (pos, [ct * n[0] + st * t[0], ct * n[1] + st * t[1]])
    }

    /// Next collision and the free flight length.
    pub fn step(&self, s: &BilliardState) -> Result<(BilliardState, f64)> {
        let (p, v) = self.phase_to_ray(s);
        let (j, shift, time) = self.first_hit(p, v, s.scatterer_index)?;
        let sc = &self.scatterers[j];
        let c = [sc.center[0] + shift[0] as f64, sc.center[1] + shift[1] as f64];
        let hit = [p[0] + time * v[0], p[1] + time * v[1]];
        let n = [(hit[0] - c[0]) / sc.radius, (hit[1] - c[1]) / sc.radius];
        let vn = v[0] * n[0] + v[1] * n[1];
        let w = [v[0] - 2.0 * vn * n[0], v[1] - 2.0 * vn * n[1]];
        let alpha = n[1].atan2(n[0]).rem_euclid(TAU);
        let t = [-n[1], n[0]];
        let theta = (w[0] * t[0] + w[1] * t[1])
            .atan2(w[0] * n[0] + w[1] * n[1])
            .clamp(-FRAC_PI_2, FRAC_PI_2);
        let mut r = alpha * sc.radius;
        if r >= sc.perimeter() {
            r = 0.0;
        }
        Ok((BilliardState { scatterer_index: j, r, theta }, time))
    }

    /// Cell-by-cell ray march; in each unit cell only disks centred in the
    /// surrounding 3x3 block can be met, since every radius is below 1/2.
    fn first_hit(&self, p: [f64; 2], v: [f64; 2], from: usize) -> Result<(usize, [i64; 2], f64)> {
        let mut cell = [p[0].floor() as i64, p[1].floor() as i64];
        let step = [if v[0] >= 0.0 { 1 } else { -1 }, if v[1] >= 0.0 { 1 } else { -1 }];
        let next_boundary = |c: i64, pos: f64, vel: f64| -> f64 {
            if vel > 0.0 {
                ((c + 1) as f64 - pos) / vel
            } else if vel < 0.0 {
                (c as f64 - pos) / vel
            } else {
                f64::INFINITY
            }
        };
        let mut t_max = [next_boundary(cell[0], p[0], v[0]), next_boundary(cell[1], p[1], v[1])];
        let t_delta = [1.0 / v[0].abs(), 1.0 / v[1].abs()];
        let mut t_enter = 0.0;
        loop {
            if t_enter > self.max_flight {
                return Err(Error::InfiniteHorizon { max_flight: self.max_flight });
            }
            let t_exit = t_max[0].min(t_max[1]);
            let mut best: Option<(usize, [i64; 2], f64)> = None;
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let shift = [cell[0] + dx, cell[1] + dy];
                    for (j, sc) in self.scatterers.iter().enumerate() {
                        if j == from && shift == [0, 0] {
                            continue;
                        }
                        let w = [
                            p[0] - sc.center[0] - shift[0] as f64,
                            p[1] - sc.center[1] - shift[1] as f64,
                        ];
                        let b = w[0] * v[0] + w[1] * v[1];
                        if b >= 0.0 {
                            continue;
                        }
                        let disc = b * b - (w[0] * w[0] + w[1] * w[1] - sc.radius * sc.radius);
                        if disc < 0.0 {
                            continue;
                        }
                        let s = -b - disc.sqrt();
                        if s > 0.0 && best.is_none_or(|(_, _, t)| s < t) {
                            best = Some((j, shift, s));
                        }
                    }
                }
            }
            if let Some(hit) = best {
                if hit.2 <= t_exit {
                    if hit.2 > self.max_flight {
                        return Err(Error::InfiniteHorizon { max_flight: self.max_flight });
                    }
                    return Ok(hit);
                }
            }
            t_enter = t_exit;
            if t_max[0] < t_max[1] {
                cell[0] += step[0];
                t_max[0] += t_delta[0];
            } else {
                cell[1] += step[1];
                t_max[1] += t_delta[1];
            }
        }
    }

    /// Sample from the invariant measure `cos(theta) dr dtheta`, normalised.
    pub fn sample_invariant<R: Rng + ?Sized>(&self, rng: &mut R) -> BilliardState {
        let mut u = rng.random::<f64>() * self.total_perimeter;
        let mut idx = self.scatterers.len() - 1;
        for (i, s) in self.scatterers.iter().enumerate() {
            if u < s.perimeter() {
                idx = i;
                break;
            }
            u -= s.perimeter();
        }
        let per = self.scatterers[idx].perimeter();
        let r = (rng.random::<f64>() * per).min(per * (1.0 - f64::EPSILON));
        let theta = (2.0 * rng.random::<f64>() - 1.0).asin();
        BilliardState { scatterer_index: idx, r, theta }
    }

    pub fn total_perimeter(&self) -> f64 {
        self.total_perimeter
    }
}

/// One collision of the billiard map.
pub fn billiard_step(table: &BilliardTable, s: &BilliardState) -> Result<BilliardState> {
    table.step(s).map(|(s, _)| s)
}

/// CDF of the invariant angle marginal, `(1 + sin theta) / 2`.
pub fn theta_cdf(theta: f64) -> f64 {
    (1.0 + theta.clamp(-FRAC_PI_2, FRAC_PI_2).sin()) / 2.0
}

/// Angular position on the scatterer, in `[-pi, pi)`, used for plotting.
pub fn angular_position(table: &BilliardTable, s: &BilliardState) -> f64 {
    let a = s.r / table.scatterers[s.scatterer_index].radius;
    (a + PI).rem_euclid(TAU) - PI
}
