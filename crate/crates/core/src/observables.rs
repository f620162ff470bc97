//! Observables maximized on an extremal set.
//!
//! `+inf` is the sentinel value on the extremal set itself; it exceeds every
//! finite threshold. States that cannot approach the extremal set (a billiard
//! state on a different scatterer) evaluate to `-inf`.
//!
//! For two coupled sites, `NegLogPerp` equals `-log|x - y| + log 2`: the
//! deviation from the mean is half the gap. The constant shifts thresholds and
//! leaves the extremal index unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segment_distance_xy, wrap_centered, LineSegment};
use crate::systems::{StateVector, System};

/// Direction of a configured segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    /// `"v+"` or `"v-"`, the eigendirections of the toral map.
    Named(String),
    Vector([f64; 2]),
    /// `a v+ + b v-`.
    Combination { v_plus: f64, v_minus: f64 },
}

/// Segment as written in config: either `p1` or `center`, a direction and a length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    pub direction: DirectionSpec,
    pub length: f64,
}

impl SegmentSpec {
    pub fn resolve(&self, system: &System) -> Result<LineSegment> {
        let eig = |which: &str| -> Result<([f64; 2], [f64; 2])> {
            match system {
                System::Toral { map, .. } => Ok((map.v_plus(), map.v_minus())),
                _ => Err(Error::Config(format!(
                    "direction {which} needs a toral system, have {}",
                    system.name()
                ))),
            }
        };
        let dir = match &self.direction {
            DirectionSpec::Vector(v) => *v,
            DirectionSpec::Named(s) => match s.as_str() {
                "v+" => eig("v+")?.0,
                "v-" => eig("v-")?.1,
                other => {
                    return Err(Error::Config(format!(
                        "unknown direction {other:?}, expected \"v+\", \"v-\" or a vector"
                    )))
                }
            },
            DirectionSpec::Combination { v_plus, v_minus } => {
                let (p, m) = eig("combination")?;
                [v_plus * p[0] + v_minus * m[0], v_plus * p[1] + v_minus * m[1]]
            }
        };
        match (self.p1, self.center) {
            (Some(p1), None) => LineSegment::new(p1, dir, self.length),
            (None, Some(c)) => LineSegment::centered(c, dir, self.length),
            _ => Err(Error::Config("segment needs exactly one of p1 or center".into())),
        }
    }
}

/// Observable as written in config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    NegLogSegmentDist {
        segment: SegmentSpec,
    },
    /// On billiards the segment lives in `(r, theta)` coordinates of `scatterer` (0-based).
    OneMinusSegmentDist {
        segment: SegmentSpec,
        #[serde(default)]
        scatterer: usize,
    },
    NegLogPerp,
    /// Blocks are 1-based site indices.
    NegLogBlockPerp {
        blocks: Vec<Vec<usize>>,
    },
}

/// A compiled observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Observable {
    NegLogSegment(LineSegment),
    OneMinusSegment(LineSegment),
    /// Segment in `(r, theta)` on one scatterer, `r` periodic with the perimeter.
    OneMinusBilliardSegment { segment: LineSegment, scatterer: usize, perimeter: f64 },
    NegLogPerp,
    /// 0-based blocks.
    NegLogBlockPerp(Vec<Vec<usize>>),
}

impl ObservableSpec {
    pub fn build(&self, system: &System) -> Result<Observable> {
        let torus2 = |what: &str| -> Result<()> {
            match system {
                System::Toral { .. } => Ok(()),
                System::Iid { dim: 2 } => Ok(()),
                _ => Err(Error::Config(format!(
                    "{what} needs a system on the 2-torus, have {}",
                    system.name()
                ))),
            }
        };
        match self {
            ObservableSpec::NegLogSegmentDist { segment } => {
                torus2("NegLogSegmentDist")?;
                Ok(Observable::NegLogSegment(segment.resolve(system)?))
            }
            ObservableSpec::OneMinusSegmentDist { segment, scatterer } => match system {
                System::Billiard(t) => {
                    let sc = t.scatterers().get(*scatterer).ok_or_else(|| {
                        Error::Config(format!("no scatterer {scatterer} on this table"))
                    })?;
                    Ok(Observable::OneMinusBilliardSegment {
                        segment: segment.resolve(system)?,
                        scatterer: *scatterer,
                        perimeter: sc.perimeter(),
                    })
                }
                _ => {
                    torus2("OneMinusSegmentDist")?;
                    Ok(Observable::OneMinusSegment(segment.resolve(system)?))
                }
            },
            ObservableSpec::NegLogPerp => {
                if system.state_dim() < 2 || matches!(system, System::Billiard(_)) {
                    return Err(Error::Config("NegLogPerp needs a lattice of m >= 2 sites".into()));
                }
                Ok(Observable::NegLogPerp)
            }
            ObservableSpec::NegLogBlockPerp { blocks } => {
                if matches!(system, System::Billiard(_)) {
                    return Err(Error::Config("NegLogBlockPerp needs a lattice system".into()));
                }
                Ok(Observable::NegLogBlockPerp(validate_blocks(blocks, system.state_dim())?))
            }
        }
    }
}

/// Checks a 1-based partition and converts it to 0-based indices.
pub fn validate_blocks(blocks: &[Vec<usize>], m: usize) -> Result<Vec<Vec<usize>>> {
    if blocks.is_empty() {
        return Err(Error::Config("NegLogBlockPerp needs at least one block".into()));
    }
    let mut seen = vec![false; m];
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        if b.len() < 2 {
            return Err(Error::Config(format!("block {b:?} has fewer than 2 sites")));
        }
        let mut zb = Vec::with_capacity(b.len());
        for &i in b {
            if i == 0 || i > m {
                return Err(Error::Config(format!("site {i} outside 1..={m}")));
            }
            if std::mem::replace(&mut seen[i - 1], true) {
                return Err(Error::Config(format!("site {i} appears in two blocks")));
            }
            zb.push(i - 1);
        }
        out.push(zb);
    }
    Ok(out)
}

/// Largest deviation from the block mean, with sites lifted next to the first one.
fn block_deviation(x: &[f64], idx: impl Iterator<Item = usize> + Clone) -> f64 {
    let mut it = idx.clone();
    let Some(first) = it.next() else { return 0.0 };
    let x0 = x[first];
    let mut k = 0usize;
    let mut sum = 0.0;
    for i in idx.clone() {
        sum += wrap_centered(x[i] - x0);
        k += 1;
    }
    let mean = sum / k as f64;
    idx.fold(0.0f64, |acc, i| acc.max((wrap_centered(x[i] - x0) - mean).abs()))
}

/// Distance in `(r, theta)` with `r` periodic of period `per`.
fn billiard_segment_distance(r: f64, theta: f64, seg: &LineSegment, per: f64) -> f64 {
    let p1 = seg.p1();
    let d = seg.direction();
    let l = seg.length();
    let base = r - p1[0] - per * ((r - p1[0]) / per).round();
    let reach = (l / per).ceil() as i64 + 1;
    let mut best = f64::INFINITY;
    for k in -reach..=reach {
        let w = [base + k as f64 * per, theta - p1[1]];
        let t = (w[0] * d[0] + w[1] * d[1]).clamp(0.0, l);
        best = best.min((w[0] - t * d[0]).hypot(w[1] - t * d[1]));
    }
    best
}

impl Observable {
    pub fn name(&self) -> &'static str {
        match self {
            Observable::NegLogSegment(_) => "NegLogSegmentDist",
            Observable::OneMinusSegment(_) | Observable::OneMinusBilliardSegment { .. } => {
                "OneMinusSegmentDist"
            }
            Observable::NegLogPerp => "NegLogPerp",
            Observable::NegLogBlockPerp(_) => "NegLogBlockPerp",
        }
    }

    pub fn segment(&self) -> Option<&LineSegment> {
        match self {
            Observable::NegLogSegment(s)
            | Observable::OneMinusSegment(s)
            | Observable::OneMinusBilliardSegment { segment: s, .. } => Some(s),
            _ => None,
        }
    }

    pub fn check_state(&self, x: &StateVector) -> Result<()> {
        let ok = match (self, x) {
            (Observable::OneMinusBilliardSegment { .. }, StateVector::Billiard(_)) => true,
            (Observable::NegLogSegment(_) | Observable::OneMinusSegment(_), StateVector::Torus(p)) => {
                p.dim() == 2
            }
            (Observable::NegLogPerp, StateVector::Torus(p)) => p.dim() >= 2,
            (Observable::NegLogBlockPerp(b), StateVector::Torus(p)) => {
                b.iter().flatten().all(|&i| i < p.dim())
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("{} cannot be evaluated on {x:?}", self.name())))
        }
    }

    /// The distance-like quantity whose small values make the observable large.
    pub fn distance(&self, x: &StateVector) -> f64 {
        match (self, x) {
            (Observable::NegLogSegment(s) | Observable::OneMinusSegment(s), StateVector::Torus(p)) => {
                let c = p.coords();
                segment_distance_xy([c[0], c[1]], s)
            }
            (
                Observable::OneMinusBilliardSegment { segment, scatterer, perimeter },
                StateVector::Billiard(b),
            ) => {
                if b.scatterer_index != *scatterer {
                    f64::INFINITY
                } else {
                    billiard_segment_distance(b.r, b.theta, segment, *perimeter)
                }
            }
            (Observable::NegLogPerp, StateVector::Torus(p)) => {
                block_deviation(p.coords(), 0..p.dim())
            }
            (Observable::NegLogBlockPerp(blocks), StateVector::Torus(p)) => blocks
                .iter()
                .map(|b| block_deviation(p.coords(), b.iter().copied()))
                .fold(0.0, f64::max),
            _ => f64::NAN,
        }
    }

    /// Converts a distance into the observable value.
    pub fn from_distance(&self, d: f64) -> f64 {
        match self {
            Observable::OneMinusSegment(_) | Observable::OneMinusBilliardSegment { .. } => {
                if d == 0.0 {
                    f64::INFINITY
                } else {
                    1.0 - d
                }
            }
            _ => -d.ln(),
        }
    }

    /// The distance at which the observable equals `u`.
    pub fn distance_at(&self, u: f64) -> f64 {
        match self {
            Observable::OneMinusSegment(_) | Observable::OneMinusBilliardSegment { .. } => 1.0 - u,
            _ => (-u).exp(),
        }
    }

    pub fn eval(&self, x: &StateVector) -> f64 {
        self.from_distance(self.distance(x))
    }
}

/// Evaluates an observable on a state.
pub fn eval(obs: &Observable, x: &StateVector) -> f64 {
    obs.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TorusPoint;
    use crate::systems::{BilliardState, SystemSpec};
    use proptest::prelude::*;

    fn torus(c: &[f64]) -> StateVector {
        StateVector::Torus(TorusPoint::new(c.to_vec()).unwrap())
    }

    #[test]
    fn perp_examples() {
        assert_eq!(eval(&Observable::NegLogPerp, &torus(&[0.3, 0.3])), f64::INFINITY);
        let v = eval(&Observable::NegLogPerp, &torus(&[0.25, 0.75]));
        assert!((v - 4f64.ln()).abs() < 1e-12 && (v - 1.3863).abs() < 1e-4);
        let obs = Observable::NegLogBlockPerp(validate_blocks(&[vec![1, 2, 3], vec![4, 5]], 5).unwrap());
        let v = eval(&obs, &torus(&[0.1, 0.1, 0.1, 0.4, 0.5]));
        assert!((v - 2.9957).abs() < 1e-4);
        // the plane x1 = x2 = x3 is attained even when the other block is far apart
        let v = eval(&obs, &torus(&[0.7, 0.7, 0.7, 0.4, 0.4]));
        assert_eq!(v, f64::INFINITY);
    }

    #[test]
    fn segment_forms() {
        let seg = LineSegment::new([0.0, 0.0], [1.0, 0.0], 0.25).unwrap();
        let x = torus(&[0.95, 0.0]);
        let a = eval(&Observable::NegLogSegment(seg), &x);
        let b = eval(&Observable::OneMinusSegment(seg), &x);
        assert!((a + 0.05f64.ln()).abs() < 1e-12 && (b - 0.95).abs() < 1e-12);
        assert_eq!(eval(&Observable::OneMinusSegment(seg), &torus(&[0.1, 0.0])), f64::INFINITY);
    }

    #[test]
    fn block_validation() {
        assert!(validate_blocks(&[vec![1]], 3).is_err());
        assert!(validate_blocks(&[vec![1, 2], vec![2, 3]], 3).is_err());
        assert!(validate_blocks(&[vec![0, 1]], 3).is_err());
        assert!(validate_blocks(&[vec![1, 4]], 3).is_err());
        assert!(validate_blocks(&[], 3).is_err());
        assert_eq!(validate_blocks(&[vec![3, 1]], 3).unwrap(), vec![vec![2, 0]]);
    }

    #[test]
    fn spec_parsing_and_resolution() {
        let cat = SystemSpec::Toral { matrix: [[2, 1], [1, 1]], noise: 0.0 }.build().unwrap();
        let spec: ObservableSpec = toml::from_str(
            "kind = \"neg_log_segment_dist\"\n[segment]\ncenter = [0.2, 0.4]\ndirection = \"v+\"\nlength = 0.5",
        )
        .unwrap();
        let obs = spec.build(&cat).unwrap();
        let seg = obs.segment().unwrap();
        let System::Toral { map, .. } = &cat else { unreachable!() };
        assert!((seg.direction()[0] - map.v_plus()[0]).abs() < 1e-15);
        assert!((seg.point_at(0.25)[0] - 0.2).abs() < 1e-12);

        let spec: ObservableSpec = toml::from_str(
            "kind = \"neg_log_segment_dist\"\n[segment]\np1 = [0.1, 0.2]\ndirection = { v_plus = 0.5, v_minus = 0.25 }\nlength = 0.3",
        )
        .unwrap();
        assert!(spec.build(&cat).is_ok());
        let coupled = SystemSpec::Coupled { m: 3, gamma: 0.1, slope: 3.0, noise: 0.0 }.build().unwrap();
        assert!(spec.build(&coupled).is_err());
        let bad: ObservableSpec = toml::from_str(
            "kind = \"neg_log_segment_dist\"\n[segment]\np1 = [0.1, 0.2]\ndirection = \"sideways\"\nlength = 0.3",
        )
        .unwrap();
        assert!(matches!(bad.build(&cat), Err(Error::Config(_))));
        let blocks: ObservableSpec =
            toml::from_str("kind = \"neg_log_block_perp\"\nblocks = [[1, 2], [3, 5]]").unwrap();
        assert!(blocks.build(&coupled).is_err());
        assert!(toml::from_str::<ObservableSpec>("kind = \"neg_log_perp\"").unwrap().build(&coupled).is_ok());
    }

    #[test]
    fn billiard_segment() {
        let table = SystemSpec::Billiard {
            scatterers: crate::systems::billiard::default_scatterers(),
            max_flight: 10.0,
        }
        .build()
        .unwrap();
        let spec: ObservableSpec = toml::from_str(
            "kind = \"one_minus_segment_dist\"\nscatterer = 1\n[segment]\np1 = [0.1, -1.5707963267948966]\ndirection = [0.0, 1.0]\nlength = 3.141592653589793",
        )
        .unwrap();
        let obs = spec.build(&table).unwrap();
        let per = std::f64::consts::TAU * 0.2;
        let at = |i, r, theta| eval(&obs, &StateVector::Billiard(BilliardState { scatterer_index: i, r, theta }));
        assert!((at(1, 0.3, 0.4) - 0.8).abs() < 1e-12);
        // r is periodic: per - 0.05 is 0.15 away from r0 = 0.1
        assert!((at(1, per - 0.05, 0.0) - 0.85).abs() < 1e-12);
        assert_eq!(at(0, 0.1, 0.0), f64::NEG_INFINITY);
        assert_eq!(at(1, 0.1, 1.0), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn perp_rotation_invariant(x in prop::collection::vec(0.0f64..1.0, 2..7), c in 0.0f64..1.0) {
            let rot: Vec<f64> = x.iter().map(|v| crate::geometry::wrap_unit(v + c)).collect();
            let a = eval(&Observable::NegLogPerp, &torus(&x));
            let b = eval(&Observable::NegLogPerp, &torus(&rot));
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{} vs {}", a, b);
        }

        #[test]
        fn two_site_perp_is_half_gap(x in 0.0f64..1.0, y in 0.0f64..1.0) {
            prop_assume!(crate::geometry::circle_distance(x, y) > 1e-9);
            let a = eval(&Observable::NegLogPerp, &torus(&[x, y]));
            let gap = crate::geometry::circle_distance(x, y);
            prop_assert!((a - (-(gap.ln()) + 2f64.ln())).abs() < 1e-9);
        }

        #[test]
        fn level_sets_nested(
            x in prop::collection::vec(0.0f64..1.0, 2),
            y in prop::collection::vec(0.0f64..1.0, 2),
            u1 in 0.0f64..4.0, du in 0.0f64..2.0,
        ) {
            let seg = LineSegment::new([0.3, 0.1], [0.6, 0.8], 0.7).unwrap();
            for obs in [Observable::NegLogSegment(seg), Observable::OneMinusSegment(seg)] {
                let (a, b) = (torus(&x), torus(&y));
                // the observable is a decreasing function of the distance
                if obs.distance(&a) < obs.distance(&b) {
                    prop_assert!(obs.eval(&a) > obs.eval(&b));
                }
                let u2 = u1 + du;
                for p in [&a, &b] {
                    if obs.eval(p) > u2 {
                        prop_assert!(obs.eval(p) > u1);
                        prop_assert!(obs.distance(p) < obs.distance_at(u1) + 1e-15);
                    }
                }
            }
        }
    }
}
