//! Closed-form extremal index predictions.
//!
//! For segments aligned with an eigendirection whose line continuation meets a
//! periodic point `z` of prime period `q`, write `a < b` for the signed line
//! parameters of the segment ends measured from `z` and `L = lambda^q`. The
//! point value is the escaping fraction of the segment under the linearized
//! return map:
//!
//! * unstable: `1 - |[a,b] ∩ [a/L, b/L]| / (b - a)`,
//! * stable: `1 - |[a,b] ∩ [L a, L b]| / (L (b - a))`.
//!
//! Both reduce to `1 - 1/L` when `z` lies on the segment and to 1 when the
//! return misses it. The stable value is reported together with the
//! expression `1 - (b - a/L) / (L (b - a))`, which can fall below `1 - 1/L`.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{classify_alignment, AlignmentTag, LineSegment};
use crate::observables::Observable;
use crate::systems::{segment_periodic_intersection, System, ToralAutomorphism};

pub const DEFAULT_Q_MAX: u32 = 12;
pub const DEFAULT_ALIGNMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaPrediction {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub case_label: String,
    /// The classification rests on a search bounded by `q_max`.
    pub inconclusive: bool,
    pub detail: Map<String, Value>,
}

impl ThetaPrediction {
    fn point(value: f64, label: &str, detail: Value) -> Self {
        ThetaPrediction {
            value,
            lo: value,
            hi: value,
            case_label: label.to_string(),
            inconclusive: false,
            detail: into_map(detail),
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo - 1e-15 && theta <= self.hi + 1e-15
    }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Escaping fraction for the unstable alignment; `a < b` measured from the periodic point.
pub fn unstable_overlap_theta(a: f64, b: f64, big_lambda: f64) -> f64 {
    let (a, b) = if b <= 0.0 { (-b, -a) } else { (a, b) };
    1.0 - overlap((a, b), (a / big_lambda, b / big_lambda)) / (b - a)
}

/// Escaping fraction for the stable alignment.
pub fn stable_overlap_theta(a: f64, b: f64, big_lambda: f64) -> f64 {
    let (a, b) = if b <= 0.0 { (-b, -a) } else { (a, b) };
    1.0 - overlap((a, b), (big_lambda * a, big_lambda * b)) / (big_lambda * (b - a))
}

/// The stable-case expression as displayed in the source argument, for comparison only.
pub fn stable_displayed_theta(a: f64, b: f64, big_lambda: f64) -> f64 {
    let (a, b) = if b <= 0.0 { (-b, -a) } else { (a, b) };
    if big_lambda * a >= b {
        return 1.0;
    }
    1.0 - (b - a / big_lambda).abs() / (big_lambda * (b - a))
}

/// Prediction for `-log d(x, L)` under a hyperbolic toral automorphism.
pub fn predict_theta_toral(map: &ToralAutomorphism, seg: &LineSegment, q_max: u32) -> Result<ThetaPrediction> {
    predict_theta_toral_with(map, seg, q_max, DEFAULT_ALIGNMENT_TOL)
}

pub fn predict_theta_toral_with(
    map: &ToralAutomorphism,
    seg: &LineSegment,
    q_max: u32,
    tol: f64,
) -> Result<ThetaPrediction> {
    let class = classify_alignment(seg, map.v_plus(), map.v_minus(), tol)?;
    let lambda = map.lambda_plus();
    let base = json!({
        "lambda": lambda,
        "alignment": class.tag,
        "angle_to_eigendirection": class.angle_to_eigendirection,
        "p1": seg.p1(),
        "direction": seg.direction(),
        "length": seg.length(),
        "q_max": q_max,
    });
    let mut base = into_map(base);
    if class.tag == AlignmentTag::Transverse {
        if class.angle_to_eigendirection < 1e3 * tol {
            log::warn!(
                "segment is within {:.3e} rad of an eigendirection, treated as transverse",
                class.angle_to_eigendirection
            );
        }
        return Ok(ThetaPrediction::point(1.0, "Thm2.1-case1", Value::Object(base)));
    }
    let unstable = class.tag == AlignmentTag::Unstable;
    let Some(hit) = segment_periodic_intersection(seg, map, q_max)? else {
        base.insert("note".into(), json!(format!("no periodic point on the line up to period {q_max}")));
        let label = if unstable { "Thm2.1-case2" } else { "Thm2.1-case3" };
        let mut p = ThetaPrediction::point(1.0, label, Value::Object(base));
        p.inconclusive = true;
        return Ok(p);
    };
    let big = lambda.powi(hit.q as i32);
    let a = -hit.t;
    let b = seg.length() - hit.t;
    base.insert("q".into(), json!(hit.q));
    base.insert("periodic_point".into(), json!([hit.point.numer, hit.point.denom]));
    base.insert("a".into(), json!(a));
    base.insert("b".into(), json!(b));
    let floor = 1.0 - 1.0 / big;
    if hit.on_segment {
        return Ok(ThetaPrediction::point(floor, "Thm2.1-case4", Value::Object(base)));
    }
    let (label, value) = if unstable {
        ("Thm2.1-case5", unstable_overlap_theta(a, b, big))
    } else {
        let displayed = stable_displayed_theta(a, b, big);
        let v = stable_overlap_theta(a, b, big);
        base.insert("displayed_formula_value".into(), json!(displayed));
        base.insert("formula_discrepancy".into(), json!(displayed - v));
        ("Thm2.1-case6", v)
    };
    let returns = value < 1.0;
    base.insert("return_overlaps".into(), json!(returns));
    let mut p = ThetaPrediction::point(value, label, Value::Object(base));
    if returns {
        p.lo = floor;
        p.hi = 1.0;
    }
    Ok(p)
}

fn check_coupled(gamma: f64, slope: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::Config(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    if !(slope > 1.0) {
        return Err(Error::Config(format!("slope must exceed 1, got {slope}")));
    }
    let rate = (1.0 - gamma) * slope;
    if rate <= 1.0 {
        return Err(Error::Config(format!(
            "(1 - gamma) slope = {rate} <= 1: no expansion transverse to the synchrony set"
        )));
    }
    Ok(rate)
}

/// `1 - ((1 - gamma) slope)^-(k - 1)`, with `k = m` for full synchronization.
pub fn predict_theta_coupled(
    m: usize,
    gamma: f64,
    slope: f64,
    block_size: Option<usize>,
) -> Result<ThetaPrediction> {
    if m < 2 {
        return Err(Error::Config(format!("m must be at least 2, got {m}")));
    }
    match block_size {
        None => {
            let rate = check_coupled(gamma, slope)?;
            let e = (m - 1) as i32;
            Ok(ThetaPrediction::point(
                1.0 - rate.powi(-e),
                "Thm2.3",
                json!({"m": m, "gamma": gamma, "slope": slope, "exponent": e, "rate": rate}),
            ))
        }
        Some(k) => {
            if !(2..=m).contains(&k) {
                return Err(Error::Config(format!("block size {k} outside 2..={m}")));
            }
            predict_theta_blocks(m, gamma, slope, &[k])
        }
    }
}

/// Several synchronized blocks: the exponent is `sum (k_i - 1)`.
pub fn predict_theta_blocks(m: usize, gamma: f64, slope: f64, sizes: &[usize]) -> Result<ThetaPrediction> {
    let rate = check_coupled(gamma, slope)?;
    if sizes.is_empty() || sizes.iter().any(|k| *k < 2) || sizes.iter().sum::<usize>() > m {
        return Err(Error::Config(format!("block sizes {sizes:?} do not fit a lattice of {m}")));
    }
    let e: usize = sizes.iter().map(|k| k - 1).sum();
    Ok(ThetaPrediction::point(
        1.0 - rate.powi(-(e as i32)),
        "Thm2.4",
        json!({"m": m, "gamma": gamma, "slope": slope, "block_sizes": sizes, "exponent": e, "rate": rate}),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilliardAlignment {
    Transverse,
    Stable,
    Unstable,
}

pub fn predict_theta_billiard(alignment: BilliardAlignment) -> Result<ThetaPrediction> {
    match alignment {
        BilliardAlignment::Transverse => {
            Ok(ThetaPrediction::point(1.0, "Thm2.2", json!({"alignment": "transverse"})))
        }
        other => Err(Error::UnsupportedSystem(format!(
            "billiard segments in a {other:?} cone have no proven extremal index"
        ))),
    }
}

/// Tolerances and switches for [`predict_for`].
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryOptions {
    pub q_max: u32,
    pub alignment_tol: f64,
    pub billiard_alignment: BilliardAlignment,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            q_max: DEFAULT_Q_MAX,
            alignment_tol: DEFAULT_ALIGNMENT_TOL,
            billiard_alignment: BilliardAlignment::Transverse,
        }
    }
}

/// Dispatches on the system and observable.
pub fn predict_for(system: &System, obs: &Observable, opts: &TheoryOptions) -> Result<ThetaPrediction> {
    match (system, obs) {
        (System::Toral { map, .. }, Observable::NegLogSegment(s) | Observable::OneMinusSegment(s)) => {
            predict_theta_toral_with(map, s, opts.q_max, opts.alignment_tol)
        }
        (System::Coupled(c), Observable::NegLogPerp) => {
            predict_theta_coupled(c.m(), c.gamma(), c.slope(), None)
        }
        (System::Coupled(c), Observable::NegLogBlockPerp(blocks)) => {
            let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
            predict_theta_blocks(c.m(), c.gamma(), c.slope(), &sizes)
        }
        (System::Billiard(_), Observable::OneMinusBilliardSegment { .. }) => {
            predict_theta_billiard(opts.billiard_alignment)
        }
        (System::Iid { .. }, _) => Ok(ThetaPrediction::point(1.0, "iid", json!({}))),
        _ => Err(Error::UnsupportedSystem(format!(
            "no prediction for {} with {}",
            system.name(),
            obs.name()
        ))),
    }
}
