//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string; errors come back
//! as a JS string. The same functions are callable natively for testing.

use hypex_core::config::{ExperimentConfig, SweepAxis, TheoryConfig};
use hypex_core::evt::{empirical_evl_curve, Estimator, EvlOptions, QConvention};
use hypex_core::experiment::run_experiment;
use hypex_core::observables::{DirectionSpec, ObservableSpec, SegmentSpec};
use hypex_core::systems::SystemSpec;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const CAT: [[i64; 2]; 2] = [[2, 1], [1, 1]];

fn base(system: SystemSpec, observable: ObservableSpec, n: usize, reps: usize, level: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: None,
        system,
        observable,
        n,
        n_realizations: reps,
        quantile_level: level,
        estimator: Estimator::Suveges { gap: 1, q_convention: QConvention::ExceedProb },
        seed,
        output: None,
        burn_in: 1_000,
        theory: TheoryConfig::default(),
        sweep: Vec::new(),
    }
}

fn direction(spec: &str) -> Result<DirectionSpec, String> {
    match spec.trim() {
        s @ ("v+" | "v-") => Ok(DirectionSpec::Named(s.to_string())),
        s => {
            let deg: f64 = s.parse().map_err(|_| format!("direction {s:?}: expected v+, v- or degrees"))?;
            let a = deg.to_radians();
            Ok(DirectionSpec::Vector([a.cos(), a.sin()]))
        }
    }
}

/// Prediction and Süveges estimates for a cat-map segment through `(cx, cy)`.
pub fn cat_theta_json(cx: f64, cy: f64, dir: &str, length: f64, n: usize, seed: u64) -> Result<String, String> {
    let obs = ObservableSpec::NegLogSegmentDist {
        segment: SegmentSpec { p1: None, center: Some([cx, cy]), direction: direction(dir)?, length },
    };
    let mut cfg = base(SystemSpec::Toral { matrix: CAT, noise: 0.0 }, obs, n, 8, 0.98, seed);
    // gap 2 separates two-step returns of period-2 points from new clusters
    cfg.estimator = Estimator::Suveges { gap: 2, q_convention: QConvention::ExceedProb };
    let res = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let p = &res.summary.points[0];
    let seg = cfg.compile().map_err(|e| e.to_string())?;
    let s = seg.observable.segment().expect("segment observable");
    let estimates: Vec<f64> = res.rows.iter().filter(|r| r.realization.is_some()).map(|r| r.theta).collect();
    Ok(json!({
        "segment": {"p1": s.p1(), "p2": s.p2()},
        "prediction": p.prediction,
        "estimates": estimates,
        "mean": p.mean_theta,
        "spread": p.spread,
    })
    .to_string())
}

/// Mean Süveges estimate against `1 - 1/((1 - gamma) slope)` over a gamma grid.
pub fn coupled_sweep_json(m: usize, slope: f64, noise: f64, n: usize, reps: usize, seed: u64) -> Result<String, String> {
    let gammas: Vec<f64> = (1..=9).map(|i| i as f64 * 0.05).filter(|g| (1.0 - g) * slope > 1.0).collect();
    if gammas.is_empty() {
        return Err(format!("slope {slope} gives no expanding gamma on the grid"));
    }
    let mut cfg = base(
        SystemSpec::Coupled { m, gamma: gammas[0], slope, noise },
        ObservableSpec::NegLogPerp,
        n,
        reps,
        0.95,
        seed,
    );
    cfg.sweep = vec![SweepAxis { parameter: "system.gamma".into(), values: gammas.iter().map(|g| json!(g)).collect() }];
    let res = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let points: Vec<Value> = gammas
        .iter()
        .zip(&res.summary.points)
        .map(|(g, p)| {
            json!({
                "gamma": g,
                "predicted": p.prediction.as_ref().map(|x| x.value),
                "mean": p.mean_theta,
                "spread": p.spread,
            })
        })
        .collect();
    Ok(json!({ "m": m, "slope": slope, "noise": noise, "points": points }).to_string())
}

/// Empirical `P(M_n <= u_n(tau))` for the transverse cat-map segment.
pub fn evl_curve_json(n: usize, reps: usize, seed: u64) -> Result<String, String> {
    let obs = ObservableSpec::NegLogSegmentDist {
        segment: SegmentSpec {
            p1: Some([0.137, 0.291]),
            center: None,
            direction: DirectionSpec::Combination { v_plus: 0.5, v_minus: 0.25 },
            length: 0.56,
        },
    };
    let cfg = base(SystemSpec::Toral { matrix: CAT, noise: 0.0 }, obs, n, reps, 0.98, seed);
    let c = cfg.compile().map_err(|e| e.to_string())?;
    let taus: Vec<f64> = (0..=12).map(|i| i as f64 * 0.25).collect();
    let opts = EvlOptions { calibration_len: 1_000_000, burn_in: 1_000 };
    let curve = empirical_evl_curve(&c.system, &c.observable, n, &taus, reps, seed, &opts).map_err(|e| e.to_string())?;
    let points: Vec<Value> = curve
        .iter()
        .map(|p| json!({"tau": p.tau, "p": p.probability, "stderr": p.stderr, "limit": (-p.tau).exp()}))
        .collect();
    Ok(json!({ "n": n, "realizations": reps, "points": points }).to_string())
}

#[wasm_bindgen]
pub fn cat_theta(cx: f64, cy: f64, dir: &str, length: f64, n: usize, seed: u32) -> Result<String, JsValue> {
    cat_theta_json(cx, cy, dir, length, n, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn coupled_sweep(m: usize, slope: f64, noise: f64, n: usize, reps: usize, seed: u32) -> Result<String, JsValue> {
    coupled_sweep_json(m, slope, noise, n, reps, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn evl_curve(n: usize, reps: usize, seed: u32) -> Result<String, JsValue> {
    evl_curve_json(n, reps, seed as u64).map_err(|e| JsValue::from_str(&e))
}
