//! Three interactive operations for the static page in `www/`. Each returns a
//! JSON string; the `wasm_bindgen` wrappers turn errors into JS exceptions.

use num_traits::ToPrimitive;
use serde_json::json;
use wasm_bindgen::prelude::*;

use sandwich_core::coupling::{build_optimal_coupling, strassen_deficiency, Relation, ThresholdFunctions};
use sandwich_core::enumeration::{exact_model_distribution, ExactModel};
use sandwich_core::models::{ModelSpec, DEFAULT_REJECTION_CAP};
use sandwich_core::stats::{multigraph_census, tv_exact};
use sandwich_core::{graph::write_multigraph, RngStream};

/// Samples of `f1`, `f2`, `f` and `g` on `points` evenly spaced `x` in `[lo, hi]`.
pub fn threshold_curves(lo: f64, hi: f64, points: usize) -> Result<String, String> {
    if !(lo >= 1.0 && hi > lo) || !(2..=5000).contains(&points) {
        return Err("need 1 <= lo < hi and 2 <= points <= 5000".into());
    }
    let t = ThresholdFunctions::default();
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let e = |r: sandwich_core::Result<f64>| r.map_err(|e| e.to_string());
        rows.push(json!({ "x": x, "f1": e(t.f1(x))?, "f2": e(t.f2(x))?, "f": e(t.f(x))?, "g": e(t.g(x))? }));
    }
    Ok(json!({ "points": rows }).to_string())
}

/// One sample of a model with its census and text form.
pub fn sample_census(model: &str, n: usize, d: usize, p: f64, seed: u64) -> Result<String, String> {
    if n > 2000 {
        return Err("n is limited to 2000 in the demo".into());
    }
    let spec = ModelSpec::from_name(model, n, Some(d), Some(p), Some(1)).map_err(|e| e.to_string())?;
    let g = spec.sample(DEFAULT_REJECTION_CAP, &mut RngStream::new(seed, 0)).map_err(|e| e.to_string())?;
    let text = if n <= 64 { Some(write_multigraph(&g)) } else { None };
    Ok(json!({ "model": spec.name(), "census": multigraph_census(&g), "graph": text }).to_string())
}

fn exact_model(name: &str, extra: usize) -> Result<ExactModel, String> {
    Ok(match name {
        "pairing" => ExactModel::Pairing,
        "loopless-pairing" => ExactModel::LooplessPairing,
        "matching-superpose" => ExactModel::MatchingSuperpose,
        "matching-union" => ExactModel::MatchingUnion,
        "grd" => ExactModel::Grd,
        "pairing-plus-matchings" => ExactModel::PairingPlusMatchings { j: extra },
        other => return Err(format!("unknown exact model {other}")),
    })
}

/// Exact laws of two small models, the minimal probability that an optimal
/// coupling fails to make them equal, and their total variation distance.
pub fn micro_study(n: usize, model_a: &str, d_a: usize, extra_a: usize, model_b: &str, d_b: usize) -> Result<String, String> {
    if n > 6 {
        return Err("exact laws are limited to n <= 6 in the demo".into());
    }
    let a = exact_model_distribution(exact_model(model_a, extra_a)?, n, d_a).map_err(|e| e.to_string())?;
    let b = exact_model_distribution(exact_model(model_b, 0)?, n, d_b).map_err(|e| e.to_string())?;
    let bad = Relation::inequality(&a, &b).map_err(|e| e.to_string())?;
    let def = strassen_deficiency(&a, &b, &bad).map_err(|e| e.to_string())?;
    let tv = tv_exact(&a, &b).map_err(|e| e.to_string())?;
    let coupling = build_optimal_coupling(&a, &b, &bad).map_err(|e| e.to_string())?;
    Ok(json!({
        "support_a": a.len(),
        "support_b": b.len(),
        "deficiency": def.value.to_string(),
        "deficiency_f64": def.value.to_f64(),
        "tv": tv.to_string(),
        "failure_mass": coupling.failure_mass.to_string(),
    })
    .to_string())
}

#[wasm_bindgen(js_name = thresholdCurves)]
pub fn threshold_curves_js(lo: f64, hi: f64, points: usize) -> Result<String, JsError> {
    threshold_curves(lo, hi, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = sampleCensus)]
pub fn sample_census_js(model: &str, n: usize, d: usize, p: f64, seed: u64) -> Result<String, JsError> {
    sample_census(model, n, d, p, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = microStudy)]
pub fn micro_study_js(n: usize, model_a: &str, d_a: usize, extra_a: usize, model_b: &str, d_b: usize) -> Result<String, JsError> {
    micro_study(n, model_a, d_a, extra_a, model_b, d_b).map_err(|e| JsError::new(&e))
}
