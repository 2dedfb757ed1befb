//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each exported function returns a JSON string. The plain Rust functions
//! behind them are public so they can be tested natively.

use blamescope::attribution::{attribute_log, summarize};
use blamescope::blame::DiscountSpec;
use blamescope::hitl::{hitl_blame, FlagPolicy, HitlBlameInput};
use blamescope::metrics::{blame_from_agreement, qwk, raw_blame_from_agreement, OrdinalConfusion};
use blamescope::scm::{abduct, counterfactual_from_posterior, event_probability};
use blamescope::synthetic::{generate, ConfidenceProfile, SyntheticConfig};
use blamescope::{Assignment, OutcomeSpec, Scm};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn profile(name: &str) -> Result<ConfidenceProfile, String> {
    match name {
        "calibrated" => Ok(ConfidenceProfile::Calibrated),
        "overconfident" => Ok(ConfidenceProfile::Overconfident),
        "uninformative" => Ok(ConfidenceProfile::Uninformative),
        other => Err(format!("unknown profile `{other}`")),
    }
}

/// HITL blame and attribution for one band `[l, u]`, plus the blame curve of
/// bands of the same width slid across `[0, 1]`.
#[allow(clippy::too_many_arguments)]
pub fn hitl_explore(
    seed: u64,
    n_cases: usize,
    ai_accuracy: f64,
    human_accuracy: f64,
    profile_name: &str,
    l: f64,
    u: f64,
    human_cost: f64,
) -> Result<Value, String> {
    let config = SyntheticConfig { seed, n_cases, ai_accuracy, human_accuracy, profile: profile(profile_name)? };
    let cases = generate(&config).map_err(|e| e.to_string())?;
    let point = |l: f64, u: f64| -> Result<Value, String> {
        let policy = FlagPolicy::new(l, u).map_err(|e| e.to_string())?;
        let input = HitlBlameInput {
            cases: cases.clone(),
            policy,
            ai_cost: 1.0,
            human_cost,
            discount: DiscountSpec::cost_ratio(),
        };
        let b = hitl_blame(&input).map_err(|e| e.to_string())?;
        let records = attribute_log(&cases, &policy).map_err(|e| e.to_string())?;
        Ok(json!({"l": l, "u": u, "blame": b, "summary": summarize(&records, cases.len())}))
    };
    let current = point(l, u)?;
    let width = u - l;
    let steps = 40;
    let curve = (0..=steps)
        .map(|i| {
            let lo = (1.0 - width) * i as f64 / steps as f64;
            point(lo, (lo + width).min(1.0))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({"current": current, "curve": curve}))
}

fn xor(p_e1: f64, p_e2: f64) -> Result<Scm, String> {
    Scm::builder()
        .exogenous("E1", ["0", "1"], [1.0 - p_e1, p_e1])
        .exogenous("E2", ["0", "1"], [1.0 - p_e2, p_e2])
        .endogenous_fn("X", ["0", "1"], ["E1"], |p| p[0].to_string())
        .endogenous_fn("Y", ["0", "1"], ["X", "E2"], |p| if p[0] == p[1] { "0".into() } else { "1".into() })
        .build()
        .map_err(|e| e.to_string())
}

/// `X := E1`, `Y := X xor E2`. Observes `X`, `Y` (empty strings mean
/// unobserved), intervenes `do(X = do_x)` unless `do_x` is empty, and reports
/// `P(Y = 1)` before and after.
pub fn xor_counterfactual(p_e1: f64, p_e2: f64, obs_x: &str, obs_y: &str, do_x: &str) -> Result<Value, String> {
    let scm = xor(p_e1, p_e2)?;
    let y1 = OutcomeSpec::var_eq("Y", "1");
    let observation: Assignment = [("X", obs_x), ("Y", obs_y)]
        .into_iter()
        .filter(|(_, v)| !v.is_empty())
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    let dos: Vec<(&str, &str)> = if do_x.is_empty() { vec![] } else { vec![("X", do_x)] };
    let factual = event_probability(&scm, &y1).map_err(|e| e.to_string())?;
    let posterior = abduct(&scm, &observation).map_err(|e| e.to_string())?;
    let cf = counterfactual_from_posterior(&scm, &posterior, &dos, &y1).map_err(|e| e.to_string())?;
    let support: Vec<Value> = posterior.support.iter().map(|(a, p)| json!({"noise": a, "prob": p})).collect();
    Ok(json!({"factual": factual, "counterfactual": cf, "posterior": support}))
}

/// Quadratic weighted kappa of a JSON count matrix such as `[[3,1],[0,4]]`.
pub fn qwk_matrix(matrix_json: &str) -> Result<Value, String> {
    let counts: Vec<Vec<u64>> = serde_json::from_str(matrix_json).map_err(|e| format!("not a count matrix: {e}"))?;
    let table = OrdinalConfusion::new(counts).map_err(|e| e.to_string())?;
    let kappa = qwk(&table).map_err(|e| e.to_string())?;
    Ok(json!({
        "k": table.k(),
        "kappa": kappa,
        "blame_raw": raw_blame_from_agreement(kappa),
        "blame": blame_from_agreement(kappa),
    }))
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = hitlExplore)]
#[allow(clippy::too_many_arguments)]
pub fn hitl_explore_js(
    seed: u32,
    n_cases: u32,
    ai_accuracy: f64,
    human_accuracy: f64,
    profile_name: &str,
    l: f64,
    u: f64,
    human_cost: f64,
) -> Result<String, JsValue> {
    to_js(hitl_explore(seed.into(), n_cases as usize, ai_accuracy, human_accuracy, profile_name, l, u, human_cost))
}

#[wasm_bindgen(js_name = xorCounterfactual)]
pub fn xor_counterfactual_js(p_e1: f64, p_e2: f64, obs_x: &str, obs_y: &str, do_x: &str) -> Result<String, JsValue> {
    to_js(xor_counterfactual(p_e1, p_e2, obs_x, obs_y, do_x))
}

#[wasm_bindgen(js_name = qwkMatrix)]
pub fn qwk_matrix_js(matrix_json: &str) -> Result<String, JsValue> {
    to_js(qwk_matrix(matrix_json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_example() {
        let r = xor_counterfactual(0.5, 0.3, "1", "0", "0").unwrap();
        assert_eq!(r["counterfactual"], 1.0);
        assert_eq!(r["factual"], 0.5);
        let r = xor_counterfactual(0.5, 0.3, "", "", "").unwrap();
        assert_eq!(r["counterfactual"], r["factual"]);
        assert!(xor_counterfactual(1.0, 0.0, "0", "", "").is_err());
    }

    #[test]
    fn qwk_examples() {
        assert_eq!(qwk_matrix("[[0,5],[5,0]]").unwrap()["kappa"], -1.0);
        assert_eq!(qwk_matrix("[[0,5],[5,0]]").unwrap()["blame"], 1.0);
        assert!(qwk_matrix("[[1]]").is_err());
        assert!(qwk_matrix("nope").is_err());
    }

    #[test]
    fn hitl_curve() {
        let r = hitl_explore(42, 200, 0.85, 0.9, "calibrated", 0.3, 0.7, 4.0).unwrap();
        assert_eq!(r["curve"].as_array().unwrap().len(), 41);
        assert_eq!(r["current"]["blame"]["n_cases"], 200);
        let err = hitl_explore(42, 200, 0.85, 0.9, "calibrated", 0.7, 0.3, 4.0).unwrap_err();
        assert!(err.contains("l=0.7"), "{err}");
        assert!(hitl_explore(42, 200, 0.85, 0.9, "weird", 0.3, 0.7, 4.0).is_err());
    }
}
