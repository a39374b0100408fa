//! Browser bindings. Every export takes and returns JSON strings so the
//! same functions can be exercised from native tests. Failures come back as
//! `{"error": "..."}`.

use mabarc_core::instance::{catalog, catalog_get};
use mabarc_core::oracle::{analyze, optimal_allocation, OracleConfig};
use mabarc_core::sim::EpisodeRunner;
use mabarc_core::{Algorithm, Instance};
use serde::Serialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Hard limits keep a click from freezing the tab.
pub const MAX_HORIZON: u64 = 200_000;
pub const MAX_POINTS: usize = 2_000;

fn respond<T: Serialize>(result: Result<T, String>) -> String {
    match result {
        Ok(v) => serde_json::to_string(&v).expect("response serializes"),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// `catalog:<name>` (with optional `eps`) or an instance document.
/// A NaN `eps` means "use the default".
fn resolve(source: &str, eps: f64) -> Result<Instance, String> {
    let eps = (!eps.is_nan()).then_some(eps);
    match source.trim().strip_prefix("catalog:") {
        Some(name) => catalog_get(name.trim(), eps).map_err(|e| e.to_string()),
        None => Instance::from_json(source).map_err(|e| e.to_string()),
    }
}

#[derive(Serialize)]
struct Entry {
    name: &'static str,
    description: &'static str,
    param: Option<&'static str>,
    default: Option<f64>,
    range: Option<&'static str>,
    document: String,
}

/// Built-in instances with their default documents.
#[wasm_bindgen]
pub fn catalog_json() -> String {
    let rows: Result<Vec<Entry>, String> = catalog()
        .iter()
        .map(|e| {
            Ok(Entry {
                name: e.name,
                description: e.description,
                param: e.param.map(|p| p.name),
                default: e.param.map(|p| p.default),
                range: e.param.map(|p| p.range),
                document: catalog_get(e.name, None).map_err(|e| e.to_string())?.to_json(),
            })
        })
        .collect();
    respond(rows)
}

/// The instance document behind `source`, for editing.
#[wasm_bindgen]
pub fn instance_document(source: &str, eps: f64) -> String {
    respond(resolve(source, eps).map(|inst| json!({ "document": inst.to_json() })))
}

/// Oracle report; gap enumeration is skipped when `gaps` is false.
#[wasm_bindgen]
pub fn solve(source: &str, eps: f64, gaps: bool) -> String {
    respond((|| {
        let inst = resolve(source, eps)?;
        let cfg = OracleConfig::default();
        if gaps {
            let rep = analyze(&inst, &cfg).map_err(|e| e.to_string())?;
            let mut v = serde_json::to_value(&rep).map_err(|e| e.to_string())?;
            v["per_set_gaps"] = serde_json::to_value(rep.top(12)).map_err(|e| e.to_string())?;
            Ok(v)
        } else {
            let plan = optimal_allocation(&inst, &cfg).map_err(|e| e.to_string())?;
            let mut v = serde_json::to_value(&plan).map_err(|e| e.to_string())?;
            v["instance"] = json!(inst.name());
            Ok(v)
        }
    })())
}

#[derive(Debug, Serialize)]
struct CurvePoint {
    threshold: f64,
    /// `None` where the thresholds cannot all be met.
    f_star: Option<f64>,
}

/// Optimal value as the threshold of `arm` (0-based) goes from 0 to the
/// revenue of always pulling it.
#[wasm_bindgen]
pub fn value_curve(source: &str, eps: f64, arm: usize, points: usize) -> String {
    respond((|| {
        let inst = resolve(source, eps)?;
        if arm >= inst.arms() {
            return Err(format!("arm {} out of range 1..={}", arm + 1, inst.arms()));
        }
        let points = points.clamp(2, MAX_POINTS);
        let top: f64 = (0..inst.contexts()).map(|c| inst.weighted_means()[(arm, c)].max(0.0)).sum();
        let cfg = OracleConfig::default();
        let mut out = Vec::with_capacity(points);
        for i in 0..points {
            let threshold = top * i as f64 / (points - 1) as f64;
            let mut lambda = inst.thresholds().to_vec();
            lambda[arm] = threshold;
            let variant = inst.with_thresholds(lambda).map_err(|e| e.to_string())?;
            let f_star = optimal_allocation(&variant, &cfg).ok().map(|p| p.f_star);
            out.push(CurvePoint { threshold, f_star });
        }
        Ok(json!({ "instance": inst.name(), "arm": arm + 1, "current": inst.thresholds()[arm], "points": out }))
    })())
}

#[derive(Debug, Default, Serialize)]
struct Series {
    t: Vec<u64>,
    cum_regret: Vec<f64>,
    cum_violation: Vec<f64>,
}

/// One episode of `alg`, with cumulative metrics thinned to `points` samples.
#[wasm_bindgen]
pub fn simulate(source: &str, eps: f64, alg: &str, horizon: u64, seed: u64, points: usize) -> String {
    respond((|| {
        let inst = resolve(source, eps)?;
        let algorithm: Algorithm = alg.parse().map_err(|e: mabarc_core::policy::PolicyError| e.to_string())?;
        if horizon == 0 || horizon > MAX_HORIZON {
            return Err(format!("horizon must lie in 1..={MAX_HORIZON}"));
        }
        let stride = horizon.div_ceil(points.clamp(1, MAX_POINTS) as u64);
        let mut runner = EpisodeRunner::planned(&inst, algorithm, seed, 0, Default::default()).map_err(|e| e.to_string())?;
        let mut series = Series::default();
        let mut modes = std::collections::BTreeMap::<&str, u64>::new();
        let mut pulls = vec![0u64; inst.arms()];
        let mut last = None;
        for t in 1..=horizon {
            let r = runner.step();
            *modes.entry(r.mode.as_str()).or_default() += 1;
            pulls[r.arm] += 1;
            if (t - 1) % stride == 0 || t == horizon {
                series.t.push(t);
                series.cum_regret.push(r.cum_regret);
                series.cum_violation.push(r.cum_violation);
            }
            last = Some(r);
        }
        let last = last.expect("horizon is positive");
        Ok(json!({
            "instance": inst.name(),
            "algorithm": algorithm.as_str(),
            "horizon": horizon,
            "seed": seed,
            "regret": last.cum_regret,
            "violation": last.cum_violation,
            "reward": last.cum_reward,
            "modes": modes,
            "pulls": pulls,
            "final_allocation": last.allocation,
            "series": series,
        }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn catalog_documents_round_trip() {
        let rows = parse(catalog_json());
        for row in rows.as_array().unwrap() {
            let doc = row["document"].as_str().unwrap();
            let inst = Instance::from_json(doc).unwrap();
            assert_eq!(inst.name(), row["name"].as_str().unwrap().to_string() + &suffix(row));
        }
    }

    fn suffix(row: &Value) -> String {
        match row["default"].as_f64() {
            Some(d) => format!("({}={d})", row["param"].as_str().unwrap()),
            None => String::new(),
        }
    }

    #[test]
    fn documents_follow_the_parameter() {
        let v = parse(instance_document("catalog:nu_minus", 0.2));
        let inst = Instance::from_json(v["document"].as_str().unwrap()).unwrap();
        assert_eq!(inst, catalog_get("nu_minus", Some(0.2)).unwrap());
    }

    #[test]
    fn solve_by_reference_and_by_document() {
        let a = parse(solve("catalog:nu_sim", f64::NAN, false));
        assert_eq!(a["f_star"].as_f64().unwrap(), 5.25);
        let doc = catalog_get("nu_sim", None).unwrap().to_json();
        let b = parse(solve(&doc, f64::NAN, true));
        assert!((b["f_star"].as_f64().unwrap() - 5.25).abs() < 1e-12);
        assert!((b["gamma_star"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        assert!(b["per_set_gaps"].as_array().unwrap().len() <= 12);
        assert_eq!(a["allocation"], b["w_star"]);
    }

    #[test]
    fn errors_are_reported() {
        assert!(parse(solve("catalog:nope", f64::NAN, false))["error"].is_string());
        assert!(parse(solve("{", f64::NAN, false))["error"].is_string());
        let infeasible = r#"{"name":"x","arms":1,"thresholds":[2],"contexts":[{"prob":1,"means":[1]}]}"#;
        assert!(parse(solve(infeasible, f64::NAN, false))["error"].as_str().unwrap().contains("infeasible"));
        assert!(parse(simulate("catalog:nu_sim", f64::NAN, "magic", 10, 0, 10))["error"].is_string());
        assert!(parse(simulate("catalog:nu_sim", f64::NAN, "olp", 0, 0, 10))["error"].is_string());
        assert!(parse(value_curve("catalog:nu_sim", f64::NAN, 3, 10))["error"].is_string());
    }

    #[test]
    fn curve_is_nonincreasing_and_ends_infeasible_or_flat() {
        let v = parse(value_curve("catalog:nu_sim", f64::NAN, 1, 41));
        let pts = v["points"].as_array().unwrap();
        assert_eq!(pts.len(), 41);
        let values: Vec<Option<f64>> = pts.iter().map(|p| p["f_star"].as_f64()).collect();
        // Raising one threshold shrinks the feasible set.
        let feasible: Vec<f64> = values.iter().map_while(|v| *v).collect();
        assert!(feasible.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(values[feasible.len()..].iter().all(Option::is_none));
        // The catalog threshold sits inside the feasible stretch.
        let current = v["current"].as_f64().unwrap();
        let at = current / pts[40]["threshold"].as_f64().unwrap() * 40.0;
        assert!((at.ceil() as usize) < feasible.len());
    }

    #[test]
    fn simulation_matches_the_core_runner() {
        let v = parse(simulate("catalog:nu_sim", f64::NAN, "oplp", 500, 9, 50));
        let inst = catalog_get("nu_sim", None).unwrap();
        let mut runner = EpisodeRunner::planned(&inst, Algorithm::Oplp, 9, 0, Default::default()).unwrap();
        let records: Vec<_> = (0..500).map(|_| runner.step()).collect();
        let last = records.last().unwrap();
        assert!((v["regret"].as_f64().unwrap() - last.cum_regret).abs() <= 1e-9 * last.cum_regret.max(1.0));
        let series = &v["series"];
        assert_eq!(series["t"].as_array().unwrap().len(), 51);
        assert_eq!(series["t"][49], 491);
        assert_eq!(series["t"][50], 500);
        let pulls: u64 = v["pulls"].as_array().unwrap().iter().map(|p| p.as_u64().unwrap()).sum();
        assert_eq!(pulls, 500);
        let modes: u64 = v["modes"].as_object().unwrap().values().map(|m| m.as_u64().unwrap()).sum();
        assert_eq!(modes, 500);
    }
}
