//! Browser bindings. Every export returns a JSON string; errors are thrown
//! as JS strings.

use measurement_core::checks::born::born_convergence_curve;
use measurement_core::checks::overlap::{overlap_statistics, OverlapParams};
use measurement_core::engine::collapse_branch_ledger;
use measurement_core::linalg::{CVector, ProjectorFamily, SpaceLabel, StateVector, Subspace, C64};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest repetition count the page will evaluate.
pub const MAX_N: u64 = 100_000;
/// Largest overlap dimension the page will sample.
pub const MAX_OVERLAP_DIM: usize = 4096;

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Exact tail mass and the Hoeffding bound at `points` evenly spaced N up to `n_max`.
pub fn born_curve_json(p: f64, epsilon: f64, n_max: u64, points: u64) -> Result<String, String> {
    if !(1..=MAX_N).contains(&n_max) {
        return Err(format!("n_max must lie in 1..={MAX_N}"));
    }
    let points = points.clamp(1, n_max);
    let mut ns: Vec<u64> = (1..=points).map(|i| (i * n_max).div_ceil(points)).collect();
    ns.dedup();
    let rows = born_convergence_curve(p, epsilon, &ns).map_err(|e| e.to_string())?;
    Ok(json!({ "p": p, "epsilon": epsilon, "rows": rows }).to_string())
}

/// Overlap statistics of `n_pairs` random unit vectors in dimension `d`.
pub fn overlap_histogram_json(d: usize, n_pairs: usize, bins: usize, seed: u64) -> Result<String, String> {
    if d > MAX_OVERLAP_DIM {
        return Err(format!("d must be at most {MAX_OVERLAP_DIM}"));
    }
    let params = OverlapParams {
        bins: bins.max(1),
        subspace_dim: 2.min(d.max(1)),
        subspace_pairs: 4,
        ..OverlapParams::new(d, n_pairs)
    };
    let summary = overlap_statistics(&params, seed).map_err(|e| e.to_string())?;
    serde_json::to_string(&summary).map_err(|e| e.to_string())
}

fn qubit_basis(space: &SpaceLabel, angle: f64, labels: [&str; 2]) -> Result<ProjectorFamily, String> {
    let (c, s) = (angle.cos(), angle.sin());
    let a = CVector::from_vec(vec![C64::new(c, 0.0), C64::new(s, 0.0)]);
    let b = CVector::from_vec(vec![C64::new(-s, 0.0), C64::new(c, 0.0)]);
    let sub = |v: CVector| Subspace::from_vectors(space.clone(), &[v]).map_err(|e| e.to_string());
    ProjectorFamily::from_subspaces(space.clone(), vec![(labels[0].into(), sub(a)?), (labels[1].into(), sub(b)?)])
        .map_err(|e| e.to_string())
}

/// Two sequential qubit measurements. The state is `cos θ|0⟩ + sin θ|1⟩`;
/// the first basis is rotated by `first_angle` and the second by `second_angle`.
pub fn collapse_weights_json(theta: f64, first_angle: f64, second_angle: f64) -> Result<String, String> {
    let space = SpaceLabel::new("s", 2).map_err(|e| e.to_string())?;
    let psi = StateVector::new(
        space.clone(),
        CVector::from_vec(vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]),
    )
    .map_err(|e| e.to_string())?;
    let first = qubit_basis(&space, first_angle, ["1", "2"])?;
    let second = qubit_basis(&space, second_angle, ["alpha", "beta"])?;
    let ledger = collapse_branch_ledger(&psi, &first, &second).map_err(|e| e.to_string())?;
    let branches: Vec<_> = ledger
        .branches()
        .iter()
        .map(|b| json!({ "branch": b.key.to_string(), "weight": b.weight }))
        .collect();
    Ok(json!({ "branches": branches, "total_weight": ledger.total_weight() }).to_string())
}

#[wasm_bindgen]
pub fn born_curve(p: f64, epsilon: f64, n_max: u32, points: u32) -> Result<String, JsValue> {
    js(born_curve_json(p, epsilon, n_max.into(), points.into()))
}

#[wasm_bindgen]
pub fn overlap_histogram(d: u32, n_pairs: u32, bins: u32, seed: u32) -> Result<String, JsValue> {
    js(overlap_histogram_json(d as usize, n_pairs as usize, bins as usize, seed.into()))
}

#[wasm_bindgen]
pub fn collapse_weights(theta: f64, first_angle: f64, second_angle: f64) -> Result<String, JsValue> {
    js(collapse_weights_json(theta, first_angle, second_angle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn born_curve_stays_under_bound() {
        let v: Value = serde_json::from_str(&born_curve_json(0.3, 0.05, 2000, 10).unwrap()).unwrap();
        let rows = v["rows"].as_array().unwrap();
        assert_eq!(rows.len(), 10);
        assert_eq!(rows[9]["n"], 2000);
        for r in rows {
            assert!(r["chi_exact"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());
        }
        assert!(born_curve_json(0.3, 0.05, 0, 10).is_err());
        assert!(born_curve_json(1.3, 0.05, 10, 10).is_err());
    }

    #[test]
    fn overlap_histogram_counts_pairs() {
        let v: Value = serde_json::from_str(&overlap_histogram_json(64, 400, 10, 1).unwrap()).unwrap();
        let counted: u64 = v["histogram"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
        assert_eq!(counted + v["overflow"].as_u64().unwrap(), 400);
        assert!(overlap_histogram_json(MAX_OVERLAP_DIM + 1, 10, 10, 1).is_err());
    }

    #[test]
    fn collapse_weights_follow_squared_cosines() {
        let (t, a, b) = (0.4, 0.1, 1.1);
        let v: Value = serde_json::from_str(&collapse_weights_json(t, a, b).unwrap()).unwrap();
        let w: Vec<f64> = v["branches"].as_array().unwrap().iter().map(|x| x["weight"].as_f64().unwrap()).collect();
        let c2 = |x: f64| x.cos().powi(2);
        let s2 = |x: f64| x.sin().powi(2);
        let expected = [
            c2(t - a) * c2(b - a),
            c2(t - a) * s2(b - a),
            s2(t - a) * s2(b - a),
            s2(t - a) * c2(b - a),
        ];
        for (g, e) in w.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
        assert!((v["total_weight"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}
