//! Sequential measurements without a collapse process.
//!
//! Measuring with family `{P_λ}` and then `{P_ξ}` leaves one orthogonal
//! branch per pair `(λ, ξ)` with squared norm `⟨ψ|P_λ P_ξ P_λ|ψ⟩`. That
//! number factorizes as the first-outcome weight times the second-outcome
//! weight of the projected, renormalized state.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::CheckReport;
use crate::engine::{collapse_branch_ledger, BranchKey};
use crate::error::{Error, Result};
use crate::linalg::{Projector, ProjectorFamily, StateVector};
use crate::seed;

/// Tolerance on deterministic collapse identities.
pub const COLLAPSE_TOL: f64 = 1e-10;
/// Monte Carlo band half-width in standard deviations.
pub const FREQUENCY_SIGMAS: f64 = 4.0;
/// First-outcome weights at or below this leave the conditional state undefined.
pub const VANISHING_WEIGHT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceWeight {
    pub first: String,
    pub second: String,
    pub weight: f64,
}

/// `⟨ψ|P_λ P_ξ P_λ|ψ⟩` evaluated as a matrix product, for every pair in
/// first-major order.
pub fn collapse_weights_direct(
    psi: &StateVector,
    first: &ProjectorFamily,
    second: &ProjectorFamily,
) -> Result<Vec<SequenceWeight>> {
    first.ambient().ensure_same(psi.space())?;
    second.ambient().ensure_same(psi.space())?;
    let v = psi.amplitudes();
    let mut out = Vec::new();
    for (l, pl) in first.members() {
        for (x, px) in second.members() {
            let m = pl.matrix() * px.matrix() * pl.matrix();
            let weight = v.dotc(&(m * v)).re;
            out.push(SequenceWeight {
                first: l.clone(),
                second: x.clone(),
                weight,
            });
        }
    }
    Ok(out)
}

/// Ledger weights against the direct projector products, plus completeness.
pub fn check_collapse_weights(psi: &StateVector, first: &ProjectorFamily, second: &ProjectorFamily) -> Result<CheckReport> {
    let ledger = collapse_branch_ledger(psi, first, second)?;
    let direct = collapse_weights_direct(psi, first, second)?;
    let mut max_diff = 0.0f64;
    let mut weights = Vec::new();
    for (b, d) in ledger.branches().iter().zip(&direct) {
        max_diff = max_diff.max((b.weight - d.weight).abs());
        weights.push(json!({ "branch": b.key.to_string(), "ledger": b.weight, "direct": d.weight }));
    }
    let total = ledger.total_weight();
    let total_defect = (total - 1.0).abs();
    let details = json!({
        "weights": weights,
        "max_ledger_direct_difference": max_diff,
        "total_weight": total,
    });
    Ok(CheckReport::new(
        "collapse_weights",
        max_diff.max(total_defect),
        COLLAPSE_TOL,
        details,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub first: String,
    pub second: String,
    pub weight: f64,
    pub count: u64,
    pub frequency: f64,
    pub sigma: f64,
    /// `|frequency - weight| / sigma`; zero-width bands give 0 on exact
    /// agreement and infinity otherwise.
    pub deviation: f64,
}

/// Draws `n_samples` outcome pairs from the ledger weights by inverse CDF
/// in ledger order and compares each frequency with its weight. The defect
/// is the largest deviation in standard deviations.
pub fn sequential_frequency_check(
    psi: &StateVector,
    first: &ProjectorFamily,
    second: &ProjectorFamily,
    n_samples: u64,
    seed: u64,
) -> Result<CheckReport> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let ledger = collapse_branch_ledger(psi, first, second)?;
    let weights: Vec<f64> = ledger.branches().iter().map(|b| b.weight).collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    let mut counts = vec![0u64; weights.len()];
    let mut rng = seed::rng(seed);
    for _ in 0..n_samples {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cumulative.iter().position(|&c| u < c).unwrap_or_else(|| {
            // u == total after rounding: last branch with positive weight
            weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
        });
        counts[idx] += 1;
    }

    let n = n_samples as f64;
    let mut bands = Vec::with_capacity(weights.len());
    let mut worst = 0.0f64;
    for (b, &count) in ledger.branches().iter().zip(&counts) {
        let (l, x) = match &b.key {
            BranchKey::Sequence(s) => (s[0].clone(), s[1].clone()),
            BranchKey::Count { .. } => unreachable!("collapse ledger is keyed by sequences"),
        };
        let frequency = count as f64 / n;
        let sigma = (b.weight * (1.0 - b.weight)).max(0.0).sqrt() / n.sqrt();
        let gap = (frequency - b.weight).abs();
        let deviation = if sigma > 0.0 {
            gap / sigma
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(deviation);
        bands.push(FrequencyBand {
            first: l,
            second: x,
            weight: b.weight,
            count,
            frequency,
            sigma,
            deviation,
        });
    }
    let details = json!({ "n_samples": n_samples, "bands": bands });
    Ok(CheckReport::new(
        "sequential_frequency",
        worst,
        FREQUENCY_SIGMAS,
        details,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Factorization {
    /// `⟨ψ|P_λ P_ξ P_λ|ψ⟩`.
    pub joint: f64,
    /// `⟨ψ|P_λ|ψ⟩`.
    pub first_weight: f64,
    /// `⟨ψ'|P_ξ|ψ'⟩` with `ψ' = P_λ ψ / ‖P_λ ψ‖`.
    pub conditional: f64,
    /// `‖ψ'‖`.
    pub conditional_norm: f64,
    /// `|joint - first_weight · conditional|`.
    pub residual: f64,
}

/// Evaluates both sides of the factorization for one pair of projectors.
pub fn conditional_factorization(
    psi: &StateVector,
    first: &Projector,
    second: &Projector,
) -> Result<Factorization> {
    let projected = first.apply(psi)?;
    let first_weight = projected.norm_sqr();
    if first_weight <= VANISHING_WEIGHT {
        return Err(Error::VanishingWeight { weight: first_weight });
    }
    let v = psi.amplitudes();
    let m = first.matrix() * second.matrix() * first.matrix();
    let joint = v.dotc(&(m * v)).re;
    let conditional_state = projected.normalized()?;
    let conditional = second.expectation(&conditional_state)?;
    Ok(Factorization {
        joint,
        first_weight,
        conditional,
        conditional_norm: conditional_state.norm(),
        residual: (joint - first_weight * conditional).abs(),
    })
}

/// Factorization over every pair whose first-outcome weight is non-vanishing.
pub fn conditional_factorization_check(
    psi: &StateVector,
    first: &ProjectorFamily,
    second: &ProjectorFamily,
) -> Result<CheckReport> {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (l, pl) in first.members() {
        if pl.expectation(psi)? <= VANISHING_WEIGHT {
            skipped.push(l.clone());
            continue;
        }
        for (x, px) in second.members() {
            let f = conditional_factorization(psi, pl, px)?;
            worst = worst.max(f.residual).max((f.conditional_norm - 1.0).abs());
            rows.push(json!({ "first": l, "second": x, "factorization": f }));
        }
    }
    if rows.is_empty() {
        return Err(Error::VanishingWeight { weight: 0.0 });
    }
    let details = json!({ "pairs": rows, "skipped_first_outcomes": skipped });
    Ok(CheckReport::new("conditional_factorization", worst, COLLAPSE_TOL, details))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{SpaceLabel, Subspace, C64};

    fn qubit_families() -> (SpaceLabel, ProjectorFamily, ProjectorFamily) {
        let q = SpaceLabel::new("s", 2).unwrap();
        let z = ProjectorFamily::from_subspaces(
            q.clone(),
            vec![
                ("1".into(), Subspace::coordinate(q.clone(), &[0]).unwrap()),
                ("2".into(), Subspace::coordinate(q.clone(), &[1]).unwrap()),
            ],
        )
        .unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_slice(q.clone(), &[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        let minus = StateVector::from_slice(q.clone(), &[C64::new(h, 0.0), C64::new(-h, 0.0)]).unwrap();
        let x = ProjectorFamily::from_subspaces(
            q.clone(),
            vec![
                ("alpha".into(), Subspace::from_vectors(q.clone(), &[plus.into_amplitudes()]).unwrap()),
                ("beta".into(), Subspace::from_vectors(q.clone(), &[minus.into_amplitudes()]).unwrap()),
            ],
        )
        .unwrap();
        (q, z, x)
    }

    #[test]
    fn qubit_weights() {
        let (q, z, x) = qubit_families();
        let psi = StateVector::basis(q, 0).unwrap();
        let w: Vec<f64> = collapse_weights_direct(&psi, &z, &x).unwrap().iter().map(|s| s.weight).collect();
        for (a, b) in w.iter().zip([0.5, 0.5, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(check_collapse_weights(&psi, &z, &x).unwrap().pass);
    }

    #[test]
    fn qubit_frequencies() {
        let (q, z, x) = qubit_families();
        let psi = StateVector::basis(q, 0).unwrap();
        let r = sequential_frequency_check(&psi, &z, &x, 100_000, 11).unwrap();
        assert!(r.pass, "{r:?}");
        let bands = r.details["bands"].as_array().unwrap();
        assert_eq!(bands[2]["count"], 0);
        assert_eq!(bands[3]["count"], 0);
    }

    #[test]
    fn qubit_factorization() {
        let (q, z, x) = qubit_families();
        let psi = StateVector::basis(q, 0).unwrap();
        let f = conditional_factorization(&psi, z.get("1").unwrap(), x.get("alpha").unwrap()).unwrap();
        assert!((f.joint - 0.5).abs() < 1e-12);
        assert!((f.first_weight - 1.0).abs() < 1e-12);
        assert!((f.conditional - 0.5).abs() < 1e-12);
        assert!((f.conditional_norm - 1.0).abs() < 1e-12);
        let err = conditional_factorization(&psi, z.get("2").unwrap(), x.get("alpha").unwrap());
        assert!(matches!(err, Err(Error::VanishingWeight { .. })));
        let r = conditional_factorization_check(&psi, &z, &x).unwrap();
        assert!(r.pass);
        assert_eq!(r.details["skipped_first_outcomes"][0], "2");
    }

    #[test]
    fn commuting_families() {
        let q = SpaceLabel::new("s", 3).unwrap();
        let fam = ProjectorFamily::random(q.clone(), &["a", "b"], &[1, 2], 5).unwrap();
        let psi = crate::linalg::random_state(&q, 6);
        for s in collapse_weights_direct(&psi, &fam, &fam).unwrap() {
            let expected = if s.first == s.second {
                fam.get(&s.first).unwrap().expectation(&psi).unwrap()
            } else {
                0.0
            };
            assert!((s.weight - expected).abs() < 1e-12);
        }
    }
}
