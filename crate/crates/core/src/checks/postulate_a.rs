//! Outcome states form mutually orthogonal subspaces.
//!
//! Two routes: superpositions of states that trigger one outcome still
//! trigger it (closure), and unitarity forces states that trigger different
//! outcomes to be orthogonal (the residual
//! `|⟨s|s'⟩| · |1 - ⟨A_λ|A_λ'⟩|` must vanish).

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::CheckReport;
use crate::error::{Error, Result};
use crate::linalg::{complex_gaussian, inner_product, StateVector, C64};
use crate::model::{measurement_step, realizes, Apparatus, ExperimentAssembly, LocalOperator, Microsystem, SubsystemKind};
use crate::seed;

/// Tolerance on block leaks and orthogonality residuals.
pub const POSTULATE_A_TOL: f64 = 1e-10;

fn pair_assembly(micro: &Microsystem, apparatus: &Apparatus) -> Result<ExperimentAssembly> {
    ExperimentAssembly::of(&[
        (micro.space(), SubsystemKind::Micro),
        (apparatus.space(), SubsystemKind::Apparatus),
    ])
}

fn leak(
    assembly: &ExperimentAssembly,
    op: &LocalOperator,
    micro_state: &StateVector,
    ready: &StateVector,
    apparatus: &Apparatus,
    label: &str,
) -> Result<f64> {
    let joint = assembly.product_state(&[micro_state.clone(), ready.clone()])?;
    let out = StateVector::new(joint.space().clone(), op.apply(joint.amplitudes())?)?;
    Ok(realizes(assembly, &out, apparatus, label, POSTULATE_A_TOL)?.defect)
}

/// Norm of the part of the post-measurement state in which the apparatus is
/// not in macrostate `label`, for a normalized micro state and a random
/// ready state.
pub fn closure_leak(
    micro: &Microsystem,
    apparatus: &Apparatus,
    micro_state: &StateVector,
    label: &str,
    seed: u64,
) -> Result<f64> {
    let assembly = pair_assembly(micro, apparatus)?;
    let op = measurement_step(&assembly, apparatus, micro)?;
    let ready = apparatus.random_ready_state(seed);
    leak(&assembly, &op, micro_state, &ready, apparatus, label)
}

/// For random `α, β` and random `s, s̃` in outcome subspace `λ` (cycling
/// through the outcomes), measures `α s + β s̃` and records how much of the
/// result leaves apparatus macrostate `λ`.
pub fn check_outcome_subspace_closure(
    micro: &Microsystem,
    apparatus: &Apparatus,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let assembly = pair_assembly(micro, apparatus)?;
    let op = measurement_step(&assembly, apparatus, micro)?;
    let labels = micro.labels();
    let mut worst = 0.0f64;
    let mut per_label = vec![0.0f64; labels.len()];
    for t in 0..trials {
        let li = t % labels.len();
        let label = &labels[li];
        let sub = micro.outcome(label)?;
        let mut rng = seed::rng(seed::derive_index(seed, t as u64));
        let s = sub.random_member_with(&mut rng);
        let s_tilde = sub.random_member_with(&mut rng);
        let alpha = complex_gaussian(&mut rng);
        let beta = complex_gaussian(&mut rng);
        let superposed = s.scaled(alpha).add(&s_tilde.scaled(beta))?;
        let state = match superposed.normalized() {
            Ok(v) => v,
            Err(_) => s,
        };
        let ready = apparatus.ready().subspace.random_member_with(&mut rng);
        let d = leak(&assembly, &op, &state, &ready, apparatus, label)?;
        per_label[li] = per_label[li].max(d);
        worst = worst.max(d);
    }
    let details = json!({
        "trials": trials,
        "max_leak_per_outcome": labels.iter().zip(&per_label)
            .map(|(l, d)| json!({ "outcome": l, "max_leak": d }))
            .collect::<Vec<_>>(),
    });
    Ok(CheckReport::new("outcome_subspace_closure", worst, POSTULATE_A_TOL, details))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityResidual {
    /// `|⟨s_λ|s_λ'⟩| · |1 - ⟨A_λ|A_λ'⟩|`.
    pub residual: f64,
    pub micro_overlap: f64,
    /// `|⟨A_λ|A_λ'⟩|`.
    pub apparatus_overlap: f64,
    /// `residual / |1 - ⟨A_λ|A_λ'⟩|`, the bound on `|⟨s_λ|s_λ'⟩|` implied by unitarity.
    pub implied_bound: f64,
}

/// Residual of the inner-product identity for given micro and apparatus overlaps.
pub fn residual_from_overlaps(micro_overlap: C64, apparatus_overlap: C64) -> OrthogonalityResidual {
    let gap = (C64::new(1.0, 0.0) - apparatus_overlap).norm();
    let residual = micro_overlap.norm() * gap;
    OrthogonalityResidual {
        residual,
        micro_overlap: micro_overlap.norm(),
        apparatus_overlap: apparatus_overlap.norm(),
        implied_bound: if gap > 0.0 { residual / gap } else { f64::INFINITY },
    }
}

/// Residual for micro states assigned to outcomes `pair.0` and `pair.2` and
/// apparatus ready state `ready`, with `A_λ = U_λ ready`.
pub fn orthogonality_residual(
    pair: (&str, &StateVector, &str, &StateVector),
    ready: &StateVector,
    apparatus: &Apparatus,
) -> Result<OrthogonalityResidual> {
    let (l1, s1, l2, s2) = pair;
    if l1 == l2 {
        return Err(Error::invalid("orthogonality residual needs two different outcomes"));
    }
    let a1 = apparatus.isometry(l1)?.apply(ready)?;
    let a2 = apparatus.isometry(l2)?.apply(ready)?;
    Ok(residual_from_overlaps(inner_product(s1, s2)?, inner_product(&a1, &a2)?))
}

/// Closure plus pairwise orthogonality residuals over outcome frame
/// vectors. If no unitary measurement exists for `micro` the report fails
/// with the unitarity defect of the attempted construction.
pub fn check_postulate_a(micro: &Microsystem, apparatus: &Apparatus, trials: usize, seed: u64) -> Result<CheckReport> {
    let ready = apparatus.random_ready_state(seed::derive(seed, "ready"));
    let labels = micro.labels();
    let mut residuals = Vec::new();
    let mut worst_residual = 0.0f64;
    for i in 0..labels.len() {
        for j in (i + 1)..labels.len() {
            let fi = micro.outcome(&labels[i])?;
            let fj = micro.outcome(&labels[j])?;
            for ci in 0..fi.dim() {
                for cj in 0..fj.dim() {
                    let si = StateVector::new(micro.space().clone(), fi.frame().column(ci).into_owned())?;
                    let sj = StateVector::new(micro.space().clone(), fj.frame().column(cj).into_owned())?;
                    let r = orthogonality_residual((&labels[i], &si, &labels[j], &sj), &ready, apparatus)?;
                    worst_residual = worst_residual.max(r.residual);
                    residuals.push(json!({
                        "outcomes": [labels[i], labels[j]],
                        "columns": [ci, cj],
                        "residual": r.residual,
                        "apparatus_overlap": r.apparatus_overlap,
                        "implied_bound": r.implied_bound,
                    }));
                }
            }
        }
    }
    let certificate = micro.certify();
    let closure = match check_outcome_subspace_closure(micro, apparatus, trials, seed::derive(seed, "closure")) {
        Ok(r) => r,
        Err(Error::NotUnitary { defect }) => {
            let details = json!({
                "unitarity_defect": defect,
                "micro_max_overlap": certificate.max_overlap,
                "max_orthogonality_residual": worst_residual,
                "residuals": residuals,
                "reason": "no unitary measurement operator exists for these outcome subspaces",
            });
            return Ok(CheckReport::failed("postulate_a", defect, POSTULATE_A_TOL, details));
        }
        Err(e) => return Err(e),
    };
    let defect = closure.defect.max(worst_residual);
    let details = json!({
        "closure": closure,
        "micro_max_overlap": certificate.max_overlap,
        "max_orthogonality_residual": worst_residual,
        "residuals": residuals,
    });
    Ok(CheckReport::new("postulate_a", defect, POSTULATE_A_TOL, details))
}
