//! The cast of an experiment: microsystems, macrosystems and the environment.

use serde::{Deserialize, Serialize};

use crate::band;
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum_frames, projector_from_subspace, random_isometry, CMatrix, DirectSumReport,
    Isometry, Projector, SpaceLabel, StateVector, Subspace, ORTHONORMAL_TOL,
};
use crate::seed;

/// Label of the ready macrostate of every macrosystem.
pub const READY: &str = "∅";

/// A low-dimensional system together with the subspaces that trigger each
/// measurement outcome.
///
/// Orthogonality of the outcome subspaces is not enforced here; see
/// [`Microsystem::certify`]. The measurement builder rejects systems for
/// which no unitary measurement exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Microsystem {
    space: SpaceLabel,
    outcomes: Vec<(String, Subspace)>,
}

impl Microsystem {
    pub fn new(space: SpaceLabel, outcomes: Vec<(String, Subspace)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::invalid("microsystem needs at least one outcome"));
        }
        for (i, (label, sub)) in outcomes.iter().enumerate() {
            if sub.ambient() != &space {
                return Err(Error::SpaceMismatch {
                    left: space.id().to_string(),
                    right: sub.ambient().id().to_string(),
                });
            }
            if outcomes[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::invalid(format!("duplicate outcome label `{label}`")));
            }
        }
        Ok(Microsystem { space, outcomes })
    }

    /// Outcome `labels[i]` is triggered by the basis vectors `bases[i]`.
    pub fn with_coordinate_outcomes(space: SpaceLabel, outcomes: &[(&str, &[usize])]) -> Result<Self> {
        let parts = outcomes
            .iter()
            .map(|(label, idx)| Ok((label.to_string(), Subspace::coordinate(space.clone(), idx)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(space, parts)
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn outcomes(&self) -> &[(String, Subspace)] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|(l, _)| l.clone()).collect()
    }

    pub fn outcome(&self, label: &str) -> Result<&Subspace> {
        self.outcomes
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, s)| s)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn projector(&self, label: &str) -> Result<Projector> {
        Ok(projector_from_subspace(self.outcome(label)?))
    }

    /// Pairwise-orthogonality certificate of the outcome subspaces.
    pub fn certify(&self) -> DirectSumReport {
        let parts: Vec<&Subspace> = self.outcomes.iter().map(|(_, s)| s).collect();
        direct_sum_frames(&parts, ORTHONORMAL_TOL).expect("outcome subspaces share the micro space")
    }

    /// `‖(I - Σ_λ P_λ) ψ‖²`: weight of `psi` outside every outcome subspace.
    pub fn unmeasurable_weight(&self, psi: &StateVector) -> Result<f64> {
        let mut rest = psi.clone();
        for (_, sub) in &self.outcomes {
            let p = projector_from_subspace(sub).apply(psi)?;
            rest = rest.sub(&p)?;
        }
        Ok(rest.norm_sqr())
    }
}

/// A macrostate: a labeled subspace of a macrosystem's space.
#[derive(Clone, Debug, PartialEq)]
pub struct Macrostate {
    pub label: String,
    pub subspace: Subspace,
}

/// Common structure of apparatuses and students: a ready macrostate, a set
/// of outcome macrostates on disjoint coordinate blocks, and one isometry
/// from the ready block onto each outcome block.
///
/// Block `0` is the ready macrostate; outcome `i` occupies block `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Macrosystem {
    space: SpaceLabel,
    ready: Macrostate,
    outcomes: Vec<Macrostate>,
    isometries: Vec<Isometry>,
}

impl Macrosystem {
    pub fn build(id: &str, labels: &[String], macrostate_dim: usize, seed: u64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("macrosystem needs at least one outcome"));
        }
        if macrostate_dim == 0 {
            return Err(Error::invalid("macrostate dimension must be positive"));
        }
        for (i, l) in labels.iter().enumerate() {
            if l == READY || labels[..i].contains(l) {
                return Err(Error::invalid(format!("invalid or duplicate outcome label `{l}`")));
            }
        }
        let k = macrostate_dim;
        let space = SpaceLabel::new(id, (1 + labels.len()) * k)?;
        let ready = Macrostate {
            label: READY.to_string(),
            subspace: Subspace::block(space.clone(), 0, k)?,
        };
        let mut outcomes = Vec::with_capacity(labels.len());
        let mut isometries = Vec::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            let subspace = Subspace::block(space.clone(), (i + 1) * k, k)?;
            let iso = random_isometry(&ready.subspace, &subspace, seed::derive(seed, label))?;
            outcomes.push(Macrostate {
                label: label.clone(),
                subspace,
            });
            isometries.push(iso);
        }
        Ok(Macrosystem {
            space,
            ready,
            outcomes,
            isometries,
        })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn ready(&self) -> &Macrostate {
        &self.ready
    }

    pub fn outcomes(&self) -> &[Macrostate] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<String> {
        self.outcomes.iter().map(|m| m.label.clone()).collect()
    }

    pub fn macrostate_dim(&self) -> usize {
        self.ready.subspace.dim()
    }

    /// All macrostates, ready first.
    pub fn macrostates(&self) -> impl Iterator<Item = &Macrostate> {
        std::iter::once(&self.ready).chain(self.outcomes.iter())
    }

    pub fn macrostate(&self, label: &str) -> Result<&Macrostate> {
        self.macrostates()
            .find(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn outcome_index(&self, label: &str) -> Result<usize> {
        self.outcomes
            .iter()
            .position(|m| m.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn isometry(&self, label: &str) -> Result<&Isometry> {
        Ok(&self.isometries[self.outcome_index(label)?])
    }

    /// Unitary on the whole macrosystem space that carries the ready block
    /// onto outcome block `label` by its isometry, carries that block back
    /// by the adjoint, and acts as the identity on every other block.
    pub fn transition_unitary(&self, label: &str) -> Result<CMatrix> {
        let iso = self.isometry(label)?;
        let forward = iso.ambient_matrix();
        let back = forward.adjoint();
        let p_ready = projector_from_subspace(&self.ready.subspace);
        let p_out = projector_from_subspace(iso.to());
        let n = self.space.dim();
        Ok(CMatrix::identity(n, n) - p_ready.matrix() - p_out.matrix() + forward + back)
    }

    /// Random unit vector in the ready macrostate.
    pub fn random_ready_state(&self, seed: u64) -> StateVector {
        self.ready.subspace.random_member(seed)
    }
}

/// A measuring apparatus.
#[derive(Clone, Debug, PartialEq)]
pub struct Apparatus {
    system: Macrosystem,
}

impl Apparatus {
    pub fn with_labels(id: &str, labels: &[String], macrostate_dim: usize, seed: u64) -> Result<Self> {
        Ok(Apparatus {
            system: Macrosystem::build(id, labels, macrostate_dim, seed)?,
        })
    }

    pub fn system(&self) -> &Macrosystem {
        &self.system
    }
}

impl std::ops::Deref for Apparatus {
    type Target = Macrosystem;
    fn deref(&self) -> &Macrosystem {
        &self.system
    }
}

/// Apparatus `id` with outcomes labeled `"1"..="n"`, macrostates on
/// disjoint coordinate blocks of size `macrostate_dim`.
pub fn build_apparatus(id: &str, n_outcomes: usize, macrostate_dim: usize, seed: u64) -> Result<Apparatus> {
    if n_outcomes < 2 {
        return Err(Error::invalid("an apparatus needs at least two outcomes"));
    }
    let labels: Vec<String> = (1..=n_outcomes).map(|i| i.to_string()).collect();
    Apparatus::with_labels(id, &labels, macrostate_dim, seed)
}

/// A named boolean function of apparatus outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReadoutRule {
    /// True iff every apparatus shows one of `allowed`.
    AllowedOutcomes { allowed: Vec<String> },
    /// True iff an odd number of apparatuses show `marked`.
    Parity { marked: String },
    /// True iff the relative frequency of `marked` is within `epsilon` of `p`.
    FrequencyBand { marked: String, p: f64, epsilon: f64 },
    /// Explicit truth table; tuples missing from the table are undefined.
    Table { entries: Vec<TableEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub outcomes: Vec<String>,
    pub value: bool,
}

impl ReadoutRule {
    /// `None` when the rule is undefined on `outcomes`.
    pub fn evaluate(&self, outcomes: &[String]) -> Option<bool> {
        match self {
            ReadoutRule::AllowedOutcomes { allowed } => {
                Some(outcomes.iter().all(|o| allowed.contains(o)))
            }
            ReadoutRule::Parity { marked } => {
                Some(outcomes.iter().filter(|o| *o == marked).count() % 2 == 1)
            }
            ReadoutRule::FrequencyBand { marked, p, epsilon } => {
                if outcomes.is_empty() {
                    return None;
                }
                let m = outcomes.iter().filter(|o| *o == marked).count() as u64;
                Some(band::in_band(m, outcomes.len() as u64, *p, *epsilon))
            }
            ReadoutRule::Table { entries } => entries
                .iter()
                .find(|e| e.outcomes.as_slice() == outcomes)
                .map(|e| e.value),
        }
    }
}

/// An observer who writes one of two verdicts depending on apparatus outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct GradStudent {
    system: Macrosystem,
    true_label: String,
    false_label: String,
    rule: ReadoutRule,
}

impl GradStudent {
    pub fn build(
        id: &str,
        true_label: &str,
        false_label: &str,
        rule: ReadoutRule,
        macrostate_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        if true_label == false_label {
            return Err(Error::invalid("student verdict labels must differ"));
        }
        let labels = [true_label.to_string(), false_label.to_string()];
        Ok(GradStudent {
            system: Macrosystem::build(id, &labels, macrostate_dim, seed)?,
            true_label: true_label.to_string(),
            false_label: false_label.to_string(),
            rule,
        })
    }

    pub fn system(&self) -> &Macrosystem {
        &self.system
    }

    pub fn rule(&self) -> &ReadoutRule {
        &self.rule
    }

    pub fn verdict_label(&self, verdict: bool) -> &str {
        if verdict {
            &self.true_label
        } else {
            &self.false_label
        }
    }

    pub fn true_label(&self) -> &str {
        &self.true_label
    }

    pub fn false_label(&self) -> &str {
        &self.false_label
    }
}

impl std::ops::Deref for GradStudent {
    type Target = Macrosystem;
    fn deref(&self) -> &Macrosystem {
        &self.system
    }
}

/// The environment: a featureless space that interacts with one macrosystem at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    space: SpaceLabel,
}

impl Environment {
    pub fn new(id: &str, dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("environment dimension must be at least 2"));
        }
        Ok(Environment {
            space: SpaceLabel::new(id, dim)?,
        })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }
}
