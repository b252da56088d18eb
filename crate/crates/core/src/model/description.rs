//! JSON-serializable description of an assembly.
//!
//! ```json
//! {
//!   "subsystems": [
//!     { "kind": "micro", "id": "s", "dim": 2,
//!       "outcomes": [ { "label": "1", "basis": [0] },
//!                     { "label": "2", "vectors": [[[0.0, 0.0], [0.6, 0.8]]] } ] },
//!     { "kind": "apparatus", "id": "A", "outcomes": ["1", "2"], "macrostate_dim": 4, "seed": 1 },
//!     { "kind": "student", "id": "G", "true_label": "B-true", "false_label": "B-false",
//!       "rule": { "rule": "allowed_outcomes", "allowed": ["1", "2"] },
//!       "macrostate_dim": 4, "seed": 2 },
//!     { "kind": "environment", "id": "E", "dim": 8 }
//!   ]
//! }
//! ```
//!
//! Complex numbers are `[re, im]` pairs. An outcome subspace is given either
//! by computational `basis` indices or by explicit orthonormal `vectors`.

use serde::{Deserialize, Serialize};

use super::assembly::{ExperimentAssembly, Subsystem, SubsystemKind};
use super::systems::{Apparatus, Environment, GradStudent, Microsystem, ReadoutRule};
use crate::error::{Error, Result};
use crate::linalg::{CVector, SpaceLabel, Subspace, C64};

pub type ComplexPair = [f64; 2];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblyDescription {
    pub subsystems: Vec<SubsystemDescription>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubsystemDescription {
    Micro {
        id: String,
        dim: usize,
        outcomes: Vec<OutcomeDescription>,
    },
    Apparatus {
        id: String,
        outcomes: Vec<String>,
        macrostate_dim: usize,
        seed: u64,
    },
    Student {
        id: String,
        true_label: String,
        false_label: String,
        rule: ReadoutRule,
        macrostate_dim: usize,
        seed: u64,
    },
    Environment {
        id: String,
        dim: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDescription {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<ComplexPair>>>,
}

impl OutcomeDescription {
    pub fn subspace(&self, ambient: &SpaceLabel) -> Result<Subspace> {
        match (&self.basis, &self.vectors) {
            (Some(idx), None) => Subspace::coordinate(ambient.clone(), idx),
            (None, Some(vs)) => {
                let cols = vs
                    .iter()
                    .map(|v| complex_vector(v, ambient.dim()))
                    .collect::<Result<Vec<_>>>()?;
                Subspace::from_vectors(ambient.clone(), &cols)
            }
            _ => Err(Error::invalid(format!(
                "outcome `{}` needs exactly one of `basis` or `vectors`",
                self.label
            ))),
        }
    }
}

pub fn complex_vector(v: &[ComplexPair], dim: usize) -> Result<CVector> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: v.len(),
        });
    }
    Ok(CVector::from_iterator(dim, v.iter().map(|[re, im]| C64::new(*re, *im))))
}

/// Everything built from an [`AssemblyDescription`].
#[derive(Clone, Debug)]
pub struct BuiltAssembly {
    pub assembly: ExperimentAssembly,
    pub micros: Vec<Microsystem>,
    pub apparatuses: Vec<Apparatus>,
    pub students: Vec<GradStudent>,
    pub environments: Vec<Environment>,
}

impl BuiltAssembly {
    pub fn apparatus(&self, id: &str) -> Result<&Apparatus> {
        self.apparatuses
            .iter()
            .find(|a| a.space().id() == id)
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn student(&self, id: &str) -> Result<&GradStudent> {
        self.students
            .iter()
            .find(|a| a.space().id() == id)
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }

    pub fn micro(&self, id: &str) -> Result<&Microsystem> {
        self.micros
            .iter()
            .find(|a| a.space().id() == id)
            .ok_or_else(|| Error::UnknownLabel(id.to_string()))
    }
}

impl AssemblyDescription {
    pub fn build(&self) -> Result<BuiltAssembly> {
        let mut subsystems = Vec::new();
        let mut micros = Vec::new();
        let mut apparatuses = Vec::new();
        let mut students = Vec::new();
        let mut environments = Vec::new();
        for s in &self.subsystems {
            match s {
                SubsystemDescription::Micro { id, dim, outcomes } => {
                    let space = SpaceLabel::new(id.as_str(), *dim)?;
                    let parts = outcomes
                        .iter()
                        .map(|o| Ok((o.label.clone(), o.subspace(&space)?)))
                        .collect::<Result<Vec<_>>>()?;
                    let m = Microsystem::new(space.clone(), parts)?;
                    subsystems.push(Subsystem {
                        space,
                        kind: SubsystemKind::Micro,
                    });
                    micros.push(m);
                }
                SubsystemDescription::Apparatus {
                    id,
                    outcomes,
                    macrostate_dim,
                    seed,
                } => {
                    if outcomes.len() < 2 {
                        return Err(Error::invalid(format!("apparatus `{id}` needs at least two outcomes")));
                    }
                    let a = Apparatus::with_labels(id, outcomes, *macrostate_dim, *seed)?;
                    subsystems.push(Subsystem {
                        space: a.space().clone(),
                        kind: SubsystemKind::Apparatus,
                    });
                    apparatuses.push(a);
                }
                SubsystemDescription::Student {
                    id,
                    true_label,
                    false_label,
                    rule,
                    macrostate_dim,
                    seed,
                } => {
                    let g = GradStudent::build(id, true_label, false_label, rule.clone(), *macrostate_dim, *seed)?;
                    subsystems.push(Subsystem {
                        space: g.space().clone(),
                        kind: SubsystemKind::Student,
                    });
                    students.push(g);
                }
                SubsystemDescription::Environment { id, dim } => {
                    let e = Environment::new(id, *dim)?;
                    subsystems.push(Subsystem {
                        space: e.space().clone(),
                        kind: SubsystemKind::Environment,
                    });
                    environments.push(e);
                }
            }
        }
        Ok(BuiltAssembly {
            assembly: ExperimentAssembly::new(subsystems)?,
            micros,
            apparatuses,
            students,
            environments,
        })
    }
}
