use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{tensor_product, SpaceLabel, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsystemKind {
    Micro,
    Apparatus,
    Student,
    Environment,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub space: SpaceLabel,
    pub kind: SubsystemKind,
}

/// An ordered list of subsystems whose joint space is their tensor product
/// in that order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentAssembly {
    subsystems: Vec<Subsystem>,
    joint: SpaceLabel,
}

impl ExperimentAssembly {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::invalid("assembly needs at least one subsystem"));
        }
        for (i, s) in subsystems.iter().enumerate() {
            if subsystems[..i].iter().any(|o| o.space.id() == s.space.id()) {
                return Err(Error::DuplicateId(s.space.id().to_string()));
            }
        }
        let joint = subsystems[1..]
            .iter()
            .fold(subsystems[0].space.clone(), |acc, s| acc.tensor(&s.space));
        Ok(ExperimentAssembly { subsystems, joint })
    }

    /// Builder-style constructor from `(space, kind)` pairs.
    pub fn of(parts: &[(&SpaceLabel, SubsystemKind)]) -> Result<Self> {
        Self::new(
            parts
                .iter()
                .map(|(s, k)| Subsystem {
                    space: (*s).clone(),
                    kind: *k,
                })
                .collect(),
        )
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.space.dim()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.joint.dim()
    }

    pub fn joint_space(&self) -> &SpaceLabel {
        &self.joint
    }

    /// Position of the subsystem with the given space, which must match exactly.
    pub fn position(&self, space: &SpaceLabel) -> Result<usize> {
        let i = self
            .subsystems
            .iter()
            .position(|s| s.space.id() == space.id())
            .ok_or_else(|| Error::UnknownLabel(space.id().to_string()))?;
        if self.subsystems[i].space.dim() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems[i].space.dim(),
                actual: space.dim(),
            });
        }
        Ok(i)
    }

    /// `⊗ factors` in assembly order; `factors[i]` must live in subsystem `i`.
    pub fn product_state(&self, factors: &[StateVector]) -> Result<StateVector> {
        if factors.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                actual: factors.len(),
            });
        }
        for (f, s) in factors.iter().zip(&self.subsystems) {
            if f.space() != &s.space {
                return Err(Error::SpaceMismatch {
                    left: s.space.id().to_string(),
                    right: f.space().id().to_string(),
                });
            }
        }
        let joint = factors[1..]
            .iter()
            .fold(factors[0].clone(), |acc, f| tensor_product(&acc, f));
        debug_assert_eq!(joint.space(), &self.joint);
        Ok(joint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_dimension_and_duplicate_ids() {
        let s = SpaceLabel::new("s", 2).unwrap();
        let a = SpaceLabel::new("A", 12).unwrap();
        let asm = ExperimentAssembly::of(&[(&s, SubsystemKind::Micro), (&a, SubsystemKind::Apparatus)]).unwrap();
        assert_eq!(asm.total_dim(), 24);
        assert_eq!(asm.position(&a).unwrap(), 1);
        assert!(ExperimentAssembly::of(&[(&s, SubsystemKind::Micro), (&s, SubsystemKind::Micro)]).is_err());
    }
}
