//! Run configuration, read from JSON. Every section and field is optional;
//! unknown keys are rejected.

use std::path::Path;

use measurement_core::linalg::{ProjectorFamily, SpaceLabel, StateVector};
use measurement_core::model::{complex_vector, ComplexPair, Microsystem, OutcomeDescription};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; each check derives its own seed from it by name.
    pub seed: u64,
    pub postulate_a: PostulateAConfig,
    pub postulate_b: PostulateBConfig,
    pub born: BornConfig,
    pub collapse: CollapseConfig,
    pub overlap: OverlapConfig,
    pub cross_validate: CrossValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            postulate_a: PostulateAConfig::default(),
            postulate_b: PostulateBConfig::default(),
            born: BornConfig::default(),
            collapse: CollapseConfig::default(),
            overlap: OverlapConfig::default(),
            cross_validate: CrossValidateConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A micro system: dimension plus outcome subspaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MicroConfig {
    pub dim: usize,
    pub outcomes: Vec<OutcomeDescription>,
}

impl Default for MicroConfig {
    fn default() -> Self {
        MicroConfig {
            dim: 2,
            outcomes: vec![basis_outcome("1", 0), basis_outcome("2", 1)],
        }
    }
}

impl MicroConfig {
    pub fn build(&self) -> Result<Microsystem, CliError> {
        let space = SpaceLabel::new("s", self.dim)?;
        let parts = self
            .outcomes
            .iter()
            .map(|o| Ok((o.label.clone(), o.subspace(&space)?)))
            .collect::<measurement_core::Result<Vec<_>>>()?;
        Ok(Microsystem::new(space, parts)?)
    }
}

fn basis_outcome(label: &str, index: usize) -> OutcomeDescription {
    OutcomeDescription {
        label: label.into(),
        basis: Some(vec![index]),
        vectors: None,
    }
}

fn vector_outcome(label: &str, v: Vec<ComplexPair>) -> OutcomeDescription {
    OutcomeDescription {
        label: label.into(),
        basis: None,
        vectors: Some(vec![v]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostulateAConfig {
    pub micro: MicroConfig,
    pub macrostate_dim: usize,
    pub trials: usize,
    /// `|⟨s₁|s₂⟩|` of the deliberately non-orthogonal pair used by the suite.
    pub negative_control_overlap: f64,
}

impl Default for PostulateAConfig {
    fn default() -> Self {
        PostulateAConfig {
            micro: MicroConfig::default(),
            macrostate_dim: 4,
            trials: 100,
            negative_control_overlap: 0.3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostulateBConfig {
    pub micro: MicroConfig,
    pub macrostate_dim: usize,
    /// Random input superpositions per apparatus seed.
    pub inputs: usize,
    pub apparatus_seeds: usize,
}

impl Default for PostulateBConfig {
    fn default() -> Self {
        PostulateBConfig {
            micro: MicroConfig::default(),
            macrostate_dim: 4,
            inputs: 50,
            apparatus_seeds: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BornConfig {
    pub p: f64,
    pub epsilon: f64,
    pub n_list: Vec<u64>,
    /// Report the first `N` whose tail is below each of these.
    pub thresholds: Vec<f64>,
    pub grid_p: Vec<f64>,
    pub grid_epsilon: Vec<f64>,
    pub grid_n: Vec<u64>,
}

impl Default for BornConfig {
    fn default() -> Self {
        use measurement_core::checks::born::{DEFAULT_EPSILON_GRID, DEFAULT_N_GRID, DEFAULT_P_GRID};
        let mut n_list = vec![10, 20, 50, 100];
        n_list.extend((1..=25).map(|i| 200 * i));
        n_list.extend([6000, 8000, 10_000]);
        BornConfig {
            p: 0.3,
            epsilon: 0.05,
            n_list,
            thresholds: vec![1e-3, 1e-6],
            grid_p: DEFAULT_P_GRID.to_vec(),
            grid_epsilon: DEFAULT_EPSILON_GRID.to_vec(),
            grid_n: DEFAULT_N_GRID.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollapseConfig {
    pub dim: usize,
    /// Initial micro state; normalized on load.
    pub psi: Vec<ComplexPair>,
    pub first: Vec<OutcomeDescription>,
    pub second: Vec<OutcomeDescription>,
    /// Monte Carlo samples for the frequency bands; 0 skips them.
    pub samples: u64,
    /// Additional random instances (state and both families) checked against
    /// direct projector algebra.
    pub random_instances: usize,
    pub random_dim: usize,
}

impl Default for CollapseConfig {
    fn default() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CollapseConfig {
            dim: 2,
            psi: vec![[1.0, 0.0], [0.0, 0.0]],
            first: vec![basis_outcome("1", 0), basis_outcome("2", 1)],
            second: vec![
                vector_outcome("alpha", vec![[h, 0.0], [h, 0.0]]),
                vector_outcome("beta", vec![[h, 0.0], [-h, 0.0]]),
            ],
            samples: 100_000,
            random_instances: 100,
            random_dim: 4,
        }
    }
}

impl CollapseConfig {
    pub fn space(&self) -> Result<SpaceLabel, CliError> {
        Ok(SpaceLabel::new("s", self.dim)?)
    }

    pub fn state(&self) -> Result<StateVector, CliError> {
        let v = complex_vector(&self.psi, self.dim)?;
        Ok(StateVector::new(self.space()?, v)?.normalized()?)
    }

    pub fn families(&self) -> Result<(ProjectorFamily, ProjectorFamily), CliError> {
        let space = self.space()?;
        let family = |outcomes: &[OutcomeDescription]| -> Result<ProjectorFamily, CliError> {
            let parts = outcomes
                .iter()
                .map(|o| Ok((o.label.clone(), o.subspace(&space)?)))
                .collect::<measurement_core::Result<Vec<_>>>()?;
            Ok(ProjectorFamily::from_subspaces(space.clone(), parts)?)
        };
        Ok((family(&self.first)?, family(&self.second)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlapConfig {
    /// Ascending dimensions.
    pub dims: Vec<usize>,
    pub n_pairs: usize,
    pub subspace_dim: usize,
    pub subspace_pairs: usize,
    pub bins: usize,
}

impl Default for OverlapConfig {
    fn default() -> Self {
        OverlapConfig {
            dims: vec![64, 1024, 4096],
            n_pairs: 10_000,
            subspace_dim: 4,
            subspace_pairs: 20,
            bins: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossValidateConfig {
    pub copies: Vec<usize>,
    pub p: f64,
    pub macrostate_dim: usize,
    pub budget: usize,
}

impl Default for CrossValidateConfig {
    fn default() -> Self {
        CrossValidateConfig {
            copies: vec![1, 2, 3],
            p: 0.5,
            macrostate_dim: 4,
            budget: measurement_core::engine::DENSE_BUDGET,
        }
    }
}

/// Qubit whose two one-dimensional outcome subspaces have real overlap
/// `overlap`, used as the negative control.
pub fn non_orthogonal_micro(overlap: f64) -> Result<Microsystem, CliError> {
    if !(0.0..1.0).contains(&overlap) {
        return Err(CliError::Config(format!("negative-control overlap {overlap} outside [0, 1)")));
    }
    let cfg = MicroConfig {
        dim: 2,
        outcomes: vec![
            basis_outcome("1", 0),
            vector_outcome("2", vec![[overlap, 0.0], [(1.0 - overlap * overlap).sqrt(), 0.0]]),
        ],
    };
    cfg.build()
}
