//! Dense evolution versus the branch ledger on small repetition experiments.

use serde::{Deserialize, Serialize};

use super::dense::{branch_weights, evolve_dense, DenseState};
use super::ledger::{born_branch_ledger, BranchKey};
use crate::error::{Error, Result};
use crate::linalg::{SpaceLabel, StateVector, C64};
use crate::model::{build_apparatus, measurement_step, Apparatus, ExperimentAssembly, Microsystem, Subsystem, SubsystemKind};
use crate::seed;

/// Default dense budget on the joint dimension.
pub const DENSE_BUDGET: usize = 200_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossValidationConfig {
    /// Number of (qubit, apparatus) copies.
    pub copies: usize,
    /// Born weight of outcome `"1"`.
    pub p: f64,
    pub macrostate_dim: usize,
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_budget() -> usize {
    DENSE_BUDGET
}

impl Default for CrossValidationConfig {
    fn default() -> Self {
        CrossValidationConfig {
            copies: 3,
            p: 0.5,
            macrostate_dim: 4,
            seed: 0,
            budget: DENSE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchComparison {
    pub outcomes: Vec<String>,
    pub dense: f64,
    pub ledger: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub copies: usize,
    pub p: f64,
    pub joint_dim: usize,
    pub max_discrepancy: f64,
    pub dense_total_weight: f64,
    pub branches: Vec<BranchComparison>,
}

/// Run `copies` qubit measurements densely and compare every outcome
/// string's squared norm with the ledger weight for its count of `"1"`s.
pub fn cross_validate(config: &CrossValidationConfig) -> Result<CrossValidation> {
    crate::engine::ledger::validate_probability(config.p)?;
    if config.copies == 0 || config.macrostate_dim == 0 {
        return Err(Error::invalid("copies and macrostate_dim must be positive"));
    }
    let pair_dim = 2 * 3 * config.macrostate_dim;
    let joint_dim = pair_dim
        .checked_pow(config.copies as u32)
        .filter(|&d| d <= config.budget)
        .ok_or(Error::BudgetExceeded {
            dim: pair_dim.saturating_pow(config.copies as u32),
            budget: config.budget,
        })?;

    let mut micros = Vec::new();
    let mut apparatuses: Vec<Apparatus> = Vec::new();
    let mut subsystems = Vec::new();
    for i in 0..config.copies {
        let space = SpaceLabel::new(format!("s{i}"), 2)?;
        let micro = Microsystem::with_coordinate_outcomes(space.clone(), &[("1", &[0]), ("2", &[1])])?;
        let app = build_apparatus(
            &format!("A{i}"),
            2,
            config.macrostate_dim,
            seed::derive_index(seed::derive(config.seed, "apparatus"), i as u64),
        )?;
        subsystems.push(Subsystem {
            space,
            kind: SubsystemKind::Micro,
        });
        subsystems.push(Subsystem {
            space: app.space().clone(),
            kind: SubsystemKind::Apparatus,
        });
        micros.push(micro);
        apparatuses.push(app);
    }
    let assembly = ExperimentAssembly::new(subsystems)?;

    let ready_seed = seed::derive(config.seed, "ready");
    let mut factors = Vec::new();
    for (i, (m, a)) in micros.iter().zip(&apparatuses).enumerate() {
        let psi = StateVector::from_slice(
            m.space().clone(),
            &[C64::new(config.p.sqrt(), 0.0), C64::new((1.0 - config.p).sqrt(), 0.0)],
        )?;
        factors.push(psi);
        factors.push(a.random_ready_state(seed::derive_index(ready_seed, i as u64)));
    }
    let mut state = DenseState::product(assembly.clone(), &factors)?;
    for (m, a) in micros.iter().zip(&apparatuses) {
        let op = measurement_step(&assembly, a, m)?;
        state = evolve_dense(&state, &op)?;
    }

    let ledger = born_branch_ledger(config.p, config.copies as u64)?;
    let refs: Vec<&Apparatus> = apparatuses.iter().collect();
    let mut branches = Vec::new();
    let mut max_discrepancy = 0.0f64;
    let mut dense_total = 0.0;
    for (outcomes, dense) in branch_weights(&state, &refs)? {
        let count = outcomes.iter().filter(|o| *o == "1").count() as u64;
        let key = BranchKey::Count {
            marked: "1".to_string(),
            count,
            copies: config.copies as u64,
        };
        let ledger_weight = ledger.find(&key).expect("ledger covers every count").weight;
        max_discrepancy = max_discrepancy.max((dense - ledger_weight).abs());
        dense_total += dense;
        branches.push(BranchComparison {
            outcomes,
            dense,
            ledger: ledger_weight,
        });
    }
    Ok(CrossValidation {
        copies: config.copies,
        p: config.p,
        joint_dim,
        max_discrepancy,
        dense_total_weight: dense_total,
        branches,
    })
}
