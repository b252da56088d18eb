//! Evolution engines: explicit state vectors for small assemblies and exact
//! branch ledgers for large repetition experiments.

mod cross_validate;
mod dense;
mod ledger;

pub use cross_validate::{cross_validate, BranchComparison, CrossValidation, CrossValidationConfig, DENSE_BUDGET};
pub use dense::{branch_weights, evolve_dense, DenseState, NORM_SLACK};
pub use ledger::{born_branch_ledger, collapse_branch_ledger, ln_bernoulli_weight, Branch, BranchKey, BranchLedger};
