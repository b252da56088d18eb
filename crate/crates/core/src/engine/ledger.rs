//! Exact branch bookkeeping.
//!
//! After a measurement the global state is a sum of mutually orthogonal
//! terms, one per outcome record. Their squared norms are fixed by the
//! initial state and the projectors alone, so they can be tallied without
//! ever forming the exponentially large state vector.

use std::fmt;
use std::io::Write;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::linalg::{ProjectorFamily, StateVector};

/// Which outcome records a branch stands for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchKey {
    /// All records of `copies` repetitions in which `marked` occurs `count` times.
    Count { marked: String, count: u64, copies: u64 },
    /// One specific sequence of outcomes.
    Sequence(Vec<String>),
}

impl fmt::Display for BranchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchKey::Count { count, .. } => write!(f, "m={count}"),
            BranchKey::Sequence(labels) => write!(f, "({})", labels.join(",")),
        }
    }
}

/// A class of orthogonal branches sharing one squared norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub key: BranchKey,
    /// Number of orthogonal terms in the class.
    pub multiplicity: BigUint,
    pub ln_multiplicity: f64,
    /// Squared norm of one term. May underflow to zero; `ln_weight` does not.
    pub weight: f64,
    pub ln_weight: f64,
}

impl Branch {
    /// Total squared norm of the class, `multiplicity · weight`.
    pub fn mass(&self) -> f64 {
        self.ln_mass().exp()
    }

    pub fn ln_mass(&self) -> f64 {
        if self.ln_weight == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.ln_multiplicity + self.ln_weight
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchLedger {
    branches: Vec<Branch>,
}

impl BranchLedger {
    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// `Σ multiplicity · weight`, summed in branch order.
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(Branch::mass).sum()
    }

    pub fn find(&self, key: &BranchKey) -> Option<&Branch> {
        self.branches.iter().find(|b| &b.key == key)
    }

    /// CSV with header `outcome_tuple,multiplicity,weight,cumulative_weight`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["outcome_tuple", "multiplicity", "weight", "cumulative_weight"])
            .map_err(csv_error)?;
        let mut cumulative = 0.0;
        for b in &self.branches {
            cumulative += b.mass();
            w.write_record([
                b.key.to_string(),
                b.multiplicity.to_string(),
                format!("{:?}", b.weight),
                format!("{:?}", cumulative),
            ])
            .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `m ln p + (n - m) ln(1 - p)` with `0 · ln 0 = 0`.
pub fn ln_bernoulli_weight(p: f64, n: u64, m: u64) -> f64 {
    let term = |k: u64, q: f64| if k == 0 { 0.0 } else { k as f64 * q.ln() };
    term(m, p) + term(n - m, 1.0 - p)
}

pub(crate) fn validate_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Ledger of `n` independent two-outcome measurements with outcome `"1"`
/// carrying Born weight `p`: one class per count `m`, with `C(n, m)` terms
/// of squared norm `p^m (1-p)^(n-m)` each.
pub fn born_branch_ledger(p: f64, n: u64) -> Result<BranchLedger> {
    validate_probability(p)?;
    if n == 0 {
        return Err(Error::invalid("number of repetitions must be at least 1"));
    }
    let mut branches = Vec::with_capacity(n as usize + 1);
    let mut multiplicity = BigUint::from(1u32);
    for m in 0..=n {
        let ln_weight = ln_bernoulli_weight(p, n, m);
        branches.push(Branch {
            key: BranchKey::Count {
                marked: "1".to_string(),
                count: m,
                copies: n,
            },
            multiplicity: multiplicity.clone(),
            ln_multiplicity: ln_binomial(n, m),
            weight: ln_weight.exp(),
            ln_weight,
        });
        if m < n {
            multiplicity = multiplicity * BigUint::from(n - m) / BigUint::from(m + 1);
        }
    }
    Ok(BranchLedger { branches })
}

/// Ledger of a first measurement with projectors `first` followed by a
/// second with projectors `second`: one branch per pair `(λ, ξ)` with
/// squared norm `‖P_ξ P_λ ψ‖² = ⟨ψ|P_λ P_ξ P_λ|ψ⟩`.
pub fn collapse_branch_ledger(
    psi: &StateVector,
    first: &ProjectorFamily,
    second: &ProjectorFamily,
) -> Result<BranchLedger> {
    if first.ambient() != second.ambient() {
        return Err(Error::SpaceMismatch {
            left: first.ambient().id().to_string(),
            right: second.ambient().id().to_string(),
        });
    }
    if !psi.is_normalized() {
        return Err(Error::invalid(format!(
            "state must be normalized (norm² = {})",
            psi.norm_sqr()
        )));
    }
    let mut branches = Vec::new();
    for (l, p_first) in first.members() {
        let projected = p_first.apply(psi)?;
        for (x, p_second) in second.members() {
            let weight = p_second.apply(&projected)?.norm_sqr();
            branches.push(Branch {
                key: BranchKey::Sequence(vec![l.clone(), x.clone()]),
                multiplicity: BigUint::from(1u32),
                ln_multiplicity: 0.0,
                weight,
                ln_weight: weight.ln(),
            });
        }
    }
    Ok(BranchLedger { branches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_measurement() {
        let l = born_branch_ledger(0.3, 1).unwrap();
        let w: Vec<f64> = l.branches().iter().map(|b| b.weight).collect();
        assert!((w[0] - 0.7).abs() < 1e-15 && (w[1] - 0.3).abs() < 1e-15);
        assert!(l.branches().iter().all(|b| b.multiplicity == BigUint::from(1u32)));
    }

    #[test]
    fn two_fair_measurements() {
        let l = born_branch_ledger(0.5, 2).unwrap();
        let mult: Vec<String> = l.branches().iter().map(|b| b.multiplicity.to_string()).collect();
        assert_eq!(mult, ["1", "2", "1"]);
        for b in l.branches() {
            assert!((b.weight - 0.25).abs() < 1e-15);
        }
        assert!((l.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_probabilities() {
        let l = born_branch_ledger(0.0, 2).unwrap();
        assert_eq!(l.branches()[0].weight, 1.0);
        assert_eq!(l.branches()[2].weight, 0.0);
        assert_eq!(l.branches()[2].mass(), 0.0);
        let l = born_branch_ledger(1.0, 3).unwrap();
        assert_eq!(l.branches()[3].weight, 1.0);
        assert!((l.total_weight() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(born_branch_ledger(-0.1, 3).is_err());
        assert!(born_branch_ledger(1.5, 3).is_err());
        assert!(born_branch_ledger(f64::NAN, 3).is_err());
        assert!(born_branch_ledger(0.5, 0).is_err());
    }

    #[test]
    fn large_n_total_weight() {
        let l = born_branch_ledger(0.37, 10_000).unwrap();
        assert!((l.total_weight() - 1.0).abs() < 1e-9);
        // C(10000, 5000) has 3009 decimal digits
        assert_eq!(l.branches()[5000].multiplicity.to_string().len(), 3009);
    }

    #[test]
    fn csv_layout() {
        let l = born_branch_ledger(0.5, 2).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "outcome_tuple,multiplicity,weight,cumulative_weight");
        assert_eq!(lines[1], "m=0,1,0.25,0.25");
        assert_eq!(lines[2], "m=1,2,0.25,0.75");
        assert_eq!(lines[3], "m=2,1,0.25,1.0");
    }
}
