use crate::error::{Error, Result};
use crate::linalg::{projector_from_subspace, StateVector};
use crate::model::{Apparatus, ExperimentAssembly, LocalOperator};

/// Largest norm² accepted for a dense state.
pub const NORM_SLACK: f64 = 1e-9;

/// An explicit joint state of an assembly.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    assembly: ExperimentAssembly,
    state: StateVector,
}

impl DenseState {
    pub fn new(assembly: ExperimentAssembly, state: StateVector) -> Result<Self> {
        if state.space() != assembly.joint_space() {
            return Err(Error::SpaceMismatch {
                left: assembly.joint_space().id().to_string(),
                right: state.space().id().to_string(),
            });
        }
        let n2 = state.norm_sqr();
        if n2 > 1.0 + NORM_SLACK {
            return Err(Error::invalid(format!("state norm² {n2} exceeds 1")));
        }
        Ok(DenseState { assembly, state })
    }

    pub fn product(assembly: ExperimentAssembly, factors: &[StateVector]) -> Result<Self> {
        let state = assembly.product_state(factors)?;
        Self::new(assembly, state)
    }

    pub fn assembly(&self) -> &ExperimentAssembly {
        &self.assembly
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

/// Apply `op` to `state`.
pub fn evolve_dense(state: &DenseState, op: &LocalOperator) -> Result<DenseState> {
    let dims = state.assembly.dims();
    if op.layout() != dims.as_slice() {
        return Err(Error::DimensionMismatch {
            expected: state.assembly.total_dim(),
            actual: op.total_dim(),
        });
    }
    let amplitudes = op.apply(state.state.amplitudes())?;
    Ok(DenseState {
        assembly: state.assembly.clone(),
        state: StateVector::new(state.state.space().clone(), amplitudes)?,
    })
}

/// Squared norm of the state's component in every joint outcome block of
/// `apparatuses`, in lexicographic order of outcome tuples (first apparatus
/// slowest).
pub fn branch_weights(state: &DenseState, apparatuses: &[&Apparatus]) -> Result<Vec<(Vec<String>, f64)>> {
    let dims = state.assembly.dims();
    let mut projectors = Vec::with_capacity(apparatuses.len());
    for a in apparatuses {
        let pos = state.assembly.position(a.space())?;
        let mut per_label = Vec::new();
        for m in a.outcomes() {
            let p = projector_from_subspace(&m.subspace);
            per_label.push((
                m.label.clone(),
                LocalOperator::new(dims.clone(), vec![pos], p.matrix().clone())?,
            ));
        }
        projectors.push(per_label);
    }
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    descend(state.state.amplitudes(), &projectors, &mut prefix, &mut out)?;
    Ok(out)
}

fn descend(
    v: &crate::linalg::CVector,
    projectors: &[Vec<(String, LocalOperator)>],
    prefix: &mut Vec<String>,
    out: &mut Vec<(Vec<String>, f64)>,
) -> Result<()> {
    match projectors.split_first() {
        None => out.push((prefix.clone(), v.norm_squared())),
        Some((level, rest)) => {
            for (label, op) in level {
                let w = op.apply(v)?;
                prefix.push(label.clone());
                descend(&w, rest, prefix, out)?;
                prefix.pop();
            }
        }
    }
    Ok(())
}
