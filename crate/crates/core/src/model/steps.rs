//! The three evolution rules of an experiment and the `realizes` predicate.

use serde::{Deserialize, Serialize};

use super::assembly::ExperimentAssembly;
use super::operator::{LocalOperator, DENSE_MATRIX_LIMIT};
use super::systems::{Apparatus, Environment, GradStudent, Macrosystem, Microsystem};
use crate::error::{Error, Result};
use crate::linalg::{kron, projector_from_subspace, random_unitary, CMatrix, StateVector};
use crate::seed;

/// Largest `max |M^H M - I|` accepted for a constructed evolution operator.
pub const UNITARITY_TOL: f64 = 1e-9;

fn ensure_unitary(op: LocalOperator) -> Result<LocalOperator> {
    let defect = op.unitarity_defect();
    if defect > UNITARITY_TOL {
        return Err(Error::NotUnitary { defect });
    }
    Ok(op)
}

/// Measurement of `micro` by `apparatus`.
///
/// On `(outcome subspace λ) ⊗ H_∅` the operator is `1 ⊗ U_λ`; it is completed
/// to a unitary by sending block `λ` back to `∅` with `U_λ^H` and acting as
/// the identity on the other apparatus blocks and on micro states orthogonal
/// to every outcome subspace. When the outcome subspaces are not orthogonal
/// this construction is not unitary and the builder rejects it.
pub fn measurement_step(
    assembly: &ExperimentAssembly,
    apparatus: &Apparatus,
    micro: &Microsystem,
) -> Result<LocalOperator> {
    let mut micro_labels = micro.labels();
    let mut app_labels = apparatus.labels();
    micro_labels.sort();
    app_labels.sort();
    if micro_labels != app_labels {
        return Err(Error::LabelMismatch {
            micro: micro.labels(),
            apparatus: apparatus.labels(),
        });
    }
    let sp = assembly.position(micro.space())?;
    let ap = assembly.position(apparatus.space())?;

    let ds = micro.space().dim();
    let da = apparatus.space().dim();
    let mut rest = CMatrix::identity(ds, ds);
    let mut w = CMatrix::zeros(ds * da, ds * da);
    for (label, sub) in micro.outcomes() {
        let p = projector_from_subspace(sub);
        rest -= p.matrix();
        w += kron(p.matrix(), &apparatus.transition_unitary(label)?);
    }
    w += kron(&rest, &CMatrix::identity(da, da));
    ensure_unitary(LocalOperator::new(assembly.dims(), vec![sp, ap], w)?)
}

/// Every tuple of outcome labels, first apparatus slowest.
fn outcome_tuples(apparatuses: &[&Apparatus]) -> Vec<Vec<String>> {
    let mut tuples = vec![Vec::new()];
    for a in apparatuses {
        let labels = a.labels();
        let mut next = Vec::with_capacity(tuples.len() * labels.len());
        for t in &tuples {
            for l in &labels {
                let mut t2: Vec<String> = t.clone();
                t2.push(l.clone());
                next.push(t2);
            }
        }
        tuples = next;
    }
    tuples
}

/// Student readout of the listed apparatuses.
///
/// For apparatus states in outcome blocks `(λ₁..λ_k)` and the student in
/// its ready block, the student moves to the verdict block `f(λ₁..λ_k)`.
/// Where any apparatus is outside its outcome blocks the operator is the
/// identity.
pub fn readout_step(
    assembly: &ExperimentAssembly,
    student: &GradStudent,
    apparatuses: &[&Apparatus],
) -> Result<LocalOperator> {
    if apparatuses.is_empty() {
        return Err(Error::invalid("readout needs at least one apparatus"));
    }
    let mut targets = Vec::with_capacity(apparatuses.len() + 1);
    for a in apparatuses {
        targets.push(assembly.position(a.space())?);
    }
    targets.push(assembly.position(student.space())?);

    let app_dim: usize = apparatuses.iter().map(|a| a.space().dim()).product();
    let dg = student.space().dim();
    if app_dim * dg > DENSE_MATRIX_LIMIT {
        return Err(Error::BudgetExceeded {
            dim: app_dim * dg,
            budget: DENSE_MATRIX_LIMIT,
        });
    }

    let mut q_true = CMatrix::zeros(app_dim, app_dim);
    let mut q_false = CMatrix::zeros(app_dim, app_dim);
    for tuple in outcome_tuples(apparatuses) {
        let verdict = student
            .rule()
            .evaluate(&tuple)
            .ok_or_else(|| Error::UndefinedReadout(tuple.clone()))?;
        let mut q = CMatrix::identity(1, 1);
        for (a, label) in apparatuses.iter().zip(&tuple) {
            let p = projector_from_subspace(&a.macrostate(label)?.subspace);
            q = kron(&q, p.matrix());
        }
        if verdict {
            q_true += q;
        } else {
            q_false += q;
        }
    }
    let q_rest = CMatrix::identity(app_dim, app_dim) - &q_true - &q_false;
    let v_true = student.transition_unitary(student.true_label())?;
    let v_false = student.transition_unitary(student.false_label())?;
    let r = kron(&q_true, &v_true) + kron(&q_false, &v_false) + kron(&q_rest, &CMatrix::identity(dg, dg));
    ensure_unitary(LocalOperator::new(assembly.dims(), targets, r)?)
}

/// Interaction of a macrosystem with the environment: an independent seeded
/// random unitary on each block `H_γ ⊗ H_E`, never mixing macrostates.
pub fn environment_step(
    assembly: &ExperimentAssembly,
    system: &Macrosystem,
    environment: &Environment,
    seed: u64,
) -> Result<LocalOperator> {
    let sp = assembly.position(system.space())?;
    let ep = assembly.position(environment.space())?;
    let ds = system.space().dim();
    let de = environment.space().dim();
    let id_e = CMatrix::identity(de, de);
    let mut covered = CMatrix::zeros(ds, ds);
    let mut w = CMatrix::zeros(ds * de, ds * de);
    for (i, m) in system.macrostates().enumerate() {
        let frame = m.subspace.frame();
        covered += frame * frame.adjoint();
        let block = kron(frame, &id_e);
        let u = random_unitary(block.ncols(), seed::derive_index(seed, i as u64));
        w += &block * u * block.adjoint();
    }
    w += kron(&(CMatrix::identity(ds, ds) - covered), &id_e);
    ensure_unitary(LocalOperator::new(assembly.dims(), vec![sp, ep], w)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub realized: bool,
    /// Norm of the component of the state outside `H_γ ⊗ H_rest`.
    pub defect: f64,
}

/// Whether `system` realizes macrostate `label` in the joint `state`, up to `tol`.
pub fn realizes(
    assembly: &ExperimentAssembly,
    state: &StateVector,
    system: &Macrosystem,
    label: &str,
    tol: f64,
) -> Result<Realization> {
    if state.space() != assembly.joint_space() {
        return Err(Error::SpaceMismatch {
            left: assembly.joint_space().id().to_string(),
            right: state.space().id().to_string(),
        });
    }
    let macrostate = system.macrostate(label)?;
    let pos = assembly.position(system.space())?;
    let p = projector_from_subspace(&macrostate.subspace);
    let proj = LocalOperator::new(assembly.dims(), vec![pos], p.matrix().clone())?;
    let inside = proj.apply(state.amplitudes())?;
    let defect = (state.amplitudes() - inside).norm();
    Ok(Realization {
        realized: defect <= tol,
        defect,
    })
}

/// Squared norm of the component of `state` inside the given macrostate block.
pub fn macrostate_weight(
    assembly: &ExperimentAssembly,
    state: &StateVector,
    system: &Macrosystem,
    label: &str,
) -> Result<f64> {
    let macrostate = system.macrostate(label)?;
    let pos = assembly.position(system.space())?;
    let p = projector_from_subspace(&macrostate.subspace);
    let proj = LocalOperator::new(assembly.dims(), vec![pos], p.matrix().clone())?;
    Ok(proj.apply(state.amplitudes())?.norm_squared())
}

/// Von Neumann entropy (natural log) of the reduced state of subsystem `position`.
pub fn entanglement_entropy(assembly: &ExperimentAssembly, state: &StateVector, position: usize) -> Result<f64> {
    let dims = assembly.dims();
    if position >= dims.len() {
        return Err(Error::invalid(format!("position {position} outside assembly")));
    }
    if state.space() != assembly.joint_space() {
        return Err(Error::SpaceMismatch {
            left: assembly.joint_space().id().to_string(),
            right: state.space().id().to_string(),
        });
    }
    let d = dims[position];
    let inner: usize = dims[position + 1..].iter().product();
    let outer: usize = dims[..position].iter().product();
    // rows: subsystem index; columns: (outer, inner) rest index
    let amps = state.amplitudes();
    let m = CMatrix::from_fn(d, outer * inner, |i, c| {
        let (o, n) = (c / inner, c % inner);
        amps[(o * d + i) * inner + n]
    });
    let rho = &m * m.adjoint();
    let eig = rho.symmetric_eigen();
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum())
}
