//! An observer reading the apparatus always finds one of the allowed outcomes.

use serde_json::json;

use super::report::CheckReport;
use crate::engine::{evolve_dense, DenseState};
use crate::error::{Error, Result};
use crate::linalg::StateVector;
use crate::model::{
    macrostate_weight, measurement_step, readout_step, realizes, Apparatus, ExperimentAssembly, GradStudent,
    LocalOperator, Microsystem, ReadoutRule, SubsystemKind,
};
use crate::seed;

/// Tolerance on the squared norm of the "B-false" student block.
pub const POSTULATE_B_TOL: f64 = 1e-9;
/// Largest weight outside the outcome subspaces accepted as measurable input.
pub const MEASURABLE_TOL: f64 = 1e-12;

pub const B_TRUE: &str = "B-true";
pub const B_FALSE: &str = "B-false";

/// Micro system, apparatus `A` and student `G` whose rule asks whether the
/// apparatus shows one of its outcomes.
#[derive(Clone, Debug)]
pub struct PostulateBSetup {
    pub assembly: ExperimentAssembly,
    pub micro: Microsystem,
    pub apparatus: Apparatus,
    pub student: GradStudent,
    measure: LocalOperator,
    readout: LocalOperator,
}

impl PostulateBSetup {
    pub fn new(micro: Microsystem, macrostate_dim: usize, apparatus_seed: u64, student_seed: u64) -> Result<Self> {
        let labels = micro.labels();
        let apparatus = Apparatus::with_labels("A", &labels, macrostate_dim, apparatus_seed)?;
        let rule = ReadoutRule::AllowedOutcomes { allowed: labels };
        let student = GradStudent::build("G", B_TRUE, B_FALSE, rule, macrostate_dim, student_seed)?;
        let assembly = ExperimentAssembly::of(&[
            (micro.space(), SubsystemKind::Micro),
            (apparatus.space(), SubsystemKind::Apparatus),
            (student.space(), SubsystemKind::Student),
        ])?;
        let measure = measurement_step(&assembly, &apparatus, &micro)?;
        let readout = readout_step(&assembly, &student, &[&apparatus])?;
        Ok(PostulateBSetup {
            assembly,
            micro,
            apparatus,
            student,
            measure,
            readout,
        })
    }
}

/// Measure `psi`, let the student read the apparatus, and report the
/// squared norm of the branch in which the student writes "B-false".
pub fn check_postulate_b(setup: &PostulateBSetup, psi: &StateVector, seed: u64) -> Result<CheckReport> {
    let outside = setup.micro.unmeasurable_weight(psi)?;
    if outside > MEASURABLE_TOL {
        return Err(Error::UnmeasurableState { weight: outside });
    }
    let a0 = setup.apparatus.random_ready_state(seed::derive(seed, "apparatus-ready"));
    let g0 = setup.student.random_ready_state(seed::derive(seed, "student-ready"));
    let start = DenseState::product(setup.assembly.clone(), &[psi.clone(), a0, g0])?;
    let measured = evolve_dense(&start, &setup.measure)?;
    let read = evolve_dense(&measured, &setup.readout)?;
    let state = read.state();

    let false_weight = macrostate_weight(&setup.assembly, state, &setup.student, B_FALSE)?;
    let true_weight = macrostate_weight(&setup.assembly, state, &setup.student, B_TRUE)?;
    let realized = realizes(&setup.assembly, state, &setup.student, B_TRUE, POSTULATE_B_TOL.sqrt())?;
    let details = json!({
        "b_true_weight": true_weight,
        "b_false_weight": false_weight,
        "student_realizes_b_true": realized.realized,
        "realization_defect": realized.defect,
        "final_norm_sqr": state.norm_sqr(),
    });
    Ok(CheckReport::new("postulate_b", false_weight, POSTULATE_B_TOL, details))
}
