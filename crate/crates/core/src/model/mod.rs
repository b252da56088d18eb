//! Microsystems, apparatuses, students and environment, and the evolution
//! rules that connect them.

mod assembly;
mod description;
mod operator;
mod steps;
mod systems;

pub use assembly::{ExperimentAssembly, Subsystem, SubsystemKind};
pub use description::{
    complex_vector, AssemblyDescription, BuiltAssembly, ComplexPair, OutcomeDescription,
    SubsystemDescription,
};
pub use operator::{LocalOperator, DENSE_MATRIX_LIMIT};
pub use steps::{
    entanglement_entropy, environment_step, macrostate_weight, measurement_step, readout_step,
    realizes, Realization, UNITARITY_TOL,
};
pub use systems::{
    build_apparatus, Apparatus, Environment, GradStudent, Macrostate, Macrosystem, Microsystem,
    ReadoutRule, TableEntry, READY,
};
