//! Master-equation integration and gate observables.

mod dopri;
mod engine;
mod equation;
mod noise;
mod observables;

pub use dopri::{advance, AcceptedStep, Halt, StepControl, StepStats};
pub use engine::{
    evolve, initial_state, integrate_qme, Evolution, GateResult, IntegrationStats, IntegratorSettings, Sample,
    DEFAULT_MAX_CUTOFF, DEFAULT_MIN_CUTOFF,
};
pub use equation::{MasterEquation, Workspace};
pub use noise::{build_jump_operators, Jump, JumpOperator, NoiseModel, NoiseSource, SourceFlags};
pub use observables::{bell_fidelity, infidelity, mode_trajectory, parity_population, reduced_gate_state};
