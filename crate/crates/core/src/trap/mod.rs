//! Ion-chain model and drive Hamiltonian.

mod chain;
mod hamiltonian;
mod pulse;

pub use chain::{homogeneous_chain, ChainModes, TrapConfig};
pub use hamiltonian::{hamiltonian_at, DriveFrame, DrivenIon, Expansion, GateHamiltonian};
pub use pulse::{drive_pattern, driven_ions, effective_detuning, PulseSequence, SINE_DRIVE_PHASE};
