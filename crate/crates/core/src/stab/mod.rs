//! Pure-state stabilizer simulation.

pub mod dense;
mod pauli;
mod tableau;

pub use dense::DenseState;
pub use pauli::{CliffordGate, Pauli};
pub use tableau::{InitialState, Measurement, PauliRow, StabilizerRegister};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StabError {
    #[error("register must hold at least one qubit")]
    EmptyRegister,
    #[error("qubit {qubit} out of range for a {n}-qubit register")]
    QubitOutOfRange { qubit: usize, n: usize },
    #[error("two-qubit gate operands coincide (qubit {qubit})")]
    CoincidentOperands { qubit: usize },
    #[error("dense oracle limited to {max} qubits, register has {n}")]
    OracleTooLarge { n: usize, max: usize },
    #[error("register was not created with a dense oracle")]
    NotTraced,
    #[error("requested qubits are entangled with the rest of the register")]
    NotSeparable,
    #[error("stabilizer generators are not independent")]
    DependentGenerators,
    #[error("stabilizer generators do not commute")]
    NonCommuting,
}

/// Convenience constructor matching the `new_register` operation.
pub fn new_register(n: usize, init: InitialState) -> Result<StabilizerRegister, StabError> {
    StabilizerRegister::new(n, init)
}

/// Dense amplitudes of a traced register.
pub fn dense_oracle(reg: &StabilizerRegister) -> Result<Vec<num_complex::Complex64>, StabError> {
    reg.dense_oracle()
}
