//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("bitstring length {got} does not match qubit count {expected}")]
    BitstringLength { expected: usize, got: usize },

    #[error("invalid bit character {0:?} in bitstring")]
    InvalidBit(char),

    #[error("amplitude array length {0} is not a power of two (>= 2)")]
    NonPowerOfTwoLength(usize),

    #[error("state norm {0} is outside tolerance of 1")]
    NormNotUnit(f64),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("qubit {qubit} out of range for {num_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),

    #[error("gate arity {arity} does not match {got} target qubits")]
    ArityMismatch { arity: usize, got: usize },

    #[error("matrix is not unitary within tolerance")]
    NotUnitary,

    #[error("matrix is not a 1-qubit Clifford (does not map Paulis to Paulis)")]
    NotClifford,

    #[error("conjugated observable {0} is outside the supported axis set")]
    UnsupportedObservable(String),

    #[error("observable must act on 1 or 2 distinct qubits")]
    BadObservableArity,

    #[error("forced branch for measurement {index} has probability below 1e-12")]
    ImpossibleBranch { index: usize },

    #[error("state is corrupt: both branch probabilities below 1e-12")]
    CorruptState,

    #[error("qubit {0} is entangled with the rest of the register")]
    QubitEntangled(usize),

    #[error("detached factor does not match the expected state (overlap {overlap})")]
    MarginalMismatch { overlap: f64 },

    #[error("outcome vector length {got} does not match measurement count {expected}")]
    OutcomeLengthMismatch { expected: usize, got: usize },

    #[error("byproduct correction did not reach identity within {max} pattern executions")]
    MaxRoundsExceeded { max: usize },

    #[error("qubit {0} has no logical assignment in the output map")]
    UnmappedQubit(usize),

    #[error("correction Pauli acts on more than one qubit")]
    MultiQubitSigma,

    #[error("line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error("program format error: {0}")]
    ProgramFormat(String),

    #[error("observable token {0:?} is not in family {1}")]
    FamilyViolation(String, String),

    #[error("branch enumeration exceeds the cap of {0} branches")]
    EnumerationTooLarge(usize),
}
