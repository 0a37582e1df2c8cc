//! Unitary gate matrices and the standard gate set.

use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_1_SQRT_2 as INV_SQRT2;
use std::f64::consts::PI;

use crate::cmat::CMat;
use crate::error::{Error, Result};

/// Tolerance for the unitarity invariant of [`GateMatrix`].
pub const UNITARY_TOL: f64 = 1e-9;

/// A 1- or 2-qubit unitary.
///
/// For 2-qubit gates the matrix index is `2*b(first) + b(second)`: the first
/// qubit passed to `apply_gate` is the high bit, so the textbook `CNot`
/// matrix takes the control as the first operand.
#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    arity: usize,
    entries: CMat,
}

impl GateMatrix {
    /// Validates unitarity (within [`UNITARY_TOL`]) and size.
    pub fn new(arity: usize, entries: CMat) -> Result<Self> {
        if !(1..=2).contains(&arity) || entries.dim() != 1 << arity {
            return Err(Error::ArityMismatch {
                arity,
                got: entries.dim().trailing_zeros() as usize,
            });
        }
        if !entries.is_unitary(UNITARY_TOL) {
            return Err(Error::NotUnitary);
        }
        Ok(GateMatrix { arity, entries })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn adjoint(&self) -> GateMatrix {
        GateMatrix {
            arity: self.arity,
            entries: self.entries.adjoint(),
        }
    }

    /// Matrix product `self * rhs` (i.e. `rhs` acts first).
    pub fn compose(&self, rhs: &GateMatrix) -> GateMatrix {
        assert_eq!(self.arity, rhs.arity);
        GateMatrix {
            arity: self.arity,
            entries: self.entries.mul(&rhs.entries),
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gate1(rows: [[C64; 2]; 2]) -> GateMatrix {
    let m = CMat::from_rows(&[&rows[0], &rows[1]]);
    GateMatrix::new(1, m).expect("builtin gate is unitary")
}

pub fn identity() -> GateMatrix {
    gate1([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]])
}

pub fn pauli_x() -> GateMatrix {
    gate1([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> GateMatrix {
    gate1([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> GateMatrix {
    gate1([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub fn hadamard() -> GateMatrix {
    gate1([
        [c(INV_SQRT2, 0.0), c(INV_SQRT2, 0.0)],
        [c(INV_SQRT2, 0.0), c(-INV_SQRT2, 0.0)],
    ])
}

pub fn t_gate() -> GateMatrix {
    gate1([
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), C64::from_polar(1.0, PI / 4.0)],
    ])
}

pub fn t_dagger() -> GateMatrix {
    t_gate().adjoint()
}

pub fn cnot() -> GateMatrix {
    let o = c(0.0, 0.0);
    let l = c(1.0, 0.0);
    let m = CMat::from_rows(&[&[l, o, o, o], &[o, l, o, o], &[o, o, o, l], &[o, o, l, o]]);
    GateMatrix::new(2, m).expect("CNot is unitary")
}

/// Gate for a serialized token. `I, X, Y, Z, H, T, TDG` are 1-qubit; `CNOT` is 2-qubit.
pub fn from_token(token: &str) -> Result<GateMatrix> {
    match token {
        "I" => Ok(identity()),
        "X" => Ok(pauli_x()),
        "Y" => Ok(pauli_y()),
        "Z" => Ok(pauli_z()),
        "H" => Ok(hadamard()),
        "T" => Ok(t_gate()),
        "TDG" => Ok(t_dagger()),
        "CNOT" => Ok(cnot()),
        other => Err(Error::ProgramFormat(format!("unknown gate token {other:?}"))),
    }
}
