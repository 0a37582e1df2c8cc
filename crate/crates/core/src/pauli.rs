//! Pauli operators modulo global phase, as per-qubit (x, z) bit pairs.
//!
//! The byproduct of every measurement pattern is such an operator; dropping
//! phases is deliberate (XZ and −iY are the same byproduct) since all state
//! claims are modulo global phase. Composition is bitwise XOR, every element
//! is its own inverse.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix};
use crate::observables::Axis;
use crate::statevec::{apply_gate, StateVector};

/// Single-qubit Pauli factor modulo phase: X^x Z^z.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct PauliBits {
    pub x: bool,
    pub z: bool,
}

impl PauliBits {
    pub const I: PauliBits = PauliBits { x: false, z: false };
    pub const X: PauliBits = PauliBits { x: true, z: false };
    pub const Z: PauliBits = PauliBits { x: false, z: true };
    pub const XZ: PauliBits = PauliBits { x: true, z: true };

    pub fn is_identity(self) -> bool {
        !self.x && !self.z
    }

    pub fn xor(self, other: PauliBits) -> PauliBits {
        PauliBits {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        }
    }

    /// Phase-free factor label: `I`, `X`, `Z`, or `XZ`.
    pub fn label(self) -> &'static str {
        match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "XZ",
        }
    }

    pub fn parse(s: &str) -> Result<PauliBits> {
        match s {
            "I" => Ok(PauliBits::I),
            "X" => Ok(PauliBits::X),
            "Z" => Ok(PauliBits::Z),
            "XZ" | "Y" => Ok(PauliBits::XZ),
            other => Err(Error::ProgramFormat(format!("bad Pauli factor {other:?}"))),
        }
    }

    /// The unitary Z^z X^x (a fixed phase representative).
    pub fn matrix(self) -> GateMatrix {
        let mut m = gates::identity();
        if self.x {
            m = gates::pauli_x().compose(&m);
        }
        if self.z {
            m = gates::pauli_z().compose(&m);
        }
        m
    }
}

/// Multi-qubit Pauli modulo global phase; only non-identity factors are stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PauliOp {
    bits: BTreeMap<usize, PauliBits>,
}

impl PauliOp {
    pub fn identity() -> PauliOp {
        PauliOp::default()
    }

    pub fn single(q: usize, bits: PauliBits) -> PauliOp {
        let mut op = PauliOp::identity();
        op.set(q, bits);
        op
    }

    pub fn is_identity(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, q: usize) -> PauliBits {
        self.bits.get(&q).copied().unwrap_or(PauliBits::I)
    }

    pub fn set(&mut self, q: usize, bits: PauliBits) {
        if bits.is_identity() {
            self.bits.remove(&q);
        } else {
            self.bits.insert(q, bits);
        }
    }

    /// Qubits with a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.bits.keys().copied().collect()
    }

    /// XOR composition; self-inverse, associative, order-free.
    pub fn compose(&self, other: &PauliOp) -> PauliOp {
        let mut out = self.clone();
        for (&q, &b) in &other.bits {
            out.set(q, out.get(q).xor(b));
        }
        out
    }

    /// Move factors through a relabeling `from -> to`.
    pub fn relocate(&self, map: &BTreeMap<usize, usize>) -> Result<PauliOp> {
        let mut out = PauliOp::identity();
        for (&q, &b) in &self.bits {
            let &to = map.get(&q).ok_or(Error::UnmappedQubit(q))?;
            out.set(to, out.get(to).xor(b));
        }
        Ok(out)
    }

    /// Apply to a state (phase representative Z^z X^x per qubit).
    pub fn apply_to(&self, state: &StateVector) -> Result<StateVector> {
        let mut s = state.clone();
        for (&q, &b) in &self.bits {
            s = apply_gate(&s, &b.matrix(), &[q])?;
        }
        Ok(s)
    }

    /// Serialized token, e.g. `I`, `X@0`, `XZ@0*Z@2`.
    pub fn token(&self) -> String {
        if self.bits.is_empty() {
            return "I".to_string();
        }
        self.bits
            .iter()
            .map(|(q, b)| format!("{}@{}", b.label(), q))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn parse_token(s: &str) -> Result<PauliOp> {
        if s == "I" {
            return Ok(PauliOp::identity());
        }
        let mut op = PauliOp::identity();
        for part in s.split('*') {
            let (fac, q) = part
                .rsplit_once('@')
                .ok_or_else(|| Error::ProgramFormat(format!("bad Pauli token {s:?}")))?;
            let q: usize = q
                .parse()
                .map_err(|_| Error::ProgramFormat(format!("bad Pauli token {s:?}")))?;
            op.set(q, op.get(q).xor(PauliBits::parse(fac)?));
        }
        Ok(op)
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// How a 1-qubit Clifford conjugates the Pauli group, phases dropped:
/// the images of X and Z as bit pairs.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CliffordImages {
    pub x_image: PauliBits,
    pub z_image: PauliBits,
}

impl CliffordImages {
    pub const IDENTITY: CliffordImages = CliffordImages {
        x_image: PauliBits::X,
        z_image: PauliBits::Z,
    };

    /// Image of an arbitrary factor: V (X^x Z^z) V† modulo phase.
    pub fn conjugate(&self, bits: PauliBits) -> PauliBits {
        let mut out = PauliBits::I;
        if bits.x {
            out = out.xor(self.x_image);
        }
        if bits.z {
            out = out.xor(self.z_image);
        }
        out
    }
}

/// Conjugate an axis by a single Pauli factor: P·A·P = ±A' where A' is an
/// axis (X±Y swap under X- or Y-conjugation). Returns (axis, sign).
pub fn pauli_conjugate_axis(p: PauliBits, axis: Axis) -> (Axis, i8) {
    let mut a = axis;
    let mut sign = 1i8;
    if p.x {
        let (na, s) = match a {
            Axis::X => (Axis::X, 1),
            Axis::Y => (Axis::Y, -1),
            Axis::Z => (Axis::Z, -1),
            Axis::XplusY => (Axis::XminusY, 1),
            Axis::XminusY => (Axis::XplusY, 1),
        };
        a = na;
        sign *= s;
    }
    if p.z {
        let (na, s) = match a {
            Axis::X => (Axis::X, -1),
            Axis::Y => (Axis::Y, -1),
            Axis::Z => (Axis::Z, 1),
            Axis::XplusY => (Axis::XplusY, -1),
            Axis::XminusY => (Axis::XminusY, -1),
        };
        a = na;
        sign *= s;
    }
    (a, sign)
}
