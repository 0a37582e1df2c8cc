//! Measurement axes, 1- and 2-qubit observables, and projective measurement.
//!
//! Every observable here is a Hermitian involution (O² = I), so measurements
//! have exactly two outcomes ±1 with projectors (I ± O)/2. Axes are kept
//! symbolic so compiled programs and census reports can name them; text tokens
//! are `X`, `Y`, `Z`, `X+Y`, `X-Y`, with `AXIS@q` / `AXIS@q*AXIS@q` for bound
//! observables.

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2 as INV_SQRT2;
use std::fmt;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::statevec::StateVector;

/// Branch probabilities below this are impossible, not round-off; the smallest
/// real branch at desk scale is 1/16.
pub const ZERO_PROB: f64 = 1e-12;

/// Measurement axis: a 2×2 Hermitian involution.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    Z,
    X,
    Y,
    /// (X+Y)/√2
    XplusY,
    /// (X−Y)/√2
    XminusY,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Z, Axis::X, Axis::Y, Axis::XplusY, Axis::XminusY];

    pub fn matrix(self) -> CMat {
        let o = C64::new(0.0, 0.0);
        let mut m = CMat::zeros(2);
        match self {
            Axis::X => {
                m[(0, 1)] = C64::new(1.0, 0.0);
                m[(1, 0)] = C64::new(1.0, 0.0);
            }
            Axis::Y => {
                m[(0, 1)] = C64::new(0.0, -1.0);
                m[(1, 0)] = C64::new(0.0, 1.0);
            }
            Axis::Z => {
                m[(0, 0)] = C64::new(1.0, 0.0);
                m[(1, 1)] = C64::new(-1.0, 0.0);
            }
            Axis::XplusY => {
                m[(0, 1)] = C64::new(INV_SQRT2, -INV_SQRT2);
                m[(1, 0)] = C64::new(INV_SQRT2, INV_SQRT2);
            }
            Axis::XminusY => {
                m[(0, 1)] = C64::new(INV_SQRT2, INV_SQRT2);
                m[(1, 0)] = C64::new(INV_SQRT2, -INV_SQRT2);
            }
        }
        let _ = o;
        m
    }

    pub fn token(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
            Axis::XplusY => "X+Y",
            Axis::XminusY => "X-Y",
        }
    }

    pub fn parse(s: &str) -> Result<Axis> {
        match s {
            "X" => Ok(Axis::X),
            "Y" => Ok(Axis::Y),
            "Z" => Ok(Axis::Z),
            "X+Y" => Ok(Axis::XplusY),
            "X-Y" => Ok(Axis::XminusY),
            other => Err(Error::UnsupportedObservable(other.to_string())),
        }
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, Axis::X | Axis::Y | Axis::Z)
    }

    /// Family-census slot: `X+Y` and `X-Y` share the `X±Y` slot (they differ
    /// only by the dagger convention of the step they appear in).
    pub fn family_slot(self) -> &'static str {
        match self {
            Axis::XplusY | Axis::XminusY => "X±Y",
            other => other.token(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Two-valued measurement outcome.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_value(v: i8) -> Result<Outcome> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::ProgramFormat(format!("outcome must be ±1, got {v}"))),
        }
    }

    pub fn flip(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.value())
    }
}

/// 1- or 2-qubit observable: a tensor product of axes at distinct qubits.
/// Terms are kept sorted by qubit, which fixes the serialized token.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Observable {
    terms: Vec<(usize, Axis)>,
}

impl Observable {
    pub fn new(mut terms: Vec<(usize, Axis)>) -> Result<Observable> {
        if terms.is_empty() || terms.len() > 2 {
            return Err(Error::BadObservableArity);
        }
        terms.sort_by_key(|&(q, _)| q);
        if terms.len() == 2 && terms[0].0 == terms[1].0 {
            return Err(Error::DuplicateQubit(terms[0].0));
        }
        Ok(Observable { terms })
    }

    pub fn single(q: usize, axis: Axis) -> Observable {
        Observable {
            terms: vec![(q, axis)],
        }
    }

    pub fn pair(q1: usize, a1: Axis, q2: usize, a2: Axis) -> Result<Observable> {
        Observable::new(vec![(q1, a1), (q2, a2)])
    }

    pub fn terms(&self) -> &[(usize, Axis)] {
        &self.terms
    }

    pub fn qubits(&self) -> Vec<usize> {
        self.terms.iter().map(|&(q, _)| q).collect()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.terms.len() == 2
    }

    fn check_dims(&self, n: usize) -> Result<()> {
        for &(q, _) in &self.terms {
            if q >= n {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: n,
                });
            }
        }
        Ok(())
    }

    /// Serialized token, e.g. `X@0` or `Z@0*X@2`.
    pub fn token(&self) -> String {
        self.terms
            .iter()
            .map(|(q, a)| format!("{}@{}", a.token(), q))
            .collect::<Vec<_>>()
            .join("*")
    }

    pub fn parse_token(s: &str) -> Result<Observable> {
        let mut terms = Vec::new();
        for part in s.split('*') {
            let (axis, qubit) = part
                .rsplit_once('@')
                .ok_or_else(|| Error::UnsupportedObservable(s.to_string()))?;
            let q: usize = qubit
                .parse()
                .map_err(|_| Error::UnsupportedObservable(s.to_string()))?;
            terms.push((q, Axis::parse(axis)?));
        }
        Observable::new(terms)
    }

    /// Qubit-free census slot, axes in a fixed order (e.g. `Z*X` for any
    /// Z-with-X pair, `X±Y` for either dagger axis).
    pub fn family_slot(&self) -> String {
        if self.terms.len() == 1 {
            return self.terms[0].1.family_slot().to_string();
        }
        let mut slots: Vec<&str> = self.terms.iter().map(|&(_, a)| a.family_slot()).collect();
        slots.sort_by_key(|s| Axis::ALL.iter().position(|a| a.family_slot() == *s));
        slots.join("*")
    }

    /// Full 2^n × 2^n matrix: axes at their qubits, identity elsewhere.
    pub fn matrix(&self, n: usize) -> Result<CMat> {
        self.check_dims(n)?;
        let mut full = CMat::identity(1);
        for q in 0..n {
            let factor = self
                .terms
                .iter()
                .find(|&&(tq, _)| tq == q)
                .map(|&(_, a)| a.matrix())
                .unwrap_or_else(|| CMat::identity(2));
            // qubit q is the LSB of the index, so new qubits kron on the left
            full = factor.kron(&full);
        }
        Ok(full)
    }

    /// `O · ψ` without materializing the full matrix.
    pub fn apply_to(&self, state: &StateVector) -> Result<StateVector> {
        self.check_dims(state.num_qubits())?;
        let mut amps = state.amplitudes().to_vec();
        for &(q, axis) in &self.terms {
            let m = axis.matrix();
            let bit = 1usize << q;
            for idx in 0..amps.len() {
                if idx & bit != 0 {
                    continue;
                }
                let (a0, a1) = (amps[idx], amps[idx | bit]);
                amps[idx] = m[(0, 0)] * a0 + m[(0, 1)] * a1;
                amps[idx | bit] = m[(1, 0)] * a0 + m[(1, 1)] * a1;
            }
        }
        Ok(StateVector::from_raw(state.num_qubits(), amps))
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// Eigenprojectors `P± = (I ± O)/2` as full matrices.
pub fn eigenprojectors(obs: &Observable, n: usize) -> Result<(CMat, CMat)> {
    let o = obs.matrix(n)?;
    let id = CMat::identity(1 << n);
    let half = C64::new(0.5, 0.0);
    Ok((id.add(&o).scale(half), id.sub(&o).scale(half)))
}

fn project(state: &StateVector, obs: &Observable, outcome: Outcome) -> Result<(Vec<C64>, f64)> {
    let o_psi = obs.apply_to(state)?;
    let sign = f64::from(outcome.value());
    let amps: Vec<C64> = state
        .amplitudes()
        .iter()
        .zip(o_psi.amplitudes())
        .map(|(a, b)| (a + sign * b) * 0.5)
        .collect();
    let p = amps.iter().map(|a| a.norm_sqr()).sum::<f64>();
    Ok((amps, p))
}

/// Born probabilities `(p₊, p₋)` with `p± = ‖P± ψ‖²`.
pub fn born_probabilities(state: &StateVector, obs: &Observable) -> Result<(f64, f64)> {
    let (_, p_plus) = project(state, obs, Outcome::Plus)?;
    let (_, p_minus) = project(state, obs, Outcome::Minus)?;
    Ok((p_plus, p_minus))
}

/// Projective measurement. One uniform draw is consumed; the outcome is +1
/// iff the draw is below p₊. Returns the outcome, the collapsed state, and the
/// sampled branch's probability.
pub fn measure<R: Rng>(
    state: &StateVector,
    obs: &Observable,
    rng: &mut R,
) -> Result<(Outcome, StateVector, f64)> {
    let (p_plus, p_minus) = born_probabilities(state, obs)?;
    if p_plus < ZERO_PROB && p_minus < ZERO_PROB {
        return Err(Error::CorruptState);
    }
    let draw: f64 = rng.gen();
    let outcome = if draw < p_plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    };
    let (state, p) = force_outcome(state, obs, outcome)?;
    Ok((outcome, state, p))
}

/// Project onto the requested branch and renormalize. Errors with
/// [`Error::ImpossibleBranch`] if the branch probability is below 1e−12.
pub fn force_outcome(
    state: &StateVector,
    obs: &Observable,
    want: Outcome,
) -> Result<(StateVector, f64)> {
    let (mut amps, p) = project(state, obs, want)?;
    if p < ZERO_PROB {
        return Err(Error::ImpossibleBranch { index: 0 });
    }
    let norm = p.sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok((StateVector::from_raw(state.num_qubits(), amps), p))
}
