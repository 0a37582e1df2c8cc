//! Dense pure-state register.
//!
//! Qubit `q` is addressed by bit `q` of the amplitude index, so qubit 0 is the
//! least significant bit. A basis label string is read the same way: character
//! `q` of the string is the value of qubit `q`. All modules share this
//! convention.
//!
//! States are compared modulo global phase throughout the crate; nothing here
//! renormalizes silently.

use num_complex::Complex64 as C64;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::gates::GateMatrix;

/// Norm tolerance accepted by [`make_state`].
pub const NORM_TOL: f64 = 1e-6;
/// Tolerance used by [`detach_qubit`] for the factor-match precondition.
pub const DETACH_TOL: f64 = 1e-7;

/// Normalized state of `num_qubits` qubits with `2^num_qubits` amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Construct without a norm check; internal callers guarantee the invariant.
    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        StateVector { num_qubits, amps }
    }

    /// Tensor product, `other`'s qubits appended above `self`'s.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let n = self.num_qubits + other.num_qubits;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (j, b) in other.amps.iter().enumerate() {
            if b.norm_sqr() == 0.0 {
                continue;
            }
            for (i, a) in self.amps.iter().enumerate() {
                amps[(j << self.num_qubits) | i] = a * b;
            }
        }
        StateVector::from_raw(n, amps)
    }

    /// Gather-permute qubits: qubit `i` of the result is qubit `perm[i]` of `self`.
    ///
    /// `perm` must be a permutation of `0..num_qubits`.
    pub fn reorder_qubits(&self, perm: &[usize]) -> Result<StateVector> {
        let n = self.num_qubits;
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                left: n,
                right: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n {
                return Err(Error::QubitOutOfRange {
                    qubit: p,
                    num_qubits: n,
                });
            }
            if seen[p] {
                return Err(Error::DuplicateQubit(p));
            }
            seen[p] = true;
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut src = 0usize;
            for (i, &p) in perm.iter().enumerate() {
                src |= ((idx >> i) & 1) << p;
            }
            *amp = self.amps[src];
        }
        Ok(StateVector::from_raw(n, amps))
    }
}

/// Basis state `|bits⟩` on `n` qubits; `bits[q]` is the value of qubit `q`.
pub fn make_basis_state(n: usize, bits: &str) -> Result<StateVector> {
    if n == 0 || bits.len() != n {
        return Err(Error::BitstringLength {
            expected: n,
            got: bits.len(),
        });
    }
    let mut index = 0usize;
    for (q, ch) in bits.chars().enumerate() {
        match ch {
            '0' => {}
            '1' => index |= 1 << q,
            other => return Err(Error::InvalidBit(other)),
        }
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
    amps[index] = C64::new(1.0, 0.0);
    Ok(StateVector::from_raw(n, amps))
}

/// State with the given amplitudes. The length must be a power of two (at
/// least 2) and the norm must already be 1 within [`NORM_TOL`]; the amplitudes
/// are taken as-is.
pub fn make_state(amps: Vec<C64>) -> Result<StateVector> {
    let len = amps.len();
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::NonPowerOfTwoLength(len));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NormNotUnit(norm));
    }
    Ok(StateVector::from_raw(len.trailing_zeros() as usize, amps))
}

fn check_targets(state: &StateVector, qubits: &[usize]) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= state.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: state.num_qubits,
            });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Apply `gate` to the listed qubits (identity elsewhere).
///
/// For 2-qubit gates the first listed qubit is the high bit of the matrix
/// index, matching `|ab⟩` column ordering with `a` written first.
pub fn apply_gate(state: &StateVector, gate: &GateMatrix, qubits: &[usize]) -> Result<StateVector> {
    if qubits.len() != gate.arity() {
        return Err(Error::ArityMismatch {
            arity: gate.arity(),
            got: qubits.len(),
        });
    }
    check_targets(state, qubits)?;
    let n = state.num_qubits;
    let m = gate.entries();
    let mut amps = state.amps.clone();
    match *qubits {
        [q] => {
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
        [qa, qb] => {
            let (ba, bb) = (1usize << qa, 1usize << qb);
            for idx in 0..amps.len() {
                if idx & (ba | bb) != 0 {
                    continue;
                }
                // matrix index: first qubit high bit, second qubit low bit
                let pos = [idx, idx | bb, idx | ba, idx | ba | bb];
                let old = [amps[pos[0]], amps[pos[1]], amps[pos[2]], amps[pos[3]]];
                for (r, &p) in pos.iter().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (col, &o) in old.iter().enumerate() {
                        acc += m[(r, col)] * o;
                    }
                    amps[p] = acc;
                }
            }
        }
        _ => unreachable!("arity is 1 or 2"),
    }
    Ok(StateVector::from_raw(n, amps))
}

/// `|⟨s1|s2⟩|` — overlap magnitude, invariant under global phases.
pub fn fidelity_mod_phase(s1: &StateVector, s2: &StateVector) -> Result<f64> {
    if s1.num_qubits != s2.num_qubits {
        return Err(Error::DimensionMismatch {
            left: s1.num_qubits,
            right: s2.num_qubits,
        });
    }
    let ov: C64 = s1
        .amps
        .iter()
        .zip(&s2.amps)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(ov.norm())
}

/// Entrywise comparison after aligning the global phase of `actual` to
/// `expected`. Returns the max entrywise difference.
pub fn max_diff_mod_phase(actual: &StateVector, expected: &StateVector) -> Result<f64> {
    if actual.num_qubits != expected.num_qubits {
        return Err(Error::DimensionMismatch {
            left: actual.num_qubits,
            right: expected.num_qubits,
        });
    }
    let ov: C64 = expected
        .amps
        .iter()
        .zip(&actual.amps)
        .map(|(e, a)| e.conj() * a)
        .sum();
    let phase = if ov.norm() < 1e-12 {
        C64::new(1.0, 0.0)
    } else {
        ov.conj() / ov.norm()
    };
    Ok(actual
        .amps
        .iter()
        .zip(&expected.amps)
        .map(|(a, e)| (a * phase - e).norm())
        .fold(0.0, f64::max))
}

/// Reduced density matrix of a group of qubits (row/col index packs
/// `qubits[i]` as bit `i`).
fn reduced_density(state: &StateVector, qubits: &[usize]) -> CMat {
    let k = qubits.len();
    let mut rho = CMat::zeros(1 << k);
    let n = state.num_qubits;
    let group_mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    for idx in 0..state.amps.len() {
        let a = state.amps[idx];
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let rest = idx & !group_mask;
        let sub = |i: usize| -> usize {
            qubits
                .iter()
                .enumerate()
                .map(|(pos, &q)| ((i >> q) & 1) << pos)
                .sum()
        };
        let si = sub(idx);
        for idx2 in 0..state.amps.len() {
            if idx2 & !group_mask != rest {
                continue;
            }
            let b = state.amps[idx2];
            if b.norm_sqr() == 0.0 {
                continue;
            }
            rho[(si, sub(idx2))] += a * b.conj();
        }
        let _ = n;
    }
    rho
}

/// Remove an unentangled multi-qubit factor. `expected.num_qubits` must equal
/// `qubits.len()`; qubit `i` of `expected` corresponds to `qubits[i]`.
///
/// Errors if the group is entangled with the rest or its factor does not match
/// `expected` up to global phase within [`DETACH_TOL`]. The returned state is
/// the remaining factor (renormalized against the tolerance-level residue),
/// with indices above the removed qubits shifted down.
pub fn detach_factor(
    state: &StateVector,
    qubits: &[usize],
    expected: &StateVector,
) -> Result<StateVector> {
    check_targets(state, qubits)?;
    if expected.num_qubits != qubits.len() {
        return Err(Error::DimensionMismatch {
            left: expected.num_qubits,
            right: qubits.len(),
        });
    }
    if qubits.len() >= state.num_qubits {
        return Err(Error::QubitOutOfRange {
            qubit: *qubits.iter().max().unwrap(),
            num_qubits: state.num_qubits,
        });
    }
    let rho = reduced_density(state, qubits);
    // purity check: tr(rho^2) = 1 iff the group is unentangled
    let purity: f64 = {
        let sq = rho.mul(&rho);
        (0..sq.dim()).map(|i| sq[(i, i)].re).sum()
    };
    if (purity - 1.0).abs() > DETACH_TOL {
        return Err(Error::QubitEntangled(qubits[0]));
    }
    // <e|rho|e> = 1 iff the factor equals `expected` up to phase
    let re = rho.apply(expected.amplitudes());
    let overlap: C64 = expected
        .amplitudes()
        .iter()
        .zip(&re)
        .map(|(e, r)| e.conj() * r)
        .sum();
    if (overlap.re - 1.0).abs() > DETACH_TOL {
        return Err(Error::MarginalMismatch {
            overlap: overlap.re,
        });
    }
    // contract the factor: w[rest] = sum_s conj(e[s]) psi[s, rest]
    let group_mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let n_rest = state.num_qubits - qubits.len();
    let mut rest_qubits: Vec<usize> = (0..state.num_qubits)
        .filter(|q| !qubits.contains(q))
        .collect();
    rest_qubits.sort_unstable();
    let mut out = vec![C64::new(0.0, 0.0); 1 << n_rest];
    for idx in 0..state.amps.len() {
        let a = state.amps[idx];
        if a.norm_sqr() == 0.0 {
            continue;
        }
        let sub: usize = qubits
            .iter()
            .enumerate()
            .map(|(pos, &q)| ((idx >> q) & 1) << pos)
            .sum();
        let rest: usize = rest_qubits
            .iter()
            .enumerate()
            .map(|(pos, &q)| ((idx >> q) & 1) << pos)
            .sum();
        out[rest] += expected.amplitudes()[sub].conj() * a;
        let _ = group_mask;
    }
    let norm = out.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > DETACH_TOL * 10.0 {
        return Err(Error::MarginalMismatch { overlap: norm });
    }
    for o in out.iter_mut() {
        *o /= norm;
    }
    Ok(StateVector::from_raw(n_rest, out))
}

/// Remove qubit `q`, which must hold the unentangled 1-qubit factor `expected`
/// (up to global phase, within [`DETACH_TOL`]).
pub fn detach_qubit(state: &StateVector, q: usize, expected: &StateVector) -> Result<StateVector> {
    detach_factor(state, &[q], expected)
}

/// Dominant 1- or 2-qubit factor of an unentangled group, for detaching dead
/// qubits whose exact eigenstate is not tracked by the caller.
pub fn marginal_factor(state: &StateVector, qubits: &[usize]) -> Result<StateVector> {
    check_targets(state, qubits)?;
    let rho = reduced_density(state, qubits);
    let purity: f64 = {
        let sq = rho.mul(&rho);
        (0..sq.dim()).map(|i| sq[(i, i)].re).sum()
    };
    if (purity - 1.0).abs() > DETACH_TOL {
        return Err(Error::QubitEntangled(qubits[0]));
    }
    // power iteration; rho is (near) rank one so this converges immediately
    let dim = rho.dim();
    let mut v = vec![C64::new(0.0, 0.0); dim];
    let start = (0..dim)
        .max_by(|&a, &b| rho[(a, a)].re.partial_cmp(&rho[(b, b)].re).unwrap())
        .unwrap();
    v[start] = C64::new(1.0, 0.0);
    for _ in 0..3 {
        v = rho.apply(&v);
        let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in v.iter_mut() {
            *a /= norm;
        }
    }
    Ok(StateVector::from_raw(qubits.len(), v))
}

/// Assemble a register from disjoint factors. `parts` maps groups of register
/// qubits to factor states (qubit `i` of the factor sits at `qubits[i]`); the
/// groups must partition `0..n`.
pub fn compose_register(n: usize, parts: &[(&[usize], &StateVector)]) -> Result<StateVector> {
    let mut covered = vec![false; n];
    for (qubits, part) in parts {
        if part.num_qubits() != qubits.len() {
            return Err(Error::DimensionMismatch {
                left: part.num_qubits(),
                right: qubits.len(),
            });
        }
        for &q in *qubits {
            if q >= n {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: n,
                });
            }
            if covered[q] {
                return Err(Error::DuplicateQubit(q));
            }
            covered[q] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        let q = covered.iter().position(|c| !c).unwrap();
        return Err(Error::UnmappedQubit(q));
    }
    let mut amps = vec![C64::new(1.0, 0.0); 1 << n];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let mut acc = C64::new(1.0, 0.0);
        for (qubits, part) in parts {
            let sub: usize = qubits
                .iter()
                .enumerate()
                .map(|(pos, &q)| ((idx >> q) & 1) << pos)
                .sum();
            acc *= part.amplitudes()[sub];
        }
        *amp = acc;
    }
    Ok(StateVector::from_raw(n, amps))
}
