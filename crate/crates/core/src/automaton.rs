//! Full simulation of a unitary: run a step, then repeatedly step-simulate the
//! residual Pauli until it is the identity (faithful mode), or track the
//! byproduct classically instead (tracked mode).
//!
//! A step of simulation of a Pauli is basic state transfer with the sign
//! relabeling folded into the byproduct rule, so faithful correction rounds
//! measure exactly the same observables as plain transfer. Where a family
//! without Z⊗Z is required, a correction round is realized as two successive
//! H steps instead.

use rand::Rng;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::gates;

use crate::patterns::{
    generalized_transfer_pattern, run_pattern, Measurement, MeasurementPattern,
    OutcomeSource, OutcomeVector,
};
use crate::pauli::{pauli_conjugate_axis, CliffordImages, PauliBits, PauliOp};
use crate::statevec::StateVector;

/// Classically tracked byproduct over logical qubits; plain XOR composition.
pub type PauliFrame = PauliOp;

/// Correction-loop bound; the chance of exhausting it is (3/4)^1000 per step.
pub const DEFAULT_MAX_ROUNDS: usize = 1000;

/// Physical-correction loop vs classical frame accumulation.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ExecMode {
    Faithful,
    Tracked,
}

impl ExecMode {
    pub fn token(self) -> &'static str {
        match self {
            ExecMode::Faithful => "faithful",
            ExecMode::Tracked => "tracked",
        }
    }

    pub fn parse(s: &str) -> Result<ExecMode> {
        match s {
            "faithful" => Ok(ExecMode::Faithful),
            "tracked" => Ok(ExecMode::Tracked),
            other => Err(Error::ProgramFormat(format!("unknown mode {other:?}"))),
        }
    }
}

/// How faithful rounds realize a step of simulation of a Pauli.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CorrectionPolicy {
    /// One relabeled transfer per round; tokens {X, Z*Z}.
    Transfer,
    /// Two successive H steps per round; tokens {Z, X, Z*X}.
    TwoH,
}

/// One executed correction pattern, for traces.
#[derive(Clone, Debug)]
pub struct CorrectionRecord {
    pub label: String,
    pub observables: Vec<String>,
    pub outcomes: OutcomeVector,
}

/// Result of a full step.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub final_state: StateVector,
    /// Total pattern executions, the step itself included.
    pub rounds: usize,
    /// Outcomes per execution; entry 0 is the step's own outcome vector.
    pub outcome_log: Vec<OutcomeVector>,
    /// Identity on success in faithful mode; the step byproduct in tracked mode.
    pub residual: PauliOp,
    /// Physical home of each logical input after the step and any corrections.
    pub positions: Vec<usize>,
    /// Free (measured-out) qubits afterwards.
    pub free: BTreeSet<usize>,
    pub corrections: Vec<CorrectionRecord>,
}

/// Step of simulation of a 1-qubit Pauli: a generalized transfer with U = σ,
/// V = I. Since σZσ = ±Z and σXσ = ±X the observable list is identical to
/// plain transfer; only outcome signs differ.
pub fn correction_pattern(sigma: &PauliOp, a: usize, b: usize) -> Result<MeasurementPattern> {
    let support = sigma.support();
    if support.iter().any(|&q| q != a) {
        return Err(Error::MultiQubitSigma);
    }
    let bits = sigma.get(a);
    let mut p = generalized_transfer_pattern(&bits.matrix(), &gates::identity(), a, b)?;
    p.label = bits.label().into();
    Ok(p)
}

/// Conjugate every observable of a pattern by a Pauli on its physical qubits.
/// Each axis maps to ± itself or its X±Y partner; sign flips are absorbed into
/// the measurement signs, so the byproduct rule reads the reinterpreted
/// outcomes unchanged.
pub fn conjugate_for_frame(
    pattern: &MeasurementPattern,
    frame: &PauliOp,
) -> MeasurementPattern {
    let mut out = pattern.clone();
    for m in out.measurements.iter_mut() {
        let mut sign = m.sign;
        let terms: Vec<(usize, crate::observables::Axis)> = m
            .observable
            .terms()
            .iter()
            .map(|&(q, axis)| {
                let bits = frame.get(q);
                let (new_axis, s) = pauli_conjugate_axis(bits, axis);
                sign *= s;
                (q, new_axis)
            })
            .collect();
        *m = Measurement {
            observable: crate::observables::Observable::new(terms)
                .expect("conjugation preserves qubit structure"),
            sign,
        };
    }
    out
}

/// Compose a step byproduct into the frame: relocate from physical to logical
/// qubits through the map, then XOR.
pub fn frame_update(
    frame: &PauliFrame,
    byproduct: &PauliOp,
    phys_to_logical: &BTreeMap<usize, usize>,
) -> Result<PauliFrame> {
    Ok(frame.compose(&byproduct.relocate(phys_to_logical)?))
}

const H_IMAGES: CliffordImages = CliffordImages {
    x_image: PauliBits::Z,
    z_image: PauliBits::X,
};

fn record_of(pattern: &MeasurementPattern, outcomes: &OutcomeVector) -> CorrectionRecord {
    CorrectionRecord {
        label: pattern.label.clone(),
        observables: pattern
            .measurements
            .iter()
            .map(|m| m.observable.token())
            .collect(),
        outcomes: outcomes.clone(),
    }
}

/// Run one step and, in faithful mode, keep simulating the residual Pauli
/// until it is the identity (per affected logical qubit, lowest first).
pub fn run_step_with_corrections<R: Rng>(
    state: &StateVector,
    step: &MeasurementPattern,
    mode: ExecMode,
    policy: CorrectionPolicy,
    max_rounds: usize,
    rng: &mut R,
) -> Result<StepResult> {
    if max_rounds < 1 {
        return Err(Error::MaxRoundsExceeded { max: max_rounds });
    }
    let (mut cur, outcomes, bp) = run_pattern(state, step, OutcomeSource::Sampled(rng))?;
    let mut rounds = 1usize;
    let mut outcome_log = vec![outcomes];
    let mut corrections = Vec::new();

    let positions0 = step.output_map.clone();
    let mut free: BTreeSet<usize> = step
        .input_qubits
        .iter()
        .copied()
        .chain(step.aux_qubits.iter().map(|&(q, _)| q))
        .filter(|q| !positions0.contains(q))
        .collect();
    let mut positions = positions0;
    let mut residual = bp.clone();

    if mode == ExecMode::Tracked {
        return Ok(StepResult {
            final_state: cur,
            rounds,
            outcome_log,
            residual,
            positions,
            free,
            corrections,
        });
    }

    while !residual.is_identity() {
        let logical = positions
            .iter()
            .position(|&p| !residual.get(p).is_identity())
            .ok_or_else(|| {
                Error::ProgramFormat("residual outside the step's output qubits".into())
            })?;
        let p = positions[logical];
        let f = *free.iter().next().expect("a free qubit always exists");
        match policy {
            CorrectionPolicy::Transfer => {
                if rounds + 1 > max_rounds {
                    return Err(Error::MaxRoundsExceeded { max: max_rounds });
                }
                let corr =
                    correction_pattern(&PauliOp::single(p, residual.get(p)), p, f)?;
                let (next, outs, bp2) = run_pattern(&cur, &corr, OutcomeSource::Sampled(rng))?;
                cur = next;
                rounds += 1;
                corrections.push(record_of(&corr, &outs));
                outcome_log.push(outs);
                // the correction's gate cancels the residual at p; its own
                // byproduct lands on f
                residual.set(p, PauliBits::I);
                residual.set(f, residual.get(f).xor(bp2.get(f)));
                positions[logical] = f;
                free.remove(&f);
                free.insert(p);
            }
            CorrectionPolicy::TwoH => {
                if rounds + 2 > max_rounds {
                    return Err(Error::MaxRoundsExceeded { max: max_rounds });
                }
                // two successive H steps realize a step of simulation of
                // Identity; the residual is pushed through each H
                let mut at = p;
                for _ in 0..2 {
                    let to = *free.iter().next().expect("a free qubit always exists");
                    let h = generalized_transfer_pattern(
                        &gates::identity(),
                        &gates::hadamard(),
                        at,
                        to,
                    )?;
                    let mut h = h;
                    h.label = "H".into();
                    let (next, outs, bph) = run_pattern(&cur, &h, OutcomeSource::Sampled(rng))?;
                    cur = next;
                    rounds += 1;
                    corrections.push(record_of(&h, &outs));
                    outcome_log.push(outs);
                    let carried = H_IMAGES.conjugate(residual.get(at));
                    residual.set(at, PauliBits::I);
                    residual.set(to, residual.get(to).xor(carried).xor(bph.get(to)));
                    free.remove(&to);
                    free.insert(at);
                    positions[logical] = to;
                    at = to;
                }
            }
        }
    }

    Ok(StepResult {
        final_state: cur,
        rounds,
        outcome_log,
        residual,
        positions,
        free,
        corrections,
    })
}

/// Full simulation of the step's gate: faithful mode loops corrections until
/// the residual is the identity, tracked mode runs one round and returns the
/// residual for frame accumulation.
pub fn full_step<R: Rng>(
    state: &StateVector,
    step: &MeasurementPattern,
    mode: ExecMode,
    max_rounds: usize,
    rng: &mut R,
) -> Result<StepResult> {
    run_step_with_corrections(state, step, mode, CorrectionPolicy::Transfer, max_rounds, rng)
}
