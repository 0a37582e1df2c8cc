//! Execution of compiled measurement programs.
//!
//! Faithful mode runs the correction automaton after every step, so the
//! register physically holds the circuit output when the run ends. Corrections
//! move logical qubits between the two slots they bounce across, so compiled
//! steps are rebound to the live positions before running; in tracked mode no
//! corrections happen and the compiled bindings are used verbatim.

use rand::Rng;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

use crate::automaton::{
    conjugate_for_frame, run_step_with_corrections, CorrectionPolicy, ExecMode, PauliFrame,
};
use crate::compiler::{MeasurementProgram, ObservableFamily};
use crate::error::{Error, Result};
use crate::patterns::{byproduct, run_pattern, MeasurementPattern, OutcomeSource};

use crate::statevec::{
    compose_register, detach_factor, make_basis_state, marginal_factor, StateVector,
};

/// Per-step trace record.
#[derive(Clone, Debug, Serialize)]
pub struct StepTrace {
    pub step: usize,
    pub gate: String,
    pub observables: Vec<String>,
    pub outcomes: Vec<i8>,
    pub byproduct: String,
    pub rounds: usize,
    pub mode: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<CorrectionTrace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrectionTrace {
    pub pattern: String,
    pub observables: Vec<String>,
    pub outcomes: Vec<i8>,
}

/// Result of executing a program once.
#[derive(Clone, Debug)]
pub struct ProgramRun {
    pub final_state: StateVector,
    /// Physical home of each logical qubit at the end.
    pub positions: Vec<usize>,
    /// Accumulated frame over logical qubits; identity in faithful mode.
    pub frame: PauliFrame,
    pub trace: Vec<StepTrace>,
    /// Total pattern executions across all steps.
    pub total_executions: usize,
}

fn correction_policy(family: ObservableFamily) -> CorrectionPolicy {
    match family {
        ObservableFamily::O1 => CorrectionPolicy::Transfer,
        ObservableFamily::O2 => CorrectionPolicy::TwoH,
    }
}

/// Bind a compiled step to the live register layout.
fn bind_step(
    pattern: &MeasurementPattern,
    step_logical: &[usize],
    positions: &[usize],
    free: &BTreeSet<usize>,
) -> Result<(MeasurementPattern, BTreeMap<usize, usize>)> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for (role, &q) in step_logical.iter().enumerate() {
        map.insert(pattern.input_qubits[role], positions[q]);
    }
    let mut free_iter = free.iter();
    for &(aq, _) in &pattern.aux_qubits {
        let &slot = free_iter
            .next()
            .ok_or_else(|| Error::ProgramFormat("no free qubit for the auxiliary".into()))?;
        map.insert(aq, slot);
    }
    let bound = pattern.relabel(&map)?;
    Ok((bound, map))
}

/// Execute a compiled program on `input` (a state of the logical qubits).
pub fn execute<R: Rng>(
    program: &MeasurementProgram,
    input: &StateVector,
    mode: ExecMode,
    max_rounds: usize,
    rng: &mut R,
) -> Result<ProgramRun> {
    if input.num_qubits() != program.num_logical {
        return Err(Error::DimensionMismatch {
            left: input.num_qubits(),
            right: program.num_logical,
        });
    }
    let n_phys = program.num_physical;
    let mut positions = program.initial_map.clone();
    let mut free: BTreeSet<usize> = (0..n_phys).filter(|q| !positions.contains(q)).collect();

    // logical qubits hold the input, the floating auxiliary starts in |0⟩
    let zero = make_basis_state(1, "0")?;
    let free_slots: Vec<[usize; 1]> = free.iter().map(|&q| [q]).collect();
    let mut parts: Vec<(&[usize], &StateVector)> = vec![(positions.as_slice(), input)];
    for slot in &free_slots {
        parts.push((slot.as_slice(), &zero));
    }
    let mut state = compose_register(n_phys, &parts)?;

    let mut frame = PauliFrame::identity();
    let mut trace = Vec::new();
    let mut total_executions = 0usize;
    let policy = correction_policy(program.family);

    for (i, step) in program.steps.iter().enumerate() {
        let pattern = step.to_pattern()?;
        let (bound, _) = bind_step(&pattern, &step.logical, &positions, &free)?;
        match mode {
            ExecMode::Faithful => {
                let res =
                    run_step_with_corrections(&state, &bound, mode, policy, max_rounds, rng)?;
                state = res.final_state;
                total_executions += res.rounds;
                for (role, &q) in step.logical.iter().enumerate() {
                    positions[q] = res.positions[role];
                }
                free = (0..n_phys).filter(|q| !positions.contains(q)).collect();
                let bp = byproduct(&bound, &res.outcome_log[0])?;
                trace.push(StepTrace {
                    step: i,
                    gate: step.gate.clone(),
                    observables: bound
                        .measurements
                        .iter()
                        .map(|m| m.observable.token())
                        .collect(),
                    outcomes: res.outcome_log[0].iter().map(|o| o.value()).collect(),
                    byproduct: bp.token(),
                    rounds: res.rounds,
                    mode: mode.token().into(),
                    corrections: res
                        .corrections
                        .iter()
                        .map(|c| CorrectionTrace {
                            pattern: c.label.clone(),
                            observables: c.observables.clone(),
                            outcomes: c.outcomes.iter().map(|o| o.value()).collect(),
                        })
                        .collect(),
                });
            }
            ExecMode::Tracked => {
                // adapt the measurement bases to the accumulated frame
                let log_to_phys: BTreeMap<usize, usize> =
                    positions.iter().enumerate().map(|(l, &p)| (l, p)).collect();
                let phys_frame = frame.relocate(&log_to_phys)?;
                let conj = conjugate_for_frame(&bound, &phys_frame);
                let (next, outcomes, bp) =
                    run_pattern(&state, &conj, OutcomeSource::Sampled(rng))?;
                state = next;
                total_executions += 1;
                // a measured-out input consumes its frame component; a
                // surviving input keeps it and composes with the byproduct
                for (role, &q) in step.logical.iter().enumerate() {
                    let moved = conj.output_map[role] != conj.input_qubits[role];
                    let old = if moved {
                        crate::pauli::PauliBits::I
                    } else {
                        frame.get(q)
                    };
                    frame.set(q, old.xor(bp.get(conj.output_map[role])));
                    positions[q] = conj.output_map[role];
                }
                free = (0..n_phys).filter(|q| !positions.contains(q)).collect();
                trace.push(StepTrace {
                    step: i,
                    gate: step.gate.clone(),
                    observables: conj
                        .measurements
                        .iter()
                        .map(|m| m.observable.token())
                        .collect(),
                    outcomes: outcomes.iter().map(|o| o.value()).collect(),
                    byproduct: bp.token(),
                    rounds: 1,
                    mode: mode.token().into(),
                    corrections: Vec::new(),
                });
            }
        }
    }

    Ok(ProgramRun {
        final_state: state,
        positions,
        frame,
        trace,
        total_executions,
    })
}

/// Detach the dead qubits (against their computed marginals) and reorder the
/// survivors into logical order. The frame, if any, is *not* applied.
pub fn logical_state(run: &ProgramRun, num_physical: usize) -> Result<StateVector> {
    let mut live: Vec<usize> = (0..num_physical).collect();
    let mut cur = run.final_state.clone();
    let dead: Vec<usize> = (0..num_physical)
        .filter(|q| !run.positions.contains(q))
        .collect();
    for q in dead {
        let pos = live.iter().position(|&l| l == q).unwrap();
        let marg = marginal_factor(&cur, &[pos])?;
        cur = detach_factor(&cur, &[pos], &marg)?;
        live.remove(pos);
    }
    let perm: Vec<usize> = run
        .positions
        .iter()
        .map(|&p| {
            live.iter()
                .position(|&l| l == p)
                .ok_or(Error::UnmappedQubit(p))
        })
        .collect::<Result<_>>()?;
    cur.reorder_qubits(&perm)
}
