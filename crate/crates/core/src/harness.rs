//! Oracles, branch enumeration, statistical runs and verification reports.
//!
//! Every pattern claim in this crate is checked against two independent
//! routes: the closed-form byproduct rule, and exhaustive forcing of all
//! outcome branches compared with the direct unitary applied by
//! [`direct_simulate`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::automaton::ExecMode;
use crate::compiler::{CircuitIR, GateKind, MeasurementProgram};
use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix};
use crate::observables::{force_outcome, Outcome, ZERO_PROB};
use crate::patterns::{byproduct, extract_output, MeasurementPattern, OutcomeVector};
use crate::pauli::PauliOp;
use crate::runner::{execute, logical_state, ProgramRun};
use crate::statevec::{apply_gate, fidelity_mod_phase, make_state, StateVector};

use num_complex::Complex64 as C64;

/// Branch cap for program enumeration, checked against the upper bound
/// `leaves · 2^measurements` before each step is expanded.
const ENUMERATION_CAP: usize = 1 << 16;

/// splitmix64 finalizer; the basis of the per-shot seed derivation.
fn splitmix64(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Stable per-shot seed: `splitmix64(base + splitmix64(index))`. Part of the
/// trace-replay contract, so shots can run in any order on any platform.
pub fn shot_seed(base: u64, index: u64) -> u64 {
    splitmix64(base.wrapping_add(splitmix64(index)))
}

/// Deterministic generator for a derived seed.
pub fn shot_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(shot_seed(base, index))
}

/// Haar-uniform random state: normalized complex Gaussian amplitudes via
/// Box–Muller on the seeded generator.
pub fn random_state<R: Rng>(num_qubits: usize, rng: &mut R) -> StateVector {
    let dim = 1usize << num_qubits;
    let mut amps = Vec::with_capacity(dim);
    for _ in 0..dim {
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        amps.push(C64::new(r * theta.cos(), r * theta.sin()));
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    make_state(amps).expect("normalized by construction")
}

fn gate_matrix(kind: GateKind) -> GateMatrix {
    match kind {
        GateKind::H => gates::hadamard(),
        GateKind::T => gates::t_gate(),
        GateKind::Tdg => gates::t_dagger(),
        GateKind::X => gates::pauli_x(),
        GateKind::Y => gates::pauli_y(),
        GateKind::Z => gates::pauli_z(),
        GateKind::Cnot => gates::cnot(),
    }
}

/// Direct unitary oracle: apply the circuit's gates in order.
pub fn direct_simulate(ir: &CircuitIR, input: &StateVector) -> Result<StateVector> {
    if input.num_qubits() != ir.num_logical {
        return Err(Error::DimensionMismatch {
            left: input.num_qubits(),
            right: ir.num_logical,
        });
    }
    let mut state = input.clone();
    for gate in &ir.gates {
        state = apply_gate(&state, &gate_matrix(gate.kind), &gate.qubits)?;
    }
    Ok(state)
}

/// One forced branch of a pattern.
#[derive(Clone, Debug)]
pub struct BranchRecord {
    pub outcomes: OutcomeVector,
    pub probability: f64,
    /// Full post-measurement register (dead qubits still attached).
    pub post_state: StateVector,
    pub predicted_byproduct: PauliOp,
    /// Fidelity of the byproduct-corrected output against gate·|φ⟩, computed
    /// after detaching the measured-out qubits.
    pub fidelity_vs_prediction: f64,
}

fn branch_fidelity(
    pattern: &MeasurementPattern,
    gate: &GateMatrix,
    phi: &StateVector,
    post: &StateVector,
    outcomes: &[Outcome],
) -> Result<f64> {
    let (logical, bp_logical) = extract_output(post, pattern, outcomes)?;
    let corrected = bp_logical.apply_to(&logical)?;
    let targets: Vec<usize> = (0..phi.num_qubits()).collect();
    let expected = apply_gate(phi, gate, &targets)?;
    fidelity_mod_phase(&corrected, &expected)
}

fn enumerate_with_gate(
    pattern: &MeasurementPattern,
    phi: &StateVector,
    gate: &GateMatrix,
) -> Result<Vec<BranchRecord>> {
    let register = pattern.prepare_register(phi)?;
    let mut records = Vec::new();
    let mut stack: Vec<(StateVector, OutcomeVector, f64)> =
        vec![(register, OutcomeVector::new(), 1.0)];
    while let Some((state, outcomes, prob)) = stack.pop() {
        if outcomes.len() == pattern.measurements.len() {
            let predicted_byproduct = byproduct(pattern, &outcomes)?;
            let fidelity = branch_fidelity(pattern, gate, phi, &state, &outcomes)?;
            records.push(BranchRecord {
                outcomes,
                probability: prob,
                post_state: state,
                predicted_byproduct,
                fidelity_vs_prediction: fidelity,
            });
            continue;
        }
        let obs = &pattern.measurements[outcomes.len()].observable;
        // push Minus first so Plus is explored first (lexicographic records)
        for outcome in [Outcome::Minus, Outcome::Plus] {
            match force_outcome(&state, obs, outcome) {
                Ok((next, p)) if prob * p > ZERO_PROB => {
                    let mut o = outcomes.clone();
                    o.push(outcome);
                    stack.push((next, o, prob * p));
                }
                _ => {}
            }
        }
    }
    Ok(records)
}

/// Depth-first forcing of every outcome vector with nonzero probability.
pub fn enumerate_branches(
    pattern: &MeasurementPattern,
    phi: &StateVector,
) -> Result<Vec<BranchRecord>> {
    enumerate_with_gate(pattern, phi, &pattern.gate.clone())
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternFailure {
    pub state_index: usize,
    pub outcomes: Vec<i8>,
    pub fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternReport {
    pub pass: bool,
    pub branches_checked: usize,
    pub probability_defect: f64,
    pub failures: Vec<PatternFailure>,
}

/// Check that every branch of every test state realizes `gate` up to the
/// predicted byproduct, with fidelity at least 1 − tol.
pub fn verify_pattern(
    pattern: &MeasurementPattern,
    gate: &GateMatrix,
    test_states: &[StateVector],
    tol: f64,
) -> Result<PatternReport> {
    let mut failures = Vec::new();
    let mut branches = 0usize;
    let mut probability_defect = 0.0f64;
    for (i, phi) in test_states.iter().enumerate() {
        let records = enumerate_with_gate(pattern, phi, gate)?;
        let total: f64 = records.iter().map(|r| r.probability).sum();
        probability_defect = probability_defect.max((total - 1.0).abs());
        for r in &records {
            branches += 1;
            if r.fidelity_vs_prediction < 1.0 - tol {
                failures.push(PatternFailure {
                    state_index: i,
                    outcomes: r.outcomes.iter().map(|o| o.value()).collect(),
                    fidelity: r.fidelity_vs_prediction,
                });
            }
        }
    }
    Ok(PatternReport {
        pass: failures.is_empty() && probability_defect < 1e-9,
        branches_checked: branches,
        probability_defect,
        failures,
    })
}

/// How `verify_program` drives the program.
#[derive(Copy, Clone, Debug)]
pub enum VerifyMethod {
    /// One seeded execution per input.
    Seeded(u64),
    /// Force every outcome vector of every step (tracked mode only).
    Enumerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProgramCheck {
    pub input_index: usize,
    pub fidelity: f64,
    pub executions: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProgramReport {
    pub pass: bool,
    pub mode: String,
    pub checks: Vec<ProgramCheck>,
}

fn check_one_seeded(
    program: &MeasurementProgram,
    ir: &CircuitIR,
    input: &StateVector,
    mode: ExecMode,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<(f64, usize)> {
    let run = execute(program, input, mode, crate::automaton::DEFAULT_MAX_ROUNDS, rng)?;
    let mut logical = logical_state(&run, program.num_physical)?;
    if mode == ExecMode::Tracked {
        logical = run.frame.apply_to(&logical)?;
    }
    let oracle = direct_simulate(ir, input)?;
    let f = fidelity_mod_phase(&logical, &oracle)?;
    let _ = tol;
    Ok((f, run.total_executions))
}

/// Tracked-mode enumeration of a whole program: every step's outcome vectors
/// are forced depth first, the frame is accumulated classically, and each leaf
/// is compared against the oracle. Returns the minimum leaf fidelity and the
/// total probability defect.
fn enumerate_program(
    program: &MeasurementProgram,
    ir: &CircuitIR,
    input: &StateVector,
) -> Result<(f64, f64, usize)> {
    struct Leaf {
        state: StateVector,
        positions: Vec<usize>,
        frame: PauliOp,
        prob: f64,
    }
    let n_phys = program.num_physical;
    let zero = crate::statevec::make_basis_state(1, "0")?;
    let init_positions = program.initial_map.clone();
    let free: Vec<usize> = (0..n_phys).filter(|q| !init_positions.contains(q)).collect();
    let free_slots: Vec<[usize; 1]> = free.iter().map(|&q| [q]).collect();
    let mut parts: Vec<(&[usize], &StateVector)> = vec![(init_positions.as_slice(), input)];
    for slot in &free_slots {
        parts.push((slot.as_slice(), &zero));
    }
    let start = crate::statevec::compose_register(n_phys, &parts)?;
    let mut leaves = vec![Leaf {
        state: start,
        positions: init_positions,
        frame: PauliOp::identity(),
        prob: 1.0,
    }];

    for step in &program.steps {
        let pattern = step.to_pattern()?;
        let per_leaf = 1usize << pattern.measurements.len();
        if leaves.len().saturating_mul(per_leaf) > ENUMERATION_CAP {
            return Err(Error::EnumerationTooLarge(ENUMERATION_CAP));
        }
        let mut next: Vec<Leaf> = Vec::new();
        for leaf in &leaves {
            let free: std::collections::BTreeSet<usize> = (0..n_phys)
                .filter(|q| !leaf.positions.contains(q))
                .collect();
            let mut map = BTreeMap::new();
            for (role, &q) in step.logical.iter().enumerate() {
                map.insert(pattern.input_qubits[role], leaf.positions[q]);
            }
            let mut fi = free.iter();
            for &(aq, _) in &pattern.aux_qubits {
                map.insert(aq, *fi.next().unwrap());
            }
            let bound = pattern.relabel(&map)?;
            let log_to_phys: BTreeMap<usize, usize> = leaf
                .positions
                .iter()
                .enumerate()
                .map(|(l, &p)| (l, p))
                .collect();
            let conj = crate::automaton::conjugate_for_frame(
                &bound,
                &leaf.frame.relocate(&log_to_phys)?,
            );
            // force all outcome vectors of this step
            let mut stack: Vec<(StateVector, OutcomeVector, f64)> =
                vec![(leaf.state.clone(), OutcomeVector::new(), leaf.prob)];
            while let Some((state, outcomes, prob)) = stack.pop() {
                if outcomes.len() == conj.measurements.len() {
                    let bp = byproduct(&conj, &outcomes)?;
                    let mut positions = leaf.positions.clone();
                    let mut frame = leaf.frame.clone();
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
                    next.push(Leaf {
                        state,
                        positions,
                        frame,
                        prob,
                    });
                    continue;
                }
                let obs = &conj.measurements[outcomes.len()].observable;
                for outcome in [Outcome::Minus, Outcome::Plus] {
                    if let Ok((nstate, p)) = force_outcome(&state, obs, outcome) {
                        if prob * p > ZERO_PROB {
                            let mut o = outcomes.clone();
                            o.push(outcome);
                            stack.push((nstate, o, prob * p));
                        }
                    }
                }
            }
        }
        leaves = next;
    }

    let oracle = direct_simulate(ir, input)?;
    let mut min_fidelity = 1.0f64;
    let mut total_prob = 0.0f64;
    let count = leaves.len();
    for leaf in leaves {
        total_prob += leaf.prob;
        let run = ProgramRun {
            final_state: leaf.state,
            positions: leaf.positions,
            frame: leaf.frame.clone(),
            trace: Vec::new(),
            total_executions: 0,
        };
        let logical = logical_state(&run, n_phys)?;
        let corrected = leaf.frame.apply_to(&logical)?;
        let f = fidelity_mod_phase(&corrected, &oracle)?;
        min_fidelity = min_fidelity.min(f);
    }
    Ok((min_fidelity, (total_prob - 1.0).abs(), count))
}

/// Execute the program on each input and compare the relocated logical output
/// against the direct unitary oracle.
pub fn verify_program(
    program: &MeasurementProgram,
    ir: &CircuitIR,
    inputs: &[StateVector],
    mode: ExecMode,
    method: VerifyMethod,
    tol: f64,
) -> Result<ProgramReport> {
    let mut checks = Vec::new();
    let mut pass = true;
    for (i, input) in inputs.iter().enumerate() {
        match method {
            VerifyMethod::Seeded(seed) => {
                let mut rng = shot_rng(seed, i as u64);
                match check_one_seeded(program, ir, input, mode, &mut rng, tol) {
                    Ok((fidelity, executions)) => {
                        if fidelity < 1.0 - tol {
                            pass = false;
                        }
                        checks.push(ProgramCheck {
                            input_index: i,
                            fidelity,
                            executions,
                            error: None,
                        });
                    }
                    Err(e) => {
                        // max-rounds exhaustion and friends are reported, not thrown
                        pass = false;
                        checks.push(ProgramCheck {
                            input_index: i,
                            fidelity: 0.0,
                            executions: 0,
                            error: Some(e.to_string()),
                        });
                    }
                }
            }
            VerifyMethod::Enumerate => match enumerate_program(program, ir, input) {
                Ok((min_fidelity, prob_defect, count)) => {
                    if min_fidelity < 1.0 - tol || prob_defect > 1e-9 {
                        pass = false;
                    }
                    checks.push(ProgramCheck {
                        input_index: i,
                        fidelity: min_fidelity,
                        executions: count,
                        error: None,
                    });
                }
                // infeasible enumeration is the caller's problem, not a
                // verification verdict
                Err(e @ Error::EnumerationTooLarge(_)) => return Err(e),
                Err(e) => {
                    pass = false;
                    checks.push(ProgramCheck {
                        input_index: i,
                        fidelity: 0.0,
                        executions: 0,
                        error: Some(e.to_string()),
                    });
                }
            },
        }
    }
    Ok(ProgramReport {
        pass,
        mode: mode.token().into(),
        checks,
    })
}

/// Aggregated statistics over seeded shots.
#[derive(Clone, Debug, Serialize)]
pub struct RunStats {
    pub shots: u64,
    pub seed: u64,
    pub mode: String,
    /// Per step, per measurement: how many shots recorded +1 in round one.
    pub outcome_frequencies: Vec<Vec<u64>>,
    /// Histogram of total pattern executions per shot.
    pub round_histogram: BTreeMap<usize, u64>,
    pub mean_rounds: f64,
    /// Final fidelity against the embedded source circuit, per shot.
    pub fidelities: Vec<f64>,
}

/// Run `shots` seeded executions; each shot's generator is derived with
/// [`shot_seed`], so aggregation is independent of execution order.
pub fn run_shots(
    program: &MeasurementProgram,
    input: &StateVector,
    shots: u64,
    seed: u64,
    mode: ExecMode,
) -> Result<RunStats> {
    let ir = crate::compiler::parse_circuit(&program.metadata.source)?;
    let oracle = direct_simulate(&ir, input)?;
    let mut outcome_frequencies: Vec<Vec<u64>> = program
        .steps
        .iter()
        .map(|s| vec![0u64; s.measurements.len()])
        .collect();
    let mut round_histogram: BTreeMap<usize, u64> = BTreeMap::new();
    let mut fidelities = Vec::with_capacity(shots as usize);
    let mut total_rounds = 0u64;
    for shot in 0..shots {
        let mut rng = shot_rng(seed, shot);
        let run = execute(program, input, mode, crate::automaton::DEFAULT_MAX_ROUNDS, &mut rng)?;
        for (s, t) in run.trace.iter().enumerate() {
            for (m, &o) in t.outcomes.iter().enumerate() {
                if o > 0 {
                    outcome_frequencies[s][m] += 1;
                }
            }
        }
        *round_histogram.entry(run.total_executions).or_insert(0) += 1;
        total_rounds += run.total_executions as u64;
        let mut logical = logical_state(&run, program.num_physical)?;
        if mode == ExecMode::Tracked {
            logical = run.frame.apply_to(&logical)?;
        }
        fidelities.push(fidelity_mod_phase(&logical, &oracle)?);
    }
    Ok(RunStats {
        shots,
        seed,
        mode: mode.token().into(),
        outcome_frequencies,
        round_histogram,
        mean_rounds: total_rounds as f64 / shots as f64,
        fidelities,
    })
}
