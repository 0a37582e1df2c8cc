//! Browser bindings for the state-transfer simulator.
//!
//! Every function takes plain values and returns a JSON string (errors come
//! back as `{"error": "..."}`), so the page needs no extra glue. The same
//! functions compile natively, which is how they are tested.

use num_complex::Complex64 as C64;
use wasm_bindgen::prelude::*;

use stx::automaton::{full_step, ExecMode, DEFAULT_MAX_ROUNDS};
use stx::compiler::{compile, observables_report, parse_circuit, resource_report, ObservableFamily};
use stx::gates;
use stx::harness::{direct_simulate, enumerate_branches, shot_rng};
use stx::patterns::{
    cnot_pattern, generalized_transfer_pattern, teleport_pattern, transfer_pattern,
    MeasurementPattern,
};
use stx::runner::{execute, logical_state};
use stx::statevec::{fidelity_mod_phase, make_state, StateVector};

fn err_json(msg: impl std::fmt::Display) -> String {
    serde_json::json!({ "error": msg.to_string() }).to_string()
}

/// cos(θ/2)∣0⟩ + e^{iφ} sin(θ/2)∣1⟩
fn bloch_state(theta: f64, phi: f64) -> StateVector {
    let amps = vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ];
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    make_state(amps.into_iter().map(|a| a / norm).collect()).expect("unit Bloch state")
}

fn demo_pattern(name: &str) -> Option<(MeasurementPattern, &'static str)> {
    let id = gates::identity();
    let h = gates::hadamard();
    let named = |u: &stx::GateMatrix, v: &stx::GateMatrix, label: &'static str| {
        let mut p = generalized_transfer_pattern(u, v, 0, 1).ok()?;
        p.label = label.into();
        Some((p, label))
    };
    match name {
        "transfer" => transfer_pattern(0, 1).ok().map(|p| (p, "I")),
        "cnot" => cnot_pattern(0, 1, 2).ok().map(|p| (p, "CNOT")),
        "teleport" => teleport_pattern(0, 1, 2).ok().map(|p| (p, "I")),
        "H" => named(&h, &id, "H"),
        "H2" => named(&id, &h, "H"),
        "T" => named(&gates::t_gate(), &id, "T"),
        "TDG" => named(&gates::t_dagger(), &id, "TDG"),
        "HT" => named(&gates::t_gate(), &h, "HT"),
        "X" => named(&gates::pauli_x(), &id, "X"),
        "Z" => named(&gates::pauli_z(), &id, "Z"),
        _ => None,
    }
}

/// Enumerate every branch of a builtin pattern on a Bloch-parameterized
/// input. For the CNot pattern the input is bloch(θa,φa) ⊗ bloch(θb,φb).
#[wasm_bindgen]
pub fn enumerate_pattern(
    name: &str,
    theta_a: f64,
    phi_a: f64,
    theta_b: f64,
    phi_b: f64,
) -> String {
    let Some((pattern, gate_label)) = demo_pattern(name) else {
        return err_json(format!("unknown pattern {name:?}"));
    };
    let input = if pattern.input_qubits.len() == 2 {
        bloch_state(theta_a, phi_a).tensor(&bloch_state(theta_b, phi_b))
    } else {
        bloch_state(theta_a, phi_a)
    };
    let records = match enumerate_branches(&pattern, &input) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let branches: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            serde_json::json!({
                "outcomes": r.outcomes.iter().map(|o| o.value()).collect::<Vec<_>>(),
                "probability": r.probability,
                "byproduct": r.predicted_byproduct.token(),
                "fidelity": r.fidelity_vs_prediction,
            })
        })
        .collect();
    serde_json::json!({
        "pattern": name,
        "gate": gate_label,
        "measurements": pattern
            .measurements
            .iter()
            .map(|m| m.observable.token())
            .collect::<Vec<_>>(),
        "aux": pattern
            .aux_qubits
            .iter()
            .map(|(q, init)| serde_json::json!({"qubit": q, "init": init.token()}))
            .collect::<Vec<_>>(),
        "branches": branches,
        "probability_sum": records.iter().map(|r| r.probability).sum::<f64>(),
        "min_fidelity": records
            .iter()
            .map(|r| r.fidelity_vs_prediction)
            .fold(1.0f64, f64::min),
    })
    .to_string()
}

/// Compile a `.qc` circuit and execute it once; returns the program summary,
/// per-step trace, reports, and the fidelity against the unitary oracle.
#[wasm_bindgen]
pub fn run_circuit(text: &str, family: &str, mode: &str, seed: u64, input_bits: &str) -> String {
    let family = match ObservableFamily::parse(family) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let mode = match ExecMode::parse(mode) {
        Ok(m) => m,
        Err(e) => return err_json(e),
    };
    let ir = match parse_circuit(text) {
        Ok(ir) => ir,
        Err(e) => return err_json(e),
    };
    let program = match compile(&ir, family) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let input = if input_bits.is_empty() {
        stx::statevec::make_basis_state(ir.num_logical, &"0".repeat(ir.num_logical))
    } else {
        stx::statevec::make_basis_state(ir.num_logical, input_bits)
    };
    let input = match input {
        Ok(s) => s,
        Err(e) => return err_json(e),
    };
    let mut rng = shot_rng(seed, 0);
    let run = match execute(&program, &input, mode, DEFAULT_MAX_ROUNDS, &mut rng) {
        Ok(r) => r,
        Err(e) => return err_json(e),
    };
    let fidelity = (|| {
        let mut logical = logical_state(&run, program.num_physical)?;
        if mode == ExecMode::Tracked {
            logical = run.frame.apply_to(&logical)?;
        }
        let oracle = direct_simulate(&ir, &input)?;
        fidelity_mod_phase(&logical, &oracle)
    })();
    let fidelity = match fidelity {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    serde_json::json!({
        "num_logical": program.num_logical,
        "num_physical": program.num_physical,
        "steps": program.steps.len(),
        "family": family.name(),
        "mode": mode.token(),
        "trace": run.trace,
        "frame": run.frame.token(),
        "executions": run.total_executions,
        "fidelity": fidelity,
        "observables": observables_report(&program).ok(),
        "resources": resource_report(&program).ok(),
    })
    .to_string()
}

/// Correction-round histogram of a faithful H step over seeded shots; the
/// round count is geometric with success probability 1/4.
#[wasm_bindgen]
pub fn round_histogram(shots: u32, seed: u64) -> String {
    let step = match generalized_transfer_pattern(&gates::hadamard(), &gates::identity(), 0, 1) {
        Ok(p) => p,
        Err(e) => return err_json(e),
    };
    let mut histogram: std::collections::BTreeMap<usize, u64> = Default::default();
    let mut total = 0u64;
    for shot in 0..shots {
        let mut rng = shot_rng(seed, shot as u64);
        let phi = stx::harness::random_state(1, &mut rng);
        let reg = match step.prepare_register(&phi) {
            Ok(r) => r,
            Err(e) => return err_json(e),
        };
        match full_step(&reg, &step, ExecMode::Faithful, DEFAULT_MAX_ROUNDS, &mut rng) {
            Ok(res) => {
                *histogram.entry(res.rounds).or_insert(0) += 1;
                total += res.rounds as u64;
            }
            Err(e) => return err_json(e),
        }
    }
    let expected: Vec<serde_json::Value> = histogram
        .keys()
        .map(|&k| {
            serde_json::json!({
                "rounds": k,
                "expected": shots as f64 * 0.75f64.powi(k as i32 - 1) * 0.25,
            })
        })
        .collect();
    serde_json::json!({
        "shots": shots,
        "seed": seed,
        "histogram": histogram,
        "mean_rounds": if shots > 0 { total as f64 / shots as f64 } else { 0.0 },
        "geometric_expected": expected,
    })
    .to_string()
}
