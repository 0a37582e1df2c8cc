//! Heavier randomized cross-checks, ignored by default:
//! `cargo test -p stx --test stress -- --ignored`

use stx::automaton::ExecMode;
use stx::compiler::{compile, CircuitIR, Gate, GateKind, ObservableFamily};
use stx::harness::{random_state, shot_rng, verify_program, VerifyMethod};

fn random_circuit(seed: u64, max_qubits: usize, max_gates: usize) -> CircuitIR {
    use rand::Rng;
    let mut rng = shot_rng(0x5712E55, seed);
    let num_logical = rng.gen_range(1..=max_qubits);
    let num_gates = rng.gen_range(1..=max_gates);
    let mut gates = Vec::new();
    for _ in 0..num_gates {
        let kind = match rng.gen_range(0..7u32) {
            0 => GateKind::H,
            1 => GateKind::T,
            2 => GateKind::Tdg,
            3 => GateKind::X,
            4 => GateKind::Y,
            5 => GateKind::Z,
            _ => GateKind::Cnot,
        };
        if kind == GateKind::Cnot && num_logical >= 2 {
            let a = rng.gen_range(0..num_logical);
            let mut b = rng.gen_range(0..num_logical);
            while b == a {
                b = rng.gen_range(0..num_logical);
            }
            gates.push(Gate { kind, qubits: vec![a, b] });
        } else {
            let kind = if kind == GateKind::Cnot { GateKind::T } else { kind };
            gates.push(Gate {
                kind,
                qubits: vec![rng.gen_range(0..num_logical)],
            });
        }
    }
    CircuitIR { num_logical, gates }
}

#[test]
#[ignore]
fn five_hundred_circuits_all_gates_both_families_both_modes() {
    for i in 0..500u64 {
        let ir = random_circuit(i, 5, 20);
        let mut rng = shot_rng(0xF0, i);
        let input = random_state(ir.num_logical, &mut rng);
        for family in [ObservableFamily::O1, ObservableFamily::O2] {
            let program = compile(&ir, family).unwrap();
            assert_eq!(program.num_physical, ir.num_logical + 1);
            for mode in [ExecMode::Faithful, ExecMode::Tracked] {
                let report = verify_program(
                    &program,
                    &ir,
                    std::slice::from_ref(&input),
                    mode,
                    VerifyMethod::Seeded(i),
                    1e-7,
                )
                .unwrap();
                assert!(
                    report.pass,
                    "circuit {i} {family:?} {mode:?}: {:?}",
                    report.checks
                );
            }
        }
    }
}
