//! `stx` — compile gate circuits to measurement programs, run them on the
//! dense simulator, and verify them against the direct-unitary oracle.
//!
//! Exit codes: 0 success/pass, 1 verification failure, 2 usage or format
//! error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;

use stx::automaton::{ExecMode, DEFAULT_MAX_ROUNDS};
use stx::compiler::{
    compile, observables_report, parse_circuit, resource_report, MeasurementProgram,
    ObservableFamily,
};
use stx::gates;
use stx::harness::{
    direct_simulate, enumerate_branches, random_state, run_shots, shot_rng, verify_program,
    VerifyMethod,
};
use stx::patterns::{
    cnot_pattern, generalized_transfer_pattern, teleport_pattern, transfer_pattern,
    MeasurementPattern,
};
use stx::runner::{execute, logical_state};
use stx::statevec::{fidelity_mod_phase, make_basis_state, make_state, StateVector};

#[derive(Parser)]
#[command(name = "stx", version, about = "Measurement-only quantum computation via state transfer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a .qc circuit to a measurement program
    Compile {
        circuit: PathBuf,
        /// Observable family: O1 or O2
        #[arg(long)]
        family: String,
        /// Output program file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Execute a compiled program, printing a JSON-lines trace
    Run {
        program: PathBuf,
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// faithful (physical corrections) or tracked (classical frame)
        #[arg(long, default_value = "faithful")]
        mode: String,
        /// Aggregate statistics over this many seeded shots instead
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Enumerate every outcome branch of a builtin pattern or a program
    Enumerate {
        /// Builtin pattern (transfer, cnot, teleport, H, H2, T, TDG, HT,
        /// HTDG, X, Y, Z, I) or a program file
        target: String,
        #[command(flatten)]
        input: InputArg,
    },
    /// Verify a program against its source circuit via the unitary oracle
    Verify {
        program: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        /// Force every outcome branch (tracked mode) instead of sampling
        #[arg(long)]
        enumerate: bool,
        /// Number of seeded random input states
        #[arg(long, default_value_t = 20)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "faithful")]
        mode: String,
    },
    /// Print observable census and resource report for a program
    Report { program: PathBuf },
}

#[derive(Args)]
struct InputArg {
    /// Input state: a bitstring like 010 (character q = qubit q) or a path to
    /// an amplitude file with one `re im` pair per line
    #[arg(long)]
    input: Option<String>,
}

fn fail2(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn read_to_string(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_input(spec: &Option<String>, num_qubits: usize) -> Result<StateVector, String> {
    match spec {
        None => make_basis_state(num_qubits, &"0".repeat(num_qubits)).map_err(|e| e.to_string()),
        Some(s) if s.chars().all(|c| c == '0' || c == '1') => {
            make_basis_state(num_qubits, s).map_err(|e| e.to_string())
        }
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            let mut amps = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let mut parts = line.split_whitespace();
                let re: f64 = parts
                    .next()
                    .ok_or(format!("{path}:{}: missing real part", i + 1))?
                    .parse()
                    .map_err(|e| format!("{path}:{}: {e}", i + 1))?;
                let im: f64 = parts
                    .next()
                    .ok_or(format!("{path}:{}: missing imaginary part", i + 1))?
                    .parse()
                    .map_err(|e| format!("{path}:{}: {e}", i + 1))?;
                amps.push(C64::new(re, im));
            }
            let state = make_state(amps).map_err(|e| e.to_string())?;
            if state.num_qubits() != num_qubits {
                return Err(format!(
                    "amplitude file describes {} qubits, expected {num_qubits}",
                    state.num_qubits()
                ));
            }
            Ok(state)
        }
    }
}

fn builtin_pattern(name: &str) -> Option<MeasurementPattern> {
    let id = gates::identity();
    let h = gates::hadamard();
    let mk = |u: &stx::GateMatrix, v: &stx::GateMatrix, label: &str| {
        let mut p = generalized_transfer_pattern(u, v, 0, 1).ok()?;
        p.label = label.into();
        Some(p)
    };
    match name {
        "transfer" | "I" => transfer_pattern(0, 1).ok(),
        "cnot" => cnot_pattern(0, 1, 2).ok(),
        "teleport" => teleport_pattern(0, 1, 2).ok(),
        "H" => mk(&h, &id, "H"),
        "H2" => mk(&id, &h, "H"),
        "T" => mk(&gates::t_gate(), &id, "T"),
        "TDG" => mk(&gates::t_dagger(), &id, "TDG"),
        "HT" => mk(&gates::t_gate(), &h, "HT"),
        "HTDG" => mk(&gates::t_dagger(), &h, "HTDG"),
        "X" => mk(&gates::pauli_x(), &id, "X"),
        "Y" => mk(&gates::pauli_y(), &id, "Y"),
        "Z" => mk(&gates::pauli_z(), &id, "Z"),
        _ => None,
    }
}

fn cmd_compile(circuit: &Path, family: &str, output: &Path) -> Result<(), String> {
    let family = ObservableFamily::parse(family).map_err(|e| e.to_string())?;
    let text = read_to_string(circuit)?;
    let ir = parse_circuit(&text).map_err(|e| e.to_string())?;
    let program = compile(&ir, family).map_err(|e| e.to_string())?;
    fs::write(output, program.to_json()).map_err(|e| format!("{}: {e}", output.display()))?;
    eprintln!(
        "compiled {} gates to {} steps on {} physical qubits ({})",
        ir.gates.len(),
        program.steps.len(),
        program.num_physical,
        family.name()
    );
    Ok(())
}

fn load_program(path: &Path) -> Result<MeasurementProgram, String> {
    MeasurementProgram::from_json(&read_to_string(path)?).map_err(|e| e.to_string())
}

fn cmd_run(
    path: &Path,
    input: &Option<String>,
    seed: u64,
    mode: &str,
    shots: Option<u64>,
) -> Result<(), String> {
    let program = load_program(path)?;
    let mode = ExecMode::parse(mode).map_err(|e| e.to_string())?;
    let input = parse_input(input, program.num_logical)?;
    if let Some(shots) = shots {
        if shots == 0 {
            return Err("--shots must be at least 1".into());
        }
        let stats =
            run_shots(&program, &input, shots, seed, mode).map_err(|e| e.to_string())?;
        println!("{}", serde_json::to_string_pretty(&stats).unwrap());
        return Ok(());
    }
    let mut rng = shot_rng(seed, 0);
    let run = execute(&program, &input, mode, DEFAULT_MAX_ROUNDS, &mut rng)
        .map_err(|e| e.to_string())?;
    for t in &run.trace {
        println!("{}", serde_json::to_string(t).unwrap());
    }
    let mut logical = logical_state(&run, program.num_physical).map_err(|e| e.to_string())?;
    if mode == ExecMode::Tracked {
        logical = run.frame.apply_to(&logical).map_err(|e| e.to_string())?;
    }
    let ir = parse_circuit(&program.metadata.source).map_err(|e| e.to_string())?;
    let oracle = direct_simulate(&ir, &input).map_err(|e| e.to_string())?;
    let fidelity = fidelity_mod_phase(&logical, &oracle).map_err(|e| e.to_string())?;
    let final_record = serde_json::json!({
        "final": true,
        "mode": mode.token(),
        "logical_map": run.positions,
        "frame": run.frame.token(),
        "executions": run.total_executions,
        "fidelity": fidelity,
    });
    println!("{final_record}");
    Ok(())
}

fn cmd_enumerate(target: &str, input: &Option<String>) -> Result<(), String> {
    if let Some(pattern) = builtin_pattern(target) {
        let n = pattern.input_qubits.len();
        let phi = parse_input(input, n)?;
        let records = enumerate_branches(&pattern, &phi).map_err(|e| e.to_string())?;
        let mut total = 0.0;
        for r in &records {
            total += r.probability;
            let line = serde_json::json!({
                "outcomes": r.outcomes.iter().map(|o| o.value()).collect::<Vec<_>>(),
                "probability": r.probability,
                "byproduct": r.predicted_byproduct.token(),
                "fidelity": r.fidelity_vs_prediction,
            });
            println!("{line}");
        }
        let summary = serde_json::json!({
            "pattern": pattern.label,
            "branches": records.len(),
            "probability_sum": total,
            "min_fidelity": records
                .iter()
                .map(|r| r.fidelity_vs_prediction)
                .fold(1.0f64, f64::min),
        });
        println!("{summary}");
        return Ok(());
    }
    // otherwise treat the target as a program file and enumerate it end to end
    let path = PathBuf::from(target);
    let program = load_program(&path)?;
    let ir = parse_circuit(&program.metadata.source).map_err(|e| e.to_string())?;
    let input = parse_input(input, program.num_logical)?;
    let report = verify_program(
        &program,
        &ir,
        std::slice::from_ref(&input),
        ExecMode::Tracked,
        VerifyMethod::Enumerate,
        1e-7,
    )
    .map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(())
}

fn cmd_verify(
    path: &Path,
    circuit: &Path,
    enumerate: bool,
    shots: u64,
    seed: u64,
    mode: &str,
) -> Result<bool, String> {
    let program = load_program(path)?;
    let ir = parse_circuit(&read_to_string(circuit)?).map_err(|e| e.to_string())?;
    if ir.num_logical != program.num_logical {
        return Err(format!(
            "circuit has {} qubits but the program was compiled for {}",
            ir.num_logical, program.num_logical
        ));
    }
    let mode = ExecMode::parse(mode).map_err(|e| e.to_string())?;
    let (inputs, method) = if enumerate {
        let zero = make_basis_state(program.num_logical, &"0".repeat(program.num_logical))
            .map_err(|e| e.to_string())?;
        let mut rng = shot_rng(seed, 1);
        let mut inputs = vec![zero];
        inputs.push(random_state(program.num_logical, &mut rng));
        (inputs, VerifyMethod::Enumerate)
    } else {
        let mut rng = shot_rng(seed, 1);
        let inputs = (0..shots.max(1))
            .map(|_| random_state(program.num_logical, &mut rng))
            .collect();
        (inputs, VerifyMethod::Seeded(seed))
    };
    let report =
        verify_program(&program, &ir, &inputs, mode, method, 1e-7).map_err(|e| e.to_string())?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(report.pass)
}

fn cmd_report(path: &Path) -> Result<(), String> {
    let program = load_program(path)?;
    let combined = serde_json::json!({
        "observables": observables_report(&program).map_err(|e| e.to_string())?,
        "resources": resource_report(&program).map_err(|e| e.to_string())?,
    });
    println!("{}", serde_json::to_string_pretty(&combined).unwrap());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<bool, String> = match &cli.command {
        Command::Compile {
            circuit,
            family,
            output,
        } => cmd_compile(circuit, family, output).map(|_| true),
        Command::Run {
            program,
            input,
            seed,
            mode,
            shots,
        } => cmd_run(program, &input.input, *seed, mode, *shots).map(|_| true),
        Command::Enumerate { target, input } => {
            cmd_enumerate(target, &input.input).map(|_| true)
        }
        Command::Verify {
            program,
            circuit,
            enumerate,
            shots,
            seed,
            mode,
        } => cmd_verify(program, circuit, *enumerate, *shots, *seed, mode),
        Command::Report { program } => cmd_report(program).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification FAILED");
            ExitCode::from(1)
        }
        Err(msg) => fail2(msg),
    }
}
