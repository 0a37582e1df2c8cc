//! Circuit parsing and lowering to measurement programs.
//!
//! The `.qc` format is line based: the first effective line is `qubits N`,
//! then one gate per line (`H q`, `T q`, `TDG q`, `X q`, `Y q`, `Z q`,
//! `CNOT a b`); `#` starts a comment.
//!
//! Lowering uses a single floating auxiliary qubit: after each 1-qubit step
//! the measured-out source becomes the next step's auxiliary, and a CNot
//! step's auxiliary is reclaimed immediately, so every nonempty circuit on n
//! logical qubits compiles to exactly n+1 physical qubits.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gates;
use crate::observables::Observable;
use crate::patterns::{cnot_pattern, generalized_transfer_pattern, AuxInit, MeasurementPattern};
use crate::pauli::PauliBits;

/// Supported source gates.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GateKind {
    H,
    T,
    Tdg,
    X,
    Y,
    Z,
    Cnot,
}

impl GateKind {
    pub fn token(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
        }
    }

    pub fn arity(self) -> usize {
        if self == GateKind::Cnot {
            2
        } else {
            1
        }
    }
}

/// One source gate with its operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

/// Parsed circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitIR {
    pub num_logical: usize,
    pub gates: Vec<Gate>,
}

/// Tokens of one effective line with their 1-based column positions.
fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

/// Parse the `.qc` circuit format; errors carry 1-based line and column.
pub fn parse_circuit(text: &str) -> Result<CircuitIR> {
    let mut header: Option<usize> = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(line);
        if tokens.is_empty() {
            continue;
        }
        let err = |column: usize, msg: String| Error::Parse {
            line: line_no,
            column,
            msg,
        };
        let parse_qubit = |col: usize, tok: &str, n: usize| -> Result<usize> {
            let q: usize = tok
                .parse()
                .map_err(|_| err(col, format!("bad qubit index {tok:?}")))?;
            if q >= n {
                return Err(err(col, format!("qubit {q} out of range for {n} qubits")));
            }
            Ok(q)
        };
        match header {
            None => {
                if tokens[0].1 != "qubits" {
                    return Err(err(tokens[0].0, "missing `qubits N` header".into()));
                }
                if tokens.len() != 2 {
                    return Err(err(tokens[0].0, "expected `qubits N`".into()));
                }
                let n: usize = tokens[1]
                    .1
                    .parse()
                    .map_err(|_| err(tokens[1].0, format!("bad qubit count {:?}", tokens[1].1)))?;
                if n == 0 {
                    return Err(err(tokens[1].0, "qubit count must be at least 1".into()));
                }
                header = Some(n);
            }
            Some(n) => {
                let kind = match tokens[0].1 {
                    "H" => GateKind::H,
                    "T" => GateKind::T,
                    "TDG" => GateKind::Tdg,
                    "X" => GateKind::X,
                    "Y" => GateKind::Y,
                    "Z" => GateKind::Z,
                    "CNOT" => GateKind::Cnot,
                    other => return Err(err(tokens[0].0, format!("unknown gate {other:?}"))),
                };
                if tokens.len() != 1 + kind.arity() {
                    return Err(err(
                        tokens[0].0,
                        format!(
                            "{} takes {} operand(s), got {}",
                            kind.token(),
                            kind.arity(),
                            tokens.len() - 1
                        ),
                    ));
                }
                let qubits: Vec<usize> = tokens[1..]
                    .iter()
                    .map(|&(col, t)| parse_qubit(col, t, n))
                    .collect::<Result<_>>()?;
                if kind == GateKind::Cnot && qubits[0] == qubits[1] {
                    return Err(err(tokens[2].0, "CNOT operands must be distinct".into()));
                }
                gates.push(Gate { kind, qubits });
            }
        }
    }
    let num_logical = header.ok_or(Error::Parse {
        line: 1,
        column: 1,
        msg: "missing `qubits N` header".into(),
    })?;
    Ok(CircuitIR { num_logical, gates })
}

/// Render a circuit back to canonical `.qc` text.
pub fn circuit_text(ir: &CircuitIR) -> String {
    let mut out = format!("qubits {}\n", ir.num_logical);
    for g in &ir.gates {
        out.push_str(g.kind.token());
        for q in &g.qubits {
            out.push(' ');
            out.push_str(&q.to_string());
        }
        out.push('\n');
    }
    out
}

/// The two universal observable families. `X+Y` and `X-Y` fill the same
/// family slot (the dagger convention picks the concrete axis).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableFamily {
    O1,
    O2,
}

impl ObservableFamily {
    pub fn name(self) -> &'static str {
        match self {
            ObservableFamily::O1 => "O1",
            ObservableFamily::O2 => "O2",
        }
    }

    pub fn parse(s: &str) -> Result<ObservableFamily> {
        match s {
            "O1" => Ok(ObservableFamily::O1),
            "O2" => Ok(ObservableFamily::O2),
            other => Err(Error::ProgramFormat(format!("unknown family {other:?}"))),
        }
    }

    pub fn allowed_slots(self) -> &'static [&'static str] {
        match self {
            ObservableFamily::O1 => &["Z", "X", "X±Y", "Z*Z", "Z*X"],
            ObservableFamily::O2 => &["Z", "X", "X±Y", "Z*X"],
        }
    }

    pub fn contains(self, obs: &Observable) -> bool {
        self.allowed_slots().contains(&obs.family_slot().as_str())
    }
}

/// One compiled pattern instance with concrete qubit bindings.
///
/// `u`, `v` and `fold` are gate tokens from which the runnable pattern is
/// reconstructed; the serialized `measurements`, `aux` and `detach` fields are
/// checked against the reconstruction when a program is loaded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramStep {
    pub gate: String,
    pub kind: String,
    pub u: String,
    pub v: String,
    pub fold: String,
    /// Logical qubits this step acts on, in pattern order.
    pub logical: Vec<usize>,
    pub inputs: Vec<usize>,
    pub aux: Vec<AuxBinding>,
    pub output_map: Vec<usize>,
    pub byproduct_rule: String,
    pub measurements: Vec<MeasurementEntry>,
    pub detach: Vec<DetachEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxBinding {
    pub qubit: usize,
    pub init: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementEntry {
    pub obs: String,
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetachEntry {
    pub qubits: Vec<usize>,
    pub measurements: Vec<usize>,
}

impl ProgramStep {
    fn from_pattern(pattern: &MeasurementPattern, logical: Vec<usize>, u: &str, v: &str, fold: PauliBits) -> ProgramStep {
        ProgramStep {
            gate: pattern.label.clone(),
            kind: if pattern.rule.kind_token() == "cnot" {
                "cnot".into()
            } else {
                "gst".into()
            },
            u: u.into(),
            v: v.into(),
            fold: fold.label().into(),
            logical,
            inputs: pattern.input_qubits.clone(),
            aux: pattern
                .aux_qubits
                .iter()
                .map(|&(q, init)| AuxBinding {
                    qubit: q,
                    init: init.token().into(),
                })
                .collect(),
            output_map: pattern.output_map.clone(),
            byproduct_rule: pattern.rule.kind_token().into(),
            measurements: pattern
                .measurements
                .iter()
                .map(|m| MeasurementEntry {
                    obs: m.observable.token(),
                    sign: m.sign,
                })
                .collect(),
            detach: pattern
                .detach_spec
                .iter()
                .map(|g| DetachEntry {
                    qubits: g.qubits.clone(),
                    measurements: g.meas_indices.clone(),
                })
                .collect(),
        }
    }

    /// Reconstruct the runnable pattern and verify the serialized fields
    /// against it.
    pub fn to_pattern(&self) -> Result<MeasurementPattern> {
        let mut pattern = match self.kind.as_str() {
            "gst" => {
                if self.inputs.len() != 1 || self.aux.len() != 1 || self.output_map.len() != 1 {
                    return Err(Error::ProgramFormat(
                        "gst step must have one input, one aux, one output".into(),
                    ));
                }
                let u = gates::from_token(&self.u)?;
                let v = gates::from_token(&self.v)?;
                let mut p =
                    generalized_transfer_pattern(&u, &v, self.inputs[0], self.aux[0].qubit)?;
                let fold = PauliBits::parse(&self.fold)?;
                if !fold.is_identity() {
                    p = p.with_fold(fold)?;
                }
                p
            }
            "cnot" => {
                if self.inputs.len() != 2 || self.aux.len() != 1 {
                    return Err(Error::ProgramFormat(
                        "cnot step must have two inputs and one aux".into(),
                    ));
                }
                cnot_pattern(self.inputs[0], self.inputs[1], self.aux[0].qubit)?
            }
            other => {
                return Err(Error::ProgramFormat(format!("unknown step kind {other:?}")))
            }
        };
        pattern.label = self.gate.clone();

        // integrity: the stored surface must match the reconstruction
        let meas: Vec<MeasurementEntry> = pattern
            .measurements
            .iter()
            .map(|m| MeasurementEntry {
                obs: m.observable.token(),
                sign: m.sign,
            })
            .collect();
        if meas != self.measurements {
            return Err(Error::ProgramFormat(
                "serialized measurements do not match the step parameters".into(),
            ));
        }
        if pattern.output_map != self.output_map {
            return Err(Error::ProgramFormat(
                "serialized output_map does not match the step parameters".into(),
            ));
        }
        if pattern.rule.kind_token() != self.byproduct_rule {
            return Err(Error::ProgramFormat(
                "serialized byproduct_rule does not match the step parameters".into(),
            ));
        }
        for (a, b) in pattern.aux_qubits.iter().zip(&self.aux) {
            if a.0 != b.qubit || a.1 != AuxInit::parse(&b.init)? {
                return Err(Error::ProgramFormat(
                    "serialized aux binding does not match the step parameters".into(),
                ));
            }
        }
        Ok(pattern)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgramMetadata {
    pub source_sha256: String,
    pub source: String,
    pub dagger: String,
    pub compiler: String,
}

/// A compiled measurement program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementProgram {
    pub version: u32,
    pub family: ObservableFamily,
    pub num_logical: usize,
    pub num_physical: usize,
    pub initial_map: Vec<usize>,
    pub steps: Vec<ProgramStep>,
    pub metadata: ProgramMetadata,
}

impl MeasurementProgram {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("program serializes")
    }

    pub fn from_json(text: &str) -> Result<MeasurementProgram> {
        let program: MeasurementProgram = serde_json::from_str(text)
            .map_err(|e| Error::ProgramFormat(e.to_string()))?;
        if program.version != 1 {
            return Err(Error::ProgramFormat(format!(
                "unsupported program version {}",
                program.version
            )));
        }
        // validate steps and family soundness up front
        for step in &program.steps {
            let pattern = step.to_pattern()?;
            for m in &pattern.measurements {
                if !program.family.contains(&m.observable) {
                    return Err(Error::FamilyViolation(
                        m.observable.token(),
                        program.family.name().into(),
                    ));
                }
            }
        }
        Ok(program)
    }
}

/// The dagger resolution stamped into program metadata: a T step measures
/// (X−Y)/√2, a T† step measures (X+Y)/√2.
pub const DAGGER_CONVENTION: &str = "T:X-Y,TDG:X+Y";

struct Alloc {
    positions: Vec<usize>,
    free: usize,
}

fn gst_step(
    alloc: &mut Alloc,
    logical: usize,
    u: &str,
    v: &str,
    fold: PauliBits,
    label: &str,
) -> Result<ProgramStep> {
    let a = alloc.positions[logical];
    let b = alloc.free;
    let mut p = generalized_transfer_pattern(&gates::from_token(u)?, &gates::from_token(v)?, a, b)?;
    if !fold.is_identity() {
        p = p.with_fold(fold)?;
    }
    p.label = label.into();
    alloc.positions[logical] = b;
    alloc.free = a;
    Ok(ProgramStep::from_pattern(&p, vec![logical], u, v, fold))
}

/// Lower a circuit to a measurement program over the chosen family.
///
/// Family O1 lowers 1-qubit gates to generalized transfer with V = I; family
/// O2 uses V = H variants, lowers T to an HT step followed by an H step
/// (H·(H·T) = T), and folds source Paulis into the byproduct of two successive
/// H steps. CNot lowers to the CNot pattern in both families.
pub fn compile(ir: &CircuitIR, family: ObservableFamily) -> Result<MeasurementProgram> {
    let n = ir.num_logical;
    let mut alloc = Alloc {
        positions: (0..n).collect(),
        free: n,
    };
    let mut steps: Vec<ProgramStep> = Vec::new();
    for gate in &ir.gates {
        match (gate.kind, family) {
            (GateKind::Cnot, _) => {
                let (qa, qb) = (gate.qubits[0], gate.qubits[1]);
                let p = cnot_pattern(alloc.positions[qa], alloc.positions[qb], alloc.free)?;
                steps.push(ProgramStep::from_pattern(&p, vec![qa, qb], "", "", PauliBits::I));
            }
            (kind, ObservableFamily::O1) => {
                let q = gate.qubits[0];
                steps.push(gst_step(
                    &mut alloc,
                    q,
                    kind.token(),
                    "I",
                    PauliBits::I,
                    kind.token(),
                )?);
            }
            (GateKind::H, ObservableFamily::O2) => {
                let q = gate.qubits[0];
                steps.push(gst_step(&mut alloc, q, "I", "H", PauliBits::I, "H")?);
            }
            (GateKind::T, ObservableFamily::O2) => {
                let q = gate.qubits[0];
                steps.push(gst_step(&mut alloc, q, "T", "H", PauliBits::I, "HT")?);
                steps.push(gst_step(&mut alloc, q, "I", "H", PauliBits::I, "H")?);
            }
            (GateKind::Tdg, ObservableFamily::O2) => {
                let q = gate.qubits[0];
                steps.push(gst_step(&mut alloc, q, "TDG", "H", PauliBits::I, "HTDG")?);
                steps.push(gst_step(&mut alloc, q, "I", "H", PauliBits::I, "H")?);
            }
            (kind, ObservableFamily::O2) => {
                // Pauli gate: two H steps with the Pauli folded into the
                // second step's byproduct rule
                let q = gate.qubits[0];
                let fold = match kind {
                    GateKind::X => PauliBits::X,
                    GateKind::Y => PauliBits::XZ,
                    GateKind::Z => PauliBits::Z,
                    _ => unreachable!("H/T/TDG/CNOT handled above"),
                };
                steps.push(gst_step(&mut alloc, q, "I", "H", PauliBits::I, "H")?);
                let label = format!("{}*H", kind.token());
                steps.push(gst_step(&mut alloc, q, "I", "H", fold, &label)?);
            }
        }
    }
    let num_physical = if steps.is_empty() { n } else { n + 1 };
    let source = circuit_text(ir);
    let digest = Sha256::digest(source.as_bytes());
    let program = MeasurementProgram {
        version: 1,
        family,
        num_logical: n,
        num_physical,
        initial_map: (0..n).collect(),
        steps,
        metadata: ProgramMetadata {
            source_sha256: format!("{digest:x}"),
            source,
            dagger: DAGGER_CONVENTION.into(),
            compiler: format!("stx {}", env!("CARGO_PKG_VERSION")),
        },
    };
    // family soundness is structural; verify anyway
    for step in &program.steps {
        for m in &step.measurements {
            let obs = Observable::parse_token(&m.obs)?;
            if !family.contains(&obs) {
                return Err(Error::FamilyViolation(m.obs.clone(), family.name().into()));
            }
        }
    }
    Ok(program)
}

/// Census of the observable tokens a program uses, grouped by family slot.
#[derive(Clone, Debug, Serialize)]
pub struct CensusEntry {
    pub slot: String,
    pub two_qubit: bool,
    pub count: usize,
    /// Concrete axis tokens inside the slot (e.g. which of X±Y was used).
    pub axes: std::collections::BTreeMap<String, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ObservablesReport {
    pub family: String,
    pub distinct_slots: usize,
    pub two_qubit_slots: usize,
    pub entries: Vec<CensusEntry>,
}

/// Qubit-free concrete token of an observable, axes in canonical order.
fn bare_token(obs: &Observable) -> String {
    let mut axes: Vec<&str> = obs.terms().iter().map(|&(_, a)| a.token()).collect();
    axes.sort_by_key(|t| {
        crate::observables::Axis::ALL
            .iter()
            .position(|a| a.token() == *t)
    });
    axes.join("*")
}

pub fn observables_report(program: &MeasurementProgram) -> Result<ObservablesReport> {
    use std::collections::BTreeMap;
    let mut slots: BTreeMap<String, (bool, usize, BTreeMap<String, usize>)> = BTreeMap::new();
    for step in &program.steps {
        for m in &step.measurements {
            let obs = Observable::parse_token(&m.obs)?;
            let entry = slots
                .entry(obs.family_slot())
                .or_insert_with(|| (obs.is_two_qubit(), 0, BTreeMap::new()));
            entry.1 += 1;
            *entry.2.entry(bare_token(&obs)).or_insert(0) += 1;
        }
    }
    let entries: Vec<CensusEntry> = slots
        .into_iter()
        .map(|(slot, (two_qubit, count, axes))| CensusEntry {
            slot,
            two_qubit,
            count,
            axes,
        })
        .collect();
    Ok(ObservablesReport {
        family: program.family.name().into(),
        distinct_slots: entries.len(),
        two_qubit_slots: entries.iter().filter(|e| e.two_qubit).count(),
        entries,
    })
}

/// Static comparison constants from the teleportation-based model: per-step
/// auxiliary counts and Leung's universal two-qubit observable family.
#[derive(Clone, Debug, Serialize)]
pub struct BaselineComparison {
    pub state_transfer_aux_per_step: usize,
    pub teleport_aux_per_step: usize,
    pub teleport_model_aux_one_qubit_step: usize,
    pub teleport_model_aux_two_qubit_step: usize,
    pub leung_observable_family_size: usize,
    pub leung_observable_family: Vec<String>,
}

impl Default for BaselineComparison {
    fn default() -> Self {
        BaselineComparison {
            state_transfer_aux_per_step: 1,
            teleport_aux_per_step: 2,
            teleport_model_aux_one_qubit_step: 2,
            teleport_model_aux_two_qubit_step: 4,
            leung_observable_family_size: 4,
            leung_observable_family: vec![
                "X*X".into(),
                "Z*Z".into(),
                "X*Z".into(),
                "(X+Y)*X".into(),
            ],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResourceReport {
    pub num_logical: usize,
    pub num_physical: usize,
    pub auxiliary_qubits: usize,
    pub steps: usize,
    pub total_measurements: usize,
    pub two_qubit_measurements: usize,
    pub baseline: BaselineComparison,
}

pub fn resource_report(program: &MeasurementProgram) -> Result<ResourceReport> {
    let mut total = 0usize;
    let mut two_qubit = 0usize;
    for step in &program.steps {
        for m in &step.measurements {
            total += 1;
            if Observable::parse_token(&m.obs)?.is_two_qubit() {
                two_qubit += 1;
            }
        }
    }
    Ok(ResourceReport {
        num_logical: program.num_logical,
        num_physical: program.num_physical,
        auxiliary_qubits: program.num_physical - program.num_logical,
        steps: program.steps.len(),
        total_measurements: total,
        two_qubit_measurements: two_qubit,
        baseline: BaselineComparison::default(),
    })
}
