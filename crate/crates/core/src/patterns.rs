//! Measurement patterns: state transfer, generalized state transfer, CNot and
//! teleportation, each with its outcome-to-byproduct rule.
//!
//! A pattern is one *step of simulation*: running its measurement sequence on
//! an input register leaves, on the output qubits, the simulated gate applied
//! to the input state decorated by an outcome-dependent Pauli byproduct. The
//! byproduct rule is a closed-form map from the outcome vector; no state
//! inspection is ever needed to know the correction.
//!
//! Measured-out qubits stay in the register until the caller detaches them;
//! each ends in an eigenstate of the last observable that touched it, labeled
//! by the recorded outcome (`detach_spec`).

use rand::Rng;

use crate::cmat::CMat;
use crate::error::{Error, Result};
use crate::gates::{self, GateMatrix};
use crate::observables::{force_outcome, measure, Axis, Observable, Outcome};
use crate::pauli::{CliffordImages, PauliBits, PauliOp};
use crate::statevec::{compose_register, detach_factor, make_state, StateVector};

use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

/// Ordered outcomes, one per measurement in a pattern.
pub type OutcomeVector = Vec<Outcome>;

/// Initial state of an auxiliary qubit: one of the six 1-qubit stabilizer
/// states (all that can arise as V∣0⟩ for Clifford V).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AuxInit {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl AuxInit {
    pub fn state(self) -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = C64::new;
        let amps = match self {
            AuxInit::Zero => vec![c(1.0, 0.0), c(0.0, 0.0)],
            AuxInit::One => vec![c(0.0, 0.0), c(1.0, 0.0)],
            AuxInit::Plus => vec![c(s, 0.0), c(s, 0.0)],
            AuxInit::Minus => vec![c(s, 0.0), c(-s, 0.0)],
            AuxInit::PlusI => vec![c(s, 0.0), c(0.0, s)],
            AuxInit::MinusI => vec![c(s, 0.0), c(0.0, -s)],
        };
        make_state(amps).expect("stabilizer state is normalized")
    }

    pub fn token(self) -> &'static str {
        match self {
            AuxInit::Zero => "0",
            AuxInit::One => "1",
            AuxInit::Plus => "+",
            AuxInit::Minus => "-",
            AuxInit::PlusI => "+i",
            AuxInit::MinusI => "-i",
        }
    }

    pub fn parse(s: &str) -> Result<AuxInit> {
        match s {
            "0" => Ok(AuxInit::Zero),
            "1" => Ok(AuxInit::One),
            "+" => Ok(AuxInit::Plus),
            "-" => Ok(AuxInit::Minus),
            "+i" => Ok(AuxInit::PlusI),
            "-i" => Ok(AuxInit::MinusI),
            other => Err(Error::ProgramFormat(format!("bad aux init {other:?}"))),
        }
    }

    /// Match a 1-qubit state to a stabilizer state modulo global phase.
    fn from_state(v: &StateVector) -> Result<AuxInit> {
        for init in [
            AuxInit::Zero,
            AuxInit::One,
            AuxInit::Plus,
            AuxInit::Minus,
            AuxInit::PlusI,
            AuxInit::MinusI,
        ] {
            if crate::statevec::fidelity_mod_phase(v, &init.state())? > 1.0 - 1e-9 {
                return Ok(init);
            }
        }
        Err(Error::NotClifford)
    }
}

/// One measurement of a pattern: an unsigned axis observable plus the sign of
/// the operator it stands in for. A sign of −1 means the conjugated observable
/// was −(token); the apparatus is the same, only the outcome is reinterpreted
/// inside the byproduct rule.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub observable: Observable,
    pub sign: i8,
}

impl Measurement {
    fn logical(&self, recorded: Outcome) -> i8 {
        self.sign * recorded.value()
    }
}

/// Expected leftover factor on measured-out qubits: the joint eigenstate of
/// the listed measurements' (unsigned) observables at the recorded outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct DetachGroup {
    /// Dead qubits, ascending.
    pub qubits: Vec<usize>,
    /// Indices into the pattern's measurement list that pin the factor.
    pub meas_indices: Vec<usize>,
}

/// Closed-form byproduct rules.
#[derive(Clone, Debug, PartialEq)]
pub enum ByproductRule {
    /// Generalized state transfer: σ = Z^{(1−j·l)/2} X^{(1−k)/2} from the
    /// sign-adjusted outcomes, conjugated through V, then composed with a
    /// folded Pauli. Plain transfer is the trivial instance.
    Gst {
        v_images: CliffordImages,
        fold: PauliBits,
    },
    /// CNot: Z^{(1−j·l)/2} on the first input, X^{(1−k·m)/2} on the second.
    Cnot,
    /// Teleportation: X^{(1−z₁·z₂)/2} Z^{(1−x₁·x₂)/2} on the output qubit.
    Teleport,
}

impl ByproductRule {
    pub fn kind_token(&self) -> &'static str {
        match self {
            ByproductRule::Gst { v_images, fold }
                if *v_images == CliffordImages::IDENTITY && fold.is_identity() =>
            {
                "transfer"
            }
            ByproductRule::Gst { .. } => "gst",
            ByproductRule::Cnot => "cnot",
            ByproductRule::Teleport => "teleport",
        }
    }
}

/// One step of simulation: measurements, qubit roles, byproduct rule and the
/// simulated gate.
#[derive(Clone, Debug)]
pub struct MeasurementPattern {
    pub measurements: Vec<Measurement>,
    /// Input qubits in logical order.
    pub input_qubits: Vec<usize>,
    /// Auxiliary qubits with the initial states used for standalone runs.
    pub aux_qubits: Vec<(usize, AuxInit)>,
    /// `output_map[i]` is the physical home of logical input `i` afterwards.
    pub output_map: Vec<usize>,
    pub rule: ByproductRule,
    /// The unitary this pattern step-simulates.
    pub gate: GateMatrix,
    pub label: String,
    pub detach_spec: Vec<DetachGroup>,
    /// Phase-free conjugation action of `gate` when it is Clifford; used by
    /// the correction automaton to push residuals through H steps.
    pub gate_images: Option<CliffordImages>,
}

/// Match `W · axis · W†` against ± the axis set.
fn conjugate_axis(w: &CMat, axis: Axis) -> Result<(Axis, i8)> {
    let conj = w.mul(&axis.matrix()).mul(&w.adjoint());
    for cand in Axis::ALL {
        let m = cand.matrix();
        if conj.approx_eq(&m, 1e-9) {
            return Ok((cand, 1));
        }
        if conj.approx_eq(&m.scale(C64::new(-1.0, 0.0)), 1e-9) {
            return Ok((cand, -1));
        }
    }
    Err(Error::UnsupportedObservable(format!(
        "conjugate of {axis} leaves the axis set"
    )))
}

/// Conjugation images of a 1-qubit Clifford; errors if `v` is not Clifford.
fn clifford_images(v: &GateMatrix) -> Result<CliffordImages> {
    let to_bits = |axis: Axis| -> Option<PauliBits> {
        match axis {
            Axis::X => Some(PauliBits::X),
            Axis::Y => Some(PauliBits::XZ),
            Axis::Z => Some(PauliBits::Z),
            _ => None,
        }
    };
    let (ax, _) = conjugate_axis(v.entries(), Axis::X).map_err(|_| Error::NotClifford)?;
    let (az, _) = conjugate_axis(v.entries(), Axis::Z).map_err(|_| Error::NotClifford)?;
    match (to_bits(ax), to_bits(az)) {
        (Some(x_image), Some(z_image)) => Ok(CliffordImages { x_image, z_image }),
        _ => Err(Error::NotClifford),
    }
}

impl MeasurementPattern {
    /// Register size needed to run this pattern standalone.
    pub fn num_qubits(&self) -> usize {
        let mut max = 0;
        for m in &self.measurements {
            for &(q, _) in m.observable.terms() {
                max = max.max(q);
            }
        }
        for &q in &self.input_qubits {
            max = max.max(q);
        }
        for &(q, _) in &self.aux_qubits {
            max = max.max(q);
        }
        max + 1
    }

    /// Embed `phi` on the input qubits and the aux initial states elsewhere.
    pub fn prepare_register(&self, phi: &StateVector) -> Result<StateVector> {
        if phi.num_qubits() != self.input_qubits.len() {
            return Err(Error::DimensionMismatch {
                left: phi.num_qubits(),
                right: self.input_qubits.len(),
            });
        }
        let aux_states: Vec<(usize, StateVector)> = self
            .aux_qubits
            .iter()
            .map(|&(q, init)| (q, init.state()))
            .collect();
        let mut parts: Vec<(&[usize], &StateVector)> =
            vec![(self.input_qubits.as_slice(), phi)];
        let aux_slots: Vec<[usize; 1]> = aux_states.iter().map(|&(q, _)| [q]).collect();
        for (slot, (_, state)) in aux_slots.iter().zip(&aux_states) {
            parts.push((slot.as_slice(), state));
        }
        compose_register(self.num_qubits(), &parts)
    }

    /// Relabel every qubit reference through `map` (used when binding a
    /// compiled step to live register positions).
    pub fn relabel(&self, map: &BTreeMap<usize, usize>) -> Result<MeasurementPattern> {
        let get = |q: usize| -> Result<usize> { map.get(&q).copied().ok_or(Error::UnmappedQubit(q)) };
        let mut out = self.clone();
        for m in out.measurements.iter_mut() {
            let terms: Result<Vec<(usize, Axis)>> = m
                .observable
                .terms()
                .iter()
                .map(|&(q, a)| Ok((get(q)?, a)))
                .collect();
            m.observable = Observable::new(terms?)?;
        }
        out.input_qubits = self
            .input_qubits
            .iter()
            .map(|&q| get(q))
            .collect::<Result<_>>()?;
        out.aux_qubits = self
            .aux_qubits
            .iter()
            .map(|&(q, i)| Ok((get(q)?, i)))
            .collect::<Result<_>>()?;
        out.output_map = self
            .output_map
            .iter()
            .map(|&q| get(q))
            .collect::<Result<_>>()?;
        for g in out.detach_spec.iter_mut() {
            g.qubits = g.qubits.iter().map(|&q| get(q)).collect::<Result<_>>()?;
            g.qubits.sort_unstable();
        }
        Ok(out)
    }

    /// Fold an extra Pauli into the byproduct rule; the pattern then simulates
    /// `fold · gate`. Only meaningful for generalized-transfer rules.
    pub fn with_fold(mut self, fold: PauliBits) -> Result<MeasurementPattern> {
        match &mut self.rule {
            ByproductRule::Gst { fold: f, .. } => {
                *f = f.xor(fold);
                self.gate = fold.matrix().compose(&self.gate);
                self.gate_images = clifford_images(&self.gate).ok();
                Ok(self)
            }
            _ => Err(Error::ProgramFormat(
                "fold is only supported on transfer-style steps".into(),
            )),
        }
    }
}

/// Basic state transfer: measurements {X⁽ᵇ⁾, Z⁽ᵃ⁾⊗Z⁽ᵇ⁾, X⁽ᵃ⁾} move the state
/// of `a` to `b` up to σ = Z^{(1−j·l)/2} X^{(1−k)/2}; `a` is left in the
/// l-labeled X eigenstate.
pub fn transfer_pattern(a: usize, b: usize) -> Result<MeasurementPattern> {
    let mut p = generalized_transfer_pattern(&gates::identity(), &gates::identity(), a, b)?;
    p.label = "I".into();
    Ok(p)
}

/// State transfer with extra unitaries: measurements
/// {(V X V†)⁽ᵇ⁾, (U† Z U)⁽ᵃ⁾⊗(V Z V†)⁽ᵇ⁾, (U† X U)⁽ᵃ⁾} simulate `V·U` with
/// byproduct V σ V†. `V` must be Clifford so the byproduct commutes outward;
/// each conjugated observable must land in the axis set (up to sign).
pub fn generalized_transfer_pattern(
    u: &GateMatrix,
    v: &GateMatrix,
    a: usize,
    b: usize,
) -> Result<MeasurementPattern> {
    if a == b {
        return Err(Error::DuplicateQubit(a));
    }
    if u.arity() != 1 || v.arity() != 1 {
        return Err(Error::ArityMismatch {
            arity: 1,
            got: u.arity().max(v.arity()),
        });
    }
    let v_images = clifford_images(v)?;
    let ud = u.adjoint();
    let (ax_b1, s_b1) = conjugate_axis(v.entries(), Axis::X)?;
    let (ax_a2, s_a2) = conjugate_axis(ud.entries(), Axis::Z)?;
    let (ax_b2, s_b2) = conjugate_axis(v.entries(), Axis::Z)?;
    let (ax_a3, s_a3) = conjugate_axis(ud.entries(), Axis::X)?;

    let measurements = vec![
        Measurement {
            observable: Observable::single(b, ax_b1),
            sign: s_b1,
        },
        Measurement {
            observable: Observable::pair(a, ax_a2, b, ax_b2)?,
            sign: s_a2 * s_b2,
        },
        Measurement {
            observable: Observable::single(a, ax_a3),
            sign: s_a3,
        },
    ];
    let aux_init = AuxInit::from_state(&crate::statevec::apply_gate(
        &crate::statevec::make_basis_state(1, "0")?,
        v,
        &[0],
    )?)?;
    let gate = v.compose(u);
    let gate_images = clifford_images(&gate).ok();
    Ok(MeasurementPattern {
        measurements,
        input_qubits: vec![a],
        aux_qubits: vec![(b, aux_init)],
        output_map: vec![b],
        rule: ByproductRule::Gst {
            v_images,
            fold: PauliBits::I,
        },
        gate,
        label: "gst".into(),
        detach_spec: vec![DetachGroup {
            qubits: vec![a],
            meas_indices: vec![2],
        }],
        gate_images,
    })
}

/// CNot step: measurements {Z⁽ᶜ⁾, Z⁽ᵃ⁾⊗X⁽ᶜ⁾, Z⁽ᶜ⁾⊗X⁽ᵇ⁾, X⁽ᶜ⁾} simulate CNot
/// on (a control, b target) with byproduct Z^{(1−j·l)/2} on a and
/// X^{(1−k·m)/2} on b; the auxiliary c is left in the m-labeled X eigenstate.
pub fn cnot_pattern(a: usize, b: usize, c: usize) -> Result<MeasurementPattern> {
    for (i, &q) in [a, b, c].iter().enumerate() {
        if [a, b, c][..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let measurements = vec![
        Measurement {
            observable: Observable::single(c, Axis::Z),
            sign: 1,
        },
        Measurement {
            observable: Observable::pair(a, Axis::Z, c, Axis::X)?,
            sign: 1,
        },
        Measurement {
            observable: Observable::pair(c, Axis::Z, b, Axis::X)?,
            sign: 1,
        },
        Measurement {
            observable: Observable::single(c, Axis::X),
            sign: 1,
        },
    ];
    Ok(MeasurementPattern {
        measurements,
        input_qubits: vec![a, b],
        aux_qubits: vec![(c, AuxInit::Plus)],
        output_map: vec![a, b],
        rule: ByproductRule::Cnot,
        gate: gates::cnot(),
        label: "CNOT".into(),
        detach_spec: vec![DetachGroup {
            qubits: vec![c],
            meas_indices: vec![3],
        }],
        gate_images: None,
    })
}

/// Teleportation with measurements only (the baseline): two Bell measurements,
/// each realized as a pair of commuting two-outcome measurements. Uses two
/// auxiliary qubits; the state of `a` lands on `c`, and (a, b) are left in the
/// Bell state labeled by the second measurement pair.
pub fn teleport_pattern(a: usize, b: usize, c: usize) -> Result<MeasurementPattern> {
    for (i, &q) in [a, b, c].iter().enumerate() {
        if [a, b, c][..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    let measurements = vec![
        Measurement {
            observable: Observable::pair(b, Axis::X, c, Axis::X)?,
            sign: 1,
        },
        Measurement {
            observable: Observable::pair(b, Axis::Z, c, Axis::Z)?,
            sign: 1,
        },
        Measurement {
            observable: Observable::pair(a, Axis::X, b, Axis::X)?,
            sign: 1,
        },
        Measurement {
            observable: Observable::pair(a, Axis::Z, b, Axis::Z)?,
            sign: 1,
        },
    ];
    let mut dead = vec![a, b];
    dead.sort_unstable();
    Ok(MeasurementPattern {
        measurements,
        input_qubits: vec![a],
        aux_qubits: vec![(b, AuxInit::Zero), (c, AuxInit::Plus)],
        output_map: vec![c],
        rule: ByproductRule::Teleport,
        gate: gates::identity(),
        label: "I".into(),
        detach_spec: vec![DetachGroup {
            qubits: dead,
            meas_indices: vec![2, 3],
        }],
        gate_images: Some(CliffordImages::IDENTITY),
    })
}

/// The closed-form byproduct for an outcome vector; a pure function of the
/// outcomes, no state access.
pub fn byproduct(pattern: &MeasurementPattern, outcomes: &[Outcome]) -> Result<PauliOp> {
    if outcomes.len() != pattern.measurements.len() {
        return Err(Error::OutcomeLengthMismatch {
            expected: pattern.measurements.len(),
            got: outcomes.len(),
        });
    }
    let logical: Vec<i8> = pattern
        .measurements
        .iter()
        .zip(outcomes)
        .map(|(m, &o)| m.logical(o))
        .collect();
    match &pattern.rule {
        ByproductRule::Gst { v_images, fold } => {
            let (j, k, l) = (logical[0], logical[1], logical[2]);
            let sigma = PauliBits {
                x: k < 0,
                z: j * l < 0,
            };
            let bits = v_images.conjugate(sigma).xor(*fold);
            Ok(PauliOp::single(pattern.output_map[0], bits))
        }
        ByproductRule::Cnot => {
            let (j, k, l, m) = (logical[0], logical[1], logical[2], logical[3]);
            let mut op = PauliOp::identity();
            if j * l < 0 {
                op.set(pattern.input_qubits[0], PauliBits::Z);
            }
            if k * m < 0 {
                op.set(
                    pattern.input_qubits[1],
                    op.get(pattern.input_qubits[1]).xor(PauliBits::X),
                );
            }
            Ok(op)
        }
        ByproductRule::Teleport => {
            let (x1, z1, x2, z2) = (logical[0], logical[1], logical[2], logical[3]);
            Ok(PauliOp::single(
                pattern.output_map[0],
                PauliBits {
                    x: z1 * z2 < 0,
                    z: x1 * x2 < 0,
                },
            ))
        }
    }
}

/// Where a pattern's outcomes come from.
pub enum OutcomeSource<'a, R: Rng> {
    Sampled(&'a mut R),
    Forced(&'a [Outcome]),
}

/// Run the measurements in order. The returned state still contains the
/// measured-out qubits; detaching them is the caller's choice.
pub fn run_pattern<R: Rng>(
    state: &StateVector,
    pattern: &MeasurementPattern,
    source: OutcomeSource<'_, R>,
) -> Result<(StateVector, OutcomeVector, PauliOp)> {
    let mut forced: Option<&[Outcome]> = None;
    let mut rng: Option<&mut R> = None;
    match source {
        OutcomeSource::Sampled(r) => rng = Some(r),
        OutcomeSource::Forced(o) => {
            if o.len() != pattern.measurements.len() {
                return Err(Error::OutcomeLengthMismatch {
                    expected: pattern.measurements.len(),
                    got: o.len(),
                });
            }
            forced = Some(o);
        }
    }
    let mut cur = state.clone();
    let mut outcomes = OutcomeVector::with_capacity(pattern.measurements.len());
    for (i, m) in pattern.measurements.iter().enumerate() {
        let outcome = match (&mut rng, forced) {
            (Some(r), None) => {
                let (o, next, _) = measure(&cur, &m.observable, *r)?;
                cur = next;
                o
            }
            (None, Some(f)) => {
                let (next, _) = force_outcome(&cur, &m.observable, f[i])
                    .map_err(|e| match e {
                        Error::ImpossibleBranch { .. } => Error::ImpossibleBranch { index: i },
                        other => other,
                    })?;
                cur = next;
                f[i]
            }
            _ => unreachable!(),
        };
        outcomes.push(outcome);
    }
    let bp = byproduct(pattern, &outcomes)?;
    Ok((cur, outcomes, bp))
}

/// The state a detach group must be left in: the joint eigenstate of the
/// group's pinned (unsigned) observables at the recorded outcomes.
pub fn expected_detach_factor(
    pattern: &MeasurementPattern,
    group: &DetachGroup,
    outcomes: &[Outcome],
) -> Result<StateVector> {
    let k = group.qubits.len();
    let dim = 1usize << k;
    let mut proj = CMat::identity(dim);
    for &mi in &group.meas_indices {
        let meas = &pattern.measurements[mi];
        // restrict the observable to the group's qubit ranks
        let terms: Result<Vec<(usize, Axis)>> = meas
            .observable
            .terms()
            .iter()
            .map(|&(q, a)| {
                let rank = group
                    .qubits
                    .iter()
                    .position(|&g| g == q)
                    .ok_or(Error::UnmappedQubit(q))?;
                Ok((rank, a))
            })
            .collect();
        let restricted = Observable::new(terms?)?.matrix(k)?;
        let sign = f64::from(outcomes[mi].value());
        let p = CMat::identity(dim)
            .add(&restricted.scale(C64::new(sign, 0.0)))
            .scale(C64::new(0.5, 0.0));
        proj = proj.mul(&p);
    }
    // rank-1 projector: the heaviest column is the eigenstate
    let mut best = (0usize, 0.0f64);
    for j in 0..dim {
        let w: f64 = (0..dim).map(|i| proj[(i, j)].norm_sqr()).sum();
        if w > best.1 {
            best = (j, w);
        }
    }
    let norm = best.1.sqrt();
    let amps: Vec<C64> = (0..dim).map(|i| proj[(i, best.0)] / norm).collect();
    Ok(StateVector::from_raw(k, amps))
}

/// Detach the dead qubits per `detach_spec` and reorder the survivors into
/// logical order. Returns the logical-order state and the byproduct relocated
/// to logical indices.
pub fn extract_output(
    state: &StateVector,
    pattern: &MeasurementPattern,
    outcomes: &[Outcome],
) -> Result<(StateVector, PauliOp)> {
    let mut live: Vec<usize> = (0..state.num_qubits()).collect();
    let mut cur = state.clone();
    for group in &pattern.detach_spec {
        let expected = expected_detach_factor(pattern, group, outcomes)?;
        let positions: Vec<usize> = group
            .qubits
            .iter()
            .map(|&q| {
                live.iter()
                    .position(|&l| l == q)
                    .ok_or(Error::UnmappedQubit(q))
            })
            .collect::<Result<_>>()?;
        cur = detach_factor(&cur, &positions, &expected)?;
        live.retain(|q| !group.qubits.contains(q));
    }
    // gather logical order: logical i lives at output_map[i]
    let perm: Vec<usize> = pattern
        .output_map
        .iter()
        .map(|&p| {
            live.iter()
                .position(|&l| l == p)
                .ok_or(Error::UnmappedQubit(p))
        })
        .collect::<Result<_>>()?;
    if perm.len() != live.len() {
        return Err(Error::ProgramFormat(
            "outputs do not cover the surviving qubits".into(),
        ));
    }
    let logical_state = cur.reorder_qubits(&perm)?;
    let map: BTreeMap<usize, usize> = pattern
        .output_map
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, i))
        .collect();
    let bp = byproduct(pattern, outcomes)?.relocate(&map)?;
    Ok((logical_state, bp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::{fidelity_mod_phase, make_state};
    use num_complex::Complex64 as C64;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn outs(vals: &[i8]) -> OutcomeVector {
        vals.iter().map(|&v| Outcome::from_value(v).unwrap()).collect()
    }

    #[test]
    fn transfer_measurement_tokens() {
        let p = transfer_pattern(0, 1).unwrap();
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        assert_eq!(tokens, ["X@1", "Z@0*Z@1", "X@0"]);
        assert!(p.measurements.iter().all(|m| m.sign == 1));
        assert_eq!(p.rule.kind_token(), "transfer");
        assert_eq!(p.aux_qubits, vec![(1, AuxInit::Zero)]);
    }

    #[test]
    fn gst_reduces_to_transfer_for_identities() {
        let t = transfer_pattern(0, 1).unwrap();
        let g = generalized_transfer_pattern(&gates::identity(), &gates::identity(), 0, 1).unwrap();
        let tok = |p: &MeasurementPattern| {
            p.measurements
                .iter()
                .map(|m| (m.observable.token(), m.sign))
                .collect::<Vec<_>>()
        };
        assert_eq!(tok(&t), tok(&g));
    }

    #[test]
    fn gst_conjugated_measurement_lists() {
        // U=H, V=I -> [X@b, X@a*Z@b, Z@a]
        let p = generalized_transfer_pattern(&gates::hadamard(), &gates::identity(), 0, 1).unwrap();
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        assert_eq!(tokens, ["X@1", "X@0*Z@1", "Z@0"]);
        // U=I, V=H -> [Z@b, Z@a*X@b, X@a]
        let p = generalized_transfer_pattern(&gates::identity(), &gates::hadamard(), 0, 1).unwrap();
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        assert_eq!(tokens, ["Z@1", "Z@0*X@1", "X@0"]);
        assert_eq!(p.aux_qubits, vec![(1, AuxInit::Plus)]);
        // U=T, V=H -> [Z@b, Z@a*X@b, X-Y@a]
        let p = generalized_transfer_pattern(&gates::t_gate(), &gates::hadamard(), 0, 1).unwrap();
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        assert_eq!(tokens, ["Z@1", "Z@0*X@1", "X-Y@0"]);
        // U=T, V=I -> T step measures X-Y; U=TDG measures X+Y
        let p = generalized_transfer_pattern(&gates::t_gate(), &gates::identity(), 0, 1).unwrap();
        assert_eq!(p.measurements[2].observable.token(), "X-Y@0");
        let p = generalized_transfer_pattern(&gates::t_dagger(), &gates::identity(), 0, 1).unwrap();
        assert_eq!(p.measurements[2].observable.token(), "X+Y@0");
    }

    #[test]
    fn gst_rejects_non_clifford_v() {
        let err =
            generalized_transfer_pattern(&gates::identity(), &gates::t_gate(), 0, 1).unwrap_err();
        assert_eq!(err, Error::NotClifford);
    }

    #[test]
    fn cnot_measurement_tokens() {
        let p = cnot_pattern(0, 1, 2).unwrap();
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        // terms are canonicalized by ascending qubit, so Z⁽ᶜ⁾⊗X⁽ᵇ⁾ is X@1*Z@2
        assert_eq!(tokens, ["Z@2", "Z@0*X@2", "X@1*Z@2", "X@2"]);
        assert_eq!(p.aux_qubits.len(), 1);
        assert!(cnot_pattern(0, 1, 1).is_err());
    }

    #[test]
    fn teleport_uses_two_aux() {
        let p = teleport_pattern(0, 1, 2).unwrap();
        assert_eq!(p.aux_qubits.len(), 2);
        let tokens: Vec<String> = p.measurements.iter().map(|m| m.observable.token()).collect();
        assert_eq!(tokens, ["X@1*X@2", "Z@1*Z@2", "X@0*X@1", "Z@0*Z@1"]);
    }

    #[test]
    fn transfer_byproduct_formula() {
        let p = transfer_pattern(0, 1).unwrap();
        // (+1,+1,+1) -> I
        assert!(byproduct(&p, &outs(&[1, 1, 1])).unwrap().is_identity());
        // (+1,-1,+1) -> X on b
        assert_eq!(
            byproduct(&p, &outs(&[1, -1, 1])).unwrap(),
            PauliOp::single(1, PauliBits::X)
        );
        // (-1,+1,-1): j·l = 1 -> I
        assert!(byproduct(&p, &outs(&[-1, 1, -1])).unwrap().is_identity());
        // (-1,-1,-1): j·l = 1, k = -1 -> X
        assert_eq!(
            byproduct(&p, &outs(&[-1, -1, -1])).unwrap(),
            PauliOp::single(1, PauliBits::X)
        );
        assert!(byproduct(&p, &outs(&[1, 1])).is_err());
    }

    #[test]
    fn cnot_byproduct_formula() {
        let p = cnot_pattern(0, 1, 2).unwrap();
        assert!(byproduct(&p, &outs(&[1, 1, 1, 1])).unwrap().is_identity());
        // j·l = -1 -> Z on a
        assert_eq!(
            byproduct(&p, &outs(&[1, 1, -1, 1])).unwrap(),
            PauliOp::single(0, PauliBits::Z)
        );
        // k·m = -1 -> X on b
        assert_eq!(
            byproduct(&p, &outs(&[1, -1, 1, 1])).unwrap(),
            PauliOp::single(1, PauliBits::X)
        );
        // (-1,+1,-1,+1): j·l = 1, k·m = 1 -> I
        assert!(byproduct(&p, &outs(&[-1, 1, -1, 1])).unwrap().is_identity());
    }

    #[test]
    fn transfer_byproduct_uniform_over_four_paulis() {
        let p = transfer_pattern(0, 1).unwrap();
        let mut counts = std::collections::HashMap::new();
        for j in [1i8, -1] {
            for k in [1i8, -1] {
                for l in [1i8, -1] {
                    let bp = byproduct(&p, &outs(&[j, k, l])).unwrap();
                    *counts.entry(bp.get(1).label()).or_insert(0usize) += 1;
                }
            }
        }
        for lab in ["I", "X", "Z", "XZ"] {
            assert_eq!(counts[lab], 2, "byproduct {lab} not seen exactly twice");
        }
    }

    #[test]
    fn transfer_moves_state_with_declared_byproduct() {
        let phi = make_state(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let p = transfer_pattern(0, 1).unwrap();
        let reg = p.prepare_register(&phi).unwrap();
        // all-plus branch: b holds phi exactly
        let forced = outs(&[1, 1, 1]);
        let (post, outcomes, bp) = run_pattern::<rand_chacha::ChaCha8Rng>(
            &reg,
            &p,
            OutcomeSource::Forced(&forced),
        )
        .unwrap();
        assert!(bp.is_identity());
        let (logical, _) = extract_output(&post, &p, &outcomes).unwrap();
        assert!(fidelity_mod_phase(&logical, &phi).unwrap() > 1.0 - 1e-12);
        // (+1,-1,+1) on |0>: b ends in |1>
        let zero = crate::statevec::make_basis_state(1, "0").unwrap();
        let reg = p.prepare_register(&zero).unwrap();
        let forced = outs(&[1, -1, 1]);
        let (post, outcomes, bp) = run_pattern::<rand_chacha::ChaCha8Rng>(
            &reg,
            &p,
            OutcomeSource::Forced(&forced),
        )
        .unwrap();
        assert_eq!(bp.get(1), PauliBits::X);
        let (logical, _) = extract_output(&post, &p, &outcomes).unwrap();
        let one = crate::statevec::make_basis_state(1, "1").unwrap();
        assert!(fidelity_mod_phase(&logical, &one).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn cnot_flips_target_on_identity_branch() {
        let input = crate::statevec::make_basis_state(2, "10").unwrap();
        let p = cnot_pattern(0, 1, 2).unwrap();
        let reg = p.prepare_register(&input).unwrap();
        let forced = outs(&[1, 1, 1, 1]);
        let (post, outcomes, bp) = run_pattern::<rand_chacha::ChaCha8Rng>(
            &reg,
            &p,
            OutcomeSource::Forced(&forced),
        )
        .unwrap();
        assert!(bp.is_identity());
        let (logical, _) = extract_output(&post, &p, &outcomes).unwrap();
        let want = crate::statevec::make_basis_state(2, "11").unwrap();
        assert!(fidelity_mod_phase(&logical, &want).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn forced_transfer_prefix_reproduces_sigma_decorated_bell() {
        // |φ⟩⊗|+⟩, X⁽ᵇ⁾ forced +1 (certain), then Z⁽ᵃ⁾⊗Z⁽ᵇ⁾ forced k:
        // state = (σ_z^{(1−j)/2} ⊗ σ_x^{(1−k)/2})[α|00⟩+β|11⟩], p = 1/2
        let phi = make_state(vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let plus = AuxInit::Plus.state();
        let reg = crate::statevec::compose_register(2, &[(&[0][..], &phi), (&[1][..], &plus)])
            .unwrap();
        let xb = Observable::single(1, Axis::X);
        let zz = Observable::pair(0, Axis::Z, 1, Axis::Z).unwrap();
        let (after_x, p1) = crate::observables::force_outcome(&reg, &xb, Outcome::Plus).unwrap();
        assert!((p1 - 1.0).abs() < 1e-12);
        for k in [Outcome::Plus, Outcome::Minus] {
            let (state, p2) = crate::observables::force_outcome(&after_x, &zz, k).unwrap();
            assert!((p2 - 0.5).abs() < 1e-12);
            let mut expected = crate::statevec::make_state(vec![
                c(0.6, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.8, 0.0),
            ])
            .unwrap();
            if k == Outcome::Minus {
                expected =
                    crate::statevec::apply_gate(&expected, &crate::gates::pauli_x(), &[1]).unwrap();
            }
            assert!(
                crate::statevec::max_diff_mod_phase(&state, &expected).unwrap() < 1e-9,
                "k = {k}"
            );
        }
    }

    #[test]
    fn impossible_forced_branch_reports_index() {
        // first cnot measurement on a fresh |+> aux is unbiased, but Z@c on a
        // register where c = |0> forces +1; build that register by hand
        let p = cnot_pattern(0, 1, 2).unwrap();
        let phi = crate::statevec::make_basis_state(2, "00").unwrap();
        let zero = crate::statevec::make_basis_state(1, "0").unwrap();
        let reg = crate::statevec::compose_register(
            3,
            &[(&[0, 1][..], &phi), (&[2][..], &zero)],
        )
        .unwrap();
        let forced = outs(&[-1, 1, 1, 1]);
        let err = run_pattern::<rand_chacha::ChaCha8Rng>(&reg, &p, OutcomeSource::Forced(&forced))
            .unwrap_err();
        assert_eq!(err, Error::ImpossibleBranch { index: 0 });
    }
}
