//! Benchmark circuit generators and the scaling harness.

use std::f64::consts::PI;
use std::ops::RangeInclusive;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{run, Circuit, CircuitError, Control, Gate, InitialState, Operation};
use crate::dd::{DdManager, NODE_BYTES};
use crate::linalg::Quidd;
use crate::oracle::{DenseMatrix, DenseSimulator, OracleError, DEFAULT_CAP};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("{0}")]
    Range(String),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

fn cx(c: usize, t: usize) -> Gate {
    Gate::cnot(c, t).expect("distinct wires")
}

/// Phase flip on the basis states where every wire in `wires` reads the
/// matching bit of `pattern` (first wire = most significant bit).
fn phase_flip_on(wires: &[usize], pattern: usize) -> Gate {
    let k = wires.len();
    let bit = |j: usize| (pattern >> (k - 1 - j)) & 1 == 1;
    let controls: Vec<Control> = (0..k - 1)
        .map(|j| Control {
            qubit: wires[j],
            positive: bit(j),
        })
        .collect();
    let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let payload = if bit(k - 1) {
        vec![one, zero, zero, -one]
    } else {
        vec![-one, zero, zero, one]
    };
    Gate::new("cz", vec![wires[k - 1]], controls, payload).expect("valid phase flip")
}

// ---- Grover -----------------------------------------------------------

/// `⌊(π/4)·√(2^n)⌋`.
pub fn grover_iterations(n: usize) -> usize {
    (PI / 4.0 * 2f64.powf(n as f64 / 2.0)).floor() as usize
}

/// `sin²((2k+1)·asin(2^{-n/2}))` for `k` iterations.
pub fn grover_success(n: usize, k: usize) -> f64 {
    let theta = 2f64.powf(-(n as f64) / 2.0).asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// Grover search over `n` data qubits for basis state `marked`: equal
/// superposition, `grover_iterations(n)` rounds of oracle and diffusion, then
/// a probe on every wire.
pub fn gen_grover(n: usize, marked: usize) -> Result<Circuit, BenchError> {
    if n < 2 {
        return Err(BenchError::Range(format!("grover needs at least 2 data qubits, got {n}")));
    }
    if n >= usize::BITS as usize || marked >> n != 0 {
        return Err(BenchError::Range(format!("marked index {marked} needs more than {n} qubits")));
    }
    let wires: Vec<usize> = (0..n).collect();
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.gate(Gate::h(q));
    }
    for _ in 0..grover_iterations(n) {
        c.gate(phase_flip_on(&wires, marked));
        for q in 0..n {
            c.gate(Gate::h(q));
        }
        c.gate(phase_flip_on(&wires, 0));
        for q in 0..n {
            c.gate(Gate::h(q));
        }
    }
    for qubit in 0..n {
        c.push(Operation::Probe { qubit });
    }
    Ok(c)
}

/// Marked element used by the harness: alternating bits `…0101`.
pub fn grover_default_marked(n: usize) -> usize {
    ((1usize << n) - 1) / 3
}

// ---- ripple-carry adder ---------------------------------------------------

/// Wires of adder cell `i` (cell 0 is the least significant bit):
/// carry-in, x, y (becomes the sum bit), carry-out.
pub fn rc_adder_cell(i: usize) -> [usize; 4] {
    [4 * i, 4 * i + 1, 4 * i + 2, 4 * i + 3]
}

pub const RC_ADDER_QUBITS: usize = 16;

fn wire_bit(w: usize) -> usize {
    1 << (RC_ADDER_QUBITS - 1 - w)
}

/// Basis index holding `x` and `y` on the adder's input wires.
pub fn rc_adder_input(x: u8, y: u8) -> usize {
    (0..4)
        .map(|i| {
            let [_, xw, yw, _] = rc_adder_cell(i);
            ((x >> i) & 1) as usize * wire_bit(xw) + ((y >> i) & 1) as usize * wire_bit(yw)
        })
        .sum()
}

/// Reads `(sum, carry)` from an output basis index.
pub fn rc_adder_decode(index: usize) -> (u8, u8) {
    let sum = (0..4)
        .map(|i| (((index & wire_bit(rc_adder_cell(i)[2])) != 0) as u8) << i)
        .sum();
    let carry = (index & wire_bit(rc_adder_cell(3)[3]) != 0) as u8;
    (sum, carry)
}

/// 4-bit reversible ripple-carry adder on 16 wires. Each cell computes
/// `g = xy ⊕ c(x⊕y)` and leaves `x⊕y⊕c` on its y wire; cell `i > 0` first
/// copies the previous carry-out into its carry-in.
pub fn gen_rc_adder(x: u8, y: u8) -> Result<Circuit, BenchError> {
    if x > 15 || y > 15 {
        return Err(BenchError::Range(format!("adder inputs must be 4-bit, got {x} and {y}")));
    }
    let mut c = Circuit::new(RC_ADDER_QUBITS).with_initial(InitialState::Basis(rc_adder_input(x, y)));
    for i in 0..4 {
        let [cin, xw, yw, g] = rc_adder_cell(i);
        if i > 0 {
            c.gate(cx(rc_adder_cell(i - 1)[3], cin));
        }
        c.gate(Gate::toffoli(xw, yw, g)?);
        c.gate(cx(xw, yw));
        c.gate(Gate::toffoli(cin, yw, g)?);
        c.gate(cx(cin, yw));
    }
    Ok(c)
}

// ---- error-correction demos ---------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CodeKind {
    Bitflip3,
    Steane7,
}

impl CodeKind {
    pub fn data_qubits(self) -> usize {
        match self {
            CodeKind::Bitflip3 => 3,
            CodeKind::Steane7 => 7,
        }
    }

    pub fn total_qubits(self) -> usize {
        match self {
            CodeKind::Bitflip3 => 5,
            CodeKind::Steane7 => 13,
        }
    }

    /// Wire carrying the logical qubit before encoding and after decoding.
    pub fn logical_wire(self) -> usize {
        match self {
            CodeKind::Bitflip3 => 0,
            CodeKind::Steane7 => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum InjectedError {
    None,
    X(usize),
    Z(usize),
}

impl std::fmt::Display for InjectedError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InjectedError::None => write!(f, "none"),
            InjectedError::X(i) => write!(f, "X({i})"),
            InjectedError::Z(i) => write!(f, "Z({i})"),
        }
    }
}

/// Unitary preparing the test logical state `0.866025|0⟩ + 0.5e^{iπ/3}|1⟩`
/// from |0⟩.
pub fn logical_prep(q: usize) -> Gate {
    let (c, s) = (3f64.sqrt() / 2.0, 0.5);
    let ph = Complex64::from_polar(1.0, PI / 3.0);
    Gate::u1(
        q,
        [Complex64::new(c, 0.0), -ph.conj() * s, ph * s, Complex64::new(c, 0.0)],
    )
    .expect("unitary preparation")
}

/// Stabilizer supports of the Steane code; data wire `j` has syndrome
/// `j + 1` with the first generator as the most significant bit.
pub const STEANE_GENERATORS: [[usize; 4]; 3] = [[3, 4, 5, 6], [1, 2, 5, 6], [0, 2, 4, 6]];

fn steane_encoder() -> Vec<Gate> {
    let mut g = vec![cx(2, 4), cx(2, 5)];
    for (pivot, targets) in [(0, [2, 4, 6]), (1, [2, 5, 6]), (3, [4, 5, 6])] {
        g.push(Gate::h(pivot));
        g.extend(targets.iter().map(|&t| cx(pivot, t)));
    }
    g
}

fn syndrome_controls(ancillas: &[usize], syndrome: usize) -> Vec<Control> {
    let k = ancillas.len();
    (0..k)
        .map(|j| Control {
            qubit: ancillas[j],
            positive: (syndrome >> (k - 1 - j)) & 1 == 1,
        })
        .collect()
}

/// Encode, inject `error`, extract the syndrome into ancillas, correct,
/// decode, undo the preparation and probe the logical wire: its `p0` is the
/// logical fidelity.
pub fn gen_code_demo(kind: CodeKind, error: InjectedError) -> Result<Circuit, BenchError> {
    if let InjectedError::X(i) | InjectedError::Z(i) = error {
        if i >= kind.data_qubits() {
            return Err(BenchError::Range(format!(
                "error site {i} outside the {} data qubits",
                kind.data_qubits()
            )));
        }
    }
    let mut c = Circuit::new(kind.total_qubits());
    let logical = kind.logical_wire();
    c.gate(logical_prep(logical));
    let encoder = match kind {
        CodeKind::Bitflip3 => vec![cx(0, 1), cx(0, 2)],
        CodeKind::Steane7 => steane_encoder(),
    };
    for g in &encoder {
        c.gate(g.clone());
    }
    match error {
        InjectedError::None => {}
        InjectedError::X(i) => {
            c.gate(Gate::x(i));
        }
        InjectedError::Z(i) => {
            c.gate(Gate::z(i));
        }
    }
    match kind {
        CodeKind::Bitflip3 => {
            for (anc, pair) in [(3, [0, 1]), (4, [1, 2])] {
                for d in pair {
                    c.gate(cx(d, anc));
                }
            }
            c.push(Operation::Measure { qubit: 3 });
            c.push(Operation::Measure { qubit: 4 });
            for (site, syndrome) in [(0, 0b10), (1, 0b11), (2, 0b01)] {
                c.gate(Gate::x(site).controlled(&syndrome_controls(&[3, 4], syndrome))?);
            }
        }
        CodeKind::Steane7 => {
            let x_anc = [7, 8, 9];
            let z_anc = [10, 11, 12];
            for (gen, &anc) in STEANE_GENERATORS.iter().zip(&x_anc) {
                for &d in gen {
                    c.gate(cx(d, anc));
                }
            }
            for (gen, &anc) in STEANE_GENERATORS.iter().zip(&z_anc) {
                c.gate(Gate::h(anc));
                for &d in gen {
                    c.gate(cx(anc, d));
                }
                c.gate(Gate::h(anc));
            }
            for qubit in x_anc.iter().chain(&z_anc) {
                c.push(Operation::Measure { qubit: *qubit });
            }
            for site in 0..7 {
                c.gate(Gate::x(site).controlled(&syndrome_controls(&x_anc, site + 1))?);
            }
            for site in 0..7 {
                c.gate(Gate::z(site).controlled(&syndrome_controls(&z_anc, site + 1))?);
            }
        }
    }
    for g in encoder.iter().rev() {
        c.gate(g.inverse());
    }
    c.gate(logical_prep(logical).inverse());
    c.push(Operation::Probe { qubit: logical });
    Ok(c)
}

// ---- BB84 -------------------------------------------------------------------

/// BB84 key exchange with ancilla-modeled random bits and measurements.
/// Without Eve (7 wires): Alice's bit and basis, the photon, Bob's basis and
/// result, then BasesEq and Error. Eve adds her basis and result (9 wires).
/// Every wire but the last two is traced out, leaving the joint state of
/// BasesEq (wire 0) and Error (wire 1).
pub fn gen_bb84(eve: bool) -> Circuit {
    let n = if eve { 9 } else { 7 };
    let (a, alpha, photon) = (0, 1, 2);
    let (beta, b) = if eve { (5, 6) } else { (3, 4) };
    let (bases_eq, err) = (n - 2, n - 1);
    let ch = |c: usize, t: usize| Gate::h(t).controlled(&[Control::on(c)]).expect("distinct wires");
    let mut c = Circuit::new(n);
    let mut random = vec![a, alpha, beta];
    if eve {
        random.push(3);
    }
    for &q in &random {
        c.gate(Gate::h(q));
    }
    c.gate(cx(a, photon));
    c.gate(ch(alpha, photon));
    if eve {
        let (eps, e) = (3, 4);
        c.gate(ch(eps, photon));
        c.gate(cx(photon, e));
        c.gate(ch(eps, photon));
    }
    c.gate(ch(beta, photon));
    c.gate(cx(photon, b));
    c.gate(cx(alpha, bases_eq));
    c.gate(cx(beta, bases_eq));
    c.gate(Gate::x(bases_eq));
    c.gate(cx(a, err));
    c.gate(cx(b, err));
    for _ in 0..n - 2 {
        c.push(Operation::PartialTrace { qubit: 0 });
    }
    c
}

/// `P(Error = 1 | BasesEq = 1)` from the final 2-qubit diagonal
/// `[P(00), P(01), P(10), P(11)]`.
pub fn bb84_error_rate(diag: [f64; 4]) -> f64 {
    diag[3] / (diag[2] + diag[3])
}

// ---- result readers -----------------------------------------------------

/// The basis index `ρ` projects onto, if it is a single basis projector.
pub fn basis_index(m: &mut DdManager, rho: &Quidd) -> Option<usize> {
    let mut index = 0;
    for q in 0..rho.n_qubits {
        let (p0, p1) = m.measure_prob(rho, q).ok()?;
        index <<= 1;
        if (p1 - 1.0).abs() < 1e-9 && p0.abs() < 1e-9 {
            index |= 1;
        } else if !((p0 - 1.0).abs() < 1e-9 && p1.abs() < 1e-9) {
            return None;
        }
    }
    Some(index)
}

fn dense_diag(d: &DenseMatrix) -> Vec<f64> {
    (0..d.dim()).map(|i| d.get(i, i).re).collect()
}

// ---- harness --------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Grover,
    RcAdder,
    Bitflip3,
    Steane7,
    Bb84,
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "grover" => Family::Grover,
            "rc_adder" => Family::RcAdder,
            "bitflip3" => Family::Bitflip3,
            "steane7" => Family::Steane7,
            "bb84" => Family::Bb84,
            _ => return Err(format!("unknown family `{s}` (grover, rc_adder, bitflip3, steane7, bb84)")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Quidd,
    Dense,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Quidd => "quidd",
            Engine::Dense => "dense",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quidd" => Ok(Engine::Quidd),
            "dense" => Ok(Engine::Dense),
            _ => Err(format!("unknown engine `{s}` (quidd, dense)")),
        }
    }
}

/// One benchmark measurement. `None` cells are empty in CSV; over-cap rows
/// print `OVER-CAP` instead.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub gates: usize,
    pub engine: Engine,
    pub label: String,
    pub over_cap: bool,
    pub wall_ms: Option<f64>,
    pub peak_nodes: Option<usize>,
    pub peak_bytes: Option<usize>,
    /// Whether the output matched the family's closed-form expectation.
    pub verified: Option<bool>,
}

pub const CSV_HEADER: &str = "n,gates,engine,wall_ms,peak_nodes,peak_bytes";

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let cell = |v: Option<String>| {
            if r.over_cap {
                "OVER-CAP".to_string()
            } else {
                v.unwrap_or_default()
            }
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.n,
            r.gates,
            r.engine.name(),
            cell(r.wall_ms.map(|w| format!("{w:.3}"))),
            cell(r.peak_nodes.map(|p| p.to_string())),
            cell(r.peak_bytes.map(|p| p.to_string())),
        ));
    }
    out
}

/// Instances of a family: `(label, circuit, check)` where `check` inspects
/// the final diagonal.
type Check = Box<dyn Fn(&[f64], &[f64]) -> bool>;

fn instances(family: Family, n_range: RangeInclusive<usize>) -> Result<Vec<(String, Circuit, Check)>, BenchError> {
    let mut out: Vec<(String, Circuit, Check)> = Vec::new();
    match family {
        Family::Grover => {
            for n in n_range {
                let marked = grover_default_marked(n);
                let expected = grover_success(n, grover_iterations(n));
                let check: Check = Box::new(move |diag, _| (diag[marked] - expected).abs() <= 1e-6);
                out.push((format!("grover n={n} marked={marked}"), gen_grover(n, marked)?, check));
            }
        }
        Family::RcAdder => {
            for x in 0..16u8 {
                for y in 0..16u8 {
                    let want = x + y;
                    let check: Check = Box::new(move |diag, _| {
                        let Some(idx) = diag.iter().position(|&p| (p - 1.0).abs() < 1e-9) else {
                            return false;
                        };
                        let (sum, carry) = rc_adder_decode(idx);
                        sum + 16 * carry == want
                    });
                    out.push((format!("rc_adder {x}+{y}"), gen_rc_adder(x, y)?, check));
                }
            }
        }
        Family::Bitflip3 | Family::Steane7 => {
            let kind = if family == Family::Bitflip3 {
                CodeKind::Bitflip3
            } else {
                CodeKind::Steane7
            };
            let tol = if kind == CodeKind::Bitflip3 { 1e-9 } else { 1e-6 };
            let mut errors = vec![InjectedError::None];
            errors.extend((0..kind.data_qubits()).map(InjectedError::X));
            if kind == CodeKind::Steane7 {
                errors.extend((0..kind.data_qubits()).map(InjectedError::Z));
            }
            for e in errors {
                let check: Check = Box::new(move |_, p0s| p0s.last().is_some_and(|p| (p - 1.0).abs() <= tol));
                out.push((format!("{} {e}", family_name(family)), gen_code_demo(kind, e)?, check));
            }
        }
        Family::Bb84 => {
            for eve in [false, true] {
                let want = if eve { 0.25 } else { 0.0 };
                let check: Check = Box::new(move |diag, _| {
                    let d = [diag[0], diag[1], diag[2], diag[3]];
                    (bb84_error_rate(d) - want).abs() <= 1e-9
                });
                out.push((format!("bb84 eve={eve}"), gen_bb84(eve), check));
            }
        }
    }
    Ok(out)
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::Grover => "grover",
        Family::RcAdder => "rc_adder",
        Family::Bitflip3 => "bitflip3",
        Family::Steane7 => "steane7",
        Family::Bb84 => "bb84",
    }
}

/// Runs every instance of `family` (for Grover, one per `n` in `n_range`;
/// other families ignore the range) on `engine`. The dense engine records
/// an over-cap row instead of running circuits wider than `cap`.
pub fn scaling_harness(
    family: Family,
    n_range: RangeInclusive<usize>,
    engine: Engine,
    cap: usize,
) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for (label, circuit, check) in instances(family, n_range)? {
        let base = BenchRow {
            n: circuit.n_qubits,
            gates: circuit.gate_count(),
            engine,
            label,
            over_cap: false,
            wall_ms: None,
            peak_nodes: None,
            peak_bytes: None,
            verified: None,
        };
        let start = Instant::now();
        let row = match engine {
            Engine::Quidd => {
                let r = run(&circuit).map_err(|e| e.source)?;
                let wall = start.elapsed().as_secs_f64() * 1e3;
                let diag = quidd_diag(&r.manager, &r.rho);
                let p0s: Vec<f64> = r.records.iter().map(|m| m.p0).collect();
                BenchRow {
                    wall_ms: Some(wall),
                    peak_nodes: Some(r.stats.peak_nodes),
                    peak_bytes: Some(r.stats.peak_nodes * NODE_BYTES),
                    verified: diag.map(|d| check(&d, &p0s)),
                    ..base
                }
            }
            Engine::Dense => match DenseSimulator::new(cap, 0).run(&circuit) {
                Ok(r) => {
                    let wall = start.elapsed().as_secs_f64() * 1e3;
                    let p0s: Vec<f64> = r.records.iter().map(|m| m.p0).collect();
                    BenchRow {
                        wall_ms: Some(wall),
                        peak_bytes: Some(r.stats.peak_bytes),
                        verified: Some(check(&dense_diag(&r.rho), &p0s)),
                        ..base
                    }
                }
                Err(OracleError::OverCap { .. }) => BenchRow { over_cap: true, ..base },
                Err(e) => return Err(BenchError::Range(e.to_string())),
            },
        };
        rows.push(row);
    }
    Ok(rows)
}

/// Diagonal of a QuIDD density matrix, when small enough to list.
fn quidd_diag(m: &DdManager, rho: &Quidd) -> Option<Vec<f64>> {
    if rho.n_qubits > 20 {
        return None;
    }
    Some((0..1usize << rho.n_qubits).map(|i| m.entry(rho, i, i).re).collect())
}

/// Default dense cap re-exported for callers of the harness.
pub const DENSE_CAP: usize = DEFAULT_CAP;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grover_two_qubits_is_exact() {
        let c = gen_grover(2, 3).unwrap();
        assert_eq!(grover_iterations(2), 1);
        let r = run(&c).unwrap();
        let p = r.manager.entry(&r.rho, 3, 3).re;
        assert!((p - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn grover_five_matches_closed_form() {
        assert_eq!(grover_iterations(5), 4);
        let c = gen_grover(5, 9).unwrap();
        let r = run(&c).unwrap();
        let want = grover_success(5, 4);
        assert!((r.manager.entry(&r.rho, 9, 9).re - want).abs() < 1e-6);
    }

    #[test]
    fn grover_rejects_degenerate_sizes() {
        assert!(gen_grover(0, 0).is_err());
        assert!(gen_grover(1, 0).is_err());
        assert!(gen_grover(3, 8).is_err());
    }

    #[test]
    fn adder_examples() {
        for (x, y, sum, carry) in [(0, 0, 0, 0), (15, 1, 0, 1), (5, 3, 8, 0)] {
            let c = gen_rc_adder(x, y).unwrap();
            let mut r = run(&c).unwrap();
            let idx = basis_index(&mut r.manager, &r.rho).unwrap();
            assert_eq!(rc_adder_decode(idx), (sum, carry), "{x}+{y}");
        }
        assert!(gen_rc_adder(16, 0).is_err());
    }

    #[test]
    fn adder_io_layout() {
        assert_eq!(rc_adder_decode(rc_adder_input(0, 9)), (9, 0));
    }

    #[test]
    fn bitflip_without_error_is_exact() {
        let c = gen_code_demo(CodeKind::Bitflip3, InjectedError::None).unwrap();
        let r = run(&c).unwrap();
        let p = r.records.last().unwrap().p0;
        assert!((p - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn code_demo_rejects_bad_sites() {
        assert!(gen_code_demo(CodeKind::Bitflip3, InjectedError::X(3)).is_err());
        assert!(gen_code_demo(CodeKind::Steane7, InjectedError::Z(7)).is_err());
    }

    #[test]
    fn csv_marks_over_cap() {
        let rows = scaling_harness(Family::Grover, 12..=12, Engine::Dense, 11).unwrap();
        let csv = rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("12,"));
        assert!(row.ends_with(",dense,OVER-CAP,OVER-CAP,OVER-CAP"));
    }
}
