use std::time::Instant;

use num_complex::Complex64;

use super::{DenseMatrix, OracleError, DEFAULT_CAP};
use crate::circuit::{
    Circuit, Control, InitialState, MeasurementRecord, Operation, PrintKind, PrintRecord, PrintValue,
    RunStats, StepStat, XorShift64Star, PROBABILITY_TOL,
};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    /// `K ρ`: acts on the row index.
    Left,
    /// `ρ K†`: acts on the column index with the conjugated payload.
    Right,
}

/// Applies `payload` to the `targets` of one index of `rho`, restricted to
/// indices whose control bits match. Never builds the full operator.
fn kernel(rho: &mut DenseMatrix, targets: &[usize], controls: &[Control], payload: &[Complex64], side: Side) {
    let n = rho.n_qubits();
    let dim = rho.dim();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let k = targets.len();
    let local = 1usize << k;
    let offsets: Vec<usize> = (0..local)
        .map(|a| {
            targets
                .iter()
                .enumerate()
                .filter(|(j, _)| (a >> (k - 1 - j)) & 1 == 1)
                .map(|(_, &t)| bit(t))
                .sum()
        })
        .collect();
    let tmask: usize = targets.iter().map(|&t| bit(t)).sum();
    let cmask: usize = controls.iter().map(|c| bit(c.qubit)).sum();
    let cval: usize = controls.iter().filter(|c| c.positive).map(|c| bit(c.qubit)).sum();
    let entry = |a: usize, b: usize| match side {
        Side::Left => payload[a * local + b],
        Side::Right => payload[a * local + b].conj(),
    };
    let data = rho.data_mut();
    let mut old = vec![Complex64::new(0.0, 0.0); local];
    for base in 0..dim {
        if base & tmask != 0 || base & cmask != cval {
            continue;
        }
        for other in 0..dim {
            let at = |i: usize| match side {
                Side::Left => i * dim + other,
                Side::Right => other * dim + i,
            };
            for (a, slot) in old.iter_mut().enumerate() {
                *slot = data[at(base | offsets[a])];
            }
            for a in 0..local {
                data[at(base | offsets[a])] = (0..local).map(|b| entry(a, b) * old[b]).sum();
            }
        }
    }
}

fn conjugate(rho: &mut DenseMatrix, targets: &[usize], controls: &[Control], payload: &[Complex64]) {
    kernel(rho, targets, controls, payload, Side::Left);
    kernel(rho, targets, controls, payload, Side::Right);
}

fn probabilities(rho: &DenseMatrix, qubit: usize) -> (f64, f64) {
    let shift = rho.n_qubits() - 1 - qubit;
    let mut p = [0.0; 2];
    for i in 0..rho.dim() {
        p[(i >> shift) & 1] += rho.get(i, i).re;
    }
    (p[0], p[1])
}

/// Zeroes every entry whose row or column bit at `qubit` differs from
/// `keep(row_bit, col_bit)`.
fn mask(rho: &mut DenseMatrix, qubit: usize, keep: impl Fn(usize, usize) -> bool) {
    let shift = rho.n_qubits() - 1 - qubit;
    let dim = rho.dim();
    let data = rho.data_mut();
    for r in 0..dim {
        for c in 0..dim {
            if !keep((r >> shift) & 1, (c >> shift) & 1) {
                data[r * dim + c] = Complex64::new(0.0, 0.0);
            }
        }
    }
}

fn initial(n: usize, init: &InitialState) -> DenseMatrix {
    let mut rho = DenseMatrix::zeros(n);
    match init {
        InitialState::Basis(i) => rho.set(*i, *i, Complex64::new(1.0, 0.0)),
        InitialState::Amplitudes(amps) => {
            let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
            for (a, i) in amps {
                v[*i] += a;
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for r in 0..v.len() {
                for c in 0..v.len() {
                    rho.set(r, c, v[r] * v[c].conj() / (norm * norm));
                }
            }
        }
        InitialState::Mixture(parts) => {
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            for (w, i) in parts {
                let cur = rho.get(*i, *i);
                rho.set(*i, *i, cur + w / total);
            }
        }
    }
    rho
}

/// Outcome of a dense run.
#[derive(Clone, Debug)]
pub struct DenseRun {
    pub rho: DenseMatrix,
    pub records: Vec<MeasurementRecord>,
    pub prints: Vec<PrintRecord>,
    /// `nodes` and `live_nodes` count stored entries.
    pub stats: RunStats,
}

/// Array-based density-matrix simulator with a qubit cap.
#[derive(Clone, Debug)]
pub struct DenseSimulator {
    pub cap: usize,
    pub seed: u64,
}

impl Default for DenseSimulator {
    fn default() -> Self {
        DenseSimulator {
            cap: DEFAULT_CAP,
            seed: 0,
        }
    }
}

pub fn dense_run(c: &Circuit) -> Result<DenseRun, OracleError> {
    DenseSimulator::default().run(c)
}

impl DenseSimulator {
    pub fn new(cap: usize, seed: u64) -> Self {
        DenseSimulator { cap, seed }
    }

    pub fn run(&self, c: &Circuit) -> Result<DenseRun, OracleError> {
        if c.n_qubits > self.cap {
            return Err(OracleError::OverCap {
                n: c.n_qubits,
                cap: self.cap,
            });
        }
        c.validate().map_err(|e| OracleError::Step {
            step: e.step,
            message: e.source.to_string(),
        })?;
        let start = Instant::now();
        let mut rho = initial(c.n_qubits, &c.initial);
        let mut rng = XorShift64Star::new(self.seed);
        let mut records = Vec::new();
        let mut prints = Vec::new();
        let mut steps = Vec::new();
        let mut peak_bytes = rho.bytes();
        let fail = |step: usize, message: String| OracleError::Step { step, message };

        for (index, op) in c.ops.iter().enumerate() {
            let t0 = Instant::now();
            let mut record = |outcome: Option<u8>, qubit: usize, (p0, p1): (f64, f64)| {
                records.push(MeasurementRecord {
                    step: index,
                    qubit,
                    outcome,
                    p0,
                    p1,
                })
            };
            match op {
                Operation::Gate(g) => conjugate(&mut rho, &g.targets, &g.controls, &g.payload),
                Operation::Channel(ch) => {
                    let mut acc = DenseMatrix::zeros(rho.n_qubits());
                    for term in ch.terms() {
                        let mut image = rho.clone();
                        if let Some(k) = &term.operator {
                            conjugate(&mut image, &ch.targets, &[], k);
                        }
                        acc = acc.add(&image.scale(Complex64::new(term.weight, 0.0)))?;
                    }
                    rho = acc;
                }
                Operation::Measure { qubit } => {
                    record(None, *qubit, probabilities(&rho, *qubit));
                    mask(&mut rho, *qubit, |r, c| r == c);
                }
                Operation::SampleMeasure { qubit } => {
                    let (p0, p1) = probabilities(&rho, *qubit);
                    let u = rng.next_f64() * (p0 + p1);
                    let mut outcome = if u < p0 { 0 } else { 1 };
                    if outcome == 0 && p0 <= PROBABILITY_TOL {
                        outcome = 1;
                    } else if outcome == 1 && p1 <= PROBABILITY_TOL {
                        outcome = 0;
                    }
                    record(Some(outcome), *qubit, (p0, p1));
                    rho = collapse(rho, *qubit, outcome).map_err(|m| fail(index, m))?;
                }
                Operation::Collapse { qubit, outcome } => {
                    record(Some(*outcome), *qubit, probabilities(&rho, *qubit));
                    rho = collapse(rho, *qubit, *outcome).map_err(|m| fail(index, m))?;
                }
                Operation::Probe { qubit } => record(None, *qubit, probabilities(&rho, *qubit)),
                Operation::PartialTrace { qubit } => rho = rho.ptrace(*qubit)?,
                Operation::TraceAll => {
                    let t = rho.trace();
                    rho = DenseMatrix::from_fn(0, |_, _| t);
                }
                Operation::Print(kind) => {
                    let value = match *kind {
                        PrintKind::Probs(qubit) => {
                            let (p0, p1) = probabilities(&rho, qubit);
                            PrintValue::Probs { qubit, p0, p1 }
                        }
                        PrintKind::Trace => {
                            let t = rho.trace();
                            PrintValue::Trace { re: t.re, im: t.im }
                        }
                        PrintKind::Nodes => PrintValue::Entries {
                            count: rho.data().len(),
                        },
                    };
                    prints.push(PrintRecord { step: index, value });
                }
                Operation::AssertProb {
                    qubit,
                    outcome,
                    value,
                    tol,
                } => {
                    let (p0, p1) = probabilities(&rho, *qubit);
                    let actual = if *outcome == 0 { p0 } else { p1 };
                    if (actual - value).abs() > *tol {
                        return Err(fail(
                            index,
                            format!(
                                "assert_prob failed: P(qubit {qubit} = {outcome}) = {actual}, expected {value} ± {tol}"
                            ),
                        ));
                    }
                }
            }
            peak_bytes = peak_bytes.max(rho.bytes());
            steps.push(StepStat {
                index,
                op: op.label(),
                nodes: rho.data().len(),
                live_nodes: rho.data().len(),
                wall_ms: t0.elapsed().as_secs_f64() * 1e3,
            });
        }
        let stats = RunStats {
            n_qubits: c.n_qubits,
            engine: "dense".into(),
            gates: c.gate_count(),
            steps,
            peak_nodes: 0,
            peak_bytes,
            arena_peak: 0,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        };
        Ok(DenseRun {
            rho,
            records,
            prints,
            stats,
        })
    }
}

fn collapse(mut rho: DenseMatrix, qubit: usize, outcome: u8) -> Result<DenseMatrix, String> {
    let (p0, p1) = probabilities(&rho, qubit);
    let p = if outcome == 0 { p0 } else { p1 };
    if p <= PROBABILITY_TOL {
        return Err(format!("outcome {outcome} on qubit {qubit} has probability {p}"));
    }
    let b = outcome as usize;
    mask(&mut rho, qubit, |r, c| r == b && c == b);
    Ok(rho.scale(Complex64::new(1.0 / p, 0.0)))
}
