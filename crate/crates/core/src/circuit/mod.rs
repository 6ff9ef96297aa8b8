//! Circuit intermediate representation and its execution on QuIDDs.

mod channel;
mod gate;
mod local;
mod ops;
mod rng;
mod run;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::LinalgError;

pub use channel::{Channel, ChannelKind, ChannelTerm, KRAUS_TOL};
pub use gate::{Control, Gate, UNITARY_TOL};
pub use ops::PROBABILITY_TOL;
pub use rng::XorShift64Star;
pub use run::{run, run_with, RunOptions, RunResult, RunStats, StepStat};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitRange { qubit: usize, n: usize },
    #[error("qubit {0} used twice")]
    DuplicateQubit(usize),
    #[error("gate `{name}` is not unitary")]
    NonUnitary { name: String },
    #[error("gate `{name}`: {message}")]
    BadPayload { name: String, message: String },
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("Kraus operators do not sum to the identity")]
    IncompleteKraus,
    #[error("invalid initial state: {0}")]
    InitialState(String),
    #[error("outcome {outcome} on qubit {qubit} has probability {p}")]
    ZeroProbability { qubit: usize, outcome: u8, p: f64 },
    #[error("assert_prob failed: P(qubit {qubit} = {outcome}) = {actual}, expected {expected} ± {tol}")]
    AssertionFailed {
        qubit: usize,
        outcome: u8,
        actual: f64,
        expected: f64,
        tol: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Error raised while validating or executing step `step`.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("step {step}: {source}")]
pub struct StepError {
    pub step: usize,
    #[source]
    pub source: CircuitError,
}

/// Starting state of a circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// `|index⟩`.
    Basis(usize),
    /// Pure state `Σ a |index⟩`, normalized before use.
    Amplitudes(Vec<(Complex64, usize)>),
    /// Mixture `Σ w |index⟩⟨index|`, weights normalized before use.
    Mixture(Vec<(f64, usize)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PrintKind {
    Probs(usize),
    Trace,
    Nodes,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operation {
    Gate(Gate),
    Channel(Channel),
    /// Non-selective projective measurement: `Σ_b P_b ρ P_b`, probabilities recorded.
    Measure { qubit: usize },
    /// Sampled measurement with the seeded generator; the state collapses.
    SampleMeasure { qubit: usize },
    /// Projection onto a chosen outcome, renormalized.
    Collapse { qubit: usize, outcome: u8 },
    /// Records outcome probabilities without touching the state.
    Probe { qubit: usize },
    /// Traces out a wire; later indices refer to the reduced system.
    PartialTrace { qubit: usize },
    /// Traces out every wire, leaving a 0-qubit scalar.
    TraceAll,
    Print(PrintKind),
    AssertProb {
        qubit: usize,
        outcome: u8,
        value: f64,
        tol: f64,
    },
}

impl Operation {
    pub fn label(&self) -> String {
        match self {
            Operation::Gate(g) => g.name.clone(),
            Operation::Channel(c) => c.name().to_string(),
            Operation::Measure { .. } => "measure".into(),
            Operation::SampleMeasure { .. } => "pmeasure".into(),
            Operation::Collapse { .. } => "collapse".into(),
            Operation::Probe { .. } => "probe".into(),
            Operation::PartialTrace { .. } => "ptrace".into(),
            Operation::TraceAll => "trace_all".into(),
            Operation::Print(_) => "print".into(),
            Operation::AssertProb { .. } => "assert_prob".into(),
        }
    }

    fn qubits(&self) -> Vec<usize> {
        match self {
            Operation::Gate(g) => g.qubits().collect(),
            Operation::Channel(c) => c.targets.clone(),
            Operation::Measure { qubit }
            | Operation::SampleMeasure { qubit }
            | Operation::Collapse { qubit, .. }
            | Operation::Probe { qubit }
            | Operation::PartialTrace { qubit }
            | Operation::AssertProb { qubit, .. }
            | Operation::Print(PrintKind::Probs(qubit)) => vec![*qubit],
            Operation::TraceAll | Operation::Print(_) => Vec::new(),
        }
    }

    /// Whether the operation counts towards gate totals.
    pub fn is_gate(&self) -> bool {
        matches!(self, Operation::Gate(_))
    }
}

/// Measurement outcome and probabilities observed at a step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementRecord {
    pub step: usize,
    pub qubit: usize,
    pub outcome: Option<u8>,
    pub p0: f64,
    pub p1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrintValue {
    Probs { qubit: usize, p0: f64, p1: f64 },
    Trace { re: f64, im: f64 },
    Nodes { count: usize },
    /// Dense engines report stored entries instead of nodes.
    Entries { count: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrintRecord {
    pub step: usize,
    pub value: PrintValue,
}

impl std::fmt::Display for PrintValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrintValue::Probs { qubit, p0, p1 } => write!(f, "probs {qubit}: {p0:.12} {p1:.12}"),
            PrintValue::Trace { re, im } => write!(f, "trace: {re:.12}{im:+.12}i"),
            PrintValue::Nodes { count } => write!(f, "nodes: {count}"),
            PrintValue::Entries { count } => write!(f, "entries: {count}"),
        }
    }
}

/// A circuit over `n_qubits` wires.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub initial: InitialState,
    pub ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            initial: InitialState::Basis(0),
            ops: Vec::new(),
        }
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn push(&mut self, op: Operation) -> &mut Self {
        self.ops.push(op);
        self
    }

    pub fn gate(&mut self, g: Gate) -> &mut Self {
        self.push(Operation::Gate(g))
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|o| o.is_gate()).count()
    }

    /// Qubit count in effect before each step and after the last one.
    pub fn widths(&self) -> Vec<usize> {
        let mut n = self.n_qubits;
        let mut out = Vec::with_capacity(self.ops.len() + 1);
        for op in &self.ops {
            out.push(n);
            match op {
                Operation::PartialTrace { .. } => n = n.saturating_sub(1),
                Operation::TraceAll => n = 0,
                _ => {}
            }
        }
        out.push(n);
        out
    }

    /// Original wire numbers of the live qubits before step `step`.
    pub fn wire_map(&self, step: usize) -> Vec<usize> {
        let mut wires: Vec<usize> = (0..self.n_qubits).collect();
        for op in self.ops.iter().take(step) {
            match op {
                Operation::PartialTrace { qubit } if *qubit < wires.len() => {
                    wires.remove(*qubit);
                }
                Operation::TraceAll => wires.clear(),
                _ => {}
            }
        }
        wires
    }

    /// Checks every qubit reference against the width in effect at its step
    /// (partial traces shrink later widths), plus the initial state.
    pub fn validate(&self) -> Result<(), StepError> {
        let init_err = |msg: String| StepError {
            step: 0,
            source: CircuitError::InitialState(msg),
        };
        let dim = 1u128 << self.n_qubits.min(127);
        let check_index = |i: usize| {
            if (i as u128) < dim {
                Ok(())
            } else {
                Err(init_err(format!("basis index {i} needs more than {} qubits", self.n_qubits)))
            }
        };
        match &self.initial {
            InitialState::Basis(i) => check_index(*i)?,
            InitialState::Amplitudes(a) => {
                if a.is_empty() || a.iter().map(|(z, _)| z.norm_sqr()).sum::<f64>() == 0.0 {
                    return Err(init_err("amplitudes have zero norm".into()));
                }
                for (z, i) in a {
                    if !z.re.is_finite() || !z.im.is_finite() {
                        return Err(init_err("non-finite amplitude".into()));
                    }
                    check_index(*i)?;
                }
            }
            InitialState::Mixture(m) => {
                if m.is_empty() || m.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
                    return Err(init_err("mixture weights must be non-negative".into()));
                }
                if m.iter().map(|(w, _)| w).sum::<f64>() == 0.0 {
                    return Err(init_err("mixture weights sum to zero".into()));
                }
                for (_, i) in m {
                    check_index(*i)?;
                }
            }
        }
        let widths = self.widths();
        for (step, op) in self.ops.iter().enumerate() {
            let n = widths[step];
            for q in op.qubits() {
                if q >= n {
                    return Err(StepError {
                        step,
                        source: CircuitError::QubitRange { qubit: q, n },
                    });
                }
            }
            if let Operation::AssertProb { outcome, .. } | Operation::Collapse { outcome, .. } = op {
                if *outcome > 1 {
                    return Err(StepError {
                        step,
                        source: CircuitError::InvalidProbability(*outcome as f64),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_follows_partial_traces() {
        let mut c = Circuit::new(3);
        c.push(Operation::PartialTrace { qubit: 0 });
        c.push(Operation::Measure { qubit: 1 });
        assert!(c.validate().is_ok());
        assert_eq!(c.wire_map(1), vec![1, 2]);
        assert_eq!(c.wire_map(1)[1], 2);
        c.push(Operation::Measure { qubit: 2 });
        let err = c.validate().unwrap_err();
        assert_eq!(err.step, 2);
        assert_eq!(err.source, CircuitError::QubitRange { qubit: 2, n: 2 });
    }

    #[test]
    fn validation_checks_initial_state() {
        let c = Circuit::new(2).with_initial(InitialState::Basis(4));
        assert!(c.validate().is_err());
        let c = Circuit::new(2).with_initial(InitialState::Mixture(vec![(-0.5, 0), (1.5, 1)]));
        assert!(c.validate().is_err());
        let c = Circuit::new(2).with_initial(InitialState::Amplitudes(vec![(Complex64::new(0.0, 0.0), 1)]));
        assert!(c.validate().is_err());
    }

    #[test]
    fn gate_count_ignores_other_ops() {
        let mut c = Circuit::new(2);
        c.gate(Gate::h(0)).gate(Gate::cnot(0, 1).unwrap());
        c.push(Operation::Probe { qubit: 0 });
        assert_eq!(c.gate_count(), 2);
    }
}
