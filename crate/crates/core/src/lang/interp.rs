use num_complex::Complex64;

use super::ast::*;
use super::ValidationError;
use crate::circuit::{Channel, Circuit, Control, Gate, InitialState, Operation, PrintKind};

/// A lowered script with the source position of each operation.
#[derive(Clone, Debug, PartialEq)]
pub struct Lowered {
    pub circuit: Circuit,
    pub op_spans: Vec<Span>,
}

fn err(span: Span, message: impl Into<String>) -> ValidationError {
    ValidationError {
        span,
        message: message.into(),
    }
}

struct Lowerer {
    n: usize,
}

impl Lowerer {
    fn qubit(&self, q: &Qubit) -> Result<usize, ValidationError> {
        if q.value >= self.n {
            return Err(err(
                q.span,
                format!("qubit {} out of range for {} qubits", q.value, self.n),
            ));
        }
        Ok(q.value)
    }

    fn probability(&self, p: &Located<f64>) -> Result<f64, ValidationError> {
        if !(0.0..=1.0).contains(&p.value) {
            return Err(err(p.span, format!("probability {} outside [0, 1]", p.value)));
        }
        Ok(p.value)
    }

    fn gate(&self, g: &GateApp, span: Span) -> Result<Gate, ValidationError> {
        let built = match g {
            GateApp::Single(kind, q) => {
                let q = self.qubit(q)?;
                Ok(match kind {
                    SingleGate::H => Gate::h(q),
                    SingleGate::X => Gate::x(q),
                    SingleGate::Y => Gate::y(q),
                    SingleGate::Z => Gate::z(q),
                    SingleGate::S => Gate::s(q),
                    SingleGate::T => Gate::t(q),
                })
            }
            GateApp::U1(q, m) => {
                let q = self.qubit(q)?;
                let z = |i: usize| Complex64::new(m[2 * i].value, m[2 * i + 1].value);
                Gate::u1(q, [z(0), z(1), z(2), z(3)])
            }
            GateApp::Cnot(c, t) => Gate::cnot(self.qubit(c)?, self.qubit(t)?),
            GateApp::Toffoli(a, b, t) => Gate::toffoli(self.qubit(a)?, self.qubit(b)?, self.qubit(t)?),
            GateApp::Swap(a, b) => Gate::swap(self.qubit(a)?, self.qubit(b)?),
            GateApp::Cu(controls, inner) => {
                let mut ctrls = Vec::with_capacity(controls.len());
                for c in controls {
                    let qubit = self.qubit(&Located::new(c.value.qubit, c.span))?;
                    ctrls.push(Control {
                        qubit,
                        positive: c.value.positive,
                    });
                }
                let base = self.gate(&inner.value, inner.span)?;
                base.controlled(&ctrls)
            }
        };
        built.map_err(|e| err(span, e.to_string()))
    }

    fn init(&self, spec: &InitSpec, span: Span) -> Result<InitialState, ValidationError> {
        let check_ket = |k: &Located<Ket>| {
            if k.value.width() != self.n {
                return Err(err(
                    k.span,
                    format!("ket has {} bits, expected {}", k.value.width(), self.n),
                ));
            }
            Ok(k.value.index())
        };
        match spec {
            InitSpec::Ket(k) => Ok(InitialState::Basis(check_ket(k)?)),
            InitSpec::Mix(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                for (w, k) in parts {
                    if w.value < 0.0 {
                        return Err(err(w.span, "mixture weights must be non-negative"));
                    }
                    out.push((w.value, check_ket(k)?));
                }
                if out.iter().map(|(w, _)| w).sum::<f64>() <= 0.0 {
                    return Err(err(span, "mixture weights sum to zero"));
                }
                Ok(InitialState::Mixture(out))
            }
            InitSpec::Amps(parts) => {
                let mut out = Vec::with_capacity(parts.len());
                for (a, k) in parts {
                    out.push((a.value, check_ket(k)?));
                }
                if out.iter().map(|(a, _)| a.norm_sqr()).sum::<f64>() <= 0.0 {
                    return Err(err(span, "amplitudes have zero norm"));
                }
                Ok(InitialState::Amplitudes(out))
            }
        }
    }
}

/// Lowers a parsed script to the circuit IR. Qubit references use the
/// numbering in effect at each statement: `ptrace q` removes wire `q` and
/// shifts later wires down by one.
pub fn lower(script: &Script) -> Result<Lowered, ValidationError> {
    let mut stmts = script.stmts.iter();
    let first = stmts
        .next()
        .ok_or_else(|| err(Span { line: 1, col: 1 }, "empty script, expected `qubits N`"))?;
    let Stmt::Qubits(n) = &first.value else {
        return Err(err(first.span, "script must start with `qubits N`"));
    };
    let mut lw = Lowerer { n: n.value };
    let mut circuit = Circuit::new(n.value);
    let mut op_spans = Vec::new();
    let mut initialized = false;
    for stmt in stmts {
        let span = stmt.span;
        let op = match &stmt.value {
            Stmt::Qubits(_) => return Err(err(span, "`qubits` may appear only once")),
            Stmt::Init(spec) => {
                if initialized || !circuit.ops.is_empty() {
                    return Err(err(span, "`init` must come once, before any operation"));
                }
                circuit.initial = lw.init(spec, span)?;
                initialized = true;
                continue;
            }
            Stmt::Gate(g) => Operation::Gate(lw.gate(g, span)?),
            Stmt::BitFlip(q, p) => {
                let ch = Channel::bit_flip(lw.qubit(q)?, lw.probability(p)?);
                Operation::Channel(ch.map_err(|e| err(span, e.to_string()))?)
            }
            Stmt::PhaseFlip(q, p) => {
                let ch = Channel::phase_flip(lw.qubit(q)?, lw.probability(p)?);
                Operation::Channel(ch.map_err(|e| err(span, e.to_string()))?)
            }
            Stmt::Measure(q) => Operation::Measure { qubit: lw.qubit(q)? },
            Stmt::PMeasure(q) => Operation::SampleMeasure { qubit: lw.qubit(q)? },
            Stmt::Ptrace(q) => {
                let qubit = lw.qubit(q)?;
                lw.n -= 1;
                Operation::PartialTrace { qubit }
            }
            Stmt::TraceAll => {
                lw.n = 0;
                Operation::TraceAll
            }
            Stmt::Print(PrintSpec::Probs(q)) => Operation::Print(PrintKind::Probs(lw.qubit(q)?)),
            Stmt::Print(PrintSpec::Trace) => Operation::Print(PrintKind::Trace),
            Stmt::Print(PrintSpec::Nodes) => Operation::Print(PrintKind::Nodes),
            Stmt::AssertProb {
                qubit,
                outcome,
                value,
                tol,
            } => {
                if outcome.value > 1 {
                    return Err(err(outcome.span, format!("outcome must be 0 or 1, found {}", outcome.value)));
                }
                if tol.value < 0.0 {
                    return Err(err(tol.span, "tolerance must be non-negative"));
                }
                Operation::AssertProb {
                    qubit: lw.qubit(qubit)?,
                    outcome: outcome.value as u8,
                    value: value.value,
                    tol: tol.value,
                }
            }
        };
        circuit.push(op);
        op_spans.push(span);
    }
    circuit.validate().map_err(|e| {
        let span = op_spans.get(e.step).copied().unwrap_or(first.span);
        err(span, e.source.to_string())
    })?;
    Ok(Lowered { circuit, op_spans })
}

pub fn interpret(script: &Script) -> Result<Circuit, ValidationError> {
    lower(script).map(|l| l.circuit)
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn compile(src: &str) -> Result<Circuit, ValidationError> {
        interpret(&parse(src).unwrap())
    }

    #[test]
    fn bell_script() {
        let c = compile("qubits 2\nh 0\ncnot 0 1\n").unwrap();
        assert_eq!(c.gate_count(), 2);
        assert_eq!(c.ops.len(), 2);
    }

    #[test]
    fn ptrace_renumbers_later_references() {
        let c = compile("qubits 3\nptrace 0\nmeasure 1\n").unwrap();
        assert_eq!(c.ops[1], Operation::Measure { qubit: 1 });
        assert_eq!(c.wire_map(1)[1], 2);
        let e = compile("qubits 3\nptrace 0\nmeasure 2\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (3, 9));
    }

    #[test]
    fn mixture_has_unit_trace() {
        let c = compile("qubits 2\ninit mix 0.75 |00> 0.25 |10>\n").unwrap();
        assert_eq!(c.initial, InitialState::Mixture(vec![(0.75, 0), (0.25, 2)]));
        let r = crate::circuit::run(&c).unwrap();
        assert!((r.manager.trace(&r.rho).unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn validation_errors_point_at_tokens() {
        let e = compile("qubits 2\nbitflip 0 1.5\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 11));
        let e = compile("qubits 2\ncnot 1 1\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 1));
        let e = compile("qubits 2\ninit |0>\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 6));
        let e = compile("h 0\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (1, 1));
        let e = compile("qubits 2\ncu [-3] x 0\n").unwrap_err();
        assert_eq!((e.span.line, e.span.col), (2, 5));
    }

    #[test]
    fn negative_controls_lower_to_polarity() {
        let c = compile("qubits 3\ncu [-0, 1] x 2\n").unwrap();
        let Operation::Gate(g) = &c.ops[0] else { panic!() };
        assert_eq!(g.controls, vec![Control::off(0), Control::on(1)]);
        assert_eq!(g.targets, vec![2]);
    }
}
