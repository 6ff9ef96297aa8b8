use std::fmt::Write;

use super::ast::*;
use crate::oracle::format_complex;

fn gate(out: &mut String, g: &GateApp) {
    match g {
        GateApp::Single(kind, q) => write!(out, "{} {}", kind.keyword(), q.value),
        GateApp::U1(q, m) => {
            write!(out, "u1 {}", q.value).unwrap();
            for x in m {
                write!(out, " {}", x.value).unwrap();
            }
            Ok(())
        }
        GateApp::Cnot(c, t) => write!(out, "cnot {} {}", c.value, t.value),
        GateApp::Toffoli(a, b, t) => write!(out, "toffoli {} {} {}", a.value, b.value, t.value),
        GateApp::Swap(a, b) => write!(out, "swap {} {}", a.value, b.value),
        GateApp::Cu(controls, inner) => {
            let list: Vec<String> = controls
                .iter()
                .map(|c| format!("{}{}", if c.value.positive { "" } else { "-" }, c.value.qubit))
                .collect();
            write!(out, "cu [{}] ", list.join(", ")).unwrap();
            gate(out, &inner.value);
            Ok(())
        }
    }
    .unwrap();
}

/// Canonical text of `script`, one statement per line.
pub fn pretty_print(script: &Script) -> String {
    let mut out = String::new();
    for stmt in &script.stmts {
        match &stmt.value {
            Stmt::Qubits(n) => write!(out, "qubits {}", n.value).unwrap(),
            Stmt::Init(InitSpec::Ket(k)) => write!(out, "init |{}>", k.value.0).unwrap(),
            Stmt::Init(InitSpec::Mix(parts)) => {
                out.push_str("init mix");
                for (w, k) in parts {
                    write!(out, " {} |{}>", w.value, k.value.0).unwrap();
                }
            }
            Stmt::Init(InitSpec::Amps(parts)) => {
                out.push_str("init amps");
                for (a, k) in parts {
                    write!(out, " {} |{}>", format_complex(a.value), k.value.0).unwrap();
                }
            }
            Stmt::Gate(g) => gate(&mut out, g),
            Stmt::BitFlip(q, p) => write!(out, "bitflip {} {}", q.value, p.value).unwrap(),
            Stmt::PhaseFlip(q, p) => write!(out, "phaseflip {} {}", q.value, p.value).unwrap(),
            Stmt::Measure(q) => write!(out, "measure {}", q.value).unwrap(),
            Stmt::PMeasure(q) => write!(out, "pmeasure {}", q.value).unwrap(),
            Stmt::Ptrace(q) => write!(out, "ptrace {}", q.value).unwrap(),
            Stmt::TraceAll => out.push_str("trace_all"),
            Stmt::Print(PrintSpec::Probs(q)) => write!(out, "print probs {}", q.value).unwrap(),
            Stmt::Print(PrintSpec::Trace) => out.push_str("print trace"),
            Stmt::Print(PrintSpec::Nodes) => out.push_str("print nodes"),
            Stmt::AssertProb {
                qubit,
                outcome,
                value,
                tol,
            } => write!(
                out,
                "assert_prob {} {} {} {}",
                qubit.value, outcome.value, value.value, tol.value
            )
            .unwrap(),
        }
        out.push('\n');
    }
    out
}
