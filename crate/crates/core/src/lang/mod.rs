//! The `.qpd` circuit description language.
//!
//! ```text
//! script  = { [stmt] [comment] NEWLINE }
//! stmt    = "qubits" INT
//!         | "init" ket | "init" "mix" FLOAT ket {FLOAT ket}
//!         | "init" "amps" COMPLEX ket {COMPLEX ket}
//!         | gate
//!         | "bitflip" INT FLOAT | "phaseflip" INT FLOAT
//!         | "measure" INT | "pmeasure" INT | "ptrace" INT | "trace_all"
//!         | "print" ( "probs" INT | "trace" | "nodes" )
//!         | "assert_prob" INT INT FLOAT FLOAT
//! gate    = ("h" | "x" | "y" | "z" | "s" | "t") INT
//!         | "u1" INT FLOAT{8}                  (re im of a b c d, row-major)
//!         | "cnot" INT INT | "toffoli" INT INT INT | "swap" INT INT
//!         | "cu" "[" SIGNED {"," SIGNED} "]" gate
//! ket     = "|" {"0" | "1"} (">" | "⟩")
//! comment = "#" { any character except NEWLINE }
//! ```
//!
//! `SIGNED` is an index with an optional sign; `-q` is a control that fires
//! on |0⟩. `COMPLEX` is `re`, `imi` or `re±imi`. Kets list wire 0 first.
//! `measure` is non-selective, `pmeasure` samples an outcome with the run's
//! seed. After `ptrace q`, wires above `q` are renumbered down by one.

mod ast;
mod interp;
mod lexer;
mod parser;
mod printer;

use thiserror::Error;

pub use ast::*;
pub use interp::{interpret, lower, Lowered};
pub use parser::parse;
pub use printer::pretty_print;

/// Lexical or syntactic error.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct ParseError {
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            span,
            message: message.into(),
        }
    }
}

/// Semantic error found while lowering a parsed script.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{span}: {message}")]
pub struct ValidationError {
    pub span: Span,
    pub message: String,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LangError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("validation error: {0}")]
    Validation(#[from] ValidationError),
}

impl LangError {
    pub fn span(&self) -> Span {
        match self {
            LangError::Parse(e) => e.span,
            LangError::Validation(e) => e.span,
        }
    }
}

/// Parses and lowers `src` in one step.
pub fn compile(src: &str) -> Result<Lowered, LangError> {
    let script = parse(src)?;
    Ok(lower(&script)?)
}
