use num_complex::Complex64;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::ParseError;
use crate::oracle::parse_complex;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn expected(what: &str, found: &Token) -> ParseError {
    ParseError::new(found.span, format!("expected {what}, found {}", found.tok.describe()))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    /// Next token as a word satisfying `convert`, or an error naming `what`.
    fn word<T>(&mut self, what: &str, convert: impl Fn(&str) -> Option<T>) -> Result<Located<T>, ParseError> {
        let t = self.peek().clone();
        if let Tok::Word(w) = &t.tok {
            if let Some(v) = convert(w) {
                self.bump();
                return Ok(Located::new(v, t.span));
            }
        }
        Err(expected(what, &t))
    }

    fn int(&mut self, what: &str) -> Result<Located<usize>, ParseError> {
        self.word(what, |w| {
            if w.bytes().all(|b| b.is_ascii_digit()) {
                w.parse().ok()
            } else {
                None
            }
        })
    }

    fn qubit(&mut self) -> Result<Qubit, ParseError> {
        self.int("qubit index")
    }

    fn float(&mut self, what: &str) -> Result<Located<f64>, ParseError> {
        self.word(what, |w| {
            let starts_numeric = w.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.'));
            w.parse::<f64>().ok().filter(|x| starts_numeric && x.is_finite())
        })
    }

    fn complex(&mut self) -> Result<Located<Complex64>, ParseError> {
        self.word("complex amplitude", |w| {
            if !w.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.')) {
                return None;
            }
            parse_complex(w).filter(|z| z.re.is_finite() && z.im.is_finite())
        })
    }

    fn signed_qubit(&mut self) -> Result<Located<SignedQubit>, ParseError> {
        self.word("signed qubit index", |w| {
            let (positive, digits) = match w.strip_prefix('-') {
                Some(rest) => (false, rest),
                None => (true, w.strip_prefix('+').unwrap_or(w)),
            };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.parse().ok().map(|qubit| SignedQubit { qubit, positive })
        })
    }

    fn ket(&mut self) -> Result<Located<Ket>, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ket(bits) => {
                self.bump();
                Ok(Located::new(Ket(bits), t.span))
            }
            _ => Err(expected("ket such as `|01>`", &t)),
        }
    }

    fn punct(&mut self, tok: Tok) -> Result<(), ParseError> {
        let t = self.peek().clone();
        if t.tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(expected(&tok.describe(), &t))
        }
    }

    fn starts_number(&self) -> bool {
        matches!(&self.peek().tok, Tok::Word(w) if w.starts_with(|c: char| c.is_ascii_digit() || matches!(c, '-' | '+' | '.')))
    }

    fn init(&mut self) -> Result<InitSpec, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ket(_) => Ok(InitSpec::Ket(self.ket()?)),
            Tok::Word(w) if w == "mix" => {
                self.bump();
                let mut parts = vec![(self.float("weight")?, self.ket()?)];
                while self.starts_number() {
                    parts.push((self.float("weight")?, self.ket()?));
                }
                Ok(InitSpec::Mix(parts))
            }
            Tok::Word(w) if w == "amps" => {
                self.bump();
                let mut parts = vec![(self.complex()?, self.ket()?)];
                while self.starts_number() {
                    parts.push((self.complex()?, self.ket()?));
                }
                Ok(InitSpec::Amps(parts))
            }
            _ => Err(expected("ket, `mix` or `amps`", &t)),
        }
    }

    /// Gate application whose keyword is `word`, already consumed; `None`
    /// when `word` names no gate.
    fn gate(&mut self, word: &str) -> Result<Option<GateApp>, ParseError> {
        if let Some(g) = SingleGate::from_keyword(word) {
            return Ok(Some(GateApp::Single(g, self.qubit()?)));
        }
        let app = match word {
            "u1" => {
                let q = self.qubit()?;
                let mut m = [Located::new(0.0, q.span); 8];
                for slot in m.iter_mut() {
                    *slot = self.float("matrix entry")?;
                }
                GateApp::U1(q, m)
            }
            "cnot" => GateApp::Cnot(self.qubit()?, self.qubit()?),
            "toffoli" => GateApp::Toffoli(self.qubit()?, self.qubit()?, self.qubit()?),
            "swap" => GateApp::Swap(self.qubit()?, self.qubit()?),
            "cu" => {
                self.punct(Tok::LBracket)?;
                let mut controls = vec![self.signed_qubit()?];
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    controls.push(self.signed_qubit()?);
                }
                self.punct(Tok::RBracket)?;
                let t = self.bump();
                let inner = match &t.tok {
                    Tok::Word(w) => self.gate(w)?,
                    _ => None,
                };
                let inner = inner.ok_or_else(|| expected("gate name", &t))?;
                GateApp::Cu(controls, Box::new(Located::new(inner, t.span)))
            }
            _ => return Ok(None),
        };
        Ok(Some(app))
    }

    fn stmt(&mut self) -> Result<Located<Stmt>, ParseError> {
        let t = self.bump();
        let Tok::Word(word) = &t.tok else {
            return Err(expected("statement keyword", &t));
        };
        let stmt = match word.as_str() {
            "qubits" => Stmt::Qubits(self.int("qubit count")?),
            "init" => Stmt::Init(self.init()?),
            "bitflip" => Stmt::BitFlip(self.qubit()?, self.float("probability")?),
            "phaseflip" => Stmt::PhaseFlip(self.qubit()?, self.float("probability")?),
            "measure" => Stmt::Measure(self.qubit()?),
            "pmeasure" => Stmt::PMeasure(self.qubit()?),
            "ptrace" => Stmt::Ptrace(self.qubit()?),
            "trace_all" => Stmt::TraceAll,
            "print" => {
                let what = self.word("`probs`, `trace` or `nodes`", |w| {
                    matches!(w, "probs" | "trace" | "nodes").then(|| w.to_string())
                })?;
                match what.value.as_str() {
                    "probs" => Stmt::Print(PrintSpec::Probs(self.qubit()?)),
                    "trace" => Stmt::Print(PrintSpec::Trace),
                    _ => Stmt::Print(PrintSpec::Nodes),
                }
            }
            "assert_prob" => Stmt::AssertProb {
                qubit: self.qubit()?,
                outcome: self.int("outcome bit")?,
                value: self.float("probability")?,
                tol: self.float("tolerance")?,
            },
            other => match self.gate(other)? {
                Some(g) => Stmt::Gate(g),
                None => return Err(expected("statement keyword", &t)),
            },
        };
        Ok(Located::new(stmt, t.span))
    }
}

/// Parses a `.qpd` script.
pub fn parse(src: &str) -> Result<Script, ParseError> {
    let mut p = Parser { toks: lex(src)?, pos: 0 };
    let mut stmts = Vec::new();
    loop {
        match p.peek().tok {
            Tok::Eof => break,
            Tok::Newline => {
                p.bump();
            }
            _ => {
                stmts.push(p.stmt()?);
                let t = p.peek().clone();
                match t.tok {
                    Tok::Newline | Tok::Eof => {}
                    _ => return Err(expected("end of line", &t)),
                }
            }
        }
    }
    Ok(Script { stmts })
}
