use num_complex::Complex64;

/// 1-based source position.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl std::fmt::Display for Span {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A value with the position of its first character. Equality ignores the
/// position, so reformatted scripts compare equal.
#[derive(Clone, Copy, Debug)]
pub struct Located<T> {
    pub value: T,
    pub span: Span,
}

impl<T: PartialEq> PartialEq for Located<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Eq> Eq for Located<T> {}

impl<T> Located<T> {
    pub fn new(value: T, span: Span) -> Self {
        Located { value, span }
    }
}

pub type Qubit = Located<usize>;

/// Bits of a ket, wire 0 first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ket(pub String);

impl Ket {
    pub fn width(&self) -> usize {
        self.0.len()
    }

    /// Basis index with wire 0 as the most significant bit.
    pub fn index(&self) -> usize {
        self.0.bytes().fold(0, |acc, b| (acc << 1) | (b - b'0') as usize)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Ket(Located<Ket>),
    Mix(Vec<(Located<f64>, Located<Ket>)>),
    Amps(Vec<(Located<Complex64>, Located<Ket>)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SingleGate {
    H,
    X,
    Y,
    Z,
    S,
    T,
}

impl SingleGate {
    pub fn keyword(self) -> &'static str {
        match self {
            SingleGate::H => "h",
            SingleGate::X => "x",
            SingleGate::Y => "y",
            SingleGate::Z => "z",
            SingleGate::S => "s",
            SingleGate::T => "t",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Some(match word {
            "h" => SingleGate::H,
            "x" => SingleGate::X,
            "y" => SingleGate::Y,
            "z" => SingleGate::Z,
            "s" => SingleGate::S,
            "t" => SingleGate::T,
            _ => return None,
        })
    }
}

/// A control qubit; `positive == false` is written with a leading `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SignedQubit {
    pub qubit: usize,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateApp {
    Single(SingleGate, Qubit),
    /// Row-major `[[a, b], [c, d]]` as (re, im) pairs.
    U1(Qubit, [Located<f64>; 8]),
    Cnot(Qubit, Qubit),
    Toffoli(Qubit, Qubit, Qubit),
    Swap(Qubit, Qubit),
    Cu(Vec<Located<SignedQubit>>, Box<Located<GateApp>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrintSpec {
    Probs(Qubit),
    Trace,
    Nodes,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Qubits(Located<usize>),
    Init(InitSpec),
    Gate(GateApp),
    BitFlip(Qubit, Located<f64>),
    PhaseFlip(Qubit, Located<f64>),
    Measure(Qubit),
    PMeasure(Qubit),
    Ptrace(Qubit),
    TraceAll,
    Print(PrintSpec),
    AssertProb {
        qubit: Qubit,
        outcome: Located<usize>,
        value: Located<f64>,
        tol: Located<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub stmts: Vec<Located<Stmt>>,
}
