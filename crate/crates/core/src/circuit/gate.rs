use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use num_complex::Complex64;

use super::CircuitError;

/// Tolerance for the `U†U = I` check at construction.
pub const UNITARY_TOL: f64 = 1e-9;

/// A control qubit that enables the gate when it reads `positive` (|1⟩) or
/// not `positive` (|0⟩).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub positive: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, positive: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control { qubit, positive: false }
    }
}

/// A unitary acting on `targets`, optionally controlled.
///
/// `payload` is the row-major `2^k x 2^k` matrix for the `k` targets, with the
/// first target as the most significant local index bit.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub name: String,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
    pub payload: Vec<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub(crate) fn is_unitary(payload: &[Complex64], dim: usize, tol: f64) -> bool {
    (0..dim).all(|i| {
        (0..dim).all(|j| {
            let s: Complex64 = (0..dim).map(|k| payload[k * dim + i].conj() * payload[k * dim + j]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            (s - r(want)).norm() <= tol
        })
    })
}

pub(crate) fn check_distinct(qubits: impl IntoIterator<Item = usize>) -> Result<(), CircuitError> {
    let mut seen = std::collections::BTreeSet::new();
    for q in qubits {
        if !seen.insert(q) {
            return Err(CircuitError::DuplicateQubit(q));
        }
    }
    Ok(())
}

impl Gate {
    /// Validated gate: distinct qubits, `4^k` payload entries, unitary payload.
    pub fn new(
        name: impl Into<String>,
        targets: Vec<usize>,
        controls: Vec<Control>,
        payload: Vec<Complex64>,
    ) -> Result<Gate, CircuitError> {
        let name = name.into();
        if targets.is_empty() {
            return Err(CircuitError::BadPayload {
                name,
                message: "gate has no targets".into(),
            });
        }
        check_distinct(targets.iter().copied().chain(controls.iter().map(|c| c.qubit)))?;
        let dim = 1usize << targets.len();
        if payload.len() != dim * dim {
            return Err(CircuitError::BadPayload {
                message: format!("expected {} entries, found {}", dim * dim, payload.len()),
                name,
            });
        }
        if payload.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CircuitError::BadPayload {
                name,
                message: "non-finite entry".into(),
            });
        }
        if !is_unitary(&payload, dim, UNITARY_TOL) {
            return Err(CircuitError::NonUnitary { name });
        }
        Ok(Gate {
            name,
            targets,
            controls,
            payload,
        })
    }

    fn single(name: &str, q: usize, m: [Complex64; 4]) -> Gate {
        Gate {
            name: name.into(),
            targets: vec![q],
            controls: Vec::new(),
            payload: m.to_vec(),
        }
    }

    pub fn identity(q: usize) -> Gate {
        Self::single("i", q, [r(1.0), r(0.0), r(0.0), r(1.0)])
    }

    pub fn h(q: usize) -> Gate {
        let h = FRAC_1_SQRT_2;
        Self::single("h", q, [r(h), r(h), r(h), r(-h)])
    }

    pub fn x(q: usize) -> Gate {
        Self::single("x", q, [r(0.0), r(1.0), r(1.0), r(0.0)])
    }

    pub fn y(q: usize) -> Gate {
        Self::single("y", q, [r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)])
    }

    pub fn z(q: usize) -> Gate {
        Self::single("z", q, [r(1.0), r(0.0), r(0.0), r(-1.0)])
    }

    pub fn s(q: usize) -> Gate {
        Self::single("s", q, [r(1.0), r(0.0), r(0.0), c(0.0, 1.0)])
    }

    pub fn t(q: usize) -> Gate {
        Self::single("t", q, [r(1.0), r(0.0), r(0.0), Complex64::from_polar(1.0, FRAC_PI_4)])
    }

    /// General single-qubit unitary `[[a, b], [c, d]]`.
    pub fn u1(q: usize, m: [Complex64; 4]) -> Result<Gate, CircuitError> {
        Gate::new("u1", vec![q], Vec::new(), m.to_vec())
    }

    pub fn cnot(control: usize, target: usize) -> Result<Gate, CircuitError> {
        Gate::x(target).controlled(&[Control::on(control)])
    }

    pub fn cz(control: usize, target: usize) -> Result<Gate, CircuitError> {
        Gate::z(target).controlled(&[Control::on(control)])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Result<Gate, CircuitError> {
        Gate::x(target).controlled(&[Control::on(c1), Control::on(c2)])
    }

    pub fn swap(a: usize, b: usize) -> Result<Gate, CircuitError> {
        let (o, l) = (r(0.0), r(1.0));
        #[rustfmt::skip]
        let payload = vec![
            l, o, o, o,
            o, o, l, o,
            o, l, o, o,
            o, o, o, l,
        ];
        Gate::new("swap", vec![a, b], Vec::new(), payload)
    }

    /// Adds controls with arbitrary polarities.
    pub fn controlled(mut self, controls: &[Control]) -> Result<Gate, CircuitError> {
        self.controls.extend_from_slice(controls);
        check_distinct(self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit)))?;
        Ok(self)
    }

    /// Every qubit the gate touches.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().copied().chain(self.controls.iter().map(|c| c.qubit))
    }

    /// Conjugate transpose of the payload (controls unchanged).
    pub fn inverse(&self) -> Gate {
        let dim = 1usize << self.targets.len();
        let payload = (0..dim * dim)
            .map(|i| self.payload[(i % dim) * dim + i / dim].conj())
            .collect();
        Gate {
            name: format!("{}_dg", self.name),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            payload,
        }
    }

    /// Key identifying the operator this gate builds.
    pub(crate) fn cache_key(&self) -> GateKey {
        GateKey {
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            payload: self
                .payload
                .iter()
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub(crate) struct GateKey {
    targets: Vec<usize>,
    controls: Vec<Control>,
    payload: Vec<u64>,
}
