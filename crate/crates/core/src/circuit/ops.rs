//! Gate, channel and measurement primitives on density-matrix QuIDDs.

use num_complex::Complex64;

use super::gate::Control;
use super::{Channel, CircuitError, Gate, InitialState, XorShift64Star};
use crate::dd::{BinaryOp, DdManager};
use crate::linalg::{Mat2, Quidd, ScalarOp};

/// Outcomes with probability at or below this cannot be collapsed onto.
pub const PROBABILITY_TOL: f64 = 1e-12;

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const EYE: Mat2 = [[ONE, ZERO], [ZERO, ONE]];
const ALL_ONES: Mat2 = [[ONE, ONE], [ONE, ONE]];

fn unit(row: usize, col: usize) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    m[row][col] = ONE;
    m
}

fn check_range(qubits: impl IntoIterator<Item = usize>, n: usize) -> Result<(), CircuitError> {
    for qubit in qubits {
        if qubit >= n {
            return Err(CircuitError::QubitRange { qubit, n });
        }
    }
    Ok(())
}

impl DdManager {
    /// `payload` on `targets`, identity elsewhere, active only where every
    /// control reads its polarity.
    pub(crate) fn local_operator(
        &mut self,
        n: usize,
        targets: &[usize],
        controls: &[Control],
        payload: &[Complex64],
    ) -> Result<Quidd, CircuitError> {
        check_range(targets.iter().copied().chain(controls.iter().map(|c| c.qubit)), n)?;
        let k = targets.len();
        let dim = 1usize << k;
        let embedded = if k == 1 {
            let mut factors = vec![EYE; n];
            factors[targets[0]] = [[payload[0], payload[1]], [payload[2], payload[3]]];
            self.kron_wires(&factors)?
        } else {
            // Σ_ab payload[a][b] |a⟩⟨b| on the targets, one tensor term each.
            let mut acc = Quidd::matrix(self.zero(), n);
            for a in 0..dim {
                for b in 0..dim {
                    let v = payload[a * dim + b];
                    if v == ZERO {
                        continue;
                    }
                    let mut factors = vec![EYE; n];
                    for (j, &t) in targets.iter().enumerate() {
                        let shift = k - 1 - j;
                        factors[t] = unit((a >> shift) & 1, (b >> shift) & 1);
                    }
                    let term = self.kron_wires(&factors)?;
                    let term = self.scalar_op(&term, v, ScalarOp::Multiply)?;
                    acc = self.add(&acc, &term)?;
                }
            }
            acc
        };
        if controls.is_empty() {
            return Ok(embedded);
        }
        let mut mask = vec![ALL_ONES; n];
        let mut proj = vec![EYE; n];
        for c in controls {
            let b = c.positive as usize;
            mask[c.qubit] = unit(b, b);
            proj[c.qubit] = unit(b, b);
        }
        let mask = self.kron_wires(&mask)?;
        let proj = self.kron_wires(&proj)?;
        let eye = self.identity(n)?;
        let active = self.apply(mask.root, embedded.root, BinaryOp::MUL);
        let idle = self.sub(&eye, &proj)?;
        Ok(self.add(&Quidd::matrix(active, n), &idle)?)
    }

    /// The full `n`-qubit unitary of `g`.
    pub fn build_operator(&mut self, g: &Gate, n: usize) -> Result<Quidd, CircuitError> {
        self.local_operator(n, &g.targets, &g.controls, &g.payload)
    }

    /// `U ρ U†`. Single-target gates are applied blockwise without building
    /// the full operator.
    pub fn apply_gate(&mut self, rho: &Quidd, g: &Gate) -> Result<Quidd, CircuitError> {
        if let [t] = g.targets[..] {
            let p = &g.payload;
            return self.conjugate_local(rho, t, &g.controls, [p[0], p[1], p[2], p[3]]);
        }
        let u = self.build_operator(g, rho.n_qubits)?;
        let u_dag = self.conj_transpose(&u)?;
        self.conjugate_by(rho, &u, &u_dag)
    }

    /// `U ρ U†` for a prebuilt operator and its adjoint.
    pub fn conjugate_by(&mut self, rho: &Quidd, u: &Quidd, u_dag: &Quidd) -> Result<Quidd, CircuitError> {
        let left = self.matrix_multiply(u, rho)?;
        Ok(self.matrix_multiply(&left, u_dag)?)
    }

    /// Operator-sum application `Σ w K ρ K†`.
    pub fn apply_channel(&mut self, rho: &Quidd, ch: &Channel) -> Result<Quidd, CircuitError> {
        let n = rho.n_qubits;
        check_range(ch.targets.iter().copied(), n)?;
        let mut acc: Option<Quidd> = None;
        for term in ch.terms() {
            let image = match &term.operator {
                None => *rho,
                Some(k) if ch.targets.len() == 1 => self.conjugate_local(rho, ch.targets[0], &[], [k[0], k[1], k[2], k[3]])?,
                Some(k) => {
                    let op = self.local_operator(n, &ch.targets, &[], k)?;
                    let op_dag = self.conj_transpose(&op)?;
                    self.conjugate_by(rho, &op, &op_dag)?
                }
            };
            let weighted = self.scalar_op(&image, Complex64::new(term.weight, 0.0), ScalarOp::Multiply)?;
            acc = Some(match acc {
                None => weighted,
                Some(a) => self.add(&a, &weighted)?,
            });
        }
        Ok(acc.unwrap_or(Quidd::matrix(self.zero(), n)))
    }

    /// Elementwise mask selecting entries whose row and column both have
    /// `qubit = outcome`.
    fn outcome_mask(&mut self, n: usize, qubit: usize, outcome: u8) -> Result<Quidd, CircuitError> {
        let mut factors = vec![ALL_ONES; n];
        factors[qubit] = unit(outcome as usize, outcome as usize);
        Ok(self.kron_wires(&factors)?)
    }

    /// `P_b ρ P_b` (unnormalized).
    fn project(&mut self, rho: &Quidd, qubit: usize, outcome: u8) -> Result<Quidd, CircuitError> {
        check_range([qubit], rho.n_qubits)?;
        let mask = self.outcome_mask(rho.n_qubits, qubit, outcome)?;
        let root = self.apply(rho.root, mask.root, BinaryOp::MUL);
        Ok(Quidd::matrix(root, rho.n_qubits))
    }

    /// `(tr(P_0 ρ), tr(P_1 ρ))`.
    pub fn measure_prob(&mut self, rho: &Quidd, qubit: usize) -> Result<(f64, f64), CircuitError> {
        let p0 = self.project(rho, qubit, 0)?;
        let p1 = self.project(rho, qubit, 1)?;
        Ok((self.trace(&p0)?.re, self.trace(&p1)?.re))
    }

    /// `P ρ P / p` for the chosen outcome.
    pub fn collapse(&mut self, rho: &Quidd, qubit: usize, outcome: u8) -> Result<Quidd, CircuitError> {
        let projected = self.project(rho, qubit, outcome)?;
        let p = self.trace(&projected)?.re;
        if p <= PROBABILITY_TOL {
            return Err(CircuitError::ZeroProbability { qubit, outcome, p });
        }
        Ok(self.scalar_op(&projected, Complex64::new(p, 0.0), ScalarOp::Divide)?)
    }

    /// Draws an outcome from the generator and collapses onto it.
    pub fn sample_measure(
        &mut self,
        rho: &Quidd,
        qubit: usize,
        rng: &mut XorShift64Star,
    ) -> Result<(u8, Quidd, (f64, f64)), CircuitError> {
        let (p0, p1) = self.measure_prob(rho, qubit)?;
        let outcome = sample_outcome(p0, p1, rng);
        Ok((outcome, self.collapse(rho, qubit, outcome)?, (p0, p1)))
    }

    /// `Σ_b P_b ρ P_b`.
    pub fn measure_nonselective(&mut self, rho: &Quidd, qubit: usize) -> Result<Quidd, CircuitError> {
        let a = self.project(rho, qubit, 0)?;
        let b = self.project(rho, qubit, 1)?;
        Ok(self.add(&a, &b)?)
    }

    /// Density matrix of an initial state, built with outer products.
    pub fn initial_density(&mut self, n: usize, init: &InitialState) -> Result<Quidd, CircuitError> {
        match init {
            InitialState::Basis(i) => {
                let v = self.basis_vector(n, *i)?;
                Ok(self.outer_product(&v)?)
            }
            InitialState::Amplitudes(amps) => {
                let norm = amps.iter().map(|(a, _)| a.norm_sqr()).sum::<f64>().sqrt();
                let mut v = Quidd::vector(self.zero(), n);
                for (a, i) in amps {
                    let ket = self.basis_vector(n, *i)?;
                    let term = self.scalar_op(&ket, a / norm, ScalarOp::Multiply)?;
                    v = self.add(&v, &term)?;
                }
                Ok(self.outer_product(&v)?)
            }
            InitialState::Mixture(parts) => {
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                let mut rho = Quidd::matrix(self.zero(), n);
                for (w, i) in parts {
                    let ket = self.basis_vector(n, *i)?;
                    let proj = self.outer_product(&ket)?;
                    let term = self.scalar_op(&proj, Complex64::new(w / total, 0.0), ScalarOp::Multiply)?;
                    rho = self.add(&rho, &term)?;
                }
                Ok(rho)
            }
        }
    }
}

/// Outcome 0 when the draw falls below `p0`; never picks an outcome whose
/// probability is at or below [`PROBABILITY_TOL`].
pub(crate) fn sample_outcome(p0: f64, p1: f64, rng: &mut XorShift64Star) -> u8 {
    let u = rng.next_f64() * (p0 + p1);
    let outcome = if u < p0 { 0 } else { 1 };
    match outcome {
        0 if p0 <= PROBABILITY_TOL => 1,
        1 if p1 <= PROBABILITY_TOL => 0,
        o => o,
    }
}
