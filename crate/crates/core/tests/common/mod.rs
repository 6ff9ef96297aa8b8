//! Random inputs and brute-force references shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use quidd::circuit::{Channel, Control, Gate, Operation};
use quidd::{Circuit, DenseMatrix};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Haar-ish random 2×2 unitary from Euler angles.
pub fn random_unitary<R: Rng>(rng: &mut R) -> [Complex64; 4] {
    let theta = rng.gen_range(0.0..PI / 2.0);
    let (a, b, g) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    let e = |x: f64| Complex64::from_polar(1.0, x);
    let (cs, sn) = (theta.cos(), theta.sin());
    [
        e(a - b) * cs,
        -e(a - g) * sn,
        e(a + g) * sn,
        e(a + b) * cs,
    ]
}

fn distinct<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut wires: Vec<usize> = (0..n).collect();
    wires.shuffle(rng);
    wires.truncate(k);
    wires
}

/// One random gate from the full library on `n ≥ 1` wires.
pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    loop {
        let q = rng.gen_range(0..n);
        let g = match rng.gen_range(0..12) {
            0 => Gate::h(q),
            1 => Gate::x(q),
            2 => Gate::y(q),
            3 => Gate::z(q),
            4 => Gate::s(q),
            5 => Gate::t(q),
            6 => Gate::u1(q, random_unitary(rng)).unwrap(),
            7 if n >= 2 => {
                let w = distinct(rng, n, 2);
                Gate::cnot(w[0], w[1]).unwrap()
            }
            8 if n >= 2 => {
                let w = distinct(rng, n, 2);
                Gate::swap(w[0], w[1]).unwrap()
            }
            9 if n >= 3 => {
                let w = distinct(rng, n, 3);
                Gate::toffoli(w[0], w[1], w[2]).unwrap()
            }
            10 if n >= 2 => {
                let w = distinct(rng, n, 2);
                Gate::cz(w[0], w[1]).unwrap()
            }
            11 if n >= 2 => {
                let k = rng.gen_range(2..=n.min(4));
                let w = distinct(rng, n, k);
                let controls: Vec<Control> = w[1..]
                    .iter()
                    .map(|&q| Control {
                        qubit: q,
                        positive: rng.gen_bool(0.5),
                    })
                    .collect();
                let base = match rng.gen_range(0..4) {
                    0 => Gate::h(w[0]),
                    1 => Gate::s(w[0]),
                    2 => Gate::y(w[0]),
                    _ => Gate::u1(w[0], random_unitary(rng)).unwrap(),
                };
                base.controlled(&controls).unwrap()
            }
            _ => continue,
        };
        return g;
    }
}

pub fn random_channel<R: Rng>(rng: &mut R, n: usize) -> Channel {
    let q = rng.gen_range(0..n);
    let p = rng.gen_range(0.0..1.0);
    match rng.gen_range(0..4) {
        0 => Channel::bit_flip(q, p),
        1 => Channel::phase_flip(q, p),
        2 => Channel::depolarizing(q, p),
        _ => Channel::amplitude_damping(q, p),
    }
    .unwrap()
}

/// Random circuit of `depth` operations: mostly gates, some channels and
/// non-selective measurements, starting from a random basis state.
pub fn random_circuit<R: Rng>(rng: &mut R, n: usize, depth: usize) -> Circuit {
    let mut c = Circuit::new(n).with_initial(quidd::InitialState::Basis(rng.gen_range(0..1 << n)));
    for _ in 0..depth {
        let roll = rng.gen_range(0..10);
        let op = match roll {
            0 | 1 => Operation::Channel(random_channel(rng, n)),
            2 => Operation::Measure {
                qubit: rng.gen_range(0..n),
            },
            _ => Operation::Gate(random_gate(rng, n)),
        };
        c.push(op);
    }
    c
}

/// Random normalized complex vector of length `2^n`.
pub fn random_unit_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..1 << n)
        .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

/// Random mixed state: a convex mixture of a few random pure states.
pub fn random_mixed_state<R: Rng>(rng: &mut R, n: usize) -> DenseMatrix {
    let dim = 1usize << n;
    let k = rng.gen_range(1..=3);
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = DenseMatrix::zeros(n);
    for w in weights {
        let v = random_unit_vector(rng, n);
        for i in 0..dim {
            for j in 0..dim {
                let cur = rho.get(i, j);
                rho.set(i, j, cur + v[i] * v[j].conj() * (w / total));
            }
        }
    }
    rho
}

/// Partial trace by direct index arithmetic, wire 0 most significant.
pub fn brute_ptrace(rho: &DenseMatrix, qubit: usize) -> DenseMatrix {
    let n = rho.n_qubits();
    let low = n - 1 - qubit;
    let expand = |i: usize, b: usize| {
        let hi = (i >> low) << (low + 1);
        let lo = i & ((1 << low) - 1);
        hi | (b << low) | lo
    };
    DenseMatrix::from_fn(n - 1, |i, j| (0..2).map(|b| rho.get(expand(i, b), expand(j, b))).sum())
}
