mod common;

use std::path::Path;

use num_complex::Complex64;
use proptest::prelude::*;
use quidd::bench::basis_index;
use quidd::circuit::{run, run_with, Gate, Operation, RunOptions, XorShift64Star};
use quidd::lang::compile;
use quidd::oracle::{dense_run, DenseSimulator};
use quidd::{Circuit, DdManager, DenseMatrix, InitialState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_stay_physical(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=5);
        let c = random_circuit(&mut rng, n, 20);
        let r = run(&c).unwrap();
        let d = r.manager.to_dense(&r.rho).unwrap();
        prop_assert!((d.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        prop_assert!(d.is_hermitian(1e-9));
        prop_assert!(d.is_psd(1e-9));
    }

    #[test]
    fn permutation_gates_keep_basis_states(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(3..=8);
        let start = rng.gen_range(0..1usize << n);
        let mut c = Circuit::new(n).with_initial(InitialState::Basis(start));
        let mut expected = start;
        let bit = |q: usize| 1usize << (n - 1 - q);
        for _ in 0..25 {
            let w: Vec<usize> = rand::seq::index::sample(&mut rng, n, 3).into_vec();
            match rng.gen_range(0..4) {
                0 => {
                    c.gate(Gate::x(w[0]));
                    expected ^= bit(w[0]);
                }
                1 => {
                    c.gate(Gate::cnot(w[0], w[1]).unwrap());
                    if expected & bit(w[0]) != 0 {
                        expected ^= bit(w[1]);
                    }
                }
                2 => {
                    c.gate(Gate::toffoli(w[0], w[1], w[2]).unwrap());
                    if expected & bit(w[0]) != 0 && expected & bit(w[1]) != 0 {
                        expected ^= bit(w[2]);
                    }
                }
                _ => {
                    c.gate(Gate::swap(w[0], w[1]).unwrap());
                    let (a, b) = (expected & bit(w[0]) != 0, expected & bit(w[1]) != 0);
                    if a != b {
                        expected ^= bit(w[0]) | bit(w[1]);
                    }
                }
            }
        }
        let mut r = run(&c).unwrap();
        prop_assert_eq!(basis_index(&mut r.manager, &r.rho), Some(expected));
        prop_assert_eq!(r.manager.quidd_nodes(&r.rho), 2 * n + 2);
    }

    #[test]
    fn channels_preserve_trace(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let rho = random_mixed_state(&mut rng, n);
        let mut m = DdManager::new(n);
        let q = m.from_dense(&rho).unwrap();
        for _ in 0..5 {
            let ch = random_channel(&mut rng, n);
            let out = m.apply_channel(&q, &ch).unwrap();
            let d = m.to_dense(&out).unwrap();
            prop_assert!((d.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            prop_assert!(d.is_psd(1e-9));
        }
    }

    #[test]
    fn measurement_is_consistent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=4);
        let rho = random_mixed_state(&mut rng, n);
        let mut m = DdManager::new(n);
        let q = m.from_dense(&rho).unwrap();
        let qubit = rng.gen_range(0..n);
        let (p0, p1) = m.measure_prob(&q, qubit).unwrap();
        let mask = 1usize << (n - 1 - qubit);
        let diag1: f64 = (0..rho.dim()).filter(|i| i & mask != 0).map(|i| rho.get(i, i).re).sum();
        prop_assert!((p1 - diag1).abs() < 1e-9);
        prop_assert!((p0 + p1 - 1.0).abs() < 1e-9);

        let mixed = m.measure_nonselective(&q, qubit).unwrap();
        let mut recombined = DenseMatrix::zeros(n);
        for (outcome, p) in [(0u8, p0), (1, p1)] {
            if p > 1e-9 {
                let post = m.collapse(&q, qubit, outcome).unwrap();
                let post = m.to_dense(&post).unwrap();
                prop_assert!((post.trace().re - 1.0).abs() < 1e-9);
                recombined = recombined.add(&post.scale(Complex64::new(p, 0.0))).unwrap();
            }
        }
        prop_assert!(m.to_dense(&mixed).unwrap().max_abs_diff(&recombined) < 1e-9);
    }
}

#[test]
fn sampled_outcomes_follow_the_born_rule() {
    // cos²(θ/2) = 0.7 on |0⟩.
    let theta = 2.0 * 0.7f64.sqrt().acos();
    let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let ry = [c(cs, 0.0), c(-sn, 0.0), c(sn, 0.0), c(cs, 0.0)];
    let mut circuit = Circuit::new(2);
    circuit.gate(Gate::u1(1, ry).unwrap());
    let r = run(&circuit).unwrap();
    let mut m = r.manager;
    let mut rng = XorShift64Star::new(2024);
    let draws = 10_000;
    let mut ones = 0;
    for _ in 0..draws {
        let (outcome, post, (_, p1)) = m.sample_measure(&r.rho, 1, &mut rng).unwrap();
        assert!((p1 - 0.3).abs() < 1e-9);
        if outcome == 1 {
            ones += 1;
            assert!((m.measure_prob(&post, 1).unwrap().1 - 1.0).abs() < 1e-9);
        }
    }
    let freq = ones as f64 / draws as f64;
    let sigma = (0.3f64 * 0.7 / draws as f64).sqrt();
    assert!((freq - 0.3).abs() < 4.0 * sigma, "frequency {freq}");
}

#[test]
fn seed_sweep_samples_plus_state_evenly() {
    let mut circuit = Circuit::new(1);
    circuit.gate(Gate::h(0));
    let r = run(&circuit).unwrap();
    let mut m = r.manager;
    let ones = (0..10_000u64)
        .filter(|&seed| m.sample_measure(&r.rho, 0, &mut XorShift64Star::new(seed)).unwrap().0 == 1)
        .count();
    let freq = ones as f64 / 10_000.0;
    assert!((0.48..=0.52).contains(&freq), "frequency {freq}");
}

#[test]
fn golden_scripts_agree_on_both_engines() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scripts");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|x| x != "qpd") {
            continue;
        }
        let src = std::fs::read_to_string(&path).unwrap();
        let circuit = compile(&src).unwrap().circuit;
        let opts = RunOptions {
            seed: 7,
            ..RunOptions::default()
        };
        let q = run_with(&circuit, &opts).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let d = DenseSimulator::new(11, 7).run(&circuit).unwrap();
        let got = q.manager.to_dense(&q.rho).unwrap();
        assert!(got.max_abs_diff(&d.rho) < 1e-9, "{}", path.display());
        let outcomes = |recs: &[quidd::circuit::MeasurementRecord]| recs.iter().map(|r| r.outcome).collect::<Vec<_>>();
        assert_eq!(outcomes(&q.records), outcomes(&d.records), "{}", path.display());
        count += 1;
    }
    assert!(count >= 15);
}

#[test]
fn measurement_records_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = rng.gen_range(1..=4);
        let mut c = random_circuit(&mut rng, n, 10);
        c.push(Operation::Measure { qubit: 0 });
        let q = run(&c).unwrap();
        let d = dense_run(&c).unwrap();
        assert_eq!(q.records.len(), d.records.len());
        for (a, b) in q.records.iter().zip(&d.records) {
            assert!((a.p0 - b.p0).abs() < 1e-9 && (a.p1 - b.p1).abs() < 1e-9);
        }
    }
}
