//! Execution loop over a validated circuit.

use std::time::Instant;

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::Serialize;

use super::gate::GateKey;
use super::{
    Circuit, CircuitError, MeasurementRecord, Operation, PrintKind, PrintRecord, PrintValue, StepError,
    XorShift64Star,
};
use crate::dd::{DdManager, Edge, Rounding, NODE_BYTES};
use crate::linalg::Quidd;

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Seed for sampled measurements.
    pub seed: u64,
    /// Reuse operator diagrams for repeated multi-target gates.
    pub operator_cache: bool,
    /// Arena size above which unreachable nodes are collected between steps.
    pub gc_threshold: usize,
    pub rounding: Rounding,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            seed: 0,
            operator_cache: true,
            gc_threshold: 1 << 21,
            rounding: Rounding::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepStat {
    pub index: usize,
    pub op: String,
    /// Nodes in ρ after the step.
    pub nodes: usize,
    /// Distinct nodes live after the step: the output state plus any
    /// operator diagrams the step used.
    pub live_nodes: usize,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub n_qubits: usize,
    pub engine: String,
    pub gates: usize,
    pub steps: Vec<StepStat>,
    /// Maximum of `live_nodes` over the run (and the initial state).
    pub peak_nodes: usize,
    pub peak_bytes: usize,
    /// Arena high-water mark, including garbage awaiting collection.
    pub arena_peak: usize,
    pub wall_ms: f64,
}

pub struct RunResult {
    pub manager: DdManager,
    pub rho: Quidd,
    pub records: Vec<MeasurementRecord>,
    pub prints: Vec<PrintRecord>,
    pub stats: RunStats,
}

impl std::fmt::Debug for RunResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunResult")
            .field("rho", &self.rho)
            .field("records", &self.records)
            .field("stats", &self.stats)
            .finish()
    }
}

pub fn run(c: &Circuit) -> Result<RunResult, StepError> {
    run_with(c, &RunOptions::default())
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Validates `c`, then applies its operations in order. Nothing runs if
/// validation fails.
pub fn run_with(c: &Circuit, opts: &RunOptions) -> Result<RunResult, StepError> {
    c.validate()?;
    let start = Instant::now();
    let mut m = DdManager::with_rounding(c.n_qubits, opts.rounding);
    let at = |step: usize| move |source: CircuitError| StepError { step, source };
    let mut rho = m.initial_density(c.n_qubits, &c.initial).map_err(at(0))?;
    let mut ops_cache: FxHashMap<(GateKey, usize), (Edge, Edge)> = FxHashMap::default();
    let mut rng = XorShift64Star::new(opts.seed);
    let mut records = Vec::new();
    let mut prints = Vec::new();
    let mut steps = Vec::with_capacity(c.ops.len());
    let mut peak = m.quidd_nodes(&rho);

    for (index, op) in c.ops.iter().enumerate() {
        let t0 = Instant::now();
        let n = rho.n_qubits;
        let mut extra: Vec<Edge> = Vec::new();
        let next = match op {
            Operation::Gate(g) if g.targets.len() == 1 => m.apply_gate(&rho, g).map_err(at(index))?,
            Operation::Gate(g) => {
                let key = (g.cache_key(), n);
                let (u, u_dag) = match ops_cache.get(&key) {
                    Some(&(u, d)) => (Quidd::matrix(u, n), Quidd::matrix(d, n)),
                    None => {
                        let u = m.build_operator(g, n).map_err(at(index))?;
                        let d = m.conj_transpose(&u).map_err(|e| at(index)(e.into()))?;
                        if opts.operator_cache {
                            ops_cache.insert(key, (u.root, d.root));
                        }
                        (u, d)
                    }
                };
                extra.extend([u.root, u_dag.root]);
                m.conjugate_by(&rho, &u, &u_dag).map_err(at(index))?
            }
            Operation::Channel(ch) => m.apply_channel(&rho, ch).map_err(at(index))?,
            Operation::Measure { qubit } => {
                let (p0, p1) = m.measure_prob(&rho, *qubit).map_err(at(index))?;
                records.push(MeasurementRecord {
                    step: index,
                    qubit: *qubit,
                    outcome: None,
                    p0,
                    p1,
                });
                m.measure_nonselective(&rho, *qubit).map_err(at(index))?
            }
            Operation::SampleMeasure { qubit } => {
                let (outcome, next, (p0, p1)) = m.sample_measure(&rho, *qubit, &mut rng).map_err(at(index))?;
                records.push(MeasurementRecord {
                    step: index,
                    qubit: *qubit,
                    outcome: Some(outcome),
                    p0,
                    p1,
                });
                next
            }
            Operation::Collapse { qubit, outcome } => {
                let (p0, p1) = m.measure_prob(&rho, *qubit).map_err(at(index))?;
                records.push(MeasurementRecord {
                    step: index,
                    qubit: *qubit,
                    outcome: Some(*outcome),
                    p0,
                    p1,
                });
                m.collapse(&rho, *qubit, *outcome).map_err(at(index))?
            }
            Operation::Probe { qubit } => {
                let (p0, p1) = m.measure_prob(&rho, *qubit).map_err(at(index))?;
                records.push(MeasurementRecord {
                    step: index,
                    qubit: *qubit,
                    outcome: None,
                    p0,
                    p1,
                });
                rho
            }
            Operation::PartialTrace { qubit } => {
                m.partial_trace(&rho, *qubit).map_err(|e| at(index)(e.into()))?
            }
            Operation::TraceAll => {
                let all: Vec<usize> = (0..n).collect();
                m.partial_trace_many(&rho, &all).map_err(|e| at(index)(e.into()))?
            }
            Operation::Print(kind) => {
                let value = match *kind {
                    PrintKind::Probs(qubit) => {
                        let (p0, p1) = m.measure_prob(&rho, qubit).map_err(at(index))?;
                        PrintValue::Probs { qubit, p0, p1 }
                    }
                    PrintKind::Trace => {
                        let t: Complex64 = m.trace(&rho).map_err(|e| at(index)(e.into()))?;
                        PrintValue::Trace { re: t.re, im: t.im }
                    }
                    PrintKind::Nodes => PrintValue::Nodes {
                        count: m.quidd_nodes(&rho),
                    },
                };
                prints.push(PrintRecord { step: index, value });
                rho
            }
            Operation::AssertProb {
                qubit,
                outcome,
                value,
                tol,
            } => {
                let (p0, p1) = m.measure_prob(&rho, *qubit).map_err(at(index))?;
                let actual = if *outcome == 0 { p0 } else { p1 };
                if (actual - value).abs() > *tol {
                    return Err(at(index)(CircuitError::AssertionFailed {
                        qubit: *qubit,
                        outcome: *outcome,
                        actual,
                        expected: *value,
                        tol: *tol,
                    }));
                }
                rho
            }
        };
        let mut roots = vec![next.root];
        roots.extend(extra);
        let live = m.count_nodes_many(&roots);
        peak = peak.max(live);
        rho = next;
        steps.push(StepStat {
            index,
            op: op.label(),
            nodes: m.quidd_nodes(&rho),
            live_nodes: live,
            wall_ms: ms(t0),
        });

        if m.node_count() > opts.gc_threshold {
            let mut keep = vec![rho.root];
            let entries: Vec<_> = ops_cache.drain().collect();
            keep.extend(entries.iter().flat_map(|(_, (u, d))| [*u, *d]));
            let moved = m.collect_garbage(&keep);
            rho.root = moved[0];
            for (i, (key, _)) in entries.into_iter().enumerate() {
                ops_cache.insert(key, (moved[1 + 2 * i], moved[2 + 2 * i]));
            }
        }
    }

    let stats = RunStats {
        n_qubits: c.n_qubits,
        engine: "quidd".into(),
        gates: c.gate_count(),
        steps,
        peak_nodes: peak,
        peak_bytes: peak * NODE_BYTES,
        arena_peak: m.peak_node_count(),
        wall_ms: ms(start),
    };
    Ok(RunResult {
        manager: m,
        rho,
        records,
        prints,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Gate, InitialState};

    #[test]
    fn empty_circuit_keeps_initial_projector() {
        let c = Circuit::new(3);
        let mut r = run(&c).unwrap();
        assert!((r.manager.trace(&r.rho).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let d = r.manager.to_dense(&r.rho).unwrap();
        assert_eq!(d.get(0, 0), Complex64::new(1.0, 0.0));
        let expected = r.manager.initial_density(3, &InitialState::Basis(0)).unwrap();
        assert_eq!(r.rho, expected);
        assert!(r.stats.steps.is_empty());
    }

    #[test]
    fn bell_circuit_and_stats() {
        let mut c = Circuit::new(2);
        c.gate(Gate::h(0)).gate(Gate::cnot(0, 1).unwrap());
        c.push(Operation::Probe { qubit: 1 });
        let r = run(&c).unwrap();
        let d = r.manager.to_dense(&r.rho).unwrap();
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((d.get(i, j).re - 0.5).abs() < 1e-9);
        }
        assert_eq!(r.records.len(), 1);
        assert!((r.records[0].p0 - 0.5).abs() < 1e-9);
        assert_eq!(r.stats.steps.len(), 3);
        assert_eq!(r.stats.gates, 2);
        assert!(r.stats.peak_nodes >= r.stats.steps.iter().map(|s| s.nodes).max().unwrap());
    }

    #[test]
    fn failing_assertion_reports_step() {
        let mut c = Circuit::new(1);
        c.gate(Gate::h(0));
        c.push(Operation::AssertProb {
            qubit: 0,
            outcome: 1,
            value: 0.9,
            tol: 1e-6,
        });
        let err = run(&c).unwrap_err();
        assert_eq!(err.step, 1);
        assert!(matches!(err.source, CircuitError::AssertionFailed { .. }));
    }

    #[test]
    fn garbage_collection_is_transparent() {
        let mut c = Circuit::new(3);
        for q in 0..3 {
            c.gate(Gate::h(q)).gate(Gate::t(q));
        }
        c.gate(Gate::toffoli(0, 1, 2).unwrap()).gate(Gate::h(1)).gate(Gate::t(0));
        let plain = run(&c).unwrap();
        let tight = run_with(
            &c,
            &RunOptions {
                gc_threshold: 0,
                ..RunOptions::default()
            },
        )
        .unwrap();
        let a = plain.manager.to_dense(&plain.rho).unwrap();
        let b = tight.manager.to_dense(&tight.rho).unwrap();
        assert_eq!(a.max_abs_diff(&b), 0.0);
        assert_eq!(plain.stats.peak_nodes, tight.stats.peak_nodes);
    }

    #[test]
    fn sampled_runs_are_reproducible() {
        let mut c = Circuit::new(2);
        c.gate(Gate::h(0)).gate(Gate::h(1));
        c.push(Operation::SampleMeasure { qubit: 0 });
        c.push(Operation::SampleMeasure { qubit: 1 });
        let opts = RunOptions {
            seed: 99,
            ..RunOptions::default()
        };
        let a = run_with(&c, &opts).unwrap();
        let b = run_with(&c, &opts).unwrap();
        assert_eq!(a.records, b.records);
    }
}
