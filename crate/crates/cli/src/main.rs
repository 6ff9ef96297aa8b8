use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quidd::bench::{rows_to_csv, scaling_harness, Engine, Family};
use quidd::circuit::{run_with, MeasurementRecord, PrintRecord, RunOptions, RunStats};
use quidd::lang::compile;
use quidd::oracle::{DenseMatrix, DenseSimulator, OracleError, DEFAULT_CAP};
use quidd::{DdManager, Quidd};
use serde::Serialize;

/// Tolerance for `--check`.
const CHECK_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "quidd", version, about = "Density-matrix quantum circuit simulation on decision diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a .qpd script.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "quidd")]
        engine: Engine,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write run statistics as JSON.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Also run the other engine and compare final states.
        #[arg(long)]
        check: bool,
        /// Write the final density matrix diagram as Graphviz DOT.
        #[arg(long)]
        dump_dot: Option<PathBuf>,
        /// Qubit cap for the dense engine.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Run a benchmark family and report CSV (or JSON for a .json --out).
    Bench {
        family: Family,
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
        #[arg(long, default_value = "quidd")]
        engine: Engine,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

/// Error reported on stderr with its category prefix.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn script(prefix: &str, detail: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: format!("{prefix}: {detail}"),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::script("io error", format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct StatsFile<'a> {
    schema: u32,
    seed: u64,
    #[serde(flatten)]
    stats: &'a RunStats,
}

struct Outcome {
    rho: DenseOrQuidd,
    records: Vec<MeasurementRecord>,
    prints: Vec<PrintRecord>,
    stats: RunStats,
}

enum DenseOrQuidd {
    Quidd(Box<DdManager>, Quidd),
    Dense(DenseMatrix),
}

impl DenseOrQuidd {
    fn to_dense(&self, cap: usize) -> Option<DenseMatrix> {
        match self {
            DenseOrQuidd::Quidd(m, q) => m.to_dense_capped(q, cap).ok(),
            DenseOrQuidd::Dense(d) => Some(d.clone()),
        }
    }
}

fn execute(
    circuit: &quidd::Circuit,
    engine: Engine,
    seed: u64,
    cap: usize,
    spans: &[quidd::lang::Span],
) -> Result<Outcome, Failure> {
    let located = |step: usize, msg: String| {
        let at = spans.get(step).map(|s| format!(" (line {s})")).unwrap_or_default();
        Failure::script("runtime error", format!("step {step}{at}: {msg}"))
    };
    match engine {
        Engine::Quidd => {
            let opts = RunOptions {
                seed,
                ..RunOptions::default()
            };
            let r = run_with(circuit, &opts).map_err(|e| located(e.step, e.source.to_string()))?;
            Ok(Outcome {
                rho: DenseOrQuidd::Quidd(Box::new(r.manager), r.rho),
                records: r.records,
                prints: r.prints,
                stats: r.stats,
            })
        }
        Engine::Dense => {
            let r = DenseSimulator::new(cap, seed).run(circuit).map_err(|e| match e {
                OracleError::Step { step, message } => located(step, message),
                other => Failure::script("runtime error", other),
            })?;
            Ok(Outcome {
                rho: DenseOrQuidd::Dense(r.rho),
                records: r.records,
                prints: r.prints,
                stats: r.stats,
            })
        }
    }
}

fn print_outputs(o: &Outcome) {
    let mut lines: Vec<(usize, String)> = o
        .records
        .iter()
        .map(|r| {
            let outcome = r.outcome.map(|b| format!(" outcome={b}")).unwrap_or_default();
            (
                r.step,
                format!("measure step={} qubit={} p0={:.12} p1={:.12}{outcome}", r.step, r.qubit, r.p0, r.p1),
            )
        })
        .collect();
    lines.extend(o.prints.iter().map(|p| (p.step, p.value.to_string())));
    lines.sort_by_key(|(step, _)| *step);
    for (_, line) in lines {
        println!("{line}");
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    file: &Path,
    engine: Engine,
    seed: u64,
    stats: Option<&Path>,
    check: bool,
    dump_dot: Option<&Path>,
    cap: usize,
) -> Result<(), Failure> {
    let src = fs::read_to_string(file).map_err(|e| io_err(file, e))?;
    let lowered = compile(&src).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let circuit = &lowered.circuit;
    let outcome = execute(circuit, engine, seed, cap, &lowered.op_spans)?;
    print_outputs(&outcome);

    if let Some(path) = stats {
        let file = StatsFile {
            schema: 1,
            seed,
            stats: &outcome.stats,
        };
        let json = serde_json::to_string_pretty(&file).expect("stats serialize");
        write_file(path, &(json + "\n"))?;
    }
    if let Some(path) = dump_dot {
        let dot = match &outcome.rho {
            DenseOrQuidd::Quidd(m, q) => m.to_dot(&[("rho", q.root)]),
            DenseOrQuidd::Dense(d) => {
                let mut m = DdManager::new(d.n_qubits());
                let q = m
                    .from_dense(d)
                    .map_err(|e| Failure::script("runtime error", e))?;
                m.to_dot(&[("rho", q.root)])
            }
        };
        write_file(path, &dot)?;
    }
    if check {
        let n = circuit.widths().into_iter().max().unwrap_or(0);
        if n > cap {
            eprintln!("check skipped: {n} qubits exceeds the dense cap of {cap}");
            return Ok(());
        }
        let other = match engine {
            Engine::Quidd => Engine::Dense,
            Engine::Dense => Engine::Quidd,
        };
        let second = execute(circuit, other, seed, cap, &lowered.op_spans)?;
        let (a, b) = (outcome.rho.to_dense(cap), second.rho.to_dense(cap));
        let diff = match (a, b) {
            (Some(a), Some(b)) if a.dim() == b.dim() => a.max_abs_diff(&b),
            _ => f64::INFINITY,
        };
        if diff > CHECK_TOL {
            return Err(Failure {
                code: 2,
                message: format!("check failed: engines diverge by {diff:e} (tolerance {CHECK_TOL:e})"),
            });
        }
        eprintln!("check passed: max |Δ| = {diff:e}");
    }
    Ok(())
}

fn cmd_bench(
    family: Family,
    n_min: usize,
    n_max: usize,
    engine: Engine,
    out: Option<&Path>,
    cap: usize,
) -> Result<(), Failure> {
    if n_min > n_max {
        return Err(Failure::script("validation error", format!("--n-min {n_min} exceeds --n-max {n_max}")));
    }
    let rows = scaling_harness(family, n_min..=n_max, engine, cap)
        .map_err(|e| Failure::script("runtime error", e))?;
    let csv = rows_to_csv(&rows);
    match out {
        Some(path) if path.extension().is_some_and(|e| e == "json") => {
            let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
            write_file(path, &(json + "\n"))?;
        }
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(bad) = rows.iter().find(|r| r.verified == Some(false)) {
        eprintln!("warning: {} did not match its expected output", bad.label);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            file,
            engine,
            seed,
            stats,
            check,
            dump_dot,
            cap,
        } => cmd_run(file, *engine, *seed, stats.as_deref(), *check, dump_dot.as_deref(), *cap),
        Command::Bench {
            family,
            n_min,
            n_max,
            engine,
            out,
            cap,
        } => cmd_bench(*family, *n_min, *n_max, *engine, out.as_deref(), *cap),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
