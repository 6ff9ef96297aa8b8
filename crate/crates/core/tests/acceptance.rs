//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use quidd::bench::{
    bb84_error_rate, gen_bb84, gen_code_demo, gen_grover, grover_default_marked, grover_iterations, grover_success,
    scaling_harness, CodeKind, Engine, Family, InjectedError, DENSE_CAP,
};
use quidd::circuit::run;
use quidd::lang::{compile, parse, pretty_print};
use quidd::oracle::dense_run;
use quidd::{Circuit, DdManager, Gate, VarIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn differential() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = rng.gen_range(1..=6);
        let depth = rng.gen_range(1..=30);
        let c = random_circuit(&mut rng, n, depth);
        let q = run(&c).map_err(|e| format!("circuit {i}: quidd run failed: {e}"))?;
        let d = dense_run(&c).map_err(|e| format!("circuit {i}: dense run failed: {e}"))?;
        let got = q.manager.to_dense(&q.rho).map_err(|e| e.to_string())?;
        worst = worst.max(got.max_abs_diff(&d.rho));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && secs < 60.0,
        format!("200 circuits, max |diff| {worst:.2e} (<= 1e-9), {secs:.1}s (< 60s)"),
    )
}

fn partial_trace() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let mut worst = 0.0f64;
    let mut identity_failures = 0;
    let mut cases = 0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let rho = random_mixed_state(&mut rng, n);
        let mut m = DdManager::new(n);
        let q = m.from_dense(&rho).map_err(|e| e.to_string())?;
        for i in 0..n {
            cases += 1;
            let traced = m.partial_trace(&q, i).map_err(|e| e.to_string())?;
            let got = m.to_dense(&traced).map_err(|e| e.to_string())?;
            worst = worst.max(got.max_abs_diff(&brute_ptrace(&rho, i)));

            let hi = m.cofactor(q.root, VarIndex::row(i), true);
            let hi = m.cofactor(hi, VarIndex::col(i), true);
            let lo = m.cofactor(q.root, VarIndex::row(i), false);
            let lo = m.cofactor(lo, VarIndex::col(i), false);
            let sum = m.apply(hi, lo, quidd::dd::BinaryOp::ADD);
            let shifted = m.shift_variables(sum, VarIndex::row(i + 1), -2).map_err(|e| e.to_string())?;
            if shifted != traced.root {
                identity_failures += 1;
            }
        }
    }
    check(
        worst <= 1e-9 && identity_failures == 0,
        format!("{cases} traces, max |diff| {worst:.2e} (<= 1e-9), cofactor identity mismatches {identity_failures}"),
    )
}

fn outer_product() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let (mut worst_norm, mut worst_raw) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let n = rng.gen_range(1..=6);
        let v = random_unit_vector(&mut rng, n);
        let mut m = DdManager::new(n);
        let q = m.from_dense_vector(&v).map_err(|e| e.to_string())?;
        let rho = m.outer_product(&q).map_err(|e| e.to_string())?;
        let raw = m.outer_product_unnormalized(&q).map_err(|e| e.to_string())?;
        let t = m.trace(&rho).map_err(|e| e.to_string())?;
        let t_raw = m.trace(&raw).map_err(|e| e.to_string())?;
        worst_norm = worst_norm.max((t - Complex64::new(1.0, 0.0)).norm());
        worst_raw = worst_raw.max((t_raw - Complex64::new((1u64 << n) as f64, 0.0)).norm());
    }
    check(
        worst_norm <= 1e-9 && worst_raw <= 1e-6,
        format!("50 vectors, |tr - 1| {worst_norm:.2e} (<= 1e-9), |tr_raw - 2^n| {worst_raw:.2e} (<= 1e-6)"),
    )
}

fn compression() -> Outcome {
    let mut sizes = Vec::new();
    for n in 1..=20 {
        let mut c = Circuit::new(n);
        for q in 0..n {
            c.gate(Gate::h(q));
        }
        let r = run(&c).map_err(|e| e.to_string())?;
        sizes.push(r.manager.quidd_nodes(&r.rho));
    }
    let superposition_ok = sizes.iter().all(|&s| s == 1);

    let h = Gate::h(0).payload;
    let h: [[Complex64; 2]; 2] = [[h[0], h[1]], [h[2], h[3]]];
    let mut kron = Vec::new();
    for n in 2..=10 {
        let mut m = DdManager::new(n);
        let q = m.kron_wires(&vec![h; n]).map_err(|e| e.to_string())?;
        kron.push(m.quidd_nodes(&q) as i64);
    }
    let diffs: Vec<i64> = kron.windows(2).map(|w| w[1] - w[0]).collect();
    let linear = diffs.windows(2).all(|w| w[0] == w[1]);
    check(
        superposition_ok && linear,
        format!("H^n ρ node counts n=1..20 {sizes:?} (all 1); H^(⊗n) nodes n=2..10 {kron:?} (constant step)"),
    )
}

fn grover_scaling() -> Outcome {
    let start = Instant::now();
    let rows = scaling_harness(Family::Grover, 5..=16, Engine::Quidd, DENSE_CAP).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let peaks: Vec<usize> = rows.iter().map(|r| r.peak_nodes.unwrap_or(0)).collect();
    let mut worst = 0.0f64;
    for (i, r) in rows.iter().enumerate().skip(1) {
        if r.n >= 10 {
            worst = worst.max(peaks[i] as f64 / peaks[i - 1] as f64);
        }
    }
    let dense = scaling_harness(Family::Grover, 12..=12, Engine::Dense, DENSE_CAP).map_err(|e| e.to_string())?;
    let over_cap = dense.len() == 1 && dense[0].over_cap;
    check(
        rows.len() == 12 && worst <= 1.5 && secs < 600.0 && over_cap,
        format!(
            "peaks n=5..16 {peaks:?}, worst ratio (n>=10) {worst:.3} (<= 1.5), {secs:.1}s (< 600s), dense n=12 over cap: {over_cap}"
        ),
    )
}

fn grover_correctness() -> Outcome {
    let mut worst = 0.0f64;
    for n in 2..=13 {
        let marked = grover_default_marked(n);
        let c = gen_grover(n, marked).map_err(|e| e.to_string())?;
        let r = run(&c).map_err(|e| e.to_string())?;
        let p = r.manager.entry(&r.rho, marked, marked).re;
        worst = worst.max((p - grover_success(n, grover_iterations(n))).abs());
    }
    check(worst <= 1e-6, format!("n=2..13, max |P(marked) - closed form| {worst:.2e} (<= 1e-6)"))
}

fn adder() -> Outcome {
    let rows = scaling_harness(Family::RcAdder, 0..=0, Engine::Quidd, DENSE_CAP).map_err(|e| e.to_string())?;
    let verified = rows.iter().filter(|r| r.verified == Some(true)).count();
    let first = rows.first().and_then(|r| r.peak_nodes);
    let same_peak = rows.iter().all(|r| r.peak_nodes == first);
    check(
        rows.len() == 256 && verified == 256 && same_peak,
        format!("{} rows, {verified} verified, identical peak_nodes {same_peak} ({first:?})", rows.len()),
    )
}

fn fidelities(kind: CodeKind, error: InjectedError) -> Result<(f64, f64), String> {
    let c = gen_code_demo(kind, error).map_err(|e| e.to_string())?;
    let q = run(&c).map_err(|e| e.to_string())?;
    let fq = q.records.last().ok_or("no probe record")?.p0;
    let fd = if c.n_qubits <= DENSE_CAP {
        let d = dense_run(&c).map_err(|e| e.to_string())?;
        d.records.last().ok_or("no probe record")?.p0
    } else {
        fq
    };
    Ok((fq, fd))
}

fn error_correction() -> Outcome {
    let mut worst3 = 0.0f64;
    for i in 0..3 {
        let (fq, fd) = fidelities(CodeKind::Bitflip3, InjectedError::X(i))?;
        worst3 = worst3.max((fq - 1.0).abs()).max((fd - 1.0).abs());
    }
    let mut worst7 = 0.0f64;
    for i in 0..7 {
        for e in [InjectedError::X(i), InjectedError::Z(i)] {
            let (fq, _) = fidelities(CodeKind::Steane7, e)?;
            worst7 = worst7.max((fq - 1.0).abs());
        }
    }
    check(
        worst3 <= 1e-9 && worst7 <= 1e-6,
        format!("bitflip3 |F - 1| {worst3:.2e} (<= 1e-9, both engines), steane7 |F - 1| {worst7:.2e} (<= 1e-6)"),
    )
}

fn bb84() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (eve, expected) in [(false, 0.0), (true, 0.25)] {
        let c = gen_bb84(eve);
        let q = run(&c).map_err(|e| e.to_string())?;
        let qd: Vec<f64> = (0..4).map(|i| q.manager.entry(&q.rho, i, i).re).collect();
        let trace = q.manager.trace(&q.rho).map_err(|e| e.to_string())?;
        let d = dense_run(&c).map_err(|e| e.to_string())?;
        let dd: Vec<f64> = (0..4).map(|i| d.rho.get(i, i).re).collect();
        let rq = bb84_error_rate([qd[0], qd[1], qd[2], qd[3]]);
        let rd = bb84_error_rate([dd[0], dd[1], dd[2], dd[3]]);
        ok &= (rq - expected).abs() <= 1e-9 && (rd - expected).abs() <= 1e-9;
        ok &= (trace - Complex64::new(1.0, 0.0)).norm() <= 1e-9;
        parts.push(format!("eve={eve}: quidd {rq:.3e} dense {rd:.3e} (expect {expected}), trace {:.12}", trace.re));
    }
    check(ok, parts.join("; "))
}

fn scripts(dir: &Path) -> Result<Vec<PathBuf>, String> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qpd"))
        .collect();
    out.sort();
    Ok(out)
}

fn parser() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scripts");
    let goldens = scripts(&root)?;
    let mut problems = Vec::new();
    for path in &goldens {
        let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let ast = match parse(&src) {
            Ok(a) => a,
            Err(e) => {
                problems.push(format!("{name}: {e}"));
                continue;
            }
        };
        let printed = pretty_print(&ast);
        match parse(&printed) {
            Ok(again) if again == ast => {}
            Ok(_) => problems.push(format!("{name}: round trip changed the AST")),
            Err(e) => problems.push(format!("{name}: reprint does not parse: {e}")),
        }
        if let Err(e) = compile(&src) {
            problems.push(format!("{name}: {e}"));
        }
    }
    let malformed = scripts(&root.join("malformed"))?;
    for path in &malformed {
        let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let expected = src
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# error: "))
            .ok_or_else(|| format!("{name}: missing `# error: L:C` header"))?
            .trim()
            .to_string();
        match compile(&src) {
            Ok(_) => problems.push(format!("{name}: accepted")),
            Err(e) => {
                let span = e.span();
                let got = format!("{}:{}", span.line, span.col);
                if got != expected {
                    problems.push(format!("{name}: error at {got}, expected {expected}"));
                }
            }
        }
    }
    check(
        goldens.len() >= 15 && !malformed.is_empty() && problems.is_empty(),
        format!(
            "{} goldens round-trip, {} malformed spans{}",
            goldens.len(),
            malformed.len(),
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("differential", differential),
        ("partial_trace", partial_trace),
        ("outer_product", outer_product),
        ("compression", compression),
        ("grover_scaling", grover_scaling),
        ("grover_correctness", grover_correctness),
        ("rc_adder", adder),
        ("error_correction", error_correction),
        ("bb84", bb84),
        ("parser", parser),
    ];
    let mut failed = 0;
    let mut total = Duration::ZERO;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        total += t.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), total.as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
