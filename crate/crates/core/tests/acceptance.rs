//! Acceptance run: one line per criterion, `PASS` or `FAIL`, with the time
//! taken against its limit. Exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use vhdlkern::corpus;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion(n: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Check) -> bool {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let el = t.elapsed();
    let (ok, detail) = match (r, limit) {
        (Ok(_), Some(l)) if el > l => (false, format!("took {el:.2?}, limit {l:?}")),
        (Ok(d), _) => (true, d),
        (Err(e), _) => (false, e),
    };
    let limit = limit.map(|l| format!(", limit {l:?}")).unwrap_or_default();
    println!(
        "{} {n}. {name} [{el:.2?}{limit}]: {}",
        if ok { "PASS" } else { "FAIL" },
        detail.lines().next().unwrap_or("")
    );
    if !ok && detail.lines().count() > 1 {
        for l in detail.lines().skip(1).take(20) {
            println!("       {l}");
        }
    }
    ok
}

fn mnxy_check() -> Check {
    let r = mnxy();
    ensure(r.first == [3, 2, 0, 0], || {
        format!("driving values after delta 1: {:?}", r.first)
    })?;
    ensure(r.deltas == 2, || format!("{} delta iterations", r.deltas))?;
    ensure(r.finals == [3, 2, 5, 5], || format!("final values {:?}", r.finals))?;
    Ok("m, n, x, y = 3, 2, 5, 5 after 2 deltas; first-delta drivers 3, 2, 0, 0".into())
}

fn factorial_check() -> Check {
    let reg = Arc::new(load(&[corpus_file("factorial", "factorial.vhd")]).registry);
    let mut slowest = Duration::ZERO;
    for n in 0..=10u32 {
        let t = Instant::now();
        let bound = 10 * n as u64 + 20;
        let (r, cycles) = corpus::run_until_done(&reg, "factorial", &[("n", n as i64)], bound)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("n = {n}: not done within {bound} cycles"))?;
        ensure(r as u64 == corpus::factorial(n), || {
            format!("n = {n}: {r} after {cycles} cycles")
        })?;
        let el = t.elapsed();
        ensure(el < Duration::from_secs(1), || format!("n = {n} took {el:?}"))?;
        slowest = slowest.max(el);
    }
    Ok(format!("0! .. 10! exact, slowest case {slowest:.2?}"))
}

fn power_check() -> Check {
    let mono_files = [corpus_file("power", "power.vhd")];
    let comp_files = [
        corpus_file("power_comp", "mult_unit.vhd"),
        corpus_file("power_comp", "power_comp.vhd"),
    ];
    let mono = Arc::new(load(&mono_files).registry);
    let comp = Arc::new(load(&comp_files).registry);
    let ports = ["clk", "start", "x", "n", "done", "result"];
    let mut cycles_compared = 0;
    for x in 2..=5i64 {
        for n in 0..=8u32 {
            let inputs = [("x", x), ("n", n as i64)];
            for (reg, top) in [(&mono, "power"), (&comp, "power_comp")] {
                let (r, _) = corpus::run_until_done(reg, top, &inputs, 200)
                    .map_err(|e| e.to_string())?
                    .ok_or_else(|| format!("{top}: {x}^{n} never done"))?;
                ensure(r == corpus::power(x, n), || format!("{top}: {x}^{n} gave {r}"))?;
            }
            let len = 10 * n as u64 + 30;
            let a = port_trace(&mono_files, "power", &inputs, &ports, len);
            let b = port_trace(&comp_files, "power_comp", &inputs, &ports, len);
            if let Some(c) = a.iter().zip(&b).position(|(p, q)| p != q) {
                return Err(format!(
                    "{x}^{n}: port values differ at cycle {}: {:?} vs {:?}",
                    c + 1,
                    a[c],
                    b[c]
                ));
            }
            cycles_compared += len;
        }
    }
    Ok(format!(
        "36 (x, n) pairs exact on both; {cycles_compared} cycles of port values identical"
    ))
}

fn div32_check() -> Check {
    let seed = case("div32").seed.ok_or("div32 golden file has no seed")?;
    let random = div32_random_pairs(seed, 200);
    let bounds = div32_boundary_pairs();
    ensure(
        random
            .iter()
            .chain(&bounds)
            .all(|&(a, b)| is_quotient(corpus::div32(a, b))),
        || "an operand pair overflows".into(),
    )?;
    let mut bad = div32_mismatches(&random);
    bad.extend(div32_mismatches(&bounds));
    ensure(bad.is_empty(), || {
        format!("{} mismatches\n{}", bad.len(), bad.join("\n"))
    })?;
    Ok(format!(
        "200 random pairs (seed {seed}) and {} boundary pairs exact",
        bounds.len()
    ))
}

fn twins_check() -> Check {
    for name in ["fsm", "gen_adder", "bitops"] {
        if let Some(m) = twin_mismatch(name, 50) {
            return Err(m);
        }
    }
    Ok("fsm, gen_adder, bitops identical to their core twins for 50 cycles".into())
}

fn order_check() -> Check {
    let (runs, problems) = order_independence(6);
    ensure(problems.is_empty(), || problems.join("\n"))?;
    Ok(format!("{runs} reordered runs identical to declaration order"))
}

fn divergence_check() -> Check {
    let run = |case: &str| {
        let o = bin()
            .arg("--runspec")
            .arg(corpus::corpus_root().join(case).join("runspec.toml"))
            .output()
            .unwrap();
        (o.status.code(), String::from_utf8_lossy(&o.stderr).into_owned())
    };
    let osc = run("osc");
    ensure(osc.0 == Some(2), || format!("oscillator exit code {:?}", osc.0))?;
    ensure(osc.1.contains("delta cycle limit exceeded"), || osc.1.clone())?;
    let spin = run("while_forever");
    ensure(spin.0 == Some(2), || format!("infinite loop exit code {:?}", spin.0))?;
    ensure(spin.1.contains("loop budget exceeded"), || spin.1.clone())?;
    ensure(run("osc") == osc && run("while_forever") == spin, || {
        "repeated runs differ".into()
    })?;
    Ok("oscillator and infinite loop exit 2 with their messages, repeatably".into())
}

fn fail<T: std::fmt::Debug>(name: &str, e: proptest::test_runner::TestError<T>) -> String {
    format!("{name}: {e}")
}

fn properties_check() -> Check {
    let cases = PROPTEST_CASES;
    let runner = || {
        TestRunner::new(Config {
            failure_persistence: None,
            ..Config::with_cases(cases)
        })
    };
    runner()
        .run(
            &(
                logic9(),
                logic9(),
                logic9(),
                proptest::collection::vec(logic9(), 0..8),
                0usize..8,
            ),
            |(a, b, c, l, r)| check_resolution(a, b, c, l, r),
        )
        .map_err(|e| fail("resolution", e))?;
    runner()
        .run(
            &(logic_vector(), any::<usize>(), any::<usize>(), any::<usize>()),
            |(v, a, b, k)| check_slice_nth(v, a, b, k),
        )
        .map_err(|e| fail("slice/nth", e))?;
    runner()
        .run(
            &(
                proptest::collection::vec(-5i64..5, 1..10),
                proptest::collection::vec(proptest::option::of(-5i64..5), 10),
                proptest::collection::vec(any::<bool>(), 10),
            ),
            |(c, e, p)| check_update_idempotent(c, e, p),
        )
        .map_err(|e| fail("update_sigprt", e))?;
    runner()
        .run(&(logic_vector(), any::<bool>(), any::<bool>()), |(v, r, f)| {
            check_single_driver(v, r, f)
        })
        .map_err(|e| fail("single driver", e))?;
    let m = snapshot_model();
    runner()
        .run(
            &(0i64..60, proptest::collection::vec(any::<i32>(), 1..6)),
            |(n, junk)| check_snapshot_restore(&m, n, junk.into_iter().map(i64::from).collect()),
        )
        .map_err(|e| fail("snapshot/restore", e))?;
    runner()
        .run(&loop_program(), check_flags)
        .map_err(|e| fail("next/exit", e))?;
    Ok(format!("6 properties x {cases} cases"))
}

fn roundtrip_check() -> Check {
    let sets = corpus_file_sets().len();
    let p = roundtrip_problems();
    ensure(p.is_empty(), || p.join("\n"))?;
    let p = determinism_problems();
    ensure(p.is_empty(), || p.join("\n"))?;
    Ok(format!(
        "{sets} file sets round-trip; repeated runs byte-identical (stdout, dump, VCD)"
    ))
}

fn main() -> ExitCode {
    // keep panic messages out of the report; they are caught per criterion
    std::panic::set_hook(Box::new(|_| {}));
    let secs = Duration::from_secs;
    let results = [
        criterion(1, "M/N/X/Y delta example", Some(secs(1)), mnxy_check),
        criterion(2, "factorial n = 0..10", None, factorial_check),
        criterion(3, "power, monolithic and component", Some(secs(5)), power_check),
        criterion(4, "div32 random and boundary operands", Some(secs(30)), div32_check),
        criterion(5, "desugaring equivalence", None, twins_check),
        criterion(6, "process order independence", None, order_check),
        criterion(7, "divergence detection", None, divergence_check),
        criterion(8, "property suites", None, properties_check),
        criterion(9, "round trip and run determinism", None, roundtrip_check),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
