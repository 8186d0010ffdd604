//! Whole-design checks on the corpus against arithmetic oracles.

mod common;

use std::sync::Arc;

use common::*;
use vhdlkern::corpus::{self, DivResult};
use vhdlkern::kernel::SimConfig;
use vhdlkern::sim::Simulator;

#[test]
fn mnxy_settles_in_two_deltas() {
    let r = mnxy();
    assert_eq!(r.first, [3, 2, 0, 0]);
    assert_eq!(r.deltas, 2);
    assert_eq!(r.finals, [3, 2, 5, 5]);
}

#[test]
fn factorial_for_small_n() {
    let l = load(&[corpus_file("factorial", "factorial.vhd")]);
    let reg = Arc::new(l.registry);
    for n in 0..=10u32 {
        let bound = 10 * n as u64 + 20;
        let (r, cycles) = corpus::run_until_done(&reg, "factorial", &[("n", n as i64)], bound)
            .unwrap()
            .unwrap_or_else(|| panic!("n = {n}: not done within {bound} cycles"));
        assert_eq!(r as u64, corpus::factorial(n), "n = {n} after {cycles} cycles");
    }
}

#[test]
fn power_both_structures() {
    let mono = Arc::new(load(&[corpus_file("power", "power.vhd")]).registry);
    let comp = Arc::new(
        load(&[
            corpus_file("power_comp", "mult_unit.vhd"),
            corpus_file("power_comp", "power_comp.vhd"),
        ])
        .registry,
    );
    for x in 2..=5i64 {
        for n in 0..=8u32 {
            let inputs = [("x", x), ("n", n as i64)];
            for (reg, top) in [(&mono, "power"), (&comp, "power_comp")] {
                let (r, _) = corpus::run_until_done(reg, top, &inputs, 200).unwrap().unwrap();
                assert_eq!(r, corpus::power(x, n), "{top}: {x}^{n}");
            }
        }
    }
}

#[test]
fn power_port_traces_match_cycle_by_cycle() {
    let ports = ["clk", "start", "x", "n", "done", "result"];
    for (x, n) in [(2, 0), (3, 4), (5, 8)] {
        let inputs = [("x", x), ("n", n)];
        let a = port_trace(&[corpus_file("power", "power.vhd")], "power", &inputs, &ports, 60);
        let b = port_trace(
            &[
                corpus_file("power_comp", "mult_unit.vhd"),
                corpus_file("power_comp", "power_comp.vhd"),
            ],
            "power_comp",
            &inputs,
            &ports,
            60,
        );
        for (c, (ra, rb)) in a.iter().zip(&b).enumerate() {
            assert_eq!(ra, rb, "{x}^{n}: cycle {}", c + 1);
        }
    }
}

#[test]
fn div32_boundaries() {
    let pairs = div32_boundary_pairs();
    assert_eq!(pairs.len(), 20);
    assert!(pairs.iter().all(|&(a, b)| is_quotient(corpus::div32(a, b))));
    let bad = div32_mismatches(&pairs);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn div32_seeded_pairs() {
    let seed = case("div32").seed.unwrap();
    let pairs = div32_random_pairs(seed, 40);
    assert!(pairs.iter().all(|&(a, b)| is_quotient(corpus::div32(a, b))));
    let bad = div32_mismatches(&pairs);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}

#[test]
fn div32_flags_overflow() {
    let reg = corpus::load_div32().unwrap();
    for (a, b) in [(1i64 << 40, 3), (77, 0), (i32::MIN as i64, -1), (1i64 << 31, 1)] {
        assert_eq!(corpus::div32(a, b), DivResult::Overflow);
        assert_eq!(
            corpus::run_div32(&reg, a, b).unwrap(),
            Some(DivResult::Overflow),
            "{a} / {b}"
        );
    }
}

#[test]
fn complex_designs_equal_their_core_twins() {
    for name in ["fsm", "gen_adder", "bitops"] {
        if let Some(m) = twin_mismatch(name, 50) {
            panic!("{m}");
        }
    }
}

#[test]
fn process_order_does_not_matter() {
    let (runs, problems) = order_independence(6);
    assert!(runs >= 30, "only {runs} reordered runs");
    assert!(problems.is_empty(), "{}", problems.join("\n"));
}

#[test]
fn restricted_effective_values_match_full_recompute() {
    for name in ["fsm", "gen_adder", "bitops", "multi_driver"] {
        let c = case(name);
        let loaded = load(&c.spec.files);
        let top = loaded.default_top().unwrap();
        let reg = Arc::new(loaded.registry);
        let dumps = |full: bool| {
            let cfg = SimConfig {
                full_eff_recompute: full,
                ..c.spec.config()
            };
            let mut sim = Simulator::new(reg.clone(), &top, cfg).unwrap();
            (0..30)
                .map(|_| {
                    sim.step().unwrap();
                    sim.dump()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(dumps(false), dumps(true), "{name}");
    }
}
