//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::test_runner::TestCaseResult;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vhdlkern::ast::{AsmtRhs, Design, Expr, Lhs, Mode, Process, SeqStmt, SigPrt, SpKind, Tree, VarDecl};
use vhdlkern::cli::{run_loaded, RunOutcome};
use vhdlkern::corpus::{self, DivResult, GoldenCase};
use vhdlkern::dump::dump_arch;
use vhdlkern::exec::run_process;
use vhdlkern::frontend::{load_registry, Loaded, SourceUnit};
use vhdlkern::hierarchy::Registry;
use vhdlkern::kernel::SimConfig;
use vhdlkern::logic9::Logic9;
use vhdlkern::model::Model;
use vhdlkern::sim::Simulator;
use vhdlkern::state::SimState;
use vhdlkern::types::{Dir, Type};
use vhdlkern::values::{vec_nth, vec_slice, ArithOp, RelOp, Val};

pub const PROPTEST_CASES: u32 = 1000;

// -- corpus -------------------------------------------------------------------

pub fn case(name: &str) -> GoldenCase {
    corpus::load_case(&corpus::corpus_root().join(name)).unwrap()
}

pub fn load(files: &[PathBuf]) -> Loaded {
    load_registry(files, Default::default()).unwrap_or_else(|e| panic!("{}", e.render(false)))
}

pub fn corpus_file(case: &str, file: &str) -> PathBuf {
    corpus::corpus_root().join(case).join(file)
}

/// All orderings of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Runs `case` with the processes of `design` reordered by `perm`.
pub fn run_permuted(c: &GoldenCase, loaded: &Loaded, design: &str, perm: &[usize]) -> RunOutcome {
    let mut core = loaded.core.clone();
    let d = core.iter_mut().find(|d| d.name == design).unwrap();
    d.processes = perm.iter().map(|&i| d.processes[i].clone()).collect();
    let registry = Registry::from_designs(core.clone()).unwrap();
    let l = Loaded {
        core,
        registry,
        ..loaded.clone()
    };
    run_loaded(&c.spec, &l, false)
}

/// Compares process orders of every corpus design (and core twin): all
/// orders for designs with at most four processes, otherwise `sampled`
/// seeded shuffles. Returns the number of reordered runs and the problems.
pub fn order_independence(sampled: usize) -> (usize, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut runs = 0;
    let mut problems = Vec::new();
    for c in corpus::cases().unwrap() {
        let mut variants = vec![c.clone()];
        if let Some(t) = &c.twin {
            let mut tc = c.clone();
            tc.spec.files = vec![t.clone()];
            tc.name = format!("{} (core twin)", c.name);
            variants.push(tc);
        }
        for c in variants {
            let loaded = load(&c.spec.files);
            for d in &loaded.core {
                let n = d.processes.len();
                let perms = match n {
                    0 | 1 => continue,
                    2..=4 => permutations(n),
                    _ => std::iter::once((0..n).collect())
                        .chain((0..sampled).map(|_| {
                            let mut p: Vec<usize> = (0..n).collect();
                            p.shuffle(&mut rng);
                            p
                        }))
                        .collect(),
                };
                let base = run_permuted(&c, &loaded, &d.name, &perms[0]);
                for p in &perms[1..] {
                    runs += 1;
                    let o = run_permuted(&c, &loaded, &d.name, p);
                    if o.code != base.code || o.stdout != base.stdout || o.state_dump != base.state_dump {
                        problems.push(format!("{}: design `{}` order {p:?} differs", c.name, d.name));
                    }
                }
            }
        }
    }
    (runs, problems)
}

/// Signal dumps after each of `cycles` cycles.
pub fn per_cycle_dumps(files: &[PathBuf], cycles: u64, clock: &str) -> Vec<String> {
    let loaded = load(files);
    let top = loaded.default_top().unwrap();
    let cfg = SimConfig {
        clock: Some(clock.into()),
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(Arc::new(loaded.registry), &top, cfg).unwrap();
    (0..cycles)
        .map(|_| {
            sim.step().unwrap();
            dump_arch(&sim.root, false)
        })
        .collect()
}

/// First cycle at which a complex design and its core twin disagree.
pub fn twin_mismatch(name: &str, cycles: u64) -> Option<String> {
    let complex = per_cycle_dumps(&[corpus_file(name, &format!("{name}.vhd"))], cycles, "clk");
    let twin = per_cycle_dumps(&[corpus_file(name, "core_twin.vhd")], cycles, "clk");
    complex.iter().zip(&twin).position(|(a, b)| a != b).map(|i| {
        format!(
            "{name}: cycle {}\ncomplex:\n{}core twin:\n{}",
            i + 1,
            complex[i],
            twin[i]
        )
    })
}

/// Values of the named top-level ports after each cycle.
pub fn port_trace(
    files: &[PathBuf],
    top: &str,
    inputs: &[(&str, i64)],
    ports: &[&str],
    cycles: u64,
) -> Vec<Vec<String>> {
    let loaded = load(files);
    let cfg = SimConfig {
        clock: Some("clk".into()),
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(Arc::new(loaded.registry), top, cfg).unwrap();
    sim.set("start", Val::logic(Logic9::One)).unwrap();
    for (n, v) in inputs {
        sim.set(n, Val::int(*v)).unwrap();
    }
    (0..cycles)
        .map(|_| {
            sim.step().unwrap();
            ports.iter().map(|p| sim.value(p).unwrap().to_string()).collect()
        })
        .collect()
}

// -- div32 operands -----------------------------------------------------------

/// Seeded dividend/divisor pairs whose quotient fits in 32 bits. Each pair
/// is built from a chosen quotient and remainder, so none overflows.
pub fn div32_random_pairs(seed: u64, count: usize) -> Vec<(i64, i32)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dbits = rng.random_range(1..=31);
        let d: i32 = rng.random_range(-(1i64 << dbits)..(1i64 << dbits)) as i32;
        if d == 0 {
            continue;
        }
        let qbits = rng.random_range(0..=31);
        let q: i64 = rng.random_range(-(1i64 << qbits)..(1i64 << qbits));
        let r: i64 = rng.random_range(0..(d as i64).abs());
        let prod = q * d as i64;
        let dividend = match prod.signum() {
            1 => prod + r,
            -1 => prod - r,
            _ if rng.random_bool(0.5) => r,
            _ => -r,
        };
        out.push((dividend, d));
    }
    out
}

pub fn div32_boundary_pairs() -> Vec<(i64, i32)> {
    let (max, min) = (i32::MAX as i64, i32::MIN as i64);
    vec![
        (0, 1),
        (0, -1),
        (1, 1),
        (-1, 1),
        (1, -1),
        (max, 1),
        (min, 1),
        (max, -1),
        (-max, -1),
        (max * max, i32::MAX),
        (min * min, i32::MIN),
        (max * 65536 + 65535, 65536),
        (-(max * 65536 + 65535), 65536),
        (min * 3 - 2, 3),
        (6, 4),
        (-6, 4),
        (6, -4),
        (-6, -4),
        (max, i32::MAX),
        ((1 << 32) - 1, 2),
    ]
}

/// Runs the pairs through the div32 design; returns the mismatches.
pub fn div32_mismatches(pairs: &[(i64, i32)]) -> Vec<String> {
    let reg = corpus::load_div32().unwrap();
    pairs
        .iter()
        .filter_map(|&(a, b)| {
            let want = corpus::div32(a, b);
            match corpus::run_div32(&reg, a, b) {
                Ok(Some(got)) if got == want => None,
                other => Some(format!("{a} / {b}: expected {want:?}, simulation gave {other:?}")),
            }
        })
        .collect()
}

pub fn is_quotient(r: DivResult) -> bool {
    matches!(r, DivResult::Quotient(_))
}

// -- property checks ----------------------------------------------------------

pub fn logic9() -> impl Strategy<Value = Logic9> {
    proptest::sample::select(
        "UX01ZWLH-"
            .chars()
            .map(|c| Logic9::from_char(c).unwrap())
            .collect::<Vec<_>>(),
    )
}

/// Commutativity, associativity and the 'Z' identity of resolution, plus
/// agreement with a case-analysis oracle and order-free resolution of lists.
pub fn check_resolution(a: Logic9, b: Logic9, c: Logic9, mut list: Vec<Logic9>, rot: usize) -> TestCaseResult {
    prop_assert_eq!(a.resolve_pair(b), b.resolve_pair(a));
    prop_assert_eq!(a.resolve_pair(b).resolve_pair(c), a.resolve_pair(b.resolve_pair(c)));
    if a != Logic9::from_char('-').unwrap() {
        prop_assert_eq!(a.resolve_pair(Logic9::Z), a);
    }
    prop_assert_eq!(
        a.resolve_pair(b).to_char(),
        corpus::resolve_pair(a.to_char(), b.to_char())
    );
    let r = vhdlkern::logic9::resolve(&list);
    if !list.is_empty() {
        let k = rot % list.len();
        list.rotate_left(k);
        list.reverse();
    }
    prop_assert_eq!(vhdlkern::logic9::resolve(&list), r);
    Ok(())
}

pub fn logic_vector() -> impl Strategy<Value = Val> {
    (proptest::collection::vec(logic9(), 1..48), any::<bool>()).prop_map(|(bits, downto)| {
        let dir = if downto { Dir::Downto } else { Dir::To };
        Val::from_storage(dir, bits.into_iter().map(Val::logic).collect())
    })
}

/// Reading element `k` of a slice equals reading element `start + k` of
/// the whole; slices keep the direction and the requested length.
pub fn check_slice_nth(v: Val, a: usize, b: usize, k: usize) -> TestCaseResult {
    let n = v.len();
    let start = a % n;
    let len = b % (n - start + 1);
    let s = vec_slice(&v, start as i64, len as i64).unwrap();
    prop_assert_eq!(s.len(), len);
    prop_assert_eq!(s.dir(), v.dir());
    if len > 0 {
        let k = k % len;
        prop_assert_eq!(vec_nth(&s, k as i64).unwrap(), vec_nth(&v, (start + k) as i64).unwrap());
    }
    prop_assert_eq!(vec_slice(&v, 0, n as i64).unwrap(), v.clone());
    prop_assert!(vec_nth(&v, n as i64).is_err());
    prop_assert!(vec_slice(&v, start as i64, (n - start + 1) as i64).is_err());
    Ok(())
}

fn int_signal(name: &str) -> Tree<SigPrt> {
    Tree::Leaf(SigPrt {
        name: name.into(),
        kind: SpKind::Signal,
        mode: Mode::Internal,
        ty: Type::integer(),
        init: Val::int(0),
    })
}

fn int_var(name: &str) -> Tree<VarDecl> {
    Tree::Leaf(VarDecl {
        name: name.into(),
        ty: Type::integer(),
        init: Val::int(0),
    })
}

/// Promoting the same signals twice changes nothing the second time.
pub fn check_update_idempotent(cur: Vec<i64>, eff: Vec<Option<i64>>, pick: Vec<bool>) -> TestCaseResult {
    let n = cur.len().min(eff.len()).min(pick.len());
    let mut d = Design::new("t");
    let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    d.env.sigprts = names.iter().map(|s| int_signal(s)).collect();
    let m = Model::new_unchecked(d);
    let mut st = SimState::new(&m);
    for i in 0..n {
        st.sp.insert(names[i].clone(), Val::int(cur[i]));
        st.eff.insert(names[i].clone(), eff[i].map(Val::int));
    }
    let chosen: Vec<String> = (0..n).filter(|&i| pick[i]).map(|i| names[i].clone()).collect();
    let changed = st.update_sigprt(&chosen);
    for i in 0..n {
        let expect = match (pick[i], eff[i]) {
            (true, Some(e)) => e,
            _ => cur[i],
        };
        prop_assert_eq!(&st.sp[&names[i]], &Val::int(expect));
        prop_assert_eq!(
            changed.contains(&names[i]),
            pick[i] && eff[i].is_some_and(|e| e != cur[i])
        );
    }
    let once = st.clone();
    prop_assert!(st.update_sigprt(&chosen).is_empty());
    prop_assert_eq!(st, once);
    Ok(())
}

/// A signal with one driver takes exactly the driven value, resolved or not.
pub fn check_single_driver(v: Val, resolved: bool, full: bool) -> TestCaseResult {
    let mut d = Design::new("t");
    let ty = match v.dir() {
        Some(Dir::Downto) => Type::logic_vec(v.len() as i64 - 1, 0),
        _ => Type::vector(Dir::To, 0, v.len() as i64 - 1, Type::Logic),
    };
    d.env.sigprts = vec![Tree::Leaf(SigPrt {
        name: "s".into(),
        kind: SpKind::Signal,
        mode: Mode::Internal,
        init: ty.default_value(),
        ty,
    })];
    if resolved {
        d.res_fn.insert("s".into(), "resolved".into());
    }
    d.processes.push(Process {
        name: "p".into(),
        sensitivity: vec![],
        body: vec![SeqStmt::SstSa(
            String::new(),
            Lhs::whole("s"),
            AsmtRhs::RhsE(Expr::con(v.clone())),
        )],
    });
    let m = Model::new(d).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    let mut st = SimState::new(&m);
    run_process(&m, 0, &mut st, 10, None).unwrap();
    st.comp_eff_val(&m, full);
    prop_assert_eq!(st.eff["s"].as_ref(), Some(&v));
    let changed = st.update_all();
    prop_assert_eq!(changed.is_empty(), m.sigprts["s"].init == v);
    prop_assert_eq!(&st.sp["s"], &v);
    Ok(())
}

const SNAPSHOT_SRC: &str = "
entity sr is
end sr;

architecture a of sr is
  function tri(n : integer) return integer is
    variable t : integer;
    variable r : integer;
  begin
    if n <= 0 then
      return 0;
    end if;
    t := n;
    r := tri(n - 1);
    return t + r;
  end function;
begin
  p : process
    variable a, r : integer;
  begin
    r := tri(a);
  end process;
end a;
";

pub fn snapshot_model() -> Arc<Model> {
    let l = vhdlkern::frontend::load_sources(vec![SourceUnit::new("sr.vhd", SNAPSHOT_SRC)], Default::default())
        .unwrap_or_else(|e| panic!("{}", e.render(false)));
    l.registry.get("sr").unwrap().clone()
}

/// A recursive function whose locals would be clobbered by the inner call
/// without snapshot/restore: the result is the triangular number and every
/// frame variable ends as it was before the call.
pub fn check_snapshot_restore(m: &Model, n: i64, junk: Vec<i64>) -> TestCaseResult {
    let mut st = SimState::new(m);
    let names: Vec<String> = st.vars.keys().cloned().collect();
    for (name, j) in names.iter().zip(junk.iter().cycle()) {
        st.vars.insert(name.clone(), Val::int(*j));
    }
    st.vars.insert("p.a".into(), Val::int(n));
    let before = st.vars.clone();
    run_process(m, 0, &mut st, 1000, None).unwrap();
    prop_assert_eq!(&st.vars["p.r"], &Val::int(n * (n + 1) / 2));
    for (name, v) in &before {
        if name.starts_with("tri.") || name == "p.a" {
            prop_assert_eq!(&st.vars[name], v, "{} changed", name);
        }
    }
    prop_assert!(st.flags_clear());
    Ok(())
}

/// Loop programs for the next/exit discipline check.
#[derive(Debug, Clone)]
pub enum Node {
    Count(i64),
    /// `next`/`exit` with a target picked among the enclosing loops by
    /// `target % depth`, taken when the innermost counter equals `at`.
    Next {
        target: usize,
        at: i64,
    },
    Exit {
        target: usize,
        at: i64,
    },
    Loop {
        n: i64,
        body: Vec<Node>,
    },
}

pub fn loop_program() -> impl Strategy<Value = Vec<Node>> {
    let leaf = prop_oneof![
        (0i64..10).prop_map(Node::Count),
        (0usize..3, 0i64..5).prop_map(|(target, at)| Node::Next { target, at }),
        (0usize..3, 0i64..5).prop_map(|(target, at)| Node::Exit { target, at }),
    ];
    let node = leaf.prop_recursive(3, 24, 5, |inner| {
        prop_oneof![
            inner.clone(),
            ((0i64..5), proptest::collection::vec(inner, 0..5)).prop_map(|(n, body)| Node::Loop { n, body }),
        ]
    });
    proptest::collection::vec(node, 1..5)
}

enum Ctl {
    Normal,
    Next(usize),
    Exit(usize),
}

/// Reference semantics: control transfer as an early return that unwinds
/// to the targeted loop.
fn reference(nodes: &[Node], stack: &mut Vec<usize>, counters: &mut Vec<i64>, ids: &mut usize, total: &mut i64) -> Ctl {
    for node in nodes {
        match node {
            Node::Count(t) => *total = (*total * 7 + t) % 1_000_003,
            Node::Next { target, at } | Node::Exit { target, at } => {
                let Some(&inner) = stack.last() else { continue };
                if counters[inner] != *at {
                    continue;
                }
                let t = stack[stack.len() - 1 - target % stack.len()];
                return if matches!(node, Node::Next { .. }) {
                    Ctl::Next(t)
                } else {
                    Ctl::Exit(t)
                };
            }
            Node::Loop { n, body } => {
                let id = *ids;
                *ids += 1 + count_loops(body);
                counters[id] = 0;
                stack.push(id);
                let mut out = Ctl::Normal;
                while counters[id] < *n {
                    counters[id] += 1;
                    let mut sub = id + 1;
                    match reference(body, stack, counters, &mut sub, total) {
                        Ctl::Normal => {}
                        Ctl::Next(t) if t == id => {}
                        Ctl::Exit(t) if t == id => break,
                        other => {
                            out = other;
                            break;
                        }
                    }
                }
                stack.pop();
                if !matches!(out, Ctl::Normal) {
                    return out;
                }
            }
        }
    }
    Ctl::Normal
}

fn count_loops(nodes: &[Node]) -> usize {
    nodes
        .iter()
        .map(|n| match n {
            Node::Loop { body, .. } => 1 + count_loops(body),
            _ => 0,
        })
        .sum()
}

fn counter(id: usize) -> String {
    format!("p.i{id}")
}

fn lower(nodes: &[Node], stack: &mut Vec<usize>, ids: &mut usize) -> Vec<SeqStmt> {
    let va = |n: String, e: Expr| SeqStmt::SstVa(String::new(), Lhs::whole(n), AsmtRhs::RhsE(e));
    let mut out = Vec::new();
    for node in nodes {
        match node {
            Node::Count(t) => out.push(va(
                "p.total".into(),
                Expr::arith(
                    Expr::arith(
                        Expr::arith(Expr::var("p.total"), ArithOp::Mul, Expr::int(7)),
                        ArithOp::Add,
                        Expr::int(*t),
                    ),
                    ArithOp::Mod,
                    Expr::int(1_000_003),
                ),
            )),
            Node::Next { target, at } | Node::Exit { target, at } => {
                let Some(&inner) = stack.last() else { continue };
                let t = stack[stack.len() - 1 - target % stack.len()];
                let cond = Expr::rel(Expr::var(counter(inner)), RelOp::Eq, Expr::int(*at));
                let name = format!("l{t}");
                out.push(if matches!(node, Node::Next { .. }) {
                    SeqStmt::SstN(String::new(), name, cond)
                } else {
                    SeqStmt::SstE(String::new(), name, cond)
                });
            }
            Node::Loop { n, body } => {
                let id = *ids;
                *ids += 1 + count_loops(body);
                stack.push(id);
                let mut sub = id + 1;
                let mut b = vec![va(
                    counter(id),
                    Expr::arith(Expr::var(counter(id)), ArithOp::Add, Expr::int(1)),
                )];
                b.extend(lower(body, stack, &mut sub));
                stack.pop();
                out.push(va(counter(id), Expr::int(0)));
                out.push(SeqStmt::SstL(
                    format!("l{id}"),
                    Expr::rel(Expr::var(counter(id)), RelOp::Lt, Expr::int(*n)),
                    b,
                ));
            }
        }
    }
    out
}

/// Flag-based loop control agrees with the unwinding reference, and no
/// flag is left raised after the process.
pub fn check_flags(prog: Vec<Node>) -> TestCaseResult {
    let loops = count_loops(&prog);
    let mut d = Design::new("t");
    d.env.vars = std::iter::once("p.total".to_string())
        .chain((0..loops).map(counter))
        .map(|n| int_var(&n))
        .collect();
    let body = lower(&prog, &mut Vec::new(), &mut 0);
    d.processes.push(Process {
        name: "p".into(),
        sensitivity: vec![],
        body,
    });
    let m = Model::new(d).map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
    let mut st = SimState::new(&m);
    run_process(&m, 0, &mut st, 100_000, None).unwrap();
    prop_assert!(st.flags_clear());
    let mut total = 0;
    let mut counters = vec![0; loops];
    let _ = reference(&prog, &mut Vec::new(), &mut counters, &mut 0, &mut total);
    prop_assert_eq!(&st.vars["p.total"], &Val::int(total));
    for (i, c) in counters.iter().enumerate() {
        prop_assert_eq!(&st.vars[&counter(i)], &Val::int(*c), "counter {}", i);
    }
    Ok(())
}

// -- M/N/X/Y --------------------------------------------------------------------

pub struct MnxyRun {
    /// Driving values of m, n, x, y after the first process run.
    pub first: Vec<i64>,
    pub deltas: usize,
    pub finals: Vec<i64>,
}

pub fn mnxy() -> MnxyRun {
    let loaded = load(&[corpus_file("mnxy", "mnxy.vhd")]);
    let m = loaded.registry.get("mnxy").unwrap().clone();
    let mut st = SimState::new(&m);
    run_process(&m, 0, &mut st, 10, None).unwrap();
    let names = ["m", "n", "x", "y"];
    let first = names
        .iter()
        .map(|s| st.driving(s, "p").and_then(Val::as_int).unwrap())
        .collect();
    let mut sim = Simulator::new(Arc::new(loaded.registry), "mnxy", SimConfig::default()).unwrap();
    let deltas = sim.step().unwrap();
    let finals = names
        .iter()
        .map(|s| sim.value(s).and_then(Val::as_int).unwrap())
        .collect();
    MnxyRun { first, deltas, finals }
}

// -- round trip and determinism -------------------------------------------------

/// Every file set of the corpus: each case's files, plus its core twin.
pub fn corpus_file_sets() -> Vec<(String, Vec<PathBuf>)> {
    let mut out = Vec::new();
    for c in corpus::cases().unwrap() {
        out.push((c.name.clone(), c.spec.files.clone()));
        if let Some(t) = &c.twin {
            out.push((format!("{} (core twin)", c.name), vec![t.clone()]));
        }
    }
    out
}

/// Parses each file set, serializes the syntax trees and the lowered
/// designs to JSON, reads them back and compares structurally.
pub fn roundtrip_problems() -> Vec<String> {
    use vhdlkern::ast::Design;
    use vhdlkern::desugar::ComplexDesign;
    let mut problems = Vec::new();
    for (name, files) in corpus_file_sets() {
        let l = load(&files);
        let json = serde_json::to_string(&l.complex).unwrap();
        let back: Vec<ComplexDesign> = serde_json::from_str(&json).unwrap();
        if back != l.complex {
            problems.push(format!("{name}: syntax tree changes through JSON"));
        }
        let json2 = serde_json::to_string(&back).unwrap();
        if json2 != json {
            problems.push(format!("{name}: second JSON dump differs"));
        }
        let core = serde_json::to_string(&l.core).unwrap();
        let back: Vec<Design> = serde_json::from_str(&core).unwrap();
        if back != l.core {
            problems.push(format!("{name}: core designs change through JSON"));
        }
    }
    problems
}

pub fn bin() -> std::process::Command {
    let mut c = std::process::Command::new(env!("CARGO_BIN_EXE_vhdlkern"));
    c.env("VHDLKERN_COLOR", "never");
    c
}

/// Runs every corpus case twice through the binary, with a dump file and a
/// VCD, and reports any byte difference between the two runs.
pub fn determinism_problems() -> Vec<String> {
    let dir = tempfile::tempdir().unwrap();
    let mut problems = Vec::new();
    for c in corpus::cases().unwrap() {
        let mut outs = Vec::new();
        for k in 0..2 {
            let vcd = dir.path().join(format!("{}-{k}.vcd", c.name));
            let dump = dir.path().join(format!("{}-{k}.dump", c.name));
            let o = bin()
                .arg("--runspec")
                .arg(c.dir.join("runspec.toml"))
                .arg("--vcd")
                .arg(&vcd)
                .arg("--dump-state")
                .arg(&dump)
                .arg("--trace")
                .output()
                .unwrap();
            let read = |p: &PathBuf| std::fs::read(p).unwrap_or_default();
            outs.push((o.status.code(), o.stdout, o.stderr, read(&vcd), read(&dump)));
        }
        if outs[0] != outs[1] {
            problems.push(format!("{}: two runs differ", c.name));
        }
        if outs[0].3.is_empty() || outs[0].4.is_empty() {
            problems.push(format!("{}: no VCD or dump written", c.name));
        }
    }
    problems
}
