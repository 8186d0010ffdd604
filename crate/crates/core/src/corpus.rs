//! The bundled corpus (`corpus/<design>/`): designs, run specs, golden
//! dumps, and the plain arithmetic oracles the golden values come from.
//!
//! A golden file starts with `# key: value` headers. `oracle` names the
//! computation that produced the expected lines (see [`oracle_lines`]);
//! `exit` and `message` describe runs expected to fail.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::cli::{self, RunSpec};
use crate::dump::parse_dump;
use crate::error::SimResult;
use crate::hierarchy::Registry;
use crate::kernel::SimConfig;
use crate::logic9::Logic9;
use crate::sim::Simulator;
use crate::values::{Scalar, Val};

pub fn corpus_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

// -- oracles ------------------------------------------------------------------

pub fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

pub fn power(x: i64, n: u32) -> i64 {
    (0..n).fold(1, |acc, _| acc * x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivResult {
    Quotient(i32),
    Overflow,
}

/// Signed 64-by-32 division truncating toward zero. A zero divisor or a
/// quotient outside the 32-bit range is an overflow.
pub fn div32(dividend: i64, divisor: i32) -> DivResult {
    if divisor == 0 {
        return DivResult::Overflow;
    }
    let q = dividend as i128 / divisor as i128;
    match i32::try_from(q) {
        Ok(q) => DivResult::Quotient(q),
        Err(_) => DivResult::Overflow,
    }
}

/// Counting done by the `nested_loops` design: `(pairs, steps)`.
pub fn nested_loops(limit: i64) -> (i64, i64) {
    let (mut pairs, mut steps) = (0, 0);
    for i in 0..=9 {
        if i == limit {
            break;
        }
        for j in 0..=9 {
            steps += 1;
            if j == 3 {
                continue;
            }
            if j == 6 {
                break;
            }
            if (i + j) % 2 == 0 {
                break;
            }
            pairs += 1;
        }
    }
    (pairs, steps)
}

/// Wired resolution of two std_logic drivers, by case analysis on the
/// strength of each value.
pub fn resolve_pair(a: char, b: char) -> char {
    let strength = |c: char| match c {
        'U' => 4,
        '0' | '1' | 'X' => 3,
        'W' | 'L' | 'H' => 2,
        'Z' => 1,
        _ => 3,
    };
    if a == 'U' || b == 'U' {
        return 'U';
    }
    if a == '-' || b == '-' {
        return 'X';
    }
    let (sa, sb) = (strength(a), strength(b));
    if sa > sb {
        return a;
    }
    if sb > sa {
        return b;
    }
    if a == b {
        return a;
    }
    if sa == 3 {
        'X'
    } else {
        'W'
    }
}

fn bits(v: u64, n: u32) -> String {
    (0..n)
        .rev()
        .map(|k| if (v >> k) & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn lfsr5(l: u64) -> u64 {
    ((l << 1) & 0b11111) | (((l >> 4) ^ (l >> 2)) & 1)
}

fn lfsr8(d: u64) -> u64 {
    ((d << 1) & 0xff) | (((d >> 7) ^ (d >> 5) ^ (d >> 4) ^ (d >> 3)) & 1)
}

/// Final values of the `fsm` design after `edges` rising clock edges.
pub fn fsm(edges: u32) -> Vec<(String, String)> {
    let (mut state, mut timer, mut lfsr) = (0u64, 0u64, 1u64);
    for _ in 0..edges {
        let req = lfsr & 1 == 1 && (lfsr >> 3) & 1 == 0;
        let (s, t) = match state {
            0 if timer == 5 => (1, 0),
            0 => (0, timer + 1),
            1 if req => (2, 0),
            1 if timer == 9 => (3, 0),
            1 => (1, timer + 1),
            _ if timer >= 2 => (0, 0),
            _ => (state, timer + 1),
        };
        state = s;
        timer = t & 0xf;
        lfsr = lfsr5(lfsr);
    }
    let req = lfsr & 1 == 1 && (lfsr >> 3) & 1 == 0;
    let walk = state == 0 && timer > 2;
    let logic = |b: bool| if b { "'1'" } else { "'0'" }.to_string();
    vec![
        ("state".into(), state.to_string()),
        ("timer".into(), format!("\"{}\"", bits(timer, 4))),
        ("lfsr".into(), format!("\"{}\"", bits(lfsr, 5))),
        ("req".into(), logic(req)),
        ("light".into(), format!("\"{}\"", bits(state, 2))),
        ("walk".into(), logic(walk)),
    ]
}

/// Final values of the `gen_adder` design after `edges` rising edges.
pub fn gen_adder(edges: u32) -> Vec<(String, String)> {
    let e = edges as u64;
    let (a, b) = ((3 * e) % 16, (5 * e) % 16);
    let s = (a + b) % 16;
    let mut out = vec![
        ("a".to_string(), format!("\"{}\"", bits(a, 4))),
        ("b".to_string(), format!("\"{}\"", bits(b, 4))),
        ("s".to_string(), format!("\"{}\"", bits(s, 4))),
    ];
    if edges > 0 {
        let (pa, pb) = ((3 * (e - 1)) % 16, (5 * (e - 1)) % 16);
        out.push(("sum".into(), format!("\"{}\"", bits((pa + pb) % 16, 4))));
        out.push(("cout".into(), if pa + pb > 15 { "'1'" } else { "'0'" }.into()));
    }
    out
}

/// Final values of the `bitops` design after `edges` rising edges.
pub fn bitops(edges: u32) -> Vec<(String, String)> {
    let mut d = 0b1001_0110u64;
    for _ in 0..edges {
        d = lfsr8(d);
    }
    let ones = d.count_ones();
    let rev = (0..8).fold(0u64, |acc, k| acc | (((d >> k) & 1) << (7 - k)));
    let cls = match ones {
        0..=2 => 0,
        3..=4 => 1,
        5..=6 => 2,
        _ => 3,
    };
    vec![
        ("data".into(), format!("\"{}\"", bits(d, 8))),
        ("ones".into(), ones.to_string()),
        ("rev".into(), format!("\"{}\"", bits(rev, 8))),
        ("parity".into(), if ones % 2 == 1 { "'1'" } else { "'0'" }.into()),
        ("cls".into(), cls.to_string()),
    ]
}

fn param(args: &[(&str, &str)], k: &str) -> Result<i64, String> {
    let v = args
        .iter()
        .find(|(n, _)| *n == k)
        .ok_or_else(|| format!("oracle parameter `{k}` missing"))?
        .1;
    v.parse()
        .map_err(|_| format!("oracle parameter `{k}`: `{v}` is not an integer"))
}

/// Expected dump lines for an oracle description such as
/// `factorial n=5` or `div32 y=0 op1=100 op2=7`.
pub fn oracle_lines(desc: &str) -> Result<Vec<(String, String)>, String> {
    let mut words = desc.split_whitespace();
    let kind = words.next().ok_or("empty oracle description")?;
    let args: Vec<(&str, &str)> = words.filter_map(|w| w.split_once('=')).collect();
    let p = |k: &str| param(&args, k);
    let logic = |c: char| format!("'{c}'");
    Ok(match kind {
        "factorial" => vec![
            ("result".into(), factorial(p("n")? as u32).to_string()),
            ("done".into(), logic('1')),
        ],
        "power" => vec![
            ("result".into(), power(p("x")?, p("n")? as u32).to_string()),
            ("done".into(), logic('1')),
        ],
        "div32" => {
            let dividend = ((p("y")? as i32 as i64) << 32) | (p("op1")? as u32 as i64);
            match div32(dividend, p("op2")? as i32) {
                DivResult::Quotient(q) => vec![
                    ("result".into(), format!("\"{}\"", bits(q as u32 as u64, 32))),
                    ("ovf".into(), logic('0')),
                ],
                DivResult::Overflow => vec![("ovf".into(), logic('1'))],
            }
        }
        "nested_loops" => {
            let (pairs, steps) = nested_loops(p("limit")?);
            vec![("pairs".into(), pairs.to_string()), ("steps".into(), steps.to_string())]
        }
        "resolve" => {
            let drive = |en: &str, val: &str| -> Result<char, String> {
                Ok(if p(en)? == 1 {
                    if p(val)? == 1 {
                        '1'
                    } else {
                        '0'
                    }
                } else {
                    'Z'
                })
            };
            let r = resolve_pair(drive("a_en", "a_val")?, drive("b_en", "b_val")?);
            vec![
                ("bus_line".into(), logic(r)),
                ("bus_out".into(), logic(r)),
                ("seen".into(), logic(r)),
            ]
        }
        "mnxy" => ["m", "n", "x", "y"]
            .iter()
            .zip([3, 2, 5, 5])
            .map(|(n, v)| (n.to_string(), v.to_string()))
            .collect(),
        "fsm" => fsm(p("edges")? as u32),
        "gen_adder" => gen_adder(p("edges")? as u32),
        "bitops" => bitops(p("edges")? as u32),
        "none" => Vec::new(),
        other => return Err(format!("unknown oracle `{other}`")),
    })
}

// -- golden cases ------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct GoldenCase {
    pub name: String,
    pub dir: PathBuf,
    pub spec: RunSpec,
    /// `name = value` lines the final state must contain.
    pub expected: Vec<(String, String)>,
    pub oracle: String,
    pub exit: i32,
    /// Text the diagnostics must contain, for failing runs.
    pub message: Option<String>,
    pub seed: Option<u64>,
    /// A hand-written core-syntax version of the design, if any.
    pub twin: Option<PathBuf>,
}

pub fn load_case(dir: &Path) -> Result<GoldenCase, String> {
    let spec = RunSpec::from_toml_file(&dir.join("runspec.toml"))?;
    let path = dir.join("expected.dump");
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let header = |k: &str| {
        text.lines()
            .filter_map(|l| l.strip_prefix('#'))
            .filter_map(|l| l.trim().split_once(':'))
            .find(|(n, _)| n.trim() == k)
            .map(|(_, v)| v.trim().to_string())
    };
    let exit = match header("exit") {
        Some(e) => e.parse().map_err(|_| format!("{}: bad exit header", path.display()))?,
        None => 0,
    };
    let seed = match header("seed") {
        Some(s) => Some(s.parse().map_err(|_| format!("{}: bad seed header", path.display()))?),
        None => None,
    };
    let twin = dir.join("core_twin.vhd");
    Ok(GoldenCase {
        name: dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        dir: dir.to_path_buf(),
        spec,
        expected: parse_dump(&text),
        oracle: header("oracle").ok_or_else(|| format!("{}: no oracle header", path.display()))?,
        exit,
        message: header("message"),
        seed,
        twin: twin.exists().then_some(twin),
    })
}

/// Every case directory under the corpus root, sorted by name.
pub fn cases() -> Result<Vec<GoldenCase>, String> {
    let root = corpus_root();
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(&root)
        .map_err(|e| format!("cannot list {}: {e}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.join("runspec.toml").exists())
        .collect();
    dirs.sort();
    dirs.iter().map(|d| load_case(d)).collect()
}

/// Runs a case and compares exit code, message and expected lines.
pub fn check_case(c: &GoldenCase) -> Result<(), String> {
    let out = cli::run(&c.spec, false);
    if out.code != c.exit {
        return Err(format!(
            "{}: exit code {} instead of {}\n{}",
            c.name, out.code, c.exit, out.stderr
        ));
    }
    if let Some(m) = &c.message {
        if !out.stderr.contains(m.as_str()) {
            return Err(format!("{}: diagnostics lack `{m}`:\n{}", c.name, out.stderr));
        }
    }
    let actual = parse_dump(&out.state_dump);
    for (n, v) in &c.expected {
        match actual.iter().find(|(a, _)| a == n) {
            Some((_, got)) if got == v => {}
            Some((_, got)) => return Err(format!("{}: `{n}` is {got}, expected {v}", c.name)),
            None => return Err(format!("{}: `{n}` missing from the final state", c.name)),
        }
    }
    Ok(())
}

// -- drivers for the arithmetic designs ---------------------------------------

fn logic_is_one(v: Option<&Val>) -> bool {
    matches!(v, Some(Val::Scalar(Scalar::Logic(Logic9::One))))
}

/// Unsigned value of a bit vector read in written order, if it has no
/// metalogical bits.
pub fn vec_u64(v: &Val) -> Option<u64> {
    v.written().iter().try_fold(0u64, |acc, e| {
        let b = match e.as_scalar()? {
            Scalar::Logic(l) => l.to_bool()?,
            Scalar::Bit(b) => *b,
            _ => return None,
        };
        Some(acc << 1 | b as u64)
    })
}

/// Runs the factorial or power design with the given inputs until `done`
/// rises. Returns the result and the number of cycles used, or `None`
/// when `max_cycles` pass first.
pub fn run_until_done(
    reg: &Arc<Registry>,
    top: &str,
    inputs: &[(&str, i64)],
    max_cycles: u64,
) -> SimResult<Option<(i64, u64)>> {
    let cfg = SimConfig {
        clock: Some("clk".into()),
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(reg.clone(), top, cfg)?;
    sim.set("start", Val::logic(Logic9::One))?;
    for (n, v) in inputs {
        sim.set(n, Val::int(*v))?;
    }
    for _ in 0..max_cycles {
        sim.step()?;
        if logic_is_one(sim.value("done")) {
            return Ok(sim.value("result").and_then(|v| v.as_int()).map(|r| (r, sim.cycle)));
        }
    }
    Ok(None)
}

pub fn load_div32() -> Result<Arc<Registry>, String> {
    let path = corpus_root().join("div32").join("div32.vhd");
    crate::frontend::load_registry(&[path], Default::default())
        .map(|l| Arc::new(l.registry))
        .map_err(|e| e.render(false))
}

/// Runs one signed division on the div32 design. `None` if `ready` does
/// not fall and rise again within 200 cycles.
pub fn run_div32(reg: &Arc<Registry>, dividend: i64, divisor: i32) -> SimResult<Option<DivResult>> {
    let cfg = SimConfig {
        clock: Some("clk".into()),
        ..SimConfig::default()
    };
    let mut sim = Simulator::new(reg.clone(), "div32", cfg)?;
    let word = |w: u32| {
        Val::from_written(
            crate::types::Dir::Downto,
            (0..32)
                .rev()
                .map(|k| Val::logic(Logic9::from_bool((w >> k) & 1 == 1)))
                .collect(),
        )
    };
    let one = Val::logic(Logic9::One);
    for n in ["rst", "holdn", "start", "sgn"] {
        sim.set(n, one.clone())?;
    }
    sim.set("y", word((dividend >> 32) as u32))?;
    sim.set("op1", word(dividend as u32))?;
    sim.set("op2", word(divisor as u32))?;
    // ready is also high while idle, before the operands are taken
    let mut busy = false;
    for _ in 0..200 {
        sim.step()?;
        if !busy {
            busy = matches!(sim.value("ready"), Some(Val::Scalar(Scalar::Logic(Logic9::Zero))));
            continue;
        }
        if logic_is_one(sim.value("ready")) {
            if logic_is_one(sim.value("ovf")) {
                return Ok(Some(DivResult::Overflow));
            }
            let q = sim.value("result").and_then(vec_u64);
            return Ok(q.map(|q| DivResult::Quotient(q as u32 as i32)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_oracle_examples() {
        assert_eq!(div32(100, 7), DivResult::Quotient(14));
        assert_eq!(div32(-100, 7), DivResult::Quotient(-14));
        assert_eq!(div32(1 << 40, 3), DivResult::Overflow);
        assert_eq!(div32(5, 0), DivResult::Overflow);
        assert_eq!(div32(-(1 << 31), 1), DivResult::Quotient(i32::MIN));
        assert_eq!(div32(1 << 31, 1), DivResult::Overflow);
    }

    #[test]
    fn small_oracles() {
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(10), 3_628_800);
        assert_eq!(power(3, 4), 81);
        assert_eq!(power(5, 0), 1);
        assert_eq!(nested_loops(7), (3, 10));
        assert_eq!(resolve_pair('1', 'Z'), '1');
        assert_eq!(resolve_pair('0', '1'), 'X');
        assert_eq!(resolve_pair('L', 'H'), 'W');
        assert_eq!(resolve_pair('U', '1'), 'U');
    }
}
