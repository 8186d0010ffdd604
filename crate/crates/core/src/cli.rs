//! Command-line driver: load files, pick the top design, apply stimuli, run,
//! and write dumps, traces and VCD.

use clap::Parser;
use indexmap::IndexMap;
use serde::Deserialize;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::desugar::LowerOptions;
use crate::dump::dump_arch;
use crate::error::SimError;
use crate::frontend::{load_registry, render_diags, Loaded};
use crate::kernel::SimConfig;
use crate::logic9::Logic9;
use crate::sim::Simulator;
use crate::types::Type;
use crate::values::{Scalar, Val};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "vhdlkern",
    version,
    about = "Cycle-based simulator for a synthesizable VHDL subset"
)]
pub struct Cli {
    /// VHDL source files.
    pub files: Vec<PathBuf>,
    /// TOML run specification; command-line flags override its fields.
    #[arg(long)]
    pub runspec: Option<PathBuf>,
    /// Top-level design (entity name).
    #[arg(long)]
    pub top: Option<String>,
    /// Number of cycles to run (default 1).
    #[arg(long)]
    pub cycles: Option<u64>,
    /// Signal flipped after every cycle.
    #[arg(long)]
    pub clock: Option<String>,
    /// Stimulus `CYCLE:SIGNAL=VALUE`, applied before that cycle runs.
    #[arg(long = "set", value_name = "C:SIG=VAL")]
    pub set: Vec<String>,
    /// Write a VCD trace, one time unit per cycle.
    #[arg(long, value_name = "PATH")]
    pub vcd: Option<PathBuf>,
    /// Write the final signals and variables to PATH.
    #[arg(long, value_name = "PATH")]
    pub dump_state: Option<PathBuf>,
    /// Print the elaborated syntax tree as JSON and exit.
    #[arg(long)]
    pub dump_ast: bool,
    /// Print the lowered core designs as JSON and exit.
    #[arg(long)]
    pub emit_core: bool,
    /// Print every delta iteration.
    #[arg(long)]
    pub trace: bool,
    /// Delta iterations allowed per cycle (default 1000).
    #[arg(long)]
    pub delta_limit: Option<usize>,
    /// Iterations allowed per loop execution (default 100000).
    #[arg(long)]
    pub loop_budget: Option<u64>,
    /// Concurrent assignments are sensitive to condition signals only.
    #[arg(long)]
    pub condition_sensitivity: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Stimulus {
    pub cycle: u64,
    pub signal: String,
    pub value: String,
}

impl Stimulus {
    /// Parses `CYCLE:SIGNAL=VALUE`.
    pub fn parse(s: &str) -> Result<Stimulus, String> {
        let bad = || format!("malformed stimulus `{s}`, expected CYCLE:SIGNAL=VALUE");
        let (c, rest) = s.split_once(':').ok_or_else(bad)?;
        let (sig, val) = rest.split_once('=').ok_or_else(bad)?;
        let cycle: u64 = c.trim().parse().map_err(|_| bad())?;
        if cycle == 0 {
            return Err(format!("stimulus `{s}`: cycles are numbered from 1"));
        }
        Ok(Stimulus {
            cycle,
            signal: sig.trim().to_ascii_lowercase(),
            value: val.trim().to_string(),
        })
    }
}

/// Everything needed for one run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub files: Vec<PathBuf>,
    pub top: Option<String>,
    #[serde(default)]
    pub cycles: u64,
    pub clock: Option<String>,
    /// `CYCLE:SIGNAL=VALUE` strings.
    #[serde(default)]
    pub set: Vec<String>,
    pub vcd: Option<PathBuf>,
    pub dump_state: Option<PathBuf>,
    #[serde(default)]
    pub trace: bool,
    pub delta_limit: Option<usize>,
    pub loop_budget: Option<u64>,
    #[serde(default)]
    pub condition_sensitivity: bool,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            files: Vec::new(),
            top: None,
            cycles: 1,
            clock: None,
            set: Vec::new(),
            vcd: None,
            dump_state: None,
            trace: false,
            delta_limit: None,
            loop_budget: None,
            condition_sensitivity: false,
        }
    }
}

impl RunSpec {
    /// Reads a TOML run spec; relative file paths are taken from its directory.
    pub fn from_toml_file(path: &Path) -> Result<RunSpec, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut spec: RunSpec = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for f in &mut spec.files {
            if f.is_relative() {
                *f = dir.join(&*f);
            }
        }
        Ok(spec)
    }

    pub fn stimuli(&self) -> Result<Vec<Stimulus>, String> {
        self.set.iter().map(|s| Stimulus::parse(s)).collect()
    }

    pub fn config(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            cycles: self.cycles,
            clock: self.clock.clone(),
            delta_limit: self.delta_limit.unwrap_or(d.delta_limit),
            loop_budget: self.loop_budget.unwrap_or(d.loop_budget),
            trace: self.trace || self.vcd.is_some(),
            ..d
        }
    }
}

fn int_bits(i: i64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|k| {
            if (k < 64 && (i >> k) & 1 == 1) || (k >= 64 && i < 0) {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Reads a stimulus value for an object of type `ty`. Vectors take a quoted
/// bit string (`"0101"`) or an integer, which is truncated to the width.
pub fn parse_value(ty: &Type, text: &str) -> Result<Val, String> {
    let t = text.trim();
    let unquote = |q: char| t.strip_prefix(q).and_then(|s| s.strip_suffix(q));
    let bad = || format!("`{t}` is not a valid {ty} value");
    let int = || -> Option<i64> {
        let (neg, s) = match t.strip_prefix('-') {
            Some(s) => (true, s),
            None => (false, t),
        };
        let v = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(h) => i64::from_str_radix(h, 16).ok()?,
            None => s.parse::<i64>().ok()?,
        };
        Some(if neg { -v } else { v })
    };
    let v = match ty {
        Type::Logic => {
            let c = unquote('\'').unwrap_or(t);
            let mut cs = c.chars();
            match (cs.next().and_then(Logic9::from_char), cs.next()) {
                (Some(l), None) => Val::logic(l),
                _ => return Err(bad()),
            }
        }
        Type::Bit | Type::Boolean => {
            let b = match unquote('\'').unwrap_or(t).to_ascii_lowercase().as_str() {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => return Err(bad()),
            };
            if *ty == Type::Bit {
                Val::bit(b)
            } else {
                Val::boolean(b)
            }
        }
        Type::Integer { .. } => Val::int(int().ok_or_else(bad)?),
        Type::Real => Val::Scalar(Scalar::Real(t.parse().map_err(|_| bad())?)),
        Type::Character => {
            let c = unquote('\'').unwrap_or(t);
            let mut cs = c.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => Val::Scalar(Scalar::Char(c)),
                _ => return Err(bad()),
            }
        }
        Type::Vector { dir, elem, .. } => {
            let n = ty.len().ok_or_else(bad)?;
            let bits = match unquote('"') {
                Some(b) => b.to_string(),
                None => int_bits(int().ok_or_else(bad)?, n),
            };
            let mk = |c: char| match **elem {
                Type::Bit => match c {
                    '0' => Some(Val::bit(false)),
                    '1' => Some(Val::bit(true)),
                    _ => None,
                },
                Type::Logic => Logic9::from_char(c).map(Val::logic),
                Type::Character => Some(Val::Scalar(Scalar::Char(c))),
                _ => None,
            };
            let elems: Option<Vec<Val>> = bits.chars().map(mk).collect();
            Val::from_written(*dir, elems.ok_or_else(bad)?)
        }
        _ => return Err(format!("stimuli of type {ty} are not supported")),
    };
    ty.conform(v).map_err(|e| format!("`{t}`: {e}"))
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
    /// Final signals and variables of the whole instance tree.
    pub state_dump: String,
    pub vcd: Option<Vec<u8>>,
}

impl RunOutcome {
    fn fail(code: i32, stderr: String) -> RunOutcome {
        RunOutcome {
            code,
            stderr,
            ..RunOutcome::default()
        }
    }
}

fn color_enabled() -> bool {
    match std::env::var("VHDLKERN_COLOR").ok().as_deref() {
        Some("1" | "always" | "true") => true,
        Some(_) => false,
        None => std::io::stderr().is_terminal(),
    }
}

fn select_top(spec: &RunSpec, loaded: &Loaded) -> Result<String, String> {
    match &spec.top {
        Some(t) => {
            let t = t.to_ascii_lowercase();
            if loaded.registry.get(&t).is_some() {
                Ok(t)
            } else {
                Err(format!("error: no design named `{t}`"))
            }
        }
        None => loaded.default_top().ok_or_else(|| {
            let names: Vec<&str> = loaded.core.iter().map(|d| d.name.as_str()).collect();
            format!(
                "error: cannot pick a top design among [{}]; use --top",
                names.join(", ")
            )
        }),
    }
}

/// Runs a simulation as described by `spec`. Output files named in the spec
/// are written; the text outputs are returned.
pub fn run(spec: &RunSpec, color: bool) -> RunOutcome {
    let opts = LowerOptions {
        condition_sensitivity: spec.condition_sensitivity,
    };
    match load_registry(&spec.files, opts) {
        Ok(l) => run_loaded(spec, &l, color),
        Err(e) => RunOutcome::fail(EXIT_DIAG, e.render(color)),
    }
}

/// [`run`] for designs already loaded; `spec.files` is ignored.
pub fn run_loaded(spec: &RunSpec, loaded: &Loaded, color: bool) -> RunOutcome {
    let mut stderr = render_diags(&loaded.warnings, &loaded.sources, color);
    let top = match select_top(spec, loaded) {
        Ok(t) => t,
        Err(msg) => return RunOutcome::fail(EXIT_DIAG, stderr + &msg + "\n"),
    };
    let stimuli = match spec.stimuli() {
        Ok(s) => s,
        Err(msg) => return RunOutcome::fail(EXIT_DIAG, format!("{stderr}error: {msg}\n")),
    };
    let cfg = spec.config();
    let mut sim = match Simulator::new(Arc::new(loaded.registry.clone()), &top, cfg) {
        Ok(s) => s,
        Err(e) => return RunOutcome::fail(EXIT_DIAG, format!("{stderr}error: {e}\n")),
    };
    // check and convert every stimulus before running anything
    let mut by_cycle: IndexMap<u64, Vec<(String, Val)>> = IndexMap::new();
    for s in &stimuli {
        let Some(sp) = sim.model().sigprts.get(&s.signal) else {
            return RunOutcome::fail(
                EXIT_DIAG,
                format!(
                    "{stderr}error: stimulus target `{}` is not a signal or port of `{top}`\n",
                    s.signal
                ),
            );
        };
        match parse_value(&sp.ty, &s.value) {
            Ok(v) => by_cycle.entry(s.cycle).or_default().push((s.signal.clone(), v)),
            Err(msg) => {
                return RunOutcome::fail(
                    EXIT_DIAG,
                    format!("{stderr}error: stimulus for `{}`: {msg}\n", s.signal),
                )
            }
        }
    }
    let initial = sim.state().sp.clone();
    let mut runtime_err: Option<SimError> = None;
    for c in 1..=spec.cycles {
        if let Some(list) = by_cycle.get(&c) {
            for (n, v) in list {
                if let Err(e) = sim.set(n, v.clone()) {
                    runtime_err = Some(e);
                    break;
                }
            }
        }
        if runtime_err.is_some() {
            break;
        }
        if let Err(e) = sim.step() {
            runtime_err = Some(e);
            break;
        }
    }
    let mut out = RunOutcome {
        state_dump: dump_arch(&sim.root, true),
        ..RunOutcome::default()
    };
    if spec.trace {
        for r in &sim.trace.records {
            let tr: Vec<String> = r.transitions.iter().map(|(n, v)| format!("{n} <= {v}")).collect();
            out.stdout.push_str(&format!(
                "# cycle {} delta {}: active [{}] {}\n",
                r.cycle,
                r.delta,
                r.active.join(", "),
                tr.join("; ")
            ));
        }
    }
    out.stdout.push_str(&dump_arch(&sim.root, false));
    if sim.cfg.trace {
        let mut buf = Vec::new();
        if let Err(e) = crate::vcd::write_vcd(&mut buf, &top, &initial, &sim.trace) {
            stderr.push_str(&format!("error: writing VCD: {e}\n"));
        }
        out.vcd = Some(buf);
    }
    let mut io_err = false;
    if let (Some(p), Some(bytes)) = (&spec.vcd, &out.vcd) {
        if let Err(e) = std::fs::write(p, bytes) {
            stderr.push_str(&format!("error: cannot write {}: {e}\n", p.display()));
            io_err = true;
        }
    }
    if let Some(p) = &spec.dump_state {
        if let Err(e) = std::fs::write(p, &out.state_dump) {
            stderr.push_str(&format!("error: cannot write {}: {e}\n", p.display()));
            io_err = true;
        }
    }
    out.code = match runtime_err {
        Some(e) => {
            stderr.push_str(&format!("error: cycle {}: {e}\n", sim.cycle + 1));
            match e {
                SimError::Config(_) => EXIT_DIAG,
                _ => EXIT_RUNTIME,
            }
        }
        None if io_err => EXIT_DIAG,
        None => EXIT_OK,
    };
    out.stderr = stderr;
    out
}

/// `--dump-ast` / `--emit-core`: JSON of the loaded designs.
pub fn dump_designs(spec: &RunSpec, core: bool, color: bool) -> RunOutcome {
    let opts = LowerOptions {
        condition_sensitivity: spec.condition_sensitivity,
    };
    let loaded = match load_registry(&spec.files, opts) {
        Ok(l) => l,
        Err(e) => return RunOutcome::fail(EXIT_DIAG, e.render(color)),
    };
    let json = if core {
        serde_json::to_string_pretty(&loaded.core)
    } else {
        serde_json::to_string_pretty(&loaded.complex)
    };
    match json {
        Ok(s) => RunOutcome {
            stdout: s + "\n",
            stderr: render_diags(&loaded.warnings, &loaded.sources, color),
            ..RunOutcome::default()
        },
        Err(e) => RunOutcome::fail(EXIT_DIAG, format!("error: {e}\n")),
    }
}

/// Merges the command line over an optional run spec file.
pub fn spec_from_cli(cli: &Cli) -> Result<RunSpec, String> {
    let mut spec = match &cli.runspec {
        Some(p) => RunSpec::from_toml_file(p)?,
        None => RunSpec::default(),
    };
    if !cli.files.is_empty() {
        spec.files = cli.files.clone();
    }
    if spec.files.is_empty() {
        return Err("no input files".into());
    }
    if cli.top.is_some() {
        spec.top = cli.top.clone();
    }
    if let Some(c) = cli.cycles {
        spec.cycles = c;
    }
    if cli.clock.is_some() {
        spec.clock = cli.clock.as_ref().map(|c| c.to_ascii_lowercase());
    }
    spec.set.extend(cli.set.iter().cloned());
    if cli.vcd.is_some() {
        spec.vcd = cli.vcd.clone();
    }
    if cli.dump_state.is_some() {
        spec.dump_state = cli.dump_state.clone();
    }
    spec.trace |= cli.trace;
    spec.delta_limit = cli.delta_limit.or(spec.delta_limit);
    spec.loop_budget = cli.loop_budget.or(spec.loop_budget);
    spec.condition_sensitivity |= cli.condition_sensitivity;
    Ok(spec)
}

/// Entry point behind `main`; returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let color = color_enabled();
    let spec = match spec_from_cli(&cli) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return EXIT_DIAG;
        }
    };
    let out = if cli.dump_ast || cli.emit_core {
        dump_designs(&spec, cli.emit_core, color)
    } else {
        run(&spec, color)
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Dir;

    #[test]
    fn stimulus_syntax() {
        assert_eq!(
            Stimulus::parse("3:Start=1").unwrap(),
            Stimulus {
                cycle: 3,
                signal: "start".into(),
                value: "1".into()
            }
        );
        assert!(Stimulus::parse("0:a=1").is_err());
        assert!(Stimulus::parse("a=1").is_err());
    }

    #[test]
    fn values_follow_the_type() {
        let v8 = Type::logic_vec(7, 0);
        assert_eq!(parse_value(&v8, "5").unwrap(), Val::logic_vec(Dir::Downto, "00000101"));
        assert_eq!(parse_value(&v8, "-1").unwrap(), Val::logic_vec(Dir::Downto, "11111111"));
        assert_eq!(
            parse_value(&v8, "\"0000ZZ11\"").unwrap(),
            Val::logic_vec(Dir::Downto, "0000ZZ11")
        );
        assert!(parse_value(&v8, "\"01\"").is_err());
        assert_eq!(parse_value(&Type::Logic, "1").unwrap(), Val::logic(Logic9::One));
        assert_eq!(parse_value(&Type::Logic, "'Z'").unwrap(), Val::logic(Logic9::Z));
        assert_eq!(parse_value(&Type::integer(), "-7").unwrap(), Val::int(-7));
        assert!(parse_value(&Type::natural(), "-7").is_err());
        assert_eq!(parse_value(&Type::Boolean, "true").unwrap(), Val::boolean(true));
    }
}
