//! Delta-cycle engine: run the processes woken by active signals, recompute
//! effective values, promote them, and repeat until no process is woken.

use indexmap::IndexSet;
use serde::Serialize;

use crate::error::{SimError, SimResult};
use crate::exec::{run_process, DEFAULT_LOOP_BUDGET};
use crate::logic9::Logic9;
use crate::model::Model;
use crate::state::SimState;
use crate::values::{Scalar, Val};

pub const DEFAULT_DELTA_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub cycles: u64,
    pub clock: Option<String>,
    pub delta_limit: usize,
    pub loop_budget: u64,
    pub trace: bool,
    /// Recompute every effective value each delta instead of only those
    /// whose drivers changed.
    pub full_eff_recompute: bool,
    /// Simulate sibling components on separate threads.
    pub parallel_children: bool,
    /// Treat an instance of an unknown design as an inert component instead
    /// of rejecting the hierarchy.
    pub compat_unknown_design: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            cycles: 0,
            clock: None,
            delta_limit: DEFAULT_DELTA_LIMIT,
            loop_budget: DEFAULT_LOOP_BUDGET,
            trace: false,
            full_eff_recompute: false,
            parallel_children: false,
            compat_unknown_design: false,
        }
    }
}

/// One delta iteration. Delta 0 is the promotion of pending values at the
/// start of a cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRecord {
    pub cycle: u64,
    pub delta: usize,
    pub active: Vec<String>,
    pub transitions: Vec<(String, Val)>,
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub enabled: bool,
    pub records: Vec<DeltaRecord>,
    /// Statement-level log lines, collected when enabled.
    pub statements: Vec<String>,
}

impl Trace {
    pub fn new(enabled: bool) -> Trace {
        Trace {
            enabled,
            ..Trace::default()
        }
    }

    fn record(&mut self, st: &SimState, cycle: u64, delta: usize, active: &IndexSet<String>, changed: &[String]) {
        if !self.enabled {
            return;
        }
        self.records.push(DeltaRecord {
            cycle,
            delta,
            active: active.iter().cloned().collect(),
            transitions: changed.iter().map(|n| (n.clone(), st.sp[n].clone())).collect(),
        });
    }
}

/// Runs, in declaration order, every process sensitive to a signal in `sps`.
pub fn exec_proc_all(
    m: &Model,
    cfg: &SimConfig,
    sps: &IndexSet<String>,
    st: &mut SimState,
    trace: &mut Trace,
) -> SimResult<()> {
    run_where(m, cfg, st, trace, |idx| m.is_sensitive(idx, sps))
}

fn run_where(
    m: &Model,
    cfg: &SimConfig,
    st: &mut SimState,
    trace: &mut Trace,
    wake: impl Fn(usize) -> bool,
) -> SimResult<()> {
    for idx in 0..m.design.processes.len() {
        if wake(idx) {
            let log = if trace.enabled {
                Some(&mut trace.statements)
            } else {
                None
            };
            run_process(m, idx, st, cfg.loop_budget, log)?;
        }
    }
    Ok(())
}

/// Delta iterations until no process is woken. Returns the number of
/// iterations run.
pub fn resume_processes(
    m: &Model,
    cfg: &SimConfig,
    sps: IndexSet<String>,
    st: &mut SimState,
    cycle: u64,
    trace: &mut Trace,
) -> SimResult<usize> {
    resume_from(m, cfg, sps, st, cycle, trace, false)
}

/// With `wake_all`, the first iteration runs every process regardless of
/// its sensitivity list.
fn resume_from(
    m: &Model,
    cfg: &SimConfig,
    sps: IndexSet<String>,
    st: &mut SimState,
    cycle: u64,
    trace: &mut Trace,
    wake_all: bool,
) -> SimResult<usize> {
    let mut sps = sps;
    let mut n = 0;
    loop {
        n += 1;
        if wake_all && n == 1 {
            run_where(m, cfg, st, trace, |_| true)?;
        } else {
            exec_proc_all(m, cfg, &sps, st, trace)?;
        }
        st.comp_eff_val(m, cfg.full_eff_recompute);
        let active = st.active_sigprts();
        let changed = st.update_all();
        trace.record(st, cycle, n, &active, &changed);
        if !m.has_active_process(&active) {
            return Ok(n);
        }
        if n >= cfg.delta_limit {
            return Err(SimError::DeltaLimit {
                cycle,
                limit: cfg.delta_limit,
                active: active.into_iter().collect(),
            });
        }
        sps = active;
    }
}

/// One simulation cycle. Pending effective values (from a clock flip,
/// stimuli or component outputs) are promoted first; `forced` signals count
/// as active even when their value did not change. In cycle 1 every
/// process runs in the first delta iteration, sensitive or not.
/// Returns the number of delta iterations.
pub fn exec_sim_cyc(
    m: &Model,
    cfg: &SimConfig,
    st: &mut SimState,
    forced: &IndexSet<String>,
    cycle: u64,
    trace: &mut Trace,
) -> SimResult<usize> {
    let mut active = st.active_sigprts();
    active.extend(forced.iter().cloned());
    let changed = st.update_sigprt(&active);
    if !changed.is_empty() || !active.is_empty() {
        trace.record(st, cycle, 0, &active, &changed);
    }
    if cycle == 1 && !m.design.processes.is_empty() {
        // start-up: every process runs once, as after elaboration
        resume_from(m, cfg, active, st, cycle, trace, true)
    } else if m.has_active_process(&active) {
        resume_processes(m, cfg, active, st, cycle, trace)
    } else {
        Ok(0)
    }
}

/// Schedules the negation of the clock: the effective value changes now,
/// the current value at the next cycle's promotion. A metalogical clock
/// value counts as low.
pub fn flip_clk(m: &Model, st: &mut SimState, clock: Option<&str>) -> SimResult<()> {
    let Some(clk) = clock else { return Ok(()) };
    if !m.sigprts.contains_key(clk) {
        return Err(SimError::Config(format!(
            "clock `{clk}` is not a signal or port of `{}`",
            m.name()
        )));
    }
    let next = match &st.sp[clk] {
        Val::Scalar(Scalar::Bit(b)) => Val::bit(!b),
        Val::Scalar(Scalar::Logic(l)) => Val::logic(Logic9::from_bool(!l.to_bool().unwrap_or(false))),
        Val::Scalar(Scalar::Bool(b)) => Val::boolean(!b),
        other => {
            return Err(SimError::Config(format!(
                "clock `{clk}` has non-bit type {}",
                other.type_name()
            )))
        }
    };
    st.eff.insert(clk.to_string(), Some(next));
    Ok(())
}

/// `n` repetitions of one cycle followed by a clock flip.
pub fn simulation(n: u64, m: &Model, st: &mut SimState, cfg: &SimConfig, trace: &mut Trace) -> SimResult<()> {
    let none = IndexSet::new();
    for c in 1..=n {
        exec_sim_cyc(m, cfg, st, &none, c, trace)?;
        flip_clk(m, st, cfg.clock.as_deref())?;
    }
    Ok(())
}
