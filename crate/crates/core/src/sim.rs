//! A ready-to-drive simulation of one top design: stimuli, stepping, and
//! access to values.

use indexmap::IndexSet;
use std::sync::Arc;

use crate::error::{SimError, SimResult};
use crate::hierarchy::{step_arch, ArchState, Registry};
use crate::kernel::{SimConfig, Trace};
use crate::model::Model;
use crate::state::SimState;
use crate::values::Val;

#[derive(Debug, Clone)]
pub struct Simulator {
    pub registry: Arc<Registry>,
    pub root: ArchState,
    pub cfg: SimConfig,
    /// Number of completed cycles.
    pub cycle: u64,
    pub trace: Trace,
    /// Delta iterations of the top design in the last cycle.
    pub last_deltas: usize,
    forced: IndexSet<String>,
}

impl Simulator {
    pub fn new(registry: Arc<Registry>, top: &str, cfg: SimConfig) -> SimResult<Simulator> {
        let root = ArchState::build(&registry, top, &cfg)?;
        let m = registry.get(top).expect("built above");
        if let Some(clk) = &cfg.clock {
            if !m.sigprts.contains_key(clk) {
                return Err(SimError::Config(format!(
                    "clock `{clk}` is not a signal or port of `{top}`"
                )));
            }
        }
        Ok(Simulator {
            trace: Trace::new(cfg.trace),
            registry,
            root,
            cfg,
            cycle: 0,
            last_deltas: 0,
            forced: IndexSet::new(),
        })
    }

    /// Single-design convenience constructor.
    pub fn from_model(m: Model, cfg: SimConfig) -> SimResult<Simulator> {
        let name = m.name().to_string();
        let mut reg = Registry::new();
        reg.insert(m);
        Simulator::new(Arc::new(reg), &name, cfg)
    }

    pub fn model(&self) -> &Model {
        self.registry.get(&self.root.name).expect("top design")
    }

    pub fn state(&self) -> &SimState {
        &self.root.local
    }

    pub fn state_mut(&mut self) -> &mut SimState {
        &mut self.root.local
    }

    /// Current value of a top-level signal/port leaf or variable.
    pub fn value(&self, name: &str) -> Option<&Val> {
        let st = self.state();
        st.sp.get(name).or_else(|| st.vars.get(name))
    }

    /// Forces `name` to `v` before the next cycle: the value is promoted at
    /// the start of that cycle and the signal counts as active.
    pub fn set(&mut self, name: &str, v: Val) -> SimResult<()> {
        let m = self.registry.get(&self.root.name).expect("top design").clone();
        let Some(sp) = m.sigprts.get(name) else {
            return Err(SimError::Config(format!(
                "stimulus target `{name}` is not a signal or port of `{}`",
                m.name()
            )));
        };
        let v = sp
            .ty
            .conform(v)
            .map_err(|e| SimError::eval(&format!("stimulus `{name}`"), e))?;
        self.root.local.eff.insert(name.to_string(), Some(v));
        self.forced.insert(name.to_string());
        Ok(())
    }

    /// Runs one cycle (then flips the clock, if any).
    pub fn step(&mut self) -> SimResult<usize> {
        let forced = std::mem::take(&mut self.forced);
        let cycle = self.cycle + 1;
        let deltas = step_arch(
            &self.registry,
            &mut self.root,
            &self.cfg,
            &forced,
            cycle,
            &mut self.trace,
        )?;
        self.cycle = cycle;
        self.last_deltas = deltas;
        Ok(deltas)
    }

    pub fn run(&mut self, n: u64) -> SimResult<()> {
        for _ in 0..n {
            self.step()?;
        }
        Ok(())
    }

    /// `name = value` lines for all top-level signals/ports, sorted by name.
    pub fn dump(&self) -> String {
        crate::dump::dump_signals(self.state())
    }
}
