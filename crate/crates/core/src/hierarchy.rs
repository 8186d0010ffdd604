//! Component hierarchies: a tree of per-design states linked by port maps.
//! Each cycle passes inputs down, simulates every child for one cycle,
//! collects outputs and then runs the enclosing design's own cycle.

use indexmap::{IndexMap, IndexSet};
use std::sync::Arc;

use crate::ast::{Design, Diagnostic, Mode, SpKind};
use crate::error::{SimError, SimResult};
use crate::kernel::{exec_sim_cyc, flip_clk, SimConfig, Trace};
use crate::model::Model;
use crate::state::SimState;
use crate::values::Val;

/// Designs by name.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub designs: IndexMap<String, Arc<Model>>,
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    /// Checks and registers designs; a later design with an existing name
    /// replaces the earlier one.
    pub fn from_designs(designs: Vec<Design>) -> Result<Registry, Vec<Diagnostic>> {
        let mut reg = Registry::new();
        let mut diags = Vec::new();
        for d in designs {
            let name = d.name.clone();
            match Model::new(d) {
                Ok(m) => {
                    reg.designs.insert(name, Arc::new(m));
                }
                Err(ds) => diags.extend(ds.into_iter().map(|x| Diagnostic {
                    message: format!("design `{name}`: {}", x.message),
                })),
            }
        }
        if diags.is_empty() {
            Ok(reg)
        } else {
            Err(diags)
        }
    }

    pub fn insert(&mut self, m: Model) {
        self.designs.insert(m.name().to_string(), Arc::new(m));
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Model>> {
        self.designs.get(name)
    }
}

/// Port bindings of one component instance, split by direction:
/// `(component port, outer signal/port)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortMap {
    pub label: String,
    pub inputs: Vec<(String, String)>,
    pub outputs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArchState {
    pub name: String,
    pub local: SimState,
    pub children: Vec<(PortMap, ArchState)>,
}

impl ArchState {
    /// Builds the state tree rooted at design `name`.
    pub fn build(reg: &Registry, name: &str, cfg: &SimConfig) -> SimResult<ArchState> {
        build_rec(reg, name, cfg, &mut Vec::new())
    }

    pub fn child(&self, label: &str) -> Option<&ArchState> {
        self.children.iter().find(|(pm, _)| pm.label == label).map(|(_, s)| s)
    }
}

fn build_rec(reg: &Registry, name: &str, cfg: &SimConfig, stack: &mut Vec<String>) -> SimResult<ArchState> {
    let Some(m) = reg.get(name) else {
        if cfg.compat_unknown_design && !stack.is_empty() {
            return Ok(ArchState {
                name: name.to_string(),
                local: SimState::new(&Model::new_unchecked(Design::new(name))),
                children: Vec::new(),
            });
        }
        return Err(SimError::Config(format!("unknown design `{name}`")));
    };
    if stack.iter().any(|s| s == name) {
        return Err(SimError::Config(format!(
            "design `{name}` instantiates itself ({} -> {name})",
            stack.join(" -> ")
        )));
    }
    stack.push(name.to_string());
    let mut children = Vec::new();
    let mut outer_driven: IndexMap<String, String> = IndexMap::new();
    for inst in &m.design.instances {
        let child = build_rec(reg, &inst.component, cfg, stack)?;
        let mut pm = PortMap {
            label: inst.label.clone(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        };
        if let Some(cm) = reg.get(&inst.component) {
            let mut mapped = IndexSet::new();
            for (cport, outer) in &inst.port_map {
                let Some(p) = cm.sigprts.get(cport).filter(|p| p.kind == SpKind::Port) else {
                    return Err(SimError::Config(format!(
                        "instance `{}`: `{}` has no port `{cport}`",
                        inst.label, inst.component
                    )));
                };
                if !mapped.insert(cport.clone()) {
                    return Err(SimError::Config(format!(
                        "instance `{}`: port `{cport}` mapped twice",
                        inst.label
                    )));
                }
                if matches!(p.mode, Mode::In | Mode::Inout) {
                    pm.inputs.push((cport.clone(), outer.clone()));
                }
                if matches!(p.mode, Mode::Out | Mode::Inout) {
                    if let Some(prev) = outer_driven.insert(outer.clone(), inst.label.clone()) {
                        return Err(SimError::Config(format!(
                            "`{outer}` is driven by instances `{prev}` and `{}` and is unresolved",
                            inst.label
                        )));
                    }
                    if !m.drivers_of(outer).is_empty() {
                        return Err(SimError::Config(format!(
                            "`{outer}` is driven by instance `{}` and by a process",
                            inst.label
                        )));
                    }
                    pm.outputs.push((cport.clone(), outer.clone()));
                }
            }
            for (pname, p) in &cm.sigprts {
                if p.kind == SpKind::Port && p.mode == Mode::In && !mapped.contains(pname) {
                    return Err(SimError::Config(format!(
                        "instance `{}`: input port `{pname}` is not mapped",
                        inst.label
                    )));
                }
            }
        }
        children.push((pm, child));
    }
    stack.pop();
    Ok(ArchState {
        name: name.to_string(),
        local: SimState::new(m),
        children,
    })
}

fn conform_to(m: &Model, name: &str, v: Val) -> SimResult<Val> {
    let ty = &m.sigprts[name].ty;
    ty.conform(v)
        .map_err(|e| SimError::eval(&format!("port `{name}` of `{}`", m.name()), e))
}

/// Schedules each child's input ports to take the current value of the
/// mapped outer signal.
pub fn pass_input_all_comps(reg: &Registry, outer: &SimState, children: &mut [(PortMap, ArchState)]) -> SimResult<()> {
    for (pm, child) in children.iter_mut() {
        let Some(cm) = reg.get(&child.name) else { continue };
        for (cport, o) in &pm.inputs {
            let v = conform_to(cm, cport, outer.sp[o].clone())?;
            child.local.eff.insert(cport.clone(), Some(v));
        }
    }
    Ok(())
}

/// Simulates every child for exactly one cycle.
pub fn sim_comps(reg: &Registry, children: &mut [(PortMap, ArchState)], cfg: &SimConfig, cycle: u64) -> SimResult<()> {
    let child_cfg = SimConfig {
        clock: None,
        trace: false,
        ..cfg.clone()
    };
    if cfg.parallel_children && children.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = children
                .iter_mut()
                .map(|(_, c)| {
                    let child_cfg = &child_cfg;
                    scope.spawn(move || step_arch(reg, c, child_cfg, &IndexSet::new(), cycle, &mut Trace::default()))
                })
                .collect();
            handles
                .into_iter()
                .try_for_each(|h| h.join().expect("component thread panicked").map(|_| ()))
        })
    } else {
        for (_, c) in children.iter_mut() {
            step_arch(reg, c, &child_cfg, &IndexSet::new(), cycle, &mut Trace::default())?;
        }
        Ok(())
    }
}

/// Schedules outer signals mapped to child output ports to take the
/// child's current port value.
pub fn get_comp_results(
    reg: &Registry,
    outer_model: &Model,
    outer: &mut SimState,
    children: &[(PortMap, ArchState)],
) -> SimResult<()> {
    for (pm, child) in children {
        if reg.get(&child.name).is_none() {
            continue;
        }
        for (cport, o) in &pm.outputs {
            let v = conform_to(outer_model, o, child.local.sp[cport].clone())?;
            outer.eff.insert(o.clone(), Some(v));
        }
    }
    Ok(())
}

/// One cycle of an architecture. Returns the number of delta iterations of
/// its own processes.
pub fn step_arch(
    reg: &Registry,
    s: &mut ArchState,
    cfg: &SimConfig,
    forced: &IndexSet<String>,
    cycle: u64,
    trace: &mut Trace,
) -> SimResult<usize> {
    let Some(m) = reg.get(&s.name).cloned() else {
        return Ok(0);
    };
    if !s.children.is_empty() {
        pass_input_all_comps(reg, &s.local, &mut s.children)?;
        sim_comps(reg, &mut s.children, cfg, cycle)?;
        get_comp_results(reg, &m, &mut s.local, &s.children)?;
    }
    let deltas = exec_sim_cyc(&m, cfg, &mut s.local, forced, cycle, trace)?;
    flip_clk(&m, &mut s.local, cfg.clock.as_deref())?;
    Ok(deltas)
}

/// `n` cycles of an architecture.
pub fn sim_arch(n: u64, reg: &Registry, s: &mut ArchState, cfg: &SimConfig, trace: &mut Trace) -> SimResult<()> {
    for c in 1..=n {
        step_arch(reg, s, cfg, &IndexSet::new(), c, trace)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::desugar::LowerOptions;
    use crate::frontend::{load_sources, SourceUnit};
    use crate::sim::Simulator;

    const SRC: &str = "
entity inc is port (a : in integer; y : out integer); end inc;
architecture r of inc is begin
  p : process (a) begin y <= a + 1; end process;
end r;
entity top is end top;
architecture r of top is
  signal s, t, u : integer := 0;
  component inc port (a : in integer; y : out integer); end component;
begin
  u1 : inc port map (a => s, y => t);
  u2 : inc port map (a => t, y => u);
end r;";

    fn registry() -> Arc<Registry> {
        let l = load_sources(vec![SourceUnit::new("t.vhd", SRC)], LowerOptions::default()).unwrap();
        assert_eq!(l.default_top().as_deref(), Some("top"));
        Arc::new(l.registry)
    }

    #[test]
    fn outputs_ripple_through_instances() {
        let mut s = Simulator::new(registry(), "top", SimConfig::default()).unwrap();
        s.set("s", Val::int(5)).unwrap();
        s.run(4).unwrap();
        assert_eq!(s.value("t"), Some(&Val::int(6)));
        assert_eq!(s.value("u"), Some(&Val::int(7)));
        let u2 = s.root.child("u2").unwrap();
        assert_eq!(u2.local.sp["a"], Val::int(6));
    }

    #[test]
    fn unknown_top_is_a_config_error() {
        let err = ArchState::build(&registry(), "nope", &SimConfig::default()).unwrap_err();
        assert!(matches!(err, SimError::Config(_)), "{err}");
    }
}
