//! Simulation state: current values, variables, effective values and
//! per-(signal, process) driving values, with the effective-value
//! computation.

use indexmap::{IndexMap, IndexSet};
use serde::Serialize;

use crate::model::Model;
use crate::values::{resolve_vals, Val};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    /// Current values of signal/port leaves.
    pub sp: IndexMap<String, Val>,
    pub vars: IndexMap<String, Val>,
    /// `None` for a multiply driven signal without a resolution function.
    pub eff: IndexMap<String, Option<Val>>,
    /// Driving values, one cell per static driver.
    pub drv: IndexMap<String, IndexMap<String, Option<Val>>>,
    pub next_flag: (String, bool),
    pub exit_flag: (String, bool),
    /// Signals whose driving values changed since the last effective-value
    /// computation.
    #[serde(skip)]
    pub touched: IndexSet<String>,
}

fn cleared() -> (String, bool) {
    (String::new(), false)
}

impl SimState {
    pub fn new(m: &Model) -> SimState {
        let sp: IndexMap<String, Val> = m.sigprts.iter().map(|(n, s)| (n.clone(), s.init.clone())).collect();
        let eff = sp.iter().map(|(n, v)| (n.clone(), Some(v.clone()))).collect();
        let drv = m
            .sigprts
            .keys()
            .filter(|n| !m.drivers_of(n).is_empty())
            .map(|n| {
                let cells = m.drivers_of(n).iter().map(|p| (p.clone(), None)).collect();
                (n.clone(), cells)
            })
            .collect();
        SimState {
            sp,
            vars: m.vars.iter().map(|(n, v)| (n.clone(), v.init.clone())).collect(),
            eff,
            drv,
            next_flag: cleared(),
            exit_flag: cleared(),
            touched: IndexSet::new(),
        }
    }

    /// Sets the driving value of `sp` for process `proc`. Only cells of
    /// static drivers exist; writes to other cells are ignored.
    pub fn set_driving(&mut self, sp: &str, proc: &str, v: Option<Val>) {
        if let Some(cell) = self.drv.get_mut(sp).and_then(|c| c.get_mut(proc)) {
            *cell = v;
            self.touched.insert(sp.to_string());
        }
    }

    pub fn driving(&self, sp: &str, proc: &str) -> Option<&Val> {
        self.drv.get(sp)?.get(proc)?.as_ref()
    }

    /// Present driving values of `sp`, in process declaration order.
    pub fn get_drivers(&self, sp: &str) -> Vec<&Val> {
        self.drv
            .get(sp)
            .map(|cells| cells.values().flatten().collect())
            .unwrap_or_default()
    }

    pub fn effective_value(&self, sp: &str, m: &Model) -> Option<Val> {
        let drivers = self.get_drivers(sp);
        match drivers.len() {
            0 => self.sp.get(sp).cloned(),
            1 => Some(drivers[0].clone()),
            _ => match m.design.res_fn.get(sp) {
                Some(_) => resolve_vals(&drivers).ok(),
                None => None,
            },
        }
    }

    /// Recomputes effective values: of every signal/port when `all` is set,
    /// otherwise only of those whose driving values changed.
    pub fn comp_eff_val(&mut self, m: &Model, all: bool) {
        let names: Vec<String> = if all {
            self.sp.keys().cloned().collect()
        } else {
            self.touched.iter().cloned().collect()
        };
        for n in names {
            let v = self.effective_value(&n, m);
            self.eff.insert(n, v);
        }
        self.touched.clear();
    }

    /// Signals/ports whose present effective value differs from the
    /// current value, in declaration order.
    pub fn active_sigprts(&self) -> IndexSet<String> {
        self.eff
            .iter()
            .filter(|(n, e)| matches!(e, Some(v) if self.sp.get(*n) != Some(v)))
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Copies present effective values of `names` to their current values,
    /// returning the signals that changed.
    pub fn update_sigprt<'a>(&mut self, names: impl IntoIterator<Item = &'a String>) -> Vec<String> {
        let mut changed = Vec::new();
        for n in names {
            if let Some(Some(v)) = self.eff.get(n) {
                if self.sp.get(n) != Some(v) {
                    self.sp.insert(n.clone(), v.clone());
                    changed.push(n.clone());
                }
            }
        }
        changed
    }

    pub fn update_all(&mut self) -> Vec<String> {
        let names: Vec<String> = self.sp.keys().cloned().collect();
        self.update_sigprt(&names)
    }

    pub fn clear_flags(&mut self) {
        self.next_flag = cleared();
        self.exit_flag = cleared();
    }

    pub fn flags_clear(&self) -> bool {
        self.next_flag == cleared() && self.exit_flag == cleared()
    }
}

/// Builds the initial state of a design.
pub fn init_state(m: &Model) -> SimState {
    SimState::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::*;
    use crate::logic9::Logic9;
    use crate::types::Type;

    fn two_driver_design(resolved: bool) -> Model {
        let mut d = Design::new("t");
        d.env.sigprts.push(Tree::Leaf(SigPrt {
            name: "s".into(),
            kind: SpKind::Signal,
            mode: Mode::Internal,
            ty: Type::Logic,
            init: Val::logic(Logic9::U),
        }));
        for p in ["p1", "p2"] {
            d.processes.push(Process {
                name: p.into(),
                sensitivity: vec![],
                body: vec![SeqStmt::SstSa(
                    String::new(),
                    Lhs::whole("s"),
                    AsmtRhs::RhsE(Expr::con(Val::logic(Logic9::Z))),
                )],
            });
        }
        if resolved {
            d.res_fn.insert("s".into(), "resolved".into());
        }
        Model::new(d).unwrap()
    }

    #[test]
    fn fresh_state_is_quiescent() {
        let m = two_driver_design(true);
        let st = init_state(&m);
        assert!(st.get_drivers("s").is_empty());
        assert!(st.active_sigprts().is_empty());
        assert!(st.flags_clear());
        assert_eq!(st.effective_value("s", &m), Some(Val::logic(Logic9::U)));
    }

    #[test]
    fn drivers_in_declaration_order() {
        let m = two_driver_design(true);
        let mut st = init_state(&m);
        st.set_driving("s", "p2", Some(Val::logic(Logic9::One)));
        assert_eq!(st.get_drivers("s"), vec![&Val::logic(Logic9::One)]);
        st.set_driving("s", "p1", Some(Val::logic(Logic9::Zero)));
        assert_eq!(
            st.get_drivers("s"),
            vec![&Val::logic(Logic9::Zero), &Val::logic(Logic9::One)]
        );
        assert_eq!(st.effective_value("s", &m), Some(Val::logic(Logic9::X)));
    }

    #[test]
    fn unresolved_multiple_drivers_are_absent() {
        let m = two_driver_design(false);
        let mut st = init_state(&m);
        st.set_driving("s", "p1", Some(Val::logic(Logic9::Zero)));
        st.set_driving("s", "p2", Some(Val::logic(Logic9::Zero)));
        st.comp_eff_val(&m, false);
        assert_eq!(st.eff["s"], None);
        assert!(st.active_sigprts().is_empty());
        assert!(st.update_all().is_empty());
    }

    #[test]
    fn last_write_wins() {
        let m = two_driver_design(true);
        let mut st = init_state(&m);
        st.set_driving("s", "p1", Some(Val::logic(Logic9::One)));
        st.set_driving("s", "p1", Some(Val::logic(Logic9::H)));
        assert_eq!(st.driving("s", "p1"), Some(&Val::logic(Logic9::H)));
        assert_eq!(st.driving("s", "p2"), None);
        // not a static driver: no cell
        st.set_driving("s", "p3", Some(Val::logic(Logic9::One)));
        assert!(!st.drv["s"].contains_key("p3"));
    }

    #[test]
    fn update_promotes_and_is_idempotent() {
        let m = two_driver_design(true);
        let mut st = init_state(&m);
        st.set_driving("s", "p1", Some(Val::logic(Logic9::One)));
        st.comp_eff_val(&m, false);
        assert_eq!(st.active_sigprts().into_iter().collect::<Vec<_>>(), ["s"]);
        assert_eq!(st.update_all(), ["s"]);
        let once = st.clone();
        st.update_all();
        assert_eq!(st, once);
        assert!(st.active_sigprts().is_empty());
    }
}
