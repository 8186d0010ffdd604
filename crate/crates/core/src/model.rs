//! A checked design together with the lookup tables the interpreter needs:
//! leaf and record-group indices, static drivers, expanded sensitivity sets
//! and subprogram variable frames.

use indexmap::{IndexMap, IndexSet};
use std::collections::HashMap;

use crate::ast::{self, check_design, Design, Diagnostic, SigPrt, Tree, VarDecl};

/// Member of a record group: `(local field name, qualified name)`.
pub type Member = (String, String);

#[derive(Debug, Clone)]
pub struct Model {
    pub design: Design,
    pub sigprts: IndexMap<String, SigPrt>,
    pub sp_groups: HashMap<String, Vec<Member>>,
    pub vars: IndexMap<String, VarDecl>,
    pub var_groups: HashMap<String, Vec<Member>>,
    /// Leaf signal/port to the processes that statically drive it, in
    /// process declaration order.
    pub drivers: HashMap<String, Vec<String>>,
    /// Expanded (leaf) sensitivity set per process, aligned with
    /// `design.processes`.
    pub sensitivity: Vec<IndexSet<String>>,
    /// Variables saved and restored around each call of a subprogram.
    pub frames: HashMap<String, Vec<String>>,
}

fn index_tree<T: ast::Named + Clone>(
    t: &Tree<T>,
    prefix: &str,
    leaves: &mut IndexMap<String, T>,
    groups: &mut HashMap<String, Vec<Member>>,
) -> String {
    match t {
        Tree::Leaf(x) => {
            leaves.insert(x.name().to_string(), x.clone());
            x.name().to_string()
        }
        Tree::Spnl(n, kids) => {
            let full = if prefix.is_empty() {
                n.clone()
            } else {
                format!("{prefix}.{n}")
            };
            let members = kids
                .iter()
                .map(|k| {
                    let q = index_tree(k, &full, leaves, groups);
                    (k.local().to_string(), q)
                })
                .collect();
            groups.insert(full.clone(), members);
            full
        }
    }
}

impl Model {
    pub fn new(design: Design) -> Result<Model, Vec<Diagnostic>> {
        let diags = check_design(&design);
        if !diags.is_empty() {
            return Err(diags);
        }
        Ok(Model::new_unchecked(design))
    }

    /// Builds the indices without running the well-formedness checks.
    pub fn new_unchecked(design: Design) -> Model {
        let mut sigprts = IndexMap::new();
        let mut sp_groups = HashMap::new();
        for t in &design.env.sigprts {
            index_tree(t, "", &mut sigprts, &mut sp_groups);
        }
        let mut vars = IndexMap::new();
        let mut var_groups = HashMap::new();
        for t in &design.env.vars {
            let prefix = ast::var_root_prefix(t);
            index_tree(t, &prefix, &mut vars, &mut var_groups);
        }
        let mut m = Model {
            design,
            sigprts,
            sp_groups,
            vars,
            var_groups,
            drivers: HashMap::new(),
            sensitivity: Vec::new(),
            frames: HashMap::new(),
        };
        let mut drivers: HashMap<String, Vec<String>> = HashMap::new();
        let mut sensitivity = Vec::new();
        for p in &m.design.processes {
            let mut targets = IndexSet::new();
            for s in &p.body {
                s.for_each_stmt(&mut |x| {
                    if let ast::SeqStmt::SstSa(_, l, _) = x {
                        for leaf in m.sp_leaves(&l.name) {
                            targets.insert(leaf);
                        }
                    }
                });
            }
            for t in targets {
                drivers.entry(t).or_default().push(p.name.clone());
            }
            sensitivity.push(
                p.sensitivity
                    .iter()
                    .flat_map(|s| m.sp_leaves(s))
                    .collect::<IndexSet<_>>(),
            );
        }
        let frames = m
            .design
            .subprograms
            .iter()
            .map(|sp| {
                let prefix = format!("{}.", sp.name);
                let names = m.vars.keys().filter(|v| v.starts_with(&prefix)).cloned().collect();
                (sp.name.clone(), names)
            })
            .collect();
        m.drivers = drivers;
        m.sensitivity = sensitivity;
        m.frames = frames;
        m
    }

    pub fn name(&self) -> &str {
        &self.design.name
    }

    /// Leaf names under a signal/port name (the name itself for a leaf).
    pub fn sp_leaves(&self, name: &str) -> Vec<String> {
        leaves_of(name, &self.sigprts, &self.sp_groups)
    }

    pub fn var_leaves(&self, name: &str) -> Vec<String> {
        leaves_of(name, &self.vars, &self.var_groups)
    }

    pub fn drivers_of(&self, sp: &str) -> &[String] {
        self.drivers.get(sp).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_driver(&self, sp: &str, proc: &str) -> bool {
        self.drivers_of(sp).iter().any(|p| p == proc)
    }

    /// True when process `idx` is sensitive to any of `active`.
    pub fn is_sensitive(&self, idx: usize, active: &IndexSet<String>) -> bool {
        let sens = &self.sensitivity[idx];
        if sens.len() <= active.len() {
            sens.iter().any(|s| active.contains(s))
        } else {
            active.iter().any(|s| sens.contains(s))
        }
    }

    /// The `has_active_process` predicate.
    pub fn has_active_process(&self, active: &IndexSet<String>) -> bool {
        (0..self.design.processes.len()).any(|i| self.is_sensitive(i, active))
    }
}

fn leaves_of<T>(name: &str, leaves: &IndexMap<String, T>, groups: &HashMap<String, Vec<Member>>) -> Vec<String> {
    if leaves.contains_key(name) {
        return vec![name.to_string()];
    }
    match groups.get(name) {
        Some(members) => members.iter().flat_map(|(_, q)| leaves_of(q, leaves, groups)).collect(),
        None => Vec::new(),
    }
}
