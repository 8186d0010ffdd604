//! Core syntax: expressions, sequential statements, processes, subprograms
//! and the design description, plus static well-formedness checks.
//!
//! Names are fully qualified and lower case. Signals and ports are keyed by
//! their leaf names (`r.state` for a record field), process variables by
//! `process.var`, subprogram formals and locals by `subprogram.var`.
//! Vector indices in expressions and assignment ranges are zero-based
//! logical positions; the front end subtracts declared low bounds.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::types::{Dir, ScalarKind, Type};
use crate::values::{ArithOp, LogicOp, RelOp, ShiftOp, UnOp, Val};

/// A tree of leaves grouped by record names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tree<T> {
    Leaf(T),
    /// `(local name, members)`.
    Spnl(String, Vec<Tree<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpKind {
    Signal,
    Port,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    In,
    Out,
    Inout,
    Internal,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::In => "in",
            Mode::Out => "out",
            Mode::Inout => "inout",
            Mode::Internal => "internal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigPrt {
    pub name: String,
    pub kind: SpKind,
    pub mode: Mode,
    pub ty: Type,
    pub init: Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
    pub init: Val,
}

pub type Spl = Tree<SigPrt>;
pub type VarTree = Tree<VarDecl>;

/// Anything stored in a leaf of a declaration tree.
pub trait Named {
    fn name(&self) -> &str;
}

impl Named for SigPrt {
    fn name(&self) -> &str {
        &self.name
    }
}

impl Named for VarDecl {
    fn name(&self) -> &str {
        &self.name
    }
}

fn local_name(full: &str) -> &str {
    full.rsplit('.').next().unwrap_or(full)
}

impl<T: Named> Tree<T> {
    /// Local name of the root: the group name or the last segment of the
    /// leaf's qualified name.
    pub fn local(&self) -> &str {
        match self {
            Tree::Leaf(t) => local_name(t.name()),
            Tree::Spnl(n, _) => n,
        }
    }

    pub fn leaves(&self) -> Vec<&T> {
        let mut out = Vec::new();
        fn go<'a, T>(t: &'a Tree<T>, out: &mut Vec<&'a T>) {
            match t {
                Tree::Leaf(x) => out.push(x),
                Tree::Spnl(_, kids) => kids.iter().for_each(|k| go(k, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

/// Left-to-right leaf enumeration of a signal/port tree.
pub fn flatten_spl(s: &Spl) -> Vec<SigPrt> {
    s.leaves().into_iter().cloned().collect()
}

/// Follows record field names from the root of `s`.
pub fn record_field<'a, T: Named>(s: &'a Tree<T>, path: &[&str]) -> Result<&'a Tree<T>, String> {
    let mut cur = s;
    for step in path {
        match cur {
            Tree::Spnl(_, kids) => {
                cur = kids
                    .iter()
                    .find(|k| k.local() == *step)
                    .ok_or_else(|| format!("unknown field `{step}`"))?;
            }
            Tree::Leaf(t) => return Err(format!("`{}` is not a record, no field `{step}`", t.name())),
        }
    }
    Ok(cur)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Uexp(UnOp, Box<Expr>),
    Bexpl(Box<Expr>, LogicOp, Box<Expr>),
    Bexpr(Box<Expr>, RelOp, Box<Expr>),
    Bexps(Box<Expr>, ShiftOp, Box<Expr>),
    Bexpa(Box<Expr>, ArithOp, Box<Expr>),
    ExpSig(String),
    ExpPrt(String),
    ExpVar(String),
    ExpCon(Val),
    /// `(vector, index)`.
    ExpNth(Box<Expr>, Box<Expr>),
    /// `(vector, start, length)`.
    ExpSl(Box<Expr>, Box<Expr>, Box<Expr>),
    ExpTl(Box<Expr>),
    ExpTrl(Box<Expr>),
    /// Record aggregate, fields in declaration order.
    ExpR(Vec<(String, AsmtRhs)>),
}

impl Expr {
    pub fn con(v: Val) -> Expr {
        Expr::ExpCon(v)
    }

    pub fn int(i: i64) -> Expr {
        Expr::ExpCon(Val::int(i))
    }

    pub fn var(n: impl Into<String>) -> Expr {
        Expr::ExpVar(n.into())
    }

    pub fn sig(n: impl Into<String>) -> Expr {
        Expr::ExpSig(n.into())
    }

    pub fn prt(n: impl Into<String>) -> Expr {
        Expr::ExpPrt(n.into())
    }

    pub fn arith(a: Expr, op: ArithOp, b: Expr) -> Expr {
        Expr::Bexpa(Box::new(a), op, Box::new(b))
    }

    pub fn rel(a: Expr, op: RelOp, b: Expr) -> Expr {
        Expr::Bexpr(Box::new(a), op, Box::new(b))
    }

    pub fn logic(a: Expr, op: LogicOp, b: Expr) -> Expr {
        Expr::Bexpl(Box::new(a), op, Box::new(b))
    }

    pub fn shift(a: Expr, op: ShiftOp, b: Expr) -> Expr {
        Expr::Bexps(Box::new(a), op, Box::new(b))
    }

    pub fn unop(op: UnOp, a: Expr) -> Expr {
        Expr::Uexp(op, Box::new(a))
    }

    pub fn nth(v: Expr, i: Expr) -> Expr {
        Expr::ExpNth(Box::new(v), Box::new(i))
    }

    pub fn slice(v: Expr, start: Expr, len: Expr) -> Expr {
        Expr::ExpSl(Box::new(v), Box::new(start), Box::new(len))
    }

    /// Post-order traversal of all subexpressions (including `self`).
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Expr::Uexp(_, a) | Expr::ExpTl(a) | Expr::ExpTrl(a) => a.walk(f),
            Expr::Bexpl(a, _, b)
            | Expr::Bexpr(a, _, b)
            | Expr::Bexps(a, _, b)
            | Expr::Bexpa(a, _, b)
            | Expr::ExpNth(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::ExpSl(a, b, c) => {
                a.walk(f);
                b.walk(f);
                c.walk(f);
            }
            Expr::ExpR(fields) => fields.iter().for_each(|(_, r)| r.expr().walk(f)),
            Expr::ExpSig(_) | Expr::ExpPrt(_) | Expr::ExpVar(_) | Expr::ExpCon(_) => {}
        }
        f(self)
    }

    /// Rewrites subexpressions bottom-up; `f` may replace a node in place.
    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        match self {
            Expr::Uexp(_, a) | Expr::ExpTl(a) | Expr::ExpTrl(a) => a.walk_mut(f),
            Expr::Bexpl(a, _, b)
            | Expr::Bexpr(a, _, b)
            | Expr::Bexps(a, _, b)
            | Expr::Bexpa(a, _, b)
            | Expr::ExpNth(a, b) => {
                a.walk_mut(f);
                b.walk_mut(f);
            }
            Expr::ExpSl(a, b, c) => {
                a.walk_mut(f);
                b.walk_mut(f);
                c.walk_mut(f);
            }
            Expr::ExpR(fields) => fields.iter_mut().for_each(|(_, r)| r.expr_mut().walk_mut(f)),
            Expr::ExpSig(_) | Expr::ExpPrt(_) | Expr::ExpVar(_) | Expr::ExpCon(_) => {}
        }
        f(self)
    }

    /// Names of signals and ports read by the expression, in first-use order.
    pub fn signals_read(&self, out: &mut Vec<String>) {
        self.walk(&mut |e| {
            if let Expr::ExpSig(n) | Expr::ExpPrt(n) = e {
                if !out.contains(n) {
                    out.push(n.clone());
                }
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsmtRhs {
    RhsE(Expr),
    /// `others => e`
    RhsO(Expr),
}

impl AsmtRhs {
    pub fn expr(&self) -> &Expr {
        match self {
            AsmtRhs::RhsE(e) | AsmtRhs::RhsO(e) => e,
        }
    }

    pub fn expr_mut(&mut self) -> &mut Expr {
        match self {
            AsmtRhs::RhsE(e) | AsmtRhs::RhsO(e) => e,
        }
    }
}

/// Storage positions `lo..=hi` of the target vector. `dir` records how the
/// range was written, which decides how the right-hand side is laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteRange {
    pub lo: Expr,
    pub hi: Expr,
    pub dir: Dir,
}

/// Assignment target: a leaf or record name, optionally restricted to a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lhs {
    pub name: String,
    pub range: Option<DiscreteRange>,
}

impl Lhs {
    pub fn whole(name: impl Into<String>) -> Lhs {
        Lhs {
            name: name.into(),
            range: None,
        }
    }
}

pub type SpLhs = Lhs;
pub type VLhs = Lhs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubProgCall {
    pub callee: String,
    pub args: Vec<VLhs>,
    pub ret_type: Option<Type>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqStmt {
    SstSa(String, SpLhs, AsmtRhs),
    SstVa(String, VLhs, AsmtRhs),
    SstIf(String, Expr, Vec<SeqStmt>, Vec<SeqStmt>),
    SstL(String, Expr, Vec<SeqStmt>),
    SstFn(String, VLhs, SubProgCall),
    SstRt(String, AsmtRhs),
    SstPc(String, SubProgCall),
    /// `(statement name, loop name, condition)`
    SstN(String, String, Expr),
    SstE(String, String, Expr),
    SstNl,
}

impl SeqStmt {
    /// Visits every expression in the statement tree, including range
    /// bounds of targets.
    pub fn for_each_expr(&self, f: &mut impl FnMut(&Expr)) {
        let lhs = |l: &Lhs, f: &mut dyn FnMut(&Expr)| {
            if let Some(r) = &l.range {
                f(&r.lo);
                f(&r.hi);
            }
        };
        match self {
            SeqStmt::SstSa(_, l, r) | SeqStmt::SstVa(_, l, r) => {
                lhs(l, f);
                f(r.expr());
            }
            SeqStmt::SstIf(_, c, t, e) => {
                f(c);
                t.iter().chain(e).for_each(|s| s.for_each_expr(f));
            }
            SeqStmt::SstL(_, c, b) => {
                f(c);
                b.iter().for_each(|s| s.for_each_expr(f));
            }
            SeqStmt::SstFn(_, l, call) => {
                lhs(l, f);
                call.args.iter().for_each(|a| lhs(a, f));
            }
            SeqStmt::SstPc(_, call) => call.args.iter().for_each(|a| lhs(a, f)),
            SeqStmt::SstRt(_, r) => f(r.expr()),
            SeqStmt::SstN(_, _, c) | SeqStmt::SstE(_, _, c) => f(c),
            SeqStmt::SstNl => {}
        }
    }

    pub fn map_exprs(&mut self, f: &mut impl FnMut(&mut Expr)) {
        fn lhs(l: &mut Lhs, f: &mut impl FnMut(&mut Expr)) {
            if let Some(r) = &mut l.range {
                f(&mut r.lo);
                f(&mut r.hi);
            }
        }
        match self {
            SeqStmt::SstSa(_, l, r) | SeqStmt::SstVa(_, l, r) => {
                lhs(l, f);
                f(r.expr_mut());
            }
            SeqStmt::SstIf(_, c, t, e) => {
                f(c);
                t.iter_mut().chain(e).for_each(|s| s.map_exprs(f));
            }
            SeqStmt::SstL(_, c, b) => {
                f(c);
                b.iter_mut().for_each(|s| s.map_exprs(f));
            }
            SeqStmt::SstFn(_, l, call) => {
                lhs(l, f);
                call.args.iter_mut().for_each(|a| lhs(a, f));
            }
            SeqStmt::SstPc(_, call) => call.args.iter_mut().for_each(|a| lhs(a, f)),
            SeqStmt::SstRt(_, r) => f(r.expr_mut()),
            SeqStmt::SstN(_, _, c) | SeqStmt::SstE(_, _, c) => f(c),
            SeqStmt::SstNl => {}
        }
    }

    /// Visits this statement and all nested ones.
    pub fn for_each_stmt<'a>(&'a self, f: &mut impl FnMut(&'a SeqStmt)) {
        f(self);
        match self {
            SeqStmt::SstIf(_, _, t, e) => t.iter().chain(e).for_each(|s| s.for_each_stmt(f)),
            SeqStmt::SstL(_, _, b) => b.iter().for_each(|s| s.for_each_stmt(f)),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Process {
    pub name: String,
    /// Signal/port names; a record name stands for all of its leaves.
    pub sensitivity: Vec<String>,
    pub body: Vec<SeqStmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubprogramKind {
    Function,
    Procedure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Formal {
    /// Qualified `subprogram.param`.
    pub name: String,
    pub mode: Mode,
    pub ty: Type,
}

/// A function or procedure. Formals and locals live in the global variable
/// environment under the subprogram's name prefix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subprogram {
    pub name: String,
    pub kind: SubprogramKind,
    pub formals: Vec<Formal>,
    pub ret_type: Option<Type>,
    pub body: Vec<SeqStmt>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub label: String,
    pub component: String,
    /// `(component port, outer signal/port)`.
    pub port_map: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Env {
    pub sigprts: Vec<Spl>,
    pub vars: Vec<VarTree>,
    pub types: IndexMap<String, Type>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub name: String,
    pub env: Env,
    /// Leaf signal/port name to resolution function name.
    pub res_fn: IndexMap<String, String>,
    pub processes: Vec<Process>,
    pub subprograms: Vec<Subprogram>,
    pub instances: Vec<Instance>,
}

impl Design {
    pub fn new(name: impl Into<String>) -> Design {
        Design {
            name: name.into(),
            env: Env::default(),
            res_fn: IndexMap::new(),
            processes: Vec::new(),
            subprograms: Vec::new(),
            instances: Vec::new(),
        }
    }

    pub fn sigprts(&self) -> Vec<&SigPrt> {
        self.env.sigprts.iter().flat_map(|t| t.leaves()).collect()
    }

    pub fn vars(&self) -> Vec<&VarDecl> {
        self.env.vars.iter().flat_map(|t| t.leaves()).collect()
    }

    pub fn process(&self, name: &str) -> Option<&Process> {
        self.processes.iter().find(|p| p.name == name)
    }

    pub fn subprogram(&self, name: &str) -> Option<&Subprogram> {
        self.subprograms.iter().find(|s| s.name == name)
    }
}

// ---------------------------------------------------------------------------
// Well-formedness

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Statically known shape of an expression, where it can be determined
/// without running the design.
#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Scalar(ScalarKind),
    Vector(Option<usize>, Option<ScalarKind>),
    Record(Vec<String>),
}

fn shape_of_type(t: &Type) -> Shape {
    match t {
        Type::Vector { elem, .. } => Shape::Vector(t.len(), elem.scalar_kind()),
        Type::Record { fields } => Shape::Record(fields.iter().map(|(n, _)| n.clone()).collect()),
        t => Shape::Scalar(t.scalar_kind().expect("scalar type")),
    }
}

fn shape_of_val(v: &Val) -> Shape {
    match v {
        Val::Scalar(s) => Shape::Scalar(s.kind()),
        Val::VecTo(_) | Val::VecDownto(_) => Shape::Vector(Some(v.len()), v.elem_kind()),
        Val::Record(f) => Shape::Record(f.iter().map(|(n, _)| n.clone()).collect()),
    }
}

fn shapes_conflict(target: &Shape, rhs: &Shape) -> bool {
    match (target, rhs) {
        (Shape::Scalar(a), Shape::Scalar(b)) => a != b,
        (Shape::Vector(la, ka), Shape::Vector(lb, kb)) => {
            matches!((la, lb), (Some(x), Some(y)) if x != y) || matches!((ka, kb), (Some(x), Some(y)) if x != y)
        }
        (Shape::Record(a), Shape::Record(b)) => a != b,
        _ => true,
    }
}

struct Checker<'d> {
    design: &'d Design,
    sigprts: HashMap<String, &'d SigPrt>,
    /// Record group names (qualified) for signals/ports and variables.
    sp_groups: HashMap<String, Type>,
    vars: HashMap<String, &'d VarDecl>,
    var_groups: HashMap<String, Type>,
    diags: Vec<Diagnostic>,
}

fn collect_groups<T: Named>(
    t: &Tree<T>,
    prefix: &str,
    ty_of: &dyn Fn(&T) -> Type,
    out: &mut HashMap<String, Type>,
) -> Type {
    match t {
        Tree::Leaf(x) => ty_of(x),
        Tree::Spnl(n, kids) => {
            let full = if prefix.is_empty() {
                n.clone()
            } else {
                format!("{prefix}.{n}")
            };
            let fields = kids
                .iter()
                .map(|k| {
                    let kt = collect_groups(k, &full, ty_of, out);
                    (k.local().to_string(), kt)
                })
                .collect();
            let ty = Type::Record { fields };
            out.insert(full, ty.clone());
            ty
        }
    }
}

/// Qualified prefix of a variable tree root (`proc.v` has prefix `proc`).
pub(crate) fn var_root_prefix(t: &VarTree) -> String {
    // leaves carry fully qualified names; strip the group path of the
    // first leaf, reached through first members only
    fn depth(t: &VarTree) -> usize {
        match t {
            Tree::Leaf(_) => 0,
            Tree::Spnl(_, k) => 1 + k.first().map(depth).unwrap_or(0),
        }
    }
    let leaf = t.leaves().first().map(|v| v.name.clone()).unwrap_or_default();
    let parts: Vec<&str> = leaf.split('.').collect();
    parts[..parts.len().saturating_sub(depth(t) + 1)].join(".")
}

impl<'d> Checker<'d> {
    fn new(design: &'d Design) -> Self {
        let mut sp_groups = HashMap::new();
        for t in &design.env.sigprts {
            collect_groups(t, "", &|s: &SigPrt| s.ty.clone(), &mut sp_groups);
        }
        let mut var_groups = HashMap::new();
        for t in &design.env.vars {
            let prefix = var_root_prefix(t);
            collect_groups(t, &prefix, &|v: &VarDecl| v.ty.clone(), &mut var_groups);
        }
        Checker {
            design,
            sigprts: design.sigprts().into_iter().map(|s| (s.name.clone(), s)).collect(),
            sp_groups,
            vars: design.vars().into_iter().map(|v| (v.name.clone(), v)).collect(),
            var_groups,
            diags: Vec::new(),
        }
    }

    fn err(&mut self, msg: String) {
        self.diags.push(Diagnostic { message: msg });
    }

    fn sp_type(&self, name: &str) -> Option<Type> {
        self.sigprts
            .get(name)
            .map(|s| s.ty.clone())
            .or_else(|| self.sp_groups.get(name).cloned())
    }

    fn var_type(&self, name: &str) -> Option<Type> {
        self.vars
            .get(name)
            .map(|v| v.ty.clone())
            .or_else(|| self.var_groups.get(name).cloned())
    }

    fn shape(&self, e: &Expr) -> Option<Shape> {
        match e {
            Expr::ExpCon(v) => Some(shape_of_val(v)),
            Expr::ExpSig(n) | Expr::ExpPrt(n) => self.sp_type(n).map(|t| shape_of_type(&t)),
            Expr::ExpVar(n) => self.var_type(n).map(|t| shape_of_type(&t)),
            Expr::Bexpr(..) => Some(Shape::Scalar(ScalarKind::Bool)),
            _ => None,
        }
    }

    fn check_expr(&mut self, ctx: &str, e: &Expr) {
        let mut problems = Vec::new();
        e.walk(&mut |x| match x {
            Expr::ExpSig(n) => match self.sigprts.get(n.as_str()) {
                Some(s) if s.kind == SpKind::Signal => {}
                Some(_) => problems.push(format!("{ctx}: `{n}` is a port, read as a signal")),
                None if self.sp_groups.contains_key(n.as_str()) => {}
                None => problems.push(format!("{ctx}: undeclared signal `{n}`")),
            },
            Expr::ExpPrt(n) => match self.sigprts.get(n.as_str()) {
                Some(s) if s.kind == SpKind::Port => {
                    if s.mode == Mode::Out {
                        problems.push(format!("{ctx}: out port `{n}` cannot be read"));
                    }
                }
                Some(_) => problems.push(format!("{ctx}: `{n}` is a signal, read as a port")),
                None => problems.push(format!("{ctx}: undeclared port `{n}`")),
            },
            Expr::ExpVar(n) if !self.vars.contains_key(n.as_str()) && !self.var_groups.contains_key(n.as_str()) => {
                problems.push(format!("{ctx}: undeclared variable `{n}`"));
            }
            _ => {}
        });
        for p in problems {
            self.err(p);
        }
    }

    fn check_rhs_shape(&mut self, ctx: &str, target: Option<Type>, ranged: bool, rhs: &AsmtRhs) {
        let Some(t) = target else { return };
        match rhs {
            AsmtRhs::RhsO(e) => {
                if !ranged && !t.is_vector() {
                    self.err(format!("{ctx}: `others` aggregate assigned to non-vector target"));
                    return;
                }
                if let (Some(Shape::Scalar(k)), Some(ek)) = (self.shape(e), t.elem().and_then(|x| x.scalar_kind())) {
                    if k != ek {
                        self.err(format!("{ctx}: `others` element {k} does not match {ek}"));
                    }
                }
            }
            AsmtRhs::RhsE(e) => {
                if ranged {
                    return;
                }
                if let Some(s) = self.shape(e) {
                    let ts = shape_of_type(&t);
                    if shapes_conflict(&ts, &s) {
                        self.err(format!("{ctx}: right-hand side does not match target type {t}"));
                    }
                }
            }
        }
    }

    fn check_body(&mut self, owner: &str, in_subprogram: Option<&Subprogram>, body: &[SeqStmt]) {
        let mut loops: Vec<String> = Vec::new();
        let mut seen_loops = HashSet::new();
        for s in body {
            self.check_stmt(owner, in_subprogram, s, &mut loops, &mut seen_loops);
        }
    }

    fn check_lhs(&mut self, ctx: &str, l: &Lhs) {
        if let Some(r) = &l.range {
            self.check_expr(ctx, &r.lo);
            self.check_expr(ctx, &r.hi);
        }
    }

    fn check_stmt(
        &mut self,
        owner: &str,
        sub: Option<&Subprogram>,
        s: &SeqStmt,
        loops: &mut Vec<String>,
        seen_loops: &mut HashSet<String>,
    ) {
        let ctx = owner.to_string();
        match s {
            SeqStmt::SstSa(_, l, r) => {
                if sub.is_some() {
                    self.err(format!("{ctx}: signal assignment inside a subprogram"));
                }
                self.check_lhs(&ctx, l);
                match self.sigprts.get(l.name.as_str()) {
                    Some(sp) if sp.mode == Mode::In => self.err(format!("{ctx}: assignment to in port `{}`", l.name)),
                    Some(_) => {}
                    None if self.sp_groups.contains_key(&l.name) => {
                        let in_leaf = self
                            .sigprts
                            .iter()
                            .any(|(n, sp)| n.starts_with(&format!("{}.", l.name)) && sp.mode == Mode::In);
                        if in_leaf {
                            self.err(format!("{ctx}: assignment to in port `{}`", l.name));
                        }
                    }
                    None => self.err(format!("{ctx}: undeclared signal `{}`", l.name)),
                }
                self.check_expr(&ctx, r.expr());
                let t = self.sp_type(&l.name);
                self.check_rhs_shape(&ctx, t, l.range.is_some(), r);
            }
            SeqStmt::SstVa(_, l, r) => {
                self.check_lhs(&ctx, l);
                if self.var_type(&l.name).is_none() {
                    self.err(format!("{ctx}: undeclared variable `{}`", l.name));
                }
                self.check_expr(&ctx, r.expr());
                let t = self.var_type(&l.name);
                self.check_rhs_shape(&ctx, t, l.range.is_some(), r);
            }
            SeqStmt::SstIf(_, c, t, e) => {
                self.check_expr(&ctx, c);
                if let Some(sh) = self.shape(c) {
                    if sh != Shape::Scalar(ScalarKind::Bool) {
                        self.err(format!("{ctx}: condition is not boolean"));
                    }
                }
                for x in t.iter().chain(e) {
                    self.check_stmt(owner, sub, x, loops, seen_loops);
                }
            }
            SeqStmt::SstL(n, c, b) => {
                if n.is_empty() {
                    self.err(format!("{ctx}: loop without a name"));
                } else if !seen_loops.insert(n.clone()) {
                    self.err(format!("{ctx}: duplicate loop name `{n}`"));
                }
                self.check_expr(&ctx, c);
                loops.push(n.clone());
                for x in b {
                    self.check_stmt(owner, sub, x, loops, seen_loops);
                }
                loops.pop();
            }
            SeqStmt::SstN(_, target, c) | SeqStmt::SstE(_, target, c) => {
                self.check_expr(&ctx, c);
                if !loops.contains(target) {
                    self.err(format!("{ctx}: unknown loop `{target}`"));
                }
            }
            SeqStmt::SstFn(_, l, call) => {
                self.check_lhs(&ctx, l);
                if self.var_type(&l.name).is_none() {
                    self.err(format!("{ctx}: undeclared variable `{}`", l.name));
                }
                self.check_call(&ctx, call, SubprogramKind::Function);
            }
            SeqStmt::SstPc(_, call) => self.check_call(&ctx, call, SubprogramKind::Procedure),
            SeqStmt::SstRt(_, r) => {
                match sub {
                    Some(sp) if sp.kind == SubprogramKind::Function => {}
                    _ => self.err(format!("{ctx}: return outside a function")),
                }
                self.check_expr(&ctx, r.expr());
            }
            SeqStmt::SstNl => {}
        }
    }

    fn check_call(&mut self, ctx: &str, call: &SubProgCall, kind: SubprogramKind) {
        for a in &call.args {
            self.check_lhs(ctx, a);
            if self.var_type(&a.name).is_none() {
                self.err(format!("{ctx}: call argument `{}` is not a variable", a.name));
            }
        }
        match self.design.subprogram(&call.callee) {
            None => self.err(format!("{ctx}: unknown subprogram `{}`", call.callee)),
            Some(sp) => {
                if sp.kind != kind {
                    self.err(format!("{ctx}: `{}` is not a {:?}", call.callee, kind).to_lowercase());
                }
                if sp.formals.len() != call.args.len() {
                    self.err(format!(
                        "{ctx}: `{}` expects {} arguments, got {}",
                        call.callee,
                        sp.formals.len(),
                        call.args.len()
                    ));
                }
            }
        }
    }
}

/// True when every path through `body` ends in a return.
pub fn always_returns(body: &[SeqStmt]) -> bool {
    body.iter().any(|s| match s {
        SeqStmt::SstRt(..) => true,
        SeqStmt::SstIf(_, _, t, e) => always_returns(t) && always_returns(e),
        _ => false,
    })
}

/// Static well-formedness diagnostics; empty when the design is well formed.
pub fn check_design(d: &Design) -> Vec<Diagnostic> {
    let mut c = Checker::new(d);
    let mut names = HashSet::new();
    for s in d.sigprts() {
        if !names.insert(s.name.clone()) {
            c.err(format!("duplicate signal/port `{}`", s.name));
        }
        match (s.kind, s.mode) {
            (SpKind::Port, Mode::Internal) => c.err(format!("port `{}` has no mode", s.name)),
            (SpKind::Signal, m) if m != Mode::Internal => c.err(format!("signal `{}` has port mode {m}", s.name)),
            _ => {}
        }
        if s.ty.is_record() {
            c.err(format!("record leaf `{}` must be flattened", s.name));
        }
    }
    let mut procs = HashSet::new();
    for p in &d.processes {
        if !procs.insert(p.name.as_str()) {
            c.err(format!("duplicate process name `{}`", p.name));
        }
        for s in &p.sensitivity {
            if !c.sigprts.contains_key(s.as_str()) && !c.sp_groups.contains_key(s.as_str()) {
                c.err(format!(
                    "process `{}`: sensitivity list names undeclared signal `{s}`",
                    p.name
                ));
            }
        }
        c.check_body(&format!("process `{}`", p.name), None, &p.body);
    }
    let mut subs = HashSet::new();
    for sp in &d.subprograms {
        if !subs.insert(sp.name.as_str()) {
            c.err(format!("duplicate subprogram name `{}`", sp.name));
        }
        for f in &sp.formals {
            if !c.vars.contains_key(f.name.as_str()) {
                c.err(format!(
                    "{} `{}`: formal `{}` is not declared",
                    kind_word(sp),
                    sp.name,
                    f.name
                ));
            }
        }
        if sp.kind == SubprogramKind::Function && !always_returns(&sp.body) {
            c.err(format!("function `{}` does not return on every path", sp.name));
        }
        c.check_body(&format!("{} `{}`", kind_word(sp), sp.name), Some(sp), &sp.body);
    }
    for (leaf, f) in &d.res_fn {
        if !c.sigprts.contains_key(leaf.as_str()) {
            c.err(format!("resolution function for undeclared `{leaf}`"));
        }
        if f != "resolved" {
            c.err(format!("unknown resolution function `{f}`"));
        }
    }
    let mut labels = HashSet::new();
    for inst in &d.instances {
        if !labels.insert(inst.label.as_str()) {
            c.err(format!("duplicate instance label `{}`", inst.label));
        }
        for (_, outer) in &inst.port_map {
            if !c.sigprts.contains_key(outer.as_str()) {
                c.err(format!("instance `{}`: undeclared signal `{outer}`", inst.label));
            }
        }
    }
    c.diags
}

fn kind_word(sp: &Subprogram) -> &'static str {
    match sp.kind {
        SubprogramKind::Function => "function",
        SubprogramKind::Procedure => "procedure",
    }
}
