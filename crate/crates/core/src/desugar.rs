//! Surface statements (elsif chains, case, for loops, conditional signal
//! assignments, generate statements) and their lowering to the core syntax.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use crate::ast::{
    AsmtRhs, Design, Env, Expr, Formal, Instance, Lhs, Process, SeqStmt, SpLhs, SubProgCall, Subprogram,
    SubprogramKind, Tree, VLhs, VarDecl, VarTree,
};
use crate::types::{Dir, Type};
use crate::values::{eval_binop, eval_unop, to_vector, vec_nth, vec_slice, ArithOp, LogicOp, OpKind, RelOp, Val};

/// `left to right` or `left downto right`, bounds as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForRange {
    pub left: Expr,
    pub right: Expr,
    pub dir: Dir,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CSeq {
    SstSa(String, SpLhs, AsmtRhs),
    SstVa(String, VLhs, AsmtRhs),
    SstIf(String, Expr, Vec<CSeq>, Vec<CSeq>),
    SstL(String, Expr, Vec<CSeq>),
    SstFn(String, VLhs, SubProgCall),
    SstRt(String, AsmtRhs),
    SstPc(String, SubProgCall),
    SstN(String, String, Expr),
    SstE(String, String, Expr),
    SstNl,
    /// `(name, condition, then, elsif arms, else)`
    SscIf(String, Expr, Vec<CSeq>, Vec<(Expr, Vec<CSeq>)>, Vec<CSeq>),
    /// `(name, selector, when arms, others)`
    SscCase(String, Expr, Vec<(Vec<Expr>, Vec<CSeq>)>, Option<Vec<CSeq>>),
    /// `(loop name, loop variable, range, body)`; the variable is referenced
    /// in the body as `exp_var`.
    SscFor(String, String, ForRange, Vec<CSeq>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CProcess {
    pub name: String,
    pub sensitivity: Vec<String>,
    pub body: Vec<CSeq>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenType {
    ForGen { var: String, range: ForRange },
    IfGen(Expr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CConc {
    CstPs(CProcess),
    /// Conditional signal assignment. `setup` holds statements that must run
    /// before the conditions are evaluated (hoisted function calls).
    CscCa {
        name: String,
        target: SpLhs,
        whens: Vec<(AsmtRhs, Expr)>,
        else_rhs: Option<AsmtRhs>,
        setup: Vec<CSeq>,
    },
    CscGen {
        name: String,
        gen: GenType,
        body: Vec<CConc>,
    },
    Inst(Instance),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CSubprogram {
    pub name: String,
    pub kind: SubprogramKind,
    pub formals: Vec<Formal>,
    pub ret_type: Option<Type>,
    pub body: Vec<CSeq>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexDesign {
    pub name: String,
    pub env: Env,
    pub res_fn: IndexMap<String, String>,
    pub conc: Vec<CConc>,
    pub subprograms: Vec<CSubprogram>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LowerOptions {
    /// Sensitivity of lowered conditional assignments: only the signals in
    /// the conditions (falls back to every read when there are none).
    pub condition_sensitivity: bool,
}

pub type LowerResult<T> = Result<T, String>;

// ---------------------------------------------------------------------------
// Constant folding

/// Evaluates an expression that reads no signals or variables.
pub fn const_eval(e: &Expr) -> Option<Val> {
    Some(match e {
        Expr::ExpCon(v) => v.clone(),
        Expr::Uexp(op, a) => eval_unop(*op, &const_eval(a)?).ok()?,
        Expr::Bexpl(a, op, b) => eval_binop(OpKind::Lop(*op), &const_eval(a)?, &const_eval(b)?).ok()?,
        Expr::Bexpr(a, op, b) => eval_binop(OpKind::Rop(*op), &const_eval(a)?, &const_eval(b)?).ok()?,
        Expr::Bexps(a, op, b) => eval_binop(OpKind::Sop(*op), &const_eval(a)?, &const_eval(b)?).ok()?,
        Expr::Bexpa(a, op, b) => eval_binop(OpKind::Aop(*op), &const_eval(a)?, &const_eval(b)?).ok()?,
        Expr::ExpNth(v, i) => vec_nth(&const_eval(v)?, const_eval(i)?.as_int()?).ok()?,
        Expr::ExpSl(v, s, l) => vec_slice(&const_eval(v)?, const_eval(s)?.as_int()?, const_eval(l)?.as_int()?).ok()?,
        Expr::ExpTl(a) => to_vector(&const_eval(a)?, false),
        Expr::ExpTrl(a) => to_vector(&const_eval(a)?, true),
        Expr::ExpR(fields) => Val::Record(
            fields
                .iter()
                .map(|(n, r)| match r {
                    AsmtRhs::RhsE(e) => Some((n.clone(), const_eval(e)?)),
                    AsmtRhs::RhsO(_) => None,
                })
                .collect::<Option<_>>()?,
        ),
        Expr::ExpSig(_) | Expr::ExpPrt(_) | Expr::ExpVar(_) => return None,
    })
}

fn const_int(e: &Expr, what: &str) -> LowerResult<i64> {
    const_eval(e)
        .and_then(|v| v.as_int())
        .ok_or_else(|| format!("{what} must be a constant integer"))
}

// ---------------------------------------------------------------------------
// Traversal helpers

fn lhs_exprs(l: &mut Lhs, f: &mut impl FnMut(&mut Expr)) {
    if let Some(r) = &mut l.range {
        f(&mut r.lo);
        f(&mut r.hi);
    }
}

impl CSeq {
    /// Applies `f` to every top-level expression slot, recursively through
    /// nested statements.
    pub fn map_exprs(&mut self, f: &mut impl FnMut(&mut Expr)) {
        match self {
            CSeq::SstSa(_, l, r) | CSeq::SstVa(_, l, r) => {
                lhs_exprs(l, f);
                f(r.expr_mut());
            }
            CSeq::SstIf(_, c, t, e) => {
                f(c);
                t.iter_mut().chain(e).for_each(|s| s.map_exprs(f));
            }
            CSeq::SstL(_, c, b) => {
                f(c);
                b.iter_mut().for_each(|s| s.map_exprs(f));
            }
            CSeq::SstFn(_, l, call) => {
                lhs_exprs(l, f);
                call.args.iter_mut().for_each(|a| lhs_exprs(a, f));
            }
            CSeq::SstPc(_, call) => call.args.iter_mut().for_each(|a| lhs_exprs(a, f)),
            CSeq::SstRt(_, r) => f(r.expr_mut()),
            CSeq::SstN(_, _, c) | CSeq::SstE(_, _, c) => f(c),
            CSeq::SstNl => {}
            CSeq::SscIf(_, c, t, arms, e) => {
                f(c);
                t.iter_mut().for_each(|s| s.map_exprs(f));
                for (c, b) in arms {
                    f(c);
                    b.iter_mut().for_each(|s| s.map_exprs(f));
                }
                e.iter_mut().for_each(|s| s.map_exprs(f));
            }
            CSeq::SscCase(_, sel, whens, others) => {
                f(sel);
                for (choices, b) in whens {
                    choices.iter_mut().for_each(&mut *f);
                    b.iter_mut().for_each(|s| s.map_exprs(f));
                }
                if let Some(o) = others {
                    o.iter_mut().for_each(|s| s.map_exprs(f));
                }
            }
            CSeq::SscFor(_, _, r, b) => {
                f(&mut r.left);
                f(&mut r.right);
                b.iter_mut().for_each(|s| s.map_exprs(f));
            }
        }
    }

    /// Applies `f` to every variable name used as a target or call argument.
    fn map_var_targets(&mut self, f: &mut impl FnMut(&mut String)) {
        match self {
            CSeq::SstVa(_, l, _) => f(&mut l.name),
            CSeq::SstFn(_, l, call) => {
                f(&mut l.name);
                call.args.iter_mut().for_each(|a| f(&mut a.name));
            }
            CSeq::SstPc(_, call) => call.args.iter_mut().for_each(|a| f(&mut a.name)),
            CSeq::SscFor(_, v, _, _) => f(v),
            _ => {}
        }
        self.for_each_child(&mut |s| s.map_var_targets(f));
    }

    fn for_each_child(&mut self, f: &mut impl FnMut(&mut CSeq)) {
        match self {
            CSeq::SstIf(_, _, t, e) => t.iter_mut().chain(e).for_each(f),
            CSeq::SstL(_, _, b) | CSeq::SscFor(_, _, _, b) => b.iter_mut().for_each(f),
            CSeq::SscIf(_, _, t, arms, e) => {
                t.iter_mut().for_each(&mut *f);
                arms.iter_mut().for_each(|(_, b)| b.iter_mut().for_each(&mut *f));
                e.iter_mut().for_each(f);
            }
            CSeq::SscCase(_, _, whens, others) => {
                whens.iter_mut().for_each(|(_, b)| b.iter_mut().for_each(&mut *f));
                if let Some(o) = others {
                    o.iter_mut().for_each(f);
                }
            }
            _ => {}
        }
    }
}

/// Replaces every `exp_var(var)` in `e` by `replacement`.
pub fn subst_expr(e: &mut Expr, var: &str, replacement: &Expr) {
    e.walk_mut(&mut |x| {
        if matches!(x, Expr::ExpVar(n) if n == var) {
            *x = replacement.clone();
        }
    });
}

/// `[lit/var]` over a core process.
pub fn subst(p: &Process, var: &str, lit: &Val) -> Process {
    let mut out = p.clone();
    let rep = Expr::ExpCon(lit.clone());
    for s in &mut out.body {
        s.map_exprs(&mut |e| subst_expr(e, var, &rep));
    }
    out
}

impl CConc {
    pub fn map_exprs(&mut self, f: &mut impl FnMut(&mut Expr)) {
        match self {
            CConc::CstPs(p) => p.body.iter_mut().for_each(|s| s.map_exprs(f)),
            CConc::CscCa {
                target,
                whens,
                else_rhs,
                setup,
                ..
            } => {
                lhs_exprs(target, f);
                for (r, c) in whens {
                    f(r.expr_mut());
                    f(c);
                }
                if let Some(r) = else_rhs {
                    f(r.expr_mut());
                }
                setup.iter_mut().for_each(|s| s.map_exprs(f));
            }
            CConc::CscGen { gen, body, .. } => {
                match gen {
                    GenType::ForGen { range, .. } => {
                        f(&mut range.left);
                        f(&mut range.right);
                    }
                    GenType::IfGen(c) => f(c),
                }
                body.iter_mut().for_each(|c| c.map_exprs(f));
            }
            CConc::Inst(_) => {}
        }
    }

    /// Name of the variable scope the statement owns, if any.
    fn scope(&self) -> Option<&str> {
        match self {
            CConc::CstPs(p) => Some(&p.name),
            CConc::CscCa { name, .. } => Some(name),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Sequential lowering

struct Lowerer {
    /// Variables introduced by lowering, with their scope prefix.
    new_vars: Vec<VarDecl>,
}

fn seq_core(s: SeqStmt) -> Vec<SeqStmt> {
    vec![s]
}

impl Lowerer {
    fn lower_list(&mut self, ss: &[CSeq]) -> LowerResult<Vec<SeqStmt>> {
        let mut out = Vec::new();
        for s in ss {
            out.extend(self.lower_seq(s)?);
        }
        Ok(out)
    }

    fn lower_body(&mut self, ss: &[CSeq]) -> LowerResult<Vec<SeqStmt>> {
        let out = self.lower_list(ss)?;
        Ok(if out.is_empty() { vec![SeqStmt::SstNl] } else { out })
    }

    fn lower_seq(&mut self, s: &CSeq) -> LowerResult<Vec<SeqStmt>> {
        Ok(match s {
            CSeq::SstSa(n, l, r) => seq_core(SeqStmt::SstSa(n.clone(), l.clone(), r.clone())),
            CSeq::SstVa(n, l, r) => seq_core(SeqStmt::SstVa(n.clone(), l.clone(), r.clone())),
            CSeq::SstIf(n, c, t, e) => seq_core(SeqStmt::SstIf(
                n.clone(),
                c.clone(),
                self.lower_list(t)?,
                self.lower_list(e)?,
            )),
            CSeq::SstL(n, c, b) => seq_core(SeqStmt::SstL(n.clone(), c.clone(), self.lower_list(b)?)),
            CSeq::SstFn(n, l, c) => seq_core(SeqStmt::SstFn(n.clone(), l.clone(), c.clone())),
            CSeq::SstRt(n, r) => seq_core(SeqStmt::SstRt(n.clone(), r.clone())),
            CSeq::SstPc(n, c) => seq_core(SeqStmt::SstPc(n.clone(), c.clone())),
            CSeq::SstN(n, l, c) => seq_core(SeqStmt::SstN(n.clone(), l.clone(), c.clone())),
            CSeq::SstE(n, l, c) => seq_core(SeqStmt::SstE(n.clone(), l.clone(), c.clone())),
            CSeq::SstNl => seq_core(SeqStmt::SstNl),
            CSeq::SscIf(n, c, t, arms, e) => {
                // fold elsif arms right to left into else branches
                let mut tail = self.lower_body(e)?;
                for (ac, ab) in arms.iter().rev() {
                    tail = vec![SeqStmt::SstIf(String::new(), ac.clone(), self.lower_body(ab)?, tail)];
                }
                vec![SeqStmt::SstIf(n.clone(), c.clone(), self.lower_body(t)?, tail)]
            }
            CSeq::SscCase(n, sel, whens, others) => self.lower_case(n, sel, whens, others.as_deref())?,
            CSeq::SscFor(n, var, range, body) => self.lower_for(n, var, range, body)?,
        })
    }

    fn lower_case(
        &mut self,
        name: &str,
        sel: &Expr,
        whens: &[(Vec<Expr>, Vec<CSeq>)],
        others: Option<&[CSeq]>,
    ) -> LowerResult<Vec<SeqStmt>> {
        let mut seen: Vec<Val> = Vec::new();
        for (choices, _) in whens {
            for c in choices {
                let v = const_eval(c).ok_or_else(|| format!("case `{name}`: choice is not a constant"))?;
                if seen.contains(&v) {
                    return Err(format!("case `{name}`: duplicate choice {v}"));
                }
                seen.push(v);
            }
        }
        let mut tail = match others {
            Some(o) => self.lower_body(o)?,
            None => vec![SeqStmt::SstNl],
        };
        for (i, (choices, body)) in whens.iter().enumerate().rev() {
            let cond = choices
                .iter()
                .map(|c| Expr::rel(sel.clone(), RelOp::Eq, c.clone()))
                .reduce(|a, b| Expr::logic(a, LogicOp::Or, b))
                .ok_or_else(|| format!("case `{name}`: empty choice list"))?;
            let label = if i == 0 { name.to_string() } else { String::new() };
            tail = vec![SeqStmt::SstIf(label, cond, self.lower_body(body)?, tail)];
        }
        Ok(tail)
    }

    /// `for v in l to r loop body end loop` becomes
    /// `c := l - 1; while c < r loop c := c + 1; body end loop` with every
    /// use of `v` replaced by the counter `c`. The increment comes first so
    /// that `next` skips nothing but the rest of the body.
    fn lower_for(&mut self, name: &str, var: &str, range: &ForRange, body: &[CSeq]) -> LowerResult<Vec<SeqStmt>> {
        let scope = var.rsplit_once('.').map(|(p, _)| p).unwrap_or("");
        let qualify = |local: String| {
            if scope.is_empty() {
                local
            } else {
                format!("{scope}.{local}")
            }
        };
        let counter = qualify(format!("{name}__idx"));
        self.new_vars.push(VarDecl {
            name: counter.clone(),
            ty: Type::integer(),
            init: Val::int(0),
        });
        let mut out = Vec::new();
        let right = match const_eval(&range.right) {
            Some(v) => Expr::ExpCon(v),
            None => {
                let end = qualify(format!("{name}__end"));
                self.new_vars.push(VarDecl {
                    name: end.clone(),
                    ty: Type::integer(),
                    init: Val::int(0),
                });
                out.push(SeqStmt::SstVa(
                    String::new(),
                    Lhs::whole(end.clone()),
                    AsmtRhs::RhsE(range.right.clone()),
                ));
                Expr::var(end)
            }
        };
        let (start_op, cmp, step) = match range.dir {
            Dir::To => (ArithOp::Sub, RelOp::Lt, ArithOp::Add),
            Dir::Downto => (ArithOp::Add, RelOp::Gt, ArithOp::Sub),
        };
        out.push(SeqStmt::SstVa(
            String::new(),
            Lhs::whole(counter.clone()),
            AsmtRhs::RhsE(Expr::arith(range.left.clone(), start_op, Expr::int(1))),
        ));
        let mut body: Vec<CSeq> = body.to_vec();
        let rep = Expr::var(counter.clone());
        for s in &mut body {
            s.map_exprs(&mut |e| subst_expr(e, var, &rep));
        }
        let mut lowered = vec![SeqStmt::SstVa(
            String::new(),
            Lhs::whole(counter.clone()),
            AsmtRhs::RhsE(Expr::arith(Expr::var(counter.clone()), step, Expr::int(1))),
        )];
        lowered.extend(self.lower_list(&body)?);
        out.push(SeqStmt::SstL(
            name.to_string(),
            Expr::rel(Expr::var(counter), cmp, right),
            lowered,
        ));
        Ok(out)
    }
}

/// Lowers one surface statement to core statements.
pub fn lower_seq(s: &CSeq) -> LowerResult<(Vec<SeqStmt>, Vec<VarDecl>)> {
    let mut l = Lowerer { new_vars: Vec::new() };
    let out = l.lower_seq(s)?;
    Ok((out, l.new_vars))
}

// ---------------------------------------------------------------------------
// Concurrent lowering

/// Turns a conditional signal assignment into a process running the
/// equivalent if/elsif chain.
pub fn lower_conc_assign(
    name: &str,
    target: &SpLhs,
    whens: &[(AsmtRhs, Expr)],
    else_rhs: Option<&AsmtRhs>,
    setup: &[CSeq],
    opts: LowerOptions,
) -> LowerResult<(Process, Vec<VarDecl>)> {
    let mut reads = Vec::new();
    let mut cond_reads = Vec::new();
    let mut note = |e: &Expr, cond: bool| {
        e.signals_read(&mut reads);
        if cond {
            e.signals_read(&mut cond_reads);
        }
    };
    for s in setup {
        let mut s = s.clone();
        s.map_exprs(&mut |e| note(e, true));
    }
    if let Some(r) = &target.range {
        note(&r.lo, false);
        note(&r.hi, false);
    }
    for (r, c) in whens {
        note(r.expr(), false);
        note(c, true);
    }
    if let Some(r) = else_rhs {
        note(r.expr(), false);
    }
    let sensitivity = if opts.condition_sensitivity && !cond_reads.is_empty() {
        cond_reads
    } else {
        reads
    };
    let assign = |r: &AsmtRhs| CSeq::SstSa(String::new(), target.clone(), r.clone());
    let mut body: Vec<CSeq> = setup.to_vec();
    match whens.split_first() {
        None => body.push(match else_rhs {
            Some(r) => assign(r),
            None => CSeq::SstNl,
        }),
        Some(((r0, c0), rest)) => body.push(CSeq::SscIf(
            String::new(),
            c0.clone(),
            vec![assign(r0)],
            rest.iter().map(|(r, c)| (c.clone(), vec![assign(r)])).collect(),
            else_rhs.map(|r| vec![assign(r)]).unwrap_or_default(),
        )),
    }
    let mut l = Lowerer { new_vars: Vec::new() };
    let body = l.lower_list(&body)?;
    Ok((
        Process {
            name: name.to_string(),
            sensitivity,
            body,
        },
        l.new_vars,
    ))
}

fn suffix_names(c: &mut CConc, suffix: &str, renames: &mut Vec<(String, String)>) {
    match c {
        CConc::CstPs(p) => {
            let new = format!("{}{suffix}", p.name);
            renames.push((p.name.clone(), new.clone()));
            p.name = new;
        }
        CConc::CscCa { name, .. } => {
            let new = format!("{name}{suffix}");
            renames.push((name.clone(), new.clone()));
            *name = new;
        }
        CConc::CscGen { name, body, .. } => {
            *name = format!("{name}{suffix}");
            body.iter_mut().for_each(|b| suffix_names(b, suffix, renames));
        }
        CConc::Inst(i) => i.label = format!("{}{suffix}", i.label),
    }
}

fn rename_prefix(name: &mut String, from: &str, to: &str) {
    if let Some(rest) = name.strip_prefix(from) {
        if rest.starts_with('.') {
            *name = format!("{to}{rest}");
        }
    }
}

/// Renames variables owned by scope `from` to scope `to` in a statement.
fn rename_scope(c: &mut CConc, from: &str, to: &str) {
    let mut fix_expr = |e: &mut Expr| {
        e.walk_mut(&mut |x| {
            if let Expr::ExpVar(n) = x {
                rename_prefix(n, from, to);
            }
        })
    };
    c.map_exprs(&mut fix_expr);
    let mut fix_name = |n: &mut String| rename_prefix(n, from, to);
    match c {
        CConc::CstPs(p) => p.body.iter_mut().for_each(|s| s.map_var_targets(&mut fix_name)),
        CConc::CscCa { setup, .. } => setup.iter_mut().for_each(|s| s.map_var_targets(&mut fix_name)),
        CConc::CscGen { body, .. } => body.iter_mut().for_each(|b| rename_scope(b, from, to)),
        CConc::Inst(_) => {}
    }
}

fn rename_var_tree(t: &VarTree, from: &str, to: &str) -> VarTree {
    match t {
        Tree::Leaf(v) => {
            let mut v = v.clone();
            rename_prefix(&mut v.name, from, to);
            Tree::Leaf(v)
        }
        Tree::Spnl(n, kids) => Tree::Spnl(n.clone(), kids.iter().map(|k| rename_var_tree(k, from, to)).collect()),
    }
}

fn scope_of(t: &VarTree) -> String {
    crate::ast::var_root_prefix(t)
        .split('.')
        .next()
        .unwrap_or("")
        .to_string()
}

struct ConcLowerer<'a> {
    opts: LowerOptions,
    env: &'a mut Env,
    processes: Vec<Process>,
    instances: Vec<Instance>,
    /// Scopes whose variables were replicated and must be dropped.
    templates: HashSet<String>,
    lower: Lowerer,
}

impl ConcLowerer<'_> {
    fn lower(&mut self, c: &CConc) -> LowerResult<()> {
        match c {
            CConc::CstPs(p) => {
                let body = self.lower.lower_list(&p.body)?;
                self.processes.push(Process {
                    name: p.name.clone(),
                    sensitivity: p.sensitivity.clone(),
                    body,
                });
            }
            CConc::CscCa {
                name,
                target,
                whens,
                else_rhs,
                setup,
            } => {
                let (p, vars) = lower_conc_assign(name, target, whens, else_rhs.as_ref(), setup, self.opts)?;
                self.lower.new_vars.extend(vars);
                self.processes.push(p);
            }
            CConc::Inst(i) => self.instances.push(i.clone()),
            CConc::CscGen { name, gen, body } => match gen {
                GenType::IfGen(cond) => match const_eval(cond) {
                    Some(Val::Scalar(crate::values::Scalar::Bool(true))) => {
                        for b in body {
                            self.lower(b)?;
                        }
                    }
                    Some(Val::Scalar(crate::values::Scalar::Bool(false))) => {}
                    _ => return Err(format!("generate `{name}`: condition must be a constant boolean")),
                },
                GenType::ForGen { var, range } => {
                    let left = const_int(&range.left, &format!("generate `{name}` range"))?;
                    let right = const_int(&range.right, &format!("generate `{name}` range"))?;
                    let values: Vec<i64> = match range.dir {
                        Dir::To => (left..=right).collect(),
                        Dir::Downto => (right..=left).rev().collect(),
                    };
                    for k in values {
                        let rep = Expr::int(k);
                        for b in body {
                            let mut copy = b.clone();
                            copy.map_exprs(&mut |e| subst_expr(e, var, &rep));
                            let mut renames = Vec::new();
                            let suffix = format!("_{k}");
                            suffix_names(&mut copy, &suffix, &mut renames);
                            for (from, to) in &renames {
                                rename_scope(&mut copy, from, to);
                                self.replicate_vars(from, to);
                            }
                            self.lower(&copy)?;
                        }
                    }
                    let mut scopes = Vec::new();
                    for b in body {
                        collect_scopes(b, &mut scopes);
                    }
                    self.templates.extend(scopes);
                }
            },
        }
        Ok(())
    }

    fn replicate_vars(&mut self, from: &str, to: &str) {
        let copies: Vec<VarTree> = self
            .env
            .vars
            .iter()
            .filter(|t| scope_of(t) == from)
            .map(|t| rename_var_tree(t, from, to))
            .collect();
        self.env.vars.extend(copies);
    }
}

fn collect_scopes(c: &CConc, out: &mut Vec<String>) {
    if let Some(s) = c.scope() {
        out.push(s.to_string());
    }
    if let CConc::CscGen { body, .. } = c {
        body.iter().for_each(|b| collect_scopes(b, out));
    }
}

/// Lowers a whole design: every statement to core form, generate
/// statements expanded, lowering-introduced variables declared.
pub fn lower_design(d: &ComplexDesign, opts: LowerOptions) -> LowerResult<Design> {
    let mut env = d.env.clone();
    let mut cl = ConcLowerer {
        opts,
        env: &mut env,
        processes: Vec::new(),
        instances: Vec::new(),
        templates: HashSet::new(),
        lower: Lowerer { new_vars: Vec::new() },
    };
    for c in &d.conc {
        cl.lower(c)?;
    }
    let mut subprograms = Vec::new();
    for sp in &d.subprograms {
        subprograms.push(Subprogram {
            name: sp.name.clone(),
            kind: sp.kind,
            formals: sp.formals.clone(),
            ret_type: sp.ret_type.clone(),
            body: cl.lower.lower_list(&sp.body)?,
        });
    }
    let processes = std::mem::take(&mut cl.processes);
    let instances = std::mem::take(&mut cl.instances);
    let templates = std::mem::take(&mut cl.templates);
    let new_vars = std::mem::take(&mut cl.lower.new_vars);
    // replicated template scopes that are not themselves live processes
    let live: HashSet<&str> = processes.iter().map(|p| p.name.as_str()).collect();
    env.vars.retain(|t| {
        let s = scope_of(t);
        !(templates.contains(&s) && !live.contains(s.as_str()))
    });
    let mut declared: HashSet<String> = env
        .vars
        .iter()
        .flat_map(|t| t.leaves())
        .map(|v| v.name.clone())
        .collect();
    for v in new_vars {
        if declared.insert(v.name.clone()) {
            env.vars.push(Tree::Leaf(v));
        }
    }
    Ok(Design {
        name: d.name.clone(),
        env,
        res_fn: d.res_fn.clone(),
        processes,
        subprograms,
        instances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{load_sources, SourceUnit};

    fn core(src: &str) -> Design {
        let l = load_sources(vec![SourceUnit::new("t.vhd", src)], LowerOptions::default()).unwrap();
        l.core.into_iter().next().unwrap()
    }

    #[test]
    fn constants_fold() {
        let e = Expr::Bexpa(
            Box::new(Expr::ExpCon(Val::int(6))),
            ArithOp::Mul,
            Box::new(Expr::ExpCon(Val::int(7))),
        );
        assert_eq!(const_eval(&e), Some(Val::int(42)));
        assert_eq!(const_eval(&Expr::ExpSig("s".into())), None);
    }

    #[test]
    fn substitution_replaces_only_the_named_variable() {
        let mut e = Expr::Bexpa(
            Box::new(Expr::ExpVar("i".into())),
            ArithOp::Add,
            Box::new(Expr::ExpVar("j".into())),
        );
        subst_expr(&mut e, "i", &Expr::ExpCon(Val::int(3)));
        let mut vars = Vec::new();
        e.walk_mut(&mut |x| {
            if let Expr::ExpVar(n) = x {
                vars.push(n.clone());
            }
        });
        assert_eq!(vars, ["j"]);
    }

    #[test]
    fn generate_replicates_processes() {
        let d = core(
            "
entity g is end g;
architecture a of g is
  signal v : std_logic_vector(3 downto 0);
begin
  gen : for i in 0 to 3 generate
    v(i) <= '1';
  end generate;
end a;",
        );
        assert_eq!(d.processes.len(), 4);
    }

    #[test]
    fn conditional_assignment_becomes_a_sensitive_process() {
        let d = core(
            "
entity c is end c;
architecture a of c is
  signal s, a, b, y : bit;
begin
  y <= a when s = '1' else b;
end a;",
        );
        let p = &d.processes[0];
        let mut sens = p.sensitivity.clone();
        sens.sort();
        assert_eq!(sens, ["a", "b", "s"]);
        assert!(matches!(p.body[0], SeqStmt::SstIf(..)));
    }

    #[test]
    fn case_lowers_to_if_chain() {
        let (stmts, _) = lower_seq(&CSeq::SscCase(
            String::new(),
            Expr::ExpSig("s".into()),
            vec![(vec![Expr::ExpCon(Val::int(1))], vec![CSeq::SstNl])],
            Some(vec![CSeq::SstNl]),
        ))
        .unwrap();
        assert!(stmts.iter().all(|s| !matches!(s, SeqStmt::SstL(..))));
        assert!(stmts.iter().any(|s| matches!(s, SeqStmt::SstIf(..))));
    }
}
