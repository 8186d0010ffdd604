//! Sequential statement interpreter.
//!
//! Signal reads see current values; signal assignments only write the
//! driving value of the running process. Variables are updated in place.
//! `next`/`exit` raise flags that make enclosing statement lists skip their
//! remainder until the named loop handles them.

use crate::ast::{AsmtRhs, Expr, Lhs, Mode, SeqStmt, SubProgCall, SubprogramKind};
use crate::error::{SimError, SimResult};
use crate::model::Model;
use crate::state::SimState;
use crate::types::{Dir, Type};
use crate::values::{eval_binop, eval_unop, to_vector, vec_nth, vec_slice, EvalError, LogicOp, OpKind, Scalar, Val};

pub const DEFAULT_LOOP_BUDGET: u64 = 100_000;
pub const MAX_CALL_DEPTH: usize = 200;

/// Interpreter context for one process activation.
pub struct ExecCtx<'m> {
    pub model: &'m Model,
    pub proc: String,
    /// Remaining loop iterations for this activation.
    pub budget: u64,
    pub initial_budget: u64,
    pub depth: usize,
    /// Statement-level log, collected when tracing.
    pub log: Option<Vec<String>>,
}

/// How control leaves a statement list.
#[derive(Debug, Clone, PartialEq)]
pub enum Flow {
    Normal,
    Return(Val),
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    Signal,
    Var,
}

impl<'m> ExecCtx<'m> {
    pub fn new(model: &'m Model, proc: impl Into<String>, budget: u64) -> Self {
        ExecCtx {
            model,
            proc: proc.into(),
            budget,
            initial_budget: budget,
            depth: 0,
            log: None,
        }
    }

    fn context(&self) -> String {
        format!("process `{}`", self.proc)
    }

    fn ev(&self, e: EvalError) -> SimError {
        SimError::eval(&self.context(), e)
    }

    fn note(&mut self, line: impl FnOnce() -> String) {
        if let Some(log) = &mut self.log {
            log.push(line());
        }
    }
}

// ---------------------------------------------------------------------------
// Expressions

fn read_signal(ctx: &ExecCtx, st: &SimState, name: &str) -> SimResult<Val> {
    let m = ctx.model;
    if m.sigprts.contains_key(name) {
        if let Some(None) = st.eff.get(name) {
            return Err(SimError::Unresolved {
                context: ctx.context(),
                name: name.to_string(),
            });
        }
        return Ok(st.sp[name].clone());
    }
    match m.sp_groups.get(name) {
        Some(members) => Ok(Val::Record(
            members
                .iter()
                .map(|(local, q)| Ok((local.clone(), read_signal(ctx, st, q)?)))
                .collect::<SimResult<_>>()?,
        )),
        None => Err(SimError::Config(format!("undeclared signal `{name}`"))),
    }
}

fn read_var(ctx: &ExecCtx, st: &SimState, name: &str) -> SimResult<Val> {
    if let Some(v) = st.vars.get(name) {
        return Ok(v.clone());
    }
    match ctx.model.var_groups.get(name) {
        Some(members) => Ok(Val::Record(
            members
                .iter()
                .map(|(local, q)| Ok((local.clone(), read_var(ctx, st, q)?)))
                .collect::<SimResult<_>>()?,
        )),
        None => Err(SimError::Config(format!("undeclared variable `{name}`"))),
    }
}

fn eval_index(ctx: &ExecCtx, st: &SimState, e: &Expr) -> SimResult<i64> {
    match eval(ctx, st, e)? {
        Val::Scalar(Scalar::Int(i)) => Ok(i),
        other => Err(ctx.ev(EvalError::TypeMismatch {
            op: "index",
            operands: other.type_name(),
        })),
    }
}

pub fn eval_bool(ctx: &ExecCtx, st: &SimState, e: &Expr) -> SimResult<bool> {
    match eval(ctx, st, e)? {
        Val::Scalar(Scalar::Bool(b)) => Ok(b),
        other => Err(ctx.ev(EvalError::TypeMismatch {
            op: "condition",
            operands: other.type_name(),
        })),
    }
}

/// Evaluates an expression against the current values of `st`.
pub fn eval(ctx: &ExecCtx, st: &SimState, e: &Expr) -> SimResult<Val> {
    match e {
        Expr::ExpCon(v) => Ok(v.clone()),
        Expr::ExpSig(n) | Expr::ExpPrt(n) => read_signal(ctx, st, n),
        Expr::ExpVar(n) => read_var(ctx, st, n),
        Expr::Uexp(op, a) => {
            let a = eval(ctx, st, a)?;
            eval_unop(*op, &a).map_err(|x| ctx.ev(x))
        }
        Expr::Bexpl(a, op, b) => {
            let a = eval(ctx, st, a)?;
            // boolean and/or short-circuit
            match (op, &a) {
                (LogicOp::And, Val::Scalar(Scalar::Bool(false))) => return Ok(a),
                (LogicOp::Or, Val::Scalar(Scalar::Bool(true))) => return Ok(a),
                _ => {}
            }
            let b = eval(ctx, st, b)?;
            eval_binop(OpKind::Lop(*op), &a, &b).map_err(|x| ctx.ev(x))
        }
        Expr::Bexpr(a, op, b) => binop(ctx, st, OpKind::Rop(*op), a, b),
        Expr::Bexps(a, op, b) => binop(ctx, st, OpKind::Sop(*op), a, b),
        Expr::Bexpa(a, op, b) => binop(ctx, st, OpKind::Aop(*op), a, b),
        Expr::ExpNth(v, i) => {
            let v = eval(ctx, st, v)?;
            let i = eval_index(ctx, st, i)?;
            vec_nth(&v, i).map_err(|x| ctx.ev(x))
        }
        Expr::ExpSl(v, s, l) => {
            let v = eval(ctx, st, v)?;
            let s = eval_index(ctx, st, s)?;
            let l = eval_index(ctx, st, l)?;
            vec_slice(&v, s, l).map_err(|x| ctx.ev(x))
        }
        Expr::ExpTl(a) => Ok(to_vector(&eval(ctx, st, a)?, false)),
        Expr::ExpTrl(a) => Ok(to_vector(&eval(ctx, st, a)?, true)),
        Expr::ExpR(fields) => {
            let mut out = Vec::with_capacity(fields.len());
            for (n, r) in fields {
                match r {
                    AsmtRhs::RhsE(e) => out.push((n.clone(), eval(ctx, st, e)?)),
                    AsmtRhs::RhsO(_) => {
                        return Err(ctx.ev(EvalError::Invalid(format!(
                            "`others` aggregate for record field `{n}` needs a target type"
                        ))))
                    }
                }
            }
            Ok(Val::Record(out))
        }
    }
}

fn binop(ctx: &ExecCtx, st: &SimState, op: OpKind, a: &Expr, b: &Expr) -> SimResult<Val> {
    let a = eval(ctx, st, a)?;
    let b = eval(ctx, st, b)?;
    eval_binop(op, &a, &b).map_err(|x| ctx.ev(x))
}

// ---------------------------------------------------------------------------
// Assignment

fn leaf_type<'a>(ctx: &'a ExecCtx, target: Target, name: &str) -> Option<&'a Type> {
    match target {
        Target::Signal => ctx.model.sigprts.get(name).map(|s| &s.ty),
        Target::Var => ctx.model.vars.get(name).map(|v| &v.ty),
    }
}

fn group_members<'a>(ctx: &'a ExecCtx, target: Target, name: &str) -> Option<&'a Vec<(String, String)>> {
    match target {
        Target::Signal => ctx.model.sp_groups.get(name),
        Target::Var => ctx.model.var_groups.get(name),
    }
}

fn others_vector(ty: &Type, len: usize, fill: Val) -> SimResult<Val> {
    let dir = ty.dir().unwrap_or(Dir::To);
    Ok(Val::from_storage(dir, vec![fill; len]))
}

/// Replaces storage positions `lo..=hi` of `base` with `new` (written order
/// of the range).
fn splice(base: Val, lo: usize, hi: usize, range_dir: Dir, new: Vec<Val>) -> Val {
    let (dir, mut elems) = base.into_parts();
    for (k, v) in new.into_iter().enumerate() {
        let pos = match range_dir {
            Dir::Downto => hi - k,
            Dir::To => lo + k,
        };
        elems[pos] = v;
    }
    Val::from_storage(dir, elems)
}

/// Computes the new value of a leaf target.
fn leaf_value(ctx: &ExecCtx, st: &SimState, target: Target, lhs: &Lhs, value: RhsValue) -> SimResult<Val> {
    let name = &lhs.name;
    let ty = leaf_type(ctx, target, name)
        .ok_or_else(|| SimError::Config(format!("undeclared assignment target `{name}`")))?;
    let current = || -> SimResult<Val> {
        match target {
            Target::Signal => Ok(st
                .driving(name, &ctx.proc)
                .cloned()
                .unwrap_or_else(|| st.sp[name].clone())),
            Target::Var => read_var(ctx, st, name),
        }
    };
    let Some(range) = &lhs.range else {
        let v = match value {
            RhsValue::Whole(v) => v,
            RhsValue::Others(fill) => {
                let len = match ty.len() {
                    Some(n) => n,
                    None => current()?.len(),
                };
                let fill = match ty.elem() {
                    Some(et) => et.conform(fill).map_err(|e| ctx.ev(e))?,
                    None => {
                        return Err(ctx.ev(EvalError::Invalid(format!(
                            "`others` aggregate assigned to non-vector `{name}`"
                        ))))
                    }
                };
                others_vector(ty, len, fill)?
            }
        };
        return ty.conform(v).map_err(|e| ctx.ev(e));
    };
    let lo = eval_index(ctx, st, &range.lo)?;
    let hi = eval_index(ctx, st, &range.hi)?;
    let base = current()?;
    if !base.is_vector() {
        return Err(ctx.ev(EvalError::TypeMismatch {
            op: "ranged assignment",
            operands: base.type_name(),
        }));
    }
    if hi < lo {
        return Ok(base);
    }
    if lo < 0 || hi as usize >= base.len() {
        return Err(ctx.ev(EvalError::SliceOutOfRange {
            start: lo,
            len: hi - lo + 1,
            vec_len: base.len(),
        }));
    }
    let n = (hi - lo + 1) as usize;
    let new: Vec<Val> = match value {
        RhsValue::Others(fill) => vec![fill; n],
        RhsValue::Whole(v) if v.is_vector() => {
            if v.len() != n {
                return Err(ctx.ev(EvalError::LengthMismatch {
                    op: "assignment",
                    left: n,
                    right: v.len(),
                }));
            }
            v.written().into_iter().cloned().collect()
        }
        RhsValue::Whole(v) if n == 1 => vec![v],
        RhsValue::Whole(v) => {
            return Err(ctx.ev(EvalError::LengthMismatch {
                op: "assignment",
                left: n,
                right: v.len().max(1),
            }))
        }
    };
    let v = splice(base, lo as usize, hi as usize, range.dir, new);
    ty.conform(v).map_err(|e| ctx.ev(e))
}

enum RhsValue {
    Whole(Val),
    Others(Val),
}

fn eval_rhs(ctx: &ExecCtx, st: &SimState, rhs: &AsmtRhs) -> SimResult<RhsValue> {
    Ok(match rhs {
        AsmtRhs::RhsE(e) => RhsValue::Whole(eval(ctx, st, e)?),
        AsmtRhs::RhsO(e) => RhsValue::Others(eval(ctx, st, e)?),
    })
}

/// Leaf writes produced by an assignment, in field order.
fn plan_assign(
    ctx: &ExecCtx,
    st: &SimState,
    target: Target,
    lhs: &Lhs,
    value: RhsValue,
) -> SimResult<Vec<(String, Val)>> {
    if let Some(members) = group_members(ctx, target, &lhs.name) {
        if lhs.range.is_some() {
            return Err(ctx.ev(EvalError::Invalid(format!("range on record target `{}`", lhs.name))));
        }
        let fields = match value {
            RhsValue::Whole(Val::Record(f)) => f,
            RhsValue::Whole(v) => {
                return Err(ctx.ev(EvalError::TypeMismatch {
                    op: "assignment",
                    operands: format!("record `{}` := {}", lhs.name, v.type_name()),
                }))
            }
            RhsValue::Others(_) => {
                return Err(ctx.ev(EvalError::Invalid(format!(
                    "`others` aggregate for record `{}`",
                    lhs.name
                ))))
            }
        };
        if fields.len() != members.len() {
            return Err(ctx.ev(EvalError::TypeMismatch {
                op: "assignment",
                operands: format!("record `{}` of different shape", lhs.name),
            }));
        }
        let mut out = Vec::new();
        for ((local, q), (fname, v)) in members.iter().zip(fields) {
            if *local != fname {
                return Err(ctx.ev(EvalError::TypeMismatch {
                    op: "assignment",
                    operands: format!("field `{fname}` for `{local}`"),
                }));
            }
            out.extend(plan_assign(
                ctx,
                st,
                target,
                &Lhs::whole(q.clone()),
                RhsValue::Whole(v),
            )?);
        }
        return Ok(out);
    }
    let v = leaf_value(ctx, st, target, lhs, value)?;
    Ok(vec![(lhs.name.clone(), v)])
}

pub fn exec_signal_assign(ctx: &mut ExecCtx, st: &mut SimState, lhs: &Lhs, rhs: &AsmtRhs) -> SimResult<()> {
    let value = eval_rhs(ctx, st, rhs)?;
    let writes = plan_assign(ctx, st, Target::Signal, lhs, value)?;
    let proc = ctx.proc.clone();
    for (leaf, v) in writes {
        ctx.note(|| format!("{proc}: {leaf} <= {v}"));
        st.set_driving(&leaf, &proc, Some(v));
    }
    Ok(())
}

fn write_var(ctx: &mut ExecCtx, st: &mut SimState, lhs: &Lhs, value: RhsValue) -> SimResult<()> {
    let writes = plan_assign(ctx, st, Target::Var, lhs, value)?;
    let proc = ctx.proc.clone();
    for (leaf, v) in writes {
        ctx.note(|| format!("{proc}: {leaf} := {v}"));
        st.vars.insert(leaf, v);
    }
    Ok(())
}

pub fn exec_var_assign(ctx: &mut ExecCtx, st: &mut SimState, lhs: &Lhs, rhs: &AsmtRhs) -> SimResult<()> {
    let value = eval_rhs(ctx, st, rhs)?;
    write_var(ctx, st, lhs, value)
}

/// Value of a call argument: the variable, or the addressed range of it.
fn read_lhs(ctx: &ExecCtx, st: &SimState, l: &Lhs) -> SimResult<Val> {
    let v = read_var(ctx, st, &l.name)?;
    match &l.range {
        None => Ok(v),
        Some(r) => {
            let lo = eval_index(ctx, st, &r.lo)?;
            let hi = eval_index(ctx, st, &r.hi)?;
            vec_slice(&v, lo, (hi - lo + 1).max(0)).map_err(|e| ctx.ev(e))
        }
    }
}

// ---------------------------------------------------------------------------
// Statements

pub fn exec_stmt_list(ctx: &mut ExecCtx, st: &mut SimState, ss: &[SeqStmt]) -> SimResult<Flow> {
    for s in ss {
        if st.next_flag.1 || st.exit_flag.1 {
            break;
        }
        if let Flow::Return(v) = exec_stmt(ctx, st, s)? {
            return Ok(Flow::Return(v));
        }
    }
    Ok(Flow::Normal)
}

pub fn exec_stmt(ctx: &mut ExecCtx, st: &mut SimState, s: &SeqStmt) -> SimResult<Flow> {
    match s {
        SeqStmt::SstSa(_, lhs, rhs) => exec_signal_assign(ctx, st, lhs, rhs)?,
        SeqStmt::SstVa(_, lhs, rhs) => exec_var_assign(ctx, st, lhs, rhs)?,
        SeqStmt::SstIf(_, c, t, e) => {
            let branch = if eval_bool(ctx, st, c)? { t } else { e };
            return exec_stmt_list(ctx, st, branch);
        }
        SeqStmt::SstL(name, cond, body) => return exec_loop_stmt(ctx, st, name, cond, body),
        SeqStmt::SstFn(_, lhs, call) => exec_fn_call(ctx, st, lhs, call)?,
        SeqStmt::SstPc(_, call) => exec_proc_call(ctx, st, call)?,
        SeqStmt::SstRt(_, rhs) => {
            let v = match rhs {
                AsmtRhs::RhsE(e) => eval(ctx, st, e)?,
                AsmtRhs::RhsO(_) => {
                    return Err(ctx.ev(EvalError::Invalid(
                        "`return (others => ...)` needs a constrained return type".into(),
                    )))
                }
            };
            return Ok(Flow::Return(v));
        }
        SeqStmt::SstN(_, loop_name, cond) => exec_next(ctx, st, loop_name, cond)?,
        SeqStmt::SstE(_, loop_name, cond) => exec_exit(ctx, st, loop_name, cond)?,
        SeqStmt::SstNl => {}
    }
    Ok(Flow::Normal)
}

pub fn exec_next(ctx: &mut ExecCtx, st: &mut SimState, loop_name: &str, cond: &Expr) -> SimResult<()> {
    if eval_bool(ctx, st, cond)? {
        st.next_flag = (loop_name.to_string(), true);
    }
    Ok(())
}

pub fn exec_exit(ctx: &mut ExecCtx, st: &mut SimState, loop_name: &str, cond: &Expr) -> SimResult<()> {
    if eval_bool(ctx, st, cond)? {
        st.exit_flag = (loop_name.to_string(), true);
    }
    Ok(())
}

/// What a loop does after one execution of its body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopStep {
    /// Leave the loop; a flag for an enclosing loop may still be raised.
    Leave,
    /// Check the condition again.
    Again,
}

/// The five-way flag dispatch after a loop body run.
pub fn loop_dispatch(st: &mut SimState, name: &str) -> LoopStep {
    if st.exit_flag.1 {
        if st.exit_flag.0 == name {
            st.exit_flag = (String::new(), false);
        }
        LoopStep::Leave
    } else if st.next_flag.1 {
        if st.next_flag.0 == name {
            st.next_flag = (String::new(), false);
            LoopStep::Again
        } else {
            LoopStep::Leave
        }
    } else {
        LoopStep::Again
    }
}

/// `rec_loop`: checks the condition, runs the body once and hands over to
/// the flag dispatch. Returns `None` when the condition fails.
pub fn rec_loop(
    ctx: &mut ExecCtx,
    st: &mut SimState,
    name: &str,
    cond: &Expr,
    body: &[SeqStmt],
) -> SimResult<Option<Flow>> {
    if !eval_bool(ctx, st, cond)? {
        return Ok(None);
    }
    if ctx.budget == 0 {
        return Err(SimError::LoopBudget {
            context: ctx.context(),
            loop_name: name.to_string(),
            budget: ctx.initial_budget,
        });
    }
    ctx.budget -= 1;
    exec_stmt_list(ctx, st, body).map(Some)
}

pub fn exec_loop_stmt(
    ctx: &mut ExecCtx,
    st: &mut SimState,
    name: &str,
    cond: &Expr,
    body: &[SeqStmt],
) -> SimResult<Flow> {
    loop {
        match rec_loop(ctx, st, name, cond, body)? {
            None => return Ok(Flow::Normal),
            Some(Flow::Return(v)) => return Ok(Flow::Return(v)),
            Some(Flow::Normal) => {
                if loop_dispatch(st, name) == LoopStep::Leave {
                    return Ok(Flow::Normal);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Calls

fn snapshot(st: &SimState, frame: &[String]) -> Vec<(String, Val)> {
    frame
        .iter()
        .filter_map(|n| st.vars.get(n).map(|v| (n.clone(), v.clone())))
        .collect()
}

fn restore(st: &mut SimState, snap: Vec<(String, Val)>) {
    for (n, v) in snap {
        st.vars.insert(n, v);
    }
}

/// Function result and final values of out/inout formals by position.
type CallOutcome = (Option<Val>, Vec<(usize, Val)>);

/// Runs a subprogram body with actuals bound; returns its result (for
/// functions) and the final values of out/inout formals.
fn call(ctx: &mut ExecCtx, st: &mut SimState, call: &SubProgCall, kind: SubprogramKind) -> SimResult<CallOutcome> {
    let m = ctx.model;
    let sp = m
        .design
        .subprogram(&call.callee)
        .ok_or_else(|| SimError::Config(format!("unknown subprogram `{}`", call.callee)))?;
    if sp.kind != kind || sp.formals.len() != call.args.len() {
        return Err(ctx.ev(EvalError::Invalid(format!("bad call of `{}`", call.callee))));
    }
    if ctx.depth >= MAX_CALL_DEPTH {
        return Err(SimError::CallDepth {
            context: ctx.context(),
            callee: call.callee.clone(),
        });
    }
    // actuals are read before the callee's frame is touched
    let actuals = call
        .args
        .iter()
        .zip(&sp.formals)
        .map(|(a, f)| match f.mode {
            Mode::Out => Ok(None),
            _ => read_lhs(ctx, st, a).map(Some),
        })
        .collect::<SimResult<Vec<_>>>()?;
    let frame = m.frames.get(&sp.name).map(Vec::as_slice).unwrap_or(&[]);
    let saved = snapshot(st, frame);
    for n in frame {
        st.vars.insert(n.clone(), m.vars[n].init.clone());
    }
    for (f, a) in sp.formals.iter().zip(actuals) {
        if let Some(v) = a {
            let v = conform_formal(&f.ty, v).map_err(|e| ctx.ev(e))?;
            st.vars.insert(f.name.clone(), v);
        }
    }
    ctx.depth += 1;
    let flow = exec_stmt_list(ctx, st, &sp.body);
    ctx.depth -= 1;
    let flow = flow?;
    let result = match (kind, flow) {
        (SubprogramKind::Function, Flow::Return(v)) => {
            let v = match &sp.ret_type {
                Some(t) => conform_formal(t, v).map_err(|e| ctx.ev(e))?,
                None => v,
            };
            Some(v)
        }
        (SubprogramKind::Function, Flow::Normal) => {
            restore(st, saved);
            return Err(SimError::MissingReturn {
                context: ctx.context(),
                callee: sp.name.clone(),
            });
        }
        (SubprogramKind::Procedure, _) => None,
    };
    let outs = sp
        .formals
        .iter()
        .enumerate()
        .filter(|(_, f)| matches!(f.mode, Mode::Out | Mode::Inout))
        .map(|(i, f)| (i, st.vars[&f.name].clone()))
        .collect();
    restore(st, saved);
    Ok((result, outs))
}

/// Conformance for formals: an unconstrained vector formal takes any length.
fn conform_formal(ty: &Type, v: Val) -> Result<Val, EvalError> {
    match ty {
        Type::Vector { dir, range: None, elem } if v.is_vector() => {
            let (d, items) = v.with_dir(*dir).into_parts();
            let items = items
                .into_iter()
                .map(|e| elem.conform(e))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Val::from_storage(d, items))
        }
        t => t.conform(v),
    }
}

pub fn exec_fn_call(ctx: &mut ExecCtx, st: &mut SimState, lhs: &Lhs, c: &SubProgCall) -> SimResult<()> {
    let (result, _) = call(ctx, st, c, SubprogramKind::Function)?;
    let v = result.expect("function result");
    write_var(ctx, st, lhs, RhsValue::Whole(v))
}

pub fn exec_proc_call(ctx: &mut ExecCtx, st: &mut SimState, c: &SubProgCall) -> SimResult<()> {
    let (_, outs) = call(ctx, st, c, SubprogramKind::Procedure)?;
    for (i, v) in outs {
        write_var(ctx, st, &c.args[i], RhsValue::Whole(v))?;
    }
    Ok(())
}

/// Runs one activation of process `idx` of the model.
pub fn run_process(
    model: &Model,
    idx: usize,
    st: &mut SimState,
    loop_budget: u64,
    log: Option<&mut Vec<String>>,
) -> SimResult<()> {
    let p = &model.design.processes[idx];
    let mut ctx = ExecCtx::new(model, p.name.clone(), loop_budget);
    if log.is_some() {
        ctx.log = Some(Vec::new());
    }
    let r = exec_stmt_list(&mut ctx, st, &p.body);
    if let (Some(out), Some(lines)) = (log, ctx.log.take()) {
        out.extend(lines);
    }
    r?;
    st.clear_flags();
    Ok(())
}
