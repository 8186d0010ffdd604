//! Elaboration: resolves names, types literals from their context, expands
//! the numeric_std conversions and hoists function calls out of
//! expressions, producing surface designs ready for lowering.

use indexmap::IndexMap;
use std::collections::{HashMap, HashSet};

use super::syntax::*;
use super::{Diag, Span};
use crate::ast::{
    AsmtRhs, DiscreteRange, Env, Expr, Formal, Instance, Lhs, Mode, SigPrt, SpKind, SubProgCall, SubprogramKind, Tree,
    VarDecl,
};
use crate::desugar::{const_eval, CConc, CProcess, CSeq, CSubprogram, ComplexDesign, ForRange, GenType};
use crate::logic9::Logic9;
use crate::types::{Dir, ScalarKind, Type};
use crate::values::{ArithOp, LogicOp, RelOp, Scalar, ShiftOp, UnOp, Val};

const INT32: Type = Type::Integer {
    lo: i32::MIN as i64,
    hi: i32::MAX as i64,
};

/// A type as seen by the front end: the core type plus the flags the core
/// does not track.
#[derive(Debug, Clone, PartialEq)]
pub struct ETy {
    pub ty: Type,
    /// `signed` from numeric_std.
    pub signed: bool,
    /// Resolved element type (`std_logic` and friends).
    pub resolved: bool,
    /// Record fields, empty for other types.
    pub fields: Vec<(String, ETy)>,
}

impl ETy {
    pub fn of(ty: Type) -> ETy {
        ETy {
            ty,
            signed: false,
            resolved: false,
            fields: Vec::new(),
        }
    }

    fn int() -> ETy {
        ETy::of(Type::integer())
    }

    fn boolean() -> ETy {
        ETy::of(Type::Boolean)
    }

    fn elem(&self) -> Option<ETy> {
        self.ty.elem().map(|e| ETy {
            ty: e.clone(),
            signed: false,
            resolved: self.resolved,
            fields: Vec::new(),
        })
    }

    /// A vector with this type's element, direction and flags.
    fn vec_like(&self, dir: Dir, len: Option<usize>) -> ETy {
        let elem = self.ty.elem().cloned().unwrap_or(Type::Logic);
        ETy {
            ty: Type::Vector {
                dir,
                range: len.map(|n| (0, n as i64 - 1)),
                elem: Box::new(elem),
            },
            signed: self.signed,
            resolved: self.resolved,
            fields: Vec::new(),
        }
    }

    fn scalar_kind(&self) -> Option<ScalarKind> {
        self.ty.scalar_kind()
    }

    fn elem_kind(&self) -> Option<ScalarKind> {
        match &self.ty {
            Type::Vector { elem, .. } => elem.scalar_kind(),
            t => t.scalar_kind(),
        }
    }

    fn is_int(&self) -> bool {
        matches!(self.ty, Type::Integer { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Class {
    Signal,
    Port(Mode),
    Var,
}

#[derive(Debug, Clone)]
enum Sym {
    Obj {
        q: String,
        class: Class,
        ety: ETy,
    },
    Const(Val, ETy),
    /// Loop or generate variable, read as `exp_var`.
    Index(String),
    Enum(i64, ETy),
    Sub(String),
    Type(ETy),
}

#[derive(Debug, Clone)]
struct SubSig {
    kind: SubprogramKind,
    formals: Vec<(String, Mode, ETy)>,
    ret: Option<ETy>,
}

enum Sel {
    Index(Expr),
    Slice { lo: Expr, hi: Expr, dir: Dir },
}

struct ObjRef {
    q: String,
    class: Class,
    base: ETy,
    sel: Option<(Sel, ETy)>,
}

impl ObjRef {
    fn ety(&self) -> &ETy {
        self.sel.as_ref().map(|(_, t)| t).unwrap_or(&self.base)
    }
}

enum Cur {
    Obj(ObjRef),
    Val(Expr, ETy),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Region {
    Arch,
    Process,
    Subprogram,
}

/// Per-body state: the variable scope, pending hoisted statements and
/// enclosing loops.
#[derive(Default)]
struct Body {
    scope: String,
    temps: usize,
    loops_made: usize,
    pre: Vec<CSeq>,
    loops: Vec<String>,
    /// `Some(return type)` inside a function, `Some(None)` in a procedure.
    sub: Option<Option<ETy>>,
}

#[derive(Debug)]
struct Failed;

type R<T> = Result<T, Failed>;

fn fold(e: Expr) -> Expr {
    if matches!(e, Expr::ExpCon(_)) {
        return e;
    }
    match const_eval(&e) {
        Some(v) => Expr::ExpCon(v),
        None => e,
    }
}

fn offset(e: Expr, low: i64) -> Expr {
    if low == 0 {
        e
    } else {
        fold(Expr::arith(e, ArithOp::Sub, Expr::int(low)))
    }
}

fn bool_con(b: bool) -> Expr {
    Expr::con(Val::boolean(b))
}

fn scalar_from_char(kind: ScalarKind, c: char) -> Option<Val> {
    match kind {
        ScalarKind::Logic => Logic9::from_char(c).map(Val::logic),
        ScalarKind::Bit => match c {
            '0' => Some(Val::bit(false)),
            '1' => Some(Val::bit(true)),
            _ => None,
        },
        ScalarKind::Char => Some(Val::Scalar(Scalar::Char(c))),
        _ => None,
    }
}

fn predefined() -> HashMap<String, Sym> {
    let unconstrained = |elem: Type| Type::Vector {
        dir: Dir::Downto,
        range: None,
        elem: Box::new(elem),
    };
    let mut m = HashMap::new();
    let mut ty = |n: &str, t: Type, signed: bool, resolved: bool| {
        m.insert(
            n.to_string(),
            Sym::Type(ETy {
                ty: t,
                signed,
                resolved,
                fields: Vec::new(),
            }),
        );
    };
    ty("std_logic", Type::Logic, false, true);
    ty("std_ulogic", Type::Logic, false, false);
    ty("std_logic_vector", unconstrained(Type::Logic), false, true);
    ty("std_ulogic_vector", unconstrained(Type::Logic), false, false);
    ty("unsigned", unconstrained(Type::Logic), false, true);
    ty("signed", unconstrained(Type::Logic), true, true);
    ty("bit", Type::Bit, false, false);
    ty("bit_vector", unconstrained(Type::Bit), false, false);
    ty("boolean", Type::Boolean, false, false);
    ty("integer", INT32, false, false);
    ty(
        "natural",
        Type::Integer {
            lo: 0,
            hi: i32::MAX as i64,
        },
        false,
        false,
    );
    ty(
        "positive",
        Type::Integer {
            lo: 1,
            hi: i32::MAX as i64,
        },
        false,
        false,
    );
    ty("character", Type::Character, false, false);
    ty(
        "string",
        Type::Vector {
            dir: Dir::To,
            range: None,
            elem: Box::new(Type::Character),
        },
        false,
        false,
    );
    ty("real", Type::Real, false, false);
    m.insert("true".into(), Sym::Const(Val::boolean(true), ETy::boolean()));
    m.insert("false".into(), Sym::Const(Val::boolean(false), ETy::boolean()));
    m
}

/// Labels used anywhere in a list of concurrent statements.
fn collect_labels(cs: &[PConc], out: &mut HashSet<String>) {
    for c in cs {
        match c {
            PConc::Process { label: Some(l), .. }
            | PConc::CondAssign { label: Some(l), .. }
            | PConc::SelAssign { label: Some(l), .. } => {
                out.insert(l.clone());
            }
            PConc::ForGen { label, body, .. } | PConc::IfGen { label, body, .. } => {
                out.insert(label.clone());
                collect_labels(body, out);
            }
            PConc::Instance { label, .. } => {
                out.insert(label.clone());
            }
            _ => {}
        }
    }
}

struct Elab<'a> {
    diags: &'a mut Vec<Diag>,
    entities: &'a HashMap<String, &'a PEntity>,
    scopes: Vec<HashMap<String, Sym>>,
    env: Env,
    res_fn: IndexMap<String, String>,
    subprograms: Vec<CSubprogram>,
    sigs: HashMap<String, SubSig>,
    components: HashMap<String, Vec<String>>,
    body: Body,
    labels: HashSet<String>,
    generated: usize,
}

impl<'a> Elab<'a> {
    fn err<T>(&mut self, span: Span, msg: impl Into<String>) -> R<T> {
        self.diags.push(Diag::error(span, msg));
        Err(Failed)
    }

    fn lookup(&self, name: &str) -> Option<Sym> {
        self.scopes.iter().rev().find_map(|s| s.get(name)).cloned()
    }

    fn declare(&mut self, span: Span, name: &str, sym: Sym) -> R<()> {
        let top = self.scopes.last_mut().expect("scope");
        if top.contains_key(name) {
            return self.err(span, format!("`{name}` is declared twice"));
        }
        top.insert(name.to_string(), sym);
        Ok(())
    }

    fn fresh_name(&mut self, stem: &str) -> String {
        loop {
            self.generated += 1;
            let n = format!("{stem}_{}", self.generated);
            if self.labels.insert(n.clone()) {
                return n;
            }
        }
    }

    // -- types ----------------------------------------------------------------

    fn const_int(&mut self, e: &PExpr) -> R<i64> {
        let (x, _) = self.expr(e, Some(&ETy::int()))?;
        if !self.body.pre.is_empty() {
            self.body.pre.clear();
            return self.err(e.span(), "function calls are not allowed in constant expressions");
        }
        match const_eval(&x).and_then(|v| v.as_int()) {
            Some(i) => Ok(i),
            None => self.err(e.span(), "expected a constant integer expression"),
        }
    }

    /// `(left, dir, right)` of a range with constant bounds.
    fn const_range(&mut self, r: &PRange) -> R<(i64, Dir, i64)> {
        match r {
            PRange::Explicit(l, d, h) => Ok((self.const_int(l)?, *d, self.const_int(h)?)),
            PRange::Attr(n, rev) => {
                let (ety, span) = (self.name_type(n)?, n.span);
                match (ety.ty.dir(), &ety.ty) {
                    (
                        Some(dir),
                        Type::Vector {
                            range: Some((lo, hi)), ..
                        },
                    ) => {
                        let (l, r) = match dir {
                            Dir::Downto => (*hi, *lo),
                            Dir::To => (*lo, *hi),
                        };
                        Ok(match (rev, dir) {
                            (false, d) => (l, d, r),
                            (true, Dir::To) => (r, Dir::Downto, l),
                            (true, Dir::Downto) => (r, Dir::To, l),
                        })
                    }
                    _ => self.err(span, "`'range` needs a constrained array"),
                }
            }
        }
    }

    fn name_type(&mut self, n: &PName) -> R<ETy> {
        if n.suffixes.is_empty() {
            if let Some(Sym::Type(t)) = self.lookup(&n.base) {
                return Ok(t);
            }
        }
        let cur = self.resolve(n)?;
        Ok(match cur {
            Cur::Obj(o) => o.ety().clone(),
            Cur::Val(_, t) => t,
        })
    }

    fn subtype(&mut self, st: &PSubtype) -> R<ETy> {
        let base = match self.lookup(&st.mark) {
            Some(Sym::Type(t)) => t,
            _ => return self.err(st.span, format!("unknown type `{}`", st.mark)),
        };
        let Some(c) = &st.constraint else { return Ok(base) };
        let (l, dir, r) = self.const_range(c)?;
        match &base.ty {
            Type::Integer { .. } => {
                let (lo, hi) = if dir == Dir::To { (l, r) } else { (r, l) };
                Ok(ETy {
                    ty: Type::Integer { lo, hi },
                    ..base
                })
            }
            Type::Vector { range: None, elem, .. } => {
                let (lo, hi) = if dir == Dir::To { (l, r) } else { (r, l) };
                Ok(ETy {
                    ty: Type::Vector {
                        dir,
                        range: Some((lo, hi)),
                        elem: elem.clone(),
                    },
                    ..base
                })
            }
            _ => self.err(st.span, format!("type `{}` cannot be constrained", st.mark)),
        }
    }

    fn type_def(&mut self, name: &str, def: &PTypeDef, span: Span) -> R<()> {
        let ety = match def {
            PTypeDef::Record(fields) => {
                let mut fs: Vec<(String, ETy)> = Vec::new();
                for (names, st) in fields {
                    let t = self.subtype(st)?;
                    if t.ty.len().is_none() && t.ty.is_vector() {
                        return self.err(st.span, "record fields must have constrained types");
                    }
                    for n in names {
                        if fs.iter().any(|(f, _)| f == n) {
                            return self.err(st.span, format!("duplicate record field `{n}`"));
                        }
                        fs.push((n.clone(), t.clone()));
                    }
                }
                ETy {
                    ty: Type::Record {
                        fields: fs.iter().map(|(n, t)| (n.clone(), t.ty.clone())).collect(),
                    },
                    signed: false,
                    resolved: false,
                    fields: fs,
                }
            }
            PTypeDef::Array(range, elem) => {
                let et = self.subtype(elem)?;
                if !et.fields.is_empty() {
                    return self.err(elem.span, "arrays of records are not supported");
                }
                let (dir, range) = match range {
                    Some(r) => {
                        let (l, d, h) = self.const_range(r)?;
                        (d, Some(if d == Dir::To { (l, h) } else { (h, l) }))
                    }
                    None => (Dir::Downto, None),
                };
                ETy {
                    ty: Type::Vector {
                        dir,
                        range,
                        elem: Box::new(et.ty.clone()),
                    },
                    signed: false,
                    resolved: et.resolved,
                    fields: Vec::new(),
                }
            }
            PTypeDef::Enum(lits) => {
                let t = ETy::of(Type::Integer {
                    lo: 0,
                    hi: lits.len() as i64 - 1,
                });
                for (k, l) in lits.iter().enumerate() {
                    self.declare(span, l, Sym::Enum(k as i64, t.clone()))?;
                }
                t
            }
            PTypeDef::Range(r) => {
                let (l, d, h) = self.const_range(r)?;
                let (lo, hi) = if d == Dir::To { (l, h) } else { (h, l) };
                ETy::of(Type::Integer { lo, hi })
            }
        };
        self.env.types.insert(name.to_string(), ety.ty.clone());
        self.declare(span, name, Sym::Type(ety))
    }

    // -- objects ----------------------------------------------------------------

    /// Value of an initializer, or the type's default.
    fn init_value(&mut self, ety: &ETy, init: Option<&PExpr>) -> R<(Val, ETy)> {
        let Some(e) = init else {
            return Ok((ety.ty.default_value(), ety.clone()));
        };
        let (x, _) = self.expr(e, Some(ety))?;
        if !self.body.pre.is_empty() {
            self.body.pre.clear();
            return self.err(e.span(), "function calls are not allowed in initial values");
        }
        let Some(v) = const_eval(&x) else {
            return self.err(e.span(), "initial value must be constant");
        };
        // an unconstrained constant takes its length from the value
        let mut ety = ety.clone();
        if let Type::Vector { dir, range: None, .. } = &ety.ty {
            if v.is_vector() {
                ety.ty = ety.vec_like(*dir, Some(v.len())).ty;
            }
        }
        match ety.ty.conform(v) {
            Ok(v) => Ok((v, ety)),
            Err(err) => self.err(e.span(), format!("initial value: {err}")),
        }
    }

    fn sp_tree(&mut self, q: &str, ety: &ETy, init: &Val, kind: SpKind, mode: Mode) -> Tree<SigPrt> {
        if ety.fields.is_empty() {
            if ety.resolved {
                self.res_fn.insert(q.to_string(), "resolved".into());
            }
            return Tree::Leaf(SigPrt {
                name: q.to_string(),
                kind,
                mode,
                ty: ety.ty.clone(),
                init: init.clone(),
            });
        }
        let local = q.rsplit('.').next().unwrap_or(q).to_string();
        let kids = ety
            .fields
            .iter()
            .map(|(f, ft)| {
                let v = field_of(init, f).unwrap_or_else(|| ft.ty.default_value());
                self.sp_tree(&format!("{q}.{f}"), ft, &v, kind, mode)
            })
            .collect();
        Tree::Spnl(local, kids)
    }

    fn var_tree(q: &str, ety: &ETy, init: &Val) -> Tree<VarDecl> {
        if ety.fields.is_empty() {
            return Tree::Leaf(VarDecl {
                name: q.to_string(),
                ty: ety.ty.clone(),
                init: init.clone(),
            });
        }
        let local = q.rsplit('.').next().unwrap_or(q).to_string();
        Tree::Spnl(
            local,
            ety.fields
                .iter()
                .map(|(f, ft)| {
                    let v = field_of(init, f).unwrap_or_else(|| ft.ty.default_value());
                    Elab::var_tree(&format!("{q}.{f}"), ft, &v)
                })
                .collect(),
        )
    }

    fn declare_var(&mut self, span: Span, local: &str, ety: &ETy, init: &Val) -> R<String> {
        let q = format!("{}.{local}", self.body.scope);
        self.env.vars.push(Elab::var_tree(&q, ety, init));
        self.declare(
            span,
            local,
            Sym::Obj {
                q: q.clone(),
                class: Class::Var,
                ety: ety.clone(),
            },
        )?;
        Ok(q)
    }

    fn new_temp(&mut self, ety: &ETy) -> String {
        loop {
            self.body.temps += 1;
            let q = format!("{}.__t{}", self.body.scope, self.body.temps);
            let taken = self.env.vars.iter().any(|t| t.leaves().iter().any(|v| v.name == q));
            if !taken {
                let init = ety.ty.default_value();
                self.env.vars.push(Elab::var_tree(&q, ety, &init));
                return q;
            }
        }
    }

    fn decls(&mut self, ds: &[PDecl], region: Region) {
        for d in ds {
            let _ = self.decl(d, region);
        }
    }

    fn decl(&mut self, d: &PDecl, region: Region) -> R<()> {
        match d {
            PDecl::Signal(names, st, init, span) => {
                if region != Region::Arch {
                    return self.err(*span, "signals can only be declared in an architecture");
                }
                let ety = self.subtype(st)?;
                let (v, ety) = self.init_value(&ety, init.as_ref())?;
                for n in names {
                    let tree = self.sp_tree(n, &ety, &v, SpKind::Signal, Mode::Internal);
                    self.env.sigprts.push(tree);
                    self.declare(
                        *span,
                        n,
                        Sym::Obj {
                            q: n.clone(),
                            class: Class::Signal,
                            ety: ety.clone(),
                        },
                    )?;
                }
            }
            PDecl::Variable(names, st, init, span) => {
                if region == Region::Arch {
                    return self.err(*span, "variables cannot be declared in an architecture");
                }
                let ety = self.subtype(st)?;
                let (v, ety) = self.init_value(&ety, init.as_ref())?;
                for n in names {
                    self.declare_var(*span, n, &ety, &v)?;
                }
            }
            PDecl::Constant(names, st, init, span) => {
                let ety = self.subtype(st)?;
                let (v, ety) = self.init_value(&ety, Some(init))?;
                for n in names {
                    self.declare(*span, n, Sym::Const(v.clone(), ety.clone()))?;
                }
            }
            PDecl::Type(name, def, span) => self.type_def(name, def, *span)?,
            PDecl::Subtype(name, st, span) => {
                let t = self.subtype(st)?;
                self.declare(*span, name, Sym::Type(t))?;
            }
            PDecl::Component(name, ports, span) => {
                if region != Region::Arch {
                    return self.err(*span, "components can only be declared in an architecture");
                }
                let names = ports.iter().flat_map(|p| p.names.iter().cloned()).collect();
                self.components.insert(name.clone(), names);
            }
            PDecl::Subprogram(sp) => self.subprogram(sp)?,
        }
        Ok(())
    }

    // -- names ------------------------------------------------------------------

    fn resolve(&mut self, n: &PName) -> R<Cur> {
        let mut rest: &[Suffix] = &n.suffixes;
        let span = n.span;
        let mut cur = match self.lookup(&n.base) {
            Some(Sym::Obj { q, class, ety }) => Cur::Obj(ObjRef {
                q,
                class,
                base: ety,
                sel: None,
            }),
            Some(Sym::Const(v, t)) => Cur::Val(Expr::con(v), t),
            Some(Sym::Index(q)) => Cur::Val(Expr::var(q), ETy::int()),
            Some(Sym::Enum(k, t)) => Cur::Val(Expr::int(k), t),
            Some(Sym::Sub(name)) => {
                let args: &[Assoc] = match rest.first() {
                    Some(Suffix::Args(a)) => {
                        rest = &rest[1..];
                        a
                    }
                    _ => &[],
                };
                let (e, t) = self.function_call(&name, args, span)?;
                Cur::Val(e, t)
            }
            Some(Sym::Type(t)) => match rest.first() {
                Some(Suffix::Args(a)) => {
                    rest = &rest[1..];
                    let (e, et) = self.conversion(&n.base, &t, a, span)?;
                    Cur::Val(e, et)
                }
                _ => return self.err(span, format!("type `{}` used as a value", n.base)),
            },
            None => match rest.first() {
                Some(Suffix::Args(a)) => {
                    rest = &rest[1..];
                    let (e, t) = self.builtin(&n.base, a, span)?;
                    Cur::Val(e, t)
                }
                _ => return self.err(span, format!("undeclared name `{}`", n.base)),
            },
        };
        for s in rest {
            cur = self.suffix(cur, s, span)?;
        }
        Ok(cur)
    }

    fn suffix(&mut self, cur: Cur, s: &Suffix, span: Span) -> R<Cur> {
        match s {
            Suffix::Field(f) => match cur {
                Cur::Obj(o) if o.sel.is_none() => match o.base.fields.iter().find(|(n, _)| n == f) {
                    Some((_, ft)) => Ok(Cur::Obj(ObjRef {
                        q: format!("{}.{f}", o.q),
                        class: o.class,
                        base: ft.clone(),
                        sel: None,
                    })),
                    None => self.err(span, format!("`{}` has no field `{f}`", o.q)),
                },
                _ => self.err(span, format!("field `{f}` of a non-record value")),
            },
            Suffix::Args(args) => {
                let [Assoc {
                    formal: None,
                    actual: Some(ix),
                }] = args.as_slice()
                else {
                    return self.err(span, "only single-dimensional indexing is supported");
                };
                let ety = match &cur {
                    Cur::Obj(o) => o.ety().clone(),
                    Cur::Val(_, t) => t.clone(),
                };
                let Some(elem) = ety.elem() else {
                    return self.err(span, "indexing a value that is not an array");
                };
                let (i, it) = self.expr(ix, Some(&ETy::int()))?;
                if !it.is_int() {
                    return self.err(ix.span(), "array index must be an integer");
                }
                let pos = offset(i, ety.ty.low().unwrap_or(0));
                Ok(match cur {
                    Cur::Obj(mut o) if o.sel.is_none() => {
                        o.sel = Some((Sel::Index(pos), elem));
                        Cur::Obj(o)
                    }
                    other => {
                        let (v, _) = self.value_of(other, span)?;
                        Cur::Val(Expr::nth(v, pos), elem)
                    }
                })
            }
            Suffix::Slice(r) => {
                let ety = match &cur {
                    Cur::Obj(o) => o.ety().clone(),
                    Cur::Val(_, t) => t.clone(),
                };
                let Some(base_dir) = ety.ty.dir() else {
                    return self.err(span, "slicing a value that is not an array");
                };
                let (l, dir, h) = self.range_exprs(r)?;
                let low = ety.ty.low().unwrap_or(0);
                let (lo, hi) = match dir {
                    Dir::Downto => (offset(h, low), offset(l, low)),
                    Dir::To => (offset(l, low), offset(h, low)),
                };
                let len = fold(Expr::arith(
                    Expr::arith(hi.clone(), ArithOp::Sub, lo.clone()),
                    ArithOp::Add,
                    Expr::int(1),
                ));
                let n = const_eval(&len).and_then(|v| v.as_int()).map(|n| n.max(0) as usize);
                let sty = ety.vec_like(base_dir, n);
                Ok(match cur {
                    Cur::Obj(mut o) if o.sel.is_none() => {
                        o.sel = Some((Sel::Slice { lo, hi, dir }, sty));
                        Cur::Obj(o)
                    }
                    other => {
                        let (v, _) = self.value_of(other, span)?;
                        Cur::Val(Expr::slice(v, lo, len), sty)
                    }
                })
            }
            Suffix::Attr(a) => self.attribute(cur, a, span),
        }
    }

    fn attribute(&mut self, cur: Cur, a: &str, span: Span) -> R<Cur> {
        if a == "event" {
            return match cur {
                Cur::Obj(ObjRef {
                    class: Class::Signal | Class::Port(_),
                    ..
                }) => Ok(Cur::Val(bool_con(true), ETy::boolean())),
                _ => self.err(span, "`'event` applies to signals only"),
            };
        }
        let ety = match &cur {
            Cur::Obj(o) => o.ety().clone(),
            Cur::Val(_, t) => t.clone(),
        };
        let (dir, lo, hi) = match &ety.ty {
            Type::Vector {
                dir,
                range: Some((lo, hi)),
                ..
            } => (*dir, *lo, *hi),
            Type::Vector { range: None, .. } => {
                return self.err(span, format!("`'{a}` of an unconstrained array is not supported"))
            }
            _ => return self.err(span, format!("attribute `'{a}` is not supported here")),
        };
        let (left, right) = if dir == Dir::Downto { (hi, lo) } else { (lo, hi) };
        let v = match a {
            "length" => Val::int((hi - lo + 1).max(0)),
            "left" => Val::int(left),
            "right" => Val::int(right),
            "high" => Val::int(hi),
            "low" => Val::int(lo),
            "ascending" => Val::boolean(dir == Dir::To),
            "range" | "reverse_range" => return self.err(span, format!("`'{a}` is only allowed as a range")),
            _ => return self.err(span, format!("attribute `'{a}` is not supported")),
        };
        let t = if a == "ascending" { ETy::boolean() } else { ETy::int() };
        Ok(Cur::Val(Expr::con(v), t))
    }

    fn value_of(&mut self, cur: Cur, span: Span) -> R<(Expr, ETy)> {
        match cur {
            Cur::Val(e, t) => Ok((e, t)),
            Cur::Obj(o) => {
                let base = match o.class {
                    Class::Signal => Expr::sig(o.q.clone()),
                    Class::Port(Mode::Out) => {
                        return self.err(span, format!("out port `{}` cannot be read", o.q));
                    }
                    Class::Port(_) if o.base.fields.is_empty() => Expr::prt(o.q.clone()),
                    Class::Port(_) => Expr::sig(o.q.clone()),
                    Class::Var => Expr::var(o.q.clone()),
                };
                Ok(match o.sel {
                    None => (base, o.base),
                    Some((Sel::Index(p), t)) => (Expr::nth(base, p), t),
                    Some((Sel::Slice { lo, hi, .. }, t)) => {
                        let len = fold(Expr::arith(
                            Expr::arith(hi, ArithOp::Sub, lo.clone()),
                            ArithOp::Add,
                            Expr::int(1),
                        ));
                        (Expr::slice(base, lo, len), t)
                    }
                })
            }
        }
    }

    /// Assignment target: the object, its core left-hand side and the type
    /// of the addressed part.
    fn target(&mut self, n: &PName) -> R<(Lhs, ETy, Class)> {
        match self.resolve(n)? {
            Cur::Obj(o) => {
                let ety = o.ety().clone();
                let range = match o.sel {
                    None => None,
                    Some((Sel::Index(p), _)) => Some(DiscreteRange {
                        lo: p.clone(),
                        hi: p,
                        dir: o.base.ty.dir().unwrap_or(Dir::To),
                    }),
                    Some((Sel::Slice { lo, hi, dir }, _)) => Some(DiscreteRange { lo, hi, dir }),
                };
                Ok((Lhs { name: o.q, range }, ety, o.class))
            }
            Cur::Val(..) => self.err(n.span, format!("`{}` cannot be assigned", n.base)),
        }
    }

    fn range_exprs(&mut self, r: &PRange) -> R<(Expr, Dir, Expr)> {
        match r {
            PRange::Explicit(l, d, h) => {
                let (le, lt) = self.expr(l, Some(&ETy::int()))?;
                let (he, ht) = self.expr(h, Some(&ETy::int()))?;
                if !lt.is_int() || !ht.is_int() {
                    return self.err(l.span(), "range bounds must be integers");
                }
                Ok((le, *d, he))
            }
            PRange::Attr(..) => {
                let (l, d, h) = self.const_range(r)?;
                Ok((Expr::int(l), d, Expr::int(h)))
            }
        }
    }

    // -- calls ----------------------------------------------------------------

    fn bind_args(&mut self, name: &str, sig: &SubSig, args: &[Assoc], span: Span) -> R<Vec<Lhs>> {
        let mut slots: Vec<Option<&PExpr>> = vec![None; sig.formals.len()];
        let mut positional = true;
        for (k, a) in args.iter().enumerate() {
            let idx = match &a.formal {
                None if positional => k,
                None => return self.err(span, "positional argument after named ones"),
                Some(f) => {
                    positional = false;
                    let local = f.as_str();
                    match sig
                        .formals
                        .iter()
                        .position(|(n, _, _)| n.rsplit('.').next() == Some(local))
                    {
                        Some(i) => i,
                        None => return self.err(span, format!("`{name}` has no parameter `{f}`")),
                    }
                }
            };
            if idx >= slots.len() {
                return self.err(
                    span,
                    format!("`{name}` expects {} arguments, got {}", sig.formals.len(), args.len()),
                );
            }
            let Some(actual) = &a.actual else {
                return self.err(span, "`open` is not allowed in subprogram calls");
            };
            if slots[idx].replace(actual).is_some() {
                return self.err(span, "parameter associated twice");
            }
        }
        let mut out = Vec::new();
        for (slot, (fname, mode, fty)) in slots.into_iter().zip(&sig.formals) {
            let Some(actual) = slot else {
                let local = fname.rsplit('.').next().unwrap_or(fname);
                return self.err(span, format!("missing argument for parameter `{local}` of `{name}`"));
            };
            // a variable is passed directly
            if let PExpr::Name(n) = actual {
                if let Some(Sym::Obj { class: Class::Var, .. }) = self.lookup(&n.base) {
                    if let Ok((lhs, _, Class::Var)) = self.target(n) {
                        out.push(lhs);
                        continue;
                    }
                }
            }
            if *mode != Mode::In {
                return self.err(actual.span(), format!("actual for {mode} parameter must be a variable"));
            }
            let (e, et) = self.expr(actual, Some(fty))?;
            let tty = if fty.ty.len().is_some() || !fty.ty.is_vector() {
                fty.clone()
            } else {
                et
            };
            let t = self.new_temp(&tty);
            self.body
                .pre
                .push(CSeq::SstVa(String::new(), Lhs::whole(t.clone()), AsmtRhs::RhsE(e)));
            out.push(Lhs::whole(t));
        }
        Ok(out)
    }

    fn function_call(&mut self, name: &str, args: &[Assoc], span: Span) -> R<(Expr, ETy)> {
        let Some(sig) = self.sigs.get(name).cloned() else {
            return self.err(span, format!("unknown subprogram `{name}`"));
        };
        let Some(ret) = sig.ret.clone().filter(|_| sig.kind == SubprogramKind::Function) else {
            return self.err(span, format!("procedure `{name}` used in an expression"));
        };
        let actuals = self.bind_args(name, &sig, args, span)?;
        let t = self.new_temp(&ret);
        self.body.pre.push(CSeq::SstFn(
            String::new(),
            Lhs::whole(t.clone()),
            SubProgCall {
                callee: name.to_string(),
                args: actuals,
                ret_type: Some(ret.ty.clone()),
            },
        ));
        Ok((Expr::var(t), ret))
    }

    fn conversion(&mut self, mark: &str, t: &ETy, args: &[Assoc], span: Span) -> R<(Expr, ETy)> {
        let [Assoc {
            formal: None,
            actual: Some(a),
        }] = args
        else {
            return self.err(span, format!("conversion to `{mark}` takes one argument"));
        };
        let (e, et) = self.expr(a, Some(t))?;
        match (&t.ty, &et.ty) {
            (Type::Vector { elem: te, .. }, Type::Vector { elem: ee, .. }) if te == ee => Ok((
                e,
                ETy {
                    signed: t.signed,
                    resolved: t.resolved,
                    ..et
                },
            )),
            (Type::Integer { .. }, Type::Integer { .. }) => Ok((e, t.clone())),
            (a_ty, b_ty) if a_ty.scalar_kind().is_some() && a_ty.scalar_kind() == b_ty.scalar_kind() => {
                Ok((e, t.clone()))
            }
            _ => self.err(span, format!("cannot convert {} to `{mark}`", et.ty)),
        }
    }

    fn positional<'b>(&mut self, name: &str, args: &'b [Assoc], n: usize, span: Span) -> R<Vec<&'b PExpr>> {
        let xs: Vec<&PExpr> = args
            .iter()
            .filter(|a| a.formal.is_none())
            .filter_map(|a| a.actual.as_ref())
            .collect();
        if xs.len() != args.len() || xs.len() != n {
            return self.err(span, format!("`{name}` takes {n} positional argument(s)"));
        }
        Ok(xs)
    }

    fn builtin(&mut self, name: &str, args: &[Assoc], span: Span) -> R<(Expr, ETy)> {
        match name {
            "rising_edge" | "falling_edge" => {
                let a = self.positional(name, args, 1, span)?;
                let PExpr::Name(n) = a[0] else {
                    return self.err(span, format!("`{name}` needs a signal"));
                };
                let cur = self.resolve(n)?;
                if !matches!(
                    cur,
                    Cur::Obj(ObjRef {
                        class: Class::Signal | Class::Port(_),
                        ..
                    })
                ) {
                    return self.err(span, format!("`{name}` needs a signal"));
                }
                let (e, t) = self.value_of(cur, span)?;
                let level = name == "rising_edge";
                let lit = match t.scalar_kind() {
                    Some(ScalarKind::Logic) => Val::logic(Logic9::from_bool(level)),
                    Some(ScalarKind::Bit) => Val::bit(level),
                    Some(ScalarKind::Bool) => Val::boolean(level),
                    _ => return self.err(span, format!("`{name}` needs a bit or std_logic signal")),
                };
                Ok((Expr::rel(e, RelOp::Eq, Expr::con(lit)), ETy::boolean()))
            }
            "to_integer" | "conv_integer" => {
                let a = self.positional(name, args, 1, span)?;
                let (e, t) = self.expr(a[0], None)?;
                if t.is_int() {
                    return Ok((e, t));
                }
                if !t.ty.is_vector() {
                    return self.err(span, format!("`{name}` needs a vector"));
                }
                let op = if t.signed { UnOp::ToIntSigned } else { UnOp::ToInt };
                Ok((Expr::unop(op, e), ETy::int()))
            }
            "to_unsigned" | "to_signed" | "conv_std_logic_vector" | "conv_unsigned" | "conv_signed" => {
                let a = self.positional(name, args, 2, span)?;
                let (v, vt) = self.expr(a[0], Some(&ETy::int()))?;
                if !vt.is_int() {
                    return self.err(a[0].span(), format!("`{name}` converts integers"));
                }
                let w = self.const_int(a[1])?;
                if !(1..=4096).contains(&w) {
                    return self.err(a[1].span(), format!("width {w} out of range"));
                }
                let zero = Val::from_storage(Dir::Downto, vec![Val::logic(Logic9::Zero); w as usize]);
                let ety = ETy {
                    ty: Type::logic_vec(w - 1, 0),
                    signed: name.ends_with("signed") && !name.ends_with("unsigned"),
                    resolved: true,
                    fields: Vec::new(),
                };
                Ok((Expr::arith(Expr::con(zero), ArithOp::Add, v), ety))
            }
            "resize" => {
                let a = self.positional(name, args, 2, span)?;
                let (v, vt) = self.expr(a[0], None)?;
                let (Some(n), Some(dir)) = (vt.ty.len(), vt.ty.dir()) else {
                    return self.err(a[0].span(), "`resize` needs a vector of known length");
                };
                let w = self.const_int(a[1])?;
                if w < 1 {
                    return self.err(a[1].span(), "`resize` width must be positive");
                }
                let (n, w) = (n as i64, w);
                let out_ty = vt.vec_like(dir, Some(w as usize));
                if w == n {
                    return Ok((v, out_ty));
                }
                if w < n {
                    // keep the low-order end
                    let start = if dir == Dir::Downto { 0 } else { n - w };
                    return Ok((Expr::slice(v, Expr::int(start), Expr::int(w)), out_ty));
                }
                let ext = (w - n) as usize;
                let wrap = |e: Expr| match dir {
                    Dir::To => Expr::ExpTl(Box::new(e)),
                    Dir::Downto => Expr::ExpTrl(Box::new(e)),
                };
                let prefix = if vt.signed {
                    let msb = Expr::nth(v.clone(), Expr::int(if dir == Dir::Downto { n - 1 } else { 0 }));
                    (1..ext).fold(wrap(msb.clone()), |acc, _| {
                        Expr::arith(acc, ArithOp::Concat, wrap(msb.clone()))
                    })
                } else {
                    let elem = vt.ty.elem().cloned().unwrap_or(Type::Logic);
                    let zero = match elem {
                        Type::Bit => Val::bit(false),
                        _ => Val::logic(Logic9::Zero),
                    };
                    Expr::con(Val::from_storage(dir, vec![zero; ext]))
                };
                Ok((Expr::arith(prefix, ArithOp::Concat, v), out_ty))
            }
            "shift_left" | "shift_right" | "rotate_left" | "rotate_right" => {
                let a = self.positional(name, args, 2, span)?;
                let (v, vt) = self.expr(a[0], None)?;
                let (n, _) = self.expr(a[1], Some(&ETy::int()))?;
                let op = match name {
                    "shift_left" => ShiftOp::Sll,
                    "shift_right" if vt.signed => ShiftOp::Sra,
                    "shift_right" => ShiftOp::Srl,
                    "rotate_left" => ShiftOp::Rol,
                    _ => ShiftOp::Ror,
                };
                Ok((Expr::shift(v, op, n), vt))
            }
            _ => self.err(span, format!("undeclared subprogram `{name}`")),
        }
    }

    // -- expressions ------------------------------------------------------------

    fn untyped(e: &PExpr) -> bool {
        match e {
            PExpr::Str(..) | PExpr::Char(..) | PExpr::Aggregate(..) => true,
            PExpr::Binary(l, BinOp::Concat, r, _) => Elab::untyped(l) && Elab::untyped(r),
            _ => false,
        }
    }

    fn expr(&mut self, e: &PExpr, want: Option<&ETy>) -> R<(Expr, ETy)> {
        match e {
            PExpr::Int(i, _) => Ok((Expr::int(*i), ETy::int())),
            PExpr::Real(r, _) => Ok((Expr::con(Val::Scalar(Scalar::Real(*r))), ETy::of(Type::Real))),
            PExpr::Char(c, span) => self.char_lit(*c, want, *span),
            PExpr::Str(s, span) => self.str_lit(s, want, *span),
            PExpr::Name(n) => {
                let cur = self.resolve(n)?;
                self.value_of(cur, n.span)
            }
            PExpr::Unary(op, a, span) => {
                let (x, t) = self.expr(a, want)?;
                Ok(match op {
                    UnaryOp::Plus => (x, t),
                    UnaryOp::Not => (Expr::unop(UnOp::Not, x), t),
                    UnaryOp::Neg => {
                        if t.ty.is_vector() && !t.signed {
                            return self.err(*span, "negation of an unsigned vector");
                        }
                        (fold(Expr::unop(UnOp::Neg, x)), t)
                    }
                    UnaryOp::Abs => (Expr::unop(UnOp::Abs, x), t),
                })
            }
            PExpr::Binary(l, op, r, span) => self.binary(l, op, r, *span, want),
            PExpr::Aggregate(items, span) => self.aggregate(items, want, *span),
        }
    }

    fn char_lit(&mut self, c: char, want: Option<&ETy>, span: Span) -> R<(Expr, ETy)> {
        let kind = want
            .and_then(|w| w.elem_kind())
            .unwrap_or(if Logic9::from_char(c).is_some() {
                ScalarKind::Logic
            } else {
                ScalarKind::Char
            });
        match scalar_from_char(kind, c) {
            Some(v) => {
                let ty = match kind {
                    ScalarKind::Logic => Type::Logic,
                    ScalarKind::Bit => Type::Bit,
                    _ => Type::Character,
                };
                Ok((Expr::con(v), ETy::of(ty)))
            }
            None => self.err(span, format!("'{c}' is not a {kind} literal")),
        }
    }

    fn str_lit(&mut self, s: &str, want: Option<&ETy>, span: Span) -> R<(Expr, ETy)> {
        let (kind, dir, signed) = match want {
            Some(w) if w.ty.is_vector() => (
                w.elem_kind().unwrap_or(ScalarKind::Logic),
                w.ty.dir().unwrap_or(Dir::Downto),
                w.signed,
            ),
            _ if s.chars().all(|c| Logic9::from_char(c).is_some()) => (ScalarKind::Logic, Dir::Downto, false),
            _ => (ScalarKind::Char, Dir::To, false),
        };
        let mut elems = Vec::new();
        for c in s.chars() {
            match scalar_from_char(kind, c) {
                Some(v) => elems.push(v),
                None => return self.err(span, format!("'{c}' in \"{s}\" is not a {kind} literal")),
            }
        }
        let elem = match kind {
            ScalarKind::Logic => Type::Logic,
            ScalarKind::Bit => Type::Bit,
            _ => Type::Character,
        };
        let n = elems.len();
        let ety = ETy {
            ty: Type::Vector {
                dir,
                range: Some((0, n as i64 - 1)),
                elem: Box::new(elem),
            },
            signed,
            resolved: kind == ScalarKind::Logic,
            fields: Vec::new(),
        };
        Ok((Expr::con(Val::from_written(dir, elems)), ety))
    }

    fn aggregate(&mut self, items: &[(Option<Choice>, PExpr)], want: Option<&ETy>, span: Span) -> R<(Expr, ETy)> {
        let Some(w) = want.cloned() else {
            return self.err(span, "cannot determine the type of this aggregate");
        };
        if !w.fields.is_empty() {
            let mut got: Vec<(String, AsmtRhs)> = Vec::new();
            for (choice, value) in items {
                let field = match choice {
                    Some(Choice::Expr(PExpr::Name(n))) if n.suffixes.is_empty() => n.base.clone(),
                    _ => return self.err(span, "record aggregates need named fields"),
                };
                let Some((_, ft)) = w.fields.iter().find(|(f, _)| *f == field) else {
                    return self.err(span, format!("record has no field `{field}`"));
                };
                let ft = ft.clone();
                let (e, _) = self.expr(value, Some(&ft))?;
                if got.iter().any(|(f, _)| *f == field) {
                    return self.err(span, format!("field `{field}` given twice"));
                }
                got.push((field, AsmtRhs::RhsE(e)));
            }
            let mut ordered = Vec::new();
            for (f, _) in &w.fields {
                match got.iter().position(|(g, _)| g == f) {
                    Some(i) => ordered.push(got.remove(i)),
                    None => return self.err(span, format!("field `{f}` missing from aggregate")),
                }
            }
            return Ok((Expr::ExpR(ordered), w));
        }
        let (Some(elem), Some(dir)) = (w.elem(), w.ty.dir()) else {
            return self.err(span, "aggregate for a type that is not an array or record");
        };
        if items.iter().all(|(c, _)| c.is_none()) {
            let mut parts = Vec::new();
            for (_, v) in items {
                parts.push(self.expr(v, Some(&elem))?.0);
            }
            let n = parts.len();
            let ety = w.vec_like(dir, Some(n));
            let consts: Option<Vec<Val>> = parts.iter().map(const_eval).collect();
            if let Some(vals) = consts {
                return Ok((Expr::con(Val::from_written(dir, vals)), ety));
            }
            let wrap = |e: Expr| match dir {
                Dir::To => Expr::ExpTl(Box::new(e)),
                Dir::Downto => Expr::ExpTrl(Box::new(e)),
            };
            let e = parts
                .into_iter()
                .map(wrap)
                .reduce(|a, b| Expr::arith(a, ArithOp::Concat, b))
                .expect("non-empty aggregate");
            return Ok((e, ety));
        }
        // named and `others` choices need the target length
        let (Some(n), Some(low)) = (w.ty.len(), w.ty.low()) else {
            return self.err(span, "`others` needs a constrained target type");
        };
        let mut slots: Vec<Option<Val>> = vec![None; n];
        let mut others = None;
        for (choice, v) in items {
            let (e, _) = self.expr(v, Some(&elem))?;
            let Some(val) = const_eval(&e) else {
                return self.err(v.span(), "aggregate elements must be constant here");
            };
            let positions: Vec<i64> = match choice {
                Some(Choice::Others) => {
                    others = Some(val);
                    continue;
                }
                Some(Choice::Expr(c)) => vec![self.const_int(c)?],
                Some(Choice::Range(r)) => {
                    let (l, _, h) = self.const_range(r)?;
                    (l.min(h)..=l.max(h)).collect()
                }
                None => return self.err(span, "positional and named elements cannot be mixed"),
            };
            for p in positions {
                let k = p - low;
                if k < 0 || k as usize >= n {
                    return self.err(span, format!("index {p} outside the target range"));
                }
                slots[k as usize] = Some(val.clone());
            }
        }
        let mut vals = Vec::with_capacity(n);
        for s in slots {
            match s.or_else(|| others.clone()) {
                Some(v) => vals.push(v),
                None => return self.err(span, "aggregate does not cover every element"),
            }
        }
        Ok((Expr::con(Val::from_storage(dir, vals)), w))
    }

    fn binary(&mut self, l: &PExpr, op: &BinOp, r: &PExpr, span: Span, want: Option<&ETy>) -> R<(Expr, ETy)> {
        let typed_want = |t: &ETy| Some(t.clone());
        // type the operand that carries a type first
        let ((le, lt), (re, rt)) = if Elab::untyped(l) && !Elab::untyped(r) {
            let (re, rt) = self.expr(r, None)?;
            let hint = if matches!(op, BinOp::Concat) && !rt.ty.is_vector() {
                want.cloned()
            } else {
                typed_want(&rt)
            };
            let left = self.expr(l, hint.as_ref().or(want))?;
            (left, (re, rt))
        } else {
            let lw = if Elab::untyped(l) { want } else { None };
            let (le, lt) = self.expr(l, lw)?;
            let hint = if matches!(op, BinOp::Concat) && !lt.ty.is_vector() {
                want.cloned()
            } else {
                typed_want(&lt)
            };
            let hint = match op {
                BinOp::Sll | BinOp::Srl | BinOp::Sla | BinOp::Sra | BinOp::Rol | BinOp::Ror | BinOp::Pow => {
                    Some(ETy::int())
                }
                _ => hint,
            };
            let right = self.expr(r, hint.as_ref())?;
            ((le, lt), right)
        };
        let logic = |o| Ok((Expr::logic(le.clone(), o, re.clone()), lt.clone()));
        match op {
            BinOp::And => logic(LogicOp::And),
            BinOp::Or => logic(LogicOp::Or),
            BinOp::Nand => logic(LogicOp::Nand),
            BinOp::Nor => logic(LogicOp::Nor),
            BinOp::Xor => logic(LogicOp::Xor),
            BinOp::Xnor => logic(LogicOp::Xnor),
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let rop = match op {
                    BinOp::Eq => RelOp::Eq,
                    BinOp::Ne => RelOp::Ne,
                    BinOp::Lt => RelOp::Lt,
                    BinOp::Le => RelOp::Le,
                    BinOp::Gt => RelOp::Gt,
                    _ => RelOp::Ge,
                };
                let ordering = !matches!(rop, RelOp::Eq | RelOp::Ne);
                let (lv, rv) = (lt.ty.is_vector(), rt.ty.is_vector());
                let numeric = if (lt.signed && lv) || (rt.signed && rv) {
                    Some(UnOp::ToIntSigned)
                } else if ordering && lv && rv && lt.ty.len() != rt.ty.len() {
                    Some(UnOp::ToInt)
                } else {
                    None
                };
                let (le, re) = match numeric {
                    Some(u) => (
                        if lv { Expr::unop(u, le) } else { le },
                        if rv { Expr::unop(u, re) } else { re },
                    ),
                    None => (le, re),
                };
                Ok((Expr::rel(le, rop, re), ETy::boolean()))
            }
            BinOp::Sll | BinOp::Srl | BinOp::Sla | BinOp::Sra | BinOp::Rol | BinOp::Ror => {
                let sop = match op {
                    BinOp::Sll => ShiftOp::Sll,
                    BinOp::Srl => ShiftOp::Srl,
                    BinOp::Sla => ShiftOp::Sla,
                    BinOp::Sra => ShiftOp::Sra,
                    BinOp::Rol => ShiftOp::Rol,
                    _ => ShiftOp::Ror,
                };
                Ok((Expr::shift(le, sop, re), lt))
            }
            BinOp::Concat => {
                let dir = lt
                    .ty
                    .dir()
                    .or(rt.ty.dir())
                    .or(want.and_then(|w| w.ty.dir()))
                    .unwrap_or(Dir::Downto);
                let wrap = |e: Expr, t: &ETy| {
                    if t.ty.is_vector() {
                        e
                    } else if dir == Dir::To {
                        Expr::ExpTl(Box::new(e))
                    } else {
                        Expr::ExpTrl(Box::new(e))
                    }
                };
                let len = |t: &ETy| if t.ty.is_vector() { t.ty.len() } else { Some(1) };
                let n = len(&lt).zip(len(&rt)).map(|(a, b)| a + b);
                let template = if lt.ty.is_vector() {
                    lt.clone()
                } else if rt.ty.is_vector() {
                    rt.clone()
                } else {
                    let mut t = ETy::of(Type::Vector {
                        dir,
                        range: None,
                        elem: Box::new(lt.ty.clone()),
                    });
                    t.resolved = lt.resolved;
                    t
                };
                let ety = template.vec_like(dir, n);
                Ok((fold(Expr::arith(wrap(le, &lt), ArithOp::Concat, wrap(re, &rt))), ety))
            }
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod | BinOp::Rem | BinOp::Pow => {
                let aop = match op {
                    BinOp::Add => ArithOp::Add,
                    BinOp::Sub => ArithOp::Sub,
                    BinOp::Mul => ArithOp::Mul,
                    BinOp::Div => ArithOp::Div,
                    BinOp::Mod => ArithOp::Mod,
                    BinOp::Rem => ArithOp::Rem,
                    _ => ArithOp::Pow,
                };
                let e = fold(Expr::arith(le, aop, re));
                let (lv, rv) = (lt.ty.is_vector(), rt.ty.is_vector());
                if !lv && !rv {
                    let t = if lt.is_int() && rt.is_int() {
                        ETy::int()
                    } else {
                        lt.clone()
                    };
                    return Ok((e, t));
                }
                let template = if lv { &lt } else { &rt };
                let hint = template.ty.len();
                let (wa, wb) = (if lv { lt.ty.len() } else { hint }, if rv { rt.ty.len() } else { hint });
                let n = match aop {
                    ArithOp::Add | ArithOp::Sub => wa.zip(wb).map(|(a, b)| a.max(b)),
                    ArithOp::Mul => wa.zip(wb).map(|(a, b)| a + b),
                    ArithOp::Pow => return self.err(span, "`**` on vectors is not supported"),
                    _ => wa,
                };
                let mut ety = template.vec_like(template.ty.dir().unwrap_or(Dir::Downto), n);
                ety.signed = (lv && lt.signed) || (rv && rt.signed);
                Ok((e, ety))
            }
        }
    }

    fn cond(&mut self, e: &PExpr) -> R<Expr> {
        let (x, t) = self.expr(e, Some(&ETy::boolean()))?;
        if t.ty != Type::Boolean {
            return self.err(e.span(), format!("condition has type {}, expected boolean", t.ty));
        }
        Ok(x)
    }

    fn rhs(&mut self, e: &PExpr, target: &ETy) -> R<AsmtRhs> {
        if let PExpr::Aggregate(items, _) = e {
            if let [(Some(Choice::Others), fill)] = items.as_slice() {
                if let Some(elem) = target.elem() {
                    return Ok(AsmtRhs::RhsO(self.expr(fill, Some(&elem))?.0));
                }
            }
        }
        Ok(AsmtRhs::RhsE(self.expr(e, Some(target))?.0))
    }

    // -- sequential statements --------------------------------------------------

    fn seq_list(&mut self, ss: &[PSeq]) -> Vec<CSeq> {
        let mut out = Vec::new();
        for s in ss {
            if let Ok(v) = self.seq(s) {
                out.extend(v);
            }
            self.body.pre.clear();
        }
        out
    }

    fn take_pre(&mut self) -> Vec<CSeq> {
        std::mem::take(&mut self.body.pre)
    }

    fn loop_name(&mut self, label: &str) -> String {
        if !label.is_empty() {
            return label.to_string();
        }
        self.body.loops_made += 1;
        format!("loop_{}", self.body.loops_made)
    }

    fn seq(&mut self, s: &PSeq) -> R<Vec<CSeq>> {
        match s {
            PSeq::SigAssign(label, target, e, span) => {
                if self.body.sub.is_some() {
                    return self.err(*span, "signal assignment inside a subprogram");
                }
                let (lhs, ety, class) = self.target(target)?;
                match class {
                    Class::Var => return self.err(*span, format!("`{}` is a variable; use `:=`", target.base)),
                    Class::Port(Mode::In) => {
                        return self.err(*span, format!("cannot assign to in port `{}`", target.base))
                    }
                    _ => {}
                }
                let rhs = self.rhs(e, &ety)?;
                let mut out = self.take_pre();
                out.push(CSeq::SstSa(label.clone(), lhs, rhs));
                Ok(out)
            }
            PSeq::VarAssign(label, target, e, span) => {
                if let Some(Sym::Index(_)) = self.lookup(&target.base) {
                    return self.err(*span, format!("loop variable `{}` cannot be assigned", target.base));
                }
                let (lhs, ety, class) = self.target(target)?;
                if class != Class::Var {
                    return self.err(*span, format!("`{}` is a signal; use `<=`", target.base));
                }
                let rhs = self.rhs(e, &ety)?;
                let mut out = self.take_pre();
                out.push(CSeq::SstVa(label.clone(), lhs, rhs));
                Ok(out)
            }
            PSeq::If(label, arms, els, _) => {
                let mut parts = Vec::new();
                for (c, body) in arms {
                    let ce = self.cond(c);
                    let pre = self.take_pre();
                    let b = self.seq_list(body);
                    parts.push((pre, ce?, b));
                }
                let mut else_acc = match els {
                    Some(b) => self.seq_list(b),
                    None => Vec::new(),
                };
                let mut arms_acc: Vec<(Expr, Vec<CSeq>)> = Vec::new();
                let mut parts = parts.into_iter();
                let (pre0, c0, b0) = parts.next().expect("if has a condition");
                let rest: Vec<_> = parts.collect();
                for (pre, c, b) in rest.into_iter().rev() {
                    if pre.is_empty() {
                        arms_acc.insert(0, (c, b));
                    } else {
                        // calls in an elsif condition run only when reached
                        let inner = CSeq::SscIf(String::new(), c, b, std::mem::take(&mut arms_acc), else_acc);
                        else_acc = pre;
                        else_acc.push(inner);
                    }
                }
                let mut out = pre0;
                out.push(CSeq::SscIf(label.clone(), c0, b0, arms_acc, else_acc));
                Ok(out)
            }
            PSeq::Case(label, sel, whens, span) => {
                let (se, st) = self.expr(sel, None)?;
                let pre = self.take_pre();
                let mut arms = Vec::new();
                let mut others = None;
                for (k, (choices, body)) in whens.iter().enumerate() {
                    let mut cs = Vec::new();
                    for c in choices {
                        match c {
                            Choice::Others => {
                                if k + 1 != whens.len() || choices.len() != 1 {
                                    return self.err(*span, "`others` must be the last, sole choice");
                                }
                            }
                            Choice::Expr(e) => {
                                let (ce, _) = self.expr(e, Some(&st))?;
                                match const_eval(&ce) {
                                    Some(v) => cs.push(Expr::con(v)),
                                    None => return self.err(e.span(), "case choice must be constant"),
                                }
                            }
                            Choice::Range(r) => {
                                let (l, _, h) = self.const_range(r)?;
                                cs.extend((l.min(h)..=l.max(h)).map(Expr::int));
                            }
                        }
                    }
                    let b = self.seq_list(body);
                    if cs.is_empty() {
                        others = Some(b);
                    } else {
                        arms.push((cs, b));
                    }
                }
                let mut out = pre;
                out.push(CSeq::SscCase(label.clone(), se, arms, others));
                Ok(out)
            }
            PSeq::For(label, var, range, body, span) => {
                let name = self.loop_name(label);
                let (l, dir, r) = self.range_exprs(range)?;
                let pre = self.take_pre();
                let q = format!("{}.{name}", self.body.scope);
                self.scopes.push(HashMap::new());
                let _ = self.declare(*span, var, Sym::Index(q.clone()));
                self.body.loops.push(name.clone());
                let b = self.seq_list(body);
                self.body.loops.pop();
                self.scopes.pop();
                let mut out = pre;
                out.push(CSeq::SscFor(name, q, ForRange { left: l, right: r, dir }, b));
                Ok(out)
            }
            PSeq::While(label, cond, body, span) => {
                let name = self.loop_name(label);
                let c = self.cond(cond)?;
                if !self.body.pre.is_empty() {
                    self.body.pre.clear();
                    return self.err(*span, "function calls in a `while` condition are not supported");
                }
                self.body.loops.push(name.clone());
                let b = self.seq_list(body);
                self.body.loops.pop();
                Ok(vec![CSeq::SstL(name, c, b)])
            }
            PSeq::Loop(label, body, _) => {
                let name = self.loop_name(label);
                self.body.loops.push(name.clone());
                let b = self.seq_list(body);
                self.body.loops.pop();
                Ok(vec![CSeq::SstL(name, bool_con(true), b)])
            }
            PSeq::Next(target, cond, span) | PSeq::Exit(target, cond, span) => {
                let is_next = matches!(s, PSeq::Next(..));
                let word = if is_next { "next" } else { "exit" };
                let name = match target {
                    Some(t) if self.body.loops.contains(t) => t.clone(),
                    Some(t) => return self.err(*span, format!("`{word}` names `{t}`, which is not an enclosing loop")),
                    None => match self.body.loops.last() {
                        Some(l) => l.clone(),
                        None => return self.err(*span, format!("`{word}` outside a loop")),
                    },
                };
                let c = match cond {
                    Some(c) => self.cond(c)?,
                    None => bool_con(true),
                };
                let mut out = self.take_pre();
                out.push(if is_next {
                    CSeq::SstN(String::new(), name, c)
                } else {
                    CSeq::SstE(String::new(), name, c)
                });
                Ok(out)
            }
            PSeq::Return(e, span) => {
                let ret = match &self.body.sub {
                    Some(Some(t)) => t.clone(),
                    Some(None) => return self.err(*span, "`return` in a procedure is not supported"),
                    None => return self.err(*span, "`return` outside a function"),
                };
                let Some(e) = e else {
                    return self.err(*span, "a function must return a value");
                };
                let rhs = self.rhs(e, &ret)?;
                let mut out = self.take_pre();
                out.push(CSeq::SstRt(String::new(), rhs));
                Ok(out)
            }
            PSeq::Null => Ok(vec![CSeq::SstNl]),
            PSeq::Call(n) => {
                let sig = match self.lookup(&n.base) {
                    Some(Sym::Sub(name)) => self.sigs.get(&name).cloned(),
                    _ => None,
                };
                let Some(sig) = sig else {
                    return self.err(n.span, format!("unknown procedure `{}`", n.base));
                };
                if sig.kind != SubprogramKind::Procedure {
                    return self.err(n.span, format!("function `{}` called as a statement", n.base));
                }
                let args: &[Assoc] = match n.suffixes.as_slice() {
                    [] => &[],
                    [Suffix::Args(a)] => a,
                    _ => return self.err(n.span, "malformed procedure call"),
                };
                let actuals = self.bind_args(&n.base, &sig, args, n.span)?;
                let mut out = self.take_pre();
                out.push(CSeq::SstPc(
                    String::new(),
                    SubProgCall {
                        callee: n.base.clone(),
                        args: actuals,
                        ret_type: None,
                    },
                ));
                Ok(out)
            }
        }
    }

    // -- subprograms and processes ---------------------------------------------

    fn subprogram(&mut self, sp: &PSubprogram) -> R<()> {
        let name = sp.name.clone();
        if self.sigs.contains_key(&name) {
            return self.err(
                sp.span,
                format!("subprogram `{name}` declared twice (overloading is not supported)"),
            );
        }
        if self.labels.contains(&name) {
            return self.err(
                sp.span,
                format!("subprogram `{name}` has the name of a statement label"),
            );
        }
        let kind = if sp.is_function {
            SubprogramKind::Function
        } else {
            SubprogramKind::Procedure
        };
        let mut formals = Vec::new();
        for p in &sp.params {
            let ety = self.subtype(&p.ty)?;
            let mode = match p.mode {
                PMode::In => Mode::In,
                PMode::Out => Mode::Out,
                PMode::Inout | PMode::Buffer => Mode::Inout,
            };
            if sp.is_function && mode != Mode::In {
                return self.err(p.span, "function parameters must have mode `in`");
            }
            if p.init.is_some() {
                return self.err(p.span, "parameter defaults are not supported");
            }
            for n in &p.names {
                formals.push((format!("{name}.{n}"), mode, ety.clone()));
            }
        }
        let ret = match &sp.ret {
            Some(st) => Some(self.subtype(st)?),
            None => None,
        };
        self.sigs.insert(
            name.clone(),
            SubSig {
                kind,
                formals: formals.clone(),
                ret: ret.clone(),
            },
        );
        self.declare(sp.span, &name, Sym::Sub(name.clone()))?;
        let saved = std::mem::replace(
            &mut self.body,
            Body {
                scope: name.clone(),
                sub: Some(ret.clone()),
                ..Body::default()
            },
        );
        self.scopes.push(HashMap::new());
        for (q, mode, ety) in &formals {
            let local = q.rsplit('.').next().unwrap_or(q);
            self.env.vars.push(Elab::var_tree(q, ety, &ety.ty.default_value()));
            let _ = self.declare(
                sp.span,
                local,
                Sym::Obj {
                    q: q.clone(),
                    class: Class::Var,
                    ety: ety.clone(),
                },
            );
            let _ = mode;
        }
        self.decls(&sp.decls, Region::Subprogram);
        let body = self.seq_list(&sp.body);
        self.scopes.pop();
        self.body = saved;
        self.subprograms.push(CSubprogram {
            name,
            kind,
            formals: formals
                .into_iter()
                .map(|(q, mode, ety)| Formal {
                    name: q,
                    mode,
                    ty: ety.ty,
                })
                .collect(),
            ret_type: ret.map(|t| t.ty),
            body,
        });
        Ok(())
    }

    fn signal_name(&mut self, n: &PName) -> R<String> {
        // `v(3)` in a sensitivity list stands for the whole of `v`
        let whole = PName {
            base: n.base.clone(),
            suffixes: n
                .suffixes
                .iter()
                .take_while(|s| matches!(s, Suffix::Field(_)))
                .cloned()
                .collect(),
            span: n.span,
        };
        match self.resolve(&whole)? {
            Cur::Obj(ObjRef {
                q,
                class: Class::Signal | Class::Port(_),
                ..
            }) => Ok(q),
            _ => self.err(n.span, format!("`{}` is not a signal", n.base)),
        }
    }

    fn process(
        &mut self,
        label: &Option<String>,
        sens: &Sensitivity,
        decls: &[PDecl],
        body: &[PSeq],
        span: Span,
    ) -> R<CConc> {
        let name = match label {
            Some(l) => l.clone(),
            None => self.fresh_name("process"),
        };
        let saved = std::mem::replace(
            &mut self.body,
            Body {
                scope: name.clone(),
                ..Body::default()
            },
        );
        self.scopes.push(HashMap::new());
        self.decls(decls, Region::Process);
        let stmts = self.seq_list(body);
        let mut sensitivity = Vec::new();
        match sens {
            Sensitivity::List(names) => {
                for n in names {
                    if let Ok(q) = self.signal_name(n) {
                        if !sensitivity.contains(&q) {
                            sensitivity.push(q);
                        }
                    }
                }
            }
            Sensitivity::All => {
                let mut reads = Vec::new();
                for s in &stmts {
                    let mut s = s.clone();
                    s.map_exprs(&mut |e| e.signals_read(&mut reads));
                }
                for r in reads {
                    if !sensitivity.contains(&r) {
                        sensitivity.push(r);
                    }
                }
            }
        }
        self.scopes.pop();
        self.body = saved;
        if sensitivity.is_empty() {
            self.diags.push(Diag::warning(
                span,
                format!("process `{name}` has an empty sensitivity list and runs only at start-up"),
            ));
        }
        Ok(CConc::CstPs(CProcess {
            name,
            sensitivity,
            body: stmts,
        }))
    }

    // -- concurrent statements --------------------------------------------------

    fn conc_list(&mut self, cs: &[PConc]) -> Vec<CConc> {
        let mut out = Vec::new();
        for c in cs {
            if let Ok(x) = self.conc(c) {
                out.push(x);
            }
        }
        out
    }

    fn conc(&mut self, c: &PConc) -> R<CConc> {
        match c {
            PConc::Process {
                label,
                sensitivity,
                decls,
                body,
                span,
            } => self.process(label, sensitivity, decls, body, *span),
            PConc::CondAssign {
                label, target, arms, ..
            } => {
                let name = match label {
                    Some(l) => l.clone(),
                    None => self.fresh_name("assign"),
                };
                self.with_body(&name, |me| {
                    let (lhs, ety, class) = me.target(target)?;
                    me.check_signal_target(class, target)?;
                    let mut whens = Vec::new();
                    let mut else_rhs = None;
                    for (e, cond) in arms {
                        let r = me.rhs(e, &ety)?;
                        match cond {
                            Some(c) => whens.push((r, me.cond(c)?)),
                            None => else_rhs = Some(r),
                        }
                    }
                    Ok(CConc::CscCa {
                        name: name.clone(),
                        target: lhs,
                        whens,
                        else_rhs,
                        setup: me.take_pre(),
                    })
                })
            }
            PConc::SelAssign {
                label,
                selector,
                target,
                arms,
                span,
            } => {
                let name = match label {
                    Some(l) => l.clone(),
                    None => self.fresh_name("assign"),
                };
                self.with_body(&name, |me| {
                    let (lhs, ety, class) = me.target(target)?;
                    me.check_signal_target(class, target)?;
                    let (se, st) = me.expr(selector, None)?;
                    let mut whens = Vec::new();
                    let mut else_rhs = None;
                    for (k, (e, choices)) in arms.iter().enumerate() {
                        let r = me.rhs(e, &ety)?;
                        if matches!(choices.as_slice(), [Choice::Others]) {
                            if k + 1 != arms.len() {
                                return me.err(*span, "`others` must be the last choice");
                            }
                            else_rhs = Some(r);
                            continue;
                        }
                        let mut cond: Option<Expr> = None;
                        for ch in choices {
                            let vals: Vec<Expr> = match ch {
                                Choice::Expr(x) => {
                                    let (ce, _) = me.expr(x, Some(&st))?;
                                    match const_eval(&ce) {
                                        Some(v) => vec![Expr::con(v)],
                                        None => return me.err(x.span(), "choice must be constant"),
                                    }
                                }
                                Choice::Range(rg) => {
                                    let (l, _, h) = me.const_range(rg)?;
                                    (l.min(h)..=l.max(h)).map(Expr::int).collect()
                                }
                                Choice::Others => return me.err(*span, "`others` must stand alone"),
                            };
                            for v in vals {
                                let t = Expr::rel(se.clone(), RelOp::Eq, v);
                                cond = Some(match cond {
                                    None => t,
                                    Some(acc) => Expr::logic(acc, LogicOp::Or, t),
                                });
                            }
                        }
                        whens.push((r, cond.expect("at least one choice")));
                    }
                    Ok(CConc::CscCa {
                        name: name.clone(),
                        target: lhs,
                        whens,
                        else_rhs,
                        setup: me.take_pre(),
                    })
                })
            }
            PConc::ForGen {
                label,
                var,
                range,
                body,
                span,
            } => {
                let (l, dir, r) = self.range_exprs(range)?;
                if !self.body.pre.is_empty() {
                    self.body.pre.clear();
                    return self.err(*span, "function calls in a generate range are not supported");
                }
                let q = format!("{label}.{var}");
                self.scopes.push(HashMap::new());
                let _ = self.declare(*span, var, Sym::Index(q.clone()));
                let inner = self.conc_list(body);
                self.scopes.pop();
                Ok(CConc::CscGen {
                    name: label.clone(),
                    gen: GenType::ForGen {
                        var: q,
                        range: ForRange { left: l, right: r, dir },
                    },
                    body: inner,
                })
            }
            PConc::IfGen {
                label,
                cond,
                body,
                span,
            } => {
                let c = self.cond(cond)?;
                if !self.body.pre.is_empty() {
                    self.body.pre.clear();
                    return self.err(*span, "function calls in a generate condition are not supported");
                }
                let inner = self.conc_list(body);
                Ok(CConc::CscGen {
                    name: label.clone(),
                    gen: GenType::IfGen(c),
                    body: inner,
                })
            }
            PConc::Instance {
                label,
                component,
                ports,
                span,
            } => self.instance(label, component, ports, *span),
        }
    }

    fn check_signal_target(&mut self, class: Class, target: &PName) -> R<()> {
        match class {
            Class::Var => self.err(target.span, format!("`{}` is a variable", target.base)),
            Class::Port(Mode::In) => self.err(target.span, format!("cannot assign to in port `{}`", target.base)),
            _ => Ok(()),
        }
    }

    fn with_body<T>(&mut self, scope: &str, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        let saved = std::mem::replace(
            &mut self.body,
            Body {
                scope: scope.to_string(),
                ..Body::default()
            },
        );
        let r = f(self);
        self.body = saved;
        r
    }

    fn instance(&mut self, label: &str, component: &str, ports: &[Assoc], span: Span) -> R<CConc> {
        let port_names: Vec<String> = match self.components.get(component) {
            Some(p) => p.clone(),
            None => match self.entities.get(component) {
                Some(e) => e.ports.iter().flat_map(|p| p.names.iter().cloned()).collect(),
                None => return self.err(span, format!("unknown component `{component}`")),
            },
        };
        let mut map = Vec::new();
        let mut positional = true;
        for (k, a) in ports.iter().enumerate() {
            let formal = match &a.formal {
                Some(f) => {
                    positional = false;
                    if !port_names.contains(f) {
                        return self.err(span, format!("`{component}` has no port `{f}`"));
                    }
                    f.clone()
                }
                None if positional => match port_names.get(k) {
                    Some(f) => f.clone(),
                    None => return self.err(span, format!("too many ports for `{component}`")),
                },
                None => return self.err(span, "positional association after named ones"),
            };
            let Some(actual) = &a.actual else { continue };
            let PExpr::Name(n) = actual else {
                return self.err(actual.span(), "port map actuals must be signal or port names");
            };
            if n.suffixes.iter().any(|s| !matches!(s, Suffix::Field(_))) {
                return self.err(n.span, "port map actuals must be whole signals or ports");
            }
            let q = self.signal_name(n)?;
            map.push((formal, q));
        }
        Ok(CConc::Inst(Instance {
            label: label.to_string(),
            component: component.to_string(),
            port_map: map,
        }))
    }

    fn design(&mut self, ent: &PEntity, arch: &PArchitecture) -> ComplexDesign {
        self.scopes.push(HashMap::new());
        collect_labels(&arch.body, &mut self.labels);
        for p in &ent.ports {
            let Ok(ety) = self.subtype(&p.ty) else { continue };
            let Ok((v, ety)) = self.init_value(&ety, p.init.as_ref()) else {
                continue;
            };
            let mode = match p.mode {
                PMode::In => Mode::In,
                PMode::Out => Mode::Out,
                PMode::Inout | PMode::Buffer => Mode::Inout,
            };
            for n in &p.names {
                let tree = self.sp_tree(n, &ety, &v, SpKind::Port, mode);
                self.env.sigprts.push(tree);
                let _ = self.declare(
                    p.span,
                    n,
                    Sym::Obj {
                        q: n.clone(),
                        class: Class::Port(mode),
                        ety: ety.clone(),
                    },
                );
            }
        }
        self.decls(&arch.decls, Region::Arch);
        let conc = self.conc_list(&arch.body);
        self.scopes.pop();
        ComplexDesign {
            name: ent.name.clone(),
            env: std::mem::take(&mut self.env),
            res_fn: std::mem::take(&mut self.res_fn),
            conc,
            subprograms: std::mem::take(&mut self.subprograms),
        }
    }
}

fn field_of(v: &Val, f: &str) -> Option<Val> {
    match v {
        Val::Record(fs) => fs.iter().find(|(n, _)| n == f).map(|(_, v)| v.clone()),
        _ => None,
    }
}

/// Elaborates parsed files into one surface design per architecture.
/// Designs with errors are left out.
pub fn elaborate(files: &[PFile]) -> (Vec<ComplexDesign>, Vec<Diag>) {
    let mut diags = Vec::new();
    let mut entities: HashMap<String, &PEntity> = HashMap::new();
    for f in files {
        for e in &f.entities {
            if entities.insert(e.name.clone(), e).is_some() {
                diags.push(Diag::error(e.span, format!("entity `{}` is declared twice", e.name)));
            }
        }
    }
    let mut seen = HashSet::new();
    let mut designs = Vec::new();
    for f in files {
        for a in &f.architectures {
            let Some(ent) = entities.get(&a.entity).copied() else {
                diags.push(Diag::error(
                    a.span,
                    format!("architecture `{}` of unknown entity `{}`", a.name, a.entity),
                ));
                continue;
            };
            if !seen.insert(a.entity.clone()) {
                diags.push(Diag::error(
                    a.span,
                    format!("entity `{}` has more than one architecture", a.entity),
                ));
                continue;
            }
            let before = diags.iter().filter(|d| d.is_error()).count();
            let mut el = Elab {
                diags: &mut diags,
                entities: &entities,
                scopes: vec![predefined()],
                env: Env::default(),
                res_fn: IndexMap::new(),
                subprograms: Vec::new(),
                sigs: HashMap::new(),
                components: HashMap::new(),
                body: Body::default(),
                labels: HashSet::new(),
                generated: 0,
            };
            let d = el.design(ent, a);
            if diags.iter().filter(|d| d.is_error()).count() == before {
                designs.push(d);
            }
        }
    }
    for (name, e) in &entities {
        if !seen.contains(name) {
            diags.push(Diag::warning(e.span, format!("entity `{name}` has no architecture")));
        }
    }
    (designs, diags)
}
