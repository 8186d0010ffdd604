//! Runtime values and the expression-level operators over them.
//!
//! Vectors are plain element lists. A `to` vector stores its elements in
//! written order; a `downto` vector stores them reversed, so in both cases
//! storage position `i` holds the element at logical (zero-based) index `i`.
//! Operations whose meaning depends on the written order (concatenation,
//! shifts, comparisons, numeric interpretation) go through
//! [`Val::written`] / [`Val::from_written`].

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

use crate::logic9::{self, Logic9};
use crate::types::{Dir, ScalarKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scalar {
    Bit(bool),
    Bool(bool),
    Char(char),
    Int(i64),
    Real(f64),
    /// Femtoseconds.
    Time(i64),
    Logic(Logic9),
}

impl Scalar {
    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Bit(_) => ScalarKind::Bit,
            Scalar::Bool(_) => ScalarKind::Bool,
            Scalar::Char(_) => ScalarKind::Char,
            Scalar::Int(_) => ScalarKind::Int,
            Scalar::Real(_) => ScalarKind::Real,
            Scalar::Time(_) => ScalarKind::Time,
            Scalar::Logic(_) => ScalarKind::Logic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Val {
    Scalar(Scalar),
    VecTo(Vec<Val>),
    VecDownto(Vec<Val>),
    Record(Vec<(String, Val)>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("operator `{op}` not defined for {operands}")]
    TypeMismatch { op: &'static str, operands: String },
    #[error("operator `{op}`: length mismatch ({left} vs {right})")]
    LengthMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow in `{op}`")]
    Overflow { op: &'static str },
    #[error("index {index} out of range for vector of length {len}")]
    IndexOutOfRange { index: i64, len: usize },
    #[error("slice starting at {start} of length {len} escapes vector of length {vec_len}")]
    SliceOutOfRange { start: i64, len: i64, vec_len: usize },
    #[error("concatenation of vectors with different index directions")]
    EndiannessMismatch,
    #[error("value {value} outside range {lo} to {hi}")]
    RangeViolation { value: i64, lo: i64, hi: i64 },
    #[error("{0}")]
    Invalid(String),
}

fn mismatch(op: &'static str, operands: String) -> EvalError {
    EvalError::TypeMismatch { op, operands }
}

impl Val {
    pub fn bit(b: bool) -> Val {
        Val::Scalar(Scalar::Bit(b))
    }

    pub fn boolean(b: bool) -> Val {
        Val::Scalar(Scalar::Bool(b))
    }

    pub fn int(i: i64) -> Val {
        Val::Scalar(Scalar::Int(i))
    }

    pub fn logic(l: Logic9) -> Val {
        Val::Scalar(Scalar::Logic(l))
    }

    pub fn from_storage(dir: Dir, elems: Vec<Val>) -> Val {
        match dir {
            Dir::To => Val::VecTo(elems),
            Dir::Downto => Val::VecDownto(elems),
        }
    }

    /// Builds a vector from elements listed in written (left-to-right) order.
    pub fn from_written(dir: Dir, mut elems: Vec<Val>) -> Val {
        if dir == Dir::Downto {
            elems.reverse();
        }
        Val::from_storage(dir, elems)
    }

    /// A `std_logic_vector`-style literal, `bits` given as written.
    pub fn logic_vec(dir: Dir, bits: &str) -> Val {
        Val::from_written(
            dir,
            bits.chars()
                .map(|c| Val::logic(Logic9::from_char(c).expect("logic literal")))
                .collect(),
        )
    }

    pub fn bit_vec(dir: Dir, bits: &str) -> Val {
        Val::from_written(dir, bits.chars().map(|c| Val::bit(c == '1')).collect())
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, Val::VecTo(_) | Val::VecDownto(_))
    }

    pub fn dir(&self) -> Option<Dir> {
        match self {
            Val::VecTo(_) => Some(Dir::To),
            Val::VecDownto(_) => Some(Dir::Downto),
            _ => None,
        }
    }

    /// Elements in storage (logical index) order.
    pub fn elems(&self) -> &[Val] {
        match self {
            Val::VecTo(e) | Val::VecDownto(e) => e,
            _ => &[],
        }
    }

    pub fn into_parts(self) -> (Dir, Vec<Val>) {
        match self {
            Val::VecTo(e) => (Dir::To, e),
            Val::VecDownto(e) => (Dir::Downto, e),
            other => panic!("into_parts on non-vector {other:?}"),
        }
    }

    pub fn len(&self) -> usize {
        self.elems().len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems().is_empty()
    }

    /// Elements in written order.
    pub fn written(&self) -> Vec<&Val> {
        match self {
            Val::VecTo(e) => e.iter().collect(),
            Val::VecDownto(e) => e.iter().rev().collect(),
            _ => Vec::new(),
        }
    }

    /// Same written order, stored with direction `dir`.
    pub fn with_dir(self, dir: Dir) -> Val {
        match (self, dir) {
            (Val::VecTo(e), Dir::Downto) => Val::from_written(Dir::Downto, e),
            (Val::VecDownto(mut e), Dir::To) => {
                e.reverse();
                Val::VecTo(e)
            }
            (v, _) => v,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Val::Scalar(Scalar::Int(i)) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Val::Scalar(Scalar::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            Val::Scalar(s) => Some(s),
            _ => None,
        }
    }

    /// Common scalar kind of all (possibly nested) vector elements.
    pub fn elem_kind(&self) -> Option<ScalarKind> {
        match self {
            Val::Scalar(s) => Some(s.kind()),
            Val::VecTo(e) | Val::VecDownto(e) => e.first().and_then(|v| v.elem_kind()),
            Val::Record(_) => None,
        }
    }

    pub fn type_name(&self) -> String {
        match self {
            Val::Scalar(s) => s.kind().to_string(),
            Val::VecTo(e) => format!("vector({} to, {})", e.len(), kind_name(self)),
            Val::VecDownto(e) => format!("vector({} downto, {})", e.len(), kind_name(self)),
            Val::Record(_) => "record".into(),
        }
    }
}

fn kind_name(v: &Val) -> String {
    v.elem_kind().map(|k| k.to_string()).unwrap_or_else(|| "empty".into())
}

fn fmt_scalar(s: &Scalar, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match s {
        Scalar::Bit(b) => write!(f, "'{}'", if *b { '1' } else { '0' }),
        Scalar::Bool(b) => write!(f, "{b}"),
        Scalar::Char(c) => write!(f, "'{}'", c.escape_default()),
        Scalar::Int(i) => write!(f, "{i}"),
        Scalar::Real(r) => write!(f, "{r:?}"),
        Scalar::Time(t) => write!(f, "{t} fs"),
        Scalar::Logic(l) => write!(f, "'{l}'"),
    }
}

fn char_of(s: &Scalar) -> Option<char> {
    match s {
        Scalar::Bit(b) => Some(if *b { '1' } else { '0' }),
        Scalar::Logic(l) => Some(l.to_char()),
        Scalar::Char(c) => Some(*c),
        _ => None,
    }
}

impl fmt::Display for Val {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Val::Scalar(s) => fmt_scalar(s, f),
            Val::VecTo(_) | Val::VecDownto(_) => {
                let w = self.written();
                let as_chars: Option<String> = w.iter().map(|e| e.as_scalar().and_then(char_of)).collect();
                match as_chars {
                    Some(s) => write!(f, "\"{}\"", s.escape_default()),
                    None => {
                        f.write_str("(")?;
                        for (i, e) in w.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            write!(f, "{e}")?;
                        }
                        f.write_str(")")
                    }
                }
            }
            Val::Record(fields) => {
                f.write_str("(")?;
                for (i, (n, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n} => {v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Operators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnOp {
    Not,
    Neg,
    Abs,
    /// `to_integer` of an unsigned bit/logic vector.
    ToInt,
    /// `to_integer` of a two's-complement bit/logic vector.
    ToIntSigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogicOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftOp {
    Sll,
    Srl,
    Sla,
    Sra,
    Rol,
    Ror,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Rem,
    Pow,
    Concat,
}

/// Operator class and symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Uop(UnOp),
    Lop(LogicOp),
    Rop(RelOp),
    Sop(ShiftOp),
    Aop(ArithOp),
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Not => "not",
            UnOp::Neg => "-",
            UnOp::Abs => "abs",
            UnOp::ToInt => "to_integer",
            UnOp::ToIntSigned => "to_integer_signed",
        }
    }
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "and",
            LogicOp::Or => "or",
            LogicOp::Nand => "nand",
            LogicOp::Nor => "nor",
            LogicOp::Xor => "xor",
            LogicOp::Xnor => "xnor",
        }
    }
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Ne => "/=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
        }
    }
}

impl ShiftOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ShiftOp::Sll => "sll",
            ShiftOp::Srl => "srl",
            ShiftOp::Sla => "sla",
            ShiftOp::Sra => "sra",
            ShiftOp::Rol => "rol",
            ShiftOp::Ror => "ror",
        }
    }
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "mod",
            ArithOp::Rem => "rem",
            ArithOp::Pow => "**",
            ArithOp::Concat => "&",
        }
    }
}

impl OpKind {
    pub fn class(self) -> &'static str {
        match self {
            OpKind::Uop(_) => "uop",
            OpKind::Lop(_) => "lop",
            OpKind::Rop(_) => "rop",
            OpKind::Sop(_) => "sop",
            OpKind::Aop(_) => "aop",
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            OpKind::Uop(o) => o.symbol(),
            OpKind::Lop(o) => o.symbol(),
            OpKind::Rop(o) => o.symbol(),
            OpKind::Sop(o) => o.symbol(),
            OpKind::Aop(o) => o.symbol(),
        }
    }
}

// ---------------------------------------------------------------------------
// Unary operators

pub fn eval_unop(op: UnOp, v: &Val) -> Result<Val, EvalError> {
    match op {
        UnOp::Not => not_val(v),
        UnOp::Neg => match v {
            Val::Scalar(Scalar::Int(i)) => i.checked_neg().map(Val::int).ok_or(EvalError::Overflow { op: "-" }),
            Val::Scalar(Scalar::Real(r)) => Ok(Val::Scalar(Scalar::Real(-r))),
            Val::Scalar(Scalar::Time(t)) => t
                .checked_neg()
                .map(|t| Val::Scalar(Scalar::Time(t)))
                .ok_or(EvalError::Overflow { op: "-" }),
            v if v.is_vector() => match to_bits(v, "-")? {
                Some(bits) => {
                    let zero = vec![false; bits.len()];
                    Ok(bits_to_val(&sub_bits(&zero, &bits), v))
                }
                None => Ok(unknown_like(v, v.len())),
            },
            v => Err(mismatch("-", v.type_name())),
        },
        UnOp::Abs => match v {
            Val::Scalar(Scalar::Int(i)) => i.checked_abs().map(Val::int).ok_or(EvalError::Overflow { op: "abs" }),
            Val::Scalar(Scalar::Real(r)) => Ok(Val::Scalar(Scalar::Real(r.abs()))),
            Val::Scalar(Scalar::Time(t)) => t
                .checked_abs()
                .map(|t| Val::Scalar(Scalar::Time(t)))
                .ok_or(EvalError::Overflow { op: "abs" }),
            v => Err(mismatch("abs", v.type_name())),
        },
        UnOp::ToInt | UnOp::ToIntSigned => {
            let sym = op.symbol();
            // numeric_std returns 0 for a vector with metavalues
            let Some(bits) = to_bits(v, sym)? else {
                return Ok(Val::int(0));
            };
            let signed = op == UnOp::ToIntSigned;
            bits_to_i64(&bits, signed)
                .map(Val::int)
                .ok_or(EvalError::Overflow { op: sym })
        }
    }
}

fn not_val(v: &Val) -> Result<Val, EvalError> {
    match v {
        Val::Scalar(Scalar::Bit(b)) => Ok(Val::bit(!b)),
        Val::Scalar(Scalar::Bool(b)) => Ok(Val::boolean(!b)),
        Val::Scalar(Scalar::Logic(l)) => Ok(Val::logic(l.not())),
        Val::VecTo(e) => Ok(Val::VecTo(e.iter().map(not_val).collect::<Result<_, _>>()?)),
        Val::VecDownto(e) => Ok(Val::VecDownto(e.iter().map(not_val).collect::<Result<_, _>>()?)),
        v => Err(mismatch("not", v.type_name())),
    }
}

// ---------------------------------------------------------------------------
// Binary operators

pub fn eval_binop(op: OpKind, a: &Val, b: &Val) -> Result<Val, EvalError> {
    match op {
        OpKind::Uop(u) => Err(EvalError::Invalid(format!(
            "unary operator `{}` used with two operands",
            u.symbol()
        ))),
        OpKind::Lop(o) => eval_logic(o, a, b),
        OpKind::Rop(o) => eval_rel(o, a, b),
        OpKind::Sop(o) => eval_shift(o, a, b),
        OpKind::Aop(o) => eval_arith(o, a, b),
    }
}

fn scalar_logic(op: LogicOp, a: &Scalar, b: &Scalar) -> Result<Scalar, EvalError> {
    let bool_op = |x: bool, y: bool| match op {
        LogicOp::And => x & y,
        LogicOp::Or => x | y,
        LogicOp::Nand => !(x & y),
        LogicOp::Nor => !(x | y),
        LogicOp::Xor => x ^ y,
        LogicOp::Xnor => !(x ^ y),
    };
    Ok(match (a, b) {
        (Scalar::Bit(x), Scalar::Bit(y)) => Scalar::Bit(bool_op(*x, *y)),
        (Scalar::Bool(x), Scalar::Bool(y)) => Scalar::Bool(bool_op(*x, *y)),
        (Scalar::Logic(x), Scalar::Logic(y)) => Scalar::Logic(match op {
            LogicOp::And => x.and(*y),
            LogicOp::Or => x.or(*y),
            LogicOp::Nand => x.and(*y).not(),
            LogicOp::Nor => x.or(*y).not(),
            LogicOp::Xor => x.xor(*y),
            LogicOp::Xnor => x.xor(*y).not(),
        }),
        _ => return Err(mismatch(op.symbol(), format!("{} and {}", a.kind(), b.kind()))),
    })
}

pub fn eval_logic(op: LogicOp, a: &Val, b: &Val) -> Result<Val, EvalError> {
    match (a, b) {
        (Val::Scalar(x), Val::Scalar(y)) => Ok(Val::Scalar(scalar_logic(op, x, y)?)),
        (x, y) if x.is_vector() && y.is_vector() => {
            if x.len() != y.len() {
                return Err(EvalError::LengthMismatch {
                    op: op.symbol(),
                    left: x.len(),
                    right: y.len(),
                });
            }
            let out = x
                .written()
                .into_iter()
                .zip(y.written())
                .map(|(p, q)| eval_logic(op, p, q))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Val::from_written(x.dir().unwrap(), out))
        }
        _ => Err(mismatch(
            op.symbol(),
            format!("{} and {}", a.type_name(), b.type_name()),
        )),
    }
}

fn cmp_scalar(op: &'static str, a: &Scalar, b: &Scalar) -> Result<Ordering, EvalError> {
    let ord = match (a, b) {
        (Scalar::Bit(x), Scalar::Bit(y)) => x.cmp(y),
        (Scalar::Bool(x), Scalar::Bool(y)) => x.cmp(y),
        (Scalar::Char(x), Scalar::Char(y)) => x.cmp(y),
        (Scalar::Int(x), Scalar::Int(y)) => x.cmp(y),
        (Scalar::Time(x), Scalar::Time(y)) => x.cmp(y),
        (Scalar::Logic(x), Scalar::Logic(y)) => x.cmp(y),
        (Scalar::Real(x), Scalar::Real(y)) => x
            .partial_cmp(y)
            .ok_or_else(|| EvalError::Invalid("comparison with NaN".into()))?,
        _ => return Err(mismatch(op, format!("{} and {}", a.kind(), b.kind()))),
    };
    Ok(ord)
}

/// Ordering used by the relational operators. Vectors compare as
/// dictionaries over their written order; a vector compared with an integer
/// is read as unsigned.
pub fn compare(op: &'static str, a: &Val, b: &Val) -> Result<Ordering, EvalError> {
    match (a, b) {
        (Val::Scalar(x), Val::Scalar(y)) => cmp_scalar(op, x, y),
        (x, y) if x.is_vector() && y.is_vector() => {
            let (wx, wy) = (x.written(), y.written());
            for (p, q) in wx.iter().zip(wy.iter()) {
                match compare(op, p, q)? {
                    Ordering::Equal => continue,
                    o => return Ok(o),
                }
            }
            Ok(wx.len().cmp(&wy.len()))
        }
        (x, Val::Scalar(Scalar::Int(i))) if x.is_vector() => cmp_vec_int(op, x, *i),
        (Val::Scalar(Scalar::Int(i)), y) if y.is_vector() => cmp_vec_int(op, y, *i).map(Ordering::reverse),
        (Val::Record(x), Val::Record(y)) if op == "=" || op == "/=" => {
            if x.len() != y.len() {
                return Ok(Ordering::Less);
            }
            for ((n1, v1), (n2, v2)) in x.iter().zip(y) {
                if n1 != n2 {
                    return Err(mismatch(op, "records of different shape".into()));
                }
                if compare(op, v1, v2)? != Ordering::Equal {
                    return Ok(Ordering::Less);
                }
            }
            Ok(Ordering::Equal)
        }
        _ => Err(mismatch(op, format!("{} and {}", a.type_name(), b.type_name()))),
    }
}

fn cmp_vec_int(op: &'static str, v: &Val, i: i64) -> Result<Ordering, EvalError> {
    let bits = to_bits(v, op)?.ok_or_else(|| EvalError::Invalid(format!("`{op}` on a metalogical vector")))?;
    if i < 0 {
        return Ok(Ordering::Greater);
    }
    let width = bits.len().max(64);
    let a = resize(&bits, width, false);
    let b = int_to_bits(i, width);
    Ok(cmp_unsigned(&a, &b))
}

pub fn eval_rel(op: RelOp, a: &Val, b: &Val) -> Result<Val, EvalError> {
    let sym = op.symbol();
    // vectors of different lengths are unequal rather than ordered
    if matches!(op, RelOp::Eq | RelOp::Ne) && a.is_vector() && b.is_vector() && a.len() != b.len() {
        compare(sym, a, b)?;
        return Ok(Val::boolean(op == RelOp::Ne));
    }
    let ord = compare(sym, a, b)?;
    Ok(Val::boolean(match op {
        RelOp::Eq => ord == Ordering::Equal,
        RelOp::Ne => ord != Ordering::Equal,
        RelOp::Lt => ord == Ordering::Less,
        RelOp::Le => ord != Ordering::Greater,
        RelOp::Gt => ord == Ordering::Greater,
        RelOp::Ge => ord != Ordering::Less,
    }))
}

fn zero_like(v: &Val) -> Result<Val, EvalError> {
    match v {
        Val::Scalar(Scalar::Bit(_)) => Ok(Val::bit(false)),
        Val::Scalar(Scalar::Bool(_)) => Ok(Val::boolean(false)),
        Val::Scalar(Scalar::Logic(_)) => Ok(Val::logic(Logic9::Zero)),
        other => Err(mismatch("shift", other.type_name())),
    }
}

pub fn eval_shift(op: ShiftOp, a: &Val, b: &Val) -> Result<Val, EvalError> {
    let sym = op.symbol();
    let count = b
        .as_int()
        .ok_or_else(|| mismatch(sym, format!("shift count of type {}", b.type_name())))?;
    let dir = a.dir().ok_or_else(|| mismatch(sym, a.type_name()))?;
    let src = a.written();
    let n = src.len();
    if n == 0 {
        return Ok(a.clone());
    }
    // a negative count shifts the other way
    let (op, count) = if count < 0 {
        let flipped = match op {
            ShiftOp::Sll => ShiftOp::Srl,
            ShiftOp::Srl => ShiftOp::Sll,
            ShiftOp::Sla => ShiftOp::Sra,
            ShiftOp::Sra => ShiftOp::Sla,
            ShiftOp::Rol => ShiftOp::Ror,
            ShiftOp::Ror => ShiftOp::Rol,
        };
        (flipped, count.unsigned_abs())
    } else {
        (op, count as u64)
    };
    let fill = match op {
        ShiftOp::Sll | ShiftOp::Srl => Some(zero_like(src[0])?),
        ShiftOp::Sla => Some(src[n - 1].clone()),
        ShiftOp::Sra => Some(src[0].clone()),
        ShiftOp::Rol | ShiftOp::Ror => None,
    };
    let k = count.min(n as u64) as usize;
    let out: Vec<Val> = (0..n)
        .map(|i| match op {
            ShiftOp::Sll | ShiftOp::Sla => {
                if i + k < n {
                    src[i + k].clone()
                } else {
                    fill.clone().unwrap()
                }
            }
            ShiftOp::Srl | ShiftOp::Sra => {
                if i >= k {
                    src[i - k].clone()
                } else {
                    fill.clone().unwrap()
                }
            }
            ShiftOp::Rol => src[(i + (count % n as u64) as usize) % n].clone(),
            ShiftOp::Ror => src[(i + n - (count % n as u64) as usize) % n].clone(),
        })
        .collect();
    Ok(Val::from_written(dir, out))
}

fn int_binop(op: ArithOp, x: i64, y: i64) -> Result<i64, EvalError> {
    let sym = op.symbol();
    let overflow = EvalError::Overflow { op: sym };
    match op {
        ArithOp::Add => x.checked_add(y).ok_or(overflow),
        ArithOp::Sub => x.checked_sub(y).ok_or(overflow),
        ArithOp::Mul => x.checked_mul(y).ok_or(overflow),
        ArithOp::Div | ArithOp::Mod | ArithOp::Rem if y == 0 => Err(EvalError::DivisionByZero),
        ArithOp::Div => x.checked_div(y).ok_or(overflow),
        ArithOp::Rem => x.checked_rem(y).ok_or(overflow),
        ArithOp::Mod => {
            let r = x.checked_rem(y).ok_or(overflow)?;
            Ok(if r != 0 && ((r < 0) != (y < 0)) { r + y } else { r })
        }
        ArithOp::Pow => {
            if y < 0 {
                return Err(EvalError::Invalid("negative exponent in `**`".into()));
            }
            let e = u32::try_from(y).map_err(|_| overflow.clone())?;
            x.checked_pow(e).ok_or(overflow)
        }
        ArithOp::Concat => Err(mismatch("&", "integer and integer".into())),
    }
}

pub fn eval_arith(op: ArithOp, a: &Val, b: &Val) -> Result<Val, EvalError> {
    let sym = op.symbol();
    if op == ArithOp::Concat {
        return concat(a, b);
    }
    match (a, b) {
        (Val::Scalar(Scalar::Int(x)), Val::Scalar(Scalar::Int(y))) => int_binop(op, *x, *y).map(Val::int),
        (Val::Scalar(Scalar::Real(x)), Val::Scalar(Scalar::Real(y))) => {
            let r = match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div if *y == 0.0 => return Err(EvalError::DivisionByZero),
                ArithOp::Div => x / y,
                _ => return Err(mismatch(sym, "real and real".into())),
            };
            Ok(Val::Scalar(Scalar::Real(r)))
        }
        (Val::Scalar(Scalar::Time(x)), Val::Scalar(Scalar::Time(y))) => match op {
            ArithOp::Add | ArithOp::Sub => int_binop(op, *x, *y).map(|t| Val::Scalar(Scalar::Time(t))),
            ArithOp::Div => int_binop(op, *x, *y).map(Val::int),
            _ => Err(mismatch(sym, "time and time".into())),
        },
        (Val::Scalar(Scalar::Time(t)), Val::Scalar(Scalar::Int(i)))
        | (Val::Scalar(Scalar::Int(i)), Val::Scalar(Scalar::Time(t)))
            if op == ArithOp::Mul =>
        {
            int_binop(op, *t, *i).map(|t| Val::Scalar(Scalar::Time(t)))
        }
        (Val::Scalar(Scalar::Time(t)), Val::Scalar(Scalar::Int(i))) if op == ArithOp::Div => {
            int_binop(op, *t, *i).map(|t| Val::Scalar(Scalar::Time(t)))
        }
        (x, y) if x.is_vector() || y.is_vector() => vec_arith(op, x, y),
        _ => Err(mismatch(sym, format!("{} and {}", a.type_name(), b.type_name()))),
    }
}

fn concat(a: &Val, b: &Val) -> Result<Val, EvalError> {
    let (da, db) = match (a.dir(), b.dir()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(mismatch("&", format!("{} and {}", a.type_name(), b.type_name()))),
    };
    if da != db {
        return Err(EvalError::EndiannessMismatch);
    }
    if let (Some(ka), Some(kb)) = (a.elem_kind(), b.elem_kind()) {
        if ka != kb {
            return Err(mismatch("&", format!("elements {ka} and {kb}")));
        }
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    match da {
        Dir::To => {
            out.extend_from_slice(a.elems());
            out.extend_from_slice(b.elems());
        }
        Dir::Downto => {
            out.extend_from_slice(b.elems());
            out.extend_from_slice(a.elems());
        }
    }
    Ok(Val::from_storage(da, out))
}

// ---------------------------------------------------------------------------
// Numeric interpretation of bit / logic vectors. Bit lists are LSB first.

/// Reads a bit or logic vector as bits; `None` when a metalogical element
/// is present.
fn to_bits(v: &Val, op: &'static str) -> Result<Option<Vec<bool>>, EvalError> {
    let mut out = Vec::with_capacity(v.len());
    for e in v.written().into_iter().rev() {
        match e {
            Val::Scalar(Scalar::Bit(b)) => out.push(*b),
            Val::Scalar(Scalar::Logic(l)) => match l.to_bool() {
                Some(b) => out.push(b),
                None => return Ok(None),
            },
            other => return Err(mismatch(op, format!("vector of {}", other.type_name()))),
        }
    }
    Ok(Some(out))
}

/// Builds a vector shaped like `template` (direction, element kind) holding
/// `bits`.
fn bits_to_val(bits: &[bool], template: &Val) -> Val {
    let logic = template.elem_kind() == Some(ScalarKind::Logic);
    let written: Vec<Val> = bits
        .iter()
        .rev()
        .map(|b| {
            if logic {
                Val::logic(Logic9::from_bool(*b))
            } else {
                Val::bit(*b)
            }
        })
        .collect();
    Val::from_written(template.dir().unwrap_or(Dir::Downto), written)
}

fn unknown_like(template: &Val, width: usize) -> Val {
    Val::from_storage(
        template.dir().unwrap_or(Dir::Downto),
        vec![Val::logic(Logic9::X); width],
    )
}

fn resize(bits: &[bool], width: usize, sign_extend: bool) -> Vec<bool> {
    let fill = sign_extend && bits.last().copied().unwrap_or(false);
    (0..width).map(|i| bits.get(i).copied().unwrap_or(fill)).collect()
}

fn int_to_bits(i: i64, width: usize) -> Vec<bool> {
    (0..width)
        .map(|k| if k < 64 { (i >> k) & 1 == 1 } else { i < 0 })
        .collect()
}

fn bits_to_i64(bits: &[bool], signed: bool) -> Option<i64> {
    let negative = signed && bits.last().copied().unwrap_or(false);
    let fill = negative;
    // every bit above 63 must repeat the fill for the value to fit
    if bits.len() > 64 && bits[63..].iter().any(|b| *b != fill) {
        return None;
    }
    if !signed && bits.len() >= 64 && bits[63] {
        return None;
    }
    let mut out: i64 = if negative { -1 } else { 0 };
    for (k, b) in bits.iter().enumerate().take(64) {
        if *b {
            out |= 1 << k;
        } else {
            out &= !(1 << k);
        }
    }
    Some(out)
}

fn add_bits(a: &[bool], b: &[bool], carry_in: bool) -> Vec<bool> {
    let mut carry = carry_in;
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let s = x ^ y ^ carry;
            carry = (x & y) | (carry & (x ^ y));
            s
        })
        .collect()
}

fn sub_bits(a: &[bool], b: &[bool]) -> Vec<bool> {
    let nb: Vec<bool> = b.iter().map(|x| !x).collect();
    add_bits(a, &nb, true)
}

fn mul_bits(a: &[bool], b: &[bool], width: usize) -> Vec<bool> {
    let mut acc = vec![false; width];
    for (k, bit) in b.iter().enumerate() {
        if *bit && k < width {
            let mut shifted = vec![false; width];
            for (i, x) in a.iter().enumerate() {
                if i + k < width {
                    shifted[i + k] = *x;
                }
            }
            acc = add_bits(&acc, &shifted, false);
        }
    }
    acc
}

fn cmp_unsigned(a: &[bool], b: &[bool]) -> Ordering {
    for i in (0..a.len().max(b.len())).rev() {
        let x = a.get(i).copied().unwrap_or(false);
        let y = b.get(i).copied().unwrap_or(false);
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

/// Unsigned long division; both inputs share one width.
fn divmod_bits(a: &[bool], b: &[bool]) -> (Vec<bool>, Vec<bool>) {
    let w = a.len();
    let mut q = vec![false; w];
    let mut r = vec![false; w];
    for i in (0..w).rev() {
        r.rotate_right(1);
        r[0] = a[i];
        if cmp_unsigned(&r, b) != Ordering::Less {
            r = sub_bits(&r, b);
            q[i] = true;
        }
    }
    (q, r)
}

/// Vector arithmetic with unsigned interpretation. `+`/`-` produce the width
/// of the wider operand, `*` the sum of widths, `/`, `mod`, `rem` the width
/// of the left operand. An integer operand takes the width of the vector
/// operand (two's complement, modulo), a bit/logic scalar counts as 0 or 1.
fn vec_arith(op: ArithOp, a: &Val, b: &Val) -> Result<Val, EvalError> {
    let sym = op.symbol();
    let template = if a.is_vector() { a } else { b };
    let operand = |v: &Val, width_hint: usize| -> Result<Option<Vec<bool>>, EvalError> {
        match v {
            Val::Scalar(Scalar::Int(i)) => Ok(Some(int_to_bits(*i, width_hint))),
            Val::Scalar(Scalar::Bit(x)) => Ok(Some(int_to_bits(*x as i64, width_hint))),
            Val::Scalar(Scalar::Logic(l)) => Ok(l.to_bool().map(|x| int_to_bits(x as i64, width_hint))),
            v if v.is_vector() => to_bits(v, sym),
            v => Err(mismatch(sym, v.type_name())),
        }
    };
    let hint = template.len();
    let (x, y) = (operand(a, hint)?, operand(b, hint)?);
    let (wa, wb) = (
        if a.is_vector() { a.len() } else { hint },
        if b.is_vector() { b.len() } else { hint },
    );
    let width = match op {
        ArithOp::Add | ArithOp::Sub => wa.max(wb),
        ArithOp::Mul => wa + wb,
        ArithOp::Div | ArithOp::Mod | ArithOp::Rem => wa,
        _ => return Err(mismatch(sym, "vectors".into())),
    };
    let (x, y) = match (x, y) {
        (Some(x), Some(y)) => (x, y),
        _ => return Ok(unknown_like(template, width)),
    };
    let out = match op {
        ArithOp::Add => add_bits(&resize(&x, width, false), &resize(&y, width, false), false),
        ArithOp::Sub => sub_bits(&resize(&x, width, false), &resize(&y, width, false)),
        ArithOp::Mul => mul_bits(&x, &y, width),
        _ => {
            let w = wa.max(wb);
            let (xn, yn) = (resize(&x, w, false), resize(&y, w, false));
            if yn.iter().all(|b| !b) {
                return Err(EvalError::DivisionByZero);
            }
            let (q, r) = divmod_bits(&xn, &yn);
            resize(if op == ArithOp::Div { &q } else { &r }, width, false)
        }
    };
    Ok(bits_to_val(&out, template))
}

// ---------------------------------------------------------------------------
// Indexing, slicing, conversion, resolution

pub fn vec_nth(v: &Val, i: i64) -> Result<Val, EvalError> {
    let elems = match v {
        Val::VecTo(e) | Val::VecDownto(e) => e,
        other => return Err(mismatch("index", other.type_name())),
    };
    usize::try_from(i)
        .ok()
        .and_then(|k| elems.get(k))
        .cloned()
        .ok_or(EvalError::IndexOutOfRange {
            index: i,
            len: elems.len(),
        })
}

pub fn vec_slice(v: &Val, start: i64, len: i64) -> Result<Val, EvalError> {
    let (dir, elems) = match v {
        Val::VecTo(e) => (Dir::To, e),
        Val::VecDownto(e) => (Dir::Downto, e),
        other => return Err(mismatch("slice", other.type_name())),
    };
    let oob = EvalError::SliceOutOfRange {
        start,
        len,
        vec_len: elems.len(),
    };
    if start < 0 || len < 0 {
        return Err(oob);
    }
    let (s, l) = (start as usize, len as usize);
    if s.checked_add(l).is_none_or(|end| end > elems.len()) {
        return Err(oob);
    }
    Ok(Val::from_storage(dir, elems[s..s + l].to_vec()))
}

/// Scalars become singleton vectors; vectors keep their written order and
/// take the requested direction.
pub fn to_vector(v: &Val, reversed: bool) -> Val {
    let dir = if reversed { Dir::Downto } else { Dir::To };
    match v {
        Val::VecTo(_) | Val::VecDownto(_) => v.clone().with_dir(dir),
        other => Val::from_storage(dir, vec![other.clone()]),
    }
}

pub fn resolve_logic9(drivers: &[Logic9]) -> Logic9 {
    logic9::resolve(drivers)
}

/// Applies the `resolved` function to driver values, element-wise for
/// vectors.
pub fn resolve_vals(drivers: &[&Val]) -> Result<Val, EvalError> {
    let first = drivers
        .first()
        .ok_or_else(|| EvalError::Invalid("resolution of zero drivers".into()))?;
    match first {
        Val::Scalar(Scalar::Logic(_)) => {
            let ls = drivers
                .iter()
                .map(|d| match d {
                    Val::Scalar(Scalar::Logic(l)) => Ok(*l),
                    other => Err(mismatch("resolved", other.type_name())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Val::logic(logic9::resolve(&ls)))
        }
        Val::VecTo(_) | Val::VecDownto(_) => {
            let n = first.len();
            let mut out = Vec::with_capacity(n);
            for k in 0..n {
                let column = drivers
                    .iter()
                    .map(|d| {
                        d.elems().get(k).ok_or(EvalError::LengthMismatch {
                            op: "resolved",
                            left: n,
                            right: d.len(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(resolve_vals(&column)?);
            }
            Ok(Val::from_storage(first.dir().unwrap(), out))
        }
        other => Err(mismatch("resolved", other.type_name())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(c: char) -> Val {
        Val::logic(Logic9::from_char(c).unwrap())
    }

    #[test]
    fn not_complements() {
        assert_eq!(eval_unop(UnOp::Not, &Val::bit(true)).unwrap(), Val::bit(false));
        let v = Val::bit_vec(Dir::To, "1010");
        assert_eq!(eval_unop(UnOp::Not, &v).unwrap(), Val::bit_vec(Dir::To, "0101"));
        assert_eq!(eval_unop(UnOp::Abs, &Val::int(-5)).unwrap(), Val::int(5));
    }

    #[test]
    fn not_rejects_integers() {
        let err = eval_unop(UnOp::Not, &Val::int(3)).unwrap_err();
        assert!(err.to_string().contains("not"));
        assert!(err.to_string().contains("integer"));
    }

    #[test]
    fn integer_division_truncates() {
        let div = |a, b| eval_arith(ArithOp::Div, &Val::int(a), &Val::int(b)).unwrap();
        assert_eq!(div(7, 2), Val::int(3));
        assert_eq!(div(-7, 2), Val::int(-3));
        assert_eq!(
            eval_arith(ArithOp::Div, &Val::int(1), &Val::int(0)),
            Err(EvalError::DivisionByZero)
        );
    }

    #[test]
    fn mod_and_rem_signs() {
        let m = |a, b| eval_arith(ArithOp::Mod, &Val::int(a), &Val::int(b)).unwrap();
        let r = |a, b| eval_arith(ArithOp::Rem, &Val::int(a), &Val::int(b)).unwrap();
        assert_eq!(m(-7, 3), Val::int(2));
        assert_eq!(m(7, -3), Val::int(-2));
        assert_eq!(r(-7, 3), Val::int(-1));
        assert_eq!(r(7, -3), Val::int(1));
    }

    #[test]
    fn overflow_is_an_error() {
        let e = eval_arith(ArithOp::Add, &Val::int(i64::MAX), &Val::int(1)).unwrap_err();
        assert_eq!(e, EvalError::Overflow { op: "+" });
        assert!(eval_arith(ArithOp::Pow, &Val::int(2), &Val::int(64)).is_err());
        assert!(eval_arith(ArithOp::Pow, &Val::int(2), &Val::int(-1)).is_err());
        assert_eq!(
            eval_arith(ArithOp::Pow, &Val::int(3), &Val::int(4)).unwrap(),
            Val::int(81)
        );
    }

    #[test]
    fn sll_on_bit_vector() {
        let v = Val::bit_vec(Dir::To, "1100");
        assert_eq!(
            eval_shift(ShiftOp::Sll, &v, &Val::int(1)).unwrap(),
            Val::bit_vec(Dir::To, "1000")
        );
        assert_eq!(
            eval_shift(ShiftOp::Rol, &v, &Val::int(1)).unwrap(),
            Val::bit_vec(Dir::To, "1001")
        );
        assert_eq!(
            eval_shift(ShiftOp::Sra, &Val::bit_vec(Dir::Downto, "1001"), &Val::int(2)).unwrap(),
            Val::bit_vec(Dir::Downto, "1110")
        );
    }

    #[test]
    fn logic_and_samples() {
        assert_eq!(eval_logic(LogicOp::And, &l('0'), &l('Z')).unwrap(), l('0'));
        assert_eq!(eval_logic(LogicOp::And, &l('X'), &l('1')).unwrap(), l('X'));
    }

    #[test]
    fn logic_vector_length_mismatch() {
        let a = Val::logic_vec(Dir::Downto, "01");
        let b = Val::logic_vec(Dir::Downto, "011");
        assert!(matches!(
            eval_logic(LogicOp::Or, &a, &b),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn nth_and_slice() {
        let v = Val::VecTo(vec![
            Val::Scalar(Scalar::Char('a')),
            Val::Scalar(Scalar::Char('b')),
            Val::Scalar(Scalar::Char('c')),
        ]);
        assert_eq!(vec_nth(&v, 1).unwrap(), Val::Scalar(Scalar::Char('b')));
        assert!(matches!(
            vec_nth(&v, 3),
            Err(EvalError::IndexOutOfRange { index: 3, len: 3 })
        ));
        let w = Val::bit_vec(Dir::To, "10110");
        assert_eq!(vec_slice(&w, 1, 3).unwrap(), Val::bit_vec(Dir::To, "011"));
        assert_eq!(vec_slice(&w, 0, 5).unwrap(), w);
        assert!(vec_slice(&w, 3, 3).is_err());
    }

    #[test]
    fn downto_index_maps_to_written_position() {
        // x(2 downto 0) := "abc" puts 'a' at index 2
        let x = Val::from_written(
            Dir::Downto,
            "abc".chars().map(|c| Val::Scalar(Scalar::Char(c))).collect(),
        );
        assert_eq!(vec_nth(&x, 2).unwrap(), Val::Scalar(Scalar::Char('a')));
        assert_eq!(vec_nth(&x, 0).unwrap(), Val::Scalar(Scalar::Char('c')));
    }

    #[test]
    fn to_vector_and_concat() {
        assert_eq!(to_vector(&Val::bit(true), false), Val::VecTo(vec![Val::bit(true)]));
        let ab = Val::bit_vec(Dir::To, "10");
        assert_eq!(to_vector(&ab, false), ab);
        // '1' & x for x : bit_vector(1 downto 0) = "00"
        let x = Val::bit_vec(Dir::Downto, "00");
        let r = eval_arith(ArithOp::Concat, &to_vector(&Val::bit(true), true), &x).unwrap();
        assert_eq!(r, Val::bit_vec(Dir::Downto, "100"));
        assert_eq!(
            eval_arith(ArithOp::Concat, &Val::bit_vec(Dir::To, "1"), &x),
            Err(EvalError::EndiannessMismatch)
        );
    }

    #[test]
    fn vector_arithmetic_is_modular() {
        let a = Val::logic_vec(Dir::Downto, "1111");
        let one = Val::int(1);
        assert_eq!(
            eval_arith(ArithOp::Add, &a, &one).unwrap(),
            Val::logic_vec(Dir::Downto, "0000")
        );
        let b = Val::logic_vec(Dir::Downto, "0011");
        assert_eq!(
            eval_arith(ArithOp::Sub, &b, &a).unwrap(),
            Val::logic_vec(Dir::Downto, "0100")
        );
        assert_eq!(
            eval_arith(ArithOp::Mul, &b, &b).unwrap(),
            Val::logic_vec(Dir::Downto, "00001001")
        );
        let u = Val::logic_vec(Dir::Downto, "0X11");
        assert_eq!(
            eval_arith(ArithOp::Add, &u, &b).unwrap(),
            Val::logic_vec(Dir::Downto, "XXXX")
        );
        assert_eq!(
            eval_unop(UnOp::ToIntSigned, &Val::logic_vec(Dir::Downto, "1110")).unwrap(),
            Val::int(-2)
        );
        assert_eq!(
            eval_unop(UnOp::ToInt, &Val::logic_vec(Dir::Downto, "1110")).unwrap(),
            Val::int(14)
        );
    }

    #[test]
    fn vector_compare_with_integer() {
        let v = Val::logic_vec(Dir::Downto, "11111");
        assert_eq!(eval_rel(RelOp::Eq, &v, &Val::int(31)).unwrap(), Val::boolean(true));
        assert_eq!(eval_rel(RelOp::Lt, &v, &Val::int(32)).unwrap(), Val::boolean(true));
        assert_eq!(eval_rel(RelOp::Gt, &v, &Val::int(-1)).unwrap(), Val::boolean(true));
    }

    #[test]
    fn vectors_of_different_length_are_unequal() {
        let a = Val::bit_vec(Dir::To, "10");
        let b = Val::bit_vec(Dir::To, "100");
        assert_eq!(eval_rel(RelOp::Eq, &a, &b).unwrap(), Val::boolean(false));
        assert_eq!(eval_rel(RelOp::Lt, &a, &b).unwrap(), Val::boolean(true));
    }

    #[test]
    fn resolution_samples() {
        use Logic9::*;
        assert_eq!(resolve_logic9(&[Zero, Z]), Zero);
        assert_eq!(resolve_logic9(&[Zero, One]), X);
        for v in Logic9::ALL {
            assert_eq!(resolve_logic9(&[v]), v);
        }
        let a = Val::logic_vec(Dir::Downto, "0Z");
        let b = Val::logic_vec(Dir::Downto, "Z1");
        assert_eq!(resolve_vals(&[&a, &b]).unwrap(), Val::logic_vec(Dir::Downto, "01"));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Val::logic_vec(Dir::Downto, "01XZ").to_string(), "\"01XZ\"");
        assert_eq!(Val::int(-4).to_string(), "-4");
        assert_eq!(Val::VecTo(vec![Val::int(1), Val::int(2)]).to_string(), "(1, 2)");
        assert_eq!(
            Val::Record(vec![("a".into(), Val::bit(true))]).to_string(),
            "(a => '1')"
        );
    }
}
