//! Parse tree: the source as written, names unresolved.

use super::Span;
use crate::types::Dir;

#[derive(Debug, Clone, PartialEq)]
pub enum BinOp {
    And,
    Or,
    Nand,
    Nor,
    Xor,
    Xnor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Sll,
    Srl,
    Sla,
    Sra,
    Rol,
    Ror,
    Add,
    Sub,
    Concat,
    Mul,
    Div,
    Mod,
    Rem,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnaryOp {
    Not,
    Neg,
    Plus,
    Abs,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PExpr {
    Int(i64, Span),
    Real(f64, Span),
    Str(String, Span),
    Char(char, Span),
    Name(PName),
    Unary(UnaryOp, Box<PExpr>, Span),
    Binary(Box<PExpr>, BinOp, Box<PExpr>, Span),
    /// `(choice => e, ...)` or positional `(a, b)`.
    Aggregate(Vec<(Option<Choice>, PExpr)>, Span),
}

impl PExpr {
    pub fn span(&self) -> Span {
        match self {
            PExpr::Int(_, s)
            | PExpr::Real(_, s)
            | PExpr::Str(_, s)
            | PExpr::Char(_, s)
            | PExpr::Unary(_, _, s)
            | PExpr::Binary(_, _, _, s)
            | PExpr::Aggregate(_, s) => *s,
            PExpr::Name(n) => n.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Choice {
    Expr(PExpr),
    Range(PRange),
    Others,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PRange {
    Explicit(Box<PExpr>, Dir, Box<PExpr>),
    /// `name'range` / `name'reverse_range`
    Attr(Box<PName>, bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assoc {
    pub formal: Option<String>,
    /// `None` for `open`.
    pub actual: Option<PExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Suffix {
    Field(String),
    /// `(a, b)`: index, call or conversion.
    Args(Vec<Assoc>),
    Slice(PRange),
    Attr(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PName {
    pub base: String,
    pub suffixes: Vec<Suffix>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PSubtype {
    pub mark: String,
    /// Index constraint `(7 downto 0)` or range constraint `range 0 to 7`.
    pub constraint: Option<PRange>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PTypeDef {
    Record(Vec<(Vec<String>, PSubtype)>),
    /// `array (range) of elem`; `None` for `range <>`.
    Array(Option<PRange>, PSubtype),
    Enum(Vec<String>),
    Range(PRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PMode {
    In,
    Out,
    Inout,
    Buffer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PPort {
    pub names: Vec<String>,
    pub mode: PMode,
    pub ty: PSubtype,
    pub init: Option<PExpr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PSubprogram {
    pub is_function: bool,
    pub name: String,
    pub params: Vec<PPort>,
    pub ret: Option<PSubtype>,
    pub decls: Vec<PDecl>,
    pub body: Vec<PSeq>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PDecl {
    Signal(Vec<String>, PSubtype, Option<PExpr>, Span),
    Variable(Vec<String>, PSubtype, Option<PExpr>, Span),
    Constant(Vec<String>, PSubtype, PExpr, Span),
    Type(String, PTypeDef, Span),
    Subtype(String, PSubtype, Span),
    Component(String, Vec<PPort>, Span),
    Subprogram(PSubprogram),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PSeq {
    SigAssign(String, PName, PExpr, Span),
    VarAssign(String, PName, PExpr, Span),
    /// `(label, arms, else)`
    If(String, Vec<(PExpr, Vec<PSeq>)>, Option<Vec<PSeq>>, Span),
    Case(String, PExpr, Vec<(Vec<Choice>, Vec<PSeq>)>, Span),
    For(String, String, PRange, Vec<PSeq>, Span),
    While(String, PExpr, Vec<PSeq>, Span),
    Loop(String, Vec<PSeq>, Span),
    Next(Option<String>, Option<PExpr>, Span),
    Exit(Option<String>, Option<PExpr>, Span),
    Return(Option<PExpr>, Span),
    Null,
    Call(PName),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sensitivity {
    List(Vec<PName>),
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PConc {
    Process {
        label: Option<String>,
        sensitivity: Sensitivity,
        decls: Vec<PDecl>,
        body: Vec<PSeq>,
        span: Span,
    },
    /// `target <= a when c else b;`, one arm per waveform.
    CondAssign {
        label: Option<String>,
        target: PName,
        arms: Vec<(PExpr, Option<PExpr>)>,
        span: Span,
    },
    /// `with sel select target <= a when c1, b when others;`
    SelAssign {
        label: Option<String>,
        selector: PExpr,
        target: PName,
        arms: Vec<(PExpr, Vec<Choice>)>,
        span: Span,
    },
    ForGen {
        label: String,
        var: String,
        range: PRange,
        body: Vec<PConc>,
        span: Span,
    },
    IfGen {
        label: String,
        cond: PExpr,
        body: Vec<PConc>,
        span: Span,
    },
    Instance {
        label: String,
        component: String,
        ports: Vec<Assoc>,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PEntity {
    pub name: String,
    pub ports: Vec<PPort>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PArchitecture {
    pub name: String,
    pub entity: String,
    pub decls: Vec<PDecl>,
    pub body: Vec<PConc>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PFile {
    pub entities: Vec<PEntity>,
    pub architectures: Vec<PArchitecture>,
}
