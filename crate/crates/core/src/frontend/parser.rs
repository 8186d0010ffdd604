//! Recursive-descent parser producing the parse tree of one file. Errors are
//! recorded as diagnostics; parsing resumes at the next statement or
//! declaration.

use super::lexer::{Tok, Token};
use super::syntax::*;
use super::{Diag, Span};
use crate::types::Dir;

pub(super) const RESERVED: &[&str] = &[
    "abs",
    "access",
    "after",
    "alias",
    "all",
    "and",
    "architecture",
    "array",
    "assert",
    "attribute",
    "begin",
    "block",
    "body",
    "buffer",
    "bus",
    "case",
    "component",
    "configuration",
    "constant",
    "disconnect",
    "downto",
    "else",
    "elsif",
    "end",
    "entity",
    "exit",
    "file",
    "for",
    "function",
    "generate",
    "generic",
    "group",
    "guarded",
    "if",
    "impure",
    "in",
    "inertial",
    "inout",
    "is",
    "label",
    "library",
    "linkage",
    "literal",
    "loop",
    "map",
    "mod",
    "nand",
    "new",
    "next",
    "nor",
    "not",
    "null",
    "of",
    "on",
    "open",
    "or",
    "others",
    "out",
    "package",
    "port",
    "postponed",
    "procedure",
    "process",
    "pure",
    "range",
    "record",
    "register",
    "reject",
    "rem",
    "report",
    "return",
    "rol",
    "ror",
    "select",
    "severity",
    "signal",
    "shared",
    "sla",
    "sll",
    "sra",
    "srl",
    "subtype",
    "then",
    "to",
    "transport",
    "type",
    "unaffected",
    "units",
    "until",
    "use",
    "variable",
    "wait",
    "when",
    "while",
    "with",
    "xnor",
    "xor",
];

/// Marker for a failed production; the diagnostic is already recorded.
#[derive(Debug)]
pub struct Failed;

type PResult<T> = Result<T, Failed>;

pub struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    diags: &'a mut Vec<Diag>,
}

fn unsupported(what: &str) -> String {
    format!("{what}: not in synthesizable subset")
}

impl<'a> Parser<'a> {
    pub fn new(toks: Vec<Token>, diags: &'a mut Vec<Diag>) -> Parser<'a> {
        Parser { toks, pos: 0, diags }
    }

    // -- token helpers ----------------------------------------------------

    fn tok(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn tok_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.tok(), Tok::Eof)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.tok(), Tok::Ident(s) if s == k)
    }

    fn is_kw_at(&self, i: usize, k: &str) -> bool {
        matches!(self.tok_at(i), Tok::Ident(s) if s == k)
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.tok(), Tok::Sym(x) if *x == s)
    }

    fn is_sym_at(&self, i: usize, s: &str) -> bool {
        matches!(self.tok_at(i), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn describe(&self) -> String {
        match self.tok() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Real(r) => format!("`{r}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Char(c) => format!("'{c}'"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of file".into(),
        }
    }

    fn error<T>(&mut self, msg: impl Into<String>) -> PResult<T> {
        let span = self.span();
        self.error_at(span, msg)
    }

    fn error_at<T>(&mut self, span: Span, msg: impl Into<String>) -> PResult<T> {
        self.diags.push(Diag::error(span, msg));
        Err(Failed)
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            let found = self.describe();
            self.error(format!("expected `{k}`, found {found}"))
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            let found = self.describe();
            self.error(format!("expected `{s}`, found {found}"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.tok().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.advance();
                Ok(s)
            }
            _ => {
                let found = self.describe();
                self.error(format!("expected identifier, found {found}"))
            }
        }
    }

    fn is_ident(&self) -> bool {
        matches!(self.tok(), Tok::Ident(s) if !RESERVED.contains(&s.as_str()))
    }

    fn reject_unsynthesizable(&mut self) -> PResult<()> {
        let what = match self.tok() {
            Tok::Ident(s) => match s.as_str() {
                "wait" => "`wait` statement",
                "after" => "`after` delay",
                "assert" => "`assert` statement",
                "report" => "`report` statement",
                "access" => "access type",
                "file" => "file declaration",
                "shared" => "shared variable",
                "transport" | "inertial" | "reject" => "delay mechanism",
                "block" => "block statement",
                "generic" => "generic clause",
                "alias" => "alias declaration",
                "attribute" => "attribute declaration",
                "postponed" => "postponed process",
                "new" => "allocator",
                _ => return Ok(()),
            },
            _ => return Ok(()),
        };
        let msg = unsupported(what);
        self.error(msg)
    }

    /// Skips past the next `;` (or to `end`/end of file).
    fn recover(&mut self) {
        let start = self.pos;
        loop {
            if self.at_eof() {
                return;
            }
            if self.is_sym(";") {
                self.advance();
                return;
            }
            if self.pos > start && (self.is_kw("end") || self.is_kw("begin")) {
                return;
            }
            self.advance();
        }
    }

    /// `end [kw] [name] ;`
    fn end_of(&mut self, kw: &str, name: Option<&str>) -> PResult<()> {
        self.expect_kw("end")?;
        self.eat_kw(kw);
        if self.is_ident() {
            let span = self.span();
            let n = self.ident()?;
            if let Some(expected) = name {
                if n != expected {
                    return self.error_at(span, format!("`end` name `{n}` does not match `{expected}`"));
                }
            }
        }
        self.expect_sym(";")
    }

    // -- design units -------------------------------------------------------

    pub fn file(&mut self) -> PFile {
        let mut f = PFile::default();
        while !self.at_eof() {
            let r = if self.eat_kw("library") {
                self.skip_clause()
            } else if self.eat_kw("use") {
                self.use_clause()
            } else if self.is_kw("entity") {
                self.entity().map(|e| f.entities.push(e))
            } else if self.is_kw("architecture") {
                self.architecture().map(|a| f.architectures.push(a))
            } else if self.is_kw("package") || self.is_kw("configuration") || self.is_kw("context") {
                let what = format!("`{}` unit", self.describe().trim_matches('`'));
                self.error(format!("{what} is not supported"))
            } else {
                let found = self.describe();
                self.error(format!("expected `entity` or `architecture`, found {found}"))
            };
            if r.is_err() {
                self.skip_to_unit();
            }
        }
        f
    }

    fn skip_to_unit(&mut self) {
        self.advance();
        while !self.at_eof() && !self.is_kw("entity") && !self.is_kw("architecture") {
            // `end entity` and `end architecture` do not start a unit
            if self.is_kw("end") {
                self.advance();
            }
            self.advance();
        }
    }

    fn skip_clause(&mut self) -> PResult<()> {
        while !self.is_sym(";") && !self.at_eof() {
            self.advance();
        }
        self.expect_sym(";")
    }

    fn use_clause(&mut self) -> PResult<()> {
        let span = self.span();
        let lib = self.ident()?;
        if !matches!(lib.as_str(), "ieee" | "std" | "work") {
            return self.error_at(span, format!("unknown library `{lib}`"));
        }
        self.skip_clause()
    }

    fn entity(&mut self) -> PResult<PEntity> {
        let span = self.span();
        self.expect_kw("entity")?;
        let name = self.ident()?;
        self.expect_kw("is")?;
        self.reject_unsynthesizable()?;
        let mut ports = Vec::new();
        if self.eat_kw("port") {
            ports = self.port_list()?;
            self.expect_sym(";")?;
        }
        if self.is_kw("begin") {
            return self.error("entity statements are not supported");
        }
        self.end_of("entity", Some(&name))?;
        Ok(PEntity { name, ports, span })
    }

    /// `( a, b : in t := e; ... )`
    fn port_list(&mut self) -> PResult<Vec<PPort>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        loop {
            let span = self.span();
            // object class keywords are allowed in parameter lists
            let _ = self.eat_kw("signal") || self.eat_kw("variable") || self.eat_kw("constant");
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let mode = if self.eat_kw("in") {
                PMode::In
            } else if self.eat_kw("out") {
                PMode::Out
            } else if self.eat_kw("inout") {
                PMode::Inout
            } else if self.eat_kw("buffer") {
                PMode::Buffer
            } else if self.is_kw("linkage") {
                return self.error(unsupported("`linkage` port"));
            } else {
                PMode::In
            };
            let ty = self.subtype()?;
            let init = if self.eat_sym(":=") { Some(self.expr()?) } else { None };
            out.push(PPort {
                names,
                mode,
                ty,
                init,
                span,
            });
            if self.eat_sym(";") {
                continue;
            }
            self.expect_sym(")")?;
            return Ok(out);
        }
    }

    fn architecture(&mut self) -> PResult<PArchitecture> {
        let span = self.span();
        self.expect_kw("architecture")?;
        let name = self.ident()?;
        self.expect_kw("of")?;
        let entity = self.ident()?;
        self.expect_kw("is")?;
        let decls = self.decls()?;
        self.expect_kw("begin")?;
        let body = self.conc_list(&["end"]);
        self.end_of("architecture", Some(&name))?;
        Ok(PArchitecture {
            name,
            entity,
            decls,
            body,
            span,
        })
    }

    // -- declarations -------------------------------------------------------

    /// Declarations up to `begin`.
    fn decls(&mut self) -> PResult<Vec<PDecl>> {
        let mut out = Vec::new();
        while !self.is_kw("begin") {
            if self.at_eof() || self.is_kw("end") {
                return self.expect_kw("begin").map(|_| out);
            }
            match self.decl() {
                Ok(d) => out.push(d),
                Err(Failed) => self.recover(),
            }
        }
        Ok(out)
    }

    fn id_list(&mut self) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn decl(&mut self) -> PResult<PDecl> {
        self.reject_unsynthesizable()?;
        let span = self.span();
        if self.eat_kw("signal") {
            let names = self.id_list()?;
            self.expect_sym(":")?;
            let ty = self.subtype()?;
            if self.is_kw("register") || self.is_kw("bus") {
                return self.error(unsupported("guarded signal"));
            }
            let init = if self.eat_sym(":=") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            return Ok(PDecl::Signal(names, ty, init, span));
        }
        if self.eat_kw("variable") {
            let names = self.id_list()?;
            self.expect_sym(":")?;
            let ty = self.subtype()?;
            let init = if self.eat_sym(":=") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            return Ok(PDecl::Variable(names, ty, init, span));
        }
        if self.eat_kw("constant") {
            let names = self.id_list()?;
            self.expect_sym(":")?;
            let ty = self.subtype()?;
            if !self.eat_sym(":=") {
                return self.error("deferred constants are not supported");
            }
            let v = self.expr()?;
            self.expect_sym(";")?;
            return Ok(PDecl::Constant(names, ty, v, span));
        }
        if self.eat_kw("type") {
            let name = self.ident()?;
            self.expect_kw("is")?;
            let def = self.type_def(&name)?;
            self.expect_sym(";")?;
            return Ok(PDecl::Type(name, def, span));
        }
        if self.eat_kw("subtype") {
            let name = self.ident()?;
            self.expect_kw("is")?;
            let ty = self.subtype()?;
            self.expect_sym(";")?;
            return Ok(PDecl::Subtype(name, ty, span));
        }
        if self.eat_kw("component") {
            let name = self.ident()?;
            self.eat_kw("is");
            self.reject_unsynthesizable()?;
            let mut ports = Vec::new();
            if self.eat_kw("port") {
                ports = self.port_list()?;
                self.expect_sym(";")?;
            }
            self.end_of("component", Some(&name))?;
            return Ok(PDecl::Component(name, ports, span));
        }
        if self.is_kw("function") || self.is_kw("procedure") || self.is_kw("pure") || self.is_kw("impure") {
            return self.subprogram().map(PDecl::Subprogram);
        }
        let found = self.describe();
        self.error(format!("expected a declaration, found {found}"))
    }

    fn type_def(&mut self, name: &str) -> PResult<PTypeDef> {
        if self.eat_kw("record") {
            let mut fields = Vec::new();
            while !self.is_kw("end") {
                let names = self.id_list()?;
                self.expect_sym(":")?;
                let ty = self.subtype()?;
                self.expect_sym(";")?;
                fields.push((names, ty));
            }
            self.expect_kw("end")?;
            self.expect_kw("record")?;
            if self.is_ident() {
                let span = self.span();
                let n = self.ident()?;
                if n != name {
                    return self.error_at(span, format!("`end record` name `{n}` does not match `{name}`"));
                }
            }
            return Ok(PTypeDef::Record(fields));
        }
        if self.eat_kw("array") {
            self.expect_sym("(")?;
            let range = if self.is_ident() && self.is_kw_at(1, "range") && self.is_sym_at(2, "<>") {
                self.advance();
                self.advance();
                self.advance();
                None
            } else {
                Some(self.range()?)
            };
            self.expect_sym(")")?;
            self.expect_kw("of")?;
            let elem = self.subtype()?;
            return Ok(PTypeDef::Array(range, elem));
        }
        if self.eat_sym("(") {
            let mut lits = Vec::new();
            loop {
                match self.tok().clone() {
                    Tok::Char(c) => {
                        self.advance();
                        lits.push(format!("'{c}'"));
                    }
                    _ => lits.push(self.ident()?),
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
            return Ok(PTypeDef::Enum(lits));
        }
        if self.eat_kw("range") {
            return Ok(PTypeDef::Range(self.range()?));
        }
        if self.is_kw("access") || self.is_kw("file") {
            self.reject_unsynthesizable()?;
        }
        if self.is_kw("units") || self.is_kw("protected") {
            return self.error(unsupported("physical or protected type"));
        }
        let found = self.describe();
        self.error(format!("expected a type definition, found {found}"))
    }

    fn subtype(&mut self) -> PResult<PSubtype> {
        let span = self.span();
        let mut mark = self.ident()?;
        // selected type marks such as ieee.std_logic_1164.std_logic
        while self.is_sym(".") {
            self.advance();
            mark = self.ident()?;
        }
        let constraint = if self.eat_kw("range") {
            Some(self.range()?)
        } else if self.is_sym("(") {
            self.advance();
            let r = self.range()?;
            self.expect_sym(")")?;
            Some(r)
        } else {
            None
        };
        Ok(PSubtype { mark, constraint, span })
    }

    fn range(&mut self) -> PResult<PRange> {
        let left = self.simple_expr()?;
        if self.eat_kw("to") {
            let right = self.simple_expr()?;
            return Ok(PRange::Explicit(Box::new(left), Dir::To, Box::new(right)));
        }
        if self.eat_kw("downto") {
            let right = self.simple_expr()?;
            return Ok(PRange::Explicit(Box::new(left), Dir::Downto, Box::new(right)));
        }
        if let PExpr::Name(mut n) = left {
            if let Some(Suffix::Attr(a)) = n.suffixes.last() {
                if a == "range" || a == "reverse_range" {
                    let rev = a == "reverse_range";
                    n.suffixes.pop();
                    return Ok(PRange::Attr(Box::new(n), rev));
                }
            }
            return self.error_at(n.span, "expected a range");
        }
        self.error("expected a range")
    }

    fn subprogram(&mut self) -> PResult<PSubprogram> {
        let span = self.span();
        if self.eat_kw("impure") {
            return self.error_at(span, "impure functions are not supported");
        }
        self.eat_kw("pure");
        let is_function = if self.eat_kw("function") {
            true
        } else {
            self.expect_kw("procedure")?;
            false
        };
        let name = self.ident()?;
        let params = if self.is_sym("(") {
            self.port_list()?
        } else {
            Vec::new()
        };
        let ret = if is_function {
            self.expect_kw("return")?;
            Some(self.subtype()?)
        } else {
            None
        };
        if self.is_sym(";") {
            // a declaration without body; the body follows later
            self.advance();
            return self.error_at(span, format!("subprogram `{name}` must be declared with its body"));
        }
        self.expect_kw("is")?;
        let decls = self.decls()?;
        self.expect_kw("begin")?;
        let body = self.seq_list(&["end"]);
        self.expect_kw("end")?;
        let _ = self.eat_kw("function") || self.eat_kw("procedure");
        if self.is_ident() {
            let s = self.span();
            let n = self.ident()?;
            if n != name {
                return self.error_at(s, format!("`end` name `{n}` does not match `{name}`"));
            }
        }
        self.expect_sym(";")?;
        Ok(PSubprogram {
            is_function,
            name,
            params,
            ret,
            decls,
            body,
            span,
        })
    }

    // -- concurrent statements ------------------------------------------------

    fn conc_list(&mut self, terminators: &[&str]) -> Vec<PConc> {
        let mut out = Vec::new();
        while !self.at_eof() && !terminators.iter().any(|t| self.is_kw(t)) {
            let before = self.pos;
            match self.conc() {
                Ok(c) => out.push(c),
                Err(Failed) => {
                    self.recover();
                    if self.pos == before {
                        self.advance();
                    }
                }
            }
        }
        out
    }

    fn label(&mut self) -> PResult<Option<String>> {
        if self.is_ident() && self.is_sym_at(1, ":") {
            let l = self.ident()?;
            self.advance();
            Ok(Some(l))
        } else {
            Ok(None)
        }
    }

    fn conc(&mut self) -> PResult<PConc> {
        let span = self.span();
        let label = self.label()?;
        self.reject_unsynthesizable()?;
        if self.is_kw("process") {
            return self.process(label, span);
        }
        if self.is_kw("for") || self.is_kw("if") {
            let Some(label) = label else {
                return self.error("generate statement needs a label");
            };
            return self.generate(label, span);
        }
        if self.eat_kw("with") {
            return self.selected_assign(label, span);
        }
        let instance_follows = self.is_kw("component")
            || self.is_kw("entity")
            || (label.is_some() && self.is_ident() && (self.is_kw_at(1, "port") || self.is_kw_at(1, "generic")));
        if instance_follows {
            let Some(label) = label else {
                return self.error("component instance needs a label");
            };
            return self.instance(label, span);
        }
        let target = self.name()?;
        self.expect_sym("<=")?;
        if self.eat_kw("guarded") {
            return self.error(unsupported("guarded assignment"));
        }
        let mut arms = Vec::new();
        loop {
            let e = self.waveform()?;
            if self.eat_kw("when") {
                let c = self.expr()?;
                arms.push((e, Some(c)));
                if self.eat_kw("else") {
                    continue;
                }
            } else {
                arms.push((e, None));
            }
            break;
        }
        self.expect_sym(";")?;
        Ok(PConc::CondAssign {
            label,
            target,
            arms,
            span,
        })
    }

    /// One waveform element: an expression without delay.
    fn waveform(&mut self) -> PResult<PExpr> {
        if self.is_kw("unaffected") {
            return self.error("`unaffected` is not supported");
        }
        let e = self.expr()?;
        self.reject_unsynthesizable()?;
        if self.is_sym(",") {
            return self.error(unsupported("multi-element waveform"));
        }
        Ok(e)
    }

    fn process(&mut self, label: Option<String>, span: Span) -> PResult<PConc> {
        self.expect_kw("process")?;
        let sensitivity = if self.eat_sym("(") {
            if self.eat_kw("all") {
                self.expect_sym(")")?;
                Sensitivity::All
            } else {
                let mut names = vec![self.name()?];
                while self.eat_sym(",") {
                    names.push(self.name()?);
                }
                self.expect_sym(")")?;
                Sensitivity::List(names)
            }
        } else {
            Sensitivity::List(Vec::new())
        };
        self.eat_kw("is");
        let decls = self.decls()?;
        self.expect_kw("begin")?;
        let body = self.seq_list(&["end"]);
        self.expect_kw("end")?;
        if self.is_kw("postponed") {
            self.reject_unsynthesizable()?;
        }
        self.expect_kw("process")?;
        if self.is_ident() {
            let s = self.span();
            let n = self.ident()?;
            if label.as_deref() != Some(n.as_str()) {
                return self.error_at(s, format!("`end process` name `{n}` does not match the label"));
            }
        }
        self.expect_sym(";")?;
        Ok(PConc::Process {
            label,
            sensitivity,
            decls,
            body,
            span,
        })
    }

    fn generate(&mut self, label: String, span: Span) -> PResult<PConc> {
        let is_for = self.eat_kw("for");
        let (var, range, cond) = if is_for {
            let var = self.ident()?;
            self.expect_kw("in")?;
            (Some(var), Some(self.range()?), None)
        } else {
            self.expect_kw("if")?;
            (None, None, Some(self.expr()?))
        };
        self.expect_kw("generate")?;
        // optional declarative part is not supported; a bare `begin` is
        self.eat_kw("begin");
        let body = self.conc_list(&["end"]);
        self.expect_kw("end")?;
        self.expect_kw("generate")?;
        if self.is_ident() {
            let s = self.span();
            let n = self.ident()?;
            if n != label {
                return self.error_at(s, format!("`end generate` name `{n}` does not match `{label}`"));
            }
        }
        self.expect_sym(";")?;
        Ok(match (var, range, cond) {
            (Some(var), Some(range), _) => PConc::ForGen {
                label,
                var,
                range,
                body,
                span,
            },
            (_, _, Some(cond)) => PConc::IfGen {
                label,
                cond,
                body,
                span,
            },
            _ => unreachable!("generate header"),
        })
    }

    fn selected_assign(&mut self, label: Option<String>, span: Span) -> PResult<PConc> {
        let selector = self.expr()?;
        self.expect_kw("select")?;
        let target = self.name()?;
        self.expect_sym("<=")?;
        let mut arms = Vec::new();
        loop {
            let e = self.waveform()?;
            self.expect_kw("when")?;
            let choices = self.choices()?;
            arms.push((e, choices));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(";")?;
        Ok(PConc::SelAssign {
            label,
            selector,
            target,
            arms,
            span,
        })
    }

    fn instance(&mut self, label: String, span: Span) -> PResult<PConc> {
        let component = if self.eat_kw("component") {
            self.ident()?
        } else if self.eat_kw("entity") {
            let mut n = self.ident()?;
            while self.eat_sym(".") {
                n = self.ident()?;
            }
            if self.is_sym("(") {
                return self.error("architecture selection in instances is not supported");
            }
            n
        } else {
            self.ident()?
        };
        self.reject_unsynthesizable()?;
        let mut ports = Vec::new();
        if self.eat_kw("port") {
            self.expect_kw("map")?;
            ports = self.assoc_list()?;
        }
        self.expect_sym(";")?;
        Ok(PConc::Instance {
            label,
            component,
            ports,
            span,
        })
    }

    // -- sequential statements ------------------------------------------------

    fn seq_list(&mut self, terminators: &[&str]) -> Vec<PSeq> {
        let mut out = Vec::new();
        while !self.at_eof() && !terminators.iter().any(|t| self.is_kw(t)) {
            let before = self.pos;
            match self.seq() {
                Ok(s) => out.push(s),
                Err(Failed) => {
                    self.recover();
                    if self.pos == before {
                        self.advance();
                    }
                }
            }
        }
        out
    }

    fn seq(&mut self) -> PResult<PSeq> {
        let span = self.span();
        let label = self.label()?.unwrap_or_default();
        self.reject_unsynthesizable()?;
        if self.eat_kw("if") {
            let mut arms = Vec::new();
            let c = self.expr()?;
            self.expect_kw("then")?;
            arms.push((c, self.seq_list(&["elsif", "else", "end"])));
            let mut els = None;
            loop {
                if self.eat_kw("elsif") {
                    let c = self.expr()?;
                    self.expect_kw("then")?;
                    arms.push((c, self.seq_list(&["elsif", "else", "end"])));
                } else if self.eat_kw("else") {
                    els = Some(self.seq_list(&["end"]));
                } else {
                    break;
                }
            }
            self.end_labeled("if", &label)?;
            return Ok(PSeq::If(label, arms, els, span));
        }
        if self.eat_kw("case") {
            let sel = self.expr()?;
            self.expect_kw("is")?;
            let mut whens = Vec::new();
            while self.eat_kw("when") {
                let choices = self.choices()?;
                self.expect_sym("=>")?;
                whens.push((choices, self.seq_list(&["when", "end"])));
            }
            self.end_labeled("case", &label)?;
            return Ok(PSeq::Case(label, sel, whens, span));
        }
        if self.eat_kw("for") {
            let var = self.ident()?;
            self.expect_kw("in")?;
            let range = self.range()?;
            self.expect_kw("loop")?;
            let body = self.seq_list(&["end"]);
            self.end_labeled("loop", &label)?;
            return Ok(PSeq::For(label, var, range, body, span));
        }
        if self.eat_kw("while") {
            let cond = self.expr()?;
            self.expect_kw("loop")?;
            let body = self.seq_list(&["end"]);
            self.end_labeled("loop", &label)?;
            return Ok(PSeq::While(label, cond, body, span));
        }
        if self.eat_kw("loop") {
            let body = self.seq_list(&["end"]);
            self.end_labeled("loop", &label)?;
            return Ok(PSeq::Loop(label, body, span));
        }
        if self.is_kw("next") || self.is_kw("exit") {
            let is_next = self.is_kw("next");
            self.advance();
            let target = if self.is_ident() { Some(self.ident()?) } else { None };
            let cond = if self.eat_kw("when") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            return Ok(if is_next {
                PSeq::Next(target, cond, span)
            } else {
                PSeq::Exit(target, cond, span)
            });
        }
        if self.eat_kw("return") {
            let e = if self.is_sym(";") { None } else { Some(self.expr()?) };
            self.expect_sym(";")?;
            return Ok(PSeq::Return(e, span));
        }
        if self.eat_kw("null") {
            self.expect_sym(";")?;
            return Ok(PSeq::Null);
        }
        let target = self.name()?;
        if self.eat_sym("<=") {
            let e = self.waveform()?;
            if self.is_kw("when") {
                return self.error("conditional signal assignment inside a process is not supported");
            }
            self.expect_sym(";")?;
            return Ok(PSeq::SigAssign(label, target, e, span));
        }
        if self.eat_sym(":=") {
            let e = self.expr()?;
            self.expect_sym(";")?;
            return Ok(PSeq::VarAssign(label, target, e, span));
        }
        if self.eat_sym(";") {
            return Ok(PSeq::Call(target));
        }
        let found = self.describe();
        self.error(format!("expected `<=`, `:=` or `;`, found {found}"))
    }

    /// `end kw [label];`
    fn end_labeled(&mut self, kw: &str, label: &str) -> PResult<()> {
        self.expect_kw("end")?;
        self.expect_kw(kw)?;
        if self.is_ident() {
            let s = self.span();
            let n = self.ident()?;
            if n != label {
                return self.error_at(s, format!("`end {kw}` name `{n}` does not match the label"));
            }
        }
        self.expect_sym(";")
    }

    fn choices(&mut self) -> PResult<Vec<Choice>> {
        let mut out = vec![self.choice()?];
        while self.eat_sym("|") {
            out.push(self.choice()?);
        }
        Ok(out)
    }

    fn choice(&mut self) -> PResult<Choice> {
        if self.eat_kw("others") {
            return Ok(Choice::Others);
        }
        let e = self.simple_expr()?;
        if self.eat_kw("to") {
            let r = self.simple_expr()?;
            return Ok(Choice::Range(PRange::Explicit(Box::new(e), Dir::To, Box::new(r))));
        }
        if self.eat_kw("downto") {
            let r = self.simple_expr()?;
            return Ok(Choice::Range(PRange::Explicit(Box::new(e), Dir::Downto, Box::new(r))));
        }
        Ok(Choice::Expr(e))
    }

    // -- names and expressions ------------------------------------------------

    fn assoc_list(&mut self) -> PResult<Vec<Assoc>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        loop {
            let formal = if self.is_ident() && self.is_sym_at(1, "=>") {
                let f = self.ident()?;
                self.advance();
                Some(f)
            } else {
                None
            };
            let actual = if self.eat_kw("open") { None } else { Some(self.expr()?) };
            out.push(Assoc { formal, actual });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    pub fn name(&mut self) -> PResult<PName> {
        let span = self.span();
        let base = self.ident()?;
        let mut suffixes = Vec::new();
        loop {
            if self.is_sym(".") {
                self.advance();
                if self.eat_kw("all") {
                    return self.error_at(span, "`.all` is only allowed in use clauses");
                }
                suffixes.push(Suffix::Field(self.ident()?));
            } else if self.is_sym("(") {
                // slice or argument list
                let save = self.pos;
                let mark = self.diags.len();
                self.advance();
                let first = self.simple_expr();
                let ranged = self.is_kw("to") || self.is_kw("downto");
                if let (Ok(left), true) = (first, ranged) {
                    let dir = if self.eat_kw("to") {
                        Dir::To
                    } else {
                        self.advance();
                        Dir::Downto
                    };
                    let right = self.simple_expr()?;
                    self.expect_sym(")")?;
                    suffixes.push(Suffix::Slice(PRange::Explicit(Box::new(left), dir, Box::new(right))));
                } else {
                    // re-parse as an association list; drop diagnostics of
                    // the speculative attempt
                    self.pos = save;
                    self.diags.truncate(mark);
                    suffixes.push(Suffix::Args(self.assoc_list()?));
                }
            } else if self.is_sym("'") && matches!(self.tok_at(1), Tok::Ident(_)) {
                self.advance();
                let Tok::Ident(a) = self.advance().tok else {
                    unreachable!()
                };
                suffixes.push(Suffix::Attr(a));
            } else if self.is_sym("'") && self.is_sym_at(1, "(") {
                return self.error("qualified expressions are not supported");
            } else {
                break;
            }
        }
        Ok(PName { base, suffixes, span })
    }

    pub fn expr(&mut self) -> PResult<PExpr> {
        let mut left = self.relation()?;
        let mut first_op: Option<BinOp> = None;
        loop {
            let span = self.span();
            let op = match self.tok() {
                Tok::Ident(s) => match s.as_str() {
                    "and" => BinOp::And,
                    "or" => BinOp::Or,
                    "nand" => BinOp::Nand,
                    "nor" => BinOp::Nor,
                    "xor" => BinOp::Xor,
                    "xnor" => BinOp::Xnor,
                    _ => break,
                },
                _ => break,
            };
            match &first_op {
                Some(f) if *f != op || matches!(op, BinOp::Nand | BinOp::Nor) => {
                    return self.error("mixed logical operators need parentheses");
                }
                _ => first_op = Some(op.clone()),
            }
            self.advance();
            let right = self.relation()?;
            left = PExpr::Binary(Box::new(left), op, Box::new(right), span);
        }
        Ok(left)
    }

    fn relation(&mut self) -> PResult<PExpr> {
        let left = self.shift_expr()?;
        let span = self.span();
        let op = match self.tok() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("/=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(left),
        };
        self.advance();
        let right = self.shift_expr()?;
        Ok(PExpr::Binary(Box::new(left), op, Box::new(right), span))
    }

    fn shift_expr(&mut self) -> PResult<PExpr> {
        let left = self.simple_expr()?;
        let span = self.span();
        let op = match self.tok() {
            Tok::Ident(s) => match s.as_str() {
                "sll" => BinOp::Sll,
                "srl" => BinOp::Srl,
                "sla" => BinOp::Sla,
                "sra" => BinOp::Sra,
                "rol" => BinOp::Rol,
                "ror" => BinOp::Ror,
                _ => return Ok(left),
            },
            _ => return Ok(left),
        };
        self.advance();
        let right = self.simple_expr()?;
        Ok(PExpr::Binary(Box::new(left), op, Box::new(right), span))
    }

    fn simple_expr(&mut self) -> PResult<PExpr> {
        let span = self.span();
        let sign = if self.eat_sym("-") {
            Some(UnaryOp::Neg)
        } else if self.eat_sym("+") {
            Some(UnaryOp::Plus)
        } else {
            None
        };
        let mut left = self.term()?;
        if let Some(op) = sign {
            left = PExpr::Unary(op, Box::new(left), span);
        }
        loop {
            let span = self.span();
            let op = match self.tok() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                Tok::Sym("&") => BinOp::Concat,
                _ => break,
            };
            self.advance();
            let right = self.term()?;
            left = PExpr::Binary(Box::new(left), op, Box::new(right), span);
        }
        Ok(left)
    }

    fn term(&mut self) -> PResult<PExpr> {
        let mut left = self.factor()?;
        loop {
            let span = self.span();
            let op = match self.tok() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Ident(s) if s == "mod" => BinOp::Mod,
                Tok::Ident(s) if s == "rem" => BinOp::Rem,
                _ => break,
            };
            self.advance();
            let right = self.factor()?;
            left = PExpr::Binary(Box::new(left), op, Box::new(right), span);
        }
        Ok(left)
    }

    fn factor(&mut self) -> PResult<PExpr> {
        let span = self.span();
        if self.eat_kw("not") {
            return Ok(PExpr::Unary(UnaryOp::Not, Box::new(self.primary()?), span));
        }
        if self.eat_kw("abs") {
            return Ok(PExpr::Unary(UnaryOp::Abs, Box::new(self.primary()?), span));
        }
        let base = self.primary()?;
        if self.eat_sym("**") {
            let e = self.primary()?;
            return Ok(PExpr::Binary(Box::new(base), BinOp::Pow, Box::new(e), span));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<PExpr> {
        let span = self.span();
        match self.tok().clone() {
            Tok::Int(i) => {
                self.advance();
                if self.is_ident()
                    && matches!(self.tok(), Tok::Ident(u) if ["fs", "ps", "ns", "us", "ms", "sec"].contains(&u.as_str()))
                {
                    return self.error(unsupported("time literal"));
                }
                Ok(PExpr::Int(i, span))
            }
            Tok::Real(r) => {
                self.advance();
                Ok(PExpr::Real(r, span))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(PExpr::Str(s, span))
            }
            Tok::Char(c) => {
                self.advance();
                Ok(PExpr::Char(c, span))
            }
            Tok::Sym("(") => self.paren(),
            Tok::Ident(s) if s == "null" => self.error("`null` is not an expression"),
            Tok::Ident(s) if s == "new" => self.error(unsupported("allocator")),
            Tok::Ident(_) if self.is_ident() => Ok(PExpr::Name(self.name()?)),
            _ => {
                let found = self.describe();
                self.error(format!("expected an expression, found {found}"))
            }
        }
    }

    /// Parenthesized expression or aggregate.
    fn paren(&mut self) -> PResult<PExpr> {
        let span = self.span();
        self.expect_sym("(")?;
        let mut elems: Vec<(Option<Choice>, PExpr)> = Vec::new();
        loop {
            let choices = if self.is_kw("others") {
                Some(self.choices()?)
            } else {
                None
            };
            let (choice, value) = match choices {
                Some(mut cs) => {
                    self.expect_sym("=>")?;
                    if cs.len() != 1 {
                        return self.error_at(span, "`|` in aggregates is not supported");
                    }
                    (cs.pop(), self.expr()?)
                }
                None => {
                    let first = self.expr()?;
                    if self.is_kw("to") || self.is_kw("downto") {
                        let dir = if self.eat_kw("to") {
                            Dir::To
                        } else {
                            self.advance();
                            Dir::Downto
                        };
                        let right = self.simple_expr()?;
                        self.expect_sym("=>")?;
                        let r = PRange::Explicit(Box::new(first), dir, Box::new(right));
                        (Some(Choice::Range(r)), self.expr()?)
                    } else if self.eat_sym("=>") {
                        (Some(Choice::Expr(first)), self.expr()?)
                    } else if self.is_sym("|") {
                        return self.error("`|` in aggregates is not supported");
                    } else {
                        (None, first)
                    }
                }
            };
            elems.push((choice, value));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        if elems.len() == 1 && elems[0].0.is_none() {
            return Ok(elems.pop().expect("one element").1);
        }
        Ok(PExpr::Aggregate(elems, span))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;

    fn parse(src: &str) -> (PFile, Vec<Diag>) {
        let mut d = Vec::new();
        let toks = tokenize(src, 0, &mut d);
        let f = Parser::new(toks, &mut d).file();
        (f, d)
    }

    #[test]
    fn empty_architecture() {
        let (f, d) = parse("entity e is end; architecture a of e is begin end;");
        assert!(d.is_empty(), "{d:?}");
        assert_eq!(f.entities[0].name, "e");
        assert!(f.architectures[0].body.is_empty());
    }

    #[test]
    fn conditional_assignment_has_two_arms_and_else() {
        let (f, d) = parse(
            "entity e is end; architecture a of e is signal s, x, y, z : bit; signal i, j : integer; \
             begin s <= x when i > 0 else y when j = 5 else z; end;",
        );
        assert!(d.is_empty(), "{d:?}");
        match &f.architectures[0].body[0] {
            PConc::CondAssign { arms, .. } => {
                assert_eq!(arms.len(), 3);
                assert!(arms[0].1.is_some() && arms[1].1.is_some() && arms[2].1.is_none());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn slices_and_calls_are_distinguished() {
        let mut d = Vec::new();
        let toks = tokenize("x(7 downto 4) f(a, b => c)", 0, &mut d);
        let mut p = Parser::new(toks, &mut d);
        let a = p.name().unwrap();
        let b = p.name().unwrap();
        assert!(matches!(a.suffixes[0], Suffix::Slice(_)));
        match &b.suffixes[0] {
            Suffix::Args(args) => {
                assert_eq!(args.len(), 2);
                assert_eq!(args[1].formal.as_deref(), Some("b"));
            }
            other => panic!("{other:?}"),
        }
        assert!(d.is_empty());
    }

    #[test]
    fn precedence() {
        let mut d = Vec::new();
        let toks = tokenize("a + b * c = d and e", 0, &mut d);
        let e = Parser::new(toks, &mut d).expr().unwrap();
        let PExpr::Binary(l, BinOp::And, _, _) = e else {
            panic!()
        };
        let PExpr::Binary(l, BinOp::Eq, _, _) = *l else {
            panic!()
        };
        let PExpr::Binary(_, BinOp::Add, r, _) = *l else {
            panic!()
        };
        assert!(matches!(*r, PExpr::Binary(_, BinOp::Mul, _, _)));
    }

    #[test]
    fn unsynthesizable_constructs_are_errors() {
        for stmt in ["wait for 10 ns;", "assert x = '1';", "s <= x after 5 ns;"] {
            let src = format!(
                "entity e is end; architecture a of e is signal s, x : bit; begin process begin {stmt} end process; end;"
            );
            let (_, d) = parse(&src);
            assert!(
                d.iter().any(|d| d.message.contains("not in synthesizable subset")),
                "{stmt}: {d:?}"
            );
        }
    }

    #[test]
    fn recovery_reports_several_errors() {
        let (f, d) = parse(
            "entity e is end; architecture a of e is signal s : bit; begin \
             process begin s <= ; s := ; s <= '1'; end process; end;",
        );
        assert_eq!(d.len(), 2, "{d:?}");
        let PConc::Process { body, .. } = &f.architectures[0].body[0] else {
            panic!()
        };
        assert_eq!(body.len(), 1);
    }
}
