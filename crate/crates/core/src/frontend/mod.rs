//! Textual front end: lexing, parsing, elaboration to surface designs, then
//! lowering and checking into a design registry.

pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod syntax;

use std::fmt;
use std::path::{Path, PathBuf};

use crate::ast::Design;
use crate::desugar::{lower_design, ComplexDesign, LowerOptions};
use crate::hierarchy::Registry;

/// Position in a source file; `file` indexes the list of loaded sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub file: usize,
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diag {
    pub severity: Severity,
    /// `None` for design-level problems found after elaboration.
    pub span: Option<Span>,
    pub message: String,
}

impl Diag {
    pub fn error(span: Span, msg: impl Into<String>) -> Diag {
        Diag {
            severity: Severity::Error,
            span: Some(span),
            message: msg.into(),
        }
    }

    pub fn warning(span: Span, msg: impl Into<String>) -> Diag {
        Diag {
            severity: Severity::Warning,
            span: Some(span),
            message: msg.into(),
        }
    }

    pub fn unlocated(msg: impl Into<String>) -> Diag {
        Diag {
            severity: Severity::Error,
            span: None,
            message: msg.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> SourceUnit {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn read(path: &Path) -> std::io::Result<SourceUnit> {
        Ok(SourceUnit {
            path: path.display().to_string(),
            text: std::fs::read_to_string(path)?,
        })
    }
}

/// Formats diagnostics as `path:line:col: severity: message`, one per line.
pub fn render_diags(diags: &[Diag], sources: &[SourceUnit], color: bool) -> String {
    let mut out = String::new();
    for d in diags {
        let loc = match d.span {
            Some(s) => {
                let path = sources.get(s.file).map(|u| u.path.as_str()).unwrap_or("<input>");
                format!("{path}:{}:{}: ", s.line, s.col)
            }
            None => String::new(),
        };
        let sev = match (color, d.severity) {
            (true, Severity::Error) => "\x1b[1;31merror\x1b[0m".to_string(),
            (true, Severity::Warning) => "\x1b[1;33mwarning\x1b[0m".to_string(),
            (false, s) => s.to_string(),
        };
        out.push_str(&format!("{loc}{sev}: {}\n", d.message));
    }
    out
}

/// Tokenizes and parses one file.
pub fn parse_file(src: &SourceUnit, file: usize) -> (syntax::PFile, Vec<Diag>) {
    let mut diags = Vec::new();
    let toks = lexer::tokenize(&src.text, file, &mut diags);
    let f = parser::Parser::new(toks, &mut diags).file();
    (f, diags)
}

/// Parses and elaborates a set of files into surface designs.
pub fn parse_designs(sources: &[SourceUnit]) -> (Vec<ComplexDesign>, Vec<Diag>) {
    let mut diags = Vec::new();
    let mut files = Vec::new();
    for (i, s) in sources.iter().enumerate() {
        let (f, d) = parse_file(s, i);
        diags.extend(d);
        files.push(f);
    }
    let (designs, d) = elaborate::elaborate(&files);
    diags.extend(d);
    (designs, diags)
}

/// Single-file convenience wrapper around [`parse_designs`].
pub fn parse_design(src: &SourceUnit) -> (Vec<ComplexDesign>, Vec<Diag>) {
    parse_designs(std::slice::from_ref(src))
}

/// Everything produced by loading a set of files.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub sources: Vec<SourceUnit>,
    pub complex: Vec<ComplexDesign>,
    pub core: Vec<Design>,
    pub registry: Registry,
    pub warnings: Vec<Diag>,
}

impl Loaded {
    /// The single design not instantiated by any other, if there is one.
    pub fn default_top(&self) -> Option<String> {
        let used: Vec<&str> = self
            .core
            .iter()
            .flat_map(|d| d.instances.iter().map(|i| i.component.as_str()))
            .collect();
        let roots: Vec<&Design> = self.core.iter().filter(|d| !used.contains(&d.name.as_str())).collect();
        match roots.as_slice() {
            [d] => Some(d.name.clone()),
            _ => None,
        }
    }
}

/// Failure to load: the sources read so far and the diagnostics.
#[derive(Debug, Clone)]
pub struct LoadError {
    pub sources: Vec<SourceUnit>,
    pub diags: Vec<Diag>,
}

impl LoadError {
    pub fn render(&self, color: bool) -> String {
        render_diags(&self.diags, &self.sources, color)
    }
}

/// Parses, elaborates, lowers and checks in-memory sources.
pub fn load_sources(sources: Vec<SourceUnit>, opts: LowerOptions) -> Result<Loaded, LoadError> {
    let (complex, diags) = parse_designs(&sources);
    let (errors, warnings): (Vec<Diag>, Vec<Diag>) = diags.into_iter().partition(|d| d.is_error());
    if !errors.is_empty() {
        return Err(LoadError { sources, diags: errors });
    }
    let mut core = Vec::new();
    let mut errors = Vec::new();
    for c in &complex {
        match lower_design(c, opts) {
            Ok(d) => core.push(d),
            Err(msg) => errors.push(Diag::unlocated(format!("design `{}`: {msg}", c.name))),
        }
    }
    if !errors.is_empty() {
        return Err(LoadError { sources, diags: errors });
    }
    match Registry::from_designs(core.clone()) {
        Ok(registry) => Ok(Loaded {
            sources,
            complex,
            core,
            registry,
            warnings,
        }),
        Err(ds) => Err(LoadError {
            sources,
            diags: ds.into_iter().map(|d| Diag::unlocated(d.message)).collect(),
        }),
    }
}

/// Reads and loads files from disk.
pub fn load_registry(paths: &[PathBuf], opts: LowerOptions) -> Result<Loaded, LoadError> {
    let mut sources = Vec::new();
    let mut diags = Vec::new();
    for p in paths {
        match SourceUnit::read(p) {
            Ok(s) => sources.push(s),
            Err(e) => diags.push(Diag::unlocated(format!("cannot read {}: {e}", p.display()))),
        }
    }
    if !diags.is_empty() {
        return Err(LoadError { sources, diags });
    }
    load_sources(sources, opts)
}
