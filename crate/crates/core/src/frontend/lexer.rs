//! Tokenizer. Identifiers and keywords are lower-cased; bit-string literals
//! (`x"0F"`, `b"01"`, `o"7"`) are expanded to plain binary strings.

use super::{Diag, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Char(char),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: [&str; 25] = [
    "<=", ":=", "=>", "/=", ">=", "**", "<>", "(", ")", ",", ";", ":", ".", "&", "'", "+", "-", "*", "/", "=", "<",
    ">", "|", "[", "]",
];

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    file: usize,
    diags: &'a mut Vec<Diag>,
}

impl Lexer<'_> {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn span(&self) -> Span {
        Span {
            file: self.file,
            line: self.line,
            col: self.col,
        }
    }

    fn error(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diag::error(span, msg));
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek(0) {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('-') if self.peek(1) == Some('-') => {
                    while !matches!(self.peek(0), None | Some('\n')) {
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn string_body(&mut self, start: Span) -> String {
        // opening quote already consumed
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') if self.peek(0) == Some('"') => {
                    self.bump();
                    s.push('"');
                }
                Some('"') => return s,
                Some('\n') | None => {
                    self.error(start, "unterminated string literal");
                    return s;
                }
                Some(c) => s.push(c),
            }
        }
    }

    fn number(&mut self, start: Span) -> Tok {
        let mut digits = String::new();
        while let Some(c) = self.peek(0) {
            if c.is_ascii_digit() || c == '_' {
                if c != '_' {
                    digits.push(c);
                }
                self.bump();
            } else {
                break;
            }
        }
        // based literal 16#FF#
        if self.peek(0) == Some('#') {
            self.bump();
            let base: u32 = digits.parse().unwrap_or(0);
            let mut body = String::new();
            while let Some(c) = self.peek(0) {
                self.bump();
                if c == '#' {
                    break;
                }
                if c != '_' {
                    body.push(c);
                }
            }
            return match (2..=16)
                .contains(&base)
                .then(|| i64::from_str_radix(&body, base).ok())
                .flatten()
            {
                Some(v) => Tok::Int(v),
                None => {
                    self.error(start, format!("bad based literal {base}#{body}#"));
                    Tok::Int(0)
                }
            };
        }
        let mut is_real = false;
        if self.peek(0) == Some('.') && self.peek(1).is_some_and(|c| c.is_ascii_digit()) {
            is_real = true;
            digits.push('.');
            self.bump();
            while let Some(c) = self.peek(0) {
                if c.is_ascii_digit() || c == '_' {
                    if c != '_' {
                        digits.push(c);
                    }
                    self.bump();
                } else {
                    break;
                }
            }
        }
        let mut exp = 0i32;
        if matches!(self.peek(0), Some('e' | 'E'))
            && (self.peek(1).is_some_and(|c| c.is_ascii_digit())
                || (matches!(self.peek(1), Some('+' | '-')) && self.peek(2).is_some_and(|c| c.is_ascii_digit())))
        {
            self.bump();
            let mut e = String::new();
            if let Some(c @ ('+' | '-')) = self.peek(0) {
                e.push(c);
                self.bump();
            }
            while let Some(c) = self.peek(0).filter(|c| c.is_ascii_digit()) {
                e.push(c);
                self.bump();
            }
            exp = e.parse().unwrap_or(0);
        }
        if is_real {
            let v: f64 = digits.parse().unwrap_or(0.0);
            return Tok::Real(v * 10f64.powi(exp));
        }
        let v = digits.parse::<i64>().ok().and_then(|v| {
            if exp >= 0 {
                v.checked_mul(10i64.checked_pow(exp as u32)?)
            } else {
                None
            }
        });
        match v {
            Some(v) => Tok::Int(v),
            None => {
                self.error(start, format!("integer literal {digits} out of range"));
                Tok::Int(0)
            }
        }
    }
}

fn expand_bit_string(base: char, body: &str) -> Option<String> {
    let bits_per = match base {
        'b' => 1,
        'o' => 3,
        'x' => 4,
        _ => return None,
    };
    let mut out = String::new();
    for c in body.chars().filter(|c| *c != '_') {
        if bits_per == 1 {
            if !matches!(c, '0' | '1') {
                return None;
            }
            out.push(c);
            continue;
        }
        let d = c.to_digit(1 << bits_per)?;
        for k in (0..bits_per).rev() {
            out.push(if d >> k & 1 == 1 { '1' } else { '0' });
        }
    }
    Some(out)
}

/// Splits `text` into tokens; the last token is always `Eof`.
pub fn tokenize(text: &str, file: usize, diags: &mut Vec<Diag>) -> Vec<Token> {
    let mut lx = Lexer {
        chars: text.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        file,
        diags,
    };
    let mut out: Vec<Token> = Vec::new();
    loop {
        lx.skip_trivia();
        let span = lx.span();
        let Some(c) = lx.peek(0) else {
            out.push(Token { tok: Tok::Eof, span });
            return out;
        };
        let tok = if c.is_ascii_alphabetic() {
            let mut id = String::new();
            while let Some(c) = lx.peek(0).filter(|c| c.is_ascii_alphanumeric() || *c == '_') {
                id.push(c.to_ascii_lowercase());
                lx.bump();
            }
            if id.len() == 1 && lx.peek(0) == Some('"') && matches!(id.as_str(), "b" | "o" | "x") {
                lx.bump();
                let body = lx.string_body(span);
                let base = id.chars().next().unwrap_or('b');
                match expand_bit_string(base, &body) {
                    Some(bits) => Tok::Str(bits),
                    None => {
                        lx.error(span, format!("bad bit-string literal {base}\"{body}\""));
                        Tok::Str(String::new())
                    }
                }
            } else {
                Tok::Ident(id)
            }
        } else if c.is_ascii_digit() {
            lx.number(span)
        } else if c == '"' {
            lx.bump();
            Tok::Str(lx.string_body(span))
        } else if c == '\''
            && lx.peek(2) == Some('\'')
            && !matches!(out.last().map(|t| &t.tok), Some(Tok::Sym(")")) | Some(Tok::Sym("]")))
            && !matches!(out.last().map(|t| &t.tok), Some(Tok::Ident(id)) if !super::parser::RESERVED.contains(&id.as_str()))
        {
            lx.bump();
            let ch = lx.bump().unwrap_or(' ');
            lx.bump();
            Tok::Char(ch)
        } else if let Some(sym) = SYMBOLS
            .iter()
            .find(|s| s.chars().enumerate().all(|(k, sc)| lx.peek(k) == Some(sc)))
        {
            for _ in 0..sym.len() {
                lx.bump();
            }
            Tok::Sym(sym)
        } else {
            lx.bump();
            lx.error(span, format!("unexpected character `{c}`"));
            continue;
        };
        out.push(Token { tok, span });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        let mut d = Vec::new();
        let t = tokenize(s, 0, &mut d);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_are_lowercased() {
        assert_eq!(
            toks("ENTITY Foo IS"),
            vec![
                Tok::Ident("entity".into()),
                Tok::Ident("foo".into()),
                Tok::Ident("is".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn tick_after_name_is_an_attribute() {
        assert_eq!(
            toks("clk'event and c = '1'"),
            vec![
                Tok::Ident("clk".into()),
                Tok::Sym("'"),
                Tok::Ident("event".into()),
                Tok::Ident("and".into()),
                Tok::Ident("c".into()),
                Tok::Sym("="),
                Tok::Char('1'),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn tick_after_keyword_is_a_character() {
        let t = toks("else '0'");
        assert_eq!(t[1], Tok::Char('0'));
    }

    #[test]
    fn bit_strings_expand() {
        assert_eq!(toks("x\"0F\"")[0], Tok::Str("00001111".into()));
        assert_eq!(toks("o\"7\"")[0], Tok::Str("111".into()));
        assert_eq!(toks("B\"1_0\"")[0], Tok::Str("10".into()));
    }

    #[test]
    fn numbers() {
        assert_eq!(toks("1_000")[0], Tok::Int(1000));
        assert_eq!(toks("16#FF#")[0], Tok::Int(255));
        assert_eq!(toks("2e3")[0], Tok::Int(2000));
        assert_eq!(toks("1.5")[0], Tok::Real(1.5));
    }

    #[test]
    fn comments_and_positions() {
        let mut d = Vec::new();
        let t = tokenize("-- c\n  a <= b;", 0, &mut d);
        assert_eq!(t[0].span.line, 2);
        assert_eq!(t[0].span.col, 3);
        assert_eq!(t[1].tok, Tok::Sym("<="));
    }
}
