//! Recursive-descent parser for the `par:...;time:...;var:...;fun:...;`
//! field description.
//!
//! Expression grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' UINT)?
//! primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! ```
//!
//! Integer powers are lowered at parse time onto the square and product
//! nodes (`x^4 = (x^2)^2`, `x^3 = x * x^2`).

use super::{Builder, Node};
use crate::error::{Error, Result};
use crate::interval::Interval;

#[derive(Default)]
pub(super) struct Sections<'a> {
    pub par: Vec<(usize, &'a str)>,
    pub time: Option<(usize, &'a str)>,
    pub var: Vec<(usize, &'a str)>,
    pub fun: Vec<(usize, &'a str)>,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `s` on `sep` at parenthesis depth zero, returning trimmed pieces
/// with their byte offsets into the original source.
fn split_top(s: &str, base: usize, sep: u8) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, b) in s.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            _ if b == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out.into_iter()
        .map(|(off, piece)| {
            let lead = piece.len() - piece.trim_start().len();
            (base + off + lead, piece.trim())
        })
        .collect()
}

pub(super) fn split_sections(src: &str) -> Result<Sections<'_>> {
    let mut sections = Sections::default();
    let mut seen = Vec::new();
    for (pos, chunk) in split_top(src, 0, b';') {
        if chunk.is_empty() {
            continue;
        }
        let colon = chunk.find(':').ok_or_else(|| Error::Syntax {
            pos,
            message: format!("expected `name:` at the start of section `{chunk}`"),
        })?;
        let name = chunk[..colon].trim();
        let body_off = pos + colon + 1;
        let body = &chunk[colon + 1..];
        if seen.contains(&name) {
            return Err(Error::Syntax { pos, message: format!("duplicate section `{name}`") });
        }
        seen.push(name);
        let items: Vec<(usize, &str)> = if body.trim().is_empty() { Vec::new() } else { split_top(body, body_off, b',') };
        match name {
            "par" => sections.par = items,
            "var" => sections.var = items,
            "fun" => sections.fun = items,
            "time" => {
                if items.len() != 1 {
                    return Err(Error::Syntax { pos: body_off, message: "time section takes exactly one name".into() });
                }
                sections.time = Some(items[0]);
            }
            other => {
                return Err(Error::Syntax { pos, message: format!("unknown section `{other}`") });
            }
        }
    }
    let mut names: Vec<&str> = Vec::new();
    for &(pos, name) in sections.par.iter().chain(sections.time.iter()).chain(sections.var.iter()) {
        if !is_ident(name) {
            return Err(Error::Syntax { pos, message: format!("`{name}` is not an identifier") });
        }
        if matches!(name, "sin" | "cos" | "exp" | "sqrt") || names.contains(&name) {
            return Err(Error::Syntax { pos, message: format!("name `{name}` is reserved or already declared") });
        }
        names.push(name);
    }
    if sections.var.is_empty() {
        return Err(Error::Syntax { pos: src.len(), message: "missing `var:` section".into() });
    }
    if sections.var.len() != sections.fun.len() {
        return Err(Error::ArityMismatch { vars: sections.var.len(), funs: sections.fun.len() });
    }
    Ok(sections)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(&'a str),
    Ident(&'a str),
    Sym(u8),
    End,
}

struct Lexer<'a> {
    src: &'a str,
    base: usize,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src.as_bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and its absolute byte offset.
    fn next(&mut self) -> Result<(usize, Tok<'a>)> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let Some(&c) = bytes.get(start) else {
            return Ok((self.base + start, Tok::End));
        };
        if c.is_ascii_digit() || c == b'.' {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            self.pos = i;
            return Ok((self.base + start, Tok::Num(&self.src[start..i])));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut i = start;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            self.pos = i;
            return Ok((self.base + start, Tok::Ident(&self.src[start..i])));
        }
        if b"+-*/^()".contains(&c) {
            self.pos += 1;
            return Ok((self.base + start, Tok::Sym(c)));
        }
        Err(Error::Syntax { pos: self.base + start, message: format!("unexpected character `{}`", c as char) })
    }
}

pub(super) struct ExprParser<'a, 'b> {
    lex: Lexer<'a>,
    peeked: Option<(usize, Tok<'a>)>,
    builder: &'b mut Builder,
    scope: &'b Scope<'a>,
}

/// Identifier tables visible inside `fun:` expressions.
pub(super) struct Scope<'a> {
    pub par: Vec<&'a str>,
    pub time: Option<&'a str>,
    pub var: Vec<&'a str>,
}

impl<'a, 'b> ExprParser<'a, 'b> {
    pub fn new(src: &'a str, base: usize, builder: &'b mut Builder, scope: &'b Scope<'a>) -> Self {
        ExprParser { lex: Lexer { src, base, pos: 0 }, peeked: None, builder, scope }
    }

    fn peek(&mut self) -> Result<&(usize, Tok<'a>)> {
        if self.peeked.is_none() {
            self.peeked = Some(self.lex.next()?);
        }
        Ok(self.peeked.as_ref().unwrap())
    }

    fn bump(&mut self) -> Result<(usize, Tok<'a>)> {
        match self.peeked.take() {
            Some(t) => Ok(t),
            None => self.lex.next(),
        }
    }

    fn expect(&mut self, sym: u8) -> Result<()> {
        let (pos, tok) = self.bump()?;
        if tok == Tok::Sym(sym) {
            Ok(())
        } else {
            Err(Error::Syntax { pos, message: format!("expected `{}`, found {}", sym as char, describe(&tok)) })
        }
    }

    pub fn parse_all(mut self) -> Result<usize> {
        let root = self.expr()?;
        let (pos, tok) = self.bump()?;
        if tok != Tok::End {
            return Err(Error::Syntax { pos, message: format!("unexpected {}", describe(&tok)) });
        }
        Ok(root)
    }

    fn expr(&mut self) -> Result<usize> {
        let mut lhs = self.term()?;
        loop {
            match self.peek()?.1 {
                Tok::Sym(b'+') => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = self.builder.add(Node::Add(lhs, rhs));
                }
                Tok::Sym(b'-') => {
                    self.bump()?;
                    let rhs = self.term()?;
                    lhs = self.builder.add(Node::Sub(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<usize> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek()?.1 {
                Tok::Sym(b'*') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    lhs = self.builder.add(Node::Mul(lhs, rhs));
                }
                Tok::Sym(b'/') => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    lhs = self.builder.add(Node::Div(lhs, rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<usize> {
        match self.peek()?.1 {
            Tok::Sym(b'-') => {
                self.bump()?;
                let a = self.unary()?;
                Ok(self.builder.add(Node::Neg(a)))
            }
            Tok::Sym(b'+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<usize> {
        let base = self.primary()?;
        if self.peek()?.1 != Tok::Sym(b'^') {
            return Ok(base);
        }
        self.bump()?;
        let (pos, tok) = self.bump()?;
        let n = match tok {
            Tok::Num(text) if text.bytes().all(|b| b.is_ascii_digit()) => text
                .parse::<u32>()
                .map_err(|_| Error::Syntax { pos, message: format!("exponent `{text}` is too large") })?,
            other => {
                return Err(Error::Syntax {
                    pos,
                    message: format!("expected a non-negative integer exponent, found {}", describe(&other)),
                })
            }
        };
        Ok(self.lower_pow(base, n))
    }

    fn lower_pow(&mut self, base: usize, n: u32) -> usize {
        match n {
            0 => self.builder.add(Node::Const { value: Interval::ONE, text: "1".into() }),
            1 => base,
            _ if n.is_multiple_of(2) => {
                let half = self.lower_pow(base, n / 2);
                self.builder.add(Node::Sqr(half))
            }
            _ => {
                let rest = self.lower_pow(base, n - 1);
                self.builder.add(Node::Mul(base, rest))
            }
        }
    }

    fn primary(&mut self) -> Result<usize> {
        let (pos, tok) = self.bump()?;
        match tok {
            Tok::Num(text) => {
                let value = Interval::from_decimal(text)
                    .map_err(|_| Error::Syntax { pos, message: format!("malformed number `{text}`") })?;
                Ok(self.builder.add(Node::Const { value, text: text.to_string() }))
            }
            Tok::Sym(b'(') => {
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if matches!(name, "sin" | "cos" | "exp" | "sqrt") {
                    self.expect(b'(')?;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    let node = match name {
                        "sin" => Node::Sin(arg),
                        "cos" => Node::Cos(arg),
                        "exp" => Node::Exp(arg),
                        _ => Node::Sqrt(arg),
                    };
                    return Ok(self.builder.add(node));
                }
                if let Some(i) = self.scope.var.iter().position(|&v| v == name) {
                    return Ok(self.builder.add(Node::Var(i)));
                }
                if let Some(i) = self.scope.par.iter().position(|&v| v == name) {
                    return Ok(self.builder.add(Node::Param(i)));
                }
                if self.scope.time == Some(name) {
                    return Ok(self.builder.add(Node::Time));
                }
                Err(Error::UnknownIdentifier { pos, name: name.to_string() })
            }
            other => Err(Error::Syntax { pos, message: format!("unexpected {}", describe(&other)) }),
        }
    }
}

fn describe(tok: &Tok<'_>) -> String {
    match tok {
        Tok::Num(t) => format!("number `{t}`"),
        Tok::Ident(t) => format!("identifier `{t}`"),
        Tok::Sym(c) => format!("`{}`", *c as char),
        Tok::End => "end of expression".into(),
    }
}
