//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' INTEGER)?
//! atom   := INTEGER | IDENT | '(' expr ')'
//! IDENT  := name | name '_' suffix | name '_{' suffix '}'
//! ```
//!
//! A suffix is a non-empty word over the independent-variable names.

use num_bigint::BigInt;

use super::{Coordinate, JetExpr, Rational};
use crate::context::JetContext;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident { name: String, suffix: Option<String> },
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    chars: Vec<(usize, char)>,
    idx: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

impl Lexer {
    fn new(src: &str) -> Self {
        Lexer {
            chars: src.chars().enumerate().collect(),
            idx: 0,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.chars.get(self.idx).map(|&(_, c)| c)
    }

    fn pos(&self) -> usize {
        self.idx + 1
    }

    fn tokens(mut self) -> Result<Vec<(usize, Tok)>> {
        let mut out = Vec::new();
        loop {
            while self.peek_char().is_some_and(char::is_whitespace) {
                self.idx += 1;
            }
            let pos = self.pos();
            let Some(c) = self.peek_char() else {
                out.push((pos, Tok::End));
                return Ok(out);
            };
            let tok = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                d if d.is_ascii_digit() => {
                    let digits = self.take_while(|c| c.is_ascii_digit());
                    if self.peek_char().is_some_and(|c| c.is_ascii_alphabetic() || c == '.') {
                        return Err(syntax(self.pos(), "malformed number"));
                    }
                    out.push((pos, Tok::Int(digits.parse().expect("ascii digits"))));
                    continue;
                }
                a if a.is_ascii_alphabetic() => {
                    let name = self.take_while(|c| c.is_ascii_alphanumeric());
                    let mut suffix = None;
                    if self.peek_char() == Some('_') {
                        self.idx += 1;
                        if self.peek_char() == Some('{') {
                            self.idx += 1;
                            let s = self.take_while(|c| c.is_ascii_alphanumeric());
                            if self.peek_char() != Some('}') {
                                return Err(syntax(self.pos(), "expected `}` after derivative suffix"));
                            }
                            self.idx += 1;
                            suffix = Some(s);
                        } else {
                            suffix = Some(self.take_while(|c| c.is_ascii_alphanumeric()));
                        }
                        if suffix.as_deref() == Some("") {
                            return Err(syntax(self.pos(), "empty derivative suffix"));
                        }
                    }
                    out.push((pos, Tok::Ident { name, suffix }));
                    continue;
                }
                other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
            };
            self.idx += 1;
            out.push((pos, tok));
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek_char().filter(|&c| f(c)) {
            s.push(c);
            self.idx += 1;
        }
        s
    }
}

struct Parser<'c> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    ctx: &'c JetContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].1
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.idx].1.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<JetExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<JetExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = acc.checked_div(&rhs)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<JetExpr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<JetExpr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e: u32 = n.try_into().map_err(|_| syntax(pos, "exponent too large"))?;
                if *self.peek() == Tok::Caret {
                    return Err(syntax(self.pos(), "chained exponents need parentheses"));
                }
                Ok(base.pow(e))
            }
            _ => Err(syntax(pos, "expected a non-negative integer exponent")),
        }
    }

    fn atom(&mut self) -> Result<JetExpr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(JetExpr::constant(Rational::from_integer(n))),
            Tok::LParen => {
                let e = self.expr()?;
                if self.bump() != Tok::RParen {
                    return Err(syntax(self.toks[self.idx.saturating_sub(1)].0, "expected `)`"));
                }
                Ok(e)
            }
            Tok::Ident { name, suffix } => self.resolve(pos, &name, suffix.as_deref()).map(JetExpr::var),
            Tok::End => Err(syntax(pos, "unexpected end of input")),
            other => Err(syntax(pos, format!("unexpected token {other:?}"))),
        }
    }

    fn resolve(&self, pos: usize, name: &str, suffix: Option<&str>) -> Result<Coordinate> {
        if let Some(j) = self.ctx.dependent_index(name) {
            return match suffix {
                None => Ok(self.ctx.u(j)),
                Some(s) => self
                    .ctx
                    .parse_suffix(s)
                    .map(|sigma| Coordinate::Jet(j, sigma))
                    .ok_or_else(|| syntax(pos, format!("invalid derivative suffix `{s}`"))),
            };
        }
        let full = match suffix {
            Some(s) => format!("{name}_{s}"),
            None => name.to_string(),
        };
        if suffix.is_some() {
            if self.ctx.independent_index(name).is_some() || self.ctx.fiber_index(name).is_some() {
                return Err(syntax(pos, format!("`{name}` cannot carry a derivative suffix")));
            }
            return Err(Error::Undeclared { name: full, pos });
        }
        if let Some(i) = self.ctx.independent_index(name) {
            return Ok(Coordinate::Independent(i));
        }
        if let Some(a) = self.ctx.fiber_index(name) {
            return Ok(Coordinate::Nonlocal(a));
        }
        Err(Error::Undeclared { name: full, pos })
    }
}

/// Parse `text` into its canonical [`JetExpr`] under the declarations `ctx`.
pub fn parse(text: &str, ctx: &JetContext) -> Result<JetExpr> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, idx: 0, ctx };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected token {:?}", p.peek())));
    }
    Ok(e)
}
