use super::{Expr, Func};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{name}` at byte {pos}")]
    UndeclaredSymbol { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax { pos, msg: msg.into() }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push(Token { tok: Tok::Plus, pos: i }),
            b'-' => out.push(Token { tok: Tok::Minus, pos: i }),
            b'*' => out.push(Token { tok: Tok::Star, pos: i }),
            b'/' => out.push(Token { tok: Tok::Slash, pos: i }),
            b'^' => out.push(Token { tok: Tok::Caret, pos: i }),
            b'(' => out.push(Token { tok: Tok::LParen, pos: i }),
            b')' => out.push(Token { tok: Tok::RParen, pos: i }),
            b'0'..=b'9' | b'.' => {
                let mut integer = true;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    if bytes[i] == b'.' {
                        integer = false;
                    }
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integer = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text
                    .parse()
                    .map_err(|_| syntax(start, format!("malformed number `{text}`")))?;
                out.push(Token { tok: Tok::Num { value, integer }, pos: start });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(src[start..i].to_string()), pos: start });
                continue;
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, format!("unexpected character `{ch}`")));
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a, S> {
    toks: Vec<Token>,
    at: usize,
    end: usize,
    coords: &'a [S],
}

impl<S: AsRef<str>> Parser<'_, S> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.at + k).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Num { .. }) | Some(Tok::Ident(_)) | Some(Tok::LParen) => {
                    return Err(syntax(self.pos(), "juxtaposition is not allowed; use `*`"));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            // `-3` is a literal, `-3^2` is -(3^2).
            if let Some(&Tok::Num { value, .. }) = self.peek() {
                if self.peek_at(1) != Some(&Tok::Caret) {
                    self.bump();
                    return Ok(Expr::Const(-value));
                }
            }
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let negative = if let Some(Tok::Minus) = self.peek() {
                self.bump();
                true
            } else {
                false
            };
            let pos = self.pos();
            let k = match self.bump().map(|t| t.tok) {
                Some(Tok::Num { value, integer: true }) if value <= i32::MAX as f64 => value as i32,
                _ => {
                    return Err(syntax(
                        pos,
                        "exponent must be an integer literal; write general powers as exp(a*log(x))",
                    ))
                }
            };
            if let Some(Tok::Caret) = self.peek() {
                return Err(syntax(self.pos(), "chained `^` is ambiguous; add parentheses"));
            }
            return Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Token { tok: Tok::Num { value, .. }, .. }) => Ok(Expr::Const(value)),
            Some(Token { tok: Tok::LParen, .. }) => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(Token { tok: Tok::Ident(name), pos }) => {
                if self.peek() == Some(&Tok::LParen) {
                    let f = Func::from_name(&name)
                        .ok_or_else(|| syntax(pos, format!("unknown function `{name}`")))?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                if let Some(i) = self.coords.iter().position(|c| c.as_ref() == name) {
                    return Ok(Expr::Var(i));
                }
                if name == "pi" {
                    return Ok(Expr::Const(std::f64::consts::PI));
                }
                if Func::from_name(&name).is_some() {
                    return Err(syntax(pos, format!("function `{name}` needs an argument list")));
                }
                Err(ParseError::UndeclaredSymbol { name, pos })
            }
            Some(t) => Err(syntax(t.pos, "expected a number, symbol, function call or `(`")),
            None => Err(syntax(pos, "unexpected end of input")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Token { tok: Tok::RParen, .. }) => Ok(()),
            _ => Err(syntax(pos, "expected `)`")),
        }
    }
}

/// Parses `source` over the coordinate list `coords`.
pub fn parse<S: AsRef<str>>(source: &str, coords: &[S]) -> Result<Expr, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, at: 0, end: source.len(), coords };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        let pos = p.pos();
        let msg = match p.peek() {
            Some(Tok::RParen) => "unbalanced `)`",
            _ => "unexpected trailing input",
        };
        return Err(syntax(pos, msg));
    }
    Ok(e)
}
