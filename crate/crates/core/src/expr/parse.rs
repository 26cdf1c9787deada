//! Pratt parser for the surface-component expression language.
//!
//! Binding powers, loosest first:
//!
//! | operator        | left | right | assoc |
//! |-----------------|------|-------|-------|
//! | `+` `-`         | 1    | 2     | left  |
//! | `*` `/`         | 3    | 4     | left  |
//! | unary `-`       |      | 5     |       |
//! | `^`             | 7    | 6     | right |
//!
//! `^` binds tighter than unary minus, so `-u^2` is `-(u^2)`; its right
//! operand may itself start with a unary minus (`2^-u`).

use thiserror::Error;

use super::{BinOp, Expr, Func, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), found {found}")]
    Arity {
        offset: usize,
        name: String,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
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
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{text}`"),
            })?;
            out.push(Token {
                tok: Tok::Num(value),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            _ => {
                return Err(ParseError::Syntax {
                    offset: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, offset: start });
        i += c.len_utf8();
    }
    out.push(Token {
        tok: Tok::End,
        offset: src.len(),
    });
    Ok(out)
}

const UNARY_BP: u8 = 5;

fn infix_bp(op: char) -> Option<(u8, u8, BinOp)> {
    Some(match op {
        '+' => (1, 2, BinOp::Add),
        '-' => (1, 2, BinOp::Sub),
        '*' => (3, 4, BinOp::Mul),
        '/' => (3, 4, BinOp::Div),
        '^' => (7, 6, BinOp::Pow),
        _ => return None,
    })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            offset,
            message: message.into(),
        })
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.prefix()?;
        loop {
            let op = match &self.peek().tok {
                Tok::Op(c) => *c,
                _ => break,
            };
            let (l_bp, r_bp, bin) = infix_bp(op).expect("lexer only emits known operators");
            if l_bp < min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(r_bp)?;
            lhs = Expr::Bin(bin, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(x) => Ok(Expr::Num(x)),
            Tok::Op('-') => Ok(Expr::Neg(Box::new(self.expr(UNARY_BP)?))),
            Tok::LParen => {
                let inner = self.expr(0)?;
                let close = self.next();
                if close.tok != Tok::RParen {
                    return Self::syntax(close.offset, "expected `)`");
                }
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, t.offset),
            Tok::End => Self::syntax(t.offset, "unexpected end of input"),
            Tok::Op(c) => Self::syntax(t.offset, format!("unexpected operator `{c}`")),
            Tok::RParen => Self::syntax(t.offset, "unexpected `)`"),
            Tok::Comma => Self::syntax(t.offset, "unexpected `,`"),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr, ParseError> {
        match name.as_str() {
            "u" => return Ok(Expr::Var(Var::U)),
            "v" => return Ok(Expr::Var(Var::V)),
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            _ => {}
        }
        let func = Func::from_name(&name).ok_or_else(|| ParseError::UnknownIdentifier {
            offset,
            name: name.clone(),
        })?;
        let open = self.next();
        if open.tok != Tok::LParen {
            return Self::syntax(open.offset, format!("expected `(` after `{name}`"));
        }
        let mut args = Vec::new();
        if self.peek().tok == Tok::RParen {
            self.next();
        } else {
            loop {
                args.push(self.expr(0)?);
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    _ => return Self::syntax(t.offset, "expected `,` or `)`"),
                }
            }
        }
        if args.len() != func.arity() {
            return Err(ParseError::Arity {
                offset,
                name,
                expected: func.arity(),
                found: args.len(),
            });
        }
        Ok(Expr::Call(func, args))
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr(0)?;
    let t = p.peek();
    match &t.tok {
        Tok::End => Ok(e),
        Tok::RParen => Parser::syntax(t.offset, "unbalanced `)`"),
        _ => Parser::syntax(t.offset, "unexpected token after expression"),
    }
}
