//! Recursive-descent parser.
//!
//! Grammar, in precedence order (loosest first):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | COORD | FUNC '(' expr ')' | '(' expr ')' | 'pi' | 'e'
//! ```
//!
//! `^` is right-associative; unary minus binds looser than `^`, so `-t1^2`
//! is `-(t1^2)`.  `COORD` is `t` followed by a 1-based index with no leading
//! zero (`t1`, `t2`, ...); an index above the declared dimension is an error.

use super::ast::{BinOp, Expr, Func};
use super::lexer::{tokenize, Spanned, Tok};
use super::ParseError;

pub(super) fn parse_expr_str(src: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        dim,
        src_len: src.len(),
    };
    let root = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(ParseError::Syntax {
            offset: p.toks[p.pos].offset,
            message: "unexpected trailing input".into(),
        });
    }
    Ok(root)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    dim: usize,
    src_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn offset(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.offset)
            .unwrap_or(self.src_len)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        let Some(spanned) = self.bump() else {
            return Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".into(),
            });
        };
        match &spanned.tok {
            Tok::Num(v) => Ok(Expr::Num(*v)),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(ParseError::Syntax {
                        offset: self.offset(),
                        message: "expected `)`".into(),
                    }),
                }
            }
            Tok::Ident(name) => self.ident(name, spanned.offset),
            other => Err(ParseError::Syntax {
                offset: spanned.offset,
                message: format!("unexpected token `{other:?}`"),
            }),
        }
    }

    fn ident(&mut self, name: &str, offset: usize) -> Result<Expr, ParseError> {
        if name == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        if name == "e" {
            return Ok(Expr::Num(std::f64::consts::E));
        }
        if let Some(func) = Func::from_name(name) {
            match self.peek() {
                Some(Tok::LParen) => {
                    self.pos += 1;
                    let arg = self.expr()?;
                    match self.peek() {
                        Some(Tok::RParen) => {
                            self.pos += 1;
                            return Ok(Expr::Call(func, Box::new(arg)));
                        }
                        _ => {
                            return Err(ParseError::Syntax {
                                offset: self.offset(),
                                message: "expected `)`".into(),
                            })
                        }
                    }
                }
                _ => {
                    return Err(ParseError::Syntax {
                        offset: self.offset(),
                        message: format!("expected `(` after function `{name}`"),
                    })
                }
            }
        }
        if let Some(rest) = name.strip_prefix('t') {
            let digits_ok = !rest.is_empty()
                && rest.bytes().all(|b| b.is_ascii_digit())
                && !rest.starts_with('0');
            if digits_ok {
                let index: usize = rest.parse().map_err(|_| ParseError::Syntax {
                    offset,
                    message: format!("coordinate index `{name}` is too large"),
                })?;
                if index > self.dim {
                    return Err(ParseError::CoordOutOfRange {
                        offset,
                        index,
                        dim: self.dim,
                    });
                }
                return Ok(Expr::Coord(index - 1));
            }
        }
        Err(ParseError::UnknownIdentifier {
            offset,
            name: name.to_string(),
        })
    }
}
