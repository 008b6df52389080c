//! Arithmetic expressions in `z`: `+ - * / ^`, `sin cos exp`, `pi`, `e`, numbers.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at character {}", self.message, self.position + 1)
    }
}

impl std::error::Error for ExprError {}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
            end: src.len(),
        };
        let e = p.sum()?;
        match p.peek() {
            None => Ok(e),
            Some((at, tok)) => Err(ExprError {
                position: at,
                message: format!("unexpected {tok}"),
            }),
        }
    }

    pub fn eval(&self, z: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => z,
            Expr::Neg(e) => -e.eval(z),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(z), b.eval(z));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(z);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "`{s}`"),
            Token::Sym(c) => write!(f, "`{c}`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>, ExprError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (at, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_ascii_digit() || chars[k].1 == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k].1 == 'e' || chars[k].1 == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j].1 == '+' || chars[j].1 == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].1.is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let end = chars.get(k).map_or(src.len(), |c| c.0);
            let text = &src[chars[start].0..end];
            let v = text.parse::<f64>().map_err(|_| ExprError {
                position: at,
                message: format!("malformed number `{text}`"),
            })?;
            out.push((at, Token::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].1.is_alphanumeric() || chars[k].1 == '_') {
                k += 1;
            }
            let end = chars.get(k).map_or(src.len(), |c| c.0);
            out.push((at, Token::Ident(src[chars[start].0..end].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((at, Token::Sym(c)));
            k += 1;
        } else if c == '−' {
            out.push((at, Token::Sym('-')));
            k += 1;
        } else {
            return Err(ExprError {
                position: at,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(usize, &Token)> {
        self.tokens.get(self.pos).map(|(at, t)| (*at, t))
    }

    fn eat(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some((_, Token::Sym(s))) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, message: &str) -> ExprError {
        ExprError {
            position: self.peek().map_or(self.end, |(at, _)| at),
            message: message.to_string(),
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    // `-a^b` is `-(a^b)`; `^` is right-associative
    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some((at, tok)) = self.peek() else {
            return Err(self.error("unexpected end of expression"));
        };
        let tok = tok.clone();
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Expr::Num(v)),
            Token::Sym('(') => {
                let e = self.sum()?;
                if !self.eat(')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Token::Ident(name) => match name.as_str() {
                "z" => Ok(Expr::Var),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "e" => Ok(Expr::Num(std::f64::consts::E)),
                "sin" | "cos" | "exp" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        _ => Func::Exp,
                    };
                    if !self.eat('(') {
                        return Err(self.error(&format!("expected `(` after `{name}`")));
                    }
                    let arg = self.sum()?;
                    if !self.eat(')') {
                        return Err(self.error("expected `)`"));
                    }
                    Ok(Expr::Call(f, Box::new(arg)))
                }
                _ => Err(ExprError {
                    position: at,
                    message: format!("unknown name `{name}`"),
                }),
            },
            other => Err(ExprError {
                position: at,
                message: format!("unexpected {other}"),
            }),
        }
    }
}
