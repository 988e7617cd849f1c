//! A small arithmetic grammar for closed-form functions in configuration
//! files: numbers, `pi`, the variables `x` and `u`, `+ - * / ^`, unary minus,
//! parentheses and `sin`, `cos`, `exp`, `ln`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expr(format!("trailing input in '{src}'")));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, u: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::U) => u,
            Expr::Neg(a) => -a.eval(x, u),
            Expr::Add(a, b) => a.eval(x, u) + b.eval(x, u),
            Expr::Sub(a, b) => a.eval(x, u) - b.eval(x, u),
            Expr::Mul(a, b) => a.eval(x, u) * b.eval(x, u),
            Expr::Div(a, b) => a.eval(x, u) / b.eval(x, u),
            Expr::Pow(a, b) => match b.as_ref() {
                Expr::Num(p) if p.fract() == 0.0 && p.abs() < 64.0 => a.eval(x, u).powi(*p as i32),
                _ => a.eval(x, u).powf(b.eval(x, u)),
            },
            Expr::Call(f, a) => {
                let v = a.eval(x, u);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Ln => v.ln(),
                }
            }
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(v) => *v == var,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(var),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on(var) || b.depends_on(var)
            }
        }
    }

    /// Symbolic derivative with respect to `var`.
    pub fn derivative(&self, var: Var) -> Expr {
        use Expr::*;
        let b = Box::new;
        match self {
            Num(_) => Num(0.0),
            Var(v) => Num(if *v == var { 1.0 } else { 0.0 }),
            Neg(a) => Neg(b(a.derivative(var))),
            Add(l, r) => Add(b(l.derivative(var)), b(r.derivative(var))),
            Sub(l, r) => Sub(b(l.derivative(var)), b(r.derivative(var))),
            Mul(l, r) => Add(
                b(Mul(b(l.derivative(var)), r.clone())),
                b(Mul(l.clone(), b(r.derivative(var)))),
            ),
            Div(l, r) => Div(
                b(Sub(
                    b(Mul(b(l.derivative(var)), r.clone())),
                    b(Mul(l.clone(), b(r.derivative(var)))),
                )),
                b(Pow(r.clone(), b(Num(2.0)))),
            ),
            Pow(base, exp) if !exp.depends_on(var) => Mul(
                b(Mul(exp.clone(), b(Pow(base.clone(), b(Sub(exp.clone(), b(Num(1.0)))))))),
                b(base.derivative(var)),
            ),
            // d(a^b) = a^b (b' ln a + b a'/a)
            Pow(base, exp) => Mul(
                b(self.clone()),
                b(Add(
                    b(Mul(b(exp.derivative(var)), b(Call(Func::Ln, base.clone())))),
                    b(Div(b(Mul(exp.clone(), b(base.derivative(var)))), base.clone())),
                )),
            ),
            Call(Func::Sin, a) => Mul(b(Call(Func::Cos, a.clone())), b(a.derivative(var))),
            Call(Func::Cos, a) => Neg(b(Mul(b(Call(Func::Sin, a.clone())), b(a.derivative(var))))),
            Call(Func::Exp, a) => Mul(b(self.clone()), b(a.derivative(var))),
            Call(Func::Ln, a) => Div(b(a.derivative(var)), a.clone()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::U) => write!(f, "u"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Ln => "ln",
                };
                write!(f, "{name}({a})")
            }
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
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Expr(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Tok::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Tok::RParen);
            i += 1;
        } else {
            return Err(Error::Expr(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                Expr::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                Expr::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Expr::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if let Some(Tok::Op('+')) = self.peek() {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right associative)
    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(e),
                    _ => Err(Error::Expr("missing ')'".into())),
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "x" => Ok(Expr::Var(Var::X)),
                "u" => Ok(Expr::Var(Var::U)),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                "sin" | "cos" | "exp" | "ln" => {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        _ => Func::Ln,
                    };
                    match self.next() {
                        Some(Tok::LParen) => {}
                        _ => return Err(Error::Expr(format!("expected '(' after {name}"))),
                    }
                    let arg = self.expr()?;
                    match self.next() {
                        Some(Tok::RParen) => Ok(Expr::Call(func, Box::new(arg))),
                        _ => Err(Error::Expr("missing ')'".into())),
                    }
                }
                other => Err(Error::Expr(format!("unknown identifier '{other}'"))),
            },
            Some(t) => Err(Error::Expr(format!("unexpected token {t:?}"))),
            None => Err(Error::Expr("unexpected end of expression".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        let e = Expr::parse("2 + 0.5*cos(x) - u^2").unwrap();
        assert!((e.eval(0.0, 3.0) - (2.0 + 0.5 - 9.0)).abs() < 1e-15);
        let e = Expr::parse("-2^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0), -4.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0), 512.0);
        let e = Expr::parse("1e-1 * exp(0) + pi").unwrap();
        assert!((e.eval(0.0, 0.0) - (0.1 + std::f64::consts::PI)).abs() < 1e-15);
        assert!(Expr::parse("sin x").is_err());
        assert!(Expr::parse("foo").is_err());
        assert!(Expr::parse("(1+2").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for src in ["u^2", "u^3 + 3*u", "exp(u) - sin(u)*u", "1/(1+u^2)", "u^2 + cos(x)*u", "u^u", "ln(u^2 + 1)"] {
            let e = Expr::parse(src).unwrap();
            let d = e.derivative(Var::U);
            for &u in &[0.6, 1.7] {
                let h = 1e-6;
                let fd = (e.eval(0.4, u + h) - e.eval(0.4, u - h)) / (2.0 * h);
                assert!((fd - d.eval(0.4, u)).abs() < 1e-7, "{src} at {u}");
            }
        }
    }
}
