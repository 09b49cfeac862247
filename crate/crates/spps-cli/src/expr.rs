//! Parser and evaluator for the one-variable expression language used in
//! config files (`potential = -12*sech(x)^2` and friends).
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?          // right-associative
//! atom   := number | 'x' | 'pi' | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! so `^` binds tighter than unary minus (`-x^2` is `-(x^2)`) and the
//! exponent may itself be signed (`x^-2`). `log` is the natural logarithm.

use std::fmt;

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
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Sech,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Abs => "abs",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Log => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Sech => v.cosh().recip(),
            Func::Abs => v.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Pi,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Fun(Func, Box<Expr>),
}

/// Parse failure, pointing at the byte offset inside the expression text.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprError {
    pub message: String,
    pub offset: usize,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at byte {}", self.message, self.offset)
    }
}

impl std::error::Error for ExprError {}

fn err<T>(message: impl Into<String>, offset: usize) -> Result<T, ExprError> {
    Err(ExprError {
        message: message.into(),
        offset,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let Some(c) = self.peek() else {
            return err("expected a value, found end of input", self.pos);
        };
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(b')') {
                return err("expected `)`", self.pos);
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            return self.identifier();
        }
        err(format!("unexpected character `{}`", c as char), self.pos)
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            if !self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                return err("expected a digit after the decimal point", self.pos);
            }
            while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                self.pos += 1;
            }
        }
        // `2e3` is a number; `2exp(x)` is the number 2 followed by a name, so
        // only consume the `e` when an exponent actually follows it.
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mut probe = self.pos + 1;
            if matches!(self.src.get(probe), Some(b'+' | b'-')) {
                probe += 1;
            }
            if self.src.get(probe).is_some_and(u8::is_ascii_digit) {
                self.pos = probe;
                while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: f64 = match text.parse() {
            Ok(v) => v,
            Err(_) => return err(format!("invalid number `{text}`"), start),
        };
        if !value.is_finite() {
            return err(format!("number `{text}` overflows"), start);
        }
        Ok(Expr::Num(value))
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "x" => Ok(Expr::X),
            "pi" => Ok(Expr::Pi),
            _ => {
                let Some(f) = Func::from_name(name) else {
                    return err(format!("unknown identifier `{name}`"), start);
                };
                if !self.eat(b'(') {
                    return err(format!("expected `(` after `{name}`"), self.pos);
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return err("expected `)`", self.pos);
                }
                Ok(Expr::Fun(f, Box::new(arg)))
            }
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        if let Some(c) = p.peek() {
            return err(format!("unexpected character `{}`", c as char), p.pos);
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(x), r.eval(x));
                match op {
                    Op::Add => l + r,
                    Op::Sub => l - r,
                    Op::Mul => l * r,
                    Op::Div => l / r,
                    Op::Pow => l.powf(r),
                }
            }
            Expr::Fun(f, e) => f.apply(e.eval(x)),
        }
    }

    /// Binding strength used by the printer; parens are inserted whenever a
    /// child binds looser than its context requires.
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(Op::Add | Op::Sub, ..) => 1,
            Expr::Bin(Op::Mul | Op::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(Op::Pow, ..) => 4,
            Expr::Num(_) | Expr::X | Expr::Pi | Expr::Fun(..) => 5,
        }
    }

    fn write(&self, out: &mut String, min_prec: u8) {
        let paren = self.prec() < min_prec;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Num(v) => out.push_str(&format!("{v}")),
            Expr::X => out.push('x'),
            Expr::Pi => out.push_str("pi"),
            Expr::Neg(e) => {
                out.push('-');
                e.write(out, 3);
            }
            Expr::Bin(op, l, r) => {
                // The right operand needs one notch more than the left so a
                // same-precedence right child keeps its parens (`a-(b-c)`),
                // except `^` where the tree is right-leaning to begin with.
                let (sym, lp, rp) = match op {
                    Op::Add => ("+", 1, 2),
                    Op::Sub => ("-", 1, 2),
                    Op::Mul => ("*", 2, 3),
                    Op::Div => ("/", 2, 3),
                    Op::Pow => ("^", 5, 3),
                };
                l.write(out, lp);
                out.push_str(sym);
                r.write(out, rp);
            }
            Expr::Fun(f, e) => {
                out.push_str(f.name());
                out.push('(');
                e.write(out, 0);
                out.push(')');
            }
        }
        if paren {
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0);
        f.write_str(&s)
    }
}
