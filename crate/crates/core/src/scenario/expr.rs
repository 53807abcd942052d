//! Small arithmetic expression language for space- and time-dependent data.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("+" | "-") unary | power
//! power  := atom ("^" unary)?
//! atom   := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Variables are `x`, `y` and `t`; `pi` and `e` are built in, and further
//! named constants can be supplied when compiling. Functions: `sin`, `cos`,
//! `tan`, `tanh`, `exp`, `ln`, `sqrt`, `abs`, `floor`, `step` (1 for a
//! nonnegative argument, else 0), `min`, `max` and `clamp(v, lo, hi)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Tanh,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Floor,
    Step,
    Min,
    Max,
    Clamp,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "tanh" => (Func::Tanh, 1),
            "exp" => (Func::Exp, 1),
            "ln" => (Func::Ln, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "floor" => (Func::Floor, 1),
            "step" => (Func::Step, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            "clamp" => (Func::Clamp, 3),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A compiled expression in `x`, `y`, `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    /// Parses `src` with only the built-in constants.
    pub fn parse(src: &str) -> Result<Self> {
        Self::compile(src, &[])
    }

    /// Parses `src`, resolving the given named constants.
    pub fn compile(src: &str, constants: &[(&str, f64)]) -> Result<Self> {
        let mut p = Parser {
            src,
            chars: src.char_indices().collect(),
            pos: 0,
            constants,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.chars.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Expr {
            source: src.to_string(),
            root,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        eval(&self.root, &[x, y, t])
    }

    /// Whether the expression does not depend on `t`.
    pub fn is_steady(&self) -> bool {
        !uses_var(&self.root, 2)
    }
}

fn uses_var(n: &Node, k: usize) -> bool {
    match n {
        Node::Num(_) => false,
        Node::Var(j) => *j == k,
        Node::Neg(a) => uses_var(a, k),
        Node::Bin(_, a, b) => uses_var(a, k) || uses_var(b, k),
        Node::Call(_, args) => args.iter().any(|a| uses_var(a, k)),
    }
}

fn eval(n: &Node, vars: &[f64; 3]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(k) => vars[*k],
        Node::Neg(a) => -eval(a, vars),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, vars), eval(b, vars));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(f, args) => {
            let a = eval(&args[0], vars);
            match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Tan => a.tan(),
                Func::Tanh => a.tanh(),
                Func::Exp => a.exp(),
                Func::Ln => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Floor => a.floor(),
                Func::Step => {
                    if a >= 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                }
                Func::Min => a.min(eval(&args[1], vars)),
                Func::Max => a.max(eval(&args[1], vars)),
                Func::Clamp => a.max(eval(&args[1], vars)).min(eval(&args[2], vars)),
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<(usize, char)>,
    pos: usize,
    constants: &'a [(&'a str, f64)],
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse {
            line: 1,
            column: self.pos + 1,
            message: format!("{msg} in expression '{}'", self.src),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            return Ok(Node::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.error("unexpected end")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.name(),
            Some(c) => Err(self.error(&format!("unexpected character '{c}'"))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let at = |p: &Self, k: usize| p.chars.get(k).map(|c| c.1);
        while matches!(at(self, self.pos), Some(c) if c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(at(self, self.pos), Some('e' | 'E')) {
            let mut k = self.pos + 1;
            if matches!(at(self, k), Some('+' | '-')) {
                k += 1;
            }
            if matches!(at(self, k), Some(c) if c.is_ascii_digit()) {
                self.pos = k;
                while matches!(at(self, self.pos), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        text.parse().map(Node::Num).map_err(|_| {
            self.pos = start;
            self.error(&format!("malformed number '{text}'"))
        })
    }

    fn name(&mut self) -> Result<Node> {
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some((_, c)) if c.is_ascii_alphanumeric() || *c == '_') {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        if self.peek() == Some('(') {
            let Some((f, arity)) = Func::lookup(&name) else {
                self.pos = start;
                return Err(self.error(&format!("unknown function '{name}'")));
            };
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(',') {
                args.push(self.expr()?);
            }
            if !self.eat(')') {
                return Err(self.error("expected ')' after arguments"));
            }
            if args.len() != arity {
                self.pos = start;
                return Err(self.error(&format!("'{name}' takes {arity} argument(s), got {}", args.len())));
            }
            return Ok(Node::Call(f, args));
        }
        Ok(match name.as_str() {
            "x" => Node::Var(0),
            "y" => Node::Var(1),
            "t" => Node::Var(2),
            "pi" => Node::Num(std::f64::consts::PI),
            "e" => Node::Num(std::f64::consts::E),
            other => match self.constants.iter().find(|(n, _)| *n == other) {
                Some((_, v)) => Node::Num(*v),
                None => {
                    self.pos = start;
                    return Err(self.error(&format!("unknown name '{other}'")));
                }
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> f64 {
        Expr::parse(s).unwrap().eval(0.5, 2.0, 0.25)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3"), 7.0);
        assert_eq!(ev("(1 + 2) * 3"), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2"), 512.0);
        assert_eq!(ev("-2 ^ 2"), -4.0);
        assert_eq!(ev("8 / 4 / 2"), 1.0);
        assert_eq!(ev("1e-3 * 2E2"), 0.2);
    }

    #[test]
    fn variables_and_functions() {
        assert_eq!(ev("x + y + t"), 2.75);
        assert!((ev("sin(pi / 2)") - 1.0).abs() < 1e-15);
        assert_eq!(ev("max(x, y)"), 2.0);
        assert_eq!(ev("clamp(5, 0, 1)"), 1.0);
        assert_eq!(ev("step(-x) + step(0)"), 1.0);
        let c = Expr::compile("theta_c - 10", &[("theta_c", 273.15)]).unwrap();
        assert!((c.eval(0.0, 0.0, 0.0) - 263.15).abs() < 1e-12);
        assert!(c.is_steady());
        assert!(!Expr::parse("sin(t)").unwrap().is_steady());
    }

    #[test]
    fn errors_carry_columns() {
        for (src, col) in [("1 + ", 5), ("foo(1)", 1), ("2 * bar", 5), ("(1", 3), ("1 2", 3), ("min(1)", 1)] {
            match Expr::parse(src) {
                Err(Error::Parse { column, .. }) => assert_eq!(column, col, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
