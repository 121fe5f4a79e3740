//! A minimal complex arithmetic grammar for declaring symbols and sampled
//! functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number ['i'] | 'i' | 'pi' | 'e' | variable | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables: `x_k`, `xi_k` (1-based axes), `abs_xi` (|ξ|), `ang_xi`
//! (atan2(ξ₂, ξ₁)), `smoothed_xi` (⟨ξ⟩ = (1+|ξ|²)^½) and `t` (scalar argument
//! of sampled functions).

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Xi(usize),
    AbsXi,
    AngXi,
    SmoothedXi,
    T,
}

impl Var {
    fn is_spatial(self) -> bool {
        matches!(self, Var::X(_))
    }

    fn is_frequency(self) -> bool {
        matches!(self, Var::Xi(_) | Var::AbsXi | Var::AngXi | Var::SmoothedXi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
    Re,
    Im,
    Conj,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "re" => Func::Re,
            "im" => Func::Im,
            "conj" => Func::Conj,
            _ => return None,
        })
    }

    fn apply(self, z: Complex64) -> Complex64 {
        // Real arguments stay on the real branch so that e.g. cos(x) has an
        // exactly zero imaginary part.
        let real = z.im == 0.0;
        match self {
            Func::Sin if real => z.re.sin().into(),
            Func::Cos if real => z.re.cos().into(),
            Func::Tan if real => z.re.tan().into(),
            Func::Exp if real => z.re.exp().into(),
            Func::Log if real && z.re > 0.0 => z.re.ln().into(),
            Func::Sqrt if real && z.re >= 0.0 => z.re.sqrt().into(),
            Func::Sinh if real => z.re.sinh().into(),
            Func::Cosh if real => z.re.cosh().into(),
            Func::Tanh if real => z.re.tanh().into(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => z.tan(),
            Func::Exp => z.exp(),
            Func::Log => z.ln(),
            Func::Sqrt => z.sqrt(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
            Func::Abs => z.norm().into(),
            Func::Re => z.re.into(),
            Func::Im => z.im.into(),
            Func::Conj => z.conj(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Values bound to the grammar's variables for one evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Env<'a> {
    pub x: &'a [f64],
    pub xi: &'a [f64],
    pub abs_xi: f64,
    pub smoothed_xi: f64,
    /// `|ξ|²` as summed, so even powers of `abs_xi` and `smoothed_xi` stay
    /// exact on integer lattices.
    pub abs_xi_sq: f64,
    pub t: f64,
}

impl<'a> Env<'a> {
    pub fn new(x: &'a [f64], xi: &'a [f64]) -> Self {
        let sq: f64 = xi.iter().map(|v| v * v).sum();
        Env {
            x,
            xi,
            abs_xi: sq.sqrt(),
            smoothed_xi: (1.0 + sq).sqrt(),
            abs_xi_sq: sq,
            t: f64::NAN,
        }
    }

    /// Environment for a homogeneous amplitude: `xi` is a unit covector, so
    /// `abs_xi` is pinned to 1 and `smoothed_xi` is meaningless.
    pub fn direction(x: &'a [f64], omega: &'a [f64]) -> Self {
        Env {
            x,
            xi: omega,
            abs_xi: 1.0,
            smoothed_xi: f64::NAN,
            abs_xi_sq: 1.0,
            t: f64::NAN,
        }
    }

    pub fn scalar(t: f64) -> Env<'static> {
        Env {
            x: &[],
            xi: &[],
            abs_xi: f64::NAN,
            smoothed_xi: f64::NAN,
            abs_xi_sq: f64::NAN,
            t,
        }
    }
}

fn cpow(base: Complex64, exp: Complex64) -> Complex64 {
    if exp.im == 0.0 {
        let e = exp.re;
        if e.fract() == 0.0 && e.abs() <= 64.0 {
            return base.powi(e as i32);
        }
        if base.im == 0.0 && base.re >= 0.0 {
            return base.re.powf(e).into();
        }
        return base.powf(e);
    }
    base.powc(exp)
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn constant(v: impl Into<Complex64>) -> Expr {
        Expr::Const(v.into())
    }

    pub fn eval(&self, env: &Env<'_>) -> Complex64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => Complex64::new(
                match *v {
                    Var::X(k) => env.x.get(k).copied().unwrap_or(f64::NAN),
                    Var::Xi(k) => env.xi.get(k).copied().unwrap_or(f64::NAN),
                    Var::AbsXi => env.abs_xi,
                    Var::AngXi => {
                        let a = env.xi.first().copied().unwrap_or(0.0);
                        let b = env.xi.get(1).copied().unwrap_or(0.0);
                        b.atan2(a)
                    }
                    Var::SmoothedXi => env.smoothed_xi,
                    Var::T => env.t,
                },
                0.0,
            ),
            Expr::Neg(a) => -a.eval(env),
            Expr::Add(a, b) => a.eval(env) + b.eval(env),
            Expr::Sub(a, b) => a.eval(env) - b.eval(env),
            Expr::Mul(a, b) => a.eval(env) * b.eval(env),
            Expr::Div(a, b) => a.eval(env) / b.eval(env),
            Expr::Pow(a, b) => {
                if let (Expr::Var(v @ (Var::AbsXi | Var::SmoothedXi)), Expr::Const(e)) = (&**a, &**b) {
                    let half = e.re / 2.0;
                    if e.im == 0.0 && half.fract() == 0.0 && half.abs() <= 32.0 {
                        let sq = if *v == Var::AbsXi { env.abs_xi_sq } else { 1.0 + env.abs_xi_sq };
                        return Complex64::new(sq.powi(half as i32), 0.0);
                    }
                }
                cpow(a.eval(env), b.eval(env))
            }
            Expr::Call(f, a) => f.apply(a.eval(env)),
        }
    }

    pub fn eval_real(&self, env: &Env<'_>) -> f64 {
        self.eval(env).re
    }

    fn any_var(&self, pred: &dyn Fn(Var) -> bool) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => pred(*v),
            Expr::Neg(a) | Expr::Call(_, a) => a.any_var(pred),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.any_var(pred) || b.any_var(pred),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        self.any_var(&|v| v.is_spatial())
    }

    pub fn depends_on_xi(&self) -> bool {
        self.any_var(&|v| v.is_frequency())
    }

    pub fn uses(&self, var: Var) -> bool {
        self.any_var(&|v| v == var)
    }

    /// Largest 1-based axis index referenced by `x_k` or `xi_k`, or 0.
    pub fn max_axis(&self) -> usize {
        fn walk(e: &Expr, acc: &mut usize) {
            match e {
                Expr::Const(_) => {}
                Expr::Var(Var::X(k)) | Expr::Var(Var::Xi(k)) => *acc = (*acc).max(k + 1),
                Expr::Var(Var::AngXi) => *acc = (*acc).max(2),
                Expr::Var(_) => {}
                Expr::Neg(a) | Expr::Call(_, a) => walk(a, acc),
                Expr::Add(a, b)
                | Expr::Sub(a, b)
                | Expr::Mul(a, b)
                | Expr::Div(a, b)
                | Expr::Pow(a, b) => {
                    walk(a, acc);
                    walk(b, acc);
                }
            }
        }
        let mut acc = 0;
        walk(self, &mut acc);
        acc
    }

    /// Splits a product into `(c(x), b(ξ))` when every multiplicative factor
    /// depends on at most one of the two variable groups.
    pub fn split_separable(&self) -> Option<(Expr, Expr)> {
        let mut factors = Vec::new();
        collect_factors(self, &mut factors);
        let mut coeff = Vec::new();
        let mut freq = Vec::new();
        for f in factors {
            match (f.depends_on_x(), f.depends_on_xi()) {
                (true, true) => return None,
                (false, true) => freq.push(f),
                _ => coeff.push(f),
            }
        }
        Some((product(coeff), product(freq)))
    }
}

fn collect_factors(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Mul(a, b) => {
            collect_factors(a, out);
            collect_factors(b, out);
        }
        Expr::Neg(a) => {
            out.push(Expr::constant(-1.0));
            collect_factors(a, out);
        }
        Expr::Div(a, b) => {
            collect_factors(a, out);
            out.push(Expr::Div(Box::new(Expr::constant(1.0)), b.clone()));
        }
        other => out.push(other.clone()),
    }
}

fn product(mut factors: Vec<Expr>) -> Expr {
    match factors.len() {
        0 => Expr::constant(1.0),
        1 => factors.pop().unwrap(),
        _ => {
            let mut it = factors.into_iter();
            let first = it.next().unwrap();
            it.fold(first, |acc, f| Expr::Mul(Box::new(acc), Box::new(f)))
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse {
            position: self.pos,
            message: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < s.len() && (s[self.pos] == b'+' || s[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < s.len() && s[self.pos].is_ascii_digit() {
                while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        let v: f64 = text.parse().map_err(|_| Error::Parse {
            position: start,
            message: format!("bad number '{text}'"),
        })?;
        let imaginary = self.pos < s.len()
            && s[self.pos] == b'i'
            && !s
                .get(self.pos + 1)
                .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_');
        if imaginary {
            self.pos += 1;
            return Ok(Expr::constant(Complex64::new(0.0, v)));
        }
        Ok(Expr::constant(v))
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(f) = Func::from_name(name) {
            if !self.eat(b'(') {
                return Err(self.err("expected '(' after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        let axis = |prefix: &str| -> Option<usize> {
            name.strip_prefix(prefix)
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(|k| k - 1)
        };
        let e = match name {
            "i" => Expr::constant(Complex64::i()),
            "pi" => Expr::constant(std::f64::consts::PI),
            "e" => Expr::constant(std::f64::consts::E),
            "abs_xi" => Expr::Var(Var::AbsXi),
            "ang_xi" => Expr::Var(Var::AngXi),
            "smoothed_xi" => Expr::Var(Var::SmoothedXi),
            "t" => Expr::Var(Var::T),
            _ => {
                if let Some(k) = axis("xi_") {
                    Expr::Var(Var::Xi(k))
                } else if let Some(k) = axis("x_") {
                    Expr::Var(Var::X(k))
                } else {
                    return Err(Error::Parse {
                        position: start,
                        message: format!("unknown identifier '{name}'"),
                    });
                }
            }
        };
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: &[f64], xi: &[f64]) -> Complex64 {
        Expr::parse(src).unwrap().eval(&Env::new(x, xi))
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(ev("1 + 2*3", &[], &[]).re, 7.0);
        assert_eq!(ev("2^3^2", &[], &[]).re, 512.0);
        assert_eq!(ev("-2^2", &[], &[]).re, -4.0);
        assert_eq!(ev("(1+2)/4", &[], &[]).re, 0.75);
        assert_eq!(ev("1e-3*1E3", &[], &[]).re, 1.0);
    }

    #[test]
    fn complex_constants() {
        assert_eq!(ev("2i", &[], &[]), Complex64::new(0.0, 2.0));
        assert_eq!(ev("i*i", &[], &[]), Complex64::new(-1.0, 0.0));
        assert_eq!(ev("-1+0i", &[], &[]), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn variables() {
        assert_eq!(ev("abs_xi^2", &[], &[3.0, 4.0]).re, 25.0);
        assert_eq!(ev("smoothed_xi^2", &[], &[3.0, 4.0]).re, 26.0);
        assert_eq!(ev("xi_2 - x_1", &[0.5], &[3.0, 4.0]).re, 3.5);
        let a = ev("ang_xi", &[], &[0.0, 1.0]).re;
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let env = Env::scalar(4.0);
        assert_eq!(Expr::parse("sqrt(t)").unwrap().eval(&env).re, 2.0);
    }

    #[test]
    fn real_branch_has_zero_imaginary_part() {
        let z = ev("cos(x_1) + exp(x_1) + log(x_1)", &[1.3], &[]);
        assert_eq!(z.im, 0.0);
    }

    #[test]
    fn parse_errors_report_position() {
        match Expr::parse("1 + foo") {
            Err(Error::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Expr::parse("(1+2").is_err());
        assert!(Expr::parse("1 2").is_err());
        assert!(Expr::parse("x_0").is_err());
        assert!(Expr::parse("sin 3").is_err());
    }

    #[test]
    fn dependence_and_axes() {
        let e = Expr::parse("(2+cos(x_1))*abs_xi").unwrap();
        assert!(e.depends_on_x() && e.depends_on_xi());
        assert_eq!(e.max_axis(), 1);
        assert_eq!(Expr::parse("xi_3").unwrap().max_axis(), 3);
    }

    #[test]
    fn separable_split() {
        let e = Expr::parse("-(2+cos(x_1))*abs_xi/2").unwrap();
        let (c, b) = e.split_separable().unwrap();
        assert!(!c.depends_on_xi() && !b.depends_on_x());
        let x = [0.3];
        let xi = [0.0, 2.0];
        let env = Env::new(&x, &xi);
        let full = e.eval(&env);
        let split = c.eval(&env) * b.eval(&env);
        assert!((full - split).norm() < 1e-15);
        assert!(Expr::parse("cos(x_1*xi_1)").unwrap().split_separable().is_none());
    }
}
