//! Rational expressions in `z_k` and `z̄_k`, differentiated with the
//! Wirtinger rules (`z_k` and `z̄_k` treated as independent variables).
//!
//! [`Expr::jet2`] runs forward-mode differentiation and returns the value,
//! both families of first derivatives and the mixed second derivatives
//! `∂²/∂z_i∂z̄_j`. [`Expr::fd_jet2`] recomputes the same quantities from
//! central differences in the real and imaginary parts of each coordinate
//! and serves as an independent check.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{C64, ONE, ZERO};

/// Denominators (and negative-power bases) smaller than this in modulus are
/// treated as poles.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// Expression tree. Variable indices are zero-based internally and printed
/// one-based (`z1`, `zb1`, ...).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    ImagUnit,
    Const(C64),
    Var(usize),
    ConjVar(usize),
    Param { name: String, value: f64 },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

/// Value and derivatives of an expression at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: C64,
    /// `∂/∂z_i`.
    pub d1_hol: Vec<C64>,
    /// `∂/∂z̄_j`.
    pub d1_anti: Vec<C64>,
    /// `d2_mixed[i][j] = ∂²/∂z_i∂z̄_j`.
    pub d2_mixed: Vec<Vec<C64>>,
}

impl Jet2 {
    pub fn constant(n: usize, value: C64) -> Self {
        Self {
            value,
            d1_hol: vec![ZERO; n],
            d1_anti: vec![ZERO; n],
            d2_mixed: vec![vec![ZERO; n]; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.d1_hol.len()
    }

    /// Jet of the complex conjugate function.
    pub fn conjugate(&self) -> Self {
        let n = self.dim();
        Self {
            value: self.value.conj(),
            d1_hol: self.d1_anti.iter().map(|z| z.conj()).collect(),
            d1_anti: self.d1_hol.iter().map(|z| z.conj()).collect(),
            d2_mixed: (0..n)
                .map(|i| (0..n).map(|j| self.d2_mixed[j][i].conj()).collect())
                .collect(),
        }
    }

    fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    fn zip(&self, o: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            value: f(self.value, o.value),
            d1_hol: self.d1_hol.iter().zip(&o.d1_hol).map(|(a, b)| f(*a, *b)).collect(),
            d1_anti: self.d1_anti.iter().zip(&o.d1_anti).map(|(a, b)| f(*a, *b)).collect(),
            d2_mixed: self
                .d2_mixed
                .iter()
                .zip(&o.d2_mixed)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| f(*a, *b)).collect())
                .collect(),
        }
    }

    fn neg(&self) -> Self {
        self.zip(self, |a, _| -a)
    }

    fn mul(&self, o: &Self) -> Self {
        let n = self.dim();
        let (a, b) = (self, o);
        Self {
            value: a.value * b.value,
            d1_hol: (0..n).map(|i| a.d1_hol[i] * b.value + a.value * b.d1_hol[i]).collect(),
            d1_anti: (0..n).map(|i| a.d1_anti[i] * b.value + a.value * b.d1_anti[i]).collect(),
            d2_mixed: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            a.d2_mixed[i][j] * b.value
                                + a.d1_hol[i] * b.d1_anti[j]
                                + a.d1_anti[j] * b.d1_hol[i]
                                + a.value * b.d2_mixed[i][j]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `φ ∘ self` for a holomorphic scalar function with `φ(v)`, `φ'(v)`, `φ''(v)` given.
    fn compose(&self, phi: C64, dphi: C64, ddphi: C64) -> Self {
        let n = self.dim();
        Self {
            value: phi,
            d1_hol: self.d1_hol.iter().map(|d| dphi * d).collect(),
            d1_anti: self.d1_anti.iter().map(|d| dphi * d).collect(),
            d2_mixed: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| dphi * self.d2_mixed[i][j] + ddphi * self.d1_hol[i] * self.d1_anti[j])
                        .collect()
                })
                .collect(),
        }
    }

    fn recip(&self) -> Self {
        let v = self.value;
        let r = ONE / v;
        self.compose(r, -r * r, 2.0 * r * r * r)
    }

    fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::constant(self.dim(), ONE);
        }
        let v = self.value;
        let kf = k as f64;
        let phi = v.powi(k);
        let dphi = if k == 1 { ONE } else { kf * v.powi(k - 1) };
        let ddphi = match k {
            1 => ZERO,
            2 => C64::new(2.0, 0.0),
            _ => kf * (kf - 1.0) * v.powi(k - 2),
        };
        self.compose(phi, dphi, ddphi)
    }

    /// Largest deviation between two jets over all components.
    pub fn max_diff(&self, o: &Self) -> f64 {
        let mut worst = (self.value - o.value).norm();
        for i in 0..self.dim() {
            worst = worst
                .max((self.d1_hol[i] - o.d1_hol[i]).norm())
                .max((self.d1_anti[i] - o.d1_anti[i]).norm());
            for j in 0..self.dim() {
                worst = worst.max((self.d2_mixed[i][j] - o.d2_mixed[i][j]).norm());
            }
        }
        worst
    }

    pub fn max_d2_diff(&self, o: &Self) -> f64 {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (self.d2_mixed[i][j] - o.d2_mixed[i][j]).norm())
            .fold(0.0, f64::max)
    }
}

fn pole_error(e: &Expr) -> Error {
    Error::DivisionByZero(e.to_string())
}

impl Expr {
    pub fn num(x: f64) -> Self {
        Expr::Num(x)
    }

    pub fn z(k: usize) -> Self {
        Expr::Var(k)
    }

    pub fn zb(k: usize) -> Self {
        Expr::ConjVar(k)
    }

    /// `Σ_k z_k z̄_k`.
    pub fn normsq(n: usize) -> Self {
        let mut terms = (0..n).map(|k| Expr::Var(k) * Expr::ConjVar(k));
        let first = terms.next().unwrap_or(Expr::Num(0.0));
        terms.fold(first, |acc, t| acc + t)
    }

    pub fn powi(self, k: i32) -> Self {
        Expr::Pow(Box::new(self), k)
    }

    /// Parses `text` using the grammar documented on [`parse`].
    pub fn parse(text: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Self> {
        parse(text, n, params)
    }

    /// Largest variable index used plus one (0 for constants).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(k) | Expr::ConjVar(k) => k + 1,
            Expr::Num(_) | Expr::ImagUnit | Expr::Const(_) | Expr::Param { .. } => 0,
            Expr::Neg(a) | Expr::Pow(a, _) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
        }
    }

    /// True if no `z̄_k` appears anywhere in the tree.
    pub fn is_holomorphic(&self) -> bool {
        match self {
            Expr::ConjVar(_) => false,
            Expr::Num(_) | Expr::ImagUnit | Expr::Const(_) | Expr::Param { .. } | Expr::Var(_) => true,
            Expr::Neg(a) | Expr::Pow(a, _) => a.is_holomorphic(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_holomorphic() && b.is_holomorphic()
            }
        }
    }

    /// The expression for the complex conjugate function.
    pub fn conj(&self) -> Self {
        let b = |e: &Expr| Box::new(e.conj());
        match self {
            Expr::Num(x) => Expr::Num(*x),
            Expr::ImagUnit => Expr::Neg(Box::new(Expr::ImagUnit)),
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(k) => Expr::ConjVar(*k),
            Expr::ConjVar(k) => Expr::Var(*k),
            Expr::Param { name, value } => Expr::Param {
                name: name.clone(),
                value: *value,
            },
            Expr::Neg(a) => Expr::Neg(b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(a, k) => Expr::Pow(b(a), *k),
        }
    }

    /// Symbolic `∂/∂z_k` (or `∂/∂z̄_k` when `conjugate` is set). No simplification.
    pub fn derivative(&self, k: usize, conjugate: bool) -> Self {
        let zero = || Expr::Num(0.0);
        match self {
            Expr::Num(_) | Expr::ImagUnit | Expr::Const(_) | Expr::Param { .. } => zero(),
            Expr::Var(j) => Expr::Num(if !conjugate && *j == k { 1.0 } else { 0.0 }),
            Expr::ConjVar(j) => Expr::Num(if conjugate && *j == k { 1.0 } else { 0.0 }),
            Expr::Neg(a) => -a.derivative(k, conjugate),
            Expr::Add(a, b) => a.derivative(k, conjugate) + b.derivative(k, conjugate),
            Expr::Sub(a, b) => a.derivative(k, conjugate) - b.derivative(k, conjugate),
            Expr::Mul(a, b) => {
                a.derivative(k, conjugate) * (**b).clone() + (**a).clone() * b.derivative(k, conjugate)
            }
            Expr::Div(a, b) => {
                (a.derivative(k, conjugate) * (**b).clone() - (**a).clone() * b.derivative(k, conjugate))
                    / (**b).clone().powi(2)
            }
            Expr::Pow(a, p) => match p {
                0 => zero(),
                _ => Expr::Num(*p as f64) * (**a).clone().powi(p - 1) * a.derivative(k, conjugate),
            },
        }
    }

    /// Value at `p`.
    pub fn eval(&self, p: &[C64]) -> Result<C64> {
        Ok(match self {
            Expr::Num(x) => C64::new(*x, 0.0),
            Expr::ImagUnit => C64::new(0.0, 1.0),
            Expr::Const(c) => *c,
            Expr::Var(k) => p[*k],
            Expr::ConjVar(k) => p[*k].conj(),
            Expr::Param { value, .. } => C64::new(*value, 0.0),
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Expr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Expr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Expr::Div(a, b) => {
                let den = b.eval(p)?;
                if den.norm() <= POLE_TOLERANCE {
                    return Err(pole_error(b));
                }
                a.eval(p)? / den
            }
            Expr::Pow(a, k) => {
                let v = a.eval(p)?;
                if *k < 0 && v.norm() <= POLE_TOLERANCE {
                    return Err(pole_error(a));
                }
                if *k == 0 {
                    ONE
                } else {
                    v.powi(*k)
                }
            }
        })
    }

    /// Exact value, first derivatives and mixed second derivatives at `p`.
    pub fn jet2(&self, p: &[C64]) -> Result<Jet2> {
        let n = p.len();
        Ok(match self {
            Expr::Num(_) | Expr::ImagUnit | Expr::Const(_) | Expr::Param { .. } => {
                Jet2::constant(n, self.eval(p)?)
            }
            Expr::Var(k) => {
                let mut j = Jet2::constant(n, p[*k]);
                j.d1_hol[*k] = ONE;
                j
            }
            Expr::ConjVar(k) => {
                let mut j = Jet2::constant(n, p[*k].conj());
                j.d1_anti[*k] = ONE;
                j
            }
            Expr::Neg(a) => a.jet2(p)?.neg(),
            Expr::Add(a, b) => a.jet2(p)?.add(&b.jet2(p)?),
            Expr::Sub(a, b) => a.jet2(p)?.sub(&b.jet2(p)?),
            Expr::Mul(a, b) => a.jet2(p)?.mul(&b.jet2(p)?),
            Expr::Div(a, b) => {
                let den = b.jet2(p)?;
                if den.value.norm() <= POLE_TOLERANCE {
                    return Err(pole_error(b));
                }
                a.jet2(p)?.mul(&den.recip())
            }
            Expr::Pow(a, k) => {
                let base = a.jet2(p)?;
                if *k < 0 && base.value.norm() <= POLE_TOLERANCE {
                    return Err(pole_error(a));
                }
                base.powi(*k)
            }
        })
    }

    /// Central-difference approximation of [`Expr::jet2`], built only from
    /// values of the expression at displaced points.
    pub fn fd_jet2(&self, p: &[C64], step: f64) -> Result<Jet2> {
        if !(step > 0.0 && step <= 0.1) {
            return Err(Error::Invalid(format!("finite-difference step {step} outside (0, 0.1]")));
        }
        let n = p.len();
        // Real coordinate r in 0..2n: even = Re z_{r/2}, odd = Im z_{r/2}.
        let shifted = |moves: &[(usize, f64)]| -> Result<C64> {
            let mut q = p.to_vec();
            for &(r, h) in moves {
                let d = if r % 2 == 0 { C64::new(h, 0.0) } else { C64::new(0.0, h) };
                q[r / 2] += d;
            }
            self.eval(&q)
        };
        let f0 = self.eval(p)?;
        let h = step;
        let mut first = vec![ZERO; 2 * n];
        for (r, slot) in first.iter_mut().enumerate() {
            *slot = (shifted(&[(r, h)])? - shifted(&[(r, -h)])?) / (2.0 * h);
        }
        let mut second = vec![vec![ZERO; 2 * n]; 2 * n];
        for r in 0..2 * n {
            second[r][r] = (shifted(&[(r, h)])? - 2.0 * f0 + shifted(&[(r, -h)])?) / (h * h);
            for s in (r + 1)..2 * n {
                let v = (shifted(&[(r, h), (s, h)])? - shifted(&[(r, h), (s, -h)])?
                    - shifted(&[(r, -h), (s, h)])?
                    + shifted(&[(r, -h), (s, -h)])?)
                    / (4.0 * h * h);
                second[r][s] = v;
                second[s][r] = v;
            }
        }
        let i = C64::new(0.0, 1.0);
        let mut jet = Jet2::constant(n, f0);
        for k in 0..n {
            let (dx, dy) = (first[2 * k], first[2 * k + 1]);
            jet.d1_hol[k] = 0.5 * (dx - i * dy);
            jet.d1_anti[k] = 0.5 * (dx + i * dy);
        }
        // ∂_a ∂_{b̄} = ¼ (∂x_a - i∂y_a)(∂x_b + i∂y_b)
        for a in 0..n {
            for b in 0..n {
                let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
                jet.d2_mixed[a][b] = 0.25
                    * (second[xa][xb] + second[ya][yb] + i * (second[xa][yb] - second[ya][xb]));
            }
        }
        Ok(jet)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $variant:ident) => {
        impl std::ops::$tr for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}
binop!(Add, add, Add);
binop!(Sub, sub, Sub);
binop!(Mul, mul, Mul);
binop!(Div, div, Div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

// Printing. Precedence: 1 = sum, 2 = product, 3 = power operand.
impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(_) => 4,
            Expr::Num(x) if *x < 0.0 || x.is_sign_negative() => 4,
            Expr::Const(_) => 4,
            _ => 5,
        }
    }

    fn write_child(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if x.is_sign_negative() => write!(f, "(-{})", -x),
            Expr::Num(x) => write!(f, "{x}"),
            Expr::ImagUnit => write!(f, "i"),
            Expr::Const(c) => {
                let re = if c.re.is_sign_negative() { format!("-{}", -c.re) } else { format!("{}", c.re) };
                let sign = if c.im.is_sign_negative() { "-" } else { "+" };
                write!(f, "({re}{sign}{}*i)", c.im.abs())
            }
            Expr::Var(k) => write!(f, "z{}", k + 1),
            Expr::ConjVar(k) => write!(f, "zb{}", k + 1),
            Expr::Param { name, .. } => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "(-")?;
                a.write_child(f, 3)?;
                write!(f, ")")
            }
            Expr::Add(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " + ")?;
                b.write_child(f, 2)
            }
            Expr::Sub(a, b) => {
                a.write_child(f, 1)?;
                write!(f, " - ")?;
                b.write_child(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "*")?;
                b.write_child(f, 3)
            }
            Expr::Div(a, b) => {
                a.write_child(f, 2)?;
                write!(f, "/")?;
                b.write_child(f, 3)
            }
            Expr::Pow(a, k) => {
                a.write_child(f, 4)?;
                write!(f, "^{k}")
            }
        }
    }
}

/// Parses an expression in `n` complex variables.
///
/// ```text
/// expr   := term (('+' | '-') term)*
/// term   := factor (('*' | '/') factor)*
/// factor := '-' factor | base ('^' ['-'] integer)?
/// base   := number | 'i' | 'z'k | 'zb'k | param | 'normsq(z)' | '(' expr ')'
/// ```
///
/// `zb`k is `z̄_k` (one-based), `normsq(z)` expands to `Σ z_k z̄_k`, and
/// parameter names are replaced by their bound values.
pub fn parse(text: &str, n: usize, params: &BTreeMap<String, f64>) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        n,
        params,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
    params: &'a BTreeMap<String, f64>,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            position: self.pos,
            message: msg.into(),
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
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc + self.term()?;
            } else if self.eat(b'-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(b'*') {
                acc = acc * self.factor()?;
            } else if self.eat(b'/') {
                acc = acc / self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(-self.factor()?);
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let neg = self.eat(b'-');
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.error("expected integer exponent"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: i32 = digits.parse().map_err(|_| self.error("exponent too large"))?;
            return Ok(base.powi(if neg { -k } else { k }));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected character `{}`", c as char))),
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
            let digits = self.pos;
            while self.pos < s.len() && s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits == self.pos {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax {
                position: start,
                message: format!("malformed number `{text}`"),
            })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_alphanumeric() || s[self.pos] == b'_') {
            self.pos += 1;
        }
        let ident = std::str::from_utf8(&s[start..self.pos]).unwrap();
        if ident == "i" {
            return Ok(Expr::ImagUnit);
        }
        if ident == "normsq" {
            for expected in [b'(', b'z', b')'] {
                if !self.eat(expected) {
                    return Err(self.error("expected `normsq(z)`"));
                }
            }
            return Ok(Expr::normsq(self.n));
        }
        let var = |prefix: &str| {
            ident
                .strip_prefix(prefix)
                .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|rest| rest.parse::<usize>().ok())
        };
        let index = |k: usize| -> Result<usize> {
            if k == 0 || k > self.n {
                Err(Error::VariableOutOfRange { index: k, dim: self.n })
            } else {
                Ok(k - 1)
            }
        };
        if let Some(k) = var("zb") {
            return Ok(Expr::ConjVar(index(k)?));
        }
        if let Some(k) = var("z") {
            return Ok(Expr::Var(index(k)?));
        }
        match self.params.get(ident) {
            Some(&value) => Ok(Expr::Param {
                name: ident.to_string(),
                value,
            }),
            None => Err(Error::UnknownParameter(ident.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn no_params() -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn parses_basic_and_sugar() {
        let e = parse("1 + z1*zb1", 1, &no_params()).unwrap();
        assert_eq!(e, Expr::Num(1.0) + Expr::Var(0) * Expr::ConjVar(0));

        let e = parse("(1+normsq(z))", 2, &no_params()).unwrap();
        let expected = Expr::Num(1.0) + (Expr::Var(0) * Expr::ConjVar(0) + Expr::Var(1) * Expr::ConjVar(1));
        assert_eq!(e, expected);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            parse("z3", 2, &no_params()).unwrap_err(),
            Error::VariableOutOfRange { index: 3, dim: 2 }
        );
        assert_eq!(
            parse("eps*z1", 1, &no_params()).unwrap_err(),
            Error::UnknownParameter("eps".into())
        );
        match parse("1 + * z1", 1, &no_params()).unwrap_err() {
            Error::Syntax { position, .. } => assert_eq!(position, 4),
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("(1+z1", 1, &no_params()), Err(Error::Syntax { .. })));
    }

    #[test]
    fn print_parse_roundtrip() {
        let mut params = BTreeMap::new();
        params.insert("eps".to_string(), 0.3);
        for text in [
            "1 + z1*zb1",
            "(1+normsq(z)) + (eps-2)*zb1*z2",
            "1/(1+normsq(z)) - zb1*z2/(1+normsq(z))^2",
            "-z1^3 + 2.5e-3*i*zb2 - (z1-z2)/(2-z1*zb2)^-1",
        ] {
            let e = parse(text, 2, &params).unwrap();
            let printed = e.to_string();
            let again = parse(&printed, 2, &params).unwrap();
            assert_eq!(again.to_string(), printed, "{text}");
            let p = [c(0.1, 0.2), c(-0.3, 0.05)];
            assert!((again.eval(&p).unwrap() - e.eval(&p).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn jet_of_simple_metric_entry() {
        let e = parse("1 + z1*zb1", 1, &no_params()).unwrap();
        let j = e.jet2(&[ZERO]).unwrap();
        assert_eq!(j.value, ONE);
        assert_eq!(j.d1_hol[0], ZERO);
        assert_eq!(j.d1_anti[0], ZERO);
        assert_eq!(j.d2_mixed[0][0], ONE);
    }

    #[test]
    fn jet_of_example_2_2_entry() {
        let mut params = BTreeMap::new();
        params.insert("eps".to_string(), 0.3);
        let e = parse("(1+normsq(z)) + (eps-2)*zb1*z1", 2, &params).unwrap();
        let j = e.jet2(&[ZERO, ZERO]).unwrap();
        assert!((j.d2_mixed[0][0] - c(-0.7, 0.0)).norm() < 1e-15);
        assert!((j.d2_mixed[1][1] - ONE).norm() < 1e-15);
    }

    #[test]
    fn jet_matches_fd_for_fubini_study_entry() {
        let e = parse("1/(1+normsq(z)) - zb1*z2/(1+normsq(z))^2", 2, &no_params()).unwrap();
        let p = [c(0.2, 0.0), c(0.0, 0.1)];
        let exact = e.jet2(&p).unwrap();
        let fd = e.fd_jet2(&p, 1e-4).unwrap();
        assert!(exact.max_diff(&fd) <= 1e-6, "{}", exact.max_diff(&fd));
    }

    #[test]
    fn constant_fd_is_exactly_zero() {
        let e = parse("3 - 2*i", 2, &no_params()).unwrap();
        let fd = e.fd_jet2(&[c(0.4, 0.1), c(0.2, -0.3)], 1e-3).unwrap();
        assert_eq!(fd, Jet2::constant(2, c(3.0, -2.0)));
    }

    #[test]
    fn pole_is_reported() {
        let e = parse("1/(z1 - 0.25)", 1, &no_params()).unwrap();
        let err = e.fd_jet2(&[c(0.25 + 1e-4, 0.0)], 1e-4).unwrap_err();
        assert!(matches!(err, Error::DivisionByZero(ref s) if s.contains("z1")), "{err:?}");
        assert!(e.jet2(&[c(0.25, 0.0)]).is_err());
        assert!(parse("z1^-1", 1, &no_params()).unwrap().eval(&[ZERO]).is_err());
    }

    #[test]
    fn derivative_agrees_with_jet() {
        let e = parse("(z1^2*z2 - 3*z2)/(2 + z1*z2)", 2, &no_params()).unwrap();
        let p = [c(0.3, -0.2), c(0.1, 0.4)];
        let j = e.jet2(&p).unwrap();
        for k in 0..2 {
            let d = e.derivative(k, false).eval(&p).unwrap();
            assert!((d - j.d1_hol[k]).norm() < 1e-13);
        }
    }

    // Random polynomial expressions for property tests.
    fn arb_poly(n: usize) -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-2.0..2.0f64).prop_map(Expr::Num),
            (0..n).prop_map(Expr::Var),
            (0..n).prop_map(Expr::ConjVar),
            Just(Expr::ImagUnit),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
                (inner, 0..4i32).prop_map(|(a, k)| a.powi(k)),
            ]
        })
    }

    fn arb_point(n: usize) -> impl Strategy<Value = Vec<C64>> {
        proptest::collection::vec((-0.8..0.8f64, -0.8..0.8f64).prop_map(|(a, b)| c(a, b)), n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn mixed_second_derivatives_match_fd(e in arb_poly(2), p in arb_point(2)) {
            let exact = e.jet2(&p).unwrap();
            let fd = e.fd_jet2(&p, 1e-4).unwrap();
            let scale = 1.0 + exact.d2_mixed.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
                + exact.value.norm();
            prop_assert!(exact.max_d2_diff(&fd) <= 1e-5 * scale);
        }

        #[test]
        fn conjugation_duality_is_exact(e in arb_poly(2), p in arb_point(2)) {
            let j = e.jet2(&p).unwrap();
            let jc = e.conj().jet2(&p).unwrap();
            for k in 0..2 {
                prop_assert_eq!(jc.d1_hol[k], j.d1_anti[k].conj());
            }
        }

        #[test]
        fn product_rule(a in arb_poly(2), b in arb_poly(2), p in arb_point(2)) {
            let ja = a.jet2(&p).unwrap();
            let jb = b.jet2(&p).unwrap();
            let jab = (a * b).jet2(&p).unwrap();
            let scale = 1.0 + ja.value.norm() * jb.value.norm()
                + ja.d2_mixed.iter().flatten().chain(jb.d2_mixed.iter().flatten()).map(|z| z.norm()).sum::<f64>()
                + ja.d1_hol.iter().chain(&jb.d1_anti).chain(&jb.d1_hol).chain(&ja.d1_anti).map(|z| z.norm()).sum::<f64>();
            for i in 0..2 {
                prop_assert!((jab.d1_hol[i] - (ja.d1_hol[i] * jb.value + ja.value * jb.d1_hol[i])).norm() <= 1e-12 * scale);
                for j in 0..2 {
                    let leibniz = ja.d2_mixed[i][j] * jb.value + ja.d1_hol[i] * jb.d1_anti[j]
                        + ja.d1_anti[j] * jb.d1_hol[i] + ja.value * jb.d2_mixed[i][j];
                    prop_assert!((jab.d2_mixed[i][j] - leibniz).norm() <= 1e-12 * scale * scale);
                }
            }
        }
    }
}
