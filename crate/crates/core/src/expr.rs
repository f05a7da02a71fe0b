//! Symbolic scalar expressions in the chart variables `q1..qn`, `u1..un`.
//!
//! Expressions are immutable trees shared through [`Arc`], so clones are cheap
//! and the same tree can be evaluated from many threads. Differentiation is
//! exact and closed over the grammar; evaluation is plain IEEE f64 with domain
//! errors reported together with the offending subexpression and point.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Which family a chart variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    /// Base coordinate `q^i`.
    Base,
    /// Fiber (velocity) coordinate `u^i`.
    Fiber,
}

/// A chart variable reference; `index` is 0-based (`q1` has index 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var {
    pub kind: VarKind,
    pub index: usize,
}

impl Var {
    pub fn q(index: usize) -> Self {
        Var {
            kind: VarKind::Base,
            index,
        }
    }

    pub fn u(index: usize) -> Self {
        Var {
            kind: VarKind::Fiber,
            index,
        }
    }

    fn mask_bit(&self) -> u16 {
        match self.kind {
            VarKind::Base => 1 << self.index,
            VarKind::Fiber => 1 << (8 + self.index),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Base => write!(f, "q{}", self.index + 1),
            VarKind::Fiber => write!(f, "u{}", self.index + 1),
        }
    }
}

/// Exact rational constant with reduced terms and positive denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rat {
    pub fn new(num: i64, den: i64) -> Option<Rat> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den).max(1);
        let sign = if den < 0 { -1 } else { 1 };
        Some(Rat {
            num: sign * (num / g),
            den: (den / g).abs(),
        })
    }

    pub fn int(n: i64) -> Rat {
        Rat { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn is_integer(&self) -> bool {
        self.den == 1
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn checked_add(&self, o: &Rat) -> Option<Rat> {
        let n = self
            .num
            .checked_mul(o.den)?
            .checked_add(o.num.checked_mul(self.den)?)?;
        Rat::new(n, self.den.checked_mul(o.den)?)
    }

    fn checked_sub(&self, o: &Rat) -> Option<Rat> {
        let n = self
            .num
            .checked_mul(o.den)?
            .checked_sub(o.num.checked_mul(self.den)?)?;
        Rat::new(n, self.den.checked_mul(o.den)?)
    }

    fn checked_mul(&self, o: &Rat) -> Option<Rat> {
        Rat::new(self.num.checked_mul(o.num)?, self.den.checked_mul(o.den)?)
    }

    fn checked_div(&self, o: &Rat) -> Option<Rat> {
        if o.num == 0 {
            return None;
        }
        Rat::new(self.num.checked_mul(o.den)?, self.den.checked_mul(o.num)?)
    }

    fn checked_pow_int(&self, k: i64) -> Option<Rat> {
        let (base_n, base_d, kk) = if k >= 0 {
            (self.num, self.den, k)
        } else {
            if self.num == 0 {
                return None;
            }
            (self.den, self.num, -k)
        };
        if kk > 32 {
            return None;
        }
        let mut n: i64 = 1;
        let mut d: i64 = 1;
        for _ in 0..kk {
            n = n.checked_mul(base_n)?;
            d = d.checked_mul(base_d)?;
        }
        Rat::new(n, d)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl UnOp {
    fn name(&self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Sin => "sin",
            UnOp::Cos => "cos",
            UnOp::Tan => "tan",
            UnOp::Exp => "exp",
            UnOp::Log => "log",
            UnOp::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug)]
enum Kind {
    Const(Rat),
    Var(Var),
    Unary(UnOp, Expr),
    Bin(BinOp, Expr, Expr),
    /// Power with a constant rational exponent.
    Pow(Expr, Rat),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    /// Bitmask of variables occurring below this node; used to prune
    /// differentiation of subtrees that do not depend on the variable.
    mask: u16,
}

/// An immutable symbolic expression.
#[derive(Debug, Clone)]
pub struct Expr(Arc<Node>);

/// A chart point `(q^1..q^n, u^1..u^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub q: Vec<f64>,
    pub u: Vec<f64>,
}

impl Point {
    pub fn new(q: Vec<f64>, u: Vec<f64>) -> Point {
        Point { q, u }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn var(&self, v: Var) -> f64 {
        match v.kind {
            VarKind::Base => self.q[v.index],
            VarKind::Fiber => self.u[v.index],
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_vec = |xs: &[f64]| {
            xs.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "q=({}), u=({})", fmt_vec(&self.q), fmt_vec(&self.u))
    }
}

/// Domain failure during evaluation; carries the offending subexpression.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("{reason} in `{expr}` at {point}")]
pub struct EvalError {
    pub reason: String,
    pub expr: String,
    pub point: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar,
    UnexpectedEnd,
    UnknownIdentifier,
    IndexOutOfRange,
    NumberOverflow,
    BadExponent,
    TrailingInput,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{message} at byte offset {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

// The static constructors `Expr::add` etc. back the operator impls below;
// both spellings are part of the API.
#[allow(clippy::should_implement_trait)]
impl Expr {
    fn make(kind: Kind) -> Expr {
        let mask = match &kind {
            Kind::Const(_) => 0,
            Kind::Var(v) => v.mask_bit(),
            Kind::Unary(_, e) => e.0.mask,
            Kind::Bin(_, a, b) => a.0.mask | b.0.mask,
            Kind::Pow(e, _) => e.0.mask,
        };
        Expr(Arc::new(Node { kind, mask }))
    }

    pub fn constant(r: Rat) -> Expr {
        Expr::make(Kind::Const(r))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Rat::int(n))
    }

    pub fn rat(num: i64, den: i64) -> Expr {
        Expr::constant(Rat::new(num, den).expect("nonzero denominator"))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(v: Var) -> Expr {
        Expr::make(Kind::Var(v))
    }

    pub fn q(index: usize) -> Expr {
        Expr::var(Var::q(index))
    }

    pub fn u(index: usize) -> Expr {
        Expr::var(Var::u(index))
    }

    fn as_const(&self) -> Option<Rat> {
        match &self.0.kind {
            Kind::Const(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.as_const(), Some(r) if r.num() == 0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self.as_const(), Some(r) if r.num() == 1 && r.den() == 1)
    }

    pub fn depends_on(&self, v: Var) -> bool {
        self.0.mask & v.mask_bit() != 0
    }

    /// True when the expression references a fiber variable `u^i`.
    pub fn depends_on_fiber(&self) -> bool {
        self.0.mask & 0xff00 != 0
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(r) = x.checked_add(&y) {
                return Expr::constant(r);
            }
        }
        Expr::make(Kind::Bin(BinOp::Add, a, b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_zero() {
            return a;
        }
        if a.is_zero() {
            return Expr::neg(b);
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(r) = x.checked_sub(&y) {
                return Expr::constant(r);
            }
        }
        Expr::make(Kind::Bin(BinOp::Sub, a, b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_zero() || b.is_zero() {
            return Expr::zero();
        }
        if a.is_one() {
            return b;
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if let Some(r) = x.checked_mul(&y) {
                return Expr::constant(r);
            }
        }
        Expr::make(Kind::Bin(BinOp::Mul, a, b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_zero() {
            return Expr::zero();
        }
        if b.is_one() {
            return a;
        }
        if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
            if y.num() != 0 {
                if let Some(r) = x.checked_div(&y) {
                    return Expr::constant(r);
                }
            }
        }
        Expr::make(Kind::Bin(BinOp::Div, a, b))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(r) = a.as_const() {
            if let Some(m) = Rat::new(-r.num(), r.den()) {
                return Expr::constant(m);
            }
        }
        if let Kind::Unary(UnOp::Neg, inner) = &a.0.kind {
            return inner.clone();
        }
        Expr::make(Kind::Unary(UnOp::Neg, a))
    }

    pub fn pow(base: Expr, exponent: Rat) -> Expr {
        if exponent.num() == 0 {
            return Expr::one();
        }
        if exponent.num() == 1 && exponent.den() == 1 {
            return base;
        }
        if exponent.is_integer() {
            if let Some(r) = base.as_const() {
                if let Some(v) = r.checked_pow_int(exponent.num()) {
                    return Expr::constant(v);
                }
            }
        }
        Expr::make(Kind::Pow(base, exponent))
    }

    pub fn powi(base: Expr, k: i64) -> Expr {
        Expr::pow(base, Rat::int(k))
    }

    pub fn unary(op: UnOp, a: Expr) -> Expr {
        match op {
            UnOp::Neg => Expr::neg(a),
            _ => Expr::make(Kind::Unary(op, a)),
        }
    }

    pub fn sin(a: Expr) -> Expr {
        Expr::unary(UnOp::Sin, a)
    }

    pub fn cos(a: Expr) -> Expr {
        Expr::unary(UnOp::Cos, a)
    }

    pub fn tan(a: Expr) -> Expr {
        Expr::unary(UnOp::Tan, a)
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::unary(UnOp::Exp, a)
    }

    pub fn log(a: Expr) -> Expr {
        Expr::unary(UnOp::Log, a)
    }

    pub fn sqrt(a: Expr) -> Expr {
        Expr::unary(UnOp::Sqrt, a)
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> Expr {
        let mut memo: HashMap<usize, Expr> = HashMap::new();
        self.diff_memo(v, &mut memo)
    }

    fn diff_memo(&self, v: Var, memo: &mut HashMap<usize, Expr>) -> Expr {
        if !self.depends_on(v) {
            return Expr::zero();
        }
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(d) = memo.get(&key) {
            return d.clone();
        }
        let d = match &self.0.kind {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(w) => {
                if *w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Bin(op, a, b) => {
                let da = a.diff_memo(v, memo);
                let db = b.diff_memo(v, memo);
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                    BinOp::Div => {
                        // (a/b)' = (a'b - ab') / b^2
                        let num = Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db));
                        Expr::div(num, Expr::powi(b.clone(), 2))
                    }
                }
            }
            Kind::Pow(base, r) => {
                let db = base.diff_memo(v, memo);
                let rm1 = r.checked_sub(&Rat::int(1)).expect("exponent arithmetic");
                let outer = Expr::mul(Expr::constant(*r), Expr::pow(base.clone(), rm1));
                Expr::mul(outer, db)
            }
            Kind::Unary(op, a) => {
                let da = a.diff_memo(v, memo);
                let outer = match op {
                    UnOp::Neg => {
                        return {
                            let d = Expr::neg(da);
                            memo.insert(key, d.clone());
                            d
                        }
                    }
                    UnOp::Sin => Expr::cos(a.clone()),
                    UnOp::Cos => Expr::neg(Expr::sin(a.clone())),
                    UnOp::Tan => Expr::div(Expr::one(), Expr::powi(Expr::cos(a.clone()), 2)),
                    UnOp::Exp => Expr::exp(a.clone()),
                    UnOp::Log => Expr::div(Expr::one(), a.clone()),
                    UnOp::Sqrt => {
                        Expr::div(Expr::one(), Expr::mul(Expr::int(2), Expr::sqrt(a.clone())))
                    }
                };
                Expr::mul(outer, da)
            }
        };
        memo.insert(key, d.clone());
        d
    }

    /// Evaluate at a point. Subtrees shared through `Arc` are computed once.
    pub fn eval(&self, p: &Point) -> Result<f64, EvalError> {
        let mut memo: HashMap<usize, f64> = HashMap::new();
        self.eval_memo(p, &mut memo)
    }

    /// Evaluate many expressions at one point with a shared subtree cache;
    /// much cheaper than separate `eval` calls when the trees overlap.
    pub fn eval_many(exprs: &[&Expr], p: &Point) -> Result<Vec<f64>, EvalError> {
        let mut memo: HashMap<usize, f64> = HashMap::new();
        exprs.iter().map(|e| e.eval_memo(p, &mut memo)).collect()
    }

    fn domain_err(&self, reason: &str, p: &Point) -> EvalError {
        EvalError {
            reason: reason.to_string(),
            expr: self.to_string(),
            point: p.to_string(),
        }
    }

    fn eval_memo(&self, p: &Point, memo: &mut HashMap<usize, f64>) -> Result<f64, EvalError> {
        let key = Arc::as_ptr(&self.0) as usize;
        if let Some(v) = memo.get(&key) {
            return Ok(*v);
        }
        let value = match &self.0.kind {
            Kind::Const(r) => r.to_f64(),
            Kind::Var(v) => p.var(*v),
            Kind::Bin(op, a, b) => {
                let x = a.eval_memo(p, memo)?;
                let y = b.eval_memo(p, memo)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(self.domain_err("division by zero", p));
                        }
                        x / y
                    }
                }
            }
            Kind::Pow(base, r) => {
                let x = base.eval_memo(p, memo)?;
                if r.is_integer() {
                    let k = r.num();
                    if x == 0.0 && k < 0 {
                        return Err(self.domain_err("zero raised to negative power", p));
                    }
                    if k.unsigned_abs() <= i32::MAX as u64 {
                        x.powi(k as i32)
                    } else {
                        x.powf(k as f64)
                    }
                } else {
                    if x < 0.0 {
                        return Err(self.domain_err("negative base with fractional exponent", p));
                    }
                    if x == 0.0 && r.to_f64() < 0.0 {
                        return Err(self.domain_err("zero raised to negative power", p));
                    }
                    x.powf(r.to_f64())
                }
            }
            Kind::Unary(op, a) => {
                let x = a.eval_memo(p, memo)?;
                match op {
                    UnOp::Neg => -x,
                    UnOp::Sin => x.sin(),
                    UnOp::Cos => x.cos(),
                    UnOp::Tan => x.tan(),
                    UnOp::Exp => x.exp(),
                    UnOp::Log => {
                        if x <= 0.0 {
                            return Err(self.domain_err("logarithm of non-positive value", p));
                        }
                        x.ln()
                    }
                    UnOp::Sqrt => {
                        if x < 0.0 {
                            return Err(self.domain_err("square root of negative value", p));
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if !value.is_finite() {
            return Err(self.domain_err("non-finite result", p));
        }
        memo.insert(key, value);
        Ok(value)
    }

    fn precedence(&self) -> u8 {
        match &self.0.kind {
            // `p/q` reparses as a division and `-p` as a negation; their
            // printed precedence must match so reparsing preserves the
            // evaluation order bit for bit.
            Kind::Const(r) => {
                if !r.is_integer() {
                    2
                } else if r.num() < 0 {
                    3
                } else {
                    5
                }
            }
            Kind::Var(_) => 5,
            Kind::Unary(UnOp::Neg, _) => 3,
            Kind::Unary(_, _) => 5,
            Kind::Bin(BinOp::Add | BinOp::Sub, _, _) => 1,
            Kind::Bin(BinOp::Mul | BinOp::Div, _, _) => 2,
            Kind::Pow(_, _) => 4,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            write!(f, "(")?;
        }
        match &self.0.kind {
            Kind::Const(r) => write!(f, "{r}")?,
            Kind::Var(v) => write!(f, "{v}")?,
            Kind::Unary(UnOp::Neg, a) => {
                // `-` binds tighter than `^` here (`-q1^2` is `(-q1)^2`),
                // so a power operand needs explicit parentheses.
                write!(f, "-")?;
                a.fmt_prec(f, 5)?;
            }
            Kind::Unary(op, a) => {
                write!(f, "{}(", op.name())?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            Kind::Bin(op, a, b) => {
                let (sym, own) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                };
                a.fmt_prec(f, own)?;
                write!(f, " {sym} ")?;
                b.fmt_prec(f, own + 1)?;
            }
            Kind::Pow(base, r) => {
                base.fmt_prec(f, 5)?;
                if r.is_integer() {
                    write!(f, "^{}", r.num())?;
                } else {
                    write!(f, "^({})", r)?;
                }
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    dim: usize,
}

/// Parse `text` into an expression over `q1..qn, u1..un`.
///
/// Grammar: `expr := term (('+'|'-') term)*`, `term := factor (('*'|'/')
/// factor)*`, `factor := base ('^' exponent)?`, `base := number | ident |
/// func '(' expr ')' | '(' expr ')' | '-' base`. The exponent is either a
/// signed integer (`x^-2`) or a parenthesized signed rational (`x^(1/2)`);
/// `u1^4/4` therefore parses as `(u1^4)/4`. Whitespace is insignificant.
pub fn parse(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        dim,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err(ParseErrorKind::TrailingInput, "unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, kind: ParseErrorKind, message: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            kind,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::make(Kind::Bin(BinOp::Add, acc, rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = Expr::make(Kind::Bin(BinOp::Sub, acc, rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::make(Kind::Bin(BinOp::Mul, acc, rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    acc = Expr::make(Kind::Bin(BinOp::Div, acc, rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let r = self.exponent()?;
            return Ok(Expr::pow(base, r));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rat, ParseError> {
        self.skip_ws();
        let mut sign: i64 = 1;
        if self.bytes.get(self.pos) == Some(&b'-') {
            sign = -1;
            self.pos += 1;
        }
        self.skip_ws();
        if self.bytes.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            self.skip_ws();
            let mut inner_sign: i64 = 1;
            if self.bytes.get(self.pos) == Some(&b'-') {
                inner_sign = -1;
                self.pos += 1;
            }
            let num = self.integer()?;
            let den = if self.peek() == Some(b'/') {
                self.pos += 1;
                self.integer()?
            } else {
                1
            };
            if self.peek() != Some(b')') {
                return Err(self.err(ParseErrorKind::BadExponent, "expected ')' in exponent"));
            }
            self.pos += 1;
            if den == 0 {
                return Err(self.err(ParseErrorKind::BadExponent, "zero exponent denominator"));
            }
            Rat::new(sign * inner_sign * num, den)
                .ok_or_else(|| self.err(ParseErrorKind::BadExponent, "bad exponent"))
        } else {
            let num = self.integer()?;
            Rat::new(sign * num, 1)
                .ok_or_else(|| self.err(ParseErrorKind::BadExponent, "bad exponent"))
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err(ParseErrorKind::UnexpectedChar, "expected digits"));
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        s.parse::<i64>().map_err(|_| ParseError {
            offset: start,
            kind: ParseErrorKind::NumberOverflow,
            message: "integer literal too large".to_string(),
        })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.err(ParseErrorKind::UnexpectedEnd, "unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err(ParseErrorKind::UnexpectedChar, "expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                let inner = self.base()?;
                Ok(Expr::make(Kind::Unary(UnOp::Neg, inner)))
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err(ParseErrorKind::UnexpectedChar, "unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let int_part = self.integer()?;
        if self.bytes.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac_start = self.pos;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = &self.bytes[frac_start..self.pos];
            if digits.is_empty() {
                return Err(self.err(ParseErrorKind::UnexpectedChar, "expected fraction digits"));
            }
            let mut num = int_part;
            let mut den: i64 = 1;
            for &d in digits {
                num = num
                    .checked_mul(10)
                    .and_then(|n| n.checked_add((d - b'0') as i64))
                    .ok_or(ParseError {
                        offset: start,
                        kind: ParseErrorKind::NumberOverflow,
                        message: "decimal literal too large".to_string(),
                    })?;
                den = den.checked_mul(10).ok_or(ParseError {
                    offset: start,
                    kind: ParseErrorKind::NumberOverflow,
                    message: "decimal literal too large".to_string(),
                })?;
            }
            Ok(Expr::constant(Rat::new(num, den).unwrap()))
        } else {
            Ok(Expr::int(int_part))
        }
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .to_string();
        let func = match name.as_str() {
            "sin" => Some(UnOp::Sin),
            "cos" => Some(UnOp::Cos),
            "tan" => Some(UnOp::Tan),
            "exp" => Some(UnOp::Exp),
            "log" => Some(UnOp::Log),
            "sqrt" => Some(UnOp::Sqrt),
            _ => None,
        };
        if let Some(op) = func {
            if self.peek() != Some(b'(') {
                return Err(self.err(
                    ParseErrorKind::UnexpectedChar,
                    "expected '(' after function",
                ));
            }
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err(ParseErrorKind::UnexpectedChar, "expected ')'"));
            }
            self.pos += 1;
            return Ok(Expr::make(Kind::Unary(op, arg)));
        }
        let kind = match name.as_str() {
            "q" => VarKind::Base,
            "u" => VarKind::Fiber,
            _ => {
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::UnknownIdentifier,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        };
        let idx_start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == idx_start {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::UnknownIdentifier,
                message: format!("unknown identifier `{name}`"),
            });
        }
        let idx: usize = std::str::from_utf8(&self.bytes[idx_start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError {
                offset: idx_start,
                kind: ParseErrorKind::NumberOverflow,
                message: "variable index too large".to_string(),
            })?;
        if idx == 0 || idx > self.dim {
            return Err(ParseError {
                offset: start,
                kind: ParseErrorKind::IndexOutOfRange,
                message: format!("variable index {idx} out of range 1..={}", self.dim),
            });
        }
        Ok(Expr::var(Var {
            kind,
            index: idx - 1,
        }))
    }
}
