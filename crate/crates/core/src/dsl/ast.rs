use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::lexer::Pos;
use crate::exactnum::{rat_string, Rat};

/// Symbols of the argument sub-language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Index(String),
    Var(String),
    Pi,
    Tau,
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sym::Index(s) | Sym::Var(s) => f.write_str(s),
            Sym::Pi => f.write_str("pi"),
            Sym::Tau => f.write_str("tau"),
        }
    }
}

/// Polynomial in [`Sym`]s with rational coefficients. Arguments, τ-scales
/// and plain numbers are all read into this form and then checked for shape.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<Sym>, Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(r: Rat) -> Self {
        Poly::default().with(vec![], r)
    }

    pub fn sym(s: Sym) -> Self {
        Poly::default().with(vec![s], Rat::one())
    }

    fn with(mut self, key: Vec<Sym>, c: Rat) -> Self {
        self.accumulate(key, c);
        self
    }

    fn accumulate(&mut self, key: Vec<Sym>, c: Rat) {
        let slot = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Sym>, &Rat)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.accumulate(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let mut k: Vec<Sym> = ka.iter().chain(kb).cloned().collect();
                k.sort();
                out.accumulate(k, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, r: &Rat) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            out.accumulate(k.clone(), c * r);
        }
        out
    }

    /// The value if the polynomial is a constant.
    pub fn as_const(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&vec![]).cloned(),
            _ => None,
        }
    }

    pub fn coeff(&self, key: &[Sym]) -> Rat {
        self.terms.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Replaces the index `name` by `value`.
    pub fn subst(&self, name: &str, value: i64) -> Poly {
        let mut out = Poly::zero();
        for (k, c) in &self.terms {
            let mut c = c.clone();
            let mut key = Vec::new();
            for s in k {
                match s {
                    Sym::Index(n) if n == name => c *= Rat::from_integer(value.into()),
                    other => key.push(other.clone()),
                }
            }
            out.accumulate(key, c);
        }
        out
    }
}

fn fmt_coeff(c: &Rat) -> String {
    if c.is_integer() {
        rat_string(c)
    } else {
        format!("({})", rat_string(c))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let a = c.abs();
            match (i, c.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let syms: Vec<String> = k.iter().map(|s| s.to_string()).collect();
            if k.is_empty() {
                f.write_str(&fmt_coeff(&a))?;
            } else if a.is_one() {
                f.write_str(&syms.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_coeff(&a), syms.join("*"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Rat),
    /// `q^r`
    QPow(Rat),
    /// `e(arg) = e^{i·arg}`
    Exp(Poly),
    Theta {
        kind: u8,
        arg: Poly,
        tau: Poly,
    },
    Phi(Box<Expr>),
    Psi(Box<Expr>),
    F(Box<Expr>, Box<Expr>),
    Poch(Box<Expr>, Box<Expr>),
    HSum {
        m: i64,
        n: i64,
        ys: Vec<Poly>,
    },
    Sum {
        index: String,
        lo: i64,
        hi: i64,
        alternating: bool,
        body: Box<Expr>,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

// binding strength used by the printer
const SUM_LEVEL: u8 = 1;
const TERM_LEVEL: u8 = 2;
const FACTOR_LEVEL: u8 = 3;
const ATOM_LEVEL: u8 = 4;

impl Expr {
    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) | Expr::Neg(..) => SUM_LEVEL,
            Expr::Mul(..) => TERM_LEVEL,
            Expr::Pow(..) => FACTOR_LEVEL,
            // a sum swallows a trailing `^`, so it is never an atom
            Expr::Sum { .. } => FACTOR_LEVEL,
            Expr::Num(r) if !r.is_integer() || r.is_negative() => ATOM_LEVEL,
            Expr::QPow(r) if !r.is_one() => FACTOR_LEVEL,
            _ => ATOM_LEVEL,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.write_at(f, SUM_LEVEL)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(r) => f.write_str(&if r.is_negative() { format!("({})", rat_string(r)) } else { fmt_coeff(r) }),
            Expr::QPow(r) => {
                if r.is_one() {
                    f.write_str("q")
                } else if r.is_integer() && r.is_positive() {
                    write!(f, "q^{}", rat_string(r))
                } else {
                    write!(f, "q^({})", rat_string(r))
                }
            }
            Expr::Exp(a) => write!(f, "e({a})"),
            Expr::Theta { kind, arg, tau } => write!(f, "theta{kind}({arg} | {tau})"),
            Expr::Phi(a) => write!(f, "phi({a})"),
            Expr::Psi(a) => write!(f, "psi({a})"),
            Expr::F(a, b) => write!(f, "f({a}, {b})"),
            Expr::Poch(a, b) => write!(f, "poch({a}; {b})"),
            Expr::HSum { m, n, ys } => {
                let ys: Vec<String> = ys.iter().map(|y| y.to_string()).collect();
                write!(f, "hsum({m}, {n}; {})", ys.join(", "))
            }
            Expr::Sum { index, lo, hi, alternating, body } => {
                write!(f, "sum {index} in {lo}..{hi}")?;
                if *alternating {
                    write!(f, " sign (-1)^{index}")?;
                }
                f.write_str(" : ")?;
                body.write_at(f, FACTOR_LEVEL + 1)
            }
            Expr::Neg(a) => {
                f.write_str("-")?;
                if matches!(**a, Expr::Num(_)) {
                    f.write_str("(")?;
                    a.write_at(f, SUM_LEVEL)?;
                    return f.write_str(")");
                }
                a.write_at(f, TERM_LEVEL)
            }
            Expr::Add(a, b) => {
                a.write_at(f, SUM_LEVEL)?;
                f.write_str(" + ")?;
                b.write_at(f, TERM_LEVEL)
            }
            Expr::Sub(a, b) => {
                a.write_at(f, SUM_LEVEL)?;
                f.write_str(" - ")?;
                b.write_at(f, TERM_LEVEL)
            }
            Expr::Mul(a, b) => {
                a.write_at(f, TERM_LEVEL)?;
                f.write_str(" * ")?;
                b.write_at(f, FACTOR_LEVEL)
            }
            Expr::Pow(a, p) => {
                // `q^r` and sums need brackets as bases
                if matches!(**a, Expr::QPow(_) | Expr::Sum { .. }) {
                    f.write_str("(")?;
                    a.write_at(f, SUM_LEVEL)?;
                    f.write_str(")")?;
                } else {
                    a.write_at(f, ATOM_LEVEL)?;
                }
                write!(f, "^{p}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, SUM_LEVEL)
    }
}

#[derive(Debug, Clone)]
pub struct IdentityStmt {
    pub name: String,
    pub order: Rat,
    pub vars: Vec<String>,
    pub lets: Vec<(String, Rat)>,
    pub lhs: Expr,
    pub rhs: Expr,
    pub pos: Pos,
}

// positions are not part of the syntax tree's identity
impl PartialEq for IdentityStmt {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.order == other.order
            && self.vars == other.vars
            && self.lets == other.lets
            && self.lhs == other.lhs
            && self.rhs == other.rhs
    }
}

impl fmt::Display for IdentityStmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "identity {} {{", self.name)?;
        writeln!(f, "  order {};", rat_string(&self.order))?;
        if !self.vars.is_empty() {
            writeln!(f, "  vars {};", self.vars.join(", "))?;
        }
        for (name, v) in &self.lets {
            let v = if v.is_negative() { format!("-{}", rat_string(&-v)) } else { rat_string(v) };
            writeln!(f, "  let {name} = {v};")?;
        }
        writeln!(f, "  {}", self.lhs)?;
        writeln!(f, "    == {}", self.rhs)?;
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub statements: Vec<IdentityStmt>,
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.statements.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
