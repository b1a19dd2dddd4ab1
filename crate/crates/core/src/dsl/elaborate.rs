use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::ast::{Expr, IdentityStmt, Poly, Script, Sym};
use crate::circsum::{h_coeff, LatticeSumSpec, YSpec};
use crate::exactnum::{rat_ceil, rat_floor, rat_int, rat_string, CycloNum, Rat};
use crate::qxseries::{product_to_order, ArgSpec, LazyFactor, Precision, QExp, QxSeries, SeriesError, ShiftSpec};
use crate::report::CheckReport;
use crate::thetakernel::{f_ab, pochhammer, theta, theta_low, KernelError, Monomial, ThetaKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElabError {
    pub stmt: String,
    pub message: String,
}

impl fmt::Display for ElabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in identity `{}`: {}", self.stmt, self.message)
    }
}

impl std::error::Error for ElabError {}

/// An evaluation tree; every node knows a lower bound on its q-exponents
/// and can produce itself exactly below any finite order.
#[derive(Debug, Clone)]
pub enum Node {
    Exact(QxSeries),
    Theta(ThetaKind, ArgSpec),
    F(Monomial, Monomial),
    Poch(Monomial, Rat),
    HSum { m: u32, n: u32, ys: Vec<YSpec> },
    Sum(Vec<(bool, Node)>),
    Prod(Vec<Node>),
}

fn fab_low(a: &Monomial, b: &Monomial) -> QExp {
    let s = &a.qexp + &b.qexp;
    let d = &a.qexp - &b.qexp;
    let center = -&d / (&s * rat_int(2));
    let e = |n: i64| {
        let nr = rat_int(n);
        (&s * &nr * &nr + &d * &nr) / rat_int(2)
    };
    let (lo, hi) = (e(rat_floor(&center)), e(rat_ceil(&center)));
    lo.min(hi)
}

impl Node {
    pub fn low(&self) -> Precision {
        match self {
            Node::Exact(s) => s.low(),
            Node::Theta(kind, arg) => Precision::Finite(theta_low(*kind, arg)),
            Node::F(a, b) => Precision::Finite(fab_low(a, b)),
            Node::Poch(a, base) => {
                let mut mu = Rat::zero();
                let mut e = a.qexp.clone();
                while !e.is_positive() {
                    mu += &e;
                    e += base;
                }
                Precision::Finite(mu)
            }
            Node::HSum { ys, .. } => Precision::Finite(-ys.iter().map(|y| &y.shift.pitau * &y.shift.pitau).sum::<Rat>() / rat_int(2)),
            Node::Sum(terms) => terms.iter().map(|(_, t)| t.low()).min().unwrap_or(Precision::Exact),
            Node::Prod(fs) => fs.iter().fold(Precision::Finite(Rat::zero()), |acc, f| match (acc, f.low()) {
                (Precision::Finite(a), Precision::Finite(b)) => Precision::Finite(a + b),
                _ => Precision::Exact,
            }),
        }
    }

    pub fn eval(&self, dim: usize, order: &Precision) -> Result<QxSeries, SeriesError> {
        let kernel = |e: KernelError| match e {
            KernelError::Series(s) => s,
            other => SeriesError::Generator(other.to_string()),
        };
        match self {
            Node::Exact(s) => Ok(s.clone()),
            Node::Theta(kind, arg) => theta(*kind, arg, order).map_err(kernel),
            Node::F(a, b) => f_ab(a, b, order).map_err(kernel),
            Node::Poch(a, base) => pochhammer(a, base, order).map_err(kernel),
            Node::HSum { m, n, ys } => {
                let o = order.finite().ok_or_else(|| kernel(KernelError::NeedsFiniteOrder))?;
                let spec = LatticeSumSpec::new(*m, *n, ys.clone(), o.clone()).map_err(|e| SeriesError::Generator(e.to_string()))?;
                h_coeff(&spec).map_err(|e| SeriesError::Generator(e.to_string()))
            }
            Node::Sum(terms) => {
                let mut acc = QxSeries::zero(dim, Precision::Exact);
                for (neg, t) in terms {
                    let v = t.eval(dim, order)?;
                    acc = if *neg { acc.sub(&v)? } else { acc.add(&v)? };
                }
                Ok(acc)
            }
            Node::Prod(fs) => {
                let factors: Vec<LazyFactor> = fs.iter().map(|f| LazyFactor::new(f.low(), move |o| f.eval(dim, o))).collect();
                product_to_order(dim, &factors, order)
            }
        }
    }
}

/// A statement ready to run.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub order: QExp,
    pub dim: usize,
    pub lhs: Node,
    pub rhs: Node,
    pub warnings: Vec<String>,
}

impl Check {
    /// Compares the two sides below `order` (or the statement's own order).
    pub fn run(&self, order: Option<&QExp>) -> CheckReport {
        let started = Instant::now();
        let o = order.unwrap_or(&self.order).clone();
        let target = Precision::Finite(o.clone());
        let diff = self.lhs.eval(self.dim, &target).and_then(|l| l.sub(&self.rhs.eval(self.dim, &target)?));
        match diff {
            Ok(d) => CheckReport::from_difference(&self.name, "", &o, &d, started),
            Err(e) => CheckReport::error(&self.name, "", &o, e.to_string(), started),
        }
    }
}

struct Elab<'a> {
    stmt: &'a str,
    vars: &'a [String],
    env: BTreeMap<String, i64>,
    warnings: Vec<String>,
}

impl Elab<'_> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ElabError> {
        Err(ElabError { stmt: self.stmt.to_string(), message: message.into() })
    }

    fn dim(&self) -> usize {
        self.vars.len()
    }

    fn bind(&self, p: &Poly) -> Poly {
        self.env.iter().fold(p.clone(), |acc, (k, v)| acc.subst(k, *v))
    }

    fn arg(&self, p: &Poly) -> Result<(Vec<i64>, ShiftSpec), ElabError> {
        let p = self.bind(p);
        let mut linear = vec![0i64; self.dim()];
        let mut shift = ShiftSpec::zero();
        for (k, c) in p.terms() {
            match k.as_slice() {
                [Sym::Var(v)] => {
                    let idx = self.vars.iter().position(|x| x == v).expect("parser resolves variables");
                    match c.to_integer().to_i64() {
                        Some(n) if c.is_integer() => linear[idx] = n,
                        _ => return self.fail(format!("coefficient of {v} must be an integer, got {}", rat_string(c))),
                    }
                }
                [Sym::Pi] => shift.pi = c.clone(),
                [Sym::Pi, Sym::Tau] => shift.pitau = c.clone(),
                _ => return self.fail(format!("`{p}` is not an affine argument")),
            }
        }
        Ok((linear, shift))
    }

    fn monomial(&mut self, e: &Expr, what: &str) -> Result<Monomial, ElabError> {
        match self.node(e)? {
            Node::Exact(s) if s.len() == 1 => {
                let (q, x, c) = s.terms().next().expect("one term");
                Ok(Monomial::new(c.clone(), q.clone(), x.clone()))
            }
            _ => self.fail(format!("{what} must be a single term c*q^r*e(...), got `{e}`")),
        }
    }

    fn node(&mut self, e: &Expr) -> Result<Node, ElabError> {
        let dim = self.dim();
        Ok(match e {
            Expr::Num(r) => Node::Exact(QxSeries::constant(dim, CycloNum::from_rat(r.clone()))),
            Expr::QPow(r) => Node::Exact(QxSeries::monomial(dim, CycloNum::one(), r.clone(), vec![0; dim])),
            Expr::Exp(p) => {
                let (linear, shift) = self.arg(p)?;
                Node::Exact(Monomial::exp_i(&ArgSpec::new(linear, shift, Rat::one())).to_series())
            }
            Expr::Theta { kind, arg, tau } => {
                let (linear, shift) = self.arg(arg)?;
                let c = self.bind(tau).coeff(&[Sym::Tau]);
                if !c.is_positive() {
                    return self.fail(format!("tau scale must be positive, got {}", rat_string(&c)));
                }
                Node::Theta(ThetaKind::from_index(*kind).expect("parser checks theta index"), ArgSpec::new(linear, shift, c))
            }
            Expr::Phi(a) => {
                let a = self.monomial(a, "argument of phi")?;
                self.fab(a.clone(), a)?
            }
            Expr::Psi(a) => {
                let a = self.monomial(a, "argument of psi")?;
                let b = a.pow(3);
                self.fab(a, b)?
            }
            Expr::F(a, b) => {
                let a = self.monomial(a, "first argument of f")?;
                let b = self.monomial(b, "second argument of f")?;
                self.fab(a, b)?
            }
            Expr::Poch(a, b) => {
                let a = self.monomial(a, "argument of poch")?;
                let b = self.monomial(b, "base of poch")?;
                if b.coeff != CycloNum::one() || b.xvec.iter().any(|&x| x != 0) || !b.qexp.is_positive() {
                    return self.fail("the base of poch must be q^r with r > 0");
                }
                Node::Poch(a, b.qexp)
            }
            Expr::HSum { m, n, ys } => {
                if *m < 1 || *n < 1 {
                    return self.fail("hsum needs positive m and n");
                }
                if ys.len() as i64 != *n {
                    return self.fail(format!("hsum with n = {n} needs {n} y values, got {}", ys.len()));
                }
                let ys = ys.iter().map(|y| self.arg(y).map(|(l, s)| YSpec::new(l, s))).collect::<Result<Vec<_>, _>>()?;
                if let Err(e) = LatticeSumSpec::new(*m as u32, *n as u32, ys.clone(), Rat::one()) {
                    return self.fail(e.to_string());
                }
                Node::HSum { m: *m as u32, n: *n as u32, ys }
            }
            Expr::Sum { index, lo, hi, alternating, body } => {
                let count = (hi - lo + 1).max(0);
                if *alternating && count % 2 == 1 {
                    self.warnings.push(format!(
                        "alternating sum over {index} has an odd number of terms ({count}); it is not circular and runs as a plain finite sum"
                    ));
                }
                let mut terms = Vec::new();
                for k in *lo..=*hi {
                    self.env.insert(index.clone(), k);
                    let t = self.node(body);
                    self.env.remove(index);
                    terms.push((*alternating && k.rem_euclid(2) == 1, t?));
                }
                Node::Sum(terms)
            }
            Expr::Neg(a) => Node::Sum(vec![(true, self.node(a)?)]),
            Expr::Add(a, b) => Node::Sum(vec![(false, self.node(a)?), (false, self.node(b)?)]),
            Expr::Sub(a, b) => Node::Sum(vec![(false, self.node(a)?), (true, self.node(b)?)]),
            Expr::Mul(a, b) => Node::Prod(vec![self.node(a)?, self.node(b)?]),
            Expr::Pow(a, p) => {
                if *p == 0 {
                    return self.fail(format!("power 0 of `{a}`"));
                }
                let base = self.node(a)?;
                Node::Prod(vec![base; *p as usize])
            }
        }
        .simplify(dim))
    }

    fn fab(&self, a: Monomial, b: Monomial) -> Result<Node, ElabError> {
        if !(&a.qexp + &b.qexp).is_positive() {
            return self.fail("f(a, b) needs the q-exponents of a and b to add up to a positive number");
        }
        Ok(Node::F(a, b))
    }
}

impl Node {
    /// Collapses sums and products of exact pieces into a single exact node.
    fn simplify(self, dim: usize) -> Node {
        match self {
            Node::Sum(terms) if terms.iter().all(|(_, t)| matches!(t, Node::Exact(_))) => {
                let mut acc = QxSeries::zero(dim, Precision::Exact);
                for (neg, t) in terms {
                    let Node::Exact(s) = t else { unreachable!() };
                    acc = if neg { acc.sub(&s) } else { acc.add(&s) }.expect("same dimension");
                }
                Node::Exact(acc)
            }
            Node::Prod(fs) if fs.iter().all(|f| matches!(f, Node::Exact(_))) => {
                let mut acc = QxSeries::one(dim);
                for f in fs {
                    let Node::Exact(s) = f else { unreachable!() };
                    acc = acc.mul(&s).expect("same dimension");
                }
                Node::Exact(acc)
            }
            other => other,
        }
    }
}

pub fn elaborate_stmt(s: &IdentityStmt) -> Result<Check, ElabError> {
    let mut el = Elab { stmt: &s.name, vars: &s.vars, env: BTreeMap::new(), warnings: vec![] };
    let lhs = el.node(&s.lhs)?;
    let rhs = el.node(&s.rhs)?;
    Ok(Check { name: s.name.clone(), order: s.order.clone(), dim: s.vars.len(), lhs, rhs, warnings: el.warnings })
}

pub fn elaborate(script: &Script) -> Result<Vec<Check>, ElabError> {
    script.statements.iter().map(elaborate_stmt).collect()
}

/// A standalone expression in the given variables.
pub fn elaborate_expr(e: &Expr, vars: &[String]) -> Result<Node, ElabError> {
    let mut el = Elab { stmt: "<expr>", vars, env: BTreeMap::new(), warnings: vec![] };
    el.node(e)
}

/// Runs checks concurrently; reports follow the input order. A given order
/// overrides every statement's own.
pub fn run(checks: &[Check], order: Option<&QExp>) -> Vec<CheckReport> {
    checks.par_iter().map(|c| c.run(order)).collect()
}
