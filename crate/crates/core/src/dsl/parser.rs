use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};

use super::ast::{Expr, IdentityStmt, Poly, Script, Sym};
use super::lexer::{tokenize, Pos, Tok, Token};
use crate::exactnum::{rat_string, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

const RESERVED: &[&str] = &[
    "identity", "order", "vars", "let", "sum", "in", "sign", "q", "pi", "tau", "theta1", "theta2", "theta3", "theta4", "phi", "psi", "f", "poch",
    "e", "hsum",
];

const FUNCTIONS: &[&str] = &["theta1", "theta2", "theta3", "theta4", "phi", "psi", "f", "poch", "e", "hsum"];

pub const MAX_VARS: usize = 2;

struct Parser {
    toks: Vec<Token>,
    i: usize,
    vars: Vec<String>,
    lets: Vec<(String, Rat)>,
    indices: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

fn err<T>(pos: Pos, message: impl Into<String>, expected: &[&str]) -> PResult<T> {
    Err(ParseError { pos, message: message.into(), expected: expected.iter().map(|s| s.to_string()).collect() })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Token> {
        if self.peek() == &t {
            Ok(self.bump())
        } else {
            let found = self.peek().describe();
            err(self.pos(), format!("unexpected {found}"), &[&format!("`{}`", t.symbol())])
        }
    }

    fn ident(&mut self) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.pos();
                self.bump();
                Ok((s, p))
            }
            other => err(self.pos(), format!("unexpected {}", other.describe()), &["identifier"]),
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => err(self.pos(), format!("unexpected {}", other.describe()), &[&format!("`{kw}`")]),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn script(&mut self) -> PResult<Script> {
        let mut statements: Vec<IdentityStmt> = Vec::new();
        let mut names = BTreeSet::new();
        while self.peek() != &Tok::Eof {
            let s = self.statement()?;
            if !names.insert(s.name.clone()) {
                return err(s.pos, format!("duplicate identity name `{}`", s.name), &[]);
            }
            statements.push(s);
        }
        Ok(Script { statements })
    }

    fn fresh_name(&self, name: &str, pos: Pos) -> PResult<()> {
        if RESERVED.contains(&name) {
            return err(pos, format!("`{name}` is reserved"), &[]);
        }
        if self.vars.iter().any(|v| v == name) || self.lets.iter().any(|(l, _)| l == name) || self.indices.iter().any(|i| i == name) {
            return err(pos, format!("`{name}` is already defined"), &[]);
        }
        Ok(())
    }

    fn statement(&mut self) -> PResult<IdentityStmt> {
        let pos = self.pos();
        self.keyword("identity")?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LBrace)?;
        self.vars.clear();
        self.lets.clear();
        self.indices.clear();
        let mut order = None;
        loop {
            if self.at_keyword("order") {
                let p = self.pos();
                self.bump();
                if order.is_some() {
                    return err(p, "order given twice", &[]);
                }
                let o = self.number()?;
                if !o.is_positive() {
                    return err(p, "order must be positive", &[]);
                }
                order = Some(o);
                self.expect(Tok::Semi)?;
            } else if self.at_keyword("vars") {
                let p = self.pos();
                self.bump();
                if !self.vars.is_empty() {
                    return err(p, "vars given twice", &[]);
                }
                loop {
                    let (v, vp) = self.ident()?;
                    self.fresh_name(&v, vp)?;
                    self.vars.push(v);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                if self.vars.len() > MAX_VARS {
                    return err(p, format!("at most {MAX_VARS} formal variables are supported"), &[]);
                }
                self.expect(Tok::Semi)?;
            } else if self.at_keyword("let") {
                self.bump();
                let (v, vp) = self.ident()?;
                self.fresh_name(&v, vp)?;
                self.expect(Tok::Eq)?;
                let value = self.number()?;
                self.lets.push((v, value));
                self.expect(Tok::Semi)?;
            } else {
                break;
            }
        }
        let Some(order) = order else {
            return err(self.pos(), "missing order", &["`order`"]);
        };
        let lhs = self.expr()?;
        if self.peek() != &Tok::EqEq {
            let found = self.peek().describe();
            return err(self.pos(), format!("unexpected {found}"), &["`==`", "`+`", "`-`", "`*`"]);
        }
        self.bump();
        let rhs = self.expr()?;
        if self.peek() != &Tok::RBrace {
            let found = self.peek().describe();
            return err(self.pos(), format!("unexpected {found}"), &["`}`", "`+`", "`-`", "`*`"]);
        }
        self.bump();
        Ok(IdentityStmt { name, order, vars: self.vars.clone(), lets: self.lets.clone(), lhs, rhs, pos })
    }

    // ---- series expressions ----

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = if self.eat(&Tok::Minus) {
            let literal = matches!(self.peek(), Tok::Int(_));
            match self.term()? {
                Expr::Num(r) if literal => Expr::Num(-r),
                t => Expr::Neg(Box::new(t)),
            }
        } else {
            self.term()?
        };
        loop {
            if self.eat(&Tok::Plus) {
                acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
            } else if self.eat(&Tok::Minus) {
                acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
            } else if self.peek() == &Tok::Slash {
                let p = self.pos();
                self.bump();
                let d = match self.factor()? {
                    Expr::Num(d) if !d.is_zero() => d,
                    _ => return err(p, "only division by a nonzero number is supported", &[]),
                };
                acc = match acc {
                    Expr::Num(a) => Expr::Num(a / d),
                    other => Expr::Mul(Box::new(other), Box::new(Expr::Num(Rat::from_integer(1.into()) / d))),
                };
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let is_q = matches!(self.peek(), Tok::Ident(s) if s == "q") && self.peek2() == &Tok::Caret;
        let base = self.base()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let p = self.pos();
        let e = self.exponent()?;
        if is_q {
            return Ok(Expr::QPow(e));
        }
        match e.to_integer().to_u32() {
            Some(k) if e.is_integer() => Ok(Expr::Pow(Box::new(base), k)),
            _ => err(p, format!("power must be a nonnegative integer, got {}", rat_string(&e)), &[]),
        }
    }

    fn exponent(&mut self) -> PResult<Rat> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Rat::from_integer(n))
            }
            Tok::LParen => {
                self.bump();
                let r = self.number()?;
                self.expect(Tok::RParen)?;
                Ok(r)
            }
            Tok::Ident(_) => {
                let p = self.pos();
                let poly = self.lfactor()?;
                poly.as_const().map_or_else(|| err(p, "exponent must be a number", &[]), Ok)
            }
            other => err(self.pos(), format!("unexpected {}", other.describe()), &["number", "`(`"]),
        }
    }

    fn base(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Num(Rat::from_integer(n)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if name == "sum" {
                    return self.sum();
                }
                if self.peek2() == &Tok::LParen {
                    if FUNCTIONS.contains(&name.as_str()) {
                        return self.call(&name);
                    }
                    return err(pos, format!("unknown function `{name}`"), FUNCTIONS);
                }
                self.bump();
                if name == "q" {
                    return Ok(Expr::QPow(Rat::from_integer(1.into())));
                }
                if let Some((_, v)) = self.lets.iter().find(|(l, _)| *l == name) {
                    return Ok(Expr::Num(v.clone()));
                }
                if self.vars.contains(&name) || self.indices.contains(&name) || name == "pi" || name == "tau" {
                    return err(pos, format!("`{name}` can only appear inside a function argument"), &[]);
                }
                err(pos, format!("unknown identifier `{name}`"), &[])
            }
            other => err(pos, format!("unexpected {}", other.describe()), &["number", "identifier", "`(`", "`sum`"]),
        }
    }

    fn sum(&mut self) -> PResult<Expr> {
        self.keyword("sum")?;
        let (index, ip) = self.ident()?;
        self.fresh_name(&index, ip)?;
        self.keyword("in")?;
        let lo = self.integer()?;
        self.expect(Tok::DotDot)?;
        let hi = self.integer()?;
        let mut alternating = false;
        if self.at_keyword("sign") {
            self.bump();
            self.expect(Tok::LParen)?;
            self.expect(Tok::Minus)?;
            let p = self.pos();
            match self.bump().tok {
                Tok::Int(n) if n == 1.into() => {}
                other => return err(p, format!("unexpected {}", other.describe()), &["`1`"]),
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Caret)?;
            let (v, vp) = self.ident()?;
            if v != index {
                return err(vp, format!("sign must use the summation index `{index}`"), &[]);
            }
            alternating = true;
        }
        self.expect(Tok::Colon)?;
        self.indices.push(index.clone());
        let body = self.factor();
        self.indices.pop();
        Ok(Expr::Sum { index, lo, hi, alternating, body: Box::new(body?) })
    }

    fn call(&mut self, name: &str) -> PResult<Expr> {
        self.bump();
        self.expect(Tok::LParen)?;
        let e = match name {
            "theta1" | "theta2" | "theta3" | "theta4" => {
                let kind = name.as_bytes()[5] - b'0';
                let arg = self.argument()?;
                self.expect(Tok::Bar)?;
                let tp = self.pos();
                let tau = self.lexpr()?;
                if tau.terms().any(|(k, _)| k != &vec![Sym::Tau]) {
                    return err(tp, "the modulus must be a rational multiple of tau", &[]);
                }
                Expr::Theta { kind, arg, tau }
            }
            "e" => Expr::Exp(self.argument()?),
            "phi" => Expr::Phi(Box::new(self.expr()?)),
            "psi" => Expr::Psi(Box::new(self.expr()?)),
            "f" => {
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                Expr::F(Box::new(a), Box::new(self.expr()?))
            }
            "poch" => {
                let a = self.expr()?;
                self.expect(Tok::Semi)?;
                Expr::Poch(Box::new(a), Box::new(self.expr()?))
            }
            "hsum" => {
                let m = self.integer()?;
                self.expect(Tok::Comma)?;
                let n = self.integer()?;
                self.expect(Tok::Semi)?;
                let mut ys = vec![self.argument()?];
                while self.eat(&Tok::Comma) {
                    ys.push(self.argument()?);
                }
                Expr::HSum { m, n, ys }
            }
            _ => unreachable!("checked against FUNCTIONS"),
        };
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    /// An affine argument: integer-or-index multiples of variables, `pi` and
    /// `pi*tau`.
    fn argument(&mut self) -> PResult<Poly> {
        let p = self.pos();
        let a = self.lexpr()?;
        for (k, c) in a.terms() {
            let rest: Vec<&Sym> = k.iter().filter(|s| !matches!(s, Sym::Index(_))).collect();
            let ok = matches!(rest.as_slice(), [Sym::Var(_)] | [Sym::Pi] | [Sym::Pi, Sym::Tau]);
            if !ok {
                let what = if k.is_empty() { rat_string(c) } else { k.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("*") };
                return err(p, format!("`{what}` is not allowed in an argument"), &["variable", "`pi`", "`pi*tau`"]);
            }
        }
        Ok(a)
    }

    // ---- the polynomial sub-language ----

    fn number(&mut self) -> PResult<Rat> {
        let p = self.pos();
        let poly = self.lexpr()?;
        poly.as_const().map_or_else(|| err(p, "expected a number", &[]), Ok)
    }

    fn integer(&mut self) -> PResult<i64> {
        let p = self.pos();
        let r = self.number()?;
        match r.to_integer().to_i64() {
            Some(n) if r.is_integer() => Ok(n),
            _ => err(p, format!("expected an integer, got {}", rat_string(&r)), &[]),
        }
    }

    fn lexpr(&mut self) -> PResult<Poly> {
        let mut acc = if self.eat(&Tok::Minus) { self.lterm()?.neg() } else { self.lterm()? };
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.lterm()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.lterm()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn lterm(&mut self) -> PResult<Poly> {
        let mut acc = self.lfactor()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc.mul(&self.lfactor()?);
            } else if self.peek() == &Tok::Slash {
                let p = self.pos();
                self.bump();
                match self.lfactor()?.as_const() {
                    Some(d) if !d.is_zero() => acc = acc.scale(&(Rat::from_integer(1.into()) / d)),
                    _ => return err(p, "can only divide by a nonzero number", &[]),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn lfactor(&mut self) -> PResult<Poly> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Poly::constant(Rat::from_integer(n)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.lexpr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Minus => {
                self.bump();
                Ok(self.lfactor()?.neg())
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some((_, v)) = self.lets.iter().find(|(l, _)| *l == name) {
                    return Ok(Poly::constant(v.clone()));
                }
                if self.vars.contains(&name) {
                    return Ok(Poly::sym(Sym::Var(name)));
                }
                if self.indices.contains(&name) {
                    return Ok(Poly::sym(Sym::Index(name)));
                }
                match name.as_str() {
                    "pi" => Ok(Poly::sym(Sym::Pi)),
                    "tau" => Ok(Poly::sym(Sym::Tau)),
                    _ => err(pos, format!("unknown identifier `{name}`"), &[]),
                }
            }
            other => err(pos, format!("unexpected {}", other.describe()), &["number", "identifier", "`(`"]),
        }
    }
}

fn lex(src: &str) -> PResult<Vec<Token>> {
    tokenize(src).map_err(|e| ParseError { pos: e.pos, message: e.message, expected: vec![] })
}

pub fn parse(src: &str) -> PResult<Script> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, vars: vec![], lets: vec![], indices: vec![] };
    p.script()
}

/// A single series expression over the given variables.
pub fn parse_expr(src: &str, vars: &[&str]) -> PResult<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, vars: vec![], lets: vec![], indices: vec![] };
    for v in vars {
        p.fresh_name(v, Pos { line: 1, col: 1 })?;
        p.vars.push(v.to_string());
    }
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        let found = p.peek().describe();
        return err(p.pos(), format!("unexpected {found}"), &["end of input"]);
    }
    Ok(e)
}
