//! Truncated sparse series in `q` (rational exponents) and a fixed number of
//! formal exponential variables `x_v = e^{i z_v}` (integer exponents).
//!
//! Every series carries an exactness bound: coefficients at q-exponents
//! strictly below [`QxSeries::order`] are the true coefficients of the
//! infinite object it represents, nothing is known at or above it. All
//! operations compute the tightest bound they can prove.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{rat_int, rat_string, CycloNum, Rat};

/// Exponent of `q`.
pub type QExp = Rat;

/// Exponents of the formal variables, one per ambient dimension.
pub type XVec = Vec<i64>;

/// Exactness bound of a series. `Exact` means the stored terms are the whole
/// object (a polynomial or an identically-zero series).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precision {
    Finite(QExp),
    Exact,
}

impl Precision {
    pub fn finite(&self) -> Option<&QExp> {
        match self {
            Precision::Finite(o) => Some(o),
            Precision::Exact => None,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Precision::Exact)
    }

    pub fn plus(&self, r: &QExp) -> Precision {
        match self {
            Precision::Finite(o) => Precision::Finite(o + r),
            Precision::Exact => Precision::Exact,
        }
    }

    pub fn plus_prec(&self, other: &Precision) -> Precision {
        match (self, other) {
            (Precision::Finite(a), Precision::Finite(b)) => Precision::Finite(a + b),
            _ => Precision::Exact,
        }
    }

    /// `true` if the q-exponent `e` lies strictly below the bound.
    pub fn admits(&self, e: &QExp) -> bool {
        match self {
            Precision::Finite(o) => e < o,
            Precision::Exact => true,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Finite(o) => f.write_str(&rat_string(o)),
            Precision::Exact => f.write_str("exact"),
        }
    }
}

/// `aπ + bπτ`. As a multiplier `e^{i(aπ + bπτ)} = e^{iπa} q^{b/2}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ShiftSpec {
    pub pi: Rat,
    pub pitau: Rat,
}

impl ShiftSpec {
    pub fn new(pi: Rat, pitau: Rat) -> Self {
        ShiftSpec { pi, pitau }
    }

    pub fn zero() -> Self {
        ShiftSpec { pi: Rat::zero(), pitau: Rat::zero() }
    }

    pub fn pi(a: Rat) -> Self {
        ShiftSpec { pi: a, pitau: Rat::zero() }
    }

    pub fn pitau(b: Rat) -> Self {
        ShiftSpec { pi: Rat::zero(), pitau: b }
    }

    pub fn is_zero(&self) -> bool {
        self.pi.is_zero() && self.pitau.is_zero()
    }

    pub fn add(&self, other: &ShiftSpec) -> ShiftSpec {
        ShiftSpec { pi: &self.pi + &other.pi, pitau: &self.pitau + &other.pitau }
    }

    pub fn neg(&self) -> ShiftSpec {
        ShiftSpec { pi: -&self.pi, pitau: -&self.pitau }
    }

    pub fn scale(&self, c: &Rat) -> ShiftSpec {
        ShiftSpec { pi: &self.pi * c, pitau: &self.pitau * c }
    }

    /// `(e^{i(aπ + bπτ)})^m` split as (root of unity, q-exponent).
    pub fn power(&self, m: i64) -> (CycloNum, QExp) {
        let m = rat_int(m);
        (CycloNum::exp_pi_i(&(&self.pi * &m)), &self.pitau * &m / rat_int(2))
    }
}

/// A theta argument `Σ linear_v z_v + aπ + bπτ` together with the τ-scale `c`
/// of `θ(· | cτ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArgSpec {
    pub linear: Vec<i64>,
    pub shift: ShiftSpec,
    pub tau_scale: Rat,
}

impl ArgSpec {
    pub fn new(linear: Vec<i64>, shift: ShiftSpec, tau_scale: Rat) -> Self {
        ArgSpec { linear, shift, tau_scale }
    }

    /// `k·z_v | τ`.
    pub fn var(dim: usize, v: usize, k: i64) -> Self {
        let mut linear = vec![0; dim];
        linear[v] = k;
        ArgSpec { linear, shift: ShiftSpec::zero(), tau_scale: Rat::one() }
    }

    /// The constant argument `aπ + bπτ | τ`.
    pub fn constant(dim: usize, shift: ShiftSpec) -> Self {
        ArgSpec { linear: vec![0; dim], shift, tau_scale: Rat::one() }
    }

    pub fn shifted(mut self, s: &ShiftSpec) -> Self {
        self.shift = self.shift.add(s);
        self
    }

    pub fn with_tau(mut self, c: Rat) -> Self {
        self.tau_scale = c;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("coefficient at q^{requested} is unknown: series is exact only below q^{order}")]
    BeyondOrder { requested: String, order: String },
    #[error("variable index {0} out of range for dimension {1}")]
    NoSuchVar(usize, usize),
    #[error("a πτ-shift of a truncated series is not certifiable; generate the shifted series directly")]
    UnsoundShift,
    #[error("tau scale must be positive, got {0}")]
    NonPositiveScale(String),
    #[error("factor generation failed: {0}")]
    Generator(String),
}

type Key = (QExp, XVec);

#[derive(Clone, Debug, PartialEq)]
pub struct QxSeries {
    dim: usize,
    terms: BTreeMap<Key, CycloNum>,
    order: Precision,
}

impl QxSeries {
    /// Zero series, exact below `order`.
    pub fn zero(dim: usize, order: Precision) -> Self {
        QxSeries { dim, terms: BTreeMap::new(), order }
    }

    pub fn exact_zero(dim: usize) -> Self {
        Self::zero(dim, Precision::Exact)
    }

    pub fn one(dim: usize) -> Self {
        Self::monomial(dim, CycloNum::one(), Rat::zero(), vec![0; dim])
    }

    pub fn constant(dim: usize, c: CycloNum) -> Self {
        Self::monomial(dim, c, Rat::zero(), vec![0; dim])
    }

    /// The exact single-term series `c q^e x^m`.
    pub fn monomial(dim: usize, c: CycloNum, e: QExp, m: XVec) -> Self {
        assert_eq!(m.len(), dim, "x-vector length must equal the dimension");
        let mut s = Self::exact_zero(dim);
        if !c.is_zero() {
            s.terms.insert((e, m), c);
        }
        s
    }

    /// Collects terms, merging duplicates and dropping zeros and anything at
    /// or above `order`.
    pub fn from_terms<I>(dim: usize, order: Precision, terms: I) -> Self
    where
        I: IntoIterator<Item = (QExp, XVec, CycloNum)>,
    {
        let mut s = Self::zero(dim, order);
        for (e, m, c) in terms {
            assert_eq!(m.len(), dim, "x-vector length must equal the dimension");
            s.accumulate(e, m, &c);
        }
        s
    }

    fn accumulate(&mut self, e: QExp, m: XVec, c: &CycloNum) {
        if c.is_zero() || !self.order.admits(&e) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((e, m)) {
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().add(c);
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> &Precision {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Stored terms in (q-exponent, x-vector) order.
    pub fn terms(&self) -> impl Iterator<Item = (&QExp, &XVec, &CycloNum)> {
        self.terms.iter().map(|((e, m), c)| (e, m, c))
    }

    /// Smallest stored q-exponent.
    pub fn min_exponent(&self) -> Option<&QExp> {
        self.terms.keys().next().map(|(e, _)| e)
    }

    /// Lower bound for every q-exponent the full object can have: the
    /// smallest stored exponent, or the order when nothing is stored.
    pub fn low(&self) -> Precision {
        match self.min_exponent() {
            Some(e) => Precision::Finite(e.clone()),
            None => self.order.clone(),
        }
    }

    /// Lowers the exactness bound to `order` (never raises it).
    pub fn truncate(&self, order: &Precision) -> Self {
        if order >= &self.order {
            return self.clone();
        }
        let mut s = Self::zero(self.dim, order.clone());
        s.terms = self.terms.iter().filter(|((e, _), _)| order.admits(e)).map(|(k, c)| (k.clone(), c.clone())).collect();
        s
    }

    fn check_dim(&self, other: &Self) -> Result<(), SeriesError> {
        if self.dim != other.dim {
            return Err(SeriesError::DimMismatch(self.dim, other.dim));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        let order = self.order.clone().min(other.order.clone());
        let mut s = self.truncate(&order);
        for ((e, m), c) in &other.terms {
            s.accumulate(e.clone(), m.clone(), c);
        }
        Ok(s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        QxSeries { dim: self.dim, terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect(), order: self.order.clone() }
    }

    /// Truncated product. The bound is `min(ord A + low B, ord B + low A)`:
    /// the unknown tail of one factor can only meet the other factor at or
    /// above its lowest possible exponent.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_dim(other)?;
        if (self.is_empty() && self.order.is_exact()) || (other.is_empty() && other.order.is_exact()) {
            return Ok(Self::exact_zero(self.dim));
        }
        let order = self.order.plus_prec(&other.low()).min(other.order.plus_prec(&self.low()));
        let mut acc: BTreeMap<Key, CycloNum> = BTreeMap::new();
        let other_min = other.min_exponent().cloned();
        for ((ea, ma), ca) in &self.terms {
            let Some(omin) = &other_min else { break };
            if !order.admits(&(ea + omin)) {
                break;
            }
            for ((eb, mb), cb) in &other.terms {
                let e = ea + eb;
                if !order.admits(&e) {
                    break;
                }
                let m: XVec = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                let c = ca.mul(cb);
                match acc.get_mut(&(e.clone(), m.clone())) {
                    Some(v) => *v = v.add(&c),
                    None => {
                        acc.insert((e, m), c);
                    }
                }
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(QxSeries { dim: self.dim, terms: acc, order })
    }

    /// `self^p` for `p ≥ 1`.
    pub fn pow(&self, p: u32) -> Result<Self, SeriesError> {
        assert!(p >= 1, "series power must be positive");
        let mut acc = self.clone();
        for _ in 1..p {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies by the monomial `c q^dq x^dx`.
    pub fn scale(&self, c: &CycloNum, dq: &QExp, dx: &[i64]) -> Result<Self, SeriesError> {
        if dx.len() != self.dim {
            return Err(SeriesError::DimMismatch(self.dim, dx.len()));
        }
        if c.is_zero() {
            return Ok(Self::exact_zero(self.dim));
        }
        let terms = self
            .terms
            .iter()
            .map(|((e, m), v)| {
                let m2: XVec = m.iter().zip(dx).map(|(a, b)| a + b).collect();
                ((e + dq, m2), v.mul(c))
            })
            .collect();
        Ok(QxSeries { dim: self.dim, terms, order: self.order.plus(dq) })
    }

    pub fn scale_coeff(&self, c: &CycloNum) -> Self {
        self.scale(c, &Rat::zero(), &vec![0; self.dim]).expect("dimension matches")
    }

    /// Substitutes `z_v → z_v + aπ + bπτ`.
    ///
    /// With `b ≠ 0` infinitely many unknown high-x terms of a truncated series
    /// could move below the bound, so only exact series accept it.
    pub fn shift_var(&self, v: usize, s: &ShiftSpec) -> Result<Self, SeriesError> {
        if v >= self.dim {
            return Err(SeriesError::NoSuchVar(v, self.dim));
        }
        if !s.pitau.is_zero() && !self.order.is_exact() {
            return Err(SeriesError::UnsoundShift);
        }
        let mut out = Self::zero(self.dim, self.order.clone());
        for ((e, m), c) in &self.terms {
            let (root, dq) = s.power(m[v]);
            out.accumulate(e + dq, m.clone(), &c.mul(&root));
        }
        Ok(out)
    }

    /// Substitutes `z_v = aπ + bπτ`, removing the variable.
    pub fn eval_var(&self, v: usize, s: &ShiftSpec) -> Result<Self, SeriesError> {
        if v >= self.dim {
            return Err(SeriesError::NoSuchVar(v, self.dim));
        }
        if !s.pitau.is_zero() && !self.order.is_exact() {
            return Err(SeriesError::UnsoundShift);
        }
        let mut out = Self::zero(self.dim - 1, self.order.clone());
        for ((e, m), c) in &self.terms {
            let (root, dq) = s.power(m[v]);
            let mut m2 = m.clone();
            m2.remove(v);
            out.accumulate(e + dq, m2, &c.mul(&root));
        }
        Ok(out)
    }

    /// `θ(z | τ) → θ(z | cτ)`: every q-exponent and the bound scale by `c`.
    pub fn scale_tau(&self, c: &Rat) -> Result<Self, SeriesError> {
        if !c.is_positive() {
            return Err(SeriesError::NonPositiveScale(rat_string(c)));
        }
        let order = match &self.order {
            Precision::Finite(o) => Precision::Finite(o * c),
            Precision::Exact => Precision::Exact,
        };
        let terms = self.terms.iter().map(|((e, m), v)| ((e * c, m.clone()), v.clone())).collect();
        Ok(QxSeries { dim: self.dim, terms, order })
    }

    /// Appends `extra` formal variables with exponent zero.
    pub fn lift(&self, extra: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|((e, m), c)| {
                let mut m2 = m.clone();
                m2.extend(std::iter::repeat_n(0, extra));
                ((e.clone(), m2), c.clone())
            })
            .collect();
        QxSeries { dim: self.dim + extra, terms, order: self.order.clone() }
    }

    fn beyond(&self, e: &QExp) -> SeriesError {
        SeriesError::BeyondOrder { requested: rat_string(e), order: self.order.to_string() }
    }

    pub fn coeff_at(&self, e: &QExp, m: &[i64]) -> Result<CycloNum, SeriesError> {
        if m.len() != self.dim {
            return Err(SeriesError::DimMismatch(self.dim, m.len()));
        }
        if !self.order.admits(e) {
            return Err(self.beyond(e));
        }
        Ok(self.terms.get(&(e.clone(), m.to_vec())).cloned().unwrap_or_default())
    }

    /// First stored term below `bound`, i.e. the lowest witness that the
    /// series is nonzero there.
    pub fn first_nonzero_below(&self, bound: &Precision) -> Result<Option<(QExp, XVec, CycloNum)>, SeriesError> {
        if bound > &self.order {
            return Err(self.beyond(bound.finite().expect("exact bound exceeds a finite order")));
        }
        Ok(self.terms.iter().next().filter(|((e, _), _)| bound.admits(e)).map(|((e, m), c)| (e.clone(), m.clone(), c.clone())))
    }

    pub fn is_zero_to_order(&self, bound: &QExp) -> Result<bool, SeriesError> {
        Ok(self.first_nonzero_below(&Precision::Finite(bound.clone()))?.is_none())
    }

    /// Plain-text listing, one `(qexp, [xvec]) -> coeff` line per term in key
    /// order, followed by the exactness bound.
    pub fn render_debug(&self) -> String {
        let mut out = String::new();
        for ((e, m), c) in &self.terms {
            let xs: Vec<String> = m.iter().map(i64::to_string).collect();
            out.push_str(&format!("({}, [{}]) -> {}\n", rat_string(e), xs.join(", "), c));
        }
        out.push_str(&format!("order {}\n", self.order));
        out
    }

    /// Human-oriented rendering such as `1 + 2*q + 2*q^4 + O(q^10)`, with
    /// `e(2z - y)` standing for `e^{i(2z - y)}`.
    pub fn render_pretty(&self, names: &[&str]) -> String {
        let mut parts: Vec<(bool, String)> = Vec::new();
        for ((e, m), c) in &self.terms {
            let (neg, coeff) = match c.as_rat() {
                Some(r) => (r.is_negative(), Some(r.abs())),
                None => (false, None),
            };
            let mut factors: Vec<String> = Vec::new();
            if !e.is_zero() {
                if e.is_one() {
                    factors.push("q".into());
                } else if e.is_integer() && e.is_positive() {
                    factors.push(format!("q^{}", e));
                } else {
                    factors.push(format!("q^({})", rat_string(e)));
                }
            }
            if m.iter().any(|&k| k != 0) {
                let mut lin = String::new();
                for (v, &k) in m.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let name = names.get(v).copied().unwrap_or("x");
                    let sign = if k < 0 {
                        "-"
                    } else if lin.is_empty() {
                        ""
                    } else {
                        "+"
                    };
                    let sep = if lin.is_empty() { "" } else { " " };
                    let body = if k.abs() == 1 { name.to_string() } else { format!("{}{}", k.abs(), name) };
                    if lin.is_empty() {
                        lin = format!("{sign}{body}");
                    } else {
                        lin = format!("{lin}{sep}{sign} {body}");
                    }
                }
                factors.push(format!("e({lin})"));
            }
            let term = match coeff {
                Some(r) if factors.is_empty() => rat_string(&r),
                Some(r) if r.is_one() => factors.join("*"),
                Some(r) => format!("{}*{}", rat_string(&r), factors.join("*")),
                None if factors.is_empty() => format!("({c})"),
                None => format!("({c})*{}", factors.join("*")),
            };
            parts.push((neg, term));
        }
        let mut out = String::new();
        for (i, (neg, t)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => out.push_str(&format!("-{t}")),
                (0, false) => out.push_str(t),
                (_, true) => out.push_str(&format!(" - {t}")),
                (_, false) => out.push_str(&format!(" + {t}")),
            }
        }
        if let Precision::Finite(o) = &self.order {
            let tail = if o.is_one() {
                "O(q)".to_string()
            } else if o.is_integer() {
                format!("O(q^{o})")
            } else {
                format!("O(q^({}))", rat_string(o))
            };
            if out.is_empty() {
                out = tail;
            } else {
                out.push_str(&format!(" + {tail}"));
            }
        } else if out.is_empty() {
            out.push('0');
        }
        out
    }
}

/// Product of factors, each generated on demand at the order it needs so
/// that the product is exact below `target`.
///
/// A factor is described by a lower bound on its exponents and a generator.
/// Factor `j` is generated to `target - Σ_{k≠j} low_k`; the product order law
/// then certifies the whole product below `target`.
pub type Generator<'a> = Box<dyn Fn(&Precision) -> Result<QxSeries, SeriesError> + Send + Sync + 'a>;

pub struct LazyFactor<'a> {
    pub low: Precision,
    pub generate: Generator<'a>,
}

impl<'a> LazyFactor<'a> {
    pub fn new<F>(low: Precision, generate: F) -> Self
    where
        F: Fn(&Precision) -> Result<QxSeries, SeriesError> + Send + Sync + 'a,
    {
        LazyFactor { low, generate: Box::new(generate) }
    }

    pub fn ready(series: QxSeries) -> Self {
        let low = series.low();
        LazyFactor::new(low, move |o| Ok(series.truncate(o)))
    }
}

/// Working order for factor `j`: `target - Σ_{k≠j} low_k`.
pub fn working_order(target: &Precision, lows: &[Precision], j: usize) -> Precision {
    let mut o = target.clone();
    for (k, low) in lows.iter().enumerate() {
        if k == j {
            continue;
        }
        o = match (o, low) {
            (Precision::Finite(a), Precision::Finite(b)) => Precision::Finite(a - b),
            (_, Precision::Exact) => return Precision::Exact,
            (Precision::Exact, _) => Precision::Exact,
        };
    }
    o
}

pub fn product_to_order(dim: usize, factors: &[LazyFactor<'_>], target: &Precision) -> Result<QxSeries, SeriesError> {
    // an exact-zero factor (low = Exact) kills the product
    if factors.iter().any(|f| f.low.is_exact()) {
        return Ok(QxSeries::exact_zero(dim));
    }
    let lows: Vec<Precision> = factors.iter().map(|f| f.low.clone()).collect();
    let mut acc = QxSeries::one(dim);
    for (j, f) in factors.iter().enumerate() {
        let o = working_order(target, &lows, j);
        let mut s = (f.generate)(&o)?;
        // nothing lives below the factor's low, so an empty result is exact up to it
        if s.is_empty() && *s.order() < f.low {
            s = QxSeries::zero(dim, f.low.clone());
        }
        acc = acc.mul(&s)?;
        // terms at or above target - (lows of the remaining factors) cannot
        // reach below target any more
        let mut bound = target.clone();
        for low in &lows[j + 1..] {
            bound = match (bound, low) {
                (Precision::Finite(a), Precision::Finite(b)) => Precision::Finite(a - b),
                _ => Precision::Exact,
            };
        }
        if bound < *acc.order() {
            acc = acc.truncate(&bound);
        }
    }
    Ok(acc.truncate(target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn q(e: Rat, m: Vec<i64>, c: i64) -> (QExp, XVec, CycloNum) {
        (e, m, CycloNum::from_int(c))
    }

    fn poly(order: Precision, terms: &[(i64, i64, i64)]) -> QxSeries {
        QxSeries::from_terms(1, order, terms.iter().map(|&(e, m, c)| q(rat_int(e), vec![m], c)))
    }

    #[test]
    fn add_order_law() {
        let a = poly(Precision::Finite(rat_int(10)), &[(0, 0, 1), (8, 0, 1)]);
        let b = poly(Precision::Finite(rat_int(7)), &[(0, 0, -1), (3, 1, 2)]);
        let s = a.add(&b).unwrap();
        assert_eq!(s.order(), &Precision::Finite(rat_int(7)));
        assert_eq!(s.len(), 1);
        let z = QxSeries::zero(1, Precision::Exact);
        assert_eq!(a.add(&z).unwrap(), a);
    }

    #[test]
    fn dimension_mismatch() {
        let a = QxSeries::one(1);
        let b = QxSeries::one(2);
        assert_eq!(a.add(&b), Err(SeriesError::DimMismatch(1, 2)));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn factor_starting_above_target() {
        // 8 * (q^8 + ...) is certified to any target below 8 even though the
        // second factor comes back empty
        let high =
            LazyFactor::new(Precision::Finite(rat_int(8)), |o| Ok(QxSeries::from_terms(1, o.clone(), vec![q(rat_int(8), vec![0], 1)]).truncate(o)));
        let c = LazyFactor::ready(QxSeries::constant(1, CycloNum::from_int(8)));
        let p = product_to_order(1, &[c, high], &Precision::Finite(rat_int(6))).unwrap();
        assert!(p.is_empty());
        assert_eq!(p.order(), &Precision::Finite(rat_int(6)));
    }

    #[test]
    fn mul_by_one_keeps_order() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 2, 3), (4, -2, 1)]);
        let p = a.mul(&QxSeries::one(1)).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn mul_order_with_negative_leading_exponents() {
        let o = Precision::Finite(rat_int(5));
        let a = QxSeries::from_terms(1, o.clone(), vec![q(rat(-1, 8), vec![1], 1), q(rat_int(1), vec![0], 1)]);
        let p = a.mul(&a).unwrap();
        assert_eq!(p.order(), &Precision::Finite(rat_int(5) - rat(1, 8)));
    }

    #[test]
    fn mul_with_exact_zero_is_exact_zero() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 2, 3)]);
        let p = a.mul(&QxSeries::exact_zero(1)).unwrap();
        assert!(p.is_empty());
        assert!(p.order().is_exact());
    }

    #[test]
    fn mul_of_empty_truncated_series() {
        // zero to order 4 times something starting at q^1 is zero to order 5
        let a = QxSeries::zero(1, Precision::Finite(rat_int(4)));
        let b = poly(Precision::Finite(rat_int(10)), &[(1, 0, 1)]);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.order(), &Precision::Finite(rat_int(5)));
    }

    #[test]
    fn scale_examples() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 2, 3)]);
        assert_eq!(a.scale(&CycloNum::one(), &Rat::zero(), &[0]).unwrap(), a);
        let s = a.scale(&CycloNum::root(4, 1), &rat(1, 2), &[2]).unwrap();
        let (e, m, c) = s.terms().next().unwrap();
        assert_eq!((e.clone(), m.clone()), (rat(3, 2), vec![4]));
        assert_eq!(c, &CycloNum::root(4, 1).scale(&rat_int(3)));
        assert_eq!(s.order(), &Precision::Finite(rat(13, 2)));
    }

    #[test]
    fn shift_full_period_is_identity() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 3, 3), (2, -5, 1), (3, 0, 2)]);
        assert_eq!(a.shift_var(0, &ShiftSpec::pi(rat_int(2))).unwrap(), a);
        let half = a.shift_var(0, &ShiftSpec::pi(rat(1, 2))).unwrap();
        let twice = half.shift_var(0, &ShiftSpec::pi(rat(1, 2))).unwrap();
        assert_eq!(twice, a.shift_var(0, &ShiftSpec::pi(rat_int(1))).unwrap());
    }

    #[test]
    fn pitau_shift_rejected_on_truncated_series() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 3, 3)]);
        assert_eq!(a.shift_var(0, &ShiftSpec::pitau(rat_int(1))), Err(SeriesError::UnsoundShift));
        let exact = poly(Precision::Exact, &[(1, 2, 1)]);
        let s = exact.shift_var(0, &ShiftSpec::pitau(rat_int(1))).unwrap();
        assert_eq!(s.terms().next().unwrap().0, &rat_int(2));
        assert_eq!(a.shift_var(1, &ShiftSpec::zero()), Err(SeriesError::NoSuchVar(1, 1)));
    }

    #[test]
    fn eval_at_zero_drops_variable() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 3, 3), (1, -3, 1)]);
        let e = a.eval_var(0, &ShiftSpec::zero()).unwrap();
        assert_eq!(e.dim(), 0);
        assert_eq!(e.coeff_at(&rat_int(1), &[]).unwrap(), CycloNum::from_int(4));
    }

    #[test]
    fn coefficient_queries() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 2, 3)]);
        assert_eq!(a.coeff_at(&rat_int(1), &[2]).unwrap(), CycloNum::from_int(3));
        assert_eq!(a.coeff_at(&rat_int(1), &[0]).unwrap(), CycloNum::zero());
        assert!(matches!(a.coeff_at(&rat_int(6), &[2]), Err(SeriesError::BeyondOrder { .. })));
        assert!(a.is_zero_to_order(&rat_int(1)).unwrap());
        assert!(!a.is_zero_to_order(&rat_int(2)).unwrap());
        assert!(a.is_zero_to_order(&rat_int(7)).is_err());
        let z = QxSeries::zero(1, Precision::Finite(rat_int(3)));
        assert!(z.is_zero_to_order(&rat_int(3)).unwrap());
    }

    #[test]
    fn scale_tau_examples() {
        let a = poly(Precision::Finite(rat_int(6)), &[(1, 2, 3), (4, 0, 1)]);
        assert_eq!(a.scale_tau(&rat_int(1)).unwrap(), a);
        let b = a.scale_tau(&rat(1, 4)).unwrap();
        assert_eq!(b.min_exponent(), Some(&rat(1, 4)));
        assert_eq!(b.order(), &Precision::Finite(rat(3, 2)));
        assert!(a.scale_tau(&rat_int(0)).is_err());
    }

    #[test]
    fn debug_rendering() {
        let c = CycloNum::one().sub(&CycloNum::root(8, 2));
        let a = QxSeries::from_terms(1, Precision::Finite(rat_int(1)), vec![(rat(3, 8), vec![2], c)]);
        assert_eq!(a.render_debug(), "(3/8, [2]) -> 1 - z8^2\norder 1\n");
    }

    #[test]
    fn pretty_rendering() {
        let a = QxSeries::from_terms(
            0,
            Precision::Finite(rat_int(10)),
            vec![(rat_int(0), vec![], CycloNum::one()), (rat_int(1), vec![], CycloNum::from_int(2)), (rat_int(4), vec![], CycloNum::from_int(-2))],
        );
        assert_eq!(a.render_pretty(&[]), "1 + 2*q - 2*q^4 + O(q^10)");
        let b = QxSeries::monomial(2, CycloNum::one(), rat(1, 2), vec![2, -1]);
        assert_eq!(b.render_pretty(&["z", "y"]), "q^(1/2)*e(2z - y)");
    }

    #[test]
    fn lazy_product_reaches_target() {
        let f = |shift: i64| {
            LazyFactor::new(Precision::Finite(rat_int(shift)), move |o: &Precision| {
                let top = match o {
                    Precision::Finite(v) => crate::exactnum::rat_ceil(v),
                    Precision::Exact => 50,
                };
                Ok(QxSeries::from_terms(0, o.clone(), (shift..top.max(shift)).map(|k| (rat_int(k), vec![], CycloNum::one()))))
            })
        };
        let target = Precision::Finite(rat_int(8));
        let p = product_to_order(0, &[f(-1), f(2), f(-3)], &target).unwrap();
        assert_eq!(p.order(), &target);
        // coefficient of q^k in q^{-2}/(1-q)^3 is C(k+4, 2)
        for k in -2..8i64 {
            let expect = (k + 4) * (k + 3) / 2;
            assert_eq!(p.coeff_at(&rat_int(k), &[]).unwrap(), CycloNum::from_int(expect), "k={k}");
        }
    }
}
