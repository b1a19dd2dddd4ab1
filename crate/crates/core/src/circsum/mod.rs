//! Alternating circular sums of products of `θ3`:
//!
//! ```text
//! Σ_{k=0}^{mn-1} (-1)^k Π_{j=1}^{n} θ3(z + y_j + kπ/mn | τ) = H_{m,n}(y|τ) θ2(mnz | m²nτ)
//! H_{m,n}(y|τ) = mn q^{-m²n/8} Σ_{s_1+…+s_n = mn/2} q^{½Σ s_j²} e^{2iΣ s_j y_j}
//! ```
//!
//! for `mn` even and `y_1 + … + y_n = 0`.

use std::collections::BTreeMap;
use std::time::Instant;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::{rat, rat_int, CycloNum, Rat};
use crate::lattice::enumerate_fixed_sum;
use crate::qxseries::{product_to_order, ArgSpec, LazyFactor, Precision, QExp, QxSeries, SeriesError, ShiftSpec, XVec};
use crate::report::CheckReport;
use crate::thetakernel::{theta, theta_factor, KernelError, ThetaKind};

pub mod catalog;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircError {
    #[error("m*n = {0} is odd, the summations are not circular")]
    OddMn(u64),
    #[error("m and n must be positive")]
    NonPositive,
    #[error("expected {expected} y values, got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("the y values must sum to zero")]
    NotZeroSum,
    #[error("y values disagree on the number of variables")]
    DimMismatch,
    #[error("unknown identity {0:?}")]
    UnknownName(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `y_j = Σ linear_v z_v + aπ + bπτ`. Variable 0 is `z`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct YSpec {
    pub linear: Vec<i64>,
    pub shift: ShiftSpec,
}

impl YSpec {
    pub fn new(linear: Vec<i64>, shift: ShiftSpec) -> Self {
        YSpec { linear, shift }
    }

    pub fn zero(dim: usize) -> Self {
        YSpec { linear: vec![0; dim], shift: ShiftSpec::zero() }
    }

    pub fn constant(dim: usize, shift: ShiftSpec) -> Self {
        YSpec { linear: vec![0; dim], shift }
    }

    /// `k·z_v`.
    pub fn var(dim: usize, v: usize, k: i64) -> Self {
        let mut linear = vec![0; dim];
        linear[v] = k;
        YSpec { linear, shift: ShiftSpec::zero() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSumSpec {
    pub m: u32,
    pub n: u32,
    pub ys: Vec<YSpec>,
    pub order: QExp,
}

impl LatticeSumSpec {
    pub fn new(m: u32, n: u32, ys: Vec<YSpec>, order: QExp) -> Result<Self, CircError> {
        let spec = LatticeSumSpec { m, n, ys, order };
        spec.validate()?;
        Ok(spec)
    }

    /// All-zero `y` in one variable.
    pub fn plain(m: u32, n: u32, order: QExp) -> Result<Self, CircError> {
        Self::new(m, n, vec![YSpec::zero(1); n as usize], order)
    }

    pub fn validate(&self) -> Result<(), CircError> {
        if self.m == 0 || self.n == 0 {
            return Err(CircError::NonPositive);
        }
        let mn = self.m as u64 * self.n as u64;
        if mn.is_odd() {
            return Err(CircError::OddMn(mn));
        }
        if self.ys.len() != self.n as usize {
            return Err(CircError::WrongCount { expected: self.n as usize, got: self.ys.len() });
        }
        let dim = self.ys[0].linear.len();
        if self.ys.iter().any(|y| y.linear.len() != dim) {
            return Err(CircError::DimMismatch);
        }
        let mut lin = vec![0i64; dim];
        let mut shift = ShiftSpec::zero();
        for y in &self.ys {
            for (a, b) in lin.iter_mut().zip(&y.linear) {
                *a += b;
            }
            shift = shift.add(&y.shift);
        }
        if lin.iter().any(|&v| v != 0) || !shift.is_zero() {
            return Err(CircError::NotZeroSum);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.ys[0].linear.len()
    }

    pub fn mn(&self) -> i64 {
        self.m as i64 * self.n as i64
    }

    pub fn params(&self) -> String {
        let ys: Vec<String> = self.ys.iter().map(render_y).collect();
        format!("m={},n={},y=({})", self.m, self.n, ys.join(", "))
    }

    /// Lower bound on the q-exponents of `H`: with `Σ b_j = 0` the exponent
    /// `-m²n/8 + ½Σ(s_j + b_j)² - ½Σ b_j²` is at least `-½Σ b_j²`.
    fn h_low(&self) -> QExp {
        -self.ys.iter().map(|y| &y.shift.pitau * &y.shift.pitau).sum::<Rat>() / rat_int(2)
    }
}

fn render_y(y: &YSpec) -> String {
    let mut parts = Vec::new();
    for (v, &c) in y.linear.iter().enumerate() {
        if c != 0 {
            parts.push(format!("{c}*v{v}"));
        }
    }
    if !y.shift.pi.is_zero() {
        parts.push(format!("{}*pi", y.shift.pi));
    }
    if !y.shift.pitau.is_zero() {
        parts.push(format!("{}*pi*tau", y.shift.pitau));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

/// `Σ_k (-1)^k Π_j θ3(z + y_j + kπ/mn | τ)`, exact below `spec.order`.
pub fn build_lhs(spec: &LatticeSumSpec) -> Result<QxSeries, CircError> {
    lhs_to(spec, &Precision::Finite(spec.order.clone()))
}

fn lhs_to(spec: &LatticeSumSpec, target: &Precision) -> Result<QxSeries, CircError> {
    spec.validate()?;
    let dim = spec.dim();
    let mn = spec.mn();
    let mut total = QxSeries::zero(dim, Precision::Exact);
    for k in 0..mn {
        let step = ShiftSpec::pi(rat(k, mn));
        let factors: Vec<LazyFactor> = spec
            .ys
            .iter()
            .map(|y| {
                let mut linear = y.linear.clone();
                linear[0] += 1;
                theta_factor(ThetaKind::Three, ArgSpec::new(linear, y.shift.add(&step), Rat::one()))
            })
            .collect();
        let term = product_to_order(dim, &factors, target)?;
        total = if k % 2 == 0 { total.add(&term)? } else { total.sub(&term)? };
    }
    Ok(total)
}

/// `H_{m,n}(y|τ)` by enumerating the lattice vectors whose term lies below
/// `spec.order`.
pub fn h_coeff(spec: &LatticeSumSpec) -> Result<QxSeries, CircError> {
    h_to(spec, &spec.order)
}

fn h_to(spec: &LatticeSumSpec, order: &QExp) -> Result<QxSeries, CircError> {
    spec.validate()?;
    let dim = spec.dim();
    let mn = spec.mn();
    let m2n = rat(spec.m as i64 * spec.m as i64 * spec.n as i64, 8);
    let b: Vec<Rat> = spec.ys.iter().map(|y| y.shift.pitau.clone()).collect();
    let half_b2: Rat = b.iter().map(|x| x * x).sum::<Rat>() / rat_int(2);
    let budget = order + &m2n + &half_b2;
    // (exponent, x-vector) -> phase (mod 1) -> number of lattice vectors
    let mut counts: BTreeMap<(QExp, XVec), BTreeMap<Rat, i64>> = BTreeMap::new();
    enumerate_fixed_sum(mn / 2, &b, &budget, |s| {
        let mut half_sq = Rat::zero();
        let mut phase = Rat::zero();
        let mut xvec = vec![0i64; dim];
        for (j, &sj) in s.iter().enumerate() {
            let y = &spec.ys[j];
            let t = rat_int(sj) + &b[j];
            half_sq += &t * &t;
            phase += &y.shift.pi * rat_int(sj);
            for (x, l) in xvec.iter_mut().zip(&y.linear) {
                *x += 2 * sj * l;
            }
        }
        let e = half_sq / rat_int(2) - &half_b2 - &m2n;
        let phase = &phase - phase.floor();
        *counts.entry((e, xvec)).or_default().entry(phase).or_insert(0) += 1;
    });
    let terms = counts.into_iter().map(|((e, x), phases)| {
        let c = phases.into_iter().fold(CycloNum::zero(), |acc, (p, n)| acc.add(&CycloNum::exp_2pi_i(&p).scale(&rat_int(n))));
        (e, x, c.scale(&rat_int(mn)))
    });
    Ok(QxSeries::from_terms(dim, Precision::Finite(order.clone()), terms))
}

/// `2m θ2(2y|2τ)` for odd `m`, `2m θ3(2y|2τ)` for even `m`, in variables
/// `(z, y)`.
pub fn h_m2_closed(m: u32, order: &QExp) -> Result<QxSeries, CircError> {
    let kind = if m % 2 == 1 { ThetaKind::Two } else { ThetaKind::Three };
    let arg = ArgSpec::var(2, 1, 2).with_tau(rat_int(2));
    let t = theta(kind, &arg, &Precision::Finite(order.clone()))?;
    Ok(t.scale_coeff(&CycloNum::from_int(2 * m as i64)))
}

/// `H_{m,n} θ2(mnz | m²nτ)`, exact below `order`.
fn rhs_to(spec: &LatticeSumSpec, order: &QExp) -> Result<QxSeries, CircError> {
    let dim = spec.dim();
    let mn = spec.mn();
    let h_factor = LazyFactor::new(Precision::Finite(spec.h_low()), move |o| match o {
        Precision::Finite(o) => h_to(spec, o).map_err(|e| SeriesError::Generator(e.to_string())),
        Precision::Exact => Err(SeriesError::Generator(KernelError::NeedsFiniteOrder.to_string())),
    });
    let tau = rat_int(spec.m as i64 * mn);
    let t = theta_factor(ThetaKind::Two, ArgSpec::var(dim, 0, mn).with_tau(tau));
    Ok(product_to_order(dim, &[h_factor, t], &Precision::Finite(order.clone()))?)
}

/// Checks the identity for `spec` coefficient by coefficient below
/// `spec.order`.
pub fn verify_fund(spec: &LatticeSumSpec) -> CheckReport {
    let started = Instant::now();
    let params = if spec.ys.is_empty() { String::new() } else { spec.params() };
    let diff = (|| -> Result<QxSeries, CircError> {
        let target = Precision::Finite(spec.order.clone());
        let lhs = lhs_to(spec, &target)?;
        let rhs = rhs_to(spec, &spec.order)?;
        Ok(lhs.sub(&rhs)?)
    })();
    match diff {
        Ok(d) => CheckReport::from_difference("fund", &params, &spec.order, &d, started),
        Err(e) => CheckReport::error("fund", &params, &spec.order, e.to_string(), started),
    }
}
