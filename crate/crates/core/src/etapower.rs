//! Powers of the Euler product from lattice sums:
//!
//! ```text
//! (q;q)^{2n}         = q^{-m²n}    (q^{2n};q^{2n}) Σ_{Σs = 2mn} q^{½Σs²} ζ_{4n}^{X(s)}
//! (q^{2n};q^{2n})^{2n} = q^{-m²n²/2} (q;q)         Σ_{Σs = mn}  q^{nΣs² + ½X(s)}
//! ```
//!
//! over `s ∈ Z^{2n}`, with `X(s) = Σ_{l=1}^{n} (s_l - s_{n+l})(2l - 1)`; the
//! results do not depend on `m ≥ 1`. [`euler_pow`] is the direct product
//! used as the oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::exactnum::{rat, rat_int, rat_string, CycloNum, Rat};
use crate::lattice::enumerate_fixed_sum;
use crate::qxseries::{product_to_order, LazyFactor, Precision, QExp, QxSeries, SeriesError};
use crate::report::{CheckReport, FirstBad, Verdict};
use crate::thetakernel::{euler, KernelError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtaError {
    #[error("n and m must be positive")]
    NonPositive,
    #[error("the exponent must be a positive even integer, got {0}")]
    BadExponent(u32),
    #[error("coefficient of q^{qexp} is {value}, not a rational integer")]
    NotInteger { qexp: String, value: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Euler,
    CorQ1,
    CorQ2,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Euler => "euler",
            Method::CorQ1 => "cor-q1",
            Method::CorQ2 => "cor-q2",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaPowResult {
    pub n: u32,
    pub order: u32,
    /// Coefficient of `q^k` for `k < order`.
    pub coeffs: Vec<BigInt>,
    pub method: Method,
}

/// Reads off integer coefficients of a q-only series at `q^0 … q^{order-1}`.
fn integer_coeffs(s: &QxSeries, order: u32) -> Result<Vec<BigInt>, EtaError> {
    let mut out = vec![BigInt::zero(); order as usize];
    for (e, _, c) in s.terms() {
        if e >= &rat_int(order as i64) {
            continue;
        }
        let not_int = || EtaError::NotInteger { qexp: rat_string(e), value: c.to_string() };
        if !e.is_integer() || e < &Rat::zero() {
            return Err(not_int());
        }
        let k = e.to_integer().to_usize().ok_or_else(not_int)?;
        out[k] = c.as_integer().ok_or_else(not_int)?;
    }
    Ok(out)
}

/// `(q^base; q^base)_∞^e` below `q^order`.
pub fn euler_pow(e: u32, base: u32, order: u32) -> Result<EtaPowResult, EtaError> {
    if e == 0 || e % 2 == 1 {
        return Err(EtaError::BadExponent(e));
    }
    if base == 0 {
        return Err(EtaError::NonPositive);
    }
    let o = Precision::Finite(rat_int(order as i64));
    let p = euler(&rat_int(base as i64), 0, &o)?;
    let s = p.pow(e)?.truncate(&o);
    Ok(EtaPowResult { n: e / 2, order, coeffs: integer_coeffs(&s, order)?, method: Method::Euler })
}

/// `X(s) = Σ_{l=1}^{n} (s_l - s_{n+l})(2l - 1)`.
fn cross(s: &[i64], n: usize) -> i64 {
    (0..n).map(|l| (s[l] - s[n + l]) * (2 * l as i64 + 1)).sum()
}

/// Lattice part of the first formula, `q^{-m²n} Σ q^{½Σs²} ζ_{4n}^X`, exact
/// below `order`. Its exponents are nonnegative.
fn q1_lattice(n: u32, m: u32, order: &QExp) -> QxSeries {
    let (n, m) = (n as i64, m as i64);
    let shift = m * m * n;
    let zeros = vec![Rat::zero(); 2 * n as usize];
    // one unit of slack over the bound, filtered below
    let budget = order + rat_int(shift + 1);
    let mut counts: BTreeMap<i64, BTreeMap<i64, i64>> = BTreeMap::new();
    enumerate_fixed_sum(2 * m * n, &zeros, &budget, |s| {
        let sq: i64 = s.iter().map(|x| x * x).sum();
        // Σs² ≡ Σs (mod 2), so the exponent is an integer
        let e = sq / 2 - shift;
        let x = cross(s, n as usize).rem_euclid(4 * n);
        *counts.entry(e).or_default().entry(x).or_insert(0) += 1;
    });
    let terms = counts.into_iter().filter(|(e, _)| &rat_int(*e) < order).map(|(e, xs)| {
        let c = xs.into_iter().fold(CycloNum::zero(), |acc, (x, k)| acc.add(&CycloNum::root(4 * n as u32, x).scale(&rat_int(k))));
        (rat_int(e), vec![], c)
    });
    QxSeries::from_terms(0, Precision::Finite(order.clone()), terms)
}

/// Lattice part of the second formula, `q^{-m²n²/2} Σ q^{nΣs² + ½X}`, exact
/// below `order`.
fn q2_lattice(n: u32, m: u32, order: &QExp) -> QxSeries {
    let (n, m) = (n as i64, m as i64);
    // nΣs² + ½X = 2n·½Σ(s_j + c_j)² - nΣc_j², c_l = (2l-1)/4n = -c_{n+l}
    let c: Vec<Rat> = (0..2 * n).map(|j| if j < n { rat(2 * j + 1, 4 * n) } else { rat(-(2 * (j - n) + 1), 4 * n) }).collect();
    let csq: Rat = c.iter().map(|x| x * x).sum();
    let pre = rat(m * m * n * n, 2);
    let budget = (order + &pre + rat_int(n) * &csq) / rat_int(2 * n) + rat_int(1);
    let mut counts: BTreeMap<i64, i64> = BTreeMap::new();
    enumerate_fixed_sum(m * n, &c, &budget, |s| {
        let sq: i64 = s.iter().map(|x| x * x).sum();
        // twice the exponent, to stay in integers
        let e2 = 2 * n * sq + cross(s, n as usize) - m * m * n * n;
        *counts.entry(e2).or_insert(0) += 1;
    });
    let terms = counts.into_iter().map(|(e2, k)| (rat(e2, 2), vec![], CycloNum::from_int(k))).filter(|(e, _, _)| e < order);
    QxSeries::from_terms(0, Precision::Finite(order.clone()), terms)
}

fn q2_low(n: u32) -> QExp {
    let n = n as i64;
    let csq: Rat = (1..=n).map(|l| rat((2 * l - 1) * (2 * l - 1), 16 * n * n)).sum::<Rat>() * rat_int(2);
    -rat_int(n) * csq
}

fn lattice_times_euler<F>(low: QExp, lattice: F, base: i64, order: u32) -> Result<QxSeries, EtaError>
where
    F: Fn(&QExp) -> QxSeries + Send + Sync,
{
    let lat = LazyFactor::new(Precision::Finite(low), move |o| match o {
        Precision::Finite(o) => Ok(lattice(o)),
        Precision::Exact => Err(SeriesError::Generator(KernelError::NeedsFiniteOrder.to_string())),
    });
    let eu = LazyFactor::new(Precision::Finite(Rat::zero()), move |o| euler(&rat_int(base), 0, o).map_err(|e| SeriesError::Generator(e.to_string())));
    Ok(product_to_order(0, &[lat, eu], &Precision::Finite(rat_int(order as i64)))?)
}

/// `(q;q)^{2n}` from the first lattice formula with parameter `m`.
pub fn cor_q1_m(n: u32, m: u32, order: u32) -> Result<EtaPowResult, EtaError> {
    if n == 0 || m == 0 {
        return Err(EtaError::NonPositive);
    }
    let s = lattice_times_euler(Rat::zero(), move |o| q1_lattice(n, m, o), 2 * n as i64, order)?;
    Ok(EtaPowResult { n, order, coeffs: integer_coeffs(&s, order)?, method: Method::CorQ1 })
}

pub fn cor_q1(n: u32, order: u32) -> Result<EtaPowResult, EtaError> {
    cor_q1_m(n, 1, order)
}

/// `(q^{2n};q^{2n})^{2n}` from the second lattice formula with parameter `m`.
pub fn cor_q2_m(n: u32, m: u32, order: u32) -> Result<EtaPowResult, EtaError> {
    if n == 0 || m == 0 {
        return Err(EtaError::NonPositive);
    }
    let s = lattice_times_euler(q2_low(n), move |o| q2_lattice(n, m, o), 1, order)?;
    Ok(EtaPowResult { n, order, coeffs: integer_coeffs(&s, order)?, method: Method::CorQ2 })
}

pub fn cor_q2(n: u32, order: u32) -> Result<EtaPowResult, EtaError> {
    cor_q2_m(n, 1, order)
}

/// One row of the comparison table: the coefficient of `q^k` in `(q;q)^{2n}`
/// by the oracle and the first formula, and that of `q^{2nk}` in
/// `(q^{2n};q^{2n})^{2n}` by the second formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub k: u32,
    pub euler: BigInt,
    pub cor_q1: BigInt,
    pub cor_q2: BigInt,
}

impl TableRow {
    pub fn agree(&self) -> bool {
        self.euler == self.cor_q1 && self.euler == self.cor_q2
    }
}

#[derive(Debug, Clone)]
pub struct Crosscheck {
    pub report: CheckReport,
    pub rows: Vec<TableRow>,
}

fn first_mismatch(a: &EtaPowResult, b: &EtaPowResult) -> Option<FirstBad> {
    a.coeffs.iter().zip(&b.coeffs).enumerate().find(|(_, (x, y))| x != y).map(|(k, (x, y))| FirstBad {
        qexp: rat_int(k as i64),
        xvec: vec![],
        coeff: CycloNum::from_rat(Rat::from_integer(y - x)),
    })
}

/// Runs the three methods (concurrently) and compares them: the first
/// formula against `(q;q)^{2n}` below `q^order`, the second against
/// `(q^{2n};q^{2n})^{2n}` below `q^{2n·order}`.
pub fn crosscheck(n: u32, order: u32) -> Crosscheck {
    let started = Instant::now();
    let params = format!("n={n}");
    let long = 2 * n * order;
    let ((e1, q1), (e2, q2)) = rayon::join(
        || rayon::join(|| euler_pow(2 * n, 1, order), || cor_q1(n, order)),
        || rayon::join(|| euler_pow(2 * n, 2 * n, long), || cor_q2(n, long)),
    );
    let ord = rat_int(order as i64);
    let (e1, q1, e2, q2) = match (e1, q1, e2, q2) {
        (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
        (a, b, c, d) => {
            let msg = [a.err(), b.err(), c.err(), d.err()].into_iter().flatten().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
            return Crosscheck { report: CheckReport::error("etapow", &params, &ord, msg, started), rows: vec![] };
        }
    };
    let rows = (0..order)
        .map(|k| TableRow {
            k,
            euler: e1.coeffs[k as usize].clone(),
            cor_q1: q1.coeffs[k as usize].clone(),
            cor_q2: q2.coeffs[(2 * n * k) as usize].clone(),
        })
        .collect();
    let mut report = CheckReport { name: "etapow".into(), params, order: ord, verdict: Verdict::Pass, first_bad: None, wall_time: 0.0 };
    if let Some(bad) = first_mismatch(&e1, &q1) {
        report.verdict = Verdict::Fail;
        report.first_bad = Some(bad);
    } else if let Some(bad) = first_mismatch(&e2, &q2) {
        report.verdict = Verdict::Fail;
        report.params.push_str(",second formula");
        report.first_bad = Some(bad);
    }
    report.wall_time = started.elapsed().as_secs_f64();
    Crosscheck { report, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(r: &EtaPowResult) -> Vec<i64> {
        r.coeffs.iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn euler_square() {
        assert_eq!(ints(&euler_pow(2, 1, 6).unwrap()), vec![1, -2, -1, 2, 1, 2]);
        assert!(matches!(euler_pow(3, 1, 6), Err(EtaError::BadExponent(3))));
    }

    #[test]
    fn q1_phases_collapse_at_n1() {
        // i^{s1 - s2} with s1 + s2 = 2 is always ±1
        let s = q1_lattice(1, 1, &rat_int(30));
        assert!(s.terms().all(|(_, _, c)| c.as_integer().is_some()));
    }

    #[test]
    fn q1_small() {
        assert_eq!(cor_q1(1, 20).unwrap().coeffs, euler_pow(2, 1, 20).unwrap().coeffs);
        assert_eq!(cor_q1_m(1, 2, 20).unwrap().coeffs, euler_pow(2, 1, 20).unwrap().coeffs);
    }

    #[test]
    fn q2_small() {
        assert_eq!(cor_q2(1, 20).unwrap().coeffs, euler_pow(2, 2, 20).unwrap().coeffs);
        assert_eq!(cor_q2(2, 20).unwrap().coeffs, euler_pow(4, 4, 20).unwrap().coeffs);
        assert_eq!(cor_q2_m(1, 2, 20).unwrap().coeffs, euler_pow(2, 2, 20).unwrap().coeffs);
    }

    #[test]
    fn crosscheck_small() {
        let c = crosscheck(1, 15);
        assert!(c.report.passed(), "{}", c.report);
        assert!(c.rows.iter().all(TableRow::agree));
    }
}
