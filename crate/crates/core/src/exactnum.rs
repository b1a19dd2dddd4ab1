//! Exact rationals and elements of the cyclotomic fields Q(ζ_N).
//!
//! A [`CycloNum`] stores its coordinates in the power basis
//! `1, ζ_N, …, ζ_N^{φ(N)-1}` after reduction modulo the N-th cyclotomic
//! polynomial, so two elements of the same field are equal iff their
//! coordinate vectors are equal. Binary operations between elements of
//! different fields promote both sides to `Q(ζ_lcm)`.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Floor of a rational as `i64`. Panics on overflow, which would mean a
/// summation index far outside anything a truncated series can hold.
pub fn rat_floor(r: &Rat) -> i64 {
    r.floor().to_integer().to_i64().expect("rational floor overflows i64")
}

pub fn rat_ceil(r: &Rat) -> i64 {
    r.ceil().to_integer().to_i64().expect("rational ceil overflows i64")
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

/// Formats a rational as `p` or `p/q`.
pub fn rat_string(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CycloError {
    #[error("cannot promote an element of Q(zeta_{from}) to Q(zeta_{to}): {from} does not divide {to}")]
    NotADivisor { from: u32, to: u32 },
}

fn phi_cache() -> &'static RwLock<HashMap<u32, Arc<[i64]>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<[i64]>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Coefficients (lowest degree first) of the cyclotomic polynomial Φ_n.
///
/// Computed by exact division of `x^n - 1` by `Φ_d` for every proper divisor
/// `d`, memoized for the lifetime of the process. Concurrent first fills
/// compute the same value, so a race only costs duplicated work.
pub fn cyclotomic_poly(n: u32) -> Arc<[i64]> {
    assert!(n >= 1, "cyclotomic polynomial index must be positive");
    if let Some(p) = phi_cache().read().expect("phi cache poisoned").get(&n) {
        return p.clone();
    }
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let divisor = cyclotomic_poly(d);
            poly = exact_div(&poly, &divisor);
        }
    }
    let poly: Arc<[i64]> = poly.into();
    phi_cache().write().expect("phi cache poisoned").entry(n).or_insert_with(|| poly.clone()).clone()
}

// Division of integer polynomials by a monic divisor; the remainder must vanish.
fn exact_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dd = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dd;
    let mut quo = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dd];
        quo[i] = c;
        if c != 0 {
            for (t, &dc) in den.iter().enumerate() {
                rem[i + t] -= c * dc;
            }
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0), "inexact cyclotomic division");
    quo
}

/// Euler's totient, as the degree of Φ_n.
pub fn totient(n: u32) -> usize {
    cyclotomic_poly(n).len() - 1
}

fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Reduces a polynomial in ζ_n (coefficients lowest degree first) modulo Φ_n.
fn reduce(mut poly: Vec<Rat>, n: u32) -> Vec<Rat> {
    let phi = cyclotomic_poly(n);
    let d = phi.len() - 1;
    if poly.len() > d {
        for i in (d..poly.len()).rev() {
            if poly[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut poly[i], Rat::zero());
            for (t, &pc) in phi[..d].iter().enumerate() {
                if pc != 0 {
                    poly[i - d + t] -= &c * BigInt::from(pc);
                }
            }
        }
    }
    poly.resize(d, Rat::zero());
    poly
}

/// An exact element of Q(ζ_N).
#[derive(Clone, Debug)]
pub struct CycloNum {
    order: u32,
    coeffs: Vec<Rat>,
}

impl CycloNum {
    pub fn zero() -> Self {
        Self::from_rat(Rat::zero())
    }

    pub fn one() -> Self {
        Self::from_rat(Rat::one())
    }

    pub fn from_rat(r: Rat) -> Self {
        CycloNum { order: 1, coeffs: vec![r] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(rat_int(n))
    }

    /// Builds an element from power-basis coordinates, reducing modulo Φ_N.
    pub fn from_coeffs(order: u32, coeffs: Vec<Rat>) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        CycloNum { order, coeffs: reduce(coeffs, order) }
    }

    /// ζ_N^k.
    pub fn root(order: u32, k: i64) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let e = k.rem_euclid(order as i64) as usize;
        let mut poly = vec![Rat::zero(); e + 1];
        poly[e] = Rat::one();
        Self::from_coeffs(order, poly)
    }

    /// `e^{2πi r}` for a rational `r`.
    pub fn exp_2pi_i(r: &Rat) -> Self {
        let den = r.denom().to_u32().expect("root of unity order too large");
        let num = (r.numer() % r.denom()).to_i64().expect("numerator out of range");
        Self::root(den, num)
    }

    /// `e^{iπ r}` for a rational `r`.
    pub fn exp_pi_i(r: &Rat) -> Self {
        Self::exp_2pi_i(&(r / rat_int(2)))
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Power-basis coordinates, length φ(order).
    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value if the element lies in Q.
    pub fn as_rat(&self) -> Option<&Rat> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// The integer value if the element lies in Z.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rat().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    /// Re-expresses the element in Q(ζ_m) using ζ_N = ζ_m^{m/N}.
    pub fn promote(&self, m: u32) -> Result<Self, CycloError> {
        if m == 0 || !m.is_multiple_of(self.order) {
            return Err(CycloError::NotADivisor { from: self.order, to: m });
        }
        if m == self.order {
            return Ok(self.clone());
        }
        let step = (m / self.order) as usize;
        let mut poly = vec![Rat::zero(); (self.coeffs.len().max(1) - 1) * step + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                poly[j * step] = c.clone();
            }
        }
        Ok(Self::from_coeffs(m, poly))
    }

    fn promote_pair<'a>(a: &'a Self, b: &'a Self) -> (Cow<'a, Self>, Cow<'a, Self>, u32) {
        if a.order == b.order {
            return (Cow::Borrowed(a), Cow::Borrowed(b), a.order);
        }
        let l = lcm(a.order, b.order);
        let pa = if a.order == l { Cow::Borrowed(a) } else { Cow::Owned(a.promote(l).unwrap()) };
        let pb = if b.order == l { Cow::Borrowed(b) } else { Cow::Owned(b.promote(l).unwrap()) };
        (pa, pb, l)
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let (a, b, order) = Self::promote_pair(self, other);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CycloNum { order, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        CycloNum { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.order == 1 {
            return other.scale(&self.coeffs[0]);
        }
        if other.order == 1 {
            return self.scale(&other.coeffs[0]);
        }
        let (a, b, order) = Self::promote_pair(self, other);
        let len = a.coeffs.len() + b.coeffs.len() - 1;
        let mut poly = vec![Rat::zero(); len];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    poly[i + j] += x * y;
                }
            }
        }
        CycloNum { order, coeffs: reduce(poly, order) }
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return CycloNum { order: self.order, coeffs: vec![Rat::zero(); self.coeffs.len()] };
        }
        CycloNum { order: self.order, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Image under ζ_N ↦ e^{2πi/N}. Diagnostic only.
    pub fn to_complex(&self) -> Complex64 {
        let n = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| {
                let theta = 2.0 * std::f64::consts::PI * (j as f64) / n;
                Complex64::from_polar(rat_to_f64(c), theta)
            })
            .sum()
    }
}

impl PartialEq for CycloNum {
    fn eq(&self, other: &Self) -> bool {
        let (a, b, _) = Self::promote_pair(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycloNum {}

impl Default for CycloNum {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for CycloNum {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<Rat> for CycloNum {
    fn from(r: Rat) -> Self {
        Self::from_rat(r)
    }
}

impl Add for &CycloNum {
    type Output = CycloNum;
    fn add(self, rhs: &CycloNum) -> CycloNum {
        CycloNum::add(self, rhs)
    }
}

impl Sub for &CycloNum {
    type Output = CycloNum;
    fn sub(self, rhs: &CycloNum) -> CycloNum {
        CycloNum::sub(self, rhs)
    }
}

impl Mul for &CycloNum {
    type Output = CycloNum;
    fn mul(self, rhs: &CycloNum) -> CycloNum {
        CycloNum::mul(self, rhs)
    }
}

impl Neg for &CycloNum {
    type Output = CycloNum;
    fn neg(self) -> CycloNum {
        CycloNum::neg(self)
    }
}

/// Power-basis rendering, e.g. `1 - z8^2` or `3/2*z12 + z12^3`.
impl fmt::Display for CycloNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let unit = match j {
                0 => None,
                1 => Some(format!("z{}", self.order)),
                _ => Some(format!("z{}^{}", self.order, j)),
            };
            match unit {
                None => f.write_str(&rat_string(&mag))?,
                Some(u) if mag.is_one() => f.write_str(&u)?,
                Some(u) => write!(f, "{}*{}", rat_string(&mag), u)?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}
