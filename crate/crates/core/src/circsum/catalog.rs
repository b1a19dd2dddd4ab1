//! Named identities, each built from its own displayed form. Nothing here
//! goes through [`build_lhs`](super::build_lhs) or
//! [`h_coeff`](super::h_coeff); the lattice sums are recomputed by a plain
//! box search.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::CircError;
use crate::exactnum::{rat, rat_int, rat_to_f64, CycloNum, Rat};
use crate::qxseries::{product_to_order, ArgSpec, LazyFactor, Precision, QExp, QxSeries, SeriesError, ShiftSpec, XVec};
use crate::report::CheckReport;
use crate::thetakernel::{euler, phi_at, psi_at, theta_factor, KernelError, ThetaKind};

pub type Params = BTreeMap<String, i64>;

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    pub default_order: i64,
    pub statement: &'static str,
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "fund",
        params: &["m", "n", "yset"],
        default_order: 20,
        statement: "sum_k (-1)^k prod_j theta3(z+y_j+k*pi/mn|tau) = H_{m,n}(y|tau) theta2(mnz|m^2 n tau); yset 0: y=0, 1: (pi/4,-pi/4,0..), 2: (pi*tau/2,-pi*tau/2,0..), 3: (y,-y,0..)",
    },
    CatalogEntry {
        name: "boona",
        params: &["m"],
        default_order: 20,
        statement: "sum_{k<2m} (-1)^k theta3(z+k*pi/2m|tau) = 2m theta2(2mz|4m^2 tau)",
    },
    CatalogEntry {
        name: "gc",
        params: &["n"],
        default_order: 20,
        statement: "sum_{k<2n} (-1)^k theta3^{2n}(z+k*pi/2n|tau) = H_{1,2n}(0|tau) theta2(2nz|2n tau)",
    },
    CatalogEntry {
        name: "theta1-sum",
        params: &["n"],
        default_order: 30,
        statement: "sum_{k<2n} theta1^{2n}(z+k*pi/2n|tau) = H_{1,2n}(0|tau) theta3(2nz|2n tau)",
    },
    CatalogEntry {
        name: "2m1",
        params: &["m"],
        default_order: 20,
        statement: "sum_{k<2m} (-1)^k theta3(z+y+k*pi/2m|tau) theta3(z-y+k*pi/2m|tau) = 2m theta2|3(2y|2tau) theta2(2mz|2m^2 tau)",
    },
    CatalogEntry {
        name: "prop-m1",
        params: &[],
        default_order: 30,
        statement: "theta3(z+y)theta3(z-y) - theta4(z+y)theta4(z-y) = 2 theta2(2y|2tau) theta2(2z|2tau)",
    },
    CatalogEntry {
        name: "prop-4z",
        params: &[],
        default_order: 30,
        statement: "theta3 theta3 - theta3 theta3 (+pi/4) + theta4 theta4 - theta4 theta4 (+pi/4) = 4 theta3(2y|2tau) theta2(4z|8tau)",
    },
    CatalogEntry { name: "mod-a", params: &[], default_order: 100, statement: "phi(q) psi(q^2) = psi(q)^2" },
    CatalogEntry { name: "mod-b", params: &[], default_order: 100, statement: "phi(q) - phi(-q) = 4q psi(q^8)" },
    CatalogEntry { name: "mod-c", params: &[], default_order: 100, statement: "phi(q) + phi(-q) = 2 phi(q^4)" },
    CatalogEntry { name: "mod-d", params: &[], default_order: 100, statement: "phi(q)^2 - phi(-q)^2 = 8q psi(q^4)^2" },
    CatalogEntry { name: "mod-e", params: &[], default_order: 100, statement: "psi(q)^2 - phi(-q) psi(q^2) = 4q psi(q^2) psi(q^8)" },
    CatalogEntry { name: "mod-f", params: &[], default_order: 100, statement: "psi(q)^2 + phi(-q) psi(q^2) = 2 psi(q^2) phi(q^4)" },
    CatalogEntry {
        name: "q1-prod",
        params: &["n"],
        default_order: 30,
        statement: "prod_j theta3(z+(2j-1)pi/4n) theta3(z-(2j-1)pi/4n) (q^{2n};q^{2n}) = (q;q)^{2n} theta3(2nz|2n tau)",
    },
    CatalogEntry {
        name: "q2-prod",
        params: &["n"],
        default_order: 30,
        statement: "prod_j theta3(z+(2j-1)pi*tau/4n) theta3(z-(2j-1)pi*tau/4n) (q^{1/2n};q^{1/2n}) = (q;q)^{2n} theta3(z|tau/2n)",
    },
];

pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name == name)
}

pub fn params(pairs: &[(&str, i64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn params_string(p: &Params) -> String {
    p.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
}

/// The standard run: every identity over the parameter ranges it is
/// expected to hold for.
pub fn default_suite() -> Vec<(&'static str, Params)> {
    let mut out = Vec::new();
    for (m, n) in [(2, 1), (4, 1), (1, 2), (2, 2), (1, 4), (2, 3), (3, 2)] {
        let ysets: &[i64] = match n {
            1 => &[0],
            2 => &[0, 1, 2, 3],
            _ => &[0, 1, 2],
        };
        for &y in ysets {
            out.push(("fund", params(&[("m", m), ("n", n), ("yset", y)])));
        }
    }
    for m in 1..=4 {
        out.push(("boona", params(&[("m", m)])));
    }
    for n in 1..=3 {
        out.push(("gc", params(&[("n", n)])));
    }
    for n in 1..=3 {
        out.push(("theta1-sum", params(&[("n", n)])));
    }
    for m in 1..=4 {
        out.push(("2m1", params(&[("m", m)])));
    }
    for name in ["prop-m1", "prop-4z", "mod-a", "mod-b", "mod-c", "mod-d", "mod-e", "mod-f"] {
        out.push((name, Params::new()));
    }
    for n in 1..=3 {
        out.push(("q1-prod", params(&[("n", n)])));
    }
    for n in 1..=3 {
        out.push(("q2-prod", params(&[("n", n)])));
    }
    out
}

/// Both sides of a named identity, each exact below `order`.
#[derive(Debug, Clone)]
pub struct Sides {
    pub dim: usize,
    pub lhs: QxSeries,
    pub rhs: QxSeries,
}

fn get(p: &Params, key: &str) -> Result<i64, CircError> {
    let v = *p.get(key).ok_or_else(|| CircError::BadParams(format!("missing parameter {key}")))?;
    if v < 1 {
        return Err(CircError::BadParams(format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn check_keys(entry: &CatalogEntry, p: &Params) -> Result<(), CircError> {
    for k in p.keys() {
        if !entry.params.contains(&k.as_str()) {
            return Err(CircError::BadParams(format!("{} takes no parameter {k}", entry.name)));
        }
    }
    Ok(())
}

fn gen_err(e: KernelError) -> SeriesError {
    match e {
        KernelError::Series(s) => s,
        other => SeriesError::Generator(other.to_string()),
    }
}

fn finite_or_err(o: &Precision) -> Result<&QExp, SeriesError> {
    o.finite().ok_or_else(|| SeriesError::Generator(KernelError::NeedsFiniteOrder.to_string()))
}

/// `θ_kind(Σ lin_v z_v + aπ + bπτ | cτ)`.
fn th<'a>(kind: ThetaKind, lin: &[i64], a: Rat, b: Rat, c: Rat) -> LazyFactor<'a> {
    theta_factor(kind, ArgSpec::new(lin.to_vec(), ShiftSpec::new(a, b), c))
}

fn constant<'a>(dim: usize, c: i64) -> LazyFactor<'a> {
    LazyFactor::ready(QxSeries::constant(dim, CycloNum::from_int(c)))
}

fn q_power<'a>(dim: usize, e: Rat) -> LazyFactor<'a> {
    LazyFactor::ready(QxSeries::monomial(dim, CycloNum::one(), e, vec![0; dim]))
}

/// `(q^base; q^base)_∞`, whose lowest exponent is 0.
fn euler_factor<'a>(base: Rat, dim: usize) -> LazyFactor<'a> {
    LazyFactor::new(Precision::Finite(Rat::zero()), move |o| euler(&base, dim, o).map_err(gen_err))
}

fn phi_factor<'a>(sign: i64, r: i64) -> LazyFactor<'a> {
    LazyFactor::new(Precision::Finite(Rat::zero()), move |o| phi_at(sign, &rat_int(r), 0, o).map_err(gen_err))
}

fn psi_factor<'a>(sign: i64, r: i64) -> LazyFactor<'a> {
    LazyFactor::new(Precision::Finite(Rat::zero()), move |o| psi_at(sign, &rat_int(r), 0, o).map_err(gen_err))
}

/// `mn q^{-m²n/8} Σ_{Σs = mn/2} q^{½Σs²} e^{2iΣ s_j y_j}` by scanning a box
/// for `s_1..s_{n-1}`; `y_j = lin_j·z + a_j π + b_j πτ`.
fn lattice_sum_box(m: i64, n: i64, ys: &[(Vec<i64>, Rat, Rat)], dim: usize, order: &QExp) -> QxSeries {
    let mn = m * n;
    let pre = rat(m * m * n, 8);
    let bmax = ys.iter().map(|(_, _, b)| rat_to_f64(b).abs()).fold(0.0, f64::max);
    let limit = rat_to_f64(&(order + &pre)) + bmax * bmax * n as f64;
    let radius = ((2.0 * limit.max(0.0)).sqrt() + 2.0 * bmax + 2.0).ceil() as i64;
    let mut acc: BTreeMap<(QExp, XVec), CycloNum> = BTreeMap::new();
    let free = (n - 1) as usize;
    let mut s = vec![-radius; free];
    loop {
        let last = mn / 2 - s.iter().sum::<i64>();
        let all: Vec<i64> = s.iter().copied().chain(std::iter::once(last)).collect();
        // exponent -m²n/8 + ½Σs² + Σ s_j b_j, filtered in floating point first
        let approx: f64 = -rat_to_f64(&pre)
            + all.iter().map(|&x| (x * x) as f64 / 2.0).sum::<f64>()
            + all.iter().zip(ys).map(|(&x, (_, _, b))| x as f64 * rat_to_f64(b)).sum::<f64>();
        if approx < rat_to_f64(order) + 1e-6 {
            let mut e = -pre.clone();
            let mut phase = Rat::zero();
            let mut x = vec![0i64; dim];
            for (&sj, (lin, a, b)) in all.iter().zip(ys) {
                e += rat(sj * sj, 2) + rat_int(sj) * b;
                phase += rat_int(sj) * a;
                for (xv, l) in x.iter_mut().zip(lin) {
                    *xv += 2 * sj * l;
                }
            }
            if &e < order {
                let c = CycloNum::exp_2pi_i(&(&phase - phase.floor())).scale(&rat_int(mn));
                let slot = acc.entry((e, x)).or_insert_with(CycloNum::zero);
                *slot = slot.add(&c);
            }
        }
        let mut i = 0;
        loop {
            if i == free {
                return QxSeries::from_terms(dim, Precision::Finite(order.clone()), acc.into_iter().map(|((e, x), c)| (e, x, c)));
            }
            s[i] += 1;
            if s[i] <= radius {
                break;
            }
            s[i] = -radius;
            i += 1;
        }
    }
}

fn lattice_factor<'a>(m: i64, n: i64, ys: Vec<(Vec<i64>, Rat, Rat)>, dim: usize) -> LazyFactor<'a> {
    // with Σ b_j = 0 the exponents are bounded below by -½Σ b_j²
    let low = -ys.iter().map(|(_, _, b)| b * b).sum::<Rat>() / rat_int(2);
    LazyFactor::new(Precision::Finite(low), move |o| Ok(lattice_sum_box(m, n, &ys, dim, finite_or_err(o)?)))
}

struct Builder {
    dim: usize,
    target: Precision,
}

impl Builder {
    fn prod(&self, factors: Vec<LazyFactor<'_>>) -> Result<QxSeries, CircError> {
        Ok(product_to_order(self.dim, &factors, &self.target)?)
    }

    /// `Σ_k sign(k) · Π factors(k)`.
    fn sum<'a, F>(&self, range: std::ops::Range<i64>, alternating: bool, mut factors: F) -> Result<QxSeries, CircError>
    where
        F: FnMut(i64) -> Vec<LazyFactor<'a>>,
    {
        let mut acc = QxSeries::zero(self.dim, Precision::Exact);
        for k in range {
            let t = self.prod(factors(k))?;
            acc = if alternating && k % 2 != 0 { acc.sub(&t)? } else { acc.add(&t)? };
        }
        Ok(acc)
    }
}

fn zshift(kind: ThetaKind, lin: &[i64], a: Rat) -> LazyFactor<'static> {
    th(kind, lin, a, Rat::zero(), Rat::one())
}

pub fn build_sides(name: &str, p: &Params, order: &QExp) -> Result<Sides, CircError> {
    use ThetaKind::*;
    let entry = entry(name).ok_or_else(|| CircError::UnknownName(name.to_string()))?;
    check_keys(entry, p)?;
    let dim = match name {
        "fund" if p.get("yset") == Some(&3) => 2,
        "2m1" | "prop-m1" | "prop-4z" => 2,
        n if n.starts_with("mod-") => 0,
        _ => 1,
    };
    let b = Builder { dim, target: Precision::Finite(order.clone()) };
    let z = [1];
    let zp = [1, 1];
    let zm = [1, -1];
    let zero = Rat::zero;
    let (lhs, rhs) = match name {
        "fund" => {
            let m = get(p, "m")?;
            let n = get(p, "n")?;
            let yset = *p.get("yset").unwrap_or(&0);
            if (m * n) % 2 != 0 {
                return Err(CircError::OddMn((m * n) as u64));
            }
            let mut ys: Vec<(Vec<i64>, Rat, Rat)> = (0..n).map(|_| (vec![0; dim], zero(), zero())).collect();
            match yset {
                0 => {}
                1..=3 if n < 2 => return Err(CircError::BadParams("this y set needs n >= 2".into())),
                1 => {
                    ys[0].1 = rat(1, 4);
                    ys[1].1 = rat(-1, 4);
                }
                2 => {
                    ys[0].2 = rat(1, 2);
                    ys[1].2 = rat(-1, 2);
                }
                3 => {
                    ys[0].0[1] = 1;
                    ys[1].0[1] = -1;
                }
                _ => return Err(CircError::BadParams(format!("unknown yset {yset}"))),
            }
            let lhs = b.sum(0..m * n, true, |k| {
                ys.iter()
                    .map(|(lin, a, bb)| {
                        let mut l = lin.clone();
                        l[0] += 1;
                        th(Three, &l, a + rat(k, m * n), bb.clone(), Rat::one())
                    })
                    .collect()
            })?;
            let zlin: Vec<i64> = (0..dim).map(|v| if v == 0 { m * n } else { 0 }).collect();
            let rhs = b.prod(vec![lattice_factor(m, n, ys.clone(), dim), th(Two, &zlin, zero(), zero(), rat_int(m * m * n))])?;
            (lhs, rhs)
        }
        "boona" => {
            let m = get(p, "m")?;
            let lhs = b.sum(0..2 * m, true, |k| vec![zshift(Three, &z, rat(k, 2 * m))])?;
            let rhs = b.prod(vec![constant(1, 2 * m), th(Two, &[2 * m], zero(), zero(), rat_int(4 * m * m))])?;
            (lhs, rhs)
        }
        "gc" | "theta1-sum" => {
            let n = get(p, "n")?;
            let (kind, alternating, rhs_kind) = if name == "gc" { (Three, true, Two) } else { (One, false, Three) };
            let lhs = b.sum(0..2 * n, alternating, |k| (0..2 * n).map(|_| zshift(kind, &z, rat(k, 2 * n))).collect())?;
            let ys = (0..2 * n).map(|_| (vec![0], zero(), zero())).collect();
            let rhs = b.prod(vec![lattice_factor(1, 2 * n, ys, 1), th(rhs_kind, &[2 * n], zero(), zero(), rat_int(2 * n))])?;
            (lhs, rhs)
        }
        "2m1" => {
            let m = get(p, "m")?;
            let lhs = b.sum(0..2 * m, true, |k| vec![zshift(Three, &zp, rat(k, 2 * m)), zshift(Three, &zm, rat(k, 2 * m))])?;
            let ykind = if m % 2 == 1 { Two } else { Three };
            let rhs = b.prod(vec![
                constant(2, 2 * m),
                th(ykind, &[0, 2], zero(), zero(), rat_int(2)),
                th(Two, &[2 * m, 0], zero(), zero(), rat_int(2 * m * m)),
            ])?;
            (lhs, rhs)
        }
        "prop-m1" => {
            let a = b.prod(vec![zshift(Three, &zp, zero()), zshift(Three, &zm, zero())])?;
            let c = b.prod(vec![zshift(Four, &zp, zero()), zshift(Four, &zm, zero())])?;
            let rhs = b.prod(vec![constant(2, 2), th(Two, &[0, 2], zero(), zero(), rat_int(2)), th(Two, &[2, 0], zero(), zero(), rat_int(2))])?;
            (a.sub(&c)?, rhs)
        }
        "prop-4z" => {
            let pair = |kind, a: Rat| b.prod(vec![zshift(kind, &zp, a.clone()), zshift(kind, &zm, a)]);
            let lhs = pair(Three, zero())?.sub(&pair(Three, rat(1, 4))?)?.add(&pair(Four, zero())?)?.sub(&pair(Four, rat(1, 4))?)?;
            let rhs = b.prod(vec![constant(2, 4), th(Three, &[0, 2], zero(), zero(), rat_int(2)), th(Two, &[4, 0], zero(), zero(), rat_int(8))])?;
            (lhs, rhs)
        }
        "mod-a" => (b.prod(vec![phi_factor(1, 1), psi_factor(1, 2)])?, b.prod(vec![psi_factor(1, 1), psi_factor(1, 1)])?),
        "mod-b" => (
            b.prod(vec![phi_factor(1, 1)])?.sub(&b.prod(vec![phi_factor(-1, 1)])?)?,
            b.prod(vec![constant(0, 4), q_power(0, rat_int(1)), psi_factor(1, 8)])?,
        ),
        "mod-c" => (b.prod(vec![phi_factor(1, 1)])?.add(&b.prod(vec![phi_factor(-1, 1)])?)?, b.prod(vec![constant(0, 2), phi_factor(1, 4)])?),
        "mod-d" => (
            b.prod(vec![phi_factor(1, 1), phi_factor(1, 1)])?.sub(&b.prod(vec![phi_factor(-1, 1), phi_factor(-1, 1)])?)?,
            b.prod(vec![constant(0, 8), q_power(0, rat_int(1)), psi_factor(1, 4), psi_factor(1, 4)])?,
        ),
        "mod-e" => (
            b.prod(vec![psi_factor(1, 1), psi_factor(1, 1)])?.sub(&b.prod(vec![phi_factor(-1, 1), psi_factor(1, 2)])?)?,
            b.prod(vec![constant(0, 4), q_power(0, rat_int(1)), psi_factor(1, 2), psi_factor(1, 8)])?,
        ),
        "mod-f" => (
            b.prod(vec![psi_factor(1, 1), psi_factor(1, 1)])?.add(&b.prod(vec![phi_factor(-1, 1), psi_factor(1, 2)])?)?,
            b.prod(vec![constant(0, 2), psi_factor(1, 2), phi_factor(1, 4)])?,
        ),
        "q1-prod" | "q2-prod" => {
            let n = get(p, "n")?;
            let tau_shift = name == "q2-prod";
            let mut factors = Vec::new();
            for j in 1..=n {
                let s = rat(2 * j - 1, 4 * n);
                for sign in [1, -1] {
                    let (a, bb) = if tau_shift { (zero(), &s * rat_int(sign)) } else { (&s * rat_int(sign), zero()) };
                    factors.push(th(Three, &z, a, bb, Rat::one()));
                }
            }
            let (base, rhs_theta) = if tau_shift {
                (rat(1, 2 * n), th(Three, &z, zero(), zero(), rat(1, 2 * n)))
            } else {
                (rat_int(2 * n), th(Three, &[2 * n], zero(), zero(), rat_int(2 * n)))
            };
            factors.push(euler_factor(base, 1));
            let lhs = b.prod(factors)?;
            let mut rfactors: Vec<LazyFactor> = (0..2 * n).map(|_| euler_factor(Rat::one(), 1)).collect();
            rfactors.push(rhs_theta);
            (lhs, b.prod(rfactors)?)
        }
        _ => return Err(CircError::UnknownName(name.to_string())),
    };
    Ok(Sides { dim, lhs, rhs })
}

/// Builds and compares both sides of a catalog identity.
pub fn verify_named(name: &str, p: &Params, order: &QExp) -> CheckReport {
    let started = Instant::now();
    let ps = params_string(p);
    match build_sides(name, p, order).and_then(|s| Ok(s.lhs.sub(&s.rhs)?)) {
        Ok(d) => CheckReport::from_difference(name, &ps, order, &d, started),
        Err(e) => CheckReport::error(name, &ps, order, e.to_string(), started),
    }
}

/// `φ²(q) - φ²(-q) = 8qψ²(q⁴)` by composition: the left side factors as
/// `(φ(q) - φ(-q))(φ(q) + φ(-q)) = 4qψ(q⁸)·2φ(q⁴)`, and `φ(q⁴)ψ(q⁸) = ψ²(q⁴)`
/// is the first identity at `q⁴`. Each link is checked separately.
pub fn mod_d_composed(order: &QExp) -> CheckReport {
    let started = Instant::now();
    let run = || -> Result<QxSeries, CircError> {
        let b = Builder { dim: 0, target: Precision::Finite(order.clone()) };
        let lhs = b.prod(vec![phi_factor(1, 1), phi_factor(1, 1)])?.sub(&b.prod(vec![phi_factor(-1, 1), phi_factor(-1, 1)])?)?;
        let from_bc = b.prod(vec![constant(0, 8), q_power(0, rat_int(1)), psi_factor(1, 8), phi_factor(1, 4)])?;
        let target = b.prod(vec![constant(0, 8), q_power(0, rat_int(1)), psi_factor(1, 4), psi_factor(1, 4)])?;
        let first = lhs.sub(&from_bc)?;
        if first.first_nonzero_below(&first.order().clone())?.is_some() {
            return Ok(first);
        }
        Ok(from_bc.sub(&target)?)
    };
    match run() {
        Ok(d) => CheckReport::from_difference("mod-d", "via mod-b*mod-c", order, &d, started),
        Err(e) => CheckReport::error("mod-d", "via mod-b*mod-c", order, e.to_string(), started),
    }
}

/// Runs checks concurrently; reports come back in input order.
pub fn run_suite(items: &[(String, Params, QExp)]) -> Vec<CheckReport> {
    items.par_iter().map(|(name, p, o)| verify_named(name, p, o)).collect()
}

/// The default suite at each identity's default order, or at `order` when
/// given.
pub fn default_runs(order: Option<&QExp>) -> Vec<(String, Params, QExp)> {
    default_suite()
        .into_iter()
        .map(|(name, p)| {
            let o = order.cloned().unwrap_or_else(|| rat_int(entry(name).expect("suite names are in the catalog").default_order));
            (name.to_string(), p, o)
        })
        .collect()
}
