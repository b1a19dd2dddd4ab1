//! Writes catalog identities as source text.

use crate::circsum::catalog::{entry, Params};
use crate::circsum::CircError;
use crate::exactnum::{rat_string, Rat};

fn get(p: &Params, key: &str) -> Result<i64, CircError> {
    match p.get(key) {
        Some(&v) if v >= 1 => Ok(v),
        Some(&v) => Err(CircError::BadParams(format!("{key} must be positive, got {v}"))),
        None => Err(CircError::BadParams(format!("missing parameter {key}"))),
    }
}

/// `fund` + {m:2,n:1,yset:0} gives `fund_m2_n1_yset0`; names that would
/// start with a digit get a `c`.
pub fn statement_name(name: &str, p: &Params) -> String {
    let mut s = name.replace('-', "_");
    if s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, 'c');
    }
    for (k, v) in p {
        s.push_str(&format!("_{k}{v}"));
    }
    s
}

// `k*pi/L`, dropping the division when L = 1
fn over(numer: &str, d: i64) -> String {
    if d == 1 {
        numer.to_string()
    } else {
        format!("{numer}/{d}")
    }
}

fn lhs_rhs(name: &str, p: &Params) -> Result<(Vec<&'static str>, String, String), CircError> {
    let e = entry(name).ok_or_else(|| CircError::UnknownName(name.to_string()))?;
    for k in p.keys() {
        if !e.params.contains(&k.as_str()) {
            return Err(CircError::BadParams(format!("{name} takes no parameter {k}")));
        }
    }
    let z = vec!["z"];
    let zy = vec!["z", "y"];
    Ok(match name {
        "fund" => {
            let (m, n) = (get(p, "m")?, get(p, "n")?);
            let yset = *p.get("yset").unwrap_or(&0);
            let l = m * n;
            if l % 2 != 0 {
                return Err(CircError::OddMn(l as u64));
            }
            if yset != 0 && n < 2 {
                return Err(CircError::BadParams("this y set needs n >= 2".into()));
            }
            let mut ys = vec!["0".to_string(); n as usize];
            match yset {
                0 => {}
                1 => (ys[0], ys[1]) = ("pi/4".into(), "-pi/4".into()),
                2 => (ys[0], ys[1]) = ("pi*tau/2".into(), "-pi*tau/2".into()),
                3 => (ys[0], ys[1]) = ("y".into(), "-y".into()),
                _ => return Err(CircError::BadParams(format!("unknown yset {yset}"))),
            }
            let shift = over("k*pi", l);
            let factors: Vec<String> = ys
                .iter()
                .map(|y| match y.as_str() {
                    "0" => format!("theta3(z + {shift} | tau)"),
                    y if y.starts_with('-') => format!("theta3(z - {} + {shift} | tau)", &y[1..]),
                    y => format!("theta3(z + {y} + {shift} | tau)"),
                })
                .collect();
            let lhs = format!("sum k in 0..{} sign (-1)^k : ({})", l - 1, factors.join(" * "));
            let rhs = format!("hsum({m}, {n}; {}) * theta2({l}*z | {}*tau)", ys.join(", "), m * m * n);
            (if yset == 3 { zy } else { z }, lhs, rhs)
        }
        "boona" => {
            let m = get(p, "m")?;
            let lhs = format!("sum k in 0..{} sign (-1)^k : theta3(z + {} | tau)", 2 * m - 1, over("k*pi", 2 * m));
            let rhs = format!("{} * theta2({}*z | {}*tau)", 2 * m, 2 * m, 4 * m * m);
            (z, lhs, rhs)
        }
        "gc" | "theta1-sum" => {
            let n = get(p, "n")?;
            let (kind, sign, rkind) = if name == "gc" { (3, " sign (-1)^k", 2) } else { (1, "", 3) };
            let lhs = format!("sum k in 0..{}{sign} : theta{kind}(z + {} | tau)^{}", 2 * n - 1, over("k*pi", 2 * n), 2 * n);
            let zeros = vec!["0"; 2 * n as usize].join(", ");
            let rhs = format!("hsum(1, {}; {zeros}) * theta{rkind}({}*z | {}*tau)", 2 * n, 2 * n, 2 * n);
            (z, lhs, rhs)
        }
        "2m1" => {
            let m = get(p, "m")?;
            let s = over("k*pi", 2 * m);
            let lhs = format!("sum k in 0..{} sign (-1)^k : (theta3(z + y + {s} | tau) * theta3(z - y + {s} | tau))", 2 * m - 1);
            let ykind = if m % 2 == 1 { 2 } else { 3 };
            let rhs = format!("{} * theta{ykind}(2*y | 2*tau) * theta2({}*z | {}*tau)", 2 * m, 2 * m, 2 * m * m);
            (zy, lhs, rhs)
        }
        "prop-m1" => (
            zy,
            "theta3(z + y | tau) * theta3(z - y | tau) - theta4(z + y | tau) * theta4(z - y | tau)".into(),
            "2 * theta2(2*y | 2*tau) * theta2(2*z | 2*tau)".into(),
        ),
        "prop-4z" => {
            let pair = |k: u8, a: &str| format!("theta{k}(z + y{a} | tau) * theta{k}(z - y{a} | tau)");
            let lhs = format!("{} - {} + {} - {}", pair(3, ""), pair(3, " + pi/4"), pair(4, ""), pair(4, " + pi/4"));
            (zy, lhs, "4 * theta3(2*y | 2*tau) * theta2(4*z | 8*tau)".into())
        }
        "mod-a" => (vec![], "phi(q) * psi(q^2)".into(), "psi(q)^2".into()),
        "mod-b" => (vec![], "phi(q) - phi(-q)".into(), "4 * q * psi(q^8)".into()),
        "mod-c" => (vec![], "phi(q) + phi(-q)".into(), "2 * phi(q^4)".into()),
        "mod-d" => (vec![], "phi(q)^2 - phi(-q)^2".into(), "8 * q * psi(q^4)^2".into()),
        "mod-e" => (vec![], "psi(q)^2 - phi(-q) * psi(q^2)".into(), "4 * q * psi(q^2) * psi(q^8)".into()),
        "mod-f" => (vec![], "psi(q)^2 + phi(-q) * psi(q^2)".into(), "2 * psi(q^2) * phi(q^4)".into()),
        "q1-prod" | "q2-prod" => {
            let n = get(p, "n")?;
            let by_tau = name == "q2-prod";
            let mut factors = Vec::new();
            for j in 1..=n {
                let s = if by_tau { over(&format!("{}*pi*tau", 2 * j - 1), 4 * n) } else { over(&format!("{}*pi", 2 * j - 1), 4 * n) };
                factors.push(format!("theta3(z + {s} | tau)"));
                factors.push(format!("theta3(z - {s} | tau)"));
            }
            let (base, rtheta) = if by_tau {
                (format!("q^(1/{})", 2 * n), format!("theta3(z | tau/{})", 2 * n))
            } else {
                (format!("q^{}", 2 * n), format!("theta3({}*z | {}*tau)", 2 * n, 2 * n))
            };
            factors.push(format!("poch({base}; {base})"));
            (z, factors.join(" * "), format!("poch(q; q)^{} * {rtheta}", 2 * n))
        }
        _ => return Err(CircError::UnknownName(name.to_string())),
    })
}

/// One `identity` block for a catalog entry.
pub fn catalog_statement(name: &str, p: &Params, order: &Rat) -> Result<String, CircError> {
    let (vars, lhs, rhs) = lhs_rhs(name, p)?;
    let mut s = format!("identity {} {{\n  order {};\n", statement_name(name, p), rat_string(order));
    if !vars.is_empty() {
        s.push_str(&format!("  vars {};\n", vars.join(", ")));
    }
    s.push_str(&format!("  {lhs}\n    == {rhs}\n}}\n"));
    Ok(s)
}

/// A whole script, blocks separated by blank lines.
pub fn catalog_script(runs: &[(String, Params, Rat)]) -> Result<String, CircError> {
    let blocks = runs.iter().map(|(n, p, o)| catalog_statement(n, p, o)).collect::<Result<Vec<_>, _>>()?;
    Ok(blocks.join("\n"))
}
