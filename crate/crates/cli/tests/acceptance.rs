use std::f64::consts::PI;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C;

use thetacirc::circsum::catalog::{build_sides, default_runs, mod_d_composed, params, run_suite, verify_named, Params};
use thetacirc::circsum::{h_coeff, h_m2_closed, verify_fund, LatticeSumSpec, YSpec};
use thetacirc::dsl::{self, BUNDLED_CATALOG};
use thetacirc::etapower::{cor_q1_m, cor_q2_m, crosscheck};
use thetacirc::exactnum::{rat, rat_int, CycloNum};
use thetacirc::qxseries::{ArgSpec, Precision, QxSeries, ShiftSpec};
use thetacirc::report::{CheckReport, Verdict};
use thetacirc::thetakernel::{eval_complex, phi_psi_relations, shift_relations, theta, theta_product, ThetaKind};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn all_pass(reports: &[CheckReport]) -> Result<(), String> {
    match reports.iter().find(|r| !r.passed()) {
        Some(r) => Err(r.to_string()),
        None => Ok(()),
    }
}

fn zero_below(d: &QxSeries, order: i64) -> Result<(), String> {
    let o = Precision::Finite(rat_int(order));
    ensure(d.order() >= &o, || format!("difference only certified below q^{}", d.order()))?;
    match d.first_nonzero_below(&o).map_err(|e| e.to_string())? {
        None => Ok(()),
        Some((e, x, c)) => Err(format!("difference at q^{e} x^{x:?}: {c}")),
    }
}

fn c1_triple_product() -> Outcome {
    let started = Instant::now();
    let o = Precision::Finite(rat_int(50));
    for kind in [ThetaKind::One, ThetaKind::Two, ThetaKind::Three, ThetaKind::Four] {
        let arg = ArgSpec::var(1, 0, 1);
        let sum = theta(kind, &arg, &o).map_err(|e| e.to_string())?;
        let prod = theta_product(kind, &arg, &o).map_err(|e| e.to_string())?;
        zero_below(&sum.sub(&prod).map_err(|e| e.to_string())?, 50).map_err(|e| format!("{kind}: {e}"))?;
    }
    let t = started.elapsed().as_secs_f64();
    ensure(t < 5.0, || format!("took {t:.1}s"))?;
    Ok(format!("theta1..theta4 sum = product to q^50 ({t:.2}s)"))
}

fn c2_shift_tables() -> Outcome {
    let rels = shift_relations(&rat_int(20)).map_err(|e| e.to_string())?;
    ensure(rels.len() == 16, || format!("{} relations", rels.len()))?;
    for r in &rels {
        ensure(r.order() >= Precision::Finite(rat_int(20)), || format!("{}: order {}", r.label, r.order()))?;
        if let Some(d) = r.first_difference().map_err(|e| e.to_string())? {
            return Err(format!("{}: {d:?}", r.label));
        }
    }
    Ok("16 shift relations exact to q^20".into())
}

fn c3_phi_psi() -> Outcome {
    let rels = phi_psi_relations(&rat_int(50)).map_err(|e| e.to_string())?;
    for r in &rels {
        ensure(r.order() >= Precision::Finite(rat_int(50)), || format!("{}: order {}", r.label, r.order()))?;
        if let Some(d) = r.first_difference().map_err(|e| e.to_string())? {
            return Err(format!("{}: {d:?}", r.label));
        }
    }
    Ok(format!("{} phi/psi relations exact to q^50", rels.len()))
}

fn fund_specs(order: i64) -> Vec<LatticeSumSpec> {
    let mut out = Vec::new();
    for (m, n) in [(2u32, 1u32), (4, 1), (1, 2), (2, 2), (1, 4), (2, 3), (3, 2)] {
        let nn = n as usize;
        let mut sets = vec![vec![YSpec::zero(1); nn]];
        if n >= 2 {
            let pair = |a: ShiftSpec, b: ShiftSpec| {
                let mut ys = vec![YSpec::zero(1); nn];
                ys[0] = YSpec::constant(1, a);
                ys[1] = YSpec::constant(1, b);
                ys
            };
            sets.push(pair(ShiftSpec::pi(rat(1, 4)), ShiftSpec::pi(rat(-1, 4))));
            sets.push(pair(ShiftSpec::pitau(rat(1, 2)), ShiftSpec::pitau(rat(-1, 2))));
        }
        if n == 2 {
            // formal (y, -y) in variables (z, y)
            sets.push(vec![YSpec::var(2, 1, 1), YSpec::var(2, 1, -1)]);
        }
        for ys in sets {
            out.push(LatticeSumSpec::new(m, n, ys, rat_int(order)).expect("valid spec"));
        }
    }
    out
}

fn c4_fund() -> Outcome {
    let started = Instant::now();
    let specs = fund_specs(20);
    let reports: Vec<CheckReport> = specs.iter().map(verify_fund).collect();
    all_pass(&reports)?;
    let t = started.elapsed().as_secs_f64();
    ensure(t < 60.0, || format!("took {t:.1}s"))?;
    Ok(format!("{} (m,n,y) cases at order 20 ({t:.2}s)", reports.len()))
}

fn c5_boona() -> Outcome {
    for m in 1..=4i64 {
        all_pass(&[verify_named("boona", &params(&[("m", m)]), &rat_int(20))])?;
        let h = h_coeff(&LatticeSumSpec::plain(2 * m as u32, 1, rat_int(20)).unwrap()).map_err(|e| e.to_string())?;
        let want = QxSeries::from_terms(1, Precision::Finite(rat_int(20)), [(rat_int(0), vec![0], CycloNum::from_int(2 * m))]);
        ensure(h == want, || format!("m={m}: H = {}", h.render_pretty(&["z"])))?;
    }
    Ok("m = 1..4 at order 20, H = 2m exactly".into())
}

fn c6_2m1() -> Outcome {
    for m in 1..=4u32 {
        all_pass(&[verify_named("2m1", &params(&[("m", m as i64)]), &rat_int(20))])?;
        let ys = vec![YSpec::var(2, 1, 1), YSpec::var(2, 1, -1)];
        let h = h_coeff(&LatticeSumSpec::new(m, 2, ys, rat_int(20)).unwrap()).map_err(|e| e.to_string())?;
        let closed = h_m2_closed(m, &rat_int(20)).map_err(|e| e.to_string())?;
        zero_below(&h.sub(&closed).map_err(|e| e.to_string())?, 20).map_err(|e| format!("m={m}: {e}"))?;
    }
    Ok("m = 1..4 both parities at order 20, H matches closed form".into())
}

fn c7_catalog() -> Outcome {
    let mut runs: Vec<(String, Params, thetacirc::exactnum::Rat)> =
        vec![("prop-m1".into(), Params::new(), rat_int(30)), ("prop-4z".into(), Params::new(), rat_int(30))];
    for n in 1..=3 {
        runs.push(("theta1-sum".into(), params(&[("n", n)]), rat_int(30)));
    }
    for name in ["mod-a", "mod-b", "mod-c", "mod-d", "mod-e", "mod-f"] {
        runs.push((name.into(), Params::new(), rat_int(100)));
    }
    let mut reports = run_suite(&runs);
    reports.push(mod_d_composed(&rat_int(100)));
    all_pass(&reports)?;
    Ok(format!("{} checks including mod-d from mod-b and mod-c", reports.len()))
}

fn c8_etapower() -> Outcome {
    let started = Instant::now();
    for (n, order) in [(1, 40), (2, 40), (3, 30)] {
        let c = crosscheck(n, order);
        all_pass(std::slice::from_ref(&c.report))?;
        ensure(c.rows.iter().all(|r| r.agree()), || format!("n={n}: table disagrees"))?;
    }
    let a = cor_q1_m(1, 1, 30).map_err(|e| e.to_string())?;
    let b = cor_q1_m(1, 2, 30).map_err(|e| e.to_string())?;
    ensure(a.coeffs == b.coeffs, || "first formula depends on m".into())?;
    let a = cor_q2_m(1, 1, 30).map_err(|e| e.to_string())?;
    let b = cor_q2_m(1, 2, 30).map_err(|e| e.to_string())?;
    ensure(a.coeffs == b.coeffs, || "second formula depends on m".into())?;
    let t = started.elapsed().as_secs_f64();
    ensure(t < 120.0, || format!("took {t:.1}s"))?;
    Ok(format!("n = 1,2 to 40 and n = 3 to 30, m-independent ({t:.2}s)"))
}

// ---- an independent floating-point evaluation of the left-hand sides ----

const NMAX: i64 = 80;

/// `θ_k(w | cτ)` summed straight from the defining series.
fn th(k: u8, w: C, c: f64, tau: C) -> C {
    let t = tau * c;
    let i = C::i();
    (-NMAX..=NMAX)
        .map(|n| {
            let n = n as f64;
            match k {
                1 => -i * (i * PI * t * (n + 0.5).powi(2) + i * (2.0 * n + 1.0) * w).exp() * (-1f64).powi(n as i32),
                2 => (i * PI * t * (n + 0.5).powi(2) + i * (2.0 * n + 1.0) * w).exp(),
                3 => (i * PI * t * n * n + i * 2.0 * n * w).exp(),
                _ => (i * PI * t * n * n + i * 2.0 * n * w).exp() * (-1f64).powi(n as i32),
            }
        })
        .sum()
}

fn qpow(r: f64, tau: C) -> C {
    (C::i() * 2.0 * PI * tau * r).exp()
}

/// `φ(±q^r)`
fn phi(sign: f64, r: f64, tau: C) -> C {
    (-NMAX..=NMAX).map(|n| qpow(r * (n * n) as f64, tau) * sign.powi(n as i32)).sum()
}

/// `ψ(q^r)`
fn psi(r: f64, tau: C) -> C {
    (0..NMAX).map(|n| qpow(r * (n * (n + 1) / 2) as f64, tau)).sum()
}

/// `(q^a; q^a)_∞`
fn euler_f(a: f64, tau: C) -> C {
    (1..4000).map(|j| C::new(1.0, 0.0) - qpow(a * j as f64, tau)).product()
}

fn float_lhs(name: &str, p: &Params, z: C, y: C, tau: C) -> C {
    let g = |k: &str| p[k];
    let one = C::new(1.0, 0.0);
    let alt = |k: i64| if k % 2 == 0 { one } else { -one };
    match name {
        "fund" => {
            let (m, n, yset) = (g("m"), g("n"), g("yset"));
            let l = m * n;
            let mut ys = vec![C::new(0.0, 0.0); n as usize];
            match yset {
                1 => (ys[0], ys[1]) = (C::new(PI / 4.0, 0.0), C::new(-PI / 4.0, 0.0)),
                2 => (ys[0], ys[1]) = (PI * tau / 2.0, -PI * tau / 2.0),
                3 => (ys[0], ys[1]) = (y, -y),
                _ => {}
            }
            (0..l).map(|k| alt(k) * ys.iter().map(|yj| th(3, z + yj + k as f64 * PI / l as f64, 1.0, tau)).product::<C>()).sum()
        }
        "boona" => {
            let m = g("m");
            (0..2 * m).map(|k| alt(k) * th(3, z + k as f64 * PI / (2 * m) as f64, 1.0, tau)).sum()
        }
        "gc" | "theta1-sum" => {
            let n = g("n");
            let (kind, signed) = if name == "gc" { (3, true) } else { (1, false) };
            (0..2 * n)
                .map(|k| {
                    let s = if signed { alt(k) } else { one };
                    s * th(kind, z + k as f64 * PI / (2 * n) as f64, 1.0, tau).powi(2 * n as i32)
                })
                .sum()
        }
        "2m1" => {
            let m = g("m");
            (0..2 * m)
                .map(|k| {
                    let s = k as f64 * PI / (2 * m) as f64;
                    alt(k) * th(3, z + y + s, 1.0, tau) * th(3, z - y + s, 1.0, tau)
                })
                .sum()
        }
        "prop-m1" => th(3, z + y, 1.0, tau) * th(3, z - y, 1.0, tau) - th(4, z + y, 1.0, tau) * th(4, z - y, 1.0, tau),
        "prop-4z" => {
            let pair = |k, a: f64| th(k, z + y + a, 1.0, tau) * th(k, z - y + a, 1.0, tau);
            pair(3, 0.0) - pair(3, PI / 4.0) + pair(4, 0.0) - pair(4, PI / 4.0)
        }
        "mod-a" => phi(1.0, 1.0, tau) * psi(2.0, tau),
        "mod-b" => phi(1.0, 1.0, tau) - phi(-1.0, 1.0, tau),
        "mod-c" => phi(1.0, 1.0, tau) + phi(-1.0, 1.0, tau),
        "mod-d" => phi(1.0, 1.0, tau).powi(2) - phi(-1.0, 1.0, tau).powi(2),
        "mod-e" => psi(1.0, tau).powi(2) - phi(-1.0, 1.0, tau) * psi(2.0, tau),
        "mod-f" => psi(1.0, tau).powi(2) + phi(-1.0, 1.0, tau) * psi(2.0, tau),
        "q1-prod" | "q2-prod" => {
            let n = g("n");
            let by_tau = name == "q2-prod";
            let mut acc = one;
            for j in 1..=n {
                let s = (2 * j - 1) as f64 / (4 * n) as f64;
                let sh = if by_tau { PI * tau * s } else { C::new(PI * s, 0.0) };
                acc *= th(3, z + sh, 1.0, tau) * th(3, z - sh, 1.0, tau);
            }
            acc * euler_f(if by_tau { 1.0 / (2 * n) as f64 } else { (2 * n) as f64 }, tau)
        }
        _ => unreachable!("{name}"),
    }
}

fn c9_float_oracle() -> Outcome {
    let cases: Vec<(&str, Params)> = vec![
        ("fund", params(&[("m", 2), ("n", 1), ("yset", 0)])),
        ("fund", params(&[("m", 2), ("n", 2), ("yset", 1)])),
        ("fund", params(&[("m", 1), ("n", 2), ("yset", 2)])),
        ("fund", params(&[("m", 3), ("n", 2), ("yset", 3)])),
        ("boona", params(&[("m", 3)])),
        ("gc", params(&[("n", 2)])),
        ("theta1-sum", params(&[("n", 2)])),
        ("2m1", params(&[("m", 1)])),
        ("2m1", params(&[("m", 2)])),
        ("prop-m1", Params::new()),
        ("prop-4z", Params::new()),
        ("mod-a", Params::new()),
        ("mod-b", Params::new()),
        ("mod-c", Params::new()),
        ("mod-d", Params::new()),
        ("mod-e", Params::new()),
        ("mod-f", Params::new()),
        ("q1-prod", params(&[("n", 2)])),
        ("q2-prod", params(&[("n", 2)])),
    ];
    let taus = [C::new(0.0, 0.3), C::new(0.1, 0.3)];
    let zs = [C::new(0.0, 0.0), C::new(0.2, 0.1)];
    let y = C::new(0.13, -0.07);
    let mut worst: f64 = 0.0;
    for (name, p) in &cases {
        let sides = build_sides(name, p, &rat_int(40)).map_err(|e| e.to_string())?;
        let diff = sides.lhs.sub(&sides.rhs).map_err(|e| e.to_string())?;
        for tau in taus {
            for z in zs {
                let at = if sides.dim == 2 {
                    vec![z, y]
                } else if sides.dim == 1 {
                    vec![z]
                } else {
                    vec![]
                };
                let (rhs, _) = eval_complex(&sides.rhs, &at, tau).map_err(|e| e.to_string())?;
                let (d, _) = eval_complex(&diff, &at, tau).map_err(|e| e.to_string())?;
                let err = (float_lhs(name, p, z, y, tau) - rhs).norm().max(d.norm());
                worst = worst.max(err);
                ensure(err < 1e-9, || format!("{name}[{p:?}] at tau={tau}, z={z}: |LHS - RHS| = {err:e}"))?;
            }
        }
    }
    Ok(format!("{} identities at 4 points, max |LHS - RHS| = {worst:.1e}", cases.len()))
}

fn c10_failure_detection() -> Outcome {
    // mod-b with one coefficient moved: q^5 is added on the right
    let (r, _) = dsl::verify_source("identity bad { order 40; phi(q) - phi(-q) == 4 * q * psi(q^8) + q^5 }", None).map_err(|e| e.to_string())?;
    ensure(r[0].verdict == Verdict::Fail, || r[0].to_string())?;
    let fb = r[0].first_bad.as_ref().ok_or("no first difference")?;
    ensure(fb.qexp == rat_int(5) && fb.coeff == CycloNum::from_int(-1), || r[0].to_string())?;

    let dir = std::env::temp_dir().join(format!("thetacirc-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = dir.join("perturbed.thid");
    let json = dir.join("perturbed.json");
    std::fs::write(&file, "identity mod_a_perturbed { order 100; 2 * phi(q) * psi(q^2) == psi(q)^2 }\n").map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_thetacirc"))
        .args(["verify", file.to_str().unwrap(), "--report", json.to_str().unwrap()])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(1), || format!("exit status {:?}", out.status.code()))?;
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(v[0]["verdict"] == "fail" && v[0]["firstBad"]["qexp"] == "0", || v.to_string())?;
    Ok("altered coefficients caught at q^5 and q^0, exit status 1".into())
}

fn c11_parser() -> Outcome {
    let script = dsl::parse(BUNDLED_CATALOG).map_err(|e| e.to_string())?;
    let again = dsl::parse(&script.to_string()).map_err(|e| e.to_string())?;
    ensure(again == script, || "printed catalog does not parse back to the same tree".into())?;
    let (dsl_reports, _) = dsl::verify_source(BUNDLED_CATALOG, None).map_err(|e| e.to_string())?;
    let native = run_suite(&default_runs(None));
    ensure(dsl_reports.len() == native.len(), || format!("{} vs {} checks", dsl_reports.len(), native.len()))?;
    for (a, b) in dsl_reports.iter().zip(&native) {
        ensure(a.verdict == b.verdict && a.first_bad == b.first_bad, || format!("{a} vs {b}"))?;
    }
    all_pass(&dsl_reports)?;
    Ok(format!("{} statements parse, round-trip and agree with the native run", dsl_reports.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("triple product", c1_triple_product),
        ("shift tables", c2_shift_tables),
        ("phi/psi chains", c3_phi_psi),
        ("fundamental theorem", c4_fund),
        ("alternating theta3 sums", c5_boona),
        ("two-factor corollary", c6_2m1),
        ("catalog", c7_catalog),
        ("eta powers", c8_etapower),
        ("float oracle", c9_float_oracle),
        ("failure detection", c10_failure_detection),
        ("parser and bundled catalog", c11_parser),
    ];
    let mut failed = 0;
    let mut err = std::io::stderr();
    for (i, (label, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let line = match outcome {
            Ok(msg) => format!("criterion {:>2} PASS  {label}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                format!("criterion {:>2} FAIL  {label}: {msg}", i + 1)
            }
        };
        writeln!(err, "{line}").unwrap();
    }
    writeln!(err, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len()).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
