use std::process::{Command, Output};

fn thetacirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thetacirc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn script(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("thetacirc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn expand_phi() {
    let o = thetacirc(&["expand", "phi(q)", "--order", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1 + 2*q + 2*q^4 + 2*q^9 + O(q^10)");
}

#[test]
fn expand_with_variables() {
    let o = thetacirc(&["expand", "theta1(z|tau)", "--order", "1", "--vars", "z"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("q^(1/8)"));
}

#[test]
fn catalog_subset_passes() {
    let o = thetacirc(&["catalog", "--only", "mod-a,mod-b", "--order", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("pass ")).count(), 2);
}

#[test]
fn etapow_table_and_csv() {
    let csv = std::env::temp_dir().join(format!("thetacirc-eta-{}.csv", std::process::id()));
    let o = thetacirc(&["etapow", "--n", "2", "--order", "40", "--method", "all", "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,euler,cor_q1,cor_q2"));
    assert_eq!(lines.next(), Some("0,1,1,1"));
    assert_eq!(lines.next(), Some("1,-4,-4,-4"));
    assert_eq!(text.lines().count(), 41);
    for m in ["euler", "cor-q1", "cor-q2"] {
        let o = thetacirc(&["etapow", "--n", "1", "--order", "6", "--method", m]);
        let col: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().nth(1).unwrap().to_string()).collect();
        assert_eq!(col, ["1", "-2", "-1", "2", "1", "2"], "{m}");
    }
}

#[test]
fn h_coeff_default_zeros() {
    let o = thetacirc(&["h-coeff", "--m", "1", "--n", "2", "--order", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "4*q^(1/4) + 4*q^(9/4) + O(q^5)");
}

#[test]
fn verify_pass_fail_and_report() {
    let ok = script("ok.thid", "identity shift { order 5; vars z; theta3(z|tau) == theta3(z + 2*pi|tau) }\n");
    let report = ok.with_extension("json");
    let o = thetacirc(&["verify", ok.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v[0]["verdict"], "pass");
    assert_eq!(v[0]["order"], "5");

    let bad = script("bad.thid", "identity bad { order 30; 2 * phi(q) * psi(q^2) == psi(q)^2 }\n");
    let report = bad.with_extension("json");
    let o = thetacirc(&["verify", bad.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v[0]["verdict"], "fail");
    assert_eq!(v[0]["firstBad"]["qexp"], "0");
}

#[test]
fn order_override() {
    let p = script("ovr.thid", "identity a { order 3; phi(q) + phi(-q) == 2 * phi(q^4) }\n");
    let o = thetacirc(&["verify", p.to_str().unwrap(), "--order", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("order 50"));
}

#[test]
fn empty_script_passes() {
    let p = script("empty.thid", "# nothing\n");
    let o = thetacirc(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(thetacirc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(thetacirc(&["catalog", "--only", "nope"]).status.code(), Some(2));
    assert_eq!(thetacirc(&["expand", "theta5(z|tau)", "--order", "3", "--vars", "z"]).status.code(), Some(2));
    assert_eq!(thetacirc(&["verify", "/definitely/not/here.thid"]).status.code(), Some(2));
    let p = script("syntax.thid", "identity x { order 5; vars z;\n theta3(z|tau) === 1 }\n");
    let o = thetacirc(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at 2:18"));
}
