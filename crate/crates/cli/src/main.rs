use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use thetacirc::circsum::catalog::{default_runs, entry, run_suite, CATALOG};
use thetacirc::dsl::{expand, verify_source};
use thetacirc::etapower::{cor_q1, cor_q2, crosscheck, euler_pow, EtaError};
use thetacirc::exactnum::{rat_int, Rat};
use thetacirc::report::{reports_json, CheckReport};

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "thetacirc", version, about = "Exact q-series checks for theta function identities")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every identity in a .thid script
    Verify {
        file: PathBuf,
        /// Override every statement's order
        #[arg(long)]
        order: Option<i64>,
        /// Write a JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the built-in catalog
    Catalog {
        /// Comma-separated identity names
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        order: Option<i64>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// List the identities instead of running them
        #[arg(long)]
        list: bool,
    },
    /// Expand an expression as a truncated series
    Expand {
        expr: String,
        #[arg(long)]
        order: i64,
        /// Comma-separated formal variables
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// The lattice-sum coefficient series H_{m,n}(y)
    HCoeff {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        /// Comma-separated arguments y_1..y_n, e.g. "pi/4, -pi/4"; zeros by default
        #[arg(long)]
        y: Option<String>,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[arg(long)]
        order: i64,
    },
    /// Coefficients of (q;q)^{2n} by the product or the lattice formulas
    Etapow {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        order: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Euler,
    CorQ1,
    CorQ2,
    All,
}

fn usage(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    USAGE
}

fn positive_order(o: i64) -> Result<Rat, u8> {
    if o < 1 {
        return Err(usage(format!("order must be positive, got {o}")));
    }
    Ok(rat_int(o))
}

fn finish(reports: &[CheckReport], json: Option<&PathBuf>) -> u8 {
    for r in reports {
        println!("{r}");
    }
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&reports_json(reports)).expect("reports serialize");
        if let Err(e) = fs::write(path, text + "\n") {
            return usage(format!("cannot write {}: {e}", path.display()));
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} checks, {} passed, {failed} failed", reports.len(), reports.len() - failed);
    if failed == 0 {
        PASS
    } else {
        FAIL
    }
}

fn verify(file: &PathBuf, order: Option<i64>, report: Option<&PathBuf>) -> Result<u8, u8> {
    let src = fs::read_to_string(file).map_err(|e| usage(format!("cannot read {}: {e}", file.display())))?;
    let order = order.map(positive_order).transpose()?;
    let (reports, warnings) = verify_source(&src, order.as_ref()).map_err(|e| usage(format!("{}: {e}", file.display())))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(finish(&reports, report))
}

fn catalog(only: &[String], order: Option<i64>, report: Option<&PathBuf>, list: bool) -> Result<u8, u8> {
    if list {
        for e in CATALOG {
            println!("{:<11} [{}] default order {}: {}", e.name, e.params.join(","), e.default_order, e.statement);
        }
        return Ok(PASS);
    }
    if let Some(bad) = only.iter().find(|n| entry(n).is_none()) {
        return Err(usage(format!("unknown identity `{bad}`; try `catalog --list`")));
    }
    let order = order.map(positive_order).transpose()?;
    let runs: Vec<_> = default_runs(order.as_ref()).into_iter().filter(|(n, _, _)| only.is_empty() || only.contains(n)).collect();
    Ok(finish(&run_suite(&runs), report))
}

fn print_expansion(src: &str, vars: &[String], order: i64) -> Result<u8, u8> {
    let order = positive_order(order)?;
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let s = expand(src, &names, &order).map_err(usage)?;
    println!("{}", s.render_pretty(&names));
    Ok(PASS)
}

fn etapow(n: u32, order: u32, method: MethodArg, csv_path: Option<&PathBuf>) -> Result<u8, u8> {
    if n == 0 || order == 0 {
        return Err(usage("n and order must be positive"));
    }
    let single = |res: Result<Vec<BigInt>, EtaError>| {
        res.map_err(|e| {
            eprintln!("error: {e}");
            FAIL
        })
    };
    let (header, rows, code): (Vec<&str>, Vec<Vec<String>>, u8) = match method {
        MethodArg::All => {
            let c = crosscheck(n, order);
            println!("{:>4} {:>16} {:>16} {:>16}", "k", "euler", "cor-q1", "cor-q2");
            for r in &c.rows {
                println!("{:>4} {:>16} {:>16} {:>16}{}", r.k, r.euler, r.cor_q1, r.cor_q2, if r.agree() { "" } else { "  *" });
            }
            println!("{}", c.report);
            let rows = c.rows.iter().map(|r| vec![r.k.to_string(), r.euler.to_string(), r.cor_q1.to_string(), r.cor_q2.to_string()]).collect();
            (vec!["k", "euler", "cor_q1", "cor_q2"], rows, if c.report.passed() { PASS } else { FAIL })
        }
        m => {
            let coeffs = single(match m {
                MethodArg::Euler => euler_pow(2 * n, 1, order).map(|r| r.coeffs),
                MethodArg::CorQ1 => cor_q1(n, order).map(|r| r.coeffs),
                // the second formula lives in q^{2n}; read off every 2n-th coefficient
                _ => cor_q2(n, 2 * n * order).map(|r| r.coeffs.into_iter().step_by(2 * n as usize).collect()),
            })?;
            for (k, c) in coeffs.iter().enumerate() {
                println!("{k:>4} {c:>16}");
            }
            (vec!["k", "coeff"], coeffs.iter().enumerate().map(|(k, c)| vec![k.to_string(), c.to_string()]).collect(), PASS)
        }
    };
    if let Some(path) = csv_path {
        let write = || -> Result<(), csv::Error> {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(&header)?;
            for r in &rows {
                w.write_record(r)?;
            }
            w.flush()?;
            Ok(())
        };
        write().map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.cmd {
        Cmd::Verify { file, order, report } => verify(file, *order, report.as_ref()),
        Cmd::Catalog { only, order, report, list } => catalog(only, *order, report.as_ref(), *list),
        Cmd::Expand { expr, order, vars } => print_expansion(expr, vars, *order),
        Cmd::HCoeff { m, n, y, vars, order } => {
            let ys = y.clone().unwrap_or_else(|| vec!["0"; *n as usize].join(", "));
            print_expansion(&format!("hsum({m}, {n}; {ys})"), vars, *order)
        }
        Cmd::Etapow { n, order, method, csv } => etapow(*n, *order, *method, csv.as_ref()),
    };
    ExitCode::from(out.unwrap_or_else(|code| code))
}
