//! A small language for writing identities between q-series.

pub mod ast;
pub mod elaborate;
pub mod generate;
pub mod lexer;
pub mod parser;

use std::fmt;

pub use ast::{Expr, IdentityStmt, Poly, Script, Sym};
pub use elaborate::{elaborate, elaborate_expr, run, Check, ElabError, Node};
pub use parser::{parse, parse_expr, ParseError};

use crate::qxseries::{Precision, QExp, QxSeries};
use crate::report::CheckReport;

/// Identities from the built-in catalog written in the language.
pub const BUNDLED_CATALOG: &str = include_str!("catalog.thid");

#[derive(Debug)]
pub enum DslError {
    Parse(ParseError),
    Elab(ElabError),
    Eval(String),
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DslError::Parse(e) => write!(f, "parse error at {e}"),
            DslError::Elab(e) => write!(f, "{e}"),
            DslError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

impl std::error::Error for DslError {}

impl From<ParseError> for DslError {
    fn from(e: ParseError) -> Self {
        DslError::Parse(e)
    }
}

impl From<ElabError> for DslError {
    fn from(e: ElabError) -> Self {
        DslError::Elab(e)
    }
}

/// Parses, elaborates and runs every identity in `src`.
pub fn verify_source(src: &str, order: Option<&QExp>) -> Result<(Vec<CheckReport>, Vec<String>), DslError> {
    let checks = elaborate(&parse(src)?)?;
    let warnings = checks.iter().flat_map(|c| c.warnings.iter().map(move |w| format!("{}: {w}", c.name))).collect();
    Ok((run(&checks, order), warnings))
}

/// Expands a single expression below `order`.
pub fn expand(src: &str, vars: &[&str], order: &QExp) -> Result<QxSeries, DslError> {
    let e = parse_expr(src, vars)?;
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let node = elaborate_expr(&e, &names)?;
    node.eval(names.len(), &Precision::Finite(order.clone())).map_err(|e| DslError::Eval(e.to_string()))
}
