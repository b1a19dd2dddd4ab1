//! Outcome of a single identity check, and its JSON form.

use std::fmt;
use std::time::Instant;

use serde_json::{json, Value};

use crate::exactnum::{rat_string, CycloNum};
use crate::qxseries::{Precision, QExp, QxSeries, XVec};

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    Error(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error(_) => "error",
        }
    }
}

/// Lowest disagreeing term of `lhs - rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstBad {
    pub qexp: QExp,
    pub xvec: XVec,
    pub coeff: CycloNum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub params: String,
    pub order: QExp,
    pub verdict: Verdict,
    pub first_bad: Option<FirstBad>,
    pub wall_time: f64,
}

impl CheckReport {
    /// Judges a difference series. The check is certified at the order of
    /// `diff`, which must reach `requested`.
    pub fn from_difference(name: &str, params: &str, requested: &QExp, diff: &QxSeries, started: Instant) -> Self {
        let certified = match diff.order() {
            Precision::Finite(o) => o.clone(),
            Precision::Exact => requested.clone(),
        };
        let mut report = CheckReport {
            name: name.to_string(),
            params: params.to_string(),
            order: certified.clone(),
            verdict: Verdict::Pass,
            first_bad: None,
            wall_time: 0.0,
        };
        if &certified < requested {
            report.verdict = Verdict::Error(format!("only certified below q^{}, requested q^{}", rat_string(&certified), rat_string(requested)));
        } else {
            match diff.first_nonzero_below(&diff.order().clone()) {
                Ok(None) => {}
                Ok(Some((qexp, xvec, coeff))) => {
                    report.verdict = Verdict::Fail;
                    report.first_bad = Some(FirstBad { qexp, xvec, coeff });
                }
                Err(e) => report.verdict = Verdict::Error(e.to_string()),
            }
        }
        report.wall_time = started.elapsed().as_secs_f64();
        report
    }

    pub fn error(name: &str, params: &str, requested: &QExp, msg: impl Into<String>, started: Instant) -> Self {
        CheckReport {
            name: name.to_string(),
            params: params.to_string(),
            order: requested.clone(),
            verdict: Verdict::Error(msg.into()),
            first_bad: None,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Value {
        let first_bad = self.first_bad.as_ref().map(|b| {
            json!({
                "qexp": rat_string(&b.qexp),
                "xvec": b.xvec,
                "coeff_basis": b.coeff.coeffs().iter().map(rat_string).collect::<Vec<_>>(),
                "cyclo_order": b.coeff.order(),
            })
        });
        let mut v = json!({
            "name": self.name,
            "params": self.params,
            "order": rat_string(&self.order),
            "verdict": self.verdict.label(),
            "firstBad": first_bad,
            "wallTimeSec": self.wall_time,
        });
        if let Verdict::Error(msg) = &self.verdict {
            v["message"] = json!(msg);
        }
        v
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = if self.params.is_empty() { self.name.clone() } else { format!("{}[{}]", self.name, self.params) };
        write!(f, "{:<5} {label} order {} ({:.2}s)", self.verdict.label(), rat_string(&self.order), self.wall_time)?;
        if let Some(b) = &self.first_bad {
            write!(f, "  first difference at q^{} x^{:?}: {}", rat_string(&b.qexp), b.xvec, b.coeff)?;
        }
        if let Verdict::Error(msg) = &self.verdict {
            write!(f, "  {msg}")?;
        }
        Ok(())
    }
}

/// JSON array for a run, in the given order.
pub fn reports_json(reports: &[CheckReport]) -> Value {
    Value::Array(reports.iter().map(CheckReport::to_json).collect())
}
