//! Verdict reports for people and for machines.

use serde::Serialize;

use crate::decider::{DecideStats, Decision, Verdict};
use crate::error::Result;
use crate::problem::{Compiled, ProblemFile};

pub const SCHEMA: &str = "termreg.report/1";

#[derive(Clone, Debug, Serialize)]
pub struct RefutationReport {
    /// Input pattern, as written.
    pub pattern: String,
    pub pattern_index: usize,
    /// Branch of the pattern over the binary signature.
    pub branch: String,
    pub variable: String,
    pub formula: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refutation: Option<RefutationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<String>>,
    pub notices: Vec<String>,
    pub stats: DecideStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<String>>,
}

impl Report {
    pub fn new(file: &ProblemFile, compiled: &Compiled, decision: &Decision, with_trace: bool) -> Result<Self> {
        let bsig = &compiled.problem.sig;
        let (verdict, refutation, witnesses) = match &decision.verdict {
            Verdict::Regular(_) => ("regular", None, None),
            Verdict::NotRegular(r) => {
                let witnesses = r
                    .witnesses
                    .iter()
                    .map(|w| Ok(compiled.encoding.decode(w)?.display(&file.sig, None).to_string()))
                    .collect::<Result<Vec<_>>>()?;
                let refutation = RefutationReport {
                    pattern: file.patterns[r.source].display(&file.sig, Some(&file.vars)).to_string(),
                    pattern_index: r.source,
                    branch: r.branch.display(bsig, Some(&r.vars)).to_string(),
                    variable: r.vars.name(r.var).to_string(),
                    formula: r.formula.clone(),
                };
                ("not-regular", Some(refutation), Some(witnesses))
            }
        };
        Ok(Report {
            schema: SCHEMA,
            verdict,
            refutation,
            witnesses,
            notices: compiled.notices.clone(),
            stats: decision.stats.clone(),
            trace: with_trace.then(|| decision.trace.clone()),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        if let Some(trace) = &self.trace {
            for l in trace {
                out.push_str(l);
                out.push('\n');
            }
        }
        match (&self.refutation, &self.witnesses) {
            (Some(r), Some(ws)) => {
                out.push_str("not regular\n");
                out.push_str(&format!("  pattern:  {}\n", r.pattern));
                out.push_str(&format!("  branch:   {}\n", r.branch));
                out.push_str(&format!("  variable: {}\n", r.variable));
                out.push_str("  witnesses:\n");
                for w in ws {
                    out.push_str(&format!("    {w}\n"));
                }
            }
            _ => out.push_str("regular\n"),
        }
        let s = &self.stats;
        out.push_str(&format!(
            "  |S2| = {}, |Q| = {}, h = {}, branches = {}, rule applications = {}\n",
            s.patterns,
            s.states,
            s.h,
            s.branches,
            s.reduce.total()
        ));
        out
    }
}
