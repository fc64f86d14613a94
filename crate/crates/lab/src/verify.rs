//! Certificate replay.
//!
//! A run document is accepted when every report is reproduced byte for byte
//! by re-running its scenario, every window claim re-evaluates to the recorded
//! verdict from scratch, every certificate is consistent with its claims, and
//! every `search-n` result is minimal.

use metastab_core::metastability::{holds_on, window_at, Certificate, Verdict};
use metastab_core::{Error, Natural, Result};
use serde::Serialize;

use crate::output::RunDocument;
use crate::runner::{run_scenario, Report, Status};
use crate::scenario::{build_predicate, Command};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportCheck {
    pub index: usize,
    pub rerun_matches: bool,
    pub claims_checked: usize,
    pub problems: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifySummary {
    pub ok: bool,
    pub reports: Vec<ReportCheck>,
}

impl VerifySummary {
    pub fn status(&self) -> Status {
        if self.ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

fn certificate_problems(c: &Certificate) -> Vec<String> {
    let mut out = Vec::new();
    match (&c.found_n, c.window, c.verdict) {
        (None, _, Verdict::Pass) => out.push("certificate passes without a witness".into()),
        (Some(n), Some(w), _) if Natural::from(w.lo) != *n => {
            out.push(format!("certificate window {w} does not start at N = {n}"))
        }
        (Some(_), None, _) => out.push("certificate names N without a window".into()),
        _ => {}
    }
    if let (Some(n), Some(b)) = (&c.found_n, &c.bound_claimed) {
        let within = n <= b;
        if within != (c.verdict == Verdict::Pass) && c.verdict != Verdict::Exhausted {
            out.push(format!(
                "verdict {} disagrees with N = {n} against bound {b}",
                c.verdict.as_str()
            ));
        }
    }
    out
}

/// Every `n` in `[from; N)` must fail, each checked on a fresh evaluator.
fn minimality_problem(report: &Report) -> Result<Option<String>> {
    let Command::SearchN {
        sequence,
        predicate,
        eps,
        gap,
        convention,
        from,
        ..
    } = &report.scenario.command
    else {
        return Ok(None);
    };
    let Some(c) = report.certificates.first() else {
        return Ok(Some("search report without a certificate".into()));
    };
    let Some(found) = &c.found_n else {
        return Ok(None);
    };
    let found = u64::try_from(found).map_err(|_| Error::config("N does not fit in u64"))?;
    let pred = build_predicate(sequence, predicate, eps)?;
    let g = gap.build();
    for n in *from..found {
        if holds_on(&pred, window_at(&g, *convention, n)?)? {
            return Ok(Some(format!(
                "N = {found} is not minimal: {n} already works"
            )));
        }
    }
    Ok(None)
}

fn check_report(stored: &Report) -> Result<ReportCheck> {
    let mut problems = Vec::new();
    let rerun = run_scenario(stored.index, &stored.scenario, stored.cap);
    let as_json =
        |r: &Report| serde_json::to_string(r).map_err(|e| Error::config(format!("json: {e}")));
    let rerun_matches = as_json(&rerun)? == as_json(stored)?;
    if !rerun_matches {
        problems.push("re-running the scenario gives a different report".into());
    }
    for claim in &stored.claims {
        if let Some(p) = claim.replay()? {
            problems.push(p);
        }
    }
    for c in &stored.certificates {
        problems.extend(certificate_problems(c));
        if let (Some(w), Verdict::Pass | Verdict::Fail) = (c.window, c.verdict) {
            if !stored.claims.iter().any(|cl| cl.window == w) {
                problems.push(format!("no claim covers the certificate window {w}"));
            }
        }
    }
    problems.extend(minimality_problem(stored)?);
    Ok(ReportCheck {
        index: stored.index,
        rerun_matches,
        claims_checked: stored.claims.len(),
        problems,
    })
}

pub fn verify_document(doc: &RunDocument) -> Result<VerifySummary> {
    let reports = doc
        .reports
        .iter()
        .map(check_report)
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifySummary {
        ok: reports.iter().all(|r| r.problems.is_empty()),
        reports,
    })
}

pub fn parse_document(text: &str) -> Result<RunDocument> {
    serde_json::from_str(text).map_err(|e| Error::config(format!("certificate file: {e}")))
}
