//! Runs scenarios and collects their reports.

use metastab_core::metastability::{
    least_metastable_n_with, Certificate, GapFunction, SearchOptions, SearchOutcome, Verdict,
    WindowPredicate,
};
use metastab_core::rate::{
    abel_rate, gamma_bound, tauber_rate, RateBundle, RateResult, SearchFunctional,
};
use metastab_core::specker::{
    check_identity_31, check_identity_32, check_tauber_condition_32, IdentityReport,
};
use metastab_core::theorems::{
    AbelInstance, Clause, ClauseReport, InstanceVerdict, TauberInstance,
};
use metastab_core::{Error, Natural, PointFamily, Rational, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::claim::{Claim, ClaimPredicate};
use crate::descriptor::{PointsDesc, SequenceDesc};
use crate::scenario::{build_predicate, Command, Scenario, DEFAULT_CAP};

/// Outcome class of one scenario, ordered by how much it matters for the
/// process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Exhausted,
    Fail,
    ConfigError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Exhausted => 2,
            Status::ConfigError => 3,
        }
    }

    /// Config errors dominate failures, which dominate exhaustion.
    fn rank(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::Exhausted => 1,
            Status::Fail => 2,
            Status::ConfigError => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Exhausted => "exhausted",
            Status::ConfigError => "config_error",
        }
    }

    fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Pass => Status::Pass,
            Verdict::Fail => Status::Fail,
            Verdict::Exhausted => Status::Exhausted,
        }
    }

    fn of_error(e: &Error) -> Self {
        match e {
            Error::Resource(_) | Error::NotFound { .. } => Status::Exhausted,
            Error::Unsound(_) => Status::Fail,
            Error::Config(_) | Error::Domain(_) | Error::BoundViolation { .. } => {
                Status::ConfigError
            }
        }
    }
}

/// Worst status of a batch; an empty batch passes.
pub fn overall(statuses: impl IntoIterator<Item = Status>) -> Status {
    statuses
        .into_iter()
        .max_by_key(|s| s.rank())
        .unwrap_or(Status::Pass)
}

/// One CSV line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Row {
    pub predicate: String,
    pub eps: String,
    pub gap: String,
    #[serde(rename = "N_found")]
    pub n_found: String,
    pub bound: String,
    pub verdict: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub index: usize,
    pub command: String,
    pub scenario: Scenario,
    /// Search cap the scenario ran with.
    #[serde(with = "crate::descriptor::nat")]
    pub cap: u64,
    pub status: Status,
    /// Headline value: the bound, the found `N`, or a short verdict.
    pub summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default)]
    pub result: Value,
    #[serde(default)]
    pub certificates: Vec<Certificate>,
    #[serde(default)]
    pub claims: Vec<Claim>,
    #[serde(skip)]
    pub rows: Vec<Row>,
}

struct Outcome {
    status: Status,
    summary: String,
    result: Value,
    certificates: Vec<Certificate>,
    claims: Vec<Claim>,
    rows: Vec<Row>,
}

impl Outcome {
    fn new(status: Status, summary: impl Into<String>, result: Value) -> Self {
        Outcome {
            status,
            summary: summary.into(),
            result,
            certificates: Vec::new(),
            claims: Vec::new(),
            rows: Vec::new(),
        }
    }
}

fn opt_text<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cert_row(c: &Certificate) -> Row {
    Row {
        predicate: c.predicate.clone(),
        eps: c.eps.to_string(),
        gap: c.gap.clone(),
        n_found: opt_text(c.found_n.as_ref()),
        bound: opt_text(c.bound_claimed.as_ref()),
        verdict: c.verdict.as_str().to_string(),
    }
}

fn witness_text(r: &ClauseReport) -> Value {
    match &r.witness {
        Some(w) => Value::String(format!("{w:?}")),
        None => Value::Null,
    }
}

fn clause_json(r: &ClauseReport) -> Value {
    json!({
        "clause": r.clause.as_str(),
        "window": r.window,
        "holds": r.holds,
        "checked": r.checked.to_string(),
        "witness": witness_text(r),
    })
}

fn verdict_json(v: &InstanceVerdict) -> Value {
    json!({
        "premise": v.premise.holds,
        "conclusion": v.conclusion.holds,
        "counterexample": v.is_counterexample(),
        "clauses": v.premise.clauses.iter().chain(&v.conclusion.clauses).map(clause_json).collect::<Vec<_>>(),
    })
}

/// Inputs the clause predicates of a theorem instance are built from.
struct ClauseInputs<'a> {
    sequence: &'a SequenceDesc,
    points: &'a PointsDesc,
    l_bound: &'a Rational,
    eps: &'a Rational,
    n1: u64,
    p: &'a Natural,
}

fn clause_predicate(c: Clause, k: &ClauseInputs) -> Result<ClaimPredicate> {
    let seq = k.sequence.clone();
    let part = |d: u64| k.eps / Rational::from_u64(d);
    Ok(match c {
        Clause::AbelPartialSums => ClaimPredicate::PartialSums {
            sequence: seq,
            eps: part(4),
        },
        Clause::AbelPoints => {
            let near = (Rational::from_u64(8) * k.l_bound * Rational::from_u64(k.n1)).recip()?;
            ClaimPredicate::PointsBetween {
                points: k.points.clone(),
                floor: Rational::one() - k.eps * &near,
                ceiling: Rational::one() - Rational::from_natural(k.p).recip()?,
            }
        }
        Clause::AbelConclusion => ClaimPredicate::JointAbel {
            sequence: seq,
            eps: k.eps.clone(),
            points: k.points.clone(),
            f_bound: Some(Rational::from_u64(2) * k.l_bound),
        },
        Clause::TauberTail => ClaimPredicate::SmallTail {
            sequence: seq,
            eps: part(8),
        },
        Clause::TauberFValues => ClaimPredicate::FValues {
            sequence: seq,
            eps: part(4),
            points: PointsDesc::V {},
            f_bound: Some(k.l_bound.clone()),
        },
        Clause::TauberConclusion => ClaimPredicate::JointAbel {
            sequence: seq,
            eps: k.eps.clone(),
            points: PointsDesc::V {},
            f_bound: Some(k.l_bound.clone()),
        },
    })
}

fn clause_claims(v: &InstanceVerdict, k: &ClauseInputs) -> Result<Vec<Claim>> {
    v.premise
        .clauses
        .iter()
        .chain(&v.conclusion.clauses)
        .map(|r| {
            Ok(Claim {
                label: r.clause.as_str().to_string(),
                predicate: clause_predicate(r.clause, k)?,
                window: r.window,
                holds: r.holds,
            })
        })
        .collect()
}

/// Certificate for the conclusion window of a checked instance.
fn conclusion_certificate(
    pred: &WindowPredicate,
    g: &GapFunction,
    n: u64,
    v: &InstanceVerdict,
) -> Certificate {
    let report = &v.conclusion.clauses[0];
    Certificate {
        predicate: pred.describe(),
        eps: pred.eps().clone(),
        gap: g.to_string(),
        found_n: Some(Natural::from(n)),
        window: Some(report.window),
        checked_pairs: report.checked,
        bound_claimed: None,
        verdict: if v.is_counterexample() {
            Verdict::Fail
        } else {
            Verdict::Pass
        },
    }
}

fn instance_status(v: &InstanceVerdict) -> Status {
    if v.is_counterexample() {
        Status::Fail
    } else {
        Status::Pass
    }
}

fn instance_summary(v: &InstanceVerdict) -> String {
    format!(
        "premise={} conclusion={}",
        v.premise.holds, v.conclusion.holds
    )
}

fn theorem_rows(
    name: &str,
    eps: &Rational,
    g: &GapFunction,
    n: u64,
    v: &InstanceVerdict,
) -> Vec<Row> {
    v.premise
        .clauses
        .iter()
        .chain(&v.conclusion.clauses)
        .map(|r| Row {
            predicate: format!("{name}:{}", r.clause.as_str()),
            eps: eps.to_string(),
            gap: g.to_string(),
            n_found: n.to_string(),
            bound: String::new(),
            verdict: if r.holds { "pass" } else { "fail" }.to_string(),
        })
        .collect()
}

fn bundle_json(b: &RateBundle) -> Value {
    json!({
        "kind": match b.kind { metastab_core::rate::RateKind::Abel => "abel", metastab_core::rate::RateKind::Tauber => "tauber" },
        "N1": b.n1.to_string(),
        "N2": b.n2.to_string(),
        "N": b.n.to_string(),
        "g(N)": b.g_n.to_string(),
        "M(N1)": b.m_n1.to_string(),
        "p": b.p.to_string(),
        "l": b.l.to_string(),
        "f(N1)": b.f_n1.to_string(),
        "h(N1,N2)": b.h_n1_n2.to_string(),
        "tail_index": b.tail_index.map(|t| t.to_string()),
    })
}

fn rate_outcome(
    r: RateResult,
    g: &GapFunction,
    claims: Vec<Claim>,
    conclusion_pred: WindowPredicate,
) -> Outcome {
    let audit = r.bundle.audit(g);
    let mut status = instance_status(&r.verdict);
    if audit.is_err() || !r.verdict.conclusion.holds {
        status = Status::Fail;
    }
    let mut out = Outcome::new(
        status,
        r.n.to_string(),
        json!({
            "N": r.n.to_string(),
            "window": r.bundle.window(),
            "bundle": bundle_json(&r.bundle),
            "audit": audit.err(),
            "verdict": verdict_json(&r.verdict),
        }),
    );
    let cert = conclusion_certificate(&conclusion_pred, g, r.n, &r.verdict);
    out.rows.push(cert_row(&cert));
    out.certificates.push(cert);
    out.claims = claims;
    out
}

fn identity_json(r: &IdentityReport) -> Value {
    json!({
        "identity": r.identity,
        "checked": r.checked.to_string(),
        "holds": r.holds(),
        "violation": r.violation.as_ref().map(|(n, l, rhs)| json!({"index": n.to_string(), "lhs": l, "rhs": rhs})),
    })
}

fn search_outcome_json(o: &SearchOutcome) -> Value {
    match o {
        SearchOutcome::Found { n, window, checked } => json!({
            "found": n.to_string(),
            "window": window,
            "checked": checked.to_string(),
        }),
        SearchOutcome::NotFoundBelowCap { cap } => json!({ "found": null, "cap": cap.to_string() }),
    }
}

fn found_claim(label: &str, pred: ClaimPredicate, o: &SearchOutcome) -> Option<Claim> {
    match o {
        SearchOutcome::Found { window, .. } => Some(Claim {
            label: label.to_string(),
            predicate: pred,
            window: *window,
            holds: true,
        }),
        SearchOutcome::NotFoundBelowCap { .. } => None,
    }
}

/// The claim form of a `search-n` predicate.
pub fn search_claim_predicate(
    sequence: &SequenceDesc,
    predicate: &crate::scenario::PredicateDesc,
    eps: &Rational,
) -> ClaimPredicate {
    use crate::scenario::PredicateDesc as P;
    let sequence = sequence.clone();
    let eps = eps.clone();
    match predicate {
        P::PartialSums {} => ClaimPredicate::PartialSums { sequence, eps },
        P::FValues { points } => ClaimPredicate::FValues {
            sequence,
            eps,
            points: points.clone(),
            f_bound: None,
        },
        P::JointAbel { points } => ClaimPredicate::JointAbel {
            sequence,
            eps,
            points: points.clone(),
            f_bound: None,
        },
        P::SmallTail {} => ClaimPredicate::SmallTail { sequence, eps },
    }
}

fn execute(scenario: &Scenario, cap: u64) -> Result<Outcome> {
    match &scenario.command {
        Command::CheckAbel {
            sequence,
            points,
            l,
            eps,
            gap,
            n1,
            n2,
            p,
        } => {
            let g = gap.build();
            let inst = AbelInstance {
                seq: sequence.build()?,
                points: points.build(),
                l_bound: l.clone(),
                eps: eps.clone(),
                gap: g.clone(),
                n1: *n1,
                n2: *n2,
                p: Natural::from(*p),
            };
            let v = inst.check()?;
            let inputs = ClauseInputs {
                sequence,
                points,
                l_bound: l,
                eps,
                n1: *n1,
                p: &inst.p,
            };
            let mut out = Outcome::new(
                instance_status(&v),
                instance_summary(&v),
                json!({
                    "N": inst.n().to_string(),
                    "l": inst.l()?.to_string(),
                    "window": inst.conclusion_window()?,
                    "verdict": verdict_json(&v),
                }),
            );
            out.claims = clause_claims(&v, &inputs)?;
            out.rows = theorem_rows("abel", eps, &g, inst.n(), &v);
            let pred =
                WindowPredicate::joint_abel(inst.seq.clone(), eps.clone(), inst.points.clone());
            out.certificates
                .push(conclusion_certificate(&pred, &g, inst.n(), &v));
            Ok(out)
        }
        Command::CheckTauber {
            sequence,
            l,
            eps,
            gap,
            n1,
            n2,
        } => {
            let g = gap.build();
            let inst = TauberInstance {
                seq: sequence.build()?,
                l_bound: l.clone(),
                eps: eps.clone(),
                gap: g.clone(),
                n1: *n1,
                n2: *n2,
            };
            let v = inst.check()?;
            let p = Natural::from(inst.p()?);
            let inputs = ClauseInputs {
                sequence,
                points: &PointsDesc::V {},
                l_bound: l,
                eps,
                n1: *n1,
                p: &p,
            };
            let n = inst.n()?;
            let mut out = Outcome::new(
                instance_status(&v),
                instance_summary(&v),
                json!({
                    "N": n.to_string(),
                    "p": p.to_string(),
                    "l": inst.l()?.to_string(),
                    "window": inst.conclusion_window()?,
                    "verdict": verdict_json(&v),
                }),
            );
            out.claims = clause_claims(&v, &inputs)?;
            out.rows = theorem_rows("tauber", eps, &g, n, &v);
            let pred = WindowPredicate::joint_abel(inst.seq.clone(), eps.clone(), PointFamily::V);
            out.certificates
                .push(conclusion_certificate(&pred, &g, n, &v));
            Ok(out)
        }
        Command::AbelRate {
            sequence,
            points,
            l,
            eps,
            gap,
        } => {
            let g = gap.build();
            let seq = sequence.build()?;
            let family = points.build();
            let r = abel_rate(
                eps,
                &g,
                l,
                &family,
                &SearchFunctional::partial_sums(seq.clone()),
                cap,
            )?;
            let p = r.bundle.p.clone();
            let claims = clause_claims(
                &r.verdict,
                &ClauseInputs {
                    sequence,
                    points,
                    l_bound: l,
                    eps,
                    n1: r.bundle.n1,
                    p: &p,
                },
            )?;
            Ok(rate_outcome(
                r,
                &g,
                claims,
                WindowPredicate::joint_abel(seq, eps.clone(), family),
            ))
        }
        Command::TauberRate {
            sequence,
            l,
            eps,
            gap,
        } => {
            let g = gap.build();
            let seq = sequence.build()?;
            let meta = SearchFunctional::f_values(seq.clone(), PointFamily::V);
            let r = tauber_rate(eps, &g, l, &seq, &meta, cap)?;
            let p = r.bundle.p.clone();
            let claims = clause_claims(
                &r.verdict,
                &ClauseInputs {
                    sequence,
                    points: &PointsDesc::V {},
                    l_bound: l,
                    eps,
                    n1: r.bundle.n1,
                    p: &p,
                },
            )?;
            Ok(rate_outcome(
                r,
                &g,
                claims,
                WindowPredicate::joint_abel(seq, eps.clone(), PointFamily::V),
            ))
        }
        Command::Gamma {
            l,
            eps,
            gap,
            sequence,
        } => {
            let g = gap.build();
            let b = gamma_bound(eps, &g, l, &scenario.resource_limits())?;
            let mut result = json!({
                "k": b.k.to_string(),
                "iterates": b.iterates.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "gamma": b.gamma.to_string(),
            });
            let mut out = Outcome::new(Status::Pass, b.gamma.to_string(), Value::Null);
            match sequence {
                None => out.rows.push(Row {
                    predicate: "gamma".into(),
                    eps: eps.to_string(),
                    gap: g.to_string(),
                    n_found: String::new(),
                    bound: b.gamma.to_string(),
                    verdict: "pass".into(),
                }),
                Some(desc) => {
                    // Least N >= 1 with |F(v_m) - s_n| <= eps on [N; N + g(N)],
                    // searched no further than the bound itself.
                    let pred =
                        WindowPredicate::joint_abel(desc.build()?, eps.clone(), PointFamily::V);
                    let reach = u64::try_from(&b.gamma).map_or(cap, |gm| gm.min(cap));
                    let o = least_metastable_n_with(
                        &pred,
                        &g,
                        SearchOptions::offset(reach).starting_at(1),
                    )?;
                    let mut cert = Certificate::for_search(&pred, &g, &o, Some(b.gamma.clone()));
                    if o.found().is_none() && Natural::from(reach) >= b.gamma {
                        cert.verdict = Verdict::Fail;
                    }
                    out.status = Status::of_verdict(cert.verdict);
                    result["oracle"] = search_outcome_json(&o);
                    let claim_pred = ClaimPredicate::JointAbel {
                        sequence: desc.clone(),
                        eps: eps.clone(),
                        points: PointsDesc::V {},
                        f_bound: None,
                    };
                    out.claims
                        .extend(found_claim("gamma oracle", claim_pred, &o));
                    out.rows.push(cert_row(&cert));
                    out.certificates.push(cert);
                }
            }
            out.result = result;
            Ok(out)
        }
        Command::Specker {
            base,
            n_max,
            k_max,
            tail_max,
        } => {
            let b = base.build()?;
            let reports = [
                check_identity_31(&b, *n_max)?,
                check_identity_32(&b, *k_max)?,
                check_tauber_condition_32(&b, *tail_max)?,
            ];
            let holds = reports.iter().all(|r| r.holds());
            let status = if holds { Status::Pass } else { Status::Fail };
            let mut out = Outcome::new(
                status,
                if holds {
                    "identities hold"
                } else {
                    "identity violated"
                },
                json!({
                    "base": b.label(),
                    "identities": reports.iter().map(identity_json).collect::<Vec<_>>(),
                }),
            );
            out.rows = reports
                .iter()
                .map(|r| Row {
                    predicate: r.identity.to_string(),
                    eps: String::new(),
                    gap: String::new(),
                    n_found: r.checked.to_string(),
                    bound: String::new(),
                    verdict: if r.holds() { "pass" } else { "fail" }.to_string(),
                })
                .collect();
            Ok(out)
        }
        Command::SearchN {
            sequence,
            predicate,
            eps,
            gap,
            convention,
            from,
            bound,
        } => {
            let g = gap.build();
            let pred = build_predicate(sequence, predicate, eps)?;
            let opts = SearchOptions {
                convention: *convention,
                from: *from,
                cap,
            };
            let o = least_metastable_n_with(&pred, &g, opts)?;
            let cert = Certificate::for_search(&pred, &g, &o, bound.map(Natural::from));
            let mut out = Outcome::new(
                Status::of_verdict(cert.verdict),
                o.found()
                    .map_or_else(|| "not found".to_string(), |n| n.to_string()),
                search_outcome_json(&o),
            );
            out.claims.extend(found_claim(
                "search",
                search_claim_predicate(sequence, predicate, eps),
                &o,
            ));
            out.rows.push(cert_row(&cert));
            out.certificates.push(cert);
            Ok(out)
        }
    }
}

/// Runs one scenario. `default_cap` applies when the scenario sets none.
pub fn run_scenario(index: usize, scenario: &Scenario, default_cap: u64) -> Report {
    let cap = scenario.cap_or(default_cap);
    let command = scenario.command.name().to_string();
    let (out, error) = match execute(scenario, cap) {
        Ok(out) => (out, None),
        Err(e) => {
            let status = Status::of_error(&e);
            let mut out = Outcome::new(status, status.as_str(), Value::Null);
            out.rows.push(Row {
                predicate: command.clone(),
                eps: String::new(),
                gap: String::new(),
                n_found: String::new(),
                bound: String::new(),
                verdict: status.as_str().to_string(),
            });
            (out, Some(e.to_string()))
        }
    };
    let error = error.map(|e| match &scenario.name {
        Some(name) => format!("scenario #{index} ({name}): {e}"),
        None => format!("scenario #{index}: {e}"),
    });
    Report {
        index,
        command,
        scenario: scenario.clone(),
        cap,
        status: out.status,
        summary: out.summary,
        error,
        result: out.result,
        certificates: out.certificates,
        claims: out.claims,
        rows: out.rows,
    }
}

/// Runs a batch on `jobs` worker threads; reports come back in scenario order.
pub fn run_all(
    scenarios: &[Scenario],
    default_cap: Option<u64>,
    jobs: Option<usize>,
) -> Result<Vec<Report>> {
    let cap = default_cap.unwrap_or(DEFAULT_CAP);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::config(format!("worker pool: {e}")))?;
    Ok(pool.install(|| {
        scenarios
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_scenario(i, s, cap))
            .collect()
    }))
}
