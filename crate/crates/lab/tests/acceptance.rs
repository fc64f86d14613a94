//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! visible.

use std::path::PathBuf;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use metastab_core::metastability::{
    least_metastable_n_with, GapFunction, SearchOptions, WindowPredicate,
};
use metastab_core::rate::{abel_rate, gamma_bound, tauber_rate, ResourceLimits, SearchFunctional};
use metastab_core::{omega, CoefficientSequence, Natural, PointFamily, Rational};
use metastab_lab::fuzz::{run_suite, FuzzSummary, Suite};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn suite_ok(s: &FuzzSummary) -> Result<(), String> {
    ensure(s.ok(), || {
        format!(
            "{} suite: accepted {}/{} passed {} failures {:?}",
            s.suite.as_str(),
            s.accepted,
            s.target,
            s.passed,
            s.failures
        )
    })
}

fn omega_contract() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for eps in [
        Rational::one(),
        Rational::frac(1, 2),
        Rational::frac(1, 10),
        Rational::frac(1, 97),
    ] {
        for p in [1u64, 2, 4, 10, 50] {
            let w = omega(&eps, &Natural::from(p)).map_err(|e| e.to_string())?;
            ensure(w >= Natural::from(p), || {
                format!("omega({eps},{p}) = {w} < p")
            })?;
            let base = Rational::one() - Rational::from_u64(p).recip().unwrap();
            let e = u64::try_from(&w).map_err(|e| e.to_string())?;
            ensure(base.pow(e) <= eps, || format!("(1-1/{p})^{w} > {eps}"))?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("{checked} pairs"))
}

fn truncation_bound() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for r in [Rational::frac(1, 2), Rational::frac(-2, 3), Rational::one()] {
        let seq = CoefficientSequence::geometric(r.clone());
        let l_bound = seq.coeff_bound().cloned().unwrap();
        for eps in [
            Rational::frac(1, 2),
            Rational::frac(1, 10),
            Rational::frac(1, 100),
        ] {
            for p in [2u64, 5, 10] {
                let pn = Natural::from(p);
                let scaled = &eps / (&l_bound * Rational::from_u64(p));
                let l = omega(&scaled, &pn).map_err(|e| e.to_string())?;
                let l = u64::try_from(&l).unwrap();
                // the worst point of [0, 1 - 1/p] and an interior one
                for x in [
                    Rational::one() - Rational::frac(1, p as i64),
                    Rational::frac(1, 3) * Rational::frac(1, p as i64),
                ] {
                    let f = seq.closed_form(&x).unwrap().map_err(|e| e.to_string())?;
                    let fl = seq.eval_truncated(&x, l).map_err(|e| e.to_string())?;
                    ensure((&f - &fl).abs() <= eps, || {
                        format!("r={r} eps={eps} p={p} x={x}: |F - F_l| > eps")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    within(start, Duration::from_secs(5))?;
    Ok(format!("{checked} grid points"))
}

fn random_sequence(rng: &mut ChaCha8Rng) -> CoefficientSequence {
    if rng.gen_bool(0.5) {
        let len = rng.gen_range(1..=10);
        CoefficientSequence::finite(
            (0..len)
                .map(|_| Rational::frac(rng.gen_range(-9..=9), rng.gen_range(1..=9)))
                .collect(),
        )
    } else {
        CoefficientSequence::geometric(Rational::frac(rng.gen_range(-5..=5), rng.gen_range(1..=6)))
    }
}

fn summation_by_parts() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5b9);
    for k in 0..500 {
        let seq = random_sequence(&mut rng);
        let x = Rational::frac(rng.gen_range(0..=19), 20);
        let l = rng.gen_range(0..=40);
        let (lhs, rhs) = seq.summation_by_parts(&x, l).map_err(|e| e.to_string())?;
        ensure(lhs == rhs, || {
            format!("case {k}: {} at x={x}, l={l}: {lhs} != {rhs}", seq.label())
        })?;
    }
    Ok("500 cases".into())
}

fn fuzz_criterion(suite: Suite, target: usize, seed: u64, limit: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let s = run_suite(suite, seed, target, 20_000);
    suite_ok(&s)?;
    if let Some(limit) = limit {
        within(start, limit)?;
    }
    Ok(format!(
        "{} accepted of {} drawn, {:.1}s",
        s.accepted,
        s.drawn,
        start.elapsed().as_secs_f64()
    ))
}

fn rate_pipelines() -> Outcome {
    let sequences = [
        CoefficientSequence::zero(),
        CoefficientSequence::geometric(Rational::frac(1, 2)),
        CoefficientSequence::geometric(Rational::frac(-1, 3)),
        CoefficientSequence::geometric(Rational::frac(1, 4)),
        CoefficientSequence::finite(vec![
            Rational::one(),
            Rational::frac(-1, 2),
            Rational::frac(1, 3),
        ]),
        CoefficientSequence::finite(vec![
            Rational::frac(3, 4),
            Rational::zero(),
            Rational::frac(-5, 4),
        ]),
    ];
    let gaps = [
        GapFunction::constant(0),
        GapFunction::constant(3),
        GapFunction::linear(1, 2),
        GapFunction::linear(2, 0),
    ];
    let mut runs = 0;
    for seq in &sequences {
        for g in &gaps {
            for eps in [Rational::frac(1, 2), Rational::one(), Rational::from_u64(2)] {
                let ctx = || format!("{} g={g} eps={eps}", seq.label());
                let l = seq
                    .partial_sum_bound()
                    .cloned()
                    .unwrap_or_else(Rational::one);
                let r = abel_rate(
                    &eps,
                    g,
                    &l,
                    &PointFamily::V,
                    &SearchFunctional::partial_sums(seq.clone()),
                    100_000,
                )
                .map_err(|e| format!("abel {}: {e}", ctx()))?;
                ensure(
                    r.verdict.premise.holds && r.verdict.conclusion.holds,
                    || format!("abel post-check {}", ctx()),
                )?;
                let b = &r.bundle;
                let end = b.n + b.g_n;
                ensure(b.f_n1 == Natural::from(end).max(b.l.clone()), || {
                    format!("abel f(N1) {}", ctx())
                })?;
                ensure(b.h_n1_n2 == end, || format!("abel h(N1,N2) {}", ctx()))?;
                ensure(b.audit(g).is_ok(), || {
                    format!("abel audit {}: {:?}", ctx(), b.audit(g))
                })?;

                let l = seq.coeff_bound().cloned().unwrap_or_else(Rational::one);
                let meta = SearchFunctional::f_values(seq.clone(), PointFamily::V);
                let r = tauber_rate(&eps, g, &l, seq, &meta, 100_000)
                    .map_err(|e| format!("tauber {}: {e}", ctx()))?;
                ensure(
                    r.verdict.premise.holds && r.verdict.conclusion.holds,
                    || format!("tauber post-check {}", ctx()),
                )?;
                let b = &r.bundle;
                ensure(b.h_n1_n2 == b.n + b.g_n, || {
                    format!("tauber h(N1,N2) {}", ctx())
                })?;
                ensure(b.audit(g).is_ok(), || {
                    format!("tauber audit {}: {:?}", ctx(), b.audit(g))
                })?;
                runs += 2;
            }
        }
    }
    Ok(format!("{runs} runs"))
}

fn gamma_criterion() -> Outcome {
    let start = Instant::now();
    let limits = ResourceLimits::default();
    let hand = gamma_bound(
        &Rational::from_u64(4),
        &GapFunction::constant(0),
        &Rational::one(),
        &limits,
    )
    .map_err(|e| e.to_string())?;
    ensure(hand.gamma == Natural::from(2u32), || {
        format!("hand instance gives {}", hand.gamma)
    })?;

    let s = run_suite(Suite::Gamma, 11, 30, 20_000);
    suite_ok(&s)?;

    // Below eps = L the bound leaves the 10^6 range but stays computable;
    // a capped search must still land under it.
    let mut beyond = 0;
    for seq in [
        CoefficientSequence::geometric(Rational::frac(1, 2)),
        CoefficientSequence::geometric(Rational::frac(2, 3)),
        CoefficientSequence::finite(vec![
            Rational::frac(1, 2),
            Rational::frac(1, 4),
            Rational::frac(1, 8),
        ]),
    ] {
        let l = seq.partial_sum_bound().cloned().unwrap();
        for eps in [&l * Rational::frac(1, 2), &l * Rational::frac(1, 4)] {
            for g in [
                GapFunction::constant(0),
                GapFunction::constant(2),
                GapFunction::linear(1, 1),
            ] {
                let gamma = gamma_bound(&eps, &g, &l, &limits)
                    .map_err(|e| e.to_string())?
                    .gamma;
                let pred = WindowPredicate::joint_abel(seq.clone(), eps.clone(), PointFamily::V);
                let o =
                    least_metastable_n_with(&pred, &g, SearchOptions::offset(3000).starting_at(1))
                        .map_err(|e| e.to_string())?;
                let n = o
                    .found()
                    .ok_or_else(|| format!("{} eps={eps} g={g}: no N <= 3000", seq.label()))?;
                ensure(Natural::from(n) <= gamma, || {
                    format!("{} eps={eps} g={g}: N={n} > {gamma}", seq.label())
                })?;
                beyond += 1;
            }
        }
    }
    within(start, Duration::from_secs(300))?;
    Ok(format!(
        "hand instance 2, {} instances under 10^6, {beyond} beyond",
        s.accepted
    ))
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("metastab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const BATCH: &str = r#"[
  {"name": "abel-zero", "command": "check-abel", "sequence": {"kind": "zero"}, "L": "1", "eps": "1/2",
   "gap": {"kind": "constant", "c": 3}, "n1": 1, "n2": 16, "p": 32},
  {"name": "abel-finite", "command": "check-abel", "sequence": {"kind": "finite", "values": ["1", "-1/2", "1/4"]},
   "L": "1", "eps": "1", "gap": {"kind": "linear", "a": 1, "b": 1}, "n1": 3, "n2": 24, "p": 60},
  {"name": "tauber-geo", "command": "check-tauber", "sequence": {"kind": "geometric", "r": "1/2"}, "L": "1",
   "eps": "2", "gap": {"kind": "constant", "c": 2}, "n1": 4, "n2": 16},
  {"name": "abel-rate", "command": "abel-rate", "sequence": {"kind": "geometric", "r": "-1/3"}, "L": "1",
   "eps": "1", "gap": {"kind": "linear", "a": 1, "b": 0}},
  {"name": "tauber-rate", "command": "tauber-rate", "sequence": {"kind": "finite", "values": ["1/2", "1/3"]},
   "L": "1/2", "eps": "1", "gap": {"kind": "constant", "c": 1}},
  {"name": "gamma-hand", "command": "gamma", "L": "1", "eps": "4", "gap": {"kind": "constant", "c": 0}},
  {"name": "gamma-oracle", "command": "gamma", "L": "2", "eps": "4", "gap": {"kind": "constant", "c": 2},
   "sequence": {"kind": "geometric", "r": "1/2"}},
  {"name": "specker", "command": "specker", "base": {"kind": "dyadic_approach"}},
  {"name": "search", "command": "search-n", "sequence": {"kind": "alternating_harmonic"},
   "predicate": {"kind": "partial_sums"}, "eps": "1/20", "gap": {"kind": "linear", "a": 1, "b": 0}},
  {"name": "search-f", "command": "search-n", "sequence": {"kind": "specker31", "base": {"kind": "rational_approach"}},
   "predicate": {"kind": "f_values", "points": {"kind": "v"}}, "eps": "1/4", "gap": {"kind": "constant", "c": 4},
   "from": 1}
]"#;

fn metastab(args: &[&str]) -> Result<(i32, Vec<u8>), String> {
    let out = Process::new(env!("CARGO_BIN_EXE_metastab"))
        .args(args)
        .env_remove("METASTAB_FORMAT")
        .env_remove("METASTAB_CAP")
        .env_remove("METASTAB_JOBS")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.status.code().unwrap_or(-1), out.stdout))
}

fn cli_replay() -> Outcome {
    let dir = scratch_dir();
    let scenario = dir.join("batch.json");
    std::fs::write(&scenario, BATCH).map_err(|e| e.to_string())?;
    let s = scenario.to_str().unwrap();
    let (c1, a) = metastab(&["run", "--scenario", s, "--jobs", "1"])?;
    let (c2, b) = metastab(&["run", "--scenario", s, "--jobs", "4"])?;
    let (c3, c) = metastab(&["--scenario", s])?;
    ensure(c1 == 0 && c2 == 0 && c3 == 0, || {
        format!("exit codes {c1}, {c2}, {c3}")
    })?;
    ensure(a == b && b == c, || {
        "json output differs between runs".into()
    })?;
    let (_, csv1) = metastab(&["run", "--scenario", s, "--format", "csv"])?;
    let (_, csv2) = metastab(&["run", "--scenario", s, "--format", "csv", "--jobs", "3"])?;
    ensure(csv1 == csv2, || "csv output differs between runs".into())?;

    let cert = dir.join("run.json");
    std::fs::write(&cert, &a).map_err(|e| e.to_string())?;
    let (code, summary) = metastab(&["verify-cert", "--cert", cert.to_str().unwrap()])?;
    ensure(code == 0, || {
        format!(
            "verify-cert exit {code}: {}",
            String::from_utf8_lossy(&summary)
        )
    })?;
    let doc: serde_json::Value = serde_json::from_slice(&a).map_err(|e| e.to_string())?;
    let reports = doc["reports"].as_array().cloned().unwrap_or_default();
    let certs: usize = reports
        .iter()
        .map(|r| r["certificates"].as_array().map_or(0, Vec::len))
        .sum();
    let claims: usize = reports
        .iter()
        .map(|r| r["claims"].as_array().map_or(0, Vec::len))
        .sum();

    // a doctored document must be rejected
    let tampered = String::from_utf8_lossy(&a).replacen("\"holds\": true", "\"holds\": false", 1);
    std::fs::write(&cert, tampered).map_err(|e| e.to_string())?;
    let (code, _) = metastab(&["verify-cert", "--cert", cert.to_str().unwrap()])?;
    ensure(code == 1, || {
        format!("tampered document: verify-cert exit {code}")
    })?;
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!(
        "{} scenarios, {certs} certificates and {claims} claims replayed, output byte-identical",
        reports.len()
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("omega contract", Box::new(omega_contract)),
        (
            "truncation bound on geometric series",
            Box::new(truncation_bound),
        ),
        ("summation by parts", Box::new(summation_by_parts)),
        (
            "Abelian soundness",
            Box::new(|| fuzz_criterion(Suite::Abel, 200, 4, Some(Duration::from_secs(120)))),
        ),
        (
            "Tauberian soundness",
            Box::new(|| fuzz_criterion(Suite::Tauber, 200, 5, None)),
        ),
        ("rate pipelines", Box::new(rate_pipelines)),
        ("gamma bound", Box::new(gamma_criterion)),
        (
            "Specker identities",
            Box::new(|| fuzz_criterion(Suite::Specker, 10, 8, None)),
        ),
        (
            "monotone metastability bound",
            Box::new(|| fuzz_criterion(Suite::Monotone, 50, 9, None)),
        ),
        (
            "CLI determinism and certificate replay",
            Box::new(cli_replay),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("AC{:<2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("AC{:<2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
