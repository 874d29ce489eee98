//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Every criterion runs at its stated bound and tolerance. Criteria known
//! to be unattainable as stated are listed in [`EXPECTED_FAIL`] with the
//! reason; they still run in full and print FAIL. The target fails when
//! any outcome differs from what is listed, including a listed criterion
//! that starts passing.

use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use ddrs::analysis::{
    check_ground_confluence_with, check_weight_certificate, grammar_for, status::DeskCheck, status_report,
    GroundCheckConfig, NfOracle, WeightFunction,
};
use ddrs::analysis::NormalFormGrammar;
use ddrs::catalog::{builtin, expected_rule_count, RewriteRule, RewriteSystem, BUILTIN_NAMES};
use ddrs::engine::{contract, normal_form, EngineError, normalize_with, one_step_reducts, redexes, Limits, Outcome, Strategy};
use ddrs::semantics::{check_system_soundness, eval};
use ddrs::syntax::{parse_pattern, parse_term, print_term};
use ddrs::term::Term;
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that cannot pass as stated, with the reason.
const EXPECTED_FAIL: &[(u32, &str)] = &[
    (
        1,
        "RingZ and Zut write n with about 2|n| nodes, so products of |a|,|b| <= 10^6 exceed any node budget \
         and unary sums near 10^6 outrun the default step limit; Zbi leaves -1+-1 irreducible",
    ),
    (6, "[d26] has no i = 0 instance (0* is undefined), so Zdub expands to 444 rules, not 445"),
    (7, "the printed middle step 1+S(1) -> S(1)+1 is not a rewrite step of the scratch system"),
];

const SEED: u64 = 2016;

struct Verdict {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn ddrs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ddrs")).args(args).output().expect("run ddrs")
}

// 1 ---------------------------------------------------------------------

#[derive(Default)]
struct Tally {
    checked: u64,
    wrong: Vec<String>,
    /// Operations whose result alone has more nodes than the engine allows.
    too_large: u64,
    /// Feasible operations left out of the random sample for time.
    not_run: u64,
}

/// Nodes needed to write `n` in a unary-sized notation, at least.
fn unary_nodes(n: &BigInt) -> u128 {
    let m: u128 = n.magnitude().try_into().unwrap_or(u128::MAX);
    m.saturating_mul(2)
}

struct Subject {
    name: &'static str,
    sys: RewriteSystem,
    grammar: NormalFormGrammar,
}

fn arithmetic(tally: &mut Tally, s: &Subject, a: i64, b: i64, with_neg: bool, run: bool) {
    let Subject { name, sys, grammar: g } = s;
    let limits = Limits::default();
    let unary = matches!(*name, "Zubd" | "RingZ" | "Zut");
    let (ba, bb) = (BigInt::from(a), BigInt::from(b));
    let mut ops = vec![("+", &ba + &bb), ("*", &ba * &bb)];
    if with_neg {
        ops.push(("-", -&ba));
    }
    // Unary encodings of the operands are large; build them only when used.
    let mut operands: Option<(Term, Term)> = None;
    for (op, want) in ops {
        if unary && unary_nodes(&want) > limits.node_budget as u128 {
            tally.too_large += 1;
            continue;
        }
        if !run {
            tally.not_run += 1;
            continue;
        }
        let (ta, tb) = operands.get_or_insert_with(|| (g.encode(&ba).unwrap(), g.encode(&bb).unwrap())).clone();
        let t = match op {
            "+" => Term::add(ta, tb),
            "*" => Term::mul(ta, tb),
            _ => Term::neg(ta),
        };
        tally.checked += 1;
        let expected = g.encode(&want).unwrap();
        match normal_form(sys, &t, Strategy::Innermost, limits) {
            Ok(nf) if nf == expected => {}
            Ok(nf) => tally.wrong.push(format!("{name}: {a} {op} {b} gave {}", print_term(&nf))),
            Err(e @ EngineError::StepLimit(_)) => {
                // Tell a short step budget apart from a wrong answer.
                let more = Limits { step_limit: limits.step_limit * 10, ..limits };
                let retry = match normal_form(sys, &t, Strategy::Innermost, more) {
                    Ok(nf) if nf == expected => "exact".to_string(),
                    Ok(nf) => format!("gave {}", print_term(&nf)),
                    Err(e) => e.to_string(),
                };
                tally.wrong.push(format!("{name}: {a} {op} {b}: {e} (with 10x the steps: {retry})"));
            }
            Err(e) => tally.wrong.push(format!("{name}: {a} {op} {b}: {e}")),
        }
    }
}

/// Random pairs for which RingZ and Zut sums and negations are run; each
/// takes seconds at this magnitude.
const UNARY_SAMPLE: usize = 3;

fn criterion_1() -> Verdict {
    let mut lines = String::new();
    let mut passed = true;
    for name in ["Zbud", "Zdub", "Zubd", "RingZ", "Zbi", "Zut"] {
        let start = Instant::now();
        let s = Subject { name, sys: builtin(name).expect("built-in"), grammar: grammar_for(name).expect("grammar") };
        let mut t = Tally::default();
        for a in -50..=50 {
            for b in -50..=50 {
                arithmetic(&mut t, &s, a, b, b == 0, true);
            }
        }
        let bound = if name == "Zubd" { 50 } else { 1_000_000 };
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        for i in 0..1000 {
            let (a, b) = (rng.gen_range(-bound..=bound), rng.gen_range(-bound..=bound));
            let run = !matches!(name, "RingZ" | "Zut") || i < UNARY_SAMPLE;
            arithmetic(&mut t, &s, a, b, true, run);
        }
        passed &= t.wrong.is_empty() && t.too_large == 0 && t.not_run == 0;
        let _ = write!(
            lines,
            "\n    {name} ({:.1?}): {} exact, {} wrong",
            start.elapsed(),
            t.checked - t.wrong.len() as u64,
            t.wrong.len()
        );
        if t.too_large > 0 {
            let _ = write!(lines, ", {} results larger than the node budget", t.too_large);
        }
        if t.not_run > 0 {
            let _ = write!(lines, ", {} feasible operations not run", t.not_run);
        }
        for w in t.wrong.iter().take(3) {
            let _ = write!(lines, "\n      {w}");
        }
    }
    outcome(passed, lines)
}

// 2 ---------------------------------------------------------------------

fn criterion_2() -> Verdict {
    let mut detail = String::new();
    let mut passed = true;
    for (name, size) in [("Zbud", 5), ("RingZ", 6)] {
        let start = Instant::now();
        let sys = builtin(name).unwrap();
        let report = check_ground_confluence_with(&sys, &grammar_for(name).unwrap(), &GroundCheckConfig::new(size));
        let took = start.elapsed();
        passed &= report.passed() && report.failure_count == 0 && took < Duration::from_secs(600);
        let _ = write!(
            detail,
            "\n    {name} size <= {size}: {} terms ({} searched, {} certified), {} failures, {:.0?}",
            report.checked, report.searched, report.certified, report.failure_count, took
        );
    }
    outcome(passed, detail)
}

// 3 ---------------------------------------------------------------------

/// The one-step reducts of `t` by rule `tag`, with positions.
fn reducts_by(sys: &RewriteSystem, t: &Term, tag: &str) -> Vec<(String, Term)> {
    redexes(sys, t)
        .iter()
        .filter(|r| sys.rules[r.rule].tag == tag)
        .map(|r| (format!("{:?}", r.position.0), contract(sys, t, r)))
        .collect()
}

fn joins(sys: &RewriteSystem, a: &Term, b: &Term) -> Option<Term> {
    let mut oracle = NfOracle::new(sys, 1_000_000);
    let na = oracle.normal_forms(a).ok()?;
    let nb = oracle.normal_forms(b).ok()?;
    (na.len() == 1 && na == nb).then(|| na[0].clone())
}

fn criterion_3() -> Verdict {
    let zbud = builtin("Zbud").unwrap();
    let peak = parse_term("P(-(-(1:b0)))", &zbud.signature).unwrap();
    let b17 = reducts_by(&zbud, &peak, "b17");
    let b22 = reducts_by(&zbud, &peak, "b22");
    let mut passed = b17.len() == 1 && b22.len() == 1 && b17[0].1 != b22[0].1;
    let mut detail = format!("\n    Zbud {peak}: ");
    if passed {
        let (l, r) = (&b17[0].1, &b22[0].1);
        let nf = joins(&zbud, l, r);
        passed &= nf.as_ref().map(|n| n.to_string()) == Some("1".into());
        let _ = write!(detail, "[b17] {l}, [b22] {r}, joined at {}", nf.map_or("-".into(), |n| n.to_string()));
    } else {
        let _ = write!(detail, "expected one [b17] and one [b22] reduct, got {b17:?} / {b22:?}");
    }

    let zbi = builtin("Zbi").unwrap();
    let peak = parse_term("1 ^b (1 ^b (1 ^b 0))", &zbi.signature).unwrap();
    let bi2 = reducts_by(&zbi, &peak, "bi2");
    let distinct = bi2.len() == 2 && bi2[0].1 != bi2[1].1;
    passed &= distinct;
    let _ = write!(detail, "\n    Zbi {peak}: ");
    if distinct {
        let nf = joins(&zbi, &bi2[0].1, &bi2[1].1);
        passed &= nf.is_some();
        let _ = write!(
            detail,
            "[bi2]@{} {}, [bi2]@{} {}, joined at {}",
            bi2[0].0,
            bi2[0].1,
            bi2[1].0,
            bi2[1].1,
            nf.map_or("-".into(), |n| n.to_string())
        );
    } else {
        let _ = write!(detail, "expected two distinct [bi2] reducts, got {bi2:?}");
    }
    outcome(passed, detail)
}

// 4 ---------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let mut passed = true;
    let mut detail = String::new();
    let mut sound = 0;
    for name in BUILTIN_NAMES.iter().filter(|n| !n.ends_with("-verbatim")) {
        let report = check_system_soundness(&builtin(name).unwrap(), 100, SEED);
        if report.is_sound() {
            sound += 1;
        } else {
            passed = false;
            let _ = write!(detail, "\n    {name}: unsound {:?}", report.unsound_tags());
        }
    }
    let _ = write!(detail, "\n    {sound} non-verbatim systems sound (100 trials per rule, seed {SEED})");

    let report = check_system_soundness(&builtin("Zubd-verbatim").unwrap(), 100, SEED);
    passed &= report.unsound_tags() == ["u8"];
    let _ = write!(detail, "\n    Zubd-verbatim unsound: {:?}", report.unsound_tags());
    let err = builtin("Zdub-verbatim").map(|_| ()).map_err(|e| e.to_string());
    passed &= err.as_ref().is_err_and(|e| e.contains("0* is undefined"));
    let _ = write!(detail, "\n    Zdub-verbatim: {}", err.err().unwrap_or_else(|| "loaded".into()));

    let codes: Vec<(&str, Option<i32>, i32)> = vec![
        ("Zbud", ddrs(&["check", "--system", "Zbud", "--what", "soundness"]).status.code(), 0),
        ("Zubd-verbatim", ddrs(&["check", "--system", "Zubd-verbatim", "--what", "soundness"]).status.code(), 1),
        ("Zdub-verbatim", ddrs(&["check", "--system", "Zdub-verbatim", "--what", "soundness"]).status.code(), 1),
    ];
    for (name, got, want) in codes {
        passed &= got == Some(want);
        let _ = write!(detail, "\n    ddrs check --system {name} --what soundness: exit {got:?}");
    }
    outcome(passed, detail)
}

// 5 ---------------------------------------------------------------------

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let verdict = check_weight_certificate(&builtin("RingZ").unwrap(), &WeightFunction::ring(), 4, u64::MAX);
    let took = start.elapsed();
    outcome(verdict.passed() && took < Duration::from_secs(30), format!("\n    RingZ: {verdict}, {took:.1?}"))
}

// 6 ---------------------------------------------------------------------

fn criterion_6() -> Verdict {
    let mut passed = true;
    let mut detail = String::new();
    for (name, stated) in [("Zbud", 60), ("Ndub", 172), ("Zdub", 445), ("RingZ", 15)] {
        let got = builtin(name).unwrap().rules.len();
        passed &= got == stated && expected_rule_count(name) == Some(stated);
        let _ = write!(detail, "\n    {name}: {got} rules expanded, {stated} stated");
    }
    outcome(passed, detail)
}

// 7 ---------------------------------------------------------------------

fn criterion_7() -> Verdict {
    let ndt = builtin("Ndt").unwrap();
    let sig = ndt.signature.clone();
    // i' + x -> i + S(x) for i = 0..8, ahead of the existing rules
    let mut scratch = ndt.clone();
    for i in 0..=8u8 {
        let lhs = parse_pattern(&format!("{}+x", i + 1), &sig).unwrap();
        let rhs = parse_pattern(&format!("{i}+S(x)"), &sig).unwrap();
        let rule = RewriteRule::new(format!("div.{i}"), lhs, rhs, "scratch").unwrap();
        scratch = scratch.with_rule_at(i as usize, rule).unwrap();
    }
    let input = parse_term("2+1", &sig).unwrap();
    let limit = 10_000;
    let trace = normalize_with(&scratch, &input, Strategy::Innermost, Limits::steps(limit));
    let diverges = trace.outcome == Outcome::StepLimitHit;
    let first: Vec<String> = trace.steps.iter().take(3).map(|s| print_term(&s.result)).collect();
    let cycle = ["1+S(1)", "S(1)+1", "2+1"];
    let verbatim = first == cycle;

    // whether any strategy could take the printed steps
    let mut reachable = true;
    let mut cur = input.clone();
    for next in cycle {
        let next = parse_term(next, &sig).unwrap();
        reachable &= one_step_reducts(&scratch, &cur).contains(&next);
        cur = next;
    }
    let detail = format!(
        "\n    normalize 2+1: {:?} after {} steps; first steps {}\n    printed cycle 1+S(1), S(1)+1, 2+1 \
         is {}a rewrite sequence",
        trace.outcome,
        trace.steps.len(),
        first.join(", "),
        if reachable { "" } else { "not " }
    );
    outcome(diverges && verbatim, detail)
}

// 8 ---------------------------------------------------------------------

fn criterion_8() -> Verdict {
    let ndub = builtin("Ndub").unwrap();
    let nbud = builtin("Nbud").unwrap();
    let t = parse_term("(9:d7):d5", &ndub.signature).unwrap();
    let ok1 = eval(&t).unwrap() == 975.into() && one_step_reducts(&ndub, &t).is_empty();
    let t = parse_term("((1:b0):b0):b1", &nbud.signature).unwrap();
    let ok2 = eval(&t).unwrap() == 9.into() && one_step_reducts(&nbud, &t).is_empty();
    let s9 = parse_term("S(9)", &ndub.signature).unwrap();
    let tr = normalize_with(&ndub, &s9, Strategy::Innermost, Limits::default());
    let ok3 = print_term(tr.last()) == "1:d0" && tr.steps.first().map(|s| s.rule.as_str()) == Some("d3");
    let s9 = parse_term("S(9)", &nbud.signature).unwrap();
    let nf = normal_form(&nbud, &s9, Strategy::Innermost, Limits::default()).unwrap();
    let ok4 = eval(&nf).unwrap() == 10.into();
    outcome(
        ok1 && ok2 && ok3 && ok4,
        format!(
            "\n    (9:d7):d5 = 975, Ndub-normal: {ok1}\n    ((1:b0):b0):b1 = 9, Nbud-normal: {ok2}\n    \
             Ndub S(9) -> 1:d0 by [d3]: {ok3}\n    Nbud S(9) -> {nf} = 10: {ok4}"
        ),
    )
}

// 9 ---------------------------------------------------------------------

fn criterion_9() -> Verdict {
    let mut passed = true;
    let mut detail = String::new();
    for (name, label, citation) in [
        ("Zdt", "termination:       open", "[KW16]: strong termination is an open question"),
        ("Zdub", "ground-confluence: open", "left as an open question by the authors"),
    ] {
        let sys = builtin(name).unwrap();
        let cfg = GroundCheckConfig::new(3);
        let report = check_ground_confluence_with(&sys, &grammar_for(name).unwrap(), &cfg);
        let desk = [DeskCheck::new(
            "ground-confluence",
            report.passed(),
            format!("{} terms to size 3, {} failures", report.checked, report.failure_count),
        )];
        let text = status_report(&sys, &desk);
        // the recorded claim survives next to the desk result, whatever it was
        let ok = text.contains(&format!("{label} ({citation})")) && text.contains(&desk[0].summary);
        passed &= ok;
        let _ = write!(detail, "\n    {name}: `{label}` kept next to desk check ({}) : {ok}", desk[0].summary);
    }
    outcome(passed, detail)
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Verdict); 9] = [
        (1, "oracle equivalence", criterion_1),
        (2, "ground-confluence desk check", criterion_2),
        (3, "non-confluence peaks", criterion_3),
        (4, "soundness audit", criterion_4),
        (5, "weight certificate", criterion_5),
        (6, "rule counts", criterion_6),
        (7, "divergence regression", criterion_7),
        (8, "known normalizations", criterion_8),
        (9, "open-status honesty", criterion_9),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut surprises = Vec::new();
    for (n, title, run) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {n}: {title} ({:.1?}){}", start.elapsed(), o.detail);
        let expected = EXPECTED_FAIL.iter().find(|(k, _)| *k == n);
        match (o.passed, expected) {
            (false, Some((_, why))) => println!("    expected failure: {why}"),
            (true, None) => {}
            (true, Some(_)) => surprises.push(format!("criterion {n} passed but is listed as unattainable")),
            (false, None) => surprises.push(format!("criterion {n} failed")),
        }
    }
    if surprises.is_empty() {
        println!("acceptance: every criterion matches its recorded outcome");
        ExitCode::SUCCESS
    } else {
        for s in &surprises {
            println!("acceptance: {s}");
        }
        ExitCode::FAILURE
    }
}
