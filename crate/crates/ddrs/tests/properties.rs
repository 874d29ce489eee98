//! Property tests for terms, syntax, semantics and the grammars.

use ddrs::analysis::enumerate::TermSampler;
use ddrs::analysis::grammar_for;
use ddrs::catalog::{builtin, dump, load_system, BUILTIN_NAMES};
use ddrs::engine::{normal_form, normalize, Limits, Outcome, Strategy as Reduction};
use ddrs::semantics::eval;
use ddrs::syntax::{parse_term, print_term};
use ddrs::term::{match_pattern, Signature, Substitution, Symbol, Term, Var};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn term_over(sig: &'static str, lo: usize, hi: usize) -> impl Strategy<Value = Term> {
    let sampler = TermSampler::new(&Signature::named(sig).unwrap(), hi);
    any::<u64>().prop_map(move |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sampler.sample_mixed(lo, hi, &mut rng).expect("every size is inhabited")
    })
}

/// A term together with one of its positions.
fn term_and_position(max: usize) -> impl Strategy<Value = (Term, ddrs::term::Position)> {
    term_over("SigmaZext", 1, max).prop_flat_map(|t| {
        let ps = t.positions();
        (Just(t), prop::sample::select(ps))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_then_parse_is_identity(t in term_over("SigmaZext", 1, 12)) {
        let sig = Signature::named("SigmaZext").unwrap();
        let printed = print_term(&t);
        prop_assert_eq!(parse_term(&printed, &sig).unwrap(), t);
        // and printing is a fixpoint on printed text
        prop_assert_eq!(print_term(&parse_term(&printed, &sig).unwrap()), printed);
    }

    #[test]
    fn replace_with_own_subterm_is_identity((t, p) in term_and_position(10)) {
        let sub = t.subterm_at(&p).unwrap().clone();
        prop_assert_eq!(t.replace_at(&p, sub).unwrap(), t);
    }

    #[test]
    fn replace_adjusts_size((t, p) in term_and_position(10), s in term_over("SigmaZext", 1, 6)) {
        let old = t.subterm_at(&p).unwrap().size();
        let u = t.replace_at(&p, s.clone()).unwrap();
        prop_assert_eq!(u.size(), t.size() - old + s.size());
        prop_assert_eq!(u.subterm_at(&p).unwrap(), &s);
    }

    #[test]
    fn match_then_apply_is_left_inverse((t, p) in term_and_position(9)) {
        // abstract one subterm into a variable; the match must recover it
        let pat = t.replace_at(&p, Term::var("x")).unwrap();
        let sigma = match_pattern(&pat, &t).expect("the pattern is an instance generalization");
        prop_assert_eq!(sigma.apply(&pat), t.clone());
        prop_assert_eq!(sigma.get(&Var::new("x")), Some(t.subterm_at(&p).unwrap()));
    }

    #[test]
    fn substitution_removes_pattern_variables(t in term_over("SigmaZ", 1, 6), s in term_over("SigmaZ", 1, 4)) {
        let pat = Term::add(Term::var("x"), Term::mul(t.clone(), Term::var("y")));
        let mut sigma = Substitution::new();
        sigma.insert(Var::new("x"), s.clone());
        sigma.insert(Var::new("y"), t.clone());
        prop_assert!(sigma.apply(&pat).is_closed());
    }

    #[test]
    fn eval_is_a_ring_homomorphism(a in term_over("SigmaZext", 1, 9), b in term_over("SigmaZext", 1, 9)) {
        let (x, y) = (eval(&a).unwrap(), eval(&b).unwrap());
        prop_assert_eq!(eval(&Term::add(a.clone(), b.clone())).unwrap(), &x + &y);
        prop_assert_eq!(eval(&Term::mul(a.clone(), b.clone())).unwrap(), &x * &y);
        prop_assert_eq!(eval(&Term::neg(a.clone())).unwrap(), -&x);
        prop_assert_eq!(eval(&Term::succ(a.clone())).unwrap(), &x + 1);
        prop_assert_eq!(eval(&Term::pred(a)).unwrap(), &x - 1);
    }

    #[test]
    fn binary_normalization_preserves_value(t in term_over("SigmaZ", 1, 9)) {
        let zbud = builtin("Zbud").unwrap();
        let nf = normal_form(&zbud, &t, Reduction::Innermost, Limits::default()).unwrap();
        prop_assert_eq!(eval(&nf).unwrap(), eval(&t).unwrap());
        prop_assert!(grammar_for("Zbud").unwrap().contains(&nf));
    }

    #[test]
    fn ring_normalization_preserves_value(t in term_over("SigmaR", 1, 9)) {
        let ring = builtin("RingZ").unwrap();
        let nf = normal_form(&ring, &t, Reduction::Innermost, Limits::default()).unwrap();
        prop_assert_eq!(eval(&nf).unwrap(), eval(&t).unwrap());
        prop_assert!(grammar_for("RingZ").unwrap().contains(&nf));
    }

    #[test]
    fn traces_replay(t in term_over("SigmaZ", 1, 8), seed in any::<u64>()) {
        let zbud = builtin("Zbud").unwrap();
        for strat in [Reduction::Innermost, Reduction::Outermost, Reduction::Random(seed)] {
            let tr = normalize(&zbud, &t, strat, 100_000);
            prop_assert_eq!(tr.outcome, Outcome::NormalForm);
            prop_assert_eq!(tr.first_invalid_step(&zbud), None);
            for w in tr.steps.windows(2) {
                prop_assert_eq!(eval(&w[0].result).unwrap(), eval(&w[1].result).unwrap());
            }
        }
    }

    #[test]
    fn random_strategy_is_deterministic(t in term_over("SigmaZ", 1, 8), seed in any::<u64>()) {
        let zbud = builtin("Zbud").unwrap();
        let a = normalize(&zbud, &t, Reduction::Random(seed), 100_000);
        let b = normalize(&zbud, &t, Reduction::Random(seed), 100_000);
        prop_assert_eq!(a, b);
    }
}

#[test]
fn every_step_preserves_value() {
    // every catalog system except the printed errata, on every term up to size 3
    // and 100 random terms up to size 6, over the first 2000 steps
    for name in BUILTIN_NAMES.iter().filter(|n| !n.ends_with("-verbatim")) {
        let sys = builtin(name).unwrap();
        let sampler = TermSampler::new(&sys.signature, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let terms = ddrs::analysis::enumerate_closed(&sys.signature, 3)
            .chain((0..100).filter_map(|_| sampler.sample_mixed(1, 6, &mut rng)));
        for t in terms {
            let tr = normalize(&sys, &t, Reduction::Innermost, 2_000);
            // eval is compositional, so a step keeps the value iff the
            // contracted subterm keeps it
            let mut prev = &t;
            for s in &tr.steps {
                let before = eval(prev.subterm_at(&s.position).unwrap()).unwrap();
                let after = eval(s.result.subterm_at(&s.position).unwrap()).unwrap();
                assert_eq!(before, after, "{name}: {prev} -> {} by {}", s.result, s.rule);
                prev = &s.result;
            }
            assert_eq!(eval(tr.last()).unwrap(), eval(&t).unwrap(), "{name}: {t}");
        }
    }
}

#[test]
fn eval_is_injective_on_grammar_members() {
    for name in ["Nubd", "Zubd", "Nu1", "Zu1", "Nbud", "Zbud", "Ndub", "Zdub", "RingZ", "Nut", "Zut", "Nbt", "Zbi", "Ndt", "Zdt"] {
        let g = grammar_for(name).unwrap();
        // size 9 where the grammar is small enough to list, else as far as 3·10^5 members
        let levels = g.levels_while(9, 300_000);
        let mut seen = std::collections::HashMap::new();
        for t in levels.iter().flatten() {
            if let Some(prev) = seen.insert(eval(t).unwrap(), t.clone()) {
                panic!("{name}: {prev} and {t} have the same value");
            }
        }
        assert!(levels.len() > 4, "{name}: too few sizes listed");
    }
}

#[test]
fn binary_members_are_a_contiguous_range() {
    // k binary digits take size k; a minus sign adds one
    let g = grammar_for("Zbud").unwrap();
    for k in 1..=8usize {
        let mut vals: Vec<i64> = g
            .enumerate(k + 1)
            .filter(|t| t.size() <= k || t.symbol() == Some(Symbol::Neg))
            .map(|t| i64::try_from(eval(&t).unwrap()).unwrap())
            .collect();
        vals.sort();
        let bound = (1i64 << k) - 1;
        assert_eq!(vals, (-bound..=bound).collect::<Vec<_>>(), "{k} digits");
    }
}

#[test]
fn dump_then_load_is_identity() {
    for name in BUILTIN_NAMES {
        let Ok(sys) = builtin(name) else { continue };
        let text = dump(&sys);
        let back = load_system(&text).unwrap();
        assert_eq!(back.name, sys.name);
        assert_eq!(back.source, sys.source);
        assert_eq!(back.rules, sys.rules, "{name}");
        assert_eq!(dump(&back), text);
    }
}

#[test]
fn digits_are_distinct_constants() {
    let z = Signature::named("SigmaZ").unwrap();
    for d in 0..=9u8 {
        let t = parse_term(&d.to_string(), &z).unwrap();
        assert_eq!(t.symbol(), Some(Symbol::Digit(d)));
    }
}
