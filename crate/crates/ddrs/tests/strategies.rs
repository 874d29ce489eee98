//! Strategy irrelevance on the systems whose ground confluence is proven:
//! innermost, outermost and random-redex normalization end in the same term.

use ddrs::analysis::enumerate::TermSampler;
use ddrs::analysis::enumerate_closed;
use ddrs::catalog::{builtin, RewriteSystem};
use ddrs::engine::{normal_form, Limits, Strategy};
use ddrs::term::Term;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Work allowed per strategy before a random term is set aside: outermost
/// reduction copies unevaluated arguments, so some terms that innermost
/// handles quickly blow up under it.
const CAP: Limits = Limits { step_limit: 20_000, node_budget: 20_000 };

/// Unary towers make every outermost step cost the size of the term.
const UNARY_CAP: Limits = Limits { step_limit: 3_000, node_budget: 3_000 };

/// Whether all three strategies finish within `cap`; when they do, they
/// must agree.
fn agree(sys: &RewriteSystem, t: &Term, seed: u64, cap: Limits) -> bool {
    let Ok(inner) = normal_form(sys, t, Strategy::Innermost, cap) else {
        return false;
    };
    for strat in [Strategy::Outermost, Strategy::Random(seed)] {
        match normal_form(sys, t, strat, cap) {
            Ok(other) => assert_eq!(other, inner, "{}: {t} under {strat}", sys.name),
            Err(_) => return false,
        }
    }
    true
}

fn check(name: &str, exhaustive: usize, random_size: usize, cap: Limits) {
    let sys = builtin(name).unwrap();
    for (i, t) in enumerate_closed(&sys.signature, exhaustive).enumerate() {
        assert!(agree(&sys, &t, i as u64, cap), "{name}: {t} exceeds the cap");
    }
    let sampler = TermSampler::new(&sys.signature, random_size);
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut compared = 0;
    for i in 0..500 {
        let t = sampler.sample_mixed(1, random_size, &mut rng).unwrap();
        compared += agree(&sys, &t, i, cap) as usize;
    }
    eprintln!("{name}: exhaustive to size {exhaustive}; {compared} of 500 random terms to size {random_size} compared");
    assert!(compared >= 300, "{name}: only {compared} random terms within reach");
}

#[test]
fn zbud() {
    check("Zbud", 3, 9, CAP);
}

#[test]
fn ring() {
    check("RingZ", 6, 9, CAP);
}

#[test]
fn nbt() {
    check("Nbt", 6, 9, CAP);
}

#[test]
fn ndub() {
    check("Ndub", 3, 9, CAP);
}

#[test]
fn nubd() {
    // unary towers: 9*9*9 is already a tower of 729
    check("Nubd", 2, 5, UNARY_CAP);
}
