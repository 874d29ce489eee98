//! Integer semantics of closed terms and rule soundness checking.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::enumerate::TermSampler;
use crate::catalog::{RewriteRule, RewriteSystem};
use crate::syntax::parse_term;
use crate::term::{Head, Signature, Substitution, Symbol, Term, TermMap, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot evaluate a term with variables")]
    OpenTerm,
}

/// The integer denoted by a closed term.
///
/// ```
/// use ddrs::{semantics::eval, syntax::parse_term, term::Signature};
///
/// let z = Signature::named("SigmaZ").unwrap();
/// let t = parse_term("(9:d7):d5", &z).unwrap();
/// assert_eq!(eval(&t).unwrap(), 975.into());
/// ```
pub fn eval(t: &Term) -> Result<BigInt, EvalError> {
    if !t.is_closed() {
        return Err(EvalError::OpenTerm);
    }
    // Normal forms and rule instances share subterms heavily; memoize on
    // structural equality so shared towers are evaluated once.
    let mut memo = TermMap::default();
    Ok(eval_node(t, &mut memo))
}

fn eval_node(t: &Term, memo: &mut TermMap<BigInt>) -> BigInt {
    if t.size() <= 2 {
        return eval_small(t);
    }
    // unary towers: walk the chain instead of recursing and memoizing
    let mut offset = 0i64;
    let mut base = t;
    while let Some(sym @ (Symbol::Succ | Symbol::Pred | Symbol::AppendU)) = base.symbol() {
        offset += if sym == Symbol::Pred { -1 } else { 1 };
        base = &base.args()[0];
    }
    if offset != 0 || !std::ptr::eq(base, t) {
        return eval_node(base, memo) + offset;
    }
    if let Some(v) = memo.get(t) {
        return v.clone();
    }
    let v = crate::deep(|| {
        let sym = match t.head() {
            Head::Sym(s) => *s,
            Head::Var(_) => unreachable!("closed"),
        };
        let a: Vec<BigInt> = t.args().iter().map(|a| eval_node(a, memo)).collect();
        apply(sym, a)
    });
    memo.insert(t.clone(), v.clone());
    v
}

fn eval_small(t: &Term) -> BigInt {
    let sym = t.symbol().expect("closed");
    let a: Vec<BigInt> = t.args().iter().map(eval_small).collect();
    apply(sym, a)
}

fn apply(sym: Symbol, mut a: Vec<BigInt>) -> BigInt {
    let mut take = || a.remove(0);
    match sym {
        Symbol::Digit(d) => BigInt::from(d),
        Symbol::Succ => take() + 1,
        Symbol::Pred => take() - 1,
        Symbol::Neg => -take(),
        Symbol::Add => take() + take(),
        Symbol::Mul => take() * take(),
        Symbol::AppendB(i) => take() * 2 + i,
        Symbol::AppendD(i) => take() * 10 + i,
        Symbol::AppendU => take() + 1,
        Symbol::TreeU => take() + take() + 1,
        Symbol::TreeB => {
            let x = take();
            x * 2 + take()
        }
        Symbol::TreeD => {
            let x = take();
            x * 10 + take()
        }
    }
}

/// A polynomial with integer coefficients over rule variables; monomials
/// are sorted `(variable, power)` lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Polynomial(BTreeMap<Vec<(Var, u32)>, BigInt>);

impl Polynomial {
    pub fn constant(c: impl Into<BigInt>) -> Self {
        let c = c.into();
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(Vec::new(), c);
        }
        Polynomial(m)
    }

    pub fn var(v: &Var) -> Self {
        Polynomial(BTreeMap::from([(vec![(v.clone(), 1)], BigInt::one())]))
    }

    pub fn add(&self, o: &Polynomial) -> Polynomial {
        let mut m = self.0.clone();
        for (k, c) in &o.0 {
            let e = m.entry(k.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                m.remove(k);
            }
        }
        Polynomial(m)
    }

    pub fn scale(&self, c: &BigInt) -> Polynomial {
        if c.is_zero() {
            return Polynomial::default();
        }
        Polynomial(self.0.iter().map(|(k, v)| (k.clone(), v * c)).collect())
    }

    pub fn mul(&self, o: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &o.0 {
                let mut k: BTreeMap<Var, u32> = ka.iter().cloned().collect();
                for (v, p) in kb {
                    *k.entry(v.clone()).or_insert(0) += p;
                }
                let mono = Polynomial(BTreeMap::from([(k.into_iter().collect(), ca * cb)]));
                out = out.add(&mono);
            }
        }
        out
    }
}

/// The value of a pattern as a polynomial in its variables.
pub fn symbolic_eval(t: &Term) -> Polynomial {
    crate::deep(|| match t.head() {
        Head::Var(v) => Polynomial::var(v),
        Head::Sym(sym) => {
            let a: Vec<Polynomial> = t.args().iter().map(symbolic_eval).collect();
            let c = |n: i64| Polynomial::constant(n);
            match *sym {
                Symbol::Digit(d) => c(d as i64),
                Symbol::Succ | Symbol::AppendU => a[0].add(&c(1)),
                Symbol::Pred => a[0].add(&c(-1)),
                Symbol::Neg => a[0].scale(&BigInt::from(-1)),
                Symbol::Add => a[0].add(&a[1]),
                Symbol::Mul => a[0].mul(&a[1]),
                Symbol::AppendB(i) => a[0].scale(&BigInt::from(2)).add(&c(i as i64)),
                Symbol::AppendD(i) => a[0].scale(&BigInt::from(10)).add(&c(i as i64)),
                Symbol::TreeU => a[0].add(&a[1]).add(&c(1)),
                Symbol::TreeB => a[0].scale(&BigInt::from(2)).add(&a[1]),
                Symbol::TreeD => a[0].scale(&BigInt::from(10)).add(&a[1]),
            }
        }
    })
}

/// Whether both sides of the rule denote the same polynomial, i.e. the
/// rule is sound for every integer value of its variables. This is a
/// proof, not a test; it is stronger than [`check_rule_soundness`].
pub fn prove_rule_sound(rule: &RewriteRule) -> bool {
    symbolic_eval(&rule.lhs) == symbolic_eval(&rule.rhs)
}

/// Outcome of checking one rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sound,
    Counterexample(Substitution),
}

impl Verdict {
    pub fn is_sound(&self) -> bool {
        matches!(self, Verdict::Sound)
    }
}

/// Boundary terms tried before any random substitution, most telling
/// first; those not expressible over the signature are skipped.
const BOUNDARY: &[&str] = &[
    "0", "S(0)", "1", "P(0)", "9", "-1", "-S(0)", "0:u0", "(0:u0):u0", "(1:b0):b1", "(9:d7):d5",
    "0 ^u 0", "1 ^b 0", "1 ^d 2", "1+1", "-(1+1)",
];

/// The deterministic substitution pool for a signature.
pub fn boundary_terms(sig: &Signature) -> Vec<Term> {
    let mut out: Vec<Term> = Vec::new();
    for src in BOUNDARY {
        if let Ok(t) = parse_term(src, sig) {
            if !out.contains(&t) {
                out.push(t);
            }
        }
    }
    out
}

/// Largest deterministic product tried before switching to random trials.
const MAX_DETERMINISTIC: usize = 4096;

/// Checks `eval(lhs σ) = eval(rhs σ)` for the deterministic boundary
/// substitutions and then `trials` random closed substitutions over `sig`
/// (sizes 1–7). Returns the first failing substitution.
pub fn check_rule_soundness(rule: &RewriteRule, sig: &Signature, trials: usize, seed: u64) -> Verdict {
    let vars = rule.lhs.variables();
    let test = |sigma: &Substitution| -> bool {
        eval(&sigma.apply(&rule.lhs)).ok() == eval(&sigma.apply(&rule.rhs)).ok()
    };
    let pool = boundary_terms(sig);
    if vars.is_empty() {
        let s = Substitution::new();
        return if test(&s) { Verdict::Sound } else { Verdict::Counterexample(s) };
    }
    // Deterministic: the full product of the pool over the variables, in
    // odometer order with the first variable slowest, while it stays small.
    let k = vars.len();
    let total = pool.len().checked_pow(k as u32).unwrap_or(usize::MAX);
    if !pool.is_empty() && total <= MAX_DETERMINISTIC {
        for idx in 0..total {
            let mut rest = idx;
            let mut choice = vec![0usize; k];
            for slot in choice.iter_mut().rev() {
                *slot = rest % pool.len();
                rest /= pool.len();
            }
            let sigma = substitution(&vars, choice.iter().map(|&c| pool[c].clone()));
            if !test(&sigma) {
                return Verdict::Counterexample(sigma);
            }
        }
    } else {
        for t in &pool {
            let sigma = substitution(&vars, std::iter::repeat(t.clone()));
            if !test(&sigma) {
                return Verdict::Counterexample(sigma);
            }
        }
    }
    let sampler = TermSampler::new(sig, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let terms: Vec<Term> = (0..k)
            .map(|_| sampler.sample_mixed(1, 7, &mut rng).expect("signature has constants"))
            .collect();
        let sigma = substitution(&vars, terms.into_iter());
        if !test(&sigma) {
            return Verdict::Counterexample(sigma);
        }
    }
    Verdict::Sound
}

fn substitution(vars: &[Var], terms: impl Iterator<Item = Term>) -> Substitution {
    vars.iter().cloned().zip(terms).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RuleVerdict {
    pub tag: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub system: String,
    pub rules: Vec<RuleVerdict>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.rules.iter().all(|r| r.counterexample.is_none())
    }

    pub fn unsound_tags(&self) -> Vec<&str> {
        self.rules.iter().filter(|r| r.counterexample.is_some()).map(|r| r.tag.as_str()).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Checks every rule of `sys` over its own signature; rule `i` draws its
/// random substitutions from seed `seed + i`.
pub fn check_system_soundness(sys: &RewriteSystem, trials: usize, seed: u64) -> SoundnessReport {
    use rayon::prelude::*;
    let rules = crate::analysis::pool().install(|| {
        sys.rules
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let v = check_rule_soundness(r, &sys.signature, trials, seed.wrapping_add(i as u64));
                RuleVerdict {
                    tag: r.tag.clone(),
                    verdict: if v.is_sound() { "sound" } else { "unsound" },
                    counterexample: match v {
                        Verdict::Sound => None,
                        Verdict::Counterexample(s) => Some(s.to_string()),
                    },
                }
            })
            .collect()
    });
    SoundnessReport { system: sys.name.clone(), rules }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::builtin;
    use crate::syntax::parse_pattern;

    fn z(s: &str) -> Term {
        parse_term(s, &Signature::named("SigmaZext").unwrap()).unwrap()
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(eval(&z("(9:d7):d5")).unwrap(), 975.into());
        assert_eq!(eval(&z("((1:b0):b0):b1")).unwrap(), 9.into());
        assert_eq!(eval(&z("-((0:u0):u0)")).unwrap(), (-2).into());
        assert_eq!(eval(&z("3 ^d -4")).unwrap(), 26.into());
        assert_eq!(eval(&z("P(3) ^d 6")).unwrap(), 26.into());
        assert_eq!(eval(&z("1 ^u 1")).unwrap(), 3.into());
        assert_eq!(eval(&z("1 ^b 1")).unwrap(), 3.into());
        let x = parse_pattern("x+1", &Signature::named("SigmaZ").unwrap()).unwrap();
        assert_eq!(eval(&x), Err(EvalError::OpenTerm));
    }

    #[test]
    fn deep_towers_evaluate() {
        let mut t = Term::digit(0);
        for _ in 0..100_000 {
            t = Term::succ(t);
        }
        assert_eq!(eval(&t).unwrap(), 100_000.into());
    }

    #[test]
    fn rule_soundness_examples() {
        let ring = builtin("RingZ").unwrap();
        assert!(check_rule_soundness(ring.rule("r11").unwrap(), &ring.signature, 100, 7).is_sound());
        let v = builtin("Zubd-verbatim").unwrap();
        match check_rule_soundness(v.rule("u8").unwrap(), &v.signature, 100, 7) {
            Verdict::Counterexample(s) => assert_eq!(s.to_string(), "{x -> S(0)}"),
            Verdict::Sound => panic!("u8 as printed is unsound"),
        }
        let zdt = builtin("Zdt").unwrap();
        let dt24 = zdt.rules.iter().find(|r| r.tag.starts_with("dt24")).unwrap();
        assert!(check_rule_soundness(dt24, &zdt.signature, 50, 1).is_sound());
    }

    #[test]
    fn polynomial_identities() {
        for name in ["Zbud", "RingZ", "Zdub", "Zdt", "Zbi", "Zut", "Zu1"] {
            let sys = builtin(name).unwrap();
            for r in &sys.rules {
                assert!(prove_rule_sound(r), "{name} {r}");
            }
        }
        let v = builtin("Zubd-verbatim").unwrap();
        let bad: Vec<_> = v.rules.iter().filter(|r| !prove_rule_sound(r)).map(|r| r.tag.as_str()).collect();
        assert_eq!(bad, ["u8"]);
    }

    #[test]
    fn boundary_pool_respects_signature() {
        let r = Signature::named("SigmaR").unwrap();
        let pool: Vec<String> = boundary_terms(&r).iter().map(|t| t.to_string()).collect();
        assert_eq!(pool, ["0", "1", "-1", "1+1", "-(1+1)"]);
    }
}
