//! A uniqueness certificate for normal forms, following the usual shape of
//! ground-confluence proofs for numeral systems.
//!
//! Three facts together make every closed term have at most one normal
//! form, whatever the reduction strategy:
//!
//! 1. every rule preserves value — checked exactly, as an identity of
//!    polynomials (see [`prove_rule_sound`]);
//! 2. every irreducible closed term is a grammar member — by induction on
//!    the term it suffices that each root-irreducible `f(g1..gk)` with
//!    members `gi` is a member, which is a finite check (below);
//! 3. `eval` is injective on members.
//!
//! Any normal form `n` of `t` is then a member with `eval(n) = eval(t)`, so
//! it is the only such member.
//!
//! For (2), whether `f(g1..gk)` is a root redex of a left-linear system
//! depends only on the top `D_f` levels of the `gi`, where `D_f` is the
//! depth of the non-variable part of the argument patterns of the rules
//! rooted at `f`; whether it is a member depends only on the roots of the
//! `gi`. Members can be cut at depth `max(D_f, 1) + 1` without changing
//! either (a subterm is replaced by a constant member of the same kind),
//! so checking all members of that depth is exhaustive.
//!
//! (3) is checked on all members up to a size bound only; it is the
//! standard fact that numerals of a positional or unary notation name
//! distinct numbers.

use std::collections::HashMap;

use crate::catalog::RewriteSystem;
use crate::engine::is_root_redex;
use crate::semantics::{eval, prove_rule_sound};
use crate::term::{Head, Symbol, Term};

use super::grammar::NormalFormGrammar;

/// Members counted by the injectivity check, at most.
pub const INJECTIVITY_MEMBERS: usize = 300_000;

/// The outcome of [`certify_uniqueness`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniquenessCertificate {
    pub system: String,
    /// Tags of rules whose two sides are not equal polynomials.
    pub unprovable_rules: Vec<String>,
    /// False when some left-hand side is non-linear, which the closure
    /// argument does not cover.
    pub left_linear: bool,
    /// A root-irreducible application of a symbol to members that is not
    /// itself a member.
    pub closure_witness: Option<Term>,
    /// Largest depth of members used by the closure check.
    pub closure_depth: usize,
    /// Two distinct members with the same value.
    pub injectivity_witness: Option<(Term, Term)>,
    /// Members of size up to this bound were checked for injectivity.
    pub injectivity_size: usize,
}

impl UniquenessCertificate {
    pub fn holds(&self) -> bool {
        self.unprovable_rules.is_empty()
            && self.left_linear
            && self.closure_witness.is_none()
            && self.injectivity_witness.is_none()
    }

    /// One line for reports.
    pub fn summary(&self) -> String {
        if self.holds() {
            return format!(
                "rules value-preserving (polynomial identity); grammar closed (members to depth {}); \
                 eval injective on members to size {}",
                self.closure_depth, self.injectivity_size
            );
        }
        let mut why = Vec::new();
        if !self.unprovable_rules.is_empty() {
            why.push(format!("rules not value-preserving: {}", self.unprovable_rules.join(", ")));
        }
        if !self.left_linear {
            why.push("non-linear left-hand side".to_string());
        }
        if let Some(t) = &self.closure_witness {
            why.push(format!("irreducible non-member {t}"));
        }
        if let Some((a, b)) = &self.injectivity_witness {
            why.push(format!("members {a} and {b} have the same value"));
        }
        format!("does not hold: {}", why.join("; "))
    }
}

/// Depth of the non-variable part of a pattern.
fn pattern_depth(t: &Term) -> usize {
    match t.head() {
        Head::Var(_) => 0,
        Head::Sym(_) => 1 + t.args().iter().map(pattern_depth).max().unwrap_or(0),
    }
}

/// `D_f` for every symbol: the deepest non-variable argument pattern of a
/// rule rooted at `f`.
fn argument_depth(sys: &RewriteSystem, f: Symbol) -> usize {
    sys.rules
        .iter()
        .filter(|r| r.lhs.symbol() == Some(f))
        .flat_map(|r| r.lhs.args().iter().map(pattern_depth))
        .max()
        .unwrap_or(0)
}

fn closure_witness(sys: &RewriteSystem, grammar: &NormalFormGrammar) -> (Option<Term>, usize) {
    let mut by_depth: HashMap<usize, Vec<Term>> = HashMap::new();
    let mut deepest = 0;
    for &f in sys.signature.symbols() {
        let depth = argument_depth(sys, f).max(1) + 1;
        deepest = deepest.max(depth);
        let members = by_depth.entry(depth).or_insert_with(|| grammar.members_to_depth(depth));
        let k = f.arity() as u32;
        for mut n in 0..members.len().pow(k) {
            let mut args = Vec::with_capacity(k as usize);
            for _ in 0..k {
                args.push(members[n % members.len()].clone());
                n /= members.len();
            }
            let t = Term::app(f, args);
            if !is_root_redex(sys, &t) && !grammar.contains(&t) {
                return (Some(t), deepest);
            }
        }
    }
    (None, deepest)
}

fn injectivity(grammar: &NormalFormGrammar) -> (Option<(Term, Term)>, usize) {
    let mut seen: HashMap<num_bigint::BigInt, Term> = HashMap::new();
    let levels = grammar.levels_while(12, INJECTIVITY_MEMBERS);
    let size = levels.len() - 1;
    for t in levels.iter().flatten() {
        let v = eval(t).expect("members are closed");
        if let Some(prev) = seen.insert(v, t.clone()) {
            return (Some((prev, t.clone())), size);
        }
    }
    (None, size)
}

/// Builds the certificate for `sys` and its normal-form grammar.
///
/// ```
/// use ddrs::analysis::{certificate::certify_uniqueness, grammar_for};
/// use ddrs::catalog::builtin;
///
/// let cert = certify_uniqueness(&builtin("Zbud").unwrap(), &grammar_for("Zbud").unwrap());
/// assert!(cert.holds(), "{}", cert.summary());
/// let bad = certify_uniqueness(&builtin("Zubd-verbatim").unwrap(), &grammar_for("Zubd").unwrap());
/// assert_eq!(bad.unprovable_rules, ["u8"]);
/// ```
pub fn certify_uniqueness(sys: &RewriteSystem, grammar: &NormalFormGrammar) -> UniquenessCertificate {
    let unprovable_rules =
        sys.rules.iter().filter(|r| !prove_rule_sound(r)).map(|r| r.tag.clone()).collect();
    let left_linear = sys.is_left_linear();
    let (closure_witness, closure_depth) = closure_witness(sys, grammar);
    let (injectivity_witness, injectivity_size) = injectivity(grammar);
    UniquenessCertificate {
        system: sys.name.clone(),
        unprovable_rules,
        left_linear,
        closure_witness,
        closure_depth,
        injectivity_witness,
        injectivity_size,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::grammar::grammar_for;
    use crate::catalog::builtin;

    #[test]
    fn certificates_of_the_catalog() {
        for name in crate::catalog::BUILTIN_NAMES {
            let Ok(sys) = builtin(name) else { continue };
            let c = certify_uniqueness(&sys, &grammar_for(name).unwrap());
            match name {
                "Zubd-verbatim" => assert_eq!(c.unprovable_rules, ["u8"]),
                // the prose grammar misses irreducible sums of negatives
                "Zbi" => assert_eq!(c.closure_witness.unwrap().to_string(), "-1+-1"),
                _ => assert!(c.holds(), "{name}: {}", c.summary()),
            }
        }
    }

    #[test]
    fn missing_rules_break_closure() {
        let zbud = builtin("Zbud").unwrap();
        let rules = zbud.rules.iter().filter(|r| r.lhs.symbol() != Some(Symbol::Neg)).cloned().collect();
        let cut = RewriteSystem::new("cut", zbud.signature.clone(), rules).unwrap();
        let c = certify_uniqueness(&cut, &grammar_for("Zbud").unwrap());
        assert_eq!(c.closure_witness.as_ref().unwrap().to_string(), "-0");
        assert!(!c.holds());
    }
}
