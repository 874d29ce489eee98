//! Weight functions on closed terms and ground-instance checking of
//! termination certificates.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::catalog::RewriteSystem;
use crate::term::{Head, Substitution, Symbol, Term, Var};

use super::enumerate::enumerate_closed;

/// A weight expression over the weights of a symbol's arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightExpr {
    Const(BigRational),
    /// Weight of argument `i` (0-based).
    Arg(usize),
    Add(Box<WeightExpr>, Box<WeightExpr>),
    Mul(Box<WeightExpr>, Box<WeightExpr>),
}

impl WeightExpr {
    pub fn int(n: i64) -> Self {
        WeightExpr::Const(BigRational::from_integer(n.into()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        WeightExpr::Const(BigRational::new(n.into(), d.into()))
    }

    pub fn arg(i: usize) -> Self {
        WeightExpr::Arg(i)
    }

    pub fn plus(self, o: WeightExpr) -> Self {
        WeightExpr::Add(Box::new(self), Box::new(o))
    }

    pub fn times(self, o: WeightExpr) -> Self {
        WeightExpr::Mul(Box::new(self), Box::new(o))
    }

    pub fn eval(&self, args: &[BigRational]) -> BigRational {
        match self {
            WeightExpr::Const(c) => c.clone(),
            WeightExpr::Arg(i) => args[*i].clone(),
            WeightExpr::Add(a, b) => a.eval(args) + b.eval(args),
            WeightExpr::Mul(a, b) => a.eval(args) * b.eval(args),
        }
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Const(c) => write!(f, "{c}"),
            WeightExpr::Arg(i) => write!(f, "|#{i}|"),
            WeightExpr::Add(a, b) => write!(f, "({a} + {b})"),
            WeightExpr::Mul(a, b) => write!(f, "{a}·{b}"),
        }
    }
}

/// Per-symbol weight rules; a term's weight is computed bottom-up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    pub name: String,
    pub rules: BTreeMap<Symbol, WeightExpr>,
}

impl WeightFunction {
    pub fn new(name: impl Into<String>) -> Self {
        WeightFunction { name: name.into(), rules: BTreeMap::new() }
    }

    pub fn with(mut self, sym: Symbol, e: WeightExpr) -> Self {
        self.rules.insert(sym, e);
        self
    }

    /// The ring certificate: `|0| = |1| = 2`, `|x+y| = |x| + 2|y|`,
    /// `|-x| = 1 + 3/2 |x|`, `|x*y| = |x| |y|^2`.
    pub fn ring() -> Self {
        use WeightExpr as W;
        WeightFunction::new("ring")
            .with(Symbol::Digit(0), W::int(2))
            .with(Symbol::Digit(1), W::int(2))
            .with(Symbol::Add, W::arg(0).plus(W::int(2).times(W::arg(1))))
            .with(Symbol::Neg, W::int(1).plus(W::ratio(3, 2).times(W::arg(0))))
            .with(Symbol::Mul, W::arg(0).times(W::arg(1)).times(W::arg(1)))
    }

    /// Whether every symbol of `sys` has a weight rule.
    pub fn is_total_on(&self, sys: &RewriteSystem) -> bool {
        sys.signature.symbols().iter().all(|s| self.rules.contains_key(s))
    }

    /// Weight of a closed term; `None` if it uses a symbol without a rule.
    ///
    /// ```
    /// use ddrs::{analysis::WeightFunction, syntax::parse_term, term::Signature};
    /// use num_rational::BigRational;
    ///
    /// let r = Signature::named("SigmaR").unwrap();
    /// let w = WeightFunction::ring().weight(&parse_term("1*0", &r).unwrap());
    /// assert_eq!(w, Some(BigRational::from_integer(8.into())));
    /// ```
    pub fn weight(&self, t: &Term) -> Option<BigRational> {
        self.pattern_weight(t, &BTreeMap::new())
    }

    /// Weight of a pattern whose variables have the given weights.
    pub fn pattern_weight(&self, t: &Term, vars: &BTreeMap<Var, BigRational>) -> Option<BigRational> {
        crate::deep(|| match t.head() {
            Head::Var(v) => vars.get(v).cloned(),
            Head::Sym(s) => {
                let args = t
                    .args()
                    .iter()
                    .map(|a| self.pattern_weight(a, vars))
                    .collect::<Option<Vec<_>>>()?;
                Some(self.rules.get(s)?.eval(&args))
            }
        })
    }
}

/// Outcome of [`check_weight_certificate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightVerdict {
    Pass { instances: u64 },
    Violation { rule: String, sigma: Substitution, lhs: BigRational, rhs: BigRational },
    /// The weight function has no rule for this symbol of the signature.
    NotTotal(Symbol),
}

impl WeightVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, WeightVerdict::Pass { .. })
    }
}

impl fmt::Display for WeightVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightVerdict::Pass { instances } => write!(f, "pass ({instances} ground instances)"),
            WeightVerdict::Violation { rule, sigma, lhs, rhs } => {
                write!(f, "violation at [{rule}] with {sigma}: {lhs} is not greater than {rhs}")
            }
            WeightVerdict::NotTotal(s) => write!(f, "weight function has no rule for `{s}`"),
        }
    }
}

/// Checks `w(lσ) > w(rσ)` for every rule `l -> r` of `sys` and every
/// substitution of closed terms of size at most `max_size` for its
/// variables, taking at most `trials` substitutions per rule (variables
/// vary independently, the last one fastest).
pub fn check_weight_certificate(
    sys: &RewriteSystem,
    w: &WeightFunction,
    max_size: usize,
    trials: u64,
) -> WeightVerdict {
    if let Some(s) = sys.signature.symbols().iter().find(|s| !w.rules.contains_key(s)) {
        return WeightVerdict::NotTotal(*s);
    }
    let terms: Vec<Term> = enumerate_closed(&sys.signature, max_size).collect();
    let weights: Vec<BigRational> =
        terms.iter().map(|t| w.weight(t).expect("total weight function")).collect();
    debug_assert!(weights.iter().all(|x| *x > BigRational::zero()));
    let mut instances = 0u64;
    for rule in &sys.rules {
        let vars = rule.lhs.variables();
        let k = vars.len() as u32;
        let total = (terms.len() as u64).checked_pow(k).unwrap_or(u64::MAX).min(trials);
        for idx in 0..total {
            let mut rest = idx;
            let mut choice = vec![0usize; vars.len()];
            for slot in choice.iter_mut().rev() {
                *slot = (rest % terms.len() as u64) as usize;
                rest /= terms.len() as u64;
            }
            let env: BTreeMap<Var, BigRational> =
                vars.iter().cloned().zip(choice.iter().map(|&c| weights[c].clone())).collect();
            let lhs = w.pattern_weight(&rule.lhs, &env).expect("total");
            let rhs = w.pattern_weight(&rule.rhs, &env).expect("total");
            instances += 1;
            if lhs <= rhs {
                let sigma = vars.iter().cloned().zip(choice.iter().map(|&c| terms[c].clone())).collect();
                return WeightVerdict::Violation { rule: rule.tag.clone(), sigma, lhs, rhs };
            }
        }
    }
    WeightVerdict::Pass { instances }
}
