//! Rewriting closed terms: redex search, single steps, normalization under
//! a strategy with full derivation traces, and exhaustive normal-form search.

use std::collections::VecDeque;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::catalog::RewriteSystem;
use crate::term::{match_pattern, Position, Substitution, Term, TermMap, TermSet};

pub const DEFAULT_STEP_LIMIT: usize = 1_000_000;
pub const DEFAULT_NODE_BUDGET: usize = 10_000_000;

/// Redex selection strategy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Strategy {
    #[default]
    Innermost,
    Outermost,
    /// Uniform choice among all redexes, driven by a seeded generator.
    Random(u64),
}

impl Strategy {
    pub fn label(&self) -> &'static str {
        match self {
            Strategy::Innermost => "leftmost-innermost",
            Strategy::Outermost => "leftmost-outermost",
            Strategy::Random(_) => "random-redex",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Random(seed) => write!(f, "random-redex(seed={seed})"),
            s => f.write_str(s.label()),
        }
    }
}

/// Resource limits for a normalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of rewrite steps.
    pub step_limit: usize,
    /// Maximum size of any intermediate (sub)term.
    pub node_budget: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { step_limit: DEFAULT_STEP_LIMIT, node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl Limits {
    pub fn steps(step_limit: usize) -> Self {
        Limits { step_limit, ..Limits::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("step limit of {0} reached")]
    StepLimit(usize),
    #[error("node budget exceeded: a term of size {size} exceeds {budget}")]
    NodeBudget { size: usize, budget: usize },
    #[error("term is not closed")]
    OpenTerm,
}

/// A redex occurrence: position and index of the rule in the system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Redex {
    pub position: Position,
    pub rule: usize,
    pub sigma: Substitution,
}

fn root_matches<'a>(
    sys: &'a RewriteSystem,
    t: &Term,
) -> impl Iterator<Item = (usize, Substitution)> + 'a {
    let cands = sys.candidates(t);
    let t = t.clone();
    (0..cands.len()).filter_map(move |k| {
        let i = cands[k] as usize;
        match_pattern(&sys.rules[i].lhs, &t).map(|s| (i, s))
    })
}

fn first_root_match(sys: &RewriteSystem, t: &Term) -> Option<(usize, Substitution)> {
    sys.candidates(t)
        .iter()
        .find_map(|&i| match_pattern(&sys.rules[i as usize].lhs, t).map(|s| (i as usize, s)))
}

/// Whether some rule matches at the root of `t`.
pub fn is_root_redex(sys: &RewriteSystem, t: &Term) -> bool {
    first_root_match(sys, t).is_some()
}

/// Pre-order walk keeping the current position in one buffer, so deep
/// towers cost no more than their size. Stops when `visit` returns true.
fn walk<'t>(t: &'t Term, mut visit: impl FnMut(&'t Term, &[usize]) -> bool) {
    let mut path = Vec::new();
    if visit(t, &path) {
        return;
    }
    let mut stack: Vec<(&'t Term, usize)> = vec![(t, 0)];
    while let Some(&(node, next)) = stack.last() {
        if next < node.args().len() {
            stack.last_mut().expect("nonempty").1 += 1;
            let child = &node.args()[next];
            path.push(next);
            if visit(child, &path) {
                return;
            }
            stack.push((child, 0));
        } else {
            stack.pop();
            path.pop();
        }
    }
}

/// All redexes of `t`: positions in pre-order, rules in system order.
pub fn redexes(sys: &RewriteSystem, t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    walk(t, |s, path| {
        for (rule, sigma) in root_matches(sys, s) {
            out.push(Redex { position: Position(path.to_vec()), rule, sigma });
        }
        false
    });
    out
}

/// `(position, rule tag)` for every redex of `t`, leftmost-outermost
/// positions first and rules in table order within a position.
pub fn find_redexes(sys: &RewriteSystem, t: &Term) -> Vec<(Position, String)> {
    redexes(sys, t)
        .into_iter()
        .map(|r| (r.position, sys.rules[r.rule].tag.clone()))
        .collect()
}

/// Whether no rule applies anywhere in `t`.
pub fn is_normal(sys: &RewriteSystem, t: &Term) -> bool {
    let mut stack = vec![t];
    while let Some(s) = stack.pop() {
        if is_root_redex(sys, s) {
            return false;
        }
        stack.extend(s.args());
    }
    true
}

fn outermost_redex(sys: &RewriteSystem, t: &Term) -> Option<Redex> {
    let mut found = None;
    walk(t, |s, path| {
        found = first_root_match(sys, s).map(|(rule, sigma)| Redex { position: Position(path.to_vec()), rule, sigma });
        found.is_some()
    });
    found
}

/// The `k`-th redex in [`redexes`] order.
fn nth_redex(sys: &RewriteSystem, t: &Term, mut k: usize) -> Option<Redex> {
    let mut found = None;
    walk(t, |s, path| {
        for (rule, sigma) in root_matches(sys, s) {
            if k == 0 {
                found = Some(Redex { position: Position(path.to_vec()), rule, sigma });
                return true;
            }
            k -= 1;
        }
        false
    });
    found
}

fn innermost_redex(sys: &RewriteSystem, t: &Term, path: &mut Vec<usize>) -> Option<Redex> {
    crate::deep(|| {
        for (i, a) in t.args().iter().enumerate() {
            path.push(i);
            let r = innermost_redex(sys, a, path);
            path.pop();
            if r.is_some() {
                return r;
            }
        }
        first_root_match(sys, t).map(|(rule, sigma)| Redex {
            position: Position(path.clone()),
            rule,
            sigma,
        })
    })
}

fn select(sys: &RewriteSystem, t: &Term, strat: Strategy, rng: &mut ChaCha8Rng) -> Option<Redex> {
    match strat {
        Strategy::Innermost => innermost_redex(sys, t, &mut Vec::new()),
        Strategy::Outermost => outermost_redex(sys, t),
        Strategy::Random(_) => {
            let mut n = 0;
            walk(t, |s, _| {
                n += root_matches(sys, s).count();
                false
            });
            if n == 0 {
                None
            } else {
                nth_redex(sys, t, rng.gen_range(0..n))
            }
        }
    }
}

/// Contracts `redex` in `t`.
pub fn contract(sys: &RewriteSystem, t: &Term, redex: &Redex) -> Term {
    let rhs = redex.sigma.apply(&sys.rules[redex.rule].rhs);
    t.replace_at(&redex.position, rhs).expect("redex position is valid")
}

/// One contraction at the strategy-selected redex, or `None` if `t` is
/// normal. A random strategy draws from a generator seeded afresh.
pub fn step(sys: &RewriteSystem, t: &Term, strat: Strategy) -> Option<(Term, String, Position)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_of(strat));
    let r = select(sys, t, strat, &mut rng)?;
    Some((contract(sys, t, &r), sys.rules[r.rule].tag.clone(), r.position))
}

fn seed_of(strat: Strategy) -> u64 {
    match strat {
        Strategy::Random(s) => s,
        _ => 0,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub n: usize,
    pub rule: String,
    pub position: Position,
    #[serde(serialize_with = "ser_term")]
    pub result: Term,
}

fn ser_term<S: serde::Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::syntax::print_term(t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NormalForm,
    StepLimitHit,
    /// An intermediate term outgrew the node budget.
    NodeBudgetExceeded,
}

/// A derivation from `input`, one entry per contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationTrace {
    pub system: String,
    pub input: Term,
    pub strategy: Strategy,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl DerivationTrace {
    /// The last term of the derivation.
    pub fn last(&self) -> &Term {
        self.steps.last().map_or(&self.input, |s| &s.result)
    }

    /// The trace as a `trace-v1` JSON document.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "version": "trace-v1",
            "system": self.system,
            "input": crate::syntax::print_term(&self.input),
            "strategy": self.strategy.label(),
            "steps": self.steps,
            "outcome": self.outcome,
        });
        if let Strategy::Random(seed) = self.strategy {
            v["seed"] = json!(seed);
        }
        v
    }

    /// Replays every step through matching and replacement; returns the
    /// index of the first step that does not follow from its predecessor.
    pub fn first_invalid_step(&self, sys: &RewriteSystem) -> Option<usize> {
        let mut cur = self.input.clone();
        for (k, s) in self.steps.iter().enumerate() {
            let Some(rule) = sys.rule(&s.rule) else { return Some(k) };
            let Ok(sub) = cur.subterm_at(&s.position) else { return Some(k) };
            let Some(sigma) = match_pattern(&rule.lhs, sub) else { return Some(k) };
            let next = cur.replace_at(&s.position, sigma.apply(&rule.rhs)).expect("valid");
            if next != s.result {
                return Some(k);
            }
            cur = next;
        }
        None
    }
}

enum Stop {
    Steps,
    Budget(usize),
}

/// Innermost normalization by post-order evaluation: arguments are
/// normalized before their parent, and after a root contraction the
/// right-hand side is rebuilt bottom-up over already-normal bindings.
/// The contractions performed form exactly the leftmost-innermost
/// derivation.
struct Innermost<'a> {
    sys: &'a RewriteSystem,
    limits: Limits,
    steps: usize,
    path: Vec<usize>,
    trace: Option<(Term, Vec<TraceStep>)>,
    cache: Option<TermMap<Term>>,
}

impl Innermost<'_> {
    fn budget(&self, t: &Term) -> Result<(), Stop> {
        if t.size() > self.limits.node_budget {
            Err(Stop::Budget(t.size()))
        } else {
            Ok(())
        }
    }

    fn nf(&mut self, t: &Term) -> Result<Term, Stop> {
        crate::deep(|| {
            if let Some(c) = self.cache.as_ref().and_then(|c| c.get(t)) {
                return Ok(c.clone());
            }
            let mut changed = false;
            let mut args = Vec::with_capacity(t.args().len());
            for (i, a) in t.args().iter().enumerate() {
                self.path.push(i);
                let n = self.nf(a);
                self.path.pop();
                let n = n?;
                changed |= !n.ptr_eq(a);
                args.push(n);
            }
            let t1 = if changed { t.with_args(args) } else { t.clone() };
            let out = self.root_nf(t1)?;
            if let Some(c) = self.cache.as_mut() {
                c.insert(t.clone(), out.clone());
            }
            Ok(out)
        })
    }

    fn root_nf(&mut self, t: Term) -> Result<Term, Stop> {
        let Some((rule, sigma)) = first_root_match(self.sys, &t) else {
            return Ok(t);
        };
        if self.steps >= self.limits.step_limit {
            return Err(Stop::Steps);
        }
        self.steps += 1;
        let rhs = &self.sys.rules[rule].rhs;
        if let Some((whole, log)) = self.trace.as_mut() {
            let contracted = sigma.apply(rhs);
            let pos = Position(self.path.clone());
            *whole = whole.replace_at(&pos, contracted).expect("valid path");
            log.push(TraceStep {
                n: log.len() + 1,
                rule: self.sys.rules[rule].tag.clone(),
                position: pos,
                result: whole.clone(),
            });
            let size = whole.size();
            if size > self.limits.node_budget {
                return Err(Stop::Budget(size));
            }
        }
        self.nf_rhs(rhs, &sigma)
    }

    fn nf_rhs(&mut self, pat: &Term, sigma: &Substitution) -> Result<Term, Stop> {
        crate::deep(|| {
            if let Some(v) = pat.as_var() {
                return Ok(sigma.get(v).expect("rhs variables occur in lhs").clone());
            }
            if pat.is_closed() {
                return self.nf(pat);
            }
            let mut args = Vec::with_capacity(pat.args().len());
            for (i, a) in pat.args().iter().enumerate() {
                self.path.push(i);
                let n = self.nf_rhs(a, sigma);
                self.path.pop();
                args.push(n?);
            }
            let built = pat.with_args(args);
            self.budget(&built)?;
            self.root_nf(built)
        })
    }
}

/// Normal form of `t` without recording a trace.
///
/// Under [`Strategy::Innermost`] this memoizes normal forms of subterms.
pub fn normal_form(
    sys: &RewriteSystem,
    t: &Term,
    strat: Strategy,
    limits: Limits,
) -> Result<Term, EngineError> {
    if !t.is_closed() {
        return Err(EngineError::OpenTerm);
    }
    match strat {
        Strategy::Innermost => {
            let mut m = Innermost {
                sys,
                limits,
                steps: 0,
                path: Vec::new(),
                trace: None,
                cache: Some(TermMap::default()),
            };
            m.nf(t).map_err(|e| match e {
                Stop::Steps => EngineError::StepLimit(limits.step_limit),
                Stop::Budget(size) => EngineError::NodeBudget { size, budget: limits.node_budget },
            })
        }
        _ => match run(sys, t, strat, limits, None) {
            (nf, Outcome::NormalForm) => Ok(nf),
            (_, Outcome::StepLimitHit) => Err(EngineError::StepLimit(limits.step_limit)),
            (last, Outcome::NodeBudgetExceeded) => {
                Err(EngineError::NodeBudget { size: last.size(), budget: limits.node_budget })
            }
        },
    }
}

/// Normalizes with the default node budget, recording every step.
///
/// ```
/// use ddrs::{catalog::builtin, engine::{normalize, Outcome, Strategy}, syntax::parse_term};
///
/// let zbud = builtin("Zbud").unwrap();
/// let t = parse_term("2+1", &zbud.signature).unwrap();
/// let trace = normalize(&zbud, &t, Strategy::Innermost, 1_000_000);
/// assert_eq!(trace.outcome, Outcome::NormalForm);
/// assert_eq!(trace.last().to_string(), "1:b1");
/// ```
pub fn normalize(sys: &RewriteSystem, t: &Term, strat: Strategy, step_limit: usize) -> DerivationTrace {
    normalize_with(sys, t, strat, Limits::steps(step_limit))
}

pub fn normalize_with(
    sys: &RewriteSystem,
    t: &Term,
    strat: Strategy,
    limits: Limits,
) -> DerivationTrace {
    let mut trace = DerivationTrace {
        system: sys.name.clone(),
        input: t.clone(),
        strategy: strat,
        steps: Vec::new(),
        outcome: Outcome::NormalForm,
    };
    if strat == Strategy::Innermost {
        let mut m = Innermost {
            sys,
            limits,
            steps: 0,
            path: Vec::new(),
            trace: Some((t.clone(), Vec::new())),
            cache: None,
        };
        let r = m.nf(t);
        let (_, steps) = m.trace.take().expect("tracing");
        trace.steps = steps;
        trace.outcome = match r {
            Ok(_) => Outcome::NormalForm,
            Err(Stop::Steps) => Outcome::StepLimitHit,
            Err(Stop::Budget(_)) => Outcome::NodeBudgetExceeded,
        };
        return trace;
    }
    let (_, outcome) = run(sys, t, strat, limits, Some(&mut trace.steps));
    trace.outcome = outcome;
    trace
}

/// Step-by-step reduction under `strat`, optionally recording each step.
fn run(
    sys: &RewriteSystem,
    t: &Term,
    strat: Strategy,
    limits: Limits,
    mut record: Option<&mut Vec<TraceStep>>,
) -> (Term, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed_of(strat));
    let mut cur = t.clone();
    let mut n = 0;
    loop {
        let Some(r) = select(sys, &cur, strat, &mut rng) else {
            return (cur, Outcome::NormalForm);
        };
        if n >= limits.step_limit {
            return (cur, Outcome::StepLimitHit);
        }
        n += 1;
        cur = contract(sys, &cur, &r);
        if let Some(steps) = record.as_deref_mut() {
            steps.push(TraceStep {
                n,
                rule: sys.rules[r.rule].tag.clone(),
                position: r.position,
                result: cur.clone(),
            });
        }
        if cur.size() > limits.node_budget {
            return (cur, Outcome::NodeBudgetExceeded);
        }
    }
}

/// All one-step reducts of `t`, deduplicated, in redex order.
pub fn one_step_reducts(sys: &RewriteSystem, t: &Term) -> Vec<Term> {
    let mut seen = TermSet::default();
    redexes(sys, t)
        .iter()
        .map(|r| contract(sys, t, r))
        .filter(|s| seen.insert(s.clone()))
        .collect()
}

/// Result of an exhaustive reduction-graph search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NormalForms {
    /// Every irreducible term reachable from the input, sorted.
    Complete(Vec<Term>),
    BudgetExceeded,
}

impl NormalForms {
    pub fn unique(&self) -> Option<&Term> {
        match self {
            NormalForms::Complete(v) if v.len() == 1 => Some(&v[0]),
            _ => None,
        }
    }
}

/// Breadth-first search of the whole reduction graph from `t`, visiting
/// each term once; gives up after `node_budget` distinct terms.
pub fn all_normal_forms(sys: &RewriteSystem, t: &Term, node_budget: usize) -> NormalForms {
    let mut seen = TermSet::default();
    let mut queue = VecDeque::new();
    let mut nfs = Vec::new();
    seen.insert(t.clone());
    queue.push_back(t.clone());
    while let Some(s) = queue.pop_front() {
        let next = one_step_reducts(sys, &s);
        if next.is_empty() {
            nfs.push(s);
            continue;
        }
        for n in next {
            if seen.insert(n.clone()) {
                if seen.len() > node_budget {
                    return NormalForms::BudgetExceeded;
                }
                queue.push_back(n);
            }
        }
    }
    nfs.sort();
    NormalForms::Complete(nfs)
}
