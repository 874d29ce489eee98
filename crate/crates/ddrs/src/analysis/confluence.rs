//! Exact normal-form sets and the ground-confluence desk check.
//!
//! [`NfOracle`] computes the set of all normal forms reachable from a
//! closed term without walking the reduction graph. For a left-linear
//! system every reduction `t ->* u` can be reorganized so that the root is
//! only ever rewritten at "head reducts" of `t`: terms reached by
//! contracting at the root after rewriting the arguments just enough for
//! the non-variable part of a left-hand side to appear, with variables
//! bound to the original, unrewritten subterms. Reductions under those
//! bindings commute past the root step. Hence
//!
//! ```text
//! NF(t) = { h.root(n1..nk) | h in HR(t), ni in NF(h.arg(i)), root-irreducible }
//! ```
//!
//! and `HR` is computed with the same decomposition recursively on the
//! arguments. Both maps are memoized across calls, which is what makes
//! checking every term up to a size bound affordable. The recursion is
//! well-founded when the system terminates; re-entering a term that is
//! still being expanded is reported as divergence.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::catalog::RewriteSystem;
use crate::engine::{
    all_normal_forms, is_normal, is_root_redex, normal_form, EngineError, Limits, NormalForms, Strategy,
    DEFAULT_NODE_BUDGET, DEFAULT_STEP_LIMIT,
};
use crate::semantics::eval;
use crate::term::{Substitution, Term, TermMap, TermSet, SYMBOL_COUNT};

use super::certificate::{certify_uniqueness, UniquenessCertificate};
use super::enumerate::{count_up_to, levels, TermSampler};
use super::grammar::NormalFormGrammar;

/// Why the oracle gave up on a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleStop {
    /// More than the node budget of new terms was built for one query.
    Budget,
    /// A term was reached again while its own reducts were being
    /// computed: the system does not terminate on it.
    Divergence,
}

/// Memoizing computation of exact normal-form sets.
pub struct NfOracle<'a> {
    sys: &'a RewriteSystem,
    by_root: Vec<Vec<usize>>,
    left_linear: bool,
    hr: TermMap<Arc<[Term]>>,
    nf: TermMap<Arc<[Term]>>,
    active: TermSet,
    work: usize,
    budget: usize,
}

impl<'a> NfOracle<'a> {
    pub fn new(sys: &'a RewriteSystem, node_budget: usize) -> Self {
        let mut by_root = vec![Vec::new(); SYMBOL_COUNT];
        for (i, r) in sys.rules.iter().enumerate() {
            if let Some(s) = r.lhs.symbol() {
                by_root[s.id()].push(i);
            }
        }
        NfOracle {
            sys,
            by_root,
            left_linear: sys.is_left_linear(),
            hr: TermMap::default(),
            nf: TermMap::default(),
            active: TermSet::default(),
            work: 0,
            budget: node_budget,
        }
    }

    /// Every normal form reachable from the closed term `t`, sorted.
    ///
    /// Systems with a non-linear left-hand side fall back to exhaustive
    /// search of the reduction graph.
    pub fn normal_forms(&mut self, t: &Term) -> Result<Arc<[Term]>, OracleStop> {
        self.work = 0;
        if !self.left_linear {
            return match all_normal_forms(self.sys, t, self.budget) {
                NormalForms::Complete(v) => Ok(v.into()),
                NormalForms::BudgetExceeded => Err(OracleStop::Budget),
            };
        }
        let r = self.nf_of(t);
        if r.is_err() {
            // abandoned expansions leave no memo entries, but may leave
            // markers behind
            self.active.clear();
        }
        r
    }

    /// Number of memoized terms; useful for sizing runs.
    pub fn memo_len(&self) -> usize {
        self.hr.len() + self.nf.len()
    }

    /// Drops all memoized results.
    pub fn clear(&mut self) {
        self.hr.clear();
        self.nf.clear();
        self.active.clear();
    }

    fn charge(&mut self, n: usize) -> Result<(), OracleStop> {
        self.work += n;
        if self.work > self.budget {
            Err(OracleStop::Budget)
        } else {
            Ok(())
        }
    }

    fn nf_of(&mut self, t: &Term) -> Result<Arc<[Term]>, OracleStop> {
        if let Some(v) = self.nf.get(t) {
            return Ok(v.clone());
        }
        let out = crate::deep(|| -> Result<Arc<[Term]>, OracleStop> {
            let heads = self.head_reducts(t)?;
            let mut found = TermSet::default();
            for h in heads.iter() {
                let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
                for a in h.args() {
                    let nfs = self.nf_of(a)?;
                    self.charge(combos.len() * nfs.len())?;
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            nfs.iter().map(move |n| {
                                let mut c = c.clone();
                                c.push(n.clone());
                                c
                            })
                        })
                        .collect();
                }
                for args in combos {
                    let u = if args.is_empty() { h.clone() } else { h.with_args(args) };
                    if !is_root_redex(self.sys, &u) {
                        found.insert(u);
                    }
                }
            }
            let mut v: Vec<Term> = found.into_iter().collect();
            v.sort();
            Ok(v.into())
        })?;
        self.nf.insert(t.clone(), out.clone());
        Ok(out)
    }

    /// `t` together with every term obtained by repeatedly contracting a
    /// root redex exposed by rewriting arguments, as described above.
    fn head_reducts(&mut self, t: &Term) -> Result<Arc<[Term]>, OracleStop> {
        if let Some(v) = self.hr.get(t) {
            return Ok(v.clone());
        }
        if !self.active.insert(t.clone()) {
            return Err(OracleStop::Divergence);
        }
        let mut set = vec![t.clone()];
        let mut seen = TermSet::default();
        seen.insert(t.clone());
        let mut i = 0;
        while i < set.len() {
            let u = set[i].clone();
            i += 1;
            let Some(sym) = u.symbol() else { continue };
            for k in 0..self.by_root[sym.id()].len() {
                let rule = self.by_root[sym.id()][k];
                let lhs = self.sys.rules[rule].lhs.clone();
                for sigma in self.match_root(&u, &lhs)? {
                    let r = sigma.apply(&self.sys.rules[rule].rhs);
                    if seen.insert(r.clone()) {
                        self.charge(1)?;
                        set.push(r);
                    }
                }
            }
        }
        self.active.remove(t);
        let v: Arc<[Term]> = set.into();
        self.hr.insert(t.clone(), v.clone());
        Ok(v)
    }

    /// Substitutions `σ` such that rewriting inside the arguments of `u`
    /// can produce `pattern σ'` with `σ(x) ->* σ'(x)`, where each `σ(x)`
    /// is an unrewritten subterm. `u` and `pattern` share the root symbol.
    fn match_root(&mut self, u: &Term, pattern: &Term) -> Result<Vec<Substitution>, OracleStop> {
        let mut acc = vec![Substitution::new()];
        for (a, p) in u.args().iter().zip(pattern.args()) {
            let subs = self.match_below(a, p)?;
            if subs.is_empty() {
                return Ok(Vec::new());
            }
            if subs.len() == 1 && subs[0].is_empty() {
                continue;
            }
            acc = acc.iter().flat_map(|s| subs.iter().map(move |t| s.merged(t))).collect();
        }
        Ok(acc)
    }

    fn match_below(&mut self, s: &Term, pattern: &Term) -> Result<Vec<Substitution>, OracleStop> {
        if let Some(v) = pattern.as_var() {
            let mut sigma = Substitution::new();
            sigma.insert(v.clone(), s.clone());
            return Ok(vec![sigma]);
        }
        if pattern.is_closed() && s == pattern {
            return Ok(vec![Substitution::new()]);
        }
        let sym = pattern.symbol();
        let heads = self.head_reducts(s)?;
        let mut out: Vec<Substitution> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for h in heads.iter() {
            if h.symbol() != sym {
                continue;
            }
            for sigma in self.match_root(h, pattern)? {
                if seen.insert(sigma.clone()) {
                    out.push(sigma);
                }
            }
        }
        Ok(out)
    }
}

/// What went wrong for one enumerated term.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FailureKind {
    /// More than one normal form is reachable.
    DistinctNormalForms { normal_forms: Vec<String> },
    /// The term (or its normal form) is irreducible but not in the grammar.
    NonGrammarNormalForm { normal_form: String },
    /// The term is in the grammar but some rule applies to it.
    ReducibleGrammarMember,
    /// The unique normal form has a different value than the input.
    ValueChanged { normal_form: String },
    /// Neither the search nor the certificate settled the term.
    BudgetExceeded,
    /// The search revisited a term it was still expanding.
    Divergence,
    /// Normalization hit the step limit (possible divergence; kept apart
    /// from confluence failures).
    StepLimit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundFailure {
    pub term: String,
    #[serde(flatten)]
    pub kind: FailureKind,
}

/// Outcome of [`check_ground_confluence`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroundCheckReport {
    pub system: String,
    pub max_size: usize,
    pub checked: u64,
    /// `exhaustive` or `sampled`.
    pub mode: String,
    /// Terms whose normal-form set was computed exactly.
    pub searched: u64,
    /// Terms settled by the uniqueness certificate after the search
    /// budget ran out.
    pub certified: u64,
    /// Summary of the uniqueness certificate, if one was built.
    pub certificate: Option<String>,
    pub failure_count: u64,
    /// The first [`MAX_RECORDED`] failures in term order.
    pub failures: Vec<GroundFailure>,
}

/// Failures kept verbatim in a report; the rest are only counted.
pub const MAX_RECORDED: usize = 10_000;

impl GroundCheckReport {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn count_of(&self, pred: impl Fn(&FailureKind) -> bool) -> usize {
        self.failures.iter().filter(|f| pred(&f.kind)).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

/// Resource bounds for a ground check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroundCheckConfig {
    pub max_size: usize,
    /// Work allowed to the exact normal-form search per term.
    pub search_budget: usize,
    /// Limits for the innermost normalization of a certified term.
    pub step_limit: usize,
    pub node_budget: usize,
    /// Use the uniqueness certificate for terms the search gives up on.
    pub certify: bool,
}

impl GroundCheckConfig {
    pub fn new(max_size: usize) -> Self {
        GroundCheckConfig {
            max_size,
            search_budget: 500,
            step_limit: DEFAULT_STEP_LIMIT,
            node_budget: DEFAULT_NODE_BUDGET,
            certify: true,
        }
    }
}

/// How a term was settled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Settled {
    Searched,
    Certified,
    Failed,
}

/// Checks one closed term: irreducible iff in the grammar, exactly one
/// normal form, that normal form in the grammar and of the same value.
///
/// The normal-form set comes from `oracle`. When its budget runs out and
/// `certified` is set (see [`certify_uniqueness`]), the innermost normal
/// form is computed instead; the certificate makes it the only one once it
/// is a member of the right value.
pub fn check_term(
    oracle: &mut NfOracle<'_>,
    grammar: &NormalFormGrammar,
    certified: bool,
    limits: Limits,
    t: &Term,
    out: &mut Vec<GroundFailure>,
) -> Settled {
    let sys = oracle.sys;
    let before = out.len();
    let mut fail = |kind| out.push(GroundFailure { term: t.to_string(), kind });
    let irreducible = is_normal(sys, t);
    let member = grammar.contains(t);
    if irreducible && !member {
        fail(FailureKind::NonGrammarNormalForm { normal_form: t.to_string() });
    }
    if member && !irreducible {
        fail(FailureKind::ReducibleGrammarMember);
    }
    let value = eval(t).ok();
    let check_nf = |nf: &Term, fail: &mut dyn FnMut(FailureKind)| {
        if !irreducible && !grammar.contains(nf) {
            fail(FailureKind::NonGrammarNormalForm { normal_form: nf.to_string() });
        }
        if eval(nf).ok() != value {
            fail(FailureKind::ValueChanged { normal_form: nf.to_string() });
        }
    };
    let how = match oracle.normal_forms(t) {
        Err(OracleStop::Budget) if certified => {
            match normal_form(sys, t, Strategy::Innermost, limits) {
                Ok(nf) => check_nf(&nf, &mut fail),
                Err(EngineError::StepLimit(_)) => fail(FailureKind::StepLimit),
                Err(_) => fail(FailureKind::BudgetExceeded),
            }
            Settled::Certified
        }
        Err(OracleStop::Budget) => {
            fail(FailureKind::BudgetExceeded);
            Settled::Failed
        }
        Err(OracleStop::Divergence) => {
            fail(FailureKind::Divergence);
            Settled::Failed
        }
        Ok(nfs) if nfs.len() != 1 => {
            fail(FailureKind::DistinctNormalForms { normal_forms: nfs.iter().map(|n| n.to_string()).collect() });
            Settled::Searched
        }
        Ok(nfs) => {
            check_nf(&nfs[0], &mut fail);
            Settled::Searched
        }
    };
    if out.len() > before {
        Settled::Failed
    } else {
        how
    }
}

/// Memo entries kept per worker before the oracle is reset.
const MEMO_LIMIT: usize = 4_000_000;

#[derive(Default)]
struct Tally {
    failures: Vec<GroundFailure>,
    searched: u64,
    certified: u64,
}

fn run_chunks(
    sys: &RewriteSystem,
    grammar: &NormalFormGrammar,
    terms: &[Term],
    cfg: &GroundCheckConfig,
    certified: bool,
) -> Tally {
    use rayon::prelude::*;
    let pool = super::pool();
    let chunk = terms.len().div_ceil(pool.current_num_threads() * 4).max(1);
    let parts: Vec<Tally> = pool.install(|| {
        terms
            .par_chunks(chunk)
            .map(|ts| {
                let mut oracle = NfOracle::new(sys, cfg.search_budget);
                let mut tally = Tally::default();
                for t in ts {
                    if oracle.memo_len() > MEMO_LIMIT {
                        oracle.clear();
                    }
                    let limits = Limits { step_limit: cfg.step_limit, node_budget: cfg.node_budget };
                    match check_term(&mut oracle, grammar, certified, limits, t, &mut tally.failures) {
                        Settled::Searched => tally.searched += 1,
                        Settled::Certified => tally.certified += 1,
                        Settled::Failed => {}
                    }
                }
                tally
            })
            .collect()
    });
    let mut all = Tally::default();
    for p in parts {
        all.failures.extend(p.failures);
        all.searched += p.searched;
        all.certified += p.certified;
    }
    all
}

fn certificate(sys: &RewriteSystem, grammar: &NormalFormGrammar, cfg: &GroundCheckConfig) -> Option<UniquenessCertificate> {
    cfg.certify.then(|| certify_uniqueness(sys, grammar))
}

fn report(
    sys: &RewriteSystem,
    max_size: usize,
    mode: &str,
    checked: u64,
    tally: Tally,
    cert: Option<&UniquenessCertificate>,
) -> GroundCheckReport {
    let failure_count = tally.failures.len() as u64;
    let mut failures = tally.failures;
    failures.truncate(MAX_RECORDED);
    GroundCheckReport {
        system: sys.name.clone(),
        max_size,
        checked,
        mode: mode.to_string(),
        searched: tally.searched,
        certified: tally.certified,
        certificate: cert.map(|c| c.summary()),
        failure_count,
        failures,
    }
}

/// Checks every closed term over the system's signature up to `max_size`,
/// with the default [`GroundCheckConfig`] and `node_budget` as the
/// per-term search budget.
///
/// ```
/// use ddrs::analysis::{check_ground_confluence, grammar_for};
/// use ddrs::catalog::builtin;
///
/// let ring = builtin("RingZ").unwrap();
/// let report = check_ground_confluence(&ring, &grammar_for("RingZ").unwrap(), 4, 100_000);
/// assert!(report.passed());
/// assert_eq!(report.checked, 40);
/// ```
pub fn check_ground_confluence(
    sys: &RewriteSystem,
    grammar: &NormalFormGrammar,
    max_size: usize,
    node_budget: usize,
) -> GroundCheckReport {
    let cfg = GroundCheckConfig { search_budget: node_budget, ..GroundCheckConfig::new(max_size) };
    check_ground_confluence_with(sys, grammar, &cfg)
}

/// Exhaustive check under an explicit configuration. Work is spread over
/// `DDRS_WORKERS` threads; failures are listed in enumeration order
/// regardless.
pub fn check_ground_confluence_with(
    sys: &RewriteSystem,
    grammar: &NormalFormGrammar,
    cfg: &GroundCheckConfig,
) -> GroundCheckReport {
    let cert = certificate(sys, grammar, cfg);
    let holds = cert.as_ref().is_some_and(|c| c.holds());
    let mut tally = Tally::default();
    let mut checked = 0u64;
    for level in levels(&sys.signature, cfg.max_size) {
        checked += level.len() as u64;
        let t = run_chunks(sys, grammar, &level, cfg, holds);
        tally.failures.extend(t.failures);
        tally.searched += t.searched;
        tally.certified += t.certified;
    }
    report(sys, cfg.max_size, "exhaustive", checked, tally, cert.as_ref())
}

/// Like [`check_ground_confluence_with`] but on `samples` random terms of
/// mixed sizes `1..=max_size`, for bounds too large to enumerate.
pub fn check_ground_confluence_sampled(
    sys: &RewriteSystem,
    grammar: &NormalFormGrammar,
    cfg: &GroundCheckConfig,
    samples: usize,
    seed: u64,
) -> GroundCheckReport {
    let cert = certificate(sys, grammar, cfg);
    let holds = cert.as_ref().is_some_and(|c| c.holds());
    let sampler = TermSampler::new(&sys.signature, cfg.max_size);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<Term> = (0..samples)
        .filter_map(|_| sampler.sample_mixed(1, cfg.max_size, &mut rng))
        .collect();
    let tally = run_chunks(sys, grammar, &terms, cfg, holds);
    report(sys, cfg.max_size, "sampled", terms.len() as u64, tally, cert.as_ref())
}

/// Terms enumerated exhaustively before switching to sampling.
pub const EXHAUSTIVE_LIMIT: u128 = 2_000_000;

/// Random terms checked when the bound is too large to enumerate.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Exhaustive when the number of terms is at most [`EXHAUSTIVE_LIMIT`],
/// sampled ([`DEFAULT_SAMPLES`] terms) otherwise.
pub fn check_ground_confluence_auto(
    sys: &RewriteSystem,
    grammar: &NormalFormGrammar,
    cfg: &GroundCheckConfig,
    seed: u64,
) -> GroundCheckReport {
    if count_up_to(&sys.signature, cfg.max_size) <= EXHAUSTIVE_LIMIT {
        check_ground_confluence_with(sys, grammar, cfg)
    } else {
        check_ground_confluence_sampled(sys, grammar, cfg, DEFAULT_SAMPLES, seed)
    }
}
