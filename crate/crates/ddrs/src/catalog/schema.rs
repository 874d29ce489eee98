//! Parametric rules and their expansion into concrete rewrite rules.

use std::fmt;

use thiserror::Error;

use crate::term::{Family, Symbol, Term};

/// Digit successor `i'`, defined on 0..=8.
pub fn digit_succ(i: u8) -> Option<u8> {
    (i <= 8).then_some(i + 1)
}

/// The "ten minus" digit `i*`, defined on 1..=9.
pub fn digit_star(i: u8) -> Option<u8> {
    (1..=9).contains(&i).then(|| 10 - i)
}

/// A digit position inside a schema body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetaDigit {
    Lit(u8),
    /// `{i}`
    Index(char),
    /// `{i'}`
    Succ(char),
    /// `{i*}`
    Star(char),
}

impl MetaDigit {
    pub fn index(self) -> Option<char> {
        match self {
            MetaDigit::Lit(_) => None,
            MetaDigit::Index(c) | MetaDigit::Succ(c) | MetaDigit::Star(c) => Some(c),
        }
    }

    fn resolve(self, env: &[(char, u8)]) -> Result<u8, ExpandError> {
        let lookup = |c: char| {
            env.iter()
                .find(|(n, _)| *n == c)
                .map(|(_, v)| *v)
                .ok_or(ExpandError::UnboundIndex(c))
        };
        match self {
            MetaDigit::Lit(d) => Ok(d),
            MetaDigit::Index(c) => lookup(c),
            MetaDigit::Succ(c) => {
                let v = lookup(c)?;
                digit_succ(v).ok_or(ExpandError::MetaDigitOutOfDomain { op: "'", digit: v })
            }
            MetaDigit::Star(c) => {
                let v = lookup(c)?;
                digit_star(v).ok_or(ExpandError::MetaDigitOutOfDomain { op: "*", digit: v })
            }
        }
    }
}

impl fmt::Display for MetaDigit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetaDigit::Lit(d) => write!(f, "{d}"),
            MetaDigit::Index(c) => write!(f, "{{{c}}}"),
            MetaDigit::Succ(c) => write!(f, "{{{c}'}}"),
            MetaDigit::Star(c) => write!(f, "{{{c}*}}"),
        }
    }
}

/// A rule body term that may mention meta-digits and iterated `S^j` / `P^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaTerm {
    Var(String),
    Digit(MetaDigit),
    App(Symbol, Vec<SchemaTerm>),
    Append(Family, MetaDigit, Box<SchemaTerm>),
    /// `S^{j}(t)` or `P^{j}(t)`; a count of zero yields `t`.
    Iter(Symbol, MetaDigit, Box<SchemaTerm>),
}

impl SchemaTerm {
    /// Whether the body mentions any meta-digit.
    pub fn is_concrete(&self) -> bool {
        match self {
            SchemaTerm::Var(_) => true,
            SchemaTerm::Digit(m) => m.index().is_none(),
            SchemaTerm::App(_, args) => args.iter().all(SchemaTerm::is_concrete),
            SchemaTerm::Append(_, m, t) | SchemaTerm::Iter(_, m, t) => {
                m.index().is_none() && t.is_concrete()
            }
        }
    }

    fn indices(&self, out: &mut Vec<char>) {
        let mut push = |m: &MetaDigit| {
            if let Some(c) = m.index() {
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        };
        match self {
            SchemaTerm::Var(_) => {}
            SchemaTerm::Digit(m) => push(m),
            SchemaTerm::App(_, args) => args.iter().for_each(|a| a.indices(out)),
            SchemaTerm::Append(_, m, t) | SchemaTerm::Iter(_, m, t) => {
                push(m);
                t.indices(out);
            }
        }
    }

    /// Instantiates meta-digits under `env` (index name, value).
    pub fn instantiate(&self, env: &[(char, u8)]) -> Result<Term, ExpandError> {
        crate::deep(|| self.instantiate_node(env))
    }

    fn instantiate_node(&self, env: &[(char, u8)]) -> Result<Term, ExpandError> {
        Ok(match self {
            SchemaTerm::Var(v) => Term::var(v),
            SchemaTerm::Digit(m) => Term::digit(m.resolve(env)?),
            SchemaTerm::App(s, args) => Term::app(
                *s,
                args.iter().map(|a| a.instantiate(env)).collect::<Result<_, _>>()?,
            ),
            SchemaTerm::Append(fam, m, t) => {
                let d = m.resolve(env)?;
                let sym = Symbol::append(*fam, d)
                    .ok_or(ExpandError::MetaDigitOutOfDomain { op: "append", digit: d })?;
                Term::unary(sym, t.instantiate(env)?)
            }
            SchemaTerm::Iter(s, m, t) => {
                let n = m.resolve(env)?;
                let mut out = t.instantiate(env)?;
                for _ in 0..n {
                    out = Term::unary(*s, out);
                }
                out
            }
        })
    }
}

/// An index range `name in lo..hi` (inclusive on both ends).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexRange {
    pub name: char,
    pub lo: u8,
    pub hi: u8,
}

/// A parametric equation together with its index ranges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSchema {
    pub tag: String,
    pub ranges: Vec<IndexRange>,
    pub lhs: SchemaTerm,
    pub rhs: SchemaTerm,
    /// 1-based source line, 0 when built programmatically.
    pub line: usize,
}

/// A concrete oriented rule `lhs -> rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub tag: String,
    pub lhs: Term,
    pub rhs: Term,
    pub source_system: String,
}

impl RewriteRule {
    /// Builds a rule, checking that the left side is not a variable and
    /// that the right side introduces no fresh variables.
    pub fn new(
        tag: impl Into<String>,
        lhs: Term,
        rhs: Term,
        source_system: impl Into<String>,
    ) -> Result<Self, ExpandError> {
        let tag = tag.into();
        if lhs.is_var() {
            return Err(ExpandError::LhsIsVariable(tag));
        }
        let lv = lhs.variables();
        if let Some(v) = rhs.variables().into_iter().find(|v| !lv.contains(v)) {
            return Err(ExpandError::ExtraRhsVariable { tag, var: v.name().to_string() });
        }
        Ok(RewriteRule { tag, lhs, rhs, source_system: source_system.into() })
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {} -> {}", self.tag, self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("meta-digit out of domain: {digit}{op} is undefined")]
    MetaDigitOutOfDomain { op: &'static str, digit: u8 },
    #[error("index `{0}` is used but has no range")]
    UnboundIndex(char),
    #[error("rule [{0}]: left-hand side is a variable")]
    LhsIsVariable(String),
    #[error("rule [{tag}]: variable `{var}` occurs on the right but not on the left")]
    ExtraRhsVariable { tag: String, var: String },
}

/// Error raised while expanding a schema, with the offending tag.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule [{tag}]: {source}")]
pub struct SchemaError {
    pub tag: String,
    #[source]
    pub source: ExpandError,
}

fn instance_tag(tag: &str, env: &[(char, u8)]) -> String {
    tag.split('.')
        .map(|seg| {
            let mut cs = seg.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => match env.iter().find(|(n, _)| *n == c) {
                    Some((_, v)) => v.to_string(),
                    None => seg.to_string(),
                },
                _ => seg.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join(".")
}

/// Expands a schema into one concrete rule per index tuple.
///
/// Tuples are visited with the first index outermost; tag segments that
/// name an index are replaced by its value, so `b10.i.j` at `i=0, j=1`
/// becomes `b10.0.1`.
pub fn expand(schema: &RuleSchema, source_system: &str) -> Result<Vec<RewriteRule>, SchemaError> {
    let err = |source| SchemaError { tag: schema.tag.clone(), source };
    let mut used = Vec::new();
    schema.lhs.indices(&mut used);
    schema.rhs.indices(&mut used);
    if let Some(&c) = used.iter().find(|c| !schema.ranges.iter().any(|r| r.name == **c)) {
        return Err(err(ExpandError::UnboundIndex(c)));
    }
    let mut envs: Vec<Vec<(char, u8)>> = vec![Vec::new()];
    for r in &schema.ranges {
        envs = envs
            .into_iter()
            .flat_map(|env| {
                (r.lo..=r.hi).map(move |v| {
                    let mut e = env.clone();
                    e.push((r.name, v));
                    e
                })
            })
            .collect();
    }
    envs.iter()
        .map(|env| {
            let lhs = schema.lhs.instantiate(env).map_err(err)?;
            let rhs = schema.rhs.instantiate(env).map_err(err)?;
            RewriteRule::new(instance_tag(&schema.tag, env), lhs, rhs, source_system).map_err(err)
        })
        .collect()
}
