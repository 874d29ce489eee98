//! Built-in rewrite systems, rule files and the rule index used for matching.

pub mod schema;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::syntax::{parse_ddrs_file, print_term, SyntaxError};
use crate::term::{Signature, Symbol, Term, SYMBOL_COUNT};
pub use schema::{
    digit_star, digit_succ, expand, ExpandError, IndexRange, MetaDigit, RewriteRule, RuleSchema,
    SchemaError, SchemaTerm,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("unknown signature `{0}`")]
    UnknownSignature(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("expansion failed: {0}")]
    Expansion(#[from] SchemaError),
    #[error("signature mismatch: rule [{tag}] uses `{symbol}`, which is not in {signature}")]
    SignatureMismatch { tag: String, symbol: String, signature: String },
    #[error("duplicate rule tag [{0}] after expansion")]
    DuplicateTag(String),
}

/// Recorded meta-theoretic status of one property.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    Proven,
    Refuted,
    Open,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Claim::Proven => "proven",
            Claim::Refuted => "refuted",
            Claim::Open => "open",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StatusEntry {
    pub claim: Claim,
    pub citation: String,
}

impl StatusEntry {
    fn new(claim: Claim, citation: &str) -> Self {
        StatusEntry { claim, citation: citation.to_string() }
    }

    fn open() -> Self {
        StatusEntry::new(Claim::Open, "no result recorded")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemStatus {
    pub termination: StatusEntry,
    pub confluence: StatusEntry,
    pub ground_confluence: StatusEntry,
}

impl SystemStatus {
    pub fn open() -> Self {
        SystemStatus {
            termination: StatusEntry::open(),
            confluence: StatusEntry::open(),
            ground_confluence: StatusEntry::open(),
        }
    }
}

type Slot = OnceLock<Arc<[u32]>>;

/// Candidate rules per (root, first child root, second child root).
///
/// Closed subjects always have symbol children, so the three symbol ids
/// determine which left-hand sides can possibly match; cells are filled
/// on first use.
struct RuleIndex {
    cells: Vec<Slot>,
}

const NO_CHILD: usize = SYMBOL_COUNT;
const WIDTH: usize = SYMBOL_COUNT + 1;

impl RuleIndex {
    fn new() -> Self {
        RuleIndex { cells: (0..SYMBOL_COUNT * WIDTH * WIDTH).map(|_| OnceLock::new()).collect() }
    }

    fn key(t: &Term) -> Option<(usize, usize, usize)> {
        let root = t.symbol()?.id();
        let child = |i: usize| t.args().get(i).and_then(Term::symbol).map_or(NO_CHILD, Symbol::id);
        Some((root, child(0), child(1)))
    }

    fn candidates(&self, rules: &[RewriteRule], t: &Term) -> Arc<[u32]> {
        let Some((r, c0, c1)) = Self::key(t) else {
            return Arc::from(Vec::new());
        };
        self.cells[(r * WIDTH + c0) * WIDTH + c1]
            .get_or_init(|| {
                let fits = |p: &Term, c: usize| match p.symbol() {
                    None => true,
                    Some(s) => s.id() == c,
                };
                rules
                    .iter()
                    .enumerate()
                    .filter(|(_, rule)| {
                        let l = &rule.lhs;
                        l.symbol().map(Symbol::id) == Some(r)
                            && l.args().first().map_or(true, |p| fits(p, c0))
                            && l.args().get(1).map_or(true, |p| fits(p, c1))
                    })
                    .map(|(i, _)| i as u32)
                    .collect::<Vec<_>>()
                    .into()
            })
            .clone()
    }
}

/// A named, ordered list of concrete rules over a signature.
#[derive(Clone)]
pub struct RewriteSystem {
    pub name: String,
    pub signature: Signature,
    pub rules: Vec<RewriteRule>,
    pub status: SystemStatus,
    /// Where the rules come from, e.g. the tables they transcribe.
    pub source: String,
    index: Arc<RuleIndex>,
}

impl PartialEq for RewriteSystem {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.signature == other.signature && self.rules == other.rules
    }
}

impl fmt::Debug for RewriteSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RewriteSystem")
            .field("name", &self.name)
            .field("signature", &self.signature.name())
            .field("rules", &self.rules.len())
            .finish()
    }
}

impl RewriteSystem {
    /// Assembles a system, checking tags are unique and every rule symbol
    /// belongs to the signature.
    pub fn new(
        name: impl Into<String>,
        signature: Signature,
        rules: Vec<RewriteRule>,
    ) -> Result<Self, CatalogError> {
        let mut tags = std::collections::HashSet::new();
        for rule in &rules {
            if !tags.insert(rule.tag.as_str()) {
                return Err(CatalogError::DuplicateTag(rule.tag.clone()));
            }
            for side in [&rule.lhs, &rule.rhs] {
                if !signature.admits(side) {
                    let bad = Symbol::all()
                        .find(|s| side.symbols_mask() & (1 << s.id()) != 0 && !signature.contains(*s))
                        .expect("some symbol is outside the signature");
                    return Err(CatalogError::SignatureMismatch {
                        tag: rule.tag.clone(),
                        symbol: bad.name(),
                        signature: signature.name().to_string(),
                    });
                }
            }
        }
        Ok(RewriteSystem {
            name: name.into(),
            signature,
            rules,
            status: SystemStatus::open(),
            source: String::new(),
            index: Arc::new(RuleIndex::new()),
        })
    }

    pub fn rule(&self, tag: &str) -> Option<&RewriteRule> {
        self.rules.iter().find(|r| r.tag == tag)
    }

    /// Indices into [`Self::rules`] of the rules whose left-hand side can
    /// match at the root of `t`, in rule order.
    pub fn candidates(&self, t: &Term) -> Arc<[u32]> {
        self.index.candidates(&self.rules, t)
    }

    /// Returns a copy with `rule` inserted at `pos`.
    pub fn with_rule_at(&self, pos: usize, rule: RewriteRule) -> Result<Self, CatalogError> {
        let mut rules = self.rules.clone();
        rules.insert(pos.min(rules.len()), rule);
        let mut sys = RewriteSystem::new(self.name.clone(), self.signature.clone(), rules)?;
        sys.source = self.source.clone();
        Ok(sys)
    }

    pub fn is_left_linear(&self) -> bool {
        self.rules.iter().all(|r| r.lhs.is_linear())
    }
}

/// Names accepted by [`builtin`], in catalog order.
pub const BUILTIN_NAMES: [&str; 17] = [
    "Nubd", "Zubd", "Zubd-verbatim", "Nu1", "Zu1", "Nbud", "Zbud", "Ndub", "Zdub",
    "Zdub-verbatim", "Nut", "Zut", "Nbt", "Zbi", "Ndt", "Zdt", "RingZ",
];

const NUBD: &str = include_str!("../../systems/nubd.rules");
const ZUBD: &str = include_str!("../../systems/zubd.rules");
const NU1: &str = include_str!("../../systems/nu1.rules");
const ZU1: &str = include_str!("../../systems/zu1.rules");
const NBUD: &str = include_str!("../../systems/nbud.rules");
const ZBUD: &str = include_str!("../../systems/zbud.rules");
const NDUB: &str = include_str!("../../systems/ndub.rules");
const ZDUB: &str = include_str!("../../systems/zdub.rules");
const NUT: &str = include_str!("../../systems/nut.rules");
const ZUT: &str = include_str!("../../systems/zut.rules");
const NBT: &str = include_str!("../../systems/nbt.rules");
const ZBI: &str = include_str!("../../systems/zbi.rules");
const NDT: &str = include_str!("../../systems/ndt.rules");
const ZDT: &str = include_str!("../../systems/zdt.rules");
const RINGZ: &str = include_str!("../../systems/ringz.rules");

const U8_FIXED: &str = "rule [u8]: 0 + x -> x";
const U8_PRINTED: &str = "rule [u8]: 0 + x -> 0";
const D26_FIXED: &str = "rule [d26.i] for i in 1..9:";
const D26_PRINTED: &str = "rule [d26.i] for i in 0..9:";

struct Entry {
    signature: &'static str,
    parts: Vec<String>,
    source: &'static str,
    status: [(Claim, &'static str); 3],
}

fn entry(name: &str) -> Option<Entry> {
    use Claim::*;
    let s = |t: &str| t.to_string();
    let kw_term = (Proven, "[KW16], AProVE");
    let kw_conf = (Refuted, "[KW16], CSI");
    let open = (Open, "no result recorded");
    Some(match name {
        "Nubd" => Entry {
            signature: "SigmaN",
            parts: vec![s(NUBD)],
            source: "naturals, unary view with append notation",
            status: [open, kw_conf, open],
        },
        "Zubd" => Entry {
            signature: "SigmaZ",
            parts: vec![s(ZUBD)],
            source: "integers, unary view; [u8] corrected to 0+x -> x",
            status: [open, kw_conf, open],
        },
        "Zubd-verbatim" => Entry {
            signature: "SigmaZ",
            parts: vec![ZUBD.replace(U8_FIXED, U8_PRINTED)],
            source: "integers, unary view; [u8] as printed (0+x -> 0)",
            status: [open, kw_conf, (Open, "as printed, [u8] is unsound; desk checks refute it")],
        },
        "Nu1" => Entry {
            signature: "SigmaNu1",
            parts: vec![s(NU1)],
            source: "naturals, unary append :u0",
            status: [(Proven, "weight function"), open, (Proven, "direct argument")],
        },
        "Zu1" => Entry {
            signature: "SigmaZu1",
            parts: vec![s(NU1), s(ZU1)],
            source: "integers, unary append :u0",
            status: [open, open, open],
        },
        "Nbud" => Entry {
            signature: "SigmaN",
            parts: vec![s(NBUD)],
            source: "naturals, binary view with append notation",
            status: [kw_term, kw_conf, open],
        },
        "Zbud" => Entry {
            signature: "SigmaZ",
            parts: vec![s(NBUD), s(ZBUD)],
            source: "integers, binary view with append notation",
            status: [
                kw_term,
                (Refuted, "[KW16], CSI: peak P(-(-x)) via [b17] and [b22]"),
                (Proven, "structural induction: every closed term is in N or has a rewrite step"),
            ],
        },
        "Ndub" => Entry {
            signature: "SigmaN",
            parts: vec![s(NDUB)],
            source: "naturals, decimal view with append notation",
            status: [kw_term, kw_conf, open],
        },
        "Zdub" => Entry {
            signature: "SigmaZ",
            parts: vec![s(NDUB), s(ZDUB)],
            source: "integers, decimal view; [d26] expanded over i=1..9",
            status: [
                kw_term,
                (Refuted, "[KW16], CSI: peak P(-(-x)) via [d16] and [d21]"),
                (Open, "left as an open question by the authors"),
            ],
        },
        "Zdub-verbatim" => Entry {
            signature: "SigmaZ",
            parts: vec![s(NDUB), ZDUB.replace(D26_FIXED, D26_PRINTED)],
            source: "integers, decimal view; [d26] over i=0..9 as printed",
            status: [kw_term, kw_conf, (Open, "left as an open question by the authors")],
        },
        "Nut" => Entry {
            signature: "SigmaNut",
            parts: vec![s(NUT)],
            source: "naturals, unary digit tree constructor",
            status: [open, open, open],
        },
        "Zut" => Entry {
            signature: "SigmaZut",
            parts: vec![s(NUT), s(ZUT)],
            source: "integers, unary digit tree constructor",
            status: [open, open, open],
        },
        "Nbt" => Entry {
            signature: "SigmaNbt",
            parts: vec![s(NBT)],
            source: "naturals, binary digit tree constructor",
            status: [
                (Proven, "[KW16], AProVE; [WZ95] for [bt1]-[bt7]"),
                kw_conf,
                (Proven, "[WZ95], [BW89] for [bt1]-[bt7]"),
            ],
        },
        "Zbi" => Entry {
            signature: "SigmaZbi",
            parts: vec![s(ZBI)],
            source: "integers, binary digit tree constructor",
            status: [
                kw_term,
                (Refuted, "[KW16], CSI: peak x^b(y^b(z^b w)) via [bi2] twice"),
                open,
            ],
        },
        "Ndt" => Entry {
            signature: "SigmaNdt",
            parts: vec![s(NDT)],
            source: "naturals, decimal digit tree constructor",
            status: [kw_term, kw_conf, open],
        },
        "Zdt" => Entry {
            signature: "SigmaZdt",
            parts: vec![s(NDT), s(ZDT)],
            source: "integers, decimal digit tree constructor",
            status: [
                (Open, "[KW16]: strong termination is an open question"),
                (Refuted, "[KW16], CSI: 0+(-(t1^d t2)) peak via [dt27]/[dt28]"),
                (Open, "[KW16]: ground-confluence is an open question"),
            ],
        },
        "RingZ" => Entry {
            signature: "SigmaR",
            parts: vec![s(RINGZ)],
            source: "integers over the ring signature {0, 1, -, +, *}",
            status: [
                (Proven, "[KW16]; alternatively the weight function |0|=|1|=2, |x+y|=|x|+2|y|, |-x|=1+3/2|x|, |x*y|=|x|*|y|^2"),
                open,
                (Proven, "structural induction over the NF grammar"),
            ],
        },
        _ => return None,
    })
}

/// Builds the fully expanded built-in system `name`.
///
/// ```
/// let ring = ddrs::catalog::builtin("RingZ").unwrap();
/// assert_eq!(ring.rules.len(), 15);
/// assert_eq!(ring.rules[0].tag, "r1");
/// ```
pub fn builtin(name: &str) -> Result<RewriteSystem, CatalogError> {
    let e = entry(name).ok_or_else(|| CatalogError::UnknownSystem(name.to_string()))?;
    let mut src = format!("# ddrs-format 1\nsystem {name} over {}\n", e.signature);
    for p in &e.parts {
        src.push_str(p);
    }
    let mut sys = load_system(&src)?;
    sys.source = e.source.to_string();
    let [t, c, g] = e.status;
    sys.status = SystemStatus {
        termination: StatusEntry::new(t.0, t.1),
        confluence: StatusEntry::new(c.0, c.1),
        ground_confluence: StatusEntry::new(g.0, g.1),
    };
    Ok(sys)
}

/// Expected expanded rule counts for the systems whose totals are stated
/// alongside the tables.
pub fn expected_rule_count(name: &str) -> Option<usize> {
    match name {
        "Zbud" => Some(36 + 24),
        "Ndub" => Some(172),
        "Zdub" => Some(172 + 273),
        "RingZ" => Some(15),
        _ => None,
    }
}

/// Parses, expands and signature-checks a rule file. Status fields are open.
pub fn load_system(src: &str) -> Result<RewriteSystem, CatalogError> {
    let file = parse_ddrs_file(src)?;
    let sig = Signature::named(&file.signature)
        .ok_or_else(|| CatalogError::UnknownSignature(file.signature.clone()))?;
    let mut rules = Vec::new();
    for schema in &file.schemata {
        rules.extend(expand(schema, &file.system)?);
    }
    let mut sys = RewriteSystem::new(file.system, sig, rules)?;
    // a comment right above the header line, as written by `dump`, is the source note
    let header = src.lines().position(|l| l.trim_start().starts_with("system "));
    if let Some(h) = header.filter(|&h| h > 0) {
        let above = src.lines().nth(h - 1).unwrap_or("").trim();
        if let Some(note) = above.strip_prefix('#').map(str::trim) {
            if !note.starts_with("ddrs-format") {
                sys.source = note.to_string();
            }
        }
    }
    Ok(sys)
}

/// Exports a system as a rule file of concrete rules; the output is
/// deterministic and reloads to an equal system.
pub fn dump(sys: &RewriteSystem) -> String {
    let mut out = String::from("# ddrs-format 1\n");
    if !sys.source.is_empty() {
        out.push_str(&format!("# {}\n", sys.source));
    }
    out.push_str(&format!("system {} over {}\n", sys.name, sys.signature.name()));
    for r in &sys.rules {
        out.push_str(&format!("rule [{}]: {} -> {}\n", r.tag, print_term(&r.lhs), print_term(&r.rhs)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_pattern;

    fn pat(s: &str) -> Term {
        parse_pattern(s, &Signature::named("SigmaZext").unwrap()).unwrap()
    }

    #[test]
    fn every_builtin_loads_except_the_printed_d26() {
        for name in BUILTIN_NAMES {
            let r = builtin(name);
            if name == "Zdub-verbatim" {
                assert!(
                    matches!(
                        &r,
                        Err(CatalogError::Expansion(SchemaError {
                            source: ExpandError::MetaDigitOutOfDomain { op: "*", digit: 0 },
                            ..
                        }))
                    ),
                    "{r:?}"
                );
            } else {
                let sys = r.unwrap();
                assert_eq!(sys.name, name);
                assert!(!sys.rules.is_empty());
            }
        }
        assert_eq!(builtin("Nope"), Err(CatalogError::UnknownSystem("Nope".into())));
    }

    #[test]
    fn expansion_examples() {
        let ndub = builtin("Ndub").unwrap();
        let d2: Vec<_> = ndub.rules.iter().filter(|r| r.tag.starts_with("d2.")).collect();
        assert_eq!(d2.len(), 9);
        assert_eq!(ndub.rule("d2.3").unwrap().lhs, pat("S(3)"));
        assert_eq!(ndub.rule("d2.3").unwrap().rhs, pat("4"));
        let zbud = builtin("Zbud").unwrap();
        assert_eq!(zbud.rules.iter().filter(|r| r.tag.starts_with("b10.")).count(), 4);
        let b = zbud.rule("b10.0.1").unwrap();
        assert_eq!(b.lhs, pat("x:b0 + y:b1"));
        assert_eq!(b.rhs, pat("S((x+y):b0)"));
        assert_eq!(zbud.rule("b10.1.0").unwrap().rhs, pat("(x+y):b1"));
        let zdub = builtin("Zdub").unwrap();
        let d = zdub.rule("d26.5").unwrap();
        assert_eq!(d.lhs, pat("(-x):d5"));
        assert_eq!(d.rhs, pat("-(P(x):d5)"));
        assert_eq!(zdub.rule("d26.1").unwrap().rhs, pat("-(P(x):d9)"));
        assert!(zdub.rule("d26.0").is_none());
    }

    #[test]
    fn verbatim_u8_differs_only_in_u8() {
        let a = builtin("Zubd").unwrap();
        let b = builtin("Zubd-verbatim").unwrap();
        assert_eq!(a.rules.len(), b.rules.len());
        let diff: Vec<_> = a
            .rules
            .iter()
            .zip(&b.rules)
            .filter(|(x, y)| (&x.tag, &x.lhs, &x.rhs) != (&y.tag, &y.lhs, &y.rhs))
            .collect();
        assert_eq!(diff.len(), 1);
        assert_eq!(diff[0].1.tag, "u8");
        assert_eq!(diff[0].1.rhs, pat("0"));
    }

    #[test]
    fn load_errors() {
        assert_eq!(load_system(""), Err(CatalogError::Syntax(SyntaxError::MissingHeader)));
        let e = load_system("system T over SigmaR\nrule [x]: x -> 0\n").unwrap_err();
        assert!(matches!(e, CatalogError::Expansion(SchemaError { source: ExpandError::LhsIsVariable(_), .. })));
        let e = load_system("system T over SigmaR\nrule [a]: 0 + 0 -> y\n").unwrap_err();
        assert!(matches!(e, CatalogError::Expansion(SchemaError { source: ExpandError::ExtraRhsVariable { .. }, .. })));
        let e = load_system("system T over SigmaR\nrule [a]: S(0) -> 1\n").unwrap_err();
        assert!(matches!(e, CatalogError::SignatureMismatch { .. }));
        let e = load_system("system T over Sigma9\n").unwrap_err();
        assert_eq!(e, CatalogError::UnknownSignature("Sigma9".into()));
        let e = load_system("system T over SigmaN\nrule [a.i] for i in 0..9: {i'} -> {i}\n").unwrap_err();
        assert!(matches!(e, CatalogError::Expansion(SchemaError { source: ExpandError::MetaDigitOutOfDomain { op: "'", digit: 9 }, .. })));
    }

    #[test]
    fn nu1_from_file() {
        let src = "# ddrs-format 1\nsystem Nu1 over SigmaNu1\n\
                   rule [u'1]: x + 0 -> x\n\
                   rule [u'2]: x + y:u0 -> x:u0 + y\n\
                   rule [u'3]: x * 0 -> 0\n\
                   rule [u'4]: x * y:u0 -> x * y + x\n";
        let sys = load_system(src).unwrap();
        assert_eq!(sys.rules.len(), 4);
        assert_eq!(sys, builtin("Nu1").unwrap());
    }

    #[test]
    fn candidates_respect_child_heads() {
        let zdub = builtin("Zdub").unwrap();
        let sig = Signature::named("SigmaZ").unwrap();
        let t = crate::syntax::parse_term("1:d2 + 3:d4", &sig).unwrap();
        let c = zdub.candidates(&t);
        let tags: Vec<_> = c.iter().map(|&i| zdub.rules[i as usize].tag.as_str()).collect();
        assert!(tags.contains(&"d10.2.4"));
        assert!(tags.len() < 30, "{tags:?}");
    }
}
