//! Signatures, terms, positions, substitutions and first-order matching.
//!
//! Terms are immutable trees behind an [`Arc`]; cloning is cheap and
//! subterms are shared freely between terms. Every node caches its hash,
//! its size and whether it is closed, so terms can be used as keys in the
//! large memo tables built by the analysis passes.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Notation family of a digit append or digit tree constructor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Unary notation (`:u0`, `^u`).
    Unary,
    /// Binary notation (`:b0`, `:b1`, `^b`).
    Binary,
    /// Decimal notation (`:d0` .. `:d9`, `^d`).
    Decimal,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::Unary => 'u',
            Family::Binary => 'b',
            Family::Decimal => 'd',
        }
    }

    pub fn from_letter(c: char) -> Option<Family> {
        match c {
            'u' => Some(Family::Unary),
            'b' => Some(Family::Binary),
            'd' => Some(Family::Decimal),
            _ => None,
        }
    }

    /// Largest digit index an append of this family admits.
    pub fn max_digit(self) -> u8 {
        match self {
            Family::Unary => 0,
            Family::Binary => 1,
            Family::Decimal => 9,
        }
    }
}

/// Syntactic class of a function symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Constant,
    PrefixUnary,
    PostfixAppend { family: Family, digit: u8 },
    InfixBinary,
    TreeConstructor(Family),
}

impl SymbolKind {
    pub fn arity(self) -> usize {
        match self {
            SymbolKind::Constant => 0,
            SymbolKind::PrefixUnary | SymbolKind::PostfixAppend { .. } => 1,
            SymbolKind::InfixBinary | SymbolKind::TreeConstructor(_) => 2,
        }
    }
}

/// A function symbol of the integer signature and its extensions.
///
/// Digits are ten distinct constants; the declaration order of the variants
/// is the symbol order used for canonical enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Digit(u8),
    Succ,
    Pred,
    Neg,
    Add,
    Mul,
    AppendB(u8),
    AppendD(u8),
    AppendU,
    TreeU,
    TreeB,
    TreeD,
}

/// Number of distinct symbols; [`Symbol::id`] ranges over `0..SYMBOL_COUNT`.
pub const SYMBOL_COUNT: usize = 31;

impl Symbol {
    /// Builds a digit append symbol, checking the digit range of the family.
    pub fn append(family: Family, digit: u8) -> Option<Symbol> {
        if digit > family.max_digit() {
            return None;
        }
        Some(match family {
            Family::Unary => Symbol::AppendU,
            Family::Binary => Symbol::AppendB(digit),
            Family::Decimal => Symbol::AppendD(digit),
        })
    }

    pub fn tree(family: Family) -> Symbol {
        match family {
            Family::Unary => Symbol::TreeU,
            Family::Binary => Symbol::TreeB,
            Family::Decimal => Symbol::TreeD,
        }
    }

    pub fn kind(self) -> SymbolKind {
        match self {
            Symbol::Digit(_) => SymbolKind::Constant,
            Symbol::Succ | Symbol::Pred | Symbol::Neg => SymbolKind::PrefixUnary,
            Symbol::Add | Symbol::Mul => SymbolKind::InfixBinary,
            Symbol::AppendB(d) => SymbolKind::PostfixAppend { family: Family::Binary, digit: d },
            Symbol::AppendD(d) => SymbolKind::PostfixAppend { family: Family::Decimal, digit: d },
            Symbol::AppendU => SymbolKind::PostfixAppend { family: Family::Unary, digit: 0 },
            Symbol::TreeU => SymbolKind::TreeConstructor(Family::Unary),
            Symbol::TreeB => SymbolKind::TreeConstructor(Family::Binary),
            Symbol::TreeD => SymbolKind::TreeConstructor(Family::Decimal),
        }
    }

    pub fn arity(self) -> usize {
        self.kind().arity()
    }

    /// Dense index in `0..SYMBOL_COUNT`, consistent with the derived order.
    pub fn id(self) -> usize {
        match self {
            Symbol::Digit(d) => d as usize,
            Symbol::Succ => 10,
            Symbol::Pred => 11,
            Symbol::Neg => 12,
            Symbol::Add => 13,
            Symbol::Mul => 14,
            Symbol::AppendB(d) => 15 + d as usize,
            Symbol::AppendD(d) => 17 + d as usize,
            Symbol::AppendU => 27,
            Symbol::TreeU => 28,
            Symbol::TreeB => 29,
            Symbol::TreeD => 30,
        }
    }

    pub fn from_id(id: usize) -> Option<Symbol> {
        Some(match id {
            0..=9 => Symbol::Digit(id as u8),
            10 => Symbol::Succ,
            11 => Symbol::Pred,
            12 => Symbol::Neg,
            13 => Symbol::Add,
            14 => Symbol::Mul,
            15..=16 => Symbol::AppendB((id - 15) as u8),
            17..=26 => Symbol::AppendD((id - 17) as u8),
            27 => Symbol::AppendU,
            28 => Symbol::TreeU,
            29 => Symbol::TreeB,
            30 => Symbol::TreeD,
            _ => return None,
        })
    }

    pub fn all() -> impl Iterator<Item = Symbol> {
        (0..SYMBOL_COUNT).filter_map(Symbol::from_id)
    }

    /// Concrete-syntax spelling: `7`, `S`, `-`, `+`, `*`, `:b1`, `:d4`, `:u0`, `^d`.
    pub fn name(self) -> String {
        match self {
            Symbol::Digit(d) => d.to_string(),
            Symbol::Succ => "S".into(),
            Symbol::Pred => "P".into(),
            Symbol::Neg => "-".into(),
            Symbol::Add => "+".into(),
            Symbol::Mul => "*".into(),
            Symbol::AppendB(d) => format!(":b{d}"),
            Symbol::AppendD(d) => format!(":d{d}"),
            Symbol::AppendU => ":u0".into(),
            Symbol::TreeU => "^u".into(),
            Symbol::TreeB => "^b".into(),
            Symbol::TreeD => "^d".into(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A named set of function symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    name: String,
    symbols: Vec<Symbol>,
    mask: u32,
}

impl Signature {
    /// Builds a signature; duplicate symbols are collapsed and the symbol
    /// list is kept in canonical order.
    pub fn new(name: impl Into<String>, symbols: impl IntoIterator<Item = Symbol>) -> Self {
        let mut mask = 0u32;
        for s in symbols {
            mask |= 1 << s.id();
        }
        let symbols = Symbol::all().filter(|s| mask & (1 << s.id()) != 0).collect();
        Signature { name: name.into(), symbols, mask }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn contains(&self, sym: Symbol) -> bool {
        self.mask & (1 << sym.id()) != 0
    }

    /// Symbols of the given arity, in canonical order.
    pub fn of_arity(&self, arity: usize) -> impl Iterator<Item = Symbol> + '_ {
        self.symbols.iter().copied().filter(move |s| s.arity() == arity)
    }

    /// Whether every symbol occurring in `t` belongs to this signature.
    pub fn admits(&self, t: &Term) -> bool {
        t.symbols_mask() & !self.mask == 0
    }

    /// Looks up one of the named signatures used by the built-in systems.
    ///
    /// | name        | symbols                                                   |
    /// |-------------|-----------------------------------------------------------|
    /// | `SigmaZ`    | digits, `S`, `P`, `-`, `+`, `*`, `:b0 :b1`, `:d0`..`:d9`  |
    /// | `SigmaN`    | `SigmaZ` without `P` and `-`                              |
    /// | `SigmaR`    | `0`, `1`, `-`, `+`, `*`                                   |
    /// | `SigmaNu1`  | `0`, `:u0`, `+`, `*` (`SigmaZu1` adds `-`)                |
    /// | `SigmaNut`  | `0`, `^u`, `+`, `*` (`SigmaZut` adds `-`)                 |
    /// | `SigmaNbt`  | `0`, `1`, `^b`, `+`, `*` (`SigmaZbi` adds `-`)            |
    /// | `SigmaNdt`  | digits, `S`, `^d`, `+`, `*` (`SigmaZdt` adds `P`, `-`)    |
    /// | `SigmaZext` | every symbol                                              |
    pub fn named(name: &str) -> Option<Signature> {
        use Symbol::*;
        let digits = (0..=9).map(Digit);
        let appends = [AppendB(0), AppendB(1)].into_iter().chain((0..=9).map(AppendD));
        let syms: Vec<Symbol> = match name {
            "SigmaZ" => digits
                .chain([Succ, Pred, Neg, Add, Mul])
                .chain(appends)
                .collect(),
            "SigmaN" => digits.chain([Succ, Add, Mul]).chain(appends).collect(),
            "SigmaR" => vec![Digit(0), Digit(1), Neg, Add, Mul],
            "SigmaNu1" => vec![Digit(0), AppendU, Add, Mul],
            "SigmaZu1" => vec![Digit(0), AppendU, Neg, Add, Mul],
            "SigmaNut" => vec![Digit(0), TreeU, Add, Mul],
            "SigmaZut" => vec![Digit(0), TreeU, Neg, Add, Mul],
            "SigmaNbt" => vec![Digit(0), Digit(1), TreeB, Add, Mul],
            "SigmaZbi" => vec![Digit(0), Digit(1), TreeB, Neg, Add, Mul],
            "SigmaNdt" => digits.chain([Succ, TreeD, Add, Mul]).collect(),
            "SigmaZdt" => digits.chain([Succ, Pred, Neg, TreeD, Add, Mul]).collect(),
            "SigmaZext" => Symbol::all().collect(),
            _ => return None,
        };
        Some(Signature::new(name, syms))
    }

    pub const NAMES: [&'static str; 12] = [
        "SigmaZ", "SigmaN", "SigmaR", "SigmaNu1", "SigmaZu1", "SigmaNut", "SigmaZut",
        "SigmaNbt", "SigmaZbi", "SigmaNdt", "SigmaZdt", "SigmaZext",
    ];
}

/// A rule variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Root of a term node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Head {
    Var(Var),
    Sym(Symbol),
}

struct Node {
    head: Head,
    args: Vec<Term>,
    hash: u64,
    size: usize,
    depth: usize,
    closed: bool,
    symbols: u32,
}

// Unary towers such as S(S(...)) get thousands of levels deep; the default
// recursive drop would exhaust the stack on them.
impl Drop for Node {
    fn drop(&mut self) {
        let mut pending = std::mem::take(&mut self.args);
        while let Some(t) = pending.pop() {
            if let Ok(mut node) = Arc::try_unwrap(t.0) {
                pending.append(&mut node.args);
            }
        }
    }
}

/// An immutable first-order term. Equality is structural.
#[derive(Clone)]
pub struct Term(Arc<Node>);

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl Term {
    pub fn var(name: &str) -> Term {
        let v = Var::new(name);
        let mut h = 0x9e37_79b9_7f4a_7c15u64;
        for b in name.bytes() {
            h = mix(h ^ b as u64);
        }
        Term(Arc::new(Node {
            head: Head::Var(v),
            args: Vec::new(),
            hash: mix(h ^ 0xfeed),
            size: 0,
            depth: 1,
            closed: false,
            symbols: 0,
        }))
    }

    /// Applies `sym` to `args`.
    ///
    /// # Panics
    ///
    /// Panics if the number of arguments differs from the symbol's arity.
    pub fn app(sym: Symbol, args: Vec<Term>) -> Term {
        assert_eq!(sym.arity(), args.len(), "arity mismatch for {sym}");
        let mut hash = mix(sym.id() as u64 + 1);
        let mut size = 1;
        let mut depth = 0;
        let mut closed = true;
        let mut symbols = 1u32 << sym.id();
        for (i, a) in args.iter().enumerate() {
            hash = mix(hash ^ a.0.hash.rotate_left(17 * (i as u32 + 1)));
            size += a.0.size;
            depth = depth.max(a.0.depth);
            closed &= a.0.closed;
            symbols |= a.0.symbols;
        }
        Term(Arc::new(Node { head: Head::Sym(sym), args, hash, size, depth: depth + 1, closed, symbols }))
    }

    pub fn constant(sym: Symbol) -> Term {
        Term::app(sym, Vec::new())
    }

    pub fn digit(d: u8) -> Term {
        assert!(d <= 9, "digit out of range: {d}");
        Term::constant(Symbol::Digit(d))
    }

    pub fn unary(sym: Symbol, t: Term) -> Term {
        Term::app(sym, vec![t])
    }

    pub fn binary(sym: Symbol, a: Term, b: Term) -> Term {
        Term::app(sym, vec![a, b])
    }

    pub fn succ(t: Term) -> Term {
        Term::unary(Symbol::Succ, t)
    }

    pub fn pred(t: Term) -> Term {
        Term::unary(Symbol::Pred, t)
    }

    pub fn neg(t: Term) -> Term {
        Term::unary(Symbol::Neg, t)
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::binary(Symbol::Add, a, b)
    }

    pub fn mul(a: Term, b: Term) -> Term {
        Term::binary(Symbol::Mul, a, b)
    }

    pub fn head(&self) -> &Head {
        &self.0.head
    }

    /// Root symbol, or `None` for a variable.
    pub fn symbol(&self) -> Option<Symbol> {
        match self.0.head {
            Head::Sym(s) => Some(s),
            Head::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match &self.0.head {
            Head::Var(v) => Some(v),
            Head::Sym(_) => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        &self.0.args
    }

    /// Number of symbol occurrences; variables do not count.
    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn depth(&self) -> usize {
        self.0.depth
    }

    pub fn is_closed(&self) -> bool {
        self.0.closed
    }

    pub fn is_var(&self) -> bool {
        matches!(self.0.head, Head::Var(_))
    }

    /// Bit set of the symbols occurring in the term, indexed by [`Symbol::id`].
    pub fn symbols_mask(&self) -> u32 {
        self.0.symbols
    }

    pub fn ptr_eq(&self, other: &Term) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    /// Variables in first-occurrence (pre-order) order, without repetition.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if t.0.closed {
                continue;
            }
            match &t.0.head {
                Head::Var(v) => {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
                Head::Sym(_) => stack.extend(t.0.args.iter().rev()),
            }
        }
        out
    }

    /// Whether no variable occurs twice.
    pub fn is_linear(&self) -> bool {
        let mut seen = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match &t.0.head {
                Head::Var(v) => {
                    if seen.contains(v) {
                        return false;
                    }
                    seen.push(v.clone());
                }
                Head::Sym(_) => stack.extend(t.0.args.iter()),
            }
        }
        true
    }

    /// Rebuilds this node with new arguments, keeping the head.
    pub fn with_args(&self, args: Vec<Term>) -> Term {
        match &self.0.head {
            Head::Sym(s) => Term::app(*s, args),
            Head::Var(_) => {
                assert!(args.is_empty());
                self.clone()
            }
        }
    }

    /// All positions in pre-order (leftmost-outermost first).
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Position::root())];
        while let Some((t, p)) = stack.pop() {
            for (i, a) in t.args().iter().enumerate().rev() {
                stack.push((a, p.child(i)));
            }
            out.push(p);
        }
        out
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, TermError> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.args().get(i).ok_or_else(|| TermError::InvalidPosition(pos.clone()))?;
        }
        Ok(t)
    }

    pub fn replace_at(&self, pos: &Position, replacement: Term) -> Result<Term, TermError> {
        self.subterm_at(pos)?;
        Ok(self.replace_unchecked(&pos.0, replacement))
    }

    fn replace_unchecked(&self, path: &[usize], replacement: Term) -> Term {
        let mut spine = Vec::with_capacity(path.len());
        let mut t = self;
        for &i in path {
            spine.push((t, i));
            t = &t.args()[i];
        }
        let mut out = replacement;
        for (node, i) in spine.into_iter().rev() {
            let mut args = node.args().to_vec();
            args[i] = out;
            out = node.with_args(args);
        }
        out
    }
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if Arc::ptr_eq(&a.0, &b.0) {
                continue;
            }
            let (x, y) = (&*a.0, &*b.0);
            if x.hash != y.hash || x.size != y.size || x.head != y.head {
                return false;
            }
            stack.extend(x.args.iter().zip(&y.args));
        }
        true
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl Ord for Term {
    /// Size first, then root symbol (variables before symbols), then
    /// arguments left to right. This is the canonical enumeration order.
    fn cmp(&self, other: &Self) -> Ordering {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if a.ptr_eq(b) {
                continue;
            }
            let o = a.size().cmp(&b.size()).then_with(|| match (&a.0.head, &b.0.head) {
                (Head::Var(x), Head::Var(y)) => x.cmp(y),
                (Head::Var(_), Head::Sym(_)) => Ordering::Less,
                (Head::Sym(_), Head::Var(_)) => Ordering::Greater,
                (Head::Sym(x), Head::Sym(y)) => x.cmp(y),
            });
            if o != Ordering::Equal {
                return o;
            }
            stack.extend(a.args().iter().zip(b.args()).rev());
        }
        Ordering::Equal
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self))
    }
}

/// Hasher that forwards the precomputed term hash.
#[derive(Default, Clone, Copy)]
pub struct TermHasher(u64);

impl Hasher for TermHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = mix(self.0 ^ b as u64);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = mix(self.0 ^ n);
    }

    fn write_usize(&mut self, n: usize) {
        self.write_u64(n as u64);
    }
}

pub type BuildTermHasher = BuildHasherDefault<TermHasher>;
pub type TermMap<V> = HashMap<Term, V, BuildTermHasher>;
pub type TermSet = std::collections::HashSet<Term, BuildTermHasher>;

/// Path from the root to a subterm: child indices, 0-based. The root is `[]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
#[serde(transparent)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Position {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {0}")]
    InvalidPosition(Position),
}

/// A finite map from variables to terms.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution(Vec<(Var, Term)>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(Vec::new())
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.0.iter().find(|(w, _)| w == v).map(|(_, t)| t)
    }

    /// Binds `v`, replacing any earlier binding.
    pub fn insert(&mut self, v: Var, t: Term) {
        match self.0.iter_mut().find(|(w, _)| *w == v) {
            Some(slot) => slot.1 = t,
            None => self.0.push((v, t)),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter().map(|(v, t)| (v, t))
    }

    /// Union of two substitutions with disjoint domains.
    pub fn merged(&self, other: &Substitution) -> Substitution {
        let mut out = self.clone();
        for (v, t) in other.iter() {
            out.insert(v.clone(), t.clone());
        }
        out
    }

    /// Instantiates `pattern`. Unbound variables are left in place.
    pub fn apply(&self, pattern: &Term) -> Term {
        if pattern.is_closed() {
            return pattern.clone();
        }
        match pattern.head() {
            Head::Var(v) => self.get(v).cloned().unwrap_or_else(|| pattern.clone()),
            Head::Sym(s) => crate::deep(|| {
                Term::app(*s, pattern.args().iter().map(|a| self.apply(a)).collect())
            }),
        }
    }
}

impl FromIterator<(Var, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Var, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (v, t) in iter {
            s.insert(v, t);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {t}")?;
        }
        write!(f, "}}")
    }
}

/// Matches `pattern` against `subject`.
///
/// Repeated pattern variables must bind structurally equal subterms.
pub fn match_pattern(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

/// Extends `sigma` so that `sigma(pattern) == subject`; on failure `sigma`
/// may hold partial bindings.
pub fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match pattern.head() {
        Head::Var(v) => match sigma.get(v) {
            Some(bound) => bound == subject,
            None => {
                sigma.0.push((v.clone(), subject.clone()));
                true
            }
        },
        Head::Sym(s) => {
            if subject.symbol() != Some(*s) {
                return false;
            }
            if pattern.is_closed() {
                return pattern == subject;
            }
            crate::deep(|| {
                pattern
                    .args()
                    .iter()
                    .zip(subject.args())
                    .all(|(p, t)| match_into(p, t, sigma))
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_pattern, parse_term};

    fn sig() -> Signature {
        Signature::named("SigmaZext").unwrap()
    }

    fn t(src: &str) -> Term {
        parse_term(src, &sig()).unwrap()
    }

    fn pat(src: &str) -> Term {
        parse_pattern(src, &sig()).unwrap()
    }

    #[test]
    fn sizes() {
        assert_eq!(t("0").size(), 1);
        assert_eq!(t("S(S(0))").size(), 3);
        // appends are unary symbols carrying their digit: 9, :d7, :d5
        assert_eq!(t("(9:d7):d5").size(), 3);
        assert_eq!(pat("x + 0").size(), 2);
    }

    #[test]
    fn subterms() {
        let s0 = t("S(0)");
        assert_eq!(s0.subterm_at(&Position::root()).unwrap(), &s0);
        assert_eq!(s0.subterm_at(&vec![0].into()).unwrap(), &t("0"));
        assert_eq!(t("(9:d7):d5").subterm_at(&vec![0, 0].into()).unwrap(), &t("9"));
        assert_eq!(
            s0.subterm_at(&vec![1].into()),
            Err(TermError::InvalidPosition(vec![1].into()))
        );
        assert!(t("0").subterm_at(&vec![0].into()).is_err());
    }

    #[test]
    fn replacements() {
        assert_eq!(t("S(0)").replace_at(&vec![0].into(), t("1")).unwrap(), t("S(1)"));
        assert_eq!(t("0").replace_at(&Position::root(), t("S(0)")).unwrap(), t("S(0)"));
        assert_eq!(
            t("(9:d7):d5").replace_at(&vec![0, 1].into(), t("8")),
            Err(TermError::InvalidPosition(vec![0, 1].into()))
        );
        // (9:d7):d5 has the 7 inside the symbol, so replace the inner append instead
        assert_eq!(
            t("(9:d7):d5").replace_at(&vec![0].into(), t("9:d8")).unwrap(),
            t("(9:d8):d5")
        );
    }

    #[test]
    fn matching() {
        let sigma = match_pattern(&pat("x + 0"), &t("S(0) + 0")).unwrap();
        assert_eq!(sigma.get(&Var::new("x")), Some(&t("S(0)")));
        assert!(match_pattern(&pat("x + 0"), &t("0 + S(0)")).is_none());
        let sigma = match_pattern(&pat("S(x:b1)"), &t("S((1:b0):b1)")).unwrap();
        assert_eq!(sigma.get(&Var::new("x")), Some(&t("1:b0")));
        assert_eq!(sigma.len(), 1);
    }

    #[test]
    fn non_linear_patterns_need_equal_bindings() {
        assert!(match_pattern(&pat("x + x"), &t("1 + 1")).is_some());
        assert!(match_pattern(&pat("x + x"), &t("1 + 0")).is_none());
        assert!(!pat("x + x").is_linear());
        assert!(pat("x + y").is_linear());
    }

    #[test]
    fn signature_invariants() {
        let z = Signature::named("SigmaZ").unwrap();
        assert_eq!(z.symbols().len(), 27);
        assert!(z.contains(Symbol::AppendD(9)));
        assert!(!z.contains(Symbol::AppendU));
        let r = Signature::named("SigmaR").unwrap();
        assert_eq!(
            r.symbols(),
            &[Symbol::Digit(0), Symbol::Digit(1), Symbol::Neg, Symbol::Add, Symbol::Mul]
        );
        for name in Signature::NAMES {
            let s = Signature::named(name).unwrap();
            assert!(s.symbols().windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(Symbol::append(Family::Binary, 2), None);
        assert_eq!(Symbol::append(Family::Unary, 1), None);
        assert_eq!(Symbol::append(Family::Decimal, 9), Some(Symbol::AppendD(9)));
        for s in Symbol::all() {
            assert_eq!(Symbol::from_id(s.id()), Some(s));
        }
    }

    #[test]
    fn deep_terms_drop_without_overflow() {
        let mut t = Term::digit(0);
        for _ in 0..200_000 {
            t = Term::succ(t);
        }
        assert_eq!(t.size(), 200_001);
        drop(t);
    }

    #[test]
    fn order_is_size_then_symbol() {
        let mut v = vec![t("1:b0"), t("-1"), t("1"), t("0"), t("1 + 1")];
        v.sort();
        let printed: Vec<String> = v.iter().map(|t| t.to_string()).collect();
        assert_eq!(printed, ["0", "1", "-1", "1:b0", "1+1"]);
    }
}
