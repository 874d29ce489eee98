//! Normal-form grammars: which closed terms each system is meant to leave
//! irreducible.

use num_bigint::{BigInt, Sign};
use num_traits::ToPrimitive;

use crate::term::{Family, Signature, Symbol, Term};

use super::enumerate::next_level;
use super::AnalysisError;

/// How nonzero naturals are written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Numerals {
    /// `S(S(..S(0)))`
    Successor,
    /// `(0:u0):u0`
    UnaryAppend,
    /// `1`, `w:b i`, or `1..9`, `w:d i`, with `w` nonzero
    Append(Family),
    /// `1`, `t+1` with `t` nonzero, nested to the left
    RingSum,
    /// `1 ^b 0` and the like: nonzero left argument, digit on the right;
    /// for `^u` the left argument may also be `0`
    Tree(Family),
}

/// The set of normal forms of a system, with a linear-time membership test
/// and a canonical-order enumerator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalFormGrammar {
    pub name: String,
    pub numerals: Numerals,
    /// Whether `-w` is a member for every nonzero member `w`.
    pub integers: bool,
}

impl NormalFormGrammar {
    pub fn new(name: impl Into<String>, numerals: Numerals, integers: bool) -> Self {
        NormalFormGrammar { name: name.into(), numerals, integers }
    }

    /// Membership test; walks the term spine once.
    ///
    /// ```
    /// use ddrs::{analysis::grammar::grammar_for, syntax::parse_term, term::Signature};
    ///
    /// let g = grammar_for("Zbud").unwrap();
    /// let z = Signature::named("SigmaZ").unwrap();
    /// assert!(g.contains(&parse_term("-((1:b0):b1)", &z).unwrap()));
    /// assert!(!g.contains(&parse_term("0:b1", &z).unwrap()));
    /// ```
    pub fn contains(&self, t: &Term) -> bool {
        if self.integers && t.symbol() == Some(Symbol::Neg) {
            return self.is_nonzero(&t.args()[0]);
        }
        self.is_natural(t)
    }

    fn is_natural(&self, t: &Term) -> bool {
        t.symbol() == Some(Symbol::Digit(0)) || self.is_nonzero(t)
    }

    /// Nonzero natural members. Iterative along the left spine, so towers
    /// of any height are fine.
    pub fn is_nonzero(&self, t: &Term) -> bool {
        let mut cur = t;
        loop {
            let Some(sym) = cur.symbol() else { return false };
            match (self.numerals, sym) {
                (Numerals::Successor, Symbol::Succ) => {
                    cur = &cur.args()[0];
                    if cur.symbol() == Some(Symbol::Digit(0)) {
                        return true;
                    }
                }
                (Numerals::UnaryAppend, Symbol::AppendU) => {
                    cur = &cur.args()[0];
                    if cur.symbol() == Some(Symbol::Digit(0)) {
                        return true;
                    }
                }
                (Numerals::Append(f), Symbol::Digit(d)) => {
                    return d >= 1 && d <= f.max_digit();
                }
                (Numerals::Append(f), Symbol::AppendB(_)) if f == Family::Binary => {
                    cur = &cur.args()[0];
                }
                (Numerals::Append(f), Symbol::AppendD(_)) if f == Family::Decimal => {
                    cur = &cur.args()[0];
                }
                (Numerals::RingSum, Symbol::Digit(1)) => return true,
                (Numerals::RingSum, Symbol::Add) => {
                    if cur.args()[1].symbol() != Some(Symbol::Digit(1)) {
                        return false;
                    }
                    cur = &cur.args()[0];
                }
                (Numerals::Tree(f), Symbol::Digit(d)) => {
                    return f != Family::Unary && d >= 1 && d <= f.max_digit();
                }
                (Numerals::Tree(f), s) if s == Symbol::tree(f) => {
                    let is_digit = matches!(cur.args()[1].symbol(), Some(Symbol::Digit(d)) if d <= f.max_digit());
                    if !is_digit {
                        return false;
                    }
                    cur = &cur.args()[0];
                    if f == Family::Unary && cur.symbol() == Some(Symbol::Digit(0)) {
                        return true;
                    }
                }
                _ => return false,
            }
        }
    }

    /// The symbols members are built from.
    pub fn carrier(&self) -> Signature {
        use Symbol::*;
        let mut syms: Vec<Symbol> = match self.numerals {
            Numerals::Successor => vec![Digit(0), Succ],
            Numerals::UnaryAppend => vec![Digit(0), AppendU],
            Numerals::Append(Family::Binary) => vec![Digit(0), Digit(1), AppendB(0), AppendB(1)],
            Numerals::Append(_) => (0..=9).map(Digit).chain((0..=9).map(AppendD)).collect(),
            Numerals::RingSum => vec![Digit(0), Digit(1), Add],
            Numerals::Tree(Family::Unary) => vec![Digit(0), TreeU],
            Numerals::Tree(Family::Binary) => vec![Digit(0), Digit(1), TreeB],
            Numerals::Tree(Family::Decimal) => (0..=9).map(Digit).chain([TreeD]).collect(),
        };
        if self.integers {
            syms.push(Neg);
        }
        Signature::new(format!("{}-carrier", self.name), syms)
    }

    /// Members of each size `1..=max_size` (index 0 empty), each level in
    /// canonical order.
    ///
    /// Every subterm of a member is a natural member, so level `n` is
    /// built from the members of smaller size only.
    pub fn levels(&self, max_size: usize) -> Vec<Vec<Term>> {
        self.levels_while(max_size, usize::MAX)
    }

    /// Like [`levels`](Self::levels), but stops after the first level that
    /// brings the total past `limit` members (that level is dropped).
    pub fn levels_while(&self, max_size: usize, limit: usize) -> Vec<Vec<Term>> {
        let carrier = self.carrier();
        let mut lv: Vec<Vec<Term>> = vec![Vec::new()];
        let mut total = 0;
        for n in 1..=max_size {
            let next = next_level(&carrier, &lv, n, &|t| self.contains(t));
            total += next.len();
            if total > limit {
                break;
            }
            lv.push(next);
        }
        lv
    }

    /// Every member of depth at most `max_depth`, in canonical order.
    pub fn members_to_depth(&self, max_depth: usize) -> Vec<Term> {
        let carrier = self.carrier();
        let mut cur: Vec<Term> = Vec::new();
        for _ in 0..max_depth {
            let mut next = Vec::new();
            for &sym in carrier.symbols() {
                let k = sym.arity() as u32;
                for mut n in 0..cur.len().pow(k) {
                    let mut args = Vec::with_capacity(k as usize);
                    for _ in 0..k {
                        args.push(cur[n % cur.len()].clone());
                        n /= cur.len();
                    }
                    let t = Term::app(sym, args);
                    if self.contains(&t) {
                        next.push(t);
                    }
                }
            }
            next.sort();
            cur = next;
        }
        cur
    }

    /// The member whose value is `n`; `None` for negative `n` when the
    /// grammar has no negatives.
    ///
    /// ```
    /// use ddrs::analysis::grammar::grammar_for;
    ///
    /// let g = grammar_for("Zbud").unwrap();
    /// assert_eq!(g.encode(&(-6).into()).unwrap().to_string(), "-(1:b1):b0");
    /// assert_eq!(grammar_for("RingZ").unwrap().encode(&3.into()).unwrap().to_string(), "1+1+1");
    /// ```
    pub fn encode(&self, n: &BigInt) -> Option<Term> {
        match n.sign() {
            Sign::NoSign => Some(Term::digit(0)),
            Sign::Plus => Some(self.encode_nonzero(n)),
            Sign::Minus if self.integers => Some(Term::neg(self.encode_nonzero(&-n))),
            Sign::Minus => None,
        }
    }

    fn encode_nonzero(&self, n: &BigInt) -> Term {
        let count = || n.to_usize().expect("unary numerals of this length do not fit in memory");
        let tower = |base: Term, step: &dyn Fn(Term) -> Term| (0..count()).fold(base, |t, _| step(t));
        match self.numerals {
            Numerals::Successor => tower(Term::digit(0), &Term::succ),
            Numerals::UnaryAppend => tower(Term::digit(0), &|t| Term::unary(Symbol::AppendU, t)),
            Numerals::Tree(Family::Unary) => {
                tower(Term::digit(0), &|t| Term::binary(Symbol::TreeU, t, Term::digit(0)))
            }
            Numerals::RingSum => {
                let one = || Term::digit(1);
                (1..count()).fold(one(), |t, _| Term::add(t, one()))
            }
            Numerals::Append(f) | Numerals::Tree(f) => {
                let radix = u32::from(f.max_digit()) + 1;
                let digits = n.to_radix_be(radix).1;
                let tree = matches!(self.numerals, Numerals::Tree(_));
                digits[1..].iter().fold(Term::digit(digits[0]), |t, &d| match tree {
                    true => Term::binary(Symbol::tree(f), t, Term::digit(d)),
                    false => Term::unary(Symbol::append(f, d).expect("digit in range"), t),
                })
            }
        }
    }

    /// Every member of size at most `max_size` in canonical order.
    pub fn enumerate(&self, max_size: usize) -> impl Iterator<Item = Term> {
        self.levels(max_size).into_iter().flatten()
    }
}

/// The documented normal-form grammar of a built-in system.
pub fn grammar_for(system: &str) -> Result<NormalFormGrammar, AnalysisError> {
    use Numerals::*;
    let (numerals, integers) = match system {
        "Nubd" => (Successor, false),
        "Zubd" | "Zubd-verbatim" => (Successor, true),
        "Nu1" => (UnaryAppend, false),
        "Zu1" => (UnaryAppend, true),
        "Nbud" => (Append(Family::Binary), false),
        "Zbud" => (Append(Family::Binary), true),
        "Ndub" => (Append(Family::Decimal), false),
        "Zdub" | "Zdub-verbatim" => (Append(Family::Decimal), true),
        "RingZ" => (RingSum, true),
        "Nut" => (Tree(Family::Unary), false),
        "Zut" => (Tree(Family::Unary), true),
        "Nbt" => (Tree(Family::Binary), false),
        "Zbi" => (Tree(Family::Binary), true),
        "Ndt" => (Tree(Family::Decimal), false),
        "Zdt" => (Tree(Family::Decimal), true),
        _ => return Err(AnalysisError::UnknownGrammar(system.to_string())),
    };
    Ok(NormalFormGrammar::new(system, numerals, integers))
}

/// Systems whose grammar is only the general prose description, so a
/// mismatch is reported rather than treated as refuting a claim.
pub fn is_prose_grammar(system: &str) -> bool {
    matches!(system, "Zut" | "Zbi" | "Zdt")
}
