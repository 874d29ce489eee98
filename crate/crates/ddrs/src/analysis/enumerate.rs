//! Closed-term enumeration in size-then-lexicographic order, term counts,
//! and uniform random generation by size.

use rand::Rng;

use crate::term::{Signature, Symbol, Term};

/// `counts(sig, n)[k]` is the number of closed terms of size `k` over
/// `sig` (index 0 is unused and zero). Saturates at `u128::MAX`.
pub fn counts(sig: &Signature, max_size: usize) -> Vec<u128> {
    let consts = sig.of_arity(0).count() as u128;
    let unary = sig.of_arity(1).count() as u128;
    let binary = sig.of_arity(2).count() as u128;
    let mut c = vec![0u128; max_size + 1];
    for n in 1..=max_size {
        let mut v = if n == 1 { consts } else { 0 };
        if n >= 2 {
            v = v.saturating_add(unary.saturating_mul(c[n - 1]));
        }
        for k in 1..n.saturating_sub(1) {
            let pairs = c[k].saturating_mul(c[n - 1 - k]);
            v = v.saturating_add(binary.saturating_mul(pairs));
        }
        c[n] = v;
    }
    c
}

/// Number of closed terms of size at most `max_size`.
pub fn count_up_to(sig: &Signature, max_size: usize) -> u128 {
    counts(sig, max_size).iter().fold(0u128, |a, b| a.saturating_add(*b))
}

/// Builds the terms of size `n` from the terms of every smaller size
/// (`levels[k]` holds size `k`), keeping only those `keep` accepts. The
/// output is sorted in the canonical order when the levels are.
pub fn next_level(
    sig: &Signature,
    levels: &[Vec<Term>],
    n: usize,
    keep: &dyn Fn(&Term) -> bool,
) -> Vec<Term> {
    let mut out = Vec::new();
    for &sym in sig.symbols() {
        match sym.arity() {
            0 if n == 1 => {
                let t = Term::constant(sym);
                if keep(&t) {
                    out.push(t);
                }
            }
            1 if n >= 2 => {
                for a in &levels[n - 1] {
                    let t = Term::unary(sym, a.clone());
                    if keep(&t) {
                        out.push(t);
                    }
                }
            }
            2 if n >= 3 => {
                for k in 1..=n - 2 {
                    for a in &levels[k] {
                        for b in &levels[n - 1 - k] {
                            let t = Term::binary(sym, a.clone(), b.clone());
                            if keep(&t) {
                                out.push(t);
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// All closed terms of each size `1..=max_size`, as one vector per size.
pub fn levels(sig: &Signature, max_size: usize) -> Vec<Vec<Term>> {
    let mut lv: Vec<Vec<Term>> = vec![Vec::new()];
    for n in 1..=max_size {
        let next = next_level(sig, &lv, n, &|_| true);
        lv.push(next);
    }
    lv
}

/// Every closed term over `sig` of size at most `max_size`, each once,
/// ordered by size, then root symbol, then arguments left to right.
///
/// ```
/// use ddrs::analysis::enumerate::enumerate_closed;
/// use ddrs::term::Signature;
///
/// let r = Signature::named("SigmaR").unwrap();
/// let terms: Vec<String> = enumerate_closed(&r, 2).map(|t| t.to_string()).collect();
/// assert_eq!(terms, ["0", "1", "-0", "-1"]);
/// ```
pub fn enumerate_closed(sig: &Signature, max_size: usize) -> impl Iterator<Item = Term> {
    levels(sig, max_size).into_iter().flatten()
}

/// Uniform sampler of closed terms of a given size.
#[derive(Clone, Debug)]
pub struct TermSampler {
    sig: Signature,
    counts: Vec<u128>,
}

impl TermSampler {
    pub fn new(sig: &Signature, max_size: usize) -> Self {
        TermSampler { sig: sig.clone(), counts: counts(sig, max_size) }
    }

    pub fn max_size(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn count(&self, n: usize) -> u128 {
        self.counts.get(n).copied().unwrap_or(0)
    }

    /// A uniformly random closed term of size exactly `n`, or `None` if
    /// there is none.
    pub fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Option<Term> {
        if n == 0 || n > self.max_size() || self.counts[n] == 0 {
            return None;
        }
        Some(self.sample_exact(n, rng))
    }

    /// A term whose size is drawn uniformly from the sizes in `lo..=hi`
    /// that have at least one term.
    pub fn sample_mixed<R: Rng>(&self, lo: usize, hi: usize, rng: &mut R) -> Option<Term> {
        let sizes: Vec<usize> = (lo..=hi.min(self.max_size())).filter(|&n| self.count(n) > 0).collect();
        if sizes.is_empty() {
            return None;
        }
        let n = sizes[rng.gen_range(0..sizes.len())];
        self.sample(n, rng)
    }

    fn sample_exact<R: Rng>(&self, n: usize, rng: &mut R) -> Term {
        crate::deep(|| {
            let mut pick = rng.gen_range(0..self.counts[n]);
            for &sym in self.sig.symbols() {
                match sym.arity() {
                    0 if n == 1 => {
                        if pick == 0 {
                            return Term::constant(sym);
                        }
                        pick -= 1;
                    }
                    1 if n >= 2 => {
                        let c = self.counts[n - 1];
                        if pick < c {
                            return Term::unary(sym, self.sample_exact(n - 1, rng));
                        }
                        pick -= c;
                    }
                    2 if n >= 3 => {
                        for k in 1..=n - 2 {
                            let c = self.counts[k].saturating_mul(self.counts[n - 1 - k]);
                            if pick < c {
                                let a = self.sample_exact(k, rng);
                                let b = self.sample_exact(n - 1 - k, rng);
                                return Term::binary(sym, a, b);
                            }
                            pick -= c;
                        }
                    }
                    _ => {}
                }
            }
            unreachable!("counts cover every term of size {n}")
        })
    }
}

/// Convenience: symbols of `sig` of the given arity.
pub fn symbols_of_arity(sig: &Signature, arity: usize) -> Vec<Symbol> {
    sig.of_arity(arity).collect()
}
