//! Rewrite systems whose normal forms are the numerals of a notation for naturals or integers.
//!
//! The crate ships every system as a built-in, a rewriting engine with
//! derivation traces, a big-integer semantics used as an independent
//! oracle, and desk-scale checkers for ground confluence, normal-form
//! grammars and termination weight certificates.

pub mod catalog;
pub mod syntax;
pub mod term;
pub mod engine;
pub mod semantics;
pub mod analysis;

/// Runs `f`, first growing the stack if little of it is left. Wrapped
/// around every structural recursion so that towers such as `S(S(...))`
/// with hundreds of thousands of levels can be processed.
#[inline]
pub(crate) fn deep<R>(f: impl FnOnce() -> R) -> R {
    stacker::maybe_grow(128 * 1024, 32 * 1024 * 1024, f)
}

/// The guide in `book/`, compiled so that its examples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/terms.md")]
    mod terms {}
    #[doc = include_str!("../../../book/src/systems.md")]
    mod systems {}
    #[doc = include_str!("../../../book/src/rewriting.md")]
    mod rewriting {}
    #[doc = include_str!("../../../book/src/semantics.md")]
    mod semantics {}
    #[doc = include_str!("../../../book/src/ground-confluence.md")]
    mod ground_confluence {}
    #[doc = include_str!("../../../book/src/termination.md")]
    mod termination {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
