//! Human-readable status: recorded meta-theory next to this run's checks.

use std::fmt::Write;

use crate::catalog::{Claim, RewriteSystem, StatusEntry};

/// One desk-scale check performed in this run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeskCheck {
    pub name: String,
    pub passed: bool,
    pub summary: String,
}

impl DeskCheck {
    pub fn new(name: impl Into<String>, passed: bool, summary: impl Into<String>) -> Self {
        DeskCheck { name: name.into(), passed, summary: summary.into() }
    }
}

fn line(out: &mut String, label: &str, e: &StatusEntry) {
    let _ = writeln!(out, "  {label:<19}{} ({})", e.claim, e.citation);
}

/// The recorded status of `sys` followed by the given desk checks.
///
/// The two sections are kept apart on purpose: recorded claims come from
/// the literature, while desk checks are finite experiments and never
/// change a recorded claim.
///
/// ```
/// let zdt = ddrs::catalog::builtin("Zdt").unwrap();
/// let text = ddrs::analysis::status_report(&zdt, &[]);
/// assert!(text.contains("termination:       open"));
/// ```
pub fn status_report(sys: &RewriteSystem, desk: &[DeskCheck]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system: {} ({} rules over {})", sys.name, sys.rules.len(), sys.signature.name());
    if !sys.source.is_empty() {
        let _ = writeln!(out, "source: {}", sys.source);
    }
    let st = &sys.status;
    let _ = writeln!(out, "recorded status (literature):");
    line(&mut out, "termination:", &st.termination);
    line(&mut out, "confluence:", &st.confluence);
    line(&mut out, "ground-confluence:", &st.ground_confluence);
    let _ = writeln!(out, "desk-scale checks (this run; finite evidence, never changes the recorded status):");
    if desk.is_empty() {
        let _ = writeln!(out, "  (none run)");
    }
    for d in desk {
        let verdict = if d.passed { "pass" } else { "FAIL" };
        let _ = writeln!(out, "  {:<19}{verdict}: {}", format!("{}:", d.name), d.summary);
    }
    let any_passed = desk.iter().any(|d| d.passed);
    for (what, e) in [("termination", &st.termination), ("ground-confluence", &st.ground_confluence)] {
        if e.claim == Claim::Open && any_passed {
            let _ = writeln!(
                out,
                "  caveat: {what} is open; passing checks on bounded terms prove nothing about it"
            );
        }
    }
    out
}
