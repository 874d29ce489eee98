//! `ddrs`: normalize, convert, check, enumerate and export rewrite systems.
//!
//! Exit status: 0 on success or a passing check, 1 when a check fails or a
//! normalization runs out of resources, 2 on usage and parse errors.

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddrs::analysis::{
    check_ground_confluence_auto, check_weight_certificate, grammar_for, status::DeskCheck, status_report,
    GroundCheckConfig, WeightFunction, WeightVerdict,
};
use ddrs::catalog::{builtin, dump, load_system, CatalogError, RewriteSystem, BUILTIN_NAMES};
use ddrs::engine::{
    is_normal, normal_form, normalize_with, EngineError, Limits, Outcome, Strategy, DEFAULT_NODE_BUDGET,
    DEFAULT_STEP_LIMIT,
};
use ddrs::semantics::{check_system_soundness, prove_rule_sound};
use ddrs::syntax::{parse_term, print_term};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "ddrs", version, about = "Rewrite integer arithmetic to numerals and check the rule systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// A built-in system (see `ddrs list`).
    #[arg(long)]
    system: Option<String>,
    /// A rule file in ddrs format.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
    step_limit: usize,
    /// Largest intermediate term size allowed.
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    node_budget: usize,
}

impl LimitArgs {
    fn limits(&self) -> Limits {
        Limits { step_limit: self.step_limit, node_budget: self.node_budget }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Innermost,
    Outermost,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum View {
    Unary,
    Binary,
    Decimal,
}

impl View {
    fn system(self) -> &'static str {
        match self {
            View::Unary => "Zubd",
            View::Binary => "Zbud",
            View::Decimal => "Zdub",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum What {
    Soundness,
    GroundConfluence,
    Weights,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the normal form of a closed term.
    Normalize {
        #[command(flatten)]
        source: Source,
        #[arg(allow_hyphen_values = true)]
        term: String,
        #[arg(long, value_enum, default_value = "innermost")]
        strategy: StrategyArg,
        /// Seed for `--strategy random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        limits: LimitArgs,
        /// Also print the derivation as trace-v1 JSON.
        #[arg(long)]
        trace: bool,
    },
    /// Rewrite a normal form of one notation into another.
    Convert {
        #[arg(long, value_enum)]
        from: View,
        #[arg(long, value_enum)]
        to: View,
        #[arg(allow_hyphen_values = true)]
        term: String,
        #[command(flatten)]
        limits: LimitArgs,
    },
    /// Run soundness, ground-confluence and weight checks.
    Check {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "all")]
        what: What,
        /// Term size bound (default 6 over the ring signature, else 5; weights use 4).
        #[arg(long)]
        max_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random substitutions per rule in the soundness check.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Work allowed to the exact normal-form search per term.
        #[arg(long, default_value_t = 500)]
        search_budget: usize,
        #[command(flatten)]
        limits: LimitArgs,
        #[arg(long)]
        json: bool,
    },
    /// List closed terms in size-then-lexicographic order.
    Enumerate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        max_size: usize,
        /// Only members of the system's normal-form grammar.
        #[arg(long)]
        grammar_only: bool,
    },
    /// Export a built-in system as a rule file.
    Dump {
        #[arg(long)]
        system: String,
    },
    /// List the built-in systems with their recorded status.
    List {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Error)]
enum CliError {
    /// Bad input: exit status 2.
    #[error("{0}")]
    Usage(String),
    /// A failed check or normalization: exit status 1.
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn load(source: &Source) -> Result<RewriteSystem, CliError> {
    match (&source.system, &source.file) {
        (Some(name), _) => Ok(builtin(name)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Ok(load_system(&text)?)
        }
        (None, None) => unreachable!("clap requires one of --system/--file"),
    }
}

fn parse_in(sys: &RewriteSystem, src: &str) -> Result<ddrs::term::Term, CliError> {
    parse_term(src, &sys.signature).map_err(|e| CliError::Usage(e.to_string()))
}

fn engine_failure(e: EngineError) -> CliError {
    CliError::Failed(match e {
        EngineError::StepLimit(n) => format!("step limit of {n} reached before a normal form"),
        e => e.to_string(),
    })
}

fn cmd_normalize(
    out: &mut impl Write,
    source: &Source,
    term: &str,
    strategy: Strategy,
    limits: Limits,
    trace: bool,
) -> Result<(), CliError> {
    let sys = load(source)?;
    let t = parse_in(&sys, term)?;
    if !trace && strategy == Strategy::Innermost {
        let nf = normal_form(&sys, &t, strategy, limits).map_err(engine_failure)?;
        writeln!(out, "{}", print_term(&nf))?;
        return Ok(());
    }
    let tr = normalize_with(&sys, &t, strategy, limits);
    if tr.outcome == Outcome::NormalForm {
        writeln!(out, "{}", print_term(tr.last()))?;
    }
    if trace {
        writeln!(out, "{}", serde_json::to_string_pretty(&tr.to_json()).expect("json"))?;
    }
    match tr.outcome {
        Outcome::NormalForm => Ok(()),
        Outcome::StepLimitHit => Err(engine_failure(EngineError::StepLimit(limits.step_limit))),
        Outcome::NodeBudgetExceeded => Err(engine_failure(EngineError::NodeBudget {
            size: tr.last().size(),
            budget: limits.node_budget,
        })),
    }
}

/// Terms above this size in a unary conversion get a warning.
const UNARY_WARN: usize = 10_000;

fn cmd_convert(out: &mut impl Write, from: View, to: View, term: &str, limits: Limits) -> Result<(), CliError> {
    let src = builtin(from.system())?;
    let t = parse_in(&src, term)?;
    let grammar = grammar_for(from.system()).expect("views have grammars");
    if !grammar.contains(&t) || !is_normal(&src, &t) {
        return Err(CliError::Usage(format!("`{term}` is not a {from:?} normal form").to_lowercase()));
    }
    let target = builtin(to.system())?;
    let unary = from == View::Unary || to == View::Unary;
    if unary && t.size() > UNARY_WARN {
        eprintln!("warning: unary input of {} nodes", t.size());
    }
    let nf = normal_form(&target, &t, Strategy::Innermost, limits).map_err(engine_failure)?;
    if unary && nf.size() > UNARY_WARN {
        eprintln!("warning: unary result of {} nodes", nf.size());
    }
    writeln!(out, "{}", print_term(&nf))?;
    Ok(())
}

struct CheckArgs {
    what: What,
    max_size: Option<usize>,
    seed: u64,
    trials: usize,
    search_budget: usize,
    limits: Limits,
    json: bool,
}

fn cmd_check(out: &mut impl Write, source: &Source, a: &CheckArgs) -> Result<bool, CliError> {
    let sys = match load(source) {
        Ok(sys) => sys,
        // a built-in whose schemata do not expand is itself a finding
        Err(CliError::Usage(msg)) if source.system.as_deref().is_some_and(|n| BUILTIN_NAMES.contains(&n)) => {
            if a.json {
                let v = json!({"system": source.system, "passed": false, "error": msg});
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))?;
            } else {
                writeln!(out, "system: {}\nFAIL: {msg}", source.system.as_deref().unwrap_or_default())?;
            }
            return Ok(false);
        }
        Err(e) => return Err(e),
    };
    let ring = sys.signature.name() == "SigmaR";
    let wants = |w: What| a.what == w || a.what == What::All;
    let mut desk = Vec::new();
    let mut doc = json!({"system": sys.name});
    let mut details = String::new();

    if wants(What::Soundness) {
        let report = check_system_soundness(&sys, a.trials, a.seed);
        let proven = sys.rules.iter().filter(|r| prove_rule_sound(r)).count();
        let summary = if report.is_sound() {
            format!(
                "{} rules, no counterexample ({} trials each, seed {}); {proven} proven by polynomial identity",
                report.rules.len(),
                a.trials,
                a.seed
            )
        } else {
            format!("unsound: {}", report.unsound_tags().join(", "))
        };
        for r in report.rules.iter().filter(|r| r.counterexample.is_some()) {
            details.push_str(&format!(
                "  [{}] counterexample {}\n",
                r.tag,
                r.counterexample.as_deref().unwrap_or_default()
            ));
        }
        desk.push(DeskCheck::new("soundness", report.is_sound(), summary));
        doc["soundness"] = report.to_json();
        doc["soundness"]["passed"] = json!(report.is_sound());
    }

    if wants(What::GroundConfluence) {
        match grammar_for(&sys.name) {
            Ok(grammar) => {
                let max = a.max_size.unwrap_or(if ring { 6 } else { 5 });
                let cfg = GroundCheckConfig {
                    search_budget: a.search_budget,
                    step_limit: a.limits.step_limit,
                    node_budget: a.limits.node_budget,
                    ..GroundCheckConfig::new(max)
                };
                let report = check_ground_confluence_auto(&sys, &grammar, &cfg, a.seed);
                let summary = format!(
                    "{} {} terms to size {} ({} searched, {} certified), {} failures",
                    report.checked, report.mode, max, report.searched, report.certified, report.failure_count
                );
                if let Some(c) = &report.certificate {
                    details.push_str(&format!("  certificate: {c}\n"));
                }
                for f in report.failures.iter().take(20) {
                    details.push_str(&format!("  {}: {}\n", f.term, serde_json::to_string(&f.kind).expect("json")));
                }
                desk.push(DeskCheck::new("ground-confluence", report.passed(), summary));
                doc["ground_confluence"] = report.to_json();
                doc["ground_confluence"]["passed"] = json!(report.passed());
            }
            Err(e) if a.what == What::GroundConfluence => return Err(CliError::Usage(e.to_string())),
            Err(e) => details.push_str(&format!("  ground-confluence skipped: {e}\n")),
        }
    }

    if wants(What::Weights) {
        let w = WeightFunction::ring();
        if w.is_total_on(&sys) {
            let max = a.max_size.unwrap_or(4);
            let verdict = check_weight_certificate(&sys, &w, max, u64::MAX);
            let summary = match &verdict {
                WeightVerdict::Pass { instances } => {
                    format!("w(l) > w(r) on {instances} ground instances (terms to size {max})")
                }
                v => v.to_string(),
            };
            desk.push(DeskCheck::new("weights", verdict.passed(), summary));
            doc["weights"] = json!({"max_size": max, "passed": verdict.passed(), "verdict": verdict.to_string()});
        } else if a.what == What::Weights {
            return Err(CliError::Usage(format!("no weight function is defined for {}", sys.signature.name())));
        } else {
            details.push_str("  weights skipped: the ring weight function does not cover this signature\n");
        }
    }

    let passed = desk.iter().all(|d| d.passed);
    if a.json {
        doc["status"] = serde_json::to_value(&sys.status).expect("json");
        doc["passed"] = json!(passed);
        writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
    } else {
        write!(out, "{}", status_report(&sys, &desk))?;
        if !details.is_empty() {
            writeln!(out, "details:")?;
            write!(out, "{details}")?;
        }
        writeln!(out, "{}", if passed { "PASS" } else { "FAIL" })?;
    }
    Ok(passed)
}

fn cmd_enumerate(out: &mut impl Write, source: &Source, max_size: usize, grammar_only: bool) -> Result<(), CliError> {
    if max_size == 0 {
        return Err(CliError::Usage("--max-size must be at least 1".into()));
    }
    let sys = load(source)?;
    if grammar_only {
        let g = grammar_for(&sys.name).map_err(|e| CliError::Usage(e.to_string()))?;
        for t in g.enumerate(max_size) {
            writeln!(out, "{}", print_term(&t))?;
        }
    } else {
        for t in ddrs::analysis::enumerate_closed(&sys.signature, max_size) {
            writeln!(out, "{}", print_term(&t))?;
        }
    }
    Ok(())
}

fn cmd_list(out: &mut impl Write, as_json: bool) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for name in BUILTIN_NAMES {
        match builtin(name) {
            Ok(sys) => {
                let st = &sys.status;
                if as_json {
                    rows.push(json!({"name": name, "signature": sys.signature.name(), "rules": sys.rules.len(), "status": st}));
                } else {
                    writeln!(
                        out,
                        "{name:<14} {:>4} rules  termination: {:<8} confluence: {:<8} ground-confluence: {}",
                        sys.rules.len(),
                        st.termination.claim,
                        st.confluence.claim,
                        st.ground_confluence.claim
                    )?;
                }
            }
            Err(e) if as_json => rows.push(json!({"name": name, "error": e.to_string()})),
            Err(e) => writeln!(out, "{name:<14} does not load: {e}")?,
        }
    }
    if as_json {
        writeln!(out, "{}", serde_json::to_string_pretty(&rows).expect("json"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let code = match cli.command {
        Command::Normalize { source, term, strategy, seed, limits, trace } => {
            let strategy = match strategy {
                StrategyArg::Innermost => Strategy::Innermost,
                StrategyArg::Outermost => Strategy::Outermost,
                StrategyArg::Random => Strategy::Random(seed),
            };
            // flush what was printed (e.g. a trace) even when the run fails
            let r = cmd_normalize(&mut out, &source, &term, strategy, limits.limits(), trace);
            out.flush()?;
            r?;
            ExitCode::SUCCESS
        }
        Command::Convert { from, to, term, limits } => {
            cmd_convert(&mut out, from, to, &term, limits.limits())?;
            ExitCode::SUCCESS
        }
        Command::Check { source, what, max_size, seed, trials, search_budget, limits, json } => {
            let args = CheckArgs { what, max_size, seed, trials, search_budget, limits: limits.limits(), json };
            if cmd_check(&mut out, &source, &args)? {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Enumerate { source, max_size, grammar_only } => {
            cmd_enumerate(&mut out, &source, max_size, grammar_only)?;
            ExitCode::SUCCESS
        }
        Command::Dump { system } => {
            write!(out, "{}", dump(&builtin(&system)?))?;
            ExitCode::SUCCESS
        }
        Command::List { json } => {
            cmd_list(&mut out, json)?;
            ExitCode::SUCCESS
        }
    };
    out.flush()?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddrs: {e}");
            match e {
                CliError::Failed(_) => ExitCode::from(1),
                CliError::Usage(_) | CliError::Io(_) => ExitCode::from(2),
            }
        }
    }
}
