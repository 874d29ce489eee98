//! Concrete syntax for terms and for rule files.
//!
//! Operators from tightest to loosest: postfix appends (`:b0`, `:d7`,
//! `:u0`), prefix minus, the tree constructors `^u ^b ^d`, then `*` and
//! `+`; the binary levels associate to the left. `S(t)` and `P(t)` always
//! use call syntax.
//!
//! ```
//! use ddrs::syntax::{parse_term, print_term};
//! use ddrs::term::Signature;
//!
//! let sig = Signature::named("SigmaZ").unwrap();
//! let t = parse_term("9:d7:d5", &sig).unwrap();
//! assert_eq!(print_term(&t), "(9:d7):d5");
//! assert_eq!(t.size(), 3); // appends are unary symbols
//! ```

use thiserror::Error;

use crate::catalog::schema::{IndexRange, MetaDigit, RuleSchema, SchemaTerm};
use crate::term::{Family, Head, Signature, Symbol, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown symbol `{name}` at {line}:{col}")]
    UnknownSymbol { name: String, line: usize, col: usize },
    #[error("duplicate tag [{tag}] at line {line}")]
    DuplicateTag { tag: String, line: usize },
    #[error("range error at line {line}: {msg}")]
    Range { line: usize, msg: String },
    #[error("missing header: expected `system <name> over <signature>`")]
    MissingHeader,
    #[error("unsupported format version `{0}`")]
    Version(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Digit(u8),
    Ident(String),
    Meta(MetaDigit),
    Append(Family, MetaDigit),
    Tree(Family),
    Pow(MetaDigit),
    LParen,
    RParen,
    Minus,
    Plus,
    Star,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Digit(d) => format!("`{d}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Meta(m) => format!("`{m}`"),
        Tok::Append(f, m) => format!("`:{}{}`", f.letter(), m),
        Tok::Tree(f) => format!("`^{}`", f.letter()),
        Tok::Pow(m) => format!("`^{m}`"),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Plus => "`+`".into(),
        Tok::Star => "`*`".into(),
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col0: usize,
}

impl Lexer {
    fn err(&self, col: usize, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Syntax { line: self.line, col: self.col0 + col + 1, msg: msg.into() }
    }

    fn meta_braced(&mut self) -> Result<MetaDigit, SyntaxError> {
        // positioned just after `{`
        let start = self.pos;
        let mut body = String::new();
        while let Some(&c) = self.chars.get(self.pos) {
            self.pos += 1;
            if c == '}' {
                return match body.chars().collect::<Vec<_>>().as_slice() {
                    [c] if c.is_ascii_digit() => Ok(MetaDigit::Lit(*c as u8 - b'0')),
                    [c] if c.is_ascii_lowercase() => Ok(MetaDigit::Index(*c)),
                    [c, '\''] if c.is_ascii_lowercase() => Ok(MetaDigit::Succ(*c)),
                    [c, '*'] if c.is_ascii_lowercase() => Ok(MetaDigit::Star(*c)),
                    _ => Err(self.err(start, format!("malformed meta-digit `{{{body}}}`"))),
                };
            }
            body.push(c);
        }
        Err(self.err(start, "unterminated `{`"))
    }

    fn digit_or_meta(&mut self) -> Result<MetaDigit, SyntaxError> {
        match self.chars.get(self.pos) {
            Some(c) if c.is_ascii_digit() => {
                self.pos += 1;
                Ok(MetaDigit::Lit(*c as u8 - b'0'))
            }
            Some('{') => {
                self.pos += 1;
                self.meta_braced()
            }
            _ => Err(self.err(self.pos, "expected digit after append")),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, SyntaxError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.get(self.pos) {
            let col = self.pos;
            self.pos += 1;
            let tok = match c {
                c if c.is_whitespace() => continue,
                '0'..='9' => Tok::Digit(c as u8 - b'0'),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '-' => Tok::Minus,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '{' => Tok::Meta(self.meta_braced()?),
                ':' => {
                    let fam = self
                        .chars
                        .get(self.pos)
                        .and_then(|&l| Family::from_letter(l))
                        .ok_or_else(|| self.err(col, "expected `:u`, `:b` or `:d`"))?;
                    self.pos += 1;
                    let m = self.digit_or_meta()?;
                    if let MetaDigit::Lit(d) = m {
                        if d > fam.max_digit() {
                            return Err(SyntaxError::UnknownSymbol {
                                name: format!(":{}{}", fam.letter(), d),
                                line: self.line,
                                col: self.col0 + col + 1,
                            });
                        }
                    }
                    Tok::Append(fam, m)
                }
                '^' => match self.chars.get(self.pos) {
                    Some('{') => {
                        self.pos += 1;
                        Tok::Pow(self.meta_braced()?)
                    }
                    Some(&l) if Family::from_letter(l).is_some() => {
                        self.pos += 1;
                        Tok::Tree(Family::from_letter(l).unwrap())
                    }
                    _ => return Err(self.err(col, "expected `^u`, `^b`, `^d` or `^{..}`")),
                },
                c if c.is_alphabetic() || c == '_' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.get(self.pos) {
                        if d.is_alphanumeric() || d == '_' {
                            s.push(d);
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(s)
                }
                other => return Err(self.err(col, format!("unexpected character `{other}`"))),
            };
            out.push((tok, col));
        }
        Ok(out)
    }
}

const VARIABLES: [&str; 4] = ["x", "y", "z", "w"];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Closed,
    Pattern,
    Schema,
}

struct Parser<'s> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    col0: usize,
    end_col: usize,
    mode: Mode,
    sig: &'s Signature,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.col0 + self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c) + 1
    }

    fn err(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::Syntax { line: self.line, col: self.col(), msg: msg.into() }
    }

    fn unexpected(&self, what: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.err(format!("expected {what}, found {}", describe(t))),
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn check_sym(&self, sym: Symbol, col: usize) -> Result<Symbol, SyntaxError> {
        if self.sig.contains(sym) {
            Ok(sym)
        } else {
            Err(SyntaxError::UnknownSymbol {
                name: sym.name(),
                line: self.line,
                col: self.col0 + col + 1,
            })
        }
    }

    fn check_meta(&self, m: MetaDigit, col: usize) -> Result<MetaDigit, SyntaxError> {
        if m.index().is_some() && self.mode != Mode::Schema {
            return Err(SyntaxError::Syntax {
                line: self.line,
                col: self.col0 + col + 1,
                msg: format!("meta-digit `{m}` outside a rule schema"),
            });
        }
        Ok(m)
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&describe(&tok)))
        }
    }

    fn binary_level(
        &mut self,
        next: fn(&mut Self) -> Result<SchemaTerm, SyntaxError>,
        op: impl Fn(&Tok) -> Option<Symbol>,
    ) -> Result<SchemaTerm, SyntaxError> {
        let mut left = next(self)?;
        while let Some(sym) = self.peek().and_then(&op) {
            let col = self.toks[self.pos].1;
            let sym = self.check_sym(sym, col)?;
            self.pos += 1;
            let right = next(self)?;
            left = SchemaTerm::App(sym, vec![left, right]);
        }
        Ok(left)
    }

    fn sum(&mut self) -> Result<SchemaTerm, SyntaxError> {
        self.binary_level(Self::product, |t| (*t == Tok::Plus).then_some(Symbol::Add))
    }

    fn product(&mut self) -> Result<SchemaTerm, SyntaxError> {
        self.binary_level(Self::tree, |t| (*t == Tok::Star).then_some(Symbol::Mul))
    }

    fn tree(&mut self) -> Result<SchemaTerm, SyntaxError> {
        self.binary_level(Self::prefix, |t| match t {
            Tok::Tree(f) => Some(Symbol::tree(*f)),
            _ => None,
        })
    }

    fn prefix(&mut self) -> Result<SchemaTerm, SyntaxError> {
        if self.peek() == Some(&Tok::Minus) {
            let col = self.toks[self.pos].1;
            let sym = self.check_sym(Symbol::Neg, col)?;
            self.pos += 1;
            let arg = self.prefix()?;
            return Ok(SchemaTerm::App(sym, vec![arg]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<SchemaTerm, SyntaxError> {
        let mut t = self.atom()?;
        while let Some(Tok::Append(fam, m)) = self.peek().cloned() {
            let col = self.toks[self.pos].1;
            let m = self.check_meta(m, col)?;
            t = match m {
                MetaDigit::Lit(d) => {
                    let sym = self.check_sym(Symbol::append(fam, d).expect("lexer checks range"), col)?;
                    SchemaTerm::App(sym, vec![t])
                }
                _ => SchemaTerm::Append(fam, m, Box::new(t)),
            };
            self.pos += 1;
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<SchemaTerm, SyntaxError> {
        let Some((tok, col)) = self.toks.get(self.pos).cloned() else {
            return Err(self.unexpected("a term"));
        };
        match tok {
            Tok::Digit(d) => {
                self.check_sym(Symbol::Digit(d), col)?;
                self.pos += 1;
                Ok(SchemaTerm::Digit(MetaDigit::Lit(d)))
            }
            Tok::Meta(m) => {
                let m = self.check_meta(m, col)?;
                self.pos += 1;
                Ok(SchemaTerm::Digit(m))
            }
            Tok::LParen => {
                self.pos += 1;
                let t = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) if name == "S" || name == "P" => {
                let sym = if name == "S" { Symbol::Succ } else { Symbol::Pred };
                let sym = self.check_sym(sym, col)?;
                self.pos += 1;
                let pow = match self.peek() {
                    Some(Tok::Pow(m)) => {
                        let m = *m;
                        let pcol = self.toks[self.pos].1;
                        self.check_meta(m, pcol)?;
                        if self.mode != Mode::Schema {
                            return Err(self.err("iterated operator outside a rule schema"));
                        }
                        self.pos += 1;
                        Some(m)
                    }
                    _ => None,
                };
                self.expect(Tok::LParen)?;
                let arg = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(match pow {
                    Some(m) => SchemaTerm::Iter(sym, m, Box::new(arg)),
                    None => SchemaTerm::App(sym, vec![arg]),
                })
            }
            Tok::Ident(name) if VARIABLES.contains(&name.as_str()) => {
                if self.mode == Mode::Closed {
                    return Err(self.err(format!("variable `{name}` not allowed in a closed term")));
                }
                self.pos += 1;
                Ok(SchemaTerm::Var(name))
            }
            Tok::Ident(name) => Err(SyntaxError::UnknownSymbol {
                name,
                line: self.line,
                col: self.col0 + col + 1,
            }),
            _ => Err(self.unexpected("a term")),
        }
    }

    fn finish(&self) -> Result<(), SyntaxError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of term")),
        }
    }
}

fn parse_with(
    src: &str,
    sig: &Signature,
    mode: Mode,
    line: usize,
    col0: usize,
) -> Result<SchemaTerm, SyntaxError> {
    let lexer = Lexer { chars: src.chars().collect(), pos: 0, line, col0 };
    let end_col = lexer.chars.len();
    let toks = lexer.tokens()?;
    let mut p = Parser { toks, pos: 0, line, col0, end_col, mode, sig };
    let t = p.sum()?;
    p.finish()?;
    Ok(t)
}

fn concrete(t: &SchemaTerm) -> Term {
    t.instantiate(&[]).expect("concrete schema term")
}

/// Parses a closed term; every symbol must belong to `sig`.
pub fn parse_term(src: &str, sig: &Signature) -> Result<Term, SyntaxError> {
    parse_with(src, sig, Mode::Closed, 1, 0).map(|t| concrete(&t))
}

/// Parses a term that may contain the rule variables `x`, `y`, `z`, `w`.
pub fn parse_pattern(src: &str, sig: &Signature) -> Result<Term, SyntaxError> {
    parse_with(src, sig, Mode::Pattern, 1, 0).map(|t| concrete(&t))
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Sum,
    Product,
    Tree,
    Prefix,
    Postfix,
    Atom,
}

fn level(t: &Term) -> Level {
    match t.symbol() {
        None | Some(Symbol::Digit(_) | Symbol::Succ | Symbol::Pred) => Level::Atom,
        Some(Symbol::Neg) => Level::Prefix,
        Some(Symbol::Add) => Level::Sum,
        Some(Symbol::Mul) => Level::Product,
        Some(Symbol::TreeU | Symbol::TreeB | Symbol::TreeD) => Level::Tree,
        Some(Symbol::AppendB(_) | Symbol::AppendD(_) | Symbol::AppendU) => Level::Postfix,
    }
}

/// Prints a term with minimal parentheses; an append applied to anything
/// other than an atom is parenthesized, so chains print as `(9:d7):d5`.
pub fn print_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, Level::Sum, &mut out);
    out
}

fn write_term(t: &Term, min: Level, out: &mut String) {
    crate::deep(|| write_node(t, min, out))
}

fn write_node(t: &Term, min: Level, out: &mut String) {
    let own = level(t);
    let paren = own < min;
    if paren {
        out.push('(');
    }
    match t.head() {
        Head::Var(v) => out.push_str(v.name()),
        Head::Sym(sym) => match sym {
            Symbol::Digit(d) => out.push((b'0' + d) as char),
            Symbol::Succ | Symbol::Pred => {
                out.push_str(if *sym == Symbol::Succ { "S(" } else { "P(" });
                write_term(&t.args()[0], Level::Sum, out);
                out.push(')');
            }
            Symbol::Neg => {
                out.push('-');
                write_term(&t.args()[0], Level::Prefix, out);
            }
            Symbol::Add | Symbol::Mul => {
                let (l, r) = if *sym == Symbol::Add {
                    (Level::Sum, Level::Product)
                } else {
                    (Level::Product, Level::Tree)
                };
                write_term(&t.args()[0], l, out);
                out.push(if *sym == Symbol::Add { '+' } else { '*' });
                write_term(&t.args()[1], r, out);
            }
            Symbol::TreeU | Symbol::TreeB | Symbol::TreeD => {
                write_term(&t.args()[0], Level::Tree, out);
                out.push(' ');
                out.push_str(&sym.name());
                out.push(' ');
                write_term(&t.args()[1], Level::Prefix, out);
            }
            Symbol::AppendB(_) | Symbol::AppendD(_) | Symbol::AppendU => {
                write_term(&t.args()[0], Level::Atom, out);
                out.push_str(&sym.name());
            }
        },
    }
    if paren {
        out.push(')');
    }
}

/// Header and rules of a parsed rule file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DdrsFile {
    pub system: String,
    pub signature: String,
    pub schemata: Vec<RuleSchema>,
}

fn is_tag_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '.' | '\'' | '_' | '-')
}

fn parse_ranges(text: &str, line: usize) -> Result<Vec<IndexRange>, SyntaxError> {
    let range_err = |msg: String| SyntaxError::Range { line, msg };
    let mut out: Vec<IndexRange> = Vec::new();
    for part in text.split(',') {
        let words: Vec<&str> = part.split_whitespace().collect();
        let [name, "in", span] = words.as_slice() else {
            return Err(SyntaxError::Syntax {
                line,
                col: 1,
                msg: format!("malformed index range `{}`", part.trim()),
            });
        };
        let mut nc = name.chars();
        let (Some(name), None) = (nc.next(), nc.next()) else {
            return Err(range_err(format!("index name `{name}` must be one letter")));
        };
        let (lo, hi) = span
            .split_once("..")
            .ok_or_else(|| range_err(format!("expected `lo..hi`, found `{span}`")))?;
        let bound = |s: &str| -> Result<u8, SyntaxError> {
            match s.parse::<u8>() {
                Ok(v) if v <= 9 => Ok(v),
                _ => Err(range_err(format!("index bound `{s}` outside 0..9"))),
            }
        };
        let (lo, hi) = (bound(lo)?, bound(hi)?);
        if lo > hi {
            return Err(range_err(format!("empty range {lo}..{hi}")));
        }
        if out.iter().any(|r| r.name == name) {
            return Err(range_err(format!("index `{name}` declared twice")));
        }
        out.push(IndexRange { name, lo, hi });
    }
    if out.len() > 2 {
        return Err(range_err("at most two indices per schema".into()));
    }
    Ok(out)
}

/// Parses a rule file.
///
/// ```text
/// # ddrs-format 1
/// system Nbud over SigmaN
/// rule [b2]: S(0) -> 1
/// rule [b10.i.j] for i in 0..1, j in 0..1: (x:b{i}) + (y:b{j}) -> S^{j}((x+y):b{i})
/// ```
///
/// Symbols are resolved against the full extended signature; checking
/// them against the declared signature happens when the system is loaded.
pub fn parse_ddrs_file(src: &str) -> Result<DdrsFile, SyntaxError> {
    let all = Signature::named("SigmaZext").expect("builtin signature");
    let mut header: Option<(String, String)> = None;
    let mut schemata: Vec<RuleSchema> = Vec::new();
    for (idx, raw) in src.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("ddrs-format") {
                if v.trim() != "1" {
                    return Err(SyntaxError::Version(v.trim().to_string()));
                }
            }
            continue;
        }
        let lead = raw.len() - raw.trim_start().len();
        let syntax = |col: usize, msg: String| SyntaxError::Syntax { line, col: col + 1, msg };
        if let Some(rest) = trimmed.strip_prefix("system ") {
            if header.is_some() {
                return Err(syntax(lead, "second `system` header".into()));
            }
            let words: Vec<&str> = rest.split_whitespace().collect();
            let [name, "over", sig] = words.as_slice() else {
                return Err(syntax(lead, "expected `system <name> over <signature>`".into()));
            };
            header = Some((name.to_string(), sig.to_string()));
            continue;
        }
        let Some(rest) = trimmed.strip_prefix("rule") else {
            return Err(syntax(lead, "expected `rule`, `system` or a comment".into()));
        };
        if header.is_none() {
            return Err(SyntaxError::MissingHeader);
        }
        let rest_off = lead + 4;
        let open = rest
            .find('[')
            .filter(|&p| rest[..p].trim().is_empty())
            .ok_or_else(|| syntax(rest_off, "expected `[tag]`".into()))?;
        let close = rest[open..]
            .find(']')
            .map(|p| p + open)
            .ok_or_else(|| syntax(rest_off + open, "unterminated tag".into()))?;
        let tag = &rest[open + 1..close];
        if tag.is_empty() || !tag.chars().all(is_tag_char) {
            return Err(syntax(rest_off + open, format!("invalid tag `[{tag}]`")));
        }
        let after = &rest[close + 1..];
        let after_off = rest_off + close + 1;
        let colon = after
            .find(':')
            .ok_or_else(|| syntax(after_off, "expected `:` after tag".into()))?;
        let between = after[..colon].trim();
        let ranges = if between.is_empty() {
            Vec::new()
        } else if let Some(r) = between.strip_prefix("for ") {
            parse_ranges(r, line)?
        } else {
            return Err(syntax(after_off, format!("unexpected `{between}` before `:`")));
        };
        let body = &after[colon + 1..];
        let body_off = after_off + colon + 1;
        let arrow = body
            .find("->")
            .ok_or_else(|| syntax(body_off, "expected `->`".into()))?;
        // columns are counted in characters
        let lhs_col = raw[..body_off].chars().count();
        let rhs_col = lhs_col + body[..arrow].chars().count() + 2;
        let lhs = parse_with(&body[..arrow], &all, Mode::Schema, line, lhs_col)?;
        let rhs = parse_with(&body[arrow + 2..], &all, Mode::Schema, line, rhs_col)?;
        if schemata.iter().any(|s| s.tag == tag) {
            return Err(SyntaxError::DuplicateTag { tag: tag.to_string(), line });
        }
        schemata.push(RuleSchema { tag: tag.to_string(), ranges, lhs, rhs, line });
    }
    let (system, signature) = header.ok_or(SyntaxError::MissingHeader)?;
    Ok(DdrsFile { system, signature, schemata })
}
