//! Text formats: problems, traces, proof certificates, and size logs.
//!
//! Certificates are line-oriented and deliberately redundant. Each node
//! record carries the rule, its parameters, the child count, and a short
//! digest of the sequent it concludes. The reader re-derives every sequent
//! top-down from the problem — the recorded digests pin the derivation, so
//! a tampered certificate fails at the first node whose recomputed sequent
//! no longer matches.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::cnf::{Clause, ClauseSet, Literal};
use crate::dpll::DpllStep;
use crate::lkdpll::{self, ProofError, ProofTree, Rule, Sequent};
use crate::lkt::{LktError, LktFormula, LktProofTree, LktRule, LktSequent};
use crate::simulate::StepLog;
use crate::theory::{AtomPayload, AtomTable};

/// What a problem file declares: the clauses and the atom semantics.
#[derive(Clone, Debug)]
pub struct ParsedProblem {
    pub goal: ClauseSet,
    pub table: AtomTable,
}

#[derive(Error, Debug)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: explicit empty clause is not accepted")]
    EmptyClause { line: usize },
    #[error("line {line}: atom out of declared range")]
    AtomRange { line: usize },
    #[error("header declares {header} clauses but {found} were given")]
    ClauseCount { header: usize, found: usize },
    #[error("certificate line {line}: digest does not match the derived sequent")]
    DigestMismatch { line: usize },
    #[error("certificate was issued for a different problem")]
    WrongProblem,
    #[error("certificate ended before the proof was complete")]
    Truncated,
    #[error("certificate has {0} trailing node records")]
    TrailingRecords(usize),
    #[error("a certificate can only be written for a complete proof")]
    IncompleteProof,
    #[error("clausal rule rejected during reconstruction: {0}")]
    Proof(#[from] ProofError),
    #[error("focused rule rejected during reconstruction: {0}")]
    Lkt(#[from] LktError),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// Strips a trailing comment and surrounding whitespace.
fn significant(raw: &str) -> &str {
    let body = match raw.split_once('#') {
        Some((before, _)) => before,
        None => raw,
    };
    body.trim()
}

// ---------------------------------------------------------------- problems

/// Parses a problem file:
///
/// ```text
/// p cnft <natoms> <nclauses>
/// a <atom> eq <const> <const>
/// a <atom> neq <const> <const>
/// <lit> ... 0
/// ```
///
/// `#` starts a comment. Clause lines are zero-terminated; an explicit empty
/// clause is refused.
pub fn parse_problem(text: &str) -> Result<ParsedProblem, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut table: Option<AtomTable> = None;
    let mut clauses: Vec<Clause> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = significant(raw);
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let head = tokens.next().unwrap();
        match head {
            "p" => {
                if header.is_some() {
                    return Err(syntax(line, "duplicate header"));
                }
                if tokens.next() != Some("cnft") {
                    return Err(syntax(line, "expected `p cnft <natoms> <nclauses>`"));
                }
                let natoms: usize = next_number(&mut tokens, line, "atom count")?;
                let nclauses: usize = next_number(&mut tokens, line, "clause count")?;
                expect_end(&mut tokens, line)?;
                header = Some((natoms, nclauses));
                table = Some(AtomTable::propositional(natoms));
            }
            "a" => {
                let table = table
                    .as_mut()
                    .ok_or_else(|| syntax(line, "atom declaration before header"))?;
                let atom: u32 = next_number(&mut tokens, line, "atom id")?;
                if atom == 0 || atom as usize > table.natoms() {
                    return Err(FormatError::AtomRange { line });
                }
                let kind = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing eq/neq"))?;
                let left = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing first constant"))?;
                let right = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing second constant"))?;
                expect_end(&mut tokens, line)?;
                match kind {
                    "eq" => table.declare_eq(atom, left, right),
                    "neq" => table.declare_neq(atom, left, right),
                    _ => return Err(syntax(line, "expected eq or neq")),
                }
            }
            _ => {
                let (natoms, _) =
                    header.ok_or_else(|| syntax(line, "clause before header"))?;
                let mut lits = Vec::new();
                let mut terminated = false;
                for tok in std::iter::once(head).chain(tokens) {
                    if terminated {
                        return Err(syntax(line, "tokens after clause terminator"));
                    }
                    let code: i32 = tok
                        .parse()
                        .map_err(|_| syntax(line, format!("bad literal `{tok}`")))?;
                    if code == 0 {
                        terminated = true;
                        continue;
                    }
                    if code.unsigned_abs() as usize > natoms {
                        return Err(FormatError::AtomRange { line });
                    }
                    lits.push(Literal::from_dimacs(code).expect("nonzero checked"));
                }
                if !terminated {
                    return Err(syntax(line, "clause line must end with 0"));
                }
                if lits.is_empty() {
                    return Err(FormatError::EmptyClause { line });
                }
                clauses.push(Clause::new(lits));
            }
        }
    }

    let (_, nclauses) = header.ok_or_else(|| syntax(0, "missing `p cnft` header"))?;
    if clauses.len() != nclauses {
        return Err(FormatError::ClauseCount {
            header: nclauses,
            found: clauses.len(),
        });
    }
    Ok(ParsedProblem {
        goal: ClauseSet::new(clauses),
        table: table.expect("header parsed"),
    })
}

fn next_number<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    what: &str,
) -> Result<T, FormatError> {
    tokens
        .next()
        .ok_or_else(|| syntax(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| syntax(line, format!("bad {what}")))
}

fn expect_end(
    tokens: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<(), FormatError> {
    if tokens.next().is_some() {
        Err(syntax(line, "unexpected trailing tokens"))
    } else {
        Ok(())
    }
}

/// Canonical problem text: header, atom declarations, sorted clauses. The
/// problem hash in certificates is taken over this form, so formatting and
/// comments never affect it.
pub fn write_problem(goal: &ClauseSet, table: &AtomTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnft {} {}", table.natoms(), goal.len());
    for atom in 1..=table.natoms() as u32 {
        match table.payload(atom) {
            AtomPayload::Prop => {}
            AtomPayload::Eq(l, r) => {
                let _ = writeln!(
                    out,
                    "a {atom} eq {} {}",
                    table.const_name(l),
                    table.const_name(r)
                );
            }
            AtomPayload::Neq(l, r) => {
                let _ = writeln!(
                    out,
                    "a {atom} neq {} {}",
                    table.const_name(l),
                    table.const_name(r)
                );
            }
        }
    }
    for clause in goal.clauses() {
        for l in clause.literals() {
            let _ = write!(out, "{} ", l.to_dimacs());
        }
        let _ = writeln!(out, "0");
    }
    out
}

/// Hex SHA-256 of the canonical form of a problem file's content.
pub fn problem_hash(text: &str) -> Result<String, FormatError> {
    let parsed = parse_problem(text)?;
    let canonical = write_problem(&parsed.goal, &parsed.table);
    Ok(hex_digest(&canonical))
}

fn hex_digest(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        let _ = write!(s, "{b:02x}");
    }
    s
}

// ------------------------------------------------------------------ traces

/// One step per line, in the syntax steps display as.
pub fn write_trace(steps: &[DpllStep]) -> String {
    let mut out = String::new();
    for s in steps {
        let _ = writeln!(out, "{s}");
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<DpllStep>, FormatError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = significant(raw);
        if body.is_empty() {
            continue;
        }
        let mut tokens = body.split_whitespace();
        let head = tokens.next().unwrap();
        let step = match head {
            "fail" => DpllStep::Fail {
                conflict: next_number(&mut tokens, line, "clause index")?,
            },
            "decide" => DpllStep::Decide {
                lit: next_literal(&mut tokens, line)?,
            },
            "backtrack" => DpllStep::Backtrack {
                conflict: next_number(&mut tokens, line, "clause index")?,
            },
            "unit" => DpllStep::UnitPropagate {
                clause: next_number(&mut tokens, line, "clause index")?,
                lit: next_literal(&mut tokens, line)?,
            },
            "tpropagate" => DpllStep::TheoryPropagate {
                lit: next_literal(&mut tokens, line)?,
            },
            "backjump" => {
                let conflict = next_number(&mut tokens, line, "clause index")?;
                let lit = next_literal(&mut tokens, line)?;
                let aux = read_zero_terminated(&mut tokens, line)?;
                DpllStep::TBackjump {
                    conflict,
                    aux: Clause::new(aux),
                    lit,
                }
            }
            "learn" => {
                let lits = read_zero_terminated(&mut tokens, line)?;
                DpllStep::TLearn {
                    clause: Clause::new(lits),
                }
            }
            "forget" => DpllStep::TForget {
                clause: next_number(&mut tokens, line, "clause index")?,
            },
            "restart" => DpllStep::Restart,
            _ => return Err(syntax(line, format!("unknown step `{head}`"))),
        };
        expect_end(&mut tokens, line)?;
        steps.push(step);
    }
    Ok(steps)
}

fn next_literal(
    tokens: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<Literal, FormatError> {
    let code: i32 = next_number(tokens, line, "literal")?;
    Literal::from_dimacs(code).ok_or_else(|| syntax(line, "literal cannot be 0"))
}

fn read_zero_terminated(
    tokens: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<Vec<Literal>, FormatError> {
    let mut lits = Vec::new();
    loop {
        let code: i32 = next_number(tokens, line, "literal list")?;
        if code == 0 {
            return Ok(lits);
        }
        lits.push(Literal::from_dimacs(code).expect("nonzero checked"));
    }
}

// ------------------------------------------------- clausal certificates

/// Canonical one-line rendering of a clausal sequent, the digest input.
pub fn sequent_text(seq: &Sequent) -> String {
    let mut s = String::from("ctx");
    for l in &seq.context {
        let _ = write!(s, " {}", l.to_dimacs());
    }
    let _ = write!(s, " |-");
    for c in seq.goal.clauses() {
        let _ = write!(s, " (");
        for (i, l) in c.literals().iter().enumerate() {
            if i > 0 {
                let _ = write!(s, " ");
            }
            let _ = write!(s, "{}", l.to_dimacs());
        }
        let _ = write!(s, ")");
    }
    s
}

fn short_digest(text: &str) -> String {
    hex_digest(text)[..16].to_string()
}

fn write_lits(out: &mut String, lits: &[Literal]) {
    for l in lits {
        let _ = write!(out, "{} ", l.to_dimacs());
    }
    let _ = write!(out, "0");
}

/// Serializes a complete clausal proof. `problem_canonical` is the canonical
/// problem text the proof refutes; its hash binds the certificate to it.
pub fn write_certificate(
    tree: &ProofTree,
    problem_canonical: &str,
) -> Result<String, FormatError> {
    if !tree.is_complete() {
        return Err(FormatError::IncompleteProof);
    }
    let mut out = String::from("c dpllt-cert v1\n");
    let _ = writeln!(out, "h problem {}", hex_digest(problem_canonical));
    write_cert_node(&mut out, tree);
    Ok(out)
}

fn write_cert_node(out: &mut String, tree: &ProofTree) {
    let ProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        unreachable!("completeness checked before writing");
    };
    let _ = write!(out, "n {}", rule.name());
    match rule {
        Rule::Split { lit } | Rule::Assert { lit } => {
            let _ = write!(out, " {}", lit.to_dimacs());
        }
        Rule::Empty => {}
        Rule::Subsume { lit, rest }
        | Rule::Resolve { lit, rest }
        | Rule::Unresolve { lit, rest } => {
            let _ = write!(out, " {} ", lit.to_dimacs());
            write_lits(out, rest.literals());
        }
        Rule::Weaken { clause } => {
            let _ = write!(out, " ");
            write_lits(out, clause.literals());
        }
        Rule::Shift { from } => {
            let _ = write!(out, " ");
            let lits: Vec<Literal> = from.iter().copied().collect();
            write_lits(out, &lits);
        }
        Rule::Cut { lits } => {
            let _ = write!(out, " ");
            write_lits(out, lits);
        }
    }
    let _ = writeln!(
        out,
        " {} {}",
        children.len(),
        short_digest(&sequent_text(sequent))
    );
    for c in children {
        write_cert_node(out, c);
    }
}

struct CertRecord {
    line: usize,
    rule: Rule,
    children: usize,
    digest: String,
}

fn parse_cert_records(
    text: &str,
    magic: &str,
    problem_canonical: &str,
    parse_rule: impl Fn(&mut std::str::SplitWhitespace<'_>, usize) -> Result<Rule, FormatError>,
) -> Result<Vec<CertRecord>, FormatError> {
    let mut records = Vec::new();
    let mut saw_magic = false;
    let mut saw_hash = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with("c ") || body == "c" {
            if body == magic {
                saw_magic = true;
            }
            continue;
        }
        let mut tokens = body.split_whitespace();
        match tokens.next().unwrap() {
            "h" => {
                if tokens.next() != Some("problem") {
                    return Err(syntax(line, "expected `h problem <hash>`"));
                }
                let hash = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing problem hash"))?;
                if hash != hex_digest(problem_canonical) {
                    return Err(FormatError::WrongProblem);
                }
                expect_end(&mut tokens, line)?;
                saw_hash = true;
            }
            "n" => {
                let rule = parse_rule(&mut tokens, line)?;
                let children: usize = next_number(&mut tokens, line, "child count")?;
                let digest = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing sequent digest"))?
                    .to_string();
                expect_end(&mut tokens, line)?;
                records.push(CertRecord {
                    line,
                    rule,
                    children,
                    digest,
                });
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }
    if !saw_magic {
        return Err(syntax(0, format!("missing `{magic}` marker")));
    }
    if !saw_hash {
        return Err(syntax(0, "missing `h problem` record"));
    }
    Ok(records)
}

fn parse_clausal_rule(
    tokens: &mut std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<Rule, FormatError> {
    let name = tokens
        .next()
        .ok_or_else(|| syntax(line, "missing rule name"))?;
    Ok(match name {
        "split" => Rule::Split {
            lit: next_literal(tokens, line)?,
        },
        "empty" => Rule::Empty,
        "assert" => Rule::Assert {
            lit: next_literal(tokens, line)?,
        },
        "subsume" => Rule::Subsume {
            lit: next_literal(tokens, line)?,
            rest: Clause::new(read_zero_terminated(tokens, line)?),
        },
        "resolve" => Rule::Resolve {
            lit: next_literal(tokens, line)?,
            rest: Clause::new(read_zero_terminated(tokens, line)?),
        },
        "weaken" => Rule::Weaken {
            clause: Clause::new(read_zero_terminated(tokens, line)?),
        },
        "shift" => Rule::Shift {
            from: read_zero_terminated(tokens, line)?.into_iter().collect(),
        },
        "unresolve" => Rule::Unresolve {
            lit: next_literal(tokens, line)?,
            rest: Clause::new(read_zero_terminated(tokens, line)?),
        },
        "cut" => Rule::Cut {
            lits: read_zero_terminated(tokens, line)?,
        },
        _ => return Err(syntax(line, format!("unknown rule `{name}`"))),
    })
}

/// Reads a clausal certificate back into a checked proof tree. Every sequent
/// is re-derived from the problem root; the recorded digests and child
/// counts must match. Theory side conditions are the caller's separate pass
/// ([`ProofTree::check`]).
pub fn read_certificate(
    text: &str,
    goal: &ClauseSet,
    problem_canonical: &str,
) -> Result<ProofTree, FormatError> {
    let records = parse_cert_records(text, "c dpllt-cert v1", problem_canonical, parse_clausal_rule)?;
    let mut idx = 0;
    let tree = rebuild_clausal(&records, &mut idx, Sequent::root(goal.clone()))?;
    if idx != records.len() {
        return Err(FormatError::TrailingRecords(records.len() - idx));
    }
    Ok(tree)
}

fn rebuild_clausal(
    records: &[CertRecord],
    idx: &mut usize,
    sequent: Sequent,
) -> Result<ProofTree, FormatError> {
    let rec = records.get(*idx).ok_or(FormatError::Truncated)?;
    *idx += 1;
    if rec.digest != short_digest(&sequent_text(&sequent)) {
        return Err(FormatError::DigestMismatch { line: rec.line });
    }
    let premises = lkdpll::premises(&sequent, &rec.rule)?;
    if premises.len() != rec.children {
        return Err(syntax(
            rec.line,
            format!(
                "rule {} derives {} premises but the record claims {}",
                rec.rule.name(),
                premises.len(),
                rec.children
            ),
        ));
    }
    let mut children = Vec::with_capacity(premises.len());
    for p in premises {
        children.push(rebuild_clausal(records, idx, p)?);
    }
    Ok(ProofTree::node(sequent, rec.rule.clone(), children)?)
}

// ------------------------------------------------- focused certificates

fn write_formula(out: &mut String, f: &LktFormula) {
    let _ = write!(out, "{f}");
}

fn tokenize_formula(text: &str) -> Vec<String> {
    text.replace('(', " ( ")
        .replace(')', " ) ")
        .split_whitespace()
        .map(str::to_string)
        .collect()
}

fn parse_formula_tokens(
    tokens: &[String],
    pos: &mut usize,
    line: usize,
) -> Result<LktFormula, FormatError> {
    let tok = tokens
        .get(*pos)
        .ok_or_else(|| syntax(line, "formula ended early"))?;
    *pos += 1;
    match tok.as_str() {
        "l" => {
            let code: i32 = tokens
                .get(*pos)
                .ok_or_else(|| syntax(line, "missing literal code"))?
                .parse()
                .map_err(|_| syntax(line, "bad literal code"))?;
            *pos += 1;
            Literal::from_dimacs(code)
                .map(LktFormula::Lit)
                .ok_or_else(|| syntax(line, "literal cannot be 0"))
        }
        "(" => {
            let op = tokens
                .get(*pos)
                .ok_or_else(|| syntax(line, "missing connective"))?
                .clone();
            *pos += 1;
            let a = parse_formula_tokens(tokens, pos, line)?;
            let b = parse_formula_tokens(tokens, pos, line)?;
            if tokens.get(*pos).map(String::as_str) != Some(")") {
                return Err(syntax(line, "missing closing paren"));
            }
            *pos += 1;
            let (a, b) = (Box::new(a), Box::new(b));
            Ok(match op.as_str() {
                "and+" => LktFormula::AndPlus(a, b),
                "or+" => LktFormula::OrPlus(a, b),
                "and-" => LktFormula::AndMinus(a, b),
                "or-" => LktFormula::OrMinus(a, b),
                _ => return Err(syntax(line, format!("unknown connective `{op}`"))),
            })
        }
        other => Err(syntax(line, format!("unexpected token `{other}`"))),
    }
}

/// Canonical one-line rendering of a focused sequent, the digest input.
pub fn lkt_sequent_text(seq: &LktSequent) -> String {
    let mut s = String::from("gamma");
    for f in &seq.gamma {
        let _ = write!(s, " {f} ;");
    }
    match &seq.focus {
        Some(f) => {
            let _ = write!(s, " |- [{f}]");
        }
        None => {
            let _ = write!(s, " |-");
            for f in &seq.zone {
                let _ = write!(s, " {f} ;");
            }
            let _ = write!(s, " o");
            for l in &seq.pending {
                let _ = write!(s, " {}", l.to_dimacs());
            }
        }
    }
    let _ = write!(s, " pols");
    for l in seq.pols.iter() {
        let _ = write!(s, " {}", l.to_dimacs());
    }
    s
}

/// Serializes a complete focused proof, bound to the same problem hash as
/// the clausal certificate.
pub fn write_lkt_certificate(
    tree: &LktProofTree,
    problem_canonical: &str,
) -> Result<String, FormatError> {
    if !tree.is_complete() {
        return Err(FormatError::IncompleteProof);
    }
    let mut out = String::from("c dpllt-lkt-cert v1\n");
    let _ = writeln!(out, "h problem {}", hex_digest(problem_canonical));
    write_lkt_node(&mut out, tree);
    Ok(out)
}

fn write_lkt_node(out: &mut String, tree: &LktProofTree) {
    let LktProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        unreachable!("completeness checked before writing");
    };
    let _ = write!(out, "n {}", rule.name());
    match rule {
        LktRule::OrPlusFocus { right } => {
            let _ = write!(out, " {}", if *right { "r" } else { "l" });
        }
        LktRule::Polarize { lit } => {
            let _ = write!(out, " {}", lit.to_dimacs());
        }
        LktRule::Decide { formula } => {
            let _ = write!(out, " ");
            write_formula(out, formula);
        }
        LktRule::AnalyticCut { lit } => {
            let _ = write!(out, " {}", lit.to_dimacs());
        }
        LktRule::GeneralCut { lits } => {
            let _ = write!(out, " ");
            write_lits(out, lits);
        }
        _ => {}
    }
    let _ = writeln!(
        out,
        " {} {}",
        children.len(),
        short_digest(&lkt_sequent_text(sequent))
    );
    for c in children {
        write_lkt_node(out, c);
    }
}

struct LktRecord {
    line: usize,
    rule: LktRule,
    children: usize,
    digest: String,
}

/// Reads a focused certificate back, re-deriving every sequent from the
/// given root (normally the fresh encoding of the problem).
pub fn read_lkt_certificate(
    text: &str,
    root: LktSequent,
    problem_canonical: &str,
) -> Result<LktProofTree, FormatError> {
    let mut records = Vec::new();
    let mut saw_magic = false;
    let mut saw_hash = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        if body.starts_with("c ") || body == "c" {
            if body == "c dpllt-lkt-cert v1" {
                saw_magic = true;
            }
            continue;
        }
        let mut tokens = body.split_whitespace();
        match tokens.next().unwrap() {
            "h" => {
                if tokens.next() != Some("problem") {
                    return Err(syntax(line, "expected `h problem <hash>`"));
                }
                let hash = tokens
                    .next()
                    .ok_or_else(|| syntax(line, "missing problem hash"))?;
                if hash != hex_digest(problem_canonical) {
                    return Err(FormatError::WrongProblem);
                }
                saw_hash = true;
            }
            "n" => {
                let rest: Vec<String> = tokens.map(str::to_string).collect();
                if rest.len() < 3 {
                    return Err(syntax(line, "truncated node record"));
                }
                let digest = rest[rest.len() - 1].clone();
                let children: usize = rest[rest.len() - 2]
                    .parse()
                    .map_err(|_| syntax(line, "bad child count"))?;
                let rule = parse_lkt_rule(&rest[..rest.len() - 2], line)?;
                records.push(LktRecord {
                    line,
                    rule,
                    children,
                    digest,
                });
            }
            other => return Err(syntax(line, format!("unknown record `{other}`"))),
        }
    }
    if !saw_magic {
        return Err(syntax(0, "missing `c dpllt-lkt-cert v1` marker"));
    }
    if !saw_hash {
        return Err(syntax(0, "missing `h problem` record"));
    }
    let mut idx = 0;
    let tree = rebuild_lkt(&records, &mut idx, root)?;
    if idx != records.len() {
        return Err(FormatError::TrailingRecords(records.len() - idx));
    }
    Ok(tree)
}

fn parse_lkt_rule(tokens: &[String], line: usize) -> Result<LktRule, FormatError> {
    let name = tokens
        .first()
        .ok_or_else(|| syntax(line, "missing rule name"))?;
    let args = &tokens[1..];
    let one_literal = |what: &str| -> Result<Literal, FormatError> {
        let code: i32 = args
            .first()
            .ok_or_else(|| syntax(line, format!("missing {what}")))?
            .parse()
            .map_err(|_| syntax(line, format!("bad {what}")))?;
        Literal::from_dimacs(code).ok_or_else(|| syntax(line, "literal cannot be 0"))
    };
    Ok(match name.as_str() {
        "and+" => LktRule::AndPlusFocus,
        "or+" => match args.first().map(String::as_str) {
            Some("l") => LktRule::OrPlusFocus { right: false },
            Some("r") => LktRule::OrPlusFocus { right: true },
            _ => return Err(syntax(line, "expected l or r")),
        },
        "init" => LktRule::Init,
        "init-theory" => LktRule::InitTheory,
        "release" => LktRule::Release,
        "and-" => LktRule::AndMinus,
        "or-" => LktRule::OrMinus,
        "store" => LktRule::Store,
        "pol" => LktRule::Polarize {
            lit: one_literal("literal")?,
        },
        "decide" => {
            let text = args.join(" ");
            let toks = tokenize_formula(&text);
            let mut pos = 0;
            let formula = parse_formula_tokens(&toks, &mut pos, line)?;
            if pos != toks.len() {
                return Err(syntax(line, "trailing formula tokens"));
            }
            LktRule::Decide { formula }
        }
        "theory-close" => LktRule::TheoryClose,
        "acut" => LktRule::AnalyticCut {
            lit: one_literal("literal")?,
        },
        "gcut" => {
            let mut lits = Vec::new();
            let mut done = false;
            for a in args {
                if done {
                    return Err(syntax(line, "tokens after literal list"));
                }
                let code: i32 = a
                    .parse()
                    .map_err(|_| syntax(line, "bad literal"))?;
                if code == 0 {
                    done = true;
                } else {
                    lits.push(Literal::from_dimacs(code).expect("nonzero checked"));
                }
            }
            if !done {
                return Err(syntax(line, "literal list must end with 0"));
            }
            LktRule::GeneralCut { lits }
        }
        _ => return Err(syntax(line, format!("unknown rule `{name}`"))),
    })
}

fn rebuild_lkt(
    records: &[LktRecord],
    idx: &mut usize,
    sequent: LktSequent,
) -> Result<LktProofTree, FormatError> {
    let rec = records.get(*idx).ok_or(FormatError::Truncated)?;
    *idx += 1;
    if rec.digest != short_digest(&lkt_sequent_text(&sequent)) {
        return Err(FormatError::DigestMismatch { line: rec.line });
    }
    let premises = crate::lkt::premises(&sequent, &rec.rule)?;
    if premises.len() != rec.children {
        return Err(syntax(
            rec.line,
            format!(
                "rule {} derives {} premises but the record claims {}",
                rec.rule.name(),
                premises.len(),
                rec.children
            ),
        ));
    }
    let mut children = Vec::with_capacity(premises.len());
    for p in premises {
        children.push(rebuild_lkt(records, idx, p)?);
    }
    Ok(LktProofTree::node(sequent, rec.rule.clone(), children)?)
}

// -------------------------------------------------------------- size logs

/// Sidecar log: one `s <step> <delta> <bound>` line per extended leaf.
pub fn write_sizes(logs: &[StepLog]) -> String {
    let mut out = String::new();
    for (i, log) in logs.iter().enumerate() {
        for d in &log.leaf_deltas {
            let _ = writeln!(out, "s {} {} {}", i, d.delta, d.bound);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpll::{Engine, Verdict};
    use crate::simulate::{certify_unsat, SimConfig};
    use crate::theory::{TheoryKind, TheorySolver};
    use crate::translate::{translate_proof, SeqCorrespondence};

    fn problem_text() -> &'static str {
        "# tiny refutation\np cnft 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n"
    }

    #[test]
    fn problem_roundtrip_is_canonical() {
        let parsed = parse_problem(problem_text()).unwrap();
        assert_eq!(parsed.goal.len(), 4);
        assert_eq!(parsed.table.natoms(), 2);
        let canonical = write_problem(&parsed.goal, &parsed.table);
        let reparsed = parse_problem(&canonical).unwrap();
        assert_eq!(reparsed.goal, parsed.goal);
        // Hash ignores comments and spacing.
        assert_eq!(
            problem_hash(problem_text()).unwrap(),
            problem_hash(&canonical).unwrap()
        );
    }

    #[test]
    fn problem_rejects_bad_input() {
        assert!(matches!(
            parse_problem("p cnft 2 1\n0\n"),
            Err(FormatError::EmptyClause { .. })
        ));
        assert!(matches!(
            parse_problem("p cnft 2 1\n3 0\n"),
            Err(FormatError::AtomRange { .. })
        ));
        assert!(matches!(
            parse_problem("p cnft 2 2\n1 0\n"),
            Err(FormatError::ClauseCount { .. })
        ));
        assert!(matches!(
            parse_problem("1 0\n"),
            Err(FormatError::Syntax { .. })
        ));
    }

    #[test]
    fn equality_declarations_roundtrip() {
        let text = "p cnft 3 1\na 1 eq x y\na 2 eq y z\na 3 neq x z\n1 2 3 0\n";
        let parsed = parse_problem(text).unwrap();
        assert!(parsed.table.has_theory_atoms());
        let out = write_problem(&parsed.goal, &parsed.table);
        let again = parse_problem(&out).unwrap();
        assert_eq!(write_problem(&again.goal, &again.table), out);
    }

    #[test]
    fn trace_roundtrip() {
        let steps = vec![
            DpllStep::Decide {
                lit: Literal::from_dimacs(1).unwrap(),
            },
            DpllStep::UnitPropagate {
                clause: 2,
                lit: Literal::from_dimacs(-2).unwrap(),
            },
            DpllStep::TBackjump {
                conflict: 0,
                aux: Clause::from_dimacs(&[-1]).unwrap(),
                lit: Literal::from_dimacs(-2).unwrap(),
            },
            DpllStep::TLearn {
                clause: Clause::from_dimacs(&[-1, -2]).unwrap(),
            },
            DpllStep::TForget { clause: 4 },
            DpllStep::Restart,
            DpllStep::Fail { conflict: 0 },
        ];
        let text = write_trace(&steps);
        assert_eq!(parse_trace(&text).unwrap(), steps);
    }

    #[test]
    fn clausal_certificate_roundtrips_and_rejects_tampering() {
        let parsed = parse_problem(problem_text()).unwrap();
        let th = TheorySolver::new(TheoryKind::Empty, parsed.table.clone());
        let engine = Engine::new(&th);
        let outcome = engine.run(parsed.goal.clone(), None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        let run =
            certify_unsat(parsed.goal.clone(), &outcome.trace, &th, SimConfig::default())
                .unwrap();
        let canonical = write_problem(&parsed.goal, &parsed.table);
        let cert = write_certificate(&run.tree, &canonical).unwrap();

        let back = read_certificate(&cert, &parsed.goal, &canonical).unwrap();
        back.check(&th).unwrap();
        assert!(back.is_complete());
        assert_eq!(back.counted_size(), run.tree.counted_size());

        // Flip one rule parameter: the derived sequents shift and a digest
        // stops matching.
        let tampered = cert.replacen("n split 1", "n split -1", 1);
        if tampered != cert {
            assert!(read_certificate(&tampered, &parsed.goal, &canonical).is_err());
        }

        // A different problem is refused outright.
        let other = "p cnft 1 1\n1 0\n";
        let other_goal = parse_problem(other).unwrap().goal;
        assert!(matches!(
            read_certificate(&cert, &other_goal, other),
            Err(FormatError::WrongProblem)
        ));
    }

    #[test]
    fn lkt_certificate_roundtrips() {
        let parsed = parse_problem(problem_text()).unwrap();
        let th = TheorySolver::new(TheoryKind::Empty, parsed.table.clone());
        let engine = Engine::new(&th);
        let outcome = engine.run(parsed.goal.clone(), None).unwrap();
        let run =
            certify_unsat(parsed.goal.clone(), &outcome.trace, &th, SimConfig::default())
                .unwrap();
        let base = crate::lkdpll::eliminate_admissible(&run.tree, &th).unwrap();
        let (lkt, _) = translate_proof(&base, &th).unwrap();
        lkt.check_complete(&th).unwrap();

        let canonical = write_problem(&parsed.goal, &parsed.table);
        let cert = write_lkt_certificate(&lkt, &canonical).unwrap();
        let root = SeqCorrespondence::fresh(base.sequent())
            .unwrap()
            .to_sequent();
        let back = read_lkt_certificate(&cert, root, &canonical).unwrap();
        back.check_complete(&th).unwrap();
        assert_eq!(back.counted_size(), lkt.counted_size());
    }

    #[test]
    fn formula_serialization_roundtrips() {
        let lit = |c: i32| Literal::from_dimacs(c).unwrap();
        let f = LktFormula::AndPlus(
            Box::new(LktFormula::Lit(lit(-2))),
            Box::new(LktFormula::OrMinus(
                Box::new(LktFormula::Lit(lit(1))),
                Box::new(LktFormula::Lit(lit(3))),
            )),
        );
        let text = f.to_string();
        let toks = tokenize_formula(&text);
        let mut pos = 0;
        let back = parse_formula_tokens(&toks, &mut pos, 1).unwrap();
        assert_eq!(pos, toks.len());
        assert_eq!(back, f);
    }

    #[test]
    fn sizes_sidecar_lists_every_leaf_delta() {
        let parsed = parse_problem(problem_text()).unwrap();
        let th = TheorySolver::new(TheoryKind::Empty, parsed.table.clone());
        let engine = Engine::new(&th);
        let outcome = engine.run(parsed.goal.clone(), None).unwrap();
        let run =
            certify_unsat(parsed.goal.clone(), &outcome.trace, &th, SimConfig::default())
                .unwrap();
        let text = write_sizes(&run.logs);
        let expected: usize = run.logs.iter().map(|l| l.leaf_deltas.len()).sum();
        assert_eq!(text.lines().count(), expected);
        for line in text.lines() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            assert_eq!(parts[0], "s");
            let delta: usize = parts[2].parse().unwrap();
            let bound: usize = parts[3].parse().unwrap();
            assert!(delta <= bound);
        }
    }
}
