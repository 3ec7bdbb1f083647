//! The clausal sequent calculus the solver's runs are replayed into.
//!
//! Sequents have the shape `Δ ⊢ φ`: a set of asserted literals against a
//! goal clause multiset, read as "φ has no theory model extending Δ". Five
//! rules are *counted* toward proof size: split, empty, assert, subsume, and
//! resolve. Three admissible structural rules — goal weakening, context
//! shift, and unresolve — plus the left branch of the cut rule are *free*:
//! [`ProofTree::counted_size`] skips them, mirroring the way a solver's step
//! count ignores the work done inside side conditions.
//!
//! The checker is split in two layers used by both the library and the
//! certificate format: [`premises`] derives the expected premise sequents
//! from a conclusion and a rule instance (purely structural, deterministic),
//! and [`side_conditions`] validates the theory-dependent conditions.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::cnf::{Clause, ClauseSet, Literal};
use crate::theory::TheorySolver;

/// `Δ ⊢ φ`: the asserted context and the goal clause multiset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Sequent {
    pub context: BTreeSet<Literal>,
    pub goal: ClauseSet,
}

impl Sequent {
    pub fn new(context: BTreeSet<Literal>, goal: ClauseSet) -> Self {
        Sequent { context, goal }
    }

    /// Initial sequent for a problem: empty context against the clause set.
    pub fn root(goal: ClauseSet) -> Self {
        Sequent {
            context: BTreeSet::new(),
            goal,
        }
    }

    fn extend(&self, lit: Literal) -> BTreeSet<Literal> {
        let mut ctx = self.context.clone();
        ctx.insert(lit);
        ctx
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.context.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, " |- {:?}", self.goal)
    }
}

/// A rule instance. The clause parameters name what the rule acts on, so a
/// conclusion plus a rule determines the premises.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Rule {
    /// Branch on a literal whose atom occurs in the goal; both extensions of
    /// the context must be consistent. Left premise takes the negation.
    Split { lit: Literal },
    /// Axiom: the goal contains the empty clause.
    Empty,
    /// The goal contains `lit` as a unit clause; assert it into the context.
    Assert { lit: Literal },
    /// Remove the clause `rest ∨ lit` from the goal: the context already
    /// forces `lit`, so the clause is satisfied.
    Subsume { lit: Literal, rest: Clause },
    /// Strip `lit` from the clause `rest ∨ lit`: the context refutes `lit`.
    Resolve { lit: Literal, rest: Clause },
    /// Structural, uncounted: the conclusion carries an extra clause.
    Weaken { clause: Clause },
    /// Structural, uncounted: swap the context from `from` (the premise's)
    /// to the conclusion's, allowed when every goal-atom consequence of
    /// `from` is also a consequence of the new context.
    Shift { from: BTreeSet<Literal> },
    /// Structural, uncounted: reverse of resolve. The premise carries the
    /// wider clause `rest ∨ lit`; the context refutes `lit`.
    Unresolve { lit: Literal, rest: Clause },
    /// Cut on a clause of negated literals: the left premise adds `lits` as
    /// unit clauses (this branch is uncounted), the right premise adds the
    /// clause of their negations.
    Cut { lits: Vec<Literal> },
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::Split { .. } => "split",
            Rule::Empty => "empty",
            Rule::Assert { .. } => "assert",
            Rule::Subsume { .. } => "subsume",
            Rule::Resolve { .. } => "resolve",
            Rule::Weaken { .. } => "weaken",
            Rule::Shift { .. } => "shift",
            Rule::Unresolve { .. } => "unresolve",
            Rule::Cut { .. } => "cut",
        }
    }

    /// Structural rules that do not count toward proof size.
    pub fn is_uncounted(&self) -> bool {
        matches!(
            self,
            Rule::Weaken { .. } | Rule::Shift { .. } | Rule::Unresolve { .. }
        )
    }

    /// The five rules of the base calculus.
    pub fn is_base(&self) -> bool {
        matches!(
            self,
            Rule::Split { .. }
                | Rule::Empty
                | Rule::Assert { .. }
                | Rule::Subsume { .. }
                | Rule::Resolve { .. }
        )
    }
}

/// Why a rule instance or proof tree was rejected.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error("{rule}: expected {expected} premises, found {found}")]
    Arity {
        rule: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{rule}: goal does not contain the clause {clause:?}")]
    MissingClause { rule: &'static str, clause: Clause },
    #[error("empty: goal does not contain the empty clause")]
    MissingEmptyClause,
    #[error("split: no atom of {0} occurs in the goal")]
    AtomOutsideGoal(Literal),
    #[error("{rule}: premise {at} does not match the derived sequent")]
    PremiseMismatch { rule: &'static str, at: usize },
    #[error("{rule}: context plus {lit} must stay consistent")]
    MustBeConsistent { rule: &'static str, lit: Literal },
    #[error("{rule}: context plus {lit} must be inconsistent")]
    MustBeInconsistent { rule: &'static str, lit: Literal },
    #[error("shift: the premise context has goal-atom consequences the conclusion context lacks")]
    ConsequencesNotPreserved,
    #[error("cut on an empty literal list")]
    EmptyCut,
    #[error("rule {0} is not permitted by this checker")]
    RuleNotAllowed(&'static str),
    #[error("proof has open leaves")]
    Incomplete,
    #[error("cut rules cannot be eliminated by the admissible-rule pass")]
    CutNotEliminable,
    #[error("falsified-clause closure precondition failed: context does not refute {0}")]
    NotRefuted(Literal),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

/// Derives the premise sequents a rule instance demands from its conclusion.
/// Enforces the structural side conditions (clause membership, atom
/// occurrence, arity of the parameter list) but no theory conditions.
pub fn premises(conclusion: &Sequent, rule: &Rule) -> Result<Vec<Sequent>, ProofError> {
    match rule {
        Rule::Split { lit } => {
            if !conclusion.goal.mentions_atom(lit.atom()) {
                return Err(ProofError::AtomOutsideGoal(*lit));
            }
            Ok(vec![
                Sequent::new(conclusion.extend(lit.negated()), conclusion.goal.clone()),
                Sequent::new(conclusion.extend(*lit), conclusion.goal.clone()),
            ])
        }
        Rule::Empty => {
            if !conclusion.goal.contains(&Clause::empty()) {
                return Err(ProofError::MissingEmptyClause);
            }
            Ok(vec![])
        }
        Rule::Assert { lit } => {
            let unit = Clause::unit(*lit);
            if !conclusion.goal.contains(&unit) {
                return Err(ProofError::MissingClause {
                    rule: "assert",
                    clause: unit,
                });
            }
            Ok(vec![Sequent::new(
                conclusion.extend(*lit),
                conclusion.goal.clone(),
            )])
        }
        Rule::Subsume { lit, rest } => {
            let clause = rest.with_literal(*lit);
            let reduced = conclusion.goal.without_first(&clause).ok_or(
                ProofError::MissingClause {
                    rule: "subsume",
                    clause,
                },
            )?;
            Ok(vec![Sequent::new(conclusion.context.clone(), reduced)])
        }
        Rule::Resolve { lit, rest } => {
            let clause = rest.with_literal(*lit);
            let mut goal = conclusion.goal.without_first(&clause).ok_or(
                ProofError::MissingClause {
                    rule: "resolve",
                    clause,
                },
            )?;
            goal.insert(rest.clone());
            Ok(vec![Sequent::new(conclusion.context.clone(), goal)])
        }
        Rule::Weaken { clause } => {
            let reduced = conclusion.goal.without_first(clause).ok_or(
                ProofError::MissingClause {
                    rule: "weaken",
                    clause: clause.clone(),
                },
            )?;
            Ok(vec![Sequent::new(conclusion.context.clone(), reduced)])
        }
        Rule::Shift { from } => Ok(vec![Sequent::new(from.clone(), conclusion.goal.clone())]),
        Rule::Unresolve { lit, rest } => {
            let mut goal = conclusion.goal.without_first(rest).ok_or(
                ProofError::MissingClause {
                    rule: "unresolve",
                    clause: rest.clone(),
                },
            )?;
            goal.insert(rest.with_literal(*lit));
            Ok(vec![Sequent::new(conclusion.context.clone(), goal)])
        }
        Rule::Cut { lits } => {
            if lits.is_empty() {
                return Err(ProofError::EmptyCut);
            }
            let mut units = conclusion.goal.clone();
            for l in lits {
                units.insert(Clause::unit(*l));
            }
            let spine = Clause::new(lits.iter().map(|l| l.negated()).collect());
            Ok(vec![
                Sequent::new(conclusion.context.clone(), units),
                Sequent::new(conclusion.context.clone(), conclusion.goal.with(spine)),
            ])
        }
    }
}

/// Validates the theory-dependent side conditions of a rule instance.
pub fn side_conditions(
    conclusion: &Sequent,
    rule: &Rule,
    theory: &TheorySolver,
) -> Result<(), ProofError> {
    let consistent_with = |lit: Literal, rule: &'static str| {
        if theory.consistent_with(&conclusion.context, lit) {
            Ok(())
        } else {
            Err(ProofError::MustBeConsistent { rule, lit })
        }
    };
    let inconsistent_with = |lit: Literal, rule: &'static str| {
        if theory.consistent_with(&conclusion.context, lit) {
            Err(ProofError::MustBeInconsistent { rule, lit })
        } else {
            Ok(())
        }
    };
    match rule {
        Rule::Split { lit } => {
            consistent_with(lit.negated(), "split")?;
            consistent_with(*lit, "split")
        }
        Rule::Empty | Rule::Weaken { .. } | Rule::Cut { .. } => Ok(()),
        Rule::Assert { lit } => {
            consistent_with(lit.negated(), "assert")?;
            consistent_with(*lit, "assert")
        }
        Rule::Subsume { lit, .. } => inconsistent_with(lit.negated(), "subsume"),
        Rule::Resolve { lit, .. } => inconsistent_with(*lit, "resolve"),
        Rule::Unresolve { lit, .. } => inconsistent_with(*lit, "unresolve"),
        Rule::Shift { from } => {
            let candidates = conclusion.goal.atom_literals();
            let before = theory.consequences_within(from, &candidates);
            let after = theory.consequences_within(&conclusion.context, &candidates);
            if before.is_subset(&after) {
                Ok(())
            } else {
                Err(ProofError::ConsequencesNotPreserved)
            }
        }
    }
}

/// A partial proof: open leaves await further extension.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ProofTree {
    Open(Sequent),
    Node {
        sequent: Sequent,
        rule: Rule,
        children: Vec<ProofTree>,
    },
}

impl ProofTree {
    pub fn sequent(&self) -> &Sequent {
        match self {
            ProofTree::Open(s) => s,
            ProofTree::Node { sequent, .. } => sequent,
        }
    }

    /// Builds a node after verifying its shape against [`premises`].
    pub fn node(sequent: Sequent, rule: Rule, children: Vec<ProofTree>) -> Result<Self, ProofError> {
        let expected = premises(&sequent, &rule)?;
        if expected.len() != children.len() {
            return Err(ProofError::Arity {
                rule: rule.name(),
                expected: expected.len(),
                found: children.len(),
            });
        }
        for (at, (want, child)) in expected.iter().zip(&children).enumerate() {
            if want != child.sequent() {
                return Err(ProofError::PremiseMismatch {
                    rule: rule.name(),
                    at,
                });
            }
        }
        Ok(ProofTree::Node {
            sequent,
            rule,
            children,
        })
    }

    pub fn open_leaves(&self) -> Vec<&Sequent> {
        let mut out = Vec::new();
        self.collect_open(&mut out);
        out
    }

    fn collect_open<'a>(&'a self, out: &mut Vec<&'a Sequent>) {
        match self {
            ProofTree::Open(s) => out.push(s),
            ProofTree::Node { children, .. } => {
                for c in children {
                    c.collect_open(out);
                }
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        match self {
            ProofTree::Open(_) => false,
            ProofTree::Node { children, .. } => children.iter().all(ProofTree::is_complete),
        }
    }

    /// Proof size: rule instances counted, skipping the structural rules and
    /// the left branch of every cut. Open leaves count zero.
    pub fn counted_size(&self) -> usize {
        match self {
            ProofTree::Open(_) => 0,
            ProofTree::Node { rule, children, .. } => {
                let own = if rule.is_uncounted() { 0 } else { 1 };
                let below: usize = match rule {
                    Rule::Cut { .. } => children[1].counted_size(),
                    _ => children.iter().map(ProofTree::counted_size).sum(),
                };
                own + below
            }
        }
    }

    /// Total number of rule nodes, everything included.
    pub fn node_count(&self) -> usize {
        match self {
            ProofTree::Open(_) => 0,
            ProofTree::Node { children, .. } => {
                1 + children.iter().map(ProofTree::node_count).sum::<usize>()
            }
        }
    }

    /// Replaces every open leaf labelled `target` with a copy of
    /// `replacement`, returning the rebuilt tree and how many leaves matched.
    pub fn replace_open_leaves(&self, target: &Sequent, replacement: &ProofTree) -> (ProofTree, usize) {
        match self {
            ProofTree::Open(s) if s == target => (replacement.clone(), 1),
            ProofTree::Open(_) => (self.clone(), 0),
            ProofTree::Node {
                sequent,
                rule,
                children,
            } => {
                let mut total = 0;
                let rebuilt = children
                    .iter()
                    .map(|c| {
                        let (t, n) = c.replace_open_leaves(target, replacement);
                        total += n;
                        t
                    })
                    .collect();
                (
                    ProofTree::Node {
                        sequent: sequent.clone(),
                        rule: rule.clone(),
                        children: rebuilt,
                    },
                    total,
                )
            }
        }
    }

    /// Full validation: every node's premises and side conditions, with a
    /// rule filter. Open leaves are permitted (partial proofs check too).
    fn check_with(
        &self,
        theory: &TheorySolver,
        allow: &dyn Fn(&Rule) -> bool,
    ) -> Result<(), ProofError> {
        match self {
            ProofTree::Open(_) => Ok(()),
            ProofTree::Node {
                sequent,
                rule,
                children,
            } => {
                if !allow(rule) {
                    return Err(ProofError::RuleNotAllowed(rule.name()));
                }
                let expected = premises(sequent, rule)?;
                if expected.len() != children.len() {
                    return Err(ProofError::Arity {
                        rule: rule.name(),
                        expected: expected.len(),
                        found: children.len(),
                    });
                }
                for (at, (want, child)) in expected.iter().zip(children).enumerate() {
                    if want != child.sequent() {
                        return Err(ProofError::PremiseMismatch {
                            rule: rule.name(),
                            at,
                        });
                    }
                }
                side_conditions(sequent, rule, theory)?;
                for child in children {
                    child.check_with(theory, allow)?;
                }
                Ok(())
            }
        }
    }

    /// Checks the tree against the full calculus (structural rules and cut
    /// included).
    pub fn check(&self, theory: &TheorySolver) -> Result<(), ProofError> {
        self.check_with(theory, &|_| true)
    }

    /// Checks the tree against the base calculus only: split, empty, assert,
    /// subsume, resolve. Structural rules and cut are rejected.
    pub fn check_base(&self, theory: &TheorySolver) -> Result<(), ProofError> {
        self.check_with(theory, &Rule::is_base)
    }
}

/// Builds the closure chain for a clause every literal of which is refuted by
/// the context: resolve strips the literals one by one, and the empty rule
/// closes. `goal` must contain `clause`; the tree proves `context ⊢ goal`
/// with counted size `clause.size() + 1`.
pub fn build_falsified_clause_proof(
    context: &BTreeSet<Literal>,
    clause: &Clause,
    goal: &ClauseSet,
    theory: &TheorySolver,
) -> Result<ProofTree, ProofError> {
    if !goal.contains(clause) {
        return Err(ProofError::MissingClause {
            rule: "resolve",
            clause: clause.clone(),
        });
    }
    for l in clause.iter() {
        if theory.consistent_with(context, l) {
            return Err(ProofError::NotRefuted(l));
        }
    }
    // Innermost node first: the goal where the clause has become empty.
    let mut shrunk = goal
        .without_first(clause)
        .expect("membership checked above");
    shrunk.insert(Clause::empty());
    let mut tree = ProofTree::node(
        Sequent::new(context.clone(), shrunk),
        Rule::Empty,
        vec![],
    )?;
    // Wrap resolves from the inside out: each layer restores one literal, so
    // the outermost conclusion carries the full clause.
    let lits = clause.literals();
    for i in 0..lits.len() {
        let rest = Clause::new(lits[..i].to_vec());
        let restored = Clause::new(lits[..=i].to_vec());
        let mut g = goal
            .without_first(clause)
            .expect("membership checked above");
        g.insert(restored);
        tree = ProofTree::node(
            Sequent::new(context.clone(), g),
            Rule::Resolve {
                lit: lits[i],
                rest,
            },
            vec![tree],
        )?;
    }
    Ok(tree)
}

/// Rewrites a complete proof that may use the three structural rules into
/// one using only the base calculus, never increasing the counted size.
/// Proofs containing cut are rejected: cuts are not admissible in the base
/// calculus, only the structural rules are.
pub fn eliminate_admissible(
    tree: &ProofTree,
    theory: &TheorySolver,
) -> Result<ProofTree, ProofError> {
    if !tree.is_complete() {
        return Err(ProofError::Incomplete);
    }
    let out = eliminate_inner(tree, theory)?;
    debug_assert!(out.counted_size() <= tree.counted_size());
    Ok(out)
}

fn eliminate_inner(tree: &ProofTree, theory: &TheorySolver) -> Result<ProofTree, ProofError> {
    let ProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        return Err(ProofError::Incomplete);
    };
    let clean: Vec<ProofTree> = children
        .iter()
        .map(|c| eliminate_inner(c, theory))
        .collect::<Result<_, _>>()?;
    match rule {
        Rule::Cut { .. } => Err(ProofError::CutNotEliminable),
        Rule::Weaken { clause } => push_clause(&clean[0], clause),
        Rule::Shift { .. } => retarget(&clean[0], &sequent.context, theory),
        Rule::Unresolve { lit, rest } => strip_literal(&clean[0], *lit, rest, theory),
        _ => ProofTree::node(sequent.clone(), rule.clone(), clean),
    }
}

/// Adds `extra` to the goal of every sequent in a base-only complete proof.
fn push_clause(tree: &ProofTree, extra: &Clause) -> Result<ProofTree, ProofError> {
    let ProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        return Err(ProofError::Internal(
            "weakening elimination reached an open leaf".into(),
        ));
    };
    if !rule.is_base() {
        return Err(ProofError::Internal(format!(
            "weakening elimination reached rule {}",
            rule.name()
        )));
    }
    let widened = children
        .iter()
        .map(|c| push_clause(c, extra))
        .collect::<Result<Vec<_>, _>>()?;
    ProofTree::node(
        Sequent::new(sequent.context.clone(), sequent.goal.with(extra.clone())),
        rule.clone(),
        widened,
    )
}

/// Rebuilds a base-only complete proof of `Δ ⊢ φ` as one of `to ⊢ φ`, valid
/// whenever every goal-atom consequence of `Δ` holds under `to`.
fn retarget(
    tree: &ProofTree,
    to: &BTreeSet<Literal>,
    theory: &TheorySolver,
) -> Result<ProofTree, ProofError> {
    let ProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        return Err(ProofError::Internal(
            "context-shift elimination reached an open leaf".into(),
        ));
    };
    let goal = &sequent.goal;
    let at = |ctx: &BTreeSet<Literal>| Sequent::new(ctx.clone(), goal.clone());
    match rule {
        Rule::Empty => ProofTree::node(at(to), Rule::Empty, vec![]),
        Rule::Resolve { lit, rest } => {
            let premise = retarget(&children[0], to, theory)?;
            ProofTree::node(
                at(to),
                Rule::Resolve {
                    lit: *lit,
                    rest: rest.clone(),
                },
                vec![premise],
            )
        }
        Rule::Subsume { lit, rest } => {
            let premise = retarget(&children[0], to, theory)?;
            ProofTree::node(
                at(to),
                Rule::Subsume {
                    lit: *lit,
                    rest: rest.clone(),
                },
                vec![premise],
            )
        }
        Rule::Assert { lit } => {
            if theory.entails(to, *lit) {
                // The new context already forces the unit: the assert node
                // dissolves into its premise.
                retarget(&children[0], to, theory)
            } else if theory.entails(to, lit.negated()) {
                // The new context refutes the unit: resolve it to the empty
                // clause and close.
                let mut shrunk = goal
                    .without_first(&Clause::unit(*lit))
                    .ok_or_else(|| {
                        ProofError::Internal("assert conclusion lost its unit clause".into())
                    })?;
                shrunk.insert(Clause::empty());
                let inner = ProofTree::node(
                    Sequent::new(to.clone(), shrunk),
                    Rule::Empty,
                    vec![],
                )?;
                ProofTree::node(
                    at(to),
                    Rule::Resolve {
                        lit: *lit,
                        rest: Clause::empty(),
                    },
                    vec![inner],
                )
            } else {
                let mut extended = to.clone();
                extended.insert(*lit);
                let premise = retarget(&children[0], &extended, theory)?;
                ProofTree::node(at(to), Rule::Assert { lit: *lit }, vec![premise])
            }
        }
        Rule::Split { lit } => {
            if theory.entails(to, *lit) {
                retarget(&children[1], to, theory)
            } else if theory.entails(to, lit.negated()) {
                retarget(&children[0], to, theory)
            } else {
                let mut left_ctx = to.clone();
                left_ctx.insert(lit.negated());
                let mut right_ctx = to.clone();
                right_ctx.insert(*lit);
                let left = retarget(&children[0], &left_ctx, theory)?;
                let right = retarget(&children[1], &right_ctx, theory)?;
                ProofTree::node(at(to), Rule::Split { lit: *lit }, vec![left, right])
            }
        }
        _ => Err(ProofError::Internal(format!(
            "context-shift elimination reached rule {}",
            rule.name()
        ))),
    }
}

/// Rebuilds a base-only complete proof of `Δ ⊢ φ, rest ∨ lit` into one of
/// `Δ ⊢ φ, rest`, valid whenever the context refutes `lit`. Mirrors the
/// invertibility of resolve.
fn strip_literal(
    tree: &ProofTree,
    lit: Literal,
    rest: &Clause,
    theory: &TheorySolver,
) -> Result<ProofTree, ProofError> {
    let ProofTree::Node {
        sequent,
        rule,
        children,
    } = tree
    else {
        return Err(ProofError::Internal(
            "unresolve elimination reached an open leaf".into(),
        ));
    };
    let wide = rest.with_literal(lit);
    let target_goal = |g: &ClauseSet| -> Result<ClauseSet, ProofError> {
        let mut out = g.without_first(&wide).ok_or_else(|| {
            ProofError::Internal("unresolve elimination lost its clause".into())
        })?;
        out.insert(rest.clone());
        Ok(out)
    };
    let conclusion = Sequent::new(sequent.context.clone(), target_goal(&sequent.goal)?);
    match rule {
        Rule::Empty => ProofTree::node(conclusion, Rule::Empty, vec![]),
        Rule::Resolve {
            lit: l2,
            rest: rest2,
        } => {
            if rest2.with_literal(*l2) == wide {
                if *l2 == lit {
                    // The proof already strips exactly this literal here.
                    Ok(children[0].clone())
                } else {
                    // Same clause, different literal: strip below, then
                    // re-strip the other literal from the narrowed clause.
                    let narrowed_rest = rest.without_first(*l2).ok_or_else(|| {
                        ProofError::Internal("narrowed clause lost a literal".into())
                    })?;
                    let premise = strip_literal(&children[0], lit, &narrowed_rest, theory)?;
                    ProofTree::node(
                        conclusion,
                        Rule::Resolve {
                            lit: *l2,
                            rest: narrowed_rest,
                        },
                        vec![premise],
                    )
                }
            } else {
                let premise = strip_literal(&children[0], lit, rest, theory)?;
                ProofTree::node(
                    conclusion,
                    Rule::Resolve {
                        lit: *l2,
                        rest: rest2.clone(),
                    },
                    vec![premise],
                )
            }
        }
        Rule::Subsume {
            lit: l2,
            rest: rest2,
        } => {
            if rest2.with_literal(*l2) == wide {
                if *l2 == lit {
                    // Both polarities of `lit` clash with the context, so the
                    // context is inconsistent and any literal subsumes; if
                    // nothing is left, the clause is already empty.
                    if rest.is_empty() {
                        ProofTree::node(conclusion, Rule::Empty, vec![])
                    } else {
                        let pick = rest.literals()[0];
                        let remainder = rest.without_first(pick).expect("nonempty");
                        ProofTree::node(
                            conclusion,
                            Rule::Subsume {
                                lit: pick,
                                rest: remainder,
                            },
                            vec![children[0].clone()],
                        )
                    }
                } else {
                    let narrowed_rest = rest.without_first(*l2).ok_or_else(|| {
                        ProofError::Internal("narrowed clause lost a literal".into())
                    })?;
                    ProofTree::node(
                        conclusion,
                        Rule::Subsume {
                            lit: *l2,
                            rest: narrowed_rest,
                        },
                        vec![children[0].clone()],
                    )
                }
            } else {
                let premise = strip_literal(&children[0], lit, rest, theory)?;
                ProofTree::node(
                    conclusion,
                    Rule::Subsume {
                        lit: *l2,
                        rest: rest2.clone(),
                    },
                    vec![premise],
                )
            }
        }
        Rule::Assert { lit: l2 } => {
            let premise = strip_literal(&children[0], lit, rest, theory)?;
            ProofTree::node(conclusion, Rule::Assert { lit: *l2 }, vec![premise])
        }
        Rule::Split { lit: l2 } => {
            let left = strip_literal(&children[0], lit, rest, theory)?;
            let right = strip_literal(&children[1], lit, rest, theory)?;
            ProofTree::node(conclusion, Rule::Split { lit: *l2 }, vec![left, right])
        }
        _ => Err(ProofError::Internal(format!(
            "unresolve elimination reached rule {}",
            rule.name()
        ))),
    }
}
