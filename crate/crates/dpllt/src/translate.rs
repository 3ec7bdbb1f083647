//! Translation of clausal proofs into the focused calculus.
//!
//! Each clausal sequent `Δ ⊢ φ` is tracked by a [`SeqCorrespondence`]: the
//! context literals, a map pairing every goal clause with the formula that
//! encodes it, leftover formulas from subsumed clauses, and the polarity
//! set. Clauses shrink during a proof but their encodings do not — the
//! stripped literals become *garbage* whose negations are declared positive,
//! so the focused proof can dismiss them by theory-backed axioms in one step
//! each.
//!
//! Every clausal rule emits a fixed derivation fragment; the counted size of
//! the fragment is checked against the number of formula members of the
//! conclusion plus four, and the translation fails loudly if the bound ever
//! breaks.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cnf::{Clause, Literal};
use crate::lkdpll::{ProofTree, Rule, Sequent};
use crate::lkt::{
    or_minus_spine, LktError, LktFormula, LktProofTree, LktRule, LktSequent, PolaritySet,
};
use crate::theory::TheorySolver;

/// Encodes a clause as a right-nested negative disjunction of its literals.
pub fn encode_clause(clause: &Clause) -> Result<LktFormula, TranslateError> {
    if clause.is_empty() {
        return Err(TranslateError::EmptyClauseEncoding);
    }
    Ok(or_minus_spine(clause.literals()))
}

/// Does `formula` encode `clause` up to garbage? The formula must be a
/// literal spine containing every clause literal; spine literals not in the
/// clause must have positively-declared negations.
pub fn p_corresponds(formula: &LktFormula, clause: &Clause, pols: &PolaritySet) -> bool {
    let Some(spine) = formula.or_minus_leaves() else {
        return false;
    };
    let spine_set: BTreeSet<Literal> = spine.iter().copied().collect();
    if !clause.literals().iter().all(|l| spine_set.contains(l)) {
        return false;
    }
    let clause_set: BTreeSet<Literal> = clause.literals().iter().copied().collect();
    spine
        .iter()
        .filter(|l| !clause_set.contains(l))
        .all(|l| pols.contains(l.negated()))
}

/// The bookkeeping that ties a clausal sequent to a focused one.
#[derive(Clone, Debug)]
pub struct SeqCorrespondence {
    /// Context literals, mirrored as literal members of the focused context.
    pub context: BTreeSet<Literal>,
    /// For each goal clause, one encoding formula per copy of the clause.
    pub pairs: BTreeMap<Clause, Vec<LktFormula>>,
    /// Encodings of clauses that were subsumed away: they stay in the
    /// focused context, each satisfied by the context.
    pub extras: Vec<LktFormula>,
    /// Literals declared positive so far.
    pub pols: PolaritySet,
}

impl SeqCorrespondence {
    /// Fresh, garbage-free correspondence for a root sequent.
    pub fn fresh(sequent: &Sequent) -> Result<Self, TranslateError> {
        let mut pairs: BTreeMap<Clause, Vec<LktFormula>> = BTreeMap::new();
        for clause in sequent.goal.clauses() {
            pairs
                .entry(clause.clone())
                .or_default()
                .push(encode_clause(clause)?);
        }
        Ok(SeqCorrespondence {
            context: sequent.context.clone(),
            pairs,
            extras: Vec::new(),
            pols: PolaritySet::new(),
        })
    }

    /// The focused sequent this correspondence denotes.
    pub fn to_sequent(&self) -> LktSequent {
        let mut gamma: BTreeSet<LktFormula> = self
            .context
            .iter()
            .map(|l| LktFormula::Lit(*l))
            .collect();
        for formulas in self.pairs.values() {
            gamma.extend(formulas.iter().cloned());
        }
        gamma.extend(self.extras.iter().cloned());
        LktSequent::unfocused(gamma, Vec::new(), Vec::new(), self.pols.clone())
    }

    /// Formula members with multiplicity: context literals, one encoding per
    /// clause copy, and extras. The emission bound is stated against this.
    pub fn member_count(&self) -> usize {
        self.context.len()
            + self.pairs.values().map(|v| v.len()).sum::<usize>()
            + self.extras.len()
    }

    /// Checks every invariant against the clausal sequent it should track.
    pub fn validate(
        &self,
        sequent: &Sequent,
        theory: &TheorySolver,
    ) -> Result<(), TranslateError> {
        if self.context != sequent.context {
            return Err(TranslateError::Invariant(
                "context literals differ from the tracked sequent".into(),
            ));
        }
        // Pairs cover the goal multiset exactly.
        for (clause, formulas) in &self.pairs {
            let have = sequent.goal.count_of(clause);
            if have != formulas.len() {
                return Err(TranslateError::Invariant(format!(
                    "clause {clause} has {have} copies but {} encodings",
                    formulas.len()
                )));
            }
            for f in formulas {
                if !p_corresponds(f, clause, &self.pols) {
                    return Err(TranslateError::Invariant(format!(
                        "formula {f} does not encode clause {clause}"
                    )));
                }
            }
        }
        for clause in sequent.goal.clauses() {
            if !self.pairs.contains_key(clause) {
                return Err(TranslateError::MissingPair(clause.clone()));
            }
        }
        // Positive literals are backed by the context.
        for p in self.pols.iter() {
            if !theory.entails(&self.context, *p) {
                return Err(TranslateError::Invariant(format!(
                    "positive literal {p} is not entailed by the context"
                )));
            }
        }
        // Extras are satisfied spines.
        for f in &self.extras {
            let Some(spine) = f.or_minus_leaves() else {
                return Err(TranslateError::Invariant(format!(
                    "extra formula {f} is not a literal spine"
                )));
            };
            if !spine.iter().any(|l| theory.entails(&self.context, *l)) {
                return Err(TranslateError::Invariant(format!(
                    "extra formula {f} is not satisfied by the context"
                )));
            }
        }
        Ok(())
    }

    fn with_context(&self, lit: Literal) -> Self {
        let mut next = self.clone();
        next.context.insert(lit);
        next
    }

    /// Moves one encoding of `from` to be an encoding of `to`.
    fn renarrow(&self, from: &Clause, to: Clause) -> Result<Self, TranslateError> {
        let mut next = self.clone();
        let formula = pop_pair(&mut next.pairs, from)?;
        next.pairs.entry(to).or_default().push(formula);
        Ok(next)
    }
}

fn pop_pair(
    pairs: &mut BTreeMap<Clause, Vec<LktFormula>>,
    clause: &Clause,
) -> Result<LktFormula, TranslateError> {
    let formulas = pairs
        .get_mut(clause)
        .ok_or_else(|| TranslateError::MissingPair(clause.clone()))?;
    let formula = formulas.pop().ok_or_else(|| {
        TranslateError::MissingPair(clause.clone())
    })?;
    if formulas.is_empty() {
        pairs.remove(clause);
    }
    Ok(formula)
}

fn peek_pair<'a>(
    pairs: &'a BTreeMap<Clause, Vec<LktFormula>>,
    clause: &Clause,
) -> Result<&'a LktFormula, TranslateError> {
    pairs
        .get(clause)
        .and_then(|v| v.last())
        .ok_or_else(|| TranslateError::MissingPair(clause.clone()))
}

/// Why a translation failed.
#[derive(Error, Debug)]
pub enum TranslateError {
    #[error("rule {0} is outside the translatable fragment")]
    DashedRule(&'static str),
    #[error("the empty clause has no encoding")]
    EmptyClauseEncoding,
    #[error("no encoding tracked for clause {0}")]
    MissingPair(Clause),
    #[error("correspondence invariant broken: {0}")]
    Invariant(String),
    #[error("emitted {emitted} inferences over a sequent with {members} members (bound {bound})")]
    EmissionBound {
        emitted: usize,
        members: usize,
        bound: usize,
    },
    #[error("focused inference rejected: {0}")]
    Lkt(#[from] LktError),
}

/// Per-node record of how much the translation emitted.
#[derive(Clone, Debug)]
pub struct NodeEmission {
    pub rule: &'static str,
    /// Counted inferences this node added (children excluded).
    pub emitted: usize,
    /// Formula members of the conclusion's focused sequent, with
    /// multiplicity.
    pub members: usize,
}

/// Derives the child correspondences a clausal rule induces. Order matches
/// the rule's premises.
pub fn premise_correspondences(
    corr: &SeqCorrespondence,
    rule: &Rule,
) -> Result<Vec<SeqCorrespondence>, TranslateError> {
    match rule {
        Rule::Split { lit } => Ok(vec![
            corr.with_context(lit.negated()),
            corr.with_context(*lit),
        ]),
        Rule::Empty => Ok(vec![]),
        Rule::Assert { lit } => {
            let mut next = corr.with_context(*lit);
            next.pols = next.pols.with(*lit)?;
            Ok(vec![next])
        }
        Rule::Resolve { lit, rest } => {
            let wide = rest.with_literal(*lit);
            let mut next = corr.renarrow(&wide, rest.clone())?;
            if !next.pols.contains(lit.negated()) {
                next.pols = next.pols.with(lit.negated())?;
            }
            Ok(vec![next])
        }
        Rule::Subsume { lit, rest } => {
            let wide = rest.with_literal(*lit);
            let mut next = corr.clone();
            let formula = pop_pair(&mut next.pairs, &wide)?;
            next.extras.push(formula);
            Ok(vec![next])
        }
        Rule::Cut { lits } => {
            let mut left = corr.clone();
            for l in lits {
                left.pairs
                    .entry(Clause::unit(*l))
                    .or_default()
                    .push(LktFormula::Lit(*l));
            }
            let negs: Vec<Literal> = lits.iter().map(|l| l.negated()).collect();
            let cut_clause = Clause::new(negs.clone());
            let mut right = corr.clone();
            right
                .pairs
                .entry(cut_clause)
                .or_default()
                .push(or_minus_spine(&negs));
            Ok(vec![left, right])
        }
        Rule::Weaken { .. } | Rule::Shift { .. } | Rule::Unresolve { .. } => {
            Err(TranslateError::DashedRule(rule.name()))
        }
    }
}

/// Assembles the focused fragment for one clausal node, given the already
/// translated children (in premise order). Returns the fragment and how many
/// counted inferences it added beyond the children.
pub fn translate_step(
    corr: &SeqCorrespondence,
    rule: &Rule,
    children: Vec<LktProofTree>,
) -> Result<(LktProofTree, usize), TranslateError> {
    let conclusion = corr.to_sequent();
    match rule {
        Rule::Split { lit } => {
            let cut = LktRule::AnalyticCut {
                lit: lit.negated(),
            };
            let tree = LktProofTree::node(conclusion, cut, children)?;
            Ok((tree, 1))
        }
        Rule::Empty => {
            let formula = peek_pair(&corr.pairs, &Clause::empty())?.clone();
            let spine = formula.or_minus_leaves().ok_or_else(|| {
                TranslateError::Invariant("empty-clause encoding is not a spine".into())
            })?;
            let (tower, n) = close_spine(&conclusion, &formula, &spine, None)?;
            let decide = LktRule::Decide {
                formula: formula.negated(),
            };
            let tree = LktProofTree::node(conclusion, decide, vec![tower])?;
            Ok((tree, n + 1))
        }
        Rule::Assert { lit } => {
            let [child] = take::<1>(children)?;
            let unit = Clause::unit(*lit);
            let formula = peek_pair(&corr.pairs, &unit)?.clone();
            let pol = LktRule::Polarize { lit: *lit };
            if formula == LktFormula::Lit(*lit) {
                // The encoding is the bare literal: declaring it positive is
                // the whole step, the stored member doubles as the context
                // literal.
                let tree = LktProofTree::node(conclusion, pol, vec![child])?;
                return Ok((tree, 1));
            }
            let spine = formula.or_minus_leaves().ok_or_else(|| {
                TranslateError::Invariant("unit encoding is not a spine".into())
            })?;
            let real = spine.iter().position(|l| l == lit).ok_or_else(|| {
                TranslateError::Invariant(
                    "unit encoding does not contain its literal".into(),
                )
            })?;
            let polarized = seq_after_pol(&conclusion, *lit)?;
            let (tower, n) =
                close_spine(&polarized, &formula, &spine, Some((real, child)))?;
            let decide = LktRule::Decide {
                formula: formula.negated(),
            };
            let decided = LktProofTree::node(polarized, decide, vec![tower])?;
            let tree = LktProofTree::node(conclusion, pol, vec![decided])?;
            Ok((tree, n + 2))
        }
        Rule::Resolve { lit, .. } => {
            let [child] = take::<1>(children)?;
            if corr.pols.contains(lit.negated()) {
                // Already garbage from an earlier strip: nothing to emit.
                return Ok((child, 0));
            }
            let pol = LktRule::Polarize {
                lit: lit.negated(),
            };
            let tree = LktProofTree::node(conclusion, pol, vec![child])?;
            Ok((tree, 1))
        }
        Rule::Subsume { .. } => {
            let [child] = take::<1>(children)?;
            // The subsumed clause's encoding merely becomes an extra: the
            // focused sequent is unchanged and nothing is emitted.
            Ok((child, 0))
        }
        Rule::Cut { lits } => {
            let gcut = LktRule::GeneralCut { lits: lits.clone() };
            let tree = LktProofTree::node(conclusion, gcut, children)?;
            Ok((tree, 1))
        }
        Rule::Weaken { .. } | Rule::Shift { .. } | Rule::Unresolve { .. } => {
            Err(TranslateError::DashedRule(rule.name()))
        }
    }
}

fn take<const N: usize>(children: Vec<LktProofTree>) -> Result<[LktProofTree; N], TranslateError> {
    let got = children.len();
    children.try_into().map_err(|_| {
        TranslateError::Invariant(format!("expected {N} translated children, got {got}"))
    })
}

fn seq_after_pol(seq: &LktSequent, lit: Literal) -> Result<LktSequent, TranslateError> {
    let mut next = seq.clone();
    next.pols = next.pols.with(lit)?;
    Ok(next)
}

/// Builds the focused decomposition of the negation of a spine formula:
/// a tower of positive conjunctions whose leaves are closed by theory axioms,
/// except for one designated literal which is released, stored, and handed
/// the open continuation. Returns the tree (focused on the negated spine)
/// and its counted size.
fn close_spine(
    at: &LktSequent,
    formula: &LktFormula,
    spine: &[Literal],
    real: Option<(usize, LktProofTree)>,
) -> Result<(LktProofTree, usize), TranslateError> {
    fn leaf(
        at: &LktSequent,
        lit: Literal,
        continuation: Option<LktProofTree>,
    ) -> Result<(LktProofTree, usize), TranslateError> {
        let focused = LktSequent::focused(at.gamma.clone(), LktFormula::Lit(lit.negated()), at.pols.clone());
        match continuation {
            None => {
                let t = LktProofTree::node(focused, LktRule::InitTheory, vec![])?;
                Ok((t, 1))
            }
            Some(child) => {
                let released = LktSequent::unfocused(
                    at.gamma.clone(),
                    vec![LktFormula::Lit(lit.negated())],
                    Vec::new(),
                    at.pols.clone(),
                );
                let stored = LktProofTree::node(released, LktRule::Store, vec![child])?;
                let t = LktProofTree::node(focused, LktRule::Release, vec![stored])?;
                Ok((t, 2))
            }
        }
    }

    fn tower(
        at: &LktSequent,
        spine: &[Literal],
        idx: usize,
        mut real: Option<(usize, LktProofTree)>,
    ) -> Result<(LktProofTree, usize), TranslateError> {
        if idx == spine.len() - 1 {
            let continuation = match real {
                Some((r, child)) if r == idx => Some(child),
                _ => None,
            };
            return leaf(at, spine[idx], continuation);
        }
        let head_continuation = match &real {
            Some((r, _)) if *r == idx => {
                let Some((_, child)) = real.take() else { unreachable!() };
                Some(child)
            }
            _ => None,
        };
        let (head, head_n) = leaf(at, spine[idx], head_continuation)?;
        let (rest, rest_n) = tower(at, spine, idx + 1, real)?;
        let focus = or_minus_spine(&spine[idx..]).negated();
        let seq = LktSequent::focused(at.gamma.clone(), focus, at.pols.clone());
        let t = LktProofTree::node(seq, LktRule::AndPlusFocus, vec![head, rest])?;
        Ok((t, head_n + rest_n + 1))
    }

    debug_assert_eq!(formula.or_minus_leaves().as_deref(), Some(spine));
    tower(at, spine, 0, real)
}

/// Translates a clausal proof (base rules and cuts only) into a focused
/// proof of the corresponding sequent, validating the correspondence at
/// every node and logging each node's emission against the bound.
pub fn translate_proof(
    tree: &ProofTree,
    theory: &TheorySolver,
) -> Result<(LktProofTree, Vec<NodeEmission>), TranslateError> {
    let corr = SeqCorrespondence::fresh(tree.sequent())?;
    corr.validate(tree.sequent(), theory)?;
    let mut logs = Vec::new();
    let lkt = translate_node(tree, &corr, theory, &mut logs)?;
    Ok((lkt, logs))
}

fn translate_node(
    tree: &ProofTree,
    corr: &SeqCorrespondence,
    theory: &TheorySolver,
    logs: &mut Vec<NodeEmission>,
) -> Result<LktProofTree, TranslateError> {
    match tree {
        ProofTree::Open(_) => Ok(LktProofTree::Open(corr.to_sequent())),
        ProofTree::Node {
            rule, children, ..
        } => {
            let child_corrs = premise_correspondences(corr, rule)?;
            let mut translated = Vec::with_capacity(children.len());
            for (child, child_corr) in children.iter().zip(&child_corrs) {
                child_corr.validate(child.sequent(), theory)?;
                translated.push(translate_node(child, child_corr, theory, logs)?);
            }
            let members = corr.member_count();
            let (lkt, emitted) = translate_step(corr, rule, translated)?;
            let bound = members + 4;
            if emitted > bound {
                return Err(TranslateError::EmissionBound {
                    emitted,
                    members,
                    bound,
                });
            }
            logs.push(NodeEmission {
                rule: rule.name(),
                emitted,
                members,
            });
            Ok(lkt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::ClauseSet;
    use crate::dpll::{Engine, Verdict};
    use crate::lkdpll::eliminate_admissible;
    use crate::simulate::{certify_unsat, SimConfig};
    use crate::theory::TheorySolver;

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn clause(codes: &[i32]) -> Clause {
        Clause::from_dimacs(codes).unwrap()
    }

    fn goal(clauses: &[&[i32]]) -> ClauseSet {
        ClauseSet::new(clauses.iter().map(|c| clause(c)).collect())
    }

    /// End-to-end: solve, certify, eliminate, translate, check.
    fn pipeline(g: ClauseSet, th: &TheorySolver) -> (LktProofTree, Vec<NodeEmission>) {
        let engine = Engine::new(th);
        let outcome = engine.run(g.clone(), None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        let run = certify_unsat(g, &outcome.trace, th, SimConfig::default()).unwrap();
        let base = eliminate_admissible(&run.tree, th).unwrap();
        base.check_base(th).unwrap();
        let (lkt, logs) = translate_proof(&base, th).unwrap();
        lkt.check_complete(th).unwrap();
        (lkt, logs)
    }

    #[test]
    fn encodes_clauses_as_spines() {
        let c = clause(&[1, -2, 3]);
        let f = encode_clause(&c).unwrap();
        assert_eq!(
            f.or_minus_leaves(),
            Some(vec![lit(1), lit(-2), lit(3)])
        );
        assert!(matches!(
            encode_clause(&Clause::empty()),
            Err(TranslateError::EmptyClauseEncoding)
        ));
    }

    #[test]
    fn correspondence_tolerates_polarized_garbage_only() {
        let c = clause(&[1]);
        let wide = or_minus_spine(&[lit(1), lit(2)]);
        let mut pols = PolaritySet::new();
        assert!(!p_corresponds(&wide, &c, &pols));
        pols.insert(lit(-2)).unwrap();
        assert!(p_corresponds(&wide, &c, &pols));
        // A missing clause literal is never garbage.
        assert!(!p_corresponds(&wide, &clause(&[3]), &pols));
    }

    #[test]
    fn unit_pair_refutation_translates() {
        let th = TheorySolver::empty(1);
        let (lkt, logs) = pipeline(goal(&[&[1], &[-1]]), &th);
        assert!(lkt.is_complete());
        for log in &logs {
            assert!(log.emitted <= log.members + 4);
        }
    }

    #[test]
    fn split_refutation_translates_with_analytic_cuts() {
        let th = TheorySolver::empty(2);
        let (lkt, logs) = pipeline(goal(&[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]), &th);
        assert!(lkt.is_complete());
        assert!(logs.iter().any(|l| l.rule == "split"));
        // Analytic cuts appear in the focused tree.
        fn has_acut(t: &LktProofTree) -> bool {
            match t {
                LktProofTree::Open(_) => false,
                LktProofTree::Node { rule, children, .. } => {
                    matches!(rule, LktRule::AnalyticCut { .. })
                        || children.iter().any(has_acut)
                }
            }
        }
        assert!(has_acut(&lkt));
    }

    #[test]
    fn wider_problems_translate_within_the_bound() {
        let th = TheorySolver::empty(3);
        let g = goal(&[
            &[1, 2, 3],
            &[1, 2, -3],
            &[1, -2],
            &[-1, 2],
            &[-1, -2, 3],
            &[-1, -2, -3],
        ]);
        let (lkt, logs) = pipeline(g, &th);
        assert!(lkt.is_complete());
        for log in &logs {
            assert!(
                log.emitted <= log.members + 4,
                "{} emitted {} with {} members",
                log.rule,
                log.emitted,
                log.members
            );
        }
    }

    #[test]
    fn dashed_rules_are_refused() {
        let th = TheorySolver::empty(3);
        // Propagating over (1 2) with 1 already false makes the certificate
        // narrow the clause and widen it back, so the raw tree carries
        // inverse-resolution steps until they are eliminated.
        let g = goal(&[&[-1], &[1, 2], &[-2, 3], &[-3]]);
        let engine = Engine::new(&th);
        let outcome = engine.run(g.clone(), None).unwrap();
        let run = certify_unsat(g.clone(), &outcome.trace, &th, SimConfig::default()).unwrap();
        match translate_proof(&run.tree, &th) {
            Err(TranslateError::DashedRule(_)) => {}
            other => panic!("expected a dashed-rule refusal, got {other:?}"),
        }
        // After elimination the same proof translates.
        let base = eliminate_admissible(&run.tree, &th).unwrap();
        let (lkt, _) = translate_proof(&base, &th).unwrap();
        lkt.check_complete(&th).unwrap();
    }

    #[test]
    fn hand_built_cut_tree_translates_to_a_general_cut() {
        use crate::lkdpll::{premises, Rule as LRule};
        let th = TheorySolver::empty(2);
        // Goal: (1), (-1 2), (-1 -2). Cut on units 1,2; the left branch is
        // a real proof, the right branch continues on the learned (-1 -2)...
        // here we keep both branches minimal instead: cut on 1 alone.
        let g = goal(&[&[1], &[-1, 2], &[-1, -2]]);
        let root = Sequent::root(g.clone());
        let cut = LRule::Cut { lits: vec![lit(2), lit(1)] };
        let prem = premises(&root, &cut).unwrap();

        // Left: goal + units 2, 1. Close: resolve (-1 2) down then... keep
        // it simple: assert 1, assert 2, then the clause (-1 -2) is fully
        // falsified.
        let left = {
            let s = prem[0].clone();
            let a1 = LRule::Assert { lit: lit(1) };
            let p1 = premises(&s, &a1).unwrap().remove(0);
            let a2 = LRule::Assert { lit: lit(2) };
            let p2 = premises(&p1, &a2).unwrap().remove(0);
            let closed = crate::lkdpll::build_falsified_clause_proof(
                &p2.context,
                &clause(&[-1, -2]),
                &p2.goal,
                &th,
            )
            .unwrap();
            let t2 = ProofTree::node(p1, a2, vec![closed]).unwrap();
            ProofTree::node(s, a1, vec![t2]).unwrap()
        };

        // Right: goal + (-2 -1): assert 1, falsify (-1 -2)? The added cut
        // clause is (-2 -1) = (-1 -2) as a multiset... assert 1 then 2 via
        // (-1 2)? Simplest: assert 1, resolve (-1 2) to (2), assert 2, then
        // (-1 -2) is falsified (two copies now—the original and the cut
        // clause—so close the original).
        let right = {
            let s = prem[1].clone();
            let a1 = LRule::Assert { lit: lit(1) };
            let p1 = premises(&s, &a1).unwrap().remove(0);
            let r = LRule::Resolve {
                lit: lit(-1),
                rest: clause(&[2]),
            };
            let p2 = premises(&p1, &r).unwrap().remove(0);
            let a2 = LRule::Assert { lit: lit(2) };
            let p3 = premises(&p2, &a2).unwrap().remove(0);
            let closed = crate::lkdpll::build_falsified_clause_proof(
                &p3.context,
                &clause(&[-1, -2]),
                &p3.goal,
                &th,
            )
            .unwrap();
            let t3 = ProofTree::node(p2, a2, vec![closed]).unwrap();
            let t2 = ProofTree::node(p1, r, vec![t3]).unwrap();
            ProofTree::node(s, a1, vec![t2]).unwrap()
        };

        let tree = ProofTree::node(root, cut, vec![left, right]).unwrap();
        tree.check(&th).unwrap();
        let (lkt, logs) = translate_proof(&tree, &th).unwrap();
        lkt.check_complete(&th).unwrap();
        assert!(logs.iter().any(|l| l.rule == "cut" && l.emitted == 1));
        for log in &logs {
            assert!(log.emitted <= log.members + 4);
        }
    }

    #[test]
    fn assert_on_wide_unit_emits_the_tower() {
        use crate::lkdpll::{premises, Rule as LRule};
        let th = TheorySolver::empty(3);
        // Goal: (1 2), (-1), (-2): resolve (1 2) by -1 to (2), assert 2 —
        // the unit (2)'s encoding is still the two-literal spine, so the
        // assert must emit the decide/tower form.
        let g = goal(&[&[1, 2], &[-1], &[-2]]);
        let root = Sequent::root(g.clone());
        let a_neg1 = LRule::Assert { lit: lit(-1) };
        let p1 = premises(&root, &a_neg1).unwrap().remove(0);
        let r = LRule::Resolve {
            lit: lit(1),
            rest: clause(&[2]),
        };
        let p2 = premises(&p1, &r).unwrap().remove(0);
        let a2 = LRule::Assert { lit: lit(2) };
        let p3 = premises(&p2, &a2).unwrap().remove(0);
        let closed = crate::lkdpll::build_falsified_clause_proof(
            &p3.context,
            &clause(&[-2]),
            &p3.goal,
            &th,
        )
        .unwrap();
        let t3 = ProofTree::node(p2, a2, vec![closed]).unwrap();
        let t2 = ProofTree::node(p1, r, vec![t3]).unwrap();
        let tree = ProofTree::node(root, a_neg1, vec![t2]).unwrap();
        tree.check(&th).unwrap();

        let (lkt, logs) = translate_proof(&tree, &th).unwrap();
        lkt.check_complete(&th).unwrap();
        // The widened assert: pol + decide + tower over 2 leaves + release +
        // store = 2*2 + 2 = 6.
        let wide_assert = logs
            .iter()
            .find(|l| l.rule == "assert" && l.emitted == 6)
            .expect("tower-form assert present");
        assert!(wide_assert.emitted <= wide_assert.members + 4);
        // The bare assert of -1 emits only its polarization.
        assert!(logs.iter().any(|l| l.rule == "assert" && l.emitted == 1));
    }
}
