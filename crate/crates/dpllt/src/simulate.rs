//! Step-by-step simulation of solver runs as proof construction.
//!
//! A [`SimSession`] holds a solver state and a partial proof side by side.
//! Every transition the solver makes is mirrored by extending the proof at
//! the open leaves that track the solver's backtrack points, and the session
//! re-checks two invariants after each step:
//!
//! * **correspondence** — every open leaf is labelled `Δ' ⊢ φ` for some
//!   backpoint `Δ'` of the current trail, and a refuted state has none;
//! * **bounded growth** — each replaced leaf grows the counted proof size by
//!   at most `size(φ) + 1` for basic steps and `size(φ) + 3` for advanced
//!   ones, where `φ` is the goal before the step.
//!
//! Advanced steps cut on clauses whose justification is itself discharged by
//! running the basic solver on the side condition and certifying *that* run;
//! the discharge lands in the uncounted left branch of the cut, exactly as
//! the solver's own step count ignores the cost of its side conditions.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::cnf::{Clause, ClauseSet, Literal, Trail};
use crate::dpll::{DpllState, DpllStep, Engine, StepError, Verdict};
use crate::lkdpll::{
    build_falsified_clause_proof, ProofError, ProofTree, Rule, Sequent,
};
use crate::theory::TheorySolver;

/// Limits for simulation and for the recursive discharge of cut branches.
#[derive(Clone, Copy, Debug)]
pub struct SimConfig {
    /// Step budget for solver runs, including discharge sub-runs.
    pub step_limit: u64,
    /// How deep discharge recursion may nest. Discharges only ever recurse
    /// into basic-system certification, so depth 1 suffices; the guard is
    /// defensive.
    pub max_discharge_depth: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step_limit: 200_000,
            max_discharge_depth: 4,
        }
    }
}

/// Proof growth at one replaced leaf.
#[derive(Clone, Debug)]
pub struct LeafDelta {
    /// Context of the leaf that was extended.
    pub context: BTreeSet<Literal>,
    /// Counted size of the subtree that replaced the leaf.
    pub delta: usize,
    /// The bound the delta was checked against.
    pub bound: usize,
}

/// Record of one simulated step.
#[derive(Clone, Debug)]
pub struct StepLog {
    pub step: DpllStep,
    pub basic: bool,
    /// Goal size before the step: the bounds are stated in terms of it.
    pub goal_size_before: usize,
    pub leaf_deltas: Vec<LeafDelta>,
}

/// Why a simulation step was refused.
#[derive(Error, Debug)]
pub enum SimError {
    #[error("solver step rejected: {0}")]
    Step(#[from] StepError),
    #[error("proof extension rejected: {0}")]
    Proof(#[from] ProofError),
    #[error("leaf grew by {delta}, exceeding the bound {bound}")]
    BoundExceeded { delta: usize, bound: usize },
    #[error("open leaves no longer track the solver's backtrack points")]
    CorrespondenceBroken,
    #[error("solver reached unsat but the proof still has open leaves")]
    RefutationIncomplete,
    #[error("trace ended without reaching unsat")]
    NotRefuted,
    #[error("learned the empty clause; it cannot head a cut")]
    LearnedEmptyClause,
    #[error("discharge run did not refute the side condition")]
    DischargeNotRefutable,
    #[error("discharge exceeded the step budget")]
    DischargeBudget,
    #[error("discharge recursion exceeded the configured depth")]
    DischargeTooDeep,
}

/// Does the partial proof correspond to the solver state? Open leaves must
/// be labelled by backpoints of the trail over the current goal; a refuted
/// state demands a complete proof.
pub fn correspondence_holds(state: &DpllState, tree: &ProofTree) -> bool {
    match state {
        DpllState::Unsat => tree.is_complete(),
        DpllState::Running { trail, goal } => {
            let allowed = trail.backpoint_sets();
            tree.open_leaves()
                .iter()
                .all(|s| s.goal == *goal && allowed.contains(&s.context))
        }
    }
}

fn open_node(context: BTreeSet<Literal>, goal: ClauseSet) -> ProofTree {
    ProofTree::Open(Sequent::new(context, goal))
}

fn shift_to(
    conclusion_ctx: BTreeSet<Literal>,
    inner: ProofTree,
) -> Result<ProofTree, ProofError> {
    let from = inner.sequent().context.clone();
    let goal = inner.sequent().goal.clone();
    ProofTree::node(
        Sequent::new(conclusion_ctx, goal),
        Rule::Shift { from },
        vec![inner],
    )
}

/// Extends the proof for one basic step. `trail` and `goal` are the solver
/// state *before* the step. Returns the new tree and the per-leaf growth.
pub fn extend_basic(
    tree: &ProofTree,
    trail: &Trail,
    goal: &ClauseSet,
    step: &DpllStep,
    theory: &TheorySolver,
) -> Result<(ProofTree, Vec<LeafDelta>), SimError> {
    let ctx = trail.literal_set();
    let target = Sequent::new(ctx.clone(), goal.clone());
    let bound = goal.size() + 1;

    let replacement: ProofTree = match step {
        DpllStep::Fail { conflict } | DpllStep::Backtrack { conflict } => {
            let clause = goal.clauses()[*conflict].clone();
            build_falsified_clause_proof(&ctx, &clause, goal, theory)?
        }
        DpllStep::Decide { lit } => {
            let mut with_l = ctx.clone();
            with_l.insert(*lit);
            let mut with_not_l = ctx.clone();
            with_not_l.insert(lit.negated());
            if theory.tc_unsat(&with_l) {
                // The decision clashes with the theory: the only live branch
                // asserts the negation, reached by a context shift.
                shift_to(ctx.clone(), open_node(with_not_l, goal.clone()))?
            } else if theory.tc_unsat(&with_not_l) {
                shift_to(ctx.clone(), open_node(with_l, goal.clone()))?
            } else {
                ProofTree::node(
                    target.clone(),
                    Rule::Split { lit: *lit },
                    vec![
                        open_node(with_not_l, goal.clone()),
                        open_node(with_l, goal.clone()),
                    ],
                )?
            }
        }
        DpllStep::UnitPropagate { clause, lit } => {
            let full = goal.clauses()[*clause].clone();
            let rest = full
                .without_first(*lit)
                .expect("validated unit clause contains its literal");
            let mut with_l = ctx.clone();
            with_l.insert(*lit);
            let mut with_not_l = ctx.clone();
            with_not_l.insert(lit.negated());
            if theory.tc_unsat(&with_not_l) {
                // The propagated literal is already forced.
                shift_to(ctx.clone(), open_node(with_l, goal.clone()))?
            } else if theory.tc_unsat(&with_l) {
                // The whole clause is refuted: close the leaf outright.
                build_falsified_clause_proof(&ctx, &full, goal, theory)?
            } else {
                build_unit_propagation_tree(&ctx, goal, &rest, *lit)?
            }
        }
        DpllStep::TheoryPropagate { lit } => {
            let mut with_l = ctx.clone();
            with_l.insert(*lit);
            shift_to(ctx.clone(), open_node(with_l, goal.clone()))?
        }
        _ => {
            return Err(SimError::Proof(ProofError::Internal(format!(
                "advanced step {step} routed to the basic extension"
            ))))
        }
    };

    let delta = replacement.counted_size();
    if delta > bound {
        return Err(SimError::BoundExceeded { delta, bound });
    }
    let (next, hits) = tree.replace_open_leaves(&target, &replacement);
    let deltas = (0..hits)
        .map(|_| LeafDelta {
            context: ctx.clone(),
            delta,
            bound,
        })
        .collect();
    Ok((next, deltas))
}

/// The generic unit-propagation gadget: resolve away the falsified remainder,
/// assert the unit, then unresolve the remainder back so the open leaf keeps
/// the original goal. Counted size `rest.size() + 1`.
fn build_unit_propagation_tree(
    ctx: &BTreeSet<Literal>,
    goal: &ClauseSet,
    rest: &Clause,
    lit: Literal,
) -> Result<ProofTree, ProofError> {
    let full = rest.with_literal(lit);
    let mut asserted = ctx.clone();
    asserted.insert(lit);

    // Innermost: open leaf with the original goal at the extended context.
    let mut inner = open_node(asserted.clone(), goal.clone());

    // Unresolve chain: from the wide clause down toward the unit, so that
    // read downward the conclusions narrow and the topmost premise is the
    // open leaf. Iterating forward builds conclusions (suffix ∨ lit).
    let lits = rest.literals();
    for i in 0..lits.len() {
        let narrowed = Clause::new(lits[i + 1..].to_vec()).with_literal(lit);
        let mut g = goal
            .without_first(&full)
            .expect("goal contains the propagating clause");
        g.insert(narrowed.clone());
        inner = ProofTree::node(
            Sequent::new(asserted.clone(), g),
            Rule::Unresolve {
                lit: lits[i],
                rest: narrowed,
            },
            vec![inner],
        )?;
    }
    // At this point `inner` concludes (ctx ∪ {lit} ⊢ goal with the clause
    // narrowed to the unit).
    let mut unit_goal = goal
        .without_first(&full)
        .expect("goal contains the propagating clause");
    unit_goal.insert(Clause::unit(lit));
    let assert_node = ProofTree::node(
        Sequent::new(ctx.clone(), unit_goal),
        Rule::Assert { lit },
        vec![inner],
    )?;

    // Resolve chain: strip the remainder literals from the full clause.
    let mut tree = assert_node;
    for i in (0..lits.len()).rev() {
        let suffix_rest = Clause::new(lits[i + 1..].to_vec()).with_literal(lit);
        let mut g = goal
            .without_first(&full)
            .expect("goal contains the propagating clause");
        g.insert(suffix_rest.with_literal(lits[i]));
        tree = ProofTree::node(
            Sequent::new(ctx.clone(), g),
            Rule::Resolve {
                lit: lits[i],
                rest: suffix_rest,
            },
            vec![tree],
        )?;
    }
    Ok(tree)
}

/// Builds a complete proof of `∅ ⊢ goal` by running the basic solver on the
/// goal and certifying the run. Used to close the uncounted branches of cuts.
pub fn discharge_lemma(
    goal: ClauseSet,
    theory: &TheorySolver,
    config: SimConfig,
    depth: usize,
) -> Result<ProofTree, SimError> {
    if depth >= config.max_discharge_depth {
        return Err(SimError::DischargeTooDeep);
    }
    let engine = Engine::new(theory).with_step_limit(config.step_limit);
    let outcome = engine.run(goal.clone(), None)?;
    match outcome.verdict {
        Verdict::Sat => return Err(SimError::DischargeNotRefutable),
        Verdict::StepLimit => return Err(SimError::DischargeBudget),
        Verdict::Unsat => {}
    }
    let mut session = SimSession::with_depth(goal, theory, config, depth + 1);
    for step in &outcome.trace {
        session.step(step)?;
    }
    debug_assert!(session.tree.is_complete());
    Ok(session.tree)
}

/// Extends the proof for one advanced step, replacing every open leaf the
/// step touches (the parallel extension).
pub fn extend_advanced(
    tree: &ProofTree,
    trail: &Trail,
    goal: &ClauseSet,
    step: &DpllStep,
    theory: &TheorySolver,
    config: SimConfig,
    depth: usize,
) -> Result<(ProofTree, Vec<LeafDelta>), SimError> {
    let bound = goal.size() + 3;
    let engine = Engine::new(theory).with_step_limit(config.step_limit);

    // Which leaf labels get replaced, and what each becomes.
    let replacements: Vec<(Sequent, ProofTree)> = match step {
        DpllStep::TLearn { clause } => {
            if clause.is_empty() {
                return Err(SimError::LearnedEmptyClause);
            }
            let cut_lits: Vec<Literal> = clause.negated_literals();
            let mut side_goal = goal.clone();
            for l in &cut_lits {
                side_goal.insert(Clause::unit(*l));
            }
            let discharge = discharge_lemma(side_goal, theory, config, depth)?;
            trail
                .backpoint_sets()
                .into_iter()
                .map(|ctx| {
                    let label = Sequent::new(ctx.clone(), goal.clone());
                    let left = shift_to(ctx.clone(), discharge.clone())?;
                    let right = open_node(ctx.clone(), goal.with(clause.clone()));
                    let node = ProofTree::node(
                        label.clone(),
                        Rule::Cut {
                            lits: cut_lits.clone(),
                        },
                        vec![left, right],
                    )?;
                    Ok((label, node))
                })
                .collect::<Result<_, SimError>>()?
        }
        DpllStep::TForget { clause } => {
            let dropped = goal.clauses()[*clause].clone();
            let shrunk = goal
                .without_first(&dropped)
                .expect("validated forget position");
            trail
                .backpoint_sets()
                .into_iter()
                .map(|ctx| {
                    let label = Sequent::new(ctx.clone(), goal.clone());
                    let node = ProofTree::node(
                        label.clone(),
                        Rule::Weaken {
                            clause: dropped.clone(),
                        },
                        vec![open_node(ctx.clone(), shrunk.clone())],
                    )?;
                    Ok((label, node))
                })
                .collect::<Result<_, SimError>>()?
        }
        DpllStep::Restart => trail
            .backpoint_sets()
            .into_iter()
            .map(|ctx| {
                let label = Sequent::new(ctx.clone(), goal.clone());
                let node = shift_to(ctx.clone(), open_node(BTreeSet::new(), goal.clone()))?;
                Ok((label, node))
            })
            .collect::<Result<_, SimError>>()?,
        DpllStep::TBackjump { conflict, aux, lit } => {
            let position = engine
                .backjump_position(trail, aux, *lit)
                .ok_or_else(|| {
                    StepError::BackjumpRejected(
                        "no usable decision prefix during proof extension".to_string(),
                    )
                })?;
            let prefix = Trail::from_entries(trail.entries()[..position].to_vec());
            let prefix_ctx = prefix.literal_set();

            // Leaves to rewrite: backpoints of the full trail that are not
            // backpoints the prefix keeps for itself.
            let keep: BTreeSet<BTreeSet<Literal>> = prefix
                .backstrict()
                .into_iter()
                .map(|seq| seq.into_iter().collect())
                .collect();
            let touched: Vec<BTreeSet<Literal>> = trail
                .backpoint_sets()
                .into_iter()
                .filter(|c| !keep.contains(c))
                .collect();

            let core = backjump_core(
                &prefix_ctx,
                goal,
                goal.clauses()[*conflict].clone(),
                aux,
                *lit,
                theory,
                config,
                depth,
            )?;
            touched
                .into_iter()
                .map(|ctx| {
                    let label = Sequent::new(ctx.clone(), goal.clone());
                    let node = if ctx == prefix_ctx {
                        core.clone()
                    } else {
                        shift_to(ctx.clone(), core.clone())?
                    };
                    Ok((label, node))
                })
                .collect::<Result<_, SimError>>()?
        }
        _ => {
            return Err(SimError::Proof(ProofError::Internal(format!(
                "basic step {step} routed to the advanced extension"
            ))))
        }
    };

    let mut next = tree.clone();
    let mut deltas = Vec::new();
    for (label, replacement) in &replacements {
        let delta = replacement.counted_size();
        if delta > bound {
            return Err(SimError::BoundExceeded { delta, bound });
        }
        let (rebuilt, hits) = next.replace_open_leaves(label, replacement);
        next = rebuilt;
        for _ in 0..hits {
            deltas.push(LeafDelta {
                context: label.context.clone(),
                delta,
                bound,
            });
        }
    }
    Ok((next, deltas))
}

/// The cut gadget shared by every leaf a backjump touches: concludes
/// `prefix ⊢ goal`, cuts on the justification clause, discharges its left
/// branch, and reduces the right branch toward the backjump literal.
#[allow(clippy::too_many_arguments)]
fn backjump_core(
    prefix_ctx: &BTreeSet<Literal>,
    goal: &ClauseSet,
    _conflict: Clause,
    aux: &Clause,
    lit: Literal,
    theory: &TheorySolver,
    config: SimConfig,
    depth: usize,
) -> Result<ProofTree, SimError> {
    let jump_clause = aux.with_literal(lit);
    let cut_lits: Vec<Literal> = jump_clause.negated_literals();

    let mut side_goal = goal.clone();
    for l in &cut_lits {
        side_goal.insert(Clause::unit(*l));
    }
    let discharge = discharge_lemma(side_goal, theory, config, depth)?;
    let left = shift_to(prefix_ctx.clone(), discharge)?;

    // Right branch: prefix ⊢ goal, aux ∨ lit.
    let right_goal = goal.with(jump_clause.clone());
    let mut with_lit = prefix_ctx.clone();
    with_lit.insert(lit);
    let mut with_neg = prefix_ctx.clone();
    with_neg.insert(lit.negated());

    let right = if theory.tc_unsat(&with_neg) {
        // The prefix already forces the literal: the jump clause is
        // subsumed, and the new leaf is reached by a shift.
        let inner = shift_to(
            prefix_ctx.clone(),
            open_node(with_lit.clone(), goal.clone()),
        )?;
        ProofTree::node(
            Sequent::new(prefix_ctx.clone(), right_goal.clone()),
            Rule::Subsume {
                lit,
                rest: aux.clone(),
            },
            vec![inner],
        )?
    } else if theory.tc_unsat(&with_lit) {
        // The prefix refutes the literal too: every literal of the jump
        // clause is refuted, so the branch closes without a new leaf.
        build_falsified_clause_proof(prefix_ctx, &jump_clause, &right_goal, theory)?
    } else {
        // Generic: resolve away the auxiliary remainder, assert the
        // backjump literal, subsume its unit.
        let mut unit_goal = goal.clone();
        unit_goal.insert(Clause::unit(lit));
        let leaf = open_node(with_lit.clone(), goal.clone());
        let subsume = ProofTree::node(
            Sequent::new(with_lit.clone(), unit_goal.clone()),
            Rule::Subsume {
                lit,
                rest: Clause::empty(),
            },
            vec![leaf],
        )?;
        let assert = ProofTree::node(
            Sequent::new(prefix_ctx.clone(), unit_goal),
            Rule::Assert { lit },
            vec![subsume],
        )?;
        // Resolve chain stripping `aux` from aux ∨ lit.
        let lits = aux.literals();
        let mut tree = assert;
        for i in (0..lits.len()).rev() {
            let suffix_rest = Clause::new(lits[i + 1..].to_vec()).with_literal(lit);
            let mut g = goal.clone();
            g.insert(suffix_rest.with_literal(lits[i]));
            tree = ProofTree::node(
                Sequent::new(prefix_ctx.clone(), g),
                Rule::Resolve {
                    lit: lits[i],
                    rest: suffix_rest,
                },
                vec![tree],
            )?;
        }
        tree
    };

    Ok(ProofTree::node(
        Sequent::new(prefix_ctx.clone(), goal.clone()),
        Rule::Cut { lits: cut_lits },
        vec![left, right],
    )?)
}

/// A solver state and a partial proof advancing in lock step.
pub struct SimSession<'t> {
    theory: &'t TheorySolver,
    config: SimConfig,
    state: DpllState,
    tree: ProofTree,
    logs: Vec<StepLog>,
    depth: usize,
}

impl<'t> SimSession<'t> {
    pub fn new(goal: ClauseSet, theory: &'t TheorySolver, config: SimConfig) -> Self {
        SimSession::with_depth(goal, theory, config, 0)
    }

    fn with_depth(
        goal: ClauseSet,
        theory: &'t TheorySolver,
        config: SimConfig,
        depth: usize,
    ) -> Self {
        SimSession {
            theory,
            config,
            state: DpllState::initial(goal.clone()),
            tree: ProofTree::Open(Sequent::root(goal)),
            logs: Vec::new(),
            depth,
        }
    }

    pub fn state(&self) -> &DpllState {
        &self.state
    }

    pub fn tree(&self) -> &ProofTree {
        &self.tree
    }

    pub fn logs(&self) -> &[StepLog] {
        &self.logs
    }

    /// Applies one solver step and extends the proof to match, checking the
    /// growth bound and the correspondence invariant.
    pub fn step(&mut self, step: &DpllStep) -> Result<(), SimError> {
        let engine = Engine::new(self.theory).with_step_limit(self.config.step_limit);
        let (trail, goal) = match &self.state {
            DpllState::Running { trail, goal } => (trail.clone(), goal.clone()),
            DpllState::Unsat => return Err(SimError::Step(StepError::AlreadyUnsat)),
        };
        let next_state = engine.apply_step(&self.state, step)?;
        let (next_tree, leaf_deltas) = if step.is_basic() {
            extend_basic(&self.tree, &trail, &goal, step, self.theory)?
        } else {
            extend_advanced(
                &self.tree,
                &trail,
                &goal,
                step,
                self.theory,
                self.config,
                self.depth,
            )?
        };
        if !correspondence_holds(&next_state, &next_tree) {
            return Err(SimError::CorrespondenceBroken);
        }
        if next_state.is_unsat() && !next_tree.is_complete() {
            return Err(SimError::RefutationIncomplete);
        }
        self.logs.push(StepLog {
            step: step.clone(),
            basic: step.is_basic(),
            goal_size_before: goal.size(),
            leaf_deltas,
        });
        self.state = next_state;
        self.tree = next_tree;
        Ok(())
    }

    /// Drives the default strategy until the solver stops, simulating every
    /// step. Returns the final verdict.
    pub fn run_default(&mut self, seed: Option<u64>) -> Result<Verdict, SimError> {
        use rand::SeedableRng;
        let mut rng = seed.map(rand_chacha::ChaCha8Rng::seed_from_u64);
        let engine = Engine::new(self.theory).with_step_limit(self.config.step_limit);
        let mut taken: u64 = 0;
        loop {
            if self.state.is_unsat() {
                return Ok(Verdict::Unsat);
            }
            if taken >= self.config.step_limit {
                return Ok(Verdict::StepLimit);
            }
            match engine.next_step(&self.state, rng.as_mut()) {
                None => return Ok(Verdict::Sat),
                Some(step) => {
                    self.step(&step)?;
                    taken += 1;
                }
            }
        }
    }
}

/// A certified refutation: the complete proof and the per-step growth log.
pub struct CertifiedRun {
    pub tree: ProofTree,
    pub logs: Vec<StepLog>,
}

/// Replays a refuting trace and returns the complete proof it builds. The
/// trace must end in the unsat state.
pub fn certify_unsat(
    goal: ClauseSet,
    trace: &[DpllStep],
    theory: &TheorySolver,
    config: SimConfig,
) -> Result<CertifiedRun, SimError> {
    let mut session = SimSession::new(goal, theory, config);
    for step in trace {
        session.step(step)?;
    }
    if !session.state.is_unsat() {
        return Err(SimError::NotRefuted);
    }
    if !session.tree.is_complete() {
        return Err(SimError::RefutationIncomplete);
    }
    Ok(CertifiedRun {
        tree: session.tree,
        logs: session.logs,
    })
}
