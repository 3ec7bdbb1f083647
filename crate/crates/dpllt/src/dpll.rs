//! The DPLL(T) transition system: states, steps, validation, and a solver
//! loop built from a deterministic strategy.
//!
//! A state is either `trail ∥ goal` or the terminal `UNSAT`. Steps are data:
//! [`apply_step`](Engine::apply_step) validates every side condition before
//! rewriting the state, so a recorded trace can be replayed and audited
//! independently of the strategy that produced it.
//!
//! The step vocabulary splits in two. The basic steps (fail, decide,
//! backtrack, unit and theory propagation) advance an ordinary backtracking
//! search. The advanced steps (backjump, lemma learn/forget, restart) rewrite
//! the state in larger strokes, and their entailment side conditions are
//! checked by bounded recursive runs of the basic system itself.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cnf::{Clause, ClauseSet, Literal, Trail};
use crate::theory::TheorySolver;

/// One transition of the system. Clause references are positions into the
/// current goal's sorted clause list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DpllStep {
    /// Close the run: clause `conflict` is propositionally false under the
    /// trail and there is no decision left to undo.
    Fail { conflict: usize },
    /// Assume `lit`, marked as a decision.
    Decide { lit: Literal },
    /// Clause `conflict` is false under the trail; undo through the most
    /// recent decision and assert its negation.
    Backtrack { conflict: usize },
    /// Clause `clause` has every literal but `lit` false under the trail;
    /// assert `lit`.
    UnitPropagate { clause: usize, lit: Literal },
    /// The theory forces `lit` under the trail's assertions.
    TheoryPropagate { lit: Literal },
    /// Jump back over a decision: undo to a prefix `Δ1` of the trail and
    /// assert `lit` there, justified by clause `conflict` being false under
    /// the whole trail, `aux` being false under `Δ1`, and the goal entailing
    /// `aux ∨ lit`.
    TBackjump {
        conflict: usize,
        aux: Clause,
        lit: Literal,
    },
    /// Add a clause entailed by the goal.
    TLearn { clause: Clause },
    /// Drop the clause at `clause`, provided the rest of the goal entails it.
    TForget { clause: usize },
    /// Clear the trail.
    Restart,
}

impl DpllStep {
    /// Whether this step belongs to the basic system.
    pub fn is_basic(&self) -> bool {
        matches!(
            self,
            DpllStep::Fail { .. }
                | DpllStep::Decide { .. }
                | DpllStep::Backtrack { .. }
                | DpllStep::UnitPropagate { .. }
                | DpllStep::TheoryPropagate { .. }
        )
    }
}

impl fmt::Display for DpllStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DpllStep::Fail { conflict } => write!(f, "fail {conflict}"),
            DpllStep::Decide { lit } => write!(f, "decide {lit}"),
            DpllStep::Backtrack { conflict } => write!(f, "backtrack {conflict}"),
            DpllStep::UnitPropagate { clause, lit } => {
                write!(f, "unit {clause} {lit}")
            }
            DpllStep::TheoryPropagate { lit } => write!(f, "tpropagate {lit}"),
            DpllStep::TBackjump { conflict, aux, lit } => {
                write!(f, "backjump {conflict} {lit} ")?;
                for l in aux.iter() {
                    write!(f, "{l} ")?;
                }
                write!(f, "0")
            }
            DpllStep::TLearn { clause } => {
                write!(f, "learn ")?;
                for l in clause.iter() {
                    write!(f, "{l} ")?;
                }
                write!(f, "0")
            }
            DpllStep::TForget { clause } => write!(f, "forget {clause}"),
            DpllStep::Restart => write!(f, "restart"),
        }
    }
}

/// A solver state: live search position or the terminal refutation state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DpllState {
    Running { trail: Trail, goal: ClauseSet },
    Unsat,
}

impl DpllState {
    pub fn initial(goal: ClauseSet) -> Self {
        DpllState::Running {
            trail: Trail::new(),
            goal,
        }
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, DpllState::Unsat)
    }

    pub fn running(&self) -> Option<(&Trail, &ClauseSet)> {
        match self {
            DpllState::Running { trail, goal } => Some((trail, goal)),
            DpllState::Unsat => None,
        }
    }
}

/// Why a step was rejected.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("state is already unsat; no step applies")]
    AlreadyUnsat,
    #[error("no clause at position {0}")]
    NoSuchClause(usize),
    #[error("clause at position {0} is not false under the trail")]
    NotFalsified(usize),
    #[error("fail requires a trail without decisions")]
    TrailHasDecisions,
    #[error("backtrack requires at least one decision on the trail")]
    NoDecision,
    #[error("atom of {0} is already assigned on the trail")]
    AlreadyAssigned(Literal),
    #[error("atom of {0} does not occur in the goal")]
    AtomOutsideGoal(Literal),
    #[error("clause at position {clause} is not unit in {lit} under the trail")]
    NotUnit { clause: usize, lit: Literal },
    #[error("trail does not force {0} in the theory")]
    NotForced(Literal),
    #[error("backjump conditions not met: {0}")]
    BackjumpRejected(String),
    #[error("goal does not entail the clause {0:?} in the theory")]
    NotEntailed(Clause),
    #[error("learned clause {0:?} mentions atoms outside the goal and trail")]
    LearnOutOfScope(Clause),
    #[error("entailment validation exceeded the step limit")]
    ValidationBudget,
}

/// Final verdict of a solver run.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Sat,
    Unsat,
    StepLimit,
}

/// A finished (or interrupted) run: verdict, the steps taken, and the state
/// the run ended in.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub verdict: Verdict,
    pub trace: Vec<DpllStep>,
    pub final_state: DpllState,
    /// Satisfying assignment when the verdict is [`Verdict::Sat`].
    pub model: Option<BTreeSet<Literal>>,
}

/// Step validator and solver loop over a fixed theory.
pub struct Engine<'t> {
    theory: &'t TheorySolver,
    step_limit: u64,
}

impl<'t> Engine<'t> {
    pub fn new(theory: &'t TheorySolver) -> Self {
        Engine {
            theory,
            step_limit: 200_000,
        }
    }

    pub fn with_step_limit(mut self, limit: u64) -> Self {
        self.step_limit = limit;
        self
    }

    pub fn theory(&self) -> &'t TheorySolver {
        self.theory
    }

    /// Validates `step` against `state` and returns the successor state.
    pub fn apply_step(&self, state: &DpllState, step: &DpllStep) -> Result<DpllState, StepError> {
        let (trail, goal) = state.running().ok_or(StepError::AlreadyUnsat)?;
        let assigned = trail.literal_set();
        match step {
            DpllStep::Fail { conflict } => {
                let clause = clause_at(goal, *conflict)?;
                if !clause.falsified_by(&assigned) {
                    return Err(StepError::NotFalsified(*conflict));
                }
                if trail.decision_count() > 0 {
                    return Err(StepError::TrailHasDecisions);
                }
                Ok(DpllState::Unsat)
            }
            DpllStep::Decide { lit } => {
                self.check_unassigned(trail, *lit)?;
                if !goal.mentions_atom(lit.atom()) {
                    return Err(StepError::AtomOutsideGoal(*lit));
                }
                let mut next = trail.clone();
                next.push(*lit, true);
                Ok(DpllState::Running {
                    trail: next,
                    goal: goal.clone(),
                })
            }
            DpllStep::Backtrack { conflict } => {
                let clause = clause_at(goal, *conflict)?;
                if !clause.falsified_by(&assigned) {
                    return Err(StepError::NotFalsified(*conflict));
                }
                let positions = trail.decision_positions();
                let last = *positions.last().ok_or(StepError::NoDecision)?;
                let mut next = Trail::new();
                for e in &trail.entries()[..last] {
                    next.push(e.lit, e.decision);
                }
                next.push(trail.entries()[last].lit.negated(), false);
                Ok(DpllState::Running {
                    trail: next,
                    goal: goal.clone(),
                })
            }
            DpllStep::UnitPropagate { clause, lit } => {
                let c = clause_at(goal, *clause)?;
                self.check_unassigned(trail, *lit)?;
                let rest = c
                    .without_first(*lit)
                    .ok_or(StepError::NotUnit {
                        clause: *clause,
                        lit: *lit,
                    })?;
                if !rest.falsified_by(&assigned) {
                    return Err(StepError::NotUnit {
                        clause: *clause,
                        lit: *lit,
                    });
                }
                let mut next = trail.clone();
                next.push(*lit, false);
                Ok(DpllState::Running {
                    trail: next,
                    goal: goal.clone(),
                })
            }
            DpllStep::TheoryPropagate { lit } => {
                self.check_unassigned(trail, *lit)?;
                if !goal.mentions_atom(lit.atom()) {
                    return Err(StepError::AtomOutsideGoal(*lit));
                }
                if !self.theory.entails(&assigned, *lit) {
                    return Err(StepError::NotForced(*lit));
                }
                let mut next = trail.clone();
                next.push(*lit, false);
                Ok(DpllState::Running {
                    trail: next,
                    goal: goal.clone(),
                })
            }
            DpllStep::TBackjump { conflict, aux, lit } => {
                self.apply_backjump(trail, goal, *conflict, aux, *lit)
            }
            DpllStep::TLearn { clause } => {
                for l in clause.iter() {
                    if !goal.mentions_atom(l.atom()) && !trail.defines_atom(l.atom()) {
                        return Err(StepError::LearnOutOfScope(clause.clone()));
                    }
                }
                if !self.entailed_by(goal, clause)? {
                    return Err(StepError::NotEntailed(clause.clone()));
                }
                Ok(DpllState::Running {
                    trail: trail.clone(),
                    goal: goal.with(clause.clone()),
                })
            }
            DpllStep::TForget { clause } => {
                let c = clause_at(goal, *clause)?.clone();
                let rest = goal
                    .without_first(&c)
                    .expect("position was just resolved");
                if !self.entailed_by(&rest, &c)? {
                    return Err(StepError::NotEntailed(c));
                }
                Ok(DpllState::Running {
                    trail: trail.clone(),
                    goal: rest,
                })
            }
            DpllStep::Restart => Ok(DpllState::Running {
                trail: Trail::new(),
                goal: goal.clone(),
            }),
        }
    }

    fn check_unassigned(&self, trail: &Trail, lit: Literal) -> Result<(), StepError> {
        if trail.defines_atom(lit.atom()) {
            Err(StepError::AlreadyAssigned(lit))
        } else {
            Ok(())
        }
    }

    fn apply_backjump(
        &self,
        trail: &Trail,
        goal: &ClauseSet,
        conflict: usize,
        aux: &Clause,
        lit: Literal,
    ) -> Result<DpllState, StepError> {
        let conflict_clause = clause_at(goal, conflict)?;
        let assigned = trail.literal_set();
        if !conflict_clause.falsified_by(&assigned) {
            return Err(StepError::NotFalsified(conflict));
        }
        for l in aux.iter() {
            if !goal.mentions_atom(l.atom()) {
                return Err(StepError::BackjumpRejected(format!(
                    "auxiliary clause mentions {l}, which is outside the goal"
                )));
            }
        }
        if !goal.mentions_atom(lit.atom()) && !trail.defines_atom(lit.atom()) {
            return Err(StepError::BackjumpRejected(format!(
                "backjump literal {lit} is outside the goal and trail"
            )));
        }
        // The split point: the earliest decision whose strict prefix already
        // falsifies the auxiliary clause and leaves the backjump literal
        // unassigned.
        let position = self
            .backjump_position(trail, aux, lit)
            .ok_or_else(|| {
                StepError::BackjumpRejected(
                    "no decision prefix falsifies the auxiliary clause with the literal unassigned"
                        .to_string(),
                )
            })?;
        if !self.entailed_by(goal, &aux.with_literal(lit))? {
            return Err(StepError::NotEntailed(aux.with_literal(lit)));
        }
        let mut next = Trail::new();
        for e in &trail.entries()[..position] {
            next.push(e.lit, e.decision);
        }
        next.push(lit, false);
        Ok(DpllState::Running {
            trail: next,
            goal: goal.clone(),
        })
    }

    /// The earliest decision position usable as the backjump split, if any.
    pub fn backjump_position(&self, trail: &Trail, aux: &Clause, lit: Literal) -> Option<usize> {
        trail.decision_positions().into_iter().find(|&p| {
            let prefix: BTreeSet<Literal> =
                trail.entries()[..p].iter().map(|e| e.lit).collect();
            aux.falsified_by(&prefix)
                && !prefix.contains(&lit)
                && !prefix.contains(&lit.negated())
        })
    }

    /// Does `goal` entail `clause` in the theory? Decided by refuting
    /// `goal` plus the negated clause literals with a basic-system run.
    pub fn entailed_by(&self, goal: &ClauseSet, clause: &Clause) -> Result<bool, StepError> {
        let mut query = goal.clone();
        for l in clause.negated_literals() {
            query.insert(Clause::unit(l));
        }
        let sub = Engine::new(self.theory).with_step_limit(self.step_limit);
        let outcome = sub.run(query, None)?;
        match outcome.verdict {
            Verdict::Unsat => Ok(true),
            Verdict::Sat => Ok(false),
            Verdict::StepLimit => Err(StepError::ValidationBudget),
        }
    }

    /// The next step under the default strategy, or `None` when no basic
    /// step applies (the state is final).
    ///
    /// Priority: fail, backtrack, theory propagation, unit propagation,
    /// decide. Ties break to the lowest clause position, then the smallest
    /// literal. Theory propagation running ahead of unit propagation keeps
    /// the trail theory-consistent for the whole run, so a stuck state is a
    /// genuine model.
    pub fn next_step(&self, state: &DpllState, rng: Option<&mut ChaCha8Rng>) -> Option<DpllStep> {
        let (trail, goal) = state.running()?;
        let assigned = trail.literal_set();

        if let Some(conflict) = goal
            .clauses()
            .iter()
            .position(|c| c.falsified_by(&assigned))
        {
            return Some(if trail.decision_count() == 0 {
                DpllStep::Fail { conflict }
            } else {
                DpllStep::Backtrack { conflict }
            });
        }

        for atom in goal.atoms() {
            if trail.defines_atom(atom) {
                continue;
            }
            for lit in [Literal::positive(atom), Literal::negative(atom)] {
                if self.theory.entails(&assigned, lit) {
                    return Some(DpllStep::TheoryPropagate { lit });
                }
            }
        }

        for (at, clause) in goal.clauses().iter().enumerate() {
            if clause.satisfied_by(&assigned) {
                continue;
            }
            let mut open = clause
                .iter()
                .filter(|l| !trail.defines_atom(l.atom()));
            if let (Some(lit), None) = (open.next(), open.next()) {
                // All other literals are unsatisfied and the clause is not
                // satisfied, so they are all false: a unit.
                return Some(DpllStep::UnitPropagate { clause: at, lit });
            }
        }

        for atom in goal.atoms() {
            if !trail.defines_atom(atom) {
                let positive = match rng {
                    Some(r) => r.gen_bool(0.5),
                    None => true,
                };
                return Some(DpllStep::Decide {
                    lit: Literal::new(atom, positive),
                });
            }
        }

        None
    }

    /// Runs the default strategy to completion (or to the step limit).
    /// `seed` randomizes decision phases; `None` decides positively.
    pub fn run(&self, goal: ClauseSet, seed: Option<u64>) -> Result<RunOutcome, StepError> {
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let mut state = DpllState::initial(goal);
        let mut trace = Vec::new();
        loop {
            if trace.len() as u64 >= self.step_limit {
                return Ok(RunOutcome {
                    verdict: Verdict::StepLimit,
                    trace,
                    final_state: state,
                    model: None,
                });
            }
            match self.next_step(&state, rng.as_mut()) {
                None => {
                    let model = state
                        .running()
                        .map(|(trail, _)| trail.literal_set());
                    let verdict = if state.is_unsat() {
                        Verdict::Unsat
                    } else {
                        Verdict::Sat
                    };
                    return Ok(RunOutcome {
                        verdict,
                        trace,
                        final_state: state,
                        model,
                    });
                }
                Some(step) => {
                    state = self.apply_step(&state, &step)?;
                    trace.push(step);
                    if state.is_unsat() {
                        return Ok(RunOutcome {
                            verdict: Verdict::Unsat,
                            trace,
                            final_state: state,
                            model: None,
                        });
                    }
                }
            }
        }
    }

    /// Replays a recorded trace, validating every step.
    pub fn replay(&self, goal: ClauseSet, trace: &[DpllStep]) -> Result<DpllState, StepError> {
        let mut state = DpllState::initial(goal);
        for step in trace {
            state = self.apply_step(&state, step)?;
        }
        Ok(state)
    }
}

fn clause_at(goal: &ClauseSet, at: usize) -> Result<&Clause, StepError> {
    goal.clauses().get(at).ok_or(StepError::NoSuchClause(at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{AtomTable, TheoryKind};

    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn clause(codes: &[i32]) -> Clause {
        Clause::from_dimacs(codes).unwrap()
    }

    fn goal(clauses: &[&[i32]]) -> ClauseSet {
        ClauseSet::new(clauses.iter().map(|c| clause(c)).collect())
    }

    #[test]
    fn unit_propagation_then_fail_refutes_complementary_units() {
        let th = TheorySolver::empty(1);
        let engine = Engine::new(&th);
        let outcome = engine.run(goal(&[&[1], &[-1]]), None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        assert!(outcome.final_state.is_unsat());
        // Propagate the sorted-first unit, then fail on the other.
        assert_eq!(outcome.trace.len(), 2);
        assert!(matches!(outcome.trace[0], DpllStep::UnitPropagate { .. }));
        assert!(matches!(outcome.trace[1], DpllStep::Fail { .. }));
    }

    #[test]
    fn satisfiable_goal_yields_a_model() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        let outcome = engine.run(goal(&[&[1, 2]]), None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Sat);
        let model = outcome.model.unwrap();
        assert!(clause(&[1, 2]).satisfied_by(&model));
    }

    #[test]
    fn full_square_requires_backtracking() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        let outcome = engine
            .run(goal(&[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]), None)
            .unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        assert!(outcome
            .trace
            .iter()
            .any(|s| matches!(s, DpllStep::Backtrack { .. })));
        assert!(outcome
            .trace
            .iter()
            .any(|s| matches!(s, DpllStep::Decide { .. })));
    }

    fn equality_chain() -> (TheorySolver, ClauseSet) {
        // 1: x=y, 2: y=z, 3: x=z as a disequality atom
        let mut t = AtomTable::propositional(3);
        t.declare_eq(1, "x", "y");
        t.declare_eq(2, "y", "z");
        t.declare_neq(3, "x", "z");
        let th = TheorySolver::new(TheoryKind::Equality, t);
        let g = goal(&[&[1], &[2], &[3]]);
        (th, g)
    }

    #[test]
    fn theory_propagation_surfaces_equality_conflicts() {
        let (th, g) = equality_chain();
        let engine = Engine::new(&th);
        let outcome = engine.run(g, None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        assert!(
            outcome
                .trace
                .iter()
                .any(|s| matches!(s, DpllStep::TheoryPropagate { .. })),
            "expected a theory propagation in {:?}",
            outcome.trace
        );
        // The run closes without ever learning a lemma: the conflict becomes
        // propositional once the entailed literal lands on the trail.
        assert!(outcome.trace.iter().all(DpllStep::is_basic));
    }

    #[test]
    fn default_runs_keep_the_trail_theory_consistent() {
        let (th, g) = equality_chain();
        let engine = Engine::new(&th);
        let mut state = DpllState::initial(g);
        while let Some(step) = engine.next_step(&state, None) {
            state = engine.apply_step(&state, &step).unwrap();
            if let Some((trail, _)) = state.running() {
                assert!(th.consistent(&trail.literal_set()), "trail went inconsistent");
            } else {
                break;
            }
        }
    }

    #[test]
    fn replay_validates_and_reproduces_the_final_state() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        let g = goal(&[&[1, 2], &[1, -2], &[-1, 2], &[-1, -2]]);
        let outcome = engine.run(g.clone(), None).unwrap();
        let replayed = engine.replay(g.clone(), &outcome.trace).unwrap();
        assert_eq!(replayed, outcome.final_state);

        // Tampering with the trace breaks validation.
        let mut bad = outcome.trace.clone();
        bad[0] = DpllStep::Fail { conflict: 0 };
        assert!(engine.replay(g, &bad).is_err());
    }

    #[test]
    fn fail_requires_a_decision_free_trail() {
        let th = TheorySolver::empty(1);
        let engine = Engine::new(&th);
        let state = engine
            .apply_step(
                &DpllState::initial(goal(&[&[1], &[-1]])),
                &DpllStep::Decide { lit: lit(1) },
            )
            .unwrap();
        // Clause (-1) is now false, but a decision is on the trail.
        let err = engine
            .apply_step(&state, &DpllStep::Fail { conflict: 0 })
            .unwrap_err();
        assert_eq!(err, StepError::TrailHasDecisions);
        assert!(engine
            .apply_step(&state, &DpllStep::Backtrack { conflict: 0 })
            .is_ok());
    }

    #[test]
    fn decide_rejects_assigned_and_foreign_atoms() {
        let th = TheorySolver::empty(3);
        let engine = Engine::new(&th);
        let g = goal(&[&[1, 2]]);
        let state = DpllState::initial(g);
        let state = engine
            .apply_step(&state, &DpllStep::Decide { lit: lit(1) })
            .unwrap();
        assert_eq!(
            engine
                .apply_step(&state, &DpllStep::Decide { lit: lit(-1) })
                .unwrap_err(),
            StepError::AlreadyAssigned(lit(-1))
        );
        assert_eq!(
            engine
                .apply_step(&state, &DpllStep::Decide { lit: lit(3) })
                .unwrap_err(),
            StepError::AtomOutsideGoal(lit(3))
        );
    }

    #[test]
    fn backjump_rewinds_to_the_earliest_usable_decision() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        let g = goal(&[&[-1, -2]]);
        let mut state = DpllState::initial(g);
        for l in [lit(1), lit(2)] {
            state = engine
                .apply_step(&state, &DpllStep::Decide { lit: l })
                .unwrap();
        }
        let step = DpllStep::TBackjump {
            conflict: 0,
            aux: clause(&[-1]),
            lit: lit(-2),
        };
        let next = engine.apply_step(&state, &step).unwrap();
        let (trail, _) = next.running().unwrap();
        assert_eq!(trail.forget(), vec![lit(1), lit(-2)]);
        assert_eq!(trail.decision_count(), 1);
    }

    #[test]
    fn backjump_rejects_unentailed_justifications() {
        let th = TheorySolver::empty(3);
        let engine = Engine::new(&th);
        // Conflict clause only rules out 1 & 2 together; it does not entail
        // the stronger jump (-1 v -3).
        let g = goal(&[&[-1, -2], &[3, 2]]);
        let mut state = DpllState::initial(g);
        for l in [lit(1), lit(2)] {
            state = engine
                .apply_step(&state, &DpllStep::Decide { lit: l })
                .unwrap();
        }
        let step = DpllStep::TBackjump {
            conflict: 0,
            aux: clause(&[-1]),
            lit: lit(-3),
        };
        assert!(matches!(
            engine.apply_step(&state, &step),
            Err(StepError::NotEntailed(_))
        ));
    }

    #[test]
    fn learn_checks_scope_and_entailment() {
        let th = TheorySolver::empty(3);
        let engine = Engine::new(&th);
        let g = goal(&[&[1], &[-1, 2]]);
        let state = DpllState::initial(g);
        // (2) follows from the goal.
        let next = engine
            .apply_step(
                &state,
                &DpllStep::TLearn {
                    clause: clause(&[2]),
                },
            )
            .unwrap();
        let (_, learned_goal) = next.running().unwrap();
        assert!(learned_goal.contains(&clause(&[2])));
        // (-2) does not.
        assert!(matches!(
            engine.apply_step(
                &state,
                &DpllStep::TLearn {
                    clause: clause(&[-2])
                }
            ),
            Err(StepError::NotEntailed(_))
        ));
        // Atom 3 is out of scope.
        assert!(matches!(
            engine.apply_step(
                &state,
                &DpllStep::TLearn {
                    clause: clause(&[3])
                }
            ),
            Err(StepError::LearnOutOfScope(_))
        ));
    }

    #[test]
    fn forget_only_drops_redundant_clauses() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        // Goal sorted: (1) (1 2). The wider clause is entailed by the unit.
        let g = goal(&[&[1], &[1, 2]]);
        let state = DpllState::initial(g);
        let next = engine
            .apply_step(&state, &DpllStep::TForget { clause: 1 })
            .unwrap();
        let (_, kept) = next.running().unwrap();
        assert_eq!(kept.len(), 1);
        // Dropping the unit instead is rejected: (1 2) does not entail (1).
        assert!(matches!(
            engine.apply_step(&state, &DpllStep::TForget { clause: 0 }),
            Err(StepError::NotEntailed(_))
        ));
    }

    #[test]
    fn restart_clears_the_trail_only() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th);
        let g = goal(&[&[1, 2]]);
        let mut state = DpllState::initial(g.clone());
        state = engine
            .apply_step(&state, &DpllStep::Decide { lit: lit(1) })
            .unwrap();
        let next = engine.apply_step(&state, &DpllStep::Restart).unwrap();
        let (trail, kept) = next.running().unwrap();
        assert!(trail.is_empty());
        assert_eq!(kept, &g);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let th = TheorySolver::empty(4);
        let engine = Engine::new(&th);
        let g = goal(&[&[1, 2], &[-2, 3], &[-3, 4], &[-1, -4], &[2, 4]]);
        let a = engine.run(g.clone(), Some(7)).unwrap();
        let b = engine.run(g.clone(), Some(7)).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.verdict, b.verdict);
        // And the verdict agrees with the unseeded strategy.
        let c = engine.run(g, None).unwrap();
        assert_eq!(a.verdict, c.verdict);
    }

    #[test]
    fn empty_clause_in_goal_fails_immediately() {
        let th = TheorySolver::empty(1);
        let engine = Engine::new(&th);
        let g = ClauseSet::new(vec![Clause::empty(), clause(&[1])]);
        let outcome = engine.run(g, None).unwrap();
        assert_eq!(outcome.verdict, Verdict::Unsat);
        assert_eq!(outcome.trace, vec![DpllStep::Fail { conflict: 0 }]);
    }

    #[test]
    fn step_limit_interrupts_without_a_verdict() {
        let th = TheorySolver::empty(2);
        let engine = Engine::new(&th).with_step_limit(1);
        let outcome = engine
            .run(goal(&[&[1, 2], &[-1, 2], &[1, -2], &[-1, -2]]), None)
            .unwrap();
        assert_eq!(outcome.verdict, Verdict::StepLimit);
        assert_eq!(outcome.trace.len(), 1);
    }
}
