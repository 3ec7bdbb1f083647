//! A polarized, focused sequent calculus with theory-closed leaves.
//!
//! Formulae carry explicit polarity on their connectives. A run-time set of
//! *positive* literals steers focusing: positive formulae are decomposed
//! under focus in one maximal phase, negative formulae are decomposed
//! eagerly outside focus, and literals close branches either against the
//! context or by a theory call.
//!
//! Proofs are checked the same way as in [`crate::lkdpll`]: a conclusion
//! plus a rule determines the premises ([`premises`]), and the theory-backed
//! side conditions are a separate pass ([`side_conditions`]).

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::cnf::{AtomId, Literal};
use crate::theory::TheorySolver;

/// Polarized propositional formulae. The building blocks are literals; each
/// binary connective is marked positive or negative.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum LktFormula {
    Lit(Literal),
    AndPlus(Box<LktFormula>, Box<LktFormula>),
    OrPlus(Box<LktFormula>, Box<LktFormula>),
    AndMinus(Box<LktFormula>, Box<LktFormula>),
    OrMinus(Box<LktFormula>, Box<LktFormula>),
}

impl LktFormula {
    pub fn lit(l: Literal) -> Self {
        LktFormula::Lit(l)
    }

    /// Involutive negation: literals flip, connectives dualize.
    pub fn negated(&self) -> LktFormula {
        match self {
            LktFormula::Lit(l) => LktFormula::Lit(l.negated()),
            LktFormula::AndPlus(a, b) => {
                LktFormula::OrMinus(Box::new(a.negated()), Box::new(b.negated()))
            }
            LktFormula::OrPlus(a, b) => {
                LktFormula::AndMinus(Box::new(a.negated()), Box::new(b.negated()))
            }
            LktFormula::AndMinus(a, b) => {
                LktFormula::OrPlus(Box::new(a.negated()), Box::new(b.negated()))
            }
            LktFormula::OrMinus(a, b) => {
                LktFormula::AndPlus(Box::new(a.negated()), Box::new(b.negated()))
            }
        }
    }

    /// Atoms occurring anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        match self {
            LktFormula::Lit(l) => [l.atom()].into_iter().collect(),
            LktFormula::AndPlus(a, b)
            | LktFormula::OrPlus(a, b)
            | LktFormula::AndMinus(a, b)
            | LktFormula::OrMinus(a, b) => {
                let mut s = a.atoms();
                s.extend(b.atoms());
                s
            }
        }
    }

    /// Number of literal leaves.
    pub fn size(&self) -> usize {
        match self {
            LktFormula::Lit(_) => 1,
            LktFormula::AndPlus(a, b)
            | LktFormula::OrPlus(a, b)
            | LktFormula::AndMinus(a, b)
            | LktFormula::OrMinus(a, b) => a.size() + b.size(),
        }
    }

    /// If the formula is a tree of negative disjunctions over literals,
    /// returns the literal leaves in left-to-right order.
    pub fn or_minus_leaves(&self) -> Option<Vec<Literal>> {
        match self {
            LktFormula::Lit(l) => Some(vec![*l]),
            LktFormula::OrMinus(a, b) => {
                let mut left = a.or_minus_leaves()?;
                left.extend(b.or_minus_leaves()?);
                Some(left)
            }
            _ => None,
        }
    }
}

impl fmt::Display for LktFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LktFormula::Lit(l) => write!(f, "l {}", l.to_dimacs()),
            LktFormula::AndPlus(a, b) => write!(f, "(and+ {a} {b})"),
            LktFormula::OrPlus(a, b) => write!(f, "(or+ {a} {b})"),
            LktFormula::AndMinus(a, b) => write!(f, "(and- {a} {b})"),
            LktFormula::OrMinus(a, b) => write!(f, "(or- {a} {b})"),
        }
    }
}

/// Builds a right-nested tree of negative disjunctions over the literals.
/// Panics on an empty slice; clause encodings are never empty.
pub fn or_minus_spine(lits: &[Literal]) -> LktFormula {
    assert!(!lits.is_empty(), "cannot build an empty disjunction");
    let mut it = lits.iter().rev();
    let mut acc = LktFormula::Lit(*it.next().unwrap());
    for l in it {
        acc = LktFormula::OrMinus(Box::new(LktFormula::Lit(*l)), Box::new(acc));
    }
    acc
}

/// The set of literals declared positive. Inserting a literal whose negation
/// is already present is refused: polarity assignments must stay involutive.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Default)]
pub struct PolaritySet {
    set: BTreeSet<Literal>,
}

impl PolaritySet {
    pub fn new() -> Self {
        PolaritySet::default()
    }

    pub fn insert(&mut self, lit: Literal) -> Result<(), LktError> {
        if self.set.contains(&lit.negated()) {
            return Err(LktError::PolarityClash { lit });
        }
        self.set.insert(lit);
        Ok(())
    }

    pub fn with(&self, lit: Literal) -> Result<PolaritySet, LktError> {
        let mut next = self.clone();
        next.insert(lit)?;
        Ok(next)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.set.contains(&lit)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Literal> {
        self.set.iter()
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Polarity of a formula under a given positive-literal set. Literals with
/// no declared polarity are neither.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Polarity {
    Positive,
    Negative,
    Unpolarized,
}

pub fn classify(formula: &LktFormula, pols: &PolaritySet) -> Polarity {
    match formula {
        LktFormula::Lit(l) => {
            if pols.contains(*l) {
                Polarity::Positive
            } else if pols.contains(l.negated()) {
                Polarity::Negative
            } else {
                Polarity::Unpolarized
            }
        }
        LktFormula::AndPlus(..) | LktFormula::OrPlus(..) => Polarity::Positive,
        LktFormula::AndMinus(..) | LktFormula::OrMinus(..) => Polarity::Negative,
    }
}

/// A sequent: persistent context `gamma`, optional focused formula, a
/// decomposition zone worked head-first, a pending zone of literals waiting
/// for a polarity, and the positive-literal set.
///
/// A focused sequent has `focus = Some(..)` and empty zones; an unfocused
/// sequent has `focus = None`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct LktSequent {
    pub gamma: BTreeSet<LktFormula>,
    pub focus: Option<LktFormula>,
    pub zone: Vec<LktFormula>,
    pub pending: Vec<Literal>,
    pub pols: PolaritySet,
}

impl LktSequent {
    pub fn unfocused(
        gamma: BTreeSet<LktFormula>,
        zone: Vec<LktFormula>,
        pending: Vec<Literal>,
        pols: PolaritySet,
    ) -> Self {
        LktSequent {
            gamma,
            focus: None,
            zone,
            pending,
            pols,
        }
    }

    pub fn focused(
        gamma: BTreeSet<LktFormula>,
        focus: LktFormula,
        pols: PolaritySet,
    ) -> Self {
        LktSequent {
            gamma,
            focus: Some(focus),
            zone: Vec::new(),
            pending: Vec::new(),
            pols,
        }
    }

    /// Context plus one stored formula.
    fn store(&self, formula: LktFormula) -> BTreeSet<LktFormula> {
        let mut g = self.gamma.clone();
        g.insert(formula);
        g
    }

    /// The literal members of the context, as fed to the theory.
    pub fn gamma_literals(&self) -> BTreeSet<Literal> {
        self.gamma
            .iter()
            .filter_map(|f| match f {
                LktFormula::Lit(l) => Some(*l),
                _ => None,
            })
            .collect()
    }

    /// Atoms occurring anywhere in the context.
    pub fn gamma_atoms(&self) -> BTreeSet<AtomId> {
        let mut s = BTreeSet::new();
        for f in &self.gamma {
            s.extend(f.atoms());
        }
        s
    }

    /// Number of formula members of the context.
    pub fn member_count(&self) -> usize {
        self.gamma.len()
    }
}

impl fmt::Display for LktSequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, g) in self.gamma.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g}")?;
        }
        match &self.focus {
            Some(p) => write!(f, " |- [{p}]"),
            None => {
                write!(f, " |- ")?;
                for (i, a) in self.zone.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                if !self.pending.is_empty() {
                    write!(f, " ; ")?;
                    for (i, l) in self.pending.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{l}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Rule instances. As in the clausal calculus, the conclusion plus the rule
/// name determines the premises.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LktRule {
    /// Focus on a positive conjunction: prove both conjuncts in focus.
    AndPlusFocus,
    /// Focus on a positive disjunction: pick one disjunct.
    OrPlusFocus { right: bool },
    /// Focused positive literal present in the context.
    Init,
    /// Focused positive literal refuted by the theory against the context.
    InitTheory,
    /// Drop focus on a negative formula into the decomposition zone.
    Release,
    /// Split a negative conjunction at the head of the zone.
    AndMinus,
    /// Flatten a negative disjunction at the head of the zone.
    OrMinus,
    /// Store the negation of the head (positive or literal) in the context.
    Store,
    /// Declare a literal positive: either the last pending literal, or any
    /// context atom when nothing is pending.
    Polarize { lit: Literal },
    /// Re-focus on a positive formula whose negation is in the context.
    Decide { formula: LktFormula },
    /// Close: the context literals are theory-inconsistent.
    TheoryClose,
    /// Case split on a context literal.
    AnalyticCut { lit: Literal },
    /// Cut on a conjunction of literals. The first premise assumes them all
    /// as members; the second gets the disjunction of their negations. The
    /// first premise is excluded from counted size.
    GeneralCut { lits: Vec<Literal> },
}

impl LktRule {
    pub fn name(&self) -> &'static str {
        match self {
            LktRule::AndPlusFocus => "and+",
            LktRule::OrPlusFocus { .. } => "or+",
            LktRule::Init => "init",
            LktRule::InitTheory => "init-theory",
            LktRule::Release => "release",
            LktRule::AndMinus => "and-",
            LktRule::OrMinus => "or-",
            LktRule::Store => "store",
            LktRule::Polarize { .. } => "pol",
            LktRule::Decide { .. } => "decide",
            LktRule::TheoryClose => "theory-close",
            LktRule::AnalyticCut { .. } => "acut",
            LktRule::GeneralCut { .. } => "gcut",
        }
    }
}

/// Why a rule application or a proof is rejected.
#[derive(Error, Debug)]
pub enum LktError {
    #[error("{rule} expects {expected} premises, got {got}")]
    Arity {
        rule: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{rule} needs a focused sequent")]
    NeedsFocus { rule: &'static str },
    #[error("{rule} needs an unfocused sequent")]
    NeedsUnfocused { rule: &'static str },
    #[error("{rule} does not apply to this focused formula")]
    FocusShape { rule: &'static str },
    #[error("{rule} needs an empty decomposition zone")]
    ZoneNotEmpty { rule: &'static str },
    #[error("{rule} needs an empty pending zone")]
    PendingNotEmpty { rule: &'static str },
    #[error("{rule} needs a non-empty decomposition zone")]
    ZoneEmpty { rule: &'static str },
    #[error("the zone head does not fit {rule}")]
    HeadShape { rule: &'static str },
    #[error("formula is not in the context")]
    NotInContext,
    #[error("literal {lit} is not declared positive")]
    NotPositive { lit: Literal },
    #[error("formula must be positive for {rule}")]
    MustBePositive { rule: &'static str },
    #[error("formula must be negative for {rule}")]
    MustBeNegative { rule: &'static str },
    #[error("cannot declare {lit} positive: its negation already is")]
    PolarityClash { lit: Literal },
    #[error("polarize must name the last pending literal")]
    PendingMismatch,
    #[error("literal {lit} is already polarized")]
    AlreadyPolarized { lit: Literal },
    #[error("cut literal {lit} does not occur in the context")]
    NotAnalytic { lit: Literal },
    #[error("a cut needs at least one literal")]
    EmptyCut,
    #[error("theory does not refute the context")]
    TheoryNotRefuted,
    #[error("premise {at} of {rule} does not match the recorded sequent")]
    PremiseMismatch { rule: &'static str, at: usize },
    #[error("proof has open leaves")]
    Incomplete,
    #[error("malformed proof: {0}")]
    Internal(String),
}

/// Derives the premises a rule instance demands from its conclusion. Shape
/// and polarity conditions are enforced here; theory calls are left to
/// [`side_conditions`].
pub fn premises(conclusion: &LktSequent, rule: &LktRule) -> Result<Vec<LktSequent>, LktError> {
    let name = rule.name();
    match rule {
        LktRule::AndPlusFocus => {
            let focus = conclusion
                .focus
                .as_ref()
                .ok_or(LktError::NeedsFocus { rule: name })?;
            match focus {
                LktFormula::AndPlus(a, b) => Ok(vec![
                    LktSequent::focused(
                        conclusion.gamma.clone(),
                        (**a).clone(),
                        conclusion.pols.clone(),
                    ),
                    LktSequent::focused(
                        conclusion.gamma.clone(),
                        (**b).clone(),
                        conclusion.pols.clone(),
                    ),
                ]),
                _ => Err(LktError::FocusShape { rule: name }),
            }
        }
        LktRule::OrPlusFocus { right } => {
            let focus = conclusion
                .focus
                .as_ref()
                .ok_or(LktError::NeedsFocus { rule: name })?;
            match focus {
                LktFormula::OrPlus(a, b) => {
                    let picked = if *right { b } else { a };
                    Ok(vec![LktSequent::focused(
                        conclusion.gamma.clone(),
                        (**picked).clone(),
                        conclusion.pols.clone(),
                    )])
                }
                _ => Err(LktError::FocusShape { rule: name }),
            }
        }
        LktRule::Init => {
            let focus = conclusion
                .focus
                .as_ref()
                .ok_or(LktError::NeedsFocus { rule: name })?;
            match focus {
                LktFormula::Lit(l) => {
                    if !conclusion.pols.contains(*l) {
                        return Err(LktError::NotPositive { lit: *l });
                    }
                    if !conclusion.gamma.contains(&LktFormula::Lit(*l)) {
                        return Err(LktError::NotInContext);
                    }
                    Ok(vec![])
                }
                _ => Err(LktError::FocusShape { rule: name }),
            }
        }
        LktRule::InitTheory => {
            let focus = conclusion
                .focus
                .as_ref()
                .ok_or(LktError::NeedsFocus { rule: name })?;
            match focus {
                LktFormula::Lit(l) => {
                    if !conclusion.pols.contains(*l) {
                        return Err(LktError::NotPositive { lit: *l });
                    }
                    Ok(vec![])
                }
                _ => Err(LktError::FocusShape { rule: name }),
            }
        }
        LktRule::Release => {
            let focus = conclusion
                .focus
                .as_ref()
                .ok_or(LktError::NeedsFocus { rule: name })?;
            if classify(focus, &conclusion.pols) != Polarity::Negative {
                return Err(LktError::MustBeNegative { rule: name });
            }
            Ok(vec![LktSequent::unfocused(
                conclusion.gamma.clone(),
                vec![focus.clone()],
                Vec::new(),
                conclusion.pols.clone(),
            )])
        }
        LktRule::AndMinus => {
            expect_unfocused(conclusion, name)?;
            let (head, tail) = split_zone(conclusion, name)?;
            match head {
                LktFormula::AndMinus(a, b) => {
                    let mut left = vec![(*a).clone()];
                    left.extend(tail.iter().cloned());
                    let mut right = vec![(*b).clone()];
                    right.extend(tail.iter().cloned());
                    Ok(vec![
                        LktSequent::unfocused(
                            conclusion.gamma.clone(),
                            left,
                            conclusion.pending.clone(),
                            conclusion.pols.clone(),
                        ),
                        LktSequent::unfocused(
                            conclusion.gamma.clone(),
                            right,
                            conclusion.pending.clone(),
                            conclusion.pols.clone(),
                        ),
                    ])
                }
                _ => Err(LktError::HeadShape { rule: name }),
            }
        }
        LktRule::OrMinus => {
            expect_unfocused(conclusion, name)?;
            let (head, tail) = split_zone(conclusion, name)?;
            match head {
                LktFormula::OrMinus(a, b) => {
                    let mut zone = vec![(*a).clone(), (*b).clone()];
                    zone.extend(tail.iter().cloned());
                    Ok(vec![LktSequent::unfocused(
                        conclusion.gamma.clone(),
                        zone,
                        conclusion.pending.clone(),
                        conclusion.pols.clone(),
                    )])
                }
                _ => Err(LktError::HeadShape { rule: name }),
            }
        }
        LktRule::Store => {
            expect_unfocused(conclusion, name)?;
            let (head, tail) = split_zone(conclusion, name)?;
            let storable = matches!(head, LktFormula::Lit(_))
                || classify(&head, &conclusion.pols) == Polarity::Positive;
            if !storable {
                return Err(LktError::MustBePositive { rule: name });
            }
            Ok(vec![LktSequent::unfocused(
                conclusion.store(head.negated()),
                tail,
                conclusion.pending.clone(),
                conclusion.pols.clone(),
            )])
        }
        LktRule::Polarize { lit } => {
            expect_unfocused(conclusion, name)?;
            if !conclusion.zone.is_empty() {
                return Err(LktError::ZoneNotEmpty { rule: name });
            }
            let mut pending = conclusion.pending.clone();
            if let Some(last) = pending.pop() {
                // Zone form: the named literal must be the one waiting.
                if last != *lit {
                    return Err(LktError::PendingMismatch);
                }
            } else {
                // Free form: polarize a yet-unpolarized context atom.
                if conclusion.pols.contains(*lit) || conclusion.pols.contains(lit.negated()) {
                    return Err(LktError::AlreadyPolarized { lit: *lit });
                }
                if !conclusion.gamma_atoms().contains(&lit.atom()) {
                    return Err(LktError::NotAnalytic { lit: *lit });
                }
            }
            Ok(vec![LktSequent::unfocused(
                conclusion.gamma.clone(),
                Vec::new(),
                pending,
                conclusion.pols.with(*lit)?,
            )])
        }
        LktRule::Decide { formula } => {
            expect_unfocused(conclusion, name)?;
            if !conclusion.zone.is_empty() {
                return Err(LktError::ZoneNotEmpty { rule: name });
            }
            if !conclusion.pending.is_empty() {
                return Err(LktError::PendingNotEmpty { rule: name });
            }
            if classify(formula, &conclusion.pols) != Polarity::Positive {
                return Err(LktError::MustBePositive { rule: name });
            }
            if !conclusion.gamma.contains(&formula.negated()) {
                return Err(LktError::NotInContext);
            }
            Ok(vec![LktSequent::focused(
                conclusion.gamma.clone(),
                formula.clone(),
                conclusion.pols.clone(),
            )])
        }
        LktRule::TheoryClose => {
            expect_unfocused(conclusion, name)?;
            if !conclusion.zone.is_empty() {
                return Err(LktError::ZoneNotEmpty { rule: name });
            }
            if !conclusion.pending.is_empty() {
                return Err(LktError::PendingNotEmpty { rule: name });
            }
            Ok(vec![])
        }
        LktRule::AnalyticCut { lit } => {
            expect_unfocused(conclusion, name)?;
            if !conclusion.zone.is_empty() {
                return Err(LktError::ZoneNotEmpty { rule: name });
            }
            if !conclusion.gamma_atoms().contains(&lit.atom()) {
                return Err(LktError::NotAnalytic { lit: *lit });
            }
            Ok(vec![
                LktSequent::unfocused(
                    conclusion.store(LktFormula::Lit(*lit)),
                    Vec::new(),
                    conclusion.pending.clone(),
                    conclusion.pols.clone(),
                ),
                LktSequent::unfocused(
                    conclusion.store(LktFormula::Lit(lit.negated())),
                    Vec::new(),
                    conclusion.pending.clone(),
                    conclusion.pols.clone(),
                ),
            ])
        }
        LktRule::GeneralCut { lits } => {
            expect_unfocused(conclusion, name)?;
            if !conclusion.zone.is_empty() {
                return Err(LktError::ZoneNotEmpty { rule: name });
            }
            if !conclusion.pending.is_empty() {
                return Err(LktError::PendingNotEmpty { rule: name });
            }
            if lits.is_empty() {
                return Err(LktError::EmptyCut);
            }
            let mut units = conclusion.gamma.clone();
            for l in lits {
                units.insert(LktFormula::Lit(*l));
            }
            let spine: Vec<Literal> = lits.iter().map(|l| l.negated()).collect();
            let mut spined = conclusion.gamma.clone();
            spined.insert(or_minus_spine(&spine));
            Ok(vec![
                LktSequent::unfocused(
                    units,
                    Vec::new(),
                    Vec::new(),
                    conclusion.pols.clone(),
                ),
                LktSequent::unfocused(
                    spined,
                    Vec::new(),
                    Vec::new(),
                    conclusion.pols.clone(),
                ),
            ])
        }
    }
}

fn expect_unfocused(seq: &LktSequent, rule: &'static str) -> Result<(), LktError> {
    if seq.focus.is_some() {
        Err(LktError::NeedsUnfocused { rule })
    } else {
        Ok(())
    }
}

fn split_zone(
    seq: &LktSequent,
    rule: &'static str,
) -> Result<(LktFormula, Vec<LktFormula>), LktError> {
    let mut zone = seq.zone.clone();
    if zone.is_empty() {
        return Err(LktError::ZoneEmpty { rule });
    }
    let head = zone.remove(0);
    Ok((head, zone))
}

/// Theory-backed conditions: the two closing rules consult the solver.
pub fn side_conditions(
    conclusion: &LktSequent,
    rule: &LktRule,
    theory: &TheorySolver,
) -> Result<(), LktError> {
    match rule {
        LktRule::InitTheory => {
            let focus = match &conclusion.focus {
                Some(LktFormula::Lit(l)) => *l,
                _ => return Err(LktError::FocusShape { rule: "init-theory" }),
            };
            let mut lits = conclusion.gamma_literals();
            lits.insert(focus.negated());
            if theory.tc_unsat(&lits) {
                Ok(())
            } else {
                Err(LktError::TheoryNotRefuted)
            }
        }
        LktRule::TheoryClose => {
            if theory.tc_unsat(&conclusion.gamma_literals()) {
                Ok(())
            } else {
                Err(LktError::TheoryNotRefuted)
            }
        }
        _ => Ok(()),
    }
}

/// A proof tree: open leaves or validated rule nodes.
#[derive(Clone, Debug)]
pub enum LktProofTree {
    Open(LktSequent),
    Node {
        sequent: LktSequent,
        rule: LktRule,
        children: Vec<LktProofTree>,
    },
}

impl LktProofTree {
    pub fn sequent(&self) -> &LktSequent {
        match self {
            LktProofTree::Open(s) => s,
            LktProofTree::Node { sequent, .. } => sequent,
        }
    }

    /// Builds a node, deriving the premises and checking each child matches.
    pub fn node(
        sequent: LktSequent,
        rule: LktRule,
        children: Vec<LktProofTree>,
    ) -> Result<Self, LktError> {
        let wanted = premises(&sequent, &rule)?;
        if wanted.len() != children.len() {
            return Err(LktError::Arity {
                rule: rule.name(),
                expected: wanted.len(),
                got: children.len(),
            });
        }
        for (i, (want, child)) in wanted.iter().zip(&children).enumerate() {
            if child.sequent() != want {
                return Err(LktError::PremiseMismatch {
                    rule: rule.name(),
                    at: i,
                });
            }
        }
        Ok(LktProofTree::Node {
            sequent,
            rule,
            children,
        })
    }

    pub fn open_leaves(&self) -> Vec<&LktSequent> {
        match self {
            LktProofTree::Open(s) => vec![s],
            LktProofTree::Node { children, .. } => {
                children.iter().flat_map(|c| c.open_leaves()).collect()
            }
        }
    }

    pub fn is_complete(&self) -> bool {
        self.open_leaves().is_empty()
    }

    /// Counted size: rule nodes, except that the first premise of a general
    /// cut is free. Open leaves contribute nothing.
    pub fn counted_size(&self) -> usize {
        match self {
            LktProofTree::Open(_) => 0,
            LktProofTree::Node { rule, children, .. } => match rule {
                LktRule::GeneralCut { .. } => {
                    1 + children.get(1).map_or(0, |c| c.counted_size())
                }
                _ => 1 + children.iter().map(|c| c.counted_size()).sum::<usize>(),
            },
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            LktProofTree::Open(_) => 0,
            LktProofTree::Node { children, .. } => {
                1 + children.iter().map(|c| c.node_count()).sum::<usize>()
            }
        }
    }

    /// Replaces every open leaf labelled `target` by the replacement, which
    /// must conclude exactly `target`. Returns the number replaced.
    pub fn replace_open_leaves(
        &self,
        target: &LktSequent,
        replacement: &LktProofTree,
    ) -> (LktProofTree, usize) {
        match self {
            LktProofTree::Open(s) if s == target => (replacement.clone(), 1),
            LktProofTree::Open(_) => (self.clone(), 0),
            LktProofTree::Node {
                sequent,
                rule,
                children,
            } => {
                let mut total = 0;
                let rebuilt: Vec<LktProofTree> = children
                    .iter()
                    .map(|c| {
                        let (t, n) = c.replace_open_leaves(target, replacement);
                        total += n;
                        t
                    })
                    .collect();
                (
                    LktProofTree::Node {
                        sequent: sequent.clone(),
                        rule: rule.clone(),
                        children: rebuilt,
                    },
                    total,
                )
            }
        }
    }

    /// Full check: every node re-derives its premises and passes the theory
    /// side conditions.
    pub fn check(&self, theory: &TheorySolver) -> Result<(), LktError> {
        match self {
            LktProofTree::Open(_) => Ok(()),
            LktProofTree::Node {
                sequent,
                rule,
                children,
            } => {
                let wanted = premises(sequent, rule)?;
                side_conditions(sequent, rule, theory)?;
                if wanted.len() != children.len() {
                    return Err(LktError::Arity {
                        rule: rule.name(),
                        expected: wanted.len(),
                        got: children.len(),
                    });
                }
                for (i, (want, child)) in wanted.iter().zip(children).enumerate() {
                    if child.sequent() != want {
                        return Err(LktError::PremiseMismatch {
                            rule: rule.name(),
                            at: i,
                        });
                    }
                    child.check(theory)?;
                }
                Ok(())
            }
        }
    }

    /// Like [`check`](Self::check) but also demands no open leaves.
    pub fn check_complete(&self, theory: &TheorySolver) -> Result<(), LktError> {
        if !self.is_complete() {
            return Err(LktError::Incomplete);
        }
        self.check(theory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    fn lit(code: i32) -> Literal {
        Literal::from_dimacs(code).unwrap()
    }

    fn f(code: i32) -> LktFormula {
        LktFormula::Lit(lit(code))
    }

    #[test]
    fn negation_is_involutive_on_samples() {
        let samples = vec![
            f(3),
            LktFormula::AndPlus(Box::new(f(1)), Box::new(f(-2))),
            LktFormula::OrMinus(
                Box::new(LktFormula::AndMinus(Box::new(f(-1)), Box::new(f(2)))),
                Box::new(LktFormula::OrPlus(Box::new(f(3)), Box::new(f(-4)))),
            ),
        ];
        for s in samples {
            assert_eq!(s.negated().negated(), s);
        }
    }

    #[test]
    fn negation_swaps_polarity_of_connectives() {
        let a = LktFormula::AndPlus(Box::new(f(1)), Box::new(f(2)));
        assert_eq!(
            a.negated(),
            LktFormula::OrMinus(Box::new(f(-1)), Box::new(f(-2)))
        );
        let o = LktFormula::OrMinus(Box::new(f(1)), Box::new(f(2)));
        assert_eq!(
            o.negated(),
            LktFormula::AndPlus(Box::new(f(-1)), Box::new(f(-2)))
        );
    }

    #[test]
    fn spine_roundtrips_through_leaves() {
        let lits = vec![lit(1), lit(-2), lit(3)];
        let spine = or_minus_spine(&lits);
        assert_eq!(spine.or_minus_leaves(), Some(lits));
        assert_eq!(spine.size(), 3);
    }

    #[test]
    fn polarity_set_rejects_complementary_pairs() {
        let mut p = PolaritySet::new();
        p.insert(lit(1)).unwrap();
        p.insert(lit(1)).unwrap(); // idempotent
        assert!(matches!(
            p.insert(lit(-1)),
            Err(LktError::PolarityClash { .. })
        ));
        assert!(p.contains(lit(1)));
        assert!(!p.contains(lit(-1)));
    }

    #[test]
    fn classify_depends_on_declarations() {
        let mut p = PolaritySet::new();
        p.insert(lit(1)).unwrap();
        assert_eq!(classify(&f(1), &p), Polarity::Positive);
        assert_eq!(classify(&f(-1), &p), Polarity::Negative);
        assert_eq!(classify(&f(2), &p), Polarity::Unpolarized);
        assert_eq!(
            classify(&LktFormula::AndMinus(Box::new(f(1)), Box::new(f(2))), &p),
            Polarity::Negative
        );
    }

    fn gamma(formulas: Vec<LktFormula>) -> BTreeSet<LktFormula> {
        formulas.into_iter().collect()
    }

    #[test]
    fn store_negates_the_head() {
        let seq = LktSequent::unfocused(
            gamma(vec![]),
            vec![f(1)],
            vec![],
            PolaritySet::new(),
        );
        let ps = premises(&seq, &LktRule::Store).unwrap();
        assert_eq!(ps.len(), 1);
        assert!(ps[0].gamma.contains(&f(-1)));
        assert!(ps[0].zone.is_empty());
    }

    #[test]
    fn or_minus_flattens_and_and_minus_branches() {
        let disj = LktFormula::OrMinus(Box::new(f(1)), Box::new(f(2)));
        let seq = LktSequent::unfocused(
            gamma(vec![]),
            vec![disj],
            vec![],
            PolaritySet::new(),
        );
        let ps = premises(&seq, &LktRule::OrMinus).unwrap();
        assert_eq!(ps[0].zone, vec![f(1), f(2)]);

        let conj = LktFormula::AndMinus(Box::new(f(1)), Box::new(f(2)));
        let seq = LktSequent::unfocused(
            gamma(vec![]),
            vec![conj, f(3)],
            vec![],
            PolaritySet::new(),
        );
        let ps = premises(&seq, &LktRule::AndMinus).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].zone, vec![f(1), f(3)]);
        assert_eq!(ps[1].zone, vec![f(2), f(3)]);
    }

    #[test]
    fn polarize_free_form_needs_a_context_atom_and_fresh_polarity() {
        let seq = LktSequent::unfocused(
            gamma(vec![f(-1)]),
            vec![],
            vec![],
            PolaritySet::new(),
        );
        let ps = premises(&seq, &LktRule::Polarize { lit: lit(1) }).unwrap();
        assert!(ps[0].pols.contains(lit(1)));

        // Atom 2 is nowhere in the context.
        assert!(matches!(
            premises(&seq, &LktRule::Polarize { lit: lit(2) }),
            Err(LktError::NotAnalytic { .. })
        ));

        // Re-polarizing is refused in the free form.
        let polarized = LktSequent::unfocused(
            gamma(vec![f(-1)]),
            vec![],
            vec![],
            ps[0].pols.clone(),
        );
        assert!(matches!(
            premises(&polarized, &LktRule::Polarize { lit: lit(1) }),
            Err(LktError::AlreadyPolarized { .. })
        ));
    }

    #[test]
    fn polarize_zone_form_pops_the_last_pending_literal() {
        let seq = LktSequent::unfocused(
            gamma(vec![]),
            vec![],
            vec![lit(2), lit(1)],
            PolaritySet::new(),
        );
        let ps = premises(&seq, &LktRule::Polarize { lit: lit(1) }).unwrap();
        assert_eq!(ps[0].pending, vec![lit(2)]);
        assert!(ps[0].pols.contains(lit(1)));
        assert!(matches!(
            premises(&seq, &LktRule::Polarize { lit: lit(2) }),
            Err(LktError::PendingMismatch)
        ));
    }

    #[test]
    fn decide_requires_the_negation_in_context() {
        let mut pols = PolaritySet::new();
        pols.insert(lit(1)).unwrap();
        pols.insert(lit(2)).unwrap();
        let target = LktFormula::AndPlus(Box::new(f(1)), Box::new(f(2)));
        let seq = LktSequent::unfocused(
            gamma(vec![target.negated()]),
            vec![],
            vec![],
            pols.clone(),
        );
        let ps = premises(&seq, &LktRule::Decide { formula: target.clone() }).unwrap();
        assert_eq!(ps[0].focus, Some(target.clone()));

        let missing = LktSequent::unfocused(gamma(vec![]), vec![], vec![], pols);
        assert!(matches!(
            premises(&missing, &LktRule::Decide { formula: target }),
            Err(LktError::NotInContext)
        ));
    }

    #[test]
    fn init_closes_against_the_context() {
        let mut pols = PolaritySet::new();
        pols.insert(lit(1)).unwrap();
        let seq = LktSequent::focused(gamma(vec![f(1)]), f(1), pols.clone());
        assert!(premises(&seq, &LktRule::Init).unwrap().is_empty());

        let absent = LktSequent::focused(gamma(vec![f(2)]), f(1), pols);
        assert!(matches!(
            premises(&absent, &LktRule::Init),
            Err(LktError::NotInContext)
        ));
    }

    #[test]
    fn init_theory_asks_the_solver() {
        let th = TheorySolver::empty(2);
        let mut pols = PolaritySet::new();
        pols.insert(lit(1)).unwrap();
        // Focus on 1 (positive) with 1 a context member: the theory is
        // handed {1} plus the negation -1 and refutes the pair.
        let seq = LktSequent::focused(gamma(vec![f(1)]), f(1), pols.clone());
        side_conditions(&seq, &LktRule::InitTheory, &th).unwrap();

        let seq = LktSequent::focused(gamma(vec![f(2)]), f(1), pols);
        assert!(matches!(
            side_conditions(&seq, &LktRule::InitTheory, &th),
            Err(LktError::TheoryNotRefuted)
        ));
    }

    #[test]
    fn theory_close_uses_literal_members_only() {
        let th = TheorySolver::empty(2);
        let pair = gamma(vec![f(1), f(-1)]);
        let seq = LktSequent::unfocused(pair, vec![], vec![], PolaritySet::new());
        side_conditions(&seq, &LktRule::TheoryClose, &th).unwrap();

        // A complementary pair hidden inside a stored formula does not count.
        let hidden = gamma(vec![LktFormula::OrMinus(Box::new(f(1)), Box::new(f(-1)))]);
        let seq = LktSequent::unfocused(hidden, vec![], vec![], PolaritySet::new());
        assert!(matches!(
            side_conditions(&seq, &LktRule::TheoryClose, &th),
            Err(LktError::TheoryNotRefuted)
        ));
    }

    #[test]
    fn general_cut_shapes_its_premises() {
        let seq = LktSequent::unfocused(
            gamma(vec![f(9)]),
            vec![],
            vec![],
            PolaritySet::new(),
        );
        let rule = LktRule::GeneralCut {
            lits: vec![lit(1), lit(2)],
        };
        let ps = premises(&seq, &rule).unwrap();
        assert!(ps[0].gamma.contains(&f(1)) && ps[0].gamma.contains(&f(2)));
        assert!(ps[1].gamma.contains(&or_minus_spine(&[lit(-1), lit(-2)])));
        assert!(matches!(
            premises(&seq, &LktRule::GeneralCut { lits: vec![] }),
            Err(LktError::EmptyCut)
        ));
    }

    #[test]
    fn general_cut_first_premise_is_not_counted() {
        let th = TheorySolver::empty(1);
        let seq = LktSequent::unfocused(
            gamma(vec![f(1)]),
            vec![],
            vec![],
            PolaritySet::new(),
        );
        let rule = LktRule::GeneralCut { lits: vec![lit(-1)] };
        let ps = premises(&seq, &rule).unwrap();
        // Left: gamma has 1 and -1 → theory-close. Right: gamma has 1 and
        // the one-literal spine 1; leave it open.
        let left = LktProofTree::node(ps[0].clone(), LktRule::TheoryClose, vec![]).unwrap();
        let right = LktProofTree::Open(ps[1].clone());
        let tree = LktProofTree::node(seq, rule, vec![left, right]).unwrap();
        tree.check(&th).unwrap();
        assert_eq!(tree.counted_size(), 1);
        assert_eq!(tree.node_count(), 2);
    }

    #[test]
    fn a_complete_focused_refutation_checks() {
        // Problem: clauses (1) and (-1). Encode both, store them, polarize 1,
        // then decide on the unit clause member 1 and close.
        let th = TheorySolver::empty(1);
        let c1 = f(1); // clause (1)
        let c2 = f(-1); // clause (-1)
        let g = gamma(vec![c1.clone(), c2.clone()]);
        let pols = PolaritySet::new();

        let root = LktSequent::unfocused(g.clone(), vec![], vec![], pols.clone());
        let pol = LktRule::Polarize { lit: lit(1) };
        let after_pol = premises(&root, &pol).unwrap().remove(0);

        // Decide on formula 1: its negation -1 is a context member.
        let decide = LktRule::Decide { formula: f(1) };
        let focused = premises(&after_pol, &decide).unwrap().remove(0);
        // Init: 1 is positive and a member of gamma.
        let leaf = LktProofTree::node(focused.clone(), LktRule::Init, vec![]).unwrap();
        let decided = LktProofTree::node(after_pol.clone(), decide, vec![leaf]).unwrap();
        let tree = LktProofTree::node(root, pol, vec![decided]).unwrap();
        tree.check_complete(&th).unwrap();
        assert_eq!(tree.counted_size(), 3);
    }

    #[test]
    fn node_constructor_rejects_mismatched_children() {
        let seq = LktSequent::unfocused(
            gamma(vec![f(1)]),
            vec![],
            vec![],
            PolaritySet::new(),
        );
        let wrong = LktProofTree::Open(LktSequent::unfocused(
            gamma(vec![f(2)]),
            vec![],
            vec![],
            PolaritySet::new(),
        ));
        let err = LktProofTree::node(
            seq,
            LktRule::AnalyticCut { lit: lit(1) },
            vec![wrong.clone(), wrong],
        )
        .unwrap_err();
        assert!(matches!(err, LktError::PremiseMismatch { .. }));
    }

    #[test]
    fn release_requires_negative_focus() {
        let mut pols = PolaritySet::new();
        pols.insert(lit(1)).unwrap();
        let neg = LktSequent::focused(gamma(vec![]), f(-1), pols.clone());
        let ps = premises(&neg, &LktRule::Release).unwrap();
        assert_eq!(ps[0].zone, vec![f(-1)]);

        let pos = LktSequent::focused(gamma(vec![]), f(1), pols);
        assert!(matches!(
            premises(&pos, &LktRule::Release),
            Err(LktError::MustBeNegative { .. })
        ));
    }
}
