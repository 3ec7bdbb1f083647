//! Ground propositional syntax: literals, clauses, clause sets, and trails.
//!
//! Clauses are multisets of literals kept in sorted order; clause sets are
//! multisets of clauses, also kept sorted, so that structural equality of
//! sequents is plain `==`. Trails additionally remember which literals were
//! decisions, which is what the backtracking analysis in [`Trail::backpoints`]
//! consumes.

use std::collections::BTreeSet;
use std::fmt;

/// Propositional atom identifier. Atoms are numbered from 1, matching the
/// text format, so that a literal prints as the familiar signed integer.
pub type AtomId = u32;

/// A signed atom. `Literal` is `Copy` and totally ordered (by atom, negative
/// before positive) so it can key sets and keep clauses canonically sorted.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    atom: AtomId,
    positive: bool,
}

impl Literal {
    /// Builds a literal over atom `atom` (must be >= 1).
    pub fn new(atom: AtomId, positive: bool) -> Self {
        assert!(atom >= 1, "atom ids are 1-based");
        Literal { atom, positive }
    }

    pub fn positive(atom: AtomId) -> Self {
        Literal::new(atom, true)
    }

    pub fn negative(atom: AtomId) -> Self {
        Literal::new(atom, false)
    }

    /// Parses the signed-integer form: `3` is atom 3 positive, `-3` negative.
    pub fn from_dimacs(code: i32) -> Option<Self> {
        if code == 0 {
            return None;
        }
        Some(Literal::new(code.unsigned_abs(), code > 0))
    }

    pub fn to_dimacs(self) -> i32 {
        let magnitude = self.atom as i32;
        if self.positive {
            magnitude
        } else {
            -magnitude
        }
    }

    pub fn atom(self) -> AtomId {
        self.atom
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn negated(self) -> Self {
        Literal {
            atom: self.atom,
            positive: !self.positive,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A clause: a multiset of literals, stored sorted. The empty clause is the
/// trivially false goal. Duplicate literals are representable (the text
/// format allows them) even though the bundled generator never produces them.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    pub fn new(mut lits: Vec<Literal>) -> Self {
        lits.sort();
        Clause { lits }
    }

    pub fn empty() -> Self {
        Clause { lits: Vec::new() }
    }

    pub fn unit(lit: Literal) -> Self {
        Clause { lits: vec![lit] }
    }

    pub fn from_dimacs(codes: &[i32]) -> Option<Self> {
        let lits = codes
            .iter()
            .map(|&c| Literal::from_dimacs(c))
            .collect::<Option<Vec<_>>>()?;
        Some(Clause::new(lits))
    }

    /// Number of literal occurrences.
    pub fn size(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.binary_search(&lit).is_ok()
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.lits.iter().copied()
    }

    /// If this is a one-literal clause, that literal.
    pub fn unit_literal(&self) -> Option<Literal> {
        match self.lits.as_slice() {
            [l] => Some(*l),
            _ => None,
        }
    }

    /// The clause extended with one more occurrence of `lit`.
    pub fn with_literal(&self, lit: Literal) -> Clause {
        let mut lits = self.lits.clone();
        let at = lits.partition_point(|&x| x < lit);
        lits.insert(at, lit);
        Clause { lits }
    }

    /// The clause with one occurrence of `lit` removed, or `None` if absent.
    pub fn without_first(&self, lit: Literal) -> Option<Clause> {
        let at = self.lits.binary_search(&lit).ok()?;
        let mut lits = self.lits.clone();
        lits.remove(at);
        Some(Clause { lits })
    }

    /// Negations of all literals, one per occurrence.
    pub fn negated_literals(&self) -> Vec<Literal> {
        self.lits.iter().map(|l| l.negated()).collect()
    }

    /// True when some literal of the clause is asserted in `assignment`.
    pub fn satisfied_by(&self, assignment: &BTreeSet<Literal>) -> bool {
        self.lits.iter().any(|l| assignment.contains(l))
    }

    /// True when the negation of every literal is asserted in `assignment`
    /// (the clause is propositionally false under it).
    pub fn falsified_by(&self, assignment: &BTreeSet<Literal>) -> bool {
        self.lits.iter().all(|l| assignment.contains(&l.negated()))
    }

    pub fn mentions_atom(&self, atom: AtomId) -> bool {
        self.lits.iter().any(|l| l.atom() == atom)
    }
}

impl fmt::Debug for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

/// A goal: a multiset of clauses, stored sorted so two goals compare equal
/// exactly when they are equal as multisets.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClauseSet {
    clauses: Vec<Clause>,
}

impl ClauseSet {
    pub fn new(mut clauses: Vec<Clause>) -> Self {
        clauses.sort();
        ClauseSet { clauses }
    }

    pub fn empty() -> Self {
        ClauseSet::default()
    }

    pub fn insert(&mut self, clause: Clause) {
        let at = self.clauses.partition_point(|c| *c < clause);
        self.clauses.insert(at, clause);
    }

    pub fn with(&self, clause: Clause) -> ClauseSet {
        let mut out = self.clone();
        out.insert(clause);
        out
    }

    /// Removes one occurrence of `clause`; reports whether one was present.
    pub fn remove_first(&mut self, clause: &Clause) -> bool {
        match self.clauses.binary_search(clause) {
            Ok(at) => {
                self.clauses.remove(at);
                true
            }
            Err(_) => false,
        }
    }

    pub fn without_first(&self, clause: &Clause) -> Option<ClauseSet> {
        let mut out = self.clone();
        if out.remove_first(clause) {
            Some(out)
        } else {
            None
        }
    }

    pub fn contains(&self, clause: &Clause) -> bool {
        self.clauses.binary_search(clause).is_ok()
    }

    pub fn count_of(&self, clause: &Clause) -> usize {
        self.clauses.iter().filter(|c| *c == clause).count()
    }

    /// Sum of clause sizes: the measure the proof-growth bounds are stated in.
    pub fn size(&self) -> usize {
        self.clauses.iter().map(Clause::size).sum()
    }

    /// Number of clause occurrences.
    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Atoms mentioned anywhere in the goal.
    pub fn atoms(&self) -> BTreeSet<AtomId> {
        self.clauses
            .iter()
            .flat_map(|c| c.iter().map(|l| l.atom()))
            .collect()
    }

    /// Both polarities of every mentioned atom: the literal set the calculus
    /// side-conditions range over.
    pub fn atom_literals(&self) -> BTreeSet<Literal> {
        let mut out = BTreeSet::new();
        for atom in self.atoms() {
            out.insert(Literal::positive(atom));
            out.insert(Literal::negative(atom));
        }
        out
    }

    pub fn mentions_atom(&self, atom: AtomId) -> bool {
        self.clauses.iter().any(|c| c.mentions_atom(atom))
    }
}

impl FromIterator<Clause> for ClauseSet {
    fn from_iter<T: IntoIterator<Item = Clause>>(iter: T) -> Self {
        ClauseSet::new(iter.into_iter().collect())
    }
}

impl fmt::Debug for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:?}")?;
        }
        write!(f, "}}")
    }
}

/// One trail element: an asserted literal plus its decision mark.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TrailEntry {
    pub lit: Literal,
    pub decision: bool,
}

/// The solver's assignment: a sequence of literals, some marked as decisions.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Trail {
    entries: Vec<TrailEntry>,
}

impl Trail {
    pub fn new() -> Self {
        Trail::default()
    }

    pub fn from_entries(entries: Vec<TrailEntry>) -> Self {
        Trail { entries }
    }

    pub fn push(&mut self, lit: Literal, decision: bool) {
        self.entries.push(TrailEntry { lit, decision });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.entries.iter().any(|e| e.lit == lit)
    }

    pub fn defines_atom(&self, atom: AtomId) -> bool {
        self.entries.iter().any(|e| e.lit.atom() == atom)
    }

    pub fn decision_count(&self) -> usize {
        self.entries.iter().filter(|e| e.decision).count()
    }

    /// Indices of the decision entries, in trail order.
    pub fn decision_positions(&self) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.decision.then_some(i))
            .collect()
    }

    /// The asserted literals as a set (decision marks dropped).
    pub fn literal_set(&self) -> BTreeSet<Literal> {
        self.entries.iter().map(|e| e.lit).collect()
    }

    /// The trail with decision marks erased, order preserved.
    pub fn forget(&self) -> Vec<Literal> {
        self.entries.iter().map(|e| e.lit).collect()
    }

    /// Every assignment reachable by flipping one decision: for each decision
    /// at position `p`, the mark-free prefix before it followed by the
    /// negation of the decided literal.
    pub fn backstrict(&self) -> Vec<Vec<Literal>> {
        let mut out = Vec::new();
        for p in self.decision_positions() {
            let mut alt: Vec<Literal> =
                self.entries[..p].iter().map(|e| e.lit).collect();
            alt.push(self.entries[p].lit.negated());
            out.push(alt);
        }
        out
    }

    /// [`Trail::backstrict`] plus the fully forgotten trail itself. A trail
    /// with `k` decisions has exactly `k + 1` backpoints.
    pub fn backpoints(&self) -> Vec<Vec<Literal>> {
        let mut out = self.backstrict();
        out.push(self.forget());
        out
    }

    /// Backpoints with each assignment flattened to a literal set, for
    /// membership queries that ignore ordering.
    pub fn backpoint_sets(&self) -> BTreeSet<BTreeSet<Literal>> {
        self.backpoints()
            .into_iter()
            .map(|seq| seq.into_iter().collect())
            .collect()
    }
}

impl fmt::Display for Trail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", e.lit)?;
            if e.decision {
                write!(f, "d")?;
            }
        }
        Ok(())
    }
}
