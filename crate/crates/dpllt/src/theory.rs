//! Ground theories and the consistency interface the rest of the kernel uses.
//!
//! A theory answers one question: is a finite set of asserted literals
//! satisfiable together? Everything else (entailment, the consequence sets
//! used by context-change side conditions) reduces to that. Two theories are
//! bundled: the empty theory, where only complementary pairs clash, and
//! ground equality over constants, decided by union-find.
//!
//! Answers are memoized per literal set, so re-checking the same context from
//! the solver, the proof constructions, and the final checkers costs one
//! evaluation.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeSet, HashMap};

use crate::cnf::{AtomId, Literal};

/// Interned constant identifier for the equality theory.
pub type ConstId = u32;

/// What an atom means to the theory.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AtomPayload {
    /// Pure propositional atom: opaque to every theory.
    Prop,
    /// Positive polarity asserts the two constants equal.
    Eq(ConstId, ConstId),
    /// Positive polarity asserts the two constants distinct.
    Neq(ConstId, ConstId),
}

/// Maps atom ids to their theory meaning and names the constants.
#[derive(Clone, Debug, Default)]
pub struct AtomTable {
    payloads: Vec<AtomPayload>,
    consts: Vec<String>,
}

impl AtomTable {
    /// A table of `natoms` plain propositional atoms.
    pub fn propositional(natoms: usize) -> Self {
        AtomTable {
            payloads: vec![AtomPayload::Prop; natoms],
            consts: Vec::new(),
        }
    }

    pub fn natoms(&self) -> usize {
        self.payloads.len()
    }

    pub fn const_count(&self) -> usize {
        self.consts.len()
    }

    pub fn const_name(&self, id: ConstId) -> &str {
        &self.consts[id as usize]
    }

    /// Returns the id for `name`, interning it on first sight.
    pub fn intern_const(&mut self, name: &str) -> ConstId {
        if let Some(at) = self.consts.iter().position(|c| c == name) {
            return at as ConstId;
        }
        self.consts.push(name.to_string());
        (self.consts.len() - 1) as ConstId
    }

    /// Gives `atom` an equality payload over the two named constants.
    pub fn declare_eq(&mut self, atom: AtomId, left: &str, right: &str) {
        let l = self.intern_const(left);
        let r = self.intern_const(right);
        self.payloads[atom as usize - 1] = AtomPayload::Eq(l, r);
    }

    /// Gives `atom` a disequality payload over the two named constants.
    pub fn declare_neq(&mut self, atom: AtomId, left: &str, right: &str) {
        let l = self.intern_const(left);
        let r = self.intern_const(right);
        self.payloads[atom as usize - 1] = AtomPayload::Neq(l, r);
    }

    pub fn payload(&self, atom: AtomId) -> AtomPayload {
        self.payloads[atom as usize - 1]
    }

    /// True when any atom carries an equality or disequality payload.
    pub fn has_theory_atoms(&self) -> bool {
        self.payloads.iter().any(|p| *p != AtomPayload::Prop)
    }

    /// What `lit` asserts about constants, if anything: `(l, r, equal)`.
    pub fn semantics(&self, lit: Literal) -> Option<(ConstId, ConstId, bool)> {
        match self.payload(lit.atom()) {
            AtomPayload::Prop => None,
            AtomPayload::Eq(l, r) => Some((l, r, lit.is_positive())),
            AtomPayload::Neq(l, r) => Some((l, r, !lit.is_positive())),
        }
    }
}

/// Which decision procedure a [`TheorySolver`] runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TheoryKind {
    /// No axioms: a literal set clashes only by containing some `l` and `-l`.
    Empty,
    /// Ground equality over the constants named in the atom table.
    Equality,
}

/// Plain union-find over constant ids, enough to decide ground equality.
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Decides satisfiability of literal sets and memoizes every verdict.
pub struct TheorySolver {
    kind: TheoryKind,
    table: AtomTable,
    memo: RefCell<HashMap<Vec<Literal>, bool>>,
    raw_evals: Cell<u64>,
}

impl TheorySolver {
    pub fn new(kind: TheoryKind, table: AtomTable) -> Self {
        TheorySolver {
            kind,
            table,
            memo: RefCell::new(HashMap::new()),
            raw_evals: Cell::new(0),
        }
    }

    /// An empty-theory solver over plain propositional atoms.
    pub fn empty(natoms: usize) -> Self {
        TheorySolver::new(TheoryKind::Empty, AtomTable::propositional(natoms))
    }

    pub fn kind(&self) -> TheoryKind {
        self.kind
    }

    pub fn table(&self) -> &AtomTable {
        &self.table
    }

    /// How many literal sets have actually been decided (memo misses).
    pub fn raw_eval_count(&self) -> u64 {
        self.raw_evals.get()
    }

    /// True when the asserted set has no model in the theory.
    pub fn tc_unsat(&self, lits: &BTreeSet<Literal>) -> bool {
        let key: Vec<Literal> = lits.iter().copied().collect();
        if let Some(&hit) = self.memo.borrow().get(&key) {
            return hit;
        }
        let verdict = self.decide_unsat(lits);
        self.raw_evals.set(self.raw_evals.get() + 1);
        self.memo.borrow_mut().insert(key, verdict);
        verdict
    }

    /// True when the asserted set is satisfiable in the theory.
    pub fn consistent(&self, lits: &BTreeSet<Literal>) -> bool {
        !self.tc_unsat(lits)
    }

    /// True when asserting `lit` on top of `lits` stays satisfiable.
    pub fn consistent_with(&self, lits: &BTreeSet<Literal>, lit: Literal) -> bool {
        let mut extended = lits.clone();
        extended.insert(lit);
        self.consistent(&extended)
    }

    /// Entailment: `lits` forces `lit` because denying it is unsatisfiable.
    pub fn entails(&self, lits: &BTreeSet<Literal>, lit: Literal) -> bool {
        let mut denied = lits.clone();
        denied.insert(lit.negated());
        self.tc_unsat(&denied)
    }

    /// The entailed members of `candidates`: the consequence set that the
    /// context-change side condition compares between two contexts.
    pub fn consequences_within(
        &self,
        lits: &BTreeSet<Literal>,
        candidates: &BTreeSet<Literal>,
    ) -> BTreeSet<Literal> {
        candidates
            .iter()
            .copied()
            .filter(|&c| self.entails(lits, c))
            .collect()
    }

    fn decide_unsat(&self, lits: &BTreeSet<Literal>) -> bool {
        match self.kind {
            TheoryKind::Empty => has_complementary_pair(lits),
            TheoryKind::Equality => self.equality_unsat(lits),
        }
    }

    fn equality_unsat(&self, lits: &BTreeSet<Literal>) -> bool {
        // Propositional atoms are opaque to equality reasoning, so a clash on
        // one is exactly a complementary pair.
        for &l in lits {
            if self.table.payload(l.atom()) == AtomPayload::Prop
                && lits.contains(&l.negated())
            {
                return true;
            }
        }
        let mut uf = UnionFind::new(self.table.const_count());
        let mut splits: Vec<(ConstId, ConstId)> = Vec::new();
        for &l in lits {
            match self.table.semantics(l) {
                Some((a, b, true)) => uf.union(a, b),
                Some((a, b, false)) => splits.push((a, b)),
                None => {}
            }
        }
        splits.into_iter().any(|(a, b)| uf.find(a) == uf.find(b))
    }
}

fn has_complementary_pair(lits: &BTreeSet<Literal>) -> bool {
    lits.iter().any(|l| lits.contains(&l.negated()))
}
