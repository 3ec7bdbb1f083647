//! Randomized structural properties: canonical construction, involutions,
//! trail equations, polarity sets, theory monotonicity, and serialization
//! round-trips.

use std::collections::BTreeSet;

use proptest::collection::vec;
use proptest::prelude::*;

use dpllt::cnf::{Trail, TrailEntry};
use dpllt::dpll::DpllStep;
use dpllt::format::{parse_problem, parse_trace, write_problem, write_trace};
use dpllt::lkt::{LktFormula, PolaritySet};
use dpllt::{AtomTable, Clause, ClauseSet, Literal, TheoryKind, TheorySolver};

fn literal() -> impl Strategy<Value = Literal> {
    (1u32..=8, any::<bool>()).prop_map(|(atom, pos)| {
        Literal::from_dimacs(if pos { atom as i32 } else { -(atom as i32) }).unwrap()
    })
}

fn clause() -> impl Strategy<Value = Vec<Literal>> {
    vec(literal(), 1..6)
}

fn goal() -> impl Strategy<Value = ClauseSet> {
    vec(clause(), 0..8).prop_map(|cs| ClauseSet::new(cs.into_iter().map(Clause::new).collect()))
}

fn formula() -> impl Strategy<Value = LktFormula> {
    let leaf = literal().prop_map(LktFormula::Lit);
    leaf.prop_recursive(4, 32, 2, |inner| {
        (0..4u8, inner.clone(), inner).prop_map(|(k, a, b)| {
            let (a, b) = (Box::new(a), Box::new(b));
            match k {
                0 => LktFormula::AndPlus(a, b),
                1 => LktFormula::OrPlus(a, b),
                2 => LktFormula::AndMinus(a, b),
                _ => LktFormula::OrMinus(a, b),
            }
        })
    })
}

fn trail_entries() -> impl Strategy<Value = Vec<TrailEntry>> {
    (vec(any::<bool>(), 0..10), vec(any::<bool>(), 0..10), Just(())).prop_map(
        |(polarities, decisions, ())| {
            polarities
                .iter()
                .zip(&decisions)
                .enumerate()
                .map(|(i, (&pos, &decision))| TrailEntry {
                    lit: Literal::from_dimacs(if pos {
                        i as i32 + 1
                    } else {
                        -(i as i32 + 1)
                    })
                    .unwrap(),
                    decision,
                })
                .collect()
        },
    )
}

fn steps() -> impl Strategy<Value = Vec<DpllStep>> {
    let step = prop_oneof![
        (0usize..40).prop_map(|conflict| DpllStep::Fail { conflict }),
        literal().prop_map(|lit| DpllStep::Decide { lit }),
        (0usize..40).prop_map(|conflict| DpllStep::Backtrack { conflict }),
        ((0usize..40), literal())
            .prop_map(|(clause, lit)| DpllStep::UnitPropagate { clause, lit }),
        literal().prop_map(|lit| DpllStep::TheoryPropagate { lit }),
        ((0usize..40), clause(), literal()).prop_map(|(conflict, aux, lit)| {
            DpllStep::TBackjump {
                conflict,
                aux: Clause::new(aux),
                lit,
            }
        }),
        clause().prop_map(|c| DpllStep::TLearn {
            clause: Clause::new(c)
        }),
        (0usize..40).prop_map(|clause| DpllStep::TForget { clause }),
        Just(DpllStep::Restart),
    ];
    vec(step, 0..12)
}

/// Mark-erasure by structural recursion on the last entry.
fn forget_rec(entries: &[TrailEntry]) -> Vec<Literal> {
    match entries.split_last() {
        None => Vec::new(),
        Some((e, rest)) => {
            let mut v = forget_rec(rest);
            v.push(e.lit);
            v
        }
    }
}

/// One flip per decision, by structural recursion on the last entry.
fn backstrict_rec(entries: &[TrailEntry]) -> Vec<Vec<Literal>> {
    match entries.split_last() {
        None => Vec::new(),
        Some((e, rest)) => {
            let mut out = backstrict_rec(rest);
            if e.decision {
                let mut alt = forget_rec(rest);
                alt.push(e.lit.negated());
                out.push(alt);
            }
            out
        }
    }
}

proptest! {
    #[test]
    fn literal_negation_is_involutive(l in literal()) {
        prop_assert_eq!(l.negated().negated(), l);
        prop_assert_ne!(l.negated(), l);
        prop_assert_eq!(l.negated().atom(), l.atom());
    }

    #[test]
    fn formula_negation_is_involutive(f in formula()) {
        prop_assert_eq!(f.negated().negated(), f.clone());
        prop_assert_ne!(f.negated(), f);
    }

    #[test]
    fn clause_construction_is_order_insensitive(mut lits in clause()) {
        let forward = Clause::new(lits.clone());
        lits.reverse();
        prop_assert_eq!(Clause::new(lits), forward.clone());
        // Idempotence: rebuilding from the canonical order changes nothing.
        prop_assert_eq!(Clause::new(forward.literals().to_vec()), forward);
    }

    #[test]
    fn clause_set_construction_is_order_insensitive(cs in vec(clause(), 0..8)) {
        let clauses: Vec<Clause> = cs.into_iter().map(Clause::new).collect();
        let forward = ClauseSet::new(clauses.clone());
        let mut reversed = clauses.clone();
        reversed.reverse();
        prop_assert_eq!(ClauseSet::new(reversed), forward.clone());
        prop_assert_eq!(ClauseSet::new(forward.clauses().to_vec()), forward.clone());
        // The size measure counts every literal occurrence.
        let occurrences: usize = clauses.iter().map(Clause::size).sum();
        prop_assert_eq!(forward.size(), occurrences);
        prop_assert_eq!(forward.len(), clauses.len());
    }

    #[test]
    fn trail_equations_match_direct_recursion(entries in trail_entries()) {
        let trail = Trail::from_entries(entries.clone());
        prop_assert_eq!(trail.forget(), forget_rec(&entries));
        prop_assert_eq!(trail.backstrict(), backstrict_rec(&entries));
        let mut points = backstrict_rec(&entries);
        points.push(forget_rec(&entries));
        prop_assert_eq!(trail.backpoints(), points);
        prop_assert_eq!(
            trail.decision_count(),
            entries.iter().filter(|e| e.decision).count()
        );
    }

    #[test]
    fn polarity_set_never_holds_complements(lits in vec(literal(), 0..16)) {
        let mut pols = PolaritySet::new();
        for l in lits {
            let before = pols.clone();
            match pols.insert(l) {
                Ok(()) => prop_assert!(pols.contains(l)),
                // A refused insertion must leave the set untouched.
                Err(_) => prop_assert_eq!(&pols, &before),
            }
            prop_assert!(pols.iter().all(|m| !pols.contains(m.negated())));
        }
    }

    #[test]
    fn theory_refutation_is_monotone(
        small in vec(literal(), 0..5),
        extra in vec(literal(), 0..5),
    ) {
        let mut table = AtomTable::propositional(8);
        // Atoms 1-3 form an equality triangle; 4 crosses it; rest stay
        // propositional.
        table.declare_eq(1, "a", "b");
        table.declare_eq(2, "b", "c");
        table.declare_eq(3, "a", "c");
        table.declare_neq(4, "a", "c");
        let theory = TheorySolver::new(TheoryKind::Equality, table);

        let small: BTreeSet<Literal> = small.into_iter().collect();
        let mut large: BTreeSet<Literal> = extra.into_iter().collect();
        large.extend(small.iter().copied());

        if theory.tc_unsat(&small) {
            prop_assert!(theory.tc_unsat(&large));
        }
        // Entailment agrees with refuting the negation, by definition.
        for &l in &large {
            prop_assert_eq!(
                theory.entails(&small, l),
                theory.tc_unsat(&{
                    let mut denied = small.clone();
                    denied.insert(l.negated());
                    denied
                })
            );
        }
    }

    #[test]
    fn problem_serialization_roundtrips(goal in goal(), eq_atoms in vec(any::<bool>(), 8)) {
        let mut table = AtomTable::propositional(8);
        let names = ["a", "b", "c", "d", "e"];
        for (i, &make_eq) in eq_atoms.iter().enumerate() {
            if make_eq {
                let x = names[i % names.len()];
                let y = names[(i + 1) % names.len()];
                if i % 3 == 0 {
                    table.declare_neq(i as u32 + 1, x, y);
                } else {
                    table.declare_eq(i as u32 + 1, x, y);
                }
            }
        }
        // The written form must parse back to the same goal, and writing is
        // a fixed point: canonical text re-serializes byte-identically.
        let text = write_problem(&goal, &table);
        let parsed = parse_problem(&text);
        prop_assert!(parsed.is_ok(), "unparseable: {:?}\n{text}", parsed.err());
        let parsed = parsed.unwrap();
        prop_assert_eq!(&parsed.goal, &goal);
        prop_assert_eq!(write_problem(&parsed.goal, &parsed.table), text);
    }

    #[test]
    fn trace_serialization_roundtrips(steps in steps()) {
        let text = write_trace(&steps);
        let parsed = parse_trace(&text);
        prop_assert!(parsed.is_ok(), "unparseable: {:?}\n{text}", parsed.err());
        prop_assert_eq!(parsed.unwrap(), steps);
    }
}
