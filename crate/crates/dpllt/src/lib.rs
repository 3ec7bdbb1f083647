//! A certifying DPLL(T) kernel.
//!
//! The crate runs a DPLL(T) transition system over clause sets modulo a
//! pluggable theory of ground literals, and mechanically translates each run
//! into proof trees of two sequent calculi:
//!
//! * a clausal calculus whose sequents `Δ ⊢ φ` pair a set of asserted
//!   literals with a goal clause set ([`lkdpll`]), and
//! * a focused polarized calculus over one-sided sequents ([`lkt`]).
//!
//! Every transition of the solver extends a partial proof in the clausal
//! calculus ([`simulate`]), and finished clausal proofs are compiled further
//! into the focused calculus ([`translate`]). Both proof formats carry
//! independent checkers, so a run's verdict never has to be trusted: the
//! emitted certificate re-derives it from the axioms of the calculus.
//!
//! Size accounting is part of the contract. Proof growth per solver step is
//! measured and bounded, and the bounds are asserted in the simulation layer
//! rather than merely documented.

pub mod cnf;
pub mod dpll;
pub mod format;
pub mod lkdpll;
pub mod lkt;
pub mod simulate;
pub mod theory;
pub mod translate;

pub use cnf::{AtomId, Clause, ClauseSet, Literal, Trail};
pub use theory::{AtomTable, TheoryKind, TheorySolver};
