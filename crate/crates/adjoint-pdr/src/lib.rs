//! Property-directed reachability over complete lattices.
//!
//! This crate implements a generalized PDR loop that works on an abstract
//! problem description — a lattice of positive over-approximations, a
//! monotone step function, and a sequence of negative witnesses — instead of
//! a fixed SAT backend. Two concrete problem families are provided:
//!
//! - **Finite transition systems** over the powerset lattice of states
//!   ([`ts`]): does every state reachable from the initial set stay inside
//!   the safe set?
//! - **Markov decision processes** over frames of exact rationals ([`mdp`]):
//!   is the maximum probability of reaching a bad state at most a threshold
//!   `lambda`? Negative witnesses are half-space down-sets of the frame
//!   lattice, and every number is an arbitrary-precision rational — no
//!   floating point anywhere in a solver path.
//!
//! The [`engine`] drives one of four mutually exclusive rules per step
//! (Unfold, Candidate, Decide, Conflict) picked by [`engine::classify`], with
//! heuristics supplying the actual lattice elements. [`invariants`] can audit
//! every state of a retained trace against the structural invariants the
//! loop is supposed to maintain, and [`oracle`] provides independent exact
//! reference solvers (worklist reachability, scheduler enumeration plus
//! rational Gaussian elimination) used to validate solver verdicts.

pub mod engine;
pub mod instance;
pub mod invariants;
pub mod mdp;
pub mod model_io;
pub mod oracle;
pub mod rational;
pub mod state;
pub mod ts;

pub use instance::{Heuristic, HeuristicFailure, InvStatus, ProblemInstance};
pub use rational::Rational;
pub use state::{Mode, PdrState, PosElem, Rule, Trace, TraceEvent, UnknownReason, Verdict};
