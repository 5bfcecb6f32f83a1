//! Finite transition systems over the powerset lattice.
//!
//! A [`TransitionSystem`] is a finite set of states with a successor
//! relation, a set of initial states `I`, and a set of safe states `P`. The
//! safety question — do all states reachable from `I` stay in `P`? — is the
//! plain-mode problem instance: positive and negative elements are both
//! [`StateSet`]s, the forward step is [`TransitionSystem::post`], and its
//! adjoint backward step is [`TransitionSystem::pre_tilde`]
//! (`post(X) ⊆ Y ⇔ X ⊆ pre_tilde(Y)`).

use fixedbitset::FixedBitSet;

use crate::instance::{Heuristic, HeuristicFailure, InvStatus, ProblemInstance};
use crate::state::{Mode, PdrState, PosElem};

/// A set of states of one system, as a fixed-width bitset.
///
/// The lattice structure used by the solver: order is inclusion, meet is
/// intersection, bottom is the empty set, top is the full state set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSet {
    bits: FixedBitSet,
}

impl StateSet {
    /// The empty set over a universe of `num_states` states.
    pub fn empty(num_states: usize) -> Self {
        StateSet {
            bits: FixedBitSet::with_capacity(num_states),
        }
    }

    /// The full set over a universe of `num_states` states.
    pub fn full(num_states: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(num_states);
        bits.insert_range(..);
        StateSet { bits }
    }

    /// Builds a set from explicit indices. Panics if an index is out of
    /// range; validated construction paths check ranges beforehand.
    pub fn from_indices(num_states: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = StateSet::empty(num_states);
        for index in indices {
            assert!(index < num_states, "state index {index} out of range");
            set.bits.insert(index);
        }
        set
    }

    /// Size of the universe (not the cardinality).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    /// True iff no state is a member.
    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Membership test.
    pub fn contains(&self, state: usize) -> bool {
        self.bits.contains(state)
    }

    /// Adds a state.
    pub fn insert(&mut self, state: usize) {
        self.bits.insert(state);
    }

    /// Set union.
    pub fn union(&self, other: &StateSet) -> StateSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        StateSet { bits }
    }

    /// Set intersection (the lattice meet).
    pub fn intersect(&self, other: &StateSet) -> StateSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        StateSet { bits }
    }

    /// Inclusion test (the lattice order).
    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Iterates over members in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }
}

impl std::fmt::Display for StateSet {
    /// Renders as `{s0,s2,s5}`; the empty set as `{}`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (i, state) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "s{state}")?;
        }
        write!(f, "}}")
    }
}

/// Errors when assembling a transition system from raw parts.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TsError {
    /// The system must have at least one state.
    #[error("a transition system needs at least one state")]
    NoStates,
    /// A state index referred to a state outside `0..num_states`.
    #[error("state index {index} out of range (system has {count} states)")]
    StateOutOfRange { index: usize, count: usize },
}

/// A finite transition system `(S, I, δ)` with a safe-set `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    num_states: usize,
    /// Successor lists, sorted and deduplicated.
    succ: Vec<Vec<usize>>,
    initial: StateSet,
    safe: StateSet,
}

impl TransitionSystem {
    /// Builds and validates a system. Duplicate edges are collapsed.
    pub fn new(
        num_states: usize,
        edges: &[(usize, usize)],
        initial: &[usize],
        safe: &[usize],
    ) -> Result<Self, TsError> {
        if num_states == 0 {
            return Err(TsError::NoStates);
        }
        let check = |index: usize| {
            if index < num_states {
                Ok(())
            } else {
                Err(TsError::StateOutOfRange {
                    index,
                    count: num_states,
                })
            }
        };
        let mut succ = vec![Vec::new(); num_states];
        for &(src, dst) in edges {
            check(src)?;
            check(dst)?;
            succ[src].push(dst);
        }
        for list in &mut succ {
            list.sort_unstable();
            list.dedup();
        }
        for &s in initial.iter().chain(safe) {
            check(s)?;
        }
        Ok(TransitionSystem {
            num_states,
            succ,
            initial: StateSet::from_indices(num_states, initial.iter().copied()),
            safe: StateSet::from_indices(num_states, safe.iter().copied()),
        })
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Successors of one state, sorted.
    pub fn successors(&self, state: usize) -> &[usize] {
        &self.succ[state]
    }

    /// All edges in (source, target) order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(src, targets)| targets.iter().map(move |&dst| (src, dst)))
    }

    /// The initial set `I`.
    pub fn initial(&self) -> &StateSet {
        &self.initial
    }

    /// The safe set `P`.
    pub fn safe(&self) -> &StateSet {
        &self.safe
    }

    /// Forward image: `post(X) = ⋃_{s ∈ X} δ(s)`.
    pub fn post(&self, x: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.num_states);
        for s in x.iter() {
            for &t in &self.succ[s] {
                out.insert(t);
            }
        }
        out
    }

    /// Backward safe image: `pre_tilde(X) = {s | δ(s) ⊆ X}`, the upper
    /// adjoint of [`post`](Self::post). Deadlock states belong to every
    /// `pre_tilde(X)` (the inclusion is vacuous).
    pub fn pre_tilde(&self, x: &StateSet) -> StateSet {
        let mut out = StateSet::empty(self.num_states);
        for s in 0..self.num_states {
            if self.succ[s].iter().all(|&t| x.contains(t)) {
                out.insert(s);
            }
        }
        out
    }

    /// `post(X) ∪ I`, the step function whose least fixpoint is the
    /// reachable set.
    pub fn post_with_initial(&self, x: &StateSet) -> StateSet {
        self.post(x).union(&self.initial)
    }
}

/// The plain-mode problem instance for one transition system.
#[derive(Debug, Clone, Copy)]
pub struct TsInstance<'a> {
    ts: &'a TransitionSystem,
}

/// Wraps a system as a plain-mode problem instance: `under_p(X) = X ⊆ P`,
/// guard image `post(X) ⊆ Y`, refutation `I ⊄ Y_1`.
pub fn ts_instance(ts: &TransitionSystem) -> TsInstance<'_> {
    TsInstance { ts }
}

impl<'a> TsInstance<'a> {
    /// The underlying system.
    pub fn system(&self) -> &'a TransitionSystem {
        self.ts
    }
}

impl ProblemInstance for TsInstance<'_> {
    type Pos = StateSet;
    type Neg = StateSet;

    fn mode(&self) -> Mode {
        Mode::Plain
    }

    fn pos_bot(&self) -> StateSet {
        StateSet::empty(self.ts.num_states)
    }

    fn pos_top(&self) -> StateSet {
        StateSet::full(self.ts.num_states)
    }

    fn pos_meet(&self, a: &StateSet, b: &StateSet) -> StateSet {
        a.intersect(b)
    }

    fn pos_leq(&self, a: &StateSet, b: &StateSet) -> bool {
        a.is_subset(b)
    }

    fn under_p(&self, x: &StateSet) -> bool {
        x.is_subset(&self.ts.safe)
    }

    fn b_image_in(&self, x: &StateSet, y: &StateSet) -> bool {
        self.ts.post(x).is_subset(y)
    }

    fn neg_contains_pos(&self, x: &StateSet, y: &StateSet) -> bool {
        x.is_subset(y)
    }

    fn neg_refutes(&self, y1: &StateSet) -> bool {
        !self.ts.initial.is_subset(y1)
    }

    fn f_apply(&self, x: &StateSet) -> StateSet {
        self.ts.post(x)
    }

    fn b_apply(&self, x: &StateSet) -> StateSet {
        self.ts.post_with_initial(x)
    }

    fn g_apply(&self, x: &StateSet) -> Option<StateSet> {
        Some(self.ts.pre_tilde(x))
    }

    fn i_elem(&self) -> StateSet {
        self.ts.initial.clone()
    }

    fn p_elem(&self) -> StateSet {
        self.ts.safe.clone()
    }

    fn neg_backward_ok(&self, lower: &StateSet, upper: &StateSet) -> InvStatus {
        if self.ts.pre_tilde(upper).is_subset(lower) {
            InvStatus::Holds
        } else {
            InvStatus::Violated
        }
    }

    fn neg_equal(&self, a: &StateSet, b: &StateSet) -> bool {
        a == b
    }

    fn pos_to_string(&self, x: &StateSet) -> String {
        x.to_string()
    }

    fn neg_to_string(&self, y: &StateSet) -> String {
        y.to_string()
    }
}

/// Which element the simple heuristic hands to Conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictMode {
    /// Strengthen with the forward image `post(x_{k-1}) ∪ I` — the chain
    /// grows the reachable set from below.
    Initial,
    /// Strengthen with the obligation `y_k` itself — the chain shrinks the
    /// safe region from above.
    Final,
}

/// The simple transition-system heuristic: Candidate always proposes `P`,
/// Decide always proposes `pre_tilde(y_k)`, Conflict per [`ConflictMode`].
#[derive(Debug, Clone, Copy)]
pub struct TsSimpleHeuristic<'a> {
    ts: &'a TransitionSystem,
    mode: ConflictMode,
}

/// Builds the simple heuristic for a system.
pub fn heuristic_simple(ts: &TransitionSystem, mode: ConflictMode) -> TsSimpleHeuristic<'_> {
    TsSimpleHeuristic { ts, mode }
}

impl<'a> Heuristic<TsInstance<'a>> for TsSimpleHeuristic<'a> {
    fn name(&self) -> &'static str {
        match self.mode {
            ConflictMode::Initial => "simple-init",
            ConflictMode::Final => "simple-final",
        }
    }

    fn choose_candidate(
        &self,
        _inst: &TsInstance<'a>,
        _state: &PdrState<StateSet, StateSet>,
    ) -> Result<StateSet, HeuristicFailure> {
        Ok(self.ts.safe.clone())
    }

    fn choose_decide(
        &self,
        _inst: &TsInstance<'a>,
        state: &PdrState<StateSet, StateSet>,
    ) -> Result<StateSet, HeuristicFailure> {
        let y_k = state.y(state.index().k());
        Ok(self.ts.pre_tilde(y_k))
    }

    fn choose_conflict(
        &self,
        _inst: &TsInstance<'a>,
        state: &PdrState<StateSet, StateSet>,
    ) -> Result<StateSet, HeuristicFailure> {
        let k = state.index().k();
        match self.mode {
            ConflictMode::Initial => {
                let x_prev = match state.x(k - 1) {
                    PosElem::Elem(x) => x.clone(),
                    PosElem::Sentinel => {
                        return Err(HeuristicFailure(
                            "plain-mode chain has no sentinel".to_string(),
                        ))
                    }
                };
                Ok(self.ts.post_with_initial(&x_prev))
            }
            ConflictMode::Final => Ok(state.y(k).clone()),
        }
    }
}
