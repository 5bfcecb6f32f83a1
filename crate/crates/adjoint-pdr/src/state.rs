//! Solver state: indexed positive chains paired with negative sequences.
//!
//! A solver state has the shape `(x_0, …, x_{n-1} ‖ y_k, …, y_{n-1})_{n,k}`:
//! a chain of `n` positive elements (over-approximations of what is
//! reachable in at most `j` steps) and, when `k < n`, a sequence of negative
//! elements indexed from `k` to `n - 1` (potential counterexamples pulled
//! backwards from the property). The pair `(n, k)` always satisfies
//! `1 <= k <= n`.

use crate::instance::ProblemInstance;

/// Which lattice discipline a problem instance runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Positive chain starts at the lattice bottom; every slot is an
    /// ordinary lattice element.
    Plain,
    /// Positive chain starts with a sentinel below every ordinary element,
    /// so the first real approximation sits at position 1. Used when the
    /// backward map on negatives has no exact lattice adjoint.
    Down,
}

/// One slot of the positive chain: either the below-everything sentinel
/// (only at position 0 in [`Mode::Down`]) or an ordinary lattice element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PosElem<P> {
    /// Strictly below every ordinary element; absorbs meets.
    Sentinel,
    /// An ordinary element of the positive lattice.
    Elem(P),
}

impl<P> PosElem<P> {
    /// True iff this slot holds the sentinel.
    pub fn is_sentinel(&self) -> bool {
        matches!(self, PosElem::Sentinel)
    }

    /// The ordinary element in this slot, if any.
    pub fn as_elem(&self) -> Option<&P> {
        match self {
            PosElem::Sentinel => None,
            PosElem::Elem(p) => Some(p),
        }
    }
}

/// The four non-conclusive proof rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// Extend the chain with a new top slot and restart the negative search.
    Unfold,
    /// Seed the negative sequence from a property violation at the frontier.
    Candidate,
    /// Pull a negative witness one step backwards.
    Decide,
    /// Strengthen the chain and discard the innermost negative element.
    Conflict,
}

impl Rule {
    /// Two-letter code used in trace lines: `U`, `Ca`, `D`, `Co`.
    pub fn short_code(self) -> &'static str {
        match self {
            Rule::Unfold => "U",
            Rule::Candidate => "Ca",
            Rule::Decide => "D",
            Rule::Conflict => "Co",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Rule::Unfold => "Unfold",
            Rule::Candidate => "Candidate",
            Rule::Decide => "Decide",
            Rule::Conflict => "Conflict",
        };
        f.write_str(name)
    }
}

/// The `(n, k)` pair of a state, with `1 <= k <= n` enforced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Index {
    n: usize,
    k: usize,
}

impl Index {
    /// Builds an index, rejecting pairs outside `1 <= k <= n`.
    pub fn new(n: usize, k: usize) -> Result<Self, StateError> {
        if k < 1 || k > n {
            return Err(StateError::BadIndex { n, k });
        }
        Ok(Index { n, k })
    }

    /// Chain length `n`.
    pub fn n(self) -> usize {
        self.n
    }

    /// Active position `k`; the negative sequence covers `k ..= n - 1`.
    pub fn k(self) -> usize {
        self.k
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n, self.k)
    }
}

/// Structural errors when assembling a state by hand.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    /// The `(n, k)` pair violates `1 <= k <= n`.
    #[error("index (n = {n}, k = {k}) violates 1 <= k <= n")]
    BadIndex { n: usize, k: usize },
    /// Chain or negative sequence length disagrees with the index.
    #[error("expected {expected} elements in the {part} sequence, got {got}")]
    LengthMismatch {
        part: &'static str,
        expected: usize,
        got: usize,
    },
    /// Adjacent chain elements are not ordered.
    #[error("positive chain is not increasing at position {position}")]
    ChainUnordered { position: usize },
}

/// A full solver state.
///
/// `negative[0]` is `y_k`, the element the next rule will act on; the last
/// entry is `y_{n-1}`. An empty `negative` means the state is in its search
/// phase (`k == n`).
#[derive(Debug, Clone)]
pub struct PdrState<P, N> {
    positive: Vec<PosElem<P>>,
    negative: Vec<N>,
    index: Index,
}

impl<P, N> PdrState<P, N> {
    /// Builds a state and validates lengths, the index bounds, and that the
    /// positive chain is increasing under `leq`.
    pub fn new(
        positive: Vec<PosElem<P>>,
        negative: Vec<N>,
        index: Index,
        leq: impl Fn(&PosElem<P>, &PosElem<P>) -> bool,
    ) -> Result<Self, StateError> {
        if positive.len() != index.n() {
            return Err(StateError::LengthMismatch {
                part: "positive",
                expected: index.n(),
                got: positive.len(),
            });
        }
        let want_neg = index.n() - index.k();
        if negative.len() != want_neg {
            return Err(StateError::LengthMismatch {
                part: "negative",
                expected: want_neg,
                got: negative.len(),
            });
        }
        for (j, pair) in positive.windows(2).enumerate() {
            if !leq(&pair[0], &pair[1]) {
                return Err(StateError::ChainUnordered { position: j });
            }
        }
        Ok(PdrState {
            positive,
            negative,
            index,
        })
    }

    /// Builds a state without validation; used by the engine, whose rules
    /// preserve the structural invariants by construction.
    pub(crate) fn from_parts_unchecked(
        positive: Vec<PosElem<P>>,
        negative: Vec<N>,
        index: Index,
    ) -> Self {
        debug_assert_eq!(positive.len(), index.n());
        debug_assert_eq!(negative.len(), index.n() - index.k());
        PdrState {
            positive,
            negative,
            index,
        }
    }

    /// The positive chain `x_0, …, x_{n-1}`.
    pub fn positive(&self) -> &[PosElem<P>] {
        &self.positive
    }

    /// The negative sequence `y_k, …, y_{n-1}` (empty when `k == n`).
    pub fn negative(&self) -> &[N] {
        &self.negative
    }

    /// The `(n, k)` index.
    pub fn index(&self) -> Index {
        self.index
    }

    /// Chain slot `x_j`. Panics if `j >= n`.
    pub fn x(&self, j: usize) -> &PosElem<P> {
        &self.positive[j]
    }

    /// Negative element `y_j`, addressed by absolute position
    /// `k <= j <= n - 1`. Panics outside that range.
    pub fn y(&self, j: usize) -> &N {
        let k = self.index.k();
        assert!(
            j >= k && j < self.index.n(),
            "negative position {j} outside {k}..{}",
            self.index.n()
        );
        &self.negative[j - k]
    }
}

/// Why a run ended without a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// The step budget ran out before a conclusive state was reached.
    BudgetExhausted,
    /// A heuristic declined to produce a choice.
    HeuristicFailure,
}

/// Outcome of a solver run.
#[derive(Debug, Clone)]
pub enum Verdict<P, N> {
    /// The property holds: `witness` is an inductive invariant found at
    /// `position` in the chain (it contains the initial element, is closed
    /// under the step function, and lies inside the property).
    Holds { witness: P, position: usize },
    /// The property fails: `negative` is the final witness sequence, whose
    /// first element certifies the violation.
    Refuted { negative: Vec<N> },
    /// No conclusion; see the reason.
    Unknown(UnknownReason),
}

impl<P, N> Verdict<P, N> {
    /// Short lowercase tag: `holds`, `refuted`, or `unknown`.
    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Refuted { .. } => "refuted",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

/// One applied rule in a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    /// 1-based position of this application in the run.
    pub step: usize,
    /// The rule that fired.
    pub rule: Rule,
    /// Index before the rule was applied.
    pub index_before: (usize, usize),
    /// Index after the rule was applied.
    pub index_after: (usize, usize),
    /// Serialized element chosen by the heuristic; `None` for Unfold.
    pub chosen: Option<String>,
    /// Extra serialized payload attached by the instance (for example the
    /// scheduler a Decide step used to pull a witness backwards).
    pub witness: Option<String>,
}

impl TraceEvent {
    /// Canonical single-line rendering:
    /// `step=3 rule=Co n=2 k=2 chosen={s0}` with `n`/`k` taken after the
    /// application and `chosen=-` for Unfold.
    pub fn trace_line(&self) -> String {
        format!(
            "step={} rule={} n={} k={} chosen={}",
            self.step,
            self.rule.short_code(),
            self.index_after.0,
            self.index_after.1,
            self.chosen.as_deref().unwrap_or("-")
        )
    }
}

/// Record of a full run: every event, plus every intermediate state when
/// state retention was requested.
#[derive(Debug, Clone)]
pub struct Trace<P, N> {
    /// Events in application order.
    pub events: Vec<TraceEvent>,
    /// `states[0]` is the initial state and `states[i]` the state after
    /// `events[i - 1]`; `None` unless retention was enabled.
    pub states: Option<Vec<PdrState<P, N>>>,
}

impl<P, N> Trace<P, N> {
    /// Number of applications of each rule, in the order
    /// (Unfold, Candidate, Decide, Conflict).
    pub fn rule_counts(&self) -> [usize; 4] {
        let mut counts = [0usize; 4];
        for event in &self.events {
            let slot = match event.rule {
                Rule::Unfold => 0,
                Rule::Candidate => 1,
                Rule::Decide => 2,
                Rule::Conflict => 3,
            };
            counts[slot] += 1;
        }
        counts
    }

    /// All trace lines joined with newlines (plus a trailing newline), the
    /// format written by `--trace`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&event.trace_line());
            out.push('\n');
        }
        out
    }
}

/// Renders a state like `(ø, {s0}, {s0,s1} ‖ {s0,s1,s2})_(3, 2)` for
/// diagnostics; `ø` marks the sentinel.
pub fn render_state<I: ProblemInstance>(inst: &I, state: &PdrState<I::Pos, I::Neg>) -> String {
    let positive: Vec<String> = state
        .positive()
        .iter()
        .map(|slot| match slot {
            PosElem::Sentinel => "ø".to_string(),
            PosElem::Elem(p) => inst.pos_to_string(p),
        })
        .collect();
    let negative: Vec<String> = state.negative().iter().map(|y| inst.neg_to_string(y)).collect();
    format!(
        "({} ‖ {})_{}",
        positive.join(", "),
        negative.join(", "),
        state.index()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num_leq(a: &PosElem<u32>, b: &PosElem<u32>) -> bool {
        match (a, b) {
            (PosElem::Sentinel, _) => true,
            (PosElem::Elem(_), PosElem::Sentinel) => false,
            (PosElem::Elem(x), PosElem::Elem(y)) => x <= y,
        }
    }

    #[test]
    fn index_bounds() {
        assert!(Index::new(2, 1).is_ok());
        assert!(Index::new(2, 2).is_ok());
        assert_eq!(
            Index::new(2, 0),
            Err(StateError::BadIndex { n: 2, k: 0 })
        );
        assert_eq!(
            Index::new(2, 3),
            Err(StateError::BadIndex { n: 2, k: 3 })
        );
    }

    #[test]
    fn state_validation() {
        let idx = Index::new(3, 2).unwrap();
        let chain = vec![PosElem::Elem(0u32), PosElem::Elem(1), PosElem::Elem(2)];
        let ok = PdrState::new(chain.clone(), vec![9u32], idx, num_leq);
        assert!(ok.is_ok());
        let state = ok.unwrap();
        assert_eq!(state.x(1), &PosElem::Elem(1));
        assert_eq!(state.y(2), &9);

        let short = PdrState::new(chain.clone(), Vec::<u32>::new(), idx, num_leq);
        assert!(matches!(
            short,
            Err(StateError::LengthMismatch { part: "negative", .. })
        ));

        let unordered = vec![PosElem::Elem(2u32), PosElem::Elem(1), PosElem::Elem(2)];
        assert!(matches!(
            PdrState::new(unordered, vec![9], idx, num_leq),
            Err(StateError::ChainUnordered { position: 0 })
        ));
    }

    #[test]
    fn negative_is_indexed_from_k() {
        let idx = Index::new(4, 2).unwrap();
        let chain = vec![
            PosElem::Elem(0u32),
            PosElem::Elem(1),
            PosElem::Elem(2),
            PosElem::Elem(3),
        ];
        let state = PdrState::new(chain, vec![20u32, 30], idx, num_leq).unwrap();
        assert_eq!(state.y(2), &20);
        assert_eq!(state.y(3), &30);
    }

    #[test]
    fn trace_line_format() {
        let event = TraceEvent {
            step: 3,
            rule: Rule::Conflict,
            index_before: (2, 1),
            index_after: (2, 2),
            chosen: Some("{s0}".to_string()),
            witness: None,
        };
        assert_eq!(event.trace_line(), "step=3 rule=Co n=2 k=2 chosen={s0}");
        let unfold = TraceEvent {
            step: 4,
            rule: Rule::Unfold,
            index_before: (2, 2),
            index_after: (3, 3),
            chosen: None,
            witness: None,
        };
        assert_eq!(unfold.trace_line(), "step=4 rule=U n=3 k=3 chosen=-");
    }

    #[test]
    fn rule_codes() {
        assert_eq!(Rule::Unfold.short_code(), "U");
        assert_eq!(Rule::Candidate.short_code(), "Ca");
        assert_eq!(Rule::Decide.short_code(), "D");
        assert_eq!(Rule::Conflict.short_code(), "Co");
    }
}
