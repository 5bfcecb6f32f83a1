//! The abstract problem interface the engine runs against.
//!
//! A [`ProblemInstance`] packages the two lattices the solver works in: a
//! complete lattice of *positive* elements ordered by `pos_leq`, and a set
//! of *negative* witnesses related to it through membership-style tests.
//! The safety question it encodes is "does the least fixpoint of `b_apply`
//! stay under the property element?"; the engine never computes that
//! fixpoint, it only needs the handful of decision procedures below.

use crate::state::{Mode, PdrState};

/// Outcome of a single invariant or side-condition check.
///
/// Some conditions are only meaningful when extra structure (an adjoint of
/// the step function, a comparison on negatives) is available; instances
/// without it report [`InvStatus::NotCheckable`] instead of guessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvStatus {
    /// The condition was checked and holds.
    Holds,
    /// The condition was checked and fails.
    Violated,
    /// The instance cannot decide the condition.
    NotCheckable,
}

impl InvStatus {
    /// Combines componentwise results: any violation dominates, otherwise
    /// any undecidable component makes the whole undecidable.
    pub fn and(self, other: InvStatus) -> InvStatus {
        use InvStatus::*;
        match (self, other) {
            (Violated, _) | (_, Violated) => Violated,
            (NotCheckable, _) | (_, NotCheckable) => NotCheckable,
            (Holds, Holds) => Holds,
        }
    }
}

/// A concrete safety problem the engine can run on.
///
/// `Pos` is the positive lattice; `Neg` is the type of negative witnesses.
/// Implementations must guarantee:
///
/// - `pos_leq` is a partial order with `pos_bot` and `pos_top` as extremes,
///   and `pos_meet` is its binary meet;
/// - `b_apply` is monotone, and the encoded question is whether its least
///   fixpoint `mu b` satisfies `under_p`;
/// - `b_image_in(x, y)` decides whether the image of `x` under the backward
///   semantics lies in the witness `y`, and `neg_contains_pos(x, y)` whether
///   `x` itself does;
/// - `neg_refutes(y)` certifies that a witness at position 1 proves the
///   fixpoint escapes the property.
pub trait ProblemInstance {
    /// Positive lattice elements (chain slots, conflict strengthening).
    type Pos: Clone + std::fmt::Debug;
    /// Negative witnesses (candidate and decide choices).
    type Neg: Clone + std::fmt::Debug;

    /// Whether the chain starts at the lattice bottom or at the sentinel.
    fn mode(&self) -> Mode;

    /// Bottom of the positive lattice.
    fn pos_bot(&self) -> Self::Pos;
    /// Top of the positive lattice.
    fn pos_top(&self) -> Self::Pos;
    /// Binary meet (greatest lower bound).
    fn pos_meet(&self, a: &Self::Pos, b: &Self::Pos) -> Self::Pos;
    /// Lattice order.
    fn pos_leq(&self, a: &Self::Pos, b: &Self::Pos) -> bool;

    /// Does `x` lie under the property element?
    fn under_p(&self, x: &Self::Pos) -> bool;
    /// Does the backward image of `x` lie inside the witness `y`?
    fn b_image_in(&self, x: &Self::Pos, y: &Self::Neg) -> bool;
    /// Does `x` itself lie inside the witness `y`?
    fn neg_contains_pos(&self, x: &Self::Pos, y: &Self::Neg) -> bool;
    /// Does a witness at position 1 refute the property?
    fn neg_refutes(&self, y1: &Self::Neg) -> bool;

    /// One application of the forward step function (no initial part).
    fn f_apply(&self, x: &Self::Pos) -> Self::Pos;
    /// One application of the full backward-semantics step whose least
    /// fixpoint is under scrutiny (forward step joined with the initial
    /// element, Bellman operator, …).
    fn b_apply(&self, x: &Self::Pos) -> Self::Pos;
    /// The upper adjoint of `f_apply` if the instance has one.
    fn g_apply(&self, _x: &Self::Pos) -> Option<Self::Pos> {
        None
    }
    /// The initial element (what `b_apply` joins in beyond `f_apply`).
    fn i_elem(&self) -> Self::Pos;
    /// The property element, the upper bound the fixpoint must respect.
    fn p_elem(&self) -> Self::Pos;

    /// Checks the backward link between adjacent negative witnesses: every
    /// element of `lower` must be reachable (in one backward step) from
    /// `upper`. Instances without a decision procedure for this report
    /// [`InvStatus::NotCheckable`].
    fn neg_backward_ok(&self, lower: &Self::Neg, upper: &Self::Neg) -> InvStatus;
    /// Semantic equality of witnesses (used for repeat detection and golden
    /// comparisons; representation differences must not matter).
    fn neg_equal(&self, a: &Self::Neg, b: &Self::Neg) -> bool;

    /// Canonical rendering of a positive element for traces.
    fn pos_to_string(&self, x: &Self::Pos) -> String;
    /// Canonical rendering of a negative witness for traces.
    fn neg_to_string(&self, y: &Self::Neg) -> String;
    /// Extra payload to attach to a trace event when `y` was chosen (for
    /// example the scheduler that justified a Decide).
    fn neg_witness_string(&self, _y: &Self::Neg) -> Option<String> {
        None
    }
}

/// Raised by a heuristic that cannot produce a choice; the engine turns it
/// into an `Unknown` verdict rather than an error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("heuristic could not produce a choice: {0}")]
pub struct HeuristicFailure(pub String);

/// Supplies the element each non-Unfold rule needs.
///
/// The engine validates nothing in release runs — a heuristic returning an
/// element that violates its rule's side conditions produces undefined
/// verdicts. Running in checked mode re-validates every choice and reports
/// violations as hard errors.
pub trait Heuristic<I: ProblemInstance> {
    /// Stable name used in traces and benchmark output.
    fn name(&self) -> &'static str;

    /// Witness `z` for Candidate: must satisfy `x_{n-1} not in z` and
    /// `p in z` (the property element lies in the witness).
    fn choose_candidate(
        &self,
        inst: &I,
        state: &PdrState<I::Pos, I::Neg>,
    ) -> Result<I::Neg, HeuristicFailure>;

    /// Witness `z` for Decide at position `k`: must satisfy
    /// `x_{k-1} not in z`, and every element of `y_k` must be reachable
    /// from `z` in one step.
    fn choose_decide(
        &self,
        inst: &I,
        state: &PdrState<I::Pos, I::Neg>,
    ) -> Result<I::Neg, HeuristicFailure>;

    /// Element `z` for Conflict at position `k`: must satisfy `z in y_k`
    /// and `b_apply(x_{k-1} meet z) <= z`.
    fn choose_conflict(
        &self,
        inst: &I,
        state: &PdrState<I::Pos, I::Neg>,
    ) -> Result<I::Pos, HeuristicFailure>;
}

#[cfg(test)]
mod tests {
    use super::InvStatus;

    #[test]
    fn status_combination_prefers_violation() {
        use InvStatus::*;
        assert_eq!(Holds.and(Holds), Holds);
        assert_eq!(Holds.and(NotCheckable), NotCheckable);
        assert_eq!(NotCheckable.and(Violated), Violated);
        assert_eq!(Violated.and(Holds), Violated);
    }
}
