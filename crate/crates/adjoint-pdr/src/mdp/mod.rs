//! MDP max-reachability as a down-mode problem instance.
//!
//! The question: is the maximum probability (over memoryless schedulers) of
//! reaching a bad state from the initial state at most `lambda`? Positive
//! elements are [`Frame`]s — one rational in `[0,1]` per state — ordered
//! pointwise; the step function is the Bellman operator [`bellman`], whose
//! least fixpoint at the initial state is exactly that maximum probability.
//! Negative witnesses are half-space down-sets
//! ([`halfspace::HalfSpaceDownSet`]), pulled backwards through a fixed
//! scheduler by [`hs_transform`].

pub mod halfspace;

use num::{One, Signed, Zero};

use crate::instance::{Heuristic, HeuristicFailure, InvStatus, ProblemInstance};
use crate::rational::{format_rational, in_unit_interval, Rational};
use crate::state::{Mode, PdrState, PosElem};
use crate::ts::StateSet;
use halfspace::{enumerate_dominating_generators, HalfSpaceDownSet};

/// One rational value in `[0,1]` per state; the MDP lattice element.
///
/// Order, meet, bottom, and top are all pointwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame(Vec<Rational>);

impl Frame {
    /// Builds a frame, asserting every entry lies in `[0,1]`.
    pub fn from_vec(values: Vec<Rational>) -> Self {
        assert!(
            values.iter().all(in_unit_interval),
            "frame entries must lie in [0,1]"
        );
        Frame(values)
    }

    /// The all-zero frame (lattice bottom).
    pub fn zeros(num_states: usize) -> Self {
        Frame(vec![Rational::zero(); num_states])
    }

    /// The all-one frame (lattice top).
    pub fn ones(num_states: usize) -> Self {
        Frame(vec![Rational::one(); num_states])
    }

    /// Number of states.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True iff the frame has no entries (zero-state edge case).
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry at one state.
    pub fn get(&self, state: usize) -> &Rational {
        &self.0[state]
    }

    /// All entries in state order.
    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    /// Pointwise order.
    pub fn leq(&self, other: &Frame) -> bool {
        assert_eq!(self.len(), other.len(), "frame dimension mismatch");
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Pointwise minimum (the lattice meet).
    pub fn meet(&self, other: &Frame) -> Frame {
        assert_eq!(self.len(), other.len(), "frame dimension mismatch");
        Frame(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a.min(b).clone())
                .collect(),
        )
    }
}

impl std::fmt::Display for Frame {
    /// Renders as `[0,2/3,0,1]`.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", format_rational(v))?;
        }
        write!(f, "]")
    }
}

/// Errors when assembling an MDP from raw parts.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MdpError {
    /// The MDP must have at least one state.
    #[error("an MDP needs at least one state")]
    NoStates,
    /// A state index referred outside `0..num_states`.
    #[error("state index {index} out of range (MDP has {count} states)")]
    StateOutOfRange { index: usize, count: usize },
    /// Every state needs at least one action.
    #[error("state s{state} has no action")]
    NoActionForState { state: usize },
    /// Transition probabilities must be strictly positive.
    #[error("probability {prob} for s{state} action `{label}` target s{target} is not positive")]
    NonPositiveProbability {
        state: usize,
        label: String,
        target: usize,
        prob: String,
    },
    /// A distribution mentioned the same target twice.
    #[error("duplicate target s{target} in s{state} action `{label}`")]
    DuplicateTarget {
        state: usize,
        label: String,
        target: usize,
    },
    /// A distribution must sum exactly to one.
    #[error("probabilities for s{state} action `{label}` sum to {sum}, expected 1")]
    ProbabilitySumMismatch {
        state: usize,
        label: String,
        sum: String,
    },
    /// The threshold must lie in `[0,1]`.
    #[error("lambda {lambda} outside [0,1]")]
    LambdaOutOfRange { lambda: String },
}

/// One enabled action: a label and an exact distribution over targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    label: String,
    /// Sorted by target index; probabilities are positive and sum to 1.
    dist: Vec<(usize, Rational)>,
}

impl Action {
    /// The action's label.
    pub fn label(&self) -> &str {
        &self.label
    }

    /// The distribution in (target, probability) pairs, sorted by target.
    pub fn dist(&self) -> &[(usize, Rational)] {
        &self.dist
    }
}

/// A Markov decision process with a bad-state set and a threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdp {
    num_states: usize,
    /// Per-state actions in declaration order (ties in maximization are
    /// broken toward the earlier action).
    actions: Vec<Vec<Action>>,
    initial: usize,
    bad: StateSet,
    lambda: Rational,
}

impl Mdp {
    /// Builds and validates an MDP. Each state's actions keep their
    /// declaration order; each distribution is sorted by target.
    pub fn new(
        num_states: usize,
        actions: Vec<Vec<(String, Vec<(usize, Rational)>)>>,
        initial: usize,
        bad: &[usize],
        lambda: Rational,
    ) -> Result<Self, MdpError> {
        if num_states == 0 {
            return Err(MdpError::NoStates);
        }
        let check = |index: usize| {
            if index < num_states {
                Ok(())
            } else {
                Err(MdpError::StateOutOfRange {
                    index,
                    count: num_states,
                })
            }
        };
        check(initial)?;
        for &b in bad {
            check(b)?;
        }
        if !in_unit_interval(&lambda) {
            return Err(MdpError::LambdaOutOfRange {
                lambda: format_rational(&lambda),
            });
        }
        if actions.len() != num_states {
            return Err(MdpError::NoActionForState {
                state: actions.len().min(num_states.saturating_sub(1)),
            });
        }
        let mut validated: Vec<Vec<Action>> = Vec::with_capacity(num_states);
        for (state, state_actions) in actions.into_iter().enumerate() {
            if state_actions.is_empty() {
                return Err(MdpError::NoActionForState { state });
            }
            let mut list = Vec::with_capacity(state_actions.len());
            for (label, mut dist) in state_actions {
                dist.sort_by_key(|&(target, _)| target);
                let mut sum = Rational::zero();
                for window in dist.windows(2) {
                    if window[0].0 == window[1].0 {
                        return Err(MdpError::DuplicateTarget {
                            state,
                            label,
                            target: window[0].0,
                        });
                    }
                }
                for (target, prob) in &dist {
                    check(*target)?;
                    if !prob.is_positive() {
                        return Err(MdpError::NonPositiveProbability {
                            state,
                            label,
                            target: *target,
                            prob: format_rational(prob),
                        });
                    }
                    sum += prob;
                }
                if !sum.is_one() {
                    return Err(MdpError::ProbabilitySumMismatch {
                        state,
                        label,
                        sum: format_rational(&sum),
                    });
                }
                list.push(Action { label, dist });
            }
            validated.push(list);
        }
        Ok(Mdp {
            num_states,
            actions: validated,
            initial,
            bad: StateSet::from_indices(num_states, bad.iter().copied()),
            lambda,
        })
    }

    /// Number of states.
    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// The initial state `s_ι`.
    pub fn initial(&self) -> usize {
        self.initial
    }

    /// The bad-state set `β`.
    pub fn bad(&self) -> &StateSet {
        &self.bad
    }

    /// The threshold `λ`.
    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    /// Actions enabled in one state, in declaration order.
    pub fn actions(&self, state: usize) -> &[Action] {
        &self.actions[state]
    }

    /// The same MDP with a different threshold.
    pub fn with_lambda(&self, lambda: Rational) -> Result<Mdp, MdpError> {
        if !in_unit_interval(&lambda) {
            return Err(MdpError::LambdaOutOfRange {
                lambda: format_rational(&lambda),
            });
        }
        let mut out = self.clone();
        out.lambda = lambda;
        Ok(out)
    }

    /// Number of memoryless schedulers, saturating at `u128::MAX`.
    pub fn scheduler_count(&self) -> u128 {
        self.actions
            .iter()
            .fold(1u128, |acc, a| acc.saturating_mul(a.len() as u128))
    }
}

/// A memoryless scheduler: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scheduler(Vec<usize>);

impl Scheduler {
    /// Builds a scheduler from explicit action indices; panics if an index
    /// is not enabled (internal callers construct valid ones).
    pub fn new(mdp: &Mdp, choices: Vec<usize>) -> Self {
        assert_eq!(choices.len(), mdp.num_states(), "scheduler length mismatch");
        for (state, &choice) in choices.iter().enumerate() {
            assert!(
                choice < mdp.actions(state).len(),
                "action index {choice} not enabled in s{state}"
            );
        }
        Scheduler(choices)
    }

    /// The chosen action index for one state.
    pub fn action(&self, state: usize) -> usize {
        self.0[state]
    }

    /// The chosen action indices in state order.
    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    /// Renders as the list of chosen action labels, e.g. `[b,a,a,a]`.
    pub fn labels(&self, mdp: &Mdp) -> String {
        let mut out = String::from("[");
        for (state, &choice) in self.0.iter().enumerate() {
            if state > 0 {
                out.push(',');
            }
            out.push_str(mdp.actions(state)[choice].label());
        }
        out.push(']');
        out
    }
}

/// Expected next-step value of one action under `d`.
fn expectation(action: &Action, d: &Frame) -> Rational {
    let mut sum = Rational::zero();
    for (target, prob) in action.dist() {
        sum += prob * d.get(*target);
    }
    sum
}

/// The Bellman operator: 1 on bad states, otherwise the maximum expected
/// next-step value over enabled actions. Monotone; its least fixpoint at
/// `s_ι` is the maximum reachability probability.
pub fn bellman(mdp: &Mdp, d: &Frame) -> Frame {
    assert_eq!(d.len(), mdp.num_states(), "frame dimension mismatch");
    let values = (0..mdp.num_states())
        .map(|s| {
            if mdp.bad().contains(s) {
                Rational::one()
            } else {
                mdp.actions(s)
                    .iter()
                    .map(|a| expectation(a, d))
                    .max()
                    .expect("every state has an action")
            }
        })
        .collect();
    Frame::from_vec(values)
}

/// The Bellman operator of one fixed scheduler: 1 on bad states, otherwise
/// the expected value of the chosen action. Pointwise below [`bellman`].
pub fn bellman_sched(mdp: &Mdp, alpha: &Scheduler, d: &Frame) -> Frame {
    assert_eq!(d.len(), mdp.num_states(), "frame dimension mismatch");
    let values = (0..mdp.num_states())
        .map(|s| {
            if mdp.bad().contains(s) {
                Rational::one()
            } else {
                expectation(&mdp.actions(s)[alpha.action(s)], d)
            }
        })
        .collect();
    Frame::from_vec(values)
}

/// The pointwise maximizing scheduler at `d`, ties broken toward the
/// earlier declared action. Satisfies
/// `bellman_sched(mdp, argmax_scheduler(mdp, d), d) = bellman(mdp, d)`.
pub fn argmax_scheduler(mdp: &Mdp, d: &Frame) -> Scheduler {
    let choices = (0..mdp.num_states())
        .map(|s| {
            let mut best = 0usize;
            let mut best_value = expectation(&mdp.actions(s)[0], d);
            for (i, action) in mdp.actions(s).iter().enumerate().skip(1) {
                let value = expectation(action, d);
                if value > best_value {
                    best = i;
                    best_value = value;
                }
            }
            best
        })
        .collect();
    Scheduler(choices)
}

/// Pulls a half-space backwards through one scheduler step: the result is
/// exactly `{d | bellman_sched(mdp, alpha, d) ∈ hs}`. Coefficients of
/// non-bad states are pushed through their chosen distributions; bad
/// states contribute their coefficient (value pinned to 1) to the bound,
/// which may go negative — the empty set.
pub fn hs_transform(mdp: &Mdp, alpha: &Scheduler, hs: &HalfSpaceDownSet) -> HalfSpaceDownSet {
    assert_eq!(hs.dim(), mdp.num_states(), "half-space dimension mismatch");
    let mut coeffs = vec![Rational::zero(); mdp.num_states()];
    let mut bound = hs.bound().clone();
    for s in 0..mdp.num_states() {
        let r_s = &hs.coeffs()[s];
        if r_s.is_zero() {
            continue;
        }
        if mdp.bad().contains(s) {
            bound -= r_s;
        } else {
            for (target, prob) in mdp.actions(s)[alpha.action(s)].dist() {
                coeffs[*target] += r_s * prob;
            }
        }
    }
    HalfSpaceDownSet::new(coeffs, bound)
}

/// Which Conflict element [`conflict_z`] builds from the generator set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConflictZMode {
    /// Meet of the generators on constrained coordinates, the Bellman
    /// image on free ones.
    B,
    /// Like [`ConflictZMode::B`] but free coordinates are rounded up to
    /// `{0,1}` (zero stays zero, anything positive becomes one).
    ZeroOne,
}

/// The Conflict choice of the generator-based heuristics: with
/// `lower = bellman(x_prev)` (the zero frame when `x_prev` is the
/// sentinel) and `Z = enumerate_dominating_generators(hs, lower)`, takes
/// the coordinatewise meet of `Z` on constrained coordinates and `lower`
/// (optionally rounded) on free ones; falls back to `lower` itself when
/// `Z` is empty.
pub fn conflict_z(
    mdp: &Mdp,
    x_prev: &PosElem<Frame>,
    hs: &HalfSpaceDownSet,
    mode: ConflictZMode,
) -> Frame {
    let lower = match x_prev {
        PosElem::Sentinel => Frame::zeros(mdp.num_states()),
        PosElem::Elem(d) => bellman(mdp, d),
    };
    let generators = enumerate_dominating_generators(hs, &lower);
    if generators.is_empty() {
        return lower;
    }
    let values = (0..mdp.num_states())
        .map(|s| {
            if hs.coeffs()[s].is_zero() {
                let v = lower.get(s);
                match mode {
                    ConflictZMode::B => v.clone(),
                    ConflictZMode::ZeroOne => {
                        if v.is_zero() {
                            Rational::zero()
                        } else {
                            Rational::one()
                        }
                    }
                }
            } else {
                generators
                    .iter()
                    .map(|g| g.get(s))
                    .min()
                    .expect("generator set is nonempty")
                    .clone()
            }
        })
        .collect();
    Frame::from_vec(values)
}

/// Negative witness of the MDP instance: the half-space, plus the
/// scheduler that justified it when it came from a Decide step. Semantic
/// operations (equality, refutation) look only at the half-space.
#[derive(Debug, Clone)]
pub struct NegElem {
    /// The witness set.
    pub hs: HalfSpaceDownSet,
    /// The scheduler whose transform produced `hs`, for Decide elements.
    pub scheduler: Option<Scheduler>,
}

impl NegElem {
    /// A witness without a scheduler (Candidate elements).
    pub fn plain(hs: HalfSpaceDownSet) -> Self {
        NegElem { hs, scheduler: None }
    }
}

/// The down-set of the property frame: `{d | d(s_ι) ≤ λ}` as a half-space
/// with coefficient 1 at the initial state.
pub fn p_down(mdp: &Mdp) -> HalfSpaceDownSet {
    let mut coeffs = vec![Rational::zero(); mdp.num_states()];
    coeffs[mdp.initial()] = Rational::one();
    HalfSpaceDownSet::new(coeffs, mdp.lambda().clone())
}

/// The down-mode problem instance for one MDP.
#[derive(Debug, Clone, Copy)]
pub struct MdpInstance<'a> {
    mdp: &'a Mdp,
}

/// Wraps an MDP as a down-mode problem instance: `under_p(x) = x(s_ι) ≤ λ`,
/// guard image `bellman(x) ∈ Y`, refutation `Y_1 = ∅`.
pub fn mdp_instance(mdp: &Mdp) -> MdpInstance<'_> {
    MdpInstance { mdp }
}

impl<'a> MdpInstance<'a> {
    /// The underlying MDP.
    pub fn mdp(&self) -> &'a Mdp {
        self.mdp
    }
}

impl ProblemInstance for MdpInstance<'_> {
    type Pos = Frame;
    type Neg = NegElem;

    fn mode(&self) -> Mode {
        Mode::Down
    }

    fn pos_bot(&self) -> Frame {
        Frame::zeros(self.mdp.num_states())
    }

    fn pos_top(&self) -> Frame {
        Frame::ones(self.mdp.num_states())
    }

    fn pos_meet(&self, a: &Frame, b: &Frame) -> Frame {
        a.meet(b)
    }

    fn pos_leq(&self, a: &Frame, b: &Frame) -> bool {
        a.leq(b)
    }

    fn under_p(&self, x: &Frame) -> bool {
        x.get(self.mdp.initial()) <= self.mdp.lambda()
    }

    fn b_image_in(&self, x: &Frame, y: &NegElem) -> bool {
        y.hs.member(&bellman(self.mdp, x))
    }

    fn neg_contains_pos(&self, x: &Frame, y: &NegElem) -> bool {
        y.hs.member(x)
    }

    fn neg_refutes(&self, y1: &NegElem) -> bool {
        y1.hs.is_empty()
    }

    fn f_apply(&self, x: &Frame) -> Frame {
        bellman(self.mdp, x)
    }

    fn b_apply(&self, x: &Frame) -> Frame {
        bellman(self.mdp, x)
    }

    fn i_elem(&self) -> Frame {
        Frame::zeros(self.mdp.num_states())
    }

    fn p_elem(&self) -> Frame {
        let values = (0..self.mdp.num_states())
            .map(|s| {
                if s == self.mdp.initial() {
                    self.mdp.lambda().clone()
                } else {
                    Rational::one()
                }
            })
            .collect();
        Frame::from_vec(values)
    }

    fn neg_backward_ok(&self, lower: &NegElem, upper: &NegElem) -> InvStatus {
        match &lower.scheduler {
            Some(alpha) => {
                if hs_transform(self.mdp, alpha, &upper.hs).set_eq(&lower.hs) {
                    InvStatus::Holds
                } else {
                    InvStatus::Violated
                }
            }
            None => InvStatus::NotCheckable,
        }
    }

    fn neg_equal(&self, a: &NegElem, b: &NegElem) -> bool {
        a.hs.set_eq(&b.hs)
    }

    fn pos_to_string(&self, x: &Frame) -> String {
        x.to_string()
    }

    fn neg_to_string(&self, y: &NegElem) -> String {
        y.hs.to_string()
    }

    fn neg_witness_string(&self, y: &NegElem) -> Option<String> {
        y.scheduler.as_ref().map(|alpha| alpha.labels(self.mdp))
    }
}

/// Which of the three MDP heuristics to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdpHeuristicKind {
    /// Conflict takes the generator meet ([`ConflictZMode::B`]).
    CoB,
    /// Conflict takes the rounded generator meet ([`ConflictZMode::ZeroOne`]).
    Co01,
    /// Conflict takes the Bellman image of `x_{k-1}` directly.
    SimpleInit,
}

/// The MDP heuristics. All three share Candidate (the property down-set)
/// and Decide (the argmax-scheduler transform of `y_k`); they differ only
/// in the Conflict element.
#[derive(Debug, Clone, Copy)]
pub struct MdpHeuristic<'a> {
    mdp: &'a Mdp,
    kind: MdpHeuristicKind,
}

/// Builds one of the MDP heuristics.
pub fn mdp_heuristic(mdp: &Mdp, kind: MdpHeuristicKind) -> MdpHeuristic<'_> {
    MdpHeuristic { mdp, kind }
}

impl<'a> Heuristic<MdpInstance<'a>> for MdpHeuristic<'a> {
    fn name(&self) -> &'static str {
        match self.kind {
            MdpHeuristicKind::CoB => "hcob",
            MdpHeuristicKind::Co01 => "hco01",
            MdpHeuristicKind::SimpleInit => "mdp-simple-init",
        }
    }

    fn choose_candidate(
        &self,
        _inst: &MdpInstance<'a>,
        _state: &PdrState<Frame, NegElem>,
    ) -> Result<NegElem, HeuristicFailure> {
        Ok(NegElem::plain(p_down(self.mdp)))
    }

    fn choose_decide(
        &self,
        _inst: &MdpInstance<'a>,
        state: &PdrState<Frame, NegElem>,
    ) -> Result<NegElem, HeuristicFailure> {
        let k = state.index().k();
        let x_prev = match state.x(k - 1) {
            PosElem::Elem(d) => d.clone(),
            // Decide never fires below position 2 in down mode (at k = 1 a
            // nonempty, non-refuting y_1 contains the zero frame, so the
            // guard picks Conflict); the zero frame keeps this total anyway.
            PosElem::Sentinel => Frame::zeros(self.mdp.num_states()),
        };
        let alpha = argmax_scheduler(self.mdp, &x_prev);
        let hs = hs_transform(self.mdp, &alpha, &state.y(k).hs);
        Ok(NegElem {
            hs,
            scheduler: Some(alpha),
        })
    }

    fn choose_conflict(
        &self,
        _inst: &MdpInstance<'a>,
        state: &PdrState<Frame, NegElem>,
    ) -> Result<Frame, HeuristicFailure> {
        let k = state.index().k();
        let x_prev = state.x(k - 1);
        match self.kind {
            MdpHeuristicKind::CoB => {
                Ok(conflict_z(self.mdp, x_prev, &state.y(k).hs, ConflictZMode::B))
            }
            MdpHeuristicKind::Co01 => Ok(conflict_z(
                self.mdp,
                x_prev,
                &state.y(k).hs,
                ConflictZMode::ZeroOne,
            )),
            MdpHeuristicKind::SimpleInit => Ok(match x_prev {
                PosElem::Sentinel => Frame::zeros(self.mdp.num_states()),
                PosElem::Elem(d) => bellman(self.mdp, d),
            }),
        }
    }
}
