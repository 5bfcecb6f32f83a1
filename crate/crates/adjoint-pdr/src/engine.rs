//! The four-rule solver loop.
//!
//! A run starts from [`init_state`] and repeatedly classifies the current
//! state ([`classify`]): either some chain position has closed (`Holds`),
//! the innermost negative witness reaches the initial element (`Refuted`),
//! or exactly one of the four rules applies and [`apply_rule`] executes it
//! with an element chosen by the heuristic. [`solve`] drives this to a
//! verdict under a step budget and re-verifies the verdict before
//! returning it.

use crate::instance::{Heuristic, InvStatus, ProblemInstance};
use crate::state::{
    Index, Mode, PdrState, PosElem, Rule, Trace, TraceEvent, UnknownReason, Verdict,
};

/// Errors that abort a run, as opposed to ending it with a verdict.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    /// The step budget must be at least 1.
    #[error("step budget must be at least 1")]
    InvalidBudget,
    /// In checked mode, a heuristic's choice broke its rule's side
    /// condition.
    #[error("heuristic `{heuristic}` violated a {rule} side condition: {constraint}")]
    HeuristicViolation {
        heuristic: String,
        rule: Rule,
        constraint: String,
    },
    /// A heuristic declined to produce an element. [`solve`] converts this
    /// into `Unknown(HeuristicFailure)`.
    #[error("heuristic `{heuristic}` gave up during {rule}: {reason}")]
    HeuristicGaveUp {
        heuristic: String,
        rule: Rule,
        reason: String,
    },
    /// A conclusive verdict failed its final re-verification. Indicates a
    /// defect in the problem instance, not in the caller's input.
    #[error("verdict failed its final soundness check: {detail}")]
    SoundnessCheck { detail: String },
}

/// Order on chain slots: the sentinel sits below every slot, and no
/// ordinary element sits below the sentinel.
pub(crate) fn pe_leq<I: ProblemInstance>(
    inst: &I,
    a: &PosElem<I::Pos>,
    b: &PosElem<I::Pos>,
) -> bool {
    match (a, b) {
        (PosElem::Sentinel, _) => true,
        (PosElem::Elem(_), PosElem::Sentinel) => false,
        (PosElem::Elem(x), PosElem::Elem(y)) => inst.pos_leq(x, y),
    }
}

/// Meet of a chain slot with an ordinary element; the sentinel absorbs.
pub(crate) fn pe_meet<I: ProblemInstance>(
    inst: &I,
    slot: &PosElem<I::Pos>,
    z: &I::Pos,
) -> PosElem<I::Pos> {
    match slot {
        PosElem::Sentinel => PosElem::Sentinel,
        PosElem::Elem(x) => PosElem::Elem(inst.pos_meet(x, z)),
    }
}

/// Forward image of a chain slot; the sentinel maps to bottom.
pub(crate) fn pe_f_apply<I: ProblemInstance>(inst: &I, slot: &PosElem<I::Pos>) -> I::Pos {
    match slot {
        PosElem::Sentinel => inst.pos_bot(),
        PosElem::Elem(x) => inst.f_apply(x),
    }
}

/// Backward-map image of a chain slot; `b(x_0)` is fixed to bottom.
pub(crate) fn pe_b_apply<I: ProblemInstance>(inst: &I, slot: &PosElem<I::Pos>) -> I::Pos {
    match slot {
        PosElem::Sentinel => inst.pos_bot(),
        PosElem::Elem(x) => inst.b_apply(x),
    }
}

/// Property check on a chain slot; the sentinel is under everything.
pub(crate) fn pe_under_p<I: ProblemInstance>(inst: &I, slot: &PosElem<I::Pos>) -> bool {
    match slot {
        PosElem::Sentinel => true,
        PosElem::Elem(x) => inst.under_p(x),
    }
}

/// The Decide/Conflict guard `b(x_{k-1})` inside `y_k`; at the sentinel
/// the backward image is bottom, so the guard asks whether `y_k` contains
/// the bottom element.
pub(crate) fn pe_guard<I: ProblemInstance>(
    inst: &I,
    slot: &PosElem<I::Pos>,
    y: &I::Neg,
) -> bool {
    match slot {
        PosElem::Sentinel => inst.neg_contains_pos(&inst.pos_bot(), y),
        PosElem::Elem(x) => inst.b_image_in(x, y),
    }
}

/// Negative membership of a chain slot; the sentinel belongs to every
/// witness.
pub(crate) fn pe_in_neg<I: ProblemInstance>(
    inst: &I,
    slot: &PosElem<I::Pos>,
    y: &I::Neg,
) -> bool {
    match slot {
        PosElem::Sentinel => true,
        PosElem::Elem(x) => inst.neg_contains_pos(x, y),
    }
}

/// The starting state: `(⊥, ⊤ ‖ ε)_{2,2}` in plain mode, and
/// `(ø, ⊥, ⊤ ‖ ε)_{3,3}` in down mode with the sentinel `ø` pinned at
/// position 0.
pub fn init_state<I: ProblemInstance>(inst: &I) -> PdrState<I::Pos, I::Neg> {
    let positive = match inst.mode() {
        Mode::Plain => vec![
            PosElem::Elem(inst.pos_bot()),
            PosElem::Elem(inst.pos_top()),
        ],
        Mode::Down => vec![
            PosElem::Sentinel,
            PosElem::Elem(inst.pos_bot()),
            PosElem::Elem(inst.pos_top()),
        ],
    };
    let n = positive.len();
    PdrState::from_parts_unchecked(positive, Vec::new(), Index::new(n, n).expect("n >= 2"))
}

/// What [`classify`] decided about a state.
#[derive(Debug, Clone)]
pub enum Classification<P, N> {
    /// The run is over; the verdict still gets re-verified by [`solve`].
    Conclusive(Verdict<P, N>),
    /// Exactly this rule's guard holds.
    Apply(Rule),
}

/// Total case analysis of a state. Checks for a conclusive answer first —
/// `Holds` (some `x_{j+1} ⊑ x_j`; the witness is the smallest such
/// position) before `Refuted` (`k = 1` and `y_1` excludes the initial
/// element) — and otherwise returns the unique rule whose guard holds:
/// with no negative sequence, Unfold when the frontier is under the
/// property and Candidate when it is not; with one, Conflict when
/// `b(x_{k-1})` lands inside `y_k` and Decide when it does not.
pub fn classify<I: ProblemInstance>(
    inst: &I,
    state: &PdrState<I::Pos, I::Neg>,
) -> Classification<I::Pos, I::Neg> {
    let n = state.index().n();
    let k = state.index().k();
    // No ordinary element is below the sentinel, so in down mode this scan
    // cannot fire at j = 0.
    for j in 0..n - 1 {
        if pe_leq(inst, state.x(j + 1), state.x(j)) {
            let witness = state
                .x(j + 1)
                .as_elem()
                .cloned()
                .expect("positions past 0 hold ordinary elements");
            return Classification::Conclusive(Verdict::Holds {
                witness,
                position: j + 1,
            });
        }
    }
    if k == 1 && k < n && inst.neg_refutes(state.y(1)) {
        return Classification::Conclusive(Verdict::Refuted {
            negative: state.negative().to_vec(),
        });
    }
    if k == n {
        if pe_under_p(inst, state.x(n - 1)) {
            Classification::Apply(Rule::Unfold)
        } else {
            Classification::Apply(Rule::Candidate)
        }
    } else if pe_guard(inst, state.x(k - 1), state.y(k)) {
        Classification::Apply(Rule::Conflict)
    } else {
        // A non-conclusive state at k = 1 always conflicts: b(x_0) is
        // bottom, and a non-refuting y_1 contains the bottom element.
        debug_assert!(k > 1, "Decide fired at k = 1");
        Classification::Apply(Rule::Decide)
    }
}

/// A rule application: the successor state plus the heuristic's choice
/// serialized for the trace (`None` for Unfold), and any extra witness
/// payload the instance attaches to the chosen element.
#[derive(Debug, Clone)]
pub struct Applied<P, N> {
    pub state: PdrState<P, N>,
    pub chosen: Option<String>,
    pub witness: Option<String>,
}

/// Applies one rule, asking the heuristic for the element it needs. The
/// caller must have classified the state to this rule. In checked mode
/// the choice is validated against the rule's side conditions:
/// Candidate needs `x_{n-1} ∉ Z` and `p ∈ Z`; Decide needs `x_{k-1} ∉ Z`
/// and the instance's backward-step witness check against `y_k`; Conflict
/// needs `z ∈ y_k` and `b(x_{k-1} ⊓ z) ⊑ z`.
pub fn apply_rule<I: ProblemInstance, H: Heuristic<I>>(
    inst: &I,
    heuristic: &H,
    state: &PdrState<I::Pos, I::Neg>,
    rule: Rule,
    checked: bool,
) -> Result<Applied<I::Pos, I::Neg>, EngineError> {
    let n = state.index().n();
    let k = state.index().k();
    let gave_up = |e: crate::instance::HeuristicFailure| EngineError::HeuristicGaveUp {
        heuristic: heuristic.name().to_string(),
        rule,
        reason: e.0,
    };
    let violation = |constraint: &str| EngineError::HeuristicViolation {
        heuristic: heuristic.name().to_string(),
        rule,
        constraint: constraint.to_string(),
    };
    match rule {
        Rule::Unfold => {
            let mut positive = state.positive().to_vec();
            positive.push(PosElem::Elem(inst.pos_top()));
            let index = Index::new(n + 1, n + 1).expect("k = n stays valid");
            Ok(Applied {
                state: PdrState::from_parts_unchecked(positive, Vec::new(), index),
                chosen: None,
                witness: None,
            })
        }
        Rule::Candidate => {
            let z = heuristic.choose_candidate(inst, state).map_err(gave_up)?;
            if checked {
                if pe_in_neg(inst, state.x(n - 1), &z) {
                    return Err(violation("x_{n-1} must lie outside the chosen witness"));
                }
                if !inst.neg_contains_pos(&inst.p_elem(), &z) {
                    return Err(violation("the chosen witness must contain p"));
                }
            }
            let chosen = Some(inst.neg_to_string(&z));
            let witness = inst.neg_witness_string(&z);
            let index = Index::new(n, n - 1).expect("n >= 2");
            Ok(Applied {
                state: PdrState::from_parts_unchecked(state.positive().to_vec(), vec![z], index),
                chosen,
                witness,
            })
        }
        Rule::Decide => {
            let z = heuristic.choose_decide(inst, state).map_err(gave_up)?;
            if checked {
                if pe_in_neg(inst, state.x(k - 1), &z) {
                    return Err(violation("x_{k-1} must lie outside the chosen witness"));
                }
                if inst.neg_backward_ok(&z, state.y(k)) == InvStatus::Violated {
                    return Err(violation("the chosen witness must pull y_k backwards"));
                }
            }
            let chosen = Some(inst.neg_to_string(&z));
            let witness = inst.neg_witness_string(&z);
            let mut negative = Vec::with_capacity(state.negative().len() + 1);
            negative.push(z);
            negative.extend_from_slice(state.negative());
            let index = Index::new(n, k - 1).expect("Decide never fires at k = 1");
            Ok(Applied {
                state: PdrState::from_parts_unchecked(state.positive().to_vec(), negative, index),
                chosen,
                witness,
            })
        }
        Rule::Conflict => {
            let z = heuristic.choose_conflict(inst, state).map_err(gave_up)?;
            if checked {
                if !inst.neg_contains_pos(&z, state.y(k)) {
                    return Err(violation("the strengthening must lie inside y_k"));
                }
                let image = pe_b_apply(inst, &pe_meet(inst, state.x(k - 1), &z));
                if !inst.pos_leq(&image, &z) {
                    return Err(violation(
                        "the strengthening must absorb the backward step from x_{k-1}",
                    ));
                }
            }
            let chosen = Some(inst.pos_to_string(&z));
            let positive: Vec<PosElem<I::Pos>> = state
                .positive()
                .iter()
                .enumerate()
                .map(|(j, slot)| {
                    if j <= k {
                        pe_meet(inst, slot, &z)
                    } else {
                        slot.clone()
                    }
                })
                .collect();
            let negative = state.negative()[1..].to_vec();
            let index = Index::new(n, k + 1).expect("k < n before Conflict");
            Ok(Applied {
                state: PdrState::from_parts_unchecked(positive, negative, index),
                chosen,
                witness: None,
            })
        }
    }
}

/// Knobs for [`solve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Validate every heuristic choice against its rule's side conditions
    /// and abort with [`EngineError::HeuristicViolation`] on a breach.
    pub checked: bool,
    /// Keep every intermediate state in the trace — required by the
    /// invariant checker and the repeat detector.
    pub retain_states: bool,
}

fn verify_verdict<I: ProblemInstance>(
    inst: &I,
    verdict: &Verdict<I::Pos, I::Neg>,
) -> Result<(), EngineError> {
    match verdict {
        Verdict::Holds { witness, .. } => {
            if !inst.pos_leq(&inst.b_apply(witness), witness) {
                return Err(EngineError::SoundnessCheck {
                    detail: "holds witness is not closed under the backward step".to_string(),
                });
            }
            if !inst.under_p(witness) {
                return Err(EngineError::SoundnessCheck {
                    detail: "holds witness escapes the property".to_string(),
                });
            }
            Ok(())
        }
        Verdict::Refuted { negative } => {
            if negative.first().is_some_and(|y1| inst.neg_refutes(y1)) {
                Ok(())
            } else {
                Err(EngineError::SoundnessCheck {
                    detail: "refutation's first witness does not reach the initial element"
                        .to_string(),
                })
            }
        }
        Verdict::Unknown(_) => Ok(()),
    }
}

/// Runs the solver until a verdict or until `budget` rule applications
/// have been spent (classification is free, so a state that is already
/// conclusive right at the budget boundary still yields its verdict).
/// `Holds` and `Refuted` are re-verified through the instance before
/// being returned; a heuristic that gives up ends the run with
/// `Unknown(HeuristicFailure)`.
pub fn solve<I: ProblemInstance, H: Heuristic<I>>(
    inst: &I,
    heuristic: &H,
    budget: usize,
    options: SolveOptions,
) -> Result<(Verdict<I::Pos, I::Neg>, Trace<I::Pos, I::Neg>), EngineError> {
    if budget == 0 {
        return Err(EngineError::InvalidBudget);
    }
    let mut state = init_state(inst);
    let mut events = Vec::new();
    let mut states = options.retain_states.then(|| vec![state.clone()]);
    let mut used = 0usize;
    loop {
        match classify(inst, &state) {
            Classification::Conclusive(verdict) => {
                verify_verdict(inst, &verdict)?;
                return Ok((verdict, Trace { events, states }));
            }
            Classification::Apply(rule) => {
                if used == budget {
                    return Ok((
                        Verdict::Unknown(UnknownReason::BudgetExhausted),
                        Trace { events, states },
                    ));
                }
                let before = (state.index().n(), state.index().k());
                let applied = match apply_rule(inst, heuristic, &state, rule, options.checked) {
                    Ok(applied) => applied,
                    Err(EngineError::HeuristicGaveUp { .. }) => {
                        return Ok((
                            Verdict::Unknown(UnknownReason::HeuristicFailure),
                            Trace { events, states },
                        ));
                    }
                    Err(other) => return Err(other),
                };
                used += 1;
                state = applied.state;
                events.push(TraceEvent {
                    step: used,
                    rule,
                    index_before: before,
                    index_after: (state.index().n(), state.index().k()),
                    chosen: applied.chosen,
                    witness: applied.witness,
                });
                if let Some(states) = &mut states {
                    states.push(state.clone());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::HeuristicFailure;
    use crate::mdp::tests::{example3, example6, frame};
    use crate::mdp::{mdp_heuristic, mdp_instance, Frame, MdpHeuristicKind, NegElem};
    use crate::rational::{rat, rat_int};
    use crate::ts::tests::fig1;
    use crate::ts::{heuristic_simple, ts_instance, ConflictMode, StateSet};

    #[test]
    fn init_state_shapes() {
        let ts = fig1();
        let plain = init_state(&ts_instance(&ts));
        assert_eq!(plain.index().n(), 2);
        assert_eq!(plain.index().k(), 2);
        assert_eq!(plain.x(0), &PosElem::Elem(StateSet::empty(7)));
        assert_eq!(plain.x(1), &PosElem::Elem(StateSet::full(7)));
        assert!(plain.negative().is_empty());

        let mdp = example6();
        let down = init_state(&mdp_instance(&mdp));
        assert_eq!(down.index().n(), 3);
        assert_eq!(down.index().k(), 3);
        assert!(down.x(0).is_sentinel());
        assert_eq!(down.x(1), &PosElem::Elem(Frame::zeros(4)));
        assert_eq!(down.x(2), &PosElem::Elem(Frame::ones(4)));
    }

    #[test]
    fn classify_initial_states() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        // The full state set is not inside the safe set, so the first move
        // is Candidate.
        assert!(matches!(
            classify(&inst, &init_state(&inst)),
            Classification::Apply(Rule::Candidate)
        ));
    }

    #[test]
    fn classify_unfolds_when_frontier_is_under_p() {
        let mdp = example6();
        let inst = mdp_instance(&mdp);
        let chain = vec![
            PosElem::Sentinel,
            PosElem::Elem(Frame::zeros(4)),
            PosElem::Elem(frame(&[rat(2, 5), rat_int(0), rat_int(0), rat_int(1)])),
            PosElem::Elem(frame(&[rat(2, 5), rat(4, 5), rat_int(0), rat_int(1)])),
            PosElem::Elem(frame(&[rat(2, 5), rat_int(1), rat_int(0), rat_int(1)])),
        ];
        let state = PdrState::new(chain, Vec::<NegElem>::new(), Index::new(5, 5).unwrap(), |a, b| {
            pe_leq(&inst, a, b)
        })
        .unwrap();
        assert!(matches!(
            classify(&inst, &state),
            Classification::Apply(Rule::Unfold)
        ));
    }

    #[test]
    fn classify_holds_when_the_chain_closes() {
        let mdp = example6();
        let inst = mdp_instance(&mdp);
        let closed = frame(&[rat(2, 5), rat(4, 5), rat_int(0), rat_int(1)]);
        let chain = vec![
            PosElem::Sentinel,
            PosElem::Elem(Frame::zeros(4)),
            PosElem::Elem(frame(&[rat(2, 5), rat_int(0), rat_int(0), rat_int(1)])),
            PosElem::Elem(closed.clone()),
            PosElem::Elem(closed.clone()),
        ];
        let state = PdrState::new(chain, Vec::<NegElem>::new(), Index::new(5, 5).unwrap(), |a, b| {
            pe_leq(&inst, a, b)
        })
        .unwrap();
        match classify(&inst, &state) {
            Classification::Conclusive(Verdict::Holds { witness, position }) => {
                assert_eq!(witness, closed);
                assert_eq!(position, 4);
            }
            other => panic!("expected Holds, got {other:?}"),
        }
    }

    #[test]
    fn candidate_seeds_the_negative_sequence() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let heuristic = heuristic_simple(&ts, ConflictMode::Initial);
        let applied =
            apply_rule(&inst, &heuristic, &init_state(&inst), Rule::Candidate, true).unwrap();
        assert_eq!(applied.state.index().n(), 2);
        assert_eq!(applied.state.index().k(), 1);
        assert_eq!(applied.state.y(1), ts.safe());
        assert_eq!(applied.chosen.as_deref(), Some("{s0,s1,s2,s3,s4,s5}"));
    }

    #[test]
    fn conflict_meets_the_chain_and_pops_the_witness() {
        let mdp = example6();
        let inst = mdp_instance(&mdp);
        let heuristic = mdp_heuristic(&mdp, MdpHeuristicKind::CoB);
        // (ø, 0⃗, 1⃗ ‖ p↓)_{3,2} — right after the first Candidate.
        let chain = vec![
            PosElem::Sentinel,
            PosElem::Elem(Frame::zeros(4)),
            PosElem::Elem(Frame::ones(4)),
        ];
        let state = PdrState::new(
            chain,
            vec![NegElem::plain(crate::mdp::p_down(&mdp))],
            Index::new(3, 2).unwrap(),
            |a, b| pe_leq(&inst, a, b),
        )
        .unwrap();
        assert!(matches!(
            classify(&inst, &state),
            Classification::Apply(Rule::Conflict)
        ));
        let applied = apply_rule(&inst, &heuristic, &state, Rule::Conflict, true).unwrap();
        assert_eq!(applied.state.index().n(), 3);
        assert_eq!(applied.state.index().k(), 3);
        assert!(applied.state.negative().is_empty());
        assert_eq!(
            applied.state.x(2),
            &PosElem::Elem(frame(&[rat(2, 5), rat_int(0), rat_int(0), rat_int(1)]))
        );
        assert_eq!(applied.state.x(1), &PosElem::Elem(Frame::zeros(4)));
        assert!(applied.state.x(0).is_sentinel());
        assert_eq!(applied.chosen.as_deref(), Some("[2/5,0,0,1]"));
    }

    #[test]
    fn unfold_appends_top() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let heuristic = heuristic_simple(&ts, ConflictMode::Initial);
        let reach = StateSet::from_indices(7, [0, 1, 2, 3, 4]);
        let chain = vec![
            PosElem::Elem(StateSet::empty(7)),
            PosElem::Elem(reach.clone()),
        ];
        let state = PdrState::new(chain, Vec::new(), Index::new(2, 2).unwrap(), |a, b| {
            pe_leq(&inst, a, b)
        })
        .unwrap();
        assert!(matches!(
            classify(&inst, &state),
            Classification::Apply(Rule::Unfold)
        ));
        let applied = apply_rule(&inst, &heuristic, &state, Rule::Unfold, true).unwrap();
        assert_eq!(applied.state.index().n(), 3);
        assert_eq!(applied.state.index().k(), 3);
        assert_eq!(applied.state.x(2), &PosElem::Elem(StateSet::full(7)));
        assert!(applied.chosen.is_none());
    }

    #[test]
    fn solve_fig1_with_both_simple_heuristics() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let options = SolveOptions {
            checked: true,
            retain_states: true,
        };
        let reach = StateSet::from_indices(7, [0, 1, 2, 3, 4]);

        let initial = heuristic_simple(&ts, ConflictMode::Initial);
        let (verdict, trace) = solve(&inst, &initial, 1000, options).unwrap();
        match verdict {
            Verdict::Holds { witness, position } => {
                assert_eq!(witness, reach);
                assert_eq!(position, 5);
            }
            other => panic!("expected Holds, got {other:?}"),
        }
        assert_eq!(trace.events.len(), 14);

        let final_mode = heuristic_simple(&ts, ConflictMode::Final);
        let (verdict, trace) = solve(&inst, &final_mode, 1000, options).unwrap();
        match verdict {
            Verdict::Holds { witness, position } => {
                assert_eq!(witness, reach);
                assert_eq!(position, 2);
            }
            other => panic!("expected Holds, got {other:?}"),
        }
        assert_eq!(trace.events.len(), 11);
    }

    #[test]
    fn solve_example6_step_counts() {
        let mdp = example6();
        let inst = mdp_instance(&mdp);
        let options = SolveOptions {
            checked: true,
            retain_states: true,
        };
        let expected = frame(&[rat(2, 5), rat(4, 5), rat_int(0), rat_int(1)]);

        let hcob = mdp_heuristic(&mdp, MdpHeuristicKind::CoB);
        let (verdict, trace) = solve(&inst, &hcob, 100, options).unwrap();
        match verdict {
            Verdict::Holds { witness, .. } => assert_eq!(witness, expected),
            other => panic!("expected Holds, got {other:?}"),
        }
        assert_eq!(trace.events.len(), 8);

        let hco01 = mdp_heuristic(&mdp, MdpHeuristicKind::Co01);
        let (verdict, trace) = solve(&inst, &hco01, 100, options).unwrap();
        assert_eq!(verdict.tag(), "holds");
        assert_eq!(trace.events.len(), 14);

        let simple = mdp_heuristic(&mdp, MdpHeuristicKind::SimpleInit);
        let (verdict, trace) = solve(&inst, &simple, 50, options).unwrap();
        assert!(matches!(
            verdict,
            Verdict::Unknown(UnknownReason::BudgetExhausted)
        ));
        assert_eq!(trace.events.len(), 50);
    }

    #[test]
    fn solve_example3_is_refuted_under_both_heuristics() {
        let mdp = example3();
        let inst = mdp_instance(&mdp);
        let options = SolveOptions {
            checked: true,
            retain_states: true,
        };
        for kind in [MdpHeuristicKind::CoB, MdpHeuristicKind::Co01] {
            let heuristic = mdp_heuristic(&mdp, kind);
            let (verdict, _) = solve(&inst, &heuristic, 1000, options).unwrap();
            match verdict {
                Verdict::Refuted { negative } => {
                    assert!(inst.neg_refutes(&negative[0]));
                }
                other => panic!("expected Refuted, got {other:?}"),
            }
        }
    }

    #[test]
    fn zero_budget_is_rejected() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let heuristic = heuristic_simple(&ts, ConflictMode::Initial);
        assert!(matches!(
            solve(&inst, &heuristic, 0, SolveOptions::default()),
            Err(EngineError::InvalidBudget)
        ));
    }

    #[test]
    fn tiny_budget_exhausts() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let heuristic = heuristic_simple(&ts, ConflictMode::Initial);
        let (verdict, trace) = solve(&inst, &heuristic, 1, SolveOptions::default()).unwrap();
        assert!(matches!(
            verdict,
            Verdict::Unknown(UnknownReason::BudgetExhausted)
        ));
        assert_eq!(trace.events.len(), 1);
        assert!(trace.states.is_none());
    }

    /// A heuristic that proposes the full state set as a Candidate — which
    /// always contains the frontier, breaking the side condition.
    struct BadCandidate;

    impl<'a> Heuristic<crate::ts::TsInstance<'a>> for BadCandidate {
        fn name(&self) -> &'static str {
            "bad-candidate"
        }

        fn choose_candidate(
            &self,
            inst: &crate::ts::TsInstance<'a>,
            _state: &PdrState<StateSet, StateSet>,
        ) -> Result<StateSet, HeuristicFailure> {
            Ok(inst.pos_top())
        }

        fn choose_decide(
            &self,
            _inst: &crate::ts::TsInstance<'a>,
            _state: &PdrState<StateSet, StateSet>,
        ) -> Result<StateSet, HeuristicFailure> {
            Err(HeuristicFailure("no decide".to_string()))
        }

        fn choose_conflict(
            &self,
            _inst: &crate::ts::TsInstance<'a>,
            _state: &PdrState<StateSet, StateSet>,
        ) -> Result<StateSet, HeuristicFailure> {
            Err(HeuristicFailure("no conflict".to_string()))
        }
    }

    #[test]
    fn checked_mode_rejects_illegal_choices() {
        let ts = fig1();
        let inst = ts_instance(&ts);
        let checked = SolveOptions {
            checked: true,
            retain_states: false,
        };
        let err = solve(&inst, &BadCandidate, 10, checked).unwrap_err();
        assert!(matches!(
            err,
            EngineError::HeuristicViolation {
                rule: Rule::Candidate,
                ..
            }
        ));
        // Unchecked, the same choice is accepted and the run later stalls
        // on the giving-up Decide/Conflict stubs.
        let (verdict, _) = solve(&inst, &BadCandidate, 10, SolveOptions::default()).unwrap();
        assert!(matches!(
            verdict,
            Verdict::Unknown(UnknownReason::HeuristicFailure)
        ));
    }
}
