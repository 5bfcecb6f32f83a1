//! Runtime checking of the thirteen per-state solver invariants, plus the
//! no-repeat detector.
//!
//! Every invariant is evaluated per retained state and reported as
//! held / violated / not checkable — never thrown. "Not checkable" covers
//! formulas that mention the adjoint `g` on instances that do not have
//! one (down mode), and negative-sequence pullback relations whose exact
//! check the representation cannot express without a recorded witness.

use std::collections::HashMap;

use crate::engine::{pe_b_apply, pe_f_apply, pe_in_neg, pe_leq, pe_under_p};
use crate::instance::{InvStatus, ProblemInstance};
use crate::state::{Mode, PdrState, PosElem, Trace};

/// The thirteen per-state invariants, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvariantId {
    /// `x_0` is the bottom slot (the lattice bottom, or the sentinel in
    /// down mode).
    I0,
    /// `1 <= k <= n` and both sequences have the lengths the index claims.
    I1,
    /// The positive chain is increasing.
    I2,
    /// The initial element is below `x_1`.
    P1,
    /// `x_{n-2}` is under the property.
    P2,
    /// `f(x_j) ⊑ x_{j+1}` along the chain.
    P3,
    /// `x_j ⊑ g(x_{j+1})` along the chain (needs the adjoint).
    P3a,
    /// The property element belongs to the outermost negative witness.
    N1,
    /// Each negative witness pulls its successor one step backwards.
    N2,
    /// `x_j` stays outside `y_j` wherever both are defined.
    PN,
    /// The chain is bracketed by the iterated initial chain from below
    /// and (given the adjoint) the iterated final chain from above.
    A1,
    /// Forward images of `x_{j-1}` stay under the property long enough:
    /// `f^{n-1-j}(x_{j-1}) ⊑ p` (the adjoint transpose of
    /// `x_{j-1} ⊑ g^{n-1-j}(p)`, which stays checkable without `g`).
    A2,
    /// The iterated final chain of the property lies inside the negative
    /// witnesses: `g^{n-1-j}(p) ⊑ y_j` (needs the adjoint).
    A3,
}

impl InvariantId {
    /// All thirteen, in report order.
    pub const ALL: [InvariantId; 13] = [
        InvariantId::I0,
        InvariantId::I1,
        InvariantId::I2,
        InvariantId::P1,
        InvariantId::P2,
        InvariantId::P3,
        InvariantId::P3a,
        InvariantId::N1,
        InvariantId::N2,
        InvariantId::PN,
        InvariantId::A1,
        InvariantId::A2,
        InvariantId::A3,
    ];

    /// The conventional short name.
    pub fn name(self) -> &'static str {
        match self {
            InvariantId::I0 => "I0",
            InvariantId::I1 => "I1",
            InvariantId::I2 => "I2",
            InvariantId::P1 => "P1",
            InvariantId::P2 => "P2",
            InvariantId::P3 => "P3",
            InvariantId::P3a => "P3a",
            InvariantId::N1 => "N1",
            InvariantId::N2 => "N2",
            InvariantId::PN => "PN",
            InvariantId::A1 => "A1",
            InvariantId::A2 => "A2",
            InvariantId::A3 => "A3",
        }
    }

    fn slot(self) -> usize {
        InvariantId::ALL
            .iter()
            .position(|id| *id == self)
            .expect("listed in ALL")
    }
}

/// Evaluation of all thirteen invariants at one state.
#[derive(Debug, Clone)]
pub struct StateInvariants {
    statuses: [InvStatus; 13],
}

impl StateInvariants {
    /// The status of one invariant.
    pub fn status(&self, id: InvariantId) -> InvStatus {
        self.statuses[id.slot()]
    }

    /// The invariants this state violates.
    pub fn violations(&self) -> Vec<InvariantId> {
        InvariantId::ALL
            .into_iter()
            .filter(|id| self.status(*id) == InvStatus::Violated)
            .collect()
    }
}

/// Per-state evaluations for a whole run, in state order.
#[derive(Debug, Clone)]
pub struct InvariantReport {
    pub rows: Vec<StateInvariants>,
}

impl InvariantReport {
    /// True iff no invariant is violated at any state.
    pub fn all_hold(&self) -> bool {
        self.first_violation().is_none()
    }

    /// The earliest violation as (state position, invariant), scanning
    /// states first and the invariant order second.
    pub fn first_violation(&self) -> Option<(usize, InvariantId)> {
        for (pos, row) in self.rows.iter().enumerate() {
            for id in InvariantId::ALL {
                if row.status(id) == InvStatus::Violated {
                    return Some((pos, id));
                }
            }
        }
        None
    }

    /// One line per invariant with held/violated/unchecked state counts.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for id in InvariantId::ALL {
            let mut held = 0usize;
            let mut violated = 0usize;
            let mut unchecked = 0usize;
            for row in &self.rows {
                match row.status(id) {
                    InvStatus::Holds => held += 1,
                    InvStatus::Violated => violated += 1,
                    InvStatus::NotCheckable => unchecked += 1,
                }
            }
            out.push_str(&format!(
                "{}: {} held, {} violated, {} unchecked\n",
                id.name(),
                held,
                violated,
                unchecked
            ));
        }
        out
    }
}

fn bool_status(ok: bool) -> InvStatus {
    if ok {
        InvStatus::Holds
    } else {
        InvStatus::Violated
    }
}

/// Evaluates all thirteen invariants at one state.
pub fn check_state_invariants<I: ProblemInstance>(
    inst: &I,
    state: &PdrState<I::Pos, I::Neg>,
) -> StateInvariants {
    let n = state.index().n();
    let k = state.index().k();
    let mut statuses = [InvStatus::Holds; 13];
    let mut set = |id: InvariantId, status: InvStatus| statuses[id.slot()] = status;

    // I0: the bottom slot.
    let i0 = match (inst.mode(), state.x(0)) {
        (Mode::Plain, PosElem::Elem(x)) => {
            let bot = inst.pos_bot();
            inst.pos_leq(x, &bot) && inst.pos_leq(&bot, x)
        }
        (Mode::Down, PosElem::Sentinel) => true,
        _ => false,
    };
    set(InvariantId::I0, bool_status(i0));

    // I1: index bounds and sequence lengths.
    let i1 = k >= 1
        && k <= n
        && state.positive().len() == n
        && state.negative().len() == n - k;
    set(InvariantId::I1, bool_status(i1));

    // I2: the chain is increasing.
    let i2 = (0..n - 1).all(|j| pe_leq(inst, state.x(j), state.x(j + 1)));
    set(InvariantId::I2, bool_status(i2));

    // P1: i ⊑ x_1.
    let p1 = match state.x(1) {
        PosElem::Elem(x1) => inst.pos_leq(&inst.i_elem(), x1),
        PosElem::Sentinel => false,
    };
    set(InvariantId::P1, bool_status(p1));

    // P2: x_{n-2} ⊑ p.
    set(InvariantId::P2, bool_status(pe_under_p(inst, state.x(n - 2))));

    // P3: f(x_j) ⊑ x_{j+1}.
    let p3 = (0..n - 1).all(|j| match state.x(j + 1) {
        PosElem::Elem(next) => inst.pos_leq(&pe_f_apply(inst, state.x(j)), next),
        PosElem::Sentinel => false,
    });
    set(InvariantId::P3, bool_status(p3));

    // P3a: x_j ⊑ g(x_{j+1}), when the instance has g.
    let p3a = (0..n - 1).try_fold(true, |acc, j| {
        let next = state.x(j + 1).as_elem()?;
        let g_next = inst.g_apply(next)?;
        let ok = match state.x(j) {
            PosElem::Sentinel => true,
            PosElem::Elem(x) => inst.pos_leq(x, &g_next),
        };
        Some(acc && ok)
    });
    set(
        InvariantId::P3a,
        p3a.map_or(InvStatus::NotCheckable, bool_status),
    );

    // N1: p belongs to y_{n-1} whenever the negative sequence is nonempty.
    let n1 = if k == n {
        InvStatus::Holds
    } else {
        bool_status(inst.neg_contains_pos(&inst.p_elem(), state.y(n - 1)))
    };
    set(InvariantId::N1, n1);

    // N2: each negative witness pulls its successor backwards.
    let mut n2 = InvStatus::Holds;
    for j in k..n.saturating_sub(1) {
        if j + 1 > n - 1 {
            break;
        }
        n2 = n2.and(inst.neg_backward_ok(state.y(j), state.y(j + 1)));
    }
    set(InvariantId::N2, n2);

    // PN: x_j stays outside y_j.
    let pn = (k..n).all(|j| !pe_in_neg(inst, state.x(j), state.y(j)));
    set(InvariantId::PN, bool_status(pn));

    // A1: iterated initial chain from below; iterated final chain from
    // above when g exists.
    let mut lower = match inst.mode() {
        Mode::Plain => PosElem::Elem(inst.pos_bot()),
        Mode::Down => PosElem::Sentinel,
    };
    let mut a1_left = true;
    for j in 0..n {
        if !pe_leq(inst, &lower, state.x(j)) {
            a1_left = false;
            break;
        }
        if j + 1 < n {
            lower = PosElem::Elem(pe_b_apply(inst, &lower));
        }
    }
    let a1_right = (|| {
        let p = inst.p_elem();
        // t_m = (g ⊓ p)^m(⊤), filled up to m = n - 1.
        let mut finals = vec![inst.pos_top()];
        for m in 0..n - 1 {
            let g_prev = inst.g_apply(&finals[m])?;
            finals.push(inst.pos_meet(&g_prev, &p));
        }
        let ok = (0..n).all(|j| match state.x(j) {
            PosElem::Sentinel => true,
            PosElem::Elem(x) => inst.pos_leq(x, &finals[n - 1 - j]),
        });
        Some(ok)
    })();
    let a1 = bool_status(a1_left).and(a1_right.map_or(InvStatus::NotCheckable, bool_status));
    set(InvariantId::A1, a1);

    // A2: f^{n-1-j}(x_{j-1}) ⊑ p for j in [1, n-1].
    let a2 = (1..n).all(|j| {
        let mut value = state.x(j - 1).clone();
        for _ in 0..n - 1 - j {
            value = PosElem::Elem(pe_f_apply(inst, &value));
        }
        pe_under_p(inst, &value)
    });
    set(InvariantId::A2, bool_status(a2));

    // A3: g^{n-1-j}(p) ⊑ y_j for j in [k, n-1], when g exists.
    let a3 = (|| {
        // g_m chain up to m = n - 1 - k.
        let mut chain = vec![inst.p_elem()];
        for m in 0..n.saturating_sub(k + 1) {
            chain.push(inst.g_apply(&chain[m])?);
        }
        let ok = (k..n).all(|j| inst.neg_contains_pos(&chain[n - 1 - j], state.y(j)));
        Some(ok)
    })();
    set(
        InvariantId::A3,
        a3.map_or(InvStatus::NotCheckable, bool_status),
    );

    StateInvariants { statuses }
}

/// Evaluates every retained state of a run; `None` when the trace was
/// recorded without state retention.
pub fn check_invariants<I: ProblemInstance>(
    inst: &I,
    trace: &Trace<I::Pos, I::Neg>,
) -> Option<InvariantReport> {
    let states = trace.states.as_ref()?;
    Some(InvariantReport {
        rows: states
            .iter()
            .map(|state| check_state_invariants(inst, state))
            .collect(),
    })
}

fn serialize_positive<I: ProblemInstance>(
    inst: &I,
    state: &PdrState<I::Pos, I::Neg>,
) -> String {
    let mut out = String::new();
    for slot in state.positive() {
        match slot {
            PosElem::Sentinel => out.push('*'),
            PosElem::Elem(x) => out.push_str(&inst.pos_to_string(x)),
        }
        out.push('|');
    }
    out
}

fn states_equal<I: ProblemInstance>(
    inst: &I,
    a: &PdrState<I::Pos, I::Neg>,
    b: &PdrState<I::Pos, I::Neg>,
) -> bool {
    a.index() == b.index()
        && a.positive()
            .iter()
            .zip(b.positive())
            .all(|(x, y)| pe_leq(inst, x, y) && pe_leq(inst, y, x))
        && a.negative()
            .iter()
            .zip(b.negative())
            .all(|(x, y)| inst.neg_equal(x, y))
}

/// Looks for two equal full states (index, positive chain, and negative
/// sequence up to semantic equality) among the retained states; `None`
/// when none repeat — which correct runs guarantee — or when the trace
/// has no retained states. Returns the first pair in scan order: smallest
/// later position, then smallest earlier one.
pub fn detect_repeat<I: ProblemInstance>(
    inst: &I,
    trace: &Trace<I::Pos, I::Neg>,
) -> Option<(usize, usize)> {
    let states = trace.states.as_ref()?;
    let mut buckets: HashMap<(usize, usize, String), Vec<usize>> = HashMap::new();
    for (j, state) in states.iter().enumerate() {
        let key = (
            state.index().n(),
            state.index().k(),
            serialize_positive(inst, state),
        );
        let bucket = buckets.entry(key).or_default();
        for &i in bucket.iter() {
            if states_equal(inst, &states[i], state) {
                return Some((i, j));
            }
        }
        bucket.push(j);
    }
    None
}
