//! Exact reference solvers and seeded instance generators.
//!
//! These are the trusted answers the solver is tested against: a worklist
//! fixpoint for transition-system reachability and, for MDPs, brute-force
//! enumeration of all memoryless schedulers with an exact rational linear
//! solve per scheduler. Enumeration is exponential and capped — these are
//! desk-scale oracles, not production solvers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use num::{One, Zero};

use crate::mdp::{bellman, Frame, Mdp, Scheduler};
use crate::rational::{rat, Rational};
use crate::ts::{StateSet, TransitionSystem};

/// Default bound on the number of schedulers the MDP oracle will enumerate.
pub const DEFAULT_SCHEDULER_CAP: u128 = 1_000_000;

/// Errors from the MDP oracle.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    /// The MDP has more memoryless schedulers than the enumeration cap.
    #[error("{count} memoryless schedulers exceed the enumeration cap {cap}")]
    EnumerationCapExceeded { count: u128, cap: u128 },
}

/// States reachable from the initial set: the least fixpoint of
/// `X ↦ post(X) ∪ I`, by worklist iteration.
pub fn ts_reach(ts: &TransitionSystem) -> StateSet {
    let mut reach = ts.initial().clone();
    let mut worklist: Vec<usize> = reach.iter().collect();
    while let Some(s) = worklist.pop() {
        for &t in ts.successors(s) {
            if !reach.contains(t) {
                reach.insert(t);
                worklist.push(t);
            }
        }
    }
    reach
}

/// Reachable states plus the safety verdict `reachable ⊆ safe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsOracleResult {
    pub reachable: StateSet,
    pub safe: bool,
}

/// Runs [`ts_reach`] and compares against the safe set.
pub fn ts_oracle(ts: &TransitionSystem) -> TsOracleResult {
    let reachable = ts_reach(ts);
    let safe = reachable.is_subset(ts.safe());
    TsOracleResult { reachable, safe }
}

/// Exact maximum reachability data for an MDP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MdpOracleResult {
    /// Pointwise maximum reachability probability per state.
    pub values: Frame,
    /// The value at the initial state.
    pub max_prob: Rational,
    /// `max_prob ≤ λ`.
    pub verdict: bool,
    /// The first scheduler (in enumeration order) attaining `max_prob`
    /// at the initial state.
    pub witness_scheduler: Scheduler,
}

/// Solves a square linear system exactly by Gaussian elimination with
/// back substitution. Panics on a singular matrix; the reachability
/// systems handed to it are nonsingular once zero states are removed.
fn solve_linear(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Vec<Rational> {
    let m = b.len();
    for col in 0..m {
        let pivot = (col..m)
            .find(|&row| !a[row][col].is_zero())
            .expect("reachability system is nonsingular");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].clone();
        for row in col + 1..m {
            if a[row][col].is_zero() {
                continue;
            }
            let factor = &a[row][col] / &inv;
            for c in col..m {
                let delta = &factor * &a[col][c];
                a[row][c] -= delta;
            }
            let delta = &factor * &b[col];
            b[row] -= delta;
        }
    }
    let mut x = vec![Rational::zero(); m];
    for row in (0..m).rev() {
        let mut rhs = b[row].clone();
        for c in row + 1..m {
            rhs -= &a[row][c] * &x[c];
        }
        x[row] = rhs / &a[row][row];
    }
    x
}

/// Exact reachability probabilities of the Markov chain induced by one
/// scheduler. States that cannot reach the bad set in the induced graph
/// are pinned to 0 first (this is what makes the linear system pick the
/// least fixpoint), bad states to 1, and the rest are solved exactly.
pub fn scheduler_reach_values(mdp: &Mdp, alpha: &Scheduler) -> Frame {
    let n = mdp.num_states();
    let bad = mdp.bad();
    let mut can_reach = bad.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for s in 0..n {
            if can_reach.contains(s) {
                continue;
            }
            let hits = mdp.actions(s)[alpha.action(s)]
                .dist()
                .iter()
                .any(|(t, _)| can_reach.contains(*t));
            if hits {
                can_reach.insert(s);
                changed = true;
            }
        }
    }
    let unknowns: Vec<usize> = (0..n)
        .filter(|&s| can_reach.contains(s) && !bad.contains(s))
        .collect();
    let mut col_of = vec![usize::MAX; n];
    for (col, &s) in unknowns.iter().enumerate() {
        col_of[s] = col;
    }
    let m = unknowns.len();
    let mut a = vec![vec![Rational::zero(); m]; m];
    let mut b = vec![Rational::zero(); m];
    for (row, &s) in unknowns.iter().enumerate() {
        a[row][row] = Rational::one();
        for (t, p) in mdp.actions(s)[alpha.action(s)].dist() {
            if bad.contains(*t) {
                b[row] += p;
            } else if col_of[*t] != usize::MAX {
                a[row][col_of[*t]] -= p;
            }
        }
    }
    let x = solve_linear(a, b);
    Frame::from_vec(
        (0..n)
            .map(|s| {
                if bad.contains(s) {
                    Rational::one()
                } else if col_of[s] != usize::MAX {
                    x[col_of[s]].clone()
                } else {
                    Rational::zero()
                }
            })
            .collect(),
    )
}

/// Decodes an enumeration index into per-state action choices, state 0
/// most significant, so index order is lexicographic order on choices.
fn scheduler_from_index(counts: &[usize], mut index: u128) -> Vec<usize> {
    let mut choices = vec![0usize; counts.len()];
    for s in (0..counts.len()).rev() {
        choices[s] = (index % counts[s] as u128) as usize;
        index /= counts[s] as u128;
    }
    choices
}

/// One scheduler's contribution to the running maximum.
struct Best {
    values: Frame,
    at_init: Rational,
    index: u128,
    scheduler: Scheduler,
}

fn evaluate(mdp: &Mdp, counts: &[usize], index: u128) -> Best {
    let scheduler = Scheduler::new(mdp, scheduler_from_index(counts, index));
    let values = scheduler_reach_values(mdp, &scheduler);
    let at_init = values.get(mdp.initial()).clone();
    Best {
        values,
        at_init,
        index,
        scheduler,
    }
}

/// Combines two contributions: pointwise maximum of the value vectors,
/// and the lexicographically earliest scheduler attaining the larger
/// initial-state value. Associative and commutative, so the result does
/// not depend on reduction order.
fn merge(a: Best, b: Best) -> Best {
    let values = Frame::from_vec(
        a.values
            .entries()
            .iter()
            .zip(b.values.entries())
            .map(|(x, y)| x.max(y).clone())
            .collect(),
    );
    let (at_init, index, scheduler) = if b.at_init > a.at_init
        || (b.at_init == a.at_init && b.index < a.index)
    {
        (b.at_init, b.index, b.scheduler)
    } else {
        (a.at_init, a.index, a.scheduler)
    };
    Best {
        values,
        at_init,
        index,
        scheduler,
    }
}

fn finish(mdp: &Mdp, best: Best) -> MdpOracleResult {
    let verdict = best.at_init <= *mdp.lambda();
    MdpOracleResult {
        values: best.values,
        max_prob: best.at_init,
        verdict,
        witness_scheduler: best.scheduler,
    }
}

fn check_cap(mdp: &Mdp, cap: u128) -> Result<(u128, Vec<usize>), OracleError> {
    let count = mdp.scheduler_count();
    if count > cap {
        return Err(OracleError::EnumerationCapExceeded { count, cap });
    }
    let counts = (0..mdp.num_states())
        .map(|s| mdp.actions(s).len())
        .collect();
    Ok((count, counts))
}

/// Sequential scheduler enumeration with an explicit cap.
pub fn mdp_max_reach_exact_sequential_with_cap(
    mdp: &Mdp,
    cap: u128,
) -> Result<MdpOracleResult, OracleError> {
    let (count, counts) = check_cap(mdp, cap)?;
    let mut best = evaluate(mdp, &counts, 0);
    for index in 1..count {
        best = merge(best, evaluate(mdp, &counts, index));
    }
    Ok(finish(mdp, best))
}

/// Sequential scheduler enumeration with the default cap.
pub fn mdp_max_reach_exact_sequential(mdp: &Mdp) -> Result<MdpOracleResult, OracleError> {
    mdp_max_reach_exact_sequential_with_cap(mdp, DEFAULT_SCHEDULER_CAP)
}

/// Parallel scheduler enumeration with an explicit cap. The exact-max
/// reduction is order-independent, so this returns byte-identical
/// results to the sequential solver.
#[cfg(feature = "parallel")]
pub fn mdp_max_reach_exact_parallel_with_cap(
    mdp: &Mdp,
    cap: u128,
) -> Result<MdpOracleResult, OracleError> {
    use rayon::prelude::*;
    let (count, counts) = check_cap(mdp, cap)?;
    let best = (0..count as u64)
        .into_par_iter()
        .map(|index| evaluate(mdp, &counts, index as u128))
        .reduce_with(merge)
        .expect("at least one scheduler");
    Ok(finish(mdp, best))
}

/// Parallel scheduler enumeration with the default cap.
#[cfg(feature = "parallel")]
pub fn mdp_max_reach_exact_parallel(mdp: &Mdp) -> Result<MdpOracleResult, OracleError> {
    mdp_max_reach_exact_parallel_with_cap(mdp, DEFAULT_SCHEDULER_CAP)
}

/// Exact maximum reachability with an explicit enumeration cap, using
/// the parallel solver when compiled in.
pub fn mdp_max_reach_exact_with_cap(mdp: &Mdp, cap: u128) -> Result<MdpOracleResult, OracleError> {
    #[cfg(feature = "parallel")]
    {
        mdp_max_reach_exact_parallel_with_cap(mdp, cap)
    }
    #[cfg(not(feature = "parallel"))]
    {
        mdp_max_reach_exact_sequential_with_cap(mdp, cap)
    }
}

/// Exact maximum reachability probabilities over all memoryless
/// schedulers, with the default enumeration cap.
pub fn mdp_max_reach_exact(mdp: &Mdp) -> Result<MdpOracleResult, OracleError> {
    mdp_max_reach_exact_with_cap(mdp, DEFAULT_SCHEDULER_CAP)
}

/// Iterates the Bellman operator `steps` times from the zero frame. The
/// iterates increase monotonically and lower-bound the exact values.
pub fn value_iteration(mdp: &Mdp, steps: usize) -> Frame {
    let mut d = Frame::zeros(mdp.num_states());
    for _ in 0..steps {
        d = bellman(mdp, &d);
    }
    d
}

/// A seeded random transition system with 2..=max_states states,
/// expected out-degree about 2 (deadlocks allowed), a nonempty initial
/// set, and a safe set that is always a proper subset of the states.
pub fn random_ts(seed: u64, max_states: usize) -> TransitionSystem {
    assert!(max_states >= 2, "need at least two states");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_states);
    let density = (2.0 / n as f64).min(1.0);
    let mut edges = Vec::new();
    for s in 0..n {
        for t in 0..n {
            if rng.gen_bool(density) {
                edges.push((s, t));
            }
        }
    }
    let mut initial = Vec::new();
    for s in 0..n {
        if rng.gen_bool(0.25) {
            initial.push(s);
        }
    }
    if initial.is_empty() {
        initial.push(rng.gen_range(0..n));
    }
    let mut safe = Vec::new();
    for s in 0..n {
        if rng.gen_bool(0.75) {
            safe.push(s);
        }
    }
    if safe.len() == n {
        safe.remove(rng.gen_range(0..n));
    }
    TransitionSystem::new(n, &edges, &initial, &safe).expect("generated system is valid")
}

/// A seeded random MDP: up to `max_states` states and `max_actions`
/// actions per state, distributions composed of parts `k/d` with a
/// common denominator `d ≤ denom_bound` (so they sum to 1 exactly), at
/// least one bad state, and λ on the grid `{1/8, …, 7/8}`.
pub fn random_mdp(seed: u64, max_states: usize, max_actions: usize, denom_bound: u64) -> Mdp {
    assert!(max_states >= 1 && max_actions >= 1 && denom_bound >= 1);
    assert!(max_actions <= 26, "action labels are single letters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states);
    let mut actions = Vec::with_capacity(n);
    for _ in 0..n {
        let count = rng.gen_range(1..=max_actions);
        let mut list = Vec::with_capacity(count);
        for a in 0..count {
            let label = ((b'a' + a as u8) as char).to_string();
            let denom = rng.gen_range(1..=denom_bound) as i64;
            let mut parts: Vec<i64> = vec![0; n];
            let mut remaining = denom;
            while remaining > 0 {
                let t = rng.gen_range(0..n);
                let unit = rng.gen_range(1..=remaining);
                parts[t] += unit;
                remaining -= unit;
            }
            let dist = parts
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(t, &k)| (t, rat(k, denom)))
                .collect();
            list.push((label, dist));
        }
        actions.push(list);
    }
    let initial = rng.gen_range(0..n);
    let mut bad = Vec::new();
    for s in 0..n {
        if rng.gen_bool(0.2) {
            bad.push(s);
        }
    }
    if bad.is_empty() {
        bad.push(rng.gen_range(0..n));
    }
    let lambda = rat(rng.gen_range(1..=7), 8);
    Mdp::new(n, actions, initial, &bad, lambda).expect("generated MDP is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::tests::{example3, example6, frame};
    use crate::rational::{in_unit_interval, rat_int};
    use crate::ts::tests::fig1;

    #[test]
    fn reach_on_fig1_stops_at_s4() {
        let reach = ts_reach(&fig1());
        assert_eq!(reach, StateSet::from_indices(7, [0, 1, 2, 3, 4]));
        assert!(ts_oracle(&fig1()).safe);
    }

    #[test]
    fn reach_trivia() {
        // No initial states: nothing is reachable.
        let ts = TransitionSystem::new(2, &[(0, 1)], &[], &[0, 1]).unwrap();
        assert!(ts_reach(&ts).is_empty());
        // Complete graph: everything is.
        let complete =
            TransitionSystem::new(3, &[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2), (2, 0), (2, 1), (2, 2)], &[1], &[0]).unwrap();
        assert_eq!(ts_reach(&complete), StateSet::full(3));
        let oracle = ts_oracle(&complete);
        assert!(!oracle.safe);
    }

    #[test]
    fn oracle_refutes_the_first_mdp() {
        let result = mdp_max_reach_exact(&example3()).unwrap();
        assert_eq!(result.max_prob, rat_int(1));
        assert!(!result.verdict);
        // The all-first-action scheduler already reaches almost surely
        // and comes first in enumeration order.
        assert_eq!(result.witness_scheduler.choices(), &[0, 0, 0, 0]);
    }

    #[test]
    fn oracle_confirms_the_second_mdp() {
        let mdp = example6();
        let result = mdp_max_reach_exact(&mdp).unwrap();
        assert_eq!(result.max_prob, rat(2, 5));
        assert!(result.verdict);
        assert_eq!(result.witness_scheduler.labels(&mdp), "[b,a,a,a]");
        assert_eq!(
            result.values,
            frame(&[rat(2, 5), rat(4, 5), rat_int(0), rat_int(1)])
        );
    }

    #[test]
    fn unreachable_bad_set_gives_zero() {
        let mdp = Mdp::new(
            2,
            vec![
                vec![("a".to_string(), vec![(0, rat_int(1))])],
                vec![("a".to_string(), vec![(1, rat_int(1))])],
            ],
            0,
            &[1],
            rat(1, 8),
        )
        .unwrap();
        let result = mdp_max_reach_exact(&mdp).unwrap();
        assert_eq!(result.max_prob, rat_int(0));
        assert!(result.verdict);
    }

    #[test]
    fn cap_is_enforced() {
        let err = mdp_max_reach_exact_with_cap(&example3(), 1).unwrap_err();
        assert_eq!(
            err,
            OracleError::EnumerationCapExceeded { count: 2, cap: 1 }
        );
    }

    #[test]
    fn sequential_and_dispatcher_agree() {
        for mdp in [example3(), example6(), random_mdp(7, 4, 2, 8)] {
            let seq = mdp_max_reach_exact_sequential(&mdp).unwrap();
            let any = mdp_max_reach_exact(&mdp).unwrap();
            assert_eq!(seq, any);
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        for seed in 0..20 {
            let mdp = random_mdp(seed, 4, 2, 8);
            let seq = mdp_max_reach_exact_sequential(&mdp).unwrap();
            let par = mdp_max_reach_exact_parallel(&mdp).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn value_iteration_lower_bounds_the_oracle() {
        for mdp in [example3(), example6()] {
            let exact = mdp_max_reach_exact(&mdp).unwrap();
            let mut previous = Frame::zeros(mdp.num_states());
            for steps in [1, 5, 50, 200] {
                let vi = value_iteration(&mdp, steps);
                assert!(previous.leq(&vi), "iterates must increase");
                assert!(vi.leq(&exact.values), "iterates must stay below exact");
                previous = vi;
            }
        }
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        assert_eq!(random_mdp(1, 4, 2, 8), random_mdp(1, 4, 2, 8));
        let a = random_ts(1, 12);
        let b = random_ts(1, 12);
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.initial(), b.initial());
        for seed in 0..500 {
            // Construction inside the generators re-runs full validation;
            // spot-check the promised extras on top.
            let mdp = random_mdp(seed, 4, 2, 8);
            let lambda = mdp.lambda().clone();
            assert!(in_unit_interval(&lambda) && !lambda.is_zero() && !lambda.is_one());
            assert!(mdp.bad().count() >= 1);
            let ts = random_ts(seed, 12);
            assert!(ts.initial().count() >= 1);
            assert!(ts.safe().count() < ts.num_states());
        }
    }
}
