//! Law-level properties: algebraic facts the solver's soundness rests on,
//! exercised over randomized inputs with fixed seeds.

use adjoint_pdr::engine::{solve, SolveOptions};
use adjoint_pdr::mdp::halfspace::{enumerate_dominating_generators, HalfSpaceDownSet};
use adjoint_pdr::mdp::{
    argmax_scheduler, bellman, bellman_sched, hs_transform, mdp_heuristic, mdp_instance, Frame,
    MdpHeuristicKind, Scheduler,
};
use adjoint_pdr::model_io::{parse_mdp, parse_ts, serialize_mdp, serialize_ts};
use adjoint_pdr::oracle::{
    mdp_max_reach_exact, random_mdp, random_ts, ts_oracle, value_iteration,
};
use adjoint_pdr::rational::{format_rational, parse_rational, rat, rat_int, Rational};
use adjoint_pdr::ts::{heuristic_simple, ts_instance, ConflictMode, StateSet, TransitionSystem};
use adjoint_pdr::Verdict;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

proptest! {
    #[test]
    fn rational_formatting_round_trips(num in -10_000i64..=10_000, den in 1i64..=10_000) {
        let value = rat(num, den);
        let text = format_rational(&value);
        prop_assert_eq!(parse_rational(&text).unwrap(), value);
    }

    #[test]
    fn state_set_ordering_is_antisymmetric(a in any::<u16>(), b in any::<u16>()) {
        let set = |bits: u16| {
            StateSet::from_indices(16, (0..16).filter(|i| bits >> i & 1 == 1))
        };
        let (a, b) = (set(a), set(b));
        if a.is_subset(&b) && b.is_subset(&a) {
            prop_assert_eq!(&a, &b);
        }
        prop_assert!(a.intersect(&b).is_subset(&a.union(&b)));
    }
}

fn random_subset(rng: &mut StdRng, n: usize) -> StateSet {
    StateSet::from_indices(n, (0..n).filter(|_| rng.gen_bool(0.5)))
}

/// `post ⊣ pre_tilde` is the adjunction everything else leans on:
/// `post(X) ⊆ Y` iff `X ⊆ pre_tilde(Y)`.
#[test]
fn ts_forward_and_backward_images_are_adjoint() {
    let mut rng = StdRng::seed_from_u64(11);
    for seed in 0..1000 {
        let ts = random_ts(seed, 10);
        let n = ts.num_states();
        let x = random_subset(&mut rng, n);
        let y = random_subset(&mut rng, n);
        assert_eq!(
            ts.post(&x).is_subset(&y),
            x.is_subset(&ts.pre_tilde(&y)),
            "adjunction failed on seed {seed}",
        );
    }
}

#[test]
fn ts_images_are_monotone() {
    let mut rng = StdRng::seed_from_u64(12);
    for seed in 0..500 {
        let ts = random_ts(seed, 10);
        let n = ts.num_states();
        let small = random_subset(&mut rng, n);
        let big = small.union(&random_subset(&mut rng, n));
        assert!(ts.post(&small).is_subset(&ts.post(&big)));
        assert!(ts.pre_tilde(&small).is_subset(&ts.pre_tilde(&big)));
        assert!(ts
            .post_with_initial(&small)
            .is_subset(&ts.post_with_initial(&big)));
    }
}

fn random_frame(rng: &mut StdRng, n: usize) -> Frame {
    Frame::from_vec(
        (0..n)
            .map(|_| {
                let den = rng.gen_range(1..=8i64);
                rat(rng.gen_range(0..=den), den)
            })
            .collect(),
    )
}

#[test]
fn bellman_is_monotone_and_dominates_every_scheduler() {
    let mut rng = StdRng::seed_from_u64(13);
    for seed in 0..300 {
        let mdp = random_mdp(seed, 4, 2, 8);
        let n = mdp.num_states();
        let low = random_frame(&mut rng, n);
        let high = low.meet(&random_frame(&mut rng, n));
        // `high` is actually the lower of the two after a meet; order them.
        let (low, high) = (high, low);
        assert!(bellman(&mdp, &low).leq(&bellman(&mdp, &high)));

        let frame = random_frame(&mut rng, n);
        let best = bellman(&mdp, &frame);
        let choices: Vec<usize> = (0..n)
            .map(|s| rng.gen_range(0..mdp.actions(s).len()))
            .collect();
        let alpha = Scheduler::new(&mdp, choices);
        assert!(bellman_sched(&mdp, &alpha, &frame).leq(&best));
        let greedy = argmax_scheduler(&mdp, &frame);
        assert_eq!(bellman_sched(&mdp, &greedy, &frame), best);
    }
}

fn random_halfspace(rng: &mut StdRng, n: usize) -> HalfSpaceDownSet {
    let coeffs: Vec<Rational> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.4) {
                rat_int(0)
            } else {
                let den = rng.gen_range(1..=4i64);
                rat(rng.gen_range(1..=2 * den), den)
            }
        })
        .collect();
    let den = rng.gen_range(1..=4i64);
    let bound = rat(rng.gen_range(-1..=3 * den), den);
    HalfSpaceDownSet::new(coeffs, bound)
}

/// The transformed half-space is the exact Bellman preimage: membership
/// after one scheduler step is membership of the transform.
#[test]
fn scheduler_transform_is_an_exact_preimage() {
    let mut rng = StdRng::seed_from_u64(14);
    for seed in 0..250 {
        let mdp = random_mdp(seed, 4, 2, 8);
        let n = mdp.num_states();
        let hs = random_halfspace(&mut rng, n);
        let choices: Vec<usize> = (0..n)
            .map(|s| rng.gen_range(0..mdp.actions(s).len()))
            .collect();
        let alpha = Scheduler::new(&mdp, choices);
        let transformed = hs_transform(&mdp, &alpha, &hs);
        for _ in 0..4 {
            let d = random_frame(&mut rng, n);
            assert_eq!(
                transformed.member(&d),
                hs.member(&bellman_sched(&mdp, &alpha, &d)),
                "transform not a preimage on seed {seed}",
            );
        }
    }
}

#[test]
fn generator_enumeration_is_deterministic_and_sound() {
    let mut rng = StdRng::seed_from_u64(15);
    for _ in 0..500 {
        let n = rng.gen_range(1..=4usize);
        let hs = random_halfspace(&mut rng, n);
        let mut lower = random_frame(&mut rng, n);
        if !hs.member(&lower) {
            lower = Frame::zeros(n);
        }
        let generators = enumerate_dominating_generators(&hs, &lower);
        assert_eq!(generators, enumerate_dominating_generators(&hs, &lower));
        if !hs.member(&lower) {
            continue;
        }
        for g in &generators {
            assert!(hs.member(g), "generator escapes its half-space");
            assert!(lower.leq(g), "generator fails to dominate the floor");
        }
        let mut sorted = generators.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), generators.len(), "duplicate generators");
    }
}

#[test]
fn half_space_inclusion_agrees_with_sampled_membership() {
    let mut rng = StdRng::seed_from_u64(16);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4usize);
        let a = random_halfspace(&mut rng, n);
        let b = random_halfspace(&mut rng, n);
        if a.is_subset(&b) {
            for _ in 0..8 {
                let d = random_frame(&mut rng, n);
                if a.member(&d) {
                    assert!(b.member(&d), "inclusion contradicted by a sample");
                }
            }
        }
    }
}

#[test]
fn value_iteration_approaches_the_oracle_from_below() {
    for seed in 0..100 {
        let mdp = random_mdp(seed, 4, 2, 8);
        let exact = mdp_max_reach_exact(&mdp).unwrap();
        let mut previous = value_iteration(&mdp, 0);
        for steps in 1..=6 {
            let current = value_iteration(&mdp, steps);
            assert!(previous.leq(&current), "iteration not monotone");
            assert!(current.leq(&exact.values), "iteration overshoots");
            previous = current;
        }
    }
}

#[test]
fn model_generators_are_deterministic_and_well_formed() {
    for seed in 0..500 {
        let ts = random_ts(seed, 12);
        assert_eq!(ts, random_ts(seed, 12));
        assert!(ts.num_states() >= 2);
        let mdp = random_mdp(seed, 4, 2, 8);
        assert_eq!(mdp, random_mdp(seed, 4, 2, 8));
        assert!(!mdp.bad().iter().next().is_none(), "bad set must be nonempty");
    }
}

#[test]
fn serialization_round_trips_on_random_models() {
    for seed in 0..200 {
        let ts = random_ts(seed, 12);
        assert_eq!(parse_ts(&serialize_ts(&ts)).unwrap(), ts);
        let mdp = random_mdp(seed, 4, 2, 8);
        assert_eq!(parse_mdp(&serialize_mdp(&mdp)).unwrap(), mdp);
    }
}

fn solve_ts(ts: &TransitionSystem, mode: ConflictMode) -> Verdict<StateSet, StateSet> {
    let inst = ts_instance(ts);
    let heuristic = heuristic_simple(ts, mode);
    let options = SolveOptions {
        checked: true,
        retain_states: false,
    };
    let (verdict, _) = solve(&inst, &heuristic, 100_000, options).unwrap();
    verdict
}

/// Both simple heuristics decide every small system, and agree with the
/// reachability oracle.
#[test]
fn ts_verdicts_match_the_reachability_oracle() {
    for seed in 0..200 {
        let ts = random_ts(seed, 10);
        let safe = ts_oracle(&ts).safe;
        for mode in [ConflictMode::Initial, ConflictMode::Final] {
            match solve_ts(&ts, mode) {
                Verdict::Holds { .. } => assert!(safe, "false positive on seed {seed}"),
                Verdict::Refuted { .. } => assert!(!safe, "false negative on seed {seed}"),
                Verdict::Unknown(reason) => {
                    panic!("simple heuristics must decide finite systems: {reason:?}")
                }
            }
        }
    }
}

/// Checked mode never flags the bundled MDP heuristics, and any verdict
/// they reach matches the exact oracle.
#[test]
fn mdp_verdicts_match_the_exact_oracle_when_they_terminate() {
    for seed in 0..150 {
        let mdp = random_mdp(seed, 4, 2, 8);
        let inst = mdp_instance(&mdp);
        let exact = mdp_max_reach_exact(&mdp).unwrap();
        for kind in [MdpHeuristicKind::CoB, MdpHeuristicKind::Co01] {
            let heuristic = mdp_heuristic(&mdp, kind);
            let options = SolveOptions {
                checked: true,
                retain_states: false,
            };
            let (verdict, _) = solve(&inst, &heuristic, 3000, options)
                .unwrap_or_else(|e| panic!("seed {seed} under {kind:?}: {e}"));
            match verdict {
                Verdict::Holds { .. } => assert!(exact.verdict, "seed {seed} {kind:?}"),
                Verdict::Refuted { .. } => assert!(!exact.verdict, "seed {seed} {kind:?}"),
                Verdict::Unknown(_) => {}
            }
        }
    }
}
