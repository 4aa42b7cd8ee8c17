use consensus_dyn::algorithms::{transition, AgentState, AlgorithmKind, Message, RoundContext, UpdateOptions, UpdateRule};
use consensus_dyn::geometry::convex_hull;
use consensus_dyn::graphs::{AgentId, CommGraph, PatternSpec};
use consensus_dyn::simulator::{run, step, Configuration, RunSpec};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rule_for(d: usize, pick: usize) -> UpdateRule {
    let rules: Vec<UpdateRule> = UpdateRule::ALL
        .iter()
        .copied()
        .filter(|r| match r {
            UpdateRule::MidPoint => d == 1,
            UpdateRule::ComponentMidPoint => d <= 2,
            _ => true,
        })
        .collect();
    rules[pick % rules.len()]
}

fn pattern_for(pick: usize, n: usize) -> PatternSpec {
    match pick % 4 {
        0 => PatternSpec::RandomNonsplit { seed: None },
        1 => PatternSpec::RandomRooted { seed: None },
        2 => PatternSpec::RotatingStar,
        _ => PatternSpec::Fixed {
            graph: CommGraph::from_edges(n, &(1..n).map(|p| (p - 1, p)).collect::<Vec<_>>()).unwrap(),
        },
    }
}

/// Any valid (rule, amortization, pattern) combination, with a short horizon.
fn any_spec() -> impl Strategy<Value = RunSpec> {
    (2usize..=8, 1usize..=4, 0usize..5, any::<bool>(), 0usize..4, any::<u64>()).prop_map(
        |(n, d, pick, amortized, pat, seed)| {
            let rule = rule_for(d, pick);
            let kind = if amortized && rule != UpdateRule::EqualNeighbor {
                AlgorithmKind::amortized(rule)
            } else {
                AlgorithmKind::plain(rule)
            };
            let mut spec = RunSpec::new(n, d, kind, pattern_for(pat, n), seed);
            spec.max_rounds = 40;
            spec
        },
    )
}

/// Checks `T(eps) <= bound` and that the bound applies at all.
fn within_bound(spec: &RunSpec) -> Result<(), TestCaseError> {
    let tr = run(spec).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let bound = tr.metrics.bound_t.ok_or_else(|| TestCaseError::fail("no bound for a matching scenario"))?;
    let t = tr.metrics.t_eps.rounds().ok_or_else(|| TestCaseError::fail("not converged"))?;
    prop_assert!(t <= bound, "T = {t} > {bound}");
    Ok(())
}

fn rooted_amortized(rule: UpdateRule, n: usize, d: usize, pat: usize, seed: u64, eps: f64) -> RunSpec {
    let pattern = match pat % 3 {
        0 => PatternSpec::RandomRooted { seed: None },
        1 => PatternSpec::RotatingStar,
        _ => pattern_for(3, n),
    };
    let mut spec = RunSpec::new(n, d, AlgorithmKind::amortized(rule), pattern, seed);
    spec.epsilon = eps;
    spec
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn identical_specs_replay_identically(spec in any_spec()) {
        let a = run(&spec).unwrap();
        let b = run(&spec).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hulls_are_nested(spec in any_spec()) {
        let tr = run(&spec).unwrap();
        for w in tr.configs.windows(2) {
            let hull = convex_hull(&w[0].positions).unwrap();
            for (p, x) in w[1].positions.iter().enumerate() {
                prop_assert!(hull.contains_default(x), "round {} agent {p} left the hull", w[1].round);
            }
        }
    }

    /// The run stops on the per-component criterion, which bounds the final
    /// Euclidean spread by eps times the norm of the initial ranges.
    #[test]
    fn converged_runs_agree(spec in any_spec()) {
        let mut spec = spec;
        spec.max_rounds = 2_000;
        spec.epsilon = 1e-4;
        let tr = run(&spec).unwrap();
        if tr.metrics.converged {
            let init: f64 = tr.deltas[0].iter().map(|v| v * v).sum::<f64>().sqrt();
            let fin = tr.final_config().diameter();
            prop_assert!(fin <= spec.epsilon * init * (1.0 + 1e-9), "{fin} > eps * {init}");
        }
    }

    /// Evaluating agents in any order within a round gives the same round.
    #[test]
    fn agent_order_is_irrelevant(spec in any_spec(), seed in any::<u64>()) {
        let pattern = spec.build_pattern().unwrap();
        let mut config = spec.initial_configuration().unwrap();
        let mut states: Vec<AgentState> =
            config.positions.iter().map(|x| AgentState::new(spec.algorithm.rule, x.clone())).collect();
        let opts = UpdateOptions::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 1..=6u64 {
            let g = pattern.graph(t);
            let (want, want_states) = step(&config, &g, &states, &spec.algorithm, &opts).unwrap();
            let outbox: Vec<Message> = states.iter().enumerate().map(|(p, s)| s.message(AgentId(p))).collect();
            let mut order: Vec<usize> = (0..spec.n).collect();
            order.shuffle(&mut rng);
            let mut next: Vec<Option<AgentState>> = vec![None; spec.n];
            for p in order {
                let received: Vec<Message> =
                    g.in_neighbors(AgentId(p)).into_iter().map(|q| outbox[q.0].clone()).collect();
                let ctx = RoundContext { agent: AgentId(p), round: t, n: spec.n };
                next[p] = Some(transition(&spec.algorithm, &opts, &ctx, &states[p], &received).unwrap());
            }
            let next: Vec<AgentState> = next.into_iter().map(Option::unwrap).collect();
            prop_assert_eq!(&next, &want_states);
            let positions = next.iter().map(|s| s.x.clone()).collect();
            prop_assert_eq!(&Configuration::new(positions, t).unwrap(), &want);
            config = want;
            states = want_states;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn nonsplit_runs_meet_bound(n in 2usize..=12, d in 1usize..=4, pick in 0usize..5, seed in any::<u64>()) {
        let rule = rule_for(d, pick);
        let mut spec = RunSpec::new(n, d, AlgorithmKind::plain(rule), PatternSpec::RandomNonsplit { seed: None }, seed);
        spec.epsilon = 1e-4;
        within_bound(&spec)?;
    }

    #[test]
    fn rooted_amortized_midpoint_meets_bound(n in 2usize..=12, pat in 0usize..3, seed in any::<u64>()) {
        within_bound(&rooted_amortized(UpdateRule::MidPoint, n, 1, pat, seed, 1e-4))?;
    }

    #[test]
    fn rooted_amortized_extreme_point_meets_bound(n in 2usize..=12, d in 1usize..=4, pat in 0usize..3, seed in any::<u64>()) {
        within_bound(&rooted_amortized(UpdateRule::ExtremePoint, n, d, pat, seed, 1e-3))?;
    }

    #[test]
    fn rooted_amortized_centroid_meets_bound(n in 2usize..=12, d in 1usize..=4, pat in 0usize..3, seed in any::<u64>()) {
        within_bound(&rooted_amortized(UpdateRule::Centroid, n, d, pat, seed, 1e-2))?;
    }
}
