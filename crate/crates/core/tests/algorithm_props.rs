use consensus_dyn::algorithms::{
    centroid_update, component_midpoint_update, equal_neighbor_update, extreme_point_update,
    midpoint_update_1d, transition, AgentState, AlgorithmKind, Gathered, RoundContext, UpdateOptions,
    UpdateRule,
};
use consensus_dyn::geometry::{component_extrema, convex_hull, Point};
use consensus_dyn::graphs::AgentId;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn update(rule: UpdateRule, received: &[Point]) -> Point {
    let d = received[0].dim();
    match rule {
        UpdateRule::EqualNeighbor => equal_neighbor_update(received).unwrap(),
        UpdateRule::MidPoint => {
            let (lo, hi) = component_extrema(received).unwrap();
            Point::new(vec![midpoint_update_1d(lo[0], hi[0])]).unwrap()
        }
        UpdateRule::ComponentMidPoint => component_midpoint_update(received).unwrap(),
        UpdateRule::ExtremePoint => extreme_point_update(received, d).unwrap(),
        UpdateRule::Centroid => centroid_update(received).unwrap(),
    }
}

fn applicable(d: usize) -> Vec<UpdateRule> {
    UpdateRule::ALL
        .iter()
        .copied()
        .filter(|r| match r {
            UpdateRule::MidPoint => d == 1,
            UpdateRule::ComponentMidPoint => d <= 2,
            _ => true,
        })
        .collect()
}

/// A rule valid in dimension `d` together with a received set in `R^d`.
fn scenario() -> impl Strategy<Value = (UpdateRule, Vec<Point>)> {
    (1usize..=4).prop_flat_map(|d| {
        let rules = applicable(d);
        (
            (0..rules.len()).prop_map(move |i| rules[i]),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..=9)
                .prop_map(|v| v.into_iter().map(|c| Point::new(c).unwrap()).collect::<Vec<_>>()),
        )
    })
}

fn max_abs(pts: &[Point]) -> f64 {
    pts.iter()
        .flat_map(|p| p.coords().iter())
        .fold(1.0f64, |m, c| m.max(c.abs()))
}

fn close(a: &Point, b: &Point, tol: f64) -> bool {
    a.coords().iter().zip(b.coords()).all(|(x, y)| (x - y).abs() <= tol)
}

/// Random rotation from Gram-Schmidt on a random matrix.
fn rotation(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for e in &q {
            let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(e).for_each(|(a, b)| *a -= c * b);
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-3 {
            q.push(v.into_iter().map(|a| a / n).collect());
        }
    }
    q
}

fn rotate(r: &[Vec<f64>], p: &Point) -> Point {
    Point::new(r.iter().map(|row| row.iter().zip(p.coords()).map(|(a, b)| a * b).sum()).collect())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn output_lies_in_hull_of_received((rule, received) in scenario()) {
        let x = update(rule, &received);
        let hull = convex_hull(&received).unwrap();
        prop_assert!(hull.contains(&x, 1e-9 * max_abs(&received)), "{rule:?} left the hull");
    }

    #[test]
    fn output_is_alpha_safe_per_component((rule, received) in scenario()) {
        let d = received[0].dim();
        let alpha = rule.alpha(received.len(), d);
        let x = update(rule, &received);
        let (lo, hi) = component_extrema(&received).unwrap();
        let slack = 1e-12 * max_abs(&received);
        for i in 0..d {
            let (m, big_m) = (lo[i], hi[i]);
            prop_assert!(alpha * big_m + (1.0 - alpha) * m <= x[i] + slack, "{rule:?} comp {i}");
            prop_assert!(x[i] <= (1.0 - alpha) * big_m + alpha * m + slack, "{rule:?} comp {i}");
        }
    }

    #[test]
    fn permuting_received_set((rule, received) in scenario(), seed in any::<u64>()) {
        let mut shuffled = received.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = update(rule, &received);
        let b = update(rule, &shuffled);
        prop_assert!(close(&a, &b, 1e-12 * max_abs(&received)), "{rule:?}: {a:?} vs {b:?}");
    }

    #[test]
    fn translating_received_set((rule, received) in scenario(), shift in prop::collection::vec(-5.0f64..5.0, 4)) {
        let v = &shift[..received[0].dim()];
        let moved: Vec<Point> = received.iter().map(|p| p.translated(v)).collect();
        let a = update(rule, &received).translated(v);
        let b = update(rule, &moved);
        prop_assert!(close(&a, &b, 1e-9 * max_abs(&moved)), "{rule:?}: {a:?} vs {b:?}");
    }

    #[test]
    fn centroid_commutes_with_rotation(
        pts in (2usize..=4).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), 1..=9)),
        seed in any::<u64>(),
    ) {
        let received: Vec<Point> = pts.into_iter().map(|c| Point::new(c).unwrap()).collect();
        let r = rotation(received[0].dim(), &mut ChaCha8Rng::seed_from_u64(seed));
        let turned: Vec<Point> = received.iter().map(|p| rotate(&r, p)).collect();
        let a = rotate(&r, &centroid_update(&received).unwrap());
        let b = centroid_update(&turned).unwrap();
        prop_assert!(close(&a, &b, 1e-9), "{a:?} vs {b:?}");
    }

    /// Messages are merged in sender order, so the inbox order is irrelevant.
    #[test]
    fn transition_ignores_inbox_order(
        (rule, received) in scenario(),
        amortized in any::<bool>(),
        round in 1u64..6,
        seed in any::<u64>(),
    ) {
        let n = received.len().max(2);
        let kind = if amortized && rule != UpdateRule::EqualNeighbor {
            AlgorithmKind::amortized(rule)
        } else {
            AlgorithmKind::plain(rule)
        };
        let states: Vec<AgentState> = received.iter().map(|p| AgentState::new(rule, p.clone())).collect();
        let mut inbox: Vec<_> = states.iter().enumerate().map(|(q, s)| s.message(AgentId(q))).collect();
        let ctx = RoundContext { agent: AgentId(0), round, n };
        let opts = UpdateOptions::default();
        let a = transition(&kind, &opts, &ctx, &states[0], &inbox).unwrap();
        inbox.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let b = transition(&kind, &opts, &ctx, &states[0], &inbox).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn midpoint_messages_carry_two_reals(xs in prop::collection::vec(-1.0f64..1.0, 1..=8), round in 1u64..6) {
        let kind = AlgorithmKind::amortized(UpdateRule::MidPoint);
        let states: Vec<AgentState> =
            xs.iter().map(|&x| AgentState::new(UpdateRule::MidPoint, Point::new(vec![x]).unwrap())).collect();
        let inbox: Vec<_> = states.iter().enumerate().map(|(q, s)| s.message(AgentId(q))).collect();
        prop_assert!(inbox.iter().all(|m| m.payload.payload_reals() == 2));
        let ctx = RoundContext { agent: AgentId(0), round, n: xs.len() + 1 };
        let next = transition(&kind, &UpdateOptions::default(), &ctx, &states[0], &inbox).unwrap();
        prop_assert_eq!(next.message(AgentId(0)).payload.payload_reals(), 2);
        let is_range = matches!(next.memory, Gathered::Range { .. });
        prop_assert!(is_range);
    }
}
