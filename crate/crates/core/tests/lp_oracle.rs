mod common;

use nonlocality_core::{solve_lp, LpStatus};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn simplex_matches_vertex_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lp = common::random_bounded_lp(&mut rng);
        let sol = solve_lp(&lp);
        match common::vertex_enumeration(&lp, 1e-9) {
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective_value - best).abs() <= 1e-9 * (1.0 + best.abs()),
                    "simplex {} vs enumeration {}", sol.objective_value, best);
                prop_assert!(lp.primal_residual(&sol.primal) <= 1e-9);
                let (bound, _) = lp.dual_bound(&sol.dual);
                prop_assert!((bound - best).abs() <= 1e-8 * (1.0 + best.abs()));
            }
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
        }
    }
}
