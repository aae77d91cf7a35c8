mod oracles;

use proptest::prelude::*;
use tubeplan::linsolve::LinearProgram;

#[test]
fn random_lps_match_vertex_enumeration() {
    let (bad, first) = oracles::lp::compare_random(500, 7);
    assert_eq!(bad, 0, "{first:?}");
}

proptest! {
    #[test]
    fn solve_is_deterministic(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = oracles::lp::random_lp(&mut rng);
        let a = r.lp.solve();
        let b = r.lp.clone().solve();
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }

    #[test]
    fn optimal_points_are_feasible(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = oracles::lp::random_lp(&mut rng);
        if let Ok(s) = r.lp.solve() {
            if s.is_optimal() {
                prop_assert!(r.lp.max_violation(&s.point) <= 1e-8);
            }
        }
    }
}

#[test]
fn transportation_problem() {
    // Two supplies (3, 4), three demands (2, 3, 2), unit costs; minimize cost.
    let costs = [[4.0, 6.0, 9.0], [5.0, 3.0, 8.0]];
    let mut lp = LinearProgram::new(6);
    lp.set_objective(costs.iter().flatten().map(|c| -c).collect());
    for s in 0..2 {
        let mut row = vec![0.0; 6];
        for d in 0..3 {
            row[s * 3 + d] = 1.0;
        }
        lp.add_le(row, [3.0, 4.0][s]);
    }
    for d in 0..3 {
        let mut row = vec![0.0; 6];
        for s in 0..2 {
            row[s * 3 + d] = 1.0;
        }
        lp.add_eq(row, [2.0, 3.0, 2.0][d]);
    }
    let sol = lp.solve().unwrap();
    // x11=2, x13=1, x22=3, x23=1 -> 8 + 9 + 9 + 8 = 34
    assert!((sol.objective + 34.0).abs() < 1e-9, "{}", sol.objective);
}
