mod common;

use common::{brute_force_cycles, brute_force_forest_weight, random_network, rel_err};
use cycleflux::linalg::{gth_stationary, lu_principal_minor, principal_minor};
use cycleflux::{
    build_laplacian, enumerate_cycles, tree_theorem_distribution, FluxAnalysis, GraphMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn mode_strategy() -> impl Strategy<Value = GraphMode> {
    prop_oneof![Just(GraphMode::Collapsed), Just(GraphMode::Multigraph)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn johnson_matches_exhaustive_search(
        seed in any::<u64>(),
        n in 3usize..=10,
        p in 0.1f64..0.6,
        parallel in 0usize..3,
        mode in mode_strategy(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, p, parallel, mode);
        let fast = enumerate_cycles(&net).unwrap();
        let slow: Vec<_> = brute_force_cycles(&net).into_iter().collect();
        prop_assert_eq!(fast, slow);
    }

    #[test]
    fn minors_match_forest_enumeration(seed in any::<u64>(), n in 2usize..=6, p in 0.2f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, p, 0, GraphMode::Collapsed);
        let l = build_laplacian(&net);
        let k = net.rate_matrix();
        for i in 0..n {
            let m = principal_minor(&l, &[i]);
            prop_assert!(rel_err(m, brute_force_forest_weight(&k, &[i])) < 1e-12);
        }
        for c in enumerate_cycles(&net).unwrap() {
            let m = principal_minor(&l, c.vertices());
            prop_assert!(rel_err(m, brute_force_forest_weight(&k, c.vertices())) < 1e-12);
            prop_assert!(rel_err(m, lu_principal_minor(&l, c.vertices())) < 1e-9);
        }
    }

    #[test]
    fn gth_matches_tree_theorem(seed in any::<u64>(), n in 2usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, 0.4, 0, GraphMode::Collapsed);
        let p = gth_stationary(&net.rate_matrix()).unwrap();
        let (q, _) = tree_theorem_distribution(&net).unwrap();
        for i in 0..n {
            prop_assert!(rel_err(p[i], q[i]) < 1e-12);
        }
    }

    #[test]
    fn fluxes_are_nonnegative_and_antisymmetric(seed in any::<u64>(), n in 3usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, n, 0.5, 1, GraphMode::Multigraph);
        let a = FluxAnalysis::new(&net).unwrap();
        for r in a.records() {
            prop_assert!(r.j_forward >= 0.0 && r.j_backward >= 0.0);
            prop_assert!(r.rooted_minor >= 0.0);
            prop_assert_eq!(r.j_net, r.j_forward - r.j_backward);
            prop_assert_eq!(r.j_forward, r.pi_forward * r.rooted_minor / r.normalization);
        }
        prop_assert!(a.entropy_production() >= -1e-15);
        let p = cycleflux::solve_steady_state(&net).unwrap();
        prop_assert!(a.max_decomposition_residual(&p) < 1e-10);
    }

    #[test]
    fn flux_ratios_survive_global_rescaling(seed in any::<u64>(), scale in -30i32..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_network(&mut rng, 5, 0.5, 0, GraphMode::Collapsed);
        let factor = 10f64.powi(scale);
        let a = FluxAnalysis::new(&net).unwrap();
        let b = FluxAnalysis::new(&net.rescaled(factor).unwrap()).unwrap();
        for (x, y) in a.records().iter().zip(b.records()) {
            prop_assert!(rel_err(x.j_forward * factor, y.j_forward) < 1e-11);
            prop_assert!((x.affinity - y.affinity).abs() < 1e-11);
        }
    }
}

#[test]
fn forest_oracle_on_hand_example() {
    // 3-ring with distinct rates: trees rooted at 0 are {1→0, 2→0}, {1→2, 2→0}, {2→1, 1→0}.
    let k = vec![
        vec![0.0, 2.0, 3.0],
        vec![5.0, 0.0, 7.0],
        vec![11.0, 13.0, 0.0],
    ];
    let w = brute_force_forest_weight(&k, &[0]);
    assert_eq!(w, 5.0 * 11.0 + 7.0 * 11.0 + 13.0 * 5.0);
    assert_eq!(brute_force_forest_weight(&k, &[0, 1, 2]), 1.0);
}
