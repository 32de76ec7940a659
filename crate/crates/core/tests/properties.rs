mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use dpg_core::constraints::extract_constraints;
use dpg_core::dpg::{build_dpg, weight_flow, Dpg};
use dpg_core::ensemble::{round_half_even, CanonicalizationPolicy, TreeEnsemble};
use dpg_core::io::{csv_string, parse_csv};
use dpg_core::metrics::{betweenness_centrality, detect_communities, local_reaching_centrality_with, LrcMode};
use dpg_core::trainer::train_test_split;

fn built(seed: u64, trees: usize, samples: usize, classes: usize, depth: usize) -> (TreeEnsemble, Dpg, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = random_ensemble(&mut rng, trees, 3, classes, depth);
    let d = random_dataset(&mut rng, samples, 3);
    let g = build_dpg(&m, &d, &CanonicalizationPolicy::default()).unwrap();
    let total = recount(&m, &d, 2).total_transitions;
    (m, g, total)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn flow_is_conserved(seed in any::<u64>(), trees in 1usize..6, samples in 1usize..80, classes in 2usize..5, depth in 0usize..5) {
        let (_, g, total) = built(seed, trees, samples, classes, depth);
        prop_assert_eq!(g.total_weight(), total);
        for (v, (out, inn)) in weight_flow(&g).into_iter().enumerate() {
            if g.is_class(v) {
                prop_assert_eq!(out, 0);
            } else {
                prop_assert_eq!(out as i64 - inn as i64, g.source_counts()[v] as i64);
            }
        }
        prop_assert_eq!(g.source_counts().iter().sum::<u64>(), (trees * samples) as u64);
    }

    #[test]
    fn dpg_json_round_trip_is_byte_identical(seed in any::<u64>(), trees in 1usize..5, samples in 1usize..40) {
        let (_, g, _) = built(seed, trees, samples, 3, 4);
        let text = g.to_json();
        let back = Dpg::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back, g);
    }

    #[test]
    fn ensemble_json_round_trip(seed in any::<u64>(), trees in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_ensemble(&mut rng, trees, 4, 3, 5);
        let text = m.to_json();
        let back = TreeEnsemble::from_json(&text).unwrap();
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn rebuilding_is_deterministic(seed in any::<u64>()) {
        let (_, a, _) = built(seed, 4, 30, 3, 4);
        let (_, b, _) = built(seed, 4, 30, 3, 4);
        prop_assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn rounding_is_idempotent(x in -1e6f64..1e6, decimals in 0u32..8) {
        let once = round_half_even(x, decimals);
        prop_assert_eq!(round_half_even(once, decimals).to_bits(), once.to_bits());
    }

    #[test]
    fn centrality_scores_are_fractions(seed in any::<u64>(), n in 2usize..12, p in 0.05f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, n, p);
        let bc = betweenness_centrality(&g);
        let lrc = local_reaching_centrality_with(&g, LrcMode::Unweighted);
        for v in 0..n {
            prop_assert!((0.0..=1.0 + 1e-12).contains(&bc.scores[v]));
            prop_assert_eq!(lrc.scores[v], reachable_fraction(&g, v));
        }
        let mut ranked = bc.ranking.clone();
        ranked.sort_unstable();
        prop_assert_eq!(ranked, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn communities_partition(seed in any::<u64>(), lpa_seed in any::<u64>()) {
        let (_, g, _) = built(seed, 3, 25, 3, 4);
        let r = detect_communities(&g, lpa_seed, 100);
        prop_assert!(r.is_partition_of(g.len()));
        prop_assert_eq!(&r, &detect_communities(&g, lpa_seed, 100));
        let class_nodes: usize = r.classes.iter().map(Vec::len).sum();
        prop_assert_eq!(class_nodes, 3);
    }

    #[test]
    fn constraints_match_reference(seed in any::<u64>(), trees in 1usize..5, depth in 1usize..6) {
        let (_, g, _) = built(seed, trees, 40, 3, depth);
        for c in 0..3 {
            let cc = extract_constraints(&g, c).unwrap();
            let got: Vec<_> = cc.intervals.iter().map(|iv| (iv.feature, (iv.lower, iv.upper))).collect();
            let want: Vec<_> = brute_force_constraints(&g, c).into_iter().collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn csv_round_trip(seed in any::<u64>(), rows in 0usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_dataset(&mut rng, rows, 3);
        let back = parse_csv(csv_string(&d).unwrap().as_bytes()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn split_partitions_rows(seed in any::<u64>(), rows in 2usize..200, frac in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels = (0..rows).map(|i| i % 2).collect();
        let d = random_dataset(&mut rng, rows, 2).with_labels(labels, names("c", 2)).unwrap();
        let s = train_test_split(&d, frac, seed).unwrap();
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..rows).collect::<Vec<_>>());
        prop_assert_eq!(s.test_indices.len(), (rows as f64 * frac).round() as usize);
    }
}
