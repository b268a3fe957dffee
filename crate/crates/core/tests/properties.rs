//! Randomised properties over seeded instances.

use anchored_core::induced::build_induced_graph;
use anchored_core::io::{read_wg, write_wg};
use anchored_core::oracle::union_of_cores;
use anchored_core::spectral::heat_kernel_row;
use anchored_core::territories::dist_i_from_set;
use anchored_core::verify::random_instance;
use anchored_core::walker::one_step_counts;
use anchored_core::{compute_a_i, fixtures, VertexSet};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn tenth() -> impl Strategy<Value = f64> {
    (1u32..10).prop_map(|k| k as f64 / 10.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn a_i_is_the_union_of_cores(seed in any::<u64>(), i in tenth()) {
        let g = random_instance(seed, 9);
        prop_assert_eq!(compute_a_i(&g, i).unwrap().a_i, union_of_cores(&g, i).unwrap());
    }

    #[test]
    fn a_i_grows_with_i(seed in any::<u64>(), lo in 1u32..9, gap in 1u32..9) {
        let g = random_instance(seed, 14);
        let hi = (lo + gap).min(9);
        let small = compute_a_i(&g, lo as f64 / 10.0).unwrap().a_i;
        let large = compute_a_i(&g, hi as f64 / 10.0).unwrap().a_i;
        prop_assert!(small.is_subset(&large));
    }

    #[test]
    fn islands_partition_a_i(seed in any::<u64>(), i in tenth()) {
        let g = random_instance(seed, 14);
        let dec = compute_a_i(&g, i).unwrap();
        let mut union = VertexSet::new();
        for s in &dec.islands {
            prop_assert!(g.is_connected_set(s));
            prop_assert!(union.is_disjoint(s));
            union = union.union(s);
        }
        prop_assert_eq!(&union, &dec.a_i);
        prop_assert_eq!(dec.ocean.union(&dec.a_i), g.interior());
    }

    #[test]
    fn induced_weights_are_symmetric(seed in any::<u64>(), i in tenth()) {
        let g = random_instance(seed, 12);
        let dec = compute_a_i(&g, i).unwrap();
        let ind = build_induced_graph(&g, &dec).unwrap();
        for (&(u, v), &w) in &ind.directed {
            if !g.is_frontier(v) {
                let back = ind.directed.get(&(v, u)).copied().unwrap_or(0.0);
                prop_assert!((w - back).abs() <= 1e-9 * w.max(back));
            }
        }
    }

    #[test]
    fn heat_kernel_is_reversible(seed in any::<u64>(), n in 0usize..8) {
        let g = random_instance(seed, 10);
        let interior: Vec<usize> = g.interior().iter().collect();
        let rows: Vec<Vec<f64>> = interior.iter().map(|&x| heat_kernel_row(&g, x, n).unwrap().probs).collect();
        for (a, &x) in interior.iter().enumerate() {
            for (b, &y) in interior.iter().enumerate() {
                let lhs = g.vertex_weight(x) * rows[a][y];
                let rhs = g.vertex_weight(y) * rows[b][x];
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(rhs).max(1e-300));
            }
        }
    }

    #[test]
    fn dist_i_is_at_most_graph_distance(seed in any::<u64>(), i in tenth()) {
        let g = random_instance(seed, 14);
        let dec = compute_a_i(&g, i).unwrap();
        for s in &dec.islands {
            let d = dist_i_from_set(&g, &dec, s).unwrap();
            let hops: Vec<Vec<Option<usize>>> = s.iter().map(|v| g.bfs_distances(v)).collect();
            for v in 0..g.num_vertices() {
                let plain = hops.iter().filter_map(|h| h[v]).min();
                if s.contains(v) {
                    prop_assert_eq!(d[v], Some(0));
                } else if let (Some(di), Some(p)) = (d[v], plain) {
                    prop_assert!(di >= 1 && di <= p, "dist_i {} vs hops {}", di, p);
                }
            }
        }
    }

    #[test]
    fn wg_round_trip_is_byte_identical(seed in any::<u64>()) {
        let g = random_instance(seed, 14);
        let text = write_wg(&g, &["seeded".to_string()]);
        let back = read_wg(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(write_wg(&back, &["seeded".to_string()]), text);
    }
}

#[test]
fn first_step_matches_transition_probabilities() {
    let g = fixtures::kite();
    for x in g.interior().iter() {
        let samples = 40_000u64;
        let counts = one_step_counts(&g, x, samples, 11 + x as u64).unwrap();
        let w = g.vertex_weight(x);
        let stat: f64 = g
            .neighbors(x)
            .iter()
            .zip(&counts)
            .map(|(&(_, wv), &c)| {
                let expected = samples as f64 * wv / w;
                (c as f64 - expected).powi(2) / expected
            })
            .sum();
        let dof = (counts.len() - 1).max(1) as f64;
        let p = 1.0 - ChiSquared::new(dof).unwrap().cdf(stat);
        assert!(
            p > 1e-4,
            "vertex {}: chi-square {stat} on {dof} dof, p={p}",
            g.id(x)
        );
    }
}
