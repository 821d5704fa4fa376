use std::collections::BTreeSet;

use num_bigint::BigUint;
use proptest::prelude::*;
use sandwich_core::coupling::{strassen_deficiency, Relation};
use sandwich_core::enumeration::{exact_avoiding_count, AvoidanceInstance, FiniteDistribution};
use sandwich_core::models::sample_gnp;
use sandwich_core::stats::{multigraph_census, tv_exact};
use sandwich_core::{Multigraph, RngStream};

fn dist(ws: &[u32]) -> FiniteDistribution<f64> {
    FiniteDistribution::from_weights(ws.iter().enumerate().map(|(i, &w)| (format!("k{i}"), w as f64 + 1.0))).unwrap()
}

/// Simple graphs with degrees `g` avoiding `x`, by scanning every edge subset.
fn brute_avoiding(g: &[u32], x: &BTreeSet<(usize, usize)>) -> u64 {
    let n = g.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|p| !x.contains(p)).collect();
    let mut count = 0;
    for mask in 0u64..1 << pairs.len() {
        let mut deg = vec![0u32; n];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                deg[a] += 1;
                deg[b] += 1;
            }
        }
        count += (deg == g) as u64;
    }
    count
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tv_is_a_metric(a in proptest::collection::vec(0u32..9, 5), b in proptest::collection::vec(0u32..9, 5), c in proptest::collection::vec(0u32..9, 5)) {
        let (a, b, c) = (dist(&a), dist(&b), dist(&c));
        let ab = tv_exact(&a, &b).unwrap();
        prop_assert!(tv_exact(&a, &a).unwrap().abs() < 1e-15);
        prop_assert!((ab - tv_exact(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(ab <= tv_exact(&a, &c).unwrap() + tv_exact(&c, &b).unwrap() + 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        // Minimal equality failure of a coupling is the total variation.
        let def = strassen_deficiency(&a, &b, &Relation::inequality(&a, &b).unwrap()).unwrap();
        prop_assert!((def.value - ab).abs() < 1e-12);
    }

    #[test]
    fn census_ignores_labels(seed in 0u64..1000, n in 3usize..15) {
        let mut rng = RngStream::new(seed, 0);
        let g = sample_gnp(n, 0.4, &mut rng).unwrap();
        let mut perm: Vec<u32> = (1..=n as u32).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.below(i + 1));
        }
        prop_assert_eq!(multigraph_census(&g), multigraph_census(&g.relabel(&perm).unwrap()));
    }

    #[test]
    fn avoiding_count_matches_brute_force(g in proptest::collection::vec(0u32..4, 2..7), xs in proptest::collection::vec((0usize..6, 0usize..6), 0..4)) {
        let n = g.len();
        let forbidden: Vec<(usize, usize)> = xs.into_iter().map(|(a, b)| (a % n, b % n)).filter(|(a, b)| a != b).collect();
        let inst = AvoidanceInstance::new(g.clone(), &forbidden).unwrap();
        let expected = brute_avoiding(&g, inst.forbidden());
        prop_assert_eq!(exact_avoiding_count(&inst).unwrap(), BigUint::from(expected));
    }
}

#[test]
fn census_of_small_multigraph() {
    let g = Multigraph::from_edges(4, [(1, 1, 1), (1, 2, 2), (2, 3, 3), (1, 3, 1), (3, 4, 1)]).unwrap();
    let c = multigraph_census(&g);
    assert_eq!((c.loops, c.doubles, c.doubles_at_least, c.higher, c.triangles, c.edges), (1, 1, 2, 1, 1, 8));
    assert!(!c.simple);
}
