mod common;

use common::oracles::{closed_walks_dfs, subset_cycle_counts};

use proptest::prelude::*;
use treemover::tmd::DepthWeights;
use treemover::transforms::{
    augment, cycle_node_counts, k_tuple_graph, simulate, zeta_tmd, CountMode, Locality, PatternFamilySpec,
    ZetaSpec, DEFAULT_NODE_BUDGET,
};
use treemover::wl::{refine_jointly, wl_distinguishes};
use treemover::Graph;

fn spec(mode: CountMode, l: usize) -> PatternFamilySpec {
    PatternFamilySpec::new(mode, l).unwrap()
}

fn unit() -> DepthWeights {
    DepthWeights::Constant(1.0)
}

fn arb_zeta() -> impl Strategy<Value = ZetaSpec> {
    prop_oneof![
        Just(ZetaSpec::Identity),
        (prop_oneof![Just(CountMode::Homomorphism), Just(CountMode::Subgraph), Just(CountMode::CycleBasis)], 3usize..=5)
            .prop_map(|(m, l)| ZetaSpec::FeatureAugment(spec(m, l))),
        prop_oneof![Just(Locality::Global), Just(Locality::Local)].prop_map(|locality| ZetaSpec::KTuple { k: 2, locality }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn homomorphism_counts_are_closed_walks(g in common::arb_graph(7, 1)) {
        let counts = cycle_node_counts(&g, &spec(CountMode::Homomorphism, 6));
        for v in 0..g.node_count() {
            for l in 3..=6 {
                prop_assert_eq!(counts[v][l - 3], closed_walks_dfs(&g, v, l));
            }
        }
    }

    #[test]
    fn subgraph_counts_match_subset_enumeration(g in common::arb_graph(8, 1)) {
        let counts = cycle_node_counts(&g, &spec(CountMode::Subgraph, 6));
        for l in 3..=6 {
            let oracle = subset_cycle_counts(&g, l);
            for v in 0..g.node_count() {
                prop_assert_eq!(counts[v][l - 3], oracle[v]);
            }
        }
    }

    #[test]
    fn shorter_family_is_never_farther(g in common::arb_graph(7, 1), h in common::arb_graph(7, 1),
                                       depth in 1usize..=3, mode_ix in 0usize..3) {
        let mode = [CountMode::Homomorphism, CountMode::Subgraph, CountMode::CycleBasis][mode_ix];
        let small = zeta_tmd(&g, &h, &ZetaSpec::FeatureAugment(spec(mode, 3)), depth, &unit()).unwrap();
        let large = zeta_tmd(&g, &h, &ZetaSpec::FeatureAugment(spec(mode, 4)), depth, &unit()).unwrap();
        prop_assert!(small <= large + 1e-9, "{} > {}", small, large);
    }

    #[test]
    fn simulation_commutes_with_relabeling(g in common::arb_graph(5, 1), zeta in arb_zeta(), seed in any::<u64>()) {
        // a fundamental cycle basis depends on node numbering
        prop_assume!(!matches!(zeta, ZetaSpec::FeatureAugment(PatternFamilySpec { mode: CountMode::CycleBasis, .. })));
        let mut r = common::rng(seed);
        let p = g.permute(&common::random_permutation(&mut r, g.node_count())).unwrap();
        let (a, b) = (simulate(&g, &zeta).unwrap(), simulate(&p, &zeta).unwrap());
        prop_assert_eq!(a.node_count(), b.node_count());
        prop_assert_eq!(a.edge_count(), b.edge_count());
        let c = refine_jointly(&[&a, &b], 3);
        for t in 0..=3 {
            prop_assert_eq!(c[0].histogram(t), c[1].histogram(t));
        }
        prop_assert_eq!(zeta_tmd(&g, &p, &zeta, 2, &unit()).unwrap(), 0.0);
    }

    #[test]
    fn simulated_separation_implies_positive_distance(g in common::arb_graph(5, 1), h in common::arb_graph(5, 1),
                                                      zeta in arb_zeta(), t in 0usize..=2) {
        let fix = |x: &Graph| {
            let f: Vec<f64> = x.features().flatten().map(|&v| if v == 0.0 { 2.0 } else { v }).collect();
            x.with_features(x.feature_dim(), f).unwrap()
        };
        let (g, h) = (fix(&g), fix(&h));
        let (sg, sh) = (simulate(&g, &zeta).unwrap(), simulate(&h, &zeta).unwrap());
        if wl_distinguishes(&sg, &sh, t).is_some() {
            prop_assert!(zeta_tmd(&g, &h, &zeta, t + 1, &unit()).unwrap() > 1e-12);
        }
    }
}

#[test]
fn cycle_basis_counts_depend_on_numbering() {
    // K4 minus the edge {2, 3}: rooted at a degree-3 node the basis is two
    // triangles, rooted at a degree-2 node it is a triangle and a square.
    let a = Graph::unit_features(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
    let b = a.permute(&[1, 2, 0, 3]).unwrap();
    let total = |g: &Graph| -> Vec<u64> {
        let counts = cycle_node_counts(g, &spec(CountMode::CycleBasis, 4));
        (0..2).map(|l| counts.iter().map(|c| c[l]).sum()).collect()
    };
    assert_eq!(total(&a), vec![6, 0]);
    assert_eq!(total(&b), vec![3, 4]);
}

#[test]
fn small_count_examples() {
    let k3 = common::complete(3);
    assert_eq!(cycle_node_counts(&k3, &spec(CountMode::Homomorphism, 3)), vec![vec![2]; 3]);
    let k4 = common::complete(4);
    assert_eq!(cycle_node_counts(&k4, &spec(CountMode::Subgraph, 3)), vec![vec![3]; 4]);
    assert_eq!(cycle_node_counts(&common::cycle(6), &spec(CountMode::CycleBasis, 4)), vec![vec![0, 0]; 6]);
    assert!(PatternFamilySpec::new(CountMode::Subgraph, 2).is_err());
}

#[test]
fn augment_examples() {
    let a = augment(&common::complete(3), &spec(CountMode::Subgraph, 3)).unwrap();
    assert!((0..3).all(|v| a.feature(v) == [1.0, 1.0]));
    let path = Graph::unit_features(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
    let a = augment(&path, &spec(CountMode::Subgraph, 3)).unwrap();
    assert!((0..5).all(|v| a.feature(v) == [1.0, 0.0]));
}

#[test]
fn per_node_sums_are_length_multiples() {
    let mut r = common::rng(21);
    for _ in 0..30 {
        let g = common::random_graph(&mut r, 4..=9, 0.5, 1, true);
        let per_node = cycle_node_counts(&g, &spec(CountMode::Subgraph, 5));
        let totals = treemover::transforms::simple_cycle_totals(&g, 5);
        for l in 3..=5 {
            let sum: u64 = per_node.iter().map(|c| c[l - 3]).sum();
            assert_eq!(sum, l as u64 * totals[l - 3]);
        }
    }
}

#[test]
fn three_tuples_separate_cycle_from_triangles() {
    let a = k_tuple_graph(&common::cycle(6), 3, Locality::Global, DEFAULT_NODE_BUDGET).unwrap();
    let b = k_tuple_graph(&common::two_triangles(), 3, Locality::Global, DEFAULT_NODE_BUDGET).unwrap();
    let t = wl_distinguishes(&a, &b, 2);
    assert!(t.is_some_and(|t| t <= 2));
    assert!(wl_distinguishes(&common::cycle(6), &common::two_triangles(), 5).is_none());
}

#[test]
fn k2_on_edge() {
    let t = k_tuple_graph(&Graph::unit_features(2, &[(0, 1)]).unwrap(), 2, Locality::Global, DEFAULT_NODE_BUDGET)
        .unwrap();
    assert_eq!((t.node_count(), t.edge_count()), (4, 4));
    assert!((0..4).all(|v| t.degree(v) == 2));
}
