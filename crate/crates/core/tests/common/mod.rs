#![allow(dead_code)]

pub mod oracles;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treemover::Graph;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cycle(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::unit_features(n, &edges).unwrap()
}

pub fn two_triangles() -> Graph {
    Graph::unit_features(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((i, j));
        }
    }
    Graph::unit_features(n, &edges).unwrap()
}

/// Random simple graph with `n` nodes in `nodes`, each edge present with
/// probability `p`, and features drawn from a small integer palette (so
/// that repeated features and WL ties are common) when `palette` is set,
/// or uniform reals otherwise.
pub fn random_graph(
    r: &mut ChaCha8Rng,
    nodes: std::ops::RangeInclusive<usize>,
    p: f64,
    dim: usize,
    palette: bool,
) -> Graph {
    let n = r.random_range(nodes);
    let features = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if palette {
                        r.random_range(1..=2) as f64
                    } else {
                        r.random_range(-2.0..2.0)
                    }
                })
                .collect()
        })
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if r.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(features, edges, None).unwrap()
}

pub fn random_permutation(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(r);
    p
}

/// Proptest strategy for small graphs with `dim`-dimensional features.
pub fn arb_graph(max_nodes: usize, dim: usize) -> impl Strategy<Value = Graph> {
    (0..=max_nodes).prop_flat_map(move |n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let m = pairs.len();
        (
            prop::collection::vec(prop::collection::vec(-3i32..=3, dim), n),
            prop::collection::vec(any::<bool>(), m),
        )
            .prop_map(move |(feats, mask)| {
                let features = feats
                    .into_iter()
                    .map(|f| f.into_iter().map(f64::from).collect())
                    .collect();
                let edges = pairs
                    .iter()
                    .zip(&mask)
                    .filter(|(_, &keep)| keep)
                    .map(|(&e, _)| e)
                    .collect();
                Graph::new(features, edges, None).unwrap()
            })
    })
}
