//! Product graph on k-tuples of nodes. 1-WL on this graph, with edge
//! features telling which tuple position changed, simulates k-WL.

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::Locality;

pub const DEFAULT_NODE_BUDGET: usize = 20_000;

/// Builds the k-tuple graph of `g`.
///
/// Nodes are the tuples of `V^k` in lexicographic order. A tuple's feature
/// is its atomic type: the `k x k` equality pattern, the `k x k` adjacency
/// pattern among its entries, then the `k` original features concatenated.
/// Tuples differing in exactly one position `j` are joined by an edge whose
/// feature one-hot encodes `j`. With [`Locality::Local`] only edges whose
/// two differing vertices are adjacent in `g` are kept; with
/// [`Locality::Global`] all are kept and a trailing flag marks adjacency.
pub fn k_tuple_graph(g: &Graph, k: usize, locality: Locality, node_budget: usize) -> Result<Graph> {
    if k < 2 {
        return Err(Error::contract("k-tuple transform needs k >= 2"));
    }
    let n = g.node_count();
    let count = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(n));
    let count = match count {
        Some(c) if c <= node_budget => c,
        _ => {
            return Err(Error::Resource(format!(
                "k-tuple graph needs n^k = {n}^{k} nodes, budget is {node_budget}"
            )))
        }
    };

    let d = g.feature_dim();
    let width = 2 * k * k + k * d;
    let mut features = Vec::with_capacity(count * width);
    let mut tuple = vec![0usize; k];
    for index in 0..count {
        decode(index, n, &mut tuple);
        for a in 0..k {
            for b in 0..k {
                features.push(if tuple[a] == tuple[b] { 1.0 } else { 0.0 });
            }
        }
        for a in 0..k {
            for b in 0..k {
                features.push(if g.has_edge(tuple[a], tuple[b]) { 1.0 } else { 0.0 });
            }
        }
        for &v in &tuple {
            features.extend_from_slice(g.feature(v));
        }
    }

    let edge_dim = match locality {
        Locality::Local => k,
        Locality::Global => k + 1,
    };
    let mut edges = Vec::new();
    let mut edge_features = Vec::new();
    let mut stride = vec![1usize; k];
    for j in (0..k.saturating_sub(1)).rev() {
        stride[j] = stride[j + 1] * n;
    }
    for index in 0..count {
        decode(index, n, &mut tuple);
        for (j, &s) in stride.iter().enumerate() {
            let from = tuple[j];
            for to in (from + 1)..n {
                let adjacent = g.has_edge(from, to);
                if locality == Locality::Local && !adjacent {
                    continue;
                }
                edges.push((index, index + (to - from) * s));
                let mut e = vec![0.0; edge_dim];
                e[j] = 1.0;
                if locality == Locality::Global && adjacent {
                    e[k] = 1.0;
                }
                edge_features.extend(e);
            }
        }
    }

    Graph::from_parts(count, width, features, edges, Some(edge_dim), edge_features)
}

fn decode(mut index: usize, n: usize, tuple: &mut [usize]) {
    for slot in tuple.iter_mut().rev() {
        *slot = index % n;
        index /= n;
    }
}
