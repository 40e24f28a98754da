//! 1-WL color refinement and explicit computation trees.
//!
//! Colors are dense ids assigned in order of first appearance (graph order,
//! then node index). Iteration 0 keys on the exact bit pattern of node
//! features; iteration t keys on (previous color, sorted multiset of
//! (edge-feature class, neighbor color)). When several graphs are refined
//! together they share one table per iteration, so their histograms are
//! directly comparable.

use std::collections::HashMap;

use crate::graph::Graph;

/// Colors per iteration: `colors[t][v]` for `t` in `0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<Vec<u32>>,
}

impl Coloring {
    pub fn iterations(&self) -> usize {
        self.colors.len().saturating_sub(1)
    }

    pub fn class_count(&self, t: usize) -> usize {
        let mut c = self.colors[t].clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    /// Sorted color multiset at iteration `t`.
    pub fn histogram(&self, t: usize) -> Vec<u32> {
        let mut c = self.colors[t].clone();
        c.sort_unstable();
        c
    }
}

fn bits_key(prefix: u64, xs: &[f64]) -> Vec<u64> {
    let mut key = Vec::with_capacity(xs.len() + 1);
    key.push(prefix);
    key.extend(xs.iter().map(|x| x.to_bits()));
    key
}

struct Interner {
    table: HashMap<Vec<u64>, u32>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            table: HashMap::new(),
        }
    }

    fn id(&mut self, key: Vec<u64>) -> u32 {
        let next = self.table.len() as u32;
        *self.table.entry(key).or_insert(next)
    }
}

/// Refines all graphs jointly for `iterations` rounds.
pub fn refine_jointly(graphs: &[&Graph], iterations: usize) -> Vec<Coloring> {
    // Edge-feature classes are fixed across iterations.
    let mut edge_table = Interner::new();
    let edge_classes: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            (0..g.edge_count())
                .map(|e| {
                    let prefix = g.edge_dim().map_or(u64::MAX, |d| d as u64);
                    edge_table.id(bits_key(prefix, g.edge_feature(e)))
                })
                .collect()
        })
        .collect();

    let mut init = Interner::new();
    let mut current: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            (0..g.node_count())
                .map(|v| init.id(bits_key(g.feature_dim() as u64, g.feature(v))))
                .collect()
        })
        .collect();
    let mut history: Vec<Vec<Vec<u32>>> = graphs.iter().map(|_| Vec::new()).collect();
    for (h, c) in history.iter_mut().zip(&current) {
        h.push(c.clone());
    }

    for _ in 0..iterations {
        let mut table = Interner::new();
        let mut next = Vec::with_capacity(graphs.len());
        for (gi, g) in graphs.iter().enumerate() {
            let prev = &current[gi];
            let colors: Vec<u32> = (0..g.node_count())
                .map(|v| {
                    let mut neigh: Vec<u64> = g
                        .neighbors(v)
                        .iter()
                        .map(|&(w, e)| {
                            ((edge_classes[gi][e] as u64) << 32) | prev[w] as u64
                        })
                        .collect();
                    neigh.sort_unstable();
                    let mut key = Vec::with_capacity(neigh.len() + 1);
                    key.push(prev[v] as u64);
                    key.extend(neigh);
                    table.id(key)
                })
                .collect();
            next.push(colors);
        }
        for (h, c) in history.iter_mut().zip(&next) {
            h.push(c.clone());
        }
        current = next;
    }

    history
        .into_iter()
        .map(|colors| Coloring { colors })
        .collect()
}

pub fn wl_refine(g: &Graph, iterations: usize) -> Coloring {
    refine_jointly(&[g], iterations)
        .pop()
        .expect("one coloring per graph")
}

/// Smallest iteration `t <= max_iters` at which the two color histograms
/// differ, or `None` if they agree throughout.
pub fn wl_distinguishes(g: &Graph, h: &Graph, max_iters: usize) -> Option<usize> {
    let both = refine_jointly(&[g, h], max_iters);
    (0..=max_iters).find(|&t| both[0].histogram(t) != both[1].histogram(t))
}

/// Depth-`depth` unrolling of message passing rooted at one node.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputationTree {
    pub feature: Vec<f64>,
    /// `(edge feature of the link, subtree)`; the edge feature is empty when
    /// the graph carries none.
    pub children: Vec<(Vec<f64>, ComputationTree)>,
}

impl ComputationTree {
    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|(_, c)| c.depth())
            .max()
            .unwrap_or(0)
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(|(_, c)| c.node_count())
            .sum::<usize>()
    }

    /// String that is equal for two trees iff they are isomorphic as rooted
    /// trees with bitwise-equal node and link features.
    pub fn canonical_form(&self) -> String {
        let mut parts: Vec<String> = self
            .children
            .iter()
            .map(|(e, c)| format!("{:?}:{}", bit_list(e), c.canonical_form()))
            .collect();
        parts.sort_unstable();
        format!("({:?}[{}])", bit_list(&self.feature), parts.join(","))
    }
}

fn bit_list(xs: &[f64]) -> Vec<u64> {
    xs.iter().map(|x| x.to_bits()).collect()
}

fn build_tree(g: &Graph, v: usize, depth: usize) -> ComputationTree {
    let children = if depth <= 1 {
        Vec::new()
    } else {
        g.neighbors(v)
            .iter()
            .map(|&(w, e)| (g.edge_feature(e).to_vec(), build_tree(g, w, depth - 1)))
            .collect()
    };
    ComputationTree {
        feature: g.feature(v).to_vec(),
        children,
    }
}

/// One computation tree per node, in node order. Size grows exponentially
/// with depth; intended for small graphs.
///
/// # Panics
/// If `depth == 0`.
pub fn extract_trees(g: &Graph, depth: usize) -> Vec<ComputationTree> {
    assert!(depth >= 1, "computation trees have depth >= 1");
    (0..g.node_count()).map(|v| build_tree(g, v, depth)).collect()
}
