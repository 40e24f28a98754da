//! Per-node cycle statistics: closed walks, simple cycles, and membership in
//! a fundamental cycle basis.

use std::collections::VecDeque;

use crate::graph::Graph;

use super::{CountMode, PatternFamilySpec};

/// Counts per node, one entry per cycle length `3..=max_cycle_length`.
pub fn cycle_node_counts(g: &Graph, spec: &PatternFamilySpec) -> Vec<Vec<u64>> {
    let lmax = spec.max_cycle_length;
    match spec.mode {
        CountMode::Homomorphism => closed_walk_counts(g, lmax),
        CountMode::Subgraph => {
            let mut out = vec![vec![0u64; lmax.saturating_sub(2)]; g.node_count()];
            for_each_simple_cycle(g, lmax, |cycle| {
                for &v in cycle {
                    out[v][cycle.len() - 3] += 1;
                }
            });
            out
        }
        CountMode::CycleBasis => {
            let mut out = vec![vec![0u64; lmax.saturating_sub(2)]; g.node_count()];
            for cycle in fundamental_cycles(g) {
                if (3..=lmax).contains(&cycle.len()) {
                    for &v in &cycle {
                        out[v][cycle.len() - 3] += 1;
                    }
                }
            }
            out
        }
    }
}

/// `(A^l)_{vv}` for `l` in `3..=lmax`, by propagating walk counts from each
/// node.
fn closed_walk_counts(g: &Graph, lmax: usize) -> Vec<Vec<u64>> {
    let n = g.node_count();
    let mut out = vec![vec![0u64; lmax.saturating_sub(2)]; n];
    let mut walks = vec![0u64; n];
    let mut next = vec![0u64; n];
    for (v, counts) in out.iter_mut().enumerate() {
        walks.fill(0);
        walks[v] = 1;
        for len in 1..=lmax {
            next.fill(0);
            for (x, &c) in walks.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &(y, _) in g.neighbors(x) {
                    next[y] = next[y].saturating_add(c);
                }
            }
            std::mem::swap(&mut walks, &mut next);
            if len >= 3 {
                counts[len - 3] = walks[v];
            }
        }
    }
    out
}

/// Calls `f` once per simple cycle of length `3..=lmax`, with the cycle's
/// vertices in traversal order starting at its smallest vertex.
///
/// Each cycle is found from its smallest vertex `s`, extending only through
/// vertices larger than `s`, and reported only when the second vertex is
/// smaller than the last, which fixes one of the two directions.
pub fn for_each_simple_cycle(g: &Graph, lmax: usize, mut f: impl FnMut(&[usize])) {
    let n = g.node_count();
    let mut on_path = vec![false; n];
    let mut path = Vec::with_capacity(lmax);
    for s in 0..n {
        path.push(s);
        on_path[s] = true;
        extend(g, s, lmax, &mut path, &mut on_path, &mut f);
        on_path[s] = false;
        path.pop();
    }
}

fn extend(
    g: &Graph,
    start: usize,
    lmax: usize,
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    f: &mut impl FnMut(&[usize]),
) {
    let last = *path.last().expect("path starts at anchor");
    for &(w, _) in g.neighbors(last) {
        if w == start && path.len() >= 3 && path[1] < last {
            f(path);
        } else if w > start && !on_path[w] && path.len() < lmax {
            path.push(w);
            on_path[w] = true;
            extend(g, start, lmax, path, on_path, f);
            on_path[w] = false;
            path.pop();
        }
    }
}

/// Whole-graph number of simple cycles per length `3..=lmax`.
pub fn simple_cycle_totals(g: &Graph, lmax: usize) -> Vec<u64> {
    let mut out = vec![0u64; lmax.saturating_sub(2)];
    for_each_simple_cycle(g, lmax, |c| out[c.len() - 3] += 1);
    out
}

/// Fundamental cycle basis of a BFS spanning forest. Each component is
/// rooted at its lowest-index node and neighbors are visited in index order;
/// non-tree edges are taken in sorted edge order. Returns each cycle's
/// vertex set as the tree path between the edge endpoints.
pub fn fundamental_cycles(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut parent = vec![usize::MAX; n];
    let mut parent_edge = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            for &(y, e) in g.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = x;
                    parent_edge[y] = e;
                    depth[y] = depth[x] + 1;
                    queue.push_back(y);
                }
            }
        }
    }

    let mut is_tree = vec![false; g.edge_count()];
    for &e in parent_edge.iter().filter(|&&e| e != usize::MAX) {
        is_tree[e] = true;
    }

    let mut cycles = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if is_tree[e] {
            continue;
        }
        let (mut a, mut b) = (u, v);
        let mut left = vec![a];
        let mut right = vec![b];
        while depth[a] > depth[b] {
            a = parent[a];
            left.push(a);
        }
        while depth[b] > depth[a] {
            b = parent[b];
            right.push(b);
        }
        while a != b {
            a = parent[a];
            b = parent[b];
            left.push(a);
            right.push(b);
        }
        right.pop();
        left.extend(right.into_iter().rev());
        cycles.push(left);
    }
    cycles
}
