//! Independent reference computations used by the property and acceptance
//! tests.

use treemover::bound::BoundParams;
use treemover::Graph;

/// Closed walks of length `len` from `v`, by explicit depth-first walking.
pub fn closed_walks_dfs(g: &Graph, v: usize, len: usize) -> u64 {
    fn go(g: &Graph, at: usize, target: usize, left: usize) -> u64 {
        if left == 0 {
            return u64::from(at == target);
        }
        g.neighbors(at).iter().map(|&(w, _)| go(g, w, target, left - 1)).sum()
    }
    go(g, v, v, len)
}

/// Simple cycles of length `len` through each node, by trying every vertex
/// subset and every cyclic order of it.
pub fn subset_cycle_counts(g: &Graph, len: usize) -> Vec<u64> {
    let n = g.node_count();
    let mut out = vec![0u64; n];
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != len {
            continue;
        }
        let verts: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let (first, rest) = verts.split_first().unwrap();
        let mut orders = 0u64;
        permutations(rest.to_vec(), &mut |p| {
            let mut cyc = vec![*first];
            cyc.extend_from_slice(p);
            let closed = (0..len).all(|i| g.has_edge(cyc[i], cyc[(i + 1) % len]));
            orders += u64::from(closed);
        });
        // each cycle appears once per direction
        for &v in &verts {
            out[v] += orders / 2;
        }
    }
    out
}

fn permutations(mut items: Vec<usize>, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            f(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, f);
            items.swap(k, i);
        }
    }
    rec(&mut items, 0, f);
}

/// Straight transcription of the bound, in log space where possible.
pub fn reference_bound(p: &BoundParams) -> f64 {
    let (b, d, n) = (p.hidden_dim as f64, p.depth_count as f64, p.n_train as f64);
    let t1 = if p.xi == 0.0 {
        0.0
    } else {
        b * p.weight_sq_norm_sum
            * ((2.0 / d) * (p.xi.ln() - (p.gamma / 8.0).ln()) - 2.0 * p.alpha * n.ln()).exp()
    };
    let db = p.max_degree as f64 * p.feature_bound;
    let mut log_arg = (2.0 * b * d * p.spec_cap).ln();
    if db > 0.0 {
        log_arg += (2.0 * db).ln() / d;
    }
    let t2 = b * b * log_arg.max(0.0) * (-2.0 * p.alpha * n.ln() - p.gamma.ln() / d).exp() / p.delta;
    let t3 = (-(1.0 - 2.0 * p.alpha) * n.ln()).exp();
    let t4 = p.lip_eta * p.classes as f64 * p.xi;
    p.train_margin_loss + t1 + t2 + t3 + t4
}

