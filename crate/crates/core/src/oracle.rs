//! Reference Tree Mover's Distance on explicitly materialized computation
//! trees, with blank-tree padding and exhaustive assignment. Exponential in
//! depth and degree; exists to cross-check the dynamic program in tests.

use crate::assignment::{brute_force_min_cost, CostMatrix};
use crate::error::{Error, Result};
use crate::graph::{distance, Graph};
use crate::tmd::DepthWeights;
use crate::wl::{extract_trees, ComputationTree};

pub const MAX_ORACLE_NODES: usize = 8;
pub const MAX_ORACLE_DEPTH: usize = 4;

struct Blank {
    tree: ComputationTree,
    link: Vec<f64>,
}

/// Tree distance between two materialized trees.
pub fn tree_distance(
    a: &ComputationTree,
    b: &ComputationTree,
    w: &DepthWeights,
    blank_link: &[f64],
) -> Result<f64> {
    let root = distance(&a.feature, &b.feature);
    let level = a.depth().max(b.depth());
    if level <= 1 {
        return Ok(root);
    }
    let blank = Blank {
        tree: ComputationTree {
            feature: vec![0.0; a.feature.len()],
            children: Vec::new(),
        },
        link: blank_link.to_vec(),
    };
    let size = a.children.len().max(b.children.len());
    let pick = |children: &'_ [(Vec<f64>, ComputationTree)], i: usize| -> (Vec<f64>, ComputationTree) {
        children
            .get(i)
            .cloned()
            .unwrap_or_else(|| (blank.link.clone(), blank.tree.clone()))
    };
    let mut costs = Vec::with_capacity(size * size);
    for i in 0..size {
        let (ea, ta) = pick(&a.children, i);
        for j in 0..size {
            let (eb, tb) = pick(&b.children, j);
            costs.push(tree_distance(&ta, &tb, w, blank_link)? + distance(&ea, &eb));
        }
    }
    let ot = brute_force_min_cost(&CostMatrix::new(size, costs)?)?;
    Ok(root + w.at(level)? * ot)
}

/// TMD computed literally: build every depth-`depth` computation tree, pad
/// the smaller multiset with blank trees and enumerate all assignments.
pub fn tmd_oracle(g: &Graph, h: &Graph, depth: usize, w: &DepthWeights) -> Result<f64> {
    if g.node_count() > MAX_ORACLE_NODES || h.node_count() > MAX_ORACLE_NODES {
        return Err(Error::contract(format!(
            "oracle limited to {MAX_ORACLE_NODES} nodes per graph"
        )));
    }
    if depth == 0 || depth > MAX_ORACLE_DEPTH {
        return Err(Error::contract(format!(
            "oracle depth must be in 1..={MAX_ORACLE_DEPTH}"
        )));
    }
    let dim = if g.node_count() > 0 { g.feature_dim() } else { h.feature_dim() };
    let edge_dim = g.edge_dim().or(h.edge_dim()).unwrap_or(0);
    let blank_link = vec![0.0; edge_dim];
    let blank = ComputationTree {
        feature: vec![0.0; dim],
        children: Vec::new(),
    };

    let mut ta = extract_trees(g, depth);
    let mut tb = extract_trees(h, depth);
    let size = ta.len().max(tb.len());
    ta.resize(size, blank.clone());
    tb.resize(size, blank);
    let mut costs = Vec::with_capacity(size * size);
    for a in &ta {
        for b in &tb {
            costs.push(tree_distance(a, b, w, &blank_link)?);
        }
    }
    brute_force_min_cost(&CostMatrix::new(size, costs)?)
}
