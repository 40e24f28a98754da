//! Tree distance and Tree Mover's Distance by level-wise dynamic programming.
//!
//! Level `t` holds, for every node pair `(u, v)`, the tree distance between
//! the depth-`t` computation trees of `u` and `v`, plus each tree's distance
//! to the blank tree (a single zero-feature node). Level `t` is built from
//! level `t - 1` with one small assignment per pair, so trees are never
//! materialized and blank padding is implicit.
//!
//! Edge features, when present, extend the child matching cost by the
//! distance between the two link features (and by the link norm when a
//! child is matched to a blank). With identical edge features everywhere
//! this reduces to the plain node-feature distance.

use rayon::prelude::*;

use crate::assignment::min_cost_dense;
use crate::error::{Error, Result};
use crate::graph::{distance, norm, Graph, GraphDataset};
use crate::transforms::{simulate, ZetaSpec};

/// Positive weight `w(t)` per tree level `t >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub enum DepthWeights {
    Constant(f64),
    /// `levels[i]` is the weight of level `i + 2`.
    PerLevel(Vec<f64>),
}

impl Default for DepthWeights {
    fn default() -> Self {
        DepthWeights::Constant(1.0)
    }
}

impl DepthWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = |w: &f64| w.is_finite() && *w > 0.0;
        let valid = match self {
            DepthWeights::Constant(w) => ok(w),
            DepthWeights::PerLevel(ws) => ws.iter().all(ok),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::contract("depth weights must be finite and positive"))
        }
    }

    /// Weight of level `level >= 2`.
    pub fn at(&self, level: usize) -> Result<f64> {
        debug_assert!(level >= 2);
        match self {
            DepthWeights::Constant(w) => Ok(*w),
            DepthWeights::PerLevel(ws) => ws.get(level - 2).copied().ok_or_else(|| {
                Error::contract(format!("no depth weight given for level {level}"))
            }),
        }
    }
}

impl std::str::FromStr for DepthWeights {
    type Err = Error;

    /// `const:<w>` or `levels:<w2>,<w3>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::contract(format!("bad weight {x:?}")))
        };
        let w = if let Some(rest) = s.strip_prefix("const:") {
            DepthWeights::Constant(parse(rest)?)
        } else if let Some(rest) = s.strip_prefix("levels:") {
            DepthWeights::PerLevel(rest.split(',').map(parse).collect::<Result<_>>()?)
        } else {
            return Err(Error::contract(format!(
                "weight spec {s:?} is neither const:<w> nor levels:<w2>,..."
            )));
        };
        w.validate()?;
        Ok(w)
    }
}

/// Tree distances of one level between the nodes of `G` (rows) and `H`
/// (columns), with distances to the blank tree for each side.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMatrix {
    pub rows: usize,
    pub cols: usize,
    pub pair: Vec<f64>,
    pub blank_g: Vec<f64>,
    pub blank_h: Vec<f64>,
}

impl LevelMatrix {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.pair[u * self.cols + v]
    }
}

/// `levels[t - 1]` holds level `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelDistances {
    pub levels: Vec<LevelMatrix>,
}

fn check_compatible(g: &Graph, h: &Graph) -> Result<()> {
    if g.node_count() > 0 && h.node_count() > 0 && g.feature_dim() != h.feature_dim() {
        return Err(Error::contract(format!(
            "node feature dimensions differ: {} vs {}",
            g.feature_dim(),
            h.feature_dim()
        )));
    }
    if g.edge_count() > 0 && h.edge_count() > 0 && g.edge_dim() != h.edge_dim() {
        return Err(Error::contract(format!(
            "edge feature dimensions differ: {:?} vs {:?}",
            g.edge_dim(),
            h.edge_dim()
        )));
    }
    Ok(())
}

pub fn level_distances(g: &Graph, h: &Graph, depth: usize, w: &DepthWeights) -> Result<LevelDistances> {
    if depth == 0 {
        return Err(Error::contract("depth must be at least 1"));
    }
    check_compatible(g, h)?;
    w.validate()?;
    let weights = (2..=depth).map(|t| w.at(t)).collect::<Result<Vec<_>>>()?;

    let (n, m) = (g.node_count(), h.node_count());
    let mut pair = Vec::with_capacity(n * m);
    for u in 0..n {
        for v in 0..m {
            pair.push(distance(g.feature(u), h.feature(v)));
        }
    }
    let root_norm_g: Vec<f64> = g.features().map(norm).collect();
    let root_norm_h: Vec<f64> = h.features().map(norm).collect();
    let root_pair = pair.clone();
    let mut levels = vec![LevelMatrix {
        rows: n,
        cols: m,
        pair,
        blank_g: root_norm_g.clone(),
        blank_h: root_norm_h.clone(),
    }];

    let edge_norm_g: Vec<f64> = (0..g.edge_count()).map(|e| norm(g.edge_feature(e))).collect();
    let edge_norm_h: Vec<f64> = (0..h.edge_count()).map(|e| norm(h.edge_feature(e))).collect();
    let has_edge_features = g.edge_dim().is_some() || h.edge_dim().is_some();

    let mut buf = Vec::new();
    for &weight in &weights {
        let prev = levels.last().expect("level 1 exists");
        let blank_g = blank_level(g, &root_norm_g, &prev.blank_g, &edge_norm_g, weight);
        let blank_h = blank_level(h, &root_norm_h, &prev.blank_h, &edge_norm_h, weight);

        let mut pair = Vec::with_capacity(n * m);
        for u in 0..n {
            let nu = g.neighbors(u);
            for v in 0..m {
                let nv = h.neighbors(v);
                let size = nu.len().max(nv.len());
                buf.clear();
                buf.resize(size * size, 0.0);
                for (i, &(s, es)) in nu.iter().enumerate() {
                    let row = &mut buf[i * size..(i + 1) * size];
                    for (j, &(r, er)) in nv.iter().enumerate() {
                        let mut c = prev.get(s, r);
                        if has_edge_features {
                            c += edge_distance(g, es, h, er);
                        }
                        row[j] = c;
                    }
                    let to_blank = prev.blank_g[s] + edge_norm_g[es];
                    for slot in row.iter_mut().skip(nv.len()) {
                        *slot = to_blank;
                    }
                }
                for (j, &(r, er)) in nv.iter().enumerate() {
                    let to_blank = prev.blank_h[r] + edge_norm_h[er];
                    for i in nu.len()..size {
                        buf[i * size + j] = to_blank;
                    }
                }
                let ot = min_cost_dense(size, &buf);
                pair.push(root_pair[u * m + v] + weight * ot);
            }
        }
        levels.push(LevelMatrix {
            rows: n,
            cols: m,
            pair,
            blank_g,
            blank_h,
        });
    }
    Ok(LevelDistances { levels })
}

fn edge_distance(g: &Graph, eg: usize, h: &Graph, eh: usize) -> f64 {
    let a = g.edge_feature(eg);
    let b = h.edge_feature(eh);
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 0.0,
        (false, true) => norm(a),
        (true, false) => norm(b),
        (false, false) => distance(a, b),
    }
}

/// `beta_t[u] = |x_u| + w(t) * sum_{s in N(u)} (beta_{t-1}[s] + |e_us|)`.
fn blank_level(g: &Graph, root_norm: &[f64], prev: &[f64], edge_norm: &[f64], weight: f64) -> Vec<f64> {
    (0..g.node_count())
        .map(|u| {
            // sorted so the sum does not depend on node numbering
            let mut terms: Vec<f64> = g
                .neighbors(u)
                .iter()
                .map(|&(s, e)| prev[s] + edge_norm[e])
                .collect();
            terms.sort_unstable_by(f64::total_cmp);
            root_norm[u] + weight * terms.iter().sum::<f64>()
        })
        .collect()
}

fn tmd_ordered(g: &Graph, h: &Graph, depth: usize, w: &DepthWeights) -> Result<f64> {
    let levels = level_distances(g, h, depth, w)?;
    let top = levels.levels.last().expect("depth >= 1");
    let (n, m) = (top.rows, top.cols);
    let size = n.max(m);
    let mut buf = vec![0.0; size * size];
    for i in 0..size {
        for j in 0..size {
            buf[i * size + j] = match (i < n, j < m) {
                (true, true) => top.get(i, j),
                (true, false) => top.blank_g[i],
                (false, true) => top.blank_h[j],
                (false, false) => 0.0,
            };
        }
    }
    Ok(min_cost_dense(size, &buf))
}

/// Tree Mover's Distance between the depth-`depth` computation tree
/// multisets of `g` and `h`.
///
/// The pair is evaluated in a canonical order so the result is bitwise
/// symmetric, and identical graphs short-circuit to exactly zero.
pub fn tmd(g: &Graph, h: &Graph, depth: usize, w: &DepthWeights) -> Result<f64> {
    use std::cmp::Ordering;
    match g.canonical_cmp(h) {
        Ordering::Equal => {
            if depth == 0 {
                return Err(Error::contract("depth must be at least 1"));
            }
            w.validate()?;
            Ok(0.0)
        }
        Ordering::Less => tmd_ordered(g, h, depth, w),
        Ordering::Greater => tmd_ordered(h, g, depth, w),
    }
}

/// Symmetric matrix with zero diagonal, indexed by dataset position.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub labels: Vec<usize>,
    pub values: Vec<Vec<f64>>,
}

/// (ζ-)TMD over all unordered pairs; parallel over pairs, identical output
/// for any thread count.
pub fn pairwise_tmd(
    ds: &GraphDataset,
    depth: usize,
    w: &DepthWeights,
    zeta: Option<&ZetaSpec>,
) -> Result<DistanceMatrix> {
    if ds.is_empty() {
        return Err(Error::contract("dataset is empty"));
    }
    let graphs = simulate_all(ds.graphs(), zeta)?;
    let n = graphs.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(i, j)| tmd(&graphs[i], &graphs[j], depth, w))
        .collect::<Result<Vec<f64>>>()?;
    let mut matrix = vec![vec![0.0; n]; n];
    for (&(i, j), &d) in pairs.iter().zip(&values) {
        matrix[i][j] = d;
        matrix[j][i] = d;
    }
    Ok(DistanceMatrix {
        labels: (0..n).collect(),
        values: matrix,
    })
}

/// (ζ-)TMD from every test graph (rows) to every train graph (columns).
pub fn cross_tmd(
    test: &[Graph],
    train: &[Graph],
    depth: usize,
    w: &DepthWeights,
    zeta: Option<&ZetaSpec>,
) -> Result<Vec<Vec<f64>>> {
    let test = simulate_all(test, zeta)?;
    let train = simulate_all(train, zeta)?;
    test.par_iter()
        .map(|a| {
            train
                .iter()
                .map(|b| tmd(a, b, depth, w))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn simulate_all(graphs: &[Graph], zeta: Option<&ZetaSpec>) -> Result<Vec<Graph>> {
    match zeta {
        None | Some(ZetaSpec::Identity) => Ok(graphs.to_vec()),
        Some(z) => graphs.par_iter().map(|g| simulate(g, z)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetDistance {
    /// Largest per-test minimum.
    pub xi: f64,
    /// Distance from each test graph to its nearest training graph.
    pub minima: Vec<f64>,
}

/// Structural similarity between a test set (rows) and a training set
/// (columns): the maximum over test graphs of the distance to the nearest
/// training graph.
pub fn set_distance(test_to_train: &[Vec<f64>]) -> Result<SetDistance> {
    if test_to_train.is_empty() {
        return Err(Error::contract("no test graphs"));
    }
    let cols = test_to_train[0].len();
    if cols == 0 {
        return Err(Error::contract("no training graphs"));
    }
    let mut minima = Vec::with_capacity(test_to_train.len());
    for row in test_to_train {
        if row.len() != cols {
            return Err(Error::contract("distance matrix rows differ in length"));
        }
        if row.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
            return Err(Error::contract("distances must be finite and nonnegative"));
        }
        minima.push(row.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let xi = minima.iter().copied().fold(0.0, f64::max);
    Ok(SetDistance { xi, minima })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> DepthWeights {
        DepthWeights::Constant(1.0)
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::unit_features(n, &edges).unwrap()
    }

    fn two_triangles() -> Graph {
        Graph::unit_features(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap()
    }

    #[test]
    fn identical_single_nodes() {
        let g = Graph::new(vec![vec![1.0]], vec![], None).unwrap();
        let l = level_distances(&g, &g.clone(), 1, &unit()).unwrap();
        assert_eq!(l.levels[0].pair, vec![0.0]);
    }

    #[test]
    fn edge_versus_isolated_pair() {
        let edge = Graph::unit_features(2, &[(0, 1)]).unwrap();
        let isolated = Graph::unit_features(2, &[]).unwrap();
        let l = level_distances(&edge, &isolated, 2, &unit()).unwrap();
        // root cost 0 plus one child matched to a blank at cost 1
        assert_eq!(l.levels[1].pair, vec![1.0; 4]);
        assert_eq!(l.levels[1].blank_g, vec![2.0, 2.0]);
        assert_eq!(l.levels[1].blank_h, vec![1.0, 1.0]);
        assert_eq!(tmd(&edge, &isolated, 2, &unit()).unwrap(), 2.0);
        assert_eq!(tmd(&isolated, &edge, 2, &unit()).unwrap(), 2.0);
    }

    #[test]
    fn blank_column_level_one() {
        let g = Graph::new(vec![vec![3.0, 4.0]], vec![], None).unwrap();
        let l = level_distances(&g, &g, 1, &unit()).unwrap();
        assert_eq!(l.levels[0].blank_g, vec![5.0]);
    }

    #[test]
    fn cycle_versus_two_triangles_vanishes() {
        for t in 1..=5 {
            assert_eq!(tmd(&cycle(6), &two_triangles(), t, &unit()).unwrap(), 0.0);
        }
    }

    #[test]
    fn self_distance_zero() {
        let g = cycle(5);
        assert_eq!(tmd(&g, &g, 3, &DepthWeights::Constant(0.7)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let a = Graph::new(vec![vec![1.0]], vec![], None).unwrap();
        let b = Graph::new(vec![vec![1.0, 2.0]], vec![], None).unwrap();
        assert!(matches!(tmd(&a, &b, 1, &unit()), Err(Error::Contract(_))));
        assert!(tmd(&a, &a, 0, &unit()).is_err());
        assert!(tmd(&a, &a, 1, &DepthWeights::Constant(0.0)).is_err());
    }

    #[test]
    fn pairwise_small() {
        let g = cycle(3);
        let one = pairwise_tmd(&GraphDataset::unlabeled(vec![g.clone()]), 2, &unit(), None).unwrap();
        assert_eq!(one.values, vec![vec![0.0]]);
        let two = pairwise_tmd(&GraphDataset::unlabeled(vec![g.clone(), g]), 2, &unit(), None).unwrap();
        assert_eq!(two.values, vec![vec![0.0; 2]; 2]);
        let edge = Graph::unit_features(2, &[(0, 1)]).unwrap();
        let isolated = Graph::unit_features(2, &[]).unwrap();
        let m = pairwise_tmd(&GraphDataset::unlabeled(vec![edge, isolated]), 2, &unit(), None).unwrap();
        assert_eq!(m.values, vec![vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert!(pairwise_tmd(&GraphDataset::unlabeled(vec![]), 2, &unit(), None).is_err());
    }

    #[test]
    fn set_distance_cases() {
        let s = set_distance(&[vec![2.0, 5.0], vec![7.0, 1.0]]).unwrap();
        assert_eq!(s.minima, vec![2.0, 1.0]);
        assert_eq!(s.xi, 2.0);
        assert_eq!(set_distance(&[vec![3.5]]).unwrap().xi, 3.5);
        assert_eq!(set_distance(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap().xi, 0.0);
        assert!(set_distance(&[vec![]]).is_err());
        assert!(set_distance(&[]).is_err());
    }

    #[test]
    fn weight_spec_parsing() {
        assert_eq!("const:1.0".parse::<DepthWeights>().unwrap(), DepthWeights::Constant(1.0));
        assert_eq!(
            "levels:1,0.5".parse::<DepthWeights>().unwrap(),
            DepthWeights::PerLevel(vec![1.0, 0.5])
        );
        assert!("const:-1".parse::<DepthWeights>().is_err());
        assert!("nope".parse::<DepthWeights>().is_err());
        let short = DepthWeights::PerLevel(vec![1.0]);
        let g = cycle(3);
        assert!(tmd(&g, &cycle(4), 3, &short).is_err());
    }
}
