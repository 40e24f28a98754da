//! Attributed undirected simple graphs and labeled datasets.
//!
//! Node features are stored row-major in one flat buffer. Edges are kept as
//! `(u, v)` with `u < v`, sorted lexicographically, so two graphs built from
//! the same edge set compare equal regardless of input order.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    node_count: usize,
    feature_dim: usize,
    features: Vec<f64>,
    edges: Vec<(usize, usize)>,
    edge_dim: Option<usize>,
    edge_features: Vec<f64>,
    // (neighbor, edge index), sorted by neighbor
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    /// Builds a graph from per-node features, an edge list and optional
    /// per-edge features. Edges may be given in any orientation and order.
    pub fn new(
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        edge_features: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        Self::build(features, edges, edge_features, 0)
    }

    pub(crate) fn build(
        features: Vec<Vec<f64>>,
        edges: Vec<(usize, usize)>,
        edge_features: Option<Vec<Vec<f64>>>,
        index: usize,
    ) -> Result<Self> {
        let feature_dim = features.first().map_or(0, Vec::len);
        if features.iter().any(|x| x.len() != feature_dim) {
            return Err(Error::validation(index, "ragged node features"));
        }
        let edge_dim = match &edge_features {
            None => None,
            Some(ef) => {
                if ef.len() != edges.len() {
                    return Err(Error::validation(
                        index,
                        "edge feature count does not match edge count",
                    ));
                }
                let dim = ef.first().map_or(0, Vec::len);
                if ef.iter().any(|e| e.len() != dim) {
                    return Err(Error::validation(index, "ragged edge features"));
                }
                Some(dim)
            }
        };
        let node_count = features.len();
        let flat: Vec<f64> = features.into_iter().flatten().collect();
        let flat_edges: Vec<f64> = edge_features.into_iter().flatten().flatten().collect();
        Self::from_parts_indexed(
            node_count,
            feature_dim,
            flat,
            edges,
            edge_dim,
            flat_edges,
            index,
        )
    }

    /// Builds a graph from flat row-major buffers. Useful when the node count
    /// may be zero but the feature dimension still matters.
    pub fn from_parts(
        node_count: usize,
        feature_dim: usize,
        features: Vec<f64>,
        edges: Vec<(usize, usize)>,
        edge_dim: Option<usize>,
        edge_features: Vec<f64>,
    ) -> Result<Self> {
        Self::from_parts_indexed(
            node_count,
            feature_dim,
            features,
            edges,
            edge_dim,
            edge_features,
            0,
        )
    }

    fn from_parts_indexed(
        node_count: usize,
        feature_dim: usize,
        features: Vec<f64>,
        edges: Vec<(usize, usize)>,
        edge_dim: Option<usize>,
        edge_features: Vec<f64>,
        index: usize,
    ) -> Result<Self> {
        if features.len() != node_count * feature_dim {
            return Err(Error::validation(index, "ragged node features"));
        }
        if features.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation(index, "non-finite node feature"));
        }
        let ed = edge_dim.unwrap_or(0);
        if edge_features.len() != edges.len() * ed {
            return Err(Error::validation(index, "ragged edge features"));
        }
        if edge_features.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation(index, "non-finite edge feature"));
        }

        let mut keyed: Vec<((usize, usize), usize)> = Vec::with_capacity(edges.len());
        for (i, &(a, b)) in edges.iter().enumerate() {
            if a >= node_count || b >= node_count {
                return Err(Error::validation(
                    index,
                    format!("edge ({a}, {b}) has endpoint out of range"),
                ));
            }
            if a == b {
                return Err(Error::validation(index, "self-loop"));
            }
            keyed.push(((a.min(b), a.max(b)), i));
        }
        keyed.sort_unstable();
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            let (u, v) = w[0].0;
            return Err(Error::validation(index, format!("duplicate edge ({u}, {v})")));
        }

        let sorted_edges: Vec<(usize, usize)> = keyed.iter().map(|&(e, _)| e).collect();
        let mut sorted_features = Vec::with_capacity(edge_features.len());
        for &(_, i) in &keyed {
            sorted_features.extend_from_slice(&edge_features[i * ed..(i + 1) * ed]);
        }

        let mut adjacency = vec![Vec::new(); node_count];
        for (e, &(u, v)) in sorted_edges.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(Graph {
            node_count,
            feature_dim,
            features,
            edges: sorted_edges,
            edge_dim,
            edge_features: sorted_features,
            adjacency,
        })
    }

    /// Graph whose nodes all carry the feature `[1.0]`.
    pub fn unit_features(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(vec![vec![1.0]; node_count], edges.to_vec(), None)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn edge_dim(&self) -> Option<usize> {
        self.edge_dim
    }

    pub fn feature(&self, v: usize) -> &[f64] {
        &self.features[v * self.feature_dim..(v + 1) * self.feature_dim]
    }

    pub fn features(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.node_count).map(move |v| self.feature(v))
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Feature of edge `e`; empty when the graph carries no edge features.
    pub fn edge_feature(&self, e: usize) -> &[f64] {
        match self.edge_dim {
            Some(d) => &self.edge_features[e * d..(e + 1) * d],
            None => &[],
        }
    }

    /// `(neighbor, edge index)` pairs of `v`, ascending by neighbor.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count
            && self.adjacency[u]
                .binary_search_by(|&(w, _)| w.cmp(&v))
                .is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Returns a copy with node features replaced.
    pub fn with_features(&self, feature_dim: usize, features: Vec<f64>) -> Result<Self> {
        let ef = self.edge_features.clone();
        Self::from_parts(
            self.node_count,
            feature_dim,
            features,
            self.edges.clone(),
            self.edge_dim,
            ef,
        )
    }

    /// Relabels nodes: old node `i` becomes node `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.node_count {
            return Err(Error::contract("permutation length differs from node count"));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::contract("not a permutation"));
            }
        }
        let d = self.feature_dim;
        let mut features = vec![0.0; self.features.len()];
        for (old, &new) in perm.iter().enumerate() {
            features[new * d..(new + 1) * d].copy_from_slice(self.feature(old));
        }
        let edges = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Self::from_parts(
            self.node_count,
            d,
            features,
            edges,
            self.edge_dim,
            self.edge_features.clone(),
        )
    }

    /// Total order on graphs by their canonical stored form (bitwise on
    /// reals). Equal iff the stored representations are identical.
    pub fn canonical_cmp(&self, other: &Graph) -> Ordering {
        fn bits(xs: &[f64]) -> impl Iterator<Item = u64> + '_ {
            xs.iter().map(|x| x.to_bits())
        }
        self.node_count
            .cmp(&other.node_count)
            .then(self.feature_dim.cmp(&other.feature_dim))
            .then_with(|| bits(&self.features).cmp(bits(&other.features)))
            .then_with(|| self.edges.cmp(&other.edges))
            .then(self.edge_dim.cmp(&other.edge_dim))
            .then_with(|| bits(&self.edge_features).cmp(bits(&other.edge_features)))
    }

    pub fn stats(&self) -> GraphStats {
        graph_stats(self)
    }
}

/// Euclidean norm with summation in index order.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance between equal-length vectors.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphStats {
    pub max_degree: usize,
    pub feature_bound: f64,
    pub node_count: usize,
    pub edge_count: usize,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    GraphStats {
        max_degree: g.max_degree(),
        feature_bound: g.features().map(norm).fold(0.0, f64::max),
        node_count: g.node_count(),
        edge_count: g.edge_count(),
    }
}

/// Graphs with optional class labels in `0..classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    graphs: Vec<Graph>,
    labels: Option<Vec<usize>>,
    classes: usize,
}

impl GraphDataset {
    pub fn unlabeled(graphs: Vec<Graph>) -> Self {
        GraphDataset {
            graphs,
            labels: None,
            classes: 0,
        }
    }

    /// `classes` defaults to `max(label) + 1`.
    pub fn labeled(graphs: Vec<Graph>, labels: Vec<usize>, classes: Option<usize>) -> Result<Self> {
        if labels.len() != graphs.len() {
            return Err(Error::contract(format!(
                "{} labels for {} graphs",
                labels.len(),
                graphs.len()
            )));
        }
        let inferred = labels.iter().max().map_or(0, |m| m + 1);
        let classes = classes.unwrap_or(inferred);
        if let Some(i) = labels.iter().position(|&y| y >= classes) {
            return Err(Error::validation(
                i,
                format!("label {} not below class count {classes}", labels[i]),
            ));
        }
        Ok(GraphDataset {
            graphs,
            labels: Some(labels),
            classes,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Subset in the given index order, labels carried along.
    pub fn select(&self, indices: &[usize]) -> Self {
        GraphDataset {
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            classes: self.classes,
        }
    }

    pub fn map_graphs<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&Graph) -> Result<Graph>,
    {
        Ok(GraphDataset {
            graphs: self.graphs.iter().map(f).collect::<Result<_>>()?,
            labels: self.labels.clone(),
            classes: self.classes,
        })
    }

    pub fn into_graphs(self) -> Vec<Graph> {
        self.graphs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_single_node_pythagorean() {
        let g = Graph::new(vec![vec![3.0, 4.0]], vec![], None).unwrap();
        let s = graph_stats(&g);
        assert_eq!(s.max_degree, 0);
        assert_eq!(s.feature_bound, 5.0);
    }

    #[test]
    fn stats_triangle_and_star() {
        let k3 = Graph::unit_features(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(graph_stats(&k3).max_degree, 2);
        assert_eq!(graph_stats(&k3).feature_bound, 1.0);

        let star = Graph::unit_features(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]).unwrap();
        let degrees: Vec<usize> = (0..6).map(|v| star.degree(v)).collect();
        assert_eq!(degrees, vec![5, 1, 1, 1, 1, 1]);
        assert_eq!(graph_stats(&star).max_degree, 5);
        assert_eq!(graph_stats(&star).feature_bound, 1.0);
    }

    #[test]
    fn rejects_invariant_violations() {
        let err = Graph::unit_features(2, &[(0, 0)]).unwrap_err();
        assert_eq!(err.to_string(), "self-loop in graph 0");
        assert!(Graph::unit_features(2, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::unit_features(2, &[(0, 2)]).is_err());
        assert!(Graph::new(vec![vec![1.0], vec![1.0, 2.0]], vec![], None).is_err());
        assert!(Graph::new(vec![vec![f64::NAN]], vec![], None).is_err());
    }

    #[test]
    fn edges_are_canonicalized() {
        let a = Graph::unit_features(3, &[(2, 1), (1, 0)]).unwrap();
        let b = Graph::unit_features(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(a.canonical_cmp(&b), Ordering::Equal);
    }

    #[test]
    fn permute_preserves_structure() {
        let g = Graph::new(
            vec![vec![1.0], vec![2.0], vec![3.0]],
            vec![(0, 1)],
            Some(vec![vec![0.5]]),
        )
        .unwrap();
        let p = g.permute(&[2, 0, 1]).unwrap();
        assert_eq!(p.feature(2), &[1.0]);
        assert_eq!(p.feature(0), &[2.0]);
        assert!(p.has_edge(0, 2));
        assert_eq!(p.edge_feature(0), &[0.5]);
    }

    #[test]
    fn dataset_label_checks() {
        let g = Graph::unit_features(1, &[]).unwrap();
        assert!(GraphDataset::labeled(vec![g.clone()], vec![0, 1], None).is_err());
        assert!(GraphDataset::labeled(vec![g.clone()], vec![2], Some(2)).is_err());
        let ds = GraphDataset::labeled(vec![g.clone(), g], vec![0, 3], None).unwrap();
        assert_eq!(ds.classes(), 4);
    }
}
