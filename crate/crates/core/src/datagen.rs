//! Seeded random graph datasets (Erdős–Rényi, Barabási–Albert, stochastic
//! block model), cycle-count median labels, and train/test splitting.
//!
//! Graph `i` of a dataset is drawn from its own ChaCha8 stream (`seed`,
//! stream `i`), so generation is parallel and still reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDataset};
use crate::transforms::{
    cycle_node_counts, fundamental_cycles, simple_cycle_totals, CountMode, PatternFamilySpec,
};

#[derive(Debug, Clone, PartialEq)]
pub enum GenModel {
    ErdosRenyi {
        p: f64,
    },
    BarabasiAlbert {
        m: usize,
    },
    StochasticBlock {
        blocks: (usize, usize),
        p_in: (f64, f64),
        p_out: (f64, f64),
    },
}

impl GenModel {
    pub const DEFAULT_SBM: GenModel = GenModel::StochasticBlock {
        blocks: (3, 6),
        p_in: (0.1, 0.3),
        p_out: (0.001, 0.02),
    };
}

fn parse_range<T: FromStr + Copy>(s: &str) -> Option<(T, T)> {
    match s.split_once(':') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => s.parse().ok().map(|v| (v, v)),
    }
}

impl FromStr for GenModel {
    type Err = Error;

    /// `er:p=<p>`, `ba:m=<m>`, or
    /// `sbm[:blocks=<lo>:<hi>,p_in=<lo>:<hi>,p_out=<lo>:<hi>]`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for part in args.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::contract(format!("expected key=value, got {part:?}")))?;
            kv.push((k.trim(), v.trim()));
        }
        let bad = |key: &str| Error::contract(format!("invalid or missing {key} in {s:?}"));
        let allow = |keys: &[&str]| -> Result<()> {
            match kv.iter().find(|(k, _)| !keys.contains(k)) {
                Some((k, _)) => Err(Error::contract(format!("unknown key {k:?} in {s:?}"))),
                None => Ok(()),
            }
        };
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|&(_, v)| v);
        let model = match head {
            "er" => {
                allow(&["p"])?;
                let p = get("p").and_then(|v| v.parse().ok()).ok_or_else(|| bad("p"))?;
                GenModel::ErdosRenyi { p }
            }
            "ba" => {
                allow(&["m"])?;
                let m = get("m").and_then(|v| v.parse().ok()).ok_or_else(|| bad("m"))?;
                GenModel::BarabasiAlbert { m }
            }
            "sbm" => {
                allow(&["blocks", "p_in", "p_out"])?;
                let GenModel::StochasticBlock {
                    mut blocks,
                    mut p_in,
                    mut p_out,
                } = GenModel::DEFAULT_SBM
                else {
                    unreachable!()
                };
                if let Some(v) = get("blocks") {
                    blocks = parse_range(v).ok_or_else(|| bad("blocks"))?;
                }
                if let Some(v) = get("p_in") {
                    p_in = parse_range(v).ok_or_else(|| bad("p_in"))?;
                }
                if let Some(v) = get("p_out") {
                    p_out = parse_range(v).ok_or_else(|| bad("p_out"))?;
                }
                GenModel::StochasticBlock {
                    blocks,
                    p_in,
                    p_out,
                }
            }
            other => return Err(Error::contract(format!("unknown graph model {other:?}"))),
        };
        Ok(model)
    }
}

impl fmt::Display for GenModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenModel::ErdosRenyi { p } => write!(f, "er:p={p}"),
            GenModel::BarabasiAlbert { m } => write!(f, "ba:m={m}"),
            GenModel::StochasticBlock {
                blocks,
                p_in,
                p_out,
            } => write!(
                f,
                "sbm:blocks={}:{},p_in={}:{},p_out={}:{}",
                blocks.0, blocks.1, p_in.0, p_in.1, p_out.0, p_out.1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub model: GenModel,
    /// Inclusive node-count range.
    pub nodes: (usize, usize),
    pub count: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.nodes;
        if lo > hi {
            return Err(Error::contract("node range must satisfy lo <= hi"));
        }
        if self.count == 0 {
            return Err(Error::contract("must generate at least one graph"));
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let range = |(a, b): (f64, f64)| prob(a) && prob(b) && a <= b;
        match self.model {
            GenModel::ErdosRenyi { p } if !prob(p) => {
                Err(Error::contract("edge probability must lie in [0, 1]"))
            }
            GenModel::BarabasiAlbert { m } if m == 0 || lo < m + 1 => Err(Error::contract(
                "preferential attachment needs m >= 1 and at least m + 1 nodes",
            )),
            GenModel::StochasticBlock {
                blocks,
                p_in,
                p_out,
            } => {
                if !(range(p_in) && range(p_out)) {
                    Err(Error::contract("block probabilities must be ordered ranges in [0, 1]"))
                } else if blocks.0 == 0 || blocks.0 > blocks.1 {
                    Err(Error::contract("block range must satisfy 1 <= lo <= hi"))
                } else if 3 * blocks.0 > lo {
                    Err(Error::contract(format!(
                        "{} blocks of at least 3 nodes do not fit in {lo} nodes",
                        blocks.0
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Graph `index` of the dataset described by `spec`.
pub fn generate_one(spec: &GenSpec, index: u64) -> Result<Graph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index);
    let n = rng.random_range(spec.nodes.0..=spec.nodes.1);
    let edges = match spec.model {
        GenModel::ErdosRenyi { p } => erdos_renyi(&mut rng, n, p),
        GenModel::BarabasiAlbert { m } => barabasi_albert(&mut rng, n, m),
        GenModel::StochasticBlock {
            blocks,
            p_in,
            p_out,
        } => stochastic_block(&mut rng, n, blocks, p_in, p_out),
    };
    Graph::unit_features(n, &edges)
}

/// Every graph has unit scalar node features.
pub fn generate(spec: &GenSpec) -> Result<GraphDataset> {
    spec.validate()?;
    let graphs = (0..spec.count as u64)
        .into_par_iter()
        .map(|i| generate_one(spec, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(GraphDataset::unlabeled(graphs))
}

fn erdos_renyi(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Seed star on nodes `0..=m` centered at 0; each later node attaches to
/// `m` distinct existing nodes chosen with probability proportional to
/// degree.
fn barabasi_albert(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..=m.min(n.saturating_sub(1))).map(|v| (0, v)).collect();
    let mut endpoints: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    let mut targets = Vec::with_capacity(m);
    for v in (m + 1)..n {
        targets.clear();
        while targets.len() < m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            edges.push((t, v));
            endpoints.extend([t, v]);
        }
    }
    edges
}

fn stochastic_block(
    rng: &mut ChaCha8Rng,
    n: usize,
    blocks: (usize, usize),
    p_in: (f64, f64),
    p_out: (f64, f64),
) -> Vec<(usize, usize)> {
    let count = loop {
        let b = rng.random_range(blocks.0..=blocks.1);
        if 3 * b <= n {
            break b;
        }
    };
    let mut sizes = vec![3usize; count];
    for _ in 0..(n - 3 * count) {
        sizes[rng.random_range(0..count)] += 1;
    }
    let p_in = rng.random_range(p_in.0..=p_in.1);
    let p_out = rng.random_range(p_out.0..=p_out.1);
    let block: Vec<usize> = sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
        .collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] { p_in } else { p_out };
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelSpec {
    pub mode: CountMode,
    pub lengths: Vec<usize>,
}

impl Default for LabelSpec {
    fn default() -> Self {
        LabelSpec {
            mode: CountMode::Subgraph,
            lengths: vec![3, 4],
        }
    }
}

/// Whole-graph number of cycles of each length `3..=lmax` in `mode`.
pub fn graph_cycle_counts(g: &Graph, mode: CountMode, lmax: usize) -> Vec<u64> {
    let mut out = vec![0u64; lmax.saturating_sub(2)];
    match mode {
        CountMode::Subgraph => return simple_cycle_totals(g, lmax),
        CountMode::Homomorphism => {
            let spec = PatternFamilySpec {
                mode,
                max_cycle_length: lmax,
            };
            for counts in cycle_node_counts(g, &spec) {
                for (o, c) in out.iter_mut().zip(counts) {
                    *o = o.saturating_add(c);
                }
            }
        }
        CountMode::CycleBasis => {
            for c in fundamental_cycles(g) {
                if (3..=lmax).contains(&c.len()) {
                    out[c.len() - 3] += 1;
                }
            }
        }
    }
    out
}

/// Labels each graph 1 when its cycle score exceeds the lower median of all
/// scores and 0 otherwise (ties go to 0).
pub fn label_cycle_median(ds: &GraphDataset, spec: &LabelSpec) -> Result<GraphDataset> {
    if ds.is_empty() {
        return Err(Error::contract("cannot label an empty dataset"));
    }
    if spec.lengths.is_empty() || spec.lengths.iter().any(|&l| l < 3) {
        return Err(Error::contract("cycle lengths must be nonempty and >= 3"));
    }
    let lmax = *spec.lengths.iter().max().expect("nonempty");
    let scores: Vec<u64> = ds
        .graphs()
        .par_iter()
        .map(|g| {
            let counts = graph_cycle_counts(g, spec.mode, lmax);
            spec.lengths.iter().map(|&l| counts[l - 3]).sum()
        })
        .collect();
    let mut sorted = scores.clone();
    sorted.sort_unstable();
    let median = sorted[(sorted.len() - 1) / 2];
    let labels = scores.iter().map(|&s| usize::from(s > median)).collect();
    GraphDataset::labeled(ds.graphs().to_vec(), labels, Some(2))
}

/// Random train/test partition; `train_fraction` of the graphs (rounded,
/// and leaving both sides nonempty when there are at least two graphs) go
/// to the training side. Both sides keep the original relative order.
pub fn split(
    ds: &GraphDataset,
    seed: u64,
    train_fraction: f64,
) -> Result<(GraphDataset, GraphDataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::contract("train fraction must lie in (0, 1)"));
    }
    let n = ds.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut k = (train_fraction * n as f64).round() as usize;
    if n >= 2 {
        k = k.clamp(1, n - 1);
    }
    let (train, test) = order.split_at(k.min(n));
    let (mut train, mut test) = (train.to_vec(), test.to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((ds.select(&train), ds.select(&test)))
}
