//! Graph transformations whose 1-WL refinement strongly simulates a more
//! expressive refinement: cycle-count feature augmentation and k-tuple
//! product graphs. `zeta_tmd` is TMD evaluated on the transformed pair.

mod cycles;
mod ktuple;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tmd::{tmd, DepthWeights};

pub use cycles::{cycle_node_counts, for_each_simple_cycle, fundamental_cycles, simple_cycle_totals};
pub use ktuple::{k_tuple_graph, DEFAULT_NODE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountMode {
    /// Closed walks of length l at v, i.e. `(A^l)_{vv}`.
    Homomorphism,
    /// Simple l-cycles through v.
    Subgraph,
    /// Cycles of length l through v in the BFS fundamental basis.
    CycleBasis,
}

impl FromStr for CountMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hom" | "homomorphism" => Ok(CountMode::Homomorphism),
            "sub" | "subgraph" => Ok(CountMode::Subgraph),
            "basis" | "cycle-basis" => Ok(CountMode::CycleBasis),
            other => Err(Error::contract(format!("unknown count mode {other:?}"))),
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountMode::Homomorphism => "hom",
            CountMode::Subgraph => "sub",
            CountMode::CycleBasis => "basis",
        })
    }
}

/// Cycles of every length `3..=max_cycle_length`, counted in one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternFamilySpec {
    pub mode: CountMode,
    pub max_cycle_length: usize,
}

impl PatternFamilySpec {
    pub fn new(mode: CountMode, max_cycle_length: usize) -> Result<Self> {
        if max_cycle_length < 3 {
            return Err(Error::contract("maximum cycle length must be at least 3"));
        }
        Ok(PatternFamilySpec {
            mode,
            max_cycle_length,
        })
    }

    pub fn count_dim(&self) -> usize {
        self.max_cycle_length - 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Locality {
    Global,
    Local,
}

impl FromStr for Locality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Locality::Global),
            "local" => Ok(Locality::Local),
            other => Err(Error::contract(format!("unknown locality {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ZetaSpec {
    Identity,
    FeatureAugment(PatternFamilySpec),
    KTuple { k: usize, locality: Locality },
}

impl FromStr for ZetaSpec {
    type Err = Error;

    /// `identity`, `f-aug:mode=<hom|sub|basis>,lmax=<L>`,
    /// `k-tuple:k=<k>,locality=<global|local>`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, args) = s.split_once(':').unwrap_or((s, ""));
        let mut kv = Vec::new();
        for part in args.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::contract(format!("expected key=value, got {part:?}")))?;
            kv.push((k.trim(), v.trim()));
        }
        let get = |key: &str| kv.iter().find(|(k, _)| *k == key).map(|&(_, v)| v);
        let known = |keys: &[&str]| -> Result<()> {
            match kv.iter().find(|(k, _)| !keys.contains(k)) {
                Some((k, _)) => Err(Error::contract(format!("unknown key {k:?} in {s:?}"))),
                None => Ok(()),
            }
        };
        let int = |key: &str| -> Result<usize> {
            get(key)
                .ok_or_else(|| Error::contract(format!("{s:?} is missing {key}=")))?
                .parse()
                .map_err(|_| Error::contract(format!("{key} must be an integer")))
        };
        match head {
            "identity" => {
                known(&[])?;
                Ok(ZetaSpec::Identity)
            }
            "f-aug" => {
                known(&["mode", "lmax"])?;
                let mode = get("mode")
                    .ok_or_else(|| Error::contract("f-aug needs mode="))?
                    .parse()?;
                Ok(ZetaSpec::FeatureAugment(PatternFamilySpec::new(mode, int("lmax")?)?))
            }
            "k-tuple" => {
                known(&["k", "locality"])?;
                let k = int("k")?;
                if k < 2 {
                    return Err(Error::contract("k-tuple needs k >= 2"));
                }
                let locality = get("locality").unwrap_or("global").parse()?;
                Ok(ZetaSpec::KTuple { k, locality })
            }
            other => Err(Error::contract(format!("unknown transform {other:?}"))),
        }
    }
}

impl fmt::Display for ZetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZetaSpec::Identity => f.write_str("identity"),
            ZetaSpec::FeatureAugment(p) => {
                write!(f, "f-aug:mode={},lmax={}", p.mode, p.max_cycle_length)
            }
            ZetaSpec::KTuple { k, locality } => {
                let loc = match locality {
                    Locality::Global => "global",
                    Locality::Local => "local",
                };
                write!(f, "k-tuple:k={k},locality={loc}")
            }
        }
    }
}

/// Appends each node's cycle-count vector to its feature.
pub fn augment(g: &Graph, spec: &PatternFamilySpec) -> Result<Graph> {
    let counts = cycle_node_counts(g, spec);
    let dim = g.feature_dim() + spec.count_dim();
    let mut features = Vec::with_capacity(g.node_count() * dim);
    for (v, c) in counts.iter().enumerate() {
        features.extend_from_slice(g.feature(v));
        features.extend(c.iter().map(|&x| x as f64));
    }
    g.with_features(dim, features)
}

pub fn simulate(g: &Graph, zeta: &ZetaSpec) -> Result<Graph> {
    simulate_with_budget(g, zeta, DEFAULT_NODE_BUDGET)
}

pub fn simulate_with_budget(g: &Graph, zeta: &ZetaSpec, node_budget: usize) -> Result<Graph> {
    match zeta {
        ZetaSpec::Identity => Ok(g.clone()),
        ZetaSpec::FeatureAugment(p) => augment(g, p),
        ZetaSpec::KTuple { k, locality } => k_tuple_graph(g, *k, *locality, node_budget),
    }
}

pub fn zeta_tmd(g: &Graph, h: &Graph, zeta: &ZetaSpec, depth: usize, w: &DepthWeights) -> Result<f64> {
    tmd(&simulate(g, zeta)?, &simulate(h, zeta)?, depth, w)
}
