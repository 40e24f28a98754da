//! Tree Mover's Distance between attributed graphs, its generalizations
//! through strong simulations, 1-WL refinement, a reference message-passing
//! network and generalization-bound arithmetic.

pub mod assignment;
pub mod bound;
pub mod datagen;
pub mod error;
pub mod graph;
pub mod io;
pub mod mpnn;
pub mod oracle;
pub mod tmd;
pub mod transforms;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{graph_stats, Graph, GraphDataset, GraphStats};
pub use tmd::{pairwise_tmd, set_distance, tmd, DepthWeights};
pub use transforms::{simulate, zeta_tmd, ZetaSpec};
