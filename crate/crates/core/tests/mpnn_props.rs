mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use treemover::mpnn::{forward, lipschitz_bound, margin_loss, spectral_norm, Architecture, Matrix, MpnnModel};
use treemover::tmd::{tmd, DepthWeights};

fn svd_norm(m: &Matrix) -> f64 {
    let d = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j));
    d.singular_values().iter().copied().fold(0.0, f64::max)
}

fn arb_matrix() -> impl Strategy<Value = Matrix> {
    (1usize..7, 1usize..7).prop_flat_map(|(r, c)| {
        prop::collection::vec(-3.0..3.0f64, r * c).prop_map(move |d| Matrix::new(r, c, d).unwrap())
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

proptest! {
    #[test]
    fn spectral_norm_matches_svd(m in arb_matrix()) {
        let oracle = svd_norm(&m);
        prop_assert!((spectral_norm(&m) - oracle).abs() <= 1e-8 * oracle.max(1.0));
    }

    #[test]
    fn lipschitz_inequality_plain(seed in any::<u64>(), layers in 1usize..=3, width in 1usize..=8,
                                  g in common::arb_graph(8, 1), h in common::arb_graph(8, 1)) {
        let arch = Architecture { input_dim: 1, edge_dim: 0, widths: vec![width; layers], hidden: width, classes: 3 };
        let m = MpnnModel::random(&arch, seed).unwrap();
        let gap = dist(&forward(&m, &g).unwrap(), &forward(&m, &h).unwrap());
        let d = tmd(&g, &h, layers + 1, &DepthWeights::Constant(1.0)).unwrap();
        prop_assert!(lipschitz_bound(&m) * d - gap >= -1e-9, "gap {} bound {}", gap, lipschitz_bound(&m) * d);
    }

    #[test]
    fn margin_loss_monotone_in_gamma(rows in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 1..20),
                                     g1 in 0.0..3.0f64, g2 in 0.0..3.0f64) {
        let labels: Vec<usize> = (0..rows.len()).map(|i| i % 3).collect();
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        let a = margin_loss(&rows, &labels, lo).unwrap();
        let b = margin_loss(&rows, &labels, hi).unwrap();
        prop_assert!(a <= b);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(margin_loss(&rows, &labels, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn forward_is_relabeling_invariant(seed in any::<u64>(), g in common::arb_graph(8, 2)) {
        let arch = Architecture { input_dim: 2, edge_dim: 0, widths: vec![4, 3], hidden: 5, classes: 2 };
        let m = MpnnModel::random(&arch, seed).unwrap();
        let mut r = common::rng(seed ^ 1);
        let p = g.permute(&common::random_permutation(&mut r, g.node_count())).unwrap();
        prop_assert_eq!(forward(&m, &g).unwrap(), forward(&m, &p).unwrap());
    }
}

#[test]
fn seeded_models_are_reproducible() {
    let arch = Architecture { input_dim: 3, edge_dim: 0, widths: vec![4], hidden: 4, classes: 2 };
    assert_eq!(MpnnModel::random(&arch, 9).unwrap(), MpnnModel::random(&arch, 9).unwrap());
    assert_ne!(MpnnModel::random(&arch, 9).unwrap(), MpnnModel::random(&arch, 10).unwrap());
}
