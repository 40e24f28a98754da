//! Reference message-passing network: sum aggregation, bias-free ReLU MLPs,
//! global sum pooling and an MLP classifier. Inference only.
//!
//! Layer `t` computes `x_v <- f(x_v ++ sum_{u in N(v)} g(x_u ++ e_vu))`.
//! Sums over neighbors and over nodes are accumulated after sorting their
//! terms, so the output does not depend on node numbering, bit for bit.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense row-major matrix acting on column vectors (`rows` = output dim).
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::contract(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::contract("matrix entries must be finite"));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::contract("ragged matrix rows"));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { rows: n, cols: n, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * yi;
            }
        }
        out
    }
}

fn unit_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value, by power iteration on `AᵀA`.
///
/// The iteration starts from the normalized all-ones vector. Because a start
/// vector orthogonal to the top singular direction would converge to a
/// smaller value, it is repeated from every standard basis vector and the
/// largest estimate is returned.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.rows == 0 || m.cols == 0 || m.data.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let n = m.cols;
    let ones = vec![1.0 / (n as f64).sqrt(); n];
    let mut best = power_iteration(m, ones);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        best = best.max(power_iteration(m, e));
    }
    best
}

fn power_iteration(m: &Matrix, mut v: Vec<f64>) -> f64 {
    const MAX_ITERS: usize = 1000;
    const TOL: f64 = 1e-10;
    let mut sigma = unit_norm(&m.apply(&v));
    for _ in 0..MAX_ITERS {
        let w = m.apply_transpose(&m.apply(&v));
        let len = unit_norm(&w);
        if len == 0.0 {
            return sigma;
        }
        v = w.into_iter().map(|x| x / len).collect();
        let next = unit_norm(&m.apply(&v));
        let done = (next - sigma).abs() <= TOL * next.max(1.0);
        sigma = next;
        if done {
            break;
        }
    }
    sigma
}

/// Bias-free MLP: matrices applied in order, ReLU between consecutive ones.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpWeights {
    matrices: Vec<Matrix>,
}

impl MlpWeights {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::contract("an MLP needs at least one matrix"));
        }
        for pair in matrices.windows(2) {
            if pair[1].cols != pair[0].rows {
                return Err(Error::contract(format!(
                    "MLP layer dimensions do not chain: {}x{} then {}x{}",
                    pair[0].rows, pair[0].cols, pair[1].rows, pair[1].cols
                )));
            }
        }
        Ok(MlpWeights { matrices })
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn input_dim(&self) -> usize {
        self.matrices[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.matrices[self.matrices.len() - 1].rows
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut h = self.matrices[0].apply(x);
        for m in &self.matrices[1..] {
            for v in &mut h {
                *v = v.max(0.0);
            }
            h = m.apply(&h);
        }
        h
    }

    /// Product of the spectral norms of the matrices.
    pub fn lipschitz(&self) -> f64 {
        self.matrices.iter().map(spectral_norm).product()
    }
}

/// One message-passing round: message MLP `g` and update MLP `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MpnnLayer {
    pub message: MlpWeights,
    pub update: MlpWeights,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpnnModel {
    layers: Vec<MpnnLayer>,
    classifier: MlpWeights,
    input_dim: usize,
    edge_dim: usize,
}

impl MpnnModel {
    /// Checks that all dimensions chain. `edge_dim` is 0 for graphs
    /// without edge features.
    pub fn new(
        layers: Vec<MpnnLayer>,
        classifier: MlpWeights,
        input_dim: usize,
        edge_dim: usize,
    ) -> Result<Self> {
        let mut dim = input_dim;
        for (t, layer) in layers.iter().enumerate() {
            if layer.message.input_dim() != dim + edge_dim {
                return Err(Error::contract(format!(
                    "layer {t}: message input is {}, expected {}",
                    layer.message.input_dim(),
                    dim + edge_dim
                )));
            }
            let expected = dim + layer.message.output_dim();
            if layer.update.input_dim() != expected {
                return Err(Error::contract(format!(
                    "layer {t}: update input is {}, expected {expected}",
                    layer.update.input_dim()
                )));
            }
            dim = layer.update.output_dim();
        }
        if classifier.input_dim() != dim {
            return Err(Error::contract(format!(
                "classifier input is {}, expected {dim}",
                classifier.input_dim()
            )));
        }
        Ok(MpnnModel {
            layers,
            classifier,
            input_dim,
            edge_dim,
        })
    }

    pub fn layers(&self) -> &[MpnnLayer] {
        &self.layers
    }

    pub fn classifier(&self) -> &MlpWeights {
        &self.classifier
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn edge_dim(&self) -> usize {
        self.edge_dim
    }

    pub fn classes(&self) -> usize {
        self.classifier.output_dim()
    }

    /// Every learnable matrix, layer by layer, classifier last.
    pub fn all_matrices(&self) -> impl Iterator<Item = &Matrix> {
        self.layers
            .iter()
            .flat_map(|l| l.message.matrices().iter().chain(l.update.matrices()))
            .chain(self.classifier.matrices())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parse_err = |message: String| Error::Parse { line: 1, message };
        let root: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let layers = root
            .get("layers")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err("missing \"layers\" array".into()))?;
        let mut parsed = Vec::with_capacity(layers.len());
        for (t, layer) in layers.iter().enumerate() {
            let mlp = |key: &str| {
                layer
                    .get(key)
                    .ok_or_else(|| parse_err(format!("layer {t} has no \"{key}\"")))
                    .and_then(mlp_from_value)
            };
            parsed.push(MpnnLayer {
                message: mlp("g")?,
                update: mlp("f")?,
            });
        }
        let classifier = mlp_from_value(
            root.get("classifier")
                .ok_or_else(|| parse_err("missing \"classifier\"".into()))?,
        )?;

        // g takes x ++ e and f takes x ++ message, which pins both dims.
        let (input_dim, edge_dim) = match parsed.first() {
            Some(l) => {
                let input = l
                    .update
                    .input_dim()
                    .checked_sub(l.message.output_dim())
                    .ok_or_else(|| Error::contract("update input narrower than message"))?;
                let edge = l
                    .message
                    .input_dim()
                    .checked_sub(input)
                    .ok_or_else(|| Error::contract("message input narrower than node dim"))?;
                (input, edge)
            }
            None => (classifier.input_dim(), 0),
        };
        let meta = root.get("meta");
        let meta_dim = |key: &str| meta.and_then(|m| m.get(key)).and_then(Value::as_u64);
        let edge_dim = match meta_dim("edge_dim") {
            Some(e) if parsed.is_empty() => e as usize,
            Some(e) if e as usize != edge_dim => {
                return Err(Error::contract("meta.edge_dim disagrees with layer shapes"))
            }
            _ => edge_dim,
        };
        if meta_dim("input_dim").is_some_and(|d| d as usize != input_dim) {
            return Err(Error::contract("meta.input_dim disagrees with layer shapes"));
        }
        MpnnModel::new(parsed, classifier, input_dim, edge_dim)
    }

    pub fn to_json(&self) -> String {
        let mlp = |m: &MlpWeights| -> Value {
            Value::Array(m.matrices().iter().map(|w| json!(w.to_rows())).collect())
        };
        let layers: Vec<Value> = self
            .layers
            .iter()
            .map(|l| json!({"g": mlp(&l.message), "f": mlp(&l.update)}))
            .collect();
        let doc = json!({
            "layers": layers,
            "classifier": mlp(&self.classifier),
            "meta": {
                "input_dim": self.input_dim,
                "edge_dim": self.edge_dim,
                "classes": self.classes(),
            },
        });
        let mut out = serde_json::to_string_pretty(&doc).expect("weights serialize");
        out.push('\n');
        out
    }
}

fn mlp_from_value(v: &Value) -> Result<MlpWeights> {
    let bad = || Error::Parse {
        line: 1,
        message: "an MLP must be a matrix or an array of matrices of numbers".into(),
    };
    let arr = v.as_array().ok_or_else(bad)?;
    let is_3d = arr
        .first()
        .and_then(Value::as_array)
        .and_then(|r| r.first())
        .is_some_and(Value::is_array);
    let to_matrix = |m: &Value| -> Result<Matrix> {
        let rows = m
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(bad))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&rows)
    };
    let matrices = if is_3d {
        arr.iter().map(to_matrix).collect::<Result<Vec<_>>>()?
    } else {
        vec![to_matrix(v)?]
    };
    MlpWeights::new(matrices)
}

/// Shape of a randomly initialized model. Every MLP has two matrices with
/// `hidden` units between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub edge_dim: usize,
    /// Node dimension after each layer; its length is the number of layers.
    pub widths: Vec<usize>,
    pub hidden: usize,
    pub classes: usize,
}

impl MpnnModel {
    /// Entries uniform in `[-1, 1] / sqrt(fan_in)`, drawn in a fixed order
    /// from a seeded ChaCha stream.
    pub fn random(arch: &Architecture, seed: u64) -> Result<Self> {
        if arch.hidden == 0 || arch.classes == 0 || arch.widths.contains(&0) {
            return Err(Error::contract("all widths must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut matrix = |rows: usize, cols: usize| {
            let scale = 1.0 / (cols.max(1) as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.random_range(-1.0..=1.0) * scale)
                .collect();
            Matrix { rows, cols, data }
        };
        let h = arch.hidden;
        let mut dim = arch.input_dim;
        let mut layers = Vec::with_capacity(arch.widths.len());
        for &width in &arch.widths {
            let message = MlpWeights::new(vec![matrix(h, dim + arch.edge_dim), matrix(h, h)])?;
            let update = MlpWeights::new(vec![matrix(h, dim + h), matrix(width, h)])?;
            layers.push(MpnnLayer { message, update });
            dim = width;
        }
        let classifier = MlpWeights::new(vec![matrix(h, dim), matrix(arch.classes, h)])?;
        MpnnModel::new(layers, classifier, arch.input_dim, arch.edge_dim)
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn sorted_sum(mut terms: Vec<Vec<f64>>, dim: usize) -> Vec<f64> {
    terms.sort_by(|a, b| lex_cmp(a, b));
    let mut acc = vec![0.0; dim];
    for t in &terms {
        for (a, x) in acc.iter_mut().zip(t) {
            *a += x;
        }
    }
    acc
}

fn check_graph(m: &MpnnModel, g: &Graph) -> Result<()> {
    if g.node_count() > 0 && g.feature_dim() != m.input_dim {
        return Err(Error::contract(format!(
            "graph feature dim {} does not match model input dim {}",
            g.feature_dim(),
            m.input_dim
        )));
    }
    if !m.layers.is_empty() && g.edge_count() > 0 {
        let have = g.edge_dim().unwrap_or(0);
        if have != m.edge_dim {
            return Err(Error::contract(format!(
                "graph edge dim {have} does not match model edge dim {}",
                m.edge_dim
            )));
        }
    }
    Ok(())
}

/// Node embeddings after all message-passing layers.
pub fn node_embeddings(m: &MpnnModel, g: &Graph) -> Result<Vec<Vec<f64>>> {
    check_graph(m, g)?;
    let mut x: Vec<Vec<f64>> = g.features().map(<[f64]>::to_vec).collect();
    for layer in &m.layers {
        let msg_dim = layer.message.output_dim();
        let mut next = Vec::with_capacity(x.len());
        for (v, xv) in x.iter().enumerate() {
            let messages = g
                .neighbors(v)
                .iter()
                .map(|&(u, e)| {
                    let mut input = x[u].clone();
                    if m.edge_dim > 0 {
                        input.extend_from_slice(g.edge_feature(e));
                    }
                    layer.message.apply(&input)
                })
                .collect();
            let mut input = xv.clone();
            input.extend(sorted_sum(messages, msg_dim));
            next.push(layer.update.apply(&input));
        }
        x = next;
    }
    Ok(x)
}

/// Logits of one graph: classifier applied to the sum of node embeddings.
pub fn forward(m: &MpnnModel, g: &Graph) -> Result<Vec<f64>> {
    let x = node_embeddings(m, g)?;
    let pooled = sorted_sum(x, m.classifier.input_dim());
    Ok(m.classifier.apply(&pooled))
}

/// `L_c · Π_t 2·L_f·L_g`, each factor the product of its MLP's spectral
/// norms. Message and update factors are floored at 1, which the bound's
/// inductive step requires.
pub fn lipschitz_bound(m: &MpnnModel) -> f64 {
    let mut bound = m.classifier.lipschitz();
    for layer in &m.layers {
        bound *= 2.0 * layer.update.lipschitz().max(1.0) * layer.message.lipschitz().max(1.0);
    }
    bound
}

/// Fraction of graphs whose true-class logit does not beat every other
/// logit by more than `gamma`.
pub fn margin_loss(logits: &[Vec<f64>], labels: &[usize], gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::contract("margin must be nonnegative"));
    }
    if logits.len() != labels.len() {
        return Err(Error::contract("one label per logits row required"));
    }
    if logits.is_empty() {
        return Err(Error::contract("no graphs"));
    }
    let mut failures = 0usize;
    for (row, &y) in logits.iter().zip(labels) {
        if row.len() < 2 {
            return Err(Error::contract("margin loss needs at least two classes"));
        }
        if y >= row.len() {
            return Err(Error::contract(format!(
                "label {y} out of range for {} classes",
                row.len()
            )));
        }
        let best_other = row
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != y)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if row[y] <= gamma + best_other {
            failures += 1;
        }
    }
    Ok(failures as f64 / logits.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Graph {
        Graph::unit_features(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn arch(widths: Vec<usize>) -> Architecture {
        Architecture {
            input_dim: 1,
            edge_dim: 0,
            widths,
            hidden: 4,
            classes: 2,
        }
    }

    #[test]
    fn spectral_norm_small_cases() {
        assert!((spectral_norm(&Matrix::identity(2)) - 1.0).abs() < 1e-12);
        let d = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        assert!((spectral_norm(&d) - 4.0).abs() < 1e-9);
        // top right-singular vector is orthogonal to the all-ones start
        let m = Matrix::from_rows(&[vec![1.0, -1.0], vec![1.0, -1.0]]).unwrap();
        assert!((spectral_norm(&m) - 2.0).abs() < 1e-9);
        assert_eq!(spectral_norm(&Matrix::zeros(3, 2)), 0.0);
    }

    #[test]
    fn zero_weights_give_zero_logits() {
        let z = |r, c| MlpWeights::new(vec![Matrix::zeros(r, c)]).unwrap();
        let layer = MpnnLayer {
            message: z(3, 1),
            update: z(2, 4),
        };
        let m = MpnnModel::new(vec![layer], z(2, 2), 1, 0).unwrap();
        assert_eq!(forward(&m, &k3()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn no_layers_identity_classifier() {
        let c = MlpWeights::new(vec![Matrix::identity(2)]).unwrap();
        let m = MpnnModel::new(vec![], c, 2, 0).unwrap();
        let g = Graph::new(vec![vec![0.5, -2.0]], vec![], None).unwrap();
        assert_eq!(forward(&m, &g).unwrap(), vec![0.5, -2.0]);
    }

    #[test]
    fn relabeling_gives_identical_logits() {
        let m = MpnnModel::random(&arch(vec![3, 3]), 11).unwrap();
        let g = Graph::new(
            vec![vec![0.3], vec![-1.7], vec![2.2], vec![0.9]],
            vec![(0, 1), (1, 2), (0, 2), (2, 3)],
            None,
        )
        .unwrap();
        let p = g.permute(&[2, 0, 3, 1]).unwrap();
        assert_eq!(forward(&m, &g).unwrap(), forward(&m, &p).unwrap());
    }

    #[test]
    fn lipschitz_formula() {
        let id = |n| MlpWeights::new(vec![Matrix::identity(n)]).unwrap();
        let layer = || MpnnLayer {
            message: id(1),
            update: MlpWeights::new(vec![Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap()]).unwrap(),
        };
        let m = MpnnModel::new(vec![layer(), layer()], id(1), 1, 0).unwrap();
        assert!((lipschitz_bound(&m) - 4.0).abs() < 1e-12);

        let c = MlpWeights::new(vec![Matrix::from_rows(&[vec![3.0]]).unwrap()]).unwrap();
        let m = MpnnModel::new(vec![], c, 1, 0).unwrap();
        assert!((lipschitz_bound(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_recomposes_from_norms() {
        let m = MpnnModel::random(&arch(vec![4, 2]), 5).unwrap();
        let mut hand: f64 = m.classifier().matrices().iter().map(spectral_norm).product();
        for l in m.layers() {
            let lf: f64 = l.update.matrices().iter().map(spectral_norm).product();
            let lg: f64 = l.message.matrices().iter().map(spectral_norm).product();
            hand *= 2.0 * lf.max(1.0) * lg.max(1.0);
        }
        assert_eq!(lipschitz_bound(&m), hand);
    }

    #[test]
    fn margin_loss_cases() {
        assert_eq!(margin_loss(&[vec![10.0, 0.0]], &[0], 1.0).unwrap(), 0.0);
        let zeros = vec![vec![0.0, 0.0]; 3];
        assert_eq!(margin_loss(&zeros, &[0, 1, 0], 0.0).unwrap(), 1.0);
        let rows = vec![vec![2.0, 0.0], vec![0.0, 2.0]];
        assert_eq!(margin_loss(&rows, &[0, 0], 1.0).unwrap(), 0.5);
        assert_eq!(margin_loss(&rows, &[0, 1], f64::INFINITY).unwrap(), 1.0);
        assert!(margin_loss(&rows, &[0, 2], 1.0).is_err());
        assert!(margin_loss(&rows, &[0, 0], -1.0).is_err());
    }

    #[test]
    fn json_roundtrip_and_shape_inference() {
        let a = Architecture {
            input_dim: 3,
            edge_dim: 2,
            widths: vec![5],
            hidden: 4,
            classes: 3,
        };
        let m = MpnnModel::random(&a, 1).unwrap();
        let text = m.to_json();
        let back = MpnnModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!((back.input_dim(), back.edge_dim(), back.classes()), (3, 2, 3));

        let bare = r#"{"layers":[{"g":[[1.0]],"f":[[1.0,1.0]]}],"classifier":[[1.0],[-1.0]]}"#;
        let m = MpnnModel::from_json(bare).unwrap();
        assert_eq!((m.input_dim(), m.edge_dim(), m.classes()), (1, 0, 2));
        assert_eq!(forward(&m, &k3()).unwrap(), vec![9.0, -9.0]);

        assert!(MpnnModel::from_json(r#"{"layers":[],"classifier":[[1.0],[2.0,3.0]]}"#).is_err());
        assert!(MpnnModel::from_json("{").is_err());
    }

    #[test]
    fn dimension_mismatch_is_contract_error() {
        let m = MpnnModel::random(&arch(vec![2]), 3).unwrap();
        let g = Graph::new(vec![vec![1.0, 2.0]], vec![], None).unwrap();
        assert!(matches!(forward(&m, &g), Err(Error::Contract(_))));
    }
}
