//! Generalization-gap bound for message-passing classifiers in terms of the
//! structural similarity `ξ` between test and training graphs, with every
//! hidden constant set to 1, plus the curves derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnn::{spectral_norm, Matrix};

/// Every scalar entering the bound.
///
/// `lip_eta` is the Lipschitz constant of the label functions and
/// `spec_cap` the cap on weight spectral norms; they are unrelated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundParams {
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub n_train: u64,
    pub classes: u64,
    pub lip_eta: f64,
    pub spec_cap: f64,
    pub hidden_dim: u64,
    pub depth_count: u64,
    pub max_degree: u64,
    pub feature_bound: f64,
    pub weight_sq_norm_sum: f64,
    pub train_margin_loss: f64,
    #[serde(default)]
    pub xi: f64,
}

/// The bound split into its parts; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    pub empirical: f64,
    pub weight: f64,
    pub complexity: f64,
    pub sample: f64,
    pub similarity: f64,
    pub total: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::contract(format!("bound parameter {what}")));
        let finite = [
            self.gamma,
            self.delta,
            self.alpha,
            self.lip_eta,
            self.spec_cap,
            self.feature_bound,
            self.weight_sq_norm_sum,
            self.train_margin_loss,
            self.xi,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return fail("values must be finite");
        }
        if self.gamma <= 0.0 {
            return fail("gamma must be > 0");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail("delta must lie in (0, 1)");
        }
        if !(self.alpha > 0.0 && self.alpha < 0.25) {
            return fail("alpha must lie in (0, 0.25)");
        }
        if self.n_train < 1 {
            return fail("n_train must be >= 1");
        }
        if self.classes < 2 {
            return fail("classes must be >= 2");
        }
        if self.lip_eta < 0.0 {
            return fail("lip_eta must be >= 0");
        }
        if self.spec_cap <= 0.0 {
            return fail("spec_cap must be > 0");
        }
        if self.hidden_dim < 1 || self.depth_count < 1 {
            return fail("hidden_dim and depth_count must be >= 1");
        }
        if self.feature_bound < 0.0 || self.weight_sq_norm_sum < 0.0 || self.xi < 0.0 {
            return fail("feature_bound, weight_sq_norm_sum and xi must be >= 0");
        }
        if !(0.0..=1.0).contains(&self.train_margin_loss) {
            return fail("train_margin_loss must lie in [0, 1]");
        }
        Ok(())
    }
}

pub fn bound_terms(p: &BoundParams) -> Result<BoundTerms> {
    p.validate()?;
    let b = p.hidden_dim as f64;
    let depth = p.depth_count as f64;
    let n = p.n_train as f64;
    let n_2a = n.powf(2.0 * p.alpha);

    let weight = b * p.weight_sq_norm_sum * p.xi.powf(2.0 / depth)
        / (n_2a * (p.gamma / 8.0).powf(2.0 / depth));

    let db = p.max_degree as f64 * p.feature_bound;
    let spread = if db == 0.0 { 1.0 } else { (2.0 * db).powf(1.0 / depth) };
    let log = (2.0 * b * depth * p.spec_cap * spread).ln().max(0.0);
    let complexity = b * b * log / (n_2a * p.gamma.powf(1.0 / depth) * p.delta);

    let sample = 1.0 / n.powf(1.0 - 2.0 * p.alpha);
    let similarity = p.lip_eta * p.classes as f64 * p.xi;
    Ok(BoundTerms {
        empirical: p.train_margin_loss,
        weight,
        complexity,
        sample,
        similarity,
        total: p.train_margin_loss + weight + complexity + sample + similarity,
    })
}

/// Upper bound on the expected test margin loss.
pub fn generalization_gap_bound(p: &BoundParams) -> Result<f64> {
    Ok(bound_terms(p)?.total)
}

/// Bound for a frozen encoder followed by a trained classifier. `p` should
/// describe the classifier alone (its weights, hidden width and matrix
/// count); `xi_latent` is the structural similarity measured in the
/// encoder's latent space.
pub fn fixed_encoder_bound(p: &BoundParams, xi_latent: f64) -> Result<f64> {
    generalization_gap_bound(&BoundParams {
        xi: xi_latent,
        ..p.clone()
    })
}

/// Sum of squared spectral norms.
pub fn weight_sq_norm_sum<'a>(matrices: impl IntoIterator<Item = &'a Matrix>) -> f64 {
    matrices
        .into_iter()
        .map(|m| {
            let s = spectral_norm(m);
            s * s
        })
        .sum()
}

/// Bound as a function of distance to the training set: entry `i` uses the
/// largest of the first `i + 1` sorted per-test minima as `ξ`.
pub fn bound_curve(sorted_minima: &[f64], p: &BoundParams) -> Result<Vec<f64>> {
    if sorted_minima.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::contract("distances must be finite and nonnegative"));
    }
    if sorted_minima.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::contract("distances must be sorted ascending"));
    }
    let mut running = 0.0f64;
    sorted_minima
        .iter()
        .map(|&d| {
            running = running.max(d);
            generalization_gap_bound(&BoundParams {
                xi: running,
                ..p.clone()
            })
        })
        .collect()
}

/// Running accuracy over test items ordered by distance to the training
/// set (stable on ties): entry `i` is the mean correctness of the `i + 1`
/// nearest items.
pub fn cumulative_accuracy(distances: &[f64], correct: &[bool]) -> Result<Vec<f64>> {
    if distances.len() != correct.len() {
        return Err(Error::contract("distances and correctness differ in length"));
    }
    if distances.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::contract("distances must be finite and nonnegative"));
    }
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]));
    let mut hits = 0usize;
    Ok(order
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            hits += usize::from(correct[j]);
            hits as f64 / (i + 1) as f64
        })
        .collect())
}
