//! One-vs-rest gradient boosting on the logistic loss.
//!
//! For class `k` the margin is `base_k + shrinkage * sum_r tree_{k,r}(x)`.
//! Each round fits a depth-limited regression tree to the residuals
//! `y_k - sigmoid(margin_k)`; each leaf then takes one Newton step,
//! the weighted residual sum over the weighted sum of `p (1 - p)`.
//! Class scores are the softmax of the three margins.

use serde::{Deserialize, Serialize};

use super::tree::{self, Criterion, FeatureSampling, GrowInput, GrowParams, Node, Stats, Tree};
use super::{require_nonzero, require_positive, sample_weights, softmax3, ClassWeight, Dataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtConfig {
    pub n_rounds: usize,
    pub depth: usize,
    pub shrinkage: f64,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig {
            n_rounds: 100,
            depth: 4,
            shrinkage: 0.1,
            class_weight: ClassWeight::None,
        }
    }
}

impl GbtConfig {
    pub fn validate(&self) -> Result<()> {
        require_nonzero("n_rounds", self.n_rounds)?;
        require_nonzero("depth", self.depth)?;
        require_positive("shrinkage", self.shrinkage)
    }
}

const PRIOR_CLAMP: f64 = 1e-6;
/// Leaves with less curvature than this get no update.
const HESSIAN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base: [f64; 3],
    pub shrinkage: f64,
    /// Per class, one regression tree per round.
    pub trees: [Vec<Tree>; 3],
}

impl GbtModel {
    pub fn margins(&self, x: &SparseVector) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = self.margin_after(x, k, self.trees[k].len());
        }
        out
    }

    /// Class-`k` margin using only the first `rounds` trees.
    pub fn margin_after(&self, x: &SparseVector, k: usize, rounds: usize) -> f64 {
        let mut sum = 0.0;
        for t in &self.trees[k][..rounds] {
            sum += t.leaf(x)[0];
        }
        self.base[k] + self.shrinkage * sum
    }

    pub fn scores(&self, x: &SparseVector) -> [f64; 3] {
        softmax3(&self.margins(x))
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub(crate) fn fit(data: &Dataset, cfg: &GbtConfig) -> Result<GbtModel> {
    let n = data.len();
    let weights = sample_weights(data, cfg.class_weight);
    let mass: f64 = weights.iter().sum();
    let entries = tree::sorted_entries(data);
    let mut base = [0.0; 3];
    for k in 0..3 {
        let class_mass: f64 = data
            .labels()
            .iter()
            .zip(&weights)
            .filter(|(l, _)| l.index() == k)
            .map(|(_, w)| w)
            .sum();
        let p = (class_mass / mass).clamp(PRIOR_CLAMP, 1.0 - PRIOR_CLAMP);
        base[k] = (p / (1.0 - p)).ln();
    }
    let params = GrowParams {
        criterion: Criterion::SquaredError,
        max_depth: cfg.depth,
        min_leaf: 1,
        sampling: FeatureSampling::All,
    };
    let y_of = |i: usize, k: usize| if data.labels()[i].index() == k { 1.0 } else { 0.0 };
    let mut trees: [Vec<Tree>; 3] = Default::default();
    // Running per-example tree sums, combined exactly as in prediction.
    let mut sums = vec![[0.0f64; 3]; n];
    let mut residuals = vec![0.0; n];
    let mut stats = vec![Stats::default(); n];
    for round in 0..cfg.n_rounds {
        for k in 0..3 {
            for i in 0..n {
                let y = y_of(i, k);
                let margin = base[k] + cfg.shrinkage * sums[i][k];
                residuals[i] = y - sigmoid(margin);
                stats[i] = Stats {
                    w: [weights[i], weights[i] * residuals[i], 0.0],
                    count: 1,
                };
            }
            let mut t = tree::grow(
                GrowInput {
                    stats: &stats,
                    target: Some(&residuals),
                    samples: (0..n as u32).collect(),
                    entries: entries.clone(),
                },
                &params,
                None,
            );
            // One Newton step per leaf: sum of gradients over sum of hessians.
            let leaf_of: Vec<usize> = data.vectors().iter().map(|x| t.leaf_index(x)).collect();
            let mut step = vec![(0.0f64, 0.0f64); t.nodes().len()];
            for i in 0..n {
                let p = y_of(i, k) - residuals[i];
                let s = &mut step[leaf_of[i]];
                s.0 += weights[i] * residuals[i];
                s.1 += weights[i] * p * (1.0 - p);
            }
            for (leaf, &(g, h)) in step.iter().enumerate() {
                if matches!(t.nodes()[leaf], Node::Leaf { .. }) {
                    t.set_leaf(leaf, vec![if h > HESSIAN_FLOOR { g / h } else { 0.0 }]);
                }
            }
            for (i, x) in data.vectors().iter().enumerate() {
                sums[i][k] += t.leaf(x)[0];
            }
            trees[k].push(t);
        }
        if sums.iter().flatten().any(|s| !s.is_finite()) {
            return Err(Error::Training(format!(
                "boosting margins became non-finite in round {round} (shrinkage {})",
                cfg.shrinkage
            )));
        }
    }
    Ok(GbtModel {
        base,
        shrinkage: cfg.shrinkage,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{argmax_label, SentimentLabel::*};
    use crate::models::fixtures;

    #[test]
    fn xor_is_fit_with_depth_two() {
        let data = fixtures::xor();
        let cfg = GbtConfig {
            n_rounds: 20,
            depth: 2,
            ..GbtConfig::default()
        };
        let m = fit(&data, &cfg).unwrap();
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            assert_eq!(argmax_label(&m.scores(x)), y);
        }
    }

    #[test]
    fn margin_is_base_plus_scaled_tree_sum() {
        let data = fixtures::dense(&[
            (&[0.2, 0.0], Positive),
            (&[0.0, 0.9], Negative),
            (&[0.5, 0.5], Neutral),
            (&[0.7, 0.1], Positive),
        ]);
        let cfg = GbtConfig {
            n_rounds: 7,
            ..GbtConfig::default()
        };
        let m = fit(&data, &cfg).unwrap();
        let x = &data.vectors()[3];
        for k in 0..3 {
            let mut acc = 0.0;
            for r in 0..=7 {
                assert_eq!(m.margin_after(x, k, r), m.base[k] + 0.1 * acc);
                if r < 7 {
                    acc += m.trees[k][r].leaf(x)[0];
                }
            }
        }
    }

    #[test]
    fn constant_label_wins_everywhere() {
        let data = fixtures::dense(&[(&[1.0], Positive), (&[0.0], Positive)]);
        let m = fit(&data, &GbtConfig::default()).unwrap();
        for x in [0.0, 3.0, -2.0] {
            assert_eq!(argmax_label(&m.scores(&SparseVector::dense(&[x]))), Positive);
        }
    }
}
