//! Three-class softmax regression trained by mini-batch gradient descent.
//!
//! Objective over a batch `B`:
//! `(1 / W_B) * sum_{i in B} w_i * CE_i + (l2 / 2) * ||W||^2`, where the bias
//! is not regularized.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{require_nonzero, require_positive, sample_weights, softmax3, ClassWeight, Dataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
    pub batch: usize,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for SoftmaxConfig {
    fn default() -> Self {
        SoftmaxConfig {
            learning_rate: 1.0,
            l2: 1e-4,
            epochs: 50,
            batch: 32,
            class_weight: ClassWeight::None,
        }
    }
}

impl SoftmaxConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("learning_rate", self.learning_rate)?;
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::InvalidArgument(format!("l2 must be >= 0, got {}", self.l2)));
        }
        require_nonzero("epochs", self.epochs)?;
        require_nonzero("batch", self.batch)
    }
}

/// Weight matrix (one row per class) and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxParams {
    pub weights: [Vec<f64>; 3],
    pub bias: [f64; 3],
}

impl SoftmaxParams {
    pub fn zeros(dimension: usize) -> Self {
        SoftmaxParams {
            weights: [vec![0.0; dimension], vec![0.0; dimension], vec![0.0; dimension]],
            bias: [0.0; 3],
        }
    }

    pub fn dimension(&self) -> usize {
        self.weights[0].len()
    }

    /// Flat layout: the three weight rows, then the three biases.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.dimension() + 3);
        for row in &self.weights {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&self.bias);
        out
    }

    pub fn from_flat(flat: &[f64], dimension: usize) -> Result<Self> {
        if flat.len() != 3 * dimension + 3 {
            return Err(Error::DimensionMismatch {
                expected: 3 * dimension + 3,
                actual: flat.len(),
            });
        }
        let row = |c: usize| flat[c * dimension..(c + 1) * dimension].to_vec();
        Ok(SoftmaxParams {
            weights: [row(0), row(1), row(2)],
            bias: [flat[3 * dimension], flat[3 * dimension + 1], flat[3 * dimension + 2]],
        })
    }

    pub fn logits(&self, x: &SparseVector) -> [f64; 3] {
        [
            self.bias[0] + x.dot(&self.weights[0]),
            self.bias[1] + x.dot(&self.weights[1]),
            self.bias[2] + x.dot(&self.weights[2]),
        ]
    }
}

/// Regularized weighted cross-entropy on a dataset, with its analytic
/// gradient.
pub struct SoftmaxObjective<'a> {
    data: &'a Dataset,
    weights: Vec<f64>,
    l2: f64,
}

impl<'a> SoftmaxObjective<'a> {
    pub fn new(data: &'a Dataset, class_weight: ClassWeight, l2: f64) -> Self {
        SoftmaxObjective {
            data,
            weights: sample_weights(data, class_weight),
            l2,
        }
    }

    pub fn loss(&self, p: &SoftmaxParams) -> f64 {
        let all: Vec<usize> = (0..self.data.len()).collect();
        self.evaluate(p, &all, None)
    }

    pub fn gradient(&self, p: &SoftmaxParams) -> SoftmaxParams {
        let all: Vec<usize> = (0..self.data.len()).collect();
        let mut g = SoftmaxParams::zeros(p.dimension());
        self.evaluate(p, &all, Some(&mut g));
        g
    }

    /// Loss on the rows in `batch`; writes the gradient into `grad` if given.
    fn evaluate(&self, p: &SoftmaxParams, batch: &[usize], mut grad: Option<&mut SoftmaxParams>) -> f64 {
        let mass: f64 = batch.iter().map(|&i| self.weights[i]).sum();
        if let Some(g) = grad.as_deref_mut() {
            for c in 0..3 {
                for (gj, wj) in g.weights[c].iter_mut().zip(&p.weights[c]) {
                    *gj = self.l2 * wj;
                }
                g.bias[c] = 0.0;
            }
        }
        let mut ce = 0.0;
        for &i in batch {
            let x = &self.data.vectors()[i];
            let y = self.data.labels()[i].index();
            let z = p.logits(x);
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            let w = self.weights[i] / mass;
            ce += w * (lse - z[y]);
            if let Some(g) = grad.as_deref_mut() {
                let prob = softmax3(&z);
                for c in 0..3 {
                    let r = w * (prob[c] - if c == y { 1.0 } else { 0.0 });
                    g.bias[c] += r;
                    for &(j, v) in x.pairs() {
                        g.weights[c][j as usize] += r * v;
                    }
                }
            }
        }
        let norm2: f64 = p.weights.iter().flatten().map(|w| w * w).sum();
        ce + 0.5 * self.l2 * norm2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    #[serde(flatten)]
    pub params: SoftmaxParams,
    /// Full-data objective after each epoch.
    pub loss_history: Vec<f64>,
}

impl SoftmaxModel {
    pub fn scores(&self, x: &SparseVector) -> [f64; 3] {
        softmax3(&self.params.logits(x))
    }
}

pub(crate) fn fit(data: &Dataset, cfg: &SoftmaxConfig, seed: u64) -> Result<SoftmaxModel> {
    let objective = SoftmaxObjective::new(data, cfg.class_weight, cfg.l2);
    let mut params = SoftmaxParams::zeros(data.dimension());
    let mut grad = SoftmaxParams::zeros(data.dimension());
    let mut rng = seed::rng_for(seed, "softmax");
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(cfg.batch).enumerate() {
            let loss = objective.evaluate(&params, batch, Some(&mut grad));
            if !loss.is_finite() {
                return Err(Error::Training(format!(
                    "softmax batch loss is {loss} at epoch {epoch}, batch {b} (learning_rate {}, l2 {})",
                    cfg.learning_rate, cfg.l2
                )));
            }
            for c in 0..3 {
                for (w, g) in params.weights[c].iter_mut().zip(&grad.weights[c]) {
                    *w -= cfg.learning_rate * g;
                }
                params.bias[c] -= cfg.learning_rate * grad.bias[c];
            }
        }
        let loss = objective.loss(&params);
        if !loss.is_finite() {
            return Err(Error::Training(format!(
                "softmax loss is {loss} after epoch {epoch} (learning_rate {})",
                cfg.learning_rate
            )));
        }
        log::debug!("softmax epoch {epoch}: loss {loss:.6}");
        loss_history.push(loss);
    }
    Ok(SoftmaxModel { params, loss_history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::SentimentLabel::*;
    use crate::models::fixtures;
    use rand::Rng;

    #[test]
    fn separable_pair_is_learned() {
        let data = fixtures::separable_pair();
        let cfg = SoftmaxConfig {
            epochs: 200,
            ..SoftmaxConfig::default()
        };
        let m = fit(&data, &cfg, 1).unwrap();
        for (x, &y) in data.vectors().iter().zip(data.labels()) {
            assert_eq!(crate::label::argmax_label(&m.scores(x)), y);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let data = fixtures::dense(&[
            (&[0.5, 0.0, 1.0], Positive),
            (&[0.0, 2.0, 0.0], Negative),
            (&[1.0, 1.0, 0.0], Neutral),
        ]);
        let obj = SoftmaxObjective::new(&data, ClassWeight::Balanced, 0.3);
        let mut rng = seed::rng_for(9, "test");
        let flat: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = SoftmaxParams::from_flat(&flat, 3).unwrap();
        let analytic = obj.gradient(&p).to_flat();
        let h = 1e-5;
        for k in 0..flat.len() {
            let mut up = flat.clone();
            up[k] += h;
            let mut down = flat.clone();
            down[k] -= h;
            let fd = (obj.loss(&SoftmaxParams::from_flat(&up, 3).unwrap())
                - obj.loss(&SoftmaxParams::from_flat(&down, 3).unwrap()))
                / (2.0 * h);
            assert!(
                (fd - analytic[k]).abs() < 1e-8,
                "coordinate {k}: {fd} vs {}",
                analytic[k]
            );
        }
    }

    #[test]
    fn full_batch_loss_is_monotone_at_small_step() {
        let data = fixtures::xor();
        let cfg = SoftmaxConfig {
            learning_rate: 1e-3,
            epochs: 50,
            batch: data.len(),
            ..SoftmaxConfig::default()
        };
        let m = fit(&data, &cfg, 2).unwrap();
        for w in m.loss_history.windows(2) {
            assert!(w[1] <= w[0], "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn exploding_step_is_reported() {
        let data = fixtures::dense(&[(&[1e200], Positive), (&[-1e200], Negative)]);
        let cfg = SoftmaxConfig {
            learning_rate: 1e100,
            ..SoftmaxConfig::default()
        };
        assert!(matches!(fit(&data, &cfg, 0), Err(Error::Training(_))));
    }
}
