//! Multinomial naive Bayes over non-negative feature weights.
//!
//! Feature weights act as fractional token counts. Likelihoods use Laplace
//! smoothing; priors are the (weighted) class frequencies, so a class absent
//! from training gets probability zero.

use serde::{Deserialize, Serialize};

use super::{require_positive, sample_weights, ClassWeight, Dataset};
use crate::error::{Error, Result};
use crate::features::SparseVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesConfig {
    pub laplace_alpha: f64,
    #[serde(default)]
    pub class_weight: ClassWeight,
}

impl Default for NaiveBayesConfig {
    fn default() -> Self {
        NaiveBayesConfig {
            laplace_alpha: 1.0,
            class_weight: ClassWeight::None,
        }
    }
}

impl NaiveBayesConfig {
    pub fn validate(&self) -> Result<()> {
        require_positive("laplace_alpha", self.laplace_alpha)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    /// `None` for classes that never occurred in training.
    pub log_prior: [Option<f64>; 3],
    /// Per class, `ln P(feature | class)` for every feature index.
    pub log_likelihood: [Vec<f64>; 3],
}

pub(crate) fn fit(data: &Dataset, cfg: &NaiveBayesConfig) -> Result<NaiveBayesModel> {
    let v = data.dimension();
    if v == 0 {
        return Err(Error::InvalidArgument("naive Bayes needs at least one feature".into()));
    }
    let weights = sample_weights(data, cfg.class_weight);
    let mut totals = [vec![0.0; v], vec![0.0; v], vec![0.0; v]];
    let mut class_mass = [0.0; 3];
    for ((x, label), w) in data.vectors().iter().zip(data.labels()).zip(&weights) {
        let c = label.index();
        class_mass[c] += w;
        for &(j, value) in x.pairs() {
            if value < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "naive Bayes needs non-negative features, got {value} at index {j}"
                )));
            }
            totals[c][j as usize] += w * value;
        }
    }
    let all_mass: f64 = class_mass.iter().sum();
    let alpha = cfg.laplace_alpha;
    let mut log_prior = [None; 3];
    let mut log_likelihood: [Vec<f64>; 3] = Default::default();
    for c in 0..3 {
        if class_mass[c] > 0.0 {
            log_prior[c] = Some((class_mass[c] / all_mass).ln());
        }
        let denom = (totals[c].iter().sum::<f64>() + alpha * v as f64).ln();
        log_likelihood[c] = totals[c].iter().map(|t| (t + alpha).ln() - denom).collect();
    }
    Ok(NaiveBayesModel {
        log_prior,
        log_likelihood,
    })
}

impl NaiveBayesModel {
    /// Joint log-probabilities `ln P(c) + sum_j x_j ln P(j | c)`; `None` for
    /// absent classes.
    pub fn log_joint(&self, x: &SparseVector) -> [Option<f64>; 3] {
        let mut out = [None; 3];
        for c in 0..3 {
            if let Some(lp) = self.log_prior[c] {
                out[c] = Some(lp + x.dot(&self.log_likelihood[c]));
            }
        }
        out
    }

    pub fn scores(&self, x: &SparseVector) -> [f64; 3] {
        let joint = self.log_joint(x);
        let m = joint.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e = joint.map(|j| j.map_or(0.0, |l| (l - m).exp()));
        let s: f64 = e.iter().sum();
        e.map(|v| v / s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::SentimentLabel::{self, *};
    use crate::models::fixtures::dense;

    /// Posterior by direct products of smoothed relative frequencies.
    fn brute_force(data: &[(Vec<f64>, SentimentLabel)], x: &[f64], alpha: f64) -> [f64; 3] {
        let v = x.len();
        let mut joint = [0.0; 3];
        for c in SentimentLabel::ALL {
            let rows: Vec<&Vec<f64>> = data.iter().filter(|r| r.1 == c).map(|r| &r.0).collect();
            if rows.is_empty() {
                continue;
            }
            let mut p = rows.len() as f64 / data.len() as f64;
            let total: f64 = rows.iter().map(|r| r.iter().sum::<f64>()).sum();
            for j in 0..v {
                let count: f64 = rows.iter().map(|r| r[j]).sum();
                p *= ((count + alpha) / (total + alpha * v as f64)).powf(x[j]);
            }
            joint[c.index()] = p;
        }
        let s: f64 = joint.iter().sum();
        joint.map(|p| p / s)
    }

    #[test]
    fn matches_product_form_posterior() {
        let rows = vec![
            (vec![2.0, 0.0, 1.0], Positive),
            (vec![0.0, 3.0, 0.0], Negative),
            (vec![1.0, 1.0, 0.0], Neutral),
            (vec![1.0, 0.0, 2.0], Positive),
        ];
        let data = dense(&rows.iter().map(|r| (r.0.as_slice(), r.1)).collect::<Vec<_>>());
        let m = fit(&data, &NaiveBayesConfig::default()).unwrap();
        for x in [[1.0, 0.0, 0.0], [0.0, 2.0, 1.0], [0.0, 0.0, 0.0]] {
            let got = m.scores(&SparseVector::dense(&x));
            let want = brute_force(&rows, &x, 1.0);
            for c in 0..3 {
                assert!((got[c] - want[c]).abs() < 1e-12, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn good_bad_example() {
        // vocabulary: good, bad
        let data = dense(&[(&[1.0, 0.0], Positive), (&[0.0, 1.0], Negative)]);
        let m = fit(&data, &NaiveBayesConfig::default()).unwrap();
        let s = m.scores(&SparseVector::dense(&[1.0, 0.0]));
        assert!(s[Positive.index()] > s[Negative.index()]);
        assert_eq!(s[Neutral.index()], 0.0);
    }

    #[test]
    fn unseen_token_with_equal_priors_is_uniform_over_seen_classes() {
        let data = dense(&[(&[1.0, 0.0], Positive), (&[0.0, 1.0], Negative)]);
        let m = fit(&data, &NaiveBayesConfig::default()).unwrap();
        let s = m.scores(&SparseVector::zeros(2));
        assert!((s[Positive.index()] - 0.5).abs() < 1e-12);
        assert!((s[Negative.index()] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_vector_follows_priors() {
        let data = dense(&[(&[1.0], Positive), (&[1.0], Negative), (&[1.0], Negative)]);
        let m = fit(&data, &NaiveBayesConfig::default()).unwrap();
        let s = m.scores(&SparseVector::zeros(1));
        assert!((s[Negative.index()] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_dimension_and_negative_weights() {
        let empty_dim = Dataset::new(vec![SparseVector::zeros(0)], vec![Neutral], 0).unwrap();
        assert!(fit(&empty_dim, &NaiveBayesConfig::default()).is_err());
        let neg = dense(&[(&[-1.0], Neutral)]);
        assert!(fit(&neg, &NaiveBayesConfig::default()).is_err());
    }
}
