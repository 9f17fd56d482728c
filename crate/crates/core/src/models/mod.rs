//! Five classifiers behind one fit/predict contract.
//!
//! Every model predicts a [`Prediction`] whose label is the argmax of its
//! class scores, with ties resolved in canonical label order
//! (negative, neutral, positive). Models serialize to a versioned JSON
//! document; see [`persist`] for the field layout.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::SparseVector;
use crate::label::{argmax_label, SentimentLabel};

pub mod forest;
pub mod gbt;
pub mod naive_bayes;
pub mod persist;
pub mod softmax;
pub mod svm;
pub mod tree;

pub use forest::{ForestConfig, ForestModel};
pub use gbt::{GbtConfig, GbtModel};
pub use naive_bayes::{NaiveBayesConfig, NaiveBayesModel};
pub use persist::{load_model, save_model, MODEL_FORMAT_VERSION};
pub use softmax::{SoftmaxConfig, SoftmaxModel, SoftmaxObjective, SoftmaxParams};
pub use svm::{SvmConfig, SvmModel};

/// Feature vectors with one label each, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    vectors: Vec<SparseVector>,
    labels: Vec<SentimentLabel>,
    dimension: usize,
}

impl Dataset {
    pub fn new(vectors: Vec<SparseVector>, labels: Vec<SentimentLabel>, dimension: usize) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if let Some(v) = vectors.iter().find(|v| v.dimension() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                actual: v.dimension(),
            });
        }
        Ok(Dataset {
            vectors,
            labels,
            dimension,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[SentimentLabel] {
        &self.labels
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            dimension: self.dimension,
        }
    }

    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for l in &self.labels {
            counts[l.index()] += 1;
        }
        counts
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        Ok(())
    }
}

/// Per-example loss weighting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassWeight {
    #[default]
    None,
    /// Weight `n / (k * n_c)` for an example of class `c`, where `k` is the
    /// number of classes present.
    Balanced,
}

impl FromStr for ClassWeight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(ClassWeight::None),
            "balanced" => Ok(ClassWeight::Balanced),
            other => Err(Error::InvalidArgument(format!("unknown class weight {other:?}"))),
        }
    }
}

pub(crate) fn sample_weights(data: &Dataset, class_weight: ClassWeight) -> Vec<f64> {
    match class_weight {
        ClassWeight::None => vec![1.0; data.len()],
        ClassWeight::Balanced => {
            let counts = data.class_counts();
            let present = counts.iter().filter(|&&c| c > 0).count() as f64;
            let n = data.len() as f64;
            data.labels()
                .iter()
                .map(|l| n / (present * counts[l.index()] as f64))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    NaiveBayes,
    Softmax,
    Svm,
    RandomForest,
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::NaiveBayes,
        ModelKind::Softmax,
        ModelKind::Svm,
        ModelKind::RandomForest,
        ModelKind::Gbt,
    ];

    /// Short name used on the command line and in file names.
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "nb",
            ModelKind::Softmax => "mlr",
            ModelKind::Svm => "svm",
            ModelKind::RandomForest => "rf",
            ModelKind::Gbt => "gbt",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::NaiveBayes => "Naive Bayes",
            ModelKind::Softmax => "Multinomial Logistic Regression",
            ModelKind::Svm => "Support Vector Machine",
            ModelKind::RandomForest => "Random Forest",
            ModelKind::Gbt => "Gradient Boosting",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "nb" | "naive_bayes" => Ok(ModelKind::NaiveBayes),
            "mlr" | "softmax" | "logistic" => Ok(ModelKind::Softmax),
            "svm" => Ok(ModelKind::Svm),
            "rf" | "forest" | "random_forest" => Ok(ModelKind::RandomForest),
            "gbt" | "xgb" | "boost" | "gradient_boosting" => Ok(ModelKind::Gbt),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

/// Training settings, one variant per model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hyperparams {
    NaiveBayes(NaiveBayesConfig),
    Softmax(SoftmaxConfig),
    Svm(SvmConfig),
    RandomForest(ForestConfig),
    Gbt(GbtConfig),
}

impl Hyperparams {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::NaiveBayes => Hyperparams::NaiveBayes(NaiveBayesConfig::default()),
            ModelKind::Softmax => Hyperparams::Softmax(SoftmaxConfig::default()),
            ModelKind::Svm => Hyperparams::Svm(SvmConfig::default()),
            ModelKind::RandomForest => Hyperparams::RandomForest(ForestConfig::default()),
            ModelKind::Gbt => Hyperparams::Gbt(GbtConfig::default()),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Hyperparams::NaiveBayes(_) => ModelKind::NaiveBayes,
            Hyperparams::Softmax(_) => ModelKind::Softmax,
            Hyperparams::Svm(_) => ModelKind::Svm,
            Hyperparams::RandomForest(_) => ModelKind::RandomForest,
            Hyperparams::Gbt(_) => ModelKind::Gbt,
        }
    }

    pub fn with_class_weight(mut self, cw: ClassWeight) -> Self {
        match &mut self {
            Hyperparams::NaiveBayes(c) => c.class_weight = cw,
            Hyperparams::Softmax(c) => c.class_weight = cw,
            Hyperparams::Svm(c) => c.class_weight = cw,
            Hyperparams::RandomForest(c) => c.class_weight = cw,
            Hyperparams::Gbt(c) => c.class_weight = cw,
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Hyperparams::NaiveBayes(c) => c.validate(),
            Hyperparams::Softmax(c) => c.validate(),
            Hyperparams::Svm(c) => c.validate(),
            Hyperparams::RandomForest(c) => c.validate(),
            Hyperparams::Gbt(c) => c.validate(),
        }
    }
}

pub(crate) fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must be a positive number, got {value}"
        )))
    }
}

pub(crate) fn require_nonzero(name: &str, value: usize) -> Result<()> {
    if value > 0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be at least 1")))
    }
}

/// Trained parameters of one model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayesModel),
    Softmax(SoftmaxModel),
    Svm(SvmModel),
    RandomForest(ForestModel),
    Gbt(GbtModel),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::NaiveBayes(_) => ModelKind::NaiveBayes,
            ModelParams::Softmax(_) => ModelKind::Softmax,
            ModelParams::Svm(_) => ModelKind::Svm,
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::Gbt(_) => ModelKind::Gbt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: SentimentLabel,
    /// Posterior probabilities for naive Bayes, softmax and boosting;
    /// hinge margins for the SVM; vote fractions for the forest.
    pub class_scores: [f64; 3],
}

/// A trained classifier plus the metadata needed to reload and check it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format_version: String,
    pub variant: ModelKind,
    pub seed: u64,
    pub dimension: usize,
    pub hyperparams: Hyperparams,
    pub params: ModelParams,
}

impl ClassifierModel {
    pub fn kind(&self) -> ModelKind {
        self.variant
    }

    pub fn predict(&self, x: &SparseVector) -> Result<Prediction> {
        if x.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                actual: x.dimension(),
            });
        }
        let class_scores = match &self.params {
            ModelParams::NaiveBayes(m) => m.scores(x),
            ModelParams::Softmax(m) => m.scores(x),
            ModelParams::Svm(m) => m.scores(x),
            ModelParams::RandomForest(m) => m.scores(x),
            ModelParams::Gbt(m) => m.scores(x),
        };
        Ok(Prediction {
            label: argmax_label(&class_scores),
            class_scores,
        })
    }

    /// Predictions in input order.
    pub fn predict_all(&self, xs: &[SparseVector]) -> Result<Vec<Prediction>> {
        xs.par_iter().map(|x| self.predict(x)).collect()
    }

    pub fn predict_labels(&self, xs: &[SparseVector]) -> Result<Vec<SentimentLabel>> {
        Ok(self.predict_all(xs)?.into_iter().map(|p| p.label).collect())
    }
}

/// Trains the model family selected by `hp`.
pub fn fit(data: &Dataset, hp: &Hyperparams, seed: u64) -> Result<ClassifierModel> {
    hp.validate()?;
    data.require_nonempty()?;
    let params = match hp {
        Hyperparams::NaiveBayes(c) => ModelParams::NaiveBayes(naive_bayes::fit(data, c)?),
        Hyperparams::Softmax(c) => ModelParams::Softmax(softmax::fit(data, c, seed)?),
        Hyperparams::Svm(c) => ModelParams::Svm(svm::fit(data, c, seed)?),
        Hyperparams::RandomForest(c) => ModelParams::RandomForest(forest::fit(data, c, seed)?),
        Hyperparams::Gbt(c) => ModelParams::Gbt(gbt::fit(data, c)?),
    };
    Ok(ClassifierModel {
        format_version: MODEL_FORMAT_VERSION.to_string(),
        variant: hp.kind(),
        seed,
        dimension: data.dimension(),
        hyperparams: hp.clone(),
        params,
    })
}

pub fn fit_naive_bayes(data: &Dataset, hp: &NaiveBayesConfig) -> Result<ClassifierModel> {
    fit(data, &Hyperparams::NaiveBayes(hp.clone()), 0)
}

pub fn fit_softmax(data: &Dataset, hp: &SoftmaxConfig, seed: u64) -> Result<ClassifierModel> {
    fit(data, &Hyperparams::Softmax(hp.clone()), seed)
}

pub fn fit_linear_svm(data: &Dataset, hp: &SvmConfig, seed: u64) -> Result<ClassifierModel> {
    fit(data, &Hyperparams::Svm(hp.clone()), seed)
}

pub fn fit_random_forest(data: &Dataset, hp: &ForestConfig, seed: u64) -> Result<ClassifierModel> {
    fit(data, &Hyperparams::RandomForest(hp.clone()), seed)
}

pub fn fit_gbt(data: &Dataset, hp: &GbtConfig, seed: u64) -> Result<ClassifierModel> {
    fit(data, &Hyperparams::Gbt(hp.clone()), seed)
}

/// Numerically stable softmax.
pub(crate) fn softmax3(z: &[f64; 3]) -> [f64; 3] {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e = [(z[0] - m).exp(), (z[1] - m).exp(), (z[2] - m).exp()];
    let s = e[0] + e[1] + e[2];
    [e[0] / s, e[1] / s, e[2] / s]
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use SentimentLabel::*;

    pub fn dense(rows: &[(&[f64], SentimentLabel)]) -> Dataset {
        let dim = rows.first().map(|r| r.0.len()).unwrap_or(0);
        Dataset::new(
            rows.iter().map(|r| SparseVector::dense(r.0)).collect(),
            rows.iter().map(|r| r.1).collect(),
            dim,
        )
        .unwrap()
    }

    /// Two points on opposite corners.
    pub fn separable_pair() -> Dataset {
        dense(&[(&[1.0, 0.0], Positive), (&[0.0, 1.0], Negative)])
    }

    pub fn single_class() -> Dataset {
        dense(&[
            (&[1.0, 0.0, 0.5], Neutral),
            (&[0.0, 1.0, 0.0], Neutral),
            (&[0.3, 0.0, 0.0], Neutral),
        ])
    }

    pub fn xor() -> Dataset {
        dense(&[
            (&[0.0, 0.0], Negative),
            (&[1.0, 1.0], Negative),
            (&[1.0, 0.0], Positive),
            (&[0.0, 1.0], Positive),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    #[test]
    fn dataset_rejects_mismatched_lengths_and_dimensions() {
        assert!(Dataset::new(vec![SparseVector::zeros(2)], vec![], 2).is_err());
        let err = Dataset::new(vec![SparseVector::zeros(3)], vec![Neutral], 2).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, actual: 3 }));
    }

    #[test]
    fn balanced_weights_equalize_class_mass() {
        let d = fixtures::dense(&[
            (&[1.0], Positive),
            (&[1.0], Positive),
            (&[1.0], Positive),
            (&[1.0], Negative),
        ]);
        let w = sample_weights(&d, ClassWeight::Balanced);
        let pos: f64 = w[..3].iter().sum();
        assert!((pos - w[3]).abs() < 1e-12);
    }

    #[test]
    fn every_model_rejects_empty_data_and_wrong_dimension() {
        let empty = Dataset::new(vec![], vec![], 2).unwrap();
        let data = fixtures::separable_pair();
        for kind in ModelKind::ALL {
            let hp = Hyperparams::default_for(kind);
            assert!(fit(&empty, &hp, 1).is_err(), "{kind}");
            let m = fit(&data, &hp, 1).unwrap();
            let err = m.predict(&SparseVector::zeros(5)).unwrap_err();
            assert!(matches!(err, Error::DimensionMismatch { .. }), "{kind}");
        }
    }

    #[test]
    fn single_class_data_predicts_that_class_everywhere() {
        let data = fixtures::single_class();
        let probes = [vec![0.0, 0.0, 0.0], vec![5.0, 0.0, 0.0], vec![0.0, 0.2, 9.0]];
        for kind in ModelKind::ALL {
            let m = fit(&data, &Hyperparams::default_for(kind), 3).unwrap();
            for p in &probes {
                let pred = m.predict(&SparseVector::dense(p)).unwrap();
                assert_eq!(pred.label, Neutral, "{kind} on {p:?}");
            }
        }
    }

    #[test]
    fn probability_models_return_distributions() {
        let data = fixtures::xor();
        for kind in [ModelKind::NaiveBayes, ModelKind::Softmax, ModelKind::Gbt] {
            let m = fit(&data, &Hyperparams::default_for(kind), 5).unwrap();
            for x in data.vectors() {
                let s = m.predict(x).unwrap().class_scores;
                assert!(s.iter().all(|&p| p >= 0.0), "{kind}");
                assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-9, "{kind}");
            }
        }
    }

    #[test]
    fn model_names_parse() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.as_str().parse::<ModelKind>().unwrap(), kind);
        }
        assert_eq!("xgb".parse::<ModelKind>().unwrap(), ModelKind::Gbt);
        assert!("cnn".parse::<ModelKind>().is_err());
    }
}
