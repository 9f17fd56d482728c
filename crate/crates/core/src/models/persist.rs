//! Model files.
//!
//! A model is one compact JSON object followed by a newline:
//!
//! ```text
//! {"format_version":"1","variant":"random_forest","seed":7,"dimension":120,
//!  "hyperparams":{"random_forest":{...}},"params":{"random_forest":{"trees":[...]}}}
//! ```
//!
//! `params` holds, per variant:
//! - `naive_bayes`: `log_prior` (3 numbers, `null` for classes unseen in
//!   training) and `log_likelihood` (3 rows of `dimension` numbers);
//! - `softmax`: `weights` (3 rows), `bias` (3), `loss_history` (one per epoch);
//! - `svm`: `weights` (3 rows) and `bias` (3);
//! - `random_forest`: `trees`, each a list of nodes
//!   `{"type":"split","feature":f,"threshold":t,"left":i,"right":j}` or
//!   `{"type":"leaf","value":[p_neg,p_neu,p_pos]}`, root first;
//! - `gbt`: `base` (3), `shrinkage`, and `trees` (3 lists of regression
//!   trees whose leaves hold one value).
//!
//! Class order is always negative, neutral, positive. Files with another
//! `format_version` are rejected.

use std::fs;
use std::path::Path;

use super::{ClassifierModel, ModelParams};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: &str = "1";

impl ClassifierModel {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string(self).map_err(|e| Error::CorruptModel(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptModel(format!("not valid JSON: {e}")))?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::CorruptModel("missing format_version".into()))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: version.to_string(),
                supported: MODEL_FORMAT_VERSION.to_string(),
            });
        }
        // Re-parse from text rather than the Value so floats keep full precision.
        let model: ClassifierModel = serde_json::from_str(text).map_err(|e| Error::CorruptModel(e.to_string()))?;
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let d = self.dimension;
        let bad = |what: &str| Err(Error::CorruptModel(what.to_string()));
        if self.params.kind() != self.variant || self.hyperparams.kind() != self.variant {
            return bad("variant does not match parameters");
        }
        match &self.params {
            ModelParams::NaiveBayes(m) => {
                if m.log_likelihood.iter().any(|r| r.len() != d) {
                    return bad("naive Bayes likelihood rows do not match dimension");
                }
                if m.log_prior.iter().all(|p| p.is_none()) {
                    return bad("naive Bayes has no classes");
                }
            }
            ModelParams::Softmax(m) => {
                if m.params.weights.iter().any(|r| r.len() != d) {
                    return bad("softmax weight rows do not match dimension");
                }
            }
            ModelParams::Svm(m) => {
                if m.weights.iter().any(|r| r.len() != d) {
                    return bad("svm weight rows do not match dimension");
                }
            }
            ModelParams::RandomForest(m) => {
                if m.trees.is_empty() {
                    return bad("forest has no trees");
                }
                for t in &m.trees {
                    t.validate(d, 3)?;
                }
            }
            ModelParams::Gbt(m) => {
                for t in m.trees.iter().flatten() {
                    t.validate(d, 1)?;
                }
            }
        }
        Ok(())
    }
}

pub fn save_model(model: &ClassifierModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_json()?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ClassifierModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ClassifierModel::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::SparseVector;
    use crate::models::{fit, fixtures, Hyperparams, ModelKind};

    fn trained() -> Vec<ClassifierModel> {
        let data = fixtures::dense(&[
            (&[0.3, 0.0, 0.1], crate::SentimentLabel::Positive),
            (&[0.0, 0.7, 0.0], crate::SentimentLabel::Negative),
            (&[0.1, 0.1, 0.9], crate::SentimentLabel::Positive),
        ]);
        ModelKind::ALL
            .iter()
            .map(|&k| {
                let hp = match Hyperparams::default_for(k) {
                    Hyperparams::RandomForest(c) => {
                        Hyperparams::RandomForest(crate::models::ForestConfig { n_trees: 5, ..c })
                    }
                    Hyperparams::Gbt(c) => Hyperparams::Gbt(crate::models::GbtConfig { n_rounds: 5, ..c }),
                    other => other,
                };
                fit(&data, &hp, 17).unwrap()
            })
            .collect()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        for m in trained() {
            let path = dir.path().join(format!("{}.json", m.kind()));
            save_model(&m, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_json().unwrap(), m.to_json().unwrap());
            let probe = SparseVector::dense(&[0.2, 0.2, 0.2]);
            assert_eq!(back.predict(&probe).unwrap(), m.predict(&probe).unwrap());
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let m = &trained()[3];
        let json = m.to_json().unwrap();
        let err = ClassifierModel::from_json(&json[..json.len() / 2]).unwrap_err();
        assert!(matches!(err, Error::CorruptModel(_)), "{err}");
    }

    #[test]
    fn foreign_version_is_rejected() {
        let json = trained()[0]
            .to_json()
            .unwrap()
            .replace("\"format_version\":\"1\"", "\"format_version\":\"99\"");
        let err = ClassifierModel::from_json(&json).unwrap_err();
        assert!(
            matches!(err, Error::ModelVersion { ref found, .. } if found == "99"),
            "{err}"
        );
    }

    #[test]
    fn dimension_mismatch_is_corrupt() {
        let json = trained()[0]
            .to_json()
            .unwrap()
            .replace("\"dimension\":3", "\"dimension\":2");
        assert!(ClassifierModel::from_json(&json).is_err());
    }
}
