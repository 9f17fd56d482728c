use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Three-class sentiment label. The derived ordering (`Negative < Neutral <
/// Positive`) is the canonical order used for every tie-break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SentimentLabel {
    Negative,
    Neutral,
    Positive,
}

impl SentimentLabel {
    pub const ALL: [SentimentLabel; 3] = [
        SentimentLabel::Negative,
        SentimentLabel::Neutral,
        SentimentLabel::Positive,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::Positive => "positive",
        }
    }

    /// Sentiment140 polarity code (0, 2, 4).
    pub fn from_polarity_code(code: &str) -> Option<Self> {
        match code.trim() {
            "0" => Some(SentimentLabel::Negative),
            "2" => Some(SentimentLabel::Neutral),
            "4" => Some(SentimentLabel::Positive),
            _ => None,
        }
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SentimentLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "negative" | "neg" | "0" => Ok(SentimentLabel::Negative),
            "neutral" | "neu" | "2" => Ok(SentimentLabel::Neutral),
            "positive" | "pos" | "4" => Ok(SentimentLabel::Positive),
            other => Err(Error::InvalidArgument(format!("unknown label {other:?}"))),
        }
    }
}

/// Index of the largest score; ties go to the earliest class in canonical order.
pub fn argmax_label(scores: &[f64; 3]) -> SentimentLabel {
    let mut best = 0;
    for i in 1..3 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    SentimentLabel::ALL[best]
}

/// A label that may be missing, as in unlabelled tweet dumps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OriginalLabel {
    Known(SentimentLabel),
    #[default]
    Unknown,
}

impl OriginalLabel {
    pub fn known(self) -> Option<SentimentLabel> {
        match self {
            OriginalLabel::Known(l) => Some(l),
            OriginalLabel::Unknown => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OriginalLabel::Known(l) => l.as_str(),
            OriginalLabel::Unknown => "unknown",
        }
    }
}

impl FromStr for OriginalLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() || t.eq_ignore_ascii_case("unknown") {
            Ok(OriginalLabel::Unknown)
        } else {
            t.parse().map(OriginalLabel::Known)
        }
    }
}

impl From<SentimentLabel> for OriginalLabel {
    fn from(l: SentimentLabel) -> Self {
        OriginalLabel::Known(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order() {
        assert!(SentimentLabel::Negative < SentimentLabel::Neutral);
        assert!(SentimentLabel::Neutral < SentimentLabel::Positive);
    }

    #[test]
    fn argmax_ties_take_first() {
        assert_eq!(argmax_label(&[0.5, 0.5, 0.0]), SentimentLabel::Negative);
        assert_eq!(argmax_label(&[0.0, 0.5, 0.5]), SentimentLabel::Neutral);
        assert_eq!(argmax_label(&[0.1, 0.2, 0.7]), SentimentLabel::Positive);
    }

    #[test]
    fn polarity_codes() {
        assert_eq!(SentimentLabel::from_polarity_code("0"), Some(SentimentLabel::Negative));
        assert_eq!(SentimentLabel::from_polarity_code("2"), Some(SentimentLabel::Neutral));
        assert_eq!(SentimentLabel::from_polarity_code("4"), Some(SentimentLabel::Positive));
        assert_eq!(SentimentLabel::from_polarity_code("1"), None);
    }
}
