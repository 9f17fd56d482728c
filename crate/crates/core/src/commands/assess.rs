use rayon::prelude::*;

use super::pipeline::write_word_tables;
use super::train::vectorize_with;
use super::{create_dir, require_file, write_file, AssessArgs};
use crate::corpus::{load_tweet_dump, LabeledDoc};
use crate::error::{Error, Result};
use crate::eval::{capitalized, confusion, metrics, ConfusionMatrix, DISPLAY_ORDER};
use crate::label::SentimentLabel;
use crate::lexicon::{label_doc, Lexicon, ScoreMethod, ThresholdConfig};
use crate::models::load_model;
use crate::table::TextTable;
use crate::textpipe::{preprocess, ProcessedDoc};

/// Label summary of one account's tweets.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonalityReport {
    /// Counts of the labels used for the report, canonical order.
    pub counts: [usize; 3],
    /// Counts under each lexicon scorer, whatever produced `counts`.
    pub pattern_counts: [usize; 3],
    pub valence_counts: [usize; 3],
    /// Present when every tweet carries a gold label.
    pub confusion: Option<ConfusionMatrix>,
}

impl PersonalityReport {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn ratio(&self, label: SentimentLabel) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.counts[label.index()] as f64 / n as f64,
        }
    }

    /// Negative tweets over positive and neutral ones combined; infinite
    /// when every tweet is negative.
    pub fn negative_to_rest(&self) -> f64 {
        let neg = self.counts[SentimentLabel::Negative.index()] as f64;
        let rest = (self.total() - self.counts[SentimentLabel::Negative.index()]) as f64;
        if rest == 0.0 {
            if neg == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            neg / rest
        }
    }

    /// `metric,class,value` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["metric", "class", "value"])?;
        w.write_record(["count", "all", &self.total().to_string()])?;
        for l in SentimentLabel::ALL {
            w.write_record(["count", l.as_str(), &self.counts[l.index()].to_string()])?;
        }
        for l in SentimentLabel::ALL {
            w.write_record(["ratio", l.as_str(), &format!("{:.6}", self.ratio(l))])?;
        }
        w.write_record(["negative_to_rest", "all", &format!("{:.6}", self.negative_to_rest())])?;
        if let Some(cm) = &self.confusion {
            let r = metrics(cm)?;
            w.write_record(["accuracy", "all", &format!("{:.6}", r.accuracy)])?;
        }
        w.flush().map_err(|e| Error::io("summary.csv", e))
    }

    /// Label counts under both scorers: `label,pattern,valence`.
    pub fn write_distribution_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["label", "pattern", "valence"])?;
        for l in SentimentLabel::ALL {
            w.write_record([
                l.as_str().to_string(),
                self.pattern_counts[l.index()].to_string(),
                self.valence_counts[l.index()].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("distribution.csv", e))
    }

    pub fn text_table(&self) -> String {
        let mut t = TextTable::new(["Label", "Tweets", "Share"]);
        for l in DISPLAY_ORDER {
            t.push([
                capitalized(l),
                self.counts[l.index()].to_string(),
                format!("{:.2}%", self.ratio(l) * 100.0),
            ]);
        }
        t.push(["Total".to_string(), self.total().to_string(), "100.00%".to_string()]);
        t.render()
    }
}

fn lexicon_counts(
    docs: &[ProcessedDoc],
    method: ScoreMethod,
    lex: &Lexicon,
    cfg: &ThresholdConfig,
) -> Result<Vec<SentimentLabel>> {
    docs.par_iter().map(|d| label_doc(d, method, lex, cfg)).collect()
}

fn tally(labels: &[SentimentLabel]) -> [usize; 3] {
    let mut c = [0; 3];
    for l in labels {
        c[l.index()] += 1;
    }
    c
}

/// Labels every tweet in a dump and writes `summary.csv`,
/// `distribution.csv`, per-tweet `labels.csv`, the word tables and, when
/// gold labels are present, `confusion.csv`.
pub fn cmd_assess(args: &AssessArgs) -> Result<()> {
    require_file(&args.io.input)?;
    let (records, stats) = load_tweet_dump(&args.io.input)?;
    if records.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "{} holds no tweets ({} malformed lines)",
            args.io.input.display(),
            stats.malformed_rows
        )));
    }
    let pipeline = args.pipeline.config();
    let lex = args.lexicon.load(&pipeline)?;
    let thresholds = args.lexicon.thresholds()?;
    let docs: Vec<ProcessedDoc> = records.par_iter().map(|r| preprocess(r, &pipeline)).collect();

    let pattern = lexicon_counts(&docs, ScoreMethod::Pattern, &lex, &thresholds)?;
    let valence = lexicon_counts(&docs, ScoreMethod::Valence, &lex, &thresholds)?;
    let labels = match (&args.model, &args.vocab) {
        (Some(model_path), Some(vocab_path)) => {
            require_file(model_path)?;
            require_file(vocab_path)?;
            let model = load_model(model_path)?;
            let (vectors, dim) = vectorize_with(vocab_path, &docs)?;
            if dim != model.dimension {
                return Err(Error::DimensionMismatch {
                    expected: model.dimension,
                    actual: dim,
                });
            }
            model.predict_labels(&vectors)?
        }
        _ => match args.method {
            ScoreMethod::Pattern => pattern.clone(),
            ScoreMethod::Valence => valence.clone(),
        },
    };

    let gold: Option<Vec<SentimentLabel>> = records.iter().map(|r| r.original_label.known()).collect();
    let report = PersonalityReport {
        counts: tally(&labels),
        pattern_counts: tally(&pattern),
        valence_counts: tally(&valence),
        confusion: gold.map(|g| confusion(&g, &labels)).transpose()?,
    };

    let out = &args.io.output_dir;
    create_dir(out)?;
    write_file(&out.join("summary.csv"), |b| report.write_csv(b))?;
    write_file(&out.join("distribution.csv"), |b| report.write_distribution_csv(b))?;
    write_file(&out.join("labels.csv"), |b| {
        let mut w = csv::Writer::from_writer(b);
        w.write_record(["id", "label"])?;
        for (r, l) in records.iter().zip(&labels) {
            w.write_record([r.id.as_str(), l.as_str()])?;
        }
        w.flush().map_err(|e| Error::io("labels.csv", e))
    })?;
    let labeled: Vec<LabeledDoc> = docs
        .into_iter()
        .zip(&records)
        .zip(&labels)
        .map(|((doc, r), &label)| LabeledDoc {
            doc,
            original: r.original_label,
            label,
        })
        .collect();
    let words = write_word_tables(&labeled, out, args.top_k)?;
    if let Some(cm) = &report.confusion {
        write_file(&out.join("confusion.csv"), |b| cm.write_csv(b))?;
    }

    println!("{}", report.text_table());
    println!("negative to rest: {:.4}", report.negative_to_rest());
    print!("{words}");
    if let Some(cm) = &report.confusion {
        println!("{}", cm.text_table(&DISPLAY_ORDER));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(counts: [usize; 3]) -> PersonalityReport {
        PersonalityReport {
            counts,
            pattern_counts: counts,
            valence_counts: counts,
            confusion: None,
        }
    }

    #[test]
    fn ratios_and_negative_to_rest() {
        let r = report([25, 15, 60]);
        assert_eq!(r.total(), 100);
        assert!((r.ratio(SentimentLabel::Positive) - 0.6).abs() < 1e-12);
        assert!((r.negative_to_rest() - 25.0 / 75.0).abs() < 1e-12);
        assert_eq!(report([0, 0, 0]).negative_to_rest(), 0.0);
        assert!(report([3, 0, 0]).negative_to_rest().is_infinite());
    }
}
