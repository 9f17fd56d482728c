//! Lexicon-driven polarity scoring and three-class labeling.
//!
//! Two scorers share one [`Lexicon`]:
//!
//! * [`score_pattern`] averages word polarities and subjectivities, flipping
//!   and halving a polarity directly preceded by a negator.
//! * [`score_valence`] sums word valences with booster and negation
//!   adjustments and squashes the sum into a compound score in `[-1, 1]`.
//!
//! Either score is turned into a label by [`label_from_scores`] using a
//! neutral band (`[-0.05, 0.05]` by default, endpoints neutral).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledDoc;
use crate::error::{Error, Result};
use crate::label::{OriginalLabel, SentimentLabel};
use crate::table::TextTable;
use crate::textpipe::{PipelineConfig, ProcessedDoc};

const BUNDLED_LEXICON: &str = include_str!("../data/lexicon.tsv");

/// Normalization constant of the compound score, `S / sqrt(S^2 + alpha)`.
pub const COMPOUND_ALPHA: f64 = 15.0;
/// Valence multiplier applied when a negator occurs in the preceding window.
pub const VALENCE_NEGATION: f64 = -0.74;
/// Tokens looked back for a negator by the valence scorer.
pub const VALENCE_NEGATION_WINDOW: usize = 3;
/// Polarity multiplier for a sentiment word directly after a negator.
pub const PATTERN_NEGATION: f64 = -0.5;
/// Magnitude of the bundled booster deltas.
pub const BOOSTER_DELTA: f64 = 0.293;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EntryKind {
    Sentiment,
    /// Intensity modifier; the delta is added in the direction of the next
    /// word's valence sign.
    Booster(f64),
    Negator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub token: String,
    pub polarity: f64,
    pub subjectivity: f64,
    pub valence: f64,
    pub kind: EntryKind,
}

impl LexiconEntry {
    pub fn sentiment(token: &str, polarity: f64, subjectivity: f64, valence: f64) -> Self {
        LexiconEntry {
            token: token.to_string(),
            polarity,
            subjectivity,
            valence,
            kind: EntryKind::Sentiment,
        }
    }

    pub fn negator(token: &str) -> Self {
        LexiconEntry {
            token: token.to_string(),
            polarity: 0.0,
            subjectivity: 0.0,
            valence: 0.0,
            kind: EntryKind::Negator,
        }
    }

    pub fn booster(token: &str, delta: f64) -> Self {
        LexiconEntry {
            token: token.to_string(),
            polarity: 0.0,
            subjectivity: 0.0,
            valence: 0.0,
            kind: EntryKind::Booster(delta),
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        let check = |name: &str, v: f64, lo: f64, hi: f64| {
            if v.is_finite() && (lo..=hi).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} {v} outside [{lo}, {hi}]"))
            }
        };
        check("polarity", self.polarity, -1.0, 1.0)?;
        check("subjectivity", self.subjectivity, 0.0, 1.0)?;
        check("valence", self.valence, -4.0, 4.0)?;
        if let EntryKind::Booster(d) = self.kind {
            if !d.is_finite() {
                return Err(format!("booster delta {d} is not finite"));
            }
        }
        Ok(())
    }
}

/// Token-keyed sentiment dictionary. Keys are lowercase and unique.
#[derive(Debug, Clone)]
pub struct Lexicon {
    entries: HashMap<String, LexiconEntry>,
    pub name: String,
    pub version: String,
}

impl Lexicon {
    pub fn from_entries(name: &str, version: &str, entries: impl IntoIterator<Item = LexiconEntry>) -> Self {
        Lexicon {
            entries: entries
                .into_iter()
                .map(|mut e| {
                    e.token = e.token.to_lowercase();
                    (e.token.clone(), e)
                })
                .collect(),
            name: name.to_string(),
            version: version.to_string(),
        }
    }

    /// The lexicon shipped with the crate (`data/lexicon.tsv`).
    pub fn bundled() -> Self {
        let (lex, rejected) =
            parse_lexicon(BUNDLED_LEXICON, Path::new("<bundled lexicon>")).expect("bundled lexicon parses");
        debug_assert!(rejected.is_empty());
        Lexicon {
            name: "bundled".into(),
            ..lex
        }
    }

    pub fn get(&self, token: &str) -> Option<&LexiconEntry> {
        self.entries.get(token)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexiconEntry> {
        self.entries.values()
    }

    /// A view keyed by the reduced (stemmed or lemmatized) forms the
    /// pipeline emits. Original keys win; otherwise sentiment entries that
    /// collide on a reduced form are averaged, and a modifier keeps the key
    /// only when no sentiment entry maps there.
    pub fn reduced(&self, config: &PipelineConfig) -> Lexicon {
        let mut groups: BTreeMap<String, Vec<&LexiconEntry>> = BTreeMap::new();
        let mut sorted: Vec<&LexiconEntry> = self.entries.values().collect();
        sorted.sort_by(|a, b| a.token.cmp(&b.token));
        for e in sorted {
            let key = config.reduce_token(&e.token);
            if key != e.token {
                groups.entry(key).or_default().push(e);
            }
        }
        let mut entries = self.entries.clone();
        for (key, group) in groups {
            if entries.contains_key(&key) {
                continue;
            }
            let sentiment: Vec<&&LexiconEntry> = group.iter().filter(|e| e.kind == EntryKind::Sentiment).collect();
            let merged = if sentiment.is_empty() {
                LexiconEntry {
                    token: key.clone(),
                    ..group[0].clone()
                }
            } else {
                let n = sentiment.len() as f64;
                LexiconEntry::sentiment(
                    &key,
                    sentiment.iter().map(|e| e.polarity).sum::<f64>() / n,
                    sentiment.iter().map(|e| e.subjectivity).sum::<f64>() / n,
                    sentiment.iter().map(|e| e.valence).sum::<f64>() / n,
                )
            };
            entries.insert(key, merged);
        }
        Lexicon {
            entries,
            name: self.name.clone(),
            version: self.version.clone(),
        }
    }
}

fn parse_kind(s: &str) -> std::result::Result<EntryKind, String> {
    let (head, arg) = match s.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (s, None),
    };
    match (head.trim().to_ascii_lowercase().as_str(), arg) {
        ("sentiment", None) => Ok(EntryKind::Sentiment),
        ("negator", None) => Ok(EntryKind::Negator),
        ("booster", Some(d)) => d
            .trim()
            .parse::<f64>()
            .map(EntryKind::Booster)
            .map_err(|_| format!("bad booster delta {d:?}")),
        ("booster", None) => Ok(EntryKind::Booster(BOOSTER_DELTA)),
        _ => Err(format!("unknown kind {s:?}")),
    }
}

/// Parses TSV lexicon text. Returns the lexicon and one diagnostic per
/// rejected row.
fn parse_lexicon(text: &str, path: &Path) -> Result<(Lexicon, Vec<String>)> {
    let mut entries: HashMap<String, LexiconEntry> = HashMap::new();
    let mut rejected = Vec::new();
    let mut version = "unversioned".to_string();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("version:") {
                version = v.trim().to_string();
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let row = (|| {
            if fields.len() != 5 {
                return Err(format!("expected 5 tab-separated fields, found {}", fields.len()));
            }
            let num = |idx: usize, name: &str| {
                fields[idx]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad {name} {:?}", fields[idx]))
            };
            let token = fields[0].trim().to_lowercase();
            if token.is_empty() {
                return Err("empty token".to_string());
            }
            let entry = LexiconEntry {
                token,
                polarity: num(1, "polarity")?,
                subjectivity: num(2, "subjectivity")?,
                valence: num(3, "valence")?,
                kind: parse_kind(fields[4])?,
            };
            entry.validate()?;
            Ok(entry)
        })();
        match row {
            Ok(entry) => {
                if entries.contains_key(&entry.token) {
                    log::warn!(
                        "{}:{}: duplicate token {:?}, keeping the later row",
                        path.display(),
                        i + 1,
                        entry.token
                    );
                }
                entries.insert(entry.token.clone(), entry);
            }
            Err(msg) => {
                let diag = format!("{}:{}: rejected row: {msg}", path.display(), i + 1);
                log::warn!("{diag}");
                rejected.push(diag);
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::EmptyLexicon(path.to_path_buf()));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok((Lexicon { entries, name, version }, rejected))
}

/// Loads a TSV lexicon: `token polarity subjectivity valence kind[:delta]`.
/// Rows with out-of-range scores are rejected with a logged diagnostic; a
/// file with no valid rows is an error.
pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    load_lexicon_with_diagnostics(path).map(|(lex, _)| lex)
}

pub fn load_lexicon_with_diagnostics(path: &Path) -> Result<(Lexicon, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&text, path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolaritySubjectivity {
    pub polarity: f64,
    pub subjectivity: f64,
    pub matched_count: usize,
}

/// Mean polarity and subjectivity over the sentiment words of `tokens`.
pub fn score_pattern_tokens(tokens: &[String], lex: &Lexicon) -> PolaritySubjectivity {
    let mut polarity = 0.0;
    let mut subjectivity = 0.0;
    let mut matched = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(entry) = lex.get(tok) else { continue };
        if entry.kind != EntryKind::Sentiment {
            continue;
        }
        let negated = i > 0 && lex.get(&tokens[i - 1]).is_some_and(|p| p.kind == EntryKind::Negator);
        polarity += if negated {
            entry.polarity * PATTERN_NEGATION
        } else {
            entry.polarity
        };
        subjectivity += entry.subjectivity;
        matched += 1;
    }
    if matched == 0 {
        return PolaritySubjectivity {
            polarity: 0.0,
            subjectivity: 0.0,
            matched_count: 0,
        };
    }
    let n = matched as f64;
    PolaritySubjectivity {
        polarity: (polarity / n).clamp(-1.0, 1.0),
        subjectivity: (subjectivity / n).clamp(0.0, 1.0),
        matched_count: matched,
    }
}

pub fn score_pattern(doc: &ProcessedDoc, lex: &Lexicon) -> PolaritySubjectivity {
    score_pattern_tokens(&doc.tokens, lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValenceScores {
    pub compound: f64,
    pub pos_frac: f64,
    pub neg_frac: f64,
    pub neu_frac: f64,
}

/// Effective valence of every token after booster and negation rules.
pub fn effective_valences(tokens: &[String], lex: &Lexicon) -> Vec<f64> {
    let entries: Vec<Option<&LexiconEntry>> = tokens.iter().map(|t| lex.get(t)).collect();
    (0..tokens.len())
        .map(|i| {
            let Some(entry) = entries[i] else { return 0.0 };
            let mut v = entry.valence;
            if v == 0.0 {
                return 0.0;
            }
            if i > 0 {
                if let Some(EntryKind::Booster(delta)) = entries[i - 1].map(|e| e.kind) {
                    v += delta * v.signum();
                }
            }
            let lo = i.saturating_sub(VALENCE_NEGATION_WINDOW);
            if entries[lo..i]
                .iter()
                .any(|e| e.is_some_and(|e| e.kind == EntryKind::Negator))
            {
                v *= VALENCE_NEGATION;
            }
            v
        })
        .collect()
}

/// `S / sqrt(S^2 + alpha)`, clamped to `[-1, 1]` against rounding.
pub fn compound_from_sum(sum: f64) -> f64 {
    if sum == 0.0 {
        return 0.0;
    }
    (sum / (sum * sum + COMPOUND_ALPHA).sqrt()).clamp(-1.0, 1.0)
}

pub fn score_valence_tokens(tokens: &[String], lex: &Lexicon) -> ValenceScores {
    let valences = effective_valences(tokens, lex);
    let sum: f64 = valences.iter().sum();
    let (mut pos, mut neg, mut neu) = (0.0, 0.0, 0.0);
    for &v in &valences {
        if v > 0.0 {
            pos += v + 1.0;
        } else if v < 0.0 {
            neg += -v + 1.0;
        } else {
            neu += 1.0;
        }
    }
    let total = pos + neg + neu;
    if total == 0.0 {
        return ValenceScores {
            compound: 0.0,
            pos_frac: 0.0,
            neg_frac: 0.0,
            neu_frac: 1.0,
        };
    }
    ValenceScores {
        compound: compound_from_sum(sum),
        pos_frac: pos / total,
        neg_frac: neg / total,
        neu_frac: neu / total,
    }
}

/// Compound valence score and positive/negative/neutral token-mass shares.
/// Unmatched tokens count as zero-valence mass.
pub fn score_valence(doc: &ProcessedDoc, lex: &Lexicon) -> ValenceScores {
    score_valence_tokens(&doc.tokens, lex)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub neutral_low: f64,
    pub neutral_high: f64,
    pub pattern_epsilon: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            neutral_low: -0.05,
            neutral_high: 0.05,
            pattern_epsilon: 0.05,
        }
    }
}

impl ThresholdConfig {
    pub fn new(neutral_low: f64, neutral_high: f64, pattern_epsilon: f64) -> Result<Self> {
        if neutral_low.is_nan() || neutral_high.is_nan() || neutral_low >= neutral_high {
            return Err(Error::InvalidArgument(format!(
                "neutral band [{neutral_low}, {neutral_high}] is empty"
            )));
        }
        if pattern_epsilon.is_nan() || pattern_epsilon < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "pattern_epsilon {pattern_epsilon} must be >= 0"
            )));
        }
        Ok(ThresholdConfig {
            neutral_low,
            neutral_high,
            pattern_epsilon,
        })
    }

    /// The band used for a scorer: the configured band for valence scores,
    /// `[-epsilon, epsilon]` for pattern polarity.
    pub fn band(&self, method: ScoreMethod) -> ThresholdConfig {
        match method {
            ScoreMethod::Valence => *self,
            ScoreMethod::Pattern => ThresholdConfig {
                neutral_low: -self.pattern_epsilon,
                neutral_high: self.pattern_epsilon,
                ..*self
            },
        }
    }
}

/// `> neutral_high` is positive, `< neutral_low` negative, anything in
/// between (endpoints included) neutral.
pub fn label_from_scores(score: f64, cfg: &ThresholdConfig) -> Result<SentimentLabel> {
    if !score.is_finite() {
        return Err(Error::NonFinite(format!("sentiment score {score}")));
    }
    Ok(if score > cfg.neutral_high {
        SentimentLabel::Positive
    } else if score < cfg.neutral_low {
        SentimentLabel::Negative
    } else {
        SentimentLabel::Neutral
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMethod {
    /// Mean polarity (TextBlob-style).
    Pattern,
    /// Compound valence (VADER-style).
    Valence,
}

impl ScoreMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoreMethod::Pattern => "pattern",
            ScoreMethod::Valence => "valence",
        }
    }
}

impl fmt::Display for ScoreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pattern" | "textblob" => Ok(ScoreMethod::Pattern),
            "valence" | "vader" => Ok(ScoreMethod::Valence),
            other => Err(Error::InvalidArgument(format!(
                "unknown method {other:?} (pattern|valence)"
            ))),
        }
    }
}

/// Scalar score of a document under `method`.
pub fn method_score(tokens: &[String], method: ScoreMethod, lex: &Lexicon) -> f64 {
    match method {
        ScoreMethod::Pattern => score_pattern_tokens(tokens, lex).polarity,
        ScoreMethod::Valence => score_valence_tokens(tokens, lex).compound,
    }
}

/// Label of one document; documents with no tokens are neutral.
pub fn label_doc(
    doc: &ProcessedDoc,
    method: ScoreMethod,
    lex: &Lexicon,
    cfg: &ThresholdConfig,
) -> Result<SentimentLabel> {
    if doc.tokens.is_empty() {
        return Ok(SentimentLabel::Neutral);
    }
    label_from_scores(method_score(&doc.tokens, method, lex), &cfg.band(method))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelabelReport {
    pub method: ScoreMethod,
    pub before_counts: [usize; 3],
    pub before_unknown: usize,
    pub after_counts: [usize; 3],
    /// Documents whose known original label was positive or negative and
    /// that were relabeled neutral.
    pub moved_to_neutral: usize,
}

impl RelabelReport {
    pub fn total(&self) -> usize {
        self.after_counts.iter().sum()
    }

    /// `label,before,after` rows plus an `unknown` row when any original
    /// label was missing.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "label", "before", "after"])?;
        for l in SentimentLabel::ALL {
            w.write_record([
                self.method.as_str(),
                l.as_str(),
                &self.before_counts[l.index()].to_string(),
                &self.after_counts[l.index()].to_string(),
            ])?;
        }
        if self.before_unknown > 0 {
            w.write_record([self.method.as_str(), "unknown", &self.before_unknown.to_string(), "0"])?;
        }
        w.flush().map_err(|e| Error::io("<relabel report>", e))?;
        Ok(())
    }

    pub fn text_table(&self) -> String {
        let mut t = TextTable::new(["Label", "Original", &format!("Relabeled ({})", self.method)]);
        for l in SentimentLabel::ALL {
            t.push([
                l.as_str().to_string(),
                self.before_counts[l.index()].to_string(),
                self.after_counts[l.index()].to_string(),
            ]);
        }
        if self.before_unknown > 0 {
            t.push(["unknown".to_string(), self.before_unknown.to_string(), "0".to_string()]);
        }
        t.push([
            "moved to neutral".to_string(),
            String::new(),
            self.moved_to_neutral.to_string(),
        ]);
        t.render()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RelabelOptions {
    /// Drop tokens whose lexicon entry has zero subjectivity before scoring.
    pub drop_objective: bool,
}

/// Tokens minus those with a zero-subjectivity sentiment entry.
pub fn drop_objective_tokens(tokens: &[String], lex: &Lexicon) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| {
            !lex.get(t)
                .is_some_and(|e| e.kind == EntryKind::Sentiment && e.subjectivity == 0.0)
        })
        .cloned()
        .collect()
}

pub fn relabel_corpus(
    docs: &[(ProcessedDoc, OriginalLabel)],
    method: ScoreMethod,
    lex: &Lexicon,
    cfg: &ThresholdConfig,
) -> Result<(Vec<LabeledDoc>, RelabelReport)> {
    relabel_corpus_with(docs, method, lex, cfg, RelabelOptions::default())
}

/// Labels every document with `method` and reports the class distribution
/// before and after.
pub fn relabel_corpus_with(
    docs: &[(ProcessedDoc, OriginalLabel)],
    method: ScoreMethod,
    lex: &Lexicon,
    cfg: &ThresholdConfig,
    opts: RelabelOptions,
) -> Result<(Vec<LabeledDoc>, RelabelReport)> {
    let labels: Vec<SentimentLabel> = docs
        .par_iter()
        .map(|(doc, _)| {
            if opts.drop_objective && !doc.tokens.is_empty() {
                let kept = ProcessedDoc {
                    tokens: drop_objective_tokens(&doc.tokens, lex),
                    ..doc.clone()
                };
                // A document emptied by the filter still has content, score it as 0.
                if kept.tokens.is_empty() {
                    return label_from_scores(0.0, &cfg.band(method));
                }
                label_doc(&kept, method, lex, cfg)
            } else {
                label_doc(doc, method, lex, cfg)
            }
        })
        .collect::<Result<_>>()?;

    let mut report = RelabelReport {
        method,
        before_counts: [0; 3],
        before_unknown: 0,
        after_counts: [0; 3],
        moved_to_neutral: 0,
    };
    let mut out = Vec::with_capacity(docs.len());
    for ((doc, original), label) in docs.iter().zip(labels) {
        match original {
            OriginalLabel::Known(l) => {
                report.before_counts[l.index()] += 1;
                if *l != SentimentLabel::Neutral && label == SentimentLabel::Neutral {
                    report.moved_to_neutral += 1;
                }
            }
            OriginalLabel::Unknown => report.before_unknown += 1,
        }
        report.after_counts[label.index()] += 1;
        out.push(LabeledDoc {
            doc: doc.clone(),
            original: *original,
            label,
        });
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn small_lex() -> Lexicon {
        Lexicon::from_entries(
            "test",
            "1",
            [
                LexiconEntry::sentiment("great", 0.8, 0.75, 3.1),
                LexiconEntry::sentiment("terrible", -0.9, 1.0, -2.1),
                LexiconEntry::sentiment("good", 0.7, 0.6, 1.9),
                LexiconEntry::negator("not"),
                LexiconEntry::booster("very", BOOSTER_DELTA),
            ],
        )
    }

    #[test]
    fn parses_schema_row() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# version: 2").unwrap();
        writeln!(f, "great\t0.8\t0.75\t3.1\tsentiment").unwrap();
        writeln!(f, "very\t0\t0\t0\tbooster:0.293").unwrap();
        let lex = load_lexicon(f.path()).unwrap();
        let e = lex.get("great").unwrap();
        assert_eq!(e.polarity, 0.8);
        assert_eq!(e.subjectivity, 0.75);
        assert_eq!(e.valence, 3.1);
        assert_eq!(lex.get("very").unwrap().kind, EntryKind::Booster(0.293));
        assert_eq!(lex.version, "2");
    }

    #[test]
    fn out_of_range_row_rejected() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "weird\t1.5\t0.5\t1.0\tsentiment").unwrap();
        writeln!(f, "fine\t0.5\t0.5\t1.0\tsentiment").unwrap();
        let (lex, diags) = load_lexicon_with_diagnostics(f.path()).unwrap();
        assert!(lex.get("weird").is_none());
        assert_eq!(lex.len(), 1);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].contains("polarity"));
    }

    #[test]
    fn empty_lexicon_is_fatal() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(matches!(load_lexicon(f.path()), Err(Error::EmptyLexicon(_))));
    }

    #[test]
    fn duplicate_token_last_wins() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "good\t0.1\t0.1\t0.1\tsentiment").unwrap();
        writeln!(f, "good\t0.7\t0.6\t1.9\tsentiment").unwrap();
        let lex = load_lexicon(f.path()).unwrap();
        assert_eq!(lex.get("good").unwrap().valence, 1.9);
    }

    #[test]
    fn pattern_single_entry() {
        let s = score_pattern_tokens(&toks(&["great"]), &small_lex());
        assert_eq!(s.polarity, 0.8);
        assert_eq!(s.subjectivity, 0.75);
        assert_eq!(s.matched_count, 1);
    }

    #[test]
    fn pattern_mean_of_two() {
        let s = score_pattern_tokens(&toks(&["great", "terrible"]), &small_lex());
        assert!((s.polarity - (-0.05)).abs() < 1e-12);
    }

    #[test]
    fn pattern_empty_doc() {
        let s = score_pattern_tokens(&[], &small_lex());
        assert_eq!((s.polarity, s.subjectivity, s.matched_count), (0.0, 0.0, 0));
    }

    #[test]
    fn pattern_negation_flips_and_halves() {
        let s = score_pattern_tokens(&toks(&["not", "great"]), &small_lex());
        assert!((s.polarity - (-0.4)).abs() < 1e-12);
        // Negation reaches only one token back.
        let s = score_pattern_tokens(&toks(&["not", "x", "great"]), &small_lex());
        assert_eq!(s.polarity, 0.8);
    }

    #[test]
    fn valence_no_match() {
        let v = score_valence_tokens(&toks(&["zzz"]), &small_lex());
        assert_eq!(v.compound, 0.0);
        assert_eq!(v.neu_frac, 1.0);
        let v = score_valence_tokens(&[], &small_lex());
        assert_eq!(v.compound, 0.0);
        assert_eq!(v.neu_frac, 1.0);
    }

    #[test]
    fn valence_single_word() {
        let v = score_valence_tokens(&toks(&["good"]), &small_lex());
        let expected = 1.9 / (1.9f64 * 1.9 + 15.0).sqrt();
        assert!((v.compound - expected).abs() < 1e-12);
        assert!((v.compound - 0.4404).abs() < 5e-5);
    }

    #[test]
    fn valence_negated() {
        let v = score_valence_tokens(&toks(&["not", "good"]), &small_lex());
        let s = 1.9 * -0.74;
        assert!((v.compound - s / (s * s + 15.0f64).sqrt()).abs() < 1e-12);
        assert!((v.compound - (-0.3412)).abs() < 5e-5);
        // Three tokens back still negates, four does not.
        let v3 = score_valence_tokens(&toks(&["not", "a", "b", "good"]), &small_lex());
        assert!(v3.compound < 0.0);
        let v4 = score_valence_tokens(&toks(&["not", "a", "b", "c", "good"]), &small_lex());
        assert!(v4.compound > 0.0);
    }

    #[test]
    fn valence_booster_adds_in_sign_direction() {
        let lex = small_lex();
        let vals = effective_valences(&toks(&["very", "good", "very", "terrible"]), &lex);
        assert!((vals[1] - (1.9 + 0.293)).abs() < 1e-12);
        assert!((vals[3] - (-2.1 - 0.293)).abs() < 1e-12);
    }

    #[test]
    fn valence_fractions_sum_to_one() {
        let v = score_valence_tokens(&toks(&["good", "terrible", "zzz"]), &small_lex());
        assert!((v.pos_frac + v.neg_frac + v.neu_frac - 1.0).abs() < 1e-9);
    }

    #[test]
    fn band_boundaries() {
        let cfg = ThresholdConfig::default();
        let l = |s| label_from_scores(s, &cfg).unwrap();
        assert_eq!(l(0.06), SentimentLabel::Positive);
        assert_eq!(l(-0.05), SentimentLabel::Neutral);
        assert_eq!(l(0.05), SentimentLabel::Neutral);
        assert_eq!(l(0.0), SentimentLabel::Neutral);
        assert_eq!(l(-0.051), SentimentLabel::Negative);
        assert!(label_from_scores(f64::NAN, &cfg).is_err());
        assert!(label_from_scores(f64::INFINITY, &cfg).is_err());
    }

    #[test]
    fn threshold_config_validation() {
        assert!(ThresholdConfig::new(0.1, -0.1, 0.05).is_err());
        assert!(ThresholdConfig::new(-0.1, 0.1, -1.0).is_err());
        assert!(ThresholdConfig::new(-0.1, 0.1, 0.0).is_ok());
    }

    #[test]
    fn relabel_two_docs() {
        let docs = vec![
            (
                ProcessedDoc::new("1", toks(&["good"])),
                OriginalLabel::Known(SentimentLabel::Positive),
            ),
            (
                ProcessedDoc::new("2", toks(&["not", "good"])),
                OriginalLabel::Known(SentimentLabel::Positive),
            ),
        ];
        let (out, report) =
            relabel_corpus(&docs, ScoreMethod::Valence, &small_lex(), &ThresholdConfig::default()).unwrap();
        assert_eq!(out[0].label, SentimentLabel::Positive);
        assert_eq!(out[1].label, SentimentLabel::Negative);
        assert_eq!(report.after_counts, [1, 0, 1]);
        assert_eq!(report.before_counts, [0, 0, 2]);
    }

    #[test]
    fn relabel_all_zero_scores_all_neutral() {
        let docs: Vec<_> = (0..5)
            .map(|i| {
                (
                    ProcessedDoc::new(i.to_string(), toks(&["zzz"])),
                    OriginalLabel::Known(SentimentLabel::Negative),
                )
            })
            .collect();
        let (_, report) =
            relabel_corpus(&docs, ScoreMethod::Valence, &small_lex(), &ThresholdConfig::default()).unwrap();
        assert_eq!(report.after_counts, [0, 5, 0]);
        assert_eq!(report.moved_to_neutral, 5);
    }

    #[test]
    fn dropped_docs_are_neutral() {
        let docs = vec![(ProcessedDoc::new("1", vec![]), OriginalLabel::Unknown)];
        for m in [ScoreMethod::Pattern, ScoreMethod::Valence] {
            let (out, report) = relabel_corpus(&docs, m, &small_lex(), &ThresholdConfig::default()).unwrap();
            assert_eq!(out[0].label, SentimentLabel::Neutral);
            assert_eq!(report.before_unknown, 1);
        }
    }

    #[test]
    fn reduced_view_maps_stems() {
        let lex = Lexicon::from_entries(
            "t",
            "1",
            [
                LexiconEntry::sentiment("happy", 0.8, 1.0, 2.7),
                LexiconEntry::sentiment("happiness", 0.6, 0.8, 2.6),
                LexiconEntry::sentiment("love", 0.5, 0.6, 3.2),
                LexiconEntry::sentiment("loving", 0.6, 0.6, 2.9),
            ],
        );
        let r = lex.reduced(&PipelineConfig::bundled());
        let happi = r.get("happi").unwrap();
        assert!((happi.valence - 2.65).abs() < 1e-12);
        // An existing key is never overwritten by a reduced form.
        assert_eq!(r.get("love").unwrap().valence, 3.2);
        assert!(r.get("happy").is_some());
    }

    #[test]
    fn bundled_lexicon_loads() {
        let lex = Lexicon::bundled();
        assert!(lex.len() > 7000);
        let great = lex.get("great").unwrap();
        assert_eq!((great.polarity, great.valence), (0.8, 3.1));
        assert_eq!(lex.get("not").unwrap().kind, EntryKind::Negator);
    }

    #[test]
    fn objective_filter() {
        let lex = Lexicon::from_entries(
            "t",
            "1",
            [
                LexiconEntry::sentiment("table", 0.0, 0.0, 0.0),
                LexiconEntry::sentiment("good", 0.7, 0.6, 1.9),
            ],
        );
        assert_eq!(
            drop_objective_tokens(&toks(&["table", "good", "x"]), &lex),
            toks(&["good", "x"])
        );
    }
}
