//! Tweet normalization and token-level cleanup.
//!
//! A document goes through five stages, always in this order:
//! `normalize -> tokenize -> remove_stopwords -> expand_slang -> reduce`.
//! Every stage is a pure function of its input and the [`PipelineConfig`].

pub mod porter;

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::TweetRecord;
use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const BUNDLED_SLANG: &str = include_str!("../../data/slang.tsv");
const BUNDLED_LEMMAS: &str = include_str!("../../data/lemmas.tsv");

static URL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)(?:https?://|www\.)\S*").unwrap());
static MENTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b[0-9]+(?:[.,:/][0-9]+)*\b").unwrap());

/// One pattern-stripping pass of [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StripRule {
    /// `http://`, `https://` and `www.` links.
    Urls,
    /// `@user` mentions.
    Mentions,
    /// Free-standing numbers such as `123` or `3.14`.
    Numbers,
    /// Anything that is not an ASCII letter or whitespace, including `#`,
    /// apostrophes, digits and emoticon glyphs.
    Symbols,
    /// ASCII lowercasing.
    CaseFold,
}

impl StripRule {
    pub const DEFAULT_ORDER: [StripRule; 5] = [
        StripRule::Urls,
        StripRule::Mentions,
        StripRule::Numbers,
        StripRule::Symbols,
        StripRule::CaseFold,
    ];

    fn apply(self, text: &str) -> String {
        match self {
            StripRule::Urls => URL_RE.replace_all(text, " ").into_owned(),
            StripRule::Mentions => MENTION_RE.replace_all(text, " ").into_owned(),
            StripRule::Numbers => NUMBER_RE.replace_all(text, " ").into_owned(),
            StripRule::Symbols => text
                .chars()
                .map(|c| {
                    if c.is_ascii_alphabetic() || c.is_whitespace() {
                        c
                    } else {
                        ' '
                    }
                })
                .collect(),
            StripRule::CaseFold => text.to_ascii_lowercase(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionMode {
    /// Porter stemming.
    #[default]
    Stem,
    /// Table lookup; unlisted words pass through.
    Lemmatize,
    None,
}

impl std::str::FromStr for ReductionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stem" => Ok(ReductionMode::Stem),
            "lemmatize" | "lemma" => Ok(ReductionMode::Lemmatize),
            "none" => Ok(ReductionMode::None),
            other => Err(Error::InvalidArgument(format!(
                "unknown reduction mode {other:?} (stem|lemmatize|none)"
            ))),
        }
    }
}

/// Word lists and options for [`preprocess`]. Immutable once built.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    stopwords: HashSet<String>,
    slang: HashMap<String, Vec<String>>,
    lemmas: HashMap<String, String>,
    reduction_mode: ReductionMode,
    strip_rules: Vec<StripRule>,
}

impl PipelineConfig {
    pub fn new(
        stopwords: HashSet<String>,
        slang: HashMap<String, Vec<String>>,
        lemmas: HashMap<String, String>,
        reduction_mode: ReductionMode,
        strip_rules: Vec<StripRule>,
    ) -> Result<Self> {
        if strip_rules.is_empty() {
            return Err(Error::InvalidArgument("strip_rules must not be empty".into()));
        }
        if let Some(k) = slang.keys().find(|k| k.chars().any(|c| c.is_uppercase())) {
            return Err(Error::InvalidArgument(format!("slang key {k:?} is not lowercase")));
        }
        Ok(PipelineConfig {
            stopwords,
            slang,
            lemmas,
            reduction_mode,
            strip_rules,
        })
    }

    /// Bundled stop words, slang table and lemma table with Porter stemming.
    pub fn bundled() -> Self {
        Self::bundled_with(ReductionMode::default())
    }

    pub fn bundled_with(mode: ReductionMode) -> Self {
        PipelineConfig {
            stopwords: parse_stopwords(BUNDLED_STOPWORDS),
            slang: parse_pairs(BUNDLED_SLANG, "slang", Path::new("<bundled slang>"))
                .expect("bundled slang table")
                .into_iter()
                .map(|(k, v)| (k, v.split_whitespace().map(str::to_string).collect()))
                .collect(),
            lemmas: parse_pairs(BUNDLED_LEMMAS, "lemma", Path::new("<bundled lemmas>"))
                .expect("bundled lemma table")
                .into_iter()
                .collect(),
            reduction_mode: mode,
            strip_rules: StripRule::DEFAULT_ORDER.to_vec(),
        }
    }

    pub fn with_stopwords(mut self, stopwords: HashSet<String>) -> Self {
        self.stopwords = stopwords;
        self
    }

    pub fn with_slang(mut self, slang: HashMap<String, Vec<String>>) -> Result<Self> {
        if let Some(k) = slang.keys().find(|k| k.chars().any(|c| c.is_uppercase())) {
            return Err(Error::InvalidArgument(format!("slang key {k:?} is not lowercase")));
        }
        self.slang = slang;
        Ok(self)
    }

    pub fn with_lemmas(mut self, lemmas: HashMap<String, String>) -> Self {
        self.lemmas = lemmas;
        self
    }

    pub fn with_reduction(mut self, mode: ReductionMode) -> Self {
        self.reduction_mode = mode;
        self
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn slang(&self) -> &HashMap<String, Vec<String>> {
        &self.slang
    }

    pub fn lemmas(&self) -> &HashMap<String, String> {
        &self.lemmas
    }

    pub fn reduction_mode(&self) -> ReductionMode {
        self.reduction_mode
    }

    pub fn strip_rules(&self) -> &[StripRule] {
        &self.strip_rules
    }

    /// Reduces a single token according to this config.
    pub fn reduce_token(&self, token: &str) -> String {
        match self.reduction_mode {
            ReductionMode::Stem => porter::stem(token),
            ReductionMode::Lemmatize => self.lemmas.get(token).cloned().unwrap_or_else(|| token.to_string()),
            ReductionMode::None => token.to_string(),
        }
    }

    pub fn normalize(&self, raw: &str) -> String {
        normalize_with(raw, &self.strip_rules)
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::bundled()
    }
}

/// A preprocessed document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessedDoc {
    pub source_id: String,
    pub tokens: Vec<String>,
    /// Set when preprocessing left no tokens.
    pub dropped_all: bool,
}

impl ProcessedDoc {
    pub fn new(source_id: impl Into<String>, tokens: Vec<String>) -> Self {
        let dropped_all = tokens.is_empty();
        ProcessedDoc {
            source_id: source_id.into(),
            tokens,
            dropped_all,
        }
    }
}

/// Strips URLs, mentions, numbers and symbols, lowercases and collapses
/// whitespace, using the default rule order.
pub fn normalize(raw: &str) -> String {
    normalize_with(raw, &StripRule::DEFAULT_ORDER)
}

pub fn normalize_with(raw: &str, rules: &[StripRule]) -> String {
    let mut text = raw.to_string();
    for rule in rules {
        text = rule.apply(&text);
    }
    collapse_whitespace(&text)
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn remove_stopwords(tokens: Vec<String>, stopwords: &HashSet<String>) -> Vec<String> {
    tokens.into_iter().filter(|t| !stopwords.contains(t)).collect()
}

pub fn expand_slang(tokens: Vec<String>, slang: &HashMap<String, Vec<String>>) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    for tok in tokens {
        match slang.get(&tok) {
            Some(expansion) => out.extend(expansion.iter().cloned()),
            None => out.push(tok),
        }
    }
    out
}

pub fn reduce(tokens: Vec<String>, config: &PipelineConfig) -> Vec<String> {
    match config.reduction_mode {
        ReductionMode::None => tokens,
        _ => tokens.iter().map(|t| config.reduce_token(t)).collect(),
    }
}

pub fn preprocess(record: &TweetRecord, config: &PipelineConfig) -> ProcessedDoc {
    ProcessedDoc::new(record.id.clone(), preprocess_text(&record.raw_text, config))
}

/// The token list [`preprocess`] would produce for `raw`.
pub fn preprocess_text(raw: &str, config: &PipelineConfig) -> Vec<String> {
    let tokens = tokenize(&config.normalize(raw));
    let tokens = remove_stopwords(tokens, &config.stopwords);
    let tokens = expand_slang(tokens, &config.slang);
    reduce(tokens, config)
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

fn parse_pairs(text: &str, what: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `{what}<TAB>value`"),
            });
        };
        let key = key.trim().to_lowercase();
        let value = value.trim().to_lowercase();
        if key.is_empty() || value.is_empty() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("empty {what} field"),
            });
        }
        out.push((key, value));
    }
    Ok(out)
}

/// One token per line; `#` starts a comment line.
pub fn load_stopwords(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_stopwords(&text))
}

/// `slang<TAB>expansion words` per line.
pub fn load_slang(path: &Path) -> Result<HashMap<String, Vec<String>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_pairs(&text, "slang", path)?
        .into_iter()
        .map(|(k, v)| (k, v.split_whitespace().map(str::to_string).collect()))
        .collect())
}

/// `form<TAB>lemma` per line.
pub fn load_lemmas(path: &Path) -> Result<HashMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_pairs(&text, "lemma", path)?.into_iter().collect())
}
