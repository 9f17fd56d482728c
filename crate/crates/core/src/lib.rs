//! Lexicon-based tweet sentiment analysis.
//!
//! The crate covers the full pipeline: loading raw tweets ([`corpus`]),
//! text cleanup ([`textpipe`]), three-class labeling with two lexicon
//! scorers ([`lexicon`]), TF-IDF features with lexicon-ranked truncation
//! ([`features`]), five classifiers ([`models`]), evaluation ([`eval`]) and
//! the report-producing commands behind the `sentlex` binary
//! ([`commands`]).

pub mod commands;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod label;
pub mod lexicon;
pub mod models;
pub mod seed;
pub mod synth;
pub mod table;
pub mod textpipe;

pub use error::{Error, Result};
pub use label::{OriginalLabel, SentimentLabel};
