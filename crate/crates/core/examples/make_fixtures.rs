//! Regenerates the bundled fixtures under `fixtures/`.
//!
//! cargo run --example make_fixtures

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::Result;
use sentlex::seed::DEFAULT_SEED;
use sentlex::synth::{write_sentiment140, write_tweet_dump};

fn main() -> Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::create_dir_all(&dir)?;
    write_sentiment140(
        BufWriter::new(File::create(dir.join("sentiment140_sample.csv"))?),
        1000,
        DEFAULT_SEED,
    )?;
    write_tweet_dump(
        BufWriter::new(File::create(dir.join("politician_tweets.ndjson"))?),
        300,
        DEFAULT_SEED,
    )?;
    Ok(())
}
