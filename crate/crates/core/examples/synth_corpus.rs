//! Writes a synthetic Sentiment140-style corpus.
//!
//! cargo run --example synth_corpus -- OUT.csv ROWS [SEED]

use std::fs::File;
use std::io::BufWriter;

use anyhow::{bail, Context, Result};
use sentlex::seed::DEFAULT_SEED;
use sentlex::synth::write_sentiment140;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.len() < 2 {
        bail!("usage: synth_corpus OUT.csv ROWS [SEED]");
    }
    let rows: usize = args[1].parse().context("ROWS")?;
    let seed: u64 = match args.get(2) {
        Some(s) => s.parse().context("SEED")?,
        None => DEFAULT_SEED,
    };
    write_sentiment140(BufWriter::new(File::create(&args[0])?), rows, seed)?;
    Ok(())
}
