//! Seeded generators for tweet-like test corpora.
//!
//! Two shapes are produced: Sentiment140-style CSV rows (polarity, id, date,
//! query, user, text) with balanced 0/4 polarity codes, and newline-delimited
//! JSON dumps of one account's tweets, positive-leaning, with a gold label
//! per tweet. Text is assembled from small word pools with Zipf-like
//! frequencies plus the usual noise: mentions, links, hashtags, numbers,
//! slang, negations, intensifiers and punctuation. The gold label is the
//! sentiment the generator aimed for, which the lexicon scorers recover only
//! approximately.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::SentimentLabel;
use crate::seed;

const POSITIVE: &[&str] = &[
    "good",
    "love",
    "great",
    "happy",
    "thanks",
    "awesome",
    "nice",
    "fun",
    "best",
    "cool",
    "excited",
    "glad",
    "amazing",
    "beautiful",
    "enjoy",
    "lovely",
    "perfect",
    "wonderful",
    "sweet",
    "yay",
    "win",
    "hope",
    "laugh",
    "smile",
    "proud",
    "fantastic",
    "congrats",
    "relaxing",
    "free",
    "friendly",
    "brilliant",
    "cute",
    "favorite",
    "fine",
    "hug",
    "interesting",
    "kind",
    "lucky",
    "pretty",
    "success",
];

const NEGATIVE: &[&str] = &[
    "sad",
    "miss",
    "bad",
    "hate",
    "sick",
    "sorry",
    "tired",
    "hurt",
    "sucks",
    "wrong",
    "lost",
    "pain",
    "worst",
    "bored",
    "fail",
    "cry",
    "poor",
    "broken",
    "ugh",
    "annoying",
    "headache",
    "angry",
    "stupid",
    "terrible",
    "awful",
    "lonely",
    "stress",
    "upset",
    "scared",
    "ugly",
    "horrible",
    "disappointed",
    "worried",
    "boring",
    "crash",
    "damn",
    "dead",
    "hell",
    "problem",
    "rain",
];

const FILLER: &[&str] = &[
    "today", "work", "going", "day", "time", "home", "got", "now", "night", "tomorrow", "school", "morning", "back",
    "still", "week", "new", "last", "think", "see", "know", "bed", "sleep", "house", "watching", "weekend", "people",
    "tonight", "getting", "way", "long", "class", "friends", "phone", "car", "twitter", "movie", "music", "coffee",
    "dinner", "game", "office", "trip", "city", "bus", "train", "email", "lunch", "weather", "summer", "monday",
    "friday", "exam", "book", "show", "song", "video", "photo", "dog", "cat", "mom", "dad", "sister", "brother",
    "birthday", "party", "beach", "store", "meeting", "project", "computer", "internet", "update", "tv", "news",
    "food",
];

const NEGATORS: &[&str] = &["not", "no", "never", "don't", "can't", "didn't", "isn't", "wasn't"];

const BOOSTERS: &[&str] = &["very", "really", "so", "extremely", "totally", "absolutely"];

const SLANG: &[&str] = &["lol", "omg", "im", "u", "gonna", "wanna", "tho", "idk", "btw", "thx"];

const EMOTICONS: &[&str] = &[":)", ":(", ":D", "<3", ";)", ":-/", "xD"];

const POLITICS_POSITIVE: &[&str] = &[
    "great",
    "thank",
    "big",
    "strong",
    "win",
    "honored",
    "amazing",
    "beautiful",
    "proud",
    "incredible",
    "tremendous",
    "best",
    "support",
    "freedom",
    "congratulations",
    "success",
    "safe",
    "love",
];

const POLITICS_NEGATIVE: &[&str] = &[
    "fake",
    "bad",
    "weak",
    "fraud",
    "dishonest",
    "disaster",
    "corrupt",
    "dumb",
    "dirty",
    "terrible",
    "failed",
    "horrible",
    "sad",
    "illegal",
    "crooked",
    "witch",
    "hunt",
    "killing",
];

const POLITICS_FILLER: &[&str] = &[
    "usa",
    "people",
    "country",
    "jobs",
    "america",
    "news",
    "democrats",
    "today",
    "state",
    "vote",
    "border",
    "economy",
    "congress",
    "media",
    "election",
    "military",
    "trade",
    "china",
    "tax",
    "senate",
    "house",
    "white",
    "rally",
    "tonight",
    "workers",
    "farmers",
    "veterans",
    "healthcare",
    "nation",
    "president",
    "governor",
    "thursday",
    "weekly",
    "address",
    "interview",
    "meeting",
    "deal",
];

const SYLLABLES: &[&str] = &[
    "ba", "ke", "lo", "mi", "nu", "ra", "si", "to", "vu", "ze", "da", "fo", "gi", "ha", "ju", "pe",
];

/// Size of the rare-word vocabulary behind the long tail.
const LONG_TAIL: u32 = 40_000;

/// A rare pseudo-word: names, typos and topic words that make up most of a
/// real tweet vocabulary. Ranks follow a continuous Zipf law over
/// `1..=LONG_TAIL`, and each rank spells a fixed three-or-more syllable word.
fn long_tail_word(rng: &mut ChaCha8Rng) -> String {
    let u: f64 = rng.gen();
    let rank = ((LONG_TAIL as f64 + 1.0).powf(u) as u32).clamp(1, LONG_TAIL);
    let mut n = rank + SYLLABLES.len().pow(2) as u32;
    let mut w = String::new();
    while n > 0 {
        w.push_str(SYLLABLES[n as usize % SYLLABLES.len()]);
        n /= SYLLABLES.len() as u32;
    }
    w
}

/// Index into a pool of `n` items with weight `1 / (rank + 1)`.
fn zipf_index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    let h: f64 = (1..=n).map(|r| 1.0 / r as f64).sum();
    let mut u = rng.gen::<f64>() * h;
    for r in 0..n {
        u -= 1.0 / (r + 1) as f64;
        if u <= 0.0 {
            return r;
        }
    }
    n - 1
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[zipf_index(rng, pool.len())]
}

struct Pools<'a> {
    positive: &'a [&'a str],
    negative: &'a [&'a str],
    filler: &'a [&'a str],
    /// Filler drawn uniformly instead of Zipf-weighted, so topic words do
    /// not crowd out the sentiment words in frequency tables.
    flat_filler: bool,
    /// Chance that a filler slot holds a rare long-tail word.
    long_tail: f64,
}

impl Pools<'_> {
    fn filler_word<'a>(&'a self, rng: &mut ChaCha8Rng) -> &'a str {
        if self.flat_filler {
            self.filler.choose(rng).unwrap()
        } else {
            pick(rng, self.filler)
        }
    }
}

/// Builds one tweet aiming at `target`.
fn compose(rng: &mut ChaCha8Rng, pools: &Pools<'_>, target: SentimentLabel, casual: bool) -> String {
    let mut words: Vec<String> = Vec::new();
    if casual && rng.gen_bool(0.3) {
        words.push(format!("@user{}", rng.gen_range(1..5000)));
    }
    let n_filler = rng.gen_range(2..9);
    let n_sentiment = match target {
        SentimentLabel::Neutral => usize::from(rng.gen_bool(0.25)),
        _ => rng.gen_range(1..4),
    };
    let mut slots: Vec<Option<bool>> = vec![None; n_filler];
    for _ in 0..n_sentiment {
        // true = word agrees with the target polarity
        let agrees = match target {
            SentimentLabel::Neutral => rng.gen_bool(0.5),
            _ => rng.gen_bool(0.8),
        };
        let at = rng.gen_range(0..=slots.len());
        slots.insert(at, Some(agrees));
    }
    for slot in slots {
        match slot {
            None => {
                if casual && rng.gen_bool(0.08) {
                    words.push(pick(rng, SLANG).to_string());
                }
                if rng.gen_bool(pools.long_tail) {
                    words.push(long_tail_word(rng));
                } else {
                    words.push(pools.filler_word(rng).to_string());
                }
            }
            Some(agrees) => {
                let positive_word = match target {
                    SentimentLabel::Positive => agrees,
                    SentimentLabel::Negative => !agrees,
                    SentimentLabel::Neutral => agrees,
                };
                // Negated opposite-polarity words still express the target.
                let negate = target != SentimentLabel::Neutral && !agrees && rng.gen_bool(0.35);
                if negate {
                    words.push(pick(rng, NEGATORS).to_string());
                }
                if rng.gen_bool(0.15) {
                    words.push(pick(rng, BOOSTERS).to_string());
                }
                let pool = if positive_word { pools.positive } else { pools.negative };
                let mut w = pick(rng, pool).to_string();
                if casual && rng.gen_bool(0.1) {
                    w = w.to_uppercase();
                }
                words.push(w);
            }
        }
    }
    if rng.gen_bool(0.15) {
        words.push(format!("#{}", pools.filler_word(rng)));
    }
    if rng.gen_bool(0.1) {
        words.push(rng.gen_range(2..500).to_string());
    }
    if rng.gen_bool(0.12) {
        words.push(format!("http://t.co/{:x}", rng.gen::<u32>()));
    }
    let mut text = words.join(" ");
    if casual && rng.gen_bool(0.2) {
        text.push(' ');
        text.push_str(EMOTICONS.choose(rng).unwrap());
    }
    if rng.gen_bool(0.3) {
        text.push_str(["!", "!!!", ".", "?", "..."].choose(rng).unwrap());
    }
    text
}

const DAYS: &[&str] = &["Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"];
const MONTHS: &[&str] = &["Apr", "May", "Jun"];

/// Writes `rows` Sentiment140-style CSV records, half negative (code 0) and
/// half positive (code 4), interleaved. The original label reflects the
/// aimed-for polarity; about a fifth of the tweets are written as neutral
/// chatter yet keep their binary code, as distant supervision would.
pub fn write_sentiment140<W: Write>(out: W, rows: usize, seed: u64) -> Result<()> {
    let mut rng = seed::rng_for(seed, "synth-sentiment140");
    let pools = Pools {
        positive: POSITIVE,
        negative: NEGATIVE,
        filler: FILLER,
        flat_filler: false,
        long_tail: 0.35,
    };
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .quote_style(csv::QuoteStyle::Always)
        .from_writer(out);
    for i in 0..rows {
        let code = if i % 2 == 0 {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Positive
        };
        let target = if rng.gen_bool(0.2) {
            SentimentLabel::Neutral
        } else {
            code
        };
        let text = compose(&mut rng, &pools, target, true);
        let date = format!(
            "{} {} {:02} {:02}:{:02}:{:02} PDT 2009",
            DAYS.choose(&mut rng).unwrap(),
            MONTHS.choose(&mut rng).unwrap(),
            rng.gen_range(1..29),
            rng.gen_range(0..24),
            rng.gen_range(0..60),
            rng.gen_range(0..60)
        );
        w.write_record([
            if code == SentimentLabel::Negative { "0" } else { "4" },
            &(1_467_810_000u64 + i as u64 * 7).to_string(),
            &date,
            "NO_QUERY",
            &format!("user{}", rng.gen_range(1..20_000)),
            &text,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<synthetic csv>", e))
}

#[derive(Serialize)]
struct DumpRow<'a> {
    id: String,
    created_at: String,
    user: &'a str,
    text: String,
    label: SentimentLabel,
}

/// Writes `rows` NDJSON tweets from a single account, roughly 60% positive,
/// 25% negative and 15% neutral, each with its gold `label`.
pub fn write_tweet_dump<W: Write>(mut out: W, rows: usize, seed: u64) -> Result<()> {
    let mut rng = seed::rng_for(seed, "synth-dump");
    let pools = Pools {
        positive: POLITICS_POSITIVE,
        negative: POLITICS_NEGATIVE,
        filler: POLITICS_FILLER,
        flat_filler: true,
        long_tail: 0.0,
    };
    for i in 0..rows {
        let u: f64 = rng.gen();
        let target = if u < 0.6 {
            SentimentLabel::Positive
        } else if u < 0.85 {
            SentimentLabel::Negative
        } else {
            SentimentLabel::Neutral
        };
        let row = DumpRow {
            id: format!("{}", 1_100_000_000_000u64 + i as u64),
            created_at: format!(
                "2019-{:02}-{:02}T{:02}:00:00Z",
                rng.gen_range(1..13),
                rng.gen_range(1..29),
                rng.gen_range(0..24)
            ),
            user: "politician",
            text: compose(&mut rng, &pools, target, false),
            label: target,
        };
        let line = serde_json::to_string(&row).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        writeln!(out, "{line}").map_err(|e| Error::io("<synthetic dump>", e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_sentiment140, load_tweet_dump};

    #[test]
    fn sentiment140_rows_load_and_balance() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut buf = Vec::new();
        write_sentiment140(&mut buf, 200, 1).unwrap();
        std::fs::write(&path, &buf).unwrap();
        let (recs, stats) = load_sentiment140(&path, None).unwrap();
        assert_eq!(recs.len(), 200);
        assert_eq!(stats.malformed_rows, 0);
        assert_eq!(stats.per_class_counts, [100, 0, 100]);
    }

    #[test]
    fn dump_loads_with_gold_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.ndjson");
        let mut buf = Vec::new();
        write_tweet_dump(&mut buf, 50, 2).unwrap();
        std::fs::write(&path, &buf).unwrap();
        let (recs, stats) = load_tweet_dump(&path).unwrap();
        assert_eq!(recs.len(), 50);
        assert_eq!(stats.unknown_label, 0);
    }

    #[test]
    fn generation_is_seeded() {
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        write_sentiment140(&mut a, 30, 5).unwrap();
        write_sentiment140(&mut b, 30, 5).unwrap();
        write_sentiment140(&mut c, 30, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
