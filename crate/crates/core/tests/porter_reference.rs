//! Porter stemmer against a frozen reference list (2,000 words, generated
//! with an independent implementation of the original 1980 algorithm).

use sentlex::textpipe::porter::stem;

#[test]
fn matches_reference_stems() {
    let text = include_str!("data/porter_reference.tsv");
    let mut mismatches = Vec::new();
    for line in text.lines() {
        let (word, expected) = line.split_once('\t').expect("word<TAB>stem");
        let got = stem(word);
        if got != expected {
            mismatches.push(format!("{word}: got {got}, want {expected}"));
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}
