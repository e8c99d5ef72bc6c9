//! Shared workloads for the benchmarks.

use langqual::Corpus;
use langqual_testkit::{rng, synth};

/// A raw corpus of `sentences` Markov lines over `types` words.
pub fn markov_corpus(name: &str, types: usize, sentences: usize, seed: u64) -> Corpus {
    let words = synth::vocab(&format!("{name}_"), types);
    let lines = synth::markov_lines(&mut rng(seed), &words, sentences, 4..=16, 4);
    synth::raw_corpus(name, &lines)
}

/// A parsed corpus of random trees, one per sentence.
pub fn tree_corpus(sentences: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let text: Vec<String> = (0..sentences)
        .map(|i| synth::random_tree(&mut r, 4 + i % 20).to_string())
        .collect();
    Corpus::parsed_from_str(&text.join("\n"), &Default::default()).expect("generated trees parse")
}
