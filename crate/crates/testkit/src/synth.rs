use langqual::syntax::ParseTree;
use langqual::{Corpus, LoadOptions};
use rand::rngs::StdRng;
use rand::Rng;

/// `n` word types `{prefix}0 .. {prefix}{n-1}`.
pub fn vocab(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Draws sentences whose words follow a Zipf-like law over `words`
/// (rank r has weight 1 / (r + 1)^exponent).
pub fn zipf_lines(
    rng: &mut StdRng,
    words: &[String],
    sentences: usize,
    len: std::ops::RangeInclusive<usize>,
    exponent: f64,
) -> Vec<String> {
    let weights: Vec<f64> = (0..words.len()).map(|r| 1.0 / ((r + 1) as f64).powf(exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut cumulative = Vec::with_capacity(words.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w / total;
        cumulative.push(acc);
    }
    (0..sentences)
        .map(|_| {
            let n = rng.random_range(len.clone());
            (0..n)
                .map(|_| {
                    let x: f64 = rng.random();
                    let i = cumulative.partition_point(|&c| c < x).min(words.len() - 1);
                    words[i].as_str()
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

/// Sentences from a first-order Markov chain over `words`: each word is
/// followed by one of `branching` fixed successors, so the text has strong
/// n-gram structure.
pub fn markov_lines(
    rng: &mut StdRng,
    words: &[String],
    sentences: usize,
    len: std::ops::RangeInclusive<usize>,
    branching: usize,
) -> Vec<String> {
    let n = words.len();
    (0..sentences)
        .map(|_| {
            let len = rng.random_range(len.clone());
            let mut cur = rng.random_range(0..n);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                out.push(words[cur].as_str());
                let k = rng.random_range(0..branching);
                cur = (cur * 7 + k * 13 + 1) % n;
            }
            out.join(" ")
        })
        .collect()
}

pub fn raw_corpus(name: &str, lines: &[String]) -> Corpus {
    let mut text = lines.join("\n");
    text.push('\n');
    let opts = LoadOptions {
        name: Some(name.to_string()),
        ..LoadOptions::default()
    };
    Corpus::raw_from_str(&text, &opts).expect("synthetic corpus is valid")
}

/// Random small corpus: up to `max_tokens` tokens over a `types`-word
/// vocabulary.
pub fn random_lines(rng: &mut StdRng, types: usize, max_tokens: usize) -> Vec<String> {
    let words = vocab("w", types.max(1));
    let mut lines = Vec::new();
    let mut budget = rng.random_range(1..=max_tokens.max(1));
    while budget > 0 {
        let n = rng.random_range(1..=budget.min(12));
        budget -= n;
        let line: Vec<&str> = (0..n).map(|_| words[rng.random_range(0..words.len())].as_str()).collect();
        lines.push(line.join(" "));
    }
    lines
}

const PHRASE_LABELS: [&str; 7] = ["S", "NP", "VP", "PP", "SBAR", "S-TPC-1", "ADJP"];
const TAGS: [&str; 6] = ["DT", "NN", "VBZ", "JJ", "IN", "MD"];

/// Random well-formed tree with exactly `leaves` words, including unary
/// chains and nodes of up to four children.
pub fn random_tree(rng: &mut StdRng, leaves: usize) -> ParseTree {
    fn build(rng: &mut StdRng, leaves: usize, next_word: &mut usize) -> ParseTree {
        if leaves == 1 && rng.random_bool(0.7) {
            let tag = TAGS[rng.random_range(0..TAGS.len())];
            *next_word += 1;
            return ParseTree::pre(tag, format!("w{}", *next_word));
        }
        let label = PHRASE_LABELS[rng.random_range(0..PHRASE_LABELS.len())];
        let k = if leaves == 1 { 1 } else { rng.random_range(1..=leaves.min(4)) };
        let k = if k == 1 && leaves > 1 && rng.random_bool(0.7) { 2 } else { k };
        // split `leaves` into k positive parts
        let mut cuts: Vec<usize> = Vec::new();
        while cuts.len() < k - 1 {
            let c = rng.random_range(1..leaves);
            if !cuts.contains(&c) {
                cuts.push(c);
            }
        }
        cuts.sort_unstable();
        let mut parts = Vec::with_capacity(k);
        let mut prev = 0;
        for c in cuts.into_iter().chain([leaves]) {
            parts.push(c - prev);
            prev = c;
        }
        let children = parts.into_iter().map(|p| build(rng, p, next_word)).collect();
        ParseTree::node(label, children)
    }
    let mut counter = 0;
    loop {
        let t = build(rng, leaves, &mut counter);
        if matches!(t, ParseTree::Node { .. }) {
            return t;
        }
    }
}
