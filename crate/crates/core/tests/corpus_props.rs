use langqual::{split, Corpus, LoadOptions, SplitSpec};
use langqual_testkit::{rng, synth};
use proptest::prelude::*;

fn corpus(name: &str, n: usize) -> Corpus {
    let lines: Vec<String> = (0..n).map(|i| format!("s{i} x")).collect();
    synth::raw_corpus(name, &lines)
}

fn ids(c: &Corpus) -> Vec<usize> {
    c.sentences()
        .iter()
        .map(|s| s.tokens[0].surface[1..].parse().unwrap())
        .collect()
}

proptest! {
    #[test]
    fn loaded_tokens_equal_whitespace_items(seed in any::<u64>(), crlf in any::<bool>()) {
        let mut lines = synth::random_lines(&mut rng(seed), 20, 200);
        lines.insert(0, String::new());
        lines.push("   ".into());
        let text = lines.join(if crlf { "\r\n" } else { "\n" });
        let c = Corpus::raw_from_str(&text, &LoadOptions::default()).unwrap();
        let items: usize = text.lines().map(|l| l.split_whitespace().count()).sum();
        prop_assert_eq!(c.token_count(), items);
        prop_assert_eq!(c.sentences().iter().map(|s| s.len()).sum::<usize>(), items);
    }

    #[test]
    fn split_is_a_deterministic_partition(n in 1usize..300, test_size in 1usize..100, seed in any::<u64>()) {
        let c = corpus("part", n);
        let spec = SplitSpec { test_size, seed };
        let a = split(&c, spec).unwrap();
        let b = split(&c, spec).unwrap();
        prop_assert_eq!(ids(&a.test), ids(&b.test));
        prop_assert_eq!(ids(&a.train), ids(&b.train));
        let mut all: Vec<usize> = ids(&a.test).into_iter().chain(ids(&a.train)).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(a.undersized, n <= test_size);
        prop_assert_eq!(a.test.len(), n.min(test_size));
        let t = ids(&a.test);
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn split_depends_on_corpus_name() {
    let spec = SplitSpec { test_size: 50, seed: 42 };
    let a = split(&corpus("alpha", 500), spec).unwrap();
    let b = split(&corpus("beta", 500), spec).unwrap();
    assert_ne!(ids(&a.test), ids(&b.test));
}
