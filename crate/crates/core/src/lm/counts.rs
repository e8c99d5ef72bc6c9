use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use super::{BOS, EOS};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Raw n-gram counts for every length `1..=order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCounts {
    pub order: usize,
    /// `tables[k - 1]` holds the k-grams.
    pub tables: Vec<BTreeMap<Vec<String>, u64>>,
}

impl NgramCounts {
    pub fn get(&self, ngram: &[&str]) -> u64 {
        let key: Vec<String> = ngram.iter().map(|s| s.to_string()).collect();
        self.tables
            .get(ngram.len().wrapping_sub(1))
            .and_then(|t| t.get(&key))
            .copied()
            .unwrap_or(0)
    }
}

pub(crate) fn check_order(order: usize) -> Result<()> {
    if (1..=super::MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::BadOrder(order))
    }
}

/// Counts, for each predicted position (every word plus the end marker), the
/// k-grams ending there for each k up to `order`.
pub(crate) fn count_sequences<T, I>(seqs: I, order: usize, bos: T, eos: T) -> Vec<HashMap<Vec<T>, u64>>
where
    T: Clone + Eq + Hash,
    I: IntoIterator<Item = Vec<T>>,
{
    let mut tables = vec![HashMap::new(); order];
    let mut padded = Vec::new();
    for seq in seqs {
        padded.clear();
        padded.extend(std::iter::repeat_n(bos.clone(), order - 1));
        padded.extend(seq);
        padded.push(eos.clone());
        for end in order - 1..padded.len() {
            for k in 1..=order {
                let gram = padded[end + 1 - k..=end].to_vec();
                *tables[k - 1].entry(gram).or_insert(0) += 1;
            }
        }
    }
    tables
}

/// Counts all n-grams of the corpus's normalized words up to `order`.
pub fn count_ngrams(corpus: &Corpus, order: usize) -> Result<NgramCounts> {
    corpus.ensure_nonempty()?;
    check_order(order)?;
    let seqs = corpus
        .word_sequences()
        .map(|ws| ws.into_iter().map(|w| w.into_owned()).collect::<Vec<_>>());
    let tables = count_sequences(seqs, order, BOS.to_string(), EOS.to_string())
        .into_iter()
        .map(|t| t.into_iter().collect())
        .collect();
    Ok(NgramCounts { order, tables })
}
