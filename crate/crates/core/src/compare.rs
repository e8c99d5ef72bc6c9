//! Pairwise cross-corpus perplexity.
//!
//! Every corpus is split once into a held-out test side and a training
//! side. A model trained on the training side of column `j` scores the test
//! side of row `i`, so the diagonal is also a held-out evaluation.

use std::collections::HashSet;
use std::fmt::Write as _;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{split, Corpus, SplitResult, SplitSpec};
use crate::error::{Error, Result};
use crate::lm::{perplexity, train, SMOOTHING_MKN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Protocol {
    pub order: usize,
    pub cutoff: u64,
    pub test_size: usize,
    pub seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            order: 5,
            cutoff: 3,
            test_size: 20_000,
            seed: 42,
        }
    }
}

impl Protocol {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_size: self.test_size,
            seed: self.seed,
        }
    }
}

/// Retained model vocabulary per training column; `None` where the column
/// had no training sentences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VocabFootnote {
    pub names: Vec<String>,
    pub sizes: Vec<Option<usize>>,
}

/// Rows are test sets, columns are training sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PplMatrix {
    pub names: Vec<String>,
    /// `cells[test][train]`; `None` marks a column without training data.
    pub cells: Vec<Vec<Option<f64>>>,
    pub protocol: Protocol,
    pub smoothing: String,
    pub vocab: VocabFootnote,
}

impl PplMatrix {
    pub fn get(&self, test: &str, train: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == test)?;
        let j = self.names.iter().position(|n| n == train)?;
        self.cells[i][j]
    }

    pub fn protocol_comment(&self) -> String {
        let p = &self.protocol;
        format!(
            "# order={} cutoff={} test_size={} seed={}\n# rows=test columns=train smoothing={}\n",
            p.order, p.cutoff, p.test_size, p.seed, self.smoothing
        )
    }

    /// CSV with the protocol in leading comments and a final `#vocab` row.
    pub fn to_csv(&self) -> String {
        let mut out = self.protocol_comment();
        out.push_str("test\\train");
        for n in &self.names {
            write!(out, ",{n}").unwrap();
        }
        out.push('\n');
        for (name, row) in self.names.iter().zip(&self.cells) {
            out.push_str(name);
            for cell in row {
                match cell {
                    Some(v) => write!(out, ",{v:.1}").unwrap(),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out.push_str("#vocab");
        for size in &self.vocab.sizes {
            match size {
                Some(v) => write!(out, ",{v}").unwrap(),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
        out
    }
}

/// Builds the cross-perplexity matrix. At most `max_resident` trained
/// models are held in memory at once (`None` means all).
pub fn cross_ppl_bounded(
    corpora: &[Corpus],
    protocol: &Protocol,
    max_resident: Option<usize>,
) -> Result<(PplMatrix, VocabFootnote)> {
    if corpora.len() < 2 {
        return Err(Error::TooFewCorpora(corpora.len()));
    }
    let mut seen = HashSet::new();
    for c in corpora {
        if !seen.insert(c.name()) {
            return Err(Error::DuplicateName(c.name().to_string()));
        }
    }
    let spec = protocol.split_spec();
    let splits: Vec<SplitResult> = corpora
        .par_iter()
        .map(|c| split(c, spec).map_err(|e| e.in_corpus(c.name())))
        .collect::<Result<_>>()?;

    let n = corpora.len();
    let mut cells = vec![vec![None; n]; n];
    let mut sizes = vec![None; n];
    let columns: Vec<usize> = (0..n).collect();
    for chunk in columns.chunks(max_resident.unwrap_or(n).max(1)) {
        let models = chunk
            .par_iter()
            .map(|&j| {
                let s = &splits[j];
                if s.train.is_empty() {
                    warn!("corpus `{}` has no training sentences; column is NA", s.train.name());
                    return Ok(None);
                }
                train(&s.train, protocol.order, protocol.cutoff)
                    .map(Some)
                    .map_err(|e| e.in_corpus(s.train.name()))
            })
            .collect::<Result<Vec<_>>>()?;
        let scored: Vec<(usize, usize, f64)> = chunk
            .iter()
            .zip(&models)
            .filter_map(|(&j, m)| m.as_ref().map(|m| (j, m)))
            .flat_map(|(j, m)| (0..n).map(move |i| (i, j, m)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(i, j, m)| {
                perplexity(m, &splits[i].test)
                    .map(|r| (i, j, r.perplexity))
                    .map_err(|e| e.in_corpus(splits[i].test.name()))
            })
            .collect::<Result<_>>()?;
        for (i, j, v) in scored {
            cells[i][j] = Some(v);
        }
        for (&j, m) in chunk.iter().zip(&models) {
            sizes[j] = m.as_ref().map(|m| m.vocab_size());
        }
    }
    let names: Vec<String> = corpora.iter().map(|c| c.name().to_string()).collect();
    let vocab = VocabFootnote {
        names: names.clone(),
        sizes,
    };
    let matrix = PplMatrix {
        names,
        cells,
        protocol: *protocol,
        smoothing: SMOOTHING_MKN.to_string(),
        vocab: vocab.clone(),
    };
    Ok((matrix, vocab))
}

/// Builds the cross-perplexity matrix with every model resident.
pub fn cross_ppl(corpora: &[Corpus], protocol: &Protocol) -> Result<(PplMatrix, VocabFootnote)> {
    cross_ppl_bounded(corpora, protocol, None)
}
