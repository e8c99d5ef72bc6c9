//! Count-based n-gram language models and perplexity.
//!
//! Sentences are padded with `order - 1` copies of [`BOS`] and one [`EOS`];
//! the padding is context only and never scored, the end marker is scored
//! once per sentence. Training words below the frequency cutoff become
//! [`UNK`], and so do test words outside the retained vocabulary.

mod counts;
mod model;
mod ppl;

pub use counts::{count_ngrams, NgramCounts};
pub use model::{train, Discount, NgramModel, MAX_ORDER, SMOOTHING_MKN};
pub use ppl::{perplexity, PplResult};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub(crate) fn is_reserved(word: &str) -> bool {
    word == BOS || word == EOS || word == UNK
}
