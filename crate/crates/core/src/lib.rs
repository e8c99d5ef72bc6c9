//! Language-quality metrics for text corpora.
//!
//! The crate covers the whole measurement pipeline for a set of
//! pre-annotated corpora: loading and splitting ([`corpus`]), lexical
//! statistics and part-of-speech distributions ([`lexical`]), Yngve and
//! Frazier complexity over bracketed parse trees ([`syntax`]), smoothed
//! n-gram language models and perplexity ([`lm`]), the cross-corpus
//! perplexity matrix ([`compare`]), caption reporting-bias estimates
//! ([`bias`]) and table rendering ([`report`]).

pub mod bias;
pub mod compare;
pub mod corpus;
mod error;
pub mod lexical;
pub mod lm;
pub mod report;
mod rng;
pub mod syntax;



pub use bias::{BiasStats, DenseAnnotation, ObjectAnnotation, StemMode};
pub use compare::{cross_ppl, cross_ppl_bounded, PplMatrix, Protocol, VocabFootnote};
pub use corpus::{
    load_parsed, load_raw, load_tagged, split, Corpus, CorpusMeta, LoadOptions, Sentence,
    SplitResult, SplitSpec, Tier, Token, VisualStyle,
};
pub use error::{Error, Result};
pub use lexical::{AbsConcStats, LexStats, Lexicon, PosClass, PosDistribution, TagMap};
pub use lm::{NgramModel, PplResult};

pub use report::{render, plot_data, Format, MetricsRow, ReportBundle};
pub use syntax::{ComplexityStats, ParseTree};

/// Toolkit version stamped into every serialized report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
