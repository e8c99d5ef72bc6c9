//! Parse trees and syntactic-complexity scoring.

mod complexity;
mod tree;

pub use complexity::{
    complexity_stats, frazier_sentence, frazier_word_scores, is_sentence_label, yngve_sentence,
    yngve_word_depths, ComplexityStats, FRAZIER_SENTENCE_WEIGHT,
};
pub use tree::{parse_tree, ParseTree};
