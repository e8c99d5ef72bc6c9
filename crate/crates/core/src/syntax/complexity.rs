use serde::{Deserialize, Serialize};

use super::ParseTree;
use crate::corpus::{Corpus, Tier};
use crate::error::{Error, Result};

/// Weight of a clause (`S`) node on a Frazier chain; other nodes weigh 1.
pub const FRAZIER_SENTENCE_WEIGHT: f64 = 1.5;

/// Corpus-level complexity.
///
/// `mean_yngve` and `mean_frazier` average the per-sentence word means.
/// The `*_sum_mean` fields average per-sentence totals instead, which is
/// the scale published treebank figures are usually quoted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityStats {
    pub mean_yngve: f64,
    pub mean_frazier: f64,
    pub yngve_sum_mean: f64,
    pub frazier_sum_mean: f64,
    pub sentence_count: usize,
}

/// True for `S` and its functionally tagged variants (`S-TPC-1`, `S=2`).
pub fn is_sentence_label(label: &str) -> bool {
    let base = if label.starts_with('-') {
        label
    } else {
        label.split(['-', '=']).next().unwrap_or(label)
    };
    base == "S"
}

/// Yngve depth of each word: the number of right siblings summed over every
/// node on the path from the root down to the word.
pub fn yngve_word_depths(tree: &ParseTree) -> Result<Vec<f64>> {
    tree.validate()?;
    fn walk(node: &ParseTree, depth: usize, out: &mut Vec<f64>) {
        match node {
            ParseTree::Leaf(_) => out.push(depth as f64),
            ParseTree::Node { children, .. } => {
                let n = children.len();
                for (i, child) in children.iter().enumerate() {
                    walk(child, depth + (n - 1 - i), out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, 0, &mut out);
    Ok(out)
}

/// Frazier score of each word: the weight of the chain of constituents the
/// word begins, from its preterminal upward while each node is a leftmost
/// child, up to and including the root.
pub fn frazier_word_scores(tree: &ParseTree) -> Result<Vec<f64>> {
    tree.validate()?;
    fn weight(label: &str) -> f64 {
        if is_sentence_label(label) {
            FRAZIER_SENTENCE_WEIGHT
        } else {
            1.0
        }
    }
    // `chain` is the chain value of `node` itself.
    fn walk(node: &ParseTree, chain: f64, out: &mut Vec<f64>) {
        match node {
            ParseTree::Leaf(_) => out.push(chain),
            ParseTree::Node { children, .. } => {
                if let [ParseTree::Leaf(_)] = children.as_slice() {
                    out.push(chain);
                    return;
                }
                for (i, child) in children.iter().enumerate() {
                    let child_chain = if i == 0 {
                        chain + child.label().map_or(0.0, weight)
                    } else {
                        0.0
                    };
                    walk(child, child_chain, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree, tree.label().map_or(0.0, weight), &mut out);
    Ok(out)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn yngve_sentence(tree: &ParseTree) -> Result<f64> {
    Ok(mean(&yngve_word_depths(tree)?))
}

pub fn frazier_sentence(tree: &ParseTree) -> Result<f64> {
    Ok(mean(&frazier_word_scores(tree)?))
}

/// Mean Yngve and Frazier scores over a parsed corpus, in one pass.
pub fn complexity_stats(corpus: &Corpus) -> Result<ComplexityStats> {
    if corpus.tier() != Tier::Parsed {
        return Err(Error::Tier {
            corpus: corpus.name().to_string(),
            expected: "parsed",
            found: corpus.tier().as_str(),
        });
    }
    let mut acc = [0.0f64; 4];
    let mut n = 0usize;
    for sentence in corpus.sentences() {
        let tree = sentence
            .tree
            .as_ref()
            .ok_or_else(|| Error::MalformedTree("parsed sentence without a tree".into()))?;
        let yngve = yngve_word_depths(tree)?;
        let frazier = frazier_word_scores(tree)?;
        let y_sum: f64 = yngve.iter().sum();
        let f_sum: f64 = frazier.iter().sum();
        let words = yngve.len() as f64;
        acc[0] += y_sum / words;
        acc[1] += f_sum / words;
        acc[2] += y_sum;
        acc[3] += f_sum;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyCorpus(corpus.name().to_string()));
    }
    let n_f = n as f64;
    Ok(ComplexityStats {
        mean_yngve: acc[0] / n_f,
        mean_frazier: acc[1] / n_f,
        yngve_sum_mean: acc[2] / n_f,
        frazier_sum_mean: acc[3] / n_f,
        sentence_count: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_tree;

    fn t(s: &str) -> ParseTree {
        parse_tree(s, 1).unwrap()
    }

    #[test]
    fn single_word_tree() {
        let tree = t("(S (NN dog))");
        assert_eq!(yngve_sentence(&tree).unwrap(), 0.0);
        assert_eq!(frazier_sentence(&tree).unwrap(), 2.5);
    }

    #[test]
    fn dog_runs_tree() {
        let tree = t("(S (NP (DT the) (NN dog)) (VP (VBZ runs)))");
        assert_eq!(yngve_word_depths(&tree).unwrap(), [2.0, 1.0, 0.0]);
        assert_eq!(yngve_sentence(&tree).unwrap(), 1.0);
        assert_eq!(frazier_word_scores(&tree).unwrap(), [3.5, 0.0, 1.0]);
        assert_eq!(frazier_sentence(&tree).unwrap(), 1.5);
    }

    #[test]
    fn right_branching_chain() {
        let tree = t("(S (A a) (S (B b) (S (C c))))");
        assert_eq!(yngve_word_depths(&tree).unwrap(), [1.0, 1.0, 0.0]);
        assert_eq!(yngve_sentence(&tree).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn non_leftmost_preterminals_score_zero() {
        let tree = t("(X (Y (Z (P (Q (R r)))) (NN a)) (NN b))");
        let scores = frazier_word_scores(&tree).unwrap();
        assert_eq!(scores, [6.0, 0.0, 0.0]);
    }

    #[test]
    fn functional_tags_keep_sentence_weight() {
        assert!(is_sentence_label("S"));
        assert!(is_sentence_label("S-TPC-1"));
        assert!(is_sentence_label("S=2"));
        assert!(!is_sentence_label("SBAR"));
        assert!(!is_sentence_label("SQ"));
        assert!(!is_sentence_label("-NONE-"));
        let tree = t("(S-TPC-1 (NN dog))");
        assert_eq!(frazier_sentence(&tree).unwrap(), 2.5);
    }

    #[test]
    fn malformed_is_rejected() {
        assert!(matches!(
            yngve_sentence(&ParseTree::Leaf("x".into())),
            Err(Error::MalformedTree(_))
        ));
    }
}
