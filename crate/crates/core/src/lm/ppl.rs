use serde::{Deserialize, Serialize};

use super::NgramModel;
use crate::corpus::Corpus;
use crate::error::Result;

/// Perplexity of a corpus under a model. Log probabilities are base 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PplResult {
    pub perplexity: f64,
    /// Scored tokens: every word plus one end marker per sentence.
    pub token_count: usize,
    pub oov_count: usize,
    pub oov_rate: f64,
    pub log2_prob: f64,
}

impl PplResult {
    /// Cross-entropy in bits per token.
    pub fn cross_entropy(&self) -> f64 {
        -self.log2_prob / self.token_count as f64
    }

    /// `corpus<TAB>ppl<TAB>tokens<TAB>oov_rate`.
    pub fn report_line(&self, corpus: &str) -> String {
        format!(
            "{corpus}\t{:.4}\t{}\t{:.6}",
            self.perplexity, self.token_count, self.oov_rate
        )
    }
}

/// Scores every sentence of `corpus`. Out-of-vocabulary words are scored
/// as `<unk>` and counted in `oov_rate`.
pub fn perplexity(model: &NgramModel, corpus: &Corpus) -> Result<PplResult> {
    corpus.ensure_nonempty()?;
    let history = model.order() - 1;
    let mut ctx: Vec<u32> = Vec::new();
    let mut log2_prob = 0.0;
    let (mut tokens, mut oov) = (0usize, 0usize);
    for words in corpus.word_sequences() {
        ctx.clear();
        ctx.resize(history, model.bos_id());
        let ids = words.iter().map(|w| {
            if !model.contains(w) {
                oov += 1;
            }
            model.id(w)
        });
        for id in ids.collect::<Vec<_>>().into_iter().chain([model.eos_id()]) {
            log2_prob += model.log2_prob_ids(&ctx, id);
            tokens += 1;
            if history > 0 {
                ctx.remove(0);
                ctx.push(id);
            }
        }
    }
    Ok(PplResult {
        perplexity: (-log2_prob / tokens as f64).exp2(),
        token_count: tokens,
        oov_count: oov,
        oov_rate: oov as f64 / tokens as f64,
        log2_prob,
    })
}
