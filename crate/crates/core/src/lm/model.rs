use std::collections::HashMap;
use std::fmt::Write as _;

use log::warn;

use super::counts::{check_order, count_sequences};
use super::{is_reserved, BOS, EOS, UNK};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 9;
pub const SMOOTHING_MKN: &str = "interpolated-modified-kneser-ney";
const SMOOTHING_UNIFORM: &str = "uniform";
const FALLBACK_DISCOUNT: f64 = 0.75;

const UNK_ID: u32 = 0;
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;

/// Discount applied to an n-gram count of one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Discount {
    /// Separate discounts for counts of 1, 2 and 3 or more.
    Modified([f64; 3]),
    /// One discount for every count, used when the count-of-counts cannot
    /// support the modified estimate.
    Absolute(f64),
}

impl Discount {
    pub fn for_count(&self, count: u64) -> f64 {
        match *self {
            Discount::Modified(d) => match count {
                0 => 0.0,
                1 => d[0],
                2 => d[1],
                _ => d[2],
            },
            Discount::Absolute(d) if count > 0 => d,
            Discount::Absolute(_) => 0.0,
        }
    }

    /// Estimates discounts from count-of-counts `n[0..4]` (counts 1 to 4).
    pub fn estimate(n: [u64; 4]) -> Option<Discount> {
        if n.contains(&0) {
            return None;
        }
        let [n1, n2, n3, n4] = n.map(|x| x as f64);
        let y = n1 / (n1 + 2.0 * n2);
        let d = [
            1.0 - 2.0 * y * n2 / n1,
            2.0 - 3.0 * y * n3 / n2,
            3.0 - 4.0 * y * n4 / n3,
        ];
        let in_range = d
            .iter()
            .enumerate()
            .all(|(i, &x)| x > 0.0 && x <= (i + 1) as f64);
        in_range.then_some(Discount::Modified(d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    log2prob: f64,
    log2backoff: Option<f64>,
}

/// (line number, words, log2 prob, log2 backoff) as read from a model file.
type ModelLine<'a> = (usize, Vec<&'a str>, f64, Option<f64>);

/// Smoothed n-gram model in backoff form.
///
/// Each stored n-gram carries its fully interpolated probability; each
/// observed context carries the weight given to the next lower order.
/// Probabilities of unseen n-grams are obtained by backing off.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: usize,
    cutoff: u64,
    smoothing: String,
    words: Vec<String>,
    index: HashMap<String, u32>,
    tables: Vec<HashMap<Box<[u32]>, Entry>>,
}

impl NgramModel {
    fn with_vocab(order: usize, cutoff: u64, smoothing: &str, vocab: Vec<String>) -> NgramModel {
        let mut words: Vec<String> = vec![UNK.into(), BOS.into(), EOS.into()];
        words.extend(vocab);
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u32))
            .collect();
        NgramModel {
            order,
            cutoff,
            smoothing: smoothing.to_string(),
            words,
            index,
            tables: vec![HashMap::new(); order],
        }
    }

    /// Unigram model giving every outcome (the words, `<unk>` and `</s>`)
    /// the same probability.
    pub fn uniform<I, S>(vocab: I) -> NgramModel
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab: Vec<String> = vocab
            .into_iter()
            .map(Into::into)
            .filter(|w| !is_reserved(w))
            .collect();
        vocab.sort();
        vocab.dedup();
        let mut model = NgramModel::with_vocab(1, 0, SMOOTHING_UNIFORM, vocab);
        let outcomes: Vec<u32> = model.outcome_ids().collect();
        let lp = -(outcomes.len() as f64).log2();
        for id in outcomes {
            model.tables[0].insert(
                Box::new([id]),
                Entry {
                    log2prob: lp,
                    log2backoff: None,
                },
            );
        }
        model
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn smoothing(&self) -> &str {
        &self.smoothing
    }

    /// Retained word types, excluding the reserved tokens.
    pub fn vocab(&self) -> &[String] {
        &self.words[3..]
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len() - 3
    }

    /// Number of predictable outcomes: vocabulary plus `<unk>` and `</s>`.
    pub fn outcome_count(&self) -> usize {
        self.words.len() - 1
    }

    pub fn contains(&self, word: &str) -> bool {
        !is_reserved(word) && self.index.contains_key(word)
    }

    pub(crate) fn id(&self, word: &str) -> u32 {
        if is_reserved(word) {
            return UNK_ID;
        }
        self.index.get(word).copied().unwrap_or(UNK_ID)
    }

    pub(crate) fn outcome_ids(&self) -> impl Iterator<Item = u32> {
        (0..self.words.len() as u32).filter(|&i| i != BOS_ID)
    }

    pub(crate) fn bos_id(&self) -> u32 {
        BOS_ID
    }

    pub(crate) fn eos_id(&self) -> u32 {
        EOS_ID
    }

    pub(crate) fn word_of(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    /// log2 p(word | context) over word ids; the context may be any length
    /// and only its last `order - 1` ids are used.
    pub(crate) fn log2_prob_ids(&self, context: &[u32], word: u32) -> f64 {
        let max_ctx = context.len().min(self.order - 1);
        let ctx = &context[context.len() - max_ctx..];
        let mut key = [0u32; MAX_ORDER];
        let mut backoff = 0.0;
        for len in (0..=max_ctx).rev() {
            let hist = &ctx[max_ctx - len..];
            key[..len].copy_from_slice(hist);
            key[len] = word;
            if let Some(e) = self.tables[len].get(&key[..=len]) {
                return backoff + e.log2prob;
            }
            if len > 0 {
                if let Some(b) = self.tables[len - 1].get(hist).and_then(|e| e.log2backoff) {
                    backoff += b;
                }
            }
        }
        f64::NEG_INFINITY
    }

    /// log2 p(word | context) for surface strings. `<s>` in the context
    /// means sentence start; unknown words map to `<unk>`.
    pub fn log2_prob(&self, context: &[&str], word: &str) -> f64 {
        let ids: Vec<u32> = context
            .iter()
            .map(|w| if *w == BOS { BOS_ID } else { self.id(w) })
            .collect();
        let word = match word {
            EOS => EOS_ID,
            BOS => BOS_ID,
            w => self.id(w),
        };
        self.log2_prob_ids(&ids, word)
    }

    /// Number of stored n-grams of length `k`.
    pub fn ngram_count(&self, k: usize) -> usize {
        self.tables
            .get(k.wrapping_sub(1))
            .map_or(0, |t| t.values().filter(|e| e.log2prob.is_finite()).count())
    }

    /// Serializes to the sorted plain-text model format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "order={}", self.order).unwrap();
        writeln!(out, "cutoff={}", self.cutoff).unwrap();
        writeln!(out, "smoothing={}", self.smoothing).unwrap();
        writeln!(out, "vocab_size={}", self.vocab_size()).unwrap();
        for (i, table) in self.tables.iter().enumerate() {
            writeln!(out, "\n\\{}-grams:", i + 1).unwrap();
            let mut lines: Vec<(String, &Entry)> = table
                .iter()
                .map(|(k, e)| {
                    let gram: Vec<&str> = k.iter().map(|&id| self.word_of(id)).collect();
                    (gram.join(" "), e)
                })
                .collect();
            lines.sort_by(|a, b| a.0.cmp(&b.0));
            for (gram, e) in lines {
                match e.log2backoff {
                    Some(b) => writeln!(out, "{}\t{}\t{}", e.log2prob, gram, b),
                    None => writeln!(out, "{}\t{}", e.log2prob, gram),
                }
                .unwrap();
            }
        }
        out.push_str("\n\\end\\\n");
        out
    }

    /// Parses the format written by [`NgramModel::to_text`].
    pub fn from_text(text: &str) -> Result<NgramModel> {
        let err = |line: usize, message: String| Error::ModelFormat { line, message };
        let mut header: HashMap<&str, &str> = HashMap::new();
        let mut sections: Vec<Vec<ModelLine>> = Vec::new();
        let mut ended = false;
        for (i, line) in text.lines().enumerate() {
            let no = i + 1;
            if line.is_empty() {
                continue;
            }
            if ended {
                return Err(err(no, "content after \\end\\".into()));
            }
            if line == "\\end\\" {
                ended = true;
                continue;
            }
            if let Some(k) = line.strip_prefix('\\').and_then(|l| l.strip_suffix("-grams:")) {
                let k: usize = k.parse().map_err(|_| err(no, format!("bad section `{line}`")))?;
                if k != sections.len() + 1 {
                    return Err(err(no, format!("section {k} out of order")));
                }
                sections.push(Vec::new());
                continue;
            }
            let expected_len = sections.len();
            let Some(section) = sections.last_mut() else {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(no, format!("bad header line `{line}`")))?;
                header.insert(key, value);
                continue;
            };
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(err(no, "expected 2 or 3 tab-separated fields".into()));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| err(no, format!("bad number `{s}`")));
            let prob = num(fields[0])?;
            let backoff = fields.get(2).map(|s| num(s)).transpose()?;
            let gram: Vec<&str> = fields[1].split(' ').collect();
            if gram.len() != expected_len {
                return Err(err(no, format!("expected a {expected_len}-gram")));
            }
            section.push((no, gram, prob, backoff));
        }
        if !ended {
            return Err(err(text.lines().count(), "missing \\end\\".into()));
        }
        let field = |key: &str| {
            header
                .get(key)
                .ok_or_else(|| err(0, format!("missing header `{key}`")))
        };
        let order: usize = field("order")?
            .parse()
            .map_err(|_| err(0, "bad order".into()))?;
        check_order(order)?;
        let cutoff: u64 = field("cutoff")?
            .parse()
            .map_err(|_| err(0, "bad cutoff".into()))?;
        let smoothing = field("smoothing")?.to_string();
        let vocab_size: usize = field("vocab_size")?
            .parse()
            .map_err(|_| err(0, "bad vocab_size".into()))?;
        if sections.len() != order {
            return Err(err(0, format!("{} sections for order {order}", sections.len())));
        }
        let mut vocab: Vec<String> = sections[0]
            .iter()
            .map(|(_, g, _, _)| g[0])
            .filter(|w| !is_reserved(w))
            .map(str::to_string)
            .collect();
        vocab.sort();
        vocab.dedup();
        if vocab.len() != vocab_size {
            return Err(err(0, format!("vocab_size={vocab_size} but {} unigrams", vocab.len())));
        }
        let mut model = NgramModel::with_vocab(order, cutoff, &smoothing, vocab);
        for (k, section) in sections.into_iter().enumerate() {
            for (no, gram, log2prob, log2backoff) in section {
                let key = gram
                    .iter()
                    .map(|w| {
                        model
                            .index
                            .get(*w)
                            .copied()
                            .ok_or_else(|| err(no, format!("word `{w}` missing from 1-grams")))
                    })
                    .collect::<Result<Box<[u32]>>>()?;
                model.tables[k].insert(key, Entry { log2prob, log2backoff });
            }
        }
        Ok(model)
    }
}

#[derive(Default, Clone, Copy)]
struct ContextStats {
    total: u64,
    buckets: [u64; 3],
}

impl ContextStats {
    fn add(&mut self, count: u64) {
        self.total += count;
        self.buckets[(count.min(3) - 1) as usize] += 1;
    }

    fn gamma(&self, d: &Discount) -> f64 {
        let mass: f64 = (1..=3)
            .map(|c| d.for_count(c) * self.buckets[c as usize - 1] as f64)
            .sum();
        mass / self.total as f64
    }
}

/// Trains an interpolated modified Kneser-Ney model.
///
/// Word types seen fewer than `cutoff` times are mapped to `<unk>` first.
/// The highest order, and lower-order n-grams starting with `<s>`, use raw
/// counts; other lower orders use continuation counts (number of distinct
/// left extensions). Orders whose count-of-counts cannot support the
/// modified estimate fall back to an absolute discount of 0.75.
pub fn train(corpus: &Corpus, order: usize, cutoff: u64) -> Result<NgramModel> {
    check_order(order)?;
    corpus.ensure_nonempty()?;

    let mut freq: HashMap<String, u64> = HashMap::new();
    for words in corpus.word_sequences() {
        for w in words {
            *freq.entry(w.into_owned()).or_insert(0) += 1;
        }
    }
    if freq.is_empty() {
        return Err(Error::DegenerateCounts(corpus.name().to_string()));
    }
    let mut vocab: Vec<String> = freq
        .into_iter()
        .filter(|(w, c)| *c >= cutoff && !is_reserved(w))
        .map(|(w, _)| w)
        .collect();
    vocab.sort();
    let mut model = NgramModel::with_vocab(order, cutoff, SMOOTHING_MKN, vocab);

    let seqs: Vec<Vec<u32>> = corpus
        .word_sequences()
        .map(|ws| ws.iter().map(|w| model.id(w)).collect())
        .collect();
    let raw = count_sequences(seqs, order, BOS_ID, EOS_ID);

    let mut adjusted: Vec<HashMap<Vec<u32>, u64>> = vec![HashMap::new(); order];
    adjusted[order - 1] = raw[order - 1].clone();
    for k in 1..order {
        let mut cont: HashMap<Vec<u32>, u64> = HashMap::new();
        for gram in raw[k].keys() {
            *cont.entry(gram[1..].to_vec()).or_insert(0) += 1;
        }
        for (gram, &c) in &raw[k - 1] {
            if gram[0] == BOS_ID {
                cont.insert(gram.clone(), c);
            }
        }
        adjusted[k - 1] = cont;
    }

    let uniform = 1.0 / model.outcome_count() as f64;
    for k in 1..=order {
        let counts = &adjusted[k - 1];
        let mut coc = [0u64; 4];
        for &c in counts.values() {
            if (1..=4).contains(&c) {
                coc[c as usize - 1] += 1;
            }
        }
        let discount = Discount::estimate(coc).unwrap_or_else(|| {
            warn!(
                "corpus `{}`: count-of-counts {coc:?} at order {k} cannot support modified \
                 discounts; using {FALLBACK_DISCOUNT}",
                corpus.name()
            );
            Discount::Absolute(FALLBACK_DISCOUNT)
        });

        let mut contexts: HashMap<&[u32], ContextStats> = HashMap::new();
        for (gram, &c) in counts {
            contexts.entry(&gram[..k - 1]).or_default().add(c);
        }

        let mut table: HashMap<Box<[u32]>, Entry> = HashMap::with_capacity(counts.len());
        for (gram, &c) in counts {
            let stats = &contexts[&gram[..k - 1]];
            let word = gram[k - 1];
            let lower = if k == 1 {
                uniform
            } else {
                model.log2_prob_ids(&gram[1..k - 1], word).exp2()
            };
            let p = (c as f64 - discount.for_count(c)).max(0.0) / stats.total as f64
                + stats.gamma(&discount) * lower;
            table.insert(
                gram.clone().into_boxed_slice(),
                Entry {
                    log2prob: p.log2(),
                    log2backoff: None,
                },
            );
        }
        if k == 1 {
            let gamma = contexts.get(&[][..]).map_or(1.0, |s| s.gamma(&discount));
            for id in model.outcome_ids().collect::<Vec<_>>() {
                table.entry(Box::new([id])).or_insert(Entry {
                    log2prob: (gamma * uniform).log2(),
                    log2backoff: None,
                });
            }
        } else {
            let lower = &mut model.tables[k - 2];
            for (ctx, stats) in &contexts {
                let b = stats.gamma(&discount).log2();
                lower
                    .entry(ctx.to_vec().into_boxed_slice())
                    .or_insert(Entry {
                        log2prob: f64::NEG_INFINITY,
                        log2backoff: None,
                    })
                    .log2backoff = Some(b);
            }
        }
        model.tables[k - 1] = table;
    }
    Ok(model)
}
