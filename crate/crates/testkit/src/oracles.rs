use std::collections::{BTreeMap, HashMap, HashSet};

use langqual::syntax::ParseTree;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

/// Counts every substring of every padded sentence whose length is at most
/// `order` and whose last token is not the start marker.
pub fn brute_force_counts(sentences: &[Vec<String>], order: usize) -> Vec<BTreeMap<Vec<String>, u64>> {
    let mut tables = vec![BTreeMap::new(); order];
    for s in sentences {
        let mut padded: Vec<String> = vec![BOS.to_string(); order - 1];
        padded.extend(s.iter().cloned());
        padded.push(EOS.to_string());
        for start in 0..padded.len() {
            for end in start + 1..=padded.len() {
                let len = end - start;
                if len > order || padded[end - 1] == BOS {
                    continue;
                }
                *tables[len - 1].entry(padded[start..end].to_vec()).or_insert(0) += 1;
            }
        }
    }
    tables
}

/// Interpolated modified Kneser-Ney evaluated straight from its recursive
/// definition over string n-grams.
pub struct NaiveKneserNey {
    pub order: usize,
    pub outcomes: Vec<String>,
    vocab: HashSet<String>,
    adjusted: Vec<HashMap<Vec<String>, u64>>,
    discounts: Vec<[f64; 3]>,
}

impl NaiveKneserNey {
    pub fn train(sentences: &[Vec<String>], order: usize, cutoff: u64) -> NaiveKneserNey {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for s in sentences {
            for w in s {
                *freq.entry(w).or_default() += 1;
            }
        }
        let vocab: HashSet<String> = freq
            .iter()
            .filter(|(w, c)| **c >= cutoff && ![BOS, EOS, UNK].contains(*w))
            .map(|(w, _)| w.to_string())
            .collect();
        let mapped: Vec<Vec<String>> = sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|w| if vocab.contains(w) { w.clone() } else { UNK.to_string() })
                    .collect()
            })
            .collect();
        let raw = brute_force_counts(&mapped, order);

        let mut adjusted = Vec::with_capacity(order);
        for k in 1..=order {
            let mut table = HashMap::new();
            for (gram, &c) in &raw[k - 1] {
                let value = if k == order || gram[0] == BOS {
                    c
                } else {
                    raw[k].keys().filter(|longer| longer[1..] == gram[..]).count() as u64
                };
                table.insert(gram.clone(), value);
            }
            adjusted.push(table);
        }

        let discounts = adjusted
            .iter()
            .map(|table| {
                let n = |c: u64| table.values().filter(|&&v| v == c).count() as f64;
                let (n1, n2, n3, n4) = (n(1), n(2), n(3), n(4));
                let fallback = [0.75; 3];
                if n1 == 0.0 || n2 == 0.0 || n3 == 0.0 || n4 == 0.0 {
                    return fallback;
                }
                let y = n1 / (n1 + 2.0 * n2);
                let d = [1.0 - 2.0 * y * n2 / n1, 2.0 - 3.0 * y * n3 / n2, 3.0 - 4.0 * y * n4 / n3];
                if d[0] > 0.0 && d[0] <= 1.0 && d[1] > 0.0 && d[1] <= 2.0 && d[2] > 0.0 && d[2] <= 3.0 {
                    d
                } else {
                    fallback
                }
            })
            .collect();

        let mut outcomes: Vec<String> = vocab.iter().cloned().collect();
        outcomes.push(UNK.to_string());
        outcomes.push(EOS.to_string());
        outcomes.sort();
        NaiveKneserNey {
            order,
            outcomes,
            vocab,
            adjusted,
            discounts,
        }
    }

    pub fn map_word(&self, w: &str) -> String {
        if w == BOS || w == EOS || self.vocab.contains(w) {
            w.to_string()
        } else {
            UNK.to_string()
        }
    }

    fn discount(&self, k: usize, c: u64) -> f64 {
        match c {
            0 => 0.0,
            1 => self.discounts[k - 1][0],
            2 => self.discounts[k - 1][1],
            _ => self.discounts[k - 1][2],
        }
    }

    fn prob_at(&self, k: usize, hist: &[String], w: &str) -> f64 {
        if k == 0 {
            return if w == BOS { 0.0 } else { 1.0 / self.outcomes.len() as f64 };
        }
        let lower = self.prob_at(k - 1, hist.get(1..).unwrap_or(&[]), w);
        let table = &self.adjusted[k - 1];
        let mut total = 0u64;
        let mut mass = 0.0;
        let mut own = 0u64;
        for (gram, &c) in table {
            if gram[..k - 1] == hist[..] {
                total += c;
                mass += self.discount(k, c);
                if gram[k - 1] == w {
                    own = c;
                }
            }
        }
        if total == 0 {
            return lower;
        }
        let t = total as f64;
        (own as f64 - self.discount(k, own)).max(0.0) / t + mass / t * lower
    }

    /// p(w | context) with surface words; only the last `order - 1`
    /// context words are used.
    pub fn prob(&self, context: &[&str], w: &str) -> f64 {
        let mapped: Vec<String> = context.iter().map(|c| self.map_word(c)).collect();
        let k = mapped.len().min(self.order - 1);
        let hist = &mapped[mapped.len() - k..];
        self.prob_at(k + 1, hist, &self.map_word(w))
    }

    /// Perplexity of `sentences`, scoring one end marker per sentence.
    pub fn perplexity(&self, sentences: &[Vec<String>]) -> f64 {
        let mut log2 = 0.0;
        let mut n = 0usize;
        for s in sentences {
            let mut ctx: Vec<&str> = vec![BOS; self.order - 1];
            for w in s.iter().map(String::as_str).chain([EOS]) {
                log2 += self.prob(&ctx, w).log2();
                n += 1;
                ctx.push(w);
            }
        }
        (-log2 / n as f64).exp2()
    }
}

struct Arena<'a> {
    label: Vec<Option<&'a str>>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    leaves: Vec<usize>,
}

fn flatten(tree: &ParseTree) -> Arena<'_> {
    let mut a = Arena {
        label: Vec::new(),
        parent: Vec::new(),
        children: Vec::new(),
        leaves: Vec::new(),
    };
    fn go<'a>(t: &'a ParseTree, parent: Option<usize>, a: &mut Arena<'a>) -> usize {
        let id = a.label.len();
        a.label.push(t.label());
        a.parent.push(parent);
        a.children.push(Vec::new());
        if let ParseTree::Leaf(_) = t {
            a.leaves.push(id);
        }
        for c in t.children() {
            let cid = go(c, Some(id), a);
            a.children[id].push(cid);
        }
        id
    }
    go(tree, None, &mut a);
    a
}

/// Per-word Yngve depth by walking from each leaf up to the root and
/// counting right siblings at every step.
pub fn yngve_oracle(tree: &ParseTree) -> Vec<f64> {
    let a = flatten(tree);
    a.leaves
        .iter()
        .map(|&leaf| {
            let mut total = 0usize;
            let mut node = leaf;
            while let Some(p) = a.parent[node] {
                let sibs = &a.children[p];
                let pos = sibs.iter().position(|&s| s == node).unwrap();
                total += sibs.len() - 1 - pos;
                node = p;
            }
            total as f64
        })
        .collect()
}

fn is_s(label: &str) -> bool {
    label == "S" || label.starts_with("S-") || label.starts_with("S=")
}

/// Per-word Frazier score by climbing from the preterminal while the
/// current node is a leftmost child, counting the root if reached.
pub fn frazier_oracle(tree: &ParseTree) -> Vec<f64> {
    let a = flatten(tree);
    let weight = |n: usize| if a.label[n].is_some_and(is_s) { 1.5 } else { 1.0 };
    a.leaves
        .iter()
        .map(|&leaf| {
            let mut score = 0.0;
            let mut node = a.parent[leaf].unwrap();
            loop {
                match a.parent[node] {
                    None => {
                        score += weight(node);
                        break;
                    }
                    Some(p) if a.children[p][0] == node => {
                        score += weight(node);
                        node = p;
                    }
                    Some(_) => break,
                }
            }
            score
        })
        .collect()
}
