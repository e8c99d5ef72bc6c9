//! Vocabulary, sentence length, abstract/concrete type counts and the
//! simplified part-of-speech distribution.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Tier};
use crate::error::{Error, Result};

const DEFAULT_ABSTRACT: &str = include_str!("../data/abstract_terms.txt");
const DEFAULT_FUNCTION: &str = include_str!("../data/function_words.txt");
const DEFAULT_TAG_MAP: &str = include_str!("../data/tag_map.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexStats {
    pub vocab_size: usize,
    pub mean_sentence_length: f64,
    pub token_count: usize,
    pub sentence_count: usize,
}

/// Distinct-type counts of abstract and concrete words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsConcStats {
    pub n_concrete: usize,
    pub n_abstract: usize,
    /// Fraction in `[0, 1]`; zero when both counts are zero.
    pub pct_abstract: f64,
}

impl AbsConcStats {
    pub fn from_counts(n_concrete: usize, n_abstract: usize) -> AbsConcStats {
        let total = n_concrete + n_abstract;
        let pct_abstract = if total == 0 {
            0.0
        } else {
            n_abstract as f64 / total as f64
        };
        AbsConcStats {
            n_concrete,
            n_abstract,
            pct_abstract,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub abstract_terms: BTreeSet<String>,
    pub function_words: BTreeSet<String>,
}

fn read_terms(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

impl Lexicon {
    /// Builds a lexicon from list contents. A term on both lists is kept
    /// only as a function word.
    pub fn from_lists(abstract_text: &str, function_text: &str) -> Result<Lexicon> {
        let mut abstract_terms = read_terms(abstract_text);
        let function_words = read_terms(function_text);
        let both: Vec<_> = abstract_terms.intersection(&function_words).cloned().collect();
        if !both.is_empty() {
            warn!(
                "terms on both lexicon lists kept as function words: {}",
                both.join(", ")
            );
            for t in &both {
                abstract_terms.remove(t);
            }
        }
        if abstract_terms.is_empty() {
            return Err(Error::EmptyLexicon);
        }
        Ok(Lexicon {
            abstract_terms,
            function_words,
        })
    }

    pub fn load(abstract_path: impl AsRef<Path>, function_path: impl AsRef<Path>) -> Result<Lexicon> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| Error::io(p, e));
        Lexicon::from_lists(&read(abstract_path.as_ref())?, &read(function_path.as_ref())?)
    }

    /// The bundled English lists.
    pub fn bundled() -> Lexicon {
        Lexicon::from_lists(DEFAULT_ABSTRACT, DEFAULT_FUNCTION).expect("bundled lexicon is valid")
    }
}

/// Number of distinct types and mean tokens per sentence.
pub fn lex_stats(corpus: &Corpus) -> Result<LexStats> {
    corpus.ensure_nonempty()?;
    let mut types = HashSet::new();
    let mut token_count = 0;
    for words in corpus.word_sequences() {
        token_count += words.len();
        types.extend(words.into_iter().map(|w| w.into_owned()));
    }
    let sentence_count = corpus.len();
    Ok(LexStats {
        vocab_size: types.len(),
        mean_sentence_length: token_count as f64 / sentence_count as f64,
        token_count,
        sentence_count,
    })
}

/// Classifies the corpus's distinct lowercased types: abstract terms count
/// as abstract, function words are skipped, everything else is concrete.
pub fn abs_conc(corpus: &Corpus, lexicon: &Lexicon) -> Result<AbsConcStats> {
    corpus.ensure_nonempty()?;
    let types: HashSet<String> = corpus
        .sentences()
        .iter()
        .flat_map(|s| &s.tokens)
        .map(|t| t.surface.to_lowercase())
        .collect();
    let (mut n_abstract, mut n_concrete) = (0, 0);
    for t in &types {
        if lexicon.function_words.contains(t) {
            continue;
        }
        if lexicon.abstract_terms.contains(t) {
            n_abstract += 1;
        } else {
            n_concrete += 1;
        }
    }
    Ok(AbsConcStats::from_counts(n_concrete, n_abstract))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PosClass {
    N,
    V,
    J,
    O,
}

impl PosClass {
    pub const ALL: [PosClass; 4] = [PosClass::N, PosClass::V, PosClass::J, PosClass::O];

    pub fn as_str(self) -> &'static str {
        match self {
            PosClass::N => "N",
            PosClass::V => "V",
            PosClass::J => "J",
            PosClass::O => "O",
        }
    }

    pub fn parse(s: &str) -> Option<PosClass> {
        match s.trim() {
            "N" => Some(PosClass::N),
            "V" => Some(PosClass::V),
            "J" => Some(PosClass::J),
            "O" => Some(PosClass::O),
            _ => None,
        }
    }
}

/// Tag-prefix rules for the N/V/J/O simplification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagMap {
    rules: Vec<(String, PosClass)>,
}

impl Default for TagMap {
    fn default() -> Self {
        TagMap::parse(DEFAULT_TAG_MAP).expect("bundled tag map is valid")
    }
}

impl TagMap {
    /// Reads `prefix<TAB>class` lines; `#` lines are comments.
    pub fn parse(text: &str) -> Result<TagMap> {
        let mut map = TagMap { rules: Vec::new() };
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed = line
                .split_once(char::is_whitespace)
                .and_then(|(p, c)| Some((p, PosClass::parse(c)?)));
            let Some((prefix, class)) = parsed else {
                return Err(Error::Format {
                    line: i + 1,
                    message: format!("expected `prefix<TAB>N|V|J|O`, got `{line}`"),
                });
            };
            map.set(prefix, class);
        }
        Ok(map)
    }

    /// Adds or replaces the rule for `prefix`.
    pub fn set(&mut self, prefix: &str, class: PosClass) {
        match self.rules.iter_mut().find(|(p, _)| p == prefix) {
            Some(rule) => rule.1 = class,
            None => self.rules.push((prefix.to_string(), class)),
        }
    }

    pub fn rules(&self) -> &[(String, PosClass)] {
        &self.rules
    }

    pub fn classify(&self, tag: &str) -> PosClass {
        self.rules
            .iter()
            .filter(|(p, _)| tag.starts_with(p.as_str()))
            .max_by_key(|(p, _)| p.len())
            .map_or(PosClass::O, |(_, c)| *c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosDistribution {
    #[serde(rename = "N")]
    pub n: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "O")]
    pub o: f64,
    pub tagged_token_count: usize,
}

impl PosDistribution {
    pub fn get(&self, class: PosClass) -> f64 {
        match class {
            PosClass::N => self.n,
            PosClass::V => self.v,
            PosClass::J => self.j,
            PosClass::O => self.o,
        }
    }

    pub fn proportions(&self) -> [f64; 4] {
        [self.n, self.v, self.j, self.o]
    }
}

/// Proportions of N/V/J/O over all tagged tokens.
pub fn pos_distribution(corpus: &Corpus, tags: &TagMap) -> Result<PosDistribution> {
    if corpus.tier() == Tier::Raw {
        return Err(Error::Tier {
            corpus: corpus.name().to_string(),
            expected: "tagged or parsed",
            found: "raw",
        });
    }
    corpus.ensure_nonempty()?;
    let mut counts = [0usize; 4];
    for t in corpus.sentences().iter().flat_map(|s| &s.tokens) {
        let class = t.pos.as_deref().map_or(PosClass::O, |p| tags.classify(p));
        counts[class as usize] += 1;
    }
    let total: usize = counts.iter().sum();
    let p = |c: usize| c as f64 / total as f64;
    Ok(PosDistribution {
        n: p(counts[0]),
        v: p(counts[1]),
        j: p(counts[2]),
        o: p(counts[3]),
        tagged_token_count: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LoadOptions;

    fn raw(text: &str) -> Corpus {
        Corpus::raw_from_str(text, &LoadOptions::default()).unwrap()
    }

    fn tagged(text: &str) -> Corpus {
        Corpus::tagged_from_str(text, &LoadOptions::default()).unwrap()
    }

    #[test]
    fn lex_stats_by_hand() {
        let s = lex_stats(&raw("a b a\nb c\n")).unwrap();
        assert_eq!(s.vocab_size, 3);
        assert_eq!(s.mean_sentence_length, 2.5);
        assert_eq!((s.token_count, s.sentence_count), (5, 2));
        let s = lex_stats(&raw("x\n")).unwrap();
        assert_eq!((s.vocab_size, s.mean_sentence_length), (1, 1.0));
    }

    #[test]
    fn casing_controls_vocab() {
        let opts = LoadOptions {
            lowercase: false,
            ..LoadOptions::default()
        };
        let c = Corpus::raw_from_str("The the\n", &opts).unwrap();
        assert_eq!(lex_stats(&c).unwrap().vocab_size, 2);
        assert_eq!(lex_stats(&raw("The the\n")).unwrap().vocab_size, 1);
    }

    #[test]
    fn abs_conc_two_types() {
        let lex = Lexicon::from_lists("love\n", "the\n").unwrap();
        let s = abs_conc(&raw("love dog the\n"), &lex).unwrap();
        assert_eq!((s.n_abstract, s.n_concrete), (1, 1));
        assert_eq!(s.pct_abstract, 0.5);
    }

    #[test]
    fn abs_pct_zero_when_no_types() {
        let lex = Lexicon::from_lists("love\n", "the\n").unwrap();
        let s = abs_conc(&raw("the the\n"), &lex).unwrap();
        assert_eq!((s.n_abstract, s.n_concrete, s.pct_abstract), (0, 0, 0.0));
    }

    #[test]
    fn lexicon_lists() {
        let lex = Lexicon::from_lists("love\nthink\n# comment\n", "").unwrap();
        assert_eq!(lex.abstract_terms.len(), 2);
        let lex = Lexicon::from_lists("love\nthe\n", "the\n").unwrap();
        assert!(!lex.abstract_terms.contains("the"));
        assert!(lex.function_words.contains("the"));
        let lex = Lexicon::from_lists("love\nLove\n", "").unwrap();
        assert_eq!(lex.abstract_terms.len(), 1);
        assert!(matches!(Lexicon::from_lists("# nothing\n\n", "the"), Err(Error::EmptyLexicon)));
    }

    #[test]
    fn bundled_lexicon_is_disjoint_and_sized() {
        let lex = Lexicon::bundled();
        assert!(lex.abstract_terms.is_disjoint(&lex.function_words));
        assert!(lex.abstract_terms.len() >= 350);
        assert!(lex.function_words.len() >= 120);
        assert!(lex.abstract_terms.contains("love") && lex.abstract_terms.contains("think"));
    }

    #[test]
    fn pos_one_of_each() {
        let d = pos_distribution(&tagged("a_NN b_VBZ c_JJ d_DT\n"), &TagMap::default()).unwrap();
        assert_eq!(d.proportions(), [0.25; 4]);
        assert_eq!(d.tagged_token_count, 4);
    }

    #[test]
    fn pos_noun_prefixes() {
        let d = pos_distribution(&tagged("a_NNS b_NNP c_NN\n"), &TagMap::default()).unwrap();
        assert_eq!(d.proportions(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn pos_modals_are_verbs() {
        // Checked against the rows of data/tag_map.tsv.
        let map = TagMap::default();
        assert_eq!(
            map.rules(),
            [
                ("NN".to_string(), PosClass::N),
                ("VB".to_string(), PosClass::V),
                ("MD".to_string(), PosClass::V),
                ("JJ".to_string(), PosClass::J),
            ]
        );
        let d = pos_distribution(&tagged("can_MD go_VB\n"), &map).unwrap();
        assert_eq!(d.v, 1.0);
    }

    #[test]
    fn pos_overrides_use_longest_prefix() {
        let mut map = TagMap::default();
        map.set("NNP", PosClass::O);
        map.set("MD", PosClass::O);
        assert_eq!(map.classify("NNPS"), PosClass::O);
        assert_eq!(map.classify("NNS"), PosClass::N);
        assert_eq!(map.classify("MD"), PosClass::O);
        assert_eq!(map.classify("RB"), PosClass::O);
    }

    #[test]
    fn pos_needs_tags() {
        assert!(matches!(
            pos_distribution(&raw("a b\n"), &TagMap::default()),
            Err(Error::Tier { .. })
        ));
    }

    #[test]
    fn tag_map_parse_errors() {
        assert!(TagMap::parse("NN\tX\n").is_err());
        assert!(TagMap::parse("NN\n").is_err());
    }
}
