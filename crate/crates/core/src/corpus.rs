//! Corpus loading, validation and deterministic train/test splitting.
//!
//! Three on-disk tiers are supported, all one sentence per line:
//! raw whitespace-tokenized text, `surface_TAG` tagged text, and bracketed
//! constituency trees.

use std::borrow::Cow;
use std::fmt;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, SplitMix64};
use crate::syntax::{parse_tree, ParseTree};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tree: Option<ParseTree>,
}

impl Sentence {
    /// Builds an untagged sentence from whitespace-separated text.
    pub fn from_text(text: &str) -> Sentence {
        Sentence {
            tokens: text
                .split_whitespace()
                .map(|w| Token {
                    surface: w.to_string(),
                    pos: None,
                })
                .collect(),
            tree: None,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisualStyle {
    Abstract,
    Real,
    Mixed,
}

impl VisualStyle {
    /// Short table code: `A`, `R` or `A/R`.
    pub fn code(self) -> &'static str {
        match self {
            VisualStyle::Abstract => "A",
            VisualStyle::Real => "R",
            VisualStyle::Mixed => "A/R",
        }
    }
}

/// Descriptive metadata carried alongside a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub name: String,
    #[serde(default)]
    pub image_count: Option<u64>,
    #[serde(default)]
    pub visual_style: Option<VisualStyle>,
    #[serde(default)]
    pub has_bounding_boxes: Option<bool>,
}

impl CorpusMeta {
    pub fn new(name: &str) -> Result<CorpusMeta> {
        if !valid_name(name) {
            return Err(Error::Format {
                line: 0,
                message: format!("invalid corpus name `{name}`: use [A-Za-z0-9_.-]+"),
            });
        }
        Ok(CorpusMeta {
            name: name.to_string(),
            image_count: None,
            visual_style: None,
            has_bounding_boxes: None,
        })
    }
}

pub fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Raw,
    Tagged,
    Parsed,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Raw => "raw",
            Tier::Tagged => "tagged",
            Tier::Parsed => "parsed",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Options shared by the loaders.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Corpus name; defaults to the sanitized file stem.
    pub name: Option<String>,
    /// Case-fold surfaces for vocabulary and language-model statistics.
    /// Raw corpora are lowercased in place; tagged and parsed corpora keep
    /// their surfaces and fold on use.
    pub lowercase: bool,
    /// Drop tokens made only of punctuation.
    pub strip_punct: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            name: None,
            lowercase: true,
            strip_punct: false,
        }
    }
}

/// An immutable, loaded corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    meta: CorpusMeta,
    tier: Tier,
    casefold: bool,
    sentences: Vec<Sentence>,
}

impl Corpus {
    /// Assembles a corpus, checking the tier invariants.
    pub fn new(meta: CorpusMeta, tier: Tier, casefold: bool, sentences: Vec<Sentence>) -> Result<Corpus> {
        for (i, s) in sentences.iter().enumerate() {
            let line = i + 1;
            if s.tokens.is_empty() {
                return Err(Error::Format {
                    line,
                    message: "sentence has no tokens".into(),
                });
            }
            for t in &s.tokens {
                if t.surface.is_empty() || t.surface.chars().any(char::is_whitespace) {
                    return Err(Error::Format {
                        line,
                        message: format!("bad token surface {:?}", t.surface),
                    });
                }
                if tier != Tier::Raw && t.pos.as_deref().is_none_or(str::is_empty) {
                    return Err(Error::Format {
                        line,
                        message: format!("token `{}` has no POS tag", t.surface),
                    });
                }
            }
            if tier == Tier::Parsed {
                let tree = s.tree.as_ref().ok_or_else(|| Error::Format {
                    line,
                    message: "parsed sentence has no tree".into(),
                })?;
                let leaves = tree.leaves();
                if leaves.len() != s.tokens.len()
                    || leaves.iter().zip(&s.tokens).any(|(l, t)| *l != t.surface)
                {
                    return Err(Error::Format {
                        line,
                        message: "tree leaves differ from tokens".into(),
                    });
                }
            }
        }
        Ok(Corpus {
            meta,
            tier,
            casefold,
            sentences,
        })
    }

    pub fn meta(&self) -> &CorpusMeta {
        &self.meta
    }

    pub fn name(&self) -> &str {
        &self.meta.name
    }

    pub fn tier(&self) -> Tier {
        self.tier
    }

    pub fn casefold(&self) -> bool {
        self.casefold
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// Replaces the metadata, keeping the sentences.
    pub fn with_meta(mut self, meta: CorpusMeta) -> Corpus {
        self.meta = meta;
        self
    }

    /// Surface form under the corpus casing.
    pub fn word<'a>(&self, token: &'a Token) -> Cow<'a, str> {
        if self.casefold && token.surface.chars().any(char::is_uppercase) {
            Cow::Owned(token.surface.to_lowercase())
        } else {
            Cow::Borrowed(&token.surface)
        }
    }

    /// Sentences as normalized word sequences.
    pub fn word_sequences(&self) -> impl Iterator<Item = Vec<Cow<'_, str>>> + '_ {
        self.sentences
            .iter()
            .map(move |s| s.tokens.iter().map(|t| self.word(t)).collect())
    }

    pub(crate) fn ensure_nonempty(&self) -> Result<()> {
        if self.sentences.is_empty() {
            Err(Error::EmptyCorpus(self.meta.name.clone()))
        } else {
            Ok(())
        }
    }

    fn subset(&self, indices: &[usize]) -> Corpus {
        Corpus {
            meta: self.meta.clone(),
            tier: self.tier,
            casefold: self.casefold,
            sentences: indices.iter().map(|&i| self.sentences[i].clone()).collect(),
        }
    }

    /// One bracketed tree per line, for parsed corpora.
    pub fn to_bracketed(&self) -> Option<String> {
        let mut out = String::new();
        for s in &self.sentences {
            out.push_str(&s.tree.as_ref()?.to_string());
            out.push('\n');
        }
        Some(out)
    }

    pub fn raw_from_str(text: &str, opts: &LoadOptions) -> Result<Corpus> {
        build(text_lines(text), opts, Tier::Raw, |_, line| {
            Ok(Some(Sentence::from_text(line)))
        })
    }

    pub fn tagged_from_str(text: &str, opts: &LoadOptions) -> Result<Corpus> {
        build(text_lines(text), opts, Tier::Tagged, parse_tagged_line)
    }

    pub fn parsed_from_str(text: &str, opts: &LoadOptions) -> Result<Corpus> {
        build(text_lines(text), opts, Tier::Parsed, parse_tree_line)
    }
}

/// PTB escapes for brackets, which contain letters but are punctuation.
const BRACKET_ESCAPES: [&str; 6] = ["-LRB-", "-RRB-", "-LCB-", "-RCB-", "-LSB-", "-RSB-"];

/// A token consisting only of punctuation and symbols.
pub fn is_punct(surface: &str) -> bool {
    BRACKET_ESCAPES.contains(&surface) || surface.chars().all(|c| !c.is_alphanumeric())
}

fn text_lines(text: &str) -> Vec<Result<(usize, String)>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Ok((i + 1, l.trim_end_matches('\r').to_string())))
        .collect()
}

fn file_lines(path: &Path) -> Result<Vec<Result<(usize, String)>>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut lines: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    Ok(lines
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            let l = l.strip_suffix(b"\r").unwrap_or(l);
            std::str::from_utf8(l)
                .map(|s| (i + 1, s.to_string()))
                .map_err(|_| Error::Encoding {
                    path: path.to_path_buf(),
                    line: i + 1,
                })
        })
        .collect())
}

fn default_name(path: &Path) -> String {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name: String = stem
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-') { c } else { '_' })
        .collect();
    if name.is_empty() {
        "corpus".into()
    } else {
        name
    }
}

fn build(
    lines: Vec<Result<(usize, String)>>,
    opts: &LoadOptions,
    tier: Tier,
    parse: impl Fn(usize, &str) -> Result<Option<Sentence>>,
) -> Result<Corpus> {
    let name = opts.name.clone().unwrap_or_else(|| "corpus".into());
    let meta = CorpusMeta::new(&name)?;
    let mut sentences = Vec::new();
    for line in lines {
        let (no, text) = line?;
        if text.trim().is_empty() {
            continue;
        }
        let Some(mut sentence) = parse(no, &text)? else {
            continue;
        };
        if tier == Tier::Raw && opts.lowercase {
            for t in &mut sentence.tokens {
                t.surface = t.surface.to_lowercase();
            }
        }
        if opts.strip_punct {
            sentence.tokens.retain(|t| !is_punct(&t.surface));
            sentence.tree = sentence
                .tree
                .take()
                .and_then(|t| t.prune(&|_, w| is_punct(w)));
            if sentence.tokens.is_empty() {
                continue;
            }
        }
        sentences.push(sentence);
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus(name));
    }
    Corpus::new(meta, tier, opts.lowercase, sentences)
}

fn parse_tagged_line(line: usize, text: &str) -> Result<Option<Sentence>> {
    let tokens = text
        .split_whitespace()
        .map(|item| match item.rsplit_once('_') {
            Some((surface, tag)) if !surface.is_empty() && !tag.is_empty() => Ok(Token {
                surface: surface.to_string(),
                pos: Some(tag.to_string()),
            }),
            _ => Err(Error::Format {
                line,
                message: format!("item `{item}` is not of the form surface_TAG"),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(Sentence { tokens, tree: None }))
}

fn parse_tree_line(line: usize, text: &str) -> Result<Option<Sentence>> {
    let tree = parse_tree(text, line)?.unwrap_root();
    let Some(tree) = tree.prune(&|tag, _| tag == "-NONE-") else {
        warn!("line {line}: tree holds only empty elements, skipped");
        return Ok(None);
    };
    let tokens = tree
        .tagged_words()
        .into_iter()
        .map(|(tag, word)| Token {
            surface: word.to_string(),
            pos: Some(tag.to_string()),
        })
        .collect();
    Ok(Some(Sentence {
        tokens,
        tree: Some(tree),
    }))
}

fn with_default_name(opts: &LoadOptions, path: &Path) -> LoadOptions {
    let mut opts = opts.clone();
    opts.name.get_or_insert_with(|| default_name(path));
    opts
}

/// Loads one whitespace-tokenized sentence per line.
pub fn load_raw(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let opts = with_default_name(opts, path);
    build(file_lines(path)?, &opts, Tier::Raw, |_, line| {
        Ok(Some(Sentence::from_text(line)))
    })
}

/// Loads `surface_TAG` lines; the tag follows the last underscore.
pub fn load_tagged(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let opts = with_default_name(opts, path);
    build(file_lines(path)?, &opts, Tier::Tagged, parse_tagged_line)
}

/// Loads one bracketed tree per line. `ROOT` wrappers and `-NONE-` empty
/// elements are removed; preterminal labels become the token tags.
pub fn load_parsed(path: impl AsRef<Path>, opts: &LoadOptions) -> Result<Corpus> {
    let path = path.as_ref();
    let opts = with_default_name(opts, path);
    build(file_lines(path)?, &opts, Tier::Parsed, parse_tree_line)
}

pub fn load(path: impl AsRef<Path>, tier: Tier, opts: &LoadOptions) -> Result<Corpus> {
    match tier {
        Tier::Raw => load_raw(path, opts),
        Tier::Tagged => load_tagged(path, opts),
        Tier::Parsed => load_parsed(path, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub test_size: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub test: Corpus,
    pub train: Corpus,
    /// Set when the corpus had no more than `test_size` sentences and was
    /// used whole as the test side.
    pub undersized: bool,
}

/// Splits off `test_size` sentences by a seeded Fisher-Yates permutation.
///
/// The permutation seed mixes `spec.seed` with the corpus name, so a corpus
/// splits the same way regardless of which other corpora are in a run. Both
/// sides keep the original sentence order.
pub fn split(corpus: &Corpus, spec: SplitSpec) -> Result<SplitResult> {
    corpus.ensure_nonempty()?;
    let n = corpus.len();
    let test_size = spec.test_size.max(1);
    if n <= test_size {
        warn!(
            "corpus `{}` has {n} sentences, not more than test size {test_size}; using all as test",
            corpus.name()
        );
        return Ok(SplitResult {
            test: corpus.clone(),
            train: corpus.subset(&[]),
            undersized: true,
        });
    }
    let (mut test, mut train) = split_indices(n, test_size, derive_seed(spec.seed, corpus.name()));
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitResult {
        test: corpus.subset(&test),
        train: corpus.subset(&train),
        undersized: false,
    })
}

fn split_indices(n: usize, test_size: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        idx.swap(i, j);
    }
    let train = idx.split_off(test_size);
    (idx, train)
}
