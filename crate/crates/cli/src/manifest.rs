use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use langqual::{LoadOptions, Lexicon, PosClass, Protocol, TagMap, Tier, VisualStyle};
use serde::{Deserialize, Serialize};

pub const DEFAULT_OUT_DIR: &str = "langqual-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    #[serde(default = "default_tier")]
    pub tier: Tier,
    #[serde(default = "yes")]
    pub lowercase: bool,
    #[serde(default)]
    pub strip_punct: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visual_style: Option<VisualStyle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub has_bounding_boxes: Option<bool>,
}

fn default_tier() -> Tier {
    Tier::Raw
}

fn yes() -> bool {
    true
}

impl CorpusEntry {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            name: Some(self.name.clone()),
            lowercase: self.lowercase,
            strip_punct: self.strip_punct,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstract_terms: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function_words: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(default = "d_order")]
    pub order: usize,
    #[serde(default = "d_cutoff")]
    pub cutoff: u64,
    #[serde(default = "d_test_size")]
    pub test_size: usize,
    #[serde(default = "d_seed")]
    pub seed: u64,
}

fn d_order() -> usize {
    Protocol::default().order
}
fn d_cutoff() -> u64 {
    Protocol::default().cutoff
}
fn d_test_size() -> usize {
    Protocol::default().test_size
}
fn d_seed() -> u64 {
    Protocol::default().seed
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = Protocol::default();
        ProtocolSection {
            order: p.order,
            cutoff: p.cutoff,
            test_size: p.test_size,
            seed: p.seed,
        }
    }
}

impl From<ProtocolSection> for Protocol {
    fn from(p: ProtocolSection) -> Protocol {
        Protocol {
            order: p.order,
            cutoff: p.cutoff,
            test_size: p.test_size,
            seed: p.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formats: Option<Vec<String>>,
}

/// The run description read from a TOML manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub corpora: Vec<CorpusEntry>,
    #[serde(default)]
    pub lexicon: LexiconPaths,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_corpus: Option<PathBuf>,
    /// A model written by `train-lm`; takes precedence over
    /// `background_corpus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background_model: Option<PathBuf>,
    #[serde(default)]
    pub protocol: ProtocolSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tag_map: BTreeMap<String, String>,
}

impl Manifest {
    /// Reads and validates a manifest; relative paths are resolved against
    /// the manifest's directory.
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read manifest {}", path.display()))?;
        let mut m = Manifest::parse(&text).with_context(|| format!("invalid manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        m.resolve(base);
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<Manifest> {
        let m: Manifest = toml::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        if self.corpora.is_empty() {
            bail!("`corpora` must list at least one corpus");
        }
        let mut names = HashSet::new();
        for c in &self.corpora {
            if !langqual::corpus::valid_name(&c.name) {
                bail!("invalid corpus name `{}`: use [A-Za-z0-9_.-]+", c.name);
            }
            if !names.insert(c.name.as_str()) {
                bail!("duplicate corpus name `{}`", c.name);
            }
            if c.path.as_os_str().is_empty() {
                bail!("corpus `{}` has an empty path", c.name);
            }
        }
        for (prefix, class) in &self.tag_map {
            if PosClass::parse(class).is_none() {
                bail!("tag_map entry `{prefix}` maps to `{class}`; expected N, V, J or O");
            }
        }
        if let Some(formats) = &self.output.formats {
            for f in formats {
                f.parse::<langqual::Format>().map_err(anyhow::Error::msg)?;
            }
        }
        Ok(())
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for c in &mut self.corpora {
            fix(&mut c.path);
        }
        for p in [
            self.lexicon.abstract_terms.as_mut(),
            self.lexicon.function_words.as_mut(),
            self.background_corpus.as_mut(),
            self.background_model.as_mut(),
            self.output.directory.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        let read = |p: &Path| std::fs::read_to_string(p).with_context(|| format!("cannot read lexicon {}", p.display()));
        let bundled = Lexicon::bundled();
        let join = |set: &std::collections::BTreeSet<String>| set.iter().cloned().collect::<Vec<_>>().join("\n");
        let abstract_text = match &self.lexicon.abstract_terms {
            Some(p) => read(p)?,
            None => join(&bundled.abstract_terms),
        };
        let function_text = match &self.lexicon.function_words {
            Some(p) => read(p)?,
            None => join(&bundled.function_words),
        };
        Ok(Lexicon::from_lists(&abstract_text, &function_text)?)
    }

    pub fn tag_map(&self) -> TagMap {
        let mut tags = TagMap::default();
        for (prefix, class) in &self.tag_map {
            tags.set(prefix, PosClass::parse(class).expect("validated"));
        }
        tags
    }
}
