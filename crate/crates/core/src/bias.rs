//! Reporting bias: how many annotated objects of an image its captions
//! actually mention.
//!
//! An object counts as mentioned when any of its labels occurs as a
//! contiguous token run in the lowercased caption. No synonym resource is
//! used; the labels themselves carry the paraphrases. Plain token matching
//! has a known false-positive mode: the label `dog` matches `hot dog stand`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};

fn top_level_default() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    pub object_id: String,
    #[serde(default = "top_level_default")]
    pub is_top_level: bool,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseAnnotation {
    pub image_id: String,
    #[serde(default)]
    pub objects: Vec<ObjectAnnotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct CaptionRecord {
    image_id: String,
    captions: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StemMode {
    #[default]
    None,
    /// Strip one final `s` from caption and label tokens.
    PluralS,
}

impl StemMode {
    fn apply(self, token: &str) -> String {
        let lower = token.to_lowercase();
        match self {
            StemMode::PluralS if lower.chars().count() > 1 => {
                lower.strip_suffix('s').map(str::to_string).unwrap_or(lower)
            }
            _ => lower,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasStats {
    pub mean_objects_per_image: f64,
    pub mean_mentioned_per_caption: f64,
    pub caption_count: usize,
    pub image_count: usize,
}

impl BiasStats {
    pub fn summary(&self) -> String {
        format!(
            "{} images average {:.2} top-level objects; {} captions mention {:.2} of them on average",
            self.image_count,
            self.mean_objects_per_image,
            self.caption_count,
            self.mean_mentioned_per_caption
        )
    }
}

fn tokens(text: &str, stem: StemMode) -> Vec<String> {
    text.split_whitespace().map(|t| stem.apply(t)).collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// True iff one of the object's labels appears as a contiguous token run of
/// the caption.
pub fn mention_match(caption: &Sentence, object: &ObjectAnnotation, stem: StemMode) -> bool {
    let words: Vec<String> = caption.tokens.iter().map(|t| stem.apply(&t.surface)).collect();
    object
        .labels
        .iter()
        .any(|label| contains_run(&words, &tokens(label, stem)))
}

/// Mean top-level objects per annotated image and mean mentioned objects per
/// caption.
pub fn reporting_bias(
    annotations: &[DenseAnnotation],
    captions: &BTreeMap<String, Vec<Sentence>>,
    stem: StemMode,
) -> Result<BiasStats> {
    let caption_count: usize = captions.values().map(Vec::len).sum();
    if annotations.is_empty() || caption_count == 0 {
        return Err(Error::EmptyInput);
    }
    let by_id: BTreeMap<&str, &DenseAnnotation> =
        annotations.iter().map(|a| (a.image_id.as_str(), a)).collect();
    let missing: Vec<String> = captions
        .iter()
        .filter(|(id, caps)| !caps.is_empty() && !by_id.contains_key(id.as_str()))
        .map(|(id, _)| id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingAnnotation(missing));
    }
    let top_level = |a: &DenseAnnotation| a.objects.iter().filter(|o| o.is_top_level).count();
    let total_objects: usize = annotations.iter().map(top_level).sum();

    let mut mentioned = 0usize;
    for (id, caps) in captions {
        let Some(ann) = by_id.get(id.as_str()) else {
            continue;
        };
        for caption in caps {
            mentioned += ann
                .objects
                .iter()
                .filter(|o| o.is_top_level && mention_match(caption, o, stem))
                .count();
        }
    }
    Ok(BiasStats {
        mean_objects_per_image: total_objects as f64 / annotations.len() as f64,
        mean_mentioned_per_caption: mentioned as f64 / caption_count as f64,
        caption_count,
        image_count: annotations.len(),
    })
}

fn json_lines<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Format {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Parses the JSON-lines annotation format; labels are lowercased.
pub fn parse_annotations(text: &str) -> Result<Vec<DenseAnnotation>> {
    let mut anns: Vec<DenseAnnotation> = json_lines(text)?;
    let mut ids = BTreeSet::new();
    for (i, a) in anns.iter_mut().enumerate() {
        let bad = |message: String| Error::Format { line: i + 1, message };
        if a.image_id.is_empty() {
            return Err(bad("empty image_id".into()));
        }
        if !ids.insert(a.image_id.clone()) {
            return Err(bad(format!("duplicate image_id `{}`", a.image_id)));
        }
        for o in &mut a.objects {
            o.labels.retain(|l| !l.trim().is_empty());
            if o.labels.is_empty() {
                return Err(bad(format!("object `{}` has no labels", o.object_id)));
            }
            for l in &mut o.labels {
                *l = l.to_lowercase();
            }
        }
    }
    Ok(anns)
}

/// Parses the JSON-lines caption format into per-image sentences.
pub fn parse_captions(text: &str) -> Result<BTreeMap<String, Vec<Sentence>>> {
    let mut out: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
    for rec in json_lines::<CaptionRecord>(text)? {
        out.entry(rec.image_id)
            .or_default()
            .extend(rec.captions.iter().map(|c| Sentence::from_text(c)).filter(|s| !s.is_empty()));
    }
    Ok(out)
}

pub fn load_annotations(path: impl AsRef<Path>) -> Result<Vec<DenseAnnotation>> {
    let path = path.as_ref();
    parse_annotations(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

pub fn load_captions(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<Sentence>>> {
    let path = path.as_ref();
    parse_captions(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
