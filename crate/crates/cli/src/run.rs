use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use langqual::bias::{load_annotations, load_captions, reporting_bias};
use langqual::lm::{perplexity, train, NgramModel};
use langqual::report::{metrics_row, BackgroundInfo, CorpusFailure, MetricConfig};
use langqual::{
    cross_ppl_bounded, plot_data, render, Corpus, CorpusMeta, Format, LoadOptions, MetricsRow, Protocol,
    ReportBundle, StemMode, Tier,
};
use log::{error, info, warn};
use rayon::prelude::*;
use serde_json::json;

use crate::manifest::{CorpusEntry, Manifest, DEFAULT_OUT_DIR};

/// Marks failures that map to exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub const EXIT_DATA: u8 = 1;

/// Flags shared by every subcommand.
pub struct Globals {
    pub manifest: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub formats: Vec<Format>,
}

impl Globals {
    pub fn manifest(&self) -> Result<Manifest> {
        let path = self
            .manifest
            .as_deref()
            .ok_or_else(|| usage("this command needs --manifest"))?;
        Manifest::load(path).map_err(|e| usage(format!("{e:#}")))
    }

    fn out_dir(&self, manifest: Option<&Manifest>) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| manifest.and_then(|m| m.output.directory.clone()))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    fn formats(&self, manifest: &Manifest) -> Vec<Format> {
        if !self.formats.is_empty() {
            return self.formats.clone();
        }
        match &manifest.output.formats {
            Some(fs) => fs.iter().map(|f| f.parse().expect("validated")).collect(),
            None => vec![Format::Markdown, Format::Csv, Format::Json],
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn load_entry(entry: &CorpusEntry) -> langqual::Result<Corpus> {
    let corpus = langqual::corpus::load(&entry.path, entry.tier, &entry.load_options())?;
    let mut meta = CorpusMeta::new(&entry.name)?;
    meta.image_count = entry.image_count;
    meta.visual_style = entry.visual_style;
    meta.has_bounding_boxes = entry.has_bounding_boxes;
    Ok(corpus.with_meta(meta))
}

/// Loads every entry in parallel; results keep manifest order.
fn load_all(entries: &[CorpusEntry]) -> Vec<(String, langqual::Result<Corpus>)> {
    entries
        .par_iter()
        .map(|e| (e.name.clone(), load_entry(e)))
        .collect()
}

fn failure(name: &str, cause: impl fmt::Display) -> CorpusFailure {
    error!("corpus `{name}`: {cause}");
    CorpusFailure {
        name: name.to_string(),
        cause: cause.to_string(),
    }
}

/// The effective configuration, minus anything that cannot change results
/// (output location, worker count).
fn config_echo(command: &str, manifest: &Manifest, protocol: &Protocol) -> serde_json::Value {
    let mut m = manifest.clone();
    m.output.directory = None;
    m.protocol.seed = protocol.seed;
    m.protocol.order = protocol.order;
    m.protocol.cutoff = protocol.cutoff;
    m.protocol.test_size = protocol.test_size;
    json!({
        "command": command,
        "toolkit_version": langqual::VERSION,
        "manifest": m,
    })
}

fn protocol(globals: &Globals, manifest: &Manifest) -> Protocol {
    let mut p = Protocol::from(manifest.protocol);
    if let Some(seed) = globals.seed {
        p.seed = seed;
    }
    p
}

fn background(manifest: &Manifest, p: &Protocol) -> Result<Option<(NgramModel, BackgroundInfo)>> {
    if let Some(path) = &manifest.background_model {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read model {}", path.display()))?;
        let model = NgramModel::from_text(&text).with_context(|| format!("bad model file {}", path.display()))?;
        let info = BackgroundInfo {
            name: file_label(path),
            token_count: 0,
            order: model.order(),
            cutoff: model.cutoff(),
        };
        return Ok(Some((model, info)));
    }
    let Some(path) = &manifest.background_corpus else {
        return Ok(None);
    };
    let corpus = langqual::load_raw(path, &LoadOptions::default())
        .with_context(|| format!("background corpus {}", path.display()))?;
    let model = train(&corpus, p.order, p.cutoff)?;
    info!(
        "background model: {} tokens, vocabulary {}",
        corpus.token_count(),
        model.vocab_size()
    );
    let info = BackgroundInfo {
        name: corpus.name().to_string(),
        token_count: corpus.token_count(),
        order: p.order,
        cutoff: p.cutoff,
    };
    Ok(Some((model, info)))
}

fn file_label(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn write_bundle(dir: &Path, bundle: &ReportBundle, formats: &[Format]) -> Result<()> {
    for &format in formats {
        for file in render(bundle, format)? {
            write_file(dir, &file.file_name, &file.contents)?;
        }
    }
    if bundle.rows.iter().any(|r| r.pos.is_some()) {
        write_file(dir, "pos_plot.tsv", &plot_data(bundle)?)?;
    }
    let mut echo = serde_json::to_string_pretty(&bundle.config_echo)?;
    echo.push('\n');
    write_file(dir, "config_echo.json", &echo)
}

fn status(failed: bool) -> ExitCode {
    if failed {
        ExitCode::from(EXIT_DATA)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn analyze(globals: &Globals, generated_at: Option<String>) -> Result<ExitCode> {
    let manifest = globals.manifest()?;
    let lexicon = manifest.lexicon().map_err(|e| usage(format!("{e:#}")))?;
    let tags = manifest.tag_map();
    let p = protocol(globals, &manifest);
    let bg = background(&manifest, &p)?;
    let results: Vec<(String, std::result::Result<MetricsRow, String>)> = manifest
        .corpora
        .par_iter()
        .map(|entry| {
            let config = MetricConfig {
                lexicon: &lexicon,
                tags: &tags,
                background: bg.as_ref().map(|(m, i)| (m, i)),
                extra: json!({ "load": entry.load_options() }),
            };
            let row = load_entry(entry)
                .and_then(|c| metrics_row(&c, &config))
                .map_err(|e| format!("{e}"));
            (entry.name.clone(), row)
        })
        .collect();

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (name, r) in results {
        match r {
            Ok(row) => rows.push(row),
            Err(cause) => errors.push(failure(&name, cause)),
        }
    }
    let failed = !errors.is_empty();
    if rows.is_empty() {
        error!("no corpus could be analyzed");
        return Ok(ExitCode::from(EXIT_DATA));
    }
    let mut bundle = ReportBundle::new(rows);
    bundle.errors = errors;
    bundle.background = bg.map(|(_, i)| i);
    bundle.generated_at = generated_at;
    bundle.config_echo = config_echo("analyze", &manifest, &p);
    write_bundle(&globals.out_dir(Some(&manifest)), &bundle, &globals.formats(&manifest))?;
    Ok(status(failed))
}

pub struct MatrixArgs {
    pub order: Option<usize>,
    pub cutoff: Option<u64>,
    pub test_size: Option<usize>,
    pub max_resident: Option<usize>,
}

pub fn ppl_matrix(globals: &Globals, args: &MatrixArgs) -> Result<ExitCode> {
    let manifest = globals.manifest()?;
    if manifest.corpora.len() < 2 {
        return Err(usage(format!(
            "ppl-matrix needs at least 2 corpora, the manifest lists {}",
            manifest.corpora.len()
        )));
    }
    let mut p = protocol(globals, &manifest);
    p.order = args.order.unwrap_or(p.order);
    p.cutoff = args.cutoff.unwrap_or(p.cutoff);
    p.test_size = args.test_size.unwrap_or(p.test_size);

    let mut corpora = Vec::new();
    let mut errors = Vec::new();
    for (name, r) in load_all(&manifest.corpora) {
        match r {
            Ok(c) => corpora.push(c),
            Err(e) => errors.push(failure(&name, e)),
        }
    }
    if corpora.len() < 2 {
        error!("fewer than 2 corpora loaded; no matrix written");
        return Ok(ExitCode::from(EXIT_DATA));
    }
    let (matrix, _) = cross_ppl_bounded(&corpora, &p, args.max_resident)?;
    let dir = globals.out_dir(Some(&manifest));
    write_file(&dir, "ppl_matrix.csv", &matrix.to_csv())?;

    let mut bundle = ReportBundle::new(Vec::new());
    bundle.matrix = Some(matrix);
    bundle.errors = errors;
    bundle.config_echo = config_echo("ppl-matrix", &manifest, &p);
    for format in globals.formats(&manifest) {
        if format == Format::Csv {
            continue;
        }
        for file in render(&bundle, format)? {
            let ext = Path::new(&file.file_name).extension().and_then(|e| e.to_str()).unwrap_or("txt");
            write_file(&dir, &format!("ppl_matrix.{ext}"), &file.contents)?;
        }
    }
    let mut echo = serde_json::to_string_pretty(&bundle.config_echo)?;
    echo.push('\n');
    write_file(&dir, "config_echo.json", &echo)?;
    Ok(status(!bundle.errors.is_empty()))
}

pub fn pos_dist(globals: &Globals) -> Result<ExitCode> {
    let manifest = globals.manifest()?;
    let lexicon = manifest.lexicon().map_err(|e| usage(format!("{e:#}")))?;
    let tags = manifest.tag_map();
    let p = protocol(globals, &manifest);
    let config = MetricConfig {
        lexicon: &lexicon,
        tags: &tags,
        background: None,
        extra: serde_json::Value::Null,
    };
    let entries: Vec<&CorpusEntry> = manifest
        .corpora
        .iter()
        .filter(|e| {
            let keep = e.tier != Tier::Raw;
            if !keep {
                info!("skipping raw corpus `{}`", e.name);
            }
            keep
        })
        .collect();
    let mut rows = Vec::new();
    let mut failed = false;
    for entry in entries {
        match load_entry(entry).and_then(|c| metrics_row(&c, &config)) {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure(&entry.name, e);
                failed = true;
            }
        }
    }
    let mut bundle = ReportBundle::new(rows);
    bundle.config_echo = config_echo("pos-dist", &manifest, &p);
    let tsv = match plot_data(&bundle) {
        Ok(t) => t,
        Err(e) => {
            error!("{e}");
            return Ok(ExitCode::from(EXIT_DATA));
        }
    };
    print!("{tsv}");
    let dir = globals.out_dir(Some(&manifest));
    write_file(&dir, "pos_plot.tsv", &tsv)?;
    if let Some(pos) = render(&bundle, Format::Csv)?.into_iter().find(|f| f.file_name == "pos_dist.csv") {
        write_file(&dir, &pos.file_name, &pos.contents)?;
    }
    Ok(status(failed))
}

pub fn bias(globals: &Globals, annotations: &Path, captions: &Path, stem: StemMode) -> Result<ExitCode> {
    let anns = load_annotations(annotations)?;
    let caps = load_captions(captions)?;
    let stats = reporting_bias(&anns, &caps, stem)?;
    println!("{}", serde_json::to_string(&stats)?);
    eprintln!("{}", stats.summary());
    if let Some(dir) = &globals.out_dir {
        let mut bundle = ReportBundle::new(Vec::new());
        bundle.bias = Some(stats);
        bundle.config_echo = json!({
            "command": "bias",
            "toolkit_version": langqual::VERSION,
            "annotations": annotations,
            "captions": captions,
            "stem": stem,
        });
        let formats = if globals.formats.is_empty() { vec![Format::Json] } else { globals.formats.clone() };
        for format in formats {
            for file in render(&bundle, format)? {
                let ext = Path::new(&file.file_name).extension().and_then(|e| e.to_str()).unwrap_or("txt");
                write_file(dir, &format!("bias.{ext}"), &file.contents)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub struct CorpusArgs {
    pub tier: Tier,
    pub lowercase: bool,
    pub strip_punct: bool,
}

impl CorpusArgs {
    fn load(&self, path: &Path) -> langqual::Result<Corpus> {
        let opts = LoadOptions {
            name: None,
            lowercase: self.lowercase,
            strip_punct: self.strip_punct,
        };
        langqual::corpus::load(path, self.tier, &opts)
    }
}

pub fn train_lm(corpus: &Path, args: &CorpusArgs, order: usize, cutoff: u64, output: &Path) -> Result<ExitCode> {
    let c = args.load(corpus)?;
    let model = train(&c, order, cutoff)?;
    info!(
        "trained order-{order} model on {} tokens; vocabulary {}",
        c.token_count(),
        model.vocab_size()
    );
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(output, model.to_text()).with_context(|| format!("cannot write {}", output.display()))?;
    Ok(ExitCode::SUCCESS)
}

pub fn ppl(model: &Path, corpora: &[PathBuf], args: &CorpusArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(model).with_context(|| format!("cannot read model {}", model.display()))?;
    let model = NgramModel::from_text(&text).with_context(|| format!("bad model file {}", model.display()))?;
    println!("corpus\tppl\ttokens\toov_rate");
    let mut failed = false;
    for path in corpora {
        match args.load(path).and_then(|c| Ok((perplexity(&model, &c)?, c))) {
            Ok((r, c)) => {
                if r.oov_rate > 0.2 {
                    warn!("`{}`: {:.1}% of tokens are out of vocabulary", c.name(), 100.0 * r.oov_rate);
                }
                println!("{}", r.report_line(c.name()));
            }
            Err(e) => {
                failure(&path.display().to_string(), e);
                failed = true;
            }
        }
    }
    Ok(status(failed))
}
