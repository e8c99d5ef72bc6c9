//! Per-corpus metric rows and their rendering as Markdown, CSV and JSON.
//!
//! Rounding is fixed so outputs are byte-stable: vocabulary in thousands
//! with one decimal, complexity scores and sentence length with two,
//! `%Abs` as a percentage with two, background perplexity to the nearest
//! integer and matrix cells with one. Missing metrics render as `-`.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bias::BiasStats;
use crate::compare::PplMatrix;
use crate::corpus::{Corpus, CorpusMeta, Tier};
use crate::error::{Error, Result};
use crate::lexical::{abs_conc, lex_stats, pos_distribution, AbsConcStats, LexStats, Lexicon, PosDistribution, TagMap};
use crate::lm::{perplexity, NgramModel, PplResult};
use crate::rng::fingerprint;
use crate::syntax::{complexity_stats, ComplexityStats};

/// Identifies the background model behind the `Ppl` column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundInfo {
    pub name: String,
    pub token_count: usize,
    pub order: usize,
    pub cutoff: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub meta: CorpusMeta,
    pub tier: Tier,
    pub lex: LexStats,
    pub absconc: AbsConcStats,
    pub complexity: Option<ComplexityStats>,
    pub pos: Option<PosDistribution>,
    pub background_ppl: Option<PplResult>,
    pub toolkit_version: String,
    pub config_fingerprint: String,
}

/// Inputs shared by every row of one run.
pub struct MetricConfig<'a> {
    pub lexicon: &'a Lexicon,
    pub tags: &'a TagMap,
    pub background: Option<(&'a NgramModel, &'a BackgroundInfo)>,
    /// Loader settings or anything else that should feed the fingerprint.
    pub extra: serde_json::Value,
}

impl MetricConfig<'_> {
    fn fingerprint(&self, corpus: &Corpus) -> String {
        let echo = serde_json::json!({
            "tier": corpus.tier(),
            "casefold": corpus.casefold(),
            "abstract_terms": self.lexicon.abstract_terms,
            "function_words": self.lexicon.function_words,
            "tag_map": self.tags,
            "background": self.background.map(|(_, info)| info),
            "extra": self.extra,
        });
        fingerprint(echo.to_string().as_bytes())
    }
}

/// Computes every metric the corpus tier supports.
pub fn metrics_row(corpus: &Corpus, config: &MetricConfig<'_>) -> Result<MetricsRow> {
    let lex = lex_stats(corpus)?;
    let absconc = abs_conc(corpus, config.lexicon)?;
    let complexity = match corpus.tier() {
        Tier::Parsed => Some(complexity_stats(corpus)?),
        _ => None,
    };
    let pos = match corpus.tier() {
        Tier::Raw => None,
        _ => Some(pos_distribution(corpus, config.tags)?),
    };
    let background_ppl = config
        .background
        .map(|(model, _)| perplexity(model, corpus))
        .transpose()?;
    Ok(MetricsRow {
        meta: corpus.meta().clone(),
        tier: corpus.tier(),
        lex,
        absconc,
        complexity,
        pos,
        background_ppl,
        toolkit_version: crate::VERSION.to_string(),
        config_fingerprint: config.fingerprint(corpus),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFailure {
    pub name: String,
    pub cause: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub rows: Vec<MetricsRow>,
    #[serde(default)]
    pub matrix: Option<PplMatrix>,
    #[serde(default)]
    pub bias: Option<BiasStats>,
    #[serde(default)]
    pub background: Option<BackgroundInfo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<CorpusFailure>,
    /// Only set when the caller pins a timestamp, so that reruns stay
    /// byte-identical by default.
    #[serde(default)]
    pub generated_at: Option<String>,
    #[serde(default)]
    pub config_echo: serde_json::Value,
}

impl ReportBundle {
    pub fn new(rows: Vec<MetricsRow>) -> ReportBundle {
        ReportBundle {
            rows,
            matrix: None,
            bias: None,
            background: None,
            errors: Vec::new(),
            generated_at: None,
            config_echo: serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (markdown, csv, json)")),
        }
    }
}

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub file_name: String,
    pub contents: String,
}

const DASH: &str = "-";

fn thousands(n: u64) -> String {
    format!("{:.1}", n as f64 / 1000.0)
}

fn fixed(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| DASH.into(), |v| format!("{v:.decimals$}"))
}

fn percent(p: f64) -> String {
    format!("{:.2}%", p * 100.0)
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "Y",
        Some(false) => "N",
        None => DASH,
    }
}

/// Rounds a distribution to `1e-4` units that sum to exactly 10000, giving
/// leftover units to the largest remainders (earlier classes win ties).
pub fn round_largest_remainder(props: [f64; 4]) -> [u32; 4] {
    const UNITS: f64 = 10_000.0;
    let scaled = props.map(|p| (p.max(0.0) * UNITS).min(UNITS));
    let mut units = scaled.map(|s| s.floor() as u32);
    let assigned: u32 = units.iter().sum();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let ra = scaled[a] - scaled[a].floor();
        let rb = scaled[b] - scaled[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(10_000u32.saturating_sub(assigned) as usize) {
        units[i] += 1;
    }
    units
}

fn unit_str(u: u32) -> String {
    format!("{}.{:04}", u / 10_000, u % 10_000)
}

fn pos_cells(pos: &PosDistribution) -> [String; 4] {
    round_largest_remainder(pos.proportions()).map(unit_str)
}

struct Table1Cells {
    img: String,
    txt: String,
    frazier: String,
    yngve: String,
    frazier_sum: String,
    yngve_sum: String,
    vocab: String,
    sent_len: String,
    conc: String,
    abs: String,
    pct_abs: String,
    ppl: String,
    style: String,
    bb: String,
}

impl Table1Cells {
    fn of(row: &MetricsRow) -> Table1Cells {
        let c = row.complexity.as_ref();
        Table1Cells {
            img: row.meta.image_count.map_or_else(|| DASH.into(), thousands),
            txt: thousands(row.lex.sentence_count as u64),
            frazier: fixed(c.map(|c| c.mean_frazier), 2),
            yngve: fixed(c.map(|c| c.mean_yngve), 2),
            frazier_sum: fixed(c.map(|c| c.frazier_sum_mean), 2),
            yngve_sum: fixed(c.map(|c| c.yngve_sum_mean), 2),
            vocab: thousands(row.lex.vocab_size as u64),
            sent_len: format!("{:.2}", row.lex.mean_sentence_length),
            conc: row.absconc.n_concrete.to_string(),
            abs: row.absconc.n_abstract.to_string(),
            pct_abs: percent(row.absconc.pct_abstract),
            ppl: fixed(row.background_ppl.map(|p| p.perplexity), 0),
            style: row.meta.visual_style.map_or(DASH, |s| s.code()).to_string(),
            bb: yes_no(row.meta.has_bounding_boxes).to_string(),
        }
    }
}

fn markdown(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    out.push_str("# Corpus language-quality report\n\n");
    writeln!(out, "Generated by langqual {}.", crate::VERSION).unwrap();
    if let Some(ts) = &bundle.generated_at {
        writeln!(out, "Generated at {ts}.").unwrap();
    }

    if !bundle.rows.is_empty() {
        out.push_str("\n## Summary statistics\n\n");
        out.push_str(
            "| Dataset | Img (k) | Txt (k) | Frazier | Yngve | Frazier (sum) | Yngve (sum) \
             | Vocab Size (k) | Sent Len. | #Conc | #Abs | %Abs | Ppl | (A)bs/(R)eal | BB |\n",
        );
        out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|---:|:---:|:---:|\n");
        for row in &bundle.rows {
            let c = Table1Cells::of(row);
            writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                row.meta.name, c.img, c.txt, c.frazier, c.yngve, c.frazier_sum, c.yngve_sum,
                c.vocab, c.sent_len, c.conc, c.abs, c.pct_abs, c.ppl, c.style, c.bb
            )
            .unwrap();
        }
        out.push_str(
            "\nColumn groups: Size = Img, Txt; Language = Frazier through Ppl; Vision = (A)bs/(R)eal, BB. \
             Frazier and Yngve are per-word means; the (sum) columns average per-sentence totals.\n",
        );
        if let Some(bg) = &bundle.background {
            writeln!(
                out,
                "Ppl: background model `{}` ({} tokens), order={}, cutoff={}.",
                bg.name, bg.token_count, bg.order, bg.cutoff
            )
            .unwrap();
        }
    }

    if let Some(m) = &bundle.matrix {
        let p = &m.protocol;
        out.push_str("\n## Cross-corpus perplexity\n\n");
        writeln!(
            out,
            "Rows are test sets, columns are training sets. order={} cutoff={} test_size={} seed={} smoothing={}.\n",
            p.order, p.cutoff, p.test_size, p.seed, m.smoothing
        )
        .unwrap();
        out.push_str("| test \\ train |");
        for n in &m.names {
            write!(out, " {n} |").unwrap();
        }
        out.push_str("\n|---|");
        out.push_str(&"---:|".repeat(m.names.len()));
        out.push('\n');
        for (name, row) in m.names.iter().zip(&m.cells) {
            write!(out, "| {name} |").unwrap();
            for cell in row {
                write!(out, " {} |", fixed(*cell, 1)).unwrap();
            }
            out.push('\n');
        }
        out.push_str("| #vocab |");
        for size in &m.vocab.sizes {
            write!(out, " {} |", size.map_or_else(|| DASH.into(), |s| s.to_string())).unwrap();
        }
        out.push('\n');
    }

    let pos_rows: Vec<_> = bundle
        .rows
        .iter()
        .filter_map(|r| r.pos.as_ref().map(|p| (&r.meta.name, p)))
        .collect();
    if !pos_rows.is_empty() {
        out.push_str("\n## Part-of-speech distribution\n\n");
        out.push_str("| Dataset | N | V | J | O |\n|---|---:|---:|---:|---:|\n");
        for (name, pos) in pos_rows {
            let [n, v, j, o] = pos_cells(pos);
            writeln!(out, "| {name} | {n} | {v} | {j} | {o} |").unwrap();
        }
    }

    if let Some(b) = &bundle.bias {
        out.push_str("\n## Reporting bias\n\n");
        out.push_str("| Images | Captions | Objects per image | Mentioned per caption |\n|---:|---:|---:|---:|\n");
        writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} |",
            b.image_count, b.caption_count, b.mean_objects_per_image, b.mean_mentioned_per_caption
        )
        .unwrap();
    }

    if !bundle.errors.is_empty() {
        out.push_str("\n## Failed corpora\n\n");
        for e in &bundle.errors {
            writeln!(out, "- {}: {}", e.name, e.cause).unwrap();
        }
    }
    out
}

fn csv_header(out: &mut String, bundle: &ReportBundle) {
    writeln!(out, "# langqual {}", crate::VERSION).unwrap();
    if let Some(ts) = &bundle.generated_at {
        writeln!(out, "# generated_at={ts}").unwrap();
    }
}

fn csv_files(bundle: &ReportBundle) -> Vec<Rendered> {
    let mut files = Vec::new();

    let mut t1 = String::new();
    csv_header(&mut t1, bundle);
    if let Some(bg) = &bundle.background {
        writeln!(t1, "# ppl_background={} tokens={} order={} cutoff={}", bg.name, bg.token_count, bg.order, bg.cutoff).unwrap();
    }
    t1.push_str(
        "dataset,tier,img_k,txt_k,frazier,yngve,frazier_sum,yngve_sum,vocab_k,sent_len,\
         n_conc,n_abs,pct_abs,ppl,oov_rate,abs_real,bb,config_fingerprint\n",
    );
    for row in &bundle.rows {
        let c = Table1Cells::of(row);
        writeln!(
            t1,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.meta.name,
            row.tier,
            c.img,
            c.txt,
            c.frazier,
            c.yngve,
            c.frazier_sum,
            c.yngve_sum,
            c.vocab,
            c.sent_len,
            c.conc,
            c.abs,
            c.pct_abs,
            c.ppl,
            fixed(row.background_ppl.map(|p| p.oov_rate), 4),
            c.style,
            c.bb,
            row.config_fingerprint
        )
        .unwrap();
    }
    files.push(Rendered {
        file_name: "report.csv".into(),
        contents: t1,
    });

    if let Some(m) = &bundle.matrix {
        files.push(Rendered {
            file_name: "ppl_matrix.csv".into(),
            contents: m.to_csv(),
        });
    }

    if bundle.rows.iter().any(|r| r.pos.is_some()) {
        let mut pos = String::new();
        csv_header(&mut pos, bundle);
        pos.push_str("dataset,N,V,J,O\n");
        for row in &bundle.rows {
            if let Some(p) = &row.pos {
                let [n, v, j, o] = pos_cells(p);
                writeln!(pos, "{},{n},{v},{j},{o}", row.meta.name).unwrap();
            }
        }
        files.push(Rendered {
            file_name: "pos_dist.csv".into(),
            contents: pos,
        });
    }

    if let Some(b) = &bundle.bias {
        let mut s = String::new();
        csv_header(&mut s, bundle);
        s.push_str("image_count,caption_count,mean_objects_per_image,mean_mentioned_per_caption\n");
        writeln!(
            s,
            "{},{},{:.2},{:.2}",
            b.image_count, b.caption_count, b.mean_objects_per_image, b.mean_mentioned_per_caption
        )
        .unwrap();
        files.push(Rendered {
            file_name: "bias.csv".into(),
            contents: s,
        });
    }
    files
}

/// Renders the bundle. Output order follows the input row order.
pub fn render(bundle: &ReportBundle, format: Format) -> Result<Vec<Rendered>> {
    if bundle.rows.is_empty() && bundle.matrix.is_none() && bundle.bias.is_none() {
        return Err(Error::EmptyBundle);
    }
    Ok(match format {
        Format::Markdown => vec![Rendered {
            file_name: "report.md".into(),
            contents: markdown(bundle),
        }],
        Format::Csv => csv_files(bundle),
        Format::Json => {
            let mut contents = serde_json::to_string_pretty(bundle)?;
            contents.push('\n');
            vec![Rendered {
                file_name: "report.json".into(),
                contents,
            }]
        }
    })
}

/// Stacked-bar data: `corpus<TAB>N<TAB>V<TAB>J<TAB>O`, four decimals,
/// each row summing to exactly 1.
pub fn plot_data(bundle: &ReportBundle) -> Result<String> {
    let mut out = String::from("corpus\tN\tV\tJ\tO\n");
    let mut any = false;
    for row in &bundle.rows {
        if let Some(p) = &row.pos {
            any = true;
            let [n, v, j, o] = pos_cells(p);
            writeln!(out, "{}\t{n}\t{v}\t{j}\t{o}", row.meta.name).unwrap();
        }
    }
    if any {
        Ok(out)
    } else {
        Err(Error::NoPosData)
    }
}
