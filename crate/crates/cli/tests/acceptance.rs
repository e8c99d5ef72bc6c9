//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Optional-data criteria read their inputs from environment variables and
//! skip with a notice when those are unset:
//!
//! - `LANGQUAL_BROWN_GOLD`: gold-parsed Brown sentences, one bracketed tree
//!   per line.
//! - `LANGQUAL_DENSE_ANNOTATIONS` and `LANGQUAL_DENSE_CAPTIONS`: the dense
//!   object annotations and matching captions, in the JSON-lines formats the
//!   `bias` subcommand reads.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use langqual::bias::{load_annotations, load_captions, reporting_bias};
use langqual::lexical::pos_distribution;
use langqual::lm::{count_ngrams, perplexity, train, NgramModel, BOS, EOS, UNK};
use langqual::report::{metrics_row, MetricConfig};
use langqual::syntax::{complexity_stats, frazier_sentence, parse_tree, yngve_sentence};
use langqual::{
    cross_ppl, plot_data, AbsConcStats, Corpus, DenseAnnotation, LoadOptions, Lexicon, ObjectAnnotation,
    Protocol, ReportBundle, Sentence, StemMode, TagMap,
};
use langqual_testkit::oracles::brute_force_counts;
use langqual_testkit::rand::seq::SliceRandom;
use langqual_testkit::rand::Rng;
use langqual_testkit::{rng, synth};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::{Fail, Pass, Skip};

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn words_of(c: &Corpus) -> Vec<Vec<String>> {
    c.word_sequences()
        .map(|s| s.into_iter().map(|w| w.into_owned()).collect())
        .collect()
}

/// (dataset, #Conc, #Abs, printed %Abs) from published dataset statistics.
const PUBLISHED: [(&str, u64, u64, f64); 11] = [
    ("Brown", 40411, 7264, 15.24),
    ("SBU", 243940, 9495, 3.74),
    ("Deja", 34581, 3714, 9.70),
    ("Pascal", 2741, 591, 17.74),
    ("Flickr30K", 17214, 3033, 14.98),
    ("COCO", 21607, 3218, 12.96),
    ("Clipart", 2202, 482, 17.96),
    ("VDC", 11795, 1741, 12.86),
    ("VQA", 5019, 1194, 19.22),
    ("CQA", 8501, 1636, 16.14),
    ("VML", 9220, 1914, 17.19),
];

fn c1_pct_abs() -> Outcome {
    let mut worst: (f64, &str) = (0.0, "");
    for (name, conc, abs, printed) in PUBLISHED {
        let s = AbsConcStats::from_counts(conc as usize, abs as usize);
        let identity = (s.pct_abstract * (conc + abs) as f64 - abs as f64).abs();
        if identity > 1e-9 {
            return Fail(format!("{name}: identity off by {identity:e}"));
        }
        let diff = (s.pct_abstract * 100.0 - printed).abs();
        if diff > worst.0 {
            worst = (diff, name);
        }
    }
    check(
        worst.0 <= 0.01,
        format!("{} rows, max |recomputed - printed| = {:.4} pp ({})", PUBLISHED.len(), worst.0, worst.1),
    )
}

fn c2_syntax_fixtures() -> Outcome {
    let cases = [
        ("(S (NP (DT the) (NN dog)) (VP (VBZ runs)))", 1.0, Some(1.5)),
        ("(S (NN dog))", 0.0, Some(2.5)),
        ("(S (A a) (S (B b) (S (C c))))", 2.0 / 3.0, None),
    ];
    for (src, yngve, frazier) in cases {
        let t = parse_tree(src, 1).expect("fixture parses");
        let y = yngve_sentence(&t).expect("valid tree");
        if y != yngve {
            return Fail(format!("yngve {src} = {y}, expected {yngve}"));
        }
        if let Some(f_expected) = frazier {
            let f = frazier_sentence(&t).expect("valid tree");
            if f != f_expected {
                return Fail(format!("frazier {src} = {f}, expected {f_expected}"));
            }
        }
    }
    Pass("dog-runs 1.0/1.5, one-word 0.0/2.5, right-branching 2/3: exact".into())
}

fn c3_brown_gold() -> Outcome {
    let Some(path) = std::env::var_os("LANGQUAL_BROWN_GOLD") else {
        return Skip("gold-parsed Brown subset not available; set LANGQUAL_BROWN_GOLD to a bracketed tree file".into());
    };
    let opts = LoadOptions {
        lowercase: false,
        ..LoadOptions::default()
    };
    let corpus = match langqual::load_parsed(&path, &opts) {
        Ok(c) => c,
        Err(e) => return Fail(format!("cannot load {}: {e}", Path::new(&path).display())),
    };
    let s = complexity_stats(&corpus).expect("parsed corpus");
    let f_rel = (s.frazier_sum_mean - 15.26).abs() / 15.26;
    let y_rel = (s.yngve_sum_mean - 58.48).abs() / 58.48;
    check(
        f_rel <= 0.15 && y_rel <= 0.15,
        format!(
            "{} sentences: frazier_sum_mean {:.2} (ref 15.26, {:+.1}%), yngve_sum_mean {:.2} (ref 58.48, {:+.1}%)",
            s.sentence_count,
            s.frazier_sum_mean,
            100.0 * (s.frazier_sum_mean / 15.26 - 1.0),
            s.yngve_sum_mean,
            100.0 * (s.yngve_sum_mean / 58.48 - 1.0)
        ),
    )
}

fn c4_count_oracle() -> Outcome {
    let mut tables = 0;
    for seed in 0..200u64 {
        let mut r = rng(1000 + seed);
        let types = r.random_range(1..60);
        let lines = synth::random_lines(&mut r, types, 1000);
        let c = synth::raw_corpus("counts", &lines);
        let words = words_of(&c);
        for order in 1..=5 {
            let got = count_ngrams(&c, order).expect("valid order");
            if got.tables != brute_force_counts(&words, order) {
                return Fail(format!("corpus seed {seed}, order {order}: tables differ"));
            }
            tables += 1;
        }
    }
    Pass(format!("200 corpora x orders 1-5 ({tables} table sets) equal the enumeration oracle"))
}

fn outcomes(model: &NgramModel) -> Vec<String> {
    let mut out: Vec<String> = model.vocab().to_vec();
    out.push(UNK.into());
    out.push(EOS.into());
    out
}

fn c5_normalization() -> Outcome {
    let mut worst = 0.0f64;
    let mut contexts = 0;
    for seed in 0..20u64 {
        let mut r = rng(2000 + seed);
        let order = r.random_range(1..=5);
        let cutoff = r.random_range(1..=3);
        let types = r.random_range(5..120);
        let c = synth::raw_corpus("norm", &synth::random_lines(&mut r, types, 1500));
        let model = train(&c, order, cutoff).expect("trains");
        let outs = outcomes(&model);
        let mut pool: Vec<String> = model.vocab().to_vec();
        pool.push("unseen-word".into());
        // contexts seen in training are the ones with stored entries
        let seen: Vec<Vec<String>> = words_of(&c)
            .into_iter()
            .flat_map(|s| {
                let mut padded = vec![BOS.to_string(); order - 1];
                padded.extend(s);
                (0..padded.len().saturating_sub(order - 1))
                    .map(|i| padded[i..i + order - 1].to_vec())
                    .collect::<Vec<_>>()
            })
            .collect();
        for k in 0..1000 {
            let ctx: Vec<String> = if k % 2 == 0 && !seen.is_empty() {
                seen[r.random_range(0..seen.len())].clone()
            } else {
                let len = r.random_range(0..order);
                let bos = r.random_range(0..=len);
                (0..len)
                    .map(|i| if i < bos { BOS.to_string() } else { pool[r.random_range(0..pool.len())].clone() })
                    .collect()
            };
            let ctx: Vec<&str> = ctx.iter().map(String::as_str).collect();
            let total: f64 = outs.iter().map(|w| model.log2_prob(&ctx, w).exp2()).sum();
            worst = worst.max((total - 1.0).abs());
            contexts += 1;
        }
    }
    check(
        worst <= 1e-6,
        format!("{contexts} contexts over 20 models, max |sum - 1| = {worst:.2e}"),
    )
}

fn c6_perplexity_identities() -> Outcome {
    let vocab = synth::vocab("u", 97);
    let model = NgramModel::uniform(vocab.iter().cloned());
    let v = model.outcome_count() as f64;
    let mut r = rng(6);
    let mut test = synth::zipf_lines(&mut r, &vocab, 200, 1..=15, 1.1);
    test.push("outside the vocabulary".into());
    let ppl = perplexity(&model, &synth::raw_corpus("uniform", &test)).expect("scores").perplexity;
    let rel = (ppl - v).abs() / v;
    if rel > 1e-6 {
        return Fail(format!("uniform model ppl {ppl} vs V = {v}"));
    }

    let mut wins = 0;
    let mut margin = f64::INFINITY;
    for seed in 0..20u64 {
        let mut r = rng(600 + seed);
        let words = synth::vocab("w", 400);
        let own_lines = synth::markov_lines(&mut r, &words, 1500, 4..=14, 3);
        let mut other_order = words.clone();
        other_order.shuffle(&mut r);
        let other_lines = synth::zipf_lines(&mut r, &other_order, 1500, 4..=14, 1.0);
        let own = synth::raw_corpus("own", &own_lines);
        let model = train(&own, 5, 3).expect("trains");
        let a = perplexity(&model, &own).expect("scores").perplexity;
        let b = perplexity(&model, &synth::raw_corpus("held", &other_lines)).expect("scores").perplexity;
        if a < b {
            wins += 1;
        }
        margin = margin.min(b / a);
    }
    check(
        wins == 20,
        format!("uniform ppl = V = {v} (rel err {rel:.1e}); training < held-out in {wins}/20 seeds (min ratio {margin:.2})"),
    )
}

fn c7_diagonal_dominance() -> Outcome {
    let corpora: Vec<Corpus> = (0..5u64)
        .map(|i| {
            let prefix = format!("v{i}x");
            let words = synth::vocab(&prefix, 300);
            let lines = synth::markov_lines(&mut rng(700 + i), &words, 10_000, 4..=14, 4);
            synth::raw_corpus(&format!("synthetic{i}"), &lines)
        })
        .collect();
    let protocol = Protocol {
        test_size: 2_000,
        ..Protocol::default()
    };
    let (m, _) = match cross_ppl(&corpora, &protocol) {
        Ok(x) => x,
        Err(e) => return Fail(format!("cross_ppl failed: {e}")),
    };
    let cell = |i: usize, j: usize| m.cells[i][j].unwrap_or(f64::NAN);
    let mut max_diag = 0.0f64;
    let mut min_off = f64::INFINITY;
    for i in 0..5 {
        max_diag = max_diag.max(cell(i, i));
        for j in 0..5 {
            if i == j {
                continue;
            }
            min_off = min_off.min(cell(i, j));
            if !(cell(i, j) > cell(i, i) && cell(i, j) > cell(j, j)) {
                return Fail(format!(
                    "cell[{i}][{j}] = {:.1} not above diagonals {:.1}, {:.1}",
                    cell(i, j),
                    cell(i, i),
                    cell(j, j)
                ));
            }
        }
    }
    Pass(format!(
        "5 x 10k-sentence disjoint corpora (order 5, cutoff 3, test 2000): max diagonal {max_diag:.1}, min off-diagonal {min_off:.1}"
    ))
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_langqual"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?} exited {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))
    }
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .expect("output dir exists")
        .map(|e| {
            let e = e.expect("readable entry");
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).expect("readable file"))
        })
        .collect()
}

fn c8_determinism() -> Outcome {
    let manifest = fixtures().join("manifest.toml");
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut runs = Vec::new();
    for run in ["first", "second"] {
        let out = tmp.path().join(run);
        let out_s = out.to_str().expect("utf-8 path");
        let m = manifest.to_str().expect("utf-8 path");
        for cmd in ["analyze", "ppl-matrix"] {
            if let Err(e) = run_cli(&["--manifest", m, "--out-dir", out_s, cmd]) {
                return Fail(e);
            }
        }
        runs.push(dir_contents(&out));
    }
    let names: Vec<&String> = runs[0].keys().collect();
    if runs[0] != runs[1] {
        let differing: Vec<&String> = runs[0]
            .iter()
            .filter(|(k, v)| runs[1].get(*k) != Some(*v))
            .map(|(k, _)| k)
            .collect();
        return Fail(format!("outputs differ: {differing:?}"));
    }
    check(
        names.iter().any(|n| *n == "ppl_matrix.csv") && names.iter().any(|n| *n == "report.json"),
        format!("{} files byte-identical across two runs", names.len()),
    )
}

fn mentions(anns: &[DenseAnnotation], caps: &BTreeMap<String, Vec<Sentence>>) -> f64 {
    reporting_bias(anns, caps, StemMode::None)
        .expect("valid fixture")
        .mean_mentioned_per_caption
}

fn c9_reporting_bias() -> Outcome {
    let f = fixtures();
    let anns = load_annotations(f.join("bias_annotations.jsonl")).expect("fixture");
    let caps = load_captions(f.join("bias_captions.jsonl")).expect("fixture");
    let s = reporting_bias(&anns, &caps, StemMode::None).expect("fixture");
    if (s.mean_objects_per_image, s.mean_mentioned_per_caption) != (3.0, 1.5) {
        return Fail(format!(
            "fixture gave ({}, {}), expected (3.0, 1.5)",
            s.mean_objects_per_image, s.mean_mentioned_per_caption
        ));
    }

    const WORDS: [&str; 8] = ["dog", "man", "red", "ball", "tree", "a", "on", "hat"];
    let mut r = rng(9);
    for trial in 0..1000 {
        let phrase = |r: &mut langqual_testkit::rand::rngs::StdRng, n: usize| {
            (0..r.random_range(1..=n)).map(|_| WORDS[r.random_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
        };
        let mut anns: Vec<DenseAnnotation> = (0..r.random_range(1..4))
            .map(|i| DenseAnnotation {
                image_id: format!("i{i}"),
                objects: (0..r.random_range(0..5))
                    .map(|j| ObjectAnnotation {
                        object_id: format!("o{j}"),
                        is_top_level: r.random_bool(0.8),
                        labels: vec![phrase(&mut r, 2)],
                    })
                    .collect(),
            })
            .collect();
        let caps: BTreeMap<String, Vec<Sentence>> = anns
            .iter()
            .map(|a| {
                let n = r.random_range(1..4);
                (a.image_id.clone(), (0..n).map(|_| Sentence::from_text(&phrase(&mut r, 8))).collect())
            })
            .collect();
        let before = mentions(&anns, &caps);
        for a in &mut anns {
            for o in &mut a.objects {
                if r.random_bool(0.5) {
                    o.labels.push(phrase(&mut r, 2));
                }
            }
        }
        let after = mentions(&anns, &caps);
        if after < before {
            return Fail(format!("trial {trial}: mentions fell from {before} to {after} after adding labels"));
        }
    }
    let mut detail = String::from("fixture (3.0, 1.5) exact; label monotonicity over 1000 random fixtures");
    match (std::env::var_os("LANGQUAL_DENSE_ANNOTATIONS"), std::env::var_os("LANGQUAL_DENSE_CAPTIONS")) {
        (Some(a), Some(c)) => {
            let anns = match load_annotations(&a) {
                Ok(x) => x,
                Err(e) => return Fail(format!("dense annotations: {e}")),
            };
            let caps = match load_captions(&c) {
                Ok(x) => x,
                Err(e) => return Fail(format!("dense captions: {e}")),
            };
            let s = match reporting_bias(&anns, &caps, StemMode::None) {
                Ok(s) => s,
                Err(e) => return Fail(format!("dense corpus: {e}")),
            };
            let ok = (s.mean_objects_per_image / 8.04 - 1.0).abs() <= 0.15
                && (s.mean_mentioned_per_caption / 2.7 - 1.0).abs() <= 0.15;
            let msg = format!(
                "{detail}; dense corpus ({:.2}, {:.2}) vs (8.04, 2.7)",
                s.mean_objects_per_image, s.mean_mentioned_per_caption
            );
            return check(ok, msg);
        }
        _ => detail.push_str(
            "; dense-annotation corpus not available (set LANGQUAL_DENSE_ANNOTATIONS and LANGQUAL_DENSE_CAPTIONS), corpus-scale check skipped",
        ),
    }
    Pass(detail)
}

fn tagged(tags: &[&str]) -> Corpus {
    let line: Vec<String> = tags.iter().enumerate().map(|(i, t)| format!("w{i}_{t}")).collect();
    Corpus::tagged_from_str(&line.join(" "), &LoadOptions::default()).expect("valid tagged line")
}

fn c10_pos_distribution() -> Outcome {
    let tags = TagMap::default();
    let fixtures: [(&[&str], [f64; 4]); 3] = [
        (&["NN", "VBZ", "JJ", "DT"], [0.25, 0.25, 0.25, 0.25]),
        (&["NNS", "NNP", "NN"], [1.0, 0.0, 0.0, 0.0]),
        (&["MD", "VB"], [0.0, 1.0, 0.0, 0.0]),
    ];
    for (t, expected) in fixtures {
        let got = pos_distribution(&tagged(t), &tags).expect("tagged corpus").proportions();
        if got != expected {
            return Fail(format!("{t:?} gave {got:?}, expected {expected:?}"));
        }
    }

    let lexicon = Lexicon::bundled();
    let config = MetricConfig {
        lexicon: &lexicon,
        tags: &tags,
        background: None,
        extra: serde_json::Value::Null,
    };
    const TAGS: [&str; 12] = ["NN", "NNS", "VBZ", "VBD", "MD", "JJ", "DT", "IN", "PRP", "RB", ".", "CC"];
    let mut rows = Vec::new();
    let mut r = rng(10);
    for i in 0..300 {
        let n = r.random_range(1..40);
        let t: Vec<&str> = (0..n).map(|_| TAGS[r.random_range(0..TAGS.len())]).collect();
        let c = tagged(&t).with_meta(langqual::CorpusMeta::new(&format!("c{i}")).expect("valid name"));
        rows.push(metrics_row(&c, &config).expect("metrics"));
    }
    let tsv = plot_data(&ReportBundle::new(rows)).expect("pos rows");
    let mut worst = 0.0f64;
    for line in tsv.lines().skip(1) {
        let sum: f64 = line.split('\t').skip(1).map(|x| x.parse::<f64>().expect("number")).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    check(
        worst <= 0.0005,
        format!("3 mapping fixtures exact; 300 rendered rows, max |sum - 1| = {worst:.1e}"),
    )
}

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: 1, title: "%Abs identity on published counts", budget: Duration::from_secs(1), run: c1_pct_abs },
        Criterion { id: 2, title: "syntax fixtures", budget: Duration::from_secs(1), run: c2_syntax_fixtures },
        Criterion { id: 3, title: "Brown gold-parse complexity anchor", budget: Duration::from_secs(120), run: c3_brown_gold },
        Criterion { id: 4, title: "n-gram counts equal enumeration oracle", budget: Duration::from_secs(30), run: c4_count_oracle },
        Criterion { id: 5, title: "LM normalization sweep", budget: Duration::from_secs(60), run: c5_normalization },
        Criterion { id: 6, title: "perplexity identities", budget: Duration::from_secs(30), run: c6_perplexity_identities },
        Criterion { id: 7, title: "cross-matrix diagonal dominance", budget: Duration::from_secs(120), run: c7_diagonal_dominance },
        Criterion { id: 8, title: "CLI rerun determinism", budget: Duration::from_secs(30), run: c8_determinism },
        Criterion { id: 9, title: "reporting-bias fixture and monotonicity", budget: Duration::from_secs(30), run: c9_reporting_bias },
        Criterion { id: 10, title: "POS distribution mapping and rounding", budget: Duration::from_secs(1), run: c10_pos_distribution },
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    println!("acceptance: {} criteria", criteria.len());
    for c in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| c.title.contains(f.as_str()) || *f == c.id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (tag, detail) = match outcome {
            Pass(d) if elapsed > c.budget => ("FAIL", format!("{d}; exceeded {:?} budget", c.budget)),
            Pass(d) => ("PASS", d),
            Fail(d) => ("FAIL", d),
            Skip(d) => ("SKIP", d),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} criterion {:>2}: {} [{:.2}s / {}s] {detail}",
            c.id,
            c.title,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    } else {
        println!("acceptance: ok");
        ExitCode::SUCCESS
    }
}
