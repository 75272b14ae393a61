use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use termalign::adversarial::{adversarial_then_refine, AdvConfig};
use termalign::alignment::{
    align_with_anchors, extract_anchors, iterative_procrustes, load_alignment, save_alignment,
    save_alignment_binary, AlignmentMatrix, AnchorDictionary, NormalizePolicy, PreparedSpace, Provenance, Translator,
    DEFAULT_REFINE_ITERATIONS, DEFAULT_VOCAB_CAP,
};
use termalign::corpus::{
    build_section_corpora, read_documents, HeaderSet, PreprocessConfig, StopwordSet, TokenizedCorpus,
    DEFAULT_DOCUMENT_DELIMITER,
};
use termalign::embeddings::{
    load_vectors, save_binary, save_text, train_skipgram_with, EmbeddingSpace, TrainConfig,
};
use termalign::evaluation::{
    neighbor_table, pca_project, precision_at_k, GoldDictionary, LabeledPoints, NeighborTable, DEFAULT_KS,
};
use termalign::linalg::Matrix;
use termalign::metrics::{Metric, DEFAULT_CSLS_K};
use termalign::profile;
use termalign::synthetic::make_rotation_pair;
use termalign::{Error, Result};

use crate::config::{ConfigFile, List, Resolver};
use crate::logging::event;
use crate::{
    AlignArgs, EvaluateArgs, ExportPcaArgs, PipelineArgs, PreprocessArgs, RetrieveArgs, SpaceArgs, SynthArgs, TrainArgs,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Procrustes,
    Adversarial,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "procrustes" => Ok(Method::Procrustes),
            "adversarial" => Ok(Method::Adversarial),
            _ => Err(format!("unknown method {s:?} (procrustes|adversarial)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Procrustes => "procrustes",
            Method::Adversarial => "adversarial",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Tsv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "text" => Ok(TableFormat::Text),
            "tsv" => Ok(TableFormat::Tsv),
            "json" => Ok(TableFormat::Json),
            _ => Err(format!("unknown format {s:?} (text|tsv|json)")),
        }
    }
}

/// `<path>.meta.json` next to an artifact without a metadata slot of its own.
fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_sidecar(path: &Path, meta: &Value) -> Result<()> {
    let p = sidecar_path(path);
    let text = serde_json::to_string_pretty(meta).expect("json") + "\n";
    fs::write(&p, text).map_err(|e| Error::Io { path: p, source: e })
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn save_vectors(space: &EmbeddingSpace, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "bin") {
        save_binary(space, path)
    } else {
        save_text(space, path)
    }
}

// ---------------------------------------------------------------- preprocess

fn preprocess_config(
    r: &mut Resolver<'_>,
    stem: Option<bool>,
    lowercase: Option<bool>,
    stopwords: Option<String>,
) -> Result<PreprocessConfig> {
    let stem = r.pick("stem", stem, true)?;
    let lowercase = r.pick("lowercase", lowercase, true)?;
    let stopwords = match r.pick("stopwords", stopwords, "english".to_string())?.as_str() {
        "english" => StopwordSet::english(),
        "none" => StopwordSet::empty(),
        file => StopwordSet::from_file(Path::new(file))?,
    };
    Ok(PreprocessConfig {
        lowercase,
        stem,
        stopwords,
        ..PreprocessConfig::default()
    })
}

fn tri_flag(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    if a.sections.len() != a.output.len() {
        return Err(Error::Config(format!(
            "{} --sections groups but {} --output files",
            a.sections.len(),
            a.output.len()
        )));
    }
    let config = preprocess_config(
        &mut r,
        tri_flag(a.stem, a.no_stem),
        tri_flag(a.lowercase, a.no_lowercase),
        a.stopwords.clone(),
    )?;
    let delimiter = r.pick("delimiter", a.delimiter.clone(), DEFAULT_DOCUMENT_DELIMITER.to_string())?;
    r.resolved.insert("input".into(), a.input.display().to_string().into());
    let headers = HeaderSet::discharge_summary();
    let groups: Vec<Vec<String>> = a
        .sections
        .iter()
        .map(|g| g.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
        .collect();
    for name in groups.iter().flatten() {
        if !headers.knows(name) {
            log::warn!(
                "unknown section {name:?}; known sections: {}",
                headers.canonical_names().join(", ")
            );
        }
    }
    r.resolved.insert("sections".into(), json!(groups));
    let docs = read_documents(&a.input, &delimiter)?;
    event(json!({"documents": docs.len()}));
    let corpora = build_section_corpora(&docs, &headers, &groups, &config);
    let run = r.into_value("preprocess");
    for ((corpus, path), group) in corpora.iter().zip(&a.output).zip(&groups) {
        corpus.write_text(path)?;
        event(json!({
            "output": path.display().to_string(),
            "sections": group,
            "sentences": corpus.sentences.len(),
            "tokens": corpus.total_tokens(),
        }));
        write_sidecar(
            path,
            &json!({
                "run": run,
                "preprocess": config.describe(),
                "config_fingerprint": corpus.config_fingerprint,
                "sections": group,
                "sentences": corpus.sentences.len(),
                "tokens": corpus.total_tokens(),
                "types": corpus.token_counts.len(),
            }),
        )?;
        println!("{}: {} sentences, {} tokens", path.display(), corpus.sentences.len(), corpus.total_tokens());
    }
    Ok(())
}

// --------------------------------------------------------------------- train

fn train_config(r: &mut Resolver<'_>, a: &TrainArgs, base: TrainConfig) -> Result<TrainConfig> {
    Ok(TrainConfig {
        mode: r.pick("mode", a.mode, base.mode)?,
        dim: r.pick("dim", a.dim, base.dim)?,
        window: r.pick("window", a.window, base.window)?,
        epochs: r.pick("epochs", a.epochs, base.epochs)?,
        learning_rate: r.pick("lr", a.lr, base.learning_rate)?,
        min_count: r.pick("min-count", a.min_count, base.min_count)?,
        negatives_per_positive: r.pick("negatives", a.negatives, base.negatives_per_positive)?,
        subsample_threshold: r.pick("subsample", a.subsample, base.subsample_threshold)?,
        n_min: r.pick("n-min", a.n_min, base.n_min)?,
        n_max: r.pick("n-max", a.n_max, base.n_max)?,
        bucket_count: r.pick("buckets", a.buckets, base.bucket_count)?,
        seed: r.seed(a.seed)?,
    })
}

fn train_one(corpus_path: &Path, output: &Path, config: &TrainConfig, run: &Value) -> Result<EmbeddingSpace> {
    let corpus = TokenizedCorpus::read_text(corpus_path)?;
    let trained = train_skipgram_with(&corpus, config, |e| {
        event(json!({"stage": "train", "corpus": corpus_path.display().to_string(), "epoch_log": e}))
    })?;
    save_vectors(&trained.space, output)?;
    write_sidecar(
        output,
        &json!({
            "run": run,
            "train": config,
            "corpus": corpus_path.display().to_string(),
            "corpus_fingerprint": corpus.config_fingerprint,
            "vocabulary": trained.space.len(),
            "log": trained.log,
        }),
    )?;
    println!(
        "{}: {} words, dim {}, final loss {:.4}",
        output.display(),
        trained.space.len(),
        trained.space.dim(),
        trained.log.last().map_or(f64::NAN, |l| l.mean_loss)
    );
    Ok(trained.space)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let config = train_config(&mut r, &a, TrainConfig::default())?;
    config.validate()?;
    r.resolved.insert("corpus".into(), a.corpus.display().to_string().into());
    r.resolved.insert("output".into(), a.output.display().to_string().into());
    let run = r.into_value("train");
    train_one(&a.corpus, &a.output, &config, &run)?;
    Ok(())
}

// --------------------------------------------------------------------- align

struct Spaces {
    src: EmbeddingSpace,
    tgt: EmbeddingSpace,
    normalize: NormalizePolicy,
    csls_k: usize,
    vocab_cap: usize,
}

fn load_spaces(r: &mut Resolver<'_>, a: &SpaceArgs) -> Result<Spaces> {
    let normalize = r.pick("normalize", a.normalize, NormalizePolicy::default())?;
    let csls_k = r.pick("csls-k", a.csls_k, DEFAULT_CSLS_K)?;
    let vocab_cap = r.pick("vocab-cap", a.vocab_cap, DEFAULT_VOCAB_CAP)?;
    if csls_k == 0 || vocab_cap == 0 {
        return Err(Error::Config("--csls-k and --vocab-cap must be at least 1".into()));
    }
    r.resolved.insert("src".into(), a.src.display().to_string().into());
    r.resolved.insert("tgt".into(), a.tgt.display().to_string().into());
    let src = load_vectors(&a.src)?;
    let tgt = load_vectors(&a.tgt)?;
    if src.dim() != tgt.dim() {
        return Err(Error::InvalidInput(format!(
            "source dimension {} differs from target dimension {}",
            src.dim(),
            tgt.dim()
        )));
    }
    Ok(Spaces {
        src,
        tgt,
        normalize,
        csls_k,
        vocab_cap,
    })
}

fn adv_config(r: &mut Resolver<'_>, a: &AlignArgs, seed: u64, vocab_cap: usize, csls_k: usize) -> Result<AdvConfig> {
    let d = AdvConfig::default();
    Ok(AdvConfig {
        epochs: r.pick("adv-epochs", a.adv_epochs, d.epochs)?,
        steps_per_epoch: r.pick("adv-steps", a.adv_steps, d.steps_per_epoch)?,
        batch_size: r.pick("adv-batch", a.adv_batch, d.batch_size)?,
        lr_discriminator: r.pick("adv-lr-d", a.adv_lr_d, d.lr_discriminator)?,
        lr_generator: r.pick("adv-lr-g", a.adv_lr_g, d.lr_generator)?,
        discriminator_steps: r.pick("adv-dis-steps", a.adv_dis_steps, d.discriminator_steps)?,
        smoothing: r.pick("adv-smoothing", a.adv_smoothing, d.smoothing)?,
        orthogonalization_beta: r.pick("adv-beta", a.adv_beta, d.orthogonalization_beta)?,
        hidden: r.pick("adv-hidden", a.adv_hidden, d.hidden)?,
        vocab_cap,
        csls_k,
        seed,
        ..d
    })
}

fn alignment_summary(w: &AlignmentMatrix) -> Value {
    json!({
        "orthogonal": w.orthogonal,
        "orthogonality_error": w.orthogonality_error(),
        "residual": w.residual,
        "iterations_used": w.iterations_used,
        "ambiguous": w.ambiguous,
        "status": w.status,
    })
}

pub fn align(a: AlignArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let method = r.pick("method", a.method, Method::Procrustes)?;
    let iterations = r.pick("refine-iters", a.refine_iters, DEFAULT_REFINE_ITERATIONS)?;
    if iterations == 0 {
        return Err(Error::Config("--refine-iters must be at least 1".into()));
    }
    let anchors_arg = r.pick("anchors", a.anchors.clone(), "auto".to_string())?;
    let max_anchors = r.pick_opt("max-anchors", a.max_anchors)?;
    let seed = r.seed(a.seed)?;
    let s = load_spaces(&mut r, &a.spaces)?;
    let adv = match method {
        Method::Adversarial => Some(adv_config(&mut r, &a, seed, s.vocab_cap, s.csls_k)?),
        Method::Procrustes => None,
    };
    if let Some(c) = &adv {
        c.validate()?;
    }
    r.resolved.insert("output".into(), a.output.display().to_string().into());
    let run = r.into_value("align");

    let src = PreparedSpace::new(&s.src, s.normalize);
    let tgt = PreparedSpace::new(&s.tgt, s.normalize);
    let (w, provenance, extra) = match (method, adv) {
        (Method::Procrustes, _) => {
            let anchors = if anchors_arg == "auto" {
                extract_anchors(&s.src, &s.tgt, max_anchors)
            } else {
                let d = AnchorDictionary::read_tsv(Path::new(&anchors_arg), Provenance::File)?;
                let limited: Vec<_> = d.pairs().iter().take(max_anchors.unwrap_or(usize::MAX)).cloned().collect();
                AnchorDictionary::new(limited, Provenance::File)
            };
            if anchors.is_empty() {
                return Err(Error::NoAnchors(
                    "no anchors: the two vocabularies share no identical strings".into(),
                ));
            }
            event(json!({"stage": "anchors", "pairs": anchors.len(), "provenance": anchors.provenance}));
            let w = if iterations == 1 {
                align_with_anchors(&src, &tgt, &anchors)?
            } else {
                iterative_procrustes(&src, &tgt, &anchors, iterations, s.vocab_cap, s.csls_k)?
            };
            (w, anchors.provenance, json!({"anchors": anchors.len()}))
        }
        (Method::Adversarial, Some(cfg)) => {
            let out = adversarial_then_refine(&src, &tgt, &cfg, iterations, s.vocab_cap)?;
            let mut disc_path = a.output.as_os_str().to_owned();
            disc_path.push(".disc.bin");
            out.adversarial.discriminator.save(Path::new(&disc_path))?;
            let extra = json!({
                "adversarial": alignment_summary(&out.adversarial.alignment),
                "best_epoch": out.adversarial.best_epoch,
                "epoch_log": out.adversarial.log,
            });
            (out.refined, Provenance::Refined, extra)
        }
        (Method::Adversarial, None) => unreachable!("config built above"),
    };
    for h in &w.history {
        event(json!({"stage": "refine", "iteration": h.iteration, "dictionary_size": h.dictionary_size, "residual": h.residual}));
    }
    let meta = json!({"run": run, "provenance": provenance, "method": method.to_string(), "details": extra});
    save_alignment(&w, &meta, &a.output)?;
    let mut bin = a.output.as_os_str().to_owned();
    bin.push(".bin");
    save_alignment_binary(&w, &meta, Path::new(&bin))?;
    event(json!({"stage": "align", "result": alignment_summary(&w)}));
    println!(
        "{}: d={} orthogonal={} residual={:.6} iterations={} status={}",
        a.output.display(),
        w.dim(),
        w.orthogonal,
        w.residual,
        w.iterations_used,
        serde_json::to_value(w.status).expect("json").as_str().unwrap_or_default()
    );
    Ok(())
}

// ------------------------------------------------------------ evaluate & co

fn load_map(map: Option<&Path>, d: usize) -> Result<AlignmentMatrix> {
    match map {
        None => Ok(AlignmentMatrix::identity(d)),
        Some(p) => {
            let w = load_alignment(p)?.alignment;
            if w.dim() != d {
                return Err(Error::InvalidInput(format!("map is {0}x{0} but spaces have dimension {d}", w.dim())));
            }
            Ok(w)
        }
    }
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let ks = r.pick("k", a.k.clone(), List(DEFAULT_KS.to_vec()))?.0;
    let metric = r.pick("metric", a.metric, Metric::default())?;
    let normalize_gold = r.pick("normalize-gold", a.normalize_gold.then_some(true), false)?;
    let s = load_spaces(&mut r, &a.spaces)?;
    r.resolved.insert("gold".into(), a.gold.display().to_string().into());
    r.resolved.insert("map".into(), json!(a.map.as_ref().map(|p| p.display().to_string())));
    let run = r.into_value("evaluate");
    let mut gold = GoldDictionary::read_tsv(&a.gold)?;
    if normalize_gold {
        gold = gold.normalized(&PreprocessConfig::default());
    }
    let w = load_map(a.map.as_deref(), s.src.dim())?;
    let src = PreparedSpace::new(&s.src, s.normalize);
    let tgt = PreparedSpace::new(&s.tgt, s.normalize);
    let translator = Translator::new(&w, &src, &tgt, metric, s.csls_k, s.vocab_cap)?;
    let report = precision_at_k(&translator, &gold, &ks, run)?;
    if let Some(path) = &a.report {
        write_file(path, serde_json::to_string_pretty(&report).expect("json") + "\n")?;
    }
    event(json!({
        "stage": "evaluate",
        "precision_at": report.precision_at,
        "precision_at_all_gold": report.precision_at_all_gold,
        "evaluated": report.evaluated,
        "skipped": report.skipped.len(),
    }));
    println!("{}", report.summary_line());
    Ok(())
}

pub fn retrieve(a: RetrieveArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let k = r.pick("k", a.k, 10usize)?;
    if k == 0 {
        return Err(Error::Config("--k must be at least 1".into()));
    }
    let metric = r.pick("metric", a.metric, Metric::default())?;
    let s = load_spaces(&mut r, &a.spaces)?;
    let mut queries: Vec<String> = a.query.iter().flat_map(|l| l.0.iter().cloned()).collect();
    if a.normalize_query {
        let cfg = PreprocessConfig::default();
        queries = queries.iter().map(|q| cfg.normalize_term(q)).collect();
    }
    r.resolved.insert("query".into(), json!(queries));
    let run = r.into_value("retrieve");
    let w = load_map(a.map.as_deref(), s.src.dim())?;
    let src = PreparedSpace::new(&s.src, s.normalize);
    let tgt = PreparedSpace::new(&s.tgt, s.normalize);
    let translator = Translator::new(&w, &src, &tgt, metric, s.csls_k, s.vocab_cap)?;
    let table = neighbor_table(&translator, &queries, k)?;
    let found: Vec<&str> = table
        .columns
        .iter()
        .filter(|c| c.neighbors.is_some())
        .map(|c| c.query.as_str())
        .collect();
    let missing: Vec<&str> = table
        .columns
        .iter()
        .filter(|c| c.neighbors.is_none())
        .map(|c| c.query.as_str())
        .collect();
    if !missing.is_empty() {
        log::warn!("queries not found in the source space: {}", missing.join(", "));
    }
    // an all-OOV request yields an empty table rather than a column of markers
    let shown = if found.is_empty() { NeighborTable { k, columns: Vec::new() } } else { table };
    if let Some(path) = &a.output {
        write_file(path, shown.to_tsv())?;
        write_sidecar(path, &json!({"run": run, "metric": metric}))?;
    }
    match a.format {
        crate::commands::TableFormat::Text => print!("{}", shown.to_text()),
        crate::commands::TableFormat::Tsv => print!("{}", shown.to_tsv()),
        crate::commands::TableFormat::Json => println!("{}", serde_json::to_string(&shown).expect("json")),
    }
    Ok(())
}

fn read_terms(path: &Path) -> Result<Vec<(bool, String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').map(str::trim).collect();
        let is_src = match f[0] {
            "src" => true,
            "tgt" => false,
            _ => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: "first column must be \"src\" or \"tgt\"".into(),
                })
            }
        };
        let (word, label) = match f.as_slice() {
            [side, w] => (w.to_string(), side.to_string()),
            [_, w, l] => (w.to_string(), l.to_string()),
            _ => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    message: "expected \"src|tgt<TAB>word[<TAB>label]\"".into(),
                })
            }
        };
        out.push((is_src, word, label));
    }
    Ok(out)
}

pub fn export_pca(a: ExportPcaArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let s = load_spaces(&mut r, &a.spaces)?;
    r.resolved.insert("terms".into(), a.terms.display().to_string().into());
    r.resolved.insert("dims".into(), a.dims.into());
    let run = r.into_value("export-pca");
    let w = load_map(a.map.as_deref(), s.src.dim())?;
    let src = PreparedSpace::new(&s.src, s.normalize);
    let tgt = PreparedSpace::new(&s.tgt, s.normalize);
    let mut sets: Vec<LabeledPoints> = Vec::new();
    for (is_src, word, label) in read_terms(&a.terms)? {
        let v = if is_src {
            src.vector(&word).map(|v| &w.w * v)
        } else {
            tgt.vector(&word)
        };
        let Some(v) = v else {
            log::warn!("term {word:?} not found; skipped");
            continue;
        };
        let idx = match sets.iter().position(|s| s.label == label) {
            Some(i) => i,
            None => {
                sets.push(LabeledPoints {
                    label: label.clone(),
                    words: Vec::new(),
                    vectors: Matrix::zeros(v.len(), 0),
                });
                sets.len() - 1
            }
        };
        let set = &mut sets[idx];
        let n = set.vectors.ncols();
        set.vectors = std::mem::replace(&mut set.vectors, Matrix::zeros(0, 0)).insert_column(n, 0.0);
        set.vectors.set_column(n, &v);
        set.words.push(word);
    }
    let projection = pca_project(&sets, a.dims)?;
    write_file(&a.out, projection.to_tsv())?;
    write_sidecar(
        &a.out,
        &json!({"run": run, "explained_variance": projection.explained_variance,
                "explained_variance_ratio": projection.explained_variance_ratio}),
    )?;
    println!(
        "{}: {} points, explained variance ratio {:?}",
        a.out.display(),
        projection.points.len(),
        projection.explained_variance_ratio
    );
    Ok(())
}

// --------------------------------------------------------------------- synth

pub fn synth(a: SynthArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let n = r.pick("words", a.words, 1000usize)?;
    let d = r.pick("dim", a.dim, 50usize)?;
    let noise = r.pick("noise", a.noise, 0.0f64)?;
    let fraction = r.pick("anchor-fraction", a.anchor_fraction, 0.2f64)?;
    let seed = r.seed(a.seed)?;
    let run = r.into_value("synth");
    let pair = make_rotation_pair(n, d, noise, fraction, seed)?;
    create_dir(&a.out_dir)?;
    let src = a.out_dir.join("src.vec");
    let tgt = a.out_dir.join("tgt.vec");
    save_text(&pair.src, &src)?;
    save_text(&pair.tgt, &tgt)?;
    pair.gold.write_tsv(&a.out_dir.join("gold.tsv"))?;
    pair.held_out_gold().write_tsv(&a.out_dir.join("held_out_gold.tsv"))?;
    let q = AlignmentMatrix::from_matrix(pair.true_map.clone())?;
    let meta = json!({"run": run, "provenance": "synthetic", "anchors": pair.anchors.len()});
    save_alignment(&q, &meta, &a.out_dir.join("true_map.txt"))?;
    write_sidecar(&src, &meta)?;
    write_sidecar(&tgt, &meta)?;
    println!(
        "{}: {n} words, d={d}, noise {noise}, {} identical-string anchors",
        a.out_dir.display(),
        pair.anchors.len()
    );
    Ok(())
}

// ------------------------------------------------------------------ pipeline

pub fn pipeline(a: PipelineArgs) -> Result<()> {
    let file = ConfigFile::load(a.config.as_deref())?;
    let mut r = Resolver::new(&file);
    let mut profile = profile::mimic_subword_window3();
    profile.train.epochs = r.pick("epochs", a.epochs, profile.train.epochs)?;
    profile.train.dim = r.pick("dim", a.dim, profile.train.dim)?;
    profile.train.min_count = r.pick("min-count", a.min_count, profile.train.min_count)?;
    profile.train.seed = r.seed(a.seed)?;
    profile.train.validate()?;
    let delimiter = r.pick("delimiter", a.delimiter.clone(), DEFAULT_DOCUMENT_DELIMITER.to_string())?;
    r.resolved.insert("profile".into(), serde_json::to_value(&profile).expect("json"));
    let run = r.into_value("pipeline");
    create_dir(&a.out_dir)?;

    let pre = PreprocessConfig::default();
    let docs = read_documents(&a.input, &delimiter)?;
    let groups = vec![profile.professional_sections.clone(), profile.consumer_sections.clone()];
    let corpora = build_section_corpora(&docs, &HeaderSet::discharge_summary(), &groups, &pre);
    let names = ["professional", "consumer"];
    let mut spaces = Vec::new();
    for (corpus, name) in corpora.iter().zip(names) {
        let corpus_path = a.out_dir.join(format!("{name}.corpus"));
        corpus.write_text(&corpus_path)?;
        write_sidecar(&corpus_path, &json!({"run": run, "preprocess": pre.describe(), "sections": groups}))?;
        event(json!({"stage": "preprocess", "corpus": name, "sentences": corpus.sentences.len()}));
        let vec_path = a.out_dir.join(format!("{name}.vec"));
        spaces.push(train_one(&corpus_path, &vec_path, &profile.train, &run)?);
    }
    let (src_space, tgt_space) = (&spaces[0], &spaces[1]);
    let src = PreparedSpace::new(src_space, profile.normalize);
    let tgt = PreparedSpace::new(tgt_space, profile.normalize);
    let anchors = extract_anchors(src_space, tgt_space, None);
    if anchors.is_empty() {
        return Err(Error::NoAnchors("no anchors: the two vocabularies share no identical strings".into()));
    }
    let w = iterative_procrustes(&src, &tgt, &anchors, profile.refine_iterations, profile.vocab_cap, profile.csls_k)?;
    let map_path = a.out_dir.join("map.txt");
    save_alignment(&w, &json!({"run": run, "provenance": "identical-strings", "anchors": anchors.len()}), &map_path)?;
    println!("{}: {} anchors, status {:?}", map_path.display(), anchors.len(), w.status);
    if let Some(gold_path) = &a.gold {
        let gold = GoldDictionary::read_tsv(gold_path)?.normalized(&pre);
        let translator = Translator::new(&w, &src, &tgt, profile.metric, profile.csls_k, profile.vocab_cap)?;
        let report = precision_at_k(&translator, &gold, &profile.ks, run.clone())?;
        write_file(
            &a.out_dir.join("report.json"),
            serde_json::to_string_pretty(&report).expect("json") + "\n",
        )?;
        println!("{}", report.summary_line());
        println!(
            "reference: P@1 {:.3} P@5 {:.3} P@10 {:.3}",
            profile.expected[0], profile.expected[1], profile.expected[2]
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("a/b.vec")), PathBuf::from("a/b.vec.meta.json"));
    }

    #[test]
    fn vector_format_by_extension() {
        let dir = tempfile::tempdir().unwrap();
        let space = make_rotation_pair(10, 3, 0.0, 1.0, 0).unwrap().src;
        let p = dir.path().join("v.bin");
        save_vectors(&space, &p).unwrap();
        assert!(fs::read(&p).unwrap().starts_with(b"TAVB"));
    }
}
