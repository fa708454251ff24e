//! Command-line pipeline for embedding-based document and sentence alignment.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or format errors.
//! Every subcommand prints a one-line JSON summary to standard output
//! (`--pretty` switches to a human-readable listing); diagnostics go to
//! standard error. Output files are written atomically.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use embalign::corpus::{load_corpus_auto, tokenize, Corpus, DEFAULT_MIN_CHARS};
use embalign::docalign::{
    align_documents, AlignedDocPair, DocAlignConfig, DocumentAlignment, WeightScheme,
};
use embalign::embeddings::{EmbeddingMatrix, DEFAULT_DIM};
use embalign::eval::{recall, EvalTask, GoldAlignment};
use embalign::lexicon::{
    build_improved_lexicon, load_glossary, load_lexicon, merge_lexicons, BilingualLexicon,
    MatchConfig,
};
use embalign::sentalign::{
    apply_threshold, backward_align, forward_align, intersect, margin_scores, subsample_by_budget,
    CandidateRestriction, MarginPair, Rescorer, SentenceAlignment, Strategy, DEFAULT_K,
};
use embalign::synth::{generate, SynthConfig};
use embalign::tsv;

#[derive(Parser)]
#[command(
    name = "embalign",
    version,
    about = "Mine parallel documents and sentences from comparable corpora"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Print a human-readable summary instead of one-line JSON.
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align documents one-to-one within date buckets.
    Doc(DocArgs),
    /// Align sentences over the pooled corpora.
    Sent(SentArgs),
    /// Build an improved dictionary from a glossary and a word dictionary.
    BuildLexicon(BuildLexiconArgs),
    /// Score pairs with the ratio margin and subsample to a word budget.
    MarginSubsample(MarginArgs),
    /// Recall of a predicted pair file against a gold pair file.
    Eval(EvalArgs),
    /// Generate a deterministic synthetic fixture.
    Synth(SynthArgs),
}

#[derive(Args)]
struct CorpusPairArgs {
    /// Source corpus (JSON lines).
    #[arg(long)]
    src: PathBuf,
    /// Target corpus (JSON lines).
    #[arg(long)]
    tgt: PathBuf,
    /// Source embedding file (headerless little-endian f32).
    #[arg(long)]
    src_emb: PathBuf,
    /// Target embedding file.
    #[arg(long)]
    tgt_emb: PathBuf,
    /// Embedding dimensionality.
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
    /// Drop documents whose merged text is shorter than this many characters.
    #[arg(long, default_value_t = DEFAULT_MIN_CHARS)]
    min_chars: usize,
    /// Scale every embedding row to unit length before use.
    #[arg(long)]
    normalize: bool,
    /// Bilingual lexicon TSV (source->target direction); repeatable, merged.
    #[arg(long = "lexicon")]
    lexicons: Vec<PathBuf>,
    /// Initial value of the lexicon match counter (1 per the matching
    /// algorithms; 0 makes the no-match weight neutral).
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(0..=1))]
    count_init: u32,
}

#[derive(Args)]
struct DocArgs {
    #[command(flatten)]
    common: CorpusPairArgs,
    /// Sentence weighting scheme (relfreq|slen|idf|slidf).
    #[arg(long, value_parser = parse_scheme)]
    scheme: WeightScheme,
    /// Pair documents published within this many days of each other.
    #[arg(long, default_value_t = 0)]
    window_days: u32,
    /// Disable date filtering entirely (every cross pair is a candidate).
    #[arg(long)]
    no_date_filter: bool,
    /// Output TSV: src_id, tgt_id, distance.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SentArgs {
    #[command(flatten)]
    common: CorpusPairArgs,
    /// Candidate generation strategy (forward|backward|intersection).
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    /// Cosine candidates considered per sentence when rescoring.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Keep only pairs scoring at least this much.
    #[arg(long)]
    threshold: Option<f64>,
    /// Restrict candidates to sentences of these aligned document pairs
    /// (TSV from the doc subcommand or a gold file).
    #[arg(long)]
    doc_pairs: Option<PathBuf>,
    /// Append both sentence texts as extra TSV columns.
    #[arg(long)]
    emit_text: bool,
    /// Output TSV: src_sid, tgt_sid, score.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildLexiconArgs {
    /// Glossary TSV of parallel phrases (any length).
    #[arg(long)]
    glossary: PathBuf,
    /// Word dictionary TSV (single-token entries drive the subtraction).
    #[arg(long)]
    words: PathBuf,
    /// Source language code recorded on the output lexicon.
    #[arg(long, default_value = "src")]
    src_lang: String,
    /// Target language code recorded on the output lexicon.
    #[arg(long, default_value = "tgt")]
    tgt_lang: String,
    /// Output lexicon TSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MarginArgs {
    /// Scored pair TSV (src_sid, tgt_sid, ...) to rescore and subsample.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    src_emb: PathBuf,
    #[arg(long)]
    tgt_emb: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DIM)]
    dim: usize,
    /// Target-side word budget; the pair crossing it is included.
    #[arg(long)]
    budget: usize,
    /// Neighbourhood size of the margin score.
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Target corpus, used to count target-side words. May be omitted when
    /// the pairs file carries text columns (sent --emit-text).
    #[arg(long)]
    tgt: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_CHARS)]
    min_chars: usize,
    #[arg(long)]
    normalize: bool,
    /// Output TSV: src_sid, tgt_sid, margin.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// Alignment task the ids refer to (document|sentence).
    #[arg(long, value_parser = parse_task)]
    task: EvalTask,
    /// Predicted pair TSV (first two columns are used).
    #[arg(long)]
    pred: PathBuf,
    /// Gold pair TSV.
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of document pairs.
    #[arg(long)]
    docs: usize,
    /// Sentences per document.
    #[arg(long)]
    sents: usize,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Noise added to true-pair target embeddings.
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Directory receiving the fixture files.
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_scheme(s: &str) -> std::result::Result<WeightScheme, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_strategy(s: &str) -> std::result::Result<Strategy, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_task(s: &str) -> std::result::Result<EvalTask, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("building thread pool")?;
    }
    let started = Instant::now();
    let summary = match cli.command {
        Command::Doc(args) => run_doc(args)?,
        Command::Sent(args) => run_sent(args)?,
        Command::BuildLexicon(args) => run_build_lexicon(args)?,
        Command::MarginSubsample(args) => run_margin_subsample(args)?,
        Command::Eval(args) => run_eval(args)?,
        Command::Synth(args) => run_synth(args)?,
    };
    print_summary(summary, started, cli.pretty);
    Ok(())
}

fn print_summary(mut summary: serde_json::Value, started: Instant, pretty: bool) {
    summary["elapsed_ms"] = json!(started.elapsed().as_millis() as u64);
    if pretty {
        let mut out = String::new();
        if let Some(map) = summary.as_object() {
            let width = map.keys().map(String::len).max().unwrap_or(0);
            for (key, value) in map {
                let _ = writeln!(out, "{key:width$}  {value}");
            }
        }
        print!("{out}");
    } else {
        println!("{summary}");
    }
}

struct LoadedPair {
    src: Corpus,
    tgt: Corpus,
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    lexicon: Option<BilingualLexicon>,
    lexicon_rows_skipped: usize,
    match_config: MatchConfig,
}

fn load_pair(args: &CorpusPairArgs) -> Result<LoadedPair> {
    let src = load_corpus_auto(&args.src, args.min_chars)?;
    let tgt = load_corpus_auto(&args.tgt, args.min_chars)?;
    let mut src_emb = EmbeddingMatrix::load(&args.src_emb, args.dim, src.sentences.len())?;
    let mut tgt_emb = EmbeddingMatrix::load(&args.tgt_emb, args.dim, tgt.sentences.len())?;
    if args.normalize {
        src_emb = src_emb.normalized()?;
        tgt_emb = tgt_emb.normalized()?;
    }
    let mut lexicon_rows_skipped = 0;
    let lexicon = if args.lexicons.is_empty() {
        None
    } else {
        let mut parts = Vec::new();
        for path in &args.lexicons {
            let (lex, skipped) = load_lexicon(path, &src.lang, &tgt.lang)?;
            if skipped > 0 {
                eprintln!(
                    "warning: {skipped} rows of {} skipped (over-long or empty after tokenization)",
                    path.display()
                );
            }
            lexicon_rows_skipped += skipped;
            parts.push(lex);
        }
        Some(merge_lexicons(&parts)?)
    };
    Ok(LoadedPair {
        src,
        tgt,
        src_emb,
        tgt_emb,
        lexicon,
        lexicon_rows_skipped,
        match_config: MatchConfig {
            count_init: args.count_init,
            ..MatchConfig::default()
        },
    })
}

fn render_doc_alignment(alignment: &DocumentAlignment) -> String {
    let mut out = String::new();
    for pair in &alignment.pairs {
        out.push_str(&tsv::format_pair_row(
            &pair.src_id,
            &pair.tgt_id,
            pair.distance,
        ));
        out.push('\n');
    }
    out
}

fn run_doc(args: DocArgs) -> Result<serde_json::Value> {
    let pair = load_pair(&args.common)?;
    let config = DocAlignConfig {
        scheme: args.scheme,
        window_days: (!args.no_date_filter).then_some(args.window_days),
        match_config: pair.match_config,
    };
    let alignment = align_documents(
        &pair.src,
        &pair.tgt,
        &pair.src_emb,
        &pair.tgt_emb,
        pair.lexicon.as_ref(),
        &config,
    )?;
    tsv::write_atomic(&args.out, render_doc_alignment(&alignment).as_bytes())?;
    Ok(json!({
        "command": "doc",
        "scheme": args.scheme.as_str(),
        "src_docs": pair.src.documents.len(),
        "tgt_docs": pair.tgt.documents.len(),
        "lexicon_entries": pair.lexicon.as_ref().map(BilingualLexicon::len),
        "lexicon_rows_skipped": pair.lexicon_rows_skipped,
        "pairs": alignment.pairs.len(),
        "out": args.out.display().to_string(),
    }))
}

fn render_sentence_alignment(
    alignment: &SentenceAlignment,
    texts: Option<(&Corpus, &Corpus)>,
) -> String {
    let mut out = String::new();
    for pair in &alignment.pairs {
        out.push_str(&tsv::format_pair_row(
            &pair.src_sid.to_string(),
            &pair.tgt_sid.to_string(),
            pair.score,
        ));
        if let Some((src, tgt)) = texts {
            out.push('\t');
            out.push_str(&tsv::sanitize_text_column(
                &src.sentences[pair.src_sid].text,
            ));
            out.push('\t');
            out.push_str(&tsv::sanitize_text_column(
                &tgt.sentences[pair.tgt_sid].text,
            ));
        }
        out.push('\n');
    }
    out
}

fn read_doc_pairs(path: &Path) -> Result<DocumentAlignment> {
    let rows = tsv::read_pair_rows(path)?;
    Ok(DocumentAlignment {
        pairs: rows
            .into_iter()
            .map(|row| AlignedDocPair {
                src_id: row.src,
                tgt_id: row.tgt,
                distance: row.score.unwrap_or(0.0),
            })
            .collect(),
    })
}

fn run_sent(args: SentArgs) -> Result<serde_json::Value> {
    let pair = load_pair(&args.common)?;
    let restriction = args
        .doc_pairs
        .as_deref()
        .map(|path| -> Result<CandidateRestriction> {
            let doc_alignment = read_doc_pairs(path)?;
            Ok(CandidateRestriction::from_document_pairs(
                &doc_alignment,
                &pair.src,
                &pair.tgt,
            )?)
        })
        .transpose()?;

    let forward_rescorer = pair.lexicon.as_ref().map(|lex| {
        Rescorer::new(
            lex,
            &pair.src.sentences,
            &pair.tgt.sentences,
            pair.match_config,
        )
    });
    let inverted = pair.lexicon.as_ref().map(BilingualLexicon::invert);
    let backward_rescorer = inverted.as_ref().map(|lex| {
        Rescorer::new(
            lex,
            &pair.tgt.sentences,
            &pair.src.sentences,
            pair.match_config,
        )
    });
    let reversed_restriction = restriction.as_ref().map(CandidateRestriction::reversed);

    let alignment = match args.strategy {
        Strategy::Forward => forward_align(
            &pair.src_emb,
            &pair.tgt_emb,
            args.k,
            forward_rescorer.as_ref(),
            restriction.as_ref(),
        )?,
        Strategy::Backward => backward_align(
            &pair.src_emb,
            &pair.tgt_emb,
            args.k,
            backward_rescorer.as_ref(),
            reversed_restriction.as_ref(),
        )?,
        Strategy::Intersection => {
            let fwd = forward_align(
                &pair.src_emb,
                &pair.tgt_emb,
                args.k,
                forward_rescorer.as_ref(),
                restriction.as_ref(),
            )?;
            let bwd = backward_align(
                &pair.src_emb,
                &pair.tgt_emb,
                args.k,
                backward_rescorer.as_ref(),
                reversed_restriction.as_ref(),
            )?;
            intersect(&fwd, &bwd)
        }
    };
    let alignment = match args.threshold {
        Some(threshold) => apply_threshold(&alignment, threshold),
        None => alignment,
    };
    let texts = args.emit_text.then_some((&pair.src, &pair.tgt));
    tsv::write_atomic(
        &args.out,
        render_sentence_alignment(&alignment, texts).as_bytes(),
    )?;
    Ok(json!({
        "command": "sent",
        "strategy": alignment.strategy.as_str(),
        "src_sentences": pair.src.sentences.len(),
        "tgt_sentences": pair.tgt.sentences.len(),
        "lexicon_entries": pair.lexicon.as_ref().map(BilingualLexicon::len),
        "k": args.k,
        "threshold": args.threshold,
        "pairs": alignment.pairs.len(),
        "out": args.out.display().to_string(),
    }))
}

fn run_build_lexicon(args: BuildLexiconArgs) -> Result<serde_json::Value> {
    let (glossary, glossary_skipped) =
        load_glossary(&args.glossary, &args.src_lang, &args.tgt_lang)?;
    let (words, words_skipped) = load_lexicon(&args.words, &args.src_lang, &args.tgt_lang)?;
    let improved = build_improved_lexicon(&glossary, &words)?;
    tsv::write_atomic(&args.out, improved.to_tsv().as_bytes())?;
    Ok(json!({
        "command": "build-lexicon",
        "glossary_pairs": glossary.pairs.len(),
        "glossary_rows_skipped": glossary_skipped,
        "word_entries": words.len(),
        "word_rows_skipped": words_skipped,
        "entries": improved.len(),
        "new_entries": improved.len() - words.len(),
        "out": args.out.display().to_string(),
    }))
}

fn run_margin_subsample(args: MarginArgs) -> Result<serde_json::Value> {
    let rows = tsv::read_pair_rows(&args.pairs)?;
    let mut pairs = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let src: usize = row.src.parse().map_err(|_| {
            anyhow!(
                "{}: row {}: source ordinal {:?} is not a number",
                args.pairs.display(),
                i + 1,
                row.src
            )
        })?;
        let tgt: usize = row.tgt.parse().map_err(|_| {
            anyhow!(
                "{}: row {}: target ordinal {:?} is not a number",
                args.pairs.display(),
                i + 1,
                row.tgt
            )
        })?;
        pairs.push((src, tgt));
    }

    let mut src_emb = load_sized(&args.src_emb, args.dim)?;
    let mut tgt_emb = load_sized(&args.tgt_emb, args.dim)?;
    if args.normalize {
        src_emb = src_emb.normalized()?;
        tgt_emb = tgt_emb.normalized()?;
    }
    for &(s, t) in &pairs {
        if s >= src_emb.rows() || t >= tgt_emb.rows() {
            bail!(
                "pair ({s}, {t}) is out of range for embeddings of {} x {} rows",
                src_emb.rows(),
                tgt_emb.rows()
            );
        }
    }

    // Target token counts come from the corpus when given, otherwise from
    // the text columns of an --emit-text pairs file.
    let token_counts: HashMap<usize, usize> = match &args.tgt {
        Some(path) => {
            let tgt = load_corpus_auto(path, args.min_chars)?;
            pairs
                .iter()
                .map(|&(_, t)| {
                    tgt.sentences
                        .get(t)
                        .map(|s| (t, s.tokens.len()))
                        .ok_or_else(|| anyhow!("target ordinal {t} is outside the corpus"))
                })
                .collect::<Result<_>>()?
        }
        None => {
            let mut counts = HashMap::new();
            for (row, &(_, t)) in rows.iter().zip(&pairs) {
                let text = row.tgt_text.as_deref().ok_or_else(|| {
                    anyhow!(
                        "no --tgt corpus given and the pairs file has no text columns; \
                         cannot count target words"
                    )
                })?;
                counts.insert(t, tokenize(text).len());
            }
            counts
        }
    };

    let margins = margin_scores(&pairs, &src_emb, &tgt_emb, args.k)?;
    let scored: Vec<MarginPair> = pairs
        .iter()
        .zip(&margins)
        .map(|(&(src_sid, tgt_sid), &margin)| MarginPair {
            src_sid,
            tgt_sid,
            margin,
        })
        .collect();
    let selected = subsample_by_budget(&scored, args.budget, |sid| token_counts[&sid]);

    let mut out = String::new();
    let mut words = 0usize;
    for pair in &selected {
        words += token_counts[&pair.tgt_sid];
        out.push_str(&tsv::format_pair_row(
            &pair.src_sid.to_string(),
            &pair.tgt_sid.to_string(),
            pair.margin,
        ));
        out.push('\n');
    }
    tsv::write_atomic(&args.out, out.as_bytes())?;
    Ok(json!({
        "command": "margin-subsample",
        "input_pairs": pairs.len(),
        "selected": selected.len(),
        "budget_words": args.budget,
        "target_words": words,
        "out": args.out.display().to_string(),
    }))
}

/// Loads an embedding file whose row count is implied by its size.
fn load_sized(path: &Path, dim: usize) -> Result<EmbeddingMatrix> {
    let size = std::fs::metadata(path)
        .with_context(|| path.display().to_string())?
        .len();
    let row_bytes = (dim as u64) * 4;
    if row_bytes == 0 || size % row_bytes != 0 {
        bail!(
            "{}: size {size} is not a multiple of {row_bytes} bytes (dim {dim})",
            path.display()
        );
    }
    Ok(EmbeddingMatrix::load(
        path,
        dim,
        (size / row_bytes) as usize,
    )?)
}

fn run_eval(args: EvalArgs) -> Result<serde_json::Value> {
    let predicted = tsv::read_pair_rows(&args.pred)?
        .into_iter()
        .map(|row| (row.src, row.tgt));
    let gold = GoldAlignment::load(&args.gold)?;
    let report = recall(args.task, predicted, &gold)?;
    Ok(json!({
        "command": "eval",
        "task": report.task,
        "gold_size": report.gold_size,
        "predicted_size": report.predicted_size,
        "hits": report.hits,
        "recall": report.recall,
    }))
}

fn run_synth(args: SynthArgs) -> Result<serde_json::Value> {
    let config = SynthConfig {
        n_docs: args.docs,
        sents_per_doc: args.sents,
        dim: args.dim,
        noise_sigma: args.sigma,
        seed: args.seed,
    };
    let paths = generate(&config, &args.out_dir)?;
    Ok(json!({
        "command": "synth",
        "docs": args.docs,
        "sentences_per_side": args.docs * args.sents,
        "dim": args.dim,
        "sigma": args.sigma,
        "seed": args.seed,
        "out_dir": args.out_dir.display().to_string(),
        "files": {
            "src_corpus": paths.src_corpus.display().to_string(),
            "tgt_corpus": paths.tgt_corpus.display().to_string(),
            "src_emb": paths.src_emb.display().to_string(),
            "tgt_emb": paths.tgt_emb.display().to_string(),
            "gold_docs": paths.gold_docs.display().to_string(),
            "gold_sents": paths.gold_sents.display().to_string(),
        },
    }))
}
