//! Document alignment: per-sentence probability masses, the greedy transport
//! distance between documents, and one-to-one alignment within date buckets.
//!
//! A document is treated as a bag of sentences, each carrying a share of the
//! document's unit probability mass. The distance between two documents is a
//! greedy approximation of the earth mover's distance: sentence pairs are
//! visited in ascending Euclidean distance and mass is moved along each pair
//! while any remains, accumulating `flow x distance x weight`. The optional
//! lexicon weight shrinks the cost of pairs whose sentences share dictionary
//! vocabulary.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{all_pairs_bucket, date_buckets, Corpus, DateBucket, Document};
use crate::embeddings::{euclidean_unchecked, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::lexicon::{combined_match_count, doc_pair_weight, BilingualLexicon, MatchConfig};

/// How sentence masses are distributed inside a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightScheme {
    /// Relative frequency of the sentence text within the document.
    RelFreq,
    /// Longer sentences carry more mass, in proportion to token count.
    SentLength,
    /// Rare sentences (across the corpus) carry more mass.
    Idf,
    /// Product of the sentence-length and IDF raw weights.
    Slidf,
}

impl WeightScheme {
    pub const ALL: [WeightScheme; 4] = [
        WeightScheme::RelFreq,
        WeightScheme::SentLength,
        WeightScheme::Idf,
        WeightScheme::Slidf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            WeightScheme::RelFreq => "relfreq",
            WeightScheme::SentLength => "slen",
            WeightScheme::Idf => "idf",
            WeightScheme::Slidf => "slidf",
        }
    }

    fn needs_idf(&self) -> bool {
        matches!(self, WeightScheme::Idf | WeightScheme::Slidf)
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relfreq" => Ok(WeightScheme::RelFreq),
            "slen" => Ok(WeightScheme::SentLength),
            "idf" => Ok(WeightScheme::Idf),
            "slidf" => Ok(WeightScheme::Slidf),
            other => Err(Error::InvalidInput(format!(
                "unknown weighting scheme {other:?} (expected relfreq|slen|idf|slidf)"
            ))),
        }
    }
}

/// Document frequencies of exact sentence texts across a corpus.
#[derive(Debug, Clone)]
pub struct IdfStats {
    n_docs: usize,
    df: HashMap<String, usize>,
}

impl IdfStats {
    /// Counts, for every sentence text, the number of distinct documents
    /// containing it.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in &corpus.documents {
            let mut seen = HashSet::new();
            for &sid in &doc.sentence_ids {
                let text = &corpus.sentences[sid].text;
                if seen.insert(text.as_str()) {
                    *df.entry(text.clone()).or_insert(0) += 1;
                }
            }
        }
        IdfStats {
            n_docs: corpus.documents.len(),
            df,
        }
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Number of documents containing the exact text; 0 when unseen.
    pub fn document_frequency(&self, text: &str) -> usize {
        self.df.get(text).copied().unwrap_or(0)
    }

    /// Raw IDF weight `1 + ln((N + 1) / (1 + df))`, smoothed so unseen
    /// sentences are well-defined. Always positive.
    pub fn raw_weight(&self, text: &str) -> f64 {
        let df = self.document_frequency(text);
        1.0 + ((self.n_docs as f64 + 1.0) / (1.0 + df as f64)).ln()
    }
}

/// Per-sentence probability masses of one document under a scheme.
/// Masses are parallel to the document's `sentence_ids` and sum to 1.
#[derive(Debug, Clone)]
pub struct WeightVector {
    pub doc_index: usize,
    pub scheme: WeightScheme,
    pub masses: Vec<f64>,
}

/// Computes the mass distribution of one document.
///
/// Raw weights per sentence occurrence: `relfreq` uses the within-document
/// count of the sentence text; `slen` multiplies that count by the token
/// count; `idf` uses the corpus-level raw IDF weight; `slidf` multiplies the
/// `slen` and `idf` raw weights. The vector is then normalized to sum 1.
/// `idf`/`slidf` require [`IdfStats`]; `slen`/`slidf` fail on a document with
/// zero tokens in total.
pub fn sentence_masses(
    doc_index: usize,
    corpus: &Corpus,
    scheme: WeightScheme,
    idf: Option<&IdfStats>,
) -> Result<WeightVector> {
    let doc = &corpus.documents[doc_index];
    if scheme.needs_idf() && idf.is_none() {
        return Err(Error::MissingIdf {
            scheme: scheme.to_string(),
        });
    }
    let mut text_counts: HashMap<&str, usize> = HashMap::new();
    for &sid in &doc.sentence_ids {
        *text_counts
            .entry(corpus.sentences[sid].text.as_str())
            .or_insert(0) += 1;
    }
    let raw: Vec<f64> = doc
        .sentence_ids
        .iter()
        .map(|&sid| {
            let sentence = &corpus.sentences[sid];
            let count = text_counts[sentence.text.as_str()] as f64;
            let tokens = sentence.tokens.len() as f64;
            match scheme {
                WeightScheme::RelFreq => count,
                WeightScheme::SentLength => count * tokens,
                WeightScheme::Idf => idf.unwrap().raw_weight(&sentence.text),
                WeightScheme::Slidf => count * tokens * idf.unwrap().raw_weight(&sentence.text),
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(Error::NoTokens {
            doc_id: doc.id.clone(),
        });
    }
    Ok(WeightVector {
        doc_index,
        scheme,
        masses: raw.into_iter().map(|w| w / total).collect(),
    })
}

/// One step of the greedy transport: `flow` mass moved between two sentences
/// at ground distance `delta`, scaled by the lexicon `weight`.
#[derive(Debug, Clone)]
pub struct FlowStep {
    pub src_sid: usize,
    pub tgt_sid: usize,
    pub flow: f64,
    pub delta: f64,
    pub weight: f64,
}

/// Transport-based distance between two documents with its flow trace.
#[derive(Debug, Clone)]
pub struct DocDistance {
    pub src_id: String,
    pub tgt_id: String,
    pub distance: f64,
    pub trace: Vec<FlowStep>,
}

/// Shared inputs for greedy transport computations over two corpora.
pub struct GmdContext<'a> {
    pub src: &'a Corpus,
    pub tgt: &'a Corpus,
    pub src_emb: &'a EmbeddingMatrix,
    pub tgt_emb: &'a EmbeddingMatrix,
    pub lexicon: Option<&'a BilingualLexicon>,
    pub match_config: MatchConfig,
}

impl<'a> GmdContext<'a> {
    pub fn new(
        src: &'a Corpus,
        tgt: &'a Corpus,
        src_emb: &'a EmbeddingMatrix,
        tgt_emb: &'a EmbeddingMatrix,
    ) -> Self {
        GmdContext {
            src,
            tgt,
            src_emb,
            tgt_emb,
            lexicon: None,
            match_config: MatchConfig::default(),
        }
    }

    pub fn with_lexicon(mut self, lexicon: &'a BilingualLexicon, config: MatchConfig) -> Self {
        self.lexicon = Some(lexicon);
        self.match_config = config;
        self
    }

    fn pair_weight(&self, src_sid: usize, tgt_sid: usize) -> f64 {
        let Some(lex) = self.lexicon else {
            return 1.0;
        };
        let tokens_a = &self.src.sentences[src_sid].tokens;
        if tokens_a.is_empty() {
            return 1.0;
        }
        let tokens_b = &self.tgt.sentences[tgt_sid].tokens;
        let count = combined_match_count(tokens_a, tokens_b, lex, self.match_config);
        doc_pair_weight(count, tokens_a.len())
    }
}

/// Greedy approximation of the transport distance between two documents.
///
/// All cross sentence pairs are sorted by ascending Euclidean distance (ties
/// by source then target ordinal). The loop repeatedly takes the next pair
/// with remaining mass on both sides, moves the smaller remaining mass, and
/// accumulates `flow x delta x weight`, until the full unit mass has moved.
/// The greedy plan is feasible, so the result is an upper bound on the exact
/// earth mover's distance.
pub fn greedy_movers_distance(
    ctx: &GmdContext<'_>,
    src_doc: &Document,
    tgt_doc: &Document,
    src_mass: &WeightVector,
    tgt_mass: &WeightVector,
) -> Result<DocDistance> {
    if ctx.src_emb.dim() != ctx.tgt_emb.dim() {
        return Err(Error::DimMismatch {
            left: ctx.src_emb.dim(),
            right: ctx.tgt_emb.dim(),
        });
    }
    let a_sids = &src_doc.sentence_ids;
    let b_sids = &tgt_doc.sentence_ids;
    debug_assert_eq!(a_sids.len(), src_mass.masses.len());
    debug_assert_eq!(b_sids.len(), tgt_mass.masses.len());

    let sum_a: f64 = src_mass.masses.iter().sum();
    let sum_b: f64 = tgt_mass.masses.iter().sum();
    if (sum_a - sum_b).abs() > 1e-6 {
        return Err(Error::MassMismatch {
            src: sum_a,
            tgt: sum_b,
        });
    }

    let mut pairs = Vec::with_capacity(a_sids.len() * b_sids.len());
    for (i, &a_sid) in a_sids.iter().enumerate() {
        let a_row = ctx.src_emb.row(a_sid);
        for (j, &b_sid) in b_sids.iter().enumerate() {
            let delta = euclidean_unchecked(a_row, ctx.tgt_emb.row(b_sid));
            pairs.push((delta, i, j));
        }
    }
    pairs.sort_by(|x, y| {
        x.0.total_cmp(&y.0)
            .then(a_sids[x.1].cmp(&a_sids[y.1]))
            .then(b_sids[x.2].cmp(&b_sids[y.2]))
    });

    let mut remaining_a = src_mass.masses.clone();
    let mut remaining_b = tgt_mass.masses.clone();
    let mut moved = 0.0f64;
    let mut distance = 0.0f64;
    let mut trace = Vec::new();
    for &(delta, i, j) in &pairs {
        let flow = remaining_a[i].min(remaining_b[j]);
        if flow <= 0.0 {
            continue;
        }
        let weight = ctx.pair_weight(a_sids[i], b_sids[j]);
        distance += flow * delta * weight;
        remaining_a[i] -= flow;
        remaining_b[j] -= flow;
        moved += flow;
        trace.push(FlowStep {
            src_sid: a_sids[i],
            tgt_sid: b_sids[j],
            flow,
            delta,
            weight,
        });
        if moved >= sum_a {
            break;
        }
    }

    Ok(DocDistance {
        src_id: src_doc.id.clone(),
        tgt_id: tgt_doc.id.clone(),
        distance,
        trace,
    })
}

/// One accepted document pair.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDocPair {
    pub src_id: String,
    pub tgt_id: String,
    pub distance: f64,
}

/// A one-to-one document alignment, sorted by ascending distance with ties
/// broken by `(src_id, tgt_id)`.
#[derive(Debug, Clone, Default)]
pub struct DocumentAlignment {
    pub pairs: Vec<AlignedDocPair>,
}

/// Settings for [`align_documents`].
#[derive(Debug, Clone, Copy)]
pub struct DocAlignConfig {
    pub scheme: WeightScheme,
    /// `Some(w)` buckets documents by publication day with a `+-w` day
    /// window; `None` disables date filtering entirely.
    pub window_days: Option<u32>,
    pub match_config: MatchConfig,
}

impl Default for DocAlignConfig {
    fn default() -> Self {
        DocAlignConfig {
            scheme: WeightScheme::SentLength,
            window_days: Some(0),
            match_config: MatchConfig::default(),
        }
    }
}

/// Aligns two corpora one-to-one.
///
/// Within each date bucket every cross pair receives a greedy transport
/// distance (computed in parallel). Candidates are then sorted globally by
/// `(distance, src_id, tgt_id)` and accepted greedily while both documents
/// are still unmatched, so each document appears at most once. The result is
/// deterministic regardless of worker count.
pub fn align_documents(
    src: &Corpus,
    tgt: &Corpus,
    src_emb: &EmbeddingMatrix,
    tgt_emb: &EmbeddingMatrix,
    lexicon: Option<&BilingualLexicon>,
    config: &DocAlignConfig,
) -> Result<DocumentAlignment> {
    check_rows(src, src_emb, "source")?;
    check_rows(tgt, tgt_emb, "target")?;

    let src_idf = config
        .scheme
        .needs_idf()
        .then(|| IdfStats::from_corpus(src));
    let tgt_idf = config
        .scheme
        .needs_idf()
        .then(|| IdfStats::from_corpus(tgt));

    let src_masses = corpus_masses(src, config.scheme, src_idf.as_ref())?;
    let tgt_masses = corpus_masses(tgt, config.scheme, tgt_idf.as_ref())?;

    let mut ctx = GmdContext::new(src, tgt, src_emb, tgt_emb);
    if let Some(lex) = lexicon {
        ctx = ctx.with_lexicon(lex, config.match_config);
    }

    let buckets: Vec<DateBucket> = match config.window_days {
        Some(w) => date_buckets(src, tgt, w),
        None => all_pairs_bucket(src, tgt),
    };
    let candidates: Vec<(usize, usize)> = buckets
        .iter()
        .flat_map(|b| {
            b.src_docs
                .iter()
                .flat_map(|&s| b.tgt_docs.iter().map(move |&t| (s, t)))
        })
        .collect();

    let mut scored: Vec<(f64, usize, usize)> = candidates
        .par_iter()
        .map(|&(s, t)| {
            let dist = greedy_movers_distance(
                &ctx,
                &src.documents[s],
                &tgt.documents[t],
                &src_masses[s],
                &tgt_masses[t],
            )?;
            Ok((dist.distance, s, t))
        })
        .collect::<Result<_>>()?;

    scored.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then_with(|| src.documents[a.1].id.cmp(&src.documents[b.1].id))
            .then_with(|| tgt.documents[a.2].id.cmp(&tgt.documents[b.2].id))
    });

    let mut src_taken = vec![false; src.documents.len()];
    let mut tgt_taken = vec![false; tgt.documents.len()];
    let mut pairs = Vec::new();
    for (distance, s, t) in scored {
        if src_taken[s] || tgt_taken[t] {
            continue;
        }
        src_taken[s] = true;
        tgt_taken[t] = true;
        pairs.push(AlignedDocPair {
            src_id: src.documents[s].id.clone(),
            tgt_id: tgt.documents[t].id.clone(),
            distance,
        });
    }

    Ok(DocumentAlignment { pairs })
}

fn check_rows(corpus: &Corpus, emb: &EmbeddingMatrix, side: &str) -> Result<()> {
    if corpus.sentences.len() != emb.rows() {
        return Err(Error::InvalidInput(format!(
            "{side} corpus has {} sentences but the embedding matrix has {} rows",
            corpus.sentences.len(),
            emb.rows()
        )));
    }
    Ok(())
}

fn corpus_masses(
    corpus: &Corpus,
    scheme: WeightScheme,
    idf: Option<&IdfStats>,
) -> Result<Vec<WeightVector>> {
    (0..corpus.documents.len())
        .into_par_iter()
        .map(|i| sentence_masses(i, corpus, scheme, idf))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DocumentSpec;
    use chrono::NaiveDate;

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn corpus_of(docs: &[(&str, &str, &[&str])]) -> Corpus {
        let specs = docs
            .iter()
            .map(|(id, date, sentences)| DocumentSpec {
                id: id.to_string(),
                lang: "en".into(),
                date: day(date),
                url: None,
                sentences: sentences.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        Corpus::build("en", specs).unwrap()
    }

    fn uniform_mass(doc_index: usize, n: usize) -> WeightVector {
        WeightVector {
            doc_index,
            scheme: WeightScheme::RelFreq,
            masses: vec![1.0 / n as f64; n],
        }
    }

    #[test]
    fn idf_counts_documents_not_occurrences() {
        let corpus = corpus_of(&[
            ("d1", "2020-01-01", &["x", "x", "unique one"]),
            ("d2", "2020-01-01", &["x", "other"]),
            ("d3", "2020-01-01", &["third doc"]),
        ]);
        let idf = IdfStats::from_corpus(&corpus);
        assert_eq!(idf.n_docs(), 3);
        assert_eq!(idf.document_frequency("x"), 2);
        assert_eq!(idf.document_frequency("unique one"), 1);
        assert_eq!(idf.document_frequency("never seen"), 0);
        // N=3, df=1: raw weight 1 + ln 2.
        assert!((idf.raw_weight("unique one") - (1.0 + 2.0f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn relfreq_masses_are_uniform_for_distinct_sentences() {
        let corpus = corpus_of(&[("d1", "2020-01-01", &["alpha", "beta"])]);
        let wv = sentence_masses(0, &corpus, WeightScheme::RelFreq, None).unwrap();
        assert_eq!(wv.masses, vec![0.5, 0.5]);
    }

    #[test]
    fn slen_masses_follow_token_counts() {
        let corpus = corpus_of(&[("d1", "2020-01-01", &["one", "three word here"])]);
        let wv = sentence_masses(0, &corpus, WeightScheme::SentLength, None).unwrap();
        assert!((wv.masses[0] - 0.25).abs() < 1e-12);
        assert!((wv.masses[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn slen_errors_on_tokenless_document() {
        let corpus = corpus_of(&[("d1", "2020-01-01", &["...", "!!!"])]);
        assert!(matches!(
            sentence_masses(0, &corpus, WeightScheme::SentLength, None),
            Err(Error::NoTokens { .. })
        ));
    }

    #[test]
    fn idf_scheme_requires_stats() {
        let corpus = corpus_of(&[("d1", "2020-01-01", &["a"])]);
        assert!(matches!(
            sentence_masses(0, &corpus, WeightScheme::Idf, None),
            Err(Error::MissingIdf { .. })
        ));
    }

    #[test]
    fn all_schemes_normalize_to_one() {
        let corpus = corpus_of(&[
            (
                "d1",
                "2020-01-01",
                &["a b c", "a b c", "short", "the longer one here"],
            ),
            ("d2", "2020-01-01", &["a b c", "else"]),
        ]);
        let idf = IdfStats::from_corpus(&corpus);
        for scheme in WeightScheme::ALL {
            let wv = sentence_masses(0, &corpus, scheme, Some(&idf)).unwrap();
            let total: f64 = wv.masses.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "{scheme}: {total}");
            assert!(wv.masses.iter().all(|&m| m > 0.0));
        }
    }

    fn one_doc_corpus(id: &str, n_sents: usize) -> Corpus {
        let sentences: Vec<String> = (0..n_sents).map(|i| format!("{id} sentence {i}")).collect();
        Corpus::build(
            "en",
            vec![DocumentSpec {
                id: id.into(),
                lang: "en".into(),
                date: day("2020-01-01"),
                url: None,
                sentences,
            }],
        )
        .unwrap()
    }

    fn gmd_of(
        src_rows: Vec<Vec<f32>>,
        tgt_rows: Vec<Vec<f32>>,
        src_masses: Vec<f64>,
        tgt_masses: Vec<f64>,
    ) -> f64 {
        let src = one_doc_corpus("a", src_rows.len());
        let tgt = one_doc_corpus("x", tgt_rows.len());
        let src_emb = EmbeddingMatrix::from_rows(src_rows).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(tgt_rows).unwrap();
        let ctx = GmdContext::new(&src, &tgt, &src_emb, &tgt_emb);
        let dist = greedy_movers_distance(
            &ctx,
            &src.documents[0],
            &tgt.documents[0],
            &WeightVector {
                doc_index: 0,
                scheme: WeightScheme::RelFreq,
                masses: src_masses.clone(),
            },
            &WeightVector {
                doc_index: 0,
                scheme: WeightScheme::RelFreq,
                masses: tgt_masses,
            },
        )
        .unwrap();
        // Conservation: every greedy plan moves the full unit mass.
        let total_flow: f64 = dist.trace.iter().map(|s| s.flow).sum();
        assert!((total_flow - src_masses.iter().sum::<f64>()).abs() < 1e-9);
        let recomputed: f64 = dist.trace.iter().map(|s| s.flow * s.delta * s.weight).sum();
        assert!((recomputed - dist.distance).abs() < 1e-9);
        dist.distance
    }

    #[test]
    fn gmd_identical_documents_is_zero() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let d = gmd_of(rows.clone(), rows, vec![0.5, 0.5], vec![0.5, 0.5]);
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn gmd_hand_traced_split_flow() {
        // A = {(1,0) @0.5, (0,1) @0.5}, B = {(1,0) @1.0}:
        // 0.5 moves at distance 0, then 0.5 at sqrt(2).
        let d = gmd_of(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0]],
            vec![0.5, 0.5],
            vec![1.0],
        );
        assert!((d - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn gmd_rejects_mass_mismatch() {
        let src = corpus_of(&[("a", "2020-01-01", &["one"])]);
        let tgt = corpus_of(&[("x", "2020-01-01", &["two"])]);
        let src_emb = EmbeddingMatrix::from_rows(vec![vec![1.0]]).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![1.0]]).unwrap();
        let ctx = GmdContext::new(&src, &tgt, &src_emb, &tgt_emb);
        let err = greedy_movers_distance(
            &ctx,
            &src.documents[0],
            &tgt.documents[0],
            &uniform_mass(0, 1),
            &WeightVector {
                doc_index: 0,
                scheme: WeightScheme::RelFreq,
                masses: vec![0.5],
            },
        );
        assert!(matches!(err, Err(Error::MassMismatch { .. })));
    }

    /// Exact transport distance for uniform masses via the permutation
    /// assignment oracle: min over permutations of the mean pair distance.
    fn assignment_emd(src: &[Vec<f32>], tgt: &[Vec<f32>]) -> f64 {
        assert_eq!(src.len(), tgt.len());
        let n = src.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let cost: f64 = p
                .iter()
                .enumerate()
                .map(|(i, &j)| crate::embeddings::euclidean(&src[i], &tgt[j]).unwrap())
                .sum();
            best = best.min(cost / n as f64);
        });
        best
    }

    fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == items.len() {
            visit(items);
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            permute(items, k + 1, visit);
            items.swap(k, i);
        }
    }

    #[test]
    fn gmd_upper_bounds_exact_transport() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let n = rng.random_range(2..=4usize);
            let dim = 3;
            let src: Vec<Vec<f32>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let tgt: Vec<Vec<f32>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let exact = assignment_emd(&src, &tgt);
            let greedy = gmd_of(src, tgt, vec![1.0 / n as f64; n], vec![1.0 / n as f64; n]);
            assert!(greedy >= exact - 1e-9, "greedy {greedy} < exact {exact}");
        }
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn lexicon_weight_shrinks_matching_pair_cost() {
        let src = corpus_of(&[("a", "2020-01-01", &["john went home today"])]);
        let tgt = corpus_of(&[("x", "2020-01-01", &["JJJ came back"])]);
        let src_emb = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![0.0, 1.0]]).unwrap();

        let baseline = {
            let ctx = GmdContext::new(&src, &tgt, &src_emb, &tgt_emb);
            greedy_movers_distance(
                &ctx,
                &src.documents[0],
                &tgt.documents[0],
                &uniform_mass(0, 1),
                &uniform_mass(0, 1),
            )
            .unwrap()
            .distance
        };

        let mut lex = BilingualLexicon::new("en", "en");
        lex.insert(toks("john"), toks("jjj")).unwrap();
        let ctx = GmdContext::new(&src, &tgt, &src_emb, &tgt_emb)
            .with_lexicon(&lex, MatchConfig::default());
        let weighted = greedy_movers_distance(
            &ctx,
            &src.documents[0],
            &tgt.documents[0],
            &uniform_mass(0, 1),
            &uniform_mass(0, 1),
        )
        .unwrap();
        // count = 1 (init) + 1 (single) + 1 (phrase) = 3 on a 4-token sentence
        // -> weight 1/4.
        assert!((weighted.distance - baseline * 0.25).abs() < 1e-9);
    }

    fn unit_doc_corpora() -> (Corpus, Corpus, EmbeddingMatrix, EmbeddingMatrix) {
        // Two documents per side sharing one date; embeddings make (a,x) and
        // (b,y) the cheap pairings.
        let src = corpus_of(&[
            ("a", "2020-01-01", &["first src doc"]),
            ("b", "2020-01-01", &["second src doc"]),
        ]);
        let tgt = corpus_of(&[
            ("x", "2020-01-01", &["first tgt doc"]),
            ("y", "2020-01-01", &["second tgt doc"]),
        ]);
        let src_emb = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.1], vec![0.1, 1.0]]).unwrap();
        (src, tgt, src_emb, tgt_emb)
    }

    #[test]
    fn align_documents_competitive_matching() {
        let (src, tgt, src_emb, tgt_emb) = unit_doc_corpora();
        let alignment = align_documents(
            &src,
            &tgt,
            &src_emb,
            &tgt_emb,
            None,
            &DocAlignConfig::default(),
        )
        .unwrap();
        let pairs: Vec<(String, String)> = alignment
            .pairs
            .iter()
            .map(|p| (p.src_id.clone(), p.tgt_id.clone()))
            .collect();
        assert_eq!(
            pairs,
            vec![
                ("a".to_string(), "x".to_string()),
                ("b".to_string(), "y".to_string())
            ]
        );
        // Sorted ascending by distance.
        assert!(alignment.pairs[0].distance <= alignment.pairs[1].distance);
    }

    #[test]
    fn align_documents_never_pairs_across_disjoint_dates() {
        let src = corpus_of(&[("a", "2020-01-01", &["identical sentence"])]);
        let tgt = corpus_of(&[("x", "2020-03-01", &["identical sentence"])]);
        let emb = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let aligned = align_documents(
            &src,
            &tgt,
            &emb,
            &emb.clone(),
            None,
            &DocAlignConfig::default(),
        )
        .unwrap();
        assert!(aligned.pairs.is_empty());

        // Disabling the date filter pairs them.
        let aligned = align_documents(
            &src,
            &tgt,
            &emb,
            &emb.clone(),
            None,
            &DocAlignConfig {
                window_days: None,
                ..DocAlignConfig::default()
            },
        )
        .unwrap();
        assert_eq!(aligned.pairs.len(), 1);
    }

    #[test]
    fn align_documents_checks_row_counts() {
        let (src, tgt, src_emb, _) = unit_doc_corpora();
        let bad = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        assert!(
            align_documents(&src, &tgt, &src_emb, &bad, None, &DocAlignConfig::default()).is_err()
        );
    }

    #[test]
    fn align_documents_single_candidate() {
        let src = corpus_of(&[("a", "2020-01-01", &["only src"])]);
        let tgt = corpus_of(&[("x", "2020-01-01", &["only tgt"])]);
        let emb = EmbeddingMatrix::from_rows(vec![vec![1.0]]).unwrap();
        let aligned = align_documents(
            &src,
            &tgt,
            &emb,
            &emb.clone(),
            None,
            &DocAlignConfig::default(),
        )
        .unwrap();
        assert_eq!(aligned.pairs.len(), 1);
        assert_eq!(aligned.pairs[0].src_id, "a");
        assert_eq!(aligned.pairs[0].tgt_id, "x");
    }

    #[test]
    fn gmd_two_by_two_competitive_hand_trace() {
        // Distances {(a,x):~0, (a,y):mid, (b,x):mid, (b,y):large} must yield
        // (a,x) and (b,y) under competitive matching even though (b,y) is the
        // worst pair.
        let src = corpus_of(&[("a", "2020-01-01", &["sa"]), ("b", "2020-01-01", &["sb"])]);
        let tgt = corpus_of(&[("x", "2020-01-01", &["tx"]), ("y", "2020-01-01", &["ty"])]);
        let src_emb = EmbeddingMatrix::from_rows(vec![vec![0.0], vec![10.0]]).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![0.1], vec![30.0]]).unwrap();
        let aligned = align_documents(
            &src,
            &tgt,
            &src_emb,
            &tgt_emb,
            None,
            &DocAlignConfig::default(),
        )
        .unwrap();
        let pairs: Vec<(&str, &str)> = aligned
            .pairs
            .iter()
            .map(|p| (p.src_id.as_str(), p.tgt_id.as_str()))
            .collect();
        assert_eq!(pairs, vec![("a", "x"), ("b", "y")]);
    }
}
