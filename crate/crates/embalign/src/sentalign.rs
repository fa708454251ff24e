//! Sentence alignment over pooled embeddings: forward/backward/intersection
//! candidate generation, lexicon rescoring of top-k candidates, margin
//! scoring and word-budget subsampling.
//!
//! The baseline aligns every source sentence to its highest-cosine target.
//! With a lexicon, the top-k cosine candidates are rescored by
//! `cosine x sent_pair_weight` so candidates sharing dictionary vocabulary
//! with the source win close calls. Backward swaps the roles; intersection
//! keeps only pairs both directions agree on.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{Corpus, SentenceRecord};
use crate::docalign::DocumentAlignment;
use crate::embeddings::{cosine, cosine_with_norms, norm_f64, row_norms, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::lexicon::{combined_match_count, sent_pair_weight, BilingualLexicon, MatchConfig};

/// Default number of cosine candidates considered per sentence.
pub const DEFAULT_K: usize = 4;

/// Candidate generation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// One best target per source sentence.
    Forward,
    /// One best source per target sentence.
    Backward,
    /// Pairs on which forward and backward agree.
    Intersection,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Forward => "forward",
            Strategy::Backward => "backward",
            Strategy::Intersection => "intersection",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Strategy::Forward),
            "backward" => Ok(Strategy::Backward),
            "intersection" => Ok(Strategy::Intersection),
            other => Err(Error::InvalidInput(format!(
                "unknown strategy {other:?} (expected forward|backward|intersection)"
            ))),
        }
    }
}

/// One rescored candidate for a source sentence.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub tgt_sid: usize,
    pub cosine: f64,
    pub weight: f64,
    /// Always `cosine * weight`.
    pub score: f64,
}

/// The rescored top-k candidates of one source sentence, sorted by
/// descending score (ties by ascending target ordinal).
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub src_sid: usize,
    pub candidates: Vec<Candidate>,
}

/// One aligned, scored sentence pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub src_sid: usize,
    pub tgt_sid: usize,
    pub score: f64,
}

/// A sentence alignment under one strategy. Forward emits each source at
/// most once, backward each target, intersection both.
#[derive(Debug, Clone)]
pub struct SentenceAlignment {
    pub strategy: Strategy,
    pub pairs: Vec<ScoredPair>,
}

/// Lexicon rescoring inputs: the lexicon must run from the side being
/// aligned (the "A" side) to the side being searched.
#[derive(Clone, Copy)]
pub struct Rescorer<'a> {
    lexicon: &'a BilingualLexicon,
    a_sents: &'a [SentenceRecord],
    b_sents: &'a [SentenceRecord],
    config: MatchConfig,
}

impl<'a> Rescorer<'a> {
    pub fn new(
        lexicon: &'a BilingualLexicon,
        a_sents: &'a [SentenceRecord],
        b_sents: &'a [SentenceRecord],
        config: MatchConfig,
    ) -> Self {
        Rescorer {
            lexicon,
            a_sents,
            b_sents,
            config,
        }
    }

    /// `sent_pair_weight` of one (a, b) sentence pair; neutral for a
    /// tokenless A-side sentence.
    pub fn weight(&self, a_row: usize, b_row: usize) -> f64 {
        let tokens_a = &self.a_sents[a_row].tokens;
        if tokens_a.is_empty() {
            return 1.0;
        }
        let tokens_b = &self.b_sents[b_row].tokens;
        let count = combined_match_count(tokens_a, tokens_b, self.lexicon, self.config);
        sent_pair_weight(count, tokens_a.len())
    }

    /// The same rescorer looking in the opposite direction, for the backward
    /// pass: the lexicon is inverted and the sentence roles swap.
    pub fn reversed(&self) -> (BilingualLexicon, &'a [SentenceRecord], &'a [SentenceRecord]) {
        (self.lexicon.invert(), self.b_sents, self.a_sents)
    }
}

/// Restricts each A-side row to an explicit candidate pool, typically the
/// sentences of its aligned counterpart document. Rows without an entry are
/// skipped entirely.
#[derive(Debug, Clone, Default)]
pub struct CandidateRestriction {
    allowed: HashMap<usize, Vec<usize>>,
}

impl CandidateRestriction {
    /// Builds the per-sentence pools implied by a one-to-one document
    /// alignment: each source sentence may only match sentences of the
    /// document its own document was paired with.
    pub fn from_document_pairs(
        alignment: &DocumentAlignment,
        src: &Corpus,
        tgt: &Corpus,
    ) -> Result<Self> {
        let mut allowed: HashMap<usize, Vec<usize>> = HashMap::new();
        for pair in &alignment.pairs {
            let s = src.doc_index(&pair.src_id).ok_or_else(|| {
                Error::InvalidInput(format!("unknown source document id {:?}", pair.src_id))
            })?;
            let t = tgt.doc_index(&pair.tgt_id).ok_or_else(|| {
                Error::InvalidInput(format!("unknown target document id {:?}", pair.tgt_id))
            })?;
            let tgt_sids = tgt.documents[t].sentence_ids.clone();
            for &sid in &src.documents[s].sentence_ids {
                allowed.insert(sid, tgt_sids.clone());
            }
        }
        Ok(CandidateRestriction { allowed })
    }

    /// The same restriction seen from the other side, for the backward pass.
    pub fn reversed(&self) -> CandidateRestriction {
        let mut allowed: HashMap<usize, Vec<usize>> = HashMap::new();
        for (&a, bs) in &self.allowed {
            for &b in bs {
                allowed.entry(b).or_default().push(a);
            }
        }
        for pool in allowed.values_mut() {
            pool.sort_unstable();
            pool.dedup();
        }
        CandidateRestriction { allowed }
    }

    fn pool(&self, a_row: usize) -> Option<&[usize]> {
        self.allowed.get(&a_row).map(Vec::as_slice)
    }
}

/// Rescored top-k candidates of one A-side row, for inspection or tests.
pub fn candidate_set(
    a_emb: &EmbeddingMatrix,
    b_emb: &EmbeddingMatrix,
    a_row: usize,
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
) -> Result<CandidateSet> {
    let pool: Vec<usize> = (0..b_emb.rows()).collect();
    let candidates = rescored_candidates(a_emb, b_emb, a_row, &pool, k, rescorer)?;
    Ok(CandidateSet {
        src_sid: a_row,
        candidates,
    })
}

fn rescored_candidates(
    a_emb: &EmbeddingMatrix,
    b_emb: &EmbeddingMatrix,
    a_row: usize,
    pool: &[usize],
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
) -> Result<Vec<Candidate>> {
    let b_norms = row_norms(b_emb);
    rescored_candidates_with_norms(a_emb, b_emb, &b_norms, a_row, pool, k, rescorer)
}

fn rescored_candidates_with_norms(
    a_emb: &EmbeddingMatrix,
    b_emb: &EmbeddingMatrix,
    b_norms: &[f64],
    a_row: usize,
    pool: &[usize],
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
) -> Result<Vec<Candidate>> {
    let row = a_emb.row(a_row);
    let a_norm = norm_f64(row);
    let mut scored = Vec::with_capacity(pool.len());
    for &b in pool {
        scored.push((b, cosine_with_norms(row, b_emb.row(b), a_norm, b_norms[b])?));
    }
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    scored.truncate(k);
    let mut candidates: Vec<Candidate> = scored
        .into_iter()
        .map(|(b, cos)| {
            let weight = rescorer.map_or(1.0, |r| r.weight(a_row, b));
            Candidate {
                tgt_sid: b,
                cosine: cos,
                weight,
                score: cos * weight,
            }
        })
        .collect();
    candidates.sort_by(|x, y| y.score.total_cmp(&x.score).then(x.tgt_sid.cmp(&y.tgt_sid)));
    Ok(candidates)
}

/// Core one-direction alignment: every A row is aligned to its best B row.
fn align_one_direction(
    a_emb: &EmbeddingMatrix,
    b_emb: &EmbeddingMatrix,
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
    restrict: Option<&CandidateRestriction>,
) -> Result<Vec<ScoredPair>> {
    if b_emb.is_empty() {
        return Err(Error::EmptyTargetSide);
    }
    let full_pool: Vec<usize> = (0..b_emb.rows()).collect();
    let b_norms = row_norms(b_emb);
    let picks: Vec<Option<ScoredPair>> = (0..a_emb.rows())
        .into_par_iter()
        .map(|a_row| {
            let pool: &[usize] = match restrict {
                Some(r) => match r.pool(a_row) {
                    Some(p) if !p.is_empty() => p,
                    _ => return Ok(None),
                },
                None => &full_pool,
            };
            if rescorer.is_none() {
                // Baseline: plain argmax over cosine, ties to the lowest row.
                let row = a_emb.row(a_row);
                let a_norm = norm_f64(row);
                let mut best: Option<(usize, f64)> = None;
                for &b in pool {
                    let cos = cosine_with_norms(row, b_emb.row(b), a_norm, b_norms[b])?;
                    let better = match best {
                        None => true,
                        Some((_, s)) => cos > s,
                    };
                    if better {
                        best = Some((b, cos));
                    }
                }
                return Ok(best.map(|(b, s)| ScoredPair {
                    src_sid: a_row,
                    tgt_sid: b,
                    score: s,
                }));
            }
            let candidates =
                rescored_candidates_with_norms(a_emb, b_emb, &b_norms, a_row, pool, k, rescorer)?;
            Ok(candidates.first().map(|c| ScoredPair {
                src_sid: a_row,
                tgt_sid: c.tgt_sid,
                score: c.score,
            }))
        })
        .collect::<Result<_>>()?;
    Ok(picks.into_iter().flatten().collect())
}

/// Aligns each source sentence with its best-scoring target sentence.
///
/// Without a rescorer this is the argmax of cosine similarity over the
/// target pool. With one, the top-`k` cosine candidates are reweighted by
/// [`sent_pair_weight`] and the best rescored candidate wins, ties going to
/// the lowest target ordinal.
pub fn forward_align(
    src_emb: &EmbeddingMatrix,
    tgt_emb: &EmbeddingMatrix,
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
    restrict: Option<&CandidateRestriction>,
) -> Result<SentenceAlignment> {
    let pairs = align_one_direction(src_emb, tgt_emb, k, rescorer, restrict)?;
    Ok(SentenceAlignment {
        strategy: Strategy::Forward,
        pairs,
    })
}

/// The forward strategy with source and target roles swapped. A rescorer, if
/// given, must treat the target side as its "A" side (see
/// [`Rescorer::reversed`]); the restriction likewise.
pub fn backward_align(
    src_emb: &EmbeddingMatrix,
    tgt_emb: &EmbeddingMatrix,
    k: usize,
    rescorer: Option<&Rescorer<'_>>,
    restrict: Option<&CandidateRestriction>,
) -> Result<SentenceAlignment> {
    let pairs = align_one_direction(tgt_emb, src_emb, k, rescorer, restrict)?;
    Ok(SentenceAlignment {
        strategy: Strategy::Backward,
        pairs: pairs
            .into_iter()
            .map(|p| ScoredPair {
                src_sid: p.tgt_sid,
                tgt_sid: p.src_sid,
                score: p.score,
            })
            .collect(),
    })
}

/// Pairs present in both the forward and the backward alignment, with the
/// forward score, in forward order.
pub fn intersect(fwd: &SentenceAlignment, bwd: &SentenceAlignment) -> SentenceAlignment {
    let bwd_pairs: HashSet<(usize, usize)> =
        bwd.pairs.iter().map(|p| (p.src_sid, p.tgt_sid)).collect();
    SentenceAlignment {
        strategy: Strategy::Intersection,
        pairs: fwd
            .pairs
            .iter()
            .filter(|p| bwd_pairs.contains(&(p.src_sid, p.tgt_sid)))
            .cloned()
            .collect(),
    }
}

/// Keeps pairs scoring at least `threshold`, preserving order.
pub fn apply_threshold(aln: &SentenceAlignment, threshold: f64) -> SentenceAlignment {
    SentenceAlignment {
        strategy: aln.strategy,
        pairs: aln
            .pairs
            .iter()
            .filter(|p| p.score >= threshold)
            .cloned()
            .collect(),
    }
}

fn neighborhood_mean(
    emb: &EmbeddingMatrix,
    emb_norms: &[f64],
    row: &[f32],
    k: usize,
) -> Result<f64> {
    let k = k.min(emb.rows()).max(1);
    let row_norm = norm_f64(row);
    let mut scores = Vec::with_capacity(emb.rows());
    for (j, &norm) in emb_norms.iter().enumerate() {
        scores.push(cosine_with_norms(row, emb.row(j), row_norm, norm)?);
    }
    scores.sort_by(|x, y| y.total_cmp(x));
    Ok(scores.iter().take(k).sum::<f64>() / (2.0 * k as f64))
}

/// Ratio-margin score of one candidate pair: the pair's cosine divided by
/// the mean cosine of each side's k nearest neighbours in the other pool.
///
/// `k` is clamped to the available rows on each side. Fails when the
/// denominator vanishes (all-orthogonal neighbourhoods).
pub fn margin_score(
    src_sid: usize,
    tgt_sid: usize,
    src_emb: &EmbeddingMatrix,
    tgt_emb: &EmbeddingMatrix,
    k: usize,
) -> Result<f64> {
    let scores = margin_scores(&[(src_sid, tgt_sid)], src_emb, tgt_emb, k)?;
    Ok(scores[0])
}

/// Batch variant of [`margin_score`]; neighbourhood sums are computed once
/// per distinct row.
pub fn margin_scores(
    pairs: &[(usize, usize)],
    src_emb: &EmbeddingMatrix,
    tgt_emb: &EmbeddingMatrix,
    k: usize,
) -> Result<Vec<f64>> {
    if src_emb.is_empty() || tgt_emb.is_empty() {
        return Err(Error::EmptyIndex);
    }
    let src_rows: Vec<usize> = {
        let mut v: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let tgt_rows: Vec<usize> = {
        let mut v: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let src_norms = row_norms(src_emb);
    let tgt_norms = row_norms(tgt_emb);
    let src_means: HashMap<usize, f64> = src_rows
        .par_iter()
        .map(|&s| {
            Ok((
                s,
                neighborhood_mean(tgt_emb, &tgt_norms, src_emb.row(s), k)?,
            ))
        })
        .collect::<Result<_>>()?;
    let tgt_means: HashMap<usize, f64> = tgt_rows
        .par_iter()
        .map(|&t| {
            Ok((
                t,
                neighborhood_mean(src_emb, &src_norms, tgt_emb.row(t), k)?,
            ))
        })
        .collect::<Result<_>>()?;

    pairs
        .iter()
        .map(|&(s, t)| {
            let num = cosine(src_emb.row(s), tgt_emb.row(t))?;
            let denom = src_means[&s] + tgt_means[&t];
            if denom == 0.0 {
                return Err(Error::ZeroMarginDenominator { src: s, tgt: t });
            }
            Ok(num / denom)
        })
        .collect()
}

/// A candidate pair carrying its margin score.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginPair {
    pub src_sid: usize,
    pub tgt_sid: usize,
    pub margin: f64,
}

/// Selects the best-scoring pairs up to a target-side word budget.
///
/// Pairs are sorted by descending margin (ties by ascending ordinals) and
/// taken while the cumulative target token count is below `budget_words`;
/// the pair that crosses the budget is included, then selection stops. The
/// output is always a prefix of the sorted list.
pub fn subsample_by_budget(
    pairs: &[MarginPair],
    budget_words: usize,
    tgt_token_count: impl Fn(usize) -> usize,
) -> Vec<MarginPair> {
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| {
        b.margin
            .total_cmp(&a.margin)
            .then(a.src_sid.cmp(&b.src_sid))
            .then(a.tgt_sid.cmp(&b.tgt_sid))
    });
    let mut taken = Vec::new();
    let mut words = 0usize;
    for pair in sorted {
        let count = tgt_token_count(pair.tgt_sid);
        taken.push(pair);
        words += count;
        if words >= budget_words {
            break;
        }
    }
    taken
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, DocumentSpec};
    use crate::lexicon::BilingualLexicon;

    fn emb(rows: Vec<Vec<f32>>) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    fn sentences(texts: &[&str]) -> Vec<SentenceRecord> {
        let specs = vec![DocumentSpec {
            id: "d".into(),
            lang: "en".into(),
            date: "2020-01-01".parse().unwrap(),
            url: None,
            sentences: texts.iter().map(|s| s.to_string()).collect(),
        }];
        Corpus::build("en", specs).unwrap().sentences
    }

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn forward_baseline_picks_argmax_cosine() {
        let src = emb(vec![vec![1.0, 0.0]]);
        let tgt = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let aln = forward_align(&src, &tgt, DEFAULT_K, None, None).unwrap();
        assert_eq!(aln.pairs.len(), 1);
        assert_eq!(aln.pairs[0].tgt_sid, 0);
        assert!((aln.pairs[0].score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn forward_errors_on_empty_target() {
        let src = emb(vec![vec![1.0]]);
        let tgt = EmbeddingMatrix::from_rows(vec![]).unwrap();
        assert!(matches!(
            forward_align(&src, &tgt, 4, None, None),
            Err(Error::EmptyTargetSide)
        ));
    }

    #[test]
    fn rescoring_can_flip_the_winner_within_top_k() {
        // Cosines 0.80 and 0.78; the weaker candidate carries one phrase
        // match on a 3-token source -> weight 1.5, rescored 1.17 vs 0.80.
        let src_emb = emb(vec![vec![1.0, 0.0]]);
        let tgt_emb = emb(vec![
            vec![0.80, (1.0f32 - 0.80 * 0.80).sqrt()],
            vec![0.78, (1.0f32 - 0.78 * 0.78).sqrt()],
        ]);
        let src_sents = sentences(&["john smith speaks"]);
        let tgt_sents = sentences(&["nothing matching here", "JJJ talks now"]);
        let mut lex = BilingualLexicon::new("en", "si");
        lex.insert(toks("john smith"), toks("jjj")).unwrap();
        let config = MatchConfig {
            count_init: 0,
            ..MatchConfig::default()
        };
        let rescorer = Rescorer::new(&lex, &src_sents, &tgt_sents, config);

        let baseline = forward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        assert_eq!(baseline.pairs[0].tgt_sid, 0);

        let rescored = forward_align(&src_emb, &tgt_emb, 4, Some(&rescorer), None).unwrap();
        assert_eq!(rescored.pairs[0].tgt_sid, 1);

        let set = candidate_set(&src_emb, &tgt_emb, 0, 4, Some(&rescorer)).unwrap();
        for c in &set.candidates {
            assert!((c.score - c.cosine * c.weight).abs() < 1e-12);
        }
        // One 2-gram hit on a 3-token source: weight 3/(3-1) = 1.5, and the
        // rescored winner scores about 0.78 * 1.5 = 1.17.
        assert!((set.candidates[0].weight - 1.5).abs() < 1e-12);
        assert!((set.candidates[0].score - 1.17).abs() < 1e-6);
    }

    #[test]
    fn empty_lexicon_rescoring_preserves_baseline_pairs() {
        let src_emb = emb(vec![vec![0.9, 0.1], vec![0.2, 0.8]]);
        let tgt_emb = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
        let src_sents = sentences(&["alpha beta gamma", "delta epsilon"]);
        let tgt_sents = sentences(&["one", "two", "three"]);
        let lex = BilingualLexicon::new("en", "si");
        let rescorer = Rescorer::new(&lex, &src_sents, &tgt_sents, MatchConfig::default());

        let baseline = forward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        let rescored = forward_align(&src_emb, &tgt_emb, 4, Some(&rescorer), None).unwrap();
        let base_pairs: Vec<(usize, usize)> = baseline
            .pairs
            .iter()
            .map(|p| (p.src_sid, p.tgt_sid))
            .collect();
        let resc_pairs: Vec<(usize, usize)> = rescored
            .pairs
            .iter()
            .map(|p| (p.src_sid, p.tgt_sid))
            .collect();
        assert_eq!(base_pairs, resc_pairs);
        // With count_init 1 and |s_A| = n, every weight is n/(n-1).
        let set = candidate_set(&src_emb, &tgt_emb, 0, 4, Some(&rescorer)).unwrap();
        for c in &set.candidates {
            assert!((c.weight - 3.0 / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_is_forward_with_roles_swapped() {
        let src_emb = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7]]);
        let tgt_emb = emb(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
        let bwd = backward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        let fwd_swapped = forward_align(&tgt_emb, &src_emb, 4, None, None).unwrap();
        assert_eq!(bwd.pairs.len(), fwd_swapped.pairs.len());
        for (b, f) in bwd.pairs.iter().zip(&fwd_swapped.pairs) {
            assert_eq!(b.src_sid, f.tgt_sid);
            assert_eq!(b.tgt_sid, f.src_sid);
            assert_eq!(b.score, f.score);
        }
        // One pair per target sentence.
        assert_eq!(bwd.pairs.len(), tgt_emb.rows());
    }

    #[test]
    fn backward_single_target_many_sources() {
        let src_emb = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]]);
        let tgt_emb = emb(vec![vec![0.6, 0.8]]);
        let bwd = backward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        assert_eq!(bwd.pairs.len(), 1);
        assert_eq!(bwd.pairs[0].tgt_sid, 0);
    }

    #[test]
    fn rescored_winner_stays_within_cosine_top_k() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let n = rng.random_range(1..=6usize);
            let m = rng.random_range(1..=10usize);
            let rows = |rng: &mut rand_chacha::ChaCha8Rng, count: usize| {
                (0..count)
                    .map(|_| (0..4).map(|_| rng.random_range(-1.0f32..1.0)).collect())
                    .collect::<Vec<Vec<f32>>>()
            };
            let src_emb = emb(rows(&mut rng, n));
            let tgt_emb = emb(rows(&mut rng, m));
            let src_sents: Vec<String> = (0..n).map(|i| format!("alpha bet gam {i}")).collect();
            // Only even targets carry the matching token, so rescoring
            // actually reorders candidates.
            let tgt_sents: Vec<String> = (0..m)
                .map(|i| {
                    if i % 2 == 0 {
                        format!("delta eps {i}")
                    } else {
                        format!("delta other {i}")
                    }
                })
                .collect();
            let src_sents = sentences(&src_sents.iter().map(String::as_str).collect::<Vec<_>>());
            let tgt_sents = sentences(&tgt_sents.iter().map(String::as_str).collect::<Vec<_>>());
            // Weights vary per pair: "gam" maps to the shared "eps" token.
            let mut lex = BilingualLexicon::new("en", "si");
            lex.insert(toks("gam"), toks("eps")).unwrap();
            let rescorer = Rescorer::new(&lex, &src_sents, &tgt_sents, MatchConfig::default());
            let k = rng.random_range(1..=4usize);

            let aligned = forward_align(&src_emb, &tgt_emb, k, Some(&rescorer), None).unwrap();
            for pair in &aligned.pairs {
                let baseline = candidate_set(&src_emb, &tgt_emb, pair.src_sid, k, None).unwrap();
                let top_k: Vec<usize> = baseline.candidates.iter().map(|c| c.tgt_sid).collect();
                assert!(
                    top_k.contains(&pair.tgt_sid),
                    "chosen target {} not in cosine top-{k} {top_k:?}",
                    pair.tgt_sid
                );
            }
        }
    }

    #[test]
    fn intersection_keeps_agreed_pairs_only() {
        let fwd = SentenceAlignment {
            strategy: Strategy::Forward,
            pairs: vec![
                ScoredPair {
                    src_sid: 0,
                    tgt_sid: 1,
                    score: 0.9,
                },
                ScoredPair {
                    src_sid: 1,
                    tgt_sid: 2,
                    score: 0.8,
                },
            ],
        };
        let bwd = SentenceAlignment {
            strategy: Strategy::Backward,
            pairs: vec![
                ScoredPair {
                    src_sid: 0,
                    tgt_sid: 1,
                    score: 0.85,
                },
                ScoredPair {
                    src_sid: 3,
                    tgt_sid: 2,
                    score: 0.7,
                },
            ],
        };
        let both = intersect(&fwd, &bwd);
        assert_eq!(both.pairs.len(), 1);
        assert_eq!(both.pairs[0].src_sid, 0);
        assert_eq!(both.pairs[0].score, 0.9);
        assert!(both.pairs.len() <= fwd.pairs.len().min(bwd.pairs.len()));
    }

    #[test]
    fn threshold_filters_by_score() {
        let aln = SentenceAlignment {
            strategy: Strategy::Forward,
            pairs: vec![
                ScoredPair {
                    src_sid: 0,
                    tgt_sid: 0,
                    score: 0.9,
                },
                ScoredPair {
                    src_sid: 1,
                    tgt_sid: 1,
                    score: 0.5,
                },
            ],
        };
        assert_eq!(apply_threshold(&aln, f64::NEG_INFINITY).pairs.len(), 2);
        assert_eq!(apply_threshold(&aln, 0.7).pairs.len(), 1);
        assert!(apply_threshold(&aln, 2.0).pairs.is_empty());
    }

    #[test]
    fn margin_is_one_for_singleton_pools() {
        let src = emb(vec![vec![1.0, 0.2]]);
        let tgt = emb(vec![vec![0.8, 0.4]]);
        let m = margin_score(0, 0, &src, &tgt, 1).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn margin_matches_direct_recomputation() {
        let src = emb(vec![vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0]]);
        let tgt = emb(vec![vec![0.9, 0.1], vec![0.2, 0.9], vec![0.5, 0.5]]);
        let k = 2;
        let m = margin_score(1, 2, &src, &tgt, k).unwrap();

        // Independent arithmetic: mean of top-2 cosines on each side.
        let cos = |u: &[f32], v: &[f32]| cosine(u, v).unwrap();
        let x = src.row(1);
        let y = tgt.row(2);
        let mut xs: Vec<f64> = (0..3).map(|j| cos(x, tgt.row(j))).collect();
        xs.sort_by(|a, b| b.total_cmp(a));
        let mut ys: Vec<f64> = (0..3).map(|i| cos(y, src.row(i))).collect();
        ys.sort_by(|a, b| b.total_cmp(a));
        let denom = (xs[0] + xs[1]) / 4.0 + (ys[0] + ys[1]) / 4.0;
        let expected = cos(x, y) / denom;
        assert!((m - expected).abs() < 1e-12);
    }

    #[test]
    fn margin_invariant_under_uniform_scaling() {
        let src = emb(vec![vec![1.0, 0.0], vec![0.6, 0.8]]);
        let tgt = emb(vec![vec![0.9, 0.1], vec![0.2, 0.9]]);
        let scaled_src = emb(vec![vec![2.0, 0.0], vec![1.2, 1.6]]);
        let scaled_tgt = emb(vec![vec![1.8, 0.2], vec![0.4, 1.8]]);
        for (s, t) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let a = margin_score(s, t, &src, &tgt, 2).unwrap();
            let b = margin_score(s, t, &scaled_src, &scaled_tgt, 2).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn subsample_stops_after_crossing_budget() {
        let pairs: Vec<MarginPair> = (0..4)
            .map(|i| MarginPair {
                src_sid: i,
                tgt_sid: i,
                margin: 1.0 - i as f64 * 0.1,
            })
            .collect();
        // Every target sentence has 5 tokens.
        let counts = |_sid: usize| 5usize;
        assert_eq!(subsample_by_budget(&pairs, 10, counts).len(), 2);
        assert_eq!(subsample_by_budget(&pairs, 1, counts).len(), 1);
        assert_eq!(subsample_by_budget(&pairs, 1000, counts).len(), 4);
        // Prefix of the margin-sorted order.
        let out = subsample_by_budget(&pairs, 10, counts);
        assert_eq!(out[0].src_sid, 0);
        assert_eq!(out[1].src_sid, 1);
    }

    #[test]
    fn restriction_limits_candidate_pools() {
        let src_emb = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let tgt_emb = emb(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let mut allowed = HashMap::new();
        allowed.insert(0usize, vec![1usize]);
        let restriction = CandidateRestriction { allowed };
        let aln = forward_align(&src_emb, &tgt_emb, 4, None, Some(&restriction)).unwrap();
        // Row 0 is forced to target 1; row 1 has no pool and is skipped.
        assert_eq!(aln.pairs.len(), 1);
        assert_eq!(aln.pairs[0].src_sid, 0);
        assert_eq!(aln.pairs[0].tgt_sid, 1);

        let rev = restriction.reversed();
        assert_eq!(rev.pool(1), Some(&[0usize][..]));
    }
}
