//! Integration tests of the full alignment pipeline: lexicon weighting
//! changing document-level decisions, restriction to aligned documents, and
//! the neutrality switches.

use embalign::corpus::{load_corpus_auto, load_corpus_str};
use embalign::docalign::{align_documents, DocAlignConfig, WeightScheme};
use embalign::embeddings::EmbeddingMatrix;
use embalign::eval::{recall, EvalTask, GoldAlignment};
use embalign::lexicon::{load_lexicon_str, MatchConfig};
use embalign::sentalign::{forward_align, CandidateRestriction};
use embalign::synth::{generate, SynthConfig};

/// Two source and two target documents whose embeddings favour the wrong
/// pairing by a factor of two, while shared names favour the right one.
/// The lexicon weight (matched 0.25 vs unmatched 0.75 on four-token
/// sentences) outweighs the geometry and flips the alignment.
#[test]
fn lexicon_weighting_flips_ambiguous_document_alignment() {
    let src = load_corpus_str(
        concat!(
            r#"{"id":"a","lang":"en","date":"2020-06-01","sentences":["kamala perera cabinet spoke"]}"#,
            "\n",
            r#"{"id":"b","lang":"en","date":"2020-06-01","sentences":["nimal silva minister spoke"]}"#,
        ),
        Some("en"),
        0,
        "src.jsonl",
    )
    .unwrap();
    let tgt = load_corpus_str(
        concat!(
            r#"{"id":"x","lang":"si","date":"2020-06-01","sentences":["කමලා පෙරේරා කැබිනට් කිව්වා"]}"#,
            "\n",
            r#"{"id":"y","lang":"si","date":"2020-06-01","sentences":["නිමල් සිල්වා ඇමති කිව්වා"]}"#,
        ),
        Some("si"),
        0,
        "tgt.jsonl",
    )
    .unwrap();

    // Geometry: x sits twice as far from a as from b, and y twice as far
    // from b as from a, so the unweighted greedy pairing is (a,y), (b,x).
    let src_emb = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.9, 0.1]]).unwrap();
    let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![0.8, 0.2], vec![1.1, -0.1]]).unwrap();

    let config = DocAlignConfig {
        scheme: WeightScheme::RelFreq,
        ..DocAlignConfig::default()
    };

    let baseline = align_documents(&src, &tgt, &src_emb, &tgt_emb, None, &config).unwrap();
    let mut baseline_pairs: Vec<(&str, &str)> = baseline
        .pairs
        .iter()
        .map(|p| (p.src_id.as_str(), p.tgt_id.as_str()))
        .collect();
    baseline_pairs.sort();
    assert_eq!(baseline_pairs, vec![("a", "y"), ("b", "x")]);

    let (lex, skipped) = load_lexicon_str(
        "kamala\tකමලා\nperera\tපෙරේරා\ncabinet\tකැබිනට්\n\
         nimal\tනිමල්\nsilva\tසිල්වා\nminister\tඇමති\n",
        "en",
        "si",
        "names.tsv",
    )
    .unwrap();
    assert_eq!(skipped, 0);

    let weighted = align_documents(&src, &tgt, &src_emb, &tgt_emb, Some(&lex), &config).unwrap();
    let mut weighted_pairs: Vec<(&str, &str)> = weighted
        .pairs
        .iter()
        .map(|p| (p.src_id.as_str(), p.tgt_id.as_str()))
        .collect();
    weighted_pairs.sort();
    assert_eq!(weighted_pairs, vec![("a", "x"), ("b", "y")]);
}

/// Restricting sentence candidates to aligned document pairs keeps every
/// emitted pair inside its counterpart document and preserves recall on the
/// synthetic fixture.
#[test]
fn doc_pair_restriction_confines_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig {
        n_docs: 20,
        sents_per_doc: 5,
        dim: 24,
        noise_sigma: 0.01,
        seed: 5,
    };
    let paths = generate(&config, dir.path()).unwrap();
    let src = load_corpus_auto(&paths.src_corpus, 0).unwrap();
    let tgt = load_corpus_auto(&paths.tgt_corpus, 0).unwrap();
    let src_emb = EmbeddingMatrix::load(&paths.src_emb, 24, src.sentences.len()).unwrap();
    let tgt_emb = EmbeddingMatrix::load(&paths.tgt_emb, 24, tgt.sentences.len()).unwrap();

    let doc_alignment = align_documents(
        &src,
        &tgt,
        &src_emb,
        &tgt_emb,
        None,
        &DocAlignConfig::default(),
    )
    .unwrap();
    let restriction =
        CandidateRestriction::from_document_pairs(&doc_alignment, &src, &tgt).unwrap();

    let aligned = forward_align(&src_emb, &tgt_emb, 4, None, Some(&restriction)).unwrap();

    // Every pair stays within the counterpart document.
    for pair in &aligned.pairs {
        let src_doc = src.sentences[pair.src_sid].doc_index;
        let tgt_doc = tgt.sentences[pair.tgt_sid].doc_index;
        let expected_tgt_id = doc_alignment
            .pairs
            .iter()
            .find(|p| p.src_id == src.documents[src_doc].id)
            .map(|p| p.tgt_id.as_str())
            .expect("source document was aligned");
        assert_eq!(tgt.documents[tgt_doc].id, expected_tgt_id);
    }

    let gold = GoldAlignment::load(&paths.gold_sents).unwrap();
    let report = recall(
        EvalTask::Sentence,
        aligned
            .pairs
            .iter()
            .map(|p| (p.src_sid.to_string(), p.tgt_sid.to_string())),
        &gold,
    )
    .unwrap();
    assert_eq!(report.recall, 1.0);
}

/// An empty lexicon with a zero counter init must not change document
/// distances at all; with the default init of one it rescales them but (on
/// uniform-length synthetic sentences) keeps the pairing.
#[test]
fn count_init_zero_is_exactly_neutral_for_documents() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig {
        n_docs: 12,
        sents_per_doc: 4,
        dim: 16,
        noise_sigma: 0.05,
        seed: 8,
    };
    let paths = generate(&config, dir.path()).unwrap();
    let src = load_corpus_auto(&paths.src_corpus, 0).unwrap();
    let tgt = load_corpus_auto(&paths.tgt_corpus, 0).unwrap();
    let src_emb = EmbeddingMatrix::load(&paths.src_emb, 16, src.sentences.len()).unwrap();
    let tgt_emb = EmbeddingMatrix::load(&paths.tgt_emb, 16, tgt.sentences.len()).unwrap();
    let empty = embalign::lexicon::BilingualLexicon::new(&src.lang, &tgt.lang);

    let baseline = align_documents(
        &src,
        &tgt,
        &src_emb,
        &tgt_emb,
        None,
        &DocAlignConfig::default(),
    )
    .unwrap();

    let neutral = align_documents(
        &src,
        &tgt,
        &src_emb,
        &tgt_emb,
        Some(&empty),
        &DocAlignConfig {
            match_config: MatchConfig {
                count_init: 0,
                ..MatchConfig::default()
            },
            ..DocAlignConfig::default()
        },
    )
    .unwrap();

    assert_eq!(baseline.pairs.len(), neutral.pairs.len());
    for (b, n) in baseline.pairs.iter().zip(&neutral.pairs) {
        assert_eq!(b.src_id, n.src_id);
        assert_eq!(b.tgt_id, n.tgt_id);
        assert_eq!(b.distance, n.distance, "distances must be bit-identical");
    }

    // Default init shrinks distances (weight < 1) but must stay one-to-one.
    let scaled = align_documents(
        &src,
        &tgt,
        &src_emb,
        &tgt_emb,
        Some(&empty),
        &DocAlignConfig::default(),
    )
    .unwrap();
    assert_eq!(scaled.pairs.len(), baseline.pairs.len());
    for (b, s) in baseline.pairs.iter().zip(&scaled.pairs) {
        assert!(s.distance <= b.distance + 1e-12);
    }
}
