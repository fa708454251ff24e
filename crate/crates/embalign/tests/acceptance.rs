//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured result (run with `--nocapture` to see them).
//!
//! The criteria are property-based: transport bounds against a brute-force
//! assignment oracle, matching counters against literal-removal oracles, an
//! end-to-end run on the deterministic synthetic fixture, and format/
//! determinism checks. No external dataset or pre-trained encoder is needed.

use std::collections::HashSet;
use std::time::Instant;

use rand::prelude::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use embalign::corpus::{load_corpus_auto, Corpus, DocumentSpec};
use embalign::docalign::{
    align_documents, greedy_movers_distance, sentence_masses, DocAlignConfig, GmdContext, IdfStats,
    WeightScheme, WeightVector,
};
use embalign::embeddings::EmbeddingMatrix;
use embalign::eval::{recall, EvalTask, GoldAlignment};
use embalign::lexicon::{
    count_matches_phrase, count_matches_single, doc_pair_weight, load_lexicon_str,
    sent_pair_weight, BilingualLexicon, MatchConfig,
};
use embalign::sentalign::{backward_align, forward_align, intersect, Rescorer};
use embalign::synth::{generate, SynthConfig};
use embalign::tsv;

fn pass(criterion: &str, detail: String) {
    println!("[PASS] {criterion}: {detail}");
}

fn single_doc_corpus(id: &str, n: usize) -> Corpus {
    Corpus::build(
        "xx",
        vec![DocumentSpec {
            id: id.into(),
            lang: "xx".into(),
            date: "2020-01-01".parse().unwrap(),
            url: None,
            sentences: (0..n).map(|i| format!("{id} sentence {i}")).collect(),
        }],
    )
    .unwrap()
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f32>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect())
        .collect()
}

fn uniform(n: usize) -> WeightVector {
    WeightVector {
        doc_index: 0,
        scheme: WeightScheme::RelFreq,
        masses: vec![1.0 / n as f64; n],
    }
}

fn gmd_distance(src_rows: Vec<Vec<f32>>, tgt_rows: Vec<Vec<f32>>) -> f64 {
    let (n, m) = (src_rows.len(), tgt_rows.len());
    let src = single_doc_corpus("a", n);
    let tgt = single_doc_corpus("b", m);
    let src_emb = EmbeddingMatrix::from_rows(src_rows).unwrap();
    let tgt_emb = EmbeddingMatrix::from_rows(tgt_rows).unwrap();
    let ctx = GmdContext::new(&src, &tgt, &src_emb, &tgt_emb);
    greedy_movers_distance(
        &ctx,
        &src.documents[0],
        &tgt.documents[0],
        &uniform(n),
        &uniform(m),
    )
    .unwrap()
    .distance
}

/// Exact transport distance of two equal-size uniform-mass point sets:
/// minimum over permutations of the mean pair distance.
fn assignment_emd(src: &[Vec<f32>], tgt: &[Vec<f32>]) -> f64 {
    fn go(
        src: &[Vec<f32>],
        tgt: &[Vec<f32>],
        used: &mut Vec<bool>,
        i: usize,
        acc: f64,
        best: &mut f64,
    ) {
        if i == src.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..tgt.len() {
            if used[j] {
                continue;
            }
            used[j] = true;
            let d = embalign::embeddings::euclidean(&src[i], &tgt[j]).unwrap();
            go(src, tgt, used, i + 1, acc + d, best);
            used[j] = false;
        }
    }
    let mut best = f64::INFINITY;
    go(src, tgt, &mut vec![false; tgt.len()], 0, 0.0, &mut best);
    best / src.len() as f64
}

#[test]
fn a1_transport_oracle_inequality() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut max_gap_below = 0.0f64;
    for case in 0..200 {
        let n = rng.random_range(2..=6usize);
        let src = random_rows(&mut rng, n, 8);
        let tgt = random_rows(&mut rng, n, 8);
        let exact = assignment_emd(&src, &tgt);
        let greedy = gmd_distance(src, tgt);
        assert!(
            greedy >= exact - 1e-9,
            "case {case}: greedy {greedy} < exact {exact}"
        );
        max_gap_below = max_gap_below.max(exact - greedy);
    }

    // Diagonal-dominant construction: every (i, i) pair is far cheaper than
    // any cross pair, so the greedy order is itself the optimal assignment.
    for n in 2..=6usize {
        let src: Vec<Vec<f32>> = (0..n)
            .map(|i| {
                let mut v = vec![0.0f32; 8];
                v[i] = 100.0 * (i + 1) as f32;
                v
            })
            .collect();
        let tgt: Vec<Vec<f32>> = src
            .iter()
            .map(|v| v.iter().map(|&x| x + 0.01).collect())
            .collect();
        let exact = assignment_emd(&src, &tgt);
        let greedy = gmd_distance(src, tgt);
        assert!(
            (greedy - exact).abs() <= 1e-9,
            "diagonal case n={n}: greedy {greedy} != exact {exact}"
        );
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        "A1",
        format!(
            "greedy >= exact on 200 random instances (worst violation {max_gap_below:.2e}), \
             equality on 5 diagonal-dominant cases, {elapsed:?}"
        ),
    );
}

#[test]
fn a2_identity_and_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut max_self = 0.0f64;
    let mut max_asym = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=7usize);
        let m = rng.random_range(2..=7usize);
        let a_rows = random_rows(&mut rng, n, 8);
        let b_rows = random_rows(&mut rng, m, 8);

        let self_dist = gmd_distance(a_rows.clone(), a_rows.clone());
        max_self = max_self.max(self_dist.abs());
        assert!(self_dist.abs() <= 1e-9, "GMD(A,A) = {self_dist}");

        let ab = gmd_distance(a_rows.clone(), b_rows.clone());
        let ba = gmd_distance(b_rows, a_rows);
        max_asym = max_asym.max((ab - ba).abs());
        assert!((ab - ba).abs() <= 1e-9, "GMD(A,B) {ab} != GMD(B,A) {ba}");
    }
    pass(
        "A2",
        format!(
            "GMD(A,A)=0 (max {max_self:.2e}) and GMD(A,B)=GMD(B,A) \
             (max gap {max_asym:.2e}) on 100 random pairs"
        ),
    );
}

/// Literal-removal oracle for the single-token pass.
fn oracle_single(a: &[String], b: &[String], lex: &BilingualLexicon) -> u32 {
    let mut count = 1;
    let mut residue: Vec<String> = b.to_vec();
    for w in a {
        let Some(translations) = lex.get(std::slice::from_ref(w)) else {
            continue;
        };
        for v in translations {
            if v.len() != 1 {
                continue;
            }
            if let Some(pos) = residue.iter().position(|t| *t == v[0]) {
                residue.remove(pos);
                count += 1;
                break;
            }
        }
    }
    count
}

/// Sentinel-slot oracle for the phrase pass, same longest-first policy.
fn oracle_phrase(a: &[String], b: &[String], lex: &BilingualLexicon, config: MatchConfig) -> u32 {
    let mut a_live = vec![true; a.len()];
    let mut b_live = vec![true; b.len()];
    let mut count = 1;
    let max_len = config.max_phrase_len.min(a.len());
    for len in (1..=max_len).rev() {
        for start in 0..=a.len().saturating_sub(len) {
            if a.is_empty() {
                break;
            }
            if config.consume_source && a_live[start..start + len].iter().any(|&x| !x) {
                continue;
            }
            let Some(translations) = lex.get(&a[start..start + len]) else {
                continue;
            };
            'translations: for v in translations {
                if v.is_empty() || v.len() > b.len() {
                    continue;
                }
                for bs in 0..=b.len() - v.len() {
                    let hit = (0..v.len()).all(|o| b_live[bs + o] && b[bs + o] == v[o]);
                    if hit {
                        for o in 0..v.len() {
                            b_live[bs + o] = false;
                        }
                        if config.consume_source {
                            for o in 0..len {
                                a_live[start + o] = false;
                            }
                        }
                        count += 1;
                        break 'translations;
                    }
                }
            }
        }
    }
    count
}

fn random_tokens(rng: &mut ChaCha8Rng, vocab: &[&str], max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| vocab.choose(rng).unwrap().to_string())
        .collect()
}

#[test]
fn a3_matching_algorithm_oracle() {
    let src_vocab = ["a", "b", "c", "d", "e", "f"];
    let tgt_vocab = ["p", "q", "r", "s", "t", "u"];
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for case in 0..1000 {
        let mut lex = BilingualLexicon::new("xx", "yy");
        for _ in 0..rng.random_range(0..=10usize) {
            let src_len = rng.random_range(1..=3usize);
            let tgt_len = rng.random_range(1..=3usize);
            let src: Vec<String> = (0..src_len)
                .map(|_| src_vocab.choose(&mut rng).unwrap().to_string())
                .collect();
            let tgt: Vec<String> = (0..tgt_len)
                .map(|_| tgt_vocab.choose(&mut rng).unwrap().to_string())
                .collect();
            lex.insert(src, tgt).unwrap();
        }
        let a = random_tokens(&mut rng, &src_vocab, 8);
        let b = random_tokens(&mut rng, &tgt_vocab, 8);

        let got_single = count_matches_single(&a, &b, &lex).count;
        let want_single = oracle_single(&a, &b, &lex);
        assert_eq!(got_single, want_single, "single mismatch, case {case}");

        for consume_source in [true, false] {
            let config = MatchConfig {
                consume_source,
                ..MatchConfig::default()
            };
            let got = count_matches_phrase(&a, &b, &lex, config).count;
            let want = oracle_phrase(&a, &b, &lex, config);
            assert_eq!(
                got, want,
                "phrase mismatch, case {case}, consume_source {consume_source}"
            );
        }

        // Declared counter bounds.
        assert!(got_single >= 1 && got_single as usize <= 1 + a.len());
    }
    pass(
        "A3",
        "single and phrase counters equal their brute-force oracles on 1000 random cases".into(),
    );
}

struct Fixture {
    src: Corpus,
    tgt: Corpus,
    src_emb: EmbeddingMatrix,
    tgt_emb: EmbeddingMatrix,
    gold_docs: GoldAlignment,
    gold_sents: GoldAlignment,
}

fn load_fixture(config: &SynthConfig, dir: &std::path::Path) -> Fixture {
    let paths = generate(config, dir).unwrap();
    let src = load_corpus_auto(&paths.src_corpus, 0).unwrap();
    let tgt = load_corpus_auto(&paths.tgt_corpus, 0).unwrap();
    let src_emb = EmbeddingMatrix::load(&paths.src_emb, config.dim, src.sentences.len()).unwrap();
    let tgt_emb = EmbeddingMatrix::load(&paths.tgt_emb, config.dim, tgt.sentences.len()).unwrap();
    let gold_docs = GoldAlignment::load(&paths.gold_docs).unwrap();
    let gold_sents = GoldAlignment::load(&paths.gold_sents).unwrap();
    Fixture {
        src,
        tgt,
        src_emb,
        tgt_emb,
        gold_docs,
        gold_sents,
    }
}

fn acceptance_fixture_config() -> SynthConfig {
    SynthConfig {
        n_docs: 200,
        sents_per_doc: 10,
        dim: 64,
        noise_sigma: 0.01,
        seed: 42,
    }
}

#[test]
fn a4_synthetic_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let fixture = load_fixture(&acceptance_fixture_config(), dir.path());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();

    let started = Instant::now();
    let (doc_recall, sent_recall) = pool.install(|| {
        let aligned = align_documents(
            &fixture.src,
            &fixture.tgt,
            &fixture.src_emb,
            &fixture.tgt_emb,
            None,
            &DocAlignConfig {
                scheme: WeightScheme::SentLength,
                ..DocAlignConfig::default()
            },
        )
        .unwrap();
        let doc_report = recall(
            EvalTask::Document,
            aligned
                .pairs
                .iter()
                .map(|p| (p.src_id.clone(), p.tgt_id.clone())),
            &fixture.gold_docs,
        )
        .unwrap();

        let forward = forward_align(&fixture.src_emb, &fixture.tgt_emb, 4, None, None).unwrap();
        let sent_report = recall(
            EvalTask::Sentence,
            forward
                .pairs
                .iter()
                .map(|p| (p.src_sid.to_string(), p.tgt_sid.to_string())),
            &fixture.gold_sents,
        )
        .unwrap();
        (doc_report.recall, sent_report.recall)
    });
    let elapsed = started.elapsed();

    assert!(doc_recall >= 0.95, "document recall {doc_recall}");
    assert!(sent_recall >= 0.95, "sentence recall {sent_recall}");
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        "A4",
        format!(
            "synthetic fixture: document recall {doc_recall:.3}, forward sentence recall \
             {sent_recall:.3}, single-threaded in {elapsed:?}"
        ),
    );
}

#[test]
fn a5_rescoring_neutrality() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig {
        n_docs: 60,
        sents_per_doc: 6,
        dim: 32,
        noise_sigma: 0.01,
        seed: 42,
    };
    let fixture = load_fixture(&config, dir.path());
    let empty_lexicon = BilingualLexicon::new(&fixture.src.lang, &fixture.tgt.lang);

    let baseline = forward_align(&fixture.src_emb, &fixture.tgt_emb, 4, None, None).unwrap();
    let base_pairs: Vec<(usize, usize)> = baseline
        .pairs
        .iter()
        .map(|p| (p.src_sid, p.tgt_sid))
        .collect();

    for count_init in [1, 0] {
        let rescorer = Rescorer::new(
            &empty_lexicon,
            &fixture.src.sentences,
            &fixture.tgt.sentences,
            MatchConfig {
                count_init,
                ..MatchConfig::default()
            },
        );
        let rescored =
            forward_align(&fixture.src_emb, &fixture.tgt_emb, 4, Some(&rescorer), None).unwrap();
        let pairs: Vec<(usize, usize)> = rescored
            .pairs
            .iter()
            .map(|p| (p.src_sid, p.tgt_sid))
            .collect();
        assert_eq!(base_pairs, pairs, "count_init {count_init} changed pairs");
    }
    pass(
        "A5",
        format!(
            "empty-lexicon rescoring (count-init 1 and 0) is pair-identical to baseline on \
             {} sources",
            base_pairs.len()
        ),
    );
}

#[test]
fn a6_strategy_algebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for case in 0..50 {
        let n = rng.random_range(1..=12usize);
        let m = rng.random_range(1..=12usize);
        let src_emb = EmbeddingMatrix::from_rows(random_rows(&mut rng, n, 6)).unwrap();
        let tgt_emb = EmbeddingMatrix::from_rows(random_rows(&mut rng, m, 6)).unwrap();

        let fwd = forward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        let bwd = backward_align(&src_emb, &tgt_emb, 4, None, None).unwrap();
        let both = intersect(&fwd, &bwd);

        assert_eq!(fwd.pairs.len(), n, "forward must emit one pair per source");
        let fwd_sources: HashSet<usize> = fwd.pairs.iter().map(|p| p.src_sid).collect();
        assert_eq!(fwd_sources.len(), n);

        let fwd_set: HashSet<(usize, usize)> =
            fwd.pairs.iter().map(|p| (p.src_sid, p.tgt_sid)).collect();
        let bwd_set: HashSet<(usize, usize)> =
            bwd.pairs.iter().map(|p| (p.src_sid, p.tgt_sid)).collect();
        for pair in &both.pairs {
            let key = (pair.src_sid, pair.tgt_sid);
            assert!(fwd_set.contains(&key), "case {case}: {key:?} not forward");
            assert!(bwd_set.contains(&key), "case {case}: {key:?} not backward");
        }
        assert!(both.pairs.len() <= fwd.pairs.len().min(bwd.pairs.len()));
    }
    pass(
        "A6",
        "intersection is a subset of forward and backward; forward emits one pair per source \
         on 50 random instances"
            .into(),
    );
}

#[test]
fn a7_weight_algebra() {
    let mut checked = 0usize;
    for len in 1..=50usize {
        for count in 0..len as u32 {
            let product = doc_pair_weight(count, len) * sent_pair_weight(count, len);
            assert!(
                (product - 1.0).abs() <= 1e-12,
                "count {count}, len {len}: product {product}"
            );
            checked += 1;
        }
        // Clamped cases stay within the declared ranges.
        for count in [len as u32, len as u32 + 5, u32::MAX] {
            let doc = doc_pair_weight(count, len);
            let sent = sent_pair_weight(count, len);
            assert!(doc > 0.0 && doc <= 1.0, "doc weight {doc} out of range");
            assert!(
                (1.0..=len as f64).contains(&sent),
                "sent weight {sent} out of range for len {len}"
            );
        }
    }
    pass(
        "A7",
        format!("doc x sent weight = 1 on {checked} unclamped (count, len) cases; clamps in range"),
    );
}

#[test]
fn a8_mass_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let word = |rng: &mut ChaCha8Rng| format!("w{}", rng.random_range(0..40));
    let specs: Vec<DocumentSpec> = (0..100)
        .map(|i| {
            let n_sents = rng.random_range(1..=10usize);
            let sentences = (0..n_sents)
                .map(|_| {
                    let n_words = rng.random_range(1..=8usize);
                    (0..n_words)
                        .map(|_| word(&mut rng))
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            DocumentSpec {
                id: format!("d{i}"),
                lang: "xx".into(),
                date: "2020-01-01".parse().unwrap(),
                url: None,
                sentences,
            }
        })
        .collect();
    let corpus = Corpus::build("xx", specs).unwrap();
    let idf = IdfStats::from_corpus(&corpus);

    let mut worst = 0.0f64;
    for doc_index in 0..corpus.documents.len() {
        for scheme in WeightScheme::ALL {
            let wv = sentence_masses(doc_index, &corpus, scheme, Some(&idf)).unwrap();
            let total: f64 = wv.masses.iter().sum();
            worst = worst.max((total - 1.0).abs());
            assert!(
                (total - 1.0).abs() <= 1e-9,
                "doc {doc_index}, {scheme}: sum {total}"
            );
        }
    }

    // Raw IDF spot value: N=3 documents, df=1.
    let small = Corpus::build(
        "xx",
        (0..3)
            .map(|i| DocumentSpec {
                id: format!("s{i}"),
                lang: "xx".into(),
                date: "2020-01-01".parse().unwrap(),
                url: None,
                sentences: vec![format!("only in doc {i}")],
            })
            .collect(),
    )
    .unwrap();
    let small_idf = IdfStats::from_corpus(&small);
    let raw = small_idf.raw_weight("only in doc 0");
    assert!(
        (raw - (1.0 + 2.0f64.ln())).abs() <= 1e-12,
        "raw idf {raw} != 1 + ln 2"
    );
    pass(
        "A8",
        format!(
            "all four schemes sum to 1 on 100 random documents (worst gap {worst:.2e}); \
             idf raw weight for N=3, df=1 is 1 + ln 2"
        ),
    );
}

#[test]
fn a9_determinism_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = SynthConfig {
        n_docs: 60,
        sents_per_doc: 6,
        dim: 32,
        noise_sigma: 0.05,
        seed: 9,
    };
    let fixture = load_fixture(&config, dir.path());

    let run = |threads: usize| -> (String, String) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let docs = align_documents(
                &fixture.src,
                &fixture.tgt,
                &fixture.src_emb,
                &fixture.tgt_emb,
                None,
                &DocAlignConfig::default(),
            )
            .unwrap();
            let doc_tsv: String = docs
                .pairs
                .iter()
                .map(|p| tsv::format_pair_row(&p.src_id, &p.tgt_id, p.distance) + "\n")
                .collect();
            let sents = forward_align(&fixture.src_emb, &fixture.tgt_emb, 4, None, None).unwrap();
            let sent_tsv: String = sents
                .pairs
                .iter()
                .map(|p| {
                    tsv::format_pair_row(&p.src_sid.to_string(), &p.tgt_sid.to_string(), p.score)
                        + "\n"
                })
                .collect();
            (doc_tsv, sent_tsv)
        })
    };

    let single_a = run(1);
    let single_b = run(1);
    let many_a = run(8);
    let many_b = run(8);
    assert_eq!(single_a, single_b, "1-worker runs differ");
    assert_eq!(many_a, many_b, "8-worker runs differ");
    assert_eq!(single_a, many_a, "1-worker and 8-worker outputs differ");
    pass(
        "A9",
        "document and sentence outputs are byte-identical across repeats and 1 vs 8 workers".into(),
    );
}

#[test]
fn a10_format_fidelity() {
    let dir = tempfile::tempdir().unwrap();

    // Embedding loader rejects size-mismatched files.
    let emb_path = dir.path().join("vectors.emb");
    EmbeddingMatrix::from_rows(vec![vec![0.5f32, -0.25], vec![1.5, 0.75]])
        .unwrap()
        .save(&emb_path)
        .unwrap();
    assert!(EmbeddingMatrix::load(&emb_path, 2, 2).is_ok());
    assert!(matches!(
        EmbeddingMatrix::load(&emb_path, 2, 3),
        Err(embalign::Error::EmbeddingSize { .. })
    ));
    assert!(matches!(
        EmbeddingMatrix::load(&emb_path, 3, 2),
        Err(embalign::Error::EmbeddingSize { .. })
    ));

    // Lexicon loader merges repeated source keys.
    let (lex, skipped) = load_lexicon_str(
        "name\tthree\nname\tdrei\nname\tthree\nother\tx",
        "en",
        "de",
        "mem",
    )
    .unwrap();
    assert_eq!(skipped, 0);
    assert_eq!(lex.len(), 2);
    let name_key = vec!["name".to_string()];
    assert_eq!(lex.get(&name_key).unwrap().len(), 2);

    // Alignment TSV round-trip preserves pairs and 9-decimal scores exactly.
    let scores = [
        0.0,
        1.0 / 3.0,
        std::f64::consts::SQRT_2,
        0.123456789,
        12.000000001,
    ];
    let original: String = scores
        .iter()
        .enumerate()
        .map(|(i, &s)| tsv::format_pair_row(&format!("s{i}"), &format!("t{i}"), s) + "\n")
        .collect();
    let tsv_path = dir.path().join("pairs.tsv");
    tsv::write_atomic(&tsv_path, original.as_bytes()).unwrap();
    let rows = tsv::read_pair_rows(&tsv_path).unwrap();
    let rewritten: String = rows
        .iter()
        .map(|r| tsv::format_pair_row(&r.src, &r.tgt, r.score.unwrap()) + "\n")
        .collect();
    assert_eq!(original, rewritten);
    assert_eq!(rows.len(), scores.len());

    pass(
        "A10",
        "loader rejects bad sizes, repeated lexicon keys merge, TSV round-trip is exact".into(),
    );
}
