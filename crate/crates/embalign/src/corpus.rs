//! Document collections: ingestion, tokenization and date partitioning.
//!
//! A corpus is loaded from a JSON-lines file, one document object per line:
//!
//! ```json
//! {"id":"d1","lang":"en","date":"2020-01-01","url":"...","sentences":["...", "..."]}
//! ```
//!
//! Either `sentences` (array of strings) or `text` (string, newline-separated
//! sentences) must be present; unknown fields are ignored. Sentences are kept
//! in document order and every sentence receives a global ordinal (`sid`) that
//! ties it to a row of the embedding matrix loaded alongside the corpus.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use chrono::{Days, NaiveDate};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Default length filter: documents whose merged text is shorter than this
/// many characters are dropped at load time.
pub const DEFAULT_MIN_CHARS: usize = 50;

/// One document of a corpus. Sentences are referenced by global ordinal.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub lang: String,
    pub date: NaiveDate,
    pub url: Option<String>,
    /// Global sentence ordinals, non-empty and strictly increasing.
    pub sentence_ids: Vec<usize>,
}

/// One sentence occurrence, tied to its owning document.
#[derive(Debug, Clone)]
pub struct SentenceRecord {
    /// Global ordinal, 0-based index into [`Corpus::sentences`].
    pub sid: usize,
    /// Index of the owning document in [`Corpus::documents`].
    pub doc_index: usize,
    /// Position within the owning document.
    pub position: usize,
    pub text: String,
    /// Exactly `tokenize(text)`.
    pub tokens: Vec<String>,
}

/// An immutable document collection for one language.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub lang: String,
    pub documents: Vec<Document>,
    pub sentences: Vec<SentenceRecord>,
    /// Document indices grouped by publication day.
    pub by_date: BTreeMap<NaiveDate, Vec<usize>>,
    id_index: HashMap<String, usize>,
}

/// Input for building a [`Corpus`] in memory, one per document.
#[derive(Debug, Clone)]
pub struct DocumentSpec {
    pub id: String,
    pub lang: String,
    pub date: NaiveDate,
    pub url: Option<String>,
    pub sentences: Vec<String>,
}

impl Corpus {
    /// Assembles a corpus from per-document sentence lists.
    ///
    /// Sentences are trimmed; empty ones are dropped. Documents left with no
    /// sentences are dropped entirely (a document must own at least one
    /// sentence). Global ordinals are assigned contiguously in document
    /// order, then position order.
    pub fn build(lang: impl Into<String>, specs: Vec<DocumentSpec>) -> Result<Self> {
        let lang = lang.into();
        let mut documents = Vec::new();
        let mut sentences: Vec<SentenceRecord> = Vec::new();
        let mut by_date: BTreeMap<NaiveDate, Vec<usize>> = BTreeMap::new();
        let mut id_index = HashMap::new();

        for spec in specs {
            let kept: Vec<String> = spec
                .sentences
                .iter()
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            if kept.is_empty() {
                continue;
            }
            if id_index.contains_key(&spec.id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate document id {:?}",
                    spec.id
                )));
            }
            let doc_index = documents.len();
            let mut sentence_ids = Vec::with_capacity(kept.len());
            for (position, text) in kept.into_iter().enumerate() {
                let sid = sentences.len();
                let tokens = tokenize(&text);
                sentences.push(SentenceRecord {
                    sid,
                    doc_index,
                    position,
                    text,
                    tokens,
                });
                sentence_ids.push(sid);
            }
            id_index.insert(spec.id.clone(), doc_index);
            by_date.entry(spec.date).or_default().push(doc_index);
            documents.push(Document {
                id: spec.id,
                lang: spec.lang,
                date: spec.date,
                url: spec.url,
                sentence_ids,
            });
        }

        Ok(Corpus {
            lang,
            documents,
            sentences,
            by_date,
            id_index,
        })
    }

    /// Index of the document with the given id, if present.
    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    pub fn document_by_id(&self, id: &str) -> Option<&Document> {
        self.doc_index(id).map(|i| &self.documents[i])
    }

    /// Sentence records of one document, in position order.
    pub fn doc_sentences(&self, doc_index: usize) -> impl Iterator<Item = &SentenceRecord> {
        self.documents[doc_index]
            .sentence_ids
            .iter()
            .map(|&sid| &self.sentences[sid])
    }
}

#[derive(Deserialize)]
struct RawDocument {
    id: String,
    lang: String,
    date: String,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    sentences: Option<Vec<String>>,
    #[serde(default)]
    text: Option<String>,
}

/// Loads a corpus from a JSON-lines file.
///
/// `lang` is the expected language code; a record with a different `lang`
/// field is rejected. Documents whose merged text (the `text` field, or the
/// `sentences` joined with newlines) is shorter than `min_chars` characters
/// are dropped. Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>, lang: &str, min_chars: usize) -> Result<Corpus> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corpus = load_corpus_str(&input, Some(lang), min_chars, path)?;
    Ok(corpus)
}

/// Loads a corpus from a JSON-lines file, taking the language from the first
/// record instead of requiring it up front.
pub fn load_corpus_auto(path: impl AsRef<Path>, min_chars: usize) -> Result<Corpus> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_corpus_str(&input, None, min_chars, path)
}

/// In-memory variant of [`load_corpus`]; `origin` names the source in errors.
pub fn load_corpus_str(
    input: &str,
    lang: Option<&str>,
    min_chars: usize,
    origin: impl AsRef<Path>,
) -> Result<Corpus> {
    let origin = origin.as_ref();
    let mut specs = Vec::new();
    let mut seen_ids: HashMap<String, usize> = HashMap::new();
    let mut corpus_lang: Option<String> = lang.map(str::to_owned);

    for (line_no, line) in input.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawDocument = serde_json::from_str(line)
            .map_err(|e| Error::parse(origin, line_no, format!("malformed document: {e}")))?;
        let expected = corpus_lang.get_or_insert_with(|| raw.lang.clone());
        if raw.lang != *expected {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "document language {:?} does not match corpus language {:?}",
                    raw.lang, expected
                ),
            ));
        }
        let date = NaiveDate::parse_from_str(&raw.date, "%Y-%m-%d").map_err(|_| {
            Error::parse(
                origin,
                line_no,
                format!("unparseable date {:?} (expected YYYY-MM-DD)", raw.date),
            )
        })?;
        if let Some(prev) = seen_ids.insert(raw.id.clone(), line_no) {
            return Err(Error::parse(
                origin,
                line_no,
                format!(
                    "duplicate document id {:?} (first seen on line {prev})",
                    raw.id
                ),
            ));
        }
        let (sentences, merged_len) = match (raw.sentences, raw.text) {
            (Some(sentences), _) => {
                let merged: usize = sentences.iter().map(|s| s.chars().count()).sum::<usize>()
                    + sentences.len().saturating_sub(1);
                (sentences, merged)
            }
            (None, Some(text)) => {
                let merged = text.chars().count();
                let sentences = text.split('\n').map(str::to_owned).collect();
                (sentences, merged)
            }
            (None, None) => {
                return Err(Error::parse(
                    origin,
                    line_no,
                    "document has neither \"sentences\" nor \"text\"",
                ));
            }
        };
        if merged_len < min_chars {
            continue;
        }
        specs.push(DocumentSpec {
            id: raw.id,
            lang: raw.lang,
            date,
            url: raw.url,
            sentences,
        });
    }

    Corpus::build(corpus_lang.unwrap_or_default(), specs)
}

/// Splits on Unicode whitespace, strips leading and trailing punctuation from
/// each token, lowercases, and drops tokens left empty.
///
/// The same rule is applied to every script so that lexicon keys and corpus
/// tokens always agree. Idempotent on its own output joined by spaces.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(is_strip_punct);
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_lowercase())
            }
        })
        .collect()
}

/// Punctuation trimmed from token edges. Covers the ASCII and Latin-1
/// punctuation, the General Punctuation block, the danda marks used with
/// Indic scripts, and the common CJK/fullwidth forms. Letters, digits and
/// combining marks of any script are never stripped.
fn is_strip_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{00A1}'
                | '\u{00A7}'
                | '\u{00AB}'
                | '\u{00B6}'
                | '\u{00B7}'
                | '\u{00BB}'
                | '\u{00BF}'
        )
        || ('\u{2010}'..='\u{2027}').contains(&c)
        || ('\u{2030}'..='\u{205E}').contains(&c)
        || matches!(
            c,
            '\u{0964}' | '\u{0965}' | '\u{060C}' | '\u{061B}' | '\u{061F}'
        )
        || ('\u{3001}'..='\u{3003}').contains(&c)
        || ('\u{3008}'..='\u{3011}').contains(&c)
        || ('\u{3014}'..='\u{301F}').contains(&c)
        || ('\u{FF01}'..='\u{FF0F}').contains(&c)
        || ('\u{FF1A}'..='\u{FF20}').contains(&c)
        || ('\u{FF3B}'..='\u{FF40}').contains(&c)
        || ('\u{FF5B}'..='\u{FF65}').contains(&c)
}

/// A date bucket pairing source documents with the target documents they may
/// align to. Members are document indices into the respective corpora.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateBucket {
    pub src_docs: Vec<usize>,
    pub tgt_docs: Vec<usize>,
}

/// Partitions the two corpora by publication day.
///
/// With `window_days = 0` there is one bucket per calendar day shared by both
/// corpora. With `window_days = w`, source documents of day `d` are bucketed
/// with target documents of days `d-w ..= d+w` (one bucket per source day).
/// Buckets with an empty side are omitted.
pub fn date_buckets(src: &Corpus, tgt: &Corpus, window_days: u32) -> Vec<DateBucket> {
    let mut buckets = Vec::new();
    for (&day, src_docs) in &src.by_date {
        let lo = day
            .checked_sub_days(Days::new(u64::from(window_days)))
            .unwrap_or(NaiveDate::MIN);
        let hi = day
            .checked_add_days(Days::new(u64::from(window_days)))
            .unwrap_or(NaiveDate::MAX);
        let tgt_docs: Vec<usize> = tgt
            .by_date
            .range(lo..=hi)
            .flat_map(|(_, docs)| docs.iter().copied())
            .collect();
        if tgt_docs.is_empty() {
            continue;
        }
        buckets.push(DateBucket {
            src_docs: src_docs.clone(),
            tgt_docs,
        });
    }
    buckets
}

/// A single bucket holding every document of both corpora, used when date
/// filtering is disabled.
pub fn all_pairs_bucket(src: &Corpus, tgt: &Corpus) -> Vec<DateBucket> {
    if src.documents.is_empty() || tgt.documents.is_empty() {
        return Vec::new();
    }
    vec![DateBucket {
        src_docs: (0..src.documents.len()).collect(),
        tgt_docs: (0..tgt.documents.len()).collect(),
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn day(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    fn distinct_day_pairs(buckets: &[DateBucket]) -> HashSet<(usize, usize)> {
        let mut pairs = HashSet::new();
        for b in buckets {
            for &s in &b.src_docs {
                for &t in &b.tgt_docs {
                    pairs.insert((s, t));
                }
            }
        }
        pairs
    }

    fn spec(id: &str, date: &str, sentences: &[&str]) -> DocumentSpec {
        DocumentSpec {
            id: id.into(),
            lang: "en".into(),
            date: day(date),
            url: None,
            sentences: sentences.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn tokenize_strips_punctuation_and_lowercases() {
        assert_eq!(tokenize("John went home."), ["john", "went", "home"]);
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("  a,  b  "), ["a", "b"]);
    }

    #[test]
    fn tokenize_keeps_trailing_combining_marks() {
        // Tamil and Sinhala tokens commonly end in combining vowel signs;
        // those must survive punctuation trimming.
        assert_eq!(tokenize("\u{0BA8}\u{0BBE},"), ["\u{0BA8}\u{0BBE}"]);
        assert_eq!(tokenize("නාලිකා."), ["නාලිකා"]);
    }

    #[test]
    fn tokenize_handles_danda_and_fullwidth() {
        assert_eq!(tokenize("ගියා। සෙ。"), ["ගියා", "සෙ"]);
    }

    proptest! {
        #[test]
        fn tokenize_idempotent(s in "\\PC{0,40}") {
            let once = tokenize(&s);
            let twice = tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }

    #[test]
    fn build_assigns_contiguous_sids() {
        let corpus = Corpus::build(
            "en",
            vec![
                spec("d1", "2020-01-01", &["one two", "three"]),
                spec("d2", "2020-01-02", &["four", "five", "six"]),
            ],
        )
        .unwrap();
        assert_eq!(corpus.documents[0].sentence_ids, vec![0, 1]);
        assert_eq!(corpus.documents[1].sentence_ids, vec![2, 3, 4]);
        assert_eq!(corpus.sentences.len(), 5);
        let per_doc: usize = corpus.documents.iter().map(|d| d.sentence_ids.len()).sum();
        assert_eq!(per_doc, corpus.sentences.len());
    }

    #[test]
    fn build_drops_empty_sentences_and_empty_documents() {
        let corpus = Corpus::build(
            "en",
            vec![
                spec("d1", "2020-01-01", &["  ", "kept"]),
                spec("d2", "2020-01-01", &["   ", ""]),
            ],
        )
        .unwrap();
        assert_eq!(corpus.documents.len(), 1);
        assert_eq!(corpus.sentences[0].text, "kept");
    }

    #[test]
    fn load_applies_min_chars_filter() {
        let input = [
            r#"{"id":"a","lang":"si","date":"2020-01-01","sentences":["a very long first sentence","and quite a long second sentence"]}"#,
            r#"{"id":"b","lang":"si","date":"2020-01-01","sentences":["tiny text here"]}"#,
            r#"{"id":"c","lang":"si","date":"2020-01-02","text":"another sufficiently long document body\nwith two sentences in it"}"#,
        ]
        .join("\n");
        let corpus = load_corpus_str(&input, Some("si"), 50, "mem").unwrap();
        assert_eq!(corpus.documents.len(), 2);
        assert_eq!(corpus.documents[0].id, "a");
        assert_eq!(corpus.documents[1].id, "c");
        assert_eq!(corpus.documents[1].sentence_ids.len(), 2);
    }

    #[test]
    fn load_empty_input_gives_empty_corpus() {
        let corpus = load_corpus_str("", Some("en"), 50, "mem").unwrap();
        assert!(corpus.documents.is_empty());
        assert!(corpus.sentences.is_empty());
    }

    #[test]
    fn load_reports_line_numbers() {
        let input = "{\"id\":\"a\",\"lang\":\"en\",\"date\":\"2020-01-01\",\"sentences\":[\"x\"]}\nnot json";
        let err = load_corpus_str(input, Some("en"), 0, "mem").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn load_rejects_duplicate_ids_and_bad_dates() {
        let dup = [
            r#"{"id":"a","lang":"en","date":"2020-01-01","sentences":["xxxx"]}"#,
            r#"{"id":"a","lang":"en","date":"2020-01-02","sentences":["yyyy"]}"#,
        ]
        .join("\n");
        assert!(matches!(
            load_corpus_str(&dup, Some("en"), 0, "mem").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        let bad = r#"{"id":"a","lang":"en","date":"01/02/2020","sentences":["xxxx"]}"#;
        assert!(matches!(
            load_corpus_str(bad, Some("en"), 0, "mem").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn load_rejects_language_mismatch() {
        let input = r#"{"id":"a","lang":"ta","date":"2020-01-01","sentences":["xxxx"]}"#;
        assert!(load_corpus_str(input, Some("en"), 0, "mem").is_err());
        // Auto mode takes the first record's language.
        let corpus = load_corpus_str(input, None, 0, "mem").unwrap();
        assert_eq!(corpus.lang, "ta");
    }

    fn corpus_for_days(days: &[(&str, usize)]) -> Corpus {
        let mut specs = Vec::new();
        let mut n = 0;
        for (d, count) in days {
            for _ in 0..*count {
                specs.push(spec(&format!("d{n}"), d, &["some sentence"]));
                n += 1;
            }
        }
        Corpus::build("en", specs).unwrap()
    }

    #[test]
    fn date_buckets_same_day() {
        let src = corpus_for_days(&[("2020-01-01", 2)]);
        let tgt = corpus_for_days(&[("2020-01-01", 3)]);
        let buckets = date_buckets(&src, &tgt, 0);
        assert_eq!(buckets.len(), 1);
        assert_eq!(buckets[0].src_docs.len(), 2);
        assert_eq!(buckets[0].tgt_docs.len(), 3);
    }

    #[test]
    fn date_buckets_disjoint_days() {
        let src = corpus_for_days(&[("2020-01-01", 1)]);
        let tgt = corpus_for_days(&[("2020-01-02", 1)]);
        assert!(date_buckets(&src, &tgt, 0).is_empty());
        let buckets = date_buckets(&src, &tgt, 1);
        assert_eq!(buckets.len(), 1);
        assert_eq!(buckets[0].tgt_docs, vec![0]);
    }

    #[test]
    fn zero_window_buckets_pair_each_shared_day_exactly_once() {
        let src = corpus_for_days(&[("2020-01-01", 2), ("2020-01-02", 1), ("2020-01-04", 1)]);
        let tgt = corpus_for_days(&[("2020-01-01", 1), ("2020-01-03", 2), ("2020-01-04", 2)]);
        let buckets = date_buckets(&src, &tgt, 0);
        let pairs = distinct_day_pairs(&buckets);
        let mut expected = HashSet::new();
        for (si, sd) in src.documents.iter().enumerate() {
            for (ti, td) in tgt.documents.iter().enumerate() {
                if sd.date == td.date {
                    expected.insert((si, ti));
                }
            }
        }
        assert_eq!(pairs, expected);
        // No pair may appear in two buckets.
        let total: usize = buckets
            .iter()
            .map(|b| b.src_docs.len() * b.tgt_docs.len())
            .sum();
        assert_eq!(total, pairs.len());
    }

    proptest! {
        #[test]
        fn sentence_counts_partition_the_corpus(
            docs in proptest::collection::vec(
                proptest::collection::vec("[a-z]{1,6}( [a-z]{1,6}){0,4}", 0..5),
                0..8,
            )
        ) {
            let specs: Vec<DocumentSpec> = docs
                .iter()
                .enumerate()
                .map(|(i, sentences)| DocumentSpec {
                    id: format!("d{i}"),
                    lang: "xx".into(),
                    date: day("2020-01-01"),
                    url: None,
                    sentences: sentences.clone(),
                })
                .collect();
            let corpus = Corpus::build("xx", specs).unwrap();
            let per_doc: usize = corpus.documents.iter().map(|d| d.sentence_ids.len()).sum();
            prop_assert_eq!(per_doc, corpus.sentences.len());
            // Global ordinals are contiguous, in document order.
            for (expected_sid, record) in corpus.sentences.iter().enumerate() {
                prop_assert_eq!(record.sid, expected_sid);
                prop_assert!(corpus.documents[record.doc_index].sentence_ids.contains(&record.sid));
            }
            for doc in &corpus.documents {
                prop_assert!(!doc.sentence_ids.is_empty());
                prop_assert!(doc.sentence_ids.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }
}
