//! Bilingual lexicons: loading, merging, token matching and pair weights.
//!
//! A lexicon maps source phrases of one to five tokens to sets of target
//! phrases. Two matching passes count how many lexicon entries link a source
//! sentence to a target sentence: a single-token pass
//! ([`count_matches_single`], suited to person-name lists) and a longest-first
//! n-gram pass ([`count_matches_phrase`], suited to designation lists and word
//! dictionaries). Both start their counter at 1 and consume each matched
//! target occurrence so nothing is counted twice.
//!
//! The resulting counter feeds [`doc_pair_weight`] (scales a transport cost
//! down when sentences share vocabulary) and [`sent_pair_weight`] (its
//! multiplicative inverse, which scales a similarity up).

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::corpus::tokenize;
use crate::error::{Error, Result};

/// Maximum number of tokens in a lexicon phrase, either side.
pub const MAX_PHRASE_TOKENS: usize = 5;

/// An ordered list of case-folded tokens, 1..=5 long inside a lexicon.
pub type Phrase = Vec<String>;

/// A directed phrase-to-translations table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BilingualLexicon {
    src_lang: String,
    tgt_lang: String,
    /// Source phrase -> target phrases, insertion-ordered, no duplicates.
    entries: BTreeMap<Phrase, Vec<Phrase>>,
}

impl BilingualLexicon {
    pub fn new(src_lang: impl Into<String>, tgt_lang: impl Into<String>) -> Self {
        BilingualLexicon {
            src_lang: src_lang.into(),
            tgt_lang: tgt_lang.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn src_lang(&self) -> &str {
        &self.src_lang
    }

    pub fn tgt_lang(&self) -> &str {
        &self.tgt_lang
    }

    /// Number of source phrases.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds one translation, merging into an existing entry. Phrases must
    /// have 1..=5 non-empty tokens.
    pub fn insert(&mut self, src: Phrase, tgt: Phrase) -> Result<()> {
        for phrase in [&src, &tgt] {
            if phrase.is_empty() || phrase.len() > MAX_PHRASE_TOKENS {
                return Err(Error::InvalidInput(format!(
                    "lexicon phrase must have 1..={MAX_PHRASE_TOKENS} tokens, got {}",
                    phrase.len()
                )));
            }
            if phrase.iter().any(String::is_empty) {
                return Err(Error::InvalidInput("empty token in lexicon phrase".into()));
            }
        }
        let targets = self.entries.entry(src).or_default();
        if !targets.contains(&tgt) {
            targets.push(tgt);
        }
        Ok(())
    }

    /// Translations of a source phrase, in insertion order.
    pub fn get(&self, phrase: &[String]) -> Option<&[Phrase]> {
        self.entries.get(phrase).map(Vec::as_slice)
    }

    /// Iterates entries in deterministic (sorted) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Phrase, &[Phrase])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// Swaps the direction: every `src -> tgt` pair becomes `tgt -> src`.
    /// Useful when a two-way parallel list was loaded in one direction and
    /// the reverse pass needs the other.
    pub fn invert(&self) -> BilingualLexicon {
        let mut out = BilingualLexicon::new(self.tgt_lang.clone(), self.src_lang.clone());
        for (src, targets) in &self.entries {
            for tgt in targets {
                // Both sides already satisfy the length invariant.
                out.insert(tgt.clone(), src.clone()).expect("valid phrase");
            }
        }
        out
    }

    /// Serializes to the two-column TSV format read by [`load_lexicon`],
    /// phrases joined with single spaces, in deterministic order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (src, targets) in &self.entries {
            for tgt in targets {
                out.push_str(&src.join(" "));
                out.push('\t');
                out.push_str(&tgt.join(" "));
                out.push('\n');
            }
        }
        out
    }

    fn check_direction(&self, other: &BilingualLexicon) -> Result<()> {
        if self.src_lang != other.src_lang || self.tgt_lang != other.tgt_lang {
            return Err(Error::DirectionMismatch {
                left_src: self.src_lang.clone(),
                left_tgt: self.tgt_lang.clone(),
                right_src: other.src_lang.clone(),
                right_tgt: other.tgt_lang.clone(),
            });
        }
        Ok(())
    }
}

/// Loads a two-column TSV lexicon (`source<TAB>target`, `#` comments).
///
/// Both sides are tokenized and case-folded with [`tokenize`]. Repeated
/// source phrases merge their targets into one entry. Rows where either side
/// exceeds five tokens, or tokenizes to nothing (pure punctuation), are
/// skipped; the skip count is returned alongside.
pub fn load_lexicon(
    path: impl AsRef<Path>,
    src_lang: &str,
    tgt_lang: &str,
) -> Result<(BilingualLexicon, usize)> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_lexicon_str(&input, src_lang, tgt_lang, path)
}

/// In-memory variant of [`load_lexicon`]; `origin` names the source in errors.
pub fn load_lexicon_str(
    input: &str,
    src_lang: &str,
    tgt_lang: &str,
    origin: impl AsRef<Path>,
) -> Result<(BilingualLexicon, usize)> {
    let origin = origin.as_ref();
    let mut lex = BilingualLexicon::new(src_lang, tgt_lang);
    let mut skipped = 0;
    for (line_no, line) in input.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (src_text, tgt_text) = split_two_columns(line, origin, line_no)?;
        let src = tokenize(src_text);
        let tgt = tokenize(tgt_text);
        if src.is_empty()
            || tgt.is_empty()
            || src.len() > MAX_PHRASE_TOKENS
            || tgt.len() > MAX_PHRASE_TOKENS
        {
            skipped += 1;
            continue;
        }
        lex.insert(src, tgt)?;
    }
    Ok((lex, skipped))
}

fn split_two_columns<'a>(
    line: &'a str,
    origin: &Path,
    line_no: usize,
) -> Result<(&'a str, &'a str)> {
    let mut cols = line.split('\t');
    let src = cols.next().unwrap_or("");
    let tgt = cols.next();
    let (Some(tgt), None) = (tgt, cols.next()) else {
        return Err(Error::parse(
            origin,
            line_no,
            "expected exactly two tab-separated columns",
        ));
    };
    if src.trim().is_empty() || tgt.trim().is_empty() {
        return Err(Error::parse(origin, line_no, "empty column"));
    }
    Ok((src, tgt))
}

/// Unions several lexicons of the same direction. Target sets merge per
/// source phrase, keeping first-seen order.
pub fn merge_lexicons(parts: &[BilingualLexicon]) -> Result<BilingualLexicon> {
    let Some(first) = parts.first() else {
        return Err(Error::InvalidInput("cannot merge zero lexicons".into()));
    };
    let mut out = first.clone();
    for part in &parts[1..] {
        out.check_direction(part)?;
        for (src, targets) in &part.entries {
            for tgt in targets {
                out.insert(src.clone(), tgt.clone())?;
            }
        }
    }
    Ok(out)
}

/// One source/target span match. Spans are `(start, len)` into the original
/// token lists handed to the matcher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseMatch {
    pub src_span: (usize, usize),
    pub tgt_span: (usize, usize),
}

/// Outcome of a matching pass. The counter starts at 1 and grows by one per
/// recorded match, so `count == 1 + matches.len()` always holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchResult {
    pub count: u32,
    pub matches: Vec<PhraseMatch>,
}

impl MatchResult {
    fn from_matches(matches: Vec<PhraseMatch>) -> Self {
        MatchResult {
            count: 1 + matches.len() as u32,
            matches,
        }
    }
}

/// Single-token matching pass.
///
/// Walks `tokens_a` left to right. For every token present as a one-token
/// key, its translations are scanned in entry order; the first one found as a
/// not-yet-consumed token of `tokens_b` is consumed and counted, and the scan
/// moves to the next source token. Multi-token translations never match here.
/// Caller-owned slices are not mutated.
pub fn count_matches_single(
    tokens_a: &[String],
    tokens_b: &[String],
    lex: &BilingualLexicon,
) -> MatchResult {
    let mut consumed_b = vec![false; tokens_b.len()];
    let mut matches = Vec::new();
    for (i, w) in tokens_a.iter().enumerate() {
        let Some(translations) = lex.get(std::slice::from_ref(w)) else {
            continue;
        };
        for v in translations {
            if v.len() != 1 {
                continue;
            }
            let hit = tokens_b
                .iter()
                .enumerate()
                .position(|(j, t)| !consumed_b[j] && *t == v[0]);
            if let Some(j) = hit {
                consumed_b[j] = true;
                matches.push(PhraseMatch {
                    src_span: (i, 1),
                    tgt_span: (j, 1),
                });
                break;
            }
        }
    }
    MatchResult::from_matches(matches)
}

/// Knobs shared by the phrase matcher and the combined counter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchConfig {
    /// Longest source n-gram to try; capped at [`MAX_PHRASE_TOKENS`].
    pub max_phrase_len: usize,
    /// When set, tokens inside a matched source span are consumed too, so a
    /// word cannot be counted both alone and inside a phrase.
    pub consume_source: bool,
    /// Initial counter value for [`combined_match_count`]; 1 follows the
    /// matching passes, 0 gives a neutral no-match weight.
    pub count_init: u32,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            max_phrase_len: MAX_PHRASE_TOKENS,
            consume_source: true,
            count_init: 1,
        }
    }
}

/// Phrase (n-gram) matching pass.
///
/// Candidate source spans are the contiguous n-grams of `tokens_a`, scanned
/// from the longest length down to 1 and left to right within a length. A
/// span containing an already-consumed token is skipped. On a key hit whose
/// translation appears as a contiguous span of unconsumed `tokens_b`, the
/// counter grows by one and both spans are consumed (the source side only
/// when [`MatchConfig::consume_source`] is set).
pub fn count_matches_phrase(
    tokens_a: &[String],
    tokens_b: &[String],
    lex: &BilingualLexicon,
    config: MatchConfig,
) -> MatchResult {
    let mut consumed_a = vec![false; tokens_a.len()];
    let mut consumed_b = vec![false; tokens_b.len()];
    let mut matches = Vec::new();
    let max_len = config
        .max_phrase_len
        .min(tokens_a.len())
        .min(MAX_PHRASE_TOKENS);
    for len in (1..=max_len).rev() {
        for start in 0..=tokens_a.len() - len {
            if config.consume_source && consumed_a[start..start + len].iter().any(|&c| c) {
                continue;
            }
            let Some(translations) = lex.get(&tokens_a[start..start + len]) else {
                continue;
            };
            for v in translations {
                if let Some(bstart) = find_span(tokens_b, &consumed_b, v) {
                    for flag in &mut consumed_b[bstart..bstart + v.len()] {
                        *flag = true;
                    }
                    if config.consume_source {
                        for flag in &mut consumed_a[start..start + len] {
                            *flag = true;
                        }
                    }
                    matches.push(PhraseMatch {
                        src_span: (start, len),
                        tgt_span: (bstart, v.len()),
                    });
                    break;
                }
            }
        }
    }
    MatchResult::from_matches(matches)
}

/// Leftmost contiguous unconsumed occurrence of `phrase` in `tokens`.
fn find_span(tokens: &[String], consumed: &[bool], phrase: &[String]) -> Option<usize> {
    if phrase.is_empty() || phrase.len() > tokens.len() {
        return None;
    }
    (0..=tokens.len() - phrase.len()).find(|&start| {
        (0..phrase.len()).all(|o| !consumed[start + o] && tokens[start + o] == phrase[o])
    })
}

/// Combined counter feeding the pair weights: the configured initial value
/// plus the matches found by both passes, each pass run on its own fresh
/// copy of the target residue.
pub fn combined_match_count(
    tokens_a: &[String],
    tokens_b: &[String],
    lex: &BilingualLexicon,
    config: MatchConfig,
) -> u32 {
    let single = count_matches_single(tokens_a, tokens_b, lex);
    let phrase = count_matches_phrase(tokens_a, tokens_b, lex, config);
    config.count_init + (single.count - 1) + (phrase.count - 1)
}

/// Distance weight `(|s_A| - count) / |s_A|`, in `(0, 1]`.
///
/// The counter is clamped to `|s_A| - 1` so the weight never reaches zero;
/// for a one-token (or tokenless) source sentence the weight is 1.
pub fn doc_pair_weight(count: u32, len_a: usize) -> f64 {
    if len_a <= 1 {
        return 1.0;
    }
    let c = (count as usize).min(len_a - 1);
    (len_a - c) as f64 / len_a as f64
}

/// Similarity weight `|s_A| / (|s_A| - count)`, in `[1, |s_A|]`; the
/// multiplicative inverse of [`doc_pair_weight`] wherever the clamp is
/// inactive.
pub fn sent_pair_weight(count: u32, len_a: usize) -> f64 {
    if len_a <= 1 {
        return 1.0;
    }
    let c = (count as usize).min(len_a - 1);
    len_a as f64 / (len_a - c) as f64
}

/// Parallel phrase pairs of unrestricted length, the raw material for
/// [`build_improved_lexicon`].
#[derive(Debug, Clone)]
pub struct Glossary {
    src_lang: String,
    tgt_lang: String,
    pub pairs: Vec<(Vec<String>, Vec<String>)>,
}

impl Glossary {
    pub fn src_lang(&self) -> &str {
        &self.src_lang
    }

    pub fn tgt_lang(&self) -> &str {
        &self.tgt_lang
    }
}

/// Loads a glossary from the same two-column TSV format as lexicons, but
/// without any phrase length limit. Rows tokenizing to nothing on either
/// side are skipped and counted.
pub fn load_glossary(
    path: impl AsRef<Path>,
    src_lang: &str,
    tgt_lang: &str,
) -> Result<(Glossary, usize)> {
    let path = path.as_ref();
    let input = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_glossary_str(&input, src_lang, tgt_lang, path)
}

/// In-memory variant of [`load_glossary`].
pub fn load_glossary_str(
    input: &str,
    src_lang: &str,
    tgt_lang: &str,
    origin: impl AsRef<Path>,
) -> Result<(Glossary, usize)> {
    let origin = origin.as_ref();
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (line_no, line) in input.lines().enumerate() {
        let line_no = line_no + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (src_text, tgt_text) = split_two_columns(line, origin, line_no)?;
        let src = tokenize(src_text);
        let tgt = tokenize(tgt_text);
        if src.is_empty() || tgt.is_empty() {
            skipped += 1;
            continue;
        }
        pairs.push((src, tgt));
    }
    Ok((
        Glossary {
            src_lang: src_lang.into(),
            tgt_lang: tgt_lang.into(),
            pairs,
        },
        skipped,
    ))
}

/// Builds an improved dictionary by subtracting known word pairs from
/// glossary phrase pairs.
///
/// For each glossary pair, every token pair `(w, v)` with `v` among
/// `words[w]` is removed once per hit from both sides. When both residues
/// are non-empty and at most five tokens long, `residue_src -> residue_tgt`
/// becomes a new entry. The result is `words` plus the new entries; only
/// single-token keys of `words` participate in the subtraction.
pub fn build_improved_lexicon(
    glossary: &Glossary,
    words: &BilingualLexicon,
) -> Result<BilingualLexicon> {
    if glossary.src_lang != words.src_lang || glossary.tgt_lang != words.tgt_lang {
        return Err(Error::DirectionMismatch {
            left_src: glossary.src_lang.clone(),
            left_tgt: glossary.tgt_lang.clone(),
            right_src: words.src_lang.clone(),
            right_tgt: words.tgt_lang.clone(),
        });
    }
    let mut out = words.clone();
    for (src_tokens, tgt_tokens) in &glossary.pairs {
        let mut consumed_s = vec![false; src_tokens.len()];
        let mut consumed_t = vec![false; tgt_tokens.len()];
        for (i, w) in src_tokens.iter().enumerate() {
            if consumed_s[i] {
                continue;
            }
            let Some(translations) = words.get(std::slice::from_ref(w)) else {
                continue;
            };
            for v in translations {
                if v.len() != 1 {
                    continue;
                }
                let hit = tgt_tokens
                    .iter()
                    .enumerate()
                    .position(|(j, t)| !consumed_t[j] && *t == v[0]);
                if let Some(j) = hit {
                    consumed_s[i] = true;
                    consumed_t[j] = true;
                    break;
                }
            }
        }
        let residue_src: Phrase = src_tokens
            .iter()
            .zip(&consumed_s)
            .filter(|(_, &c)| !c)
            .map(|(t, _)| t.clone())
            .collect();
        let residue_tgt: Phrase = tgt_tokens
            .iter()
            .zip(&consumed_t)
            .filter(|(_, &c)| !c)
            .map(|(t, _)| t.clone())
            .collect();
        if residue_src.is_empty()
            || residue_tgt.is_empty()
            || residue_src.len() > MAX_PHRASE_TOKENS
            || residue_tgt.len() > MAX_PHRASE_TOKENS
        {
            continue;
        }
        out.insert(residue_src, residue_tgt)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn lex_from(entries: &[(&str, &str)]) -> BilingualLexicon {
        let mut lex = BilingualLexicon::new("en", "si");
        for (s, t) in entries {
            lex.insert(toks(s), toks(t)).unwrap();
        }
        lex
    }

    #[test]
    fn load_merges_repeated_sources_and_skips_long_rows() {
        let input = "# comment\na\tx\na\ty\nb\tz\none two three four five six\tx\n";
        let (lex, skipped) = load_lexicon_str(input, "en", "si", "mem").unwrap();
        assert_eq!(skipped, 1);
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.get(&toks("a")).unwrap(), &[toks("x"), toks("y")]);
        assert_eq!(lex.get(&toks("b")).unwrap(), &[toks("z")]);
    }

    #[test]
    fn load_rejects_malformed_rows() {
        assert!(matches!(
            load_lexicon_str("no tab here", "en", "si", "mem"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_lexicon_str("a\tb\tc", "en", "si", "mem"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            load_lexicon_str("a\t  ", "en", "si", "mem"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn merge_unions_targets_and_checks_direction() {
        let a = lex_from(&[("a", "x")]);
        let b = lex_from(&[("a", "y"), ("b", "z")]);
        let merged = merge_lexicons(&[a.clone(), b]).unwrap();
        assert_eq!(merged.get(&toks("a")).unwrap(), &[toks("x"), toks("y")]);
        assert_eq!(merged.get(&toks("b")).unwrap(), &[toks("z")]);

        let single = merge_lexicons(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single, a);

        let reversed = BilingualLexicon::new("si", "en");
        assert!(matches!(
            merge_lexicons(&[a, reversed]),
            Err(Error::DirectionMismatch { .. })
        ));
    }

    #[test]
    fn single_pass_consumes_one_occurrence() {
        let lex = lex_from(&[("john", "X")]);
        let result = count_matches_single(&toks("john went home"), &toks("X Y"), &lex);
        assert_eq!(result.count, 2);
        assert_eq!(result.matches[0].tgt_span, (0, 1));

        let none = count_matches_single(&toks("nothing matches"), &toks("X Y"), &lex);
        assert_eq!(none.count, 1);

        // Second occurrence finds no remaining target.
        let twice = count_matches_single(&toks("john john"), &toks("X"), &lex);
        assert_eq!(twice.count, 2);
    }

    #[test]
    fn single_pass_stops_at_first_found_translation() {
        let lex = lex_from(&[("a", "x"), ("a", "y")]);
        let result = count_matches_single(&toks("a"), &toks("y x"), &lex);
        // "x" is scanned first and found; "y" is never considered.
        assert_eq!(result.count, 2);
        assert_eq!(result.matches[0].tgt_span, (1, 1));
    }

    #[test]
    fn phrase_pass_prefers_longest_ngrams() {
        let lex = lex_from(&[("major general", "MG")]);
        let result = count_matches_phrase(
            &toks("major general silva"),
            &toks("MG silva2"),
            &lex,
            MatchConfig::default(),
        );
        assert_eq!(result.count, 2);
        assert_eq!(result.matches[0].src_span, (0, 2));

        let empty = BilingualLexicon::new("en", "si");
        let none = count_matches_phrase(&toks("a b"), &toks("c"), &empty, MatchConfig::default());
        assert_eq!(none.count, 1);
    }

    #[test]
    fn phrase_pass_consumed_spans_are_skipped() {
        // "a b" is matched first (longest), so neither "a" nor "b" may match again.
        let lex = lex_from(&[("a b", "XY"), ("a", "P"), ("b", "Q")]);
        let result =
            count_matches_phrase(&toks("a b"), &toks("XY P Q"), &lex, MatchConfig::default());
        assert_eq!(result.count, 2);

        // Without source consumption the unigrams match too.
        let loose = count_matches_phrase(
            &toks("a b"),
            &toks("XY P Q"),
            &lex,
            MatchConfig {
                consume_source: false,
                ..MatchConfig::default()
            },
        );
        assert_eq!(loose.count, 4);
    }

    #[test]
    fn phrase_pass_equals_single_pass_on_unigram_lexicons() {
        let lex = lex_from(&[("a", "x"), ("b", "y"), ("c", "z")]);
        for (a, b) in [
            ("a b c", "z y x"),
            ("a a b", "x x"),
            ("c b a", "x y"),
            ("b", "y y"),
        ] {
            let single = count_matches_single(&toks(a), &toks(b), &lex);
            let phrase = count_matches_phrase(&toks(a), &toks(b), &lex, MatchConfig::default());
            assert_eq!(single.count, phrase.count, "inputs {a:?} / {b:?}");
        }
    }

    #[test]
    fn combined_count_uses_single_shared_init() {
        let empty = BilingualLexicon::new("en", "si");
        let a = toks("one two three");
        let b = toks("x y z");
        assert_eq!(
            combined_match_count(&a, &b, &empty, MatchConfig::default()),
            1
        );
        let neutral = MatchConfig {
            count_init: 0,
            ..MatchConfig::default()
        };
        assert_eq!(combined_match_count(&a, &b, &empty, neutral), 0);

        // A unigram hit is seen by both passes.
        let lex = lex_from(&[("one", "x")]);
        assert_eq!(
            combined_match_count(&a, &b, &lex, MatchConfig::default()),
            3
        );
    }

    #[test]
    fn pair_weights_match_hand_substitution() {
        assert!((doc_pair_weight(1, 4) - 0.75).abs() < 1e-12);
        assert!((doc_pair_weight(2, 3) - 1.0 / 3.0).abs() < 1e-12);
        // Clamped: count 10 on a 3-token sentence behaves like count 2.
        assert!((doc_pair_weight(10, 3) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(doc_pair_weight(5, 1), 1.0);

        assert!((sent_pair_weight(2, 4) - 2.0).abs() < 1e-12);
        assert!((sent_pair_weight(1, 4) - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(sent_pair_weight(7, 1), 1.0);

        for len in 2..10usize {
            for count in 0..len as u32 {
                let product = doc_pair_weight(count, len) * sent_pair_weight(count, len);
                assert!((product - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matching_does_not_mutate_inputs() {
        let lex = lex_from(&[("a", "x")]);
        let a = toks("a a b");
        let b = toks("x x");
        let a_before = a.clone();
        let b_before = b.clone();
        let _ = count_matches_single(&a, &b, &lex);
        let _ = count_matches_phrase(&a, &b, &lex, MatchConfig::default());
        assert_eq!(a, a_before);
        assert_eq!(b, b_before);
    }

    #[test]
    fn improved_lexicon_subtracts_known_words() {
        let words = lex_from(&[("a", "x")]);
        let (glossary, _) = load_glossary_str("a b\tX Y", "en", "si", "mem").unwrap();
        let improved = build_improved_lexicon(&glossary, &words).unwrap();
        assert_eq!(improved.get(&toks("b")).unwrap(), &[toks("y")]);
        assert!(improved.get(&toks("a")).is_some());
    }

    #[test]
    fn improved_lexicon_skips_fully_covered_pairs() {
        let words = lex_from(&[("a", "x"), ("b", "y")]);
        let (glossary, _) = load_glossary_str("a b\tY X", "en", "si", "mem").unwrap();
        let improved = build_improved_lexicon(&glossary, &words).unwrap();
        assert_eq!(improved.len(), words.len());
    }

    #[test]
    fn improved_lexicon_adds_untouched_short_pairs_verbatim() {
        let words = lex_from(&[("a", "x")]);
        let (glossary, _) = load_glossary_str("p q\tU V", "en", "si", "mem").unwrap();
        let improved = build_improved_lexicon(&glossary, &words).unwrap();
        assert_eq!(improved.get(&toks("p q")).unwrap(), &[toks("u v")]);
    }

    #[test]
    fn improved_lexicon_drops_long_residues() {
        let words = lex_from(&[("a", "x")]);
        let (glossary, _) = load_glossary_str("p q r s t u\tU V", "en", "si", "mem").unwrap();
        let improved = build_improved_lexicon(&glossary, &words).unwrap();
        assert_eq!(improved.len(), 1);
    }

    #[test]
    fn invert_swaps_direction() {
        let lex = lex_from(&[("a", "x"), ("a", "y")]);
        let inv = lex.invert();
        assert_eq!(inv.src_lang(), "si");
        assert_eq!(inv.get(&toks("x")).unwrap(), &[toks("a")]);
        assert_eq!(inv.get(&toks("y")).unwrap(), &[toks("a")]);
    }
}
