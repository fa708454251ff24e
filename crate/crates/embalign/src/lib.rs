//! # embalign
//!
//! Mining parallel documents and sentences from comparable multilingual
//! corpora, given pre-computed sentence embeddings and optional bilingual
//! lexicons.
//!
//! The pipeline has two stages. Document alignment treats each document as a
//! bag of sentences carrying probability mass and pairs documents across
//! languages by a greedy transport distance over sentence embeddings,
//! optionally sharpened by dictionary matches and restricted to documents
//! published on nearby dates. Sentence alignment then scores sentence pairs
//! by cosine similarity (optionally rescored with the same dictionaries),
//! with forward, backward and intersection candidate generation, margin
//! scoring and word-budget subsampling for downstream corpus building.
//!
//! ## Quick tour
//!
//! ```
//! use embalign::corpus::load_corpus_str;
//! use embalign::docalign::{align_documents, DocAlignConfig};
//! use embalign::embeddings::EmbeddingMatrix;
//!
//! # fn main() -> embalign::Result<()> {
//! let src = load_corpus_str(
//!     r#"{"id":"a","lang":"si","date":"2020-04-01","sentences":["මුල් වාක්‍යය"]}"#,
//!     Some("si"), 0, "src.jsonl",
//! )?;
//! let tgt = load_corpus_str(
//!     r#"{"id":"x","lang":"en","date":"2020-04-01","sentences":["first sentence"]}"#,
//!     Some("en"), 0, "tgt.jsonl",
//! )?;
//! let src_emb = EmbeddingMatrix::from_rows(vec![vec![0.9, 0.1]])?;
//! let tgt_emb = EmbeddingMatrix::from_rows(vec![vec![0.88, 0.12]])?;
//!
//! let aligned = align_documents(&src, &tgt, &src_emb, &tgt_emb, None,
//!                               &DocAlignConfig::default())?;
//! assert_eq!(aligned.pairs.len(), 1);
//! assert_eq!(aligned.pairs[0].src_id, "a");
//! # Ok(())
//! # }
//! ```
//!
//! The `book/` directory of the repository is an mdBook walking through each
//! stage; its code snippets compile and run as doc-tests of this crate.

pub mod corpus;
pub mod docalign;
mod error;
pub mod eval;
pub mod lexicon;
pub mod sentalign;
pub mod synth;
pub mod tsv;

pub mod embeddings;

pub use error::{Error, Result};

// Keep the book's code snippets honest: every fenced Rust block in these
// chapters compiles and runs under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(Corpora, "../../../book/src/corpora.md");
    chapter!(Embeddings, "../../../book/src/embeddings.md");
    chapter!(Lexicons, "../../../book/src/lexicons.md");
    chapter!(DocumentAlignment, "../../../book/src/document-alignment.md");
    chapter!(SentenceAlignment, "../../../book/src/sentence-alignment.md");
    chapter!(Evaluation, "../../../book/src/evaluation.md");
}
