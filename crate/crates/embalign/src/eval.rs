//! Recall evaluation against gold alignments.
//!
//! Gold sets are hand-verified but incomplete, so only recall is reported:
//! the fraction of gold pairs the system found. Precision is deliberately
//! not computed, because a predicted pair absent from the gold set is not
//! necessarily wrong.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::tsv;

/// Which alignment task an evaluation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalTask {
    Document,
    Sentence,
}

impl fmt::Display for EvalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalTask::Document => "document",
            EvalTask::Sentence => "sentence",
        })
    }
}

impl FromStr for EvalTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "document" => Ok(EvalTask::Document),
            "sentence" => Ok(EvalTask::Sentence),
            other => Err(Error::InvalidInput(format!(
                "unknown task {other:?} (expected document|sentence)"
            ))),
        }
    }
}

/// A set of known-correct pairs; document ids or sentence ordinals depending
/// on the task.
#[derive(Debug, Clone, Default)]
pub struct GoldAlignment {
    pub pairs: HashSet<(String, String)>,
}

impl GoldAlignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        GoldAlignment {
            pairs: pairs.into_iter().collect(),
        }
    }

    /// Reads a two-column gold TSV (`src<TAB>tgt`); extra columns are
    /// tolerated and ignored.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let rows = tsv::read_pair_rows(path)?;
        Ok(GoldAlignment::from_pairs(
            rows.into_iter().map(|r| (r.src, r.tgt)),
        ))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Outcome of a recall evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub task: EvalTask,
    pub gold_size: usize,
    pub predicted_size: usize,
    pub hits: usize,
    pub recall: f64,
}

/// Recall of a predicted pair set against the gold set: `|pred ∩ gold| /
/// |gold|`. Duplicates in the prediction count once. Fails on an empty gold
/// set.
pub fn recall(
    task: EvalTask,
    predicted: impl IntoIterator<Item = (String, String)>,
    gold: &GoldAlignment,
) -> Result<EvalReport> {
    if gold.is_empty() {
        return Err(Error::EmptyGold);
    }
    let predicted: HashSet<(String, String)> = predicted.into_iter().collect();
    let hits = predicted.iter().filter(|p| gold.pairs.contains(*p)).count();
    Ok(EvalReport {
        task,
        gold_size: gold.len(),
        predicted_size: predicted.len(),
        hits,
        recall: hits as f64 / gold.len() as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let gold = GoldAlignment::from_pairs(pairs(&[("a", "x"), ("b", "y")]));
        let report = recall(EvalTask::Document, pairs(&[("a", "x"), ("b", "y")]), &gold).unwrap();
        assert_eq!(report.recall, 1.0);
        assert_eq!(report.hits, 2);
    }

    #[test]
    fn disjoint_prediction_scores_zero() {
        let gold = GoldAlignment::from_pairs(pairs(&[("a", "x")]));
        let report = recall(EvalTask::Document, pairs(&[("b", "y")]), &gold).unwrap();
        assert_eq!(report.recall, 0.0);
    }

    #[test]
    fn extra_predictions_do_not_hurt_recall() {
        let gold =
            GoldAlignment::from_pairs(pairs(&[("a", "1"), ("b", "2"), ("c", "3"), ("d", "4")]));
        let mut predicted = pairs(&[("a", "1"), ("b", "2"), ("c", "3")]);
        for i in 0..10 {
            predicted.push((format!("junk{i}"), format!("junk{i}")));
        }
        let report = recall(EvalTask::Sentence, predicted, &gold).unwrap();
        assert_eq!(report.hits, 3);
        assert!((report.recall - 0.75).abs() < 1e-12);
    }

    #[test]
    fn recall_monotone_under_prediction_growth() {
        let gold = GoldAlignment::from_pairs(pairs(&[("a", "1"), ("b", "2"), ("c", "3")]));
        let mut predicted = Vec::new();
        let mut last = 0.0;
        for p in pairs(&[("a", "1"), ("z", "9"), ("b", "2"), ("c", "3")]) {
            predicted.push(p);
            let r = recall(EvalTask::Document, predicted.clone(), &gold)
                .unwrap()
                .recall;
            assert!(r >= last);
            last = r;
        }
    }

    #[test]
    fn empty_gold_is_an_error() {
        let gold = GoldAlignment::default();
        assert!(matches!(
            recall(EvalTask::Document, pairs(&[("a", "x")]), &gold),
            Err(Error::EmptyGold)
        ));
    }
}
