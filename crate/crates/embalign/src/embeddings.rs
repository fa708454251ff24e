//! Sentence embedding matrices: binary IO, vector math and exact
//! nearest-neighbour search.
//!
//! The on-disk format is a headerless row-major dump of 32-bit little-endian
//! IEEE-754 floats, the shape produced by the common multilingual encoder
//! toolkits. Row `r` holds the vector of global sentence ordinal `r` of the
//! corpus loaded alongside the file.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tsv;

/// Default vector dimensionality when none is given on the command line.
pub const DEFAULT_DIM: usize = 1024;

/// A dense row-per-sentence embedding matrix. Immutable after load; all
/// entries are finite.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    rows: usize,
    dim: usize,
    values: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Builds a matrix from explicit rows. All rows must share one
    /// dimensionality and contain only finite values.
    pub fn from_rows(rows: Vec<Vec<f32>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
                values.push(v);
            }
        }
        Ok(EmbeddingMatrix {
            rows: rows.len(),
            dim,
            values,
        })
    }

    /// Reads a matrix from a headerless little-endian 32-bit float file.
    ///
    /// The file size must equal `expected_rows * dim * 4` bytes exactly;
    /// non-finite values are rejected with their position.
    pub fn load(path: impl AsRef<Path>, dim: usize, expected_rows: usize) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let expected = (expected_rows as u64) * (dim as u64) * 4;
        if bytes.len() as u64 != expected {
            return Err(Error::EmbeddingSize {
                path: path.to_owned(),
                expected,
                actual: bytes.len() as u64,
                rows: expected_rows,
                dim,
            });
        }
        let mut values = Vec::with_capacity(expected_rows * dim);
        for (i, chunk) in bytes.chunks_exact(4).enumerate() {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: i / dim,
                    col: i % dim,
                });
            }
            values.push(v);
        }
        Ok(EmbeddingMatrix {
            rows: expected_rows,
            dim,
            values,
        })
    }

    /// Writes the matrix in the binary format read by [`EmbeddingMatrix::load`].
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.values.len() * 4);
        for v in &self.values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        tsv::write_atomic(path.as_ref(), &bytes)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, r: usize) -> &[f32] {
        &self.values[r * self.dim..(r + 1) * self.dim]
    }

    /// Returns a copy with every row scaled to unit Euclidean norm.
    /// Fails on a zero row.
    pub fn normalized(&self) -> Result<Self> {
        let mut values = self.values.clone();
        for r in 0..self.rows {
            let row = &self.values[r * self.dim..(r + 1) * self.dim];
            let norm = row
                .iter()
                .map(|&v| f64::from(v) * f64::from(v))
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector);
            }
            for c in 0..self.dim {
                values[r * self.dim + c] = (f64::from(row[c]) / norm) as f32;
            }
        }
        Ok(EmbeddingMatrix {
            rows: self.rows,
            dim: self.dim,
            values,
        })
    }
}

fn check_dims(u: &[f32], v: &[f32]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::DimMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    Ok(())
}

pub(crate) fn dot_f64(u: &[f32], v: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    for i in 0..u.len() {
        dot += f64::from(u[i]) * f64::from(v[i]);
    }
    dot
}

pub(crate) fn norm_f64(u: &[f32]) -> f64 {
    u.iter()
        .map(|&x| f64::from(x) * f64::from(x))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean norms of all rows, for amortized cosine scoring.
pub(crate) fn row_norms(m: &EmbeddingMatrix) -> Vec<f64> {
    (0..m.rows()).map(|r| norm_f64(m.row(r))).collect()
}

/// Cosine from a precomputed pair of norms; same arithmetic as [`cosine`].
pub(crate) fn cosine_with_norms(u: &[f32], v: &[f32], nu: f64, nv: f64) -> Result<f64> {
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot_f64(u, v) / (nu * nv))
}

/// Euclidean distance between two vectors of equal dimensionality.
/// Accumulates in 64-bit floats.
pub fn euclidean(u: &[f32], v: &[f32]) -> Result<f64> {
    check_dims(u, v)?;
    Ok(euclidean_unchecked(u, v))
}

pub(crate) fn euclidean_unchecked(u: &[f32], v: &[f32]) -> f64 {
    let mut sum = 0.0f64;
    for i in 0..u.len() {
        let d = f64::from(u[i]) - f64::from(v[i]);
        sum += d * d;
    }
    sum.sqrt()
}

/// Cosine similarity of two non-zero vectors, in `[-1, 1]`.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64> {
    check_dims(u, v)?;
    let mut dot = 0.0f64;
    let mut nu = 0.0f64;
    let mut nv = 0.0f64;
    for i in 0..u.len() {
        let a = f64::from(u[i]);
        let b = f64::from(v[i]);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// Nearest neighbours of one query row, sorted by descending score.
#[derive(Debug, Clone)]
pub struct NeighborList {
    pub query: usize,
    /// `(index row, cosine score)`, scores non-increasing, ties broken by
    /// ascending row index, at most `k` entries.
    pub neighbors: Vec<(usize, f64)>,
}

/// Exact brute-force k-nearest-neighbour search under cosine similarity.
///
/// For each query row, returns the `k` highest-scoring rows of `index`
/// (fewer when the index is smaller than `k`). Queries run in parallel;
/// the result order follows `query_rows`.
pub fn cosine_knn(
    queries: &EmbeddingMatrix,
    query_rows: &[usize],
    index: &EmbeddingMatrix,
    k: usize,
) -> Result<Vec<NeighborList>> {
    if index.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if queries.dim() != index.dim() {
        return Err(Error::DimMismatch {
            left: queries.dim(),
            right: index.dim(),
        });
    }
    let index_norms = row_norms(index);
    query_rows
        .par_iter()
        .map(|&q| {
            let row = queries.row(q);
            let q_norm = norm_f64(row);
            let mut scored = Vec::with_capacity(index.rows());
            for (j, &norm) in index_norms.iter().enumerate() {
                scored.push((j, cosine_with_norms(row, index.row(j), q_norm, norm)?));
            }
            scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            scored.truncate(k);
            Ok(NeighborList {
                query: q,
                neighbors: scored,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn euclidean_matches_hand_computations() {
        assert_eq!(euclidean(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        let d = euclidean(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert_eq!(euclidean(&[3.0, 4.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert!(euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn cosine_matches_hand_computations() {
        assert_eq!(cosine(&[1.0, 0.0], &[2.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - 1.0 / std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn load_checks_size_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let m = EmbeddingMatrix::from_rows(vec![vec![1.0f32, 0.0]]).unwrap();
        m.save(&path).unwrap();

        let loaded = EmbeddingMatrix::load(&path, 2, 1).unwrap();
        assert_eq!(loaded.rows(), 1);
        assert_eq!(loaded.row(0), &[1.0, 0.0]);

        match EmbeddingMatrix::load(&path, 2, 2) {
            Err(Error::EmbeddingSize {
                expected, actual, ..
            }) => {
                assert_eq!(expected, 16);
                assert_eq!(actual, 8);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn load_rejects_non_finite() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(&1.0f32.to_le_bytes());
        bytes.extend_from_slice(&f32::NAN.to_le_bytes());
        bytes.extend_from_slice(&2.0f32.to_le_bytes());
        bytes.extend_from_slice(&3.0f32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match EmbeddingMatrix::load(&path, 2, 2) {
            Err(Error::NonFinite { row, col }) => {
                assert_eq!((row, col), (0, 1));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn knn_truncates_and_breaks_ties_by_row() {
        let index =
            EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]])
                .unwrap();
        let queries = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();

        let out = cosine_knn(&queries, &[0], &index, 1).unwrap();
        assert_eq!(out[0].neighbors, vec![(0, 1.0)]);

        // k larger than the index: everything comes back.
        let out = cosine_knn(&queries, &[0], &index, 10).unwrap();
        assert_eq!(out[0].neighbors.len(), 3);

        // Exact tie between rows 0 and 1 for query (1,1): row order wins.
        let out = cosine_knn(&queries, &[1], &index, 2).unwrap();
        let rows: Vec<usize> = out[0].neighbors.iter().map(|n| n.0).collect();
        assert_eq!(rows, vec![0, 1]);
        assert!((out[0].neighbors[0].1 - 1.0 / std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn knn_rejects_empty_index() {
        let index = EmbeddingMatrix::from_rows(vec![]).unwrap();
        let queries = EmbeddingMatrix::from_rows(vec![vec![1.0]]).unwrap();
        assert!(matches!(
            cosine_knn(&queries, &[0], &index, 1),
            Err(Error::EmptyIndex)
        ));
    }

    #[test]
    fn knn_results_follow_query_order() {
        let index = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let queries =
            EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.1]])
                .unwrap();
        let out = cosine_knn(&queries, &[2, 0, 1], &index, 1).unwrap();
        let got: Vec<(usize, usize)> = out.iter().map(|n| (n.query, n.neighbors[0].0)).collect();
        assert_eq!(got, vec![(2, 0), (0, 0), (1, 1)]);
    }

    fn finite_vec(dim: usize) -> impl Strategy<Value = Vec<f32>> {
        proptest::collection::vec(-100.0f32..100.0, dim)
    }

    proptest! {
        #[test]
        fn euclidean_symmetric_and_triangle(
            u in finite_vec(6), v in finite_vec(6), w in finite_vec(6)
        ) {
            let uv = euclidean(&u, &v).unwrap();
            let vu = euclidean(&v, &u).unwrap();
            prop_assert!((uv - vu).abs() < 1e-9);
            prop_assert!(euclidean(&u, &u).unwrap() == 0.0);
            let uw = euclidean(&u, &w).unwrap();
            let wv = euclidean(&w, &v).unwrap();
            prop_assert!(uv <= uw + wv + 1e-9);
        }

        #[test]
        fn cosine_scale_invariant(
            u in finite_vec(5), v in finite_vec(5),
            ka in -8i32..8, kb in -8i32..8,
            a in 0.01f32..50.0, b in 0.01f32..50.0
        ) {
            prop_assume!(u.iter().any(|&x| x != 0.0) && v.iter().any(|&x| x != 0.0));
            let base = cosine(&u, &v).unwrap();
            // Power-of-two scales commute exactly with f32 storage.
            let pa = 2.0f32.powi(ka);
            let pb = 2.0f32.powi(kb);
            let su: Vec<f32> = u.iter().map(|&x| x * pa).collect();
            let sv: Vec<f32> = v.iter().map(|&x| x * pb).collect();
            prop_assert!((base - cosine(&su, &sv).unwrap()).abs() < 1e-9);
            // Arbitrary scales round each component to f32 first.
            let su: Vec<f32> = u.iter().map(|&x| x * a).collect();
            let sv: Vec<f32> = v.iter().map(|&x| x * b).collect();
            prop_assert!((base - cosine(&su, &sv).unwrap()).abs() < 1e-6);
        }

        #[test]
        fn knn_equals_full_sort(
            rows in proptest::collection::vec(finite_vec(4), 1..8),
            k in 1usize..6
        ) {
            prop_assume!(rows.iter().all(|r| r.iter().any(|&x| x != 0.0)));
            let index = EmbeddingMatrix::from_rows(rows.clone()).unwrap();
            let queries = EmbeddingMatrix::from_rows(vec![rows[0].clone()]).unwrap();
            let out = cosine_knn(&queries, &[0], &index, k).unwrap();

            let mut oracle: Vec<(usize, f64)> = (0..rows.len())
                .map(|j| (j, cosine(&rows[0], &rows[j]).unwrap()))
                .collect();
            oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            oracle.truncate(k);
            prop_assert_eq!(&out[0].neighbors, &oracle);
        }
    }
}
