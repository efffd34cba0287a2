//! Dense pairwise affinity matrices: cosine similarity, exponential time
//! decay, and their entrywise product.
//!
//! Every builder evaluates each unordered pair once and mirrors it, so the
//! results are exactly symmetric.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::text::TfIdfMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AffinityKind {
    Cosine,
    Decay,
    Combined,
}

/// Row-major dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    order: usize,
    entries: Vec<f64>,
    kind: AffinityKind,
}

impl AffinityMatrix {
    /// Builds a matrix from a row-major buffer. Panics if the buffer length
    /// is not `order * order`.
    pub fn from_entries(order: usize, entries: Vec<f64>, kind: AffinityKind) -> Self {
        assert_eq!(entries.len(), order * order, "entries must be order^2");
        AffinityMatrix {
            order,
            entries,
            kind,
        }
    }

    /// Upper triangle (including the diagonal) from `f(i, j)`, mirrored.
    fn from_pairs<F>(order: usize, kind: AffinityKind, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut entries = vec![0.0; order * order];
        entries
            .par_chunks_mut(order.max(1))
            .enumerate()
            .for_each(|(i, row)| {
                for (j, slot) in row.iter_mut().enumerate().skip(i) {
                    *slot = f(i, j);
                }
            });
        for i in 0..order {
            for j in 0..i {
                entries[i * order + j] = entries[j * order + i];
            }
        }
        AffinityMatrix {
            order,
            entries,
            kind,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> AffinityKind {
        self.kind
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.order..(i + 1) * self.order]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Off-diagonal entries in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.order;
        self.entries
            .iter()
            .enumerate()
            .filter(move |(k, _)| k / m != k % m)
            .map(|(_, &v)| v)
    }

    /// Writes the matrix as CSV with tweet ids labelling rows and columns.
    pub fn write_csv(&self, ids: &[&str], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if ids.len() != self.order {
            return Err(Error::DimensionMismatch {
                left: ids.len(),
                right: self.order,
            });
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        let mut header = Vec::with_capacity(self.order + 1);
        header.push("id".to_string());
        header.extend(ids.iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for (i, id) in ids.iter().enumerate() {
            let mut rec = Vec::with_capacity(self.order + 1);
            rec.push(id.to_string());
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

/// Pairwise cosine similarity of TF-IDF rows. Diagonal is exactly 1.
pub fn cosine_matrix(x: &TfIdfMatrix) -> Result<AffinityMatrix> {
    let norms: Vec<f64> = (0..x.num_rows()).map(|i| x.row_norm(i)).collect();
    if let Some(row) = norms.iter().position(|&n| n <= 0.0) {
        return Err(Error::ZeroNormRow { row });
    }
    Ok(AffinityMatrix::from_pairs(
        x.num_rows(),
        AffinityKind::Cosine,
        |i, j| {
            if i == j {
                1.0
            } else {
                // clamp guards the last ulp; TF-IDF weights are non-negative
                (sparse_dot(&x.rows[i], &x.rows[j]) / (norms[i] * norms[j])).clamp(0.0, 1.0)
            }
        },
    ))
}

/// `exp(-|t_i - t_j| / t_p)`. An infinite `t_p` gives the all-ones matrix.
pub fn decay_matrix(timestamps: &[u64], t_p: f64) -> AffinityMatrix {
    assert!(t_p > 0.0, "t_p must be positive");
    AffinityMatrix::from_pairs(timestamps.len(), AffinityKind::Decay, |i, j| {
        if i == j {
            1.0
        } else {
            let dt = timestamps[i].abs_diff(timestamps[j]) as f64;
            (-dt / t_p).exp()
        }
    })
}

/// Entrywise product `D ∘ E`.
pub fn hadamard(d: &AffinityMatrix, e: &AffinityMatrix) -> Result<AffinityMatrix> {
    if d.order != e.order {
        return Err(Error::DimensionMismatch {
            left: d.order,
            right: e.order,
        });
    }
    let entries = d
        .entries
        .par_iter()
        .zip(e.entries.par_iter())
        .map(|(a, b)| a * b)
        .collect();
    Ok(AffinityMatrix {
        order: d.order,
        entries,
        kind: AffinityKind::Combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::Vocabulary;

    fn dense(rows: &[&[f64]]) -> TfIdfMatrix {
        TfIdfMatrix {
            rows: rows
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|(_, &w)| w != 0.0)
                        .map(|(c, &w)| (c, w))
                        .collect()
                })
                .collect(),
            vocab: Vocabulary::default(),
            doc_frequency: vec![],
        }
    }

    #[test]
    fn cosine_examples() {
        let d = cosine_matrix(&dense(&[
            &[1., 1., 0.],
            &[1., 0., 0.],
            &[0., 0., 2.],
            &[1., 1., 0.],
        ]))
        .unwrap();
        assert!((d.get(0, 1) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!((d.get(0, 1) * 1e6).round(), 707_107.0);
        assert_eq!(d.get(0, 2), 0.0);
        assert!((d.get(0, 3) - 1.0).abs() < 1e-15);
        for i in 0..4 {
            assert_eq!(d.get(i, i), 1.0);
        }
        assert!(d.is_symmetric());
    }

    #[test]
    fn zero_norm_row_is_an_error() {
        let err = cosine_matrix(&dense(&[&[1., 0.], &[0., 0.]])).unwrap_err();
        assert!(matches!(err, Error::ZeroNormRow { row: 1 }));
    }

    #[test]
    fn decay_examples() {
        let e = decay_matrix(&[0, 0, 120, 60], 120.0);
        assert_eq!(e.get(0, 1), 1.0);
        assert!((e.get(0, 2) - (-1f64).exp()).abs() < 1e-15);
        assert!((e.get(0, 2) - 0.367_879).abs() < 1e-6);

        let t_p: f64 = 1.0 / 0.01058;
        assert!((t_p - 94.518).abs() < 1e-3);
        let e = decay_matrix(&[0, 60], t_p);
        assert!((e.get(0, 1) - 0.530_041).abs() < 1e-6);
        assert!(e.is_symmetric());
    }

    #[test]
    fn infinite_time_constant_gives_ones() {
        let e = decay_matrix(&[0, 5, 1_000_000], f64::INFINITY);
        assert!(e.entries().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn hadamard_examples() {
        let d = AffinityMatrix::from_entries(2, vec![1.0, 0.8, 0.8, 1.0], AffinityKind::Cosine);
        let e = AffinityMatrix::from_entries(2, vec![1.0, 0.5, 0.5, 1.0], AffinityKind::Decay);
        let c = hadamard(&d, &e).unwrap();
        assert_eq!(c.kind(), AffinityKind::Combined);
        assert!((c.get(0, 1) - 0.4).abs() < 1e-15);

        let d0 = AffinityMatrix::from_entries(2, vec![1.0, 0.0, 0.0, 1.0], AffinityKind::Cosine);
        assert_eq!(hadamard(&d0, &e).unwrap().get(1, 0), 0.0);

        let mismatch = AffinityMatrix::from_entries(1, vec![1.0], AffinityKind::Decay);
        assert!(matches!(
            hadamard(&d, &mismatch),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn huge_time_constant_approaches_identity() {
        let x = dense(&[&[1., 2., 0.], &[0., 1., 1.], &[3., 0., 1.]]);
        let d = cosine_matrix(&x).unwrap();
        let e = decay_matrix(&[0, 30, 90], 1e15);
        let c = hadamard(&d, &e).unwrap();
        for (a, b) in c.entries().iter().zip(d.entries()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn off_diagonal_skips_diagonal() {
        let m = AffinityMatrix::from_entries(
            3,
            vec![9., 1., 2., 1., 9., 3., 2., 3., 9.],
            AffinityKind::Combined,
        );
        let v: Vec<f64> = m.off_diagonal().collect();
        assert_eq!(v, [1., 2., 1., 3., 2., 3.]);
    }
}
