//! Independent reference implementations shared by the property and
//! acceptance suites.
#![allow(dead_code)]

use std::collections::BTreeMap;

use smerc::ap::{affinity_propagation, ApParams, Clustering};
use smerc::text::CleanedTweet;
use smerc::{AffinityKind, AffinityMatrix, Preference};

pub fn cleaned(docs: &[Vec<String>]) -> Vec<CleanedTweet> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| CleanedTweet {
            tweet_index: i,
            stems: d.clone(),
        })
        .collect()
}

/// Dense augmented TF-IDF keyed by stem.
pub fn naive_tfidf(docs: &[Vec<String>]) -> Vec<BTreeMap<String, f64>> {
    let m = docs.len() as f64;
    let mut df: BTreeMap<&str, f64> = BTreeMap::new();
    for d in docs {
        let mut seen: Vec<&str> = d.iter().map(String::as_str).collect();
        seen.sort();
        seen.dedup();
        for s in seen {
            *df.entry(s).or_insert(0.0) += 1.0;
        }
    }
    docs.iter()
        .map(|d| {
            let mut tf: BTreeMap<&str, f64> = BTreeMap::new();
            for s in d {
                *tf.entry(s).or_insert(0.0) += 1.0;
            }
            let fmax = tf.values().cloned().fold(0.0, f64::max);
            df.keys()
                .map(|&s| {
                    let f = tf.get(s).copied().unwrap_or(0.0);
                    let w = if f == 0.0 {
                        0.0
                    } else {
                        (0.5 + 0.5 * f / fmax) * (m / df[s]).ln()
                    };
                    (s.to_string(), w)
                })
                .collect()
        })
        .collect()
}

/// Cosine of dense rows; `None` where either norm is zero.
pub fn naive_cosine(rows: &[BTreeMap<String, f64>]) -> Vec<Vec<Option<f64>>> {
    let norm = |r: &BTreeMap<String, f64>| r.values().map(|v| v * v).sum::<f64>().sqrt();
    rows.iter()
        .map(|a| {
            rows.iter()
                .map(|b| {
                    let (na, nb) = (norm(a), norm(b));
                    if na == 0.0 || nb == 0.0 {
                        return None;
                    }
                    let dot: f64 = a.iter().map(|(k, v)| v * b[k]).sum();
                    Some(dot / (na * nb))
                })
                .collect()
        })
        .collect()
}

pub fn symmetric(m: usize, upper: impl Fn(usize, usize) -> f64) -> AffinityMatrix {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
        for j in i + 1..m {
            let x = upper(i, j);
            v[i * m + j] = x;
            v[j * m + i] = x;
        }
    }
    AffinityMatrix::from_entries(m, v, AffinityKind::Combined)
}

pub fn ap(c: &AffinityMatrix, preference: Preference) -> Clustering {
    let params = ApParams {
        preference,
        ..ApParams::default()
    };
    affinity_propagation(c, &params).expect("clustering runs")
}

/// Exemplars label themselves and every other point picks its most
/// similar exemplar, lowest index first on ties.
pub fn check_assignment(c: &AffinityMatrix, cl: &Clustering) -> Result<(), String> {
    if cl.exemplars.is_empty() {
        return Err("no exemplars".into());
    }
    for &e in &cl.exemplars {
        if cl.assignment[e] != e {
            return Err(format!("exemplar {e} assigned to {}", cl.assignment[e]));
        }
    }
    for (i, &a) in cl.assignment.iter().enumerate() {
        if cl.exemplars.contains(&i) {
            continue;
        }
        let best = cl
            .exemplars
            .iter()
            .copied()
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if c.get(i, b) >= c.get(i, k) => Some(b),
                _ => Some(k),
            })
            .unwrap();
        if a != best {
            return Err(format!(
                "point {i} assigned to {a}, best exemplar is {best}"
            ));
        }
    }
    Ok(())
}
