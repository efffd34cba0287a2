//! Affinity propagation over a precomputed affinity matrix.
//!
//! Responsibilities and availabilities are exchanged with damping until the
//! exemplar set (points with positive self-responsibility plus
//! self-availability) stays unchanged and non-empty for
//! `stable_iterations` consecutive sweeps, or `max_iterations` is reached.
//!
//! The diagonal is tilted by a relative 1e-9 in favour of lower indices so
//! exact ties resolve deterministically.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::affinity::AffinityMatrix;
use crate::config::{Preference, RunConfig};
use crate::error::{Error, Result};

const TIE_BREAK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApParams {
    pub preference: Preference,
    pub damping: f64,
    pub max_iterations: usize,
    pub stable_iterations: usize,
}

impl Default for ApParams {
    fn default() -> Self {
        ApParams {
            preference: Preference::Median,
            damping: 0.7,
            max_iterations: 400,
            stable_iterations: 25,
        }
    }
}

impl From<&RunConfig> for ApParams {
    fn from(c: &RunConfig) -> Self {
        ApParams {
            preference: c.preference,
            damping: c.damping,
            max_iterations: c.max_iterations,
            stable_iterations: c.stable_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clustering {
    /// Exemplar index for every point.
    pub assignment: Vec<usize>,
    /// Exemplar indices, ascending.
    pub exemplars: Vec<usize>,
    pub converged: bool,
    pub iterations_used: usize,
    /// Preference value placed on the diagonal (before tie-breaking).
    pub preference: f64,
}

impl Clustering {
    /// Exemplar → ascending member list, ordered by exemplar.
    pub fn clusters(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut map: BTreeMap<usize, Vec<usize>> =
            self.exemplars.iter().map(|&e| (e, Vec::new())).collect();
        for (i, &e) in self.assignment.iter().enumerate() {
            map.entry(e).or_default().push(i);
        }
        map
    }

    pub fn num_clusters(&self) -> usize {
        self.exemplars.len()
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// Median of the off-diagonal entries; mean of the two central values for
/// an even count.
pub fn median_preference(c: &AffinityMatrix) -> Result<f64> {
    if c.order() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: c.order(),
        });
    }
    let mut v: Vec<f64> = c.off_diagonal().collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

pub fn affinity_propagation(c: &AffinityMatrix, params: &ApParams) -> Result<Clustering> {
    let m = c.order();
    if m == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    assert!(
        (0.5..1.0).contains(&params.damping),
        "damping must lie in [0.5, 1)"
    );
    assert!(params.max_iterations > 0 && params.stable_iterations > 0);

    let preference = match params.preference {
        Preference::Value(v) => v,
        Preference::Median if m >= 2 => median_preference(c)?,
        Preference::Median => 0.0,
    };
    if m == 1 {
        return Ok(Clustering {
            assignment: vec![0],
            exemplars: vec![0],
            converged: true,
            iterations_used: 0,
            preference,
        });
    }

    let scale = c
        .off_diagonal()
        .fold(preference.abs(), |acc, v| acc.max(v.abs()));
    let scale = if scale > 0.0 { scale } else { 1.0 };
    let mut s = c.entries().to_vec();
    for k in 0..m {
        s[k * m + k] = preference - TIE_BREAK * scale * k as f64 / m as f64;
    }

    let lambda = params.damping;
    let mut r = vec![0.0f64; m * m];
    let mut a = vec![0.0f64; m * m];
    let mut col_sum = vec![0.0f64; m];

    let mut last: Option<Vec<usize>> = None;
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    for _ in 0..params.max_iterations {
        iterations += 1;

        // responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
        r.par_chunks_mut(m)
            .zip(a.par_chunks(m))
            .zip(s.par_chunks(m))
            .for_each(|((r_row, a_row), s_row)| {
                let (mut best, mut best_k, mut second) = (f64::NEG_INFINITY, 0, f64::NEG_INFINITY);
                for k in 0..m {
                    let v = a_row[k] + s_row[k];
                    if v > best {
                        second = best;
                        best = v;
                        best_k = k;
                    } else if v > second {
                        second = v;
                    }
                }
                for k in 0..m {
                    let competitor = if k == best_k { second } else { best };
                    let fresh = s_row[k] - competitor;
                    r_row[k] = lambda * r_row[k] + (1.0 - lambda) * fresh;
                }
            });

        // column sums of max(0, r(i,k)) with the raw r(k,k) on the diagonal,
        // accumulated sequentially so the result does not depend on threads
        col_sum.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let row = &r[i * m..(i + 1) * m];
            for k in 0..m {
                col_sum[k] += if i == k { row[k] } else { row[k].max(0.0) };
            }
        }

        // availabilities
        a.par_chunks_mut(m)
            .zip(r.par_chunks(m))
            .enumerate()
            .for_each(|(i, (a_row, r_row))| {
                for k in 0..m {
                    let own = if i == k { r_row[k] } else { r_row[k].max(0.0) };
                    let total = col_sum[k] - own;
                    let fresh = if i == k { total } else { total.min(0.0) };
                    a_row[k] = lambda * a_row[k] + (1.0 - lambda) * fresh;
                }
            });

        let exemplars: Vec<usize> = (0..m)
            .filter(|&k| a[k * m + k] + r[k * m + k] > 0.0)
            .collect();
        if !exemplars.is_empty() && last.as_ref() == Some(&exemplars) {
            stable += 1;
        } else {
            stable = 1;
        }
        last = Some(exemplars);
        if stable >= params.stable_iterations && last.as_ref().is_some_and(|e| !e.is_empty()) {
            converged = true;
            break;
        }
    }

    let mut exemplars = last.unwrap_or_default();
    if exemplars.is_empty() {
        // no point ever gathered positive evidence: one cluster around the
        // strongest candidate
        let best = (0..m)
            .max_by(|&x, &y| {
                let ex = a[x * m + x] + r[x * m + x];
                let ey = a[y * m + y] + r[y * m + y];
                ex.total_cmp(&ey).then(y.cmp(&x))
            })
            .expect("m >= 2");
        exemplars.push(best);
    }

    let assignment = assign_to_exemplars(c, &exemplars);
    Ok(Clustering {
        assignment,
        exemplars,
        converged,
        iterations_used: iterations,
        preference,
    })
}

/// Sends each non-exemplar to the exemplar of highest affinity, lowest
/// index on ties. Exemplars keep themselves.
pub fn assign_to_exemplars(c: &AffinityMatrix, exemplars: &[usize]) -> Vec<usize> {
    let m = c.order();
    let mut is_exemplar = vec![false; m];
    for &e in exemplars {
        is_exemplar[e] = true;
    }
    (0..m)
        .map(|i| {
            if is_exemplar[i] {
                return i;
            }
            let mut best = exemplars[0];
            let mut best_v = c.get(i, best);
            for &e in &exemplars[1..] {
                let v = c.get(i, e);
                if v > best_v {
                    best = e;
                    best_v = v;
                }
            }
            best
        })
        .collect()
}
