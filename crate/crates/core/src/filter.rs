//! Spam removal before clustering and cohesion filtering after it.

use std::collections::HashMap;

use serde::Serialize;

use crate::affinity::AffinityMatrix;
use crate::ap::Clustering;
use crate::corpus::{Corpus, Tweet};
use crate::text::TextCleaner;

/// Marks members of every group of identical, non-empty stem sequences
/// whose size reaches `threshold`.
pub fn spam_mask(stems: &[Vec<String>], threshold: usize) -> Vec<bool> {
    let mut groups: HashMap<&[String], usize> = HashMap::new();
    for s in stems.iter().filter(|s| !s.is_empty()) {
        *groups.entry(s.as_slice()).or_default() += 1;
    }
    stems
        .iter()
        .map(|s| !s.is_empty() && groups[s.as_slice()] >= threshold)
        .collect()
}

/// Drops every tweet whose cleaned text is repeated at least `threshold`
/// times. Returns the kept corpus and the removed tweets, both in corpus
/// order.
pub fn remove_spam(
    corpus: &Corpus,
    cleaner: &TextCleaner,
    threshold: usize,
) -> (Corpus, Vec<Tweet>) {
    assert!(threshold >= 2, "spam threshold must be at least 2");
    let stems: Vec<Vec<String>> = corpus
        .tweets()
        .iter()
        .map(|t| cleaner.clean(&t.text))
        .collect();
    let mask = spam_mask(&stems, threshold);
    let (spam, kept): (Vec<_>, Vec<_>) = corpus
        .tweets()
        .iter()
        .cloned()
        .zip(mask)
        .partition(|(_, is_spam)| *is_spam);
    (
        Corpus::from_sorted(
            corpus.source_name.clone(),
            kept.into_iter().map(|(t, _)| t).collect(),
        ),
        spam.into_iter().map(|(t, _)| t).collect(),
    )
}

/// Mean affinity over unordered member pairs. Singletons score 1.
pub fn average_internal_affinity(members: &[usize], c: &AffinityMatrix) -> f64 {
    assert!(!members.is_empty(), "cluster must be non-empty");
    if members.len() == 1 {
        return 1.0;
    }
    let mut sum = 0.0;
    for (k, &i) in members.iter().enumerate() {
        for &j in &members[k + 1..] {
            sum += c.get(i, j);
        }
    }
    let pairs = members.len() * (members.len() - 1) / 2;
    sum / pairs as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub exemplar: usize,
    /// Ascending point indices, exemplar included.
    pub members: Vec<usize>,
    pub average_affinity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    LowAffinity,
    TooSmall,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemovedCluster {
    pub exemplar: usize,
    pub size: usize,
    pub average_affinity: f64,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FilterReport {
    pub spam_tweets_removed: usize,
    pub spam_examples: Vec<String>,
    pub clusters_before: usize,
    pub clusters_after: usize,
    pub removed_clusters: Vec<RemovedCluster>,
}

/// Scores every cluster and keeps those with average internal affinity
/// `>= delta` and at least `min_cluster_size` members.
pub fn filter_clusters(
    clustering: &Clustering,
    c: &AffinityMatrix,
    delta: f64,
    min_cluster_size: usize,
) -> (Vec<Cluster>, FilterReport) {
    let scored = score_clusters(clustering, c);
    let (kept, report) = select_clusters(&scored, delta, min_cluster_size);
    (kept, report)
}

pub fn score_clusters(clustering: &Clustering, c: &AffinityMatrix) -> Vec<Cluster> {
    clustering
        .clusters()
        .into_iter()
        .map(|(exemplar, members)| Cluster {
            exemplar,
            average_affinity: average_internal_affinity(&members, c),
            members,
        })
        .collect()
}

/// Threshold selection over already-scored clusters.
pub fn select_clusters(
    scored: &[Cluster],
    delta: f64,
    min_cluster_size: usize,
) -> (Vec<Cluster>, FilterReport) {
    let mut report = FilterReport {
        clusters_before: scored.len(),
        ..FilterReport::default()
    };
    let mut kept = Vec::new();
    for cl in scored {
        let reason = if cl.members.len() < min_cluster_size {
            Some(RemovalReason::TooSmall)
        } else if cl.average_affinity < delta {
            Some(RemovalReason::LowAffinity)
        } else {
            None
        };
        match reason {
            None => kept.push(cl.clone()),
            Some(reason) => report.removed_clusters.push(RemovedCluster {
                exemplar: cl.exemplar,
                size: cl.members.len(),
                average_affinity: cl.average_affinity,
                reason,
            }),
        }
    }
    report.clusters_after = kept.len();
    (kept, report)
}
