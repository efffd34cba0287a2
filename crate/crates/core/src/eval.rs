//! Scoring clusters against labeled events: linking, precision, recall,
//! F1, cluster quality and the cohesion-threshold sweep.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{ClusterRun, EventCluster, Pipeline};

/// The set of true events, one per distinct label.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventGroundTruth {
    events: BTreeSet<String>,
}

impl EventGroundTruth {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self::from_labels(corpus.tweets().iter().filter_map(|t| t.event_label.clone()))
    }

    pub fn from_labels<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        EventGroundTruth {
            events: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn events(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(String::as_str)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.events.contains(label)
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Label counts over the labeled members, and the majority label with the
/// lexicographically smallest label winning ties.
fn majority<'a, I>(labels: I) -> Option<(&'a str, usize, usize)>
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels.into_iter().flatten() {
        *counts.entry(l).or_default() += 1;
    }
    let labeled = counts.values().sum();
    let mut best: Option<(&str, usize)> = None;
    for (&l, &n) in &counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((l, n));
        }
    }
    best.map(|(l, n)| (l, n, labeled))
}

/// The event a cluster is about, if at least `purity_floor` of its labeled
/// members carry the same label.
pub fn link_cluster<'a, I>(labels: I, purity_floor: f64) -> Option<String>
where
    I: IntoIterator<Item = Option<&'a str>>,
{
    let (label, n, labeled) = majority(labels)?;
    (n as f64 >= purity_floor * labeled as f64).then(|| label.to_string())
}

pub fn link_clusters_to_events(
    clusters: &[EventCluster],
    truth: &EventGroundTruth,
    purity_floor: f64,
) -> Vec<Option<String>> {
    assert!(
        purity_floor > 0.5 && purity_floor <= 1.0,
        "purity floor must be in (0.5, 1]"
    );
    clusters
        .iter()
        .map(|c| link_cluster(c.labels(), purity_floor).filter(|e| truth.contains(e)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub quality_mean: Option<f64>,
    pub clusters_linked: usize,
    pub clusters_total: usize,
    pub events_detected: usize,
    pub events_missed: usize,
    pub precision_defined: bool,
    pub recall_defined: bool,
    pub f1_defined: bool,
}

impl EvalResult {
    /// Metrics from raw counts. Undefined ratios are reported as 0 with the
    /// matching flag cleared.
    pub fn from_counts(
        clusters_linked: usize,
        clusters_total: usize,
        events_detected: usize,
        events_missed: usize,
    ) -> Self {
        let ratio = |a: usize, b: usize| {
            if b == 0 {
                (0.0, false)
            } else {
                (a as f64 / b as f64, true)
            }
        };
        let (precision, precision_defined) = ratio(clusters_linked, clusters_total);
        let (recall, recall_defined) = ratio(events_detected, events_detected + events_missed);
        let f1_defined = precision + recall > 0.0;
        let f1 = if f1_defined {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        EvalResult {
            precision,
            recall,
            f1,
            quality_mean: None,
            clusters_linked,
            clusters_total,
            events_detected,
            events_missed,
            precision_defined,
            recall_defined,
            f1_defined,
        }
    }
}

pub fn precision_recall(links: &[Option<String>], truth: &EventGroundTruth) -> EvalResult {
    let linked = links.iter().filter(|l| l.is_some()).count();
    let detected: BTreeSet<&str> = links
        .iter()
        .flatten()
        .map(String::as_str)
        .filter(|e| truth.contains(e))
        .collect();
    EvalResult::from_counts(
        linked,
        links.len(),
        detected.len(),
        truth.len() - detected.len(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    /// `None` for clusters without labeled members.
    pub per_cluster: Vec<Option<f64>>,
    pub mean: f64,
}

/// Share of each cluster carrying its majority label; the mean is taken
/// over clusters that have one.
pub fn cluster_quality(clusters: &[EventCluster]) -> Result<QualityReport> {
    let per_cluster: Vec<Option<f64>> = clusters
        .iter()
        .map(|c| majority(c.labels()).map(|(_, n, _)| n as f64 / c.len() as f64))
        .collect();
    let defined: Vec<f64> = per_cluster.iter().flatten().copied().collect();
    if defined.is_empty() {
        return Err(Error::NoLabels);
    }
    let mean = defined.iter().sum::<f64>() / defined.len() as f64;
    Ok(QualityReport { per_cluster, mean })
}

/// Links, precision/recall and mean quality of a run's surviving clusters.
pub fn evaluate_clusters(
    clusters: &[EventCluster],
    truth: &EventGroundTruth,
    purity_floor: f64,
) -> EvalResult {
    let links = link_clusters_to_events(clusters, truth, purity_floor);
    let mut result = precision_recall(&links, truth);
    result.quality_mean = cluster_quality(clusters).ok().map(|q| q.mean);
    result
}

pub fn evaluate(run: &ClusterRun, corpus: &Corpus) -> Result<EvalResult> {
    let truth = EventGroundTruth::from_corpus(corpus);
    if truth.is_empty() {
        return Err(Error::NoLabels);
    }
    Ok(evaluate_clusters(
        &run.clusters,
        &truth,
        run.config.purity_floor,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub clusters_total: usize,
    pub clusters_linked: usize,
    pub events_detected: usize,
}

pub fn default_delta_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 20.0).collect()
}

/// Precision and recall for each cohesion threshold in `deltas`, with all
/// other settings taken from `config`.
pub fn sweep_delta(corpus: &Corpus, config: &RunConfig, deltas: &[f64]) -> Result<Vec<SweepRow>> {
    let truth = EventGroundTruth::from_corpus(corpus);
    if truth.is_empty() {
        return Err(Error::NoLabels);
    }
    for &d in deltas {
        if !(0.0..=1.0).contains(&d) {
            return Err(Error::config(
                "delta",
                format!("sweep value {d} outside [0, 1]"),
            ));
        }
    }
    let run = Pipeline::new(config.clone())?.run(corpus)?;
    Ok(sweep_run(&run, &truth, deltas))
}

/// Sweep over an existing run. The clustering does not depend on the
/// threshold, so only the filter is repeated.
pub fn sweep_run(run: &ClusterRun, truth: &EventGroundTruth, deltas: &[f64]) -> Vec<SweepRow> {
    deltas
        .par_iter()
        .map(|&delta| {
            let kept = run.refilter(delta, run.config.min_cluster_size).kept;
            let r = precision_recall(
                &link_clusters_to_events(&kept, truth, run.config.purity_floor),
                truth,
            );
            SweepRow {
                delta,
                precision: r.precision,
                recall: r.recall,
                f1: r.f1,
                clusters_total: r.clusters_total,
                clusters_linked: r.clusters_linked,
                events_detected: r.events_detected,
            }
        })
        .collect()
}

pub fn write_sweep(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
