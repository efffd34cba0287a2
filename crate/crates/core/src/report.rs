//! Run artifacts: the cluster table, the JSON summary and the manifest.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::pipeline::{ClusterRun, DroppedCluster};

pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Manifest {
    pub files: Vec<PathBuf>,
}

impl Manifest {
    pub fn push(&mut self, path: impl Into<PathBuf>) {
        self.files.push(path.into());
    }

    /// Writes the manifest itself as `manifest.json` in `dir` and returns
    /// its path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        write_json(&path, self)?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowSummary {
    pub index: usize,
    pub start: Option<u64>,
    pub tweets: usize,
    pub clustered: usize,
    pub converged: Option<bool>,
    pub iterations: Option<usize>,
    pub preference: Option<f64>,
    pub clusters_before: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub source: String,
    pub tweets_collected: usize,
    pub spam_tweets_removed: usize,
    pub spam_examples: Vec<String>,
    pub excluded_empty: Vec<String>,
    pub excluded_zero_weight: Vec<String>,
    pub tweets_clustered: usize,
    pub windows: usize,
    pub clusters_before: usize,
    pub clusters_after: usize,
    pub converged: bool,
    pub window_details: Vec<WindowSummary>,
    pub removed_clusters: Vec<DroppedCluster>,
    pub config: RunConfig,
}

impl Summary {
    pub fn from_run(run: &ClusterRun, source: &str) -> Self {
        let mut excluded_empty = Vec::new();
        let mut excluded_zero_weight = Vec::new();
        let mut window_details = Vec::new();
        for w in &run.windows {
            let tweets = w.corpus.tweets();
            excluded_empty.extend(w.excluded_empty.iter().map(|&i| tweets[i].id.clone()));
            excluded_zero_weight
                .extend(w.excluded_zero_weight.iter().map(|&i| tweets[i].id.clone()));
            window_details.push(WindowSummary {
                index: w.index,
                start: tweets.first().map(|t| t.timestamp),
                tweets: tweets.len(),
                clustered: w.clustered.len(),
                converged: w.clustering.as_ref().map(|c| c.converged),
                iterations: w.clustering.as_ref().map(|c| c.iterations_used),
                preference: w.clustering.as_ref().map(|c| c.preference),
                clusters_before: w.candidates.len(),
            });
        }
        Summary {
            source: source.to_string(),
            tweets_collected: run.tweets_collected,
            spam_tweets_removed: run.spam_removed.len(),
            spam_examples: run.spam_examples(),
            excluded_empty,
            excluded_zero_weight,
            tweets_clustered: run.windows.iter().map(|w| w.clustered.len()).sum(),
            windows: run.windows.len(),
            clusters_before: run.clusters_before(),
            clusters_after: run.clusters.len(),
            converged: run.converged(),
            window_details,
            removed_clusters: run.dropped.clone(),
            config: run.config.clone(),
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `clusters.csv` and `summary.json` into `dir`, creating it if
/// needed. Cluster ids number the surviving clusters from 0.
pub fn write_report(run: &ClusterRun, corpus: &Corpus, dir: impl AsRef<Path>) -> Result<Manifest> {
    let dir = dir.as_ref();
    let known: HashSet<&str> = corpus.tweets().iter().map(|t| t.id.as_str()).collect();
    for c in &run.clusters {
        if let Some(t) = c.members.iter().find(|t| !known.contains(t.id.as_str())) {
            return Err(Error::UnknownTweet { id: t.id.clone() });
        }
    }
    ensure_dir(dir)?;
    let mut manifest = Manifest::default();

    let path = dir.join(CLUSTERS_FILE);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["cluster_id", "exemplar_id", "tweet_id", "timestamp", "text"])?;
    for (k, c) in run.clusters.iter().enumerate() {
        for t in &c.members {
            w.write_record([
                k.to_string().as_str(),
                &c.exemplar.id,
                &t.id,
                t.timestamp.to_string().as_str(),
                &t.text,
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    manifest.push(path);

    let path = dir.join(SUMMARY_FILE);
    write_json(&path, &Summary::from_run(run, &corpus.source_name))?;
    manifest.push(path);
    Ok(manifest)
}

/// Writes the combined affinity matrix of every window. A single window
/// goes to `path`; several windows go to `<stem>.<index>.<ext>`.
pub fn dump_affinity(run: &ClusterRun, path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let with_c: Vec<_> = run
        .windows
        .iter()
        .filter(|w| w.affinity.is_some())
        .collect();
    let mut written = Vec::new();
    for w in &with_c {
        let target = if with_c.len() == 1 {
            path.to_path_buf()
        } else {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("affinity");
            let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
            path.with_file_name(format!("{stem}.{}.{ext}", w.index))
        };
        if let Some(parent) = target.parent().filter(|p| !p.as_os_str().is_empty()) {
            ensure_dir(parent)?;
        }
        let tweets = w.corpus.tweets();
        let ids: Vec<&str> = w.clustered.iter().map(|&i| tweets[i].id.as_str()).collect();
        w.affinity
            .as_ref()
            .expect("filtered on affinity")
            .write_csv(&ids, &target)?;
        written.push(target);
    }
    Ok(written)
}
