//! The end-to-end clustering run: spam removal, windowing, vectorization,
//! combined affinity, affinity propagation and cohesion filtering.

use rayon::prelude::*;
use serde::Serialize;

use crate::affinity::{cosine_matrix, decay_matrix, hadamard, AffinityMatrix};
use crate::ap::{affinity_propagation, ApParams, Clustering};
use crate::config::RunConfig;
use crate::corpus::{split_windows, Corpus, Tweet};
use crate::error::Result;
use crate::filter::{remove_spam, score_clusters, select_clusters, Cluster, RemovalReason};
use crate::text::{build_vocabulary, tfidf, CleanedTweet, StopWords, TextCleaner};

/// Number of spam texts quoted in reports.
const SPAM_EXAMPLES: usize = 5;

#[derive(Debug, Clone)]
pub struct Pipeline {
    config: RunConfig,
    cleaner: TextCleaner,
}

/// A scored affinity-propagation cluster resolved to tweets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventCluster {
    pub window: usize,
    pub exemplar: Tweet,
    /// Members in corpus order, exemplar included.
    pub members: Vec<Tweet>,
    pub average_affinity: f64,
}

impl EventCluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Option<&str>> {
        self.members.iter().map(|t| t.event_label.as_deref())
    }
}

#[derive(Debug, Clone)]
pub struct WindowResult {
    pub index: usize,
    /// Window tweets after spam removal.
    pub corpus: Corpus,
    /// Positions in `corpus` that entered the affinity matrix, in order.
    pub clustered: Vec<usize>,
    /// Positions whose cleaned text was empty.
    pub excluded_empty: Vec<usize>,
    /// Positions whose stems all occur in every tweet of the window, giving
    /// an all-zero TF-IDF row.
    pub excluded_zero_weight: Vec<usize>,
    /// Combined affinity over `clustered`.
    pub affinity: Option<AffinityMatrix>,
    pub clustering: Option<Clustering>,
    /// Every cluster with its score, before filtering.
    pub candidates: Vec<EventCluster>,
}

#[derive(Debug, Clone)]
pub struct ClusterRun {
    pub config: RunConfig,
    pub tweets_collected: usize,
    pub spam_removed: Vec<Tweet>,
    pub windows: Vec<WindowResult>,
    /// Surviving clusters in window order, then exemplar order.
    pub clusters: Vec<EventCluster>,
    pub dropped: Vec<DroppedCluster>,
}

impl ClusterRun {
    pub fn candidates(&self) -> impl Iterator<Item = &EventCluster> {
        self.windows.iter().flat_map(|w| w.candidates.iter())
    }

    /// Re-applies the cohesion filter with different thresholds. The
    /// clustering itself does not depend on them.
    pub fn refilter(&self, delta: f64, min_cluster_size: usize) -> Selection {
        filter_windows(&self.windows, delta, min_cluster_size)
    }

    pub fn clusters_before(&self) -> usize {
        self.windows.iter().map(|w| w.candidates.len()).sum()
    }

    pub fn spam_examples(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in &self.spam_removed {
            if out.len() == SPAM_EXAMPLES {
                break;
            }
            if !out.contains(&t.text) {
                out.push(t.text.clone());
            }
        }
        out
    }

    pub fn converged(&self) -> bool {
        self.windows
            .iter()
            .filter_map(|w| w.clustering.as_ref())
            .all(|c| c.converged)
    }
}

/// A cluster dropped by the cohesion filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedCluster {
    pub window: usize,
    pub exemplar_id: String,
    pub size: usize,
    pub average_affinity: f64,
    pub reason: RemovalReason,
}

/// Outcome of filtering every window's candidates.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Selection {
    pub kept: Vec<EventCluster>,
    pub dropped: Vec<DroppedCluster>,
}

fn filter_windows(windows: &[WindowResult], delta: f64, min_cluster_size: usize) -> Selection {
    let mut out = Selection::default();
    for w in windows {
        let scored: Vec<Cluster> = w
            .candidates
            .iter()
            .enumerate()
            .map(|(k, c)| Cluster {
                exemplar: k,
                members: (0..c.members.len()).collect(),
                average_affinity: c.average_affinity,
            })
            .collect();
        let (kept, report) = select_clusters(&scored, delta, min_cluster_size);
        out.kept
            .extend(kept.iter().map(|c| w.candidates[c.exemplar].clone()));
        out.dropped
            .extend(report.removed_clusters.into_iter().map(|r| DroppedCluster {
                window: w.index,
                exemplar_id: w.candidates[r.exemplar].exemplar.id.clone(),
                size: r.size,
                average_affinity: r.average_affinity,
                reason: r.reason,
            }));
    }
    out
}

impl Pipeline {
    /// Validates the configuration and loads the stop-word file if one is
    /// configured.
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let stopwords = match &config.stopwords {
            Some(p) => StopWords::load(p)?,
            None => StopWords::default(),
        };
        Ok(Pipeline {
            config,
            cleaner: TextCleaner::new(stopwords),
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn cleaner(&self) -> &TextCleaner {
        &self.cleaner
    }

    pub fn run(&self, corpus: &Corpus) -> Result<ClusterRun> {
        let cfg = &self.config;
        let (kept, spam) = remove_spam(corpus, &self.cleaner, cfg.spam_duplicate_threshold);
        let windows = match cfg.window_seconds {
            Some(w) => split_windows(&kept, w),
            None if kept.is_empty() => Vec::new(),
            None => vec![kept],
        };

        let windows: Vec<WindowResult> = windows
            .into_par_iter()
            .enumerate()
            .map(|(index, w)| self.cluster_window(index, w))
            .collect::<Result<_>>()?;

        let selection = filter_windows(&windows, cfg.delta, cfg.min_cluster_size);
        Ok(ClusterRun {
            config: cfg.clone(),
            tweets_collected: corpus.len(),
            spam_removed: spam,
            windows,
            clusters: selection.kept,
            dropped: selection.dropped,
        })
    }

    /// Clusters one window (spam already removed).
    pub fn cluster_window(&self, index: usize, corpus: Corpus) -> Result<WindowResult> {
        let cfg = &self.config;
        let texts: Vec<&str> = corpus.tweets().iter().map(|t| t.text.as_str()).collect();
        let cleaned = self.cleaner.clean_all(texts);

        let (nonempty, empty): (Vec<CleanedTweet>, Vec<CleanedTweet>) =
            cleaned.into_iter().partition(|c| !c.is_empty());
        let excluded_empty: Vec<usize> = empty.iter().map(|c| c.tweet_index).collect();

        let mut result = WindowResult {
            index,
            corpus,
            clustered: Vec::new(),
            excluded_empty,
            excluded_zero_weight: Vec::new(),
            affinity: None,
            clustering: None,
            candidates: Vec::new(),
        };
        if nonempty.is_empty() {
            return Ok(result);
        }

        let vocab = build_vocabulary(&nonempty);
        let x = tfidf(&nonempty, &vocab)?;
        let (vectorized, zero_weight): (Vec<usize>, Vec<usize>) =
            (0..x.num_rows()).partition(|&i| x.row_norm(i) > 0.0);
        result.excluded_zero_weight = zero_weight
            .iter()
            .map(|&i| nonempty[i].tweet_index)
            .collect();
        result.excluded_zero_weight.sort_unstable();
        if vectorized.is_empty() {
            return Ok(result);
        }
        let x = if zero_weight.is_empty() {
            x
        } else {
            // the remaining rows keep the weights computed over the window
            crate::text::TfIdfMatrix {
                rows: vectorized.iter().map(|&i| x.rows[i].clone()).collect(),
                vocab: x.vocab,
                doc_frequency: x.doc_frequency,
            }
        };
        result.clustered = vectorized
            .iter()
            .map(|&i| nonempty[i].tweet_index)
            .collect();

        let timestamps: Vec<u64> = result
            .clustered
            .iter()
            .map(|&i| result.corpus.tweets()[i].timestamp)
            .collect();
        let c = combined_affinity(&x, &timestamps, cfg.effective_t_p())?;
        let clustering = affinity_propagation(&c, &ApParams::from(cfg))?;

        let tweets = result.corpus.tweets();
        result.candidates = score_clusters(&clustering, &c)
            .into_iter()
            .map(|cl| EventCluster {
                window: index,
                exemplar: tweets[result.clustered[cl.exemplar]].clone(),
                members: cl
                    .members
                    .iter()
                    .map(|&k| tweets[result.clustered[k]].clone())
                    .collect(),
                average_affinity: cl.average_affinity,
            })
            .collect();
        result.affinity = Some(c);
        result.clustering = Some(clustering);
        Ok(result)
    }
}

/// `C = D ∘ E` for TF-IDF rows and their timestamps.
pub fn combined_affinity(
    x: &crate::text::TfIdfMatrix,
    timestamps: &[u64],
    t_p: f64,
) -> Result<AffinityMatrix> {
    let d = cosine_matrix(x)?;
    let e = decay_matrix(timestamps, t_p);
    hadamard(&d, &e)
}
