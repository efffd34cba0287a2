//! Tweet cleaning, vocabulary construction and augmented TF-IDF weighting.
//!
//! Tokenization: lowercase; drop whitespace-delimited
//! tokens that look like URLs (`http://`, `https://`, `www.`); strip one
//! leading `#` or `@`; split on any non-alphanumeric character; drop
//! fragments shorter than two characters and purely numeric fragments;
//! drop stop words; Porter-stem what remains.

pub mod porter;
pub mod stopwords;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub use porter::stem;
pub use stopwords::StopWords;

/// Reduces raw message text to an ordered multiset of stems.
#[derive(Debug, Clone, Default)]
pub struct TextCleaner {
    stopwords: StopWords,
}

impl TextCleaner {
    pub fn new(stopwords: StopWords) -> Self {
        TextCleaner { stopwords }
    }

    pub fn stopwords(&self) -> &StopWords {
        &self.stopwords
    }

    pub fn clean(&self, text: &str) -> Vec<String> {
        clean(text, &self.stopwords)
    }

    /// Cleans every text in parallel, keeping input order.
    pub fn clean_all<'a, I>(&self, texts: I) -> Vec<CleanedTweet>
    where
        I: IntoParallelIterator<Item = &'a str>,
        I::Iter: IndexedParallelIterator,
    {
        texts
            .into_par_iter()
            .enumerate()
            .map(|(tweet_index, text)| CleanedTweet {
                tweet_index,
                stems: self.clean(text),
            })
            .collect()
    }
}

fn is_url(token: &str) -> bool {
    token.starts_with("http://") || token.starts_with("https://") || token.starts_with("www.")
}

pub fn clean(text: &str, stopwords: &StopWords) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut out = Vec::new();
    for token in lowered.split_whitespace() {
        if is_url(token) {
            continue;
        }
        let token = token
            .strip_prefix('#')
            .or_else(|| token.strip_prefix('@'))
            .unwrap_or(token);
        for word in token.split(|c: char| !c.is_alphanumeric()) {
            if word.chars().count() < 2 || word.chars().all(|c| c.is_numeric()) {
                continue;
            }
            if stopwords.contains(word) {
                continue;
            }
            out.push(porter::stem(word));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CleanedTweet {
    /// Position of the source tweet in its corpus.
    pub tweet_index: usize,
    pub stems: Vec<String>,
}

impl CleanedTweet {
    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }
}

/// Distinct stems in first-occurrence order, with their column ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    stems: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn stems(&self) -> &[String] {
        &self.stems
    }

    pub fn get(&self, stem: &str) -> Option<usize> {
        self.index.get(stem).copied()
    }

    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }
}

pub fn build_vocabulary(cleaned: &[CleanedTweet]) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    for stem in cleaned.iter().flat_map(|c| c.stems.iter()) {
        if !vocab.index.contains_key(stem) {
            vocab.index.insert(stem.clone(), vocab.stems.len());
            vocab.stems.push(stem.clone());
        }
    }
    vocab
}

/// Sparse TF-IDF rows over a shared vocabulary.
#[derive(Debug, Clone)]
pub struct TfIdfMatrix {
    /// One row per document: `(column, weight)` sorted by column. Entries
    /// with zero weight (stems present in every document) are kept so the
    /// support reflects the raw bag of words.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub vocab: Vocabulary,
    /// Number of documents containing each column's stem.
    pub doc_frequency: Vec<usize>,
}

impl TfIdfMatrix {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.rows[i].iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn weight(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|k| self.rows[row][k].1)
            .unwrap_or(0.0)
    }
}

/// Augmented term frequency times natural-log inverse document frequency:
/// `(0.5 + 0.5 * f / f_max) * ln(m / n_j)` for stems present in a row.
pub fn tfidf(cleaned: &[CleanedTweet], vocab: &Vocabulary) -> Result<TfIdfMatrix> {
    if cleaned.iter().all(CleanedTweet::is_empty) {
        return Err(Error::EmptyVocabulary);
    }
    let m = cleaned.len();
    let n = vocab.len();

    let counts: Vec<Vec<(usize, usize)>> = cleaned
        .par_iter()
        .map(|c| {
            let mut cols: Vec<usize> = c
                .stems
                .iter()
                .map(|s| vocab.get(s).expect("vocabulary covers every stem"))
                .collect();
            cols.sort_unstable();
            let mut row: Vec<(usize, usize)> = Vec::new();
            for col in cols {
                match row.last_mut() {
                    Some((last, count)) if *last == col => *count += 1,
                    _ => row.push((col, 1)),
                }
            }
            row
        })
        .collect();

    let mut doc_frequency = vec![0usize; n];
    for row in &counts {
        for &(col, _) in row {
            doc_frequency[col] += 1;
        }
    }

    let idf: Vec<f64> = doc_frequency
        .iter()
        .map(|&nj| {
            if nj == 0 {
                0.0
            } else {
                (m as f64 / nj as f64).ln()
            }
        })
        .collect();

    let rows = counts
        .par_iter()
        .map(|row| {
            let max_count = row.iter().map(|&(_, f)| f).max().unwrap_or(0) as f64;
            row.iter()
                .map(|&(col, f)| (col, (0.5 + 0.5 * f as f64 / max_count) * idf[col]))
                .collect()
        })
        .collect();

    Ok(TfIdfMatrix {
        rows,
        vocab: vocab.clone(),
        doc_frequency,
    })
}
