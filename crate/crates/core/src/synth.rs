//! Seeded generator of labeled corpora with planted events.
//!
//! Event `e` fires at `margin + e * spacing`. Its response tweets follow
//! after exponentially distributed delays and draw words from the event's
//! pool. Unlabeled background tweets are spread uniformly over
//! `[0, 2 * margin + (events - 1) * spacing)` and draw from a separate pool.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::corpus::{Corpus, Tweet};
use crate::error::{Error, Result};
use crate::text::{stem, StopWords};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticSpec {
    pub events: usize,
    pub tweets_per_event: usize,
    /// Fraction of each event pool shared by all events.
    pub overlap: f64,
    pub spacing: u64,
    /// Background tweets per second.
    pub background_rate: f64,
    /// Rate of the exponential response delay, per second.
    pub lambda: f64,
    /// Quiet lead-in before the first event and tail after the last.
    pub margin: u64,
    pub seed: u64,
    pub pool_size: usize,
    pub min_words: usize,
    pub max_words: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            events: 2,
            tweets_per_event: 100,
            overlap: 0.0,
            spacing: 3600,
            background_rate: 0.0,
            lambda: 0.01,
            margin: 600,
            seed: 0,
            pool_size: 30,
            min_words: 5,
            max_words: 12,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSynthetic(m.to_string()));
        if self.events == 0 {
            return bad("events must be positive");
        }
        if self.tweets_per_event == 0 {
            return bad("tweets_per_event must be positive");
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return bad("overlap must be in [0, 1]");
        }
        if self.events > 1 && self.spacing == 0 {
            return bad("spacing must be positive when there are several events");
        }
        if !(self.background_rate >= 0.0 && self.background_rate.is_finite()) {
            return bad("background_rate must be finite and non-negative");
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive");
        }
        if self.pool_size == 0 {
            return bad("pool_size must be positive");
        }
        if self.min_words == 0 || self.min_words > self.max_words {
            return bad("word counts must satisfy 0 < min_words <= max_words");
        }
        Ok(())
    }

    pub fn event_time(&self, e: usize) -> u64 {
        self.margin + e as u64 * self.spacing
    }

    pub fn span(&self) -> u64 {
        2 * self.margin + (self.events as u64 - 1) * self.spacing
    }

    pub fn event_label(e: usize) -> String {
        format!("event-{e:03}")
    }
}

/// Draws `n` distinct pseudo-words that are their own Porter stems and not
/// stop words.
fn word_pool<R: Rng>(rng: &mut R, n: usize, taken: &mut HashSet<String>) -> Vec<String> {
    const ONSETS: &[&str] = &[
        "b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "dr", "gl",
        "kr", "pl", "st", "tr",
    ];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u"];
    const CODAS: &[&str] = &["b", "d", "g", "k", "m", "n", "p", "r", "t", "x", "z"];
    let stop = StopWords::default();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.random_range(2..=3);
        let mut w = String::new();
        for _ in 0..syllables {
            w.push_str(ONSETS[rng.random_range(0..ONSETS.len())]);
            w.push_str(VOWELS[rng.random_range(0..VOWELS.len())]);
        }
        w.push_str(CODAS[rng.random_range(0..CODAS.len())]);
        if stem(&w) == w && !stop.contains(&w) && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

fn sentence<R: Rng>(rng: &mut R, pool: &[String], spec: &SyntheticSpec) -> String {
    let n = rng.random_range(spec.min_words..=spec.max_words);
    (0..n)
        .map(|_| pool[rng.random_range(0..pool.len())].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Corpus> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut taken = HashSet::new();

    let shared_len = (spec.overlap * spec.pool_size as f64).round() as usize;
    let shared = word_pool(&mut rng, shared_len, &mut taken);
    let pools: Vec<Vec<String>> = (0..spec.events)
        .map(|_| {
            let mut p = shared.clone();
            p.extend(word_pool(&mut rng, spec.pool_size - shared_len, &mut taken));
            p
        })
        .collect();
    let background_pool = word_pool(&mut rng, spec.pool_size, &mut taken);

    let delay = Exp::new(spec.lambda).map_err(|e| Error::InvalidSynthetic(e.to_string()))?;
    let mut tweets = Vec::new();
    let mut next_id = 0usize;
    let mut id = || {
        next_id += 1;
        format!("syn-{:07}", next_id - 1)
    };

    for (e, pool) in pools.iter().enumerate() {
        let label = SyntheticSpec::event_label(e);
        for _ in 0..spec.tweets_per_event {
            let t = spec.event_time(e) + delay.sample(&mut rng).floor() as u64;
            tweets.push(Tweet::new(id(), t, sentence(&mut rng, pool, spec)).labeled(label.clone()));
        }
    }

    let span = spec.span().max(1);
    let background = (spec.background_rate * span as f64).round() as usize;
    for _ in 0..background {
        let t = rng.random_range(0..span);
        tweets.push(Tweet::new(
            id(),
            t,
            sentence(&mut rng, &background_pool, spec),
        ));
    }

    Corpus::new(format!("synthetic-{}", spec.seed), tweets)
}
