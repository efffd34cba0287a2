//! Tweet corpora: JSON Lines ingestion, ordering, and time windowing.
//!
//! Input records carry `id`, `created_at` (integer epoch seconds or an
//! ISO-8601/RFC 3339 string), `text`, and an optional `event_label`.
//! Timestamps are truncated to whole seconds.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// One timestamped message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: u64,
    pub text: String,
    /// Ground-truth event this tweet responds to; `None` means background.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_label: Option<String>,
}

impl Tweet {
    pub fn new(id: impl Into<String>, timestamp: u64, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            timestamp,
            text: text.into(),
            event_label: None,
        }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.event_label = Some(label.into());
        self
    }
}

/// Tweets sorted by `(timestamp, id)` with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    tweets: Vec<Tweet>,
    pub source_name: String,
}

impl Corpus {
    /// Sorts the tweets and rejects duplicate ids.
    pub fn new(source_name: impl Into<String>, mut tweets: Vec<Tweet>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(tweets.len());
        for (i, t) in tweets.iter().enumerate() {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId {
                    line: i + 1,
                    id: t.id.clone(),
                });
            }
        }
        sort_tweets(&mut tweets);
        Ok(Corpus {
            tweets,
            source_name: source_name.into(),
        })
    }

    /// Builds a corpus from tweets already known to be ordered and unique,
    /// e.g. a subsequence of another corpus.
    pub(crate) fn from_sorted(source_name: impl Into<String>, tweets: Vec<Tweet>) -> Self {
        debug_assert!(tweets
            .windows(2)
            .all(|w| (w[0].timestamp, &w[0].id) <= (w[1].timestamp, &w[1].id)));
        Corpus {
            tweets,
            source_name: source_name.into(),
        }
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn timestamps(&self) -> Vec<u64> {
        self.tweets.iter().map(|t| t.timestamp).collect()
    }

    pub fn has_labels(&self) -> bool {
        self.tweets.iter().any(|t| t.event_label.is_some())
    }

    /// Span in seconds between the first and last tweet.
    pub fn span(&self) -> u64 {
        match (self.tweets.first(), self.tweets.last()) {
            (Some(a), Some(b)) => b.timestamp - a.timestamp,
            _ => 0,
        }
    }

    pub fn into_tweets(self) -> Vec<Tweet> {
        self.tweets
    }
}

fn sort_tweets(tweets: &mut [Tweet]) {
    tweets.sort_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Number of malformed lines tolerated (skipped and reported) before
    /// loading fails. Zero by default.
    pub max_malformed: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LoadReport {
    pub lines_read: usize,
    pub blank_lines: usize,
    /// `(line number, reason)` for every skipped malformed line.
    pub malformed: Vec<(usize, String)>,
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    load_corpus_with(path, &LoadOptions::default()).map(|(c, _)| c)
}

pub fn load_corpus_with(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_corpus(BufReader::new(file), name, options).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses a JSON Lines corpus from any reader.
pub fn read_corpus<R: BufRead>(
    reader: R,
    source_name: impl Into<String>,
    options: &LoadOptions,
) -> Result<(Corpus, LoadReport)> {
    let mut report = LoadReport::default();
    let mut tweets = Vec::new();
    let mut seen = HashSet::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        report.lines_read += 1;
        if line.trim().is_empty() {
            report.blank_lines += 1;
            continue;
        }
        match parse_line(&line, line_no) {
            Ok(tweet) => {
                if !seen.insert(tweet.id.clone()) {
                    return Err(Error::DuplicateId {
                        line: line_no,
                        id: tweet.id,
                    });
                }
                tweets.push(tweet);
            }
            Err(err) => {
                if report.malformed.len() < options.max_malformed {
                    report.malformed.push((line_no, err.to_string()));
                } else {
                    return Err(err);
                }
            }
        }
    }

    if tweets.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    sort_tweets(&mut tweets);
    Ok((Corpus::from_sorted(source_name, tweets), report))
}

fn parse_line(line: &str, line_no: usize) -> Result<Tweet> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::MalformedLine {
        line: line_no,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::MalformedLine {
        line: line_no,
        message: "expected a JSON object".into(),
    })?;
    let malformed = |message: String| Error::MalformedLine {
        line: line_no,
        message,
    };

    let id = match obj.get("id") {
        None | Some(Value::Null) => {
            return Err(Error::MissingField {
                line: line_no,
                field: "id",
            })
        }
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(other) => {
            return Err(malformed(format!(
                "`id` must be a non-empty string, got {other}"
            )))
        }
    };
    let timestamp = match obj.get("created_at") {
        None | Some(Value::Null) => {
            return Err(Error::MissingField {
                line: line_no,
                field: "created_at",
            })
        }
        Some(v) => parse_timestamp(v).map_err(malformed)?,
    };
    let text = match obj.get("text") {
        None | Some(Value::Null) => {
            return Err(Error::MissingField {
                line: line_no,
                field: "text",
            })
        }
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::String(_)) => return Err(malformed("`text` is empty".into())),
        Some(other) => return Err(malformed(format!("`text` must be a string, got {other}"))),
    };
    let event_label = match obj.get("event_label") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if s.is_empty() => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            return Err(malformed(format!(
                "`event_label` must be a string, got {other}"
            )))
        }
    };

    Ok(Tweet {
        id,
        timestamp,
        text,
        event_label,
    })
}

fn parse_timestamp(v: &Value) -> std::result::Result<u64, String> {
    match v {
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                Ok(u)
            } else if let Some(f) = n.as_f64() {
                if f >= 0.0 && f.is_finite() {
                    Ok(f.trunc() as u64)
                } else {
                    Err(format!("`created_at` must be non-negative, got {n}"))
                }
            } else {
                Err(format!("`created_at` must be non-negative, got {n}"))
            }
        }
        Value::String(s) => {
            let dt = chrono::DateTime::parse_from_rfc3339(s.trim())
                .map_err(|e| format!("`created_at` {s:?} is not ISO-8601: {e}"))?;
            u64::try_from(dt.timestamp())
                .map_err(|_| format!("`created_at` {s:?} is before the epoch"))
        }
        other => Err(format!(
            "`created_at` must be epoch seconds or an ISO-8601 string, got {other}"
        )),
    }
}

/// Writes the corpus back out as JSON Lines with integer `created_at`.
pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_corpus_to(corpus, &mut out).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_corpus_to<W: Write>(corpus: &Corpus, out: &mut W) -> Result<()> {
    #[derive(Serialize)]
    struct Record<'a> {
        id: &'a str,
        created_at: u64,
        text: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        event_label: Option<&'a str>,
    }
    for t in corpus.tweets() {
        let rec = Record {
            id: &t.id,
            created_at: t.timestamp,
            text: &t.text,
            event_label: t.event_label.as_deref(),
        };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

/// Partitions the corpus into half-open windows `[t0 + k*w, t0 + (k+1)*w)`
/// anchored at the earliest tweet. Empty windows are omitted.
pub fn split_windows(corpus: &Corpus, window_seconds: u64) -> Vec<Corpus> {
    assert!(window_seconds > 0, "window_seconds must be positive");
    let Some(first) = corpus.tweets.first() else {
        return Vec::new();
    };
    let t0 = first.timestamp;
    let mut windows: Vec<Corpus> = Vec::new();
    let mut current: Vec<Tweet> = Vec::new();
    let mut current_k = 0u64;
    for t in &corpus.tweets {
        let k = (t.timestamp - t0) / window_seconds;
        if k != current_k && !current.is_empty() {
            windows.push(window_corpus(
                corpus,
                current_k,
                std::mem::take(&mut current),
            ));
        }
        current_k = k;
        current.push(t.clone());
    }
    if !current.is_empty() {
        windows.push(window_corpus(corpus, current_k, current));
    }
    windows
}

fn window_corpus(parent: &Corpus, k: u64, tweets: Vec<Tweet>) -> Corpus {
    Corpus::from_sorted(format!("{}#w{k}", parent.source_name), tweets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus_of(ts: &[u64]) -> Corpus {
        let tweets = ts
            .iter()
            .enumerate()
            .map(|(i, &t)| Tweet::new(format!("t{i}"), t, "hello world"))
            .collect();
        Corpus::new("test", tweets).unwrap()
    }

    fn read(s: &str) -> Result<(Corpus, LoadReport)> {
        read_corpus(s.as_bytes(), "mem", &LoadOptions::default())
    }

    #[test]
    fn sorts_by_timestamp() {
        let (c, _) = read(concat!(
            r#"{"id":"a","created_at":10,"text":"x y"}"#,
            "\n",
            r#"{"id":"b","created_at":5,"text":"x y"}"#,
            "\n",
            r#"{"id":"c","created_at":7,"text":"x y"}"#,
            "\n",
        ))
        .unwrap();
        assert_eq!(c.timestamps(), vec![5, 7, 10]);
    }

    #[test]
    fn ties_break_by_id() {
        let (c, _) = read(concat!(
            r#"{"id":"b","created_at":1,"text":"x"}"#,
            "\n",
            r#"{"id":"a","created_at":1,"text":"x"}"#
        ))
        .unwrap();
        let ids: Vec<_> = c.tweets().iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(matches!(read(""), Err(Error::EmptyCorpus)));
        assert!(matches!(read("\n  \n"), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn missing_text_names_line_and_field() {
        let err = read(concat!(
            r#"{"id":"a","created_at":1,"text":"ok"}"#,
            "\n",
            r#"{"id":"b","created_at":2}"#
        ))
        .unwrap_err();
        assert!(matches!(
            err,
            Error::MissingField {
                line: 2,
                field: "text"
            }
        ));
        let msg = err.to_string();
        assert!(msg.contains("line 2") && msg.contains("text"), "{msg}");
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = read("{\"id\":\"a\",\"created_at\":1,\"text\":\"ok\"}\n{not json").unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn malformed_lines_tolerated_when_configured() {
        let opts = LoadOptions { max_malformed: 1 };
        let (c, report) = read_corpus(
            "{oops\n{\"id\":\"a\",\"created_at\":1,\"text\":\"ok\"}".as_bytes(),
            "mem",
            &opts,
        )
        .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(report.malformed.len(), 1);
        assert_eq!(report.malformed[0].0, 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = read(concat!(
            r#"{"id":"a","created_at":1,"text":"x"}"#,
            "\n",
            r#"{"id":"a","created_at":2,"text":"y"}"#
        ))
        .unwrap_err();
        assert!(matches!(err, Error::DuplicateId { line: 2, .. }));
    }

    #[test]
    fn iso_timestamps_normalize_to_epoch_seconds() {
        let (c, _) =
            read(r#"{"id":"a","created_at":"2017-09-22T09:54:11.900Z","text":"x"}"#).unwrap();
        assert_eq!(c.tweets()[0].timestamp, 1_506_074_051);
        let (c, _) = read(r#"{"id":"a","created_at":12.9,"text":"x"}"#).unwrap();
        assert_eq!(c.tweets()[0].timestamp, 12);
    }

    #[test]
    fn negative_timestamp_rejected() {
        assert!(read(r#"{"id":"a","created_at":-5,"text":"x"}"#).is_err());
    }

    #[test]
    fn optional_label() {
        let (c, _) = read(concat!(
            r#"{"id":"a","created_at":1,"text":"x","event_label":"goal"}"#,
            "\n",
            r#"{"id":"b","created_at":2,"text":"y","event_label":null}"#
        ))
        .unwrap();
        assert_eq!(c.tweets()[0].event_label.as_deref(), Some("goal"));
        assert_eq!(c.tweets()[1].event_label, None);
    }

    #[test]
    fn windows_split_on_half_open_intervals() {
        let w = split_windows(&corpus_of(&[0, 50, 120]), 100);
        assert_eq!(w.len(), 2);
        assert_eq!(w[0].timestamps(), vec![0, 50]);
        assert_eq!(w[1].timestamps(), vec![120]);
    }

    #[test]
    fn wide_window_is_identity() {
        let c = corpus_of(&[3, 40, 90]);
        let w = split_windows(&c, 1000);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].tweets(), c.tweets());
    }

    #[test]
    fn boundary_belongs_to_later_window() {
        let w = split_windows(&corpus_of(&[0, 100]), 100);
        assert_eq!(w.len(), 2);
        assert_eq!(w[1].timestamps(), vec![100]);
    }

    #[test]
    fn empty_windows_omitted() {
        let w = split_windows(&corpus_of(&[0, 10, 550]), 100);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn write_then_read_round_trips() {
        let c = Corpus::new(
            "rt",
            vec![
                Tweet::new("x", 5, "Eddie! \"quoted\" ünïcode").labeled("goal"),
                Tweet::new("y", 2, "plain"),
            ],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_corpus_to(&c, &mut buf).unwrap();
        let (back, _) = read_corpus(buf.as_slice(), "rt", &LoadOptions::default()).unwrap();
        assert_eq!(back.tweets(), c.tweets());
    }
}
