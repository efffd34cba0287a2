mod common;

use std::io::Cursor;

use proptest::prelude::*;

use smerc::corpus::write_corpus_to;
use smerc::eval::{cluster_quality, EvalResult};
use smerc::filter::{select_clusters, Cluster};
use smerc::{
    build_vocabulary, cosine_matrix, decay_matrix, hadamard, read_corpus, split_windows, stem,
    tfidf, Corpus, LoadOptions, Preference, Tweet,
};

fn docs() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec((0..20usize).prop_map(|k| format!("w{k}")), 1..8),
        1..=10,
    )
}

fn tweets() -> impl Strategy<Value = Vec<Tweet>> {
    prop::collection::vec(
        (0u64..20_000, "[a-z ]{1,20}[a-z]", prop::option::of("[AB]")),
        1..40,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (t, text, label))| {
                let tw = Tweet::new(format!("id{i}"), t, text);
                match label {
                    Some(l) => tw.labeled(l),
                    None => tw,
                }
            })
            .collect()
    })
}

fn upper_entries(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, m * (m - 1) / 2)
}

/// `vals` lists the strict upper triangle row by row.
fn matrix_from(m: usize, vals: &[f64]) -> smerc::AffinityMatrix {
    common::symmetric(m, |i, j| vals[i * m - i * (i + 1) / 2 + (j - i - 1)])
}

proptest! {
    #[test]
    fn tfidf_and_cosine_match_dense_oracle(docs in docs()) {
        let cleaned = common::cleaned(&docs);
        let vocab = build_vocabulary(&cleaned);
        let x = tfidf(&cleaned, &vocab).unwrap();
        let oracle = common::naive_tfidf(&docs);
        for (i, row) in oracle.iter().enumerate() {
            for (s, &w) in row {
                let col = vocab.get(s).unwrap();
                prop_assert!((x.weight(i, col) - w).abs() < 1e-9);
            }
        }
        let cos = common::naive_cosine(&oracle);
        match cosine_matrix(&x) {
            Ok(d) => {
                for (i, row) in cos.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        let want = if i == j { 1.0 } else { v.unwrap() };
                        prop_assert!((d.get(i, j) - want).abs() < 1e-9);
                    }
                }
            }
            Err(_) => prop_assert!(cos.iter().any(|r| r.iter().any(Option::is_none))),
        }
    }

    #[test]
    fn combined_affinity_invariants(
        vals in upper_entries(7),
        ts in prop::collection::vec(0u64..5000, 7),
        t_p in 1.0..1000.0f64,
    ) {
        let d = matrix_from(7, &vals);
        let e = decay_matrix(&ts, t_p);
        let c = hadamard(&d, &e).unwrap();
        prop_assert!(e.is_symmetric() && c.is_symmetric());
        for i in 0..7 {
            prop_assert_eq!(e.get(i, i), 1.0);
            prop_assert_eq!(c.get(i, i), 1.0);
            for j in 0..7 {
                prop_assert!(c.get(i, j) <= d.get(i, j));
                prop_assert!((0.0..=1.0).contains(&e.get(i, j)));
            }
        }
    }

    #[test]
    fn decay_is_monotone_in_gap(a in 0u64..10_000, b in 0u64..10_000, t_p in 1.0..1000.0f64) {
        let e = decay_matrix(&[0, a, b], t_p);
        if a <= b {
            prop_assert!(e.get(0, 1) >= e.get(0, 2));
        } else {
            prop_assert!(e.get(0, 1) <= e.get(0, 2));
        }
    }

    #[test]
    fn decay_grows_with_time_constant(dt in 1u64..5000, t1 in 1.0..500.0f64, extra in 0.0..500.0f64) {
        let small = decay_matrix(&[0, dt], t1).get(0, 1);
        let large = decay_matrix(&[0, dt], t1 + extra).get(0, 1);
        prop_assert!(small <= large);
    }

    #[test]
    fn windows_partition_the_corpus(tweets in tweets(), w in 1u64..5000) {
        let corpus = Corpus::new("p", tweets).unwrap();
        let windows = split_windows(&corpus, w);
        let joined: Vec<Tweet> = windows.iter().flat_map(|c| c.tweets().to_vec()).collect();
        prop_assert_eq!(joined.as_slice(), corpus.tweets());
        let t0 = corpus.tweets()[0].timestamp;
        let mut last_k = None;
        for win in &windows {
            prop_assert!(!win.is_empty());
            let k = (win.tweets()[0].timestamp - t0) / w;
            prop_assert!(win.tweets().iter().all(|t| (t.timestamp - t0) / w == k));
            prop_assert!(last_k.is_none_or(|l| l < k));
            last_k = Some(k);
        }
    }

    #[test]
    fn corpus_round_trips(tweets in tweets()) {
        let corpus = Corpus::new("p", tweets).unwrap();
        let mut buf = Vec::new();
        write_corpus_to(&corpus, &mut buf).unwrap();
        let (back, report) = read_corpus(Cursor::new(buf), "p", &LoadOptions::default()).unwrap();
        prop_assert_eq!(back, corpus);
        prop_assert!(report.malformed.is_empty());
    }

    #[test]
    fn affinity_propagation_properties(vals in upper_entries(8)) {
        let c = matrix_from(8, &vals);
        let cl = common::ap(&c, Preference::Median);
        prop_assert_eq!(cl.assignment.len(), 8);
        if let Err(msg) = common::check_assignment(&c, &cl) {
            return Err(TestCaseError::fail(msg));
        }
        prop_assert_eq!(&common::ap(&c, Preference::Median), &cl);

        let all = common::ap(&c, Preference::Value(1e3));
        prop_assert_eq!(all.num_clusters(), 8);
    }

    #[test]
    fn filter_survivors_shrink_with_delta(
        scores in prop::collection::vec((0.0..1.0f64, 1usize..6), 0..20),
        d1 in 0.0..1.0f64,
        d2 in 0.0..1.0f64,
        min_size in 1usize..4,
    ) {
        let scored: Vec<Cluster> = scores
            .iter()
            .enumerate()
            .map(|(k, &(a, n))| Cluster { exemplar: k, members: (0..n).collect(), average_affinity: a })
            .collect();
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (keep_lo, _) = select_clusters(&scored, lo, min_size);
        let (keep_hi, report) = select_clusters(&scored, hi, min_size);
        prop_assert!(keep_hi.iter().all(|c| keep_lo.contains(c)));
        prop_assert_eq!(report.clusters_after + report.removed_clusters.len(), scored.len());
    }

    #[test]
    fn metrics_stay_in_range(
        total in 0usize..200,
        linked_frac in 0.0..=1.0f64,
        detected in 0usize..100,
        missed in 0usize..100,
    ) {
        let linked = (total as f64 * linked_frac) as usize;
        let r = EvalResult::from_counts(linked, total, detected, missed);
        for v in [r.precision, r.recall, r.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        if r.f1_defined {
            let closed = 2.0 * r.precision * r.recall / (r.precision + r.recall);
            prop_assert!((r.f1 - closed).abs() < 1e-12);
            prop_assert!(r.f1 <= r.precision.max(r.recall) + 1e-12);
            prop_assert!(r.f1 >= r.precision.min(r.recall) - 1e-12);
        }
    }

    #[test]
    fn quality_in_unit_interval(labels in prop::collection::vec(prop::collection::vec(prop::option::of("[ABC]"), 1..10), 1..8)) {
        let clusters: Vec<_> = labels
            .iter()
            .map(|ls| {
                let members: Vec<Tweet> = ls
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        let t = Tweet::new(format!("t{i}"), 0, "x");
                        match l { Some(l) => t.labeled(l.clone()), None => t }
                    })
                    .collect();
                smerc::EventCluster { window: 0, exemplar: members[0].clone(), members, average_affinity: 1.0 }
            })
            .collect();
        if let Ok(q) = cluster_quality(&clusters) {
            prop_assert!((0.0..=1.0).contains(&q.mean));
            for v in q.per_cluster.iter().flatten() {
                prop_assert!(*v > 0.0 && *v <= 1.0);
            }
        }
    }

    #[test]
    fn stems_never_grow(word in "[a-z]{1,15}") {
        prop_assert!(stem(&word).len() <= word.len());
    }
}
