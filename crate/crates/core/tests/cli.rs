use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_smerc");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn smerc(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// cluster_id -> member tweet ids
fn clusters(dir: &Path) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut r = csv::Reader::from_path(dir.join("clusters.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        out.entry(rec[0].to_string())
            .or_default()
            .insert(rec[2].to_string());
    }
    out
}

fn write_jsonl(path: &Path, rows: &[Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    fs::write(path, text).unwrap();
}

fn eddie_clusters(extra: &[&str]) -> Vec<BTreeSet<String>> {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("eddie.jsonl");
    let mut args = vec!["cluster", path_str(&input), "--out", path_str(dir.path())];
    args.extend_from_slice(extra);
    let out = smerc(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    clusters(dir.path())
        .into_values()
        .filter(|m| m.iter().any(|id| id.starts_with("eddie")))
        .collect()
}

#[test]
fn two_bursts_separate_with_decay() {
    let found = eddie_clusters(&[]);
    assert_eq!(found.len(), 2, "{found:?}");
    for c in &found {
        let bursts: BTreeSet<&str> = c.iter().map(|id| &id[..7]).collect();
        assert_eq!(bursts.len(), 1, "cluster mixes bursts: {c:?}");
        assert_eq!(c.len(), 18);
    }
}

#[test]
fn two_bursts_merge_without_decay() {
    let found = eddie_clusters(&["--no-decay"]);
    assert_eq!(found.len(), 1, "{found:?}");
    assert_eq!(found[0].len(), 36);
}

#[test]
fn stdout_is_only_the_manifest_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = smerc(&[
        "cluster",
        path_str(&fixture("eddie.jsonl")),
        "--out",
        path_str(dir.path()),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let manifest = PathBuf::from(stdout.trim_end());
    assert_eq!(stdout.lines().count(), 1);
    assert_eq!(manifest, dir.path().join("manifest.json"));
    let files = read_json(&manifest)["files"].as_array().unwrap().len();
    assert_eq!(files, 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn summary_restates_defaults() {
    let dir = tempfile::tempdir().unwrap();
    smerc(&[
        "cluster",
        path_str(&fixture("eddie.jsonl")),
        "--out",
        path_str(dir.path()),
    ]);
    let s = read_json(dir.path().join("summary.json"));
    let cfg = &s["config"];
    assert_eq!(cfg["t_p"], 120.0);
    assert_eq!(cfg["delta"], 0.25);
    assert_eq!(cfg["preference"], "median");
    assert_eq!(cfg["damping"], 0.7);
    assert_eq!(cfg["max_iterations"], 400);
    assert_eq!(s["tweets_collected"], 76);
    assert_eq!(
        s["clusters_after"].as_u64().unwrap() as usize,
        clusters(dir.path()).len()
    );
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = smerc(&[
            "cluster",
            path_str(&fixture("eddie.jsonl")),
            "--out",
            path_str(d.path()),
        ]);
        assert!(out.status.success());
    }
    for f in ["clusters.csv", "summary.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap()
        );
    }
}

#[test]
fn window_flag_splits_two_hours() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    let words = [
        "eddie", "goal", "crows", "rain", "coffee", "tram", "kick", "mark",
    ];
    let rows: Vec<Value> = (0..24)
        .map(|k| {
            let text = format!("{} {} {}", words[k % 8], words[(k + 3) % 8], words[(k / 3) % 8]);
            serde_json::json!({"id": format!("w{k}"), "created_at": 1_000_000 + k * 300, "text": text})
        })
        .collect();
    write_jsonl(&input, &rows);
    let out_dir = dir.path().join("out");
    let out = smerc(&[
        "cluster",
        path_str(&input),
        "--out",
        path_str(&out_dir),
        "--window",
        "3600",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read_json(out_dir.join("summary.json"))["windows"], 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# test\nt_p = 60\ndelta = 0.4\n").unwrap();
    let out = smerc(&[
        "cluster",
        path_str(&fixture("eddie.jsonl")),
        "--out",
        path_str(dir.path()),
        "--config",
        path_str(&cfg),
        "--delta",
        "0.3",
    ]);
    assert!(out.status.success());
    let s = read_json(dir.path().join("summary.json"));
    assert_eq!(s["config"]["t_p"], 60.0);
    assert_eq!(s["config"]["delta"], 0.3);
}

#[test]
fn dump_affinity_writes_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("c.csv");
    let out = smerc(&[
        "cluster",
        path_str(&fixture("eddie.jsonl")),
        "--out",
        path_str(dir.path()),
        "--dump-affinity",
        path_str(&dump),
    ]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(&dump).unwrap();
    assert_eq!(r.headers().unwrap().len(), 77);
    assert_eq!(r.records().count(), 76);
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = path_str(dir.path());
    let missing = smerc(&["cluster", "/nonexistent/corpus.jsonl", "--out", out_dir]);
    assert_eq!(missing.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&missing.stderr);
    assert!(msg.contains("load"), "{msg}");
    assert!(missing.stdout.is_empty());

    let fx = fixture("eddie.jsonl");
    let fx = path_str(&fx);
    assert_eq!(
        smerc(&["cluster", fx, "--out", out_dir, "--bogus"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smerc(&["cluster", fx, "--out", out_dir, "--delta", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smerc(&["cluster", fx, "--out", out_dir, "--damping", "0.2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        smerc(&["synth", "--out", out_dir, "--events", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(smerc(&["--help"]).status.code(), Some(0));
}

#[test]
fn synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str, seed: &str| {
        let d = dir.path().join(name);
        let out = smerc(&[
            "synth",
            "--out",
            path_str(&d),
            "--seed",
            seed,
            "--background-rate",
            "0.05",
        ]);
        assert!(out.status.success());
        fs::read(d.join("corpus.jsonl")).unwrap()
    };
    assert_eq!(read("a", "11"), read("b", "11"));
    assert_ne!(read("a", "11"), read("c", "12"));
}

#[test]
fn evaluate_separable_corpus_is_precise() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    assert!(smerc(&[
        "synth",
        "--out",
        path_str(&s),
        "--events",
        "3",
        "--seed",
        "2"
    ])
    .status
    .success());
    let e = dir.path().join("e");
    let input = s.join("corpus.jsonl");
    let out = smerc(&["evaluate", path_str(&input), "--out", path_str(&e)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = &read_json(e.join("eval.json"))["result"];
    assert_eq!(r["precision"], 1.0);
    assert_eq!(r["recall"], 1.0);
    assert_eq!(r["events_detected"], 3);

    let mut sweep = csv::Reader::from_path(e.join("sweep.csv")).unwrap();
    assert_eq!(
        sweep.headers().unwrap().iter().take(4).collect::<Vec<_>>(),
        ["delta", "precision", "recall", "f1"]
    );
    let totals: Vec<usize> = sweep
        .records()
        .map(|r| r.unwrap()[4].parse().unwrap())
        .collect();
    assert_eq!(totals.len(), 11);
    assert!(totals.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn evaluate_requires_labels() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.jsonl");
    write_jsonl(
        &input,
        &[
            serde_json::json!({"id": "a", "created_at": 0, "text": "eddie goal"}),
            serde_json::json!({"id": "b", "created_at": 5, "text": "eddie kick"}),
        ],
    );
    let out = smerc(&["evaluate", path_str(&input), "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let out = smerc(&[
        "analyze-gaps",
        path_str(&input),
        "--out",
        path_str(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_gaps_recovers_planted_rate() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("s");
    let out = smerc(&[
        "synth",
        "--out",
        path_str(&s),
        "--events",
        "20",
        "--tweets-per-event",
        "25",
        "--spacing",
        "30",
        "--background-rate",
        "0.2",
        "--margin",
        "1000",
        "--lambda",
        "0.01",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let g = dir.path().join("g");
    let input = s.join("corpus.jsonl");
    let out = smerc(&["analyze-gaps", path_str(&input), "--out", path_str(&g)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit = read_json(g.join("fit.json"));
    let slope = fit["slope"].as_f64().unwrap();
    assert!((-0.0115..=-0.0085).contains(&slope), "slope {slope}");
    let t_p = fit["recommended_t_p"].as_f64().unwrap();
    assert!((t_p + 1.0 / slope).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stderr).contains("T_p"));

    let density = fs::read_to_string(g.join("density.csv")).unwrap();
    assert_eq!(density.lines().count(), 513);
    assert!(density.starts_with("t,related_density,unrelated_density\n"));
    let curve = fs::read_to_string(g.join("gap_curve.csv")).unwrap();
    assert!(curve.starts_with("bucket_center,related,unrelated,p_related,ln_p\n"));
    assert_eq!(curve.lines().count(), 61);
}

#[test]
fn flat_probability_warns_without_failing() {
    // one labeled and one unlabeled tweet every 10 s: every nonzero gap has
    // related:unrelated = 1:2
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("flat.jsonl");
    let rows: Vec<Value> = (0..200)
        .flat_map(|k| {
            [
                serde_json::json!({"id": format!("a{k:03}"), "created_at": k * 10, "text": "goal", "event_label": "A"}),
                serde_json::json!({"id": format!("u{k:03}"), "created_at": k * 10, "text": "rain"}),
            ]
        })
        .collect();
    write_jsonl(&input, &rows);
    let g = dir.path().join("g");
    let out = smerc(&["analyze-gaps", path_str(&input), "--out", path_str(&g)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let fit = read_json(g.join("fit.json"));
    assert!(fit["slope"].as_f64().unwrap().abs() < 1e-12);
    assert!(fit["recommended_t_p"].is_null());
    assert!(fit["warning"].is_string());
}
