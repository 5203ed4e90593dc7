use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tweetrank::featurizer::{read_letor, NUM_FEATURES};

fn tweetrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tweetrank"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tweetrank(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Synthesises and splits a small dataset.
    fn new() -> Self {
        let ws = Workspace {
            dir: TempDir::new().unwrap(),
        };
        let data = ws.path("all.jsonl");
        ok(&[
            "--seed",
            "3",
            "synth",
            "--users",
            "60",
            "--items",
            "20",
            "-o",
            p(&data),
        ]);
        ok(&[
            "split",
            p(&data),
            "--fractions",
            "0.8,0.1,0.1",
            "--out-prefix",
            p(&ws.path("s")),
        ]);
        ws
    }

    fn split(&self, part: &str) -> PathBuf {
        self.path(&format!("s.{part}.jsonl"))
    }
}

#[test]
fn full_workflow() {
    let ws = Workspace::new();
    let (train, test) = (ws.split("train"), ws.split("test"));
    let lines = |f: &Path| fs::read_to_string(f).unwrap().lines().count();
    let total = lines(&ws.path("all.jsonl"));
    assert_eq!(
        lines(&train) + lines(&test) + lines(&ws.split("eval")),
        total
    );

    let stats = ws.path("stats.csv");
    let hist = ws.path("hist.csv");
    ok(&["stats", p(&train), "-o", p(&stats), "--histogram", p(&hist)]);
    assert!(fs::read_to_string(&stats)
        .unwrap()
        .starts_with("user_count,"));
    assert!(fs::read_to_string(&hist)
        .unwrap()
        .starts_with("rating,engagement,frequency"));

    let model = ws.path("model.json");
    let summary = ok(&[
        "train",
        "--train",
        p(&train),
        "--max-trees",
        "40",
        "--early-stop",
        "10",
        "-o",
        p(&model),
    ]);
    assert!(summary.contains("validation mean_ndcg@10="), "{summary}");
    assert!(fs::read_to_string(&model)
        .unwrap()
        .contains("\"format_version\": 1"));

    let per_user = ws.path("per_user.csv");
    let eval = ok(&[
        "eval",
        "--model",
        p(&model),
        "--train",
        p(&train),
        "--data",
        p(&test),
        "-o",
        p(&per_user),
    ]);
    let mean: f64 = eval
        .trim()
        .strip_prefix("mean_ndcg@10=")
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.0..=1.0).contains(&mean));
    let csv = fs::read_to_string(&per_user).unwrap();
    assert_eq!(csv.lines().next(), Some("user_id,ndcg"));

    let ideal = ok(&[
        "eval",
        "--model",
        "ideal",
        "--train",
        p(&train),
        "--data",
        p(&test),
    ]);
    assert_eq!(ideal.trim(), "mean_ndcg@10=1.000000");

    let user = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .to_string();
    let ranked = ok(&[
        "rank",
        "--model",
        p(&model),
        "--train",
        p(&train),
        "--data",
        p(&test),
        "--user",
        &user,
    ]);
    assert!(!ranked.trim().is_empty());
}

#[test]
fn repeated_runs_are_identical() {
    let ws = Workspace::new();
    let train = ws.split("train");
    let (a, b) = (ws.path("a.json"), ws.path("b.json"));
    for m in [&a, &b] {
        ok(&[
            "train",
            "--train",
            p(&train),
            "--max-trees",
            "20",
            "-o",
            p(m),
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let again = ws.path("again.jsonl");
    ok(&[
        "--seed",
        "3",
        "synth",
        "--users",
        "60",
        "--items",
        "20",
        "-o",
        p(&again),
    ]);
    assert_eq!(
        fs::read(&again).unwrap(),
        fs::read(ws.path("all.jsonl")).unwrap()
    );

    let random = |seed: &str| {
        ok(&[
            "--seed",
            seed,
            "eval",
            "--model",
            "recRandom",
            "--train",
            p(&train),
            "--data",
            p(&ws.split("test")),
        ])
    };
    assert_eq!(random("5"), random("5"));
}

#[test]
fn export_format_round_trips() {
    let ws = Workspace::new();
    let out = ws.path("features.txt");
    ok(&[
        "export",
        "--train",
        p(&ws.split("train")),
        "--data",
        p(&ws.split("test")),
        "--normalize",
        "-o",
        p(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let first = text.lines().next().unwrap();
    let fields: Vec<&str> = first.split(' ').collect();
    assert!(fields[0].parse::<u32>().is_ok());
    assert_eq!(fields[1], "qid:1");
    for (j, f) in fields[2..2 + NUM_FEATURES].iter().enumerate() {
        let (idx, value) = f.split_once(':').unwrap();
        assert_eq!(idx, (j + 1).to_string());
        assert_eq!(value.split_once('.').unwrap().1.len(), 6, "{value}");
    }
    assert_eq!(fields[2 + NUM_FEATURES], "#");

    let rows = read_letor(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), text.lines().count());
    assert!(rows.windows(2).all(|w| w[0].qid <= w[1].qid));
}

#[test]
fn failures_exit_nonzero() {
    let ws = Workspace::new();
    let train = ws.split("train");
    let (x, y) = (ws.path("x.jsonl"), ws.path("y"));
    let bad = [
        (
            vec!["synth", "--users", "0", "-o", p(&x)],
            "user and item counts",
        ),
        (
            vec![
                "eval",
                "--model",
                "missing.json",
                "--train",
                p(&train),
                "--data",
                p(&train),
            ],
            "error",
        ),
        (
            vec![
                "rank",
                "--model",
                "recRating",
                "--train",
                p(&train),
                "--data",
                p(&train),
                "--user",
                "nobody",
            ],
            "nobody",
        ),
        (
            vec![
                "split",
                p(&train),
                "--fractions",
                "0.5,0.5,0.5",
                "--out-prefix",
                p(&y),
            ],
            "invalid split fractions",
        ),
        (
            vec![
                "split",
                p(&train),
                "--fractions",
                "0.5,0.5",
                "--out-prefix",
                p(&y),
            ],
            "three fractions",
        ),
        (
            vec![
                "--k",
                "0",
                "eval",
                "--model",
                "recRating",
                "--train",
                p(&train),
                "--data",
                p(&train),
            ],
            "--k",
        ),
    ];
    for (args, message) in bad {
        let out = tweetrank(&args);
        assert!(!out.status.success(), "{args:?} should fail");
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert!(
            stderr.contains("error") && stderr.contains(message),
            "{args:?}: {stderr}"
        );
    }

    let corrupt = ws.path("corrupt.jsonl");
    fs::write(&corrupt, "{\"user_id\": 1}\n").unwrap();
    let out = tweetrank(&["stats", p(&corrupt)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
