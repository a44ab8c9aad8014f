use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::json;

fn well(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_well"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &str = r#"{
  "synth": {"concepts": 3, "n_pos": 30, "n_neg": 120, "dim": 6, "test_pos": 15, "test_neg": 60},
  "schedule": {"stop_iter": 10, "max_iters": 15},
  "lda": {"num_topics": 3, "vb_iters": 20, "min_count": 1, "max_doc_frac": 1.0}
}"#;

#[test]
fn help_and_usage_errors() {
    assert_eq!(well(&["--help"]).status.code(), Some(0));
    assert_eq!(well(&["train", "--help"]).status.code(), Some(0));
    assert_eq!(well(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        well(&["curriculum", "build", "--method", "nonsense"])
            .status
            .code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"sed": 3}"#).unwrap();
    let out = dir.path().join("o");
    assert_eq!(
        well(&["synth", "generate", "--config", p(&cfg), "--out", p(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        well(&["synth", "generate", "--jobs", "0", "--out", p(&out)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(well(&["train"]).status.code(), Some(2));
}

fn report(concept: &str, weights: Vec<f64>, bias: f64) -> serde_json::Value {
    json!({
        "concept": concept,
        "model": {"weights": weights, "bias": bias, "loss": "hinge", "l2": 0.1, "normalize_input": true},
        "schedule": {},
        "regularizer": {},
        "iterations": [],
        "chosen_iteration": 1,
        "seeds": {"learner": 0, "dropout": 0}
    })
}

fn golden_fixture(dir: &Path, with_failure: bool) {
    let rows = [
        ("a", 3.0, vec!["c00"]),
        ("b", 2.0, vec!["c01"]),
        ("c", 1.0, vec!["c00"]),
        ("d", 0.0, vec![]),
        ("e", -1.0, vec!["c01"]),
    ];
    let text: String = rows
        .iter()
        .map(|(id, x, gt)| json!({"id": id, "features": [x], "gt": gt}).to_string() + "\n")
        .collect();
    fs::write(dir.join("test.jsonl"), text).unwrap();
    let models = dir.join("models");
    fs::create_dir_all(&models).unwrap();
    fs::write(
        models.join("c00.json"),
        report("c00", vec![1.0], 0.0).to_string(),
    )
    .unwrap();
    fs::write(
        models.join("c01.json"),
        report("c01", vec![-1.0], 0.5).to_string(),
    )
    .unwrap();
    let mut concepts = json!({"c00": {"file": "c00.json"}, "c01": {"file": "c01.json"}});
    if with_failure {
        concepts["c02"] = json!({"error": "no confident sample"});
    }
    let manifest = json!({"mode": "well", "seed": 0, "concepts": concepts});
    fs::write(models.join("manifest.json"), manifest.to_string()).unwrap();
}

#[test]
fn eval_matches_hand_computed_metrics() {
    let dir = tempfile::tempdir().unwrap();
    golden_fixture(dir.path(), false);
    let out = well(&[
        "eval",
        "--dataset",
        p(&dir.path().join("test.jsonl")),
        "--models",
        p(&dir.path().join("models")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // c00 ranks a,b,c,d,e -> [1,0,1,0,0]; c01 ranks e,d,c,b,a -> [1,0,0,1,0]
    let expected = "concept,ap,p_at_5,p_at_10\n\
                    c00,0.833333,0.400000,0.200000\n\
                    c01,0.750000,0.400000,0.200000\n\
                    MEAN,0.791667,0.400000,0.200000\n";
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn eval_with_missing_models_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    golden_fixture(dir.path(), true);
    let csv = dir.path().join("metrics.csv");
    let out = well(&[
        "eval",
        "--dataset",
        p(&dir.path().join("test.jsonl")),
        "--models",
        p(&dir.path().join("models")),
        "--out",
        p(&csv),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(fs::read_to_string(csv).unwrap().contains("MEAN,0.791667"));
}

/// Runs synth, curriculum, train and eval; returns every primary output.
fn pipeline(dir: &Path, seed: &str, jobs: &str, method: &str) -> Vec<(String, Vec<u8>)> {
    let cfg = dir.join("config.json");
    fs::write(&cfg, SMALL).unwrap();
    let common = ["--config", p(&cfg), "--seed", seed, "--jobs", jobs];
    let data = dir.join("data");
    let cur = dir.join("curriculum.jsonl");
    let models = dir.join("models");
    let metrics = dir.join("metrics.csv");
    let train = data.join("train.jsonl");
    let validation = data.join("validation.jsonl");
    let test = data.join("test.jsonl");
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "generate", "--out", p(&data)],
        vec![
            "curriculum",
            "build",
            "--method",
            method,
            "--dataset",
            p(&train),
            "--out",
            p(&cur),
        ],
        vec![
            "train",
            "--dataset",
            p(&train),
            "--curriculum",
            p(&cur),
            "--validation",
            p(&validation),
            "--out",
            p(&models),
        ],
        vec![
            "eval",
            "--dataset",
            p(&test),
            "--models",
            p(&models),
            "--out",
            p(&metrics),
        ],
    ];
    for step in steps {
        let mut args = step.clone();
        args.extend_from_slice(&common);
        let out = well(&args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let mut files = Vec::new();
    for root in [&data, &models] {
        let mut names: Vec<_> = fs::read_dir(root)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        names.sort();
        for f in names {
            files.push((
                f.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&f).unwrap(),
            ));
        }
    }
    for f in [&cur, &metrics] {
        files.push((
            f.file_name().unwrap().to_string_lossy().into_owned(),
            fs::read(f).unwrap(),
        ));
    }
    files
}

#[test]
fn pipeline_is_deterministic_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let first = pipeline(a.path(), "7", "1", "exact");
    let second = pipeline(b.path(), "7", "8", "exact");
    assert_eq!(first, second);
    let other = pipeline(c.path(), "8", "1", "exact");
    assert_ne!(first, other);
}

#[test]
fn topic_curriculum_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(
        pipeline(a.path(), "3", "1", "latent-topic"),
        pipeline(b.path(), "3", "8", "latent-topic")
    );
}

#[test]
fn sweep_writes_every_cell_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("sweep");
    let args = [
        "sweep",
        "noise",
        "--config",
        p(&cfg),
        "--values",
        "0.4,0.8",
        "--seeds",
        "0,1,2",
        "--methods",
        "batch,spl",
        "--out",
        p(&out),
    ];
    let run = || {
        let o = well(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        (
            fs::read_to_string(out.join("sweep.csv")).unwrap(),
            fs::read_to_string(out.join("plot.tsv")).unwrap(),
        )
    };
    let (csv, tsv) = run();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);
    assert_eq!(tsv.lines().count(), 1 + 2 * 2);
    assert_eq!(fs::read_dir(out.join("cells")).unwrap().count(), 2 * 3);
    let victim = fs::read_dir(out.join("cells"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    fs::remove_file(victim).unwrap();
    assert_eq!(run(), (csv, tsv));
    let few = well(&[
        "sweep",
        "noise",
        "--config",
        p(&cfg),
        "--seeds",
        "0,1",
        "--out",
        p(&out),
    ]);
    assert_eq!(few.status.code(), Some(2));
}
