//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so the criteria
//! execute sequentially and the timing checks are not disturbed by sibling tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use well_core::lda::{align_topics, fit_lda, fit_lda_traced, LdaConfig};
use well_core::learner::{decision_score, FitConfig, LinearModel, LossKind};
use well_core::metrics::{
    average_precision, precision_at_k, rank_indices, RankedEntry, RankedResult,
};
use well_core::spl::*;
use well_core::synth::{run_noise_sweep, run_size_sweep, SynthConfig};
use well_core::text::{build_region, CurriculumRegion};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

/// Labels +1 on every third sample, positives shifted along the first axis, a fraction of
/// labels flipped.
fn blobs(n: usize, dim: usize, shift: f64, flip: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i % 3 == 0 { 1.0 } else { -1.0 };
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(normal)).collect();
        x[0] += shift * y;
        xs.push(x);
        ys.push(if rng.random_bool(flip) { -y } else { y });
    }
    (xs, ys)
}

fn rows(xs: &[Vec<f64>]) -> Vec<&[f64]> {
    xs.iter().map(Vec::as_slice).collect()
}

fn c1_vstep_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let grid = 10_000;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let losses: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.1) {
                    0.0
                } else {
                    rng.random_range(0.0..5.0)
                }
            })
            .collect();
        let lambda = 10f64.powf(rng.random_range(-3.0..1.0));
        let mut region = CurriculumRegion::unconstrained(n);
        region.upper_bounds = (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    rng.random_range(0.01..1.0)
                }
            })
            .collect();
        let r: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.7) { 1.001 } else { 0.001 })
            .collect();
        let lin = vstep_linear(&losses, lambda, &region).unwrap();
        let drop = vstep_dropout_with(&losses, lambda, &region, &r).unwrap();
        let mut best_lin = 0.0;
        let mut best_drop = 0.0;
        for i in 0..n {
            let u = region.upper_bounds[i];
            let (mut bl, mut bd) = (f64::INFINITY, f64::INFINITY);
            for j in 0..grid {
                let t = u * j as f64 / (grid - 1) as f64;
                bl = bl.min(objective(&losses[i..=i], &[t], lambda).unwrap());
                bd = bd.min(objective_dropout(&losses[i..=i], &[t], lambda, &r[i..=i]).unwrap());
            }
            best_lin += bl;
            best_drop += bd;
        }
        let gap_lin = objective(&losses, &lin, lambda).unwrap() - best_lin;
        let gap_drop = objective_dropout(&losses, &drop, lambda, &r).unwrap() - best_drop;
        worst = worst.max(gap_lin).max(gap_drop);
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && within(elapsed, 10.0),
        format!(
            "worst excess over grid {worst:.3e}, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_reduction_identities() -> Outcome {
    let (xs, ys) = blobs(300, 6, 1.0, 0.15, 21);
    let x = rows(&xs);
    let scores: Vec<f64> = ys
        .iter()
        .map(|&y| if y > 0.0 { 1.0 } else { 0.0 })
        .collect();
    let region = build_region(&scores, 0.5).unwrap();
    let schedule = AgeSchedule {
        stop_iter: 40,
        max_iters: 50,
        obj_tol: 0.0,
        ..AgeSchedule::default()
    };
    let linear = TrainConfig {
        regularizer: RegularizerSpec::linear(),
        schedule: schedule.clone(),
        ..TrainConfig::default()
    };
    let degenerate = TrainConfig {
        regularizer: RegularizerSpec {
            kind: RegularizerKind::DropoutLinear,
            p_pos: 1.0,
            p_neg: 1.0,
            epsilon: 0.0,
            ..RegularizerSpec::default()
        },
        ..linear.clone()
    };
    let a = train_well_traced(&x, &ys, &region, &linear, None).unwrap();
    let b = train_well_traced(&x, &ys, &region, &degenerate, None).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let same_trajectory = a.models == b.models
        && a.weights.len() == 50
        && a.weights
            .iter()
            .zip(&b.weights)
            .all(|(p, q)| bits(p) == bits(q))
        && bits(&a.state.objective_history) == bits(&b.state.objective_history)
        && a.report.iterations == b.report.iterations;

    let (tx, _) = blobs(400, 6, 1.0, 0.0, 22);
    let free = CurriculumRegion::unconstrained(x.len());
    let huge = TrainConfig {
        regularizer: RegularizerSpec::linear(),
        schedule: AgeSchedule {
            fixed_lambda: Some(1e9),
            ..AgeSchedule::default()
        },
        ..TrainConfig::default()
    };
    let well = train_well(&x, &ys, &free, &huge, None).unwrap();
    let batch = train_mode(TrainMode::Batch, &x, &ys, &free, &huge, None).unwrap();
    let rank = |m: &LinearModel| {
        let s: Vec<f64> = tx.iter().map(|t| decision_score(m, t).unwrap()).collect();
        rank_indices(&s)
    };
    let same_ranking = rank(&well.model) == rank(&batch.model);
    outcome(
        same_trajectory && same_ranking,
        format!("50-iteration trajectory identical: {same_trajectory}; lambda=1e9 ranking equals batch: {same_ranking}"),
    )
}

fn c3_monotone_alternation() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut lengths_ok = true;
    for inst in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(300 + inst);
        let n = rng.random_range(60..200);
        let (xs, ys) = blobs(
            n,
            5,
            rng.random_range(0.5..2.0),
            rng.random_range(0.0..0.3),
            inst,
        );
        let x = rows(&xs);
        let scores: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 })
            .collect();
        let Ok(region) = build_region(&scores, rng.random_range(0.2..0.9)) else {
            continue;
        };
        let cfg = TrainConfig {
            learner: FitConfig::exact(LossKind::SquaredHinge, 0.1, 1e-8),
            regularizer: RegularizerSpec {
                resample: false,
                rng_seed: inst,
                ..RegularizerSpec::default()
            },
            schedule: AgeSchedule {
                fixed_lambda: Some(rng.random_range(0.3..3.0)),
                max_iters: 30,
                obj_tol: 0.0,
                ..AgeSchedule::default()
            },
            ..TrainConfig::default()
        };
        let t = train_well_traced(&x, &ys, &region, &cfg, None).unwrap();
        let h = &t.state.objective_history;
        lengths_ok &= h.len() == 30;
        for w in h.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    outcome(
        lengths_ok && worst <= 1e-6,
        format!("largest objective increase {worst:.3e} over 20 instances x 30 alternations"),
    )
}

fn c4_gradient_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for loss in [LossKind::Hinge, LossKind::Logistic] {
        let mut done = 0;
        while done < 100 {
            let mut m = LinearModel::zeros(5, loss, 0.0);
            m.normalize_input = false;
            m.weights = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
            m.bias = rng.random_range(-0.5..0.5);
            let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let margin = y * decision_score(&m, &x).unwrap();
            if loss == LossKind::Hinge && (margin - 1.0).abs() < 1e-3 {
                continue;
            }
            let (gw, gb) = m.loss_gradient(&x, y).unwrap();
            let analytic: Vec<f64> = gw.into_iter().chain([gb]).collect();
            let h = 1e-6;
            let value = |m: &LinearModel| m.loss.value(y, decision_score(m, &x).unwrap());
            let numeric: Vec<f64> = (0..=5)
                .map(|j| {
                    let (mut p, mut q) = (m.clone(), m.clone());
                    if j < 5 {
                        p.weights[j] += h;
                        q.weights[j] -= h;
                    } else {
                        p.bias += h;
                        q.bias -= h;
                    }
                    (value(&p) - value(&q)) / (2.0 * h)
                })
                .collect();
            let diff = analytic
                .iter()
                .zip(&numeric)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
            let rel = if scale > 0.0 { diff / scale } else { diff };
            worst = worst.max(rel);
            done += 1;
        }
    }
    outcome(
        worst <= 1e-5,
        format!("worst relative error {worst:.3e} over 2 x 100 probes"),
    )
}

fn planted_corpus(docs: usize, len: usize, seed: u64) -> (Vec<Vec<String>>, Vec<Vec<f64>>) {
    let vocab: Vec<String> = (0..20).map(|i| format!("w{i:02}")).collect();
    let topics: Vec<Vec<f64>> = (0..2)
        .map(|k| {
            let raw: Vec<f64> = (0..20)
                .map(|w| {
                    if (w < 10) == (k == 0) {
                        1.0 + (w % 3) as f64
                    } else {
                        0.05
                    }
                })
                .collect();
            let s: f64 = raw.iter().sum();
            raw.into_iter().map(|x| x / s).collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Gamma::new(0.5, 1.0).unwrap();
    let corpus = (0..docs)
        .map(|_| {
            let a: f64 = g.sample(&mut rng);
            let b: f64 = g.sample(&mut rng);
            let theta = a / (a + b);
            (0..len)
                .map(|_| {
                    let k = usize::from(rng.random::<f64>() >= theta);
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = 19;
                    for (w, p) in topics[k].iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = w;
                            break;
                        }
                    }
                    vocab[pick].clone()
                })
                .collect()
        })
        .collect();
    (corpus, topics)
}

fn c5_lda() -> Outcome {
    let start = Instant::now();
    let base = LdaConfig {
        min_count: 1,
        max_doc_frac: 1.0,
        ..LdaConfig::default()
    };
    let (corpus, _) = planted_corpus(200, 40, 3);
    let cfg = LdaConfig {
        num_topics: 4,
        vb_iters: 50,
        tol: f64::MIN_POSITIVE,
        ..base.clone()
    };
    let fit = fit_lda_traced(&corpus, &cfg, &BTreeMap::new()).unwrap();
    let h = &fit.elbo_history;
    let worst_drop = h
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = h.len() == 50 && worst_drop <= 1e-8;

    let mut recovered = 0;
    for seed in 0..10 {
        let (corpus, truth) = planted_corpus(200, 50, 100 + seed);
        let cfg = LdaConfig {
            num_topics: 2,
            rng_seed: seed,
            ..base.clone()
        };
        let model = fit_lda(&corpus, &cfg, &BTreeMap::new()).unwrap();
        let learned: Vec<Vec<f64>> = (0..2).map(|k| model.expected_topic_word(k)).collect();
        if align_topics(&learned, &truth)
            .iter()
            .all(|&(_, c)| c >= 0.9)
        {
            recovered += 1;
        }
    }

    let (corpus, _) = planted_corpus(60, 30, 4);
    let cfg = LdaConfig {
        num_topics: 3,
        seed_boost: 1.0,
        ..base
    };
    let seeds = BTreeMap::from([(0usize, vec!["w01".to_string()])]);
    let a = fit_lda(&corpus, &cfg, &seeds).unwrap();
    let b = fit_lda(&corpus, &cfg, &BTreeMap::new()).unwrap();
    let identical = a.topic_word_param == b.topic_word_param;
    let elapsed = start.elapsed();
    outcome(
        monotone && recovered >= 9 && identical && within(elapsed, 60.0),
        format!(
            "ELBO monotone: {monotone} (largest drop {worst_drop:.2e}); recovered {recovered}/10; boost-1 identical: {identical}; {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn c6_metrics() -> Outcome {
    let golden = (average_precision(&[true, false, true], 2) - 0.833_333_333_333_333_3).abs()
        < 1e-9
        && (precision_at_k(&[true, true, false, true, false], 5).unwrap() - 0.6).abs() < 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut invariant = true;
    for _ in 0..1000 {
        let n = rng.random_range(1..50);
        let entries: Vec<RankedEntry> = (0..n)
            .map(|i| RankedEntry {
                id: format!("id{i:03}"),
                score: rng.random_range(0..6) as f64,
                relevant: rng.random_bool(0.3),
            })
            .collect();
        let base = RankedResult::from_entries("c", entries.clone());
        let mut shuffled = entries;
        shuffled.shuffle(&mut rng);
        let other = RankedResult::from_entries("c", shuffled);
        let ordered = base
            .entries
            .windows(2)
            .all(|w| w[0].score > w[1].score || (w[0].score == w[1].score && w[0].id < w[1].id));
        invariant &= base == other && ordered && base.metrics().ap == other.metrics().ap;
    }
    outcome(
        golden && invariant,
        format!("golden values exact: {golden}; permutation and tie invariants on 1000 lists: {invariant}"),
    )
}

fn c7_noise_trend() -> Outcome {
    let start = Instant::now();
    let ps = [0.2, 0.4, 0.6, 0.8];
    let seeds: Vec<u64> = (0..5).collect();
    let res = match run_noise_sweep(
        &ps,
        &TrainMode::ALL,
        &seeds,
        &SynthConfig::default(),
        &TrainConfig::default(),
        None,
    ) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let mean = |m, p| res.mean(m, p).unwrap_or(f64::NAN);
    let ordering = ps.iter().all(|&p| {
        mean(TrainMode::Well, p) >= mean(TrainMode::Spl, p)
            && mean(TrainMode::Well, p) >= mean(TrainMode::Batch, p)
    });
    let drop = |m, s| {
        let hi = res.map(m, 0.4, s).unwrap_or(f64::NAN);
        let lo = res.map(m, 0.2, s).unwrap_or(f64::NAN);
        (hi - lo) / hi
    };
    let robust_seeds = seeds
        .iter()
        .filter(|&&s| drop(TrainMode::Well, s) < drop(TrainMode::Batch, s))
        .count();
    let table: Vec<String> = ps
        .iter()
        .map(|&p| {
            format!(
                "p={p}: WELL {:.3} SPL {:.3} Batch {:.3}",
                mean(TrainMode::Well, p),
                mean(TrainMode::Spl, p),
                mean(TrainMode::Batch, p)
            )
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        ordering && robust_seeds >= 4 && within(elapsed, 900.0),
        format!(
            "{}; WELL drop smaller on {robust_seeds}/5 seeds; {:.0}s",
            table.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

fn c8_size_trend() -> Outcome {
    let start = Instant::now();
    let sizes = [25, 50, 100, 200];
    let seeds: Vec<u64> = (0..5).collect();
    let res = match run_size_sweep(
        &sizes,
        &[TrainMode::Well],
        &seeds,
        &SynthConfig::default(),
        &TrainConfig::default(),
        None,
    ) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let means: Vec<f64> = sizes
        .iter()
        .map(|&s| res.mean(TrainMode::Well, s as f64).unwrap_or(f64::NAN))
        .collect();
    let monotone = means.windows(2).all(|w| w[1] >= w[0] - 0.02);
    let elapsed = start.elapsed();
    outcome(
        monotone && within(elapsed, 900.0),
        format!(
            "WELL mAP by size {:?}: {}; {:.0}s",
            sizes,
            means
                .iter()
                .map(|m| format!("{m:.3}"))
                .collect::<Vec<_>>()
                .join(" "),
            elapsed.as_secs_f64()
        ),
    )
}

const SMALL: &str = r#"{
  "synth": {"concepts": 3, "n_pos": 40, "n_neg": 150, "dim": 8, "test_pos": 20, "test_neg": 80},
  "schedule": {"stop_iter": 15, "max_iters": 20},
  "lda": {"num_topics": 3, "vb_iters": 20, "min_count": 1, "max_doc_frac": 1.0},
  "sweep": {"methods": ["batch", "well"]}
}"#;

/// Every CLI command in sequence; returns each output file with its bytes.
fn cli_run(
    root: &Path,
    cfg: &Path,
    seed: &str,
    jobs: &str,
) -> Result<Vec<(String, Vec<u8>)>, String> {
    let s = |p: PathBuf| p.to_string_lossy().into_owned();
    let data = root.join("data");
    let steps: Vec<Vec<String>> = vec![
        vec![
            "synth".into(),
            "generate".into(),
            "--out".into(),
            s(data.clone()),
        ],
        vec![
            "curriculum".into(),
            "build".into(),
            "--method".into(),
            "exact".into(),
            "--dataset".into(),
            s(data.join("train.jsonl")),
            "--out".into(),
            s(root.join("exact.jsonl")),
        ],
        vec![
            "curriculum".into(),
            "build".into(),
            "--method".into(),
            "latent-topic".into(),
            "--dataset".into(),
            s(data.join("train.jsonl")),
            "--out".into(),
            s(root.join("topic.jsonl")),
        ],
        vec![
            "train".into(),
            "--dataset".into(),
            s(data.join("train.jsonl")),
            "--curriculum".into(),
            s(root.join("exact.jsonl")),
            "--validation".into(),
            s(data.join("validation.jsonl")),
            "--out".into(),
            s(root.join("models")),
        ],
        vec![
            "eval".into(),
            "--dataset".into(),
            s(data.join("test.jsonl")),
            "--models".into(),
            s(root.join("models")),
            "--out".into(),
            s(root.join("metrics.csv")),
        ],
        vec![
            "sweep".into(),
            "noise".into(),
            "--values".into(),
            "0.3,0.7".into(),
            "--seeds".into(),
            "0,1,2".into(),
            "--out".into(),
            s(root.join("sweep")),
        ],
        vec![
            "sweep".into(),
            "size".into(),
            "--values".into(),
            "20,40".into(),
            "--seeds".into(),
            "0,1,2".into(),
            "--out".into(),
            s(root.join("size")),
        ],
        vec![
            "config".into(),
            "schema".into(),
            "--out".into(),
            s(root.join("schema.json")),
        ],
    ];
    for mut args in steps {
        if args[0] != "config" {
            args.extend([
                "--config".into(),
                s(cfg.to_path_buf()),
                "--seed".into(),
                seed.into(),
                "--jobs".into(),
                jobs.into(),
            ]);
        }
        let out = Command::new(env!("CARGO_BIN_EXE_well"))
            .args(&args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            ));
        }
    }
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                files.push((rel, fs::read(&path).map_err(|e| e.to_string())?));
            }
        }
    }
    files.sort();
    Ok(files)
}

fn c9_cli_determinism() -> Outcome {
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = cfg_dir.path().join("config.json");
    fs::write(&cfg, SMALL).unwrap();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let runs: Result<Vec<_>, String> = [("11", "1"), ("11", "1"), ("11", "8")]
        .iter()
        .zip(&dirs)
        .map(|((seed, jobs), d)| cli_run(d.path(), &cfg, seed, jobs))
        .collect();
    match runs {
        Err(e) => outcome(false, format!("command failed: {e}")),
        Ok(r) => {
            let rerun = r[0] == r[1];
            let threads = r[0] == r[2];
            outcome(
                rerun && threads && !r[0].is_empty(),
                format!(
                    "{} output files; rerun identical: {rerun}; --jobs 1 vs 8 identical: {threads}",
                    r[0].len()
                ),
            )
        }
    }
}

fn c10_scaling() -> Outcome {
    let time_for = |n: usize| {
        let (xs, ys) = blobs(n, 10, 1.0, 0.1, 10);
        let x = rows(&xs);
        let region = CurriculumRegion::unconstrained(n);
        let cfg = TrainConfig {
            schedule: AgeSchedule {
                fixed_lambda: Some(1.0),
                max_iters: 20,
                obj_tol: 0.0,
                ..AgeSchedule::default()
            },
            ..TrainConfig::default()
        };
        (0..7)
            .map(|_| {
                let t = Instant::now();
                train_well(&x, &ys, &region, &cfg, None).unwrap();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = time_for(5_000);
    let large = time_for(10_000);
    let ratio = large / small;
    outcome(
        ratio <= 2.5,
        format!("n=5000: {small:.4}s, n=10000: {large:.4}s, ratio {ratio:.2}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("v-step exactness", c1_vstep_exactness),
        ("reduction identities", c2_reduction_identities),
        ("alternation monotonicity", c3_monotone_alternation),
        ("gradient checks", c4_gradient_checks),
        ("topic model", c5_lda),
        ("retrieval metrics", c6_metrics),
        ("noise robustness trend", c7_noise_trend),
        ("size scaling trend", c8_size_trend),
        ("CLI determinism", c9_cli_determinism),
        ("complexity", c10_scaling),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
