use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use well_core::data::{load_concepts, load_dataset_with_concepts, save_concepts, Dataset};
use well_core::lda::LdaModel;
use well_core::metrics::{metrics_csv, rank_and_score, write_metrics_csv, ConceptMetrics};
use well_core::pipeline::train_concept;
use well_core::spl::{RegularizerKind, TrainMode, TrainReport, ValidationSet};
use well_core::synth::{generate, run_sweep, SweepAxis, SweepSpec};
use well_core::text::{build_curriculum, load_embeddings, CurriculumScores, MatchMethod};

use crate::config::{schema, RunConfig};
use crate::{
    CliError, Common, CurriculumArgs, EvalArgs, MethodArg, ModeArg, RegularizerArg, SweepArgs,
    SynthArgs, TrainArgs,
};

type CmdResult = Result<(), CliError>;

fn required(
    flag: &Option<PathBuf>,
    configured: &Option<PathBuf>,
    name: &str,
) -> Result<PathBuf, CliError> {
    flag.clone().or_else(|| configured.clone()).ok_or_else(|| {
        CliError::Usage(format!(
            "--{name} is required (flag or paths.{name} in the config)"
        ))
    })
}

fn setup(common: &Common) -> Result<(RunConfig, rayon::ThreadPool), CliError> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    if cfg.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok((cfg, pool))
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Core(well_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn load_data(dataset: &Path, concepts: Option<&Path>) -> Result<Dataset, CliError> {
    let concepts = concepts.map(load_concepts).transpose()?;
    Ok(load_dataset_with_concepts(dataset, None, concepts)?)
}

fn mode_of(arg: ModeArg) -> TrainMode {
    match arg {
        ModeArg::Batch => TrainMode::Batch,
        ModeArg::Spl => TrainMode::Spl,
        ModeArg::Well => TrainMode::Well,
    }
}

fn regularizer_of(arg: RegularizerArg) -> RegularizerKind {
    match arg {
        RegularizerArg::Linear => RegularizerKind::Linear,
        RegularizerArg::Dropout => RegularizerKind::DropoutLinear,
    }
}

pub fn curriculum(args: CurriculumArgs) -> CmdResult {
    let (mut cfg, pool) = setup(&args.common)?;
    let dataset = required(&args.dataset, &cfg.paths.dataset, "dataset")?;
    let out = required(&args.out, &cfg.paths.out, "out")?;
    if let Some(m) = args.method {
        cfg.matching.method = match m {
            MethodArg::Exact => MatchMethod::Exact,
            MethodArg::Stem => MatchMethod::Stem,
            MethodArg::Embedding => MatchMethod::Embedding,
            MethodArg::LatentTopic => MatchMethod::LatentTopic,
            MethodArg::LtWe => MatchMethod::LtWe,
            MethodArg::LtWeMultimodal => MatchMethod::LtWeMultimodal,
        };
    }
    if args.common.seed.is_some() {
        cfg.lda.rng_seed = cfg.seed;
    }
    let method = cfg.matching.method;
    let embeddings_path = args.embeddings.clone().or(cfg.paths.embeddings.clone());
    if method.needs_embeddings() && embeddings_path.is_none() {
        return Err(CliError::Usage(format!(
            "method {method:?} needs --embeddings"
        )));
    }
    let concepts = args.concepts.clone().or(cfg.paths.concepts.clone());
    let data = load_data(&dataset, concepts.as_deref())?;
    let embeddings = embeddings_path
        .filter(|_| method.needs_embeddings())
        .map(|p| load_embeddings(&p))
        .transpose()?;
    let topics = args
        .topics
        .clone()
        .or(cfg.paths.topics.clone())
        .map(|p| {
            let text = std::fs::read_to_string(&p).map_err(|e| io_error(&p, e))?;
            Ok::<_, CliError>(LdaModel::from_json(&text)?)
        })
        .transpose()?;
    let scores = pool.install(|| {
        build_curriculum(
            &data.training_view(),
            &cfg.matching,
            &cfg.lda,
            embeddings.as_ref(),
            topics.as_ref(),
        )
    })?;
    write_file(&out, &scores.to_jsonl()?)?;
    println!("concept\tconfident_fraction");
    for (concept, frac) in scores.coverage() {
        println!("{concept}\t{frac:.4}");
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    mode: TrainMode,
    seed: u64,
    concepts: BTreeMap<String, ManifestEntry>,
}

fn report_file_name(concept: &str) -> String {
    let safe: String = concept
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{safe}.json")
}

pub fn train(args: TrainArgs) -> CmdResult {
    let (mut cfg, pool) = setup(&args.common)?;
    let dataset = required(&args.dataset, &cfg.paths.dataset, "dataset")?;
    let curriculum = required(&args.curriculum, &cfg.paths.curriculum, "curriculum")?;
    let out = required(&args.out, &cfg.paths.out, "out")?;
    if let Some(m) = args.mode {
        cfg.mode = mode_of(m);
    }
    if let Some(r) = args.regularizer {
        cfg.regularizer.kind = regularizer_of(r);
    }
    let concept_file = args.concepts.clone().or(cfg.paths.concepts.clone());
    let data = load_data(&dataset, concept_file.as_deref())?;
    let scores = CurriculumScores::load(&curriculum)?;
    let mut concepts = scores.concepts.clone();
    if let Some(path) = &concept_file {
        let wanted: Vec<String> = load_concepts(path)?.into_iter().map(|c| c.id).collect();
        concepts.retain(|c| wanted.contains(c));
    }
    let validation = args
        .validation
        .clone()
        .or(cfg.paths.validation.clone())
        .map(|p| load_data(&p, concept_file.as_deref()))
        .transpose()?;
    let train_cfg = cfg.train_config();
    let view = data.training_view();
    let outcomes: Vec<Result<TrainReport, String>> = pool.install(|| {
        concepts
            .par_iter()
            .map(|concept| {
                let val = match &validation {
                    Some(v) => {
                        let set =
                            ValidationSet::from_dataset(v, concept).map_err(|e| e.to_string())?;
                        if set.relevant.iter().any(|&r| r) {
                            Some(set)
                        } else {
                            log::warn!(
                                "no validation positives for {concept}; using the last iteration"
                            );
                            None
                        }
                    }
                    None => None,
                };
                train_concept(
                    &view,
                    &scores,
                    concept,
                    cfg.mode,
                    &train_cfg,
                    cfg.seed,
                    val.as_ref(),
                )
                .map_err(|e| e.to_string())
            })
            .collect()
    });

    std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    let mut manifest = Manifest {
        mode: cfg.mode,
        seed: cfg.seed,
        concepts: BTreeMap::new(),
    };
    let mut failed = 0;
    for (concept, outcome) in concepts.iter().zip(outcomes) {
        let entry = match outcome {
            Ok(report) => {
                let name = report_file_name(concept);
                let mut text =
                    serde_json::to_string_pretty(&report).map_err(well_core::Error::from)?;
                text.push('\n');
                write_file(&out.join(&name), &text)?;
                ManifestEntry {
                    file: Some(name),
                    error: None,
                }
            }
            Err(e) => {
                eprintln!("concept {concept}: {e}");
                failed += 1;
                ManifestEntry {
                    file: None,
                    error: Some(e),
                }
            }
        };
        manifest.concepts.insert(concept.clone(), entry);
    }
    let mut text = serde_json::to_string_pretty(&manifest).map_err(well_core::Error::from)?;
    text.push('\n');
    write_file(&out.join("manifest.json"), &text)?;
    if failed > 0 {
        return Err(CliError::Partial(format!(
            "{failed} of {} concepts failed to train",
            concepts.len()
        )));
    }
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    let (cfg, pool) = setup(&args.common)?;
    let dataset = required(&args.dataset, &cfg.paths.dataset, "dataset")?;
    let models = required(&args.models, &cfg.paths.models, "models")?;
    let concept_file = args.concepts.clone().or(cfg.paths.concepts.clone());
    let test = load_data(&dataset, concept_file.as_deref())?;
    if !test.has_gold() {
        return Err(CliError::Core(well_core::Error::InvalidArgument(
            "evaluation dataset is missing gold labels".into(),
        )));
    }
    let manifest_path = models.join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).map_err(|e| io_error(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(well_core::Error::from)?;
    let jobs: Vec<(&String, &String)> = manifest
        .concepts
        .iter()
        .filter_map(|(c, e)| e.file.as_ref().map(|f| (c, f)))
        .collect();
    let rows: Vec<ConceptMetrics> = pool.install(|| {
        jobs.par_iter()
            .map(|(concept, file)| {
                let path = models.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| io_error(&path, e))?;
                let report: TrainReport =
                    serde_json::from_str(&text).map_err(well_core::Error::from)?;
                Ok(rank_and_score(&report.model, &test, concept)?.metrics())
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    for row in rows.iter().filter(|r| r.total_relevant == 0) {
        log::warn!("no relevant test items for {}; omitted", row.concept);
    }
    match args.out.or(cfg.paths.out) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            write_metrics_csv(&path, &rows)?;
        }
        None => print!("{}", metrics_csv(&rows)?),
    }
    let skipped = manifest.concepts.len() - jobs.len();
    if skipped > 0 {
        return Err(CliError::Partial(format!(
            "{skipped} concepts have no trained model"
        )));
    }
    Ok(())
}

pub fn sweep(args: SweepArgs, axis: SweepAxis) -> CmdResult {
    let (mut cfg, pool) = setup(&args.common)?;
    let out = required(&args.out, &cfg.paths.out, "out")?;
    if let Some(r) = args.regularizer {
        cfg.regularizer.kind = regularizer_of(r);
    }
    let values = match (args.values, axis) {
        (Some(v), _) => v,
        (None, SweepAxis::Precision) => cfg.sweep.precisions.clone(),
        (None, SweepAxis::Size) => cfg.sweep.sizes.iter().map(|&s| s as f64).collect(),
    };
    let methods = args
        .methods
        .map(|m| m.into_iter().map(mode_of).collect())
        .unwrap_or_else(|| cfg.sweep.methods.clone());
    let offset = args.common.seed.unwrap_or(0);
    let seeds: Vec<u64> = args
        .seeds
        .unwrap_or_else(|| cfg.sweep.seeds.clone())
        .into_iter()
        .map(|s| s.wrapping_add(offset))
        .collect();
    let spec = SweepSpec {
        axis,
        values,
        methods,
        seeds,
        base: cfg.synth.clone(),
        train: cfg.train_config(),
    };
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let cells = out.join("cells");
    let result = pool.install(|| run_sweep(&spec, Some(&cells)))?;
    write_file(&out.join("sweep.csv"), &result.to_csv())?;
    write_file(&out.join("plot.tsv"), &result.to_tsv())?;
    print!("{}", result.to_tsv());
    let failed: Vec<_> = result.failures().collect();
    for cell in &failed {
        eprintln!(
            "{} at {} seed {}: {}",
            cell.method.name(),
            cell.axis_value,
            cell.seed,
            cell.error.as_deref().unwrap_or("")
        );
    }
    if !failed.is_empty() {
        return Err(CliError::Partial(format!(
            "{} sweep cells failed",
            failed.len()
        )));
    }
    Ok(())
}

pub fn synth(args: SynthArgs) -> CmdResult {
    let (mut cfg, pool) = setup(&args.common)?;
    let out = required(&args.out, &cfg.paths.out, "out")?;
    if args.common.seed.is_some() {
        cfg.synth.seed = cfg.seed;
    }
    if let Some(p) = args.precision {
        cfg.synth.curriculum_precision = p;
    }
    cfg.synth
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let data = pool.install(|| generate(&cfg.synth))?;
    std::fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
    data.train.save(&out.join("train.jsonl"))?;
    data.test.save(&out.join("test.jsonl"))?;
    if let Some(v) = &data.validation {
        v.save(&out.join("validation.jsonl"))?;
    }
    save_concepts(&out.join("concepts.json"), data.train.concepts())?;
    data.curriculum.save(&out.join("curriculum.jsonl"))?;
    Ok(())
}

pub fn config_schema(out: Option<PathBuf>) -> CmdResult {
    let text = schema();
    match out {
        Some(path) => write_file(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
