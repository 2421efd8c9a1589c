use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use genefuse::dataset::{load_arff, load_csv, synthesize, write_csv, write_truth, Dataset, LabelColumn, SynthSpec};
use genefuse::evaluation::{roc_points, RunReport};
use genefuse::pipeline::{comparison_csv, run_repeated, MemberComparison, PipelineConfig, PipelineResult};
use genefuse::Error;

use crate::args::{DataArgs, Format, PipelineArgs, RunArgs, ScaleArgs, SynthArgs};
use crate::manifest::{logical_cores, sha256_file, unix_now, Environment, RunManifest, RunTiming};

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Pipeline(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Pipeline(m) => write!(f, "pipeline failed: {m}"),
        }
    }
}

fn pipeline_error(e: Error) -> CliError {
    if e.is_data_error() {
        CliError::Data(e.to_string())
    } else {
        CliError::Pipeline(e.to_string())
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn build_config(args: &PipelineArgs) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    args.apply(&mut cfg);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

pub fn load_dataset(args: &DataArgs) -> Result<Dataset<f64>, CliError> {
    let format = args.format.unwrap_or_else(|| {
        let arff = args
            .data
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("arff"));
        if arff {
            Format::Arff
        } else {
            Format::Csv
        }
    });
    let loaded = match format {
        Format::Arff => load_arff(&args.data),
        Format::Csv => load_csv(&args.data, &args.label.parse::<LabelColumn>().expect("infallible")),
    };
    loaded.map_err(|e| CliError::Data(e.to_string()))
}

fn thread_pool(threads: Option<usize>) -> Result<(rayon::ThreadPool, usize), CliError> {
    let n = threads.unwrap_or_else(logical_cores);
    if n == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    Ok((pool, n))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn roc_csv(results: &[PipelineResult], n_classes: usize) -> String {
    let mut out = String::from("run,class,fpr,tpr\n");
    for (r, res) in results.iter().enumerate() {
        for c in 0..n_classes {
            let positive: Vec<bool> = res.test_truth.iter().map(|&t| t == c).collect();
            if !positive.iter().any(|&b| b) || positive.iter().all(|&b| b) {
                continue;
            }
            let scores: Vec<f64> = res.test_predictions.probabilities.iter().map(|p| p[c]).collect();
            for (fpr, tpr) in roc_points(&positive, &scores) {
                let _ = writeln!(out, "{},{c},{fpr},{tpr}", r + 1);
            }
        }
    }
    out
}

fn history_csv(results: &[PipelineResult]) -> String {
    let mut out = String::from("run,iteration,best_fitness\n");
    for (r, res) in results.iter().enumerate() {
        if let Some(pso) = &res.pso {
            for (t, f) in pso.history.iter().enumerate() {
                let _ = writeln!(out, "{},{t},{f}", r + 1);
            }
        }
    }
    out
}

pub fn run(args: &RunArgs, threads: Option<usize>) -> Result<(), CliError> {
    let cfg = build_config(&args.pipeline)?;
    let (pool, n_threads) = thread_pool(threads)?;
    let started = unix_now();
    let data = load_dataset(&args.data)?;
    let checksum = sha256_file(&args.data.data).map_err(|e| CliError::Data(format!("{}: {e}", args.data.data.display())))?;
    log::info!(
        "{}: {} samples, {} features, {} classes",
        args.data.data.display(),
        data.n_samples(),
        data.n_features(),
        data.n_classes()
    );
    let name = dataset_name(&args.data.data);
    let clock = Instant::now();
    let (report, results) = pool
        .install(|| run_repeated(&data, &cfg, &name))
        .map_err(pipeline_error)?;
    log::info!("finished {} runs in {:.1}s", cfg.runs, clock.elapsed().as_secs_f64());

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    let out = |f: &str| -> PathBuf { args.out.join(f) };
    write_file(&out("report.json"), &report.to_json().map_err(pipeline_error)?)?;
    write_file(&out("report.csv"), &report.to_csv())?;
    write_file(&out("members.csv"), &comparison_csv(&[MemberComparison::from_results(&name, &results)]))?;
    write_file(&out("roc.csv"), &roc_csv(&results, data.n_classes()))?;
    write_file(&out("pso_history.csv"), &history_csv(&results))?;

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command_line: std::env::args().collect(),
        config_fingerprint: report.config_fingerprint.clone(),
        dataset_path: args.data.data.display().to_string(),
        dataset_sha256: checksum,
        seeds: results.iter().map(|r| r.seed).collect(),
        started_unix: started,
        finished_unix: unix_now(),
        environment: Environment::capture(n_threads),
        runs: results
            .iter()
            .enumerate()
            .map(|(i, r)| RunTiming {
                run: i + 1,
                seed: r.seed,
                wall_seconds: total_seconds(r),
                stages: r.stage_times,
            })
            .collect(),
    };
    write_file(
        &out("manifest.json"),
        &serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Pipeline(e.to_string()))?,
    )?;
    print_summary(&report);
    Ok(())
}

fn total_seconds(r: &PipelineResult) -> f64 {
    let t = r.stage_times;
    t.standardize + t.filters + t.rfe + t.pool + t.pso + t.ensemble + t.evaluate
}

fn print_summary(report: &RunReport) {
    let m = &report.mean;
    let s = &report.std;
    println!(
        "accuracy {:.2} ± {:.2}  f1 {:.2} ± {:.2}  ({} runs)",
        m.accuracy * 100.0,
        s.accuracy * 100.0,
        m.f1 * 100.0,
        s.f1 * 100.0,
        report.runs.len()
    );
}

#[derive(Debug, Clone, serde::Serialize)]
struct ScaleRow {
    threads: usize,
    wall_seconds: f64,
    pso_seconds: f64,
    speedup: f64,
    pso_speedup: f64,
    identical_report: bool,
}

pub fn scale(args: &ScaleArgs) -> Result<(), CliError> {
    if args.caps.is_empty() || args.caps.contains(&0) {
        return Err(CliError::Usage("thread caps must be positive".into()));
    }
    let cfg = build_config(&args.pipeline)?;
    let data = load_dataset(&args.data)?;
    let name = dataset_name(&args.data.data);
    let cores = logical_cores();
    let mut rows: Vec<ScaleRow> = Vec::new();
    let mut reference: Option<String> = None;
    for &cap in &args.caps {
        if cap > cores {
            log::warn!("thread cap {cap} exceeds the {cores} available cores");
        }
        let (pool, _) = thread_pool(Some(cap))?;
        let clock = Instant::now();
        let (report, results) = pool.install(|| run_repeated(&data, &cfg, &name)).map_err(pipeline_error)?;
        let wall = clock.elapsed().as_secs_f64();
        let pso: f64 = results.iter().map(|r| r.stage_times.pso).sum();
        let json = report.to_json().map_err(pipeline_error)?;
        let identical = reference.as_ref().is_none_or(|r| *r == json);
        if reference.is_none() {
            std::fs::create_dir_all(&args.out)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", args.out.display())))?;
            write_file(&args.out.join("report.json"), &json)?;
            reference = Some(json);
        }
        let (base_wall, base_pso) = rows.first().map_or((wall, pso), |r| (r.wall_seconds, r.pso_seconds));
        rows.push(ScaleRow {
            threads: cap,
            wall_seconds: wall,
            pso_seconds: pso,
            speedup: base_wall / wall,
            pso_speedup: if pso > 0.0 { base_pso / pso } else { 1.0 },
            identical_report: identical,
        });
    }
    let mut table = String::from("threads,wall_seconds,pso_seconds,speedup,pso_speedup,identical_report\n");
    for r in &rows {
        let _ = writeln!(
            table,
            "{},{:.3},{:.3},{:.3},{:.3},{}",
            r.threads, r.wall_seconds, r.pso_seconds, r.speedup, r.pso_speedup, r.identical_report
        );
    }
    write_file(&args.out.join("scaling.csv"), &table)?;
    let env = Environment::capture(*args.caps.iter().max().expect("non-empty"));
    write_file(
        &args.out.join("environment.json"),
        &serde_json::to_string_pretty(&env).map_err(|e| CliError::Pipeline(e.to_string()))?,
    )?;
    print!("{table}");
    if rows.iter().any(|r| !r.identical_report) {
        return Err(CliError::Pipeline("reports differ across thread caps".into()));
    }
    Ok(())
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let mut spec = SynthSpec::new(args.samples, args.features, args.informative, args.classes, args.seed);
    if let Some(s) = args.separation {
        spec = spec.with_separation(s);
    }
    let (data, truth) = synthesize::<f64>(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let truth_path = truth_path(&args.out);
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    write_csv(&data, &args.out, "class").map_err(|e| CliError::Usage(e.to_string()))?;
    write_truth(&truth_path, &truth).map_err(|e| CliError::Usage(e.to_string()))?;
    println!(
        "wrote {} ({}x{}) and {}",
        args.out.display(),
        data.n_samples(),
        data.n_features(),
        truth_path.display()
    );
    Ok(())
}

pub fn truth_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".truth");
    PathBuf::from(name)
}
