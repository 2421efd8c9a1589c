//! The full flow: standardize, six selectors, pool, swarm search, voting
//! ensemble, evaluation.

mod config;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::PipelineConfig;

use crate::dataset::{apply_standardizer, fit_standardizer, make_folds, split_indices, Dataset, SplitSpec, StandardizationParams};
use crate::error::{Error, Result, StageContext};
use crate::evaluation::{
    cross_validate, repeated_runs, score_predictions, FoldModel, MemberMetrics, MetricSet, Predictions, RunRecord,
    RunReport,
};
use crate::filters::run_filters;
use crate::learners::{train_ensemble, Classifier, VotingEnsemble};
use crate::pool::{build_pool, CandidatePool};
use crate::pso::{optimize, MemoFitness, PsoConfig, SubsetFitness};
use crate::rfe::{rfe_select, RfeConfig};
use crate::scalar::Scalar;
use crate::seed::{self, stream};

pub const MEMBER_NAMES: [&str; 3] = ["GBT", "RF", "LR"];

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub standardize: f64,
    pub filters: f64,
    pub rfe: f64,
    pub pool: f64,
    pub pso: f64,
    pub ensemble: f64,
    pub evaluate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsoSummary {
    pub best_fitness: f64,
    pub history: Vec<f64>,
    pub iterations: usize,
    pub distinct_evaluations: usize,
}

/// Output of the selection stages on one training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    /// Per-method selection counts in pool method order.
    pub method_counts: Vec<usize>,
    pub pool: CandidatePool,
    pub pso: Option<PsoSummary>,
    /// Original feature ids, ascending.
    pub selected: Vec<usize>,
    #[serde(skip)]
    pub times: StageTimes,
}

fn timed<T>(slot: &mut f64, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    *slot = start.elapsed().as_secs_f64();
    out
}

/// Runs stage one and the swarm search on `train` only.
pub fn select_features<F: Scalar>(train: &Dataset<F>, cfg: &PipelineConfig, run_seed: u64) -> Result<Selection> {
    cfg.validate()?;
    let mut times = StageTimes::default();
    let standardized = timed(&mut times.standardize, || {
        apply_standardizer(train, &fit_standardizer(train))
    })
    .stage("standardize")?;
    let report = timed(&mut times.filters, || run_filters(&standardized, train, &cfg.filters)).stage("filters")?;
    let rfe_cfg = RfeConfig {
        target_count: cfg.rfe.target_count.min(train.n_features()),
        seed: seed::derive(run_seed, stream::RFE),
        ..cfg.rfe
    };
    let trace = timed(&mut times.rfe, || rfe_select(&standardized, &rfe_cfg)).stage("rfe")?;
    let pool = timed(&mut times.pool, || build_pool(&report, &trace, &cfg.pool)).stage("pool")?;
    let mut method_counts: Vec<usize> = report
        .methods
        .iter()
        .map(|m| m.mask.iter().filter(|&&b| b).count())
        .collect();
    method_counts.push(trace.top(cfg.pool.rfe_keep).len());

    let (selected, pso) = if cfg.use_pso {
        let summary = timed(&mut times.pso, || {
            let columns = standardized.select_features(&pool.candidate_indices)?;
            let fitness_cfg = crate::pso::FitnessConfig {
                seed: seed::derive(run_seed, stream::FITNESS),
                ..cfg.fitness
            };
            let inner = SubsetFitness::new(&columns, &fitness_cfg, cfg.pso.size_penalty)?
                .with_ensemble_config(cfg.ensemble);
            let memo = MemoFitness::new(&inner);
            let pso_cfg = PsoConfig {
                seed: seed::derive(run_seed, stream::PSO),
                ..cfg.pso
            };
            let result = optimize::<F, _>(pool.len(), &memo, &pso_cfg)?;
            let chosen: Vec<usize> = result
                .selected()
                .into_iter()
                .map(|k| pool.candidate_indices[k])
                .collect();
            if chosen.is_empty() {
                return Err(Error::Empty("the swarm returned an empty feature mask".into()));
            }
            Ok((
                chosen,
                PsoSummary {
                    best_fitness: result.best_fitness.as_f64(),
                    history: result.history.iter().map(|v| v.as_f64()).collect(),
                    iterations: result.iterations,
                    distinct_evaluations: memo.distinct_evaluations(),
                },
            ))
        })
        .stage("pso")?;
        (summary.0, Some(summary.1))
    } else {
        (pool.candidate_indices.clone(), None)
    };
    Ok(Selection {
        method_counts,
        pool,
        pso,
        selected,
        times,
    })
}

/// Standardizer and ensemble fitted on the selected columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FittedPipeline<F: Scalar> {
    pub selected: Vec<usize>,
    pub standardizer: StandardizationParams<F>,
    pub ensemble: VotingEnsemble<F>,
}

impl<F: Scalar> FittedPipeline<F> {
    /// Fits the final standardizer and ensemble on `train` restricted to
    /// `selected`.
    pub fn fit(train: &Dataset<F>, selected: &[usize], cfg: &PipelineConfig, run_seed: u64) -> Result<Self> {
        let columns = train.select_features(selected)?;
        let standardizer = fit_standardizer(&columns);
        let scaled = apply_standardizer(&columns, &standardizer)?;
        let ensemble = train_ensemble(&scaled, &cfg.ensemble, run_seed)?;
        Ok(Self {
            selected: selected.to_vec(),
            standardizer,
            ensemble,
        })
    }

    fn prepare(&self, data: &Dataset<F>) -> Result<Dataset<F>> {
        apply_standardizer(&data.select_features(&self.selected)?, &self.standardizer)
    }

    /// Ensemble votes with averaged member probabilities.
    pub fn predict(&self, data: &Dataset<F>) -> Result<Predictions> {
        let x = self.prepare(data)?;
        predictions_of(&self.ensemble, &x)
    }

    /// Predictions of each member in [GBT, RF, LR] order.
    pub fn member_predictions(&self, data: &Dataset<F>) -> Result<[Predictions; 3]> {
        let x = self.prepare(data)?;
        Ok([
            predictions_of(&self.ensemble.gbt, &x)?,
            predictions_of(&self.ensemble.forest, &x)?,
            predictions_of(&self.ensemble.logistic, &x)?,
        ])
    }
}

fn predictions_of<F: Scalar, M: Classifier<F> + ?Sized>(model: &M, x: &Dataset<F>) -> Result<Predictions> {
    let mut classes = Vec::with_capacity(x.n_samples());
    let mut probabilities = Vec::with_capacity(x.n_samples());
    for row in x.features().rows() {
        let (c, p) = model.predict_row(row)?;
        classes.push(c);
        probabilities.push(p.iter().map(|v| v.as_f64()).collect());
    }
    Ok(Predictions { classes, probabilities })
}

/// One hold-out run: everything fitted on the training split, scored once on
/// the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub seed: u64,
    pub method_counts: Vec<usize>,
    pub pool: CandidatePool,
    pub pso: Option<PsoSummary>,
    pub selected_features: Vec<usize>,
    pub selected_names: Vec<String>,
    pub ensemble: MetricSet,
    pub members: Vec<MemberMetrics>,
    pub vote_weights: [f64; 3],
    pub test_rows: Vec<usize>,
    pub test_truth: Vec<usize>,
    pub test_predictions: Predictions,
    #[serde(skip)]
    pub stage_times: StageTimes,
}

impl PipelineResult {
    pub fn record(&self, run: usize) -> RunRecord {
        RunRecord {
            run,
            seed: self.seed,
            metrics: self.ensemble.clone(),
            members: self.members.clone(),
            pool_size: self.pool.len(),
            selected_features: self.selected_names.clone(),
        }
    }

    pub fn member_accuracy(&self, name: &str) -> Option<f64> {
        self.members.iter().find(|m| m.model == name).map(|m| m.metrics.accuracy)
    }
}

/// Hold-out run with seed `run_seed`. A precomputed `global` selection
/// replaces the per-split selection stages.
pub fn run_pipeline_with<F: Scalar>(
    data: &Dataset<F>,
    cfg: &PipelineConfig,
    run_seed: u64,
    global: Option<&Selection>,
) -> Result<PipelineResult> {
    cfg.validate()?;
    let spec = SplitSpec {
        seed: seed::derive(run_seed, stream::SPLIT),
        ..cfg.split
    };
    let (train_rows, test_rows) = split_indices(data.labels(), data.n_classes(), &spec).stage("split")?;
    let train = data.select_rows(&train_rows)?;
    let test = data.select_rows(&test_rows)?;

    let selection = match global {
        Some(s) => s.clone(),
        None => select_features(&train, cfg, run_seed)?,
    };
    let mut times = selection.times;
    let fitted = timed(&mut times.ensemble, || {
        FittedPipeline::fit(&train, &selection.selected, cfg, run_seed)
    })
    .stage("ensemble")?;

    let start = Instant::now();
    let truth = test.labels();
    let c = data.n_classes();
    let predictions = fitted.predict(&test).stage("evaluate")?;
    let ensemble = score_predictions(truth, &predictions, c, cfg.averaging).stage("evaluate")?;
    let members = fitted
        .member_predictions(&test)
        .and_then(|preds| {
            preds
                .iter()
                .zip(MEMBER_NAMES)
                .map(|(p, name)| {
                    Ok(MemberMetrics {
                        model: name.to_string(),
                        metrics: score_predictions(truth, p, c, cfg.averaging)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .stage("evaluate")?;
    times.evaluate = start.elapsed().as_secs_f64();

    Ok(PipelineResult {
        seed: run_seed,
        method_counts: selection.method_counts,
        selected_names: selection
            .selected
            .iter()
            .map(|&j| data.feature_names()[j].clone())
            .collect(),
        selected_features: selection.selected,
        pool: selection.pool,
        pso: selection.pso,
        ensemble,
        members,
        vote_weights: fitted.ensemble.weights,
        test_rows,
        test_truth: truth.to_vec(),
        test_predictions: predictions,
        stage_times: times,
    })
}

pub fn run_pipeline<F: Scalar>(data: &Dataset<F>, cfg: &PipelineConfig) -> Result<PipelineResult> {
    run_pipeline_with(data, cfg, cfg.seed, None)
}

/// The whole pipeline as a cross-validation model.
pub struct PipelineModel<'a> {
    pub cfg: &'a PipelineConfig,
}

impl<F: Scalar> FoldModel<F> for PipelineModel<'_> {
    fn fit_predict(&self, train: &Dataset<F>, test: &Dataset<F>, seed_value: u64) -> Result<Predictions> {
        let selection = select_features(train, self.cfg, seed_value)?;
        let fitted = FittedPipeline::fit(train, &selection.selected, self.cfg, seed_value).stage("ensemble")?;
        fitted.predict(test).stage("evaluate")
    }
}

/// `cfg.runs` hold-out runs with seeds `cfg.seed + r`, plus k-fold
/// cross-validation when `cfg.folds` is set.
pub fn run_repeated<F: Scalar>(
    data: &Dataset<F>,
    cfg: &PipelineConfig,
    dataset_name: &str,
) -> Result<(RunReport, Vec<PipelineResult>)> {
    cfg.validate()?;
    let global = if cfg.global_selection {
        Some(select_features(data, cfg, cfg.seed)?)
    } else {
        None
    };
    let results = repeated_runs(cfg.runs, cfg.seed, |r, s| {
        log::info!("run {}/{} (seed {s})", r + 1, cfg.runs);
        run_pipeline_with(data, cfg, s, global.as_ref())
    })?;
    let records = results.iter().enumerate().map(|(r, res)| res.record(r)).collect();
    let mut report = RunReport::new(dataset_name, cfg.seed, cfg.fingerprint(), records);
    if let Some(k) = cfg.folds {
        let plan = make_folds(data, k, seed::derive(cfg.seed, stream::FOLDS)).stage("folds")?;
        report.cross_validation = Some(cross_validate(data, &plan, &PipelineModel { cfg }, cfg.seed, cfg.averaging)?);
    }
    Ok((report, results))
}

/// Mean and sample std of each model's test accuracy over repeated runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberComparison {
    pub dataset: String,
    /// `(model, mean accuracy, std)` for GBT, RF, LR and the vote.
    pub rows: Vec<(String, f64, f64)>,
}

impl MemberComparison {
    pub fn from_results(dataset: &str, results: &[PipelineResult]) -> Self {
        let stats = |vals: Vec<f64>| {
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std = if vals.len() < 2 {
                0.0
            } else {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            };
            (mean, std)
        };
        let mut rows = Vec::with_capacity(4);
        for name in MEMBER_NAMES {
            let (m, s) = stats(results.iter().filter_map(|r| r.member_accuracy(name)).collect());
            rows.push((name.to_string(), m, s));
        }
        let (m, s) = stats(results.iter().map(|r| r.ensemble.accuracy).collect());
        rows.push(("Voting".to_string(), m, s));
        Self {
            dataset: dataset.to_string(),
            rows,
        }
    }
}

/// Evaluates the three members and the vote on the same splits and features.
pub fn compare_members<F: Scalar>(data: &Dataset<F>, cfg: &PipelineConfig, dataset_name: &str) -> Result<MemberComparison> {
    let (_, results) = run_repeated(data, cfg, dataset_name)?;
    Ok(MemberComparison::from_results(dataset_name, &results))
}

/// `Model,<dataset...>` table of mean accuracies in percent.
pub fn comparison_csv(tables: &[MemberComparison]) -> String {
    let mut out = String::from("Model");
    for t in tables {
        out.push(',');
        out.push_str(&t.dataset);
    }
    out.push('\n');
    let names: Vec<&str> = MEMBER_NAMES.iter().copied().chain(["Voting"]).collect();
    for (i, name) in names.iter().enumerate() {
        out.push_str(name);
        for t in tables {
            out.push_str(&format!(",{:.2}", t.rows[i].1 * 100.0));
        }
        out.push('\n');
    }
    out
}
