//! Multi-model granularity evaluation: each model's highest passed k over
//! repeated trials, plus its full-space empirical TV to the reference.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::closeness::{highest_granularity_over, GranularityResult};
use crate::distance::tv_distance_sparse;
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::samples::read_samples;
use crate::rng::derive_seed;
use crate::space::{ElementIndex, SparseSampleSet};
use crate::stair::StairDistribution;
use crate::synthetic::PerturbedDistribution;

/// Where a model's samples come from.
#[derive(Debug, Clone)]
pub enum ModelSource {
    Synthetic { label: String, model: PerturbedDistribution },
    /// Samples already read from a file; trial t uses block `[t·m, (t+1)·m)`.
    File { label: String, path: PathBuf, samples: Vec<ElementIndex> },
}

impl ModelSource {
    pub fn label(&self) -> &str {
        match self {
            ModelSource::Synthetic { label, .. } | ModelSource::File { label, .. } => label,
        }
    }

    pub fn true_tv(&self) -> Option<f64> {
        match self {
            ModelSource::Synthetic { model, .. } => Some(model.exact_tv()),
            ModelSource::File { .. } => None,
        }
    }

    fn trial_samples(
        &self,
        p: &StairDistribution,
        m: usize,
        trial: usize,
        seed: u64,
    ) -> Result<SparseSampleSet> {
        match self {
            ModelSource::Synthetic { model, .. } => model.sample(m, seed),
            ModelSource::File { samples, .. } => {
                SparseSampleSet::from_indices(p.space(), samples[trial * m..(trial + 1) * m].iter().copied())
            }
        }
    }
}

/// Synthetic suite, or the configured files (which must hold trials·m samples each).
pub fn model_sources(config: &ExperimentConfig, p: &StairDistribution) -> Result<Vec<ModelSource>> {
    if config.sample_files.is_empty() {
        return Ok(config
            .suite
            .build(p)?
            .into_iter()
            .map(|(label, model)| ModelSource::Synthetic { label, model })
            .collect());
    }
    let required = config.trials * config.m;
    config
        .sample_files
        .iter()
        .map(|path| {
            let samples = read_samples(path, p.space())?;
            if samples.len() < required {
                return Err(Error::InsufficientSamples {
                    path: path.clone(),
                    required,
                    available: samples.len(),
                });
            }
            let label = path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
            Ok(ModelSource::File { label, path: path.clone(), samples })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelTrial {
    pub trial: usize,
    pub empirical_tv: f64,
    pub result: GranularityResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSummary {
    pub label: String,
    pub source: Option<PathBuf>,
    pub true_tv: Option<f64>,
    /// highest_passed → number of trials.
    pub histogram: BTreeMap<usize, usize>,
    pub mean_highest_passed: f64,
    /// Fraction of trials passing every k.
    pub pass_all_fraction: f64,
    pub mean_empirical_tv: f64,
    pub trials: Vec<ModelTrial>,
}

impl ModelSummary {
    pub fn failed_at(&self) -> Vec<Option<usize>> {
        self.trials.iter().map(|t| t.result.failed_at).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityReport {
    pub config: ExperimentConfig,
    pub models: Vec<ModelSummary>,
    /// Labels by descending mean highest_passed, then ascending mean empirical TV.
    pub ranking: Vec<String>,
}

impl GranularityReport {
    pub fn model(&self, label: &str) -> Option<&ModelSummary> {
        self.models.iter().find(|m| m.label == label)
    }

    pub fn summary_csv(&self) -> String {
        let mut out =
            String::from("label,true_tv,mean_highest_passed,pass_all_fraction,mean_empirical_tv\n");
        for m in &self.models {
            let tv = m.true_tv.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.label, tv, m.mean_highest_passed, m.pass_all_fraction, m.mean_empirical_tv
            );
        }
        out
    }
}

fn model_seed(master: u64, trial: usize, model: usize) -> u64 {
    derive_seed(master, &[4, trial as u64, model as u64])
}

fn test_seed(master: u64, trial: usize, model: usize) -> u64 {
    derive_seed(master, &[5, trial as u64, model as u64])
}

pub fn run_granularity_eval(config: &ExperimentConfig) -> Result<GranularityReport> {
    config.validate()?;
    let p = config.stair.build()?;
    let sources = model_sources(config, &p)?;
    let (k_min, k_max) = config.k_range();

    let grid: Vec<(usize, usize)> = (0..sources.len())
        .flat_map(|i| (0..config.trials).map(move |t| (i, t)))
        .collect();
    let runs: Vec<ModelTrial> = grid
        .par_iter()
        .map(|&(i, trial)| -> Result<ModelTrial> {
            let source = &sources[i];
            let samples = source.trial_samples(&p, config.m, trial, model_seed(config.seed, trial, i))?;
            let empirical_tv = tv_distance_sparse(&p, &samples.empirical_pmf()?)?;
            let mut test = config.test.clone();
            test.seed = test_seed(config.seed, trial, i);
            let result = highest_granularity_over(&p, &samples, &test, k_min..=k_max, source.label())?;
            Ok(ModelTrial { trial, empirical_tv, result })
        })
        .collect::<Result<_>>()?;

    let mut runs = runs.into_iter();
    let models: Vec<ModelSummary> = sources
        .iter()
        .map(|source| {
            let trials: Vec<ModelTrial> = runs.by_ref().take(config.trials).collect();
            let n = trials.len() as f64;
            let mut histogram = BTreeMap::new();
            for t in &trials {
                *histogram.entry(t.result.highest_passed).or_insert(0) += 1;
            }
            ModelSummary {
                label: source.label().to_string(),
                source: match source {
                    ModelSource::File { path, .. } => Some(path.clone()),
                    ModelSource::Synthetic { .. } => None,
                },
                true_tv: source.true_tv(),
                histogram,
                mean_highest_passed: trials.iter().map(|t| t.result.highest_passed as f64).sum::<f64>() / n,
                pass_all_fraction: trials.iter().filter(|t| t.result.failed_at.is_none()).count() as f64 / n,
                mean_empirical_tv: trials.iter().map(|t| t.empirical_tv).sum::<f64>() / n,
                trials,
            }
        })
        .collect();

    let mut order: Vec<&ModelSummary> = models.iter().collect();
    order.sort_by(|a, b| {
        b.mean_highest_passed
            .total_cmp(&a.mean_highest_passed)
            .then(a.mean_empirical_tv.total_cmp(&b.mean_empirical_tv))
    });
    let ranking = order.into_iter().map(|m| m.label.clone()).collect();

    Ok(GranularityReport {
        config: config.resolved(),
        models,
        ranking,
    })
}
