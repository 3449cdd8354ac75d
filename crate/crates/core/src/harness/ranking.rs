//! Ranking validation: do binned TVs order the synthetic suite the same way
//! the true TVs do? Optimized binnings are compared against a random baseline
//! by Kendall tau-b, per granularity level, over repeated trials.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::binning::{optimize_binning, random_binning, unconstrained_random_pair, BinnedPair};
use crate::closeness::quantile_sorted;
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, RandomBaseline};
use crate::harness::kendall::tau_b;
use crate::rng::{derive_seed, rng_from_seed};
use crate::space::SparsePmf;
use crate::stair::StairDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningMethod {
    Optimized,
    Random,
}

impl BinningMethod {
    pub const ALL: [BinningMethod; 2] = [BinningMethod::Optimized, BinningMethod::Random];

    pub fn name(self) -> &'static str {
        match self {
            BinningMethod::Optimized => "optimized",
            BinningMethod::Random => "random",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInfo {
    pub label: String,
    pub true_tv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRanking {
    pub trial: usize,
    pub k: usize,
    pub method: BinningMethod,
    /// Binned empirical TV per model, in suite order.
    pub binned_tv: Vec<f64>,
    /// Labels by ascending binned TV, ties in suite order.
    pub ranking: Vec<String>,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauSummary {
    pub k: usize,
    pub method: BinningMethod,
    pub mean_tau: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub config: ExperimentConfig,
    pub models: Vec<ModelInfo>,
    pub summary: Vec<TauSummary>,
    pub trials: Vec<TrialRanking>,
}

impl RankingReport {
    pub fn summary_for(&self, k: usize, method: BinningMethod) -> Option<&TauSummary> {
        self.summary.iter().find(|s| s.k == k && s.method == method)
    }

    pub fn summary_csv(&self) -> String {
        let mut out = String::from("k,method,mean_tau,ci_low,ci_high\n");
        for s in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.k,
                s.method.name(),
                s.mean_tau,
                s.ci_low,
                s.ci_high
            );
        }
        out
    }
}

fn sample_seed(master: u64, trial: usize, model: usize) -> u64 {
    derive_seed(master, &[1, trial as u64, model as u64])
}

fn baseline_seed(master: u64, trial: usize, k: usize, model: usize) -> u64 {
    derive_seed(master, &[2, trial as u64, k as u64, model as u64])
}

fn ci_seed(master: u64, k: usize, method: BinningMethod) -> u64 {
    derive_seed(master, &[3, k as u64, method as u64])
}

fn rank_labels(labels: &[String], scores: &[f64]) -> Vec<String> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order.into_iter().map(|i| labels[i].clone()).collect()
}

fn baseline_tv(
    config: &ExperimentConfig,
    p: &StairDistribution,
    q: &SparsePmf,
    k: usize,
    seed: u64,
) -> Result<f64> {
    Ok(match config.random_baseline {
        RandomBaseline::RegionCoin => BinnedPair::new(&random_binning(p, q, k, seed)?, p, q).tv(),
        RandomBaseline::Unconstrained => unconstrained_random_pair(p, q, k, seed)?.tv(),
    })
}

/// Mean and percentile-bootstrap CI of the mean.
pub fn bootstrap_mean_ci(values: &[f64], level: f64, resamples: usize, seed: u64) -> (f64, f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = rng_from_seed(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (mean, quantile_sorted(&means, tail), quantile_sorted(&means, 1.0 - tail))
}

pub fn run_ranking_validation(config: &ExperimentConfig) -> Result<RankingReport> {
    config.validate()?;
    if !config.sample_files.is_empty() {
        return Err(Error::input(
            "ranking validation needs the synthetic suite; sample files have no known TV",
        ));
    }
    let p = config.stair.build()?;
    let suite = config.suite.build(&p)?;
    if suite.len() < 2 {
        return Err(Error::input("ranking needs at least two models"));
    }
    let labels: Vec<String> = suite.iter().map(|(l, _)| l.clone()).collect();
    let true_tv: Vec<f64> = suite.iter().map(|(_, q)| q.exact_tv()).collect();
    let (k_min, k_max) = config.k_range();

    let per_trial: Vec<Vec<TrialRanking>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<TrialRanking>> {
            let q_hats = suite
                .iter()
                .enumerate()
                .map(|(i, (_, q))| q.sample(config.m, sample_seed(config.seed, trial, i))?.empirical_pmf())
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            for k in k_min..=k_max {
                for method in BinningMethod::ALL {
                    let binned_tv = q_hats
                        .iter()
                        .enumerate()
                        .map(|(i, q)| match method {
                            BinningMethod::Optimized => {
                                Ok(BinnedPair::new(&optimize_binning(&p, q, k)?, &p, q).tv())
                            }
                            BinningMethod::Random => {
                                baseline_tv(config, &p, q, k, baseline_seed(config.seed, trial, k, i))
                            }
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    rows.push(TrialRanking {
                        trial,
                        k,
                        method,
                        ranking: rank_labels(&labels, &binned_tv),
                        tau: tau_b(&true_tv, &binned_tv)?,
                        binned_tv,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let trials: Vec<TrialRanking> = per_trial.into_iter().flatten().collect();

    let mut summary = Vec::new();
    for k in k_min..=k_max {
        for method in BinningMethod::ALL {
            let taus: Vec<f64> = trials
                .iter()
                .filter(|r| r.k == k && r.method == method)
                .map(|r| r.tau)
                .collect();
            let (mean_tau, ci_low, ci_high) = bootstrap_mean_ci(
                &taus,
                config.ci_level,
                config.ci_resamples,
                ci_seed(config.seed, k, method),
            );
            summary.push(TauSummary { k, method, mean_tau, ci_low, ci_high });
        }
    }

    Ok(RankingReport {
        config: config.resolved(),
        models: labels
            .into_iter()
            .zip(true_tv)
            .map(|(label, true_tv)| ModelInfo { label, true_tv })
            .collect(),
        summary,
        trials,
    })
}
