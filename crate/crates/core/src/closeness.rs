//! Closeness test against a known binned reference, and the granularity sweep.
//!
//! The statistic is the collision-based unbiased estimate of Σ_A (p_A − q_A)²:
//!
//! ```text
//! Ẑ = Σ p_A² − 2 Σ p_A c_A/m + Σ c_A (c_A − 1) / (m (m − 1))
//! ```
//!
//! Since p is known exactly, only the cross and collision terms are random.
//! The decision uses a one-sided percentile-bootstrap lower confidence bound:
//! counts are resampled from the empirical binned pmf, Ẑ is recomputed per
//! replicate, and the null is rejected when the δ-quantile clears the threshold.

use std::ops::RangeInclusive;

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{binned_tv, optimize_binning};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, StreamRng};
use crate::space::{SparseSampleSet, MASS_TOLERANCE};
use crate::stair::StairDistribution;

/// Which distance the threshold applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestDistance {
    /// ε bounds the ℓ² norm ‖p − q‖₂; the squared-scale bound is compared to ε².
    #[default]
    L2Norm,
    /// ε bounds the squared norm Σ (p_A − q_A)² directly.
    L2Squared,
    /// Plug-in binned TV with ε on the TV scale.
    Tv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestConfig {
    pub epsilon_test: f64,
    pub delta: f64,
    pub bootstrap_reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub distance: TestDistance,
    /// Use δ/(s+1) per granularity level.
    #[serde(default)]
    pub bonferroni: bool,
    /// Select bins on one half of the samples and test on the other.
    #[serde(default)]
    pub split_samples: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            epsilon_test: 0.1,
            delta: 0.05,
            bootstrap_reps: 1000,
            seed: 0,
            distance: TestDistance::L2Norm,
            bonferroni: false,
            split_samples: false,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input(format!("delta = {} is outside (0, 1)", self.delta)));
        }
        if !(self.epsilon_test >= 0.0 && self.epsilon_test.is_finite()) {
            return Err(Error::input(format!(
                "epsilon_test = {} must be a nonnegative number",
                self.epsilon_test
            )));
        }
        if self.bootstrap_reps == 0 {
            return Err(Error::input("bootstrap_reps must be positive"));
        }
        Ok(())
    }

    /// Value the lower confidence bound must exceed to reject.
    pub fn threshold(&self) -> f64 {
        match self.distance {
            TestDistance::L2Norm => self.epsilon_test * self.epsilon_test,
            TestDistance::L2Squared | TestDistance::Tv => self.epsilon_test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub k: usize,
    pub distance: TestDistance,
    pub statistic: f64,
    pub lower_bound: f64,
    pub threshold: f64,
    pub reject: bool,
}

fn check_inputs(p_binned: &[f64], counts: &[u64], m: u64) -> Result<()> {
    if m < 2 {
        return Err(Error::input(format!("collision statistic needs m >= 2, got {m}")));
    }
    if p_binned.len() != counts.len() {
        return Err(Error::input(format!(
            "{} reference bins but {} count bins",
            p_binned.len(),
            counts.len()
        )));
    }
    let total: u64 = counts.iter().sum();
    if total != m {
        return Err(Error::input(format!("bin counts sum to {total}, expected m = {m}")));
    }
    let mass: f64 = p_binned.iter().sum();
    if (mass - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::input(format!("binned reference sums to {mass}, not 1")));
    }
    Ok(())
}

fn collision_statistic(p_binned: &[f64], counts: &[u64], m: u64) -> f64 {
    let mf = m as f64;
    let mut self_term = 0.0;
    let mut cross = 0.0;
    let mut collisions = 0.0;
    for (&p, &c) in p_binned.iter().zip(counts) {
        let c = c as f64;
        self_term += p * p;
        cross += p * c / mf;
        collisions += c * (c - 1.0);
    }
    self_term - 2.0 * cross + collisions / (mf * (mf - 1.0))
}

fn plug_in_tv(p_binned: &[f64], counts: &[u64], m: u64) -> f64 {
    let q: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();
    binned_tv(p_binned, &q)
}

/// Unbiased estimate of Σ_A (p_A − q_A)² from bin counts.
pub fn l2_statistic(p_binned: &[f64], counts: &[u64], m: u64) -> Result<f64> {
    check_inputs(p_binned, counts, m)?;
    Ok(collision_statistic(p_binned, counts, m))
}

fn statistic_for(distance: TestDistance, p_binned: &[f64], counts: &[u64], m: u64) -> f64 {
    match distance {
        TestDistance::L2Norm | TestDistance::L2Squared => collision_statistic(p_binned, counts, m),
        TestDistance::Tv => plug_in_tv(p_binned, counts, m),
    }
}

/// Multinomial(m, probs) by sequential conditional binomials.
pub fn multinomial(m: u64, probs: &[f64], rng: &mut StreamRng) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut left_n = m;
    let mut left_p = 1.0f64;
    for (i, &pi) in probs.iter().enumerate() {
        if left_n == 0 {
            break;
        }
        if i + 1 == probs.len() {
            out[i] = left_n;
            break;
        }
        let ratio = if left_p > 0.0 { (pi / left_p).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left_n, ratio)
            .expect("ratio is clamped to [0, 1]")
            .sample(rng);
        out[i] = draw;
        left_n -= draw;
        left_p -= pi;
    }
    out
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Runs the bootstrap test for one binned pair.
pub fn closeness_test(
    p_binned: &[f64],
    counts: &[u64],
    m: u64,
    config: &TestConfig,
) -> Result<TestOutcome> {
    config.validate()?;
    check_inputs(p_binned, counts, m)?;
    let statistic = statistic_for(config.distance, p_binned, counts, m);
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / m as f64).collect();

    let mut replicates: Vec<f64> = (0..config.bootstrap_reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(config.seed, &[r as u64]));
            let resampled = multinomial(m, &empirical, &mut rng);
            statistic_for(config.distance, p_binned, &resampled, m)
        })
        .collect();
    replicates.sort_by(f64::total_cmp);
    let lower_bound = quantile_sorted(&replicates, config.delta);
    let threshold = config.threshold();

    Ok(TestOutcome {
        k: p_binned.len(),
        distance: config.distance,
        statistic,
        lower_bound,
        threshold,
        reject: lower_bound > threshold,
    })
}

/// Seed used for the test at granularity `k` inside a sweep.
pub fn granularity_seed(master: u64, k: usize) -> u64 {
    derive_seed(master, &[0x6b, k as u64])
}

fn holdout_seed(master: u64) -> u64 {
    derive_seed(master, &[0x73, 0x70])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranularityResult {
    pub label: String,
    pub k_min: usize,
    pub k_max: usize,
    pub outcomes: Vec<TestOutcome>,
    /// First rejecting k; `None` when every level passes.
    pub failed_at: Option<usize>,
    /// `failed_at − 1`, or `k_max` without a rejection.
    pub highest_passed: usize,
}

/// Granularity sweep over k = s..=2s.
pub fn highest_granularity(
    p: &StairDistribution,
    samples: &SparseSampleSet,
    config: &TestConfig,
) -> Result<GranularityResult> {
    highest_granularity_over(p, samples, config, p.s()..=2 * p.s(), "q")
}

/// Granularity sweep over an explicit k range, stopping at the first rejection.
pub fn highest_granularity_over(
    p: &StairDistribution,
    samples: &SparseSampleSet,
    config: &TestConfig,
    ks: RangeInclusive<usize>,
    label: &str,
) -> Result<GranularityResult> {
    config.validate()?;
    let (k_min, k_max) = (*ks.start(), *ks.end());
    if k_min < p.s() || k_max > 2 * p.s() || k_min > k_max {
        return Err(Error::input(format!(
            "k range [{k_min}, {k_max}] is not inside [s, 2s] = [{}, {}]",
            p.s(),
            2 * p.s()
        )));
    }

    let (select, test) = if config.split_samples {
        samples.split_half(holdout_seed(config.seed))
    } else {
        (samples.clone(), samples.clone())
    };
    let q_hat = select.empirical_pmf()?;
    let mut level_config = config.clone();
    if config.bonferroni {
        level_config.delta = config.delta / (p.s() + 1) as f64;
    }

    let mut outcomes = Vec::new();
    let mut failed_at = None;
    for k in ks {
        let binning = optimize_binning(p, &q_hat, k)?;
        let p_binned = binning.induce_reference(p);
        let counts = binning.bin_counts(&test);
        level_config.seed = granularity_seed(config.seed, k);
        let outcome = closeness_test(&p_binned, &counts, test.m(), &level_config)?;
        let reject = outcome.reject;
        outcomes.push(outcome);
        if reject {
            failed_at = Some(k);
            break;
        }
    }
    Ok(GranularityResult {
        label: label.to_string(),
        k_min,
        k_max,
        outcomes,
        failed_at,
        highest_passed: failed_at.map_or(k_max, |k| k - 1),
    })
}
