use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::closeness::TestConfig;
use crate::error::{Error, Result};
use crate::harness::samples::check_header;
use crate::stair::StairSpec;
use crate::synthetic::SuiteSpec;

/// How the random baseline of the ranking experiment draws its bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomBaseline {
    /// k − s random regions cut by a fair coin per sampled element.
    #[default]
    RegionCoin,
    /// Every element hashed into one of k bins, ignoring the regions.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub stair: StairSpec,
    pub suite: SuiteSpec,
    /// When non-empty, models are these files instead of the synthetic suite.
    pub sample_files: Vec<PathBuf>,
    /// Samples per model per trial.
    pub m: usize,
    pub trials: usize,
    /// Defaults to s.
    pub k_min: Option<usize>,
    /// Defaults to 2s.
    pub k_max: Option<usize>,
    pub test: TestConfig,
    pub seed: u64,
    pub random_baseline: RandomBaseline,
    pub ci_level: f64,
    pub ci_resamples: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            stair: StairSpec::default(),
            suite: SuiteSpec::default(),
            sample_files: Vec::new(),
            m: 1000,
            trials: 50,
            k_min: None,
            k_max: None,
            test: TestConfig::default(),
            seed: 0,
            random_baseline: RandomBaseline::default(),
            ci_level: 0.9,
            ci_resamples: 2000,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::input(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::SampleFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text)
    }

    pub fn k_range(&self) -> (usize, usize) {
        let s = self.stair.s;
        (self.k_min.unwrap_or(s), self.k_max.unwrap_or(2 * s))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::input("trials must be at least 1"));
        }
        if self.m < 2 {
            return Err(Error::input(format!("m = {} is below 2", self.m)));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::input(format!("ci_level = {} is outside (0, 1)", self.ci_level)));
        }
        if self.ci_resamples == 0 {
            return Err(Error::input("ci_resamples must be positive"));
        }
        self.test.validate()?;
        let s = self.stair.s;
        let (lo, hi) = self.k_range();
        if lo < s || hi > 2 * s || lo > hi {
            return Err(Error::input(format!(
                "k range [{lo}, {hi}] is not inside [s, 2s] = [{s}, {}]",
                2 * s
            )));
        }
        let space = self.stair.space()?;
        for path in &self.sample_files {
            check_header(path, space)?;
        }
        Ok(())
    }

    /// Copy with every default filled in, as embedded in reports.
    pub fn resolved(&self) -> Self {
        let (lo, hi) = self.k_range();
        Self {
            stair: self.stair.resolved(),
            k_min: Some(lo),
            k_max: Some(hi),
            ..self.clone()
        }
    }
}
