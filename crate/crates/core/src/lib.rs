//! Binned identity testing of categorical generative models.
//!
//! A known "stair" reference p lives on a product space far too large for
//! classical identity testing at practical sample sizes. Models are judged by
//! binning Ω inside p's flat regions, choosing at each granularity k the
//! binning that exposes the largest binned TV to the model's empirical pmf,
//! and running a closeness test with p's binned statistics known exactly.
//! A model's score is the highest k it passes.
//!
//! - [`space`]: Ω, element encoding, sparse samples
//! - [`stair`]: the reference distribution
//! - [`binning`]: induced distributions, reference error, optimal and random binnings
//! - [`closeness`]: the test statistic, bootstrap decision and granularity sweep
//! - [`synthetic`]: perturbed references at exact TV distance
//! - [`harness`]: experiments, sample files, reports

pub mod binning;
pub mod closeness;
pub mod distance;
pub mod error;
pub mod harness;
pub mod piecewise;
pub mod rng;
pub mod space;
pub mod stair;
pub mod synthetic;

pub use binning::{
    binning_error_to_reference, optimize_binning, random_binning, BinnedPair, Binning,
    RegionSplit, SplitMode,
};
pub use closeness::{
    closeness_test, highest_granularity, l2_statistic, GranularityResult, TestConfig,
    TestDistance, TestOutcome,
};
pub use distance::{l2_squared_sparse, tv_distance_sparse};
pub use error::{Error, Result};
pub use space::{CategoricalSpace, ElementIndex, SparsePmf, SparseSampleSet};
pub use stair::{build_stair, StairDistribution, StairSpec};
pub use synthetic::{perturb, PerturbMode, PerturbSpec, PerturbedDistribution, SuiteSpec};
