//! Piecewise-constant pmfs over contiguous index blocks.
//!
//! Both the stair reference and the synthetic perturbations of it are
//! constant on a handful of contiguous index ranges, so storage, lookup,
//! sampling and closed-form distances are all O(#blocks) rather than O(|Ω|).

use std::ops::Range;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::space::{CategoricalSpace, ElementIndex, SparseSampleSet, MASS_TOLERANCE};

/// `[start, end)` with one shared per-element probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub start: u64,
    pub end: u64,
    pub prob: f64,
}

impl Block {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn mass(&self) -> f64 {
        self.len() as f64 * self.prob
    }

    pub fn range(&self) -> Range<u64> {
        self.start..self.end
    }

    pub fn contains(&self, x: ElementIndex) -> bool {
        self.range().contains(&x.get())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewisePmf {
    space: CategoricalSpace,
    blocks: Vec<Block>,
}

impl PiecewisePmf {
    /// Blocks must be non-empty, contiguous from 0, cover Ω, and carry total mass 1.
    pub fn new(space: CategoricalSpace, blocks: Vec<Block>) -> Result<Self> {
        let mut cursor = 0u64;
        let mut total = 0.0;
        for (i, b) in blocks.iter().enumerate() {
            if b.start != cursor || b.end <= b.start {
                return Err(Error::construction(format!(
                    "block {i} [{}, {}) does not continue the cover at {cursor}",
                    b.start, b.end
                )));
            }
            if !(b.prob >= 0.0 && b.prob.is_finite()) {
                return Err(Error::construction(format!(
                    "block {i} has invalid probability {}",
                    b.prob
                )));
            }
            cursor = b.end;
            total += b.mass();
        }
        if cursor != space.size() {
            return Err(Error::construction(format!(
                "blocks cover [0, {cursor}) but the space has {} elements",
                space.size()
            )));
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::construction(format!("block masses sum to {total}, not 1")));
        }
        Ok(Self { space, blocks })
    }

    pub fn space(&self) -> CategoricalSpace {
        self.space
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn total_mass(&self) -> f64 {
        self.blocks.iter().map(Block::mass).sum()
    }

    /// Position of the block holding `x`, by binary search over block ends.
    pub fn block_of(&self, x: ElementIndex) -> Option<usize> {
        if !self.space.contains(x) {
            return None;
        }
        Some(self.blocks.partition_point(|b| b.end <= x.get()))
    }

    pub fn pmf(&self, x: ElementIndex) -> Result<f64> {
        self.block_of(x)
            .map(|i| self.blocks[i].prob)
            .ok_or_else(|| Error::input(format!("index {x} is outside the space")))
    }

    /// Draws `m` indices: a block by mass, then a uniform element inside it.
    pub fn sample_indices(&self, m: usize, seed: u64) -> Result<Vec<ElementIndex>> {
        let weights: Vec<f64> = self.blocks.iter().map(Block::mass).collect();
        let chooser = WeightedIndex::new(&weights)
            .map_err(|e| Error::construction(format!("cannot sample blocks: {e}")))?;
        let mut rng = rng_from_seed(seed);
        Ok((0..m)
            .map(|_| {
                let b = &self.blocks[chooser.sample(&mut rng)];
                ElementIndex(rng.random_range(b.range()))
            })
            .collect())
    }

    pub fn sample(&self, m: usize, seed: u64) -> Result<SparseSampleSet> {
        if m == 0 {
            return Err(Error::input("sample size must be at least 1"));
        }
        SparseSampleSet::from_indices(self.space, self.sample_indices(m, seed)?)
    }

    /// Exact TV distance to another piecewise pmf on the same space.
    pub fn tv_distance(&self, other: &PiecewisePmf) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::input("pmfs live on different spaces"));
        }
        let (mut i, mut j) = (0, 0);
        let mut cursor = 0u64;
        let mut sum = 0.0;
        while i < self.blocks.len() && j < other.blocks.len() {
            let (a, b) = (&self.blocks[i], &other.blocks[j]);
            let end = a.end.min(b.end);
            sum += (end - cursor) as f64 * (a.prob - b.prob).abs();
            cursor = end;
            if a.end == end {
                i += 1;
            }
            if b.end == end {
                j += 1;
            }
        }
        Ok(0.5 * sum)
    }

    /// Dense expansion; only sensible on enumerable spaces.
    pub fn to_dense(&self) -> Vec<f64> {
        self.blocks
            .iter()
            .flat_map(|b| std::iter::repeat_n(b.prob, b.len() as usize))
            .collect()
    }
}

impl AsRef<PiecewisePmf> for PiecewisePmf {
    fn as_ref(&self) -> &PiecewisePmf {
        self
    }
}
