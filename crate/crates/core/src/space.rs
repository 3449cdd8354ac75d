//! The product space Ω = [c]^n, its element encoding, and sparse samples.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance used for every "sums to one" check.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Ω = [c]^n with uniform per-position cardinality `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceShape", into = "SpaceShape")]
pub struct CategoricalSpace {
    n: u32,
    c: u32,
    size: u64,
}

#[derive(Serialize, Deserialize)]
struct SpaceShape {
    n: u32,
    c: u32,
}

impl TryFrom<SpaceShape> for CategoricalSpace {
    type Error = Error;

    fn try_from(shape: SpaceShape) -> Result<Self> {
        CategoricalSpace::new(shape.n, shape.c)
    }
}

impl From<CategoricalSpace> for SpaceShape {
    fn from(space: CategoricalSpace) -> Self {
        SpaceShape {
            n: space.n,
            c: space.c,
        }
    }
}

impl CategoricalSpace {
    pub fn new(n: u32, c: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::input("space needs at least one position (n >= 1)"));
        }
        if c < 2 {
            return Err(Error::input("space needs at least two categories (c >= 2)"));
        }
        let size = u64::from(c)
            .checked_pow(n)
            .ok_or_else(|| Error::input(format!("{c}^{n} does not fit in 64 bits")))?;
        Ok(Self { n, c, size })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    /// |Ω|
    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn contains(&self, x: ElementIndex) -> bool {
        x.0 < self.size
    }

    /// Little-endian mixed radix: `Σ_j x_j · c^j`.
    pub fn encode(&self, tuple: &[u32]) -> Result<ElementIndex> {
        if tuple.len() != self.n as usize {
            return Err(Error::input(format!(
                "tuple has {} positions, space has {}",
                tuple.len(),
                self.n
            )));
        }
        let c = u64::from(self.c);
        let mut value = 0u64;
        for (pos, &digit) in tuple.iter().enumerate().rev() {
            if digit >= self.c {
                return Err(Error::input(format!(
                    "category {digit} at position {pos} is outside [0, {})",
                    self.c
                )));
            }
            value = value * c + u64::from(digit);
        }
        Ok(ElementIndex(value))
    }

    pub fn decode(&self, x: ElementIndex) -> Result<Vec<u32>> {
        if !self.contains(x) {
            return Err(Error::input(format!(
                "index {} is outside [0, {})",
                x.0, self.size
            )));
        }
        let c = u64::from(self.c);
        let mut rest = x.0;
        let tuple = (0..self.n)
            .map(|_| {
                let digit = (rest % c) as u32;
                rest /= c;
                digit
            })
            .collect();
        Ok(tuple)
    }
}

impl fmt::Display for CategoricalSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} c={}", self.n, self.c)
    }
}

/// Canonical index of an element of Ω.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementIndex(pub u64);

impl ElementIndex {
    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for ElementIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Multiset of samples stored as index -> count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseSampleSet {
    space: CategoricalSpace,
    counts: BTreeMap<ElementIndex, u64>,
    m: u64,
}

impl SparseSampleSet {
    pub fn from_indices<I>(space: CategoricalSpace, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = ElementIndex>,
    {
        let mut counts = BTreeMap::new();
        let mut m = 0u64;
        for x in indices {
            if !space.contains(x) {
                return Err(Error::input(format!(
                    "sample index {x} is outside [0, {})",
                    space.size()
                )));
            }
            *counts.entry(x).or_insert(0) += 1;
            m += 1;
        }
        Ok(Self { space, counts, m })
    }

    pub fn from_counts(space: CategoricalSpace, counts: BTreeMap<ElementIndex, u64>) -> Result<Self> {
        let mut m = 0u64;
        for (&x, &count) in &counts {
            if !space.contains(x) {
                return Err(Error::input(format!(
                    "sample index {x} is outside [0, {})",
                    space.size()
                )));
            }
            if count == 0 {
                return Err(Error::input(format!("zero count stored for index {x}")));
            }
            m += count;
        }
        Ok(Self { space, counts, m })
    }

    pub fn space(&self) -> CategoricalSpace {
        self.space
    }

    /// Total number of samples.
    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, x: ElementIndex) -> u64 {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<ElementIndex, u64> {
        &self.counts
    }

    /// Ascending by index.
    pub fn iter(&self) -> impl Iterator<Item = (ElementIndex, u64)> + '_ {
        self.counts.iter().map(|(&x, &c)| (x, c))
    }

    pub fn empirical_pmf(&self) -> Result<SparsePmf> {
        if self.m == 0 {
            return Err(Error::input("empirical pmf of an empty sample set"));
        }
        let m = self.m as f64;
        let probs = self
            .counts
            .iter()
            .map(|(&x, &c)| (x, c as f64 / m))
            .collect();
        Ok(SparsePmf {
            space: self.space,
            probs,
        })
    }

    /// Randomly divides the multiset into two halves of sizes ⌊m/2⌋ and ⌈m/2⌉.
    pub fn split_half(&self, seed: u64) -> (SparseSampleSet, SparseSampleSet) {
        let mut all: Vec<ElementIndex> = self
            .counts
            .iter()
            .flat_map(|(&x, &c)| std::iter::repeat_n(x, c as usize))
            .collect();
        all.shuffle(&mut rng_from_seed(seed));
        let mid = all.len() / 2;
        let build = |part: &[ElementIndex]| {
            let mut counts = BTreeMap::new();
            for &x in part {
                *counts.entry(x).or_insert(0) += 1;
            }
            SparseSampleSet {
                space: self.space,
                counts,
                m: part.len() as u64,
            }
        };
        (build(&all[..mid]), build(&all[mid..]))
    }
}

/// Sparse probability mass function; absent keys have probability zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparsePmf {
    space: CategoricalSpace,
    probs: BTreeMap<ElementIndex, f64>,
}

impl SparsePmf {
    pub fn new(space: CategoricalSpace, probs: BTreeMap<ElementIndex, f64>) -> Result<Self> {
        let mut total = 0.0;
        for (&x, &p) in &probs {
            if !space.contains(x) {
                return Err(Error::input(format!(
                    "pmf key {x} is outside [0, {})",
                    space.size()
                )));
            }
            if !(p >= 0.0 && p.is_finite()) {
                return Err(Error::input(format!("invalid probability {p} at {x}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::input(format!("pmf sums to {total}, not 1")));
        }
        Ok(Self { space, probs })
    }

    pub fn space(&self) -> CategoricalSpace {
        self.space
    }

    pub fn get(&self, x: ElementIndex) -> f64 {
        self.probs.get(&x).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Ascending by index.
    pub fn iter(&self) -> impl Iterator<Item = (ElementIndex, f64)> + '_ {
        self.probs.iter().map(|(&x, &p)| (x, p))
    }
}
