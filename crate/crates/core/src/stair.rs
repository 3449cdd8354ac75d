//! The ground-truth stair distribution: `s` flat regions with strictly
//! decreasing per-element probability, the last region carrying no mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Block, PiecewisePmf};
use crate::space::{CategoricalSpace, ElementIndex, SparseSampleSet, MASS_TOLERANCE};

/// c!/c^c, the default fraction of Ω that carries positive mass.
pub fn factorial_support_ratio(c: u32) -> f64 {
    (1..=c).map(|i| f64::from(i) / f64::from(c)).product()
}

/// Default masses for the s−1 positive regions.
pub fn default_mass_profile(s: usize) -> Vec<f64> {
    match s {
        0 | 1 => Vec::new(),
        2 => vec![1.0],
        3 => vec![0.7, 0.3],
        4 => vec![0.5, 0.3, 0.2],
        _ => {
            let raw: Vec<f64> = (0..s - 1).map(|i| 0.6f64.powi(i as i32)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        }
    }
}

/// Serializable description of a stair reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StairSpec {
    pub n: u32,
    pub c: u32,
    pub s: usize,
    /// Defaults to c!/c^c.
    #[serde(default)]
    pub support_ratio: Option<f64>,
    /// Defaults to [`default_mass_profile`].
    #[serde(default)]
    pub mass_profile: Option<Vec<f64>>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for StairSpec {
    fn default() -> Self {
        Self {
            n: 6,
            c: 6,
            s: 4,
            support_ratio: None,
            mass_profile: None,
            seed: 0,
        }
    }
}

impl StairSpec {
    pub fn space(&self) -> Result<CategoricalSpace> {
        CategoricalSpace::new(self.n, self.c)
    }

    pub fn resolved_support_ratio(&self) -> f64 {
        self.support_ratio
            .unwrap_or_else(|| factorial_support_ratio(self.c))
    }

    pub fn resolved_mass_profile(&self) -> Vec<f64> {
        self.mass_profile
            .clone()
            .unwrap_or_else(|| default_mass_profile(self.s))
    }

    /// Copy with every default filled in, for reports.
    pub fn resolved(&self) -> StairSpec {
        StairSpec {
            support_ratio: Some(self.resolved_support_ratio()),
            mass_profile: Some(self.resolved_mass_profile()),
            ..self.clone()
        }
    }

    pub fn build(&self) -> Result<StairDistribution> {
        build_stair(
            self.space()?,
            self.s,
            self.resolved_support_ratio(),
            &self.resolved_mass_profile(),
        )
    }
}

/// One flat region, `id` counted from 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatRegion {
    pub id: usize,
    pub start: u64,
    pub end: u64,
    pub per_element_prob: f64,
}

impl FlatRegion {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn mass(&self) -> f64 {
        self.len() as f64 * self.per_element_prob
    }

    pub fn contains(&self, x: ElementIndex) -> bool {
        (self.start..self.end).contains(&x.get())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StairDistribution {
    pmf: PiecewisePmf,
}

/// Number of elements carrying positive mass for a given ratio.
fn support_size(ratio: f64, size: u64) -> u64 {
    let raw = ratio * size as f64;
    let nearest = raw.round();
    // c!/c^c · c^c is an integer that f64 may miss by an ulp
    if (raw - nearest).abs() < 1e-6 {
        nearest as u64
    } else {
        raw.ceil() as u64
    }
}

pub fn build_stair(
    space: CategoricalSpace,
    s: usize,
    support_ratio: f64,
    mass_profile: &[f64],
) -> Result<StairDistribution> {
    if s < 2 {
        return Err(Error::input("a stair needs s >= 2 regions"));
    }
    if !(support_ratio > 0.0 && support_ratio <= 1.0) {
        return Err(Error::input(format!(
            "support ratio {support_ratio} is outside (0, 1]"
        )));
    }
    if mass_profile.len() != s - 1 {
        return Err(Error::input(format!(
            "mass profile has {} entries, expected s-1 = {}",
            mass_profile.len(),
            s - 1
        )));
    }
    if mass_profile.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::input("region masses must be positive"));
    }
    let total: f64 = mass_profile.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::input(format!("mass profile sums to {total}, not 1")));
    }

    let size = space.size();
    let support = support_size(support_ratio, size).min(size);
    let positive = (s - 1) as u64;
    if support < positive {
        return Err(Error::input(format!(
            "support of {support} elements cannot hold {positive} positive regions"
        )));
    }
    if support == size {
        return Err(Error::input("support covers the whole space; no zero region left"));
    }

    // near-equal split, earlier regions take the remainder
    let (base, extra) = (support / positive, support % positive);
    let mut blocks = Vec::with_capacity(s);
    let mut start = 0;
    for (i, &mass) in mass_profile.iter().enumerate() {
        let len = base + u64::from((i as u64) < extra);
        blocks.push(Block {
            start,
            end: start + len,
            prob: mass / len as f64,
        });
        start += len;
    }
    blocks.push(Block {
        start,
        end: size,
        prob: 0.0,
    });

    for pair in blocks.windows(2) {
        if pair[1].prob >= pair[0].prob {
            return Err(Error::construction(format!(
                "stair values must strictly decrease, got {} then {}",
                pair[0].prob, pair[1].prob
            )));
        }
    }

    Ok(StairDistribution {
        pmf: PiecewisePmf::new(space, blocks)?,
    })
}

impl StairDistribution {
    pub fn space(&self) -> CategoricalSpace {
        self.pmf.space()
    }

    /// Number of flat regions.
    pub fn s(&self) -> usize {
        self.pmf.blocks().len()
    }

    pub fn region(&self, idx: usize) -> FlatRegion {
        let b = self.pmf.blocks()[idx];
        FlatRegion {
            id: idx + 1,
            start: b.start,
            end: b.end,
            per_element_prob: b.prob,
        }
    }

    pub fn regions(&self) -> impl Iterator<Item = FlatRegion> + '_ {
        (0..self.s()).map(|i| self.region(i))
    }

    pub fn region_masses(&self) -> Vec<f64> {
        self.pmf.blocks().iter().map(Block::mass).collect()
    }

    /// Zero-based position of the region holding `x`.
    pub fn region_index_of(&self, x: ElementIndex) -> Option<usize> {
        self.pmf.block_of(x)
    }

    pub fn pmf(&self, x: ElementIndex) -> Result<f64> {
        self.pmf.pmf(x)
    }

    pub fn support_size(&self) -> u64 {
        let last = self.region(self.s() - 1);
        last.start
    }

    pub fn sample(&self, m: usize, seed: u64) -> Result<SparseSampleSet> {
        self.pmf.sample(m, seed)
    }

    pub fn sample_indices(&self, m: usize, seed: u64) -> Result<Vec<ElementIndex>> {
        self.pmf.sample_indices(m, seed)
    }

    pub fn piecewise(&self) -> &PiecewisePmf {
        &self.pmf
    }
}

impl AsRef<PiecewisePmf> for StairDistribution {
    fn as_ref(&self) -> &PiecewisePmf {
        &self.pmf
    }
}
