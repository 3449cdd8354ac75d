//! Binnings of Ω inside the flat regions of a stair reference.
//!
//! A [`Binning`] keeps every region either whole or cut in two. The cut is
//! stored as the explicit "side A" index set (a subset of sampled elements in
//! practice) with the rest of the region implicit, so a binning of a space
//! with millions of elements costs O(m).
//!
//! The TV between binned distributions is additive over regions. Cutting
//! region i into its over- and under-estimated parts raises its contribution
//! from |P_i − N_i|/2 to (P_i + N_i)/2, a gain of min(P_i, N_i), and no finer
//! cut of that region can do better. Picking the k − s largest gains is
//! therefore the exact maximum over the zero-error family at granularity k.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::space::{ElementIndex, SparsePmf, SparseSampleSet};
use crate::stair::StairDistribution;

/// Gains closer than this are treated as tied; the lower region id wins.
const GAIN_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Whole,
    /// Over-estimated elements (q̂ > p) against the rest.
    SignSplit,
    /// Fair-coin assignment of sampled elements.
    RandomSplit,
    /// Region with errors of a single sign: every two-way cut scores the same,
    /// the first element is peeled off.
    ZeroGainSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSplit {
    /// Counted from 1.
    pub region_id: usize,
    pub start: u64,
    pub end: u64,
    pub mode: SplitMode,
    /// Sorted, strictly inside the region; empty for `Whole`.
    pub side_a: Vec<ElementIndex>,
}

impl RegionSplit {
    fn whole(p: &StairDistribution, idx: usize) -> Self {
        let r = p.region(idx);
        Self {
            region_id: r.id,
            start: r.start,
            end: r.end,
            mode: SplitMode::Whole,
            side_a: Vec::new(),
        }
    }

    pub fn is_split(&self) -> bool {
        self.mode != SplitMode::Whole
    }

    fn len(&self) -> u64 {
        self.end - self.start
    }
}

/// Per-region error masses of q̂ against p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionErrors {
    pub region_id: usize,
    /// Σ (q̂_x − p_x) over q̂_x > p_x.
    pub excess: f64,
    /// Σ (p_x − q̂_x) over q̂_x ≤ p_x, unsampled elements included.
    pub deficit: f64,
    pub positive_set: Vec<ElementIndex>,
}

impl RegionErrors {
    pub fn split_gain(&self) -> f64 {
        self.excess.min(self.deficit)
    }
}

pub fn region_errors(p: &StairDistribution, q: &SparsePmf) -> Result<Vec<RegionErrors>> {
    if p.space() != q.space() {
        return Err(Error::input("reference and empirical pmf live on different spaces"));
    }
    let mut errors: Vec<RegionErrors> = p
        .regions()
        .map(|r| RegionErrors {
            region_id: r.id,
            excess: 0.0,
            deficit: r.mass(),
            positive_set: Vec::new(),
        })
        .collect();
    let mut idx = 0;
    for (x, qx) in q.iter() {
        while p.region(idx).end <= x.get() {
            idx += 1;
        }
        let px = p.region(idx).per_element_prob;
        let e = &mut errors[idx];
        // deficit starts at the full region mass; move x out of it
        e.deficit -= px;
        if qx > px {
            e.excess += qx - px;
            e.positive_set.push(x);
        } else {
            e.deficit += px - qx;
        }
    }
    for e in &mut errors {
        e.deficit = e.deficit.max(0.0);
    }
    Ok(errors)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub k: usize,
    pub regions: Vec<RegionSplit>,
}

fn check_granularity(p: &StairDistribution, k: usize) -> Result<()> {
    let s = p.s();
    if k < s || k > 2 * s {
        return Err(Error::input(format!(
            "granularity k = {k} is outside [s, 2s] = [{s}, {}]",
            2 * s
        )));
    }
    Ok(())
}

fn splittable(p: &StairDistribution) -> Vec<usize> {
    (0..p.s()).filter(|&i| p.region(i).len() >= 2).collect()
}

impl Binning {
    /// The s flat regions, unsplit.
    pub fn flat(p: &StairDistribution) -> Self {
        Self {
            k: p.s(),
            regions: (0..p.s()).map(|i| RegionSplit::whole(p, i)).collect(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn split_count(&self) -> usize {
        self.regions.iter().filter(|r| r.is_split()).count()
    }

    /// Region-major order; a split region contributes `R<i>a` then `R<i>b`.
    pub fn bin_labels(&self) -> Vec<String> {
        self.regions
            .iter()
            .flat_map(|r| {
                if r.is_split() {
                    vec![format!("R{}a", r.region_id), format!("R{}b", r.region_id)]
                } else {
                    vec![format!("R{}", r.region_id)]
                }
            })
            .collect()
    }

    fn first_bins(&self) -> Vec<usize> {
        let mut acc = 0;
        self.regions
            .iter()
            .map(|r| {
                let first = acc;
                acc += if r.is_split() { 2 } else { 1 };
                first
            })
            .collect()
    }

    /// Bin holding `x`, or `None` outside the binned space.
    pub fn bin_of(&self, x: ElementIndex) -> Option<usize> {
        let idx = self.regions.partition_point(|r| r.end <= x.get());
        let r = self.regions.get(idx)?;
        if x.get() < r.start {
            return None;
        }
        let first = self.first_bins()[idx];
        Some(match r.mode {
            SplitMode::Whole => first,
            _ if r.side_a.binary_search(&x).is_ok() => first,
            _ => first + 1,
        })
    }

    /// Checks the binning is a k-partition of Ω lying inside the flat regions of `p`.
    pub fn validate(&self, p: &StairDistribution) -> Result<()> {
        if self.regions.len() != p.s() {
            return Err(Error::construction(format!(
                "binning covers {} regions, reference has {}",
                self.regions.len(),
                p.s()
            )));
        }
        for (idx, split) in self.regions.iter().enumerate() {
            let r = p.region(idx);
            if split.region_id != r.id || split.start != r.start || split.end != r.end {
                return Err(Error::construction(format!(
                    "region record {} does not match reference region {}",
                    split.region_id, r.id
                )));
            }
            let side = &split.side_a;
            if !side.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::construction(format!(
                    "side set of region {} is not strictly ascending",
                    r.id
                )));
            }
            if side.iter().any(|&x| !r.contains(x)) {
                return Err(Error::construction(format!(
                    "side set of region {} leaves the region",
                    r.id
                )));
            }
            match split.mode {
                SplitMode::Whole if !side.is_empty() => {
                    return Err(Error::construction(format!(
                        "whole region {} carries a side set",
                        r.id
                    )))
                }
                SplitMode::Whole => {}
                _ if side.is_empty() || side.len() as u64 >= r.len() => {
                    return Err(Error::construction(format!(
                        "split of region {} leaves an empty bin",
                        r.id
                    )))
                }
                _ => {}
            }
        }
        if self.k != self.regions.len() + self.split_count() {
            return Err(Error::construction(format!(
                "recorded k = {} but the binning has {} bins",
                self.k,
                self.regions.len() + self.split_count()
            )));
        }
        Ok(())
    }

    /// p^B in closed form from region values and side-set sizes.
    pub fn induce_reference(&self, p: &StairDistribution) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.k);
        for (idx, split) in self.regions.iter().enumerate() {
            let r = p.region(idx);
            if split.is_split() {
                let a = split.side_a.len() as f64 * r.per_element_prob;
                out.push(a);
                out.push(r.mass() - a);
            } else {
                out.push(r.mass());
            }
        }
        out
    }

    /// q̂^B from a sparse pmf.
    pub fn induce_empirical(&self, q: &SparsePmf) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (x, qx) in q.iter() {
            if let Some(b) = self.bin_of(x) {
                out[b] += qx;
            }
        }
        out
    }

    pub fn bin_counts(&self, samples: &SparseSampleSet) -> Vec<u64> {
        let mut out = vec![0; self.k];
        for (x, c) in samples.iter() {
            if let Some(b) = self.bin_of(x) {
                out[b] += c;
            }
        }
        out
    }

    /// Binned version of an arbitrary dense pmf over an enumerable space.
    pub fn induce_dense(&self, pmf: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (v, &px) in pmf.iter().enumerate() {
            if let Some(b) = self.bin_of(ElementIndex(v as u64)) {
                out[b] += px;
            }
        }
        out
    }

    /// Explicit member lists, for enumerable spaces.
    pub fn explicit_bins(&self) -> Vec<Vec<ElementIndex>> {
        let mut bins = vec![Vec::new(); self.k];
        let end = self.regions.last().map_or(0, |r| r.end);
        for v in 0..end {
            let x = ElementIndex(v);
            if let Some(b) = self.bin_of(x) {
                bins[b].push(x);
            }
        }
        bins
    }

    /// Region composition of each bin: (region position, element count).
    pub fn compositions(&self) -> Vec<Vec<(usize, u64)>> {
        self.regions
            .iter()
            .enumerate()
            .flat_map(|(idx, r)| {
                if r.is_split() {
                    let a = r.side_a.len() as u64;
                    vec![vec![(idx, a)], vec![(idx, r.len() - a)]]
                } else {
                    vec![vec![(idx, r.len())]]
                }
            })
            .collect()
    }

    pub fn error_to_reference(&self, p: &StairDistribution) -> f64 {
        composition_error(p, &self.compositions())
    }
}

/// ½ Σ_A Σ_{x∈A} |p_x − p^B_A/|A||, with each bin given by its region composition.
fn composition_error(p: &StairDistribution, bins: &[Vec<(usize, u64)>]) -> f64 {
    let mut err = 0.0;
    for pieces in bins {
        let size: u64 = pieces.iter().map(|&(_, n)| n).sum();
        if size == 0 {
            continue;
        }
        let mass: f64 = pieces
            .iter()
            .map(|&(r, n)| n as f64 * p.region(r).per_element_prob)
            .sum();
        let mean = mass / size as f64;
        err += pieces
            .iter()
            .map(|&(r, n)| n as f64 * (p.region(r).per_element_prob - mean).abs())
            .sum::<f64>();
    }
    0.5 * err
}

/// Error introduced by replacing p with its binned, bin-averaged version.
pub fn binning_error_to_reference(binning: &Binning, p: &StairDistribution) -> f64 {
    binning.error_to_reference(p)
}

/// Same quantity for an arbitrary explicit partition of an enumerable Ω.
pub fn partition_error_to_reference(
    bins: &[Vec<ElementIndex>],
    p: &StairDistribution,
) -> Result<f64> {
    let size = p.space().size();
    let mut seen = vec![false; size as usize];
    let mut compositions = Vec::with_capacity(bins.len());
    for bin in bins {
        let mut by_region: BTreeMap<usize, u64> = BTreeMap::new();
        for &x in bin {
            let r = p
                .region_index_of(x)
                .ok_or_else(|| Error::input(format!("element {x} is outside the space")))?;
            if std::mem::replace(&mut seen[x.get() as usize], true) {
                return Err(Error::input(format!("element {x} appears in two bins")));
            }
            *by_region.entry(r).or_insert(0) += 1;
        }
        compositions.push(by_region.into_iter().collect::<Vec<_>>());
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::input("bins do not cover the space"));
    }
    Ok(composition_error(p, &compositions))
}

/// Membership test for the family of k-binnings with reference error ≤ λ.
pub fn within_error_family(binning: &Binning, p: &StairDistribution, lambda: f64) -> bool {
    binning.error_to_reference(p) <= lambda + 1e-12
}

/// The binning in the zero-error family maximizing d_TV(p^B, q̂^B) at granularity k.
pub fn optimize_binning(p: &StairDistribution, q: &SparsePmf, k: usize) -> Result<Binning> {
    check_granularity(p, k)?;
    let errors = region_errors(p, q)?;
    let candidates = splittable(p);
    let wanted = k - p.s();
    if candidates.len() < wanted {
        return Err(Error::input(format!(
            "granularity k = {k} needs {wanted} splittable regions, only {} exist",
            candidates.len()
        )));
    }

    let mut remaining = candidates;
    let mut chosen = Vec::with_capacity(wanted);
    for _ in 0..wanted {
        let mut best = 0;
        for (pos, &idx) in remaining.iter().enumerate().skip(1) {
            let gain = errors[idx].split_gain();
            if gain > errors[remaining[best]].split_gain() + GAIN_TIE_TOLERANCE {
                best = pos;
            }
        }
        chosen.push(remaining.remove(best));
    }

    let mut binning = Binning::flat(p);
    for idx in chosen {
        let e = &errors[idx];
        let split = &mut binning.regions[idx];
        if e.excess > 0.0 && e.deficit > 0.0 && (e.positive_set.len() as u64) < split.len() {
            split.mode = SplitMode::SignSplit;
            split.side_a = e.positive_set.clone();
        } else {
            split.mode = SplitMode::ZeroGainSplit;
            split.side_a = vec![ElementIndex(split.start)];
        }
    }
    binning.k = k;
    Ok(binning)
}

/// Baseline: k − s regions picked uniformly, sampled elements cut by fair coin.
///
/// Unsampled elements stay on side B. A coin outcome that would leave a bin
/// empty is repaired with one uniformly drawn element of the region.
pub fn random_binning(
    p: &StairDistribution,
    q: &SparsePmf,
    k: usize,
    seed: u64,
) -> Result<Binning> {
    check_granularity(p, k)?;
    if p.space() != q.space() {
        return Err(Error::input("reference and empirical pmf live on different spaces"));
    }
    let candidates = splittable(p);
    let wanted = k - p.s();
    if candidates.len() < wanted {
        return Err(Error::input(format!(
            "granularity k = {k} needs {wanted} splittable regions, only {} exist",
            candidates.len()
        )));
    }
    let mut binning = Binning::flat(p);
    if wanted == 0 {
        return Ok(binning);
    }
    let mut rng = rng_from_seed(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, candidates.len(), wanted)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    chosen.sort_unstable();

    for idx in chosen {
        let split = &mut binning.regions[idx];
        let mut side: Vec<ElementIndex> = q
            .iter()
            .map(|(x, _)| x)
            .filter(|x| (split.start..split.end).contains(&x.get()))
            .filter(|_| rng.random_bool(0.5))
            .collect();
        if side.is_empty() {
            side.push(ElementIndex(rng.random_range(split.start..split.end)));
        } else if side.len() as u64 == split.len() {
            let drop = rng.random_range(0..side.len());
            side.remove(drop);
        }
        split.mode = SplitMode::RandomSplit;
        split.side_a = side;
    }
    binning.k = k;
    Ok(binning)
}

/// Aligned (p^B, q̂^B) on a k-bin space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinnedPair {
    pub labels: Vec<String>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl BinnedPair {
    pub fn new(binning: &Binning, p: &StairDistribution, q: &SparsePmf) -> Self {
        Self {
            labels: binning.bin_labels(),
            p: binning.induce_reference(p),
            q: binning.induce_empirical(q),
        }
    }

    pub fn k(&self) -> usize {
        self.p.len()
    }

    pub fn tv(&self) -> f64 {
        binned_tv(&self.p, &self.q)
    }

    pub fn l2_squared(&self) -> f64 {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

pub fn binned_tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Unconstrained baseline: every element hashed into one of k bins, ignoring
/// the flat regions. Costs O(|support of p| + |support of q̂|).
pub fn unconstrained_random_pair(
    p: &StairDistribution,
    q: &SparsePmf,
    k: usize,
    seed: u64,
) -> Result<BinnedPair> {
    if k == 0 {
        return Err(Error::input("need at least one bin"));
    }
    let bin = |x: u64| (derive_seed(seed, &[x]) % k as u64) as usize;
    let mut pb = vec![0.0; k];
    for r in p.regions().filter(|r| r.per_element_prob > 0.0) {
        for v in r.start..r.end {
            pb[bin(v)] += r.per_element_prob;
        }
    }
    let mut qb = vec![0.0; k];
    for (x, qx) in q.iter() {
        qb[bin(x.get())] += qx;
    }
    Ok(BinnedPair {
        labels: (0..k).map(|i| format!("U{}", i + 1)).collect(),
        p: pb,
        q: qb,
    })
}
