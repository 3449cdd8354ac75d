//! Brute-force oracles and random instances on tiny, enumerable spaces.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use stairbin::space::{CategoricalSpace, ElementIndex, SparsePmf, SparseSampleSet};
use stairbin::stair::{build_stair, StairDistribution};

/// Shapes (n, c) with 3 ≤ c^n ≤ 12.
pub const SHAPES: [(u32, u32); 13] = [
    (1, 3),
    (1, 4),
    (1, 5),
    (1, 6),
    (1, 7),
    (1, 8),
    (1, 9),
    (1, 10),
    (1, 11),
    (1, 12),
    (2, 2),
    (2, 3),
    (3, 2),
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub struct Instance {
    pub p: StairDistribution,
    pub samples: SparseSampleSet,
    pub q: SparsePmf,
    pub k: usize,
}

/// A stair with s ∈ [2, max_s] on one of [`SHAPES`], retried until the drawn
/// masses give strictly decreasing per-element values.
pub fn random_stair(rng: &mut impl Rng, max_s: usize) -> StairDistribution {
    loop {
        let (n, c) = SHAPES[rng.random_range(0..SHAPES.len())];
        let space = CategoricalSpace::new(n, c).unwrap();
        let size = space.size();
        let s = rng.random_range(2..=max_s.min(size as usize));
        let support = rng.random_range((s as u64 - 1)..size);
        let raw: Vec<f64> = (0..s - 1).map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let profile: Vec<f64> = raw.iter().map(|w| w / total).collect();
        if let Ok(p) = build_stair(space, s, support as f64 / size as f64, &profile) {
            return p;
        }
    }
}

/// Samples drawn from a random pmf over Ω (some elements excluded), so q̂
/// can put mass anywhere, including the zero region.
pub fn random_samples(rng: &mut impl Rng, space: CategoricalSpace, max_m: usize) -> SparseSampleSet {
    let size = space.size() as usize;
    let weights: Vec<f64> = (0..size)
        .map(|_| if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    let total: f64 = weights.iter().sum();
    let m = rng.random_range(1..=max_m);
    let draws = (0..m).map(|_| {
        if total == 0.0 {
            return ElementIndex(rng.random_range(0..size as u64));
        }
        let mut u = rng.random_range(0.0..total);
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return ElementIndex(i as u64);
            }
            u -= w;
        }
        ElementIndex(size as u64 - 1)
    });
    SparseSampleSet::from_indices(space, draws.collect::<Vec<_>>()).unwrap()
}

pub fn random_instance(rng: &mut impl Rng, max_s: usize) -> Instance {
    let p = random_stair(rng, max_s);
    let samples = random_samples(rng, p.space(), 30);
    let q = samples.empirical_pmf().unwrap();
    let k = rng.random_range(p.s()..=2 * p.s());
    Instance { p, samples, q, k }
}

/// Largest k reachable with two-way splits: s plus the regions of size ≥ 2.
pub fn feasible_k_max(p: &StairDistribution) -> usize {
    let splittable = p.regions().filter(|r| r.len() >= 2).count();
    (p.s() + splittable).min(2 * p.s())
}

pub fn dense(q: &SparsePmf) -> Vec<f64> {
    let mut out = vec![0.0; q.space().size() as usize];
    for (x, v) in q.iter() {
        out[x.get() as usize] = v;
    }
    out
}

pub fn dense_tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Bin masses of a dense pmf under explicit labels in `0..k`.
pub fn bin_masses(pmf: &[f64], labels: &[usize], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; k];
    for (&v, &l) in pmf.iter().zip(labels) {
        out[l] += v;
    }
    out
}

/// max Σ_blocks |Σ_{x∈block} d_x| over partitions of `d` into exactly `j`
/// non-empty blocks, by enumerating restricted growth strings.
fn best_partition(d: &[f64], j: usize) -> Option<f64> {
    fn walk(d: &[f64], j: usize, i: usize, used: usize, sums: &mut Vec<f64>, best: &mut Option<f64>) {
        if d.len() - i < j - used {
            return;
        }
        if i == d.len() {
            let v: f64 = sums.iter().map(|s| s.abs()).sum();
            if best.is_none_or(|b| v > b) {
                *best = Some(v);
            }
            return;
        }
        for b in 0..used.min(j) {
            sums[b] += d[i];
            walk(d, j, i + 1, used, sums, best);
            sums[b] -= d[i];
        }
        if used < j {
            sums.push(d[i]);
            walk(d, j, i + 1, used + 1, sums, best);
            sums.pop();
        }
    }
    let mut best = None;
    walk(d, j, 0, 0, &mut Vec::new(), &mut best);
    best
}

/// Exhaustive max of d_TV(p^B, q̂^B) over k-partitions whose bins each lie
/// inside one flat region; `None` when no such partition exists.
pub fn exhaustive_max_binned_tv(p: &StairDistribution, q: &SparsePmf, k: usize) -> Option<f64> {
    let pd = p.piecewise().to_dense();
    let qd = dense(q);
    let extra = k.checked_sub(p.s())?;
    // per region: best value for 1..=extra+1 blocks
    let tables: Vec<Vec<Option<f64>>> = p
        .regions()
        .map(|r| {
            let d: Vec<f64> = (r.start..r.end).map(|x| pd[x as usize] - qd[x as usize]).collect();
            (1..=extra + 1).map(|j| best_partition(&d, j)).collect()
        })
        .collect();
    // combine over all allocations of the extra blocks
    let mut reach: Vec<Option<f64>> = vec![None; extra + 1];
    reach[0] = Some(0.0);
    for table in &tables {
        let mut next = vec![None; extra + 1];
        for (used, acc) in reach.iter().enumerate() {
            let Some(acc) = acc else { continue };
            for (add, value) in table.iter().enumerate() {
                let (Some(v), total) = (value, used + add) else { continue };
                if total <= extra {
                    let cand = acc + v;
                    if next[total].is_none_or(|b: f64| cand > b) {
                        next[total] = Some(cand);
                    }
                }
            }
        }
        reach = next;
    }
    reach[extra].map(|v| 0.5 * v)
}
