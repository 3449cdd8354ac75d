//! Synthetic "models": the stair reference with a prescribed amount of mass
//! moved, so the true TV distance to the reference is known exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::piecewise::{Block, PiecewisePmf};
use crate::space::{ElementIndex, SparseSampleSet};
use crate::stair::StairDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// Mass moves from one positive region to another.
    WithinSupport,
    /// Mass moves from a positive region onto the zero region.
    OntoZeroRegion,
    /// Mass moves between the two halves of one positive region; region
    /// masses are unchanged.
    #[default]
    WithinRegion,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbSpec {
    pub target_tv: f64,
    #[serde(default)]
    pub mode: PerturbMode,
    /// Region id (from 1) losing mass; defaults to 1.
    #[serde(default)]
    pub donor: Option<usize>,
    /// Region id gaining mass; defaults to 2, s, or the donor depending on mode.
    #[serde(default)]
    pub receiver: Option<usize>,
}

/// Additive change applied uniformly to `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adjustment {
    pub start: u64,
    pub end: u64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedDistribution {
    #[serde(skip)]
    base: StairDistribution,
    pub target_tv: f64,
    pub mode: PerturbMode,
    pub donor: usize,
    pub receiver: usize,
    pub adjustments: Vec<Adjustment>,
    #[serde(skip)]
    pmf: PiecewisePmf,
}

fn resolve_regions(p: &StairDistribution, spec: &PerturbSpec) -> Result<(usize, usize)> {
    let s = p.s();
    let donor = spec.donor.unwrap_or(1);
    let receiver = spec.receiver.unwrap_or(match spec.mode {
        PerturbMode::WithinSupport => 2,
        PerturbMode::OntoZeroRegion => s,
        PerturbMode::WithinRegion => donor,
    });
    if donor == 0 || donor >= s {
        return Err(Error::input(format!("donor region {donor} is not a positive region")));
    }
    match spec.mode {
        PerturbMode::WithinSupport if receiver == 0 || receiver >= s || receiver == donor => {
            Err(Error::input(format!(
                "within-support receiver {receiver} must be a positive region other than the donor"
            )))
        }
        PerturbMode::OntoZeroRegion if receiver != s => Err(Error::input(format!(
            "onto-zero receiver must be region {s}, got {receiver}"
        ))),
        PerturbMode::WithinRegion if receiver != donor => Err(Error::input(
            "within-region perturbation uses a single region as donor and receiver",
        )),
        _ => Ok((donor, receiver)),
    }
}

/// Moves `target_tv` of mass so that d_TV(p, q) = target_tv exactly.
pub fn perturb(p: &StairDistribution, spec: &PerturbSpec) -> Result<PerturbedDistribution> {
    let t = spec.target_tv;
    if !(0.0..1.0).contains(&t) {
        return Err(Error::input(format!("target TV {t} is outside [0, 1)")));
    }
    let (donor, receiver) = resolve_regions(p, spec)?;
    let d = p.region(donor - 1);
    let r = p.region(receiver - 1);

    let adjustments = if t == 0.0 {
        Vec::new()
    } else if spec.mode == PerturbMode::WithinRegion {
        if d.len() < 2 {
            return Err(Error::input(format!("region {donor} is too small to halve")));
        }
        let mid = d.start + d.len() / 2;
        let removable = (d.end - mid) as f64 * d.per_element_prob;
        if t > removable {
            return Err(Error::input(format!(
                "target TV {t} exceeds the {removable} removable from the lower half of region {donor}"
            )));
        }
        vec![
            Adjustment { start: d.start, end: mid, delta: t / (mid - d.start) as f64 },
            Adjustment { start: mid, end: d.end, delta: -t / (d.end - mid) as f64 },
        ]
    } else {
        if t > d.mass() {
            return Err(Error::input(format!(
                "target TV {t} exceeds the mass {} of donor region {donor}",
                d.mass()
            )));
        }
        let mut adj = vec![
            Adjustment { start: d.start, end: d.end, delta: -t / d.len() as f64 },
            Adjustment { start: r.start, end: r.end, delta: t / r.len() as f64 },
        ];
        adj.sort_by_key(|a| a.start);
        adj
    };

    let mut blocks = Vec::new();
    for region in p.regions() {
        let inside: Vec<&Adjustment> = adjustments
            .iter()
            .filter(|a| a.start >= region.start && a.end <= region.end)
            .collect();
        if inside.is_empty() {
            blocks.push(Block { start: region.start, end: region.end, prob: region.per_element_prob });
        }
        for a in inside {
            let prob = (region.per_element_prob + a.delta).max(0.0);
            blocks.push(Block { start: a.start, end: a.end, prob });
        }
    }
    let pmf = PiecewisePmf::new(p.space(), blocks)?;

    Ok(PerturbedDistribution {
        base: p.clone(),
        target_tv: t,
        mode: spec.mode,
        donor,
        receiver,
        adjustments,
        pmf,
    })
}

impl PerturbedDistribution {
    pub fn base(&self) -> &StairDistribution {
        &self.base
    }

    pub fn piecewise(&self) -> &PiecewisePmf {
        &self.pmf
    }

    pub fn pmf(&self, x: ElementIndex) -> Result<f64> {
        self.pmf.pmf(x)
    }

    /// Closed-form TV to the base stair.
    pub fn exact_tv(&self) -> f64 {
        self.pmf
            .tv_distance(self.base.piecewise())
            .expect("perturbation shares the base space")
    }

    pub fn sample(&self, m: usize, seed: u64) -> Result<SparseSampleSet> {
        self.pmf.sample(m, seed)
    }

    pub fn sample_indices(&self, m: usize, seed: u64) -> Result<Vec<ElementIndex>> {
        self.pmf.sample_indices(m, seed)
    }
}

impl AsRef<PiecewisePmf> for PerturbedDistribution {
    fn as_ref(&self) -> &PiecewisePmf {
        &self.pmf
    }
}

pub fn sample_perturbed(q: &PerturbedDistribution, m: usize, seed: u64) -> Result<SparseSampleSet> {
    q.sample(m, seed)
}

/// Target TVs {0, 0.1, 0.15, 0.2}.
pub const DEFAULT_SUITE: [f64; 4] = [0.0, 0.1, 0.15, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSpec {
    pub targets: Vec<f64>,
    #[serde(default)]
    pub mode: PerturbMode,
    #[serde(default)]
    pub donor: Option<usize>,
    #[serde(default)]
    pub receiver: Option<usize>,
}

impl Default for SuiteSpec {
    fn default() -> Self {
        Self {
            targets: DEFAULT_SUITE.to_vec(),
            mode: PerturbMode::default(),
            donor: None,
            receiver: None,
        }
    }
}

impl SuiteSpec {
    /// `(label, model)` pairs in target order, labels `q1`, `q2`, ...
    pub fn build(&self, p: &StairDistribution) -> Result<Vec<(String, PerturbedDistribution)>> {
        if self.targets.is_empty() {
            return Err(Error::input("suite needs at least one target TV"));
        }
        self.targets
            .iter()
            .enumerate()
            .map(|(i, &target_tv)| {
                let spec = PerturbSpec {
                    target_tv,
                    mode: self.mode,
                    donor: self.donor,
                    receiver: self.receiver,
                };
                Ok((format!("q{}", i + 1), perturb(p, &spec)?))
            })
            .collect()
    }
}
