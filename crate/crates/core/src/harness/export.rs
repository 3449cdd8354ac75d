//! Plot data and dataset files.

use std::fmt::Write as _;
use std::path::Path;

use crate::distance::tv_distance_sparse;
use crate::error::Result;
use crate::harness::samples::write_samples;
use crate::piecewise::PiecewisePmf;
use crate::space::{ElementIndex, SparseSampleSet};
use crate::stair::StairDistribution;

/// CSV of the empirical pmf against p, region by region.
///
/// Within each region the sampled elements run from most over-estimated to
/// most under-estimated (ties by index); one `unsampled` row then aggregates
/// the rest of the region. The first line is `# d_tv=<value>`.
pub fn empirical_pmf_csv(p: &StairDistribution, samples: &SparseSampleSet) -> Result<(String, f64)> {
    let q = samples.empirical_pmf()?;
    let tv = tv_distance_sparse(p, &q)?;
    let mut out = format!("# d_tv={tv}\nregion_id,sort_rank,element,p_x,q_hat_x,multiplicity\n");
    for region in p.regions() {
        let mut rows: Vec<(ElementIndex, f64)> = q
            .iter()
            .filter(|(x, _)| region.contains(*x))
            .collect();
        let px = region.per_element_prob;
        rows.sort_by(|a, b| (b.1 - px).total_cmp(&(a.1 - px)).then(a.0.cmp(&b.0)));
        for (rank, (x, qx)) in rows.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{px},{qx},1", region.id, rank + 1, x);
        }
        let rest = region.len() - rows.len() as u64;
        let _ = writeln!(
            out,
            "{},{},unsampled,{},0,{rest}",
            region.id,
            rows.len() + 1,
            rest as f64 * px
        );
    }
    Ok((out, tv))
}

/// Writes [`empirical_pmf_csv`] to `path` and returns d_TV(p, q̂).
pub fn export_empirical_pmf(p: &StairDistribution, samples: &SparseSampleSet, path: &Path) -> Result<f64> {
    let (csv, tv) = empirical_pmf_csv(p, samples)?;
    std::fs::write(path, csv)?;
    Ok(tv)
}

/// Draws `m` samples from `source` and writes them as a sample file.
pub fn generate_dataset(
    source: &impl AsRef<PiecewisePmf>,
    m: usize,
    seed: u64,
    path: &Path,
) -> Result<()> {
    let pmf = source.as_ref();
    write_samples(path, pmf.space(), &pmf.sample_indices(m, seed)?)
}
