//! TV and squared ℓ² distances between a piecewise-constant reference and a
//! sparse empirical pmf. Neither routine touches unsampled elements one by
//! one: their contribution is folded in per block.

use crate::error::{Error, Result};
use crate::piecewise::PiecewisePmf;
use crate::space::SparsePmf;

/// Walks the (ascending) support of `q` alongside the blocks of `p`, calling
/// `visit(block, p_x, q_x)` for every stored element.
fn for_each_sampled<F>(p: &PiecewisePmf, q: &SparsePmf, mut visit: F) -> Result<()>
where
    F: FnMut(usize, f64, f64),
{
    if p.space() != q.space() {
        return Err(Error::input("reference and empirical pmf live on different spaces"));
    }
    let blocks = p.blocks();
    let mut b = 0;
    for (x, qx) in q.iter() {
        while blocks[b].end <= x.get() {
            b += 1;
        }
        visit(b, blocks[b].prob, qx);
    }
    Ok(())
}

/// ½ Σ_x |p_x − q_x|.
pub fn tv_distance_sparse(p: &impl AsRef<PiecewisePmf>, q: &SparsePmf) -> Result<f64> {
    let p = p.as_ref();
    let mut sampled_diff = 0.0;
    let mut sampled_p = 0.0;
    for_each_sampled(p, q, |_, px, qx| {
        sampled_diff += (px - qx).abs();
        sampled_p += px;
    })?;
    let unsampled_p = (p.total_mass() - sampled_p).max(0.0);
    Ok((0.5 * (sampled_diff + unsampled_p)).min(1.0))
}

/// Σ_x (p_x − q_x)², the squared ℓ² norm of the difference.
pub fn l2_squared_sparse(p: &impl AsRef<PiecewisePmf>, q: &SparsePmf) -> Result<f64> {
    let p = p.as_ref();
    let mut sampled_in_block = vec![0u64; p.blocks().len()];
    let mut sum = 0.0;
    for_each_sampled(p, q, |b, px, qx| {
        sampled_in_block[b] += 1;
        sum += (px - qx) * (px - qx);
    })?;
    for (block, &hit) in p.blocks().iter().zip(&sampled_in_block) {
        sum += (block.len() - hit) as f64 * block.prob * block.prob;
    }
    Ok(sum)
}
