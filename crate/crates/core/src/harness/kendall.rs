//! Kendall rank correlation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Tau-b between two score vectors; ties in either vector are corrected for.
///
/// `(P − Q) / sqrt((P + Q + T_x)(P + Q + T_y))` where T_x counts pairs tied only
/// in `x` and T_y pairs tied only in `y`. A zero denominator (one side entirely
/// tied) yields 0.
pub fn tau_b(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::input(format!(
            "score vectors differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::input("tau needs at least two items"));
    }
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0u64, 0u64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[i].total_cmp(&x[j]);
            let dy = y[i].total_cmp(&y[j]);
            match (dx, dy) {
                (Ordering::Equal, Ordering::Equal) => {}
                (Ordering::Equal, _) => tie_x += 1,
                (_, Ordering::Equal) => tie_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (concordant + discordant) as f64;
    let denom = ((pairs + tie_x as f64) * (pairs + tie_y as f64)).sqrt();
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok((concordant as f64 - discordant as f64) / denom)
}

/// Tau between two rankings (best first) of the same label set.
pub fn kendall_tau<L: Eq + Hash>(ranking_a: &[L], ranking_b: &[L]) -> Result<f64> {
    if ranking_a.len() != ranking_b.len() {
        return Err(Error::input("rankings have different lengths"));
    }
    let position: HashMap<&L, usize> = ranking_b.iter().enumerate().map(|(i, l)| (l, i)).collect();
    if position.len() != ranking_b.len() {
        return Err(Error::input("ranking contains a repeated label"));
    }
    let mut seen = vec![false; ranking_b.len()];
    let mut b_pos = Vec::with_capacity(ranking_a.len());
    for label in ranking_a {
        let &j = position
            .get(label)
            .ok_or_else(|| Error::input("rankings hold different label sets"))?;
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::input("ranking contains a repeated label"));
        }
        b_pos.push(j as f64);
    }
    let a_pos: Vec<f64> = (0..ranking_a.len()).map(|i| i as f64).collect();
    tau_b(&a_pos, &b_pos)
}
