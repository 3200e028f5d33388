//! Generalized polynomial watchdog. Weights are split into bits; each bit
//! level counts its inputs in unary with a totalizer, and every second unary
//! output of a level is carried into the next. The constraint `Σ ≤ k` holds
//! iff the top level, after adding a constant that aligns `k + 1` to a
//! multiple of the top bit, stays below that multiple.

use crate::cnf::{CnfBuilder, Lit, Prop};
use crate::error::EncodeError;

use super::PbLits;

/// Unary counter over `inputs` with outputs `o[c]` meaning "at least c+1
/// inputs are true", truncated to `cap` outputs. Clauses only propagate
/// upwards.
fn totalizer(inputs: &[Prop], cap: usize, b: &mut CnfBuilder) -> Result<Vec<Prop>, EncodeError> {
    if inputs.len() <= 1 || cap == 0 {
        return Ok(inputs.iter().copied().take(cap).collect());
    }
    let mid = inputs.len().div_ceil(2);
    let left = totalizer(&inputs[..mid], cap, b)?;
    let right = totalizer(&inputs[mid..], cap, b)?;
    let size = (left.len() + right.len()).min(cap);
    let out: Vec<Prop> = (0..size).map(|_| Prop::Lit(b.new_var())).collect();
    for i in 0..=left.len() {
        for j in 0..=right.len() {
            if i + j == 0 {
                continue;
            }
            let a = if i == 0 { Prop::True } else { left[i - 1] };
            let c = if j == 0 { Prop::True } else { right[j - 1] };
            b.add(&[!a, !c, out[(i + j).min(size) - 1]])?;
        }
    }
    Ok(out)
}

pub fn encode(p: &PbLits, b: &mut CnfBuilder) -> Result<(), EncodeError> {
    let k = p.bound;
    if k < 0 {
        return b.add(&[]);
    }
    let target = k + 1;
    let groups: Vec<Vec<(i64, Lit)>> = p
        .groups
        .iter()
        .map(|g| g.iter().map(|&(w, l)| (w.min(target), l)).collect())
        .collect();
    let max_w = groups.iter().flatten().map(|t| t.0).max().unwrap_or(0);
    if max_w == 0 {
        return Ok(());
    }
    let top = 63 - max_w.leading_zeros() as usize;
    let unit = 1i64 << top;
    let m = (target + unit - 1) / unit;
    let offset = m * unit - target;

    // bucket[j]: one input per group having a weight with bit j
    let mut buckets: Vec<Vec<Prop>> = vec![Vec::new(); top + 1];
    for g in &groups {
        for (j, bucket) in buckets.iter_mut().enumerate() {
            let lits: Vec<Lit> = g.iter().filter(|t| t.0 >> j & 1 == 1).map(|t| t.1).collect();
            match lits.len() {
                0 => {}
                1 => bucket.push(Prop::Lit(lits[0])),
                _ => {
                    let y = b.new_var();
                    for l in lits {
                        b.add_lits(&[!l, y])?;
                    }
                    bucket.push(Prop::Lit(y));
                }
            }
        }
    }
    // outputs needed per level, top down
    let mut need = vec![0usize; top + 1];
    need[top] = m as usize;
    for j in (0..top).rev() {
        need[j] = need[j + 1].saturating_mul(2);
    }

    let mut carries: Vec<Prop> = Vec::new();
    for j in 0..=top {
        let constant = (offset >> j & 1) as usize;
        let mut inputs = std::mem::take(&mut buckets[j]);
        inputs.append(&mut carries);
        let cap = need[j].saturating_sub(constant);
        let counted = totalizer(&inputs, cap, b)?;
        // unary value of the level, including the constant input
        let level = |c: usize| -> Prop {
            if c <= constant {
                Prop::True
            } else {
                counted.get(c - constant - 1).copied().unwrap_or(Prop::False)
            }
        };
        if j == top {
            b.add(&[!level(m as usize)])?;
        } else {
            let available = counted.len() + constant;
            carries = (1..=available / 2).take(need[j + 1]).map(|i| level(2 * i)).collect();
        }
    }
    Ok(())
}
