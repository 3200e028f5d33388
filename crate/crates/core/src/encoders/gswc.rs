//! Generalized sequential weight counter. Register `s[i][v]` is implied when
//! the groups `0..=i` can contribute the (capped) prefix sum `v`.

use std::collections::BTreeMap;

use crate::cnf::{CnfBuilder, Prop};
use crate::error::EncodeError;

use super::PbLits;

pub fn encode(p: &PbLits, b: &mut CnfBuilder) -> Result<(), EncodeError> {
    let k = p.bound;
    let m = p.groups.len();
    if m == 0 {
        return if k < 0 { b.add(&[]) } else { Ok(()) };
    }
    let cap = |v: i64| v.min(k + 1);
    // registers of the previous layer: value -> literal
    let mut prev: BTreeMap<i64, Prop> = BTreeMap::new();
    for (i, g) in p.groups.iter().enumerate() {
        let last = i + 1 == m;
        let mut values: Vec<i64> = prev.keys().copied().collect();
        for &(w, _) in g {
            values.push(cap(w));
            for &v in prev.keys() {
                values.push(cap(v + w));
            }
        }
        values.sort_unstable();
        values.dedup();
        if last {
            values.retain(|&v| v == k + 1);
        }
        let cur: BTreeMap<i64, Prop> = values.iter().map(|&v| (v, Prop::Lit(b.new_var()))).collect();
        let reg = |v: i64| cur.get(&v).copied().unwrap_or(Prop::True);
        for (&v, &s) in &prev {
            if !last || v == k + 1 {
                b.add(&[!s, reg(v)])?;
            }
        }
        for &(w, l) in g {
            let l = Prop::Lit(l);
            if !last || cap(w) == k + 1 {
                b.add(&[!l, reg(cap(w))])?;
            }
            for (&v, &s) in &prev {
                if !last || cap(v + w) == k + 1 {
                    b.add(&[!s, !l, reg(cap(v + w))])?;
                }
            }
        }
        if last {
            if let Some(&s) = cur.get(&(k + 1)) {
                b.add(&[!s])?;
            }
        }
        prev = cur;
    }
    Ok(())
}
