//! Generalized totalizer encodings of PB(AMO) constraints: GGT (pairing by
//! the minRatio heuristic), GGTd (balanced tree) and RGGT (minRatio with
//! equivalent node values merged).

use std::collections::{BTreeSet, HashMap};

use crate::cnf::{CnfBuilder, Lit, Prop};
use crate::error::EncodeError;

use super::PbLits;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    MinRatio,
    Balanced,
}

/// Binary combination tree over the groups. Internal nodes are in merge
/// order, the last one being the root.
#[derive(Clone, Debug)]
struct Plan {
    /// node children; indices < groups are leaves
    merges: Vec<(usize, usize)>,
}

/// Attainable nonzero sums of a subtree, capped at `k + 1`.
fn combine(a: &BTreeSet<i64>, b: &BTreeSet<i64>, k: i64) -> BTreeSet<i64> {
    let mut out = BTreeSet::new();
    for &x in a.iter().chain(std::iter::once(&0)) {
        for &y in b.iter().chain(std::iter::once(&0)) {
            if x + y > 0 {
                out.insert((x + y).min(k + 1));
            }
        }
    }
    out
}

fn leaf_values(g: &[(i64, Lit)], k: i64) -> BTreeSet<i64> {
    g.iter().map(|&(w, _)| w.min(k + 1)).collect()
}

fn min_ratio_plan(leaves: Vec<BTreeSet<i64>>, k: i64) -> Plan {
    let n = leaves.len();
    let mut pending: Vec<(usize, BTreeSet<i64>)> = leaves.into_iter().enumerate().collect();
    let mut merges = Vec::new();
    while pending.len() > 1 {
        // minimise |combined| / (|l| + |r|), then |combined|, then (i, j)
        let mut best: Option<(usize, usize, usize, usize, BTreeSet<i64>)> = None;
        for i in 0..pending.len() {
            for j in i + 1..pending.len() {
                let c = combine(&pending[i].1, &pending[j].1, k);
                let den = pending[i].1.len() + pending[j].1.len();
                let better = match &best {
                    None => true,
                    Some((bi, bj, bnum, bden, _)) => {
                        let lhs = c.len() * bden;
                        let rhs = bnum * den;
                        lhs < rhs || (lhs == rhs && (c.len(), i, j) < (*bnum, *bi, *bj))
                    }
                };
                if better {
                    best = Some((i, j, c.len(), den, c));
                }
            }
        }
        let (i, j, _, _, c) = best.unwrap();
        let (ni, nj) = (pending[i].0, pending[j].0);
        pending.remove(j);
        pending.remove(i);
        pending.push((n + merges.len(), c));
        merges.push((ni, nj));
    }
    Plan { merges }
}

fn balanced_plan(n: usize) -> Plan {
    fn rec(lo: usize, hi: usize, merges: &mut Vec<(usize, usize)>, n: usize) -> usize {
        if hi - lo == 1 {
            return lo;
        }
        let mid = lo + (hi - lo).div_ceil(2);
        let a = rec(lo, mid, merges, n);
        let b = rec(mid, hi, merges, n);
        merges.push((a, b));
        n + merges.len() - 1
    }
    let mut merges = Vec::new();
    if n > 0 {
        rec(0, n, &mut merges, n);
    }
    Plan { merges }
}

/// Sums attainable outside each node (capped), for the value reduction.
fn outside_sums(plan: &Plan, subtree: &[BTreeSet<i64>], k: i64) -> Vec<BTreeSet<i64>> {
    let total = subtree.len();
    let mut out = vec![BTreeSet::new(); total];
    let root = total - 1;
    out[root] = BTreeSet::new();
    let n = total - plan.merges.len();
    for m in (0..plan.merges.len()).rev() {
        let node = n + m;
        let (a, b) = plan.merges[m];
        let parent = out[node].clone();
        out[a] = combine(&parent, &subtree[b], k);
        out[b] = combine(&parent, &subtree[a], k);
    }
    out
}

/// Maps each value of a node to the smallest value with the same behaviour
/// against every completion in `outside` (which implicitly contains 0).
fn representatives(values: &BTreeSet<i64>, outside: &BTreeSet<i64>, k: i64) -> impl Fn(i64) -> i64 {
    let mut rs: Vec<i64> = outside.iter().copied().filter(|&r| r <= k).collect();
    rs.push(0);
    rs.sort_unstable();
    rs.dedup();
    let threshold = move |v: i64| -> Option<i64> { rs.iter().copied().filter(|&r| r <= k - v).max() };
    let mut classes: Vec<(Option<i64>, i64)> = Vec::new();
    for &v in values {
        let t = threshold(v);
        if !classes.iter().any(|c| c.0 == t) {
            classes.push((t, v));
        }
    }
    move |v: i64| {
        let t = threshold(v);
        classes
            .iter()
            .find(|c| c.0 == t)
            .map(|c| c.1)
            .unwrap_or(k + 1)
    }
}

pub fn encode(p: &PbLits, shape: Shape, reduce: bool, b: &mut CnfBuilder) -> Result<(), EncodeError> {
    let k = p.bound;
    let n = p.groups.len();
    if n == 0 {
        return if k < 0 { b.add(&[]) } else { Ok(()) };
    }
    if n == 1 {
        for &(w, l) in &p.groups[0] {
            if w > k {
                b.add_lits(&[!l])?;
            }
        }
        return Ok(());
    }
    let leaves: Vec<BTreeSet<i64>> = p.groups.iter().map(|g| leaf_values(g, k)).collect();
    let plan = match shape {
        Shape::MinRatio => min_ratio_plan(leaves.clone(), k),
        Shape::Balanced => balanced_plan(n),
    };
    // raw attainable sums per node
    let mut subtree = leaves;
    for &(a, c) in &plan.merges {
        let s = combine(&subtree[a], &subtree[c], k);
        subtree.push(s);
    }
    let outside = if reduce {
        Some(outside_sums(&plan, &subtree, k))
    } else {
        None
    };
    let tables: Option<Vec<HashMap<i64, i64>>> = outside.map(|o| {
        (0..subtree.len())
            .map(|node| {
                let f = representatives(&subtree[node], &o[node], k);
                subtree[node].iter().map(|&v| (v, f(v))).collect()
            })
            .collect()
    });
    let rep = |node: usize, v: i64| -> i64 {
        match &tables {
            Some(t) => t[node].get(&v).copied().unwrap_or(v),
            None => v,
        }
    };

    // (value, literal) pairs every node exposes to its parent
    let mut exposed: Vec<Vec<(i64, Prop)>> = Vec::with_capacity(subtree.len());
    for (i, g) in p.groups.iter().enumerate() {
        exposed.push(g.iter().map(|&(w, l)| (rep(i, w.min(k + 1)), Prop::Lit(l))).collect());
    }
    let root = subtree.len() - 1;
    for (m, &(a, c)) in plan.merges.iter().enumerate() {
        let node = n + m;
        let is_root = node == root;
        let mut pairs: Vec<(i64, Prop, Prop)> = Vec::new();
        let zero = [(0i64, Prop::True)];
        for &(x, lx) in exposed[a].iter().chain(zero.iter()) {
            for &(y, ly) in exposed[c].iter().chain(zero.iter()) {
                if x + y == 0 {
                    continue;
                }
                let v = rep(node, (x + y).min(k + 1));
                if is_root && v <= k {
                    continue;
                }
                pairs.push((v, lx, ly));
            }
        }
        let mut values: Vec<i64> = pairs.iter().map(|t| t.0).collect();
        values.sort_unstable();
        values.dedup();
        let outs: Vec<(i64, Prop)> = values.iter().map(|&v| (v, Prop::Lit(b.new_var()))).collect();
        let out_of = |v: i64| outs.iter().find(|o| o.0 == v).unwrap().1;
        for &(v, lx, ly) in &pairs {
            b.add(&[!lx, !ly, out_of(v)])?;
        }
        if is_root {
            if let Some(&(_, o)) = outs.iter().find(|o| o.0 == k + 1) {
                b.add(&[!o])?;
            }
        }
        exposed.push(outs);
    }
    Ok(())
}
