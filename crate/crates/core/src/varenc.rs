//! Direct, order and channelled direct-order encodings of CSP variables.

use serde::{Deserialize, Serialize};

use crate::cnf::{CnfBuilder, Lit, Prop};
use crate::error::EncodeError;
use crate::model::{Cmp, VarId, Variable};

/// Which encodings a variable needs, collected from the constraints.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Need {
    pub direct: bool,
    pub order: bool,
}

impl Need {
    pub const DIRECT: Need = Need {
        direct: true,
        order: false,
    };
    pub const ORDER: Need = Need {
        direct: false,
        order: true,
    };

    pub fn merge(&mut self, other: Need) {
        self.direct |= other.direct;
        self.order |= other.order;
    }
}

/// Encoding literals of one variable, indexed by domain position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarEncoding {
    pub values: Vec<i64>,
    /// `direct[i]` stands for `x = values[i]`.
    pub direct: Option<Vec<Prop>>,
    /// `order[i]` stands for `x ≤ values[i]`; the last entry is constant true.
    pub order: Option<Vec<Prop>>,
    /// SAT variables owned by this encoding, including AMO helpers.
    pub sat_vars: u32,
    pub clauses: usize,
}

impl VarEncoding {
    /// Literal for `x = a`.
    pub fn eq(&self, a: i64) -> Prop {
        match self.values.binary_search(&a) {
            Err(_) => Prop::False,
            Ok(i) => match &self.direct {
                Some(d) => d[i],
                None => panic!("direct encoding of value {a} was not requested"),
            },
        }
    }

    /// Literal for `x ≤ a`.
    pub fn le(&self, a: i64) -> Prop {
        if a < self.values[0] {
            return Prop::False;
        }
        let i = match self.values.binary_search(&a) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        match &self.order {
            Some(o) => o[i],
            None => panic!("order encoding of value {a} was not requested"),
        }
    }

    /// Literal for `x op a`.
    pub fn cmp(&self, op: Cmp, a: i64) -> Prop {
        match op {
            Cmp::Eq => self.eq(a),
            Cmp::Ne => !self.eq(a),
            Cmp::Le => self.le(a),
            Cmp::Lt => self.le(a.saturating_sub(1)),
            Cmp::Gt => !self.le(a),
            Cmp::Ge => !self.le(a.saturating_sub(1)),
        }
    }

    /// Truth values of every encoding literal when `x = values[idx]`, as an
    /// assumption cube over the non-constant literals.
    pub fn cube(&self, idx: usize) -> Vec<Lit> {
        let mut out = Vec::new();
        let mut add = |p: Prop, truth: bool| {
            if let Prop::Lit(l) = p {
                let l = if truth { l } else { !l };
                if !out.contains(&l) {
                    out.push(l);
                }
            }
        };
        if let Some(d) = &self.direct {
            for (i, &p) in d.iter().enumerate() {
                add(p, i == idx);
            }
        }
        if let Some(o) = &self.order {
            for (i, &p) in o.iter().enumerate() {
                add(p, idx <= i);
            }
        }
        out
    }

    /// Lines of the form `var NAME = VALUE -> LIT` / `var NAME <= VALUE -> LIT`.
    pub fn projection_comments(&self, name: &str) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(d) = &self.direct {
            for (v, p) in self.values.iter().zip(d) {
                out.push(format!("var {name} = {v} -> {p}"));
            }
        }
        if let Some(o) = &self.order {
            for (v, p) in self.values.iter().zip(o).take(self.values.len() - 1) {
                out.push(format!("var {name} <= {v} -> {p}"));
            }
        }
        out
    }
}

/// A symbolic literal over one CSP variable, resolved to a SAT literal once
/// the variable encodings exist.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    True,
    False,
    Eq(VarId, i64),
    Ne(VarId, i64),
    Le(VarId, i64),
    Gt(VarId, i64),
}

impl std::ops::Not for Atom {
    type Output = Atom;
    fn not(self) -> Atom {
        match self {
            Atom::True => Atom::False,
            Atom::False => Atom::True,
            Atom::Eq(x, v) => Atom::Ne(x, v),
            Atom::Ne(x, v) => Atom::Eq(x, v),
            Atom::Le(x, v) => Atom::Gt(x, v),
            Atom::Gt(x, v) => Atom::Le(x, v),
        }
    }
}

impl Atom {
    /// Canonical atom for "x takes a value in `set`" where `set` is given as
    /// a membership mask over the domain. Prefixes become `Le`, suffixes
    /// `Gt`, singletons `Eq` and co-singletons `Ne`. Returns `None` for other
    /// shapes, which need more than one literal.
    pub fn from_mask(x: VarId, values: &[i64], mask: &[bool]) -> Option<Atom> {
        let n = values.len();
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Some(Atom::False);
        }
        if count == n {
            return Some(Atom::True);
        }
        if mask[..count].iter().all(|&m| m) {
            return Some(Atom::Le(x, values[count - 1]));
        }
        if mask[n - count..].iter().all(|&m| m) {
            return Some(Atom::Gt(x, values[n - count - 1]));
        }
        if count == 1 {
            let i = mask.iter().position(|&m| m).unwrap();
            return Some(Atom::Eq(x, values[i]));
        }
        if count == n - 1 {
            let i = mask.iter().position(|&m| !m).unwrap();
            return Some(Atom::Ne(x, values[i]));
        }
        None
    }

    pub fn var(self) -> Option<VarId> {
        match self {
            Atom::True | Atom::False => None,
            Atom::Eq(x, _) | Atom::Ne(x, _) | Atom::Le(x, _) | Atom::Gt(x, _) => Some(x),
        }
    }

    /// Whether the atom holds when its variable takes `value`.
    pub fn holds(self, value: i64) -> bool {
        match self {
            Atom::True => true,
            Atom::False => false,
            Atom::Eq(_, v) => value == v,
            Atom::Ne(_, v) => value != v,
            Atom::Le(_, v) => value <= v,
            Atom::Gt(_, v) => value > v,
        }
    }

    /// Encoding the variable must provide for this atom.
    pub fn need(self) -> Need {
        match self {
            Atom::Eq(..) | Atom::Ne(..) => Need::DIRECT,
            Atom::Le(..) | Atom::Gt(..) => Need::ORDER,
            Atom::True | Atom::False => Need::default(),
        }
    }

    pub fn resolve(self, encs: &[VarEncoding]) -> Prop {
        match self {
            Atom::True => Prop::True,
            Atom::False => Prop::False,
            Atom::Eq(x, v) => encs[x.0].eq(v),
            Atom::Ne(x, v) => !encs[x.0].eq(v),
            Atom::Le(x, v) => encs[x.0].le(v),
            Atom::Gt(x, v) => !encs[x.0].le(v),
        }
    }
}

/// Encodes `var` with the requested encodings. Boolean and two-valued
/// variables always get a single SAT variable serving as both.
pub fn encode_variable(var: &Variable, need: Need, b: &mut CnfBuilder) -> Result<VarEncoding, EncodeError> {
    let values = var.domain.values().to_vec();
    let n = values.len();
    let v0 = b.num_vars();
    let c0 = b.num_clauses();
    let (direct, order) = match n {
        1 => (Some(vec![Prop::True]), Some(vec![Prop::True])),
        2 => {
            let s = Prop::Lit(b.new_var());
            (Some(vec![!s, s]), Some(vec![!s, Prop::True]))
        }
        _ => {
            let need = if !need.direct && !need.order { Need::DIRECT } else { need };
            match (need.direct, need.order) {
                (true, false) => (Some(encode_direct(n, b)?), None),
                (false, true) => (None, Some(encode_order(n, b)?)),
                _ => {
                    let (d, o) = encode_channelled(n, b)?;
                    (Some(d), Some(o))
                }
            }
        }
    };
    Ok(VarEncoding {
        values,
        direct,
        order,
        sat_vars: b.num_vars() - v0,
        clauses: b.num_clauses() - c0,
    })
}

fn encode_direct(n: usize, b: &mut CnfBuilder) -> Result<Vec<Prop>, EncodeError> {
    let lits: Vec<Lit> = (0..n).map(|_| b.new_var()).collect();
    b.add_lits(&lits)?;
    amo(&lits, b)?;
    Ok(lits.into_iter().map(Prop::Lit).collect())
}

fn encode_order(n: usize, b: &mut CnfBuilder) -> Result<Vec<Prop>, EncodeError> {
    let lits: Vec<Lit> = (0..n - 1).map(|_| b.new_var()).collect();
    for w in lits.windows(2) {
        b.add_lits(&[!w[0], w[1]])?;
    }
    let mut o: Vec<Prop> = lits.into_iter().map(Prop::Lit).collect();
    o.push(Prop::True);
    Ok(o)
}

fn encode_channelled(n: usize, b: &mut CnfBuilder) -> Result<(Vec<Prop>, Vec<Prop>), EncodeError> {
    let order = encode_order(n, b)?;
    let mut direct = Vec::with_capacity(n);
    direct.push(order[0]);
    for _ in 1..n - 1 {
        direct.push(Prop::Lit(b.new_var()));
    }
    direct.push(!order[n - 2]);
    b.add(&direct)?;
    for i in 1..n - 1 {
        let (d, le, gt_prev) = (direct[i], order[i], !order[i - 1]);
        b.add(&[!le, !gt_prev, d])?;
        b.add(&[!d, le])?;
        b.add(&[!d, gt_prev])?;
    }
    Ok((direct, order))
}

/// At-most-one over `lits`: pairwise up to four literals, otherwise the
/// two-product construction on a ⌈√n⌉ × ⌈n/p⌉ grid.
pub fn amo(lits: &[Lit], b: &mut CnfBuilder) -> Result<(), EncodeError> {
    let n = lits.len();
    if n <= 4 {
        return pairwise_amo(lits, b);
    }
    let p = (n as f64).sqrt().ceil() as usize;
    let q = n.div_ceil(p);
    let rows: Vec<Lit> = (0..p).map(|_| b.new_var()).collect();
    let cols: Vec<Lit> = (0..q).map(|_| b.new_var()).collect();
    for (i, &l) in lits.iter().enumerate() {
        b.add_lits(&[!l, rows[i / q]])?;
        b.add_lits(&[!l, cols[i % q]])?;
    }
    amo(&rows, b)?;
    amo(&cols, b)
}

fn pairwise_amo(lits: &[Lit], b: &mut CnfBuilder) -> Result<(), EncodeError> {
    for i in 0..lits.len() {
        for j in i + 1..lits.len() {
            b.add_lits(&[!lits[i], !lits[j]])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::Solver;
    use crate::model::Domain;

    fn var(vals: &[i64]) -> Variable {
        Variable::int("x", Domain::new(vals.iter().copied()).unwrap())
    }

    /// Number of distinct assignments to the encoding literals in models.
    fn model_count(enc: &VarEncoding, b: &CnfBuilder) -> u64 {
        let mut s = Solver::new(b.num_vars(), b.clauses());
        let mut lits: Vec<Lit> = Vec::new();
        for p in enc.direct.iter().flatten().chain(enc.order.iter().flatten()) {
            if let Prop::Lit(l) = *p {
                if !lits.iter().any(|m| m.var() == l.var()) {
                    lits.push(Lit(l.var() as i32));
                }
            }
        }
        let groups: Vec<Vec<Vec<Lit>>> = lits.iter().map(|&l| vec![vec![l], vec![!l]]).collect();
        s.count_projected(&groups)
    }

    #[test]
    fn direct_three_values() {
        let mut b = CnfBuilder::default();
        let e = encode_variable(&var(&[1, 2, 3]), Need::DIRECT, &mut b).unwrap();
        assert_eq!(model_count(&e, &b), 3);
        assert_eq!(e.eq(9), Prop::False);
    }

    #[test]
    fn two_values_share_one_variable() {
        let mut b = CnfBuilder::default();
        let e = encode_variable(&var(&[4, 7]), Need::DIRECT, &mut b).unwrap();
        assert_eq!(e.sat_vars, 1);
        assert_eq!(e.eq(4), !e.eq(7));
        assert_eq!(e.le(4), e.eq(4));
    }

    #[test]
    fn order_encoding() {
        let mut b = CnfBuilder::default();
        let e = encode_variable(&var(&[1, 2, 3]), Need::ORDER, &mut b).unwrap();
        assert_eq!((e.sat_vars, e.clauses), (2, 1));
        assert_eq!(model_count(&e, &b), 3);
        assert_eq!(e.le(0), Prop::False);
        assert_eq!(e.le(3), Prop::True);

        let mut b = CnfBuilder::default();
        let e = encode_variable(&var(&[2, 5, 9]), Need::ORDER, &mut b).unwrap();
        let (l2, l5) = (e.le(2).lit().unwrap(), e.le(5).lit().unwrap());
        assert_eq!(b.clauses(), &[vec![!l2, l5]]);
        assert_eq!(e.le(3), e.le(2));
    }

    #[test]
    fn channelled_sizes() {
        for (n, expect) in [(3, 3), (4, 5), (5, 7), (6, 9)] {
            let vals: Vec<i64> = (0..n).collect();
            let mut b = CnfBuilder::default();
            let e = encode_variable(&var(&vals), Need { direct: true, order: true }, &mut b).unwrap();
            assert_eq!(e.sat_vars, expect);
            assert_eq!(model_count(&e, &b), n as u64);
        }
        let mut b = CnfBuilder::default();
        let e = encode_variable(&var(&[0, 1]), Need { direct: true, order: true }, &mut b).unwrap();
        assert_eq!(e.sat_vars, 1);
    }

    #[test]
    fn channelled_identities_and_propagation() {
        let mut b = CnfBuilder::default();
        let vals = [1, 3, 4, 8, 9];
        let e = encode_variable(&var(&vals), Need { direct: true, order: true }, &mut b).unwrap();
        assert_eq!(e.eq(1), e.le(1));
        assert_eq!(e.eq(9), e.cmp(Cmp::Gt, 8));
        let mut s = Solver::new(b.num_vars(), b.clauses());
        for &v in &vals {
            let fixed = s.unit_propagate(&[e.le(v).lit().unwrap_or(Lit(1))]);
            if e.le(v) == Prop::True {
                continue;
            }
            let fixed = fixed.unwrap();
            for &w in vals.iter().filter(|&&w| w > v) {
                let d = e.eq(w).lit().unwrap();
                assert!(fixed.contains(&!d), "x<={v} should falsify x={w}");
            }
        }
    }

    #[test]
    fn model_counts_all_modes() {
        for n in 1..=6i64 {
            let vals: Vec<i64> = (0..n).map(|i| i * 2 - 3).collect();
            for need in [Need::DIRECT, Need::ORDER, Need { direct: true, order: true }] {
                let mut b = CnfBuilder::default();
                let e = encode_variable(&var(&vals), need, &mut b).unwrap();
                let expect = if n == 1 { 1 } else { n as u64 };
                let got = if n == 1 { 1 } else { model_count(&e, &b) };
                assert_eq!(got, expect, "n={n} need={need:?}");
                let mut s = Solver::new(b.num_vars(), b.clauses());
                for i in 0..vals.len() {
                    assert!(s.push(&e.cube(i)));
                    assert!(s.solve());
                    s.pop();
                }
            }
        }
    }

    #[test]
    fn two_product_amo() {
        for n in 1..=12 {
            let mut b = CnfBuilder::default();
            let lits: Vec<Lit> = (0..n).map(|_| b.new_var()).collect();
            amo(&lits, &mut b).unwrap();
            let mut s = Solver::new(b.num_vars(), b.clauses());
            let groups: Vec<Vec<Vec<Lit>>> = lits.iter().map(|&l| vec![vec![l], vec![!l]]).collect();
            assert_eq!(s.count_projected(&groups), n as u64 + 1, "n={n}");
        }
    }
}
