//! The Tree encoding: a binary tree of order-encoded partial sums whose root
//! may have three children, encoding `≤`, `≥` and `=` natively.

use crate::cnf::{CnfBuilder, Prop};
use crate::error::EncodeError;
use crate::model::{Cmp, Domain, LinearConstraint, ModelError, VarId, Variable};
use crate::varenc::{encode_variable, Atom, Need, VarEncoding};

/// A term shifted so that its smallest value is 0.
#[derive(Clone, Debug)]
struct Leaf {
    var: VarId,
    domain: Vec<i64>,
    /// Shifted value of the term for each domain position of `var`.
    table: Vec<i64>,
    values: Vec<i64>,
}

impl Leaf {
    /// Atom for `sign·term ≤ b`.
    fn atom(&self, sign: i64, b: i64) -> Atom {
        let mask: Vec<bool> = self.table.iter().map(|&v| sign * v <= b).collect();
        Atom::from_mask(self.var, &self.domain, &mask).expect("term literals are intervals or (co-)singletons")
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NodeRef {
    Leaf(usize),
    Aux(usize),
}

#[derive(Clone, Debug)]
pub struct AuxNode {
    pub children: [NodeRef; 2],
    pub values: Vec<i64>,
}

/// Internal nodes in creation order plus the root's children.
#[derive(Clone, Debug)]
pub struct TreeShape {
    pub aux: Vec<AuxNode>,
    pub root: Vec<NodeRef>,
}

/// A constraint prepared for the Tree encoding.
#[derive(Clone, Debug)]
pub struct TreePlan {
    leaves: Vec<Leaf>,
    cmp: Cmp,
    bound: i64,
}

fn distinct_sorted(mut v: Vec<i64>) -> Vec<i64> {
    v.sort_unstable();
    v.dedup();
    v
}

/// One side of a generated sub-constraint: `sign·node`.
#[derive(Copy, Clone, Debug)]
struct View {
    sign: i64,
    node: NodeRef,
}

impl TreePlan {
    pub fn new(c: &LinearConstraint, vars: &[Variable]) -> Result<Self, ModelError> {
        assert!(
            matches!(c.cmp, Cmp::Le | Cmp::Ge | Cmp::Eq),
            "tree encoding expects <=, >= or ="
        );
        let ov = || ModelError::Overflow("shifting tree terms");
        let mut bound = c.bound;
        let mut leaves = Vec::with_capacity(c.terms.len());
        for t in &c.terms {
            let x = t.expr.var();
            let domain = vars[x.0].domain.values().to_vec();
            let raw = domain
                .iter()
                .map(|&v| t.coef.checked_mul(t.expr.eval(v)).ok_or_else(ov))
                .collect::<Result<Vec<i64>, _>>()?;
            let lo = *raw.iter().min().unwrap();
            bound = bound.checked_sub(lo).ok_or_else(ov)?;
            let table: Vec<i64> = raw.iter().map(|&v| v - lo).collect();
            let values = distinct_sorted(table.clone());
            leaves.push(Leaf {
                var: x,
                domain,
                table,
                values,
            });
        }
        Ok(TreePlan {
            leaves,
            cmp: c.cmp,
            bound,
        })
    }

    /// Bound after shifting every term to minimum 0.
    pub fn shifted_bound(&self) -> i64 {
        self.bound
    }

    /// Variable encodings the leaves require.
    pub fn needs(&self) -> Vec<(VarId, Need)> {
        self.leaves
            .iter()
            .filter(|l| l.values.len() >= 2)
            .map(|l| {
                let mut need = Need::default();
                for &b in &l.values[..l.values.len() - 1] {
                    need.merge(l.atom(1, b).need());
                }
                (l.var, need)
            })
            .collect()
    }

    fn values<'a>(&'a self, n: NodeRef, aux: &'a [AuxNode]) -> &'a [i64] {
        match n {
            NodeRef::Leaf(i) => &self.leaves[i].values,
            NodeRef::Aux(j) => &aux[j].values,
        }
    }

    /// While more than three nodes remain, the two with the fewest values
    /// (then smallest range, then position) are replaced by their sum, which
    /// is appended at the end.
    pub fn shape(&self) -> Result<TreeShape, ModelError> {
        let mut aux: Vec<AuxNode> = Vec::new();
        let mut s: Vec<NodeRef> = (0..self.leaves.len()).map(NodeRef::Leaf).collect();
        let prune = matches!(self.cmp, Cmp::Le | Cmp::Eq);
        while s.len() > 3 {
            let mut keyed: Vec<(usize, i64, usize)> = s
                .iter()
                .enumerate()
                .map(|(pos, &n)| {
                    let v = self.values(n, &aux);
                    (v.len(), v[v.len() - 1] - v[0], pos)
                })
                .collect();
            keyed.sort_unstable();
            let (p1, p2) = (keyed[0].2, keyed[1].2);
            let (n1, n2) = (s[p1], s[p2]);
            let mut sums = Vec::new();
            for &a in self.values(n1, &aux) {
                for &b in self.values(n2, &aux) {
                    let t = a
                        .checked_add(b)
                        .ok_or(ModelError::Overflow("summing tree node values"))?;
                    if !prune || t <= self.bound {
                        sums.push(t);
                    }
                }
            }
            let values = distinct_sorted(sums);
            s = s
                .iter()
                .enumerate()
                .filter(|&(pos, _)| pos != p1 && pos != p2)
                .map(|(_, &n)| n)
                .collect();
            s.push(NodeRef::Aux(aux.len()));
            aux.push(AuxNode {
                children: [n1, n2],
                values,
            });
        }
        Ok(TreeShape { aux, root: s })
    }

    fn max_sum(&self) -> i64 {
        self.leaves.iter().map(|l| l.values[l.values.len() - 1]).fold(0i64, i64::saturating_add)
    }

    /// Emits the encoding and returns the order encodings of the internal
    /// nodes, in creation order. `encs` holds the encodings of the CSP
    /// variables.
    pub fn encode(&self, encs: &[VarEncoding], b: &mut CnfBuilder) -> Result<Vec<VarEncoding>, EncodeError> {
        let le = matches!(self.cmp, Cmp::Le | Cmp::Eq);
        let ge = matches!(self.cmp, Cmp::Ge | Cmp::Eq);
        let max = self.max_sum();
        if le && self.bound < 0 || ge && self.bound > max {
            b.add(&[])?;
            return Ok(Vec::new());
        }
        let le = le && self.bound < max;
        let ge = ge && self.bound > 0;
        if !le && !ge {
            return Ok(Vec::new());
        }
        let shape = self.shape()?;
        let mut aux_encs = Vec::with_capacity(shape.aux.len());
        for node in &shape.aux {
            let var = Variable::int("tree", Domain::new(node.values.iter().copied()).expect("nonempty"));
            aux_encs.push(encode_variable(&var, Need::ORDER, b)?);
        }
        let cap = b.cap();
        let mut work = 0usize;
        let mut emit = |views: Vec<View>, k: i64, b: &mut CnfBuilder| -> Result<(), EncodeError> {
            self.schema(&shape, &aux_encs, encs, views, k, b, cap, &mut work)
        };
        for (j, node) in shape.aux.iter().enumerate() {
            let pos = |sign| {
                vec![
                    View { sign, node: node.children[0] },
                    View { sign, node: node.children[1] },
                    View { sign: -sign, node: NodeRef::Aux(j) },
                ]
            };
            if le {
                emit(pos(1), 0, b)?;
            }
            if ge {
                emit(pos(-1), 0, b)?;
            }
        }
        let root = |sign| -> Vec<View> { shape.root.iter().map(|&node| View { sign, node }).collect() };
        if le {
            emit(root(1), self.bound, b)?;
        }
        if ge {
            emit(root(-1), -self.bound, b)?;
        }
        Ok(aux_encs)
    }

    /// Clauses for `Σ views ≤ k` over the tuple set B: terms are sorted by
    /// number of values (then range, then position); each tuple `b` over all
    /// but the last term yields `⋁_{i<r} (tᵢ < bᵢ) ∨ (t_r ≤ k − Σ bᵢ)`.
    #[allow(clippy::too_many_arguments)]
    fn schema(
        &self,
        shape: &TreeShape,
        aux_encs: &[VarEncoding],
        encs: &[VarEncoding],
        views: Vec<View>,
        k: i64,
        b: &mut CnfBuilder,
        cap: usize,
        work: &mut usize,
    ) -> Result<(), EncodeError> {
        let vals: Vec<Vec<i64>> = views
            .iter()
            .map(|v| {
                let base = self.values(v.node, &shape.aux);
                let mut out: Vec<i64> = base.iter().map(|&x| v.sign * x).collect();
                out.sort_unstable();
                out
            })
            .collect();
        let mut order: Vec<usize> = (0..views.len()).collect();
        order.sort_by_key(|&i| (vals[i].len(), vals[i][vals[i].len() - 1] - vals[i][0], i));
        let views: Vec<View> = order.iter().map(|&i| views[i]).collect();
        let vals: Vec<Vec<i64>> = order.iter().map(|&i| vals[i].clone()).collect();

        let lit = |v: View, bound: i64| -> Prop {
            match v.node {
                NodeRef::Leaf(i) => self.leaves[i].atom(v.sign, bound).resolve(encs),
                NodeRef::Aux(j) => {
                    if v.sign > 0 {
                        aux_encs[j].le(bound)
                    } else {
                        // −a ≤ bound  ⇔  ¬(a ≤ −bound − 1)
                        !aux_encs[j].le(-bound - 1)
                    }
                }
            }
        };

        let r = views.len();
        let mut idx = vec![0usize; r - 1];
        loop {
            *work += 1;
            if *work > cap.saturating_mul(4).max(1 << 20) {
                return Err(EncodeError::SizeAbort { cap: b.cap() });
            }
            let mut clause = Vec::with_capacity(r);
            let mut rest = k;
            for i in 0..r - 1 {
                let bi = vals[i][idx[i]];
                rest -= bi;
                clause.push(lit(views[i], bi - 1));
            }
            clause.push(lit(views[r - 1], rest));
            b.add(&clause)?;
            // odometer over the first r−1 terms
            let mut i = 0;
            loop {
                if i == r - 1 {
                    return Ok(());
                }
                idx[i] += 1;
                if idx[i] < vals[i].len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
        }
    }
}
