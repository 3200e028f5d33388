//! At-most-one group detection and the PB(AMO) normal form.
//!
//! A PB(AMO) constraint is `Σ_g Σ_{(w,l)∈g} w·l ≤ k` with positive weights,
//! where the groups `g` are disjoint and at most one literal of each group is
//! true in any solution.

use std::collections::{BTreeMap, HashMap};

use crate::model::{Cmp, LinearConstraint, PreparedInstance, Term, TermExpr, VarId, VarKind, Variable};
use crate::model::ModelError;
use crate::varenc::Atom;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmoGroup {
    pub terms: Vec<(i64, Atom)>,
}

impl AmoGroup {
    pub fn max_weight(&self) -> i64 {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbAmoConstraint {
    pub groups: Vec<AmoGroup>,
    pub bound: i64,
    /// Pairs placed in a common group because of another constraint rather
    /// than the variables' own semantics; their exclusion is stated
    /// explicitly when encoding.
    pub derived_mutexes: Vec<(Atom, Atom)>,
}

impl PbAmoConstraint {
    pub fn num_terms(&self) -> usize {
        self.groups.iter().map(|g| g.terms.len()).sum()
    }

    pub fn max_sum(&self) -> i64 {
        self.groups.iter().map(AmoGroup::max_weight).sum()
    }

    /// Evaluates the left-hand side where `truth` gives each atom's value.
    pub fn lhs(&self, truth: impl Fn(Atom) -> bool) -> i64 {
        self.groups
            .iter()
            .flat_map(|g| g.terms.iter())
            .filter(|t| truth(t.1))
            .map(|t| t.0)
            .sum()
    }

    /// Groups in the instance-format comment syntax.
    pub fn describe(&self, vars: &[Variable]) -> String {
        let atom = |a: Atom| match a {
            Atom::True => "1".to_string(),
            Atom::False => "0".to_string(),
            Atom::Eq(x, v) => format!("({} = {})", vars[x.0].name, v),
            Atom::Ne(x, v) => format!("({} != {})", vars[x.0].name, v),
            Atom::Le(x, v) => format!("({} <= {})", vars[x.0].name, v),
            Atom::Gt(x, v) => format!("({} > {})", vars[x.0].name, v),
        };
        let mut out = String::new();
        for g in &self.groups {
            let parts: Vec<String> = g.terms.iter().map(|&(w, a)| format!("{}*{}", w, atom(a))).collect();
            out.push_str(&format!("# amo group: {}\n", parts.join(" + ")));
        }
        out.push_str(&format!("# bound: {}\n", self.bound));
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PbAmoResult {
    Constraint(PbAmoConstraint),
    True,
    False,
}

/// Per-constraint, per-variable contribution tables used for bounds
/// reasoning on pairs of literals.
#[derive(Clone, Debug)]
struct SideConstraint {
    source: usize,
    cmp: Cmp,
    bound: i64,
    /// variable → contribution of each domain value
    tables: BTreeMap<VarId, Vec<i64>>,
    min: i64,
    max: i64,
}

/// Answers "can these two literals both be true?" with respect to the
/// variables' semantics and every other constraint of the instance.
#[derive(Clone, Debug)]
pub struct AmoDetector {
    vars: Vec<Variable>,
    sides: Vec<SideConstraint>,
    by_var: HashMap<VarId, Vec<usize>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Mutex {
    None,
    Semantic,
    Derived,
}

impl AmoDetector {
    pub fn new(prep: &PreparedInstance) -> Self {
        Self::from_constraints(
            &prep.variables,
            prep.constraints.iter().map(|p| (p.source, &p.constraint)),
        )
    }

    /// A detector that knows no other constraints.
    pub fn empty(vars: &[Variable]) -> Self {
        Self::from_constraints(vars, std::iter::empty())
    }

    pub fn from_constraints<'a>(
        vars: &[Variable],
        constraints: impl Iterator<Item = (usize, &'a LinearConstraint)>,
    ) -> Self {
        let mut sides = Vec::new();
        let mut by_var: HashMap<VarId, Vec<usize>> = HashMap::new();
        'outer: for (source, c) in constraints {
            if c.cmp == Cmp::Ne {
                continue;
            }
            let mut tables: BTreeMap<VarId, Vec<i64>> = BTreeMap::new();
            for t in &c.terms {
                let x = t.expr.var();
                let dom = vars[x.0].domain.values();
                let tab = tables.entry(x).or_insert_with(|| vec![0; dom.len()]);
                for (slot, &v) in tab.iter_mut().zip(dom) {
                    let Some(add) = t.coef.checked_mul(t.expr.eval(v)).and_then(|a| slot.checked_add(a)) else {
                        continue 'outer;
                    };
                    *slot = add;
                }
            }
            let (mut min, mut max) = (0i64, 0i64);
            for tab in tables.values() {
                let lo = *tab.iter().min().unwrap();
                let hi = *tab.iter().max().unwrap();
                match (min.checked_add(lo), max.checked_add(hi)) {
                    (Some(a), Some(b)) => {
                        min = a;
                        max = b;
                    }
                    _ => continue 'outer,
                }
            }
            let idx = sides.len();
            for &x in tables.keys() {
                by_var.entry(x).or_default().push(idx);
            }
            sides.push(SideConstraint {
                source,
                cmp: c.cmp,
                bound: c.bound,
                tables,
                min,
                max,
            });
        }
        AmoDetector {
            vars: vars.to_vec(),
            sides,
            by_var,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    /// How (if at all) `a` and `b` are known to exclude each other. Constraints
    /// whose source index is `exclude` are ignored.
    pub fn mutex(&self, a: Atom, b: Atom, exclude: usize) -> Mutex {
        let (Some(xa), Some(xb)) = (a.var(), b.var()) else {
            return Mutex::None;
        };
        let dom = |x: VarId| self.vars[x.0].domain.values();
        if xa == xb && !dom(xa).iter().any(|&v| a.holds(v) && b.holds(v)) {
            return Mutex::Semantic;
        }
        let Some(cands) = self.by_var.get(&xa) else {
            return Mutex::None;
        };
        for &si in cands {
            let s = &self.sides[si];
            if s.source == exclude || !s.tables.contains_key(&xb) {
                continue;
            }
            let range = |x: VarId, pred: &dyn Fn(i64) -> bool| -> (i64, i64) {
                let tab = &s.tables[&x];
                let mut lo = i64::MAX;
                let mut hi = i64::MIN;
                for (&c, &v) in tab.iter().zip(dom(x)) {
                    if pred(v) {
                        lo = lo.min(c);
                        hi = hi.max(c);
                    }
                }
                (lo, hi)
            };
            let full = |x: VarId| {
                let tab = &s.tables[&x];
                (*tab.iter().min().unwrap(), *tab.iter().max().unwrap())
            };
            let (lo, hi) = if xa == xb {
                let (fl, fh) = full(xa);
                let (rl, rh) = range(xa, &|v| a.holds(v) && b.holds(v));
                (s.min - fl + rl, s.max - fh + rh)
            } else {
                let (fal, fah) = full(xa);
                let (fbl, fbh) = full(xb);
                let (ral, rah) = range(xa, &|v| a.holds(v));
                let (rbl, rbh) = range(xb, &|v| b.holds(v));
                if ral == i64::MAX || rbl == i64::MAX {
                    continue;
                }
                (s.min - fal - fbl + ral + rbl, s.max - fah - fbh + rah + rbh)
            };
            if lo == i64::MAX || lo > hi {
                continue;
            }
            let infeasible = match s.cmp {
                Cmp::Le => lo > s.bound,
                Cmp::Ge => hi < s.bound,
                Cmp::Eq => lo > s.bound || hi < s.bound,
                Cmp::Lt => lo >= s.bound,
                Cmp::Gt => hi <= s.bound,
                Cmp::Ne => false,
            };
            if infeasible {
                return Mutex::Derived;
            }
        }
        Mutex::None
    }

    /// Greedy clique cover of the mutex graph over `atoms`: vertices taken by
    /// decreasing degree (ties by index), each clique grown in the same order.
    /// Groups are returned sorted by their smallest member. The second result
    /// lists the within-group pairs whose exclusion is derived.
    pub fn partition(&self, atoms: &[Atom], exclude: usize) -> (Vec<Vec<usize>>, Vec<(usize, usize)>) {
        let n = atoms.len();
        let mut adj = vec![vec![Mutex::None; n]; n];
        let mut degree = vec![0usize; n];
        for i in 0..n {
            for j in i + 1..n {
                let m = self.mutex(atoms[i], atoms[j], exclude);
                if m != Mutex::None {
                    adj[i][j] = m;
                    adj[j][i] = m;
                    degree[i] += 1;
                    degree[j] += 1;
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (std::cmp::Reverse(degree[i]), i));
        let mut taken = vec![false; n];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &v in &order {
            if taken[v] {
                continue;
            }
            taken[v] = true;
            let mut clique = vec![v];
            for &u in &order {
                if !taken[u] && clique.iter().all(|&w| adj[u][w] != Mutex::None) {
                    taken[u] = true;
                    clique.push(u);
                }
            }
            clique.sort_unstable();
            groups.push(clique);
        }
        groups.sort_by_key(|g| g[0]);
        let mut derived = Vec::new();
        for g in &groups {
            for (a, &i) in g.iter().enumerate() {
                for &j in &g[a + 1..] {
                    if adj[i][j] == Mutex::Derived {
                        derived.push((i, j));
                    }
                }
            }
        }
        (groups, derived)
    }
}

/// The literal "`e` = 1" for a Boolean-valued expression.
pub fn expr_atom(e: &TermExpr, vars: &[Variable]) -> Atom {
    let x = e.var();
    let dom = vars[x.0].domain.values();
    let mask: Vec<bool> = dom.iter().map(|&v| e.eval(v) == 1).collect();
    Atom::from_mask(x, dom, &mask).expect("comparison literals are prefixes, suffixes or (co-)singletons")
}

/// Partition of the Boolean terms of `c` (term indices) into AMO groups.
pub fn detect_amo_groups(det: &AmoDetector, c: &LinearConstraint, exclude: usize) -> Vec<Vec<usize>> {
    let vars = det.variables();
    let idx: Vec<usize> = (0..c.terms.len())
        .filter(|&i| c.terms[i].expr.is_boolean(vars))
        .collect();
    let atoms: Vec<Atom> = idx.iter().map(|&i| expr_atom(&c.terms[i].expr, vars)).collect();
    let (groups, _) = det.partition(&atoms, exclude);
    groups
        .into_iter()
        .map(|g| g.into_iter().map(|i| idx[i]).collect())
        .collect()
}

fn is_integer_term(t: &Term, vars: &[Variable]) -> bool {
    matches!(t.expr, TermExpr::Var(x) if vars[x.0].kind == VarKind::Int)
}

/// Converts a normalized `≤`, `≥` or `=` constraint into one (two for `=`)
/// PB(AMO) constraints. AMO groups among the Boolean literals are found with
/// `det`, ignoring the constraint with source index `exclude`.
pub fn to_pbamo(
    c: &LinearConstraint,
    det: &AmoDetector,
    exclude: usize,
) -> Result<Vec<PbAmoResult>, ModelError> {
    pbamo_forms(c, det, exclude)?.into_iter().map(classify).collect()
}

/// The `≤`-forms behind [`to_pbamo`], before trivially true or false ones
/// are recognised.
pub fn pbamo_forms(
    c: &LinearConstraint,
    det: &AmoDetector,
    exclude: usize,
) -> Result<Vec<PbAmoConstraint>, ModelError> {
    let dirs: &[bool] = match c.cmp {
        Cmp::Le => &[false],
        Cmp::Ge => &[true],
        Cmp::Eq => &[false, true],
        other => panic!("to_pbamo expects <=, >= or =, got {other}"),
    };
    dirs.iter()
        .map(|&flip| {
            let terms: Vec<Term> = c
                .terms
                .iter()
                .map(|t| Term {
                    coef: if flip { -t.coef } else { t.coef },
                    expr: t.expr,
                })
                .collect();
            let k = if flip { c.bound.checked_neg() } else { Some(c.bound) };
            let k = k.ok_or(ModelError::Overflow("negating a bound"))?;
            le_form(&terms, k, det, exclude)
        })
        .collect()
}

fn le_form(terms: &[Term], mut k: i64, det: &AmoDetector, exclude: usize) -> Result<PbAmoConstraint, ModelError> {
    let vars = det.variables();
    let ov = || ModelError::Overflow("building the PB(AMO) form");
    // Variables carrying an integer term absorb every term over them.
    let mut int_tables: Vec<(VarId, Vec<i64>, usize)> = Vec::new();
    for (pos, t) in terms.iter().enumerate() {
        if is_integer_term(t, vars) && !int_tables.iter().any(|e| e.0 == t.expr.var()) {
            let x = t.expr.var();
            int_tables.push((x, vec![0; vars[x.0].domain.len()], pos));
        }
    }
    // (position of first term, weight, atom) for Boolean items
    let mut items: Vec<(usize, i64, Atom)> = Vec::new();
    for (pos, t) in terms.iter().enumerate() {
        let x = t.expr.var();
        if let Some(e) = int_tables.iter_mut().find(|e| e.0 == x) {
            for (slot, &v) in e.1.iter_mut().zip(vars[x.0].domain.values()) {
                *slot = t.coef.checked_mul(t.expr.eval(v)).and_then(|a| slot.checked_add(a)).ok_or_else(ov)?;
            }
            continue;
        }
        let atom = expr_atom(&t.expr, vars);
        let (w, atom) = if t.coef >= 0 {
            (t.coef, atom)
        } else {
            k = k.checked_sub(t.coef).ok_or_else(ov)?;
            (t.coef.checked_neg().ok_or_else(ov)?, !atom)
        };
        match atom {
            Atom::True => k = k.checked_sub(w).ok_or_else(ov)?,
            Atom::False => {}
            _ => match items.iter_mut().find(|it| it.2 == atom) {
                Some(it) => it.1 = it.1.checked_add(w).ok_or_else(ov)?,
                None => items.push((pos, w, atom)),
            },
        }
    }

    let mut groups: Vec<(usize, AmoGroup)> = Vec::new();
    for (x, tab, pos) in int_tables {
        let m = *tab.iter().min().unwrap();
        k = k.checked_sub(m).ok_or_else(ov)?;
        let dom = vars[x.0].domain.values();
        let g: Vec<(i64, Atom)> = tab
            .iter()
            .zip(dom)
            .filter(|(&w, _)| w > m)
            .map(|(&w, &v)| {
                let atom = if dom.len() == 2 {
                    // two-valued variables have a single literal
                    Atom::from_mask(x, dom, &[v == dom[0], v == dom[1]]).unwrap()
                } else {
                    Atom::Eq(x, v)
                };
                (w - m, atom)
            })
            .collect();
        if !g.is_empty() {
            groups.push((pos, AmoGroup { terms: g }));
        }
    }
    let atoms: Vec<Atom> = items.iter().map(|it| it.2).collect();
    let (parts, derived) = det.partition(&atoms, exclude);
    for p in parts {
        let pos = items[p[0]].0;
        groups.push((
            pos,
            AmoGroup {
                terms: p.iter().map(|&i| (items[i].1, items[i].2)).collect(),
            },
        ));
    }
    groups.sort_by_key(|g| g.0);
    let groups: Vec<AmoGroup> = groups.into_iter().map(|g| g.1).collect();
    Ok(PbAmoConstraint {
        groups,
        bound: k,
        derived_mutexes: derived.into_iter().map(|(i, j)| (atoms[i], atoms[j])).collect(),
    })
}

fn classify(p: PbAmoConstraint) -> Result<PbAmoResult, ModelError> {
    if p.bound < 0 {
        return Ok(PbAmoResult::False);
    }
    let max: i64 = p
        .groups
        .iter()
        .try_fold(0i64, |acc, g| acc.checked_add(g.max_weight()))
        .ok_or(ModelError::Overflow("building the PB(AMO) form"))?;
    if p.bound >= max {
        return Ok(PbAmoResult::True);
    }
    Ok(PbAmoResult::Constraint(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_instance, Domain, Instance};

    fn prepared(text: &str) -> (Instance, PreparedInstance) {
        let inst = parse_instance("t", text).unwrap();
        let prep = PreparedInstance::new(&inst).unwrap();
        (inst, prep)
    }

    fn single(c: &LinearConstraint, det: &AmoDetector) -> PbAmoConstraint {
        match to_pbamo(c, det, usize::MAX).unwrap().remove(0) {
            PbAmoResult::Constraint(p) => p,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn values_of_one_variable_form_a_group() {
        let (inst, prep) = prepared("int x 0..3\ncon 1*(x = 1) + 1*(x = 2) + 1*(x = 3) <= 1");
        let det = AmoDetector::new(&prep);
        assert_eq!(detect_amo_groups(&det, &inst.constraints[0], 0), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn independent_booleans_stay_apart() {
        let (inst, prep) = prepared("bool b1 b2\ncon 2*b1 + 3*b2 <= 4");
        let det = AmoDetector::new(&prep);
        assert_eq!(detect_amo_groups(&det, &inst.constraints[0], 0), vec![vec![0], vec![1]]);
        let empty = AmoDetector::empty(&inst.variables);
        assert_eq!(detect_amo_groups(&empty, &inst.constraints[0], 0), vec![vec![0], vec![1]]);
    }

    #[test]
    fn side_constraint_links_booleans() {
        let (inst, prep) = prepared("bool b1 b2 b3\ncon 2*b1 + 3*b2 + 4*b3 <= 5\ncon 1*b1 + 1*b2 <= 1");
        let det = AmoDetector::new(&prep);
        assert_eq!(detect_amo_groups(&det, &inst.constraints[0], 0), vec![vec![0, 1], vec![2]]);
        // a constraint is never its own witness
        assert_eq!(detect_amo_groups(&det, &inst.constraints[1], 1), vec![vec![0], vec![1]]);
        let p = match to_pbamo(&inst.constraints[0], &det, 0).unwrap().remove(0) {
            PbAmoResult::Constraint(p) => p,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(p.groups.len(), 2);
        assert_eq!(p.derived_mutexes.len(), 1);
    }

    #[test]
    fn integer_term_becomes_group() {
        // 2e + b <= 6, e in {1,2,3}
        let vars = vec![Variable::boolean("b"), Variable::int("e", Domain::range(1, 3).unwrap())];
        let c = LinearConstraint::new(
            vec![
                Term { coef: 2, expr: TermExpr::Var(VarId(1)) },
                Term { coef: 1, expr: TermExpr::Var(VarId(0)) },
            ],
            Cmp::Le,
            6,
        );
        let det = AmoDetector::empty(&vars);
        let p = single(&c, &det);
        assert_eq!(p.bound, 4);
        assert_eq!(p.groups[0].terms, vec![(2, Atom::Eq(VarId(1), 2)), (4, Atom::Eq(VarId(1), 3))]);
        assert_eq!(p.groups[1].terms, vec![(1, Atom::Gt(VarId(0), 0))]);
    }

    #[test]
    fn negative_boolean_coefficient_is_complemented() {
        let vars = vec![Variable::boolean("b"), Variable::boolean("c")];
        let c = LinearConstraint::new(
            vec![
                Term { coef: -3, expr: TermExpr::Var(VarId(0)) },
                Term { coef: 4, expr: TermExpr::Var(VarId(1)) },
            ],
            Cmp::Le,
            1,
        );
        let p = single(&c, &AmoDetector::empty(&vars));
        assert_eq!(p.bound, 4);
        assert_eq!(p.groups[0].terms, vec![(3, Atom::Le(VarId(0), 0))]);
    }

    #[test]
    fn equality_splits_in_two() {
        let vars = vec![Variable::boolean("x"), Variable::boolean("y")];
        let c = LinearConstraint::new(
            vec![
                Term { coef: 2, expr: TermExpr::Var(VarId(0)) },
                Term { coef: 3, expr: TermExpr::Var(VarId(1)) },
            ],
            Cmp::Eq,
            3,
        );
        let res = to_pbamo(&c, &AmoDetector::empty(&vars), usize::MAX).unwrap();
        assert_eq!(res.len(), 2);
        let mut sols = Vec::new();
        for x in 0..=1 {
            for y in 0..=1 {
                let ok = res.iter().all(|r| match r {
                    PbAmoResult::True => true,
                    PbAmoResult::False => false,
                    PbAmoResult::Constraint(p) => {
                        p.lhs(|a| a.holds(if a.var() == Some(VarId(0)) { x } else { y })) <= p.bound
                    }
                });
                if ok {
                    sols.push((x, y));
                }
            }
        }
        assert_eq!(sols, vec![(0, 1)]);
    }

    #[test]
    fn trivial_results() {
        let vars = vec![Variable::boolean("x"), Variable::boolean("y")];
        let mk = |k| {
            LinearConstraint::new(
                vec![
                    Term { coef: 2, expr: TermExpr::Var(VarId(0)) },
                    Term { coef: 3, expr: TermExpr::Var(VarId(1)) },
                ],
                Cmp::Le,
                k,
            )
        };
        let det = AmoDetector::empty(&vars);
        assert_eq!(to_pbamo(&mk(5), &det, 0).unwrap(), vec![PbAmoResult::True]);
        assert_eq!(to_pbamo(&mk(-1), &det, 0).unwrap(), vec![PbAmoResult::False]);
    }

    #[test]
    fn identical_literals_merge() {
        // b and (b = 1) denote the same literal
        let (inst, prep) = prepared("bool b c\ncon 2*b + 3*(b = 1) + 1*c <= 4");
        let det = AmoDetector::new(&prep);
        let p = single(&inst.constraints[0], &det);
        assert_eq!(p.num_terms(), 2);
        assert_eq!(p.groups[0].terms[0].0, 5);
    }
}
