//! Variables, linear constraints and the instance text format.
//!
//! An instance is a set of finite-domain variables plus a list of linear
//! constraints `Σ qᵢ·eᵢ ⋄ k`. A constraint is pseudo-Boolean (PB) when every
//! `eᵢ` is Boolean valued, and linear integer (LI) otherwise.
//!
//! Normalization is applied in a fixed order: `<`/`>` are turned into
//! `≤`/`≥`, zero terms are dropped, coefficients are divided by their GCD,
//! and finally `≠` constraints are rewritten through an auxiliary variable
//! (see [`eliminate_neq`]).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors produced while reading or transforming a model.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: undeclared variable `{name}`")]
    UndeclaredVariable { line: usize, name: String },
    #[error("line {line}: variable `{name}` has an empty domain")]
    EmptyDomain { line: usize, name: String },
    #[error("line {line}: duplicate declaration of `{name}`")]
    DuplicateVariable { line: usize, name: String },
    #[error("line {line}: term over `{name}` appears twice")]
    DuplicateTerm { line: usize, name: String },
    #[error("line {line}: {msg}")]
    IllTyped { line: usize, msg: String },
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
}

/// Index of a variable inside its [`Instance`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Bool,
    Int,
}

/// Finite, strictly increasing, nonempty set of integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Domain(Vec<i64>);

impl Domain {
    /// Builds a domain from arbitrary values; returns `None` when empty.
    pub fn new(values: impl IntoIterator<Item = i64>) -> Option<Self> {
        let set: BTreeSet<i64> = values.into_iter().collect();
        if set.is_empty() {
            None
        } else {
            Some(Domain(set.into_iter().collect()))
        }
    }

    pub fn boolean() -> Self {
        Domain(vec![0, 1])
    }

    pub fn range(lo: i64, hi: i64) -> Option<Self> {
        Self::new(lo..=hi)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> i64 {
        self.0[0]
    }

    pub fn max(&self) -> i64 {
        self.0[self.0.len() - 1]
    }

    pub fn contains(&self, v: i64) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn position(&self, v: i64) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn is_contiguous(&self) -> bool {
        (self.max() - self.min()) as usize + 1 == self.len()
    }

    pub fn without(&self, v: i64) -> Option<Self> {
        Self::new(self.0.iter().copied().filter(|&x| x != v))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub domain: Domain,
}

impl Variable {
    pub fn boolean(name: impl Into<String>) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Bool,
            domain: Domain::boolean(),
        }
    }

    pub fn int(name: impl Into<String>, domain: Domain) -> Self {
        Variable {
            name: name.into(),
            kind: VarKind::Int,
            domain,
        }
    }

    pub fn is_bool(&self) -> bool {
        self.kind == VarKind::Bool
    }
}

/// Comparison operator used both by constraints and by comparison terms.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Cmp {
    pub const ALL: [Cmp; 6] = [Cmp::Lt, Cmp::Le, Cmp::Eq, Cmp::Ne, Cmp::Ge, Cmp::Gt];

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ne => lhs != rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }

    fn parse(s: &str) -> Option<Cmp> {
        Some(match s {
            "<" => Cmp::Lt,
            "<=" => Cmp::Le,
            "=" | "==" => Cmp::Eq,
            "!=" => Cmp::Ne,
            ">=" => Cmp::Ge,
            ">" => Cmp::Gt,
            _ => return None,
        })
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A simple expression over one variable.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TermExpr {
    Var(VarId),
    /// Negation of a Boolean variable.
    Not(VarId),
    /// Reified comparison `(x op rhs)`, valued 0 or 1.
    Cmp { var: VarId, op: Cmp, rhs: i64 },
}

impl TermExpr {
    pub fn var(&self) -> VarId {
        match *self {
            TermExpr::Var(v) | TermExpr::Not(v) => v,
            TermExpr::Cmp { var, .. } => var,
        }
    }

    /// Value of the expression when its variable takes `value`.
    pub fn eval(&self, value: i64) -> i64 {
        match *self {
            TermExpr::Var(_) => value,
            TermExpr::Not(_) => 1 - value,
            TermExpr::Cmp { op, rhs, .. } => i64::from(op.holds(value, rhs)),
        }
    }

    /// True for expressions that only take values in {0,1} by construction.
    pub fn is_boolean(&self, vars: &[Variable]) -> bool {
        match *self {
            TermExpr::Var(v) => vars[v.0].is_bool(),
            TermExpr::Not(_) | TermExpr::Cmp { .. } => true,
        }
    }

    /// Sorted set of values the expression can take.
    pub fn values(&self, vars: &[Variable]) -> Vec<i64> {
        let dom = &vars[self.var().0].domain;
        let set: BTreeSet<i64> = dom.values().iter().map(|&v| self.eval(v)).collect();
        set.into_iter().collect()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub coef: i64,
    pub expr: TermExpr,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<Term>,
    pub cmp: Cmp,
    pub bound: i64,
}

impl LinearConstraint {
    pub fn new(terms: Vec<Term>, cmp: Cmp, bound: i64) -> Self {
        LinearConstraint { terms, cmp, bound }
    }

    /// Checked evaluation of the left-hand side under a full assignment.
    pub fn lhs(&self, assignment: &[i64]) -> Option<i64> {
        self.terms.iter().try_fold(0i64, |acc, t| {
            let v = t.expr.eval(assignment[t.expr.var().0]);
            acc.checked_add(t.coef.checked_mul(v)?)
        })
    }

    pub fn is_satisfied(&self, assignment: &[i64]) -> bool {
        match self.lhs(assignment) {
            Some(lhs) => self.cmp.holds(lhs, self.bound),
            None => false,
        }
    }

    pub fn is_pb(&self, vars: &[Variable]) -> bool {
        self.terms.iter().all(|t| t.expr.is_boolean(vars))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstraintClass {
    Pb,
    Li,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Sorted by name.
    pub variables: Vec<Variable>,
    /// In source order.
    pub constraints: Vec<LinearConstraint>,
}

impl Instance {
    pub fn var(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables
            .binary_search_by(|v| v.name.as_str().cmp(name))
            .ok()
            .map(VarId)
    }

    pub fn class_of(&self, c: &LinearConstraint) -> ConstraintClass {
        if c.is_pb(&self.variables) {
            ConstraintClass::Pb
        } else {
            ConstraintClass::Li
        }
    }

    pub fn pb_constraints(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.constraints
            .iter()
            .filter(|c| self.class_of(c) == ConstraintClass::Pb)
    }

    pub fn li_constraints(&self) -> impl Iterator<Item = &LinearConstraint> {
        self.constraints
            .iter()
            .filter(|c| self.class_of(c) == ConstraintClass::Li)
    }

    /// Builds an instance from unsorted variables, remapping variable ids in
    /// the constraints so that variables end up sorted by name.
    pub fn from_parts(
        name: impl Into<String>,
        variables: Vec<Variable>,
        constraints: Vec<LinearConstraint>,
    ) -> Self {
        let mut order: Vec<usize> = (0..variables.len()).collect();
        order.sort_by(|&a, &b| variables[a].name.cmp(&variables[b].name));
        let mut remap = vec![0; variables.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let sorted = order.iter().map(|&i| variables[i].clone()).collect();
        let map = |v: VarId| VarId(remap[v.0]);
        let constraints = constraints
            .into_iter()
            .map(|c| LinearConstraint {
                terms: c
                    .terms
                    .iter()
                    .map(|t| Term {
                        coef: t.coef,
                        expr: match t.expr {
                            TermExpr::Var(v) => TermExpr::Var(map(v)),
                            TermExpr::Not(v) => TermExpr::Not(map(v)),
                            TermExpr::Cmp { var, op, rhs } => TermExpr::Cmp {
                                var: map(var),
                                op,
                                rhs,
                            },
                        },
                    })
                    .collect(),
                ..c
            })
            .collect();
        Instance {
            name: name.into(),
            variables: sorted,
            constraints,
        }
    }

    /// Number of full assignments (product of domain sizes), saturating.
    pub fn assignment_count(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain.len() as u128))
    }

    /// Writes the instance in the canonical text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.variables {
            match v.kind {
                VarKind::Bool => out.push_str(&format!("bool {}\n", v.name)),
                VarKind::Int => {
                    let d = &v.domain;
                    if d.is_contiguous() && d.len() > 1 {
                        out.push_str(&format!("int {} {}..{}\n", v.name, d.min(), d.max()));
                    } else {
                        let vals: Vec<String> = d.values().iter().map(|x| x.to_string()).collect();
                        out.push_str(&format!("int {} {{{}}}\n", v.name, vals.join(",")));
                    }
                }
            }
        }
        for c in &self.constraints {
            out.push_str("con ");
            out.push_str(&self.format_constraint(c));
            out.push('\n');
        }
        out
    }

    pub fn format_constraint(&self, c: &LinearConstraint) -> String {
        let name = |v: VarId| self.variables[v.0].name.as_str();
        let terms: Vec<String> = c
            .terms
            .iter()
            .map(|t| {
                let e = match t.expr {
                    TermExpr::Var(v) => name(v).to_string(),
                    TermExpr::Not(v) => format!("!{}", name(v)),
                    TermExpr::Cmp { var, op, rhs } => format!("({} {} {})", name(var), op, rhs),
                };
                format!("{}*{}", t.coef, e)
            })
            .collect();
        format!("{} {} {}", terms.join(" + "), c.cmp, c.bound)
    }
}

/// Parses the instance text format.
///
/// ```text
/// int x 1..3
/// int y {2,5,9}
/// bool b1 b2
/// con 2*b1 + 3*(x >= 2) + -1*!b2 <= 4   # comment
/// ```
pub fn parse_instance(name: &str, text: &str) -> Result<Instance, ModelError> {
    let mut variables: Vec<Variable> = Vec::new();
    let mut by_name: HashMap<String, VarId> = HashMap::new();
    let mut pending: Vec<(usize, &str)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match head {
            "bool" => {
                if rest.is_empty() {
                    return Err(syntax(line_no, "`bool` needs at least one name"));
                }
                for n in rest.split_whitespace() {
                    declare(&mut variables, &mut by_name, line_no, Variable::boolean(check_ident(line_no, n)?))?;
                }
            }
            "int" => {
                let (n, dom) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| syntax(line_no, "expected `int NAME DOMAIN`"))?;
                let n = check_ident(line_no, n)?;
                let domain = parse_domain(line_no, n, dom.trim())?;
                declare(&mut variables, &mut by_name, line_no, Variable::int(n, domain))?;
            }
            "con" => pending.push((line_no, rest)),
            other => return Err(syntax(line_no, &format!("unknown directive `{other}`"))),
        }
    }

    let mut constraints = Vec::with_capacity(pending.len());
    for (line_no, body) in pending {
        constraints.push(parse_constraint(line_no, body, &variables, &by_name)?);
    }
    Ok(Instance::from_parts(name, variables, constraints))
}

fn syntax(line: usize, msg: &str) -> ModelError {
    ModelError::Syntax {
        line,
        msg: msg.to_string(),
    }
}

fn check_ident(line: usize, s: &str) -> Result<&str, ModelError> {
    let ok = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '[' || c == ']');
    if ok {
        Ok(s)
    } else {
        Err(syntax(line, &format!("invalid identifier `{s}`")))
    }
}

fn declare(
    variables: &mut Vec<Variable>,
    by_name: &mut HashMap<String, VarId>,
    line: usize,
    v: Variable,
) -> Result<(), ModelError> {
    if by_name.contains_key(&v.name) {
        return Err(ModelError::DuplicateVariable { line, name: v.name });
    }
    by_name.insert(v.name.clone(), VarId(variables.len()));
    variables.push(v);
    Ok(())
}

fn parse_int(line: usize, s: &str) -> Result<i64, ModelError> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| syntax(line, &format!("expected an integer, found `{}`", s.trim())))
}

fn parse_domain(line: usize, name: &str, s: &str) -> Result<Domain, ModelError> {
    let empty = || ModelError::EmptyDomain {
        line,
        name: name.to_string(),
    };
    if let Some(inner) = s.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| syntax(line, "unterminated `{`"))?;
        if inner.trim().is_empty() {
            return Err(empty());
        }
        let vals = inner
            .split(',')
            .map(|x| parse_int(line, x))
            .collect::<Result<Vec<_>, _>>()?;
        Domain::new(vals).ok_or_else(empty)
    } else if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (parse_int(line, lo)?, parse_int(line, hi)?);
        Domain::range(lo, hi).ok_or_else(empty)
    } else {
        Err(syntax(line, &format!("bad domain `{s}`")))
    }
}

/// Splits `a + b - c` into signed pieces, respecting parentheses.
fn split_terms(s: &str) -> Vec<(bool, String)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut negate = false;
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '(' => {
                depth += 1;
                cur.push(c);
            }
            ')' => {
                depth -= 1;
                cur.push(c);
            }
            '+' | '-' if depth == 0 => {
                // a sign directly before a digit belongs to a coefficient
                let prev_is_star = cur.trim_end().ends_with('*');
                if c == '-' && (cur.trim().is_empty() || prev_is_star) {
                    cur.push(c);
                } else {
                    if !cur.trim().is_empty() {
                        out.push((negate, cur.trim().to_string()));
                    }
                    cur.clear();
                    negate = c == '-';
                }
            }
            _ => cur.push(c),
        }
        i += 1;
    }
    if !cur.trim().is_empty() {
        out.push((negate, cur.trim().to_string()));
    }
    out
}

fn parse_constraint(
    line: usize,
    body: &str,
    vars: &[Variable],
    by_name: &HashMap<String, VarId>,
) -> Result<LinearConstraint, ModelError> {
    // The comparator is the last top-level operator token.
    let tokens: Vec<&str> = body.split_whitespace().collect();
    if tokens.len() < 3 {
        return Err(syntax(line, "expected `SUM CMP CONST`"));
    }
    let bound = parse_int(line, tokens[tokens.len() - 1])?;
    let cmp = Cmp::parse(tokens[tokens.len() - 2])
        .ok_or_else(|| syntax(line, &format!("expected comparator, found `{}`", tokens[tokens.len() - 2])))?;
    let lhs = tokens[..tokens.len() - 2].join(" ");

    let lookup = |n: &str| -> Result<VarId, ModelError> {
        by_name
            .get(n)
            .copied()
            .ok_or_else(|| ModelError::UndeclaredVariable {
                line,
                name: n.to_string(),
            })
    };

    let mut terms: Vec<Term> = Vec::new();
    for (negate, piece) in split_terms(&lhs) {
        let (coef, expr_src) = match piece.split_once('*') {
            Some((q, e)) => (parse_int(line, q)?, e.trim()),
            None => (1, piece.as_str()),
        };
        let coef = if negate {
            coef.checked_neg().ok_or(ModelError::Overflow("negating a coefficient"))?
        } else {
            coef
        };
        let expr = if let Some(inner) = expr_src.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| syntax(line, "unbalanced parentheses"))?;
            let parts: Vec<&str> = inner.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(syntax(line, "comparison term must be `(NAME CMP CONST)`"));
            }
            let var = lookup(parts[0])?;
            let op = Cmp::parse(parts[1]).ok_or_else(|| syntax(line, "bad comparison operator"))?;
            TermExpr::Cmp {
                var,
                op,
                rhs: parse_int(line, parts[2])?,
            }
        } else if let Some(n) = expr_src.strip_prefix('!') {
            let v = lookup(n.trim())?;
            if !vars[v.0].is_bool() {
                return Err(ModelError::IllTyped {
                    line,
                    msg: format!("`!{}` negates a non-Boolean variable", n.trim()),
                });
            }
            TermExpr::Not(v)
        } else {
            TermExpr::Var(lookup(expr_src)?)
        };
        if terms.iter().any(|t| t.expr == expr) {
            return Err(ModelError::DuplicateTerm {
                line,
                name: vars[expr.var().0].name.clone(),
            });
        }
        terms.push(Term { coef, expr });
    }
    if terms.is_empty() {
        return Err(syntax(line, "constraint has no terms"));
    }
    Ok(LinearConstraint::new(terms, cmp, bound))
}

/// Result of encoding-independent normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Constraint(LinearConstraint),
    True,
    False,
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// `<`/`>` rewrite, zero-term removal and GCD division.
///
/// The result has comparator in {≤, =, ≠, ≥} and coprime coefficients.
pub fn normalize_common(c: &LinearConstraint) -> Result<Verdict, ModelError> {
    let overflow = || ModelError::Overflow("normalizing a constraint");
    let (cmp, mut k) = match c.cmp {
        Cmp::Lt => (Cmp::Le, c.bound.checked_sub(1).ok_or_else(overflow)?),
        Cmp::Gt => (Cmp::Ge, c.bound.checked_add(1).ok_or_else(overflow)?),
        other => (other, c.bound),
    };
    let mut terms: Vec<Term> = c.terms.iter().copied().filter(|t| t.coef != 0).collect();
    if terms.is_empty() {
        return Ok(if cmp.holds(0, k) { Verdict::True } else { Verdict::False });
    }
    let g = terms.iter().fold(0, |g, t| gcd(g, t.coef));
    if g > 1 {
        for t in &mut terms {
            t.coef /= g;
        }
        match cmp {
            Cmp::Le => k = k.div_euclid(g),
            Cmp::Ge => k = -((-k).div_euclid(g)),
            Cmp::Eq | Cmp::Ne => {
                if k.rem_euclid(g) != 0 {
                    return Ok(if cmp == Cmp::Eq { Verdict::False } else { Verdict::True });
                }
                k /= g;
            }
            Cmp::Lt | Cmp::Gt => unreachable!(),
        }
    }
    Ok(Verdict::Constraint(LinearConstraint::new(terms, cmp, k)))
}

/// Every value the left-hand side of `c` can take.
pub fn sum_domain(c: &LinearConstraint, vars: &[Variable]) -> Result<Vec<i64>, ModelError> {
    let mut sums: BTreeSet<i64> = BTreeSet::from([0]);
    for t in &c.terms {
        let vals = t.expr.values(vars);
        let mut next = BTreeSet::new();
        for &s in &sums {
            for &v in &vals {
                let tv = t
                    .coef
                    .checked_mul(v)
                    .ok_or(ModelError::Overflow("enumerating sum values"))?;
                next.insert(s.checked_add(tv).ok_or(ModelError::Overflow("enumerating sum values"))?);
            }
        }
        sums = next;
    }
    Ok(sums.into_iter().collect())
}

/// Rewrite of a top-level `Σ qᵢeᵢ ≠ k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NeqRewrite {
    /// `aux` ranges over the sum values except `k`; `equality` is `Σ qᵢeᵢ − aux = 0`.
    Rewritten {
        aux: Variable,
        equality: LinearConstraint,
    },
    /// The sum can only take the value `k`.
    Unsatisfiable,
}

/// Replaces a `≠` constraint by an equality with a fresh integer variable
/// whose domain excludes the forbidden value. `aux_id` is the id the new
/// variable will receive.
pub fn eliminate_neq(
    c: &LinearConstraint,
    vars: &[Variable],
    aux_name: &str,
    aux_id: VarId,
) -> Result<NeqRewrite, ModelError> {
    assert_eq!(c.cmp, Cmp::Ne, "eliminate_neq expects a `!=` constraint");
    let sums = sum_domain(c, vars)?;
    let Some(domain) = Domain::new(sums.into_iter().filter(|&s| s != c.bound)) else {
        return Ok(NeqRewrite::Unsatisfiable);
    };
    let mut terms = c.terms.clone();
    terms.push(Term {
        coef: -1,
        expr: TermExpr::Var(aux_id),
    });
    Ok(NeqRewrite::Rewritten {
        aux: Variable::int(aux_name, domain),
        equality: LinearConstraint::new(terms, Cmp::Eq, 0),
    })
}

/// A normalized top-level constraint together with the index of the source
/// constraint it came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prepared {
    pub source: usize,
    pub constraint: LinearConstraint,
    pub class: ConstraintClass,
}

/// An instance after normalization and `≠` elimination. Auxiliary variables
/// introduced by the rewrite are appended after the source variables.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub variables: Vec<Variable>,
    pub source_vars: usize,
    pub constraints: Vec<Prepared>,
    /// Index of a source constraint that normalized to false, if any.
    pub infeasible: Option<usize>,
}

impl PreparedInstance {
    pub fn new(inst: &Instance) -> Result<Self, ModelError> {
        let mut variables = inst.variables.clone();
        let mut constraints = Vec::new();
        let mut infeasible = None;
        let mut aux_count: BTreeMap<usize, usize> = BTreeMap::new();
        for (i, c) in inst.constraints.iter().enumerate() {
            match normalize_common(c)? {
                Verdict::True => {}
                Verdict::False => {
                    infeasible.get_or_insert(i);
                }
                Verdict::Constraint(n) if n.cmp == Cmp::Ne => {
                    let id = VarId(variables.len());
                    let n_aux = aux_count.entry(i).or_default();
                    let name = format!("__neq{}_{}", i, n_aux);
                    *n_aux += 1;
                    match eliminate_neq(&n, &variables, &name, id)? {
                        NeqRewrite::Unsatisfiable => {
                            infeasible.get_or_insert(i);
                        }
                        NeqRewrite::Rewritten { aux, equality } => {
                            variables.push(aux);
                            constraints.push(Prepared {
                                source: i,
                                constraint: equality,
                                class: ConstraintClass::Li,
                            });
                        }
                    }
                }
                Verdict::Constraint(n) => {
                    let class = if n.is_pb(&variables) {
                        ConstraintClass::Pb
                    } else {
                        ConstraintClass::Li
                    };
                    constraints.push(Prepared {
                        source: i,
                        constraint: n,
                        class,
                    });
                }
            }
        }
        Ok(PreparedInstance {
            source_vars: inst.variables.len(),
            variables,
            constraints,
            infeasible,
        })
    }
}
