//! Literals, clause accumulation and DIMACS input/output.

use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::EncodeError;

/// A nonzero DIMACS literal.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit(pub i32);

impl Lit {
    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    /// Dense index: `2·(var−1)` for positive, `+1` for negative.
    pub fn code(self) -> usize {
        ((self.var() as usize - 1) << 1) | usize::from(self.0 < 0)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A literal or a Boolean constant.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prop {
    True,
    False,
    Lit(Lit),
}

impl Prop {
    pub fn constant(b: bool) -> Prop {
        if b {
            Prop::True
        } else {
            Prop::False
        }
    }

    pub fn lit(self) -> Option<Lit> {
        match self {
            Prop::Lit(l) => Some(l),
            _ => None,
        }
    }
}

impl std::ops::Not for Prop {
    type Output = Prop;
    fn not(self) -> Prop {
        match self {
            Prop::True => Prop::False,
            Prop::False => Prop::True,
            Prop::Lit(l) => Prop::Lit(!l),
        }
    }
}

impl From<Lit> for Prop {
    fn from(l: Lit) -> Self {
        Prop::Lit(l)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::True => f.write_str("true"),
            Prop::False => f.write_str("false"),
            Prop::Lit(l) => write!(f, "{l}"),
        }
    }
}

pub const DEFAULT_CLAUSE_CAP: usize = 5_000_000;

/// Accumulates SAT variables and simplified clauses.
#[derive(Clone, Debug)]
pub struct CnfBuilder {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    cap: usize,
}

impl Default for CnfBuilder {
    fn default() -> Self {
        Self::new(DEFAULT_CLAUSE_CAP)
    }
}

impl CnfBuilder {
    pub fn new(cap: usize) -> Self {
        CnfBuilder {
            num_vars: 0,
            clauses: Vec::new(),
            cap,
        }
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        Lit(self.num_vars as i32)
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    /// Clause limit; exceeding it raises `SizeAbort`.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    /// Adds the disjunction of `props`. Constant-true disjuncts drop the
    /// clause, constant-false ones are removed, duplicate literals merged and
    /// tautologies skipped. An empty result is recorded as `v ∧ ¬v` over a
    /// fresh variable so the output stays valid DIMACS.
    pub fn add(&mut self, props: &[Prop]) -> Result<(), EncodeError> {
        let mut clause: Vec<Lit> = Vec::with_capacity(props.len());
        for p in props {
            match *p {
                Prop::True => return Ok(()),
                Prop::False => {}
                Prop::Lit(l) => clause.push(l),
            }
        }
        clause.sort_by_key(|l| (l.var(), l.0 < 0));
        clause.dedup();
        if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
            return Ok(());
        }
        if clause.is_empty() {
            let v = self.new_var();
            self.push(vec![v])?;
            return self.push(vec![!v]);
        }
        // keep the caller's literal order for readable output
        let mut ordered: Vec<Lit> = Vec::with_capacity(clause.len());
        for p in props {
            if let Prop::Lit(l) = *p {
                if !ordered.contains(&l) {
                    ordered.push(l);
                }
            }
        }
        self.push(ordered)
    }

    pub fn add_lits(&mut self, lits: &[Lit]) -> Result<(), EncodeError> {
        let props: Vec<Prop> = lits.iter().map(|&l| Prop::Lit(l)).collect();
        self.add(&props)
    }

    fn push(&mut self, clause: Vec<Lit>) -> Result<(), EncodeError> {
        if self.clauses.len() >= self.cap {
            return Err(EncodeError::SizeAbort { cap: self.cap });
        }
        self.clauses.push(clause);
        Ok(())
    }

    pub fn into_parts(self) -> (u32, Vec<Vec<Lit>>) {
        (self.num_vars, self.clauses)
    }
}

/// A plain CNF as read back from DIMACS.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Dimacs {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    pub comments: Vec<String>,
}

pub fn write_dimacs<W: Write>(
    out: &mut W,
    num_vars: u32,
    clauses: &[Vec<Lit>],
    comments: &[String],
) -> io::Result<()> {
    for c in comments {
        writeln!(out, "c {c}")?;
    }
    writeln!(out, "p cnf {} {}", num_vars, clauses.len())?;
    for clause in clauses {
        for l in clause {
            write!(out, "{} ", l.0)?;
        }
        writeln!(out, "0")?;
    }
    Ok(())
}

pub fn read_dimacs<R: BufRead>(input: R) -> io::Result<Dimacs> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut d = Dimacs::default();
    let mut declared: Option<usize> = None;
    let mut cur: Vec<Lit> = Vec::new();
    for line in input.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('c') {
            d.comments.push(c.trim_start().to_string());
            continue;
        }
        if let Some(h) = t.strip_prefix("p cnf") {
            let nums: Vec<&str> = h.split_whitespace().collect();
            if nums.len() != 2 {
                return Err(bad(format!("bad header `{t}`")));
            }
            d.num_vars = nums[0].parse().map_err(|_| bad(format!("bad header `{t}`")))?;
            declared = Some(nums[1].parse().map_err(|_| bad(format!("bad header `{t}`")))?);
            continue;
        }
        for tok in t.split_whitespace() {
            let v: i32 = tok.parse().map_err(|_| bad(format!("bad literal `{tok}`")))?;
            if v == 0 {
                d.clauses.push(std::mem::take(&mut cur));
            } else {
                if v.unsigned_abs() > d.num_vars {
                    return Err(bad(format!("literal {v} exceeds variable count")));
                }
                cur.push(Lit(v));
            }
        }
    }
    if !cur.is_empty() {
        d.clauses.push(cur);
    }
    match declared {
        Some(n) if n == d.clauses.len() => Ok(d),
        Some(n) => Err(bad(format!("header declares {n} clauses, found {}", d.clauses.len()))),
        None => Err(bad("missing `p cnf` header".into())),
    }
}
