//! A small DPLL solver with watched literals, used to verify encodings:
//! unit propagation under assumptions, satisfiability, and counting the
//! distinct projections of models.

use crate::cnf::Lit;

const UNSET: i8 = 0;

#[derive(Clone, Debug)]
pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    units: Vec<Lit>,
    value: Vec<i8>,
    trail: Vec<Lit>,
    levels: Vec<usize>,
    qhead: usize,
    /// An empty clause was given, or the unit clauses clash.
    inconsistent: bool,
}

impl Solver {
    pub fn new(num_vars: u32, clauses: &[Vec<Lit>]) -> Self {
        let n = num_vars as usize;
        let mut s = Solver {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            units: Vec::new(),
            value: vec![UNSET; n + 1],
            trail: Vec::new(),
            levels: Vec::new(),
            qhead: 0,
            inconsistent: false,
        };
        for c in clauses {
            let mut c = c.clone();
            c.sort();
            c.dedup();
            match c.len() {
                0 => s.inconsistent = true,
                1 => s.units.push(c[0]),
                _ => {
                    let idx = s.clauses.len();
                    s.watches[c[0].code()].push(idx);
                    s.watches[c[1].code()].push(idx);
                    s.clauses.push(c);
                }
            }
        }
        if !s.inconsistent {
            let units = s.units.clone();
            for u in units {
                if !s.enqueue(u) {
                    s.inconsistent = true;
                    break;
                }
            }
            if !s.inconsistent && !s.propagate() {
                s.inconsistent = true;
            }
        }
        s
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn lit_value(&self, l: Lit) -> Option<bool> {
        match self.value[l.var() as usize] {
            UNSET => None,
            v => Some((v > 0) == l.is_positive()),
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        self.inconsistent
    }

    fn enqueue(&mut self, l: Lit) -> bool {
        match self.lit_value(l) {
            Some(b) => b,
            None => {
                self.value[l.var() as usize] = if l.is_positive() { 1 } else { -1 };
                self.trail.push(l);
                true
            }
        }
    }

    /// Propagates the pending trail; false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let ci = ws[i];
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_val = match self.value[first.var() as usize] {
                    UNSET => None,
                    v => Some((v > 0) == first.is_positive()),
                };
                if first_val == Some(true) {
                    i += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let v = self.value[l.var() as usize];
                    if v == UNSET || ((v > 0) == l.is_positive()) {
                        clause.swap(1, k);
                        self.watches[clause[1].code()].push(ci);
                        ws.swap_remove(i);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                i += 1;
                if first_val == Some(false) {
                    conflict = true;
                    break;
                }
                self.value[first.var() as usize] = if first.is_positive() { 1 } else { -1 };
                self.trail.push(first);
            }
            let rest = std::mem::take(&mut self.watches[false_lit.code()]);
            ws.extend(rest);
            self.watches[false_lit.code()] = ws;
            if conflict {
                self.qhead = self.trail.len();
                return false;
            }
        }
        true
    }

    fn new_level(&mut self) {
        self.levels.push(self.trail.len());
    }

    fn backtrack(&mut self) {
        let mark = self.levels.pop().expect("backtrack below root");
        for l in self.trail.drain(mark..) {
            self.value[l.var() as usize] = UNSET;
        }
        self.qhead = mark;
    }

    /// Opens a level and asserts `lits`. Returns false on conflict; the level
    /// stays open either way and must be closed with [`Solver::pop`].
    pub fn push(&mut self, lits: &[Lit]) -> bool {
        self.new_level();
        if self.inconsistent {
            return false;
        }
        for &l in lits {
            if !self.enqueue(l) {
                return false;
            }
        }
        self.propagate()
    }

    pub fn pop(&mut self) {
        self.backtrack();
    }

    /// Satisfiability of the clauses together with everything currently
    /// asserted. The assignment is restored afterwards.
    pub fn solve(&mut self) -> bool {
        if self.inconsistent {
            return false;
        }
        self.search(1)
    }

    fn search(&mut self, from: usize) -> bool {
        let Some(v) = (from..=self.num_vars).find(|&v| self.value[v] == UNSET) else {
            return true;
        };
        for lit in [Lit(v as i32), Lit(-(v as i32))] {
            let ok = self.push(&[lit]) && self.search(v + 1);
            self.pop();
            if ok {
                return true;
            }
        }
        false
    }

    /// Literals fixed by unit propagation from `assumptions`, or `None` on
    /// conflict.
    pub fn unit_propagate(&mut self, assumptions: &[Lit]) -> Option<Vec<Lit>> {
        let ok = self.push(assumptions);
        let out = if ok { Some(self.trail.clone()) } else { None };
        self.pop();
        out
    }

    /// Number of assignments to the `groups` that extend to a model, where each
    /// group is a list of alternative literal cubes (one per value of a source
    /// variable). Branches are pruned by unit propagation.
    pub fn count_projected(&mut self, groups: &[Vec<Vec<Lit>>]) -> u64 {
        if self.inconsistent {
            return 0;
        }
        self.count_rec(groups, 0)
    }

    fn count_rec(&mut self, groups: &[Vec<Vec<Lit>>], i: usize) -> u64 {
        if i == groups.len() {
            return u64::from(self.solve());
        }
        let mut total = 0;
        for cube in &groups[i] {
            if self.push(cube) {
                total += self.count_rec(groups, i + 1);
            }
            self.pop();
        }
        total
    }
}

pub fn is_satisfiable(num_vars: u32, clauses: &[Vec<Lit>]) -> bool {
    Solver::new(num_vars, clauses).solve()
}
