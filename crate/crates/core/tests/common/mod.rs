#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::IndexedRandom;
use rand::Rng;
use satenc::check::Solver;
use satenc::encoders::brute_force_count;
use satenc::{encode_instance, parse_instance, Config, Instance, DEFAULT_CLAUSE_CAP};

const CMPS: [&str; 6] = ["<", "<=", "=", "!=", ">=", ">"];

/// Term as (coefficient, text, per-assignment evaluator input: var index and
/// value table over the variable's domain).
struct GenTerm {
    coef: i64,
    text: String,
    var: usize,
    table: Vec<i64>,
}

fn cmp_holds(op: &str, a: i64, b: i64) -> bool {
    match op {
        "<" => a < b,
        "<=" => a <= b,
        "=" => a == b,
        "!=" => a != b,
        ">=" => a >= b,
        _ => a > b,
    }
}

fn pick_bound<R: Rng>(rng: &mut R, terms: &[GenTerm]) -> i64 {
    let lo: i64 = terms.iter().map(|t| t.table.iter().map(|&v| t.coef * v).min().unwrap()).sum();
    let hi: i64 = terms.iter().map(|t| t.table.iter().map(|&v| t.coef * v).max().unwrap()).sum();
    rng.random_range(lo - 1..=hi + 1)
}

fn render(terms: &[GenTerm]) -> String {
    terms
        .iter()
        .map(|t| format!("{}*{}", t.coef, t.text))
        .collect::<Vec<_>>()
        .join(" + ")
}

fn coef<R: Rng>(rng: &mut R) -> i64 {
    loop {
        let c = rng.random_range(-10..=10);
        if c != 0 || rng.random_bool(0.05) {
            return c;
        }
    }
}

/// Random small instance: one main constraint of arity ≤ 6 over Booleans and
/// integers with domains of size ≤ 4, any comparator, optionally preceded by
/// an at-most-one side constraint over some of its Booleans.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let text = random_text(rng, "");
    parse_instance("random", &text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

/// Instance text as for [`random_instance`], with every name prefixed.
pub fn random_text<R: Rng>(rng: &mut R, prefix: &str) -> String {
    let n_bool = rng.random_range(0..=4);
    let n_int = rng.random_range(if n_bool == 0 { 1 } else { 0 }..=2);
    let mut text = String::new();
    let mut domains: Vec<Vec<i64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for i in 0..n_bool {
        text.push_str(&format!("bool {prefix}b{i}\n"));
        domains.push(vec![0, 1]);
        names.push(format!("{prefix}b{i}"));
    }
    for i in 0..n_int {
        let size = rng.random_range(1..=4);
        let mut vals: Vec<i64> = Vec::new();
        while vals.len() < size {
            let v = rng.random_range(-3..=5);
            if !vals.contains(&v) {
                vals.push(v);
            }
        }
        vals.sort_unstable();
        let list: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
        text.push_str(&format!("int {prefix}x{i} {{{}}}\n", list.join(",")));
        domains.push(vals);
        names.push(format!("{prefix}x{i}"));
    }
    let arity = rng.random_range(1..=6);
    let mut seen = HashSet::new();
    let mut terms: Vec<GenTerm> = Vec::new();
    for _ in 0..arity * 3 {
        if terms.len() == arity {
            break;
        }
        let var = rng.random_range(0..names.len());
        let dom = &domains[var];
        let (text_t, table) = if var < n_bool {
            if rng.random_bool(0.5) {
                (names[var].clone(), vec![0, 1])
            } else {
                (format!("!{}", names[var]), vec![1, 0])
            }
        } else if rng.random_bool(0.4) {
            (names[var].clone(), dom.clone())
        } else {
            let op = *CMPS.choose(rng).unwrap();
            let rhs = rng.random_range(-3..=5);
            let table = dom.iter().map(|&v| i64::from(cmp_holds(op, v, rhs))).collect();
            (format!("({} {} {})", names[var], op, rhs), table)
        };
        if seen.insert(text_t.clone()) {
            terms.push(GenTerm {
                coef: coef(rng),
                text: text_t,
                var,
                table,
            });
        }
    }
    if n_bool >= 2 && rng.random_bool(0.5) {
        let k = rng.random_range(2..=n_bool);
        let mut idx: Vec<usize> = (0..n_bool).collect();
        idx.sort_by_key(|_| rng.random::<u32>());
        let side: Vec<String> = idx[..k].iter().map(|&i| format!("1*{prefix}b{i}")).collect();
        text.push_str(&format!("con {} <= 1\n", side.join(" + ")));
    }
    let op = *CMPS.choose(rng).unwrap();
    let bound = pick_bound(rng, &terms);
    text.push_str(&format!("con {} {} {}\n", render(&terms), op, bound));
    text
}

/// Random inequality over 1..=`max_vars` distinct Booleans (positive or
/// negated literals), comparator among `<`, `<=`, `>=`, `>`.
pub fn random_bool_inequality<R: Rng>(rng: &mut R, max_vars: usize) -> Instance {
    let n = rng.random_range(1..=max_vars);
    let mut text = String::new();
    let mut terms = Vec::new();
    for i in 0..n {
        text.push_str(&format!("bool b{i}\n"));
        let neg = rng.random_bool(0.3);
        terms.push(GenTerm {
            coef: coef(rng),
            text: if neg { format!("!b{i}") } else { format!("b{i}") },
            var: i,
            table: if neg { vec![1, 0] } else { vec![0, 1] },
        });
    }
    let op = *["<", "<=", ">=", ">"].choose(rng).unwrap();
    let bound = pick_bound(rng, &terms);
    text.push_str(&format!("con {} {} {}\n", render(&terms), op, bound));
    parse_instance("ineq", &text).unwrap()
}

pub fn projected_count(inst: &Instance, cfg: Config) -> u64 {
    encode_instance(inst, cfg, DEFAULT_CLAUSE_CAP)
        .unwrap_or_else(|e| panic!("{cfg}: {e}\n{}", inst.to_text()))
        .count_projected()
}

/// Checks every available configuration against brute force.
pub fn check_counts(inst: &Instance, cfgs: &[Config]) -> Result<(), String> {
    let expected = brute_force_count(inst);
    for &cfg in cfgs {
        let got = projected_count(inst, cfg);
        if got != expected {
            return Err(format!("{cfg}: {got} models, expected {expected}\n{}", inst.to_text()));
        }
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Strength {
    /// Unit propagation removes exactly the unsupported values.
    Gac,
    /// Unit propagation fails exactly when no extension exists.
    Cc,
}

fn solutions(inst: &Instance) -> Vec<Vec<usize>> {
    let n = inst.variables.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let a: Vec<i64> = (0..n).map(|i| inst.variables[i].domain.values()[idx[i]]).collect();
        if inst.constraints.iter().all(|c| c.is_satisfied(&a)) {
            out.push(idx.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            idx[i] += 1;
            if idx[i] < inst.variables[i].domain.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive comparison of unit propagation with the required consistency
/// over every partial assignment of the source variables.
pub fn check_propagation(inst: &Instance, cfg: Config, strength: Strength) -> Result<(), String> {
    let f = encode_instance(inst, cfg, DEFAULT_CLAUSE_CAP).map_err(|e| e.to_string())?;
    let mut solver = Solver::new(f.num_vars, &f.clauses);
    let sols = solutions(inst);
    let sizes: Vec<usize> = inst.variables.iter().map(|v| v.domain.len()).collect();
    let n = sizes.len();
    // partial[i] = 0 for unassigned, idx + 1 otherwise
    let mut partial = vec![0usize; n];
    loop {
        let assumptions: Vec<_> = (0..n)
            .filter(|&i| partial[i] > 0)
            .flat_map(|i| f.projection[i].1.cube(partial[i] - 1))
            .collect();
        let consistent: Vec<&Vec<usize>> = sols
            .iter()
            .filter(|s| (0..n).all(|i| partial[i] == 0 || s[i] == partial[i] - 1))
            .collect();
        let trail = solver.unit_propagate(&assumptions);
        let ctx = || format!("{cfg} partial {partial:?}\n{}", inst.to_text());
        match (&trail, consistent.is_empty()) {
            (None, false) => return Err(format!("propagation failed on an extensible assignment: {}", ctx())),
            (Some(_), true) => return Err(format!("no failure on a dead assignment: {}", ctx())),
            (Some(trail), false) if strength == Strength::Gac => {
                let is_false = |l: &satenc::Lit| trail.contains(&!*l);
                for i in (0..n).filter(|&i| partial[i] == 0) {
                    for v in 0..sizes[i] {
                        let pruned = f.projection[i].1.cube(v).iter().any(is_false);
                        let supported = consistent.iter().any(|s| s[i] == v);
                        if pruned == supported {
                            return Err(format!(
                                "var {} value #{v}: pruned={pruned} supported={supported}: {}",
                                inst.variables[i].name,
                                ctx()
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            partial[i] += 1;
            if partial[i] <= sizes[i] {
                break;
            }
            partial[i] = 0;
            i += 1;
        }
    }
}
