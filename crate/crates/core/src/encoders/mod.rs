//! Encoding names, configurations and instance-level encoding to CNF.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amo::{to_pbamo, AmoDetector, PbAmoConstraint, PbAmoResult};
use crate::check::Solver;
use crate::cnf::{write_dimacs, CnfBuilder, Lit, Prop};
use crate::error::EncodeError;
use crate::model::{ConstraintClass, Instance, PreparedInstance};
use crate::varenc::{encode_variable, Need, VarEncoding};

pub mod ggpw;
pub mod gswc;
pub mod mdd;
pub mod totalizer;
pub mod tree;

pub use tree::TreePlan;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EncodingName {
    Tree,
    Mdd,
    Ggt,
    Ggtd,
    Rggt,
    Gswc,
    Ggpw,
    Glpw,
    Gmto,
}

impl EncodingName {
    pub const ALL: [EncodingName; 9] = [
        EncodingName::Tree,
        EncodingName::Mdd,
        EncodingName::Ggt,
        EncodingName::Ggtd,
        EncodingName::Rggt,
        EncodingName::Gswc,
        EncodingName::Ggpw,
        EncodingName::Glpw,
        EncodingName::Gmto,
    ];

    /// Encodings built into this crate.
    pub const AVAILABLE: [EncodingName; 7] = [
        EncodingName::Tree,
        EncodingName::Mdd,
        EncodingName::Ggt,
        EncodingName::Ggtd,
        EncodingName::Rggt,
        EncodingName::Gswc,
        EncodingName::Ggpw,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EncodingName::Tree => "Tree",
            EncodingName::Mdd => "MDD",
            EncodingName::Ggt => "GGT",
            EncodingName::Ggtd => "GGTd",
            EncodingName::Rggt => "RGGT",
            EncodingName::Gswc => "GSWC",
            EncodingName::Ggpw => "GGPW",
            EncodingName::Glpw => "GLPW",
            EncodingName::Gmto => "GMTO",
        }
    }

    pub fn is_available(self) -> bool {
        Self::AVAILABLE.contains(&self)
    }

    /// Whether unit propagation on the encoding enforces GAC on inequalities
    /// without integer terms.
    pub fn is_gac(self) -> bool {
        !matches!(self, EncodingName::Ggpw)
    }
}

impl fmt::Display for EncodingName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown encoding `{0}`; valid names: Tree, MDD, GGT, GGTd, RGGT, GSWC, GGPW, GLPW, GMTO")]
pub struct UnknownEncoding(pub String);

impl FromStr for EncodingName {
    type Err = UnknownEncoding;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EncodingName::ALL
            .iter()
            .copied()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownEncoding(s.to_string()))
    }
}

/// Encoding choice per constraint class, written `LI_PB`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Config {
    pub li: EncodingName,
    pub pb: EncodingName,
}

impl Config {
    pub const DEFAULT: Config = Config {
        li: EncodingName::Tree,
        pb: EncodingName::Tree,
    };

    pub fn new(li: EncodingName, pb: EncodingName) -> Self {
        Config { li, pb }
    }

    /// All configurations over the available encodings, sorted by name.
    pub fn all_available() -> Vec<Config> {
        let mut out: Vec<Config> = EncodingName::AVAILABLE
            .iter()
            .flat_map(|&li| EncodingName::AVAILABLE.iter().map(move |&pb| Config { li, pb }))
            .collect();
        out.sort_by_key(|c| c.to_string());
        out
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.li, self.pb)
    }
}

impl FromStr for Config {
    type Err = UnknownEncoding;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (li, pb) = s.split_once('_').ok_or_else(|| UnknownEncoding(s.to_string()))?;
        Ok(Config {
            li: li.parse()?,
            pb: pb.parse()?,
        })
    }
}

/// A PB(AMO) constraint over SAT literals: `Σ_g Σ_{(w,l)∈g} w·l ≤ bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbLits {
    pub groups: Vec<Vec<(i64, Lit)>>,
    pub bound: i64,
}

impl PbLits {
    pub fn resolve(p: &PbAmoConstraint, encs: &[VarEncoding]) -> PbLits {
        let groups = p
            .groups
            .iter()
            .map(|g| {
                g.terms
                    .iter()
                    .map(|&(w, a)| match a.resolve(encs) {
                        Prop::Lit(l) => (w, l),
                        other => panic!("group literal {a:?} resolved to constant {other}"),
                    })
                    .collect()
            })
            .collect();
        PbLits {
            groups,
            bound: p.bound,
        }
    }
}

/// Encodes `p` with one of the PB(AMO) encodings.
pub fn encode_pbamo(p: &PbLits, name: EncodingName, b: &mut CnfBuilder) -> Result<(), EncodeError> {
    use totalizer::Shape;
    match name {
        EncodingName::Mdd => mdd::encode(p, b),
        EncodingName::Ggt => totalizer::encode(p, Shape::MinRatio, false, b),
        EncodingName::Ggtd => totalizer::encode(p, Shape::Balanced, false, b),
        EncodingName::Rggt => totalizer::encode(p, Shape::MinRatio, true, b),
        EncodingName::Gswc => gswc::encode(p, b),
        EncodingName::Ggpw => ggpw::encode(p, b),
        EncodingName::Tree => panic!("Tree is not a PB(AMO) encoding"),
        other => Err(EncodeError::UnsupportedEncoding(other)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintStats {
    /// Index of the constraint in the source instance.
    pub index: usize,
    pub encoding: EncodingName,
    pub vars: u32,
    pub clauses: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EncodingStats {
    /// SAT variables of the variable encodings (including AMO helpers).
    pub var_vars: u32,
    /// SAT variables introduced by constraint encodings.
    pub aux_vars: u32,
    pub var_clauses: usize,
    pub clauses: usize,
    pub per_constraint: Vec<ConstraintStats>,
}

#[derive(Clone, Debug)]
pub struct CnfFormula {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Encodings of the source variables, by variable id.
    pub projection: Vec<(String, VarEncoding)>,
    pub stats: EncodingStats,
}

impl CnfFormula {
    pub fn comments(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in &self.stats.per_constraint {
            out.push(format!(
                "con {} enc {} vars {} clauses {}",
                s.index, s.encoding, s.vars, s.clauses
            ));
        }
        for (name, enc) in &self.projection {
            out.extend(enc.projection_comments(name));
        }
        out
    }

    pub fn write_dimacs<W: Write>(&self, out: &mut W) -> io::Result<()> {
        write_dimacs(out, self.num_vars, &self.clauses, &self.comments())
    }

    pub fn to_dimacs(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    /// Number of assignments of the source variables that extend to a model.
    pub fn count_projected(&self) -> u64 {
        let groups: Vec<Vec<Vec<Lit>>> = self
            .projection
            .iter()
            .map(|(_, e)| (0..e.values.len()).map(|i| e.cube(i)).collect())
            .collect();
        Solver::new(self.num_vars, &self.clauses).count_projected(&groups)
    }
}

enum Plan {
    Tree(TreePlan),
    PbAmo(Vec<PbAmoResult>),
}

fn plan_needs(plan: &Plan, needs: &mut [Need]) {
    match plan {
        Plan::Tree(t) => {
            for (x, n) in t.needs() {
                needs[x.0].merge(n);
            }
        }
        Plan::PbAmo(rs) => {
            for r in rs {
                if let PbAmoResult::Constraint(p) = r {
                    let atoms = p
                        .groups
                        .iter()
                        .flat_map(|g| g.terms.iter().map(|t| t.1))
                        .chain(p.derived_mutexes.iter().flat_map(|&(a, b)| [a, b]));
                    for a in atoms {
                        if let Some(x) = a.var() {
                            needs[x.0].merge(a.need());
                        }
                    }
                }
            }
        }
    }
}

/// Encodes every top-level constraint of `inst`, PB constraints with
/// `cfg.pb` and LI constraints with `cfg.li`.
pub fn encode_instance(inst: &Instance, cfg: Config, clause_cap: usize) -> Result<CnfFormula, EncodeError> {
    let prep = PreparedInstance::new(inst)?;
    let det = AmoDetector::new(&prep);
    let vars = &prep.variables;

    let mut plans = Vec::with_capacity(prep.constraints.len());
    for p in &prep.constraints {
        let enc = match p.class {
            ConstraintClass::Pb => cfg.pb,
            ConstraintClass::Li => cfg.li,
        };
        if !enc.is_available() {
            return Err(EncodeError::UnsupportedEncoding(enc).at(p.source));
        }
        let plan = if enc == EncodingName::Tree {
            Plan::Tree(TreePlan::new(&p.constraint, vars).map_err(|e| EncodeError::from(e).at(p.source))?)
        } else {
            Plan::PbAmo(to_pbamo(&p.constraint, &det, p.source).map_err(|e| EncodeError::from(e).at(p.source))?)
        };
        plans.push((p.source, enc, plan));
    }

    let mut needs = vec![Need::default(); vars.len()];
    for (_, _, plan) in &plans {
        plan_needs(plan, &mut needs);
    }

    let mut b = CnfBuilder::new(clause_cap);
    let mut encs = Vec::with_capacity(vars.len());
    for (v, &need) in vars.iter().zip(&needs) {
        encs.push(encode_variable(v, need, &mut b)?);
    }
    let mut stats = EncodingStats {
        var_vars: b.num_vars(),
        var_clauses: b.num_clauses(),
        ..Default::default()
    };

    if let Some(i) = prep.infeasible {
        let (v0, c0) = (b.num_vars(), b.num_clauses());
        b.add(&[])?;
        stats.per_constraint.push(ConstraintStats {
            index: i,
            encoding: EncodingName::Tree,
            vars: b.num_vars() - v0,
            clauses: b.num_clauses() - c0,
        });
    }

    for (source, enc, plan) in &plans {
        let (v0, c0) = (b.num_vars(), b.num_clauses());
        let res: Result<(), EncodeError> = (|| {
            match plan {
                Plan::Tree(t) => {
                    t.encode(&encs, &mut b)?;
                }
                Plan::PbAmo(rs) => {
                    for r in rs {
                        match r {
                            PbAmoResult::True => {}
                            PbAmoResult::False => b.add(&[])?,
                            PbAmoResult::Constraint(p) => {
                                for &(x, y) in &p.derived_mutexes {
                                    b.add(&[!x.resolve(&encs), !y.resolve(&encs)])?;
                                }
                                encode_pbamo(&PbLits::resolve(p, &encs), *enc, &mut b)?;
                            }
                        }
                    }
                }
            }
            Ok(())
        })();
        res.map_err(|e| e.at(*source))?;
        stats.per_constraint.push(ConstraintStats {
            index: *source,
            encoding: *enc,
            vars: b.num_vars() - v0,
            clauses: b.num_clauses() - c0,
        });
    }
    stats.aux_vars = b.num_vars() - stats.var_vars;
    stats.clauses = b.num_clauses();

    let projection = (0..prep.source_vars)
        .map(|i| (vars[i].name.clone(), encs[i].clone()))
        .collect();
    let (num_vars, clauses) = b.into_parts();
    Ok(CnfFormula {
        num_vars,
        clauses,
        projection,
        stats,
    })
}

/// Brute-force number of solutions of `inst`.
pub fn brute_force_count(inst: &Instance) -> u64 {
    let n = inst.variables.len();
    let mut idx = vec![0usize; n];
    let mut assignment: Vec<i64> = inst.variables.iter().map(|v| v.domain.min()).collect();
    let mut count = 0;
    loop {
        if inst.constraints.iter().all(|c| c.is_satisfied(&assignment)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == n {
                return count;
            }
            idx[i] += 1;
            if idx[i] < inst.variables[i].domain.len() {
                assignment[i] = inst.variables[i].domain.values()[idx[i]];
                break;
            }
            idx[i] = 0;
            assignment[i] = inst.variables[i].domain.values()[0];
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;

    const FIXTURE: &str = "bool x1 x2 x3 x4 x5 x6 x7\ncon 20*x1 + 30*x2 + 20*x3 + 40*x4 + 10*x5 + 20*x6 + 1*x7 <= 55\n";

    #[test]
    fn names_roundtrip() {
        for e in EncodingName::ALL {
            assert_eq!(e.as_str().parse::<EncodingName>().unwrap(), e);
            assert_eq!(e.as_str().to_lowercase().parse::<EncodingName>().unwrap(), e);
        }
        let c: Config = "GGPW_Tree".parse().unwrap();
        assert_eq!(c, Config::new(EncodingName::Ggpw, EncodingName::Tree));
        assert_eq!(c.to_string(), "GGPW_Tree");
        assert!("Foo_Tree".parse::<Config>().is_err());
        assert_eq!(Config::all_available().len(), 49);
    }

    #[test]
    fn tree_tree_fixture_stats() {
        let inst = parse_instance("t", FIXTURE).unwrap();
        let f = encode_instance(&inst, Config::DEFAULT, crate::cnf::DEFAULT_CLAUSE_CAP).unwrap();
        assert_eq!(f.stats.aux_vars, 10);
        assert_eq!(f.stats.clauses, 30);
        let text = f.to_dimacs();
        assert!(text.contains("c con 0 enc Tree vars 10 clauses 30\n"));
        assert!(text.contains("c var x1 = 1 -> 1\n"));
        assert!(text.contains("c var x1 <= 0 -> -1\n"));
    }

    #[test]
    fn unsupported_encoding() {
        let inst = parse_instance("t", FIXTURE).unwrap();
        let err = encode_instance(&inst, "Tree_GLPW".parse().unwrap(), 100).unwrap_err();
        assert!(matches!(err, EncodeError::Constraint { index: 0, .. }));
    }

    #[test]
    fn empty_instance() {
        let inst = parse_instance("t", "int x 0..2\nbool b\n").unwrap();
        let f = encode_instance(&inst, Config::DEFAULT, 100).unwrap();
        assert_eq!(f.count_projected(), 6);
    }

    #[test]
    fn deterministic_output() {
        let inst = parse_instance("t", FIXTURE).unwrap();
        for cfg in Config::all_available() {
            let a = encode_instance(&inst, cfg, 1_000_000).unwrap().to_dimacs();
            let b = encode_instance(&inst, cfg, 1_000_000).unwrap().to_dimacs();
            assert_eq!(a, b);
        }
    }
}
