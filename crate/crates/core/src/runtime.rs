//! Runtime matrices, PAR10 scoring, train/test splits and the reference
//! selectors (virtual best, single best, default, virtual worst).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encoders::Config;

pub const DEFAULT_TIMEOUT: f64 = 3600.0;

/// Penalized runtime: a timeout counts as ten times the limit.
pub fn par10(runtime: f64, timed_out: bool, timeout: f64) -> f64 {
    if timed_out {
        10.0 * timeout
    } else {
        runtime
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RuntimeError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: {msg}")]
    BadRow { line: u64, msg: String },
    #[error("unknown configuration `{0}`")]
    UnknownConfig(String),
    #[error("duplicate cell ({instance}, {config})")]
    DuplicateCell { instance: String, config: String },
    #[error("missing cell ({instance}, {config})")]
    MissingCell { instance: String, config: String },
    #[error("instance `{instance}` has classes `{a}` and `{b}`")]
    ClassMismatch { instance: String, a: String, b: String },
    #[error("no instances left")]
    Empty,
    #[error("split by class needs at least two classes")]
    SingleClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub class: String,
}

/// Complete instance × configuration table of runtimes. Instances are sorted
/// by name and configurations by their `LI_PB` name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeMatrix {
    pub instances: Vec<InstanceInfo>,
    pub configs: Vec<Config>,
    runtime: Vec<Vec<f64>>,
    timed_out: Vec<Vec<bool>>,
    pub timeout: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Instances dropped because every configuration timed out.
    pub dropped_all_timeout: Vec<String>,
    /// Instances dropped by the exclusion list.
    pub excluded: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Row {
    instance: String,
    class: String,
    config: String,
    runtime_s: f64,
    timed_out: String,
    #[serde(default)]
    seed: Option<String>,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

impl RuntimeMatrix {
    /// Builds a matrix from dense tables; rows follow `instances`, columns
    /// follow `configs`. Both are reordered into canonical order.
    pub fn new(
        instances: Vec<InstanceInfo>,
        configs: Vec<Config>,
        runtime: Vec<Vec<f64>>,
        timed_out: Vec<Vec<bool>>,
        timeout: f64,
    ) -> Self {
        assert_eq!(runtime.len(), instances.len());
        assert_eq!(timed_out.len(), instances.len());
        for (r, t) in runtime.iter().zip(&timed_out) {
            assert_eq!(r.len(), configs.len());
            assert_eq!(t.len(), configs.len());
            assert!(r.iter().all(|&x| x >= 0.0 && x.is_finite()), "runtimes must be finite and nonnegative");
        }
        let mut io: Vec<usize> = (0..instances.len()).collect();
        io.sort_by(|&a, &b| instances[a].name.cmp(&instances[b].name));
        let mut co: Vec<usize> = (0..configs.len()).collect();
        co.sort_by_key(|&c| configs[c].to_string());
        RuntimeMatrix {
            instances: io.iter().map(|&i| instances[i].clone()).collect(),
            configs: co.iter().map(|&c| configs[c]).collect(),
            runtime: io.iter().map(|&i| co.iter().map(|&c| runtime[i][c]).collect()).collect(),
            timed_out: io.iter().map(|&i| co.iter().map(|&c| timed_out[i][c]).collect()).collect(),
            timeout,
        }
    }

    /// Matrix from PAR10-style values: cells above the timeout are timeouts.
    pub fn from_scores(instances: Vec<InstanceInfo>, configs: Vec<Config>, scores: Vec<Vec<f64>>, timeout: f64) -> Self {
        let timed_out = scores.iter().map(|r| r.iter().map(|&x| x > timeout).collect()).collect();
        let runtime = scores
            .iter()
            .map(|r| r.iter().map(|&x| if x > timeout { timeout } else { x }).collect())
            .collect();
        Self::new(instances, configs, runtime, timed_out, timeout)
    }

    pub fn num_instances(&self) -> usize {
        self.instances.len()
    }

    pub fn num_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn runtime(&self, i: usize, c: usize) -> f64 {
        self.runtime[i][c]
    }

    pub fn timed_out(&self, i: usize, c: usize) -> bool {
        self.timed_out[i][c]
    }

    /// PAR10 score of cell (instance `i`, config `c`).
    pub fn score(&self, i: usize, c: usize) -> f64 {
        par10(self.runtime[i][c], self.timed_out[i][c], self.timeout)
    }

    pub fn instance_index(&self, name: &str) -> Option<usize> {
        self.instances.binary_search_by(|x| x.name.as_str().cmp(name)).ok()
    }

    pub fn config_index(&self, cfg: Config) -> Option<usize> {
        self.configs.iter().position(|&c| c == cfg)
    }

    /// Sum of PAR10 scores of config `c` over `set`.
    pub fn total(&self, set: &[usize], c: usize) -> f64 {
        set.iter().map(|&i| self.score(i, c)).sum()
    }

    pub fn classes(&self) -> BTreeSet<&str> {
        self.instances.iter().map(|x| x.class.as_str()).collect()
    }

    pub fn read<R: Read>(input: R, timeout: f64, exclude: &BTreeSet<String>) -> Result<(Self, LoadReport), RuntimeError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        // (instance, config) -> runs keyed by seed
        let mut cells: BTreeMap<(String, Config), BTreeMap<String, (f64, bool)>> = BTreeMap::new();
        let mut classes: BTreeMap<String, String> = BTreeMap::new();
        let mut configs: BTreeSet<Config> = BTreeSet::new();
        let headers = rdr.headers()?.clone();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            let row: Row = rec.deserialize(Some(&headers))?;
            let cfg: Config = row.config.parse().map_err(|_| RuntimeError::UnknownConfig(row.config.clone()))?;
            if !(row.runtime_s >= 0.0 && row.runtime_s.is_finite()) {
                return Err(RuntimeError::BadRow {
                    line,
                    msg: format!("invalid runtime {} for ({}, {})", row.runtime_s, row.instance, row.config),
                });
            }
            let flag = parse_flag(&row.timed_out).ok_or_else(|| RuntimeError::BadRow {
                line,
                msg: format!("invalid timed_out flag `{}`", row.timed_out),
            })?;
            match classes.get(&row.instance) {
                Some(c) if *c != row.class => {
                    return Err(RuntimeError::ClassMismatch {
                        instance: row.instance,
                        a: c.clone(),
                        b: row.class,
                    })
                }
                Some(_) => {}
                None => {
                    classes.insert(row.instance.clone(), row.class.clone());
                }
            }
            configs.insert(cfg);
            let runs = cells.entry((row.instance.clone(), cfg)).or_default();
            let seed = row.seed.unwrap_or_default();
            if runs.insert(seed, (row.runtime_s, flag)).is_some() {
                return Err(RuntimeError::DuplicateCell {
                    instance: row.instance,
                    config: cfg.to_string(),
                });
            }
        }
        let configs: Vec<Config> = configs.into_iter().collect();
        let mut report = LoadReport::default();
        let mut instances = Vec::new();
        let mut runtime = Vec::new();
        let mut timed_out = Vec::new();
        for (name, class) in classes {
            if exclude.contains(&name) {
                report.excluded.push(name);
                continue;
            }
            let mut rt = Vec::with_capacity(configs.len());
            let mut to = Vec::with_capacity(configs.len());
            for &cfg in &configs {
                let runs = cells.get(&(name.clone(), cfg)).ok_or_else(|| RuntimeError::MissingCell {
                    instance: name.clone(),
                    config: cfg.to_string(),
                })?;
                let (r, t) = median_run(runs.values().copied().collect(), timeout);
                rt.push(r);
                to.push(t);
            }
            if to.iter().all(|&t| t) {
                report.dropped_all_timeout.push(name);
                continue;
            }
            instances.push(InstanceInfo { name, class });
            runtime.push(rt);
            timed_out.push(to);
        }
        if instances.is_empty() {
            return Err(RuntimeError::Empty);
        }
        Ok((Self::new(instances, configs, runtime, timed_out, timeout), report))
    }

    pub fn load(path: &Path, timeout: f64, exclude: &BTreeSet<String>) -> Result<(Self, LoadReport), RuntimeError> {
        Self::read(std::fs::File::open(path)?, timeout, exclude)
    }

    /// Writes the matrix in the CSV schema read by [`RuntimeMatrix::read`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), RuntimeError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance", "class", "config", "runtime_s", "timed_out"])?;
        for (i, inst) in self.instances.iter().enumerate() {
            for (c, cfg) in self.configs.iter().enumerate() {
                w.write_record([
                    inst.name.clone(),
                    inst.class.clone(),
                    cfg.to_string(),
                    format!("{}", self.runtime[i][c]),
                    u8::from(self.timed_out[i][c]).to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Lower median of repeated runs by PAR10 score.
fn median_run(mut runs: Vec<(f64, bool)>, timeout: f64) -> (f64, bool) {
    runs.sort_by(|a, b| par10(a.0, a.1, timeout).total_cmp(&par10(b.0, b.1, timeout)));
    runs[(runs.len() - 1) / 2]
}

/// Convenience wrapper around [`RuntimeMatrix::load`].
pub fn load_runtimes(path: &Path, timeout: f64, exclude: &BTreeSet<String>) -> Result<(RuntimeMatrix, LoadReport), RuntimeError> {
    RuntimeMatrix::load(path, timeout, exclude)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitMode {
    ByInstance,
    ByClass,
}

impl std::str::FromStr for SplitMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "by-instance" | "instance" => Ok(SplitMode::ByInstance),
            "by-class" | "class" => Ok(SplitMode::ByClass),
            _ => Err(format!("unknown split mode `{s}` (by-instance or by-class)")),
        }
    }
}

/// Train/test partition of instance indices (both sorted).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub mode: SplitMode,
}

impl Split {
    pub fn write<W: Write>(&self, m: &RuntimeMatrix, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# train")?;
        for &i in &self.train {
            writeln!(out, "{}", m.instances[i].name)?;
        }
        writeln!(out, "# test")?;
        for &i in &self.test {
            writeln!(out, "{}", m.instances[i].name)?;
        }
        Ok(())
    }
}

/// Random 80:20 split. By class, whole classes move to the test side (in
/// seeded random order) until it holds at least a fifth of the instances;
/// the training side always keeps at least one class.
pub fn make_split(m: &RuntimeMatrix, seed: u64, mode: SplitMode) -> Result<Split, RuntimeError> {
    let n = m.num_instances();
    if n == 0 {
        return Err(RuntimeError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test: Vec<usize> = match mode {
        SplitMode::ByInstance => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let k = if n >= 2 { ((n as f64 * 0.2).round() as usize).clamp(1, n - 1) } else { 0 };
            idx.truncate(k);
            idx
        }
        SplitMode::ByClass => {
            let mut classes: Vec<&str> = m.classes().into_iter().collect();
            if classes.len() < 2 {
                return Err(RuntimeError::SingleClass);
            }
            classes.shuffle(&mut rng);
            let mut by_class: HashMap<&str, Vec<usize>> = HashMap::new();
            for (i, x) in m.instances.iter().enumerate() {
                by_class.entry(x.class.as_str()).or_default().push(i);
            }
            let mut test = Vec::new();
            for c in &classes[..classes.len() - 1] {
                if test.len() * 5 >= n {
                    break;
                }
                test.extend(&by_class[c]);
            }
            test
        }
    };
    test.sort_unstable();
    let train = (0..n).filter(|i| test.binary_search(i).is_err()).collect();
    Ok(Split { train, test, seed, mode })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct References {
    pub vb: f64,
    pub sb_cfg: Config,
    pub sb: f64,
    pub def: f64,
    /// Virtual worst over the supplied portfolio.
    pub vw: f64,
    /// Virtual worst over all configurations.
    pub vw_all: f64,
}

/// Index of the configuration with least total on `set`; ties go to the
/// lexicographically smallest name (configs are kept sorted by name).
pub fn single_best(m: &RuntimeMatrix, set: &[usize], candidates: &[usize]) -> usize {
    let mut best = candidates[0];
    let mut best_total = m.total(set, best);
    for &c in &candidates[1..] {
        let t = m.total(set, c);
        if t < best_total || (t == best_total && m.configs[c].to_string() < m.configs[best].to_string()) {
            best = c;
            best_total = t;
        }
    }
    best
}

pub fn virtual_best(m: &RuntimeMatrix, set: &[usize], configs: &[usize]) -> f64 {
    set.iter()
        .map(|&i| configs.iter().map(|&c| m.score(i, c)).fold(f64::INFINITY, f64::min))
        .sum()
}

pub fn virtual_worst(m: &RuntimeMatrix, set: &[usize], configs: &[usize]) -> f64 {
    set.iter()
        .map(|&i| configs.iter().map(|&c| m.score(i, c)).fold(f64::NEG_INFINITY, f64::max))
        .sum()
}

/// Reference totals on the test side. `portfolio` holds config indices.
pub fn references(m: &RuntimeMatrix, split: &Split, default_cfg: Config, portfolio: &[usize]) -> References {
    let all: Vec<usize> = (0..m.num_configs()).collect();
    let sb_idx = single_best(m, &split.train, &all);
    let def = match m.config_index(default_cfg) {
        Some(d) => m.total(&split.test, d),
        None => f64::NAN,
    };
    References {
        vb: virtual_best(m, &split.test, &all),
        sb_cfg: m.configs[sb_idx],
        sb: m.total(&split.test, sb_idx),
        def,
        vw: virtual_worst(m, &split.test, portfolio),
        vw_all: virtual_worst(m, &split.test, &all),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(s: &str) -> Config {
        s.parse().unwrap()
    }

    const CSV: &str = "instance,class,config,runtime_s,timed_out
a,c1,Tree_Tree,10,0
a,c1,Tree_MDD,20,0
b,c2,Tree_Tree,3600,1
b,c2,Tree_MDD,5,false
";

    fn none() -> BTreeSet<String> {
        BTreeSet::new()
    }

    #[test]
    fn par10_examples() {
        assert_eq!(par10(100.0, false, 3600.0), 100.0);
        assert_eq!(par10(3601.0, true, 3600.0), 36000.0);
        assert_eq!(par10(3600.0, false, 3600.0), 3600.0);
    }

    #[test]
    fn load_complete() {
        let (m, rep) = RuntimeMatrix::read(CSV.as_bytes(), 3600.0, &none()).unwrap();
        assert_eq!((m.num_instances(), m.num_configs()), (2, 2));
        assert_eq!(rep, LoadReport::default());
        assert_eq!(m.configs, vec![cfg("Tree_MDD"), cfg("Tree_Tree")]);
        let b = m.instance_index("b").unwrap();
        assert_eq!(m.score(b, m.config_index(cfg("Tree_Tree")).unwrap()), 36000.0);
    }

    #[test]
    fn load_drops_all_timeout_and_excluded() {
        let text = format!("{CSV}c,c3,Tree_Tree,3600,1\nc,c3,Tree_MDD,3600,1\n");
        let (m, rep) = RuntimeMatrix::read(text.as_bytes(), 3600.0, &none()).unwrap();
        assert_eq!(m.num_instances(), 2);
        assert_eq!(rep.dropped_all_timeout, vec!["c".to_string()]);
        let ex: BTreeSet<String> = ["a".to_string()].into();
        let (m, rep) = RuntimeMatrix::read(text.as_bytes(), 3600.0, &ex).unwrap();
        assert_eq!(m.num_instances(), 1);
        assert_eq!(rep.excluded, vec!["a".to_string()]);
    }

    #[test]
    fn load_errors() {
        let dup = format!("{CSV}a,c1,Tree_MDD,3,0\n");
        let err = RuntimeMatrix::read(dup.as_bytes(), 3600.0, &none()).unwrap_err();
        assert!(err.to_string().contains("(a, Tree_MDD)"), "{err}");
        let missing = "instance,class,config,runtime_s,timed_out\na,c,Tree_Tree,1,0\nb,c,Tree_MDD,1,0\n";
        assert!(matches!(
            RuntimeMatrix::read(missing.as_bytes(), 3600.0, &none()),
            Err(RuntimeError::MissingCell { .. })
        ));
        let unknown = "instance,class,config,runtime_s,timed_out\na,c,Foo_Tree,1,0\n";
        assert!(matches!(
            RuntimeMatrix::read(unknown.as_bytes(), 3600.0, &none()),
            Err(RuntimeError::UnknownConfig(_))
        ));
    }

    #[test]
    fn repeated_runs_take_the_median() {
        let text = "instance,class,config,runtime_s,timed_out,seed
a,c,Tree_Tree,5,0,1
a,c,Tree_Tree,9,0,2
a,c,Tree_Tree,3600,1,3
";
        let (m, _) = RuntimeMatrix::read(text.as_bytes(), 3600.0, &none()).unwrap();
        assert_eq!(m.score(0, 0), 9.0);
    }

    #[test]
    fn csv_roundtrip() {
        let (m, _) = RuntimeMatrix::read(CSV.as_bytes(), 3600.0, &none()).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let (m2, _) = RuntimeMatrix::read(&buf[..], 3600.0, &none()).unwrap();
        assert_eq!(m, m2);
    }

    fn synthetic(classes: &[usize]) -> RuntimeMatrix {
        let mut inst = Vec::new();
        for (c, &size) in classes.iter().enumerate() {
            for j in 0..size {
                inst.push(InstanceInfo {
                    name: format!("i{c}_{j}"),
                    class: format!("k{c}"),
                });
            }
        }
        let n = inst.len();
        RuntimeMatrix::new(inst, vec![Config::DEFAULT], vec![vec![1.0]; n], vec![vec![false]; n], 10.0)
    }

    #[test]
    fn splits() {
        let m = synthetic(&[10]);
        for seed in 0..5 {
            let s = make_split(&m, seed, SplitMode::ByInstance).unwrap();
            assert_eq!(s.test.len(), 2);
            assert_eq!(s.train.len(), 8);
            assert_eq!(s, make_split(&m, seed, SplitMode::ByInstance).unwrap());
        }
        assert!(matches!(make_split(&m, 0, SplitMode::ByClass), Err(RuntimeError::SingleClass)));
        let m = synthetic(&[6, 2, 2]);
        for seed in 0..20 {
            let s = make_split(&m, seed, SplitMode::ByClass).unwrap();
            assert!(s.test.len() >= 2 && !s.train.is_empty());
            let train: BTreeSet<&str> = s.train.iter().map(|&i| m.instances[i].class.as_str()).collect();
            assert!(s.test.iter().all(|&i| !train.contains(m.instances[i].class.as_str())));
        }
    }

    #[test]
    fn reference_examples() {
        let inst = vec![
            InstanceInfo { name: "t".into(), class: "c".into() },
            InstanceInfo { name: "u".into(), class: "c".into() },
        ];
        let (a, b) = (cfg("Tree_MDD"), cfg("Tree_Tree"));
        // train u: A 100, B 90; test t: A 10, B 20
        let m = RuntimeMatrix::new(inst, vec![a, b], vec![vec![10.0, 20.0], vec![100.0, 90.0]], vec![vec![false; 2]; 2], 3600.0);
        let split = Split { train: vec![1], test: vec![0], seed: 0, mode: SplitMode::ByInstance };
        let r = references(&m, &split, Config::DEFAULT, &[0, 1]);
        assert_eq!(r.vb, 10.0);
        assert_eq!(r.vw, 20.0);
        assert_eq!(r.sb_cfg, b);
        assert_eq!(r.sb, 20.0);
        assert_eq!(r.def, 20.0);
    }
}
