//! Split, train, predict and evaluate cycles over a corpus, and the
//! per-split evaluation report.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoders::Config;
use crate::features::{extract_timed, feature_names, FeatureTable};
use crate::model::parse_instance;
use crate::runtime::{make_split, references, RuntimeError, RuntimeMatrix, Split, SplitMode};
use crate::selector::{
    build_portfolio, feature_rows, vote, PairwiseSelector, Portfolio, Selector, SelectorError, SingleSelector,
    TrainOptions,
};

/// File extension of instance files in a corpus directory.
pub const INSTANCE_EXT: &str = "lipb";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("io error on {path}: {err}")]
    Io { path: PathBuf, err: std::io::Error },
    #[error("{path}: {msg}")]
    Instance { path: PathBuf, msg: String },
    #[error("missing feature rows for {} instance(s): {}", .0.len(), .0.join(", "))]
    Coverage(Vec<String>),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Selector(#[from] SelectorError),
}

/// Instance files of `dir` (by extension), sorted by path.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let io = |err| PipelineError::Io { path: dir.to_path_buf(), err };
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(io)? {
        let p = e.map_err(io)?.path();
        if p.extension().is_some_and(|x| x == INSTANCE_EXT) {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

/// Instance name used in runtime and feature tables: the file stem.
pub fn instance_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Extracts features for every instance file of `dir`.
pub fn extract_corpus(dir: &Path) -> Result<FeatureTable, PipelineError> {
    let files = corpus_files(dir)?;
    let rows = files
        .par_iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|err| PipelineError::Io { path: p.clone(), err })?;
            let name = instance_name(p);
            let bad = |e: &dyn std::fmt::Display| PipelineError::Instance { path: p.clone(), msg: e.to_string() };
            let inst = parse_instance(&name, &text).map_err(|e| bad(&e))?;
            let (f, t) = extract_timed(&inst).map_err(|e| bad(&e))?;
            Ok((name, f.values, t))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let mut table = FeatureTable::new(feature_names().to_vec());
    for (n, v, t) in rows {
        table.insert(&n, v, t);
    }
    Ok(table)
}

/// Instances of `m` with no feature row.
pub fn coverage_gaps(m: &RuntimeMatrix, features: &FeatureTable) -> Vec<String> {
    m.instances
        .iter()
        .filter(|i| features.get(&i.name).is_none())
        .map(|i| i.name.clone())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub instance: String,
    pub config: Config,
    pub score: f64,
    pub timed_out: bool,
}

/// Test-side totals of one split. `predicted` includes feature time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub seed: u64,
    pub mode: SplitMode,
    pub portfolio: Vec<Config>,
    pub vb: f64,
    pub sb: f64,
    pub sb_cfg: Config,
    pub def: f64,
    pub vw: f64,
    pub vw_all: f64,
    pub vb_portfolio: f64,
    pub predicted: f64,
    pub feat_time: f64,
    pub gap_closed: f64,
    pub timeouts: usize,
    pub choices: Vec<Choice>,
}

pub fn gap_closed(sb: f64, predicted: f64, vb: f64) -> f64 {
    if sb == vb {
        if predicted == sb {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        (sb - predicted) / (sb - vb)
    }
}

/// Scores the choices `choose(i)` on the test side of `split`.
pub fn evaluate<C, T>(
    m: &RuntimeMatrix,
    split: &Split,
    portfolio: &Portfolio,
    default_cfg: Config,
    choose: C,
    feat_time: T,
) -> Result<Report, SelectorError>
where
    C: Fn(usize) -> Result<Config, SelectorError>,
    T: Fn(usize) -> f64,
{
    let cols = portfolio.indices(m);
    let r = references(m, split, default_cfg, &cols);
    let mut choices = Vec::with_capacity(split.test.len());
    let mut total = 0.0;
    let mut ftime = 0.0;
    for &i in &split.test {
        let cfg = choose(i)?;
        let c = m.config_index(cfg).expect("chosen config in matrix");
        let s = m.score(i, c);
        let t = feat_time(i);
        total += s;
        ftime += t;
        choices.push(Choice {
            instance: m.instances[i].name.clone(),
            config: cfg,
            score: s,
            timed_out: m.timed_out(i, c),
        });
    }
    let predicted = total + ftime;
    Ok(Report {
        seed: split.seed,
        mode: split.mode,
        portfolio: portfolio.configs.clone(),
        vb: r.vb,
        sb: r.sb,
        sb_cfg: r.sb_cfg,
        def: r.def,
        vw: r.vw,
        vw_all: r.vw_all,
        vb_portfolio: crate::runtime::virtual_best(m, &split.test, &cols),
        predicted,
        feat_time: ftime,
        gap_closed: gap_closed(r.sb, predicted, r.vb),
        timeouts: choices.iter().filter(|c| c.timed_out).count(),
        choices,
    })
}

/// Portfolio position each true-runtime pairwise oracle elects for `i`.
pub fn oracle_choice(m: &RuntimeMatrix, i: usize, portfolio: &Portfolio, train_totals: &[f64]) -> Config {
    let cols = portfolio.indices(m);
    let p = vote(&portfolio.configs, train_totals, |a, b| {
        if m.score(i, cols[a]) <= m.score(i, cols[b]) {
            a
        } else {
            b
        }
    });
    portfolio.configs[p]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectorKind {
    Pairwise,
    Single,
    /// Pairwise voting with models replaced by the true runtimes.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub seeds: Vec<u64>,
    pub mode: SplitMode,
    pub kind: SelectorKind,
    pub train: TrainOptions,
    pub default_cfg: Config,
}

/// Totals over all seeds, and as multiples of the virtual best.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: Vec<u64>,
    pub mode: SplitMode,
    pub kind: SelectorKind,
    pub vb: f64,
    pub sb: f64,
    pub def: f64,
    pub vw: f64,
    pub vw_all: f64,
    pub vb_portfolio: f64,
    pub predicted: f64,
    pub sb_x_vb: f64,
    pub def_x_vb: f64,
    pub vw_x_vb: f64,
    pub predicted_x_vb: f64,
    pub gap_closed: f64,
    pub timeouts: usize,
    pub reports: Vec<Report>,
}

impl Aggregate {
    pub fn from_reports(reports: Vec<Report>, opts: &PipelineOptions) -> Self {
        let sum = |f: fn(&Report) -> f64| reports.iter().map(f).sum::<f64>();
        let (vb, sb, def, vw, vw_all) = (sum(|r| r.vb), sum(|r| r.sb), sum(|r| r.def), sum(|r| r.vw), sum(|r| r.vw_all));
        let predicted = sum(|r| r.predicted);
        let x = |v: f64| if vb > 0.0 { v / vb } else { f64::NAN };
        Aggregate {
            seeds: opts.seeds.clone(),
            mode: opts.mode,
            kind: opts.kind,
            vb,
            sb,
            def,
            vw,
            vw_all,
            vb_portfolio: sum(|r| r.vb_portfolio),
            predicted,
            sb_x_vb: x(sb),
            def_x_vb: x(def),
            vw_x_vb: x(vw),
            predicted_x_vb: x(predicted),
            gap_closed: gap_closed(sb, predicted, vb),
            timeouts: reports.iter().map(|r| r.timeouts).sum(),
            reports,
        }
    }

    /// Key-value summary, one per line.
    pub fn summary(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(|s| s.to_string()).collect();
        format!(
            "seeds={}\nmode={:?}\nselector={:?}\nvb={}\nsb={}\ndef={}\nvw={}\nvb_portfolio={}\npredicted={}\nsb_x_vb={:.4}\ndef_x_vb={:.4}\nvw_x_vb={:.4}\npredicted_x_vb={:.4}\ngap_closed={:.4}\ntimeouts={}\n",
            seeds.join(","),
            self.mode,
            self.kind,
            self.vb,
            self.sb,
            self.def,
            self.vw,
            self.vb_portfolio,
            self.predicted,
            self.sb_x_vb,
            self.def_x_vb,
            self.vw_x_vb,
            self.predicted_x_vb,
            self.gap_closed,
            self.timeouts
        )
    }
}

/// One split-train-predict-evaluate cycle.
pub fn run_cycle(
    m: &RuntimeMatrix,
    features: &FeatureTable,
    seed: u64,
    opts: &PipelineOptions,
) -> Result<Report, PipelineError> {
    let split = make_split(m, seed, opts.mode)?;
    let lookup = |n: &str| features.get(n).map(<[f64]>::to_vec);
    let names = features.names.clone();
    let mut train_opts = opts.train.clone();
    train_opts.forest.seed = seed;
    let ftime = |i: usize| features.time(&m.instances[i].name).unwrap_or(0.0);
    let report = match opts.kind {
        SelectorKind::Oracle => {
            let portfolio = build_portfolio(m, &split.train, train_opts.portfolio_size)?;
            let totals: Vec<f64> = portfolio.indices(m).iter().map(|&c| m.total(&split.train, c)).collect();
            evaluate(m, &split, &portfolio, opts.default_cfg, |i| Ok(oracle_choice(m, i, &portfolio, &totals)), |_| 0.0)?
        }
        SelectorKind::Pairwise | SelectorKind::Single => {
            let x = feature_rows(m, &split.train, lookup)?;
            let sel: Box<dyn Selector> = if opts.kind == SelectorKind::Pairwise {
                Box::new(PairwiseSelector::train(m, &split.train, &x, &names, &train_opts)?)
            } else {
                Box::new(SingleSelector::train(m, &split.train, &x, &names, &train_opts)?)
            };
            let choose = |i: usize| {
                let row = features.get(&m.instances[i].name).expect("coverage checked");
                sel.choose(row)
            };
            evaluate(m, &split, sel.portfolio(), opts.default_cfg, choose, ftime)?
        }
    };
    Ok(report)
}

/// Runs one cycle per seed (in parallel) and aggregates them in seed order.
pub fn run_pipeline(m: &RuntimeMatrix, features: &FeatureTable, opts: &PipelineOptions) -> Result<Aggregate, PipelineError> {
    if opts.kind != SelectorKind::Oracle {
        let gaps = coverage_gaps(m, features);
        if !gaps.is_empty() {
            return Err(PipelineError::Coverage(gaps));
        }
    }
    let reports = opts
        .seeds
        .par_iter()
        .map(|&s| run_cycle(m, features, s, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Aggregate::from_reports(reports, opts))
}
