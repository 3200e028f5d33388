//! Portfolio construction and per-instance configuration selection with
//! pairwise-voting random forests (or a single multi-class forest).

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoders::Config;
use crate::forest::{tune, Forest, ForestError, ForestParams};
use crate::runtime::RuntimeMatrix;

#[derive(Debug, thiserror::Error)]
pub enum SelectorError {
    #[error("portfolio size {size} is not in 1..={available}")]
    PortfolioSize { size: usize, available: usize },
    #[error("empty training set")]
    EmptyTrain,
    #[error("no feature row for instance `{0}`")]
    MissingFeatures(String),
    #[error("sample weight needs a positive virtual best time, got {0}")]
    NonPositiveTime(f64),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed selector bundle: {0}")]
    Format(String),
}

/// Greedily built portfolio. `trace[j]` is the training virtual best after
/// the first `j + 1` configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Portfolio {
    pub configs: Vec<Config>,
    pub start: Config,
    pub trace: Vec<f64>,
}

impl Portfolio {
    /// Column indices of the portfolio configurations in `m`.
    pub fn indices(&self, m: &RuntimeMatrix) -> Vec<usize> {
        self.configs
            .iter()
            .map(|&c| m.config_index(c).expect("portfolio config in matrix"))
            .collect()
    }

    pub fn joined_name(&self) -> String {
        join_names(&self.configs)
    }
}

fn join_names(cs: &[Config]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// One greedy run from `start`: repeatedly add the configuration giving the
/// lowest virtual best on `train`, ties to the lexicographically first.
pub fn greedy_run(m: &RuntimeMatrix, train: &[usize], start: usize, size: usize) -> (Vec<usize>, Vec<f64>) {
    let mut chosen = vec![start];
    let mut best: Vec<f64> = train.iter().map(|&i| m.score(i, start)).collect();
    let mut trace = vec![best.iter().sum()];
    while chosen.len() < size {
        let mut pick: Option<(f64, usize)> = None;
        for c in 0..m.num_configs() {
            if chosen.contains(&c) {
                continue;
            }
            let vb: f64 = train.iter().zip(&best).map(|(&i, &b)| b.min(m.score(i, c))).sum();
            // configs are sorted by name, so the first minimum is lexicographic
            if pick.is_none_or(|(v, _)| vb < v) {
                pick = Some((vb, c));
            }
        }
        let (vb, c) = pick.expect("size checked against config count");
        for (b, &i) in best.iter_mut().zip(train) {
            *b = b.min(m.score(i, c));
        }
        chosen.push(c);
        trace.push(vb);
    }
    (chosen, trace)
}

/// Best portfolio over greedy runs from every starting configuration, by
/// final training virtual best, ties by joined name.
pub fn build_portfolio(m: &RuntimeMatrix, train: &[usize], size: usize) -> Result<Portfolio, SelectorError> {
    if size == 0 || size > m.num_configs() {
        return Err(SelectorError::PortfolioSize {
            size,
            available: m.num_configs(),
        });
    }
    if train.is_empty() {
        return Err(SelectorError::EmptyTrain);
    }
    let runs: Vec<(Vec<usize>, Vec<f64>)> = (0..m.num_configs())
        .into_par_iter()
        .map(|s| greedy_run(m, train, s, size))
        .collect();
    let mut best: Option<(f64, String, usize)> = None;
    for (r, (chosen, trace)) in runs.iter().enumerate() {
        let vb = *trace.last().unwrap();
        let name = join_names(&chosen.iter().map(|&c| m.configs[c]).collect::<Vec<_>>());
        let better = match &best {
            None => true,
            Some((bv, bn, _)) => vb < *bv || (vb == *bv && name < *bn),
        };
        if better {
            best = Some((vb, name, r));
        }
    }
    let (chosen, trace) = runs[best.unwrap().2].clone();
    Ok(Portfolio {
        configs: chosen.iter().map(|&c| m.configs[c]).collect(),
        start: m.configs[chosen[0]],
        trace,
    })
}

/// `⌊log₁₀(10 + t_vb · (t_vw / t_vb))⌋`, evaluated as written.
pub fn sample_weight(t_vb: f64, t_vw: f64) -> Result<u32, SelectorError> {
    if t_vb.is_nan() || t_vb <= 0.0 {
        return Err(SelectorError::NonPositiveTime(t_vb));
    }
    let v = 10.0 + t_vb * (t_vw / t_vb);
    // exact floor of log10 despite rounding in log10 itself
    let mut w = v.log10().floor() as i32;
    while 10f64.powi(w + 1) <= v {
        w += 1;
    }
    while 10f64.powi(w) > v {
        w -= 1;
    }
    Ok(w.max(1) as u32)
}

/// Smallest time used for the virtual best in sample weights; runtimes of
/// exactly zero would otherwise be rejected.
pub const MIN_WEIGHT_TIME: f64 = 1e-3;

/// Sample weight of instance `i` from its best and worst portfolio scores.
pub fn instance_weight(m: &RuntimeMatrix, i: usize, portfolio: &[usize]) -> f64 {
    let scores = portfolio.iter().map(|&c| m.score(i, c));
    let vb = scores.clone().fold(f64::INFINITY, f64::min).max(MIN_WEIGHT_TIME);
    let vw = scores.fold(f64::NEG_INFINITY, f64::max).max(vb);
    f64::from(sample_weight(vb, vw).expect("positive time"))
}

/// Feature rows of `set`, by instance name.
pub fn feature_rows<F>(m: &RuntimeMatrix, set: &[usize], lookup: F) -> Result<Vec<Vec<f64>>, SelectorError>
where
    F: Fn(&str) -> Option<Vec<f64>>,
{
    set.iter()
        .map(|&i| {
            let name = &m.instances[i].name;
            lookup(name).ok_or_else(|| SelectorError::MissingFeatures(name.clone()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub portfolio_size: usize,
    pub forest: ForestParams,
    /// Randomized-search iterations per model; 0 disables tuning.
    pub tune_iterations: usize,
    pub folds: usize,
    pub use_weights: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            portfolio_size: 6,
            forest: ForestParams::default(),
            tune_iterations: 50,
            folds: 5,
            use_weights: true,
        }
    }
}

/// Voting winner: most pairwise wins, then least training total, then name.
/// `winner(a, b)` returns `a` or `b` for portfolio positions with
/// `name(a) < name(b)`.
pub fn vote<W>(configs: &[Config], totals: &[f64], winner: W) -> usize
where
    W: Fn(usize, usize) -> usize,
{
    let n = configs.len();
    let mut votes = vec![0usize; n];
    for (a, b) in ordered_pairs(configs) {
        votes[winner(a, b)] += 1;
    }
    let mut best = 0;
    for c in 1..n {
        let better = votes[c] > votes[best]
            || (votes[c] == votes[best]
                && (totals[c] < totals[best]
                    || (totals[c] == totals[best] && configs[c].to_string() < configs[best].to_string())));
        if better {
            best = c;
        }
    }
    best
}

/// Unordered pairs of portfolio positions, each as (first, second) by name.
pub fn ordered_pairs(configs: &[Config]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..configs.len() {
        for j in i + 1..configs.len() {
            if configs[i].to_string() < configs[j].to_string() {
                out.push((i, j));
            } else {
                out.push((j, i));
            }
        }
    }
    out
}

/// Portfolio-best position for instance `i` (ties to the first name).
pub fn best_in_portfolio(m: &RuntimeMatrix, i: usize, configs: &[Config], cols: &[usize]) -> usize {
    let mut best = 0;
    for p in 1..cols.len() {
        let (s, sb) = (m.score(i, cols[p]), m.score(i, cols[best]));
        if s < sb || (s == sb && configs[p].to_string() < configs[best].to_string()) {
            best = p;
        }
    }
    best
}

pub trait Selector: Sync {
    fn portfolio(&self) -> &Portfolio;
    fn choose(&self, x: &[f64]) -> Result<Config, SelectorError>;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    /// Portfolio positions, `a` first by name; label 0 means `a` wins.
    pub a: usize,
    pub b: usize,
    pub forest: Forest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseSelector {
    pub portfolio: Portfolio,
    pub models: Vec<PairModel>,
    /// Training totals per portfolio position, used to break vote ties.
    pub train_totals: Vec<f64>,
    pub feature_names: Vec<String>,
}

fn model_params(opts: &TrainOptions, k: usize) -> ForestParams {
    ForestParams {
        seed: opts.forest.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64 + 1),
        ..opts.forest.clone()
    }
}

fn fit_model<L>(x: &[Vec<f64>], y: &[usize], w: &[f64], params: ForestParams, opts: &TrainOptions, regret: L) -> Result<Forest, SelectorError>
where
    L: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    let params = if opts.tune_iterations > 0 && x.len() >= opts.folds.max(2) {
        tune(x, y, w, regret, opts.tune_iterations, opts.folds.max(2), &params)?.params
    } else {
        params
    };
    Ok(Forest::fit(x, y, w, &params)?)
}

impl PairwiseSelector {
    /// `x` holds the feature rows of `train`, in the same order.
    pub fn train(
        m: &RuntimeMatrix,
        train: &[usize],
        x: &[Vec<f64>],
        feature_names: &[String],
        opts: &TrainOptions,
    ) -> Result<Self, SelectorError> {
        let portfolio = build_portfolio(m, train, opts.portfolio_size)?;
        Self::train_with_portfolio(m, train, x, feature_names, portfolio, opts)
    }

    pub fn train_with_portfolio(
        m: &RuntimeMatrix,
        train: &[usize],
        x: &[Vec<f64>],
        feature_names: &[String],
        portfolio: Portfolio,
        opts: &TrainOptions,
    ) -> Result<Self, SelectorError> {
        let cols = portfolio.indices(m);
        let w: Vec<f64> = train
            .iter()
            .map(|&i| if opts.use_weights { instance_weight(m, i, &cols) } else { 1.0 })
            .collect();
        let pairs = ordered_pairs(&portfolio.configs);
        let models = pairs
            .par_iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let (ca, cb) = (cols[a], cols[b]);
                let y: Vec<usize> = train.iter().map(|&i| usize::from(m.score(i, ca) > m.score(i, cb))).collect();
                // regret of a fold: chosen score minus the better of the two
                let regret = |rows: &[usize], pred: &[usize]| -> f64 {
                    rows.iter()
                        .zip(pred)
                        .map(|(&r, &p)| {
                            let i = train[r];
                            let (sa, sb) = (m.score(i, ca), m.score(i, cb));
                            (if p == 0 { sa } else { sb }) - sa.min(sb)
                        })
                        .sum()
                };
                let forest = fit_model(x, &y, &w, model_params(opts, k), opts, regret)?;
                Ok(PairModel { a, b, forest })
            })
            .collect::<Result<Vec<_>, SelectorError>>()?;
        Ok(PairwiseSelector {
            train_totals: cols.iter().map(|&c| m.total(train, c)).collect(),
            portfolio,
            models,
            feature_names: feature_names.to_vec(),
        })
    }

    /// Fraction of `x` rows each model labels like the runtimes do.
    pub fn model_accuracy(&self, m: &RuntimeMatrix, set: &[usize], x: &[Vec<f64>]) -> Result<Vec<f64>, SelectorError> {
        let cols = self.portfolio.indices(m);
        self.models
            .iter()
            .map(|pm| {
                let mut hits = 0;
                for (&i, row) in set.iter().zip(x) {
                    let truth = usize::from(m.score(i, cols[pm.a]) > m.score(i, cols[pm.b]));
                    hits += usize::from(pm.forest.predict(row)? == truth);
                }
                Ok(hits as f64 / set.len().max(1) as f64)
            })
            .collect()
    }
}

impl Selector for PairwiseSelector {
    fn portfolio(&self) -> &Portfolio {
        &self.portfolio
    }

    fn choose(&self, x: &[f64]) -> Result<Config, SelectorError> {
        let mut winners = std::collections::HashMap::new();
        for pm in &self.models {
            let label = pm.forest.predict(x)?;
            winners.insert((pm.a, pm.b), if label == 0 { pm.a } else { pm.b });
        }
        let c = vote(&self.portfolio.configs, &self.train_totals, |a, b| winners[&(a, b)]);
        Ok(self.portfolio.configs[c])
    }
}

/// One multi-class forest over portfolio positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleSelector {
    pub portfolio: Portfolio,
    pub forest: Forest,
    pub feature_names: Vec<String>,
}

impl SingleSelector {
    pub fn train(
        m: &RuntimeMatrix,
        train: &[usize],
        x: &[Vec<f64>],
        feature_names: &[String],
        opts: &TrainOptions,
    ) -> Result<Self, SelectorError> {
        let portfolio = build_portfolio(m, train, opts.portfolio_size)?;
        let cols = portfolio.indices(m);
        let y: Vec<usize> = train.iter().map(|&i| best_in_portfolio(m, i, &portfolio.configs, &cols)).collect();
        let w: Vec<f64> = train
            .iter()
            .map(|&i| if opts.use_weights { instance_weight(m, i, &cols) } else { 1.0 })
            .collect();
        let regret = |rows: &[usize], pred: &[usize]| -> f64 {
            rows.iter()
                .zip(pred)
                .map(|(&r, &p)| {
                    let i = train[r];
                    m.score(i, cols[p]) - m.score(i, cols[y[r]])
                })
                .sum()
        };
        let forest = fit_model(x, &y, &w, model_params(opts, 0), opts, regret)?;
        Ok(SingleSelector {
            portfolio,
            forest,
            feature_names: feature_names.to_vec(),
        })
    }
}

impl Selector for SingleSelector {
    fn portfolio(&self) -> &Portfolio {
        &self.portfolio
    }

    fn choose(&self, x: &[f64]) -> Result<Config, SelectorError> {
        Ok(self.portfolio.configs[self.forest.predict(x)?])
    }
}

/// Mean increase of the summed PAR10 score of the selections on `set` when
/// one feature column is shuffled, per feature, over `repeats` shuffles.
pub fn permutation_importance(
    sel: &dyn Selector,
    m: &RuntimeMatrix,
    set: &[usize],
    x: &[Vec<f64>],
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>, SelectorError> {
    let runs = permutation_importance_runs(sel, m, set, x, repeats, seed)?;
    Ok(runs.iter().map(|r| r.iter().sum::<f64>() / repeats.max(1) as f64).collect())
}

/// Per-feature, per-repeat score increases behind [`permutation_importance`].
pub fn permutation_importance_runs(
    sel: &dyn Selector,
    m: &RuntimeMatrix,
    set: &[usize],
    x: &[Vec<f64>],
    repeats: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, SelectorError> {
    let score_rows = |rows: &[Vec<f64>]| -> Result<f64, SelectorError> {
        let mut total = 0.0;
        for (&i, row) in set.iter().zip(rows) {
            let c = sel.choose(row)?;
            total += m.score(i, m.config_index(c).expect("portfolio config in matrix"));
        }
        Ok(total)
    };
    let baseline = score_rows(x)?;
    let nf = x.first().map_or(0, |r| r.len());
    (0..nf)
        .into_par_iter()
        .map(|f| {
            let mut out = Vec::with_capacity(repeats);
            for r in 0..repeats {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((f * repeats + r) as u64 + 1);
                let mut col: Vec<f64> = x.iter().map(|row| row[f]).collect();
                col.shuffle(&mut rng);
                let rows: Vec<Vec<f64>> = x
                    .iter()
                    .zip(&col)
                    .map(|(row, &v)| {
                        let mut row = row.clone();
                        row[f] = v;
                        row
                    })
                    .collect();
                out.push(score_rows(&rows)? - baseline);
            }
            Ok(out)
        })
        .collect()
}

/// A trained selector of either kind, stored as a bundle directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TrainedSelector {
    Pairwise(PairwiseSelector),
    Single(SingleSelector),
}

impl TrainedSelector {
    pub fn as_selector(&self) -> &dyn Selector {
        match self {
            TrainedSelector::Pairwise(s) => s,
            TrainedSelector::Single(s) => s,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedSelector::Pairwise(s) => &s.feature_names,
            TrainedSelector::Single(s) => &s.feature_names,
        }
    }

    /// Writes `manifest.json`, `features.txt`, `tiebreak.csv` and one JSON
    /// forest file per model into `dir`.
    pub fn save(&self, dir: &Path) -> Result<(), SelectorError> {
        std::fs::create_dir_all(dir)?;
        let (kind, portfolio) = match self {
            TrainedSelector::Pairwise(s) => ("pairwise", &s.portfolio),
            TrainedSelector::Single(s) => ("single", &s.portfolio),
        };
        let manifest = Manifest {
            version: 1,
            kind: kind.to_string(),
            portfolio: portfolio.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(|e| SelectorError::Format(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), json + "\n")?;
        std::fs::write(dir.join("features.txt"), self.feature_names().join("\n") + "\n")?;
        match self {
            TrainedSelector::Pairwise(s) => {
                let mut tb = String::from("config,train_total\n");
                for (c, t) in s.portfolio.configs.iter().zip(&s.train_totals) {
                    tb.push_str(&format!("{c},{t}\n"));
                }
                std::fs::write(dir.join("tiebreak.csv"), tb)?;
                for pm in &s.models {
                    let name = format!("pair_{}_{}.json", s.portfolio.configs[pm.a], s.portfolio.configs[pm.b]);
                    std::fs::write(dir.join(name), pm.forest.to_json() + "\n")?;
                }
            }
            TrainedSelector::Single(s) => {
                std::fs::write(dir.join("single.json"), s.forest.to_json() + "\n")?;
            }
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, SelectorError> {
        let fmt = |e: &dyn std::fmt::Display| SelectorError::Format(e.to_string());
        let manifest: Manifest =
            serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?).map_err(|e| fmt(&e))?;
        let feature_names: Vec<String> = std::fs::read_to_string(dir.join("features.txt"))?
            .lines()
            .filter(|l| !l.is_empty())
            .map(String::from)
            .collect();
        let portfolio = manifest.portfolio;
        match manifest.kind.as_str() {
            "pairwise" => {
                let tb = std::fs::read_to_string(dir.join("tiebreak.csv"))?;
                let mut train_totals = vec![f64::NAN; portfolio.configs.len()];
                for line in tb.lines().skip(1).filter(|l| !l.is_empty()) {
                    let (c, t) = line.split_once(',').ok_or_else(|| fmt(&"bad tiebreak row"))?;
                    let c: Config = c.parse().map_err(|e| fmt(&e))?;
                    let p = portfolio.configs.iter().position(|&x| x == c).ok_or_else(|| fmt(&"tiebreak config not in portfolio"))?;
                    train_totals[p] = t.parse().map_err(|e| fmt(&e))?;
                }
                if train_totals.iter().any(|t| !t.is_finite()) {
                    return Err(fmt(&"tiebreak table incomplete"));
                }
                let mut models = Vec::new();
                for (a, b) in ordered_pairs(&portfolio.configs) {
                    let name = format!("pair_{}_{}.json", portfolio.configs[a], portfolio.configs[b]);
                    let forest = Forest::from_json(&std::fs::read_to_string(dir.join(name))?)?;
                    models.push(PairModel { a, b, forest });
                }
                Ok(TrainedSelector::Pairwise(PairwiseSelector {
                    portfolio,
                    models,
                    train_totals,
                    feature_names,
                }))
            }
            "single" => {
                let forest = Forest::from_json(&std::fs::read_to_string(dir.join("single.json"))?)?;
                Ok(TrainedSelector::Single(SingleSelector {
                    portfolio,
                    forest,
                    feature_names,
                }))
            }
            other => Err(fmt(&format!("unknown selector kind `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    version: u32,
    kind: String,
    portfolio: Portfolio,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::InstanceInfo;

    fn cfgs(n: usize) -> Vec<Config> {
        Config::all_available().into_iter().take(n).collect()
    }

    fn matrix(scores: Vec<Vec<f64>>) -> RuntimeMatrix {
        let n = scores.len();
        let k = scores[0].len();
        let inst = (0..n)
            .map(|i| InstanceInfo {
                name: format!("i{i:02}"),
                class: format!("c{}", i % 3),
            })
            .collect();
        RuntimeMatrix::from_scores(inst, cfgs(k), scores, 100.0)
    }

    #[test]
    fn sample_weight_examples() {
        assert_eq!(sample_weight(1.0, 1.0).unwrap(), 1);
        assert_eq!(sample_weight(5.0, 90.0).unwrap(), 2);
        assert_eq!(sample_weight(2.0, 990.0).unwrap(), 3);
        assert!(sample_weight(0.0, 1.0).is_err());
    }

    #[test]
    fn size_one_is_single_best() {
        let m = matrix(vec![vec![5.0, 3.0, 9.0], vec![5.0, 4.0, 1.0]]);
        let p = build_portfolio(&m, &[0, 1], 1).unwrap();
        assert_eq!(p.configs, vec![m.configs[1]]);
        assert!(build_portfolio(&m, &[0, 1], 4).is_err());
    }

    #[test]
    fn dominant_config() {
        let m = matrix(vec![vec![5.0, 1.0, 9.0], vec![5.0, 2.0, 3.0], vec![7.0, 0.5, 8.0]]);
        let p = build_portfolio(&m, &[0, 1, 2], 2).unwrap();
        assert!(p.configs.contains(&m.configs[1]));
        assert_eq!(*p.trace.last().unwrap(), 3.5);
    }

    #[test]
    fn vote_rules() {
        let c = cfgs(3);
        // everyone prefers position 1
        assert_eq!(vote(&c, &[1.0, 2.0, 3.0], |a, b| if a == 1 || b == 1 { 1 } else { a }), 1);
        // cyclic preferences: a 3-way tie broken by training total
        let cyc = |a: usize, b: usize| match (a, b) {
            (0, 1) => 0,
            (1, 2) => 1,
            (0, 2) => 2,
            _ => unreachable!(),
        };
        assert_eq!(vote(&c, &[5.0, 2.0, 3.0], cyc), 1);
        assert_eq!(vote(&c, &[5.0, 5.0, 5.0], cyc), 0);
    }

    #[test]
    fn pairwise_bundle_roundtrip() {
        let m = matrix(vec![vec![1.0, 9.0], vec![9.0, 1.0], vec![1.0, 9.0], vec![9.0, 1.0]]);
        let x = vec![vec![0.0], vec![1.0], vec![0.0], vec![1.0]];
        let names = vec!["f".to_string()];
        let opts = TrainOptions {
            portfolio_size: 2,
            forest: ForestParams { n_estimators: 10, ..Default::default() },
            tune_iterations: 0,
            ..Default::default()
        };
        let s = PairwiseSelector::train(&m, &[0, 1, 2, 3], &x, &names, &opts).unwrap();
        assert_eq!(s.models.len(), 1);
        assert_eq!(s.choose(&[0.0]).unwrap(), m.configs[0]);
        assert_eq!(s.choose(&[1.0]).unwrap(), m.configs[1]);
        let dir = tempfile::tempdir().unwrap();
        let t = TrainedSelector::Pairwise(s);
        t.save(dir.path()).unwrap();
        assert_eq!(TrainedSelector::load(dir.path()).unwrap(), t);
        let single = TrainedSelector::Single(SingleSelector::train(&m, &[0, 1, 2, 3], &x, &names, &opts).unwrap());
        single.save(dir.path()).unwrap();
        assert_eq!(TrainedSelector::load(dir.path()).unwrap(), single);
    }

    #[test]
    fn single_with_one_config() {
        let m = matrix(vec![vec![1.0, 9.0], vec![9.0, 1.0]]);
        let x = vec![vec![0.0], vec![1.0]];
        let opts = TrainOptions {
            portfolio_size: 1,
            forest: ForestParams { n_estimators: 5, ..Default::default() },
            tune_iterations: 0,
            ..Default::default()
        };
        let s = SingleSelector::train(&m, &[0, 1], &x, &["f".into()], &opts).unwrap();
        assert_eq!(s.choose(&[0.0]).unwrap(), s.portfolio.configs[0]);
        assert_eq!(s.choose(&[1.0]).unwrap(), s.portfolio.configs[0]);
    }
}
