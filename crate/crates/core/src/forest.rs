//! Random forest classifier: weighted bootstrap, weighted Gini splits,
//! probability averaging, and randomized hyperparameter search.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("empty training set")]
    Empty,
    #[error("rows, labels and weights differ in length ({0}, {1}, {2})")]
    LengthMismatch(usize, usize, usize),
    #[error("row {row} has {got} features, expected {expected}")]
    Dimension { row: usize, got: usize, expected: usize },
    #[error("row {row} feature {feature} is not finite")]
    NonFinite { row: usize, feature: usize },
    #[error("row {0} has a nonpositive weight")]
    Weight(usize),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("{rows} rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("malformed forest: {0}")]
    Format(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_estimators: usize,
    pub max_features_fraction: f64,
    /// `None` grows until purity.
    pub max_depth: Option<usize>,
    pub sample_fraction: f64,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_estimators: 200,
            max_features_fraction: 0.5,
            max_depth: None,
            sample_fraction: 1.0,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<(), ForestError> {
        let bad = |m: &str| Err(ForestError::Params(m.to_string()));
        if self.n_estimators == 0 {
            return bad("n_estimators must be positive");
        }
        if !(self.max_features_fraction > 0.0 && self.max_features_fraction <= 1.0) {
            return bad("max_features_fraction must lie in (0, 1]");
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return bad("sample_fraction must lie in (0, 1]");
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { probs: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Root is node 0.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_probs(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { probs } => return probs,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(t, *left).max(rec(t, *right)),
            }
        }
        rec(self, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub version: u32,
    /// Distinct training labels, sorted; probability vectors follow this order.
    pub classes: Vec<usize>,
    pub num_features: usize,
    pub params: ForestParams,
    pub trees: Vec<Tree>,
}

/// Weighted Gini impurity `W · (1 − Σ p²)` of a class-weight histogram.
fn gini(hist: &[f64]) -> f64 {
    let w: f64 = hist.iter().sum();
    if w <= 0.0 {
        return 0.0;
    }
    w - hist.iter().map(|h| h * h).sum::<f64>() / w
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub impurity: f64,
}

/// Best split of `rows` (with multiplicities `mult`) over `features`:
/// minimal summed weighted Gini of both sides, candidates at midpoints of
/// consecutive distinct values; ties keep the earlier feature, then the
/// smaller threshold.
pub fn best_split(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    rows: &[(usize, f64)],
    features: &[usize],
) -> Option<SplitChoice> {
    let mut best: Option<SplitChoice> = None;
    let mut total = vec![0.0; n_classes];
    for &(r, m) in rows {
        total[y[r]] += m;
    }
    let mut sorted = rows.to_vec();
    for &f in features {
        sorted.sort_by(|a, b| x[a.0][f].total_cmp(&x[b.0][f]));
        let mut left = vec![0.0; n_classes];
        for i in 0..sorted.len() - 1 {
            let (r, m) = sorted[i];
            left[y[r]] += m;
            let (a, b) = (x[r][f], x[sorted[i + 1].0][f]);
            if a == b {
                continue;
            }
            let right: Vec<f64> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let imp = gini(&left) + gini(&right);
            if best.as_ref().is_none_or(|s| imp < s.impurity - 1e-12) {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: a + (b - a) / 2.0,
                    impurity: imp,
                });
            }
        }
    }
    best
}

struct Grower<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_try: usize,
    max_depth: Option<usize>,
}

impl Grower<'_> {
    fn grow(&self, rows: Vec<(usize, f64)>, depth: usize, rng: &mut ChaCha8Rng, nodes: &mut Vec<Node>) -> usize {
        let me = nodes.len();
        let mut hist = vec![0.0; self.n_classes];
        for &(r, m) in &rows {
            hist[self.y[r]] += m;
        }
        let w: f64 = hist.iter().sum();
        let leaf = |hist: Vec<f64>| Node::Leaf {
            probs: hist.iter().map(|h| h / w).collect(),
        };
        let pure = hist.iter().filter(|&&h| h > 0.0).count() <= 1;
        if pure || self.max_depth.is_some_and(|d| depth >= d) {
            nodes.push(leaf(hist));
            return me;
        }
        let n_features = self.x[0].len();
        let mut feats = index::sample(rng, n_features, self.n_try).into_vec();
        feats.sort_unstable();
        let Some(split) = best_split(self.x, self.y, self.n_classes, &rows, &feats) else {
            nodes.push(leaf(hist));
            return me;
        };
        nodes.push(Node::Leaf { probs: Vec::new() });
        let (l, r): (Vec<_>, Vec<_>) = rows.into_iter().partition(|&(i, _)| self.x[i][split.feature] <= split.threshold);
        let left = self.grow(l, depth + 1, rng, nodes);
        let right = self.grow(r, depth + 1, rng, nodes);
        nodes[me] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        me
    }
}

/// Generator for tree `t`: the root seed with stream `t + 1`.
fn tree_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64 + 1);
    rng
}

fn check_data(x: &[Vec<f64>], y: &[usize], w: &[f64]) -> Result<usize, ForestError> {
    if x.len() != y.len() || x.len() != w.len() {
        return Err(ForestError::LengthMismatch(x.len(), y.len(), w.len()));
    }
    if x.is_empty() {
        return Err(ForestError::Empty);
    }
    let f = x[0].len();
    for (row, r) in x.iter().enumerate() {
        if r.len() != f {
            return Err(ForestError::Dimension { row, got: r.len(), expected: f });
        }
        if let Some(feature) = r.iter().position(|v| !v.is_finite()) {
            return Err(ForestError::NonFinite { row, feature });
        }
        if !(w[row] > 0.0 && w[row].is_finite()) {
            return Err(ForestError::Weight(row));
        }
    }
    Ok(f)
}

impl Forest {
    /// Fits a forest; each tree sees `⌈sample_fraction · N⌉` rows drawn with
    /// replacement with probability proportional to `w`.
    pub fn fit(x: &[Vec<f64>], y: &[usize], w: &[f64], params: &ForestParams) -> Result<Forest, ForestError> {
        params.validate()?;
        let num_features = check_data(x, y, w)?;
        let mut classes: Vec<usize> = y.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let yi: Vec<usize> = y.iter().map(|v| classes.binary_search(v).unwrap()).collect();
        let n = x.len();
        let draws = ((params.sample_fraction * n as f64).ceil() as usize).clamp(1, n);
        let n_try = ((params.max_features_fraction * num_features as f64).ceil() as usize).clamp(1, num_features.max(1));
        let dist = WeightedIndex::new(w).map_err(|e| ForestError::Params(e.to_string()))?;
        let grower = Grower {
            x,
            y: &yi,
            n_classes: classes.len(),
            n_try,
            max_depth: params.max_depth,
        };
        let trees = (0..params.n_estimators)
            .into_par_iter()
            .map(|t| {
                let mut rng = tree_rng(params.seed, t);
                let mut mult = vec![0.0; n];
                for _ in 0..draws {
                    mult[dist.sample(&mut rng)] += 1.0;
                }
                let rows: Vec<(usize, f64)> = mult.iter().enumerate().filter(|e| *e.1 > 0.0).map(|(i, &m)| (i, m)).collect();
                let mut nodes = Vec::new();
                if num_features == 0 {
                    let mut hist = vec![0.0; classes.len()];
                    for &(r, m) in &rows {
                        hist[yi[r]] += m;
                    }
                    let s: f64 = hist.iter().sum();
                    nodes.push(Node::Leaf { probs: hist.iter().map(|h| h / s).collect() });
                } else {
                    grower.grow(rows, 0, &mut rng, &mut nodes);
                }
                Tree { nodes }
            })
            .collect();
        Ok(Forest {
            version: FORMAT_VERSION,
            classes,
            num_features,
            params: params.clone(),
            trees,
        })
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, ForestError> {
        if x.len() != self.num_features {
            return Err(ForestError::Dimension { row: 0, got: x.len(), expected: self.num_features });
        }
        let mut acc = vec![0.0; self.classes.len()];
        for t in &self.trees {
            for (a, p) in acc.iter_mut().zip(t.leaf_probs(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        Ok(acc.into_iter().map(|a| a / n).collect())
    }

    /// Most probable label; ties go to the smaller label.
    pub fn predict(&self, x: &[f64]) -> Result<usize, ForestError> {
        let p = self.predict_proba(x)?;
        let mut best = 0;
        for i in 1..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest serializes")
    }

    pub fn from_json(s: &str) -> Result<Forest, ForestError> {
        let f: Forest = serde_json::from_str(s).map_err(|e| ForestError::Format(e.to_string()))?;
        if f.version != FORMAT_VERSION {
            return Err(ForestError::Format(format!("unsupported version {}", f.version)));
        }
        Ok(f)
    }
}

pub const TUNE_FEATURE_FRACTIONS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const TUNE_DEPTHS: [Option<usize>; 7] = [Some(4), Some(6), Some(8), Some(12), Some(16), Some(24), None];
pub const TUNE_SAMPLE_FRACTIONS: [f64; 6] = [0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct TuneResult {
    pub params: ForestParams,
    pub loss: f64,
    /// Mean fold loss of every sampled tuple, in sampling order.
    pub history: Vec<(ForestParams, f64)>,
}

/// Randomized search over the feature fraction, depth and sample fraction
/// with `folds`-fold cross-validation. `loss(test_rows, predicted_labels)`
/// scores one fold; the tuple with the least mean fold loss wins, ties going
/// to the first sampled. `base` supplies the tree count and seed.
pub fn tune<L>(
    x: &[Vec<f64>],
    y: &[usize],
    w: &[f64],
    loss: L,
    iterations: usize,
    folds: usize,
    base: &ForestParams,
) -> Result<TuneResult, ForestError>
where
    L: Fn(&[usize], &[usize]) -> f64 + Sync,
{
    check_data(x, y, w)?;
    if iterations == 0 {
        return Err(ForestError::Params("iterations must be positive".into()));
    }
    if folds < 2 || x.len() < folds {
        return Err(ForestError::TooFewRows { rows: x.len(), folds });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed);
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.shuffle(&mut rng);
    let fold_of: Vec<Vec<usize>> = (0..folds)
        .map(|f| {
            let mut v: Vec<usize> = order.iter().skip(f).step_by(folds).copied().collect();
            v.sort_unstable();
            v
        })
        .collect();
    let candidates: Vec<ForestParams> = (0..iterations)
        .map(|i| ForestParams {
            n_estimators: base.n_estimators,
            max_features_fraction: TUNE_FEATURE_FRACTIONS[rng.random_range(0..TUNE_FEATURE_FRACTIONS.len())],
            max_depth: TUNE_DEPTHS[rng.random_range(0..TUNE_DEPTHS.len())],
            sample_fraction: TUNE_SAMPLE_FRACTIONS[rng.random_range(0..TUNE_SAMPLE_FRACTIONS.len())],
            seed: base.seed.wrapping_add(1 + i as u64),
        })
        .collect();
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|p| {
            let mut total = 0.0;
            for test in &fold_of {
                let train: Vec<usize> = (0..x.len()).filter(|i| test.binary_search(i).is_err()).collect();
                let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
                let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
                let tw: Vec<f64> = train.iter().map(|&i| w[i]).collect();
                let f = Forest::fit(&tx, &ty, &tw, p).expect("validated data");
                let pred: Vec<usize> = test.iter().map(|&i| f.predict(&x[i]).expect("dimension")).collect();
                total += loss(test, &pred);
            }
            total / folds as f64
        })
        .collect();
    let mut best = 0;
    for i in 1..scores.len() {
        if scores[i] < scores[best] {
            best = i;
        }
    }
    let mut params = candidates[best].clone();
    params.seed = base.seed;
    Ok(TuneResult {
        params,
        loss: scores[best],
        history: candidates.into_iter().zip(scores).collect(),
    })
}
