//! The `lipb` feature set: 45 aggregate features of the LI constraints
//! followed by the same 45 for the PB constraints.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use crate::amo::{pbamo_forms, AmoDetector, PbAmoConstraint};
use crate::model::{ConstraintClass, Instance, ModelError, PreparedInstance, Term, TermExpr};

/// Summary statistics of a list of numbers. All zero for an empty list.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub median: f64,
    pub iqr: f64,
    /// Non-parametric skew `(mean − median) / σ` with population σ.
    pub skew: f64,
    /// Base-2 Shannon entropy of the value frequencies.
    pub entropy: f64,
    pub sum: f64,
}

/// Quantile with linear interpolation between order statistics of `sorted`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn stat_kit(values: &[f64]) -> Stats {
    if values.is_empty() {
        return Stats::default();
    }
    // sorting first makes every statistic independent of input order
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let sum: f64 = v.iter().sum();
    let mean = sum / n;
    let median = quantile(&v, 0.5);
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let skew = if sd > 0.0 { (mean - median) / sd } else { 0.0 };
    let mut freq: BTreeMap<u64, usize> = BTreeMap::new();
    for x in &v {
        // +0.0 and −0.0 count as one value
        *freq.entry((x + 0.0).to_bits()).or_default() += 1;
    }
    let entropy = freq
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0);
    Stats {
        min: v[0],
        max: v[v.len() - 1],
        mean,
        median,
        iqr: quantile(&v, 0.75) - quantile(&v, 0.25),
        skew,
        entropy,
        sum,
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Agg {
    Min,
    Max,
    Mean,
    Median,
    Iqr,
    Skew,
    Ent,
    Sum,
}

impl Agg {
    fn name(self) -> &'static str {
        match self {
            Agg::Min => "min",
            Agg::Max => "max",
            Agg::Mean => "mean",
            Agg::Median => "median",
            Agg::Iqr => "iqr",
            Agg::Skew => "skew",
            Agg::Ent => "ent",
            Agg::Sum => "sum",
        }
    }

    fn of(self, s: &Stats) -> f64 {
        match self {
            Agg::Min => s.min,
            Agg::Max => s.max,
            Agg::Mean => s.mean,
            Agg::Median => s.median,
            Agg::Iqr => s.iqr,
            Agg::Skew => s.skew,
            Agg::Ent => s.entropy,
            Agg::Sum => s.sum,
        }
    }
}

use Agg::*;

/// Per-constraint aspects with their aggregates, in output order.
const ASPECTS: [(&str, &[Agg]); 16] = [
    ("n", &[Min, Max, Mean, Median, Iqr, Skew, Ent, Sum]),
    ("wsum", &[Sum, Skew, Iqr]),
    ("q0", &[Min, Mean]),
    ("q4", &[Max, Median, Mean]),
    ("q2", &[Median, Skew, Ent]),
    ("iqr", &[Median, Skew]),
    ("skew", &[Mean, Min, Max, Ent]),
    ("sep", &[Mean, Max]),
    ("sepr", &[Mean, Max]),
    ("amogs", &[Mean]),
    ("asize_mn", &[Mean]),
    ("asize_r2n", &[Mean]),
    ("amaxw_mn", &[Mean]),
    ("amaxw_skew", &[Mean, Ent]),
    ("k", &[Mean, Median, Max, Iqr, Ent, Skew]),
    ("k_amo_prod", &[Mean, Iqr, Ent]),
];

pub const BLOCK_LEN: usize = 45;
pub const NUM_FEATURES: usize = 2 * BLOCK_LEN;

/// Canonical feature names: the `li_` block then the `pb_` block.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(|| {
        let mut out = Vec::with_capacity(NUM_FEATURES);
        for block in ["li", "pb"] {
            out.push(format!("{block}_count"));
            for (aspect, aggs) in ASPECTS {
                for a in aggs {
                    out.push(format!("{block}_{aspect}_{}", a.name()));
                }
            }
        }
        out
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn names(&self) -> &'static [String] {
        feature_names()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_names().iter().position(|n| n == name).map(|i| self.values[i])
    }
}

/// Aspect values of one constraint in `ASPECTS` order.
fn aspects(p: &PbAmoConstraint) -> [f64; 16] {
    let w: Vec<f64> = p.groups.iter().flat_map(|g| g.terms.iter().map(|t| t.0 as f64)).collect();
    let n = w.len() as f64;
    let mut sorted = w.clone();
    sorted.sort_by(f64::total_cmp);
    let (q1, q2, q3) = (quantile(&sorted, 0.25), quantile(&sorted, 0.5), quantile(&sorted, 0.75));
    let bowley = if q3 > q1 { (q3 + q1 - 2.0 * q2) / (q3 - q1) } else { 0.0 };
    let mut distinct = sorted.clone();
    distinct.dedup();
    let sep = distinct.len() as f64;
    let amogs = p.groups.len() as f64;
    let asize_mn = if amogs > 0.0 { n / amogs } else { 0.0 };
    let maxw: Vec<f64> = p.groups.iter().map(|g| g.max_weight() as f64).collect();
    let maxw_stats = stat_kit(&maxw);
    let k = p.bound as f64;
    [
        n,
        w.iter().sum(),
        sorted.first().copied().unwrap_or(0.0),
        sorted.last().copied().unwrap_or(0.0),
        q2,
        q3 - q1,
        bowley,
        sep,
        if n > 0.0 { sep / n } else { 0.0 },
        amogs,
        asize_mn,
        if n > 0.0 { asize_mn / n } else { 0.0 },
        maxw_stats.mean,
        maxw_stats.skew,
        k,
        k * amogs,
    ]
}

fn term_key(t: &Term) -> (usize, u8, &'static str, i64, i64) {
    match t.expr {
        TermExpr::Var(v) => (v.0, 0, "", 0, t.coef),
        TermExpr::Not(v) => (v.0, 1, "", 0, t.coef),
        TermExpr::Cmp { var, op, rhs } => (var.0, 2, op.symbol(), rhs, t.coef),
    }
}

fn block(rows: &[[f64; 16]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(BLOCK_LEN);
    out.push(rows.len() as f64);
    for (i, (_, aggs)) in ASPECTS.iter().enumerate() {
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        let s = stat_kit(&col);
        out.extend(aggs.iter().map(|a| a.of(&s)));
    }
    out
}

/// Extracts the 90 `lipb` features. Coefficient aspects are measured on the
/// positive-weight `≤` form with AMO groups; an equality contributes its
/// `≤` half only.
pub fn extract_lipb(inst: &Instance) -> Result<FeatureVector, ModelError> {
    let mut prep = PreparedInstance::new(inst)?;
    for p in &mut prep.constraints {
        p.constraint.terms.sort_by_key(term_key);
    }
    let det = AmoDetector::new(&prep);
    let mut li = Vec::new();
    let mut pb = Vec::new();
    for p in &prep.constraints {
        let form = pbamo_forms(&p.constraint, &det, p.source)?.swap_remove(0);
        let row = aspects(&form);
        match p.class {
            ConstraintClass::Li => li.push(row),
            ConstraintClass::Pb => pb.push(row),
        }
    }
    let mut values = block(&li);
    values.extend(block(&pb));
    debug_assert!(values.iter().all(|v| v.is_finite()));
    Ok(FeatureVector { values })
}

/// [`extract_lipb`] plus its wall time in seconds.
pub fn extract_timed(inst: &Instance) -> Result<(FeatureVector, f64), ModelError> {
    let t = Instant::now();
    let f = extract_lipb(inst)?;
    Ok((f, t.elapsed().as_secs_f64()))
}

#[derive(Debug, thiserror::Error)]
pub enum FeatureTableError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature table row {line}: {msg}")]
    BadRow { line: usize, msg: String },
}

/// Feature rows keyed by instance name, with optional extraction times.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: std::collections::BTreeMap<String, (Vec<f64>, f64)>,
}

impl FeatureTable {
    pub fn new(names: Vec<String>) -> Self {
        FeatureTable { names, rows: Default::default() }
    }

    pub fn insert(&mut self, instance: &str, values: Vec<f64>, time_s: f64) {
        assert_eq!(values.len(), self.names.len(), "feature row width");
        self.rows.insert(instance.to_string(), (values, time_s));
    }

    pub fn get(&self, instance: &str) -> Option<&[f64]> {
        self.rows.get(instance).map(|r| r.0.as_slice())
    }

    pub fn time(&self, instance: &str) -> Option<f64> {
        self.rows.get(instance).map(|r| r.1)
    }

    /// Header `instance,<names>,feat_time_s`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), FeatureTableError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["instance".to_string()];
        header.extend(self.names.iter().cloned());
        header.push("feat_time_s".into());
        w.write_record(&header)?;
        for (name, (vals, t)) in &self.rows {
            let mut rec = vec![name.clone()];
            rec.extend(vals.iter().map(|v| v.to_string()));
            rec.push(t.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table; the trailing `feat_time_s` column is optional.
    pub fn read<R: std::io::Read>(input: R) -> Result<Self, FeatureTableError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
        let bad = |line, msg: &str| FeatureTableError::BadRow { line, msg: msg.to_string() };
        if header.first().map(String::as_str) != Some("instance") {
            return Err(bad(1, "first column must be `instance`"));
        }
        let timed = header.last().map(String::as_str) == Some("feat_time_s");
        let end = header.len() - usize::from(timed);
        let mut table = FeatureTable::new(header[1..end].to_vec());
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let line = k + 2;
            if rec.len() != header.len() {
                return Err(bad(line, "wrong number of fields"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line, &format!("not a number: `{s}`")));
            let vals = (1..end).map(|j| num(&rec[j])).collect::<Result<Vec<_>, _>>()?;
            let t = if timed { num(&rec[end])? } else { 0.0 };
            if table.rows.contains_key(&rec[0]) {
                return Err(bad(line, "duplicate instance"));
            }
            table.insert(&rec[0], vals, t);
        }
        Ok(table)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, FeatureTableError> {
        Self::read(std::fs::File::open(path)?)
    }
}
