use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use satenc::forest::ForestParams;
use satenc::pipeline::{coverage_gaps, evaluate, extract_corpus, instance_name, run_pipeline};
use satenc::runtime::{make_split, Split, DEFAULT_TIMEOUT};
use satenc::selector::{feature_rows, permutation_importance};
use satenc::*;

const CORPUS_ENV: &str = "SATENC_CORPUS";

#[derive(Parser)]
#[command(name = "satenc", version, about = "Encode PB/LI constraints to CNF and learn per-instance encoding choices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode an instance file to DIMACS CNF.
    Encode(EncodeArgs),
    /// Extract features for instance files into a CSV table.
    Features(FeaturesArgs),
    /// Build a greedy portfolio from a runtime table.
    Portfolio(PortfolioArgs),
    /// Train a selector bundle.
    Train(TrainArgs),
    /// Predict a configuration per instance with a trained bundle.
    Predict(PredictArgs),
    /// Evaluate a trained bundle on the test side of its split.
    Evaluate(EvaluateArgs),
    /// Permutation feature importance of a trained bundle.
    Importance(ImportanceArgs),
    /// Repeated split, train, predict and evaluate cycles.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct EncodeArgs {
    instance: PathBuf,
    /// Encoding for pseudo-Boolean constraints.
    #[arg(long, default_value = "Tree")]
    pb_enc: String,
    /// Encoding for linear integer constraints.
    #[arg(long, default_value = "Tree")]
    li_enc: String,
    #[arg(long, default_value_t = DEFAULT_CLAUSE_CAP)]
    clause_cap: usize,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CorpusArg {
    /// Directory of instance files; falls back to $SATENC_CORPUS.
    #[arg(long, env = CORPUS_ENV)]
    corpus: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    /// Individual instance files, used instead of a corpus directory.
    instances: Vec<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RuntimeArgs {
    /// Runtime table: instance,class,config,runtime_s,timed_out[,seed].
    #[arg(long)]
    runtimes: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TIMEOUT)]
    timeout: f64,
}

#[derive(Args, Clone)]
struct SplitArgs {
    /// Split seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Split mode: instance or class.
    #[arg(long, default_value = "instance")]
    split: String,
}

impl SplitArgs {
    fn mode(&self) -> Result<SplitMode> {
        self.split.parse().map_err(|e| anyhow!("{e}"))
    }
}

#[derive(Args)]
struct PortfolioArgs {
    #[command(flatten)]
    rt: RuntimeArgs,
    #[arg(long, default_value_t = 6)]
    portfolio_size: usize,
    #[command(flatten)]
    split: SplitArgs,
    /// Use every instance instead of the training side of the split.
    #[arg(long)]
    all: bool,
}

#[derive(Args, Clone)]
struct LearnArgs {
    #[arg(long, default_value_t = 6)]
    portfolio_size: usize,
    /// Randomized-search iterations per model (0 disables tuning).
    #[arg(long, default_value_t = 50)]
    tune_iters: usize,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 200)]
    trees: usize,
    /// One multi-class forest instead of pairwise voting.
    #[arg(long)]
    single: bool,
    /// Train without sample weights.
    #[arg(long)]
    unweighted: bool,
}

impl LearnArgs {
    fn options(&self, seed: u64) -> TrainOptions {
        TrainOptions {
            portfolio_size: self.portfolio_size,
            forest: ForestParams {
                n_estimators: self.trees,
                seed,
                ..Default::default()
            },
            tune_iterations: self.tune_iters,
            folds: self.folds,
            use_weights: !self.unweighted,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    rt: RuntimeArgs,
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    learn: LearnArgs,
    /// Train on every instance.
    #[arg(long)]
    all: bool,
    /// Bundle directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    rt: RuntimeArgs,
    #[arg(long)]
    features: PathBuf,
    /// Judge choices with true-runtime pairwise oracles instead of the models.
    #[arg(long)]
    oracle: bool,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ImportanceArgs {
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    rt: RuntimeArgs,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    corpus: CorpusArg,
    #[command(flatten)]
    rt: RuntimeArgs,
    /// Precomputed feature table; extracted from the corpus when absent.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Number of cycles; seeds run from --seed upwards.
    #[arg(long, default_value_t = 50)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "instance")]
    split: String,
    #[command(flatten)]
    learn: LearnArgs,
    /// Replace the pairwise models with true-runtime oracles.
    #[arg(long)]
    oracle: bool,
    /// Full JSON report with per-seed choices.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Failure mapped to an exit code.
struct Fail {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail { code: 1, err: e.into() }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let r = match cli.cmd {
        Cmd::Encode(a) => cmd_encode(a),
        Cmd::Features(a) => cmd_features(a).map_err(Fail::from),
        Cmd::Portfolio(a) => cmd_portfolio(a).map_err(Fail::from),
        Cmd::Train(a) => cmd_train(a).map_err(Fail::from),
        Cmd::Predict(a) => cmd_predict(a).map_err(Fail::from),
        Cmd::Evaluate(a) => cmd_evaluate(a).map_err(Fail::from),
        Cmd::Importance(a) => cmd_importance(a).map_err(Fail::from),
        Cmd::Pipeline(a) => cmd_pipeline(a).map_err(Fail::from),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn parse_encoding(s: &str) -> Result<EncodingName> {
    s.parse().map_err(|e| anyhow!("{e}"))
}

fn cmd_encode(a: EncodeArgs) -> Result<(), Fail> {
    let cfg = Config {
        li: parse_encoding(&a.li_enc)?,
        pb: parse_encoding(&a.pb_enc)?,
    };
    let text = std::fs::read_to_string(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let inst = parse_instance(&instance_name(&a.instance), &text)?;
    let f = match encode_instance(&inst, cfg, a.clause_cap) {
        Ok(f) => f,
        Err(e) if e.is_size_abort() => return Err(Fail { code: 2, err: e.into() }),
        Err(e) => return Err(e.into()),
    };
    let mut out = output(a.out.as_deref())?;
    f.write_dimacs(&mut out)?;
    out.flush()?;
    eprintln!(
        "config={cfg} vars={} aux_vars={} clauses={}",
        f.num_vars, f.stats.aux_vars, f.stats.clauses
    );
    Ok(())
}

fn corpus_dir(c: &CorpusArg) -> Result<PathBuf> {
    c.corpus
        .clone()
        .ok_or_else(|| anyhow!("no corpus directory: pass --corpus or set {CORPUS_ENV}"))
}

fn cmd_features(a: FeaturesArgs) -> Result<()> {
    let table = if a.instances.is_empty() {
        extract_corpus(&corpus_dir(&a.corpus)?)?
    } else {
        let mut t = FeatureTable::new(feature_names().to_vec());
        for p in &a.instances {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let name = instance_name(p);
            let inst = parse_instance(&name, &text).with_context(|| p.display().to_string())?;
            let (f, secs) = satenc::features::extract_timed(&inst)?;
            t.insert(&name, f.values, secs);
        }
        t
    };
    let mut out = output(a.out.as_deref())?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

fn load_runtimes(rt: &RuntimeArgs) -> Result<RuntimeMatrix> {
    let (m, report) = RuntimeMatrix::load(&rt.runtimes, rt.timeout, &BTreeSet::new())
        .with_context(|| format!("loading {}", rt.runtimes.display()))?;
    for n in &report.dropped_all_timeout {
        eprintln!("note: dropped {n}: every configuration timed out");
    }
    Ok(m)
}

fn load_features(p: &Path) -> Result<FeatureTable> {
    FeatureTable::load(p).with_context(|| format!("loading {}", p.display()))
}

fn check_coverage(m: &RuntimeMatrix, f: &FeatureTable) -> Result<()> {
    let gaps = coverage_gaps(m, f);
    if !gaps.is_empty() {
        for g in &gaps {
            eprintln!("missing features: {g}");
        }
        bail!("{} instance(s) lack feature rows", gaps.len());
    }
    Ok(())
}

fn split_for(m: &RuntimeMatrix, s: &SplitArgs, all: bool) -> Result<Split> {
    let mode = s.mode()?;
    if all {
        return Ok(Split {
            train: (0..m.num_instances()).collect(),
            test: Vec::new(),
            seed: s.seed,
            mode,
        });
    }
    Ok(make_split(m, s.seed, mode)?)
}

fn cmd_portfolio(a: PortfolioArgs) -> Result<()> {
    let m = load_runtimes(&a.rt)?;
    let split = split_for(&m, &a.split, a.all)?;
    let p = build_portfolio(&m, &split.train, a.portfolio_size)?;
    let all: Vec<usize> = (0..m.num_configs()).collect();
    let vb_all = satenc::runtime::virtual_best(&m, &split.train, &all);
    println!("position,config,train_vb,train_vb_x_all");
    for (k, (c, vb)) in p.configs.iter().zip(&p.trace).enumerate() {
        println!("{},{c},{vb},{:.4}", k + 1, vb / vb_all);
    }
    Ok(())
}

/// Split provenance stored next to a trained bundle.
#[derive(serde::Serialize, serde::Deserialize)]
struct RunInfo {
    seed: u64,
    mode: SplitMode,
    all: bool,
    timeout: f64,
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let m = load_runtimes(&a.rt)?;
    let f = load_features(&a.features)?;
    check_coverage(&m, &f)?;
    let split = split_for(&m, &a.split, a.all)?;
    let x = feature_rows(&m, &split.train, |n| f.get(n).map(<[f64]>::to_vec))?;
    let opts = a.learn.options(a.split.seed);
    let sel = if a.learn.single {
        TrainedSelector::Single(SingleSelector::train(&m, &split.train, &x, &f.names, &opts)?)
    } else {
        TrainedSelector::Pairwise(PairwiseSelector::train(&m, &split.train, &x, &f.names, &opts)?)
    };
    sel.save(&a.out)?;
    let info = RunInfo {
        seed: split.seed,
        mode: split.mode,
        all: a.all,
        timeout: a.rt.timeout,
    };
    std::fs::write(a.out.join("run.json"), serde_json::to_string_pretty(&info)? + "\n")?;
    split.write(&m, File::create(a.out.join("split.txt"))?)?;
    let p = sel.as_selector().portfolio();
    println!("portfolio={}", p.joined_name());
    println!("train_vb={}", p.trace.last().copied().unwrap_or(0.0));
    Ok(())
}

fn load_bundle(dir: &Path) -> Result<(TrainedSelector, RunInfo)> {
    let sel = TrainedSelector::load(dir).with_context(|| format!("loading bundle {}", dir.display()))?;
    let info: RunInfo = serde_json::from_str(&std::fs::read_to_string(dir.join("run.json"))?)?;
    Ok((sel, info))
}

fn check_names(sel: &TrainedSelector, f: &FeatureTable) -> Result<()> {
    if sel.feature_names() != f.names.as_slice() {
        bail!("feature table columns differ from those the bundle was trained on");
    }
    Ok(())
}

fn cmd_predict(a: PredictArgs) -> Result<()> {
    let (sel, _) = load_bundle(&a.model)?;
    let f = load_features(&a.features)?;
    check_names(&sel, &f)?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "instance,config")?;
    for (name, (row, _)) in &f.rows {
        writeln!(out, "{name},{}", sel.as_selector().choose(row)?)?;
    }
    out.flush()?;
    Ok(())
}

fn test_split(m: &RuntimeMatrix, info: &RunInfo) -> Result<Split> {
    if info.all {
        bail!("bundle was trained on every instance; there is no test side");
    }
    Ok(make_split(m, info.seed, info.mode)?)
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<()> {
    let (sel, info) = load_bundle(&a.model)?;
    let m = load_runtimes(&a.rt)?;
    let f = load_features(&a.features)?;
    check_names(&sel, &f)?;
    check_coverage(&m, &f)?;
    let split = test_split(&m, &info)?;
    let s = sel.as_selector();
    let p = s.portfolio();
    let report = if a.oracle {
        let totals: Vec<f64> = p.indices(&m).iter().map(|&c| m.total(&split.train, c)).collect();
        evaluate(&m, &split, p, Config::DEFAULT, |i| Ok(satenc::pipeline::oracle_choice(&m, i, p, &totals)), |_| 0.0)?
    } else {
        let name = |i: usize| m.instances[i].name.as_str();
        evaluate(
            &m,
            &split,
            p,
            Config::DEFAULT,
            |i| s.choose(f.get(name(i)).expect("coverage checked")),
            |i| f.time(name(i)).unwrap_or(0.0),
        )?
    };
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    out.flush()?;
    Ok(())
}

fn cmd_importance(a: ImportanceArgs) -> Result<()> {
    let (sel, info) = load_bundle(&a.model)?;
    let m = load_runtimes(&a.rt)?;
    let f = load_features(&a.features)?;
    check_names(&sel, &f)?;
    check_coverage(&m, &f)?;
    let split = test_split(&m, &info)?;
    let x = feature_rows(&m, &split.test, |n| f.get(n).map(<[f64]>::to_vec))?;
    let imp = permutation_importance(sel.as_selector(), &m, &split.test, &x, a.repeats, a.seed)?;
    let mut order: Vec<usize> = (0..imp.len()).collect();
    order.sort_by(|&i, &j| imp[j].total_cmp(&imp[i]).then(i.cmp(&j)));
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "feature,importance")?;
    for i in order {
        writeln!(out, "{},{}", f.names[i], imp[i])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_pipeline(a: PipelineArgs) -> Result<()> {
    let m = load_runtimes(&a.rt)?;
    let mode: SplitMode = a.split.parse().map_err(|e| anyhow!("{e}"))?;
    let features = match &a.features {
        Some(p) => load_features(p)?,
        None if a.oracle => FeatureTable::new(Vec::new()),
        None => extract_corpus(&corpus_dir(&a.corpus)?)?,
    };
    if !a.oracle {
        check_coverage(&m, &features)?;
    }
    let kind = match (a.oracle, a.learn.single) {
        (true, _) => SelectorKind::Oracle,
        (false, true) => SelectorKind::Single,
        (false, false) => SelectorKind::Pairwise,
    };
    let opts = PipelineOptions {
        seeds: (a.seed..a.seed + a.seeds).collect(),
        mode,
        kind,
        train: a.learn.options(0),
        default_cfg: Config::DEFAULT,
    };
    let agg = run_pipeline(&m, &features, &opts)?;
    print!("{}", agg.summary());
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_string_pretty(&agg)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
