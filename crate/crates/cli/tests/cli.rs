use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURE: &str = "bool x1 x2 x3 x4 x5 x6 x7\ncon 20*x1 + 30*x2 + 20*x3 + 40*x4 + 10*x5 + 20*x6 + 1*x7 <= 55\n";

fn satenc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satenc"))
        .args(args)
        .env_remove("SATENC_CORPUS")
        .output()
        .expect("run satenc")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture_file(dir: &Path) -> PathBuf {
    let p = dir.join("fixture.lipb");
    std::fs::write(&p, FIXTURE).unwrap();
    p
}

/// Ten-instance corpus (two per family) with matching runtime rows.
fn small_corpus(dir: &Path) -> (PathBuf, PathBuf) {
    let corpus = dir.join("corpus");
    std::fs::create_dir_all(&corpus).unwrap();
    let mut keep = Vec::new();
    for fam in ["knapsack", "assign", "sched", "mixed", "card"] {
        for i in 0..2 {
            let name = format!("{fam}_{i:02}");
            std::fs::copy(data().join("corpus").join(format!("{name}.lipb")), corpus.join(format!("{name}.lipb"))).unwrap();
            keep.push(name);
        }
    }
    let all = std::fs::read_to_string(data().join("runtimes.csv")).unwrap();
    let mut lines = all.lines();
    let mut out = String::from(lines.next().unwrap());
    out.push('\n');
    for l in lines.filter(|l| keep.iter().any(|k| l.starts_with(&format!("{k},")))) {
        out.push_str(l);
        out.push('\n');
    }
    let rt = dir.join("runtimes.csv");
    std::fs::write(&rt, out).unwrap();
    (corpus, rt)
}

#[test]
fn encode_fixture_reports_stats() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture_file(dir.path());
    let o = satenc(&["encode", s(&f), "--pb-enc", "tree"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("aux_vars=10 clauses=30"), "{}", stderr(&o));
    let cnf = String::from_utf8(o.stdout).unwrap();
    assert!(cnf.contains("\np cnf 17 30\n"));
    assert!(cnf.starts_with("c con 0 enc Tree vars 10 clauses 30\n"));
}

#[test]
fn encode_to_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture_file(dir.path());
    let out = dir.path().join("f.cnf");
    let a = satenc(&["encode", s(&f), "--pb-enc", "GGT", "-o", s(&out)]);
    assert!(a.status.success());
    let b = satenc(&["encode", s(&f), "--pb-enc", "GGT"]);
    assert_eq!(std::fs::read(&out).unwrap(), b.stdout);
}

#[test]
fn unknown_encoding_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture_file(dir.path());
    let o = satenc(&["encode", s(&f), "--pb-enc", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let e = stderr(&o);
    for n in ["Tree", "MDD", "GGT", "GGTd", "RGGT", "GSWC", "GGPW"] {
        assert!(e.contains(n), "{e}");
    }
}

#[test]
fn clause_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = fixture_file(dir.path());
    let o = satenc(&["encode", s(&f), "--clause-cap", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn bad_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.lipb");
    std::fs::write(&p, "bool a\ncon 1*zz <= 1\n").unwrap();
    assert_eq!(satenc(&["encode", s(&p)]).status.code(), Some(1));
    assert_eq!(satenc(&["encode", "/nonexistent.lipb"]).status.code(), Some(1));
    assert_eq!(satenc(&["nosuchcommand"]).status.code(), Some(1));
}

fn pipeline_json(dir: &Path, corpus: &Path, rt: &Path, extra: &[&str], name: &str) -> serde_json::Value {
    let out = dir.join(name);
    let mut args = vec![
        "pipeline", "--corpus", s(corpus), "--runtimes", s(rt), "--seeds", "1", "--tune-iters", "0", "--trees", "20",
        "--portfolio-size", "3", "-o", s(&out),
    ];
    args.extend_from_slice(extra);
    let o = satenc(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = String::from_utf8(o.stdout).unwrap();
    for k in ["vb=", "sb=", "def=", "vw=", "predicted=", "gap_closed="] {
        assert!(summary.lines().any(|l| l.starts_with(k)), "{k} missing from\n{summary}");
    }
    serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap()
}

#[test]
fn pipeline_schema_and_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, rt) = small_corpus(dir.path());
    let a = pipeline_json(dir.path(), &corpus, &rt, &[], "a.json");
    let b = pipeline_json(dir.path(), &corpus, &rt, &[], "b.json");
    let r = &a["reports"][0];
    for k in ["vb", "sb", "def", "vw", "predicted", "gap_closed", "timeouts", "choices"] {
        assert!(!r[k].is_null(), "{k}");
    }
    assert_eq!(r["seed"], 1);
    // feature times differ between runs; everything else is determined by the seed
    let strip = |mut v: serde_json::Value| {
        for r in v["reports"].as_array_mut().unwrap() {
            r["predicted"] = serde_json::Value::Null;
            r["feat_time"] = serde_json::Value::Null;
            r["gap_closed"] = serde_json::Value::Null;
        }
        for k in ["predicted", "predicted_x_vb", "gap_closed"] {
            v[k] = serde_json::Value::Null;
        }
        v
    };
    assert_eq!(strip(a), strip(b));
}

#[test]
fn pipeline_with_feature_file_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, rt) = small_corpus(dir.path());
    let feats = dir.path().join("f.csv");
    assert!(satenc(&["features", "--corpus", s(&corpus), "-o", s(&feats)]).status.success());
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = satenc(&[
            "pipeline", "--features", s(&feats), "--runtimes", s(&rt), "--seeds", "2", "--tune-iters", "2", "--folds", "2",
            "--trees", "20", "--split", "class", "-o", s(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        (o.stdout, std::fs::read(out).unwrap())
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn pipeline_oracle_equals_portfolio_vb() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, rt) = small_corpus(dir.path());
    let a = pipeline_json(dir.path(), &corpus, &rt, &["--oracle"], "o.json");
    for r in a["reports"].as_array().unwrap() {
        assert_eq!(r["predicted"], r["vb_portfolio"]);
    }
}

#[test]
fn corpus_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = small_corpus(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_satenc"))
        .args(["features"])
        .env("SATENC_CORPUS", &corpus)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.starts_with("instance,li_count,"));
    assert!(text.lines().next().unwrap().ends_with(",feat_time_s"));
    assert_eq!(satenc(&["features"]).status.code(), Some(1));
}

#[test]
fn train_predict_evaluate_importance() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, rt) = small_corpus(dir.path());
    let d = dir.path();
    let feats = d.join("f.csv");
    assert!(satenc(&["features", "--corpus", s(&corpus), "-o", s(&feats)]).status.success());
    let model = d.join("model");
    let o = satenc(&[
        "train", "--runtimes", s(&rt), "--features", s(&feats), "--portfolio-size", "3", "--trees", "20", "--tune-iters", "0",
        "-o", s(&model),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(model.join("manifest.json").exists() && model.join("tiebreak.csv").exists());
    let pairs = std::fs::read_dir(&model).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("pair_")).count();
    assert_eq!(pairs, 3);

    let o = satenc(&["predict", "--model", s(&model), "--features", s(&feats)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 11);

    let o = satenc(&["evaluate", "--model", s(&model), "--runtimes", s(&rt), "--features", s(&feats), "--oracle"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["predicted"], r["vb_portfolio"]);

    let o = satenc(&["evaluate", "--model", s(&model), "--runtimes", s(&rt), "--features", s(&feats)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = satenc(&["importance", "--model", s(&model), "--runtimes", s(&rt), "--features", s(&feats), "--repeats", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 91);

    let o = satenc(&["portfolio", "--runtimes", s(&rt), "--portfolio-size", "4", "--all"]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 5);
}
