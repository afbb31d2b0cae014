use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gojun(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gojun"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = gojun(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Synthetic corpus plus forward/backward trigram models.
fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "-n", "2000", "--seed", "1", "--out", "train.jsonl"]);
    ok(d, &["synth", "-n", "150", "--seed", "2", "--out", "test.jsonl"]);
    ok(d, &["train", "train.jsonl", "--order", "3", "--unit", "char", "--direction", "fwd", "--out", "f.model"]);
    ok(d, &["train", "train.jsonl", "--direction", "bwd", "--out", "b.model"]);
    dir
}

fn read(p: PathBuf) -> String {
    fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn train_writes_versioned_model_and_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("corpus.txt"), "あいう\nいうえ\n").unwrap();
    ok(d, &["train", "--order", "3", "--unit", "char", "--direction", "fwd", "corpus.txt", "--out", "f.model"]);
    let model: serde_json::Value = serde_json::from_str(&read(d.join("f.model"))).unwrap();
    assert_eq!(model["gojun_ngram"], 1);

    let missing = gojun(d, &["train", "absent.txt", "--out", "x.model"]);
    assert_eq!(code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.txt"));

    assert_eq!(code(&gojun(d, &["train", "corpus.txt", "--order", "0", "--out", "x.model"])), 2);
    assert_eq!(code(&gojun(d, &["train", "corpus.txt", "--discount", "1.5", "--out", "x.model"])), 2);
}

#[test]
fn compare_marks_winner_and_enumerates() {
    let ws = workspace();
    let d = ws.path();
    let corpus = read(d.join("test.jsonl"));
    let first = corpus
        .lines()
        .find(|l| l.contains("\"NOM\"") && l.contains("\"ACC\""))
        .unwrap()
        .to_string();
    fs::write(d.join("one.jsonl"), format!("{first}\n")).unwrap();

    let out = ok(d, &["compare", "one.jsonl", "--transform", "swap", "--swap", "NOM,ACC", "--fwd", "f.model", "--bwd", "b.model"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(out.lines().next().unwrap(), "id\tlabel\tfwd\tbwd\tcombined\twinner");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows.iter().filter(|r| r.ends_with("\t*")).count(), 1);

    let sentence: serde_json::Value = serde_json::from_str(&first).unwrap();
    let children = sentence["chunks"].as_array().unwrap().len() - 1;
    let out = ok(d, &["compare", "one.jsonl", "--transform", "enumerate", "--fwd", "f.model", "--bwd", "b.model"]);
    let factorial: usize = (1..=children).product();
    assert_eq!(out.lines().count() - 1, factorial);

    // unigram models are order-blind
    ok(d, &["train", "train.jsonl", "--order", "1", "--out", "u1.model"]);
    ok(d, &["train", "train.jsonl", "--order", "1", "--direction", "bwd", "--out", "u2.model"]);
    let out = ok(d, &["compare", "one.jsonl", "--transform", "enumerate", "--fwd", "u1.model", "--bwd", "u2.model"]);
    assert!(out.lines().skip(1).all(|r| r.ends_with("\tTIE")));
}

#[test]
fn compare_reads_labelled_variants() {
    let ws = workspace();
    let d = ws.path();
    let text = read(d.join("test.jsonl"));
    let s: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let mut reversed = s.clone();
    let chunks = reversed["chunks"].as_array_mut().unwrap();
    let n = chunks.len();
    chunks.swap(0, n - 2);
    let lines = [
        serde_json::json!({"label": "a", "sentence": s}).to_string(),
        serde_json::json!({"label": "b", "sentence": reversed}).to_string(),
    ];
    fs::write(d.join("vars.jsonl"), lines.join("\n")).unwrap();
    let out = ok(d, &["compare", "vars.jsonl", "--fwd", "f.model", "--bwd", "b.model"]);
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn experiment_reports_are_deterministic_across_workers() {
    let ws = workspace();
    let d = ws.path();
    for name in ["case-order", "double-object", "topic-i", "long-before-short"] {
        let run = |workers: &str, out: &str| {
            ok(d, &[
                "experiment", name, "--corpus", "test.jsonl", "--fwd", "f.model", "--bwd", "b.model",
                "--workers", workers, "--seed", "9", "--out", out,
            ]);
            read(d.join(out).join("report.tsv"))
        };
        let one = run("1", &format!("{name}-1"));
        assert_eq!(one, run("8", &format!("{name}-8")), "{name}");
        assert_eq!(one, run("1", &format!("{name}-again")), "{name}");
        let json = read(d.join(format!("{name}-1")).join("report.json"));
        assert_eq!(json, read(d.join(format!("{name}-8")).join("report.json")));
    }
}

#[test]
fn count_mode_needs_no_scorer_and_config_flags_override() {
    let ws = workspace();
    let d = ws.path();
    fs::write(d.join("cfg.json"), r#"{"seed": 5, "mode": "lm", "alpha": 0.01}"#).unwrap();
    ok(d, &["experiment", "case-order", "--corpus", "test.jsonl", "--config", "cfg.json", "--mode", "count", "--seed", "7", "--out", "rep"]);
    let report: serde_json::Value = serde_json::from_str(&read(d.join("rep/report.json"))).unwrap();
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["config"]["mode"], "count");
    assert_eq!(report["config"]["alpha"], 0.01);
    let run: serde_json::Value = serde_json::from_str(&read(d.join("rep/run.json"))).unwrap();
    assert_eq!(run["experiment"], "case-order");
    assert_eq!(run["config"]["seed"], 7);
    // in count mode the model and count columns coincide
    let tsv = read(d.join("rep/report.tsv"));
    for row in tsv.lines().skip(1) {
        let cells: Vec<&str> = row.split('\t').collect();
        assert_eq!(cells[2..5], cells[5..8], "{row}");
    }
}

#[test]
fn experiment_usage_errors() {
    let ws = workspace();
    let d = ws.path();
    let unknown = gojun(d, &["experiment", "nonsense"]);
    assert_eq!(code(&unknown), 2);
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("case-order"));
    assert_eq!(code(&gojun(d, &["experiment", "case-order", "--corpus", "test.jsonl"])), 2);
    assert_eq!(code(&gojun(d, &["experiment", "case-order", "--fwd", "f.model", "--bwd", "b.model"])), 2);
    assert_eq!(code(&gojun(d, &["experiment", "human-agreement", "--mode", "count"])), 2);
    let missing = gojun(d, &["experiment", "case-order", "--corpus", "nope.jsonl", "--mode", "count"]);
    assert_eq!(code(&missing), 1);
}

#[test]
fn synth_sizes_seeds_and_spec_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth", "-n", "1000", "--seed", "3", "--out", "a.jsonl"]);
    ok(d, &["synth", "-n", "1000", "--seed", "3", "--workers", "4", "--out", "b.jsonl"]);
    let a = read(d.join("a.jsonl"));
    assert_eq!(a.lines().count(), 1000);
    assert_eq!(a, read(d.join("b.jsonl")));

    let spec = |adherence: f64| {
        serde_json::json!({
            "roles": ["NOM", "ACC"],
            "vocab": {"NOM": ["はは"], "ACC": ["ほん"]},
            "particles": {"NOM": "が", "ACC": "を"},
            "verbs": ["よんだ"],
            "order_adherence": adherence
        })
        .to_string()
    };
    fs::write(d.join("ok.json"), spec(0.5)).unwrap();
    fs::write(d.join("bad.json"), spec(0.4)).unwrap();
    fs::write(d.join("broken.json"), "{").unwrap();
    ok(d, &["synth", "--spec", "ok.json", "-n", "10", "--out", "c.jsonl"]);
    assert_eq!(code(&gojun(d, &["synth", "--spec", "bad.json", "-n", "10", "--out", "c.jsonl"])), 1);
    assert_eq!(code(&gojun(d, &["synth", "--spec", "broken.json", "-n", "10", "--out", "c.jsonl"])), 1);
}

#[test]
fn import_and_filter() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let row = |id: usize, form: &str, upos: &str, head: usize, misc: &str| {
        format!("{id}\t{form}\t{form}\t{upos}\t_\t_\t{head}\tdep\t_\t{misc}")
    };
    let text = [
        "# sent_id = s1".to_string(),
        "# verb_lemma = 読む".to_string(),
        row(1, "母", "NOUN", 5, "Chunk=1|Role=NOM"),
        row(2, "が", "ADP", 1, "Chunk=1"),
        row(3, "本", "NOUN", 5, "Chunk=2|Role=ACC"),
        row(4, "を", "ADP", 3, "Chunk=2"),
        row(5, "読んだ", "VERB", 0, "Chunk=3|Role=PREDICATE"),
        String::new(),
        row(1, "来た", "VERB", 0, "Chunk=1|Role=PREDICATE"),
        String::new(),
    ]
    .join("\n");
    fs::write(d.join("in.conllu"), text).unwrap();
    ok(d, &["import-conllu", "in.conllu", "--out", "all.jsonl"]);
    assert_eq!(read(d.join("all.jsonl")).lines().count(), 2);
    ok(d, &["filter", "all.jsonl", "--out", "kept.jsonl"]);
    let kept = read(d.join("kept.jsonl"));
    assert_eq!(kept.lines().count(), 1);
    assert!(kept.contains("\"s1\""));
    assert_eq!(code(&gojun(d, &["import-conllu", "missing.conllu", "--out", "x.jsonl"])), 1);
}
