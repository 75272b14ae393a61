use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termalign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) {
    let mut args = vec!["synth", "--words", "300", "--dim", "8", "--seed", "3", "--out-dir", p(dir)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn meta(path: &Path) -> Value {
    let text = fs::read_to_string(format!("{}.meta.json", path.display())).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn synth_align_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &[]);
    let map = d.join("w.txt");
    let out = run(&[
        "align", "--src", p(&d.join("src.vec")), "--tgt", p(&d.join("tgt.vec")),
        "--output", p(&map), "--refine-iters", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.join("w.txt.bin").exists());

    let report = d.join("report.json");
    let out = run(&[
        "evaluate", "--src", p(&d.join("src.vec")), "--tgt", p(&d.join("tgt.vec")),
        "--map", p(&map), "--gold", p(&d.join("held_out_gold.tsv")), "--report", p(&report),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("P@1 1.000"), "{stdout}");
    let report: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(report["precision_at"]["1"], 1.0);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &[]);
    let corpus = d.join("corpus.txt");
    fs::write(&corpus, "a b c\nb c d\n").unwrap();

    // invalid configuration
    let out = run(&["train", "--corpus", p(&corpus), "--output", p(&d.join("o.vec")), "--window", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let bad_cfg = d.join("bad.cfg");
    fs::write(&bad_cfg, "no equals sign here\n").unwrap();
    let out = run(&["synth", "--out-dir", p(&d.join("x")), "--config", p(&bad_cfg)]);
    assert_eq!(out.status.code(), Some(1));

    // missing input file
    let out = run(&["train", "--corpus", p(&d.join("missing.txt")), "--output", p(&d.join("o.vec"))]);
    assert_eq!(out.status.code(), Some(2));

    // disjoint vocabularies leave no identical-string anchors
    let other = d.join("other");
    fs::create_dir(&other).unwrap();
    let text: String = (0..20).map(|i| format!("zz{i} 1 0 0 0 0 0 0 0\n")).collect();
    fs::write(other.join("o.vec"), format!("20 8\n{text}")).unwrap();
    let out = run(&[
        "align", "--src", p(&d.join("src.vec")), "--tgt", p(&other.join("o.vec")),
        "--output", p(&d.join("w.txt")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    let last: Value = serde_json::from_str(stderr.lines().last().unwrap()).unwrap();
    assert_eq!(last["level"], "error");
}

#[test]
fn retrieve_warns_on_unknown_queries() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth(d, &[]);
    let out = run(&[
        "retrieve", "--src", p(&d.join("src.vec")), "--tgt", p(&d.join("tgt.vec")),
        "--query", "not-a-word,also-missing", "--format", "json",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not-a-word"));

    let src_words = fs::read_to_string(d.join("src.vec")).unwrap();
    let first = src_words.lines().nth(1).unwrap().split(' ').next().unwrap().to_string();
    let out = run(&[
        "retrieve", "--src", p(&d.join("src.vec")), "--tgt", p(&d.join("tgt.vec")),
        "--query", &first, "--k", "3", "--format", "tsv",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains(&first), "{stdout}");
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("run.cfg");
    fs::write(&cfg, "# synthetic settings\nwords = 120\nanchor_fraction = 0.5\n").unwrap();
    let out = run(&["synth", "--dim", "4", "--words", "80", "--out-dir", p(d), "--config", p(&cfg)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_meta = &meta(&d.join("src.vec"))["run"];
    assert_eq!(run_meta["words"], 80);
    assert_eq!(run_meta["anchor-fraction"], 0.5);
    assert_eq!(run_meta["noise"], 0.0);
    let header = fs::read_to_string(d.join("src.vec")).unwrap();
    assert!(header.starts_with("80 4\n"));
}
