use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn citeshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_citeshift"))
        .args(args)
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), stderr(&out));
    out
}

fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let corpus = dir.join("corpus");
    let mut args = vec!["--out-dir", path_str(&corpus), "synth"];
    args.extend_from_slice(extra);
    ok(citeshift(&args));
    corpus
}

fn tree(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read_to_string(e.path()).unwrap(),
            )
        })
        .collect()
}

fn without_timestamp(manifest: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(manifest).unwrap();
    let ts = v.as_object_mut().unwrap().remove("generated_at");
    assert!(ts.is_some(), "manifest lacks its timestamp field");
    v
}

#[test]
fn synth_then_score_succeeds_with_one_row_per_professor_and_variant() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), &[]);
    let out = dir.path().join("scores");
    ok(citeshift(&[
        "--out-dir",
        path_str(&out),
        "score",
        "--corpus-dir",
        path_str(&corpus),
    ]));
    let professors = fs::read_to_string(corpus.join("professors.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    let scores = fs::read_to_string(out.join("scores.csv")).unwrap().lines().count() - 1;
    assert_eq!(scores, 2 * professors);
    assert!(out.join("baselines.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "score");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 6);
}

#[test]
fn synth_is_byte_stable_and_seed_sensitive() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let ta = tree(&synth(a.path(), &[]));
    let tb = tree(&synth(b.path(), &[]));
    let csvs = |t: &BTreeMap<String, String>| {
        t.iter()
            .filter(|(k, _)| k.ends_with(".csv"))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<Vec<_>>()
    };
    assert_eq!(csvs(&ta), csvs(&tb));
    let corpus = c.path().join("corpus");
    ok(citeshift(&["--seed", "99", "--out-dir", path_str(&corpus), "synth"]));
    assert_ne!(csvs(&ta), csvs(&tree(&corpus)));
}

#[test]
fn synth_rejects_an_invalid_share() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.txt");
    fs::write(&spec, "uncited_share=1.5\n").unwrap();
    let out = citeshift(&[
        "--out-dir",
        path_str(&dir.path().join("o")),
        "synth",
        "--spec",
        path_str(&spec),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[spec]"), "{}", stderr(&out));
}

#[test]
fn missing_weights_exit_2_naming_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), &[]);
    let weights = fs::read_to_string(corpus.join("weights.csv")).unwrap();
    let kept: Vec<&str> = weights.lines().filter(|l| !l.starts_with("SC01,4,")).collect();
    fs::write(corpus.join("weights.csv"), kept.join("\n") + "\n").unwrap();
    let out_dir = dir.path().join("o");
    let c_only = citeshift(&[
        "--variant",
        "c",
        "--out-dir",
        path_str(&out_dir),
        "score",
        "--corpus-dir",
        path_str(&corpus),
    ]);
    ok(c_only);
    let out = citeshift(&[
        "--variant",
        "wc",
        "--out-dir",
        path_str(&out_dir),
        "score",
        "--corpus-dir",
        path_str(&corpus),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("error[missing-weights]") && err.contains("SC01") && err.contains('4'),
        "{err}"
    );
}

#[test]
fn schema_errors_exit_1_with_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(dir.path(), &[]);
    let mut professors = fs::read_to_string(corpus.join("professors.csv")).unwrap();
    professors.push_str("ZZ,NOPE,full,5\n");
    fs::write(corpus.join("professors.csv"), professors).unwrap();
    let out = citeshift(&[
        "--out-dir",
        path_str(&dir.path().join("o")),
        "score",
        "--corpus-dir",
        path_str(&corpus),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("error[schema]") && err.contains("NOPE"), "{err}");
}

fn scores_file(dir: &Path, rows: &[(&str, &str, &str, f64)]) -> PathBuf {
    let path = dir.join("scores.csv");
    let mut text = String::from("professor_id,variant,value,n_publications,t,sds_id,uda_id,academic_rank\n");
    for (id, variant, sds, value) in rows {
        text.push_str(&format!("{id},{variant},{value},1,3,{sds},09,full\n"));
    }
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn rank_single_professor_and_empty_filter() {
    let dir = tempfile::tempdir().unwrap();
    let scores = scores_file(dir.path(), &[("P1", "c", "S1", 0.3), ("P2", "c", "S2", 0.0)]);
    let out_dir = dir.path().join("r");
    ok(citeshift(&[
        "--variant",
        "c",
        "--out-dir",
        path_str(&out_dir),
        "rank",
        "--scores",
        path_str(&scores),
    ]));
    let ranking = fs::read_to_string(out_dir.join("ranking_c.csv")).unwrap();
    assert!(ranking.contains("P1,0.300,1,100.0,Q1,c,S1"), "{ranking}");
    assert!(ranking.contains("P2,0.000,1,0.0,Q4,c,S2"), "{ranking}");

    let out = citeshift(&[
        "--variant",
        "c",
        "--out-dir",
        path_str(&out_dir),
        "rank",
        "--scores",
        path_str(&scores),
        "--sds",
        "S9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[empty-cohort]"), "{}", stderr(&out));
}

#[test]
fn rank_output_is_sorted_by_cohort_rank_and_id() {
    let dir = tempfile::tempdir().unwrap();
    let scores = scores_file(
        dir.path(),
        &[
            ("B", "c", "S2", 0.5),
            ("A", "c", "S2", 0.5),
            ("C", "c", "S1", 0.1),
            ("D", "c", "S2", 0.9),
        ],
    );
    let out_dir = dir.path().join("r");
    ok(citeshift(&[
        "--variant",
        "c",
        "--out-dir",
        path_str(&out_dir),
        "rank",
        "--scores",
        path_str(&scores),
    ]));
    let ranking = fs::read_to_string(out_dir.join("ranking_c.csv")).unwrap();
    let ids: Vec<&str> = ranking.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, ["C", "D", "A", "B"]);
}

#[test]
fn compare_identical_and_mismatched_rankings() {
    let dir = tempfile::tempdir().unwrap();
    let scores = scores_file(
        dir.path(),
        &[
            ("A", "c", "S1", 0.5),
            ("B", "c", "S1", 0.2),
            ("C", "c", "S1", 0.9),
            ("A", "wc", "S1", 0.5),
            ("B", "wc", "S1", 0.2),
            ("C", "wc", "S1", 0.9),
        ],
    );
    let r = dir.path().join("r");
    ok(citeshift(&[
        "--out-dir",
        path_str(&r),
        "rank",
        "--scores",
        path_str(&scores),
    ]));
    let cmp = dir.path().join("cmp");
    let c = r.join("ranking_c.csv");
    ok(citeshift(&[
        "--out-dir",
        path_str(&cmp),
        "compare",
        "--c",
        path_str(&c),
        "--wc",
        path_str(&c),
    ]));
    let comparison = fs::read_to_string(cmp.join("comparison.csv")).unwrap();
    for line in comparison.lines().skip(1) {
        assert!(line.ends_with(",0.0,0 =,0.0"), "{line}");
    }
    let stats = fs::read_to_string(cmp.join("cohort_stats.csv")).unwrap();
    assert!(
        stats.lines().nth(1).unwrap().starts_with("S1,09,3,1.000,1.000,0.0"),
        "{stats}"
    );
    assert_eq!(tree(&cmp).keys().filter(|k| *k == "manifest.json").count(), 1);

    let other = scores_file(
        &dir.path().join("r"),
        &[("A", "wc", "S1", 0.5), ("Z", "wc", "S1", 0.2), ("C", "wc", "S1", 0.9)],
    );
    let r2 = dir.path().join("r2");
    ok(citeshift(&[
        "--variant",
        "wc",
        "--out-dir",
        path_str(&r2),
        "rank",
        "--scores",
        path_str(&other),
    ]));
    let out = citeshift(&[
        "--out-dir",
        path_str(&dir.path().join("bad")),
        "compare",
        "--c",
        path_str(&c),
        "--wc",
        path_str(&r2.join("ranking_wc.csv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error[cohort-mismatch]"), "{}", stderr(&out));
}

#[test]
fn pipeline_runs_are_identical_except_for_the_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth(
        dir.path(),
        &[
            "--spec",
            path_str(&{
                let spec = dir.path().join("spec.txt");
                fs::write(&spec, "n_sds=3\nprofessors_per_sds=25..30\nseed=3\n").unwrap();
                spec
            }),
        ],
    );
    let runs: Vec<BTreeMap<String, String>> = ["one", "two"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            ok(citeshift(&[
                "--full-precision",
                "--out-dir",
                path_str(&out),
                "pipeline",
                "--corpus-dir",
                path_str(&corpus),
            ]));
            tree(&out)
        })
        .collect();
    assert!(runs[0].keys().eq(runs[1].keys()));
    assert!(runs[0].contains_key("comparison.csv") && runs[0].contains_key("ranking_wc.csv"));
    for (name, body) in &runs[0] {
        if name == "manifest.json" {
            assert_eq!(without_timestamp(body), without_timestamp(&runs[1][name]));
        } else {
            assert_eq!(body, &runs[1][name], "{name} differs");
        }
    }
}

#[test]
fn cohort_key_splits_by_academic_rank() {
    let dir = tempfile::tempdir().unwrap();
    let scores = scores_file(dir.path(), &[("P1", "c", "S1", 0.3), ("P2", "c", "S1", 0.1)]);
    let out_dir = dir.path().join("r");
    ok(citeshift(&[
        "--variant",
        "c",
        "--cohort-key",
        "sds_and_rank",
        "--out-dir",
        path_str(&out_dir),
        "rank",
        "--scores",
        path_str(&scores),
    ]));
    let ranking = fs::read_to_string(out_dir.join("ranking_c.csv")).unwrap();
    assert!(ranking.contains(",c,S1|full,09,1"), "{ranking}");
}
