use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ultragw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultragw"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

fn two_point(d: f64) -> String {
    format!(r#"{{"u":[[0,{d}],[{d},0]],"mu":[0.5,0.5]}}"#)
}

#[test]
fn validate_reports_and_sets_exit_code() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "ok.json", &two_point(1.0));
    write(tmp.path(), "bad.json", r#"{"u":[[0,1,3],[1,0,1],[3,1,0]],"mu":[0.2,0.3,0.5]}"#);
    write(tmp.path(), "mass.json", r#"{"u":[[0,1],[1,0]],"mu":[0.5,0.6]}"#);
    write(tmp.path(), "broken.json", r#"{"u": [[0,1],"#);

    let ok = json(&ultragw(tmp.path(), &["validate", "ok.json"]));
    assert_eq!(ok["passed"], true);

    let bad = ultragw(tmp.path(), &["validate", "bad.json"]);
    assert_eq!(code(&bad), 2);
    let report: Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["violations"][0]["kind"], "strong_triangle");

    assert_eq!(code(&ultragw(tmp.path(), &["validate", "mass.json"])), 2);
    assert_eq!(code(&ultragw(tmp.path(), &["validate", "broken.json"])), 3);
    assert_eq!(code(&ultragw(tmp.path(), &["validate", "missing.json"])), 1);
}

#[test]
fn two_point_pair_values() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "a.json", &two_point(1.0));
    write(tmp.path(), "b.json", &two_point(2.0));

    let inf = json(&ultragw(tmp.path(), &["ugw-inf", "a.json", "b.json"]));
    assert_eq!(inf["value"], 2.0);
    let gh = json(&ultragw(tmp.path(), &["ugh", "a.json", "b.json"]));
    assert_eq!(gh["value"], 2.0);

    let fw = json(&ultragw(
        tmp.path(),
        &["ugw", "a.json", "b.json", "--p", "1", "--restarts", "4", "--iters", "200", "--seed", "7"],
    ));
    assert!((fw["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(fw["config"]["fw"]["seed"], 7);
    assert_eq!(fw["trace"].as_array().unwrap().len(), 4);

    let b = json(&ultragw(tmp.path(), &["bounds", "a.json", "b.json", "--which", "uslb,slb"]));
    assert_eq!(b["uslb"], 1.0);
    assert_eq!(b["slb"], 0.25);
    assert!(b.get("utlb").is_none());
}

#[test]
fn usturm_size_cap_exit_code() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "a.json", &two_point(1.0));
    write(tmp.path(), "b.json", &two_point(2.0));
    let capped = ultragw(tmp.path(), &["usturm", "a.json", "b.json", "--max-n", "1"]);
    assert_eq!(code(&capped), 4);
    let v = json(&ultragw(tmp.path(), &["usturm", "a.json", "b.json", "--p", "1"]));
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn flags_override_config_file_over_defaults() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "cfg.json", r#"{"k": 2, "subsample": 8, "seed": 11}"#);

    let from_file = json(&ultragw(tmp.path(), &["gen", "--config", "cfg.json", "--samples-per-block", "10"]));
    let cfg = &from_file["config"];
    assert_eq!(cfg["k"], 2);
    assert_eq!(cfg["subsample"], 8);
    assert_eq!(cfg["seed"], 11);
    assert_eq!(cfg["samples_per_block"], 10);
    assert_eq!(from_file["mu"].as_array().unwrap().len(), 8);

    let flagged = json(&ultragw(
        tmp.path(),
        &["gen", "--config", "cfg.json", "--samples-per-block", "10", "--k", "4", "--seed", "3"],
    ));
    assert_eq!(flagged["config"]["k"], 4);
    assert_eq!(flagged["config"]["seed"], 3);
    assert_eq!(flagged["config"]["subsample"], 8);

    let defaults = json(&ultragw(tmp.path(), &["gen"]));
    assert_eq!(defaults["config"]["k"], 3);
    assert_eq!(defaults["config"]["subsample"], 30);
    assert_eq!(defaults["config"]["seed"], 0);

    write(tmp.path(), "typo.json", r#"{"kk": 2}"#);
    assert_eq!(code(&ultragw(tmp.path(), &["gen", "--config", "typo.json"])), 3);
}

#[test]
fn gen_and_perturb_are_deterministic() {
    let tmp = TempDir::new().unwrap();
    let gen = ["gen", "--k", "3", "--seed", "7", "--subsample", "10", "--samples-per-block", "20"];
    let a = ultragw(tmp.path(), &gen);
    let b = ultragw(tmp.path(), &gen);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let mut with_out = gen.to_vec();
    with_out.extend(["--out", "z.json"]);
    assert_eq!(code(&ultragw(tmp.path(), &with_out)), 0);
    assert_eq!(fs::read(tmp.path().join("z.json")).unwrap(), a.stdout);

    let p1 = ultragw(tmp.path(), &["perturb", "--t", "0.4", "--seed", "9", "z.json"]);
    let p2 = ultragw(tmp.path(), &["perturb", "--t", "0.4", "--seed", "9", "z.json"]);
    assert_eq!(p1.stdout, p2.stdout);
    write(tmp.path(), "w.json", &String::from_utf8(p1.stdout.clone()).unwrap());
    assert_eq!(json(&ultragw(tmp.path(), &["validate", "w.json"]))["passed"], true);
    let d = json(&ultragw(tmp.path(), &["ugw-inf", "z.json", "w.json"]));
    assert!(d["value"].as_f64().unwrap() <= 0.4 + 1e-9);
}

#[test]
fn quotient_blocks() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "x.json", r#"{"u":[[0,1,3],[1,0,3],[3,3,0]],"mu":[0.25,0.25,0.5]}"#);
    let q = json(&ultragw(tmp.path(), &["quotient", "x.json", "--t", "1"]));
    assert_eq!(q["blocks"], serde_json::json!([[0, 1], [2]]));
    assert_eq!(q["quotient"]["mu"], serde_json::json!([0.5, 0.5]));
    assert_eq!(code(&ultragw(tmp.path(), &["quotient", "x.json"])), 2);
}

#[test]
fn wasserstein_grounds() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "a.json", r#"{"x":[0],"m":[1]}"#);
    write(tmp.path(), "b.json", r#"{"x":[2],"m":[1]}"#);
    let w = json(&ultragw(tmp.path(), &["wasserstein", "a.json", "b.json", "--ground", "halfline", "--p", "1"]));
    assert_eq!(w["value"], 2.0);
    let refused = ultragw(
        tmp.path(),
        &["wasserstein", "a.json", "b.json", "--ground", "halfline", "--p", "1", "--q", "2"],
    );
    assert_eq!(code(&refused), 2);

    write(tmp.path(), "g.json", &two_point(1.0));
    write(tmp.path(), "alpha.json", "[1, 0]");
    write(tmp.path(), "beta.json", "[0, 1]");
    let u = json(&ultragw(
        tmp.path(),
        &["wasserstein", "alpha.json", "beta.json", "--ground", "g.json", "--p", "2"],
    ));
    assert!((u["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn ingest_newick() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "t.nwk", "((A:1,B:1):1,C:2);");
    let s = json(&ultragw(tmp.path(), &["ingest", "--newick", "t.nwk", "--unit-edges"]));
    assert_eq!(s["ids"], serde_json::json!(["A", "B", "C"]));
    assert_eq!(s["kind"], "ultra_dissimilarity");

    write(tmp.path(), "multi.nwk", "(A:1,B:1);\n((A:1,B:1):1,C:1);\n");
    let m = json(&ultragw(tmp.path(), &["ingest", "--newick", "multi.nwk"]));
    assert_eq!(m["spaces"][1]["id"], "multi#2");

    write(tmp.path(), "bad.nwk", "((A:1,B:1);");
    assert_eq!(code(&ultragw(tmp.path(), &["ingest", "--newick", "bad.nwk"])), 3);
}

#[test]
fn matrix_csv_round_trips_through_mds() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    write(&corpus, "a.json", &two_point(1.0));
    write(&corpus, "b.json", &two_point(2.0));
    write(&corpus, "c.json", &two_point(1.5));

    let out = ultragw(
        tmp.path(),
        &["matrix", "--dir", "corpus", "--which", "ugw-inf", "--format", "csv", "--out", "m.csv"],
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"method\":\"ugw-inf\""));
    let csv = fs::read_to_string(tmp.path().join("m.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("id,a,b,c"));
    assert!(lines.next().unwrap().starts_with("a,0"));

    let j = json(&ultragw(tmp.path(), &["matrix", "--dir", "corpus", "--which", "ugw-inf"]));
    assert_eq!(j["ids"], serde_json::json!(["a", "b", "c"]));
    assert_eq!(j["matrix"][0][1], 2.0);
    assert_eq!(j["matrix"][1][2], 2.0);

    let mds = json(&ultragw(tmp.path(), &["mds", "m.csv", "--dim", "2"]));
    assert_eq!(mds["coords"].as_array().unwrap().len(), 3);
    assert_eq!(code(&ultragw(tmp.path(), &["mds", "m.csv", "--dim", "5"])), 2);
}

#[test]
fn matrix_uslb_matches_pairwise_bounds() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for (name, seed) in [("x", "1"), ("y", "2"), ("z", "3")] {
        let out = ultragw(
            tmp.path(),
            &["gen", "--seed", seed, "--subsample", "7", "--samples-per-block", "10"],
        );
        assert_eq!(code(&out), 0);
        fs::write(corpus.join(format!("{name}.json")), &out.stdout).unwrap();
    }
    let m = json(&ultragw(tmp.path(), &["matrix", "--dir", "corpus", "--which", "uslb", "--p", "2"]));
    let names = ["x", "y", "z"];
    for i in 0..3 {
        for j in 0..3 {
            let expected = if i == j {
                0.0
            } else {
                let a = format!("corpus/{}.json", names[i]);
                let b = format!("corpus/{}.json", names[j]);
                let r = json(&ultragw(tmp.path(), &["bounds", &a, &b, "--p", "2", "--which", "uslb"]));
                r["uslb"].as_f64().unwrap()
            };
            assert_eq!(m["matrix"][i][j].as_f64().unwrap(), expected, "entry ({i},{j})");
        }
    }
}

#[test]
fn matrix_invalid_spaces() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    write(&corpus, "a.json", &two_point(1.0));
    write(&corpus, "b.json", &two_point(1.0));
    write(&corpus, "c.json", r#"{"u":[[0,1,3],[1,0,1],[3,1,0]],"mu":[0.2,0.3,0.5]}"#);

    let abort = ultragw(tmp.path(), &["matrix", "--dir", "corpus", "--which", "uslb"]);
    assert_eq!(code(&abort), 2);
    assert!(String::from_utf8_lossy(&abort.stderr).contains("c.json"));

    let skipped = json(&ultragw(tmp.path(), &["matrix", "--dir", "corpus", "--which", "uslb", "--skip-invalid"]));
    assert_eq!(skipped["ids"], serde_json::json!(["a", "b"]));
    assert_eq!(skipped["matrix"], serde_json::json!([[0.0, 0.0], [0.0, 0.0]]));
}

#[test]
fn matrix_over_newick_directory() {
    let tmp = TempDir::new().unwrap();
    let trees = tmp.path().join("trees");
    fs::create_dir(&trees).unwrap();
    write(&trees, "bal.nwk", "((A:1,B:1):1,(C:1,D:1):1);");
    write(&trees, "cat.nwk", "(((A:1,B:1):1,C:1):1,D:1);");
    let m = json(&ultragw(
        tmp.path(),
        &["matrix", "--newick-dir", "trees", "--unit-edges", "--which", "uslb", "--p", "1"],
    ));
    assert_eq!(m["ids"], serde_json::json!(["bal", "cat"]));
    assert!(m["matrix"][0][1].as_f64().unwrap() > 0.0);
}

#[test]
fn fw_matrix_is_independent_of_thread_count() {
    let tmp = TempDir::new().unwrap();
    let corpus = tmp.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for seed in 0..4 {
        let out = ultragw(
            tmp.path(),
            &["gen", "--seed", &seed.to_string(), "--subsample", "6", "--samples-per-block", "10"],
        );
        fs::write(corpus.join(format!("s{seed}.json")), &out.stdout).unwrap();
    }
    let args = |threads: &'static str| {
        vec![
            "matrix", "--dir", "corpus", "--which", "ugw-fw", "--restarts", "3", "--iters", "50",
            "--seed", "5", "--format", "csv", "--threads", threads,
        ]
    };
    let one = ultragw(tmp.path(), &args("1"));
    let many = ultragw(tmp.path(), &args("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn csv_format_is_refused_for_json_only_commands() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "a.json", &two_point(1.0));
    assert_eq!(code(&ultragw(tmp.path(), &["validate", "a.json", "--format", "csv"])), 2);
}
