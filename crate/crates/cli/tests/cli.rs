use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn geotree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geotree")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn chain_json(id: &str, len: usize) -> String {
    let nodes: Vec<String> = (0..len)
        .map(|i| {
            let parent = if i == 0 { "null".to_string() } else { (i - 1).to_string() };
            format!(r#"{{"id":{i},"parent":{parent},"x":[{}.0]}}"#, i + 1)
        })
        .collect();
    format!(r#"{{"id":"{id}","n":1,"d":0,"nodes":[{}]}}"#, nodes.join(","))
}

fn write_chains(dir: &Path, lens: &[usize]) -> std::path::PathBuf {
    let trees: Vec<String> = lens.iter().enumerate().map(|(k, &l)| chain_json(&format!("c{k}"), l)).collect();
    let path = dir.join("trees.json");
    fs::write(&path, format!("[{}]", trees.join(","))).unwrap();
    path
}

#[test]
fn gen_requires_output_path() {
    assert_eq!(code(&geotree(&["gen", "--preset", "null", "--size", "10"])), 2);
}

#[test]
fn gen_null_preset_writes_dataset_and_manifest() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("ds");
    let res = geotree(&["gen", "--preset", "null", "--size", "100", "--seed", "7", "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let trees: serde_json::Value = serde_json::from_slice(&fs::read(out.join("trees.json")).unwrap()).unwrap();
    assert_eq!(trees.as_array().unwrap().len(), 100);
    let labels = fs::read_to_string(out.join("labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 101);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn gen_rejects_invalid_config() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"p_branch": 1.5}"#).unwrap();
    let res = geotree(&["gen", "--config", p(&cfg), "--size", "4", "--out", p(&dir.path().join("o"))]);
    assert_eq!(code(&res), 2);
}

#[test]
fn gbc_on_three_chains_matches_hand_values() {
    let dir = TempDir::new().unwrap();
    let trees = write_chains(dir.path(), &[3, 3, 5]);
    let out = dir.path().join("g.csv");
    let res = geotree(&["kernel", "--trees", p(&trees), "--kernel", "gbc", "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_path(&out).unwrap();
    let rows: Vec<Vec<String>> = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    assert_eq!(rows[0], ["id", "c0", "c1", "c2"]);
    let e4 = (-4.0f64).exp();
    let expected = [[1.0, 1.0, e4], [1.0, 1.0, e4], [e4, e4, 1.0]];
    for i in 0..3 {
        for j in 0..3 {
            let v: f64 = rows[i + 1][j + 1].parse().unwrap();
            assert_eq!(v, expected[i][j]);
        }
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("g.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["normalized"], false);
    assert!(dir.path().join("g.csv.manifest.json").exists());
}

#[test]
fn kernel_usage_errors() {
    let dir = TempDir::new().unwrap();
    let trees = write_chains(dir.path(), &[2, 3]);
    let out = dir.path().join("g.csv");
    let unknown = geotree(&["kernel", "--trees", p(&trees), "--kernel", "random-walk", "--out", p(&out)]);
    assert_eq!(code(&unknown), 2);
    let gaussian_fast = geotree(&[
        "kernel", "--trees", p(&trees), "--kernel", "rootpath-node-linear-fast", "--form", "gaussian", "--out", p(&out),
    ]);
    assert_eq!(code(&gaussian_fast), 2);
    let naive_for_wl =
        geotree(&["kernel", "--trees", p(&trees), "--kernel", "wl", "--check-against-naive", "--out", p(&out)]);
    assert_eq!(code(&naive_for_wl), 2);
}

#[test]
fn scalar_linear_normalization_is_refused() {
    let dir = TempDir::new().unwrap();
    let trees = write_chains(dir.path(), &[2, 3]);
    let out = dir.path().join("g.csv");
    let res = geotree(&["kernel", "--trees", p(&trees), "--kernel", "lbc", "--normalize", "--out", p(&out)]);
    assert_eq!(code(&res), 1);
    assert!(String::from_utf8_lossy(&res.stderr).contains("normalization"));
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    let res = geotree(&[
        "kernel", "--trees", p(&dir.path().join("none.json")), "--kernel", "gbc", "--out", p(&dir.path().join("g.csv")),
    ]);
    assert_eq!(code(&res), 1);
}

#[test]
fn check_against_naive_passes_on_generated_trees() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("ds");
    assert_eq!(code(&geotree(&["gen", "--preset", "attr-shift", "--size", "20", "--seed", "2", "--out", p(&ds)])), 0);
    for extra in [&["--kernel", "rootpath-node", "--attributed"][..], &["--kernel", "rootpath-node-linear-fast"][..]] {
        let out = dir.path().join("g.csv");
        let trees = ds.join("trees.json");
        let mut args = vec!["kernel", "--trees", p(&trees), "--check-against-naive", "--out", p(&out)];
        args.extend_from_slice(extra);
        let res = geotree(&args);
        assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
        let manifest: serde_json::Value =
            serde_json::from_slice(&fs::read(dir.path().join("g.csv.manifest.json")).unwrap()).unwrap();
        assert!(manifest["extra"]["naive_max_relative_difference"].as_f64().unwrap() <= 1e-9);
    }
}

fn gen_and_kernel(dir: &Path, preset: &str, size: &str, kernel: &[&str]) -> (std::path::PathBuf, std::path::PathBuf) {
    let ds = dir.join("ds");
    assert_eq!(code(&geotree(&["gen", "--preset", preset, "--size", size, "--seed", "4", "--out", p(&ds)])), 0);
    let gram = dir.join("g.csv");
    let trees = ds.join("trees.json");
    let mut args = vec!["kernel", "--trees", p(&trees), "--out", p(&gram)];
    args.extend_from_slice(kernel);
    let res = geotree(&args);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    (gram, ds.join("labels.csv"))
}

#[test]
fn test_command_reports_result_json() {
    let dir = TempDir::new().unwrap();
    let (gram, labels) = gen_and_kernel(dir.path(), "branch-shift", "40", &["--kernel", "gbc"]);
    let out = dir.path().join("t.json");
    let res = geotree(&[
        "test", "--gram", p(&gram), "--labels", p(&labels), "--permutations", "500", "--seed", "1", "--out", p(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["n_permutations"], 500);
    assert_eq!(report["sample_sizes"]["a"], 20);
    assert_eq!(report["gram"]["kernel_spec"]["kernel"]["kernel"], "gbc");
    let p_value = report["p_value"].as_f64().unwrap();
    assert!(p_value > 0.0 && p_value <= 1.0);
}

#[test]
fn labels_must_cover_every_tree() {
    let dir = TempDir::new().unwrap();
    let (gram, labels) = gen_and_kernel(dir.path(), "null", "10", &["--kernel", "gbc"]);
    let text = fs::read_to_string(&labels).unwrap();
    let truncated: Vec<&str> = text.lines().take(5).collect();
    fs::write(&labels, truncated.join("\n") + "\n").unwrap();
    let out = dir.path().join("t.json");
    let res = geotree(&["test", "--gram", p(&gram), "--labels", p(&labels), "--out", p(&out)]);
    assert_eq!(code(&res), 1);
}

#[test]
fn classify_duplicated_classes_is_perfect() {
    // Class A trees are 2-chains and class B trees are 6-chains; GBC tells
    // them apart exactly.
    let dir = TempDir::new().unwrap();
    let lens = [2, 2, 2, 2, 2, 6, 6, 6, 6, 6];
    let trees = write_chains(dir.path(), &lens);
    let labels = dir.path().join("labels.csv");
    let rows: Vec<String> = lens.iter().enumerate().map(|(k, &l)| format!("c{k},{}", u8::from(l == 6))).collect();
    fs::write(&labels, format!("tree_id,label\n{}\n", rows.join("\n"))).unwrap();
    let gram = dir.path().join("g.csv");
    assert_eq!(code(&geotree(&["kernel", "--trees", p(&trees), "--kernel", "gbc", "--out", p(&gram)])), 0);
    let out = dir.path().join("c.json");
    let res = geotree(&["classify", "--gram", p(&gram), "--labels", p(&labels), "--holdout", "0.4", "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["accuracy"], 1.0);
    assert_eq!(report["per_class"]["0"]["test"], 2);
}

#[test]
fn classify_shuffled_labels_is_near_chance() {
    let dir = TempDir::new().unwrap();
    let (gram, labels) = gen_and_kernel(dir.path(), "branch-shift", "100", &["--kernel", "gbc"]);
    let out = dir.path().join("c.json");
    let mut total = 0.0;
    for seed in 0..20 {
        let s = seed.to_string();
        let res = geotree(&[
            "classify", "--gram", p(&gram), "--labels", p(&labels), "--seed", &s, "--shuffle-labels", "--out", p(&out),
        ]);
        assert_eq!(code(&res), 0);
        let report: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
        total += report["accuracy"].as_f64().unwrap();
    }
    let mean = total / 20.0;
    assert!((mean - 0.5).abs() <= 0.1, "mean shuffled accuracy {mean}");
}

#[test]
fn classify_errors() {
    let dir = TempDir::new().unwrap();
    let trees = write_chains(dir.path(), &[2, 3, 4]);
    let labels = dir.path().join("labels.csv");
    fs::write(&labels, "tree_id,label\nc0,0\nc1,1\nc2,1\n").unwrap();
    let gram = dir.path().join("g.csv");
    assert_eq!(code(&geotree(&["kernel", "--trees", p(&trees), "--kernel", "gbc", "--out", p(&gram)])), 0);
    let out = dir.path().join("c.json");
    // Class A has a single tree, so no split leaves it both a training and a test tree.
    assert_eq!(code(&geotree(&["classify", "--gram", p(&gram), "--labels", p(&labels), "--out", p(&out)])), 1);
    assert_eq!(
        code(&geotree(&["classify", "--gram", p(&gram), "--labels", p(&labels), "--holdout", "1.5", "--out", p(&out)])),
        2
    );
}

#[test]
fn bench_writes_parsable_csv() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let res = geotree(&["bench", "--kernel", "gbc,wl", "--sizes", "10,20", "--repeats", "1", "--out", p(&out)]);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["kernel", "nodes", "height", "repeats", "median_seconds", "fitted_slope"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(&rows[1][1], "20");
    assert!(rows.iter().all(|r| r[4].parse::<f64>().unwrap() > 0.0));
}
