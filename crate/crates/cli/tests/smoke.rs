use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hcost_core::Template;
use serde_json::Value;
use tempfile::TempDir;

fn hcost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcost"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn gen(dir: &TempDir, model: &str, n: &str, k: &str, delta: &str, seed: &str) -> (PathBuf, PathBuf) {
    let g = p(dir, &format!("{model}-{seed}.graph"));
    let l = p(dir, &format!("{model}-{seed}.labels"));
    let o = hcost(&[
        "gen", "--model", model, "--n", n, "--k", k, "--delta", delta, "--seed", seed, "--out", s(&g), "--labels", s(&l),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    (g, l)
}

fn json_out(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report on stdout")
}

#[test]
fn gen_d1_labels_and_determinism() {
    let dir = TempDir::new().unwrap();
    let (g, l) = gen(&dir, "d1", "4096", "8", "0.004", "3");
    let labels: BTreeSet<String> = std::fs::read_to_string(&l).unwrap().lines().map(String::from).collect();
    assert_eq!(labels.len(), 8);
    let first = std::fs::read(&g).unwrap();
    let first_l = std::fs::read(&l).unwrap();
    let (g2, l2) = gen(&dir, "d1", "4096", "8", "0.004", "3");
    assert_eq!(g, g2);
    assert_eq!(std::fs::read(&g2).unwrap(), first);
    assert_eq!(std::fs::read(&l2).unwrap(), first_l);
}

#[test]
fn gen_d2_support_is_template() {
    let dir = TempDir::new().unwrap();
    let (g, _) = gen(&dir, "d2", "4096", "8", "0.004", "1");
    let r = json_out(&hcost(&["exact", "--graph", s(&g)]));
    let w = r["result"]["w"].as_array().unwrap();
    let mut support = BTreeSet::new();
    for (i, row) in w.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            if i < j && x.as_f64().unwrap() > 0.0 {
                support.insert((i, j));
            }
        }
    }
    let template: BTreeSet<(usize, usize)> = Template::Expander4
        .edges(8)
        .unwrap()
        .into_iter()
        .map(|(a, b)| (a.min(b), a.max(b)))
        .collect();
    assert_eq!(support, template);
}

#[test]
fn gen_failure_exit_code() {
    let dir = TempDir::new().unwrap();
    let o = hcost(&[
        "gen", "--model", "d1", "--n", "128", "--k", "8", "--delta", "0.0001", "--max-attempts", "2", "--out",
        s(&p(&dir, "x.graph")),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn estimate_exact_h_bracket_and_report_roundtrip() {
    let dir = TempDir::new().unwrap();
    let (g, _) = gen(&dir, "d1", "4096", "4", "0.004", "2");
    let out = p(&dir, "exact-h.json");
    let o = hcost(&["estimate", "--graph", s(&g), "--mode", "exact-h", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let r: Value = serde_json::from_str(&text).unwrap();
    let est = r["result"]["est"].as_f64().unwrap();
    let lower = r["baselines"]["lower_bracket"].as_f64().unwrap();
    assert!(est >= lower, "{est} < {lower}");
    assert!(r["result"]["tree"].as_str().unwrap().starts_with('('));
    let again = hcost(&["report", "--input", s(&out), "--format", "json"]);
    assert_eq!(code(&again), 0);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn estimate_om_counters_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let (g, l) = gen(&dir, "d1", "4096", "4", "0.004", "4");
    let args = [
        "estimate", "--graph", s(&g), "--labels", s(&l), "--mode", "om", "--seeds", "20000", "--seed", "9",
    ];
    let a = hcost(&args);
    let b = hcost(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let r = json_out(&a);
    assert!(r["queries"]["cluster_queries"].as_u64().unwrap() > 0);
    assert_eq!(r["queries"]["seeds_issued"].as_u64().unwrap(), 0);
    assert!(r["formulas"].as_array().unwrap().iter().all(|f| f["unscaled"].as_f64().unwrap() > 0.0));
}

#[test]
fn estimate_om_zero_scale_is_empty_sample() {
    let dir = TempDir::new().unwrap();
    let (g, _) = gen(&dir, "d1", "1024", "4", "0.01", "5");
    let o = hcost(&["estimate", "--graph", s(&g), "--mode", "om", "--scale", "0"]);
    assert_eq!(code(&o), 3);
    let r = json_out(&o);
    assert!(r["error"].as_str().unwrap().contains("no vertex from cluster"));
    assert!(r["queries"]["cluster_queries"].as_u64().unwrap() <= 2);
}

#[test]
fn estimate_rs_paths() {
    let dir = TempDir::new().unwrap();
    let g = p(&dir, "planted.graph");
    let o = hcost(&[
        "gen", "--model", "planted", "--n", "256", "--k", "2", "--delta", "0.01", "--phi", "0.3", "--seed", "1",
        "--out", s(&g),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = hcost(&["estimate", "--graph", s(&g), "--mode", "rs", "--exact-walks", "--phi", "0.4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json_out(&o);
    assert_eq!(r["residuals"]["feasible"], Value::Bool(true));
    assert_eq!(r["queries"]["seeds_issued"].as_u64().unwrap(), 256 + 20_000);
    let o = hcost(&["estimate", "--graph", s(&g), "--mode", "rs", "--phi", "0.4", "--format", "csv"]);
    assert!(matches!(code(&o), 0 | 3));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().next().unwrap().contains("queries.seeds_issued"));
}

#[test]
fn lb_experiment_paths() {
    let dir = TempDir::new().unwrap();
    let o = hcost(&["lb-experiment", "--trials", "0"]);
    assert_eq!(code(&o), 0);
    let out = p(&dir, "lb.csv");
    let args = [
        "lb-experiment", "--n", "2048", "--k", "8", "--eps", "0.005", "--trials", "6", "--seed", "2", "--format",
        "csv", "--out", s(&out),
    ];
    assert_eq!(code(&hcost(&args)), 0);
    let first = std::fs::read(&out).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 7);
    assert_eq!(code(&hcost(&args)), 0);
    assert_eq!(std::fs::read(&out).unwrap(), first);
    let o = hcost(&["lb-experiment", "--n", "128", "--k", "8", "--eps", "0.0001", "--trials", "2", "--max-retries", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn exact_and_laplacian_dump() {
    let dir = TempDir::new().unwrap();
    let (g, _) = gen(&dir, "d1", "1024", "4", "0.01", "6");
    let lap = p(&dir, "h.txt");
    let o = hcost(&["exact", "--graph", s(&g), "--laplacian", s(&lap)]);
    assert_eq!(code(&o), 0);
    let r = json_out(&o);
    assert!(r["result"]["lambda_k1"].as_f64().unwrap() > r["result"]["lambda_k"].as_f64().unwrap());
    let m = hcost_core::io::read_matrix(std::io::BufReader::new(std::fs::File::open(&lap).unwrap())).unwrap();
    assert_eq!(m.nrows(), 4);
    assert!(m.row_sum().iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn io_errors_exit_four() {
    let dir = TempDir::new().unwrap();
    let missing = p(&dir, "missing.graph");
    assert_eq!(code(&hcost(&["estimate", "--graph", s(&missing), "--mode", "om"])), 4);
    let bad = p(&dir, "bad.json");
    std::fs::write(&bad, "{}").unwrap();
    assert_eq!(code(&hcost(&["report", "--input", s(&bad)])), 4);
}
