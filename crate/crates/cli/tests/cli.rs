use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hashcoarsen::io::{self, write_edge_list, write_features, write_lines};
use hashcoarsen::synth::{hetero_bibliographic, random_graph};
use hashcoarsen::{DenseMatrix, Graph};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashcoarsen"))
        .args(args)
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Inputs {
    edges: PathBuf,
    features: PathBuf,
    labels: PathBuf,
}

fn write_graph(dir: &Path, g: &Graph) -> Inputs {
    let inputs = Inputs {
        edges: dir.join("edges.tsv"),
        features: dir.join("features.csv"),
        labels: dir.join("labels.txt"),
    };
    write_edge_list(&inputs.edges, g.edges()).unwrap();
    write_features(&inputs.features, g.features()).unwrap();
    write_lines(&inputs.labels, g.labels().unwrap()).unwrap();
    inputs
}

fn coarsen(inputs: &Inputs, out: &Path, ratios: &str, extra: &[&str]) -> Output {
    let mut args = vec![
        "coarsen",
        "--edges",
        s(&inputs.edges),
        "--features",
        s(&inputs.features),
        "--labels",
        s(&inputs.labels),
        "--ratios",
        ratios,
        "--seed",
        "5",
        "--out",
        s(out),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unit_ratio_gives_identity_assignment() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(40, 0.1, 3, 2, 1));
    let out = tmp.path().join("out");
    let o = coarsen(&inputs, &out, "1.0", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let assignment = io::read_assignment(&out.join("ratio_1/assignment.txt")).unwrap();
    assert_eq!(assignment, (0..40).collect::<Vec<_>>());
}

#[test]
fn two_ratios_are_sized_and_nested() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(100, 0.05, 4, 3, 2));
    let out = tmp.path().join("out");
    let o = coarsen(&inputs, &out, "0.5,0.3", &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fine = io::read_coarsening(&out.join("ratio_0.5/assignment.txt")).unwrap();
    let coarse = io::read_coarsening(&out.join("ratio_0.3/assignment.txt")).unwrap();
    assert_eq!((fine.num_supernodes(), coarse.num_supernodes()), (50, 30));
    assert!(fine.refines(&coarse));
    let side = json(&out.join("ratio_0.3/sidecar.json"));
    assert_eq!(side["num_supernodes"], 30);
    assert_eq!(side["seed"], 5);
}

#[test]
fn percent_ratios_match_fractions() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(60, 0.1, 2, 2, 3));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(coarsen(&inputs, &a, "50,20", &[]).status.success());
    assert!(coarsen(&inputs, &b, "0.5,0.2", &[]).status.success());
    for r in ["ratio_0.5", "ratio_0.2"] {
        let x = fs::read(a.join(r).join("assignment.txt")).unwrap();
        let y = fs::read(b.join(r).join("assignment.txt")).unwrap();
        assert_eq!(x, y);
    }
}

#[test]
fn missing_features_file_exits_2_and_names_it() {
    let tmp = TempDir::new().unwrap();
    let mut inputs = write_graph(tmp.path(), &random_graph(10, 0.3, 2, 2, 4));
    inputs.features = tmp.path().join("nope.csv");
    let o = coarsen(&inputs, &tmp.path().join("out"), "0.5", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn malformed_edge_line_is_reported_by_number() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(10, 0.3, 2, 2, 4));
    fs::write(&inputs.edges, "# header\n0\t1\t1.0\n2\tx\n").unwrap();
    let o = coarsen(&inputs, &tmp.path().join("out"), "0.5", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("edges.tsv:3:"), "{}", stderr(&o));
}

#[test]
fn bad_configuration_exits_3() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(10, 0.3, 2, 2, 4));
    let out = tmp.path().join("out");
    assert_eq!(coarsen(&inputs, &out, "0.3,0.5", &[]).status.code(), Some(3));
    assert_eq!(coarsen(&inputs, &out, "0", &[]).status.code(), Some(3));
    assert_eq!(
        coarsen(&inputs, &out, "0.5", &["--alpha", "1.5"]).status.code(),
        Some(3)
    );
    assert_eq!(
        coarsen(&inputs, &out, "0.5", &["--projectors", "0"]).status.code(),
        Some(3)
    );
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(80, 0.08, 3, 3, 6));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(coarsen(&inputs, &a, "0.6,0.25", &["--emit-metrics"]).status.success());
    assert!(coarsen(&inputs, &b, "0.6,0.25", &["--emit-metrics"]).status.success());
    for r in ["ratio_0.6", "ratio_0.25"] {
        for entry in fs::read_dir(a.join(r)).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(
                fs::read(a.join(r).join(&name)).unwrap(),
                fs::read(b.join(r).join(&name)).unwrap(),
                "{name:?}"
            );
        }
    }
    assert_eq!(
        fs::read(a.join("metrics.csv")).unwrap(),
        fs::read(b.join("metrics.csv")).unwrap()
    );
}

#[test]
fn json_keys_are_sorted() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(30, 0.1, 2, 2, 7));
    let out = tmp.path().join("out");
    assert!(coarsen(&inputs, &out, "0.5", &[]).status.success());
    let text = fs::read_to_string(out.join("ratio_0.5/sidecar.json")).unwrap();
    let keys: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \"") && !l.starts_with("   "))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(keys.len() > 5);
}

fn metrics_for(sidecar: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["metrics", s(sidecar)];
    args.extend_from_slice(extra);
    run(&args)
}

#[test]
fn metrics_at_unit_ratio_are_zero() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(30, 0.2, 2, 2, 8));
    let out = tmp.path().join("out");
    assert!(coarsen(&inputs, &out, "1", &[]).status.success());
    let o = metrics_for(&out.join("ratio_1/sidecar.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["ree"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["he"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(v["rce_raw"], 0.0);
    assert_eq!(v["rce_log10"], Value::Null);
}

#[test]
fn metrics_on_path_fixture() {
    let tmp = TempDir::new().unwrap();
    let x = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 1.0]]).unwrap();
    let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], x, Some(vec![0, 0, 1])).unwrap();
    let inputs = write_graph(tmp.path(), &g);
    let out = tmp.path().join("out");
    assert!(coarsen(&inputs, &out, "1", &[]).status.success());
    // Replace the identity with the partition {0, 1}, {2}.
    let dir = out.join("ratio_1");
    fs::write(dir.join("assignment.txt"), "0\n0\n1\n").unwrap();
    let mut side = json(&dir.join("sidecar.json"));
    side["num_supernodes"] = 2.into();
    fs::write(dir.join("sidecar.json"), side.to_string()).unwrap();
    let o = metrics_for(&dir.join("sidecar.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["he"].as_f64().unwrap() - 1.9826969446812033).abs() < 1e-12);
    assert!((v["rce_raw"].as_f64().unwrap() - 11.0).abs() < 1e-12);
    assert!((v["ree"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!((v["k"].as_u64(), v["skipped"].as_u64()), (Some(1), Some(1)));
    let o = metrics_for(&dir.join("sidecar.json"), &["--lift", "normalized"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["rce_raw"].as_f64().unwrap() - 7.75).abs() < 1e-12);
}

#[test]
fn oversize_eigensolve_exits_4() {
    let tmp = TempDir::new().unwrap();
    let inputs = write_graph(tmp.path(), &random_graph(60, 0.1, 2, 2, 9));
    let out = tmp.path().join("out");
    assert!(coarsen(&inputs, &out, "0.5", &[]).status.success());
    let sidecar = out.join("ratio_0.5/sidecar.json");
    assert_eq!(
        metrics_for(&sidecar, &["--dense-eig-limit", "50"]).status.code(),
        Some(4)
    );
    let o = metrics_for(&sidecar, &["--dense-eig-limit", "50", "--iterative"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

fn hetero_inputs(dir: &Path) -> PathBuf {
    io::write_hetero(dir, &hetero_bibliographic(20, 30, 12, 3)).unwrap()
}

fn coarsen_hetero(manifest: &Path, out: &Path, ratios: &str) -> Output {
    run(&[
        "coarsen-hetero",
        "--manifest",
        s(manifest),
        "--ratios",
        ratios,
        "--seed",
        "2",
        "--out",
        s(out),
    ])
}

#[test]
fn hetero_unit_ratio_keeps_relations() {
    let tmp = TempDir::new().unwrap();
    let manifest = hetero_inputs(&tmp.path().join("in"));
    let out = tmp.path().join("out");
    let o = coarsen_hetero(&manifest, &out, "1");
    assert!(o.status.success(), "{}", stderr(&o));
    let original = io::load_hetero(&manifest).unwrap();
    let coarse = io::load_hetero(&out.join("ratio_1/manifest.json")).unwrap();
    for (a, b) in original.relations().iter().zip(coarse.relations()) {
        let mut x: Vec<_> = a.matrix.triplets().collect();
        let mut y: Vec<_> = b.matrix.triplets().collect();
        x.sort_by(|p, q| p.partial_cmp(q).unwrap());
        y.sort_by(|p, q| p.partial_cmp(q).unwrap());
        assert_eq!(x, y);
    }
}

#[test]
fn hetero_half_ratio_is_pure_and_conserves() {
    let tmp = TempDir::new().unwrap();
    let manifest = hetero_inputs(&tmp.path().join("in"));
    let out = tmp.path().join("out");
    assert!(coarsen_hetero(&manifest, &out, "0.5").status.success());
    let p = json(&out.join("ratio_0.5/purity.json"));
    assert_eq!(p["purity"], 1.0);
    for (_, rel) in p["relations"].as_object().unwrap() {
        let (a, b) = (
            rel["original_weight"].as_f64().unwrap(),
            rel["coarsened_weight"].as_f64().unwrap(),
        );
        assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
    let side = json(&out.join("ratio_0.5/sidecar.json"));
    assert_eq!(side["types"]["author"]["num_supernodes"], 10);
}

#[test]
fn hetero_endpoint_out_of_range_exits_2() {
    let tmp = TempDir::new().unwrap();
    let manifest = hetero_inputs(&tmp.path().join("in"));
    let m = json(&manifest);
    let file = m["relations"][0]["edges_file"].as_str().unwrap();
    let path = manifest.parent().unwrap().join(file);
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("100000\t0\t1\n");
    fs::write(&path, text).unwrap();
    let o = coarsen_hetero(&manifest, &tmp.path().join("out"), "0.5");
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(&format!("{file}:")), "{}", stderr(&o));
}

#[test]
fn theory_checks_pass_with_small_budgets() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("theory");
    let o = run(&[
        "validate-theory",
        "--seed",
        "1",
        "--trials",
        "20000",
        "--lb-trials",
        "50",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let checks = json(&out.join("checks.json"));
    assert!(checks.as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(
        fs::read_to_string(out.join("proximity_curve.csv"))
            .unwrap()
            .lines()
            .count()
            > 10
    );
}

#[test]
fn bench_writes_one_row_per_size() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("bench.csv");
    let o = run(&[
        "bench",
        "--sizes",
        "500,1000",
        "--ratios",
        "0.5,0.2",
        "--repeats",
        "1",
        "--out",
        s(&csv),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "num_nodes,num_edges,num_ratios,adaptive_s,naive_s,speedup");
    assert_eq!(lines.len(), 3);
}
