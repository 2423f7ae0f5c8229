use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ringbench_core::export::{edge_file, load_bundle};
use ringbench_core::schema::{NodeType, Relation};
use ringbench_core::split::Partition;

fn ringbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate_at(scale: &str, dir: &Path, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec!["generate", "--scale", scale, "--seed", "3", "--out", out];
    args.extend_from_slice(extra);
    let o = ringbench(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_echoes_config_and_digest() {
    let dir = tempfile::tempdir().unwrap();
    let o = ringbench(&["generate", "--scale", "toy", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    let config_line = text.lines().find(|l| l.starts_with("config: ")).unwrap();
    let config: serde_json::Value = serde_json::from_str(&config_line["config: ".len()..]).unwrap();
    assert_eq!(config["seed"], 42);
    let digest = text.lines().find_map(|l| l.strip_prefix("digest: ")).unwrap();
    assert_eq!(digest, load_bundle(dir.path()).unwrap().manifest.digest);
}

#[test]
fn larger_ring_config_yields_160_rings() {
    let dir = tempfile::tempdir().unwrap();
    let o = ringbench(&[
        "generate",
        "--scale",
        "medium",
        "--rings-ticketing",
        "54",
        "--rings-ghost",
        "54",
        "--rings-ato",
        "52",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rings: 160"));
    let b = load_bundle(dir.path()).unwrap();
    assert_eq!(b.rings.len(), 160);
    assert!(b.assignment.spanning_rings(&b.rings).is_empty());
}

#[test]
fn dropped_relation_leaves_header_only_file() {
    let dir = tempfile::tempdir().unwrap();
    generate_at("toy", dir.path(), &["--drop-relation", "uses_device"]);
    let text = fs::read_to_string(dir.path().join(edge_file(Relation::UsesDevice))).unwrap();
    assert_eq!(text, "src_id,dst_id\n");
    let other = fs::read_to_string(dir.path().join(edge_file(Relation::UsesIp))).unwrap();
    assert!(other.lines().count() > 1);
}

#[test]
fn ablate_copies_bundle_without_feature() {
    let src = tempfile::tempdir().unwrap();
    let dst = tempfile::tempdir().unwrap();
    generate_at("toy", src.path(), &[]);
    let o = ringbench(&[
        "ablate",
        "--bundle",
        src.path().to_str().unwrap(),
        "--drop-feature",
        "ip_count",
        "--drop-relation",
        "wrote/about",
        "--out",
        dst.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = load_bundle(dst.path()).unwrap();
    assert_eq!(b.graph.table(NodeType::User).width(), 9);
    assert_eq!(b.graph.edge_count(Relation::Wrote), 0);
    assert_eq!(b.graph.edge_count(Relation::About), 0);
    let config = b.manifest.config.unwrap();
    assert!(config.feature_exclusions.contains("ip_count"));
}

#[test]
fn oracle_scores_evaluate_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    generate_at("small", dir.path(), &[]);
    let b = load_bundle(dir.path()).unwrap();
    let mut tsv = String::from("user_id\tscore\n");
    for (u, &l) in b.graph.user_labels().iter().enumerate() {
        tsv += &format!("{u}\t{}\n", if l == 1 { 0.9 } else { 0.1 });
    }
    let scores = dir.path().join("scores.tsv");
    fs::write(&scores, tsv).unwrap();
    let report = dir.path().join("report.csv");
    let o = ringbench(&[
        "evaluate",
        "--bundle",
        dir.path().to_str().unwrap(),
        "--scores",
        scores.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(report).unwrap();
    assert!(csv.contains("auc_roc,1\n"), "{csv}");
    assert!(csv.contains("average_precision,1\n"), "{csv}");
}

#[test]
fn missing_score_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    generate_at("toy", dir.path(), &[]);
    let b = load_bundle(dir.path()).unwrap();
    let skip = b.assignment.users_in(Partition::Test).next().unwrap();
    let tsv: String = (0..b.graph.count(NodeType::User))
        .filter(|&u| u != skip)
        .map(|u| format!("{u}\t0.5\n"))
        .collect();
    let scores = dir.path().join("scores.tsv");
    fs::write(&scores, tsv).unwrap();
    let o = ringbench(&[
        "evaluate",
        "--bundle",
        dir.path().to_str().unwrap(),
        "--scores",
        scores.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("user {skip} has no score")));
}

#[test]
fn exit_codes_by_error_kind() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(ringbench(&["generate", "--scale", "mega", "--out", out]).status.code(), Some(1));
    assert_eq!(ringbench(&["generate", "--drop-feature", "shoe_size", "--out", out]).status.code(), Some(1));
    assert_eq!(ringbench(&["frobnicate"]).status.code(), Some(1));
    let missing = dir.path().join("absent");
    assert_eq!(ringbench(&["analyze", "--bundle", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ringbench(&["--help"]).status.code(), Some(0));
}

#[test]
fn split_resplits_in_place() {
    let dir = tempfile::tempdir().unwrap();
    generate_at("toy", dir.path(), &[]);
    let bundle = dir.path().to_str().unwrap();
    let o = ringbench(&["split", "--bundle", bundle, "--fractions", "0.5,0.25,0.25", "--seed", "8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = load_bundle(dir.path()).unwrap();
    assert_eq!(b.manifest.split.fractions, [0.5, 0.25, 0.25]);
    assert!(stdout(&o).contains("leakage: 0 device(s), 0 ip(s); ring-spanning rings: 0"));
    let bad = ringbench(&["split", "--bundle", bundle, "--fractions", "0.5,0.5"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn analyze_and_baseline_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    generate_at("small", dir.path(), &[]);
    let bundle = dir.path().to_str().unwrap();
    let reports = dir.path().join("reports");
    let o = ringbench(&["analyze", "--bundle", bundle, "--out", reports.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["homophily.csv", "motifs.csv", "calibration.csv"] {
        assert!(reports.join(f).exists(), "{f}");
    }
    assert!(stdout(&o).contains("isolation breaches: 0"));
    let scores = dir.path().join("scores.tsv");
    let o = ringbench(&["baseline", "--bundle", bundle, "--model", "tabular", "--scores-out", scores.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(scores).unwrap().lines().count(), 1 + 2000);
    assert_eq!(ringbench(&["baseline", "--bundle", bundle, "--model", "gnn"]).status.code(), Some(1));
}

#[test]
fn sweep_writes_eighteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let o = ringbench(&["sweep", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 19);
    assert!(stdout(&o).contains("warning: r=30:"));
}
