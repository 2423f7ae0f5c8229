//! Reads a bundle with nothing but CSV and JSON parsing, the way an
//! external loader would, and checks it against the manifest.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use ringbench_core::config::{GeneratorConfig, PresetName};
use ringbench_core::export::export_bundle;
use ringbench_core::generate::generate;
use ringbench_core::rng::make_rng;
use ringbench_core::split::{split, DEFAULT_FRACTIONS};
use serde_json::Value;

fn toy_bundle(dir: &Path) {
    let config = GeneratorConfig::preset(PresetName::Toy, 5);
    let out = generate(&config).unwrap();
    let a = split(&out.graph, &out.rings, DEFAULT_FRACTIONS, &mut make_rng(5, "split")).unwrap();
    export_bundle(&out.graph, &out.rings, &a, Some(&config), dir).unwrap();
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn tables_agree_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    toy_bundle(dir.path());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert!(manifest["digest"].as_str().unwrap().starts_with("sha256:"));
    let tables = manifest["tables"].as_array().unwrap();
    assert_eq!(tables.len(), 9 + 12 + 3);
    for t in tables {
        let file = t["file"].as_str().unwrap();
        let (header, rows) = read_csv(&dir.path().join(file));
        let columns: Vec<String> = t["columns"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_str().unwrap().to_string())
            .collect();
        assert_eq!(header, columns, "{file}");
        assert_eq!(rows.len() as u64, t["rows"].as_u64().unwrap(), "{file}");
        if file.starts_with("nodes_") {
            assert_eq!(&header[header.len() - 3..], ["is_fraud", "ring_id", "ring_type"]);
            for (i, row) in rows.iter().enumerate() {
                assert_eq!(row[0], i.to_string(), "{file}: ids run 0..n");
            }
        }
    }
    let (users_header, users) = read_csv(&dir.path().join("nodes_user.csv"));
    assert_eq!(users_header.len() - 4, 10);
    let fraud = users.iter().filter(|r| r[11] == "1").count();
    let rate = manifest["fraud_rate"].as_f64().unwrap();
    assert!((fraud as f64 / users.len() as f64 - rate).abs() < 1e-12);
    let codes: Vec<&str> = manifest["ring_type_codes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert_eq!(codes, ["none", "ticketing", "ghost_hotel", "ato"]);
}

#[test]
fn split_masks_follow_ring_partitions() {
    let dir = tempfile::tempdir().unwrap();
    toy_bundle(dir.path());
    let (_, users) = read_csv(&dir.path().join("nodes_user.csv"));
    let (h, split_users) = read_csv(&dir.path().join("split_users.csv"));
    assert_eq!(h, ["user_id", "partition"]);
    assert_eq!(split_users.len(), users.len());
    let (h, split_rings) = read_csv(&dir.path().join("split_rings.csv"));
    assert_eq!(h, ["ring_id", "ring_type", "partition"]);
    let ring_part: HashMap<&str, &str> = split_rings.iter().map(|r| (r[0].as_str(), r[2].as_str())).collect();
    let mut sums: HashMap<&str, usize> = HashMap::new();
    for (u, row) in split_users.iter().enumerate() {
        assert_eq!(row[0], u.to_string());
        *sums.entry(row[1].as_str()).or_default() += 1;
        let ring = users[u][12].as_str();
        if ring != "-1" {
            assert_eq!(ring_part[ring], row[1], "user {u} outside its ring's partition");
        }
    }
    assert_eq!(sums.values().sum::<usize>(), users.len());
    assert!(sums.keys().all(|k| ["train", "val", "test"].contains(k)));

    let (h, rings) = read_csv(&dir.path().join("rings.csv"));
    assert_eq!(h, ["ring_id", "ring_type", "role", "node_type", "node_id"]);
    let members = rings.iter().filter(|r| r[2] == "member").count();
    let fraud_users = users.iter().filter(|r| r[11] == "1").count();
    assert_eq!(members, fraud_users);
}
