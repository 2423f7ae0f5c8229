//! Bundle export and reload.
//!
//! A bundle is a directory of CSV tables plus `manifest.json` and
//! `croissant.json`. Tables use LF line endings, no quoting, and reals in
//! Rust's shortest round-trip decimal form, so a reload reproduces every
//! `f64` bit for bit and a re-export is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::GeneratorConfig;
use crate::error::{Error, Result};
use crate::graph::{GraphData, NodeTable};
use crate::rings::RingRecord;
use crate::schema::{code_tables, NodeType, Relation, RingType};
use crate::split::{Partition, SplitAssignment};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR: &str = concat!("ringbench ", env!("CARGO_PKG_VERSION"));

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CROISSANT_FILE: &str = "croissant.json";
pub const RINGS_FILE: &str = "rings.csv";
pub const SPLIT_USERS_FILE: &str = "split_users.csv";
pub const SPLIT_RINGS_FILE: &str = "split_rings.csv";

/// `ring_type` column codes in node tables.
pub const RING_TYPE_CODES: [&str; 4] = ["none", "ticketing", "ghost_hotel", "ato"];

pub const INTENDED_USE: &str = "Research, benchmarking and teaching of graph-based fraud and \
collusion detection on fully synthetic travel-platform data, including ring-level evaluation \
under leak-free splits.";

pub const PROHIBITED_USE: &str = "Do not use this data or its generator to build, tune or \
validate techniques that help fraudsters evade detection; to profile, score or make decisions \
about real people; or as a substitute for real records in production risk systems.";

pub fn node_file(t: NodeType) -> String {
    format!("nodes_{}.csv", t.as_str())
}

pub fn edge_file(r: Relation) -> String {
    format!("edges_{}.csv", r.as_str())
}

/// `(role, node type)` in the order roles are written to `rings.csv`.
pub const RING_ROLES: [(&str, NodeType); 9] = [
    ("member", NodeType::User),
    ("device", NodeType::Device),
    ("ip", NodeType::IpAddress),
    ("card", NodeType::PaymentCard),
    ("booking", NodeType::Booking),
    ("review", NodeType::Review),
    ("ghost_hotel", NodeType::Hotel),
    ("loyalty", NodeType::LoyaltyAccount),
    ("mule", NodeType::LoyaltyAccount),
];

fn role_ids(r: &RingRecord, role: usize) -> &Vec<usize> {
    [
        &r.members,
        &r.devices,
        &r.ips,
        &r.cards,
        &r.bookings,
        &r.reviews,
        &r.ghost_hotels,
        &r.loyalty,
        &r.mules,
    ][role]
}

fn role_ids_mut(r: &mut RingRecord, role: usize) -> &mut Vec<usize> {
    match role {
        0 => &mut r.members,
        1 => &mut r.devices,
        2 => &mut r.ips,
        3 => &mut r.cards,
        4 => &mut r.bookings,
        5 => &mut r.reviews,
        6 => &mut r.ghost_hotels,
        7 => &mut r.loyalty,
        _ => &mut r.mules,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub file: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeTable {
    pub node_type: NodeType,
    pub column: String,
    pub codes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub fractions: [f64; 3],
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub generator: String,
    /// `sha256:<hex>` over every table, see [`digest_tables`].
    pub digest: String,
    /// Sorted by file name.
    pub tables: Vec<TableEntry>,
    pub code_tables: Vec<CodeTable>,
    pub ring_type_codes: Vec<String>,
    pub rings_per_type: BTreeMap<String, usize>,
    pub fraud_rate: f64,
    pub split: SplitInfo,
    pub config: Option<GeneratorConfig>,
}

impl Manifest {
    pub fn table(&self, file: &str) -> Option<&TableEntry> {
        self.tables.iter().find(|t| t.file == file)
    }

    /// Row count of a node table.
    pub fn count(&self, t: NodeType) -> Option<usize> {
        self.table(&node_file(t)).map(|e| e.rows)
    }
}

#[derive(Debug, Clone)]
pub struct ExportBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub croissant: Value,
}

#[derive(Debug, Clone)]
pub struct LoadedBundle {
    pub graph: GraphData,
    pub rings: Vec<RingRecord>,
    pub assignment: SplitAssignment,
    pub manifest: Manifest,
}

/// Length-prefixed SHA-256 over `(file name, bytes)` pairs in name order:
/// for each table, `len(name) as u64 LE || name || len(bytes) as u64 LE || bytes`.
pub fn digest_tables(tables: &BTreeMap<String, Vec<u8>>) -> String {
    let mut h = Sha256::new();
    for (name, bytes) in tables {
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    format!("sha256:{}", hex::encode(h.finalize()))
}

fn node_header(table: &NodeTable) -> Vec<String> {
    let mut cols = vec!["id".to_string()];
    cols.extend(table.columns.iter().cloned());
    cols.extend(["is_fraud", "ring_id", "ring_type"].map(String::from));
    cols
}

fn render_nodes(table: &NodeTable) -> String {
    let mut out = node_header(table).join(",");
    out.push('\n');
    for id in 0..table.len() {
        write!(out, "{id}").unwrap();
        for v in table.row(id) {
            write!(out, ",{v}").unwrap();
        }
        writeln!(
            out,
            ",{},{},{}",
            table.label[id], table.ring_id[id], table.ring_type[id]
        )
        .unwrap();
    }
    out
}

const EDGE_HEADER: [&str; 2] = ["src_id", "dst_id"];
const RINGS_HEADER: [&str; 5] = ["ring_id", "ring_type", "role", "node_type", "node_id"];
const SPLIT_USERS_HEADER: [&str; 2] = ["user_id", "partition"];
const SPLIT_RINGS_HEADER: [&str; 3] = ["ring_id", "ring_type", "partition"];

fn render_edges(edges: &[(usize, usize)]) -> String {
    let mut out = EDGE_HEADER.join(",");
    out.push('\n');
    for (s, d) in edges {
        writeln!(out, "{s},{d}").unwrap();
    }
    out
}

fn render_rings(rings: &[RingRecord]) -> String {
    let mut out = RINGS_HEADER.join(",");
    out.push('\n');
    for r in rings {
        for (k, (role, t)) in RING_ROLES.iter().enumerate() {
            for id in role_ids(r, k) {
                writeln!(out, "{},{},{role},{t},{id}", r.ring_id, r.ring_type).unwrap();
            }
        }
    }
    out
}

fn render_split(assignment: &SplitAssignment, rings: &[RingRecord]) -> (String, String) {
    let mut users = SPLIT_USERS_HEADER.join(",");
    users.push('\n');
    for (u, p) in assignment.users.iter().enumerate() {
        writeln!(users, "{u},{p}").unwrap();
    }
    let types: BTreeMap<i64, RingType> = rings.iter().map(|r| (r.ring_id, r.ring_type)).collect();
    let mut ring_rows = SPLIT_RINGS_HEADER.join(",");
    ring_rows.push('\n');
    for (id, p) in &assignment.rings {
        let t = types.get(id).map_or("none", |t| t.as_str());
        writeln!(ring_rows, "{id},{t},{p}").unwrap();
    }
    (users, ring_rows)
}

fn strings(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn build_tables(
    graph: &GraphData,
    rings: &[RingRecord],
    assignment: &SplitAssignment,
) -> (BTreeMap<String, Vec<u8>>, Vec<TableEntry>) {
    let mut tables = BTreeMap::new();
    let mut entries = Vec::new();
    let mut add = |file: String, text: String, rows: usize, columns: Vec<String>| {
        entries.push(TableEntry {
            file: file.clone(),
            rows,
            columns,
        });
        tables.insert(file, text.into_bytes());
    };
    for t in NodeType::ALL {
        let table = graph.table(t);
        add(node_file(t), render_nodes(table), table.len(), node_header(table));
    }
    for r in Relation::ALL {
        let e = graph.edges(r);
        add(edge_file(r), render_edges(e), e.len(), strings(&EDGE_HEADER));
    }
    let ring_rows = rings
        .iter()
        .map(|r| (0..RING_ROLES.len()).map(|k| role_ids(r, k).len()).sum::<usize>())
        .sum();
    add(RINGS_FILE.into(), render_rings(rings), ring_rows, strings(&RINGS_HEADER));
    let (users, ring_split) = render_split(assignment, rings);
    add(
        SPLIT_USERS_FILE.into(),
        users,
        assignment.users.len(),
        strings(&SPLIT_USERS_HEADER),
    );
    add(
        SPLIT_RINGS_FILE.into(),
        ring_split,
        assignment.rings.len(),
        strings(&SPLIT_RINGS_HEADER),
    );
    entries.sort_by(|a, b| a.file.cmp(&b.file));
    (tables, entries)
}

fn build_manifest(
    graph: &GraphData,
    rings: &[RingRecord],
    assignment: &SplitAssignment,
    config: Option<&GeneratorConfig>,
    digest: String,
    tables: Vec<TableEntry>,
) -> Manifest {
    let mut rings_per_type: BTreeMap<String, usize> =
        RingType::ALL.iter().map(|t| (t.as_str().to_string(), 0)).collect();
    for r in rings {
        *rings_per_type.get_mut(r.ring_type.as_str()).unwrap() += 1;
    }
    Manifest {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR.to_string(),
        digest,
        tables,
        code_tables: code_tables()
            .into_iter()
            .map(|(node_type, column, codes)| CodeTable {
                node_type,
                column: column.to_string(),
                codes: strings(codes),
            })
            .collect(),
        ring_type_codes: strings(&RING_TYPE_CODES),
        rings_per_type,
        fraud_rate: graph.user_fraud_rate(),
        split: SplitInfo {
            fractions: assignment.fractions,
            warnings: assignment.warnings.clone(),
        },
        config: config.cloned(),
    }
}

fn file_sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Croissant dataset description with responsible-AI fields.
pub fn emit_croissant_rai(manifest: &Manifest, file_hashes: &BTreeMap<String, String>) -> Value {
    let name = match &manifest.config {
        Some(c) => format!("ringbench-{}-seed{}", c.scale.to_string().replace(' ', "-"), c.seed),
        None => "ringbench".to_string(),
    };
    let users = manifest.count(NodeType::User).unwrap_or(0);
    let distribution: Vec<Value> = manifest
        .tables
        .iter()
        .map(|t| {
            json!({
                "@type": "cr:FileObject",
                "@id": t.file,
                "name": t.file,
                "contentUrl": t.file,
                "encodingFormat": "text/csv",
                "sha256": file_hashes.get(&t.file).cloned().unwrap_or_default(),
            })
        })
        .collect();
    let record_sets: Vec<Value> = NodeType::ALL
        .iter()
        .filter_map(|&t| manifest.table(&node_file(t)).map(|e| (t, e)))
        .map(|(t, e)| {
            let fields: Vec<Value> = e
                .columns
                .iter()
                .map(|c| {
                    json!({
                        "@type": "cr:Field",
                        "name": c,
                        "source": {"fileObject": {"@id": e.file}, "extract": {"column": c}},
                    })
                })
                .collect();
            json!({"@type": "cr:RecordSet", "name": t.as_str(), "field": fields})
        })
        .collect();
    json!({
        "@context": {
            "@vocab": "https://schema.org/",
            "sc": "https://schema.org/",
            "cr": "http://mlcommons.org/croissant/",
            "rai": "http://mlcommons.org/croissant/RAI/",
        },
        "@type": "sc:Dataset",
        "conformsTo": "http://mlcommons.org/croissant/1.0",
        "name": name,
        "description": "Synthetic heterogeneous travel-platform graph with injected fraud rings \
and ring-level ground truth.",
        "version": manifest.generator,
        "isSynthetic": true,
        "pii_present": false,
        "rai:personalSensitiveInformation": "None. Every user, device, address, card and booking \
is generated; no record is derived from a real person.",
        "rai:dataCollection": "Generated by a seeded simulator; no data was collected.",
        "rai:dataBiases": format!(
            "Observed fraud rate among users is {:.2}% ({} users). Ring sizes and topologies \
follow configured ranges and will not match any particular real platform.",
            manifest.fraud_rate * 100.0,
            users
        ),
        "rai:fraudRate": manifest.fraud_rate,
        "rai:intendedUse": INTENDED_USE,
        "rai:prohibitedUse": PROHIBITED_USE,
        "digest": manifest.digest,
        "distribution": distribution,
        "recordSet": record_sets,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    text.into_bytes()
}

/// Writes the bundle into `dir`, creating it if needed. The manifest is
/// written last.
pub fn export_bundle(
    graph: &GraphData,
    rings: &[RingRecord],
    assignment: &SplitAssignment,
    config: Option<&GeneratorConfig>,
    dir: &Path,
) -> Result<ExportBundle> {
    graph.validate().into_result()?;
    if assignment.users.len() != graph.count(NodeType::User) {
        return Err(Error::Validation(format!(
            "split covers {} users, graph has {}",
            assignment.users.len(),
            graph.count(NodeType::User)
        )));
    }
    let (tables, entries) = build_tables(graph, rings, assignment);
    let digest = digest_tables(&tables);
    let manifest = build_manifest(graph, rings, assignment, config, digest, entries);
    let hashes = tables.iter().map(|(k, v)| (k.clone(), file_sha(v))).collect();
    let croissant = emit_croissant_rai(&manifest, &hashes);

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, bytes) in &tables {
        write_file(&dir.join(name), bytes)?;
    }
    write_file(&dir.join(CROISSANT_FILE), &to_json(&croissant))?;
    write_file(&dir.join(MANIFEST_FILE), &to_json(&manifest))?;
    Ok(ExportBundle {
        dir: dir.to_path_buf(),
        manifest,
        croissant,
    })
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let found = value.get("schema_version").and_then(Value::as_u64);
    match found {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => {
            return Err(Error::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: v as u32,
            })
        }
        None => return Err(Error::Data(format!("{}: no schema_version", path.display()))),
    }
    serde_json::from_value(value).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn parse<T: std::str::FromStr>(field: &str, file: &str, line: usize) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::Data(format!("{file}:{line}: cannot parse '{field}'")))
}

/// Parses a table, checking the header and the manifest row count.
fn records(bytes: &[u8], entry: &TableEntry) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes);
    let header = reader
        .headers()
        .map_err(|e| Error::Data(format!("{}: {e}", entry.file)))?;
    if header.iter().ne(entry.columns.iter().map(String::as_str)) {
        return Err(Error::Data(format!(
            "{}: header does not match manifest columns",
            entry.file
        )));
    }
    let rows = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Data(format!("{}: {e}", entry.file)))?;
    if rows.len() != entry.rows {
        return Err(Error::Data(format!(
            "{}: manifest records {} rows, file has {}",
            entry.file,
            entry.rows,
            rows.len()
        )));
    }
    Ok(rows)
}

fn parse_nodes(bytes: &[u8], entry: &TableEntry) -> Result<NodeTable> {
    let width = entry.columns.len().checked_sub(4).ok_or_else(|| {
        Error::Data(format!("{}: too few columns", entry.file))
    })?;
    let mut table = NodeTable {
        columns: entry.columns[1..1 + width].to_vec(),
        features: Vec::with_capacity(entry.rows * width),
        label: Vec::with_capacity(entry.rows),
        ring_id: Vec::with_capacity(entry.rows),
        ring_type: Vec::with_capacity(entry.rows),
    };
    for (i, rec) in records(bytes, entry)?.iter().enumerate() {
        let line = i + 2;
        let id: usize = parse(&rec[0], &entry.file, line)?;
        if id != i {
            return Err(Error::Data(format!("{}:{line}: id {id} out of order", entry.file)));
        }
        for j in 0..width {
            table.features.push(parse(&rec[1 + j], &entry.file, line)?);
        }
        table.label.push(parse(&rec[1 + width], &entry.file, line)?);
        table.ring_id.push(parse(&rec[2 + width], &entry.file, line)?);
        table.ring_type.push(parse(&rec[3 + width], &entry.file, line)?);
    }
    Ok(table)
}

fn parse_edges(bytes: &[u8], entry: &TableEntry) -> Result<Vec<(usize, usize)>> {
    records(bytes, entry)?
        .iter()
        .enumerate()
        .map(|(i, rec)| {
            Ok((
                parse(&rec[0], &entry.file, i + 2)?,
                parse(&rec[1], &entry.file, i + 2)?,
            ))
        })
        .collect()
}

fn parse_ring_type(s: &str, file: &str, line: usize) -> Result<RingType> {
    s.parse()
        .map_err(|_| Error::Data(format!("{file}:{line}: unknown ring type '{s}'")))
}

fn parse_rings(bytes: &[u8], entry: &TableEntry) -> Result<Vec<RingRecord>> {
    let mut rings: BTreeMap<i64, RingRecord> = BTreeMap::new();
    for (i, rec) in records(bytes, entry)?.iter().enumerate() {
        let line = i + 2;
        let ring_id: i64 = parse(&rec[0], &entry.file, line)?;
        let ring_type = parse_ring_type(&rec[1], &entry.file, line)?;
        let role = RING_ROLES
            .iter()
            .position(|(r, _)| *r == &rec[2])
            .ok_or_else(|| Error::Data(format!("{}:{line}: unknown role '{}'", entry.file, &rec[2])))?;
        if rec[3] != *RING_ROLES[role].1.as_str() {
            return Err(Error::Data(format!(
                "{}:{line}: role {} expects node type {}",
                entry.file, RING_ROLES[role].0, RING_ROLES[role].1
            )));
        }
        let id: usize = parse(&rec[4], &entry.file, line)?;
        let ring = rings.entry(ring_id).or_insert_with(|| RingRecord {
            ring_id,
            ring_type,
            members: Vec::new(),
            devices: Vec::new(),
            ips: Vec::new(),
            cards: Vec::new(),
            bookings: Vec::new(),
            reviews: Vec::new(),
            ghost_hotels: Vec::new(),
            loyalty: Vec::new(),
            mules: Vec::new(),
        });
        if ring.ring_type != ring_type {
            return Err(Error::Data(format!(
                "{}:{line}: ring {ring_id} has two ring types",
                entry.file
            )));
        }
        role_ids_mut(ring, role).push(id);
    }
    Ok(rings.into_values().collect())
}

fn parse_split(
    users: (&[u8], &TableEntry),
    rings: (&[u8], &TableEntry),
    info: &SplitInfo,
) -> Result<SplitAssignment> {
    let mut user_parts = Vec::with_capacity(users.1.rows);
    for (i, rec) in records(users.0, users.1)?.iter().enumerate() {
        let line = i + 2;
        let u: usize = parse(&rec[0], &users.1.file, line)?;
        if u != i {
            return Err(Error::Data(format!("{}:{line}: user {u} out of order", users.1.file)));
        }
        user_parts.push(parse::<Partition>(&rec[1], &users.1.file, line)?);
    }
    let mut ring_parts = Vec::with_capacity(rings.1.rows);
    for (i, rec) in records(rings.0, rings.1)?.iter().enumerate() {
        let line = i + 2;
        ring_parts.push((
            parse(&rec[0], &rings.1.file, line)?,
            parse::<Partition>(&rec[2], &rings.1.file, line)?,
        ));
    }
    Ok(SplitAssignment {
        fractions: info.fractions,
        users: user_parts,
        rings: ring_parts,
        warnings: info.warnings.clone(),
    })
}

/// Reads every table named in the manifest and checks the digest.
pub fn read_tables(dir: &Path, manifest: &Manifest) -> Result<BTreeMap<String, Vec<u8>>> {
    let mut tables = BTreeMap::new();
    for entry in &manifest.tables {
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        tables.insert(entry.file.clone(), bytes);
    }
    let actual = digest_tables(&tables);
    if actual != manifest.digest {
        return Err(Error::DigestMismatch {
            expected: manifest.digest.clone(),
            actual,
        });
    }
    Ok(tables)
}

pub fn load_bundle(dir: &Path) -> Result<LoadedBundle> {
    let manifest = read_manifest(dir)?;
    let tables = read_tables(dir, &manifest)?;
    let get = |file: &str| -> Result<(&[u8], &TableEntry)> {
        let entry = manifest
            .table(file)
            .ok_or_else(|| Error::Data(format!("manifest lists no {file}")))?;
        Ok((tables[file].as_slice(), entry))
    };

    let mut graph = GraphData::new();
    for t in NodeType::ALL {
        let (bytes, entry) = get(&node_file(t))?;
        graph.nodes[t.index()] = parse_nodes(bytes, entry)?;
    }
    for r in Relation::ALL {
        let (bytes, entry) = get(&edge_file(r))?;
        graph.edges[r.index()] = parse_edges(bytes, entry)?;
    }
    graph.validate().into_result()?;
    let (bytes, entry) = get(RINGS_FILE)?;
    let rings = parse_rings(bytes, entry)?;
    let assignment = parse_split(get(SPLIT_USERS_FILE)?, get(SPLIT_RINGS_FILE)?, &manifest.split)?;
    if assignment.users.len() != graph.count(NodeType::User) {
        return Err(Error::Data(format!(
            "{SPLIT_USERS_FILE} covers {} users, graph has {}",
            assignment.users.len(),
            graph.count(NodeType::User)
        )));
    }
    Ok(LoadedBundle {
        graph,
        rings,
        assignment,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_length_prefixed() {
        let mut a = BTreeMap::new();
        a.insert("ab".to_string(), b"c".to_vec());
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), b"bc".to_vec());
        assert_ne!(digest_tables(&a), digest_tables(&b));
        assert!(digest_tables(&a).starts_with("sha256:"));
        assert_eq!(digest_tables(&a).len(), 7 + 64);
    }

    #[test]
    fn reals_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 123456789.125, -0.0, 5e20, f64::MIN_POSITIVE] {
            let s = format!("{x}");
            let y: f64 = s.parse().unwrap();
            assert_eq!(x.to_bits(), y.to_bits(), "{s}");
        }
        assert_eq!(format!("{}", 3.0f64), "3");
    }

    #[test]
    fn node_rows_render_fixed_columns() {
        let mut t = NodeTable::new(NodeType::Device);
        t.push(&[0.0, 2.0, 0.0, 12.5, 3.0], 1, 4, 2);
        let text = render_nodes(&t);
        assert_eq!(
            text,
            "id,device_type,shared_user_count,is_emulator,first_seen_days_ago,session_count_30d,is_fraud,ring_id,ring_type\n0,0,2,0,12.5,3,1,4,2\n"
        );
    }

    #[test]
    fn prohibited_use_mentions_evasion() {
        assert!(PROHIBITED_USE.contains("evade"));
    }
}
