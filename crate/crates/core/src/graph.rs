//! Heterogeneous property graph: per-type node tables and per-relation
//! edge lists, with dense 0-based ids per node type.

use std::fmt;

use crate::error::{Error, Result};
use crate::schema::{parse_relation_group, NodeType, Relation, RingType};

/// Rows of one node type. Features are row-major, `columns.len()` wide.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTable {
    pub columns: Vec<String>,
    pub features: Vec<f64>,
    pub label: Vec<u8>,
    pub ring_id: Vec<i64>,
    pub ring_type: Vec<u8>,
}

impl NodeTable {
    pub fn new(node_type: NodeType) -> Self {
        NodeTable {
            columns: node_type.features().iter().map(|s| s.to_string()).collect(),
            features: Vec::new(),
            label: Vec::new(),
            ring_id: Vec::new(),
            ring_type: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.label.is_empty()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, id: usize) -> &[f64] {
        let w = self.width();
        &self.features[id * w..(id + 1) * w]
    }

    pub fn row_mut(&mut self, id: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.features[id * w..(id + 1) * w]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        let w = self.width();
        Some((0..self.len()).map(|i| self.features[i * w + j]).collect())
    }

    pub fn get(&self, id: usize, name: &str) -> f64 {
        let j = self
            .column_index(name)
            .unwrap_or_else(|| panic!("no column {name}"));
        self.features[id * self.width() + j]
    }

    /// Sets a feature by name; absent columns (dropped by ablation) are ignored.
    pub fn set(&mut self, id: usize, name: &str, value: f64) {
        if let Some(j) = self.column_index(name) {
            let w = self.width();
            self.features[id * w + j] = value;
        }
    }

    pub fn push(&mut self, row: &[f64], label: u8, ring_id: i64, ring_type: u8) -> usize {
        assert_eq!(row.len(), self.width(), "row width");
        let id = self.len();
        self.features.extend_from_slice(row);
        self.label.push(label);
        self.ring_id.push(ring_id);
        self.ring_type.push(ring_type);
        id
    }

    /// `label` for labelled types, `ring_id >= 0` for the rest, never for flights.
    pub fn derived_label(&self, node_type: NodeType, id: usize) -> bool {
        match node_type {
            NodeType::Flight => false,
            t if t.carries_label() => self.label[id] == 1,
            _ => self.ring_id[id] >= 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphData {
    pub nodes: Vec<NodeTable>,
    pub edges: Vec<Vec<(usize, usize)>>,
}

impl Default for GraphData {
    fn default() -> Self {
        Self::new()
    }
}

impl GraphData {
    pub fn new() -> Self {
        GraphData {
            nodes: NodeType::ALL.iter().map(|&t| NodeTable::new(t)).collect(),
            edges: vec![Vec::new(); Relation::ALL.len()],
        }
    }

    pub fn table(&self, t: NodeType) -> &NodeTable {
        &self.nodes[t.index()]
    }

    pub fn table_mut(&mut self, t: NodeType) -> &mut NodeTable {
        &mut self.nodes[t.index()]
    }

    pub fn count(&self, t: NodeType) -> usize {
        self.table(t).len()
    }

    pub fn edges(&self, r: Relation) -> &[(usize, usize)] {
        &self.edges[r.index()]
    }

    pub fn edge_count(&self, r: Relation) -> usize {
        self.edges[r.index()].len()
    }

    pub fn add_edge(&mut self, r: Relation, src: usize, dst: usize) {
        self.edges[r.index()].push((src, dst));
    }

    pub fn derived_label(&self, t: NodeType, id: usize) -> bool {
        self.table(t).derived_label(t, id)
    }

    pub fn user_labels(&self) -> &[u8] {
        &self.table(NodeType::User).label
    }

    pub fn user_fraud_rate(&self) -> f64 {
        let labels = self.user_labels();
        if labels.is_empty() {
            return 0.0;
        }
        labels.iter().map(|&l| l as usize).sum::<usize>() as f64 / labels.len() as f64
    }

    /// Targets of `r` grouped by source id.
    pub fn out_adjacency(&self, r: Relation) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.count(r.source())];
        for &(s, d) in self.edges(r) {
            adj[s].push(d);
        }
        adj
    }

    /// Sources of `r` grouped by target id.
    pub fn in_adjacency(&self, r: Relation) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.count(r.target())];
        for &(s, d) in self.edges(r) {
            adj[d].push(s);
        }
        adj
    }

    /// Copy with the named relation emptied; `wrote/about` empties both.
    pub fn drop_relation(&self, name: &str) -> Result<GraphData> {
        let rels = parse_relation_group(name)?;
        let mut out = self.clone();
        for r in rels {
            out.edges[r.index()].clear();
        }
        Ok(out)
    }

    /// Copy without one user feature column; remaining order preserved.
    pub fn drop_user_feature(&self, name: &str) -> Result<GraphData> {
        let users = self.table(NodeType::User);
        let j = users.column_index(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown user feature '{name}'; columns are {}",
                users.columns.join(", ")
            ))
        })?;
        let mut out = self.clone();
        let table = out.table_mut(NodeType::User);
        let w = table.width();
        table.features = table
            .features
            .chunks(w)
            .flat_map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| *v))
            .collect();
        table.columns.remove(j);
        Ok(out)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for t in NodeType::ALL {
            let table = self.table(t);
            let n = table.len();
            if !is_subsequence(&table.columns, t.features()) {
                violations.push(Violation::Columns {
                    node_type: t,
                    columns: table.columns.clone(),
                });
            }
            if table.features.len() != n * table.width()
                || table.ring_id.len() != n
                || table.ring_type.len() != n
            {
                violations.push(Violation::Shape { node_type: t });
                continue;
            }
            for id in 0..n {
                let rid = table.ring_id[id];
                let rtype = table.ring_type[id];
                let typed = RingType::from_code(rtype).is_some();
                if (rid >= 0) != typed || (rtype != 0 && !typed) || rid < -1 {
                    violations.push(Violation::RingConsistency { node_type: t, id });
                }
                if table.label[id] > 1 {
                    violations.push(Violation::LabelValue { node_type: t, id });
                } else if t.carries_label() && table.label[id] == 1 && rid < 0 {
                    violations.push(Violation::LabelWithoutRing { node_type: t, id });
                }
            }
            if let Some(bad) = table.features.iter().position(|v| !v.is_finite()) {
                violations.push(Violation::NonFinite {
                    node_type: t,
                    id: bad / table.width().max(1),
                });
            }
        }
        for r in Relation::ALL {
            let (src, dst) = r.signature();
            let (ns, nd) = (self.count(src), self.count(dst));
            for (index, &(s, d)) in self.edges(r).iter().enumerate() {
                if s >= ns || d >= nd {
                    violations.push(Violation::EdgeRange {
                        relation: r,
                        index,
                        src: s,
                        dst: d,
                    });
                }
            }
        }
        ValidationReport { violations }
    }
}

fn is_subsequence(columns: &[String], schema: &[&str]) -> bool {
    let mut it = schema.iter();
    columns.iter().all(|c| it.any(|s| s == c))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Columns { node_type: NodeType, columns: Vec<String> },
    Shape { node_type: NodeType },
    RingConsistency { node_type: NodeType, id: usize },
    LabelValue { node_type: NodeType, id: usize },
    LabelWithoutRing { node_type: NodeType, id: usize },
    NonFinite { node_type: NodeType, id: usize },
    EdgeRange { relation: Relation, index: usize, src: usize, dst: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Columns { node_type, columns } => {
                write!(f, "{node_type}: columns {columns:?} are not a subsequence of the schema")
            }
            Violation::Shape { node_type } => write!(f, "{node_type}: vector lengths disagree"),
            Violation::RingConsistency { node_type, id } => {
                write!(f, "{node_type} {id}: ring_id and ring_type disagree")
            }
            Violation::LabelValue { node_type, id } => write!(f, "{node_type} {id}: label not 0/1"),
            Violation::LabelWithoutRing { node_type, id } => {
                write!(f, "{node_type} {id}: fraud label without ring_id")
            }
            Violation::NonFinite { node_type, id } => {
                write!(f, "{node_type} {id}: non-finite feature")
            }
            Violation::EdgeRange {
                relation,
                index,
                src,
                dst,
            } => write!(f, "{relation} edge {index} ({src} -> {dst}) out of range"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let shown: Vec<String> = self.violations.iter().take(10).map(|v| v.to_string()).collect();
        Err(Error::Validation(format!(
            "{} violation(s): {}",
            self.violations.len(),
            shown.join("; ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> GraphData {
        let mut g = GraphData::new();
        for _ in 0..2 {
            g.table_mut(NodeType::User).push(&[0.0; 10], 0, -1, 0);
        }
        g.table_mut(NodeType::Device).push(&[0.0; 5], 0, -1, 0);
        g.add_edge(Relation::UsesDevice, 0, 0);
        g.add_edge(Relation::UsesDevice, 1, 0);
        g
    }

    #[test]
    fn clean_graph_passes() {
        assert!(tiny().validate().passed());
    }

    #[test]
    fn edge_past_node_count_is_one_violation() {
        let mut g = tiny();
        g.add_edge(Relation::UsesDevice, 1, 5);
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], Violation::EdgeRange { index: 2, .. }));
    }

    #[test]
    fn fraud_label_without_ring_is_one_violation() {
        let mut g = tiny();
        g.table_mut(NodeType::User).label[1] = 1;
        let report = g.validate();
        assert_eq!(
            report.violations,
            vec![Violation::LabelWithoutRing {
                node_type: NodeType::User,
                id: 1
            }]
        );
    }

    #[test]
    fn ring_id_without_type_flagged() {
        let mut g = tiny();
        g.table_mut(NodeType::Device).ring_id[0] = 3;
        assert_eq!(g.validate().violations.len(), 1);
    }

    #[test]
    fn drop_relation_touches_only_that_list() {
        let g = tiny();
        let d = g.drop_relation("uses_device").unwrap();
        assert_eq!(d.edge_count(Relation::UsesDevice), 0);
        assert_eq!(d.nodes, g.nodes);
        assert!(g.drop_relation("follows").is_err());
    }

    #[test]
    fn drop_user_feature_preserves_order() {
        let mut g = GraphData::new();
        let row: Vec<f64> = (0..10).map(f64::from).collect();
        g.table_mut(NodeType::User).push(&row, 0, -1, 0);
        let d = g.drop_user_feature("distinct_device_count").unwrap();
        let users = d.table(NodeType::User);
        assert_eq!(users.width(), 9);
        assert_eq!(users.row(0), &[0.0, 1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(users.columns[2], "velocity_score");
        assert!(d.validate().passed());
        assert!(g.drop_user_feature("shoe_size").is_err());
    }

    #[test]
    fn derived_labels() {
        let mut g = GraphData::new();
        g.table_mut(NodeType::Device).push(&[0.0; 5], 0, 4, 1);
        g.table_mut(NodeType::Flight).push(&[0.0; 7], 0, -1, 0);
        assert!(g.derived_label(NodeType::Device, 0));
        assert!(!g.derived_label(NodeType::Flight, 0));
    }
}
