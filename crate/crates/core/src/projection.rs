//! User-user co-occurrence projection through shared device and IP hubs.

use std::collections::HashSet;

use serde::Serialize;

use crate::graph::GraphData;
use crate::schema::Relation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    DeviceShare,
    IpShare,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::DeviceShare, Channel::IpShare];

    pub fn relation(self) -> Relation {
        match self {
            Channel::DeviceShare => Relation::UsesDevice,
            Channel::IpShare => Relation::UsesIp,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Undirected edges stored as `(u, v, channel)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedUserGraph {
    pub n_users: usize,
    pub edges: Vec<(usize, usize, Channel)>,
}

impl ProjectedUserGraph {
    pub fn channel_edges(&self, channel: Channel) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.2 == channel)
            .map(|&(u, v, _)| (u, v))
    }

    /// Neighbour lists per channel, each sorted.
    pub fn neighbours(&self) -> [Vec<Vec<usize>>; 2] {
        let mut adj = [vec![Vec::new(); self.n_users], vec![Vec::new(); self.n_users]];
        for &(u, v, c) in &self.edges {
            adj[c.index()][u].push(v);
            adj[c.index()][v].push(u);
        }
        for lists in adj.iter_mut() {
            for l in lists.iter_mut() {
                l.sort_unstable();
            }
        }
        adj
    }
}

pub fn project_user_graph(graph: &GraphData) -> ProjectedUserGraph {
    let mut edges = Vec::new();
    for channel in Channel::ALL {
        let mut seen = HashSet::new();
        for hub in graph.in_adjacency(channel.relation()) {
            for (i, &a) in hub.iter().enumerate() {
                for &b in &hub[i + 1..] {
                    if a == b {
                        continue;
                    }
                    let pair = (a.min(b), a.max(b));
                    if seen.insert(pair) {
                        edges.push((pair.0, pair.1, channel));
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    ProjectedUserGraph {
        n_users: graph.count(crate::schema::NodeType::User),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::NodeType;

    fn users_and_devices(n_users: usize, n_devices: usize) -> GraphData {
        let mut g = GraphData::new();
        for _ in 0..n_users {
            g.table_mut(NodeType::User).push(&[0.0; 10], 0, -1, 0);
        }
        for _ in 0..n_devices {
            g.table_mut(NodeType::Device).push(&[0.0; 5], 0, -1, 0);
            g.table_mut(NodeType::IpAddress).push(&[0.0; 5], 0, -1, 0);
        }
        g
    }

    #[test]
    fn shared_hub_gives_triangle() {
        let mut g = users_and_devices(3, 1);
        for u in 0..3 {
            g.add_edge(Relation::UsesDevice, u, 0);
        }
        let p = project_user_graph(&g);
        assert_eq!(p.edges.len(), 3);
        assert!(p.edges.iter().all(|e| e.2 == Channel::DeviceShare));
    }

    #[test]
    fn disjoint_users_have_no_edges() {
        let mut g = users_and_devices(2, 2);
        g.add_edge(Relation::UsesDevice, 0, 0);
        g.add_edge(Relation::UsesDevice, 1, 1);
        g.add_edge(Relation::UsesIp, 0, 0);
        g.add_edge(Relation::UsesIp, 1, 1);
        assert!(project_user_graph(&g).edges.is_empty());
    }

    #[test]
    fn two_shared_devices_count_once() {
        let mut g = users_and_devices(2, 2);
        for d in 0..2 {
            g.add_edge(Relation::UsesDevice, 0, d);
            g.add_edge(Relation::UsesDevice, 1, d);
        }
        g.add_edge(Relation::UsesIp, 0, 1);
        g.add_edge(Relation::UsesIp, 1, 1);
        let p = project_user_graph(&g);
        assert_eq!(
            p.edges,
            vec![(0, 1, Channel::DeviceShare), (0, 1, Channel::IpShare)]
        );
    }
}
