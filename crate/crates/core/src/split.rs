//! Ring-stratified train/validation/test assignment and leakage checks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::rings::RingRecord;
use crate::rng::Stream;
use crate::schema::{NodeType, Relation, RingType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    Train,
    Val,
    Test,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Train, Partition::Val, Partition::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Val => "val",
            Partition::Test => "test",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Partition::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Data(format!("unknown partition '{s}'")))
    }
}

pub const DEFAULT_FRACTIONS: [f64; 3] = [0.6, 0.2, 0.2];

#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub fractions: [f64; 3],
    /// Indexed by user id.
    pub users: Vec<Partition>,
    /// `(ring_id, partition)` sorted by ring id.
    pub rings: Vec<(i64, Partition)>,
    /// Non-fatal notes, e.g. ring types too small to stratify.
    pub warnings: Vec<String>,
}

impl SplitAssignment {
    pub fn ring_partition(&self, ring_id: i64) -> Option<Partition> {
        self.rings
            .binary_search_by_key(&ring_id, |r| r.0)
            .ok()
            .map(|i| self.rings[i].1)
    }

    pub fn users_in(&self, p: Partition) -> impl Iterator<Item = usize> + '_ {
        self.users
            .iter()
            .enumerate()
            .filter(move |(_, q)| **q == p)
            .map(|(u, _)| u)
    }

    /// Rings whose members do not all sit in the ring's own partition.
    pub fn spanning_rings(&self, rings: &[RingRecord]) -> Vec<i64> {
        rings
            .iter()
            .filter(|r| {
                let own = self.ring_partition(r.ring_id);
                r.members.iter().any(|&u| Some(self.users[u]) != own)
            })
            .map(|r| r.ring_id)
            .collect()
    }
}

fn check_fractions(f: [f64; 3]) -> Result<()> {
    if f.iter().any(|&x| x.is_nan() || x <= 0.0) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "split fractions must be positive and sum to 1, got {f:?}"
        )));
    }
    Ok(())
}

/// Largest-remainder apportionment of `n` items. Equal remainders go to
/// test first, then validation, then train.
pub fn apportion(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact = fractions.map(|f| f * n as f64);
    // The epsilon keeps 0.6 * 30 from flooring to 17.
    let floor = |x: f64| (x + 1e-9).floor();
    let mut counts = exact.map(|x| floor(x) as usize);
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [2usize, 1, 0];
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - floor(exact[a]), exact[b] - floor(exact[b]));
        rb.total_cmp(&ra)
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

fn cut<T: Copy>(items: &[T], counts: [usize; 3]) -> Vec<(T, Partition)> {
    let mut out = Vec::with_capacity(items.len());
    let mut start = 0;
    for p in Partition::ALL {
        for &x in &items[start..start + counts[p.index()]] {
            out.push((x, p));
        }
        start += counts[p.index()];
    }
    out
}

/// Assigns whole rings per ring type and legit users independently.
pub fn split(
    graph: &GraphData,
    rings: &[RingRecord],
    fractions: [f64; 3],
    rng: &mut Stream,
) -> Result<SplitAssignment> {
    check_fractions(fractions)?;
    let users = graph.table(NodeType::User);
    let mut user_part: Vec<Option<Partition>> = vec![None; users.len()];
    let mut ring_part = Vec::with_capacity(rings.len());
    let mut warnings = Vec::new();

    for t in RingType::ALL {
        let mut ids: Vec<usize> = (0..rings.len()).filter(|&i| rings[i].ring_type == t).collect();
        if ids.is_empty() {
            continue;
        }
        if ids.len() < Partition::ALL.len() {
            warnings.push(format!(
                "only {} {t} ring(s); cannot place one in every partition",
                ids.len()
            ));
        }
        ids.shuffle(rng);
        for (i, p) in cut(&ids, apportion(ids.len(), fractions)) {
            ring_part.push((rings[i].ring_id, p));
            for &u in &rings[i].members {
                user_part[u] = Some(p);
            }
        }
    }
    ring_part.sort_unstable();

    let mut legit: Vec<usize> = (0..users.len()).filter(|&u| users.label[u] == 0).collect();
    legit.shuffle(rng);
    for (u, p) in cut(&legit, apportion(legit.len(), fractions)) {
        user_part[u] = Some(p);
    }

    let users = user_part
        .into_iter()
        .enumerate()
        .map(|(u, p)| p.ok_or_else(|| Error::Data(format!("fraud user {u} belongs to no ring"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(SplitAssignment {
        fractions,
        users,
        rings: ring_part,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LeakageReport {
    pub devices: usize,
    pub ips: usize,
}

impl LeakageReport {
    pub fn is_clean(&self) -> bool {
        self.devices == 0 && self.ips == 0
    }
}

/// Counts devices and IPs whose fraud-user neighbours fall in more than
/// one partition. Legit users never contribute.
pub fn verify_no_leakage(graph: &GraphData, assignment: &SplitAssignment) -> LeakageReport {
    let labels = graph.user_labels();
    let count = |r: Relation| {
        graph
            .in_adjacency(r)
            .iter()
            .filter(|users| {
                users
                    .iter()
                    .filter(|&&u| labels[u] == 1)
                    .map(|&u| assignment.users[u])
                    .collect::<BTreeSet<_>>()
                    .len()
                    > 1
            })
            .count()
    };
    LeakageReport {
        devices: count(Relation::UsesDevice),
        ips: count(Relation::UsesIp),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_ring_counts() {
        assert_eq!(apportion(10, DEFAULT_FRACTIONS), [6, 2, 2]);
        assert_eq!(apportion(30, DEFAULT_FRACTIONS), [18, 6, 6]);
    }

    #[test]
    fn remainder_ties_favour_test() {
        assert_eq!(apportion(54, DEFAULT_FRACTIONS), [32, 11, 11]);
        assert_eq!(apportion(52, DEFAULT_FRACTIONS), [31, 10, 11]);
        assert_eq!(apportion(1, DEFAULT_FRACTIONS), [1, 0, 0]);
        assert_eq!(apportion(2, DEFAULT_FRACTIONS), [1, 0, 1]);
    }

    #[test]
    fn apportion_sums() {
        for n in 0..200 {
            assert_eq!(apportion(n, [0.7, 0.1, 0.2]).iter().sum::<usize>(), n);
        }
    }

    #[test]
    fn bad_fractions_rejected() {
        assert!(check_fractions([0.5, 0.5, 0.0]).is_err());
        assert!(check_fractions([0.5, 0.3, 0.3]).is_err());
    }
}
