//! Homophily, fraud density, feature overlap and motif fingerprints.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::rings::RingRecord;
use crate::schema::{NodeType, Relation, RingType};

/// Overlap gate threshold on |Cohen's d|.
pub const D_LIMIT: f64 = 0.30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelationHomophily {
    pub relation: Relation,
    pub edges: usize,
    pub homophily: f64,
    pub fraud_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomophilyReport {
    /// One entry per analysed relation; `None` when it has no edges.
    pub rows: Vec<(Relation, Option<RelationHomophily>)>,
}

impl HomophilyReport {
    pub fn get(&self, r: Relation) -> Option<&RelationHomophily> {
        self.rows
            .iter()
            .find(|(rel, _)| *rel == r)
            .and_then(|(_, h)| h.as_ref())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("relation,edges,homophily,fraud_density\n");
        for (r, h) in &self.rows {
            match h {
                Some(h) => {
                    let _ = writeln!(out, "{r},{},{},{}", h.edges, h.homophily, h.fraud_density);
                }
                None => {
                    let _ = writeln!(out, "{r},0,,");
                }
            }
        }
        out
    }
}

impl fmt::Display for HomophilyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>9} {:>10} {:>10}", "relation", "edges", "h", "ff_dens")?;
        for (r, h) in &self.rows {
            match h {
                Some(h) => writeln!(
                    f,
                    "{:<16} {:>9} {:>10.4} {:>10.4}",
                    r.as_str(),
                    h.edges,
                    h.homophily,
                    h.fraud_density
                )?,
                None => writeln!(f, "{:<16} {:>9} {:>10} {:>10}", r.as_str(), 0, "-", "-")?,
            }
        }
        Ok(())
    }
}

/// Relations covered by the homophily table; `referred` is left out.
pub fn homophily_relations() -> Vec<Relation> {
    Relation::ALL
        .into_iter()
        .filter(|r| *r != Relation::Referred)
        .collect()
}

pub fn relation_homophily(graph: &GraphData, r: Relation) -> Option<RelationHomophily> {
    let edges = graph.edges(r);
    if edges.is_empty() {
        return None;
    }
    let (src, dst) = r.signature();
    let (a, b) = (graph.table(src), graph.table(dst));
    let mut same = 0usize;
    let mut both = 0usize;
    for &(s, d) in edges {
        let (ls, ld) = (a.derived_label(src, s), b.derived_label(dst, d));
        same += (ls == ld) as usize;
        both += (ls && ld) as usize;
    }
    let n = edges.len() as f64;
    Some(RelationHomophily {
        relation: r,
        edges: edges.len(),
        homophily: same as f64 / n,
        fraud_density: both as f64 / n,
    })
}

pub fn homophily(graph: &GraphData) -> HomophilyReport {
    HomophilyReport {
        rows: homophily_relations()
            .into_iter()
            .map(|r| (r, relation_homophily(graph, r)))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureOverlap {
    pub feature: String,
    pub mean_fraud: f64,
    pub mean_legit: f64,
    pub d: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationReport {
    pub features: Vec<FeatureOverlap>,
}

impl CalibrationReport {
    pub fn passed(&self) -> bool {
        self.features.iter().all(|f| f.pass)
    }

    /// Feature with the largest |d|.
    pub fn worst(&self) -> (String, f64) {
        self.features
            .iter()
            .max_by(|a, b| a.d.abs().total_cmp(&b.d.abs()))
            .map(|f| (f.feature.clone(), f.d))
            .unwrap_or_default()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("feature,mean_fraud,mean_legit,cohens_d,pass\n");
        for f in &self.features {
            let _ = writeln!(out, "{},{},{},{},{}", f.feature, f.mean_fraud, f.mean_legit, f.d, f.pass);
        }
        out
    }
}

impl fmt::Display for CalibrationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<22} {:>12} {:>12} {:>9} {:>5}", "feature", "fraud", "legit", "d", "ok")?;
        for r in &self.features {
            writeln!(
                f,
                "{:<22} {:>12.4} {:>12.4} {:>9.4} {:>5}",
                r.feature,
                r.mean_fraud,
                r.mean_legit,
                r.d,
                if r.pass { "yes" } else { "NO" }
            )?;
        }
        Ok(())
    }
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Standardised mean difference with pooled sample variance.
pub fn cohens_d_columns(fraud: &[f64], legit: &[f64]) -> Result<f64> {
    if fraud.is_empty() || legit.is_empty() {
        return Err(Error::Undefined("Cohen's d needs both classes non-empty".into()));
    }
    let (m1, v1) = mean_var(fraud);
    let (m0, v0) = mean_var(legit);
    let (n1, n0) = (fraud.len() as f64, legit.len() as f64);
    let dof = (n1 + n0 - 2.0).max(1.0);
    let pooled = (((n1 - 1.0) * v1 + (n0 - 1.0) * v0) / dof).sqrt();
    if pooled == 0.0 {
        return Ok(if m1 == m0 {
            0.0
        } else {
            f64::INFINITY.copysign(m1 - m0)
        });
    }
    Ok((m1 - m0) / pooled)
}

/// Per-column Cohen's d between fraud and legit users.
pub fn cohens_d(graph: &GraphData) -> Result<CalibrationReport> {
    let users = graph.table(NodeType::User);
    let mut features = Vec::with_capacity(users.width());
    for (j, name) in users.columns.iter().enumerate() {
        let mut fraud = Vec::new();
        let mut legit = Vec::new();
        for i in 0..users.len() {
            let v = users.features[i * users.width() + j];
            if users.label[i] == 1 {
                fraud.push(v);
            } else {
                legit.push(v);
            }
        }
        let d = cohens_d_columns(&fraud, &legit)?;
        features.push(FeatureOverlap {
            feature: name.clone(),
            mean_fraud: mean_var(&fraud).0,
            mean_legit: mean_var(&legit).0,
            d,
            pass: d.abs() < D_LIMIT,
        });
    }
    Ok(CalibrationReport { features })
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    pub fn of(xs: &[f64]) -> MeanSd {
        if xs.is_empty() {
            return MeanSd::default();
        }
        let (mean, var) = mean_var(xs);
        MeanSd {
            mean,
            sd: var.sqrt(),
            n: xs.len(),
        }
    }
}

impl fmt::Display for MeanSd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.sd)
    }
}

/// Per-ring statistics for one ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RingMotif {
    pub users_per_device: f64,
    pub users_per_ip: f64,
    /// Reviews written by members divided by distinct hotels they reviewed.
    pub reviews_per_hotel: f64,
    /// transferred_to edges inside the ring.
    pub chain_length: f64,
    /// Ring bookings per hour over the span of their timestamps (at least 1 h).
    pub booking_velocity: f64,
    pub chargeback_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeFingerprint {
    pub ring_type: RingType,
    pub rings: usize,
    pub users_per_device: MeanSd,
    pub users_per_ip: MeanSd,
    pub reviews_per_ghost_hotel: MeanSd,
    pub loyalty_chain_length: MeanSd,
    pub booking_velocity: MeanSd,
    pub chargeback_rate: MeanSd,
}

/// Legit-only reference rows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Baseline {
    /// Over legit devices.
    pub users_per_device: MeanSd,
    /// Over legit IPs.
    pub users_per_ip: MeanSd,
    /// Over legit hotels (in-degree of `about`).
    pub reviews_per_hotel: MeanSd,
    /// Pooled legit booking rate; `sd` is its binomial standard error.
    pub chargeback_rate: MeanSd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MotifFingerprint {
    pub types: Vec<TypeFingerprint>,
    pub baseline: Baseline,
}

impl MotifFingerprint {
    pub fn get(&self, t: RingType) -> Option<&TypeFingerprint> {
        self.types.iter().find(|f| f.ring_type == t)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,statistic,mean,sd,n\n");
        for t in &self.types {
            for (name, v) in [
                ("users_per_device", t.users_per_device),
                ("users_per_ip", t.users_per_ip),
                ("reviews_per_ghost_hotel", t.reviews_per_ghost_hotel),
                ("loyalty_chain_length", t.loyalty_chain_length),
                ("booking_velocity", t.booking_velocity),
                ("chargeback_rate", t.chargeback_rate),
            ] {
                let _ = writeln!(out, "{},{name},{},{},{}", t.ring_type, v.mean, v.sd, v.n);
            }
        }
        let b = &self.baseline;
        for (name, v) in [
            ("users_per_device", b.users_per_device),
            ("users_per_ip", b.users_per_ip),
            ("reviews_per_hotel", b.reviews_per_hotel),
            ("chargeback_rate", b.chargeback_rate),
        ] {
            let _ = writeln!(out, "legit,{name},{},{},{}", v.mean, v.sd, v.n);
        }
        out
    }
}

impl fmt::Display for MotifFingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<26}", "statistic")?;
        for t in &self.types {
            write!(f, " {:>18}", format!("{} ({})", t.ring_type, t.rings))?;
        }
        writeln!(f)?;
        type Pick = fn(&TypeFingerprint) -> MeanSd;
        let rows: [(&str, Pick); 6] = [
            ("users/device", |t| t.users_per_device),
            ("users/ip", |t| t.users_per_ip),
            ("reviews/ghost hotel", |t| t.reviews_per_ghost_hotel),
            ("loyalty chain length", |t| t.loyalty_chain_length),
            ("booking velocity (bk/hr)", |t| t.booking_velocity),
            ("chargeback rate", |t| t.chargeback_rate),
        ];
        for (name, pick) in rows {
            write!(f, "{name:<26}")?;
            for t in &self.types {
                write!(f, " {:>18}", pick(t).to_string())?;
            }
            writeln!(f)?;
        }
        let b = &self.baseline;
        writeln!(f, "legit users/device        {}", b.users_per_device)?;
        writeln!(f, "legit users/ip            {}", b.users_per_ip)?;
        writeln!(f, "legit reviews/hotel       {}", b.reviews_per_hotel)?;
        writeln!(f, "legit chargeback rate     {:.4} ± {:.4}", b.chargeback_rate.mean, b.chargeback_rate.sd)
    }
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in xs {
        s += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

pub fn ring_motif(graph: &GraphData, ring: &RingRecord) -> RingMotif {
    let dev_users = graph.in_adjacency(Relation::UsesDevice);
    let ip_users = graph.in_adjacency(Relation::UsesIp);
    ring_motif_with(graph, ring, &dev_users, &ip_users)
}

fn ring_motif_with(
    graph: &GraphData,
    ring: &RingRecord,
    dev_users: &[Vec<usize>],
    ip_users: &[Vec<usize>],
) -> RingMotif {
    let bookings = graph.table(NodeType::Booking);
    let review_hotel: std::collections::HashMap<usize, usize> =
        graph.edges(Relation::About).iter().copied().collect();
    let hotels: BTreeSet<usize> = ring
        .reviews
        .iter()
        .filter_map(|r| review_hotel.get(r).copied())
        .collect();
    let reviews_per_hotel = if hotels.is_empty() {
        0.0
    } else {
        ring.reviews.len() as f64 / hotels.len() as f64
    };
    let loyalty = graph.table(NodeType::LoyaltyAccount);
    let chain = graph
        .edges(Relation::TransferredTo)
        .iter()
        .filter(|(s, d)| loyalty.ring_id[*s] == ring.ring_id && loyalty.ring_id[*d] == ring.ring_id)
        .count();
    let days: Vec<f64> = ring.bookings.iter().map(|&b| bookings.get(b, "booked_at_day")).collect();
    let span_hours = if days.is_empty() {
        1.0
    } else {
        let lo = days.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = days.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        ((hi - lo) * 24.0).max(1.0)
    };
    RingMotif {
        users_per_device: mean_of(ring.devices.iter().map(|&d| dev_users[d].len() as f64)),
        users_per_ip: mean_of(ring.ips.iter().map(|&i| ip_users[i].len() as f64)),
        reviews_per_hotel,
        chain_length: chain as f64,
        booking_velocity: ring.bookings.len() as f64 / span_hours,
        chargeback_rate: mean_of(
            ring.bookings
                .iter()
                .map(|&b| bookings.get(b, "chargeback_flag")),
        ),
    }
}

pub fn motif_fingerprints(graph: &GraphData, rings: &[RingRecord]) -> MotifFingerprint {
    let dev_users = graph.in_adjacency(Relation::UsesDevice);
    let ip_users = graph.in_adjacency(Relation::UsesIp);
    let mut types = Vec::new();
    for t in RingType::ALL {
        let motifs: Vec<RingMotif> = rings
            .iter()
            .filter(|r| r.ring_type == t)
            .map(|r| ring_motif_with(graph, r, &dev_users, &ip_users))
            .collect();
        if motifs.is_empty() {
            continue;
        }
        let col = |f: fn(&RingMotif) -> f64| MeanSd::of(&motifs.iter().map(f).collect::<Vec<_>>());
        types.push(TypeFingerprint {
            ring_type: t,
            rings: motifs.len(),
            users_per_device: col(|m| m.users_per_device),
            users_per_ip: col(|m| m.users_per_ip),
            reviews_per_ghost_hotel: col(|m| m.reviews_per_hotel),
            loyalty_chain_length: col(|m| m.chain_length),
            booking_velocity: col(|m| m.booking_velocity),
            chargeback_rate: col(|m| m.chargeback_rate),
        });
    }

    let legit_hub = |t: NodeType, users: &[Vec<usize>]| {
        let table = graph.table(t);
        let xs: Vec<f64> = (0..table.len())
            .filter(|&i| table.ring_id[i] < 0)
            .map(|i| users[i].len() as f64)
            .collect();
        MeanSd::of(&xs)
    };
    let hotels = graph.table(NodeType::Hotel);
    let about = graph.in_adjacency(Relation::About);
    let legit_reviews: Vec<f64> = (0..hotels.len())
        .filter(|&h| hotels.label[h] == 0)
        .map(|h| about[h].len() as f64)
        .collect();
    let bookings = graph.table(NodeType::Booking);
    let cb: Vec<f64> = (0..bookings.len())
        .filter(|&b| bookings.label[b] == 0)
        .map(|b| bookings.get(b, "chargeback_flag"))
        .collect();
    let p = mean_of(cb.iter().copied());
    let chargeback_rate = MeanSd {
        mean: p,
        sd: if cb.is_empty() {
            0.0
        } else {
            (p * (1.0 - p) / cb.len() as f64).sqrt()
        },
        n: cb.len(),
    };
    MotifFingerprint {
        types,
        baseline: Baseline {
            users_per_device: legit_hub(NodeType::Device, &dev_users),
            users_per_ip: legit_hub(NodeType::IpAddress, &ip_users),
            reviews_per_hotel: MeanSd::of(&legit_reviews),
            chargeback_rate,
        },
    }
}

/// A device or IP whose users break ring isolation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsolationBreach {
    pub hub_type: NodeType,
    pub hub: usize,
}

/// Scans device and IP hubs: any hub touching a fraud user must touch
/// only users of that ring, and carry the ring's id itself.
pub fn isolation_breaches(graph: &GraphData) -> Vec<IsolationBreach> {
    let users = graph.table(NodeType::User);
    let mut out = Vec::new();
    for (rel, hub_type) in [
        (Relation::UsesDevice, NodeType::Device),
        (Relation::UsesIp, NodeType::IpAddress),
    ] {
        let hubs = graph.table(hub_type);
        for (hub, members) in graph.in_adjacency(rel).iter().enumerate() {
            let rings: BTreeSet<i64> = members.iter().map(|&u| users.ring_id[u]).collect();
            let touches_fraud = members.iter().any(|&u| users.label[u] == 1);
            let ok = !touches_fraud
                || (rings.len() == 1 && rings.first() == Some(&hubs.ring_id[hub]) && hubs.ring_id[hub] >= 0);
            if !ok {
                out.push(IsolationBreach { hub_type, hub });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_of_identical_columns_is_zero() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(cohens_d_columns(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn d_of_unit_shift_with_unit_sd() {
        // Both samples have variance 1 (n-1 denominator).
        let legit = [-1.0, 0.0, 1.0];
        let fraud = [0.0, 1.0, 2.0];
        assert!((cohens_d_columns(&fraud, &legit).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn d_with_zero_spread() {
        assert_eq!(cohens_d_columns(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(cohens_d_columns(&[2.0, 2.0], &[1.0, 1.0]).unwrap().is_infinite());
        assert!(cohens_d_columns(&[], &[1.0]).is_err());
    }

    #[test]
    fn half_homophily() {
        let mut g = GraphData::new();
        g.table_mut(NodeType::User).push(&[0.0; 10], 0, -1, 0);
        g.table_mut(NodeType::User).push(&[0.0; 10], 1, 0, 1);
        g.table_mut(NodeType::Booking).push(&[0.0; 9], 1, 0, 1);
        g.add_edge(Relation::Made, 1, 0);
        g.add_edge(Relation::Made, 0, 0);
        let h = relation_homophily(&g, Relation::Made).unwrap();
        assert_eq!(h.homophily, 0.5);
        assert_eq!(h.fraud_density, 0.5);
        assert!(relation_homophily(&g, Relation::About).is_none());
    }

    #[test]
    fn mean_sd_of_constant() {
        let m = MeanSd::of(&[2.0, 2.0, 2.0]);
        assert_eq!((m.mean, m.sd, m.n), (2.0, 0.0, 3));
    }
}
