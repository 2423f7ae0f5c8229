//! Ring-size difficulty sweep. Every condition trains the native
//! graph-aggregate baseline, so results are baseline-derived only.

use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::baselines::{score_all, train_graph_aggregate};
use crate::config::{GeneratorConfig, SizeRange};
use crate::error::Result;
use crate::generate::generate;
use crate::metrics::auc_roc;
use crate::rng::make_rng;
use crate::schema::{NodeType, RingType};
use crate::split::{split, Partition, DEFAULT_FRACTIONS};

pub const RING_SIZE_AXIS: [usize; 6] = [3, 5, 8, 12, 20, 30];

/// Fraud users budgeted across the three ring types per condition.
pub const FRAUD_USER_BUDGET: usize = 300;

/// Types with at most this many test rings get a warning.
pub const SMALL_TEST_RINGS: usize = 3;

pub const SWEEP_LABEL: &str = "baseline-derived (native graph-aggregate linear model)";

/// `max(2, floor(300 / (3 r)))`.
pub fn rings_per_type(ring_size: usize) -> usize {
    (FRAUD_USER_BUDGET / (3 * ring_size.max(1))).max(2)
}

/// `base` with every ring type pinned to `ring_size` members. Ghost hotel
/// counts and mule chains keep their configured ranges.
pub fn condition_config(base: &GeneratorConfig, ring_size: usize) -> GeneratorConfig {
    let n = rings_per_type(ring_size);
    let mut c = base.clone().with_rings(n, n, n);
    let fixed = SizeRange {
        min: ring_size,
        max: ring_size,
    };
    c.ring_sizes.ticketing = fixed;
    c.ring_sizes.ghost_reviewers = fixed;
    c.ring_sizes.ato_compromised = fixed;
    c.widen_bounds = true;
    c.fraud_rate_target = None;
    c
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub ring_size: usize,
    pub ring_type: RingType,
    pub n_rings: usize,
    pub test_rings: usize,
    /// AUC over test legit users plus this type's test fraud users;
    /// absent when the type has no test rings.
    pub test_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub label: String,
    pub rows: Vec<SweepRow>,
    pub warnings: Vec<String>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ring_size,ring_type,n_rings,test_rings,test_auc,source\n");
        for r in &self.rows {
            let auc = r.test_auc.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{auc},baseline",
                r.ring_size, r.ring_type, r.n_rings, r.test_rings
            );
        }
        out
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring-size sweep, {}", self.label)?;
        writeln!(f, "{:>4} {:<12} {:>7} {:>10} {:>8}", "r", "ring_type", "n_rings", "test_rings", "auc")?;
        for r in &self.rows {
            let auc = r.test_auc.map_or_else(|| "-".to_string(), |a| format!("{a:.4}"));
            writeln!(
                f,
                "{:>4} {:<12} {:>7} {:>10} {:>8}",
                r.ring_size,
                r.ring_type.as_str(),
                r.n_rings,
                r.test_rings,
                auc
            )?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

/// Runs one condition per ring size, in order.
pub fn run_sweep(base: &GeneratorConfig, sizes: &[usize]) -> Result<SweepReport> {
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &r in sizes {
        let config = condition_config(base, r);
        let out = generate(&config)?;
        let g = &out.graph;
        let assignment = split(g, &out.rings, DEFAULT_FRACTIONS, &mut make_rng(config.seed, "split"))?;
        let mut rng = make_rng(config.seed, &format!("sweep/{r}"));
        let model = train_graph_aggregate(g, &assignment, &mut rng)?;
        let scores = score_all(&model, g)?;
        let labels = g.user_labels();
        let ring_type_of = &g.table(NodeType::User).ring_type;
        for t in RingType::ALL {
            let test_rings = out
                .rings
                .iter()
                .filter(|ring| ring.ring_type == t)
                .filter(|ring| assignment.ring_partition(ring.ring_id) == Some(Partition::Test))
                .count();
            let (mut s, mut y) = (Vec::new(), Vec::new());
            for u in assignment.users_in(Partition::Test) {
                if labels[u] == 0 || ring_type_of[u] == t.code() {
                    s.push(scores.get(u).expect("every user is scored"));
                    y.push(labels[u] == 1);
                }
            }
            let test_auc = if test_rings > 0 { auc_roc(&s, &y).ok() } else { None };
            if test_rings <= SMALL_TEST_RINGS {
                warnings.push(format!(
                    "r={r}: only {test_rings} {t} ring(s) in the test partition; AUC is unstable"
                ));
            }
            rows.push(SweepRow {
                ring_size: r,
                ring_type: t,
                n_rings: config.ring_counts()[t.code() as usize - 1],
                test_rings,
                test_auc,
            });
        }
    }
    Ok(SweepReport {
        label: SWEEP_LABEL.to_string(),
        rows,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_count_formula() {
        let got: Vec<usize> = RING_SIZE_AXIS.iter().map(|&r| rings_per_type(r)).collect();
        assert_eq!(got, vec![33, 20, 12, 8, 5, 3]);
        assert_eq!(rings_per_type(200), 2);
    }

    #[test]
    fn condition_pins_sizes() {
        let base = GeneratorConfig::preset(crate::config::PresetName::Small, 1);
        let c = condition_config(&base, 30);
        assert_eq!(c.ring_counts(), [3, 3, 3]);
        assert_eq!(c.ring_sizes.ticketing, SizeRange { min: 30, max: 30 });
        assert_eq!(c.ring_sizes.ghost_hotels, base.ring_sizes.ghost_hotels);
        assert!(c.validate().is_ok());
    }
}
