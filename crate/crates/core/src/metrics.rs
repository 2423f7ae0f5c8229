//! Ranking metrics, validation-tuned F1, ring recovery and Wilson intervals.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rings::RingRecord;
use crate::schema::RingType;
use crate::split::{Partition, SplitAssignment};

/// Score threshold for counting a ring member as caught (strict `>`).
pub const MEMBER_THRESHOLD: f64 = 0.5;
/// Fraction of members that must be caught (inclusive `>=`).
pub const RECOVERY_FRACTION: f64 = 0.80;
pub const WILSON_CONFIDENCE: f64 = 0.90;

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

fn check_lengths(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Data(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::Data(format!("non-finite score {bad}")));
    }
    Ok(())
}

/// Area under the ROC curve via the Mann-Whitney statistic with average
/// ranks for ties.
pub fn auc_roc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their average.
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] {
                rank_sum_pos += avg;
            }
        }
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision: mean of precision at the rank of each positive.
/// Rows are ranked by score descending, ties by ascending index.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let (pos, _) = class_counts(labels);
    if pos == 0 {
        return Err(Error::Undefined("average precision needs a positive".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut hits = 0usize;
    let mut total = 0.0;
    for (rank, &k) in order.iter().enumerate() {
        if labels[k] {
            hits += 1;
            total += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(total / pos as f64)
}

fn f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

fn confusion(scores: &[f64], labels: &[bool], t: f64) -> (usize, usize, usize, usize) {
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= t, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    (tp, fp, tn, fn_)
}

/// Mean of the positive-class and negative-class F1 at threshold `t`
/// (predict positive iff score >= t).
pub fn macro_f1(scores: &[f64], labels: &[bool], t: f64) -> f64 {
    let (tp, fp, tn, fn_) = confusion(scores, labels, t);
    (f1(tp, fp, fn_) + f1(tn, fn_, fp)) / 2.0
}

/// Picks the validation score maximising positive-class F1 (ties go to the
/// lower threshold) and reports test macro-F1 there. Returns `(f1, t)`.
pub fn macro_f1_at_val_threshold(
    val_scores: &[f64],
    val_labels: &[bool],
    test_scores: &[f64],
    test_labels: &[bool],
) -> Result<(f64, f64)> {
    check_lengths(val_scores, val_labels)?;
    check_lengths(test_scores, test_labels)?;
    let (pos, neg) = class_counts(val_labels);
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined("threshold selection needs both classes in validation".into()));
    }
    if test_scores.is_empty() {
        return Err(Error::Undefined("no test rows".into()));
    }
    let mut candidates = val_scores.to_vec();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for &t in &candidates {
        let (tp, fp, _, fn_) = confusion(val_scores, val_labels, t);
        let score = f1(tp, fp, fn_);
        if score > best.0 {
            best = (score, t);
        }
    }
    Ok((macro_f1(test_scores, test_labels, best.1), best.1))
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, confidence: f64) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Undefined("Wilson interval needs at least one trial".into()));
    }
    if successes > trials {
        return Err(Error::Data(format!("{successes} successes out of {trials} trials")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Config(format!("confidence must lie in (0, 1), got {confidence}")));
    }
    let z = Normal::standard().inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// Whether a ring counts as recovered given its members' scores.
pub fn ring_recovered(member_scores: &[f64]) -> bool {
    if member_scores.is_empty() {
        return false;
    }
    let caught = member_scores.iter().filter(|&&s| s > MEMBER_THRESHOLD).count();
    caught as f64 >= RECOVERY_FRACTION * member_scores.len() as f64
}

/// Scores keyed by user id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSet {
    pub scores: BTreeMap<usize, f64>,
}

impl ScoreSet {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut scores = BTreeMap::new();
        for (u, s) in pairs {
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(Error::Data(format!("user {u}: score {s} outside [0, 1]")));
            }
            if scores.insert(u, s).is_some() {
                return Err(Error::Data(format!("user {u} scored twice")));
            }
        }
        Ok(ScoreSet { scores })
    }

    pub fn get(&self, user: usize) -> Option<f64> {
        self.scores.get(&user).copied()
    }

    /// Parses `user_id<TAB>score` lines. A first line whose id is not an
    /// integer is taken as a header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            let (id, score) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), None) => (a.trim(), b.trim()),
                _ => {
                    return Err(Error::Data(format!(
                        "score line {}: expected 'user_id<TAB>score'",
                        i + 1
                    )))
                }
            };
            let Ok(user) = id.parse::<usize>() else {
                if i == 0 {
                    continue;
                }
                return Err(Error::Data(format!("score line {}: bad user id '{id}'", i + 1)));
            };
            let value: f64 = score
                .parse()
                .map_err(|_| Error::Data(format!("score line {}: bad score '{score}'", i + 1)))?;
            pairs.push((user, value));
        }
        ScoreSet::from_pairs(pairs)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ScoreSet::parse(&text)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("user_id\tscore\n");
        for (u, s) in &self.scores {
            let _ = writeln!(out, "{u}\t{s}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryRow {
    pub ring_type: RingType,
    pub recovered: usize,
    pub total: usize,
    pub fraction: f64,
    /// Wilson interval at [`WILSON_CONFIDENCE`]; absent when `total` is 0.
    pub interval: Option<(f64, f64)>,
}

/// Recovery of the rings assigned to `partition`, per ring type.
pub fn ring_recovery(
    scores: &ScoreSet,
    rings: &[RingRecord],
    assignment: &SplitAssignment,
    partition: Partition,
) -> Result<Vec<RecoveryRow>> {
    let mut rows = Vec::new();
    for t in RingType::ALL {
        let (mut recovered, mut total) = (0usize, 0usize);
        for ring in rings.iter().filter(|r| r.ring_type == t) {
            if assignment.ring_partition(ring.ring_id) != Some(partition) {
                continue;
            }
            let member_scores = ring
                .members
                .iter()
                .map(|&u| {
                    scores.get(u).ok_or_else(|| {
                        Error::Data(format!("ring {} member user {u} has no score", ring.ring_id))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            total += 1;
            recovered += ring_recovered(&member_scores) as usize;
        }
        let interval = if total > 0 {
            Some(wilson_interval(recovered as u64, total as u64, WILSON_CONFIDENCE)?)
        } else {
            None
        };
        rows.push(RecoveryRow {
            ring_type: t,
            recovered,
            total,
            fraction: if total > 0 { recovered as f64 / total as f64 } else { 0.0 },
            interval,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub auc_roc: f64,
    pub average_precision: f64,
    pub macro_f1: f64,
    pub threshold: f64,
    pub recovery: Vec<RecoveryRow>,
}

impl MetricsReport {
    pub fn recovery_for(&self, t: RingType) -> Option<&RecoveryRow> {
        self.recovery.iter().find(|r| r.ring_type == t)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        let _ = writeln!(out, "auc_roc,{}", self.auc_roc);
        let _ = writeln!(out, "average_precision,{}", self.average_precision);
        let _ = writeln!(out, "macro_f1,{}", self.macro_f1);
        let _ = writeln!(out, "threshold,{}", self.threshold);
        out.push_str("\nring_type,recovered,total,fraction,wilson_lo,wilson_hi\n");
        for r in &self.recovery {
            let (lo, hi) = r
                .interval
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{lo},{hi}", r.ring_type, r.recovered, r.total, r.fraction);
        }
        out
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "auc_roc            {:.4}", self.auc_roc)?;
        writeln!(f, "average_precision  {:.4}", self.average_precision)?;
        writeln!(f, "macro_f1           {:.4}  (threshold {:.4})", self.macro_f1, self.threshold)?;
        writeln!(f)?;
        writeln!(f, "{:<12} {:>9} {:>6} {:>8}   wilson 90%", "ring_type", "recovered", "total", "frac")?;
        for r in &self.recovery {
            let ci = r
                .interval
                .map(|(lo, hi)| format!("[{lo:.3}, {hi:.3}]"))
                .unwrap_or_else(|| "-".into());
            writeln!(
                f,
                "{:<12} {:>9} {:>6} {:>8.3}   {ci}",
                r.ring_type.as_str(),
                r.recovered,
                r.total,
                r.fraction
            )?;
        }
        Ok(())
    }
}

/// Task 1 and Task 2 metrics for a score set. Validation rows pick the F1
/// threshold; everything else is reported on test rows.
pub fn evaluate(
    labels: &[u8],
    rings: &[RingRecord],
    assignment: &SplitAssignment,
    scores: &ScoreSet,
) -> Result<MetricsReport> {
    let collect = |p: Partition| -> Result<(Vec<f64>, Vec<bool>)> {
        let mut s = Vec::new();
        let mut y = Vec::new();
        for u in assignment.users_in(p) {
            let v = scores
                .get(u)
                .ok_or_else(|| Error::Data(format!("{p} user {u} has no score")))?;
            s.push(v);
            y.push(labels[u] == 1);
        }
        Ok((s, y))
    };
    let (val_s, val_y) = collect(Partition::Val)?;
    let (test_s, test_y) = collect(Partition::Test)?;
    let (macro_f1, threshold) = macro_f1_at_val_threshold(&val_s, &val_y, &test_s, &test_y)?;
    Ok(MetricsReport {
        auc_roc: auc_roc(&test_s, &test_y)?,
        average_precision: average_precision(&test_s, &test_y)?,
        macro_f1,
        threshold,
        recovery: ring_recovery(scores, rings, assignment, Partition::Test)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_inverted_auc() {
        let s = [0.9, 0.8, 0.1, 0.2];
        let y = [true, true, false, false];
        assert_eq!(auc_roc(&s, &y).unwrap(), 1.0);
        let inv: Vec<bool> = y.iter().map(|b| !b).collect();
        assert_eq!(auc_roc(&s, &inv).unwrap(), 0.0);
    }

    #[test]
    fn all_tied_auc_is_half() {
        assert_eq!(auc_roc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_auc_errors() {
        assert!(auc_roc(&[0.1, 0.2], &[true, true]).is_err());
    }

    #[test]
    fn ap_closed_forms() {
        assert_eq!(average_precision(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
        // Single positive at rank 4 of 5.
        let s = [0.9, 0.8, 0.7, 0.6, 0.5];
        let y = [false, false, false, true, false];
        assert_eq!(average_precision(&s, &y).unwrap(), 0.25);
        assert!(average_precision(&s, &[false; 5]).is_err());
    }

    #[test]
    fn ap_ties_resolve_by_index() {
        // Tied scores: the positive at index 1 ranks second.
        assert_eq!(average_precision(&[0.5, 0.5], &[false, true]).unwrap(), 0.5);
    }

    #[test]
    fn separated_sets_give_unit_f1() {
        let vs = [0.9, 0.8, 0.2, 0.1];
        let vy = [true, true, false, false];
        let (f, t) = macro_f1_at_val_threshold(&vs, &vy, &vs, &vy).unwrap();
        assert_eq!(f, 1.0);
        assert_eq!(t, 0.8);
    }

    #[test]
    fn constant_scores_label_everything_positive() {
        let vy = [true, false, false];
        let ty = [true, false, false, false];
        let (f, t) = macro_f1_at_val_threshold(&[0.4; 3], &vy, &[0.4; 4], &ty).unwrap();
        assert_eq!(t, 0.4);
        // Positive F1 = 2/5, negative F1 = 0.
        assert!((f - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wilson_closed_forms() {
        // z = 1.6448536269514722 at 90%; values from the closed form.
        let (lo, hi) = wilson_interval(1, 6, 0.90).unwrap();
        assert!((lo - 0.038_106).abs() < 1e-5, "{lo}");
        assert!((hi - 0.502_417).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson_interval(6, 6, 0.90).unwrap();
        assert!((lo - 0.689_216).abs() < 1e-5, "{lo}");
        assert!((hi - 1.0).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, 0.90).unwrap();
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 1, 0.90).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi < 1.0);
        assert!(wilson_interval(0, 0, 0.90).is_err());
        assert!(wilson_interval(3, 2, 0.90).is_err());
    }

    #[test]
    fn recovery_boundary_is_inclusive() {
        assert!(ring_recovered(&[0.9, 0.9, 0.9, 0.9, 0.1]));
        assert!(!ring_recovered(&[0.9, 0.9, 0.9, 0.1, 0.1]));
        // Exactly 0.5 is not above the threshold.
        assert!(!ring_recovered(&[0.5; 5]));
    }

    #[test]
    fn score_file_parsing() {
        let s = ScoreSet::parse("user_id\tscore\n0\t0.25\n3\t1\n").unwrap();
        assert_eq!(s.get(3), Some(1.0));
        assert_eq!(s.scores.len(), 2);
        assert!(ScoreSet::parse("0\t0.1\n0\t0.2\n").is_err());
        assert!(ScoreSet::parse("0\t1.5\n").is_err());
        assert!(ScoreSet::parse("0\tNaN\n").is_err());
        assert!(ScoreSet::parse("0\t0.1\nx\t0.2\n").is_err());
        let round = ScoreSet::parse(&s.to_tsv()).unwrap();
        assert_eq!(round, s);
    }
}
