//! Class-weighted logistic regression on user features, with and without
//! neighbour aggregates from the projected user graph.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::rings::RingRecord;
use crate::metrics::{evaluate, MetricsReport, ScoreSet};
use crate::projection::{project_user_graph, Channel};
use crate::rng::Stream;
use crate::schema::NodeType;
use crate::split::{Partition, SplitAssignment};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams {
            learning_rate: 0.5,
            epochs: 500,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSet {
    Tabular,
    GraphAggregate,
}

impl FeatureSet {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Tabular => "tabular",
            FeatureSet::GraphAggregate => "graph_aggregate",
        }
    }
}

impl std::str::FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tabular" => Ok(FeatureSet::Tabular),
            "graph_aggregate" | "graph" => Ok(FeatureSet::GraphAggregate),
            _ => Err(Error::Config(format!(
                "unknown baseline '{s}' (expected tabular or graph_aggregate)"
            ))),
        }
    }
}

/// Row-major feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub columns: Vec<String>,
    pub rows: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.data[i * w..(i + 1) * w]
    }
}

pub fn tabular_features(graph: &GraphData) -> Design {
    let users = graph.table(NodeType::User);
    Design {
        columns: users.columns.clone(),
        rows: users.len(),
        data: users.features.clone(),
    }
}

/// User features, then the neighbour count per channel, then the mean
/// feature vector over the union of device and IP neighbours (zeros for
/// users with no neighbours).
pub fn graph_aggregate_features(graph: &GraphData) -> Design {
    let base = tabular_features(graph);
    let d = base.width();
    let projected = project_user_graph(graph);
    let [dev, ip] = projected.neighbours();
    let mut columns = base.columns.clone();
    for c in Channel::ALL {
        columns.push(format!("n_{}", channel_name(c)));
    }
    for c in &base.columns {
        columns.push(format!("nbr_mean_{c}"));
    }
    let width = columns.len();
    let mut data = Vec::with_capacity(base.rows * width);
    let mut union = Vec::new();
    for u in 0..base.rows {
        data.extend_from_slice(base.row(u));
        data.push(dev[u].len() as f64);
        data.push(ip[u].len() as f64);
        union.clear();
        union.extend_from_slice(&dev[u]);
        union.extend_from_slice(&ip[u]);
        union.sort_unstable();
        union.dedup();
        let mut mean = vec![0.0; d];
        if !union.is_empty() {
            for &v in &union {
                for (m, x) in mean.iter_mut().zip(base.row(v)) {
                    *m += x;
                }
            }
            let n = union.len() as f64;
            mean.iter_mut().for_each(|m| *m /= n);
        }
        data.extend_from_slice(&mean);
    }
    Design {
        columns,
        rows: base.rows,
        data,
    }
}

fn channel_name(c: Channel) -> &'static str {
    match c {
        Channel::DeviceShare => "device_share",
        Channel::IpShare => "ip_share",
    }
}

pub fn design_for(graph: &GraphData, set: FeatureSet) -> Design {
    match set {
        FeatureSet::Tabular => tabular_features(graph),
        FeatureSet::GraphAggregate => graph_aggregate_features(graph),
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Weighted mean binary cross-entropy plus `l2/2 * |w|^2`, and its gradient
/// with respect to `(w, b)`. `x` is row-major with `w.len()` columns.
pub fn loss_and_gradient(
    w: &[f64],
    b: f64,
    x: &[f64],
    y: &[bool],
    sample_weight: &[f64],
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let d = w.len();
    let total_w: f64 = sample_weight.iter().sum();
    let mut loss = 0.0;
    let mut gw = vec![0.0; d];
    let mut gb = 0.0;
    for (i, (&yi, &si)) in y.iter().zip(sample_weight).enumerate() {
        let row = &x[i * d..(i + 1) * d];
        let z = b + row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        let t = if yi { 1.0 } else { 0.0 };
        // log(1 + e^z) - t z, computed stably.
        let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
        loss += si * (softplus - t * z);
        let r = si * (sigmoid(z) - t);
        for (g, a) in gw.iter_mut().zip(row) {
            *g += r * a;
        }
        gb += r;
    }
    loss /= total_w;
    gw.iter_mut().for_each(|g| *g /= total_w);
    gb /= total_w;
    loss += 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (g, v) in gw.iter_mut().zip(w) {
        *g += l2 * v;
    }
    (loss, gw, gb)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearModel {
    pub feature_set: FeatureSet,
    pub columns: Vec<String>,
    /// Weights on standardised features.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub params: TrainParams,
    pub class_weights: [f64; 2],
}

impl LinearModel {
    pub fn score_row(&self, row: &[f64]) -> f64 {
        let z = self.bias
            + row
                .iter()
                .zip(&self.weights)
                .zip(self.mean.iter().zip(&self.scale))
                .map(|((x, w), (m, s))| w * (x - m) / s)
                .sum::<f64>();
        sigmoid(z)
    }
}

/// Fits on the given rows of `design`. Features are standardised with the
/// statistics of those rows; classes are weighted by inverse frequency.
pub fn fit(
    design: &Design,
    rows: &[usize],
    labels: &[bool],
    feature_set: FeatureSet,
    params: TrainParams,
    rng: &mut Stream,
) -> Result<LinearModel> {
    let d = design.width();
    let n = rows.len();
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == n {
        return Err(Error::Undefined("training data must contain both classes".into()));
    }
    let mut mean = vec![0.0; d];
    for &r in rows {
        for (m, x) in mean.iter_mut().zip(design.row(r)) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut scale = vec![0.0; d];
    for &r in rows {
        for ((s, x), m) in scale.iter_mut().zip(design.row(r)).zip(&mean) {
            *s += (x - m) * (x - m);
        }
    }
    for s in scale.iter_mut() {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut x = Vec::with_capacity(n * d);
    for &r in rows {
        for ((v, m), s) in design.row(r).iter().zip(&mean).zip(&scale) {
            x.push((v - m) / s);
        }
    }
    let class_weights = [
        n as f64 / (2.0 * (n - pos) as f64),
        n as f64 / (2.0 * pos as f64),
    ];
    let sample_weight: Vec<f64> = labels.iter().map(|&l| class_weights[l as usize]).collect();

    let init = Normal::new(0.0, 0.01).expect("valid sd");
    let mut w: Vec<f64> = (0..d).map(|_| init.sample(rng)).collect();
    let mut b = rng.random_range(-0.01..0.01);
    for _ in 0..params.epochs {
        let (_, gw, gb) = loss_and_gradient(&w, b, &x, labels, &sample_weight, params.l2);
        for (wi, gi) in w.iter_mut().zip(&gw) {
            *wi -= params.learning_rate * gi;
        }
        b -= params.learning_rate * gb;
    }
    if w.iter().any(|v| !v.is_finite()) || !b.is_finite() {
        return Err(Error::Undefined("training diverged".into()));
    }
    Ok(LinearModel {
        feature_set,
        columns: design.columns.clone(),
        weights: w,
        bias: b,
        mean,
        scale,
        params,
        class_weights,
    })
}

fn train(
    graph: &GraphData,
    assignment: &SplitAssignment,
    set: FeatureSet,
    params: TrainParams,
    rng: &mut Stream,
) -> Result<LinearModel> {
    let design = design_for(graph, set);
    let rows: Vec<usize> = assignment.users_in(Partition::Train).collect();
    let labels = graph.user_labels();
    let y: Vec<bool> = rows.iter().map(|&u| labels[u] == 1).collect();
    fit(&design, &rows, &y, set, params, rng)
}

pub fn train_tabular(graph: &GraphData, assignment: &SplitAssignment, rng: &mut Stream) -> Result<LinearModel> {
    train(graph, assignment, FeatureSet::Tabular, TrainParams::default(), rng)
}

pub fn train_graph_aggregate(
    graph: &GraphData,
    assignment: &SplitAssignment,
    rng: &mut Stream,
) -> Result<LinearModel> {
    train(graph, assignment, FeatureSet::GraphAggregate, TrainParams::default(), rng)
}

/// Scores the given users. The graph's user columns must match training.
pub fn predict(model: &LinearModel, graph: &GraphData, users: &[usize]) -> Result<Vec<(usize, f64)>> {
    let design = design_for(graph, model.feature_set);
    if design.columns != model.columns {
        return Err(Error::Validation(format!(
            "model expects {} feature columns, graph provides {}",
            model.columns.len(),
            design.width()
        )));
    }
    users
        .iter()
        .map(|&u| {
            if u >= design.rows {
                return Err(Error::Data(format!("user {u} out of range")));
            }
            Ok((u, model.score_row(design.row(u))))
        })
        .collect()
}

/// Scores for every user.
pub fn score_all(model: &LinearModel, graph: &GraphData) -> Result<ScoreSet> {
    let all: Vec<usize> = (0..graph.count(NodeType::User)).collect();
    ScoreSet::from_pairs(predict(model, graph, &all)?)
}

#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub model: LinearModel,
    pub scores: ScoreSet,
    pub report: MetricsReport,
}

/// Trains on the train partition, scores every user and evaluates on test.
pub fn run_baseline(
    graph: &GraphData,
    rings: &[RingRecord],
    assignment: &SplitAssignment,
    set: FeatureSet,
    rng: &mut Stream,
) -> Result<BaselineRun> {
    let model = train(graph, assignment, set, TrainParams::default(), rng)?;
    let scores = score_all(&model, graph)?;
    let report = evaluate(graph.user_labels(), rings, assignment, &scores)?;
    Ok(BaselineRun {
        model,
        scores,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::make_rng;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn separable_data_fits_perfectly() {
        let design = Design {
            columns: vec!["a".into(), "b".into()],
            rows: 40,
            data: (0..40)
                .flat_map(|i| [if i < 20 { -1.0 } else { 1.0 } + (i % 5) as f64 * 0.01, (i % 3) as f64])
                .collect(),
        };
        let rows: Vec<usize> = (0..40).collect();
        let y: Vec<bool> = rows.iter().map(|&i| i >= 20).collect();
        let mut rng = make_rng(1, "fit");
        let m = fit(&design, &rows, &y, FeatureSet::Tabular, TrainParams::default(), &mut rng).unwrap();
        let correct = rows
            .iter()
            .filter(|&&r| (m.score_row(design.row(r)) > 0.5) == y[r])
            .count();
        assert_eq!(correct, 40);
    }

    #[test]
    fn zero_weights_give_logistic_bias() {
        let m = LinearModel {
            feature_set: FeatureSet::Tabular,
            columns: vec!["a".into()],
            weights: vec![0.0],
            bias: 0.3,
            mean: vec![0.0],
            scale: vec![1.0],
            params: TrainParams::default(),
            class_weights: [1.0, 1.0],
        };
        let expected = 1.0 / (1.0 + (-0.3f64).exp());
        assert!((m.score_row(&[5.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn single_class_rejected() {
        let design = Design {
            columns: vec!["a".into()],
            rows: 3,
            data: vec![0.0, 1.0, 2.0],
        };
        let mut rng = make_rng(1, "fit");
        let r = fit(&design, &[0, 1, 2], &[true; 3], FeatureSet::Tabular, TrainParams::default(), &mut rng);
        assert!(r.is_err());
    }
}
