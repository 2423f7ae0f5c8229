//! End-to-end generation: legit population, ring injection, derived
//! features, the feature-overlap gate and configured exclusions.

use crate::config::GeneratorConfig;
use crate::error::{Error, Result};
use crate::graph::GraphData;
use crate::legit::{finalize, generate_legit_population, Samplers};
use crate::rings::{plan_rings, Injector, RingRecord};
use crate::rng::make_rng;
use crate::schema::NodeType;
use crate::stats::{cohens_d, CalibrationReport};

/// Shift multipliers tried in order when the overlap gate fails.
pub const BACKOFF: [f64; 3] = [1.0, 0.5, 0.25];

/// The gate is only enforced when both user classes have at least this
/// many rows and every ring type has at least `GATE_MIN_RINGS` rings.
pub const GATE_MIN_CLASS: usize = 300;

/// Device and IP counts are shared ring-wide, so with few rings d is
/// dominated by a handful of draws.
pub const GATE_MIN_RINGS: usize = 15;

#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: GraphData,
    pub rings: Vec<RingRecord>,
    /// Shift multiplier that passed the gate.
    pub shift: f64,
    /// Overlap report on the full 10-column user table, when computable.
    pub calibration: Option<CalibrationReport>,
    pub config: GeneratorConfig,
}

impl Generated {
    pub fn fraud_rate(&self) -> f64 {
        self.graph.user_fraud_rate()
    }
}

/// Ring counts after applying `fraud_rate_target`, if any. Counts keep
/// their relative proportions; all-zero counts become equal counts.
pub fn resolve_ring_counts(config: &GeneratorConfig) -> [usize; 3] {
    let counts = config.ring_counts();
    let Some(target) = config.fraud_rate_target else {
        return counts;
    };
    let per_ring = config.ring_sizes.expected_members();
    let wanted = target * config.n_users() as f64;
    let weights: [f64; 3] = if counts.iter().all(|&c| c == 0) {
        [1.0; 3]
    } else {
        counts.map(|c| c as f64)
    };
    let expected: f64 = weights.iter().zip(per_ring).map(|(w, m)| w * m).sum();
    let factor = wanted / expected;
    [0, 1, 2].map(|i| (weights[i] * factor).round() as usize)
}

pub fn generate(config: &GeneratorConfig) -> Result<Generated> {
    config.validate()?;
    let mut config = config.clone();
    let [t, gh, a] = resolve_ring_counts(&config);
    config = config.with_rings(t, gh, a);

    let n_users = config.n_users();
    let plans = plan_rings(&config);
    let fraud_users: usize = plans.iter().map(|p| p.shape.users()).sum();
    if fraud_users > n_users {
        return Err(Error::Config(format!(
            "rings need {fraud_users} users but the population has only {n_users}"
        )));
    }
    let n_legit = n_users - fraud_users;
    let samplers = Samplers::new()?;

    let mut last_failure = None;
    for shift in BACKOFF {
        let mut legit_rng = make_rng(config.seed, "legit");
        let population = generate_legit_population(n_legit, n_users, &mut legit_rng)?;
        let mut graph = population.graph;
        let injector = Injector {
            catalog: &population.catalog,
            samplers: &samplers,
            shift,
        };
        let mut rings = Vec::with_capacity(plans.len());
        for plan in &plans {
            let mut plan = plan.clone();
            rings.push(injector.inject(&mut graph, &mut plan)?);
        }
        finalize(&mut graph);

        let labels = graph.user_labels();
        let n_fraud = labels.iter().filter(|&&l| l == 1).count();
        let n_clean = labels.len() - n_fraud;
        let calibration = if n_fraud > 0 && n_clean > 0 {
            Some(cohens_d(&graph)?)
        } else {
            None
        };
        let gated = n_fraud >= GATE_MIN_CLASS
            && n_clean >= GATE_MIN_CLASS
            && config.ring_counts().iter().all(|&c| c >= GATE_MIN_RINGS);
        if gated && !calibration.as_ref().is_some_and(|c| c.passed()) {
            last_failure = calibration;
            continue;
        }

        for name in &config.relation_exclusions {
            graph = graph.drop_relation(name)?;
        }
        for name in &config.feature_exclusions {
            graph = graph.drop_user_feature(name)?;
        }
        graph.validate().into_result()?;
        debug_assert_eq!(graph.count(NodeType::User), n_users);
        return Ok(Generated {
            graph,
            rings,
            shift,
            calibration,
            config,
        });
    }
    let worst = last_failure
        .map(|c| c.worst())
        .map(|(name, d)| format!("{name} has |d| = {:.3}", d.abs()))
        .unwrap_or_default();
    Err(Error::Calibration(format!(
        "feature overlap gate failed at every shift multiplier {BACKOFF:?}; {worst}"
    )))
}
