use rand::Rng;
use ringbench_core::baselines::{
    graph_aggregate_features, loss_and_gradient, run_baseline, tabular_features, FeatureSet,
};
use ringbench_core::config::{GeneratorConfig, PresetName};
use ringbench_core::generate::generate;
use ringbench_core::projection::{project_user_graph, Channel};
use ringbench_core::rng::make_rng;
use ringbench_core::schema::{NodeType, Relation};
use ringbench_core::split::{split, DEFAULT_FRACTIONS};

#[test]
fn gradient_matches_central_differences() {
    for trial in 0..5 {
        let mut rng = make_rng(trial, "test/gradient");
        let (n, d) = (20, 6);
        let x: Vec<f64> = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        let sw: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..4.0)).collect();
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let b = rng.random_range(-1.0..1.0);
        let l2 = 1e-3;
        let (_, gw, gb) = loss_and_gradient(&w, b, &x, &y, &sw, l2);
        let f = |w: &[f64], b: f64| loss_and_gradient(w, b, &x, &y, &sw, l2).0;
        let h = 1e-5;
        for k in 0..d {
            let mut up = w.clone();
            let mut down = w.clone();
            up[k] += h;
            down[k] -= h;
            let num = (f(&up, b) - f(&down, b)) / (2.0 * h);
            let rel = (gw[k] - num).abs() / gw[k].abs().max(num.abs()).max(1e-8);
            assert!(rel < 1e-4, "trial {trial} w[{k}]: {} vs {num}", gw[k]);
        }
        let num = (f(&w, b + h) - f(&w, b - h)) / (2.0 * h);
        assert!((gb - num).abs() / gb.abs().max(num.abs()).max(1e-8) < 1e-4);
    }
}

#[test]
fn projection_matches_brute_force() {
    let g = generate(&GeneratorConfig::preset(PresetName::Toy, 8)).unwrap().graph;
    let p = project_user_graph(&g);
    for channel in Channel::ALL {
        let rel = channel.relation();
        let hubs = match rel {
            Relation::UsesDevice => g.count(NodeType::Device),
            _ => g.count(NodeType::IpAddress),
        };
        let mut uses = vec![vec![false; hubs]; g.count(NodeType::User)];
        for &(u, h) in g.edges(rel) {
            uses[u][h] = true;
        }
        let mut expected = Vec::new();
        for a in 0..uses.len() {
            for b in a + 1..uses.len() {
                if (0..hubs).any(|h| uses[a][h] && uses[b][h]) {
                    expected.push((a, b));
                }
            }
        }
        let mut got: Vec<_> = p.channel_edges(channel).collect();
        got.sort_unstable();
        assert_eq!(got, expected, "{channel:?}");
    }
}

#[test]
fn aggregate_design_extends_tabular() {
    let g = generate(&GeneratorConfig::preset(PresetName::Toy, 8)).unwrap().graph;
    let tab = tabular_features(&g);
    let agg = graph_aggregate_features(&g);
    assert_eq!(agg.width(), 2 * tab.width() + 2);
    let [dev, ip] = project_user_graph(&g).neighbours();
    for u in 0..tab.rows {
        assert_eq!(&agg.row(u)[..tab.width()], tab.row(u));
        assert_eq!(agg.row(u)[tab.width()], dev[u].len() as f64);
        assert_eq!(agg.row(u)[tab.width() + 1], ip[u].len() as f64);
    }
}

#[test]
fn baseline_runs_are_reproducible() {
    let config = GeneratorConfig::preset(PresetName::Small, 42);
    let out = generate(&config).unwrap();
    let a = split(&out.graph, &out.rings, DEFAULT_FRACTIONS, &mut make_rng(42, "split")).unwrap();
    let run = |set| run_baseline(&out.graph, &out.rings, &a, set, &mut make_rng(42, "baseline")).unwrap();
    let first = run(FeatureSet::GraphAggregate);
    let second = run(FeatureSet::GraphAggregate);
    assert_eq!(first.scores, second.scores);
    assert_eq!(first.report, second.report);
    let tab = run(FeatureSet::Tabular);
    assert!((0.80..=0.97).contains(&tab.report.auc_roc), "tabular auc {}", tab.report.auc_roc);
}
