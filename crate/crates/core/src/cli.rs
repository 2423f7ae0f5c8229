//! Command-line front end. Exit codes: 0 success, 1 configuration error,
//! 2 I/O error, 3 validation or data error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{run_baseline, FeatureSet};
use crate::config::{GeneratorConfig, PresetName, Scale};
use crate::error::{Error, Result};
use crate::export::{export_bundle, load_bundle, LoadedBundle};
use crate::generate::generate;
use crate::metrics::{evaluate, ScoreSet};
use crate::rng::make_rng;
use crate::schema::{NodeType, Relation};
use crate::split::{split, verify_no_leakage, Partition, DEFAULT_FRACTIONS};
use crate::stats::{cohens_d, homophily, isolation_breaches, motif_fingerprints};
use crate::sweep::{run_sweep, RING_SIZE_AXIS};

#[derive(Debug, Parser)]
#[command(name = "ringbench", version, about = "Synthetic travel-fraud graph generator and evaluation harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph, split it and export a bundle.
    Generate {
        #[command(flatten)]
        gen: GenerateArgs,
        /// Bundle output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print counts, homophily, motif fingerprints, feature overlap and
    /// isolation checks for a bundle.
    Analyze {
        #[arg(long)]
        bundle: PathBuf,
        /// Also write the reports as CSV into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-split a bundle's rings and users and re-export it.
    Split {
        #[arg(long)]
        bundle: PathBuf,
        /// Train, validation and test fractions.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FRACTIONS)]
        fractions: Vec<f64>,
        /// Split seed [default: the bundle's generation seed, else 42].
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory [default: rewrite the bundle in place].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ring-size difficulty sweep scored with the graph-aggregate baseline.
    Sweep {
        #[command(flatten)]
        gen: GenerateArgs,
        /// Ring sizes to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = RING_SIZE_AXIS)]
        sizes: Vec<usize>,
        /// Write the condition rows as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Copy a bundle with relations and/or user features removed.
    Ablate {
        #[arg(long)]
        bundle: PathBuf,
        /// Relation to empty; `wrote/about` empties both review relations.
        #[arg(long = "drop-relation")]
        drop_relation: Vec<String>,
        /// User feature column to remove.
        #[arg(long = "drop-feature")]
        drop_feature: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a bundle's test partition from a `user_id<TAB>score` file.
    Evaluate {
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        /// Write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train a native baseline on the train partition and evaluate it.
    Baseline {
        #[arg(long)]
        bundle: PathBuf,
        /// `tabular` or `graph_aggregate`.
        #[arg(long, default_value = "graph_aggregate")]
        model: String,
        /// Training seed [default: the bundle's generation seed, else 42].
        #[arg(long)]
        seed: Option<u64>,
        /// Write every user's score as a score file.
        #[arg(long)]
        scores_out: Option<PathBuf>,
        /// Write the report as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flags shared by `generate` and `sweep`. Flags override `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct GenerateArgs {
    /// TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset: toy, small, medium, large, xlarge [default: medium].
    #[arg(long, conflicts_with = "users")]
    pub scale: Option<String>,
    /// Explicit total user count instead of a preset.
    #[arg(long)]
    pub users: Option<usize>,
    /// Master seed [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rings_ticketing: Option<usize>,
    #[arg(long)]
    pub rings_ghost: Option<usize>,
    #[arg(long)]
    pub rings_ato: Option<usize>,
    /// Target fraud user rate; rescales the ring counts.
    #[arg(long)]
    pub fraud_rate: Option<f64>,
    /// Allow ring sizes outside the default bounds.
    #[arg(long)]
    pub widen_bounds: bool,
    #[arg(long = "drop-relation")]
    pub drop_relation: Vec<String>,
    #[arg(long = "drop-feature")]
    pub drop_feature: Vec<String>,
}

impl GenerateArgs {
    pub fn to_config(&self) -> Result<GeneratorConfig> {
        let mut c = match &self.config {
            Some(path) => GeneratorConfig::from_toml_file(path)?,
            None => GeneratorConfig::preset(PresetName::Medium, 42),
        };
        let scale = match (&self.scale, self.users) {
            (Some(name), _) => Some(Scale::Preset(name.parse()?)),
            (None, Some(n)) => Some(Scale::Users(n)),
            (None, None) => None,
        };
        if let Some(scale) = scale {
            let n = scale.default_rings_per_type();
            c.scale = scale;
            c = c.with_rings(n, n, n);
        }
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        if let Some(n) = self.rings_ticketing {
            c.n_ticketing_rings = n;
        }
        if let Some(n) = self.rings_ghost {
            c.n_ghost_hotel_rings = n;
        }
        if let Some(n) = self.rings_ato {
            c.n_ato_rings = n;
        }
        if self.fraud_rate.is_some() {
            c.fraud_rate_target = self.fraud_rate;
        }
        c.widen_bounds |= self.widen_bounds;
        c.relation_exclusions.extend(self.drop_relation.iter().cloned());
        c.feature_exclusions.extend(self.drop_feature.iter().cloned());
        c.validate()?;
        Ok(c)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn bundle_seed(bundle: &LoadedBundle, flag: Option<u64>) -> u64 {
    flag.or(bundle.manifest.config.as_ref().map(|c| c.seed)).unwrap_or(42)
}

fn config_echo(config: &GeneratorConfig) -> String {
    serde_json::to_string(config).expect("serialisable")
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate { gen, out } => cmd_generate(&gen, &out),
        Command::Analyze { bundle, out } => cmd_analyze(&bundle, out.as_deref()),
        Command::Split {
            bundle,
            fractions,
            seed,
            out,
        } => cmd_split(&bundle, &fractions, seed, out.as_deref()),
        Command::Sweep { gen, sizes, out } => cmd_sweep(&gen, &sizes, out.as_deref()),
        Command::Ablate {
            bundle,
            drop_relation,
            drop_feature,
            out,
        } => cmd_ablate(&bundle, &drop_relation, &drop_feature, &out),
        Command::Evaluate { bundle, scores, out } => cmd_evaluate(&bundle, &scores, out.as_deref()),
        Command::Baseline {
            bundle,
            model,
            seed,
            scores_out,
            out,
        } => cmd_baseline(&bundle, &model, seed, scores_out.as_deref(), out.as_deref()),
    }
}

fn print_counts(g: &crate::graph::GraphData) {
    for t in NodeType::ALL {
        println!("  {:<16} {:>9}", t.as_str(), g.count(t));
    }
    for r in Relation::ALL {
        println!("  {:<16} {:>9}", r.as_str(), g.edge_count(r));
    }
}

pub fn cmd_generate(gen: &GenerateArgs, out: &Path) -> Result<()> {
    let config = gen.to_config()?;
    println!("config: {}", config_echo(&config));
    let generated = generate(&config)?;
    let g = &generated.graph;
    let assignment = split(g, &generated.rings, DEFAULT_FRACTIONS, &mut make_rng(config.seed, "split"))?;
    let bundle = export_bundle(g, &generated.rings, &assignment, Some(&config), out)?;
    println!("users: {}", g.count(NodeType::User));
    println!("rings: {}", generated.rings.len());
    println!("fraud_rate: {:.4}", generated.fraud_rate());
    println!("shift: {}", generated.shift);
    if let Some(c) = &generated.calibration {
        let (name, d) = c.worst();
        println!("max |d|: {:.4} ({name})", d.abs());
    }
    println!("counts:");
    print_counts(g);
    for w in &assignment.warnings {
        println!("warning: {w}");
    }
    println!("digest: {}", bundle.manifest.digest);
    println!("bundle: {}", out.display());
    Ok(())
}

pub fn cmd_analyze(dir: &Path, out: Option<&Path>) -> Result<()> {
    let b = load_bundle(dir)?;
    let g = &b.graph;
    println!("digest: {}", b.manifest.digest);
    println!("fraud_rate: {:.4}", g.user_fraud_rate());
    println!("counts:");
    print_counts(g);
    let h = homophily(g);
    println!("\n{h}");
    let motifs = motif_fingerprints(g, &b.rings);
    println!("{motifs}");
    let calibration = cohens_d(g)?;
    println!("{calibration}");
    let breaches = isolation_breaches(g);
    println!("isolation breaches: {}", breaches.len());
    let leakage = verify_no_leakage(g, &b.assignment);
    println!(
        "split leakage: {} device(s), {} ip(s); ring-spanning rings: {}",
        leakage.devices,
        leakage.ips,
        b.assignment.spanning_rings(&b.rings).len()
    );
    if let Some(out) = out {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write_text(&out.join("homophily.csv"), &h.to_csv())?;
        write_text(&out.join("motifs.csv"), &motifs.to_csv())?;
        write_text(&out.join("calibration.csv"), &calibration.to_csv())?;
    }
    Ok(())
}

pub fn cmd_split(dir: &Path, fractions: &[f64], seed: Option<u64>, out: Option<&Path>) -> Result<()> {
    let b = load_bundle(dir)?;
    let fractions: [f64; 3] = fractions
        .try_into()
        .map_err(|_| Error::Config("--fractions takes exactly three values".into()))?;
    let seed = bundle_seed(&b, seed);
    let assignment = split(&b.graph, &b.rings, fractions, &mut make_rng(seed, "split"))?;
    let target = out.unwrap_or(dir);
    let bundle = export_bundle(&b.graph, &b.rings, &assignment, b.manifest.config.as_ref(), target)?;
    for p in Partition::ALL {
        let rings = assignment.rings.iter().filter(|r| r.1 == p).count();
        println!("{p}: {} users, {rings} rings", assignment.users_in(p).count());
    }
    let leakage = verify_no_leakage(&b.graph, &assignment);
    println!(
        "leakage: {} device(s), {} ip(s); ring-spanning rings: {}",
        leakage.devices,
        leakage.ips,
        assignment.spanning_rings(&b.rings).len()
    );
    for w in &assignment.warnings {
        println!("warning: {w}");
    }
    println!("digest: {}", bundle.manifest.digest);
    Ok(())
}

pub fn cmd_sweep(gen: &GenerateArgs, sizes: &[usize], out: Option<&Path>) -> Result<()> {
    let mut gen = gen.clone();
    if gen.scale.is_none() && gen.users.is_none() && gen.config.is_none() {
        gen.scale = Some("small".into());
    }
    let config = gen.to_config()?;
    println!("config: {}", config_echo(&config));
    let report = run_sweep(&config, sizes)?;
    print!("{report}");
    if let Some(out) = out {
        write_text(out, &report.to_csv())?;
    }
    Ok(())
}

pub fn cmd_ablate(dir: &Path, relations: &[String], features: &[String], out: &Path) -> Result<()> {
    let b = load_bundle(dir)?;
    let mut g = b.graph;
    for r in relations {
        g = g.drop_relation(r)?;
    }
    for f in features {
        g = g.drop_user_feature(f)?;
    }
    let mut config = b.manifest.config;
    if let Some(c) = config.as_mut() {
        c.relation_exclusions.extend(relations.iter().cloned());
        c.feature_exclusions.extend(features.iter().cloned());
    }
    let bundle = export_bundle(&g, &b.rings, &b.assignment, config.as_ref(), out)?;
    println!("user feature width: {}", g.table(NodeType::User).width());
    for r in Relation::ALL {
        println!("  {:<16} {:>9}", r.as_str(), g.edge_count(r));
    }
    println!("digest: {}", bundle.manifest.digest);
    Ok(())
}

pub fn cmd_evaluate(dir: &Path, scores: &Path, out: Option<&Path>) -> Result<()> {
    let b = load_bundle(dir)?;
    let scores = ScoreSet::read(scores)?;
    let report = evaluate(b.graph.user_labels(), &b.rings, &b.assignment, &scores)?;
    print!("{report}");
    if let Some(out) = out {
        write_text(out, &report.to_csv())?;
    }
    Ok(())
}

pub fn cmd_baseline(
    dir: &Path,
    model: &str,
    seed: Option<u64>,
    scores_out: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let set: FeatureSet = model.parse()?;
    let b = load_bundle(dir)?;
    let seed = bundle_seed(&b, seed);
    let run = run_baseline(&b.graph, &b.rings, &b.assignment, set, &mut make_rng(seed, "baseline"))?;
    println!("model: {} ({} features)", set.as_str(), run.model.columns.len());
    print!("{}", run.report);
    if let Some(path) = scores_out {
        write_text(path, &run.scores.to_tsv())?;
    }
    if let Some(out) = out {
        write_text(out, &run.report.to_csv())?;
    }
    Ok(())
}
