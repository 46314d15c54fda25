use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use phlp::experiment::{self, ExperimentConfig};
use phlp::split::SplitKind;

#[derive(Parser, Debug)]
#[command(
    name = "phlp",
    version,
    about = "Persistent-homology link prediction experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train and evaluate the mixture for every seed; writes metrics.csv and summary.txt.
    Run(Common),
    /// Write features.csv for every link and angle of the first seed's split.
    ExportFeatures(Common),
    /// Write projection.csv (mean with-link and without-link image norms per link).
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Split to project: train, val or test.
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Persist the train/val/test split of each seed.
    Split(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Whitespace-separated edge list.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Seed list `0,1,2` or range `0..10`.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    max_hop: Option<usize>,
    /// Highest homology dimension, 0 or 1.
    #[arg(long)]
    dim: Option<usize>,
    /// drnl or degdrnl.
    #[arg(long)]
    labeling: Option<String>,
    /// target or random.
    #[arg(long)]
    centers: Option<String>,
    /// Persistence image resolution n (n x n cells).
    #[arg(long)]
    pi_res: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` settings, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)
                .with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let flags: [(&str, Option<String>); 9] = [
            (
                "dataset",
                self.dataset.as_ref().map(|p| p.display().to_string()),
            ),
            ("seed", self.seed.map(|s| s.to_string())),
            ("seeds", self.seeds.clone()),
            ("max_hop", self.max_hop.map(|h| h.to_string())),
            ("dim", self.dim.map(|d| d.to_string())),
            ("labeling", self.labeling.clone()),
            ("centers", self.centers.clone()),
            ("pi_res", self.pi_res.map(|n| n.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                cfg.set(key, &value)
                    .with_context(|| format!("--{}", key.replace('_', "-")))?;
            }
        }
        for kv in &self.overrides {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {kv:?}");
            };
            cfg.set(k, v).with_context(|| format!("--set {kv}"))?;
        }
        if cfg.dataset.as_os_str().is_empty() {
            bail!("no dataset given (use --dataset or a config file)");
        }
        Ok(cfg)
    }
}

fn parse_split(name: &str) -> Result<SplitKind> {
    SplitKind::ALL
        .into_iter()
        .find(|k| k.name() == name)
        .with_context(|| format!("unknown split {name:?}"))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(common) => {
            let cfg = common.config()?;
            let report = experiment::run_experiment(&cfg)?;
            print!("{}", report.summary(&cfg));
            if report.completed() == 0 {
                bail!("no seed completed");
            }
        }
        Command::ExportFeatures(common) => {
            let cfg = common.config()?;
            let path = experiment::export_features(&cfg)?;
            println!("{}", path.display());
        }
        Command::Analyze { common, split } => {
            let cfg = common.config()?;
            let path = experiment::run_analysis(&cfg, parse_split(&split)?)?;
            println!("{}", path.display());
        }
        Command::Split(common) => {
            let cfg = common.config()?;
            for dir in experiment::write_splits(&cfg)? {
                println!("{}", dir.display());
            }
        }
    }
    Ok(())
}
