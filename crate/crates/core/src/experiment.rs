//! Experiment driver: configuration, repeated seeded runs, metric reports, feature export
//! and the norm projection used for visual inspection.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{load_edge_list, Graph, LoadedGraph, NodePair};
use crate::labeling::{CenterPolicy, LabelScheme};
use crate::model::{auc, train_ma_phlp, FeatureSet, ModelArtifact, TrainConfig, TrainMode};
use crate::split::{split_links, LinkSet, LinkSplit, SplitKind, SplitRatios};
use crate::subgraph::{Angle, TargetNeighborhood};
use crate::vectorize::{
    features_from_diagrams, link_diagrams, write_feature_header, write_feature_row, FeatureOptions,
    FeatureVector, PiConfig, PiExtent, PointWeight,
};

/// Links processed per parallel chunk; bounds peak memory of feature extraction.
const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleSelection {
    /// Every angle up to the max hop.
    All,
    /// A single angle, for per-angle classifiers.
    Single(Angle),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub ratios: SplitRatios,
    pub seeds: Vec<u64>,
    /// `None` picks the per-dataset default.
    pub max_hop: Option<usize>,
    pub max_hom_dim: usize,
    pub scheme: LabelScheme,
    pub centers: CenterPolicy,
    pub pi_resolution: usize,
    pub pi_weight: PointWeight,
    pub angles: AngleSelection,
    pub train: TrainConfig,
    pub out: PathBuf,
    pub save_models: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: PathBuf::new(),
            ratios: SplitRatios::default(),
            seeds: (0..10).collect(),
            max_hop: None,
            max_hom_dim: 0,
            scheme: LabelScheme::DegreeDrnl,
            centers: CenterPolicy::Target,
            pi_resolution: 7,
            pi_weight: PointWeight::Log1p,
            angles: AngleSelection::All,
            train: TrainConfig::default(),
            out: PathBuf::from("out"),
            save_models: false,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value {value:?} for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

/// `a..b` (exclusive) or a comma list.
fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (u64, u64) = (parse("seeds", a.trim())?, parse("seeds", b.trim())?);
        return Ok((a..b).collect());
    }
    parse_list("seeds", value)
}

fn parse_angle(value: &str) -> Result<AngleSelection> {
    if value == "all" {
        return Ok(AngleSelection::All);
    }
    let nums: Vec<usize> = parse_list("angle", value.trim_matches(|c| c == '(' || c == ')'))?;
    match nums[..] {
        [k, l] if k + l > 0 => Ok(AngleSelection::Single(Angle::new(k, l))),
        _ => Err(Error::invalid(format!(
            "angle must be `all` or `k,l`, got {value:?}"
        ))),
    }
}

/// Lowercased alphanumeric file stem, e.g. `E.coli.txt` becomes `ecoli`.
fn dataset_key(path: &Path) -> String {
    let name = path
        .file_name()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let stem = name
        .strip_suffix(".txt")
        .or_else(|| name.strip_suffix(".edges"))
        .or_else(|| name.strip_suffix(".csv"))
        .unwrap_or(name);
    stem.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl ExperimentConfig {
    /// Sets one `key = value` entry; keys match the config file.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "dataset" => self.dataset = PathBuf::from(value),
            "ratios" => {
                let r: Vec<f64> = parse_list(key, value)?;
                let [train, val, test] = r[..] else {
                    return Err(Error::invalid("ratios takes train,val,test"));
                };
                self.ratios = SplitRatios { train, val, test };
            }
            "seeds" => self.seeds = parse_seeds(value)?,
            "seed" => self.seeds = vec![parse(key, value)?],
            "max_hop" => self.max_hop = Some(parse(key, value)?),
            "dim" => self.max_hom_dim = parse(key, value)?,
            "labeling" => self.scheme = value.parse()?,
            "centers" => self.centers = value.parse()?,
            "pi_res" => self.pi_resolution = parse(key, value)?,
            "pi_weight" => {
                self.pi_weight = match value {
                    "log1p" => PointWeight::Log1p,
                    "reciprocal_log" => PointWeight::ReciprocalLog,
                    _ => return Err(Error::invalid(format!("unknown pi_weight {value:?}"))),
                }
            }
            "angle" => self.angles = parse_angle(value)?,
            "lr" => self.train.learning_rate = parse(key, value)?,
            "batch_size" => self.train.batch_size = parse(key, value)?,
            "epochs" => self.train.max_epochs = parse(key, value)?,
            "patience" => self.train.patience = parse(key, value)?,
            "beta1" => self.train.beta1 = parse(key, value)?,
            "beta2" => self.train.beta2 = parse(key, value)?,
            "eps" => self.train.eps = parse(key, value)?,
            "hidden" => self.train.hidden = parse_list(key, value)?,
            "train_mode" => self.train.mode = value.parse::<TrainMode>()?,
            "out" => self.out = PathBuf::from(value),
            "save_models" => self.save_models = parse(key, value)?,
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, got {raw:?}"),
            })?;
            self.set(k, v).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_file(path)?;
        Ok(cfg)
    }

    /// Max hop after per-dataset defaults: 7 for Power, 3 elsewhere, and at most 2 for
    /// E.coli with one-dimensional homology.
    pub fn resolved_max_hop(&self) -> usize {
        let key = dataset_key(&self.dataset);
        let hop = self.max_hop.unwrap_or(if key == "power" { 7 } else { 3 });
        if key == "ecoli" && self.max_hom_dim >= 1 && hop > 2 {
            warn!("E.coli with dim {} caps the max hop at 2", self.max_hom_dim);
            return 2;
        }
        hop
    }

    pub fn angle_list(&self) -> Vec<Angle> {
        match self.angles {
            AngleSelection::All => Angle::menu(self.resolved_max_hop()),
            AngleSelection::Single(a) => vec![a],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ratios.validate()?;
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        if self.resolved_max_hop() == 0 {
            return Err(Error::invalid("max hop must be at least 1"));
        }
        if self.max_hom_dim > 1 {
            return Err(Error::invalid(format!(
                "dim must be 0 or 1, got {}",
                self.max_hom_dim
            )));
        }
        if self.pi_resolution == 0 {
            return Err(Error::invalid("pi_res must be positive"));
        }
        if let AngleSelection::Single(a) = self.angles {
            if a.k.max(a.l) > self.resolved_max_hop() {
                warn!(
                    "angle {a} is wider than max hop {}",
                    self.resolved_max_hop()
                );
            }
        }
        Ok(())
    }

    /// Resolved settings as sorted `key = value` lines.
    pub fn describe(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut kv = BTreeMap::new();
        kv.insert("dataset", self.dataset.display().to_string());
        kv.insert(
            "ratios",
            format!(
                "{},{},{}",
                self.ratios.train, self.ratios.val, self.ratios.test
            ),
        );
        kv.insert(
            "seeds",
            self.seeds
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        kv.insert("max_hop", self.resolved_max_hop().to_string());
        kv.insert("dim", self.max_hom_dim.to_string());
        kv.insert("labeling", self.scheme.to_string());
        kv.insert("centers", self.centers.to_string());
        kv.insert("pi_res", self.pi_resolution.to_string());
        kv.insert(
            "pi_weight",
            match self.pi_weight {
                PointWeight::Log1p => "log1p",
                PointWeight::ReciprocalLog => "reciprocal_log",
            }
            .to_string(),
        );
        kv.insert(
            "angle",
            match self.angles {
                AngleSelection::All => "all".to_string(),
                AngleSelection::Single(a) => format!("{},{}", a.k, a.l),
            },
        );
        kv.insert("lr", self.train.learning_rate.to_string());
        kv.insert("batch_size", self.train.batch_size.to_string());
        kv.insert("epochs", self.train.max_epochs.to_string());
        kv.insert("patience", self.train.patience.to_string());
        kv.insert("beta1", self.train.beta1.to_string());
        kv.insert("beta2", self.train.beta2.to_string());
        kv.insert("eps", self.train.eps.to_string());
        kv.insert("hidden", join(&self.train.hidden));
        kv.insert("train_mode", self.train.mode.to_string());
        kv.insert("out", self.out.display().to_string());
        kv.insert("save_models", self.save_models.to_string());
        kv.into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    fn feature_options(&self, seed: u64) -> FeatureOptions {
        FeatureOptions {
            scheme: self.scheme,
            centers: self.centers,
            center_seed: seed,
            max_hom_dim: self.max_hom_dim,
        }
    }
}

pub fn load_dataset(path: &Path) -> Result<LoadedGraph> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let loaded = load_edge_list(BufReader::new(file))?;
    info!(
        "{}: {} nodes, {} edges",
        path.display(),
        loaded.graph.num_nodes(),
        loaded.graph.num_edges()
    );
    Ok(loaded)
}

/// Links of every split in a fixed order: train, val, test; positives before negatives.
fn labeled_links(split: &LinkSplit) -> Vec<(SplitKind, NodePair, bool)> {
    SplitKind::ALL
        .iter()
        .flat_map(|&kind| split.get(kind).labeled().map(move |(p, l)| (kind, p, l)))
        .collect()
}

/// Image windows fitted on the diagrams of every training link at every angle.
pub fn fit_grids(
    obs: &Graph,
    links: &LinkSet,
    angles: &[Angle],
    opts: &FeatureOptions,
    resolution: usize,
) -> Result<PiConfig> {
    let max_hop = angles.iter().map(|a| a.k.max(a.l)).max().unwrap_or(1);
    let pairs: Vec<NodePair> = links.labeled().map(|(p, _)| p).collect();
    let extent = pairs
        .par_iter()
        .map(|&(u, v)| -> Result<PiExtent> {
            let nbhd = TargetNeighborhood::new(obs, u, v, max_hop)?;
            let mut ext = PiExtent::new(opts.max_hom_dim);
            for &angle in angles {
                for pair in link_diagrams(&nbhd, angle, opts)? {
                    ext.observe(&pair.without_link);
                    ext.observe(&pair.with_link);
                }
            }
            Ok(ext)
        })
        .try_reduce(|| PiExtent::new(opts.max_hom_dim), |a, b| Ok(a.merge(&b)))?;
    Ok(extent.into_config(resolution))
}

/// Feature vectors of each link at each angle, in input order.
pub fn link_features(
    obs: &Graph,
    links: &[NodePair],
    angles: &[Angle],
    opts: &FeatureOptions,
    pi: &PiConfig,
) -> Result<Vec<Vec<FeatureVector>>> {
    let max_hop = angles.iter().map(|a| a.k.max(a.l)).max().unwrap_or(1);
    links
        .par_iter()
        .map(|&(u, v)| {
            let nbhd = TargetNeighborhood::new(obs, u, v, max_hop)?;
            angles
                .iter()
                .map(|&a| features_from_diagrams(&link_diagrams(&nbhd, a, opts)?, pi))
                .collect()
        })
        .collect()
}

fn feature_set(
    obs: &Graph,
    links: &LinkSet,
    angles: &[Angle],
    opts: &FeatureOptions,
    pi: &PiConfig,
) -> Result<FeatureSet> {
    let labeled: Vec<(NodePair, bool)> = links.labeled().collect();
    let m = pi.feature_len();
    let mut per_angle = vec![Array2::zeros((labeled.len(), m)); angles.len()];
    for (c, chunk) in labeled.chunks(CHUNK).enumerate() {
        let pairs: Vec<NodePair> = chunk.iter().map(|&(p, _)| p).collect();
        let feats = link_features(obs, &pairs, angles, opts, pi)?;
        for (i, per_link) in feats.into_iter().enumerate() {
            let row = c * CHUNK + i;
            for (a, fv) in per_link.into_iter().enumerate() {
                per_angle[a]
                    .row_mut(row)
                    .assign(&ndarray::ArrayView1::from(&fv.values));
            }
        }
    }
    FeatureSet::new(
        angles.to_vec(),
        per_angle,
        labeled.into_iter().map(|(_, l)| l).collect(),
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedMetrics {
    pub test_auc: f64,
    pub val_auc: f64,
    pub best_epoch: usize,
    pub epochs: usize,
    pub sizes: [usize; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    pub result: std::result::Result<SeedMetrics, String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub num_nodes: usize,
    pub num_edges: usize,
    pub max_hop: usize,
    pub num_angles: usize,
    pub seeds: Vec<SeedOutcome>,
}

/// Arithmetic mean and sample standard deviation; the deviation is 0 for one value.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

impl ExperimentReport {
    pub fn test_aucs(&self) -> Vec<f64> {
        self.seeds
            .iter()
            .filter_map(|s| s.result.as_ref().ok().map(|m| m.test_auc))
            .collect()
    }

    pub fn completed(&self) -> usize {
        self.test_aucs().len()
    }

    pub fn is_complete(&self) -> bool {
        self.completed() == self.seeds.len()
    }

    /// Mean and sample standard deviation of test AUC over completed seeds.
    pub fn aggregate(&self) -> Option<(f64, f64)> {
        mean_std(&self.test_aucs())
    }

    pub fn write_metrics_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "row,status,test_auc,test_auc_std,val_auc,best_epoch,epochs,train_links,val_links,test_links,error"
        )?;
        for s in &self.seeds {
            match &s.result {
                Ok(m) => writeln!(
                    out,
                    "{},ok,{},,{},{},{},{},{},{},",
                    s.seed,
                    m.test_auc,
                    m.val_auc,
                    m.best_epoch,
                    m.epochs,
                    m.sizes[0],
                    m.sizes[1],
                    m.sizes[2]
                )?,
                Err(e) => writeln!(out, "{},failed,,,,,,,,,\"{}\"", s.seed, e.replace('"', "'"))?,
            }
        }
        let status = if self.is_complete() {
            "complete".to_string()
        } else {
            format!("incomplete({}/{})", self.completed(), self.seeds.len())
        };
        let vals: Vec<f64> = self
            .seeds
            .iter()
            .filter_map(|s| s.result.as_ref().ok().map(|m| m.val_auc))
            .collect();
        match (self.aggregate(), mean_std(&vals)) {
            (Some((mean, std)), Some((val_mean, _))) => {
                writeln!(out, "aggregate,{status},{mean},{std},{val_mean},,,,,,")
            }
            _ => writeln!(out, "aggregate,{status},,,,,,,,,"),
        }
    }

    pub fn summary(&self, cfg: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "dataset: {}", cfg.dataset.display());
        let _ = writeln!(
            s,
            "graph: {} nodes, {} edges",
            self.num_nodes, self.num_edges
        );
        let _ = writeln!(
            s,
            "max hop {} ({} angle types), dim 0..={}",
            self.max_hop, self.num_angles, cfg.max_hom_dim
        );
        let _ = writeln!(
            s,
            "labeling {}, centers {}, image {}x{}",
            cfg.scheme, cfg.centers, cfg.pi_resolution, cfg.pi_resolution
        );
        let _ = writeln!(s);
        for seed in &self.seeds {
            match &seed.result {
                Ok(m) => {
                    let _ = writeln!(
                        s,
                        "seed {:>4}: test AUC {:6.2}  (val {:6.2}, best epoch {}/{})",
                        seed.seed,
                        100.0 * m.test_auc,
                        100.0 * m.val_auc,
                        m.best_epoch,
                        m.epochs
                    );
                }
                Err(e) => {
                    let _ = writeln!(s, "seed {:>4}: FAILED: {e}", seed.seed);
                }
            }
        }
        let _ = writeln!(s);
        match self.aggregate() {
            Some((mean, std)) => {
                let _ = writeln!(
                    s,
                    "test AUC: {:.2} ± {:.2} over {} of {} seeds",
                    100.0 * mean,
                    100.0 * std,
                    self.completed(),
                    self.seeds.len()
                );
            }
            None => {
                let _ = writeln!(s, "test AUC: no seed completed");
            }
        }
        let _ = writeln!(s, "\nconfiguration:");
        s.push_str(&cfg.describe());
        s
    }
}

fn run_seed(
    graph: &Graph,
    cfg: &ExperimentConfig,
    seed: u64,
    angles: &[Angle],
) -> Result<SeedMetrics> {
    let start = Instant::now();
    let split = split_links(graph, cfg.ratios, seed)?;
    let opts = cfg.feature_options(seed);
    let mut pi = fit_grids(
        &split.observed,
        &split.train,
        angles,
        &opts,
        cfg.pi_resolution,
    )?;
    pi.weight = cfg.pi_weight;
    let sets = SplitKind::ALL
        .iter()
        .map(|&k| feature_set(&split.observed, split.get(k), angles, &opts, &pi))
        .collect::<Result<Vec<_>>>()?;
    info!(
        "seed {seed}: features ready in {:.1}s",
        start.elapsed().as_secs_f64()
    );

    let train_cfg = TrainConfig {
        seed,
        ..cfg.train.clone()
    };
    let trained = train_ma_phlp(&sets[0], &sets[1], &train_cfg)?;
    let test_auc = auc(&trained.model.predict(&sets[2])?, &sets[2].labels)?;
    info!(
        "seed {seed}: test AUC {:.4} after {:.1}s",
        test_auc,
        start.elapsed().as_secs_f64()
    );
    if cfg.save_models {
        let dir = cfg.out.join("models");
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        ModelArtifact::new(trained.model, pi, opts, train_cfg)
            .save(&dir.join(format!("seed_{seed}.json")))?;
    }
    Ok(SeedMetrics {
        test_auc,
        val_auc: trained.best_val_auc,
        best_epoch: trained.best_epoch,
        epochs: trained.history.len(),
        sizes: [sets[0].len(), sets[1].len(), sets[2].len()],
    })
}

/// Runs every seed on an already loaded graph without writing files.
pub fn evaluate(graph: &Graph, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let angles = cfg.angle_list();
    let seeds = cfg
        .seeds
        .iter()
        .map(|&seed| {
            let result = run_seed(graph, cfg, seed, &angles).map_err(|e| {
                warn!("seed {seed} aborted: {e}");
                e.to_string()
            });
            SeedOutcome { seed, result }
        })
        .collect();
    Ok(ExperimentReport {
        num_nodes: graph.num_nodes(),
        num_edges: graph.num_edges(),
        max_hop: cfg.resolved_max_hop(),
        num_angles: angles.len(),
        seeds,
    })
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    f(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Loads the dataset, runs every seed and writes `metrics.csv` and `summary.txt`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let loaded = load_dataset(&cfg.dataset)?;
    create_out(&cfg.out)?;
    let report = evaluate(&loaded.graph, cfg)?;
    write_file(&cfg.out.join("metrics.csv"), |w| {
        report.write_metrics_csv(w)
    })?;
    let summary = report.summary(cfg);
    write_file(&cfg.out.join("summary.txt"), |w| {
        w.write_all(summary.as_bytes())
    })?;
    Ok(report)
}

/// Writes a feature CSV for every link of every split at every angle, in split order
/// train, val, test. Returns the number of rows.
pub fn export_features_to<W: Write>(
    graph: &Graph,
    cfg: &ExperimentConfig,
    seed: u64,
    out: &mut W,
) -> Result<usize> {
    cfg.validate()?;
    let angles = cfg.angle_list();
    let split = split_links(graph, cfg.ratios, seed)?;
    let opts = cfg.feature_options(seed);
    let mut pi = fit_grids(
        &split.observed,
        &split.train,
        &angles,
        &opts,
        cfg.pi_resolution,
    )?;
    pi.weight = cfg.pi_weight;
    write_feature_header(out, pi.feature_len())?;
    let links = labeled_links(&split);
    let mut rows = 0;
    for chunk in links.chunks(CHUNK) {
        let pairs: Vec<NodePair> = chunk.iter().map(|&(_, p, _)| p).collect();
        let feats = link_features(&split.observed, &pairs, &angles, &opts, &pi)?;
        for (&(_, pair, label), per_link) in chunk.iter().zip(feats) {
            for (&angle, fv) in angles.iter().zip(&per_link) {
                write_feature_row(out, pair, label, angle, &fv.values)?;
                rows += 1;
            }
        }
    }
    Ok(rows)
}

fn write_split_files(split: &LinkSplit, loaded: &LoadedGraph, dir: &Path) -> Result<()> {
    split.write_dir(dir)?;
    write_file(&dir.join("nodes.csv"), |w| {
        writeln!(w, "id,token")?;
        for (i, t) in loaded.tokens.iter().enumerate() {
            writeln!(w, "{i},{t}")?;
        }
        Ok(())
    })
}

/// `features.csv` plus the split files it was computed from, for the first configured seed.
pub fn export_features(cfg: &ExperimentConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let loaded = load_dataset(&cfg.dataset)?;
    create_out(&cfg.out)?;
    let seed = cfg.seeds[0];
    let path = cfg.out.join("features.csv");
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = BufWriter::new(file);
    let rows = export_features_to(&loaded.graph, cfg, seed, &mut out)?;
    out.flush().map_err(|e| Error::io(&path, e))?;
    write_split_files(
        &split_links(&loaded.graph, cfg.ratios, seed)?,
        &loaded,
        &cfg.out,
    )?;
    info!("wrote {rows} feature rows to {}", path.display());
    Ok(path)
}

/// Mean L1 norm of the with-link halves and of the without-link halves over the angles of
/// one link.
pub fn project_link(per_angle: &[FeatureVector]) -> (f64, f64) {
    if per_angle.is_empty() {
        return (0.0, 0.0);
    }
    let k = per_angle.len() as f64;
    let l1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
    let with: f64 = per_angle.iter().map(|f| l1(f.with_link())).sum();
    let without: f64 = per_angle.iter().map(|f| l1(f.without_link())).sum();
    (with / k, without / k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionPoint {
    pub link: NodePair,
    pub label: bool,
    pub with_link: f64,
    pub without_link: f64,
}

pub fn analyze_projection(
    links: &[(NodePair, bool)],
    features: &[Vec<FeatureVector>],
) -> Vec<ProjectionPoint> {
    links
        .iter()
        .zip(features)
        .map(|(&(link, label), per_angle)| {
            let (with_link, without_link) = project_link(per_angle);
            ProjectionPoint {
                link,
                label,
                with_link,
                without_link,
            }
        })
        .collect()
}

pub fn write_projection_csv<W: Write>(
    points: &[ProjectionPoint],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "u,v,label,h_with_link,h_without_link")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.link.0,
            p.link.1,
            u8::from(p.label),
            p.with_link,
            p.without_link
        )?;
    }
    Ok(())
}

/// Projection of one split's links for the first configured seed.
pub fn projection_for(
    graph: &Graph,
    cfg: &ExperimentConfig,
    kind: SplitKind,
) -> Result<Vec<ProjectionPoint>> {
    cfg.validate()?;
    let seed = cfg.seeds[0];
    let angles = cfg.angle_list();
    let split = split_links(graph, cfg.ratios, seed)?;
    let opts = cfg.feature_options(seed);
    let mut pi = fit_grids(
        &split.observed,
        &split.train,
        &angles,
        &opts,
        cfg.pi_resolution,
    )?;
    pi.weight = cfg.pi_weight;
    let links: Vec<(NodePair, bool)> = split.get(kind).labeled().collect();
    let pairs: Vec<NodePair> = links.iter().map(|&(p, _)| p).collect();
    let feats = link_features(&split.observed, &pairs, &angles, &opts, &pi)?;
    Ok(analyze_projection(&links, &feats))
}

/// Writes `projection.csv` for one split.
pub fn run_analysis(cfg: &ExperimentConfig, kind: SplitKind) -> Result<PathBuf> {
    let loaded = load_dataset(&cfg.dataset)?;
    create_out(&cfg.out)?;
    let points = projection_for(&loaded.graph, cfg, kind)?;
    let path = cfg.out.join("projection.csv");
    write_file(&path, |w| write_projection_csv(&points, w))?;
    Ok(path)
}

/// Persists the split for each configured seed under `out/split_<seed>/`.
pub fn write_splits(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.ratios.validate()?;
    let loaded = load_dataset(&cfg.dataset)?;
    cfg.seeds
        .iter()
        .map(|&seed| {
            let dir = cfg.out.join(format!("split_{seed}"));
            create_out(&dir)?;
            write_split_files(
                &split_links(&loaded.graph, cfg.ratios, seed)?,
                &loaded,
                &dir,
            )?;
            Ok(dir)
        })
        .collect()
}
