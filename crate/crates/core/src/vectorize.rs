//! Persistence images and the per-link feature vector built from them.
//!
//! Diagram points `(b, d)` are mapped to `(b, d - b)` and spread as isotropic Gaussians whose
//! mass is integrated exactly over each cell. Images are row-major with rows indexing the
//! persistence axis and columns the birth axis.

use std::f64::consts::SQRT_2;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labeling::{edge_weights, label_nodes, random_centers, CenterPolicy, LabelScheme};
use crate::persistence::{diagram_for, PersistenceDiagram};
use crate::subgraph::{add_target_link, Angle, EnclosingSubgraph, TargetNeighborhood};

/// Weight applied to a point as a function of its persistence.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointWeight {
    /// `ln(1 + p)`; vanishes on the diagonal.
    #[default]
    Log1p,
    /// `1 / ln(1 + p)` for `p > 0`; zero-persistence points are dropped.
    ReciprocalLog,
}

impl PointWeight {
    pub fn weight(self, persistence: f64) -> f64 {
        if persistence <= 0.0 {
            return 0.0;
        }
        match self {
            PointWeight::Log1p => persistence.ln_1p(),
            PointWeight::ReciprocalLog => 1.0 / persistence.ln_1p(),
        }
    }
}

/// Image window for one homology dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiGrid {
    pub birth: (f64, f64),
    pub persistence: (f64, f64),
    pub sigma: f64,
}

impl PiGrid {
    fn unit(resolution: usize) -> Self {
        Self {
            birth: (0.0, 1.0),
            persistence: (0.0, 1.0),
            sigma: 1.0 / resolution as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiConfig {
    pub resolution: usize,
    /// `grids[p]` is the window for homology dimension `p`.
    pub grids: Vec<PiGrid>,
    pub weight: PointWeight,
}

impl PiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return Err(Error::invalid("image resolution must be at least 1"));
        }
        for (dim, g) in self.grids.iter().enumerate() {
            let ok = g.birth.1 > g.birth.0 && g.persistence.1 > g.persistence.0 && g.sigma > 0.0;
            if !ok || !g.sigma.is_finite() {
                return Err(Error::invalid(format!(
                    "degenerate image grid for dimension {dim}: {g:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn max_hom_dim(&self) -> usize {
        self.grids.len().saturating_sub(1)
    }

    /// Length of one image.
    pub fn image_len(&self) -> usize {
        self.resolution * self.resolution
    }

    /// Length of the full `[x- | x+]` feature vector.
    pub fn feature_len(&self) -> usize {
        2 * self.grids.len() * self.image_len()
    }
}

fn padded_range(max: f64) -> (f64, f64) {
    if max > 0.0 && max.is_finite() {
        (0.0, max * 1.05)
    } else {
        (0.0, 1.0)
    }
}

/// Fits one window per homology dimension `0..=max_hom_dim` covering every training point,
/// each upper bound padded by 5%. The Gaussian width equals the birth-axis cell width.
pub fn fit_pi_grid<'a, I>(diagrams: I, resolution: usize, max_hom_dim: usize) -> Result<PiConfig>
where
    I: IntoIterator<Item = &'a PersistenceDiagram>,
{
    if resolution == 0 {
        return Err(Error::invalid("image resolution must be at least 1"));
    }
    let mut extent = PiExtent::new(max_hom_dim);
    let mut seen = false;
    for dg in diagrams {
        seen = true;
        extent.observe(dg);
    }
    if !seen {
        log::warn!("no training diagrams; using unit image windows");
    }
    Ok(extent.into_config(resolution))
}

/// Running per-dimension maxima of birth and persistence, mergeable across workers.
#[derive(Clone, Debug, PartialEq)]
pub struct PiExtent {
    max_birth: Vec<f64>,
    max_persistence: Vec<f64>,
}

impl PiExtent {
    pub fn new(max_hom_dim: usize) -> Self {
        Self {
            max_birth: vec![0.0; max_hom_dim + 1],
            max_persistence: vec![0.0; max_hom_dim + 1],
        }
    }

    pub fn observe(&mut self, dg: &PersistenceDiagram) {
        for p in &dg.pairs {
            if p.dim < self.max_birth.len() {
                self.max_birth[p.dim] = self.max_birth[p.dim].max(p.birth);
                self.max_persistence[p.dim] = self.max_persistence[p.dim].max(p.persistence());
            }
        }
    }

    pub fn merge(mut self, other: &PiExtent) -> Self {
        for (a, b) in self.max_birth.iter_mut().zip(&other.max_birth) {
            *a = a.max(*b);
        }
        for (a, b) in self.max_persistence.iter_mut().zip(&other.max_persistence) {
            *a = a.max(*b);
        }
        self
    }

    pub fn into_config(self, resolution: usize) -> PiConfig {
        let grids = self
            .max_birth
            .iter()
            .zip(&self.max_persistence)
            .map(|(&b, &p)| {
                let birth = padded_range(b);
                PiGrid {
                    birth,
                    persistence: padded_range(p),
                    sigma: (birth.1 - birth.0) / resolution as f64,
                }
            })
            .collect();
        PiConfig {
            resolution,
            grids,
            weight: PointWeight::Log1p,
        }
    }
}

impl PiConfig {
    /// Unit windows for every dimension, used when no training data is available.
    pub fn unit(resolution: usize, max_hom_dim: usize) -> Self {
        Self {
            resolution,
            grids: vec![PiGrid::unit(resolution); max_hom_dim + 1],
            weight: PointWeight::Log1p,
        }
    }
}

/// Standard normal mass of the interval `[lo, hi]`.
pub(crate) fn normal_mass(lo: f64, hi: f64) -> f64 {
    // Work in the tail nearest zero-mass to avoid cancellation.
    if lo >= 0.0 {
        0.5 * (libm::erfc(lo / SQRT_2) - libm::erfc(hi / SQRT_2))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-hi / SQRT_2) - libm::erfc(-lo / SQRT_2))
    } else {
        1.0 - 0.5 * (libm::erfc(-lo / SQRT_2) + libm::erfc(hi / SQRT_2))
    }
}

/// Gaussian mass of each of `n` equal cells of `range` for a point at `center`.
fn axis_masses(center: f64, range: (f64, f64), sigma: f64, n: usize, out: &mut Vec<f64>) {
    out.clear();
    let width = (range.1 - range.0) / n as f64;
    let mut lo = (range.0 - center) / sigma;
    for i in 0..n {
        let hi = (range.0 + (i + 1) as f64 * width - center) / sigma;
        out.push(normal_mass(lo, hi));
        lo = hi;
    }
}

/// Persistence image of the `dim`-dimensional part of `dg`; `n²` values.
pub fn persistence_image(dg: &PersistenceDiagram, dim: usize, cfg: &PiConfig) -> Result<Vec<f64>> {
    let grid = cfg
        .grids
        .get(dim)
        .ok_or_else(|| Error::invalid(format!("no image window for dimension {dim}")))?;
    let n = cfg.resolution;
    let mut image = vec![0.0; n * n];
    let (mut bx, mut py) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for p in dg.in_dim(dim) {
        let pers = p.persistence();
        let w = cfg.weight.weight(pers);
        if w == 0.0 {
            continue;
        }
        axis_masses(p.birth, grid.birth, grid.sigma, n, &mut bx);
        axis_masses(pers, grid.persistence, grid.sigma, n, &mut py);
        for (row, &my) in py.iter().enumerate() {
            let my = w * my;
            if my == 0.0 {
                continue;
            }
            for (cell, &mx) in image[row * n..(row + 1) * n].iter_mut().zip(&bx) {
                *cell += my * mx;
            }
        }
    }
    Ok(image)
}

/// Everything that decides how a link is turned into diagrams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureOptions {
    pub scheme: LabelScheme,
    pub centers: CenterPolicy,
    /// Mixed into the per-subgraph seed for random centers.
    pub center_seed: u64,
    pub max_hom_dim: usize,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            scheme: LabelScheme::DegreeDrnl,
            centers: CenterPolicy::Target,
            center_seed: 0,
            max_hom_dim: 0,
        }
    }
}

/// Diagrams of one subgraph without and with the target link.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagramPair {
    pub without_link: PersistenceDiagram,
    pub with_link: PersistenceDiagram,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for one subgraph's random centers, invariant under swapping the target pair together
/// with its radii.
fn subgraph_seed(base: u64, sub: &EnclosingSubgraph) -> u64 {
    let (u, v) = (
        sub.local_to_global[sub.target.0],
        sub.local_to_global[sub.target.1],
    );
    let (Angle { k, l }, (lo, hi)) = (sub.angle, (u.min(v), u.max(v)));
    let (r_lo, r_hi) = if u <= v { (k, l) } else { (l, k) };
    [lo as u64, hi as u64, r_lo as u64, r_hi as u64]
        .into_iter()
        .fold(splitmix(base), |h, x| splitmix(h ^ x))
}

/// Labels, weights and diagrams of `sub`, then the same after inserting the target link.
/// Labels are recomputed on the enlarged subgraph; centers stay fixed.
pub fn subgraph_diagrams(sub: &EnclosingSubgraph, opts: &FeatureOptions) -> Result<DiagramPair> {
    let centers = match opts.centers {
        CenterPolicy::Target => sub.target,
        CenterPolicy::Random => random_centers(sub, subgraph_seed(opts.center_seed, sub))?,
    };
    let diagram = |s: &EnclosingSubgraph| -> Result<PersistenceDiagram> {
        let labels = label_nodes(s, opts.scheme, centers)?;
        let weights = edge_weights(s, &labels)?;
        diagram_for(s, &weights, opts.max_hom_dim)
    };
    let without_link = diagram(sub)?;
    let with_link = diagram(&add_target_link(sub)?)?;
    Ok(DiagramPair {
        without_link,
        with_link,
    })
}

/// Diagram pairs for `angle` and, when `k != l`, for the mirrored angle as well.
pub fn link_diagrams(
    nbhd: &TargetNeighborhood<'_>,
    angle: Angle,
    opts: &FeatureOptions,
) -> Result<Vec<DiagramPair>> {
    let mut angles = vec![angle];
    if !angle.is_symmetric() {
        angles.push(angle.swapped());
    }
    angles
        .into_iter()
        .map(|a| subgraph_diagrams(&nbhd.extract(a)?, opts))
        .collect()
}

/// `[x- | x+]` with dims `0..=d` inside each half, averaged over the given diagram pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The without-link half.
    pub fn without_link(&self) -> &[f64] {
        &self.values[..self.values.len() / 2]
    }

    pub fn with_link(&self) -> &[f64] {
        &self.values[self.values.len() / 2..]
    }
}

pub fn features_from_diagrams(pairs: &[DiagramPair], cfg: &PiConfig) -> Result<FeatureVector> {
    if pairs.is_empty() {
        return Err(Error::invalid("no diagrams to vectorize"));
    }
    let block = cfg.image_len();
    let dims = cfg.grids.len();
    let mut values = vec![0.0; cfg.feature_len()];
    for pair in pairs {
        for (half, dg) in [&pair.without_link, &pair.with_link]
            .into_iter()
            .enumerate()
        {
            for dim in 0..dims {
                let image = persistence_image(dg, dim, cfg)?;
                let start = (half * dims + dim) * block;
                for (slot, v) in values[start..start + block].iter_mut().zip(image) {
                    *slot += v;
                }
            }
        }
    }
    if pairs.len() > 1 {
        let scale = pairs.len() as f64;
        values.iter_mut().for_each(|v| *v /= scale);
    }
    Ok(FeatureVector { values })
}

/// PHLP feature vector of the link `(u, v)` at one angle.
pub fn phlp_features(
    obs: &Graph,
    u: usize,
    v: usize,
    angle: Angle,
    opts: &FeatureOptions,
    cfg: &PiConfig,
) -> Result<FeatureVector> {
    if cfg.max_hom_dim() != opts.max_hom_dim {
        return Err(Error::invalid(format!(
            "image config covers dims 0..={} but features request 0..={}",
            cfg.max_hom_dim(),
            opts.max_hom_dim
        )));
    }
    let nbhd = TargetNeighborhood::new(obs, u, v, angle.k.max(angle.l))?;
    features_from_diagrams(&link_diagrams(&nbhd, angle, opts)?, cfg)
}

/// Header of the feature export: `u,v,label,angle_k,angle_l,f_0,...,f_{m-1}`.
pub fn write_feature_header<W: Write>(out: &mut W, feature_len: usize) -> std::io::Result<()> {
    write!(out, "u,v,label,angle_k,angle_l")?;
    for i in 0..feature_len {
        write!(out, ",f_{i}")?;
    }
    writeln!(out)
}

pub fn write_feature_row<W: Write>(
    out: &mut W,
    (u, v): (usize, usize),
    label: bool,
    angle: Angle,
    features: &[f64],
) -> std::io::Result<()> {
    write!(out, "{u},{v},{},{},{}", u8::from(label), angle.k, angle.l)?;
    for x in features {
        write!(out, ",{x}")?;
    }
    writeln!(out)
}
