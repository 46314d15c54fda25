//! Train/validation/test link splits with matched negative samples.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{canonical, Graph, NodePair};

/// Fractions of positive edges assigned to train, validation and test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.85,
            val: 0.05,
            test: 0.1,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::invalid(format!(
                "split ratios must be positive, got {all:?}"
            )));
        }
        if (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split ratios must sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }

    /// `(train, val, test)` edge counts: validation and test are floored, train takes the rest.
    pub fn counts(&self, num_edges: usize) -> (usize, usize, usize) {
        let floor = |r: f64| (r * num_edges as f64 + 1e-9).floor() as usize;
        let val = floor(self.val);
        let test = floor(self.test);
        (num_edges.saturating_sub(val + test), val, test)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitKind {
    Train,
    Val,
    Test,
}

impl SplitKind {
    pub const ALL: [SplitKind; 3] = [SplitKind::Train, SplitKind::Val, SplitKind::Test];

    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Val => "val",
            SplitKind::Test => "test",
        }
    }
}

/// Positive and negative links of one split. Pairs are canonical (`u < v`).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinkSet {
    pub pos: Vec<NodePair>,
    pub neg: Vec<NodePair>,
}

impl LinkSet {
    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Positives first, then negatives, each with its label.
    pub fn labeled(&self) -> impl Iterator<Item = (NodePair, bool)> + '_ {
        self.pos
            .iter()
            .map(|&p| (p, true))
            .chain(self.neg.iter().map(|&p| (p, false)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSplit {
    /// Graph holding exactly the training positives; all features are extracted from it.
    pub observed: Graph,
    pub train: LinkSet,
    pub val: LinkSet,
    pub test: LinkSet,
    pub seed: u64,
}

impl LinkSplit {
    pub fn get(&self, kind: SplitKind) -> &LinkSet {
        match kind {
            SplitKind::Train => &self.train,
            SplitKind::Val => &self.val,
            SplitKind::Test => &self.test,
        }
    }

    /// Writes `train.csv`, `val.csv` and `test.csv` (header `u,v,label`) plus `split.meta`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for kind in SplitKind::ALL {
            let path = dir.join(format!("{}.csv", kind.name()));
            let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut out = BufWriter::new(file);
            writeln!(out, "u,v,label")?;
            for ((u, v), label) in self.get(kind).labeled() {
                writeln!(out, "{u},{v},{}", u8::from(label))?;
            }
            out.flush()?;
        }
        let meta = dir.join("split.meta");
        fs::write(
            &meta,
            format!(
                "seed={}\nnum_nodes={}\n",
                self.seed,
                self.observed.num_nodes()
            ),
        )
        .map_err(|e| Error::io(&meta, e))?;
        Ok(())
    }

    /// Reloads a split written by [`LinkSplit::write_dir`].
    pub fn read_dir(dir: &Path) -> Result<Self> {
        let meta_path = dir.join("split.meta");
        let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut seed = None;
        let mut num_nodes = None;
        for (i, line) in meta.lines().enumerate() {
            let parse_err = || Error::Parse {
                line: i + 1,
                message: format!("bad split.meta entry {line:?}"),
            };
            match line.split_once('=') {
                Some(("seed", v)) => seed = Some(v.trim().parse().map_err(|_| parse_err())?),
                Some(("num_nodes", v)) => {
                    num_nodes = Some(v.trim().parse().map_err(|_| parse_err())?)
                }
                _ if line.trim().is_empty() => {}
                _ => return Err(parse_err()),
            }
        }
        let (Some(seed), Some(num_nodes)) = (seed, num_nodes) else {
            return Err(Error::invalid("split.meta lacks seed or num_nodes"));
        };

        let mut sets = Vec::new();
        for kind in SplitKind::ALL {
            let path = dir.join(format!("{}.csv", kind.name()));
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            sets.push(read_link_csv(BufReader::new(file), num_nodes)?);
        }
        let test = sets.pop().unwrap();
        let val = sets.pop().unwrap();
        let train = sets.pop().unwrap();
        let observed = Graph::from_edges(num_nodes, train.pos.iter().copied())?;
        Ok(Self {
            observed,
            train,
            val,
            test,
            seed,
        })
    }
}

fn read_link_csv<R: BufRead>(source: R, num_nodes: usize) -> Result<LinkSet> {
    let mut set = LinkSet::default();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "u,v,label" {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("expected header u,v,label, found {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse {
            line: i + 1,
            message: format!("expected u,v,label, found {line:?}"),
        };
        let fields: Vec<&str> = line.trim().split(',').collect();
        let [u, v, label] = fields[..] else {
            return Err(bad());
        };
        let u: usize = u.parse().map_err(|_| bad())?;
        let v: usize = v.parse().map_err(|_| bad())?;
        if u >= num_nodes || v >= num_nodes || u == v {
            return Err(bad());
        }
        match label {
            "1" => set.pos.push(canonical(u, v)),
            "0" => set.neg.push(canonical(u, v)),
            _ => return Err(bad()),
        }
    }
    Ok(set)
}

/// Draws `count` distinct unordered non-edges of `g`, none of them in `exclude`.
pub fn sample_negative_links(
    g: &Graph,
    count: usize,
    seed: u64,
    exclude: &HashSet<NodePair>,
) -> Result<Vec<NodePair>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_negatives_with(g, count, exclude, &mut rng)
}

fn sample_negatives_with<R: Rng>(
    g: &Graph,
    count: usize,
    exclude: &HashSet<NodePair>,
    rng: &mut R,
) -> Result<Vec<NodePair>> {
    let n = g.num_nodes();
    let all_pairs = n * n.saturating_sub(1) / 2;
    let excluded_non_edges = exclude
        .iter()
        .filter(|&&(u, v)| u != v && u < n && v < n && !g.has_edge(u, v))
        .count();
    let available = all_pairs - g.num_edges() - excluded_non_edges;
    if count > available {
        return Err(Error::Infeasible(format!(
            "requested {count} negative links but only {available} candidate pairs exist"
        )));
    }

    let usable = |p: NodePair| !g.has_edge(p.0, p.1) && !exclude.contains(&p);

    // Rejection sampling degrades once most candidates are taken; enumerate instead.
    if count * 4 > available {
        let mut pool: Vec<NodePair> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&p| usable(p))
            .collect();
        let (chosen, _) = pool.partial_shuffle(rng, count);
        return Ok(chosen.to_vec());
    }

    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let p = canonical(u, v);
        if usable(p) && seen.insert(p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Shuffles the edges of `g` into train/val/test positives and samples an equal number of
/// negatives per split. Negatives of different splits never coincide.
pub fn split_links(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<LinkSplit> {
    ratios.validate()?;
    let (n_train, n_val, n_test) = ratios.counts(g.num_edges());
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Infeasible(format!(
            "{} edges cannot give every split at least one edge (train {n_train}, val {n_val}, test {n_test})",
            g.num_edges()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges().to_vec();
    edges.shuffle(&mut rng);
    let test_pos = edges[..n_test].to_vec();
    let val_pos = edges[n_test..n_test + n_val].to_vec();
    let train_pos = edges[n_test + n_val..].to_vec();

    let mut taken = HashSet::new();
    let mut negatives = Vec::new();
    for count in [n_train, n_val, n_test] {
        let neg = sample_negatives_with(g, count, &taken, &mut rng)?;
        taken.extend(neg.iter().copied());
        negatives.push(neg);
    }
    let test_neg = negatives.pop().unwrap();
    let val_neg = negatives.pop().unwrap();
    let train_neg = negatives.pop().unwrap();

    let observed = Graph::from_edges(g.num_nodes(), train_pos.iter().copied())?;
    Ok(LinkSplit {
        observed,
        train: LinkSet {
            pos: train_pos,
            neg: train_neg,
        },
        val: LinkSet {
            pos: val_pos,
            neg: val_neg,
        },
        test: LinkSet {
            pos: test_pos,
            neg: test_neg,
        },
        seed,
    })
}
