//! Flag filtrations of edge-weighted subgraphs and their persistence diagrams.
//!
//! Vertices enter at 0, edges at their weight and triangles at the largest weight of their
//! three edges. Classes that never die are reported as essential with their death set to
//! the diagram's `cap`, the largest filtration value (0 for an edgeless subgraph).

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::labeling::EdgeWeights;
use crate::subgraph::EnclosingSubgraph;

const NO_VERTEX: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Simplex {
    vertices: [usize; 3],
    pub dim: usize,
    pub value: f64,
}

impl Simplex {
    fn new(vertices: &[usize], value: f64) -> Self {
        let mut v = [NO_VERTEX; 3];
        v[..vertices.len()].copy_from_slice(vertices);
        v[..vertices.len()].sort_unstable();
        Self {
            vertices: v,
            dim: vertices.len() - 1,
            value,
        }
    }

    /// Sorted vertex ids.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices[..=self.dim]
    }

    fn order(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// Simplices sorted by (value, dimension, vertex tuple).
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    pub simplices: Vec<Simplex>,
    pub max_dim: usize,
}

impl Filtration {
    /// Builds a filtration from arbitrary simplices, sorting them. Monotonicity is checked by
    /// [`persistence_reduce`], not here.
    pub fn from_simplices(
        simplices: impl IntoIterator<Item = (Vec<usize>, f64)>,
        max_dim: usize,
    ) -> Result<Self> {
        let mut out = Vec::new();
        for (vertices, value) in simplices {
            if vertices.is_empty() || vertices.len() > 3 || vertices.len() > max_dim + 1 {
                return Err(Error::invalid(format!(
                    "simplex {vertices:?} exceeds dimension {max_dim}"
                )));
            }
            out.push(Simplex::new(&vertices, value));
        }
        out.sort_by(Simplex::order);
        Ok(Self {
            simplices: out,
            max_dim,
        })
    }

    pub fn max_value(&self) -> f64 {
        self.simplices.iter().map(|s| s.value).fold(0.0, f64::max)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim == dim).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
    pub dim: usize,
    pub essential: bool,
}

impl PersistencePair {
    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceDiagram {
    /// Sorted by (dim, birth, death, essential).
    pub pairs: Vec<PersistencePair>,
    /// Death value given to essential classes.
    pub cap: f64,
}

impl PersistenceDiagram {
    pub fn new(mut pairs: Vec<PersistencePair>, cap: f64) -> Self {
        pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
                .then(a.essential.cmp(&b.essential))
        });
        Self { pairs, cap }
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &PersistencePair> + '_ {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Restriction to one homology dimension.
    pub fn dimension(&self, dim: usize) -> PersistenceDiagram {
        PersistenceDiagram {
            pairs: self.in_dim(dim).copied().collect(),
            cap: self.cap,
        }
    }

    /// Disjoint union; the cap is the larger of the two.
    pub fn merged(&self, other: &PersistenceDiagram) -> PersistenceDiagram {
        let pairs = self.pairs.iter().chain(&other.pairs).copied().collect();
        PersistenceDiagram::new(pairs, self.cap.max(other.cap))
    }

    /// Writes `birth,death,dim,essential` rows.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "birth,death,dim,essential")?;
        for p in &self.pairs {
            writeln!(
                out,
                "{},{},{},{}",
                p.birth,
                p.death,
                p.dim,
                u8::from(p.essential)
            )?;
        }
        Ok(())
    }
}

/// Flag filtration of `sub` up to `max_dim` (1 = edges, 2 = edges and triangles).
pub fn build_flag_filtration(
    sub: &EnclosingSubgraph,
    weights: &EdgeWeights,
    max_dim: usize,
) -> Result<Filtration> {
    if !(1..=2).contains(&max_dim) {
        return Err(Error::invalid(format!(
            "flag filtration dimension must be 1 or 2, got {max_dim}"
        )));
    }
    let g = &sub.graph;
    let edges = g.edges();
    if weights.weights.len() != edges.len() {
        return Err(Error::DimensionMismatch {
            expected: edges.len(),
            actual: weights.weights.len(),
        });
    }

    let mut simplices: Vec<Simplex> = (0..g.num_nodes())
        .map(|v| Simplex::new(&[v], 0.0))
        .collect();
    simplices.extend(
        edges
            .iter()
            .zip(&weights.weights)
            .map(|(&(a, b), &w)| Simplex::new(&[a, b], w)),
    );

    if max_dim == 2 {
        let weight_of = |a: usize, b: usize| {
            let i = edges.binary_search(&(a, b)).expect("triangle edge present");
            weights.weights[i]
        };
        for (i, &(a, b)) in edges.iter().enumerate() {
            let (na, nb) = (g.neighbors(a), g.neighbors(b));
            let (mut x, mut y) = (0, 0);
            while x < na.len() && y < nb.len() {
                match na[x].cmp(&nb[y]) {
                    Ordering::Less => x += 1,
                    Ordering::Greater => y += 1,
                    Ordering::Equal => {
                        let c = na[x];
                        if c > b {
                            let value =
                                weights.weights[i].max(weight_of(a, c)).max(weight_of(b, c));
                            simplices.push(Simplex::new(&[a, b, c], value));
                        }
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
    }

    simplices.sort_by(Simplex::order);
    Ok(Filtration { simplices, max_dim })
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Zero-dimensional persistence by a union-find sweep over edges in weight order.
pub fn persistence_dim0(sub: &EnclosingSubgraph, weights: &EdgeWeights) -> PersistenceDiagram {
    let edges = sub.graph.edges();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by(|&i, &j| {
        weights.weights[i]
            .total_cmp(&weights.weights[j])
            .then(i.cmp(&j))
    });

    let n = sub.num_nodes();
    let cap = weights.max();
    let mut uf = UnionFind::new(n);
    let mut pairs = Vec::with_capacity(n);
    for i in order {
        let (a, b) = edges[i];
        if uf.union(a, b) {
            pairs.push(PersistencePair {
                birth: 0.0,
                death: weights.weights[i],
                dim: 0,
                essential: false,
            });
        }
    }
    let components = n - pairs.len();
    pairs.extend((0..components).map(|_| PersistencePair {
        birth: 0.0,
        death: cap,
        dim: 0,
        essential: true,
    }));
    PersistenceDiagram::new(pairs, cap)
}

fn add_column(target: &mut Vec<usize>, source: &[usize], scratch: &mut Vec<usize>) {
    scratch.clear();
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        match target[i].cmp(&source[j]) {
            Ordering::Less => {
                scratch.push(target[i]);
                i += 1;
            }
            Ordering::Greater => {
                scratch.push(source[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Boundary-matrix reduction over GF(2) with clearing. Reports classes in dimensions
/// `0..max_dim`; zero-persistence pairs are kept.
pub fn persistence_reduce(f: &Filtration) -> Result<PersistenceDiagram> {
    let simplices = &f.simplices;
    let mut index: HashMap<&[usize], usize> = HashMap::with_capacity(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        if index.insert(s.vertices(), i).is_some() {
            return Err(Error::invalid(format!(
                "duplicate simplex {:?}",
                s.vertices()
            )));
        }
    }

    // Boundary columns as sorted filtration indices.
    let mut boundary: Vec<Vec<usize>> = Vec::with_capacity(simplices.len());
    for (i, s) in simplices.iter().enumerate() {
        let mut col = Vec::with_capacity(s.dim + 1);
        if s.dim > 0 {
            let v = s.vertices();
            for skip in 0..v.len() {
                let face: Vec<usize> = v
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &x)| x)
                    .collect();
                match index.get(face.as_slice()) {
                    Some(&j) if j < i && simplices[j].value <= s.value => col.push(j),
                    _ => return Err(Error::NonMonotoneFiltration { index: i }),
                }
            }
            col.sort_unstable();
        }
        boundary.push(col);
    }

    let n = simplices.len();
    let mut pivot_owner: Vec<Option<usize>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut is_birth_paired = vec![false; n];
    let mut pairs = Vec::new();
    let mut scratch = Vec::new();

    for dim in (1..=f.max_dim).rev() {
        for j in 0..n {
            if simplices[j].dim != dim || cleared[j] {
                continue;
            }
            let mut col = std::mem::take(&mut boundary[j]);
            while let Some(&low) = col.last() {
                match pivot_owner[low] {
                    Some(owner) => add_column(&mut col, &boundary[owner], &mut scratch),
                    None => break,
                }
            }
            if let Some(&low) = col.last() {
                pivot_owner[low] = Some(j);
                cleared[low] = true;
                is_birth_paired[low] = true;
                pairs.push(PersistencePair {
                    birth: simplices[low].value,
                    death: simplices[j].value,
                    dim: dim - 1,
                    essential: false,
                });
            }
            boundary[j] = col;
        }
    }

    let cap = f.max_value();
    for (i, s) in simplices.iter().enumerate() {
        // Positive simplices reduce to zero; cleared ones are already paired as births.
        let positive = s.dim == 0 || boundary[i].is_empty();
        if s.dim < f.max_dim && positive && !is_birth_paired[i] {
            pairs.push(PersistencePair {
                birth: s.value,
                death: cap,
                dim: s.dim,
                essential: true,
            });
        }
    }
    Ok(PersistenceDiagram::new(pairs, cap))
}

/// Diagrams in dimensions `0..=max_hom_dim` (0 or 1) for a weighted subgraph.
pub fn diagram_for(
    sub: &EnclosingSubgraph,
    weights: &EdgeWeights,
    max_hom_dim: usize,
) -> Result<PersistenceDiagram> {
    match max_hom_dim {
        0 => Ok(persistence_dim0(sub, weights)),
        1 => persistence_reduce(&build_flag_filtration(sub, weights, 2)?),
        d => Err(Error::invalid(format!(
            "homology dimension {d} unsupported; use 0 or 1"
        ))),
    }
}
