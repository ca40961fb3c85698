//! Regular multigraphs with self-loops, ground-truth partitions and exact
//! contractions.
//!
//! Adjacency is stored as a symmetric multiplicity matrix `A` kept sparse per
//! row. `A[v][v]` holds the self-loop half-edge weight directly, so every row
//! sums to the degree `d`. A loop edge produced by a random matching adds 2 to
//! `A[v][v]`; regularization adds exactly the degree deficit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// A `d`-regular multigraph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    d: usize,
    /// Row `v` of `A`, sorted by neighbour, including the `(v, loop)` entry.
    rows: Vec<Vec<(u32, u32)>>,
    /// `d` half-edge endpoints per vertex, row-major. Used for walk steps.
    ports: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. `(v, v)` is a loop and adds 2 to
    /// `A[v][v]`. Every row must already sum to `d`.
    pub fn from_edges<I>(n: usize, d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let acc = Self::accumulate(n, edges)?;
        Self::from_rows(n, d, acc, false)
    }

    /// Like [`Graph::from_edges`] but pads every row with self-loop weight up
    /// to `d`. Fails if some vertex already has degree above `d`.
    pub fn regularized<I>(n: usize, d: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let acc = Self::accumulate(n, edges)?;
        Self::from_rows(n, d, acc, true)
    }

    /// Builds from explicit multiplicities: `(u, v, m)` with `u != v` and a
    /// per-vertex loop weight.
    pub fn from_multiplicities(
        n: usize,
        d: usize,
        entries: &[(Vertex, Vertex, u32)],
        loops: &[u32],
    ) -> Result<Self> {
        if loops.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: loops.len(),
            });
        }
        let mut acc: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n];
        for &(u, v, m) in entries {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!(
                    "loop ({u}, {u}) must be given as loop weight"
                )));
            }
            *acc[u].entry(v as u32).or_default() += m;
            *acc[v].entry(u as u32).or_default() += m;
        }
        for (v, &w) in loops.iter().enumerate() {
            if w > 0 {
                *acc[v].entry(v as u32).or_default() += w;
            }
        }
        Self::from_rows(n, d, acc, false)
    }

    fn accumulate<I>(n: usize, edges: I) -> Result<Vec<std::collections::BTreeMap<u32, u32>>>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut acc: Vec<std::collections::BTreeMap<u32, u32>> = vec![Default::default(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                *acc[u].entry(u as u32).or_default() += 2;
            } else {
                *acc[u].entry(v as u32).or_default() += 1;
                *acc[v].entry(u as u32).or_default() += 1;
            }
        }
        Ok(acc)
    }

    fn from_rows(
        n: usize,
        d: usize,
        mut acc: Vec<std::collections::BTreeMap<u32, u32>>,
        pad: bool,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGraph("degree must be positive".into()));
        }
        let mut rows = Vec::with_capacity(n);
        let mut ports = Vec::with_capacity(n * d);
        for (v, row) in acc.iter_mut().enumerate() {
            let deg: usize = row.values().map(|&m| m as usize).sum();
            if deg > d || (!pad && deg != d) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} has degree {deg}, expected {d}"
                )));
            }
            if deg < d {
                *row.entry(v as u32).or_default() += (d - deg) as u32;
            }
            let r: Vec<(u32, u32)> = row.iter().map(|(&u, &m)| (u, m)).collect();
            for &(u, m) in &r {
                ports.extend(std::iter::repeat(u).take(m as usize));
            }
            rows.push(r);
        }
        let g = Graph { n, d, rows, ports };
        debug_assert!(g.is_symmetric());
        Ok(g)
    }

    fn is_symmetric(&self) -> bool {
        (0..self.n).all(|v| {
            self.rows[v]
                .iter()
                .all(|&(u, m)| self.multiplicity(u as usize, v) == m)
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Row `v` of `A` as `(neighbour, multiplicity)` pairs, loop included.
    pub fn row(&self, v: Vertex) -> &[(u32, u32)] {
        &self.rows[v]
    }

    /// The `d` half-edge endpoints of `v`.
    pub fn ports(&self, v: Vertex) -> &[u32] {
        &self.ports[v * self.d..(v + 1) * self.d]
    }

    pub fn multiplicity(&self, u: Vertex, v: Vertex) -> u32 {
        match self.rows[u].binary_search_by_key(&(v as u32), |&(w, _)| w) {
            Ok(i) => self.rows[u][i].1,
            Err(_) => 0,
        }
    }

    pub fn loop_weight(&self, v: Vertex) -> u32 {
        self.multiplicity(v, v)
    }

    /// Non-loop edges `(u, v, m)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex, u32)> + '_ {
        self.rows.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .filter(move |&&(v, _)| (v as usize) > u)
                .map(move |&(v, m)| (u, v as usize, m))
        })
    }

    /// Number of non-loop edges counted with multiplicity.
    pub fn edge_count(&self) -> u64 {
        self.edges().map(|(_, _, m)| m as u64).sum()
    }

    /// Same graph with vertex `v` renamed to `perm[v]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: perm.len(),
            });
        }
        let entries: Vec<_> = self
            .edges()
            .map(|(u, v, m)| (perm[u], perm[v], m))
            .collect();
        let mut loops = vec![0; self.n];
        for v in 0..self.n {
            loops[perm[v]] = self.loop_weight(v);
        }
        Self::from_multiplicities(self.n, self.d, &entries, &loops)
    }

    pub fn adjacency_dense(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for (v, row) in self.rows.iter().enumerate() {
            for &(u, m) in row {
                a[(v, u as usize)] = m as f64;
            }
        }
        a
    }

    /// Subgraph induced on `members`, renumbered `0..members.len()` in the given
    /// order and padded back to degree `d` with self-loops.
    pub fn induced_regularized(&self, members: &[Vertex]) -> Result<Self> {
        let index = membership_index(self.n, members)?;
        let mut entries = Vec::new();
        for (a, &u) in members.iter().enumerate() {
            for &(v, m) in &self.rows[u] {
                if let Some(b) = index[v as usize] {
                    if a < b {
                        entries.push((a, b, m));
                    }
                }
            }
        }
        let mut loops = vec![0u32; members.len()];
        for (a, &u) in members.iter().enumerate() {
            let inside: u32 = self.rows[u]
                .iter()
                .filter(|&&(v, _)| v as usize != u && index[v as usize].is_some())
                .map(|&(_, m)| m)
                .sum();
            loops[a] = self.d as u32 - inside;
        }
        Self::from_multiplicities(members.len(), self.d, &entries, &loops)
    }
}

fn membership_index(n: usize, members: &[Vertex]) -> Result<Vec<Option<usize>>> {
    let mut index = vec![None; n];
    for (i, &v) in members.iter().enumerate() {
        if v >= n {
            return Err(Error::InvalidGraph(format!("vertex {v} out of range")));
        }
        if index[v].is_some() {
            return Err(Error::InvalidGraph(format!("vertex {v} listed twice")));
        }
        index[v] = Some(i);
    }
    Ok(index)
}

fn mask(n: usize, set: &[Vertex]) -> Result<Vec<bool>> {
    let mut m = vec![false; n];
    for &v in set {
        if v >= n {
            return Err(Error::InvalidGraph(format!("vertex {v} out of range")));
        }
        m[v] = true;
    }
    Ok(m)
}

/// Ground-truth clustering: a label in `0..k` per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<u32>,
    k: usize,
}

impl Partition {
    pub fn new(labels: Vec<u32>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for (v, &l) in labels.iter().enumerate() {
            if l as usize >= k {
                return Err(Error::Parameter(format!(
                    "vertex {v} has label {l} outside 0..{k}"
                )));
            }
            seen[l as usize] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Parameter(format!("cluster {i} is empty")));
        }
        Ok(Partition { labels, k })
    }

    pub fn single(n: usize) -> Self {
        Partition {
            labels: vec![0; n],
            k: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: Vertex) -> usize {
        self.labels[v] as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l as usize] += 1;
        }
        s
    }

    pub fn members(&self, i: usize) -> Vec<Vertex> {
        self.labels
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l as usize == i)
            .map(|(v, _)| v)
            .collect()
    }

    /// Ratio of the smallest to the largest cluster size.
    pub fn eta(&self) -> f64 {
        let s = self.sizes();
        let min = *s.iter().min().unwrap() as f64;
        let max = *s.iter().max().unwrap() as f64;
        min / max
    }

    /// The vector that is `z[i]` on every vertex of cluster `i`.
    pub fn extend(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: z.len(),
            });
        }
        Ok(self.labels.iter().map(|&l| z[l as usize]).collect())
    }

    /// Labels after renaming vertex `v` to `perm[v]`.
    pub fn permuted(&self, perm: &[Vertex]) -> Self {
        let mut labels = vec![0; self.labels.len()];
        for (v, &l) in self.labels.iter().enumerate() {
            labels[perm[v]] = l;
        }
        Partition { labels, k: self.k }
    }
}

/// Vertex- and edge-weighted graph on `0..k`. Produced exactly by
/// [`contract`] or assembled from estimated weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractedGraph {
    weights: DMatrix<f64>,
    sizes: Vec<f64>,
}

/// The estimator-side view of a contraction: possibly estimated edge weights
/// and estimated cluster sizes.
pub type WeightedQ = ContractedGraph;

impl ContractedGraph {
    pub fn new(weights: DMatrix<f64>, sizes: Vec<f64>) -> Result<Self> {
        let k = sizes.len();
        if weights.nrows() != k || weights.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: weights.nrows(),
            });
        }
        for i in 0..k {
            if !(sizes[i] > 0.0) {
                return Err(Error::Parameter(format!("vertex weight {i} must be positive")));
            }
            if weights[(i, i)] != 0.0 {
                return Err(Error::Parameter("diagonal edge weight must be zero".into()));
            }
            for j in 0..k {
                let w = weights[(i, j)];
                if !(w >= 0.0) || w != weights[(j, i)] {
                    return Err(Error::Parameter(format!(
                        "edge weight ({i}, {j}) must be nonnegative and symmetric"
                    )));
                }
            }
        }
        Ok(ContractedGraph { weights, sizes })
    }

    /// Reads `W = -offdiag(L)` off a Laplacian, clamping round-off negatives.
    pub fn from_laplacian(lap: &DMatrix<f64>, sizes: Vec<f64>) -> Result<Self> {
        let k = lap.nrows();
        let w = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                0.0
            } else {
                (-(lap[(i, j)] + lap[(j, i)]) / 2.0).max(0.0)
            }
        });
        Self::new(w, sizes)
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    /// `D - W`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let k = self.k();
        let mut l = -self.weights.clone();
        for i in 0..k {
            l[(i, i)] = self.weights.row(i).sum();
        }
        l
    }

    pub fn with_sizes(&self, sizes: Vec<f64>) -> Result<Self> {
        Self::new(self.weights.clone(), sizes)
    }
}

/// `|E(S, V \ S)|`, counted with multiplicity. Loops never cross.
pub fn cut_weight(g: &Graph, s: &[Vertex]) -> Result<u64> {
    let m = mask(g.n(), s)?;
    let count = m.iter().filter(|&&b| b).count();
    if count == 0 || count == g.n() {
        return Err(Error::EmptyOrFullSet);
    }
    Ok(boundary(g, &m, |_| true))
}

fn boundary(g: &Graph, inside: &[bool], within: impl Fn(usize) -> bool) -> u64 {
    let mut total = 0u64;
    for (u, &is_in) in inside.iter().enumerate() {
        if !is_in {
            continue;
        }
        for &(v, m) in g.row(u) {
            let v = v as usize;
            if !inside[v] && within(v) {
                total += m as u64;
            }
        }
    }
    total
}

/// Conductance of `s` within `c`: `|E(s, c \ s)| / (d |s|)`.
pub fn conductance(g: &Graph, c: &[Vertex], s: &[Vertex]) -> Result<f64> {
    let cm = mask(g.n(), c)?;
    let sm = mask(g.n(), s)?;
    if s.is_empty() {
        return Err(Error::EmptyOrFullSet);
    }
    if s.iter().any(|&v| !cm[v]) {
        return Err(Error::NotSubset);
    }
    let size = sm.iter().filter(|&&b| b).count();
    let e = boundary(g, &sm, |v| cm[v]);
    Ok(e as f64 / (g.d() as f64 * size as f64))
}

/// `|E(c, V \ c)| / (d |c|)`.
pub fn outer_conductance(g: &Graph, c: &[Vertex]) -> Result<f64> {
    let all: Vec<Vertex> = (0..g.n()).collect();
    conductance(g, &all, c)
}

/// A certified enclosure `[lo, hi]` of a conductance value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Largest set handled by exhaustive search in [`inner_conductance`].
pub const EXACT_INNER_LIMIT: usize = 20;

/// Inner conductance of `c`. Exhaustive for `|c| <= 20`, otherwise the Cheeger
/// interval `[λ₂/2, √(2λ₂)]` of the induced subgraph padded with self-loops.
pub fn inner_conductance(g: &Graph, c: &[Vertex]) -> Result<Interval> {
    if c.is_empty() {
        return Err(Error::EmptyOrFullSet);
    }
    if c.len() == 1 {
        return Ok(Interval { lo: 1.0, hi: 1.0 });
    }
    let sub = g.induced_regularized(c)?;
    let m = sub.n();
    if m <= EXACT_INNER_LIMIT {
        let d = sub.d() as f64;
        let mut best = f64::INFINITY;
        for bits in 1u32..(1u32 << m) {
            let size = bits.count_ones() as usize;
            if 2 * size > m {
                continue;
            }
            let mut e = 0u64;
            for u in 0..m {
                if bits >> u & 1 == 0 {
                    continue;
                }
                for &(v, mult) in sub.row(u) {
                    if bits >> v & 1 == 0 {
                        e += mult as u64;
                    }
                }
            }
            best = best.min(e as f64 / (d * size as f64));
        }
        return Ok(Interval { lo: best, hi: best });
    }
    let vals = crate::spectral::normalized_laplacian_eigenvalues(&sub, usize::MAX)?;
    let l2 = vals[1].max(0.0);
    if l2 < 1e-12 {
        return Ok(Interval { lo: 0.0, hi: 0.0 });
    }
    Ok(Interval {
        lo: l2 / 2.0,
        hi: (2.0 * l2).sqrt().min(1.0),
    })
}

/// Exact contraction: `W(i, j) = |E(C_i, C_j)|`, `w(i) = |C_i|`.
pub fn contract(g: &Graph, p: &Partition) -> Result<ContractedGraph> {
    if p.n() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: p.n(),
        });
    }
    let k = p.k();
    let mut w = DMatrix::zeros(k, k);
    for (u, v, m) in g.edges() {
        let (a, b) = (p.label(u), p.label(v));
        if a != b {
            w[(a, b)] += m as f64;
            w[(b, a)] += m as f64;
        }
    }
    let sizes = p.sizes().into_iter().map(|s| s as f64).collect();
    ContractedGraph::new(w, sizes)
}

/// `Σ_{u<v} A[u][v] (x_u − x_v)²`, i.e. `xᵀ(dI − A)x`.
pub fn laplacian_quadratic(g: &Graph, x: &[f64]) -> Result<f64> {
    if x.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: x.len(),
        });
    }
    Ok(g.edges()
        .map(|(u, v, m)| {
            let diff = x[u] - x[v];
            m as f64 * diff * diff
        })
        .sum())
}



#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn random_regular(n: usize, d: usize, seed: u64) -> Graph {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut half: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        half.shuffle(&mut rng);
        Graph::from_edges(n, d, half.chunks(2).map(|c| (c[0], c[1]))).unwrap()
    }

    proptest! {
        #[test]
        fn cut_symmetry_and_indicator(seed in 0u64..1000, bits in proptest::collection::vec(any::<bool>(), 16)) {
            let g = random_regular(16, 4, seed);
            let s: Vec<usize> = (0..16).filter(|&v| bits[v]).collect();
            let c: Vec<usize> = (0..16).filter(|&v| !bits[v]).collect();
            prop_assume!(!s.is_empty() && !c.is_empty());
            let a = cut_weight(&g, &s).unwrap();
            prop_assert_eq!(a, cut_weight(&g, &c).unwrap());
            let ind: Vec<f64> = (0..16).map(|v| if bits[v] { 1.0 } else { 0.0 }).collect();
            prop_assert_eq!(laplacian_quadratic(&g, &ind).unwrap(), a as f64);
        }

        #[test]
        fn extension_matches_contracted_form(seed in 0u64..1000, labels in proptest::collection::vec(0u32..3, 12), z in proptest::collection::vec(-5i32..5, 3)) {
            let g = random_regular(12, 4, seed);
            let mut labels = labels;
            labels[0] = 0; labels[1] = 1; labels[2] = 2;
            let p = Partition::new(labels, 3).unwrap();
            let h = contract(&g, &p).unwrap();
            let z: Vec<f64> = z.into_iter().map(f64::from).collect();
            let zv = nalgebra::DVector::from_row_slice(&z);
            let lhs = (zv.transpose() * h.laplacian() * &zv)[(0, 0)];
            prop_assert_eq!(lhs, laplacian_quadratic(&g, &p.extend(&z).unwrap()).unwrap());
        }
    }
}
