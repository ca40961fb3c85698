//! Clusterable instance generators.
//!
//! Clusters are drawn from a two-round configuration model whose second-round
//! half-edges may be marked red. Red edges are later crossed pairwise between
//! clusters that are adjacent in a small template graph, which plants a fixed
//! number of inter-cluster edges without changing any degree.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, Vertex};
use crate::spectral;

pub type EdgeId = usize;

/// A configuration-model multigraph with its red-edge markings.
#[derive(Debug, Clone)]
pub struct ConfigGraph {
    n: usize,
    d: usize,
    edges: Vec<(u32, u32)>,
    /// First edge id produced by the second matching round.
    round2_start: usize,
    red: Vec<bool>,
    red_half_edges: usize,
}

/// Two-round configuration model. Round 1 matches `d − 1` half-edges per
/// vertex uniformly; round 2 matches the last half-edge, each marked red
/// independently with probability `delta · d`.
pub fn config_model<R: Rng + ?Sized>(n: usize, d: usize, delta: f64, rng: &mut R) -> Result<ConfigGraph> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::Parity(format!(
            "round 2 needs an even number of half-edges, got n = {n}"
        )));
    }
    if (n * (d - 1).max(0)) % 2 == 1 {
        return Err(Error::Parity(format!("n(d − 1) = {} is odd", n * (d - 1))));
    }
    if d < 2 {
        return Err(Error::Parameter(format!("degree {d} too small")));
    }
    let p = delta * d as f64;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "red probability delta·d = {p} outside [0, 1]"
        )));
    }
    if d < 4 || d % 2 == 1 {
        log::warn!("config model expects an even degree of at least 4, got {d}");
    }
    if delta >= 1.0 / (100.0 * d as f64) {
        log::debug!("delta = {delta} is above the 1/(100d) regime");
    }

    let mut half: Vec<u32> = (0..n as u32)
        .flat_map(|v| std::iter::repeat(v).take(d - 1))
        .collect();
    half.shuffle(rng);
    let mut edges: Vec<(u32, u32)> = half.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let round2_start = edges.len();

    let mut last: Vec<(u32, bool)> = (0..n as u32).map(|v| (v, rng.gen_bool(p))).collect();
    let red_half_edges = last.iter().filter(|h| h.1).count();
    last.shuffle(rng);
    let mut red = vec![false; round2_start];
    for c in last.chunks_exact(2) {
        edges.push((c[0].0, c[1].0));
        red.push(c[0].1 || c[1].1);
    }
    Ok(ConfigGraph {
        n,
        d,
        edges,
        round2_start,
        red,
        red_half_edges,
    })
}

impl ConfigGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::from_edges(
            self.n,
            self.d,
            self.edges.iter().map(|&(a, b)| (a as usize, b as usize)),
        )
    }

    /// Graph made of the first-round edges only, padded with self-loops.
    pub fn round1_graph(&self) -> Result<Graph> {
        Graph::regularized(
            self.n,
            self.d,
            self.edges[..self.round2_start]
                .iter()
                .map(|&(a, b)| (a as usize, b as usize)),
        )
    }

    pub fn red_edges(&self) -> Vec<EdgeId> {
        (0..self.edges.len()).filter(|&e| self.red[e]).collect()
    }

    pub fn red_half_edges(&self) -> usize {
        self.red_half_edges
    }

    pub fn is_round2(&self, e: EdgeId) -> bool {
        e >= self.round2_start
    }

    pub fn uncolor_all(&mut self) {
        self.red.iter_mut().for_each(|r| *r = false);
    }

    fn find(&self, e: (Vertex, Vertex), skip: Option<EdgeId>) -> Option<(EdgeId, bool)> {
        let (a, b) = (e.0 as u32, e.1 as u32);
        self.edges.iter().enumerate().find_map(|(id, &(x, y))| {
            if Some(id) == skip {
                None
            } else if (x, y) == (a, b) {
                Some((id, false))
            } else if (y, x) == (a, b) {
                Some((id, true))
            } else {
                None
            }
        })
    }

    /// Replaces `e = (a, b)` and `f = (c, d)` by `(a, c)` and `(b, d)`.
    pub fn cross_edges(&mut self, e: (Vertex, Vertex), f: (Vertex, Vertex)) -> Result<()> {
        let (ei, _) = self.find(e, None).ok_or(Error::MissingEdge(e.0, e.1))?;
        let (fi, _) = self.find(f, Some(ei)).ok_or(Error::MissingEdge(f.0, f.1))?;
        self.edges[ei] = (e.0 as u32, f.0 as u32);
        self.edges[fi] = (e.1 as u32, f.1 as u32);
        self.red[ei] = false;
        self.red[fi] = false;
        Ok(())
    }

    fn cross_ids(&mut self, ei: EdgeId, fi: EdgeId) -> [(u32, u32); 2] {
        let (a, b) = self.edges[ei];
        let (c, d) = self.edges[fi];
        self.edges[ei] = (a, c);
        self.edges[fi] = (b, d);
        self.red[ei] = false;
        self.red[fi] = false;
        [(a, c), (b, d)]
    }
}

/// Shape of the cluster-level template graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    /// The `k`-cycle (degree 2).
    Cycle,
    /// Circulant with offsets `±1, ±⌊k/3⌋` (degree 4).
    Expander4,
    /// Explicit regular edge list on `0..k`.
    Custom(Vec<(usize, usize)>),
}

impl Template {
    /// Edges `(i, j)` with `i < j`, sorted, after validating the template.
    pub fn edges(&self, k: usize) -> Result<Vec<(usize, usize)>> {
        let mut e: Vec<(usize, usize)> = match self {
            Template::Cycle => {
                if k < 3 {
                    return Err(Error::Parameter("cycle template needs k ≥ 3".into()));
                }
                (0..k).map(|i| (i, (i + 1) % k)).collect()
            }
            Template::Expander4 => {
                let o = k / 3;
                if o < 2 || 2 * o == k {
                    return Err(Error::Parameter(format!(
                        "circulant offsets ±1, ±{o} are not 4-regular for k = {k}"
                    )));
                }
                (0..k).flat_map(|i| [(i, (i + 1) % k), (i, (i + o) % k)]).collect()
            }
            Template::Custom(list) => list.clone(),
        };
        for p in e.iter_mut() {
            if p.0 > p.1 {
                *p = (p.1, p.0);
            }
        }
        e.sort_unstable();
        let mut deg = vec![0usize; k];
        for &(i, j) in &e {
            if i == j || j >= k {
                return Err(Error::Parameter(format!("bad template edge ({i}, {j})")));
            }
            deg[i] += 1;
            deg[j] += 1;
        }
        if e.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("template has parallel edges".into()));
        }
        if k > 1 && deg.iter().any(|&x| x != deg[0]) {
            return Err(Error::Parameter("template must be regular".into()));
        }
        if k > 1 && !connected(k, &e) {
            return Err(Error::Parameter("template must be connected".into()));
        }
        if matches!(self, Template::Expander4) {
            // algebraic connectivity of the circulant, checked once per build
            let g = Graph::from_edges(k, 4, e.iter().copied())?;
            let vals = spectral::normalized_laplacian_eigenvalues(&g, usize::MAX)?;
            if vals[1] <= 1e-9 {
                return Err(Error::Parameter("expander template is disconnected".into()));
            }
        }
        Ok(e)
    }

    pub fn degree(&self, k: usize) -> Result<usize> {
        let e = self.edges(k)?;
        Ok(if k == 0 { 0 } else { 2 * e.len() / k })
    }

    fn default_for(k: usize) -> Template {
        match k {
            2 => Template::Custom(vec![(0, 1)]),
            _ => Template::Cycle,
        }
    }
}

fn connected(k: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); k];
    for &(i, j) in edges {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; k];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// How the per-cluster red budget is compared against `4δd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RedThreshold {
    /// `4δd · (n/k)` red half-edges per cluster.
    #[default]
    PerCluster,
    /// `4δd · n` red half-edges per cluster.
    Absolute,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub d: usize,
    pub delta: f64,
    pub k: usize,
    pub template: Template,
    #[serde(default)]
    pub threshold: RedThreshold,
}

/// Bookkeeping from [`generate_sample`], in output (permuted) coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenReceipt {
    /// For each template edge, the inter-cluster edges it planted.
    pub crossing_ledger: BTreeMap<String, Vec<(Vertex, Vertex)>>,
    pub template_edges: Vec<(usize, usize)>,
    pub red_half_edges: Vec<usize>,
    pub red_edges: Vec<usize>,
    pub red_threshold: f64,
    pub crossings_per_template_edge: usize,
}

impl GenReceipt {
    pub fn ledger_key(i: usize, j: usize) -> String {
        format!("{i}-{j}")
    }

    pub fn planted(&self, i: usize, j: usize) -> &[(Vertex, Vertex)] {
        let key = Self::ledger_key(i.min(j), i.max(j));
        self.crossing_ledger.get(&key).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub partition: Partition,
    pub receipt: GenReceipt,
}

/// Planted inter-cluster edges per template edge: `δdn / (deg · k)`, realised
/// as half that many crossings since each crossing plants two edges.
pub fn crossings_per_template_edge(n: usize, d: usize, delta: f64, k: usize, deg: usize) -> usize {
    let target = delta * d as f64 * n as f64 / (deg as f64 * k as f64);
    (target / 2.0).round() as usize
}

/// Draws `k` configuration-model clusters of size `n/k` with red probability
/// `6δd`, crosses red edges along every template edge and randomly relabels
/// the vertices. Returns `Ok(None)` when some cluster's red budget is below
/// the threshold.
pub fn generate_sample<R: Rng + ?Sized>(params: &GenParams, rng: &mut R) -> Result<Option<Instance>> {
    let GenParams { n, d, delta, k, .. } = *params;
    if k == 0 || n % k != 0 {
        return Err(Error::Parameter(format!("k = {k} must divide n = {n}")));
    }
    let m = n / k;
    let template_edges = if k == 1 {
        Vec::new()
    } else {
        params.template.edges(k)?
    };
    let deg = if k == 1 {
        0
    } else {
        params.template.degree(k)?
    };

    let mut clusters = Vec::with_capacity(k);
    for _ in 0..k {
        clusters.push(config_model(m, d, 6.0 * delta, rng)?);
    }
    let red_half: Vec<usize> = clusters.iter().map(|c| c.red_half_edges()).collect();
    let red_edges: Vec<usize> = clusters.iter().map(|c| c.red_edges().len()).collect();
    let per_cluster = 4.0 * delta * d as f64 * m as f64;
    let red_threshold = match params.threshold {
        RedThreshold::PerCluster => per_cluster,
        RedThreshold::Absolute => per_cluster * k as f64,
    };
    if k > 1 && red_half.iter().any(|&r| (r as f64) < red_threshold) {
        log::debug!("red budget {red_half:?} below {red_threshold}");
        return Ok(None);
    }

    // merge clusters into one edge list over global ids i·m + v
    let mut merged = ConfigGraph {
        n,
        d,
        edges: Vec::with_capacity(n * d / 2),
        round2_start: 0,
        red: Vec::with_capacity(n * d / 2),
        red_half_edges: red_half.iter().sum(),
    };
    let mut red_pool: Vec<Vec<EdgeId>> = vec![Vec::new(); k];
    for (i, c) in clusters.iter().enumerate() {
        let off = (i * m) as u32;
        for (e, &(a, b)) in c.edges.iter().enumerate() {
            if c.red[e] {
                red_pool[i].push(merged.edges.len());
            }
            merged.edges.push((a + off, b + off));
            merged.red.push(c.red[e]);
        }
    }

    let ops = crossings_per_template_edge(n, d, delta, k, deg.max(1));
    let mut planted: BTreeMap<(usize, usize), Vec<(u32, u32)>> =
        template_edges.iter().map(|&e| (e, Vec::new())).collect();
    let mut nbrs = vec![Vec::new(); k];
    for &(i, j) in &template_edges {
        nbrs[i].push(j);
        nbrs[j].push(i);
    }
    for ns in nbrs.iter_mut() {
        ns.sort_unstable();
    }
    for i in 0..k {
        for _ in 0..ops {
            for &j in nbrs[i].iter().filter(|&&j| j > i) {
                let (Some(e), Some(f)) = (take_random(&mut red_pool[i], rng), take_random(&mut red_pool[j], rng))
                else {
                    log::debug!("ran out of red edges crossing {i}-{j}");
                    return Ok(None);
                };
                let new = merged.cross_ids(e, f);
                planted.get_mut(&(i, j)).unwrap().extend(new);
            }
        }
    }
    merged.uncolor_all();

    let mut sigma: Vec<Vertex> = (0..n).collect();
    sigma.shuffle(rng);
    let graph = Graph::from_edges(
        n,
        d,
        merged
            .edges
            .iter()
            .map(|&(a, b)| (sigma[a as usize], sigma[b as usize])),
    )?;
    let mut labels = vec![0u32; n];
    for v in 0..n {
        labels[sigma[v]] = (v / m) as u32;
    }
    let partition = Partition::new(labels, k)?;
    let crossing_ledger = planted
        .into_iter()
        .map(|((i, j), list)| {
            let mapped = list
                .into_iter()
                .map(|(a, b)| (sigma[a as usize], sigma[b as usize]))
                .collect();
            (GenReceipt::ledger_key(i, j), mapped)
        })
        .collect();
    Ok(Some(Instance {
        graph,
        partition,
        receipt: GenReceipt {
            crossing_ledger,
            template_edges,
            red_half_edges: red_half,
            red_edges,
            red_threshold,
            crossings_per_template_edge: ops,
        },
    }))
}

fn take_random<R: Rng + ?Sized>(pool: &mut Vec<EdgeId>, rng: &mut R) -> Option<EdgeId> {
    if pool.is_empty() {
        return None;
    }
    let i = rng.gen_range(0..pool.len());
    Some(pool.swap_remove(i))
}

/// Low-cost distribution: clusters arranged on a cycle.
pub fn sample_from_d1<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    delta: f64,
    k: usize,
    rng: &mut R,
) -> Result<Option<Instance>> {
    let params = GenParams {
        n,
        d,
        delta,
        k,
        template: Template::Cycle,
        threshold: RedThreshold::PerCluster,
    };
    generate_sample(&params, rng)
}

/// High-cost distribution: clusters arranged on a 4-regular expander.
pub fn sample_from_d2<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    delta: f64,
    k: usize,
    rng: &mut R,
) -> Result<Option<Instance>> {
    let params = GenParams {
        n,
        d,
        delta,
        k,
        template: Template::Expander4,
        threshold: RedThreshold::PerCluster,
    };
    generate_sample(&params, rng)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub phi_target: f64,
    pub eps_target: f64,
    /// Defaults to a single edge for `k = 2` and a cycle otherwise.
    pub template: Option<Template>,
    pub max_attempts: usize,
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub graph: Graph,
    pub partition: Partition,
    pub attempts: usize,
    /// `λ_k` and `λ_{k+1}` of the normalized Laplacian.
    pub lambda_k: f64,
    pub lambda_k1: f64,
}

/// Generates an instance whose spectrum certifies the clusterability targets:
/// `λ_k ≤ 2 · eps_target` and `λ_{k+1} ≥ phi_target² / 2`.
pub fn gen_planted<R: Rng + ?Sized>(params: &PlantedParams, rng: &mut R) -> Result<Planted> {
    let PlantedParams { n, k, d, phi_target, eps_target, .. } = *params;
    if k == 0 || n % k != 0 || k >= n {
        return Err(Error::Parameter(format!("k = {k} must divide n = {n}")));
    }
    let template = params
        .template
        .clone()
        .unwrap_or_else(|| Template::default_for(k));
    for attempt in 1..=params.max_attempts.max(1) {
        let (graph, partition) = if k == 1 {
            (config_model(n, d, 0.0, rng)?.graph()?, Partition::single(n))
        } else {
            let gp = GenParams {
                n,
                d,
                delta: eps_target,
                k,
                template: template.clone(),
                threshold: RedThreshold::PerCluster,
            };
            match generate_sample(&gp, rng)? {
                Some(inst) => (inst.graph, inst.partition),
                None => continue,
            }
        };
        let vals = spectral::normalized_laplacian_eigenvalues(&graph, spectral::DENSE_CAP)?;
        let (lk, lk1) = (vals[k - 1], vals[k]);
        if lk <= 2.0 * eps_target + 1e-12 && lk1 >= phi_target * phi_target / 2.0 {
            return Ok(Planted {
                graph,
                partition,
                attempts: attempt,
                lambda_k: lk,
                lambda_k1: lk1,
            });
        }
        log::debug!("attempt {attempt}: λ_k = {lk}, λ_k+1 = {lk1}");
    }
    Err(Error::GenerationFailed {
        attempts: params.max_attempts.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::contract;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn config_model_is_regular() {
        let c = config_model(10, 8, 0.0, &mut rng(1)).unwrap();
        let g = c.graph().unwrap();
        for v in 0..10 {
            let s: u32 = g.row(v).iter().map(|x| x.1).sum();
            assert_eq!(s, 8);
        }
        assert!(c.red_edges().is_empty());
        assert_eq!(c.red_half_edges(), 0);
    }

    #[test]
    fn config_model_parity() {
        assert!(matches!(config_model(9, 8, 0.0, &mut rng(1)), Err(Error::Parity(_))));
    }

    #[test]
    fn red_half_edges_follow_binomial() {
        // Binomial(1000, 0.08): mean 80, sd ≈ 8.58
        let c = config_model(1000, 8, 0.01, &mut rng(3)).unwrap();
        let r = c.red_half_edges() as f64;
        assert!((r - 80.0).abs() <= 3.0 * (1000.0f64 * 0.08 * 0.92).sqrt(), "{r}");
        for e in c.red_edges() {
            assert!(c.is_round2(e));
        }
    }

    #[test]
    fn crossing_preserves_degrees_and_inverts() {
        // 4-cycle 0-1-2-3-0
        let mut c = ConfigGraph {
            n: 4,
            d: 2,
            edges: vec![(0, 1), (1, 2), (2, 3), (3, 0)],
            round2_start: 4,
            red: vec![false; 4],
            red_half_edges: 0,
        };
        let before = {
            let mut e = c.edges.clone();
            e.sort();
            e
        };
        c.cross_edges((0, 1), (2, 3)).unwrap();
        let g = c.graph().unwrap();
        assert!((0..4).all(|v| g.row(v).iter().map(|x| x.1).sum::<u32>() == 2));
        c.cross_edges((0, 2), (1, 3)).unwrap();
        let mut after = c.edges.clone();
        after.sort();
        assert_eq!(before, after);
        assert!(matches!(
            c.cross_edges((0, 2), (1, 3)),
            Err(Error::MissingEdge(0, 2))
        ));
    }

    #[test]
    fn crossing_between_clusters_adds_two() {
        let mut c = ConfigGraph {
            n: 4,
            d: 1,
            edges: vec![(0, 1), (2, 3)],
            round2_start: 0,
            red: vec![false; 2],
            red_half_edges: 0,
        };
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let w0 = contract(&c.graph().unwrap(), &p).unwrap().weight(0, 1);
        c.cross_edges((0, 1), (2, 3)).unwrap();
        let w1 = contract(&c.graph().unwrap(), &p).unwrap().weight(0, 1);
        assert_eq!(w1 - w0, 2.0);
    }

    #[test]
    fn templates() {
        assert_eq!(Template::Cycle.degree(8).unwrap(), 2);
        assert_eq!(Template::Expander4.degree(16).unwrap(), 4);
        assert!(Template::Cycle.edges(2).is_err());
        assert!(Template::Expander4.edges(5).is_err());
        assert!(Template::Custom(vec![(0, 1), (1, 2)]).edges(3).is_err());
        assert_eq!(Template::Custom(vec![(1, 0)]).edges(2).unwrap(), vec![(0, 1)]);
    }

    #[test]
    fn d1_contraction_is_weighted_cycle() {
        // δdn/(2k) = 8192·8/(256·16) = 16 planted edges per cycle pair
        let inst = sample_from_d1(8192, 8, 1.0 / 256.0, 8, &mut rng(5))
            .unwrap()
            .expect("red budget");
        let h = contract(&inst.graph, &inst.partition).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let adjacent = (i + 1) % 8 == j || (j + 1) % 8 == i;
                let expected = if adjacent { 16.0 } else { 0.0 };
                assert_eq!(h.weight(i, j), expected, "({i}, {j})");
            }
        }
        for &(i, j) in &inst.receipt.template_edges {
            let list = inst.receipt.planted(i, j);
            assert_eq!(list.len() as f64, h.weight(i, j));
            for &(a, b) in list {
                let (la, lb) = (inst.partition.label(a), inst.partition.label(b));
                assert!((la, lb) == (i, j) || (la, lb) == (j, i));
            }
        }
        assert_eq!(inst.partition.eta(), 1.0);
    }

    #[test]
    fn d2_contraction_supports_template() {
        // δdn/(4k) = 8192·8/(256·32) = 8 per template edge
        let inst = sample_from_d2(8192, 8, 1.0 / 256.0, 8, &mut rng(6))
            .unwrap()
            .unwrap();
        let h = contract(&inst.graph, &inst.partition).unwrap();
        let tmpl = Template::Expander4.edges(8).unwrap();
        for i in 0..8 {
            for j in i + 1..8 {
                let expected = if tmpl.contains(&(i, j)) { 8.0 } else { 0.0 };
                assert_eq!(h.weight(i, j), expected);
            }
        }
    }

    #[test]
    fn zero_delta_gives_disjoint_clusters() {
        let inst = sample_from_d1(1024, 8, 0.0, 4, &mut rng(1)).unwrap().unwrap();
        let h = contract(&inst.graph, &inst.partition).unwrap();
        assert_eq!(h.weights().sum(), 0.0);
    }

    #[test]
    fn short_red_budget_is_bot() {
        // expected 6δd·m red half-edges against an absolute 16δd·m threshold
        let params = GenParams {
            n: 4096,
            d: 8,
            delta: 0.004,
            k: 4,
            template: Template::Cycle,
            threshold: RedThreshold::Absolute,
        };
        assert!(generate_sample(&params, &mut rng(1)).unwrap().is_none());
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = sample_from_d1(2048, 8, 0.004, 4, &mut rng(9)).unwrap().unwrap();
        let b = sample_from_d1(2048, 8, 0.004, 4, &mut rng(9)).unwrap().unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn planted_single_cluster() {
        let p = gen_planted(
            &PlantedParams {
                n: 256,
                k: 1,
                d: 8,
                phi_target: 0.2,
                eps_target: 0.0,
                template: None,
                max_attempts: 10,
            },
            &mut rng(2),
        )
        .unwrap();
        assert!(p.lambda_k1 >= 0.02);
    }

    #[test]
    fn planted_two_clusters_certified() {
        let p = gen_planted(
            &PlantedParams {
                n: 800,
                k: 2,
                d: 8,
                phi_target: 0.2,
                eps_target: 0.01,
                template: None,
                max_attempts: 10,
            },
            &mut rng(4),
        )
        .unwrap();
        let vals = spectral::normalized_laplacian_eigenvalues(&p.graph, 4000).unwrap();
        assert!(vals[1] <= 0.02 + 1e-12);
        assert!(vals[2] >= 0.02);
        assert_eq!(p.partition.eta(), 1.0);
    }
}
