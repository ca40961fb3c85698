//! End-to-end Dasgupta-cost estimators for the random-sample model and the
//! cluster-query model.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{contract, ContractedGraph, Graph, Partition, Vertex};
use crate::hierarchy::{weighted_dasgupta_cost, wrsc, HierTree};
use crate::params::{LogBase, ScaledCount};
use crate::quadratic::{
    approx_contracted_graph, initialize_oracle, materialize_k, ApproxLaplacian, CostOracleData, KMatrix, OracleConfig,
    SolverConfig,
};
use crate::seeds::{Mode, QueryCounters, SeedOracle};
use crate::walks::{par_map, stream_rng};

/// `ξ = φ² / (k³ √log k)`.
pub fn cost_xi(k: usize, phi: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::Parameter("the estimator needs k ≥ 2".into()));
    }
    Ok(phi * phi / ((k as f64).powi(3) * (k as f64).ln().sqrt()))
}

/// Sets `ξ` from `(k, φ)` and builds the oracle.
pub fn initialize_cost_oracle<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &SeedOracle,
    config: &OracleConfig,
    rng: &mut R,
) -> Result<CostOracleData> {
    let xi = cost_xi(config.k, config.phi)?;
    let cfg = OracleConfig {
        xi,
        ..config.clone()
    };
    initialize_oracle(g, oracle, &cfg, rng)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CostEstimate {
    pub est: f64,
    pub wcost: f64,
    pub xi: f64,
    pub tree: HierTree,
    pub qtilde: ContractedGraph,
    pub htilde: ApproxLaplacian,
    pub kmat: Option<KMatrix>,
}

/// `(12/φ²)·WCOST + 12ξdn²k²/φ² + d·Σĉ²`.
pub fn est_formula(wcost: f64, phi: f64, xi: f64, d: usize, n: usize, k: usize, chat: &[f64]) -> f64 {
    let (d, n, k) = (d as f64, n as f64, k as f64);
    let p2 = phi * phi;
    12.0 / p2 * wcost + 12.0 * xi * d * n * n * k * k / p2 + d * chat.iter().map(|c| c * c).sum::<f64>()
}

/// Builds `Q̃` from a rounded Laplacian and size estimates and evaluates EST
/// on its recursive-sparsest-cut tree.
pub fn cost_from_laplacian(
    htilde: ApproxLaplacian,
    chat: &[f64],
    phi: f64,
    xi: f64,
    d: usize,
    n: usize,
    kmat: Option<KMatrix>,
) -> Result<CostEstimate> {
    let qtilde = htilde.contracted(chat.to_vec())?;
    let tree = wrsc(&qtilde)?;
    let wcost = weighted_dasgupta_cost(&qtilde, &tree)?;
    Ok(CostEstimate {
        est: est_formula(wcost, phi, xi, d, n, qtilde.k(), chat),
        wcost,
        xi,
        tree,
        qtilde,
        htilde,
        kmat,
    })
}

/// Rounds the oracle's `K` to `L̃`, builds `Q̃` with the size estimates and
/// evaluates EST on the recursive-sparsest-cut tree.
pub fn estimated_cost(data: &CostOracleData, phi: f64, solver: &SolverConfig) -> Result<CostEstimate> {
    let kmat = materialize_k(data);
    let htilde = approx_contracted_graph(&kmat, phi, data.xi, data.n, data.d, solver)?;
    cost_from_laplacian(htilde, &data.chat, phi, data.xi, data.d, data.n, Some(kmat))
}

/// EST with `L̃ := 𝓛_H` and exact cluster sizes.
pub fn estimated_cost_exact_h(g: &Graph, partition: &Partition, phi: f64) -> Result<CostEstimate> {
    let h = contract(g, partition)?;
    let xi = cost_xi(partition.k(), phi)?;
    let htilde = ApproxLaplacian {
        ltilde: h.laplacian(),
        violation: 0.0,
        iterations: 0,
        feasible: true,
    };
    cost_from_laplacian(htilde, h.sizes(), phi, xi, g.d(), g.n(), None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmConfig {
    pub eps: f64,
    pub scale: f64,
    #[serde(default)]
    pub log: LogBase,
    /// Overrides the per-pair vertex sample size.
    pub samples: Option<usize>,
    /// Overrides the size-estimation sample size.
    pub size_samples: Option<usize>,
}

impl OmConfig {
    pub fn new(eps: f64, scale: f64) -> Self {
        OmConfig {
            eps,
            scale,
            log: LogBase::Natural,
            samples: None,
            size_samples: None,
        }
    }

    /// `10¹¹ k⁹ log n log k / (η ε²)`, scaled.
    pub fn pair_samples(&self, n: usize, k: usize, eta: f64) -> ScaledCount {
        let kf = k as f64;
        let raw = 1e11 * kf.powi(9) * self.log.log(n as f64) * self.log.log(kf) / (eta * self.eps * self.eps);
        match self.samples {
            Some(s) => ScaledCount::fixed("om_pair_samples", raw, s),
            None => ScaledCount::new("om_pair_samples", raw, self.scale).at_least_one(),
        }
    }
}

/// Size estimates at `δ = 1/(100k)` from label queries on uniform vertices.
pub fn initialize_oracle_om<R: Rng + ?Sized>(oracle: &SeedOracle, config: &OmConfig, rng: &mut R) -> Result<Vec<f64>> {
    if oracle.mode() != Mode::ClusterQuery {
        return Err(Error::WrongMode);
    }
    let (n, k) = (oracle.n(), oracle.k());
    let delta = 1.0 / (100.0 * k as f64);
    let s = match config.size_samples {
        Some(s) => s,
        None => oracle.size_sample_count(delta).scaled,
    };
    let mut counts = vec![0usize; k];
    for _ in 0..s {
        counts[oracle.query_cluster(rng.gen_range(0..n))?] += 1;
    }
    if let Some(cluster) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptySample { cluster });
    }
    Ok(counts.into_iter().map(|c| c as f64 / s as f64 * n as f64).collect())
}

/// Per-pair record from [`approx_contracted_graph_om`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub source: usize,
    pub target: usize,
    pub hits: usize,
    pub source_samples: usize,
}

/// Estimates every `W(i, j)` by sampling a uniform half-edge from uniform
/// vertices of the cluster with the smaller size estimate.
pub fn approx_contracted_graph_om<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &SeedOracle,
    chat: &[f64],
    config: &OmConfig,
    rng: &mut R,
) -> Result<(ContractedGraph, Vec<PairSample>)> {
    if oracle.mode() != Mode::ClusterQuery {
        return Err(Error::WrongMode);
    }
    let (n, k, d) = (g.n(), oracle.k(), g.d());
    let s = config.pair_samples(n, k, oracle.eta()).scaled;
    let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    pairs.sort_by(|a, b| {
        let ma = chat[a.0].min(chat[a.1]);
        let mb = chat[b.0].min(chat[b.1]);
        ma.total_cmp(&mb).then(a.cmp(b))
    });
    let seed: u64 = rng.gen();
    let results = par_map(pairs.len(), |p| -> Result<PairSample> {
        let (i, j) = pairs[p];
        let (a, b) = if chat[j] < chat[i] { (j, i) } else { (i, j) };
        let mut r = stream_rng(seed, p as u64);
        let (mut hits, mut members) = (0usize, 0usize);
        for _ in 0..s {
            let u: Vertex = r.gen_range(0..n);
            if oracle.query_cluster(u)? != a {
                continue;
            }
            members += 1;
            let v = g.ports(u)[r.gen_range(0..d)] as Vertex;
            oracle.record_edge_queries(1);
            if v != u && oracle.query_cluster(v)? == b {
                hits += 1;
            }
        }
        if members == 0 {
            return Err(Error::EmptySample { cluster: a });
        }
        Ok(PairSample {
            source: a,
            target: b,
            hits,
            source_samples: members,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut w = DMatrix::zeros(k, k);
    for ps in &results {
        let est = ps.hits as f64 / ps.source_samples as f64 * d as f64 * chat[ps.source];
        w[(ps.source, ps.target)] = est;
        w[(ps.target, ps.source)] = est;
    }
    Ok((ContractedGraph::new(w, chat.to_vec())?, results))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OmEstimate {
    pub est: f64,
    pub wcost: f64,
    pub tree: HierTree,
    pub qtilde: ContractedGraph,
    pub chat: Vec<f64>,
    pub pairs: Vec<PairSample>,
    pub queries: QueryCounters,
}

/// `3·WCOST + 3εdn²/(100k√log k) + d·Σĉ²`.
pub fn est_om_formula(wcost: f64, eps: f64, d: usize, n: usize, k: usize, chat: &[f64]) -> f64 {
    let (d, n, kf) = (d as f64, n as f64, k as f64);
    3.0 * wcost + 3.0 * eps * d * n * n / (100.0 * kf * kf.ln().sqrt()) + d * chat.iter().map(|c| c * c).sum::<f64>()
}

pub fn estimated_cost_om<R: Rng + ?Sized>(g: &Graph, oracle: &SeedOracle, config: &OmConfig, rng: &mut R) -> Result<OmEstimate> {
    let k = oracle.k();
    if k < 2 {
        return Err(Error::Parameter("the estimator needs k ≥ 2".into()));
    }
    let before = oracle.counters();
    let chat = initialize_oracle_om(oracle, config, rng)?;
    let (qtilde, pairs) = approx_contracted_graph_om(g, oracle, &chat, config, rng)?;
    let tree = wrsc(&qtilde)?;
    let wcost = weighted_dasgupta_cost(&qtilde, &tree)?;
    Ok(OmEstimate {
        est: est_om_formula(wcost, config.eps, g.d(), g.n(), k, &chat),
        wcost,
        tree,
        qtilde,
        chat,
        pairs,
        queries: oracle.counters() - before,
    })
}

/// EST_OM with the exact contraction and exact sizes.
pub fn estimated_cost_om_exact_w(g: &Graph, partition: &Partition, eps: f64) -> Result<OmEstimate> {
    let k = partition.k();
    if k < 2 {
        return Err(Error::Parameter("the estimator needs k ≥ 2".into()));
    }
    let qtilde = contract(g, partition)?;
    let tree = wrsc(&qtilde)?;
    let wcost = weighted_dasgupta_cost(&qtilde, &tree)?;
    let chat = qtilde.sizes().to_vec();
    Ok(OmEstimate {
        est: est_om_formula(wcost, eps, g.d(), g.n(), k, &chat),
        wcost,
        tree,
        qtilde,
        chat,
        pairs: Vec::new(),
        queries: QueryCounters::default(),
    })
}
