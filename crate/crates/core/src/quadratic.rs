//! Quadratic-form oracle for the contracted Laplacian and its rounding into
//! a genuine weighted-graph Laplacian.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ContractedGraph, Graph, Vertex};
use crate::params::{LogBase, ScaledCount};
use crate::seeds::{Mode, SeedOracle};
use crate::wdp::{embed_all, init_wdp, WdpConfig, WdpSketch};

/// Largest `k` accepted by the rounding solver.
pub const MAX_K: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub k: usize,
    pub phi: f64,
    pub eps: f64,
    pub xi: f64,
    pub scale: f64,
    /// Exact walk distributions and every vertex used once as a seed.
    pub exact: bool,
    #[serde(default)]
    pub log: LogBase,
    /// Overrides for the sketch sizes (`k`, `phi`, `xi`, `exact` are taken
    /// from this config).
    pub sketch: WdpConfig,
    pub seeds: Option<usize>,
    /// Size-estimation accuracy; defaults to the formula value.
    pub delta: Option<f64>,
    /// Overrides the size-estimation seed count.
    #[serde(default)]
    pub size_samples: Option<usize>,
}

impl OracleConfig {
    pub fn new(k: usize, phi: f64, xi: f64) -> Self {
        OracleConfig {
            k,
            phi,
            eps: 0.0,
            xi,
            scale: 1.0,
            exact: false,
            log: LogBase::Natural,
            sketch: WdpConfig::new(k, phi, xi),
            seeds: None,
            delta: None,
            size_samples: None,
        }
    }

    pub fn exact(k: usize, phi: f64, xi: f64) -> Self {
        OracleConfig {
            exact: true,
            ..OracleConfig::new(k, phi, xi)
        }
    }

    /// `δ = ξη / (512 k² n^{40ε/φ²})`.
    pub fn size_delta(&self, n: usize, eta: f64) -> f64 {
        self.delta.unwrap_or_else(|| {
            let k2 = (self.k * self.k) as f64;
            self.xi * eta / (512.0 * k2 * (n as f64).powf(40.0 * self.eps / (self.phi * self.phi)))
        })
    }

    /// `10⁹ · log n · k⁶ · n^{80ε/φ²} / (η³ ξ²)`, scaled.
    pub fn seed_count(&self, n: usize, eta: f64) -> ScaledCount {
        let raw = 1e9 * self.log.log(n as f64) * (self.k as f64).powi(6)
            * (n as f64).powf(80.0 * self.eps / (self.phi * self.phi))
            / (eta.powi(3) * self.xi * self.xi);
        match self.seeds {
            Some(s) => ScaledCount::fixed("quadratic_seeds", raw, s),
            None => ScaledCount::new("quadratic_seeds", raw, self.scale).at_least_one(),
        }
    }

    /// Sketch accuracy `ξ' = ξ / (8k²)`.
    pub fn sketch_xi(&self) -> f64 {
        self.xi / (8.0 * (self.k * self.k) as f64)
    }

    /// Diagonal slack used inside `K`: `ξ/8`, so that twice the oracle's
    /// additive error plus the rounding slack stays within `ξdn`.
    pub fn k_xi(&self) -> f64 {
        self.xi / 8.0
    }
}

/// Frozen oracle state: sketch, size estimates and the seed sample, with
/// per-cluster sums of the seed embeddings.
#[derive(Debug, Clone)]
pub struct CostOracleData {
    pub sketch: WdpSketch,
    pub chat: Vec<f64>,
    pub seeds: Vec<(Vertex, usize)>,
    pub cluster_counts: Vec<usize>,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub xi: f64,
    pub k_xi: f64,
    pub delta: f64,
    pub seed_count: ScaledCount,
    left_sums: DMatrix<f64>,
    right_sums: DMatrix<f64>,
}

pub fn initialize_oracle<R: Rng + ?Sized>(
    g: &Graph,
    oracle: &SeedOracle,
    config: &OracleConfig,
    rng: &mut R,
) -> Result<CostOracleData> {
    if oracle.mode() != Mode::RandomSample {
        return Err(Error::WrongMode);
    }
    let (n, k) = (g.n(), config.k);
    if oracle.n() != n || oracle.k() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: oracle.k(),
        });
    }
    let eta = oracle.eta();
    let delta = config.size_delta(n, eta);
    let chat = if k == 1 {
        vec![n as f64]
    } else if let Some(s) = config.size_samples {
        oracle.estimate_cluster_sizes_from(s)?
    } else {
        oracle.estimate_cluster_sizes(delta)?
    };
    let sketch_cfg = WdpConfig {
        k,
        phi: config.phi,
        eps: config.eps,
        xi: config.sketch_xi(),
        eta,
        scale: config.scale,
        exact: config.exact,
        log: config.log,
        ..config.sketch.clone()
    };
    let sketch = init_wdp(g, &sketch_cfg, rng)?;
    let seed_count = if config.exact {
        ScaledCount::fixed("quadratic_seeds", config.seed_count(n, eta).unscaled, n)
    } else {
        config.seed_count(n, eta)
    };
    let seeds = if config.exact {
        oracle.all_labeled()
    } else {
        oracle.sample_seeds(seed_count.scaled)
    };
    let mut cluster_counts = vec![0usize; k];
    for &(_, l) in &seeds {
        cluster_counts[l] += 1;
    }
    if let Some(cluster) = cluster_counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClusterSample { cluster });
    }
    let vertices: Vec<Vertex> = seeds.iter().map(|s| s.0).collect();
    let (left, right) = embed_all(g, &sketch, &vertices, rng)?;
    let mut left_sums = DMatrix::zeros(k, k);
    let mut right_sums = DMatrix::zeros(k, k);
    for (idx, &(_, l)) in seeds.iter().enumerate() {
        let mut lc = left_sums.column_mut(l);
        lc += &left[idx];
        let mut rc = right_sums.column_mut(l);
        rc += &right[idx];
    }
    Ok(CostOracleData {
        sketch,
        chat,
        seeds,
        cluster_counts,
        n,
        d: g.d(),
        k,
        xi: config.xi,
        k_xi: config.k_xi(),
        delta,
        seed_count,
        left_sums,
        right_sums,
    })
}

/// Symmetric `k×k` matrix whose quadratic form is the oracle's answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMatrix {
    pub matrix: DMatrix<f64>,
}

impl KMatrix {
    pub fn k(&self) -> usize {
        self.matrix.nrows()
    }

    /// `‖K‖_F ≤ 2n⁵`.
    pub fn within_sanity_bound(&self, n: usize) -> bool {
        let f = self.matrix.norm();
        f.is_finite() && f <= 2.0 * (n as f64).powi(5)
    }
}

/// `K_ij = −(dn²/s²) Σ_{x∈S_i, y∈S_j} wdp(x, y)`, plus
/// `ξ_K dn/2 + dn|S_i|/s` on the diagonal, symmetrized.
pub fn materialize_k(data: &CostOracleData) -> KMatrix {
    let (n, d, k) = (data.n as f64, data.d as f64, data.k);
    let s = data.seeds.len() as f64;
    let cross = data.left_sums.tr_mul(&data.right_sums);
    let mut m = DMatrix::from_fn(k, k, |i, j| -d * n * n / (s * s) * 0.5 * (cross[(i, j)] + cross[(j, i)]));
    for i in 0..k {
        m[(i, i)] += data.k_xi * d * n / 2.0 + d * n * data.cluster_counts[i] as f64 / s;
    }
    let km = KMatrix { matrix: m };
    if !km.within_sanity_bound(data.n) {
        log::warn!("K exceeds the Frobenius sanity bound");
    }
    km
}

/// `zᵀ K z`.
pub fn quadratic_oracle(z: &[f64], kmat: &KMatrix) -> Result<f64> {
    if z.len() != kmat.k() {
        return Err(Error::DimensionMismatch {
            expected: kmat.k(),
            got: z.len(),
        });
    }
    let v = DVector::from_column_slice(z);
    Ok(v.dot(&(&kmat.matrix * &v)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Feasibility tolerance as a multiple of `dn`.
    pub tol: f64,
    pub max_iters: usize,
    /// Multiplier on the Polyak step.
    pub step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-7,
            max_iters: 5000,
            step: 1.0,
        }
    }
}

/// Laplacian `L̃ = Σ w_ij (e_i − e_j)(e_i − e_j)ᵀ` returned by the rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxLaplacian {
    pub ltilde: DMatrix<f64>,
    /// Worst eigenvalue violation of the two sandwich constraints.
    pub violation: f64,
    pub iterations: usize,
    pub feasible: bool,
}

impl ApproxLaplacian {
    pub fn contracted(&self, sizes: Vec<f64>) -> Result<ContractedGraph> {
        ContractedGraph::from_laplacian(&self.ltilde, sizes)
    }
}

/// `Σ_{j≠i} L_ij` in index order. A Laplacian built here has
/// `L_ii == -off_diagonal_row_sum(L, i)` bit for bit.
pub fn off_diagonal_row_sum(l: &DMatrix<f64>, i: usize) -> f64 {
    (0..l.ncols()).filter(|&j| j != i).fold(0.0, |acc, j| acc + l[(i, j)])
}

fn laplacian_from_weights(k: usize, pairs: &[(usize, usize)], w: &[f64]) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(k, k);
    for (&(i, j), &x) in pairs.iter().zip(w) {
        l[(i, j)] -= x;
        l[(j, i)] -= x;
    }
    for i in 0..k {
        l[(i, i)] = -off_diagonal_row_sum(&l, i);
    }
    l
}

fn min_eigenpair(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = m.clone().symmetric_eigen();
    let i = eig.eigenvalues.imin();
    (eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned())
}

/// Runs the projected-subgradient rounding and reports the best iterate,
/// feasible or not.
pub fn round_to_laplacian(kmat: &KMatrix, phi: f64, xi: f64, n: usize, d: usize, cfg: &SolverConfig) -> Result<ApproxLaplacian> {
    let k = kmat.k();
    if k > MAX_K {
        return Err(Error::TooLarge { n: k, cap: MAX_K });
    }
    let dn = (d * n) as f64;
    let tol = cfg.tol * dn;
    let slack = DMatrix::identity(k, k) * (xi / 2.0 * dn);
    let lower = &kmat.matrix * (phi * phi / 3.0) - &slack;
    let upper = &kmat.matrix * 2.0 + &slack;
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let mut w: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| (-(kmat.matrix[(i, j)] + kmat.matrix[(j, i)]) / 2.0).max(0.0))
        .collect();

    let mut best = (f64::INFINITY, w.clone());
    let mut iterations = 0;
    loop {
        let l = laplacian_from_weights(k, &pairs, &w);
        let (la, va) = min_eigenpair(&(&l - &lower));
        let (lb, vb) = min_eigenpair(&(&upper - &l));
        let (ha, hb) = ((-la).max(0.0), (-lb).max(0.0));
        let violation = ha.max(hb);
        if violation < best.0 {
            best = (violation, w.clone());
        }
        if violation <= tol || pairs.is_empty() || iterations == cfg.max_iters {
            break;
        }
        iterations += 1;
        let grad: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| {
                let mut g = 0.0;
                if ha > 0.0 {
                    g -= (va[i] - va[j]).powi(2);
                }
                if hb > 0.0 {
                    g += (vb[i] - vb[j]).powi(2);
                }
                g
            })
            .collect();
        let norm2: f64 = grad.iter().map(|g| g * g).sum();
        if norm2 == 0.0 {
            break;
        }
        let step = cfg.step * (ha + hb) / norm2;
        for (x, g) in w.iter_mut().zip(&grad) {
            *x = (*x - step * g).max(0.0);
        }
    }
    let (violation, w) = best;
    Ok(ApproxLaplacian {
        ltilde: laplacian_from_weights(k, &pairs, &w),
        violation,
        iterations,
        feasible: violation <= tol,
    })
}

/// Finds `L̃` with `(φ²/3)K − (ξ/2)dn·I ⪯ L̃ ⪯ 2K + (ξ/2)dn·I`.
pub fn approx_contracted_graph(kmat: &KMatrix, phi: f64, xi: f64, n: usize, d: usize, cfg: &SolverConfig) -> Result<ApproxLaplacian> {
    let out = round_to_laplacian(kmat, phi, xi, n, d, cfg)?;
    if out.feasible {
        Ok(out)
    } else {
        Err(Error::InfeasibleWithinBudget {
            violation: out.violation,
            iterations: out.iterations,
        })
    }
}
