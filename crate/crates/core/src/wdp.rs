//! Weighted dot-product sketch: approximates `⟨f_x, Σ_[k] f_y⟩` from random
//! walks without an eigendecomposition of the graph.
//!
//! The sketch keeps `Q̂ ≈ M^t S` (sparse, vertices × sample) and
//! `Ψ = (n/s) Ŵ_k Σ̂_k⁻² Ŵ_kᵀ`, where `Ŵ Σ̂ Ŵᵀ` is the eigendecomposition
//! of `(n/s)·𝒢`. It also stores the factor `B = √(n/s) Ŵ_k Σ̂_k⁻¹` with
//! `Ψ = B Bᵀ`, so a vertex can be embedded once as `Bᵀ Q̂ᵀ m̂_x ∈ ℝ^k` and
//! reused across many queries.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::params::{LogBase, ScaledCount};
use crate::walks::{
    self, default_reps, estimate_collision_probabilities, estimate_transition_matrix, exact_walk_distribution,
    run_random_walks, Csr, WalkMode,
};

pub const DEFAULT_FLOOR: f64 = 1e-10;

const MAGIC: &[u8; 8] = b"HCWDPSK\0";
const VERSION: u32 = 1;

/// Exponents that instantiate the `O(·)` terms of the sample-size formulas
/// `n^{a + c·ε/φ²} · (k log n / (ξη))^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeConstants {
    pub walks_eps_exponent: f64,
    pub walks_poly_exponent: f64,
    pub sample_eps_exponent: f64,
    pub sample_poly_exponent: f64,
    /// Numerator constant of the default walk length `c · log n / φ²`.
    pub walk_length: f64,
}

impl Default for SizeConstants {
    fn default() -> Self {
        SizeConstants {
            walks_eps_exponent: 20.0,
            walks_poly_exponent: 1.0,
            sample_eps_exponent: 80.0,
            sample_poly_exponent: 1.0,
            walk_length: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdpConfig {
    pub k: usize,
    pub phi: f64,
    pub eps: f64,
    pub xi: f64,
    pub eta: f64,
    pub scale: f64,
    /// Exact walk distributions and the full vertex set as sample.
    pub exact: bool,
    #[serde(default)]
    pub log: LogBase,
    #[serde(default)]
    pub constants: SizeConstants,
    pub t: Option<usize>,
    pub s: Option<usize>,
    pub r_init: Option<usize>,
    pub r_query: Option<usize>,
    pub reps: Option<usize>,
    pub floor: f64,
}

impl WdpConfig {
    pub fn new(k: usize, phi: f64, xi: f64) -> Self {
        WdpConfig {
            k,
            phi,
            eps: 0.0,
            xi,
            eta: 1.0,
            scale: 1.0,
            exact: false,
            log: LogBase::Natural,
            constants: SizeConstants::default(),
            t: None,
            s: None,
            r_init: None,
            r_query: None,
            reps: None,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn exact(k: usize, phi: f64) -> Self {
        WdpConfig {
            exact: true,
            ..WdpConfig::new(k, phi, 0.5)
        }
    }

    /// Evaluated sizes for an `n`-vertex graph.
    pub fn sizes(&self, n: usize) -> WdpSizes {
        let c = &self.constants;
        let ln = self.log.log(n as f64);
        let ratio = self.eps / (self.phi * self.phi);
        let poly = self.k as f64 * ln / (self.xi * self.eta);
        let t_raw = c.walk_length * ln / (self.phi * self.phi);
        let t = match self.t {
            Some(t) => ScaledCount::fixed("t", t_raw, t),
            None => ScaledCount::fixed("t", t_raw, t_raw.ceil() as usize),
        };
        let walks_raw = (n as f64).powf(0.5 + c.walks_eps_exponent * ratio) * poly.powf(c.walks_poly_exponent);
        let sample_raw = (n as f64).powf(c.sample_eps_exponent * ratio) * poly.powf(c.sample_poly_exponent);
        let pick = |name: &str, raw: f64, over: Option<usize>| match over {
            Some(v) => ScaledCount::fixed(name, raw, v),
            None => ScaledCount::new(name, raw, self.scale).at_least_one(),
        };
        let s = if self.exact {
            ScaledCount::fixed("s", sample_raw, n)
        } else {
            pick("s", sample_raw, self.s)
        };
        let reps_raw = ln.ceil();
        WdpSizes {
            t,
            s,
            r_init: pick("r_init", walks_raw, self.r_init),
            r_query: pick("r_query", walks_raw, self.r_query),
            reps: ScaledCount::fixed("reps", reps_raw, self.reps.unwrap_or_else(|| default_reps(n))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WdpSizes {
    pub t: ScaledCount,
    pub s: ScaledCount,
    pub r_init: ScaledCount,
    pub r_query: ScaledCount,
    pub reps: ScaledCount,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WdpSketch {
    n: usize,
    k: usize,
    t: usize,
    sample: Vec<Vertex>,
    qhat: Csr,
    psi: DMatrix<f64>,
    factor: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    query_mode: WalkMode,
    sizes: WdpSizes,
}

/// Builds the sketch. The sample is drawn uniformly with replacement, or is
/// every vertex in exact mode.
pub fn init_wdp<R: Rng + ?Sized>(g: &Graph, config: &WdpConfig, rng: &mut R) -> Result<WdpSketch> {
    let n = g.n();
    if config.k == 0 {
        return Err(Error::Parameter("k must be positive".into()));
    }
    if !(config.xi > 0.0 && config.xi < 1.0) {
        return Err(Error::Parameter(format!("xi = {} outside (0, 1)", config.xi)));
    }
    let sizes = config.sizes(n);
    let t = sizes.t.scaled;
    let s = sizes.s.scaled;
    let (sample, mode, query_mode) = if config.exact {
        ((0..n).collect::<Vec<_>>(), WalkMode::Exact, WalkMode::Exact)
    } else {
        let sample = (0..s).map(|_| rng.gen_range(0..n)).collect();
        (
            sample,
            WalkMode::Sampled { walks: sizes.r_init.scaled },
            WalkMode::Sampled { walks: sizes.r_query.scaled },
        )
    };
    log::info!(
        "wdp sketch: n = {n}, s = {}, t = {t}, r_init = {}, r_query = {}",
        sample.len(),
        sizes.r_init.scaled,
        sizes.r_query.scaled
    );
    let qhat = estimate_transition_matrix(g, &sample, mode, t, rng)?;
    let gram = estimate_collision_probabilities(g, &sample, mode, t, sizes.reps.scaled, rng)?;
    let s = sample.len();
    if config.k > s {
        return Err(Error::DegenerateSketch {
            eigenvalue: 0.0,
            floor: config.floor,
        });
    }
    let ns = n as f64 / s as f64;
    let eig = (gram.matrix * ns).symmetric_eigen();
    let mut order: Vec<usize> = (0..s).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = &order[..config.k];
    let eigenvalues: Vec<f64> = top.iter().map(|&i| eig.eigenvalues[i]).collect();
    let smallest = *eigenvalues.last().unwrap();
    if !(smallest >= config.floor) {
        return Err(Error::DegenerateSketch {
            eigenvalue: smallest,
            floor: config.floor,
        });
    }
    let factor = DMatrix::from_fn(s, config.k, |r, c| ns.sqrt() * eig.eigenvectors[(r, top[c])] / eigenvalues[c]);
    let psi = &factor * factor.transpose();
    Ok(WdpSketch {
        n,
        k: config.k,
        t,
        sample,
        qhat,
        psi,
        factor,
        eigenvalues,
        query_mode,
        sizes,
    })
}

impl WdpSketch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn s(&self) -> usize {
        self.sample.len()
    }

    pub fn sample(&self) -> &[Vertex] {
        &self.sample
    }

    pub fn qhat(&self) -> &Csr {
        &self.qhat
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    /// Top-`k` eigenvalues of `(n/s)·𝒢`, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn sizes(&self) -> &WdpSizes {
        &self.sizes
    }

    pub fn is_exact(&self) -> bool {
        self.query_mode == WalkMode::Exact
    }

    /// `Q̂ᵀ m̂` for a walk of length `len` from `x`.
    pub fn project<R: Rng + ?Sized>(&self, g: &Graph, x: Vertex, len: usize, rng: &mut R) -> Result<Vec<f64>> {
        Ok(match self.query_mode {
            WalkMode::Exact => {
                let m = exact_walk_distribution(g, len, x)?;
                self.qhat
                    .transpose_mul_sparse(m.into_iter().enumerate().filter(|e| e.1 != 0.0))
            }
            WalkMode::Sampled { walks } => {
                let d = run_random_walks(g, walks, len, x, rng);
                self.qhat.transpose_mul_sparse(d.masses())
            }
        })
    }

    /// `Bᵀ Q̂ᵀ m̂_x` with a walk of length `t + 1` (left side of a query).
    pub fn embed_left<R: Rng + ?Sized>(&self, g: &Graph, x: Vertex, rng: &mut R) -> Result<DVector<f64>> {
        let p = self.project(g, x, self.t + 1, rng)?;
        Ok(self.factor.tr_mul(&DVector::from_vec(p)))
    }

    /// `Bᵀ Q̂ᵀ m̂_y` with a walk of length `t` (right side of a query).
    pub fn embed_right<R: Rng + ?Sized>(&self, g: &Graph, y: Vertex, rng: &mut R) -> Result<DVector<f64>> {
        let p = self.project(g, y, self.t, rng)?;
        Ok(self.factor.tr_mul(&DVector::from_vec(p)))
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for v in [self.n, self.sample.len(), self.k, self.t] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        let meta = serde_json::to_vec(&(&self.sizes, &self.query_mode, &self.eigenvalues))
            .map_err(|e| Error::Parameter(e.to_string()))?;
        w.write_all(&(meta.len() as u64).to_le_bytes())?;
        w.write_all(&meta)?;
        for &v in &self.sample {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        for x in self.psi.iter().chain(self.factor.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        let q = &self.qhat;
        w.write_all(&(q.nnz() as u64).to_le_bytes())?;
        for &p in &q.indptr {
            w.write_all(&(p as u64).to_le_bytes())?;
        }
        for &i in &q.indices {
            w.write_all(&i.to_le_bytes())?;
        }
        for &v in &q.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<Rd: Read>(r: &mut Rd) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: msg.to_string(),
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a sketch file"));
        }
        let version = read_u32(r)?;
        if version != VERSION {
            return Err(bad(&format!("unsupported sketch version {version}")));
        }
        let n = read_u64(r)? as usize;
        let s = read_u64(r)? as usize;
        let k = read_u64(r)? as usize;
        let t = read_u64(r)? as usize;
        let meta_len = read_u64(r)? as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let (sizes, query_mode, eigenvalues): (WdpSizes, WalkMode, Vec<f64>) =
            serde_json::from_slice(&meta).map_err(|e| bad(&e.to_string()))?;
        let sample = (0..s).map(|_| read_u64(r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let psi = DMatrix::from_vec(s, s, read_f64s(r, s * s)?);
        let factor = DMatrix::from_vec(s, k, read_f64s(r, s * k)?);
        let nnz = read_u64(r)? as usize;
        let indptr = (0..=n).map(|_| read_u64(r).map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        let indices = (0..nnz).map(|_| read_u32(r)).collect::<Result<Vec<_>>>()?;
        let values = read_f64s(r, nnz)?;
        if indptr.last() != Some(&nnz) {
            return Err(bad("corrupt sparse matrix"));
        }
        Ok(WdpSketch {
            n,
            k,
            t,
            sample,
            qhat: Csr {
                nrows: n,
                ncols: s,
                indptr,
                indices,
                values,
            },
            psi,
            factor,
            eigenvalues,
            query_mode,
            sizes,
        })
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, count: usize) -> Result<Vec<f64>> {
    let mut b = [0u8; 8];
    (0..count)
        .map(|_| {
            r.read_exact(&mut b)?;
            Ok(f64::from_le_bytes(b))
        })
        .collect()
}

/// `(m̂_xᵀ Q̂) Ψ (Q̂ᵀ m̂_y)` with walks of length `t + 1` from `x` and `t`
/// from `y`.
pub fn wdp_query<R: Rng + ?Sized>(g: &Graph, x: Vertex, y: Vertex, sketch: &WdpSketch, rng: &mut R) -> Result<f64> {
    let a = DVector::from_vec(sketch.project(g, x, sketch.t + 1, rng)?);
    let b = DVector::from_vec(sketch.project(g, y, sketch.t, rng)?);
    Ok(a.dot(&(&sketch.psi * b)))
}

/// Left and right embeddings for a list of vertices, each vertex walked on
/// its own derived stream.
pub fn embed_all<R: Rng + ?Sized>(
    g: &Graph,
    sketch: &WdpSketch,
    vertices: &[Vertex],
    rng: &mut R,
) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let seed: u64 = rng.gen();
    let pairs = walks::par_map(vertices.len(), |i| {
        let mut r = walks::stream_rng(seed, i as u64);
        let v = vertices[i];
        Ok((sketch.embed_left(g, v, &mut r)?, sketch.embed_right(g, v, &mut r)?))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().unzip())
}
