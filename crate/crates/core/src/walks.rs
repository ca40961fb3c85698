//! Lazy random walks, empirical endpoint distributions, the transition slice
//! `Q̂` and collision-probability Gram matrices.
//!
//! Parallel work is split into fixed-size chunks, each driven by its own
//! ChaCha stream derived from one seed drawn from the caller's generator, so
//! results do not depend on the number of worker threads.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::spectral::DENSE_CAP;

static THREADS: AtomicUsize = AtomicUsize::new(0);

/// Walks per parallel chunk in [`run_random_walks`].
pub const WALK_CHUNK: usize = 2048;

/// Sets the worker count for walk batches. Zero means all available cores.
pub fn set_threads(n: usize) {
    THREADS.store(n, Ordering::Relaxed);
}

pub fn threads() -> usize {
    match THREADS.load(Ordering::Relaxed) {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// `f(0), …, f(count − 1)` computed on the worker pool, in order.
pub(crate) fn par_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = threads().min(count).max(1);
    if workers == 1 {
        return (0..count).map(f).collect();
    }
    let per = count.div_ceil(workers);
    let f = &f;
    std::thread::scope(|sc| {
        let handles: Vec<_> = (0..workers)
            .map(|w| sc.spawn(move || (w * per..((w + 1) * per).min(count)).map(f).collect::<Vec<T>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("walk worker panicked"))
            .collect()
    })
}

/// Endpoint frequencies of `walks` lazy walks of length `length`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalDist {
    /// `(vertex, hits)` sorted by vertex, hits > 0.
    support: Vec<(u32, u32)>,
    walks: u32,
    length: usize,
}

impl EmpiricalDist {
    fn from_endpoints(mut ends: Vec<u32>, length: usize) -> Self {
        let walks = ends.len() as u32;
        ends.sort_unstable();
        let mut support: Vec<(u32, u32)> = Vec::new();
        for v in ends {
            match support.last_mut() {
                Some(last) if last.0 == v => last.1 += 1,
                _ => support.push((v, 1)),
            }
        }
        EmpiricalDist {
            support,
            walks,
            length,
        }
    }

    pub fn walks(&self) -> usize {
        self.walks as usize
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    pub fn hits(&self) -> &[(u32, u32)] {
        &self.support
    }

    pub fn mass(&self, v: Vertex) -> f64 {
        match self.support.binary_search_by_key(&(v as u32), |e| e.0) {
            Ok(i) => self.support[i].1 as f64 / self.walks as f64,
            Err(_) => 0.0,
        }
    }

    /// `(vertex, probability)` pairs.
    pub fn masses(&self) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        let r = self.walks as f64;
        self.support.iter().map(move |&(v, c)| (v as Vertex, c as f64 / r))
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (v, m) in self.masses() {
            out[v] = m;
        }
        out
    }

    pub fn dot(&self, other: &EmpiricalDist) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0u64);
        let (a, b) = (&self.support, &other.support);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 as u64 * b[j].1 as u64;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc as f64 / (self.walks as f64 * other.walks as f64)
    }
}

/// One lazy step: stay with probability 1/2, else follow a uniform half-edge.
#[inline]
pub fn lazy_step<R: Rng + ?Sized>(g: &Graph, v: u32, rng: &mut R) -> u32 {
    let d = g.d();
    let r = rng.gen_range(0..2 * d);
    if r < d {
        g.ports(v as Vertex)[r]
    } else {
        v
    }
}

fn endpoints<R: Rng + ?Sized>(g: &Graph, x: Vertex, t: usize, count: usize, rng: &mut R) -> Vec<u32> {
    (0..count)
        .map(|_| {
            let mut v = x as u32;
            for _ in 0..t {
                v = lazy_step(g, v, rng);
            }
            v
        })
        .collect()
}

/// `r` independent `t`-step lazy walks from `x`. Large batches are split
/// across workers.
pub fn run_random_walks<R: Rng + ?Sized>(g: &Graph, r: usize, t: usize, x: Vertex, rng: &mut R) -> EmpiricalDist {
    assert!(x < g.n(), "start vertex {x} out of range");
    let seed: u64 = rng.gen();
    let chunks = r.div_ceil(WALK_CHUNK);
    let ends: Vec<u32> = par_map(chunks, |c| {
        let count = WALK_CHUNK.min(r - c * WALK_CHUNK);
        endpoints(g, x, t, count, &mut stream_rng(seed, c as u64))
    })
    .into_iter()
    .flatten()
    .collect();
    EmpiricalDist::from_endpoints(ends, t)
}

/// Single-threaded variant for callers that already parallelize.
pub(crate) fn run_walks_serial<R: Rng + ?Sized>(g: &Graph, r: usize, t: usize, x: Vertex, rng: &mut R) -> EmpiricalDist {
    EmpiricalDist::from_endpoints(endpoints(g, x, t, r, rng), t)
}

/// `y ← M y` with `M = (I + A/d)/2`.
pub fn apply_walk(g: &Graph, y: &[f64]) -> Vec<f64> {
    let d = g.d() as f64;
    (0..g.n())
        .map(|v| {
            let s: f64 = g.row(v).iter().map(|&(u, m)| m as f64 * y[u as usize]).sum();
            0.5 * y[v] + 0.5 * s / d
        })
        .collect()
}

/// `M^t 1_x` by repeated sparse multiplication.
pub fn exact_walk_distribution(g: &Graph, t: usize, x: Vertex) -> Result<Vec<f64>> {
    exact_walk_distribution_capped(g, t, x, DENSE_CAP)
}

pub fn exact_walk_distribution_capped(g: &Graph, t: usize, x: Vertex, cap: usize) -> Result<Vec<f64>> {
    if g.n() > cap {
        return Err(Error::TooLarge { n: g.n(), cap });
    }
    if x >= g.n() {
        return Err(Error::Parameter(format!("vertex {x} out of range")));
    }
    let mut y = vec![0.0; g.n()];
    y[x] = 1.0;
    for _ in 0..t {
        y = apply_walk(g, &y);
    }
    Ok(y)
}

/// Whether walk distributions are sampled or computed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkMode {
    Sampled { walks: usize },
    Exact,
}

/// Compressed sparse rows. In `Q̂` rows are vertices and columns sample slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds from per-column sparse entries `(row, value)`.
    pub fn from_columns(nrows: usize, columns: &[Vec<(Vertex, f64)>]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for col in columns {
            for &(r, _) in col {
                counts[r + 1] += 1;
            }
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let nnz = counts[nrows];
        let mut next = counts.clone();
        let mut indices = vec![0u32; nnz];
        let mut values = vec![0.0; nnz];
        for (j, col) in columns.iter().enumerate() {
            for &(r, v) in col {
                indices[next[r]] = j as u32;
                values[next[r]] = v;
                next[r] += 1;
            }
        }
        Csr {
            nrows,
            ncols: columns.len(),
            indptr: counts,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |p| (self.indices[p] as usize, self.values[p]))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).filter(|&(j, _)| j == c).map(|e| e.1).sum()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.ncols];
        for (j, v) in self.indices.iter().zip(&self.values) {
            s[*j as usize] += v;
        }
        s
    }

    /// `Q̂ᵀ m` for a sparse vector `m` given as `(row, value)` pairs.
    pub fn transpose_mul_sparse(&self, m: impl IntoIterator<Item = (Vertex, f64)>) -> Vec<f64> {
        let mut out = vec![0.0; self.ncols];
        for (r, w) in m {
            for (j, v) in self.row(r) {
                out[j] += w * v;
            }
        }
        out
    }

    /// `QᵀQ` as a dense matrix.
    pub fn gram(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.ncols, self.ncols);
        for r in 0..self.nrows {
            let row: Vec<(usize, f64)> = self.row(r).collect();
            for &(i, a) in &row {
                for &(j, b) in &row {
                    g[(i, j)] += a * b;
                }
            }
        }
        g
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for (j, v) in self.row(r) {
                m[(r, j)] += v;
            }
        }
        m
    }
}

fn column<R: Rng + ?Sized>(g: &Graph, x: Vertex, t: usize, mode: WalkMode, rng: &mut R) -> Result<Vec<(Vertex, f64)>> {
    Ok(match mode {
        WalkMode::Sampled { walks } => run_walks_serial(g, walks, t, x, rng).masses().collect(),
        WalkMode::Exact => exact_walk_distribution(g, t, x)?
            .into_iter()
            .enumerate()
            .filter(|e| e.1 != 0.0)
            .collect(),
    })
}

/// `Q̂ ≈ M^t S` for the sample `I_S`: column `j` is the walk distribution
/// from `sample[j]`.
pub fn estimate_transition_matrix<R: Rng + ?Sized>(
    g: &Graph,
    sample: &[Vertex],
    mode: WalkMode,
    t: usize,
    rng: &mut R,
) -> Result<Csr> {
    let seed: u64 = rng.gen();
    let cols = par_map(sample.len(), |j| column(g, sample[j], t, mode, &mut stream_rng(seed, j as u64)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Csr::from_columns(g.n(), &cols))
}

/// Estimated collision probabilities `⟨m_{x_i}, m_{x_j}⟩` over a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub matrix: DMatrix<f64>,
    pub sample: Vec<Vertex>,
}

fn cross_gram(a: &[EmpiricalDist], b: &Csr) -> DMatrix<f64> {
    let s = a.len();
    let rows: Vec<Vec<f64>> = par_map(s, |i| b.transpose_mul_sparse(a[i].masses()));
    DMatrix::from_fn(s, s, |i, j| rows[i][j])
}

/// Gram matrix of the walk distributions from `sample`. Sampled mode takes
/// the entrywise lower median over `reps` repetitions of the cross inner
/// product between two independent walk batches, then symmetrizes.
pub fn estimate_collision_probabilities<R: Rng + ?Sized>(
    g: &Graph,
    sample: &[Vertex],
    mode: WalkMode,
    t: usize,
    reps: usize,
    rng: &mut R,
) -> Result<GramMatrix> {
    let s = sample.len();
    let matrix = match mode {
        WalkMode::Exact => estimate_transition_matrix(g, sample, mode, t, rng)?.gram(),
        WalkMode::Sampled { walks } => {
            let reps = reps.max(1);
            let mut estimates: Vec<DMatrix<f64>> = Vec::with_capacity(reps);
            for _ in 0..reps {
                let seed: u64 = rng.gen();
                let batch = |offset: u64| {
                    par_map(s, |j| {
                        run_walks_serial(g, walks, t, sample[j], &mut stream_rng(seed, offset + j as u64))
                    })
                };
                let first = batch(0);
                let second = batch(s as u64);
                let cols: Vec<Vec<(Vertex, f64)>> = second.iter().map(|d| d.masses().collect()).collect();
                estimates.push(cross_gram(&first, &Csr::from_columns(g.n(), &cols)));
            }
            let mut m = DMatrix::from_fn(s, s, |i, j| {
                let mut v: Vec<f64> = estimates.iter().map(|e| e[(i, j)]).collect();
                v.sort_by(|a, b| a.total_cmp(b));
                v[(v.len() - 1) / 2]
            });
            let mt = m.transpose();
            m += mt;
            m * 0.5
        }
    };
    Ok(GramMatrix {
        matrix,
        sample: sample.to_vec(),
    })
}

/// Default repetition count `⌈ln n⌉`.
pub fn default_reps(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn k2() -> Graph {
        Graph::regularized(2, 2, [(0, 1)]).unwrap()
    }

    #[test]
    fn zero_length_is_point_mass() {
        let g = cycle(10);
        let d = run_random_walks(&g, 100, 0, 3, &mut rng(1));
        assert_eq!(d.hits(), &[(3, 100)]);
        assert_eq!(exact_walk_distribution(&g, 0, 3).unwrap()[3], 1.0);
    }

    #[test]
    fn single_vertex_stays() {
        let g = Graph::from_multiplicities(1, 4, &[], &[4]).unwrap();
        let d = run_random_walks(&g, 50, 17, 0, &mut rng(2));
        assert_eq!(d.mass(0), 1.0);
    }

    #[test]
    fn k2_tv_distance_small() {
        let g = k2();
        let exact = exact_walk_distribution(&g, 3, 0).unwrap();
        for seed in 0..20 {
            let d = run_random_walks(&g, 100_000, 3, 0, &mut rng(seed));
            let tv: f64 = (0..2).map(|v| (d.mass(v) - exact[v]).abs()).sum::<f64>() / 2.0;
            assert!(tv <= 0.01, "{tv}");
        }
    }

    #[test]
    fn exact_is_distribution_and_mixes() {
        let (g, _) = two_cliques();
        for t in [0, 1, 5, 50] {
            let y = exact_walk_distribution(&g, t, 2).unwrap();
            assert!(y.iter().all(|&v| v >= 0.0));
            assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let y = exact_walk_distribution(&g, 2000, 2).unwrap();
        assert!(y.iter().all(|&v| (v - 1.0 / 8.0).abs() <= 1.0 / 8.0));
    }

    #[test]
    fn masses_are_quantized() {
        let g = cycle(30);
        let d = run_random_walks(&g, 777, 9, 0, &mut rng(3));
        assert!(d.support_len() <= 777);
        let total: u32 = d.hits().iter().map(|h| h.1).sum();
        assert_eq!(total, 777);
        assert!((d.masses().map(|m| m.1).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_of_worker_count() {
        let g = cycle(64);
        set_threads(1);
        let a = run_random_walks(&g, 10_000, 12, 5, &mut rng(4));
        let qa = estimate_transition_matrix(&g, &[1, 2, 3, 4, 5], WalkMode::Sampled { walks: 300 }, 6, &mut rng(5)).unwrap();
        set_threads(3);
        let b = run_random_walks(&g, 10_000, 12, 5, &mut rng(4));
        let qb = estimate_transition_matrix(&g, &[1, 2, 3, 4, 5], WalkMode::Sampled { walks: 300 }, 6, &mut rng(5)).unwrap();
        set_threads(0);
        assert_eq!(a, b);
        assert_eq!(qa, qb);
    }

    #[test]
    fn transition_matrix_columns() {
        let g = cycle(20);
        let q = estimate_transition_matrix(&g, &[0, 7, 7], WalkMode::Sampled { walks: 200 }, 5, &mut rng(6)).unwrap();
        assert_eq!(q.ncols, 3);
        assert!(q.nnz() <= 600);
        assert!(q.column_sums().iter().all(|s| (s - 1.0).abs() < 1e-12));
        let single = estimate_transition_matrix(&g, &[4], WalkMode::Sampled { walks: 50 }, 2, &mut rng(7)).unwrap();
        assert_eq!(single.ncols, 1);
        let qe = estimate_transition_matrix(&g, &[4], WalkMode::Exact, 3, &mut rng(7)).unwrap();
        let exact = exact_walk_distribution(&g, 3, 4).unwrap();
        for v in 0..20 {
            assert!((qe.get(v, 0) - exact[v]).abs() < 1e-15);
        }
    }

    #[test]
    fn exact_gram_is_qtq() {
        let (g, _) = two_cliques();
        let sample = [0, 3, 5, 5];
        let gm = estimate_collision_probabilities(&g, &sample, WalkMode::Exact, 4, 1, &mut rng(8)).unwrap();
        let q = estimate_transition_matrix(&g, &sample, WalkMode::Exact, 4, &mut rng(8)).unwrap().to_dense();
        let expect = q.transpose() * q;
        assert!((gm.matrix - expect).abs().max() < 1e-14);
    }

    #[test]
    fn sampled_gram_symmetric_nonnegative() {
        let g = cycle(40);
        let gm = estimate_collision_probabilities(&g, &[0, 1, 20], WalkMode::Sampled { walks: 500 }, 4, 5, &mut rng(9)).unwrap();
        assert_eq!(gm.matrix, gm.matrix.transpose());
        assert!(gm.matrix.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn single_rep_gram_is_unbiased() {
        // mean of 500 single-rep estimates within 3 standard errors of exact
        let g = cycle(16);
        let sample = [0, 1, 8];
        let t = 3;
        let exact = estimate_collision_probabilities(&g, &sample, WalkMode::Exact, t, 1, &mut rng(0)).unwrap().matrix;
        let trials = 500;
        let mut r = rng(10);
        let runs: Vec<DMatrix<f64>> = (0..trials)
            .map(|_| {
                estimate_collision_probabilities(&g, &sample, WalkMode::Sampled { walks: 20 }, t, 1, &mut r)
                    .unwrap()
                    .matrix
            })
            .collect();
        for i in 0..3 {
            for j in 0..3 {
                let xs: Vec<f64> = runs.iter().map(|m| m[(i, j)]).collect();
                let mean = xs.iter().sum::<f64>() / trials as f64;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
                let se = (var / trials as f64).sqrt().max(1e-12);
                assert!((mean - exact[(i, j)]).abs() <= 3.0 * se + 1e-12, "({i},{j}) {mean} vs {}", exact[(i, j)]);
            }
        }
    }

    #[test]
    fn dot_matches_dense() {
        let g = cycle(25);
        let a = run_random_walks(&g, 300, 6, 0, &mut rng(11));
        let b = run_random_walks(&g, 200, 6, 3, &mut rng(12));
        let dense: f64 = a.to_dense(25).iter().zip(b.to_dense(25)).map(|(x, y)| x * y).sum();
        assert!((a.dot(&b) - dense).abs() < 1e-15);
    }
}
