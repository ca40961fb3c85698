//! Label access models with query accounting.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Partition, Vertex};
use crate::params::{cluster_size_samples, LogBase, ScaledCount};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// i.i.d. labeled vertices only.
    RandomSample,
    /// Label queries for chosen vertices.
    ClusterQuery,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounters {
    pub seeds_issued: u64,
    pub cluster_queries: u64,
    pub edge_queries: u64,
}

impl std::ops::Sub for QueryCounters {
    type Output = QueryCounters;

    fn sub(self, rhs: Self) -> Self {
        QueryCounters {
            seeds_issued: self.seeds_issued - rhs.seeds_issued,
            cluster_queries: self.cluster_queries - rhs.cluster_queries,
            edge_queries: self.edge_queries - rhs.edge_queries,
        }
    }
}

/// Hidden ground truth behind one of the two access models. Safe to share
/// across threads; generator draws are serialized.
#[derive(Debug)]
pub struct SeedOracle {
    mode: Mode,
    partition: Partition,
    eta: f64,
    rng: Mutex<ChaCha8Rng>,
    seeds_issued: AtomicU64,
    cluster_queries: AtomicU64,
    edge_queries: AtomicU64,
    scale: f64,
    log: LogBase,
}

impl SeedOracle {
    pub fn new(partition: Partition, mode: Mode, seed: u64) -> Self {
        let eta = partition.eta();
        SeedOracle {
            mode,
            partition,
            eta,
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
            seeds_issued: AtomicU64::new(0),
            cluster_queries: AtomicU64::new(0),
            edge_queries: AtomicU64::new(0),
            scale: 1.0,
            log: LogBase::Natural,
        }
    }

    /// Sample-size scale factor applied to [`SeedOracle::estimate_cluster_size`].
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_log_base(mut self, log: LogBase) -> Self {
        self.log = log;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn k(&self) -> usize {
        self.partition.k()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn counters(&self) -> QueryCounters {
        QueryCounters {
            seeds_issued: self.seeds_issued.load(Ordering::Relaxed),
            cluster_queries: self.cluster_queries.load(Ordering::Relaxed),
            edge_queries: self.edge_queries.load(Ordering::Relaxed),
        }
    }

    /// Records `count` adjacency probes made by a caller.
    pub fn record_edge_queries(&self, count: u64) {
        self.edge_queries.fetch_add(count, Ordering::Relaxed);
    }

    /// `s` uniform vertices with replacement, with their labels.
    pub fn sample_seeds(&self, s: usize) -> Vec<(Vertex, usize)> {
        let n = self.n();
        let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
        let out = (0..s)
            .map(|_| {
                let v = rng.gen_range(0..n);
                (v, self.partition.label(v))
            })
            .collect();
        self.seeds_issued.fetch_add(s as u64, Ordering::Relaxed);
        out
    }

    /// Every vertex once with its label. Used by exact-mode pipelines; counts
    /// as `n` issued seeds.
    pub fn all_labeled(&self) -> Vec<(Vertex, usize)> {
        let n = self.n();
        self.seeds_issued.fetch_add(n as u64, Ordering::Relaxed);
        (0..n).map(|v| (v, self.partition.label(v))).collect()
    }

    /// `s` uniform vertices with replacement, without revealing labels.
    pub fn sample_vertices(&self, s: usize) -> Vec<Vertex> {
        let n = self.n();
        let mut rng = self.rng.lock().unwrap_or_else(|e| e.into_inner());
        (0..s).map(|_| rng.gen_range(0..n)).collect()
    }

    pub fn query_cluster(&self, v: Vertex) -> Result<usize> {
        if self.mode != Mode::ClusterQuery {
            return Err(Error::WrongMode);
        }
        if v >= self.n() {
            return Err(Error::Parameter(format!("vertex {v} out of range")));
        }
        self.cluster_queries.fetch_add(1, Ordering::Relaxed);
        Ok(self.partition.label(v))
    }

    /// Seed count used for size estimation at accuracy `delta`.
    pub fn size_sample_count(&self, delta: f64) -> ScaledCount {
        let raw = cluster_size_samples(self.n(), self.k(), self.eta, delta, self.log);
        ScaledCount::new("cluster_size_seeds", raw, self.scale).at_least_one()
    }

    /// `ĉ_i = |S ∩ C_i| / s · n` from a fresh seed sample.
    pub fn estimate_cluster_size(&self, i: usize, delta: f64) -> Result<f64> {
        Ok(self.estimate_cluster_sizes(delta)?[i])
    }

    /// Estimates every cluster size from one shared seed sample.
    pub fn estimate_cluster_sizes(&self, delta: f64) -> Result<Vec<f64>> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta = {delta} outside (0, 1)")));
        }
        self.estimate_cluster_sizes_from(self.size_sample_count(delta).scaled)
    }

    /// Size estimates from `s` fresh seeds.
    pub fn estimate_cluster_sizes_from(&self, s: usize) -> Result<Vec<f64>> {
        if s == 0 {
            return Err(Error::Parameter("size estimation needs at least one seed".into()));
        }
        let mut counts = vec![0usize; self.k()];
        for (_, l) in self.sample_seeds(s) {
            counts[l] += 1;
        }
        let n = self.n() as f64;
        Ok(counts.into_iter().map(|c| c as f64 / s as f64 * n).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn halves(n: usize) -> Partition {
        Partition::new((0..n).map(|v| (2 * v / n) as u32).collect(), 2).unwrap()
    }

    #[test]
    fn single_cluster_labels() {
        let o = SeedOracle::new(Partition::single(50), Mode::RandomSample, 1);
        assert!(o.sample_seeds(100).iter().all(|&(_, l)| l == 0));
        assert_eq!(o.estimate_cluster_size(0, 0.5).unwrap(), 50.0);
    }

    #[test]
    fn seeds_match_labels_and_counts() {
        let p = halves(1000);
        let o = SeedOracle::new(p.clone(), Mode::RandomSample, 2);
        let seeds = o.sample_seeds(10_000);
        assert!(seeds.iter().all(|&(v, l)| p.label(v) == l));
        let c0 = seeds.iter().filter(|s| s.1 == 0).count() as f64;
        assert!((c0 - 5000.0).abs() <= 3.0 * 50.0);
        assert_eq!(o.counters().seeds_issued, 10_000);
        assert_eq!(o.counters().cluster_queries, 0);
    }

    #[test]
    fn duplicates_appear() {
        let o = SeedOracle::new(halves(20), Mode::RandomSample, 3);
        let mut v: Vec<_> = o.sample_seeds(400).into_iter().map(|s| s.0).collect();
        v.sort_unstable();
        v.dedup();
        assert!(v.len() < 400);
    }

    #[test]
    fn query_modes() {
        let p = halves(10);
        let o = SeedOracle::new(p.clone(), Mode::ClusterQuery, 4);
        assert_eq!(o.query_cluster(7).unwrap(), 1);
        assert_eq!(o.query_cluster(7).unwrap(), 1);
        assert_eq!(o.counters().cluster_queries, 2);
        let r = SeedOracle::new(p, Mode::RandomSample, 4);
        assert!(matches!(r.query_cluster(0), Err(Error::WrongMode)));
        assert_eq!(r.counters().cluster_queries, 0);
    }

    #[test]
    fn size_estimates_within_delta() {
        // unscaled s ≈ 400·ln 400·4/0.0025 ≈ 3.8e6 per trial; 20 trials
        let p = halves(400);
        let mut ok = 0;
        for seed in 0..20 {
            let o = SeedOracle::new(p.clone(), Mode::RandomSample, seed);
            let c = o.estimate_cluster_sizes(0.05).unwrap();
            if c.iter().all(|&x| (x - 200.0).abs() < 0.05 * 200.0) {
                ok += 1;
            }
        }
        assert_eq!(ok, 20);
    }

    #[test]
    fn per_cluster_counts_concentrate() {
        let p = Partition::new((0..4096).map(|v| (v % 4) as u32).collect(), 4).unwrap();
        let mut ok = 0;
        for seed in 0..100 {
            let o = SeedOracle::new(p.clone(), Mode::RandomSample, seed).with_scale(1e-3);
            let s = o.size_sample_count(0.1).scaled;
            let mut counts = [0usize; 4];
            for (_, l) in o.sample_seeds(s) {
                counts[l] += 1;
            }
            let mean = s as f64 / 4.0;
            if counts.iter().all(|&c| (c as f64 - mean).abs() < 0.1 * mean) {
                ok += 1;
            }
        }
        assert!(ok >= 99, "{ok}");
    }

    #[test]
    fn concurrent_counters_exact() {
        let o = SeedOracle::new(halves(100), Mode::ClusterQuery, 5);
        std::thread::scope(|sc| {
            for _ in 0..4 {
                sc.spawn(|| {
                    for v in 0..100 {
                        o.query_cluster(v).unwrap();
                    }
                    o.sample_seeds(25);
                });
            }
        });
        let c = o.counters();
        assert_eq!(c.cluster_queries, 400);
        assert_eq!(c.seeds_issued, 100);
    }
}
