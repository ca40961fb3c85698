//! Fixtures shared by the benchmarks.

use hcost_core::{gen_planted, ContractedGraph, Graph, Partition, PlantedParams};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Certified planted instance with `k` clusters of `n / k` vertices, `d = 8`.
pub fn planted(n: usize, k: usize, seed: u64) -> (Graph, Partition) {
    let params = PlantedParams {
        n,
        k,
        d: 8,
        phi_target: 0.3,
        eps_target: 0.01,
        template: None,
        max_attempts: 10,
    };
    let p = gen_planted(&params, &mut rng(seed)).expect("planted instance");
    (p.graph, p.partition)
}

/// Dense random weighted graph on `k` nodes with integer vertex weights.
pub fn random_weighted(k: usize, seed: u64) -> ContractedGraph {
    let mut r = rng(seed);
    let mut w = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let x = if r.gen_bool(0.6) { r.gen_range(1..20) as f64 } else { 0.0 };
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let sizes = (0..k).map(|_| r.gen_range(1..50) as f64).collect();
    ContractedGraph::new(w, sizes).expect("valid weights")
}
