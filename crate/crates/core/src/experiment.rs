//! D1 vs D2 distinguishability experiment on contracted-tree costs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::{sample_from_d1, sample_from_d2, Instance};
use crate::graph::contract;
use crate::hierarchy::{weighted_dasgupta_cost, wrsc};
use crate::walks::{par_map, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbConfig {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub eps: f64,
    pub trials: usize,
    /// Generation attempts per trial before giving up.
    pub max_retries: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LbTrial {
    /// 1 or 2.
    pub dist: u8,
    pub wcost: f64,
    pub attempts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbResult {
    pub trials: Vec<LbTrial>,
    /// Costs at or above the threshold are classified as D2.
    pub threshold: Option<f64>,
    pub accuracy: Option<f64>,
    pub median_d1: Option<f64>,
    pub median_d2: Option<f64>,
}

impl LbResult {
    pub fn costs(&self, dist: u8) -> Vec<f64> {
        self.trials.iter().filter(|t| t.dist == dist).map(|t| t.wcost).collect()
    }

    /// `median(D2) / median(D1)`.
    pub fn median_ratio(&self) -> Option<f64> {
        Some(self.median_d2? / self.median_d1?)
    }
}

fn draw<R: Rng + ?Sized>(cfg: &LbConfig, dist: u8, rng: &mut R) -> Result<(Instance, usize)> {
    for attempt in 1..=cfg.max_retries.max(1) {
        let inst = if dist == 1 {
            sample_from_d1(cfg.n, cfg.d, cfg.eps, cfg.k, rng)?
        } else {
            sample_from_d2(cfg.n, cfg.d, cfg.eps, cfg.k, rng)?
        };
        if let Some(inst) = inst {
            return Ok((inst, attempt));
        }
    }
    Err(Error::GenerationFailed {
        attempts: cfg.max_retries.max(1),
    })
}

/// WRSC cost of the exact contraction of one sample from D1 or D2.
pub fn trial_cost<R: Rng + ?Sized>(cfg: &LbConfig, dist: u8, rng: &mut R) -> Result<LbTrial> {
    let (inst, attempts) = draw(cfg, dist, rng)?;
    let q = contract(&inst.graph, &inst.partition)?;
    let tree = wrsc(&q)?;
    Ok(LbTrial {
        dist,
        wcost: weighted_dasgupta_cost(&q, &tree)?,
        attempts,
    })
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// Single threshold maximising the accuracy of `cost ≥ threshold ⇒ D2`.
/// Ties go to the smallest threshold.
pub fn best_threshold(trials: &[LbTrial]) -> Option<(f64, f64)> {
    if trials.is_empty() {
        return None;
    }
    let mut costs: Vec<f64> = trials.iter().map(|t| t.wcost).collect();
    costs.sort_by(f64::total_cmp);
    costs.dedup();
    let mut cands = vec![f64::NEG_INFINITY];
    cands.extend(costs.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    cands.push(f64::INFINITY);
    let total = trials.len() as f64;
    let mut best = (f64::NEG_INFINITY, -1.0);
    for thr in cands {
        let right = trials.iter().filter(|t| (t.wcost >= thr) == (t.dist == 2)).count() as f64;
        if right / total > best.1 {
            best = (thr, right / total);
        }
    }
    Some(best)
}

/// Runs `cfg.trials` independent trials, each drawing `b ∈ {1, 2}` uniformly.
pub fn lb_experiment<R: Rng + ?Sized>(cfg: &LbConfig, rng: &mut R) -> Result<LbResult> {
    let seed: u64 = rng.gen();
    let trials = par_map(cfg.trials, |i| {
        let mut r = stream_rng(seed, i as u64);
        let dist = if r.gen_bool(0.5) { 2 } else { 1 };
        trial_cost(cfg, dist, &mut r)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let (threshold, accuracy) = match best_threshold(&trials) {
        Some((t, a)) => (Some(t), Some(a)),
        None => (None, None),
    };
    let mut res = LbResult {
        trials,
        threshold,
        accuracy,
        median_d1: None,
        median_d2: None,
    };
    res.median_d1 = median(res.costs(1));
    res.median_d2 = median(res.costs(2));
    Ok(res)
}
