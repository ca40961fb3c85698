use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use hcost_core::estimate::{est_om_formula, estimated_cost_om_exact_w};
use hcost_core::gen::RedThreshold;
use hcost_core::graph::inner_conductance;
use hcost_core::spectral::{normalized_laplacian_eigenvalues, DENSE_CAP};
use hcost_core::{
    contract, cost_from_laplacian, estimated_cost_exact_h, estimated_cost_om, gen_planted, generate_sample,
    initialize_cost_oracle, io, materialize_k, optimal_tree_bruteforce, outer_conductance, round_to_laplacian,
    weighted_dasgupta_cost, wrsc, ContractedGraph, Error, GenParams, Graph, LbConfig, Mode, OmConfig, OracleConfig,
    Partition, PlantedParams, SeedOracle, SolverConfig, Template,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::{write_csv, write_table_csv, RunReport};
use crate::{EstMode, EstimateArgs, ExactArgs, Format, GenArgs, LbArgs, Model, ReportArgs, Threshold};

/// Counts used when `--scale` is absent. The unscaled formulas are still
/// reported next to them.
pub const DEFAULT_SIZE_SAMPLES: usize = 20_000;
pub const DEFAULT_OM_PAIR_SAMPLES: usize = 100_000;
pub const DEFAULT_RS_SEEDS: usize = 2_000;
pub const DEFAULT_RS_SAMPLE: usize = 200;
pub const DEFAULT_RS_WALKS: usize = 2_000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("generation failed: {0}")]
    Generation(Error),
    #[error("estimation failed: {0}")]
    Estimation(Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Generation(_) => 2,
            CliError::Estimation(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Context {
    pub timings: bool,
}

struct Clock {
    on: bool,
    last: Instant,
    stages: BTreeMap<String, f64>,
}

impl Clock {
    fn new(on: bool) -> Self {
        Clock {
            on,
            last: Instant::now(),
            stages: BTreeMap::new(),
        }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.insert(stage.into(), (now - self.last).as_secs_f64());
        self.last = now;
    }

    fn finish(self) -> Option<BTreeMap<String, f64>> {
        self.on.then_some(self.stages)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(graph: &Path, labels: Option<&Path>) -> Result<(Graph, Partition)> {
    let f = File::open(graph).map_err(|e| io_err(graph, e))?;
    let (g, mut p) = io::read_graph(BufReader::new(f)).map_err(|e| io_err(graph, e))?;
    if let Some(lp) = labels {
        let f = File::open(lp).map_err(|e| io_err(lp, e))?;
        p = io::read_labels(BufReader::new(f)).map_err(|e| io_err(lp, e))?;
        if p.n() != g.n() {
            return Err(io_err(lp, format!("{} labels for {} vertices", p.n(), g.n())));
        }
    }
    Ok((g, p))
}

fn emit(out: Option<&Path>, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| io_err(p, e)),
        None => std::io::stdout()
            .write_all(body)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_report(r: &RunReport, out: Option<&Path>, format: Format) -> Result<()> {
    let body = match format {
        Format::Json => r.to_json().into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, std::slice::from_ref(r)).map_err(|e| CliError::Io(e.to_string()))?;
            buf
        }
    };
    emit(out, &body)
}

fn config_value<T: serde::Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn matrix_rows(m: &hcost_core::graph::WeightedQ) -> Vec<Vec<f64>> {
    let w = m.weights();
    (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect()
}

fn summary(q: &ContractedGraph) -> String {
    let mut s = format!("k = {}, sizes = {:?}\n", q.k(), q.sizes());
    for i in 0..q.k() {
        for j in i + 1..q.k() {
            let w = q.weight(i, j);
            if w > 0.0 {
                s.push_str(&format!("  W({i},{j}) = {w}\n"));
            }
        }
    }
    s
}

pub fn gen(_ctx: &Context, a: &GenArgs) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (graph, partition) = match a.model {
        Model::Planted => {
            let params = PlantedParams {
                n: a.n,
                k: a.k,
                d: a.d,
                phi_target: a.phi,
                eps_target: a.delta,
                template: None,
                max_attempts: a.max_attempts,
            };
            let p = gen_planted(&params, &mut rng).map_err(CliError::Generation)?;
            eprintln!("certified after {} attempts: λ_k = {:.6}, λ_k+1 = {:.6}", p.attempts, p.lambda_k, p.lambda_k1);
            (p.graph, p.partition)
        }
        Model::D1 | Model::D2 => {
            let params = GenParams {
                n: a.n,
                d: a.d,
                delta: a.delta,
                k: a.k,
                template: if a.model == Model::D1 { Template::Cycle } else { Template::Expander4 },
                threshold: match a.threshold {
                    Threshold::PerCluster => RedThreshold::PerCluster,
                    Threshold::Absolute => RedThreshold::Absolute,
                },
            };
            let mut found = None;
            for _ in 0..a.max_attempts.max(1) {
                if let Some(inst) = generate_sample(&params, &mut rng).map_err(CliError::Generation)? {
                    found = Some(inst);
                    break;
                }
            }
            let inst = found.ok_or(CliError::Generation(Error::GenerationFailed {
                attempts: a.max_attempts.max(1),
            }))?;
            (inst.graph, inst.partition)
        }
    };
    let f = File::create(&a.out).map_err(|e| io_err(&a.out, e))?;
    io::write_graph(BufWriter::new(f), &graph, Some(&partition)).map_err(|e| io_err(&a.out, e))?;
    if let Some(lp) = &a.labels {
        let f = File::create(lp).map_err(|e| io_err(lp, e))?;
        io::write_labels(BufWriter::new(f), &partition).map_err(|e| io_err(lp, e))?;
    }
    let q = contract(&graph, &partition).map_err(CliError::Generation)?;
    print!("n = {}, d = {}, {}", graph.n(), graph.d(), summary(&q));
    Ok(())
}

fn solver_config(path: Option<&Path>) -> Result<SolverConfig> {
    match path {
        None => Ok(SolverConfig::default()),
        Some(p) => {
            let s = std::fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str(&s).map_err(|e| io_err(p, e))
        }
    }
}

pub fn estimate(ctx: &Context, a: &EstimateArgs) -> Result<()> {
    let mut clock = Clock::new(ctx.timings);
    let (g, p) = load(&a.graph, a.labels.as_deref())?;
    let solver = solver_config(a.config.as_deref())?;
    let a = &resolve(a);
    let scale = a.scale.unwrap_or(1.0);
    let mut config = config_value(a);
    config["solver"] = config_value(&solver);
    config["n"] = json!(g.n());
    config["k"] = json!(p.k());
    let mut report = RunReport::new("estimate", config);
    clock.lap("load");
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let outcome = match a.mode {
        EstMode::ExactH => run_exact_h(&g, &p, a, &mut report),
        EstMode::Om => run_om(&g, &p, a, scale, &mut rng, &mut report),
        EstMode::Rs => run_rs(&g, &p, a, scale, &solver, &mut rng, &mut report),
    };
    clock.lap("estimate");
    report.timings = clock.finish();
    if let Err(e) = &outcome {
        report.error = Some(e.to_string());
    }
    emit_report(&report, a.out.as_deref(), a.format)?;
    outcome.map_err(CliError::Estimation)
}

/// Fills unset counts with the defaults unless formula scaling was requested.
fn resolve(a: &EstimateArgs) -> EstimateArgs {
    let mut r = a.clone();
    if a.scale.is_some() {
        return r;
    }
    r.size_samples = r.size_samples.or(Some(DEFAULT_SIZE_SAMPLES));
    match a.mode {
        EstMode::Om => r.seeds = r.seeds.or(Some(DEFAULT_OM_PAIR_SAMPLES)),
        EstMode::Rs => {
            r.seeds = r.seeds.or(Some(DEFAULT_RS_SEEDS));
            r.sample = r.sample.or(Some(DEFAULT_RS_SAMPLE));
            r.walks = r.walks.or(Some(DEFAULT_RS_WALKS));
        }
        EstMode::ExactH => {}
    }
    r
}

fn bracket_baseline(g: &Graph, p: &Partition) -> hcost_core::Result<Option<Value>> {
    if p.k() > hcost_core::hierarchy::MAX_BRUTEFORCE_NODES {
        return Ok(None);
    }
    let h = contract(g, p)?;
    let (tree, opt) = optimal_tree_bruteforce(&h)?;
    let sq: f64 = h.sizes().iter().map(|c| c * c).sum();
    Ok(Some(json!({
        "wcost_opt": opt,
        "opt_tree": tree.to_string(),
        "lower_bracket": opt + g.d() as f64 * sq,
    })))
}

fn run_exact_h(g: &Graph, p: &Partition, a: &EstimateArgs, report: &mut RunReport) -> hcost_core::Result<()> {
    let e = estimated_cost_exact_h(g, p, a.phi)?;
    report.result = json!({
        "est": e.est,
        "wcost": e.wcost,
        "xi": e.xi,
        "tree": e.tree.to_string(),
        "sizes": e.qtilde.sizes(),
    });
    report.baselines = bracket_baseline(g, p)?;
    Ok(())
}

fn run_om<R: Rng>(
    g: &Graph,
    p: &Partition,
    a: &EstimateArgs,
    scale: f64,
    rng: &mut R,
    report: &mut RunReport,
) -> hcost_core::Result<()> {
    let oracle = SeedOracle::new(p.clone(), Mode::ClusterQuery, rng.gen()).with_scale(scale);
    let cfg = OmConfig {
        samples: a.seeds,
        size_samples: a.size_samples,
        ..OmConfig::new(a.eps, scale)
    };
    let size_count = match a.size_samples {
        Some(s) => hcost_core::ScaledCount::fixed(
            "cluster_size_seeds",
            oracle.size_sample_count(1.0 / (100.0 * p.k() as f64)).unscaled,
            s,
        ),
        None => oracle.size_sample_count(1.0 / (100.0 * p.k() as f64)),
    };
    report.formulas = vec![size_count, cfg.pair_samples(g.n(), p.k(), oracle.eta())];
    let res = estimated_cost_om(g, &oracle, &cfg, rng);
    report.queries = Some(oracle.counters());
    let e = res?;
    report.result = json!({
        "est": e.est,
        "wcost": e.wcost,
        "tree": e.tree.to_string(),
        "chat": e.chat,
        "wtilde": matrix_rows(&e.qtilde),
        "pairs": e.pairs,
    });
    let exact = estimated_cost_om_exact_w(g, p, a.eps)?;
    report.baselines = Some(json!({
        "est_exact_w": exact.est,
        "wcost_exact_w": exact.wcost,
        "est_zero_w": est_om_formula(0.0, a.eps, g.d(), g.n(), p.k(), &exact.chat),
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_rs<R: Rng>(
    g: &Graph,
    p: &Partition,
    a: &EstimateArgs,
    scale: f64,
    solver: &SolverConfig,
    rng: &mut R,
    report: &mut RunReport,
) -> hcost_core::Result<()> {
    let k = p.k();
    let oracle = SeedOracle::new(p.clone(), Mode::RandomSample, rng.gen()).with_scale(scale);
    let mut cfg = if a.exact_walks {
        OracleConfig::exact(k, a.phi, 0.0)
    } else {
        OracleConfig::new(k, a.phi, 0.0)
    };
    cfg.eps = a.eps;
    cfg.scale = scale;
    cfg.seeds = a.seeds;
    cfg.size_samples = a.size_samples;
    cfg.sketch.t = Some(a.walk_length);
    cfg.sketch.s = a.sample;
    cfg.sketch.r_init = a.walks;
    cfg.sketch.r_query = a.walks;
    let data = initialize_cost_oracle(g, &oracle, &cfg, rng);
    report.queries = Some(oracle.counters());
    let data = data?;
    let sizes = data.sketch.sizes();
    let size_count = oracle.size_sample_count(data.delta);
    report.formulas = vec![
        match a.size_samples {
            Some(s) => hcost_core::ScaledCount::fixed(&size_count.name, size_count.unscaled, s),
            None => size_count,
        },
        data.seed_count.clone(),
        sizes.t.clone(),
        sizes.s.clone(),
        sizes.r_init.clone(),
        sizes.r_query.clone(),
        sizes.reps.clone(),
    ];
    let kmat = materialize_k(&data);
    let htilde = round_to_laplacian(&kmat, a.phi, data.xi, data.n, data.d, solver)?;
    report.residuals = Some(json!({
        "violation": htilde.violation,
        "iterations": htilde.iterations,
        "feasible": htilde.feasible,
        "k_matrix": (0..k).map(|i| kmat.matrix.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
    }));
    if !htilde.feasible {
        return Err(Error::InfeasibleWithinBudget {
            violation: htilde.violation,
            iterations: htilde.iterations,
        });
    }
    let e = cost_from_laplacian(htilde, &data.chat, a.phi, data.xi, data.d, data.n, Some(kmat))?;
    report.result = json!({
        "est": e.est,
        "wcost": e.wcost,
        "xi": e.xi,
        "tree": e.tree.to_string(),
        "chat": data.chat,
        "ltilde": (0..k).map(|i| e.htilde.ltilde.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    report.baselines = Some(json!({ "est_exact_h": estimated_cost_exact_h(g, p, a.phi)?.est }));
    Ok(())
}

pub fn lb_experiment(ctx: &Context, a: &LbArgs) -> Result<()> {
    let mut clock = Clock::new(ctx.timings);
    let cfg = LbConfig {
        n: a.n,
        k: a.k,
        d: a.d,
        eps: a.eps,
        trials: a.trials,
        max_retries: a.max_retries,
    };
    let mut report = RunReport::new("lb-experiment", config_value(a));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let res = hcost_core::lb_experiment(&cfg, &mut rng);
    clock.lap("experiment");
    report.timings = clock.finish();
    let res = match res {
        Ok(r) => r,
        Err(e) => {
            report.error = Some(e.to_string());
            emit_report(&report, a.out.as_deref(), a.format)?;
            return Err(match e {
                Error::GenerationFailed { .. } | Error::Parity(_) => CliError::Generation(e),
                other => CliError::Estimation(other),
            });
        }
    };
    report.result = json!({
        "threshold": res.threshold,
        "accuracy": res.accuracy,
        "median_d1": res.median_d1,
        "median_d2": res.median_d2,
        "median_ratio": res.median_ratio(),
        "trials": res.trials,
    });
    match a.format {
        Format::Json => emit_report(&report, a.out.as_deref(), a.format),
        Format::Csv => {
            let rows = report.result["trials"].as_array().cloned().unwrap_or_default();
            let mut buf = Vec::new();
            write_table_csv(&mut buf, &rows).map_err(|e| CliError::Io(e.to_string()))?;
            emit(a.out.as_deref(), &buf)
        }
    }
}

pub fn exact(ctx: &Context, a: &ExactArgs) -> Result<()> {
    let mut clock = Clock::new(ctx.timings);
    let (g, p) = load(&a.graph, a.labels.as_deref())?;
    let mut report = RunReport::new("exact", config_value(a));
    let res = exact_baselines(&g, &p, a, &mut report);
    clock.lap("exact");
    report.timings = clock.finish();
    if let Err(e) = &res {
        report.error = Some(e.to_string());
    }
    emit_report(&report, a.out.as_deref(), a.format)?;
    res.map_err(CliError::Estimation)?;
    if let Some(lp) = &a.laplacian {
        let h = contract(&g, &p).map_err(CliError::Estimation)?;
        let f = File::create(lp).map_err(|e| io_err(lp, e))?;
        io::write_matrix(BufWriter::new(f), &h.laplacian()).map_err(|e| io_err(lp, e))?;
    }
    Ok(())
}

fn exact_baselines(g: &Graph, p: &Partition, a: &ExactArgs, report: &mut RunReport) -> hcost_core::Result<()> {
    let h = contract(g, p)?;
    let tree = wrsc(&h)?;
    let wcost = weighted_dasgupta_cost(&h, &tree)?;
    let mut outer = Vec::with_capacity(p.k());
    let mut inner = Vec::with_capacity(p.k());
    for i in 0..p.k() {
        let c = p.members(i);
        outer.push(outer_conductance(g, &c)?);
        let iv = inner_conductance(g, &c)?;
        inner.push([iv.lo, iv.hi]);
    }
    let mut result = json!({
        "n": g.n(),
        "d": g.d(),
        "k": p.k(),
        "sizes": h.sizes(),
        "w": matrix_rows(&h),
        "wrsc_tree": tree.to_string(),
        "wrsc_wcost": wcost,
        "outer_conductance": outer,
        "inner_conductance": inner,
    });
    if p.k() >= 2 {
        result["est_exact_h"] = json!(estimated_cost_exact_h(g, p, a.phi)?.est);
        result["est_om_exact_w"] = json!(estimated_cost_om_exact_w(g, p, a.eps)?.est);
    }
    if g.n() <= DENSE_CAP {
        let vals = normalized_laplacian_eigenvalues(g, DENSE_CAP)?;
        result["lambda_k"] = json!(vals[p.k() - 1]);
        if p.k() < g.n() {
            result["lambda_k1"] = json!(vals[p.k()]);
        }
    }
    report.result = result;
    report.baselines = bracket_baseline(g, p)?;
    Ok(())
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let mut reports = Vec::with_capacity(a.inputs.len());
    for path in &a.inputs {
        let s = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        reports.push(RunReport::from_json(&s).map_err(|e| io_err(path, e))?);
    }
    let body = match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&mut buf, &reports).map_err(|e| CliError::Io(e.to_string()))?;
            buf
        }
        Format::Json if reports.len() == 1 => reports[0].to_json().into_bytes(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&reports).expect("reports serialize");
            s.push('\n');
            s.into_bytes()
        }
    };
    emit(a.out.as_deref(), &body)
}
