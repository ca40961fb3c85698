//! Sublinear estimation of Dasgupta's hierarchical-clustering cost on
//! clusterable regular graphs.
//!
//! The crate has three layers:
//!
//! - exact references: [`graph`], [`spectral`], exhaustive tree oracles in
//!   [`hierarchy`];
//! - sublinear machinery: seeded label access ([`seeds`]), lazy random walks
//!   ([`walks`]), the weighted dot-product sketch ([`wdp`]), the contracted
//!   quadratic form and its Laplacian rounding ([`quadratic`]);
//! - end-to-end estimators ([`estimate`]), instance generators ([`gen`]) and
//!   the distinguishability experiment ([`experiment`]).
//!
//! Every randomized entry point takes an explicit seeded generator so runs are
//! reproducible.

pub mod error;
pub mod estimate;
pub mod experiment;
pub mod gen;
pub mod graph;
pub mod hierarchy;
pub mod io;
pub mod params;
pub mod quadratic;
pub mod seeds;
pub mod spectral;
pub mod walks;
pub mod wdp;

pub use error::{Error, Result};
pub use graph::{
    conductance, contract, cut_weight, inner_conductance, laplacian_quadratic, outer_conductance,
    ContractedGraph, Graph, Interval, Partition, Vertex, WeightedQ,
};
pub use spectral::{exact_spectral, exact_wdp, SpectralData};
pub use estimate::{
    approx_contracted_graph_om, cost_from_laplacian, estimated_cost, estimated_cost_exact_h, estimated_cost_om, initialize_cost_oracle,
    initialize_oracle_om, CostEstimate, OmConfig, OmEstimate,
};
pub use experiment::{lb_experiment, LbConfig, LbResult};
pub use gen::{gen_planted, generate_sample, sample_from_d1, sample_from_d2, GenParams, Instance, PlantedParams, Template};
pub use hierarchy::{dasgupta_cost, optimal_tree_bruteforce, weighted_dasgupta_cost, wrsc, HierTree};
pub use params::{LogBase, ScaledCount};
pub use quadratic::{
    approx_contracted_graph, initialize_oracle, materialize_k, quadratic_oracle, round_to_laplacian, ApproxLaplacian, CostOracleData,
    KMatrix, OracleConfig, SolverConfig,
};
pub use seeds::{Mode, QueryCounters, SeedOracle};
pub use walks::{set_threads, EmpiricalDist, WalkMode};
pub use wdp::{init_wdp, wdp_query, WdpConfig, WdpSketch};
