//! Parallel general variable neighborhood search for the uncapacitated
//! multi-item economic lot-sizing problem with remanufacturing.
//!
//! * [`model`]: instances, the synthetic generator and JSON I/O.
//! * [`plan`]: setup-pattern encoding, decoding and evaluation.
//! * [`vnd`]: variable neighborhood descent with a product-parallel pass.
//! * [`gvns`]: shaking and the fork-join GVNS loop, plus the four schemes.
//! * [`oracle`]: exhaustive optimum for tiny instances.
//! * [`report`] and [`suite`]: the benchmark harness.

pub mod gvns;
pub mod model;
pub mod oracle;
pub mod plan;
pub mod report;
pub mod suite;
pub mod vnd;

use thiserror::Error;

pub use gvns::{gvns, shake, solve_scheme, worker_round, Scheme, SearchStats, SolveResult, SolverConfig};
pub use model::{
    generate_instance, parse_instance, serialize_instance, validate_instance, GeneratorConfig, Instance, IntRange,
    ModelError, Violation,
};
pub use oracle::{enumerate_optimal, OracleSolution};
pub use plan::{decode, evaluate, evaluate_product, initial_solution, Cost, DecodedPlan, Matrix, SetupPlan};
pub use report::{emit_csv, emit_markdown, BenchReport, BenchRow, SchemeSummary};
pub use suite::{parse_suite, run_bench, SuiteConfig};
pub use vnd::{apply_delta, best_neighbor, enumerate_neighbors, vnd, vnd_pass, ImprovementDelta, Move, Neighborhood, VndMode, VndOutcome};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("neighborhood id {0} is out of range 1..=4")]
    NeighborhoodOutOfRange(usize),
    #[error("unknown scheme `{0}` (expected serial-vnd, multiworker, product-parallel or hybrid)")]
    UnknownScheme(String),
    #[error("unknown descent mode `{0}` (expected serial or product-parallel)")]
    UnknownMode(String),
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("oracle needs at most {max} periods, instance has {periods}")]
    OracleIntractable { periods: usize, max: usize },
    #[error("cannot build thread pool: {0}")]
    Pool(String),
    #[error("report: {0}")]
    Report(String),
    #[error("suite: {0}")]
    Suite(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
