//! Benchmark suites: which instances to load or generate, which schemes to
//! compare, and under what budget.
//!
//! A suite file is JSON:
//!
//! ```json
//! {
//!   "instances": [
//!     { "file": "a.json" },
//!     { "generate": { "products": 50, "periods": 52, "seed": 1 }, "count": 30 }
//!   ],
//!   "schemes": ["serial-vnd", "multiworker", "product-parallel", "hybrid"],
//!   "time_limit": 5.0,
//!   "seeds": [1]
//! }
//! ```
//!
//! Relative `file` paths resolve against the suite file's directory. A
//! `generate` entry with `count: n` expands to seeds `seed..seed+n`.

use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gvns::{solve_scheme, Scheme, SolverConfig};
use crate::model::{generate_instance, parse_instance, GeneratorConfig, Instance};
use crate::report::{BenchReport, BenchRow};
use crate::vnd::Neighborhood;
use crate::SolverError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GeneratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub instances: Vec<InstanceSource>,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<Scheme>,
    /// Seconds per (instance, scheme, seed) cell.
    pub time_limit: f64,
    /// One repetition per seed.
    #[serde(default = "one_seed")]
    pub seeds: Vec<u64>,
    #[serde(default = "two")]
    pub workers: usize,
    #[serde(default)]
    pub parallelism: Option<usize>,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_kmax_vnd")]
    pub kmax_vnd: usize,
    /// Run cells concurrently. Distorts timing; never use when measuring speedup.
    #[serde(default)]
    pub parallel_cells: bool,
}

fn all_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}
fn one_seed() -> Vec<u64> {
    vec![1]
}
fn two() -> usize {
    2
}
fn default_kmax() -> usize {
    SolverConfig::default().kmax
}
fn default_kmax_vnd() -> usize {
    Neighborhood::COUNT
}

impl SuiteConfig {
    /// `count` generated instances at desk scale: 50 products, 52 periods,
    /// 5 s per cell, all four schemes.
    pub fn desk(count: usize) -> Self {
        Self {
            instances: vec![InstanceSource {
                id: None,
                file: None,
                generate: Some(GeneratorConfig::new(50, 52, 1)),
                count: Some(count),
            }],
            schemes: all_schemes(),
            time_limit: 5.0,
            seeds: one_seed(),
            workers: 2,
            parallelism: None,
            kmax: default_kmax(),
            kmax_vnd: default_kmax_vnd(),
            parallel_cells: false,
        }
    }

    pub fn solver_config(&self, scheme: Scheme, seed: u64) -> SolverConfig {
        SolverConfig {
            kmax: self.kmax,
            kmax_vnd: self.kmax_vnd,
            time_limit: Duration::from_secs_f64(self.time_limit),
            workers: self.workers,
            scheme,
            seed,
            parallelism: self.parallelism,
            ..SolverConfig::default()
        }
    }
}

pub fn parse_suite(text: &str) -> Result<SuiteConfig, SolverError> {
    serde_json::from_str(text).map_err(|e| SolverError::Suite(e.to_string()))
}

/// Loads every instance of the suite, validating each. Fails on the first
/// bad source with its id in the message.
pub fn load_instances(suite: &SuiteConfig, base_dir: &Path) -> Result<Vec<(String, Instance)>, SolverError> {
    let mut out = Vec::new();
    for (pos, src) in suite.instances.iter().enumerate() {
        let base = out.len();
        let label = |i: usize| -> String {
            match (&src.id, src.count) {
                (Some(id), Some(n)) if n > 1 => format!("{id}-{}", i + 1),
                (Some(id), _) => id.clone(),
                (None, _) => (base + i + 1).to_string(),
            }
        };
        match (&src.file, &src.generate) {
            (Some(path), None) => {
                if src.count.is_some() {
                    return Err(SolverError::Suite(format!("instance source {}: `count` needs `generate`", pos + 1)));
                }
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let id = label(0);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| SolverError::Suite(format!("instance {id}: cannot read {}: {e}", full.display())))?;
                let inst = parse_instance(&text).map_err(|e| SolverError::Suite(format!("instance {id}: {e}")))?;
                out.push((id, inst));
            }
            (None, Some(gen)) => {
                let n = src.count.unwrap_or(1);
                for i in 0..n {
                    let id = label(i);
                    let cfg = GeneratorConfig {
                        seed: gen.seed.wrapping_add(i as u64),
                        ..gen.clone()
                    };
                    let inst = generate_instance(&cfg).map_err(|e| SolverError::Suite(format!("instance {id}: {e}")))?;
                    out.push((id, inst));
                }
            }
            _ => {
                return Err(SolverError::Suite(format!(
                    "instance source {} must have exactly one of `file` or `generate`",
                    pos + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Runs every (instance, seed, scheme) cell. With several seeds the row id
/// is `"<instance>#<seed>"`, so each report row stays unique.
pub fn run_bench(suite: &SuiteConfig, base_dir: &Path) -> Result<BenchReport, SolverError> {
    if suite.schemes.is_empty() || suite.seeds.is_empty() || suite.instances.is_empty() {
        return Err(SolverError::Suite("suite needs instances, schemes and seeds".into()));
    }
    if !(suite.time_limit > 0.0 && suite.time_limit.is_finite()) {
        return Err(SolverError::Suite(format!("time_limit {} is not positive", suite.time_limit)));
    }
    for &scheme in &suite.schemes {
        suite.solver_config(scheme, 0).effective()?;
    }
    let instances = load_instances(suite, base_dir)?;

    let mut cells = Vec::new();
    for (id, inst) in &instances {
        for &seed in &suite.seeds {
            let row_id = if suite.seeds.len() > 1 { format!("{id}#{seed}") } else { id.clone() };
            for &scheme in &suite.schemes {
                cells.push((row_id.clone(), inst, seed, scheme));
            }
        }
    }
    let run = |(id, inst, seed, scheme): &(String, &Instance, u64, Scheme)| -> Result<BenchRow, SolverError> {
        let res = solve_scheme(inst, &suite.solver_config(*scheme, *seed))?;
        Ok(BenchRow {
            id: id.clone(),
            scheme: *scheme,
            objective_cents: res.cost.cents(),
            wall_s: res.wall.as_secs_f64(),
            seed: *seed,
            iterations: res.iterations,
        })
    };
    let rows: Result<Vec<BenchRow>, SolverError> = if suite.parallel_cells {
        cells.par_iter().map(run).collect()
    } else {
        cells.iter().map(run).collect()
    };
    BenchReport::new(rows?)
}
