//! General VNS with a fork-join worker round.
//!
//! Each round forks `W` workers. Worker `w` shakes the incumbent with its
//! own random stream, descends with [`vnd`], and returns its local optimum.
//! At the join the cheapest candidate wins (lowest worker index on ties).
//! A strictly better candidate replaces the incumbent and resets the shake
//! strength to 1; otherwise the strength grows until `kmax` and wraps.
//! The clock is read between rounds only.
//!
//! Workers and the product loop inside [`vnd`] share the rayon pool that
//! the caller installs, so nested parallelism composes without deadlock.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::Instance;
use crate::plan::{evaluate, initial_solution, lot_for_lot_rows, product_cost, Cost, Matrix, SetupPlan};
use crate::vnd::{vnd, Neighborhood, VndMode};
use crate::SolverError;

/// Redraws allowed before [`shake`] repairs infeasible products.
pub const SHAKE_REDRAWS: usize = 50;

/// The four compared solver configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Descent from the initial solution only; no shaking.
    SerialVnd,
    /// Several concurrent workers, each with a serial descent.
    Multiworker,
    /// One worker whose descent parallelizes the product loop.
    ProductParallel,
    /// Several concurrent workers with product-parallel descents.
    Hybrid,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::SerialVnd,
        Scheme::Multiworker,
        Scheme::ProductParallel,
        Scheme::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SerialVnd => "serial-vnd",
            Scheme::Multiworker => "multiworker",
            Scheme::ProductParallel => "product-parallel",
            Scheme::Hybrid => "hybrid",
        }
    }

    /// Column heading used in markdown reports.
    pub fn title(self) -> &'static str {
        match self {
            Scheme::SerialVnd => "Serial VND",
            Scheme::Multiworker => "Multiworker GVNS",
            Scheme::ProductParallel => "Product-parallel GVNS",
            Scheme::Hybrid => "Hybrid GVNS",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| SolverError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Largest shake strength.
    pub kmax: usize,
    /// Number of descent neighborhoods, `1..=4`.
    pub kmax_vnd: usize,
    pub time_limit: Duration,
    /// Workers per round. Overridden by [`solve_scheme`].
    pub workers: usize,
    /// Overridden by [`solve_scheme`].
    pub vnd_mode: VndMode,
    pub scheme: Scheme,
    pub seed: u64,
    /// Threads in the solver's pool; `None` uses rayon's global pool.
    pub parallelism: Option<usize>,
    /// Stop after this many rounds even if time remains. With a cap that
    /// binds before the clock, the search is reproducible bit for bit.
    pub max_rounds: Option<u64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kmax: 10,
            kmax_vnd: Neighborhood::COUNT,
            time_limit: Duration::from_secs(5),
            workers: 2,
            vnd_mode: VndMode::Serial,
            scheme: Scheme::Hybrid,
            seed: 1,
            parallelism: None,
            max_rounds: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if self.kmax == 0 {
            return bad("kmax must be at least 1".into());
        }
        if !(1..=Neighborhood::COUNT).contains(&self.kmax_vnd) {
            return bad(format!("kmax-vnd must be in 1..={}, got {}", Neighborhood::COUNT, self.kmax_vnd));
        }
        if self.time_limit.is_zero() {
            return bad("time limit must be positive".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        Ok(())
    }

    /// Worker count and descent mode implied by the scheme.
    pub fn effective(&self) -> Result<SolverConfig, SolverError> {
        self.validate()?;
        let (workers, vnd_mode) = match self.scheme {
            Scheme::SerialVnd => (1, VndMode::Serial),
            Scheme::ProductParallel => (1, VndMode::ProductParallel),
            Scheme::Multiworker | Scheme::Hybrid if self.workers < 2 => {
                return Err(SolverError::InvalidConfig(format!(
                    "scheme {} needs at least 2 workers, got {}",
                    self.scheme, self.workers
                )))
            }
            Scheme::Multiworker => (self.workers, VndMode::Serial),
            Scheme::Hybrid => (self.workers, VndMode::ProductParallel),
        };
        Ok(SolverConfig {
            workers,
            vnd_mode,
            ..self.clone()
        })
    }
}

/// Instrumentation counters of one search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub rounds: u64,
    pub shakes: u64,
    pub vnd_calls: u64,
    /// Random streams opened, one per worker per round.
    pub rng_streams: u64,
    pub improvements: u64,
}

#[derive(Default)]
struct Counters {
    shakes: AtomicU64,
    vnd_calls: AtomicU64,
    rng_streams: AtomicU64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub scheme: Scheme,
    pub plan: SetupPlan,
    pub cost: Cost,
    /// Descents performed.
    pub iterations: u64,
    pub wall: Duration,
    pub stats: SearchStats,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of worker `worker`'s stream in round `round`: `seed ^ hash(worker, round)`.
pub fn stream_seed(seed: u64, worker: usize, round: u64) -> u64 {
    seed ^ mix64(mix64(worker as u64).wrapping_add(round))
}

pub fn worker_rng(seed: u64, worker: usize, round: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(seed, worker, round))
}

/// Flips `k` distinct uniformly drawn setup bits of `plan`.
///
/// Draws that leave some product infeasible are retried up to
/// [`SHAKE_REDRAWS`] times. If all fail, each infeasible product of the
/// last draw is reset to its lot-for-lot rows, so the output is always
/// feasible but may then be closer than `k` bits to the input.
pub fn shake<R: rand::Rng + ?Sized>(inst: &Instance, plan: &SetupPlan, k: usize, rng: &mut R) -> SetupPlan {
    assert!(k >= 1, "shake strength must be at least 1");
    let periods = inst.periods;
    let cells = inst.products * periods;
    let k = k.min(2 * cells);

    let locate = |bit: usize| {
        let matrix = if bit < cells {
            Matrix::Manufacture
        } else {
            Matrix::Remanufacture
        };
        let cell = bit % cells;
        (matrix, cell / periods, cell % periods)
    };
    let feasible = |p: &SetupPlan, product: usize| {
        product_cost(
            inst,
            product,
            p.row(Matrix::Manufacture, product),
            p.row(Matrix::Remanufacture, product),
        )
        .is_feasible()
    };

    let mut touched = Vec::with_capacity(k);
    let mut candidate = plan.clone();
    for _ in 0..=SHAKE_REDRAWS {
        candidate.clone_from(plan);
        touched.clear();
        for bit in index::sample(rng, 2 * cells, k) {
            let (matrix, product, period) = locate(bit);
            candidate.flip(matrix, product, period);
            touched.push(product);
        }
        touched.sort_unstable();
        touched.dedup();
        if touched.iter().all(|&p| feasible(&candidate, p)) {
            return candidate;
        }
    }

    let mut m = vec![false; periods];
    let mut r = vec![false; periods];
    for &p in &touched {
        if !feasible(&candidate, p) {
            lot_for_lot_rows(inst, p, &mut m, &mut r);
            candidate.row_mut(Matrix::Manufacture, p).copy_from_slice(&m);
            candidate.row_mut(Matrix::Remanufacture, p).copy_from_slice(&r);
        }
    }
    candidate
}

/// Cheapest result of one fork-join round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub plan: SetupPlan,
    pub cost: Cost,
    pub worker: usize,
}

fn run_round(inst: &Instance, incumbent: &SetupPlan, k: usize, round: u64, cfg: &SolverConfig, counters: &Counters) -> Candidate {
    let work = |w: usize| {
        let mut rng = worker_rng(cfg.seed, w, round);
        counters.rng_streams.fetch_add(1, Ordering::Relaxed);
        let shaken = shake(inst, incumbent, k, &mut rng);
        counters.shakes.fetch_add(1, Ordering::Relaxed);
        let out = vnd(inst, &shaken, cfg.kmax_vnd, cfg.vnd_mode);
        counters.vnd_calls.fetch_add(1, Ordering::Relaxed);
        Candidate {
            plan: out.plan,
            cost: out.cost,
            worker: w,
        }
    };
    let candidates: Vec<Candidate> = if cfg.workers == 1 {
        vec![work(0)]
    } else {
        (0..cfg.workers).into_par_iter().map(work).collect()
    };
    // min_by keeps the first of equal elements, i.e. the lowest worker index
    candidates
        .into_iter()
        .min_by(|a, b| a.cost.cmp(&b.cost))
        .expect("at least one worker")
}

/// One fork-join round at shake strength `k`, using `cfg.workers` and
/// `cfg.vnd_mode` as given. Deterministic in `(cfg.seed, cfg.workers, round)`.
pub fn worker_round(inst: &Instance, incumbent: &SetupPlan, k: usize, round: u64, cfg: &SolverConfig) -> Candidate {
    run_round(inst, incumbent, k, round, cfg, &Counters::default())
}

/// GVNS from the initial solution until the time limit passes.
///
/// Uses `cfg.workers` and `cfg.vnd_mode` as given; see [`solve_scheme`]
/// for scheme-driven settings.
pub fn gvns(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let start = Instant::now();
    let counters = Counters::default();

    let mut incumbent = initial_solution(inst);
    let mut best = evaluate(inst, &incumbent);
    debug_assert!(best.is_feasible());

    let mut rounds = 0u64;
    let mut improvements = 0u64;
    let mut k = 1;
    while start.elapsed() <= cfg.time_limit && cfg.max_rounds.is_none_or(|cap| rounds < cap) {
        let cand = run_round(inst, &incumbent, k, rounds, cfg, &counters);
        rounds += 1;
        if cand.cost < best {
            best = cand.cost;
            incumbent = cand.plan;
            improvements += 1;
            k = 1;
        } else if k < cfg.kmax {
            k += 1;
        } else {
            k = 1;
        }
    }

    let stats = SearchStats {
        rounds,
        shakes: counters.shakes.into_inner(),
        vnd_calls: counters.vnd_calls.into_inner(),
        rng_streams: counters.rng_streams.into_inner(),
        improvements,
    };
    Ok(SolveResult {
        scheme: cfg.scheme,
        plan: incumbent,
        cost: best,
        iterations: stats.vnd_calls,
        wall: start.elapsed(),
        stats,
    })
}

fn solve_inner(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    match cfg.scheme {
        Scheme::SerialVnd => {
            let start = Instant::now();
            let out = vnd(inst, &initial_solution(inst), cfg.kmax_vnd, VndMode::Serial);
            Ok(SolveResult {
                scheme: Scheme::SerialVnd,
                plan: out.plan,
                cost: out.cost,
                iterations: 1,
                wall: start.elapsed(),
                stats: SearchStats {
                    vnd_calls: 1,
                    ..SearchStats::default()
                },
            })
        }
        _ => gvns(inst, cfg),
    }
}

/// Runs the configured scheme, overriding workers and descent mode as the
/// scheme requires, inside a pool of `cfg.parallelism` threads if given.
pub fn solve_scheme(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    let cfg = cfg.effective()?;
    match cfg.parallelism {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| SolverError::Pool(e.to_string()))?;
            pool.install(|| solve_inner(inst, &cfg))
        }
        None => solve_inner(inst, &cfg),
    }
}
