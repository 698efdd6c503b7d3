//! `lotvns`: generate instances, solve them with one of the four schemes,
//! run the exhaustive oracle, or run a benchmark suite.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or validation error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use lotvns_core::{
    emit_csv, emit_markdown, enumerate_optimal, generate_instance, parse_instance, parse_suite, run_bench,
    serialize_instance, solve_scheme, GeneratorConfig, Instance, Scheme, SolverConfig, SolverError,
};

#[derive(Parser)]
#[command(name = "lotvns", version, about = "Parallel GVNS for multi-item lot sizing with remanufacturing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance as JSON.
    Generate {
        #[arg(long)]
        products: usize,
        #[arg(long)]
        periods: usize,
        #[arg(long, default_value_t = 100)]
        demand_max: i64,
        #[arg(long, default_value_t = 0.5)]
        return_ratio: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve an instance and print the objective and wall time.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        /// Budget in seconds.
        #[arg(long)]
        time_limit: f64,
        #[arg(long, default_value_t = 2)]
        workers: usize,
        /// Threads in the solver pool (defaults to all cores).
        #[arg(long)]
        parallelism: Option<usize>,
        /// Largest shake strength.
        #[arg(long, default_value_t = SolverConfig::default().kmax)]
        kmax: usize,
        /// Number of descent neighborhoods (1..=4).
        #[arg(long, default_value_t = SolverConfig::default().kmax_vnd)]
        kmax_vnd: usize,
        /// Stop after this many rounds, for reproducible runs.
        #[arg(long)]
        max_rounds: Option<u64>,
        #[arg(long)]
        seed: u64,
    },
    /// Exhaustive decoder optimum (at most 10 periods).
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run a benchmark suite and write CSV (and optionally markdown) reports.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_md: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Io(String),
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidConfig(_) | SolverError::UnknownScheme(_) | SolverError::UnknownMode(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Io(other.to_string()),
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Generate {
            products,
            periods,
            demand_max,
            return_ratio,
            seed,
            out,
        } => {
            let cfg = GeneratorConfig {
                demand_max,
                return_ratio,
                ..GeneratorConfig::new(products, periods, seed)
            };
            let inst = generate_instance(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
            write_file(&out, &serialize_instance(&inst))?;
            println!("wrote {} ({products} products x {periods} periods)", out.display());
        }
        Command::Solve {
            instance,
            scheme,
            time_limit,
            workers,
            parallelism,
            kmax,
            kmax_vnd,
            max_rounds,
            seed,
        } => {
            if !(time_limit > 0.0 && time_limit.is_finite()) {
                return Err(Failure::Usage(format!("--time-limit must be positive, got {time_limit}")));
            }
            let cfg = SolverConfig {
                kmax,
                kmax_vnd,
                time_limit: Duration::from_secs_f64(time_limit),
                workers,
                scheme,
                seed,
                parallelism,
                max_rounds,
                ..SolverConfig::default()
            };
            cfg.effective()?;
            let inst = read_instance(&instance)?;
            let res = solve_scheme(&inst, &cfg)?;
            println!(
                "scheme={} objective={} objective_cents={} wall_s={:.3} iterations={} rounds={}",
                res.scheme,
                res.cost,
                res.cost.cents(),
                res.wall.as_secs_f64(),
                res.iterations,
                res.stats.rounds
            );
        }
        Command::Oracle { instance } => {
            let inst = read_instance(&instance)?;
            let sol = enumerate_optimal(&inst)?;
            println!("objective={} objective_cents={}", sol.cost, sol.cost.cents());
        }
        Command::Bench { suite, out_csv, out_md } => {
            let text = std::fs::read_to_string(&suite).map_err(|e| Failure::Io(format!("{}: {e}", suite.display())))?;
            let cfg = parse_suite(&text).map_err(|e| Failure::Io(format!("{}: {e}", suite.display())))?;
            let base = suite.parent().unwrap_or(Path::new("."));
            let report = run_bench(&cfg, base)?;
            write_file(&out_csv, &emit_csv(&report))?;
            let md = emit_markdown(&report);
            if let Some(path) = out_md {
                write_file(&path, &md)?;
            }
            print!("{md}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("usage error"));
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
