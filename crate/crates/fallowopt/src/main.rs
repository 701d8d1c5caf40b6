//! Batch front-end: parses configuration, dispatches subcommands and writes
//! deterministic result files.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fallowopt::analysis::{check_monotonicity, strategy_comparison};
use fallowopt::config::{parse_mode, parse_taus, RunConfig};
use fallowopt::optimizer::{optimize, optimize_constant, IterateLog};
use fallowopt::{simulate_schedule, ArsConfig, Error, FallowSchedule, Result};

#[derive(Parser)]
#[command(name = "fallowopt", about = "Banana-crop fallow schedule simulation and optimization")]
struct Cli {
    /// Flat key=value configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Time horizon in days.
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Optimization mode.
    #[arg(long, global = true, value_parser = ["free", "bounded", "penalized", "constant"])]
    mode: Option<String>,
    /// Per-fallow upper bound in days (bounded mode).
    #[arg(long, global = true)]
    tau_sup: Option<f64>,
    /// RNG seed for optimization runs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Verification grid step in days (constant mode and scans).
    #[arg(long, global = true)]
    grid_step: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fixed fallow schedule; writes seasons.csv and trajectory.csv.
    Simulate {
        /// Comma-separated fallow durations in days.
        #[arg(long)]
        taus: Option<String>,
    },
    /// Optimize the fallow allocation; writes result.json and iterates.csv.
    Optimize,
    /// Scan constant fallow durations; writes xi.csv and profit-vs-tau.csv.
    ScanConstant,
    /// Check trajectory ordering in the initial infestation; writes report.json.
    CheckMonotonicity {
        /// Largest initial infestation of the grid.
        #[arg(long, default_value_t = 200.0)]
        p_max: f64,
        /// Grid spacing in initial infestation.
        #[arg(long, default_value_t = 25.0)]
        p_step: f64,
    },
    /// Compare named strategies; writes comparison.csv.
    Compare {
        /// Strategy as name=tau1,tau2,...; repeatable.
        #[arg(long = "strategy", required = true)]
        strategies: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidInput(_) => ExitCode::from(2),
                Error::Infeasible(_) => ExitCode::from(3),
                Error::Numerical { .. } => ExitCode::from(4),
                Error::Io(_) => ExitCode::FAILURE,
            }
        }
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.tmax {
        cfg.t_max = t;
    }
    if let Some(g) = cli.grid_step {
        cfg.grid_step = g;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(mode) = &cli.mode {
        cfg.mode = parse_mode(mode, cli.tau_sup, None, cfg.grid_step)?;
    }
    cfg.params.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    if let Ok(threads) = std::env::var("FALLOWOPT_THREADS") {
        let threads: usize = threads
            .parse()
            .map_err(|_| Error::Config(format!("FALLOWOPT_THREADS must be an integer, got '{threads}'")))?;
        // A failure here means a pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let cfg = build_config(cli)?;
    let out = &cli.out;

    match &cli.command {
        Command::Simulate { taus } => {
            let taus = match (taus, &cfg.taus) {
                (Some(t), _) => parse_taus(t)?,
                (None, Some(t)) => t.clone(),
                (None, None) => return Err(Error::Config("simulate requires --taus".into())),
            };
            let schedule = FallowSchedule::new(taus, cfg.t_max)?;
            let outcome = simulate_schedule(&cfg.params, &schedule, Some(1.0))?;

            fs::create_dir_all(out)?;
            let mut seasons = String::from("k,t_k,tau_k,yield_k,profit_k,p_after_harvest\n");
            let starts = schedule.season_starts(cfg.params.cap_d);
            for (k, s) in outcome.seasons.iter().enumerate() {
                let tau = schedule.taus().get(k).copied().unwrap_or(0.0);
                seasons.push_str(&format!(
                    "{k},{},{tau},{},{},{}\n",
                    starts[k], s.yield_k, s.profit_k, s.p_after_harvest
                ));
            }
            fs::write(out.join("seasons.csv"), seasons)?;

            let mut traj = String::from("t,P,S,X\n");
            for (k, s) in outcome.seasons.iter().enumerate() {
                for p in s.trajectory.as_deref().unwrap_or(&[]) {
                    let t = starts[k] + p.t;
                    traj.push_str(&format!("{t},{},{},{}\n", p.p, p.s, p.x));
                }
            }
            fs::write(out.join("trajectory.csv"), traj)?;

            println!(
                "{} seasons, total profit {:.2} XAF, final infestation {:.2}",
                outcome.seasons.len(),
                outcome.total_profit,
                outcome.final_infestation
            );
        }

        Command::Optimize => {
            let ars = ArsConfig::with_seed(cfg.seed);
            let mut log = IterateLog::default();
            let outcome = optimize(&cfg.params, cfg.t_max, &cfg.mode, &ars, Some(&mut log))?;

            fs::create_dir_all(out)?;
            let json = serde_json::to_string_pretty(&outcome)
                .map_err(|e| Error::Config(e.to_string()))?;
            fs::write(out.join("result.json"), json + "\n")?;
            let file = fs::File::create(out.join("iterates.csv"))?;
            log.write_csv(std::io::BufWriter::new(file))?;

            println!(
                "n* = {} fallows, profit {:.2} XAF, final infestation {:.2} ({} evaluations)",
                outcome.n_star, outcome.profit_star, outcome.final_infestation, outcome.evaluations
            );
            if cli.verbose {
                println!("tau* = {:?}", outcome.tau_star);
            }
        }

        Command::ScanConstant => {
            let scan = optimize_constant(&cfg.params, cfg.t_max, cfg.grid_step)?;

            fs::create_dir_all(out)?;
            let mut xi = String::from("n,tau\n");
            for p in &scan.xi {
                xi.push_str(&format!("{},{}\n", p.n, p.tau));
            }
            fs::write(out.join("xi.csv"), xi)?;

            let mut profile = String::from("tau,seasons,profit,final_infestation,in_xi\n");
            for p in &scan.scan {
                profile.push_str(&format!(
                    "{},{},{},{},{}\n",
                    p.tau, p.seasons, p.profit, p.final_infestation, p.in_xi
                ));
            }
            fs::write(out.join("profit-vs-tau.csv"), profile)?;

            if scan.grid_beats_xi {
                eprintln!(
                    "warning: a grid point beats every breakpoint; \
                     the trajectory-ordering assumption may not hold"
                );
            }
            println!(
                "tau* = {} days, {} seasons, profit {:.2} XAF, final infestation {:.2}",
                scan.tau_star, scan.n_seasons, scan.profit, scan.final_infestation
            );
        }

        Command::CheckMonotonicity { p_max, p_step } => {
            let mut grid = Vec::new();
            let mut p = 0.0;
            while p <= p_max + 1e-9 {
                grid.push(p);
                p += p_step;
            }
            let report = check_monotonicity(&cfg.params, &grid, 1.0)?;

            fs::create_dir_all(out)?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::Config(e.to_string()))?;
            fs::write(out.join("report.json"), json + "\n")?;

            println!(
                "monotone: {} (P {}, X {}, S {})",
                report.is_monotone(),
                report.ordered_p,
                report.ordered_x,
                report.ordered_s
            );
        }

        Command::Compare { strategies } => {
            let mut named = Vec::new();
            for spec in strategies {
                let (name, taus) = spec.split_once('=').ok_or_else(|| {
                    Error::Config(format!("expected name=tau1,tau2,..., got '{spec}'"))
                })?;
                named.push((name.to_string(), FallowSchedule::new(parse_taus(taus)?, cfg.t_max)?));
            }
            let table = strategy_comparison(&cfg.params, &named)?;

            fs::create_dir_all(out)?;
            let file = fs::File::create(out.join("comparison.csv"))?;
            let mut w = std::io::BufWriter::new(file);
            writeln!(w, "strategy,k,t_k,tau_k,yield_k,profit_k,p_after_harvest")?;
            for r in &table.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    r.strategy, r.k, r.t_k, r.tau_k, r.yield_k, r.profit_k, r.p_after_harvest
                )?;
            }

            for ((name, total), (_, p)) in table.totals.iter().zip(&table.final_infestations) {
                println!("{name}: profit {total:.2} XAF, final infestation {p:.2}");
            }
        }
    }

    Ok(())
}
