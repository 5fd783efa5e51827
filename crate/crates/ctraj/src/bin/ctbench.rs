//! Monte-Carlo benchmark driver.
//!
//! Subcommands:
//!   run              run the configured experiment grid, write CSV + summary
//!   sparsity         print information-matrix bitmaps for the configured cells
//!   sweep-mp-period  sweep the spline motion-prior period ratio
//!   print-defaults   print the full default JSON config

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use ctraj::bench::{
    assemble_problem, cells_of, dump_sparsity, median, run_grid, run_trial, write_csv,
    write_summary, BenchConfig,
};
use ctraj::sim::simulate;

#[derive(Parser)]
#[command(name = "ctbench", about = "Continuous-time trajectory estimation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid and write metrics.csv plus summary.md.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Parallel trials per cell (implies --timing-serial=false when > 1).
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the trial count of the config.
        #[arg(long)]
        trials: Option<usize>,
        /// Override the master seed of the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Keep trials serial so timing columns are clean.
        #[arg(long)]
        timing_serial: Option<bool>,
    },
    /// Print the block-sparsity bitmap of each configured cell's problem.
    Sparsity {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep the spline motion-prior period (knot period over prior period).
    SweepMpPeriod {
        #[arg(long)]
        config: PathBuf,
        /// Optional CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the default configuration as JSON.
    PrintDefaults,
}

fn load_config(path: &PathBuf) -> BenchConfig {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read config {}: {e}", path.display()));
    serde_json::from_str(&text)
        .unwrap_or_else(|e| panic!("cannot parse config {}: {e}", path.display()))
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            trials,
            seed,
            timing_serial,
        } => {
            let mut cfg = load_config(&config);
            if let Some(t) = trials {
                cfg.grid.trials = t;
            }
            if let Some(s) = seed {
                cfg.scenario.seed = s;
            }
            if let Some(j) = jobs {
                cfg.output.jobs = j;
                if j > 1 {
                    cfg.output.timing_serial = false;
                }
            }
            if let Some(ts) = timing_serial {
                cfg.output.timing_serial = ts;
            }
            std::fs::create_dir_all(&out).expect("create output directory");
            let rows = run_grid(&cfg).expect("grid run failed");
            write_csv(&out.join("metrics.csv"), &rows).expect("write metrics.csv");
            write_summary(&out.join("summary.md"), &rows).expect("write summary.md");
            println!(
                "wrote {} rows to {}",
                rows.len(),
                out.join("metrics.csv").display()
            );
            for line in std::fs::read_to_string(out.join("summary.md"))
                .unwrap_or_default()
                .lines()
            {
                println!("{line}");
            }
        }
        Command::Sparsity { config } => {
            let cfg = load_config(&config);
            for cell in cells_of(&cfg.grid) {
                let (_, meas) = simulate(&cfg.scenario).expect("simulation failed");
                let problem =
                    assemble_problem(&cfg.scenario, &meas, &cell).expect("assembly failed");
                let pattern = dump_sparsity(&problem).expect("pattern failed");
                println!("# {}", cell.label());
                println!("{pattern}");
            }
        }
        Command::SweepMpPeriod { config, out } => {
            let cfg = load_config(&config);
            let ratios = [6.0, 5.0, 4.0, 3.0, 2.0, 1.0];
            let mut csv = String::from("order,knot_period,ratio_inv,median_position_rmse\n");
            for cell in cells_of(&cfg.grid) {
                if cell.representation.is_gp() {
                    continue;
                }
                for factor in ratios {
                    let mut swept = cell;
                    swept.mp_period_factor = factor;
                    let vals: Vec<f64> = (0..cfg.grid.trials)
                        .map(|t| {
                            run_trial(&cfg, &swept, t)
                                .expect("trial failed")
                                .position_rmse
                        })
                        .collect();
                    let m = median(&vals);
                    println!(
                        "k={} dt={} ratio=1/{}: median position RMSE {:.6}",
                        cell.order, cell.knot_period, factor, m
                    );
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        cell.order, cell.knot_period, factor, m
                    ));
                }
            }
            if let Some(path) = out {
                std::fs::write(&path, csv).expect("write sweep CSV");
                println!("wrote {}", path.display());
            }
        }
        Command::PrintDefaults => {
            let cfg = BenchConfig::default();
            println!("{}", serde_json::to_string_pretty(&cfg).unwrap());
        }
    }
}
