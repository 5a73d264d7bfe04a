use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mtsp_cli::{
    cmd_bench, cmd_generate, cmd_solve, exit_code, load_instance, load_params, m_from_percent, BenchOptions,
    SolveOptions,
};

#[derive(Parser)]
#[command(name = "mtsp", version, about = "Min-max multiple traveling salesman solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances in the native JSON format.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one instance and write its run record.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, required_unless_present = "m_percent", conflicts_with = "m_percent")]
        m: Option<usize>,
        /// Salesmen as a percentage of the nodes, rounded to the nearest integer.
        #[arg(long)]
        m_percent: Option<f64>,
        /// Seconds; defaults to the number of nodes, depot included.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params_file: Option<PathBuf>,
        /// Stop after this many iterations; makes the run reproducible.
        #[arg(long)]
        max_iterations: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include per-iteration records.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        parallel: bool,
    },
    /// Run a batch and write per-run records plus a summary.
    Bench {
        /// Glob pattern of instance files.
        #[arg(long)]
        instances: String,
        #[arg(long, value_delimiter = ',', required = true)]
        m_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        max_iterations: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Generate { n, count, seed, out } => {
            for p in cmd_generate(n, count, seed, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Solve {
            instance,
            m,
            m_percent,
            time_limit,
            seed,
            params_file,
            max_iterations,
            out,
            trace,
            parallel,
        } => {
            let m = match (m, m_percent) {
                (Some(m), _) => m,
                (None, Some(pct)) => {
                    let n = load_instance(&instance)?.size();
                    let m = m_from_percent(pct, n);
                    eprintln!("warning: {pct}% of {n} nodes rounded to m = {m}");
                    m
                }
                (None, None) => unreachable!("clap requires one of --m, --m-percent"),
            };
            let params = params_file.as_deref().map(load_params).transpose()?;
            let opts = SolveOptions {
                m,
                seed,
                time_limit,
                params,
                max_iterations,
                trace,
                parallel,
            };
            let record = cmd_solve(&instance, &opts, out.as_deref())?;
            if out.is_some() {
                eprintln!("best {} after {:.2}s", record.best_value, record.time_to_best_s);
            }
        }
        Command::Bench {
            instances,
            m_list,
            runs,
            time_limit,
            max_iterations,
            seed,
            out,
        } => {
            let opts = BenchOptions {
                m_list,
                runs,
                time_limit,
                max_iterations,
                seed,
            };
            let rows = cmd_bench(&instances, &opts, &out)?;
            print!("{}", mtsp_cli::summary_csv(&rows));
        }
    }
    Ok(())
}
