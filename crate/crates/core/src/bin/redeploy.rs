use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use redeploy::cli::{
    load_config, plan_one_week, rebuild_report, render_plan, render_summary, run_experiment, testing_paths, write_testing_data,
    ExperimentConfig, MethodChoice, Network, NetworkChoice, RunOptions,
};

/// Nurse redeployment planning experiments.
#[derive(Parser, Debug)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment TOML, or the manifest.json of an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, global = true, value_enum)]
    network: Option<NetworkArg>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    jobs: usize,
    /// Trace CSV with the testing paths to use instead of simulating them.
    #[arg(long, global = true, value_name = "FILE")]
    freeze_paths: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write testing demand, capacity and patient traces only.
    Simulate,
    /// Plan one week of the first testing path and print it.
    Plan {
        #[arg(long, default_value_t = 1)]
        week: usize,
        /// Robust radius; 0 plans by sample average approximation.
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Run the full experiment.
    Run,
    /// Rebuild the summary tables from the weekly metrics of a run.
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Saa,
    Sro,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NetworkArg {
    #[value(alias = "hs")]
    HubAndSpoke,
    #[value(alias = "fc")]
    FullyConnected,
    Both,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => load_config(p).map_err(|e| Failure::Validation(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(m) = cli.method {
        cfg.method = match m {
            MethodArg::Saa => MethodChoice::Saa,
            MethodArg::Sro => MethodChoice::Sro,
            MethodArg::Both => MethodChoice::Both,
        };
    }
    if let Some(n) = cli.network {
        cfg.network = match n {
            NetworkArg::HubAndSpoke => NetworkChoice::HubAndSpoke,
            NetworkArg::FullyConnected => NetworkChoice::FullyConnected,
            NetworkArg::Both => NetworkChoice::Both,
        };
    }
    if let Some(f) = &cli.freeze_paths {
        cfg.freeze_paths = Some(f.clone());
    }
    cfg.validate().map_err(|e| Failure::Validation(e.to_string()))?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let runtime = |e: redeploy::Error| Failure::Runtime(e.to_string());
    if let Command::Report = cli.command {
        let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        let (_, table) = rebuild_report(&dir).map_err(runtime)?;
        print!("{}", render_summary(&table));
        return Ok(());
    }
    let cfg = configure(cli)?;
    match &cli.command {
        Command::Simulate => {
            let paths = testing_paths(&cfg).map_err(runtime)?;
            let files = write_testing_data(&cfg.out_dir.join("testing"), &cfg, &paths).map_err(runtime)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::Plan { week, epsilon } => {
            let network = match cfg.network {
                NetworkChoice::HubAndSpoke => Network::HubAndSpoke,
                _ => Network::FullyConnected,
            };
            let plan = plan_one_week(&cfg, network, *week, *epsilon).map_err(runtime)?;
            print!("{}", render_plan(&cfg.network_config(network), &plan));
        }
        Command::Run => {
            let opts = RunOptions { out_dir: Some(cfg.out_dir.clone()), jobs: cli.jobs };
            let out = run_experiment(&cfg, &opts).map_err(runtime)?;
            print!("{}", render_summary(&out.comparison));
            eprintln!("wrote {} in {:.1}s", cfg.out_dir.display(), out.manifest.wall_clock_seconds);
        }
        Command::Report => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
