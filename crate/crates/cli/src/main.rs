use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use horolab::experiment::{list_experiments, load_config, run_experiment, ExperimentConfig, ExperimentKind};
use horolab::rep_theory::verify_lemma_sl2;

/// Equidistribution experiments for translated curves in hyperbolic manifolds.
#[derive(Parser)]
#[command(name = "horolab", version)]
struct Cli {
    /// Worker threads (defaults to all cores); results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file or with built-in defaults.
    Run(RunArgs),
    /// List the experiment registry.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Check the SL(2) norm inequality and determinant identity; prints JSON lines.
    Verify(VerifyArgs),
    /// Print the built-in config of an experiment as TOML.
    Config { experiment: ExperimentKind },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "experiment", required_unless_present = "experiment")]
    config: Option<PathBuf>,
    /// Registry name; runs the built-in config.
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: the config's output_dir, else out/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Irrep dimensions minus one, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5, 6, 7, 8])]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [0.5, -0.5, 1.0, -1.0, 2.0, -2.0])]
    t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

const FAILED: u8 = 1;
const ERROR: u8 = 2;

fn run(args: RunArgs) -> Result<bool, String> {
    let mut config = match (&args.config, args.experiment) {
        (Some(path), _) => load_config(path).map_err(|e| e.to_string())?,
        (None, Some(kind)) => ExperimentConfig::default_for(kind),
        (None, None) => unreachable!("clap requires one of --config and --experiment"),
    };
    if let Some(seed) = args.seed {
        config.set_seed(seed);
    }
    let out = args
        .out
        .or_else(|| config.output_dir().cloned())
        .unwrap_or_else(|| PathBuf::from("out").join(config.kind().name()));
    let report = run_experiment(&config).map_err(|e| e.to_string())?;
    report
        .write(&out)
        .map_err(|e| format!("cannot write reports to {}: {e}", out.display()))?;
    println!("{report}");
    println!("reports written to {}", out.display());
    Ok(report.pass())
}

fn verify(args: VerifyArgs) -> Result<bool, String> {
    let mut pass = true;
    for &m in &args.m {
        for &t in &args.t {
            let r = verify_lemma_sl2(m, t, args.trials, args.seed).map_err(|e| e.to_string())?;
            pass &= r.violations == 0 && r.det_check == "pass";
            println!("{}", serde_json::to_string(&r).map_err(|e| e.to_string())?);
        }
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(ERROR);
        }
    }
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::List { json } => {
            let list = list_experiments();
            if json {
                println!("{}", serde_json::to_string_pretty(&list).expect("registry serializes"));
            } else {
                for e in list {
                    println!("{:<26} {}\n{:<26} exercises: {}", e.name, e.description, "", e.exercises);
                }
            }
            Ok(true)
        }
        Command::Config { experiment } => {
            print!("{}", ExperimentConfig::default_for(experiment).to_toml());
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ERROR)
        }
    }
}
