use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mimo_ee::config::load_config;
use mimo_ee::experiment::{run_experiment, ExperimentName, ExperimentSpec, Grid};
use mimo_ee::SuccessSource;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuccessArg {
    /// Closed form when min(M, N) = 1, Monte Carlo otherwise.
    Auto,
    Closed,
    Mc,
}

/// Regenerate energy-efficiency figure data as CSV.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    /// sweep-power-csitr, sweep-rate, sweep-power-nocsit, optimal-training-curve,
    /// optimal-antennas-curve, siso-analysis or compare-pa-upa
    experiment: String,
    /// key = value system configuration
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Monte-Carlo channel draws per success curve
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Output CSV, defaults to <experiment>.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// min:max:points[:lin|log]; power axes are in dBm
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = SuccessArg::Auto)]
    success: SuccessArg,
    /// Comma-separated eigenmode gains d_i^2 of the channel estimate
    #[arg(long, value_delimiter = ',')]
    channel_gains: Option<Vec<f64>>,
    /// Optimise P below each grid power in the training and antenna curves
    #[arg(long)]
    optimize_power: bool,
    /// Worker threads, 0 for all cores
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn run(args: Args) -> mimo_ee::Result<()> {
    let name: ExperimentName = args.experiment.parse()?;
    let config = load_config(&args.config)?;
    let mut spec = ExperimentSpec::new(name, config);
    if let Some(g) = &args.grid {
        spec.grid = g.parse::<Grid>()?;
    }
    spec.success = match args.success {
        SuccessArg::Auto => SuccessSource::Auto { samples: 0, seed: 0 },
        SuccessArg::Closed => SuccessSource::ClosedForm,
        SuccessArg::Mc => SuccessSource::MonteCarlo { samples: 0, seed: 0 },
    };
    spec = spec.with_sampling(args.seed, args.samples);
    spec.channel_gains = args.channel_gains;
    spec.optimize_power = args.optimize_power;

    if args.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build_global()
            .map_err(|e| mimo_ee::Error::config("threads", e.to_string()))?;
    }

    let out = run_experiment(&spec)?;
    let path = args.out.unwrap_or_else(|| PathBuf::from(format!("{name}.csv")));
    out.write(&path)?;
    print!("{}", out.summary);
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
