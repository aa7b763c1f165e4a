//! Runs a named experiment programmatically and writes its CSV.
//!
//! `cargo run --release --example figure_sweep -- sweep-power-nocsit out.csv`

use mimo_ee::experiment::{run_experiment, ExperimentName, ExperimentSpec};
use mimo_ee::SystemConfig;

fn main() -> mimo_ee::Result<()> {
    let mut args = std::env::args().skip(1);
    let name: ExperimentName = args.next().as_deref().unwrap_or("sweep-power-nocsit").parse()?;
    let out = args.next().unwrap_or_else(|| format!("{name}.csv"));

    let spec = ExperimentSpec::new(name, SystemConfig::default()).with_sampling(1, 5_000);
    let result = run_experiment(&spec)?;
    result.write(&out)?;
    print!("{}", result.summary);
    println!("wrote {out}");
    Ok(())
}
