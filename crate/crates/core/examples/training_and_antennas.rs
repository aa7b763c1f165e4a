//! Optimal training length and number of transmit antennas against power.

use mimo_ee::config::dbm_to_watts;
use mimo_ee::optimize::{antenna_curves, optimal_antennas_with, optimal_training, PowerMode};
use mimo_ee::{SuccessSource, SystemConfig};

fn main() -> mimo_ee::Result<()> {
    let source = SuccessSource::Auto { samples: 10_000, seed: 5 };

    let mut cfg = SystemConfig { m: 2, n: 4, t_s: 2, t_total: 10, p_max: 1e4, ..SystemConfig::default() };
    cfg.set_xi(16.0);
    for dbm in [-10.0, 10.0, 30.0, 50.0] {
        let t = optimal_training(&cfg, &source, PowerMode::Fixed(dbm_to_watts(dbm)))?;
        println!("P = {dbm:>5} dBm: t_s* = {}, concave = {}", t.t_s, t.concave);
    }

    let mut cfg = SystemConfig { m: 4, n: 4, t_s: 4, t_total: 100, b: 10e-3, p_max: 1e8, ..SystemConfig::default() };
    cfg.set_xi(2.0);
    let curves = antenna_curves(&cfg, 1..=4, &source)?;
    for dbm in [-20.0, 0.0, 20.0, 80.0] {
        let table = optimal_antennas_with(&cfg, &curves, PowerMode::Fixed(dbm_to_watts(dbm)))?;
        let best = table.best_row();
        println!("P = {dbm:>5} dBm: M* = {}, t_s* = {}", best.m, best.t_s);
    }
    Ok(())
}
