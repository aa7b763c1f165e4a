//! Energy-efficient transmit power with and without CSI at the transmitter.

use mimo_ee::channel::sample_channel;
use mimo_ee::config::watts_to_dbm;
use mimo_ee::efficiency::{Allocation, CsitrLink};
use mimo_ee::optimize::{optimal_power_csitr_link, optimal_power_infinite_block_link, optimal_power_nocsit};
use mimo_ee::precoding::svd;
use mimo_ee::{SuccessSource, SystemConfig};

fn main() -> mimo_ee::Result<()> {
    let mut cfg = SystemConfig { m: 2, n: 2, t_s: 2, ..SystemConfig::default() };
    cfg.set_xi(4.0);

    for b in [0.0, 1e-3, 1e-2] {
        let c = SystemConfig { b, ..cfg.clone() };
        let r = optimal_power_nocsit(&c, &SuccessSource::Auto { samples: 50_000, seed: 3 })?;
        println!(
            "no CSIT, b = {b:.0e} W: P* = {:.3e} W ({:.1} dBm), nu* = {:.4e} bits/J, FOC root {:?}",
            r.argmax,
            watts_to_dbm(r.argmax),
            r.value,
            r.foc_root
        );
    }

    let link = CsitrLink::from_mode_gains(svd(&sample_channel(2, 2, 3)?)?.mode_gains(), 2)?;
    let finite = optimal_power_csitr_link(&link, &cfg, Allocation::WaterFilling)?;
    let infinite = optimal_power_infinite_block_link(&link, &cfg)?;
    println!(
        "CSIT, L = {}: P* = {:.3e} W, nu* = {:.4e}; infinite block: P* = {:.3e} W, nu* = {:.4e}",
        cfg.l, finite.argmax, finite.value, infinite.argmax, infinite.value
    );
    Ok(())
}
