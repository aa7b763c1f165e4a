//! Success probabilities: closed forms, Monte Carlo and finite-block F_L.

use mimo_ee::success::{f_l_arq, f_l_gaussian, success_closed, success_mc};
use mimo_ee::{BlockParams, MutualInfo, Snr};

fn main() -> mimo_ee::Result<()> {
    let xi = 2.0;
    println!("{:>8} {:>10} {:>10} {:>10}", "rho_eff", "1x1", "MC 1x1", "MC 2x2");
    for rho in [1.0, 3.0, 10.0, 30.0, 100.0] {
        let exact = success_closed(1, 1, rho, xi)?;
        let mc = success_mc(1, 1, rho, xi, 100_000, 1)?;
        let mimo = success_mc(2, 2, rho, xi, 100_000, 1)?;
        println!("{rho:>8} {:>10.5} {:>10.5} {:>10.5}", exact.value, mc.value, mimo.value);
    }

    let block = BlockParams::new(100, xi)?;
    let rho = Snr::new(10.0)?;
    for i in [1.5, 1.9, 2.0, 2.1, 2.5] {
        let g = f_l_gaussian(MutualInfo::from_bits(i), &block, rho)?;
        let a = f_l_arq(i - xi, 10.0)?;
        println!("I = {i}: F_L gaussian {:.4}, arq(T=10) {:.4}", g.value, a.value);
    }
    Ok(())
}
