//! Training length against estimation error and effective SNR.

use mimo_ee::channel::{effective_snr, estimation_error_variance, simulate_estimate};
use mimo_ee::Snr;

fn main() -> mimo_ee::Result<()> {
    let (m, n) = (4, 4);
    let rho = Snr::from_power(0.1, 1e-3)?;
    println!("rho = {:.1}", rho.value());
    println!("{:>4} {:>12} {:>12}", "t_s", "sigma_E^2", "rho_eff");
    for t_s in [4, 8, 16, 32, 54] {
        let s2 = estimation_error_variance(rho, t_s, m)?;
        let e = effective_snr(rho, t_s as f64 / m as f64)?;
        println!("{t_s:>4} {s2:>12.4e} {:>12.3}", e.rho_eff);
    }

    let draws = 200;
    let mut err = 0.0;
    let mut model = 0.0;
    for seed in 0..draws {
        let (h, est) = simulate_estimate(m, n, rho, 8, seed)?;
        err += (h.as_matrix() - est.estimate.as_matrix()).norm_squared() / (m * n * draws as usize) as f64;
        model = est.error_variance;
    }
    println!("t_s = 8 over {draws} draws: empirical error power {err:.4e}, model {model:.4e}");
    Ok(())
}
