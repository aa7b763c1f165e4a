//! Water-filling over the eigenmodes of a channel estimate.

use mimo_ee::channel::sample_channel;
use mimo_ee::precoding::{mutual_info_icsitr, svd, waterfill};
use mimo_ee::{EffectiveSnr, PowerAllocation, Snr};

fn main() -> mimo_ee::Result<()> {
    let m = 4;
    let d2 = svd(&sample_channel(m, 4, 7)?)?.mode_gains();
    println!("mode gains d^2: {d2:.3?}");
    for rho in [0.1, 1.0, 10.0, 100.0] {
        let snr = EffectiveSnr { rho_eff: rho, tau: 1.0 };
        let wf = waterfill(&d2, Snr::new(rho / m as f64)?, m)?;
        let upa = PowerAllocation::identity(d2.len(), m);
        println!(
            "rho_eff = {rho:>6}: s = {:.3?}, I_wf = {:.3} bits, I_upa = {:.3} bits",
            wf.weights,
            mutual_info_icsitr(snr, &wf, &d2)?.bits(),
            mutual_info_icsitr(snr, &upa, &d2)?.bits()
        );
    }
    Ok(())
}
