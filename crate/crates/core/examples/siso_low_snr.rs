//! Low-SNR optimal operating point of a SISO link against code length.

use mimo_ee::optimize::{siso_lowsnr_ratio_numeric, siso_lowsnr_root};

fn main() -> mimo_ee::Result<()> {
    println!("{:>6} {:>9} {:>9} {:>9}", "L", "x", "ratio", "direct");
    for l in [1, 3, 10, 30, 100, 300, 1000] {
        let r = siso_lowsnr_root(l)?;
        println!("{l:>6} {:>9.4} {:>9.4} {:>9.4}", r.x, r.ratio, siso_lowsnr_ratio_numeric(l)?);
    }
    Ok(())
}
