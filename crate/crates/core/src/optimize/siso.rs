//! Low-SNR asymptotics of the SISO optimum.
//!
//! For `xi -> 0` the optimal SNR scales as `rho* = c(L) xi / |h|^2`. The
//! constant comes from the root `x` of
//! `(L + x) exp(-x^2 / 2) / sqrt(pi) - Q(x) = 0` via `c(L) = L / (L + x)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::success::q;

use super::search::{maximize_unimodal, Bracket};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SisoRoot {
    pub l: usize,
    pub x: f64,
    /// `|g(x)|` at the returned root.
    pub residual: f64,
    /// `rho* |h|^2 / xi = L / (L + x)`.
    pub ratio: f64,
}

fn g(l: f64, x: f64) -> f64 {
    (l + x) * (-0.5 * x * x).exp() / PI.sqrt() - q(x)
}

pub fn siso_lowsnr_root(l: usize) -> Result<SisoRoot> {
    if l == 0 {
        return Err(Error::domain("L", 0.0, ">= 1"));
    }
    let lf = l as f64;
    // g(-L) = -Q(-L) < 0 and g(0) = L / sqrt(pi) - 1/2 > 0
    let (mut a, mut b) = (-lf, 0.0);
    let (ga, gb) = (g(lf, a), g(lf, b));
    if !(ga < 0.0 && gb > 0.0) {
        let scan: Vec<String> = (0..=10)
            .map(|k| {
                let x = -lf + lf * k as f64 / 10.0;
                format!("g({x:.3}) = {:.3e}", g(lf, x))
            })
            .collect();
        return Err(Error::NoBracket {
            lo: a,
            hi: b,
            detail: scan.join(", "),
        });
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if g(lf, m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let x = if g(lf, a).abs() < g(lf, b).abs() { a } else { b };
    Ok(SisoRoot {
        l,
        x,
        residual: g(lf, x).abs(),
        ratio: lf / (lf + x),
    })
}

/// `rho* |h|^2 / xi` found by maximising `Q(L (xi - rho) / rho) / rho`
/// directly, the low-SNR form of the SISO efficiency with `b = 0`.
pub fn siso_lowsnr_ratio_numeric(l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::domain("L", 0.0, ">= 1"));
    }
    let lf = l as f64;
    let r = maximize_unimodal(
        |r| Ok(crate::success::ln_q(lf * (1.0 - r) / r) - r.ln()),
        Bracket::new(0.05, 20.0, 1e-10)?,
    )?;
    Ok(r.argmax)
}
