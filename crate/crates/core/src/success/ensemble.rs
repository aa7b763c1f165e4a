//! Monte-Carlo ensemble of SNR thresholds.
//!
//! For a fixed channel draw the uniform-precoding rate is increasing in
//! `rho_eff`, so each draw `i` is summarised by the threshold `x_i` at which
//! it reaches the target. The success probability at any SNR is then a
//! function of the same draws (common random numbers), which keeps curves
//! over `P`, `t_s` and `M` mutually consistent.

use rayon::prelude::*;
use std::f64::consts::LN_2;

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::rng;

/// Below this many expected successes the kernel estimate is replaced by
/// importance sampling in the log domain.
const TAIL_COUNT: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct McEnsemble {
    m: usize,
    n: usize,
    xi: f64,
    seed: u64,
    /// Descending eigenvalues of the Gram matrix, one row per draw.
    eigenvalues: Vec<Vec<f64>>,
    thresholds: Vec<f64>,
    /// `ln x_i`, sorted ascending.
    log_sorted: Vec<f64>,
    bandwidth: f64,
    median: f64,
    /// `||Z||_F^2` of the draws whose threshold is at most the median.
    tail_energy: Vec<f64>,
}

/// Kernel-smoothed success estimate and its derivative in `rho_eff`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Smoothed {
    pub value: f64,
    pub derivative: f64,
}

/// SNR at which `sum log2(1 + rho lambda_k / M) = xi`.
pub(crate) fn rate_threshold(lambda: &[f64], m: usize, xi: f64) -> f64 {
    if xi == 0.0 {
        return 0.0;
    }
    let mf = m as f64;
    let positive: Vec<f64> = lambda.iter().copied().filter(|l| *l > 0.0).collect();
    if positive.is_empty() {
        return f64::INFINITY;
    }
    let target = xi * LN_2;
    let k = positive.len() as f64;
    let lmax = positive.iter().cloned().fold(0.0, f64::max);
    // lower bound on the root; Newton on a concave increasing function then
    // climbs monotonically without overshooting
    let mut rho = mf * ((xi / k).exp2() - 1.0) / lmax;
    for _ in 0..200 {
        let (mut g, mut dg) = (-target, 0.0);
        for l in &positive {
            let z = l / mf;
            g += (rho * z).ln_1p();
            dg += z / (1.0 + rho * z);
        }
        let step = g / dg;
        rho -= step;
        if step.abs() <= 1e-15 * rho {
            break;
        }
    }
    rho
}

fn triweight_cdf(u: f64) -> f64 {
    if u <= -1.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let u2 = u * u;
    0.5 + 35.0 / 32.0 * u * (1.0 - u2 + 0.6 * u2 * u2 - u2 * u2 * u2 / 7.0)
}

fn triweight(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let v = 1.0 - u * u;
    35.0 / 32.0 * v * v * v
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

impl McEnsemble {
    /// Draws `samples` `N x M` channels from `seed` and records their
    /// thresholds for target rate `xi`.
    pub fn new(m: usize, n: usize, xi: f64, samples: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::ZeroDimension { rows: n, cols: m });
        }
        if samples == 0 {
            return Err(Error::domain("samples", 0.0, ">= 1"));
        }
        if xi.is_nan() || xi < 0.0 || xi.is_infinite() {
            return Err(Error::domain("xi", xi, "finite and >= 0"));
        }
        let chunks: Vec<_> = rng::chunks(samples).collect();
        let draws: Vec<(Vec<f64>, f64, f64)> = chunks
            .into_par_iter()
            .flat_map_iter(|(c, range)| {
                let mut r = rng::stream(seed, c);
                range
                    .map(|_| {
                        let h = ChannelMatrix::new(rng::complex_normal_matrix(&mut r, n, m, 1.0))
                            .expect("nonempty finite draw");
                        let lambda = h.gram_eigenvalues();
                        let x = rate_threshold(&lambda, m, xi);
                        (lambda, x, h.frobenius_sq())
                    })
                    .collect::<Vec<_>>()
            })
            .collect();

        let mut eigenvalues = Vec::with_capacity(samples);
        let mut thresholds = Vec::with_capacity(samples);
        let mut energy = Vec::with_capacity(samples);
        for (l, x, e) in draws {
            eigenvalues.push(l);
            thresholds.push(x);
            energy.push(e);
        }

        let mut sorted = thresholds.clone();
        sorted.sort_by(f64::total_cmp);
        let median = quantile(&sorted, 0.5);
        let log_sorted: Vec<f64> = sorted.iter().map(|x| x.ln()).collect();

        let bandwidth = if xi == 0.0 {
            0.0
        } else {
            let nf = samples as f64;
            let mean = log_sorted.iter().sum::<f64>() / nf;
            let sd = (log_sorted.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / nf).sqrt();
            let iqr = quantile(&log_sorted, 0.75) - quantile(&log_sorted, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            // Silverman's rule rescaled to the triweight's unit support
            (3.0 * 0.9 * spread * nf.powf(-0.2)).max(1e-6)
        };

        let tail_energy = thresholds
            .iter()
            .zip(&energy)
            .filter(|(x, _)| **x <= median)
            .map(|(_, e)| *e)
            .collect();

        Ok(Self {
            m,
            n,
            xi,
            seed,
            eigenvalues,
            thresholds,
            log_sorted,
            bandwidth,
            median,
            tail_energy,
        })
    }

    pub fn samples(&self) -> usize {
        self.thresholds.len()
    }

    pub fn transmit(&self) -> usize {
        self.m
    }

    pub fn receive(&self) -> usize {
        self.n
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Fraction of draws whose uniform-precoding rate reaches `xi` at `rho_eff`.
    pub fn fraction(&self, rho_eff: f64) -> f64 {
        if self.xi == 0.0 {
            return 1.0;
        }
        if rho_eff == 0.0 {
            return 0.0;
        }
        let c = rho_eff / self.m as f64;
        let hits = self
            .eigenvalues
            .iter()
            .filter(|lambda| {
                lambda.iter().map(|l| (c * l).ln_1p()).sum::<f64>() / LN_2 >= self.xi
            })
            .count();
        hits as f64 / self.samples() as f64
    }

    pub(crate) fn smoothed(&self, rho_eff: f64) -> Smoothed {
        if self.xi == 0.0 {
            return Smoothed {
                value: 1.0,
                derivative: 0.0,
            };
        }
        if !(rho_eff > 0.0) {
            return Smoothed {
                value: 0.0,
                derivative: 0.0,
            };
        }
        let t = rho_eff.ln();
        let w = self.bandwidth;
        let u = &self.log_sorted;
        let below = u.partition_point(|v| *v <= t - w);
        let end = u.partition_point(|v| *v < t + w);
        let (mut cdf, mut dens) = (below as f64, 0.0);
        for v in &u[below..end] {
            let z = (t - v) / w;
            cdf += triweight_cdf(z);
            dens += triweight(z);
        }
        let nf = u.len() as f64;
        Smoothed {
            value: (cdf / nf).min(1.0),
            derivative: dens / (nf * w * rho_eff),
        }
    }

    /// Importance-sampling estimate of `(ln F, d ln F / d rho_eff)` for
    /// `rho_eff` below the median threshold.
    ///
    /// Draws are reused as `H = s Z` with `s^2 = x_median / rho_eff`, which
    /// moves the median draw onto the success boundary.
    pub(crate) fn log_tail(&self, rho_eff: f64) -> (f64, f64) {
        let s2 = self.median / rho_eff;
        let mn = (self.m * self.n) as f64;
        let ln_w: Vec<f64> = self
            .tail_energy
            .iter()
            .map(|e| mn * s2.ln() - (s2 - 1.0) * e)
            .collect();
        let top = ln_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (mut total, mut slope) = (0.0, 0.0);
        for (lw, e) in ln_w.iter().zip(&self.tail_energy) {
            let w = (lw - top).exp();
            total += w;
            slope += w * (e * s2 - mn) / rho_eff;
        }
        let ln_f = top + total.ln() - (self.samples() as f64).ln();
        (ln_f, slope / total)
    }

    /// Whether the kernel estimate is too sparse for log-domain use.
    pub(crate) fn in_tail(&self, smoothed_value: f64, rho_eff: f64) -> bool {
        smoothed_value * (self.samples() as f64) < TAIL_COUNT
            && rho_eff < self.median
            && !self.tail_energy.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_solves_rate_equation() {
        let lambda = [3.2, 1.1, 0.05];
        for xi in [0.1, 1.0, 8.0, 16.0, 40.0] {
            let x = rate_threshold(&lambda, 4, xi);
            let rate: f64 = lambda.iter().map(|l| (x * l / 4.0).ln_1p()).sum::<f64>() / LN_2;
            assert_relative_eq!(rate, xi, max_relative = 1e-12);
        }
        assert_eq!(rate_threshold(&lambda, 4, 0.0), 0.0);
        // SISO: x = (2^xi - 1) / |h|^2
        assert_relative_eq!(rate_threshold(&[0.5], 1, 3.0), 14.0, max_relative = 1e-13);
    }

    #[test]
    fn kernel_cdf_is_a_cdf() {
        assert_eq!(triweight_cdf(-1.0), 0.0);
        assert_relative_eq!(triweight_cdf(1.0 - 1e-12), 1.0, epsilon = 1e-10);
        assert_relative_eq!(triweight_cdf(0.0), 0.5);
        let h = 1e-6;
        for z in [-0.9, -0.3, 0.2, 0.8] {
            let fd = (triweight_cdf(z + h) - triweight_cdf(z - h)) / (2.0 * h);
            assert_relative_eq!(fd, triweight(z), max_relative = 1e-7);
        }
    }

    #[test]
    fn smoothed_tracks_raw_fraction_and_is_monotone() {
        let e = McEnsemble::new(2, 2, 2.0, 20_000, 9).unwrap();
        let mut prev = 0.0;
        for k in 0..200 {
            let rho = 10f64.powf(-1.0 + 0.02 * k as f64);
            let s = e.smoothed(rho);
            assert!(s.value >= prev && s.derivative >= 0.0);
            assert!((s.value - e.fraction(rho)).abs() < 0.03);
            prev = s.value;
            let h = 1e-6 * rho;
            let fd = (e.smoothed(rho + h).value - e.smoothed(rho - h).value) / (2.0 * h);
            assert!((fd - s.derivative).abs() <= 1e-5 * s.derivative.max(1e-3));
        }
    }

    #[test]
    fn log_tail_matches_siso_closed_form() {
        // SISO success is exp(-(2^xi - 1) / rho) exactly
        let e = McEnsemble::new(1, 1, 1.0, 50_000, 4).unwrap();
        for rho in [0.2, 0.1, 0.05] {
            let (ln_f, slope) = e.log_tail(rho);
            assert!((ln_f - (-1.0 / rho)).abs() < 0.05 * (1.0 / rho), "rho={rho} ln_f={ln_f}");
            assert!((slope - 1.0 / (rho * rho)).abs() < 0.1 / (rho * rho));
        }
    }

    #[test]
    fn ensemble_is_deterministic() {
        let a = McEnsemble::new(3, 2, 4.0, 3000, 1).unwrap();
        let b = McEnsemble::new(3, 2, 4.0, 3000, 1).unwrap();
        assert_eq!(a.thresholds, b.thresholds);
        let c = McEnsemble::new(3, 2, 4.0, 3000, 2).unwrap();
        assert_ne!(a.thresholds, c.thresholds);
    }
}
