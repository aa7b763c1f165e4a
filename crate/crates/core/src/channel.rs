//! Fading channel samples, the training-based estimation model and the
//! effective SNR that folds estimation noise into an equivalent perfect-CSI
//! channel.
//!
//! With `t_s` orthogonal training symbols shared by `M` transmit antennas the
//! per-entry estimation error variance is `1 / (1 + rho * t_s / M)`. The
//! worst-case (Gaussian) error model turns this into an SNR loss:
//!
//! ```text
//! rho_eff(rho, tau) = tau * rho^2 / (1 + rho + tau * rho),   tau = t_s / M
//! ```
//!
//! applied to the estimate normalised to unit variance.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

/// Complex `N x M` channel matrix: rows are receive antennas, columns transmit antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(DMatrix<Complex64>);

impl ChannelMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension { rows, cols });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("channel matrix"));
        }
        Ok(Self(entries))
    }

    /// Diagonal channel whose eigenmode gains `d_i^2` are `gains[i]`.
    pub fn from_mode_gains(gains: &[f64], rows: usize, cols: usize) -> Result<Self> {
        if gains.len() > rows.min(cols) {
            return Err(Error::DimensionMismatch(format!(
                "{} mode gains for a {rows}x{cols} channel",
                gains.len()
            )));
        }
        if let Some(&g) = gains.iter().find(|g| !(**g >= 0.0) || !g.is_finite()) {
            return Err(Error::domain("mode gain", g, "finite and >= 0"));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for (i, g) in gains.iter().enumerate() {
            m[(i, i)] = Complex64::new(g.sqrt(), 0.0);
        }
        Self::new(m)
    }

    /// Number of receive antennas `N`.
    pub fn receive(&self) -> usize {
        self.0.nrows()
    }

    /// Number of transmit antennas `M`.
    pub fn transmit(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Hermitian Gram matrix of the smaller side: `H H^H` when `N <= M`, else
    /// `H^H H`. Both share the same nonzero eigenvalues.
    pub fn compact_gram(&self) -> DMatrix<Complex64> {
        if self.receive() <= self.transmit() {
            &self.0 * self.0.adjoint()
        } else {
            self.0.adjoint() * &self.0
        }
    }

    /// Nonzero-capable eigenvalues of `H H^H` (there are `min(M, N)`), descending.
    pub fn gram_eigenvalues(&self) -> Vec<f64> {
        if self.receive().min(self.transmit()) == 1 {
            return vec![self.frobenius_sq()];
        }
        let eig = self.compact_gram().symmetric_eigenvalues();
        let mut vals: Vec<f64> = eig.iter().map(|v| v.max(0.0)).collect();
        vals.sort_by(|a, b| b.total_cmp(a));
        vals
    }
}

/// Channel estimate `H_hat` and the variance of its per-entry error.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub estimate: ChannelMatrix,
    pub error_variance: f64,
    /// `None` for a perfectly known channel.
    pub training_symbols: Option<usize>,
}

impl ChannelEstimate {
    pub fn perfect(h: ChannelMatrix) -> Self {
        Self {
            estimate: h,
            error_variance: 0.0,
            training_symbols: None,
        }
    }

    /// Estimate rescaled to unit per-entry variance, the channel seen by the
    /// effective-SNR model.
    pub fn normalized(&self) -> Result<ChannelMatrix> {
        let var = 1.0 - self.error_variance;
        if !(var > 0.0) {
            return Err(Error::domain(
                "estimate variance",
                var,
                "> 0 (training carried no information)",
            ));
        }
        ChannelMatrix::new(self.estimate.as_matrix() / Complex64::new(var.sqrt(), 0.0))
    }
}

/// Average linear SNR `rho = P / sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(f64);

impl Snr {
    pub fn new(rho: f64) -> Result<Self> {
        if rho.is_nan() || rho < 0.0 {
            return Err(Error::domain("rho", rho, ">= 0"));
        }
        Ok(Self(rho))
    }

    pub fn from_power(p: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::domain("sigma2", sigma2, "> 0"));
        }
        Self::new(p / sigma2)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSnr {
    pub rho_eff: f64,
    /// Training symbols per transmit antenna, `t_s / M`.
    pub tau: f64,
}

pub(crate) fn rho_eff(rho: f64, tau: f64) -> f64 {
    if rho == 0.0 {
        return 0.0;
    }
    if rho.is_infinite() {
        return f64::INFINITY;
    }
    tau * rho * rho / (1.0 + rho + tau * rho)
}

/// Effective SNR, or `rho` itself when `tau` is `None` (perfect CSI).
pub(crate) fn rho_eff_or_perfect(rho: f64, tau: Option<f64>) -> f64 {
    match tau {
        Some(t) => rho_eff(rho, t),
        None => rho,
    }
}

/// `d rho_eff / d rho`, or 1 for perfect CSI.
pub(crate) fn drho_eff_or_perfect(rho: f64, tau: Option<f64>) -> f64 {
    match tau {
        Some(t) => drho_eff_drho(rho, t),
        None => 1.0,
    }
}

pub(crate) fn drho_eff_drho(rho: f64, tau: f64) -> f64 {
    let d = 1.0 + rho * (1.0 + tau);
    tau * rho * (rho * (1.0 + tau) + 2.0) / (d * d)
}

pub(crate) fn drho_eff_dtau(rho: f64, tau: f64) -> f64 {
    let d = 1.0 + rho * (1.0 + tau);
    rho * rho * (rho + 1.0) / (d * d)
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("tau", tau, "finite and > 0"))
    }
}

/// `n` independent `N x M` channels with CN(0, 1) entries.
///
/// Draw `i` is reproducible from `(seed, i)` alone; the first draw equals
/// [`sample_channel`] with the same seed.
pub fn sample_channels(m: usize, n: usize, count: usize, seed: u64) -> Result<Vec<ChannelMatrix>> {
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension { rows: n, cols: m });
    }
    let chunks: Vec<_> = rng::chunks(count).collect();
    Ok(chunks
        .into_par_iter()
        .flat_map_iter(|(c, range)| {
            let mut r = rng::stream(seed, c);
            range
                .map(move |_| ChannelMatrix(rng::complex_normal_matrix(&mut r, n, m, 1.0)))
                .collect::<Vec<_>>()
        })
        .collect())
}

pub fn sample_channel(m: usize, n: usize, seed: u64) -> Result<ChannelMatrix> {
    Ok(sample_channels(m, n, 1, seed)?.remove(0))
}

pub fn estimation_error_variance(rho: Snr, t_s: usize, m: usize) -> Result<f64> {
    if m == 0 {
        return Err(Error::ZeroDimension { rows: 1, cols: 0 });
    }
    if t_s < m {
        return Err(Error::TrainingTooShort { t_s, m });
    }
    Ok(1.0 / (1.0 + rho.value() * t_s as f64 / m as f64))
}

/// Draws a true channel `H` and its estimate `H_hat` with `H = H_hat + dH`,
/// `H_hat ~ CN(0, 1 - s2)` and `dH ~ CN(0, s2)` independent, where `s2` is the
/// estimation error variance.
pub fn simulate_estimate(
    m: usize,
    n: usize,
    rho: Snr,
    t_s: usize,
    seed: u64,
) -> Result<(ChannelMatrix, ChannelEstimate)> {
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension { rows: n, cols: m });
    }
    let err_var = estimation_error_variance(rho, t_s, m)?;
    let mut r = rng::stream(seed, 0);
    let h_hat = rng::complex_normal_matrix(&mut r, n, m, 1.0 - err_var);
    let delta = rng::complex_normal_matrix(&mut r, n, m, err_var);
    let h = &h_hat + delta;
    Ok((
        ChannelMatrix::new(h)?,
        ChannelEstimate {
            estimate: ChannelMatrix::new(h_hat)?,
            error_variance: err_var,
            training_symbols: Some(t_s),
        },
    ))
}

pub fn effective_snr(rho: Snr, tau: f64) -> Result<EffectiveSnr> {
    check_tau(tau)?;
    Ok(EffectiveSnr {
        rho_eff: rho_eff(rho.value(), tau),
        tau,
    })
}

/// Inverse of [`effective_snr`] at fixed `tau`: the positive root of
/// `tau rho^2 - x (1 + tau) rho - x = 0`.
pub fn snr_from_effective(rho_eff: f64, tau: f64) -> Result<Snr> {
    if rho_eff.is_nan() || rho_eff < 0.0 {
        return Err(Error::domain("rho_eff", rho_eff, ">= 0"));
    }
    check_tau(tau)?;
    let b = rho_eff * (1.0 + tau);
    let disc = b * b + 4.0 * tau * rho_eff;
    Snr::new((b + disc.sqrt()) / (2.0 * tau))
}

pub fn d_effective_snr_d_rho(rho: Snr, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(drho_eff_drho(rho.value(), tau))
}

pub fn d_effective_snr_d_tau(rho: Snr, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(drho_eff_dtau(rho.value(), tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn snr(x: f64) -> Snr {
        Snr::new(x).unwrap()
    }

    #[test]
    fn zero_dimensions_are_rejected() {
        assert!(matches!(
            sample_channel(0, 2, 1),
            Err(Error::ZeroDimension { .. })
        ));
        assert!(sample_channel(2, 0, 1).is_err());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_channel(2, 2, 42).unwrap();
        let b = sample_channel(2, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_channel(2, 2, 43).unwrap());
        assert_eq!(a.receive(), 2);
        assert_eq!(sample_channel(1, 1, 5).unwrap().as_matrix().len(), 1);
    }

    #[test]
    fn first_draw_of_a_batch_matches_single_sample() {
        let batch = sample_channels(3, 2, 2000, 9).unwrap();
        assert_eq!(batch.len(), 2000);
        assert_eq!(batch[0], sample_channel(3, 2, 9).unwrap());
    }

    #[test]
    fn entries_have_unit_variance_and_zero_mean() {
        let draws = sample_channels(4, 4, 100_000, 2024).unwrap();
        let count = (draws.len() * 16) as f64;
        let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
        for h in &draws {
            for z in h.as_matrix().iter() {
                sum += z;
                sq += z.norm_sqr();
            }
        }
        let var = sq / count;
        assert!((0.99..=1.01).contains(&var), "variance {var}");
        // |mean| of 1.6e6 CN(0,1) draws has std ~ 8e-4
        assert!((sum / count).norm() < 4e-3);
    }

    #[test]
    fn siso_gain_is_exponential_with_unit_mean() {
        let draws = sample_channels(1, 1, 50_000, 3).unwrap();
        let gains: Vec<f64> = draws.iter().map(|h| h.frobenius_sq()).collect();
        let mean = gains.iter().sum::<f64>() / gains.len() as f64;
        assert!((mean - 1.0).abs() < 0.02);
        // P(|h|^2 > 1) = e^-1 for Exp(1)
        let tail = gains.iter().filter(|g| **g > 1.0).count() as f64 / gains.len() as f64;
        assert!((tail - (-1f64).exp()).abs() < 0.01);
    }

    #[test]
    fn error_variance_examples() {
        assert_eq!(estimation_error_variance(snr(0.0), 4, 4).unwrap(), 1.0);
        assert_relative_eq!(
            estimation_error_variance(snr(1.0), 4, 2).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        assert!(estimation_error_variance(snr(1e12), 4, 4).unwrap() < 1e-11);
        assert!(matches!(
            estimation_error_variance(snr(1.0), 1, 2),
            Err(Error::TrainingTooShort { t_s: 1, m: 2 })
        ));
    }

    #[test]
    fn perfect_estimate_limit_has_no_error() {
        let (h, est) = simulate_estimate(2, 3, snr(f64::INFINITY), 2, 8).unwrap();
        assert_eq!(est.error_variance, 0.0);
        assert_eq!(h, est.estimate);
    }

    #[test]
    fn estimate_and_error_statistics() {
        let (rho, t_s, m, n) = (2.0, 4, 2, 2);
        let s2 = estimation_error_variance(snr(rho), t_s, m).unwrap();
        let mut err_sq = 0.0;
        let mut est_sq = 0.0;
        let mut cross = Complex64::new(0.0, 0.0);
        let mut count = 0.0;
        for seed in 0..25_000u64 {
            let (h, est) = simulate_estimate(m, n, snr(rho), t_s, seed).unwrap();
            let d = h.as_matrix() - est.estimate.as_matrix();
            for (e, x) in d.iter().zip(est.estimate.as_matrix().iter()) {
                err_sq += e.norm_sqr();
                est_sq += x.norm_sqr();
                cross += e * x.conj();
                count += 1.0;
            }
        }
        // 1e5 entries: 3 sigma of a variance estimate is ~ 3 * s2 / sqrt(1e5)
        let tol = 3.0 / f64::sqrt(count);
        assert!((err_sq / count - s2).abs() < tol * s2);
        assert!((est_sq / count - (1.0 - s2)).abs() < tol * (1.0 - s2));
        let corr = (cross / count).norm() / (s2 * (1.0 - s2)).sqrt();
        assert!(corr < 3.0 * tol, "correlation {corr}");
    }

    #[test]
    fn effective_snr_examples() {
        assert_eq!(effective_snr(snr(0.0), 3.0).unwrap().rho_eff, 0.0);
        assert_relative_eq!(
            effective_snr(snr(1.0), 1.0).unwrap().rho_eff,
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let big = effective_snr(snr(5.0), 1e12).unwrap().rho_eff;
        assert_relative_eq!(big, 5.0, max_relative = 1e-10);
        assert!(effective_snr(snr(1.0), 0.0).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(snr_from_effective(0.0, 2.0).unwrap().value(), 0.0);
        assert_relative_eq!(
            snr_from_effective(1.0 / 3.0, 1.0).unwrap().value(),
            1.0,
            max_relative = 1e-14
        );
        assert!(snr_from_effective(-1.0, 1.0).is_err());
        assert!(snr_from_effective(1.0, -1.0).is_err());
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(d_effective_snr_d_rho(snr(0.0), 2.0).unwrap(), 0.0);
        assert_relative_eq!(
            d_effective_snr_d_tau(snr(1.0), 1.0).unwrap(),
            2.0 / 9.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn effective_snr_is_monotone_on_grids() {
        let grid: Vec<f64> = (0..60).map(|i| 10f64.powf(-3.0 + i as f64 * 0.1)).collect();
        for w in grid.windows(2) {
            for &t in &grid {
                assert!(rho_eff(w[1], t) > rho_eff(w[0], t));
                assert!(rho_eff(t, w[1]) > rho_eff(t, w[0]));
            }
        }
    }

    proptest! {
        #[test]
        fn training_only_loses_snr(lr in -6.0f64..6.0, lt in -3.0f64..4.0) {
            let (rho, tau) = (10f64.powf(lr), 10f64.powf(lt));
            let e = rho_eff(rho, tau);
            prop_assert!(e > 0.0 && e < rho);
        }

        #[test]
        fn inverse_round_trips(lx in -8.0f64..8.0, lt in -3.0f64..4.0) {
            let (x, tau) = (10f64.powf(lx), 10f64.powf(lt));
            let rho = snr_from_effective(x, tau).unwrap();
            let back = effective_snr(rho, tau).unwrap().rho_eff;
            prop_assert!(((back - x) / x).abs() < 1e-12);
        }

        #[test]
        fn derivatives_match_central_differences(lr in -3.0f64..3.0, lt in -2.0f64..3.0) {
            let (rho, tau) = (10f64.powf(lr), 10f64.powf(lt));
            let h = 1e-5;
            let fd_rho = (rho_eff(rho * (1.0 + h), tau) - rho_eff(rho * (1.0 - h), tau)) / (2.0 * h * rho);
            let fd_tau = (rho_eff(rho, tau * (1.0 + h)) - rho_eff(rho, tau * (1.0 - h))) / (2.0 * h * tau);
            prop_assert!(((drho_eff_drho(rho, tau) - fd_rho) / fd_rho).abs() < 1e-6);
            prop_assert!(((drho_eff_dtau(rho, tau) - fd_tau) / fd_tau).abs() < 1e-6);
        }
    }
}
