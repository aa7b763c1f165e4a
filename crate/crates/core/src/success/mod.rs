//! Transmission success probabilities.
//!
//! With CSI at the transmitter, success within one block is a function `F_L`
//! of the mutual-information margin `I - xi` ([`FlVariant`]). Without it,
//! success is the probability over fading that the uniform-precoding rate
//! reaches `xi` ([`SuccessCurve`]), available in closed form when
//! `min(M, N) = 1` and by Monte Carlo otherwise.

mod ensemble;
mod special;

use std::sync::Arc;

pub use ensemble::McEnsemble;
pub use special::{q_function, regularized_lower_gamma, regularized_upper_gamma};

pub(crate) use special::{ln_q, q};
#[cfg(test)]
pub(crate) use special::phi;

use crate::error::{Error, Result};
use crate::precoding::MutualInfo;
use crate::Snr;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProb {
    pub value: f64,
    /// Monte-Carlo standard error; zero for closed forms.
    pub stderr: f64,
}

impl SuccessProb {
    pub fn exact(value: f64) -> Self {
        Self { value, stderr: 0.0 }
    }

    fn binomial(value: f64, samples: usize) -> Self {
        Self {
            value,
            stderr: (value * (1.0 - value) / samples as f64).sqrt(),
        }
    }
}

/// Code length and target spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParams {
    pub l: usize,
    /// `xi = R / R0` in bits/s/Hz.
    pub xi: f64,
}

impl BlockParams {
    pub fn new(l: usize, xi: f64) -> Result<Self> {
        if l == 0 {
            return Err(Error::domain("L", 0.0, ">= 1"));
        }
        if xi.is_nan() || xi < 0.0 || xi.is_infinite() {
            return Err(Error::domain("xi", xi, "finite and >= 0"));
        }
        Ok(Self { l, xi })
    }
}

/// Finite-block success function of the rate margin `I - xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlVariant {
    /// `Q((xi - I) / sqrt(2 rho / ((1 + rho) L)))`.
    Gaussian,
    /// `Q(-T (I - xi))`.
    Arq { t: f64 },
}

impl FlVariant {
    /// `(F_L, ln F_L)` for margin `delta = I - xi` at SNR `rho`.
    pub(crate) fn eval(&self, delta: f64, rho: f64, l: usize) -> (f64, f64) {
        let z = match *self {
            FlVariant::Gaussian => {
                let sd = (2.0 * rho / ((1.0 + rho) * l as f64)).sqrt();
                if sd == 0.0 {
                    return if delta > 0.0 {
                        (1.0, 0.0)
                    } else if delta < 0.0 {
                        (0.0, f64::NEG_INFINITY)
                    } else {
                        (0.5, -std::f64::consts::LN_2)
                    };
                }
                -delta / sd
            }
            FlVariant::Arq { t } => -t * delta,
        };
        (q(z), ln_q(z))
    }

    pub fn name(&self) -> &'static str {
        match self {
            FlVariant::Gaussian => "gaussian",
            FlVariant::Arq { .. } => "arq",
        }
    }
}

pub fn f_l_gaussian(i: MutualInfo, block: &BlockParams, rho: Snr) -> Result<SuccessProb> {
    let rho = rho.value();
    let delta = i.bits() - block.xi;
    if rho == 0.0 && delta == 0.0 {
        return Err(Error::domain("rho", 0.0, "> 0 when I = xi"));
    }
    Ok(SuccessProb::exact(FlVariant::Gaussian.eval(delta, rho, block.l).0))
}

pub fn f_l_arq(delta: f64, t: f64) -> Result<SuccessProb> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain("T", t, "finite and > 0"));
    }
    if delta.is_nan() {
        return Err(Error::domain("delta", delta, "not NaN"));
    }
    Ok(SuccessProb::exact(FlVariant::Arq { t }.eval(delta, 1.0, 1).0))
}

fn check_rho_xi(rho_eff: f64, xi: f64) -> Result<()> {
    if rho_eff.is_nan() || rho_eff < 0.0 {
        return Err(Error::domain("rho_eff", rho_eff, ">= 0"));
    }
    if xi.is_nan() || xi < 0.0 || xi.is_infinite() {
        return Err(Error::domain("xi", xi, "finite and >= 0"));
    }
    Ok(())
}

/// SISO success `exp(-(2^xi - 1) / rho_eff)`.
pub fn success_siso_closed(rho_eff: f64, xi: f64) -> Result<SuccessProb> {
    check_rho_xi(rho_eff, xi)?;
    Ok(SuccessProb::exact(closed_eval(1, 1, rho_eff, xi).value))
}

/// MISO success with uniform precoding,
/// `1 - gamma(M, M (2^xi - 1) / rho_eff) / Gamma(M)`.
pub fn success_miso(rho_eff: f64, m: usize, xi: f64) -> Result<SuccessProb> {
    check_rho_xi(rho_eff, xi)?;
    if m == 0 {
        return Err(Error::ZeroDimension { rows: 1, cols: 0 });
    }
    Ok(SuccessProb::exact(closed_eval(m, 1, rho_eff, xi).value))
}

/// Closed-form success for any link with `min(M, N) = 1`.
pub fn success_closed(m: usize, n: usize, rho_eff: f64, xi: f64) -> Result<SuccessProb> {
    check_rho_xi(rho_eff, xi)?;
    if m == 0 || n == 0 {
        return Err(Error::ZeroDimension { rows: n, cols: m });
    }
    if m.min(n) != 1 {
        return Err(Error::ClosedFormUnavailable { m, n });
    }
    Ok(SuccessProb::exact(closed_eval(m, n, rho_eff, xi).value))
}

/// Monte-Carlo fraction of `N x M` draws whose uniform-precoding rate reaches
/// `xi`.
pub fn success_mc(
    m: usize,
    n: usize,
    rho_eff: f64,
    xi: f64,
    samples: usize,
    seed: u64,
) -> Result<SuccessProb> {
    check_rho_xi(rho_eff, xi)?;
    let e = McEnsemble::new(m, n, xi, samples, seed)?;
    Ok(SuccessProb::binomial(e.fraction(rho_eff), samples))
}

/// Success probability with its slope in `rho_eff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEval {
    pub value: f64,
    pub derivative: f64,
    /// `ln` of the success probability, finite where `value` underflows.
    pub ln_value: f64,
    pub stderr: f64,
    /// `derivative / value`.
    pub hazard: f64,
}

impl SuccessEval {
    pub fn prob(&self) -> SuccessProb {
        SuccessProb {
            value: self.value,
            stderr: self.stderr,
        }
    }

    fn certain() -> Self {
        Self {
            value: 1.0,
            derivative: 0.0,
            ln_value: 0.0,
            stderr: 0.0,
            hazard: 0.0,
        }
    }

    fn impossible() -> Self {
        Self {
            value: 0.0,
            derivative: 0.0,
            ln_value: f64::NEG_INFINITY,
            stderr: 0.0,
            hazard: f64::INFINITY,
        }
    }
}

fn closed_eval(m: usize, n: usize, rho_eff: f64, xi: f64) -> SuccessEval {
    if xi == 0.0 {
        return SuccessEval::certain();
    }
    if rho_eff == 0.0 {
        return SuccessEval::impossible();
    }
    if rho_eff.is_infinite() {
        return SuccessEval::certain();
    }
    let a = (m * n) as f64;
    let x = m as f64 * (xi * std::f64::consts::LN_2).exp_m1() / rho_eff;
    let ln_value = special::ln_upper_q(a, x);
    let ln_slope = special::ln_gamma_density(a, x) + (x / rho_eff).ln();
    SuccessEval {
        value: ln_value.exp(),
        derivative: ln_slope.exp(),
        ln_value,
        stderr: 0.0,
        hazard: (ln_slope - ln_value).exp(),
    }
}

/// Where success probabilities come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuccessSource {
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
    /// Closed form when `min(M, N) = 1`, Monte Carlo otherwise.
    Auto { samples: usize, seed: u64 },
}

impl SuccessSource {
    pub fn curve(&self, m: usize, n: usize, xi: f64) -> Result<SuccessCurve> {
        match *self {
            SuccessSource::ClosedForm => SuccessCurve::closed(m, n, xi),
            SuccessSource::MonteCarlo { samples, seed } => SuccessCurve::monte_carlo(m, n, xi, samples, seed),
            SuccessSource::Auto { samples, seed } => {
                if m.min(n) == 1 {
                    SuccessCurve::closed(m, n, xi)
                } else {
                    SuccessCurve::monte_carlo(m, n, xi, samples, seed)
                }
            }
        }
    }
}

/// Success probability as a function of `rho_eff` for one `(M, N, xi)`.
///
/// The Monte-Carlo variant is a kernel-smoothed estimate over a fixed set of
/// draws, so it is differentiable in `rho_eff` and reuses the same channels
/// for every SNR. Where fewer than a few dozen draws succeed, `ln_value`
/// switches to an importance-sampling estimate.
#[derive(Debug, Clone)]
pub enum SuccessCurve {
    Closed { m: usize, n: usize, xi: f64 },
    MonteCarlo(Arc<McEnsemble>),
}

impl SuccessCurve {
    pub fn closed(m: usize, n: usize, xi: f64) -> Result<Self> {
        check_rho_xi(0.0, xi)?;
        if m == 0 || n == 0 {
            return Err(Error::ZeroDimension { rows: n, cols: m });
        }
        if m.min(n) != 1 {
            return Err(Error::ClosedFormUnavailable { m, n });
        }
        Ok(SuccessCurve::Closed { m, n, xi })
    }

    pub fn monte_carlo(m: usize, n: usize, xi: f64, samples: usize, seed: u64) -> Result<Self> {
        Ok(SuccessCurve::MonteCarlo(Arc::new(McEnsemble::new(m, n, xi, samples, seed)?)))
    }

    pub fn transmit(&self) -> usize {
        match self {
            SuccessCurve::Closed { m, .. } => *m,
            SuccessCurve::MonteCarlo(e) => e.transmit(),
        }
    }

    pub fn receive(&self) -> usize {
        match self {
            SuccessCurve::Closed { n, .. } => *n,
            SuccessCurve::MonteCarlo(e) => e.receive(),
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, SuccessCurve::Closed { .. })
    }

    pub fn eval(&self, rho_eff: f64) -> SuccessEval {
        match self {
            SuccessCurve::Closed { m, n, xi } => closed_eval(*m, *n, rho_eff, *xi),
            SuccessCurve::MonteCarlo(e) => {
                if e.xi() == 0.0 {
                    return SuccessEval::certain();
                }
                if !(rho_eff > 0.0) {
                    return SuccessEval::impossible();
                }
                let s = e.smoothed(rho_eff);
                let stderr = (s.value * (1.0 - s.value) / e.samples() as f64).sqrt();
                if e.in_tail(s.value, rho_eff) {
                    let (ln_value, hazard) = e.log_tail(rho_eff);
                    SuccessEval {
                        value: s.value,
                        derivative: s.derivative,
                        ln_value,
                        stderr,
                        hazard,
                    }
                } else {
                    SuccessEval {
                        value: s.value,
                        derivative: s.derivative,
                        ln_value: s.value.ln(),
                        stderr,
                        hazard: s.derivative / s.value,
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn block(l: usize, xi: f64) -> BlockParams {
        BlockParams::new(l, xi).unwrap()
    }

    fn mi(bits: f64) -> MutualInfo {
        crate::precoding::MutualInfo::from_bits(bits)
    }

    fn snr(x: f64) -> Snr {
        Snr::new(x).unwrap()
    }

    #[test]
    fn f_l_gaussian_examples() {
        assert_eq!(f_l_gaussian(mi(1.0), &block(100, 1.0), snr(3.0)).unwrap().value, 0.5);
        assert_eq!(f_l_gaussian(mi(2.0), &block(10, 2.0), snr(0.2)).unwrap().value, 0.5);
        // argument -10
        let sd = f64::sqrt(2.0 * 1.0 / (2.0 * 50.0));
        let v = f_l_gaussian(mi(2.0 + 10.0 * sd), &block(50, 2.0), snr(1.0)).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(f_l_gaussian(mi(0.0), &block(10, 1.0), snr(0.0)).unwrap().value, 0.0);
        assert!(f_l_gaussian(mi(1.0), &block(10, 1.0), snr(0.0)).is_err());
    }

    #[test]
    fn f_l_gaussian_monotone() {
        let mut prev = 0.0;
        for k in 0..100 {
            let v = f_l_gaussian(mi(0.05 * k as f64), &block(20, 2.0), snr(2.0)).unwrap().value;
            assert!(v >= prev);
            prev = v;
        }
        let lo = f_l_gaussian(mi(2.0), &block(20, 1.5), snr(2.0)).unwrap().value;
        let hi = f_l_gaussian(mi(2.0), &block(20, 2.5), snr(2.0)).unwrap().value;
        assert!(lo > hi);
    }

    #[test]
    fn f_l_arq_examples() {
        assert_eq!(f_l_arq(0.0, 3.0).unwrap().value, 0.5);
        assert!((f_l_arq(100.0, 1.0).unwrap().value - 1.0).abs() < 1e-15);
        for d in [0.1, 0.7, 2.0] {
            let a = f_l_arq(d, 2.0).unwrap().value;
            let b = f_l_arq(-d, 2.0).unwrap().value;
            assert!((a + b - 1.0).abs() < 1e-15);
        }
        assert!(f_l_arq(0.0, 0.0).is_err());
    }

    /// Sign pattern of second differences on a grid, zeros ignored.
    fn curvature_sign_changes(values: &[f64]) -> usize {
        let d2: Vec<f64> = values.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        let signs: Vec<bool> = d2.iter().filter(|d| d.abs() > 1e-15).map(|d| *d > 0.0).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    #[test]
    fn f_l_is_sigmoidal() {
        let grid: Vec<f64> = (0..2001).map(|k| -4.0 + 0.004 * k as f64).collect();
        let gauss: Vec<f64> = grid
            .iter()
            .map(|d| FlVariant::Gaussian.eval(*d, 1.5, 40).0)
            .collect();
        let arq: Vec<f64> = grid.iter().map(|d| f_l_arq(*d, 1.3).unwrap().value).collect();
        assert_eq!(curvature_sign_changes(&gauss), 1);
        assert_eq!(curvature_sign_changes(&arq), 1);
    }

    #[test]
    fn siso_examples() {
        assert_eq!(success_siso_closed(0.3, 0.0).unwrap().value, 1.0);
        assert_relative_eq!(success_siso_closed(1.0, 1.0).unwrap().value, (-1.0f64).exp(), max_relative = 1e-14);
        assert_eq!(success_siso_closed(0.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn miso_reduces_to_siso() {
        for (rho, xi) in [(0.1, 0.5), (1.0, 1.0), (7.0, 3.0), (100.0, 6.0)] {
            assert_relative_eq!(
                success_miso(rho, 1, xi).unwrap().value,
                success_siso_closed(rho, xi).unwrap().value,
                max_relative = 1e-13
            );
        }
        assert_eq!(success_miso(2.0, 4, 0.0).unwrap().value, 1.0);
    }

    #[test]
    fn closed_forms_match_monte_carlo() {
        let s = success_mc(1, 1, 1.0, 1.0, 100_000, 3).unwrap();
        assert!((s.value - (-1.0f64).exp()).abs() < 3.0 * s.stderr);
        let c = success_miso(2.0, 4, 1.0).unwrap().value;
        let s = success_mc(4, 1, 2.0, 1.0, 100_000, 5).unwrap();
        assert!((s.value - c).abs() < 3.0 * s.stderr, "{} vs {c}", s.value);
        // SIMO shares the closed form with the transposed MISO count
        let c = success_closed(1, 3, 0.8, 2.0).unwrap().value;
        let s = success_mc(1, 3, 0.8, 2.0, 100_000, 6).unwrap();
        assert!((s.value - c).abs() < 3.0 * s.stderr, "{} vs {c}", s.value);
    }

    #[test]
    fn mc_edge_cases() {
        let s = success_mc(2, 2, 1.0, 0.0, 1000, 1).unwrap();
        assert_eq!((s.value, s.stderr), (1.0, 0.0));
        let s = success_mc(2, 2, 0.0, 1.0, 1000, 1).unwrap();
        assert_eq!((s.value, s.stderr), (0.0, 0.0));
        assert!(success_mc(2, 2, 1.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn closed_form_unavailable_for_full_mimo() {
        assert!(matches!(
            success_closed(2, 2, 1.0, 1.0),
            Err(Error::ClosedFormUnavailable { m: 2, n: 2 })
        ));
    }

    #[test]
    fn closed_curve_derivative_and_log_domain() {
        let c = SuccessCurve::closed(3, 1, 4.0).unwrap();
        for rho in [0.5, 3.0, 20.0, 200.0] {
            let e = c.eval(rho);
            let h = 1e-6 * rho;
            let fd = (c.eval(rho + h).value - c.eval(rho - h).value) / (2.0 * h);
            assert_relative_eq!(e.derivative, fd, max_relative = 1e-6);
            assert_relative_eq!(e.ln_value, e.value.ln(), max_relative = 1e-12);
            assert_relative_eq!(e.hazard, e.derivative / e.value, max_relative = 1e-10);
        }
        // deep tail stays finite in the log domain
        let e = SuccessCurve::closed(1, 1, 16.0).unwrap().eval(1e-3);
        assert_eq!(e.value, 0.0);
        assert_relative_eq!(e.ln_value, -65535.0 / 1e-3, max_relative = 1e-12);
    }

    #[test]
    fn success_monotone_in_snr_and_rate() {
        for (m, n) in [(1, 1), (4, 1), (1, 4)] {
            let mut prev = 0.0;
            for k in 0..100 {
                let rho = 10f64.powf(-2.0 + 0.05 * k as f64);
                let v = success_closed(m, n, rho, 2.0).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
            let mut prev = 1.0;
            for k in 0..100 {
                let v = success_closed(m, n, 5.0, 0.1 * k as f64).unwrap().value;
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn siso_ratio_has_unique_interior_maximum() {
        let vals: Vec<f64> = (0..1000)
            .map(|k| {
                let rho = 10f64.powf(-3.0 + 6.0 * k as f64 / 999.0);
                success_siso_closed(rho, 1.0).unwrap().value / rho
            })
            .collect();
        let best = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(best > 0 && best < 999);
        assert!(vals[..best].windows(2).all(|w| w[1] >= w[0]));
        assert!(vals[best..].windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn mc_curve_is_deterministic_across_thread_counts() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| success_mc(2, 3, 1.5, 2.0, 5000, 42).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
