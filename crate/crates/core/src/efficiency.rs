//! Energy efficiency in bits per joule.
//!
//! Both functionals share the shape `R * overhead * success / (aP + b)`:
//! [`nu_t`] with imperfect CSI at both ends and `F_L` of the water-filled
//! mutual information, [`nu_r`] without CSI at the transmitter and the
//! fading success probability of uniform precoding.

use crate::channel::{self, ChannelEstimate, EffectiveSnr};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::precoding::{self, svd, waterfill, PowerAllocation};
use crate::success::{FlVariant, SuccessCurve, SuccessProb, SuccessSource};
use crate::Snr;

/// Affine consumed-power model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub a: f64,
    pub b: f64,
    /// When set, the fixed part is `M * b0` instead of `b`.
    pub per_antenna_b0: Option<f64>,
}

impl PowerModel {
    pub fn fixed_part(&self, m: usize) -> f64 {
        match self.per_antenna_b0 {
            Some(b0) => m as f64 * b0,
            None => self.b,
        }
    }
}

pub fn consumed_power(p: f64, model: &PowerModel, m: usize) -> Result<f64> {
    if p.is_nan() || p < 0.0 {
        return Err(Error::domain("P", p, ">= 0"));
    }
    Ok(model.a * p + model.fixed_part(m))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EfficiencyResult {
    /// Transmit power in watts.
    pub p: f64,
    pub t_s: usize,
    pub m: usize,
    pub success: SuccessProb,
    /// Bits per joule.
    pub nu: f64,
    /// `ln nu`, finite when `nu` underflows.
    pub ln_nu: f64,
    /// Rate after training and feedback overhead, bit/s.
    pub goodput: f64,
    pub consumed_power: f64,
    pub rho_eff: f64,
    /// Mutual information in bits, when the regime defines one.
    pub mutual_info: Option<f64>,
}

fn check_power(p: f64, cfg: &SystemConfig) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain("P", p, "finite and > 0"));
    }
    if p > cfg.p_max {
        return Err(Error::PowerAboveMax { p, p_max: cfg.p_max });
    }
    Ok(())
}

fn assemble(
    p: f64,
    cfg: &SystemConfig,
    overhead_symbols: usize,
    success: SuccessProb,
    ln_success: f64,
    rho_eff: f64,
    mutual_info: Option<f64>,
) -> EfficiencyResult {
    let goodput = cfg.r * (1.0 - overhead_symbols as f64 / cfg.t_total as f64);
    let consumed = cfg.a * p + cfg.power_model().fixed_part(cfg.m);
    let nu = goodput * success.value / consumed;
    let ln_nu = goodput.ln() + ln_success - consumed.ln();
    EfficiencyResult {
        p,
        t_s: cfg.t_s,
        m: cfg.m,
        success,
        nu,
        ln_nu,
        goodput,
        consumed_power: consumed,
        rho_eff,
        mutual_info,
    }
}

/// How the transmitter spreads power over the estimated eigenmodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Allocation {
    WaterFilling,
    /// `Q = I_M`.
    Uniform,
}

/// A channel estimate reduced to its eigenmode gains, for repeated
/// evaluation of `nu_T` over power and training length.
#[derive(Debug, Clone)]
pub struct CsitrLink {
    d_squared: Vec<f64>,
    m: usize,
    perfect: bool,
}

impl CsitrLink {
    pub fn new(estimate: &ChannelEstimate) -> Result<Self> {
        let h = estimate.normalized()?;
        Ok(Self {
            d_squared: svd(&h)?.mode_gains(),
            m: h.transmit(),
            perfect: estimate.training_symbols.is_none(),
        })
    }

    /// Link with prescribed eigenmode gains `d_i^2` and `M` transmit antennas.
    pub fn from_mode_gains(d_squared: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 || d_squared.is_empty() || d_squared.len() > m {
            return Err(Error::DimensionMismatch(format!(
                "{} mode gains for M = {m}",
                d_squared.len()
            )));
        }
        if d_squared.iter().all(|d| *d == 0.0) {
            return Err(Error::ZeroChannel);
        }
        Ok(Self {
            d_squared,
            m,
            perfect: false,
        })
    }

    pub fn mode_gains(&self) -> &[f64] {
        &self.d_squared
    }

    pub fn transmit(&self) -> usize {
        self.m
    }

    fn tau(&self, cfg: &SystemConfig) -> Option<f64> {
        if self.perfect {
            None
        } else {
            cfg.tau()
        }
    }

    pub fn rho_eff(&self, p: f64, cfg: &SystemConfig) -> f64 {
        channel::rho_eff_or_perfect(p / cfg.sigma2, self.tau(cfg))
    }

    /// `d rho_eff / d P`.
    pub(crate) fn rho_eff_slope(&self, p: f64, cfg: &SystemConfig) -> f64 {
        channel::drho_eff_or_perfect(p / cfg.sigma2, self.tau(cfg)) / cfg.sigma2
    }

    pub fn allocation(&self, rho_eff: f64, strategy: Allocation) -> Result<PowerAllocation> {
        match strategy {
            Allocation::WaterFilling => waterfill(&self.d_squared, Snr::new(rho_eff / self.m as f64)?, self.m),
            Allocation::Uniform => Ok(PowerAllocation::identity(self.d_squared.len(), self.m)),
        }
    }

    /// Mutual information (bits) at power `p` and its derivative in `p`.
    pub fn rate(&self, p: f64, cfg: &SystemConfig, strategy: Allocation) -> Result<(f64, f64)> {
        let rho_eff = self.rho_eff(p, cfg);
        if rho_eff == 0.0 {
            let s = self.allocation(1.0, strategy)?;
            let slope: f64 = s.weights.iter().zip(&self.d_squared).map(|(s, d)| s * d).sum::<f64>()
                / (self.m as f64 * std::f64::consts::LN_2);
            return Ok((0.0, slope * self.rho_eff_slope(p, cfg)));
        }
        let alloc = self.allocation(rho_eff, strategy)?;
        let g = rho_eff / self.m as f64;
        let bits = precoding::modal_rate(g, &alloc.weights, &self.d_squared);
        // envelope theorem: the allocation is optimal, so only the explicit
        // dependence on g contributes
        let d_bits_dg: f64 = alloc
            .weights
            .iter()
            .zip(&self.d_squared)
            .map(|(s, d)| d * s / (1.0 + g * d * s))
            .sum::<f64>()
            / std::f64::consts::LN_2;
        Ok((bits, d_bits_dg / self.m as f64 * self.rho_eff_slope(p, cfg)))
    }

    /// `nu_T` at power `p`.
    pub fn nu(&self, p: f64, cfg: &SystemConfig, strategy: Allocation) -> Result<EfficiencyResult> {
        check_power(p, cfg)?;
        let rho_eff = self.rho_eff(p, cfg);
        let bits = if rho_eff > 0.0 {
            let alloc = self.allocation(rho_eff, strategy)?;
            precoding::modal_rate(rho_eff / self.m as f64, &alloc.weights, &self.d_squared)
        } else {
            0.0
        };
        Ok(self.finish(p, cfg, bits, rho_eff, cfg.f_l))
    }

    fn finish(&self, p: f64, cfg: &SystemConfig, bits: f64, rho_eff: f64, f_l: FlVariant) -> EfficiencyResult {
        let (value, ln_value) = f_l.eval(bits - cfg.xi, rho_eff, cfg.l);
        assemble(
            p,
            cfg,
            cfg.t_s + cfg.t_f_s,
            SuccessProb::exact(value),
            ln_value,
            rho_eff,
            Some(bits),
        )
    }

    /// Infinite-block efficiency `R0 * overhead * I / (aP + b)`.
    pub fn nu_infinite_block(&self, p: f64, cfg: &SystemConfig, strategy: Allocation) -> Result<EfficiencyResult> {
        check_power(p, cfg)?;
        let (bits, _) = self.rate(p, cfg, strategy)?;
        let scaled = SystemConfig {
            r: cfg.r0 * bits,
            ..cfg.clone()
        };
        Ok(assemble(
            p,
            &scaled,
            cfg.t_s + cfg.t_f_s,
            SuccessProb::exact(1.0),
            0.0,
            self.rho_eff(p, cfg),
            Some(bits),
        ))
    }
}

/// `nu_T` for a given allocation over the eigenmodes of `estimate`.
pub fn nu_t(
    p: f64,
    alloc: &PowerAllocation,
    estimate: &ChannelEstimate,
    cfg: &SystemConfig,
    flavor: FlVariant,
) -> Result<EfficiencyResult> {
    check_power(p, cfg)?;
    let link = CsitrLink::new(estimate)?;
    if alloc.weights.len() != link.d_squared.len() || alloc.transmit != link.m {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} weights for M = {}, the estimate has {} modes and M = {}",
            alloc.weights.len(),
            alloc.transmit,
            link.d_squared.len(),
            link.m
        )));
    }
    let rho_eff = link.rho_eff(p, cfg);
    let mi = precoding::mutual_info_icsitr(
        EffectiveSnr {
            rho_eff,
            tau: link.tau(cfg).unwrap_or(f64::INFINITY),
        },
        alloc,
        &link.d_squared,
    )?;
    Ok(link.finish(p, cfg, mi.bits(), rho_eff, flavor))
}

/// `nu_R` with a freshly built success curve.
pub fn nu_r(p: f64, cfg: &SystemConfig, source: &SuccessSource) -> Result<EfficiencyResult> {
    let curve = source.curve(cfg.m, cfg.n, cfg.xi)?;
    nu_r_with(p, cfg, &curve)
}

/// `nu_R` on a prebuilt success curve, so repeated calls share draws.
pub fn nu_r_with(p: f64, cfg: &SystemConfig, curve: &SuccessCurve) -> Result<EfficiencyResult> {
    check_power(p, cfg)?;
    if curve.transmit() != cfg.m || curve.receive() != cfg.n {
        return Err(Error::DimensionMismatch(format!(
            "success curve is for {}x{}, configuration has M = {}, N = {}",
            curve.receive(),
            curve.transmit(),
            cfg.m,
            cfg.n
        )));
    }
    let rho_eff = channel::rho_eff_or_perfect(p / cfg.sigma2, cfg.tau());
    let s = curve.eval(rho_eff);
    Ok(assemble(p, cfg, cfg.t_s, s.prob(), s.ln_value, rho_eff, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelMatrix;
    use crate::success::{f_l_gaussian, BlockParams};
    use approx::assert_relative_eq;

    fn siso_cfg() -> SystemConfig {
        SystemConfig {
            m: 1,
            n: 1,
            t_total: 55,
            t_s: 1,
            xi: 1.0,
            r: 100.0,
            r0: 100.0,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn consumed_power_examples() {
        let m = PowerModel { a: 1.0, b: 0.0, per_antenna_b0: None };
        assert_eq!(consumed_power(0.0, &m, 1).unwrap(), 0.0);
        let m = PowerModel { a: 1.0, b: 0.01, per_antenna_b0: None };
        assert_relative_eq!(consumed_power(0.1, &m, 1).unwrap(), 0.11, epsilon = 1e-15);
        let m = PowerModel { a: 1.0, b: 0.5, per_antenna_b0: Some(0.01) };
        assert_relative_eq!(consumed_power(0.1, &m, 4).unwrap(), 0.14, epsilon = 1e-15);
        assert!(consumed_power(-1.0, &m, 1).is_err());
    }

    #[test]
    fn nu_t_matches_hand_composition() {
        let cfg = SystemConfig {
            b: 0.01,
            l: 100,
            ..siso_cfg()
        };
        let h = ChannelMatrix::from_mode_gains(&[1.0], 1, 1).unwrap();
        let est = ChannelEstimate::perfect(h);
        let p = 0.01;
        let alloc = PowerAllocation::identity(1, 1);
        let got = nu_t(p, &alloc, &est, &cfg, FlVariant::Gaussian).unwrap();
        let rho = p / cfg.sigma2;
        let i = crate::precoding::MutualInfo::from_bits(11f64.log2());
        let f = f_l_gaussian(i, &BlockParams::new(100, 1.0).unwrap(), Snr::new(rho).unwrap()).unwrap();
        let expect = cfg.r * (1.0 - 1.0 / 55.0) * f.value / 0.02;
        assert_relative_eq!(got.nu, expect, max_relative = 1e-13);
        assert_relative_eq!(got.ln_nu, expect.ln(), max_relative = 1e-12);
    }

    #[test]
    fn nu_t_limits() {
        let cfg = SystemConfig {
            m: 2,
            n: 2,
            t_s: 2,
            t_total: 10,
            t_f_s: 8,
            xi: 1.0,
            r: 100.0,
            r0: 100.0,
            p_max: 1e12,
            ..SystemConfig::default()
        };
        let link = CsitrLink::from_mode_gains(vec![1.0, 3.0], 2).unwrap();
        assert!(cfg.validate().is_err());
        let cfg_full = SystemConfig { t_f_s: 7, ..cfg.clone() };
        assert!(link.nu(1e9, &cfg_full, Allocation::WaterFilling).unwrap().nu < 1e-6);
        assert!(link.nu(cfg_full.p_max * 2.0, &cfg_full, Allocation::WaterFilling).is_err());
        // no goodput left once training and feedback fill the block
        let mut zero = cfg_full.clone();
        zero.t_f_s = 8;
        assert_eq!(link.nu(1.0, &zero, Allocation::WaterFilling).unwrap().nu, 0.0);
    }

    #[test]
    fn nu_r_examples() {
        let cfg = SystemConfig {
            xi: 0.0,
            b: 0.003,
            ..siso_cfg()
        };
        let r = nu_r(0.02, &cfg, &SuccessSource::ClosedForm).unwrap();
        assert_relative_eq!(r.nu, 100.0 * (54.0 / 55.0) / 0.023, max_relative = 1e-14);
        let cfg = SystemConfig {
            m: 2,
            n: 2,
            t_s: 2,
            xi: 0.0,
            r: 0.0,
            r0: 100.0,
            ..SystemConfig::default()
        };
        let r = nu_r(0.1, &cfg, &SuccessSource::MonteCarlo { samples: 100, seed: 1 }).unwrap();
        assert_eq!(r.success.value, 1.0);

        // SISO pipeline R (54/55) exp(-1 / rho_eff) / P
        let cfg = siso_cfg();
        for p in [1e-4, 1e-3, 0.05] {
            let got = nu_r(p, &cfg, &SuccessSource::ClosedForm).unwrap();
            let rho = p / cfg.sigma2;
            let re = rho * rho / (1.0 + 2.0 * rho);
            let expect = cfg.r * (54.0 / 55.0) * (-1.0 / re).exp() / p;
            assert_relative_eq!(got.nu, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_rate_gives_overhead_over_power() {
        let cfg = SystemConfig {
            b: 0.002,
            xi: 0.0,
            ..SystemConfig::default()
        };
        let curve = SuccessCurve::monte_carlo(4, 4, 0.0, 100, 3).unwrap();
        let r = nu_r_with(0.1, &cfg, &curve).unwrap();
        assert_relative_eq!(r.nu, 1600.0 * (1.0 - 4.0 / 55.0) / 0.102, max_relative = 1e-14);
    }

    #[test]
    fn nu_r_vanishes_at_small_power_with_fixed_cost() {
        let cfg = SystemConfig { b: 0.01, ..siso_cfg() };
        let r = nu_r(1e-7, &cfg, &SuccessSource::ClosedForm).unwrap();
        assert!(r.nu < 1e-100);
    }

    #[test]
    fn rate_derivative_matches_finite_difference() {
        let cfg = SystemConfig {
            m: 3,
            n: 2,
            t_s: 3,
            ..SystemConfig::default()
        };
        let link = CsitrLink::from_mode_gains(vec![0.3, 2.0], 3).unwrap();
        for p in [1e-5, 1e-3, 0.1, 3.0] {
            for strat in [Allocation::WaterFilling, Allocation::Uniform] {
                let (_, d) = link.rate(p, &cfg, strat).unwrap();
                let h = 1e-6 * p;
                let fd = (link.rate(p + h, &cfg, strat).unwrap().0 - link.rate(p - h, &cfg, strat).unwrap().0) / (2.0 * h);
                assert_relative_eq!(d, fd, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn scaling_r_and_a_scales_nu() {
        let cfg = SystemConfig { b: 0.004, ..siso_cfg() };
        let mut scaled = cfg.clone();
        scaled.r *= 3.0;
        scaled.r0 *= 3.0;
        scaled.a *= 2.0;
        scaled.b *= 2.0;
        for p in [1e-3, 1e-2, 1e-1] {
            let base = nu_r(p, &cfg, &SuccessSource::ClosedForm).unwrap().nu;
            let s = nu_r(p, &scaled, &SuccessSource::ClosedForm).unwrap().nu;
            assert_relative_eq!(s, base * 1.5, max_relative = 1e-13);
        }
    }
}
