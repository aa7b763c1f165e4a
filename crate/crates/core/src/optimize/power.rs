//! Optimal transmit power.

use crate::channel::{self, ChannelEstimate};
use crate::config::SystemConfig;
use crate::efficiency::{nu_r_with, Allocation, CsitrLink};
use crate::error::Result;
use crate::success::{SuccessCurve, SuccessSource};

use super::search::{maximize_unimodal, root_near, Bracket, OptimumReport, PRESCAN_POINTS};

/// Whether training and antenna sweeps hold `P` fixed or re-optimise it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerMode {
    Fixed(f64),
    Optimized,
}

fn offset(cfg: &SystemConfig) -> f64 {
    cfg.power_model().fixed_part(cfg.m) / cfg.a
}

/// Maximises `nu_R` over `P` in `[1 uW, P_max]`.
///
/// Also solves the first-order condition
/// `(P + b/a) f'(rho_eff) d rho_eff/dP = f(rho_eff)` by bisection and reports
/// its root next to the search result.
pub fn optimal_power_nocsit(cfg: &SystemConfig, source: &SuccessSource) -> Result<OptimumReport> {
    let curve = source.curve(cfg.m, cfg.n, cfg.xi)?;
    optimal_power_nocsit_with(cfg, &curve)
}

/// `(P + b/a) * hazard * d rho_eff / dP - 1`, zero at the optimum.
pub(crate) fn nocsit_foc(cfg: &SystemConfig, curve: &SuccessCurve, p: f64) -> f64 {
    let rho = p / cfg.sigma2;
    let tau = cfg.tau();
    let s = curve.eval(channel::rho_eff_or_perfect(rho, tau));
    let slope = channel::drho_eff_or_perfect(rho, tau) / cfg.sigma2;
    if s.hazard.is_infinite() {
        return f64::INFINITY;
    }
    (p + offset(cfg)) * s.hazard * slope - 1.0
}

pub fn optimal_power_nocsit_with(cfg: &SystemConfig, curve: &SuccessCurve) -> Result<OptimumReport> {
    cfg.validate()?;
    let bracket = Bracket::power(cfg.p_max)?;
    let mut report = maximize_unimodal(|p| Ok(nu_r_with(p, cfg, curve)?.ln_nu), bracket)?;
    let foc = |p: f64| Ok(nocsit_foc(cfg, curve, p));
    report.foc_root = root_near(foc, &bracket.grid(PRESCAN_POINTS), report.argmax)?;
    report.flags.foc_unbracketed = report.foc_root.is_none();
    report.first_order_residual = nocsit_foc(cfg, curve, report.argmax).abs();
    report.value = nu_r_with(report.argmax, cfg, curve)?.nu;
    Ok(report)
}

/// Maximises `nu_T(P, Q_WF(P), H_hat)` over `P` in `[1 uW, P_max]`, with
/// water-filling re-run at every `P`.
pub fn optimal_power_csitr(estimate: &ChannelEstimate, cfg: &SystemConfig) -> Result<OptimumReport> {
    let link = CsitrLink::new(estimate)?;
    optimal_power_csitr_link(&link, cfg, Allocation::WaterFilling)
}

/// `(P + b/a) dF_L/dP / F_L - 1` by central differences on `ln F_L`.
pub(crate) fn csitr_foc(link: &CsitrLink, cfg: &SystemConfig, strategy: Allocation, p: f64) -> Result<f64> {
    let h = (1e-6 * p).max(1e-9).min(0.5 * p);
    let ln_f = |x: f64| -> Result<f64> {
        let r = link.nu(x, &SystemConfig { p_max: f64::MAX, ..cfg.clone() }, strategy)?;
        let rho_eff = r.rho_eff;
        let bits = r.mutual_info.unwrap_or(0.0);
        Ok(cfg.f_l.eval(bits - cfg.xi, rho_eff, cfg.l).1)
    };
    let d = (ln_f(p + h)? - ln_f(p - h)?) / (2.0 * h);
    Ok((p + offset(cfg)) * d - 1.0)
}

pub fn optimal_power_csitr_link(link: &CsitrLink, cfg: &SystemConfig, strategy: Allocation) -> Result<OptimumReport> {
    cfg.validate()?;
    let bracket = Bracket::power(cfg.p_max)?;
    let mut report = maximize_unimodal(|p| Ok(link.nu(p, cfg, strategy)?.ln_nu), bracket)?;
    report.first_order_residual = csitr_foc(link, cfg, strategy, report.argmax)?.abs();
    report.value = link.nu(report.argmax, cfg, strategy)?.nu;
    Ok(report)
}

/// Infinite code length: maximises `I(P) / (aP + b)` and cross-checks the
/// stationarity condition `I'(P) (P + b/a) = I(P)`.
pub fn optimal_power_infinite_block(estimate: &ChannelEstimate, cfg: &SystemConfig) -> Result<OptimumReport> {
    let link = CsitrLink::new(estimate)?;
    optimal_power_infinite_block_link(&link, cfg)
}

pub(crate) fn infinite_block_foc(link: &CsitrLink, cfg: &SystemConfig, p: f64) -> Result<f64> {
    let (bits, slope) = link.rate(p, cfg, Allocation::WaterFilling)?;
    Ok((p + offset(cfg)) * slope / bits - 1.0)
}

pub fn optimal_power_infinite_block_link(link: &CsitrLink, cfg: &SystemConfig) -> Result<OptimumReport> {
    cfg.validate()?;
    let bracket = Bracket::power(cfg.p_max)?;
    let mut report = maximize_unimodal(
        |p| Ok(link.nu_infinite_block(p, cfg, Allocation::WaterFilling)?.ln_nu),
        bracket,
    )?;
    let foc = |p: f64| infinite_block_foc(link, cfg, p);
    report.foc_root = root_near(foc, &bracket.grid(PRESCAN_POINTS), report.argmax)?;
    report.flags.foc_unbracketed = report.foc_root.is_none();
    report.first_order_residual = infinite_block_foc(link, cfg, report.argmax)?.abs();
    report.value = link.nu_infinite_block(report.argmax, cfg, Allocation::WaterFilling)?.nu;
    Ok(report)
}
