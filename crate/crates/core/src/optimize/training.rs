//! Optimal training length.

use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::efficiency::{nu_r_with, Allocation, CsitrLink, EfficiencyResult};
use crate::error::{Error, Result};
use crate::success::{SuccessCurve, SuccessSource};

use super::power::{optimal_power_csitr_link, optimal_power_nocsit_with, PowerMode};
use super::search::argmax_integer;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOptimum {
    pub t_s: usize,
    pub best: EfficiencyResult,
    /// One entry per feasible `t_s`, ascending from `M`.
    pub curve: Vec<EfficiencyResult>,
    /// Largest second difference of `nu` over `t_s`, relative to the peak.
    pub max_second_difference: f64,
    /// Second differences stay below `1e-9` of the peak.
    pub concave: bool,
}

fn with_training(cfg: &SystemConfig, t_s: usize) -> SystemConfig {
    SystemConfig { t_s, ..cfg.clone() }
}

pub(crate) fn feasible_training(cfg: &SystemConfig) -> Result<std::ops::RangeInclusive<usize>> {
    if cfg.t_total < cfg.m + 1 {
        return Err(Error::config(
            "T_s",
            format!("T_s = {} leaves no room for t_s >= M = {}", cfg.t_total, cfg.m),
        ));
    }
    Ok(cfg.m..=cfg.t_total - 1)
}

/// `nu_R(P, t_s)` with `P` either fixed or optimised for this `t_s`.
pub fn nocsit_at_training(
    cfg: &SystemConfig,
    curve: &SuccessCurve,
    t_s: usize,
    mode: PowerMode,
) -> Result<EfficiencyResult> {
    let c = with_training(cfg, t_s);
    let p = match mode {
        PowerMode::Fixed(p) => p,
        PowerMode::Optimized => optimal_power_nocsit_with(&c, curve)?.argmax,
    };
    nu_r_with(p, &c, curve)
}

/// Integer argmax of `t_s -> nu_R(P(t_s), t_s)` over `M <= t_s <= T_s - 1`,
/// compared in the log domain so that underflowing success probabilities
/// still rank.
pub fn optimal_training(cfg: &SystemConfig, source: &SuccessSource, mode: PowerMode) -> Result<TrainingOptimum> {
    let curve = source.curve(cfg.m, cfg.n, cfg.xi)?;
    optimal_training_with(cfg, &curve, mode)
}

pub fn optimal_training_with(cfg: &SystemConfig, curve: &SuccessCurve, mode: PowerMode) -> Result<TrainingOptimum> {
    let range = feasible_training(cfg)?;
    let results: Vec<EfficiencyResult> = range
        .clone()
        .into_par_iter()
        .map(|t| nocsit_at_training(cfg, curve, t, mode))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.ln_nu > results[best].ln_nu {
            best = i;
        }
    }
    let peak = results.iter().map(|r| r.nu).fold(0.0, f64::max);
    let max_d2 = results
        .windows(3)
        .map(|w| w[2].nu - 2.0 * w[1].nu + w[0].nu)
        .fold(f64::NEG_INFINITY, f64::max);
    let rel = if peak > 0.0 { max_d2 / peak } else { 0.0 };
    Ok(TrainingOptimum {
        t_s: results[best].t_s,
        best: results[best].clone(),
        max_second_difference: if results.len() < 3 { 0.0 } else { rel },
        concave: results.len() < 3 || rel <= 1e-9,
        curve: results,
    })
}

/// Best `(t_s, P)` for `nu_T` on a fixed channel estimate, `P` optimised
/// below `P_max` for each `t_s`.
pub fn optimal_training_csitr(link: &CsitrLink, cfg: &SystemConfig, strategy: Allocation) -> Result<EfficiencyResult> {
    let lo = cfg.m;
    let hi = cfg
        .t_total
        .checked_sub(cfg.t_f_s + 1)
        .filter(|hi| *hi >= lo)
        .ok_or_else(|| Error::config("T_s", "no feasible training length"))?;
    let eval = |t: usize| -> Result<EfficiencyResult> {
        let c = with_training(cfg, t);
        let p = optimal_power_csitr_link(link, &c, strategy)?.argmax;
        link.nu(p, &c, strategy)
    };
    let (t, _) = argmax_integer(lo, hi, |t| Ok(eval(t)?.ln_nu))?;
    eval(t)
}
