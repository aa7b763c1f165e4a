//! Optimal number of transmit antennas.

use crate::config::SystemConfig;
use crate::efficiency::EfficiencyResult;
use crate::error::Result;
use crate::success::{SuccessCurve, SuccessSource};

use super::power::PowerMode;
use super::training::optimal_training_with;

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaRow {
    pub m: usize,
    pub t_s: usize,
    /// Best efficiency for this `M`, with `t_s` chosen jointly.
    pub result: EfficiencyResult,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AntennaTable {
    pub rows: Vec<AntennaRow>,
    /// Index into `rows` of the most efficient `M`.
    pub best: usize,
    /// Antenna counts left out, with the reason.
    pub skipped: Vec<(usize, String)>,
}

impl AntennaTable {
    pub fn best_row(&self) -> &AntennaRow {
        &self.rows[self.best]
    }
}

/// One success curve per antenna count, reused across power levels.
pub fn antenna_curves(
    template: &SystemConfig,
    m_range: std::ops::RangeInclusive<usize>,
    source: &SuccessSource,
) -> Result<Vec<(usize, SuccessCurve)>> {
    m_range
        .filter(|m| *m >= 1 && *m < template.t_total)
        .map(|m| Ok((m, source.curve(m, template.n, template.xi)?)))
        .collect()
}

/// Joint sweep over `M` and `t_s`; returns `nu*` per `M` and the argmax.
pub fn optimal_antennas(
    template: &SystemConfig,
    m_range: std::ops::RangeInclusive<usize>,
    source: &SuccessSource,
    mode: PowerMode,
) -> Result<AntennaTable> {
    let mut skipped: Vec<(usize, String)> = m_range
        .clone()
        .filter(|m| *m == 0 || *m >= template.t_total)
        .map(|m| (m, format!("needs 1 <= M <= T_s - 1 = {}", template.t_total.saturating_sub(1))))
        .collect();
    let curves = antenna_curves(template, m_range, source)?;
    let mut table = optimal_antennas_with(template, &curves, mode)?;
    skipped.append(&mut table.skipped);
    table.skipped = skipped;
    Ok(table)
}

pub fn optimal_antennas_with(
    template: &SystemConfig,
    curves: &[(usize, SuccessCurve)],
    mode: PowerMode,
) -> Result<AntennaTable> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (m, curve) in curves {
        let cfg = SystemConfig {
            m: *m,
            t_s: (*m).max(template.t_s.min(template.t_total - 1)),
            ..template.clone()
        };
        if let Err(e) = cfg.validate() {
            skipped.push((*m, e.to_string()));
            continue;
        }
        let opt = optimal_training_with(&cfg, curve, mode)?;
        rows.push(AntennaRow {
            m: *m,
            t_s: opt.t_s,
            result: opt.best,
        });
    }
    let mut best = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.result.ln_nu > rows[best].result.ln_nu {
            best = i;
        }
    }
    Ok(AntennaTable { rows, best, skipped })
}
