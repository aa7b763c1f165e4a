//! Named experiments that regenerate the figure data as CSV.
//!
//! Each experiment sweeps one axis (power in dBm, spectral efficiency or code
//! length) and writes one row per grid point. The first line of every file is
//! a `#` comment with the crate version, the seed, the sample count and the
//! fully resolved configuration, so any efficiency column can be recomputed
//! from the row itself: `nu = R (1 - overhead / T_s) success / (aP + b)`.

use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::sample_channel;
use crate::config::{dbm_to_watts, watts_to_dbm, SystemConfig};
use crate::efficiency::{nu_r_with, Allocation, CsitrLink};
use crate::error::{Error, Result};
use crate::optimize::{
    antenna_curves, optimal_antennas_with, optimal_power_csitr_link, optimal_power_infinite_block_link,
    optimal_power_nocsit_with, optimal_training_csitr, optimal_training_with, siso_lowsnr_ratio_numeric,
    siso_lowsnr_root, OptimumReport, PowerMode,
};
use crate::precoding::svd;
use crate::success::SuccessSource;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    SweepPowerCsitr,
    SweepRate,
    SweepPowerNocsit,
    OptimalTrainingCurve,
    OptimalAntennasCurve,
    SisoAnalysis,
    ComparePaUpa,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::SweepPowerCsitr,
        ExperimentName::SweepRate,
        ExperimentName::SweepPowerNocsit,
        ExperimentName::OptimalTrainingCurve,
        ExperimentName::OptimalAntennasCurve,
        ExperimentName::SisoAnalysis,
        ExperimentName::ComparePaUpa,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::SweepPowerCsitr => "sweep-power-csitr",
            ExperimentName::SweepRate => "sweep-rate",
            ExperimentName::SweepPowerNocsit => "sweep-power-nocsit",
            ExperimentName::OptimalTrainingCurve => "optimal-training-curve",
            ExperimentName::OptimalAntennasCurve => "optimal-antennas-curve",
            ExperimentName::SisoAnalysis => "siso-analysis",
            ExperimentName::ComparePaUpa => "compare-pa-upa",
        }
    }

    /// What the grid values mean for this experiment.
    pub fn axis(&self) -> &'static str {
        match self {
            ExperimentName::SweepRate => "xi (bits/s/Hz)",
            ExperimentName::SisoAnalysis => "code length L",
            ExperimentName::ComparePaUpa => "P_max (dBm)",
            _ => "P (dBm)",
        }
    }

    pub fn default_grid(&self) -> Grid {
        let g = |min, max, points| Grid {
            min,
            max,
            points,
            log: false,
        };
        match self {
            ExperimentName::SweepPowerCsitr => g(-30.0, 40.0, 141),
            ExperimentName::SweepRate => g(0.25, 12.0, 48),
            ExperimentName::SweepPowerNocsit => g(-20.0, 50.0, 141),
            ExperimentName::OptimalTrainingCurve => g(-10.0, 50.0, 61),
            ExperimentName::OptimalAntennasCurve => g(-20.0, 60.0, 41),
            ExperimentName::SisoAnalysis => Grid {
                min: 1.0,
                max: 1000.0,
                points: 31,
                log: true,
            },
            ExperimentName::ComparePaUpa => g(-20.0, 40.0, 31),
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentName::ALL.iter().map(|e| e.as_str()).collect();
                Error::config("experiment", format!("unknown `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Sweep axis `min:max:points[:lin|log]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.log {
            crate::optimize::search::log_grid(self.min, self.max, self.points)
        } else {
            (0..self.points)
                .map(|i| {
                    if i + 1 == self.points {
                        self.max
                    } else {
                        self.min + (self.max - self.min) * i as f64 / (self.points - 1) as f64
                    }
                })
                .collect()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::config("grid", "needs at least 2 points"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::config("grid", format!("need finite min < max, got {}:{}", self.min, self.max)));
        }
        if self.log && self.min <= 0.0 {
            return Err(Error::config("grid", "log spacing needs min > 0"));
        }
        Ok(())
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::config("grid", format!("expected min:max:points[:lin|log], got `{s}`")));
        }
        let num = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::config("grid", format!("`{v}`: {e}")))
        };
        let points = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::config("grid", format!("`{}`: {e}", parts[2])))?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(other) => return Err(Error::config("grid", format!("spacing `{other}` is not lin or log"))),
        };
        let g = Grid {
            min: num(parts[0])?,
            max: num(parts[1])?,
            points,
            log,
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub config: SystemConfig,
    pub grid: Grid,
    pub seed: u64,
    /// Monte-Carlo channel draws per success curve.
    pub samples: usize,
    pub success: SuccessSource,
    /// Eigenmode gains `d_i^2` of the channel estimate for the CSI-at-
    /// transmitter experiments; drawn from `seed` when absent.
    pub channel_gains: Option<Vec<f64>>,
    /// Re-optimise `P` below each grid power in the training and antenna
    /// curves instead of holding it at the grid value.
    pub optimize_power: bool,
}

impl ExperimentSpec {
    pub fn new(name: ExperimentName, config: SystemConfig) -> Self {
        Self {
            name,
            config,
            grid: name.default_grid(),
            seed: 1,
            samples: 10_000,
            success: SuccessSource::Auto {
                samples: 10_000,
                seed: 1,
            },
            channel_gains: None,
            optimize_power: false,
        }
    }

    /// Sets seed and sample count, keeping the success source kind.
    pub fn with_sampling(mut self, seed: u64, samples: usize) -> Self {
        self.seed = seed;
        self.samples = samples;
        self.success = match self.success {
            SuccessSource::ClosedForm => SuccessSource::ClosedForm,
            SuccessSource::MonteCarlo { .. } => SuccessSource::MonteCarlo { samples, seed },
            SuccessSource::Auto { .. } => SuccessSource::Auto { samples, seed },
        };
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.grid.validate()?;
        if self.samples == 0 {
            return Err(Error::config("samples", "must be >= 1"));
        }
        let powers = !matches!(self.name, ExperimentName::SweepRate | ExperimentName::SisoAnalysis);
        if powers && dbm_to_watts(self.grid.max) > self.config.p_max * (1.0 + 1e-12) {
            return Err(Error::config(
                "grid",
                format!(
                    "largest grid power {} dBm exceeds P_max = {} W",
                    self.grid.max, self.config.p_max
                ),
            ));
        }
        if self.name == ExperimentName::SisoAnalysis && self.grid.min < 1.0 {
            return Err(Error::config("grid", "code lengths must be >= 1"));
        }
        if self.name == ExperimentName::SweepRate && self.grid.min < 0.0 {
            return Err(Error::config("grid", "spectral efficiency must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub csv: String,
    pub summary: String,
}

impl ExperimentOutput {
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, &self.csv)?;
        Ok(())
    }
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(cols: &[&str]) -> Self {
        Self {
            header: cols.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn flag(b: bool) -> String {
    (b as u8).to_string()
}

fn source_label(s: &SuccessSource) -> String {
    match s {
        SuccessSource::ClosedForm => "closed".into(),
        SuccessSource::MonteCarlo { .. } => "mc".into(),
        SuccessSource::Auto { .. } => "auto".into(),
    }
}

fn describe(report: &OptimumReport) -> String {
    let mut s = format!(
        "P* = {:.6e} W ({:.3} dBm), nu* = {:.6e} bits/J, FOC residual = {:.2e}",
        report.argmax,
        watts_to_dbm(report.argmax),
        report.value,
        report.first_order_residual
    );
    if let Some(r) = report.foc_root {
        let _ = write!(s, ", FOC root = {r:.6e} W");
    }
    if report.flags.boundary_hit {
        s.push_str(" [boundary]");
    }
    if report.flags.non_unimodal_detected {
        s.push_str(" [non-unimodal]");
    }
    s
}

fn csitr_link(spec: &ExperimentSpec) -> Result<CsitrLink> {
    let cfg = &spec.config;
    match &spec.channel_gains {
        Some(g) => {
            if g.len() > cfg.m.min(cfg.n) {
                return Err(Error::config(
                    "channel-gains",
                    format!("{} gains but min(M, N) = {}", g.len(), cfg.m.min(cfg.n)),
                ));
            }
            CsitrLink::from_mode_gains(g.clone(), cfg.m)
        }
        None => {
            let h = sample_channel(cfg.m, cfg.n, spec.seed)?;
            CsitrLink::from_mode_gains(svd(&h)?.mode_gains(), cfg.m)
        }
    }
}

fn fmt_gains(g: &[f64]) -> String {
    g.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

/// Runs one experiment and returns the CSV text and a human summary.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let cfg = &spec.config;
    let grid = spec.grid.values();
    let mut summary = String::new();
    let mut extra = String::new();

    let table = match spec.name {
        ExperimentName::SweepPowerNocsit => {
            let curve = spec.success.curve(cfg.m, cfg.n, cfg.xi)?;
            let mut t = Table::new(&[
                "P_W", "P_dBm", "M", "N", "t_s", "rho_eff", "success", "stderr", "nu_bits_per_J", "ln_nu",
            ]);
            let rows: Vec<Vec<String>> = grid
                .par_iter()
                .map(|dbm| {
                    let p = dbm_to_watts(*dbm);
                    let r = nu_r_with(p, cfg, &curve)?;
                    Ok(vec![
                        num(p),
                        num(*dbm),
                        cfg.m.to_string(),
                        cfg.n.to_string(),
                        cfg.t_s.to_string(),
                        num(r.rho_eff),
                        num(r.success.value),
                        num(r.success.stderr),
                        num(r.nu),
                        num(r.ln_nu),
                    ])
                })
                .collect::<Result<_>>()?;
            t.rows = rows;
            let opt = optimal_power_nocsit_with(cfg, &curve)?;
            let _ = writeln!(summary, "optimum over P: {}", describe(&opt));
            t
        }
        ExperimentName::SweepPowerCsitr => {
            let link = csitr_link(spec)?;
            let _ = write!(extra, " channel_gains={}", fmt_gains(link.mode_gains()));
            let mut t = Table::new(&[
                "P_W",
                "P_dBm",
                "M",
                "N",
                "t_s",
                "t_f_s",
                "rho_eff",
                "I_bits",
                "active_modes",
                "success",
                "nu_bits_per_J",
                "ln_nu",
            ]);
            t.rows = grid
                .par_iter()
                .map(|dbm| {
                    let p = dbm_to_watts(*dbm);
                    let r = link.nu(p, cfg, Allocation::WaterFilling)?;
                    let active = link.allocation(r.rho_eff, Allocation::WaterFilling)?.active_modes();
                    Ok(vec![
                        num(p),
                        num(*dbm),
                        cfg.m.to_string(),
                        cfg.n.to_string(),
                        cfg.t_s.to_string(),
                        cfg.t_f_s.to_string(),
                        num(r.rho_eff),
                        num(r.mutual_info.unwrap_or(0.0)),
                        active.to_string(),
                        num(r.success.value),
                        num(r.nu),
                        num(r.ln_nu),
                    ])
                })
                .collect::<Result<_>>()?;
            let opt = optimal_power_csitr_link(&link, cfg, Allocation::WaterFilling)?;
            let _ = writeln!(summary, "optimum over P (finite block): {}", describe(&opt));
            let inf = optimal_power_infinite_block_link(&link, cfg)?;
            let _ = writeln!(summary, "optimum over P (infinite block): {}", describe(&inf));
            t
        }
        ExperimentName::SweepRate => {
            let link = csitr_link(spec)?;
            let _ = write!(extra, " channel_gains={}", fmt_gains(link.mode_gains()));
            let mut t = Table::new(&[
                "xi", "R", "P_W", "P_dBm", "t_s", "I_bits", "success", "nu_bits_per_J", "boundary_hit",
            ]);
            let rows: Vec<(f64, Vec<String>)> = grid
                .par_iter()
                .map(|xi| {
                    let mut c = cfg.clone();
                    c.set_xi(*xi);
                    let opt = optimal_power_csitr_link(&link, &c, Allocation::WaterFilling)?;
                    let r = link.nu(opt.argmax, &c, Allocation::WaterFilling)?;
                    Ok((
                        r.nu,
                        vec![
                            num(*xi),
                            num(c.r),
                            num(r.p),
                            num(watts_to_dbm(r.p)),
                            c.t_s.to_string(),
                            num(r.mutual_info.unwrap_or(0.0)),
                            num(r.success.value),
                            num(r.nu),
                            flag(opt.flags.boundary_hit),
                        ],
                    ))
                })
                .collect::<Result<_>>()?;
            let best = rows
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let _ = writeln!(
                summary,
                "best xi on grid = {} with nu* = {:.6e} bits/J",
                grid[best], rows[best].0
            );
            t.rows = rows.into_iter().map(|r| r.1).collect();
            t
        }
        ExperimentName::OptimalTrainingCurve => {
            let curve = spec.success.curve(cfg.m, cfg.n, cfg.xi)?;
            let mut t = Table::new(&[
                "P_grid_W",
                "P_grid_dBm",
                "M",
                "N",
                "t_s",
                "P_W",
                "success",
                "stderr",
                "nu_bits_per_J",
                "ln_nu",
                "concave",
            ]);
            t.rows = grid
                .iter()
                .map(|dbm| {
                    let p = dbm_to_watts(*dbm);
                    let (c, mode) = if spec.optimize_power {
                        (SystemConfig { p_max: p, ..cfg.clone() }, PowerMode::Optimized)
                    } else {
                        (cfg.clone(), PowerMode::Fixed(p))
                    };
                    let opt = optimal_training_with(&c, &curve, mode)?;
                    Ok(vec![
                        num(p),
                        num(*dbm),
                        cfg.m.to_string(),
                        cfg.n.to_string(),
                        opt.t_s.to_string(),
                        num(opt.best.p),
                        num(opt.best.success.value),
                        num(opt.best.success.stderr),
                        num(opt.best.nu),
                        num(opt.best.ln_nu),
                        flag(opt.concave),
                    ])
                })
                .collect::<Result<_>>()?;
            let first = &t.rows[0];
            let last = &t.rows[t.rows.len() - 1];
            let _ = writeln!(
                summary,
                "t_s* = {} at {} dBm, t_s* = {} at {} dBm (M = {}, T_s = {})",
                first[4], first[1], last[4], last[1], cfg.m, cfg.t_total
            );
            t
        }
        ExperimentName::OptimalAntennasCurve => {
            let curves = antenna_curves(cfg, 1..=cfg.m, &spec.success)?;
            let ms: Vec<usize> = curves.iter().map(|c| c.0).collect();
            let mut cols = vec![
                "P_grid_W".to_string(),
                "P_grid_dBm".into(),
                "M".into(),
                "N".into(),
                "t_s".into(),
                "P_W".into(),
                "success".into(),
                "stderr".into(),
                "nu_bits_per_J".into(),
                "ln_nu".into(),
            ];
            cols.extend(ms.iter().map(|m| format!("ln_nu_M{m}")));
            let mut t = Table {
                header: cols,
                rows: Vec::new(),
            };
            t.rows = grid
                .iter()
                .map(|dbm| {
                    let p = dbm_to_watts(*dbm);
                    let (c, mode) = if spec.optimize_power {
                        (SystemConfig { p_max: p, ..cfg.clone() }, PowerMode::Optimized)
                    } else {
                        (cfg.clone(), PowerMode::Fixed(p))
                    };
                    let table = optimal_antennas_with(&c, &curves, mode)?;
                    let b = table.best_row();
                    let mut row = vec![
                        num(p),
                        num(*dbm),
                        b.m.to_string(),
                        cfg.n.to_string(),
                        b.t_s.to_string(),
                        num(b.result.p),
                        num(b.result.success.value),
                        num(b.result.success.stderr),
                        num(b.result.nu),
                        num(b.result.ln_nu),
                    ];
                    for m in &ms {
                        let v = table
                            .rows
                            .iter()
                            .find(|r| r.m == *m)
                            .map(|r| num(r.result.ln_nu))
                            .unwrap_or_else(|| "nan".into());
                        row.push(v);
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
            let first = &t.rows[0];
            let last = &t.rows[t.rows.len() - 1];
            let _ = writeln!(
                summary,
                "M* = {} (t_s* = {}) at {} dBm, M* = {} (t_s* = {}) at {} dBm",
                first[2], first[4], first[1], last[2], last[4], last[1]
            );
            t
        }
        ExperimentName::SisoAnalysis => {
            let mut ls: Vec<usize> = grid.iter().map(|l| l.round().max(1.0) as usize).collect();
            ls.dedup();
            let mut t = Table::new(&["L", "x", "residual", "ratio", "ratio_direct"]);
            t.rows = ls
                .par_iter()
                .map(|l| {
                    let r = siso_lowsnr_root(*l)?;
                    Ok(vec![
                        l.to_string(),
                        num(r.x),
                        num(r.residual),
                        num(r.ratio),
                        num(siso_lowsnr_ratio_numeric(*l)?),
                    ])
                })
                .collect::<Result<_>>()?;
            let r = siso_lowsnr_root(cfg.l)?;
            let _ = writeln!(
                summary,
                "L = {}: x = {:.4}, rho* |h|^2 / xi = {:.4} (residual {:.1e}); direct maximisation gives {:.4}",
                cfg.l,
                r.x,
                r.ratio,
                r.residual,
                siso_lowsnr_ratio_numeric(cfg.l)?
            );
            t
        }
        ExperimentName::ComparePaUpa => {
            let link = csitr_link(spec)?;
            let _ = write!(extra, " channel_gains={}", fmt_gains(link.mode_gains()));
            let mut t = Table::new(&[
                "T_s",
                "P_max_W",
                "P_max_dBm",
                "allocation",
                "t_s",
                "P_W",
                "I_bits",
                "success",
                "nu_bits_per_J",
            ]);
            let mut jobs = Vec::new();
            for t_total in [100usize, 10_000] {
                for dbm in &grid {
                    for strategy in [Allocation::WaterFilling, Allocation::Uniform] {
                        jobs.push((t_total, *dbm, strategy));
                    }
                }
            }
            t.rows = jobs
                .par_iter()
                .map(|(t_total, dbm, strategy)| {
                    let p_max = dbm_to_watts(*dbm);
                    let c = SystemConfig {
                        t_total: *t_total,
                        t_s: cfg.m,
                        p_max,
                        ..cfg.clone()
                    };
                    c.validate()?;
                    let r = optimal_training_csitr(&link, &c, *strategy)?;
                    Ok(vec![
                        t_total.to_string(),
                        num(p_max),
                        num(*dbm),
                        match strategy {
                            Allocation::WaterFilling => "wf".into(),
                            Allocation::Uniform => "upa".into(),
                        },
                        r.t_s.to_string(),
                        num(r.p),
                        num(r.mutual_info.unwrap_or(0.0)),
                        num(r.success.value),
                        num(r.nu),
                    ])
                })
                .collect::<Result<_>>()?;
            let worst_gap = t
                .rows
                .chunks(2)
                .map(|pair| pair[0][8].parse::<f64>().unwrap_or(0.0) - pair[1][8].parse::<f64>().unwrap_or(0.0))
                .fold(f64::INFINITY, f64::min);
            let _ = writeln!(summary, "smallest nu(wf) - nu(upa) over the sweep: {worst_gap:.6e} bits/J");
            t
        }
    };

    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "# mimo-ee {VERSION} experiment={} seed={} samples={} success={} grid={}:{}:{}:{}{extra} config: {}",
        spec.name,
        spec.seed,
        spec.samples,
        source_label(&spec.success),
        spec.grid.min,
        spec.grid.max,
        spec.grid.points,
        if spec.grid.log { "log" } else { "lin" },
        cfg.summary()
    );
    let _ = writeln!(csv, "{}", table.header.join(","));
    for row in &table.rows {
        let _ = writeln!(csv, "{}", row.join(","));
    }
    let mut head = format!("{}: {} rows over {}\n", spec.name, table.rows.len(), spec.name.axis());
    head.push_str(&summary);
    Ok(ExperimentOutput { csv, summary: head })
}
