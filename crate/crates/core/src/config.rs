//! System parameters and their flat `key = value` file format.
//!
//! Keys match the field names used in the literature (`M`, `T_s`, `P_max`,
//! ...). Powers are in watts unless the key carries a `_mW` or `_dBm`
//! suffix. Lines starting with `#` are comments; unknown keys are errors.
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `M` | 4 | transmit antennas |
//! | `N` | 4 | receive antennas |
//! | `T_s` | 55 | block length (symbols) |
//! | `t_s` | 4 | training symbols |
//! | `t_f_s` | 0 | feedback symbols (CSI at the transmitter only) |
//! | `S_d` | 15e-6 | symbol duration (s) |
//! | `L` | 100 | code length (symbols) |
//! | `R` | 1600 | rate (bit/s) |
//! | `R0` | 100 | bandwidth (Hz); `xi = R / R0` |
//! | `xi` | 16 | target spectral efficiency; derived from `R / R0` if omitted |
//! | `a` | 1 | power amplifier slope |
//! | `b` | 0 | fixed circuit power (W) |
//! | `b0` | unset | per-antenna circuit power (W); replaces `b` by `M b0` |
//! | `sigma2` | 1e-3 | noise power (W), so `rho = P / sigma2` |
//! | `P_max` | 1000 | largest transmit power considered (W) |
//! | `perfect_csi` | false | ignore estimation noise (`rho_eff = rho`) |
//! | `f_l` | gaussian | finite-block success model: `gaussian` or `arq` |
//! | `arq_T` | 1 | slope of the `arq` model |

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::efficiency::PowerModel;
use crate::error::{Error, Result};
use crate::success::{BlockParams, FlVariant};

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub m: usize,
    pub n: usize,
    /// Block length `T_s` in symbols.
    pub t_total: usize,
    pub t_s: usize,
    pub t_f_s: usize,
    pub s_d: f64,
    pub l: usize,
    pub r: f64,
    pub r0: f64,
    pub xi: f64,
    pub a: f64,
    pub b: f64,
    pub b0: Option<f64>,
    pub sigma2: f64,
    pub p_max: f64,
    pub perfect_csi: bool,
    pub f_l: FlVariant,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            m: 4,
            n: 4,
            t_total: 55,
            t_s: 4,
            t_f_s: 0,
            s_d: 15e-6,
            l: 100,
            r: 1600.0,
            r0: 100.0,
            xi: 16.0,
            a: 1.0,
            b: 0.0,
            b0: None,
            sigma2: 1e-3,
            p_max: 1000.0,
            perfect_csi: false,
            f_l: FlVariant::Gaussian,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be finite and > 0")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(field, format!("{v} must be finite and >= 0")))
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("M", "need at least one transmit antenna"));
        }
        if self.n == 0 {
            return Err(Error::config("N", "need at least one receive antenna"));
        }
        if self.t_s < self.m {
            return Err(Error::config(
                "t_s",
                format!(
                    "t_s = {} < M = {}: training needs at least as many symbols as transmit antennas",
                    self.t_s, self.m
                ),
            ));
        }
        if self.t_s >= self.t_total {
            return Err(Error::config(
                "t_s",
                format!("t_s = {} must be below T_s = {}", self.t_s, self.t_total),
            ));
        }
        if self.t_s + self.t_f_s >= self.t_total {
            return Err(Error::config(
                "t_f_s",
                format!(
                    "t_s + t_f_s = {} must be below T_s = {}",
                    self.t_s + self.t_f_s,
                    self.t_total
                ),
            ));
        }
        if self.l == 0 {
            return Err(Error::config("L", "code length must be >= 1"));
        }
        positive("S_d", self.s_d)?;
        non_negative("R", self.r)?;
        positive("R0", self.r0)?;
        non_negative("xi", self.xi)?;
        let implied = self.r / self.r0;
        if (implied - self.xi).abs() > 1e-12 * self.xi.max(implied).max(1e-300) {
            return Err(Error::config(
                "xi",
                format!("xi = {} but R / R0 = {implied}", self.xi),
            ));
        }
        positive("a", self.a)?;
        non_negative("b", self.b)?;
        if let Some(b0) = self.b0 {
            non_negative("b0", b0)?;
        }
        positive("sigma2", self.sigma2)?;
        positive("P_max", self.p_max)?;
        if let FlVariant::Arq { t } = self.f_l {
            positive("arq_T", t)?;
        }
        Ok(())
    }

    /// Training symbols per transmit antenna, or `None` with perfect CSI.
    pub fn tau(&self) -> Option<f64> {
        if self.perfect_csi {
            None
        } else {
            Some(self.t_s as f64 / self.m as f64)
        }
    }

    pub fn block(&self) -> BlockParams {
        BlockParams {
            l: self.l,
            xi: self.xi,
        }
    }

    pub fn power_model(&self) -> PowerModel {
        PowerModel {
            a: self.a,
            b: self.b,
            per_antenna_b0: self.b0,
        }
    }

    /// Sets `xi` and the rate `R = xi R0` together.
    pub fn set_xi(&mut self, xi: f64) {
        self.xi = xi;
        self.r = xi * self.r0;
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = SystemConfig::default();
        let mut seen = HashSet::new();
        let (mut xi, mut r0) = (None, None);
        let mut arq_t = 1.0;
        let mut f_l = "gaussian".to_string();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let (base, unit) = match key.rsplit_once('_') {
                Some((base, "mW")) => (base, Unit::MilliWatt),
                Some((base, "dBm")) => (base, Unit::Dbm),
                _ => (key, Unit::Si),
            };
            if !seen.insert(base.to_string()) {
                return Err(Error::Parse {
                    line,
                    message: format!("`{base}` given more than once"),
                });
            }
            let parse_f = |v: &str| -> Result<f64> {
                v.parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("`{key}`: {e}"),
                })
            };
            let parse_u = |v: &str| -> Result<usize> {
                v.parse::<usize>().map_err(|e| Error::Parse {
                    line,
                    message: format!("`{key}`: {e}"),
                })
            };
            let power = |v: &str| -> Result<f64> {
                let x = parse_f(v)?;
                Ok(match unit {
                    Unit::Si => x,
                    Unit::MilliWatt => x / 1e3,
                    Unit::Dbm => dbm_to_watts(x),
                })
            };
            if unit != Unit::Si && !matches!(base, "b" | "b0" | "sigma2" | "P_max") {
                return Err(Error::Parse {
                    line,
                    message: format!("`{key}`: unit suffix only applies to powers"),
                });
            }
            match base {
                "M" => cfg.m = parse_u(value)?,
                "N" => cfg.n = parse_u(value)?,
                "T_s" => cfg.t_total = parse_u(value)?,
                "t_s" => cfg.t_s = parse_u(value)?,
                "t_f_s" => cfg.t_f_s = parse_u(value)?,
                "S_d" => cfg.s_d = parse_f(value)?,
                "L" => cfg.l = parse_u(value)?,
                "R" => cfg.r = parse_f(value)?,
                "R0" => r0 = Some(parse_f(value)?),
                "xi" => xi = Some(parse_f(value)?),
                "a" => cfg.a = parse_f(value)?,
                "b" => cfg.b = power(value)?,
                "b0" => cfg.b0 = Some(power(value)?),
                "sigma2" => cfg.sigma2 = power(value)?,
                "P_max" => cfg.p_max = power(value)?,
                "perfect_csi" => {
                    cfg.perfect_csi = value.parse().map_err(|_| Error::Parse {
                        line,
                        message: format!("`perfect_csi`: expected true or false, got `{value}`"),
                    })?
                }
                "f_l" => f_l = value.to_string(),
                "arq_T" => arq_t = parse_f(value)?,
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    })
                }
            }
        }

        cfg.f_l = match f_l.as_str() {
            "gaussian" => FlVariant::Gaussian,
            "arq" => FlVariant::Arq { t: arq_t },
            other => return Err(Error::config("f_l", format!("unknown model `{other}` (gaussian or arq)"))),
        };
        match (xi, r0) {
            (Some(x), Some(r0)) => {
                cfg.xi = x;
                cfg.r0 = r0;
            }
            (Some(x), None) => {
                cfg.xi = x;
                cfg.r0 = if x > 0.0 { cfg.r / x } else { cfg.r0 };
            }
            (None, Some(r0)) => {
                cfg.r0 = r0;
                cfg.xi = cfg.r / r0;
            }
            (None, None) => cfg.xi = cfg.r / cfg.r0,
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The configuration in the file format, powers in watts.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    /// Single-line `key=value` summary for output headers.
    pub fn summary(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = vec![
            ("M", self.m.to_string()),
            ("N", self.n.to_string()),
            ("T_s", self.t_total.to_string()),
            ("t_s", self.t_s.to_string()),
            ("t_f_s", self.t_f_s.to_string()),
            ("S_d", self.s_d.to_string()),
            ("L", self.l.to_string()),
            ("R", self.r.to_string()),
            ("R0", self.r0.to_string()),
            ("xi", self.xi.to_string()),
            ("a", self.a.to_string()),
            ("b", self.b.to_string()),
        ];
        if let Some(b0) = self.b0 {
            e.push(("b0", b0.to_string()));
        }
        e.extend([
            ("sigma2", self.sigma2.to_string()),
            ("P_max", self.p_max.to_string()),
            ("perfect_csi", self.perfect_csi.to_string()),
            ("f_l", self.f_l.name().to_string()),
        ]);
        if let FlVariant::Arq { t } = self.f_l {
            e.push(("arq_T", t.to_string()));
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Si,
    MilliWatt,
    Dbm,
}

impl std::str::FromStr for SystemConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        SystemConfig::from_text(text)
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1e3
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemConfig> {
    SystemConfig::from_text(&std::fs::read_to_string(path)?)
}

pub fn save_config(cfg: &SystemConfig, path: impl AsRef<Path>) -> Result<()> {
    cfg.validate()?;
    std::fs::write(path, cfg.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = SystemConfig::from_text("").unwrap();
        assert_eq!(cfg, SystemConfig::default());
        assert_eq!(cfg.xi, 16.0);
        assert!(SystemConfig::from_text("# only a comment\n\n").is_ok());
    }

    #[test]
    fn short_training_is_rejected() {
        let err = SystemConfig::from_text("M = 4\nt_s = 2").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("t_s") && msg.contains("M = 4"), "{msg}");
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(matches!(SystemConfig::from_text("Mx = 3"), Err(Error::Parse { line: 1, .. })));
        assert!(SystemConfig::from_text("b = 1\nb_mW = 2").is_err());
        assert!(SystemConfig::from_text("L_mW = 2").is_err());
        assert!(SystemConfig::from_text("M 3").is_err());
    }

    #[test]
    fn power_units() {
        let cfg = SystemConfig::from_text("b_mW = 10\nsigma2_dBm = 0\nP_max_dBm = 30").unwrap();
        assert_eq!(cfg.b, 0.01);
        assert!((cfg.sigma2 - 1e-3).abs() < 1e-18);
        assert!((cfg.p_max - 1.0).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(-13.7)) + 13.7).abs() < 1e-12);
    }

    #[test]
    fn rate_consistency() {
        let cfg = SystemConfig::from_text("R = 1e6\nxi = 16").unwrap();
        assert_eq!(cfg.r0, 62500.0);
        let cfg = SystemConfig::from_text("R = 300\nR0 = 100").unwrap();
        assert_eq!(cfg.xi, 3.0);
        assert!(SystemConfig::from_text("R = 300\nR0 = 100\nxi = 2").is_err());
    }

    #[test]
    fn save_load_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.txt");
        let src = "M = 2\nN = 3\nt_s = 3\nT_s = 17\nb_mW = 0.3\nb0_mW = 1.7\nsigma2_mW = 0.7\nf_l = arq\narq_T = 2.5\nR = 1\nR0 = 3\n";
        let cfg = SystemConfig::from_text(src).unwrap();
        save_config(&cfg, &path).unwrap();
        let back = load_config(&path).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.b.to_bits(), (0.3f64 / 1e3).to_bits());
    }

    #[test]
    fn invariants_named_in_errors() {
        for (src, field) in [
            ("a = 0", "a"),
            ("b = -1", "b"),
            ("t_s = 55", "t_s"),
            ("t_f_s = 51", "t_f_s"),
            ("L = 0", "L"),
            ("sigma2 = 0", "sigma2"),
            ("f_l = other", "f_l"),
        ] {
            match SystemConfig::from_text(src) {
                Err(Error::InvalidConfig { field: f, .. }) => assert_eq!(f, field, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }
}
