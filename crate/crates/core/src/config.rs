//! System parameters and their consistency rules.
//!
//! Field names in the TOML file match the symbols used throughout the guide
//! (`n`, `B`, `Bp`, `np`, `nc`, `r`, `Pp`, `Pd`, `Ka`, `Ns`, `Delta`, `T`, ...).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polar::CrcSpec;

/// How the number of arrivals over the horizon is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalProcess {
    /// Poisson count with mean `Ka * T / n`.
    #[default]
    Poisson,
    /// Exactly `round(Ka * T / n)` arrivals.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Packet length in channel symbols (pilot and data parts).
    pub n: usize,
    /// Message length in bits.
    #[serde(rename = "B")]
    pub b: usize,
    /// Pilot-selection bits.
    #[serde(rename = "Bp")]
    pub bp: usize,
    /// Codebook size; must equal `2^Bp`.
    #[serde(rename = "N")]
    pub num_pilots: usize,
    /// Pilot length in symbols.
    pub np: usize,
    /// Polar code length; also the number of active data symbols.
    pub nc: usize,
    /// CRC width in bits.
    pub r: usize,
    pub list_size: usize,
    /// Average pilot symbol power.
    #[serde(rename = "Pp")]
    pub pp: f64,
    /// Average data symbol power.
    #[serde(rename = "Pd")]
    pub pd: f64,
    /// Complex noise variance.
    pub sigma2: f64,
    /// Mean number of arrivals per packet duration.
    #[serde(rename = "Ka")]
    pub ka: f64,
    /// Detection margin: the receiver keeps `round(Ka) + u` candidates.
    pub u: usize,
    /// Outer window length in packets.
    #[serde(rename = "Ns")]
    pub ns: usize,
    /// Outer window shift in packets.
    #[serde(rename = "Delta")]
    pub delta: usize,
    pub n_max: usize,
    pub n_out: usize,
    /// Arrival horizon in symbols.
    #[serde(rename = "T")]
    pub t: usize,
    pub sync_mode: bool,
    #[serde(default)]
    pub arrivals: ArrivalProcess,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n: 10_000,
            b: 100,
            bp: 4,
            num_pilots: 16,
            np: 3000,
            nc: 512,
            r: 16,
            list_size: 32,
            pp: 1.0,
            pd: 10.0,
            sigma2: 1.0,
            ka: 50.0,
            u: 10,
            ns: 5,
            delta: 1,
            n_max: 50,
            n_out: 10,
            t: 200_000,
            sync_mode: false,
            arrivals: ArrivalProcess::Poisson,
            seed: 0,
        }
    }
}

impl SystemConfig {
    /// Scaled-down configuration used by the end-to-end tests:
    /// `n = 1000`, `np = 300`, `B = 60`, `nc = 128`, list size 16, `T = 10 n`.
    pub fn desk_scale() -> Self {
        SystemConfig {
            n: 1000,
            b: 60,
            np: 300,
            nc: 128,
            list_size: 16,
            ka: 5.0,
            t: 10_000,
            ..SystemConfig::default()
        }
    }

    /// Reads a flat TOML file. Missing fields fall back to [`Default`].
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::Format {
            what: "config",
            detail: e.to_string(),
        })?;
        let mut base = toml::Table::try_from(SystemConfig::default()).map_err(|e| {
            Error::Format {
                what: "config",
                detail: e.to_string(),
            }
        })?;
        let sets_bp = table.contains_key("Bp");
        let sets_n = table.contains_key("N");
        base.extend(table);
        let mut cfg: SystemConfig = base.try_into().map_err(|e: toml::de::Error| Error::Format {
            what: "config",
            detail: e.to_string(),
        })?;
        if sets_bp && !sets_n {
            cfg.num_pilots = 1usize.checked_shl(cfg.bp as u32).unwrap_or(0);
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Sets `Bp` and keeps `N = 2^Bp` in step.
    pub fn with_pilot_bits(mut self, bp: usize) -> Self {
        self.bp = bp;
        self.num_pilots = 1usize.checked_shl(bp as u32).unwrap_or(0);
        self
    }

    /// Active data symbols per packet (`nd = nc` for BPSK).
    pub fn nd(&self) -> usize {
        self.nc
    }

    /// Polar code dimension `k = B - Bp + r`.
    pub fn info_len(&self) -> usize {
        (self.b + self.r).saturating_sub(self.bp)
    }

    /// Payload bits carried by the polar code, `B - Bp`.
    pub fn payload_len(&self) -> usize {
        self.b.saturating_sub(self.bp)
    }

    /// Number of detection candidates per inner iteration, `round(Ka) + u`.
    pub fn detections_per_window(&self) -> usize {
        self.ka.round().max(0.0) as usize + self.u
    }

    /// Horizon length in packets.
    pub fn horizon_packets(&self) -> usize {
        self.t / self.n.max(1)
    }

    /// Length of the received buffer, `T + 2n`.
    pub fn buffer_len(&self) -> usize {
        self.t + 2 * self.n
    }

    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let mut need = |ok: bool, field: &'static str, msg: String| {
            if !ok {
                v.push(Violation { field, message: msg });
            }
        };
        for (field, value) in [
            ("n", self.n),
            ("B", self.b),
            ("Bp", self.bp),
            ("np", self.np),
            ("nc", self.nc),
            ("r", self.r),
            ("list_size", self.list_size),
            ("Delta", self.delta),
            ("n_max", self.n_max),
            ("n_out", self.n_out),
            ("T", self.t),
        ] {
            need(value > 0, field, format!("must be positive, got {value}"));
        }
        need(self.ns >= 2, "Ns", format!("must be at least 2, got {}", self.ns));
        need(
            self.nc.is_power_of_two() && self.nc <= 1024,
            "nc",
            format!("must be a power of two no larger than 1024, got {}", self.nc),
        );
        need(
            self.np + self.nd() <= self.n,
            "np",
            format!(
                "np + nd = {} exceeds the packet length n = {}",
                self.np + self.nd(),
                self.n
            ),
        );
        need(
            self.bp < self.b,
            "Bp",
            format!("must be smaller than B = {}, got {}", self.b, self.bp),
        );
        need(
            self.info_len() <= self.nc,
            "nc",
            format!(
                "B - Bp + r = {} does not fit in a length-{} polar code",
                self.info_len(),
                self.nc
            ),
        );
        need(
            self.bp <= 20 && Some(self.num_pilots) == 1usize.checked_shl(self.bp as u32),
            "N",
            format!("must equal 2^Bp (Bp = {}), got {}", self.bp, self.num_pilots),
        );
        need(
            CrcSpec::for_width(self.r).is_ok(),
            "r",
            format!("no CRC polynomial of width {}", self.r),
        );
        need(
            self.pp.is_finite() && self.pp >= 0.0,
            "Pp",
            format!("must be a nonnegative real, got {}", self.pp),
        );
        need(
            self.pd.is_finite() && self.pd >= 0.0,
            "Pd",
            format!("must be a nonnegative real, got {}", self.pd),
        );
        need(
            self.sigma2.is_finite() && self.sigma2 > 0.0,
            "sigma2",
            format!("must be a positive real, got {}", self.sigma2),
        );
        need(
            self.ka.is_finite() && self.ka > 0.0,
            "Ka",
            format!("must be a positive real, got {}", self.ka),
        );
        need(
            self.n > 0 && self.t.is_multiple_of(self.n),
            "T",
            format!("must be a multiple of n = {}, got {}", self.n, self.t),
        );
        ValidationReport { violations: v }
    }

    /// Like [`validate`](Self::validate) but turns violations into an error.
    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::Config(report.to_string()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}
