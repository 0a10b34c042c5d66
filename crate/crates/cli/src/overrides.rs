//! Configuration file plus one override flag per configuration field.

use std::path::PathBuf;

use anyhow::{bail, Result};
use async_ura::config::{ArrivalProcess, SystemConfig};
use clap::{Args, ValueEnum};

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum ArrivalArg {
    Poisson,
    Fixed,
}

#[derive(Args, Default)]
pub struct ConfigArgs {
    /// TOML configuration; missing fields take the defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start from the scaled-down configuration instead of the full-size one.
    #[arg(long)]
    pub desk: bool,

    #[arg(long = "n", help_heading = "Configuration fields")]
    pub n: Option<usize>,
    #[arg(long = "B", help_heading = "Configuration fields")]
    pub b: Option<usize>,
    #[arg(long = "Bp", help_heading = "Configuration fields")]
    pub bp: Option<usize>,
    #[arg(long = "N", help_heading = "Configuration fields")]
    pub num_pilots: Option<usize>,
    #[arg(long = "np", help_heading = "Configuration fields")]
    pub np: Option<usize>,
    #[arg(long = "nc", help_heading = "Configuration fields")]
    pub nc: Option<usize>,
    #[arg(long = "r", help_heading = "Configuration fields")]
    pub r: Option<usize>,
    #[arg(long = "list_size", help_heading = "Configuration fields")]
    pub list_size: Option<usize>,
    #[arg(long = "Pp", help_heading = "Configuration fields")]
    pub pp: Option<f64>,
    #[arg(long = "Pd", help_heading = "Configuration fields")]
    pub pd: Option<f64>,
    #[arg(long = "sigma2", help_heading = "Configuration fields")]
    pub sigma2: Option<f64>,
    #[arg(long = "Ka", help_heading = "Configuration fields")]
    pub ka: Option<f64>,
    #[arg(long = "u", help_heading = "Configuration fields")]
    pub u: Option<usize>,
    #[arg(long = "Ns", help_heading = "Configuration fields")]
    pub ns: Option<usize>,
    #[arg(long = "Delta", help_heading = "Configuration fields")]
    pub delta: Option<usize>,
    #[arg(long = "n_max", help_heading = "Configuration fields")]
    pub n_max: Option<usize>,
    #[arg(long = "n_out", help_heading = "Configuration fields")]
    pub n_out: Option<usize>,
    #[arg(long = "T", help_heading = "Configuration fields")]
    pub t: Option<usize>,
    #[arg(long = "sync_mode", help_heading = "Configuration fields")]
    pub sync_mode: Option<bool>,
    #[arg(long = "arrivals", value_enum, help_heading = "Configuration fields")]
    pub arrivals: Option<ArrivalArg>,
    #[arg(long = "seed", help_heading = "Configuration fields")]
    pub seed: Option<u64>,
}

macro_rules! apply {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if let Some(v) = $args.$field { $cfg.$field = v; })*
    };
}

impl ConfigArgs {
    /// Base configuration, then the file, then the flags; validated.
    pub fn resolve(&self) -> Result<SystemConfig> {
        let mut cfg = match (&self.config, self.desk) {
            (Some(_), true) => bail!("--config and --desk are mutually exclusive"),
            (Some(path), false) => SystemConfig::from_toml_file(path)?,
            (None, true) => SystemConfig::desk_scale(),
            (None, false) => SystemConfig::default(),
        };
        if let Some(bp) = self.bp {
            cfg = cfg.with_pilot_bits(bp);
        }
        let args = self;
        apply!(
            cfg, args, n, b, num_pilots, np, nc, r, list_size, pp, pd, sigma2, ka, u, ns, delta,
            n_max, n_out, t, sync_mode, seed
        );
        if let Some(a) = self.arrivals {
            cfg.arrivals = match a {
                ArrivalArg::Poisson => ArrivalProcess::Poisson,
                ArrivalArg::Fixed => ArrivalProcess::Fixed,
            };
        }
        let report = cfg.validate();
        if !report.is_ok() {
            bail!("{report}");
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_defaults() {
        let args = ConfigArgs {
            desk: true,
            ka: Some(3.0),
            bp: Some(5),
            ..ConfigArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.ka, cfg.bp, cfg.num_pilots, cfg.n), (3.0, 5, 32, 1000));
    }

    #[test]
    fn invalid_override_is_reported() {
        let args = ConfigArgs {
            desk: true,
            np: Some(990),
            ..ConfigArgs::default()
        };
        let err = args.resolve().unwrap_err().to_string();
        assert!(err.contains("np"), "{err}");
    }
}
