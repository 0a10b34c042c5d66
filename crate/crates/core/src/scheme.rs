//! Everything transmitter and receiver agree on in advance.

use crate::codebooks::{PatternMatrix, PilotCodebook};
use crate::config::SystemConfig;
use crate::error::Result;
use crate::polar::PolarCodec;
use crate::rng::derive_stream;

/// A validated configuration together with the common codebooks and the
/// polar code. Immutable; share it by reference across workers.
#[derive(Debug, Clone)]
pub struct Scheme {
    cfg: SystemConfig,
    pilots: PilotCodebook,
    patterns: PatternMatrix,
    codec: PolarCodec,
}

impl Scheme {
    /// Validates `cfg` and derives the codebooks from `(seed, "pilots")` and
    /// `(seed, "patterns")`.
    pub fn new(cfg: SystemConfig) -> Result<Scheme> {
        cfg.check()?;
        let pilots = PilotCodebook::generate(&cfg, &mut derive_stream(cfg.seed, "pilots", 0));
        let patterns =
            PatternMatrix::generate(&cfg, &mut derive_stream(cfg.seed, "patterns", 0))?;
        Self::with_codebooks(cfg, pilots, patterns)
    }

    /// Uses externally supplied codebooks (e.g. read from a sidecar file).
    pub fn with_codebooks(
        cfg: SystemConfig,
        pilots: PilotCodebook,
        patterns: PatternMatrix,
    ) -> Result<Scheme> {
        cfg.check()?;
        let codec = PolarCodec::new(cfg.nc, cfg.payload_len(), cfg.r, cfg.list_size)?;
        Ok(Scheme {
            cfg,
            pilots,
            patterns,
            codec,
        })
    }

    pub fn cfg(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn pilots(&self) -> &PilotCodebook {
        &self.pilots
    }

    pub fn patterns(&self) -> &PatternMatrix {
        &self.patterns
    }

    pub fn codec(&self) -> &PolarCodec {
        &self.codec
    }
}
