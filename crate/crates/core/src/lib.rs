//! Link-level simulation of fully asynchronous unsourced random access over a
//! single-antenna quasi-static fading channel.
//!
//! Every active user sends a packet made of a pilot, picked from a common
//! codebook by the first `Bp` message bits, followed by a CRC-aided polar
//! codeword whose BPSK symbols are scattered over the data part by an on-off
//! (ODMA) pattern tied to the same pilot index. Users start whenever they
//! like. The receiver runs two nested sliding windows: the inner one detects
//! start times and pilots by correlation, estimates channels by LMMSE, decodes
//! each user with a list decoder while treating interference as noise, then
//! jointly re-estimates the decoded users' gains and cancels them. The outer
//! window revisits inner positions to exploit the reduced interference.
//!
//! ```
//! use async_ura::{config::SystemConfig, scheme::Scheme};
//!
//! let mut cfg = SystemConfig::desk_scale();
//! cfg.ka = 2.0;
//! cfg.t = 4 * cfg.n;
//! let scheme = Scheme::new(cfg).unwrap();
//! assert_eq!(scheme.pilots().num_pilots(), 16);
//! ```

pub mod channel;
pub mod codebooks;
pub mod config;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod polar;
pub mod receiver;
pub mod rng;
pub mod scheme;
pub mod txchain;

pub use error::{Error, Result};
pub use num_complex::Complex64;
