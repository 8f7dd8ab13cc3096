//! Security parameters and protocol simulation for two-party cryptography in
//! the noisy-storage model.
//!
//! The crate has two halves. The analytic half evaluates every parameter a
//! practical implementation needs: photon-source and detector statistics
//! ([`sources`]), the adversary's storage channel ([`storage`]), and the
//! resulting min-entropy rate, security error and oblivious-transfer length
//! ([`security`]). The executable half ([`protocol`]) runs weak string
//! erasure with errors, its decoy-state variant, fully randomized oblivious
//! transfer and 1-2 oblivious transfer between two simulated parties over an
//! in-process transport, using the classical building blocks in [`codes`].
//!
//! ```
//! use nsm_core::sources::{characterize, DetectorModel, SourceModel};
//! use nsm_core::security::{lambda_rate, Regime, SecurityConfig};
//! use nsm_core::storage::DepolarizingStorage;
//!
//! let det = DetectorModel::new(0.7, 0.85e-6, 0.033).unwrap();
//! let ch = characterize(&SourceModel::wcp(0.3).unwrap(), &det).unwrap();
//! let storage = DepolarizingStorage::new(2, 0.2, 1.0).unwrap();
//! let cfg = SecurityConfig::new(0.01, 1_000_000, 1e-6, Regime::Asymptotic).unwrap();
//! let report = lambda_rate(&ch, &storage, &cfg, None).unwrap();
//! assert!(report.secure);
//! ```

pub mod codes;
pub mod error;
pub mod protocol;
pub mod scan;
pub mod security;
pub mod sources;
pub mod stats;
pub mod storage;

pub use error::{Error, Result};
