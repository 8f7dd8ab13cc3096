//! Two-party protocol engines over an in-process transport.
//!
//! Each run is a single-threaded, deterministic schedule of Alice's and
//! Bob's steps. The parties share nothing but the [`Transport`]; quantum
//! transmission is replaced by the Monte Carlo sampler in [`channel`], and
//! the waiting time is a marker in the transcript.

pub mod channel;
pub mod decoy;
pub mod frot;
pub mod ot;
pub mod transport;
pub mod wsee;

pub use channel::{sample_round, ChannelSample};
pub use decoy::{run_wsee_decoy, DecoyConfig, DecoySetting, DecoyWseeOutputs};
pub use frot::{run_frot, FrotOutputs, FrotParams, FrotTrace};
pub use ot::ot_from_frot;
pub use transport::{Direction, MsgKind, Record, Transport};
pub use wsee::{run_wsee, BobStrategy, HonestBob, ReportCount, RoundView, WseeConfig, WseeOutputs};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;

/// Independent random streams for Alice, Bob and the simulated channel,
/// all derived from one seed.
#[derive(Debug, Clone)]
pub struct SessionRng {
    pub alice: ChaCha8Rng,
    pub bob: ChaCha8Rng,
    pub channel: ChaCha8Rng,
}

impl SessionRng {
    pub fn new(seed: u64) -> Self {
        let stream = |n| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(n);
            r
        };
        Self { alice: stream(1), bob: stream(2), channel: stream(3) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

/// Why a run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum AbortReason {
    /// The number of rounds reported missing left the accepted interval.
    MissingOutOfInterval {
        setting: Option<DecoySetting>,
        observed: u64,
        rounds: u64,
        expected: f64,
        zeta: f64,
    },
    /// Bob holds fewer than `m/4` positions.
    TooFewRounds { have: usize, need: usize },
}

impl AbortReason {
    pub fn party(&self) -> Party {
        match self {
            AbortReason::MissingOutOfInterval { .. } => Party::Alice,
            AbortReason::TooFewRounds { .. } => Party::Bob,
        }
    }
}

impl fmt::Display for AbortReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbortReason::MissingOutOfInterval { setting, observed, rounds, expected, zeta } => {
                let which = setting.map(|s| format!(" for setting {s}")).unwrap_or_default();
                write!(
                    f,
                    "{observed} of {rounds} rounds reported missing{which}, outside [{:.6}, {:.6}] x {rounds}",
                    expected - zeta,
                    expected + zeta
                )
            }
            AbortReason::TooFewRounds { have, need } => {
                write!(f, "Bob holds {have} positions but needs {need}")
            }
        }
    }
}
