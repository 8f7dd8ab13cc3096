//! Weak string erasure with errors.

use super::channel::sample_round;
use super::transport::{decode_bits, encode_bits, Direction, MsgKind, Transport};
use super::{AbortReason, DecoySetting, SessionRng};
use crate::codes::Bits;
use crate::error::{Error, Result};
use crate::sources::{characterize, DetectorModel, SourceModel};
use crate::stats::{chernoff_halfwidth, interval_contains};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WseeConfig {
    /// Number of valid rounds `M`.
    pub rounds: u64,
    pub eps_interval: f64,
}

/// What Bob's device shows him for one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundView {
    pub clicked: bool,
    /// Source setting of the round. Honest Bob never sees this; scripted
    /// adversaries in tests may use it.
    pub setting: Option<DecoySetting>,
}

/// Bob's choice of which rounds to report as missing.
pub trait BobStrategy {
    fn report_missing(&mut self, rounds: &[RoundView]) -> Vec<bool>;
}

/// Reports exactly the rounds without a click.
#[derive(Debug, Clone, Copy, Default)]
pub struct HonestBob;

impl BobStrategy for HonestBob {
    fn report_missing(&mut self, rounds: &[RoundView]) -> Vec<bool> {
        rounds.iter().map(|r| !r.clicked).collect()
    }
}

/// Scripted adversary reporting a fixed number of rounds as missing, the
/// no-click rounds first.
#[derive(Debug, Clone, Copy)]
pub struct ReportCount(pub usize);

impl BobStrategy for ReportCount {
    fn report_missing(&mut self, rounds: &[RoundView]) -> Vec<bool> {
        let mut out: Vec<bool> = rounds.iter().map(|r| !r.clicked).collect();
        let mut have = out.iter().filter(|&&b| b).count();
        for (slot, r) in out.iter_mut().zip(rounds) {
            if have == self.0 {
                break;
            }
            match (have < self.0, *slot, r.clicked) {
                (true, false, true) => {
                    *slot = true;
                    have += 1;
                }
                (false, true, false) => {
                    *slot = false;
                    have -= 1;
                }
                _ => {}
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WseeOutputs {
    pub alice_x: Bits,
    pub bob_i: Vec<usize>,
    pub bob_z: Bits,
    pub aborted: Option<AbortReason>,
}

impl WseeOutputs {
    pub fn aborted(reason: AbortReason) -> Self {
        Self { alice_x: Vec::new(), bob_i: Vec::new(), bob_z: Vec::new(), aborted: Some(reason) }
    }

    pub fn m(&self) -> usize {
        self.alice_x.len()
    }

    /// Positions of `I` where Bob's bit differs from Alice's.
    pub fn bit_errors(&self) -> usize {
        self.bob_i.iter().zip(&self.bob_z).filter(|(&i, &z)| self.alice_x[i] != z).count()
    }
}

/// Bob's private record of one round.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BobRound {
    pub basis: bool,
    pub clicked: bool,
    pub bit: bool,
}

/// Alice's private record of one round.
#[derive(Debug, Clone, Copy)]
pub(crate) struct AliceRound {
    pub bit: bool,
    pub basis: bool,
}

/// Transmission of one round: Alice's choice, the channel, Bob's
/// measurement. The channel sample is relative to Alice encoding 0, so
/// Bob's raw outcome is her bit XOR the sampled flip.
pub(crate) fn transmit(
    sample: super::ChannelSample,
    alice: AliceRound,
    rng: &mut SessionRng,
) -> BobRound {
    let basis = rng.bob.gen();
    let bit = if !sample.bob_click {
        false
    } else if basis == alice.basis {
        alice.bit ^ sample.bob_bit
    } else {
        rng.channel.gen()
    };
    BobRound { basis, clicked: sample.bob_click, bit }
}

/// Alice's interval check on a missing-round count.
pub(crate) fn check_missing(
    observed: u64,
    rounds: u64,
    expected: f64,
    eps: f64,
    setting: Option<DecoySetting>,
) -> Result<Option<AbortReason>> {
    if rounds == 0 {
        return Ok(None);
    }
    let zeta = chernoff_halfwidth(rounds, eps)?;
    Ok((!interval_contains(observed, expected, zeta, rounds)).then_some(AbortReason::MissingOutOfInterval {
        setting,
        observed,
        rounds,
        expected,
        zeta,
    }))
}

/// Sends the abort to the other party and returns the aborted output.
pub(crate) fn abort(t: &mut Transport, dir: Direction, reason: AbortReason) -> WseeOutputs {
    t.send(dir, MsgKind::Abort, reason.to_string().into_bytes());
    WseeOutputs::aborted(reason)
}

/// Steps after Alice's check: wait, reveal bases, Bob keeps matching rounds.
pub(crate) fn finish(
    t: &mut Transport,
    alice_kept: Vec<AliceRound>,
    bob_kept: Vec<BobRound>,
) -> Result<WseeOutputs> {
    t.wait("delta-t");
    let bases: Bits = alice_kept.iter().map(|r| r.basis).collect();
    t.send(Direction::AliceToBob, MsgKind::Bases, encode_bits(&bases));
    let alice_x = alice_kept.iter().map(|r| r.bit).collect();

    let (theta, _) = decode_bits(&t.recv(Direction::AliceToBob, MsgKind::Bases)?)?;
    if theta.len() != bob_kept.len() {
        return Err(Error::protocol("basis string does not match the kept rounds"));
    }
    let (bob_i, bob_z) = bob_kept
        .iter()
        .zip(&theta)
        .enumerate()
        .filter(|(_, (b, &th))| b.basis == th)
        .map(|(i, (b, _))| (i, b.bit))
        .unzip();
    Ok(WseeOutputs { alice_x, bob_i, bob_z, aborted: None })
}

pub fn run_wsee(
    cfg: &WseeConfig,
    src: &SourceModel,
    det: &DetectorModel,
    bob: &mut dyn BobStrategy,
    t: &mut Transport,
    rng: &mut SessionRng,
) -> Result<WseeOutputs> {
    if cfg.rounds == 0 {
        return Err(Error::domain("WSEE needs at least one round"));
    }
    let ch = characterize(src, det)?;
    let mut alice = Vec::with_capacity(cfg.rounds as usize);
    let mut bob_rounds = Vec::with_capacity(cfg.rounds as usize);
    // Only rounds Alice counts as valid enter the protocol.
    while (alice.len() as u64) < cfg.rounds {
        let sample = sample_round(src, det, &mut rng.channel);
        if !sample.alice_valid {
            continue;
        }
        let a = AliceRound { bit: rng.alice.gen(), basis: rng.alice.gen() };
        bob_rounds.push(transmit(sample, a, rng));
        alice.push(a);
    }

    let views: Vec<RoundView> = bob_rounds.iter().map(|b| RoundView { clicked: b.clicked, setting: None }).collect();
    let missing = bob.report_missing(&views);
    t.send(Direction::BobToAlice, MsgKind::MissingReport, encode_bits(&missing));

    let (reported, _) = decode_bits(&t.recv(Direction::BobToAlice, MsgKind::MissingReport)?)?;
    if reported.len() != alice.len() {
        return Err(Error::protocol("missing-round report has the wrong length"));
    }
    let observed = reported.iter().filter(|&&b| b).count() as u64;
    if let Some(reason) = check_missing(observed, cfg.rounds, ch.p_h_B_no_click, cfg.eps_interval, None)? {
        return Ok(abort(t, Direction::AliceToBob, reason));
    }
    let alice_kept = alice.iter().zip(&reported).filter(|(_, &m)| !m).map(|(a, _)| *a).collect();
    let bob_kept = bob_rounds.iter().zip(&missing).filter(|(_, &m)| !m).map(|(b, _)| *b).collect();
    finish(t, alice_kept, bob_kept)
}
