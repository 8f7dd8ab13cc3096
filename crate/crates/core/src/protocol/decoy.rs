//! Weak string erasure with a vacuum and a weak decoy intensity.

use super::channel::{sample_fock, sample_poisson};
use super::transport::{decode_bits, decode_indices, encode_bits, encode_indices, Direction, MsgKind, Transport};
use super::wsee::{abort, check_missing, finish, transmit, AliceRound, BobStrategy, RoundView, WseeOutputs};
use super::SessionRng;
use crate::error::{Error, Result};
use crate::sources::{characterize, honest_gain, DetectorModel, SourceModel};
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoySetting {
    Vacuum,
    Decoy,
    Signal,
}

impl DecoySetting {
    pub const ALL: [DecoySetting; 3] = [DecoySetting::Vacuum, DecoySetting::Decoy, DecoySetting::Signal];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DecoySetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoySetting::Vacuum => "vac",
            DecoySetting::Decoy => "mu_hat",
            DecoySetting::Signal => "mu",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyConfig {
    /// Total number of rounds over all settings.
    pub rounds: u64,
    pub mu_hat: f64,
    pub mu: f64,
    pub eps_interval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecoyWseeOutputs {
    /// Output restricted to surviving signal rounds.
    pub wsee: WseeOutputs,
    /// Rounds per setting, `[vac, mu_hat, mu]`.
    pub counts: [u64; 3],
    /// Measured gains `1 - missing_s / M_s`.
    pub gains_measured: [f64; 3],
    /// Honest gains the checks compare against.
    pub gains_expected: [f64; 3],
}

/// Runs the decoy variant with weak coherent pulses.
pub fn run_wsee_decoy(
    cfg: &DecoyConfig,
    det: &DetectorModel,
    bob: &mut dyn BobStrategy,
    t: &mut Transport,
    rng: &mut SessionRng,
) -> Result<DecoyWseeOutputs> {
    if cfg.rounds == 0 {
        return Err(Error::domain("decoy WSEE needs at least one round"));
    }
    if !(cfg.mu_hat > 0.0 && cfg.mu_hat < cfg.mu) {
        return Err(Error::domain(format!("need 0 < mu_hat = {} < mu = {}", cfg.mu_hat, cfg.mu)));
    }
    let intensity = [0.0, cfg.mu_hat, cfg.mu];
    let gains_expected = [
        det.p_dark_click(),
        honest_gain(&characterize(&SourceModel::wcp(cfg.mu_hat)?, det)?),
        honest_gain(&characterize(&SourceModel::wcp(cfg.mu)?, det)?),
    ];

    let n = cfg.rounds as usize;
    let mut settings = Vec::with_capacity(n);
    let mut alice = Vec::with_capacity(n);
    let mut bob_rounds = Vec::with_capacity(n);
    for _ in 0..n {
        let s = DecoySetting::ALL[rng.alice.gen_range(0..3)];
        let photons = sample_poisson(intensity[s.index()], &mut rng.channel);
        let sample = sample_fock(photons, det, &mut rng.channel);
        let a = AliceRound { bit: rng.alice.gen(), basis: rng.alice.gen() };
        bob_rounds.push(transmit(sample, a, rng));
        alice.push(a);
        settings.push(s);
    }

    let views: Vec<RoundView> = bob_rounds
        .iter()
        .zip(&settings)
        .map(|(b, &s)| RoundView { clicked: b.clicked, setting: Some(s) })
        .collect();
    let missing = bob.report_missing(&views);
    t.send(Direction::BobToAlice, MsgKind::MissingReport, encode_bits(&missing));

    let (reported, _) = decode_bits(&t.recv(Direction::BobToAlice, MsgKind::MissingReport)?)?;
    if reported.len() != n {
        return Err(Error::protocol("missing-round report has the wrong length"));
    }
    let mut counts = [0u64; 3];
    let mut missing_per = [0u64; 3];
    for (s, &m) in settings.iter().zip(&reported) {
        counts[s.index()] += 1;
        missing_per[s.index()] += m as u64;
    }
    let gains_measured: [f64; 3] = std::array::from_fn(|i| {
        if counts[i] == 0 {
            0.0
        } else {
            1.0 - missing_per[i] as f64 / counts[i] as f64
        }
    });
    for s in DecoySetting::ALL {
        let i = s.index();
        let expected_missing = 1.0 - gains_expected[i];
        if let Some(reason) = check_missing(missing_per[i], counts[i], expected_missing, cfg.eps_interval, Some(s))? {
            let wsee = abort(t, Direction::AliceToBob, reason);
            return Ok(DecoyWseeOutputs { wsee, counts, gains_measured, gains_expected });
        }
    }

    // Alice tells Bob which rounds survive: signal setting, not missing.
    let surviving: Vec<usize> = (0..n).filter(|&i| settings[i] == DecoySetting::Signal && !reported[i]).collect();
    t.send(Direction::AliceToBob, MsgKind::SurvivingRounds, encode_indices(&surviving));
    let alice_kept = surviving.iter().map(|&i| alice[i]).collect();

    let keep = decode_indices(&t.recv(Direction::AliceToBob, MsgKind::SurvivingRounds)?)?;
    if keep.iter().any(|&i| i >= n) {
        return Err(Error::protocol("surviving round index out of range"));
    }
    let bob_kept = keep.iter().map(|&i| bob_rounds[i]).collect();
    let wsee = finish(t, alice_kept, bob_kept)?;
    Ok(DecoyWseeOutputs { wsee, counts, gains_measured, gains_expected })
}
