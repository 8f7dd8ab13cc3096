//! Monte Carlo model of one transmission round.
//!
//! Photon numbers follow the source statistics, each photon reaches a
//! detector with probability `eta`, misalignment swaps the whole signal onto
//! the wrong detector with probability `e_det`, each detector fires on its
//! own with probability `p_dark`, and double clicks are settled by a fair
//! coin. This is the same process the closed forms in
//! [`crate::sources`] describe.

use crate::sources::{DetectorModel, SourceKind, SourceModel};
use rand::Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChannelSample {
    pub n_emitted: u64,
    /// Alice accepts the round; always true except for PDC post-selection.
    pub alice_valid: bool,
    pub bob_click: bool,
    /// Bob's outcome when Alice encoded 0 in his basis; meaningful only if
    /// `bob_click`.
    pub bob_bit: bool,
    pub error_flag: bool,
}

pub fn sample_round<R: Rng + ?Sized>(src: &SourceModel, det: &DetectorModel, rng: &mut R) -> ChannelSample {
    match src.kind {
        SourceKind::Wcp { mu } => sample_fock(sample_poisson(mu, rng), det, rng),
        SourceKind::IdealSinglePhoton => sample_fock(1, det, rng),
        SourceKind::Pdc { mu } => sample_pdc(mu, det, rng),
    }
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    Poisson::new(mu).expect("positive mean").sample(rng) as u64
}

/// Bob's side for a signal of `n` photons all in the correct mode.
pub(crate) fn sample_fock<R: Rng + ?Sized>(n: u64, det: &DetectorModel, rng: &mut R) -> ChannelSample {
    bob_detect(n, 0, det, rng, n)
}

fn detected<R: Rng + ?Sized>(n: u64, eta: f64, rng: &mut R) -> bool {
    n > 0 && eta > 0.0 && Binomial::new(n, eta).expect("valid binomial").sample(rng) > 0
}

fn bob_detect<R: Rng + ?Sized>(right: u64, wrong: u64, det: &DetectorModel, rng: &mut R, n: u64) -> ChannelSample {
    let mut hit_right = detected(right, det.eta, rng);
    let mut hit_wrong = detected(wrong, det.eta, rng);
    if rng.gen_bool(det.e_det) {
        std::mem::swap(&mut hit_right, &mut hit_wrong);
    }
    let click0 = hit_right | rng.gen_bool(det.p_dark);
    let click1 = hit_wrong | rng.gen_bool(det.p_dark);
    let bob_bit = match (click0, click1) {
        (true, true) => rng.gen(),
        (_, c1) => c1,
    };
    let bob_click = click0 || click1;
    ChannelSample { n_emitted: n, alice_valid: true, bob_click, bob_bit, error_flag: bob_click && bob_bit }
}

fn sample_pdc<R: Rng + ?Sized>(mu: f64, det: &DetectorModel, rng: &mut R) -> ChannelSample {
    // Pair number: failures before the second success at rate 1 - x.
    let x = (mu / 2.0) / (1.0 + mu / 2.0);
    let geo = Geometric::new(1.0 - x).expect("valid geometric");
    let n = geo.sample(rng) + geo.sample(rng);
    // The split between Alice's two modes is uniform.
    let m = rng.gen_range(0..=n);
    let a1 = detected(n - m, det.eta, rng) | rng.gen_bool(det.p_dark);
    let a2 = detected(m, det.eta, rng) | rng.gen_bool(det.p_dark);
    if a1 == a2 {
        return ChannelSample { n_emitted: n, alice_valid: false, bob_click: false, bob_bit: false, error_flag: false };
    }
    // Bob's correct mode mirrors the one Alice saw click.
    let (right, wrong) = if a1 { (n - m, m) } else { (m, n - m) };
    bob_detect(right, wrong, det, rng, n)
}
