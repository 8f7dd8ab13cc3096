//! Fully randomized oblivious transfer from one weak string erasure run.

use super::transport::{decode_bits, decode_indices, encode_bits, encode_indices, Direction, MsgKind, Transport};
use super::{AbortReason, SessionRng, WseeOutputs};
use crate::codes::encoding::SubsetEncoding;
use crate::codes::extract::{extract, HashSeed};
use crate::codes::hashing::{IhAlice, IhBob};
use crate::codes::linear::LinearCode;
use crate::codes::Bits;
use crate::error::{Error, Result};
use crate::security::ot_length;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrotParams {
    /// Block length; every row of the `alpha x beta` matrix has this many bits.
    pub beta: usize,
    /// Output length of each string.
    pub ell: usize,
}

impl FrotParams {
    pub fn new(beta: usize, ell: usize) -> Result<Self> {
        if beta == 0 {
            return Err(Error::domain("block length beta must be positive"));
        }
        Ok(Self { beta, ell })
    }

    /// Parameters with `ell` taken from [`ot_length`]; fails when the
    /// resulting length is not positive.
    pub fn from_ot_length(lambda: f64, m: u64, beta: u64, omega: f64, p_err: f64, eps_wsee: f64) -> Result<Self> {
        let len = ot_length(lambda, m, beta, omega, p_err, eps_wsee)?;
        if !len.feasible {
            return Err(Error::constraint(format!("no positive output length (ell = {})", len.ell)));
        }
        Self::new(beta as usize, len.ell as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrotOutputs {
    pub s0: Bits,
    pub s1: Bits,
    pub c: bool,
    pub y: Bits,
    pub aborted: Option<AbortReason>,
}

impl FrotOutputs {
    fn aborted(reason: AbortReason) -> Self {
        Self { s0: Vec::new(), s1: Vec::new(), c: false, y: Vec::new(), aborted: Some(reason) }
    }

    /// Whether Bob's string equals the one Alice holds at his index.
    pub fn recovered(&self) -> bool {
        self.aborted.is_none() && self.y == if self.c { &self.s1 } else { &self.s0 }[..]
    }

    pub fn other(&self) -> &Bits {
        if self.c {
            &self.s0
        } else {
            &self.s1
        }
    }
}

/// Internal values of a run, exposed for tests and diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrotTrace {
    pub m_used: usize,
    pub alpha: usize,
    pub t: usize,
    /// Bob's truncated index set, sorted.
    pub i_trunc: Vec<usize>,
    pub w: Bits,
    pub enc_w: Vec<usize>,
    /// `perm[row * beta + col]` is the position of `x` placed there.
    pub perm: Vec<usize>,
    pub w0: Bits,
    pub w1: Bits,
    pub decode_failed: bool,
}

/// Checks that row `j` of the permuted matrix holds only positions of `i_set`
/// exactly when `j` lies in `enc`, and that `perm` is a permutation.
pub fn permutation_respects(perm: &[usize], beta: usize, i_set: &[usize], enc: &[usize]) -> bool {
    let m = perm.len();
    let mut in_i = vec![false; m];
    for &i in i_set {
        if i >= m {
            return false;
        }
        in_i[i] = true;
    }
    let mut seen = vec![false; m];
    for (dest, &src) in perm.iter().enumerate() {
        if src >= m || std::mem::replace(&mut seen[src], true) {
            return false;
        }
        if in_i[src] != enc.binary_search(&(dest / beta)).is_ok() {
            return false;
        }
    }
    true
}

fn rows_of(x: &[bool], perm: &[usize], beta: usize, rows: &[usize]) -> Bits {
    rows.iter().flat_map(|&j| perm[j * beta..(j + 1) * beta].iter().map(|&src| x[src])).collect()
}

fn union_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

/// Runs the protocol on the outputs of an honest weak string erasure.
///
/// `code` protects one block and must have length `beta`.
pub fn run_frot(
    wsee: &WseeOutputs,
    params: &FrotParams,
    code: &LinearCode,
    t: &mut Transport,
    rng: &mut SessionRng,
) -> Result<(FrotOutputs, FrotTrace)> {
    let beta = params.beta;
    let mut trace = FrotTrace::default();
    if let Some(reason) = &wsee.aborted {
        return Ok((FrotOutputs::aborted(reason.clone()), trace));
    }
    if code.n() != beta {
        return Err(Error::LengthMismatch { expected: beta, actual: code.n() });
    }
    let m = wsee.m() - wsee.m() % (4 * beta);
    if m == 0 {
        return Err(Error::constraint(format!("m = {} is shorter than 4 beta = {}", wsee.m(), 4 * beta)));
    }
    if m != wsee.m() {
        t.note(&format!("truncated m from {} to {m}", wsee.m()));
    }
    let alpha = m / beta;
    let enc = SubsetEncoding::with_bits(alpha, alpha / 2)?;
    trace.m_used = m;
    trace.alpha = alpha;
    trace.t = enc.t;
    let x = &wsee.alice_x[..m];

    // Step 1, Bob: keep a uniform m/4 subset of I.
    let mut pairs: Vec<(usize, bool)> =
        wsee.bob_i.iter().copied().zip(wsee.bob_z.iter().copied()).filter(|&(i, _)| i < m).collect();
    if pairs.len() < m / 4 {
        let reason = AbortReason::TooFewRounds { have: pairs.len(), need: m / 4 };
        t.send(Direction::BobToAlice, MsgKind::Abort, reason.to_string().into_bytes());
        return Ok((FrotOutputs::aborted(reason), trace));
    }
    pairs.shuffle(&mut rng.bob);
    pairs.truncate(m / 4);
    pairs.sort_unstable();
    let i_trunc: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let mut bob_value = vec![None; m];
    for &(i, z) in &pairs {
        bob_value[i] = Some(z);
    }

    // Step 2, Bob: pick w, build a permutation placing I into the rows Enc(w).
    let w: Bits = (0..enc.t).map(|_| rng.bob.gen()).collect();
    let enc_w = enc.encode(&w)?;
    let mut inside = i_trunc.clone();
    let mut outside: Vec<usize> = (0..m).filter(|i| bob_value[*i].is_none()).collect();
    inside.shuffle(&mut rng.bob);
    outside.shuffle(&mut rng.bob);
    let (mut a, mut b) = (inside.into_iter(), outside.into_iter());
    let mut perm = Vec::with_capacity(m);
    for j in 0..alpha {
        let source = if enc_w.binary_search(&j).is_ok() { &mut a } else { &mut b };
        perm.extend(source.by_ref().take(beta));
    }
    assert!(permutation_respects(&perm, beta, &i_trunc, &enc_w), "permutation breaks the row constraint");
    t.send(Direction::BobToAlice, MsgKind::Permutation, encode_indices(&perm));

    let alice_perm = decode_indices(&t.recv(Direction::BobToAlice, MsgKind::Permutation)?)?;
    let mut sorted = alice_perm.clone();
    sorted.sort_unstable();
    if sorted.len() != m || sorted.iter().enumerate().any(|(i, &v)| i != v) {
        return Err(Error::protocol("received map is not a permutation of [m]"));
    }

    // Step 3: interactive hashing on w.
    let mut ih_alice = IhAlice::new(enc.t)?;
    let ih_bob = IhBob::new(w.clone());
    while let Some(q) = ih_alice.next_query(&mut rng.alice) {
        t.send(Direction::AliceToBob, MsgKind::HashQuery, encode_bits(&q));
        let (q, _) = decode_bits(&t.recv(Direction::AliceToBob, MsgKind::HashQuery)?)?;
        t.send(Direction::BobToAlice, MsgKind::HashAnswer, vec![ih_bob.answer(&q)? as u8]);
        let ans = t.recv(Direction::BobToAlice, MsgKind::HashAnswer)?;
        match ans.as_slice() {
            [v @ (0 | 1)] => ih_alice.receive_answer(*v == 1)?,
            _ => return Err(Error::protocol("malformed hashing answer")),
        }
    }
    let (w0, w1) = ih_alice.solutions()?;
    let (enc0, enc1) = (enc.encode(&w0)?, enc.encode(&w1)?);

    // Step 4, Alice: syndromes of every row in Enc(w0) and Enc(w1).
    let rows = union_sorted(&enc0, &enc1);
    let mut syn = Vec::with_capacity(rows.len() * code.syndrome_len());
    for &j in &rows {
        syn.extend(code.syndrome(&rows_of(x, &alice_perm, beta, &[j]))?);
    }
    t.send(Direction::AliceToBob, MsgKind::Syndromes, encode_bits(&syn));

    // Steps 5 and 6, Alice: seeds and outputs.
    let k = enc.subset_size() * beta;
    let r0 = HashSeed::random(k, params.ell, &mut rng.alice)?;
    let r1 = HashSeed::random(k, params.ell, &mut rng.alice)?;
    let mut seeds = encode_bits(&r0.bits);
    seeds.extend(encode_bits(&r1.bits));
    t.send(Direction::AliceToBob, MsgKind::Seeds, seeds);
    let s0 = extract(&rows_of(x, &alice_perm, beta, &enc0), &r0)?;
    let s1 = extract(&rows_of(x, &alice_perm, beta, &enc1), &r1)?;

    // Step 7, Bob: find c, correct his rows, extract.
    let c = ih_bob.index_in(&w0, &w1)?;
    let (syn, _) = decode_bits(&t.recv(Direction::AliceToBob, MsgKind::Syndromes)?)?;
    if syn.len() != rows.len() * code.syndrome_len() {
        return Err(Error::LengthMismatch { expected: rows.len() * code.syndrome_len(), actual: syn.len() });
    }
    let seed_bytes = t.recv(Direction::AliceToBob, MsgKind::Seeds)?;
    let (b0, used) = decode_bits(&seed_bytes)?;
    let (b1, _) = decode_bits(&seed_bytes[used..])?;
    let rc = HashSeed::new(k, params.ell, if c { b1 } else { b0 })?;
    let mut corrected = Vec::with_capacity(k);
    let mut failed = false;
    for &j in &enc_w {
        let noisy: Bits = perm[j * beta..(j + 1) * beta]
            .iter()
            .map(|&src| bob_value[src].expect("rows of Enc(w) hold only positions of I"))
            .collect();
        let pos = rows.binary_search(&j).expect("Enc(w) is one of the two hashing outputs");
        let s = &syn[pos * code.syndrome_len()..(pos + 1) * code.syndrome_len()];
        let d = code.decode_with_syndrome(&noisy, s)?;
        failed |= d.failed;
        corrected.extend(d.bits);
    }
    let y = extract(&corrected, &rc)?;

    trace.i_trunc = i_trunc;
    trace.w = w;
    trace.enc_w = enc_w;
    trace.perm = perm;
    trace.w0 = w0;
    trace.w1 = w1;
    trace.decode_failed = failed;
    Ok((FrotOutputs { s0, s1, c, y, aborted: None }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Synthetic erasure output: uniform `x`, each index in `I` with
    /// probability 1/2, bits flipped with probability `p`.
    pub(crate) fn synthetic(m: usize, p: f64, rng: &mut SessionRng) -> WseeOutputs {
        let alice_x: Bits = (0..m).map(|_| rng.alice.gen()).collect();
        let bob_i: Vec<usize> = (0..m).filter(|_| rng.bob.gen()).collect();
        let bob_z = bob_i.iter().map(|&i| alice_x[i] ^ rng.channel.gen_bool(p)).collect();
        WseeOutputs { alice_x, bob_i, bob_z, aborted: None }
    }

    fn run(seed: u64, m: usize, p: f64, beta: usize, ell: usize, code: &LinearCode) -> (FrotOutputs, FrotTrace, Transport) {
        let mut rng = SessionRng::new(seed);
        let wsee = synthetic(m, p, &mut rng);
        let mut t = Transport::new();
        let (out, trace) = run_frot(&wsee, &FrotParams::new(beta, ell).unwrap(), code, &mut t, &mut rng).unwrap();
        (out, trace, t)
    }

    #[test]
    fn noiseless_run_recovers() {
        let code = LinearCode::trivial(16);
        for seed in 0..10 {
            let (out, trace, _) = run(seed, 256, 0.0, 16, 12, &code);
            assert!(out.recovered(), "seed {seed}");
            assert_eq!(out.y.len(), 12);
            assert_eq!(trace.alpha, 16);
            assert_eq!(trace.t, 8);
            assert_eq!(if out.c { &trace.w1 } else { &trace.w0 }, &trace.w);
            assert!(permutation_respects(&trace.perm, 16, &trace.i_trunc, &trace.enc_w));
            assert_eq!(trace.i_trunc.len(), 64);
        }
    }

    #[test]
    fn golay_blocks_correct_noise() {
        let code = LinearCode::golay23().repeat(4);
        let ok = (0..20).filter(|&s| run(s, 1472, 0.02, 92, 20, &code).0.recovered()).count();
        assert!(ok >= 18, "{ok}/20");
    }

    #[test]
    fn truncation_is_noted() {
        let code = LinearCode::trivial(16);
        let (out, trace, t) = run(1, 300, 0.0, 16, 8, &code);
        assert!(out.recovered());
        assert_eq!(trace.m_used, 256);
        assert!(t.transcript().iter().any(|r| r.kind == MsgKind::Note));
    }

    #[test]
    fn bob_aborts_with_too_few_positions() {
        let mut rng = SessionRng::new(0);
        let mut wsee = synthetic(256, 0.0, &mut rng);
        wsee.bob_i.truncate(10);
        wsee.bob_z.truncate(10);
        let mut t = Transport::new();
        let (out, _) =
            run_frot(&wsee, &FrotParams::new(16, 8).unwrap(), &LinearCode::trivial(16), &mut t, &mut rng).unwrap();
        assert_eq!(out.aborted, Some(AbortReason::TooFewRounds { have: 10, need: 64 }));
        assert_eq!(t.transcript().last().unwrap().direction, Direction::BobToAlice);
    }

    #[test]
    fn replay_is_identical() {
        let code = LinearCode::trivial(16);
        let (a, ta, ra) = run(5, 256, 0.0, 16, 8, &code);
        let (b, tb, rb) = run(5, 256, 0.0, 16, 8, &code);
        assert_eq!((a, ta), (b, tb));
        assert_eq!(ra.dump(), rb.dump());
    }

    #[test]
    fn permutation_check_rejects_violations() {
        let perm: Vec<usize> = (0..8).collect();
        assert!(permutation_respects(&perm, 4, &[0, 1, 2, 3], &[0]));
        assert!(!permutation_respects(&perm, 4, &[0, 1, 2, 4], &[0]));
        assert!(!permutation_respects(&[0, 0, 1, 2], 2, &[], &[]));
    }

    #[test]
    fn wrong_code_length_is_an_error() {
        let mut rng = SessionRng::new(0);
        let wsee = synthetic(256, 0.0, &mut rng);
        let r = run_frot(&wsee, &FrotParams::new(16, 8).unwrap(), &LinearCode::trivial(15), &mut Transport::new(), &mut rng);
        assert!(r.is_err());
    }
}
