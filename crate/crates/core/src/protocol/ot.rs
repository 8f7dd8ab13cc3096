//! One-out-of-two oblivious transfer from a fully randomized instance.
//!
//! Bob announces whether his choice differs from the index he received,
//! and Alice masks both messages with the correspondingly swapped strings.

use super::transport::{decode_bits, encode_bits, Direction, MsgKind, Transport};
use super::FrotOutputs;
use crate::codes::{xor, Bits};
use crate::error::{Error, Result};

/// Delivers `m_choice` to Bob; returns what Bob outputs.
pub fn ot_from_frot(frot: &FrotOutputs, m0: &[bool], m1: &[bool], choice: bool, t: &mut Transport) -> Result<Bits> {
    if let Some(reason) = &frot.aborted {
        return Err(Error::protocol(format!("cannot derandomize an aborted run: {reason}")));
    }
    let ell = frot.s0.len();
    for len in [m0.len(), m1.len(), frot.s1.len(), frot.y.len()] {
        if len != ell {
            return Err(Error::LengthMismatch { expected: ell, actual: len });
        }
    }

    t.send(Direction::BobToAlice, MsgKind::ChoiceFlip, vec![(choice ^ frot.c) as u8]);

    let delta = match t.recv(Direction::BobToAlice, MsgKind::ChoiceFlip)?.as_slice() {
        [v @ (0 | 1)] => *v == 1,
        _ => return Err(Error::protocol("malformed choice flip")),
    };
    let s = |i: bool| if i ^ delta { &frot.s1 } else { &frot.s0 };
    let mut payload = encode_bits(&xor(m0, s(false)));
    payload.extend(encode_bits(&xor(m1, s(true))));
    t.send(Direction::AliceToBob, MsgKind::MaskedMessages, payload);

    let bytes = t.recv(Direction::AliceToBob, MsgKind::MaskedMessages)?;
    let (e0, used) = decode_bits(&bytes)?;
    let (e1, _) = decode_bits(&bytes[used..])?;
    Ok(xor(if choice { &e1 } else { &e0 }, &frot.y))
}
