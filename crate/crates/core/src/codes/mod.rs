//! Classical building blocks of oblivious transfer from weak string erasure.
//!
//! Bit strings are `Vec<bool>` throughout; the sizes involved are small
//! enough that clarity wins over packing.

pub mod encoding;
pub mod extract;
pub mod hashing;
pub mod linear;

pub use encoding::SubsetEncoding;
pub use extract::{extract, HashSeed};
pub use hashing::{interactive_hashing, IhAlice, IhBob};
pub use linear::{Decoded, LinearCode};

pub type Bits = Vec<bool>;

/// XOR of two equally long bit strings.
pub fn xor(a: &[bool], b: &[bool]) -> Bits {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Inner product over GF(2).
pub fn dot(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).fold(false, |acc, (x, y)| acc ^ (x & y))
}

/// Most significant bit first.
pub fn bits_to_u128(bits: &[bool]) -> u128 {
    bits.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128)
}

pub fn u128_to_bits(mut v: u128, len: usize) -> Bits {
    let mut out = vec![false; len];
    for slot in out.iter_mut().rev() {
        *slot = v & 1 == 1;
        v >>= 1;
    }
    out
}

/// Pack bits into bytes, most significant bit first, zero padded.
pub fn pack_bits(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i))))
        .collect()
}

pub fn unpack_bits(bytes: &[u8], len: usize) -> Bits {
    (0..len).map(|i| bytes.get(i / 8).is_some_and(|b| (b >> (7 - i % 8)) & 1 == 1)).collect()
}
