//! Privacy amplification with random binary Toeplitz matrices.

use super::Bits;
use crate::error::{Error, Result};
use rand::Rng;

/// Member of the Toeplitz family mapping `k` bits to `ell` bits, described
/// by its first column and row (`k + ell - 1` bits).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSeed {
    pub k: usize,
    pub ell: usize,
    pub bits: Bits,
}

impl HashSeed {
    pub fn new(k: usize, ell: usize, bits: Bits) -> Result<Self> {
        if ell > k {
            return Err(Error::domain(format!("output length {ell} exceeds input length {k}")));
        }
        let need = (k + ell).saturating_sub(1);
        if bits.len() != need {
            return Err(Error::LengthMismatch { expected: need, actual: bits.len() });
        }
        Ok(Self { k, ell, bits })
    }

    pub fn random<R: Rng + ?Sized>(k: usize, ell: usize, rng: &mut R) -> Result<Self> {
        let bits = (0..(k + ell).saturating_sub(1)).map(|_| rng.gen()).collect();
        Self::new(k, ell, bits)
    }

    /// Entry `(i, j)` of the matrix; constant along diagonals.
    fn entry(&self, i: usize, j: usize) -> bool {
        self.bits[i + self.k - 1 - j]
    }
}

/// `T x` over GF(2) for the Toeplitz matrix `T` given by `seed`.
pub fn extract(x: &[bool], seed: &HashSeed) -> Result<Bits> {
    if x.len() != seed.k {
        return Err(Error::LengthMismatch { expected: seed.k, actual: x.len() });
    }
    Ok((0..seed.ell)
        .map(|i| x.iter().enumerate().fold(false, |acc, (j, &b)| acc ^ (b & seed.entry(i, j))))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::u128_to_bits;
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_maps_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let seed = HashSeed::random(16, 5, &mut rng).unwrap();
        assert_eq!(extract(&[false; 16], &seed).unwrap(), vec![false; 5]);
    }

    #[test]
    fn exhaustive_two_universality() {
        let (k, ell) = (4, 2);
        let seeds: Vec<HashSeed> =
            (0..1u128 << 5).map(|v| HashSeed::new(k, ell, u128_to_bits(v, 5)).unwrap()).collect();
        for a in 0..16 {
            for b in a + 1..16 {
                let (x, y) = (u128_to_bits(a, k), u128_to_bits(b, k));
                let hits = seeds
                    .iter()
                    .filter(|s| extract(&x, s).unwrap() == extract(&y, s).unwrap())
                    .count();
                assert!(hits as f64 / seeds.len() as f64 <= 0.25);
            }
        }
    }

    #[test]
    fn deterministic_and_toeplitz() {
        let seed = HashSeed::new(3, 2, vec![true, false, true, true]).unwrap();
        let x = vec![true, true, false];
        assert_eq!(extract(&x, &seed).unwrap(), extract(&x, &seed).unwrap());
        for i in 1..2 {
            for j in 1..3 {
                assert_eq!(seed.entry(i, j), seed.entry(i - 1, j - 1));
            }
        }
    }

    #[test]
    fn validation() {
        assert!(HashSeed::new(2, 3, vec![false; 4]).is_err());
        assert!(HashSeed::new(4, 2, vec![false; 4]).is_err());
        let seed = HashSeed::new(4, 2, vec![false; 5]).unwrap();
        assert!(extract(&[true; 3], &seed).is_err());
    }
}
