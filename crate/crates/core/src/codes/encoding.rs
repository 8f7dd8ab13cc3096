//! Injective map from `t`-bit strings to subsets of `[alpha]` of size
//! `alpha / 4`, via the lexicographic rank of the subset.

use super::{bits_to_u128, u128_to_bits, Bits};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsetEncoding {
    pub alpha: usize,
    pub t: usize,
}

/// Binomial coefficient, or `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

impl SubsetEncoding {
    /// Largest `t` with `2^t <= C(alpha, alpha/4)`, which also gives
    /// `C(alpha, alpha/4) < 2 * 2^t`.
    pub fn new(alpha: usize) -> Result<Self> {
        let total = Self::check_alpha(alpha)?;
        let t = 127 - total.leading_zeros() as usize;
        Ok(Self { alpha, t })
    }

    /// Encoding with an explicit length; only injectivity, `2^t <= C`, is
    /// required.
    pub fn with_bits(alpha: usize, t: usize) -> Result<Self> {
        let total = Self::check_alpha(alpha)?;
        if t >= 127 || (1u128 << t) > total {
            return Err(Error::constraint(format!(
                "2^{t} strings do not fit into C({alpha}, {}) subsets",
                alpha / 4
            )));
        }
        Ok(Self { alpha, t })
    }

    fn check_alpha(alpha: usize) -> Result<u128> {
        if alpha == 0 || !alpha.is_multiple_of(4) {
            return Err(Error::constraint(format!("alpha = {alpha} must be a positive multiple of 4")));
        }
        binomial(alpha, alpha / 4)
            .filter(|&c| c < (1u128 << 126))
            .ok_or_else(|| Error::domain(format!("C({alpha}, {}) overflows", alpha / 4)))
    }

    pub fn subset_size(&self) -> usize {
        self.alpha / 4
    }

    /// Sorted subset of `0..alpha` whose lexicographic rank is `w`.
    pub fn encode(&self, w: &[bool]) -> Result<Vec<usize>> {
        if w.len() != self.t {
            return Err(Error::LengthMismatch { expected: self.t, actual: w.len() });
        }
        let mut rank = bits_to_u128(w);
        let mut k = self.subset_size();
        let mut out = Vec::with_capacity(k);
        let mut x = 0;
        while k > 0 {
            let with_x = binomial(self.alpha - x - 1, k - 1).expect("checked at construction");
            if rank < with_x {
                out.push(x);
                k -= 1;
            } else {
                rank -= with_x;
            }
            x += 1;
        }
        Ok(out)
    }

    /// Inverse of [`encode`](Self::encode). Fails for subsets whose rank is
    /// not below `2^t`.
    pub fn decode(&self, subset: &[usize]) -> Result<Bits> {
        let k = self.subset_size();
        if subset.len() != k || subset.windows(2).any(|p| p[0] >= p[1]) || subset.iter().any(|&x| x >= self.alpha) {
            return Err(Error::domain("not a sorted subset of the right size"));
        }
        let mut rank: u128 = 0;
        let mut prev = 0;
        for (i, &x) in subset.iter().enumerate() {
            for y in prev..x {
                rank += binomial(self.alpha - y - 1, k - i - 1).expect("checked at construction");
            }
            prev = x + 1;
        }
        if rank >> self.t != 0 {
            return Err(Error::domain("subset lies outside the image of the encoding"));
        }
        Ok(u128_to_bits(rank, self.t))
    }
}
