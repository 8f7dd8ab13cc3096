//! Binary linear codes used for one-way error correction by syndromes.
//!
//! A [`LinearCode`] is a direct sum of small components, each at most 64 bits
//! long with a precomputed coset-leader table. Decoding is exact up to the
//! smallest component radius and best effort beyond it.

use super::Bits;
use crate::error::{Error, Result};
use crate::stats::binary_entropy;
use std::collections::HashMap;

/// Generator polynomial of the binary Golay code.
const GOLAY_GENERATOR: u64 = 0xC75;

/// Upper limit on coset-leader patterns enumerated beyond the radius.
const BEST_EFFORT_PATTERNS: u64 = 200_000;

#[derive(Debug, Clone, PartialEq)]
struct Component {
    n: usize,
    /// Parity-check rows as bit masks over the component's positions.
    rows: Vec<u64>,
    radius: usize,
    leaders: HashMap<u64, u64>,
}

impl Component {
    fn new(n: usize, rows: Vec<u64>, radius: usize) -> Self {
        assert!(n <= 64 && rows.len() <= 64);
        let mut c = Self { n, rows, radius, leaders: HashMap::new() };
        let full = 1u64.checked_shl(c.rows.len() as u32).map_or(u64::MAX, |v| v - 1);
        for w in 0..=n {
            if c.leaders.len() as u64 > full {
                break;
            }
            let beyond = w > radius;
            if beyond && super::encoding::binomial(n, w).is_none_or(|b| b > BEST_EFFORT_PATTERNS as u128) {
                break;
            }
            for_each_weight(n, w, &mut |e| {
                let s = c.syndrome_of(e);
                let prev = c.leaders.insert(s, e);
                if let Some(p) = prev {
                    // Keep the lighter pattern; within the radius syndromes are
                    // unique by construction.
                    debug_assert!(beyond || p == e, "radius {radius} is not guaranteed");
                    c.leaders.insert(s, p);
                }
            });
        }
        c
    }

    fn syndrome_of(&self, x: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &row)| acc | (((row & x).count_ones() as u64 & 1) << i))
    }
}

/// Calls `f` with every `n`-bit mask of weight `w`.
fn for_each_weight(n: usize, w: usize, f: &mut dyn FnMut(u64)) {
    fn rec(start: usize, n: usize, left: usize, acc: u64, f: &mut dyn FnMut(u64)) {
        if left == 0 {
            f(acc);
            return;
        }
        for p in start..=n - left {
            rec(p + 1, n, left - 1, acc | 1 << p, f);
        }
    }
    if w <= n {
        rec(0, n, w, 0, f);
    }
}

/// Result of syndrome decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub bits: Bits,
    /// Set when some component saw a syndrome without a known coset leader.
    pub failed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCode {
    components: Vec<Component>,
    name: String,
}

impl LinearCode {
    fn single(name: String, c: Component) -> Self {
        Self { components: vec![c], name }
    }

    /// Hamming code of length `2^r - 1`, correcting one error.
    pub fn hamming(r: usize) -> Result<Self> {
        if !(2..=6).contains(&r) {
            return Err(Error::domain(format!("Hamming order r = {r} outside 2..=6")));
        }
        let n = (1 << r) - 1;
        Ok(Self::single(format!("hamming({n})"), hamming_component(r, n)))
    }

    /// Hamming code restricted to its first `n` columns.
    pub fn shortened_hamming(r: usize, n: usize) -> Result<Self> {
        if r == 0 || r > 6 || n == 0 || n >= 1 << r {
            return Err(Error::domain(format!("cannot shorten Hamming order {r} to length {n}")));
        }
        Ok(Self::single(format!("shortened_hamming({r},{n})"), hamming_component(r, n)))
    }

    /// Hamming code with an overall parity bit, length `2^r`.
    pub fn extended_hamming(r: usize) -> Result<Self> {
        if !(2..=6).contains(&r) {
            return Err(Error::domain(format!("Hamming order r = {r} outside 2..=6")));
        }
        let n = 1usize << r;
        let mut rows = hamming_component(r, n - 1).rows;
        rows.push(u64::MAX >> (64 - n));
        Ok(Self::single(format!("extended_hamming({n})"), Component::new(n, rows, 1)))
    }

    /// The perfect (23, 12) Golay code, correcting three errors.
    pub fn golay23() -> Self {
        let n = 23;
        let mut rows = vec![0u64; 11];
        for p in 0..n {
            let rem = poly_mod(1 << p, GOLAY_GENERATOR);
            for (i, row) in rows.iter_mut().enumerate() {
                if rem >> i & 1 == 1 {
                    *row |= 1 << p;
                }
            }
        }
        Self::single("golay(23)".into(), Component::new(n, rows, 3))
    }

    /// Code with no redundancy: the syndrome is empty and nothing is
    /// corrected.
    pub fn trivial(n: usize) -> Self {
        let components = chunk_lengths(n).map(|len| Component::new(len, Vec::new(), 0)).collect();
        Self { components, name: format!("trivial({n})") }
    }

    pub fn direct_sum(codes: &[LinearCode]) -> Self {
        let components = codes.iter().flat_map(|c| c.components.iter().cloned()).collect();
        let name = codes.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join("+");
        Self { components, name }
    }

    pub fn repeat(&self, copies: usize) -> Self {
        let components = (0..copies).flat_map(|_| self.components.iter().cloned()).collect();
        Self { components, name: format!("{}x{copies}", self.name) }
    }

    /// Copies of `component` covering `block_len` bits; any remainder is
    /// protected by a shortened Hamming code.
    pub fn tiled(component: &LinearCode, block_len: usize) -> Result<Self> {
        let n = component.n();
        if n == 0 {
            return Err(Error::domain("cannot tile an empty code"));
        }
        let mut parts = vec![component.repeat(block_len / n)];
        let left = block_len % n;
        if left > 0 {
            let r = (usize::BITS - left.leading_zeros()) as usize;
            parts.push(LinearCode::shortened_hamming(r, left)?);
        }
        Ok(Self::direct_sum(&parts))
    }

    /// Default code for block length `block_len` at error rate `p_err`:
    /// tiled Hamming codes of the smallest order whose syndrome rate stays
    /// within `1.2 h(p_err)`, or the trivial code when `p_err = 0`.
    pub fn for_error_rate(p_err: f64, block_len: usize) -> Result<Self> {
        let budget = 1.2 * binary_entropy(p_err)?;
        if budget == 0.0 {
            return Ok(Self::trivial(block_len));
        }
        let r = (2..=6).find(|&r| r as f64 / ((1 << r) - 1) as f64 <= budget).unwrap_or(6);
        Self::tiled(&Self::hamming(r)?, block_len)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.components.iter().map(|c| c.n).sum()
    }

    pub fn syndrome_len(&self) -> usize {
        self.components.iter().map(|c| c.rows.len()).sum()
    }

    /// Number of errors corrected in every component.
    pub fn decode_radius(&self) -> usize {
        self.components.iter().map(|c| c.radius).min().unwrap_or(0)
    }

    /// Syndrome bits per code bit.
    pub fn rate(&self) -> f64 {
        self.syndrome_len() as f64 / self.n().max(1) as f64
    }

    /// Full parity-check matrix, one row per syndrome bit.
    pub fn parity_rows(&self) -> Vec<Bits> {
        let n = self.n();
        let mut out = Vec::with_capacity(self.syndrome_len());
        let mut offset = 0;
        for c in &self.components {
            for &row in &c.rows {
                let mut full = vec![false; n];
                for p in 0..c.n {
                    full[offset + p] = row >> p & 1 == 1;
                }
                out.push(full);
            }
            offset += c.n;
        }
        out
    }

    fn check_len(&self, x: &[bool]) -> Result<()> {
        if x.len() == self.n() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.n(), actual: x.len() })
        }
    }

    fn blocks<'a>(&'a self, x: &'a [bool]) -> impl Iterator<Item = (&'a Component, u64)> + 'a {
        let mut offset = 0;
        self.components.iter().map(move |c| {
            let mask = x[offset..offset + c.n]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
            offset += c.n;
            (c, mask)
        })
    }

    pub fn syndrome(&self, x: &[bool]) -> Result<Bits> {
        self.check_len(x)?;
        let mut out = Vec::with_capacity(self.syndrome_len());
        for (c, mask) in self.blocks(x) {
            let s = c.syndrome_of(mask);
            out.extend((0..c.rows.len()).map(|i| s >> i & 1 == 1));
        }
        Ok(out)
    }

    /// Recover `x` from a noisy copy `y` and the syndrome `s` of `x`.
    pub fn decode_with_syndrome(&self, y: &[bool], s: &[bool]) -> Result<Decoded> {
        self.check_len(y)?;
        if s.len() != self.syndrome_len() {
            return Err(Error::LengthMismatch { expected: self.syndrome_len(), actual: s.len() });
        }
        let mut bits = Vec::with_capacity(y.len());
        let mut failed = false;
        let mut s_off = 0;
        for (c, mask) in self.blocks(y) {
            let k = c.rows.len();
            let target = s[s_off..s_off + k]
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i);
            s_off += k;
            let diff = c.syndrome_of(mask) ^ target;
            let fixed = match c.leaders.get(&diff) {
                Some(e) => mask ^ e,
                None => {
                    failed = true;
                    mask
                }
            };
            bits.extend((0..c.n).map(|i| fixed >> i & 1 == 1));
        }
        Ok(Decoded { bits, failed })
    }
}

fn hamming_component(r: usize, n: usize) -> Component {
    let rows = (0..r)
        .map(|i| (0..n).filter(|p| (p + 1) >> i & 1 == 1).fold(0u64, |acc, p| acc | 1 << p))
        .collect();
    Component::new(n, rows, 1)
}

fn chunk_lengths(n: usize) -> impl Iterator<Item = usize> {
    (0..n.div_ceil(64)).map(move |i| (n - 64 * i).min(64))
}

/// Remainder of `a` modulo `g` as GF(2) polynomials.
fn poly_mod(mut a: u64, g: u64) -> u64 {
    let dg = 63 - g.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dg {
        a ^= g << (63 - a.leading_zeros() - dg);
    }
    a
}
