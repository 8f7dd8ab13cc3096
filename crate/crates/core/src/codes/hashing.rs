//! Interactive hashing by random parity queries.
//!
//! Alice asks `t - 1` linearly independent parities of Bob's `t`-bit string.
//! The answers pin the string down to an affine line with exactly two
//! points; Alice learns both, but not which one Bob holds.

use super::{dot, Bits};
use crate::error::{Error, Result};
use rand::Rng;

/// Alice's side: issues queries and solves for the two candidates.
#[derive(Debug, Clone, Default)]
pub struct IhAlice {
    t: usize,
    queries: Vec<Bits>,
    answers: Vec<bool>,
    /// Reduced rows `(pivot, row, rhs)` kept for the independence test.
    echelon: Vec<(usize, Bits)>,
}

impl IhAlice {
    pub fn new(t: usize) -> Result<Self> {
        if t < 2 {
            return Err(Error::domain(format!("interactive hashing needs t >= 2, got {t}")));
        }
        Ok(Self { t, ..Default::default() })
    }

    pub fn rounds(&self) -> usize {
        self.t - 1
    }

    pub fn done(&self) -> bool {
        self.answers.len() == self.t - 1
    }

    /// Draws a uniformly random query independent of the earlier ones.
    pub fn next_query<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Bits> {
        if self.queries.len() >= self.t - 1 {
            return None;
        }
        loop {
            let q: Bits = (0..self.t).map(|_| rng.gen()).collect();
            if let Some(reduced) = self.reduce(&q) {
                let pivot = reduced.iter().position(|&b| b).expect("non-zero after reduction");
                self.echelon.push((pivot, reduced));
                self.queries.push(q.clone());
                return Some(q);
            }
        }
    }

    /// Reduces `q` against the echelon rows; `None` if it is dependent.
    fn reduce(&self, q: &[bool]) -> Option<Bits> {
        let mut v = q.to_vec();
        for (pivot, row) in &self.echelon {
            if v[*pivot] {
                for (a, b) in v.iter_mut().zip(row) {
                    *a ^= b;
                }
            }
        }
        v.iter().any(|&b| b).then_some(v)
    }

    pub fn receive_answer(&mut self, bit: bool) -> Result<()> {
        if self.answers.len() >= self.queries.len() {
            return Err(Error::protocol("interactive hashing answer without a pending query"));
        }
        self.answers.push(bit);
        Ok(())
    }

    pub fn queries(&self) -> &[Bits] {
        &self.queries
    }

    /// The two solutions, lexicographically ordered.
    pub fn solutions(&self) -> Result<(Bits, Bits)> {
        if !self.done() {
            return Err(Error::protocol("interactive hashing is not finished"));
        }
        solve_two(self.t, &self.queries, &self.answers)
    }
}

/// Solve `Q w = b` over GF(2) for a full-rank `(t-1) x t` system.
pub fn solve_two(t: usize, queries: &[Bits], answers: &[bool]) -> Result<(Bits, Bits)> {
    if queries.len() != answers.len() || queries.iter().any(|q| q.len() != t) {
        return Err(Error::protocol("malformed parity system"));
    }
    let mut rows: Vec<(Bits, bool)> = queries.iter().cloned().zip(answers.iter().copied()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..t {
        let Some(p) = (r..rows.len()).find(|&i| rows[i].0[col]) else { continue };
        rows.swap(r, p);
        let (prow, prhs) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row.0[col] {
                for (a, b) in row.0.iter_mut().zip(&prow) {
                    *a ^= b;
                }
                row.1 ^= prhs;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if r != t - 1 {
        return Err(Error::protocol(format!("parity system has rank {r}, expected {}", t - 1)));
    }
    let free = (0..t).find(|c| !pivots.contains(c)).expect("one free column");
    let solve = |fv: bool| -> Bits {
        let mut w = vec![false; t];
        w[free] = fv;
        for (row, &col) in rows.iter().zip(&pivots) {
            w[col] = row.1 ^ (fv & row.0[free]);
        }
        w
    };
    let (a, b) = (solve(false), solve(true));
    Ok(if a < b { (a, b) } else { (b, a) })
}

/// Bob's side: answers parity queries about his string.
#[derive(Debug, Clone)]
pub struct IhBob {
    input: Bits,
}

impl IhBob {
    pub fn new(input: Bits) -> Self {
        Self { input }
    }

    pub fn answer(&self, query: &[bool]) -> Result<bool> {
        if query.len() != self.input.len() {
            return Err(Error::LengthMismatch { expected: self.input.len(), actual: query.len() });
        }
        Ok(dot(query, &self.input))
    }

    /// Index `c` with `w_c` equal to Bob's input.
    pub fn index_in(&self, w0: &[bool], w1: &[bool]) -> Result<bool> {
        if self.input == w0 {
            Ok(false)
        } else if self.input == w1 {
            Ok(true)
        } else {
            Err(Error::protocol("Bob's string is not among the hashing outputs"))
        }
    }
}

/// One exchanged message: a query or its answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IhMessage {
    Query(Bits),
    Answer(bool),
}

/// Runs both sides locally, reporting every message to `sink`.
pub fn interactive_hashing<R: Rng + ?Sized>(
    bob_input: &[bool],
    alice_rng: &mut R,
    sink: &mut dyn FnMut(IhMessage),
) -> Result<(Bits, Bits)> {
    let mut alice = IhAlice::new(bob_input.len())?;
    let bob = IhBob::new(bob_input.to_vec());
    while let Some(q) = alice.next_query(alice_rng) {
        sink(IhMessage::Query(q.clone()));
        let a = bob.answer(&q)?;
        sink(IhMessage::Answer(a));
        alice.receive_answer(a)?;
    }
    alice.solutions()
}
