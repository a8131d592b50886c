// SPDX-License-Identifier: Apache-2.0

//! Seeded generator whose full state fits in a short word sequence.
//!
//! Backed by ChaCha8. The captured state is the 256-bit key, the stream id and
//! the 128-bit word position: seven `u64` words in total.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const STATE_WORDS: usize = 7;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("rng state must have {STATE_WORDS} words, got {0}")]
pub struct BadRngState(pub usize);

#[derive(Clone, Debug)]
pub struct TrainRng {
    inner: ChaCha8Rng,
}

impl TrainRng {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Generator for an independent sub-stream of `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn state_words(&self) -> Vec<u64> {
        let seed = self.inner.get_seed();
        let mut words: Vec<u64> = seed
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        words.push(self.inner.get_stream());
        let pos = self.inner.get_word_pos();
        words.push(pos as u64);
        words.push((pos >> 64) as u64);
        words
    }

    pub fn from_state_words(words: &[u64]) -> Result<Self, BadRngState> {
        if words.len() != STATE_WORDS {
            return Err(BadRngState(words.len()));
        }
        let mut seed = [0u8; 32];
        for (chunk, w) in seed.chunks_exact_mut(8).zip(&words[..4]) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut inner = ChaCha8Rng::from_seed(seed);
        inner.set_stream(words[4]);
        inner.set_word_pos(u128::from(words[5]) | (u128::from(words[6]) << 64));
        Ok(Self { inner })
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform draw on `[-bound, bound]`.
    pub fn symmetric_uniform(&mut self, bound: f64) -> f64 {
        self.inner.random_range(-bound..=bound)
    }

    pub fn inner_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

impl PartialEq for TrainRng {
    fn eq(&self, other: &Self) -> bool {
        self.state_words() == other.state_words()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_capture_continues_stream() {
        let mut a = TrainRng::seed_from_u64(99);
        for _ in 0..13 {
            a.next_u64();
        }
        let words = a.state_words();
        assert_eq!(words.len(), STATE_WORDS);
        let mut b = TrainRng::from_state_words(&words).unwrap();
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = TrainRng::with_stream(5, 0);
        let mut b = TrainRng::with_stream(5, 1);
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn wrong_length_rejected() {
        assert_eq!(TrainRng::from_state_words(&[1, 2, 3]).unwrap_err(), BadRngState(3));
    }
}
