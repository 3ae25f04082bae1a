// SPDX-License-Identifier: Apache-2.0

//! Seeded generator for secret matrices.
//!
//! Byte-level behavior, so fixtures can be regenerated elsewhere:
//!
//! * The generator is ChaCha20 (RFC 7539 block function, 20 rounds) with a
//!   32-byte key equal to the seed as 8 little-endian bytes followed by 24
//!   zero bytes, nonce zero, block counter starting at zero.
//! * Words are consumed as little-endian `u64`s from the keystream in order.
//! * A value uniform in `[0, q)` is drawn by rejection: take the next word
//!   `x`; if `x >= 2^64 - (2^64 mod q)` discard and retry, otherwise return
//!   `x mod q`.
//!
//! A 64-bit seed is far too small for real deployments. This generator exists
//! for reproducible experiments only.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

pub struct SecretRng {
    inner: ChaCha20Rng,
}

impl SecretRng {
    pub fn from_seed_u64(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        SecretRng {
            inner: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_word(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        // largest multiple of `bound` representable as 2^64 - (2^64 mod bound)
        let rem = (u64::MAX % bound + 1) % bound;
        let zone = 0u64.wrapping_sub(rem);
        loop {
            let x = self.next_word();
            if rem == 0 || x < zone {
                return x % bound;
            }
        }
    }
}
