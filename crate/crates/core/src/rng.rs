//! Seedable, splittable random streams.
//!
//! Every stream is a ChaCha8 keystream selected by a 64-bit seed and a 64-bit
//! stream id. ChaCha streams with the same key and distinct ids are disjoint
//! blocks of the same counter-based generator, so sampling sites that run on
//! different workers can each own a stream and still replay bit-identically.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives a fresh child key from this stream. Children created from the
    /// key with different stream ids are independent of each other and of the
    /// parent's subsequent output.
    pub fn split_key(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Child stream `id` under a key previously obtained from [`split_key`].
    ///
    /// [`split_key`]: RngStream::split_key
    pub fn child(key: u64, id: u64) -> Self {
        Self::new(key, id)
    }

    /// Uniform draw on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        loop {
            // 53 random mantissa bits
            let u = (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            if u > 0.0 {
                return u;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
