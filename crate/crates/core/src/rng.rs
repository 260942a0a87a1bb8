//! Counter-based random streams.
//!
//! Every stream is a SplitMix64 sequence keyed by a 64-bit value: the
//! `n`-th output (n = 1, 2, ...) is `mix64(key + n * 0x9E3779B97F4A7C15)`
//! with wrapping arithmetic, where `mix64` is the SplitMix64 finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! Keys for independent streams are derived with [`stream_key`], so any
//! `(seed, domain, index)` triple can be regenerated without replaying
//! other streams. Floats use the top 53 bits (`(x >> 11) * 2^-53`), and
//! normals come from Box–Muller using two consecutive uniforms. This is
//! everything another implementation needs to reproduce the streams.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of stream `index` inside `domain` under `seed`.
///
/// `key = mix64(mix64(seed ^ mix64(domain)) + index * GOLDEN)`.
pub fn stream_key(seed: u64, domain: u64, index: u64) -> u64 {
    mix64(mix64(seed ^ mix64(domain)).wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Domain tags used across the crate. Changing one changes every stream in it.
pub mod domain {
    pub const TRAIN_VIEWS: u64 = 0x7472_6169_6e00_0001;
    pub const TEST_VIEWS: u64 = 0x7465_7374_0000_0002;
    pub const INIT: u64 = 0x696e_6974_0000_0003;
    pub const SHUFFLE: u64 = 0x7368_7566_0000_0004;
    pub const RANSAC: u64 = 0x7261_6e73_0000_0005;
    pub const TRAJECTORY: u64 = 0x7472_616a_0000_0006;
    pub const SCENE: u64 = 0x7363_656e_0000_0007;
    pub const PRIOR: u64 = 0x7072_696f_0000_0008;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    pub fn new(key: u64) -> Self {
        StreamRng { key, counter: 0 }
    }

    pub fn derive(seed: u64, domain: u64, index: u64) -> Self {
        Self::new(stream_key(seed, domain, index))
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN)))
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, n). Uses the widening-multiply reduction.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal via Box–Muller (consumes two uniforms, returns one).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}
