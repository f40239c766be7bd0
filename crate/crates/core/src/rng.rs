//! Deterministic random streams.
//!
//! Every stochastic object draws from its own ChaCha stream whose key is
//! derived from `(master seed, purpose tag, index path)`. Two objects with
//! different tags or paths never share a stream, and the mapping does not
//! depend on evaluation order, so parallel trials reproduce serial ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Purpose tags used throughout the crate.
pub mod tag {
    pub const SIGNALS: &str = "signals";
    pub const SUPPORT: &str = "support";
    pub const PHASES: &str = "phases";
    pub const NOISE: &str = "noise";
    pub const TRIAL: &str = "trial";
    pub const POWER: &str = "power-iteration";
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Derive a 64-bit child seed from a master seed, a purpose tag and an index path.
pub fn derive_seed(master: u64, tag: &str, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(fnv1a(tag.as_bytes())));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

/// A ChaCha generator keyed by [`derive_seed`].
pub fn stream(master: u64, tag: &str, path: &[u64]) -> ChaCha12Rng {
    let root = derive_seed(master, tag, path);
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        chunk.copy_from_slice(&splitmix64(root.wrapping_add(i as u64)).to_le_bytes());
    }
    ChaCha12Rng::from_seed(key)
}
