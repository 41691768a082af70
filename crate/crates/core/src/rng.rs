//! Counter-style random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, domain)` with the
//! 64-bit ChaCha stream id set to an element or path index. Streams for
//! different indices never overlap, so work can be split in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags keeping streams of different consumers apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    CanonicalRates = 1,
    PppCount = 2,
    PppRates = 3,
    PppOrdered = 4,
    Paths = 5,
    Survival = 6,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit key derived from a seed and a domain tag.
pub fn key(seed: u64, domain: Domain) -> [u8; 32] {
    let mut state = seed ^ (domain as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Independent generator for element `index` of `(seed, domain)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, domain));
    rng.set_stream(index);
    rng
}

/// Uniform variate on (0, 1].
#[inline]
pub fn open_unit<R: rand::Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
