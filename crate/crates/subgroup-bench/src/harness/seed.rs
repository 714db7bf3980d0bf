//! Deterministic seed derivation for the repetition protocol.
//!
//! Every repetition owns a seed mixed from `(base_seed, arr index, rep)`, and
//! every random-number consumer inside the repetition draws from its own
//! numbered stream of that seed. Results are therefore independent of worker
//! count, scheduling, method subsets, and whether a repetition was produced
//! by a fresh run or a resume.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Stream indices within one repetition. Method-specific streams add the
/// method's stable ordinal so that running a subset of methods never shifts
/// another method's randomness.
pub const STREAM_DISCOVERY: u64 = 0;
pub const STREAM_VALIDATION: u64 = 1;
pub const STREAM_FIT_BASE: u64 = 10;
pub const STREAM_HET_BASE: u64 = 100;

/// SplitMix64 finalizer: a bijective avalanche mix on 64 bits.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The seed owned by repetition `rep` of ARR grid point `arr_index`.
pub fn repetition_seed(base_seed: u64, arr_index: usize, rep: usize) -> u64 {
    let s = splitmix64(base_seed);
    let s = splitmix64(s ^ (arr_index as u64));
    splitmix64(s ^ (rep as u64))
}

/// A generator for one numbered stream of a repetition seed.
pub fn stream_rng(repetition_seed: u64, stream: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(splitmix64(repetition_seed ^ splitmix64(stream)))
}
