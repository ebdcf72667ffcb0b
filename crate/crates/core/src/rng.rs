//! Explicitly seeded random streams.
//!
//! Every stochastic routine in this crate takes a `&mut R: Rng` argument; there
//! is no global generator. [`SeededRng`] is the concrete generator used by the
//! trainers and the command-line harness, and [`derive_seed`] splits a master
//! seed into independent per-component seeds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a child seed from `master` for the component named `label`.
///
/// The label is hashed with 64-bit FNV-1a, xored into the master seed and
/// passed through the SplitMix64 finalizer. Children with distinct labels are
/// unrelated streams, so e.g. adding evaluation checkpoints never shifts the
/// draws seen by the training stream.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in label.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ hash)
}

/// Same as [`derive_seed`] with a numeric index appended to the label.
pub fn derive_indexed_seed(master: u64, label: &str, index: u64) -> u64 {
    splitmix64(derive_seed(master, label).wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
