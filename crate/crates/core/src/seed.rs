use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stage tag mixed into the master seed for inpainting.
pub const INPAINT_TAG: &str = "inpaint";

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent per-stage seed from the master seed.
pub fn derive_seed(master: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, then a splitmix finalizer over the pair
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(master ^ splitmix(h))
}

/// Counter-based stream: the generator for `(seed, stream, index)` does not
/// depend on how many other streams were consumed before it.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // 256 words per index is far more than any per-pixel consumer draws
    rng.set_word_pos((index as u128) << 8);
    rng
}
