use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Work is split into fixed-size chunks, each drawing from its own ChaCha
/// stream, so results do not depend on how rayon schedules the chunks.
pub(crate) const CHUNK: usize = 4096;

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(chunk index, start, len)` for `count` items.
pub(crate) fn chunks(count: usize) -> Vec<(u64, usize, usize)> {
    (0..count.div_ceil(CHUNK))
        .map(|i| {
            let start = i * CHUNK;
            (i as u64, start, CHUNK.min(count - start))
        })
        .collect()
}

/// Independent child seed for a labelled sub-task (splitmix64 finalizer).
pub(crate) fn derive(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
