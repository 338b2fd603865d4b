use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha stream `stream` under `seed`. Sample `i` of a
/// parallel loop draws from stream `i + 1`, so results do not depend on
/// how work is split across threads.
pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn indexed(seed: u64, index: usize) -> ChaCha8Rng {
    stream(seed, index as u64 + 1)
}
