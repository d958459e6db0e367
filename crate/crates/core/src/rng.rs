use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for work item `index` under a master `seed`.
///
/// ChaCha keeps the seed as the key and the index as the stream id, so item
/// streams never overlap and can be produced in any order or in parallel.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
