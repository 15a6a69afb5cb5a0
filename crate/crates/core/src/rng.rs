//! Deterministic random substreams.
//!
//! Every random decision is drawn from a ChaCha stream keyed by the experiment
//! seed, a [`Stream`] tag and an index (iteration or trial number). Results are
//! therefore independent of evaluation order and of the number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a substream is used for. Distinct tags never share randomness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Classes,
    Stragglers,
    Shuffle,
    Dataset,
    Trial,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Classes => 0x636c_6173,
            Stream::Stragglers => 0x7374_7261,
            Stream::Shuffle => 0x7368_7566,
            Stream::Dataset => 0x6461_7461,
            Stream::Trial => 0x7472_6961,
        }
    }
}

/// Substream for `(seed, stream, index)`.
pub fn substream(seed: u64, stream: Stream, index: u64) -> SimRng {
    // splitmix64 of seed and tag so nearby seeds land on unrelated keys
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(stream.tag())));
    rng.set_stream(index);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
