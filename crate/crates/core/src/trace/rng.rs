//! Counter-based random substreams keyed by (seed, stream name, index).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// The generator for scene `index` of the named stream under `seed`.
///
/// Substreams for distinct indices are independent, so scenes can be drawn in
/// any order or on any number of threads.
pub fn substream(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stream.as_bytes());
    let key: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Maps `f` over `0..n` on `workers` threads, returning results in index order.
pub fn par_map<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Worker count from `PCV_WORKERS`, falling back to available parallelism.
pub fn default_workers() -> usize {
    std::env::var("PCV_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&n: &usize| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}
