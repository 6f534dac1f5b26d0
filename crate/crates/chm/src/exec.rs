//! Execution modes: data-parallel reductions with a sequential fallback.
//!
//! Monte Carlo estimators and exhaustive counters in this crate reduce over
//! an index range `0..n`. With the `parallel` feature enabled (the default)
//! the range is split into fixed-size chunks summed on the rayon pool; the
//! per-chunk partials are then folded in chunk order. Chunk boundaries
//! depend only on `n`, so results are bit-identical across thread counts
//! and identical to the sequential mode.
//!
//! Randomized work draws one RNG stream per sample index from a single
//! seed, so sharding never changes the sampled values either.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How to run a reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Rayon-backed; falls back to sequential when the `parallel` feature
    /// is disabled.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Items per chunk in chunked reductions. Fixed so that the reduction tree
/// does not depend on the worker count.
const CHUNK: usize = 1 << 12;

fn chunk_bounds(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.div_ceil(CHUNK)).map(move |c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
}

macro_rules! chunked_sum_impl {
    ($name:ident, $t:ty, $zero:expr) => {
        /// Sums `f(i)` for `i in 0..n`, deterministically across modes.
        pub fn $name<F>(exec: Exec, n: usize, f: F) -> $t
        where
            F: Fn(usize) -> $t + Sync,
        {
            let seq = |lo: usize, hi: usize| -> $t {
                let mut acc: $t = $zero;
                for i in lo..hi {
                    acc += f(i);
                }
                acc
            };
            // Both modes fold the same per-chunk partials in chunk order,
            // so the summation tree (and hence every bit of the result) is
            // independent of both the mode and the worker count.
            let partials: Vec<$t> = match exec {
                Exec::Sequential => chunk_bounds(n).map(|(lo, hi)| seq(lo, hi)).collect(),
                Exec::Parallel => {
                    #[cfg(feature = "parallel")]
                    {
                        use rayon::prelude::*;
                        chunk_bounds(n)
                            .collect::<Vec<_>>()
                            .into_par_iter()
                            .map(|(lo, hi)| seq(lo, hi))
                            .collect()
                    }
                    #[cfg(not(feature = "parallel"))]
                    {
                        chunk_bounds(n).map(|(lo, hi)| seq(lo, hi)).collect()
                    }
                }
            };
            let mut acc: $t = $zero;
            for p in partials {
                acc += p;
            }
            acc
        }
    };
}

chunked_sum_impl!(sum_f64, f64, 0.0);
chunked_sum_impl!(sum_c64, Complex64, Complex64::new(0.0, 0.0));
chunked_sum_impl!(sum_u64, u64, 0u64);

/// Maps `f` over `0..n`, preserving index order.
pub fn map_collect<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        Exec::Sequential => (0..n).map(f).collect(),
        Exec::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..n).map(f).collect()
            }
        }
    }
}

/// RNG for sample `stream` of the run seeded by `seed`. Distinct streams
/// are independent ChaCha streams of the same key, so any subset of samples
/// can be drawn in any order.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
