use crate::error::{Error, Result};
use crate::rng::StreamFactory;

/// Draws simple random samples without replacement, one keyed stream per
/// replicate.
///
/// The sampler runs a partial Fisher-Yates shuffle over a permutation
/// buffer and then undoes its swaps, so the buffer is the identity again
/// before the next replicate. The sample for replicate `r` therefore depends
/// only on `(seed, r)`, whichever sampler instance or thread draws it.
#[derive(Clone)]
pub struct Sampler {
    streams: StreamFactory,
    size: usize,
    n: usize,
    perm: Vec<u32>,
    swaps: Vec<u32>,
}

impl Sampler {
    pub fn new(size: usize, n: usize, seed: u64) -> Result<Self> {
        if n >= size {
            return Err(Error::domain(format!("sample size n={n} must be below N={size}")));
        }
        if size > u32::MAX as usize {
            return Err(Error::domain("population too large for the sampler"));
        }
        Ok(Self {
            streams: StreamFactory::new(seed),
            size,
            n,
            perm: (0..size as u32).collect(),
            swaps: Vec::with_capacity(n),
        })
    }

    /// Calls `visit` with the units of replicate `replicate`, in draw order.
    pub fn with_sample<T>(&mut self, replicate: u64, visit: impl FnOnce(&[u32]) -> T) -> T {
        let mut stream = self.streams.stream(replicate);
        self.swaps.clear();
        for i in 0..self.n {
            let j = i + stream.below((self.size - i) as u64) as usize;
            self.perm.swap(i, j);
            self.swaps.push(j as u32);
        }
        let out = visit(&self.perm[..self.n]);
        for (i, &j) in self.swaps.iter().enumerate().rev() {
            self.perm.swap(i, j as usize);
        }
        out
    }
}

/// The zero-based units of one replicate.
pub fn draw_sample(size: usize, n: usize, replicate: u64, seed: u64) -> Result<Vec<usize>> {
    let mut sampler = Sampler::new(size, n, seed)?;
    Ok(sampler.with_sample(replicate, |s| s.iter().map(|&k| k as usize).collect()))
}
