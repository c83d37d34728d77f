//! Reproducible simulation of L-statistics under simple random sampling
//! without replacement.
//!
//! Replicate `r` is drawn from the keyed stream `(seed, r)`, so a run can be
//! split across any number of workers and still produce the same
//! realizations in the same order.

mod ecdf;
mod sampling;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

pub use ecdf::{write_quantile_csv, EmpiricalCdf};
pub use sampling::{draw_sample, Sampler};

use crate::error::{Error, Result};
use crate::population::Population;
use crate::rng::GENERATOR_VERSION;
use crate::sum::NeumaierSum;
use crate::weights::WeightScheme;

/// `L_n = (1/n) Σ c_j X_{j:n}` for a sample in any order.
pub fn l_statistic(sample: &[f64], weights: &WeightScheme) -> Result<f64> {
    if sample.len() != weights.n() {
        return Err(Error::domain(format!(
            "sample has {} values but the weights expect n={}",
            sample.len(),
            weights.n()
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(l_statistic_sorted(&sorted, weights.weights()))
}

fn l_statistic_sorted(sorted: &[f64], c: &[f64]) -> f64 {
    let acc: NeumaierSum = sorted.iter().zip(c).map(|(x, w)| x * w).collect();
    acc.value() / c.len() as f64
}

/// Realizations of `L_n` for replicates `0..replicates`, in replicate order.
pub fn simulate_statistic(
    pop: &Population,
    weights: &WeightScheme,
    replicates: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = weights.n();
    let sampler = Sampler::new(pop.len(), n, seed)?;
    let values = pop.values();
    let c = weights.weights();
    Ok((0..replicates)
        .into_par_iter()
        .map_init(
            || (sampler.clone(), Vec::with_capacity(n)),
            |(sampler, buf), r| {
                sampler.with_sample(r, |units| {
                    buf.clear();
                    buf.extend(units.iter().map(|&k| values[k as usize]));
                });
                buf.sort_by(f64::total_cmp);
                l_statistic_sorted(buf, c)
            },
        )
        .collect())
}

/// What to simulate and how to normalize it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationPlan {
    pub replicates: u64,
    pub seed: u64,
    pub mean_l: f64,
    pub sigma_tilde: f64,
}

/// Empirical distribution of `S_n / σ̃_n = √n (L_n - E L_n) / σ̃_n`.
pub fn simulate_cdf(pop: &Population, weights: &WeightScheme, plan: &SimulationPlan) -> Result<EmpiricalCdf> {
    if plan.replicates == 0 {
        return Err(Error::domain("a simulation needs at least one replicate"));
    }
    if !(plan.sigma_tilde > 0.0 && plan.sigma_tilde.is_finite()) {
        return Err(Error::Degenerate(format!(
            "normalizing standard deviation must be positive, got {}",
            plan.sigma_tilde
        )));
    }
    let scale = (weights.n() as f64).sqrt() / plan.sigma_tilde;
    let mut values = simulate_statistic(pop, weights, plan.replicates, plan.seed)?;
    for v in &mut values {
        *v = (*v - plan.mean_l) * scale;
    }
    EmpiricalCdf::new(values)
}

/// Writes realizations as little-endian `f64` plus a `<path>.meta` text
/// sidecar recording seed, count and generator version.
pub fn write_realizations(path: &Path, values: &[f64], seed: u64) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    let mut meta_path = path.as_os_str().to_owned();
    meta_path.push(".meta");
    let mut meta = BufWriter::new(File::create(meta_path)?);
    writeln!(meta, "seed = {seed}")?;
    writeln!(meta, "replicates = {}", values.len())?;
    writeln!(meta, "generator = {GENERATOR_VERSION}")?;
    meta.flush()?;
    Ok(())
}

/// Reads a file written by [`write_realizations`].
pub fn read_realizations(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse { line: 0, message: "realization file length is not a multiple of 8".into() });
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("chunk of 8")))
        .collect())
}
