//! Ordered finite populations.
//!
//! A [`Population`] holds `x_1 <= ... <= x_N`. Units are addressed by a
//! zero-based index `k`, so `k = 0` is the smallest value; coincident values
//! stay distinct units ordered by position. The boundary convention
//! `x_0 = x_1`, `x_{N+1} = x_N` shows up as zero end spacings.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::StreamFactory;
use crate::sum;

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    values: Vec<f64>,
}

/// The auxiliary functions `G`, `H`, `M` evaluated at one population unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghm {
    pub g: f64,
    pub h: f64,
    pub m: f64,
}

impl Population {
    /// Builds a population from values in any order; they are sorted here.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain(format!(
                "a population needs at least 2 units, got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("population value #{} is not finite", pos + 1)));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    /// Reads one value per line. A single leading line starting with `#` is
    /// treated as a header; blank lines are skipped.
    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        let reader = BufReader::new(source);
        let mut values = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || (idx == 0 && text.starts_with('#')) {
                continue;
            }
            let v: f64 = text.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("not a number: {text:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: idx + 1, message: format!("not finite: {text:?}") });
            }
            values.push(v);
        }
        Self::new(values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(File::open(path)?)
    }

    /// Draws `size` values from the standard logistic distribution by
    /// inverse transform, `x = ln(u / (1 - u))`.
    pub fn simulate_logistic(size: usize, seed: u64) -> Result<Self> {
        if size < 2 {
            return Err(Error::domain(format!("a population needs at least 2 units, got {size}")));
        }
        let mut stream = StreamFactory::new(seed).stream(0);
        let values = (0..size).map(|_| logistic_quantile(stream.open01())).collect();
        Self::new(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `x_i` with the boundary convention, for `i` in `0..=N+1` (one-based
    /// in the interior).
    pub fn x(&self, i: usize) -> f64 {
        let n = self.values.len();
        self.values[i.clamp(1, n) - 1]
    }

    /// Spacings `Δ_0, ..., Δ_N` where `Δ_i = x_{i+1} - x_i`; both ends are 0.
    pub fn spacings(&self) -> Vec<f64> {
        let n = self.values.len();
        let mut d = vec![0.0; n + 1];
        for i in 1..n {
            d[i] = self.values[i] - self.values[i - 1];
        }
        d
    }

    pub fn mean(&self) -> f64 {
        sum::sum(self.values.iter().copied()) / self.len() as f64
    }

    /// Raw moment `(1/N) Σ x^s`, or the absolute moment `(1/N) Σ |x|^s`.
    pub fn moment(&self, s: f64, absolute: bool) -> f64 {
        let pow = |x: f64| {
            if s.fract() == 0.0 && s.abs() <= i32::MAX as f64 {
                x.powi(s as i32)
            } else {
                x.powf(s)
            }
        };
        let total = if absolute {
            sum::sum(self.values.iter().map(|&x| pow(x.abs())))
        } else {
            sum::sum(self.values.iter().map(|&x| pow(x)))
        };
        total / self.len() as f64
    }

    /// `(1/N) Σ (x - mean)^2`.
    pub fn central_variance(&self) -> f64 {
        let mean = self.mean();
        sum::sum(self.values.iter().map(|&x| (x - mean) * (x - mean))) / self.len() as f64
    }

    /// `G`, `H`, `M` at unit `k` (zero-based).
    pub fn ghm_at(&self, k: usize) -> Result<Ghm> {
        let n = self.len();
        if k >= n {
            return Err(Error::domain(format!("unit index {k} out of range for N={n}")));
        }
        let spacings = self.spacings();
        let nf = n as f64;
        // one-based k' = k + 1: G and M sum i < k', H sums i >= k'
        let mut g = sum::NeumaierSum::new();
        let mut m = sum::NeumaierSum::new();
        for (i, &d) in spacings.iter().enumerate().take(k + 1).skip(1) {
            let frac = i as f64 / nf;
            g.add(frac * d);
            m.add(frac * (1.0 - frac) * d);
        }
        let h: f64 = sum::sum((k + 1..n).map(|i| (1.0 - i as f64 / nf) * spacings[i]));
        Ok(Ghm { g: g.value(), h, m: m.value() })
    }

    /// Empirical distribution function, right-continuous.
    pub fn cdf(&self, y: f64) -> f64 {
        self.values.partition_point(|&x| x <= y) as f64 / self.len() as f64
    }
}

/// Inverse of the logistic distribution function `(1 + e^{-x})^{-1}`.
pub fn logistic_quantile(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}
