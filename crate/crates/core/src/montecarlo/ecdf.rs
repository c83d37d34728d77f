use std::io::Write;

use crate::error::{Error, Result};

/// Sorted realizations of a simulated statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empirical distribution needs at least one value"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// Lower empirical quantile: the `⌈qR⌉`-th smallest value (at least the
    /// first), no interpolation.
    pub fn quantile(&self, q: f64) -> f64 {
        let r = self.sorted.len();
        let rank = (q * r as f64).ceil().clamp(1.0, r as f64) as usize;
        self.sorted[rank - 1]
    }

    /// Fraction of realizations `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_x |F(x) - G(x)|` against another empirical distribution.
    pub fn sup_distance(&self, other: &EmpiricalCdf) -> f64 {
        self.sorted
            .iter()
            .chain(&other.sorted)
            .map(|&x| (self.cdf(x) - other.cdf(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        crate::sum::sum(self.sorted.iter().copied()) / self.sorted.len() as f64
    }
}

/// `n,q,value` rows for a set of quantile levels.
pub fn write_quantile_csv<W: Write>(mut out: W, rows: &[(usize, f64, f64)]) -> Result<()> {
    writeln!(out, "n,q,value")?;
    for (n, q, v) in rows {
        writeln!(out, "{n},{q},{v}")?;
    }
    Ok(())
}
