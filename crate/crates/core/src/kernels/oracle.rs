//! Brute-force kernels by exhaustive enumeration.
//!
//! The conditional expectations
//! `h_j(x_{k_1}, ..., x_{k_j}) = E(L_n - E L_n | X_1 = x_{k_1}, ..., X_j = x_{k_j})`
//! are computed by averaging `L_n` over every completion of the conditioning
//! units, and the kernels follow from the classical combinations of `h_1`,
//! `h_2`, `h_3`. Nothing here touches spacings or hypergeometric
//! probabilities, which is what makes it a usable cross-check for the
//! closed forms in [`super::closed_form`].

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::montecarlo::l_statistic;
use crate::population::Population;
use crate::sum::NeumaierSum;
use crate::weights::WeightScheme;

/// Largest number of samples a single enumeration may visit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Exact `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        // acc * (n - t) / (t + 1) stays integral at every step
        match acc.checked_mul((n - t) as u128) {
            Some(v) => acc = v / (t as u128 + 1),
            None => return u128::MAX,
        }
    }
    acc
}

/// Enumeration oracle for one population and weight sequence.
pub struct Enumerator<'a> {
    pop: &'a Population,
    weights: &'a WeightScheme,
    mean_l: f64,
}

impl<'a> Enumerator<'a> {
    /// Computes `E L_n` as the average of the `N` conditional means given
    /// the first draw, so each enumeration visits `C(N-1, n-1)` samples.
    pub fn new(pop: &'a Population, weights: &'a WeightScheme) -> Result<Self> {
        let size = pop.len();
        let n = weights.n();
        if n >= size {
            return Err(Error::domain(format!("sample size n={n} must be below N={size}")));
        }
        guard(size - 1, n - 1)?;
        let mut this = Self { pop, weights, mean_l: 0.0 };
        let total: NeumaierSum = (0..size).map(|k| this.conditional_mean(&[k])).collect();
        this.mean_l = total.value() / size as f64;
        Ok(this)
    }

    pub fn mean_l(&self) -> f64 {
        self.mean_l
    }

    fn conditional_mean(&self, fixed: &[usize]) -> f64 {
        let n = self.weights.n();
        let rest: Vec<usize> = (0..self.pop.len()).filter(|k| !fixed.contains(k)).collect();
        let vals = self.pop.values();
        let mut sample = Vec::with_capacity(n);
        let mut acc = NeumaierSum::new();
        let mut count = 0u64;
        for extra in rest.into_iter().combinations(n - fixed.len()) {
            sample.clear();
            sample.extend(fixed.iter().chain(&extra).map(|&k| vals[k]));
            acc.add(l_statistic(&sample, self.weights).expect("sample length equals n"));
            count += 1;
        }
        acc.value() / count as f64
    }

    /// `h_j` at the given distinct zero-based units, `1 <= j <= min(3, n)`.
    pub fn h(&self, fixed: &[usize]) -> Result<f64> {
        let size = self.pop.len();
        let n = self.weights.n();
        let j = fixed.len();
        if j == 0 || j > 3.min(n) {
            return Err(Error::domain(format!("h_j needs 1 <= j <= min(3, n), got j={j}, n={n}")));
        }
        if fixed.iter().any(|&k| k >= size) || fixed.iter().duplicates().next().is_some() {
            return Err(Error::domain("conditioning units must be distinct and below N"));
        }
        guard(size - j, n - j)?;
        Ok(self.conditional_mean(fixed) - self.mean_l)
    }

    /// `g_1`, `g_2` or `g_3` (by the number of units) from the `h_j`.
    pub fn kernel(&self, units: &[usize]) -> Result<f64> {
        let size = self.pop.len() as f64;
        let n = self.weights.n() as f64;
        match *units {
            [k] => Ok((size - 1.0) / (size - n) * self.h(&[k])?),
            [k, l] => {
                if n + 2.0 > size {
                    return Err(Error::domain("g2 from h needs n <= N-2"));
                }
                let h2 = self.h(&[k, l])?;
                let h1 = self.h(&[k])? + self.h(&[l])?;
                let scale = (size - 2.0) / (size - n) * (size - 3.0) / (size - n - 1.0);
                Ok(scale * (h2 - (size - 1.0) / (size - 2.0) * h1))
            }
            [k, l, m] => {
                if n + 3.0 > size {
                    return Err(Error::domain("g3 from h needs n <= N-3"));
                }
                let h3 = self.h(&[k, l, m])?;
                let h2 = self.h(&[k, l])? + self.h(&[k, m])? + self.h(&[l, m])?;
                let h1 = self.h(&[k])? + self.h(&[l])? + self.h(&[m])?;
                let scale = (size - 3.0) / (size - n) * (size - 4.0) / (size - n - 1.0) * (size - 5.0)
                    / (size - n - 2.0);
                let c2 = (size - 2.0) / (size - 4.0);
                let c1 = (size - 1.0) / (size - 3.0) * c2;
                Ok(scale * (h3 - c2 * h2 + c1 * h1))
            }
            _ => Err(Error::domain(format!("kernel arity must be 1, 2 or 3, got {}", units.len()))),
        }
    }
}

fn guard(pool: usize, draws: usize) -> Result<()> {
    let count = binomial(pool, draws);
    if count > ENUMERATION_LIMIT {
        return Err(Error::Capacity(format!(
            "enumeration of C({pool},{draws}) = {count} samples exceeds the limit {ENUMERATION_LIMIT}"
        )));
    }
    Ok(())
}

/// `h_j` by enumeration; see [`Enumerator::h`].
pub fn h_oracle(pop: &Population, weights: &WeightScheme, fixed: &[usize]) -> Result<f64> {
    Enumerator::new(pop, weights)?.h(fixed)
}

/// Kernel value by enumeration; see [`Enumerator::kernel`].
pub fn kernels_from_h(pop: &Population, weights: &WeightScheme, units: &[usize]) -> Result<f64> {
    Enumerator::new(pop, weights)?.kernel(units)
}

/// Visits every `n`-subset of units (zero-based, ascending) in lexicographic
/// order, failing before any work if there are more than `limit`.
pub fn for_each_sample<F: FnMut(&[usize])>(size: usize, n: usize, limit: u128, mut visit: F) -> Result<()> {
    let count = binomial(size, n);
    if count > limit {
        return Err(Error::Capacity(format!(
            "enumeration of C({size},{n}) = {count} samples exceeds the limit {limit}"
        )));
    }
    for combo in (0..size).combinations(n) {
        visit(&combo);
    }
    Ok(())
}
