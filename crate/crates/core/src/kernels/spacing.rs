//! Conditional expectations of sample spacings.
//!
//! Order statistics are sums of sample spacings,
//! `X_{j:n} = x_0 + Σ_{r<j} 𝚫_{r:n}`, so every expectation of an
//! L-statistic reduces to expected spacings. Given that the first `m` draws
//! are units `k_1 < ... < k_m`,
//!
//! ```text
//! E(𝚫_{r:n} | A_m) = Σ_{s=1}^{m+1} Σ_{i=k_{s-1}}^{k_s - 1} H_{N-m, n-m, i-s+1}(r-s+1) Δ_i
//! ```
//!
//! with `k_0 = 0`, `k_{m+1} = N + 1`. The hypergeometric factor is the ratio
//! `C(i-s+1, r-s+1) C(N-i-m+s-1, n-r-m+s-1) / C(N-m, n-m)`.

use super::hypergeom::pmf;
use crate::error::{Error, Result};
use crate::population::Population;
use crate::sum::NeumaierSum;
use crate::weights::WeightScheme;

/// `E(𝚫_{r:n} | X_1 = x_{k_1}, ..., X_m = x_{k_m})` for zero-based, strictly
/// increasing units `fixed`.
pub fn expected_spacing_given(pop: &Population, n: usize, fixed: &[usize], r: usize) -> Result<f64> {
    let size = pop.len();
    let m = fixed.len();
    if n >= size {
        return Err(Error::domain(format!("sample size n={n} must be below N={size}")));
    }
    if m > n {
        return Err(Error::domain(format!("{m} conditioning units exceed the sample size {n}")));
    }
    if r > n {
        return Err(Error::domain(format!("spacing rank r={r} exceeds n={n}")));
    }
    if fixed.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("conditioning units must be strictly increasing"));
    }
    if fixed.last().is_some_and(|&k| k >= size) {
        return Err(Error::domain(format!("conditioning unit out of range for N={size}")));
    }
    Ok(spacing_expectation(pop, &pop.spacings(), n, fixed, r))
}

fn spacing_expectation(pop: &Population, spacings: &[f64], n: usize, fixed: &[usize], r: usize) -> f64 {
    let size = pop.len() as i64;
    let m = fixed.len() as i64;
    // one-based boundaries k_0 = 0, k_1..k_m, k_{m+1} = N + 1
    let bounds: Vec<i64> = std::iter::once(0)
        .chain(fixed.iter().map(|&k| k as i64 + 1))
        .chain(std::iter::once(size + 1))
        .collect();
    let mut acc = NeumaierSum::new();
    for s in 1..=m + 1 {
        let lo = bounds[(s - 1) as usize];
        let hi = bounds[s as usize];
        for i in lo..hi {
            let d = spacings[i as usize];
            if d == 0.0 {
                continue;
            }
            acc.add(pmf(size - m, n as i64 - m, i - s + 1, r as i64 - s + 1) * d);
        }
    }
    acc.value()
}

/// Unconditional `E X_{j:n}` for `j = 1..=n`.
pub fn expected_order_statistics(pop: &Population, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n >= pop.len() {
        return Err(Error::domain(format!("sample size needs 1 <= n < N, got n={n}, N={}", pop.len())));
    }
    let spacings = pop.spacings();
    let mut out = Vec::with_capacity(n);
    let mut running = NeumaierSum::new();
    running.add(pop.x(0));
    for r in 0..n {
        running.add(spacing_expectation(pop, &spacings, n, &[], r));
        out.push(running.value());
    }
    Ok(out)
}

/// `E L_n`, exact.
pub fn expected_l(pop: &Population, weights: &WeightScheme) -> Result<f64> {
    let n = weights.n();
    let order = expected_order_statistics(pop, n)?;
    let total: NeumaierSum = weights.weights().iter().zip(&order).map(|(c, e)| c * e).collect();
    Ok(total.value() / n as f64)
}
