//! Closed-form Hoeffding kernels `g_1`, `g_2`, `g_3` of an L-statistic.
//!
//! Each kernel is a single sum over population spacings,
//!
//! ```text
//! g_1(x_k)         = -n^{-1} Σ_i φ_k(i)       t_i Δ_i,  t_i = Σ_{j=1}^n c_j           H_{N-2,n-1,i-1}(j-1)
//! g_2(x_k,x_l)     = -n^{-1} Σ_i φ_{k,l}(i)   s_i Δ_i,  s_i = Σ_{j=2}^n Δ^1(c_j)      H_{N-4,n-2,i-2}(j-2)
//! g_3(x_k,x_l,x_m) = -n^{-1} Σ_i θ_{k,l,m}(i) u_i Δ_i,  u_i = Σ_{j=3}^n Δ^2(c_j)      H_{N-6,n-3,i-3}(j-3)
//! ```
//!
//! so the weight-dependent factors `t`, `s`, `u` are computed once per
//! `(N, n, c)` and each kernel value costs `O(N)`. The piecewise
//! coefficients `φ`, `θ` depend only on where `i` falls relative to the
//! units, with falling factorials `[N-1]_2` and `[N-2]_3` as denominators.

use rayon::prelude::*;

use super::hypergeom::pmf;
use crate::error::{Error, Result};
use crate::population::Population;
use crate::sum::NeumaierSum;
use crate::weights::WeightScheme;

/// Kernel tables for one population, weight sequence and sample size.
///
/// Units are zero-based: unit `k` is the `(k+1)`-th smallest value.
#[derive(Debug, Clone)]
pub struct KernelSet {
    size: usize,
    n: usize,
    spacings: Vec<f64>,
    g1: Vec<f64>,
    // s_i Δ_i and u_i Δ_i, present when the kernel's (N, n) window is legal
    pair_terms: Option<Vec<f64>>,
    triple_terms: Option<Vec<f64>>,
}

/// `g_2` over all pairs `k < l`, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    size: usize,
    values: Vec<f64>,
}

impl PairTable {
    fn offset(&self, k: usize, l: usize) -> usize {
        // rows k = 0..N-2 hold N-1-k entries
        k * (2 * self.size - k - 1) / 2 + (l - k - 1)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Symmetric lookup; `k == l` is not a pair.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        assert!(k != l && k < self.size && l < self.size, "pair ({k},{l}) outside table");
        let (a, b) = if k < l { (k, l) } else { (l, k) };
        self.values[self.offset(a, b)]
    }

    /// `(k, l, g_2)` for `k < l` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let size = self.size;
        (0..size)
            .flat_map(move |k| (k + 1..size).map(move |l| (k, l)))
            .zip(self.values.iter().copied())
            .map(|((k, l), v)| (k, l, v))
    }
}

pub(crate) fn g2_window(size: usize, n: usize) -> bool {
    size >= 4 && n >= 2 && n + 2 <= size
}

pub(crate) fn g3_window(size: usize, n: usize) -> bool {
    size >= 6 && n >= 3 && n + 3 <= size
}

impl KernelSet {
    /// Precomputes `g_1` for every unit plus the shared factors of `g_2` and
    /// `g_3` where those kernels are defined. Needs `1 <= n <= N-1`.
    pub fn new(pop: &Population, weights: &WeightScheme) -> Result<Self> {
        let size = pop.len();
        let n = weights.n();
        if n >= size {
            return Err(Error::kernel_window("g1", size, n));
        }
        let spacings = pop.spacings();
        let c = weights.weights();

        let t = weight_profile(size, n, c, 1);
        let linear: Vec<f64> = (0..size).map(|i| t[i] * spacings[i]).collect();
        let g1 = (0..size)
            .into_par_iter()
            .map(|k| {
                let unit = k + 1;
                let mut acc = NeumaierSum::new();
                for (i, &w) in linear.iter().enumerate().take(size).skip(1) {
                    if w != 0.0 {
                        acc.add(linear_coefficient(size, unit, i) * w);
                    }
                }
                -acc.value() / n as f64
            })
            .collect();

        let pair_terms = g2_window(size, n).then(|| {
            let d1 = weights.difference(1).expect("n >= 2 inside the g2 window");
            let s = weight_profile(size, n, &d1, 2);
            (0..size).map(|i| s[i] * spacings[i]).collect()
        });
        let triple_terms = g3_window(size, n).then(|| {
            let d2 = weights.difference(2).expect("n >= 3 inside the g3 window");
            let u = weight_profile(size, n, &d2, 3);
            (0..size).map(|i| u[i] * spacings[i]).collect()
        });

        Ok(Self { size, n, spacings, g1, pair_terms, triple_terms })
    }

    pub fn population_size(&self) -> usize {
        self.size
    }

    pub fn sample_size(&self) -> usize {
        self.n
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn g1(&self) -> &[f64] {
        &self.g1
    }

    pub fn has_g2(&self) -> bool {
        self.pair_terms.is_some()
    }

    pub fn has_g3(&self) -> bool {
        self.triple_terms.is_some()
    }

    /// `g_2(x_k, x_l)` for units `k < l`.
    pub fn g2_at(&self, k: usize, l: usize) -> Result<f64> {
        let terms = self
            .pair_terms
            .as_ref()
            .ok_or_else(|| Error::kernel_window("g2", self.size, self.n))?;
        if !(k < l && l < self.size) {
            return Err(Error::domain(format!("g2 needs units k < l < N, got ({k}, {l})")));
        }
        Ok(self.pair_value(terms, k + 1, l + 1))
    }

    fn pair_value(&self, terms: &[f64], k: usize, l: usize) -> f64 {
        let mut acc = NeumaierSum::new();
        for (i, &w) in terms.iter().enumerate().take(self.size).skip(1) {
            if w != 0.0 {
                acc.add(pair_coefficient_raw(self.size, k, l, i) * w);
            }
        }
        -acc.value() / self.n as f64
    }

    /// Materializes `g_2` over all pairs. Rows are built in parallel; each
    /// entry is summed in a fixed order, so the table does not depend on the
    /// thread count.
    pub fn g2_table(&self) -> Result<PairTable> {
        let terms = self
            .pair_terms
            .as_ref()
            .ok_or_else(|| Error::kernel_window("g2", self.size, self.n))?;
        let rows: Vec<Vec<f64>> = (0..self.size)
            .into_par_iter()
            .map(|k| (k + 1..self.size).map(|l| self.pair_value(terms, k + 1, l + 1)).collect())
            .collect();
        Ok(PairTable { size: self.size, values: rows.concat() })
    }

    /// `g_3(x_k, x_l, x_m)` for units `k < l < m`, evaluated on demand.
    pub fn g3_at(&self, k: usize, l: usize, m: usize) -> Result<f64> {
        let terms = self
            .triple_terms
            .as_ref()
            .ok_or_else(|| Error::kernel_window("g3", self.size, self.n))?;
        if !(k < l && l < m && m < self.size) {
            return Err(Error::domain(format!("g3 needs units k < l < m < N, got ({k}, {l}, {m})")));
        }
        let mut acc = NeumaierSum::new();
        for (i, &w) in terms.iter().enumerate().take(self.size).skip(1) {
            if w != 0.0 {
                acc.add(triple_coefficient_raw(self.size, k + 1, l + 1, m + 1, i) * w);
            }
        }
        Ok(-acc.value() / self.n as f64)
    }
}

/// `Σ_{j=o}^{n} d_j H_{N-2o, n-o, i-o}(j-o)` for `i = 0..=N` and order `o`.
/// `d` holds `Δ^{o-1}(c_j)` for `j = o..=n`; the end entries are 0.
fn weight_profile(size: usize, n: usize, d: &[f64], order: usize) -> Vec<f64> {
    let o = order as i64;
    let pop_arg = size as i64 - 2 * o;
    let draw_arg = n as i64 - o;
    (0..=size as i64)
        .map(|i| {
            if i == 0 || i == size as i64 {
                return 0.0;
            }
            let mut acc = NeumaierSum::new();
            for (t, &dj) in d.iter().enumerate() {
                // d[t] is the entry for j = order + t
                let j = o + t as i64;
                acc.add(dj * pmf(pop_arg, draw_arg, i - o, j - o));
            }
            acc.value()
        })
        .collect()
}

fn linear_coefficient(size: usize, k: usize, i: usize) -> f64 {
    let frac = i as f64 / size as f64;
    if i < k {
        -frac
    } else {
        1.0 - frac
    }
}

fn pair_coefficient_raw(size: usize, k: usize, l: usize, i: usize) -> f64 {
    let (nf, fi) = (size as f64, i as f64);
    let denom = (nf - 1.0) * (nf - 2.0);
    if i < k {
        fi * (fi - 1.0) / denom
    } else if i < l {
        -(fi - 1.0) * (nf - fi - 1.0) / denom
    } else {
        (nf - fi - 1.0) * (nf - fi) / denom
    }
}

fn triple_coefficient_raw(size: usize, k: usize, l: usize, m: usize, i: usize) -> f64 {
    let (nf, fi) = (size as f64, i as f64);
    let denom = (nf - 2.0) * (nf - 3.0) * (nf - 4.0);
    if i < k {
        -fi * (fi - 1.0) * (fi - 2.0) / denom
    } else if i < l {
        (fi - 1.0) * (fi - 2.0) * (nf - fi - 2.0) / denom
    } else if i < m {
        -(fi - 2.0) * (nf - fi - 2.0) * (nf - fi - 1.0) / denom
    } else {
        (nf - fi - 2.0) * (nf - fi - 1.0) * (nf - fi) / denom
    }
}

/// Coefficient `φ_k(i)` of `g_1` for zero-based unit `k` and spacing `i`.
pub fn linear_coeff(size: usize, k: usize, i: usize) -> f64 {
    linear_coefficient(size, k + 1, i)
}

/// Coefficient `φ_{k,l}(i)` of `g_2` for zero-based units `k < l`.
pub fn pair_coeff(size: usize, k: usize, l: usize, i: usize) -> f64 {
    pair_coefficient_raw(size, k + 1, l + 1, i)
}

/// Coefficient `θ_{k,l,m}(i)` of `g_3` for zero-based units `k < l < m`.
pub fn triple_coeff(size: usize, k: usize, l: usize, m: usize, i: usize) -> f64 {
    triple_coefficient_raw(size, k + 1, l + 1, m + 1, i)
}

fn step(size: usize, unit: usize, i: usize) -> f64 {
    let ind = if i >= unit { 1.0 } else { 0.0 };
    ind - i as f64 / size as f64
}

/// Product form `(1{i>=k} - i/N)(1{i>=l} - i/N)` dominating `φ_{k,l}(i)`.
pub fn pair_coeff_envelope(size: usize, k: usize, l: usize, i: usize) -> f64 {
    step(size, k + 1, i) * step(size, l + 1, i)
}

/// Product form dominating `θ_{k,l,m}(i)`.
pub fn triple_coeff_envelope(size: usize, k: usize, l: usize, m: usize, i: usize) -> f64 {
    step(size, k + 1, i) * step(size, l + 1, i) * step(size, m + 1, i)
}

/// `g_1` over all units.
pub fn g1_table(pop: &Population, weights: &WeightScheme) -> Result<Vec<f64>> {
    Ok(KernelSet::new(pop, weights)?.g1)
}

/// Single `g_2` value without keeping the kernel set around.
pub fn g2_at(pop: &Population, weights: &WeightScheme, k: usize, l: usize) -> Result<f64> {
    if !g2_window(pop.len(), weights.n()) {
        return Err(Error::kernel_window("g2", pop.len(), weights.n()));
    }
    KernelSet::new(pop, weights)?.g2_at(k, l)
}

/// Single `g_3` value without keeping the kernel set around.
pub fn g3_at(pop: &Population, weights: &WeightScheme, k: usize, l: usize, m: usize) -> Result<f64> {
    if !g3_window(pop.len(), weights.n()) {
        return Err(Error::kernel_window("g3", pop.len(), weights.n()));
    }
    KernelSet::new(pop, weights)?.g3_at(k, l, m)
}
