//! One-term Edgeworth expansion for the standardized L-statistic
//! `S_n / σ̃_n`, where `S_n = √n (L_n - E L_n)`.
//!
//! The expansion is `G_n(x) = Φ(x) - e Φ'''(x)` with
//! `e = ((q - p) α + 3κ) / (6τ)`, `p = n/N`, `q = 1 - p`, `τ² = Npq`,
//! `α = E g1³ / σ1³` and `κ = τ² E g2(X1, X2) g1(X1) g1(X2) / σ1³`.

mod charfn;
mod normal;

use std::fmt::Write as _;
use std::io::Write;

pub use charfn::{charfn_modulus, charfn_sup};
pub use normal::{normal_cdf, normal_cdf_d3, normal_pdf, normal_quantile};

use crate::error::{Error, Result};
use crate::kernels::oracle::{binomial, for_each_sample};
use crate::kernels::{expected_l, KernelSet, PairTable};
use crate::montecarlo::{l_statistic, simulate_statistic};
use crate::population::Population;
use crate::sum::NeumaierSum;
use crate::weights::WeightScheme;

/// Largest number of samples the exact variance mode will enumerate.
pub const EXACT_SIGMA_LIMIT: u128 = 1_000_000;
/// Fewest replicates accepted by the Monte-Carlo variance mode.
pub const MIN_SIGMA_REPLICATES: u64 = 10_000;
/// Replicates used when the automatic mode falls back to simulation.
pub const DEFAULT_SIGMA_REPLICATES: u64 = 1_000_000;

const QUANTILE_BRACKET: (f64, f64) = (-10.0, 10.0);
const QUANTILE_SCAN_STEP: f64 = 0.01;

/// One-term Edgeworth correction of the standard normal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub e_coeff: f64,
}

impl Expansion {
    pub fn new(e_coeff: f64) -> Self {
        Self { e_coeff }
    }

    /// `G_n(x)`, possibly slightly outside `[0, 1]` in the far tails.
    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x) - self.e_coeff * normal_cdf_d3(x)
    }

    pub fn cdf_clipped(&self, x: f64) -> f64 {
        self.cdf(x).clamp(0.0, 1.0)
    }

    /// A root of `G_n(x) = q` on `[-10, 10]`.
    ///
    /// When `G_n` is not monotone and several roots exist, the one closest to
    /// `Φ^{-1}(q)` is returned.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("quantile level must lie in (0, 1), got {q}")));
        }
        let f = |x: f64| self.cdf(x) - q;
        let (lo, hi) = QUANTILE_BRACKET;
        let steps = ((hi - lo) / QUANTILE_SCAN_STEP).round() as usize;
        let target = normal_quantile(q);
        let mut best: Option<f64> = None;
        let mut a = lo;
        let mut fa = f(a);
        for j in 1..=steps {
            let b = lo + (hi - lo) * j as f64 / steps as f64;
            let fb = f(b);
            let root = if fa == 0.0 {
                Some(a)
            } else if fa.signum() != fb.signum() {
                Some(bisect(&f, a, b, fa))
            } else {
                None
            };
            if let Some(x) = root {
                if best.is_none_or(|y| (x - target).abs() < (y - target).abs()) {
                    best = Some(x);
                }
            }
            a = b;
            fa = fb;
        }
        if fa == 0.0 && best.is_none_or(|y| (a - target).abs() < (y - target).abs()) {
            best = Some(a);
        }
        best.ok_or_else(|| {
            Error::domain(format!(
                "no root of G_n(x) = {q} on [{lo}, {hi}] for correction coefficient {}",
                self.e_coeff
            ))
        })
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    loop {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    if fa.abs() <= f(b).abs() {
        a
    } else {
        b
    }
}

/// How the variance of `S_n` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaMode {
    /// Enumeration of all `C(N, n)` samples.
    Exact,
    /// Empirical second moment of `S_n` around the exact `E L_n`.
    MonteCarlo { replicates: u64, seed: u64 },
    /// `n² σ1² (N - n)/(N - 1)`, the variance of the linear part only.
    Linear,
}

impl SigmaMode {
    /// Exact when at most `10^6` samples exist, otherwise simulation with
    /// `10^6` replicates.
    pub fn auto(size: usize, n: usize, seed: u64) -> Self {
        if binomial(size, n) <= EXACT_SIGMA_LIMIT {
            SigmaMode::Exact
        } else {
            SigmaMode::MonteCarlo { replicates: DEFAULT_SIGMA_REPLICATES, seed }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SigmaMode::Exact => "exact",
            SigmaMode::MonteCarlo { .. } => "montecarlo",
            SigmaMode::Linear => "linear",
        }
    }
}

/// `σ̃_n` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaEstimate {
    pub mode: SigmaMode,
    /// `Var S_n`.
    pub variance: f64,
    /// Standard error of `variance`; zero for the deterministic modes.
    pub std_error: f64,
}

impl SigmaEstimate {
    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// `σ1 = sqrt(mean g1²)` and, when `σ1 > 0`, `α = mean g1³ / σ1³`.
pub fn linear_moments(g1: &[f64]) -> Result<(f64, f64)> {
    if g1.is_empty() {
        return Err(Error::domain("linear kernel table is empty"));
    }
    let n = g1.len() as f64;
    let sigma1 = (g1.iter().map(|g| g * g).collect::<NeumaierSum>().value() / n).sqrt();
    if !(sigma1 > 0.0) {
        return Err(Error::Degenerate("sigma1 = 0: the linear part vanishes and the expansion is undefined".into()));
    }
    let third = g1.iter().map(|g| g * g * g).collect::<NeumaierSum>().value() / n;
    Ok((sigma1, third / sigma1.powi(3)))
}

/// `E g2(X1, X2) g1(X1) g1(X2)` over an ordered pair of distinct units.
pub fn pair_expectation(g1: &[f64], g2: &PairTable) -> f64 {
    let size = g1.len() as f64;
    let acc: NeumaierSum = g2.iter().map(|(k, l, v)| v * g1[k] * g1[l]).collect();
    2.0 * acc.value() / (size * (size - 1.0))
}

/// `κ = τ² E g2(X1, X2) g1(X1) g1(X2) / σ1³`.
pub fn kappa(g1: &[f64], g2: &PairTable, tau: f64, sigma1: f64) -> Result<f64> {
    if !(sigma1 > 0.0) {
        return Err(Error::Degenerate(format!("sigma1 must be positive, got {sigma1}")));
    }
    if g2.size() != g1.len() {
        return Err(Error::domain("kernel tables disagree on the population size"));
    }
    Ok(tau * tau * pair_expectation(g1, g2) / sigma1.powi(3))
}

/// Variance of `S_n = √n (L_n - E L_n)` in the requested mode.
///
/// `sigma1` is only consulted by the linear mode.
pub fn sigma_tilde(
    pop: &Population,
    weights: &WeightScheme,
    mode: SigmaMode,
    mean_l: f64,
    sigma1: f64,
) -> Result<SigmaEstimate> {
    let size = pop.len();
    let n = weights.n();
    if n >= size {
        return Err(Error::domain(format!("sample size n={n} must be below N={size}")));
    }
    let nf = n as f64;
    let (variance, std_error) = match mode {
        SigmaMode::Exact => {
            let count = binomial(size, n);
            if count > EXACT_SIGMA_LIMIT {
                return Err(Error::Capacity(format!(
                    "exact variance needs C({size}, {n}) = {count} samples, above the limit {EXACT_SIGMA_LIMIT}"
                )));
            }
            let values = pop.values();
            let mut acc = NeumaierSum::new();
            let mut buf = Vec::with_capacity(n);
            let mut failure = None;
            for_each_sample(size, n, EXACT_SIGMA_LIMIT, |units| {
                buf.clear();
                buf.extend(units.iter().map(|&k| values[k]));
                match l_statistic(&buf, weights) {
                    Ok(l) => acc.add((l - mean_l).powi(2)),
                    Err(e) => failure = Some(e),
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            (nf * acc.value() / count as f64, 0.0)
        }
        SigmaMode::MonteCarlo { replicates, seed } => {
            if replicates < MIN_SIGMA_REPLICATES {
                return Err(Error::domain(format!(
                    "Monte-Carlo variance needs at least {MIN_SIGMA_REPLICATES} replicates, got {replicates}"
                )));
            }
            let squares: Vec<f64> = simulate_statistic(pop, weights, replicates, seed)?
                .into_iter()
                .map(|l| nf * (l - mean_l).powi(2))
                .collect();
            let r = replicates as f64;
            let mean = squares.iter().copied().collect::<NeumaierSum>().value() / r;
            let spread = squares.iter().map(|s| (s - mean).powi(2)).collect::<NeumaierSum>().value() / (r - 1.0);
            (mean, (spread / r).sqrt())
        }
        SigmaMode::Linear => {
            let sf = size as f64;
            (nf * nf * sigma1 * sigma1 * (sf - nf) / (sf - 1.0), 0.0)
        }
    };
    Ok(SigmaEstimate { mode, variance, std_error })
}

/// All quantities of the expansion for one population, weight scheme and
/// sample size.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeworthModel {
    pub population_size: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub tau: f64,
    pub n_star: usize,
    pub sigma1: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub sigma: SigmaEstimate,
    pub e_coeff: f64,
    pub mean_l: f64,
}

impl EdgeworthModel {
    /// Requires `N >= 4` and `2 <= n <= N - 2` (the quadratic kernel window),
    /// and a non-degenerate statistic.
    pub fn build(pop: &Population, weights: &WeightScheme, mode: SigmaMode) -> Result<Self> {
        let kernels = KernelSet::new(pop, weights)?;
        let pairs = kernels.g2_table()?;
        let size = pop.len();
        let n = weights.n();
        let p = n as f64 / size as f64;
        let q = 1.0 - p;
        let tau = (size as f64 * p * q).sqrt();
        let (sigma1, alpha) = linear_moments(kernels.g1())?;
        let kappa = kappa(kernels.g1(), &pairs, tau, sigma1)?;
        let mean_l = expected_l(pop, weights)?;
        let sigma = sigma_tilde(pop, weights, mode, mean_l, sigma1)?;
        if !(sigma.variance > 0.0) {
            return Err(Error::Degenerate("Var S_n = 0: the statistic is constant over samples".into()));
        }
        let e_coeff = ((q - p) * alpha + 3.0 * kappa) / (6.0 * tau);
        Ok(Self {
            population_size: size,
            n,
            p,
            q,
            tau,
            n_star: n.min(size - n),
            sigma1,
            alpha,
            kappa,
            sigma,
            e_coeff,
            mean_l,
        })
    }

    pub fn sigma_tilde(&self) -> f64 {
        self.sigma.sigma()
    }

    pub fn expansion(&self) -> Expansion {
        Expansion::new(self.e_coeff)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.expansion().cdf(x)
    }

    pub fn cdf_clipped(&self, x: f64) -> f64 {
        self.expansion().cdf_clipped(x)
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        self.expansion().quantile(q)
    }

    /// Flat `key = value` report.
    pub fn to_report(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("population_size", self.population_size.to_string());
        put("n", self.n.to_string());
        put("p", self.p.to_string());
        put("q", self.q.to_string());
        put("tau", self.tau.to_string());
        put("n_star", self.n_star.to_string());
        put("sigma1", self.sigma1.to_string());
        put("alpha", self.alpha.to_string());
        put("kappa", self.kappa.to_string());
        put("sigma_tilde", self.sigma_tilde().to_string());
        put("sigma_tilde_sq", self.sigma.variance.to_string());
        put("sigma_mode", self.sigma.mode.name().to_string());
        if let SigmaMode::MonteCarlo { replicates, seed } = self.sigma.mode {
            put("sigma_replicates", replicates.to_string());
            put("sigma_seed", seed.to_string());
            put("sigma_std_error", self.sigma.std_error.to_string());
        }
        put("e_coeff", self.e_coeff.to_string());
        put("mean_l", self.mean_l.to_string());
        out
    }
}

/// `x,phi,g` rows of `Φ(x)` and `G_n(x)` over a grid.
pub fn write_cdf_grid<W: Write>(mut out: W, expansion: &Expansion, grid: &[f64]) -> Result<()> {
    writeln!(out, "x,phi,g")?;
    for &x in grid {
        writeln!(out, "{x},{},{}", normal_cdf(x), expansion.cdf(x))?;
    }
    Ok(())
}
