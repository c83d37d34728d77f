//! Hypergeometric probabilities.
//!
//! `H_{N,n,i}(j) = C(i,j) C(N-i,n-j) / C(N,n)` is evaluated in log space
//! through Loader's saddle-point decomposition: each binomial factor is
//! written as a Stirling remainder plus a deviance term, which avoids the
//! cancellation that plain `ln Γ` differences suffer for large `N`.

use crate::error::{Error, Result};

/// Parameters of one hypergeometric probability: population size, number of
/// draws, marked units in the population, and marked units observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeomParams {
    pub population: usize,
    pub draws: usize,
    pub marked: usize,
    pub observed: usize,
}

/// `H_{N,n,i}(j)`. Out-of-support `j` gives 0; illegal `(N, n, i)` is an error.
pub fn hypergeom_pmf(p: HypergeomParams) -> Result<f64> {
    if p.draws > p.population || p.marked > p.population {
        return Err(Error::domain(format!(
            "hypergeometric parameters need n <= N and i <= N, got N={}, n={}, i={}",
            p.population, p.draws, p.marked
        )));
    }
    Ok(pmf(p.population as i64, p.draws as i64, p.marked as i64, p.observed as i64))
}

/// Total version of [`hypergeom_pmf`]: any argument outside the legal
/// range yields 0, mirroring `C(u, v) = 0` for `v < 0`, `v > u` or `u < 0`.
pub(crate) fn pmf(population: i64, draws: i64, marked: i64, observed: i64) -> f64 {
    if population < 0 || draws < 0 || draws > population || marked < 0 || marked > population {
        return 0.0;
    }
    let unmarked = population - marked;
    if observed < 0 || observed > marked || draws - observed < 0 || draws - observed > unmarked {
        return 0.0;
    }
    if draws == 0 || draws == population {
        return 1.0;
    }
    let total = population as f64;
    let p = draws as f64 / total;
    let q = (population - draws) as f64 / total;
    let p1 = dbinom_raw(observed as f64, marked as f64, p, q);
    let p2 = dbinom_raw((draws - observed) as f64, unmarked as f64, p, q);
    let p3 = dbinom_raw(draws as f64, total, p, q);
    (p1 * p2 / p3).clamp(0.0, 1.0)
}

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Binomial probability `C(n,x) p^x q^(n-x)` for integer-valued `x`, `n`.
fn dbinom_raw(x: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == 0.0 {
        if n == 0.0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(n, n * q) - n * p } else { n * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(n, n * p) - n * q } else { n * p.ln() };
        return lc.exp();
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = LN_2PI + x.ln() + (-x / n).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln(n!) - ln(sqrt(2π n) (n/e)^n)` at integer `n <= 15`.
const STIRLERR_INT: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_2,
    0.041_340_695_955_409_294_093_822_1,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_567,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_318,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_152,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        debug_assert_eq!(n.fract(), 0.0);
        return STIRLERR_INT[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// Deviance term `x ln(x/np) + np - x`, series-evaluated near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}
