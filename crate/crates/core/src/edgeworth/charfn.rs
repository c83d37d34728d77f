use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// `|E exp(i t g1(X_1) / σ1)|` for a uniformly drawn unit.
pub fn charfn_modulus(g1: &[f64], sigma1: f64, t: f64) -> f64 {
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for &g in g1 {
        let (s, c) = (t * g / sigma1).sin_cos();
        re.add(c);
        im.add(s);
    }
    let n = g1.len() as f64;
    (re.value() / n).hypot(im.value() / n).min(1.0)
}

/// Supremum of the characteristic-function modulus over `lo <= |t| <= hi`.
///
/// Scans a grid of spacing `step`, then refines the best grid point by a
/// golden-section search over its neighbouring cells.
pub fn charfn_sup(g1: &[f64], sigma1: f64, band: (f64, f64), step: f64) -> Result<f64> {
    let (lo, hi) = band;
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::domain(format!("band must satisfy 0 <= lo < hi, got [{lo}, {hi}]")));
    }
    if !(step > 0.0) {
        return Err(Error::domain(format!("grid step must be positive, got {step}")));
    }
    if !(sigma1 > 0.0) {
        return Err(Error::Degenerate(format!("sigma1 must be positive, got {sigma1}")));
    }
    if g1.is_empty() {
        return Err(Error::domain("characteristic function needs at least one value"));
    }
    let cells = ((hi - lo) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=cells)
        .into_par_iter()
        .map(|j| charfn_modulus(g1, sigma1, (lo + j as f64 * step).min(hi)))
        .collect();
    let (best, &best_val) = grid
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (j, v)| if *v > *acc.1 { (j, v) } else { acc });
    let center = (lo + best as f64 * step).min(hi);
    let refined = golden_max(
        |t| charfn_modulus(g1, sigma1, t),
        (center - step).max(lo),
        (center + step).min(hi),
    );
    Ok(best_val.max(refined))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}
