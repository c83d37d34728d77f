#![allow(dead_code)]

use finpop::rng::StreamFactory;
use finpop::{Population, ScoreKind, WeightScheme};

/// `|a - b| <= tol * max(|a|, |b|, scale)`.
pub fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(scale)
}

/// Deterministic populations of size `size`; variant 0 is continuous,
/// variant 1 skewed, variant 2 has ties.
pub fn suite_population(size: usize, variant: u64) -> Population {
    let mut s = StreamFactory::new(0x5EED_0000 + size as u64).stream(variant);
    let values = (0..size)
        .map(|_| {
            let u = s.open01();
            match variant % 3 {
                0 => 10.0 * u - 3.0,
                1 => -(1.0 - u).ln() * 2.0,
                _ => (u * 4.0).floor(),
            }
        })
        .collect();
    let pop = Population::new(values).unwrap();
    if pop.values().first() == pop.values().last() {
        Population::new((0..size).map(|i| i as f64).collect()).unwrap()
    } else {
        pop
    }
}

/// Built-in score kinds applicable at sample size `n`.
pub fn score_kinds(n: usize) -> Vec<ScoreKind> {
    let mut kinds = vec![ScoreKind::Constant, ScoreKind::Center, ScoreKind::Trimmed { t1: 0.2, t2: 0.8 }];
    if n >= 2 {
        kinds.push(ScoreKind::Gini);
    }
    kinds
}

pub fn random_weights(n: usize, tag: u64) -> WeightScheme {
    let mut s = StreamFactory::new(0xC0FF_EE00 + n as u64).stream(tag);
    WeightScheme::explicit((0..n).map(|_| 4.0 * s.open01() - 1.0).collect()).unwrap()
}

/// `(1/n) Σ c_j X_{j:n}` computed from scratch.
pub fn l_of(pop: &Population, units: &[usize], weights: &WeightScheme) -> f64 {
    let mut x: Vec<f64> = units.iter().map(|&k| pop.values()[k]).collect();
    x.sort_by(f64::total_cmp);
    x.iter().zip(weights.weights()).map(|(a, c)| a * c).sum::<f64>() / units.len() as f64
}

/// All `n`-subsets of `0..size` in lexicographic order.
pub fn subsets(size: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, size: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for k in start..size {
            cur.push(k);
            rec(k + 1, size, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, size, n, &mut Vec::new(), &mut out);
    out
}

/// `E(𝚫_{r:n} | fixed units drawn)` by listing every completion.
pub fn spacing_by_enumeration(pop: &Population, n: usize, fixed: &[usize], r: usize) -> f64 {
    let size = pop.len();
    let rest: Vec<usize> = (0..size).filter(|k| !fixed.contains(k)).collect();
    let completions = subsets(rest.len(), n - fixed.len());
    let mut total = 0.0;
    for comp in &completions {
        let mut x: Vec<f64> = fixed.iter().map(|&k| pop.values()[k]).collect();
        x.extend(comp.iter().map(|&j| pop.values()[rest[j]]));
        x.sort_by(f64::total_cmp);
        let mut padded = vec![pop.x(0)];
        padded.extend(x);
        padded.push(pop.x(size + 1));
        total += padded[r + 1] - padded[r];
    }
    total / completions.len() as f64
}
