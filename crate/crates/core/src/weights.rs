//! Weight sequences `c_1, ..., c_n` of an L-statistic.
//!
//! Weights either come as an explicit list or are generated from a score
//! function `J` on `(0, 1)` as `c_j = J(j / (n + 1))`. Gini's mean difference
//! additionally carries the prefactor `(n + 1) / (n - 1)`.

use std::io::{BufRead, BufReader, Read};

use crate::error::{Error, Result};

/// A score function tabulated at points `u` with linear interpolation
/// between them; values outside the tabulated range are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedScore {
    points: Vec<(f64, f64)>,
}

impl TabulatedScore {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("tabulated score function has no points"));
        }
        if points.iter().any(|&(u, j)| !(u > 0.0 && u < 1.0) || !j.is_finite()) {
            return Err(Error::domain("tabulated score points need u in (0,1) and finite J(u)"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::domain("tabulated score function has duplicate u values"));
        }
        Ok(Self { points })
    }

    /// Reads `u,J(u)` rows. Lines starting with `#` and a non-numeric first
    /// line (a header) are skipped.
    pub fn from_csv_reader<R: Read>(source: R) -> Result<Self> {
        let mut points = Vec::new();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let parsed = text.split_once(',').and_then(|(u, j)| {
                Some((u.trim().parse::<f64>().ok()?, j.trim().parse::<f64>().ok()?))
            });
            match parsed {
                Some(p) => points.push(p),
                None if idx == 0 => continue,
                None => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("expected `u,J(u)`, got {text:?}"),
                    })
                }
            }
        }
        Self::new(points)
    }

    pub fn eval(&self, u: f64) -> f64 {
        let pts = &self.points;
        let pos = pts.partition_point(|&(x, _)| x <= u);
        if pos == 0 {
            return pts[0].1;
        }
        if pos == pts.len() {
            return pts[pts.len() - 1].1;
        }
        let (u0, j0) = pts[pos - 1];
        let (u1, j1) = pts[pos];
        j0 + (j1 - j0) * (u - u0) / (u1 - u0)
    }
}

/// Built-in score functions.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreKind {
    /// `J ≡ 1`: the sample mean.
    Constant,
    /// `J(u) = 2(2u - 1)` with the `(n+1)/(n-1)` prefactor.
    Gini,
    /// `J(u) = (t2 - t1)^{-1} 1{t1 < u < t2}`.
    Trimmed { t1: f64, t2: f64 },
    /// `J(u) = 6u(1 - u)`, an estimator of the center.
    Center,
    Custom(TabulatedScore),
}

impl ScoreKind {
    pub fn score(&self, u: f64) -> f64 {
        match self {
            ScoreKind::Constant => 1.0,
            ScoreKind::Gini => 2.0 * (2.0 * u - 1.0),
            ScoreKind::Trimmed { t1, t2 } => {
                if *t1 < u && u < *t2 {
                    1.0 / (t2 - t1)
                } else {
                    0.0
                }
            }
            ScoreKind::Center => 6.0 * u * (1.0 - u),
            ScoreKind::Custom(table) => table.eval(u),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ScoreKind::Constant => "constant".into(),
            ScoreKind::Gini => "gini".into(),
            ScoreKind::Trimmed { t1, t2 } => format!("trimmed:{t1},{t2}"),
            ScoreKind::Center => "center".into(),
            ScoreKind::Custom(_) => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightOrigin {
    Explicit,
    Score(ScoreKind),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightScheme {
    c: Vec<f64>,
    origin: WeightOrigin,
}

/// Realized smoothness constants of a weight sequence:
/// `a = max|c_j|`, `b = n max|Δ^1 c_j|`, `c = n^2 max|Δ^2 c_j|`,
/// `d = n^3 max|Δ^3 c_j|`. Orders with no defined difference report 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl WeightScheme {
    pub fn explicit(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::domain("weight sequence is empty"));
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("weight sequence has a non-finite entry"));
        }
        Ok(Self { c, origin: WeightOrigin::Explicit })
    }

    /// Reads an explicit weight list, one value per line.
    pub fn from_reader<R: Read>(source: R) -> Result<Self> {
        let mut c = Vec::new();
        for (idx, line) in BufReader::new(source).lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            c.push(text.parse::<f64>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("not a number: {text:?}"),
            })?);
        }
        Self::explicit(c)
    }

    pub fn from_score(kind: ScoreKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("sample size must be at least 1"));
        }
        if let ScoreKind::Trimmed { t1, t2 } = kind {
            if !(0.0 < t1 && t1 < t2 && t2 < 1.0) {
                return Err(Error::domain(format!(
                    "trimming parameters need 0 < t1 < t2 < 1, got t1={t1}, t2={t2}"
                )));
            }
        }
        if kind == ScoreKind::Gini && n < 2 {
            return Err(Error::domain("Gini weights need n >= 2"));
        }
        let np1 = (n + 1) as f64;
        let prefactor = if kind == ScoreKind::Gini { np1 / (n as f64 - 1.0) } else { 1.0 };
        let c = (1..=n).map(|j| prefactor * kind.score(j as f64 / np1)).collect();
        Ok(Self { c, origin: WeightOrigin::Score(kind) })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.c
    }

    pub fn origin(&self) -> &WeightOrigin {
        &self.origin
    }

    /// `Δ^v(c_j)` for `j = v+1, ..., n`, unscaled.
    pub fn difference(&self, v: usize) -> Result<Vec<f64>> {
        if v >= self.n() {
            return Err(Error::domain(format!(
                "difference order {v} needs v <= n-1 = {}",
                self.n() - 1
            )));
        }
        Ok(forward_difference(&self.c, v))
    }

    pub fn smoothness_constants(&self) -> SmoothnessReport {
        let n = self.n() as f64;
        let scaled_max = |v: usize| -> f64 {
            if v >= self.n() {
                return 0.0;
            }
            let m = forward_difference(&self.c, v).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            m * n.powi(v as i32)
        };
        SmoothnessReport { a: scaled_max(0), b: scaled_max(1), c: scaled_max(2), d: scaled_max(3) }
    }

    /// `(1/n) Σ c_j`; equals 1 when the statistic reproduces constants.
    pub fn mean_weight(&self) -> f64 {
        crate::sum::sum(self.c.iter().copied()) / self.n() as f64
    }
}

fn forward_difference(c: &[f64], order: usize) -> Vec<f64> {
    let mut d = c.to_vec();
    for _ in 0..order {
        d = d.windows(2).map(|w| w[1] - w[0]).collect();
    }
    d
}
