use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::weights::{ScoreKind, TabulatedScore};

pub const DEFAULT_LOGISTIC_SIZE: usize = 100;
pub const DEFAULT_SAMPLE_SIZES: [usize; 3] = [5, 15, 30];
pub const DEFAULT_QUANTILES: [f64; 9] = [0.01, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.99];
pub const DEFAULT_REPLICATES: u64 = 1_000_000;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "finpop", version, about = "Edgeworth expansions for L-statistics under sampling without replacement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Kernel tables g1 and g2 as CSV.
    Kernels,
    /// Expansion parameters and a CDF grid.
    Edgeworth,
    /// Empirical quantiles of the standardized statistic.
    Simulate,
    /// Empirical, Edgeworth and normal quantiles side by side.
    Table1,
    /// Smoothness constants and characteristic-function bounds.
    Diagnose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaChoice {
    Exact,
    Mc,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Text,
}

#[derive(Debug, Default, Args)]
pub struct Options {
    /// Population file, one value per line.
    #[arg(long, global = true, value_name = "FILE", conflicts_with = "logistic")]
    pub population: Option<PathBuf>,
    /// Simulate a standard logistic population of this size.
    #[arg(long, global = true, value_name = "N")]
    pub logistic: Option<usize>,
    /// constant, gini, trimmed:T1,T2, center or custom:FILE.
    #[arg(long, global = true, value_name = "KIND[:P]", conflicts_with = "weights_file")]
    pub weights: Option<String>,
    /// Explicit weights c_1..c_n, one per line.
    #[arg(long, global = true, value_name = "FILE")]
    pub weights_file: Option<PathBuf>,
    /// Comma-separated sample sizes.
    #[arg(long = "n", global = true, value_name = "LIST")]
    pub sample_sizes: Option<String>,
    /// Comma-separated quantile levels.
    #[arg(long = "q", global = true, value_name = "LIST")]
    pub quantiles: Option<String>,
    #[arg(long, global = true, value_name = "R")]
    pub replicates: Option<u64>,
    /// Master seed; every random quantity is derived from it.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,
    /// Variance mode; exact when at most 10^6 samples exist, else mc.
    #[arg(long, global = true, value_enum)]
    pub sigma_mode: Option<SigmaChoice>,
    /// Worker threads; never changes the output.
    #[arg(long, global = true, value_name = "W")]
    pub workers: Option<usize>,
    /// Directory for output files; standard output when absent.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Key-value configuration file; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// CDF grid for `edgeworth` as LO:HI:STEP.
    #[arg(long, global = true, value_name = "LO:HI:STEP")]
    pub grid: Option<String>,
    /// Also write raw realizations from `simulate`.
    #[arg(long, global = true)]
    pub dump: bool,
    /// Lower band edge for `diagnose`.
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Upper band edge B for `diagnose`.
    #[arg(long, global = true)]
    pub band_limit: Option<f64>,
    /// Frequency grid step for `diagnose`.
    #[arg(long, global = true)]
    pub grid_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PopulationSource {
    File(PathBuf),
    Logistic { size: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightsSpec {
    Score(ScoreKind),
    File(PathBuf),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub population: PopulationSource,
    pub weights: WeightsSpec,
    pub sample_sizes: Vec<usize>,
    pub quantiles: Vec<f64>,
    pub replicates: u64,
    pub seed: u64,
    pub sigma_mode: Option<SigmaChoice>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub grid: (f64, f64, f64),
    pub dump: bool,
    pub epsilon: f64,
    pub band_limit: f64,
    pub grid_step: f64,
}

const CONFIG_KEYS: [&str; 17] = [
    "population",
    "logistic",
    "weights",
    "weights-file",
    "n",
    "q",
    "replicates",
    "seed",
    "sigma-mode",
    "workers",
    "out",
    "format",
    "grid",
    "dump",
    "epsilon",
    "band-limit",
    "grid-step",
];

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: idx + 1, message: format!("expected key = value, got {line:?}") })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse { line: idx + 1, message: format!("unknown key {key:?}") });
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| Error::Invalid(format!("{key}: cannot parse {value:?}: {e}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_value(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::Invalid(format!("{key}: empty list")));
    }
    Ok(items)
}

/// Parses `constant`, `gini`, `trimmed:T1,T2`, `center` or `custom:FILE`.
pub fn parse_weights(spec: &str) -> Result<ScoreKind> {
    let (kind, param) = match spec.split_once(':') {
        Some((k, p)) => (k.trim(), Some(p.trim())),
        None => (spec.trim(), None),
    };
    match (kind, param) {
        ("constant", None) => Ok(ScoreKind::Constant),
        ("gini", None) => Ok(ScoreKind::Gini),
        ("center", None) => Ok(ScoreKind::Center),
        ("trimmed", Some(p)) => {
            let t: Vec<f64> = parse_list("weights", p)?;
            match t.as_slice() {
                [t1, t2] => Ok(ScoreKind::Trimmed { t1: *t1, t2: *t2 }),
                _ => Err(Error::Invalid(format!("trimmed weights need two parameters, got {p:?}"))),
            }
        }
        ("custom", Some(path)) => {
            let file = std::fs::File::open(path)
                .map_err(|e| Error::Invalid(format!("cannot open score table {path}: {e}")))?;
            Ok(ScoreKind::Custom(TabulatedScore::from_csv_reader(file)?))
        }
        _ => Err(Error::Invalid(format!("unknown weights {spec:?}"))),
    }
}

fn parse_grid(value: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = value.split(':').map(|s| parse_value("grid", s)).collect::<Result<_>>()?;
    match parts.as_slice() {
        [lo, hi, step] if lo < hi && *step > 0.0 => Ok((*lo, *hi, *step)),
        _ => Err(Error::Invalid(format!("grid must be LO:HI:STEP with LO < HI and STEP > 0, got {value:?}"))),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("file not found: {}", path.display())))
    }
}

impl RunConfig {
    /// Merges flags over the optional config file over defaults and checks
    /// the result.
    pub fn resolve(opts: &Options) -> Result<Self> {
        let file = match &opts.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str| file.get(key).map(String::as_str);

        let population = match (&opts.population, opts.logistic) {
            (Some(path), _) => PopulationSource::File(path.clone()),
            (None, Some(size)) => PopulationSource::Logistic { size },
            (None, None) => match (get("population"), get("logistic")) {
                (Some(_), Some(_)) => {
                    return Err(Error::Invalid("config sets both population and logistic".into()))
                }
                (Some(path), None) => PopulationSource::File(PathBuf::from(path)),
                (None, Some(size)) => PopulationSource::Logistic { size: parse_value("logistic", size)? },
                (None, None) => PopulationSource::Logistic { size: DEFAULT_LOGISTIC_SIZE },
            },
        };
        if let PopulationSource::File(path) = &population {
            require_file(path)?;
        }

        let weights = match (&opts.weights, &opts.weights_file) {
            (Some(spec), _) => WeightsSpec::Score(parse_weights(spec)?),
            (None, Some(path)) => WeightsSpec::File(path.clone()),
            (None, None) => match (get("weights"), get("weights-file")) {
                (Some(_), Some(_)) => {
                    return Err(Error::Invalid("config sets both weights and weights-file".into()))
                }
                (Some(spec), None) => WeightsSpec::Score(parse_weights(spec)?),
                (None, Some(path)) => WeightsSpec::File(PathBuf::from(path)),
                (None, None) => WeightsSpec::Score(ScoreKind::Center),
            },
        };
        if let WeightsSpec::File(path) = &weights {
            require_file(path)?;
        }

        let sample_sizes = match opts.sample_sizes.as_deref().or(get("n")) {
            Some(list) => parse_list("n", list)?,
            None => DEFAULT_SAMPLE_SIZES.to_vec(),
        };
        if sample_sizes.contains(&0) {
            return Err(Error::Invalid("sample sizes must be positive".into()));
        }
        let quantiles = match opts.quantiles.as_deref().or(get("q")) {
            Some(list) => parse_list("q", list)?,
            None => DEFAULT_QUANTILES.to_vec(),
        };
        if let Some(q) = quantiles.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
            return Err(Error::Invalid(format!("quantile levels must lie in (0, 1), got {q}")));
        }

        let replicates = match opts.replicates {
            Some(r) => r,
            None => get("replicates").map(|v| parse_value("replicates", v)).transpose()?.unwrap_or(DEFAULT_REPLICATES),
        };
        if replicates == 0 {
            return Err(Error::Invalid("replicates must be positive".into()));
        }
        let seed = match opts.seed {
            Some(s) => s,
            None => get("seed").map(|v| parse_value("seed", v)).transpose()?.unwrap_or(DEFAULT_SEED),
        };
        let sigma_mode = match opts.sigma_mode {
            Some(m) => Some(m),
            None => get("sigma-mode")
                .map(|v| SigmaChoice::from_str(v, true).map_err(|e| Error::Invalid(format!("sigma-mode: {e}"))))
                .transpose()?,
        };
        let workers = match opts.workers {
            Some(w) => Some(w),
            None => get("workers").map(|v| parse_value("workers", v)).transpose()?,
        };
        if workers == Some(0) {
            return Err(Error::Invalid("workers must be positive".into()));
        }
        let out = opts.out.clone().or_else(|| get("out").map(PathBuf::from));
        let format = match opts.format {
            Some(f) => f,
            None => get("format")
                .map(|v| OutputFormat::from_str(v, true).map_err(|e| Error::Invalid(format!("format: {e}"))))
                .transpose()?
                .unwrap_or(OutputFormat::Csv),
        };
        let grid = match opts.grid.as_deref().or(get("grid")) {
            Some(g) => parse_grid(g)?,
            None => (-4.0, 4.0, 0.5),
        };
        let dump = opts.dump || get("dump").map(|v| parse_value::<bool>("dump", v)).transpose()?.unwrap_or(false);
        let float = |flag: Option<f64>, key: &str, default: f64| -> Result<f64> {
            match flag {
                Some(v) => Ok(v),
                None => Ok(get(key).map(|v| parse_value(key, v)).transpose()?.unwrap_or(default)),
            }
        };
        let epsilon = float(opts.epsilon, "epsilon", 0.1)?;
        let band_limit = float(opts.band_limit, "band-limit", 10.0)?;
        let grid_step = float(opts.grid_step, "grid-step", 1e-3)?;
        if !(epsilon >= 0.0 && band_limit > epsilon && grid_step > 0.0) {
            return Err(Error::Invalid("diagnostic band needs 0 <= epsilon < band-limit and grid-step > 0".into()));
        }

        Ok(Self {
            population,
            weights,
            sample_sizes,
            quantiles,
            replicates,
            seed,
            sigma_mode,
            workers,
            out,
            format,
            grid,
            dump,
            epsilon,
            band_limit,
            grid_step,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_specs() {
        assert_eq!(parse_weights("gini").unwrap(), ScoreKind::Gini);
        assert_eq!(parse_weights("trimmed:0.1,0.9").unwrap(), ScoreKind::Trimmed { t1: 0.1, t2: 0.9 });
        assert!(parse_weights("trimmed:0.1").is_err());
        assert!(parse_weights("median").is_err());
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(&Options::default()).unwrap();
        assert_eq!(cfg.population, PopulationSource::Logistic { size: 100 });
        assert_eq!(cfg.weights, WeightsSpec::Score(ScoreKind::Center));
        assert_eq!(cfg.sample_sizes, vec![5, 15, 30]);
        assert_eq!(cfg.quantiles.len(), 9);
        assert_eq!(cfg.replicates, 1_000_000);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# run\nlogistic = 40\nn = 4,6\nseed = 3\nsigma_mode = linear\n").unwrap();
        let opts = Options { config: Some(path), seed: Some(9), ..Options::default() };
        let cfg = RunConfig::resolve(&opts).unwrap();
        assert_eq!(cfg.population, PopulationSource::Logistic { size: 40 });
        assert_eq!(cfg.sample_sizes, vec![4, 6]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.sigma_mode, Some(SigmaChoice::Linear));
    }

    #[test]
    fn rejects_bad_values() {
        let bad_q = Options { quantiles: Some("0.5,1.0".into()), ..Options::default() };
        assert!(matches!(RunConfig::resolve(&bad_q), Err(Error::Invalid(_))));
        let missing = Options { population: Some("/nonexistent/pop.txt".into()), ..Options::default() };
        assert!(matches!(RunConfig::resolve(&missing), Err(Error::Invalid(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        std::fs::write(&path, "colour = blue\n").unwrap();
        let unknown = Options { config: Some(path), ..Options::default() };
        assert!(matches!(RunConfig::resolve(&unknown), Err(Error::Parse { line: 1, .. })));
    }
}
